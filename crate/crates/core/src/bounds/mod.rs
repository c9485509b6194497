//! Closed-form bound evaluation and numeric lemma checkers.

pub mod estimates;
pub mod binom;
pub mod exact;
pub mod supersaturation;
pub mod theorems;

pub use estimates::{lemma_b1_check, lemma_b2_check, lemma_b3_check, lemma_b4_check};
pub use binom::{gen_binom, log2_gen_binom};
pub use supersaturation::{supersaturation_check, SupersaturationReport};
pub use theorems::{eval_bound, BoundParams, BoundReport, Theorem};
