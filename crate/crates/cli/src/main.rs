//! `sumset`: command-line front end for enumeration, container construction, bound evaluation
//! and lemma checks.

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Map, Value};
use std::collections::BTreeMap;
use std::io::Write;
use std::process::ExitCode;
use std::time::Instant;
use sumset_core::bounds::{self, BoundParams, Theorem};
use sumset_core::graph::{sumrise, Checking};
use sumset_core::hypergraph::{sunset, SunsetOptions};
use sumset_core::lowerbound::{asym_lower_bound, verify_dilate_family};
use sumset_core::oracle::{self, CensusMode, CoverageMode, EnumOptions, FamilyCensus, Member};
use sumset_core::pipeline::{build_collection, ContainerCollection, ContainerTriple, PipelineParams};
use sumset_core::rational::parse_rational;
use sumset_core::structure::{lev_smeliansky_check, sample_structure_experiment, stability_check};
use sumset_core::{Error, GroundSet, GroupSpec, IndexSet, Rational, Result};

#[derive(Parser, Debug)]
#[command(name = "sumset", version, about = "Containers and exact censuses for sets with small sumset")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// `Z`, `Zmod:q` or `prod:q1,q2,...`.
    #[arg(long, global = true, default_value = "Z")]
    group: String,
    /// `interval:a..b`, `all`, or a comma list of elements.
    #[arg(long, global = true)]
    ground: Option<String>,
    #[arg(long, global = true)]
    m: Option<usize>,
    #[arg(long, global = true)]
    s: Option<usize>,
    #[arg(long, global = true)]
    s2: Option<usize>,
    #[arg(long, global = true)]
    lambda: Option<usize>,
    #[arg(long, global = true)]
    epsilon: Option<String>,
    #[arg(long, global = true)]
    delta: Option<String>,
    #[arg(long, global = true)]
    mode: Option<String>,
    #[arg(long, global = true, default_value_t = 1000)]
    samples: usize,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Cost cap on enumeration work.
    #[arg(long, global = true)]
    cap: Option<u128>,
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[arg(long, global = true)]
    out: Option<std::path::PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Include per-iteration trace records.
    #[arg(long, global = true)]
    trace: bool,
    /// Skip precondition checks.
    #[arg(long, global = true)]
    unchecked: bool,
    #[arg(long = "set-a", global = true)]
    set_a: Option<String>,
    #[arg(long = "set-b", global = true)]
    set_b: Option<String>,
    #[arg(long, global = true)]
    u0: Option<String>,
    #[arg(long, global = true)]
    u1: Option<String>,
    #[arg(long, global = true)]
    u2: Option<String>,
    /// Add wall-clock time to the output (breaks byte-reproducibility).
    #[arg(long, global = true)]
    timing: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
enum Command {
    Count {
        #[command(subcommand)]
        what: CountCmd,
    },
    Containers {
        #[command(subcommand)]
        what: ContainersCmd,
    },
    Bound {
        #[command(subcommand)]
        what: BoundCmd,
    },
    Lemma {
        #[command(subcommand)]
        what: LemmaCmd,
    },
    Structure {
        #[command(subcommand)]
        what: StructureCmd,
    },
    Lowerbound {
        #[command(subcommand)]
        what: LowerboundCmd,
    },
    Sumrise {
        #[command(subcommand)]
        what: RunCmd,
    },
    Sunset {
        #[command(subcommand)]
        what: RunCmd,
    },
}

#[derive(Subcommand, Debug)]
enum CountCmd {
    /// Exact census of a small-sumset family.
    Exact {
        /// Minimum set size for `asym-unrefined`.
        #[arg(long = "min-size", default_value_t = 0)]
        min_size: usize,
        /// List the members.
        #[arg(long)]
        members: bool,
    },
}

#[derive(Args, Debug)]
struct ContainerArgs {
    /// Run with the theorem's fingerprint sizes instead of clamping them to the family.
    #[arg(long)]
    theorem_regime: bool,
    /// List every final triple.
    #[arg(long)]
    list: bool,
}

#[derive(Subcommand, Debug)]
enum ContainersCmd {
    /// Build the final container collection over the census family.
    Build(ContainerArgs),
    /// Build, then check that every census member is contained.
    Verify(ContainerArgs),
}

#[derive(Subcommand, Debug)]
enum BoundCmd {
    Eval {
        #[arg(long)]
        theorem: String,
        /// Ground set size; defaults to the size of `--ground`.
        #[arg(long)]
        n: Option<u64>,
        /// Fail instead of warning outside the theorem's hypotheses.
        #[arg(long)]
        strict: bool,
    },
}

#[derive(Subcommand, Debug)]
enum LemmaCmd {
    /// `b1`, `b2`, `b3`, `b4`, `supersaturation`, `lev-smeliansky` or `stability`.
    Check {
        #[arg(long)]
        lemma: String,
        /// Numeric inputs as `name=value`, repeatable.
        #[arg(long = "param")]
        params: Vec<String>,
    },
}

#[derive(Subcommand, Debug)]
enum StructureCmd {
    Sample {
        /// The `c` in AP length `⌈m/2 + c m⌉`.
        #[arg(long, default_value = "0")]
        slack: String,
    },
}

#[derive(Subcommand, Debug)]
enum LowerboundCmd {
    #[command(name = "appendixA")]
    AppendixA {
        #[arg(long)]
        n: u64,
        /// Allow instances outside the construction's size hypotheses.
        #[arg(long)]
        relaxed: bool,
    },
    Asym {
        #[arg(long)]
        n: u64,
    },
}

#[derive(Subcommand, Debug)]
enum RunCmd {
    Run,
}

fn usage(msg: impl Into<String>) -> Error {
    Error::Usage(msg.into())
}

impl Common {
    fn spec(&self) -> Result<GroupSpec> {
        GroupSpec::parse(&self.group)
    }

    fn ground(&self) -> Result<GroundSet> {
        let spec = self.spec()?;
        let text = self.ground.as_deref().ok_or_else(|| usage("--ground is required"))?;
        let elements = spec.parse_ground(text)?;
        GroundSet::new(spec, elements)
    }

    fn need<T: Copy>(v: Option<T>, name: &str) -> Result<T> {
        v.ok_or_else(|| usage(format!("--{name} is required")))
    }

    fn m(&self) -> Result<usize> {
        Self::need(self.m, "m")
    }

    fn s(&self) -> Result<usize> {
        Self::need(self.s, "s")
    }

    fn epsilon(&self, default: Option<&str>) -> Result<Rational> {
        let text = self.epsilon.as_deref().or(default).ok_or_else(|| usage("--epsilon is required"))?;
        let eps = parse_rational(text)?;
        if eps <= Rational::from_integer(0) || eps >= Rational::new(1, 4) {
            return Err(Error::Domain(format!("epsilon must lie in (0, 1/4), got {text}")));
        }
        Ok(eps)
    }

    fn delta(&self) -> Result<Rational> {
        parse_rational(self.delta.as_deref().ok_or_else(|| usage("--delta is required"))?)
    }

    fn opts(&self, materialize: bool) -> EnumOptions {
        let mut o = EnumOptions { materialize, ..EnumOptions::default() };
        if let Some(c) = self.cap {
            o.cost_cap = c;
        }
        o
    }

    fn y_set(&self, g: &GroundSet, text: Option<&str>, name: &str) -> Result<IndexSet> {
        match text {
            None => Ok(g.full_y()),
            Some(t) => g.y_set(&g.spec().parse_ground(t)?).map_err(|e| usage(format!("--{name}: {e}"))),
        }
    }

    fn required_y(&self, g: &GroundSet, text: Option<&str>, name: &str) -> Result<IndexSet> {
        let t = text.ok_or_else(|| usage(format!("--{name} is required")))?;
        self.y_set(g, Some(t), name)
    }

    fn sums_set(&self, g: &GroundSet, text: Option<&str>) -> Result<IndexSet> {
        match text {
            None => Ok(g.full_sums()),
            Some(t) => g.sums_set(&g.spec().parse_ground(t)?),
        }
    }

    fn checking(&self) -> Checking {
        if self.unchecked {
            Checking::Unchecked
        } else {
            Checking::Strict
        }
    }
}

fn ints(text: Option<&str>, name: &str) -> Result<Vec<i64>> {
    let t = text.ok_or_else(|| usage(format!("--{name} is required")))?;
    t.split(',').map(|x| x.trim().parse::<i64>().map_err(|_| usage(format!("--{name}: bad integer {x:?}")))).collect()
}

fn vals(g: &GroundSet, set: &IndexSet) -> Value {
    serde_json::to_value(g.values(set)).expect("elements serialize")
}

fn triple_json(g: &GroundSet, t: &ContainerTriple) -> Value {
    json!({ "c0": vals(g, &t.c0), "c1": vals(g, &t.c1), "c2": vals(g, &t.c2) })
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report serializes")
}

fn census(c: &Common, g: &GroundSet, mode: CensusMode, min_size: usize, materialize: bool) -> Result<FamilyCensus> {
    let m = c.m()?;
    let opts = c.opts(materialize);
    match mode {
        CensusMode::Sym => oracle::census_symmetric(g, m, c.s()?, &opts),
        CensusMode::Unrefined => oracle::census_unrefined(g, m, &opts),
        CensusMode::Asym => oracle::census_asymmetric(g, m, c.s()?, Common::need(c.s2, "s2")?, &opts),
        CensusMode::AsymUnrefined => oracle::census_asym_unrefined(g, m, min_size, &opts),
    }
}

fn count_exact(c: &Common, min_size: usize, members: bool) -> Result<Value> {
    let g = c.ground()?;
    let mode = CensusMode::parse(c.mode.as_deref().unwrap_or("sym"))?;
    let r = census(c, &g, mode, min_size, members)?;
    let mut out = to_value(&r);
    let obj = out.as_object_mut().expect("census is an object");
    obj.remove("members");
    obj.remove("materialized");
    obj.insert("n".into(), json!(g.n()));
    if members {
        if !r.materialized {
            return Err(Error::CapExceeded {
                what: "census members".into(),
                estimate: r.count.to_string().parse().unwrap_or(u128::MAX),
                cap: EnumOptions::default().member_cap as u128,
            });
        }
        let list: Vec<Value> = r
            .members
            .iter()
            .map(|m| match m {
                Member::Set(a) => vals(&g, a),
                Member::Pair(a, b) => json!([vals(&g, a), vals(&g, b)]),
            })
            .collect();
        out["members"] = Value::Array(list);
    }
    Ok(out)
}

fn containers(c: &Common, args: &ContainerArgs, verify: bool) -> Result<Value> {
    let g = c.ground()?;
    let m = c.m()?;
    let eps = c.epsilon(Some("1/5"))?;
    let mode = CensusMode::parse(c.mode.as_deref().unwrap_or("sym"))?;
    if !matches!(mode, CensusMode::Sym | CensusMode::Asym) {
        return Err(usage("containers support --mode sym or asym"));
    }
    let fam = census(c, &g, mode, 0, true)?;
    if !fam.materialized {
        return Err(Error::CapExceeded {
            what: "census members".into(),
            estimate: fam.count.to_string().parse().unwrap_or(u128::MAX),
            cap: EnumOptions::default().member_cap as u128,
        });
    }
    let pairs = fam.pairs();
    let min_a = pairs.iter().map(|p| p.0.count()).min().unwrap_or(1);
    let min_b = pairs.iter().map(|p| p.1.count()).min().unwrap_or(1);
    let params =
        if args.theorem_regime { PipelineParams::theorem(m, eps)? } else { PipelineParams::desk(m, eps, min_a, min_b)? };
    let coll: ContainerCollection = build_collection(&g, &pairs, &params)?;
    let triples = coll.triples();
    let s2 = if mode == CensusMode::Asym { c.s2 } else { None };
    let bound = oracle::bound_from_collection(&triples, c.s()?, s2);
    let mut out = json!({
        "params": to_value(&params),
        "pairs": coll.pairs,
        "containers": triples.len(),
        "max_steps": coll.max_steps,
        "step_bound": coll.step_bound,
        "first_stage_fingerprints": coll.first_stage_fingerprints,
        "final_dichotomy_failures": coll.final_dichotomy_failures,
        "size_bound_failures": coll.size_bound_failures,
        "unlabelled_steps": coll.unlabelled_steps,
        "in_regime_steps": coll.in_regime_steps,
        "bound_from_collection": bound.to_string(),
    });
    if args.list {
        out["triples"] = Value::Array(triples.iter().map(|t| triple_json(&g, t)).collect());
    }
    if verify {
        let cov_mode = if mode == CensusMode::Sym { CoverageMode::Symmetric } else { CoverageMode::Pair };
        let rep = oracle::verify_coverage(&g, &triples, &fam, cov_mode);
        let pct = if rep.total == 0 { 100 } else { rep.covered * 100 / rep.total };
        out["census"] = json!(fam.count.to_string());
        out["total"] = json!(rep.total);
        out["covered_members"] = json!(rep.covered);
        out["covered"] = json!(format!("{pct}%"));
        out["sound"] = json!(fam.count <= bound);
        if !rep.complete() {
            return Err(Error::Falsified(format!("{} of {} census members are not contained", rep.total - rep.covered, rep.total)));
        }
    }
    Ok(out)
}

fn bound_eval(c: &Common, theorem: &str, n: Option<u64>, strict: bool) -> Result<Value> {
    let which = Theorem::parse(theorem)?;
    let n = match n {
        Some(n) => n,
        None => c.ground()?.n() as u64,
    };
    let p = BoundParams { n, m: c.m()? as u64, s: c.s.map(|x| x as u64), s2: c.s2.map(|x| x as u64) };
    Ok(to_value(&bounds::eval_bound(which, &p, &c.spec()?, strict)?))
}

struct Params(BTreeMap<String, String>);

impl Params {
    fn parse(list: &[String]) -> Result<Self> {
        let mut map = BTreeMap::new();
        for item in list {
            let (k, v) = item.split_once('=').ok_or_else(|| usage(format!("--param expects name=value, got {item:?}")))?;
            map.insert(k.trim().to_string(), v.trim().to_string());
        }
        Ok(Params(map))
    }

    fn text(&self, k: &str) -> Result<&str> {
        self.0.get(k).map(String::as_str).ok_or_else(|| usage(format!("missing --param {k}=...")))
    }

    fn int(&self, k: &str) -> Result<u64> {
        self.text(k)?.parse().map_err(|_| usage(format!("--param {k} must be a non-negative integer")))
    }

    fn rat(&self, k: &str) -> Result<Rational> {
        parse_rational(self.text(k)?)
    }
}

fn falsified_unless(ok: bool, what: &str, report: Value) -> Result<Value> {
    if ok {
        Ok(report)
    } else {
        Err(Error::Falsified(format!("{what}: {report}")))
    }
}

fn lemma_check(c: &Common, lemma: &str, raw: &[String]) -> Result<Value> {
    let p = Params::parse(raw)?;
    match lemma {
        "b1" => {
            let r = bounds::lemma_b1_check(p.int("s1")?, p.int("s2")?, p.int("m")?)?;
            falsified_unless(r.inequality_holds && r.monotone_holds, "b1", to_value(&r))
        }
        "b2" => {
            let r = bounds::lemma_b2_check(&p.rat("a")?, &p.rat("b")?, &p.rat("d")?, &p.rat("eps")?, &p.rat("delta")?, p.int("s")?);
            let ok = !(r.part1.failed() || r.part2.failed() || r.part3.failed());
            falsified_unless(ok, "b2", to_value(&r))
        }
        "b3" => {
            let r = bounds::lemma_b3_check(p.int("s1")?, p.int("s2")?, p.int("m")?, &p.rat("delta")?, &p.rat("eps")?)?;
            falsified_unless(r.holds, "b3", to_value(&r))
        }
        "b4" => {
            let r = bounds::lemma_b4_check(&p.rat("delta")?, &p.rat("gamma")?, &p.rat("t")?, p.int("s")?)?;
            falsified_unless(r.holds, "b4", to_value(&r))
        }
        "supersaturation" => {
            let g = c.ground()?;
            let d1 = c.required_y(&g, c.set_a.as_deref(), "set-a")?;
            let d2 = c.required_y(&g, c.set_b.as_deref(), "set-b")?;
            let w = c.sums_set(&g, Some(c.u0.as_deref().ok_or_else(|| usage("--u0 (the target W) is required"))?))?;
            let r = bounds::supersaturation_check(&g, &d1, &d2, &w, &c.epsilon(None)?, None)?;
            falsified_unless(!r.hypothesis_holds || r.conclusion_holds, "supersaturation", to_value(&r))
        }
        "lev-smeliansky" => {
            let r = lev_smeliansky_check(&ints(c.set_a.as_deref(), "set-a")?, &ints(c.set_b.as_deref(), "set-b")?)?;
            falsified_unless(r.conclusion_holds != Some(false), "lev-smeliansky", to_value(&r))
        }
        "stability" => {
            let eps = parse_rational(c.epsilon.as_deref().ok_or_else(|| usage("--epsilon is required"))?)?;
            let r = stability_check(
                &ints(c.set_a.as_deref(), "set-a")?,
                &ints(c.set_b.as_deref(), "set-b")?,
                &ints(c.u0.as_deref(), "u0")?,
                &eps,
                c.s()? as u64,
                Common::need(c.s2, "s2")? as u64,
            );
            falsified_unless(r.consistent(), "stability", to_value(&r))
        }
        _ => Err(usage(format!("unknown lemma {lemma:?}; expected b1, b2, b3, b4, supersaturation, lev-smeliansky or stability"))),
    }
}

fn structure_sample(c: &Common, slack: &str) -> Result<Value> {
    let g = c.ground()?;
    let r = sample_structure_experiment(&g, c.m()?, c.s()?, c.s2, c.samples, c.seed, &parse_rational(slack)?, &c.opts(true))?;
    Ok(to_value(&r))
}

fn dilate_family(c: &Common, n: u64, relaxed: bool) -> Result<Value> {
    let r = verify_dilate_family(n, c.m()?, c.s()?, relaxed, &c.opts(false))?;
    falsified_unless(r.holds(), "dilate family", to_value(&r))
}

fn sumrise_run(c: &Common) -> Result<Value> {
    let g = c.ground()?;
    let a = c.required_y(&g, c.set_a.as_deref(), "set-a")?;
    let f = c.required_y(&g, c.set_b.as_deref(), "set-b")?;
    let u0 = c.sums_set(&g, c.u0.as_deref())?;
    let u1 = c.y_set(&g, c.u1.as_deref(), "u1")?;
    let r = sumrise(&g, c.s()?, &a, &f, &u0, &u1, c.checking())?;
    let mut out = json!({ "s": vals(&g, &r.s), "c0": vals(&g, &r.c0), "c1": vals(&g, &r.c1) });
    if c.trace {
        out["trace"] = json!(r.trace.to_lines());
    }
    Ok(out)
}

fn sunset_run(c: &Common) -> Result<Value> {
    let g = c.ground()?;
    let a = c.required_y(&g, c.set_a.as_deref(), "set-a")?;
    let b = c.required_y(&g, c.set_b.as_deref(), "set-b")?;
    let u0 = c.sums_set(&g, c.u0.as_deref())?;
    let u1 = c.y_set(&g, c.u1.as_deref(), "u1")?;
    let u2 = c.y_set(&g, c.u2.as_deref(), "u2")?;
    let lambda = Common::need(c.lambda, "lambda")?;
    let opts = SunsetOptions { checking: c.checking(), ..Default::default() };
    let r = sunset(&g, &c.delta()?, c.s()?, lambda, &a, &b, &u0, &u1, &u2, opts)?;
    let mut out = json!({
        "branch": r.branch.as_str(),
        "s": vals(&g, &r.s),
        "f": vals(&g, &r.f),
        "c0": vals(&g, &r.c0),
        "c1": vals(&g, &r.c1),
        "c2": vals(&g, &r.c2),
        "hyper_edges": r.hyper_edges,
        "graph_edges": r.graph_edges,
    });
    if c.trace {
        out["trace"] = json!(r.trace_lines());
    }
    Ok(out)
}

fn dispatch(cli: &Cli) -> Result<(String, Value)> {
    let c = &cli.common;
    Ok(match &cli.command {
        Command::Count { what: CountCmd::Exact { min_size, members } } => ("count exact".into(), count_exact(c, *min_size, *members)?),
        Command::Containers { what: ContainersCmd::Build(a) } => ("containers build".into(), containers(c, a, false)?),
        Command::Containers { what: ContainersCmd::Verify(a) } => ("containers verify".into(), containers(c, a, true)?),
        Command::Bound { what: BoundCmd::Eval { theorem, n, strict } } => ("bound eval".into(), bound_eval(c, theorem, *n, *strict)?),
        Command::Lemma { what: LemmaCmd::Check { lemma, params } } => ("lemma check".into(), lemma_check(c, lemma, params)?),
        Command::Structure { what: StructureCmd::Sample { slack } } => ("structure sample".into(), structure_sample(c, slack)?),
        Command::Lowerbound { what: LowerboundCmd::AppendixA { n, relaxed } } => {
            ("lowerbound appendixA".into(), dilate_family(c, *n, *relaxed)?)
        }
        Command::Lowerbound { what: LowerboundCmd::Asym { n } } => {
            let r = asym_lower_bound(*n, c.m()? as u64, c.s()? as u64, Common::need(c.s2, "s2")? as u64)?;
            ("lowerbound asym".into(), to_value(&r))
        }
        Command::Sumrise { what: RunCmd::Run } => ("sumrise run".into(), sumrise_run(c)?),
        Command::Sunset { what: RunCmd::Run } => ("sunset run".into(), sunset_run(c)?),
    })
}

fn csv_cell(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => String::new(),
        other => other.to_string(),
    }
}

fn render(format: Format, body: &Map<String, Value>) -> Result<String> {
    match format {
        Format::Json => Ok(serde_json::to_string_pretty(body).expect("json") + "\n"),
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            let io = |e: csv::Error| Error::Domain(format!("csv output: {e}"));
            w.write_record(body.keys()).map_err(io)?;
            w.write_record(body.values().map(csv_cell)).map_err(io)?;
            Ok(String::from_utf8(w.into_inner().map_err(|e| Error::Domain(e.to_string()))?).expect("utf8"))
        }
    }
}

fn emit(common: &Common, text: &str) -> Result<()> {
    match &common.out {
        Some(path) => std::fs::write(path, text).map_err(|e| Error::Domain(format!("writing {}: {e}", path.display()))),
        None => {
            let mut so = std::io::stdout().lock();
            so.write_all(text.as_bytes()).map_err(|e| Error::Domain(e.to_string()))
        }
    }
}

fn run(cli: &Cli) -> Result<()> {
    let start = Instant::now();
    let (command, value) = dispatch(cli)?;
    let mut body = Map::new();
    body.insert("schema".into(), json!(1));
    body.insert("command".into(), json!(command));
    match value {
        Value::Object(map) => body.extend(map),
        other => {
            body.insert("result".into(), other);
        }
    }
    if cli.common.timing {
        body.insert("elapsed_ms".into(), json!(start.elapsed().as_millis() as u64));
    }
    emit(&cli.common, &render(cli.common.format, &body)?)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Some(t) = cli.common.threads {
        if t == 0 {
            eprintln!("error: --threads must be positive");
            return ExitCode::from(1);
        }
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
    }
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
