//! `cascade-logic` command-line front end.
//!
//! Network files are the interchange format between subcommands; every
//! command that reads one accepts `--net -` (the default) for standard input,
//! so `compile ... | table` works as a pipeline.
//!
//! Exit codes: 0 success, 1 usage error, 2 input-file error, 3 resource cap.
//! Errors are reported on standard error as one JSON object.

use std::collections::BTreeSet;
use std::fs;
use std::io::{self, Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use cascade_logic::analyze::{
    enumerate_fixpoints, network_schedule_sensitivity, verify_determinism, DeterminismVerdict, DEFAULT_STATE_CAP,
};
use cascade_logic::circuit::{
    compile_outputs, eval, parse_expr, truth_table, Basis, CircuitError, CompiledCircuit, Expr,
};
use cascade_logic::engine::{run_cascade_with, EngineError, Examination, ScheduleMode};
use cascade_logic::exp::{emit_csv, run_sweep, ExpError, Metric, SweepSpec};
use cascade_logic::net::{
    assign_thresholds, from_json, generate_er, p_for_mean_degree, stats, to_json, Network, NodeId, Rule, ThresholdMode,
};
use cascade_logic::rng::{derive_seed, RNG_NAME};
use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "cascade-logic", version, about = "Threshold cascades and the logic circuits they compute")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate an Erdős–Rényi network with thresholds.
    Gen(GenArgs),
    /// Print size, edge count, mean degree and clustering of a network.
    Stats(NetArg),
    /// Run a cascade and print the final configuration.
    Run(RunArgs),
    /// Compile Boolean expressions into a circuit network.
    Compile(CompileArgs),
    /// Evaluate a circuit on one input assignment.
    Eval(EvalArgs),
    /// Print the truth table of a circuit as CSV.
    Table(NetArg),
    /// Enumerate every fixpoint reachable from the seeds.
    Fixpoints(FixpointsArgs),
    /// Compare random schedules against the reference schedule.
    Sensitivity(SensitivityArgs),
    /// Check that random monotone networks have a unique reachable fixpoint.
    VerifyGcm(VerifyArgs),
    /// Cascade frequency and size over a range of mean degrees.
    Sweep(SweepArgs),
}

#[derive(Args)]
struct NetArg {
    /// Network file, or `-` for standard input.
    #[arg(long, default_value = "-")]
    net: String,
}

#[derive(Args)]
#[command(group = clap::ArgGroup::new("density").required(true).args(["z", "p"]))]
struct GenArgs {
    #[arg(long)]
    n: usize,
    /// Mean degree; sets p = z / (n − 1).
    #[arg(long)]
    z: Option<f64>,
    /// Edge probability.
    #[arg(long)]
    p: Option<f64>,
    #[arg(long, default_value = "gcm")]
    rule: Rule,
    /// `uniform` or `const:<x>`.
    #[arg(long, default_value = "uniform", value_parser = parse_phi)]
    phi: ThresholdMode,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Seed nodes stored in the file, e.g. `0,5`.
    #[arg(long, value_parser = parse_ids)]
    seeds: Option<IdList>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long, default_value = "-")]
    net: String,
    /// Seed nodes, e.g. `0,3`; defaults to the seeds in the file.
    #[arg(long, value_parser = parse_ids)]
    seeds: Option<IdList>,
    /// `sweep:<seed>`, `order:<id,...>` or `topo`.
    #[arg(long, default_value = "sweep:0", value_parser = parse_mode)]
    mode: ScheduleMode,
    /// Which unlabeled nodes a pass examines: `all` or `reached`.
    #[arg(long, default_value = "all")]
    examine: Examination,
}

#[derive(Args)]
struct CompileArgs {
    /// Expression, optionally named as `name=expr`; repeat for several outputs.
    #[arg(long = "expr", required = true)]
    exprs: Vec<String>,
    /// `mixed`, `nand` or `nor`.
    #[arg(long, default_value = "mixed")]
    basis: Basis,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long, default_value = "-")]
    net: String,
    /// Input values, e.g. `a=1,b=0`.
    #[arg(long, value_parser = parse_assign)]
    assign: Assignment,
}

#[derive(Args)]
struct FixpointsArgs {
    #[arg(long, default_value = "-")]
    net: String,
    #[arg(long, value_parser = parse_ids)]
    seeds: Option<IdList>,
    /// Largest number of configurations to explore.
    #[arg(long, default_value_t = DEFAULT_STATE_CAP)]
    cap: usize,
}

#[derive(Args)]
struct SensitivityArgs {
    #[arg(long, default_value = "-")]
    net: String,
    /// Circuit input values; seeds are the inputs set to 1.
    #[arg(long, value_parser = parse_assign, conflicts_with = "seeds")]
    assign: Option<Assignment>,
    /// Seed nodes for a plain network; defaults to the seeds in the file.
    #[arg(long, value_parser = parse_ids)]
    seeds: Option<IdList>,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    z: f64,
    #[arg(long, default_value_t = 200)]
    instances: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "gcm")]
    rule: Rule,
    #[arg(long, default_value_t = DEFAULT_STATE_CAP)]
    cap: usize,
    #[command(flatten)]
    jobs: Jobs,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long, default_value_t = 1000)]
    n: usize,
    /// Inclusive `start:stop:step`, or a single value.
    #[arg(long, default_value = "1:10:1", value_parser = parse_z_range)]
    z: ZRange,
    /// Threshold shared by every node.
    #[arg(long, default_value_t = 0.18)]
    phi: f64,
    #[arg(long, default_value = "agcm")]
    rule: Rule,
    #[arg(long, default_value_t = 100)]
    realizations: usize,
    #[arg(long, default_value_t = 1)]
    seeds_per_run: usize,
    /// `global:<fraction>` or `median`.
    #[arg(long, default_value = "global:0.5", value_parser = parse_metric)]
    metric: Metric,
    /// Which unlabeled nodes a pass examines: `reached` or `all`.
    #[arg(long, default_value = "reached")]
    examine: Examination,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// CSV destination; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write every cascade size as JSON.
    #[arg(long)]
    sizes_out: Option<PathBuf>,
    #[command(flatten)]
    jobs: Jobs,
}

#[derive(Args)]
struct Jobs {
    /// Worker threads; the output does not depend on it.
    #[arg(long, env = "CASCADE_LOGIC_JOBS")]
    jobs: Option<usize>,
}

#[derive(Clone)]
struct Assignment(Vec<(String, bool)>);

#[derive(Clone)]
struct ZRange(Vec<f64>);

#[derive(Clone)]
struct IdList(Vec<NodeId>);

fn parse_ids(s: &str) -> Result<IdList, String> {
    if s.trim().is_empty() {
        return Ok(IdList(Vec::new()));
    }
    s.split(',')
        .map(|t| t.trim().parse::<u32>().map(NodeId).map_err(|e| format!("bad node id {t:?}: {e}")))
        .collect::<Result<_, _>>()
        .map(IdList)
}

fn parse_phi(s: &str) -> Result<ThresholdMode, String> {
    match s.split_once(':') {
        None if s == "uniform" => Ok(ThresholdMode::UniformRandom),
        Some(("const", x)) => x.parse().map(ThresholdMode::Constant).map_err(|e| format!("bad threshold {x:?}: {e}")),
        _ => Err(format!("expected `uniform` or `const:<x>`, got {s:?}")),
    }
}

fn parse_mode(s: &str) -> Result<ScheduleMode, String> {
    match s.split_once(':') {
        None if s == "topo" => Ok(ScheduleMode::Topological),
        Some(("sweep", seed)) => {
            seed.parse().map(|seed| ScheduleMode::RandomSweep { seed }).map_err(|e| format!("bad seed {seed:?}: {e}"))
        }
        Some(("order", ids)) => parse_ids(ids).map(|l| ScheduleMode::Explicit(l.0)),
        _ => Err(format!("expected `sweep:<seed>`, `order:<id,...>` or `topo`, got {s:?}")),
    }
}

fn parse_assign(s: &str) -> Result<Assignment, String> {
    let mut out = Vec::new();
    for item in s.split(',').filter(|t| !t.trim().is_empty()) {
        let (name, bit) = item.split_once('=').ok_or_else(|| format!("expected name=0|1, got {item:?}"))?;
        let bit = match bit.trim() {
            "0" => false,
            "1" => true,
            other => return Err(format!("value of {name:?} must be 0 or 1, got {other:?}")),
        };
        out.push((name.trim().to_string(), bit));
    }
    Ok(Assignment(out))
}

fn parse_metric(s: &str) -> Result<Metric, String> {
    match s.split_once(':') {
        None if s == "median" => Ok(Metric::MedianExceedance),
        Some(("global", x)) => x.parse().map(Metric::GlobalFraction).map_err(|e| format!("bad fraction {x:?}: {e}")),
        _ => Err(format!("expected `global:<fraction>` or `median`, got {s:?}")),
    }
}

fn parse_z_range(s: &str) -> Result<ZRange, String> {
    let num = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("bad number {t:?}: {e}"));
    let parts: Vec<&str> = s.split(':').collect();
    let (start, stop, step) = match parts[..] {
        [one] => (num(one)?, num(one)?, 1.0),
        [a, b] => (num(a)?, num(b)?, 1.0),
        [a, b, c] => (num(a)?, num(b)?, num(c)?),
        _ => return Err(format!("expected start:stop:step, got {s:?}")),
    };
    if step.is_nan() || step <= 0.0 || stop < start {
        return Err(format!("empty or invalid range {s:?}"));
    }
    // Index-based so that accumulated rounding never drops the endpoint.
    let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
    Ok(ZRange((0..count).map(|i| start + i as f64 * step).collect()))
}

/// A failure with its exit code.
enum Failure {
    Usage(String),
    Input(String),
    Cap(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Input(_) => 2,
            Failure::Cap(_) => 3,
        }
    }

    fn report(&self) -> String {
        let (kind, message) = match self {
            Failure::Usage(m) => ("usage", m),
            Failure::Input(m) => ("input", m),
            Failure::Cap(m) => ("resource-cap", m),
        };
        json!({ "error": kind, "code": self.code(), "message": message }).to_string()
    }
}

fn usage(e: impl ToString) -> Failure {
    Failure::Usage(e.to_string())
}

fn input(e: impl ToString) -> Failure {
    Failure::Input(e.to_string())
}

/// Engine errors caused by flags are usage errors; the rest concern the file.
fn engine_failure(e: EngineError) -> Failure {
    match e {
        EngineError::UnknownSeed(_) | EngineError::UnknownOrderNode(_) | EngineError::IncompleteOrder(_) => usage(e),
        _ => input(e),
    }
}

fn circuit_failure(e: CircuitError) -> Failure {
    match e {
        CircuitError::Parse(_)
        | CircuitError::MissingInput(_)
        | CircuitError::UnknownInput(_)
        | CircuitError::UnsupportedFanIn { .. } => usage(e),
        CircuitError::TooManyInputs(_) => Failure::Cap(e.to_string()),
        CircuitError::Engine(e) => engine_failure(e),
        _ => input(e),
    }
}

type Outcome = Result<(), Failure>;

fn read_network(path: &str) -> Result<Network, Failure> {
    let text = if path == "-" {
        let mut s = String::new();
        io::stdin().read_to_string(&mut s).map_err(|e| input(format!("standard input: {e}")))?;
        s
    } else {
        fs::read_to_string(path).map_err(|e| input(format!("{path}: {e}")))?
    };
    from_json(&text).map_err(input)
}

fn read_circuit(path: &str) -> Result<CompiledCircuit, Failure> {
    CompiledCircuit::from_network(read_network(path)?).map_err(input)
}

fn write_to(out: Option<&PathBuf>, text: &str) -> Outcome {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| input(format!("{}: {e}", path.display()))),
        None => print_stdout(text),
    }
}

fn print_stdout(text: &str) -> Outcome {
    let mut stdout = io::stdout().lock();
    stdout.write_all(text.as_bytes()).and_then(|_| stdout.flush()).map_err(|e| input(format!("standard output: {e}")))
}

fn print_json(value: &Value) -> Outcome {
    print_stdout(&format!("{value}\n"))
}

fn seeds_or_file(flag: Option<IdList>, net: &Network) -> BTreeSet<NodeId> {
    flag.map(|l| l.0.into_iter().collect()).unwrap_or_else(|| net.seeds().clone())
}

fn circuit_seeds(circuit: &CompiledCircuit, assignment: &Assignment) -> Result<BTreeSet<NodeId>, Failure> {
    let mut seeds = BTreeSet::new();
    let mut given = BTreeSet::new();
    for (name, bit) in &assignment.0 {
        let id = *circuit.inputs().get(name).ok_or_else(|| usage(CircuitError::UnknownInput(name.clone())))?;
        given.insert(name.as_str());
        if *bit {
            seeds.insert(id);
        }
    }
    if let Some(missing) = circuit.inputs().keys().find(|k| !given.contains(k.as_str())) {
        return Err(usage(CircuitError::MissingInput(missing.clone())));
    }
    Ok(seeds)
}

fn with_jobs<T: Send>(jobs: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T, Failure> {
    let threads = match jobs {
        Some(0) => return Err(usage("--jobs must be at least 1")),
        Some(j) => j,
        None => std::thread::available_parallelism().map_or(1, |n| n.get()),
    };
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().map_err(usage)?;
    Ok(pool.install(f))
}

fn gen(a: GenArgs) -> Outcome {
    let p = match (a.z, a.p) {
        (Some(z), _) => {
            if a.n < 2 || !(z >= 0.0 && z <= (a.n - 1) as f64) {
                return Err(usage(format!("mean degree {z} must lie in [0, n−1] with n ≥ 2")));
            }
            p_for_mean_degree(a.n, z)
        }
        (None, Some(p)) => p,
        (None, None) => unreachable!("clap requires --z or --p"),
    };
    let graph = generate_er(a.n, p, derive_seed(a.seed, &[0])).map_err(usage)?;
    let mut net = assign_thresholds(graph, a.phi, a.rule, derive_seed(a.seed, &[1])).map_err(usage)?;
    if let Some(seeds) = a.seeds {
        net = net.with_seeds(seeds.0.into_iter().collect()).map_err(usage)?;
    }
    write_to(a.out.as_ref(), &to_json(&net))
}

fn cmd_stats(a: NetArg) -> Outcome {
    let s = stats(&read_network(&a.net)?).map_err(input)?;
    print_json(&json!({
        "n": s.n,
        "edge_count": s.edge_count,
        "mean_degree": s.mean_degree,
        "clustering_coefficient": s.clustering_coefficient,
    }))
}

fn run(a: RunArgs) -> Outcome {
    let net = read_network(&a.net)?;
    let seeds = seeds_or_file(a.seeds, &net);
    let r = run_cascade_with(&net, &seeds, &a.mode, a.examine).map_err(engine_failure)?;
    let seed = match a.mode {
        ScheduleMode::RandomSweep { seed } => json!(seed),
        _ => Value::Null,
    };
    print_json(&json!({
        "mode": a.mode.to_string(),
        "seed": seed,
        "rng": RNG_NAME,
        "examine": a.examine.to_string(),
        "seeds": seeds,
        "final": r.final_config,
        "size_fraction": r.size_fraction,
        "passes": r.passes,
        "labeling_order": r.labeling_order,
    }))
}

/// `name=expr` names an output; a bare expression is `out` (or `out<i>` when
/// several are given).
fn named_exprs(items: &[String]) -> Result<Vec<(String, Expr)>, Failure> {
    let is_name = |s: &str| {
        let s = s.trim();
        !s.is_empty()
            && s.chars().next().is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
            && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
    };
    let mut out = Vec::new();
    for (i, item) in items.iter().enumerate() {
        let (name, text) = match item.split_once('=') {
            Some((name, text)) if is_name(name) => (name.trim().to_string(), text),
            _ if items.len() == 1 => ("out".to_string(), item.as_str()),
            _ => (format!("out{}", i + 1), item.as_str()),
        };
        if out.iter().any(|(n, _)| *n == name) {
            return Err(usage(format!("output {name:?} is defined twice")));
        }
        let expr = parse_expr(text).map_err(|e| usage(format!("{text:?}: {e}")))?;
        out.push((name, expr));
    }
    Ok(out)
}

fn cmd_compile(a: CompileArgs) -> Outcome {
    let circuit = compile_outputs(&named_exprs(&a.exprs)?, a.basis).map_err(circuit_failure)?;
    write_to(a.out.as_ref(), &to_json(circuit.network()))
}

fn cmd_eval(a: EvalArgs) -> Outcome {
    let circuit = read_circuit(&a.net)?;
    let out = eval(&circuit, a.assign.0.iter().map(|(n, b)| (n.as_str(), *b))).map_err(circuit_failure)?;
    let bits: serde_json::Map<String, Value> = out.into_iter().map(|(k, v)| (k, json!(v as u8))).collect();
    print_json(&Value::Object(bits))
}

fn cmd_table(a: NetArg) -> Outcome {
    let table = truth_table(&read_circuit(&a.net)?).map_err(circuit_failure)?;
    print_stdout(&table.to_csv())
}

fn cmd_fixpoints(a: FixpointsArgs) -> Outcome {
    if a.cap == 0 {
        return Err(usage("--cap must be at least 1"));
    }
    let net = read_network(&a.net)?;
    let seeds = seeds_or_file(a.seeds, &net);
    let set = enumerate_fixpoints(&net, &seeds, a.cap).map_err(engine_failure)?;
    print_json(&json!(set))?;
    if set.truncated {
        return Err(Failure::Cap(format!("state cap {} reached; the fixpoint list is incomplete", a.cap)));
    }
    Ok(())
}

fn cmd_sensitivity(a: SensitivityArgs) -> Outcome {
    let net = read_network(&a.net)?;
    let seeds = match &a.assign {
        Some(assign) => {
            let circuit = CompiledCircuit::from_network(net.clone()).map_err(input)?;
            circuit_seeds(&circuit, assign)?
        }
        None => seeds_or_file(a.seeds, &net),
    };
    if net.outputs().is_empty() {
        return Err(input("network file declares no outputs"));
    }
    let outputs: Vec<NodeId> = net.outputs().values().copied().collect();
    let report = network_schedule_sensitivity(&net, &seeds, &outputs, a.trials, a.seed).map_err(|e| match e {
        cascade_logic::analyze::AnalyzeError::Engine(e) => engine_failure(e),
        other => usage(other),
    })?;
    print_json(&json!({
        "trials": report.trials,
        "agree_fraction": report.agree_fraction,
        "outputs": net.outputs().keys().collect::<Vec<_>>(),
        "reference_output": report.reference_output,
        "distinct_outcomes": report.distinct_outcomes,
        "seed": a.seed,
        "rng": RNG_NAME,
    }))
}

fn cmd_verify(a: VerifyArgs) -> Outcome {
    if a.n == 0 || a.cap == 0 {
        return Err(usage("--n and --cap must be at least 1"));
    }
    if !(a.z >= 0.0 && a.z <= a.n.saturating_sub(1) as f64) || a.n < 2 {
        return Err(usage(format!("mean degree {} must lie in [0, n−1] with n ≥ 2", a.z)));
    }
    let verdict =
        with_jobs(a.jobs.jobs, || verify_determinism(a.n, a.z, a.instances, a.seed, a.rule, a.cap))?.map_err(usage)?;
    let mut out = json!({
        "n": a.n,
        "z": a.z,
        "instances": a.instances,
        "seed": a.seed,
        "rule": a.rule.to_string(),
        "cap": a.cap,
        "rng": RNG_NAME,
    });
    if let (Value::Object(map), Value::Object(v)) = (&mut out, json!(verdict)) {
        map.extend(v);
    }
    print_json(&out)?;
    if let DeterminismVerdict::Inconclusive { instance } = verdict {
        return Err(Failure::Cap(format!("instance {instance} hit the state cap {}", a.cap)));
    }
    Ok(())
}

fn cmd_sweep(a: SweepArgs) -> Outcome {
    let spec = SweepSpec {
        n: a.n,
        z_values: a.z.0,
        phi_star: a.phi,
        rule: a.rule,
        realizations: a.realizations,
        seeds_per_run: a.seeds_per_run,
        master_seed: a.seed,
        metric: a.metric,
        examination: a.examine,
    };
    let out = with_jobs(a.jobs.jobs, || run_sweep(&spec))?.map_err(|e| match e {
        ExpError::Io(_) => input(e),
        other => usage(other),
    })?;
    let mut csv = Vec::new();
    emit_csv(&spec, &out.rows, &mut csv).map_err(usage)?;
    write_to(a.out.as_ref(), &String::from_utf8(csv).expect("CSV is UTF-8"))?;
    if let Some(path) = a.sizes_out {
        let doc = json!({
            "provenance": spec.provenance().trim_start_matches("# "),
            "pooled_median": out.pooled_median,
            "samples": out.sizes,
        });
        write_to(Some(&path), &format!("{doc}\n"))?;
    }
    Ok(())
}

fn dispatch(command: Command) -> Outcome {
    match command {
        Command::Gen(a) => gen(a),
        Command::Stats(a) => cmd_stats(a),
        Command::Run(a) => run(a),
        Command::Compile(a) => cmd_compile(a),
        Command::Eval(a) => cmd_eval(a),
        Command::Table(a) => cmd_table(a),
        Command::Fixpoints(a) => cmd_fixpoints(a),
        Command::Sensitivity(a) => cmd_sensitivity(a),
        Command::VerifyGcm(a) => cmd_verify(a),
        Command::Sweep(a) => cmd_sweep(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            let message = e.render().to_string();
            eprintln!("{}", Failure::Usage(message.trim_end().to_string()).report());
            return ExitCode::from(1);
        }
    };
    // Only sweep and verify-gcm run in parallel; they install their own pool.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(1).build_global();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("{}", f.report());
            ExitCode::from(f.code())
        }
    }
}
