//! `propfix` command-line front end.
//!
//! Exit status: 0 success, 1 wipeout, 2 usage error, 3 internal error or
//! lattice violation, 4 timeout.

use std::fs;
use std::io::{self, Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use serde_json::json;

use propfix_core::harness::{
    measure, sweep, write_csv, BoundEstimator, BoundKind, BoundParams, Grid, HarnessError, Search,
    SweepConfig, TightnessBound,
};
use propfix_core::lattice::{edges_by_label, run_lattice, LatticeConfig};
use propfix_core::oracle::{definitional_closure, enumerate_solutions, variable_completability};
use propfix_core::{
    enforce, experiment_family, filtered_network, generate_model_b, parse_instance, write_instance,
    ConsistencyId, ConstraintNetwork, DomainState, GenSpec,
};

#[derive(Parser)]
#[command(name = "propfix", version, about = "Local consistency filtering for binary constraint networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random Model B instance.
    Gen(GenArgs),
    /// Enforce a local consistency on an instance.
    Filter(FilterArgs),
    /// Brute-force reference computations on small instances.
    #[command(subcommand)]
    Oracle(OracleCommand),
    /// Check the strength lattice on sampled instances.
    Lattice(LatticeArgs),
    /// Tightness sweeps and T0/Tall estimation.
    #[command(subcommand)]
    Bench(BenchCommand),
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    d: usize,
    #[arg(long)]
    p1: f64,
    #[arg(long)]
    p2: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct LcArgs {
    /// ac, rpc, krpc, maxrpc, pic, nic, spc, sac or srpc.
    #[arg(long)]
    lc: String,
    /// Support bound for krpc.
    #[arg(long)]
    k: Option<u32>,
}

#[derive(Args)]
struct InputArgs {
    /// Instance file; standard input when absent.
    #[arg(long = "in")]
    input: Option<PathBuf>,
}

#[derive(Args)]
struct FilterArgs {
    #[command(flatten)]
    lc: LcArgs,
    /// Time budget in milliseconds.
    #[arg(long)]
    timeout: Option<u64>,
    #[command(flatten)]
    input: InputArgs,
    /// Print one JSON record instead of text.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct OracleInput {
    #[command(flatten)]
    input: InputArgs,
    /// Refuse instances whose search space exceeds this many assignments.
    #[arg(long, default_value_t = 10_000_000)]
    max_product: u64,
}

#[derive(Subcommand)]
enum OracleCommand {
    /// Greatest consistent sub-domain by definition, checked against the filter.
    Closure {
        #[command(flatten)]
        lc: LcArgs,
        #[command(flatten)]
        input: OracleInput,
    },
    /// Enumerate solutions.
    Solutions {
        #[arg(long)]
        limit: Option<usize>,
        /// Print every solution, not just the count.
        #[arg(long)]
        list: bool,
        #[command(flatten)]
        input: OracleInput,
    },
    /// Values that appear in some solution.
    Completability {
        #[command(flatten)]
        input: OracleInput,
    },
}

#[derive(Args)]
struct LatticeArgs {
    #[arg(long, default_value_t = 200)]
    samples: usize,
    #[arg(long, default_value_t = 6)]
    n: usize,
    #[arg(long, default_value_t = 3)]
    d: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// `all` or comma-separated edges such as `sac>maxrpc,pic<>krpc2`.
    #[arg(long, default_value = "all")]
    pairs: String,
    /// Witness search budget per direction.
    #[arg(long, default_value_t = 100_000)]
    attempts: usize,
    /// Print each witness instance.
    #[arg(long)]
    show: bool,
}

#[derive(Args)]
struct ModelArgs {
    /// transition-40x15, timing-200x30-sparse or timing-200x30-dense.
    #[arg(long)]
    family: Option<String>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    d: Option<usize>,
    #[arg(long)]
    p1: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    samples: Option<usize>,
    /// Multiplies the sample count.
    #[arg(long, default_value_t = 1.0)]
    scale: f64,
    #[arg(long, default_value_t = 0.0)]
    grid_lo: f64,
    #[arg(long, default_value_t = 1.0)]
    grid_hi: f64,
    /// Grid intervals; d² when absent.
    #[arg(long)]
    grid_steps: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum BenchCommand {
    /// One CSV row per (tightness, lc).
    Sweep {
        /// Comma-separated consistencies; `krpc` takes `--k`.
        #[arg(long, value_delimiter = ',')]
        lc: Vec<String>,
        #[arg(long)]
        k: Option<u32>,
        /// Per-instance time budget in milliseconds.
        #[arg(long)]
        timeout: Option<u64>,
        #[command(flatten)]
        model: ModelArgs,
    },
    /// Tightness at which the filter starts deleting.
    T0(BoundArgs),
    /// Tightness at which the filter starts wiping out.
    Tall(BoundArgs),
}

#[derive(Args)]
struct BoundArgs {
    #[command(flatten)]
    lc: LcArgs,
    #[arg(long, default_value_t = 0.5)]
    threshold: f64,
    /// Scan the grid instead of bisecting.
    #[arg(long)]
    linear: bool,
    #[command(flatten)]
    model: ModelArgs,
}

enum Failure {
    Usage(String),
    Internal(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Internal(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Internal(e.into())
    }
}

fn usage(msg: impl ToString) -> Failure {
    Failure::Usage(msg.to_string())
}

impl From<HarnessError> for Failure {
    fn from(e: HarnessError) -> Self {
        match e {
            HarnessError::Containment { .. } | HarnessError::Csv(_) => Failure::Internal(e.into()),
            other => usage(other),
        }
    }
}

type Outcome = Result<u8, Failure>;

const OK: u8 = 0;
const WIPEOUT: u8 = 1;
const VIOLATION: u8 = 3;
const TIMEOUT: u8 = 4;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => e.exit(),
    };
    let outcome = match cli.command {
        Command::Gen(args) => cmd_gen(args),
        Command::Filter(args) => cmd_filter(args),
        Command::Oracle(cmd) => cmd_oracle(cmd),
        Command::Lattice(args) => cmd_lattice(args),
        Command::Bench(cmd) => cmd_bench(cmd),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Internal(e)) => {
            eprintln!("internal error: {e:#}");
            ExitCode::from(3)
        }
    }
}

fn consistency(args: &LcArgs) -> Result<ConsistencyId, Failure> {
    if args.k.is_some() && args.lc != "krpc" {
        return Err(usage("--k is only valid with --lc krpc"));
    }
    ConsistencyId::from_name(&args.lc, args.k).map_err(usage)
}

fn read_instance(args: &InputArgs) -> Result<ConstraintNetwork, Failure> {
    let text = match &args.input {
        Some(path) => fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?,
        None => {
            let mut s = String::new();
            io::stdin().read_to_string(&mut s)?;
            s
        }
    };
    parse_instance(&text).map_err(usage)
}

fn emit(out: Option<&PathBuf>, text: &str) -> Result<(), Failure> {
    match out {
        Some(path) => fs::write(path, text)
            .with_context(|| format!("writing {}", path.display()))
            .map_err(Failure::Internal),
        None => Ok(io::stdout().write_all(text.as_bytes())?),
    }
}

fn value_label(net: &ConstraintNetwork, var: usize, index: usize) -> String {
    format!("({var},{})", net.values(var)[index])
}

fn cmd_gen(args: GenArgs) -> Outcome {
    let spec = GenSpec {
        n: args.n,
        d: args.d,
        p1: args.p1,
        p2: args.p2,
        seed: args.seed,
    };
    let net = generate_model_b(&spec).map_err(usage)?;
    emit(args.out.as_ref(), &write_instance(&net))?;
    let stats = format!(
        "n={} d={} e={} c={} g={}",
        net.var_count(),
        net.max_domain_size(),
        net.constraint_count(),
        net.cliques().triangles.len(),
        net.max_degree()
    );
    if args.out.is_some() {
        println!("{stats}");
    } else {
        eprintln!("{stats}");
    }
    Ok(OK)
}

fn cmd_filter(args: FilterArgs) -> Outcome {
    let lc = consistency(&args.lc)?;
    let net = read_instance(&args.input)?;
    let budget = args.timeout.map(Duration::from_millis);
    let m = measure(&net, lc, budget);
    let r = &m.result;
    let mut state = DomainState::full(&net);
    for &(v, a) in &r.deleted {
        state.remove(v, a);
    }
    if args.json {
        let pair = |&((i, a), (j, b)): &((usize, usize), (usize, usize))| {
            json!([[i, net.values(i)[a]], [j, net.values(j)[b]]])
        };
        let filtered = if r.wipeout {
            None
        } else {
            filtered_network(&net, &state, &r.deleted_pairs).map(|f| write_instance(&f))
        };
        let record = json!({
            "lc": lc.name(),
            "k": lc.k(),
            "deleted": r.deleted.iter().map(|&(v, a)| json!([v, net.values(v)[a]])).collect::<Vec<_>>(),
            "deleted_pairs": r.deleted_pairs.iter().map(pair).collect::<Vec<_>>(),
            "deleted_pct": m.deleted_pct,
            "wipeout": r.wipeout,
            "timed_out": r.timed_out,
            "checks": r.checks,
            "elapsed_ms": r.elapsed.as_secs_f64() * 1e3,
            "instance": filtered,
        });
        println!("{record}");
    } else {
        println!("lc: {lc}");
        let listed: Vec<String> = r.deleted_sorted().iter().map(|&(v, a)| value_label(&net, v, a)).collect();
        println!("deleted values: {} ({:.2}%)", listed.len(), m.deleted_pct);
        if !listed.is_empty() {
            println!("  {}", listed.join(" "));
        }
        if lc.deletes_pairs() {
            println!("deleted pairs: {}", r.deleted_pairs.len());
            for &((i, a), (j, b)) in &r.deleted_pairs {
                println!("  {} {}", value_label(&net, i, a), value_label(&net, j, b));
            }
        }
        println!("checks: {}", r.checks);
        println!("elapsed: {:.3} ms", r.elapsed.as_secs_f64() * 1e3);
        let status = if r.timed_out {
            "timeout"
        } else if r.wipeout {
            "wipeout"
        } else {
            "ok"
        };
        println!("status: {status}");
    }
    Ok(if r.timed_out {
        TIMEOUT
    } else if r.wipeout {
        WIPEOUT
    } else {
        OK
    })
}

fn read_small(input: &OracleInput) -> Result<ConstraintNetwork, Failure> {
    let net = read_instance(&input.input)?;
    let product = (0..net.var_count()).try_fold(1u64, |acc, v| acc.checked_mul(net.domain_size(v) as u64));
    match product {
        Some(p) if p <= input.max_product => Ok(net),
        _ => Err(usage(format!(
            "instance too large for the oracle: product of domain sizes exceeds {} (see --max-product)",
            input.max_product
        ))),
    }
}

fn cmd_oracle(cmd: OracleCommand) -> Outcome {
    match cmd {
        OracleCommand::Closure { lc, input } => {
            let lc = consistency(&lc)?;
            let net = read_small(&input)?;
            let closure = definitional_closure(&net, lc);
            let deleted = DomainState::full(&net).difference(&closure.state);
            let listed: Vec<String> = deleted.iter().map(|&(v, a)| value_label(&net, v, a)).collect();
            println!("lc: {lc}");
            println!("deleted values: {}", listed.len());
            if !listed.is_empty() {
                println!("  {}", listed.join(" "));
            }
            if lc.deletes_pairs() {
                println!("deleted pairs: {}", closure.pairs.len());
                for &((i, a), (j, b)) in &closure.pairs {
                    println!("  {} {}", value_label(&net, i, a), value_label(&net, j, b));
                }
            }
            println!("wipeout: {}", closure.is_wipeout());
            let mut state = DomainState::full(&net);
            let fast = enforce(&net, &mut state, lc, None);
            if state == closure.state && fast.deleted_pairs == closure.pairs {
                println!("MATCH");
                Ok(OK)
            } else {
                println!("MISMATCH");
                Ok(VIOLATION)
            }
        }
        OracleCommand::Solutions { limit, list, input } => {
            let net = read_small(&input)?;
            let found = enumerate_solutions(&net, &DomainState::full(&net), limit);
            let more = if found.truncated { " (limit reached)" } else { "" };
            println!("solutions: {}{more}", found.solutions.len());
            if list {
                for s in &found.solutions {
                    let values: Vec<String> = s.iter().enumerate().map(|(v, &a)| net.values(v)[a].to_string()).collect();
                    println!("  {}", values.join(" "));
                }
            }
            Ok(OK)
        }
        OracleCommand::Completability { input } => {
            let net = read_small(&input)?;
            let kept = variable_completability(&net, &DomainState::full(&net));
            let removed = DomainState::full(&net).difference(&kept);
            for v in 0..net.var_count() {
                let values: Vec<String> = kept.domain(v).iter().map(|a| net.values(v)[a].to_string()).collect();
                println!("{v}: {}", values.join(" "));
            }
            println!(
                "globally inconsistent values: {} of {}",
                removed.len(),
                removed.len() + kept.total_values()
            );
            Ok(OK)
        }
    }
}

fn cmd_lattice(args: LatticeArgs) -> Outcome {
    if args.samples == 0 {
        return Err(usage("--samples must be at least 1"));
    }
    let mut cfg = if args.pairs == "all" {
        LatticeConfig::all(args.n, args.d, args.samples, args.seed)
    } else {
        let labels: Vec<&str> = args.pairs.split(',').map(str::trim).collect();
        let edges = edges_by_label(&labels).map_err(usage)?;
        LatticeConfig::for_edges(args.n, args.d, args.samples, args.seed, edges)
    };
    cfg.witness.attempts = args.attempts;
    let report = run_lattice(&cfg).map_err(usage)?;
    println!("{} instances, n={} d={} seed={}", report.instances, args.n, args.d, args.seed);
    println!("{:<28} {:>8} {:>10}", "containment", "checked", "violations");
    for c in &report.containments {
        println!("{:<28} {:>8} {:>10}", c.label, c.checked, c.violations);
    }
    println!("{:<14} {:<28} result", "edge", "direction");
    for w in &report.witnesses {
        let direction = format!("{} deletes, {} holds", w.deletes, w.holds);
        let result = match &w.witness {
            Some(found) => format!("found at attempt {} (n={})", found.attempt, found.net.var_count()),
            None => format!("none in {} attempts", args.attempts),
        };
        println!("{:<14} {:<28} {result}", w.edge, direction);
        if let (true, Some(found)) = (args.show, &w.witness) {
            print!("{}", write_instance(&found.net));
        }
    }
    for c in report.containments.iter().filter(|c| c.violations > 0) {
        if let Some(net) = &c.first_violation {
            eprintln!("first violation of {}:\n{}", c.label, write_instance(net));
        }
    }
    Ok(if report.violations() > 0 { VIOLATION } else { OK })
}

struct Model {
    n: usize,
    d: usize,
    p1: f64,
    samples: usize,
    grid: Grid,
}

fn model(args: &ModelArgs, default_samples: usize) -> Result<Model, Failure> {
    let family = args.family.as_deref().map(experiment_family).transpose().map_err(usage)?;
    let n = args.n.or(family.as_ref().map(|f| f.n)).ok_or_else(|| usage("--n or --family is required"))?;
    let d = args.d.or(family.as_ref().map(|f| f.d)).ok_or_else(|| usage("--d or --family is required"))?;
    let p1 = args
        .p1
        .or(family.as_ref().and_then(|f| f.p1))
        .ok_or_else(|| usage("--p1 is required"))?;
    if !(args.scale > 0.0 && args.scale.is_finite()) {
        return Err(usage("--scale must be positive"));
    }
    let samples = args.samples.unwrap_or(default_samples);
    let samples = ((samples as f64 * args.scale).round() as usize).max(usize::from(samples > 0));
    let steps = args.grid_steps.unwrap_or((d * d).max(1));
    let grid = Grid::new(args.grid_lo, args.grid_hi, steps)?;
    Ok(Model { n, d, p1, samples, grid })
}

fn cmd_bench(cmd: BenchCommand) -> Outcome {
    match cmd {
        BenchCommand::Sweep { lc, k, timeout, model: args } => {
            let m = model(&args, 50)?;
            let names: Vec<&str> = lc.iter().map(|s| s.trim()).filter(|s| !s.is_empty()).collect();
            if k.is_some() && !names.contains(&"krpc") {
                return Err(usage("--k is only valid with krpc in --lc"));
            }
            let lcs = names
                .iter()
                .map(|&name| {
                    let k = if name == "krpc" { k } else { None };
                    ConsistencyId::from_name(name, k).map_err(usage)
                })
                .collect::<Result<Vec<_>, _>>()?;
            let cfg = SweepConfig {
                n: m.n,
                d: m.d,
                p1: m.p1,
                lcs,
                grid: m.grid,
                samples: m.samples,
                seed: args.seed,
                budget: timeout.map(Duration::from_millis),
            };
            let points = sweep(&cfg)?;
            let mut csv = Vec::new();
            write_csv(&points, &mut csv)?;
            emit(args.out.as_ref(), &String::from_utf8(csv).context("CSV is UTF-8")?)?;
            Ok(OK)
        }
        BenchCommand::T0(args) => bound(args, BoundKind::T0),
        BenchCommand::Tall(args) => bound(args, BoundKind::Tall),
    }
}

const BOUND_HEADER: &str = "kind,lc,k,n,d,p1,tightness,reached,samples,resolution";

fn bound_row(b: &TightnessBound) -> String {
    format!(
        "{},{},{},{},{},{},{},{},{},{}",
        b.kind,
        b.lc.name(),
        b.lc.k().map_or(String::new(), |k| k.to_string()),
        b.n,
        b.d,
        b.p1,
        b.tightness,
        b.reached,
        b.samples,
        b.resolution
    )
}

fn bound(args: BoundArgs, kind: BoundKind) -> Outcome {
    let lc = consistency(&args.lc)?;
    let m = model(&args.model, 300)?;
    let mut params = BoundParams::new(m.n, m.d, m.p1, m.samples, args.model.seed);
    params.grid = m.grid;
    params.threshold = args.threshold;
    params.search = if args.linear { Search::Linear } else { Search::Bisection };
    let b = BoundEstimator::new(params, &[lc])?.estimate(lc, kind)?;
    emit(args.model.out.as_ref(), &format!("{BOUND_HEADER}\n{}\n", bound_row(&b)))?;
    Ok(OK)
}
