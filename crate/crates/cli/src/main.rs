use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_rational::Ratio;

use dynapprox::baker::solve_domination_exact;
use dynapprox::csp::encode_mwis;
use dynapprox::dp::{DpSolver, ExactSolver, Problem};
use dynapprox::gendom::encode_mwds;
use dynapprox::graph::{parse_graph, write_graph, DynGraph};
use dynapprox::hierarchy::{Hierarchy, HierarchyConfig, Mode};
use dynapprox::oracle::{brute_mwds, brute_mwis, format_stream, gen_host, gen_stream, parse_stream, HostKind, StreamOp};
use dynapprox::Error;

#[derive(Parser)]
#[command(name = "dynapprox", version, about = "Dynamic approximate MWIS / MWDS on planar graphs")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Replay an update stream, printing the answer at every `Q`.
    Run(RunArgs),
    /// Like `run`, but also solve exactly at every `Q` and check the bounds.
    Verify(RunArgs),
    /// Time update streams on generated hosts; CSV on stdout.
    Bench(BenchArgs),
    /// Write a generated host graph and update stream.
    Gen(GenArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Mwis,
    Mwds,
}

#[derive(Args)]
struct Common {
    #[arg(long, value_enum)]
    mode: ModeArg,
    /// Rational `p/q` or decimal, in (0, 1).
    #[arg(long, default_value = "1/2")]
    eps: String,
    /// Degree bound for mwds.
    #[arg(long = "delta-cap", default_value_t = 4)]
    delta_cap: usize,
    #[arg(long = "force-L")]
    force_l: Option<u32>,
    #[arg(long = "force-tau")]
    force_tau: Option<u64>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    updates: PathBuf,
    /// Accepted for symmetry with `gen`; replay is deterministic.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct BenchArgs {
    #[command(flatten)]
    common: Common,
    /// Host family: grid, strip:W, outerplanar or tree.
    #[arg(long, default_value = "grid")]
    kind: String,
    /// Host sizes; one CSV row each.
    #[arg(long = "n", num_args = 1.., default_values_t = [256usize])]
    n: Vec<usize>,
    #[arg(long, default_value_t = 100)]
    ops: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, default_value = "grid")]
    kind: String,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 100)]
    ops: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output path for the graph.
    #[arg(long)]
    graph: PathBuf,
    /// Output path for the stream.
    #[arg(long)]
    updates: PathBuf,
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Violation(String),
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Usage(m) => write!(f, "{m}"),
            Failure::Violation(m) => write!(f, "bound violated: {m}"),
        }
    }
}

impl std::error::Error for Failure {}

fn parse_eps(s: &str) -> anyhow::Result<Ratio<u64>> {
    let bad = || Failure::Usage(format!("cannot read epsilon `{s}`"));
    let r = if let Some((p, q)) = s.split_once('/') {
        let p: u64 = p.trim().parse().map_err(|_| bad())?;
        let q: u64 = q.trim().parse().map_err(|_| bad())?;
        if q == 0 {
            return Err(bad().into());
        }
        Ratio::new(p, q)
    } else if let Some((int, frac)) = s.split_once('.') {
        let digits = frac.len() as u32;
        if digits > 18 || !frac.chars().all(|c| c.is_ascii_digit()) {
            return Err(bad().into());
        }
        let i: u64 = if int.is_empty() { 0 } else { int.parse().map_err(|_| bad())? };
        let f: u64 = if frac.is_empty() { 0 } else { frac.parse().map_err(|_| bad())? };
        let den = 10u64.pow(digits);
        Ratio::new(i * den + f, den)
    } else {
        Ratio::from_integer(s.parse().map_err(|_| bad())?)
    };
    Ok(r)
}

fn parse_kind(s: &str) -> anyhow::Result<HostKind> {
    Ok(match s {
        "grid" => HostKind::Grid,
        "outerplanar" => HostKind::Outerplanar,
        "tree" => HostKind::Tree,
        _ => match s.strip_prefix("strip:").and_then(|w| w.parse().ok()) {
            Some(w) => HostKind::Strip(w),
            None => return Err(Failure::Usage(format!("unknown host kind `{s}`")).into()),
        },
    })
}

fn config(c: &Common) -> anyhow::Result<HierarchyConfig> {
    let mode = match c.mode {
        ModeArg::Mwis => Mode::Mwis,
        ModeArg::Mwds => Mode::Mwds { delta_cap: c.delta_cap },
    };
    let mut cfg = HierarchyConfig::new(mode, parse_eps(&c.eps)?);
    cfg.force_l = c.force_l;
    cfg.force_tau = c.force_tau;
    Ok(cfg)
}

fn format_answer(h: &Hierarchy) -> String {
    let q = h.query();
    match h.mode() {
        Mode::Mwis => q.to_integer().to_string(),
        Mode::Mwds { .. } => format!("{}/{}", q.numer(), q.denom()),
    }
}

fn exact_mwis(g: &DynGraph) -> anyhow::Result<u64> {
    if g.num_vertices() <= 20 {
        return Ok(brute_mwis(g)?);
    }
    let p = Problem::from_csp(&encode_mwis(g), None);
    Ok(DpSolver::default().maximize(&p)?.unwrap_or(0).max(0) as u64)
}

fn exact_mwds(g: &DynGraph) -> anyhow::Result<u64> {
    let c = if g.num_vertices() <= 20 {
        brute_mwds(g)?
    } else {
        solve_domination_exact(&encode_mwds(g), 64, 1 << 36)?
    };
    c.finite().ok_or_else(|| anyhow!("no dominating set"))
}

/// Checks the guarantee for the current answer; returns the exact optimum.
fn check(h: &Hierarchy) -> anyhow::Result<u64> {
    let eps = h.eps();
    let q = h.query();
    match h.mode() {
        Mode::Mwis => {
            let opt = exact_mwis(h.graph())?;
            let lo = (Ratio::from_integer(1) - eps) * Ratio::from_integer(opt);
            if q > Ratio::from_integer(opt) || q < lo {
                bail!(Failure::Violation(format!("answer {q}, optimum {opt}")));
            }
            Ok(opt)
        }
        Mode::Mwds { .. } => {
            let opt = exact_mwds(h.graph())?;
            let hi = (Ratio::from_integer(1) + eps) * Ratio::from_integer(opt);
            if q < Ratio::from_integer(opt) || q > hi {
                bail!(Failure::Violation(format!("answer {q}, optimum {opt}")));
            }
            Ok(opt)
        }
    }
}

fn replay(args: &RunArgs, verify: bool) -> anyhow::Result<()> {
    let text = fs::read_to_string(&args.graph).with_context(|| format!("reading {}", args.graph.display()))?;
    let g = parse_graph(&text)?;
    let text = fs::read_to_string(&args.updates).with_context(|| format!("reading {}", args.updates.display()))?;
    let ops = parse_stream(&text)?;
    let mut h = Hierarchy::new(&g, config(&args.common)?)?;
    let mut out = String::new();
    for op in ops {
        if op == StreamOp::Query {
            out.push_str(&format_answer(&h));
            if verify {
                let opt = check(&h)?;
                out.push_str(&format!(" opt={opt} ok"));
            }
            out.push('\n');
        } else {
            h.apply(op)?;
        }
    }
    print!("{out}");
    Ok(())
}

fn bench(args: &BenchArgs) -> anyhow::Result<()> {
    let kind = parse_kind(&args.kind)?;
    let cfg = config(&args.common)?;
    println!("n,ops,total_ns,amortized_ns");
    for &n in &args.n {
        let g = gen_host(kind, n, args.seed);
        let ops: Vec<StreamOp> =
            gen_stream(&g, args.ops, args.seed.wrapping_add(1)).into_iter().filter(|&o| o != StreamOp::Query).collect();
        let mut h = Hierarchy::new(&g, cfg.clone())?;
        let start = Instant::now();
        for &op in &ops {
            h.apply(op)?;
        }
        let total = start.elapsed().as_nanos();
        let amortized = if ops.is_empty() { 0 } else { total / ops.len() as u128 };
        println!("{n},{},{total},{amortized}", ops.len());
    }
    Ok(())
}

fn generate(args: &GenArgs) -> anyhow::Result<()> {
    let g = gen_host(parse_kind(&args.kind)?, args.n, args.seed);
    let ops = gen_stream(&g, args.ops, args.seed.wrapping_add(1));
    fs::write(&args.graph, write_graph(&g)).with_context(|| format!("writing {}", args.graph.display()))?;
    fs::write(&args.updates, format_stream(&ops)).with_context(|| format!("writing {}", args.updates.display()))?;
    Ok(())
}

fn exit_code(e: &anyhow::Error) -> u8 {
    if let Some(f) = e.downcast_ref::<Failure>() {
        return match f {
            Failure::Usage(_) => 2,
            Failure::Violation(_) => 4,
        };
    }
    match e.downcast_ref::<Error>() {
        Some(Error::Parse { .. } | Error::InvalidEpsilon(_)) => 2,
        Some(Error::WidthExceeded { .. } | Error::DegreeCap { .. }) => 3,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match &cli.cmd {
        Cmd::Run(a) => replay(a, false),
        Cmd::Verify(a) => replay(a, true),
        Cmd::Bench(a) => bench(a),
        Cmd::Gen(a) => generate(a),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
