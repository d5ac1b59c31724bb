use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use noma_hbf::clustering::LinkageRule;
use noma_hbf::harness::{self, emit_results, OutputFormat, SimConfig, Summary, SweepResult};
use noma_hbf::oracle::{oracle_compare, ComparisonSetup};
use noma_hbf::pipeline::{Objective, Scheme};
use noma_hbf::Result;

#[derive(Parser)]
#[command(name = "noma-hbf", version, about = "Uplink hybrid mmWave MIMO-NOMA simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a Monte Carlo campaign from a preset or config file.
    Simulate(SimulateArgs),
    /// Compare SUC-AGNES and DIR-AGNES against exhaustive search.
    OracleCompare(OracleArgs),
}

#[derive(Args)]
struct SimulateArgs {
    /// fig3, fig4, fig5, fig6, fig7, fig8 or fig10.
    #[arg(long, conflicts_with = "config")]
    preset: Option<String>,
    /// Flat TOML file with SimConfig keys.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Restrict to these schemes (repeatable).
    #[arg(long)]
    scheme: Vec<String>,
    #[arg(long)]
    objective: Option<String>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    workers: Option<usize>,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value = "csv")]
    format: String,
    /// Per-trial diagnostics on stderr.
    #[arg(long)]
    verbose: bool,
}

#[derive(Args)]
struct OracleArgs {
    #[arg(long, default_value_t = 4)]
    k: usize,
    #[arg(long, default_value_t = 2)]
    g: usize,
    #[arg(long, default_value_t = 8)]
    nbeam: usize,
    /// Antennas; defaults to the beam count.
    #[arg(long)]
    nbs: Option<usize>,
    #[arg(long, default_value_t = 50)]
    seeds: u64,
    #[arg(long, default_value_t = 3)]
    paths: usize,
    #[arg(long, default_value_t = 10.0)]
    snr: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn build_config(args: &SimulateArgs) -> Result<SimConfig> {
    let mut cfg = match (&args.preset, &args.config) {
        (Some(p), _) => SimConfig::preset(p)?,
        (None, Some(path)) => SimConfig::load(path)?,
        (None, None) => SimConfig::default(),
    };
    if !args.scheme.is_empty() {
        cfg.schemes = args.scheme.iter().map(|s| s.parse::<Scheme>()).collect::<Result<_>>()?;
    }
    if let Some(o) = &args.objective {
        cfg.objective = o.parse::<Objective>()?;
    }
    if let Some(t) = args.trials {
        cfg.trials = t;
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if args.workers.is_some() {
        cfg.workers = args.workers;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn dump_verbose(sweep: &SweepResult) {
    for p in &sweep.points {
        for r in &p.records {
            eprint!("{}={} trial={} seed={} scheme={} se={:.6} ee={:.6e} outer={} infeasible={}", sweep.var, p.value, r.trial, r.seed, r.scheme, r.se, r.ee, r.outer_iterations, r.infeasible);
            if let Some(e) = &r.error {
                eprint!(" error=\"{e}\"");
            }
            eprintln!();
            if let Some(o) = &r.outcome {
                eprintln!("  groups={:?} beams={:?}", o.groups, o.beams);
                for (outer, trace) in o.traces.iter().enumerate() {
                    for t in trace {
                        eprintln!("  trace outer={} iteration={} q={:.12e} metric={:.12e} max_violation={:.3e}", outer + 1, t.iteration, t.q, t.metric, t.max_violation);
                    }
                }
            }
        }
    }
}

fn simulate(args: &SimulateArgs) -> Result<()> {
    let cfg = build_config(args)?;
    let format: OutputFormat = args.format.parse()?;
    eprintln!("running {} trial(s) x {} point(s), schemes: {}", cfg.trials, cfg.sweep_values.len().max(1), cfg.schemes.iter().map(Scheme::name).collect::<Vec<_>>().join(","));
    let sweep = harness::run_sweep(&cfg)?;
    if args.verbose {
        dump_verbose(&sweep);
    }
    let failed: usize = sweep.points.iter().map(|p| p.records.iter().filter(|r| r.error.is_some()).count()).sum();
    if failed > 0 {
        eprintln!("warning: {failed} record(s) failed and were excluded from the means");
    }
    let rows = if cfg.trace { harness::trace_rows(&sweep) } else { sweep.rows() };
    emit_results(&rows, format, args.out.as_deref())
}

fn oracle(args: &OracleArgs) -> Result<()> {
    let setup = ComparisonSetup {
        k: args.k,
        g: args.g,
        n_bs: args.nbs.unwrap_or(args.nbeam),
        n_beam: args.nbeam,
        paths: args.paths,
        rule: LinkageRule::Complete,
        semantics: Default::default(),
    };
    let cfg = SimConfig { k: args.k, g: args.g, n_bs: setup.n_bs, n_beam: args.nbeam, l: args.paths, snr_db: args.snr, ..SimConfig::default() };
    cfg.validate()?;
    let params = cfg.system_params();
    let rows: Vec<_> = (0..args.seeds).into_par_iter().map(|s| oracle_compare(&setup, s, &params)).collect::<Result<_>>()?;
    let mut out = String::from("seed,oracle,suc,dir,gap\n");
    let fmt = |x: Option<f64>| x.map(|v| format!("{v:.11e}")).unwrap_or_default();
    for r in &rows {
        out.push_str(&format!("{},{:.11e},{},{},{}\n", r.seed, r.oracle, fmt(r.suc), fmt(r.dir), fmt(r.gap)));
    }
    let gaps: Vec<f64> = rows.iter().filter_map(|r| r.gap).collect();
    let dominated = rows
        .iter()
        .filter(|r| match (r.suc, r.dir) {
            (Some(s), Some(d)) => r.oracle >= s * (1.0 - 1e-6) && s >= d * (1.0 - 1e-6),
            _ => false,
        })
        .count();
    let gap = Summary::of(&gaps);
    eprintln!("oracle >= suc >= dir on {dominated}/{} draws; mean suc gap {:.4} (+/- {:.4})", rows.len(), gap.mean, gap.half_width);
    match &args.out {
        Some(p) => std::fs::write(p, out)?,
        None => print!("{out}"),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Simulate(a) => simulate(a),
        Command::OracleCompare(a) => oracle(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
