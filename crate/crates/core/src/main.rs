use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use lte_hetnet::config::{load_config, SweepSpec};
use lte_hetnet::output::write_run_outputs;
use lte_hetnet::sweep::run_sweep;
use lte_hetnet::{run_simulation, Algorithm, ScenarioKind};

#[derive(Parser)]
#[command(name = "lte-hetnet", version, about = "LTE downlink macro / HetNet scheduling simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a single simulation.
    Simulate(SimulateArgs),
    /// Run the replicated experiment grid from the config's `sweep` section.
    Sweep(SweepArgs),
}

#[derive(Args)]
struct SimulateArgs {
    /// JSON config; omitted keys take their defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    scenario: Option<ScenarioKind>,
    #[arg(long)]
    scheduler: Option<Algorithm>,
    #[arg(long)]
    users: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Flow duration in seconds; the simulation runs this long as well.
    #[arg(long)]
    duration: Option<f64>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Accepted for symmetry with `sweep`; a single run is single-threaded.
    #[arg(long)]
    workers: Option<usize>,
    /// Also write a per-TTI, per-cell trace.
    #[arg(long)]
    trace: bool,
    /// Write 0 in the wall_time_s column so outputs are byte-stable.
    #[arg(long)]
    no_wall_time: bool,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    workers: Option<usize>,
}

fn load(path: Option<&Path>) -> lte_hetnet::Result<SweepSpec> {
    match path {
        Some(p) => load_config(p),
        None => Ok(SweepSpec::default()),
    }
}

fn simulate(args: SimulateArgs) -> lte_hetnet::Result<()> {
    let mut cfg = load(args.config.as_deref())?.base;
    if let Some(s) = args.scenario {
        cfg.scenario = s;
    }
    if let Some(s) = args.scheduler {
        cfg.scheduler = s;
    }
    if let Some(n) = args.users {
        cfg.users = n;
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if let Some(d) = args.duration {
        cfg.simulation.flow_duration_s = d;
        cfg.simulation.duration_s = d;
        cfg.simulation.metrics_window_s = None;
    }
    cfg.simulation.trace |= args.trace;
    let _ = args.workers;
    let result = run_simulation(cfg)?;
    write_run_outputs(&args.out, &result, !args.no_wall_time)?;
    let s = &result.summary;
    println!(
        "{} {} users={} seed={}: throughput {:.3} Mbps, video PLR {:.4}, video delay {:.2} ms, fairness {:.4}, handovers {}",
        result.scenario,
        result.algorithm,
        result.users,
        result.seed,
        s.throughput_bps_total / 1e6,
        s.plr_video,
        s.delay_ms_video_mean,
        s.fairness_eq11_video,
        s.handovers
    );
    Ok(())
}

fn sweep(args: SweepArgs) -> lte_hetnet::Result<()> {
    let mut spec = load_config(&args.config)?;
    if let Some(w) = args.workers {
        spec.sweep.workers = w;
    }
    let outcome = run_sweep(&spec, &args.out)?;
    println!(
        "{} runs written to {}, {} failed",
        outcome.rows.len(),
        args.out.display(),
        outcome.failures.len()
    );
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Sweep(a) => sweep(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
