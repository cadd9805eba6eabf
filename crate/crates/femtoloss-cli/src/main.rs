//! `femtoloss` — simulate the two-tier scenario and reproduce the
//! estimation-error sweeps as CSV.
//!
//! Exit codes: 0 success, 1 config/argument error, 2 I/O error, 3 numeric
//! failure surfaced from estimation.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use femtoloss::exec;
use femtoloss::experiments::{
    fig3_csv, fig5_csv, run_fig3, run_fig5, run_single, Fig3Spec, Fig5Spec, SingleSpec,
    DEFAULT_TRIALS,
};
use femtoloss::{Error, ErrorCategory, ScenarioConfig};

#[derive(Parser)]
#[command(name = "femtoloss", version, about = "Two-tier path-loss estimation experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonOpts {
    /// Scenario config file (see configs/default.cfg for the format).
    #[arg(long)]
    config: PathBuf,

    /// Monte Carlo trials per grid point.
    #[arg(long, default_value_t = DEFAULT_TRIALS)]
    trials: usize,

    /// Override the config file's RNG seed.
    #[arg(long)]
    seed: Option<u64>,

    /// Write output here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,

    /// Dump the per-instant observable trace as CSV (single runs only).
    #[arg(long)]
    dump_trace: Option<PathBuf>,

    /// Worker threads for the trial fan-out.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// One scenario end to end: ground truth vs estimates plus diagnostics.
    Single {
        #[command(flatten)]
        common: CommonOpts,

        /// PU distance from the BS (m).
        #[arg(long, default_value_t = 300.0)]
        pu_r: f64,

        /// PU angle from the SU axis (rad).
        #[arg(long, default_value_t = 0.8)]
        pu_theta: f64,

        /// SU distance from the BS (m).
        #[arg(long, default_value_t = 100.0)]
        su_r1: f64,
    },
    /// Downlink-loss estimation error vs PU-BS distance (CSV).
    Fig3 {
        #[command(flatten)]
        common: CommonOpts,
    },
    /// PU-SU loss estimation error over the position grid (CSV).
    Fig5 {
        #[command(flatten)]
        common: CommonOpts,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("femtoloss: {e}");
            ExitCode::from(match e.category() {
                ErrorCategory::Config => 1,
                ErrorCategory::Io => 2,
                ErrorCategory::Numeric => 3,
            })
        }
    }
}

fn load_config(opts: &CommonOpts) -> Result<ScenarioConfig, Error> {
    let mut config = ScenarioConfig::from_file(&opts.config)?;
    if let Some(seed) = opts.seed {
        config.seed = seed;
    }
    if let Some(threads) = opts.threads {
        if threads == 0 {
            return Err(Error::Config("--threads must be at least 1".into()));
        }
        if !exec::parallelism_enabled() && threads > 1 {
            eprintln!("femtoloss: built without the `parallel` feature; --threads ignored");
        }
        exec::configure_threads(threads);
    }
    Ok(config)
}

fn emit(out: &Option<PathBuf>, content: &str) -> Result<(), Error> {
    match out {
        Some(path) => fs::write(path, content).map_err(Error::from),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn warn_unused_dump(dump: &Option<PathBuf>, subcommand: &str) {
    if dump.is_some() {
        eprintln!("femtoloss: --dump-trace applies to `single` only; ignored for `{subcommand}`");
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Single { common, pu_r, pu_theta, su_r1 } => {
            let config = load_config(&common)?;
            let spec = SingleSpec {
                pu_radius_m: pu_r,
                pu_angle_rad: pu_theta,
                su_bs_distance_m: su_r1,
            };
            let run = run_single(&spec, &config)?;
            emit(&common.out, &run.render())?;
            if let Some(path) = &common.dump_trace {
                fs::write(path, run.trace_csv())?;
            }
            Ok(())
        }
        Command::Fig3 { common } => {
            let config = load_config(&common)?;
            warn_unused_dump(&common.dump_trace, "fig3");
            let spec = Fig3Spec { trials: common.trials, ..Fig3Spec::default() };
            let rows = run_fig3(&spec, &config)?;
            emit(&common.out, &fig3_csv(&rows))
        }
        Command::Fig5 { common } => {
            let config = load_config(&common)?;
            warn_unused_dump(&common.dump_trace, "fig5");
            let spec = Fig5Spec { trials: common.trials, ..Fig5Spec::default() };
            let rows = run_fig5(&spec, &config)?;
            for row in rows.iter().filter(|r| r.skipped()) {
                eprintln!(
                    "femtoloss: skipped singular grid point (r1 {} m, r0 {} m, theta {:.4} rad)",
                    row.su_bs_distance_m, row.pu_radius_m, row.theta_rad
                );
            }
            emit(&common.out, &fig5_csv(&rows))
        }
    }
}
