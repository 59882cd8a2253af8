use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use otb_core::fmt_f64;
use otb_lab::{
    emit_plot_data, mixing_profile, run_experiment, validate_config, LabError, RunOptions,
    DEFAULT_OUT_DIR, OUT_DIR_ENV,
};

#[derive(Parser)]
#[command(name = "otb-lab", version, about = "Online-to-batch generalization bound laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment sweep and write its artifacts.
    Run {
        config: PathBuf,
        /// Output directory (overrides the config's `output`).
        #[arg(long, env = OUT_DIR_ENV)]
        out: Option<PathBuf>,
        /// Replications per n (overrides the config).
        #[arg(long)]
        replications: Option<usize>,
        /// First replication seed (overrides the config).
        #[arg(long)]
        seed: Option<u64>,
        /// Validate the config and exit.
        #[arg(long)]
        check_only: bool,
    },
    /// Print the chain's φ and β profile as CSV.
    Mixing {
        config: PathBuf,
        #[arg(long, default_value_t = otb_lab::config::DEFAULT_KMAX)]
        kmax: usize,
    },
    /// Aggregate a summary.csv into a per-n plotting table.
    Plotdata {
        summary: PathBuf,
        /// Destination (default: plot_data.csv next to the summary).
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if let LabError::Invariant(v) = &e {
                for x in v {
                    eprintln!(
                        "  n={} seed={} check={} lhs={} rhs={}",
                        x.n,
                        x.seed,
                        x.check,
                        fmt_f64(x.lhs),
                        fmt_f64(x.rhs)
                    );
                }
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn dispatch(cmd: Command) -> Result<(), LabError> {
    match cmd {
        Command::Run { config, out, replications, seed, check_only } => {
            let cfg = validate_config(&config)?;
            if check_only {
                println!("{}: ok (sha256 {})", config.display(), cfg.hash);
                return Ok(());
            }
            let out_dir = out
                .or_else(|| cfg.output.clone())
                .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR));
            let outcome = run_experiment(&cfg, &RunOptions { out_dir, replications, seed })?;
            for r in &outcome.coverage {
                println!(
                    "n={:<6} tau={} mean_gen={:.6} se={:.6} cov42={:.4} cov54={} cor56={}",
                    r.n,
                    r.tau,
                    r.mean_gen,
                    r.se_gen,
                    r.coverage_thm42,
                    r.coverage_thm54.map_or("n/a".into(), |c| format!("{c:.4}")),
                    r.coverage_cor56.map_or("n/a".into(), |c| format!("{c:.4}")),
                );
            }
            println!("artifacts in {}", outcome.out_dir.display());
            if outcome.violations.is_empty() {
                Ok(())
            } else {
                Err(LabError::Invariant(outcome.violations))
            }
        }
        Command::Mixing { config, kmax } => {
            let cfg = validate_config(&config)?;
            let profile = mixing_profile(&cfg, kmax)?;
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            profile.write_csv(&mut lock)?;
            lock.flush().map_err(|source| LabError::Io { path: PathBuf::from("<stdout>"), source })
        }
        Command::Plotdata { summary, out } => {
            let out = out.unwrap_or_else(|| {
                summary.parent().unwrap_or(Path::new(".")).join("plot_data.csv")
            });
            let rows = emit_plot_data(&summary, &out)?;
            println!("{} rows written to {}", rows.len(), out.display());
            Ok(())
        }
    }
}
