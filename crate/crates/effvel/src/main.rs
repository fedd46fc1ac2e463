use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use effvel::runner::{self, seconds};
use effvel::{ExperimentConfig, RunError};

#[derive(Parser)]
#[command(
    name = "effvel",
    version,
    about = "Viscous shallow-water experiments in effective-velocity form"
)]
struct Cli {
    /// Suppress the console summary.
    #[arg(long, short, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Experiment config (JSON).
    #[arg(long, short)]
    config: PathBuf,
    /// Output directory; defaults to the config's `output`, then `<root>/<name>`.
    #[arg(long, short)]
    out: Option<PathBuf>,
    #[arg(long, env = "EFFVEL_OUT", hide = true)]
    out_root: Option<PathBuf>,
}

impl Common {
    fn load(&self) -> Result<(ExperimentConfig, PathBuf), RunError> {
        let cfg = ExperimentConfig::load(&self.config)?;
        let dir = cfg.output_dir(self.out.as_deref(), self.out_root.as_deref());
        Ok((cfg, dir))
    }
}

#[derive(Subcommand)]
enum Command {
    /// Solve one experiment and write all requested outputs.
    Run(Common),
    /// Refine the grid repeatedly and report observed orders.
    Convergence {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 4)]
        levels: usize,
    },
    /// Compare the finite-difference solution with the Picard oracle.
    OracleCompare(Common),
    /// Caloric norms of the initial data or of a stored field.
    Norms {
        #[command(flatten)]
        common: Common,
        /// A `field_*.csv` written by `run`.
        #[arg(long)]
        field: Option<PathBuf>,
    },
    /// Parse and validate a config without solving.
    ValidateConfig {
        #[arg(long, short)]
        config: PathBuf,
    },
}

fn execute(cmd: &Command, quiet: bool) -> Result<(), RunError> {
    let say = |line: String| {
        if !quiet {
            println!("{line}");
        }
    };
    match cmd {
        Command::Run(common) => {
            let (cfg, dir) = common.load()?;
            let outcome = runner::run(&cfg, &dir)?;
            let s = &outcome.summary;
            say(format!(
                "{}: t = {}, {} steps, {} samples",
                cfg.name, s.t_final, s.steps, s.samples
            ));
            for n in &s.norms {
                say(format!("  {} = {:.6e}", n.name, n.value));
            }
            for m in &s.monotonicity {
                say(format!(
                    "  {} non-increasing: {} (max increase {:.3e})",
                    m.series, m.pass, m.max_increase
                ));
            }
            for g in &s.growth {
                say(format!("  growth {:?}: {} (margin {:.3e})", g.kind, g.pass, g.margin));
            }
            if let Some(l) = s.lipschitz_sup {
                say(format!("  lipschitz sup = {l:.6e}"));
            }
            say(format!("  wrote {}", dir.display()));
        }
        Command::Convergence { common, levels } => {
            let (cfg, dir) = common.load()?;
            for r in runner::convergence_study(&cfg, *levels, &dir)? {
                say(format!(
                    "  n = {:6}  diff_rho = {:?}  diff_v = {:?}  order_rho = {:?}  order_v = {:?}",
                    r.n_cells, r.diff_rho, r.diff_v, r.order_rho, r.order_v
                ));
            }
        }
        Command::OracleCompare(common) => {
            let (cfg, dir) = common.load()?;
            let r = runner::oracle_compare(&cfg, &dir)?;
            say(format!(
                "{}: {} Picard iterations, sup discrepancy {:.3e}",
                cfg.name,
                r.iterations,
                r.max_discrepancy()
            ));
        }
        Command::Norms { common, field } => {
            let (cfg, dir) = common.load()?;
            for n in runner::field_norms(&cfg, field.as_deref(), &dir)? {
                say(format!("  {} = {:.6e}", n.name, n.value));
            }
        }
        Command::ValidateConfig { config } => {
            let cfg = ExperimentConfig::load(Path::new(config))?;
            cfg.validate()?;
            say(format!("{}: ok", cfg.name));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let started = Instant::now();
    let result = execute(&cli.command, cli.quiet);
    if !cli.quiet {
        println!("wall time {:.3} s", seconds(started.elapsed()));
    }
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
