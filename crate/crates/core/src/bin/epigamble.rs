use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use epigamble::moments::InterlinkLevel;
use epigamble::report::{self, RunRecord, ScanSpec, DEFAULT_SEED};
use epigamble::seesaw::SeesawConfig;
use epigamble::{Error, GameParams, Result};

#[derive(Parser)]
#[command(name = "epigamble", version, about = "Quantum gambling bounds against psi-epistemic models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Interlink {
    PaperMin,
    Full,
}

impl From<Interlink> for InterlinkLevel {
    fn from(v: Interlink) -> Self {
        match v {
            Interlink::PaperMin => InterlinkLevel::PaperMin,
            Interlink::Full => InterlinkLevel::Full,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Optimal gambling payoff for |0> and the state at the given Bloch angle.
    Gamble {
        #[arg(long)]
        angle: f64,
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        beta: f64,
        #[arg(long, default_value_t = 2)]
        dim: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Component breakdown of the operational bound B_Q.
    Bound {
        #[arg(long)]
        angle: f64,
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        beta: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// See-saw scan over an alpha grid; writes CSV to --out.
    Scan {
        #[arg(long, default_value_t = 0.05)]
        alpha_min: f64,
        #[arg(long, default_value_t = 1.0)]
        alpha_max: f64,
        #[arg(long, default_value_t = 20)]
        steps: usize,
        #[arg(long, default_value_t = 1.0)]
        beta: f64,
        #[arg(long, default_value_t = 2)]
        dim: usize,
        #[arg(long, default_value_t = 20)]
        restarts: usize,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Also solve the moment upper bound at every grid point.
        #[arg(long)]
        with_npa: bool,
        #[arg(long, value_enum, default_value_t = Interlink::Full)]
        interlink: Interlink,
    },
    /// Overlap report for a finite ontological model file.
    Ontic {
        model: PathBuf,
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        beta: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Dimension-free moment upper bound.
    Npa {
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        beta: f64,
        #[arg(long, value_enum, default_value_t = Interlink::Full)]
        interlink: Interlink,
        /// Run a companion see-saw and report the gap.
        #[arg(long)]
        with_seesaw: bool,
        #[arg(long, default_value_t = 2)]
        dim: usize,
        #[arg(long, default_value_t = 20)]
        restarts: usize,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Serialize)]
struct AngleParams {
    angle: f64,
    alpha: f64,
    beta: f64,
    dim: usize,
}

#[derive(Serialize)]
struct OnticParams {
    model: PathBuf,
    alpha: f64,
    beta: f64,
}

#[derive(Serialize)]
struct NpaParams {
    alpha: f64,
    beta: f64,
    interlink: InterlinkLevel,
    seesaw: Option<SeesawConfig>,
}

fn emit(record: &RunRecord, out: Option<&PathBuf>) -> Result<()> {
    let text = record.to_json();
    match out {
        Some(path) => std::fs::write(path, text + "\n")?,
        None => {
            if let Err(e) = writeln!(std::io::stdout().lock(), "{text}") {
                if e.kind() != std::io::ErrorKind::BrokenPipe {
                    return Err(e.into());
                }
            }
        }
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Gamble { angle, alpha, beta, dim, out } => {
            let p = AngleParams { angle, alpha, beta, dim };
            let rec = RunRecord::capture("gamble", &p, None, || report::cmd_gamble(angle, GameParams::new(alpha, beta)?, dim))?;
            emit(&rec, out.as_ref())
        }
        Command::Bound { angle, alpha, beta, out } => {
            let p = AngleParams { angle, alpha, beta, dim: 2 };
            let rec = RunRecord::capture("bound", &p, None, || report::cmd_bound(angle, GameParams::new(alpha, beta)?))?;
            emit(&rec, out.as_ref())
        }
        Command::Scan {
            alpha_min,
            alpha_max,
            steps,
            beta,
            dim,
            restarts,
            seed,
            out,
            with_npa,
            interlink,
        } => {
            let spec = ScanSpec {
                alpha_min,
                alpha_max,
                steps,
                beta,
                dim,
                restarts,
                seed,
                with_npa,
                interlink: interlink.into(),
            };
            let mut table = None;
            let rec = RunRecord::capture("scan", &spec, Some(seed), || {
                let t = report::cmd_scan(&spec)?;
                table = Some(t.clone());
                Ok(t)
            })?;
            let table = table.expect("scan ran");
            table.write_csv_path(&out)?;
            emit(&rec, None)?;
            if table.failures() > 0 {
                return Err(Error::AllRestartsFailed {
                    restarts,
                    last: format!("{} grid points failed", table.failures()),
                });
            }
            Ok(())
        }
        Command::Ontic { model, alpha, beta, out } => {
            let p = OnticParams { model: model.clone(), alpha, beta };
            let rec = RunRecord::capture("ontic", &p, None, || report::cmd_ontic_path(&model, GameParams::new(alpha, beta)?))?;
            emit(&rec, out.as_ref())
        }
        Command::Npa {
            alpha,
            beta,
            interlink,
            with_seesaw,
            dim,
            restarts,
            seed,
            out,
        } => {
            let cfg = with_seesaw.then(|| SeesawConfig {
                dim,
                restarts,
                seed,
                ..SeesawConfig::default()
            });
            let p = NpaParams {
                alpha,
                beta,
                interlink: interlink.into(),
                seesaw: cfg,
            };
            let rec = RunRecord::capture("npa", &p, cfg.map(|c| c.seed), || {
                report::cmd_npa(GameParams::new(alpha, beta)?, interlink.into(), cfg.as_ref())
            })?;
            emit(&rec, out.as_ref())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
