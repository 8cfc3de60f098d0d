use std::path::PathBuf;
use std::process::ExitCode;

use biostab::{describe, pool, CliError, RunConfig, Session};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "biostab", version, about = "Onset of phototactic bioconvection in a rotating suspension")]
struct Cli {
    /// Worker threads for sweeps (default: all processors).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Output directory, overriding the configuration.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// More log output (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Equilibrium profiles as CSV.
    BasicState {
        #[arg(short, long)]
        config: PathBuf,
    },
    /// Neutral curve R(k) as CSV, plus SVG when requested.
    NeutralCurve {
        #[arg(short, long)]
        config: PathBuf,
        /// Incidence angle in degrees (default: from the configuration).
        #[arg(long, allow_negative_numbers = true)]
        theta: Option<f64>,
        #[arg(long)]
        ta: Option<f64>,
    },
    /// Critical point for one incidence angle and Taylor number.
    Critical {
        #[arg(short, long)]
        config: PathBuf,
        #[arg(long, allow_negative_numbers = true)]
        theta: Option<f64>,
        #[arg(long)]
        ta: Option<f64>,
    },
    /// Critical points over the configured θ_i × Ta sweep.
    Table {
        #[arg(short, long)]
        config: PathBuf,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    let config = match &cli.cmd {
        Cmd::BasicState { config } | Cmd::NeutralCurve { config, .. } | Cmd::Critical { config, .. } | Cmd::Table { config } => config,
    };
    let cfg = RunConfig::load(config)?;
    let pool = pool(cli.jobs)?;
    pool.install(|| {
        let s = Session::new(cfg, cli.out.clone())?;
        let angle = |t: Option<f64>| -> Result<f64, CliError> {
            let t = t.unwrap_or(s.cfg.params.theta_i_deg);
            s.cfg.optics(t)?;
            Ok(t)
        };
        let taylor = |ta: Option<f64>| -> Result<f64, CliError> {
            let ta = ta.unwrap_or(s.cfg.params.ta);
            if !(ta.is_finite() && ta >= 0.0) {
                return Err(CliError::Config(format!("Taylor number must be non-negative, got {ta}")));
            }
            Ok(ta)
        };
        match cli.cmd {
            Cmd::BasicState { .. } => {
                println!("{}", s.cmd_basic_state()?.display());
            }
            Cmd::NeutralCurve { theta, ta, .. } => {
                println!("{}", describe(&s.cmd_neutral_curve(angle(theta)?, taylor(ta)?)?));
            }
            Cmd::Critical { theta, ta, .. } => {
                let (row, paths) = s.cmd_critical(angle(theta)?, taylor(ta)?)?;
                println!(
                    "lambda_c = {:.6}, R_c = {:.6}, |Im sigma| = {:.6}, {}",
                    row.lambda_c.unwrap_or(f64::NAN),
                    row.r_c.unwrap_or(f64::NAN),
                    row.im_sigma.unwrap_or(f64::NAN),
                    row.branch
                );
                println!("{}", describe(&paths));
            }
            Cmd::Table { .. } => {
                let (rows, paths) = s.cmd_table()?;
                let failed = rows.iter().filter(|r| r.is_error()).count();
                if failed > 0 {
                    log::warn!("{failed} of {} rows failed", rows.len());
                }
                println!("{}", describe(&paths));
            }
        }
        Ok(())
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("biostab: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
