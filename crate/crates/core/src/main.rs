use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use lagflow::session::{self, Suite};

#[derive(Parser)]
#[command(name = "lagflow", version, about = "Mean curvature flow of Hamiltonian graphs on the flat torus")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the flow described by a config file.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Output directory; defaults to the config's `output`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a verification suite and write verify.csv.
    Verify {
        /// stationary, flux, angle or two_param
        #[arg(long)]
        suite: String,
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print sign and normalization conventions.
    Info,
}

fn init_threads() -> Result<(), String> {
    let Ok(v) = std::env::var("LAGFLOW_THREADS") else {
        return Ok(());
    };
    let n: usize = v.trim().parse().map_err(|_| format!("LAGFLOW_THREADS must be a positive integer, got `{v}`"))?;
    if n == 0 {
        return Err("LAGFLOW_THREADS must be at least 1".into());
    }
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| e.to_string())
}

fn run(cli: Cli) -> Result<bool, String> {
    match cli.command {
        Command::Info => {
            print!("{}", session::conventions());
            Ok(true)
        }
        Command::Simulate { config, out } => {
            let cfg = session::load_config(&config).map_err(|e| e.to_string())?;
            let out = out.unwrap_or_else(|| cfg.output.clone());
            let report = session::cmd_simulate(&cfg, &out).map_err(|e| e.to_string())?;
            println!(
                "{}: t = {:.6}, steps = {}, max|H| = {:.3e}, defect = {:.3e}, flux = ({:.3e}, {:.3e})",
                report.termination,
                report.final_time,
                report.steps,
                report.max_h,
                report.defect,
                report.total_flux.0,
                report.total_flux.1
            );
            if let Some(e) = report.error.as_ref().or(report.detail.as_ref()) {
                eprintln!("error: {e}");
            }
            Ok(report.succeeded())
        }
        Command::Verify { suite, config, out } => {
            let which = Suite::from_name(&suite).ok_or_else(|| {
                format!("unknown suite `{suite}` (expected stationary, flux, angle or two_param)")
            })?;
            let cfg = session::load_config(&config).map_err(|e| e.to_string())?;
            let out = out.unwrap_or_else(|| cfg.output.clone());
            let report = session::cmd_verify(&cfg, which, &out).map_err(|e| e.to_string())?;
            for r in &report.rows {
                let rel = match r.relation {
                    session::Relation::Below => "<",
                    session::Relation::AtLeast => ">=",
                };
                println!(
                    "{} {}: {:.6e} {} {:.3e}",
                    if r.pass { "PASS" } else { "FAIL" },
                    r.check,
                    r.measured,
                    rel,
                    r.threshold
                );
            }
            if let Some(e) = &report.error {
                eprintln!("error: {e}");
            }
            Ok(report.passed())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = init_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
