use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use stlab::error::{LabError, EXIT_PASS};
use stlab::pipeline::{run_scenario, RunOptions};
use stlab::study::run_study;
use stlab::{scenarios, ScenarioConfig};

#[derive(Parser)]
#[command(name = "stlab", version, about = "Verification runs for the spacetime Laplacian equation on 3D grids")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario (a config file or a built-in name) and write its reports.
    Run {
        scenario: String,
        #[command(flatten)]
        common: Common,
        /// Nodes per axis, overriding the config.
        #[arg(long)]
        resolution: Option<usize>,
    },
    /// Rerun a scenario over several resolutions and fit convergence orders.
    Study {
        scenario: String,
        #[command(flatten)]
        common: Common,
        /// Comma-separated, strictly increasing node counts per axis.
        #[arg(long, value_delimiter = ',', default_value = "16,32,64")]
        resolutions: Vec<usize>,
    },
    /// List the built-in scenarios.
    List {
        /// Print a JSON array instead of a table.
        #[arg(long)]
        json: bool,
    },
}

#[derive(Args)]
struct Common {
    /// Output directory (default: the config's, else out/<name>).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write binary field dumps with JSON sidecars.
    #[arg(long)]
    dump_fields: bool,
    /// Write regular level sets as OBJ files plus a per-triangle CSV.
    #[arg(long)]
    dump_surfaces: bool,
    /// Multiply every check tolerance by this factor.
    #[arg(long, default_value_t = 1.0)]
    tolerance_scale: f64,
}

impl Common {
    fn options(&self) -> RunOptions {
        RunOptions {
            out_dir: self.out.clone(),
            write: true,
            dump_fields: self.dump_fields,
            dump_surfaces: self.dump_surfaces,
            tolerance_scale: self.tolerance_scale,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match execute(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("{}", serde_json::to_string(&e.record()).expect("record serializes"));
            e.exit_code()
        }
    };
    ExitCode::from(code as u8)
}

fn load(spec: &str, resolution: Option<usize>) -> Result<ScenarioConfig, LabError> {
    let cfg = scenarios::resolve(spec)?;
    Ok(match resolution {
        Some(n) => cfg.with_resolution(n),
        None => cfg,
    })
}

fn execute(command: Command) -> Result<i32, LabError> {
    match command {
        Command::List { json } => {
            let catalog = scenarios::catalog();
            if json {
                println!("{}", serde_json::to_string_pretty(&catalog).expect("catalog serializes"));
            } else {
                for entry in catalog {
                    println!("{:<22} {}", entry.name, entry.description);
                }
            }
            Ok(EXIT_PASS)
        }
        Command::Run { scenario, common, resolution } => {
            let cfg = load(&scenario, resolution)?;
            if !(common.tolerance_scale > 0.0) {
                return Err(stlab::ConfigError::new("tolerance_scale", "must be positive").into());
            }
            let out = run_scenario(&cfg, &common.options())?;
            let d = &out.document;
            println!("{} ({}x{}x{})", d.scenario, d.dims[0], d.dims[1], d.dims[2]);
            for r in &d.reports {
                let status = if r.pass { "PASS" } else { "FAIL" };
                let scope = if r.gating { "" } else { " (info)" };
                println!(
                    "  {status}{scope:<7} {:<36} lhs={:+.6e} rhs={:+.6e} margin={:+.3e} tol={:.1e}",
                    r.name, r.lhs, r.rhs, r.margin, r.tolerance
                );
            }
            let dir = out.out_dir.as_ref().map(|p| p.display().to_string()).unwrap_or_default();
            println!(
                "result: {} (exit {}), {:.2} s, files in {dir}",
                if out.pass() { "pass" } else { "fail" },
                out.exit_code(),
                out.manifest.total_seconds()
            );
            Ok(out.exit_code())
        }
        Command::Study { scenario, common, resolutions } => {
            let cfg = load(&scenario, None)?;
            let report = run_study(&cfg, &resolutions, &common.options())?;
            println!("{} over {:?}", report.scenario, report.resolutions);
            for fit in &report.fits {
                let order = match (fit.exact, fit.order) {
                    (true, _) => "exact".to_string(),
                    (false, Some(p)) => format!("{p:.3}"),
                    (false, None) => "n/a".to_string(),
                };
                let residuals: Vec<String> = fit.residuals.iter().map(|r| format!("{r:.3e}")).collect();
                println!("  {:<36} order={order:<7} residuals=[{}]", fit.check, residuals.join(", "));
            }
            if let Some(dir) = &report.out_dir {
                println!("study.csv written to {}", dir.display());
            }
            match report.aborted {
                Some(e) => Err(e),
                None => Ok(EXIT_PASS),
            }
        }
    }
}
