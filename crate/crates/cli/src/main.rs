use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use jetfield::config::load_config;
use jetfield::{parse_point, run_compute, run_verify, CliError, VerifyOptions};
use jetfield_core::SigmaSpec;

#[derive(Parser)]
#[command(name = "jetfield", version, about = "Compute and verify jet-space geometry from a metric configuration")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Dump every named tensor at one point as JSON.
    Compute {
        config: PathBuf,
        /// `t=a:b,x=c:d,y=e:f:g:h`, y in (i, α) order with α fastest.
        #[arg(long)]
        point: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run every registered check at seeded sample points.
    Verify {
        config: PathBuf,
        #[arg(long)]
        json: Option<PathBuf>,
        #[arg(long)]
        tolerance: Option<f64>,
        #[arg(long)]
        points: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// List the built-in conformal function presets.
    Presets,
}

fn run(cli: Cli) -> Result<u8, CliError> {
    match cli.command {
        Command::Compute { config, point, out } => {
            let cfg = load_config(&config)?;
            let pt = point.map(|s| parse_point(&s, cfg.spec.p, cfg.spec.n)).transpose()?;
            let value = run_compute(&cfg, pt)?;
            let text = serde_json::to_string_pretty(&value).expect("json serializes");
            match out {
                Some(path) => std::fs::write(path, text + "\n")?,
                None => println!("{text}"),
            }
            Ok(0)
        }
        Command::Verify { config, json, tolerance, points, seed } => {
            let cfg = load_config(&config)?;
            let report = run_verify(&cfg, VerifyOptions { points, seed, tolerance })?;
            if let Some(path) = json {
                std::fs::write(path, report.to_json() + "\n")?;
            }
            for c in &report.checks {
                let status = match (c.diagnostic, c.pass) {
                    (true, _) => "diag",
                    (false, true) => "pass",
                    (false, false) => "FAIL",
                };
                let note = c.offending_term.map(|t| format!("  offending term: {t}")).unwrap_or_default();
                println!("{status:4}  {:<40} abs {:.3e}  rel {:.3e}{note}", c.id, c.max_abs_residual.0, c.max_rel_residual.0);
            }
            let s = &report.summary;
            println!(
                "{} checks, {} diagnostic, {} failed (config {}, seed {}, {} points)",
                s.checks, s.diagnostic, s.failed, &report.meta.config_hash[..12], report.meta.seed, report.meta.points
            );
            Ok(if s.pass { 0 } else { 1 })
        }
        Command::Presets => {
            for (tag, form) in SigmaSpec::PRESETS {
                println!("{tag:12} {form}");
            }
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("jetfield: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
