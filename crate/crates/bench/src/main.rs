use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use randsolve_bench::config::apply_override;
use randsolve_bench::{
    gen_problem, run_bench, run_rates, verify_expectation, BenchConfig, HarnessError,
};
use serde_json::Value;

#[derive(Parser, Debug)]
#[command(name = "randsolve", version, about = "Sketch-and-project solver experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run every (scheme, trial) cell and write CSV traces plus summary.json.
    Bench(Common),
    /// Fit empirical contraction rates and compare them with theory.
    Rates(Common),
    /// Monte-Carlo check of the expected error propagator against its bound.
    VerifyExpectation(Common),
    /// Generate the configured problem and write it as MatrixMarket.
    GenProblem(Common),
}

#[derive(clap::Args, Debug)]
struct Common {
    /// JSON configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Overrides the solver seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Comma-separated scheme ids replacing the configured list.
    #[arg(long, value_delimiter = ',')]
    scheme: Option<Vec<String>>,
    /// `dotted.key=value`, repeatable; value is JSON or a bare string.
    #[arg(long = "override", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

fn load(c: &Common) -> Result<BenchConfig, HarnessError> {
    let text = std::fs::read_to_string(&c.config)
        .map_err(|e| HarnessError::Config(format!("cannot read {}: {e}", c.config.display())))?;
    let mut doc: Value =
        serde_json::from_str(&text).map_err(|e| HarnessError::Config(format!("config: {e}")))?;
    if !doc.is_object() {
        return Err(HarnessError::Config("config must be a JSON object".into()));
    }
    for o in &c.overrides {
        apply_override(&mut doc, o)?;
    }
    if let Some(seed) = c.seed {
        doc["seed"] = seed.into();
    }
    if let Some(out) = &c.out {
        doc["output_dir"] = out.to_string_lossy().into_owned().into();
    }
    if let Some(ids) = &c.scheme {
        doc["schemes"] = ids.iter().map(|s| Value::String(s.trim().to_string())).collect();
    }
    serde_json::from_value(doc).map_err(|e| HarnessError::Config(format!("config: {e}")))
}

fn execute(cli: Cli) -> Result<i32, HarnessError> {
    match cli.command {
        Command::Bench(c) => {
            let out = run_bench(&load(&c)?)?;
            for cell in &out.report.per_scheme {
                let iters = cell.iters.map_or("-".into(), |i| i.to_string());
                let res = cell.final_res.map_or("-".into(), |r| format!("{r:.3e}"));
                println!(
                    "{:<10} trial {:<3} {:?} iters={iters} res={res} wall={:.3}s",
                    cell.label, cell.trial, cell.status, cell.wall_s
                );
                if let Some(e) = &cell.error {
                    eprintln!("  {e}");
                }
            }
            Ok(out.exit_code)
        }
        Command::Rates(c) => {
            let out = run_rates(&load(&c)?)?;
            for entry in &out.report.reports {
                match (&entry.report, &entry.error) {
                    (Some(r), _) => println!(
                        "{:<10} fit={} theory={} {}",
                        entry.label,
                        r.rho_fit.map_or("-".into(), |v| format!("{v:.6}")),
                        r.rho_theory.map_or("-".into(), |v| format!("{v:.6}")),
                        if entry.violated { "VIOLATED" } else { "ok" }
                    ),
                    (None, Some(e)) => println!("{:<10} error: {e}", entry.label),
                    (None, None) => {}
                }
            }
            Ok(out.exit_code)
        }
        Command::VerifyExpectation(c) => {
            let out = verify_expectation(&load(&c)?)?;
            for e in &out.report.entries {
                match &e.error {
                    None => println!(
                        "{:<10} max_violation={:.3e} se={:.3e} {}",
                        e.label,
                        e.max_violation.unwrap_or(f64::NAN),
                        e.std_error.unwrap_or(f64::NAN),
                        if e.bound_holds { "ok" } else { "VIOLATED" }
                    ),
                    Some(err) => println!("{:<10} error: {err}", e.label),
                }
            }
            Ok(out.exit_code)
        }
        Command::GenProblem(c) => {
            let out = gen_problem(&load(&c)?)?;
            for f in &out.files {
                println!("{}", f.display());
            }
            for w in &out.report.stats.warnings {
                eprintln!("warning: {w}");
            }
            Ok(out.exit_code)
        }
    }
}

fn main() -> ExitCode {
    let code = match execute(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    };
    ExitCode::from(code as u8)
}
