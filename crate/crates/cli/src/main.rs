mod config;
mod output;
mod run;

use std::process::ExitCode;

use clap::Parser;

use config::{Cli, RunConfig};

const EXIT_NUMERICAL: u8 = 1;
const EXIT_USAGE: u8 = 2;

fn workers() -> Result<Option<usize>, String> {
    match std::env::var(run::WORKERS_ENV) {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(format!(
                "{} must be a positive integer, got `{v}`",
                run::WORKERS_ENV
            )),
        },
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let cfg = match RunConfig::resolve(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_USAGE);
        }
    };
    let pool = match workers() {
        Ok(n) => {
            let mut b = rayon::ThreadPoolBuilder::new();
            if let Some(n) = n {
                b = b.num_threads(n);
            }
            b.build().expect("thread pool")
        }
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_USAGE);
        }
    };
    let jobs = run::jobs(&cfg);
    let outcome = match pool.install(|| run::run(&cfg, jobs)) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_NUMERICAL);
        }
    };
    for p in &outcome.manifest.outputs {
        for f in &p.files {
            println!("{}", cfg.out_dir().join(&f.path).display());
        }
    }
    if outcome.reused > 0 {
        eprintln!(
            "reused {} completed point(s) from the previous manifest",
            outcome.reused
        );
    }
    if !outcome.manifest.errors.is_empty() {
        let report = serde_json::json!({ "errors": outcome.manifest.errors });
        eprintln!(
            "{}",
            serde_json::to_string_pretty(&report).expect("report serializes")
        );
        return ExitCode::from(EXIT_NUMERICAL);
    }
    if outcome.failed_checks {
        eprintln!("error: one or more checks failed");
        return ExitCode::from(EXIT_NUMERICAL);
    }
    ExitCode::SUCCESS
}
