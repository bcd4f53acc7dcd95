use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use orlicz_max::runner::{parse_config, run, Command};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Cmd {
    Norm,
    Maximal,
    Conditions,
    Verify,
    Continuity,
}

impl From<Cmd> for Command {
    fn from(c: Cmd) -> Self {
        match c {
            Cmd::Norm => Command::Norm,
            Cmd::Maximal => Command::Maximal,
            Cmd::Conditions => Command::Conditions,
            Cmd::Verify => Command::Verify,
            Cmd::Continuity => Command::Continuity,
        }
    }
}

/// Luxemburg norms, maximal functions and structural checks on sampled fields.
///
/// Exit status: 0 all checks pass, 1 a check fails, 2 usage or config error,
/// 3 numerical failure.
#[derive(Debug, Parser)]
#[command(name = "orlicz-max", version)]
struct Cli {
    command: Cmd,

    /// TOML experiment config. Keys may be overridden with OMAX__SECTION__KEY variables.
    #[arg(long)]
    config: PathBuf,

    /// Output directory for report.json, report.csv and artifacts.
    #[arg(long)]
    out: Option<PathBuf>,

    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,

    /// Worker threads (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot start {n} threads: {e}");
            return ExitCode::from(2);
        }
    }
    let mut cfg = match parse_config(&cli.config) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    if let Some(seed) = cli.seed {
        cfg = cfg.with_seed(seed);
    }
    let output = match run(cli.command.into(), &cfg) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(if e.is_numerical() { 3 } else { 2 });
        }
    };
    for r in &output.report.reports {
        let status = if r.skipped {
            "SKIP"
        } else if r.passed {
            "PASS"
        } else {
            "FAIL"
        };
        println!("{status} {} value={:e} tolerance={:e}", r.name, r.value, r.tolerance);
    }
    for e in &output.report.errors {
        println!("ERROR {}: {}", e.stage, e.message);
    }
    let dir = cli.out.or_else(|| cfg.out_dir.clone()).unwrap_or_else(|| PathBuf::from("orlicz-out"));
    if let Err(e) = output.write(&dir) {
        eprintln!("error: cannot write reports to {}: {e}", dir.display());
        return ExitCode::from(2);
    }
    println!(
        "summary: {} ({} checks, {} errors) -> {}",
        if output.report.passed { "passed" } else { "failed" },
        output.report.reports.len(),
        output.report.errors.len(),
        dir.display()
    );
    let code = output.exit_code();
    if matches!(code, 0..=3) {
        ExitCode::from(code as u8)
    } else {
        ExitCode::FAILURE
    }
}
