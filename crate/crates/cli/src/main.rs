use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use reglab_cli::{emit, run, ConfigError, ExperimentConfig, Suite};

/// Run numerical verification suites and write a CSV or JSON report.
#[derive(Parser, Debug)]
#[command(name = "reglab", version, allow_negative_numbers = true)]
struct Cli {
    /// spectra, radius, resolvent, gadget, extend, apostol, ransford or all
    suite: String,
    /// Flat key = value file applied before the flags below.
    #[arg(long)]
    config: Option<PathBuf>,
    /// shift, weighted-shift or diagonal
    #[arg(long)]
    op: Option<String>,
    /// Comma-separated period of the weight sequence.
    #[arg(long)]
    weights: Option<String>,
    /// Comma-separated lambda grid, e.g. `0,0.3,0.5i,-0.5-0.5i`.
    #[arg(long, allow_hyphen_values = true)]
    lambda: Option<String>,
    #[arg(long)]
    n: Option<String>,
    #[arg(long)]
    kmax: Option<String>,
    #[arg(long)]
    tol: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    budget: Option<String>,
    #[arg(long)]
    out: Option<String>,
    /// csv or json
    #[arg(long)]
    format: Option<String>,
    /// Record wall-clock seconds per check (makes reports non-reproducible).
    #[arg(long)]
    timing: bool,
}

fn configure(cli: &Cli) -> Result<ExperimentConfig, ConfigError> {
    let mut cfg = ExperimentConfig::default();
    if let Some(path) = &cli.config {
        cfg.apply_file(path)?;
    }
    cfg.suite = cli.suite.parse::<Suite>()?;
    let flags = [
        ("op", &cli.op),
        ("weights", &cli.weights),
        ("lambda", &cli.lambda),
        ("n", &cli.n),
        ("kmax", &cli.kmax),
        ("tol", &cli.tol),
        ("seed", &cli.seed),
        ("budget", &cli.budget),
        ("out", &cli.out),
        ("format", &cli.format),
    ];
    for (key, value) in flags {
        if let Some(v) = value {
            cfg.set(key, v)?;
        }
    }
    if cli.timing {
        cfg.timing = true;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let cfg = match configure(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    let report = match run(&cfg) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    let path = cfg.output_path();
    if let Err(e) = emit(&report, cfg.format, &path) {
        eprintln!("error: writing {}: {e}", path.display());
        return ExitCode::from(1);
    }
    for note in &report.notes {
        eprintln!("note: {note}");
    }
    for r in report.failures() {
        eprintln!(
            "FAIL {} ({}): value {:e}, residual {:e}, tolerance {:e}",
            r.check, r.anchor, r.value, r.residual, r.tolerance
        );
    }
    let passed = report.records.len() - report.failures().count();
    println!(
        "{passed}/{} checks passed; report written to {}",
        report.records.len(),
        path.display()
    );
    if report.all_pass() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    }
}
