use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use qdyn_cli::config::{parse_param, parse_range};
use qdyn_cli::{apply_overrides, parse_config_value, render_text, run, table1_report, thread_pool, Overrides};
use qdyn_cli::{RunConfig, RunError, Table1Settings};
use serde_json::Value;

/// Single-qubit open-system dynamics: trajectories, speed of evolution and
/// non-Markovianity diagnostics.
#[derive(Parser)]
#[command(name = "qdyn", version)]
struct Cli {
    #[command(subcommand)]
    verb: Verb,
}

#[derive(Subcommand)]
enum Verb {
    /// Trajectory (and speed curve when enabled) for one model.
    Simulate(RunArgs),
    /// Initial-speed, BLP and divisibility sweep over one parameter.
    Sweep(RunArgs),
    /// BLP measure and divisibility report for one model.
    Nonmarkov(RunArgs),
    /// Reproduce the summary table of initial speeds and memory regions.
    Table1(Table1Args),
}

#[derive(Args)]
struct Common {
    /// Worker threads for sweep points.
    #[arg(long, env = "QDYN_JOBS")]
    jobs: Option<usize>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    /// JSON run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Model name (ohmic, polarization, jaynes_cummings, pauli_tanh, pauli_tan).
    #[arg(long)]
    model: Option<String>,
    /// Model parameter as name=value; repeatable.
    #[arg(long = "param", value_parser = parse_param)]
    params: Vec<(String, f64)>,
    /// Sweep range start:end:points.
    #[arg(long, value_parser = parse_range)]
    range: Option<(f64, f64, usize)>,
    /// Polar angle of the initial state.
    #[arg(long)]
    theta: Option<f64>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Table1Args {
    /// Finite-difference step.
    #[arg(long, default_value_t = 1e-4)]
    h: f64,
    /// Relative tolerance of the finite-difference check.
    #[arg(long, default_value_t = 1e-3)]
    fd_tol: f64,
    /// Horizon of the region diagnostics, in model time units.
    #[arg(long, default_value_t = 10.0)]
    horizon: f64,
    /// Scale the Ohmic closed form by this factor (fault injection).
    #[arg(long, default_value_t = 1.0, hide = true)]
    ohmic_gamma_scale: f64,
    /// Print the JSON report instead of the text table.
    #[arg(long)]
    json: bool,
    #[command(flatten)]
    common: Common,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.verb {
        Verb::Table1(args) => table1(args),
        Verb::Simulate(args) => simulate(args, |c| {
            c.sweep = None;
            c.analysis.blp = false;
            c.analysis.divisibility = false;
            Ok(())
        }),
        Verb::Sweep(args) => simulate(args, |c| {
            if c.sweep.is_none() {
                return Err("sweep needs a \"sweep\" block in the config or --range".into());
            }
            Ok(())
        }),
        Verb::Nonmarkov(args) => simulate(args, |c| {
            c.sweep = None;
            c.analysis.blp = true;
            c.analysis.divisibility = true;
            Ok(())
        }),
    }
}

fn usage(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(2)
}

fn simulate(args: RunArgs, adjust: impl Fn(&mut RunConfig) -> Result<(), String>) -> ExitCode {
    let mut doc = match &args.config {
        Some(path) => match std::fs::read_to_string(path) {
            Ok(text) => match serde_json::from_str::<Value>(&text) {
                Ok(v) => v,
                Err(e) => return usage(format!("{}: malformed JSON: {e}", path.display())),
            },
            Err(e) => return usage(format!("{}: {e}", path.display())),
        },
        None => Value::Object(Default::default()),
    };
    let overrides = Overrides {
        model: args.model,
        params: args.params,
        range: args.range,
        theta: args.theta,
        out: args.common.out,
    };
    let config = apply_overrides(&mut doc, &overrides).and_then(|()| parse_config_value(doc));
    let mut config = match config {
        Ok(c) => c,
        Err(e) => return usage(e),
    };
    if let Err(e) = adjust(&mut config) {
        return usage(e);
    }
    let result = thread_pool(args.common.jobs).and_then(|pool| run(&config, &pool));
    match result {
        Ok(out) => {
            for f in &out.files {
                println!("wrote {}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(RunError::Config(e)) => usage(e),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn table1(args: Table1Args) -> ExitCode {
    let settings = Table1Settings {
        h: args.h,
        fd_rel: args.fd_tol,
        horizon: args.horizon,
        ohmic_gamma_scale: args.ohmic_gamma_scale,
        ..Table1Settings::default()
    };
    if !(settings.h > 0.0 && settings.fd_rel > 0.0 && settings.horizon > 0.0) {
        return usage("--h, --fd-tol and --horizon must be > 0");
    }
    let pool = match thread_pool(args.common.jobs) {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    let report = pool.install(|| table1_report(&settings));
    let text = render_text(&report);
    let json = serde_json::to_string_pretty(&report).expect("report serializes") + "\n";
    if let Some(dir) = &args.common.out {
        let written = std::fs::create_dir_all(dir)
            .and_then(|()| std::fs::write(dir.join("table1.json"), &json))
            .and_then(|()| std::fs::write(dir.join("table1.txt"), &text));
        if let Err(e) = written {
            eprintln!("error: {}: {e}", dir.display());
            return ExitCode::from(1);
        }
    }
    print!("{}", if args.json { &json } else { &text });
    if report.passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
