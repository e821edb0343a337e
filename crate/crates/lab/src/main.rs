use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use xcf_core::{Geometry, IntegratorControls, Termination};

use xcf_lab::analysis::{self, termination_name};
use xcf_lab::config::{parse_triple, ConfigFile, RunConfig, TEnd};
use xcf_lab::output::{print_json, write_json, write_run, REPORT_FILE};
use xcf_lab::verify::{self, Fault, Lab, Suite};
use xcf_lab::{sweep, LabError, Result};

/// Cross curvature flow laboratory for left-invariant metrics on 3-dimensional Lie groups.
#[derive(Parser)]
#[command(name = "xcf", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate one trajectory and report on it.
    Simulate(RunArgs),
    /// Integrate until blow-up and report the singular time and asymptotics.
    Blowup(RunArgs),
    /// Label SL(2,R) initial data as Q1, Q2 or Undetermined.
    Classify(RunArgs),
    /// Bisect for the Q1/Q2 switch along (a*b, b, c*b).
    Separatrix(SeparatrixArgs),
    /// Run a grid of initial metrics in parallel.
    Sweep(RunArgs),
    /// Run the acceptance checks and print a pass/fail table.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct RunArgs {
    /// JSON config file; flags override its entries.
    #[arg(long)]
    config: Option<PathBuf>,
    /// heisenberg, su2, e11, e2, sl2r or abelian.
    #[arg(long)]
    geometry: Option<String>,
    /// plus or minus.
    #[arg(long)]
    sign: Option<String>,
    /// Initial metric as A,B,C.
    #[arg(long, value_name = "A,B,C")]
    init: Option<String>,
    /// End time, or `auto` to run until blow-up.
    #[arg(long, value_name = "T|auto")]
    t_end: Option<String>,
    #[arg(long)]
    rel_tol: Option<f64>,
    #[arg(long)]
    abs_tol: Option<f64>,
    #[arg(long)]
    max_steps: Option<usize>,
    /// log or linear.
    #[arg(long)]
    variable_mode: Option<String>,
    /// Output directory for trajectory.csv and report.json.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Sweep grid such as `A=1,2;B=1;C=0.1:1:10`.
    #[arg(long)]
    grid: Option<String>,
    /// Worker threads for sweeps.
    #[arg(long)]
    jobs: Option<usize>,
    /// Fit window as lo,hi fractions of the singular time.
    #[arg(long, value_name = "LO,HI")]
    fit_window: Option<String>,
}

#[derive(Args)]
struct SeparatrixArgs {
    /// Value of B along the family.
    #[arg(long, default_value_t = 1.0)]
    b: f64,
    /// Ratio C/B along the family.
    #[arg(long, default_value_t = 0.5)]
    c: f64,
    /// Bracket on a = A/B as lo,hi.
    #[arg(long, default_value = "0.078,0.5")]
    bracket: String,
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    #[arg(long)]
    rel_tol: Option<f64>,
    #[arg(long)]
    max_steps: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum FaultArg {
    SignFlip,
}

#[derive(Args)]
struct VerifyArgs {
    /// Comma-separated suites to run.
    #[arg(long, value_delimiter = ',')]
    only: Vec<String>,
    /// Also write the results as JSON.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, hide = true)]
    inject_fault: Option<FaultArg>,
}

fn flags(args: &RunArgs) -> Result<ConfigFile> {
    let fit_window = match &args.fit_window {
        Some(s) => {
            let parts: Vec<f64> = s
                .split(',')
                .map(|p| p.trim().parse().map_err(|_| LabError::Config(format!("fit window '{s}' is not lo,hi"))))
                .collect::<Result<_>>()?;
            match parts[..] {
                [lo, hi] => Some([lo, hi]),
                _ => return Err(LabError::Config(format!("fit window '{s}' is not lo,hi"))),
            }
        }
        None => None,
    };
    Ok(ConfigFile {
        geometry: args.geometry.clone(),
        sign: args.sign.clone(),
        init: args.init.as_deref().map(parse_triple).transpose()?,
        t_end: args.t_end.clone().map(TEnd::Text),
        rel_tol: args.rel_tol,
        abs_tol: args.abs_tol,
        max_steps: args.max_steps,
        variable_mode: args.variable_mode.clone(),
        out: args.out.clone(),
        grid: args.grid.clone(),
        jobs: args.jobs,
        fit_window,
    })
}

fn resolve(args: &RunArgs, default_geometry: Option<Geometry>) -> Result<RunConfig> {
    let file = match &args.config {
        Some(path) => ConfigFile::load(path)?,
        None => ConfigFile::default(),
    };
    let mut merged = file.overlay(flags(args)?);
    if merged.geometry.is_none() {
        merged.geometry = default_geometry.map(|g| g.name().to_string());
    }
    RunConfig::resolve(&merged)
}

fn simulate(args: &RunArgs, require_blowup: bool) -> Result<()> {
    let mut cfg = resolve(args, None)?;
    if require_blowup && args.t_end.is_none() {
        cfg.horizon = xcf_lab::config::Horizon::Auto;
    }
    let run = analysis::simulate(&cfg, cfg.initial_metric()?)?;
    match &cfg.out {
        Some(dir) => write_run(dir, &run.trajectory, &run.report)?,
        None => print_json(&run.report)?,
    }
    if require_blowup && run.trajectory.termination() != Termination::BlowUp {
        return Err(LabError::Failed(format!(
            "no blow-up detected: run ended with {}",
            termination_name(run.trajectory.termination())
        )));
    }
    Ok(())
}

fn classify(args: &RunArgs) -> Result<()> {
    let cfg = resolve(args, Some(Geometry::Sl2R))?;
    if cfg.geometry != Geometry::Sl2R {
        return Err(LabError::Config(format!("classify applies to sl2r, not {}", cfg.geometry)));
    }
    let result = analysis::classify(cfg.initial_metric()?, &cfg.controls)?;
    match &cfg.out {
        Some(dir) => write_run(dir, &result.trajectory, &result.report)?,
        None => print_json(&result.report)?,
    }
    Ok(())
}

fn separatrix(args: &SeparatrixArgs) -> Result<()> {
    let [lo, hi] = match parse_pair(&args.bracket) {
        Some(p) => p,
        None => return Err(LabError::Config(format!("bracket '{}' is not lo,hi", args.bracket))),
    };
    let mut controls = IntegratorControls::default();
    if let Some(x) = args.rel_tol {
        controls.rel_tol = x;
    }
    if let Some(n) = args.max_steps {
        controls.max_steps = n;
    }
    controls.validate().map_err(|e| LabError::Config(e.to_string()))?;
    if !(args.b > 0.0 && args.c > 0.0 && args.c <= 1.0) {
        return Err(LabError::Config("separatrix needs b > 0 and 0 < c <= 1".into()));
    }
    let report = analysis::separatrix(args.b, args.c, (lo, hi), args.tol, &controls)?;
    match &args.out {
        Some(dir) => {
            std::fs::create_dir_all(dir).map_err(|source| LabError::Io { path: dir.clone(), source })?;
            write_json(&dir.join(REPORT_FILE), &report)
        }
        None => print_json(&report),
    }
}

fn parse_pair(s: &str) -> Option<[f64; 2]> {
    let (a, b) = s.split_once(',')?;
    Some([a.trim().parse().ok()?, b.trim().parse().ok()?])
}

fn run_sweep(args: &RunArgs) -> Result<()> {
    let cfg = resolve(args, None)?;
    let summary = sweep::sweep(&cfg)?;
    let failed = summary.points.iter().filter(|p| p.error.is_some()).count();
    println!(
        "{} points written to {}, {failed} failed",
        summary.points.len(),
        cfg.out.as_deref().unwrap_or(".".as_ref()).display()
    );
    Ok(())
}

fn run_verify(args: &VerifyArgs) -> Result<()> {
    let only = args.only.iter().map(|s| s.parse::<Suite>()).collect::<Result<Vec<_>>>()?;
    let lab = match args.inject_fault {
        Some(FaultArg::SignFlip) => Lab::with_fault(Fault::SignFlip),
        None => Lab::new(),
    };
    let report = verify::run(&lab, &only);
    print!("{}", report.table());
    if let Some(path) = &args.out {
        write_json(path, &report)?;
    }
    if report.passed() {
        Ok(())
    } else {
        Err(LabError::Failed("verification failed".into()))
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let message = e.render().to_string();
            let err = serde_json::json!({ "error": { "kind": "usage", "message": message.trim() } });
            eprintln!("{err}");
            return ExitCode::from(2);
        }
    };
    let result = match &cli.command {
        Command::Simulate(a) => simulate(a, false),
        Command::Blowup(a) => simulate(a, true),
        Command::Classify(a) => classify(a),
        Command::Separatrix(a) => separatrix(a),
        Command::Sweep(a) => run_sweep(a),
        Command::Verify(a) => run_verify(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
