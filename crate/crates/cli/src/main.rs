use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use smirnov::experiments::{run_map, run_rate_sweep_with, run_zero_sweep, MapReport, Reference};
use smirnov::ortho::build_orthobasis;
use smirnov::quad::{build_grid_at, Measure};
use smirnov::{Error, RunConfig, C64};

/// Conformal map approximation by extremal polynomials.
#[derive(Parser, Debug)]
#[command(name = "smirnov", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build the domain and grid and print invariant diagnostics.
    Validate(Common),
    /// Compute Q̃ and J̃ for one degree and write image samples.
    Map(Common),
    /// Run the degree sweep, fits and plots.
    Rates(Common),
    /// Zero-distribution report against the equilibrium proxy.
    Zeros(Common),
}

#[derive(Args, Debug)]
struct Common {
    /// Run configuration (JSON).
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// Output directory; created if missing.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Override a config value, e.g. `--set p=1 --set reference.n_ref=128`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Worker threads (default: available parallelism).
    #[arg(long, value_name = "N")]
    workers: Option<usize>,
}

enum Failure {
    Usage(String),
    Run(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Run(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Run(Error::Io(e))
    }
}

fn one_line(s: impl std::fmt::Display) -> String {
    s.to_string().split_whitespace().collect::<Vec<_>>().join(" ")
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let text = e.to_string();
            let first = text.lines().next().unwrap_or_default();
            eprintln!("error[usage]: {}", one_line(first.trim_start_matches("error: ")));
            return ExitCode::from(1);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error[usage]: {}", one_line(msg));
            ExitCode::from(1)
        }
        Err(Failure::Run(e)) => {
            eprintln!("error[{}]: {}", e.stage(), one_line(&e));
            ExitCode::from(if e.is_numerical() { 2 } else { 1 })
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    let (Command::Validate(common)
    | Command::Map(common)
    | Command::Rates(common)
    | Command::Zeros(common)) = &cli.command;
    if let Some(n) = common.workers {
        if n == 0 {
            return Err(Failure::Usage("--workers must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Usage(e.to_string()))?;
    }
    let config = RunConfig::load(&common.config, &common.overrides)?;
    let out = common.out.as_deref();
    match &cli.command {
        Command::Validate(_) => validate(&config, out),
        Command::Map(_) => map(&config, need_out(out)?),
        Command::Rates(_) => rates(&config, need_out(out)?),
        Command::Zeros(_) => zeros(&config, need_out(out)?),
    }
}

fn need_out(out: Option<&Path>) -> Result<&Path, Failure> {
    out.ok_or_else(|| Failure::Usage("this command needs --out DIR".into()))
}

fn prepare(out: &Path, config: &RunConfig) -> Result<(), Failure> {
    fs::create_dir_all(out)?;
    fs::write(out.join("config.json"), config.to_json()?)?;
    Ok(())
}

fn validate(config: &RunConfig, out: Option<&Path>) -> Result<(), Failure> {
    let rc = config.rate_config()?;
    let d = &rc.domain;
    let grid = build_grid_at(d, rc.resolution())?;
    let zeta = d.zeta();
    let ones = vec![C64::new(1.0, 0.0); grid.len()];
    let closed = grid.integrate(&ones, Measure::ComplexDz)?.norm();
    let inv: Vec<C64> = grid.points().iter().map(|z| 1.0 / (z - zeta)).collect();
    let residue = grid.integrate(&inv, Measure::ComplexDz)? - C64::new(0.0, std::f64::consts::TAU);
    let max_n = *rc.n_list.last().expect("validated");
    let gram = build_orthobasis(&grid, zeta, max_n)?.gram_residual();
    let corners: Vec<_> = d
        .corners()
        .iter()
        .map(|c| json!({"vertex": [c.vertex.re, c.vertex.im], "lambda": c.lambda}))
        .collect();
    let report = json!({
        "domain": d.name(),
        "arcs": d.arc_count(),
        "corners": corners,
        "min_exterior_angle": d.min_exterior_angle(),
        "signed_area": d.signed_area(),
        "winding_number_at_zeta": d.winding_number(zeta),
        "perimeter": grid.length(),
        "nodes": grid.len(),
        "cauchy_dz": closed,
        "cauchy_residue_error": residue.norm(),
        "gram_residual": gram,
        "gram_degree": max_n,
    });
    println!("domain            {}", d.name());
    println!("arcs              {}", d.arc_count());
    for c in d.corners() {
        println!("corner            ({}, {}) lambda = {}", c.vertex.re, c.vertex.im, c.lambda);
    }
    println!("signed area       {}", d.signed_area());
    println!("winding at zeta   {}", d.winding_number(zeta));
    println!("perimeter         {}", grid.length());
    println!("nodes             {}", grid.len());
    println!("|∮ dz|            {closed:e}");
    println!("|∮ dz/(z-ζ) - 2πi| {:e}", residue.norm());
    println!("gram residual     {gram:e} (n = {max_n})");
    if let Some(out) = out {
        prepare(out, config)?;
        fs::write(
            out.join("validate.json"),
            serde_json::to_string_pretty(&report).map_err(Error::from)? + "\n",
        )?;
    }
    Ok(())
}

fn map(config: &RunConfig, out: &Path) -> Result<(), Failure> {
    let rc = config.rate_config()?;
    let n = config.map_degree()?;
    let reference = Reference::build(&rc.domain, rc.reference)?;
    let rep = run_map(&rc, &reference, n)?;
    prepare(out, config)?;
    fs::write(out.join("boundary.csv"), MapReport::samples_csv(&rep.boundary))?;
    fs::write(out.join("interior.csv"), MapReport::samples_csv(&rep.interior))?;
    fs::write(
        out.join("map.json"),
        serde_json::to_string_pretty(&rep).map_err(Error::from)? + "\n",
    )?;
    println!(
        "{} n = {} p = {}: ‖target - Q̃‖_p = {:e}, boundary |φ - J̃| = {:e}, interior |φ - J̃| = {:e}",
        rep.domain, rep.n, rep.p, rep.achieved_norm, rep.boundary_error, rep.interior_error
    );
    Ok(())
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "-".into(), |x| format!("{x:.3e}"))
}

fn rates(config: &RunConfig, out: &Path) -> Result<(), Failure> {
    let rc = config.rate_config()?;
    let reference = Reference::build(&rc.domain, rc.reference)?;
    let rep = run_rate_sweep_with(&rc, &reference)?;
    prepare(out, config)?;
    fs::write(out.join("rates.csv"), rep.to_csv())?;
    fs::write(out.join("summary.json"), rep.to_json()?)?;
    fs::write(out.join("rates.svg"), rep.to_svg())?;
    println!("{:>5} {:>10} {:>10} {:>10} {:>8} {:>8}", "n", "err_p", "err_sup", "bound12", "lead", "gap");
    for r in &rep.rows {
        println!(
            "{:>5} {:>10.3e} {:>10} {:>10} {:>8} {:>8}",
            r.n,
            r.err_p,
            opt(r.err_sup),
            opt(r.bound12),
            r.lead_coeff_scaled.map_or_else(|| "-".into(), |x| format!("{x:.4}")),
            r.zero_moment_gap.map_or_else(|| "-".into(), |x| format!("{x:.4}")),
        );
    }
    println!("predicted: {}", rep.predicted.description);
    if let Some(f) = &rep.power_fit {
        println!("power law: exponent {:.4} ± {:.4}", f.exponent, f.exponent_stderr);
    }
    if let Some(f) = &rep.stretched_fit {
        println!(
            "stretched: q = {:.4}, r = {}, rss {:.3e} vs power {:.3e} -> {:?}",
            f.q, f.r, f.goodness, f.power_law_goodness, f.preferred
        );
    }
    if !rep.bound_violations.is_empty() {
        println!("sup bound exceeded at n = {:?}", rep.bound_violations);
    }
    for a in &rep.annotations {
        println!("note: {a}");
    }
    Ok(())
}

fn zeros(config: &RunConfig, out: &Path) -> Result<(), Failure> {
    let rc = config.rate_config()?;
    let reference = Reference::build(&rc.domain, rc.reference)?;
    let rep = run_zero_sweep(&rc, &reference)?;
    prepare(out, config)?;
    let mut csv = String::from("n,gap,max_residual,conjectural_gap\n");
    for r in &rep.rows {
        csv.push_str(&format!(
            "{},{:e},{:e},{}\n",
            r.n,
            r.tilde.gap,
            r.tilde.max_residual,
            r.conjectural.as_ref().map(|c| format!("{:e}", c.gap)).unwrap_or_default()
        ));
    }
    fs::write(out.join("zeros.csv"), csv)?;
    fs::write(
        out.join("zeros.json"),
        serde_json::to_string_pretty(&rep).map_err(Error::from)? + "\n",
    )?;
    for r in &rep.rows {
        print!("n = {:>3}  gap {:.4}", r.n, r.tilde.gap);
        if let Some(c) = &r.conjectural {
            print!("  conjectural (minimal-norm) gap {:.4}", c.gap);
        }
        println!();
    }
    if let Some((n, g)) = rep.best {
        println!("best gap {g:.4} at n = {n}");
    }
    Ok(())
}
