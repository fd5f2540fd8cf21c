use std::collections::BTreeMap;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;

use decaylab_core::complex_maps::{DiskPoint, UnivalentMap};
use decaylab_core::curvature::{curvature_sample, sample_planes, CurvatureSample, FdSteps};
use decaylab_core::epstein::{surface_probe, EpsteinSample};
use decaylab_core::gluing::GluedMetricSpec;
use decaylab_core::hyperbolic_models::FermiPoint;
use decaylab_core::qc::{bound_report, BoundConstants, ConstantSource};
use decaylab_core::sweep::{
    fit_constants, read_sweep_csv, run_decay_sweep, summarize, write_outputs, SweepConfig,
};
use decaylab_core::verify::{verify_with, VerifyConfig};

const THREADS_VAR: &str = "DECAYLAB_THREADS";

#[derive(Parser)]
#[command(
    name = "decaylab",
    version,
    about = "Decay sweeps and bound checks for glued hyperbolic metrics"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sweep the gluing depth and fit decay exponents.
    DecaySweep(SweepArgs),
    /// One curvature sample of the glued metric at a point.
    CurvatureProbe(CurvatureArgs),
    /// Surface data over a grid of disk points and leaves.
    SurfaceProbe(SurfaceArgs),
    /// Assemble the bound chain from supplied or fitted constants.
    BoundCalculator(BoundArgs),
    /// Run the acceptance criteria.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct SweepArgs {
    /// Sweep config: a JSON file or inline JSON. Defaults apply when omitted.
    #[arg(long)]
    config: Option<String>,
    #[arg(long)]
    csv: Option<PathBuf>,
    #[arg(long)]
    json: Option<PathBuf>,
    #[arg(long)]
    svg: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct CurvatureArgs {
    /// Glued metric spec, JSON file or inline, e.g. {"map":{"kind":"koebe"},"n":3}.
    #[arg(long)]
    spec: String,
    /// Point as x,y,t.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    point: Vec<f64>,
    /// Finite-difference steps, JSON file or inline.
    #[arg(long)]
    fd: Option<String>,
    /// Random planes on top of the three coordinate planes.
    #[arg(long, default_value_t = 0)]
    planes: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Emit JSON instead of a CSV row.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct SurfaceArgs {
    /// Map, JSON file or inline, e.g. {"kind":"quadratic","a":[0.5,0.0]}.
    #[arg(long)]
    map: String,
    /// Leaves to sample.
    #[arg(long, value_delimiter = ',', default_value = "1,2,3")]
    t: Vec<f64>,
    /// Grid points per side of the square [-r, r]².
    #[arg(long, default_value_t = 5)]
    points: usize,
    #[arg(long, default_value_t = 0.5)]
    radius: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BoundArgs {
    #[arg(long)]
    d: f64,
    #[arg(long = "A4")]
    a4: Option<f64>,
    #[arg(long = "A5")]
    a5: Option<f64>,
    #[arg(long = "A6")]
    a6: Option<f64>,
    /// Fit the constants from a decay-sweep CSV instead.
    #[arg(long, conflicts_with_all = ["a4", "a5", "a6"])]
    fit_from: Option<PathBuf>,
    #[arg(long, default_value_t = 1.0)]
    tian_constant: f64,
    #[arg(long, default_value_t = 1.0)]
    tian_threshold: f64,
}

#[derive(Args)]
struct VerifyArgs {
    /// Verify config, JSON file or inline. Defaults apply when omitted.
    #[arg(long)]
    config: Option<String>,
    /// Where to write the JSON report; stdout otherwise.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Where to write the sweep CSV used by the sweep criteria.
    #[arg(long)]
    csv: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
}

/// Exit statuses: 0 pass, 1 criterion failure, 2 configuration error.
enum Outcome {
    Pass,
    Fail,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = configure_threads().and_then(|_| run(cli.command));
    match result {
        Ok(Outcome::Pass) => ExitCode::SUCCESS,
        Ok(Outcome::Fail) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn configure_threads() -> Result<()> {
    let Ok(raw) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .with_context(|| format!("{THREADS_VAR} must be a positive integer, got {raw:?}"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()?;
    Ok(())
}

fn run(cmd: Command) -> Result<Outcome> {
    match cmd {
        Command::DecaySweep(a) => decay_sweep(a),
        Command::CurvatureProbe(a) => curvature_probe(a),
        Command::SurfaceProbe(a) => surface(a),
        Command::BoundCalculator(a) => bound_calculator(a),
        Command::Verify(a) => verify(a),
    }
}

/// Text starting with `{` is parsed as JSON, anything else is a file path.
fn json_arg<T: DeserializeOwned>(arg: &str) -> Result<T> {
    let text = if arg.trim_start().starts_with('{') {
        arg.to_string()
    } else {
        fs::read_to_string(arg).with_context(|| format!("reading {arg}"))?
    };
    serde_json::from_str(&text).with_context(|| format!("parsing {arg}"))
}

fn config_text(arg: &Option<String>) -> Result<String> {
    Ok(match arg {
        None => "{}".into(),
        Some(a) if a.trim_start().starts_with('{') => a.clone(),
        Some(a) => fs::read_to_string(a).with_context(|| format!("reading {a}"))?,
    })
}

fn write_or_print(path: Option<&Path>, body: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, body).with_context(|| format!("writing {}", p.display())),
        None => {
            io::stdout().write_all(body.as_bytes())?;
            Ok(())
        }
    }
}

fn decay_sweep(a: SweepArgs) -> Result<Outcome> {
    let mut cfg = SweepConfig::from_json(&config_text(&a.config)?)?;
    cfg.output.csv = a.csv.or(cfg.output.csv);
    cfg.output.json = a.json.or(cfg.output.json);
    cfg.output.svg = a.svg.or(cfg.output.svg);
    if let Some(s) = a.seed {
        cfg.seed = s;
    }
    let res = run_decay_sweep(&cfg)?;
    write_outputs(&cfg, &res)?;
    if cfg.output.csv.is_none() {
        write_or_print(None, &res.to_csv()?)?;
    }
    for f in summarize(&cfg, &res).fits {
        match (f.fit, f.error) {
            (Some(fit), _) => {
                eprintln!("{:<18} slope {:+.4}  r2 {:.6}", f.metric, fit.slope, fit.r2)
            }
            (None, e) => eprintln!("{:<18} no fit: {}", f.metric, e.unwrap_or_default()),
        }
    }
    let failed = res.rows.iter().filter(|r| r.error.is_some()).count();
    if failed > 0 {
        eprintln!("{failed} sweep row(s) abandoned");
        return Ok(Outcome::Fail);
    }
    Ok(Outcome::Pass)
}

fn curvature_probe(a: CurvatureArgs) -> Result<Outcome> {
    let spec: GluedMetricSpec = json_arg(&a.spec)?;
    let steps: FdSteps = match &a.fd {
        Some(f) => json_arg(f)?,
        None => FdSteps::default(),
    };
    let [x, y, t] = a.point[..] else {
        bail!("--point takes three values x,y,t, got {}", a.point.len());
    };
    let c = [x, y, t];
    FermiPoint::from_coords(c)?;
    let planes = sample_planes(a.planes, a.seed);
    let sample = curvature_sample(&spec, c, &steps, &planes)?;
    let body = if a.json {
        serde_json::to_string_pretty(&sample)? + "\n"
    } else {
        format!(
            "{}\n{}\n",
            CurvatureSample::csv_header(),
            sample.to_csv_row()
        )
    };
    write_or_print(None, &body)?;
    Ok(Outcome::Pass)
}

fn surface(a: SurfaceArgs) -> Result<Outcome> {
    let map: UnivalentMap = json_arg(&a.map)?;
    if a.points < 1 {
        bail!("--points must be positive");
    }
    let step = if a.points == 1 {
        0.0
    } else {
        2.0 * a.radius / (a.points - 1) as f64
    };
    let mut zs = Vec::new();
    for i in 0..a.points {
        for j in 0..a.points {
            let (x, y) = (-a.radius + step * i as f64, -a.radius + step * j as f64);
            if a.points == 1 {
                zs.push(DiskPoint::origin());
            } else {
                zs.push(DiskPoint::from_xy(x, y)?);
            }
        }
    }
    let samples = surface_probe(&map, &zs, &a.t)?;
    let mut body = String::from(EpsteinSample::CSV_HEADER);
    body.push('\n');
    for s in &samples {
        body.push_str(&s.to_csv_row());
        body.push('\n');
    }
    write_or_print(a.out.as_deref(), &body)?;
    Ok(Outcome::Pass)
}

fn bound_calculator(a: BoundArgs) -> Result<Outcome> {
    let mut extra = BTreeMap::from([
        ("C_tian".to_string(), a.tian_constant),
        ("eps_tian".to_string(), a.tian_threshold),
    ]);
    let (constants, source) = match &a.fit_from {
        Some(path) => {
            let file =
                fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
            let fitted = fit_constants(&read_sweep_csv(file)?, a.tian_constant)?;
            extra.extend(fitted.as_map());
            (fitted.bound_constants(), ConstantSource::Fitted)
        }
        None => {
            let Some(a6) = a.a6 else {
                bail!("supply --A6 (with optional --A4, --A5) or --fit-from <csv>");
            };
            let a4 = a.a4.unwrap_or(a6);
            let a5 = a.a5.unwrap_or(a4.max(a6));
            (BoundConstants { a4, a5, a6 }, ConstantSource::Supplied)
        }
    };
    let report = bound_report(a.d, &constants, source, extra)?;
    write_or_print(None, &(serde_json::to_string_pretty(&report)? + "\n"))?;
    Ok(if report.chain_holds && report.skinning.consistent {
        Outcome::Pass
    } else {
        Outcome::Fail
    })
}

fn verify(a: VerifyArgs) -> Result<Outcome> {
    let mut cfg = VerifyConfig::from_json(&config_text(&a.config)?)?;
    if let Some(s) = a.seed {
        cfg.seed = s;
        cfg.sweep.seed = s;
    }
    let report = verify_with(&cfg, |c| eprintln!("{}", c.line()));
    if let (Some(path), Some(sweep)) = (&a.csv, &report.sweep) {
        fs::write(path, sweep.to_csv()?).with_context(|| format!("writing {}", path.display()))?;
    }
    if let Some(sweep) = &report.sweep {
        write_outputs(&cfg.sweep, sweep)?;
    }
    let mut body = serde_json::to_string_pretty(&report)?;
    body.push('\n');
    write_or_print(a.report.as_deref(), &body)?;
    Ok(if report.pass {
        Outcome::Pass
    } else {
        Outcome::Fail
    })
}
