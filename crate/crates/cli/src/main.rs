use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use blayer::engine::DEFAULT_TOL_MEMBER;
use blayer::gas::{DEFAULT_TOL_A, DEFAULT_TOL_M};
use blayer::{
    portrait_svg, sweep, verify_decay, verify_residual, write_sweep_csv, EndState, Engine,
    GasParams, PortraitOptions, RegimeKind, SweepSpec, Tolerances,
};
use clap::{Args, Parser, Subcommand};

mod config;

use config::{ConfigError, Format, RunConfig};

/// Existence classifier and profile tracer for inflow boundary layers.
#[derive(Debug, Parser)]
#[command(name = "blayer", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Decide whether a boundary layer exists; prints the verdict as JSON.
    Classify,
    /// Trace the existence curves of the far-field state.
    Trace,
    /// Decide, then compute and verify the layer profile.
    Profile,
    /// Render the phase portrait as SVG.
    Portrait {
        /// Generic trajectories per axis.
        #[arg(long)]
        grid: Option<usize>,
        /// ξ length of each generic trajectory.
        #[arg(long)]
        span: Option<f64>,
    },
    /// Tabulate regime and spectrum over a grid of far-field Mach numbers.
    Sweep {
        #[arg(long = "mach-min")]
        mach_min: Option<f64>,
        #[arg(long = "mach-max")]
        mach_max: Option<f64>,
        #[arg(long)]
        points: Option<usize>,
    },
}

#[derive(Debug, Args)]
struct Common {
    /// Key-value config file; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    gamma: Option<f64>,
    #[arg(long = "R", global = true)]
    r: Option<f64>,
    #[arg(long, global = true)]
    mu: Option<f64>,
    #[arg(long, global = true)]
    kappa: Option<f64>,
    #[arg(long = "v-minus", global = true, allow_negative_numbers = true)]
    v_minus: Option<f64>,
    #[arg(long = "u-minus", global = true, allow_negative_numbers = true)]
    u_minus: Option<f64>,
    #[arg(long = "theta-minus", global = true, allow_negative_numbers = true)]
    theta_minus: Option<f64>,
    #[arg(long = "v-plus", global = true, allow_negative_numbers = true)]
    v_plus: Option<f64>,
    #[arg(long = "u-plus", global = true, allow_negative_numbers = true)]
    u_plus: Option<f64>,
    #[arg(long = "theta-plus", global = true, allow_negative_numbers = true)]
    theta_plus: Option<f64>,
    #[arg(long = "tol-member", global = true)]
    tol_member: Option<f64>,
    #[arg(long = "tol-a", global = true)]
    tol_a: Option<f64>,
    #[arg(long = "tol-m", global = true)]
    tol_m: Option<f64>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
}

#[derive(Debug)]
enum Failure {
    Config(ConfigError),
    Core(blayer::Error),
    Io(String),
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Config(e) => write!(f, "config: {e}"),
            Failure::Core(e) => write!(f, "{}: {e}", e.kind()),
            Failure::Io(e) => write!(f, "io: {e}"),
        }
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e)
    }
}

impl From<blayer::Error> for Failure {
    fn from(e: blayer::Error) -> Self {
        Failure::Core(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

type Outcome = Result<ExitCode, Failure>;

const EXISTS: u8 = 0;
const NOT_EXISTS: u8 = 2;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> Outcome {
    let c = &cli.common;
    let file = match &c.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    let mut flags = RunConfig {
        gamma: c.gamma,
        r: c.r,
        mu: c.mu,
        kappa: c.kappa,
        v_minus: c.v_minus,
        u_minus: c.u_minus,
        theta_minus: c.theta_minus,
        v_plus: c.v_plus,
        u_plus: c.u_plus,
        theta_plus: c.theta_plus,
        tol_member: c.tol_member,
        tol_a: c.tol_a,
        tol_m: c.tol_m,
        out: c.out.clone(),
        format: c.format,
        ..Default::default()
    };
    match &cli.command {
        Command::Portrait { grid, span } => {
            flags.grid = *grid;
            flags.span = *span;
        }
        Command::Sweep {
            mach_min,
            mach_max,
            points,
        } => {
            flags.mach_min = *mach_min;
            flags.mach_max = *mach_max;
            flags.points = *points;
        }
        _ => {}
    }
    let cfg = file.merge(flags);
    match cli.command {
        Command::Classify => classify(&cfg),
        Command::Trace => trace(&cfg),
        Command::Profile => profile(&cfg),
        Command::Portrait { .. } => portrait(&cfg),
        Command::Sweep { .. } => run_sweep(&cfg),
    }
}

fn gas(cfg: &RunConfig) -> Result<GasParams, Failure> {
    Ok(GasParams::new(
        cfg.gamma.unwrap_or(1.4),
        cfg.r.unwrap_or(1.0),
        cfg.mu.unwrap_or(1.0),
        cfg.kappa.unwrap_or(1.0),
    )?)
}

fn tolerances(cfg: &RunConfig) -> Tolerances {
    Tolerances {
        tol_a: cfg.tol_a.unwrap_or(DEFAULT_TOL_A),
        tol_m: cfg.tol_m.unwrap_or(DEFAULT_TOL_M),
        tol_member: cfg.tol_member.unwrap_or(DEFAULT_TOL_MEMBER),
    }
}

fn right(cfg: &RunConfig) -> Result<EndState, Failure> {
    Ok(EndState::new(
        cfg.v_plus.unwrap_or(1.0),
        cfg.require("u_plus", cfg.u_plus)?,
        cfg.theta_plus.unwrap_or(1.0),
    )?)
}

/// Missing `v_minus` is filled in from the mass-flux condition.
fn left(cfg: &RunConfig, right: &EndState) -> Result<EndState, Failure> {
    let u = cfg.require("u_minus", cfg.u_minus)?;
    let theta = cfg.require("theta_minus", cfg.theta_minus)?;
    let v = match cfg.v_minus {
        Some(v) => v,
        None if u > 0.0 && right.u() > 0.0 => u * right.v() / right.u(),
        None => 1.0,
    };
    Ok(EndState::new(v, u, theta)?)
}

fn out_dir(cfg: &RunConfig) -> Result<PathBuf, Failure> {
    let dir = cfg.out.clone().unwrap_or_else(|| PathBuf::from("."));
    fs::create_dir_all(&dir)?;
    Ok(dir)
}

fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn print_json(v: &serde_json::Value) {
    println!(
        "{}",
        serde_json::to_string_pretty(v).expect("json values serialize")
    );
}

fn classify(cfg: &RunConfig) -> Outcome {
    let r = right(cfg)?;
    let q = blayer::Query {
        gas: gas(cfg)?,
        left: left(cfg, &r)?,
        right: r,
        tol: tolerances(cfg),
    };
    let v = blayer::decide(&q)?;
    print_json(&v.to_json(None));
    Ok(ExitCode::from(if v.exists() { EXISTS } else { NOT_EXISTS }))
}

fn engine(cfg: &RunConfig) -> Result<Engine, Failure> {
    Ok(Engine::new(gas(cfg)?, right(cfg)?, tolerances(cfg))?)
}

fn trace(cfg: &RunConfig) -> Outcome {
    let e = engine(cfg)?;
    let dir = out_dir(cfg)?;
    let format = cfg.format.unwrap_or(Format::Csv);
    let mut curves = Vec::new();
    for &label in e.labels() {
        let c = e.curve(label)?;
        let name = label.as_str().to_ascii_lowercase();
        let mut meta = c.to_json();
        let path = match format {
            Format::Csv => {
                let p = dir.join(format!("{name}.csv"));
                c.write_csv(create(&p)?)?;
                p
            }
            Format::Json => {
                let p = dir.join(format!("{name}.json"));
                let mut full = meta.clone();
                full["points"] =
                    serde_json::json!(c.samples.iter().map(|s| [s.u, s.theta]).collect::<Vec<_>>());
                serde_json::to_writer_pretty(create(&p)?, &full)
                    .map_err(|e| Failure::Io(e.to_string()))?;
                p
            }
        };
        meta["file"] = serde_json::json!(path.display().to_string());
        curves.push(meta);
    }
    print_json(&serde_json::json!({
        "regime": e.regime().tag.as_str(),
        "mach_plus": e.regime().mach_plus,
        "curves": curves,
    }));
    Ok(ExitCode::from(if curves.is_empty() {
        NOT_EXISTS
    } else {
        EXISTS
    }))
}

fn profile(cfg: &RunConfig) -> Outcome {
    let r = right(cfg)?;
    let l = left(cfg, &r)?;
    let q = blayer::Query {
        gas: gas(cfg)?,
        left: l,
        right: r,
        tol: tolerances(cfg),
    };
    let v = blayer::decide(&q)?;
    if !v.exists() {
        print_json(&v.to_json(None));
        return Ok(ExitCode::from(NOT_EXISTS));
    }
    let e = Engine::new(q.gas, q.right, q.tol)?;
    let p = e.compute_profile(&l, &v)?;
    let decay = verify_decay(&p)?;
    let dir = out_dir(cfg)?;
    let path = match cfg.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            let path = dir.join("profile.csv");
            p.write_csv(create(&path)?)?;
            path
        }
        Format::Json => {
            let path = dir.join("profile.json");
            let body = serde_json::json!({
                "xi": p.xi, "V": p.v, "U": p.u, "Theta": p.theta,
            });
            serde_json::to_writer(create(&path)?, &body).map_err(|e| Failure::Io(e.to_string()))?;
            path
        }
    };
    let mut out = v.to_json(Some(&decay));
    out["profile"] = serde_json::json!({
        "file": path.display().to_string(),
        "samples": p.len(),
        "monotone_ok": p.monotone_ok(),
        "residual_sup": verify_residual(&p, e.system()),
        "endpoint_distance": p.endpoint_distance(),
        "start_mismatch": p.start_mismatch,
    });
    print_json(&out);
    Ok(ExitCode::from(EXISTS))
}

fn portrait(cfg: &RunConfig) -> Outcome {
    let e = engine(cfg)?;
    if e.regime().tag == RegimeKind::Supersonic {
        eprintln!(
            "no existence curves for a supersonic far field (M+ = {})",
            e.regime().mach_plus
        );
        return Ok(ExitCode::from(NOT_EXISTS));
    }
    let defaults = PortraitOptions::default();
    let opts = PortraitOptions {
        grid: cfg.grid.unwrap_or(defaults.grid),
        trajectory_span: cfg.span.unwrap_or(defaults.trajectory_span),
        ..defaults
    };
    let svg = portrait_svg(&e, &opts)?;
    let path = out_dir(cfg)?.join("portrait.svg");
    fs::write(&path, svg).map_err(|err| Failure::Io(format!("{}: {err}", path.display())))?;
    println!("{}", path.display());
    Ok(ExitCode::from(EXISTS))
}

fn run_sweep(cfg: &RunConfig) -> Outcome {
    let spec = SweepSpec {
        gas: gas(cfg)?,
        v_plus: cfg.v_plus.unwrap_or(1.0),
        theta_plus: cfg.theta_plus.unwrap_or(1.0),
        mach_min: cfg.require("mach_min", cfg.mach_min)?,
        mach_max: cfg.require("mach_max", cfg.mach_max)?,
        points: cfg.points.unwrap_or(200),
        tol_m: cfg.tol_m.unwrap_or(DEFAULT_TOL_M),
        trace: true,
    };
    let rows = sweep(&spec)?;
    let path = out_dir(cfg)?.join("sweep.csv");
    write_sweep_csv(&rows, create(&path)?)?;
    println!("{}", path.display());
    Ok(ExitCode::from(EXISTS))
}
