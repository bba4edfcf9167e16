//! Command-line front end for the visibility-index estimators.
//!
//! Every subcommand emits CSV with a header row on standard output (or to
//! `--out`); diagnostics and progress go to standard error only.  Floats are
//! printed with 17 significant digits so replays compare byte-for-byte.
//! Exit codes: 0 success, 1 internal error, 2 bad arguments or shape file,
//! 3 soundness alarm (a proven inequality violated beyond four sigma).

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use visidx::billiard::{AngleMap, ReflectionLaw, Scene};
use visidx::bounds::{
    asymptotic_coefficient, cubic_bound_check, exit_uniformity_check, flux_mass_check,
    phase_volume_check, rotation_gap_check, rotation_mismatch_integral, rotation_mismatch_slope,
    transport_bound_check, unit_ball_volume, unit_sphere_area, visibility_bound_scan, BoundReport,
    Verdict,
};
use visidx::estimators::{estimate_f, AngleFunction, EstimatorConfig};
use visidx::geometry::{Body, VolumeConfig};
use visidx::sampling::{sample_incoming, StreamRng};
use visidx::search::{
    minimize_reduced_resistance, scan_family, scan_grid, Family, ScanRow, SearchConfig,
};
use visidx::Error;

#[derive(Parser)]
#[command(
    name = "visidx",
    version,
    about = "Visibility index and mean resistance of mirror bodies"
)]
struct Cli {
    /// Worker pool size; 1 is the determinism reference and larger pools
    /// produce byte-identical output.  Overrides VISIDX_THREADS.
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,

    /// Write the CSV to this file instead of standard output.
    #[arg(long, global = true, value_name = "FILE")]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate the visibility functional of one shape by Monte Carlo.
    Estimate(EstimateArgs),
    /// Run the soundness suite on one shape and report every bound check.
    Verify(VerifyArgs),
    /// Print the closed-form constant tables.
    Constants(ConstantsArgs),
    /// Evaluate a shape family on a parameter grid or at pinned volume fractions.
    Scan(ScanArgs),
    /// Minimize the normalized resistance over a shape family.
    Search(SearchArgs),
    /// Print the polyline of a single trajectory.
    Trace(TraceArgs),
}

#[derive(Args)]
struct EstimateArgs {
    /// Shape file (JSON, see shapes/ for the schema).
    #[arg(long, value_name = "FILE")]
    shape: PathBuf,
    /// Deviation weight: `one-minus-cos` or `power:<coeff>,<exponent>`.
    #[arg(long, default_value = "one-minus-cos")]
    f: String,
    /// Trajectory count.
    #[arg(long, default_value_t = 1_000_000)]
    n: u64,
    /// RNG seed; falls back to VISIDX_SEED, then 1.
    #[arg(long)]
    seed: Option<u64>,
    /// Sampling sphere radius; defaults to the shape's enclosing radius.
    #[arg(long)]
    radius: Option<f64>,
    /// Reflection law: specular, retro, negate, identity, or shift:<delta>.
    #[arg(long, default_value = "specular")]
    law: String,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, value_name = "FILE")]
    shape: PathBuf,
    /// Samples per check.
    #[arg(long, default_value_t = 1_000_000)]
    n: u64,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    radius: Option<f64>,
    #[arg(long, default_value = "specular")]
    law: String,
}

#[derive(Args)]
struct ConstantsArgs {
    /// Ambient dimension for the tables.
    #[arg(long, default_value_t = 3)]
    d: u32,
    /// Coefficient of the power-law weight entering the asymptotic constant.
    #[arg(long, default_value_t = 0.5)]
    c: f64,
    /// Exponent of the power-law weight entering the asymptotic constant.
    #[arg(long, default_value_t = 2.0)]
    kappa: f64,
}

#[derive(Args)]
struct ScanArgs {
    /// Family name: disc, concentric, ring:<k>, or slits:<m>.
    #[arg(long)]
    family: String,
    /// Comma-separated volume fractions to pin (mutually exclusive with --at).
    #[arg(long, value_name = "LIST")]
    kappa: Option<String>,
    /// Explicit parameter vector, comma-separated; repeat for a grid.
    #[arg(long, value_name = "PARAMS")]
    at: Vec<String>,
    /// Trajectories per evaluation.
    #[arg(long, default_value_t = 100_000)]
    n: u64,
    /// Sample count for Monte Carlo volumes (analytic families ignore it).
    #[arg(long)]
    volume_samples: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value = "specular")]
    law: String,
}

#[derive(Args)]
struct SearchArgs {
    /// Family name: disc, concentric, ring:<k>, or slits:<m>.
    #[arg(long)]
    family: String,
    /// Volume fraction to hold fixed; omit to search unconstrained.
    #[arg(long)]
    kappa: Option<f64>,
    /// Trajectories per evaluation.
    #[arg(long, default_value_t = 100_000)]
    n: u64,
    /// Evaluation budget.
    #[arg(long, default_value_t = 120)]
    budget: u64,
    /// Random simplex restarts.
    #[arg(long, default_value_t = 3)]
    restarts: u32,
    #[arg(long)]
    volume_samples: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value = "specular")]
    law: String,
}

#[derive(Args)]
struct TraceArgs {
    #[arg(long, value_name = "FILE")]
    shape: PathBuf,
    /// Which trajectory of the seeded stream to draw.
    #[arg(long, default_value_t = 0)]
    index: u64,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    radius: Option<f64>,
    #[arg(long, default_value = "specular")]
    law: String,
    #[arg(long, default_value_t = 10_000)]
    max_reflections: u32,
}

/// Finished run: the CSV to emit and the exit code to report.
struct Output {
    csv: String,
    code: u8,
}

impl Output {
    fn ok(csv: String) -> Output {
        Output { csv, code: 0 }
    }
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn args(message: impl Into<String>) -> Failure {
        Failure {
            code: 2,
            message: message.into(),
        }
    }

    fn internal(message: impl Into<String>) -> Failure {
        Failure {
            code: 1,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Failure {
        let code = match &e {
            Error::ShapeFile(_)
            | Error::Domain(_)
            | Error::InvalidBody(_)
            | Error::InvalidScene(_) => 2,
            Error::SoundnessAlarm(_) => 3,
            _ => 1,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(out) => {
            let mut stdout = std::io::stdout().lock();
            if stdout
                .write_all(out.csv.as_bytes())
                .and_then(|_| stdout.flush())
                .is_err()
            {
                return ExitCode::from(1);
            }
            ExitCode::from(out.code)
        }
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn run(cli: Cli) -> Result<Output, Failure> {
    setup_threads(cli.threads)?;
    let out = match cli.command {
        Command::Estimate(a) => cmd_estimate(a)?,
        Command::Verify(a) => cmd_verify(a)?,
        Command::Constants(a) => cmd_constants(a)?,
        Command::Scan(a) => cmd_scan(a)?,
        Command::Search(a) => cmd_search(a)?,
        Command::Trace(a) => cmd_trace(a)?,
    };
    let out = match cli.out {
        Some(path) => {
            std::fs::write(&path, &out.csv)
                .map_err(|e| Failure::internal(format!("writing {}: {e}", path.display())))?;
            Output {
                csv: String::new(),
                code: out.code,
            }
        }
        None => out,
    };
    Ok(out)
}

fn setup_threads(flag: Option<usize>) -> Result<(), Failure> {
    let n = match flag {
        Some(n) => Some(n),
        None => match std::env::var("VISIDX_THREADS") {
            Ok(v) => Some(v.trim().parse::<usize>().map_err(|_| {
                Failure::args(format!(
                    "VISIDX_THREADS must be a positive integer, got {v:?}"
                ))
            })?),
            Err(_) => None,
        },
    };
    if let Some(n) = n {
        if n == 0 {
            return Err(Failure::args("thread count must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::internal(format!("thread pool: {e}")))?;
    }
    Ok(())
}

fn resolve_seed(flag: Option<u64>) -> Result<u64, Failure> {
    if let Some(s) = flag {
        return Ok(s);
    }
    match std::env::var("VISIDX_SEED") {
        Ok(v) => v.trim().parse().map_err(|_| {
            Failure::args(format!(
                "VISIDX_SEED must be an unsigned integer, got {v:?}"
            ))
        }),
        Err(_) => Ok(1),
    }
}

/// 17 significant digits; round-trips every f64 and keeps output byte-stable.
fn num(x: f64) -> String {
    format!("{x:.16e}")
}

/// Commas and newlines would break the CSV framing.
fn csv_text(s: &str) -> String {
    s.replace(',', ";").replace('\n', " ")
}

fn build_id() -> &'static str {
    option_env!("VISIDX_BUILD_ID").unwrap_or(concat!("v", env!("CARGO_PKG_VERSION")))
}

fn parse_weight(spec: &str) -> visidx::Result<AngleFunction> {
    if spec == "one-minus-cos" {
        return Ok(AngleFunction::OneMinusCos);
    }
    if let Some(rest) = spec.strip_prefix("power:") {
        let parts: Vec<&str> = rest.split(',').collect();
        if parts.len() == 2 {
            let c = parse_num(parts[0], "power-law coefficient")?;
            let k = parse_num(parts[1], "power-law exponent")?;
            return AngleFunction::power_law(c, k);
        }
    }
    Err(Error::Domain(format!(
        "unknown weight {spec:?}; expected one-minus-cos or power:<coeff>,<exponent>"
    )))
}

fn parse_law(spec: &str) -> visidx::Result<ReflectionLaw> {
    match spec {
        "specular" => Ok(ReflectionLaw::Specular),
        "retro" => Ok(ReflectionLaw::Retro),
        "negate" => Ok(ReflectionLaw::PseudoBilliard2D(AngleMap::Negate)),
        "identity" => Ok(ReflectionLaw::PseudoBilliard2D(AngleMap::Identity)),
        _ => match spec.strip_prefix("shift:") {
            Some(rest) => {
                let delta = parse_num(rest, "shift delta")?;
                Ok(ReflectionLaw::PseudoBilliard2D(AngleMap::SinShift(delta)))
            }
            None => Err(Error::Domain(format!(
                "unknown law {spec:?}; expected specular, retro, negate, identity, or shift:<delta>"
            ))),
        },
    }
}

fn parse_num(s: &str, what: &str) -> visidx::Result<f64> {
    s.trim()
        .parse()
        .map_err(|_| Error::Domain(format!("{what} must be a number, got {s:?}")))
}

fn parse_list(s: &str) -> visidx::Result<Vec<f64>> {
    s.split(',').map(|p| parse_num(p, "list entry")).collect()
}

fn load_scene(path: &Path, law: ReflectionLaw, radius: Option<f64>) -> visidx::Result<Scene> {
    let body = Body::load(path)?;
    match radius {
        Some(r) => Scene::with_radius(body, law, r),
        None => Scene::new(body, law),
    }
}

fn shape_label(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "shape".into())
}

fn cmd_estimate(a: EstimateArgs) -> Result<Output, Failure> {
    let seed = resolve_seed(a.seed)?;
    let scene = load_scene(&a.shape, parse_law(&a.law)?, a.radius)?;
    let weight = parse_weight(&a.f)?;
    let cfg = EstimatorConfig::new(a.n, seed);
    let est = estimate_f(&scene, &weight, &cfg);
    let mut csv =
        String::from("mean,stderr,n_total,n_effective,trapped_fraction,discarded_fraction,seed\n");
    let _ = writeln!(
        csv,
        "{},{},{},{},{},{},{}",
        num(est.mean),
        num(est.stderr),
        est.n_total,
        est.n_effective,
        num(est.trapped_fraction),
        num(est.discarded_fraction),
        est.seed
    );
    Ok(Output::ok(csv))
}

fn cmd_verify(a: VerifyArgs) -> Result<Output, Failure> {
    let seed = resolve_seed(a.seed)?;
    let scene = load_scene(&a.shape, parse_law(&a.law)?, a.radius)?;
    let label = shape_label(&a.shape);
    let dim = scene.dim();
    let cfg = EstimatorConfig::new(a.n, seed);
    let volume = scene
        .body()
        .volume(&VolumeConfig::new(a.n, seed ^ 0x9e37_79b9));

    let mut reports = Vec::new();
    reports.push(flux_mass_check(dim, scene.sphere_radius(), a.n, seed));
    reports.push(phase_volume_check(&scene, &volume, &cfg));
    reports.push(transport_bound_check(&scene, &cfg));
    reports.push(exit_uniformity_check(&scene, &cfg));
    reports.push(cubic_bound_check(&label, &scene, &volume, &cfg)?);
    reports.extend(visibility_bound_scan(
        &[(label, scene.clone(), volume)],
        &AngleFunction::OneMinusCos,
        &cfg,
    )?);
    for phi0 in [0.5, 2.0] {
        reports.push(rotation_gap_check(dim, phi0, a.n.min(200_000), seed)?);
    }

    let mut csv =
        String::from("name,relation,lhs,lhs_stderr,rhs,margin_sigmas,verdict,note,seed\n");
    let mut violated = false;
    for r in &reports {
        violated |= r.verdict == Verdict::Violated;
        append_report(&mut csv, r, seed);
    }
    Ok(Output {
        csv,
        code: if violated { 3 } else { 0 },
    })
}

fn append_report(csv: &mut String, r: &BoundReport, seed: u64) {
    let _ = writeln!(
        csv,
        "{},{},{},{},{},{},{},{},{}",
        csv_text(&r.name),
        r.relation.symbol(),
        num(r.lhs),
        num(r.lhs_stderr),
        num(r.rhs),
        num(r.margin_sigmas),
        r.verdict.as_str(),
        csv_text(&r.note),
        seed
    );
}

fn cmd_constants(a: ConstantsArgs) -> Result<Output, Failure> {
    if a.d < 2 {
        return Err(Failure::args(format!(
            "--d must be at least 2, got {}",
            a.d
        )));
    }
    let mut csv = String::from("quantity,argument,value\n");
    for k in 0..=a.d {
        let _ = writeln!(csv, "sphere_area,{k},{}", num(unit_sphere_area(k)));
    }
    for k in 0..=a.d {
        let _ = writeln!(csv, "ball_volume,{k},{}", num(unit_ball_volume(k)));
    }
    let cd = asymptotic_coefficient(a.d, a.c, a.kappa)?;
    let _ = writeln!(
        csv,
        "asymptotic_coefficient,d={};c={};kappa={},{}",
        a.d,
        a.c,
        a.kappa,
        num(cd)
    );
    let _ = writeln!(
        csv,
        "mismatch_slope,{},{}",
        a.d,
        num(rotation_mismatch_slope(a.d)?)
    );
    for i in 0..=8u32 {
        let phi = std::f64::consts::PI * f64::from(i) / 8.0;
        let _ = writeln!(
            csv,
            "mismatch_integral,{},{}",
            num(phi),
            num(rotation_mismatch_integral(a.d, phi)?)
        );
    }
    Ok(Output::ok(csv))
}

fn scan_config(
    n: u64,
    seed: u64,
    volume_samples: Option<u64>,
    budget: u64,
    restarts: u32,
) -> SearchConfig {
    let mut cfg = SearchConfig::new(n, seed);
    if let Some(vs) = volume_samples {
        cfg.volume_samples = vs;
    }
    cfg.budget = budget;
    cfg.restarts = restarts;
    cfg
}

fn scan_header(family: &Family) -> String {
    let mut h = String::from("family,build,seed");
    for i in 0..family.param_count() {
        let _ = write!(h, ",p{i}");
    }
    h.push_str(
        ",kappa,kappa_stderr,f_hat,f_hat_stderr,floor,floor_margin_sigmas,cubic_bound,cubic_margin_sigmas,reliable,note\n",
    );
    h
}

fn append_scan_row(csv: &mut String, family: &Family, seed: u64, row: &ScanRow) {
    let _ = write!(csv, "{},{},{}", family.name(), build_id(), seed);
    for i in 0..family.param_count() {
        let p = row.params.get(i).copied().unwrap_or(f64::NAN);
        let _ = write!(csv, ",{}", num(p));
    }
    let _ = writeln!(
        csv,
        ",{},{},{},{},{},{},{},{},{},{}",
        num(row.kappa),
        num(row.kappa_stderr),
        num(row.f_hat),
        num(row.f_hat_stderr),
        num(row.floor),
        num(row.margin_sigmas),
        num(row.cubic_bound),
        num(row.cubic_margin_sigmas),
        row.reliable,
        csv_text(&row.note)
    );
}

fn cmd_scan(a: ScanArgs) -> Result<Output, Failure> {
    let seed = resolve_seed(a.seed)?;
    let family = Family::by_name(&a.family)?;
    let law = parse_law(&a.law)?;
    let cfg = scan_config(a.n, seed, a.volume_samples, 1, 0);
    let rows = match (&a.kappa, a.at.is_empty()) {
        (Some(list), true) => scan_family(&family, &law, &parse_list(list)?, &cfg)?,
        (None, false) => {
            let grid: visidx::Result<Vec<Vec<f64>>> = a.at.iter().map(|s| parse_list(s)).collect();
            scan_grid(&family, &law, &grid?, &cfg)?
        }
        _ => return Err(Failure::args("pass exactly one of --kappa or --at")),
    };
    let mut csv = scan_header(&family);
    for row in &rows {
        append_scan_row(&mut csv, &family, seed, row);
    }
    Ok(Output::ok(csv))
}

fn cmd_search(a: SearchArgs) -> Result<Output, Failure> {
    let seed = resolve_seed(a.seed)?;
    let family = Family::by_name(&a.family)?;
    let law = parse_law(&a.law)?;
    let cfg = scan_config(a.n, seed, a.volume_samples, a.budget, a.restarts);
    let out = minimize_reduced_resistance(&family, &law, a.kappa, &cfg)?;
    let mut csv = String::from("family,build,seed");
    for i in 0..family.param_count() {
        let _ = write!(csv, ",p{i}");
    }
    csv.push_str(",kappa,f_hat,f_hat_stderr,floor,margin_sigmas,evaluations,converged,note\n");
    let _ = write!(csv, "{},{},{}", family.name(), build_id(), seed);
    for i in 0..family.param_count() {
        let p = out.params.get(i).copied().unwrap_or(f64::NAN);
        let _ = write!(csv, ",{}", num(p));
    }
    let _ = writeln!(
        csv,
        ",{},{},{},{},{},{},{},{}",
        num(out.kappa),
        num(out.f_hat),
        num(out.f_hat_stderr),
        num(out.floor),
        num(out.margin_sigmas),
        out.evaluations,
        out.converged,
        csv_text(&out.note)
    );
    Ok(Output::ok(csv))
}

fn cmd_trace(a: TraceArgs) -> Result<Output, Failure> {
    let seed = resolve_seed(a.seed)?;
    let scene = load_scene(&a.shape, parse_law(&a.law)?, a.radius)?;
    let dim = scene.dim();
    let mut rng = StreamRng::new(seed).stream(a.index);
    let ps = sample_incoming(dim, scene.sphere_radius(), &mut rng);
    let start = scene.center() + ps.xi;
    let (path, outcome) = scene.trace_path(ps.v, start, a.max_reflections);
    let mut csv = String::from(match dim {
        visidx::Dim::Two => "x,y\n",
        visidx::Dim::Three => "x,y,z\n",
    });
    for p in &path {
        match dim {
            visidx::Dim::Two => {
                let _ = writeln!(csv, "{},{}", num(p.x), num(p.y));
            }
            visidx::Dim::Three => {
                let _ = writeln!(csv, "{},{},{}", num(p.x), num(p.y), num(p.z));
            }
        }
    }
    eprintln!(
        "trace seed={} index={} status={:?} reflections={} path_length={} exit_v=({})",
        seed,
        a.index,
        outcome.status,
        outcome.reflections,
        num(outcome.path_length),
        match dim {
            visidx::Dim::Two => format!("{}; {}", num(outcome.v_plus.x), num(outcome.v_plus.y)),
            visidx::Dim::Three => format!(
                "{}; {}; {}",
                num(outcome.v_plus.x),
                num(outcome.v_plus.y),
                num(outcome.v_plus.z)
            ),
        }
    );
    Ok(Output::ok(csv))
}
