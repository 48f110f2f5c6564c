//! `isturm`: forward spectral data, inversion and round-trip checks for
//! Sturm–Liouville problems with polynomial boundary conditions.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use isturm::forward::{spectral_data, Forward};
use isturm::grid::GridFunction;
use isturm::json::{read_json, reconstruction_value, write_canonical, ProblemFile};
use isturm::model::ModelData;
use isturm::reconstruct::{invert, ContourChoice, InvertOptions, Reconstruction};
use isturm::regular::{gibbs_smoothing, invert_regular, sigma_to_q, weyl_m1, RegularOptions, RegularResult};
use isturm::roots::aberth;
use isturm::spectral::SpectralData;
use isturm::{Complex64, Error, FullProblem, Polynomial, SigmaFunction};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

#[derive(Parser, Debug)]
#[command(name = "isturm", version, about = "Forward and inverse Sturm-Liouville problems solved through the main equation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug, Default)]
struct Common {
    /// TOML file with defaults for the flags below.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Truncation index K.
    #[arg(long = "K", global = true)]
    k: Option<usize>,
    /// Number of x grid points on [0, π].
    #[arg(long = "nx", global = true)]
    nx: Option<usize>,
    /// Contour index N, or "auto".
    #[arg(long = "N", global = true)]
    n: Option<String>,
    /// Use the regular-potential pipeline (input must carry p1 and p2).
    #[arg(long, global = true)]
    regular: bool,
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Diagnostics file, written even when the command fails.
    #[arg(long, global = true)]
    diag: Option<PathBuf>,
    /// Worker threads; falls back to ISTURM_THREADS.
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// problem.json → spectral_data.json
    Forward { input: PathBuf },
    /// spectral_data.json (or problem.json with --regular) → reconstruction.json
    Invert { input: PathBuf },
    /// problem.json → forward, invert and compare
    Roundtrip { input: PathBuf },
    /// Spectral data of the model problem L(0, λ^M1, 0).
    Model {
        #[arg(long = "M1", default_value_t = 0)]
        m1: usize,
    },
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    #[serde(rename = "K")]
    k: Option<usize>,
    nx: Option<usize>,
    #[serde(rename = "N")]
    n: Option<toml::Value>,
    regular: Option<bool>,
    out: Option<PathBuf>,
    diag: Option<PathBuf>,
    threads: Option<usize>,
    #[serde(default)]
    tolerances: Tolerances,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct Tolerances {
    sigma_l2: f64,
    coeff: f64,
    q_max: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            sigma_l2: 0.1,
            coeff: 5e-3,
            q_max: 5e-2,
        }
    }
}

/// Flags merged over the config file.
#[derive(Debug, Clone)]
struct RunConfig {
    k: Option<usize>,
    nx: usize,
    contour: ContourChoice,
    regular: bool,
    out: Option<PathBuf>,
    diag: Option<PathBuf>,
    threads: Option<usize>,
    tolerances: Tolerances,
}

const DEFAULT_K: usize = 60;
const DEFAULT_NX: usize = 512;

struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::CountMismatch { .. } => 2,
            Error::Io(_) => 3,
            Error::AmbiguousOffset(_) => 4,
            Error::Singular { .. } => 5,
            Error::FitResidualTooLarge { .. } => 6,
            _ => 1,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn usage(message: String) -> Failure {
    Failure { code: 1, message }
}

fn parse_contour(s: &str) -> Result<ContourChoice, Failure> {
    if s == "auto" {
        return Ok(ContourChoice::Auto);
    }
    s.parse()
        .map(ContourChoice::Fixed)
        .map_err(|_| usage(format!("--N expects an integer or \"auto\", got {s:?}")))
}

fn resolve(common: &Common) -> Result<RunConfig, Failure> {
    let file: FileConfig = match &common.config {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| Failure::from(Error::Io(format!("{}: {e}", p.display()))))?;
            toml::from_str(&text).map_err(|e| Failure::from(Error::Io(format!("{}: {e}", p.display()))))?
        }
        None => FileConfig::default(),
    };
    let contour = match (&common.n, &file.n) {
        (Some(s), _) => parse_contour(s)?,
        (None, Some(toml::Value::Integer(n))) if *n >= 0 => ContourChoice::Fixed(*n as usize),
        (None, Some(toml::Value::String(s))) => parse_contour(s)?,
        (None, Some(v)) => return Err(usage(format!("N in the config must be an integer or \"auto\", got {v}"))),
        (None, None) => ContourChoice::Auto,
    };
    let threads = common.threads.or(file.threads).or_else(|| {
        std::env::var("ISTURM_THREADS").ok().and_then(|v| v.parse().ok())
    });
    let cfg = RunConfig {
        k: common.k.or(file.k),
        nx: common.nx.or(file.nx).unwrap_or(DEFAULT_NX),
        contour,
        regular: common.regular || file.regular.unwrap_or(false),
        out: common.out.clone().or(file.out),
        diag: common.diag.clone().or(file.diag),
        threads,
        tolerances: file.tolerances,
    };
    if cfg.nx < 33 {
        return Err(usage(format!("n_x = {} is below 33", cfg.nx)));
    }
    if let (Some(k), ContourChoice::Fixed(n)) = (cfg.k, cfg.contour) {
        if k < n + 2 {
            return Err(usage(format!("K = {k} must be at least N + 2 = {}", n + 2)));
        }
    }
    Ok(cfg)
}

fn invert_options(cfg: &RunConfig) -> InvertOptions {
    InvertOptions {
        k: cfg.k,
        n_x: cfg.nx,
        contour: cfg.contour,
        ..Default::default()
    }
}

fn out_path(cfg: &RunConfig, default: &str) -> PathBuf {
    cfg.out.clone().unwrap_or_else(|| PathBuf::from(default))
}

fn diag_path(cfg: &RunConfig, out: &Path) -> PathBuf {
    cfg.diag.clone().unwrap_or_else(|| {
        let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        out.with_file_name(format!("{stem}.diag.json"))
    })
}

/// Writes diagnostics whatever the outcome of `body`.
fn with_diagnostics<F>(cfg: &RunConfig, command: &str, out: &Path, body: F) -> Result<(), Failure>
where
    F: FnOnce(&mut Value) -> Result<(), Failure>,
{
    let start = Instant::now();
    let mut diag = json!({ "command": command, "K": cfg.k, "nx": cfg.nx });
    let result = body(&mut diag);
    diag["seconds"] = json!(start.elapsed().as_secs_f64());
    match &result {
        Ok(()) => diag["status"] = json!("ok"),
        Err(f) => {
            diag["status"] = json!("error");
            diag["error"] = json!(f.message);
            diag["exit_code"] = json!(f.code);
        }
    }
    let path = diag_path(cfg, out);
    if let Err(e) = write_canonical(&path, &diag) {
        log::error!("could not write diagnostics to {}: {e}", path.display());
        if result.is_ok() {
            return Err(e.into());
        }
    }
    result
}

fn forward_data(pf: &ProblemFile, k: usize, nx: usize) -> Result<SpectralData, Error> {
    let prob = pf.problem()?;
    let eigs = spectral_data(&prob, k, nx)?;
    Ok(SpectralData {
        m1: prob.m1,
        case: prob.case,
        eigs,
    })
}

fn cmd_forward(cfg: &RunConfig, input: &Path) -> Result<(), Failure> {
    let out = out_path(cfg, "spectral_data.json");
    with_diagnostics(cfg, "forward", &out, |diag| {
        let pf: ProblemFile = read_json(input)?;
        let k = cfg.k.unwrap_or(DEFAULT_K);
        let sd = forward_data(&pf, k, cfg.nx)?;
        diag["M1"] = json!(sd.m1);
        diag["records"] = json!(sd.eigs.len());
        write_canonical(&out, &sd)?;
        Ok(())
    })
}

fn cmd_model(cfg: &RunConfig, m1: usize) -> Result<(), Failure> {
    let out = out_path(cfg, "spectral_data.json");
    with_diagnostics(cfg, "model", &out, |_| {
        let k = cfg.k.unwrap_or(DEFAULT_K);
        write_canonical(&out, &ModelData::new(m1).spectral_data(k))?;
        Ok(())
    })
}

/// The regular pipeline driven by `M¹` of the problem in `pf`.
fn regular_inversion(cfg: &RunConfig, pf: &ProblemFile) -> Result<RegularResult, Error> {
    let full: FullProblem = pf
        .full()?
        .ok_or_else(|| Error::InvalidInput("--regular needs p1 and p2 in the problem file".into()))?;
    let zeros = if full.p2.degree() == 0 { Vec::new() } else { aberth(&full.p2) };
    let k = cfg.k.unwrap_or(DEFAULT_K);
    let fwd = Forward::new(&full.inner, cfg.nx.max(1024))?;
    let approx: Vec<(Complex64, usize)> = fwd
        .eigenvalues(k)?
        .iter()
        .map(|e| (e.lambda, e.multiplicity))
        .collect();
    let m1_fn = |l: Complex64| weyl_m1(&fwd, &full.p1, &full.p2, l);
    let mut opts = RegularOptions {
        invert: invert_options(cfg),
        ..Default::default()
    };
    opts.smoothing = gibbs_smoothing(k, cfg.nx);
    invert_regular(m1_fn, &full.p1, &zeros, &approx, &opts)
}

fn record_reconstruction(diag: &mut Value, rec: &Reconstruction) {
    diag["reconstruction"] = serde_json::to_value(&rec.diagnostics).unwrap_or(Value::Null);
}

fn cmd_invert(cfg: &RunConfig, input: &Path) -> Result<(), Failure> {
    let out = out_path(cfg, "reconstruction.json");
    with_diagnostics(cfg, "invert", &out, |diag| {
        let doc = if cfg.regular {
            let pf: ProblemFile = read_json(input)?;
            let res = regular_inversion(cfg, &pf)?;
            record_reconstruction(diag, &res.reconstruction);
            reconstruction_value(&res.reconstruction, Some(&res))?
        } else {
            let sd: SpectralData = read_json(input)?;
            let rec = invert(&sd, &invert_options(cfg))?;
            record_reconstruction(diag, &rec);
            reconstruction_value(&rec, None)?
        };
        write_canonical(&out, &doc)?;
        Ok(())
    })
}

/// `σ′` of the input, used as the reference `q` in regular round trips.
fn reference_q(sigma: &SigmaFunction, n: usize) -> Result<GridFunction, Error> {
    match sigma {
        SigmaFunction::PolynomialInX { coeffs } => {
            let d = Polynomial::new(coeffs.clone()).derivative();
            Ok(GridFunction::from_fn(n, |x| d.eval(Complex64::new(x, 0.0))))
        }
        SigmaFunction::Zero => Ok(GridFunction::from_fn(n, |_| Complex64::new(0.0, 0.0))),
        SigmaFunction::GridSamples { values } => {
            let g = GridFunction::new(values.clone());
            let q = SigmaFunction::GridSamples {
                values: sigma_to_q(&g, 0.0)?.q.values,
            };
            Ok(GridFunction::from_fn(n, |x| q.eval(x)))
        }
        SigmaFunction::Step { .. } => Err(Error::InvalidInput("a step potential has no regular q".into())),
    }
}

fn cmd_roundtrip(cfg: &RunConfig, input: &Path) -> Result<(), Failure> {
    let out = out_path(cfg, "roundtrip.json");
    let mut within = true;
    with_diagnostics(cfg, "roundtrip", &out, |diag| {
        let pf: ProblemFile = read_json(input)?;
        let prob = pf.problem()?;
        let tol = &cfg.tolerances;
        let t0 = Instant::now();
        let mut report = json!({ "tolerances": tol });
        if cfg.regular {
            let res = regular_inversion(cfg, &pf)?;
            let secs = t0.elapsed().as_secs_f64();
            let n = res.q.len();
            let q_ref = reference_q(&prob.sigma, n)?;
            // Endpoints carry the truncation layer; compare on the inner 90%.
            let q_err = (n / 20..n - n / 20)
                .map(|j| (res.q.values[j] - q_ref.values[j]).norm())
                .fold(0.0, f64::max);
            let full = pf.full()?.expect("checked by regular_inversion");
            let b_err = (res.summary.b_n2 - full.p2.leading()).norm() / full.p2.leading().norm();
            within = q_err < tol.q_max && b_err < 2e-2;
            record_reconstruction(diag, &res.reconstruction);
            report["q_max_error"] = json!(q_err);
            report["b_n2_relative_error"] = json!(b_err);
            report["seconds"] = json!(secs);
        } else {
            let sd = forward_data(&pf, cfg.k.unwrap_or(DEFAULT_K), cfg.nx)?;
            let t_fwd = t0.elapsed().as_secs_f64();
            let rec = invert(&sd, &invert_options(cfg))?;
            let t_inv = t0.elapsed().as_secs_f64() - t_fwd;
            let s_err = rec.sigma.l2_distance(|x| prob.sigma.eval(x));
            let r1_err = (&rec.r1 - &prob.r1).max_abs();
            let r2_err = (&rec.r2 - &prob.r2).max_abs();
            within = s_err < tol.sigma_l2 && r1_err < tol.coeff && r2_err < tol.coeff;
            record_reconstruction(diag, &rec);
            report["sigma_l2_error"] = json!(s_err);
            report["r1_max_error"] = json!(r1_err);
            report["r2_max_error"] = json!(r2_err);
            report["forward_seconds"] = json!(t_fwd);
            report["invert_seconds"] = json!(t_inv);
        }
        report["within_tolerances"] = json!(within);
        write_canonical(&out, &report)?;
        Ok(())
    })?;
    if within {
        Ok(())
    } else {
        Err(usage("round trip outside tolerances".into()))
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    let cfg = resolve(&cli.common)?;
    if let Some(n) = cfg.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| usage(format!("thread pool: {e}")))?;
    }
    match &cli.command {
        Command::Forward { input } => cmd_forward(&cfg, input),
        Command::Invert { input } => cmd_invert(&cfg, input),
        Command::Roundtrip { input } => cmd_roundtrip(&cfg, input),
        Command::Model { m1 } => cmd_model(&cfg, *m1),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
