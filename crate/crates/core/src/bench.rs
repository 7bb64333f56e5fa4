//! Experiment harness behind the `lcd` command: build an objective from a
//! LibSVM file, resolve `f*`, run methods, write traces, sweep over `λ`.

use std::fmt;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::{SystemTime, UNIX_EPOCH};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::{cache_key, load_libsvm, results_root, write_run, Dataset, FStarCache, FStarEntry, LabelMode, RunMetadata, RunRecord};
use crate::matrix::{Matrix, Vector};
use crate::objectives::{
    estimate_f_star, huber_lifted_sos_regression, huber_sq_regression, least_squares, logistic_lp, logistic_smoothness,
    pnorm_regression, quadratic_smoothness, ridge, Objective, RidgeCurvature,
};
use crate::solvers::{run, Method, SolverConfig, Status, Trace};
use crate::verify::{run_suites, VerifyOptions, VerifyReport};

/// `λ/L` for the three regularization levels of the logistic experiments.
pub const DEFAULT_LAMBDA_FRACTIONS: [f64; 3] = [1e-4, 1e-3 / 3.0, 1e-3];

/// `λ/L` for the ridge experiments.
pub const RIDGE_LAMBDA_FRACTIONS: [f64; 3] = [1e-3, 1e-2 / 3.0, 1e-2];

/// The default sweep grid of a task.
pub fn default_grid(task: Task) -> &'static [f64] {
    match task {
        Task::Ridge => &RIDGE_LAMBDA_FRACTIONS,
        _ => &DEFAULT_LAMBDA_FRACTIONS,
    }
}

/// Gap threshold reported as "iterations to tolerance" in summaries.
pub const SUMMARY_GAP: f64 = 1e-10;

pub mod exit {
    pub const SUCCESS: i32 = 0;
    pub const USAGE: i32 = 1;
    pub const DATA: i32 = 2;
    pub const FAILURE: i32 = 3;
}

/// Exit code for an error that aborted a command.
pub fn exit_code_for(err: &Error) -> i32 {
    match err {
        Error::Parse { .. } | Error::Io(_) | Error::EmptyDataset | Error::DimensionMismatch { .. } => exit::DATA,
        Error::InvalidParameter(_) | Error::NoExcess | Error::MissingFStar => exit::USAGE,
        _ => exit::FAILURE,
    }
}

macro_rules! kebab_enum {
    ($name:ident { $($variant:ident => $text:literal),+ $(,)? }) => {
        impl $name {
            pub fn name(self) -> &'static str {
                match self { $($name::$variant => $text),+ }
            }
        }
        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.name())
            }
        }
        impl FromStr for $name {
            type Err = Error;
            fn from_str(s: &str) -> Result<Self> {
                match s.trim() {
                    $($text => Ok($name::$variant),)+
                    other => Err(Error::InvalidParameter(format!(
                        concat!("unknown ", stringify!($name), " '{}' (expected one of: {})"),
                        other,
                        [$($text),+].join(", ")
                    ))),
                }
            }
        }
    };
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    Logistic,
    Ridge,
    LeastSquares,
    Huber,
    PnormRegression,
}

kebab_enum!(Task {
    Logistic => "logistic",
    Ridge => "ridge",
    LeastSquares => "least-squares",
    Huber => "huber",
    PnormRegression => "pnorm-regression",
});

impl Task {
    fn label_mode(self) -> LabelMode {
        match self {
            Task::Logistic => LabelMode::Classification,
            _ => LabelMode::Regression,
        }
    }

    fn default_curvature(self) -> CurvatureChoice {
        match self {
            Task::Logistic | Task::Ridge => CurvatureChoice::RegularizerOnly,
            Task::LeastSquares => CurvatureChoice::FullQuadratic,
            Task::Huber | Task::PnormRegression => CurvatureChoice::Coordinatewise,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CurvatureChoice {
    /// `C` from the regularizer alone (logistic, ridge).
    RegularizerOnly,
    /// `C = (2/n)AᵀA` (ridge, least squares).
    FullQuadratic,
    /// Sum-of-squares map on the lifted Huber objective.
    AbsConvexSos,
    /// Coordinatewise map precomposed with the residual (Huber², p-norm).
    Coordinatewise,
    /// Rank-one `‖·‖_p²` map precomposed with the residual.
    RankOne,
}

kebab_enum!(CurvatureChoice {
    RegularizerOnly => "regularizer-only",
    FullQuadratic => "full-quadratic",
    AbsConvexSos => "abs-convex-sos",
    Coordinatewise => "coordinatewise",
    RankOne => "rank-one",
});

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "kebab-case")]
pub enum LambdaSpec {
    Absolute(f64),
    /// `λ = frac · L` with `L` the smoothness constant of the data term.
    FracOfL(f64),
}

impl LambdaSpec {
    pub fn resolve(self, l: f64) -> f64 {
        match self {
            LambdaSpec::Absolute(v) => v,
            LambdaSpec::FracOfL(frac) => frac * l,
        }
    }

    fn label(self) -> String {
        match self {
            LambdaSpec::Absolute(v) => format!("abs{v:e}"),
            LambdaSpec::FracOfL(f) => format!("frac{f:e}"),
        }
    }
}

/// A method as requested on the command line; bare `gd` means step `1/L`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "method", rename_all = "kebab-case")]
pub enum MethodChoice {
    Fixed(Method),
    GdInverseL,
}

impl MethodChoice {
    fn resolve(self, l: Option<f64>) -> Result<Method> {
        match self {
            MethodChoice::Fixed(m) => Ok(m),
            MethodChoice::GdInverseL => {
                let l = l.ok_or_else(|| Error::InvalidParameter("gd needs a smoothness constant; give gd(step)".into()))?;
                Ok(Method::Gd { step: 1.0 / l })
            }
        }
    }
}

impl FromStr for MethodChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.trim().eq_ignore_ascii_case("gd") {
            Ok(MethodChoice::GdInverseL)
        } else {
            s.parse().map(MethodChoice::Fixed)
        }
    }
}

impl fmt::Display for MethodChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MethodChoice::Fixed(m) => write!(f, "{m}"),
            MethodChoice::GdInverseL => f.write_str("gd"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StartPoint {
    Zeros,
    /// Uniform on `[−1, 1]^d` from the spec's seed.
    Random,
}

kebab_enum!(StartPoint {
    Zeros => "zeros",
    Random => "random",
});

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub dataset: PathBuf,
    pub task: Task,
    pub lambda: Option<LambdaSpec>,
    pub p: Option<f64>,
    pub delta: Option<f64>,
    pub methods: Vec<MethodChoice>,
    pub curvature: Option<CurvatureChoice>,
    pub max_iters: usize,
    pub time_budget_s: Option<f64>,
    pub f_tol: Option<f64>,
    pub g_tol: Option<f64>,
    /// Overrides the model's `L_C` for LCD1.
    pub lc: Option<f64>,
    pub out: PathBuf,
    pub seed: u64,
    pub x0: StartPoint,
    pub scale_features: bool,
    /// Root of the `f*` cache; `None` uses [`results_root`].
    pub cache_root: Option<PathBuf>,
    pub fstar_budget: usize,
}

impl ExperimentSpec {
    pub fn new(dataset: impl Into<PathBuf>, task: Task, methods: Vec<MethodChoice>, out: impl Into<PathBuf>) -> Self {
        ExperimentSpec {
            dataset: dataset.into(),
            task,
            lambda: None,
            p: None,
            delta: None,
            methods,
            curvature: None,
            max_iters: 300,
            time_budget_s: None,
            f_tol: None,
            g_tol: None,
            lc: None,
            out: out.into(),
            seed: 0,
            x0: StartPoint::Zeros,
            scale_features: false,
            cache_root: None,
            fstar_budget: 200_000,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if self.methods.is_empty() {
            return bad("at least one method is required".into());
        }
        if let Some(l) = self.lambda {
            let v = match l {
                LambdaSpec::Absolute(v) | LambdaSpec::FracOfL(v) => v,
            };
            if !(v >= 0.0) || !v.is_finite() {
                return bad(format!("λ must be a finite non-negative number, got {v}"));
            }
        }
        if let Some(p) = self.p {
            let min = if self.task == Task::PnormRegression && self.curvature == Some(CurvatureChoice::RankOne) { 1.0 } else { 2.0 };
            if !(p >= min) || !p.is_finite() {
                return bad(format!("p must be ≥ {min}, got {p}"));
            }
        }
        if let Some(d) = self.delta {
            if !(d > 0.0) || !d.is_finite() {
                return bad(format!("δ must be positive, got {d}"));
            }
        }
        let curv = self.curvature();
        let allowed: &[CurvatureChoice] = match self.task {
            Task::Logistic => &[CurvatureChoice::RegularizerOnly],
            Task::Ridge => &[CurvatureChoice::RegularizerOnly, CurvatureChoice::FullQuadratic],
            Task::LeastSquares => &[CurvatureChoice::FullQuadratic],
            Task::Huber => &[CurvatureChoice::Coordinatewise, CurvatureChoice::AbsConvexSos],
            Task::PnormRegression => &[CurvatureChoice::Coordinatewise, CurvatureChoice::RankOne],
        };
        if !allowed.contains(&curv) {
            return bad(format!("curvature '{curv}' is not available for task '{}'", self.task));
        }
        if self.task == Task::Ridge && self.lambda.is_none() {
            return bad("ridge needs --lambda or --lambda-frac-of-L".into());
        }
        Ok(())
    }

    pub fn curvature(&self) -> CurvatureChoice {
        self.curvature.unwrap_or(self.task.default_curvature())
    }
}

/// The objective built from a spec, with the constants used to build it.
pub struct Problem {
    pub objective: Objective,
    pub data: Dataset,
    pub lambda: Option<f64>,
    pub l_smooth: Option<f64>,
    pub l_definition: Option<String>,
}

pub fn load_dataset(spec: &ExperimentSpec) -> Result<Dataset> {
    let mut data = load_libsvm(&spec.dataset, spec.task.label_mode())?;
    if spec.scale_features {
        data.min_max_scale();
    }
    Ok(data)
}

pub fn build_problem(spec: &ExperimentSpec, data: Dataset) -> Result<Problem> {
    spec.validate()?;
    let (a, b) = (&data.rows, &data.labels);
    let curv = spec.curvature();
    let (objective, lambda, l_smooth, l_def) = match spec.task {
        Task::Logistic => {
            let l = logistic_smoothness(a);
            let lam = spec.lambda.map_or(0.0, |s| s.resolve(l));
            let p = spec.p.unwrap_or(2.0);
            (logistic_lp(a, b, lam, p)?, Some(lam), Some(l), Some("λ_max(AᵀA)/(4n)"))
        }
        Task::Ridge => {
            let l = quadratic_smoothness(a);
            let lam = spec.lambda.expect("validated").resolve(l);
            let rc = if curv == CurvatureChoice::FullQuadratic { RidgeCurvature::FullQuadratic } else { RidgeCurvature::Regularizer };
            (ridge(a, b, lam, rc)?, Some(lam), Some(l), Some("λ_max((2/n)AᵀA)"))
        }
        Task::LeastSquares => (least_squares(a, b)?, None, Some(quadratic_smoothness(a)), Some("λ_max((2/n)AᵀA)")),
        Task::Huber => {
            let delta = spec.delta.unwrap_or(1.0);
            let obj = if curv == CurvatureChoice::AbsConvexSos {
                huber_lifted_sos_regression(a, b, delta)?
            } else {
                huber_sq_regression(a, b, delta)?
            };
            (obj, None, None, None)
        }
        Task::PnormRegression => {
            let p = spec.p.unwrap_or(3.0);
            (pnorm_regression(a, b, p, curv == CurvatureChoice::RankOne)?, None, None, None)
        }
    };
    Ok(Problem {
        objective,
        data,
        lambda,
        l_smooth,
        l_definition: l_def.map(String::from),
    })
}

pub fn start_point(spec: &ExperimentSpec, d: usize) -> Vector {
    match spec.x0 {
        StartPoint::Zeros => Vector::zeros(d),
        StartPoint::Random => {
            let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
            Vector::from_fn(d, |_, _| rng.random_range(-1.0..=1.0))
        }
    }
}

fn cache_key_for(spec: &ExperimentSpec, problem: &Problem) -> String {
    let lam = problem.lambda.map_or("none".into(), |l| format!("{:016x}", l.to_bits()));
    let p = spec.p.map_or("none".into(), |p| format!("{p:e}"));
    let delta = spec.delta.unwrap_or(1.0);
    // the lifted Huber objective differs from Huber² by its shift
    let variant = match (spec.task, spec.curvature()) {
        (Task::Huber, CurvatureChoice::AbsConvexSos) => "lifted",
        _ => "plain",
    };
    cache_key(&[
        "fstar-v1",
        &problem.data.content_hash(),
        spec.task.name(),
        variant,
        &lam,
        &p,
        &format!("{delta:e}"),
    ])
}

/// Minimizer of `(1/n)‖Ax − b‖² + λ‖x‖²` from the normal equations (SVD
/// for the rank-deficient unregularized case).
pub fn quadratic_minimizer(a: &Matrix, b: &Vector, lambda: f64) -> Result<Vector> {
    let n = a.nrows() as f64;
    let d = a.ncols();
    let h = a.tr_mul(a) / n + Matrix::identity(d, d) * lambda;
    let rhs = a.tr_mul(b) / n;
    if lambda > 0.0 {
        if let Some(ch) = h.clone().cholesky() {
            return Ok(ch.solve(&rhs));
        }
    }
    let eps = 1e-13 * h.amax().max(f64::MIN_POSITIVE);
    h.svd(true, true).solve(&rhs, eps).map_err(|_| Error::Singular)
}

fn compute_f_star(spec: &ExperimentSpec, problem: &Problem) -> Result<FStarEntry> {
    let obj = &problem.objective;
    let (a, b) = (&problem.data.rows, &problem.data.labels);
    match spec.task {
        Task::LeastSquares | Task::Ridge => {
            let lam = problem.lambda.unwrap_or(0.0);
            let x = quadratic_minimizer(a, b, lam)?;
            let mut f = obj.value(&x);
            // below working precision of a non-negative objective
            if f <= 1e-14 * (1.0 + b.norm_squared() / a.nrows() as f64) {
                f = 0.0;
            }
            Ok(FStarEntry {
                key: String::new(),
                value: f,
                x_star: Some(x.as_slice().to_vec()),
                provenance: "normal equations".into(),
                converged: true,
                grad_norm: obj.gradient(&x).norm(),
            })
        }
        _ => {
            let x0 = Vector::zeros(obj.dim());
            let est = estimate_f_star(obj, &x0, spec.fstar_budget, 1e-10)?;
            Ok(FStarEntry {
                key: String::new(),
                value: est.value,
                x_star: Some(est.x.clone()),
                provenance: format!(
                    "accelerated gradient + finite-difference Newton, {} iterations, ‖∇f‖ = {:.3e}, margin 1e-12(1+|f|)",
                    est.iterations, est.grad_norm
                ),
                converged: est.converged,
                grad_norm: est.grad_norm,
            })
        }
    }
}

/// `f*` for the spec's problem from the cache, computing it on a miss.
pub fn resolve_f_star(spec: &ExperimentSpec, problem: &Problem) -> Result<(FStarEntry, bool)> {
    let root = spec.cache_root.clone().unwrap_or_else(results_root);
    let cache = FStarCache::new(&root);
    cache.get_or_compute(&cache_key_for(spec, problem), || compute_f_star(spec, problem))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MethodSummary {
    pub method: String,
    pub status: Status,
    pub iterations: usize,
    pub initial_gap: f64,
    pub final_gap: f64,
    /// First `k` with `f − f* ≤ 1e−10`.
    pub iterations_to_tol: Option<usize>,
    pub csv: PathBuf,
    pub json: PathBuf,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub spec: ExperimentSpec,
    pub objective: String,
    pub curvature: String,
    pub lambda: Option<f64>,
    pub l_smooth: Option<f64>,
    pub l_c: Option<f64>,
    pub f_star: f64,
    pub f_star_provenance: String,
    pub f_star_cached: bool,
    pub runs: Vec<MethodSummary>,
}

impl RunSummary {
    pub fn exit_code(&self) -> i32 {
        let bad = self
            .runs
            .iter()
            .any(|r| matches!(r.status, Status::Diverged | Status::Failed(_)));
        if bad { exit::FAILURE } else { exit::SUCCESS }
    }
}

fn file_stem(method: &Method) -> String {
    method
        .name()
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '.' || c == '-' { c } else { '_' })
        .collect::<String>()
        .trim_end_matches('_')
        .to_string()
}

fn unix_now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs())
}

/// Runs one method on a built problem.
pub fn run_method(spec: &ExperimentSpec, problem: &Problem, method: Method, x0: &Vector) -> Result<Trace> {
    let mut cfg = SolverConfig::new(method, spec.max_iters);
    cfg.f_tol = spec.f_tol;
    cfg.g_tol = spec.g_tol;
    cfg.lc_override = spec.lc;
    cfg.seed = spec.seed;
    cfg.time_budget_s = spec.time_budget_s;
    run(&problem.objective, &cfg, x0)
}

/// Builds the problem, resolves `f*` and runs every method from the same
/// start, writing `<method>.csv`/`.json` and `summary.json` into
/// `spec.out`.
pub fn cmd_run(spec: &ExperimentSpec) -> Result<RunSummary> {
    spec.validate()?;
    let data = load_dataset(spec)?;
    let dataset_hash = data.content_hash();
    let mut problem = build_problem(spec, data)?;
    let (fstar, cached) = resolve_f_star(spec, &problem)?;
    problem.objective.f_star = Some(fstar.value);
    let d = problem.objective.dim();
    let x0 = start_point(spec, d);
    let l_c = spec.lc.or(problem.objective.model.excess());
    let started = unix_now();
    fs::create_dir_all(&spec.out)?;
    let mut runs = Vec::new();
    for choice in &spec.methods {
        let method = choice.resolve(problem.l_smooth)?;
        let trace = run_method(spec, &problem, method, &x0)?;
        let meta = RunMetadata {
            method: method.name(),
            task: spec.task.name().into(),
            dataset: Some(spec.dataset.display().to_string()),
            dataset_hash: Some(dataset_hash.clone()),
            n: Some(problem.data.n()),
            d: Some(d),
            lambda: problem.lambda,
            lambda_frac_of_l: match spec.lambda {
                Some(LambdaSpec::FracOfL(f)) => Some(f),
                _ => None,
            },
            p: spec.p,
            delta: spec.delta,
            curvature: Some(format!("{} [{}]", spec.curvature(), problem.objective.model.label())),
            l_smooth: problem.l_smooth,
            l_definition: problem.l_definition.clone(),
            l_c,
            f_star: Some(fstar.value),
            f_star_provenance: Some(fstar.provenance.clone()),
            feature_scaling: spec.scale_features,
            x0: match spec.x0 {
                StartPoint::Zeros => "zeros".into(),
                StartPoint::Random => format!("uniform[-1,1] seed {}", spec.seed),
            },
            max_iters: spec.max_iters,
            f_tol: spec.f_tol,
            g_tol: spec.g_tol,
            seed: spec.seed,
            started_unix: started,
            version: env!("CARGO_PKG_VERSION").into(),
        };
        let stem = file_stem(&method);
        let record = RunRecord { metadata: meta, trace };
        let csv = write_run(&record, &spec.out, &stem)?;
        let t = &record.trace;
        log::info!("{}: {:?} after {} iterations, gap {:.3e}", method, t.status, t.iterations(), t.final_gap());
        runs.push(MethodSummary {
            method: method.name(),
            status: t.status.clone(),
            iterations: t.iterations(),
            initial_gap: t.initial_gap,
            final_gap: t.final_gap(),
            iterations_to_tol: t.records.iter().find(|r| r.f_gap <= SUMMARY_GAP).map(|r| r.k),
            csv,
            json: spec.out.join(format!("{stem}.json")),
        });
    }
    let summary = RunSummary {
        spec: spec.clone(),
        objective: problem.objective.name.clone(),
        curvature: problem.objective.model.label().to_string(),
        lambda: problem.lambda,
        l_smooth: problem.l_smooth,
        l_c,
        f_star: fstar.value,
        f_star_provenance: fstar.provenance,
        f_star_cached: cached,
        runs,
    };
    let f = BufWriter::new(File::create(spec.out.join("summary.json"))?);
    serde_json::to_writer_pretty(f, &summary)?;
    Ok(summary)
}

impl fmt::Display for RunSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{} [{}]", self.objective, self.curvature)?;
        if let Some(l) = self.lambda {
            writeln!(f, "  λ = {l:.6e}")?;
        }
        writeln!(
            f,
            "  f* = {:.15e} ({}{})",
            self.f_star,
            self.f_star_provenance,
            if self.f_star_cached { ", cached" } else { "" }
        )?;
        writeln!(f, "  {:<14} {:<12} {:>8} {:>14} {:>10}", "method", "status", "iters", "final gap", "k(1e-10)")?;
        for r in &self.runs {
            let status = match &r.status {
                Status::Converged => "converged".to_string(),
                Status::MaxIters => "max-iters".to_string(),
                Status::Diverged => "DIVERGED".to_string(),
                Status::Failed(_) => "FAILED".to_string(),
            };
            let k = r.iterations_to_tol.map_or("-".to_string(), |k| k.to_string());
            writeln!(f, "  {:<14} {:<12} {:>8} {:>14.6e} {:>10}", r.method, status, r.iterations, r.final_gap, k)?;
            if let Status::Failed(msg) = &r.status {
                writeln!(f, "    {msg}")?;
            }
        }
        Ok(())
    }
}

/// Runs the verification suites and prints one line per suite.
pub fn cmd_verify<W: Write>(opts: &VerifyOptions, out: &mut W) -> Result<(VerifyReport, i32)> {
    let report = run_suites(opts)?;
    for w in &report.warnings {
        writeln!(out, "warning: {w}")?;
    }
    for s in &report.suites {
        writeln!(out, "{s}")?;
    }
    let failed = report.failures().count();
    writeln!(out, "{} suites, {} failed", report.suites.len(), failed)?;
    let code = if failed == 0 { exit::SUCCESS } else { exit::FAILURE };
    Ok((report, code))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub index: usize,
    pub lambda: LambdaSpec,
    pub dir: PathBuf,
    pub summary: Option<RunSummary>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepIndex {
    pub points: Vec<SweepPoint>,
}

impl SweepIndex {
    pub fn exit_code(&self) -> i32 {
        self.points
            .iter()
            .map(|p| match (&p.summary, &p.error) {
                (Some(s), None) => s.exit_code(),
                _ => exit::FAILURE,
            })
            .max()
            .unwrap_or(exit::SUCCESS)
    }

    pub fn trace_files(&self) -> Vec<&Path> {
        self.points
            .iter()
            .filter_map(|p| p.summary.as_ref())
            .flat_map(|s| s.runs.iter().map(|r| r.csv.as_path()))
            .collect()
    }
}

/// Runs `cmd_run` at every grid value of `λ` (in parallel) and writes
/// `index.json` into `base.out`.
pub fn cmd_sweep(base: &ExperimentSpec, grid: &[LambdaSpec]) -> Result<SweepIndex> {
    if grid.is_empty() {
        return Err(Error::InvalidParameter("λ grid is empty".into()));
    }
    base.validate()?;
    if base.task == Task::Ridge || base.task == Task::Logistic {
        // fail fast on an unreadable dataset instead of once per point
        load_dataset(base)?;
    } else {
        return Err(Error::InvalidParameter(format!("task '{}' has no λ to sweep", base.task)));
    }
    fs::create_dir_all(&base.out)?;
    let points: Vec<SweepPoint> = grid
        .par_iter()
        .enumerate()
        .map(|(index, &lambda)| {
            let mut spec = base.clone();
            spec.lambda = Some(lambda);
            spec.out = base.out.join(format!("point{index:02}_{}", lambda.label()));
            let res = cmd_run(&spec);
            let (summary, error) = match res {
                Ok(s) => (Some(s), None),
                Err(e) => (None, Some(e.to_string())),
            };
            SweepPoint {
                index,
                lambda,
                dir: spec.out,
                summary,
                error,
            }
        })
        .collect();
    let index = SweepIndex { points };
    let f = BufWriter::new(File::create(base.out.join("index.json"))?);
    serde_json::to_writer_pretty(f, &index)?;
    Ok(index)
}
