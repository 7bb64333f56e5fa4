//! Sampled property suites for every module, plus the catalogs of
//! `(f, C, L_C)` triples and absolutely convex functions they run on.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::abs_convex::{
    abs_affine, check_absolute_convexity, huber_lifted, lift_on_interval, pnorm_acv, pseudo_huber, sqrt_quad,
    sum_of_squares_problem, sum_of_squares_rank_one, AbsConvexFunction,
};
use crate::curvature::{
    affine_precompose, huber_sq_model, lpp_model, pnorm, pnorm_gradient, pnorm_sq_diag_model, pnorm_sq_rank1_model,
    quadratic_model, scale_model, sqrt_quartic_model, strong_convexity_model, sum_models, two_norm_pow_model,
    CurvatureModel, LppVariant, TwoNormPowVariant,
};
use crate::error::{Error, Result};
use crate::io::{parse_libsvm, read_trace_csv, write_libsvm, write_trace_csv, Dataset, LabelMode};
use crate::matrix::{CurvatureMatrix, Matrix, Vector};
use crate::objectives::{
    bound_report, estimate_f_star, huber, huber_derivative, huber_lifted_sos_regression, huber_sq_regression,
    logistic_lp, pnorm_regression, Objective,
};
use crate::projection::{eval_h, find_beta, lcd2_project, lcd2_project_eigen, Beta, NewtonOptions, ProjectionInput};
use crate::solvers::{run, verify_rate_bounds, Method, SolverConfig};

/// Default tolerance on scaled violations.
pub const SUITE_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scope {
    All,
    MatrixCore,
    CurvatureMaps,
    Objectives,
    AbsConvex,
    ProjectionEngine,
    LcdSolvers,
    DataIo,
}

impl Scope {
    pub const MODULES: [Scope; 7] = [
        Scope::MatrixCore,
        Scope::CurvatureMaps,
        Scope::Objectives,
        Scope::AbsConvex,
        Scope::ProjectionEngine,
        Scope::LcdSolvers,
        Scope::DataIo,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scope::All => "all",
            Scope::MatrixCore => "matrix-core",
            Scope::CurvatureMaps => "curvature-maps",
            Scope::Objectives => "objectives",
            Scope::AbsConvex => "abs-convex",
            Scope::ProjectionEngine => "projection-engine",
            Scope::LcdSolvers => "lcd-solvers",
            Scope::DataIo => "data-io",
        }
    }
}

impl fmt::Display for Scope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scope {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        std::iter::once(Scope::All)
            .chain(Scope::MODULES)
            .find(|m| m.name() == s.trim())
            .ok_or_else(|| Error::InvalidParameter(format!("unknown scope '{s}'")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteResult {
    pub module: String,
    pub name: String,
    pub samples: usize,
    /// Samples where the inequality does not apply (e.g. singular `C`).
    pub skipped: usize,
    pub worst: f64,
    pub worst_at: Option<String>,
    pub tol: f64,
    pub passed: bool,
}

impl SuiteResult {
    fn new(module: Scope, name: impl Into<String>, samples: usize, tol: f64) -> Self {
        SuiteResult {
            module: module.name().into(),
            name: name.into(),
            samples,
            skipped: 0,
            worst: 0.0,
            worst_at: None,
            tol,
            passed: true,
        }
    }

    fn record(&mut self, v: f64, at: impl FnOnce() -> String) {
        if v > self.worst || v.is_nan() {
            self.worst = v;
            self.worst_at = Some(at());
        }
    }

    fn finish(mut self) -> Self {
        self.passed = self.worst <= self.tol;
        self
    }
}

impl fmt::Display for SuiteResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}] {}/{}: worst {:.3e} (tol {:.0e}, {} samples",
            if self.passed { "PASS" } else { "FAIL" },
            self.module,
            self.name,
            self.worst,
            self.tol,
            self.samples
        )?;
        if self.skipped > 0 {
            write!(f, ", {} skipped", self.skipped)?;
        }
        write!(f, ")")?;
        if let (false, Some(at)) = (self.passed, &self.worst_at) {
            write!(f, " at {at}")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub suites: Vec<SuiteResult>,
    pub warnings: Vec<String>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.suites.iter().all(|s| s.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &SuiteResult> {
        self.suites.iter().filter(|s| !s.passed)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyOptions {
    pub scope: Scope,
    pub seed: u64,
    pub samples: usize,
    /// Adds `f = x²` with the wrong map `C ≡ 10`, which must fail.
    pub negative_control: bool,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            scope: Scope::All,
            seed: 0,
            samples: 10_000,
            negative_control: false,
        }
    }
}

pub fn run_suites(opts: &VerifyOptions) -> Result<VerifyReport> {
    let mut report = VerifyReport::default();
    if opts.samples == 0 {
        report
            .warnings
            .push("samples = 0: every suite passes vacuously".into());
        return Ok(report);
    }
    let scopes: Vec<Scope> = match opts.scope {
        Scope::All => Scope::MODULES.to_vec(),
        s => vec![s],
    };
    for scope in scopes {
        let (n, seed) = (opts.samples, opts.seed);
        let suites = match scope {
            Scope::MatrixCore => matrix_suites(n, seed)?,
            Scope::CurvatureMaps => curvature_suites(n, seed)?,
            Scope::Objectives => objective_suites(n, seed)?,
            Scope::AbsConvex => abs_convex_suites(n, seed)?,
            Scope::ProjectionEngine => projection_suites(n, seed)?,
            Scope::LcdSolvers => solver_suites(n, seed)?,
            Scope::DataIo => io_suites(n, seed)?,
            Scope::All => unreachable!("expanded above"),
        };
        report.suites.extend(suites);
    }
    if opts.negative_control {
        report.suites.push(negative_control()?);
    }
    Ok(report)
}

fn rand_vec(rng: &mut ChaCha8Rng, d: usize, r: f64) -> Vector {
    Vector::from_fn(d, |_, _| rng.random_range(-r..=r))
}

fn fmt_vec(v: &Vector) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x}")).collect();
    format!("({})", parts.join(", "))
}

/// Log-uniform draw from `[10^lo, 10^hi]`.
fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    10f64.powf(rng.random_range(lo..=hi))
}

/// A curvature matrix of random structure, sometimes singular.
pub fn random_curvature(rng: &mut ChaCha8Rng, d: usize) -> CurvatureMatrix {
    match rng.random_range(0..5) {
        0 => CurvatureMatrix::zero(d),
        1 => CurvatureMatrix::ScaledIdentity {
            dim: d,
            c: log_uniform(rng, -2.0, 2.0),
        },
        2 => CurvatureMatrix::Diagonal(Vector::from_fn(d, |_, _| {
            if rng.random_bool(0.2) { 0.0 } else { log_uniform(rng, -2.0, 2.0) }
        })),
        3 => CurvatureMatrix::RankOne {
            w: log_uniform(rng, -2.0, 2.0),
            v: rand_vec(rng, d, 1.0),
        },
        _ => {
            let k = rng.random_range(1..=d);
            let b = Matrix::from_fn(d, k, |_, _| rng.random_range(-1.0..1.0));
            CurvatureMatrix::Dense(&b * b.transpose())
        }
    }
}

// ---- catalogs ------------------------------------------------------------

fn catalog_data() -> (Matrix, Vector) {
    let a = Matrix::from_row_slice(
        5,
        3,
        &[1.0, 0.5, -1.0, 0.0, 2.0, 1.0, -0.3, 0.2, 0.7, 1.5, -1.0, 0.0, 0.4, 0.4, 0.9],
    );
    let b = Vector::from_column_slice(&[0.5, -1.0, 2.0, 0.1, -0.7]);
    (a, b)
}

fn huber_sq_separable(delta: f64, d: usize) -> Result<Objective> {
    let model = huber_sq_model(delta, d)?;
    Ok(Objective::from_fns(
        format!("Σh_{delta}²(xᵢ)"),
        d,
        move |x| x.iter().map(|&t| huber(t, delta).powi(2)).sum(),
        move |x| x.map(|t| 2.0 * huber(t, delta) * huber_derivative(t, delta)),
        model,
    )?
    .with_sample_radius(3.0 * delta))
}

fn pnorm_sq(p: f64, d: usize, rank_one: bool) -> Result<Objective> {
    let model = if rank_one {
        pnorm_sq_rank1_model(p, d)?
    } else {
        pnorm_sq_diag_model(p, d)?
    };
    Objective::from_fns(
        format!("‖x‖_{p}² ({})", if rank_one { "rank-one" } else { "diag" }),
        d,
        move |x| pnorm(x, p).powi(2),
        move |x| pnorm_gradient(x, p) * (2.0 * pnorm(x, p)),
        model,
    )
}

fn lpp(p: f64, d: usize, variant: LppVariant) -> Result<Objective> {
    Objective::from_fns(
        format!("‖x‖_{p}^{p} ({variant:?})"),
        d,
        move |x| x.iter().map(|t| t.abs().powf(p)).sum(),
        move |x| x.map(|t| p * t.signum() * t.abs().powf(p - 1.0)),
        lpp_model(p, d, variant)?,
    )
}

fn two_norm_pow(p: f64, d: usize, variant: TwoNormPowVariant) -> Result<Objective> {
    Objective::from_fns(
        format!("‖x‖₂^{p} ({variant:?})"),
        d,
        move |x| x.norm().powf(p),
        move |x| {
            let n = x.norm();
            if n == 0.0 { Vector::zeros(x.len()) } else { x * (p * n.powf(p - 2.0)) }
        },
        two_norm_pow_model(p, d, variant)?,
    )
}

fn g_norm_sq(g: Matrix) -> Result<Objective> {
    let d = g.nrows();
    let (gf, gg) = (g.clone(), g.clone());
    Objective::from_fns("‖x‖²_G", d, move |x| x.dot(&(&gf * x)), move |x| &gg * x * 2.0, quadratic_model(&g)?)
}

fn sqrt_quartic(a: f64, b: f64, d: usize) -> Result<Objective> {
    Objective::from_fns(
        format!("Σ√({a}xᵢ⁴+{b})"),
        d,
        move |x| x.iter().map(|t| (a * t.powi(4) + b).sqrt()).sum(),
        move |x| x.map(|t| 2.0 * a * t.powi(3) / (a * t.powi(4) + b).sqrt()),
        sqrt_quartic_model(a, b, d)?,
    )
}

fn softplus(t: f64) -> f64 {
    if t > 0.0 { t + (-t).exp().ln_1p() } else { t.exp().ln_1p() }
}

fn sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

/// `(μ/2)‖x‖² + Σ softplus(xᵢ)` with `C ≡ μI`, excess `1/4`.
fn strongly_convex(mu: f64, d: usize) -> Result<Objective> {
    Objective::from_fns(
        format!("(μ/2)‖x‖²+Σsoftplus (μ={mu})"),
        d,
        move |x| 0.5 * mu * x.norm_squared() + x.iter().map(|&t| softplus(t)).sum::<f64>(),
        move |x| x * mu + x.map(sigmoid),
        strong_convexity_model(mu, d)?.with_excess(Some(0.25)),
    )
}

/// Every `(f, C, L_C)` triple of the curvature catalog on small fixed
/// problems.
pub fn assumption_catalog() -> Result<Vec<Objective>> {
    let (a, b) = catalog_data();
    let labels = b.map(|v| if v >= 0.0 { 1.0 } else { -1.0 });
    let g = Matrix::from_row_slice(3, 3, &[2.0, 0.5, 0.0, 0.5, 1.0, 0.2, 0.0, 0.2, 0.5]);
    let d = 3;
    Ok(vec![
        huber_sq_separable(0.5, d)?,
        huber_sq_separable(1.0, d)?,
        huber_sq_separable(2.0, d)?,
        huber_sq_regression(&a, &b, 1.0)?,
        pnorm_sq(3.0, d, false)?,
        pnorm_sq(3.0, d, true)?,
        pnorm_sq(4.0, d, false)?,
        pnorm_sq(4.0, d, true)?,
        pnorm_regression(&a, &b, 3.0, false)?,
        pnorm_regression(&a, &b, 3.0, true)?,
        lpp(3.0, d, LppVariant::Diagonal)?,
        lpp(3.0, d, LppVariant::RankOne)?,
        lpp(4.0, d, LppVariant::Diagonal)?,
        lpp(4.0, d, LppVariant::RankOne)?,
        two_norm_pow(3.0, d, TwoNormPowVariant::Identity)?,
        two_norm_pow(3.0, d, TwoNormPowVariant::RankOne)?,
        two_norm_pow(4.0, d, TwoNormPowVariant::Identity)?,
        two_norm_pow(4.0, d, TwoNormPowVariant::RankOne)?,
        g_norm_sq(g)?,
        sqrt_quartic(1.0, 1.0, d)?,
        sqrt_quartic(2.0, 0.5, d)?,
        strongly_convex(0.7, d)?,
        logistic_lp(&a, &labels, 0.05, 2.0)?,
        logistic_lp(&a, &labels, 0.05, 3.0)?,
        huber_lifted_sos_regression(&a, &b, 0.7)?,
    ])
}

/// Catalog of absolutely convex functions on `R^d` (one-dimensional ones
/// are lifted through a fixed linear map when `d > 1`).
pub fn abs_convex_catalog(d: usize) -> Result<Vec<AbsConvexFunction>> {
    let a = Vector::from_fn(d, |i, _| 1.0 - 0.37 * i as f64);
    let row = Matrix::from_fn(1, d, |_, j| a[j]);
    let shift = Vector::from_element(1, 0.3);
    let lift = |phi: AbsConvexFunction| -> Result<AbsConvexFunction> {
        if d == 1 { Ok(phi) } else { phi.precompose(&row, &shift) }
    };
    let base = vec![
        abs_affine(a.clone(), 0.0),
        abs_affine(a.clone(), -1.5),
        pnorm_acv(1.0, d)?,
        pnorm_acv(1.5, d)?,
        pnorm_acv(2.0, d)?,
        pnorm_acv(4.0, d)?,
        lift(huber_lifted(0.5)?)?,
        lift(huber_lifted(2.0)?)?,
        lift(pseudo_huber(1.0)?)?,
        lift(sqrt_quad(2.0, 1.0)?)?,
    ];
    let mut out = base.clone();
    out.push(base[4].add_const(0.7)?);
    out.push(base[3].scale(2.5)?);
    out.push(base[0].sum(&base[5])?);
    out.push(base[2].max_const(0.4)?);
    Ok(out)
}

/// Catalog members whose minimum value is zero and which are therefore
/// homogeneous, even and subadditive.
pub fn zero_minimum_catalog(d: usize) -> Result<Vec<AbsConvexFunction>> {
    let a = Vector::from_fn(d, |i, _| 1.0 - 0.37 * i as f64);
    Ok(vec![
        abs_affine(a, 0.0),
        pnorm_acv(1.0, d)?,
        pnorm_acv(1.5, d)?,
        pnorm_acv(2.0, d)?,
        pnorm_acv(4.0, d)?,
    ])
}

// ---- suites --------------------------------------------------------------

/// `f = x²` paired with the invalid map `C ≡ 10`, probed at `(3, 0)`.
pub fn negative_control() -> Result<SuiteResult> {
    let model = CurvatureModel::constant(CurvatureMatrix::Diagonal(Vector::from_element(1, 10.0)), None, "C ≡ 10");
    let obj = Objective::from_fns("x²", 1, |x| x[0] * x[0], |x| x * 2.0, model)?;
    let mut s = SuiteResult::new(Scope::Objectives, "assumption-1 lower x² with C ≡ 10 (negative control)", 1, SUITE_TOL);
    let (x, y) = (Vector::from_element(1, 3.0), Vector::from_element(1, 0.0));
    let v = obj.check_lower_bound(&x, &y)?;
    s.record(v, || "(3, 0)".into());
    Ok(s.finish())
}

fn matrix_suites(samples: usize, seed: u64) -> Result<Vec<SuiteResult>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = Scope::MatrixCore;
    let mut solve = SuiteResult::new(m, "shifted-solve residual", samples, SUITE_TOL);
    let mut quad = SuiteResult::new(m, "quad-form vs dense", samples, SUITE_TOL);
    let mut eig = SuiteResult::new(m, "eigendecomposition reconstruction", samples, SUITE_TOL);
    for i in 0..samples {
        let d = rng.random_range(1..=6);
        let c = random_curvature(&mut rng, d);
        let g = rand_vec(&mut rng, d, 2.0);
        let s = log_uniform(&mut rng, -3.0, 2.0);
        let dense = c.to_dense();
        let scale = 1.0 + dense.amax();
        let u = c.shifted_solve(s, &g)?;
        let res = (&dense * &u + &u * s - &g).norm() / (scale * (1.0 + u.norm()) + g.norm());
        solve.record(res, || format!("sample {i}"));
        let q = c.quad_form(&g)?;
        let qd = g.dot(&(&dense * &g));
        quad.record((q - qd).abs() / (scale * (1.0 + g.norm_squared())), || format!("sample {i}"));
        if i % 10 == 0 {
            let e = c.eigendecompose()?;
            let err = (e.reconstruct() - &dense).amax() / scale;
            eig.record(err, || format!("sample {i}"));
        }
    }
    eig.samples = samples.div_ceil(10);
    Ok(vec![solve.finish(), quad.finish(), eig.finish()])
}

fn curvature_suites(samples: usize, seed: u64) -> Result<Vec<SuiteResult>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x11);
    let m = Scope::CurvatureMaps;
    let mut out = Vec::new();
    let per = samples.div_ceil(10).max(1);
    for obj in assumption_catalog()? {
        let mut s = SuiteResult::new(m, format!("psd {}", obj.model.label()), per, SUITE_TOL);
        for _ in 0..per {
            let x = rand_vec(&mut rng, obj.dim(), obj.sample_radius);
            let c = obj.model.eval(&x)?;
            let dense = c.to_dense();
            let min = dense.clone().symmetric_eigenvalues().min();
            s.record((-min).max(0.0) / (1.0 + dense.amax()), || fmt_vec(&x));
        }
        out.push(s.finish());
    }
    let (a, b) = catalog_data();
    let base = huber_sq_model(0.8, a.nrows())?;
    let pre = affine_precompose(&base, &a, &b)?;
    let sc = scale_model(&pnorm_sq_diag_model(3.0, 3)?, 0.4)?;
    let sum = sum_models(&pre, &sc)?;
    let mut comb = SuiteResult::new(m, "sum/scale/affine combinators vs dense", per, SUITE_TOL);
    for _ in 0..per {
        let x = rand_vec(&mut rng, 3, 3.0);
        let want = a.transpose() * base.eval(&(&a * &x + &b))?.to_dense() * &a
            + pnorm_sq_diag_model(3.0, 3)?.eval(&x)?.to_dense() * 0.4;
        let got = sum.eval(&x)?.to_dense();
        comb.record((got - &want).amax() / (1.0 + want.amax()), || fmt_vec(&x));
    }
    out.push(comb.finish());
    Ok(out)
}

fn objective_suites(samples: usize, seed: u64) -> Result<Vec<SuiteResult>> {
    let m = Scope::Objectives;
    let mut out = Vec::new();
    for (i, obj) in assumption_catalog()?.into_iter().enumerate() {
        let rep = bound_report(&obj, samples, seed.wrapping_add(i as u64))?;
        let mut low = SuiteResult::new(m, format!("assumption-1 lower {} / {}", obj.name, obj.model.label()), samples, SUITE_TOL);
        low.record(rep.worst_lower_violation, || format!("{:?}", rep.worst_lower_pair));
        out.push(low.finish());
        if let Some(up) = rep.worst_upper_violation {
            let mut s = SuiteResult::new(m, format!("assumption-1 upper {} / {}", obj.name, obj.model.label()), samples, SUITE_TOL);
            s.record(up, String::new);
            out.push(s.finish());
        }
        out.push(co_coercivity_suite(&obj, samples, seed.wrapping_add(1000 + i as u64))?);
        out.push(symmetrization_suite(&obj, samples, seed.wrapping_add(2000 + i as u64))?);
    }
    Ok(out)
}

/// Co-coercivity on sampled pairs; pairs where `C(x)` is singular along
/// the gradient difference are counted as skipped.
pub fn co_coercivity_suite(obj: &Objective, samples: usize, seed: u64) -> Result<SuiteResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut s = SuiteResult::new(Scope::Objectives, format!("co-coercivity {}", obj.name), samples, SUITE_TOL);
    for _ in 0..samples {
        let x = rand_vec(&mut rng, obj.dim(), obj.sample_radius);
        let y = rand_vec(&mut rng, obj.dim(), obj.sample_radius);
        let scale = 1.0 + obj.value(&x).abs() + obj.value(&y).abs();
        match obj.check_co_coercivity(&x, &y) {
            Ok(v) => s.record(v / scale, || format!("x={}, y={}", fmt_vec(&x), fmt_vec(&y))),
            Err(Error::Singular) | Err(Error::SingularAlongGradient(_)) => s.skipped += 1,
            Err(e) => return Err(e),
        }
    }
    Ok(s.finish())
}

pub fn symmetrization_suite(obj: &Objective, samples: usize, seed: u64) -> Result<SuiteResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut s = SuiteResult::new(Scope::Objectives, format!("bregman-symmetrization {}", obj.name), samples, SUITE_TOL);
    for _ in 0..samples {
        let x = rand_vec(&mut rng, obj.dim(), obj.sample_radius);
        let y = rand_vec(&mut rng, obj.dim(), obj.sample_radius);
        let scale = 1.0 + obj.value(&x).abs() + obj.value(&y).abs();
        let v = obj.check_bregman_symmetrization(&x, &y)?;
        s.record(v / scale, || format!("x={}, y={}", fmt_vec(&x), fmt_vec(&y)));
    }
    Ok(s.finish())
}

/// Absolute convexity and the subgradient bound of one function.
pub fn abs_convexity_suite(phi: &AbsConvexFunction, samples: usize, seed: u64) -> Result<Vec<SuiteResult>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = Scope::AbsConvex;
    let mut ac = SuiteResult::new(m, format!("absolute-convexity {}", phi.label()), samples, SUITE_TOL);
    let mut gb = SuiteResult::new(m, format!("subgradient-bound {}", phi.label()), samples, SUITE_TOL);
    for _ in 0..samples {
        let x = rand_vec(&mut rng, phi.dim(), 4.0);
        let y = rand_vec(&mut rng, phi.dim(), 4.0);
        let scale = 1.0 + phi.value(&x).abs() + phi.value(&y).abs();
        let v = check_absolute_convexity(phi, &x, &y)?;
        ac.record(v / scale, || format!("x={}, y={}", fmt_vec(&x), fmt_vec(&y)));
        if let Some(bound) = phi.grad_bound() {
            let excess = (phi.subgrad(&y).norm() - bound).max(0.0) / (1.0 + bound);
            gb.record(excess, || fmt_vec(&y));
        }
    }
    let mut out = vec![ac.finish()];
    if phi.grad_bound().is_some() {
        out.push(gb.finish());
    }
    Ok(out)
}

/// Homogeneity, evenness and subadditivity of a zero-minimum function.
pub fn norm_like_suite(phi: &AbsConvexFunction, samples: usize, seed: u64) -> Result<SuiteResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut s = SuiteResult::new(Scope::AbsConvex, format!("homogeneity/evenness/subadditivity {}", phi.label()), samples, SUITE_TOL);
    for _ in 0..samples {
        let x = rand_vec(&mut rng, phi.dim(), 4.0);
        let y = rand_vec(&mut rng, phi.dim(), 4.0);
        let t: f64 = rng.random_range(-5.0..5.0);
        let (fx, fy) = (phi.value(&x), phi.value(&y));
        let scale = 1.0 + fx.abs() + fy.abs() + t.abs() * fx.abs();
        let hom = (phi.value(&(&x * t)) - t.abs() * fx).abs();
        let even = (phi.value(&-&x) - fx).abs();
        let sub = (phi.value(&(&x + &y)) - fx - fy).max(0.0);
        s.record(hom.max(even).max(sub) / scale, || format!("x={}, y={}, t={t}", fmt_vec(&x), fmt_vec(&y)));
    }
    Ok(s.finish())
}

fn abs_convex_suites(samples: usize, seed: u64) -> Result<Vec<SuiteResult>> {
    let m = Scope::AbsConvex;
    let mut out = Vec::new();
    for d in [1, 3] {
        for (i, phi) in abs_convex_catalog(d)?.iter().enumerate() {
            out.extend(abs_convexity_suite(phi, samples, seed.wrapping_add(31 * d as u64 + i as u64))?);
        }
        for (i, phi) in zero_minimum_catalog(d)?.iter().enumerate() {
            out.push(norm_like_suite(phi, samples, seed.wrapping_add(97 * d as u64 + i as u64))?);
        }
    }
    let beta = lift_on_interval(|x| x * x, |x| 2.0 * x, -1.0, 1.0)?;
    let mut lift = SuiteResult::new(m, "lift x² on [−1, 1] equals 1", 1, 0.0);
    lift.record((beta - 1.0).abs(), || format!("β = {beta}"));
    out.push(lift.finish());
    let lifted = AbsConvexFunction::new(1, Some(2.0), "x² + 1 on [−1, 1]", |x| x[0] * x[0] + 1.0, |x| x * 2.0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let mut interval = SuiteResult::new(m, "lifted x² + 1 absolutely convex on [−1, 1]", samples, SUITE_TOL);
    for _ in 0..samples {
        let x = rand_vec(&mut rng, 1, 1.0);
        let y = rand_vec(&mut rng, 1, 1.0);
        interval.record(check_absolute_convexity(&lifted, &x, &y)?, || format!("x={}, y={}", fmt_vec(&x), fmt_vec(&y)));
    }
    out.push(interval.finish());
    for (name, phis) in [
        ("sos localization", vec![pnorm_acv(2.0, 2)?, abs_affine(Vector::from_column_slice(&[1.0, -2.0]), 0.5)]),
        ("sos single", vec![sqrt_quad(1.0, 0.5)?.precompose(&Matrix::from_row_slice(1, 2, &[1.0, 1.0]), &Vector::zeros(1))?]),
    ] {
        for obj in [sum_of_squares_problem(phis.clone())?, sum_of_squares_rank_one(phis)?] {
            let rep = bound_report(&obj, samples, seed)?;
            let mut s = SuiteResult::new(m, format!("{name} lower {}", obj.model.label()), samples, SUITE_TOL);
            s.record(rep.worst_lower_violation, || format!("{:?}", rep.worst_lower_pair));
            out.push(s.finish());
        }
    }
    Ok(out)
}

/// Root of `H` by bisection on the expanded form
/// `Δ − β Σg̃ᵢ²/(1+βDᵢ) + ½β² ΣDᵢg̃ᵢ²/(1+βDᵢ)²`.
pub fn bisect_beta(gt: &[f64], d: &[f64], delta: f64) -> f64 {
    let h = |b: f64| {
        let mut v = delta;
        for (g, di) in gt.iter().zip(d) {
            let q = 1.0 + b * di;
            v += -b * g * g / q + 0.5 * b * b * di * g * g / (q * q);
        }
        v
    };
    let mut hi = 1.0;
    while h(hi) > 0.0 {
        hi *= 2.0;
        if hi > 1e300 {
            return f64::INFINITY;
        }
    }
    let mut lo = 0.0;
    for _ in 0..2000 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if h(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// A random `(D, g̃, Δ)` with a finite root. When every `Dᵢ > 0`, `Δ` stays
/// below the limit `½Σg̃ᵢ²/Dᵢ` of `Δ − H`.
pub fn random_h_instance(rng: &mut ChaCha8Rng) -> (Vec<f64>, Vec<f64>, f64) {
    let n = rng.random_range(1..=8);
    let d: Vec<f64> = (0..n)
        .map(|_| if rng.random_bool(0.15) { 0.0 } else { log_uniform(rng, -3.0, 3.0) })
        .collect();
    let gt: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0) * log_uniform(rng, -1.0, 1.0)).collect();
    let delta = if d.iter().all(|&x| x > 0.0) {
        let tail: f64 = gt.iter().zip(&d).map(|(g, di)| 0.5 * g * g / di).sum();
        tail * rng.random_range(0.01..0.99)
    } else {
        log_uniform(rng, -3.0, 2.0)
    };
    (gt, d, delta)
}

fn projection_suites(samples: usize, seed: u64) -> Result<Vec<SuiteResult>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x22);
    let m = Scope::ProjectionEngine;
    let opts = NewtonOptions::default();
    let mut shape = SuiteResult::new(m, "H(0) = Δ, decreasing, convex", samples, SUITE_TOL);
    let mut root = SuiteResult::new(m, "Newton β vs bisection", samples, 1e-8);
    for i in 0..samples {
        let (gt, d, delta) = random_h_instance(&mut rng);
        let (h0, _) = eval_h(0.0, &gt, &d, delta);
        let mut bad = (h0 - delta).abs() / (1.0 + delta);
        let grid: Vec<f64> = (0..12).map(|k| 10f64.powf(-4.0 + k as f64 * 0.7)).collect();
        let vals: Vec<f64> = grid.iter().map(|&b| eval_h(b, &gt, &d, delta).0).collect();
        let scale = 1.0 + vals.iter().fold(delta, |a, v| a.max(v.abs()));
        for w in vals.windows(2) {
            bad = bad.max((w[1] - w[0]).max(0.0) / scale);
        }
        for k in 1..grid.len() - 1 {
            // slope of secants must not decrease
            let s1 = (vals[k] - vals[k - 1]) / (grid[k] - grid[k - 1]);
            let s2 = (vals[k + 1] - vals[k]) / (grid[k + 1] - grid[k]);
            bad = bad.max((s1 - s2) * (grid[k + 1] - grid[k - 1]) / scale - 1e-12);
        }
        shape.record(bad.max(0.0), || format!("instance {i}"));
        let sol = find_beta(&gt, &d, delta, opts)?;
        let want = bisect_beta(&gt, &d, delta);
        let err = match sol.beta {
            Beta::Finite(b) => (b - want).abs() / (1.0 + want),
            Beta::Infinite => if want.is_infinite() { 0.0 } else { f64::INFINITY },
        };
        root.record(err, || format!("D={d:?}, g̃={gt:?}, Δ={delta}"));
    }
    let mut closed = SuiteResult::new(m, "closed forms vs eigendecomposition", samples, 1e-8);
    let mut local = SuiteResult::new(m, "LCD2 output on localization boundary", samples, SUITE_TOL);
    for i in 0..samples {
        let d = rng.random_range(1..=6);
        let c = match i % 2 {
            0 => CurvatureMatrix::ScaledIdentity {
                dim: d,
                c: log_uniform(&mut rng, -2.0, 2.0),
            },
            _ => CurvatureMatrix::RankOne {
                w: log_uniform(&mut rng, -2.0, 2.0),
                v: rand_vec(&mut rng, d, 1.0),
            },
        };
        let x = rand_vec(&mut rng, d, 2.0);
        let g = rand_vec(&mut rng, d, 2.0);
        let gap = match c.inv_quad_form(&g) {
            Ok(q) if q.is_finite() => 0.5 * q * rng.random_range(0.01..0.99),
            _ => log_uniform(&mut rng, -2.0, 1.0),
        };
        let inp = ProjectionInput { x: &x, g: &g, c: &c, gap };
        let fast = lcd2_project(&inp)?;
        let slow = lcd2_project_eigen(&inp, opts)?;
        let step = (&fast.x - &x).norm();
        closed.record((&fast.x - &slow.x).norm() / (1.0 + step), || format!("instance {i} ({:?})", fast.branch));
        let ex = inp.localization_excess(&fast.x)?.abs();
        let tol_scale = 1.0 + gap + c.to_dense().amax() * step * step;
        local.record(ex / tol_scale, || format!("instance {i}"));
    }
    Ok(vec![shape.finish(), root.finish(), closed.finish(), local.finish()])
}

fn solver_suites(samples: usize, seed: u64) -> Result<Vec<SuiteResult>> {
    let m = Scope::LcdSolvers;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x33);
    let instances = (samples / 2000).clamp(1, 6);
    let mut out = Vec::new();
    let mut rate = SuiteResult::new(m, "rate bounds on Huber² regression (LCD1, LCD2)", instances, 0.0);
    let mut lcd3 = SuiteResult::new(m, "LCD3 square-root argument ≥ −1e−9", instances, 0.0);
    for i in 0..instances {
        let delta = [0.5, 1.0, 2.0][i % 3];
        let (n, d) = (30, 4);
        let a = Matrix::from_fn(n, d, |_, _| rng.random_range(-1.0..1.0));
        let b = Vector::from_fn(n, |_, _| rng.random_range(-3.0..3.0));
        let obj = huber_sq_regression(&a, &b, delta)?;
        let x0 = rand_vec(&mut rng, d, 2.0);
        let est = estimate_f_star(&obj, &Vector::zeros(d), 50_000, 1e-11)?;
        // reference pair (x̂, f(x̂)) lies in every localization set
        let x_star = Vector::from_column_slice(&est.x);
        let f_ref = obj.value(&x_star);
        let obj = obj.with_f_star(f_ref);
        let lc = obj.model.excess().expect("Huber² carries an excess");
        for method in [Method::Lcd1, Method::Lcd2] {
            let trace = run(&obj, &SolverConfig::new(method, 200).record(), &x0)?;
            let rep = verify_rate_bounds(&trace, lc, &x_star, f_ref)?;
            let count = rep.bound_violations.len()
                + rep.contraction_violations.len()
                + rep.distance_violations.len()
                + rep.descent_violations.len();
            rate.record(count as f64, || format!("instance {i} {method}: {rep:?}"));
        }
        let trace = run(&obj, &SolverConfig::new(Method::Lcd3, 200), &x0)?;
        let worst = trace.lcd3_arguments.iter().copied().fold(0.0, f64::min);
        lcd3.record((-worst - 1e-9).max(0.0), || format!("instance {i}: {worst}"));
    }
    out.push(rate.finish());
    out.push(lcd3.finish());
    Ok(out)
}

fn io_suites(samples: usize, seed: u64) -> Result<Vec<SuiteResult>> {
    let m = Scope::DataIo;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x44);
    let count = samples.div_ceil(100).max(1);
    let mut libsvm = SuiteResult::new(m, "LibSVM write/parse round trip", count, 0.0);
    let mut csv = SuiteResult::new(m, "trace CSV round trip", count, 0.0);
    for i in 0..count {
        let (n, d) = (rng.random_range(1..20), rng.random_range(1..10));
        let mut rows = Matrix::from_fn(n, d, |_, _| {
            if rng.random_bool(0.4) { 0.0 } else { rng.random_range(-1e3..1e3) * log_uniform(&mut rng, -10.0, 0.0) }
        });
        rows[(0, d - 1)] = 1.0;
        let labels = Vector::from_fn(n, |_, _| rng.random_range(-5.0..5.0));
        let data = Dataset {
            rows,
            labels,
            source: "random".into(),
            scaled: false,
        };
        let mut buf = Vec::new();
        write_libsvm(&data, &mut buf)?;
        let back = parse_libsvm(buf.as_slice(), LabelMode::Regression, "round-trip")?;
        let same = back.rows == data.rows && back.labels == data.labels;
        libsvm.record(if same { 0.0 } else { 1.0 }, || format!("dataset {i}"));

        let obj = huber_sq_regression(&data.rows, &data.labels, 1.0)?;
        let trace = run(&obj, &SolverConfig::new(Method::Lcd1, 5), &Vector::zeros(d))?;
        let mut buf = Vec::new();
        write_trace_csv(&trace, &mut buf)?;
        let recs = read_trace_csv(buf.as_slice())?;
        csv.record(if recs == trace.records { 0.0 } else { 1.0 }, || format!("trace {i}"));
    }
    Ok(vec![libsvm.finish(), csv.finish()])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn negative_control_reports_36() {
        let s = negative_control().unwrap();
        assert_eq!(s.worst, 36.0);
        assert!(!s.passed);
        assert_eq!(s.worst_at.as_deref(), Some("(3, 0)"));
    }

    #[test]
    fn zero_samples_is_vacuous() {
        let rep = run_suites(&VerifyOptions {
            samples: 0,
            ..Default::default()
        })
        .unwrap();
        assert!(rep.passed());
        assert!(rep.suites.is_empty());
        assert_eq!(rep.warnings.len(), 1);
    }

    #[test]
    fn every_scope_passes_at_small_sample_count() {
        for scope in Scope::MODULES {
            let rep = run_suites(&VerifyOptions {
                scope,
                seed: 1,
                samples: 300,
                negative_control: false,
            })
            .unwrap();
            assert!(!rep.suites.is_empty());
            for s in &rep.suites {
                assert!(s.passed, "{s}");
            }
        }
    }

    #[test]
    fn scope_names_round_trip() {
        for s in std::iter::once(Scope::All).chain(Scope::MODULES) {
            assert_eq!(s.name().parse::<Scope>().unwrap(), s);
        }
        assert!("nope".parse::<Scope>().is_err());
    }

    #[test]
    fn bisection_oracle_symbolic_case() {
        let b = bisect_beta(&[2.0], &[1.0], 1.0);
        assert!((b - (2f64.sqrt() - 1.0)).abs() < 1e-14);
    }
}
