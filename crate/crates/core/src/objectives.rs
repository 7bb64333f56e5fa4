//! Problem instances: value and gradient oracles paired with a curvature
//! model, plus sampled checks of the two curvature inequalities.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::curvature::{
    affine_precompose, huber_sq_model, lpp_model, pnorm, pnorm_gradient, pnorm_sq_diag_model,
    pnorm_sq_rank1_model, scale_model, strong_convexity_model, CurvatureModel, LppVariant,
};
use crate::error::{Error, Result};
use crate::matrix::{lambda_max_gram, CurvatureMatrix, Matrix, Vector};

/// Value and gradient of a convex function.
pub trait Oracle: Send + Sync {
    fn dim(&self) -> usize;
    fn value(&self, x: &Vector) -> f64;
    fn gradient(&self, x: &Vector) -> Vector;

    fn value_and_gradient(&self, x: &Vector) -> (f64, Vector) {
        (self.value(x), self.gradient(x))
    }
}

type ValueFn = dyn Fn(&Vector) -> f64 + Send + Sync;
type GradFn = dyn Fn(&Vector) -> Vector + Send + Sync;

struct FnOracle {
    dim: usize,
    value: Box<ValueFn>,
    grad: Box<GradFn>,
}

impl Oracle for FnOracle {
    fn dim(&self) -> usize {
        self.dim
    }
    fn value(&self, x: &Vector) -> f64 {
        (self.value)(x)
    }
    fn gradient(&self, x: &Vector) -> Vector {
        (self.grad)(x)
    }
}

#[derive(Clone)]
pub struct Objective {
    pub name: String,
    oracle: Arc<dyn Oracle>,
    pub model: CurvatureModel,
    pub f_star: Option<f64>,
    pub x_star: Option<Vector>,
    /// Half-width of the box `[−r, r]^d` used by the sampled checks.
    pub sample_radius: f64,
    /// Smoothness constant of the part of `f` not captured by the model,
    /// when one is known (logistic loss, quadratic data term).
    pub smoothness: Option<f64>,
}

impl fmt::Debug for Objective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Objective")
            .field("name", &self.name)
            .field("dim", &self.dim())
            .field("model", &self.model)
            .field("f_star", &self.f_star)
            .finish()
    }
}

impl Objective {
    pub fn new(name: impl Into<String>, oracle: Arc<dyn Oracle>, model: CurvatureModel) -> Result<Self> {
        if oracle.dim() != model.dim() {
            return Err(Error::DimensionMismatch {
                expected: oracle.dim(),
                found: model.dim(),
            });
        }
        Ok(Objective {
            name: name.into(),
            oracle,
            model,
            f_star: None,
            x_star: None,
            sample_radius: 5.0,
            smoothness: None,
        })
    }

    /// Objective from plain closures.
    pub fn from_fns<F, G>(name: impl Into<String>, dim: usize, f: F, grad: G, model: CurvatureModel) -> Result<Self>
    where
        F: Fn(&Vector) -> f64 + Send + Sync + 'static,
        G: Fn(&Vector) -> Vector + Send + Sync + 'static,
    {
        let oracle = FnOracle {
            dim,
            value: Box::new(f),
            grad: Box::new(grad),
        };
        Self::new(name, Arc::new(oracle), model)
    }

    pub fn dim(&self) -> usize {
        self.oracle.dim()
    }

    pub fn value(&self, x: &Vector) -> f64 {
        self.oracle.value(x)
    }

    pub fn gradient(&self, x: &Vector) -> Vector {
        self.oracle.gradient(x)
    }

    pub fn value_and_gradient(&self, x: &Vector) -> (f64, Vector) {
        self.oracle.value_and_gradient(x)
    }

    pub fn oracle(&self) -> &Arc<dyn Oracle> {
        &self.oracle
    }

    /// Same function, different curvature model.
    pub fn with_model(mut self, model: CurvatureModel) -> Result<Self> {
        if model.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: model.dim(),
            });
        }
        self.model = model;
        Ok(self)
    }

    pub fn with_f_star(mut self, f_star: f64) -> Self {
        self.f_star = Some(f_star);
        self
    }

    pub fn with_x_star(mut self, x_star: Vector) -> Self {
        self.x_star = Some(x_star);
        self
    }

    pub fn with_sample_radius(mut self, r: f64) -> Self {
        self.sample_radius = r;
        self
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    fn check_dims(&self, x: &Vector, y: &Vector) -> Result<()> {
        for v in [x, y] {
            if v.len() != self.dim() {
                return Err(Error::DimensionMismatch {
                    expected: self.dim(),
                    found: v.len(),
                });
            }
        }
        Ok(())
    }

    /// `f(y) + ⟨∇f(y), x − y⟩ + ½‖x − y‖²_{C(y)}`.
    pub fn lower_model(&self, x: &Vector, y: &Vector) -> Result<f64> {
        self.check_dims(x, y)?;
        let (fy, gy) = self.value_and_gradient(y);
        let dx = x - y;
        let c = self.model.eval(y)?;
        Ok(fy + gy.dot(&dx) + 0.5 * c.quad_form(&dx)?)
    }

    /// `max(0, M_low(x; y) − f(x))`.
    pub fn check_lower_bound(&self, x: &Vector, y: &Vector) -> Result<f64> {
        let m = self.lower_model(x, y)?;
        Ok((m - self.value(x)).max(0.0))
    }

    /// `max(0, f(x) − M_up(x; y))` where `M_up` adds `½L_C‖x − y‖²`.
    pub fn check_upper_bound(&self, x: &Vector, y: &Vector) -> Result<f64> {
        let l = self.model.excess().ok_or(Error::NoExcess)?;
        let m = self.lower_model(x, y)?;
        let dx2 = (x - y).norm_squared();
        Ok((self.value(x) - m - 0.5 * l * dx2).max(0.0))
    }

    /// Bregman divergence `f(x) − f(y) − ⟨∇f(y), x − y⟩`.
    pub fn bregman(&self, x: &Vector, y: &Vector) -> Result<f64> {
        self.check_dims(x, y)?;
        let (fy, gy) = self.value_and_gradient(y);
        Ok(self.value(x) - fy - gy.dot(&(x - y)))
    }

    /// `max(0, D_f(x, y) − ½‖∇f(x) − ∇f(y)‖²_{C(x)⁻¹})`.
    pub fn check_co_coercivity(&self, x: &Vector, y: &Vector) -> Result<f64> {
        let d = self.bregman(x, y)?;
        let dg = self.gradient(x) - self.gradient(y);
        let q = self.model.eval(x)?.inv_quad_form(&dg)?;
        Ok((d - 0.5 * q).max(0.0))
    }

    /// `max(0, ½‖x − y‖²_{C(x)+C(y)} − ⟨∇f(y) − ∇f(x), y − x⟩)`.
    pub fn check_bregman_symmetrization(&self, x: &Vector, y: &Vector) -> Result<f64> {
        self.check_dims(x, y)?;
        let dx = y - x;
        let lhs = (self.gradient(y) - self.gradient(x)).dot(&dx);
        let c = self.model.eval(x)?.add(&self.model.eval(y)?)?;
        Ok((0.5 * c.quad_form(&dx)? - lhs).max(0.0))
    }

    /// Largest relative deviation of the gradient from central differences.
    pub fn gradient_fd_error(&self, x: &Vector) -> f64 {
        let g = self.gradient(x);
        let mut fd = Vector::zeros(x.len());
        for i in 0..x.len() {
            let h = 1e-6 * x[i].abs().max(1.0);
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[i] += h;
            xm[i] -= h;
            fd[i] = (self.value(&xp) - self.value(&xm)) / (2.0 * h);
        }
        (g - &fd).norm() / fd.norm().max(1.0)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub pairs_tested: usize,
    pub worst_lower_violation: f64,
    /// `None` when the model carries no excess.
    pub worst_upper_violation: Option<f64>,
    pub worst_lower_pair: Option<(Vec<f64>, Vec<f64>)>,
}

impl BoundReport {
    pub fn passes(&self, tol: f64) -> bool {
        self.worst_lower_violation <= tol && self.worst_upper_violation.is_none_or(|u| u <= tol)
    }
}

/// Draws `samples` pairs uniformly from `[−r, r]^d` and records the worst
/// violations of both inequalities, each scaled by `1 + |f(x)|`.
pub fn bound_report(obj: &Objective, samples: usize, seed: u64) -> Result<BoundReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let r = obj.sample_radius;
    let d = obj.dim();
    let mut report = BoundReport {
        pairs_tested: samples,
        worst_upper_violation: obj.model.excess().map(|_| 0.0),
        ..Default::default()
    };
    for _ in 0..samples {
        let x = Vector::from_fn(d, |_, _| rng.random_range(-r..=r));
        let y = Vector::from_fn(d, |_, _| rng.random_range(-r..=r));
        let scale = 1.0 + obj.value(&x).abs();
        let low = obj.check_lower_bound(&x, &y)? / scale;
        if low > report.worst_lower_violation {
            report.worst_lower_violation = low;
            report.worst_lower_pair = Some((x.as_slice().to_vec(), y.as_slice().to_vec()));
        }
        if let Some(worst) = report.worst_upper_violation.as_mut() {
            *worst = worst.max(obj.check_upper_bound(&x, &y)? / scale);
        }
    }
    Ok(report)
}

fn validate_data(a: &Matrix, b: &Vector) -> Result<()> {
    if a.nrows() == 0 {
        return Err(Error::EmptyDataset);
    }
    if a.nrows() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.nrows(),
            found: b.len(),
        });
    }
    Ok(())
}

fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `λ_max(AᵀA)/(4n)`, the smoothness constant of the averaged logistic loss.
pub fn logistic_smoothness(a: &Matrix) -> f64 {
    lambda_max_gram(a) / (4.0 * a.nrows() as f64)
}

/// `λ_max((2/n)AᵀA)`, the smoothness constant of `(1/n)‖Ax − b‖²`.
pub fn quadratic_smoothness(a: &Matrix) -> f64 {
    2.0 * lambda_max_gram(a) / a.nrows() as f64
}

struct Logistic {
    a: Matrix,
    b: Vector,
    lambda: f64,
    p: f64,
}

impl Logistic {
    fn margins(&self, x: &Vector) -> Vector {
        (&self.a * x).component_mul(&self.b)
    }
}

impl Oracle for Logistic {
    fn dim(&self) -> usize {
        self.a.ncols()
    }

    fn value(&self, x: &Vector) -> f64 {
        self.value_and_gradient(x).0
    }

    fn gradient(&self, x: &Vector) -> Vector {
        self.value_and_gradient(x).1
    }

    fn value_and_gradient(&self, x: &Vector) -> (f64, Vector) {
        let n = self.a.nrows() as f64;
        let m = self.margins(x);
        let loss = m.iter().map(|&z| softplus(-z)).sum::<f64>() / n;
        let w = Vector::from_iterator(m.len(), m.iter().zip(self.b.iter()).map(|(&z, &bi)| -bi * sigmoid(-z) / n));
        let mut g = self.a.tr_mul(&w);
        let (p, lam) = (self.p, self.lambda);
        let reg = if lam == 0.0 {
            0.0
        } else if p == 2.0 {
            g.axpy(2.0 * lam, x, 1.0);
            lam * x.norm_squared()
        } else {
            for (gi, xi) in g.iter_mut().zip(x.iter()) {
                if *xi != 0.0 {
                    *gi += lam * p * xi.signum() * xi.abs().powf(p - 1.0);
                }
            }
            lam * x.iter().map(|xi| xi.abs().powf(p)).sum::<f64>()
        };
        (loss + reg, g)
    }
}

/// `(1/n)Σ log(1 + exp(−bᵢ aᵢᵀx)) + λ‖x‖_p^p`.
///
/// For `p = 2` the model is `2λI` with the logistic smoothness constant as
/// excess. For `p > 2` it is `λ` times the diagonal `‖x‖_p^p` map with no
/// excess.
pub fn logistic_lp(a: &Matrix, b: &Vector, lambda: f64, p: f64) -> Result<Objective> {
    validate_data(a, b)?;
    if let Some(bad) = b.iter().find(|v| **v != 1.0 && **v != -1.0) {
        return Err(Error::InvalidParameter(format!("labels must be ±1, found {bad}")));
    }
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(Error::InvalidParameter(format!("λ must be ≥ 0, got {lambda}")));
    }
    if !(p >= 2.0) || !p.is_finite() {
        return Err(Error::InvalidParameter(format!("p must be ≥ 2, got {p}")));
    }
    let d = a.ncols();
    let l_log = logistic_smoothness(a);
    let model = if lambda == 0.0 {
        CurvatureModel::zero(d).with_excess(Some(l_log))
    } else if p == 2.0 {
        strong_convexity_model(2.0 * lambda, d)?.with_excess(Some(l_log))
    } else {
        scale_model(&lpp_model(p, d, LppVariant::Diagonal)?, lambda)?
    };
    let oracle = Logistic {
        a: a.clone(),
        b: b.clone(),
        lambda,
        p,
    };
    let mut obj = Objective::new(format!("logistic-l{p}(λ={lambda:e})"), Arc::new(oracle), model)?;
    obj.smoothness = Some(l_log);
    Ok(obj)
}

struct Quadratic {
    a: Matrix,
    b: Vector,
    lambda: f64,
}

impl Oracle for Quadratic {
    fn dim(&self) -> usize {
        self.a.ncols()
    }
    fn value(&self, x: &Vector) -> f64 {
        let r = &self.a * x - &self.b;
        r.norm_squared() / self.a.nrows() as f64 + self.lambda * x.norm_squared()
    }
    fn gradient(&self, x: &Vector) -> Vector {
        let r = &self.a * x - &self.b;
        self.a.tr_mul(&r) * (2.0 / self.a.nrows() as f64) + x * (2.0 * self.lambda)
    }
}

fn gram_over_n(a: &Matrix) -> CurvatureMatrix {
    CurvatureMatrix::Dense(a.tr_mul(a) * (2.0 / a.nrows() as f64))
}

/// `(1/n)‖Ax − b‖²` with its Hessian `(2/n)AᵀA` as curvature and `L_C = 0`.
pub fn least_squares(a: &Matrix, b: &Vector) -> Result<Objective> {
    validate_data(a, b)?;
    let model = CurvatureModel::constant(gram_over_n(a), Some(0.0), "(2/n)AᵀA");
    let oracle = Quadratic {
        a: a.clone(),
        b: b.clone(),
        lambda: 0.0,
    };
    let mut obj = Objective::new("least-squares", Arc::new(oracle), model)?;
    obj.smoothness = Some(quadratic_smoothness(a));
    Ok(obj)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RidgeCurvature {
    /// `C ≡ 2λI`, excess `λ_max((2/n)AᵀA)`.
    Regularizer,
    /// `C ≡ (2/n)AᵀA`, excess `2λ`.
    FullQuadratic,
}

/// `(1/n)‖Ax − b‖² + λ‖x‖²`.
pub fn ridge(a: &Matrix, b: &Vector, lambda: f64, curvature: RidgeCurvature) -> Result<Objective> {
    validate_data(a, b)?;
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::InvalidParameter(format!("λ must be positive, got {lambda}")));
    }
    let d = a.ncols();
    let l_q = quadratic_smoothness(a);
    let model = match curvature {
        RidgeCurvature::Regularizer => strong_convexity_model(2.0 * lambda, d)?.with_excess(Some(l_q)),
        RidgeCurvature::FullQuadratic => CurvatureModel::constant(gram_over_n(a), Some(2.0 * lambda), "(2/n)AᵀA"),
    };
    let oracle = Quadratic {
        a: a.clone(),
        b: b.clone(),
        lambda,
    };
    let mut obj = Objective::new(format!("ridge(λ={lambda:e})"), Arc::new(oracle), model)?;
    obj.smoothness = Some(l_q);
    Ok(obj)
}

struct PNormRegression {
    a: Matrix,
    b: Vector,
    p: f64,
}

impl Oracle for PNormRegression {
    fn dim(&self) -> usize {
        self.a.ncols()
    }
    fn value(&self, x: &Vector) -> f64 {
        pnorm(&(&self.a * x - &self.b), self.p).powi(2)
    }
    fn gradient(&self, x: &Vector) -> Vector {
        let r = &self.a * x - &self.b;
        self.a.tr_mul(&pnorm_gradient(&r, self.p)) * (2.0 * pnorm(&r, self.p))
    }
}

/// `‖Ax − b‖_p²`, with either `‖·‖_p²` map precomposed with the residual.
pub fn pnorm_regression(a: &Matrix, b: &Vector, p: f64, rank_one: bool) -> Result<Objective> {
    validate_data(a, b)?;
    let n = a.nrows();
    let base = if rank_one {
        pnorm_sq_rank1_model(p, n)?
    } else {
        pnorm_sq_diag_model(p, n)?
    };
    let model = affine_precompose(&base, a, &(-b))?;
    let oracle = PNormRegression {
        a: a.clone(),
        b: b.clone(),
        p,
    };
    Objective::new(format!("pnorm-regression(p={p})"), Arc::new(oracle), model)
}

pub(crate) fn huber(r: f64, delta: f64) -> f64 {
    if r.abs() <= delta {
        0.5 * r * r
    } else {
        delta * (r.abs() - 0.5 * delta)
    }
}

pub(crate) fn huber_derivative(r: f64, delta: f64) -> f64 {
    if r.abs() <= delta {
        r
    } else {
        delta * r.signum()
    }
}

struct HuberSq {
    a: Matrix,
    b: Vector,
    delta: f64,
    /// Added to `h_δ` before squaring; `δ²/2` turns it absolutely convex.
    shift: f64,
}

impl Oracle for HuberSq {
    fn dim(&self) -> usize {
        self.a.ncols()
    }
    fn value(&self, x: &Vector) -> f64 {
        let r = &self.a * x - &self.b;
        r.iter().map(|&ri| (huber(ri, self.delta) + self.shift).powi(2)).sum::<f64>() / self.a.nrows() as f64
    }
    fn gradient(&self, x: &Vector) -> Vector {
        let n = self.a.nrows() as f64;
        let r = &self.a * x - &self.b;
        let w = r.map(|ri| 2.0 * (huber(ri, self.delta) + self.shift) * huber_derivative(ri, self.delta) / n);
        self.a.tr_mul(&w)
    }
}

/// `(1/n)Σ h_δ²(aᵢᵀx − bᵢ)` with the coordinatewise squared-Huber map
/// precomposed with the residual: `Aᵀ diag(c(rᵢ)/n) A`,
/// `L_C = 2δ²λ_max(AᵀA)/n`.
pub fn huber_sq_regression(a: &Matrix, b: &Vector, delta: f64) -> Result<Objective> {
    validate_data(a, b)?;
    let n = a.nrows();
    let base = scale_model(&huber_sq_model(delta, n)?, 1.0 / n as f64)?;
    let model = affine_precompose(&base, a, &(-b))?;
    let oracle = HuberSq {
        a: a.clone(),
        b: b.clone(),
        delta,
        shift: 0.0,
    };
    let obj = Objective::new(format!("huber²-regression(δ={delta})"), Arc::new(oracle), model)?;
    Ok(obj.with_sample_radius(3.0 * delta))
}

/// `(1/n)Σ (h_δ(aᵢᵀx − bᵢ) + δ²/2)²`, a sum of squares of absolutely convex
/// functions, with `C(x) = (2/n)Σ∇φᵢ∇φᵢᵀ`.
pub fn huber_lifted_sos_regression(a: &Matrix, b: &Vector, delta: f64) -> Result<Objective> {
    validate_data(a, b)?;
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(Error::InvalidParameter(format!("Huber δ must be positive, got {delta}")));
    }
    let n = a.nrows() as f64;
    let d = a.ncols();
    let (am, bm) = (a.clone(), b.clone());
    let model = CurvatureModel::new(d, crate::matrix::Structure::Dense, None, "(2/n)Σ∇φᵢ∇φᵢᵀ", move |x| {
        let r = &am * x - &bm;
        let w = r.map(|ri| 2.0 * huber_derivative(ri, delta).powi(2) / n);
        let mut scaled = am.clone();
        for (i, mut row) in scaled.row_iter_mut().enumerate() {
            row *= w[i];
        }
        CurvatureMatrix::Dense(am.tr_mul(&scaled))
    });
    let oracle = HuberSq {
        a: a.clone(),
        b: b.clone(),
        delta,
        shift: 0.5 * delta * delta,
    };
    let obj = Objective::new(format!("huber-lifted-sos(δ={delta})"), Arc::new(oracle), model)?;
    Ok(obj.with_sample_radius(3.0 * delta))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FStarEstimate {
    pub value: f64,
    pub x: Vec<f64>,
    pub grad_norm: f64,
    pub iterations: usize,
    /// `false` when the budget ran out before `‖∇f‖ ≤ tol`.
    pub converged: bool,
}

/// Safety margin subtracted from the best value found.
pub fn f_star_margin(f: f64) -> f64 {
    1e-12 * (1.0 + f.abs())
}

fn fd_hessian(obj: &Objective, x: &Vector) -> Matrix {
    let d = x.len();
    let mut h = Matrix::zeros(d, d);
    for j in 0..d {
        let step = 1e-5 * x[j].abs().max(1.0);
        let mut xp = x.clone();
        let mut xm = x.clone();
        xp[j] += step;
        xm[j] -= step;
        let col = (obj.gradient(&xp) - obj.gradient(&xm)) / (2.0 * step);
        h.set_column(j, &col);
    }
    (&h + h.transpose()) * 0.5
}

/// Newton step with a finite-difference Hessian, damped until `f` decreases.
fn newton_polish(obj: &Objective, x: &mut Vector, fx: &mut f64, gx: &mut Vector, tol: f64, max_steps: usize) -> usize {
    let d = x.len();
    let mut used = 0;
    while used < max_steps && gx.norm() > tol {
        used += 1;
        let h = fd_hessian(obj, x);
        let scale = h.diagonal().amax().max(1e-300);
        let mut shift = 0.0;
        let dir = loop {
            let shifted = &h + Matrix::identity(d, d) * shift;
            if let Some(ch) = shifted.cholesky() {
                break Some(ch.solve(gx));
            }
            shift = if shift == 0.0 { 1e-12 * scale } else { shift * 10.0 };
            if shift > scale {
                break None;
            }
        };
        let Some(dir) = dir else { break };
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..40 {
            let cand = &*x - &dir * t;
            let (fc, gc) = obj.value_and_gradient(&cand);
            if fc <= *fx || gc.norm() < gx.norm() * 0.5 {
                *x = cand;
                *fx = fc;
                *gx = gc;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    used
}

/// Reference estimate of `f*`.
///
/// For `d ≤ 500` starts with damped finite-difference Newton steps; then
/// (or otherwise) runs accelerated gradient descent with backtracking and
/// adaptive restart, and polishes with Newton again. Returns the final value minus [`f_star_margin`].
pub fn estimate_f_star(obj: &Objective, x0: &Vector, budget: usize, tol: f64) -> Result<FStarEstimate> {
    if x0.len() != obj.dim() {
        return Err(Error::DimensionMismatch {
            expected: obj.dim(),
            found: x0.len(),
        });
    }
    let mut x = x0.clone();
    let (mut fx, mut gx) = obj.value_and_gradient(&x);
    let mut iterations = 0;
    if obj.dim() <= 500 {
        iterations += newton_polish(obj, &mut x, &mut fx, &mut gx, tol, 100);
    }
    let mut y = x.clone();
    let mut x_prev = x.clone();
    let mut t_mom = 1.0f64;
    let mut lip = obj.smoothness.unwrap_or(1.0).max(1e-12);
    while iterations < budget && gx.norm() > tol {
        iterations += 1;
        let (fy, gy) = obj.value_and_gradient(&y);
        // backtracking on the quadratic upper model at y
        let mut x_new;
        let mut f_new;
        loop {
            x_new = &y - &gy / lip;
            f_new = obj.value(&x_new);
            if f_new <= fy - 0.5 * gy.norm_squared() / lip + 1e-15 * fy.abs() || lip > 1e300 {
                break;
            }
            lip *= 2.0;
        }
        if f_new > fx {
            // restart momentum
            y = x.clone();
            t_mom = 1.0;
            continue;
        }
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t_mom * t_mom).sqrt());
        y = &x_new + (&x_new - &x_prev) * ((t_mom - 1.0) / t_next);
        t_mom = t_next;
        x_prev = x_new.clone();
        x = x_new;
        fx = f_new;
        gx = obj.gradient(&x);
        lip *= 0.9;
    }
    if obj.dim() <= 500 && gx.norm() > tol {
        iterations += newton_polish(obj, &mut x, &mut fx, &mut gx, tol, 50);
    }
    let grad_norm = gx.norm();
    Ok(FStarEstimate {
        value: fx - f_star_margin(fx),
        x: x.as_slice().to_vec(),
        grad_norm,
        iterations,
        converged: grad_norm <= tol,
    })
}
