//! Absolutely convex functions, `φ(x) ≥ |φ(y) + ⟨∇φ(y), x − y⟩|`, and the
//! sum-of-squares objectives they generate.

use std::fmt;
use std::sync::Arc;

use crate::curvature::{pnorm, pnorm_gradient, CurvatureModel};
use crate::error::{Error, Result};
use crate::matrix::{lambda_max_gram, CurvatureMatrix, Matrix, Structure, Vector};
use crate::objectives::{huber, huber_derivative, Objective};

type ValueFn = dyn Fn(&Vector) -> f64 + Send + Sync;
type GradFn = dyn Fn(&Vector) -> Vector + Send + Sync;

/// Value, a fixed subgradient selection, and an optional bound on its norm.
#[derive(Clone)]
pub struct AbsConvexFunction {
    dim: usize,
    value: Arc<ValueFn>,
    subgrad: Arc<GradFn>,
    grad_bound: Option<f64>,
    label: String,
}

impl fmt::Debug for AbsConvexFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("AbsConvexFunction")
            .field("label", &self.label)
            .field("dim", &self.dim)
            .field("grad_bound", &self.grad_bound)
            .finish()
    }
}

fn invalid(msg: String) -> Error {
    Error::InvalidParameter(msg)
}

fn sign(t: f64) -> f64 {
    if t > 0.0 {
        1.0
    } else if t < 0.0 {
        -1.0
    } else {
        0.0
    }
}

impl AbsConvexFunction {
    pub fn new<F, G>(dim: usize, grad_bound: Option<f64>, label: impl Into<String>, value: F, subgrad: G) -> Self
    where
        F: Fn(&Vector) -> f64 + Send + Sync + 'static,
        G: Fn(&Vector) -> Vector + Send + Sync + 'static,
    {
        AbsConvexFunction {
            dim,
            value: Arc::new(value),
            subgrad: Arc::new(subgrad),
            grad_bound,
            label: label.into(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn value(&self, x: &Vector) -> f64 {
        (self.value)(x)
    }

    pub fn subgrad(&self, x: &Vector) -> Vector {
        (self.subgrad)(x)
    }

    pub fn grad_bound(&self) -> Option<f64> {
        self.grad_bound
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// `φ + α` for `α ≥ 0`.
    pub fn add_const(&self, alpha: f64) -> Result<Self> {
        if !(alpha >= 0.0) {
            return Err(invalid(format!("shift must be ≥ 0, got {alpha}")));
        }
        let (f, g) = (self.value.clone(), self.subgrad.clone());
        Ok(Self::new(self.dim, self.grad_bound, format!("{} + {alpha}", self.label), move |x| f(x) + alpha, move |x| g(x)))
    }

    /// `α·φ` for `α ≥ 0`.
    pub fn scale(&self, alpha: f64) -> Result<Self> {
        if !(alpha >= 0.0) {
            return Err(invalid(format!("scale must be ≥ 0, got {alpha}")));
        }
        let (f, g) = (self.value.clone(), self.subgrad.clone());
        Ok(Self::new(
            self.dim,
            self.grad_bound.map(|m| alpha * m),
            format!("{alpha}·{}", self.label),
            move |x| alpha * f(x),
            move |x| g(x) * alpha,
        ))
    }

    /// `φ₁ + φ₂`.
    pub fn sum(&self, other: &Self) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: other.dim,
            });
        }
        let (f1, g1, f2, g2) = (self.value.clone(), self.subgrad.clone(), other.value.clone(), other.subgrad.clone());
        let bound = match (self.grad_bound, other.grad_bound) {
            (Some(a), Some(b)) => Some(a + b),
            _ => None,
        };
        Ok(Self::new(
            self.dim,
            bound,
            format!("{} + {}", self.label, other.label),
            move |x| f1(x) + f2(x),
            move |x| g1(x) + g2(x),
        ))
    }

    /// `y ↦ φ(Ay + b)` with `A` of shape `dim(φ) × k`.
    pub fn precompose(&self, a: &Matrix, b: &Vector) -> Result<Self> {
        if a.nrows() != self.dim || b.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: if a.nrows() != self.dim { a.nrows() } else { b.len() },
            });
        }
        let op_norm = lambda_max_gram(a).sqrt();
        let (f, g) = (self.value.clone(), self.subgrad.clone());
        let (a1, b1) = (a.clone(), b.clone());
        let (a2, b2) = (a.clone(), b.clone());
        Ok(Self::new(
            a.ncols(),
            self.grad_bound.map(|m| m * op_norm),
            format!("{}∘affine", self.label),
            move |y| f(&(&a1 * y + &b1)),
            move |y| a2.tr_mul(&g(&(&a2 * y + &b2))),
        ))
    }

    /// `max(c, φ)` for `c ≥ 0`; the subgradient is zero on the flat part.
    pub fn max_const(&self, c: f64) -> Result<Self> {
        if !(c >= 0.0) {
            return Err(invalid(format!("constant must be ≥ 0, got {c}")));
        }
        let (f, g) = (self.value.clone(), self.subgrad.clone());
        let dim = self.dim;
        Ok(Self::new(
            dim,
            self.grad_bound,
            format!("max({c}, {})", self.label),
            {
                let f = f.clone();
                move |x| f(x).max(c)
            },
            move |x| if f(x) > c { g(x) } else { Vector::zeros(dim) },
        ))
    }
}

/// `max(0, |φ(y) + ⟨∇φ(y), x − y⟩| − φ(x))`.
pub fn check_absolute_convexity(phi: &AbsConvexFunction, x: &Vector, y: &Vector) -> Result<f64> {
    for v in [x, y] {
        if v.len() != phi.dim() {
            return Err(Error::DimensionMismatch {
                expected: phi.dim(),
                found: v.len(),
            });
        }
    }
    let lin = phi.value(y) + phi.subgrad(y).dot(&(x - y));
    Ok((lin.abs() - phi.value(x)).max(0.0))
}

/// `|⟨a, x⟩ + b|`, subgradient `sign(⟨a, x⟩ + b)·a` with `sign(0) = 0`.
pub fn abs_affine(a: Vector, b: f64) -> AbsConvexFunction {
    let bound = a.norm();
    let a2 = a.clone();
    AbsConvexFunction::new(
        a.len(),
        Some(bound),
        "|⟨a,x⟩+b|",
        move |x| (a.dot(x) + b).abs(),
        move |x| &a2 * sign(a2.dot(x) + b),
    )
}

/// `‖x‖_p` on `R^d`.
///
/// The gradient selection is `sign(yᵢ)(|yᵢ|/‖y‖_p)^{p−1}`, zero at the
/// origin. Its Euclidean norm is bounded by `d^{max(0, 1/2 − 1/q)}` with
/// `q = p/(p−1)`.
pub fn pnorm_acv(p: f64, d: usize) -> Result<AbsConvexFunction> {
    if !(p >= 1.0) || !p.is_finite() {
        return Err(invalid(format!("p must be ≥ 1, got {p}")));
    }
    let inv_q = 1.0 - 1.0 / p;
    let bound = (d as f64).powf((0.5 - inv_q).max(0.0));
    Ok(AbsConvexFunction::new(
        d,
        Some(bound),
        format!("‖x‖_{p}"),
        move |x| pnorm(x, p),
        move |x| pnorm_gradient(x, p),
    ))
}

/// `h_δ(x) + δ²/2` in one dimension.
pub fn huber_lifted(delta: f64) -> Result<AbsConvexFunction> {
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(invalid(format!("δ must be positive, got {delta}")));
    }
    let lift = 0.5 * delta * delta;
    Ok(AbsConvexFunction::new(
        1,
        Some(delta),
        format!("h_{delta} + δ²/2"),
        move |x| huber(x[0], delta) + lift,
        move |x| Vector::from_element(1, huber_derivative(x[0], delta)),
    ))
}

/// `δ√(1 + x²/δ²)` in one dimension.
pub fn pseudo_huber(delta: f64) -> Result<AbsConvexFunction> {
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(invalid(format!("δ must be positive, got {delta}")));
    }
    Ok(AbsConvexFunction::new(
        1,
        Some(1.0),
        format!("pseudo-huber(δ={delta})"),
        move |x| delta * (1.0 + (x[0] / delta).powi(2)).sqrt(),
        move |x| Vector::from_element(1, x[0] / (1.0 + (x[0] / delta).powi(2)).sqrt() / delta),
    ))
}

/// `√(a x² + b)` in one dimension.
pub fn sqrt_quad(a: f64, b: f64) -> Result<AbsConvexFunction> {
    if !(a > 0.0) || !(b >= 0.0) {
        return Err(invalid(format!("need a > 0 and b ≥ 0, got a={a}, b={b}")));
    }
    Ok(AbsConvexFunction::new(
        1,
        Some(a.sqrt()),
        format!("√({a}x²+{b})"),
        move |x| (a * x[0] * x[0] + b).sqrt(),
        move |x| {
            let v = (a * x[0] * x[0] + b).sqrt();
            Vector::from_element(1, if v == 0.0 { 0.0 } else { a * x[0] / v })
        },
    ))
}

fn check_family(phis: &[AbsConvexFunction]) -> Result<usize> {
    let first = phis.first().ok_or(Error::EmptyDataset)?;
    let d = first.dim();
    if let Some(bad) = phis.iter().find(|p| p.dim() != d) {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: bad.dim(),
        });
    }
    Ok(d)
}

fn sos_value_grad(phis: &[AbsConvexFunction], x: &Vector) -> (f64, Vector) {
    let n = phis.len() as f64;
    let mut f = 0.0;
    let mut g = Vector::zeros(x.len());
    for phi in phis {
        let v = phi.value(x);
        f += v * v;
        g.axpy(2.0 * v / n, &phi.subgrad(x), 1.0);
    }
    (f / n, g)
}

/// `f = (1/n)Σφᵢ²` with `C(x) = (2/n)Σ∇φᵢ(x)∇φᵢ(x)ᵀ`; lower bound only.
pub fn sum_of_squares_problem(phis: Vec<AbsConvexFunction>) -> Result<Objective> {
    let d = check_family(&phis)?;
    let phis = Arc::new(phis);
    let n = phis.len() as f64;
    let structure = if phis.len() == 1 { Structure::RankOne } else { Structure::Dense };
    let pm = phis.clone();
    let model = CurvatureModel::new(d, structure, None, "(2/n)Σ∇φᵢ∇φᵢᵀ", move |x| {
        if pm.len() == 1 {
            return CurvatureMatrix::rank_one(2.0, pm[0].subgrad(x)).expect("positive weight");
        }
        let mut m = Matrix::zeros(d, d);
        for phi in pm.iter() {
            let g = phi.subgrad(x);
            m.ger(2.0 / n, &g, &g, 1.0);
        }
        CurvatureMatrix::Dense(m)
    });
    let (pf, pg) = (phis.clone(), phis.clone());
    Objective::from_fns(
        format!("sos[{}]", phis.len()),
        d,
        move |x| sos_value_grad(&pf, x).0,
        move |x| sos_value_grad(&pg, x).1,
        model,
    )
}

/// Same `f` as [`sum_of_squares_problem`] with the rank-one map
/// `C(x) = ∇f∇fᵀ/(2f)`, valid because `√(nf) = ‖(φ₁, …, φₙ)‖₂` is itself
/// absolutely convex.
pub fn sum_of_squares_rank_one(phis: Vec<AbsConvexFunction>) -> Result<Objective> {
    let d = check_family(&phis)?;
    let phis = Arc::new(phis);
    let pm = phis.clone();
    let model = CurvatureModel::new(d, Structure::RankOne, None, "∇f∇fᵀ/(2f)", move |x| {
        let (f, g) = sos_value_grad(&pm, x);
        if !(f > 0.0) {
            return CurvatureMatrix::zero(d);
        }
        CurvatureMatrix::rank_one(0.5 / f, g).expect("positive weight")
    });
    let (pf, pg) = (phis.clone(), phis.clone());
    Objective::from_fns(
        format!("sos-rank-one[{}]", phis.len()),
        d,
        move |x| sos_value_grad(&pf, x).0,
        move |x| sos_value_grad(&pg, x).1,
        model,
    )
}

/// Shift `β` making a convex 1-D `f` absolutely convex on `[a, b]`:
/// `β = α(b − a)/2 − (f(a) + f(b))/2` with `α = max(|f′(a)|, |f′(b)|)`.
pub fn lift_on_interval<F, D>(f: F, df: D, a: f64, b: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    if !(a < b) {
        return Err(invalid(format!("need a < b, got [{a}, {b}]")));
    }
    let alpha = df(a).abs().max(df(b).abs());
    Ok(alpha * (b - a) / 2.0 - (f(a) + f(b)) / 2.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn v(xs: &[f64]) -> Vector {
        Vector::from_column_slice(xs)
    }

    fn linear() -> AbsConvexFunction {
        AbsConvexFunction::new(1, Some(1.0), "x", |x| x[0], |_| v(&[1.0]))
    }

    #[test]
    fn check_examples() {
        let n2 = pnorm_acv(2.0, 3).unwrap();
        assert_eq!(check_absolute_convexity(&n2, &v(&[1.0, 2.0, 3.0]), &v(&[1.0, 2.0, 3.0])).unwrap(), 0.0);
        assert_eq!(check_absolute_convexity(&linear(), &v(&[-1.0]), &v(&[1.0])).unwrap(), 2.0);
        assert!(check_absolute_convexity(&n2, &v(&[1.0]), &v(&[1.0, 2.0, 3.0])).is_err());
    }

    #[test]
    fn abs_affine_examples() {
        let phi = abs_affine(v(&[1.0]), 0.0);
        assert_eq!(phi.value(&v(&[2.0])), 2.0);
        assert_eq!(phi.subgrad(&v(&[2.0])), v(&[1.0]));
        assert_eq!(phi.subgrad(&v(&[0.0])), v(&[0.0]));
        let phi = abs_affine(v(&[2.0, 0.0]), -1.0);
        assert_eq!(phi.value(&v(&[1.0, 5.0])), 1.0);
        assert_eq!(phi.subgrad(&v(&[1.0, 5.0])), v(&[2.0, 0.0]));
    }

    #[test]
    fn catalog_examples() {
        let s = sqrt_quad(1.0, 0.0).unwrap();
        for x in [-3.0, 0.0, 2.5] {
            assert_eq!(s.value(&v(&[x])), f64::abs(x));
        }
        let ph = pseudo_huber(1.0).unwrap();
        assert_eq!(ph.value(&v(&[0.0])), 1.0);
        assert_eq!(ph.subgrad(&v(&[0.0])), v(&[0.0]));
        assert_eq!(huber_lifted(2.0).unwrap().value(&v(&[3.0])), 6.0);
        assert!(huber_lifted(0.0).is_err());
        assert!(sqrt_quad(0.0, 1.0).is_err());
        assert!(pnorm_acv(0.5, 2).is_err());
    }

    #[test]
    fn sos_examples() {
        let single = sum_of_squares_problem(vec![abs_affine(v(&[1.0]), 0.0)]).unwrap();
        assert_eq!(single.value(&v(&[1.5])), 2.25);
        assert_eq!(single.model.eval(&v(&[-0.7])).unwrap().to_dense()[(0, 0)], 2.0);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..1000 {
            let x = v(&[rng.random_range(-10.0..10.0)]);
            let y = v(&[rng.random_range(-10.0..10.0)]);
            assert!(single.check_lower_bound(&x, &y).unwrap() <= 1e-12 * (1.0 + x[0] * x[0]));
        }

        let a = Matrix::from_row_slice(3, 2, &[1.0, 2.0, -1.0, 0.5, 0.0, 3.0]);
        let b = v(&[0.1, 0.2, -0.3]);
        let phis = (0..3).map(|i| abs_affine(a.row(i).transpose(), -b[i])).collect();
        let sos = sum_of_squares_problem(phis).unwrap();
        let c = sos.model.eval(&v(&[2.0, -1.0])).unwrap().to_dense();
        assert_relative_eq!(c, a.transpose() * &a * (2.0 / 3.0), epsilon = 1e-14);

        let n2 = pnorm_acv(2.0, 2).unwrap();
        let pair = sum_of_squares_problem(vec![n2.clone(), n2]).unwrap();
        let c = pair.model.eval(&v(&[1.0, 0.0])).unwrap().to_dense();
        assert_eq!(c, Matrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 0.0]));

        assert!(matches!(sum_of_squares_problem(vec![]), Err(Error::EmptyDataset)));
    }

    #[test]
    fn lift_examples() {
        assert_eq!(lift_on_interval(|_| 0.0, |_| 0.0, 0.0, 1.0).unwrap(), 0.0);
        assert_eq!(lift_on_interval(|x| x * x, |x| 2.0 * x, -1.0, 1.0).unwrap(), 1.0);
        assert_eq!(lift_on_interval(|x| x, |_| 1.0, 0.0, 2.0).unwrap(), 0.0);
        assert!(lift_on_interval(|x| x, |_| 1.0, 1.0, 1.0).is_err());
    }

    fn catalog(d: usize) -> Vec<AbsConvexFunction> {
        let lift = |phi: AbsConvexFunction| {
            let row = Matrix::from_fn(1, d, |_, j| 0.3 * (j as f64 + 1.0));
            phi.precompose(&row, &v(&[0.5])).unwrap()
        };
        vec![
            pnorm_acv(1.0, d).unwrap(),
            pnorm_acv(2.0, d).unwrap(),
            pnorm_acv(3.5, d).unwrap(),
            abs_affine(Vector::from_fn(d, |i, _| i as f64 - 1.0), 0.7),
            lift(huber_lifted(1.5).unwrap()),
            lift(pseudo_huber(0.8).unwrap()),
            lift(sqrt_quad(2.0, 3.0).unwrap()),
            pnorm_acv(2.0, d).unwrap().add_const(1.0).unwrap().scale(2.0).unwrap(),
            pnorm_acv(1.0, d).unwrap().sum(&abs_affine(Vector::from_element(d, 1.0), -2.0)).unwrap(),
            pnorm_acv(2.0, d).unwrap().max_const(3.0).unwrap(),
        ]
    }

    #[test]
    fn catalog_is_absolutely_convex_with_bounded_subgradients() {
        let d = 3;
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for phi in catalog(d) {
            for _ in 0..2000 {
                let x = Vector::from_fn(d, |_, _| rng.random_range(-10.0..10.0));
                let y = Vector::from_fn(d, |_, _| rng.random_range(-10.0..10.0));
                assert!(phi.value(&x) >= 0.0);
                let viol = check_absolute_convexity(&phi, &x, &y).unwrap();
                assert!(viol <= 1e-9 * (1.0 + phi.value(&x)), "{}: {viol}", phi.label());
                if let Some(m) = phi.grad_bound() {
                    assert!(phi.subgrad(&x).norm() <= m + 1e-9, "{}", phi.label());
                }
            }
        }
    }

    #[test]
    fn zero_minimum_functions_are_homogeneous_even_and_subadditive() {
        let d = 4;
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let phis = [
            pnorm_acv(1.0, d).unwrap(),
            pnorm_acv(2.0, d).unwrap(),
            pnorm_acv(5.0, d).unwrap(),
            abs_affine(v(&[1.0, -2.0, 0.5, 3.0]), 0.0),
        ];
        for phi in &phis {
            for _ in 0..1000 {
                let x = Vector::from_fn(d, |_, _| rng.random_range(-10.0..10.0));
                let y = Vector::from_fn(d, |_, _| rng.random_range(-10.0..10.0));
                let t = rng.random_range(0.0..5.0);
                let fx = phi.value(&x);
                assert_relative_eq!(phi.value(&(&x * t)), t * fx, max_relative = 1e-12);
                assert!((fx - phi.subgrad(&x).dot(&x)).abs() <= 1e-9 * (1.0 + fx));
                assert_relative_eq!(phi.value(&-&x), fx, max_relative = 1e-15);
                assert!(phi.value(&(&x + &y)) <= fx + phi.value(&y) + 1e-9);
            }
        }
    }

    #[test]
    fn squaring_gives_the_lower_bound() {
        let d = 3;
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for phi in catalog(d) {
            let f = sum_of_squares_problem(vec![phi.clone()]).unwrap();
            let r = sum_of_squares_rank_one(vec![phi.clone(), phi.scale(0.5).unwrap()]).unwrap();
            for _ in 0..1000 {
                let x = Vector::from_fn(d, |_, _| rng.random_range(-10.0..10.0));
                let y = Vector::from_fn(d, |_, _| rng.random_range(-10.0..10.0));
                let tol = 1e-9 * (1.0 + f.value(&x));
                assert!(f.check_lower_bound(&x, &y).unwrap() <= tol, "{}", phi.label());
                assert!(r.check_lower_bound(&x, &y).unwrap() <= 1e-9 * (1.0 + r.value(&x)), "{}", phi.label());
            }
        }
    }

    #[test]
    fn lifted_square_passes_on_interval() {
        let beta = lift_on_interval(|x| x * x, |x| 2.0 * x, -1.0, 1.0).unwrap();
        let phi = AbsConvexFunction::new(1, None, "x²+β", move |x| x[0] * x[0] + beta, |x| x * 2.0);
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..10_000 {
            let x = v(&[rng.random_range(-1.0..=1.0)]);
            let y = v(&[rng.random_range(-1.0..=1.0)]);
            assert!(check_absolute_convexity(&phi, &x, &y).unwrap() <= 1e-12);
        }
    }
}
