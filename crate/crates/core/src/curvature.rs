//! Curvature mappings `x ↦ C(x)` paired with an optional smoothness excess
//! `L_C`, and the calculus that combines them.
//!
//! A model claims the lower bound
//! `f(x) ≥ f(y) + ⟨∇f(y), x − y⟩ + ½‖x − y‖²_{C(y)}` and, when `excess` is
//! present, the upper bound with `C(y) + L_C·I` in place of `C(y)`.
//! Neither claim is checked here; see [`crate::objectives`] for the
//! sampled verifiers.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::matrix::{lambda_max_gram, CurvatureMatrix, Matrix, Structure, Vector};

/// Points with `‖x‖` below this map to the zero matrix wherever the
/// formula carries a `1/‖x‖` factor.
pub const ORIGIN_EPS: f64 = 1e-300;

type MapFn = dyn Fn(&Vector) -> CurvatureMatrix + Send + Sync;

#[derive(Clone)]
pub struct CurvatureModel {
    dim: usize,
    map: Arc<MapFn>,
    excess: Option<f64>,
    structure: Structure,
    label: String,
}

impl fmt::Debug for CurvatureModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CurvatureModel")
            .field("label", &self.label)
            .field("dim", &self.dim)
            .field("structure", &self.structure)
            .field("excess", &self.excess)
            .finish()
    }
}

fn invalid(msg: String) -> Error {
    Error::InvalidParameter(msg)
}

impl CurvatureModel {
    pub fn new<F>(dim: usize, structure: Structure, excess: Option<f64>, label: impl Into<String>, map: F) -> Self
    where
        F: Fn(&Vector) -> CurvatureMatrix + Send + Sync + 'static,
    {
        CurvatureModel {
            dim,
            map: Arc::new(map),
            excess,
            structure,
            label: label.into(),
        }
    }

    pub fn zero(dim: usize) -> Self {
        Self::new(dim, Structure::Zero, None, "zero", move |_| CurvatureMatrix::zero(dim))
    }

    /// A model whose map does not depend on the point.
    pub fn constant(matrix: CurvatureMatrix, excess: Option<f64>, label: impl Into<String>) -> Self {
        let dim = matrix.dim();
        let structure = matrix.structure();
        Self::new(dim, structure, excess, label, move |_| matrix.clone())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn excess(&self) -> Option<f64> {
        self.excess
    }

    pub fn structure(&self) -> Structure {
        self.structure
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn with_excess(mut self, excess: Option<f64>) -> Self {
        self.excess = excess;
        self
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// `C(x)`.
    pub fn eval(&self, x: &Vector) -> Result<CurvatureMatrix> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: x.len(),
            });
        }
        Ok((self.map)(x))
    }
}

fn sum_structure(a: Structure, b: Structure) -> Structure {
    use Structure::*;
    match (a, b) {
        (Zero, x) | (x, Zero) => x,
        (ScaledIdentity, ScaledIdentity) => ScaledIdentity,
        (ScaledIdentity | Diagonal, ScaledIdentity | Diagonal) => Diagonal,
        _ => Dense,
    }
}

/// `x ↦ C₁(x) + C₂(x)`, with `L₁ + L₂` when both excesses are known.
pub fn sum_models(m1: &CurvatureModel, m2: &CurvatureModel) -> Result<CurvatureModel> {
    if m1.dim != m2.dim {
        return Err(Error::DimensionMismatch {
            expected: m1.dim,
            found: m2.dim,
        });
    }
    let excess = match (m1.excess, m2.excess) {
        (Some(a), Some(b)) => Some(a + b),
        _ => None,
    };
    let (f1, f2) = (m1.map.clone(), m2.map.clone());
    Ok(CurvatureModel::new(
        m1.dim,
        sum_structure(m1.structure, m2.structure),
        excess,
        format!("{} + {}", m1.label, m2.label),
        move |x| {
            f1(x)
                .add(&f2(x))
                .expect("summands share the model dimension")
        },
    ))
}

/// `x ↦ β·C(x)` with excess `β·L_C`.
pub fn scale_model(m: &CurvatureModel, beta: f64) -> Result<CurvatureModel> {
    if !(beta >= 0.0) || !beta.is_finite() {
        return Err(invalid(format!("scale factor must be finite and ≥ 0, got {beta}")));
    }
    if beta == 0.0 {
        return Ok(CurvatureModel::zero(m.dim).with_excess(m.excess.map(|_| 0.0)));
    }
    let f = m.map.clone();
    Ok(CurvatureModel::new(
        m.dim,
        m.structure,
        m.excess.map(|l| beta * l),
        format!("{beta}·{}", m.label),
        move |x| f(x).scale(beta).expect("beta validated"),
    ))
}

/// Model for `y ↦ f(Ay + b)` given a model of `f`: `y ↦ Aᵀ C(Ay + b) A`.
///
/// `A` is `dim(m) × k`. The excess becomes `L_C · λ_max(AᵀA)`.
pub fn affine_precompose(m: &CurvatureModel, a: &Matrix, b: &Vector) -> Result<CurvatureModel> {
    if a.nrows() != m.dim {
        return Err(Error::DimensionMismatch {
            expected: m.dim,
            found: a.nrows(),
        });
    }
    if b.len() != m.dim {
        return Err(Error::DimensionMismatch {
            expected: m.dim,
            found: b.len(),
        });
    }
    let k = a.ncols();
    let a_is_diag = a.is_square() && (0..k).all(|i| (0..k).all(|j| i == j || a[(i, j)] == 0.0));
    let structure = match m.structure {
        Structure::Zero => Structure::Zero,
        Structure::RankOne => Structure::RankOne,
        Structure::ScaledIdentity | Structure::Diagonal if a_is_diag => Structure::Diagonal,
        _ => Structure::Dense,
    };
    let excess = match m.excess {
        Some(0.0) => Some(0.0),
        Some(l) => Some(l * lambda_max_gram(a)),
        None => None,
    };
    let f = m.map.clone();
    let (a, b) = (a.clone(), b.clone());
    Ok(CurvatureModel::new(k, structure, excess, format!("{}∘affine", m.label), move |y| {
        let inner = &a * y + &b;
        f(&inner).congruence(&a).expect("shapes validated")
    }))
}

/// Coordinatewise curvature of the squared Huber loss `h_δ²`: `x_i²` inside
/// `[−δ, δ]`, `δ²` outside. Excess `2δ²`.
pub fn huber_sq_model(delta: f64, dim: usize) -> Result<CurvatureModel> {
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(invalid(format!("Huber δ must be positive, got {delta}")));
    }
    let d2 = delta * delta;
    Ok(CurvatureModel::new(
        dim,
        Structure::Diagonal,
        Some(2.0 * d2),
        format!("huber²(δ={delta})"),
        move |x| CurvatureMatrix::Diagonal(x.map(|xi| if xi.abs() <= delta { xi * xi } else { d2 })),
    ))
}

pub(crate) fn pnorm(x: &Vector, p: f64) -> f64 {
    if p == 2.0 {
        return x.norm();
    }
    if p == 1.0 {
        return x.iter().map(|v| v.abs()).sum();
    }
    let m = x.amax();
    if m == 0.0 {
        return 0.0;
    }
    // scale to avoid overflow for large p
    m * x.iter().map(|v| (v.abs() / m).powf(p)).sum::<f64>().powf(1.0 / p)
}

/// `∇‖x‖_p` with the selection `sign(x_i)(|x_i|/‖x‖_p)^{p−1}`; zero at the origin.
pub(crate) fn pnorm_gradient(x: &Vector, p: f64) -> Vector {
    let n = pnorm(x, p);
    if n < ORIGIN_EPS {
        return Vector::zeros(x.len());
    }
    x.map(|xi| {
        if xi == 0.0 {
            0.0
        } else if p == 1.0 {
            xi.signum()
        } else {
            xi.signum() * (xi.abs() / n).powf(p - 1.0)
        }
    })
}

/// `‖x‖_p²` with `C(x) = (2/‖x‖_p^{p−2})·Diag(|x_i|^{p−2})`, excess `2(p−1)`.
pub fn pnorm_sq_diag_model(p: f64, dim: usize) -> Result<CurvatureModel> {
    if !(p >= 2.0) || !p.is_finite() {
        return Err(invalid(format!("p must be ≥ 2, got {p}")));
    }
    Ok(CurvatureModel::new(
        dim,
        Structure::Diagonal,
        Some(2.0 * (p - 1.0)),
        format!("‖x‖_{p}² diag"),
        move |x| {
            if p == 2.0 {
                return CurvatureMatrix::ScaledIdentity { dim: x.len(), c: 2.0 };
            }
            let n = pnorm(x, p);
            if n < ORIGIN_EPS {
                return CurvatureMatrix::zero(x.len());
            }
            CurvatureMatrix::Diagonal(x.map(|xi| 2.0 * (xi.abs() / n).powf(p - 2.0)))
        },
    ))
}

/// `‖x‖_p²` with `C(x) = 2∇‖x‖_p ∇‖x‖_pᵀ`. Valid for `p ≥ 1` since `‖·‖_p` is
/// absolutely convex; the excess `2(p−1)` is attached only for `p ≥ 2`.
pub fn pnorm_sq_rank1_model(p: f64, dim: usize) -> Result<CurvatureModel> {
    if !(p >= 1.0) || !p.is_finite() {
        return Err(invalid(format!("p must be ≥ 1, got {p}")));
    }
    let excess = (p >= 2.0).then_some(2.0 * (p - 1.0));
    Ok(CurvatureModel::new(dim, Structure::RankOne, excess, format!("‖x‖_{p}² rank-one"), move |x| {
        CurvatureMatrix::rank_one(2.0, pnorm_gradient(x, p)).expect("weight is positive")
    }))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LppVariant {
    /// `∇²f/(p−1) = p·Diag(|x_i|^{p−2})`
    Diagonal,
    /// `∇f∇fᵀ/(p·f)`
    RankOne,
}

/// `f(x) = ‖x‖_p^p`, lower bound only.
pub fn lpp_model(p: f64, dim: usize, variant: LppVariant) -> Result<CurvatureModel> {
    if !(p >= 2.0) || !p.is_finite() {
        return Err(invalid(format!("p must be ≥ 2, got {p}")));
    }
    Ok(match variant {
        LppVariant::Diagonal => CurvatureModel::new(dim, Structure::Diagonal, None, format!("‖x‖_{p}^{p} diag"), move |x| {
            if p == 2.0 {
                return CurvatureMatrix::ScaledIdentity { dim: x.len(), c: 2.0 };
            }
            CurvatureMatrix::Diagonal(x.map(|xi| p * xi.abs().powf(p - 2.0)))
        }),
        LppVariant::RankOne => CurvatureModel::new(dim, Structure::RankOne, None, format!("‖x‖_{p}^{p} rank-one"), move |x| {
            let f: f64 = x.iter().map(|xi| xi.abs().powf(p)).sum();
            if !(f > 0.0) {
                return CurvatureMatrix::zero(x.len());
            }
            let grad = x.map(|xi| p * xi.signum() * xi.abs().powf(p - 1.0));
            CurvatureMatrix::rank_one(1.0 / (p * f), grad).expect("weight is positive")
        }),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TwoNormPowVariant {
    /// `p‖y‖^{p−2} I`
    Identity,
    /// `p‖y‖^{p−4} y yᵀ`
    RankOne,
}

/// `f(x) = ‖x‖₂^p`, lower bound only.
pub fn two_norm_pow_model(p: f64, dim: usize, variant: TwoNormPowVariant) -> Result<CurvatureModel> {
    if !(p >= 2.0) || !p.is_finite() {
        return Err(invalid(format!("p must be ≥ 2, got {p}")));
    }
    Ok(match variant {
        TwoNormPowVariant::Identity => {
            CurvatureModel::new(dim, Structure::ScaledIdentity, None, format!("‖x‖₂^{p} identity"), move |x| {
                let c = if p == 2.0 { 2.0 } else { p * x.norm().powf(p - 2.0) };
                CurvatureMatrix::scaled_identity(x.len(), c).expect("c ≥ 0")
            })
        }
        TwoNormPowVariant::RankOne => {
            CurvatureModel::new(dim, Structure::RankOne, None, format!("‖x‖₂^{p} rank-one"), move |x| {
                let n = x.norm();
                if n < ORIGIN_EPS {
                    return CurvatureMatrix::zero(x.len());
                }
                // p‖y‖^{p−4} y yᵀ = p‖y‖^{p−2} ŷŷᵀ
                CurvatureMatrix::rank_one(p * n.powf(p - 2.0), x / n).expect("weight ≥ 0")
            })
        }
    })
}

/// Structured form of a dense constant matrix.
fn detect_structure(m: &Matrix) -> CurvatureMatrix {
    let n = m.nrows();
    let off_diag_zero = (0..n).all(|i| (0..n).all(|j| i == j || m[(i, j)] == 0.0));
    if m.iter().all(|x| *x == 0.0) {
        CurvatureMatrix::zero(n)
    } else if off_diag_zero {
        let d = m.diagonal();
        if d.iter().all(|x| *x == d[0]) {
            CurvatureMatrix::ScaledIdentity { dim: n, c: d[0] }
        } else {
            CurvatureMatrix::Diagonal(d)
        }
    } else {
        CurvatureMatrix::Dense((m + m.transpose()) * 0.5)
    }
}

/// `f(x) = ‖x‖²_G`: constant `C ≡ 2G`, `L_C = 0`.
pub fn quadratic_model(g: &Matrix) -> Result<CurvatureModel> {
    if !g.is_square() {
        return Err(Error::DimensionMismatch {
            expected: g.nrows(),
            found: g.ncols(),
        });
    }
    let sym = (g + g.transpose()) * 0.5;
    if (g - g.transpose()).amax() > 1e-12 * (1.0 + g.amax()) {
        return Err(invalid("G must be symmetric".into()));
    }
    let eig = CurvatureMatrix::Dense(sym.clone()).eigendecompose_raw()?;
    let max_abs = eig.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    if eig.iter().any(|l| *l < -1e-12 * max_abs.max(1e-300)) {
        return Err(invalid("G must be positive semi-definite".into()));
    }
    let matrix = detect_structure(&(sym * 2.0));
    Ok(CurvatureModel::constant(matrix, Some(0.0), "2G"))
}

/// `C ≡ μI`; no excess unless one is attached with [`CurvatureModel::with_excess`].
pub fn strong_convexity_model(mu: f64, dim: usize) -> Result<CurvatureModel> {
    if !(mu > 0.0) || !mu.is_finite() {
        return Err(invalid(format!("μ must be positive, got {mu}")));
    }
    Ok(CurvatureModel::constant(
        CurvatureMatrix::ScaledIdentity { dim, c: mu },
        None,
        format!("{mu}·I"),
    ))
}

/// Coordinatewise model of `√(a x⁴ + b)`: `C(y) = 2a y²/f(y)`, excess `√(8a)`.
pub fn sqrt_quartic_model(a: f64, b: f64, dim: usize) -> Result<CurvatureModel> {
    if !(a > 0.0) || !(b > 0.0) {
        return Err(invalid(format!("need a, b > 0, got a={a}, b={b}")));
    }
    Ok(CurvatureModel::new(
        dim,
        Structure::Diagonal,
        Some((8.0 * a).sqrt()),
        format!("√({a}x⁴+{b})"),
        move |y| CurvatureMatrix::Diagonal(y.map(|yi| 2.0 * a * yi * yi / (a * yi.powi(4) + b).sqrt())),
    ))
}

impl CurvatureMatrix {
    /// Raw eigenvalues of the symmetric matrix, unclamped.
    pub(crate) fn eigendecompose_raw(&self) -> Result<Vector> {
        let m = self.to_dense();
        let eig = m
            .try_symmetric_eigen(f64::EPSILON, 10_000)
            .ok_or(Error::EigenNonConvergence)?;
        Ok(eig.eigenvalues)
    }
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

    fn dense_at(m: &CurvatureModel, x: &[f64]) -> Matrix {
        m.eval(&v(x)).unwrap().to_dense()
    }

    #[test]
    fn sum_examples() {
        let huber = huber_sq_model(1.0, 1).unwrap();
        let zero_l3 = CurvatureModel::zero(1).with_excess(Some(3.0));
        let s = sum_models(&huber, &zero_l3).unwrap();
        assert_eq!(s.excess(), Some(5.0));
        assert_eq!(dense_at(&s, &[0.5])[(0, 0)], 0.25);

        let id = sum_models(&CurvatureModel::zero(1), &huber).unwrap();
        assert_eq!(id.excess(), None);
        assert_eq!(dense_at(&id, &[3.0]), dense_at(&huber, &[3.0]));

        let a = strong_convexity_model(1.5, 2).unwrap();
        let b = strong_convexity_model(2.0, 2).unwrap();
        let s = sum_models(&a, &b).unwrap();
        assert_eq!(s.structure(), Structure::ScaledIdentity);
        assert_eq!(s.eval(&v(&[1.0, 2.0])).unwrap(), CurvatureMatrix::ScaledIdentity { dim: 2, c: 3.5 });

        assert!(sum_models(&a, &huber).is_err());
    }

    #[test]
    fn scale_examples() {
        let m = strong_convexity_model(2.0, 2).unwrap().with_excess(Some(1.0));
        let z = scale_model(&m, 0.0).unwrap();
        assert!(z.eval(&v(&[1.0, 1.0])).unwrap().is_zero());
        let same = scale_model(&m, 1.0).unwrap();
        assert_eq!(same.eval(&v(&[0.0, 1.0])).unwrap(), m.eval(&v(&[0.0, 1.0])).unwrap());
        let six = scale_model(&m, 3.0).unwrap();
        assert_eq!(six.eval(&v(&[0.0, 1.0])).unwrap(), CurvatureMatrix::ScaledIdentity { dim: 2, c: 6.0 });
        assert_eq!(six.excess(), Some(3.0));
        assert!(scale_model(&m, -1.0).is_err());
    }

    #[test]
    fn affine_examples() {
        let z = affine_precompose(&CurvatureModel::zero(2), &Matrix::identity(2, 3), &v(&[1.0, 1.0])).unwrap();
        assert_eq!(z.dim(), 3);
        assert!(z.eval(&v(&[1.0, 2.0, 3.0])).unwrap().is_zero());

        let huber = huber_sq_model(1.0, 2).unwrap();
        let id = affine_precompose(&huber, &Matrix::identity(2, 2), &Vector::zeros(2)).unwrap();
        for x in [[0.3, 4.0], [-2.0, 0.1]] {
            assert_eq!(dense_at(&id, &x), dense_at(&huber, &x));
        }
        assert_relative_eq!(id.excess().unwrap(), 2.0, max_relative = 1e-9);

        let c = 1.7;
        let m = strong_convexity_model(c, 1).unwrap();
        let out = affine_precompose(&m, &Matrix::from_element(1, 1, 2.0), &Vector::zeros(1)).unwrap();
        assert_eq!(dense_at(&out, &[0.4])[(0, 0)], 4.0 * c);
    }

    #[test]
    fn huber_examples() {
        let m = huber_sq_model(1.0, 1).unwrap();
        assert_eq!(dense_at(&m, &[0.5])[(0, 0)], 0.25);
        assert_eq!(dense_at(&m, &[5.0])[(0, 0)], 1.0);
        assert_eq!(m.excess(), Some(2.0));
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..1000 {
            let x = rng.random_range(-10.0..10.0);
            assert!(dense_at(&m, &[x])[(0, 0)] + m.excess().unwrap() <= 3.0);
        }
        assert!(huber_sq_model(0.0, 1).is_err());
    }

    #[test]
    fn pnorm_diag_examples() {
        let m2 = pnorm_sq_diag_model(2.0, 2).unwrap();
        assert_eq!(dense_at(&m2, &[0.3, -7.0]), Matrix::identity(2, 2) * 2.0);
        assert_eq!(m2.excess(), Some(2.0));
        let m3 = pnorm_sq_diag_model(3.0, 2).unwrap();
        let c = dense_at(&m3, &[1.0, 1.0]);
        // ‖(1,1)‖₃ = 2^{1/3}
        let expect = 2.0 / 2f64.powf(1.0 / 3.0);
        assert_relative_eq!(c[(0, 0)], expect, max_relative = 1e-14);
        assert_relative_eq!(expect, 1.5874, epsilon = 1e-4);
        assert_eq!(c[(0, 1)], 0.0);
        assert_eq!(pnorm_sq_diag_model(4.0, 2).unwrap().excess(), Some(6.0));
        assert!(dense_at(&m3, &[0.0, 0.0]).iter().all(|x| *x == 0.0));
        assert!(pnorm_sq_diag_model(1.5, 2).is_err());
    }

    #[test]
    fn pnorm_rank1_examples() {
        let m = pnorm_sq_rank1_model(2.0, 2).unwrap();
        match m.eval(&v(&[3.0, 4.0])).unwrap() {
            CurvatureMatrix::RankOne { w, v: u } => {
                assert_eq!(w, 2.0);
                assert_relative_eq!(u, v(&[0.6, 0.8]), epsilon = 1e-15);
            }
            other => panic!("unexpected {other:?}"),
        }
        let m1 = pnorm_sq_rank1_model(1.0, 2).unwrap();
        assert_eq!(m1.excess(), None);
        match m1.eval(&v(&[1.0, -1.0])).unwrap() {
            CurvatureMatrix::RankOne { w, v: u } => {
                assert_eq!(w, 2.0);
                assert_eq!(u, v(&[1.0, -1.0]));
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(m.eval(&v(&[0.0, 0.0])).unwrap().is_zero());
        assert!(pnorm_sq_rank1_model(0.5, 2).is_err());
    }

    #[test]
    fn lpp_examples() {
        let d2 = lpp_model(2.0, 3, LppVariant::Diagonal).unwrap();
        assert_eq!(dense_at(&d2, &[1.0, 0.0, -4.0]), Matrix::identity(3, 3) * 2.0);
        let d3 = lpp_model(3.0, 2, LppVariant::Diagonal).unwrap();
        assert_eq!(d3.eval(&v(&[1.0, 2.0])).unwrap(), CurvatureMatrix::Diagonal(v(&[3.0, 6.0])));
        let r4 = lpp_model(4.0, 2, LppVariant::RankOne).unwrap();
        let c = dense_at(&r4, &[1.0, 0.0]);
        assert_relative_eq!(c, Matrix::from_row_slice(2, 2, &[4.0, 0.0, 0.0, 0.0]), epsilon = 1e-14);
        assert_eq!(r4.excess(), None);
        assert!(r4.eval(&v(&[0.0, 0.0])).unwrap().is_zero());
    }

    #[test]
    fn two_norm_pow_examples() {
        let i2 = two_norm_pow_model(2.0, 2, TwoNormPowVariant::Identity).unwrap();
        assert_eq!(dense_at(&i2, &[5.0, 1.0]), Matrix::identity(2, 2) * 2.0);
        let i4 = two_norm_pow_model(4.0, 2, TwoNormPowVariant::Identity).unwrap();
        assert_relative_eq!(dense_at(&i4, &[0.0, 2.0]), Matrix::identity(2, 2) * 16.0, epsilon = 1e-12);
        let r4 = two_norm_pow_model(4.0, 2, TwoNormPowVariant::RankOne).unwrap();
        let x = v(&[1.0, 1.0]);
        assert_relative_eq!(dense_at(&r4, &[1.0, 1.0]), (&x * x.transpose()) * 4.0, epsilon = 1e-12);
        let r3 = two_norm_pow_model(3.0, 2, TwoNormPowVariant::RankOne).unwrap();
        assert!(r3.eval(&v(&[0.0, 0.0])).unwrap().is_zero());
    }

    #[test]
    fn quadratic_examples() {
        let m = quadratic_model(&Matrix::identity(3, 3)).unwrap();
        assert_eq!(dense_at(&m, &[1.0, 2.0, 3.0]), Matrix::identity(3, 3) * 2.0);
        assert_eq!(m.excess(), Some(0.0));
        let z = quadratic_model(&Matrix::zeros(2, 2)).unwrap();
        assert_eq!(z.structure(), Structure::Zero);
        let bad = Matrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
        assert!(quadratic_model(&bad).is_err());
    }

    #[test]
    fn strong_convexity_examples() {
        let m = strong_convexity_model(1.0, 2).unwrap();
        assert_eq!(dense_at(&m, &[9.0, 9.0]), Matrix::identity(2, 2));
        assert_eq!(m.excess(), None);
        let s = sum_models(&m, &CurvatureModel::zero(2)).unwrap();
        assert_eq!(s.eval(&v(&[0.0, 0.0])).unwrap(), CurvatureMatrix::ScaledIdentity { dim: 2, c: 1.0 });
        assert!(strong_convexity_model(0.0, 2).is_err());
    }

    #[test]
    fn sqrt_quartic_examples() {
        let m = sqrt_quartic_model(1.0, 1.0, 1).unwrap();
        assert_eq!(dense_at(&m, &[0.0])[(0, 0)], 0.0);
        assert_relative_eq!(dense_at(&m, &[1.0])[(0, 0)], 2f64.sqrt(), epsilon = 1e-15);
        assert_relative_eq!(m.excess().unwrap(), 2.8284, epsilon = 1e-4);
        assert!(sqrt_quartic_model(0.0, 1.0, 1).is_err());
    }

    fn catalog(d: usize) -> Vec<CurvatureModel> {
        vec![
            huber_sq_model(0.7, d).unwrap(),
            pnorm_sq_diag_model(3.0, d).unwrap(),
            pnorm_sq_rank1_model(1.0, d).unwrap(),
            pnorm_sq_rank1_model(4.0, d).unwrap(),
            lpp_model(3.0, d, LppVariant::Diagonal).unwrap(),
            lpp_model(4.0, d, LppVariant::RankOne).unwrap(),
            two_norm_pow_model(3.0, d, TwoNormPowVariant::Identity).unwrap(),
            two_norm_pow_model(5.0, d, TwoNormPowVariant::RankOne).unwrap(),
            sqrt_quartic_model(2.0, 0.5, d).unwrap(),
            strong_convexity_model(0.3, d).unwrap(),
        ]
    }

    #[test]
    fn every_catalog_map_is_psd() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let d = 4;
        for m in catalog(d) {
            for _ in 0..1000 {
                let x = Vector::from_fn(d, |_, _| rng.random_range(-5.0..5.0));
                let z = Vector::from_fn(d, |_, _| rng.random_range(-1.0..1.0));
                let q = m.eval(&x).unwrap().quad_form(&z).unwrap();
                assert!(q >= -1e-12 * z.norm_squared(), "{} not PSD", m.label());
            }
        }
    }

    #[test]
    fn combinators_commute_with_dense_expansion() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let d = 3;
        let models = catalog(d);
        let a = Matrix::from_fn(d, 2, |_, _| rng.random_range(-1.0..1.0));
        let b = Vector::from_fn(d, |_, _| rng.random_range(-1.0..1.0));
        for m1 in &models {
            for m2 in &models {
                let s = sum_models(m1, m2).unwrap();
                let sc = scale_model(m1, 0.7).unwrap();
                let af = affine_precompose(m1, &a, &b).unwrap();
                for _ in 0..5 {
                    let x = Vector::from_fn(d, |_, _| rng.random_range(-3.0..3.0));
                    let y = Vector::from_fn(2, |_, _| rng.random_range(-3.0..3.0));
                    let d1 = m1.eval(&x).unwrap().to_dense();
                    let d2 = m2.eval(&x).unwrap().to_dense();
                    assert!((s.eval(&x).unwrap().to_dense() - (&d1 + &d2)).amax() <= 1e-12 * (1.0 + d1.amax() + d2.amax()));
                    assert!((sc.eval(&x).unwrap().to_dense() - &d1 * 0.7).amax() <= 1e-12 * (1.0 + d1.amax()));
                    let inner = &a * &y + &b;
                    let want = a.transpose() * m1.eval(&inner).unwrap().to_dense() * &a;
                    assert!((af.eval(&y).unwrap().to_dense() - &want).amax() <= 1e-12 * (1.0 + want.amax()));
                }
            }
        }
    }
}
