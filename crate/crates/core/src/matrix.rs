//! Structured symmetric positive semi-definite matrices.
//!
//! Every solver step evaluates a curvature matrix `C(x)` and then needs a
//! handful of operations on it: quadratic forms `⟨Cv, v⟩`, shifted solves
//! `(C + sI)⁻¹g`, inverse-metric norms `‖g‖²_{C⁻¹}` and eigendecompositions.
//! The zero, scaled-identity, diagonal and rank-one variants answer all of
//! these in `O(d)`; only the dense variant pays for a factorization.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

pub type Vector = DVector<f64>;
pub type Matrix = DMatrix<f64>;

/// Relative eigenvalue threshold below which an eigenvalue counts as zero.
pub const EIGEN_CLAMP: f64 = 1e-12;

/// Relative size of a null-space component of `g` that makes `C⁻¹g` undefined.
pub const NULL_SPACE_TOL: f64 = 1e-8;

/// The variant a [`CurvatureMatrix`] is stored as.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum Structure {
    Zero,
    ScaledIdentity,
    Diagonal,
    RankOne,
    Dense,
}

/// A symmetric PSD matrix stored in the cheapest faithful form.
#[derive(Clone, Debug, PartialEq)]
pub enum CurvatureMatrix {
    Zero { dim: usize },
    ScaledIdentity { dim: usize, c: f64 },
    Diagonal(Vector),
    /// `w · v vᵀ`
    RankOne { w: f64, v: Vector },
    Dense(Matrix),
}

/// `M = Q diag(D) Qᵀ` with `Q` orthogonal and `D ≥ 0`.
#[derive(Clone, Debug)]
pub struct EigenDecomposition {
    pub q: Matrix,
    pub d: Vector,
}

impl EigenDecomposition {
    /// Rebuilds `Q diag(D) Qᵀ`.
    pub fn reconstruct(&self) -> Matrix {
        let scaled = &self.q * Matrix::from_diagonal(&self.d);
        scaled * self.q.transpose()
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.d.iter().copied().fold(0.0, f64::max)
    }
}

fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

impl CurvatureMatrix {
    pub fn zero(dim: usize) -> Self {
        CurvatureMatrix::Zero { dim }
    }

    pub fn scaled_identity(dim: usize, c: f64) -> Result<Self> {
        if !(c >= 0.0) || !c.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "scaled identity needs a finite c ≥ 0, got {c}"
            )));
        }
        if c == 0.0 {
            return Ok(CurvatureMatrix::Zero { dim });
        }
        Ok(CurvatureMatrix::ScaledIdentity { dim, c })
    }

    pub fn diagonal(d: Vector) -> Result<Self> {
        if let Some(bad) = d.iter().find(|x| !(**x >= 0.0) || !x.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "diagonal entries must be finite and nonnegative, got {bad}"
            )));
        }
        Ok(CurvatureMatrix::Diagonal(d))
    }

    pub fn rank_one(w: f64, v: Vector) -> Result<Self> {
        if !(w >= 0.0) || !w.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "rank-one weight must be finite and nonnegative, got {w}"
            )));
        }
        if w == 0.0 || v.iter().all(|x| *x == 0.0) {
            return Ok(CurvatureMatrix::Zero { dim: v.len() });
        }
        Ok(CurvatureMatrix::RankOne { w, v })
    }

    /// Stores `(M + Mᵀ)/2`. No PSD check is made here.
    pub fn dense(m: Matrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::DimensionMismatch {
                expected: m.nrows(),
                found: m.ncols(),
            });
        }
        let sym = (&m + m.transpose()) * 0.5;
        Ok(CurvatureMatrix::Dense(sym))
    }

    pub fn dim(&self) -> usize {
        match self {
            CurvatureMatrix::Zero { dim } | CurvatureMatrix::ScaledIdentity { dim, .. } => *dim,
            CurvatureMatrix::Diagonal(d) => d.len(),
            CurvatureMatrix::RankOne { v, .. } => v.len(),
            CurvatureMatrix::Dense(m) => m.nrows(),
        }
    }

    pub fn structure(&self) -> Structure {
        match self {
            CurvatureMatrix::Zero { .. } => Structure::Zero,
            CurvatureMatrix::ScaledIdentity { .. } => Structure::ScaledIdentity,
            CurvatureMatrix::Diagonal(_) => Structure::Diagonal,
            CurvatureMatrix::RankOne { .. } => Structure::RankOne,
            CurvatureMatrix::Dense(_) => Structure::Dense,
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            CurvatureMatrix::Zero { .. } => true,
            CurvatureMatrix::ScaledIdentity { c, .. } => *c == 0.0,
            CurvatureMatrix::Diagonal(d) => d.iter().all(|x| *x == 0.0),
            CurvatureMatrix::RankOne { w, v } => *w == 0.0 || v.iter().all(|x| *x == 0.0),
            CurvatureMatrix::Dense(m) => m.iter().all(|x| *x == 0.0),
        }
    }

    pub fn to_dense(&self) -> Matrix {
        let n = self.dim();
        match self {
            CurvatureMatrix::Zero { .. } => Matrix::zeros(n, n),
            CurvatureMatrix::ScaledIdentity { c, .. } => Matrix::identity(n, n) * *c,
            CurvatureMatrix::Diagonal(d) => Matrix::from_diagonal(d),
            CurvatureMatrix::RankOne { w, v } => (v * v.transpose()) * *w,
            CurvatureMatrix::Dense(m) => m.clone(),
        }
    }

    /// `M v`.
    pub fn mul_vec(&self, v: &Vector) -> Result<Vector> {
        check_dim(self.dim(), v.len())?;
        Ok(match self {
            CurvatureMatrix::Zero { dim } => Vector::zeros(*dim),
            CurvatureMatrix::ScaledIdentity { c, .. } => v * *c,
            CurvatureMatrix::Diagonal(d) => d.component_mul(v),
            CurvatureMatrix::RankOne { w, v: u } => u * (*w * u.dot(v)),
            CurvatureMatrix::Dense(m) => m * v,
        })
    }

    /// `⟨M v, v⟩`.
    pub fn quad_form(&self, v: &Vector) -> Result<f64> {
        check_dim(self.dim(), v.len())?;
        Ok(match self {
            CurvatureMatrix::Zero { .. } => 0.0,
            CurvatureMatrix::ScaledIdentity { c, .. } => *c * v.norm_squared(),
            CurvatureMatrix::Diagonal(d) => d.iter().zip(v.iter()).map(|(di, vi)| di * vi * vi).sum(),
            CurvatureMatrix::RankOne { w, v: u } => {
                let t = u.dot(v);
                *w * t * t
            }
            CurvatureMatrix::Dense(m) => (m * v).dot(v),
        })
    }

    /// Solves `(M + sI) u = g`.
    pub fn shifted_solve(&self, s: f64, g: &Vector) -> Result<Vector> {
        check_dim(self.dim(), g.len())?;
        if !(s >= 0.0) {
            return Err(Error::InvalidParameter(format!("shift must be ≥ 0, got {s}")));
        }
        if s == 0.0 {
            return self.solve_in_range(g).map(|(u, _)| u).map_err(|e| match e {
                Error::SingularAlongGradient(_) => Error::Singular,
                other => other,
            });
        }
        Ok(match self {
            CurvatureMatrix::Zero { .. } => g / s,
            CurvatureMatrix::ScaledIdentity { c, .. } => g / (c + s),
            CurvatureMatrix::Diagonal(d) => g.zip_map(d, |gi, di| gi / (di + s)),
            CurvatureMatrix::RankOne { w, v } => {
                // (s I + w v vᵀ)⁻¹ = I/s − w v vᵀ / (s (s + w‖v‖²))
                let coef = w * v.dot(g) / (s * (s + w * v.norm_squared()));
                g / s - v * coef
            }
            CurvatureMatrix::Dense(m) => {
                let shifted = m + Matrix::identity(m.nrows(), m.ncols()) * s;
                match shifted.clone().cholesky() {
                    Some(ch) => ch.solve(g),
                    None => shifted.lu().solve(g).ok_or(Error::Singular)?,
                }
            }
        })
    }

    /// `‖g‖²_{M⁻¹} = ⟨M⁻¹g, g⟩` on the range of `M`.
    pub fn inv_quad_form(&self, g: &Vector) -> Result<f64> {
        self.solve_in_range(g).map(|(_, q)| q)
    }

    /// Returns `u = M⁺ g` together with `⟨u, g⟩`, failing when `g` has a
    /// component of relative size above [`NULL_SPACE_TOL`] in the null space.
    pub fn solve_in_range(&self, g: &Vector) -> Result<(Vector, f64)> {
        check_dim(self.dim(), g.len())?;
        let gnorm = g.norm();
        if gnorm == 0.0 {
            return Ok((Vector::zeros(g.len()), 0.0));
        }
        let u = match self {
            CurvatureMatrix::Zero { .. } => return Err(Error::SingularAlongGradient(1.0)),
            CurvatureMatrix::ScaledIdentity { c, .. } => {
                if *c <= 0.0 {
                    return Err(Error::SingularAlongGradient(1.0));
                }
                g / *c
            }
            CurvatureMatrix::Diagonal(d) => {
                let thr = EIGEN_CLAMP * d.iter().copied().fold(0.0, f64::max);
                let mut null_sq = 0.0;
                let u = g.zip_map(d, |gi, di| {
                    if di > thr {
                        gi / di
                    } else {
                        null_sq += gi * gi;
                        0.0
                    }
                });
                let rel = null_sq.sqrt() / gnorm;
                if rel > NULL_SPACE_TOL {
                    return Err(Error::SingularAlongGradient(rel));
                }
                u
            }
            CurvatureMatrix::RankOne { w, v } => {
                let vn = v.norm();
                let vhat = v / vn;
                let along = vhat.dot(g);
                let rel = (g - &vhat * along).norm() / gnorm;
                if rel > NULL_SPACE_TOL {
                    return Err(Error::SingularAlongGradient(rel));
                }
                vhat * (along / (w * vn * vn))
            }
            CurvatureMatrix::Dense(_) => {
                let eig = self.eigendecompose()?;
                let thr = EIGEN_CLAMP * eig.max_eigenvalue();
                let gt = eig.q.transpose() * g;
                let mut null_sq = 0.0;
                let scaled = gt.zip_map(&eig.d, |gi, di| {
                    if di > thr {
                        gi / di
                    } else {
                        null_sq += gi * gi;
                        0.0
                    }
                });
                let rel = null_sq.sqrt() / gnorm;
                if rel > NULL_SPACE_TOL {
                    return Err(Error::SingularAlongGradient(rel));
                }
                &eig.q * scaled
            }
        };
        let q = u.dot(g);
        Ok((u, q))
    }

    pub fn eigendecompose(&self) -> Result<EigenDecomposition> {
        let n = self.dim();
        match self {
            CurvatureMatrix::Zero { .. } => Ok(EigenDecomposition {
                q: Matrix::identity(n, n),
                d: Vector::zeros(n),
            }),
            CurvatureMatrix::ScaledIdentity { c, .. } => Ok(EigenDecomposition {
                q: Matrix::identity(n, n),
                d: Vector::from_element(n, *c),
            }),
            CurvatureMatrix::Diagonal(d) => Ok(EigenDecomposition {
                q: Matrix::identity(n, n),
                d: d.clone(),
            }),
            CurvatureMatrix::RankOne { w, v } => {
                let vn = v.norm();
                let q = complete_basis(&(v / vn));
                let mut d = Vector::zeros(n);
                d[0] = w * vn * vn;
                Ok(EigenDecomposition { q, d })
            }
            CurvatureMatrix::Dense(m) => {
                let eig = m
                    .clone()
                    .try_symmetric_eigen(f64::EPSILON, 10_000)
                    .ok_or(Error::EigenNonConvergence)?;
                let mut order: Vec<usize> = (0..n).collect();
                order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
                let max_abs = eig.eigenvalues.iter().fold(0.0f64, |acc, x| acc.max(x.abs()));
                let thr = EIGEN_CLAMP * max_abs;
                let mut q = Matrix::zeros(n, n);
                let mut d = Vector::zeros(n);
                for (j, &src) in order.iter().enumerate() {
                    q.set_column(j, &eig.eigenvectors.column(src));
                    let lam = eig.eigenvalues[src];
                    d[j] = if lam <= thr { 0.0 } else { lam };
                }
                Ok(EigenDecomposition { q, d })
            }
        }
    }

    pub fn scale(&self, beta: f64) -> Result<Self> {
        if !(beta >= 0.0) || !beta.is_finite() {
            return Err(Error::InvalidParameter(format!("scale must be finite and ≥ 0, got {beta}")));
        }
        let n = self.dim();
        if beta == 0.0 {
            return Ok(CurvatureMatrix::Zero { dim: n });
        }
        Ok(match self {
            CurvatureMatrix::Zero { .. } => self.clone(),
            CurvatureMatrix::ScaledIdentity { c, .. } => CurvatureMatrix::ScaledIdentity { dim: n, c: c * beta },
            CurvatureMatrix::Diagonal(d) => CurvatureMatrix::Diagonal(d * beta),
            CurvatureMatrix::RankOne { w, v } => CurvatureMatrix::RankOne { w: w * beta, v: v.clone() },
            CurvatureMatrix::Dense(m) => CurvatureMatrix::Dense(m * beta),
        })
    }

    /// Structured sum. Zero is absorbed, scaled identities and diagonals stay
    /// diagonal, everything else becomes dense.
    pub fn add(&self, other: &Self) -> Result<Self> {
        check_dim(self.dim(), other.dim())?;
        let n = self.dim();
        use CurvatureMatrix::*;
        Ok(match (self, other) {
            (Zero { .. }, x) | (x, Zero { .. }) => x.clone(),
            (ScaledIdentity { c: a, .. }, ScaledIdentity { c: b, .. }) => ScaledIdentity { dim: n, c: a + b },
            (ScaledIdentity { c, .. }, Diagonal(d)) | (Diagonal(d), ScaledIdentity { c, .. }) => {
                Diagonal(d.add_scalar(*c))
            }
            (Diagonal(a), Diagonal(b)) => Diagonal(a + b),
            (a, b) => Dense(a.to_dense() + b.to_dense()),
        })
    }

    /// `Aᵀ M A` for a `dim × m` matrix `A`.
    pub fn congruence(&self, a: &Matrix) -> Result<Self> {
        check_dim(self.dim(), a.nrows())?;
        let m = a.ncols();
        let a_is_diag = a.is_square()
            && (0..m).all(|i| (0..m).all(|j| i == j || a[(i, j)] == 0.0));
        use CurvatureMatrix::*;
        Ok(match self {
            Zero { .. } => Zero { dim: m },
            ScaledIdentity { c, .. } if a_is_diag => Diagonal(a.diagonal().map(|x| c * x * x)),
            Diagonal(d) if a_is_diag => Diagonal(a.diagonal().zip_map(d, |x, di| di * x * x)),
            RankOne { w, v } => CurvatureMatrix::rank_one(*w, a.transpose() * v)?,
            ScaledIdentity { c, .. } => Dense((a.transpose() * a) * *c),
            Diagonal(d) => {
                let da = Matrix::from_diagonal(d) * a;
                CurvatureMatrix::dense(a.transpose() * da)?
            }
            Dense(mm) => CurvatureMatrix::dense(a.transpose() * mm * a)?,
        })
    }
}

/// Orthonormal basis whose first column is the unit vector `u`, built from a
/// Householder reflector.
pub fn complete_basis(u: &Vector) -> Matrix {
    let n = u.len();
    let mut e1 = Vector::zeros(n);
    e1[0] = 1.0;
    // Reflect along e1 ∓ u, choosing the sign that avoids cancellation.
    let (h_vec, flip) = if u[0] <= 0.0 { (&e1 - u, false) } else { (&e1 + u, true) };
    let hn2 = h_vec.norm_squared();
    let mut q = Matrix::identity(n, n) - (&h_vec * h_vec.transpose()) * (2.0 / hn2);
    if flip {
        // H e1 = -u here
        q.column_mut(0).neg_mut();
    }
    q
}

/// Largest eigenvalue of the PSD matrix `AᵀA` by power iteration.
pub fn lambda_max_gram(a: &Matrix) -> f64 {
    let m = a.ncols();
    if m == 0 || a.nrows() == 0 {
        return 0.0;
    }
    let mut v = Vector::from_fn(m, |i, _| 1.0 + 0.1 * (i as f64 + 1.0).sin());
    v /= v.norm();
    let mut lam = 0.0;
    for _ in 0..POWER_ITERS {
        let w = a.transpose() * (a * &v);
        let n = w.norm();
        if n == 0.0 {
            return 0.0;
        }
        let next = v.dot(&w);
        v = w / n;
        if (next - lam).abs() <= POWER_TOL * next.abs().max(1.0) {
            lam = next;
            break;
        }
        lam = next;
    }
    // Rayleigh quotients approach λ_max from below; one final norm ratio.
    let w = a.transpose() * (a * &v);
    lam.max(w.norm())
}

const POWER_ITERS: usize = 50;
const POWER_TOL: f64 = 1e-10;
