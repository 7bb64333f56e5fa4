//! Projections onto the localization set
//! `L_C(x) = {z : f(x) + ⟨g, z − x⟩ + ½‖z − x‖²_C ≤ f*}`.
//!
//! The Euclidean projection has the form `x − β(I + βC)⁻¹g` where `β` is
//! the root of the scalar function `H`. The projection in the `C`-metric
//! has a closed form.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{CurvatureMatrix, Vector, EIGEN_CLAMP, NULL_SPACE_TOL};

/// One projection problem at the current iterate.
#[derive(Clone, Copy, Debug)]
pub struct ProjectionInput<'a> {
    pub x: &'a Vector,
    /// `∇f(x)`
    pub g: &'a Vector,
    /// `C(x)`
    pub c: &'a CurvatureMatrix,
    /// `Δ = f(x) − f*`
    pub gap: f64,
}

impl ProjectionInput<'_> {
    fn validate(&self) -> Result<()> {
        let d = self.x.len();
        for n in [self.g.len(), self.c.dim()] {
            if n != d {
                return Err(Error::DimensionMismatch { expected: d, found: n });
            }
        }
        if !self.gap.is_finite() || self.g.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("non-finite gap or gradient".into()));
        }
        Ok(())
    }

    /// `M_low(z; x) − f*`; non-positive exactly when `z ∈ L_C(x)`.
    pub fn localization_excess(&self, z: &Vector) -> Result<f64> {
        let s = z - self.x;
        Ok(self.gap + self.g.dot(&s) + 0.5 * self.c.quad_form(&s)?)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Beta {
    Finite(f64),
    Infinite,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BetaSolution {
    pub beta: Beta,
    pub newton_iters: usize,
    /// `|H(β)|`, zero for the infinite branch.
    pub residual: f64,
    /// Whether the bracketed bisection fallback ran.
    pub bisected: bool,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NewtonOptions {
    /// Tolerance on `|H|` is `rel_tol·Δ`.
    pub rel_tol: f64,
    pub max_iters: usize,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        NewtonOptions {
            rel_tol: 1e-12,
            max_iters: 100,
        }
    }
}

/// `(H(β), H′(β))` for eigenvalues `D` and rotated gradient `g̃`.
pub fn eval_h(beta: f64, gt: &[f64], d: &[f64], delta: f64) -> (f64, f64) {
    // ½β²D/(1+βD)² − β/(1+βD) = −½β(2+βD)/(1+βD)²; all terms share a sign
    let mut s = 0.0;
    let mut dh = 0.0;
    for (&gi, &di) in gt.iter().zip(d) {
        let g2 = gi * gi;
        let den = 1.0 + beta * di;
        s += g2 * beta * (2.0 + beta * di) / (den * den);
        dh -= g2 / (den * den * den);
    }
    (delta - 0.5 * s, dh)
}

/// `H″(β) = 3Σ g̃ᵢ²Dᵢ/(1+βDᵢ)⁴`.
pub fn eval_h_second(beta: f64, gt: &[f64], d: &[f64]) -> f64 {
    gt.iter()
        .zip(d)
        .map(|(&gi, &di)| 3.0 * gi * gi * di / (1.0 + beta * di).powi(4))
        .sum()
}

/// `lim_{β→∞} H(β)` when every component with `g̃ᵢ ≠ 0` has `Dᵢ > 0`.
fn tail_limit(gt: &[f64], d: &[f64], delta: f64) -> Option<f64> {
    let dmax = d.iter().fold(0.0f64, |a, &b| a.max(b));
    let g2: f64 = gt.iter().map(|g| g * g).sum();
    let mut null = 0.0;
    let mut inv = 0.0;
    for (&gi, &di) in gt.iter().zip(d) {
        if di <= EIGEN_CLAMP * dmax || di == 0.0 {
            null += gi * gi;
        } else {
            inv += gi * gi / di;
        }
    }
    (dmax > 0.0 && null <= NULL_SPACE_TOL * NULL_SPACE_TOL * g2).then_some(delta - 0.5 * inv)
}

/// Root of `H` by Newton's method from `β₀ = 0`.
///
/// `H` is convex and decreasing, so the iterates increase monotonically
/// towards the root. Returns [`Beta::Infinite`] when `H` stays non-negative
/// on `[0, ∞)`; falls back to bisection if Newton stalls.
pub fn find_beta(gt: &[f64], d: &[f64], delta: f64, opts: NewtonOptions) -> Result<BetaSolution> {
    if gt.len() != d.len() {
        return Err(Error::DimensionMismatch {
            expected: gt.len(),
            found: d.len(),
        });
    }
    if !(delta > 0.0) {
        return Err(Error::Degenerate(delta));
    }
    if gt.iter().all(|g| *g == 0.0) {
        return Err(Error::ZeroGradient(delta));
    }
    if let Some(tail) = tail_limit(gt, d, delta) {
        // relative to the two terms of the limit, which are both O(Δ) near optimality
        if tail >= -1e-10 * (2.0 * delta - tail) {
            return Ok(BetaSolution {
                beta: Beta::Infinite,
                newton_iters: 0,
                residual: 0.0,
                bisected: false,
            });
        }
    }
    let tol = opts.rel_tol * delta;
    let mut beta = 0.0;
    let (mut h, mut dh) = eval_h(beta, gt, d, delta);
    let mut iters = 0;
    while iters < opts.max_iters {
        iters += 1;
        let next = beta - h / dh;
        let stalled = !(next - beta > 4.0 * f64::EPSILON * beta);
        beta = next;
        (h, dh) = eval_h(beta, gt, d, delta);
        if h.abs() <= tol {
            return Ok(BetaSolution {
                beta: Beta::Finite(beta),
                newton_iters: iters,
                residual: h.abs(),
                bisected: false,
            });
        }
        if stalled || !beta.is_finite() {
            break;
        }
    }
    bisect(gt, d, delta, tol, iters)
}

fn bisect(gt: &[f64], d: &[f64], delta: f64, tol: f64, iters: usize) -> Result<BetaSolution> {
    let h = |b: f64| eval_h(b, gt, d, delta).0;
    let mut lo = 0.0;
    let mut hi = 1.0;
    while h(hi) > 0.0 {
        lo = hi;
        hi *= 2.0;
        if !hi.is_finite() {
            return Ok(BetaSolution {
                beta: Beta::Infinite,
                newton_iters: iters,
                residual: 0.0,
                bisected: true,
            });
        }
    }
    let mut mid = 0.5 * (lo + hi);
    for _ in 0..2000 {
        mid = 0.5 * (lo + hi);
        let hm = h(mid);
        if hm.abs() <= tol || hi - lo <= 4.0 * f64::EPSILON * hi {
            break;
        }
        if hm > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(BetaSolution {
        beta: Beta::Finite(mid),
        newton_iters: iters,
        residual: h(mid).abs(),
        bisected: true,
    })
}

/// Which code path produced an LCD2 step.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Lcd2Branch {
    /// `Δ ≤ 0`: the iterate is returned unchanged.
    Stationary,
    Polyak,
    ScaledIdentity,
    RankOneParallel,
    RankOneReduced,
    Eigen,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Lcd2Step {
    pub x: Vector,
    pub beta: Beta,
    pub newton_iters: usize,
    pub branch: Lcd2Branch,
}

/// Step `t·g` along the gradient when `C` acts on `g` as `s·I`:
/// `t = (1 − √(1 − 2sΔ/‖g‖²))/s`, which is Polyak's step when `s = 0`.
fn scalar_step(s: f64, gap: f64, g2: f64) -> (f64, Beta) {
    let a = 2.0 * s * gap / g2;
    if a >= 1.0 {
        return (1.0 / s, Beta::Infinite);
    }
    // rationalized to stay accurate for small a
    let t = 2.0 * gap / g2 / (1.0 + (1.0 - a).sqrt());
    let beta = t / (1.0 - t * s);
    (t, Beta::Finite(beta))
}

/// Euclidean projection of `x` onto `L_C(x)`.
pub fn lcd2_project(inp: &ProjectionInput) -> Result<Lcd2Step> {
    lcd2_project_with(inp, NewtonOptions::default())
}

pub fn lcd2_project_with(inp: &ProjectionInput, opts: NewtonOptions) -> Result<Lcd2Step> {
    inp.validate()?;
    if !(inp.gap > 0.0) {
        return Ok(stationary(inp));
    }
    let g2 = inp.g.norm_squared();
    if g2 == 0.0 {
        return Err(Error::ZeroGradient(inp.gap));
    }
    let along = |s: f64, branch| {
        let (t, beta) = scalar_step(s, inp.gap, g2);
        Ok(Lcd2Step {
            x: inp.x - inp.g * t,
            beta,
            newton_iters: 0,
            branch,
        })
    };
    match inp.c {
        CurvatureMatrix::Zero { .. } => along(0.0, Lcd2Branch::Polyak),
        CurvatureMatrix::ScaledIdentity { c, .. } => along(*c, Lcd2Branch::ScaledIdentity),
        CurvatureMatrix::RankOne { w, v } => {
            let vn = v.norm();
            let u = v / vn;
            let s = w * vn * vn;
            let alpha = u.dot(inp.g);
            let rest = inp.g - &u * alpha;
            let rho = rest.norm();
            if rho <= 1e-12 * g2.sqrt() {
                return along(s, Lcd2Branch::RankOneParallel);
            }
            let sol = find_beta(&[alpha, rho], &[s, 0.0], inp.gap, opts)?;
            let Beta::Finite(beta) = sol.beta else {
                // unreachable with a zero eigenvalue carrying gradient mass
                return Err(Error::Singular);
            };
            let step = (inp.g - &u * (alpha * beta * s / (1.0 + beta * s))) * beta;
            Ok(Lcd2Step {
                x: inp.x - step,
                beta: sol.beta,
                newton_iters: sol.newton_iters,
                branch: Lcd2Branch::RankOneReduced,
            })
        }
        _ => lcd2_project_eigen(inp, opts),
    }
}

/// The general path: eigendecompose `C`, solve for `β`, and step.
/// Diagonal matrices skip the decomposition.
pub fn lcd2_project_eigen(inp: &ProjectionInput, opts: NewtonOptions) -> Result<Lcd2Step> {
    inp.validate()?;
    if !(inp.gap > 0.0) {
        return Ok(stationary(inp));
    }
    let (q, d) = match inp.c {
        CurvatureMatrix::Diagonal(d) => (None, d.clone()),
        other => {
            let e = other.eigendecompose()?;
            (Some(e.q), e.d)
        }
    };
    let gt = match &q {
        Some(q) => q.tr_mul(inp.g),
        None => inp.g.clone(),
    };
    let sol = find_beta(gt.as_slice(), d.as_slice(), inp.gap, opts)?;
    let dmax = d.amax();
    let st = match sol.beta {
        Beta::Finite(beta) => Vector::from_fn(d.len(), |i, _| beta * gt[i] / (1.0 + beta * d[i])),
        Beta::Infinite => Vector::from_fn(d.len(), |i, _| {
            if d[i] > EIGEN_CLAMP * dmax {
                gt[i] / d[i]
            } else {
                0.0
            }
        }),
    };
    let step = match &q {
        Some(q) => q * st,
        None => st,
    };
    Ok(Lcd2Step {
        x: inp.x - step,
        beta: sol.beta,
        newton_iters: sol.newton_iters,
        branch: Lcd2Branch::Eigen,
    })
}

fn stationary(inp: &ProjectionInput) -> Lcd2Step {
    Lcd2Step {
        x: inp.x.clone(),
        beta: Beta::Finite(0.0),
        newton_iters: 0,
        branch: Lcd2Branch::Stationary,
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Lcd3Step {
    pub x: Vector,
    pub gamma: f64,
    /// `1 − 2Δ/‖g‖²_{C⁻¹}` before clamping.
    pub sqrt_arg: f64,
}

/// Projection of `x` onto `L_C(x)` in the `C`-metric:
/// `x − γC⁻¹g` with `γ = 1 − √(1 − 2Δ/‖g‖²_{C⁻¹})`.
pub fn lcd3_project(inp: &ProjectionInput) -> Result<Lcd3Step> {
    inp.validate()?;
    if !(inp.gap > 0.0) {
        return Ok(Lcd3Step {
            x: inp.x.clone(),
            gamma: 0.0,
            sqrt_arg: 1.0,
        });
    }
    let (u, q) = inp.c.solve_in_range(inp.g)?;
    if !(q > 0.0) {
        return Err(Error::SingularAlongGradient(1.0));
    }
    let arg = 1.0 - 2.0 * inp.gap / q;
    if arg < -1e-6 {
        return Err(Error::ArgumentNegative(arg));
    }
    let gamma = 1.0 - arg.clamp(0.0, 1.0).sqrt();
    Ok(Lcd3Step {
        x: inp.x - u * gamma,
        gamma,
        sqrt_arg: arg,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::Matrix;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn v(xs: &[f64]) -> Vector {
        Vector::from_column_slice(xs)
    }

    /// Bracket-doubling bisection on `H`, written against the expanded
    /// form of `H` rather than [`eval_h`].
    fn bisection_oracle(gt: &[f64], d: &[f64], delta: f64) -> f64 {
        let h = |b: f64| {
            let mut s1 = 0.0;
            let mut s2 = 0.0;
            for (g, di) in gt.iter().zip(d) {
                s1 += g * g * di / (1.0 + b * di).powi(2);
                s2 += g * g / (1.0 + b * di);
            }
            0.5 * b * b * s1 - b * s2 + delta
        };
        let (mut lo, mut hi) = (0.0, 1.0);
        while h(hi) > 0.0 {
            lo = hi;
            hi *= 2.0;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if h(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn eval_h_examples() {
        let gt = [1.0, -2.0, 0.5];
        let d = [0.3, 0.0, 4.0];
        let (h, dh) = eval_h(0.0, &gt, &d, 1.7);
        assert_eq!(h, 1.7);
        assert_eq!(dh, -5.25);
        let r = 2f64.sqrt() - 1.0;
        assert!(eval_h(r, &[2.0], &[1.0], 1.0).0.abs() <= 1e-15);
        for b in [0.0, 0.5, 3.0] {
            let (h, _) = eval_h(b, &gt, &[0.0; 3], 2.0);
            assert_relative_eq!(h, 2.0 - b * 5.25, epsilon = 1e-14);
        }
    }

    #[test]
    fn h_properties_sampled() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..1000 {
            let n = rng.random_range(1..8);
            let d: Vec<f64> = (0..n).map(|_| if rng.random_bool(0.2) { 0.0 } else { rng.random_range(0.0..10.0) }).collect();
            let gt: Vec<f64> = (0..n).map(|_| rng.random_range(-3.0..3.0)).collect();
            let delta = rng.random_range(0.01..5.0);
            assert_eq!(eval_h(0.0, &gt, &d, delta).0, delta);
            for _ in 0..5 {
                let b = rng.random_range(0.0..100.0);
                assert!(eval_h(b, &gt, &d, delta).1 < 0.0);
                assert!(eval_h_second(b, &gt, &d) >= 0.0);
            }
        }
    }

    #[test]
    fn find_beta_examples() {
        let sol = find_beta(&[3.0, 4.0], &[0.0, 0.0], 10.0, NewtonOptions::default()).unwrap();
        assert_eq!(sol.newton_iters, 1);
        assert_relative_eq!(match sol.beta { Beta::Finite(b) => b, _ => panic!() }, 0.4, epsilon = 1e-15);

        let sol = find_beta(&[2.0], &[1.0], 1.0, NewtonOptions::default()).unwrap();
        let Beta::Finite(b) = sol.beta else { panic!() };
        assert!((b - (2f64.sqrt() - 1.0)).abs() <= 1e-12);
        assert!(sol.residual <= 1e-12);
        assert!((b - bisection_oracle(&[2.0], &[1.0], 1.0)).abs() <= 1e-12);

        // Δ = ½‖g‖²_{C⁻¹}
        let sol = find_beta(&[2.0, 1.0], &[4.0, 1.0], 0.5 * (1.0 + 1.0), NewtonOptions::default()).unwrap();
        assert_eq!(sol.beta, Beta::Infinite);

        assert!(matches!(find_beta(&[1.0], &[1.0], 0.0, NewtonOptions::default()), Err(Error::Degenerate(_))));
    }

    #[test]
    fn find_beta_matches_bisection() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        for _ in 0..500 {
            let n = rng.random_range(1..10);
            let d: Vec<f64> = (0..n).map(|_| if rng.random_bool(0.3) { 0.0 } else { rng.random_range(0.0..10.0) }).collect();
            let gt: Vec<f64> = (0..n).map(|_| rng.random_range(-3.0..3.0)).collect();
            let lim = tail_limit(&gt, &d, 0.0).map(|t| -t);
            let delta = match lim {
                Some(l) => rng.random_range(0.01..0.99) * l,
                None => rng.random_range(0.01..10.0),
            };
            let sol = find_beta(&gt, &d, delta, NewtonOptions::default()).unwrap();
            let Beta::Finite(b) = sol.beta else { panic!("unexpected infinite β") };
            let oracle = bisection_oracle(&gt, &d, delta);
            assert!((b - oracle).abs() <= 1e-8 * (1.0 + oracle), "{b} vs {oracle}");
        }
    }

    #[test]
    fn lcd2_examples() {
        let x = v(&[1.0]);
        let g = v(&[2.0]);
        let hess = CurvatureMatrix::Diagonal(v(&[2.0]));
        let step = lcd2_project(&ProjectionInput { x: &x, g: &g, c: &hess, gap: 1.0 }).unwrap();
        assert_eq!(step.beta, Beta::Infinite);
        assert_eq!(step.x, v(&[0.0]));

        let one = CurvatureMatrix::ScaledIdentity { dim: 1, c: 1.0 };
        let step = lcd2_project(&ProjectionInput { x: &x, g: &g, c: &one, gap: 1.0 }).unwrap();
        assert_relative_eq!(step.x[0], 2f64.sqrt() - 1.0, epsilon = 1e-15);
        let eig = lcd2_project_eigen(&ProjectionInput { x: &x, g: &g, c: &CurvatureMatrix::Dense(Matrix::identity(1, 1)), gap: 1.0 }, NewtonOptions::default()).unwrap();
        assert_relative_eq!(eig.x[0], 2f64.sqrt() - 1.0, epsilon = 1e-12);

        let zero = CurvatureMatrix::zero(1);
        let step = lcd2_project(&ProjectionInput { x: &x, g: &g, c: &zero, gap: 1.0 }).unwrap();
        assert_eq!(step.x, v(&[0.5]));
        assert_eq!(step.branch, Lcd2Branch::Polyak);

        let step = lcd2_project(&ProjectionInput { x: &x, g: &g, c: &one, gap: 0.0 }).unwrap();
        assert_eq!(step.x, x);
    }

    #[test]
    fn sos_rank_one_closed_form() {
        // C = ∇f∇fᵀ/(2f) gives x − 2(f − √(f·f*))/‖g‖² · g
        let x = v(&[1.0, -2.0, 0.5]);
        let g = v(&[0.4, 1.0, -0.3]);
        let (f, f_star) = (3.0, 0.7);
        let c = CurvatureMatrix::rank_one(0.5 / f, g.clone()).unwrap();
        let step = lcd2_project(&ProjectionInput { x: &x, g: &g, c: &c, gap: f - f_star }).unwrap();
        assert_eq!(step.branch, Lcd2Branch::RankOneParallel);
        let want = &x - &g * (2.0 * (f - (f * f_star).sqrt()) / g.norm_squared());
        assert_relative_eq!(step.x, want, epsilon = 1e-14);
    }

    #[test]
    fn lcd3_examples() {
        let x = v(&[1.0]);
        let g = v(&[2.0]);
        let one = CurvatureMatrix::ScaledIdentity { dim: 1, c: 1.0 };
        let s = lcd3_project(&ProjectionInput { x: &x, g: &g, c: &one, gap: 1.0 }).unwrap();
        assert_relative_eq!(s.gamma, 1.0 - 0.5f64.sqrt(), epsilon = 1e-15);
        assert_relative_eq!(s.x[0], 2f64.sqrt() - 1.0, epsilon = 1e-15);
        let s = lcd3_project(&ProjectionInput { x: &x, g: &g, c: &one, gap: 0.0 }).unwrap();
        assert_eq!((s.gamma, s.x.clone()), (0.0, x.clone()));
        let big = lcd3_project(&ProjectionInput { x: &x, g: &g, c: &one, gap: 100.0 });
        assert!(matches!(big, Err(Error::ArgumentNegative(_))));
        let sing = CurvatureMatrix::Diagonal(v(&[1.0, 0.0]));
        let x2 = v(&[0.0, 0.0]);
        let g2 = v(&[1.0, 1.0]);
        let r = lcd3_project(&ProjectionInput { x: &x2, g: &g2, c: &sing, gap: 0.1 });
        assert!(matches!(r, Err(Error::SingularAlongGradient(_))));
    }

    fn random_psd(rng: &mut ChaCha8Rng, d: usize) -> CurvatureMatrix {
        let b = Matrix::from_fn(d, d, |_, _| rng.random_range(-1.0..1.0));
        let k = rng.random_range(0..=d);
        let cols = b.columns(0, k);
        CurvatureMatrix::Dense(cols * cols.transpose())
    }

    #[test]
    fn projections_land_in_the_localization_set() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..500 {
            let d = rng.random_range(1..6);
            let c = random_psd(&mut rng, d);
            let x = Vector::from_fn(d, |_, _| rng.random_range(-2.0..2.0));
            let g = Vector::from_fn(d, |_, _| rng.random_range(-2.0..2.0));
            // a valid curvature map never lets Δ exceed ½‖g‖²_{C⁻¹}
            let gap = match c.inv_quad_form(&g) {
                Ok(q) => rng.random_range(0.001..=1.0) * 0.5 * q,
                Err(_) => rng.random_range(0.001..3.0),
            };
            let inp = ProjectionInput { x: &x, g: &g, c: &c, gap };
            let s = lcd2_project(&inp).unwrap();
            let ex = inp.localization_excess(&s.x).unwrap();
            // the quadratic form loses ~ε‖C‖‖s‖² on ill-conditioned draws
            let cond = 1e-12 * c.to_dense().amax() * (&s.x - &x).norm_squared();
            let tol = 1e-8 * (1.0 + gap) + cond;
            assert!(ex <= tol, "{ex}");
            if matches!(s.beta, Beta::Finite(_)) {
                assert!(ex.abs() <= tol, "constraint not tight: {ex}");
            }
            if let Ok(s3) = lcd3_project(&inp) {
                let cond3 = 1e-12 * c.to_dense().amax() * (&s3.x - &x).norm_squared();
                assert!(inp.localization_excess(&s3.x).unwrap() <= tol + cond3);
            }
        }
    }

    #[test]
    fn fast_paths_match_eigen_path() {
        let mut rng = ChaCha8Rng::seed_from_u64(24);
        for i in 0..500 {
            let d = rng.random_range(1..6);
            let x = Vector::from_fn(d, |_, _| rng.random_range(-2.0..2.0));
            let g = Vector::from_fn(d, |_, _| rng.random_range(-2.0..2.0));
            let gap = rng.random_range(0.001..3.0);
            let c = if i % 2 == 0 {
                CurvatureMatrix::ScaledIdentity { dim: d, c: rng.random_range(0.01..5.0) }
            } else {
                let v = if i % 4 == 1 { &g * rng.random_range(-2.0..2.0) } else { Vector::from_fn(d, |_, _| rng.random_range(-2.0..2.0)) };
                CurvatureMatrix::rank_one(rng.random_range(0.01..5.0), v).unwrap()
            };
            let inp = ProjectionInput { x: &x, g: &g, c: &c, gap };
            let fast = lcd2_project(&inp).unwrap();
            let dense = c.to_dense();
            let slow_c = CurvatureMatrix::Dense(dense);
            let slow = lcd2_project_eigen(&ProjectionInput { c: &slow_c, ..inp }, NewtonOptions::default()).unwrap();
            assert!((&fast.x - &slow.x).amax() <= 1e-8, "{:?} {:?} vs {:?}", fast.branch, fast.x, slow.x);
        }
    }
}
