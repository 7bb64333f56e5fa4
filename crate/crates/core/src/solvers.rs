//! Solver loop for GD, Polyak, LCD1, LCD2 and LCD3 with per-iteration
//! traces and checks of the convergence guarantees.

use std::fmt;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Vector;
use crate::objectives::Objective;
use crate::projection::{lcd2_project_with, lcd3_project, NewtonOptions, ProjectionInput};

/// Divergence is declared when the gap exceeds this multiple of the first one.
pub const DIVERGENCE_FACTOR: f64 = 1e6;

/// Gaps at or below `GAP_NOISE·(1 + |f*|)` are rounding noise in `f`;
/// runs with a known `f*` stop there.
pub const GAP_NOISE: f64 = 8.0 * f64::EPSILON;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Method {
    /// Gradient descent with a constant step.
    Gd { step: f64 },
    Polyak,
    Lcd1,
    Lcd2,
    Lcd3,
}

impl Method {
    pub fn name(&self) -> String {
        match self {
            Method::Gd { step } => format!("gd({step:e})"),
            Method::Polyak => "polyak".into(),
            Method::Lcd1 => "lcd1".into(),
            Method::Lcd2 => "lcd2".into(),
            Method::Lcd3 => "lcd3".into(),
        }
    }

    pub fn needs_f_star(&self) -> bool {
        matches!(self, Method::Polyak | Method::Lcd2 | Method::Lcd3)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        Ok(match lower.as_str() {
            "polyak" => Method::Polyak,
            "lcd1" => Method::Lcd1,
            "lcd2" => Method::Lcd2,
            "lcd3" => Method::Lcd3,
            other => {
                let step = other
                    .strip_prefix("gd(")
                    .and_then(|r| r.strip_suffix(')'))
                    .or_else(|| other.strip_prefix("gd:"))
                    .ok_or_else(|| Error::InvalidParameter(format!("unknown method '{s}'")))?;
                let step: f64 = step
                    .parse()
                    .map_err(|_| Error::InvalidParameter(format!("bad GD step in '{s}'")))?;
                if !(step > 0.0) {
                    return Err(Error::InvalidParameter(format!("GD step must be positive in '{s}'")));
                }
                Method::Gd { step }
            }
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub method: Method,
    pub max_iters: usize,
    /// Stop once `f − f* ≤ f_tol`.
    pub f_tol: Option<f64>,
    /// Stop once `‖∇f‖ ≤ g_tol`.
    pub g_tol: Option<f64>,
    pub record_iterates: bool,
    /// Replaces the model's smoothness excess for LCD1.
    pub lc_override: Option<f64>,
    pub newton: NewtonSettings,
    pub seed: u64,
    /// Wall-clock budget; the run ends with [`Status::MaxIters`] once spent.
    #[serde(default)]
    pub time_budget_s: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NewtonSettings {
    pub rel_tol: f64,
    pub max_iters: usize,
}

impl Default for NewtonSettings {
    fn default() -> Self {
        let o = NewtonOptions::default();
        NewtonSettings {
            rel_tol: o.rel_tol,
            max_iters: o.max_iters,
        }
    }
}

impl SolverConfig {
    pub fn new(method: Method, max_iters: usize) -> Self {
        SolverConfig {
            method,
            max_iters,
            f_tol: None,
            g_tol: None,
            record_iterates: false,
            lc_override: None,
            newton: NewtonSettings::default(),
            seed: 0,
            time_budget_s: None,
        }
    }

    pub fn f_tol(mut self, tol: f64) -> Self {
        self.f_tol = Some(tol);
        self
    }

    pub fn g_tol(mut self, tol: f64) -> Self {
        self.g_tol = Some(tol);
        self
    }

    pub fn record(mut self) -> Self {
        self.record_iterates = true;
        self
    }

    pub fn lc(mut self, lc: f64) -> Self {
        self.lc_override = Some(lc);
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterRecord {
    pub k: usize,
    pub f_gap: f64,
    pub grad_norm: f64,
    pub step_norm: f64,
    pub newton_iters: usize,
    pub elapsed_s: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", content = "reason", rename_all = "kebab-case")]
pub enum Status {
    Converged,
    MaxIters,
    Diverged,
    Failed(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    pub method: Method,
    /// `f*` used for the gap column; `None` means the column holds `f` itself.
    pub f_star: Option<f64>,
    pub initial_gap: f64,
    pub initial_grad_norm: f64,
    pub records: Vec<IterRecord>,
    pub status: Status,
    /// `x_0, …, x_K` when recording was requested.
    pub iterates: Option<Vec<Vec<f64>>>,
    /// Pre-clamp square-root arguments of LCD3 steps.
    pub lcd3_arguments: Vec<f64>,
}

impl Trace {
    pub fn iterations(&self) -> usize {
        self.records.len()
    }

    pub fn final_gap(&self) -> f64 {
        self.records.last().map_or(self.initial_gap, |r| r.f_gap)
    }

    /// Gaps `f(x_0) − f*, …, f(x_K) − f*`.
    pub fn gaps(&self) -> Vec<f64> {
        std::iter::once(self.initial_gap)
            .chain(self.records.iter().map(|r| r.f_gap))
            .collect()
    }

    pub fn iterate_vectors(&self) -> Result<Vec<Vector>> {
        let it = self.iterates.as_ref().ok_or(Error::MissingHistory)?;
        Ok(it.iter().map(|x| Vector::from_column_slice(x)).collect())
    }

    /// Equality ignoring wall-clock fields.
    pub fn same_numbers(&self, other: &Trace) -> bool {
        let strip = |t: &Trace| {
            let mut t = t.clone();
            t.records.iter_mut().for_each(|r| r.elapsed_s = 0.0);
            t
        };
        strip(self) == strip(other)
    }
}

/// `x − (C(x) + L_C I)⁻¹∇f(x)`.
pub fn lcd1_step(obj: &Objective, x: &Vector, lc: Option<f64>) -> Result<Vector> {
    let g = obj.gradient(x);
    lcd1_step_with(obj, x, &g, lc)
}

fn lcd1_step_with(obj: &Objective, x: &Vector, g: &Vector, lc: Option<f64>) -> Result<Vector> {
    let l = lc.or(obj.model.excess()).ok_or(Error::NoExcess)?;
    let c = obj.model.eval(x)?;
    Ok(x - c.shifted_solve(l, g)?)
}

/// `x − (f(x) − f*)/‖∇f(x)‖² · ∇f(x)`.
pub fn polyak_step(obj: &Objective, x: &Vector) -> Result<Vector> {
    let f_star = obj.f_star.ok_or(Error::MissingFStar)?;
    let (f, g) = obj.value_and_gradient(x);
    polyak_step_with(x, f - f_star, &g)
}

fn polyak_step_with(x: &Vector, gap: f64, g: &Vector) -> Result<Vector> {
    if !(gap > 0.0) {
        return Ok(x.clone());
    }
    let g2 = g.norm_squared();
    if g2 == 0.0 {
        return Err(Error::ZeroGradient(gap));
    }
    Ok(x - g * (gap / g2))
}

struct StepOutcome {
    x: Vector,
    newton_iters: usize,
    lcd3_arg: Option<f64>,
}

fn step(obj: &Objective, cfg: &SolverConfig, x: &Vector, f: f64, g: &Vector) -> Result<StepOutcome> {
    let gap = obj.f_star.map(|fs| f - fs);
    let plain = |x: Vector| StepOutcome {
        x,
        newton_iters: 0,
        lcd3_arg: None,
    };
    match cfg.method {
        Method::Gd { step } => Ok(plain(x - g * step)),
        Method::Lcd1 => lcd1_step_with(obj, x, g, cfg.lc_override).map(plain),
        Method::Polyak => polyak_step_with(x, gap.ok_or(Error::MissingFStar)?, g).map(plain),
        Method::Lcd2 => {
            let c = obj.model.eval(x)?;
            let inp = ProjectionInput {
                x,
                g,
                c: &c,
                gap: gap.ok_or(Error::MissingFStar)?,
            };
            let opts = NewtonOptions {
                rel_tol: cfg.newton.rel_tol,
                max_iters: cfg.newton.max_iters,
            };
            let s = lcd2_project_with(&inp, opts)?;
            Ok(StepOutcome {
                x: s.x,
                newton_iters: s.newton_iters,
                lcd3_arg: None,
            })
        }
        Method::Lcd3 => {
            let c = obj.model.eval(x)?;
            let inp = ProjectionInput {
                x,
                g,
                c: &c,
                gap: gap.ok_or(Error::MissingFStar)?,
            };
            let s = lcd3_project(&inp)?;
            Ok(StepOutcome {
                x: s.x,
                newton_iters: 0,
                lcd3_arg: Some(s.sqrt_arg),
            })
        }
    }
}

/// Runs `cfg.method` from `x0`.
///
/// Step errors end the run with [`Status::Failed`]; configuration errors
/// (missing `f*` or `L_C`, wrong dimension) are returned directly.
pub fn run(obj: &Objective, cfg: &SolverConfig, x0: &Vector) -> Result<Trace> {
    if x0.len() != obj.dim() {
        return Err(Error::DimensionMismatch {
            expected: obj.dim(),
            found: x0.len(),
        });
    }
    if cfg.method.needs_f_star() && obj.f_star.is_none() {
        return Err(Error::MissingFStar);
    }
    if cfg.method == Method::Lcd1 && cfg.lc_override.or(obj.model.excess()).is_none() {
        return Err(Error::NoExcess);
    }
    let f_ref = obj.f_star.unwrap_or(0.0);
    let start = Instant::now();
    let mut x = x0.clone();
    let (mut f, mut g) = obj.value_and_gradient(&x);
    let initial_gap = f - f_ref;
    let mut trace = Trace {
        method: cfg.method,
        f_star: obj.f_star,
        initial_gap,
        initial_grad_norm: g.norm(),
        records: Vec::new(),
        status: Status::MaxIters,
        iterates: cfg.record_iterates.then(|| vec![x.as_slice().to_vec()]),
        lcd3_arguments: Vec::new(),
    };
    let done = |gap: f64, gnorm: f64| {
        cfg.f_tol.is_some_and(|t| obj.f_star.is_some() && gap <= t)
            || cfg.g_tol.is_some_and(|t| gnorm <= t)
            || (obj.f_star.is_some() && gap <= GAP_NOISE * (1.0 + f_ref.abs()))
    };
    if cfg.max_iters > 0 && done(initial_gap, g.norm()) {
        trace.status = Status::Converged;
        return Ok(trace);
    }
    for k in 1..=cfg.max_iters {
        let out = match step(obj, cfg, &x, f, &g) {
            Ok(o) => o,
            Err(e) => {
                trace.status = Status::Failed(e.to_string());
                break;
            }
        };
        let step_norm = (&out.x - &x).norm();
        x = out.x;
        (f, g) = obj.value_and_gradient(&x);
        let gap = f - f_ref;
        let gnorm = g.norm();
        trace.records.push(IterRecord {
            k,
            f_gap: gap,
            grad_norm: gnorm,
            step_norm,
            newton_iters: out.newton_iters,
            elapsed_s: start.elapsed().as_secs_f64(),
        });
        if let Some(a) = out.lcd3_arg {
            trace.lcd3_arguments.push(a);
        }
        if let Some(it) = trace.iterates.as_mut() {
            it.push(x.as_slice().to_vec());
        }
        let diverged = !f.is_finite()
            || x.iter().any(|v| !v.is_finite())
            || (obj.f_star.is_some() && gap > DIVERGENCE_FACTOR * initial_gap.max(f64::MIN_POSITIVE));
        if diverged {
            trace.status = Status::Diverged;
            break;
        }
        if done(gap, gnorm) {
            trace.status = Status::Converged;
            break;
        }
        if cfg.time_budget_s.is_some_and(|b| start.elapsed().as_secs_f64() >= b) {
            break;
        }
    }
    Ok(trace)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub k: usize,
    /// Amount by which the inequality fails, already net of tolerance.
    pub excess: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RateReport {
    /// Points checked against the `L_C‖x_0 − x*‖²/(2k)` bound.
    pub checked: usize,
    pub bound_violations: Vec<Violation>,
    /// `‖x_{k+1} − x*‖² ≤ ‖x_k − x*‖² − ‖x_{k+1} − x_k‖²` (projection methods).
    pub contraction_violations: Vec<Violation>,
    /// `L_C(‖x_{k+1} − x*‖² − ‖x_k − x*‖²) ≤ −2(f(x_{k+1}) − f*)` (LCD1, GD(1/L)).
    pub distance_violations: Vec<Violation>,
    /// `f(x_{k+1}) ≤ f(x_k)` (LCD1, GD(1/L)).
    pub descent_violations: Vec<Violation>,
}

impl RateReport {
    pub fn is_clean(&self) -> bool {
        self.bound_violations.is_empty()
            && self.contraction_violations.is_empty()
            && self.distance_violations.is_empty()
            && self.descent_violations.is_empty()
    }
}

/// Checks a recorded trace against the guarantees that apply to its method.
///
/// * LCD1 and GD: `f(x_k) − f* ≤ L_C‖x_0 − x*‖²/(2k)` for every `k`, the
///   distance recursion, and monotone descent.
/// * LCD2 and Polyak: `min_{t≤k} f(x_t) − f* ≤ L_C‖x_0 − x*‖²/(2k)` and the
///   contraction recursion.
///
/// For Polyak and GD pass the smoothness constant `L` as `lc`.
pub fn verify_rate_bounds(trace: &Trace, lc: f64, x_star: &Vector, f_star: f64) -> Result<RateReport> {
    let xs = trace.iterate_vectors()?;
    let r0 = (&xs[0] - x_star).norm_squared();
    let mut report = RateReport::default();
    let gap_at = |k: usize| if k == 0 { trace.initial_gap } else { trace.records[k - 1].f_gap };
    // gaps in the trace are relative to trace.f_star, re-reference to f_star
    let shift = trace.f_star.unwrap_or(0.0) - f_star;
    let gaps: Vec<f64> = (0..xs.len()).map(|k| gap_at(k) + shift).collect();
    let value_scale = 1.0 + f_star.abs();
    let lcd1_like = matches!(trace.method, Method::Lcd1 | Method::Gd { .. });
    let mut best = f64::INFINITY;
    for k in 1..xs.len() {
        best = best.min(gaps[k]);
        let bound = lc * r0 / (2.0 * k as f64);
        let tol = 1e-9 * (1.0 + bound);
        let lhs = if lcd1_like { gaps[k] } else { best };
        report.checked += 1;
        if lhs > bound + tol {
            report.bound_violations.push(Violation { k, excess: lhs - bound - tol });
        }
        let d_prev = (&xs[k - 1] - x_star).norm_squared();
        let d_next = (&xs[k] - x_star).norm_squared();
        if lcd1_like {
            let lhs = lc * (d_next - d_prev) + 2.0 * gaps[k];
            let tol = 1e-9 * (1.0 + lc * d_prev + value_scale);
            if lhs > tol {
                report.distance_violations.push(Violation { k, excess: lhs - tol });
            }
            let tol = 1e-9 * (1.0 + gaps[k - 1].abs() + value_scale);
            if gaps[k] - gaps[k - 1] > tol {
                report.descent_violations.push(Violation {
                    k,
                    excess: gaps[k] - gaps[k - 1] - tol,
                });
            }
        } else {
            let step2 = (&xs[k] - &xs[k - 1]).norm_squared();
            let tol = 1e-9 * (1.0 + d_prev);
            let lhs = d_next - d_prev + step2;
            if lhs > tol {
                report.contraction_violations.push(Violation { k, excess: lhs - tol });
            }
        }
    }
    Ok(report)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LcSearch {
    pub lc: f64,
    pub probes: usize,
}

/// Smallest `L_C` on the doubling grid `start·2^j` for which LCD1 decreases
/// `f` monotonically over `window` steps. A heuristic for models without a
/// known excess.
pub fn search_lc(obj: &Objective, x0: &Vector, start: f64, window: usize, max_doublings: usize) -> Result<LcSearch> {
    if !(start > 0.0) {
        return Err(Error::InvalidParameter(format!("start must be positive, got {start}")));
    }
    let mut lc = start;
    for probes in 1..=max_doublings {
        let mut x = x0.clone();
        let mut f = obj.value(&x);
        let mut ok = true;
        for _ in 0..window {
            let g = obj.gradient(&x);
            let next = match lcd1_step_with(obj, &x, &g, Some(lc)) {
                Ok(n) => n,
                Err(_) => {
                    ok = false;
                    break;
                }
            };
            let fn_ = obj.value(&next);
            if !fn_.is_finite() || fn_ > f + 1e-12 * (1.0 + f.abs()) {
                ok = false;
                break;
            }
            x = next;
            f = fn_;
        }
        if ok {
            return Ok(LcSearch { lc, probes });
        }
        lc *= 2.0;
    }
    Err(Error::InvalidParameter(format!(
        "no monotone L_C found below {lc:e} after {max_doublings} doublings"
    )))
}
