//! Numeric minimization of `tr|ρ − δ|` over incoherent states `δ`.
//!
//! The objective is convex on the probability simplex. [`closest_incoherent`]
//! runs a projected subgradient method from the dephased state and from a few
//! Dirichlet-perturbed starts and keeps the best point seen. [`grid_oracle`]
//! is an independent exhaustive search over a simplex lattice for `d ≤ 4`.
//!
//! The module also exposes the characteristic polynomial
//! `f(λ) = det[λI − (ρ − δ)]` for constant-off-diagonal states and a bisection
//! search for an eigenvalue of `ρ − δ` beyond `(d−1)a`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matcore::{eig_hermitian, HermitianMatrix};
use crate::measures::{c_tr_family_closed, MeasureKind, MeasureReport, SolverDiagnostics};
use crate::states::{dephase, sample_flat_dirichlet, seeded_rng, DensityMatrix, DiagonalState, FamilyState};

/// Number of iterations over which the best objective must stop improving.
pub const STABILIZATION_WINDOW: usize = 100;

/// Eigenvalues with magnitude at or below this count as zero in the subgradient.
const ZERO_EIGENVALUE: f64 = 1e-14;

const PERTURBATION_SEED: u64 = 0x5eed_c0de_0000_0000;
const PERTURBATION_WEIGHT: f64 = 0.5;

/// Step-size factors for the refinement runs started from the best restart.
const POLISH_SHRINK: [f64; 2] = [0.1, 0.01];

const GRID_MAX_DIM: usize = 4;
const GRID_MIN_STEPS: usize = 20;

const BISECTION_WIDTH: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub max_iters: usize,
    pub step_init: f64,
    /// Stop once the best objective improves by less than this over a window.
    pub tol: f64,
    pub restarts: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            max_iters: 5000,
            step_init: 0.1,
            tol: 1e-8,
            restarts: 5,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iters == 0 || self.restarts == 0 {
            return Err(Error::Config("max_iters and restarts must be positive".into()));
        }
        if !(self.step_init > 0.0 && self.step_init.is_finite()) {
            return Err(Error::Config(format!(
                "step_init must be positive, got {}",
                self.step_init
            )));
        }
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::Config(format!("tol must be positive, got {}", self.tol)));
        }
        Ok(())
    }
}

/// `tr|ρ − diag(δ)|`.
pub fn objective(rho: &HermitianMatrix, delta: &[f64]) -> Result<f64> {
    rho.minus_diagonal(delta).trace_norm()
}

/// Objective value and a subgradient with respect to `δ`.
///
/// With `ρ − diag(δ) = U·diag(λ)·U†`, `∂/∂δ_i = −Σ_k sign(λ_k)|U_ik|²`, taking sign(0) = 0.
pub fn subgradient(rho: &HermitianMatrix, delta: &[f64]) -> Result<(f64, Vec<f64>)> {
    let eig = eig_hermitian(&rho.minus_diagonal(delta))?;
    let value = eig.values.iter().map(|l| l.abs()).sum();
    let n = delta.len();
    let grad = (0..n)
        .map(|i| {
            -eig.values
                .iter()
                .enumerate()
                .map(|(k, &l)| {
                    let sign = if l.abs() <= ZERO_EIGENVALUE { 0.0 } else { l.signum() };
                    sign * eig.vectors[(i, k)].norm_sqr()
                })
                .sum::<f64>()
        })
        .collect();
    Ok((value, grad))
}

/// Euclidean projection onto the probability simplex (sort and threshold).
pub fn project_simplex(v: &[f64]) -> Vec<f64> {
    if v.iter().all(|&x| x >= 0.0) && (v.iter().sum::<f64>() - 1.0).abs() <= 4.0 * f64::EPSILON {
        return v.to_vec();
    }
    let mut sorted = v.to_vec();
    // Stable, so equal entries keep index order.
    sorted.sort_by(|a, b| b.partial_cmp(a).expect("finite coordinates"));
    let mut cumulative = 0.0;
    let mut theta = 0.0;
    for (j, &u) in sorted.iter().enumerate() {
        cumulative += u;
        let candidate = (cumulative - 1.0) / (j + 1) as f64;
        if u - candidate > 0.0 {
            theta = candidate;
        }
    }
    v.iter().map(|&x| (x - theta).max(0.0)).collect()
}

/// Result of one projected-subgradient run.
#[derive(Debug, Clone, PartialEq)]
pub struct SubgradientRun {
    pub value: f64,
    pub point: Vec<f64>,
    pub iterations: usize,
    pub stabilized: bool,
    /// Decrease of the best value over the last window (zero once stationary).
    pub residual: f64,
}

/// Projected subgradient descent from `start` with step `step_init/√k` along
/// the normalized tangent subgradient.
pub fn minimize_from(rho: &HermitianMatrix, start: &[f64], cfg: &SolverConfig) -> Result<SubgradientRun> {
    cfg.validate()?;
    let n = rho.dim();
    if start.len() != n {
        return Err(Error::Shape(format!(
            "start has length {}, state has dim {n}",
            start.len()
        )));
    }
    let mut point = project_simplex(start);
    let mut best_point = point.clone();
    let mut best_value = f64::INFINITY;
    let mut history: Vec<f64> = Vec::with_capacity(cfg.max_iters.min(1 << 16));

    for k in 1..=cfg.max_iters {
        let (value, grad) = subgradient(rho, &point)?;
        if value < best_value {
            best_value = value;
            best_point.clone_from(&point);
        }
        history.push(best_value);

        let mean = grad.iter().sum::<f64>() / n as f64;
        let tangent: Vec<f64> = grad.iter().map(|g| g - mean).collect();
        let norm = tangent.iter().map(|g| g * g).sum::<f64>().sqrt();
        if norm <= f64::EPSILON {
            return Ok(SubgradientRun {
                value: best_value,
                point: best_point,
                iterations: k,
                stabilized: true,
                residual: 0.0,
            });
        }
        if k > STABILIZATION_WINDOW {
            let residual = history[k - 1 - STABILIZATION_WINDOW] - best_value;
            if residual < cfg.tol {
                return Ok(SubgradientRun {
                    value: best_value,
                    point: best_point,
                    iterations: k,
                    stabilized: true,
                    residual,
                });
            }
        }

        let step = cfg.step_init / (k as f64).sqrt() / norm;
        let moved: Vec<f64> = point.iter().zip(&tangent).map(|(p, g)| p - step * g).collect();
        point = project_simplex(&moved);
    }

    let k = history.len();
    let residual = if k > STABILIZATION_WINDOW {
        history[k - 1 - STABILIZATION_WINDOW] - best_value
    } else {
        f64::INFINITY
    };
    Ok(SubgradientRun {
        value: best_value,
        point: best_point,
        iterations: k,
        stabilized: false,
        residual,
    })
}

/// Starting points: the dephased state, then dephased/Dirichlet mixtures.
fn restart_points(rho: &DensityMatrix, restarts: usize) -> Vec<Vec<f64>> {
    let base = dephase(rho).p().to_vec();
    let mut points = vec![base.clone()];
    for r in 1..restarts {
        let mut rng = seeded_rng(PERTURBATION_SEED ^ r as u64);
        let noise = sample_flat_dirichlet(&mut rng, base.len());
        points.push(
            base.iter()
                .zip(&noise)
                .map(|(b, z)| (1.0 - PERTURBATION_WEIGHT) * b + PERTURBATION_WEIGHT * z)
                .collect(),
        );
    }
    points
}

/// Numeric trace-distance coherence: `min_δ tr|ρ − δ|` over diagonal states.
///
/// Fails with [`Error::Convergence`] when the final refinement, started from the
/// best point found, exhausts `max_iters` without its objective stabilizing.
pub fn closest_incoherent(rho: &DensityMatrix, cfg: &SolverConfig) -> Result<MeasureReport> {
    cfg.validate()?;
    let h = rho.hermitian();
    let mut best: Option<SubgradientRun> = None;
    let mut total_iterations = 0;
    for start in restart_points(rho, cfg.restarts) {
        let run = minimize_from(h, &start, cfg)?;
        total_iterations += run.iterations;
        // Strict improvement only, so ties go to the earlier restart.
        if best.as_ref().is_none_or(|b| run.value < b.value) {
            best = Some(run);
        }
    }
    let mut best = best.expect("at least one restart");
    // Refine the winner with progressively shorter steps. The last refinement
    // decides convergence: if it stabilizes, no further progress was found
    // near the reported point.
    let mut settled = best.stabilized;
    let mut residual = best.residual;
    for shrink in POLISH_SHRINK {
        let polish_cfg = SolverConfig {
            step_init: cfg.step_init * shrink,
            ..*cfg
        };
        let run = minimize_from(h, &best.point, &polish_cfg)?;
        total_iterations += run.iterations;
        settled = run.stabilized;
        residual = run.residual;
        if run.value < best.value {
            best = run;
        }
    }
    if !settled {
        return Err(Error::Convergence {
            iterations: total_iterations,
            best_value: best.value,
        });
    }
    Ok(MeasureReport {
        measure: MeasureKind::TraceDistNumeric,
        value: best.value,
        argmin: Some(DiagonalState::new_unchecked(best.point)),
        diagnostics: Some(SolverDiagnostics {
            iterations: total_iterations,
            residual,
        }),
    })
}

/// Exhaustive minimum of the objective over `{δ : δ_i = k_i/steps, Σk_i = steps}`.
///
/// The lattice minimum exceeds the true minimum by at most `d/steps`.
pub fn grid_oracle(rho: &DensityMatrix, steps: usize) -> Result<MeasureReport> {
    let d = rho.dim();
    if d > GRID_MAX_DIM {
        return Err(Error::Dimension(format!(
            "grid oracle supports dim <= {GRID_MAX_DIM}, got {d}"
        )));
    }
    if steps < GRID_MIN_STEPS {
        return Err(Error::Precondition(format!(
            "grid oracle needs steps >= {GRID_MIN_STEPS}, got {steps}"
        )));
    }
    let h = rho.hermitian();
    let mut counts = vec![0usize; d];
    let mut best = (f64::INFINITY, Vec::new());
    let mut evaluated = 0usize;
    enumerate_compositions(&mut counts, 0, steps, &mut |k| {
        let delta: Vec<f64> = k.iter().map(|&c| c as f64 / steps as f64).collect();
        let value = objective(h, &delta)?;
        evaluated += 1;
        if value < best.0 {
            best = (value, delta);
        }
        Ok(())
    })?;
    Ok(MeasureReport {
        measure: MeasureKind::TraceDistNumeric,
        value: best.0,
        argmin: Some(DiagonalState::new_unchecked(best.1)),
        diagnostics: Some(SolverDiagnostics {
            iterations: evaluated,
            residual: d as f64 / steps as f64,
        }),
    })
}

fn enumerate_compositions(
    counts: &mut [usize],
    index: usize,
    remaining: usize,
    visit: &mut impl FnMut(&[usize]) -> Result<()>,
) -> Result<()> {
    if index == counts.len() - 1 {
        counts[index] = remaining;
        return visit(counts);
    }
    for c in 0..=remaining {
        counts[index] = c;
        enumerate_compositions(counts, index + 1, remaining - c, visit)?;
    }
    Ok(())
}

/// `f(λ) = det[λI − (ρ − δ)]` for a constant-off-diagonal state.
#[derive(Debug, Clone, PartialEq)]
pub struct CharPolyPoint {
    pub lambda: f64,
    pub value: f64,
    /// `y_i = x_i − δ_i`.
    pub y: Vec<f64>,
    /// `(1 − Σ a/q_i)·Π q_i` with `q_i = λ − y_i + a`; absent when some `q_i` vanishes.
    pub product_form: Option<f64>,
    /// Whether the product form matches the determinant to relative 1e-8.
    pub cross_check: Option<bool>,
}

/// Evaluates the characteristic polynomial by LU determinant, and the
/// rank-one-update product form alongside it when that form has no pole.
pub fn char_poly_eval(lambda: f64, f: &FamilyState, delta: &DiagonalState) -> Result<CharPolyPoint> {
    let d = f.dim();
    if delta.dim() != d {
        return Err(Error::Shape(format!(
            "family state has dim {d}, diagonal state has dim {}",
            delta.dim()
        )));
    }
    let a = f.a();
    let y: Vec<f64> = f.x().iter().zip(delta.p()).map(|(x, p)| x - p).collect();

    let mut m = vec![-a; d * d];
    for i in 0..d {
        m[i * d + i] = lambda - y[i];
    }
    let value = lu_determinant(d, &mut m);

    let q: Vec<f64> = y.iter().map(|yi| lambda - yi + a).collect();
    let scale = q
        .iter()
        .map(|v| v.abs())
        .fold(0.0, f64::max)
        .max(a.abs())
        .max(f64::MIN_POSITIVE);
    let (product_form, cross_check) = if q.iter().any(|v| v.abs() <= 1e-12 * scale) {
        (None, None)
    } else {
        let prod: f64 = q.iter().product();
        let form = (1.0 - q.iter().map(|qi| a / qi).sum::<f64>()) * prod;
        let magnitude = prod.abs() * (1.0 + q.iter().map(|qi| (a / qi).abs()).sum::<f64>());
        let agrees = (value - form).abs() <= 1e-8 * magnitude.max(value.abs());
        (Some(form), Some(agrees))
    };

    Ok(CharPolyPoint {
        lambda,
        value,
        y,
        product_form,
        cross_check,
    })
}

/// Determinant of a row-major real matrix by LU with partial pivoting; consumes `m`.
fn lu_determinant(n: usize, m: &mut [f64]) -> f64 {
    let mut det = 1.0;
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| m[i * n + col].abs().partial_cmp(&m[j * n + col].abs()).expect("finite"))
            .expect("non-empty range");
        if m[pivot * n + col] == 0.0 {
            return 0.0;
        }
        if pivot != col {
            for k in 0..n {
                m.swap(col * n + k, pivot * n + k);
            }
            det = -det;
        }
        let p = m[col * n + col];
        det *= p;
        for row in (col + 1)..n {
            let factor = m[row * n + col] / p;
            if factor != 0.0 {
                for k in col..n {
                    m[row * n + k] -= factor * m[col * n + k];
                }
            }
        }
    }
    det
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BolzanoBracket {
    /// True when the root lies strictly beyond `(d−1)a` (above for `a > 0`, below for `a < 0`).
    pub eigenvalue_beyond: bool,
    /// An eigenvalue of `ρ − δ`, located to within 1e-12.
    pub witness: f64,
}

/// Locates an eigenvalue of `ρ − δ` beyond `(d−1)a` by bisecting `f(λ)`.
///
/// Requires `a ≠ 0`, `y ≠ 0` and `|y_i| < d|a|` for every `i`. The search
/// interval reaches `d` past `(d−1)a`, which covers the whole spectrum since
/// eigenvalues of a difference of two states lie in `[−1, 1]`.
pub fn bolzano_bracket(f: &FamilyState, delta: &DiagonalState) -> Result<BolzanoBracket> {
    let d = f.dim();
    if delta.dim() != d {
        return Err(Error::Shape(format!(
            "family state has dim {d}, diagonal state has dim {}",
            delta.dim()
        )));
    }
    let a = f.a();
    if a == 0.0 {
        return Err(Error::Precondition("off-diagonal value a is zero".into()));
    }
    let bound = d as f64 * a.abs();
    let y: Vec<f64> = f.x().iter().zip(delta.p()).map(|(x, p)| x - p).collect();
    if y.iter().all(|&v| v == 0.0) {
        return Err(Error::Precondition("δ equals the dephased state (all y_i = 0)".into()));
    }
    if let Some(i) = y.iter().position(|v| v.abs() >= bound) {
        return Err(Error::Precondition(format!(
            "|y_{i}| = {} is not below d|a| = {bound}",
            y[i].abs()
        )));
    }

    let anchor = (d as f64 - 1.0) * a;
    let far = anchor + a.signum() * d as f64;
    let eval = |lambda: f64| char_poly_eval(lambda, f, delta).map(|p| p.value);

    let f_anchor = eval(anchor)?;
    let f_far = eval(far)?;
    if f_anchor == 0.0 || f_anchor.signum() == f_far.signum() {
        return Ok(BolzanoBracket {
            eigenvalue_beyond: false,
            witness: anchor,
        });
    }

    // Invariant: sign(f(near)) == sign(f_anchor) and sign(f(away)) == sign(f_far).
    let (mut near, mut away) = (anchor, far);
    while (away - near).abs() > BISECTION_WIDTH {
        let mid = 0.5 * (near + away);
        if mid == near || mid == away {
            break;
        }
        let f_mid = eval(mid)?;
        if f_mid == 0.0 {
            near = mid;
            away = mid;
            break;
        }
        if f_mid.signum() == f_anchor.signum() {
            near = mid;
        } else {
            away = mid;
        }
    }
    let witness = 0.5 * (near + away);
    let eigenvalue_beyond = if a > 0.0 { witness > anchor } else { witness < anchor };
    Ok(BolzanoBracket {
        eigenvalue_beyond,
        witness,
    })
}

/// Closed form against numeric optimum for one constant-off-diagonal state.
#[derive(Debug, Clone, PartialEq)]
pub struct Theorem2Check {
    pub closed: f64,
    pub numeric: f64,
    /// l∞ distance between the numeric minimizer and the populations `x`.
    pub argmin_gap: f64,
    pub report: MeasureReport,
}

impl Theorem2Check {
    pub fn abs_gap(&self) -> f64 {
        (self.numeric - self.closed).abs()
    }
}

/// Runs [`closest_incoherent`] on a family state and compares it with `2(d−1)|a|`.
pub fn verify_theorem2(f: &FamilyState, cfg: &SolverConfig) -> Result<Theorem2Check> {
    let closed = c_tr_family_closed(f).value;
    let report = closest_incoherent(&f.to_density(), cfg)?;
    let argmin_gap = report
        .argmin
        .as_ref()
        .expect("numeric report carries a minimizer")
        .linf_distance(f.x());
    Ok(Theorem2Check {
        closed,
        numeric: report.value,
        argmin_gap,
        report,
    })
}
