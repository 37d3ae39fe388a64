//! Mean-field self-consistency and the mean-field counter-diabatic field.
//!
//! Each spin sees the effective longitudinal field `Jmᶻ + h`, so the
//! driving reduces to the two-level result with `h → Jmᶻ + h`, closed by
//! `mᶻ = (Jmᶻ + h) / √((Jmᶻ + h)² + Γ²)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quartic;
use crate::schedule::Schedule;
use crate::spin::SpinSize;

/// Residual below which a root of the squared quartic is accepted as a
/// solution of the un-squared fixed point.
pub const ROOT_TOLERANCE: f64 = 1e-12;

/// Largest allowed change of `mᶻ` between neighbouring trace points.
pub const CONTINUITY_THRESHOLD: f64 = 0.2;

const SINGULAR_RELATIVE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub coupling: f64,
    pub field_h: f64,
    pub n_spins: usize,
}

impl ModelParams {
    pub fn new(coupling: f64, field_h: f64, n_spins: usize) -> Result<Self> {
        if !(coupling >= 0.0 && coupling.is_finite()) {
            return Err(Error::InvalidParameter(format!("coupling {coupling} must be non-negative")));
        }
        if !(field_h >= 0.0 && field_h.is_finite()) {
            return Err(Error::InvalidParameter(format!("field {field_h} must be non-negative")));
        }
        if n_spins == 0 {
            return Err(Error::ZeroSpins);
        }
        Ok(Self { coupling, field_h, n_spins })
    }

    pub fn spin_size(&self) -> SpinSize {
        SpinSize::new(self.n_spins).expect("validated in constructor")
    }
}

/// Solved mean-field state at one instant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanFieldPoint {
    pub s: f64,
    pub gamma: f64,
    pub gamma_dot: f64,
    pub mz: f64,
    pub mz_dot: f64,
    pub theta_dot: f64,
    pub residual: f64,
}

/// Coefficients (lowest power first) of the squared self-consistency
/// `J²m⁴ + 2Jhm³ - (J² - h² - Γ²)m² - 2Jhm - h² = 0`.
pub fn quartic_coefficients(params: &ModelParams, gamma: f64) -> [f64; 5] {
    let j = params.coupling;
    let h = params.field_h;
    [
        -h * h,
        -2.0 * j * h,
        -(j * j - h * h - gamma * gamma),
        2.0 * j * h,
        j * j,
    ]
}

/// Defect `m - (Jm + h)/√((Jm + h)² + Γ²)` of the un-squared fixed point.
pub fn fixed_point_residual(params: &ModelParams, gamma: f64, mz: f64) -> f64 {
    let field = params.coupling * mz + params.field_h;
    let norm = field.hypot(gamma);
    if norm == 0.0 {
        return f64::NAN;
    }
    mz - field / norm
}

/// Mean-field ground-state energy per spin, `(J/2)m² - √((Jm + h)² + Γ²)`.
pub fn mean_field_energy(params: &ModelParams, gamma: f64, mz: f64) -> f64 {
    let field = params.coupling * mz + params.field_h;
    0.5 * params.coupling * mz * mz - field.hypot(gamma)
}

/// Every real quartic root in `[-1, 1]` that also solves the un-squared
/// fixed point; the sign-flipped roots introduced by squaring are dropped.
pub fn admissible_roots(params: &ModelParams, gamma: f64) -> Vec<f64> {
    let coeffs = quartic_coefficients(params, gamma);
    let mut roots: Vec<f64> = quartic::real_roots(&coeffs)
        .into_iter()
        .filter(|m| m.abs() <= 1.0 + 1e-9)
        .map(|m| polish_fixed_point(params, gamma, m.clamp(-1.0, 1.0)))
        .filter(|&m| fixed_point_residual(params, gamma, m).abs() < ROOT_TOLERANCE)
        .collect();
    roots.sort_by(|a, b| a.total_cmp(b));
    roots.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    roots
}

/// Self-consistent magnetization on the ground-state branch.
///
/// Among admissible roots the one with the lowest mean-field energy is
/// returned; at `h = 0` the tie between `±m` resolves to `m ≥ 0`.
pub fn solve_mz(params: &ModelParams, gamma: f64) -> Result<f64> {
    let roots = admissible_roots(params, gamma);
    let mut best: Option<(f64, f64)> = None;
    // ascending order, so ties resolve toward the larger root
    for m in roots {
        let e = mean_field_energy(params, gamma, m);
        match best {
            Some((_, be)) if e > be + 1e-14 * be.abs().max(1.0) => {}
            _ => best = Some((m, e)),
        }
    }
    best.map(|(m, _)| m).ok_or(Error::NoAdmissibleRoot {
        coupling: params.coupling,
        field_h: params.field_h,
        gamma,
    })
}

// Newton on the un-squared fixed point; steps are kept only while they
// reduce the residual.
fn polish_fixed_point(params: &ModelParams, gamma: f64, mut m: f64) -> f64 {
    let j = params.coupling;
    let mut r = fixed_point_residual(params, gamma, m);
    for _ in 0..8 {
        if !r.is_finite() || r == 0.0 {
            break;
        }
        let field = j * m + params.field_h;
        let norm = field.hypot(gamma);
        let slope = 1.0 - j * gamma * gamma / (norm * norm * norm);
        if slope == 0.0 || !slope.is_finite() {
            break;
        }
        let next = (m - r / slope).clamp(-1.0, 1.0);
        let rn = fixed_point_residual(params, gamma, next);
        if !(rn.abs() < r.abs()) {
            break;
        }
        m = next;
        r = rn;
    }
    m
}

/// `ṁᶻ` from differentiating the quartic along the protocol.
pub fn mz_dot(params: &ModelParams, gamma: f64, gamma_dot: f64, mz: f64) -> Result<f64> {
    let j = params.coupling;
    let h = params.field_h;
    let numerator = -gamma * gamma_dot * mz * mz;
    if numerator == 0.0 {
        return Ok(0.0);
    }
    let denominator = 2.0 * j * j * mz.powi(3) + 3.0 * j * h * mz * mz
        - (j * j - h * h - gamma * gamma) * mz
        - j * h;
    let scale = j * j + h * h + gamma * gamma;
    if denominator.abs() < SINGULAR_RELATIVE * scale {
        return Err(Error::SingularDerivative(denominator));
    }
    Ok(numerator / denominator)
}

/// Mean-field counter-diabatic field
/// `θ̇ = ½ [(Jm + h)Γ̇ - JṁΓ] / [(Jm + h)² + Γ²]`.
pub fn cd_field(params: &ModelParams, gamma: f64, gamma_dot: f64, mz: f64, mz_dot: f64) -> Result<f64> {
    let j = params.coupling;
    let field = j * mz + params.field_h;
    let denominator = field * field + gamma * gamma;
    if denominator == 0.0 {
        return Err(Error::DegenerateFields);
    }
    Ok(0.5 * (field * gamma_dot - j * mz_dot * gamma) / denominator)
}

/// Solves `mᶻ`, `ṁᶻ` and `θ̇` at one instant.
pub fn mean_field_point(params: &ModelParams, gamma: f64, gamma_dot: f64) -> Result<MeanFieldPoint> {
    let mz = solve_mz(params, gamma)?;
    let mz_dot = mz_dot(params, gamma, gamma_dot, mz)?;
    let theta_dot = cd_field(params, gamma, gamma_dot, mz, mz_dot)?;
    Ok(MeanFieldPoint {
        s: f64::NAN,
        gamma,
        gamma_dot,
        mz,
        mz_dot,
        theta_dot,
        residual: fixed_point_residual(params, gamma, mz),
    })
}

/// `mᶻ` for `h → +0`: zero in the paramagnet, `√(1 - Γ²/J²)` for `Γ ≤ J`.
pub fn limit_mz_h0(coupling: f64, gamma: f64) -> f64 {
    if gamma > coupling {
        0.0
    } else {
        (1.0 - (gamma / coupling).powi(2)).max(0.0).sqrt()
    }
}

/// `θ̇` for `h → +0`: zero in the paramagnet, `Γ̇ / (2√(J² - Γ²))` for `Γ < J`.
pub fn limit_theta_dot_h0(coupling: f64, gamma: f64, gamma_dot: f64) -> Result<f64> {
    if gamma > coupling || gamma_dot == 0.0 {
        return Ok(0.0);
    }
    let gap = coupling * coupling - gamma * gamma;
    if gap <= 0.0 {
        return Err(Error::CriticalDivergence(gamma_dot));
    }
    Ok(gamma_dot / (2.0 * gap.sqrt()))
}

/// Log-log slope of `|θ̇|` against `s - s_c` in the `h → +0` limit, fitted
/// by least squares on `n_points` logarithmically spaced offsets in
/// `[u_min, u_max]` past the critical time.
pub fn critical_exponent(coupling: f64, schedule: &Schedule, u_min: f64, u_max: f64, n_points: usize) -> Result<f64> {
    if !(coupling > 0.0 && u_min > 0.0 && u_max > u_min && n_points >= 2) {
        return Err(Error::InvalidParameter("exponent fit needs J > 0, 0 < u_min < u_max and two points".into()));
    }
    let sc = schedule
        .critical_time()
        .ok_or_else(|| Error::InvalidParameter("schedule never reaches Γ = J".into()))?;
    let (lo, hi) = (u_min.ln(), u_max.ln());
    let mut xs = Vec::with_capacity(n_points);
    let mut ys = Vec::with_capacity(n_points);
    for i in 0..n_points {
        let x = lo + (hi - lo) * i as f64 / (n_points - 1) as f64;
        let s = sc + x.exp();
        let theta = limit_theta_dot_h0(coupling, schedule.gamma(s, coupling)?, schedule.gamma_dot(s, coupling)?)?;
        if theta == 0.0 {
            return Err(Error::InvalidParameter(format!("θ̇ vanishes at s = {s}")));
        }
        xs.push(x);
        ys.push(theta.abs().ln());
    }
    let n = n_points as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    Ok(sxy / sxx)
}

/// Follows the fixed point from `(gamma_from, m_from)` to `gamma_to` with
/// tangent predictor and Newton corrector steps along a subdivided path in
/// `Γ`. A corrector that strays from its predictor triggers refinement.
pub fn continue_root(params: &ModelParams, gamma_from: f64, m_from: f64, gamma_to: f64) -> Option<f64> {
    let span = gamma_to - gamma_from;
    let mut pieces = ((span.abs() / 1e-3).ceil() as usize).max(4);
    while pieces <= 1 << 20 {
        if let Some(m) = walk(params, gamma_from, m_from, span, pieces) {
            let r = fixed_point_residual(params, gamma_to, m);
            return (r.abs() < ROOT_TOLERANCE).then_some(m);
        }
        pieces *= 4;
    }
    None
}

/// One predictor-corrector pass in `pieces` equal steps; `None` asks for a finer path.
fn walk(params: &ModelParams, gamma_from: f64, m_from: f64, span: f64, pieces: usize) -> Option<f64> {
    let mut m = m_from;
    let mut gamma = gamma_from;
    for i in 1..=pieces {
        let next_gamma = gamma_from + span * i as f64 / pieces as f64;
        let slope = tangent(params, gamma, m);
        let predicted = m + slope * (next_gamma - gamma);
        let corrected = polish_fixed_point(params, next_gamma, predicted.clamp(-1.0, 1.0));
        let r = fixed_point_residual(params, next_gamma, corrected);
        let drift = (corrected - predicted).abs();
        if !(r.abs() < 1e-9) || !slope.is_finite() || drift > 0.1 * (predicted - m).abs() + 1e-9 {
            return None;
        }
        m = corrected;
        gamma = next_gamma;
    }
    Some(m)
}

// dm/dΓ along the quartic, -Γm² / {2J²m³ + 3Jhm² - (J² - h² - Γ²)m - Jh}.
fn tangent(params: &ModelParams, gamma: f64, m: f64) -> f64 {
    let numerator = -gamma * m * m;
    if numerator == 0.0 {
        return 0.0;
    }
    let j = params.coupling;
    let h = params.field_h;
    numerator / (2.0 * j * j * m.powi(3) + 3.0 * j * h * m * m - (j * j - h * h - gamma * gamma) * m - j * h)
}

/// Tabulates the mean-field solution on a uniform `s` grid of `n_points`.
///
/// Each point is warm-started from its predecessor by [`continue_root`]
/// and cross-checked against full enumeration with energy selection. When
/// the two disagree the energy-selected root is kept, unless it lies more
/// than [`CONTINUITY_THRESHOLD`] away from the previous value, which is
/// reported as a branch jump.
pub fn trace_meanfield(params: &ModelParams, schedule: &Schedule, n_points: usize) -> Result<Vec<MeanFieldPoint>> {
    if n_points < 2 {
        return Err(Error::InvalidParameter("trace needs at least two points".into()));
    }
    let mut out: Vec<MeanFieldPoint> = Vec::with_capacity(n_points);
    for i in 0..n_points {
        let s = i as f64 / (n_points - 1) as f64;
        let gamma = schedule.gamma(s, params.coupling)?;
        let gamma_dot = schedule.gamma_dot(s, params.coupling)?;
        let mut point = mean_field_point(params, gamma, gamma_dot)?;
        point.s = s;
        if let Some(prev) = out.last() {
            let continued = continue_root(params, prev.gamma, prev.mz, gamma);
            let agrees = continued.is_some_and(|m| (m - point.mz).abs() < 1e-8);
            let jump = (point.mz - prev.mz).abs();
            if !agrees && jump > CONTINUITY_THRESHOLD {
                return Err(Error::BranchJump { s, jump });
            }
        }
        out.push(point);
    }
    Ok(out)
}
