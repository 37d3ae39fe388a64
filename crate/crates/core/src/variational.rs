//! Variational local counter-diabatic field for the gauge ansatz `α Σσʸ`.
//!
//! `α` minimizes the Hilbert-Schmidt norm of
//! `G = ∂ₜH₀ + i[A, H₀]`, which in the collective-spin sector reads
//! `G = -2(Γ̇ - 2hα)Sˣ + (2Jα/S)(SᶻSˣ + SˣSᶻ) - 4ΓαSᶻ`.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::meanfield::{self, ModelParams};
use crate::schedule::Schedule;
use crate::spin::{CMatrix, SpinOperatorSet};
use crate::two_level::TwoLevelFields;

/// Closed-form `Tr G²`.
pub fn trace_norm_g(params: &ModelParams, gamma: f64, gamma_dot: f64, alpha: f64) -> f64 {
    let size = params.spin_size();
    let s = size.s();
    let k = size.trace_factor();
    let j = params.coupling;
    let h = params.field_h;
    let transverse = gamma_dot - 2.0 * h * alpha;
    4.0 / 3.0 * transverse * transverse * k
        + (2.0 * j * alpha / s).powi(2) * k * (2.0 * s - 1.0) * (2.0 * s + 3.0) / 15.0
        + (4.0 * gamma * alpha).powi(2) * k / 3.0
}

/// `∂ Tr G² / ∂α`.
pub fn trace_norm_g_slope(params: &ModelParams, gamma: f64, gamma_dot: f64, alpha: f64) -> f64 {
    let size = params.spin_size();
    let s = size.s();
    let k = size.trace_factor();
    let j = params.coupling;
    let h = params.field_h;
    -16.0 / 3.0 * h * (gamma_dot - 2.0 * h * alpha) * k
        + 2.0 * alpha * (2.0 * j / s).powi(2) * k * (2.0 * s - 1.0) * (2.0 * s + 3.0) / 15.0
        + 32.0 / 3.0 * gamma * gamma * alpha * k
}

/// Explicit matrix for `G`, for brute-force traces.
pub fn g_matrix(ops: &SpinOperatorSet, params: &ModelParams, gamma: f64, gamma_dot: f64, alpha: f64) -> CMatrix {
    let s = ops.size.s();
    let h = params.field_h;
    &ops.sx * Complex64::from(-2.0 * (gamma_dot - 2.0 * h * alpha))
        + &ops.anticomm_zx * Complex64::from(2.0 * params.coupling * alpha / s)
        - &ops.sz * Complex64::from(4.0 * gamma * alpha)
}

/// `(J/S)²(2S - 1)(2S + 3)/20`, the finite-size correction in the denominator.
pub fn correction_term(params: &ModelParams) -> f64 {
    let s = params.spin_size().s();
    (params.coupling / s).powi(2) * (2.0 * s - 1.0) * (2.0 * s + 3.0) / 20.0
}

/// Minimizer `α = ½ hΓ̇ / (h² + Γ² + (J/S)²(2S-1)(2S+3)/20)`.
pub fn variational_alpha(params: &ModelParams, gamma: f64, gamma_dot: f64) -> Result<f64> {
    let h = params.field_h;
    let denominator = h * h + gamma * gamma + correction_term(params);
    if !(denominator > 0.0) {
        return Err(Error::DegenerateFields);
    }
    Ok(0.5 * h * gamma_dot / denominator)
}

/// Variational `α` for one spin with both fields time dependent.
///
/// Here `Tr G² = 2[(Γ̇ - 2hα)² + (ḣ + 2Γα)²]`, a quadratic `aα² + bα + c`
/// whose vertex is returned.
pub fn two_level_alpha(f: &TwoLevelFields) -> Result<f64> {
    let a = 8.0 * (f.h * f.h + f.gamma * f.gamma);
    let b = -8.0 * f.h * f.gamma_dot + 8.0 * f.gamma * f.h_dot;
    if a == 0.0 {
        return Err(Error::DegenerateFields);
    }
    Ok(-b / (2.0 * a))
}

/// Variational `α` of the mean-field Hamiltonian: the single-spin result
/// with `h → Jmᶻ + h` and `ḣ → Jṁᶻ`.
pub fn mean_field_alpha(params: &ModelParams, gamma: f64, gamma_dot: f64, mz: f64, mz_dot: f64) -> Result<f64> {
    two_level_alpha(&TwoLevelFields {
        gamma,
        h: params.coupling * mz + params.field_h,
        gamma_dot,
        h_dot: params.coupling * mz_dot,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FieldComparison {
    pub s: f64,
    pub alpha: f64,
    pub theta_dot: f64,
    /// `α/θ̇`; NaN where `θ̇ = 0`.
    pub ratio: f64,
}

/// Variational and mean-field fields on a shared uniform grid.
pub fn compare_fields(params: &ModelParams, schedule: &Schedule, n_points: usize) -> Result<Vec<FieldComparison>> {
    meanfield::trace_meanfield(params, schedule, n_points)?
        .into_iter()
        .map(|p| {
            let alpha = variational_alpha(params, p.gamma, p.gamma_dot)?;
            let ratio = if p.theta_dot == 0.0 { f64::NAN } else { alpha / p.theta_dot };
            Ok(FieldComparison { s: p.s, alpha, theta_dot: p.theta_dot, ratio })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::meanfield::mean_field_point;
    use crate::spin::{build_operators, SpinSize};
    use crate::two_level;

    fn params(j: f64, h: f64, n: usize) -> ModelParams {
        ModelParams::new(j, h, n).unwrap()
    }

    #[test]
    fn spin_half_norm() {
        let p = params(1.3, 0.2, 1);
        let (g, gd, a): (f64, f64, f64) = (0.7, -1.1, 0.35);
        let expect = 2.0 * (gd - 2.0 * 0.2 * a).powi(2) + 8.0 * g * g * a * a;
        assert!((trace_norm_g(&p, g, gd, a) - expect).abs() < 1e-14);
    }

    #[test]
    fn zero_alpha_norm() {
        let p = params(1.0, 0.01, 4);
        let k = SpinSize::new(4).unwrap().trace_factor();
        assert!((trace_norm_g(&p, 1.2, 0.9, 0.0) - 4.0 / 3.0 * 0.81 * k).abs() < 1e-13);
    }

    #[test]
    fn brute_force_trace_small_spins() {
        for n in [2, 3, 4] {
            let p = params(0.9, 0.13, n);
            let ops = build_operators(SpinSize::new(n).unwrap());
            let (g, gd, a) = (1.4, -0.6, 0.27);
            let m = g_matrix(&ops, &p, g, gd, a);
            let brute = (&m * &m).trace().re;
            let closed = trace_norm_g(&p, g, gd, a);
            assert!((brute - closed).abs() < 1e-10 * closed, "n={n}: {brute} vs {closed}");
        }
    }

    #[test]
    fn alpha_reductions() {
        let (g, gd, h) = (0.8, -2.0, 0.05);
        let tl = two_level::theta_dot(&TwoLevelFields { gamma: g, h, gamma_dot: gd, h_dot: 0.0 }).unwrap();
        assert_eq!(variational_alpha(&params(1.0, h, 1), g, gd).unwrap(), tl);
        assert_eq!(variational_alpha(&params(0.0, h, 50), g, gd).unwrap(), tl);
        assert_eq!(correction_term(&params(1.0, h, 2)), 0.25);
        let a = variational_alpha(&params(1.0, h, 2), g, gd).unwrap();
        assert!((a - 0.5 * h * gd / (h * h + g * g + 0.25)).abs() < 1e-16);
    }

    #[test]
    fn alpha_is_stationary() {
        let p = params(1.0, 0.02, 10);
        let a = variational_alpha(&p, 0.9, 1.7).unwrap();
        let slope = trace_norm_g_slope(&p, 0.9, 1.7, a);
        assert!(slope.abs() < 1e-8 * trace_norm_g(&p, 0.9, 1.7, a).max(1.0));
    }

    #[test]
    fn two_level_alpha_is_theta_dot() {
        let f = TwoLevelFields { gamma: 0.4, h: -0.9, gamma_dot: 1.5, h_dot: 0.7 };
        let a = two_level_alpha(&f).unwrap();
        assert!((a - two_level::theta_dot(&f).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn mean_field_substitution_recovers_cd_field() {
        let p = params(1.0, 1e-3, 1000);
        let pt = mean_field_point(&p, 1.2, -2.0).unwrap();
        let a = mean_field_alpha(&p, pt.gamma, pt.gamma_dot, pt.mz, pt.mz_dot).unwrap();
        assert!((a - pt.theta_dot).abs() < 1e-10 * pt.theta_dot.abs());
    }

    #[test]
    fn zero_coupling_fields_coincide() {
        let p = params(0.0, 0.05, 20);
        let cmp = compare_fields(&p, &Schedule::quintic(1.0).unwrap(), 51).unwrap();
        for c in &cmp {
            assert_eq!(c.alpha, c.theta_dot);
        }
    }

    #[test]
    fn weak_field_suppresses_variational_field() {
        let p = params(1.0, 1e-3, 1000);
        let cmp = compare_fields(&p, &Schedule::quintic(1.0).unwrap(), 5).unwrap();
        let quarter = cmp[1];
        assert_eq!(quarter.s, 0.25);
        assert!(quarter.alpha.abs() < quarter.theta_dot.abs());
        // single spin: no correction, yet mean field still shifts h by Jmᶻ
        let single = params(1.0, 1e-3, 1);
        let c = compare_fields(&single, &Schedule::quintic(1.0).unwrap(), 5).unwrap()[1];
        assert!(c.alpha != c.theta_dot);
    }
}
