//! Invariant checks.
//!
//! Each check records the measured defect next to the tolerance it is held to,
//! so a report can be inspected as well as asserted on.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::Result;
use crate::meanfield::{self, ModelParams};
use crate::schedule::Schedule;
use crate::spin::{self, CMatrix, SpinSize};
use crate::variational;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub measured: f64,
    pub tolerance: f64,
}

impl Check {
    fn below(name: &str, measured: f64, tolerance: f64) -> Self {
        Self { name: name.into(), passed: measured < tolerance, measured, tolerance }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiagnosticsReport {
    pub checks: Vec<Check>,
    pub all_passed: bool,
}

/// Runs the spin-algebra, root, trace-formula, critical-exponent and
/// substitution checks for the model's collective spin.
pub fn run_diagnostics(params: &ModelParams) -> Result<DiagnosticsReport> {
    let size = params.spin_size();
    let (commutator, casimir) = algebra_defects(size);
    let scale = (size.s() * (size.s() + 1.0)).max(1.0);
    let mut checks = vec![
        Check::below("commutator [Sx,Sy]=iSz", commutator, 1e-12 * scale),
        Check::below("casimir S^2=S(S+1)", casimir, 1e-9),
    ];
    let (residual, slope_defect) = root_defects(params.coupling)?;
    checks.push(Check::below("fixed-point residual", residual, 1e-10));
    checks.push(Check::below("mz_dot vs finite difference", slope_defect, 1e-6));
    checks.push(Check::below("trace formula vs brute force", trace_formula_defect()?, 1e-10));
    let exponent = meanfield::critical_exponent(1.0, &Schedule::quintic(1.0)?, 1e-4, 1e-2, 41)?;
    checks.push(Check::below("critical exponent |slope - 1/2|", (exponent - 0.5).abs(), 0.01));
    checks.push(Check::below("mean-field substitution", substitution_defect(params)?, 1e-10));
    let all_passed = checks.iter().all(|c| c.passed);
    Ok(DiagnosticsReport { checks, all_passed })
}

/// Largest entry defects of `[Sˣ, Sʸ] - iSᶻ` and `S² - S(S+1)`, computed
/// from the tridiagonal band so large spins stay cheap.
pub fn algebra_defects(size: SpinSize) -> (f64, f64) {
    let dim = size.dim();
    let s = size.s();
    // Sˣ and Sʸ as (sub, super) diagonals; Sᶻ diagonal.
    let x = |i: usize, j: usize| -> Complex64 {
        if j == i + 1 || i == j + 1 {
            Complex64::from(0.5 * size.ladder(i.max(j)))
        } else {
            Complex64::new(0.0, 0.0)
        }
    };
    let y = |i: usize, j: usize| -> Complex64 {
        if j == i + 1 {
            Complex64::new(0.0, -0.5 * size.ladder(j))
        } else if i == j + 1 {
            Complex64::new(0.0, 0.5 * size.ladder(i))
        } else {
            Complex64::new(0.0, 0.0)
        }
    };
    let z = |i: usize, j: usize| -> Complex64 { if i == j { size.m(i).into() } else { Complex64::new(0.0, 0.0) } };
    let product = |a: &dyn Fn(usize, usize) -> Complex64, b: &dyn Fn(usize, usize) -> Complex64, i: usize, j: usize| {
        let lo = i.saturating_sub(1);
        let hi = (i + 1).min(dim - 1);
        (lo..=hi).map(|k| a(i, k) * b(k, j)).sum::<Complex64>()
    };
    let (mut comm, mut cas) = (0.0f64, 0.0f64);
    for i in 0..dim {
        for j in i.saturating_sub(2)..(i + 3).min(dim) {
            let c = product(&x, &y, i, j) - product(&y, &x, i, j) - Complex64::i() * z(i, j);
            comm = comm.max(c.norm());
            let mut k = product(&x, &x, i, j) + product(&y, &y, i, j) + product(&z, &z, i, j);
            if i == j {
                k -= s * (s + 1.0);
            }
            cas = cas.max(k.norm());
        }
    }
    (comm, cas)
}

/// Worst fixed-point residual and worst relative `ṁᶻ` mismatch against a
/// central difference, over a deterministic grid of `h ∈ (0, 0.5]` and `Γ ∈ [0, 3]`.
fn root_defects(coupling: f64) -> Result<(f64, f64)> {
    let (mut residual, mut slope) = (0.0f64, 0.0f64);
    let coupling = if coupling > 0.0 { coupling } else { 1.0 };
    for ih in 0..40 {
        let h = 0.5 * 10f64.powf(-4.0 * ih as f64 / 39.0);
        let params = ModelParams::new(coupling, h, 1)?;
        for ig in 0..=60 {
            let gamma = 3.0 * coupling * ig as f64 / 60.0;
            let m = meanfield::solve_mz(&params, gamma)?;
            residual = residual.max(meanfield::fixed_point_residual(&params, gamma, m).abs());
            if gamma == 0.0 {
                continue;
            }
            let Ok(analytic) = meanfield::mz_dot(&params, gamma, 1.0, m) else { continue };
            let eps = 1e-6 * gamma.max(1.0);
            let up = meanfield::solve_mz(&params, gamma + eps)?;
            let down = meanfield::solve_mz(&params, gamma - eps)?;
            if (up - m).abs() > 1e-3 || (m - down).abs() > 1e-3 {
                continue;
            }
            let numeric = (up - down) / (2.0 * eps);
            slope = slope.max((analytic - numeric).abs() / analytic.abs().max(1.0));
        }
    }
    Ok((residual, slope))
}

fn trace_formula_defect() -> Result<f64> {
    let mut worst = 0.0f64;
    for n in [2, 3, 4] {
        let size = SpinSize::new(n)?;
        let ops = spin::build_operators(size);
        for &(j, h, gamma, gamma_dot, alpha) in &[
            (1.0, 0.3, 1.2, -0.7, 0.25),
            (0.4, 1.1, 0.2, 2.0, -1.3),
            (2.0, 0.0, 0.9, 0.5, 0.8),
        ] {
            let params = ModelParams::new(j, h, n)?;
            let g: CMatrix = variational::g_matrix(&ops, &params, gamma, gamma_dot, alpha);
            let brute = (&g * &g).trace().re;
            let closed = variational::trace_norm_g(&params, gamma, gamma_dot, alpha);
            worst = worst.max((brute - closed).abs() / brute.abs().max(1.0));
        }
    }
    Ok(worst)
}

/// `θ̇` against the single-spin variational `α` after `h → Jmᶻ + h`, `ḣ → Jṁᶻ`.
fn substitution_defect(params: &ModelParams) -> Result<f64> {
    let schedule = Schedule::quintic(1.0)?;
    let mut worst = 0.0f64;
    for p in meanfield::trace_meanfield(params, &schedule, 101)? {
        let alpha = variational::mean_field_alpha(params, p.gamma, p.gamma_dot, p.mz, p.mz_dot)?;
        worst = worst.max((alpha - p.theta_dot).abs() / p.theta_dot.abs().max(1.0));
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_model_passes() {
        let report = run_diagnostics(&ModelParams::new(1.0, 1e-3, 1000).unwrap()).unwrap();
        for c in &report.checks {
            assert!(c.passed, "{} measured {} tolerance {}", c.name, c.measured, c.tolerance);
        }
        assert!(report.all_passed);
    }

    #[test]
    fn band_defects_match_dense() {
        let size = SpinSize::new(5).unwrap();
        let ops = spin::build_operators(size);
        let comm = &ops.sx * &ops.sy - &ops.sy * &ops.sx - &ops.sz * Complex64::i();
        let dense = comm.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let (band, cas) = algebra_defects(size);
        assert!((band - dense).abs() < 1e-14);
        assert!(cas < 1e-13);
    }
}
