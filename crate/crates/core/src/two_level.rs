//! Exact counter-diabatic driving of `H₀ = -Γσˣ - hσᶻ`.
//!
//! The ground state is `(cos θ, sin θ)` with `tan 2θ = Γ/h`, and the
//! transitionless correction is `θ̇ σʸ`.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::propagate::{Integrator, Workspace};
use crate::schedule::Schedule;
use crate::spin::CMatrix;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoLevelFields {
    pub gamma: f64,
    pub h: f64,
    pub gamma_dot: f64,
    pub h_dot: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoLevelEigen {
    pub e_minus: f64,
    pub e_plus: f64,
    pub theta: f64,
}

impl TwoLevelEigen {
    pub fn ground_state(&self) -> [f64; 2] {
        [self.theta.cos(), self.theta.sin()]
    }
}

pub fn eigensystem(f: &TwoLevelFields) -> Result<TwoLevelEigen> {
    let e = f.h.hypot(f.gamma);
    if e == 0.0 {
        return Err(Error::DegenerateFields);
    }
    Ok(TwoLevelEigen {
        e_minus: -e,
        e_plus: e,
        theta: 0.5 * f.gamma.atan2(f.h),
    })
}

/// `θ̇ = ½ (hΓ̇ - ḣΓ) / (h² + Γ²)`.
pub fn theta_dot(f: &TwoLevelFields) -> Result<f64> {
    let d = f.h * f.h + f.gamma * f.gamma;
    if d == 0.0 {
        return Err(Error::DegenerateFields);
    }
    Ok(0.5 * (f.h * f.gamma_dot - f.h_dot * f.gamma) / d)
}

/// Dense `-Γσˣ - hσᶻ + θ̇σʸ`.
pub fn hamiltonian(gamma: f64, h: f64, theta_dot: f64) -> CMatrix {
    DMatrix::from_row_slice(
        2,
        2,
        &[
            Complex64::from(-h),
            Complex64::new(-gamma, -theta_dot),
            Complex64::new(-gamma, theta_dot),
            Complex64::from(h),
        ],
    )
}

/// Time-dependent fields `(Γ, h)` with their derivatives.
pub trait FieldProtocol {
    fn fields(&self, t: f64) -> Result<TwoLevelFields>;
}

/// A transverse-field schedule (`J = 1`) with a fixed longitudinal field.
#[derive(Debug, Clone)]
pub struct ScheduledFields {
    pub schedule: Schedule,
    pub h: f64,
}

impl FieldProtocol for ScheduledFields {
    fn fields(&self, t: f64) -> Result<TwoLevelFields> {
        let (gamma, gamma_dot) = self.schedule.gamma_at(t, 1.0)?;
        Ok(TwoLevelFields { gamma, h: self.h, gamma_dot, h_dot: 0.0 })
    }
}

/// Runs a protocol backwards: `f(t_f - t)` with negated derivatives.
#[derive(Debug, Clone)]
pub struct Reversed<P> {
    pub inner: P,
    pub t_f: f64,
}

impl<P: FieldProtocol> FieldProtocol for Reversed<P> {
    fn fields(&self, t: f64) -> Result<TwoLevelFields> {
        let f = self.inner.fields((self.t_f - t).max(0.0))?;
        Ok(TwoLevelFields { gamma_dot: -f.gamma_dot, h_dot: -f.h_dot, ..f })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TwoLevelSample {
    pub s: f64,
    pub gamma: f64,
    pub h: f64,
    pub theta_dot: f64,
    pub fidelity: f64,
    pub norm_defect: f64,
}

#[derive(Debug, Clone)]
pub struct TwoLevelTrace {
    pub samples: Vec<TwoLevelSample>,
    pub final_state: [Complex64; 2],
}

impl TwoLevelTrace {
    pub fn min_fidelity(&self) -> f64 {
        self.samples.iter().map(|p| p.fidelity).fold(f64::INFINITY, f64::min)
    }

    pub fn max_norm_defect(&self) -> f64 {
        self.samples.iter().map(|p| p.norm_defect).fold(0.0, f64::max)
    }

    pub fn final_fidelity(&self) -> f64 {
        self.samples.last().map_or(f64::NAN, |p| p.fidelity)
    }
}

/// Propagates from the instantaneous ground state at `t = 0` and records
/// the ground-state fidelity on `n_outputs` evenly spaced times.
pub fn evolve_two_level<P: FieldProtocol>(
    protocol: &P,
    t_f: f64,
    steps: usize,
    n_outputs: usize,
    assisted: bool,
) -> Result<TwoLevelTrace> {
    if n_outputs < 2 || steps == 0 || !(t_f > 0.0) {
        return Err(Error::InvalidParameter("need t_f > 0, steps > 0 and two outputs".into()));
    }
    let intervals = n_outputs - 1;
    let per_output = steps.div_ceil(intervals);
    let dt = t_f / (per_output * intervals) as f64;

    let ham = |t: f64| -> Result<CMatrix> {
        let f = protocol.fields(t)?;
        let td = if assisted { theta_dot(&f)? } else { 0.0 };
        Ok(hamiltonian(f.gamma, f.h, td))
    };
    let sample = |t: f64, psi: &[Complex64]| -> Result<TwoLevelSample> {
        let f = protocol.fields(t)?;
        let g = eigensystem(&f)?.ground_state();
        let overlap = psi[0] * g[0] + psi[1] * g[1];
        Ok(TwoLevelSample {
            s: t / t_f,
            gamma: f.gamma,
            h: f.h,
            theta_dot: if assisted { theta_dot(&f)? } else { 0.0 },
            fidelity: overlap.norm_sqr(),
            norm_defect: (psi[0].norm_sqr() + psi[1].norm_sqr() - 1.0).abs(),
        })
    };

    let g0 = eigensystem(&protocol.fields(0.0)?)?.ground_state();
    let mut psi = vec![Complex64::from(g0[0]), Complex64::from(g0[1])];
    let mut ws = Workspace::new(2);
    let mut samples = vec![sample(0.0, &psi)?];
    for out in 0..intervals {
        for k in 0..per_output {
            let t = (out * per_output + k) as f64 * dt;
            Integrator::CommutatorFree4.step(&ham, t, dt, &mut psi, &mut ws)?;
        }
        let t = if out + 1 == intervals { t_f } else { (out + 1) as f64 * per_output as f64 * dt };
        samples.push(sample(t, &psi)?);
    }
    Ok(TwoLevelTrace { samples, final_state: [psi[0], psi[1]] })
}
