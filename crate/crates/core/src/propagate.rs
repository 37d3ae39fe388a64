//! Unitary time stepping for `i ∂ψ/∂t = H(t) ψ`.
//!
//! Each step applies one or two exponentials of Hermitian combinations of
//! `H` sampled inside the step. The exponential acting on a vector is a
//! truncated Taylor series on the spectrally centred operator, with the
//! step split until the scaled norm is below one.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::spin::{CMatrix, HermitianTridiagonal};

/// Hermitian operator that can be applied to a vector.
pub trait HermitianOperator: Sized {
    fn dim(&self) -> usize;
    /// `y = H x`
    fn apply(&self, x: &[Complex64], y: &mut [Complex64]);
    /// Gershgorin enclosure of the spectrum.
    fn spectral_bounds(&self) -> (f64, f64);
    /// `a·self + b·other`
    fn lin_comb(&self, a: f64, other: &Self, b: f64) -> Self;
}

impl HermitianOperator for HermitianTridiagonal {
    fn dim(&self) -> usize {
        self.diag.len()
    }

    fn apply(&self, x: &[Complex64], y: &mut [Complex64]) {
        let n = self.diag.len();
        for k in 0..n {
            y[k] = x[k] * self.diag[k];
        }
        for (k, &u) in self.upper.iter().enumerate() {
            y[k] += u * x[k + 1];
            y[k + 1] += u.conj() * x[k];
        }
    }

    fn spectral_bounds(&self) -> (f64, f64) {
        let n = self.diag.len();
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for k in 0..n {
            let mut r = 0.0;
            if k > 0 {
                r += self.upper[k - 1].norm();
            }
            if k + 1 < n {
                r += self.upper[k].norm();
            }
            lo = lo.min(self.diag[k] - r);
            hi = hi.max(self.diag[k] + r);
        }
        (lo, hi)
    }

    fn lin_comb(&self, a: f64, other: &Self, b: f64) -> Self {
        HermitianTridiagonal::lin_comb(self, a, other, b)
    }
}

impl HermitianOperator for CMatrix {
    fn dim(&self) -> usize {
        self.nrows()
    }

    fn apply(&self, x: &[Complex64], y: &mut [Complex64]) {
        let n = self.nrows();
        for (i, yi) in y.iter_mut().enumerate().take(n) {
            *yi = (0..n).map(|j| self[(i, j)] * x[j]).sum();
        }
    }

    fn spectral_bounds(&self) -> (f64, f64) {
        let n = self.nrows();
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for i in 0..n {
            let d = self[(i, i)].re;
            let r: f64 = (0..n).filter(|&j| j != i).map(|j| self[(i, j)].norm()).sum();
            lo = lo.min(d - r);
            hi = hi.max(d + r);
        }
        (lo, hi)
    }

    fn lin_comb(&self, a: f64, other: &Self, b: f64) -> Self {
        self * Complex64::from(a) + other * Complex64::from(b)
    }
}

/// Scaled norm `‖(H - c)τ‖` handled by a single Taylor series.
const MAX_SCALED_NORM: f64 = 0.5;
const MAX_TAYLOR_TERMS: usize = 60;

/// Scratch buffers reused across steps.
#[derive(Debug, Default)]
pub struct Workspace {
    term: Vec<Complex64>,
    next: Vec<Complex64>,
    acc: Vec<Complex64>,
}

impl Workspace {
    pub fn new(dim: usize) -> Self {
        Self {
            term: vec![Complex64::default(); dim],
            next: vec![Complex64::default(); dim],
            acc: vec![Complex64::default(); dim],
        }
    }
}

fn norm2(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Replaces `psi` with `exp(-iτH) psi`.
pub fn expmv<H: HermitianOperator>(h: &H, tau: f64, psi: &mut [Complex64], ws: &mut Workspace) {
    let n = h.dim();
    if ws.term.len() != n {
        *ws = Workspace::new(n);
    }
    let (lo, hi) = h.spectral_bounds();
    let centre = 0.5 * (lo + hi);
    let radius = 0.5 * (hi - lo);
    let substeps = ((radius * tau.abs()) / MAX_SCALED_NORM).ceil().max(1.0) as usize;
    let dt = tau / substeps as f64;
    let phase = Complex64::from_polar(1.0, -centre * dt);

    for _ in 0..substeps {
        ws.term.copy_from_slice(psi);
        ws.acc.copy_from_slice(psi);
        let scale = norm2(psi);
        for k in 1..=MAX_TAYLOR_TERMS {
            h.apply(&ws.term, &mut ws.next);
            let factor = Complex64::new(0.0, -dt / k as f64);
            for (t, (nx, x)) in ws.term.iter_mut().zip(ws.next.iter().zip(ws.acc.iter_mut())) {
                // (H - c) applied to the previous term
                *t = (*nx - *t * centre) * factor;
                *x += *t;
            }
            if norm2(&ws.term) <= 1e-17 * scale {
                break;
            }
        }
        for (p, a) in psi.iter_mut().zip(&ws.acc) {
            *p = a * phase;
        }
    }
}

/// Time-stepping scheme built from exponentials of sampled Hamiltonians.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Integrator {
    /// `exp(-iΔt H(t + Δt/2))`, second order.
    #[default]
    ExponentialMidpoint,
    /// Fourth-order commutator-free Magnus scheme with two Gauss-point samples.
    CommutatorFree4,
}

impl Integrator {
    /// Advances `psi` from `t` to `t + dt`.
    pub fn step<H, F, E>(&self, hamiltonian: &F, t: f64, dt: f64, psi: &mut [Complex64], ws: &mut Workspace) -> Result<(), E>
    where
        H: HermitianOperator,
        F: Fn(f64) -> Result<H, E>,
    {
        match self {
            Integrator::ExponentialMidpoint => {
                let h = hamiltonian(t + 0.5 * dt)?;
                expmv(&h, dt, psi, ws);
            }
            Integrator::CommutatorFree4 => {
                let r = 3f64.sqrt();
                let (c1, c2) = (0.5 - r / 6.0, 0.5 + r / 6.0);
                let (a1, a2) = ((3.0 - 2.0 * r) / 12.0, (3.0 + 2.0 * r) / 12.0);
                let h1 = hamiltonian(t + c1 * dt)?;
                let h2 = hamiltonian(t + c2 * dt)?;
                expmv(&h1.lin_comb(a2, &h2, a1), dt, psi, ws);
                expmv(&h1.lin_comb(a1, &h2, a2), dt, psi, ws);
            }
        }
        Ok(())
    }
}
