//! Schrödinger propagation of the collective spin, instantaneous ground
//! states, fidelities, and the exact counter-diabatic oracle.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::meanfield::{self, ModelParams};
use crate::propagate::{Integrator, Workspace};
use crate::schedule::Schedule;
use crate::spin::{self, CMatrix, HermitianTridiagonal, SpinSize};
use crate::variational;

/// Largest `N` accepted by the exact oracle unless overridden.
pub const DEFAULT_ORACLE_CAP: usize = 64;

/// Integrator substeps per unit of operation time.
pub const STEPS_PER_UNIT_TIME: f64 = 1e4;

/// Largest change of the final fidelity tolerated when the step is halved.
pub const STEP_HALVING_TOLERANCE: f64 = 1e-8;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Normalized amplitudes in the Dicke basis (index `k` ↔ `m = S - k`).
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector(Vec<Complex64>);

impl StateVector {
    pub fn new(amplitudes: Vec<Complex64>) -> Self {
        Self(amplitudes)
    }

    /// Basis vector `k`.
    pub fn basis(dim: usize, k: usize) -> Self {
        let mut v = vec![Complex64::default(); dim];
        v[k] = Complex64::from(1.0);
        Self(v)
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.0
    }

    pub fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn normalize(&mut self) {
        let n = self.norm();
        self.0.iter_mut().for_each(|z| *z /= n);
    }

    /// `(⟨Sˣ⟩, ⟨Sʸ⟩, ⟨Sᶻ⟩)`.
    pub fn magnetization(&self, size: SpinSize) -> [f64; 3] {
        let psi = &self.0;
        let sz: f64 = psi.iter().enumerate().map(|(k, z)| size.m(k) * z.norm_sqr()).sum();
        // ⟨S₊⟩ = ⟨Sˣ⟩ + i⟨Sʸ⟩
        let raise: Complex64 = (1..psi.len()).map(|k| psi[k - 1].conj() * psi[k] * size.ladder(k)).sum();
        [raise.re, raise.im, sz]
    }

    /// `⟨Sˣ² + Sʸ² + Sᶻ²⟩` evaluated as `⟨Sᶻ² + Sᶻ⟩ + ‖S₊ψ‖²`.
    pub fn casimir(&self, size: SpinSize) -> f64 {
        self.0
            .iter()
            .enumerate()
            .map(|(k, z)| {
                let m = size.m(k);
                let c = if k > 0 { size.ladder(k) } else { 0.0 };
                (m * m + m + c * c) * z.norm_sqr()
            })
            .sum()
    }
}

/// `|⟨reference|state⟩|²`.
pub fn fidelity(state: &StateVector, reference: &StateVector) -> Result<f64> {
    if state.dim() != reference.dim() {
        return Err(Error::DimensionMismatch { expected: reference.dim(), found: state.dim() });
    }
    let overlap: Complex64 = reference.0.iter().zip(&state.0).map(|(r, s)| r.conj() * s).sum();
    Ok(overlap.norm_sqr())
}

/// Lowest eigenpair of a Hermitian matrix.
///
/// Tridiagonal input (every mapped Hamiltonian) goes through Sturm
/// bisection and inverse iteration; anything else through a dense
/// Hermitian eigensolver.
pub fn ground_state(hamiltonian: &CMatrix) -> Result<(f64, StateVector)> {
    let n = hamiltonian.nrows();
    if hamiltonian.ncols() != n {
        return Err(Error::DimensionMismatch { expected: n, found: hamiltonian.ncols() });
    }
    let banded = (0..n).all(|i| (0..n).all(|j| i.abs_diff(j) <= 1 || hamiltonian[(i, j)] == Complex64::default()));
    if banded {
        let tri = HermitianTridiagonal {
            diag: (0..n).map(|k| hamiltonian[(k, k)].re).collect(),
            upper: (1..n).map(|k| hamiltonian[(k - 1, k)]).collect(),
        };
        return ground_state_tridiagonal(&tri);
    }
    let eig = hamiltonian.clone().symmetric_eigen();
    let (k, &e) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .ok_or(Error::EigensolverFailure)?;
    if !e.is_finite() {
        return Err(Error::EigensolverFailure);
    }
    let v = eig.eigenvectors.column(k).iter().copied().collect();
    Ok((e, StateVector(v)))
}

/// Lowest eigenpair of a Hermitian tridiagonal matrix.
pub fn ground_state_tridiagonal(t: &HermitianTridiagonal) -> Result<(f64, StateVector)> {
    let n = t.dim();
    if n == 0 {
        return Err(Error::EigensolverFailure);
    }
    // Diagonal unitary D with D†TD real symmetric, off-diagonals |t_k|.
    let off: Vec<f64> = t.upper.iter().map(|z| z.norm()).collect();
    let mut gauge = vec![Complex64::from(1.0); n];
    for k in 0..n - 1 {
        gauge[k + 1] = if off[k] > 0.0 { gauge[k] * (off[k] / t.upper[k]) } else { gauge[k] };
    }
    let off2: Vec<f64> = off.iter().map(|b| b * b).collect();
    let (mut lo, mut hi) = crate::propagate::HermitianOperator::spectral_bounds(t);
    let scale = lo.abs().max(hi.abs()).max(f64::MIN_POSITIVE);
    let pivot_floor = f64::EPSILON * scale * 1e-3;

    // LDLᵀ pivots of T - σ; the number of negative pivots counts eigenvalues below σ.
    let pivots = |sigma: f64, out: &mut Vec<f64>| -> usize {
        out.clear();
        let mut negatives = 0;
        let mut q = 0.0;
        for k in 0..n {
            q = t.diag[k] - sigma - if k > 0 { off2[k - 1] / q } else { 0.0 };
            if q == 0.0 {
                q = -pivot_floor;
            }
            if q < 0.0 {
                negatives += 1;
            }
            out.push(q);
        }
        negatives
    };

    let mut work = Vec::with_capacity(n);
    lo -= 1e-12 * scale + f64::MIN_POSITIVE;
    if pivots(lo, &mut work) != 0 {
        return Err(Error::EigensolverFailure);
    }
    for _ in 0..300 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if pivots(mid, &mut work) == 0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }

    // Inverse iteration at the lower bracket, where T - σ is positive definite.
    pivots(lo, &mut work);
    let mut y = vec![1.0; n];
    for _ in 0..3 {
        // forward: L z = y, with L unit lower bidiagonal, l_k = b_k / q_k
        for k in 1..n {
            y[k] -= off[k - 1] / work[k - 1] * y[k - 1];
        }
        for k in 0..n {
            y[k] /= work[k];
        }
        for k in (0..n - 1).rev() {
            y[k] -= off[k] / work[k] * y[k + 1];
        }
        let norm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !norm.is_finite() || norm == 0.0 {
            return Err(Error::EigensolverFailure);
        }
        y.iter_mut().for_each(|v| *v /= norm);
    }
    // Rayleigh quotient of the real symmetric form
    let mut energy: f64 = (0..n).map(|k| t.diag[k] * y[k] * y[k]).sum();
    energy += 2.0 * (0..n - 1).map(|k| off[k] * y[k] * y[k + 1]).sum::<f64>();
    let v = y.iter().zip(&gauge).map(|(&a, g)| g * a).collect();
    Ok((energy, StateVector(v)))
}

/// Exact counter-diabatic Hamiltonian
/// `i Σ_{n≠m} |n⟩⟨n|∂ₜH₀|m⟩⟨m| / (E_m - E_n)` with `∂ₜH₀ = -2Γ̇Sˣ`.
pub fn exact_cd(params: &ModelParams, gamma: f64, gamma_dot: f64) -> Result<CMatrix> {
    exact_cd_capped(params, gamma, gamma_dot, DEFAULT_ORACLE_CAP)
}

pub fn exact_cd_capped(params: &ModelParams, gamma: f64, gamma_dot: f64, cap: usize) -> Result<CMatrix> {
    if params.n_spins > cap {
        return Err(Error::OracleCapExceeded { n_spins: params.n_spins, cap });
    }
    let size = params.spin_size();
    let bare = spin::assemble_tridiagonal(size, params, gamma, 0.0)?;
    let dim = size.dim();
    let real = DMatrix::<f64>::from_fn(dim, dim, |i, j| {
        if i == j {
            bare.diag[i]
        } else if j == i + 1 {
            bare.upper[i].re
        } else if i == j + 1 {
            bare.upper[j].re
        } else {
            0.0
        }
    });
    let eig = real.symmetric_eigen();
    let vectors = eig.eigenvectors.map(Complex64::from);
    let dh = DMatrix::<f64>::from_fn(dim, dim, |i, j| {
        if j == i + 1 {
            -gamma_dot * size.ladder(j)
        } else if i == j + 1 {
            -gamma_dot * size.ladder(i)
        } else {
            0.0
        }
    })
    .map(Complex64::from);
    exact_cd_from_eigen(eig.eigenvalues.as_slice(), &vectors, &dh)
}

/// Counter-diabatic matrix from a given eigenbasis (columns of `vectors`)
/// and `∂ₜH₀`.
pub fn exact_cd_from_eigen(energies: &[f64], vectors: &CMatrix, dh: &CMatrix) -> Result<CMatrix> {
    let dim = energies.len();
    let width = energies.iter().fold(0.0f64, |m, e| m.max(e.abs())).max(f64::MIN_POSITIVE);
    let coupling = vectors.adjoint() * dh * vectors;
    let mut kernel = CMatrix::zeros(dim, dim);
    for n in 0..dim {
        for m in 0..dim {
            if n == m || coupling[(n, m)] == Complex64::default() {
                continue;
            }
            let gap = energies[m] - energies[n];
            if gap.abs() < 1e-10 * width {
                return Err(Error::NearDegenerate(n, m, gap));
            }
            kernel[(n, m)] = I * coupling[(n, m)] / gap;
        }
    }
    Ok(vectors * kernel * vectors.adjoint())
}

/// Projections of the exact counter-diabatic matrix onto the `2θ̇Sʸ` form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OracleProjection {
    /// `Tr(H_cd Sʸ) / (2 Tr(Sʸ Sʸ))`, weighting every level equally.
    pub hilbert_schmidt: f64,
    /// Least-squares fit of `H_cd|ψ₀⟩` by `2θ̇ Sʸ|ψ₀⟩` on the ground state.
    pub ground_state: f64,
}

pub fn project_oracle(params: &ModelParams, gamma: f64, gamma_dot: f64) -> Result<OracleProjection> {
    let cd = exact_cd(params, gamma, gamma_dot)?;
    let size = params.spin_size();
    let sy = spin::build_operators(size).sy;
    let hilbert_schmidt = (&cd * &sy).trace().re / (2.0 * (&sy * &sy).trace().re);
    let (_, psi) = ground_state_tridiagonal(&spin::assemble_tridiagonal(size, params, gamma, 0.0)?)?;
    let v = nalgebra::DVector::from_column_slice(psi.amplitudes());
    let driven = &cd * &v;
    let rotated = &sy * &v;
    let ground_state = rotated.dotc(&driven).re / (2.0 * rotated.norm_squared());
    Ok(OracleProjection { hilbert_schmidt, ground_state })
}

/// Instantaneous ground states of the bare mapped Hamiltonian on a uniform grid.
pub fn reference_adiabat(params: &ModelParams, schedule: &Schedule, n_outputs: usize) -> Result<Vec<(f64, StateVector)>> {
    if n_outputs < 2 {
        return Err(Error::InvalidParameter("need at least two output points".into()));
    }
    let size = params.spin_size();
    (0..n_outputs)
        .map(|i| {
            let s = i as f64 / (n_outputs - 1) as f64;
            let gamma = schedule.gamma(s, params.coupling)?;
            ground_state_tridiagonal(&spin::assemble_tridiagonal(size, params, gamma, 0.0)?)
        })
        .collect()
}

/// Source of the auxiliary `2θ̇Sʸ` (or exact) driving term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Assist {
    None,
    MeanField,
    Variational,
    ExactOracle,
}

/// How `θ̇` is obtained inside the integrator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ThetaSource {
    /// Solve the mean field at every sample time.
    Analytic,
    /// Linear interpolation of a precomputed uniform trace of this many
    /// points. Faster for sweeps; the interpolation error is of order
    /// `(Δs)² θ̈`, largest on the lobes of `θ̇`.
    CachedTrace(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvolveOptions {
    /// Total integrator steps; defaults to `10⁴ t_f`.
    pub steps: Option<usize>,
    pub n_outputs: usize,
    pub integrator: Integrator,
    pub oracle_cap: usize,
    /// Repeat the run at half the step and fail if the final fidelity moves
    /// by more than [`STEP_HALVING_TOLERANCE`].
    pub check_convergence: bool,
    pub theta_source: ThetaSource,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        Self {
            steps: None,
            n_outputs: 201,
            integrator: Integrator::ExponentialMidpoint,
            oracle_cap: DEFAULT_ORACLE_CAP,
            check_convergence: false,
            theta_source: ThetaSource::Analytic,
        }
    }
}

impl EvolveOptions {
    /// Steps actually used: a multiple of the number of output intervals.
    pub fn resolved_steps(&self, t_f: f64) -> usize {
        let intervals = self.n_outputs.max(2) - 1;
        let requested = self.steps.unwrap_or_else(|| (STEPS_PER_UNIT_TIME * t_f).round().max(1.0) as usize);
        requested.div_ceil(intervals).max(1) * intervals
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryPoint {
    pub s: f64,
    pub gamma: f64,
    pub theta_dot: f64,
    pub mx: f64,
    pub my: f64,
    pub mz: f64,
    pub fidelity: f64,
    pub norm_defect: f64,
    /// `|⟨S²⟩/S(S+1) - 1|`
    pub casimir_defect: f64,
}

#[derive(Debug, Clone)]
pub struct TrajectoryRecord {
    pub points: Vec<TrajectoryPoint>,
    pub final_state: StateVector,
    pub steps: usize,
    /// Change of the final fidelity under step halving, when checked.
    pub step_halving_delta: Option<f64>,
}

impl TrajectoryRecord {
    pub fn final_point(&self) -> &TrajectoryPoint {
        self.points.last().expect("trajectory has at least two points")
    }

    pub fn min_fidelity(&self) -> f64 {
        self.points.iter().map(|p| p.fidelity).fold(f64::INFINITY, f64::min)
    }

    pub fn max_norm_defect(&self) -> f64 {
        self.points.iter().map(|p| p.norm_defect).fold(0.0, f64::max)
    }

    pub fn max_casimir_defect(&self) -> f64 {
        self.points.iter().map(|p| p.casimir_defect).fold(0.0, f64::max)
    }
}

/// Evaluates `(Γ, θ̇)` of the requested assist mode at physical time `t`.
struct Driver<'a> {
    params: &'a ModelParams,
    schedule: &'a Schedule,
    assist: Assist,
    cache: Option<Vec<f64>>,
}

impl<'a> Driver<'a> {
    fn new(params: &'a ModelParams, schedule: &'a Schedule, assist: Assist, source: ThetaSource) -> Result<Self> {
        let mut driver = Self { params, schedule, assist, cache: None };
        if let (ThetaSource::CachedTrace(points), Assist::MeanField | Assist::Variational) = (source, assist) {
            let points = points.max(2);
            let table = (0..points)
                .map(|i| {
                    let s = i as f64 / (points - 1) as f64;
                    driver.analytic(s * schedule.t_f).map(|(_, td)| td)
                })
                .collect::<Result<Vec<_>>>()?;
            driver.cache = Some(table);
        }
        Ok(driver)
    }

    fn analytic(&self, t: f64) -> Result<(f64, f64)> {
        let (gamma, gamma_dot) = self.schedule.gamma_at(t, self.params.coupling)?;
        let theta_dot = match self.assist {
            Assist::None | Assist::ExactOracle => 0.0,
            Assist::MeanField => meanfield::mean_field_point(self.params, gamma, gamma_dot)?.theta_dot,
            Assist::Variational => variational::variational_alpha(self.params, gamma, gamma_dot)?,
        };
        Ok((gamma, theta_dot))
    }

    fn fields(&self, t: f64) -> Result<(f64, f64)> {
        let Some(table) = &self.cache else {
            return self.analytic(t);
        };
        let s = self.schedule.normalized(t)?;
        let gamma = self.schedule.gamma(s, self.params.coupling)?;
        let x = s * (table.len() - 1) as f64;
        let i = (x.floor() as usize).min(table.len() - 2);
        let w = x - i as f64;
        Ok((gamma, table[i] * (1.0 - w) + table[i + 1] * w))
    }

    fn tridiagonal(&self, t: f64) -> Result<HermitianTridiagonal> {
        let (gamma, theta_dot) = self.fields(t)?;
        spin::assemble_tridiagonal(self.params.spin_size(), self.params, gamma, theta_dot)
    }

    fn dense_with_oracle(&self, t: f64, cap: usize) -> Result<CMatrix> {
        let (gamma, gamma_dot) = self.schedule.gamma_at(t, self.params.coupling)?;
        let bare = spin::assemble_tridiagonal(self.params.spin_size(), self.params, gamma, 0.0)?;
        Ok(bare.to_dense() + exact_cd_capped(self.params, gamma, gamma_dot, cap)?)
    }
}

/// Propagates the ground state at `s = 0` under the mapped Hamiltonian with
/// the chosen assist term, recording observables on a uniform output grid.
pub fn evolve(params: &ModelParams, schedule: &Schedule, assist: Assist, options: &EvolveOptions) -> Result<TrajectoryRecord> {
    if options.n_outputs < 2 {
        return Err(Error::InvalidParameter("need at least two output points".into()));
    }
    if assist == Assist::ExactOracle && params.n_spins > options.oracle_cap {
        return Err(Error::OracleCapExceeded { n_spins: params.n_spins, cap: options.oracle_cap });
    }
    let steps = options.resolved_steps(schedule.t_f);
    let mut record = run(params, schedule, assist, options, steps)?;
    if options.check_convergence {
        let fine = run(params, schedule, assist, options, 2 * steps)?;
        let delta = (fine.final_point().fidelity - record.final_point().fidelity).abs();
        record.step_halving_delta = Some(delta);
        if !(delta < STEP_HALVING_TOLERANCE) {
            return Err(Error::NotConverged(delta));
        }
    }
    Ok(record)
}

fn run(params: &ModelParams, schedule: &Schedule, assist: Assist, options: &EvolveOptions, steps: usize) -> Result<TrajectoryRecord> {
    let size = params.spin_size();
    let driver = Driver::new(params, schedule, assist, options.theta_source)?;
    let intervals = options.n_outputs - 1;
    let per_output = steps / intervals;
    let t_f = schedule.t_f;
    let dt = t_f / steps as f64;
    let casimir = size.s() * (size.s() + 1.0);

    let gamma0 = schedule.gamma(0.0, params.coupling)?;
    let (_, mut psi) = ground_state_tridiagonal(&spin::assemble_tridiagonal(size, params, gamma0, 0.0)?)?;
    let mut ws = Workspace::new(size.dim());

    let observe = |i: usize, psi: &StateVector| -> Result<TrajectoryPoint> {
        let s = i as f64 / intervals as f64;
        let gamma = schedule.gamma(s, params.coupling)?;
        let theta_dot = driver.fields(s * t_f)?.1;
        let (_, reference) = ground_state_tridiagonal(&spin::assemble_tridiagonal(size, params, gamma, 0.0)?)?;
        let [mx, my, mz] = psi.magnetization(size);
        Ok(TrajectoryPoint {
            s,
            gamma,
            theta_dot,
            mx: mx / size.s(),
            my: my / size.s(),
            mz: mz / size.s(),
            fidelity: fidelity(psi, &reference)?,
            norm_defect: (psi.norm() - 1.0).abs(),
            casimir_defect: (psi.casimir(size) / casimir - 1.0).abs(),
        })
    };

    let mut points = Vec::with_capacity(options.n_outputs);
    points.push(observe(0, &psi)?);
    for out in 0..intervals {
        for k in 0..per_output {
            let t = (out * per_output + k) as f64 * dt;
            match assist {
                Assist::ExactOracle => {
                    let ham = |t: f64| driver.dense_with_oracle(t, options.oracle_cap);
                    options.integrator.step(&ham, t, dt, psi.amplitudes_mut(), &mut ws)?;
                }
                _ => {
                    let ham = |t: f64| driver.tridiagonal(t);
                    options.integrator.step(&ham, t, dt, psi.amplitudes_mut(), &mut ws)?;
                }
            }
        }
        points.push(observe(out + 1, &psi)?);
    }
    Ok(TrajectoryRecord { points, final_state: psi, steps, step_halving_delta: None })
}
