//! Collective spin operators in the maximal-spin (Dicke) sector.
//!
//! Basis index `k = 0..=2S` labels `|S, m⟩` with `m = S - k`, so the
//! fully polarized `m = +S` state is the first basis vector.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::meanfield::ModelParams;

pub type CMatrix = DMatrix<Complex64>;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Size of the collective spin for `n_spins` spin-1/2 particles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SpinSize {
    n_spins: usize,
}

impl SpinSize {
    pub fn new(n_spins: usize) -> Result<Self> {
        if n_spins == 0 {
            return Err(Error::ZeroSpins);
        }
        Ok(Self { n_spins })
    }

    /// Builds the size from a (half-)integer spin `S`; `2S` must be a positive integer.
    pub fn from_spin(s: f64) -> Result<Self> {
        let twice = 2.0 * s;
        if !(twice >= 1.0) || (twice - twice.round()).abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!("spin {s} is not a positive half-integer")));
        }
        Self::new(twice.round() as usize)
    }

    pub fn n_spins(&self) -> usize {
        self.n_spins
    }

    pub fn s(&self) -> f64 {
        self.n_spins as f64 / 2.0
    }

    pub fn dim(&self) -> usize {
        self.n_spins + 1
    }

    /// Magnetic quantum number of basis vector `k`.
    pub fn m(&self, k: usize) -> f64 {
        self.s() - k as f64
    }

    /// `⟨m+1|S₊|m⟩` for the pair `(k-1, k)`, i.e. the raising element into index `k-1`.
    pub fn ladder(&self, k: usize) -> f64 {
        debug_assert!(k >= 1 && k < self.dim());
        let s = self.s();
        let m = self.m(k);
        (s * (s + 1.0) - m * (m + 1.0)).max(0.0).sqrt()
    }

    /// `S(S+1)(2S+1)`, the common factor of the Hilbert-Schmidt norms.
    pub fn trace_factor(&self) -> f64 {
        let s = self.s();
        s * (s + 1.0) * (2.0 * s + 1.0)
    }
}

/// Dense spin matrices `Sˣ, Sʸ, Sᶻ, (Sᶻ)²` and `SᶻSˣ + SˣSᶻ`.
#[derive(Debug, Clone)]
pub struct SpinOperatorSet {
    pub size: SpinSize,
    pub sx: CMatrix,
    pub sy: CMatrix,
    pub sz: CMatrix,
    pub sz2: CMatrix,
    pub anticomm_zx: CMatrix,
}

pub fn build_operators(size: SpinSize) -> SpinOperatorSet {
    let dim = size.dim();
    let mut sx = CMatrix::zeros(dim, dim);
    let mut sy = CMatrix::zeros(dim, dim);
    let mut sz = CMatrix::zeros(dim, dim);
    let mut sz2 = CMatrix::zeros(dim, dim);
    let mut anticomm_zx = CMatrix::zeros(dim, dim);

    for k in 0..dim {
        let m = size.m(k);
        sz[(k, k)] = m.into();
        sz2[(k, k)] = (m * m).into();
    }
    for k in 1..dim {
        let c = size.ladder(k);
        sx[(k - 1, k)] = (0.5 * c).into();
        sx[(k, k - 1)] = (0.5 * c).into();
        // Sʸ = (S₊ - S₋) / 2i
        sy[(k - 1, k)] = -I * (0.5 * c);
        sy[(k, k - 1)] = I * (0.5 * c);
        // (m_{k-1} + m_k) ⟨k-1|Sˣ|k⟩
        let a = (size.m(k - 1) + size.m(k)) * 0.5 * c;
        anticomm_zx[(k - 1, k)] = a.into();
        anticomm_zx[(k, k - 1)] = a.into();
    }

    SpinOperatorSet {
        size,
        sx,
        sy,
        sz,
        sz2,
        anticomm_zx,
    }
}

/// Dense mapped Hamiltonian `-(J/S)(Sᶻ)² - 2Γ Sˣ - 2h Sᶻ + 2θ̇ Sʸ`.
pub fn assemble_hamiltonian(
    ops: &SpinOperatorSet,
    params: &ModelParams,
    gamma: f64,
    theta_dot: f64,
) -> Result<CMatrix> {
    check_dim(ops.size, params)?;
    let s = ops.size.s();
    let h = &ops.sz2 * Complex64::from(-params.coupling / s)
        + &ops.sx * Complex64::from(-2.0 * gamma)
        + &ops.sz * Complex64::from(-2.0 * params.field_h)
        + &ops.sy * Complex64::from(2.0 * theta_dot);
    Ok(h)
}

fn check_dim(size: SpinSize, params: &ModelParams) -> Result<()> {
    if size.n_spins() != params.n_spins {
        return Err(Error::DimensionMismatch {
            expected: params.n_spins + 1,
            found: size.dim(),
        });
    }
    Ok(())
}

/// Hermitian tridiagonal matrix: real diagonal plus the upper off-diagonal.
/// The lower off-diagonal is the complex conjugate of `upper`.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianTridiagonal {
    pub diag: Vec<f64>,
    pub upper: Vec<Complex64>,
}

impl HermitianTridiagonal {
    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn to_dense(&self) -> CMatrix {
        let n = self.dim();
        let mut m = CMatrix::zeros(n, n);
        for (k, &d) in self.diag.iter().enumerate() {
            m[(k, k)] = d.into();
        }
        for (k, &u) in self.upper.iter().enumerate() {
            m[(k, k + 1)] = u;
            m[(k + 1, k)] = u.conj();
        }
        m
    }

    /// Returns `a * self + b * other`.
    pub fn lin_comb(&self, a: f64, other: &Self, b: f64) -> Self {
        Self {
            diag: self
                .diag
                .iter()
                .zip(&other.diag)
                .map(|(x, y)| a * x + b * y)
                .collect(),
            upper: self
                .upper
                .iter()
                .zip(&other.upper)
                .map(|(x, y)| x * a + y * b)
                .collect(),
        }
    }
}

/// Same Hamiltonian as [`assemble_hamiltonian`], stored in tridiagonal form.
///
/// `(Sᶻ)²` and `Sᶻ` are diagonal and `Sˣ`, `Sʸ` only connect neighbouring
/// `m`, so propagation at `dim ~ 10³` never needs dense storage.
pub fn assemble_tridiagonal(
    size: SpinSize,
    params: &ModelParams,
    gamma: f64,
    theta_dot: f64,
) -> Result<HermitianTridiagonal> {
    check_dim(size, params)?;
    let s = size.s();
    let diag = (0..size.dim())
        .map(|k| {
            let m = size.m(k);
            -params.coupling / s * m * m - 2.0 * params.field_h * m
        })
        .collect();
    // -2Γ·(c/2) + 2θ̇·(-i c/2)
    let coeff = Complex64::new(-gamma, -theta_dot);
    let upper = (1..size.dim()).map(|k| coeff * size.ladder(k)).collect();
    Ok(HermitianTridiagonal { diag, upper })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn max_abs(m: &CMatrix) -> f64 {
        m.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    fn params(n: usize, j: f64, h: f64) -> ModelParams {
        ModelParams::new(j, h, n).unwrap()
    }

    #[test]
    fn rejects_zero_spins() {
        assert_eq!(SpinSize::new(0), Err(Error::ZeroSpins));
        assert!(SpinSize::from_spin(0.25).is_err());
        assert_eq!(SpinSize::from_spin(1.5).unwrap().n_spins(), 3);
    }

    #[test]
    fn spin_half_is_pauli_over_two() {
        let ops = build_operators(SpinSize::new(1).unwrap());
        assert_eq!(ops.sx[(0, 1)], Complex64::new(0.5, 0.0));
        assert_eq!(ops.sx[(1, 0)], Complex64::new(0.5, 0.0));
        assert_eq!(ops.sx[(0, 0)], Complex64::new(0.0, 0.0));
        assert_eq!(ops.sy[(0, 1)], Complex64::new(0.0, -0.5));
        assert_eq!(ops.sz[(0, 0)], Complex64::new(0.5, 0.0));
        assert_eq!(ops.sz[(1, 1)], Complex64::new(-0.5, 0.0));
        assert!(max_abs(&ops.anticomm_zx) == 0.0);
    }

    #[test]
    fn spin_one_trace_of_sx_squared() {
        let ops = build_operators(SpinSize::new(2).unwrap());
        let tr = (&ops.sx * &ops.sx).trace();
        assert!((tr.re - 2.0).abs() < 1e-14 && tr.im.abs() < 1e-14);
    }

    #[test]
    fn sz_traceless_and_descending() {
        for n in 1..12 {
            let size = SpinSize::new(n).unwrap();
            let ops = build_operators(size);
            assert!(ops.sz.trace().norm() < 1e-12);
            for k in 1..size.dim() {
                assert!(ops.sz[(k, k)].re < ops.sz[(k - 1, k - 1)].re);
            }
        }
    }

    #[test]
    fn dense_algebra_small_spins() {
        for n in 1..=20 {
            let size = SpinSize::new(n).unwrap();
            let ops = build_operators(size);
            let s = size.s();
            let comm = &ops.sx * &ops.sy - &ops.sy * &ops.sx - &ops.sz * I;
            assert!(max_abs(&comm) < 1e-12);
            let comm = &ops.sy * &ops.sz - &ops.sz * &ops.sy - &ops.sx * I;
            assert!(max_abs(&comm) < 1e-12);
            let comm = &ops.sz * &ops.sx - &ops.sx * &ops.sz - &ops.sy * I;
            assert!(max_abs(&comm) < 1e-12);
            let casimir = &ops.sx * &ops.sx + &ops.sy * &ops.sy + &ops.sz * &ops.sz
                - CMatrix::identity(size.dim(), size.dim()) * Complex64::from(s * (s + 1.0));
            assert!(max_abs(&casimir) < 1e-9);
            let anti = &ops.sz * &ops.sx + &ops.sx * &ops.sz;
            assert!(max_abs(&(anti - &ops.anticomm_zx)) < 1e-12);
            for m in [&ops.sx, &ops.sy, &ops.sz] {
                assert!(max_abs(&(m - m.adjoint())) == 0.0);
            }
        }
    }

    #[test]
    fn diagonal_hamiltonian_ground_energy() {
        let size = SpinSize::new(10).unwrap();
        let ops = build_operators(size);
        let h = assemble_hamiltonian(&ops, &params(10, 1.0, 0.0), 0.0, 0.0).unwrap();
        let min = (0..size.dim()).map(|k| h[(k, k)].re).fold(f64::INFINITY, f64::min);
        assert!((min + 5.0).abs() < 1e-12);
        for i in 0..size.dim() {
            for j in 0..size.dim() {
                if i != j {
                    assert_eq!(h[(i, j)], Complex64::new(0.0, 0.0));
                }
            }
        }
    }

    #[test]
    fn spin_half_reduces_to_two_level() {
        let ops = build_operators(SpinSize::new(1).unwrap());
        let (gamma, h, td) = (0.7, 0.3, -0.2);
        let m = assemble_hamiltonian(&ops, &params(1, 0.0, h), gamma, td).unwrap();
        // -Γσˣ - hσᶻ + θ̇σʸ
        assert!((m[(0, 0)].re + h).abs() < 1e-15);
        assert!((m[(1, 1)].re - h).abs() < 1e-15);
        assert!((m[(0, 1)] - Complex64::new(-gamma, -td)).norm() < 1e-15);
        assert!((m[(1, 0)] - Complex64::new(-gamma, td)).norm() < 1e-15);
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let ops = build_operators(SpinSize::new(4).unwrap());
        assert!(matches!(
            assemble_hamiltonian(&ops, &params(5, 1.0, 0.0), 1.0, 0.0),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn tridiagonal_matches_dense() {
        for n in [1, 2, 7, 16] {
            let size = SpinSize::new(n).unwrap();
            let ops = build_operators(size);
            let p = params(n, 1.3, 0.01);
            let dense = assemble_hamiltonian(&ops, &p, 0.8, 0.37).unwrap();
            let tri = assemble_tridiagonal(size, &p, 0.8, 0.37).unwrap().to_dense();
            assert!(max_abs(&(dense - tri)) < 1e-13);
        }
    }

    // Products of tridiagonal matrices are pentadiagonal, so the large-S
    // algebra is checked on the band only.
    fn band_product(a: &CMatrix, b: &CMatrix, i: usize, j: usize) -> Complex64 {
        let n = a.nrows();
        let lo = i.saturating_sub(1).max(j.saturating_sub(1));
        let hi = (i + 1).min(j + 1).min(n - 1);
        (lo..=hi).map(|k| a[(i, k)] * b[(k, j)]).sum()
    }

    #[test]
    fn large_spin_algebra_on_band() {
        for n in [200, 1000] {
            let size = SpinSize::new(n).unwrap();
            let ops = build_operators(size);
            let s = size.s();
            let dim = size.dim();
            let (mut comm, mut cas) = (0.0f64, 0.0f64);
            for i in 0..dim {
                for j in i.saturating_sub(2)..(i + 3).min(dim) {
                    let c = band_product(&ops.sx, &ops.sy, i, j)
                        - band_product(&ops.sy, &ops.sx, i, j)
                        - I * ops.sz[(i, j)];
                    comm = comm.max(c.norm());
                    let mut k = band_product(&ops.sx, &ops.sx, i, j)
                        + band_product(&ops.sy, &ops.sy, i, j)
                        + band_product(&ops.sz, &ops.sz, i, j);
                    if i == j {
                        k -= s * (s + 1.0);
                    }
                    cas = cas.max(k.norm());
                }
            }
            // entries of SˣSʸ reach S(S+1)/2, so the absolute floor is one ulp of that
            assert!(comm < 1e-12 * (s * (s + 1.0)).max(1.0), "commutator defect {comm}");
            assert!(cas < 1e-9, "casimir defect {cas}");
        }
    }
}
