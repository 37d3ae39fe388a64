//! Transverse-field protocols `Γ(t)` with analytic time derivatives.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Coefficients of `48s⁵ - 120s⁴ + 100s³ - 30s² + 2`, lowest power first.
pub const QUINTIC_COEFFS: [f64; 6] = [2.0, 0.0, -30.0, 100.0, -120.0, 48.0];

/// Shape of `Γ(s)/J` on the normalized time `s = t/t_f`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind", content = "coefficients")]
pub enum ScheduleKind {
    /// Smooth sweep `2J → 0` that touches `Γ = J` at `s = 1/2` with zero slope.
    PolynomialQuintic,
    /// `Γ = 2J(1 - s)`.
    Linear,
    /// `Γ = J Σ c_k s^k`.
    CustomCoefficients(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub t_f: f64,
    pub kind: ScheduleKind,
}

impl Schedule {
    pub fn new(t_f: f64, kind: ScheduleKind) -> Result<Self> {
        if !(t_f > 0.0 && t_f.is_finite()) {
            return Err(Error::InvalidParameter(format!("operation time {t_f} must be positive")));
        }
        if let ScheduleKind::CustomCoefficients(c) = &kind {
            if c.is_empty() || c.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidParameter("custom schedule needs finite coefficients".into()));
            }
        }
        Ok(Self { t_f, kind })
    }

    pub fn quintic(t_f: f64) -> Result<Self> {
        Self::new(t_f, ScheduleKind::PolynomialQuintic)
    }

    /// Polynomial coefficients of `Γ(s)/J`, lowest power first.
    pub fn coefficients(&self) -> Vec<f64> {
        match &self.kind {
            ScheduleKind::PolynomialQuintic => QUINTIC_COEFFS.to_vec(),
            ScheduleKind::Linear => vec![2.0, -2.0],
            ScheduleKind::CustomCoefficients(c) => c.clone(),
        }
    }

    pub fn gamma(&self, s: f64, coupling: f64) -> Result<f64> {
        check_s(s)?;
        Ok(coupling * poly_eval(&self.coefficients(), s))
    }

    /// `dΓ/dt = (1/t_f) dΓ/ds`.
    pub fn gamma_dot(&self, s: f64, coupling: f64) -> Result<f64> {
        check_s(s)?;
        Ok(coupling * poly_eval(&derivative(&self.coefficients()), s) / self.t_f)
    }

    /// `Γ` at physical time `t`; round-off just outside `[0, t_f]` is clamped.
    pub fn gamma_at(&self, t: f64, coupling: f64) -> Result<(f64, f64)> {
        let s = self.normalized(t)?;
        Ok((self.gamma(s, coupling)?, self.gamma_dot(s, coupling)?))
    }

    pub fn normalized(&self, t: f64) -> Result<f64> {
        let s = t / self.t_f;
        if (-1e-12..0.0).contains(&s) {
            Ok(0.0)
        } else if s > 1.0 && s <= 1.0 + 1e-12 {
            Ok(1.0)
        } else {
            check_s(s)?;
            Ok(s)
        }
    }

    /// First `s ∈ [0, 1]` where `Γ(s) = J`, if the protocol reaches it.
    pub fn critical_time(&self) -> Option<f64> {
        let mut c = self.coefficients();
        c[0] -= 1.0;
        let n = 4096;
        let f = |s: f64| poly_eval(&c, s);
        let mut prev = f(0.0);
        if prev == 0.0 {
            return Some(0.0);
        }
        for i in 1..=n {
            let s = i as f64 / n as f64;
            let cur = f(s);
            if cur == 0.0 {
                return Some(s);
            }
            if prev.signum() != cur.signum() {
                return Some(bisect(&f, (i - 1) as f64 / n as f64, s));
            }
            prev = cur;
        }
        None
    }

    /// Order `k` of the leading term in `Γ(s) - J ∝ (s - s_c)^k` at the critical time.
    pub fn critical_expansion_order(&self) -> Option<u32> {
        let sc = self.critical_time()?;
        let mut c = self.coefficients();
        let scale = c.iter().fold(1.0f64, |m, x| m.max(x.abs()));
        let mut k = 0;
        loop {
            c = derivative(&c);
            k += 1;
            if c.is_empty() {
                return None;
            }
            let factorial: f64 = (1..=k).map(f64::from).product();
            if (poly_eval(&c, sc) / factorial).abs() > 1e-6 * scale {
                return Some(k);
            }
        }
    }
}

fn check_s(s: f64) -> Result<()> {
    if (0.0..=1.0).contains(&s) {
        Ok(())
    } else {
        Err(Error::TimeOutOfRange(s))
    }
}

pub(crate) fn poly_eval(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}

pub(crate) fn derivative(coeffs: &[f64]) -> Vec<f64> {
    coeffs
        .iter()
        .enumerate()
        .skip(1)
        .map(|(k, &c)| k as f64 * c)
        .collect()
}

fn bisect(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let fa = f(a);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        if f(m).signum() == fa.signum() {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}
