//! Real roots of low-degree polynomials via companion-matrix eigenvalues.

use nalgebra::DMatrix;

/// Largest imaginary part (relative to `max(1, |z|)`) still treated as real.
pub const IMAG_TOLERANCE: f64 = 1e-8;

/// Real roots of `Σ coeffs[k] x^k`, unsorted, with multiplicity.
///
/// Exact trailing zeros are split off as exact roots at the origin, and
/// exact leading zeros reduce the degree before the companion matrix is
/// built.
pub fn real_roots(coeffs: &[f64]) -> Vec<f64> {
    let mut hi = coeffs.len();
    while hi > 0 && coeffs[hi - 1] == 0.0 {
        hi -= 1;
    }
    let mut lo = 0;
    while lo < hi && coeffs[lo] == 0.0 {
        lo += 1;
    }
    let mut roots = vec![0.0; lo];
    if hi == 0 {
        return roots;
    }
    let trimmed = &coeffs[lo..hi];
    let degree = trimmed.len() - 1;
    if degree == 0 {
        return roots;
    }
    let lead = trimmed[degree];
    if degree == 1 {
        roots.push(-trimmed[0] / lead);
        return roots;
    }

    // Frobenius companion matrix: ones on the subdiagonal, -c_k/c_n in the last column.
    let mut companion = DMatrix::<f64>::zeros(degree, degree);
    for k in 1..degree {
        companion[(k, k - 1)] = 1.0;
    }
    for k in 0..degree {
        companion[(k, degree - 1)] = -trimmed[k] / lead;
    }
    for z in companion.complex_eigenvalues().iter() {
        if z.im.abs() <= IMAG_TOLERANCE * z.norm().max(1.0) {
            roots.push(polish(trimmed, z.re));
        }
    }
    roots
}

/// Horner evaluation returning `(p(x), p'(x))`.
pub fn eval_with_derivative(coeffs: &[f64], x: f64) -> (f64, f64) {
    let mut p = 0.0;
    let mut dp = 0.0;
    for &c in coeffs.iter().rev() {
        dp = dp * x + p;
        p = p * x + c;
    }
    (p, dp)
}

// A couple of Newton steps on the polynomial, kept only if they reduce |p|.
fn polish(coeffs: &[f64], mut x: f64) -> f64 {
    let (mut p, _) = eval_with_derivative(coeffs, x);
    for _ in 0..3 {
        let (_, dp) = eval_with_derivative(coeffs, x);
        if dp == 0.0 || !dp.is_finite() {
            break;
        }
        let next = x - p / dp;
        let (pn, _) = eval_with_derivative(coeffs, next);
        if pn.abs() >= p.abs() {
            break;
        }
        x = next;
        p = pn;
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sorted(mut v: Vec<f64>) -> Vec<f64> {
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        v
    }

    #[test]
    fn factored_quartic() {
        // (x-1)(x+2)(x-0.5)(x+3)
        let c = [3.0, -6.5, -1.0, 3.5, 1.0];
        let r = sorted(real_roots(&c));
        let expect = [-3.0, -2.0, 0.5, 1.0];
        assert_eq!(r.len(), 4);
        for (a, b) in r.iter().zip(expect) {
            assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        }
    }

    #[test]
    fn complex_pair_filtered() {
        // (x^2 + 1)(x - 2)(x + 1)
        let c = [-2.0, -1.0, -1.0, -1.0, 1.0];
        let r = sorted(real_roots(&c));
        assert_eq!(r.len(), 2);
        assert!((r[0] + 1.0).abs() < 1e-12 && (r[1] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn zero_roots_and_degree_reduction() {
        // x^2 (x^2 - 4), no companion noise on the double zero
        let r = sorted(real_roots(&[0.0, 0.0, -4.0, 0.0, 1.0]));
        assert_eq!(r, vec![-2.0, 0.0, 0.0, 2.0]);
        // leading zeros: 2x - 1
        assert_eq!(real_roots(&[-1.0, 2.0, 0.0, 0.0]), vec![0.5]);
        assert!(real_roots(&[3.0]).is_empty());
    }
}
