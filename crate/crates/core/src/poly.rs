//! Maximum of `|p(sigma)|` over `sigma in [0, 1]` for a real polynomial.
//!
//! Candidates are the two endpoints and the real roots of `p'` inside the
//! interval. Roots come from the eigenvalues of the companion matrix of `p'`
//! and are polished with Newton steps on `p'`.
//!
//! Before any root finding, the Bernstein coefficients of `p` on `[0, 1]` are
//! formed. Their convex hull contains the graph, so the largest magnitude is
//! an upper bound, and when that bound is attained at an endpoint it is the
//! exact maximum.

use nalgebra::DMatrix;

/// Highest polynomial degree accepted by [`polynomial_abs_max`].
pub const MAX_DEGREE: usize = 15;

/// Imaginary parts up to `IMAG_TOL * (1 + |re|)` count as real.
const IMAG_TOL: f64 = 1e-10;

/// Evaluates `sum_k coeffs[k] * x^k` by Horner's rule.
#[inline]
pub fn horner(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}

/// Returns `(max |p|, argmax)` over `[0, 1]` for `p = sum_k coeffs[k] sigma^k`.
///
/// All-zero (or empty) input gives `(0, 0)`. Ties resolve to the smallest
/// argument.
pub fn polynomial_abs_max(coeffs: &[f64]) -> (f64, f64) {
    assert!(coeffs.len() <= MAX_DEGREE + 1, "degree above {MAX_DEGREE}");
    let Some(deg) = coeffs.iter().rposition(|&c| c != 0.0) else {
        return (0.0, 0.0);
    };
    let p = &coeffs[..=deg];

    let mut best = (p[0].abs(), 0.0);
    let end = horner(p, 1.0).abs();
    if end > best.0 {
        best = (end, 1.0);
    }
    if deg < 2 || bernstein_bound(p) <= best.0 {
        return best;
    }
    let mut consider = |x: f64| {
        let v = horner(p, x).abs();
        if v > best.0 {
            best = (v, x);
        }
    };

    // p' with coefficients k * c_k, trailing negligible terms trimmed.
    let mut dp = [0.0; MAX_DEGREE];
    for k in 1..=deg {
        dp[k - 1] = k as f64 * p[k];
    }
    let scale = dp[..deg].iter().fold(0.0f64, |m, c| m.max(c.abs()));
    let mut m = deg - 1;
    while m > 0 && dp[m].abs() <= 1e-15 * scale {
        m -= 1;
    }
    let dp = &dp[..=m];

    for root in derivative_roots(dp) {
        if root > 0.0 && root < 1.0 {
            consider(polish(dp, root));
        }
    }
    best
}

/// `max_i |b_i|` over the Bernstein coefficients of `p` on `[0, 1]`, an upper
/// bound for `max |p|` there.
pub fn bernstein_bound(coeffs: &[f64]) -> f64 {
    assert!(coeffs.len() <= MAX_DEGREE + 1, "degree above {MAX_DEGREE}");
    let Some(d) = coeffs.len().checked_sub(1) else {
        return 0.0;
    };
    // b_i = sum_{k <= i} C(i, k) / C(d, k) a_k, with the ratio updated per k.
    let mut scaled = [0.0; MAX_DEGREE + 1];
    let mut inv_binom = 1.0;
    for (k, &a) in coeffs.iter().enumerate() {
        scaled[k] = a * inv_binom;
        inv_binom *= (k + 1) as f64 / (d - k).max(1) as f64;
    }
    let mut bound = 0.0f64;
    for i in 0..=d {
        let mut b = 0.0;
        let mut binom = 1.0;
        for (k, sk) in scaled.iter().enumerate().take(i + 1) {
            b += binom * sk;
            binom *= (i - k) as f64 / (k + 1) as f64;
        }
        bound = bound.max(b.abs());
    }
    bound
}

/// Real parts of the (numerically) real roots of `q`.
fn derivative_roots(q: &[f64]) -> Vec<f64> {
    let m = q.len() - 1;
    match m {
        0 => Vec::new(),
        1 => vec![-q[0] / q[1]],
        _ => {
            let lead = q[m];
            let companion = DMatrix::from_fn(m, m, |i, j| {
                if j == m - 1 {
                    -q[i] / lead
                } else if i == j + 1 {
                    1.0
                } else {
                    0.0
                }
            });
            companion
                .complex_eigenvalues()
                .iter()
                .filter(|z| z.im.abs() <= IMAG_TOL * (1.0 + z.re.abs()))
                .map(|z| z.re)
                .collect()
        }
    }
}

/// A few Newton steps on `q(x) = 0`, keeping `x` unchanged if they misbehave.
fn polish(q: &[f64], x0: f64) -> f64 {
    let mut dq = [0.0; MAX_DEGREE];
    for k in 1..q.len() {
        dq[k - 1] = k as f64 * q[k];
    }
    let dq = &dq[..q.len().saturating_sub(1).max(1)];
    let mut x = x0;
    for _ in 0..3 {
        let d = horner(dq, x);
        if d == 0.0 {
            break;
        }
        let next = x - horner(q, x) / d;
        if !(next > 0.0 && next < 1.0) || (next - x0).abs() > 1e-6 {
            break;
        }
        x = next;
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn bernstein_coefficients_of_simple_polynomials() {
        // 2 sigma(1 - sigma): b = (0, 1, 0) in degree 2.
        assert!((bernstein_bound(&[0.0, 2.0, -2.0]) - 1.0).abs() < 1e-15);
        // sigma^3: b = (0, 0, 0, 1).
        assert!((bernstein_bound(&[0.0, 0.0, 0.0, 1.0]) - 1.0).abs() < 1e-15);
        assert!((bernstein_bound(&[-3.0]) - 3.0).abs() < 1e-15);
    }

    fn dense_max(c: &[f64], n: usize) -> f64 {
        (0..=n).map(|k| horner(c, k as f64 / n as f64).abs()).fold(0.0, f64::max)
    }

    #[test]
    fn constant_polynomial() {
        assert_eq!(polynomial_abs_max(&[-3.0]), (3.0, 0.0));
    }

    #[test]
    fn all_zero_polynomial() {
        assert_eq!(polynomial_abs_max(&[0.0, 0.0, 0.0]), (0.0, 0.0));
        assert_eq!(polynomial_abs_max(&[]), (0.0, 0.0));
    }

    #[test]
    fn interior_maximum_of_parabola() {
        let (m, s) = polynomial_abs_max(&[0.0, 1.0, -1.0]);
        assert!((m - 0.25).abs() < 1e-15);
        assert!((s - 0.5).abs() < 1e-12);
        assert!((dense_max(&[0.0, 1.0, -1.0], 100_000) - 0.25).abs() < 1e-10);
    }

    #[test]
    fn linear_picks_endpoint() {
        assert_eq!(polynomial_abs_max(&[1.0, -3.0]), (2.0, 1.0));
    }

    #[test]
    fn double_root_of_derivative() {
        // p = (x - 1/2)^3: p' has a double root at 1/2, max at x = 0 or 1.
        let c = [-0.125, 0.75, -1.5, 1.0];
        let (m, _) = polynomial_abs_max(&c);
        assert!((m - 0.125).abs() < 1e-14);
    }

    proptest! {
        #[test]
        fn bernstein_bound_dominates_the_maximum(c in proptest::collection::vec(-1.0f64..1.0, 1..=8)) {
            let (max, _) = polynomial_abs_max(&c);
            prop_assert!(bernstein_bound(&c) >= max * (1.0 - 1e-14));
        }

        #[test]
        fn agrees_with_dense_sampling(c in proptest::collection::vec(-10.0f64..10.0, 1..=6)) {
            let (m, s) = polynomial_abs_max(&c);
            let dense = dense_max(&c, 100_000);
            prop_assert!(m >= dense - 1e-10);
            // 1e5 samples resolve an interior maximum only to ~|p''| * 1e-11.
            prop_assert!(m <= dense + 1e-8 * (1.0 + dense));
            prop_assert!((0.0..=1.0).contains(&s));
            prop_assert!((horner(&c, s).abs() - m).abs() <= 1e-12 * (1.0 + m));
        }
    }
}
