//! Stable evaluation of the phi-functions for non-positive real arguments.
//!
//! `phi_0(z) = e^z` and, for `j >= 1`,
//! `phi_j(z) = (e^z - sum_{k<j} z^k / k!) / z^j`, with `phi_j(0) = 1/j!`.
//!
//! Near zero the defining formula cancels catastrophically, so small
//! arguments go through the Taylor series `sum_k z^k / (k+j)!`. The switch
//! point grows with `j`: the cancellation in the direct formula gets worse
//! with every subtracted Taylor term, while the series stays well conditioned
//! for `|z|` up to about `j`.

use crate::error::{Error, Result};

/// Number of Taylor terms beyond the leading one.
pub const TAYLOR_TERMS: usize = 40;

/// Branch configuration for a family `phi_0 ..= phi_max_index`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhiTable {
    max_index: usize,
    taylor_terms: usize,
}

impl PhiTable {
    pub fn new(max_index: usize) -> Result<Self> {
        if max_index < 1 {
            return Err(Error::InvalidParameter("phi table needs max_index >= 1".into()));
        }
        Ok(Self { max_index, taylor_terms: TAYLOR_TERMS })
    }

    pub fn max_index(&self) -> usize {
        self.max_index
    }

    pub fn taylor_terms(&self) -> usize {
        self.taylor_terms
    }

    /// `|z|` at or below which `phi_j` uses the series branch.
    pub fn small_arg_threshold(&self, j: usize) -> f64 {
        small_arg_threshold(j)
    }
}

#[inline]
pub fn small_arg_threshold(j: usize) -> f64 {
    1.0 + 0.5 * j as f64
}

/// `phi_j(z)` for `z <= 0`.
pub fn phi(j: usize, z: f64) -> Result<f64> {
    if z > 0.0 || z.is_nan() {
        return Err(Error::InvalidParameter(format!("phi argument must be <= 0, got {z}")));
    }
    Ok(phi_unchecked(j, z))
}

/// `phi_j(z)` without the domain check; callers guarantee `z <= 0`.
#[inline]
pub(crate) fn phi_unchecked(j: usize, z: f64) -> f64 {
    if j == 0 {
        z.exp()
    } else if -z <= small_arg_threshold(j) {
        phi_series(j, z)
    } else {
        phi_direct(j, z)
    }
}

/// Elementwise [`phi`]; bit-identical to scalar calls.
pub fn phi_batch(j: usize, zs: &[f64]) -> Result<Vec<f64>> {
    zs.iter().map(|&z| phi(j, z)).collect()
}

/// Horner evaluation of `sum_{k=0}^{K} z^k / (k+j)!`.
pub(crate) fn phi_series(j: usize, z: f64) -> f64 {
    let mut acc = 1.0;
    for k in (1..=TAYLOR_TERMS).rev() {
        acc = 1.0 + acc * z / (k + j) as f64;
    }
    acc * inv_factorial(j)
}

/// Defining formula with `expm1` absorbing the first subtraction.
pub(crate) fn phi_direct(j: usize, z: f64) -> f64 {
    let mut num = z.exp_m1();
    let mut term = 1.0;
    for k in 1..j {
        term *= z / k as f64;
        num -= term;
    }
    num / z.powi(j as i32)
}

pub fn inv_factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc / k as f64)
}

pub fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn limits_at_zero() {
        assert_eq!(phi(0, 0.0).unwrap(), 1.0);
        assert_eq!(phi(2, 0.0).unwrap(), 0.5);
        for j in 0..=10 {
            assert!((phi(j, 0.0).unwrap() - inv_factorial(j)).abs() <= 1e-16 * inv_factorial(j));
        }
    }

    #[test]
    fn phi1_at_minus_one() {
        let v = phi(1, -1.0).unwrap();
        assert!((v - 0.632120558828558).abs() < 1e-14);
    }

    #[test]
    fn rejects_positive_arguments() {
        assert!(phi(1, 1e-3).is_err());
        assert!(phi(1, f64::NAN).is_err());
    }

    #[test]
    fn batch_matches_scalar() {
        assert!(phi_batch(1, &[]).unwrap().is_empty());
        let two = phi_batch(1, &[0.0, -1.0]).unwrap();
        assert_eq!(two, vec![1.0, phi(1, -1.0).unwrap()]);
        let zs: Vec<f64> = (0..1000).map(|k| -100.0 * ((k * 7919) % 1000) as f64 / 999.0).collect();
        for j in 0..5 {
            let b = phi_batch(j, &zs).unwrap();
            for (z, v) in zs.iter().zip(b) {
                assert_eq!(v.to_bits(), phi(j, *z).unwrap().to_bits());
            }
        }
    }

    #[test]
    fn branches_agree_at_threshold() {
        for j in 1..=10 {
            let z = -small_arg_threshold(j);
            let s = phi_series(j, z);
            let d = phi_direct(j, z);
            assert!(((s - d) / s).abs() < 1e-12, "j={j}: {s} vs {d}");
        }
    }

    #[test]
    fn large_negative_arguments() {
        // phi_1(z) -> -1/z, phi_2(z) -> -1/z - 1/z^2 as e^z vanishes.
        let z = -1e6;
        assert!(((phi(1, z).unwrap() - 1e-6) / 1e-6).abs() < 1e-15);
        let want = 1e-6 - 1e-12;
        assert!(((phi(2, z).unwrap() - want) / want).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn strictly_between_zero_and_inverse_factorial(j in 1usize..=10, z in -1e4f64..-1e-8) {
            let v = phi(j, z).unwrap();
            prop_assert!(v > 0.0 && v < inv_factorial(j));
        }

        #[test]
        fn lambda_scaling_is_monotone(j in 1usize..=8, z in -200f64..-1e-3, lam in 0.01f64..0.99) {
            let scaled = lam.powi(j as i32) * phi(j, lam * z).unwrap();
            let base = phi(j, z).unwrap();
            prop_assert!(scaled <= base * (1.0 + 1e-14));
        }

        #[test]
        fn recurrence_holds_away_from_zero(j in 0usize..=9, z in -1e3f64..-1.0) {
            let lhs = phi(j + 1, z).unwrap();
            let rhs = (phi(j, z).unwrap() - inv_factorial(j)) / z;
            prop_assert!(((lhs - rhs) / lhs).abs() < 1e-12);
        }
    }
}
