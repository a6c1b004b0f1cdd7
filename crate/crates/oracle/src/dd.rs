//! Double-double arithmetic (~32 significant digits) and phi-functions on top of it.

use std::ops::{Add, Div, Mul, Neg, Sub};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DD {
    pub hi: f64,
    pub lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

impl DD {
    pub const ZERO: DD = DD { hi: 0.0, lo: 0.0 };
    pub const ONE: DD = DD { hi: 1.0, lo: 0.0 };
    pub const LN2: DD = DD { hi: std::f64::consts::LN_2, lo: 2.319_046_813_846_299_6e-17 };

    pub fn from(x: f64) -> DD {
        DD { hi: x, lo: 0.0 }
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    pub fn abs(self) -> DD {
        if self.hi < 0.0 {
            -self
        } else {
            self
        }
    }

    pub fn scale(self, f: f64) -> DD {
        DD { hi: self.hi * f, lo: self.lo * f }
    }
}

impl Neg for DD {
    type Output = DD;
    fn neg(self) -> DD {
        DD { hi: -self.hi, lo: -self.lo }
    }
}

impl Add for DD {
    type Output = DD;
    fn add(self, b: DD) -> DD {
        let (s, e) = two_sum(self.hi, b.hi);
        let (t, f) = two_sum(self.lo, b.lo);
        let (s, e) = quick_two_sum(s, e + t);
        let (hi, lo) = quick_two_sum(s, e + f);
        DD { hi, lo }
    }
}

impl Sub for DD {
    type Output = DD;
    fn sub(self, b: DD) -> DD {
        self + (-b)
    }
}

impl Mul for DD {
    type Output = DD;
    fn mul(self, b: DD) -> DD {
        let (p, e) = two_prod(self.hi, b.hi);
        let e = e + (self.hi * b.lo + self.lo * b.hi);
        let (hi, lo) = quick_two_sum(p, e);
        DD { hi, lo }
    }
}

impl Div for DD {
    type Output = DD;
    fn div(self, b: DD) -> DD {
        let q1 = self.hi / b.hi;
        let r = self - b * DD::from(q1);
        let q2 = r.hi / b.hi;
        let r = r - b * DD::from(q2);
        let q3 = r.hi / b.hi;
        let (hi, lo) = quick_two_sum(q1, q2);
        DD { hi, lo } + DD::from(q3)
    }
}

/// `e^x` for `x <= 0` in double-double.
pub fn exp(x: DD) -> DD {
    if x.hi == 0.0 {
        return DD::ONE;
    }
    if x.hi < -745.2 {
        return DD::ZERO;
    }
    let k = (x.hi / std::f64::consts::LN_2).round();
    let r = x - DD::LN2 * DD::from(k);
    let r = r.scale(1.0 / 1024.0);
    // Taylor series of e^r - 1 for |r| < 4e-4.
    let mut term = r;
    let mut sum = r;
    for n in 2..=20 {
        term = term * r / DD::from(n as f64);
        sum = sum + term;
    }
    // (e^r)^1024 via ten squarings of 1 + sum, carried as expm1 to limit loss.
    for _ in 0..10 {
        sum = sum.scale(2.0) + sum * sum;
    }
    let e = sum + DD::ONE;
    let k = k as i32;
    // Split the power of two so neither factor over/underflows on its own.
    let half = k / 2;
    e.scale(2f64.powi(half)).scale(2f64.powi(k - half))
}

fn inv_fact(n: usize) -> DD {
    let mut f = DD::ONE;
    for k in 2..=n {
        f = f * DD::from(k as f64);
    }
    DD::ONE / f
}

/// `sum_k z^k / (k+j)!`, summed until the terms drop below 1e-34 relative.
pub fn phi_series(j: usize, z: f64) -> DD {
    let zd = DD::from(z);
    let mut term = inv_fact(j);
    let mut sum = term;
    for k in 1..=400 {
        term = term * zd / DD::from((k + j) as f64);
        sum = sum + term;
        if term.abs().hi < 1e-34 * sum.abs().hi {
            break;
        }
    }
    sum
}

/// `(e^z - sum_{k<j} z^k/k!) / z^j`.
pub fn phi_direct(j: usize, z: f64) -> DD {
    let zd = DD::from(z);
    let mut num = exp(zd);
    let mut term = DD::ONE;
    if j > 0 {
        num = num - term;
    }
    for k in 1..j {
        term = term * zd / DD::from(k as f64);
        num = num - term;
    }
    let mut zj = DD::ONE;
    for _ in 0..j {
        zj = zj * zd;
    }
    num / zj
}

/// `phi_j(z)` for `z <= 0`, in double-double.
pub fn phi(j: usize, z: f64) -> DD {
    if z == 0.0 {
        inv_fact(j)
    } else if j == 0 {
        exp(DD::from(z))
    } else if -z <= j as f64 + 2.0 {
        phi_series(j, z)
    } else {
        phi_direct(j, z)
    }
}
