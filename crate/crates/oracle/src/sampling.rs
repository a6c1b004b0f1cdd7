//! Brute-force maximum of `|p|` on `[0, 1]`.

fn eval(c: &[f64], x: f64) -> f64 {
    let mut acc = 0.0;
    let mut pow = 1.0;
    for &ck in c {
        acc += ck * pow;
        pow *= x;
    }
    acc
}

/// Plain maximum of `|p|` over `n + 1` equispaced samples.
pub fn dense_abs_max(c: &[f64], n: usize) -> f64 {
    (0..=n).map(|k| eval(c, k as f64 / n as f64).abs()).fold(0.0, f64::max)
}

/// Dense sampling at `n + 1` points followed by a second dense pass of
/// 1001 points across the two cells around every sampled local maximum.
/// Plateaus of equal samples are not refined.
pub fn refined_abs_max(c: &[f64], n: usize) -> f64 {
    let h = 1.0 / n as f64;
    let vals: Vec<f64> = (0..=n).map(|k| eval(c, k as f64 * h).abs()).collect();
    let mut best = vals.iter().copied().fold(0.0, f64::max);
    for k in 1..n {
        if vals[k] > vals[k - 1] && vals[k] >= vals[k + 1] {
            let lo = (k - 1) as f64 * h;
            let m = 1000;
            for i in 0..=m {
                let x = lo + 2.0 * h * i as f64 / m as f64;
                best = best.max(eval(c, x).abs());
            }
        }
    }
    best
}
