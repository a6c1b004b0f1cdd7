//! Dense-matrix versions of the Neumann operator and the ETDRK cascade.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::dd;
use crate::sampling::refined_abs_max;

/// Assembled `eps^2 Lap_h - kappa I` (5-point stencil, reflected ghost cells,
/// index `i + nx * j`) with its symmetric eigendecomposition.
pub struct DenseOperator {
    pub nx: usize,
    pub ny: usize,
    pub matrix: DMatrix<f64>,
    eig: SymmetricEigen<f64, nalgebra::Dyn>,
}

impl DenseOperator {
    pub fn new(nx: usize, ny: usize, lx: f64, ly: f64, eps: f64, kappa: f64) -> Self {
        let (hx, hy) = (lx / nx as f64, ly / ny as f64);
        let n = nx * ny;
        let mut a = DMatrix::<f64>::zeros(n, n);
        let e2 = eps * eps;
        for j in 0..ny {
            for i in 0..nx {
                let p = i + nx * j;
                a[(p, p)] -= kappa;
                let mut couple = |q: usize, h: f64| {
                    a[(p, q)] += e2 / (h * h);
                    a[(p, p)] -= e2 / (h * h);
                };
                if i > 0 {
                    couple(p - 1, hx);
                }
                if i + 1 < nx {
                    couple(p + 1, hx);
                }
                if j > 0 {
                    couple(p - nx, hy);
                }
                if j + 1 < ny {
                    couple(p + nx, hy);
                }
            }
        }
        let eig = SymmetricEigen::new(a.clone());
        Self { nx, ny, matrix: a, eig }
    }

    pub fn eigenvalues(&self) -> &DVector<f64> {
        &self.eig.eigenvalues
    }

    /// `g(A) v` through the eigendecomposition.
    pub fn apply(&self, g: impl Fn(f64) -> f64, v: &[f64]) -> Vec<f64> {
        let q = &self.eig.eigenvectors;
        let mut coef = q.transpose() * DVector::from_column_slice(v);
        for (c, &lam) in coef.iter_mut().zip(self.eig.eigenvalues.iter()) {
            *c *= g(lam);
        }
        (q * coef).as_slice().to_vec()
    }

    /// `phi_j(s A) v` with double-double scalar phi.
    pub fn apply_phi(&self, j: usize, s: f64, v: &[f64]) -> Vec<f64> {
        self.apply(|lam| dd::phi(j, s * lam).to_f64(), v)
    }

    /// Exact `int_0^s e^{(s-r)A} P(r) dr` plus `e^{sA} u` for
    /// `P(r) = k + sum_m c_m (r/tau)^m`, by composite Gauss-Legendre
    /// quadrature in each eigenmode.
    pub fn duhamel_quadrature(&self, s: f64, tau: f64, u: &[f64], k: &[f64], cs: &[Vec<f64>]) -> Vec<f64> {
        let q = &self.eig.eigenvectors;
        let proj = |v: &[f64]| q.transpose() * DVector::from_column_slice(v);
        let (ue, ke) = (proj(u), proj(k));
        let ce: Vec<DVector<f64>> = cs.iter().map(|c| proj(c)).collect();
        let (gx, gw) = gauss_legendre(12);
        let panels = 64;
        let width = s / panels as f64;
        let mut we = DVector::zeros(ue.len());
        for (m, &lam) in self.eig.eigenvalues.iter().enumerate() {
            let mut acc = 0.0;
            for p in 0..panels {
                let a = p as f64 * width;
                for (x, w) in gx.iter().zip(&gw) {
                    let r = a + 0.5 * width * (x + 1.0);
                    let sig = r / tau;
                    let mut poly = ke[m];
                    for (i, c) in ce.iter().enumerate() {
                        poly += c[m] * sig.powi(i as i32 + 1);
                    }
                    acc += 0.5 * width * w * ((s - r) * lam).exp() * poly;
                }
            }
            we[m] = (s * lam).exp() * ue[m] + acc;
        }
        (q * we).as_slice().to_vec()
    }
}

/// Gauss-Legendre nodes and weights on `[-1, 1]` via Newton on `P_n`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
    (x, w)
}

/// Orthonormal DCT-II matrix: `C[k][n] = s_k cos(pi k (2n+1) / (2N))`.
pub fn cosine_matrix(n: usize) -> DMatrix<f64> {
    DMatrix::from_fn(n, n, |k, i| {
        let s = if k == 0 { (1.0 / n as f64).sqrt() } else { (2.0 / n as f64).sqrt() };
        s * (std::f64::consts::PI * k as f64 * (2 * i + 1) as f64 / (2 * n) as f64).cos()
    })
}

/// 2D orthonormal cosine matrix acting on `i + nx * j` ordered data.
pub fn cosine_matrix_2d(nx: usize, ny: usize) -> DMatrix<f64> {
    let (cx, cy) = (cosine_matrix(nx), cosine_matrix(ny));
    DMatrix::from_fn(nx * ny, nx * ny, |row, col| {
        let (kx, ky) = (row % nx, row / nx);
        let (i, j) = (col % nx, col / nx);
        cx[(kx, i)] * cy[(ky, j)]
    })
}

/// Straightforward ETDRK(r) step on the dense operator.
///
/// `levels[j-1]` holds the nodes `a_{j,1..=j}` of cascade level `j`.
/// `f` is the reaction term; `Err` carries a description of the failure.
#[allow(clippy::too_many_arguments)]
pub fn reference_step(
    op: &DenseOperator,
    f: &dyn Fn(f64) -> Option<f64>,
    kappa: f64,
    beta: f64,
    levels: &[Vec<f64>],
    tau: f64,
    rescaled: bool,
    u: &[f64],
) -> Result<Vec<f64>, String> {
    let npts = u.len();
    let nl = |v: &[f64]| -> Result<Vec<f64>, String> {
        v.iter()
            .map(|&x| f(x).map(|fx| fx + kappa * x).ok_or_else(|| format!("f undefined at {x}")))
            .collect()
    };
    let n0 = nl(u)?;
    let stage = |s: f64, k: &[f64], cs: &[Vec<f64>]| -> Vec<f64> {
        let sig = s / tau;
        let mut w = op.apply_phi(0, s, u);
        let t = op.apply_phi(1, s, k);
        for p in 0..npts {
            w[p] += s * t[p];
        }
        for (m, c) in cs.iter().enumerate() {
            let mm = m + 1;
            let fact: f64 = (1..=mm).map(|x| x as f64).product();
            let t = op.apply_phi(mm + 1, s, c);
            for p in 0..npts {
                w[p] += tau * fact * sig.powi(mm as i32 + 1) * t[p];
            }
        }
        w
    };
    let mut k = n0.clone();
    let mut cs: Vec<Vec<f64>> = Vec::new();
    for nodes in levels {
        let j = nodes.len();
        let mut d = Vec::with_capacity(j);
        for &a in nodes {
            let w = stage(a * tau, &k, &cs);
            let nw = nl(&w)?;
            d.push(nw.iter().zip(&n0).map(|(x, y)| x - y).collect::<Vec<f64>>());
        }
        let v = DMatrix::from_fn(j, j, |i, m| nodes[i].powi(m as i32 + 1));
        let lu = v.lu();
        let mut new_cs = vec![vec![0.0; npts]; j];
        for p in 0..npts {
            let rhs = DVector::from_fn(j, |i, _| d[i][p]);
            let c = lu.solve(&rhs).ok_or("singular Vandermonde")?;
            for m in 0..j {
                new_cs[m][p] = c[m];
            }
        }
        k = n0.clone();
        if rescaled {
            let kb = kappa * beta;
            for p in 0..npts {
                let mut coeffs = vec![n0[p]];
                coeffs.extend(new_cs.iter().map(|c| c[p]));
                let m = refined_abs_max(&coeffs, 2000);
                let alpha = if m <= kb { 1.0 } else { kb / m };
                k[p] *= alpha;
                for c in new_cs.iter_mut() {
                    c[p] *= alpha;
                }
            }
        }
        cs = new_cs;
    }
    Ok(stage(tau, &k, &cs))
}
