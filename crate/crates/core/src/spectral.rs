//! The stabilized Neumann operator `L = eps^2 Lap_h - kappa I` in the cosine basis.
//!
//! On a cell-centered mesh the 5-point Laplacian with reflected ghost cells is
//! diagonalized exactly by the type-II DCT in each direction, with 1D
//! eigenvalues `-(4/h^2) sin^2(k pi / (2n))`. Operator functions such as
//! `e^{sL}` and `phi_j(sL)` are therefore applied exactly: transform, scale
//! every mode by the scalar function of `s * lambda`, transform back.
//!
//! The transforms are orthonormal, so the cell-area weighted L2 norm of a
//! field equals the cell-area weighted Euclidean norm of its coefficients.

use std::fmt;
use std::sync::Arc;

use rustdct::{DctPlanner, TransformType2And3};

use crate::error::{Error, Result};
use crate::grid::{Field, Mesh2D};
use crate::phi::phi_unchecked;

/// Cosine coefficients of a field, stored like [`Field`] (`kx` fastest).
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    mesh: Mesh2D,
    coeffs: Vec<f64>,
}

impl SpectralField {
    pub fn mesh(&self) -> &Mesh2D {
        &self.mesh
    }
    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }
    pub fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }
    pub fn get(&self, kx: usize, ky: usize) -> f64 {
        self.coeffs[self.mesh.index(kx, ky)]
    }
    /// Matches [`Field::l2_norm`] of the physical field.
    pub fn l2_norm(&self) -> f64 {
        let sq: Vec<f64> = self.coeffs.iter().map(|c| c * c).collect();
        (self.mesh.cell_area() * crate::grid::pairwise_sum(&sq)).sqrt()
    }
}

/// Precomputed eigenvalues and DCT plans for `L = eps^2 Lap_h - kappa I`.
#[derive(Clone)]
pub struct SpectralPlan {
    mesh: Mesh2D,
    eps: f64,
    kappa: f64,
    eigvals: Vec<f64>,
    dct_x: Arc<dyn TransformType2And3<f64>>,
    dct_y: Arc<dyn TransformType2And3<f64>>,
}

impl fmt::Debug for SpectralPlan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SpectralPlan")
            .field("mesh", &self.mesh)
            .field("eps", &self.eps)
            .field("kappa", &self.kappa)
            .finish_non_exhaustive()
    }
}

/// Eigenvalues of the 1D cell-centered Neumann Laplacian.
pub fn laplacian_eigenvalues_1d(n: usize, h: f64) -> Vec<f64> {
    (0..n)
        .map(|k| {
            let s = (k as f64 * std::f64::consts::PI / (2.0 * n as f64)).sin();
            -4.0 / (h * h) * s * s
        })
        .collect()
}

impl SpectralPlan {
    pub fn new(mesh: Mesh2D, eps: f64, kappa: f64) -> Result<Self> {
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(Error::InvalidParameter(format!("eps must be positive, got {eps}")));
        }
        if !(kappa > 0.0 && kappa.is_finite()) {
            return Err(Error::InvalidParameter(format!("kappa must be positive, got {kappa}")));
        }
        let mux = laplacian_eigenvalues_1d(mesh.nx(), mesh.hx());
        let muy = laplacian_eigenvalues_1d(mesh.ny(), mesh.hy());
        let eps2 = eps * eps;
        let mut eigvals = Vec::with_capacity(mesh.len());
        for my in &muy {
            for mx in &mux {
                eigvals.push(eps2 * (mx + my) - kappa);
            }
        }
        let mut planner = DctPlanner::new();
        let dct_x = planner.plan_dct2(mesh.nx());
        let dct_y = planner.plan_dct2(mesh.ny());
        Ok(Self { mesh, eps, kappa, eigvals, dct_x, dct_y })
    }

    pub fn mesh(&self) -> &Mesh2D {
        &self.mesh
    }
    pub fn eps(&self) -> f64 {
        self.eps
    }
    pub fn kappa(&self) -> f64 {
        self.kappa
    }
    /// Eigenvalues of `L`, indexed like the spectral coefficients.
    pub fn eigvals(&self) -> &[f64] {
        &self.eigvals
    }

    fn check_mesh(&self, mesh: &Mesh2D) -> Result<()> {
        if mesh == &self.mesh {
            Ok(())
        } else {
            Err(Error::MeshMismatch { left: self.mesh.to_string(), right: mesh.to_string() })
        }
    }

    /// Orthonormal 2D DCT-II.
    pub fn to_spectral(&self, u: &Field) -> Result<SpectralField> {
        self.check_mesh(u.mesh())?;
        let mut coeffs = u.values().to_vec();
        self.forward_in_place(&mut coeffs);
        Ok(SpectralField { mesh: self.mesh, coeffs })
    }

    /// Orthonormal 2D DCT-III, the inverse of [`SpectralPlan::to_spectral`].
    pub fn from_spectral(&self, uhat: &SpectralField) -> Result<Field> {
        self.check_mesh(&uhat.mesh)?;
        let mut values = uhat.coeffs.clone();
        self.inverse_in_place(&mut values);
        Ok(Field::from_raw(self.mesh, values))
    }

    pub(crate) fn forward_in_place(&self, data: &mut [f64]) {
        self.transform_axes(data, true);
    }

    pub(crate) fn inverse_in_place(&self, data: &mut [f64]) {
        self.transform_axes(data, false);
    }

    fn transform_axes(&self, data: &mut [f64], forward: bool) {
        let (nx, ny) = (self.mesh.nx(), self.mesh.ny());
        let scratch_len = self
            .dct_x
            .get_scratch_len()
            .max(self.dct_y.get_scratch_len());
        let mut scratch = vec![0.0; scratch_len];
        for row in data.chunks_exact_mut(nx) {
            transform_line(self.dct_x.as_ref(), row, &mut scratch, forward);
        }
        let mut col = vec![0.0; ny];
        for i in 0..nx {
            for (j, c) in col.iter_mut().enumerate() {
                *c = data[i + nx * j];
            }
            transform_line(self.dct_y.as_ref(), &mut col, &mut scratch, forward);
            for (j, c) in col.iter().enumerate() {
                data[i + nx * j] = *c;
            }
        }
    }

    /// Scalar multipliers `phi_j(s * lambda)` for every mode.
    pub fn phi_multipliers(&self, j: usize, s: f64) -> Vec<f64> {
        self.eigvals.iter().map(|&lam| phi_unchecked(j, s * lam)).collect()
    }

    /// `phi_j(s L) v`; `j = 0` is the semigroup `e^{sL} v`.
    pub fn apply_phi(&self, j: usize, s: f64, v: &Field) -> Result<Field> {
        if !(s > 0.0 && s.is_finite()) {
            return Err(Error::InvalidParameter(format!("time argument must be positive, got {s}")));
        }
        let mut vhat = self.to_spectral(v)?;
        for (c, &lam) in vhat.coeffs.iter_mut().zip(&self.eigvals) {
            *c *= phi_unchecked(j, s * lam);
        }
        self.from_spectral(&vhat)
    }
}

/// Orthonormal 1D DCT-II (forward) or DCT-III (inverse) of one line.
fn transform_line(dct: &dyn TransformType2And3<f64>, line: &mut [f64], scratch: &mut [f64], forward: bool) {
    let n = line.len() as f64;
    let s0 = (1.0 / n).sqrt();
    let sk = (2.0 / n).sqrt();
    if forward {
        dct.process_dct2_with_scratch(line, scratch);
        line[0] *= s0;
        for c in &mut line[1..] {
            *c *= sk;
        }
    } else {
        // rustdct's DCT-III halves the DC term.
        line[0] *= 2.0 * s0;
        for c in &mut line[1..] {
            *c *= sk;
        }
        dct.process_dct3_with_scratch(line, scratch);
    }
}
