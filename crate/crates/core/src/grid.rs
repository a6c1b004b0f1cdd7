//! Uniform cell-centered meshes on a rectangle and grid functions over them.
//!
//! Storage is row-major with `i` (the x index) fastest: the value at cell
//! `(i, j)` lives at `i + nx * j`. Reductions use pairwise summation so that
//! results do not depend on how a caller chunks the work.

use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::potential::Potential;

/// A uniform cell-centered mesh on `(0, lx) x (0, ly)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mesh2D {
    lx: f64,
    ly: f64,
    nx: usize,
    ny: usize,
}

impl Mesh2D {
    pub fn new(lx: f64, ly: f64, nx: usize, ny: usize) -> Result<Self> {
        if nx < 2 || ny < 2 {
            return Err(Error::InvalidMesh(format!("need at least 2 cells per axis, got {nx}x{ny}")));
        }
        if !(lx > 0.0 && ly > 0.0 && lx.is_finite() && ly.is_finite()) {
            return Err(Error::InvalidMesh(format!("edge lengths must be positive, got {lx}x{ly}")));
        }
        Ok(Self { lx, ly, nx, ny })
    }

    /// Square mesh on `(0, 2*pi)^2`, the domain used by all experiments.
    pub fn square_2pi(n: usize) -> Result<Self> {
        let l = 2.0 * std::f64::consts::PI;
        Self::new(l, l, n, n)
    }

    pub fn lx(&self) -> f64 {
        self.lx
    }
    pub fn ly(&self) -> f64 {
        self.ly
    }
    pub fn nx(&self) -> usize {
        self.nx
    }
    pub fn ny(&self) -> usize {
        self.ny
    }
    pub fn hx(&self) -> f64 {
        self.lx / self.nx as f64
    }
    pub fn hy(&self) -> f64 {
        self.ly / self.ny as f64
    }
    /// Area of one cell.
    pub fn cell_area(&self) -> f64 {
        self.hx() * self.hy()
    }
    pub fn len(&self) -> usize {
        self.nx * self.ny
    }
    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        i + self.nx * j
    }

    /// Coordinates of the center of cell `(i, j)`.
    #[inline]
    pub fn center(&self, i: usize, j: usize) -> (f64, f64) {
        ((i as f64 + 0.5) * self.hx(), (j as f64 + 0.5) * self.hy())
    }

    fn check_same(&self, other: &Mesh2D) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::MeshMismatch { left: self.to_string(), right: other.to_string() })
        }
    }
}

impl fmt::Display for Mesh2D {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{} on ({}, {})", self.nx, self.ny, self.lx, self.ly)
    }
}

/// A scalar grid function.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    mesh: Mesh2D,
    values: Vec<f64>,
}

impl Field {
    pub fn new(mesh: Mesh2D, values: Vec<f64>) -> Result<Self> {
        if values.len() != mesh.len() {
            return Err(Error::InvalidParameter(format!(
                "field needs {} values for mesh {mesh}, got {}",
                mesh.len(),
                values.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(format!("non-finite field value {v}")));
        }
        Ok(Self { mesh, values })
    }

    pub fn zeros(mesh: Mesh2D) -> Self {
        Self::constant(mesh, 0.0)
    }

    pub fn constant(mesh: Mesh2D, c: f64) -> Self {
        Self { mesh, values: vec![c; mesh.len()] }
    }

    /// Samples `g(x, y)` at the cell centers.
    pub fn from_fn(mesh: Mesh2D, g: impl Fn(f64, f64) -> f64) -> Self {
        let mut values = Vec::with_capacity(mesh.len());
        for j in 0..mesh.ny {
            for i in 0..mesh.nx {
                let (x, y) = mesh.center(i, j);
                values.push(g(x, y));
            }
        }
        Self { mesh, values }
    }

    pub(crate) fn from_raw(mesh: Mesh2D, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), mesh.len());
        Self { mesh, values }
    }

    pub fn mesh(&self) -> &Mesh2D {
        &self.mesh
    }
    pub fn values(&self) -> &[f64] {
        &self.values
    }
    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }
    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[self.mesh.index(i, j)]
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn map(&self, g: impl Fn(f64) -> f64) -> Field {
        Field { mesh: self.mesh, values: self.values.iter().map(|&v| g(v)).collect() }
    }

    pub fn scale(&self, a: f64) -> Field {
        self.map(|v| a * v)
    }

    /// `a * self + b * other`.
    pub fn lin_comb(&self, a: f64, other: &Field, b: f64) -> Result<Field> {
        self.mesh.check_same(&other.mesh)?;
        let values = self.values.iter().zip(&other.values).map(|(x, y)| a * x + b * y).collect();
        Ok(Field { mesh: self.mesh, values })
    }

    /// Largest absolute value over all cells.
    pub fn max_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `hx * hy * sum(u * v)`.
    pub fn inner(&self, other: &Field) -> Result<f64> {
        self.mesh.check_same(&other.mesh)?;
        let prod: Vec<f64> = self.values.iter().zip(&other.values).map(|(a, b)| a * b).collect();
        Ok(self.mesh.cell_area() * pairwise_sum(&prod))
    }

    pub fn l2_norm(&self) -> f64 {
        let sq: Vec<f64> = self.values.iter().map(|v| v * v).collect();
        (self.mesh.cell_area() * pairwise_sum(&sq)).sqrt()
    }

    /// Largest pointwise difference to `other`.
    pub fn max_diff(&self, other: &Field) -> Result<f64> {
        self.mesh.check_same(&other.mesh)?;
        Ok(self.values.iter().zip(&other.values).fold(0.0, |m, (a, b)| m.max((a - b).abs())))
    }

    /// Discrete original energy
    /// `hx*hy*[ eps^2/2 * sum over interior faces of (difference quotient)^2 + sum F(u) ]`.
    ///
    /// Boundary faces carry zero flux, matching the homogeneous Neumann
    /// Laplacian by summation by parts.
    pub fn discrete_energy(&self, eps: f64, potential: &Potential) -> Result<f64> {
        if eps.is_nan() || eps <= 0.0 {
            return Err(Error::InvalidParameter(format!("eps must be positive, got {eps}")));
        }
        let (nx, ny) = (self.mesh.nx, self.mesh.ny);
        let (hx, hy) = (self.mesh.hx(), self.mesh.hy());
        let mut grad = Vec::with_capacity(2 * nx * ny);
        for j in 0..ny {
            for i in 0..nx - 1 {
                let d = (self.get(i + 1, j) - self.get(i, j)) / hx;
                grad.push(d * d);
            }
        }
        for j in 0..ny - 1 {
            for i in 0..nx {
                let d = (self.get(i, j + 1) - self.get(i, j)) / hy;
                grad.push(d * d);
            }
        }
        let bulk = self.values.iter().map(|&u| potential.big_f(u)).collect::<Result<Vec<f64>>>()?;
        let area = self.mesh.cell_area();
        Ok(area * (0.5 * eps * eps * pairwise_sum(&grad) + pairwise_sum(&bulk)))
    }

    /// Writes the snapshot CSV (`i,j,x,y,u`, one row per cell, `i` fastest).
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        let mut emit = || -> std::io::Result<()> {
            writeln!(w, "i,j,x,y,u")?;
            for j in 0..self.mesh.ny {
                for i in 0..self.mesh.nx {
                    let (x, y) = self.mesh.center(i, j);
                    writeln!(w, "{i},{j},{},{},{}", fmt_g17(x), fmt_g17(y), fmt_g17(self.get(i, j)))?;
                }
            }
            w.flush()
        };
        emit().map_err(|e| Error::io(path, e))
    }

    /// Reads a snapshot CSV written by [`Field::write_csv`] onto `mesh`.
    pub fn read_csv(path: impl AsRef<Path>, mesh: Mesh2D) -> Result<Field> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let parse_err = |line: usize, msg: String| Error::Parse { path: path.to_path_buf(), line, msg };
        let mut values = vec![f64::NAN; mesh.len()];
        let mut seen = 0usize;
        for (n, line) in BufReader::new(file).lines().enumerate() {
            let line = line.map_err(|e| Error::io(path, e))?;
            if n == 0 {
                if line.trim() != "i,j,x,y,u" {
                    return Err(parse_err(1, format!("unexpected header {line:?}")));
                }
                continue;
            }
            if line.trim().is_empty() {
                continue;
            }
            let cols: Vec<&str> = line.split(',').collect();
            if cols.len() != 5 {
                return Err(parse_err(n + 1, format!("expected 5 columns, got {}", cols.len())));
            }
            let i: usize = cols[0].trim().parse().map_err(|e| parse_err(n + 1, format!("{e}")))?;
            let j: usize = cols[1].trim().parse().map_err(|e| parse_err(n + 1, format!("{e}")))?;
            let u: f64 = cols[4].trim().parse().map_err(|e| parse_err(n + 1, format!("{e}")))?;
            if i >= mesh.nx || j >= mesh.ny {
                return Err(parse_err(n + 1, format!("cell ({i},{j}) outside mesh {mesh}")));
            }
            values[mesh.index(i, j)] = u;
            seen += 1;
        }
        if seen != mesh.len() {
            return Err(parse_err(0, format!("expected {} rows, found {seen}", mesh.len())));
        }
        Field::new(mesh, values)
    }
}

/// Pairwise (cascade) summation with a fixed split, so the result is a
/// deterministic function of the slice contents.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    const BLOCK: usize = 32;
    if xs.len() <= BLOCK {
        xs.iter().sum()
    } else {
        let mid = xs.len() / 2;
        pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
    }
}

/// Formats with 17 significant digits; round-trips every finite `f64`.
/// Infinities print as `inf` / `-inf`.
pub fn fmt_g17(v: f64) -> String {
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    format!("{v:.16e}")
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn mesh(n: usize) -> Mesh2D {
        Mesh2D::square_2pi(n).unwrap()
    }

    #[test]
    fn rejects_degenerate_meshes() {
        assert!(Mesh2D::new(1.0, 1.0, 1, 4).is_err());
        assert!(Mesh2D::new(0.0, 1.0, 4, 4).is_err());
    }

    #[test]
    fn max_norm_examples() {
        let m = mesh(16);
        assert_eq!(Field::constant(m, -0.75).max_norm(), 0.75);

        let mut spike = Field::zeros(m);
        spike.values_mut()[37] = 2.0;
        assert_eq!(spike.max_norm(), 2.0);

        let u = Field::from_fn(mesh(128), |x, y| 0.5 * x.sin() * y.sin());
        let n = u.max_norm();
        assert!(n > 0.49 && n <= 0.5, "{n}");
    }

    #[test]
    fn l2_norm_of_one_is_domain_side() {
        let u = Field::constant(mesh(32), 1.0);
        assert!((u.l2_norm() - 2.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn cosine_mode_orthogonal_to_constant() {
        let m = mesh(64);
        let c = Field::from_fn(m, |x, _| x.cos());
        let one = Field::constant(m, 1.0);
        assert!(c.inner(&one).unwrap().abs() < 1e-12);
    }

    #[test]
    fn inner_is_symmetric_and_checks_mesh() {
        let m = mesh(8);
        let u = Field::from_fn(m, |x, y| (x * 1.3).sin() + y);
        let v = Field::from_fn(m, |x, y| x * y - 1.0);
        assert_eq!(u.inner(&v).unwrap(), v.inner(&u).unwrap());
        let w = Field::zeros(mesh(4));
        assert!(matches!(u.inner(&w), Err(Error::MeshMismatch { .. })));
    }

    #[test]
    fn energy_of_constants() {
        let m = mesh(32);
        let gl = Potential::ginzburg_landau();
        assert_eq!(Field::constant(m, 1.0).discrete_energy(0.1, &gl).unwrap(), 0.0);
        let e0 = Field::zeros(m).discrete_energy(0.1, &gl).unwrap();
        assert!((e0 - PI * PI).abs() < 1e-12, "{e0}");
    }

    #[test]
    fn energy_rejects_fh_out_of_domain() {
        let fh = Potential::flory_huggins(0.8, 1.6).unwrap();
        let u = Field::constant(mesh(8), 1.0);
        assert!(matches!(u.discrete_energy(0.1, &fh), Err(Error::Domain { .. })));
    }

    #[test]
    fn energy_is_mirror_symmetric_and_bounded_below_by_bulk() {
        let m = mesh(24);
        let gl = Potential::ginzburg_landau();
        let u = Field::from_fn(m, |x, y| 0.3 * (0.7 * x).sin() + 0.2 * (y * y / 10.0).cos());
        let mirrored = {
            let mut v = vec![0.0; m.len()];
            for j in 0..m.ny() {
                for i in 0..m.nx() {
                    v[m.index(m.nx() - 1 - i, j)] = u.get(i, j);
                }
            }
            Field::new(m, v).unwrap()
        };
        let e = u.discrete_energy(0.1, &gl).unwrap();
        let em = mirrored.discrete_energy(0.1, &gl).unwrap();
        assert!((e - em).abs() <= 1e-13 * e.abs());
        let bulk: f64 = u.values().iter().map(|&v| gl.big_f(v).unwrap()).sum::<f64>() * m.cell_area();
        assert!(e >= bulk);
    }

    #[test]
    fn energy_matches_refined_mesh() {
        // Refined-mesh evaluation of the same functional serves as the oracle.
        let gl = Potential::ginzburg_landau();
        let g = |x: f64, y: f64| 0.5 * x.sin() * y.sin();
        let coarse = Field::from_fn(mesh(128), g).discrete_energy(0.1, &gl).unwrap();
        let fine = Field::from_fn(mesh(1024), g).discrete_energy(0.1, &gl).unwrap();
        assert!(((coarse - fine) / fine).abs() < 1e-3, "{coarse} vs {fine}");
    }

    #[test]
    fn csv_snapshot_round_trip() {
        let m = Mesh2D::new(2.0, 3.0, 5, 4).unwrap();
        let u = Field::from_fn(m, |x, y| (x * 0.1).exp() - y / 3.0 + 1e-17);
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("u.csv");
        u.write_csv(&p).unwrap();
        let text = std::fs::read_to_string(&p).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("i,j,x,y,u"));
        assert!(lines.next().unwrap().starts_with("0,0,"));
        assert!(lines.next().unwrap().starts_with("1,0,"));
        assert_eq!(Field::read_csv(&p, m).unwrap(), u);
        assert!(Field::read_csv(&p, Mesh2D::new(2.0, 3.0, 4, 4).unwrap()).is_err());
    }

    #[test]
    fn pairwise_sum_matches_naive_on_integers() {
        let xs: Vec<f64> = (0..1000).map(|k| k as f64).collect();
        assert_eq!(pairwise_sum(&xs), 499500.0);
        assert_eq!(pairwise_sum(&[]), 0.0);
    }
}
