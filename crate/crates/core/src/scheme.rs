//! Interpolation nodes, Vandermonde systems and step-size bounds.
//!
//! An ETDRK scheme of order `r` is built as a cascade: level `j` (for
//! `j = 1..r-1`) interpolates the nonlinearity at the nodes
//! `0 = a_{j,0} < a_{j,1} < ... < a_{j,j} <= 1`. The polynomial coefficients
//! come from the `j x j` Vandermonde system `V_j c = d` with
//! `V_j[i][m] = a_{j,i}^m`, `i, m = 1..j` (node 0 is absorbed in the constant
//! term).

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Largest supported scheme order; keeps every per-point buffer on the stack.
pub const MAX_ORDER: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NodeKind {
    /// `a_{r,k} = k / r`.
    Uniform,
    /// Chebyshev-Gauss-Lobatto points mapped to `[0, 1]`:
    /// `a_{r,k} = (1 - cos(k pi / r)) / 2`.
    ChebyshevLobatto,
}

impl fmt::Display for NodeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NodeKind::Uniform => "uniform",
            NodeKind::ChebyshevLobatto => "chebyshev",
        })
    }
}

impl FromStr for NodeKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(NodeKind::Uniform),
            "chebyshev" | "chebyshev-lobatto" => Ok(NodeKind::ChebyshevLobatto),
            other => Err(Error::InvalidParameter(format!("unknown node kind {other:?}"))),
        }
    }
}

/// The `r + 1` interpolation nodes of one cascade level.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeSet {
    kind: NodeKind,
    nodes: Vec<f64>,
}

impl NodeSet {
    pub fn degree(&self) -> usize {
        self.nodes.len() - 1
    }
    pub fn kind(&self) -> NodeKind {
        self.kind
    }
    /// All nodes, `a_{r,0} = 0` first.
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }
    /// Nodes `a_{r,1..=r}`, the ones that enter the Vandermonde matrix.
    pub fn interior(&self) -> &[f64] {
        &self.nodes[1..]
    }
}

pub fn make_nodes(r: usize, kind: NodeKind) -> NodeSet {
    let nodes = if r == 0 {
        vec![0.0]
    } else {
        (0..=r)
            .map(|k| match kind {
                NodeKind::Uniform => k as f64 / r as f64,
                NodeKind::ChebyshevLobatto => {
                    0.5 * (1.0 - (k as f64 * std::f64::consts::PI / r as f64).cos())
                }
            })
            .collect()
    };
    NodeSet { kind, nodes }
}

/// `V_r` together with an LU factorization whose triangular solves can be
/// broadcast over every grid point.
#[derive(Debug, Clone)]
pub struct Vandermonde {
    matrix: DMatrix<f64>,
    perm: Vec<usize>,
    lower: DMatrix<f64>,
    upper: DMatrix<f64>,
}

impl Vandermonde {
    pub fn new(nodes: &NodeSet) -> Result<Self> {
        let r = nodes.degree();
        if r < 1 {
            return Err(Error::InvalidParameter("Vandermonde system needs r >= 1".into()));
        }
        if r > MAX_ORDER {
            return Err(Error::InvalidParameter(format!("order {r} exceeds {MAX_ORDER}")));
        }
        let a = nodes.interior();
        let matrix = DMatrix::from_fn(r, r, |i, m| a[i].powi(m as i32 + 1));
        let lu = matrix.clone().lu();
        let upper = lu.u();
        let scale = matrix.amax();
        if (0..r).any(|i| upper[(i, i)].is_nan() || upper[(i, i)].abs() <= 1e-14 * scale) {
            return Err(Error::SingularMatrix { order: r });
        }
        // Recover the row permutation as an index map: row i of P*V is row perm[i] of V.
        let mut idx = DVector::from_fn(r, |i, _| i as f64);
        lu.p().permute_rows(&mut idx);
        let perm = idx.iter().map(|&x| x as usize).collect();
        Ok(Self { lower: lu.l(), upper, perm, matrix })
    }

    pub fn order(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// Solves `V c = d` in place (`x` holds `d` on entry, `c` on exit).
    #[inline]
    pub fn solve_in_place(&self, x: &mut [f64]) {
        let r = self.order();
        debug_assert_eq!(x.len(), r);
        let mut y = [0.0; MAX_ORDER];
        for i in 0..r {
            let mut acc = x[self.perm[i]];
            for (k, yk) in y.iter().enumerate().take(i) {
                acc -= self.lower[(i, k)] * yk;
            }
            y[i] = acc;
        }
        for i in (0..r).rev() {
            let mut acc = y[i];
            for (k, xk) in x.iter().enumerate().take(r).skip(i + 1) {
                acc -= self.upper[(i, k)] * xk;
            }
            x[i] = acc / self.upper[(i, i)];
        }
    }

    pub fn solve(&self, d: &[f64]) -> Vec<f64> {
        let mut x = d.to_vec();
        self.solve_in_place(&mut x);
        x
    }

    /// Pointwise solve: `rhs[k][p]` is entry `k` of the right-hand side at
    /// grid point `p`. Returns coefficients in the same layout.
    pub fn solve_fields(&self, rhs: &[Vec<f64>]) -> Vec<Vec<f64>> {
        let r = self.order();
        assert_eq!(rhs.len(), r);
        let npts = rhs[0].len();
        let mut out = vec![vec![0.0; npts]; r];
        let mut x = [0.0; MAX_ORDER];
        for p in 0..npts {
            for k in 0..r {
                x[k] = rhs[k][p];
            }
            self.solve_in_place(&mut x[..r]);
            for k in 0..r {
                out[k][p] = x[k];
            }
        }
        out
    }

    pub fn sigma_min(&self) -> f64 {
        sigma_min(&self.matrix)
    }
}

/// Smallest singular value.
pub fn sigma_min(m: &DMatrix<f64>) -> f64 {
    m.clone()
        .singular_values()
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

/// Which energy-dissipation bound to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundVariant {
    /// Plain ETDRK, factor `1 / (4 kappa)`.
    Standard,
    /// ETDRK with polynomial rescaling, factor `1 / (10 kappa)`.
    Rescaled,
}

impl BoundVariant {
    pub fn from_rescaled(rescaled: bool) -> Self {
        if rescaled {
            BoundVariant::Rescaled
        } else {
            BoundVariant::Standard
        }
    }

    fn denominator(self) -> f64 {
        match self {
            BoundVariant::Standard => 4.0,
            BoundVariant::Rescaled => 10.0,
        }
    }
}

impl fmt::Display for BoundVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BoundVariant::Standard => "standard",
            BoundVariant::Rescaled => "rescaled",
        })
    }
}

/// Step size below which the order-`r` scheme provably dissipates the
/// original energy: `+inf` for `r = 1`, otherwise
/// `min_{k<r} sigma_min(V_k) / k / (c kappa)` with `c = 4` or `10`.
pub fn tau_max(r: usize, kappa: f64, kind: NodeKind, variant: BoundVariant) -> Result<f64> {
    if r < 1 {
        return Err(Error::InvalidParameter("scheme order must be >= 1".into()));
    }
    if kappa.is_nan() || kappa <= 0.0 {
        return Err(Error::InvalidParameter(format!("kappa must be positive, got {kappa}")));
    }
    let mut best = f64::INFINITY;
    for k in 1..r {
        let v = Vandermonde::new(&make_nodes(k, kind))?;
        best = best.min(v.sigma_min() / k as f64);
    }
    Ok(best / (variant.denominator() * kappa))
}

/// Everything about an order-`r` scheme that does not depend on the grid.
#[derive(Debug, Clone)]
pub struct SchemeSpec {
    order: usize,
    kind: NodeKind,
    levels: Vec<(NodeSet, Vandermonde)>,
}

impl SchemeSpec {
    pub fn new(order: usize, kind: NodeKind) -> Result<Self> {
        if !(1..=MAX_ORDER).contains(&order) {
            return Err(Error::InvalidParameter(format!("scheme order must be in 1..={MAX_ORDER}, got {order}")));
        }
        let levels = (1..order)
            .map(|j| {
                let nodes = make_nodes(j, kind);
                Vandermonde::new(&nodes).map(|v| (nodes, v))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { order, kind, levels })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn kind(&self) -> NodeKind {
        self.kind
    }

    /// Nodes of cascade level `j`, `1 <= j < order`.
    pub fn nodes(&self, j: usize) -> &NodeSet {
        &self.levels[j - 1].0
    }

    pub fn vandermonde(&self, j: usize) -> &Vandermonde {
        &self.levels[j - 1].1
    }

    /// `sigma_min(V_j)` for `j = 1..order-1`.
    pub fn sigma_mins(&self) -> Vec<f64> {
        self.levels.iter().map(|(_, v)| v.sigma_min()).collect()
    }

    pub fn tau_max(&self, kappa: f64, variant: BoundVariant) -> Result<f64> {
        tau_max(self.order, kappa, self.kind, variant)
    }
}
