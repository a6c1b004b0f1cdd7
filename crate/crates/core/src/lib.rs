//! Structure-preserving exponential time differencing Runge-Kutta (ETDRK)
//! integrators for the Allen-Cahn equation
//! `u_t = eps^2 Lap u + f(u)` on a rectangle with homogeneous Neumann
//! boundary conditions.
//!
//! The building blocks, bottom up:
//!
//! - [`grid`]: cell-centered meshes, fields, norms and the discrete energy.
//! - [`phi`]: stable scalar phi-functions for non-positive arguments.
//! - [`spectral`]: exact application of `e^{sL}` and `phi_j(sL)` for the
//!   stabilized Neumann operator via 2D cosine transforms.
//! - [`potential`]: Ginzburg-Landau and Flory-Huggins nonlinearities.
//! - [`scheme`]: interpolation nodes, Vandermonde systems, step-size bounds.
//! - [`stepper`]: the ETDRK(r) cascade, optionally with rescaling.
//! - [`diagnostics`]: energy / maximum-norm monitoring and CSV output.

pub mod diagnostics;
pub mod error;
pub mod grid;
pub mod phi;
pub mod poly;
pub mod potential;
pub mod scheme;
pub mod spectral;
pub mod stepper;

pub use diagnostics::{RunReport, RunSummary, StepDiagnostics};
pub use error::{Error, Result};
pub use grid::{Field, Mesh2D};
pub use phi::{phi, phi_batch, PhiTable};
pub use poly::polynomial_abs_max;
pub use potential::{Potential, PotentialKind, Reaction};
pub use scheme::{make_nodes, sigma_min, tau_max, BoundVariant, NodeKind, NodeSet, SchemeSpec, Vandermonde};
pub use spectral::{SpectralField, SpectralPlan};
pub use stepper::{rescale_factor, StagePolynomial, StepContext, StepOutcome};
