//! Shared workloads for the criterion benchmarks in `benches/`.

use std::sync::Arc;

use etdrk_core::{Field, Mesh2D, NodeKind, Potential, SchemeSpec, SpectralPlan, StepContext};

/// A smooth field with features at several scales, bounded by 0.9.
pub fn smooth_field(mesh: Mesh2D) -> Field {
    Field::from_fn(mesh, |x, y| 0.5 * x.sin() * y.sin() + 0.4 * (3.0 * x).cos() * (5.0 * y).cos())
}

/// Ginzburg-Landau stepper with `eps = 0.1`, `kappa = 2` on an `n x n` grid of `[0, 2 pi]^2`.
pub fn gl_context(n: usize, order: usize, tau: f64, rescaled: bool) -> StepContext {
    let mesh = Mesh2D::square_2pi(n).expect("valid mesh");
    let plan = Arc::new(SpectralPlan::new(mesh, 0.1, 2.0).expect("valid plan"));
    let scheme = Arc::new(SchemeSpec::new(order, NodeKind::Uniform).expect("valid order"));
    StepContext::new(plan, Potential::ginzburg_landau(), scheme, tau, rescaled).expect("valid context")
}

/// Flory-Huggins stepper with the default parameters and minimal stabilizer.
pub fn fh_context(n: usize, order: usize, tau: f64) -> StepContext {
    let mesh = Mesh2D::square_2pi(n).expect("valid mesh");
    let pot = Potential::flory_huggins(0.8, 1.6).expect("valid potential");
    let plan = Arc::new(SpectralPlan::new(mesh, 0.1, pot.kappa_min()).expect("valid plan"));
    let scheme = Arc::new(SchemeSpec::new(order, NodeKind::Uniform).expect("valid order"));
    StepContext::new(plan, pot, scheme, tau, true).expect("valid context")
}
