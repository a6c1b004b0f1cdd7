//! Initial data.
//!
//! Random fields come from PCG32 (`rand_pcg::Pcg32`, 64-bit state, XSH-RR
//! output) seeded through `SeedableRng::seed_from_u64`, drawn in storage order
//! `i + nx * j` and mapped uniformly onto `(-a + 1e-12, a - 1e-12)` with
//! `a = fraction * beta`.

use etdrk_core::{Field, Mesh2D};
use rand::{RngExt, SeedableRng};
use rand_pcg::Pcg32;

use crate::config::InitialCondition;
use crate::error::{CliError, Result};

/// Gap kept between random values and `+-beta`.
pub const RANDOM_MARGIN: f64 = 1e-12;

pub fn random_field(mesh: Mesh2D, seed: u64, amplitude: f64) -> Field {
    let mut rng = Pcg32::seed_from_u64(seed);
    let hi = amplitude - RANDOM_MARGIN;
    let values = (0..mesh.len()).map(|_| rng.random_range(-hi..hi)).collect();
    Field::new(mesh, values).expect("random values are finite")
}

pub fn initial_field(ic: &InitialCondition, mesh: Mesh2D, beta: f64) -> Result<Field> {
    match ic {
        InitialCondition::Sinprod { amplitude } => Ok(Field::from_fn(mesh, |x, y| amplitude * x.sin() * y.sin())),
        InitialCondition::Random { seed, fraction } => Ok(random_field(mesh, *seed, fraction * beta)),
        InitialCondition::Csv { path } => Field::read_csv(path, mesh).map_err(|e| CliError::Config(e.to_string())),
    }
}
