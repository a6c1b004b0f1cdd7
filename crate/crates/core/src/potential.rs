//! Double-well nonlinearities: Ginzburg-Landau and Flory-Huggins.
//!
//! Sign convention: the PDE is `u_t = eps^2 Lap u + f(u)` with `f = -F'`.

use crate::error::{Error, Result};

/// The nonlinear reaction term `f(u)` as seen by the time stepper.
///
/// [`Potential`] is the production implementation; other implementations
/// exist to drive the stepper with synthetic reactions in tests.
pub trait Reaction: Sync {
    fn f(&self, u: f64) -> Result<f64>;
    /// Maximum bound: solutions starting in `[-beta, beta]` stay there.
    fn beta(&self) -> f64;
    /// Smallest admissible stabilizer, `max_{|xi| <= beta} |f'(xi)|`.
    fn kappa_min(&self) -> f64;
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PotentialKind {
    GinzburgLandau,
    FloryHuggins { theta: f64, theta_c: f64 },
}

/// A potential together with its maximum bound and minimal stabilizer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Potential {
    kind: PotentialKind,
    beta: f64,
    kappa_min: f64,
}

impl Potential {
    pub fn ginzburg_landau() -> Self {
        Self::new(PotentialKind::GinzburgLandau).expect("GL parameters are always valid")
    }

    pub fn flory_huggins(theta: f64, theta_c: f64) -> Result<Self> {
        Self::new(PotentialKind::FloryHuggins { theta, theta_c })
    }

    pub fn new(kind: PotentialKind) -> Result<Self> {
        if let PotentialKind::FloryHuggins { theta, theta_c } = kind {
            if !(theta > 0.0 && theta < theta_c && theta_c.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "Flory-Huggins needs 0 < theta < theta_c, got theta={theta}, theta_c={theta_c}"
                )));
            }
        }
        let beta = compute_beta(kind)?;
        let kappa_min = compute_kappa_min(kind, beta);
        Ok(Self { kind, beta, kappa_min })
    }

    pub fn kind(&self) -> PotentialKind {
        self.kind
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn kappa_min(&self) -> f64 {
        self.kappa_min
    }

    /// Reaction term `f(u)`.
    pub fn f(&self, u: f64) -> Result<f64> {
        match self.kind {
            PotentialKind::GinzburgLandau => Ok(u - u * u * u),
            PotentialKind::FloryHuggins { theta, theta_c } => {
                check_fh_domain(u)?;
                Ok(fh_f(theta, theta_c, u))
            }
        }
    }

    /// Potential `F(u)`.
    pub fn big_f(&self, u: f64) -> Result<f64> {
        match self.kind {
            PotentialKind::GinzburgLandau => {
                let s = 1.0 - u * u;
                Ok(0.25 * s * s)
            }
            PotentialKind::FloryHuggins { theta, theta_c } => {
                check_fh_domain(u)?;
                let mix = (1.0 + u) * u.ln_1p() + (1.0 - u) * (-u).ln_1p();
                Ok(0.5 * theta * mix - 0.5 * theta_c * u * u)
            }
        }
    }

    /// Derivative `f'(u)`.
    pub fn f_prime(&self, u: f64) -> Result<f64> {
        match self.kind {
            PotentialKind::GinzburgLandau => Ok(1.0 - 3.0 * u * u),
            PotentialKind::FloryHuggins { theta, theta_c } => {
                check_fh_domain(u)?;
                Ok(fh_f_prime(theta, theta_c, u))
            }
        }
    }
}

impl Reaction for Potential {
    fn f(&self, u: f64) -> Result<f64> {
        Potential::f(self, u)
    }
    fn beta(&self) -> f64 {
        self.beta
    }
    fn kappa_min(&self) -> f64 {
        self.kappa_min
    }
}

fn check_fh_domain(u: f64) -> Result<()> {
    if u.abs() < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain { value: u })
    }
}

fn fh_f(theta: f64, theta_c: f64, u: f64) -> f64 {
    // ln((1-u)/(1+u)) written with ln_1p to keep accuracy near u = 0.
    0.5 * theta * ((-u).ln_1p() - u.ln_1p()) + theta_c * u
}

fn fh_f_prime(theta: f64, theta_c: f64, u: f64) -> f64 {
    -theta / (1.0 - u * u) + theta_c
}

/// Maximum bound: 1 for Ginzburg-Landau, the positive root of `f` for
/// Flory-Huggins (bisection on `[1e-12, 1 - 1e-12]` to 1e-10, then three
/// Newton steps).
pub fn compute_beta(kind: PotentialKind) -> Result<f64> {
    let (theta, theta_c) = match kind {
        PotentialKind::GinzburgLandau => return Ok(1.0),
        PotentialKind::FloryHuggins { theta, theta_c } => (theta, theta_c),
    };
    let f = |u: f64| fh_f(theta, theta_c, u);
    let (mut lo, mut hi) = (1e-12, 1.0 - 1e-12);
    let (flo, fhi) = (f(lo), f(hi));
    if !(flo > 0.0 && fhi < 0.0) {
        return Err(Error::NoBracket { lo, hi });
    }
    while hi - lo > 1e-10 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut u = 0.5 * (lo + hi);
    for _ in 0..3 {
        let step = f(u) / fh_f_prime(theta, theta_c, u);
        if step.is_finite() {
            u -= step;
        }
    }
    Ok(u)
}

/// `max_{|xi| <= beta} |f'(xi)|`.
///
/// For both potentials `f'` is even and monotone in `|xi|`, so the maximum is
/// attained either at `xi = 0` or at `xi = beta`.
pub fn compute_kappa_min(kind: PotentialKind, beta: f64) -> f64 {
    match kind {
        PotentialKind::GinzburgLandau => (1.0f64).max((1.0 - 3.0 * beta * beta).abs()),
        PotentialKind::FloryHuggins { theta, theta_c } => fh_f_prime(theta, theta_c, 0.0)
            .abs()
            .max(fh_f_prime(theta, theta_c, beta).abs()),
    }
}
