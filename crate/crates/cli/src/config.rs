//! Run configuration: JSON file format, defaults and validation.

use std::f64::consts::TAU;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use etdrk_core::scheme::MAX_ORDER;
use etdrk_core::{Mesh2D, NodeKind, Potential, PotentialKind, SchemeSpec, SpectralPlan, StepContext};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum PotentialSpec {
    Gl,
    Fh {
        #[serde(default = "default_theta")]
        theta: f64,
        #[serde(default = "default_theta_c")]
        theta_c: f64,
    },
}

fn default_theta() -> f64 {
    0.8
}
fn default_theta_c() -> f64 {
    1.6
}

impl PotentialSpec {
    pub fn fh_default() -> Self {
        PotentialSpec::Fh { theta: default_theta(), theta_c: default_theta_c() }
    }

    pub fn build(&self) -> Result<Potential> {
        let kind = match *self {
            PotentialSpec::Gl => PotentialKind::GinzburgLandau,
            PotentialSpec::Fh { theta, theta_c } => PotentialKind::FloryHuggins { theta, theta_c },
        };
        Potential::new(kind).map_err(|e| CliError::Config(e.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Nodes {
    Uniform,
    Chebyshev,
}

impl From<Nodes> for NodeKind {
    fn from(n: Nodes) -> Self {
        match n {
            Nodes::Uniform => NodeKind::Uniform,
            Nodes::Chebyshev => NodeKind::ChebyshevLobatto,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialCondition {
    /// `amplitude * sin(x) * sin(y)`.
    Sinprod { amplitude: f64 },
    /// Uniform values in `(-fraction * beta, fraction * beta)` from a seeded PCG32 stream.
    Random {
        seed: u64,
        #[serde(default = "default_fraction")]
        fraction: f64,
    },
    /// A field snapshot in the `i,j,x,y,u` format.
    Csv { path: PathBuf },
}

fn default_fraction() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub lx: f64,
    pub ly: f64,
    pub nx: usize,
    pub ny: usize,
    pub eps: f64,
    pub potential: PotentialSpec,
    /// Stabilizer; the potential's minimal admissible value when absent.
    pub kappa: Option<f64>,
    pub order: usize,
    pub nodes: Nodes,
    pub rescaled: bool,
    pub tau: f64,
    pub t_end: f64,
    pub initial: InitialCondition,
    pub out: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            lx: TAU,
            ly: TAU,
            nx: 128,
            ny: 128,
            eps: 0.1,
            potential: PotentialSpec::Gl,
            kappa: None,
            order: 3,
            nodes: Nodes::Uniform,
            rescaled: true,
            tau: 0.01,
            t_end: 2.0,
            initial: InitialCondition::Sinprod { amplitude: 0.5 },
            out: PathBuf::from("out"),
        }
    }
}

/// Grid size used by `--paper-scale`.
pub const LARGE_GRID: usize = 512;

/// Objects built from a validated configuration and shared by every run of a study.
#[derive(Debug, Clone)]
pub struct Setup {
    pub mesh: Mesh2D,
    pub eps: f64,
    pub potential: Potential,
    pub kappa: f64,
    pub plan: Arc<SpectralPlan>,
}

impl Setup {
    pub fn context(&self, order: usize, nodes: Nodes, tau: f64, rescaled: bool) -> Result<StepContext> {
        let scheme = Arc::new(SchemeSpec::new(order, nodes.into()).map_err(|e| CliError::Config(e.to_string()))?);
        StepContext::new(self.plan.clone(), self.potential, scheme, tau, rescaled).map_err(|e| CliError::Config(e.to_string()))
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Overlays the top-level keys present in `text` on `self`. Nested
    /// objects (`potential`, `initial`) are replaced as a whole.
    pub fn merge_json(&self, text: &str) -> Result<Self> {
        let bad = |e: serde_json::Error| CliError::Config(e.to_string());
        let patch: serde_json::Value = serde_json::from_str(text).map_err(bad)?;
        let serde_json::Value::Object(patch) = patch else {
            return Err(CliError::Config("config file must hold a JSON object".into()));
        };
        let mut base = serde_json::to_value(self).map_err(bad)?;
        let obj = base.as_object_mut().expect("config serializes to an object");
        for (k, v) in patch {
            obj.insert(k, v);
        }
        serde_json::from_value(base).map_err(bad)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config is always serializable")
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(CliError::Config(msg));
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            return bad(format!("tau must be positive, got {}", self.tau));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return bad(format!("t_end must be nonnegative, got {}", self.t_end));
        }
        if !(self.eps > 0.0 && self.eps.is_finite()) {
            return bad(format!("eps must be positive, got {}", self.eps));
        }
        if self.order == 0 || self.order > MAX_ORDER {
            return bad(format!("order must lie in 1..={MAX_ORDER}, got {}", self.order));
        }
        match &self.initial {
            InitialCondition::Sinprod { amplitude } if !amplitude.is_finite() => {
                return bad(format!("amplitude must be finite, got {amplitude}"));
            }
            InitialCondition::Random { fraction, .. } if !(*fraction > 0.0 && *fraction <= 1.0) => {
                return bad(format!("random fraction must lie in (0, 1], got {fraction}"));
            }
            _ => {}
        }
        Ok(())
    }

    pub fn setup(&self) -> Result<Setup> {
        self.validate()?;
        let mesh = Mesh2D::new(self.lx, self.ly, self.nx, self.ny).map_err(|e| CliError::Config(e.to_string()))?;
        let potential = self.potential.build()?;
        let kappa = match self.kappa {
            None => potential.kappa_min(),
            Some(k) if k >= potential.kappa_min() * (1.0 - 1e-14) => k,
            Some(k) => {
                return Err(CliError::Config(format!(
                    "kappa = {k} is below the minimal stabilizer {} of this potential",
                    potential.kappa_min()
                )))
            }
        };
        let plan = Arc::new(SpectralPlan::new(mesh, self.eps, kappa).map_err(|e| CliError::Config(e.to_string()))?);
        Ok(Setup { mesh, eps: self.eps, potential, kappa, plan })
    }
}
