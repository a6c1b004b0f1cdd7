//! Integration of one trajectory from `t = 0` to `t_end`.

use etdrk_core::diagnostics::Monitor;
use etdrk_core::{Field, RunReport, StepContext};

use crate::config::{Nodes, Setup};
use crate::error::{CliError, Result};

/// Number of steps and the size of the last one. The last step is shortened
/// so the run lands exactly on `t_end`; a ratio within `1e-9` of an integer
/// counts as that integer.
pub fn step_schedule(tau: f64, t_end: f64) -> (usize, f64) {
    if t_end <= 0.0 {
        return (0, tau);
    }
    let ratio = t_end / tau;
    let nearest = ratio.round();
    let n = if nearest >= 1.0 && (ratio - nearest).abs() <= 1e-9 * nearest {
        nearest
    } else {
        ratio.ceil()
    };
    let n = n as usize;
    let last = t_end - (n - 1) as f64 * tau;
    (n, last)
}

#[derive(Debug, Clone, Copy)]
pub struct Scheme {
    pub order: usize,
    pub nodes: Nodes,
    pub rescaled: bool,
}

/// Result of a trajectory. `failure` holds the error that stopped it early;
/// the report and field then describe the last completed step.
#[derive(Debug)]
pub struct Trajectory {
    pub report: RunReport,
    pub field: Field,
    pub failure: Option<CliError>,
}

impl Trajectory {
    pub fn into_result(self) -> Result<(Field, RunReport)> {
        match self.failure {
            None => Ok((self.field, self.report)),
            Some(e) => Err(e),
        }
    }
}

struct Contexts {
    main: StepContext,
    last: Option<StepContext>,
    steps: usize,
    tau: f64,
    t_end: f64,
}

impl Contexts {
    fn new(setup: &Setup, scheme: Scheme, tau: f64, t_end: f64) -> Result<Self> {
        let (steps, last_tau) = step_schedule(tau, t_end);
        let main = setup.context(scheme.order, scheme.nodes, tau, scheme.rescaled)?;
        let last = if (last_tau - tau).abs() > 1e-12 * tau {
            Some(setup.context(scheme.order, scheme.nodes, last_tau, scheme.rescaled)?)
        } else {
            None
        };
        Ok(Self { main, last, steps, tau, t_end })
    }

    fn for_step(&self, n: usize) -> (&StepContext, f64) {
        if n == self.steps {
            (self.last.as_ref().unwrap_or(&self.main), self.t_end)
        } else {
            (&self.main, n as f64 * self.tau)
        }
    }
}

/// Integrates with diagnostics recorded at every time level.
pub fn integrate(setup: &Setup, scheme: Scheme, tau: f64, t_end: f64, u0: Field, config_echo: String) -> Result<Trajectory> {
    let ctxs = Contexts::new(setup, scheme, tau, t_end)?;
    let monitor = Monitor::new(setup.eps, setup.potential);
    let mut report = RunReport::new(config_echo);
    report.push(monitor.record(0, 0.0, &u0, 1.0, None)?);
    let mut u = u0;
    for n in 1..=ctxs.steps {
        let (ctx, t) = ctxs.for_step(n);
        let out = match ctx.step(&u) {
            Ok(out) => out,
            Err(source) => {
                let failure = Some(CliError::Numerical { step: n, source });
                return Ok(Trajectory { report, field: u, failure });
            }
        };
        let prev = report.last_energy();
        report.push(monitor.record(n, t, &out.u, out.alpha_min, prev)?);
        u = out.u;
    }
    Ok(Trajectory { report, field: u, failure: None })
}

/// Integrates without diagnostics and returns the final field.
pub fn integrate_field(setup: &Setup, scheme: Scheme, tau: f64, t_end: f64, u0: Field) -> Result<Field> {
    let ctxs = Contexts::new(setup, scheme, tau, t_end)?;
    let mut u = u0;
    for n in 1..=ctxs.steps {
        let (ctx, _) = ctxs.for_step(n);
        u = ctx.step(&u).map_err(|source| CliError::Numerical { step: n, source })?.u;
    }
    Ok(u)
}
