//! The subcommands: plain runs, temporal convergence studies, the maximum
//! bound and energy experiments, and the Vandermonde tables.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use etdrk_core::grid::fmt_g17;
use etdrk_core::{make_nodes, tau_max, BoundVariant, Field, NodeKind, RunReport, Vandermonde};

use crate::config::{InitialCondition, Nodes, PotentialSpec, RunConfig, Setup};
use crate::error::{CliError, Result};
use crate::init::initial_field;
use crate::simulate::{integrate, integrate_field, Scheme};

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| CliError::Config(format!("cannot create {}: {e}", dir.display())))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display())))
}

fn scheme_of(cfg: &RunConfig) -> Scheme {
    Scheme { order: cfg.order, nodes: cfg.nodes, rescaled: cfg.rescaled }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_g17).unwrap_or_default()
}

/// Integrates `cfg` and writes `diagnostics.csv`, `final_field.csv` and
/// `config.json` into `cfg.out`. On a numerical failure the diagnostics up
/// to the failing step are still written.
pub fn cmd_run(cfg: &RunConfig) -> Result<RunReport> {
    let setup = cfg.setup()?;
    let u0 = initial_field(&cfg.initial, setup.mesh, setup.potential.beta())?;
    create_dir(&cfg.out)?;
    write_text(&cfg.out.join("config.json"), &cfg.to_json())?;
    let traj = integrate(&setup, scheme_of(cfg), cfg.tau, cfg.t_end, u0, cfg.to_json())?;
    traj.report.write_csv(cfg.out.join("diagnostics.csv"))?;
    if traj.failure.is_none() {
        traj.field.write_csv(cfg.out.join("final_field.csv"))?;
    }
    Ok(traj.into_result()?.1)
}

/// How the reference solution of a convergence study is produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Reference {
    /// Same scheme with the finest step divided by the given factor.
    SelfFiner(usize),
    /// Scheme of one order higher at the finest step divided by 8.
    OrderUp,
}

impl Default for Reference {
    fn default() -> Self {
        Reference::SelfFiner(8)
    }
}

impl FromStr for Reference {
    type Err = CliError;
    fn from_str(s: &str) -> Result<Self> {
        let bad = || CliError::Config(format!("unknown reference {s:?}; use self-finer[:k] or order-up"));
        match s {
            "order-up" => Ok(Reference::OrderUp),
            "self-finer" => Ok(Reference::SelfFiner(8)),
            _ => {
                let k = s.strip_prefix("self-finer:").ok_or_else(bad)?;
                match k.parse::<usize>() {
                    Ok(k) if k >= 1 => Ok(Reference::SelfFiner(k)),
                    _ => Err(bad()),
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceRow {
    pub tau: f64,
    pub linf: f64,
    pub l2: f64,
    pub rate_linf: Option<f64>,
    pub rate_l2: Option<f64>,
}

pub const CONVERGENCE_HEADER: &str = "tau,linf_err,l2_err,rate_linf,rate_l2";

/// Step sizes `tau * 2^-k`, `k = 0..levels`.
pub fn halving_taus(tau: f64, levels: usize) -> Vec<f64> {
    (0..levels).map(|k| tau / (1u64 << k) as f64).collect()
}

/// Relative errors at `cfg.t_end` against a reference run, with observed
/// rates `log(e_prev / e) / log(tau_prev / tau)`.
pub fn cmd_converge(cfg: &RunConfig, taus: &[f64], reference: Reference) -> Result<Vec<ConvergenceRow>> {
    if taus.len() < 3 {
        return Err(CliError::Config(format!("a convergence study needs at least 3 step sizes, got {}", taus.len())));
    }
    let setup = cfg.setup()?;
    let u0 = initial_field(&cfg.initial, setup.mesh, setup.potential.beta())?;
    let scheme = scheme_of(cfg);
    let finest = taus.iter().copied().fold(f64::INFINITY, f64::min);
    let (ref_scheme, ref_tau) = match reference {
        Reference::SelfFiner(k) => (scheme, finest / k as f64),
        Reference::OrderUp => (Scheme { order: scheme.order + 1, ..scheme }, finest / 8.0),
    };
    let u_ref = integrate_field(&setup, ref_scheme, ref_tau, cfg.t_end, u0.clone())?;
    let (ref_inf, ref_l2) = (u_ref.max_norm(), u_ref.l2_norm());
    let mut rows: Vec<ConvergenceRow> = Vec::with_capacity(taus.len());
    for &tau in taus {
        let u = integrate_field(&setup, scheme, tau, cfg.t_end, u0.clone())?;
        let diff = u.lin_comb(1.0, &u_ref, -1.0)?;
        let (linf, l2) = (diff.max_norm() / ref_inf, diff.l2_norm() / ref_l2);
        let (rate_linf, rate_l2) = match rows.last() {
            None => (None, None),
            Some(p) => {
                let h = (p.tau / tau).ln();
                (Some((p.linf / linf).ln() / h), Some((p.l2 / l2).ln() / h))
            }
        };
        rows.push(ConvergenceRow { tau, linf, l2, rate_linf, rate_l2 });
    }
    Ok(rows)
}

pub fn convergence_csv(rows: &[ConvergenceRow]) -> String {
    let mut s = format!("{CONVERGENCE_HEADER}\n");
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{}",
            fmt_g17(r.tau),
            fmt_g17(r.linf),
            fmt_g17(r.l2),
            fmt_opt(r.rate_linf),
            fmt_opt(r.rate_l2)
        );
    }
    s
}

/// One series of the maximum bound experiment.
#[derive(Debug)]
pub struct MbpSeries {
    pub order: usize,
    pub rescaled: bool,
    pub report: RunReport,
    /// Why a standard-mode run stopped early, if it did.
    pub failure: Option<String>,
}

pub const MBP_ORDERS: [usize; 3] = [3, 5, 7];

fn variant_name(rescaled: bool) -> &'static str {
    if rescaled {
        "rescaled"
    } else {
        "standard"
    }
}

/// Standard and rescaled runs of orders 3, 5, 7 with the template's step,
/// horizon and initial data. Writes `mbp_r{r}_{variant}.csv` per series and
/// `mbp_summary.csv` into `cfg.out` unless `write` is false.
pub fn cmd_mbp_test(cfg: &RunConfig, write: bool) -> Result<Vec<MbpSeries>> {
    if !matches!(cfg.potential, PotentialSpec::Fh { .. }) {
        return Err(CliError::Config("mbp-test needs the Flory-Huggins potential (--potential fh)".into()));
    }
    let setup = cfg.setup()?;
    let u0 = initial_field(&cfg.initial, setup.mesh, setup.potential.beta())?;
    let mut out = Vec::new();
    for order in MBP_ORDERS {
        for rescaled in [false, true] {
            let scheme = Scheme { order, nodes: cfg.nodes, rescaled };
            let run_cfg = RunConfig { order, rescaled, ..cfg.clone() };
            let traj = integrate(&setup, scheme, cfg.tau, cfg.t_end, u0.clone(), run_cfg.to_json())?;
            let failure = match traj.failure {
                None => None,
                Some(e @ CliError::Numerical { .. }) if !rescaled => Some(e.to_string()),
                Some(e) => return Err(e),
            };
            out.push(MbpSeries { order, rescaled, report: traj.report, failure });
        }
    }
    if write {
        create_dir(&cfg.out)?;
        let mut summary = String::from("order,variant,steps_completed,max_norm,mbp_violations,failure\n");
        for s in &out {
            let name = format!("mbp_r{}_{}.csv", s.order, variant_name(s.rescaled));
            s.report.write_csv(cfg.out.join(name))?;
            let sm = s.report.summary();
            let _ = writeln!(
                summary,
                "{},{},{},{},{},{}",
                s.order,
                variant_name(s.rescaled),
                s.report.series.len() - 1,
                fmt_g17(sm.max_norm),
                sm.mbp_violations,
                s.failure.as_deref().unwrap_or("").replace(',', ";")
            );
        }
        write_text(&cfg.out.join("mbp_summary.csv"), &summary)?;
    }
    Ok(out)
}

pub const ENERGY_ORDERS: [usize; 4] = [3, 4, 5, 6];
pub const ENERGY_TAUS: [f64; 3] = [0.2, 0.1, 0.01];

#[derive(Debug)]
pub struct EnergySeries {
    pub order: usize,
    pub tau: f64,
    pub report: RunReport,
}

/// Rescaled runs over every `(order, tau)` pair of the energy experiment.
/// Writes `energy_r{r}_tau{tau}.csv` and `energy_summary.csv` unless `write`
/// is false.
pub fn cmd_energy_test(cfg: &RunConfig, write: bool) -> Result<Vec<EnergySeries>> {
    let setup = cfg.setup()?;
    let u0 = initial_field(&cfg.initial, setup.mesh, setup.potential.beta())?;
    let mut out = Vec::new();
    for order in ENERGY_ORDERS {
        for tau in ENERGY_TAUS {
            let scheme = Scheme { order, nodes: cfg.nodes, rescaled: true };
            let run_cfg = RunConfig { order, tau, rescaled: true, ..cfg.clone() };
            let (_, report) = integrate(&setup, scheme, tau, cfg.t_end, u0.clone(), run_cfg.to_json())?.into_result()?;
            out.push(EnergySeries { order, tau, report });
        }
    }
    if write {
        create_dir(&cfg.out)?;
        let mut summary = String::from("order,tau,steps,dissipation_violations,first_violation,final_energy\n");
        for s in &out {
            s.report.write_csv(cfg.out.join(format!("energy_r{}_tau{}.csv", s.order, s.tau)))?;
            let sm = s.report.summary();
            let _ = writeln!(
                summary,
                "{},{},{},{},{},{}",
                s.order,
                fmt_g17(s.tau),
                s.report.series.len() - 1,
                sm.dissipation_violations,
                sm.first_dissipation_violation.map(|n| n.to_string()).unwrap_or_default(),
                fmt_opt(sm.final_energy)
            );
        }
        write_text(&cfg.out.join("energy_summary.csv"), &summary)?;
    }
    Ok(out)
}

pub const TABLE_ORDERS: std::ops::RangeInclusive<usize> = 1..=10;

/// `r,kind,sigma_min` for both node families.
pub fn sigma_table() -> Result<String> {
    let mut s = String::from("r,kind,sigma_min\n");
    for kind in [NodeKind::Uniform, NodeKind::ChebyshevLobatto] {
        for r in TABLE_ORDERS {
            let v = Vandermonde::new(&make_nodes(r, kind))?.sigma_min();
            let _ = writeln!(s, "{r},{},{}", Nodes::from(kind), fmt_g17(v));
        }
    }
    Ok(s)
}

/// `r,kappa,variant,tau_max` on uniform nodes for both bound variants.
pub fn tau_table(kappa: f64) -> Result<String> {
    let mut s = String::from("r,kappa,variant,tau_max\n");
    for variant in [BoundVariant::Standard, BoundVariant::Rescaled] {
        for r in TABLE_ORDERS {
            let t = tau_max(r, kappa, NodeKind::Uniform, variant)?;
            let _ = writeln!(s, "{r},{},{variant},{}", fmt_g17(kappa), fmt_g17(t));
        }
    }
    Ok(s)
}

impl From<NodeKind> for Nodes {
    fn from(k: NodeKind) -> Self {
        match k {
            NodeKind::Uniform => Nodes::Uniform,
            NodeKind::ChebyshevLobatto => Nodes::Chebyshev,
        }
    }
}

impl std::fmt::Display for Nodes {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Nodes::Uniform => "uniform",
            Nodes::Chebyshev => "chebyshev",
        })
    }
}

/// Writes `table_sigma_min.csv` and `table_tau_max.csv`; returns their paths.
pub fn cmd_tables(kappa: f64, out: &Path) -> Result<(PathBuf, PathBuf)> {
    create_dir(out)?;
    let (a, b) = (out.join("table_sigma_min.csv"), out.join("table_tau_max.csv"));
    write_text(&a, &sigma_table()?)?;
    write_text(&b, &tau_table(kappa)?)?;
    Ok((a, b))
}

/// Template for the maximum bound experiment: Flory-Huggins, random data,
/// `tau = 1`, 100 steps.
pub fn mbp_template() -> RunConfig {
    RunConfig {
        potential: PotentialSpec::fh_default(),
        initial: InitialCondition::Random { seed: 42, fraction: 1.0 },
        tau: 1.0,
        t_end: 100.0,
        ..RunConfig::default()
    }
}

/// Template for the energy experiment: Flory-Huggins, `0.5 sin x sin y`, `T = 20`.
pub fn energy_template() -> RunConfig {
    RunConfig { potential: PotentialSpec::fh_default(), t_end: 20.0, ..RunConfig::default() }
}

/// Template for convergence studies: Ginzburg-Landau, `0.5 sin x sin y`,
/// `T = 2`, coarsest step 0.1.
pub fn converge_template() -> RunConfig {
    RunConfig { tau: 0.1, ..RunConfig::default() }
}

/// Convenience for tests and callers holding a field already.
pub fn run_from_field(setup: &Setup, cfg: &RunConfig, u0: Field) -> Result<(Field, RunReport)> {
    integrate(setup, scheme_of(cfg), cfg.tau, cfg.t_end, u0, cfg.to_json())?.into_result()
}
