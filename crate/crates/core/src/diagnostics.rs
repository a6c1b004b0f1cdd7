//! Energy and maximum-bound monitoring along a trajectory.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::grid::{fmt_g17, Field};
use crate::potential::Potential;

/// Slack on the bound check `max|u| <= beta`.
pub const MBP_TOL: f64 = 1e-12;

pub const CSV_HEADER: &str = "n,t,energy,max_norm,alpha_min,dissipation_ok,mbp_ok";

/// Allowed energy increase `1e-10 * (1 + |E_prev|)` before a step counts
/// as non-dissipative.
pub fn dissipation_tolerance(prev_energy: f64) -> f64 {
    1e-10 * (1.0 + prev_energy.abs())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepDiagnostics {
    pub n: usize,
    pub t: f64,
    /// Discrete energy; `+inf` when the state left the potential's domain.
    pub energy: f64,
    pub max_norm: f64,
    pub alpha_min: f64,
    pub dissipation_ok: bool,
    pub mbp_ok: bool,
}

/// Computes per-step diagnostics for one trajectory.
#[derive(Debug, Clone, Copy)]
pub struct Monitor {
    eps: f64,
    potential: Potential,
}

impl Monitor {
    pub fn new(eps: f64, potential: Potential) -> Self {
        Self { eps, potential }
    }

    /// `prev_energy` is `None` for the initial state, where dissipation holds
    /// vacuously.
    pub fn record(&self, n: usize, t: f64, u: &Field, alpha_min: f64, prev_energy: Option<f64>) -> Result<StepDiagnostics> {
        let max_norm = u.max_norm();
        let energy = match u.discrete_energy(self.eps, &self.potential) {
            Ok(e) => e,
            Err(Error::Domain { .. }) => f64::INFINITY,
            Err(e) => return Err(e),
        };
        let dissipation_ok = match prev_energy {
            None => true,
            Some(prev) => energy.is_finite() && energy <= prev + dissipation_tolerance(prev),
        };
        let mbp_ok = energy.is_finite() && max_norm <= self.potential.beta() + MBP_TOL;
        Ok(StepDiagnostics { n, t, energy, max_norm, alpha_min, dissipation_ok, mbp_ok })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub first_dissipation_violation: Option<usize>,
    pub first_mbp_violation: Option<usize>,
    pub dissipation_violations: usize,
    pub mbp_violations: usize,
    pub final_energy: Option<f64>,
    pub max_norm: f64,
}

/// A whole run: the resolved configuration and one record per time level
/// (the initial state included).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunReport {
    pub config: String,
    pub series: Vec<StepDiagnostics>,
}

impl RunReport {
    pub fn new(config: impl Into<String>) -> Self {
        Self { config: config.into(), series: Vec::new() }
    }

    pub fn push(&mut self, d: StepDiagnostics) {
        self.series.push(d);
    }

    pub fn last_energy(&self) -> Option<f64> {
        self.series.last().map(|d| d.energy)
    }

    pub fn summary(&self) -> RunSummary {
        RunSummary {
            first_dissipation_violation: self.series.iter().find(|d| !d.dissipation_ok).map(|d| d.n),
            first_mbp_violation: self.series.iter().find(|d| !d.mbp_ok).map(|d| d.n),
            dissipation_violations: self.series.iter().filter(|d| !d.dissipation_ok).count(),
            mbp_violations: self.series.iter().filter(|d| !d.mbp_ok).count(),
            final_energy: self.last_energy(),
            max_norm: self.series.iter().fold(0.0, |m, d| m.max(d.max_norm)),
        }
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        let mut emit = || -> std::io::Result<()> {
            writeln!(w, "{CSV_HEADER}")?;
            for d in &self.series {
                writeln!(
                    w,
                    "{},{},{},{},{},{},{}",
                    d.n,
                    fmt_g17(d.t),
                    fmt_g17(d.energy),
                    fmt_g17(d.max_norm),
                    fmt_g17(d.alpha_min),
                    d.dissipation_ok as u8,
                    d.mbp_ok as u8
                )?;
            }
            w.flush()
        };
        emit().map_err(|e| Error::io(path, e))
    }

    /// Parses a diagnostics CSV back into a series (the config echo is not stored in it).
    pub fn read_csv(path: impl AsRef<Path>) -> Result<Vec<StepDiagnostics>> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let err = |line: usize, msg: String| Error::Parse { path: path.to_path_buf(), line, msg };
        let mut out = Vec::new();
        for (idx, line) in BufReader::new(file).lines().enumerate() {
            let line = line.map_err(|e| Error::io(path, e))?;
            let lineno = idx + 1;
            if idx == 0 {
                if line != CSV_HEADER {
                    return Err(err(lineno, format!("unexpected header {line:?}")));
                }
                continue;
            }
            let c: Vec<&str> = line.split(',').collect();
            if c.len() != 7 {
                return Err(err(lineno, format!("expected 7 columns, got {}", c.len())));
            }
            let float = |s: &str| s.parse::<f64>().map_err(|e| err(lineno, format!("{s:?}: {e}")));
            let flag = |s: &str| match s {
                "0" => Ok(false),
                "1" => Ok(true),
                other => Err(err(lineno, format!("bad flag {other:?}"))),
            };
            out.push(StepDiagnostics {
                n: c[0].parse().map_err(|e| err(lineno, format!("{e}")))?,
                t: float(c[1])?,
                energy: float(c[2])?,
                max_norm: float(c[3])?,
                alpha_min: float(c[4])?,
                dissipation_ok: flag(c[5])?,
                mbp_ok: flag(c[6])?,
            });
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Mesh2D;
    use std::f64::consts::PI;

    #[test]
    fn initial_record_is_vacuously_dissipative() {
        let m = Monitor::new(0.1, Potential::ginzburg_landau());
        let u = Field::zeros(Mesh2D::square_2pi(16).unwrap());
        let d = m.record(0, 0.0, &u, 1.0, None).unwrap();
        assert!(d.dissipation_ok && d.mbp_ok);
        assert!((d.energy - PI * PI).abs() < 1e-12);
        assert_eq!(d.max_norm, 0.0);
    }

    #[test]
    fn flags_energy_increase() {
        let m = Monitor::new(0.1, Potential::ginzburg_landau());
        let u = Field::constant(Mesh2D::square_2pi(8).unwrap(), 0.2);
        let e = m.record(0, 0.0, &u, 1.0, None).unwrap().energy;
        assert!(m.record(1, 0.1, &u, 1.0, Some(e)).unwrap().dissipation_ok);
        assert!(!m.record(1, 0.1, &u, 1.0, Some(e - 1e-6)).unwrap().dissipation_ok);
    }

    #[test]
    fn out_of_domain_state_gets_infinite_energy() {
        let fh = Potential::flory_huggins(0.8, 1.6).unwrap();
        let m = Monitor::new(0.1, fh);
        let mut u = Field::zeros(Mesh2D::square_2pi(8).unwrap());
        u.values_mut()[3] = 1.2;
        let d = m.record(4, 4.0, &u, 1.0, Some(1.0)).unwrap();
        assert_eq!(d.energy, f64::INFINITY);
        assert!(!d.mbp_ok && !d.dissipation_ok);
    }

    #[test]
    fn csv_layout_and_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("diag.csv");

        let mut report = RunReport::new("{}");
        report.write_csv(&path).unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap(), format!("{CSV_HEADER}\n"));

        report.push(StepDiagnostics {
            n: 0,
            t: 0.0,
            energy: 1.0 / 3.0,
            max_norm: 0.1 + 0.2,
            alpha_min: 1.0,
            dissipation_ok: true,
            mbp_ok: true,
        });
        report.write_csv(&path).unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap().lines().count(), 2);

        report.push(StepDiagnostics {
            n: 1,
            t: 0.1,
            energy: f64::INFINITY,
            max_norm: 1.0000000000000002,
            alpha_min: 0.123_456_789_012_345_68,
            dissipation_ok: false,
            mbp_ok: false,
        });
        report.write_csv(&path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.lines().nth(2).unwrap().contains(",inf,"));
        assert_eq!(RunReport::read_csv(&path).unwrap(), report.series);

        let s = report.summary();
        assert_eq!(s.first_mbp_violation, Some(1));
        assert_eq!(s.dissipation_violations, 1);
        assert_eq!(s.final_energy, Some(f64::INFINITY));
    }

    #[test]
    fn write_to_missing_directory_reports_path() {
        let err = RunReport::new("").write_csv("/nonexistent/dir/x.csv").unwrap_err();
        assert!(err.to_string().contains("/nonexistent/dir/x.csv"));
    }
}
