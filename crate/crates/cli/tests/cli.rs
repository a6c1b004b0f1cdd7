//! End-to-end behaviour of the `etdrk` binary and the experiment drivers.

use std::path::Path;
use std::process::{Command, Output};

use etdrk_cli::config::Setup;
use etdrk_cli::experiments::{cmd_mbp_test, mbp_template};
use etdrk_cli::{cmd_run, InitialCondition, PotentialSpec, RunConfig};
use etdrk_core::diagnostics::CSV_HEADER;
use etdrk_core::{Field, Mesh2D, RunReport};

fn etdrk(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_etdrk")).args(args).output().unwrap()
}

fn small(out: &Path) -> RunConfig {
    RunConfig { nx: 16, ny: 16, out: out.to_path_buf(), ..RunConfig::default() }
}

#[test]
fn tables_subcommand_prints_both_tables() {
    let dir = tempfile::tempdir().unwrap();
    let out = etdrk(&["tables", "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("r,kind,sigma_min\n"));
    assert!(text.contains("r,kappa,variant,tau_max\n"));
    assert!(text.contains("1,2.0000000000000000e0,standard,inf"));
    assert!(dir.path().join("table_sigma_min.csv").exists());
}

#[test]
fn dump_config_reflects_flags() {
    let out = etdrk(&["run", "--dump-config", "--order", "5", "--potential", "fh", "--theta-c", "2", "--seed", "9", "--grid", "32"]);
    assert!(out.status.success());
    let cfg = RunConfig::from_json(std::str::from_utf8(&out.stdout).unwrap()).unwrap();
    assert_eq!(cfg.order, 5);
    assert_eq!((cfg.nx, cfg.ny), (32, 32));
    assert_eq!(cfg.potential, PotentialSpec::Fh { theta: 0.8, theta_c: 2.0 });
    assert_eq!(cfg.initial, InitialCondition::Random { seed: 9, fraction: 1.0 });
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cfg.json");
    std::fs::write(&path, r#"{"tau": 0.5, "order": 2, "nodes": "chebyshev"}"#).unwrap();
    let out = etdrk(&["run", "--dump-config", "--config", path.to_str().unwrap(), "--order", "4", "--paper-scale"]);
    let cfg = RunConfig::from_json(std::str::from_utf8(&out.stdout).unwrap()).unwrap();
    assert_eq!(cfg.tau, 0.5);
    assert_eq!(cfg.order, 4);
    assert_eq!(cfg.nx, 512);
    assert_eq!(cfg.nodes, etdrk_cli::Nodes::Chebyshev);
}

#[test]
fn configuration_errors_exit_with_2() {
    assert_eq!(etdrk(&["run", "--kappa", "1.0", "--grid", "8"]).status.code(), Some(2));
    assert_eq!(etdrk(&["run", "--tau", "-1"]).status.code(), Some(2));
    assert_eq!(etdrk(&["run", "--theta", "0.5"]).status.code(), Some(2));
    assert_eq!(etdrk(&["run", "--config", "/nonexistent/cfg.json"]).status.code(), Some(2));
    assert_eq!(etdrk(&["mbp-test", "--potential", "gl", "--grid", "8"]).status.code(), Some(2));
    assert_eq!(etdrk(&["run", "--nodes", "gauss"]).status.code(), Some(2));
}

#[test]
fn numerical_failures_exit_with_3() {
    let dir = tempfile::tempdir().unwrap();
    let mesh = Mesh2D::square_2pi(8).unwrap();
    let csv = dir.path().join("u0.csv");
    Field::constant(mesh, 1.5).write_csv(&csv).unwrap();
    let cfg = RunConfig {
        nx: 8,
        ny: 8,
        potential: PotentialSpec::fh_default(),
        initial: InitialCondition::Csv { path: csv },
        out: dir.path().join("out"),
        ..RunConfig::default()
    };
    let cfg_path = dir.path().join("cfg.json");
    std::fs::write(&cfg_path, cfg.to_json()).unwrap();
    let out = etdrk(&["run", "--config", cfg_path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("step 1"));
    // The failing run still leaves its diagnostics behind.
    let series = RunReport::read_csv(dir.path().join("out/diagnostics.csv")).unwrap();
    assert_eq!(series.len(), 1);
}

#[test]
fn zero_horizon_gives_only_the_initial_record() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = RunConfig { t_end: 0.0, ..small(dir.path()) };
    let report = cmd_run(&cfg).unwrap();
    assert_eq!(report.series.len(), 1);
    let text = std::fs::read_to_string(dir.path().join("diagnostics.csv")).unwrap();
    assert_eq!(text.lines().count(), 2);
    assert_eq!(text.lines().next().unwrap(), CSV_HEADER);
}

#[test]
fn constant_one_is_a_steady_state() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("ones.csv");
    Field::constant(Mesh2D::square_2pi(16).unwrap(), 1.0).write_csv(&csv).unwrap();
    let cfg = RunConfig { initial: InitialCondition::Csv { path: csv }, tau: 0.1, t_end: 1.0, ..small(dir.path()) };
    cmd_run(&cfg).unwrap();
    let u = Field::read_csv(dir.path().join("final_field.csv"), Mesh2D::square_2pi(16).unwrap()).unwrap();
    assert!(u.values().iter().all(|v| (v - 1.0).abs() < 1e-10));
}

#[test]
fn shortened_last_step_lands_on_t_end() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = RunConfig { tau: 0.3, t_end: 1.0, ..small(dir.path()) };
    let report = cmd_run(&cfg).unwrap();
    assert_eq!(report.series.len(), 5);
    assert_eq!(report.series.last().unwrap().t, 1.0);
}

#[test]
fn runs_are_bit_reproducible() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let make = |out: &Path| RunConfig {
        potential: PotentialSpec::fh_default(),
        initial: InitialCondition::Random { seed: 5, fraction: 1.0 },
        tau: 0.5,
        t_end: 5.0,
        ..small(out)
    };
    cmd_run(&make(a.path())).unwrap();
    cmd_run(&make(b.path())).unwrap();
    for name in ["diagnostics.csv", "final_field.csv"] {
        let x = std::fs::read(a.path().join(name)).unwrap();
        let y = std::fs::read(b.path().join(name)).unwrap();
        assert_eq!(x, y, "{name}");
    }
}

#[test]
fn mbp_experiment_on_a_small_grid() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = RunConfig { nx: 16, ny: 16, t_end: 30.0, out: dir.path().to_path_buf(), ..mbp_template() };
    let series = cmd_mbp_test(&cfg, true).unwrap();
    assert_eq!(series.len(), 6);
    let beta = cfg.setup().unwrap().potential.beta();
    for s in series.iter().filter(|s| s.rescaled) {
        assert!(s.failure.is_none());
        assert!(s.report.series.iter().all(|d| d.max_norm <= beta + 1e-12), "r={}", s.order);
    }
    // Same initial data for every scheme.
    let e0 = series[0].report.series[0].energy;
    assert!(series.iter().all(|s| s.report.series[0].energy == e0));
    assert!(dir.path().join("mbp_summary.csv").exists());
    assert!(dir.path().join("mbp_r7_rescaled.csv").exists());
}

#[test]
fn rescaled_and_standard_agree_while_rescaling_is_inactive() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = RunConfig { tau: 0.01, t_end: 0.2, order: 4, ..small(dir.path()) };
    let setup: Setup = cfg.setup().unwrap();
    let u0 = Field::from_fn(setup.mesh, |x, y| 0.5 * x.sin() * y.sin());
    let (ur, rep) = etdrk_cli::experiments::run_from_field(&setup, &cfg, u0.clone()).unwrap();
    assert!(rep.series.iter().all(|d| d.alpha_min == 1.0));
    let std_cfg = RunConfig { rescaled: false, ..cfg };
    let (us, _) = etdrk_cli::experiments::run_from_field(&setup, &std_cfg, u0).unwrap();
    assert_eq!(ur.values(), us.values());
}
