use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use etdrk_cli::config::LARGE_GRID;
use etdrk_cli::experiments::{
    converge_template, convergence_csv, energy_template, halving_taus, mbp_template,
};
use etdrk_cli::{
    cmd_converge, cmd_energy_test, cmd_mbp_test, cmd_run, cmd_tables, CliError, InitialCondition, Nodes,
    PotentialSpec, Reference, Result, RunConfig,
};

#[derive(Parser)]
#[command(name = "etdrk", version, about = "ETDRK integrators for the 2D Allen-Cahn equation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    overrides: Overrides,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate one trajectory and write diagnostics and the final field.
    Run,
    /// Temporal convergence study over halved step sizes.
    Converge {
        /// Number of step sizes, starting from --tau and halving.
        #[arg(long, default_value_t = 6)]
        levels: usize,
        /// `self-finer[:k]` or `order-up`.
        #[arg(long, default_value = "self-finer:8")]
        reference: String,
    },
    /// Standard versus rescaled maximum norms for orders 3, 5, 7.
    MbpTest,
    /// Energy series of rescaled orders 3 to 6 at steps 0.2, 0.1, 0.01.
    EnergyTest,
    /// Minimum singular values of the Vandermonde matrices and step-size bounds.
    Tables,
}

#[derive(Clone, Copy, ValueEnum)]
enum PotentialArg {
    Gl,
    Fh,
}

#[derive(Clone, Copy, ValueEnum)]
enum NodesArg {
    Uniform,
    Chebyshev,
}

impl From<NodesArg> for Nodes {
    fn from(n: NodesArg) -> Self {
        match n {
            NodesArg::Uniform => Nodes::Uniform,
            NodesArg::Chebyshev => Nodes::Chebyshev,
        }
    }
}

#[derive(Args)]
struct Overrides {
    /// JSON configuration; flags override its keys.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    order: Option<usize>,
    #[arg(long, global = true, action = clap::ArgAction::Set)]
    rescaled: Option<bool>,
    #[arg(long, global = true)]
    tau: Option<f64>,
    #[arg(long, global = true)]
    t_end: Option<f64>,
    /// Cells per direction.
    #[arg(long, global = true)]
    grid: Option<usize>,
    #[arg(long, global = true)]
    eps: Option<f64>,
    #[arg(long, global = true, value_enum)]
    potential: Option<PotentialArg>,
    #[arg(long, global = true)]
    theta: Option<f64>,
    #[arg(long, global = true)]
    theta_c: Option<f64>,
    #[arg(long, global = true)]
    kappa: Option<f64>,
    #[arg(long, global = true, value_enum)]
    nodes: Option<NodesArg>,
    /// Random initial data with this seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Use the 512x512 grid.
    #[arg(long, global = true)]
    paper_scale: bool,
    /// Print the resolved configuration as JSON and exit.
    #[arg(long, global = true)]
    dump_config: bool,
}

impl Overrides {
    fn apply(&self, template: RunConfig) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
                template.merge_json(&text)?
            }
            None => template,
        };
        if self.paper_scale {
            cfg.nx = LARGE_GRID;
            cfg.ny = LARGE_GRID;
        }
        if let Some(n) = self.grid {
            cfg.nx = n;
            cfg.ny = n;
        }
        match self.potential {
            Some(PotentialArg::Gl) => cfg.potential = PotentialSpec::Gl,
            Some(PotentialArg::Fh) if !matches!(cfg.potential, PotentialSpec::Fh { .. }) => {
                cfg.potential = PotentialSpec::fh_default()
            }
            _ => {}
        }
        if self.theta.is_some() || self.theta_c.is_some() {
            let PotentialSpec::Fh { theta, theta_c } = &mut cfg.potential else {
                return Err(CliError::Config("--theta and --theta-c apply to the fh potential only".into()));
            };
            *theta = self.theta.unwrap_or(*theta);
            *theta_c = self.theta_c.unwrap_or(*theta_c);
        }
        if let Some(seed) = self.seed {
            let fraction = match cfg.initial {
                InitialCondition::Random { fraction, .. } => fraction,
                _ => 1.0,
            };
            cfg.initial = InitialCondition::Random { seed, fraction };
        }
        cfg.order = self.order.unwrap_or(cfg.order);
        cfg.rescaled = self.rescaled.unwrap_or(cfg.rescaled);
        cfg.tau = self.tau.unwrap_or(cfg.tau);
        cfg.t_end = self.t_end.unwrap_or(cfg.t_end);
        cfg.eps = self.eps.unwrap_or(cfg.eps);
        cfg.kappa = self.kappa.or(cfg.kappa);
        cfg.nodes = self.nodes.map_or(cfg.nodes, Nodes::from);
        cfg.out = self.out.clone().unwrap_or(cfg.out);
        cfg.validate()?;
        Ok(cfg)
    }
}

fn execute(cli: Cli) -> Result<()> {
    let template = match cli.command {
        Command::Run | Command::Tables => RunConfig::default(),
        Command::Converge { .. } => converge_template(),
        Command::MbpTest => mbp_template(),
        Command::EnergyTest => energy_template(),
    };
    let cfg = cli.overrides.apply(template)?;
    if cli.overrides.dump_config {
        println!("{}", cfg.to_json());
        return Ok(());
    }
    match cli.command {
        Command::Run => {
            let summary = cmd_run(&cfg)?.summary();
            println!(
                "final energy {:.12e}, max norm {:.12e}, dissipation violations {}, bound violations {}",
                summary.final_energy.unwrap_or(f64::NAN),
                summary.max_norm,
                summary.dissipation_violations,
                summary.mbp_violations
            );
        }
        Command::Converge { levels, reference } => {
            let reference: Reference = reference.parse()?;
            let rows = cmd_converge(&cfg, &halving_taus(cfg.tau, levels), reference)?;
            let csv = convergence_csv(&rows);
            std::fs::create_dir_all(&cfg.out).map_err(|e| CliError::Config(e.to_string()))?;
            let path = cfg.out.join(format!("converge_r{}.csv", cfg.order));
            std::fs::write(&path, &csv).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
            print!("{csv}");
        }
        Command::MbpTest => {
            for s in cmd_mbp_test(&cfg, true)? {
                let sm = s.report.summary();
                println!(
                    "r={} {:<8} steps={:<4} max_norm={:.12e} bound_violations={}{}",
                    s.order,
                    if s.rescaled { "rescaled" } else { "standard" },
                    s.report.series.len() - 1,
                    sm.max_norm,
                    sm.mbp_violations,
                    s.failure.map(|f| format!(" stopped: {f}")).unwrap_or_default()
                );
            }
        }
        Command::EnergyTest => {
            for s in cmd_energy_test(&cfg, true)? {
                let sm = s.report.summary();
                println!(
                    "r={} tau={:<5} dissipation_violations={} final_energy={:.12e}",
                    s.order,
                    s.tau,
                    sm.dissipation_violations,
                    sm.final_energy.unwrap_or(f64::NAN)
                );
            }
        }
        Command::Tables => {
            let setup = cfg.setup()?;
            let (a, b) = cmd_tables(setup.kappa, &cfg.out)?;
            for p in [a, b] {
                print!("{}", std::fs::read_to_string(&p).map_err(|e| CliError::Config(e.to_string()))?);
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
