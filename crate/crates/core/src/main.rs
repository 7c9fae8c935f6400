use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use log::{error, info, warn};

use avgtrack::gains::GainReport;
use avgtrack::graph::build_graph;
use avgtrack::io::export::{
    export_trajectory, scenario_from_metadata, write_metadata, RunMetadata, RunOutcome,
};
use avgtrack::io::plot::emit_plots;
use avgtrack::io::scenario::{
    parse_scenario, GainMode, Preset, Scenario, ScenarioError, SimOverrides,
};
use avgtrack::sim::{Integrator, SimError};

/// Distributed average tracking for double-integrator networks.
#[derive(Parser)]
#[command(name = "avgtrack", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a scenario (TOML, or the metadata.json of an earlier run).
    Run {
        scenario: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Print the gain inequality table for a scenario.
    VerifyGains {
        scenario: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Print the Laplacian spectrum of a scenario's graph.
    Spectrum { scenario: PathBuf },
    /// Run one of the built-in replication scenarios.
    Replicate {
        case: Case,
        #[command(flatten)]
        overrides: Overrides,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Case {
    Case1,
    Case2,
}

#[derive(Args, Clone, Default)]
struct Overrides {
    /// Output directory for the run artifacts.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long)]
    step: Option<f64>,
    #[arg(long)]
    horizon: Option<f64>,
    #[arg(long)]
    integrator: Option<Integrator>,
    /// Saturation width replacing sgn; 0 keeps the exact signum.
    #[arg(long)]
    boundary_layer: Option<f64>,
    /// Synthesize gains with this margin instead of the scenario's gains.
    #[arg(long)]
    margin: Option<f64>,
}

impl Overrides {
    fn apply(&self, scenario: &mut Scenario) -> Result<(), ScenarioError> {
        SimOverrides {
            step: self.step,
            horizon: self.horizon,
            integrator: self.integrator,
            boundary_layer: self.boundary_layer,
            ..Default::default()
        }
        .apply(&mut scenario.sim);
        if let Some(margin) = self.margin {
            scenario.gains = GainMode::Auto { margin };
        }
        scenario.validate()
    }
}

fn load_scenario(path: &Path) -> Result<Scenario> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let scenario = if path.extension().is_some_and(|e| e == "json") {
        let s = scenario_from_metadata(&text)
            .with_context(|| format!("parsing metadata {}", path.display()))?;
        s.validate()?;
        s
    } else {
        parse_scenario(&text).with_context(|| format!("parsing {}", path.display()))?
    };
    Ok(scenario)
}

fn log_report(report: &GainReport) {
    if report.pass {
        info!("gains satisfy every sufficient condition");
    } else {
        for c in report.failures() {
            warn!(
                "gain condition not met: {} ({:.6e} vs {:.6e})",
                c.name, c.lhs, c.rhs
            );
        }
        if !report.definiteness.pass {
            warn!(
                "{} block matrix is not negative definite",
                report.definiteness.matrix
            );
        }
    }
}

fn run_scenario(mut scenario: Scenario, overrides: &Overrides) -> Result<()> {
    overrides.apply(&mut scenario)?;
    let prepared = scenario.prepare()?;
    info!(
        "scenario `{}`: n = {}, algorithm {}, lambda2 = {:.6}, lambdaN = {:.6}",
        scenario.name,
        scenario.graph.n,
        scenario.algorithm,
        prepared.spectrum.lambda2,
        prepared.spectrum.lambda_n
    );
    info!(
        "gains: alpha = {:.6}, beta = {:.6}, gamma = {:.6}, kappa = {:?}",
        prepared.gains.alpha, prepared.gains.beta, prepared.gains.gamma, prepared.gains.kappa
    );
    log_report(&prepared.report);

    let out = &overrides.out;
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    fs::write(out.join("gain_report.txt"), prepared.report.to_string())?;

    let (traj, abort) = match prepared.simulate() {
        Ok(t) => (t, None),
        Err(ScenarioError::Sim(SimError::Diverged { t, reason, partial })) => {
            (*partial, Some((t, reason)))
        }
        Err(e) => return Err(e.into()),
    };

    let traj_path = out.join("trajectory.csv");
    export_trajectory(&traj, &traj_path)?;
    let plots = if traj.len() >= 2 {
        emit_plots(&traj, out)?
    } else {
        Vec::new()
    };
    let outcome = RunOutcome {
        completed: abort.is_none(),
        final_time: traj.times.last().copied().unwrap_or(0.0),
        samples: traj.len(),
        abort_reason: abort.as_ref().map(|(_, r)| r.clone()),
    };
    let meta = RunMetadata {
        scenario: &prepared.scenario,
        spectrum: &prepared.spectrum,
        signal_bounds: &prepared.bounds,
        gains: &prepared.gains,
        gain_report: &prepared.report,
        outcome,
        trajectory_file: "trajectory.csv".into(),
        plots: plots
            .iter()
            .filter_map(|p| p.file_name().map(|f| f.to_string_lossy().into_owned()))
            .collect(),
    };
    write_metadata(&meta, &out.join("metadata.json"))?;

    if let Some((t, reason)) = abort {
        bail!(
            "run diverged at t = {t:.6} s ({reason}); partial trajectory written to {}",
            traj_path.display()
        );
    }
    if let Some(m) = traj.final_metrics() {
        info!(
            "final: pos_err = {:.3e}, vel_err = {:.3e}, s1 = {:.3e}, s2 = {:.3e}, lyapunov = {:.3e}, consensus_err = {:.3e}",
            m.pos_err, m.vel_err, m.s1, m.s2, m.lyapunov, m.consensus_err
        );
    }
    info!("artifacts written to {}", out.display());
    Ok(())
}

fn verify(mut scenario: Scenario, overrides: &Overrides) -> Result<()> {
    overrides.apply(&mut scenario)?;
    let prepared = scenario.prepare()?;
    print!("{}", prepared.report);
    Ok(())
}

fn print_spectrum(scenario: &Scenario) -> Result<()> {
    let g = build_graph(scenario.graph.n, &scenario.graph.edges)?;
    let spec = avgtrack::graph::spectrum(&g, avgtrack::graph::EIGEN_TOL)?;
    println!("n = {}, edges = {}", g.node_count(), g.edge_count());
    for (k, ev) in spec.eigenvalues.iter().enumerate() {
        println!("lambda_{} = {ev:.12}", k + 1);
    }
    println!("lambda2 = {:.12}", spec.lambda2);
    println!("lambdaN = {:.12}", spec.lambda_n);
    Ok(())
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run {
            scenario,
            overrides,
        } => run_scenario(load_scenario(&scenario)?, &overrides),
        Command::VerifyGains {
            scenario,
            overrides,
        } => verify(load_scenario(&scenario)?, &overrides),
        Command::Spectrum { scenario } => print_spectrum(&load_scenario(&scenario)?),
        Command::Replicate { case, overrides } => {
            let preset = match case {
                Case::Case1 => Preset::PaperCase1,
                Case::Case2 => Preset::PaperCase2,
            };
            run_scenario(preset.scenario(), &overrides)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            error!("{e:#}");
            ExitCode::FAILURE
        }
    }
}
