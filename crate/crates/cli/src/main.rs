//! dd-fluids: deterministic experiment runner for the data-driven
//! viscous-flow solver. One JSON config = one run; outputs land in the
//! configured directory. Exit codes: 0 converged/complete, 2 stalled or
//! budget exhausted, 1 error.

mod config;
mod emit;
mod experiments;

use clap::{Parser, Subcommand};
use config::{DatasetSpec, ExperimentKind, RunConfig};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "dd-fluids", version, about = "Data-driven stationary viscous flow on the torus")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    /// Override the config's output directory.
    #[arg(long, global = true)]
    output_dir: Option<PathBuf>,
    /// Override the config's seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a single data-driven solve.
    Solve { config: PathBuf },
    /// Data-convergence study over noise levels.
    Study { config: PathBuf },
    /// Γ-convergence probe over data-set sequences.
    Gamma { config: PathBuf },
    /// Hull-membership certificate suite for a law family.
    Hulls { config: PathBuf },
    /// Run the cross-module invariant suite.
    Verify {
        /// Optional config (only seed/output settings are used).
        config: Option<PathBuf>,
    },
    /// Generate a data set and write it as CSV (plus meta sidecar).
    GenData { config: PathBuf },
}

fn init_threads() {
    if let Ok(v) = std::env::var("DD_FLUIDS_THREADS") {
        if let Ok(n) = v.parse::<usize>() {
            if n >= 1 {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
        }
    }
}

fn load(path: &Path, cli: &Cli, expect: ExperimentKind) -> anyhow::Result<RunConfig> {
    let mut cfg = RunConfig::from_file(path)?;
    // the subcommand names the experiment; a conflicting config is a
    // config error
    let compatible = matches!(
        (&cfg.experiment, &expect),
        (ExperimentKind::Solve, ExperimentKind::Solve)
            | (ExperimentKind::DataConvergenceStudy { .. }, ExperimentKind::DataConvergenceStudy { .. })
            | (ExperimentKind::GammaProbe { .. }, ExperimentKind::GammaProbe { .. })
            | (ExperimentKind::HullSuite, ExperimentKind::HullSuite)
            | (ExperimentKind::VerifyInvariants, ExperimentKind::VerifyInvariants)
    );
    anyhow::ensure!(
        compatible,
        "experiment.kind: config declares {:?} but the subcommand runs {:?}",
        cfg.experiment,
        expect
    );
    if let Some(dir) = &cli.output_dir {
        cfg.output_dir = dir.clone();
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}

fn gen_data(path: &Path, cli: &Cli) -> anyhow::Result<u8> {
    let mut cfg = RunConfig::from_file(path)?;
    if let Some(dir) = &cli.output_dir {
        cfg.output_dir = dir.clone();
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    let violations = cfg.validate();
    if !violations.is_empty() {
        for v in &violations {
            eprintln!("config error: {v}");
        }
        return Ok(1);
    }
    std::fs::create_dir_all(&cfg.output_dir)?;
    let ds = experiments::build_dataset(&cfg, config::child_seed(cfg.seed, 1))?;
    let out = cfg.output_dir.join("dataset.csv");
    ds.write_csv_with_comments(
        &out,
        &[format!("units=nondimensional-torus, config_hash={}", cfg.hash())],
    )?;
    println!("wrote {} points to {}", ds.len(), out.display());
    Ok(0)
}

fn real_main(cli: Cli) -> anyhow::Result<u8> {
    init_threads();
    match &cli.cmd {
        Cmd::Solve { config } => experiments::run(&load(config, &cli, ExperimentKind::Solve)?),
        Cmd::Study { config } => experiments::run(&load(
            config,
            &cli,
            ExperimentKind::DataConvergenceStudy { levels: 3 },
        )?),
        Cmd::Gamma { config } => {
            experiments::run(&load(config, &cli, ExperimentKind::GammaProbe { levels: 3 })?)
        }
        Cmd::Hulls { config } => experiments::run(&load(config, &cli, ExperimentKind::HullSuite)?),
        Cmd::Verify { config } => {
            let cfg = match config {
                Some(path) => load(path, &cli, ExperimentKind::VerifyInvariants)?,
                // self-contained default when no config is given
                None => RunConfig {
                    experiment: ExperimentKind::VerifyInvariants,
                    problem: config::ProblemConfig {
                        dim: 2,
                        grid_n: 8,
                        p: 2.0,
                        regime: dd_fluids_core::solver::Regime::Inertialess,
                        means: Default::default(),
                        force: config::ForceSpec::Zero,
                        dataset: DatasetSpec::LawSample {
                            law: config::LawSpec::Newtonian { mu0: 0.5 },
                            n_dirs: 8,
                            n_mags: 8,
                            range: 1.0,
                            noise: 0.0,
                            noise_mode: dd_fluids_core::dataset::NoiseMode::Relative,
                        },
                        tol: Default::default(),
                    },
                    output_dir: cli
                        .output_dir
                        .clone()
                        .unwrap_or_else(|| PathBuf::from("out-verify")),
                    seed: cli.seed.unwrap_or(0),
                    emit: Default::default(),
                },
            };
            experiments::run(&cfg)
        }
        Cmd::GenData { config } => gen_data(config, &cli),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match real_main(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
