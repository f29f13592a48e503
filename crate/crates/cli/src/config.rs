//! Declarative run configuration: one JSON document per run, fully
//! deterministic under its seed. Validation collects every violated
//! constraint with its key path instead of stopping at the first.

use dd_fluids_core::dataset::{ConstitutiveLaw, LawKind, NoiseMode};
use dd_fluids_core::phase::{Dim, Exponents, TracelessSym};
use dd_fluids_core::solver::{Regime, SolveTolerances};
use dd_fluids_core::spectral::{inertial_exponent_bound, TorusGrid};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::f64::consts::PI;
use std::path::PathBuf;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum ExperimentKind {
    Solve,
    DataConvergenceStudy { levels: usize },
    GammaProbe { levels: usize },
    HullSuite,
    VerifyInvariants,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum ForceSpec {
    Zero,
    /// f = (A cos 2πx₂, 0).
    Shear { amplitude: f64 },
    /// f = (A cos 2πx₂, B cos 2πx₁).
    TwoModeShear { a: f64, b: f64 },
    /// f = A(sin 2πx₁ cos 2πx₂, −cos 2πx₁ sin 2πx₂).
    TaylorGreen { amplitude: f64 },
}

impl ForceSpec {
    pub fn sample(&self, grid: &TorusGrid) -> Vec<[f64; 3]> {
        let nodes = grid.num_nodes();
        match self {
            ForceSpec::Zero => vec![[0.0; 3]; nodes],
            ForceSpec::Shear { amplitude } => (0..nodes)
                .map(|flat| {
                    let x = grid.node_coords(flat);
                    [amplitude * (2.0 * PI * x[1]).cos(), 0.0, 0.0]
                })
                .collect(),
            ForceSpec::TwoModeShear { a, b } => (0..nodes)
                .map(|flat| {
                    let x = grid.node_coords(flat);
                    [a * (2.0 * PI * x[1]).cos(), b * (2.0 * PI * x[0]).cos(), 0.0]
                })
                .collect(),
            ForceSpec::TaylorGreen { amplitude } => (0..nodes)
                .map(|flat| {
                    let x = grid.node_coords(flat);
                    let (sx, cx) = (2.0 * PI * x[0]).sin_cos();
                    let (sy, cy) = (2.0 * PI * x[1]).sin_cos();
                    [amplitude * sx * cy, -amplitude * cx * sy, 0.0]
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum DatasetSpec {
    /// Quasi-uniform sampling of a law (directions × magnitudes, noise).
    LawSample {
        law: LawSpec,
        n_dirs: usize,
        n_mags: usize,
        range: f64,
        noise: f64,
        noise_mode: NoiseMode,
    },
    /// Graph of a law over a cubic ε-lattice.
    GraphLattice { law: LawSpec, range: f64, spacing: f64 },
    /// Graph of a law along one strain direction.
    Segment { law: LawSpec, direction: Vec<f64>, range: f64, spacing: f64 },
    /// Previously exported CSV data set.
    File { path: PathBuf },
}

/// Law parameters in config form (dimension comes from the problem).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum LawSpec {
    Newtonian { mu0: f64 },
    PowerLaw { mu0: f64, alpha: f64 },
    Ellis { mu0: f64, s_half: f64, beta: f64 },
    HerschelBulkley { yield_stress: f64, mu0: f64, alpha: f64 },
    TabulatedRadial { samples: Vec<(f64, f64)> },
}

impl LawSpec {
    pub fn build(&self, dim: Dim) -> Result<ConstitutiveLaw, dd_fluids_core::Error> {
        let kind = match self.clone() {
            LawSpec::Newtonian { mu0 } => LawKind::Newtonian { mu0 },
            LawSpec::PowerLaw { mu0, alpha } => LawKind::PowerLaw { mu0, alpha },
            LawSpec::Ellis { mu0, s_half, beta } => LawKind::Ellis { mu0, s_half, beta },
            LawSpec::HerschelBulkley { yield_stress, mu0, alpha } => {
                LawKind::HerschelBulkley { yield_stress, mu0, alpha }
            }
            LawSpec::TabulatedRadial { samples } => LawKind::TabulatedRadial { samples },
        };
        ConstitutiveLaw::new(kind, dim)
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct MeansSpec {
    pub eps: Vec<f64>,
    pub sig: Vec<f64>,
}



#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProblemConfig {
    pub dim: usize,
    pub grid_n: usize,
    pub p: f64,
    #[serde(default = "default_regime")]
    pub regime: Regime,
    #[serde(default)]
    pub means: MeansSpec,
    pub force: ForceSpec,
    pub dataset: DatasetSpec,
    #[serde(default)]
    pub tol: SolveTolerances,
}

fn default_regime() -> Regime {
    Regime::Inertialess
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(default)]
pub struct EmitFlags {
    pub fields: bool,
    pub trace: bool,
    pub certificates: bool,
    pub plotdata: bool,
}

impl Default for EmitFlags {
    fn default() -> Self {
        EmitFlags { fields: false, trace: true, certificates: false, plotdata: false }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunConfig {
    pub experiment: ExperimentKind,
    pub problem: ProblemConfig,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub emit: EmitFlags,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

impl RunConfig {
    pub fn from_file(path: &std::path::Path) -> anyhow::Result<Self> {
        let body = std::fs::read_to_string(path)
            .map_err(|e| anyhow::anyhow!("cannot read config {}: {e}", path.display()))?;
        let cfg: RunConfig = serde_json::from_str(&body)
            .map_err(|e| anyhow::anyhow!("config parse error: {e}"))?;
        Ok(cfg)
    }

    /// Hash of the canonical serialized config; stamped into every
    /// emitted CSV header.
    pub fn hash(&self) -> String {
        let body = serde_json::to_string(self).expect("config serializes");
        let digest = Sha256::digest(body.as_bytes());
        digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }

    /// Collects every violated constraint with its key path.
    pub fn validate(&self) -> Vec<String> {
        let mut errs = Vec::new();
        let p = &self.problem;
        if p.dim != 2 && p.dim != 3 {
            errs.push(format!("problem.dim: must be 2 or 3, got {}", p.dim));
        }
        if p.grid_n < 4 || !p.grid_n.is_multiple_of(2) {
            errs.push(format!("problem.grid_n: must be even and ≥ 4, got {}", p.grid_n));
        }
        if p.p <= 1.0 || !p.p.is_finite() {
            errs.push(format!("problem.p: must lie in (1, ∞), got {}", p.p));
        }
        if p.regime == Regime::Inertial && (p.dim == 2 || p.dim == 3) {
            let bound = inertial_exponent_bound(p.dim);
            if p.p < bound - 1e-12 {
                errs.push(format!(
                    "problem.p: inertial regime needs p ≥ {bound} in d={}, got {}",
                    p.dim, p.p
                ));
            }
        }
        let m = match p.dim {
            2 => 2,
            3 => 5,
            _ => 0,
        };
        if m > 0 {
            if !p.means.eps.is_empty() && p.means.eps.len() != m {
                errs.push(format!(
                    "problem.means.eps: expected {m} coordinates, got {}",
                    p.means.eps.len()
                ));
            }
            if !p.means.sig.is_empty() && p.means.sig.len() != m {
                errs.push(format!(
                    "problem.means.sig: expected {m} coordinates, got {}",
                    p.means.sig.len()
                ));
            }
        }
        match &p.dataset {
            DatasetSpec::LawSample { n_dirs, n_mags, range, noise, law, .. } => {
                if *n_dirs < 1 || *n_mags < 1 {
                    errs.push("problem.dataset: n_dirs and n_mags must be ≥ 1".into());
                }
                if *range <= 0.0 {
                    errs.push(format!("problem.dataset.range: must be > 0, got {range}"));
                }
                if *noise < 0.0 {
                    errs.push(format!("problem.dataset.noise: must be ≥ 0, got {noise}"));
                }
                if let Err(e) = law.build(Dim::D2) {
                    errs.push(format!("problem.dataset.law: {e}"));
                }
            }
            DatasetSpec::GraphLattice { range, spacing, law } => {
                if *range <= 0.0 || *spacing <= 0.0 {
                    errs.push("problem.dataset: range and spacing must be > 0".into());
                }
                if let Err(e) = law.build(Dim::D2) {
                    errs.push(format!("problem.dataset.law: {e}"));
                }
            }
            DatasetSpec::Segment { range, spacing, direction, law } => {
                if *range <= 0.0 || *spacing <= 0.0 {
                    errs.push("problem.dataset: range and spacing must be > 0".into());
                }
                if m > 0 && direction.len() != m {
                    errs.push(format!(
                        "problem.dataset.direction: expected {m} coordinates, got {}",
                        direction.len()
                    ));
                }
                if let Err(e) = law.build(Dim::D2) {
                    errs.push(format!("problem.dataset.law: {e}"));
                }
            }
            DatasetSpec::File { path } => {
                if !path.exists() {
                    errs.push(format!(
                        "problem.dataset.path: file {} does not exist",
                        path.display()
                    ));
                }
            }
        }
        if !(p.tol.picard_damping > 0.0 && p.tol.picard_damping <= 1.0) {
            errs.push(format!(
                "problem.tol.picard_damping: must lie in (0,1], got {}",
                p.tol.picard_damping
            ));
        }
        if let ExperimentKind::DataConvergenceStudy { levels }
        | ExperimentKind::GammaProbe { levels } = self.experiment
        {
            if levels < 3 {
                errs.push(format!("experiment.levels: must be ≥ 3, got {levels}"));
            }
        }
        errs
    }

    pub fn dim(&self) -> anyhow::Result<Dim> {
        Ok(Dim::new(self.problem.dim)?)
    }

    pub fn grid(&self) -> anyhow::Result<TorusGrid> {
        Ok(TorusGrid::new(self.dim()?, self.problem.grid_n)?)
    }

    pub fn exponents(&self) -> anyhow::Result<Exponents> {
        Ok(Exponents::new(self.problem.p)?)
    }

    pub fn means(&self) -> anyhow::Result<(TracelessSym, TracelessSym)> {
        let dim = self.dim()?;
        let m = dim.y_dim();
        let build = |c: &[f64]| -> anyhow::Result<TracelessSym> {
            if c.is_empty() {
                Ok(TracelessSym::zero(dim))
            } else {
                anyhow::ensure!(c.len() == m, "means need {m} coordinates");
                Ok(TracelessSym::from_coords(dim, c)?)
            }
        };
        Ok((build(&self.problem.means.eps)?, build(&self.problem.means.sig)?))
    }
}

/// Counter-based seed split: one 64-bit root seed, one counter per
/// deterministic section.
pub fn child_seed(root: u64, counter: u64) -> u64 {
    // splitmix64 step
    let mut z = root ^ counter.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
