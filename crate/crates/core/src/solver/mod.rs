//! The data-driven minimizer: staggered alternation between pointwise
//! nearest-data assignment and exact constraint projection, wrapped in a
//! damped Picard loop when the inertial term is active.

mod context;
mod lbfgs;

pub use context::{ConstraintContext, GlobalStepResult, INNER_BUDGET};

use crate::dataset::MaterialDataSet;
use crate::error::{Error, Result};
use crate::phase::{Exponents, TracelessSym};
use crate::spectral::{
    convective_force, inertial_exponent_bound, momentum_residual, Fft, Field, SpectralSym,
    SpectralVec, TorusGrid, VelocityPressure,
};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Inertialess,
    Inertial,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(default)]
pub struct SolveTolerances {
    /// Relative functional-decrease stopping threshold.
    pub functional_rel: f64,
    /// Consecutive unchanged-assignment iterations before declaring a
    /// fixed point.
    pub assignment_stall: usize,
    pub max_outer: usize,
    /// Picard damping θ ∈ (0, 1]; halved on residual increase, floor 0.1.
    pub picard_damping: f64,
    pub picard_max: usize,
}

impl Default for SolveTolerances {
    fn default() -> Self {
        SolveTolerances {
            functional_rel: 1e-8,
            assignment_stall: 2,
            max_outer: 200,
            picard_damping: 0.7,
            picard_max: 50,
        }
    }
}

/// Per-node assignment targets produced by the local step.
#[derive(Debug, Clone)]
pub struct Targets {
    pub eps: Vec<TracelessSym>,
    pub sig: Vec<TracelessSym>,
}

impl Targets {
    pub fn zeros(grid: &TorusGrid) -> Self {
        let z = TracelessSym::zero(grid.dim());
        Targets { eps: vec![z; grid.num_nodes()], sig: vec![z; grid.num_nodes()] }
    }
}

pub struct ProblemSpec {
    pub grid: TorusGrid,
    pub exp: Exponents,
    pub dataset: MaterialDataSet,
    /// Physical-space force samples; must have zero mean.
    pub force: Vec<[f64; 3]>,
    pub means: (TracelessSym, TracelessSym),
    pub regime: Regime,
    pub tol: SolveTolerances,
}

impl ProblemSpec {
    /// Checks force mean, exponent admissibility and shape consistency.
    /// Returns warnings that should ride along with the report.
    pub fn validate(&self) -> Result<Vec<String>> {
        let mut warnings = Vec::new();
        if self.dataset.dim() != self.grid.dim() {
            return Err(Error::DimensionMismatch("data set and grid differ in d".into()));
        }
        if (self.dataset.exp().p - self.exp.p).abs() > 1e-12 {
            return Err(Error::InvalidExponent(
                "data set exponents differ from problem exponents".into(),
            ));
        }
        if self.force.len() != self.grid.num_nodes() {
            return Err(Error::DimensionMismatch(format!(
                "force has {} samples, grid has {} nodes",
                self.force.len(),
                self.grid.num_nodes()
            )));
        }
        let d = self.grid.dim().d();
        let n = self.grid.num_nodes() as f64;
        let mut mean = [0.0; 3];
        let mut scale: f64 = 0.0;
        for f in &self.force {
            for k in 0..d {
                mean[k] += f[k] / n;
            }
            scale = scale.max(f.iter().map(|v| v.abs()).fold(0.0, f64::max));
        }
        if mean.iter().map(|v| v * v).sum::<f64>().sqrt() > 1e-12 * (1.0 + scale) {
            return Err(Error::NonzeroMeanForce);
        }
        if self.regime == Regime::Inertial {
            let bound = inertial_exponent_bound(d);
            if self.exp.p < bound - 1e-12 {
                return Err(Error::InvalidExponent(format!(
                    "inertial regime needs p ≥ {bound} in d={d}, got p={}",
                    self.exp.p
                )));
            }
            if (self.exp.p - bound).abs() <= 1e-12 {
                warnings.push(format!(
                    "p = {bound} sits exactly on the admissibility bound; the variational \
                     guarantees require strict inequality"
                ));
            }
        }
        if !(self.tol.picard_damping > 0.0 && self.tol.picard_damping <= 1.0) {
            return Err(Error::InvalidExponent(format!(
                "picard damping must lie in (0,1], got {}",
                self.tol.picard_damping
            )));
        }
        Ok(warnings)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IterationRecord {
    pub i_value: f64,
    pub assignment_changes: usize,
    pub momentum_residual: f64,
    pub strain_residual: f64,
    /// Inner alternation count of the Picard round this record closes
    /// (zero for inertialess solves).
    pub picard_inner_iters: usize,
    /// ‖u_new − u_old‖_{L₂} of the Picard update (zero for inertialess).
    pub u_update: f64,
    /// Quadrature norms mean|ε|^p and mean|σ̃|^q of the iterate, for the
    /// coercivity bound along the iteration.
    pub eps_norm_p: f64,
    pub sig_norm_q: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolveStatus {
    Converged,
    Stalled,
    MaxIter,
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveReport {
    pub iterations: Vec<IterationRecord>,
    pub status: SolveStatus,
    pub warnings: Vec<String>,
    pub final_i: f64,
    #[serde(skip)]
    pub final_field: Field,
    #[serde(skip)]
    pub final_vp: VelocityPressure,
}

/// Quadrature value of the data-driven functional:
/// (1/n^d) Σ_nodes dist_pq(z(x), nearest data point).
pub fn functional_value(field: &Field, ds: &MaterialDataSet) -> Result<f64> {
    if ds.is_empty() {
        return Err(Error::EmptyDataSet);
    }
    let dists: Vec<f64> = (0..field.grid.num_nodes())
        .into_par_iter()
        .map(|flat| ds.nearest(&field.phase_point(flat)).map(|(_, _, d)| d))
        .collect::<Result<_>>()?;
    // sequential sum keeps the result independent of the thread count
    Ok(dists.iter().sum::<f64>() * field.grid.node_weight())
}

/// Nearest-data assignment per node. Returns the targets and the number
/// of nodes whose assigned index changed; `assignments` is updated in
/// place.
pub fn local_step(
    field: &Field,
    ds: &MaterialDataSet,
    assignments: &mut Vec<usize>,
) -> Result<(Targets, usize)> {
    let nodes = field.grid.num_nodes();
    if assignments.len() != nodes {
        *assignments = vec![usize::MAX; nodes];
    }
    let picks: Vec<(usize, TracelessSym, TracelessSym)> = (0..nodes)
        .into_par_iter()
        .map(|flat| {
            ds.nearest(&field.phase_point(flat)).map(|(i, z, _)| (i, z.eps, z.sig))
        })
        .collect::<Result<_>>()?;
    let mut changes = 0;
    let mut targets = Targets::zeros(&field.grid);
    for (flat, (idx, eps, sig)) in picks.into_iter().enumerate() {
        if assignments[flat] != idx {
            changes += 1;
            assignments[flat] = idx;
        }
        targets.eps[flat] = eps;
        targets.sig[flat] = sig;
    }
    Ok((targets, changes))
}

struct InertialessOutcome {
    field: Field,
    vp: VelocityPressure,
    status: SolveStatus,
    iterations: Vec<IterationRecord>,
}

fn solve_inertialess(
    ctx: &ConstraintContext,
    ds: &MaterialDataSet,
    exp: &Exponents,
    tol: &SolveTolerances,
) -> Result<InertialessOutcome> {
    // constraint-feasible from iteration one: project the all-zeros
    // target field
    let mut step = ctx.global_step(&Targets::zeros(&ctx.grid), exp, tol.functional_rel)?;
    let mut assignments: Vec<usize> = Vec::new();
    let mut iterations = Vec::new();
    let mut prev_i = f64::INFINITY;
    let mut stall = 0usize;
    let mut status = SolveStatus::MaxIter;
    for _ in 0..tol.max_outer {
        let (targets, changes) = local_step(&step.field, ds, &mut assignments)?;
        step = ctx.global_step(&targets, exp, tol.functional_rel)?;
        let i_value = functional_value(&step.field, ds)?;
        let (eps_norm_p, sig_norm_q) = step.field.mean_norms(exp.p, exp.q);
        iterations.push(IterationRecord {
            i_value,
            assignment_changes: changes,
            momentum_residual: step.momentum_residual,
            strain_residual: step.strain_residual,
            picard_inner_iters: 0,
            u_update: 0.0,
            eps_norm_p,
            sig_norm_q,
        });
        if (prev_i - i_value).abs() <= tol.functional_rel * (1.0 + i_value.abs()) {
            status = SolveStatus::Converged;
            break;
        }
        stall = if changes == 0 { stall + 1 } else { 0 };
        if stall >= tol.assignment_stall {
            status = SolveStatus::Stalled;
            break;
        }
        prev_i = i_value;
    }
    Ok(InertialessOutcome { field: step.field, vp: step.vp, status, iterations })
}

/// Runs the staggered scheme. Inertialess: alternate assignment and
/// projection until the functional stalls. Inertial: outer Picard loop
/// freezing the convective force f_eff = f − div(u ⊗ u).
pub fn solve(spec: &ProblemSpec) -> Result<SolveReport> {
    let warnings = spec.validate()?;
    let fft = Fft::new(&spec.grid);
    let f_spec = SpectralVec::from_values(&spec.force, &spec.grid, &fft);
    match spec.regime {
        Regime::Inertialess => {
            let ctx = ConstraintContext::new(spec.grid, spec.means, f_spec)?;
            let out = solve_inertialess(&ctx, &spec.dataset, &spec.exp, &spec.tol)?;
            let final_i = out.iterations.last().map_or(f64::INFINITY, |r| r.i_value);
            Ok(SolveReport {
                iterations: out.iterations,
                status: out.status,
                warnings,
                final_i,
                final_field: out.field,
                final_vp: out.vp,
            })
        }
        Regime::Inertial => solve_inertial(spec, f_spec, warnings),
    }
}

fn solve_inertial(
    spec: &ProblemSpec,
    f_spec: SpectralVec,
    warnings: Vec<String>,
) -> Result<SolveReport> {
    let grid = spec.grid;
    let fft = Fft::new(&grid);
    let mut u_phys: Vec<[f64; 3]> = vec![[0.0; 3]; grid.num_nodes()];
    let mut theta = spec.tol.picard_damping;
    let mut prev_du = f64::INFINITY;
    let mut iterations = Vec::new();
    let mut status = SolveStatus::MaxIter;
    let mut last: Option<(Field, VelocityPressure)> = None;
    for _ in 0..spec.tol.picard_max {
        let f_conv = convective_force(&u_phys, &grid, &fft);
        let mut f_eff = f_spec.clone();
        for (c, fc) in f_eff.comp.iter_mut().zip(&f_conv.comp) {
            for (a, b) in c.iter_mut().zip(fc) {
                *a -= b;
            }
        }
        let ctx = ConstraintContext::new(grid, spec.means, f_eff)?;
        let inner = solve_inertialess(&ctx, &spec.dataset, &spec.exp, &spec.tol)?;
        let u_new = &inner.vp.u;
        let d = grid.dim().d();
        let mut du2 = 0.0;
        let mut un2 = 0.0;
        for (a, b) in u_new.iter().zip(&u_phys) {
            for k in 0..d {
                du2 += (a[k] - b[k]) * (a[k] - b[k]);
                un2 += a[k] * a[k];
            }
        }
        let w = grid.node_weight();
        let du = (du2 * w).sqrt();
        let u_norm = (un2 * w).sqrt();
        // damped update; slow down when the update grows
        if du > prev_du {
            theta = (theta * 0.5).max(0.1);
        }
        prev_du = du;
        for (a, b) in u_phys.iter_mut().zip(u_new) {
            for k in 0..d {
                a[k] = (1.0 - theta) * a[k] + theta * b[k];
            }
        }
        // full stationary Navier-Stokes residual of the inner solution,
        // evaluated with its own velocity
        let full_res = {
            let f_conv_new = convective_force(&inner.vp.u, &grid, &fft);
            let mut f_full = f_spec.clone();
            for (c, fc) in f_full.comp.iter_mut().zip(&f_conv_new.comp) {
                for (a, b) in c.iter_mut().zip(fc) {
                    *a -= b;
                }
            }
            let sig_spec = SpectralSym::from_values(&inner.field.sig, &grid, &fft);
            let ctx_check = ConstraintContext::new(grid, spec.means, f_full)?;
            let pi_spec = fft.forward_real(&inner.vp.pi, &grid);
            momentum_residual(&sig_spec, &pi_spec, &ctx_check.f_eff, &ctx_check.basis)
        };
        let i_value = inner.iterations.last().map_or(f64::INFINITY, |r| r.i_value);
        let (eps_norm_p, sig_norm_q) = inner.field.mean_norms(spec.exp.p, spec.exp.q);
        iterations.push(IterationRecord {
            i_value,
            assignment_changes: inner.iterations.last().map_or(0, |r| r.assignment_changes),
            momentum_residual: full_res,
            strain_residual: inner.iterations.last().map_or(0.0, |r| r.strain_residual),
            picard_inner_iters: inner.iterations.len(),
            u_update: du,
            eps_norm_p,
            sig_norm_q,
        });
        last = Some((inner.field, inner.vp));
        if du <= spec.tol.functional_rel * (1.0 + u_norm) {
            status = SolveStatus::Converged;
            break;
        }
    }
    let (final_field, final_vp) = last.expect("picard_max ≥ 1");
    let final_i = iterations.last().map_or(f64::INFINITY, |r| r.i_value);
    Ok(SolveReport { iterations, status, warnings, final_i, final_field, final_vp })
}

#[derive(Debug, Clone, Serialize)]
pub struct ConsistencyScore {
    pub max_deviation: f64,
    pub l2_deviation: f64,
    pub final_i: f64,
}

/// Node-wise deviation |σ̃(x) − 2μ(|ε(x)|)ε(x)| of a solve against a law.
pub fn consistency_check(
    report: &SolveReport,
    law: &crate::dataset::ConstitutiveLaw,
) -> ConsistencyScore {
    let field = &report.final_field;
    let w = field.grid.node_weight();
    let mut max_dev: f64 = 0.0;
    let mut l2 = 0.0;
    for (eps, sig) in field.eps.iter().zip(&field.sig) {
        let dev = sig.sub(&law.stress(eps)).norm();
        max_dev = max_dev.max(dev);
        l2 += dev * dev * w;
    }
    ConsistencyScore { max_deviation: max_dev, l2_deviation: l2.sqrt(), final_i: report.final_i }
}

/// Spectral Stokes solution −2μ₀ div ε(u) + ∇π = f (an oracle for
/// Newtonian data): û = f̂_⊥ / (4π²μ₀|ξ|²).
pub fn stokes_oracle(
    grid: &TorusGrid,
    force: &[[f64; 3]],
    mu0: f64,
) -> (Vec<[f64; 3]>, SpectralVec) {
    let fft = Fft::new(grid);
    let f_spec = SpectralVec::from_values(force, grid, &fft);
    let d = grid.dim().d();
    let mut u = SpectralVec::zeros(d, grid.num_nodes());
    for mode in grid.modes() {
        if mode.is_zero || mode.is_nyquist {
            continue;
        }
        let fv = f_spec.get(mode.flat);
        let fxi: num_complex::Complex64 =
            (0..d).map(|k| fv[k] * mode.xi[k] as f64).sum();
        let denom = 4.0 * std::f64::consts::PI.powi(2) * mu0 * mode.xi_norm2;
        for k in 0..d {
            let trans = fv[k] - fxi * mode.xi[k] as f64 / mode.xi_norm2;
            u.comp[k][mode.flat] = trans / denom;
        }
    }
    (u.to_values(grid, &fft), u)
}

/// Relative L₂ distance between two velocity samplings.
pub fn velocity_rel_l2(a: &[[f64; 3]], b: &[[f64; 3]], d: usize) -> f64 {
    let mut diff = 0.0;
    let mut norm = 0.0;
    for (x, y) in a.iter().zip(b) {
        for k in 0..d {
            diff += (x[k] - y[k]) * (x[k] - y[k]);
            norm += y[k] * y[k];
        }
    }
    (diff / norm.max(1e-300)).sqrt()
}

