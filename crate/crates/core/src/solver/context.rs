//! Constraint-set machinery for one solve: cached FFT plans, kernel
//! bases, the particular stress of the active force, and the global step
//! (exact per-mode projection at p = q = 2, projected L-BFGS otherwise).

use crate::error::{Error, Result};
use crate::phase::{Dim, Exponents, TracelessSym};
use crate::solver::lbfgs::{self, LbfgsOptions};
use crate::solver::Targets;
use crate::spectral::{
    build_symbols, divergence_residual, momentum_residual, particular_stress,
    pressure_from_stress, project_strain, project_stress, recover_velocity,
    strain_constraint_defect, Fft, Field, SpectralSym, SpectralVec, SymbolBasis, TorusGrid,
    VelocityPressure,
};

/// Inner iteration budget of the general-(p,q) global step.
pub const INNER_BUDGET: usize = 500;

pub struct ConstraintContext {
    pub grid: TorusGrid,
    pub fft: Fft,
    pub basis: SymbolBasis,
    pub means: (TracelessSym, TracelessSym),
    pub f_eff: SpectralVec,
    sig_part: SpectralSym,
    sig_zero_part: SpectralSym,
}

pub struct GlobalStepResult {
    pub field: Field,
    pub vp: VelocityPressure,
    pub strain_residual: f64,
    pub momentum_residual: f64,
    pub divergence_residual: f64,
    pub inner_iters: usize,
}

impl ConstraintContext {
    pub fn new(
        grid: TorusGrid,
        means: (TracelessSym, TracelessSym),
        f_eff: SpectralVec,
    ) -> Result<Self> {
        let fft = Fft::new(&grid);
        let basis = build_symbols(&grid)?;
        let sig_part = particular_stress(&f_eff, &basis)?;
        let sig_zero_part = SpectralSym::zeros(grid.dim(), grid.num_nodes());
        Ok(ConstraintContext { grid, fft, basis, means, f_eff, sig_part, sig_zero_part })
    }

    pub fn dim(&self) -> Dim {
        self.grid.dim()
    }

    /// Exact per-mode orthogonal projection of targets onto the affine
    /// constraint set (the p = q = 2 minimizer).
    fn project_quadratic(&self, targets: &Targets) -> (SpectralSym, SpectralSym) {
        let mut eps = SpectralSym::from_values(&targets.eps, &self.grid, &self.fft);
        let mut sig = SpectralSym::from_values(&targets.sig, &self.grid, &self.fft);
        project_strain(&mut eps, &self.basis, &self.means.0);
        project_stress(&mut sig, &self.basis, &self.sig_part, &self.means.1);
        (eps, sig)
    }

    /// Projection onto the homogeneous (tangent) constraint space; used
    /// to keep L-BFGS gradients inside the feasible subspace.
    fn project_tangent(&self, eps: &mut SpectralSym, sig: &mut SpectralSym) {
        let zero = TracelessSym::zero(self.dim());
        project_strain(eps, &self.basis, &zero);
        project_stress(sig, &self.basis, &self.sig_zero_part, &zero);
    }

    fn assemble(
        &self,
        eps_spec: &SpectralSym,
        sig_spec: &SpectralSym,
        inner_iters: usize,
    ) -> Result<GlobalStepResult> {
        let u_spec = recover_velocity(eps_spec, &self.basis)?;
        let pi_spec = pressure_from_stress(sig_spec, &self.f_eff, &self.basis)?;
        let field = Field {
            grid: self.grid,
            eps: eps_spec.to_values(&self.grid, &self.fft),
            sig: sig_spec.to_values(&self.grid, &self.fft),
            means: self.means,
        };
        let vp = VelocityPressure {
            grid: self.grid,
            u: u_spec.to_values(&self.grid, &self.fft),
            pi: self.fft.inverse_real(&pi_spec, &self.grid),
        };
        Ok(GlobalStepResult {
            field,
            vp,
            strain_residual: strain_constraint_defect(eps_spec, &self.basis),
            momentum_residual: momentum_residual(sig_spec, &pi_spec, &self.f_eff, &self.basis),
            divergence_residual: divergence_residual(&u_spec, &self.grid),
            inner_iters,
        })
    }

    /// Constraint-set element minimizing Σ dist_pq to the targets.
    pub fn global_step(
        &self,
        targets: &Targets,
        exp: &Exponents,
        functional_rel: f64,
    ) -> Result<GlobalStepResult> {
        let (eps_spec, sig_spec) = self.project_quadratic(targets);
        if (exp.p - 2.0).abs() <= 1e-12 {
            return self.assemble(&eps_spec, &sig_spec, 0);
        }
        // general exponents: minimize over the affine set, initialized and
        // preconditioned by the quadratic projection
        let m = self.dim().y_dim();
        let nodes = self.grid.num_nodes();
        let w = self.grid.node_weight();
        let mut state = Vec::with_capacity(2 * m * nodes);
        for v in eps_spec.to_values(&self.grid, &self.fft) {
            state.extend_from_slice(v.coords());
        }
        for v in sig_spec.to_values(&self.grid, &self.fft) {
            state.extend_from_slice(v.coords());
        }
        let dim = self.dim();
        let (p, q) = (exp.p, exp.q);
        let fg = |x: &[f64], g: &mut [f64]| -> f64 {
            let mut f = 0.0;
            let mut grad_eps = vec![TracelessSym::zero(dim); nodes];
            let mut grad_sig = vec![TracelessSym::zero(dim); nodes];
            for node in 0..nodes {
                let eb = &x[node * m..(node + 1) * m];
                let sb = &x[(nodes + node) * m..(nodes + node + 1) * m];
                let te = targets.eps[node];
                let ts = targets.sig[node];
                let de: Vec<f64> = eb.iter().zip(te.coords()).map(|(a, b)| a - b).collect();
                let ds: Vec<f64> = sb.iter().zip(ts.coords()).map(|(a, b)| a - b).collect();
                let ne = de.iter().map(|v| v * v).sum::<f64>().sqrt();
                let ns = ds.iter().map(|v| v * v).sum::<f64>().sqrt();
                f += w * (ne.powf(p) / p + ns.powf(q) / q);
                // ∇(1/p)|v|^p = |v|^{p−2} v, subgradient 0 at coincidence
                if ne > 0.0 {
                    let c = w * ne.powf(p - 2.0);
                    let coords: Vec<f64> = de.iter().map(|v| c * v).collect();
                    grad_eps[node] = TracelessSym::from_coords(dim, &coords).expect("dim");
                }
                if ns > 0.0 {
                    let c = w * ns.powf(q - 2.0);
                    let coords: Vec<f64> = ds.iter().map(|v| c * v).collect();
                    grad_sig[node] = TracelessSym::from_coords(dim, &coords).expect("dim");
                }
            }
            let mut ge = SpectralSym::from_values(&grad_eps, &self.grid, &self.fft);
            let mut gs = SpectralSym::from_values(&grad_sig, &self.grid, &self.fft);
            self.project_tangent(&mut ge, &mut gs);
            let ge_phys = ge.to_values(&self.grid, &self.fft);
            let gs_phys = gs.to_values(&self.grid, &self.fft);
            for node in 0..nodes {
                g[node * m..(node + 1) * m].copy_from_slice(ge_phys[node].coords());
                g[(nodes + node) * m..(nodes + node + 1) * m]
                    .copy_from_slice(gs_phys[node].coords());
            }
            f
        };
        let opts = LbfgsOptions {
            history: 8,
            max_iters: INNER_BUDGET,
            grad_tol: functional_rel,
        };
        let out = lbfgs::minimize(&mut state, fg, &opts);
        debug_assert!(out.f.is_finite());
        if !out.converged {
            return Err(Error::InnerSolveDiverged { grad_norm: out.grad_norm });
        }
        // read the state back and clean up feasibility drift with one
        // exact projection (a no-op on the constraint set)
        let mut eps_v = Vec::with_capacity(nodes);
        let mut sig_v = Vec::with_capacity(nodes);
        for node in 0..nodes {
            eps_v.push(TracelessSym::from_coords(dim, &state[node * m..(node + 1) * m])?);
            sig_v.push(TracelessSym::from_coords(
                dim,
                &state[(nodes + node) * m..(nodes + node + 1) * m],
            )?);
        }
        let (eps_spec, sig_spec) =
            self.project_quadratic(&Targets { eps: eps_v, sig: sig_v });
        self.assemble(&eps_spec, &sig_spec, out.iters)
    }
}
