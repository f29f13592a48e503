//! Coercivity certificates for data sets and the explicit lower-bound
//! constants they induce for the distance function.
//!
//! A certificate (c₁, c₂) asserts |ε|^p + |σ̃|^q ≤ c₁ ε·σ̃ + c₂ on every
//! stored point. From it, elementary Young-type estimates produce global
//! constants (A, B, γ) with
//!
//! ```text
//! dist_pq(z, D) ≥ A (|ε|^p + |σ̃|^q) − B − γ ε·σ̃   for all z,
//! ```
//!
//! which combined with the fact that ∫ ε·σ̃ is fixed by the constraint set
//! (a Null-Lagrangian on the torus) bounds every minimizing iterate.

use crate::dataset::MaterialDataSet;
use crate::error::{Error, Result};
use crate::phase::{inner, magnitude, Exponents, PhasePoint};
use serde::Serialize;

/// Stratified-growth heuristic: a candidate c₁ is rejected when the top
/// magnitude stratum needs more than 10× the mid stratum's c₂.
const STRATUM_GROWTH_FACTOR: f64 = 10.0;
/// Below this many points the stratified heuristic is skipped.
const MIN_POINTS_FOR_STRATA: usize = 9;

#[derive(Debug, Clone, Copy, Serialize)]
pub struct CoercivityCertificate {
    pub c1: f64,
    pub c2: f64,
}

#[derive(Debug, Clone, Serialize)]
pub enum CoercivityOutcome {
    Certified(CoercivityCertificate),
    /// Every candidate c₁ shows superlinear growth of the required c₂
    /// along the magnitude strata. Heuristic, not a proof.
    NotCoercive { per_candidate: Vec<(f64, f64, f64)> },
}

fn excess(z: &PhasePoint, c1: f64, exp: &Exponents) -> f64 {
    z.eps.norm().powf(exp.p) + z.sig.norm().powf(exp.q)
        - c1 * inner(&z.eps, &z.sig).expect("same dim")
}

/// For each candidate c₁ computes c₂(c₁) = max over points of
/// |ε|^p + |σ̃|^q − c₁ ε·σ̃ and returns the admissible pair minimizing c₂,
/// or `NotCoercive` when every candidate degrades superlinearly with the
/// point magnitude.
pub fn coercivity_certificate(
    ds: &MaterialDataSet,
    c1_grid: &[f64],
) -> Result<CoercivityOutcome> {
    if c1_grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    if ds.is_empty() {
        return Err(Error::EmptyDataSet);
    }
    let exp = ds.exp();

    // sort point indices by magnitude once; terciles define the strata
    let mut order: Vec<usize> = (0..ds.len()).collect();
    order.sort_by(|&a, &b| {
        magnitude(&ds.points()[a], exp).total_cmp(&magnitude(&ds.points()[b], exp))
    });
    let n = order.len();
    let (mid_lo, mid_hi) = (n / 3, 2 * n / 3);

    let mut best: Option<CoercivityCertificate> = None;
    let mut diagnostics = Vec::with_capacity(c1_grid.len());
    for &c1 in c1_grid {
        let c2_all = ds.points().iter().map(|z| excess(z, c1, exp)).fold(f64::MIN, f64::max);
        let (mut c2_mid, mut c2_top) = (f64::MIN, f64::MIN);
        for (rank, &i) in order.iter().enumerate() {
            let e = excess(&ds.points()[i], c1, exp);
            if rank >= mid_hi {
                c2_top = c2_top.max(e);
            } else if rank >= mid_lo {
                c2_mid = c2_mid.max(e);
            }
        }
        diagnostics.push((c1, c2_mid, c2_top));
        let superlinear = n >= MIN_POINTS_FOR_STRATA
            && c2_top > STRATUM_GROWTH_FACTOR * c2_mid.max(1e-9)
            && c2_top > 1e-9;
        if superlinear {
            continue;
        }
        let c2 = c2_all.max(0.0);
        if best.is_none_or(|b| c2 < b.c2) {
            best = Some(CoercivityCertificate { c1, c2 });
        }
    }
    match best {
        Some(cert) => Ok(CoercivityOutcome::Certified(cert)),
        None => Ok(CoercivityOutcome::NotCoercive { per_candidate: diagnostics }),
    }
}

/// Global lower-bound constants derived from a certificate.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct LowerBound {
    pub a: f64,
    pub b: f64,
    pub gamma: f64,
}

/// Derives (A, B, γ) such that dist_pq(z, D) ≥ A(|ε|^p+|σ̃|^q) − B − γ ε·σ̃
/// holds for every z whenever the certificate holds on D.
///
/// Sketch: for the nearest data point (e, s) to z = (ε, σ̃), write
/// a = |ε−e|, b = |σ̃−s|. Then |e|^p ≥ 2^{1−p}|ε|^p − a^p (likewise in q),
/// the certificate bounds |e|^p + |s|^q by c₁ e·s + c₂, and e·s expands
/// around ε·σ̃ with cross terms controlled by Young's inequality with a
/// parameter t chosen to keep half of the κ = min(2^{1−p}, 2^{1−q})
/// coefficient. The leftover a^p + b^q terms are at most max(p,q)·dist.
pub fn lower_bound_constants(cert: &CoercivityCertificate, exp: &Exponents) -> LowerBound {
    let (p, q) = (exp.p, exp.q);
    let kappa = (2.0_f64).powf(1.0 - p).min((2.0_f64).powf(1.0 - q));
    let c1_abs = cert.c1.abs();
    let max_pq = p.max(q);
    if c1_abs == 0.0 {
        let m = 1.0 * max_pq;
        return LowerBound { a: kappa / m, b: cert.c2.max(0.0) / m, gamma: 0.0 };
    }
    // Young parameter: c₁·t·max(1/p,1/q) = κ/2
    let t = kappa * p.min(q) / (2.0 * c1_abs);
    let cross = t.powf(-q / p).max(t.powf(-p / q));
    let m = (1.0 + c1_abs * (1.0 + cross)) * max_pq;
    LowerBound { a: kappa / (2.0 * m), b: cert.c2.max(0.0) / m, gamma: cert.c1 / m }
}

/// Bound on mean(|ε|^p + |σ̃|^q) for any field in the torus constraint set
/// in terms of its functional value I, via the Null-Lagrangian identity
/// mean(ε·σ̃) = ε₀·σ̃₀ + mean(u·f).
///
/// `f_l2` is the quadrature L₂ norm of the force. A nonzero force is only
/// certifiable at p = q = 2, where the discrete Korn constant on the
/// torus is exactly 1/π; other exponents return `None` unless f = 0.
pub fn iterate_norm_bound(
    bound: &LowerBound,
    exp: &Exponents,
    i_value: f64,
    mean_pairing_offset: f64, // ε₀·σ̃₀
    f_l2: f64,
) -> Option<f64> {
    let g = bound.gamma.abs();
    let base = (i_value + bound.b + g * mean_pairing_offset.abs()) / bound.a;
    if f_l2 == 0.0 {
        return Some(base);
    }
    if (exp.p - 2.0).abs() > 1e-12 {
        return None;
    }
    // X ≤ c + β√X with β = γ‖f‖₂/(Aπ), using ‖u‖₂ ≤ ‖ε_fluct‖₂/π ≤ √X/π:
    // solve the quadratic for √X
    let beta = g * f_l2 / (bound.a * std::f64::consts::PI);
    let sqrt_x = 0.5 * (beta + (beta * beta + 4.0 * base).sqrt());
    Some(sqrt_x * sqrt_x)
}
