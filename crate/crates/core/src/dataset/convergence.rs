//! Empirical data-convergence checkers: estimate the best constants in
//! the uniform/fine approximation bounds between two finite data sets.
//!
//! Bounds are normalized by 1 + |ε|^p + |σ̃|^q (the growth form); the
//! pseudo-norm form 1 + dist(z,0) is reported as a secondary statistic
//! since the two normalizations are not interchangeable.

use crate::dataset::MaterialDataSet;
use crate::error::{Error, Result};
use crate::phase::{magnitude, PhasePoint};
use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct Witness {
    pub point: PhasePoint,
    pub dist: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceReport {
    /// sup over probed reference points of dist(z, D_n)/(1+|ε|^p+|σ̃|^q).
    pub a_hat: f64,
    /// sup over probed D_n points of dist(z, D_ref)/(1+|ε|^p+|σ̃|^q).
    pub b_hat: f64,
    /// Same suprema with the pseudo-norm normalizer 1 + dist(z, 0).
    pub a_hat_pseudo: f64,
    pub b_hat_pseudo: f64,
    pub r_used: f64,
    pub s_used: f64,
    pub worst_a: Option<Witness>,
    pub worst_b: Option<Witness>,
    /// No reference (resp. candidate) points fell inside the probed range.
    pub a_empty_range: bool,
    pub b_empty_range: bool,
}

/// One-sided supremum of the normalized distance from the in-range points
/// of `from` to the set `to`.
fn one_sided(
    from: &MaterialDataSet,
    to: &MaterialDataSet,
    range: f64,
) -> Result<(f64, f64, Option<Witness>, bool)> {
    let exp = from.exp();
    let mut sup: f64 = 0.0;
    let mut sup_pseudo: f64 = 0.0;
    let mut worst = None;
    let mut any = false;
    for z in from.points() {
        let mag = magnitude(z, exp);
        if mag >= range {
            continue;
        }
        any = true;
        let (_, _, d) = to.nearest(z)?;
        let ratio = d / (1.0 + z.eps.norm().powf(exp.p) + z.sig.norm().powf(exp.q));
        let ratio_pseudo = d / (1.0 + mag);
        if ratio > sup {
            sup = ratio;
            worst = Some(Witness { point: *z, dist: d, ratio });
        }
        sup_pseudo = sup_pseudo.max(ratio_pseudo);
    }
    Ok((sup, sup_pseudo, worst, !any))
}

/// Range-restricted checker: reference points with dist(z,0) < `r` are
/// probed against `dn`, and `dn` points with dist(z,0) < `s` against the
/// reference.
pub fn check_convergence_eq(
    dn: &MaterialDataSet,
    d_ref: &MaterialDataSet,
    r: f64,
    s: f64,
) -> Result<ConvergenceReport> {
    if dn.dim() != d_ref.dim() {
        return Err(Error::DimensionMismatch("data sets differ in d".into()));
    }
    if (dn.exp().p - d_ref.exp().p).abs() > 1e-12 {
        return Err(Error::InvalidExponent("data sets differ in (p,q)".into()));
    }
    let (a_hat, a_hat_pseudo, worst_a, a_empty) = one_sided(d_ref, dn, r)?;
    let (b_hat, b_hat_pseudo, worst_b, b_empty) = one_sided(dn, d_ref, s)?;
    Ok(ConvergenceReport {
        a_hat,
        b_hat,
        a_hat_pseudo,
        b_hat_pseudo,
        r_used: r,
        s_used: s,
        worst_a,
        worst_b,
        a_empty_range: a_empty,
        b_empty_range: b_empty,
    })
}

/// Unrestricted checker (all points probed).
pub fn check_convergence_bd(
    dn: &MaterialDataSet,
    d_ref: &MaterialDataSet,
) -> Result<ConvergenceReport> {
    check_convergence_eq(dn, d_ref, f64::INFINITY, f64::INFINITY)
}
