//! Constitutive law families. All laws are radial: σ̃(ε) = 2μ(|ε|)ε, and
//! the scalar response g(s) = 2μ(s)·s must be nondecreasing (monotone law).

use crate::error::{Error, Result};
use crate::phase::{Dim, TracelessSym};
use serde::{Deserialize, Serialize};

/// Grid used for the monotonicity and yield-limit checks.
const MONOTONE_CHECK_POINTS: usize = 1000;
const MONOTONE_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LawKind {
    /// g(s) = 2μ₀·s.
    Newtonian { mu0: f64 },
    /// μ(s) = μ₀ s^{α−1}, hence g(s) = 2μ₀ s^α.
    PowerLaw { mu0: f64, alpha: f64 },
    /// μ(s) = μ₀ / (1 + (s/s_half)^{β−1}).
    Ellis { mu0: f64, s_half: f64, beta: f64 },
    /// g(s) = a + 2μ₀ s^α for s > 0; the graph jumps at zero and the data
    /// set carries the segment D₀ = {(0,σ̃): |σ̃| ≤ a}.
    HerschelBulkley { yield_stress: f64, mu0: f64, alpha: f64 },
    /// Piecewise-linear samples of s ↦ g(s) = 2μ(s)s, clamped below the
    /// first sample and extended with the last slope above the last.
    TabulatedRadial { samples: Vec<(f64, f64)> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstitutiveLaw {
    pub kind: LawKind,
    pub dim: Dim,
}

impl ConstitutiveLaw {
    pub fn new(kind: LawKind, dim: Dim) -> Result<Self> {
        let law = ConstitutiveLaw { kind, dim };
        law.validate()?;
        Ok(law)
    }

    pub fn newtonian(mu0: f64, dim: Dim) -> Result<Self> {
        Self::new(LawKind::Newtonian { mu0 }, dim)
    }

    pub fn power_law(mu0: f64, alpha: f64, dim: Dim) -> Result<Self> {
        Self::new(LawKind::PowerLaw { mu0, alpha }, dim)
    }

    fn validate(&self) -> Result<()> {
        match &self.kind {
            LawKind::Newtonian { mu0 } => {
                if *mu0 <= 0.0 {
                    return Err(Error::InvalidLaw(format!("Newtonian μ₀ must be > 0, got {mu0}")));
                }
            }
            LawKind::PowerLaw { mu0, alpha } => {
                if *mu0 <= 0.0 || *alpha <= 0.0 {
                    return Err(Error::InvalidLaw(format!(
                        "power law needs μ₀ > 0 and α > 0, got μ₀={mu0}, α={alpha}"
                    )));
                }
            }
            LawKind::Ellis { mu0, s_half, beta } => {
                if *mu0 <= 0.0 || *s_half <= 0.0 || *beta < 1.0 {
                    return Err(Error::InvalidLaw(format!(
                        "Ellis law needs μ₀ > 0, s_half > 0, β ≥ 1, got {mu0}, {s_half}, {beta}"
                    )));
                }
            }
            LawKind::HerschelBulkley { yield_stress, mu0, alpha } => {
                if *yield_stress < 0.0 || *mu0 <= 0.0 || *alpha <= 0.0 {
                    return Err(Error::InvalidLaw(format!(
                        "Herschel-Bulkley needs a ≥ 0, μ₀ > 0, α > 0, got {yield_stress}, {mu0}, {alpha}"
                    )));
                }
            }
            LawKind::TabulatedRadial { samples } => {
                if samples.is_empty() {
                    return Err(Error::InvalidLaw("tabulated law needs samples".into()));
                }
                if samples.windows(2).any(|w| w[1].0 <= w[0].0) {
                    return Err(Error::InvalidLaw(
                        "tabulated strain magnitudes must be strictly increasing".into(),
                    ));
                }
                if samples.iter().any(|(s, g)| *s < 0.0 || *g < 0.0) {
                    return Err(Error::InvalidLaw("tabulated samples must be nonnegative".into()));
                }
            }
        }
        Ok(())
    }

    /// Scalar response g(s) = 2μ(s)·s at strain magnitude s ≥ 0.
    pub fn radial(&self, s: f64) -> f64 {
        match &self.kind {
            LawKind::Newtonian { mu0 } => 2.0 * mu0 * s,
            LawKind::PowerLaw { mu0, alpha } => 2.0 * mu0 * s.powf(*alpha),
            LawKind::Ellis { mu0, s_half, beta } => {
                2.0 * mu0 * s / (1.0 + (s / s_half).powf(beta - 1.0))
            }
            LawKind::HerschelBulkley { yield_stress, mu0, alpha } => {
                if s == 0.0 {
                    0.0
                } else {
                    yield_stress + 2.0 * mu0 * s.powf(*alpha)
                }
            }
            LawKind::TabulatedRadial { samples } => {
                if s <= samples[0].0 {
                    return samples[0].1;
                }
                let last = samples.len() - 1;
                if s >= samples[last].0 {
                    if last == 0 {
                        return samples[0].1;
                    }
                    let (s0, g0) = samples[last - 1];
                    let (s1, g1) = samples[last];
                    return g1 + (g1 - g0) / (s1 - s0) * (s - s1);
                }
                let i = samples.partition_point(|(si, _)| *si <= s) - 1;
                let (s0, g0) = samples[i];
                let (s1, g1) = samples[i + 1];
                g0 + (g1 - g0) / (s1 - s0) * (s - s0)
            }
        }
    }

    /// The viscous stress 2μ(|ε|)ε. Returns zero at ε = 0; for yield laws
    /// the admissible values there form the segment D₀ instead.
    pub fn stress(&self, eps: &TracelessSym) -> TracelessSym {
        let s = eps.norm();
        if s == 0.0 {
            return TracelessSym::zero(eps.dim());
        }
        eps.scale(self.radial(s) / s)
    }

    /// Yield value a = lim_{s→0} 2μ(s)s.
    pub fn yield_value(&self) -> f64 {
        match &self.kind {
            LawKind::Newtonian { .. } | LawKind::PowerLaw { .. } | LawKind::Ellis { .. } => 0.0,
            LawKind::HerschelBulkley { yield_stress, .. } => *yield_stress,
            LawKind::TabulatedRadial { samples } => samples[0].1,
        }
    }

    /// Checks that g is nondecreasing on a 10³-point grid in (0, r].
    pub fn check_monotone(&self, r: f64) -> bool {
        let mut prev = self.yield_value();
        for i in 1..=MONOTONE_CHECK_POINTS {
            let s = r * i as f64 / MONOTONE_CHECK_POINTS as f64;
            let g = self.radial(s);
            if g < prev - MONOTONE_SLACK * (1.0 + prev.abs()) {
                return false;
            }
            prev = g;
        }
        true
    }
}
