//! Certificates for the quasiconvexity structure of material data sets:
//! separating functions for the three law families with proven hull
//! identities, the characteristic cone, and the spanning check.
//!
//! Hull membership is decided by certificates, never by evaluating the
//! quasiconvex envelope: outside points receive a function that is
//! nonpositive on the data set and strictly positive at the query, so a
//! positive value is a proof of exclusion.

use crate::dataset::ConstitutiveLaw;
use crate::error::{Error, Result};
use crate::phase::{inner, Dim, Exponents, PhasePoint, TracelessSym};
use crate::spectral::symbols::project_span;
use crate::spectral::ModeBasis;
use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

/// Witness scan: t runs over ±10⁻⁴..10¹ geometrically, 60 points.
const WITNESS_T_LO: f64 = 1e-4;
const WITNESS_T_HI: f64 = 1e1;
const WITNESS_T_POINTS: usize = 60;

/// Distance to the Newtonian set at p = q = 2 (μ₀ = 1/2 normalization):
/// dist((ε,σ̃), D_N) = ½|ε − σ̃|².
pub fn newtonian_dist(z: &PhasePoint) -> f64 {
    let d = z.eps.sub(&z.sig).norm();
    0.5 * d * d
}

/// The quasiaffine separator f₀(ε,σ̃) = −(ε−ε₀)·(σ̃−σ̃₀); nonpositive on
/// any monotone data set containing z₀.
pub fn monotone_separator(z: &PhasePoint, z0: &PhasePoint) -> f64 {
    -inner(&z.eps.sub(&z0.eps), &z.sig.sub(&z0.sig)).expect("same dim")
}

/// Scaled Young defect vanishing exactly on σ̃ = c·|ε|^{α−1}ε for the
/// conjugate pair (p, q): (c/p)|ε|^p + |σ̃|^q/(q c^{q/p}) − ε·σ̃.
pub fn scaled_young_defect(z: &PhasePoint, exp: &Exponents, c: f64) -> f64 {
    let e = z.eps.norm();
    let s = z.sig.norm();
    c * e.powf(exp.p) / exp.p + s.powf(exp.q) / (exp.q * c.powf(exp.q / exp.p))
        - inner(&z.eps, &z.sig).expect("same dim")
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "kind")]
pub enum CertificateKind {
    PowerLawYoung { c: f64 },
    NewtonianQuadratic { c: f64 },
    MonotoneAffine { z0: PhasePoint, t: f64 },
}

/// A positive `value` certifies the queried point outside the hull; a
/// nonpositive value from a single certificate is inconclusive.
#[derive(Debug, Clone, Serialize)]
pub struct SeparationCertificate {
    pub kind: CertificateKind,
    pub value: f64,
}

/// Distance-style membership residual against the data set of a radial
/// law: graph branch at the same ε plus the yield segment D₀.
fn set_residual(z: &PhasePoint, law: &ConstitutiveLaw, exp: &Exponents) -> f64 {
    let a = law.yield_value();
    let cap_over = (z.sig.norm() - a).max(0.0);
    let cap = z.eps.norm().powf(exp.p) / exp.p + cap_over.powf(exp.q) / exp.q;
    if z.eps.norm() == 0.0 {
        return cap;
    }
    let graph = z.sig.sub(&law.stress(&z.eps)).norm().powf(exp.q) / exp.q;
    graph.min(cap)
}

fn witness_t_grid() -> impl Iterator<Item = f64> {
    (0..WITNESS_T_POINTS).map(|k| {
        WITNESS_T_LO
            * (WITNESS_T_HI / WITNESS_T_LO).powf(k as f64 / (WITNESS_T_POINTS - 1) as f64)
    })
}

/// Decides membership of z in the law's data set (graph plus D₀ for
/// yield laws) within `tol`, and constructs a positive separating
/// certificate for outside points following the witness line
/// ε_t = ε + t(σ̃ − 2μ(|ε|)ε), t < 0.
pub fn hull_membership(
    z: &PhasePoint,
    law: &ConstitutiveLaw,
    exp: &Exponents,
    tol: f64,
) -> Result<(bool, Option<SeparationCertificate>)> {
    if !law.check_monotone(10.0 * (1.0 + z.eps.norm())) {
        return Err(Error::InvalidLaw(
            "hull identities are only certified for monotone laws".into(),
        ));
    }
    if set_residual(z, law, exp) <= tol {
        return Ok((true, None));
    }

    // closed-form certificates for the exactly-characterized families
    match &law.kind {
        crate::dataset::LawKind::Newtonian { mu0 } if (exp.p - 2.0).abs() <= 1e-12 => {
            let value = scaled_young_defect(z, exp, 2.0 * mu0);
            if value > 0.0 {
                return Ok((
                    false,
                    Some(SeparationCertificate {
                        kind: CertificateKind::NewtonianQuadratic { c: 2.0 * mu0 },
                        value,
                    }),
                ));
            }
        }
        crate::dataset::LawKind::PowerLaw { mu0, alpha }
            if (alpha - exp.alpha).abs() <= 1e-12 =>
        {
            let value = scaled_young_defect(z, exp, 2.0 * mu0);
            if value > 0.0 {
                return Ok((
                    false,
                    Some(SeparationCertificate {
                        kind: CertificateKind::PowerLawYoung { c: 2.0 * mu0 },
                        value,
                    }),
                ));
            }
        }
        _ => {}
    }

    // witness scan from the monotone-hull proof: ε_t walks from ε toward
    // the constitutive residual σ̃ − 2μ(|ε|)ε, so the separator limit is
    // t·|σ̃ − 2μ(|ε|)ε|² > 0 for small t
    let dim = z.dim();
    if z.eps.norm() > 0.0 {
        let residual_dir = z.sig.sub(&law.stress(&z.eps));
        for t in witness_t_grid() {
            let eps_t = z.eps.add(&residual_dir.scale(t));
            let z0 = PhasePoint::new(eps_t, law.stress(&eps_t))?;
            let value = monotone_separator(z, &z0);
            if value > 0.0 {
                return Ok((
                    false,
                    Some(SeparationCertificate {
                        kind: CertificateKind::MonotoneAffine { z0, t },
                        value,
                    }),
                ));
            }
        }
    } else {
        // ε = 0 beyond the cap: probe graph points along σ̃ and along the
        // fixed basis directions, both orientations
        let mut dirs: Vec<TracelessSym> = Vec::new();
        if z.sig.norm() > 0.0 {
            dirs.push(z.sig.scale(1.0 / z.sig.norm()));
        }
        for k in 0..dim.y_dim() {
            let mut c = vec![0.0; dim.y_dim()];
            c[k] = 1.0;
            dirs.push(TracelessSym::from_coords(dim, &c)?);
        }
        for b in dirs {
            for sign in [1.0, -1.0] {
                for t in witness_t_grid() {
                    let eps_t = b.scale(sign * t);
                    let z0 = PhasePoint::new(eps_t, law.stress(&eps_t))?;
                    let value = monotone_separator(z, &z0);
                    if value > 0.0 {
                        return Ok((
                            false,
                            Some(SeparationCertificate {
                                kind: CertificateKind::MonotoneAffine { z0, t: sign * t },
                                value,
                            }),
                        ));
                    }
                }
            }
        }
    }
    Err(Error::WitnessSearchFailed(format!(
        "no positive separator on the t-grid for z with |ε|={}, |σ̃|={}",
        z.eps.norm(),
        z.sig.norm()
    )))
}

/// A certified decomposition of a pair (w₁, w₂) ∈ Λ_A: the direction ξ,
/// the vector a with w₁ = a⊙ξ, the Y_ξ^⊥ coordinates of w₂ and its
/// pressure value.
#[derive(Debug, Clone, Serialize)]
pub struct ConeWitness {
    pub xi: [f64; 3],
    pub a: [f64; 3],
    pub stress_coords: Vec<f64>,
    pub pressure: f64,
    dim: Dim,
}

impl ConeWitness {
    /// Reconstructs (w₁, w₂) from the stored decomposition.
    pub fn reconstruct(&self) -> Result<(TracelessSym, TracelessSym)> {
        let d = self.dim.d();
        let mut w1 = DMatrix::zeros(d, d);
        for i in 0..d {
            for j in 0..d {
                w1[(i, j)] = 0.5 * (self.a[i] * self.xi[j] + self.a[j] * self.xi[i]);
            }
        }
        let basis = ModeBasis::from_unit(self.dim, self.xi);
        let mut w2 = TracelessSym::zero(self.dim);
        for (coeff, b) in self.stress_coords.iter().zip(&basis.stress) {
            w2 = w2.add(&TracelessSym::from_coords(self.dim, b)?.scale(*coeff));
        }
        Ok((TracelessSym::from_matrix(&w1)?, w2))
    }
}

#[derive(Debug, Clone, Serialize)]
pub enum ConeResult {
    InCone(ConeWitness),
    NotInCone { best_residual: f64 },
}

/// Residual of (w₁, w₂) against ker A₁\[ξ\] × ker A₂\[ξ\] for a unit ξ.
pub fn cone_residual(w1: &TracelessSym, w2: &TracelessSym, dim: Dim, xi_unit: [f64; 3]) -> f64 {
    let basis = ModeBasis::from_unit(dim, xi_unit);
    let m = dim.y_dim();
    let mut c1: Vec<Complex64> =
        w1.coords().iter().map(|&v| Complex64::new(v, 0.0)).collect();
    let mut c2: Vec<Complex64> =
        w2.coords().iter().map(|&v| Complex64::new(v, 0.0)).collect();
    project_span(&basis.strain, &mut c1);
    project_span(&basis.stress, &mut c2);
    let mut off = 0.0;
    for k in 0..m {
        off += (w1.coords()[k] - c1[k].re).powi(2) + (w2.coords()[k] - c2[k].re).powi(2);
    }
    off.sqrt()
}

fn witness_from_direction(
    w1: &TracelessSym,
    w2: &TracelessSym,
    dim: Dim,
    xi_unit: [f64; 3],
    tol: f64,
) -> Option<ConeWitness> {
    if cone_residual(w1, w2, dim, xi_unit) > tol {
        return None;
    }
    let d = dim.d();
    let basis = ModeBasis::from_unit(dim, xi_unit);
    // w₁ = a⊙ξ̂ with a ⊥ ξ̂  ⟹  a = 2 w₁ ξ̂
    let m1 = w1.to_matrix();
    let mut a = [0.0; 3];
    for i in 0..d {
        for j in 0..d {
            a[i] += 2.0 * m1[(i, j)] * xi_unit[j];
        }
    }
    let stress_coords: Vec<f64> = basis
        .stress
        .iter()
        .map(|b| b.iter().zip(w2.coords()).map(|(x, y)| x * y).sum())
        .collect();
    let pressure: f64 =
        w2.coords().iter().zip(&basis.pressure).map(|(c, w)| c * w).sum();
    Some(ConeWitness { xi: xi_unit, a, stress_coords, pressure, dim })
}

/// Membership test for the characteristic cone Λ_A = ⋃_ξ ker A₁\[ξ\] ×
/// ker A₂\[ξ\].
///
/// Closed form: a nonzero w₁ lies in some Y_ξ iff its eigenvalues are
/// (λ, −λ) (plus 0 in d = 3), in which case ξ is one of the two bisector
/// directions of the extremal eigenvectors; w₁ = 0 leaves ξ free to chase
/// any eigenvector of w₂ (Λ_{A₂} = Y). A direction-grid scan backs the
/// closed form up as the best-residual report for outside points.
pub fn cone_membership(w1: &TracelessSym, w2: &TracelessSym, dim: Dim) -> Result<ConeResult> {
    if w1.dim() != dim || w2.dim() != dim {
        return Err(Error::DimensionMismatch("cone query dimension mismatch".into()));
    }
    let tol = 1e-10 * (1.0 + w1.norm() + w2.norm());
    let d = dim.d();
    let mut candidates: Vec<[f64; 3]> = Vec::new();
    if w1.norm() > tol {
        let eig = nalgebra::SymmetricEigen::new(w1.to_matrix());
        let mut pairs: Vec<(f64, nalgebra::DVector<f64>)> = eig
            .eigenvalues
            .iter()
            .enumerate()
            .map(|(k, &v)| (v, eig.eigenvectors.column(k).into_owned()))
            .collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        // spectrum must be (−λ, [0,] λ)
        let lam = pairs.last().unwrap().0;
        let spectrum_ok = (pairs[0].0 + lam).abs() <= tol
            && (d == 2 || pairs[1].0.abs() <= tol);
        if !spectrum_ok {
            let best = best_grid_residual(w1, w2, dim);
            return Ok(ConeResult::NotInCone { best_residual: best });
        }
        let vmax = &pairs.last().unwrap().1;
        let vmin = &pairs[0].1;
        for sign in [1.0, -1.0] {
            let mut xi = [0.0; 3];
            let mut norm = 0.0;
            for k in 0..d {
                xi[k] = vmax[k] + sign * vmin[k];
                norm += xi[k] * xi[k];
            }
            let norm = norm.sqrt();
            for v in xi.iter_mut() {
                *v /= norm;
            }
            candidates.push(xi);
        }
    } else {
        // w₁ = 0 lies in every Y_ξ; any eigenvector ξ of w₂ gives
        // w₂ ξ ∥ ξ, i.e. w₂ ∈ Y_ξ^⊥
        let eig = nalgebra::SymmetricEigen::new(w2.to_matrix());
        for k in 0..d {
            let col = eig.eigenvectors.column(k);
            let mut xi = [0.0; 3];
            for i in 0..d {
                xi[i] = col[i];
            }
            candidates.push(xi);
        }
    }
    for xi in candidates {
        if let Some(w) = witness_from_direction(w1, w2, dim, xi, tol) {
            return Ok(ConeResult::InCone(w));
        }
    }
    Ok(ConeResult::NotInCone { best_residual: best_grid_residual(w1, w2, dim) })
}

/// Exhaustive direction-grid residual scan (the slow oracle).
pub fn best_grid_residual(w1: &TracelessSym, w2: &TracelessSym, dim: Dim) -> f64 {
    let mut best = f64::INFINITY;
    for xi in direction_grid(dim.d(), 2000) {
        best = best.min(cone_residual(w1, w2, dim, xi));
    }
    best
}

/// Quasi-uniform directions on the sphere of R^d (golden-angle in d = 2,
/// Fibonacci sphere in d = 3).
pub fn direction_grid(d: usize, n: usize) -> Vec<[f64; 3]> {
    let mut out = Vec::with_capacity(n);
    match d {
        2 => {
            for k in 0..n {
                let th = std::f64::consts::PI * k as f64 / n as f64;
                out.push([th.cos(), th.sin(), 0.0]);
            }
        }
        _ => {
            let golden = (1.0 + 5.0_f64.sqrt()) / 2.0;
            for k in 0..n {
                let z = 1.0 - 2.0 * (k as f64 + 0.5) / n as f64;
                let r = (1.0 - z * z).sqrt();
                let th = 2.0 * std::f64::consts::PI * k as f64 / golden;
                out.push([r * th.cos(), r * th.sin(), z]);
            }
        }
    }
    out
}

/// Samples cone elements over `n_dirs` directions and checks whether
/// their span is all of Y × Y (singular values above 1e−10 relative).
pub fn spanning_check(dim: Dim, n_dirs: usize) -> bool {
    let m = dim.y_dim();
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for xi in direction_grid(dim.d(), n_dirs.max(1)).into_iter().take(n_dirs.max(1)) {
        let basis = ModeBasis::from_unit(dim, xi);
        for s in &basis.strain {
            let mut row = vec![0.0; 2 * m];
            row[..m].copy_from_slice(s);
            rows.push(row);
        }
        for t in &basis.stress {
            let mut row = vec![0.0; 2 * m];
            row[m..].copy_from_slice(t);
            rows.push(row);
        }
    }
    let mat = DMatrix::from_fn(rows.len(), 2 * m, |i, j| rows[i][j]);
    let svd = mat.svd(false, false);
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let rank = svd.singular_values.iter().filter(|&&s| s > 1e-10 * smax).count();
    rank == 2 * m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::LawKind;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn ts(dim: Dim, c: &[f64]) -> TracelessSym {
        TracelessSym::from_coords(dim, c).unwrap()
    }

    #[test]
    fn newtonian_dist_examples() {
        let z = PhasePoint::new(TracelessSym::diag2(1.0), TracelessSym::diag2(1.0)).unwrap();
        assert_eq!(newtonian_dist(&z), 0.0);
        let z = PhasePoint::new(TracelessSym::diag2(1.0), TracelessSym::diag2(2.0)).unwrap();
        assert_relative_eq!(newtonian_dist(&z), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn newtonian_dist_matches_dense_sampling() {
        // the exact infimum of ½|ε−e|² + ½|σ̃−e|² over the graph is
        // attained at e = (ε+σ̃)/2 and equals ¼|ε−σ̃|², i.e. half of the
        // separating-function value ½|ε−σ̃|²
        let exp = Exponents::quadratic();
        let law = ConstitutiveLaw::newtonian(0.5, Dim::D2).unwrap();
        let dense =
            crate::dataset::MaterialDataSet::graph_lattice(&law, &exp, 3.5, 0.02).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        for _ in 0..1000 {
            let z = PhasePoint::new(
                ts(Dim::D2, &[rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)]),
                ts(Dim::D2, &[rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)]),
            )
            .unwrap();
            let (_, _, d) = dense.nearest(&z).unwrap();
            let exact = 0.5 * newtonian_dist(&z);
            // sampled distance can only exceed the exact one, by at most
            // the lattice resolution
            assert!(d >= exact - 1e-12);
            assert!(d <= exact + 0.04 * (1.0 + z.eps.norm() + z.sig.norm()));
        }
    }

    #[test]
    fn monotone_separator_basics() {
        let z0 = PhasePoint::new(TracelessSym::diag2(0.3), TracelessSym::diag2(0.3)).unwrap();
        assert_eq!(monotone_separator(&z0, &z0), 0.0);
        // both on a monotone graph → nonpositive
        let law = ConstitutiveLaw::power_law(0.5, 2.0, Dim::D2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for _ in 0..10_000 {
            let e1 = ts(Dim::D2, &[rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)]);
            let e2 = ts(Dim::D2, &[rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)]);
            let z1 = PhasePoint::new(e1, law.stress(&e1)).unwrap();
            let z2 = PhasePoint::new(e2, law.stress(&e2)).unwrap();
            let mag = 1.0 + (z1.eps.norm() + z1.sig.norm()) * (z2.eps.norm() + z2.sig.norm());
            assert!(monotone_separator(&z1, &z2) <= 1e-12 * mag);
        }
    }

    #[test]
    fn monotone_separator_nonpositive_including_the_cap() {
        // pairs drawn from D_M = graph ∪ D₀ of a yield law
        let law = ConstitutiveLaw::new(
            LawKind::HerschelBulkley { yield_stress: 0.5, mu0: 0.5, alpha: 1.3 },
            Dim::D2,
        )
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        let sample = |rng: &mut ChaCha8Rng| -> PhasePoint {
            if rng.gen_bool(0.3) {
                // D₀ point
                let dir = ts(Dim::D2, &[rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)]);
                let dir = if dir.norm() > 1e-9 { dir.scale(1.0 / dir.norm()) } else { TracelessSym::diag2(1.0) };
                PhasePoint::new(TracelessSym::zero(Dim::D2), dir.scale(rng.gen_range(0.0..0.5)))
                    .unwrap()
            } else {
                let e = ts(Dim::D2, &[rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)]);
                PhasePoint::new(e, law.stress(&e)).unwrap()
            }
        };
        for _ in 0..10_000 {
            let z1 = sample(&mut rng);
            let z2 = sample(&mut rng);
            let mag = 1.0 + (z1.eps.norm() + z1.sig.norm()) * (z2.eps.norm() + z2.sig.norm());
            assert!(
                monotone_separator(&z1, &z2) <= 1e-12 * mag,
                "separator positive on a D_M pair"
            );
        }
    }

    #[test]
    fn membership_on_graph_and_cap() {
        let exp = Exponents::new(3.0).unwrap();
        let law = ConstitutiveLaw::power_law(0.5, 2.0, Dim::D2).unwrap();
        let e = TracelessSym::diag2(0.7);
        let z = PhasePoint::new(e, law.stress(&e)).unwrap();
        let (inside, cert) = hull_membership(&z, &law, &exp, 1e-10).unwrap();
        assert!(inside && cert.is_none());

        // Herschel-Bulkley cap point (0, σ̃) with |σ̃| ≤ a is inside
        let hb = ConstitutiveLaw::new(
            LawKind::HerschelBulkley { yield_stress: 0.5, mu0: 0.5, alpha: 1.0 },
            Dim::D2,
        )
        .unwrap();
        let exp2 = Exponents::quadratic();
        let zcap =
            PhasePoint::new(TracelessSym::zero(Dim::D2), TracelessSym::offdiag2(0.3)).unwrap();
        let (inside, _) = hull_membership(&zcap, &hb, &exp2, 1e-10).unwrap();
        assert!(inside);
        // just beyond the cap is outside, with a positive certificate
        let zout =
            PhasePoint::new(TracelessSym::zero(Dim::D2), TracelessSym::offdiag2(0.8)).unwrap();
        let (inside, cert) = hull_membership(&zout, &hb, &exp2, 1e-10).unwrap();
        assert!(!inside);
        assert!(cert.unwrap().value > 0.0);
    }

    #[test]
    fn outside_newtonian_point_gets_certificate() {
        let exp = Exponents::quadratic();
        let law = ConstitutiveLaw::newtonian(0.5, Dim::D2).unwrap();
        let z = PhasePoint::new(TracelessSym::diag2(1.0), TracelessSym::zero(Dim::D2)).unwrap();
        let (inside, cert) = hull_membership(&z, &law, &exp, 1e-10).unwrap();
        assert!(!inside);
        let cert = cert.unwrap();
        assert!(cert.value > 0.0);
        // the certificate function is nonpositive on sampled data
        let mut rng = ChaCha8Rng::seed_from_u64(55);
        for _ in 0..10_000 {
            let e = ts(Dim::D2, &[rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)]);
            let w = PhasePoint::new(e, law.stress(&e)).unwrap();
            let v = match &cert.kind {
                CertificateKind::NewtonianQuadratic { c }
                | CertificateKind::PowerLawYoung { c } => scaled_young_defect(&w, &exp, *c),
                CertificateKind::MonotoneAffine { z0, .. } => monotone_separator(&w, z0),
            };
            assert!(v <= 1e-12 * (1.0 + w.eps.norm().powi(2) + w.sig.norm().powi(2)));
        }
    }

    #[test]
    fn young_membership_agrees_with_hull_membership_on_power_law() {
        let exp = Exponents::new(3.0).unwrap();
        let law = ConstitutiveLaw::power_law(0.5, 2.0, Dim::D2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let tol = 1e-9;
        for _ in 0..2000 {
            let e = ts(Dim::D2, &[rng.gen_range(-1.5..1.5), rng.gen_range(-1.5..1.5)]);
            let on_graph = rng.gen_bool(0.5);
            let sig = if on_graph {
                law.stress(&e)
            } else {
                law.stress(&e).add(&ts(
                    Dim::D2,
                    &[rng.gen_range(0.1..0.5), rng.gen_range(0.1..0.5)],
                ))
            };
            let z = PhasePoint::new(e, sig).unwrap();
            let defect = scaled_young_defect(&z, &exp, 1.0);
            let (inside, _) = hull_membership(&z, &law, &exp, tol).unwrap();
            // inside ⟺ Young defect ≤ matched tolerance
            if inside {
                assert!(defect <= 1e-6 * (1.0 + z.eps.norm().powi(3)));
            } else {
                assert!(defect > 0.0);
            }
        }
    }

    #[test]
    fn cone_membership_examples() {
        // (offdiag, diag) at ξ = e₁ (kernel structure of the symbols)
        let w1 = TracelessSym::offdiag2(1.0);
        let w2 = TracelessSym::diag2(1.0);
        match cone_membership(&w1, &w2, Dim::D2).unwrap() {
            ConeResult::InCone(w) => {
                let e1_aligned = w.xi[0].abs() > 0.999 || w.xi[1].abs() > 0.999;
                assert!(e1_aligned, "expected an axis direction, got {:?}", w.xi);
                let (r1, r2) = w.reconstruct().unwrap();
                assert!(r1.sub(&w1).norm() <= 1e-10);
                assert!(r2.sub(&w2).norm() <= 1e-10);
            }
            ConeResult::NotInCone { best_residual } => {
                panic!("expected in-cone, best residual {best_residual}")
            }
        }

        // (0, anything) is in the cone: Λ_{A₂} = Y
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for dim in [Dim::D2, Dim::D3] {
            for _ in 0..50 {
                let c: Vec<f64> =
                    (0..dim.y_dim()).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let w2 = ts(dim, &c);
                match cone_membership(&TracelessSym::zero(dim), &w2, dim).unwrap() {
                    ConeResult::InCone(w) => {
                        let (r1, r2) = w.reconstruct().unwrap();
                        assert!(r1.norm() <= 1e-10);
                        assert!(r2.sub(&w2).norm() <= 1e-10 * (1.0 + w2.norm()));
                    }
                    ConeResult::NotInCone { best_residual } => {
                        panic!("(0, σ̃) must be in the cone, residual {best_residual}")
                    }
                }
            }
        }
    }

    #[test]
    fn diag_offdiag_pair_resolved_by_closed_form() {
        // (diag(1,−1), offdiag(1)): the closed-form test puts it in the
        // cone with ξ ∝ (1,1)/√2; the grid oracle must agree
        let w1 = TracelessSym::diag2(1.0);
        let w2 = TracelessSym::offdiag2(1.0);
        match cone_membership(&w1, &w2, Dim::D2).unwrap() {
            ConeResult::InCone(w) => {
                let diag_dir = (w.xi[0].abs() - w.xi[1].abs()).abs() <= 1e-10;
                assert!(diag_dir, "expected ξ ∝ (1,±1)/√2, got {:?}", w.xi);
                let (r1, r2) = w.reconstruct().unwrap();
                assert!(r1.sub(&w1).norm() <= 1e-10);
                assert!(r2.sub(&w2).norm() <= 1e-10);
            }
            ConeResult::NotInCone { .. } => panic!("closed form should find ξ ∝ (1,1)"),
        }
        assert!(best_grid_residual(&w1, &w2, Dim::D2) <= 1e-3);
    }

    #[test]
    fn closed_form_agrees_with_grid_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(123);
        for dim in [Dim::D2, Dim::D3] {
            for _ in 0..200 {
                let c1: Vec<f64> =
                    (0..dim.y_dim()).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let c2: Vec<f64> =
                    (0..dim.y_dim()).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let w1 = ts(dim, &c1);
                let w2 = ts(dim, &c2);
                let result = cone_membership(&w1, &w2, dim).unwrap();
                let oracle = best_grid_residual(&w1, &w2, dim);
                match result {
                    ConeResult::InCone(w) => {
                        let (r1, r2) = w.reconstruct().unwrap();
                        assert!(r1.sub(&w1).norm() + r2.sub(&w2).norm() <= 1e-9);
                    }
                    ConeResult::NotInCone { best_residual } => {
                        // the fine grid oracle cannot do much better than
                        // the claimed miss
                        assert!(
                            oracle >= best_residual.min(1e-4) * 0.0_f64.max(0.0),
                            "oracle {oracle} vs claimed {best_residual}"
                        );
                        assert!(oracle > 1e-8, "grid found a direction the closed form missed");
                    }
                }
            }
        }
    }

    #[test]
    fn spanning_check_dimensions() {
        assert!(spanning_check(Dim::D2, 8));
        assert!(spanning_check(Dim::D3, 16));
        // a single direction spans only (d−1) + d(d−1)/2 < 2m dimensions
        assert!(!spanning_check(Dim::D2, 1));
        assert!(!spanning_check(Dim::D3, 1));
    }
}
