//! Per-mode constraint projections and the pseudo-spectral convective
//! term.
//!
//! All operations act on spectral coefficients with the unitary transform
//! convention; the derivative symbol is 2πiξ for integer modes ξ, zeroed
//! on Nyquist-carrying modes.

use crate::error::{Error, Result};
use crate::phase::TracelessSym;
use crate::spectral::fft::{hermitize, Fft};
use crate::spectral::field::{complex_matrix_to_coords, SpectralSym, SpectralVec};
use crate::spectral::grid::TorusGrid;
use crate::spectral::symbols::{project_span, SymbolBasis};
use num_complex::Complex64;
use std::f64::consts::PI;

/// Preconditions on constraint residuals are enforced at this level.
pub const PRECONDITION_TOL: f64 = 1e-8;
/// Mean-force rejection threshold (relative to the force scale).
const MEAN_FORCE_TOL: f64 = 1e-12;

/// Orthogonal projection of ε̂ onto the admissible strain subspace:
/// per nonzero mode onto Y_ξ, zero mode pinned to ε₀, Nyquist modes
/// zeroed. Idempotent; the result is the symmetric gradient of a unique
/// zero-mean divergence-free velocity.
pub fn project_strain(spec: &mut SpectralSym, basis: &SymbolBasis, eps0: &TracelessSym) {
    let grid = basis.grid();
    let m = grid.dim().y_dim();
    let scale = (grid.num_nodes() as f64).sqrt();
    for mode in grid.modes() {
        if mode.is_zero {
            for k in 0..m {
                spec.comp[k][mode.flat] = Complex64::new(eps0.coords()[k] * scale, 0.0);
            }
            continue;
        }
        match basis.at(mode.flat) {
            Some(b) => {
                let mut coords: Vec<Complex64> =
                    (0..m).map(|k| spec.comp[k][mode.flat]).collect();
                project_span(&b.strain, &mut coords);
                spec.set(mode.flat, &coords);
            }
            None => {
                // Nyquist: no representable strain there
                for k in 0..m {
                    spec.comp[k][mode.flat] = Complex64::default();
                }
            }
        }
    }
    for c in spec.comp.iter_mut() {
        hermitize(c, grid);
    }
}

/// Distance of ε̂ from the admissible strain subspace, relative to its
/// norm. Zero mode ignored (means are prescribed separately).
pub fn strain_constraint_defect(spec: &SpectralSym, basis: &SymbolBasis) -> f64 {
    let grid = basis.grid();
    let m = grid.dim().y_dim();
    let mut off = 0.0;
    let mut total = 0.0;
    for mode in grid.modes() {
        if mode.is_zero {
            continue;
        }
        let mut coords: Vec<Complex64> = (0..m).map(|k| spec.comp[k][mode.flat]).collect();
        let norm2: f64 = coords.iter().map(|c| c.norm_sqr()).sum();
        total += norm2;
        match basis.at(mode.flat) {
            Some(b) => {
                let before = coords.clone();
                project_span(&b.strain, &mut coords);
                off += before
                    .iter()
                    .zip(&coords)
                    .map(|(a, b)| (a - b).norm_sqr())
                    .sum::<f64>();
            }
            None => off += norm2,
        }
    }
    off.sqrt() / (1.0 + total.sqrt())
}

/// Recovers the unique zero-mean divergence-free velocity with
/// sym ∇u = ε − ε₀ via the symbol inverse û = ε̂ ξ/(πi|ξ|²).
pub fn recover_velocity(spec: &SpectralSym, basis: &SymbolBasis) -> Result<SpectralVec> {
    let defect = strain_constraint_defect(spec, basis);
    if defect > PRECONDITION_TOL {
        return Err(Error::ConstraintResidualTooLarge {
            residual: defect,
            limit: PRECONDITION_TOL,
        });
    }
    let grid = basis.grid();
    let d = grid.dim().d();
    let mut u = SpectralVec::zeros(d, grid.num_nodes());
    for mode in grid.modes() {
        if basis.at(mode.flat).is_none() {
            continue;
        }
        let eps_m =
            crate::spectral::field::coords_to_complex_matrix(grid.dim(), &spec.get(mode.flat));
        // (ε̂ ξ)_i / (πi |ξ|²)
        let denom = Complex64::new(0.0, PI * mode.xi_norm2);
        for i in 0..d {
            let mut acc = Complex64::default();
            for j in 0..d {
                acc += eps_m[(i, j)] * mode.xi[j] as f64;
            }
            u.comp[i][mode.flat] = acc / denom;
        }
    }
    for c in u.comp.iter_mut() {
        hermitize(c, grid);
    }
    Ok(u)
}

/// Symmetric gradient ε̂ = 2πi (û ⊙ ξ) of a spectral velocity.
pub fn sym_grad(u: &SpectralVec, grid: &TorusGrid) -> SpectralSym {
    let d = grid.dim().d();
    let mut out = SpectralSym::zeros(grid.dim(), grid.num_nodes());
    for mode in grid.modes() {
        if mode.is_zero || mode.is_nyquist {
            continue;
        }
        let uv = u.get(mode.flat);
        let two_pi_i = Complex64::new(0.0, 2.0 * PI);
        let mut m = nalgebra::DMatrix::from_element(d, d, Complex64::default());
        for i in 0..d {
            for j in 0..d {
                m[(i, j)] =
                    two_pi_i * 0.5 * (uv[i] * mode.xi[j] as f64 + uv[j] * mode.xi[i] as f64);
            }
        }
        let coords = complex_matrix_to_coords(grid.dim(), &m);
        out.set(mode.flat, &coords);
    }
    out
}

/// Spectral divergence residual sqrt(Σ |ξ̂·û|²)/(1+‖û‖).
pub fn divergence_residual(u: &SpectralVec, grid: &TorusGrid) -> f64 {
    let d = grid.dim().d();
    let mut acc = 0.0;
    for mode in grid.modes() {
        if mode.is_zero || mode.is_nyquist {
            continue;
        }
        let uv = u.get(mode.flat);
        let mut dot = Complex64::default();
        for i in 0..d {
            dot += uv[i] * (mode.xi[i] as f64 / mode.xi_norm2.sqrt());
        }
        acc += dot.norm_sqr();
    }
    acc.sqrt() / (1.0 + u.norm())
}

/// The unique Y_ξ-valued particular stress balancing the transversal part
/// of the force: (σ̂ξ)⊥ = i f̂⊥/(2π) per nonzero mode.
///
/// The force must have zero mean; Nyquist content is not representable
/// and must vanish.
pub fn particular_stress(f: &SpectralVec, basis: &SymbolBasis) -> Result<SpectralSym> {
    let grid = basis.grid();
    let d = grid.dim().d();
    let scale = f.norm();
    let mean_norm: f64 =
        (0..d).map(|k| f.comp[k][0].norm_sqr()).sum::<f64>().sqrt();
    if mean_norm > MEAN_FORCE_TOL * (1.0 + scale) {
        return Err(Error::NonzeroMeanForce);
    }
    let mut out = SpectralSym::zeros(grid.dim(), grid.num_nodes());
    for mode in grid.modes() {
        let Some(_) = basis.at(mode.flat) else { continue };
        let fv = f.get(mode.flat);
        // transversal component of f̂
        let mut xi = [0.0; 3];
        for k in 0..d {
            xi[k] = mode.xi[k] as f64;
        }
        let fxi: Complex64 = (0..d).map(|k| fv[k] * xi[k]).sum();
        let mut w = [Complex64::default(); 3];
        for k in 0..d {
            w[k] = fv[k] - fxi * xi[k] / mode.xi_norm2;
        }
        // b = i f̂⊥ / (π |ξ|²); σ̂_p = b ⊙ ξ
        let coef = Complex64::new(0.0, 1.0) / (PI * mode.xi_norm2);
        let mut m = nalgebra::DMatrix::from_element(d, d, Complex64::default());
        for i in 0..d {
            for j in 0..d {
                m[(i, j)] = coef * 0.5 * (w[i] * xi[j] + w[j] * xi[i]);
            }
        }
        let coords = complex_matrix_to_coords(grid.dim(), &m);
        out.set(mode.flat, &coords);
    }
    for c in out.comp.iter_mut() {
        hermitize(c, grid);
    }
    Ok(out)
}

/// Affine projection onto the momentum constraint set:
/// σ̂ ← σ̂_p + P_{Y_ξ^⊥}(σ̂ − σ̂_p) per nonzero mode, zero mode pinned to
/// σ̃₀. Per-mode orthogonality makes this the closest admissible field.
pub fn project_stress(
    spec: &mut SpectralSym,
    basis: &SymbolBasis,
    sig_part: &SpectralSym,
    sig0: &TracelessSym,
) {
    let grid = basis.grid();
    let m = grid.dim().y_dim();
    let scale = (grid.num_nodes() as f64).sqrt();
    for mode in grid.modes() {
        if mode.is_zero {
            for k in 0..m {
                spec.comp[k][mode.flat] = Complex64::new(sig0.coords()[k] * scale, 0.0);
            }
            continue;
        }
        // Nyquist modes carry no momentum constraint: leave them as they
        // are (closest point is the input itself)
        let Some(b) = basis.at(mode.flat) else { continue };
        let part = sig_part.get(mode.flat);
        let mut coords: Vec<Complex64> =
            (0..m).map(|k| spec.comp[k][mode.flat] - part[k]).collect();
        project_span(&b.stress, &mut coords);
        for (k, c) in coords.iter().enumerate() {
            spec.comp[k][mode.flat] = part[k] + c;
        }
    }
    for c in spec.comp.iter_mut() {
        hermitize(c, grid);
    }
}

/// Normalized momentum residual of (σ̂, π̂, f̂):
/// r(ξ) = (σ̂ξ − π̂ξ − i f̂/(2π)) / |ξ| summed over nonzero modes, which is
/// the balance −2πi σ̂ξ + 2πi π̂ξ = f̂ divided by −2πi.
pub fn momentum_residual(
    sig: &SpectralSym,
    pi: &[Complex64],
    f: &SpectralVec,
    basis: &SymbolBasis,
) -> f64 {
    let grid = basis.grid();
    let d = grid.dim().d();
    let mut acc = 0.0;
    let mut scale = 0.0;
    for mode in grid.modes() {
        if mode.is_zero || mode.is_nyquist {
            continue;
        }
        let sm =
            crate::spectral::field::coords_to_complex_matrix(grid.dim(), &sig.get(mode.flat));
        let fv = f.get(mode.flat);
        let norm = mode.xi_norm2.sqrt();
        for i in 0..d {
            let mut sx = Complex64::default();
            for j in 0..d {
                sx += sm[(i, j)] * mode.xi[j] as f64;
            }
            let r = sx - pi[mode.flat] * mode.xi[i] as f64
                - Complex64::new(0.0, 1.0) * fv[i] / (2.0 * PI);
            acc += (r / norm).norm_sqr();
            scale += (sx / norm).norm_sqr();
        }
    }
    acc.sqrt() / (1.0 + scale.sqrt() + f.norm() / (2.0 * PI))
}

/// Zero-mean pressure closing the momentum balance:
/// π̂ = ξᵀσ̂ξ/|ξ|² + ξ·f̂/(2πi|ξ|²). With f = 0 this is the kernel
/// functional π_σ̃ evaluated mode by mode.
pub fn pressure_from_stress(
    sig: &SpectralSym,
    f: &SpectralVec,
    basis: &SymbolBasis,
) -> Result<Vec<Complex64>> {
    let grid = basis.grid();
    let d = grid.dim().d();
    let mut pi = vec![Complex64::default(); grid.num_nodes()];
    for mode in grid.modes() {
        let Some(b) = basis.at(mode.flat) else { continue };
        let coords = sig.get(mode.flat);
        let fv = f.get(mode.flat);
        let fxi: Complex64 = (0..d).map(|k| fv[k] * mode.xi[k] as f64).sum();
        pi[mode.flat] = b.pressure_of(&coords[..grid.dim().y_dim()])
            + fxi / Complex64::new(0.0, 2.0 * PI * mode.xi_norm2);
    }
    let res = momentum_residual(sig, &pi, f, basis);
    if res > PRECONDITION_TOL {
        return Err(Error::ConstraintResidualTooLarge { residual: res, limit: PRECONDITION_TOL });
    }
    hermitize(&mut pi, grid);
    Ok(pi)
}

/// Zeroes modes with any |ξ_i| > n/3 (2/3-rule dealiasing).
pub fn dealias(comp: &mut [Vec<Complex64>], grid: &TorusGrid) {
    let cutoff = grid.n() as i64 / 3;
    for mode in grid.modes() {
        if mode.xi.iter().any(|&x| x.abs() > cutoff) {
            for c in comp.iter_mut() {
                c[mode.flat] = Complex64::default();
            }
        }
    }
}

/// Pseudo-spectral div(u ⊗ u) with 2/3-rule dealiasing; the zero mode is
/// discarded (a constant force is gradient-absorbable in the mean-zero
/// setting).
pub fn convective_force(u_phys: &[[f64; 3]], grid: &TorusGrid, fft: &Fft) -> SpectralVec {
    let d = grid.dim().d();
    // dealias the velocity before forming products
    let mut u_spec = SpectralVec::from_values(u_phys, grid, fft);
    dealias(&mut u_spec.comp, grid);
    let u_clean = u_spec.to_values(grid, fft);

    let mut out = SpectralVec::zeros(d, grid.num_nodes());
    // T_ij = u_i u_j, transformed once per (i,j) pair
    for i in 0..d {
        for j in i..d {
            let prod: Vec<f64> = u_clean.iter().map(|v| v[i] * v[j]).collect();
            let t_hat = fft.forward_real(&prod, grid);
            for mode in grid.modes() {
                if mode.is_zero || mode.is_nyquist {
                    continue;
                }
                let two_pi_i = Complex64::new(0.0, 2.0 * PI);
                // f_i += ∂_j T_ij ; symmetric contribution for i ≠ j
                out.comp[i][mode.flat] += two_pi_i * mode.xi[j] as f64 * t_hat[mode.flat];
                if i != j {
                    out.comp[j][mode.flat] += two_pi_i * mode.xi[i] as f64 * t_hat[mode.flat];
                }
            }
        }
    }
    dealias(&mut out.comp, grid);
    for c in out.comp.iter_mut() {
        hermitize(c, grid);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phase::Dim;
    use crate::spectral::symbols::build_symbols;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn random_spec_sym(grid: &TorusGrid, fft: &Fft, rng: &mut impl Rng) -> SpectralSym {
        let values: Vec<TracelessSym> = (0..grid.num_nodes())
            .map(|_| {
                let c: Vec<f64> =
                    (0..grid.dim().y_dim()).map(|_| rng.gen_range(-1.0..1.0)).collect();
                TracelessSym::from_coords(grid.dim(), &c).unwrap()
            })
            .collect();
        SpectralSym::from_values(&values, grid, fft)
    }

    #[test]
    fn project_strain_is_idempotent_and_contractive() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for (dim, n) in [(Dim::D2, 8), (Dim::D3, 4)] {
            let grid = TorusGrid::new(dim, n).unwrap();
            let fft = Fft::new(&grid);
            let basis = build_symbols(&grid).unwrap();
            let eps0 = TracelessSym::zero(dim);
            let mut spec = random_spec_sym(&grid, &fft, &mut rng);
            let norm_before = spec.norm();
            project_strain(&mut spec, &basis, &eps0);
            let after_once = spec.clone();
            assert!(spec.norm() <= norm_before * (1.0 + 1e-13));
            project_strain(&mut spec, &basis, &eps0);
            let diff: f64 = spec
                .comp
                .iter()
                .flatten()
                .zip(after_once.comp.iter().flatten())
                .map(|(a, b)| (a - b).norm_sqr())
                .sum::<f64>()
                .sqrt();
            assert!(diff <= 1e-12 * (1.0 + after_once.norm()));
            assert!(strain_constraint_defect(&spec, &basis) <= 1e-13);
        }
    }

    #[test]
    fn velocity_round_trip_on_analytic_shear() {
        // u = (sin 2πx₂, 0): ε = sym∇u has only off-diagonal πcos(2πx₂)
        let grid = TorusGrid::new(Dim::D2, 16).unwrap();
        let fft = Fft::new(&grid);
        let basis = build_symbols(&grid).unwrap();
        let u_true: Vec<[f64; 3]> = (0..grid.num_nodes())
            .map(|flat| {
                let x = grid.node_coords(flat);
                [(2.0 * PI * x[1]).sin(), 0.0, 0.0]
            })
            .collect();
        let eps_values: Vec<TracelessSym> = (0..grid.num_nodes())
            .map(|flat| {
                let x = grid.node_coords(flat);
                TracelessSym::offdiag2(PI * (2.0 * PI * x[1]).cos())
            })
            .collect();
        let spec = SpectralSym::from_values(&eps_values, &grid, &fft);
        let u_spec = recover_velocity(&spec, &basis).unwrap();
        assert!(divergence_residual(&u_spec, &grid) <= 1e-12);
        let u = u_spec.to_values(&grid, &fft);
        for (a, b) in u.iter().zip(&u_true) {
            for k in 0..2 {
                assert!((a[k] - b[k]).abs() <= 1e-12, "{} vs {}", a[k], b[k]);
            }
        }
    }

    #[test]
    fn velocity_round_trip_3d_abc_flow() {
        // divergence-free ABC-type field; sym∇ → recover → sym∇ is fixed
        let grid = TorusGrid::new(Dim::D3, 8).unwrap();
        let fft = Fft::new(&grid);
        let basis = build_symbols(&grid).unwrap();
        let u_true: Vec<[f64; 3]> = (0..grid.num_nodes())
            .map(|flat| {
                let x = grid.node_coords(flat);
                let (a, b, c) = (1.0, 0.7, 0.43);
                [
                    a * (2.0 * PI * x[2]).sin() + c * (2.0 * PI * x[1]).cos(),
                    b * (2.0 * PI * x[0]).sin() + a * (2.0 * PI * x[2]).cos(),
                    c * (2.0 * PI * x[1]).sin() + b * (2.0 * PI * x[0]).cos(),
                ]
            })
            .collect();
        let u_spec = SpectralVec::from_values(&u_true, &grid, &fft);
        assert!(divergence_residual(&u_spec, &grid) <= 1e-12);
        let eps = sym_grad(&u_spec, &grid);
        let u_rec = recover_velocity(&eps, &basis).unwrap();
        let eps_again = sym_grad(&u_rec, &grid);
        let diff: f64 = eps
            .comp
            .iter()
            .flatten()
            .zip(eps_again.comp.iter().flatten())
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt();
        assert!(diff <= 1e-10 * (1.0 + eps.norm()));
        // and u is reproduced (both zero-mean, div-free)
        let du: f64 = u_rec
            .comp
            .iter()
            .flatten()
            .zip(u_spec.comp.iter().flatten())
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt();
        assert!(du <= 1e-10 * (1.0 + u_spec.norm()));
    }

    #[test]
    fn recover_velocity_rejects_incompatible_input() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let grid = TorusGrid::new(Dim::D2, 8).unwrap();
        let fft = Fft::new(&grid);
        let basis = build_symbols(&grid).unwrap();
        let spec = random_spec_sym(&grid, &fft, &mut rng);
        assert!(matches!(
            recover_velocity(&spec, &basis),
            Err(Error::ConstraintResidualTooLarge { .. })
        ));
    }

    #[test]
    fn pure_stress_content_projects_to_zero_strain() {
        // a field built from Y_ξ^⊥ content at one mode dies under the
        // strain projection
        let grid = TorusGrid::new(Dim::D2, 8).unwrap();
        let basis = build_symbols(&grid).unwrap();
        let flat = 8; // ξ = e₁
        let b = basis.at(flat).unwrap();
        let mut spec = SpectralSym::zeros(Dim::D2, grid.num_nodes());
        let vals: Vec<Complex64> =
            b.stress[0].iter().map(|&v| Complex64::new(v, 0.0)).collect();
        spec.set(flat, &vals);
        project_strain(&mut spec, &basis, &TracelessSym::zero(Dim::D2));
        assert!(spec.norm() <= 1e-13);
    }

    #[test]
    fn particular_stress_trivial_and_gradient_forces() {
        let grid = TorusGrid::new(Dim::D2, 8).unwrap();
        let fft = Fft::new(&grid);
        let basis = build_symbols(&grid).unwrap();
        // f = 0 → σ̃_part = 0
        let zero = SpectralVec::zeros(2, grid.num_nodes());
        assert!(particular_stress(&zero, &basis).unwrap().norm() <= 1e-15);
        // f = ∇g: longitudinal forces are absorbed by the pressure
        let g: Vec<f64> = (0..grid.num_nodes())
            .map(|flat| {
                let x = grid.node_coords(flat);
                (2.0 * PI * x[0]).cos() * (2.0 * PI * x[1]).sin()
            })
            .collect();
        let g_hat = fft.forward_real(&g, &grid);
        let mut f = SpectralVec::zeros(2, grid.num_nodes());
        for mode in grid.modes() {
            if mode.is_zero || mode.is_nyquist {
                continue;
            }
            for k in 0..2 {
                f.comp[k][mode.flat] =
                    Complex64::new(0.0, 2.0 * PI * mode.xi[k] as f64) * g_hat[mode.flat];
            }
        }
        let part = particular_stress(&f, &basis).unwrap();
        assert!(part.norm() <= 1e-12 * (1.0 + f.norm()));
    }

    #[test]
    fn particular_stress_balances_the_force() {
        // f = (cos 2πx₂, 0): residual of −div σ̃ + ∇π − f checked
        // spectrally
        let grid = TorusGrid::new(Dim::D2, 16).unwrap();
        let fft = Fft::new(&grid);
        let basis = build_symbols(&grid).unwrap();
        let f_phys: Vec<[f64; 3]> = (0..grid.num_nodes())
            .map(|flat| {
                let x = grid.node_coords(flat);
                [(2.0 * PI * x[1]).cos(), 0.0, 0.0]
            })
            .collect();
        let f = SpectralVec::from_values(&f_phys, &grid, &fft);
        let part = particular_stress(&f, &basis).unwrap();
        let pi = pressure_from_stress(&part, &f, &basis).unwrap();
        assert!(momentum_residual(&part, &pi, &f, &basis) <= 1e-12);
    }

    #[test]
    fn pressure_rejects_unbalanced_stress() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let grid = TorusGrid::new(Dim::D2, 8).unwrap();
        let fft = Fft::new(&grid);
        let basis = build_symbols(&grid).unwrap();
        let sig = random_spec_sym(&grid, &fft, &mut rng);
        let f = SpectralVec::zeros(2, grid.num_nodes());
        assert!(matches!(
            pressure_from_stress(&sig, &f, &basis),
            Err(Error::ConstraintResidualTooLarge { .. })
        ));
    }

    #[test]
    fn mean_force_is_rejected() {
        let grid = TorusGrid::new(Dim::D2, 8).unwrap();
        let basis = build_symbols(&grid).unwrap();
        let mut f = SpectralVec::zeros(2, grid.num_nodes());
        f.comp[0][0] = Complex64::new(1.0, 0.0);
        assert!(matches!(particular_stress(&f, &basis), Err(Error::NonzeroMeanForce)));
    }

    #[test]
    fn project_stress_idempotent_and_momentum_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for (dim, n) in [(Dim::D2, 8), (Dim::D3, 4)] {
            let grid = TorusGrid::new(dim, n).unwrap();
            let fft = Fft::new(&grid);
            let basis = build_symbols(&grid).unwrap();
            let d = dim.d();
            // random zero-mean force without Nyquist content
            let mut f = SpectralVec::zeros(d, grid.num_nodes());
            for mode in grid.modes() {
                if mode.is_zero || mode.is_nyquist {
                    continue;
                }
                for k in 0..d {
                    f.comp[k][mode.flat] =
                        Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                }
            }
            for c in f.comp.iter_mut() {
                hermitize(c, &grid);
            }
            let part = particular_stress(&f, &basis).unwrap();
            let sig0 = TracelessSym::zero(dim);
            let mut sig = random_spec_sym(&grid, &fft, &mut rng);
            project_stress(&mut sig, &basis, &part, &sig0);
            let once = sig.clone();
            project_stress(&mut sig, &basis, &part, &sig0);
            let diff: f64 = sig
                .comp
                .iter()
                .flatten()
                .zip(once.comp.iter().flatten())
                .map(|(a, b)| (a - b).norm_sqr())
                .sum::<f64>()
                .sqrt();
            assert!(diff <= 1e-12 * (1.0 + once.norm()));
            let pi = pressure_from_stress(&sig, &f, &basis).unwrap();
            assert!(momentum_residual(&sig, &pi, &f, &basis) <= 1e-12);
            // idempotence on the affine set: projecting the particular
            // stress returns it
            let mut p2 = part.clone();
            project_stress(&mut p2, &basis, &part, &sig0);
            let dp: f64 = p2
                .comp
                .iter()
                .flatten()
                .zip(part.comp.iter().flatten())
                .map(|(a, b)| (a - b).norm_sqr())
                .sum::<f64>()
                .sqrt();
            assert!(dp <= 1e-12 * (1.0 + part.norm()));
        }
    }

    #[test]
    fn stress_projection_kills_strain_subspace_content_without_force() {
        // f = 0: a pure Y_ξ stress amplitude is orthogonal to the
        // homogeneous constraint kernel and must vanish
        let grid = TorusGrid::new(Dim::D2, 8).unwrap();
        let basis = build_symbols(&grid).unwrap();
        let flat = 8; // ξ = e₁
        let b = basis.at(flat).unwrap();
        let mut sig = SpectralSym::zeros(Dim::D2, grid.num_nodes());
        let vals: Vec<Complex64> =
            b.strain[0].iter().map(|&v| Complex64::new(v, 0.0)).collect();
        sig.set(flat, &vals);
        let part = SpectralSym::zeros(Dim::D2, grid.num_nodes());
        project_stress(&mut sig, &basis, &part, &TracelessSym::zero(Dim::D2));
        assert!(sig.norm() <= 1e-13);
    }

    #[test]
    fn pressure_formula_at_single_mode() {
        // ξ = e₁, σ̂ = diag(1,−1) at that mode, f = 0 → π̂ = 1 there
        let grid = TorusGrid::new(Dim::D2, 8).unwrap();
        let basis = build_symbols(&grid).unwrap();
        let mut sig = SpectralSym::zeros(Dim::D2, grid.num_nodes());
        let diag = TracelessSym::diag2(1.0);
        let coords: Vec<Complex64> =
            diag.coords().iter().map(|&v| Complex64::new(v, 0.0)).collect();
        sig.set(8, &coords);
        // make it Hermitian so the pressure is real (σ̂(−e₁) = conj)
        let conj_flat = 7 * 8;
        sig.set(conj_flat, &coords);
        let f = SpectralVec::zeros(2, grid.num_nodes());
        let pi = pressure_from_stress(&sig, &f, &basis).unwrap();
        assert!((pi[8] - Complex64::new(1.0, 0.0)).norm() <= 1e-13);
    }

    #[test]
    fn manufactured_pressure_triple_is_recovered() {
        // choose σ̃ and π, define f = −div σ̃ + ∇π, recover π back
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let grid = TorusGrid::new(Dim::D2, 16).unwrap();
        let fft = Fft::new(&grid);
        let basis = build_symbols(&grid).unwrap();
        let sig = {
            let mut s = random_spec_sym(&grid, &fft, &mut rng);
            // strip Nyquist so the balance is representable
            for mode in grid.modes() {
                if mode.is_nyquist || mode.is_zero {
                    for c in s.comp.iter_mut() {
                        c[mode.flat] = Complex64::default();
                    }
                }
            }
            s
        };
        let pi_true: Vec<f64> = (0..grid.num_nodes())
            .map(|flat| {
                let x = grid.node_coords(flat);
                (2.0 * PI * x[0]).sin() * (4.0 * PI * x[1]).cos()
            })
            .collect();
        let pi_hat = fft.forward_real(&pi_true, &grid);
        let mut f = SpectralVec::zeros(2, grid.num_nodes());
        for mode in grid.modes() {
            if mode.is_zero || mode.is_nyquist {
                continue;
            }
            let sm = crate::spectral::field::coords_to_complex_matrix(
                grid.dim(),
                &sig.get(mode.flat),
            );
            let two_pi_i = Complex64::new(0.0, 2.0 * PI);
            for i in 0..2 {
                let mut div = Complex64::default();
                for j in 0..2 {
                    div += two_pi_i * mode.xi[j] as f64 * sm[(i, j)];
                }
                f.comp[i][mode.flat] =
                    -div + two_pi_i * mode.xi[i] as f64 * pi_hat[mode.flat];
            }
        }
        let pi_rec = pressure_from_stress(&sig, &f, &basis).unwrap();
        let err: f64 = pi_rec
            .iter()
            .zip(&pi_hat)
            .skip(1)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt();
        assert!(err <= 1e-12 * (1.0 + pi_hat.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()));
    }

    #[test]
    fn convective_force_trivial_cases() {
        let grid = TorusGrid::new(Dim::D2, 16).unwrap();
        let fft = Fft::new(&grid);
        // u = 0 → 0
        let zero = vec![[0.0; 3]; grid.num_nodes()];
        assert!(convective_force(&zero, &grid, &fft).norm() <= 1e-14);
        // parallel shear: u = (sin 2πx₂, 0) → (u·∇)u = 0
        let shear: Vec<[f64; 3]> = (0..grid.num_nodes())
            .map(|flat| {
                let x = grid.node_coords(flat);
                [(2.0 * PI * x[1]).sin(), 0.0, 0.0]
            })
            .collect();
        assert!(convective_force(&shear, &grid, &fft).norm() <= 1e-12);
    }

    #[test]
    fn taylor_green_convection_is_a_gradient() {
        // u = A(sin x cos y, −cos x sin y) (angular 2π): div(u⊗u) equals
        // πA²(sin 4πx, sin 4πy), a pure gradient, so its transversal part
        // vanishes
        let grid = TorusGrid::new(Dim::D2, 16).unwrap();
        let fft = Fft::new(&grid);
        let a = 0.8;
        let u: Vec<[f64; 3]> = (0..grid.num_nodes())
            .map(|flat| {
                let x = grid.node_coords(flat);
                let (sx, cx) = (2.0 * PI * x[0]).sin_cos();
                let (sy, cy) = (2.0 * PI * x[1]).sin_cos();
                [a * sx * cy, -a * cx * sy, 0.0]
            })
            .collect();
        let f = convective_force(&u, &grid, &fft);
        let expect: Vec<[f64; 3]> = (0..grid.num_nodes())
            .map(|flat| {
                let x = grid.node_coords(flat);
                [
                    PI * a * a * (4.0 * PI * x[0]).sin(),
                    PI * a * a * (4.0 * PI * x[1]).sin(),
                    0.0,
                ]
            })
            .collect();
        let expect_spec = SpectralVec::from_values(&expect, &grid, &fft);
        let diff: f64 = f
            .comp
            .iter()
            .flatten()
            .zip(expect_spec.comp.iter().flatten())
            .map(|(x, y)| (x - y).norm_sqr())
            .sum::<f64>()
            .sqrt();
        assert!(diff <= 1e-11 * (1.0 + expect_spec.norm()), "diff = {diff}");
        // transversal part vanishes mode by mode
        for mode in grid.modes() {
            if mode.is_zero || mode.is_nyquist {
                continue;
            }
            let fv = f.get(mode.flat);
            let fxi: Complex64 =
                (0..2).map(|k| fv[k] * mode.xi[k] as f64).sum::<Complex64>() / mode.xi_norm2;
            for k in 0..2 {
                let trans = fv[k] - fxi * mode.xi[k] as f64;
                assert!(trans.norm() <= 1e-11);
            }
        }
    }
}
