//! Per-mode kernel bases of the constraint operators.
//!
//! For a nonzero mode ξ, admissible strain amplitudes live in
//! Y_ξ = {a⊙ξ : a ⊥ ξ} (dimension d−1) and homogeneous stress amplitudes
//! in its Frobenius complement Y_ξ^⊥ = {σ̃ : σ̃ξ ∥ ξ} (dimension d(d−1)/2).
//! Bases depend only on the ray of ξ and are cached per primitive
//! direction.

use crate::error::Result;
use crate::phase::{Dim, TracelessSym};
use crate::spectral::grid::TorusGrid;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use std::collections::HashMap;
use std::sync::Arc;

/// Orthonormal kernel bases for one ray, in Y coordinates.
#[derive(Debug)]
pub struct ModeBasis {
    /// Unit direction ξ/|ξ|.
    pub xi_unit: [f64; 3],
    /// Basis of Y_ξ (d−1 coordinate vectors).
    pub strain: Vec<Vec<f64>>,
    /// Basis of Y_ξ^⊥ (d(d−1)/2 coordinate vectors).
    pub stress: Vec<Vec<f64>>,
    /// Row vector evaluating π_σ̃ = ξᵀσ̃ξ/|ξ|² on coordinates.
    pub pressure: Vec<f64>,
}

impl ModeBasis {
    fn build(dim: Dim, xi: &[i64; 3]) -> Self {
        let norm = ((xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2]) as f64).sqrt();
        let mut xi_unit = [0.0; 3];
        for k in 0..dim.d() {
            xi_unit[k] = xi[k] as f64 / norm;
        }
        Self::from_unit(dim, xi_unit)
    }

    /// Kernel bases for an arbitrary unit direction (also used outside the
    /// grid context, e.g. by the characteristic-cone tests).
    pub fn from_unit(dim: Dim, xi_unit: [f64; 3]) -> Self {
        let d = dim.d();
        let m = dim.y_dim();
        let xi_v = DVector::from_iterator(d, xi_unit.iter().copied().take(d));

        // tangent frame a_1..a_{d-1} ⊥ ξ by Gram-Schmidt over the axes
        let mut tangents: Vec<DVector<f64>> = Vec::with_capacity(d - 1);
        for axis in 0..d {
            let mut v = DVector::zeros(d);
            v[axis] = 1.0;
            v -= &xi_v * xi_v.dot(&v);
            for t in &tangents {
                let tv: &DVector<f64> = t;
                v -= tv * tv.dot(&v);
            }
            let n = v.norm();
            if n > 1e-10 {
                tangents.push(v / n);
                if tangents.len() == d - 1 {
                    break;
                }
            }
        }
        debug_assert_eq!(tangents.len(), d - 1);

        // strain basis: √2 · (a ⊙ ξ̂) is unit for orthonormal a ⊥ ξ̂
        let mut strain = Vec::with_capacity(d - 1);
        for a in &tangents {
            let sym = (a * xi_v.transpose() + xi_v.clone() * a.transpose()) * 0.5;
            let coords = TracelessSym::from_matrix(&sym.scale(std::f64::consts::SQRT_2))
                .expect("a⊙ξ lies in Y")
                .coords()
                .to_vec();
            strain.push(coords);
        }

        // stress basis: orthonormal completion of the strain span inside Y
        let mut stress = Vec::with_capacity(m - (d - 1));
        for k in 0..m {
            let mut v = DVector::zeros(m);
            v[k] = 1.0;
            for b in strain.iter().chain(stress.iter()) {
                let bv = DVector::from_row_slice(b);
                v -= &bv * bv.dot(&v);
            }
            let n = v.norm();
            if n > 1e-8 {
                stress.push((v / n).iter().copied().collect());
                if stress.len() == m - (d - 1) {
                    break;
                }
            }
        }
        debug_assert_eq!(stress.len(), m - (d - 1));

        // pressure functional per coordinate: ξ̂ᵀ B_k ξ̂
        let pressure = dim
            .y_basis()
            .iter()
            .map(|b| (xi_v.transpose() * b * &xi_v)[(0, 0)])
            .collect();

        ModeBasis { xi_unit, strain, stress, pressure }
    }

    /// π_σ̃ of a complex coordinate vector.
    pub fn pressure_of(&self, coords: &[Complex64]) -> Complex64 {
        coords.iter().zip(&self.pressure).map(|(c, w)| c * w).sum()
    }
}

/// Projects complex coordinates onto the span of real basis vectors.
pub fn project_span(basis: &[Vec<f64>], coords: &mut [Complex64]) {
    let mut out = vec![Complex64::default(); coords.len()];
    for b in basis {
        let coeff: Complex64 = coords.iter().zip(b).map(|(c, w)| c * w).sum();
        for (o, w) in out.iter_mut().zip(b) {
            *o += coeff * w;
        }
    }
    coords.copy_from_slice(&out);
}

/// Kernel bases for every nonzero, non-Nyquist mode of a grid.
pub struct SymbolBasis {
    grid: TorusGrid,
    per_mode: Vec<Option<Arc<ModeBasis>>>,
}

impl SymbolBasis {
    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    /// `None` for the zero mode and for Nyquist-carrying modes (their
    /// derivative symbols are zeroed).
    pub fn at(&self, flat: usize) -> Option<&ModeBasis> {
        self.per_mode[flat].as_deref()
    }
}

/// Builds the per-mode kernel bases, cached by primitive ray.
pub fn build_symbols(grid: &TorusGrid) -> Result<SymbolBasis> {
    let mut cache: HashMap<[i64; 3], Arc<ModeBasis>> = HashMap::new();
    let mut per_mode = Vec::with_capacity(grid.num_nodes());
    for mode in grid.modes() {
        if mode.is_zero || mode.is_nyquist {
            per_mode.push(None);
            continue;
        }
        let key = primitive_ray(&mode.xi);
        let basis = cache
            .entry(key)
            .or_insert_with(|| Arc::new(ModeBasis::build(grid.dim(), &mode.xi)))
            .clone();
        per_mode.push(Some(basis));
    }
    Ok(SymbolBasis { grid: *grid, per_mode })
}

/// ξ divided by the gcd of its entries, sign fixed by the first nonzero.
fn primitive_ray(xi: &[i64; 3]) -> [i64; 3] {
    fn gcd(a: i64, b: i64) -> i64 {
        if b == 0 {
            a.abs()
        } else {
            gcd(b, a % b)
        }
    }
    let g = xi.iter().copied().fold(0, gcd).max(1);
    let mut r = [xi[0] / g, xi[1] / g, xi[2] / g];
    if let Some(first) = r.iter().find(|&&v| v != 0) {
        if *first < 0 {
            for v in r.iter_mut() {
                *v = -*v;
            }
        }
    }
    r
}

/// Dense symbol of the strain-compatibility operator at direction ξ̂
/// applied to a complex matrix; returns the Frobenius norm of the
/// resulting 4-tensor. Independent of the kernel-basis route; used by
/// residual checks.
pub fn strain_symbol_norm(xi_unit: &[f64; 3], eps: &DMatrix<Complex64>) -> f64 {
    let d = eps.nrows();
    let mut acc = 0.0;
    for i in 0..d {
        for j in 0..d {
            for k in 0..d {
                for l in 0..d {
                    let v = xi_unit[i] * xi_unit[j] * eps[(k, l)]
                        + xi_unit[k] * xi_unit[l] * eps[(i, j)]
                        - xi_unit[i] * xi_unit[l] * eps[(k, j)]
                        - xi_unit[k] * xi_unit[j] * eps[(i, l)];
                    acc += v.norm_sqr();
                }
            }
        }
    }
    acc.sqrt()
}
