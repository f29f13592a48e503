//! Grid-sampled fields with paired spectral representations.
//!
//! `Field` stores the total pointwise values of (ε, σ̃); the prescribed
//! means (ε₀, σ̃₀) ride along and are re-imposed on the zero mode by every
//! constraint projection.

use crate::phase::{inner, Dim, PhasePoint, TracelessSym};
use crate::spectral::fft::Fft;
use crate::spectral::grid::TorusGrid;
use nalgebra::DMatrix;
use num_complex::Complex64;

#[derive(Debug, Clone)]
pub struct Field {
    pub grid: TorusGrid,
    pub eps: Vec<TracelessSym>,
    pub sig: Vec<TracelessSym>,
    pub means: (TracelessSym, TracelessSym),
}

impl Field {
    pub fn constant(grid: TorusGrid, means: (TracelessSym, TracelessSym)) -> Self {
        let n = grid.num_nodes();
        Field { grid, eps: vec![means.0; n], sig: vec![means.1; n], means }
    }

    pub fn phase_point(&self, flat: usize) -> PhasePoint {
        PhasePoint { eps: self.eps[flat], sig: self.sig[flat] }
    }

    /// Discrete integral (1/n^d) Σ ε·σ̃ — the Null-Lagrangian quantity.
    pub fn mean_pairing(&self) -> f64 {
        let w = self.grid.node_weight();
        self.eps
            .iter()
            .zip(&self.sig)
            .map(|(e, s)| inner(e, s).expect("same dim"))
            .sum::<f64>()
            * w
    }

    pub fn mean_eps(&self) -> TracelessSym {
        mean_of(&self.eps, self.grid.dim(), self.grid.node_weight())
    }

    pub fn mean_sig(&self) -> TracelessSym {
        mean_of(&self.sig, self.grid.dim(), self.grid.node_weight())
    }

    /// Quadrature norms (mean |ε|^p, mean |σ̃|^q) of the total fields.
    pub fn mean_norms(&self, p: f64, q: f64) -> (f64, f64) {
        let w = self.grid.node_weight();
        let e = self.eps.iter().map(|v| v.norm().powf(p)).sum::<f64>() * w;
        let s = self.sig.iter().map(|v| v.norm().powf(q)).sum::<f64>() * w;
        (e, s)
    }
}

fn mean_of(values: &[TracelessSym], dim: Dim, w: f64) -> TracelessSym {
    let mut acc = TracelessSym::zero(dim);
    for v in values {
        acc = acc.add(v);
    }
    acc.scale(w)
}

/// Velocity/pressure companion of a constrained field. Third velocity
/// component is unused in d = 2.
#[derive(Debug, Clone)]
pub struct VelocityPressure {
    pub grid: TorusGrid,
    pub u: Vec<[f64; 3]>,
    pub pi: Vec<f64>,
}

impl VelocityPressure {
    pub fn zeros(grid: TorusGrid) -> Self {
        let n = grid.num_nodes();
        VelocityPressure { grid, u: vec![[0.0; 3]; n], pi: vec![0.0; n] }
    }

    pub fn u_l2(&self) -> f64 {
        let w = self.grid.node_weight();
        (self.u.iter().map(|v| v.iter().map(|c| c * c).sum::<f64>()).sum::<f64>() * w).sqrt()
    }
}

/// Spectral coefficients of a Y-valued field, one array per coordinate.
#[derive(Debug, Clone)]
pub struct SpectralSym {
    pub dim: Dim,
    pub comp: Vec<Vec<Complex64>>,
}

impl SpectralSym {
    pub fn zeros(dim: Dim, len: usize) -> Self {
        SpectralSym { dim, comp: vec![vec![Complex64::default(); len]; dim.y_dim()] }
    }

    pub fn from_values(values: &[TracelessSym], grid: &TorusGrid, fft: &Fft) -> Self {
        let dim = grid.dim();
        let comp = (0..dim.y_dim())
            .map(|k| {
                let raw: Vec<f64> = values.iter().map(|v| v.coords()[k]).collect();
                fft.forward_real(&raw, grid)
            })
            .collect();
        SpectralSym { dim, comp }
    }

    pub fn to_values(&self, grid: &TorusGrid, fft: &Fft) -> Vec<TracelessSym> {
        let m = self.dim.y_dim();
        let per_comp: Vec<Vec<f64>> =
            self.comp.iter().map(|c| fft.inverse_real(c, grid)).collect();
        (0..grid.num_nodes())
            .map(|flat| {
                let coords: Vec<f64> = (0..m).map(|k| per_comp[k][flat]).collect();
                TracelessSym::from_coords(self.dim, &coords).expect("coords sized by dim")
            })
            .collect()
    }

    pub fn get(&self, flat: usize) -> [Complex64; 5] {
        let mut out = [Complex64::default(); 5];
        for (k, c) in self.comp.iter().enumerate() {
            out[k] = c[flat];
        }
        out
    }

    pub fn set(&mut self, flat: usize, vals: &[Complex64]) {
        for (k, c) in self.comp.iter_mut().enumerate() {
            c[flat] = vals[k];
        }
    }

    pub fn norm(&self) -> f64 {
        self.comp.iter().flatten().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }
}

/// Spectral coefficients of an R^d-valued field.
#[derive(Debug, Clone)]
pub struct SpectralVec {
    pub d: usize,
    pub comp: Vec<Vec<Complex64>>,
}

impl SpectralVec {
    pub fn zeros(d: usize, len: usize) -> Self {
        SpectralVec { d, comp: vec![vec![Complex64::default(); len]; d] }
    }

    pub fn from_values(values: &[[f64; 3]], grid: &TorusGrid, fft: &Fft) -> Self {
        let d = grid.dim().d();
        let comp = (0..d)
            .map(|k| {
                let raw: Vec<f64> = values.iter().map(|v| v[k]).collect();
                fft.forward_real(&raw, grid)
            })
            .collect();
        SpectralVec { d, comp }
    }

    pub fn to_values(&self, grid: &TorusGrid, fft: &Fft) -> Vec<[f64; 3]> {
        let per_comp: Vec<Vec<f64>> =
            self.comp.iter().map(|c| fft.inverse_real(c, grid)).collect();
        (0..grid.num_nodes())
            .map(|flat| {
                let mut v = [0.0; 3];
                for k in 0..self.d {
                    v[k] = per_comp[k][flat];
                }
                v
            })
            .collect()
    }

    pub fn get(&self, flat: usize) -> [Complex64; 3] {
        let mut out = [Complex64::default(); 3];
        for (k, c) in self.comp.iter().enumerate() {
            out[k] = c[flat];
        }
        out
    }

    pub fn set(&mut self, flat: usize, vals: &[Complex64]) {
        for (k, c) in self.comp.iter_mut().enumerate() {
            c[flat] = vals[k];
        }
    }

    pub fn norm(&self) -> f64 {
        self.comp.iter().flatten().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }
}

/// Complex dense matrix from complex Y coordinates.
pub fn coords_to_complex_matrix(dim: Dim, coords: &[Complex64]) -> DMatrix<Complex64> {
    let d = dim.d();
    let mut m = DMatrix::from_element(d, d, Complex64::default());
    for (k, b) in dim.y_basis().iter().enumerate() {
        for i in 0..d {
            for j in 0..d {
                m[(i, j)] += coords[k] * b[(i, j)];
            }
        }
    }
    m
}

/// Complex Y coordinates of a (symmetric trace-free) complex matrix.
pub fn complex_matrix_to_coords(dim: Dim, m: &DMatrix<Complex64>) -> Vec<Complex64> {
    dim.y_basis()
        .iter()
        .map(|b| {
            let mut acc = Complex64::default();
            for i in 0..dim.d() {
                for j in 0..dim.d() {
                    acc += m[(i, j)] * b[(i, j)];
                }
            }
            acc
        })
        .collect()
}
