//! d-dimensional FFT on the torus grid, built from 1-d rustfft plans.
//!
//! Convention: forward uses e^{−2πi ξ·x}, inverse e^{+2πi ξ·x}, both
//! scaled by n^{−d/2} (unitary), so Parseval holds without extra factors
//! and the zero mode equals mean · n^{d/2}.

use crate::spectral::grid::TorusGrid;
use num_complex::Complex64;
use rustfft::{Fft as RustFft, FftPlanner};
use std::sync::Arc;

pub struct Fft {
    n: usize,
    forward: Arc<dyn RustFft<f64>>,
    inverse: Arc<dyn RustFft<f64>>,
}

impl Fft {
    pub fn new(grid: &TorusGrid) -> Self {
        let mut planner = FftPlanner::new();
        Fft {
            n: grid.n(),
            forward: planner.plan_fft_forward(grid.n()),
            inverse: planner.plan_fft_inverse(grid.n()),
        }
    }

    fn transform_axes(&self, data: &mut [Complex64], grid: &TorusGrid, fwd: bool) {
        let d = grid.dim().d();
        let n = self.n;
        let total = grid.num_nodes();
        debug_assert_eq!(data.len(), total);
        let plan = if fwd { &self.forward } else { &self.inverse };
        let mut line = vec![Complex64::default(); n];
        for axis in 0..d {
            // stride between consecutive entries along `axis` in C order
            let stride = n.pow((d - 1 - axis) as u32);
            let lines = total / n;
            for l in 0..lines {
                // base index of the l-th line orthogonal to `axis`
                let block = l / stride;
                let offset = l % stride;
                let base = block * stride * n + offset;
                for (j, slot) in line.iter_mut().enumerate() {
                    *slot = data[base + j * stride];
                }
                plan.process(&mut line);
                for (j, slot) in line.iter().enumerate() {
                    data[base + j * stride] = *slot;
                }
            }
        }
        let scale = (total as f64).sqrt().recip();
        for v in data.iter_mut() {
            *v *= scale;
        }
    }

    pub fn forward(&self, data: &mut [Complex64], grid: &TorusGrid) {
        self.transform_axes(data, grid, true);
    }

    pub fn inverse(&self, data: &mut [Complex64], grid: &TorusGrid) {
        self.transform_axes(data, grid, false);
    }

    /// Forward transform of a real scalar field.
    pub fn forward_real(&self, data: &[f64], grid: &TorusGrid) -> Vec<Complex64> {
        let mut buf: Vec<Complex64> = data.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.forward(&mut buf, grid);
        buf
    }

    /// Inverse transform, returning the real part (imaginary content is
    /// the caller's rounding responsibility).
    pub fn inverse_real(&self, data: &[Complex64], grid: &TorusGrid) -> Vec<f64> {
        let mut buf = data.to_vec();
        self.inverse(&mut buf, grid);
        buf.iter().map(|v| v.re).collect()
    }
}

/// Enforces σ̂(−ξ) = conj(σ̂(ξ)) exactly by averaging conjugate pairs.
/// Projections preserve this symmetry analytically; the sweep removes the
/// last rounding asymmetry so inverse transforms are real.
pub fn hermitize(data: &mut [Complex64], grid: &TorusGrid) {
    let n = grid.n() as i64;
    let d = grid.dim().d();
    for flat in 0..grid.num_nodes() {
        let idx = grid.node_index(flat);
        let mut conj_flat = 0usize;
        for k in 0..d {
            let neg = ((n - idx[k] as i64) % n) as usize;
            conj_flat = conj_flat * grid.n() + neg;
        }
        if conj_flat < flat {
            continue;
        }
        if conj_flat == flat {
            data[flat] = Complex64::new(data[flat].re, 0.0);
        } else {
            let avg = 0.5 * (data[flat] + data[conj_flat].conj());
            data[flat] = avg;
            data[conj_flat] = avg.conj();
        }
    }
}
