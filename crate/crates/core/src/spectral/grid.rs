//! Uniform grid on the d-torus [0,1)^d with C-order node indexing and the
//! signed integer Fourier modes attached to each flat index.

use crate::error::{Error, Result};
use crate::phase::Dim;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TorusGrid {
    dim: Dim,
    n: usize,
}

/// One Fourier mode: flat storage index plus the signed wavenumber.
#[derive(Debug, Clone, Copy)]
pub struct Mode {
    pub flat: usize,
    pub xi: [i64; 3],
    pub xi_norm2: f64,
    pub is_zero: bool,
    /// Any component sitting on the unpaired Nyquist frequency n/2.
    /// Derivative symbols vanish there to keep real fields real.
    pub is_nyquist: bool,
}

impl TorusGrid {
    pub fn new(dim: Dim, n: usize) -> Result<Self> {
        if n < 4 || !n.is_multiple_of(2) {
            return Err(Error::InvalidGrid(format!("n must be even and ≥ 4, got {n}")));
        }
        Ok(TorusGrid { dim, n })
    }

    pub fn dim(&self) -> Dim {
        self.dim
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn num_nodes(&self) -> usize {
        self.n.pow(self.dim.d() as u32)
    }

    /// Quadrature weight per node, |T_d| = 1.
    pub fn node_weight(&self) -> f64 {
        1.0 / self.num_nodes() as f64
    }

    /// Physical coordinates of a flat node index.
    pub fn node_coords(&self, flat: usize) -> [f64; 3] {
        let idx = self.node_index(flat);
        let mut x = [0.0; 3];
        for k in 0..self.dim.d() {
            x[k] = idx[k] as f64 / self.n as f64;
        }
        x
    }

    /// Multi-index of a flat node index (C order, axis 0 slowest).
    pub fn node_index(&self, flat: usize) -> [usize; 3] {
        let d = self.dim.d();
        let mut idx = [0usize; 3];
        let mut rem = flat;
        for k in (0..d).rev() {
            idx[k] = rem % self.n;
            rem /= self.n;
        }
        idx
    }

    fn signed(&self, k: usize) -> i64 {
        if k <= self.n / 2 {
            k as i64
        } else {
            k as i64 - self.n as i64
        }
    }

    pub fn mode(&self, flat: usize) -> Mode {
        let d = self.dim.d();
        let idx = self.node_index(flat);
        let mut xi = [0i64; 3];
        let mut norm2 = 0.0;
        let mut nyquist = false;
        for k in 0..d {
            xi[k] = self.signed(idx[k]);
            norm2 += (xi[k] * xi[k]) as f64;
            nyquist |= idx[k] == self.n / 2;
        }
        Mode { flat, xi, xi_norm2: norm2, is_zero: norm2 == 0.0, is_nyquist: nyquist }
    }

    pub fn modes(&self) -> impl Iterator<Item = Mode> + '_ {
        (0..self.num_nodes()).map(move |flat| self.mode(flat))
    }
}
