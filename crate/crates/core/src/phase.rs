//! Exact linear algebra on the local phase space `Y × Y`, where `Y` is the
//! space of symmetric trace-free `d×d` matrices (`d ∈ {2,3}`).
//!
//! Everything downstream (data sets, constraint projections, the solver)
//! works in coordinates with respect to a fixed orthonormal basis of `Y`,
//! so the Frobenius pairing is the plain Euclidean dot product here.

use crate::error::{Error, Result};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

/// Symmetric trace-free reconstruction tolerance (relative to ‖M‖_F).
pub const TRACE_TOL: f64 = 1e-14;
/// Conjugate-exponent and Young-equality tolerance.
pub const EXPONENT_TOL: f64 = 1e-12;

/// Spatial dimension. Only 2 and 3 are supported.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Dim {
    D2,
    D3,
}

impl Dim {
    pub fn new(d: usize) -> Result<Self> {
        match d {
            2 => Ok(Dim::D2),
            3 => Ok(Dim::D3),
            _ => Err(Error::DimensionMismatch(format!("d must be 2 or 3, got {d}"))),
        }
    }

    /// Spatial dimension as a number.
    pub fn d(self) -> usize {
        match self {
            Dim::D2 => 2,
            Dim::D3 => 3,
        }
    }

    /// dim Y = d(d+1)/2 − 1.
    pub fn y_dim(self) -> usize {
        match self {
            Dim::D2 => 2,
            Dim::D3 => 5,
        }
    }

    /// Orthonormal basis of Y as dense matrices.
    pub fn y_basis(self) -> Vec<DMatrix<f64>> {
        let s2 = std::f64::consts::SQRT_2;
        match self {
            Dim::D2 => vec![
                DMatrix::from_row_slice(2, 2, &[1.0 / s2, 0.0, 0.0, -1.0 / s2]),
                DMatrix::from_row_slice(2, 2, &[0.0, 1.0 / s2, 1.0 / s2, 0.0]),
            ],
            Dim::D3 => {
                let s6 = 6.0_f64.sqrt();
                vec![
                    DMatrix::from_row_slice(3, 3, &[1.0 / s2, 0., 0., 0., -1.0 / s2, 0., 0., 0., 0.]),
                    DMatrix::from_row_slice(
                        3,
                        3,
                        &[1.0 / s6, 0., 0., 0., 1.0 / s6, 0., 0., 0., -2.0 / s6],
                    ),
                    DMatrix::from_row_slice(3, 3, &[0., 1.0 / s2, 0., 1.0 / s2, 0., 0., 0., 0., 0.]),
                    DMatrix::from_row_slice(3, 3, &[0., 0., 1.0 / s2, 0., 0., 0., 1.0 / s2, 0., 0.]),
                    DMatrix::from_row_slice(3, 3, &[0., 0., 0., 0., 0., 1.0 / s2, 0., 1.0 / s2, 0.]),
                ]
            }
        }
    }
}

/// An element of Y in coordinates with respect to [`Dim::y_basis`].
///
/// Coordinates are stored inline; only the first `dim.y_dim()` entries are
/// meaningful.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TracelessSym {
    dim: Dim,
    coords: [f64; 5],
}

impl TracelessSym {
    pub fn zero(dim: Dim) -> Self {
        TracelessSym { dim, coords: [0.0; 5] }
    }

    pub fn from_coords(dim: Dim, c: &[f64]) -> Result<Self> {
        if c.len() != dim.y_dim() {
            return Err(Error::DimensionMismatch(format!(
                "expected {} coordinates, got {}",
                dim.y_dim(),
                c.len()
            )));
        }
        let mut coords = [0.0; 5];
        coords[..c.len()].copy_from_slice(c);
        Ok(TracelessSym { dim, coords })
    }

    /// Project a dense matrix onto Y (symmetrize, remove trace) and return
    /// its coordinates. Matrices already in Y round-trip to machine
    /// precision.
    pub fn from_matrix(m: &DMatrix<f64>) -> Result<Self> {
        let d = m.nrows();
        if m.ncols() != d {
            return Err(Error::DimensionMismatch("matrix must be square".into()));
        }
        let dim = Dim::new(d)?;
        let sym = (m + m.transpose()) * 0.5;
        let dev = &sym - DMatrix::identity(d, d) * (sym.trace() / d as f64);
        let mut out = TracelessSym::zero(dim);
        for (k, b) in dim.y_basis().iter().enumerate() {
            out.coords[k] = dev.dot(b);
        }
        Ok(out)
    }

    pub fn to_matrix(&self) -> DMatrix<f64> {
        let d = self.dim.d();
        let mut m = DMatrix::zeros(d, d);
        for (k, b) in self.dim.y_basis().iter().enumerate() {
            m += b * self.coords[k];
        }
        m
    }

    pub fn dim(&self) -> Dim {
        self.dim
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords[..self.dim.y_dim()]
    }

    pub fn coords_mut(&mut self) -> &mut [f64] {
        let m = self.dim.y_dim();
        &mut self.coords[..m]
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.coords().iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut out = *self;
        for c in out.coords_mut() {
            *c *= s;
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = *self;
        for (a, b) in out.coords_mut().iter_mut().zip(other.coords()) {
            *a += b;
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut out = *self;
        for (a, b) in out.coords_mut().iter_mut().zip(other.coords()) {
            *a -= b;
        }
        out
    }
}

/// Frobenius pairing Σᵢⱼ aᵢⱼ bᵢⱼ. Symmetric and bilinear; the basis is
/// orthonormal, so this is the dot product of coordinates.
pub fn inner(a: &TracelessSym, b: &TracelessSym) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch("inner: operands differ in d".into()));
    }
    Ok(a.coords().iter().zip(b.coords()).map(|(x, y)| x * y).sum())
}

/// A pair (ε, σ̃) of strain and viscous stress values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    pub eps: TracelessSym,
    pub sig: TracelessSym,
}

impl PhasePoint {
    pub fn new(eps: TracelessSym, sig: TracelessSym) -> Result<Self> {
        if eps.dim() != sig.dim() {
            return Err(Error::DimensionMismatch("phase point components differ in d".into()));
        }
        Ok(PhasePoint { eps, sig })
    }

    pub fn zero(dim: Dim) -> Self {
        PhasePoint { eps: TracelessSym::zero(dim), sig: TracelessSym::zero(dim) }
    }

    pub fn dim(&self) -> Dim {
        self.eps.dim()
    }

    /// Flat CSV row `[d, ε coords..., σ̃ coords...]` with 17 significant
    /// digits, so values round-trip exactly through decimal.
    pub fn to_csv_row(&self) -> String {
        let mut fields = vec![self.dim().d().to_string()];
        fields.extend(self.eps.coords().iter().map(|v| format!("{v:.16e}")));
        fields.extend(self.sig.coords().iter().map(|v| format!("{v:.16e}")));
        fields.join(",")
    }

    pub fn from_csv_row(row: &str) -> Result<Self> {
        let fields: Vec<&str> = row.trim().split(',').collect();
        let parse = |s: &str| -> Result<f64> {
            s.trim().parse::<f64>().map_err(|e| Error::Parse(format!("bad float {s:?}: {e}")))
        };
        let d: usize = fields
            .first()
            .ok_or_else(|| Error::Parse("empty row".into()))?
            .trim()
            .parse()
            .map_err(|e| Error::Parse(format!("bad dimension: {e}")))?;
        let dim = Dim::new(d)?;
        let m = dim.y_dim();
        if fields.len() != 1 + 2 * m {
            return Err(Error::Parse(format!(
                "expected {} fields for d={d}, got {}",
                1 + 2 * m,
                fields.len()
            )));
        }
        let eps_c: Vec<f64> = fields[1..1 + m].iter().map(|s| parse(s)).collect::<Result<_>>()?;
        let sig_c: Vec<f64> =
            fields[1 + m..].iter().map(|s| parse(s)).collect::<Result<_>>()?;
        PhasePoint::new(
            TracelessSym::from_coords(dim, &eps_c)?,
            TracelessSym::from_coords(dim, &sig_c)?,
        )
    }
}

/// Conjugate exponent pair with α = p/q (the power-law exponent whose graph
/// realizes Young equality for this pair).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Exponents {
    pub p: f64,
    pub q: f64,
    pub alpha: f64,
}

impl Exponents {
    pub fn new(p: f64) -> Result<Self> {
        if p <= 1.0 || !p.is_finite() {
            return Err(Error::InvalidExponent(format!("p must lie in (1, ∞), got {p}")));
        }
        let q = p / (p - 1.0);
        Ok(Exponents { p, q, alpha: p / q })
    }

    pub fn from_pq(p: f64, q: f64) -> Result<Self> {
        let e = Exponents::new(p)?;
        if (e.q - q).abs() > EXPONENT_TOL * (1.0 + q.abs()) {
            return Err(Error::InvalidExponent(format!(
                "q={q} is not conjugate to p={p} (expected {})",
                e.q
            )));
        }
        Ok(e)
    }

    pub fn quadratic() -> Self {
        Exponents { p: 2.0, q: 2.0, alpha: 1.0 }
    }
}

/// The pointwise distance (1/p)|ε₁−ε₂|^p + (1/q)|σ̃₁−σ̃₂|^q.
pub fn dist_pq(z1: &PhasePoint, z2: &PhasePoint, exp: &Exponents) -> Result<f64> {
    if z1.dim() != z2.dim() {
        return Err(Error::DimensionMismatch("dist_pq: points differ in d".into()));
    }
    let de = z1.eps.sub(&z2.eps).norm();
    let ds = z1.sig.sub(&z2.sig).norm();
    Ok(de.powf(exp.p) / exp.p + ds.powf(exp.q) / exp.q)
}

/// The metric d(z₁,z₂) = dist(z₁,z₂)^{1/max(p,q)}; satisfies the triangle
/// inequality, unlike `dist_pq` itself.
pub fn metric_d(z1: &PhasePoint, z2: &PhasePoint, exp: &Exponents) -> Result<f64> {
    Ok(dist_pq(z1, z2, exp)?.powf(1.0 / exp.p.max(exp.q)))
}

/// Young defect f(ε,σ̃) = (1/p)|ε|^p + (1/q)|σ̃|^q − ε·σ̃.
///
/// Nonnegative everywhere; vanishes exactly on the normalized power-law
/// graph σ̃ = |ε|^{α−1} ε.
pub fn young_defect(z: &PhasePoint, exp: &Exponents) -> Result<f64> {
    let e = z.eps.norm();
    let s = z.sig.norm();
    Ok(e.powf(exp.p) / exp.p + s.powf(exp.q) / exp.q - inner(&z.eps, &z.sig)?)
}

/// Magnitude functional dist(z, 0); a pseudo-norm on Y × Y used for
/// range filters.
pub fn magnitude(z: &PhasePoint, exp: &Exponents) -> f64 {
    let e = z.eps.norm();
    let s = z.sig.norm();
    e.powf(exp.p) / exp.p + s.powf(exp.q) / exp.q
}

/// Convenience constructors for tests and data generation.
impl TracelessSym {
    /// diag(a, −a) in d=2 (coordinate a·√2 on the first basis element).
    pub fn diag2(a: f64) -> Self {
        TracelessSym { dim: Dim::D2, coords: [a * std::f64::consts::SQRT_2, 0.0, 0.0, 0.0, 0.0] }
    }

    /// Off-diagonal b·(e₁⊗e₂ + e₂⊗e₁) in d=2.
    pub fn offdiag2(b: f64) -> Self {
        TracelessSym { dim: Dim::D2, coords: [0.0, b * std::f64::consts::SQRT_2, 0.0, 0.0, 0.0] }
    }
}
