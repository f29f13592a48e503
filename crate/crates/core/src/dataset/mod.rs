//! Material data sets: generation from constitutive laws, exact nearest
//! point queries in the (p,q) geometry, file round-trips, convergence
//! checkers and coercivity certificates.

pub mod coercivity;
pub mod convergence;
mod kdtree;
pub mod law;

pub use coercivity::{
    coercivity_certificate, lower_bound_constants, CoercivityCertificate, CoercivityOutcome,
    LowerBound,
};
pub use convergence::{check_convergence_bd, check_convergence_eq, ConvergenceReport};
pub use law::{ConstitutiveLaw, LawKind};

use crate::error::{Error, Result};
use crate::phase::{dist_pq, magnitude, Dim, Exponents, PhasePoint, TracelessSym};
use kdtree::KdTree;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};
use std::io::{BufRead, Write};
use std::path::Path;

/// Relative agreement required between the accelerated index and the
/// linear-scan oracle.
pub const NN_ORACLE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseMode {
    Relative,
    Absolute,
}

/// Provenance of a generated data set.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DataSetMeta {
    pub law: Option<ConstitutiveLaw>,
    pub noise: f64,
    pub noise_mode: NoiseMode,
    pub range: f64,
    pub seed: u64,
}

/// A finite cloud of phase points with an exact accelerated nearest-point
/// index. Immutable after construction.
#[derive(Debug, Clone)]
pub struct MaterialDataSet {
    dim: Dim,
    exp: Exponents,
    points: Vec<PhasePoint>,
    index: KdTree,
    pub meta: Option<DataSetMeta>,
}

impl MaterialDataSet {
    pub fn from_points(exp: Exponents, points: Vec<PhasePoint>) -> Result<Self> {
        let dim = points.first().ok_or(Error::EmptyDataSet)?.dim();
        if points.iter().any(|z| z.dim() != dim) {
            return Err(Error::DimensionMismatch("mixed dimensions in data set".into()));
        }
        let coords: Vec<Vec<f64>> = points.iter().map(concat_coords).collect();
        let index = KdTree::build(&coords, 2 * dim.y_dim());
        Ok(MaterialDataSet { dim, exp, points, index, meta: None })
    }

    pub fn dim(&self) -> Dim {
        self.dim
    }

    pub fn exp(&self) -> &Exponents {
        &self.exp
    }

    pub fn points(&self) -> &[PhasePoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Argmin of dist_pq(z, ·) over the stored points, ties broken by
    /// lowest index. Exact: the Euclidean kd-tree only pre-filters, every
    /// candidate inside the correctness radius is scanned with the true
    /// distance.
    pub fn nearest(&self, z: &PhasePoint) -> Result<(usize, PhasePoint, f64)> {
        if z.dim() != self.dim {
            return Err(Error::DimensionMismatch("query dimension differs from data set".into()));
        }
        let q = concat_coords(z);
        let (seed, _) = self.index.nearest_euclidean(&q);
        let mut best_i = seed;
        let mut best_d = dist_pq(z, &self.points[seed], &self.exp)?;
        // Any point with dist_pq ≤ best_d lies within this Euclidean radius.
        let radius = correctness_radius(best_d, &self.exp) * (1.0 + 1e-12);
        let mut candidates = self.index.within_radius(&q, radius);
        candidates.sort_unstable();
        for i in candidates {
            let d = dist_pq(z, &self.points[i], &self.exp)?;
            if d < best_d || (d == best_d && i < best_i) {
                best_d = d;
                best_i = i;
            }
        }
        Ok((best_i, self.points[best_i], best_d))
    }

    /// Linear-scan oracle for `nearest`, same tie rule.
    pub fn nearest_linear(&self, z: &PhasePoint) -> Result<(usize, PhasePoint, f64)> {
        let mut best_i = 0;
        let mut best_d = f64::INFINITY;
        for (i, w) in self.points.iter().enumerate() {
            let d = dist_pq(z, w, &self.exp)?;
            if d < best_d {
                best_d = d;
                best_i = i;
            }
        }
        Ok((best_i, self.points[best_i], best_d))
    }

    /// Graph sample of a law on a cubic ε-lattice of spacing `h` inside
    /// the ball |ε| ≤ r. Gives a cloud with a sharp spacing parameter for
    /// convergence studies.
    pub fn graph_lattice(
        law: &ConstitutiveLaw,
        exp: &Exponents,
        r: f64,
        h: f64,
    ) -> Result<Self> {
        if r <= 0.0 || h <= 0.0 {
            return Err(Error::InvalidLaw(format!("lattice needs r, h > 0 (got {r}, {h})")));
        }
        let m = law.dim.y_dim();
        let half = (r / h).floor() as i64;
        let mut points = Vec::new();
        let mut idx = vec![-half; m];
        'outer: loop {
            let coords: Vec<f64> = idx.iter().map(|&i| i as f64 * h).collect();
            let norm2: f64 = coords.iter().map(|c| c * c).sum();
            if norm2 <= r * r {
                let eps = TracelessSym::from_coords(law.dim, &coords)?;
                points.push(PhasePoint::new(eps, law.stress(&eps))?);
            }
            for k in 0..m {
                idx[k] += 1;
                if idx[k] <= half {
                    continue 'outer;
                }
                idx[k] = -half;
            }
            break;
        }
        let mut ds = MaterialDataSet::from_points(*exp, points)?;
        ds.meta = Some(DataSetMeta {
            law: Some(law.clone()),
            noise: 0.0,
            noise_mode: NoiseMode::Absolute,
            range: r,
            seed: 0,
        });
        Ok(ds)
    }

    /// Writes `<path>` as CSV (metadata line + one point per row) and a
    /// JSON sidecar `<path>.meta.json` when provenance is present.
    /// Decimal round-trips are exact (17 significant digits).
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        self.write_csv_with_comments(path, &[])
    }

    /// Same as [`write_csv`](Self::write_csv) with leading `#` comment
    /// lines (provenance stamps); readers skip them.
    pub fn write_csv_with_comments(&self, path: &Path, comments: &[String]) -> Result<()> {
        let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
        for c in comments {
            writeln!(out, "# {c}")?;
        }
        writeln!(out, "d,p,q")?;
        writeln!(out, "{},{:.16e},{:.16e}", self.dim.d(), self.exp.p, self.exp.q)?;
        for z in &self.points {
            writeln!(out, "{}", z.to_csv_row())?;
        }
        out.flush()?;
        if let Some(meta) = &self.meta {
            let sidecar = path.with_extension("meta.json");
            let body = serde_json::to_string_pretty(meta)
                .map_err(|e| Error::Parse(format!("meta serialization: {e}")))?;
            std::fs::write(sidecar, body)?;
        }
        Ok(())
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        let mut lines = std::io::BufReader::new(file).lines();
        let header = loop {
            let line =
                lines.next().ok_or_else(|| Error::Parse("empty data set file".into()))??;
            if !line.trim_start().starts_with('#') {
                break line;
            }
        };
        if header.trim() != "d,p,q" {
            return Err(Error::Parse(format!("expected header 'd,p,q', got {header:?}")));
        }
        let meta_line =
            lines.next().ok_or_else(|| Error::Parse("missing metadata line".into()))??;
        let fields: Vec<&str> = meta_line.trim().split(',').collect();
        if fields.len() != 3 {
            return Err(Error::Parse("metadata line must be d,p,q values".into()));
        }
        let p: f64 =
            fields[1].parse().map_err(|e| Error::Parse(format!("bad p: {e}")))?;
        let q: f64 =
            fields[2].parse().map_err(|e| Error::Parse(format!("bad q: {e}")))?;
        let exp = Exponents::from_pq(p, q)?;
        let mut points = Vec::new();
        for line in lines {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            points.push(PhasePoint::from_csv_row(&line)?);
        }
        let mut ds = MaterialDataSet::from_points(exp, points)?;
        let sidecar = path.with_extension("meta.json");
        if sidecar.exists() {
            let body = std::fs::read_to_string(sidecar)?;
            ds.meta = serde_json::from_str(&body)
                .map_err(|e| Error::Parse(format!("meta parse: {e}")))?;
        }
        Ok(ds)
    }
}

fn concat_coords(z: &PhasePoint) -> Vec<f64> {
    let mut c = Vec::with_capacity(2 * z.dim().y_dim());
    c.extend_from_slice(z.eps.coords());
    c.extend_from_slice(z.sig.coords());
    c
}

fn correctness_radius(d: f64, exp: &Exponents) -> f64 {
    ((exp.p * d).powf(2.0 / exp.p) + (exp.q * d).powf(2.0 / exp.q)).sqrt()
}

/// Quasi-uniform directions on the unit sphere of Y: a Halton sequence
/// pushed through the normal quantile and normalized.
pub fn quasi_uniform_directions(dim: Dim, n: usize) -> Vec<TracelessSym> {
    const PRIMES: [u64; 5] = [2, 3, 5, 7, 11];
    let m = dim.y_dim();
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    let mut dirs = Vec::with_capacity(n);
    let mut i = 0u64;
    while dirs.len() < n {
        i += 1; // skip the degenerate first Halton point
        let mut c = [0.0; 5];
        for (k, slot) in c.iter_mut().take(m).enumerate() {
            *slot = normal.inverse_cdf(halton(i, PRIMES[k]));
        }
        let norm = c.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm < 1e-12 {
            continue;
        }
        for v in c.iter_mut() {
            *v /= norm;
        }
        dirs.push(TracelessSym::from_coords(dim, &c[..m]).expect("unit direction"));
    }
    dirs
}

fn halton(mut i: u64, base: u64) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    while i > 0 {
        f /= base as f64;
        r += f * (i % base) as f64;
        i /= base;
    }
    r
}

/// Samples a data set from a constitutive law: strains s·ω with ω
/// quasi-uniform on the unit sphere of Y and s geometric in
/// [R·10⁻³, R], stresses from the law plus optional measurement noise.
///
/// The noise budget is a distance budget: in relative mode each point is
/// displaced by at most `noise·(1 + |z|)` in the (p,q) distance, so the
/// fine-approximation bound of data convergence holds with a_n of the
/// order of `noise`. Yield laws additionally sample the segment
/// D₀ = {(0,σ̃): |σ̃| ≤ a}.
#[allow(clippy::too_many_arguments)]
pub fn sample_law(
    law: &ConstitutiveLaw,
    exp: &Exponents,
    n_dirs: usize,
    n_mags: usize,
    r: f64,
    noise: f64,
    noise_mode: NoiseMode,
    seed: u64,
) -> Result<MaterialDataSet> {
    if n_dirs < 1 || n_mags < 1 {
        return Err(Error::InvalidLaw("need n_dirs, n_mags ≥ 1".into()));
    }
    if r <= 0.0 || noise < 0.0 {
        return Err(Error::InvalidLaw(format!("need R > 0 and noise ≥ 0, got {r}, {noise}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dirs = quasi_uniform_directions(law.dim, n_dirs);
    let mags = geometric_grid(r, n_mags);
    let mut points = Vec::with_capacity(n_dirs * n_mags);
    for omega in &dirs {
        for &s in &mags {
            let eps = omega.scale(s);
            let sig = law.stress(&eps);
            points.push(perturb(PhasePoint::new(eps, sig)?, noise, noise_mode, exp, &mut rng));
        }
    }
    let a = law.yield_value();
    if a > 0.0 {
        points.push(PhasePoint::zero(law.dim));
        let n_cap = n_mags.div_ceil(2);
        for omega in &dirs {
            for i in 1..=n_cap {
                let sig = omega.scale(a * i as f64 / n_cap as f64);
                points.push(perturb(
                    PhasePoint::new(TracelessSym::zero(law.dim), sig)?,
                    noise,
                    noise_mode,
                    exp,
                    &mut rng,
                ));
            }
        }
    }
    let mut ds = MaterialDataSet::from_points(*exp, points)?;
    ds.meta = Some(DataSetMeta { law: Some(law.clone()), noise, noise_mode, range: r, seed });
    Ok(ds)
}

fn geometric_grid(r: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![r];
    }
    let lo = r * 1e-3;
    (0..n)
        .map(|i| lo * (r / lo).powf(i as f64 / (n - 1) as f64))
        .collect()
}

fn perturb(
    z: PhasePoint,
    noise: f64,
    mode: NoiseMode,
    exp: &Exponents,
    rng: &mut ChaCha8Rng,
) -> PhasePoint {
    if noise == 0.0 {
        return z;
    }
    let budget = match mode {
        NoiseMode::Relative => noise * (1.0 + magnitude(&z, exp)),
        NoiseMode::Absolute => noise,
    };
    let target = budget * rng.gen_range(0.0..1.0);
    // displace σ̃ so that dist_pq(z_noisy, z) equals the drawn target
    let eta_norm = (exp.q * target).powf(1.0 / exp.q);
    let m = z.dim().y_dim();
    let mut dir = [0.0; 5];
    loop {
        for v in dir.iter_mut().take(m) {
            *v = rng.sample::<f64, _>(rand_distr::StandardNormal);
        }
        let norm = dir.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > 1e-12 {
            for v in dir.iter_mut() {
                *v /= norm;
            }
            break;
        }
    }
    let eta = TracelessSym::from_coords(z.dim(), &dir[..m]).expect("noise direction").scale(eta_norm);
    PhasePoint { eps: z.eps, sig: z.sig.add(&eta) }
}
