//! Shared oracles and builders for the integration suites. Everything in
//! here recomputes reference solutions along routes independent of the
//! solver's projection path (direct DFTs, dense least squares, energy
//! descent).

#![allow(dead_code)]

use dd_fluids_core::dataset::{ConstitutiveLaw, MaterialDataSet};
use dd_fluids_core::phase::{Dim, Exponents, TracelessSym};
use dd_fluids_core::spectral::{convective_force, Fft, SpectralVec, TorusGrid};
use num_complex::Complex64;
use std::f64::consts::PI;

/// f = A(cos 2πx₂, 0): the Stokes solution is a parallel shear flow.
pub fn shear_force(grid: &TorusGrid, amplitude: f64) -> Vec<[f64; 3]> {
    (0..grid.num_nodes())
        .map(|flat| {
            let x = grid.node_coords(flat);
            [amplitude * (2.0 * PI * x[1]).cos(), 0.0, 0.0]
        })
        .collect()
}

/// Two perpendicular shear modes f = (A cos 2πx₂, B cos 2πx₁). The Stokes
/// flow is u = (a cos 2πx₂, b cos 2πx₁); its strain stays on the
/// off-diagonal segment of phase space but takes n² distinct values, so
/// quantization errors self-average.
pub fn two_mode_shear_force(grid: &TorusGrid, a: f64, b: f64) -> Vec<[f64; 3]> {
    (0..grid.num_nodes())
        .map(|flat| {
            let x = grid.node_coords(flat);
            [a * (2.0 * PI * x[1]).cos(), b * (2.0 * PI * x[0]).cos(), 0.0]
        })
        .collect()
}

/// Classic cellular forcing f = A(sin x cos y, −cos x sin y) (angular 2π);
/// zero-mean and divergence-free.
pub fn taylor_green_force(grid: &TorusGrid, amplitude: f64) -> Vec<[f64; 3]> {
    (0..grid.num_nodes())
        .map(|flat| {
            let x = grid.node_coords(flat);
            let (sx, cx) = (2.0 * PI * x[0]).sin_cos();
            let (sy, cy) = (2.0 * PI * x[1]).sin_cos();
            [amplitude * sx * cy, -amplitude * cx * sy, 0.0]
        })
        .collect()
}

/// A multi-mode curl-type force: f = (∂₂ψ, −∂₁ψ) of a fixed stream
/// pattern; zero-mean and transversal-rich.
pub fn curl_force(grid: &TorusGrid, amplitude: f64) -> Vec<[f64; 3]> {
    (0..grid.num_nodes())
        .map(|flat| {
            let x = grid.node_coords(flat);
            let dpsi_dy = 2.0 * PI
                * ((2.0 * PI * x[0]).sin() * (2.0 * PI * x[1]).cos()
                    + 0.5 * (4.0 * PI * x[1]).cos());
            let dpsi_dx =
                2.0 * PI * ((2.0 * PI * x[0]).cos() * (2.0 * PI * x[1]).sin());
            [amplitude * dpsi_dy, -amplitude * dpsi_dx, 0.0]
        })
        .collect()
}

/// Strain range of a velocity sampling (max |sym∇u| over nodes), from the
/// spectral derivative.
pub fn strain_range(grid: &TorusGrid, u: &[[f64; 3]]) -> f64 {
    let fft = Fft::new(grid);
    let u_spec = SpectralVec::from_values(u, grid, &fft);
    let eps = dd_fluids_core::spectral::sym_grad(&u_spec, grid);
    eps.to_values(grid, &fft).iter().map(|e| e.norm()).fold(0.0, f64::max)
}

/// Damped preconditioned descent for the p-Stokes problem
/// −div(2μ₀|ε₀+ε(u)|^{α−1}(ε₀+ε(u))) + ∇π = f on the torus (gradient
/// flow of the convex energy in the constant-viscosity metric). Returns
/// the velocity sampling and the final transversal residual.
pub fn p_stokes_oracle(
    grid: &TorusGrid,
    force: &[[f64; 3]],
    mu0: f64,
    alpha: f64,
    eps0: &TracelessSym,
    tol: f64,
    max_iters: usize,
) -> (Vec<[f64; 3]>, f64) {
    let fft = Fft::new(grid);
    let d = grid.dim().d();
    let f_spec = SpectralVec::from_values(force, grid, &fft);
    let f_scale = f_spec.norm().max(1e-300);
    let mut u = SpectralVec::zeros(d, grid.num_nodes());

    // warm start from the Newtonian solve at a representative viscosity
    let mut nu_bar = 2.0 * mu0;
    let mut theta: f64 = 1.0;
    let mut prev_res = f64::INFINITY;
    let mut res = f64::INFINITY;
    for iter in 0..max_iters {
        // residual r = P_transversal(f + div σ̃(ε₀ + ε(u)))
        let eps = dd_fluids_core::spectral::sym_grad(&u, grid);
        let eps_phys: Vec<TracelessSym> =
            eps.to_values(grid, &fft).iter().map(|e| e.add(eps0)).collect();
        let sig_phys: Vec<TracelessSym> = eps_phys
            .iter()
            .map(|e| {
                let s = e.norm();
                if s == 0.0 {
                    TracelessSym::zero(grid.dim())
                } else {
                    e.scale(2.0 * mu0 * s.powf(alpha - 1.0))
                }
            })
            .collect();
        let sig_spec =
            dd_fluids_core::spectral::SpectralSym::from_values(&sig_phys, grid, &fft);
        let mut r = SpectralVec::zeros(d, grid.num_nodes());
        let mut res2 = 0.0;
        for mode in grid.modes() {
            if mode.is_zero || mode.is_nyquist {
                continue;
            }
            let sm = dd_fluids_core::spectral::field::coords_to_complex_matrix(
                grid.dim(),
                &sig_spec.get(mode.flat),
            );
            let fv = f_spec.get(mode.flat);
            let mut rv = [Complex64::default(); 3];
            for i in 0..d {
                let mut div = Complex64::default();
                for j in 0..d {
                    div += Complex64::new(0.0, 2.0 * PI * mode.xi[j] as f64) * sm[(i, j)];
                }
                rv[i] = fv[i] + div;
            }
            // transversal part
            let rxi: Complex64 = (0..d).map(|k| rv[k] * mode.xi[k] as f64).sum();
            for k in 0..d {
                rv[k] -= rxi * mode.xi[k] as f64 / mode.xi_norm2;
                res2 += rv[k].norm_sqr();
                r.comp[k][mode.flat] = rv[k];
            }
        }
        res = res2.sqrt() / f_scale;
        if res <= tol {
            break;
        }
        if res > prev_res {
            theta = (theta * 0.5).max(0.05);
        }
        prev_res = res;
        // viscosity scale for the preconditioner (max over nodes, floored)
        if iter % 10 == 0 {
            let numax = eps_phys
                .iter()
                .map(|e| 2.0 * mu0 * e.norm().powf(alpha - 1.0))
                .fold(0.0, f64::max);
            nu_bar = numax.max(1e-6);
        }
        for mode in grid.modes() {
            if mode.is_zero || mode.is_nyquist {
                continue;
            }
            let denom = nu_bar * 4.0 * PI * PI * mode.xi_norm2;
            for k in 0..d {
                u.comp[k][mode.flat] += theta * r.comp[k][mode.flat] / denom;
            }
        }
    }
    (u.to_values(grid, &fft), res)
}

/// Damped Picard fixed point for stationary Navier-Stokes with constant
/// viscosity: u ← Stokes(f − div(u⊗u)).
pub fn navier_stokes_oracle(
    grid: &TorusGrid,
    force: &[[f64; 3]],
    mu0: f64,
    theta: f64,
    tol: f64,
    max_iters: usize,
) -> (Vec<[f64; 3]>, f64) {
    let fft = Fft::new(grid);
    let d = grid.dim().d();
    let f_spec = SpectralVec::from_values(force, grid, &fft);
    let mut u_phys: Vec<[f64; 3]> = vec![[0.0; 3]; grid.num_nodes()];
    let mut du = f64::INFINITY;
    for _ in 0..max_iters {
        let conv = convective_force(&u_phys, grid, &fft);
        let mut u_new = SpectralVec::zeros(d, grid.num_nodes());
        for mode in grid.modes() {
            if mode.is_zero || mode.is_nyquist {
                continue;
            }
            let mut fv = f_spec.get(mode.flat);
            let cv = conv.get(mode.flat);
            for k in 0..d {
                fv[k] -= cv[k];
            }
            let fxi: Complex64 = (0..d).map(|k| fv[k] * mode.xi[k] as f64).sum();
            let denom = 4.0 * PI * PI * mu0 * mode.xi_norm2;
            for k in 0..d {
                let trans = fv[k] - fxi * mode.xi[k] as f64 / mode.xi_norm2;
                u_new.comp[k][mode.flat] = trans / denom;
            }
        }
        let u_new_phys = u_new.to_values(grid, &fft);
        let w = grid.node_weight();
        let mut du2 = 0.0;
        let mut un2 = 0.0;
        for (a, b) in u_new_phys.iter().zip(&u_phys) {
            for k in 0..d {
                du2 += (a[k] - b[k]) * (a[k] - b[k]);
                un2 += a[k] * a[k];
            }
        }
        du = (du2 * w).sqrt();
        for (a, b) in u_phys.iter_mut().zip(&u_new_phys) {
            for k in 0..d {
                a[k] = (1.0 - theta) * a[k] + theta * b[k];
            }
        }
        if du <= tol * (1.0 + (un2 * w).sqrt()) {
            break;
        }
    }
    (u_phys, du)
}

/// Newtonian graph cloud on an ε-lattice of spacing h covering |ε| ≤ r.
pub fn newtonian_lattice(exp: &Exponents, r: f64, h: f64) -> MaterialDataSet {
    let law = ConstitutiveLaw::newtonian(0.5, Dim::D2).unwrap();
    MaterialDataSet::graph_lattice(&law, exp, r, h).unwrap()
}

/// Graph cloud sampled along one strain direction: ε = s·dir for
/// s ∈ [−r, r] with spacing h. Shear- and cellular-forced flows have
/// strain values on exactly such a segment, so this covers the field's
/// range at a density a full lattice could not afford.
pub fn segment_cloud(
    law: &ConstitutiveLaw,
    exp: &Exponents,
    dir: &TracelessSym,
    r: f64,
    h: f64,
) -> MaterialDataSet {
    let unit = dir.scale(1.0 / dir.norm());
    let steps = (r / h).ceil() as i64;
    let points: Vec<dd_fluids_core::phase::PhasePoint> = (-steps..=steps)
        .map(|i| {
            let eps = unit.scale(i as f64 * h);
            dd_fluids_core::phase::PhasePoint::new(eps, law.stress(&eps)).unwrap()
        })
        .collect();
    MaterialDataSet::from_points(*exp, points).unwrap()
}

/// Exact reduction of the shear-forced radial-law problem
/// −div σ̃ + ∇π = (A cos 2πx₂, 0) with prescribed mean strain ε₀ = c₀·B
/// (B the unit off-diagonal direction): the stress coordinate obeys
/// τ(y) = τ₀ − √2 A sin(2πy)/(2π), the strain coordinate is
/// s(y) = G⁻¹(τ(y)) with G(s) = sign(s)·g(|s|), and τ₀ is fixed by
/// mean s = c₀. Velocity comes from a direct 1-d spectral antiderivative.
///
/// Returns (ε₀, σ̃₀, u, per-node strain coordinate, per-node stress
/// coordinate).
pub fn shear_radial_law_oracle(
    grid: &TorusGrid,
    law: &ConstitutiveLaw,
    amplitude: f64,
    eps0_coord: f64,
) -> (TracelessSym, TracelessSym, Vec<[f64; 3]>, Vec<f64>, Vec<f64>) {
    assert_eq!(grid.dim(), Dim::D2);
    let n = grid.n();
    let g_signed = |s: f64| -> f64 { s.signum() * law.radial(s.abs()) };
    let g_inv = |tau: f64| -> f64 {
        // monotone scalar inversion by bisection
        let (mut lo, mut hi) = (-1.0, 1.0);
        while g_signed(lo) > tau {
            lo *= 2.0;
        }
        while g_signed(hi) < tau {
            hi *= 2.0;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if g_signed(mid) < tau {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    };
    let tau_forced: Vec<f64> = (0..n)
        .map(|j| {
            let y = j as f64 / n as f64;
            -std::f64::consts::SQRT_2 * amplitude * (2.0 * PI * y).sin() / (2.0 * PI)
        })
        .collect();
    let mean_s = |tau0: f64| -> f64 {
        tau_forced.iter().map(|tf| g_inv(tau0 + tf)).sum::<f64>() / n as f64
    };
    // bisection for τ₀ with mean strain = c₀
    let (mut lo, mut hi) = (-1.0, 1.0);
    while mean_s(lo) > eps0_coord {
        lo *= 2.0;
    }
    while mean_s(hi) < eps0_coord {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mean_s(mid) < eps0_coord {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let tau0 = 0.5 * (lo + hi);
    let s_line: Vec<f64> = tau_forced.iter().map(|tf| g_inv(tau0 + tf)).collect();
    let s_mean = s_line.iter().sum::<f64>() / n as f64;

    // u₁(y) from ∂_y u₁ = √2 (s − mean s), by direct 1-d DFT sums
    let mut u_line = vec![0.0; n];
    for k in 1..n {
        let xi = if k <= n / 2 { k as i64 } else { k as i64 - n as i64 };
        if xi.unsigned_abs() as usize == n / 2 {
            continue; // Nyquist carries no derivative
        }
        let mut s_hat = Complex64::default();
        for (j, s) in s_line.iter().enumerate() {
            let arg = -2.0 * PI * (k * j) as f64 / n as f64;
            s_hat += (s - s_mean) * Complex64::from_polar(1.0, arg);
        }
        s_hat /= n as f64;
        let coef = s_hat * std::f64::consts::SQRT_2 / Complex64::new(0.0, 2.0 * PI * xi as f64);
        for (j, u) in u_line.iter_mut().enumerate() {
            let arg = 2.0 * PI * (k * j) as f64 / n as f64;
            *u += (coef * Complex64::from_polar(1.0, arg)).re;
        }
    }

    let unit = TracelessSym::offdiag2(1.0 / std::f64::consts::SQRT_2);
    let eps0 = unit.scale(eps0_coord);
    let sig0 = unit.scale(tau0);
    let mut u = vec![[0.0; 3]; grid.num_nodes()];
    let mut s_nodes = vec![0.0; grid.num_nodes()];
    let mut tau_nodes = vec![0.0; grid.num_nodes()];
    for flat in 0..grid.num_nodes() {
        let idx = grid.node_index(flat);
        u[flat] = [u_line[idx[1]], 0.0, 0.0];
        s_nodes[flat] = s_line[idx[1]];
        tau_nodes[flat] = tau0 + tau_forced[idx[1]];
    }
    (eps0, sig0, u, s_nodes, tau_nodes)
}

// ---------------------------------------------------------------------
// Dense equality-constrained least-squares oracle for the quadratic
// global step, assembled from the raw constraint symbols with its own
// O(N²) DFT.
// ---------------------------------------------------------------------

pub struct DenseProjection {
    pub eps: Vec<TracelessSym>,
    pub sig: Vec<TracelessSym>,
}

/// Solves min ‖w − t‖² s.t. A w = b where the rows of A encode, mode by
/// mode: the A₁[ξ] symbol annihilating ε̂, zero strain at Nyquist modes,
/// the transversal momentum balance for σ̂, and the prescribed means.
pub fn dense_projection_oracle(
    grid: &TorusGrid,
    t_eps: &[TracelessSym],
    t_sig: &[TracelessSym],
    force: &[[f64; 3]],
    means: (TracelessSym, TracelessSym),
) -> DenseProjection {
    let dim = grid.dim();
    let d = dim.d();
    let m = dim.y_dim();
    let nodes = grid.num_nodes();
    let nvar = 2 * nodes * m;
    let basis_mats = dim.y_basis();

    // target vector
    let mut t = nalgebra::DVector::zeros(nvar);
    for x in 0..nodes {
        for k in 0..m {
            t[x * m + k] = t_eps[x].coords()[k];
            t[(nodes + x) * m + k] = t_sig[x].coords()[k];
        }
    }

    // plain DFT phases e^{−2πi ξ·x/n}
    let phase = |mode: &dd_fluids_core::spectral::Mode, flat: usize| -> Complex64 {
        let idx = grid.node_index(flat);
        let mut arg = 0.0;
        for k in 0..d {
            arg += mode.xi[k] as f64 * idx[k] as f64 / grid.n() as f64;
        }
        Complex64::from_polar(1.0, -2.0 * PI * arg)
    };

    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut rhs: Vec<f64> = Vec::new();

    // prescribed means
    for k in 0..m {
        let mut row = vec![0.0; nvar];
        for x in 0..nodes {
            row[x * m + k] = 1.0;
        }
        rows.push(row);
        rhs.push(nodes as f64 * means.0.coords()[k]);
        let mut row = vec![0.0; nvar];
        for x in 0..nodes {
            row[(nodes + x) * m + k] = 1.0;
        }
        rows.push(row);
        rhs.push(nodes as f64 * means.1.coords()[k]);
    }

    for mode in grid.modes() {
        if mode.is_zero {
            continue;
        }
        let phases: Vec<Complex64> = (0..nodes).map(|x| phase(&mode, x)).collect();
        if mode.is_nyquist {
            // convention: no strain content at Nyquist modes
            for k in 0..m {
                let mut row_re = vec![0.0; nvar];
                let mut row_im = vec![0.0; nvar];
                for x in 0..nodes {
                    row_re[x * m + k] = phases[x].re;
                    row_im[x * m + k] = phases[x].im;
                }
                rows.push(row_re);
                rhs.push(0.0);
                rows.push(row_im);
                rhs.push(0.0);
            }
            continue;
        }
        // strain rows: (A₁[ξ] ε̂)_{ijkl} = 0 with the raw 4-tensor symbol
        let xi: Vec<f64> = (0..d).map(|k| mode.xi[k] as f64).collect();
        for i in 0..d {
            for j in 0..d {
                for kk in 0..d {
                    for l in 0..d {
                        // coefficient of ε̂_{ab} coordinates
                        let mut coef = vec![0.0; m];
                        for (c, bmat) in coef.iter_mut().zip(&basis_mats) {
                            *c = xi[i] * xi[j] * bmat[(kk, l)]
                                + xi[kk] * xi[l] * bmat[(i, j)]
                                - xi[i] * xi[l] * bmat[(kk, j)]
                                - xi[kk] * xi[j] * bmat[(i, l)];
                        }
                        if coef.iter().all(|c| c.abs() < 1e-300) {
                            continue;
                        }
                        let mut row_re = vec![0.0; nvar];
                        let mut row_im = vec![0.0; nvar];
                        for x in 0..nodes {
                            for (k, c) in coef.iter().enumerate() {
                                row_re[x * m + k] += c * phases[x].re;
                                row_im[x * m + k] += c * phases[x].im;
                            }
                        }
                        rows.push(row_re);
                        rhs.push(0.0);
                        rows.push(row_im);
                        rhs.push(0.0);
                    }
                }
            }
        }
        // momentum rows: τ·(σ̂ξ) = τ·(i f̂/(2π)) for tangents τ ⊥ ξ
        let mut f_hat = vec![Complex64::default(); d];
        for x in 0..nodes {
            for (k, fh) in f_hat.iter_mut().enumerate() {
                *fh += phases[x] * force[x][k];
            }
        }
        // tangent frame by Gram-Schmidt
        let norm = mode.xi_norm2.sqrt();
        let xin: Vec<f64> = xi.iter().map(|v| v / norm).collect();
        let mut tangents: Vec<Vec<f64>> = Vec::new();
        for axis in 0..d {
            let mut v = vec![0.0; d];
            v[axis] = 1.0;
            let dotxi: f64 = v.iter().zip(&xin).map(|(a, b)| a * b).sum();
            for (vi, xi_i) in v.iter_mut().zip(&xin) {
                *vi -= dotxi * xi_i;
            }
            for tprev in &tangents {
                let dot: f64 = v.iter().zip(tprev).map(|(a, b)| a * b).sum();
                for (vi, ti) in v.iter_mut().zip(tprev) {
                    *vi -= dot * ti;
                }
            }
            let nv: f64 = v.iter().map(|a| a * a).sum::<f64>().sqrt();
            if nv > 1e-10 {
                tangents.push(v.iter().map(|a| a / nv).collect());
                if tangents.len() == d - 1 {
                    break;
                }
            }
        }
        for tau in &tangents {
            // coefficient of σ coordinates: τᵀ B_k ξ
            let coef: Vec<f64> = basis_mats
                .iter()
                .map(|bmat| {
                    let mut acc = 0.0;
                    for a in 0..d {
                        for b in 0..d {
                            acc += tau[a] * bmat[(a, b)] * xi[b];
                        }
                    }
                    acc
                })
                .collect();
            let mut rhs_c = Complex64::default();
            for (k, tk) in tau.iter().enumerate() {
                rhs_c += Complex64::new(0.0, 1.0) * f_hat[k] * *tk / (2.0 * PI);
            }
            let mut row_re = vec![0.0; nvar];
            let mut row_im = vec![0.0; nvar];
            for x in 0..nodes {
                for (k, c) in coef.iter().enumerate() {
                    row_re[(nodes + x) * m + k] += c * phases[x].re;
                    row_im[(nodes + x) * m + k] += c * phases[x].im;
                }
            }
            rows.push(row_re);
            rhs.push(rhs_c.re);
            rows.push(row_im);
            rhs.push(rhs_c.im);
        }
    }

    // w = t − Aᵀ (A Aᵀ)⁺ (A t − b)
    let nrows = rows.len();
    let a = nalgebra::DMatrix::from_fn(nrows, nvar, |i, j| rows[i][j]);
    let b = nalgebra::DVector::from_vec(rhs);
    let gram = &a * a.transpose();
    let pinv = gram
        .svd(true, true)
        .pseudo_inverse(1e-11)
        .expect("pseudo-inverse of the constraint Gram matrix");
    let w = &t - a.transpose() * (pinv * (&a * &t - b));

    let mut eps = Vec::with_capacity(nodes);
    let mut sig = Vec::with_capacity(nodes);
    for x in 0..nodes {
        let ec: Vec<f64> = (0..m).map(|k| w[x * m + k]).collect();
        let sc: Vec<f64> = (0..m).map(|k| w[(nodes + x) * m + k]).collect();
        eps.push(TracelessSym::from_coords(dim, &ec).unwrap());
        sig.push(TracelessSym::from_coords(dim, &sc).unwrap());
    }
    DenseProjection { eps, sig }
}
