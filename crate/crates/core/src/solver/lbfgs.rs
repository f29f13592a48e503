//! Limited-memory BFGS with Armijo backtracking, used by the general
//! (p,q) global step. The caller's gradient is already projected onto the
//! constraint tangent space, so plain two-loop recursion applies.

use std::collections::VecDeque;

pub struct LbfgsOptions {
    pub history: usize,
    pub max_iters: usize,
    /// Stop when ‖g‖ ≤ grad_tol · (1 + |f|).
    pub grad_tol: f64,
}

impl Default for LbfgsOptions {
    fn default() -> Self {
        LbfgsOptions { history: 8, max_iters: 500, grad_tol: 1e-8 }
    }
}

pub struct LbfgsOutcome {
    pub converged: bool,
    pub iters: usize,
    pub f: f64,
    pub grad_norm: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Minimizes `fg` (value + gradient into the provided buffer) starting
/// from `x`. The objective must be bounded below; directions are kept in
/// the span of observed gradients.
pub fn minimize<F>(x: &mut [f64], mut fg: F, opts: &LbfgsOptions) -> LbfgsOutcome
where
    F: FnMut(&[f64], &mut [f64]) -> f64,
{
    let n = x.len();
    let mut g = vec![0.0; n];
    let mut f = fg(x, &mut g);
    let mut pairs: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::new(); // (s, y, ρ)
    let mut iters = 0;

    loop {
        let gnorm = norm(&g);
        if gnorm <= opts.grad_tol * (1.0 + f.abs()) {
            return LbfgsOutcome { converged: true, iters, f, grad_norm: gnorm };
        }
        if iters >= opts.max_iters {
            return LbfgsOutcome { converged: false, iters, f, grad_norm: gnorm };
        }
        iters += 1;

        // two-loop recursion
        let mut dir: Vec<f64> = g.iter().map(|v| -v).collect();
        let mut alphas = Vec::with_capacity(pairs.len());
        for (s, y, rho) in pairs.iter().rev() {
            let a = rho * dot(s, &dir);
            for (d, yv) in dir.iter_mut().zip(y) {
                *d -= a * yv;
            }
            alphas.push(a);
        }
        if let Some((s, y, _)) = pairs.back() {
            let gamma = dot(s, y) / dot(y, y).max(1e-300);
            for d in dir.iter_mut() {
                *d *= gamma;
            }
        }
        for ((s, y, rho), a) in pairs.iter().zip(alphas.iter().rev()) {
            let b = rho * dot(y, &dir);
            for (d, sv) in dir.iter_mut().zip(s) {
                *d += (a - b) * sv;
            }
        }

        let mut slope = dot(&g, &dir);
        if slope >= 0.0 {
            // fall back to steepest descent if curvature info went stale
            dir = g.iter().map(|v| -v).collect();
            slope = -gnorm * gnorm;
            pairs.clear();
        }

        // Armijo backtracking
        let mut step = 1.0;
        let x0 = x.to_vec();
        let f0 = f;
        let mut g_new = vec![0.0; n];
        let mut accepted = false;
        for _ in 0..40 {
            for (xi, (x0i, di)) in x.iter_mut().zip(x0.iter().zip(&dir)) {
                *xi = x0i + step * di;
            }
            let f_try = fg(x, &mut g_new);
            if f_try <= f0 + 1e-4 * step * slope {
                f = f_try;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            // no descent achievable along this direction at f64 resolution
            x.copy_from_slice(&x0);
            return LbfgsOutcome { converged: true, iters, f: f0, grad_norm: gnorm };
        }

        let s: Vec<f64> = x.iter().zip(&x0).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-12 * norm(&s) * norm(&y) {
            if pairs.len() == opts.history {
                pairs.pop_front();
            }
            pairs.push_back((s, y, 1.0 / sy));
        }
        g = g_new;
    }
}
