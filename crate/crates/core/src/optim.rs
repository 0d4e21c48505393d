//! Small dense quasi-Newton minimiser with finite-difference gradients.

use nalgebra::{SMatrix, SVector};

#[derive(Clone, Copy, Debug)]
pub struct MinimizeOptions {
    /// Central-difference step.
    pub fd_step: f64,
    pub max_iter: usize,
    /// Stop once a full step is shorter than this.
    pub step_tol: f64,
    pub grad_tol: f64,
    /// Largest coordinate change accepted in one step.
    pub max_step: f64,
}

impl Default for MinimizeOptions {
    fn default() -> Self {
        MinimizeOptions {
            fd_step: 1e-6,
            max_iter: 200,
            step_tol: 1e-10,
            grad_tol: 1e-9,
            max_step: 0.5,
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct Minimum<const N: usize> {
    pub x: [f64; N],
    pub value: f64,
    pub converged: bool,
    pub iterations: usize,
}

fn gradient<const N: usize>(f: &impl Fn(&[f64; N]) -> f64, x: &SVector<f64, N>, h: f64) -> SVector<f64, N> {
    let mut g = SVector::<f64, N>::zeros();
    let mut probe: [f64; N] = (*x).into();
    for k in 0..N {
        let orig = probe[k];
        probe[k] = orig + h;
        let fp = f(&probe);
        probe[k] = orig - h;
        let fm = f(&probe);
        probe[k] = orig;
        g[k] = (fp - fm) / (2.0 * h);
    }
    g
}

/// BFGS with Armijo backtracking.
pub fn bfgs<const N: usize>(f: impl Fn(&[f64; N]) -> f64, x0: [f64; N], opts: &MinimizeOptions) -> Minimum<N> {
    let mut x = SVector::<f64, N>::from(x0);
    let mut fx = f(&x0);
    let mut g = gradient(&f, &x, opts.fd_step);
    let mut h_inv = SMatrix::<f64, N, N>::identity();
    let mut converged = false;
    let mut iterations = 0;

    while iterations < opts.max_iter {
        iterations += 1;
        if g.norm() < opts.grad_tol {
            converged = true;
            break;
        }
        let mut dir = -(h_inv * g);
        let mut slope = dir.dot(&g);
        if slope >= 0.0 {
            h_inv = SMatrix::identity();
            dir = -g;
            slope = dir.dot(&g);
        }
        let biggest = dir.amax();
        let mut alpha = if biggest > opts.max_step {
            opts.max_step / biggest
        } else {
            1.0
        };

        let mut accepted = None;
        while alpha * dir.norm() >= opts.step_tol {
            let trial = x + dir * alpha;
            let ft = f(&trial.into());
            if ft <= fx + 1e-4 * alpha * slope {
                accepted = Some((trial, ft));
                break;
            }
            alpha *= 0.5;
        }
        let Some((x_new, f_new)) = accepted else {
            // no descent above the step tolerance
            converged = true;
            break;
        };

        let s = x_new - x;
        let g_new = gradient(&f, &x_new, opts.fd_step);
        let y = g_new - g;
        let sy = s.dot(&y);
        if sy > 1e-18 {
            let rho = 1.0 / sy;
            let eye = SMatrix::<f64, N, N>::identity();
            let left = eye - s * y.transpose() * rho;
            let right = eye - y * s.transpose() * rho;
            h_inv = left * h_inv * right + s * s.transpose() * rho;
        }
        x = x_new;
        fx = f_new;
        g = g_new;
        if s.norm() < opts.step_tol {
            converged = true;
            break;
        }
    }

    Minimum {
        x: x.into(),
        value: fx,
        converged,
        iterations,
    }
}
