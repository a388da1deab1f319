//! Dense BFGS with a backtracking Armijo line search, for small smooth problems.

use nalgebra::{DMatrix, DVector};

pub(crate) struct Tolerances {
    /// Stop once the largest gradient component falls below this.
    pub grad: f64,
    /// Stop after three successive steps that each change `f` by less than this.
    pub f: f64,
    pub max_iter: usize,
}

/// Minimizes `fg`, which returns the value and writes the gradient, and
/// returns the final point.
pub(crate) fn minimize<F>(mut fg: F, x0: Vec<f64>, tol: &Tolerances) -> Vec<f64>
where
    F: FnMut(&[f64], &mut [f64]) -> f64,
{
    let n = x0.len();
    let mut x = DVector::from_vec(x0);
    let mut g = DVector::zeros(n);
    let mut f = fg(x.as_slice(), g.as_mut_slice());
    if !f.is_finite() {
        return x.as_slice().to_vec();
    }
    let mut h = DMatrix::<f64>::identity(n, n);
    let mut g_new = DVector::zeros(n);
    let mut quiet = 0;
    for _ in 0..tol.max_iter {
        if g.amax() < tol.grad {
            break;
        }
        let mut dir = -(&h * &g);
        let mut slope = dir.dot(&g);
        if slope >= 0.0 {
            h.fill_with_identity();
            dir = -g.clone();
            slope = dir.dot(&g);
        }
        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..60 {
            let trial = &x + step * &dir;
            let ft = fg(trial.as_slice(), g_new.as_mut_slice());
            if ft.is_finite() && ft <= f + 1e-4 * step * slope {
                accepted = Some((trial, ft));
                break;
            }
            step *= 0.5;
        }
        let Some((x_new, f_new)) = accepted else { break };
        let s = &x_new - &x;
        let y = &g_new - &g;
        let sy = s.dot(&y);
        if sy > 1e-16 * s.norm() * y.norm() && sy > 0.0 {
            let rho = 1.0 / sy;
            let hy = &h * &y;
            let yhy = y.dot(&hy);
            h += (rho * rho * yhy + rho) * (&s * s.transpose()) - rho * (&hy * s.transpose() + &s * hy.transpose());
        }
        quiet = if (f - f_new).abs() < tol.f { quiet + 1 } else { 0 };
        x = x_new;
        f = f_new;
        g.copy_from(&g_new);
        if quiet >= 3 {
            break;
        }
    }
    x.as_slice().to_vec()
}
