//! Levenberg-Marquardt least squares with multiplicative damping. Jacobians
//! come from forward-mode dual numbers, one directional pass per parameter;
//! the central-difference fallback exists only for cross-validation in tests.

use super::real::Dual;

/// A smooth residual map r: R^m -> R^p evaluated on plain and dual scalars.
pub trait ResidualFn: Sync {
    fn dim_out(&self) -> usize;
    fn eval(&self, x: &[f64], out: &mut [f64]);
    fn eval_dual(&self, x: &[Dual], out: &mut [Dual]);

    /// Dual-number Jacobian, row-major p x m.
    fn jacobian(&self, x: &[f64]) -> Vec<Vec<f64>> {
        let m = x.len();
        let p = self.dim_out();
        let mut jac = vec![vec![0.0; m]; p];
        let mut duals: Vec<Dual> = x.iter().map(|&v| Dual::constant(v)).collect();
        let mut out = vec![Dual::constant(0.0); p];
        for j in 0..m {
            duals[j].d = 1.0;
            self.eval_dual(&duals, &mut out);
            for i in 0..p {
                jac[i][j] = out[i].d;
            }
            duals[j].d = 0.0;
        }
        jac
    }
}

#[derive(Debug, Clone)]
pub struct LmOptions {
    /// stop when the residual infinity norm drops below this (per term)
    pub tol: f64,
    pub max_iter: usize,
    pub lambda0: f64,
}

impl Default for LmOptions {
    fn default() -> Self {
        LmOptions { tol: crate::tol::SEGMENT_RESIDUAL, max_iter: 2048, lambda0: 1e-3 }
    }
}

#[derive(Debug, Clone)]
pub struct LmResult {
    pub x: Vec<f64>,
    pub residual: Vec<f64>,
    pub residual_inf: f64,
    pub iterations: usize,
    pub converged: bool,
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, &x| m.max(x.abs()))
}

fn sq_norm(v: &[f64]) -> f64 {
    v.iter().map(|&x| x * x).sum()
}

/// Solve (A + lambda I) p = -g by Cholesky; None when not positive definite.
fn damped_solve(a: &[Vec<f64>], g: &[f64], lambda: f64) -> Option<Vec<f64>> {
    let m = g.len();
    let mut l = vec![vec![0.0f64; m]; m];
    for i in 0..m {
        for j in 0..=i {
            let mut s = a[i][j] + if i == j { lambda } else { 0.0 };
            for k in 0..j {
                s -= l[i][k] * l[j][k];
            }
            if i == j {
                if s <= 0.0 {
                    return None;
                }
                l[i][j] = s.sqrt();
            } else {
                l[i][j] = s / l[j][j];
            }
        }
    }
    // forward then back substitution for L L^T p = -g
    let mut y = vec![0.0f64; m];
    for i in 0..m {
        let mut s = -g[i];
        for k in 0..i {
            s -= l[i][k] * y[k];
        }
        y[i] = s / l[i][i];
    }
    let mut p = vec![0.0f64; m];
    for i in (0..m).rev() {
        let mut s = y[i];
        for k in i + 1..m {
            s -= l[k][i] * p[k];
        }
        p[i] = s / l[i][i];
    }
    Some(p)
}

/// Levenberg-Marquardt iteration: damping starts at `lambda0`, grows x10 on
/// a rejected step and shrinks /10 on an accepted one. Stops when the
/// residual infinity norm reaches `tol` or the iteration budget runs out;
/// the best point found is always returned.
pub fn lm_minimize(f: &dyn ResidualFn, x0: &[f64], opts: &LmOptions) -> LmResult {
    let m = x0.len();
    let p = f.dim_out();
    let mut x = x0.to_vec();
    let mut r = vec![0.0; p];
    f.eval(&x, &mut r);
    let mut cost = sq_norm(&r);
    let mut lambda = opts.lambda0;
    let mut iterations = 0;
    let mut stalled = 0usize;

    while iterations < opts.max_iter {
        if inf_norm(&r) <= opts.tol {
            break;
        }
        iterations += 1;
        let jac = f.jacobian(&x);
        // normal equations
        let mut a = vec![vec![0.0f64; m]; m];
        let mut g = vec![0.0f64; m];
        for row in 0..p {
            for i in 0..m {
                g[i] += jac[row][i] * r[row];
                for j in 0..=i {
                    a[i][j] += jac[row][i] * jac[row][j];
                }
            }
        }
        for i in 0..m {
            for j in 0..i {
                a[j][i] = a[i][j];
            }
        }
        let step = damped_solve(&a, &g, lambda.max(1e-14));
        let accepted = if let Some(step) = step {
            let xc: Vec<f64> = x.iter().zip(&step).map(|(xi, s)| xi + s).collect();
            let mut rc = vec![0.0; p];
            f.eval(&xc, &mut rc);
            let cc = sq_norm(&rc);
            if cc < cost {
                x = xc;
                r = rc;
                cost = cc;
                true
            } else {
                false
            }
        } else {
            false
        };
        if accepted {
            lambda = (lambda / 10.0).max(1e-13);
            stalled = 0;
        } else {
            lambda = (lambda * 10.0).min(1e13);
            stalled += 1;
            if lambda >= 1e13 && stalled > 24 {
                break; // damping saturated with no progress
            }
        }
    }
    let residual_inf = inf_norm(&r);
    LmResult { x, residual: r, residual_inf, iterations, converged: residual_inf <= opts.tol }
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Linear;
    impl ResidualFn for Linear {
        fn dim_out(&self) -> usize {
            1
        }
        fn eval(&self, x: &[f64], out: &mut [f64]) {
            out[0] = x[0] - 3.0;
        }
        fn eval_dual(&self, x: &[Dual], out: &mut [Dual]) {
            out[0] = x[0] - Dual::constant(3.0);
        }
    }

    #[test]
    fn linear_residual_one_step() {
        let res = lm_minimize(&Linear, &[0.0], &LmOptions { tol: 1e-12, ..Default::default() });
        assert!(res.converged);
        assert!((res.x[0] - 3.0).abs() < 1e-12);
    }

    struct Rosenbrock;
    impl ResidualFn for Rosenbrock {
        fn dim_out(&self) -> usize {
            2
        }
        fn eval(&self, x: &[f64], out: &mut [f64]) {
            out[0] = 10.0 * (x[1] - x[0] * x[0]);
            out[1] = 1.0 - x[0];
        }
        fn eval_dual(&self, x: &[Dual], out: &mut [Dual]) {
            let ten = Dual::constant(10.0);
            out[0] = ten * (x[1] - x[0] * x[0]);
            out[1] = Dual::constant(1.0) - x[0];
        }
    }

    #[test]
    fn rosenbrock_converges() {
        let res = lm_minimize(
            &Rosenbrock,
            &[-1.2, 1.0],
            &LmOptions { tol: 1e-10, max_iter: 500, lambda0: 1e-3 },
        );
        assert!(res.converged, "{res:?}");
        assert!((res.x[0] - 1.0).abs() < 1e-8 && (res.x[1] - 1.0).abs() < 1e-8);
    }

    /// Central-difference Jacobian used only to cross-check the dual path.
    pub(crate) fn fd_jacobian(f: &dyn ResidualFn, x: &[f64], h: f64) -> Vec<Vec<f64>> {
        let m = x.len();
        let p = f.dim_out();
        let mut jac = vec![vec![0.0; m]; p];
        let mut xp = x.to_vec();
        let mut plus = vec![0.0; p];
        let mut minus = vec![0.0; p];
        for j in 0..m {
            xp[j] = x[j] + h;
            f.eval(&xp, &mut plus);
            xp[j] = x[j] - h;
            f.eval(&xp, &mut minus);
            xp[j] = x[j];
            for i in 0..p {
                jac[i][j] = (plus[i] - minus[i]) / (2.0 * h);
            }
        }
        jac
    }

    #[test]
    fn dual_jacobian_matches_central_differences() {
        let f = Rosenbrock;
        let x = [0.7, -0.4];
        let a = f.jacobian(&x);
        let b = fd_jacobian(&f, &x, 1e-7);
        for i in 0..2 {
            for j in 0..2 {
                assert!((a[i][j] - b[i][j]).abs() < 1e-5);
            }
        }
    }
}
