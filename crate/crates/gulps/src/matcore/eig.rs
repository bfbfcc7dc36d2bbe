//! Fixed-size eigensolvers: a shifted-QR solver for general complex 4x4
//! matrices and a Jacobi solver for real symmetric ones, plus the joint
//! diagonalization used by the KAK extraction.

use super::{Mat4, C, C_ONE, C_ZERO};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EigError {
    #[error("QR iteration did not converge within the iteration budget")]
    ConvergenceFailure,
    #[error("joint diagonalization failed after perturbation fallback (off-diagonal residual {0:.3e})")]
    NumericalDegeneracy(f64),
}

/// Complex Givens rotation: returns (c, s) with c real so that
/// [c s; -conj(s) c] * [f; g] = [r; 0].
fn givens(f: C, g: C) -> (f64, C) {
    let fa = f.norm();
    let ga = g.norm();
    if ga == 0.0 {
        return (1.0, C_ZERO);
    }
    if fa == 0.0 {
        return (0.0, g.conj() / C::from(ga));
    }
    let h = (fa * fa + ga * ga).sqrt();
    let c = fa / h;
    let s = (f / C::from(fa)) * g.conj() / C::from(h);
    (c, s)
}

fn apply_left(m: &mut Mat4, i: usize, c: f64, s: C) {
    for j in 0..4 {
        let a = m.0[i][j];
        let b = m.0[i + 1][j];
        m.0[i][j] = C::from(c) * a + s * b;
        m.0[i + 1][j] = -s.conj() * a + C::from(c) * b;
    }
}

fn apply_right(m: &mut Mat4, i: usize, c: f64, s: C) {
    // multiply by G^H on the right (columns i, i+1)
    for r in 0..4 {
        let a = m.0[r][i];
        let b = m.0[r][i + 1];
        m.0[r][i] = a * C::from(c) + b * s.conj();
        m.0[r][i + 1] = -a * s + b * C::from(c);
    }
}

/// Reduce to upper Hessenberg form with Givens rotations, accumulating the
/// similarity transform into `q` (A = q H q^H).
fn hessenberg(a: &mut Mat4, q: &mut Mat4) {
    for col in 0..2 {
        for row in (col + 2..4).rev() {
            let f = a.0[row - 1][col];
            let g = a.0[row][col];
            if g.norm() < 1e-300 {
                continue;
            }
            let (c, s) = givens(f, g);
            apply_left(a, row - 1, c, s);
            apply_right(a, row - 1, c, s);
            apply_right(q, row - 1, c, s);
        }
    }
}

/// Wilkinson shift from the trailing 2x2 of the active block.
fn wilkinson_shift(h: &Mat4, hi: usize) -> C {
    let a = h.0[hi - 1][hi - 1];
    let b = h.0[hi - 1][hi];
    let c = h.0[hi][hi - 1];
    let d = h.0[hi][hi];
    let tr = a + d;
    let det = a * d - b * c;
    let disc = (tr * tr - C::from(4.0) * det).sqrt();
    let l1 = (tr + disc) * C::from(0.5);
    let l2 = (tr - disc) * C::from(0.5);
    if (l1 - d).norm() <= (l2 - d).norm() {
        l1
    } else {
        l2
    }
}

/// Eigenvalues and eigenvectors of a general (diagonalizable) complex 4x4
/// matrix. Eigenvectors are returned as the columns of the second result.
pub fn eig4(m: &Mat4) -> Result<([C; 4], Mat4), EigError> {
    let scale = m.frobenius_norm().max(1e-300);
    let mut h = *m;
    let mut q = Mat4::identity();
    hessenberg(&mut h, &mut q);

    let eps = 1e-15;
    let mut hi = 3usize;
    let mut iters = 0usize;
    let budget = 256usize;
    while hi > 0 {
        // deflate converged subdiagonals
        let mut deflated = true;
        while hi > 0 && deflated {
            let off = h.0[hi][hi - 1].norm();
            let local = h.0[hi - 1][hi - 1].norm() + h.0[hi][hi].norm();
            if off <= eps * local.max(scale * 1e-2) {
                h.0[hi][hi - 1] = C_ZERO;
                hi -= 1;
            } else {
                deflated = false;
            }
        }
        if hi == 0 {
            break;
        }
        // find the start of the active unreduced block
        let mut lo = hi;
        while lo > 0 {
            let off = h.0[lo][lo - 1].norm();
            let local = h.0[lo - 1][lo - 1].norm() + h.0[lo][lo].norm();
            if off <= eps * local.max(scale * 1e-2) {
                h.0[lo][lo - 1] = C_ZERO;
                break;
            }
            lo -= 1;
        }
        iters += 1;
        if iters > budget {
            return Err(EigError::ConvergenceFailure);
        }
        // exceptional shift every 12 stalled sweeps
        let sigma = if iters % 12 == 0 {
            h.0[hi][hi] + C::from(0.751) * C::from(h.0[hi][hi - 1].norm())
        } else {
            wilkinson_shift(&h, hi)
        };
        for i in 0..4 {
            h.0[i][i] -= sigma;
        }
        let mut rots: Vec<(usize, f64, C)> = Vec::with_capacity(3);
        for k in lo..hi {
            let (c, s) = givens(h.0[k][k], h.0[k + 1][k]);
            apply_left(&mut h, k, c, s);
            rots.push((k, c, s));
        }
        for &(k, c, s) in &rots {
            apply_right(&mut h, k, c, s);
            apply_right(&mut q, k, c, s);
        }
        for i in 0..4 {
            h.0[i][i] += sigma;
        }
    }

    // h is (numerically) upper triangular: back-substitute eigenvectors
    let values = [h.0[0][0], h.0[1][1], h.0[2][2], h.0[3][3]];
    let mut vectors = Mat4::zero();
    for (j, &lambda) in values.iter().enumerate() {
        let mut y = [C_ZERO; 4];
        y[j] = C_ONE;
        for i in (0..j).rev() {
            let mut acc = C_ZERO;
            for k in i + 1..=j {
                acc += h.0[i][k] * y[k];
            }
            let mut denom = h.0[i][i] - lambda;
            if denom.norm() < 1e-13 * scale {
                denom += C::from(1e-13 * scale);
            }
            y[i] = -acc / denom;
        }
        let x = q.apply(&y);
        let norm = x.iter().map(|e| e.norm_sqr()).sum::<f64>().sqrt();
        for i in 0..4 {
            vectors.0[i][j] = x[i] / C::from(norm);
        }
    }
    Ok((values, vectors))
}

// ---------------------------------------------------------------------------
// Real symmetric 4x4: cyclic Jacobi
// ---------------------------------------------------------------------------

/// Eigen-decomposition of a real symmetric 4x4 matrix by cyclic Jacobi.
/// Returns (eigenvalues, orthogonal matrix with eigenvector columns),
/// unsorted.
pub fn sym_eig4(a: &[[f64; 4]; 4]) -> ([f64; 4], [[f64; 4]; 4]) {
    let mut m = *a;
    let mut p = [[0.0f64; 4]; 4];
    for (i, row) in p.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    for _sweep in 0..64 {
        let mut off = 0.0;
        for i in 0..4 {
            for j in i + 1..4 {
                off += m[i][j] * m[i][j];
            }
        }
        if off < 1e-30 {
            break;
        }
        for i in 0..3 {
            for j in i + 1..4 {
                if m[i][j].abs() < 1e-300 {
                    continue;
                }
                let theta = (m[j][j] - m[i][i]) / (2.0 * m[i][j]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..4 {
                    let (aik, ajk) = (m[i][k], m[j][k]);
                    m[i][k] = c * aik - s * ajk;
                    m[j][k] = s * aik + c * ajk;
                }
                for k in 0..4 {
                    let (aki, akj) = (m[k][i], m[k][j]);
                    m[k][i] = c * aki - s * akj;
                    m[k][j] = s * aki + c * akj;
                }
                for k in 0..4 {
                    let (pki, pkj) = (p[k][i], p[k][j]);
                    p[k][i] = c * pki - s * pkj;
                    p[k][j] = s * pki + c * pkj;
                }
            }
        }
    }
    ([m[0][0], m[1][1], m[2][2], m[3][3]], p)
}

fn rotate_columns(p: &mut [[f64; 4]; 4], i: usize, j: usize, c: f64, s: f64) {
    for row in p.iter_mut() {
        let (a, b) = (row[i], row[j]);
        row[i] = c * a - s * b;
        row[j] = s * a + c * b;
    }
}

fn project(p: &[[f64; 4]; 4], s: &[[f64; 4]; 4]) -> [[f64; 4]; 4] {
    // P^T S P
    let mut sp = [[0.0f64; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            let mut acc = 0.0;
            for k in 0..4 {
                acc += s[i][k] * p[k][j];
            }
            sp[i][j] = acc;
        }
    }
    let mut out = [[0.0f64; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            let mut acc = 0.0;
            for k in 0..4 {
                acc += p[k][i] * sp[k][j];
            }
            out[i][j] = acc;
        }
    }
    out
}

fn max_offdiag(a: &[[f64; 4]; 4]) -> f64 {
    let mut m = 0.0f64;
    for i in 0..4 {
        for j in 0..4 {
            if i != j {
                m = m.max(a[i][j].abs());
            }
        }
    }
    m
}

/// Simultaneous orthogonal diagonalization of two commuting real symmetric
/// 4x4 matrices. Diagonalizes `r` first, then resolves degenerate eigenspaces
/// of `r` against `s`; falls back to random-mix Jacobi if validation fails.
pub fn joint_diag_sym4(r: &[[f64; 4]; 4], s: &[[f64; 4]; 4]) -> Result<[[f64; 4]; 4], EigError> {
    let tol = 1e-9 * (1.0 + max_abs(r).max(max_abs(s)));
    let attempt = |p: [[f64; 4]; 4]| -> Option<[[f64; 4]; 4]> {
        let dr = max_offdiag(&project(&p, r));
        let ds = max_offdiag(&project(&p, s));
        if dr <= tol && ds <= tol {
            Some(p)
        } else {
            None
        }
    };

    // primary: eigenbasis of r, then Jacobi on s restricted to r-clusters
    let (vals, mut p) = sym_eig4(r);
    let mut order = [0usize, 1, 2, 3];
    order.sort_by(|&a, &b| vals[a].partial_cmp(&vals[b]).unwrap());
    let sorted_vals: Vec<f64> = order.iter().map(|&i| vals[i]).collect();
    let mut ps = [[0.0f64; 4]; 4];
    for (new, &old) in order.iter().enumerate() {
        for k in 0..4 {
            ps[k][new] = p[k][old];
        }
    }
    p = ps;
    // cluster r-eigenvalues and diagonalize s within each cluster
    let cluster_tol = 1e-7;
    let mut start = 0;
    while start < 4 {
        let mut end = start + 1;
        while end < 4 && (sorted_vals[end] - sorted_vals[end - 1]).abs() <= cluster_tol {
            end += 1;
        }
        if end - start > 1 {
            // Jacobi on the projected block of s spanned by columns start..end
            for _sweep in 0..32 {
                let proj = project(&p, s);
                let mut biggest = 0.0;
                for i in start..end {
                    for j in i + 1..end {
                        biggest = f64::max(biggest, proj[i][j].abs());
                    }
                }
                if biggest < 1e-14 {
                    break;
                }
                for i in start..end {
                    for j in i + 1..end {
                        let proj = project(&p, s);
                        if proj[i][j].abs() < 1e-300 {
                            continue;
                        }
                        let theta = (proj[j][j] - proj[i][i]) / (2.0 * proj[i][j]);
                        let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                        let c = 1.0 / (t * t + 1.0).sqrt();
                        let sn = t * c;
                        rotate_columns(&mut p, i, j, c, sn);
                    }
                }
            }
        }
        start = end;
    }
    if let Some(ok) = attempt(p) {
        return Ok(ok);
    }

    // fallback: diagonalize fixed mixes r + t s; for commuting symmetric pairs
    // a generic mix has simple spectrum and its eigenbasis diagonalizes both
    let mut worst = f64::INFINITY;
    for &t in &[0.4172, 0.9397, 1.7321, 0.1618] {
        let mut mix = [[0.0f64; 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                mix[i][j] = r[i][j] + t * s[i][j];
            }
        }
        let (_, pm) = sym_eig4(&mix);
        if let Some(ok) = attempt(pm) {
            return Ok(ok);
        }
        let res = max_offdiag(&project(&pm, r)).max(max_offdiag(&project(&pm, s)));
        worst = worst.min(res);
    }
    Err(EigError::NumericalDegeneracy(worst))
}

fn max_abs(a: &[[f64; 4]; 4]) -> f64 {
    a.iter().flatten().fold(0.0f64, |m, &x| m.max(x.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcore::{haar_random_su4, C};

    #[test]
    fn eig4_identity() {
        let (vals, _) = eig4(&Mat4::identity()).unwrap();
        for v in vals {
            assert!((v - C_ONE).norm() < 1e-12);
        }
    }

    #[test]
    fn eig4_diagonal_cycle() {
        let d = Mat4::diag([C_ONE, C::new(0.0, 1.0), -C_ONE, C::new(0.0, -1.0)]);
        let (vals, vecs) = eig4(&d).unwrap();
        let mut got: Vec<(f64, f64)> = vals.iter().map(|v| (v.re, v.im)).collect();
        got.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut want = [(1.0, 0.0), (0.0, 1.0), (-1.0, 0.0), (0.0, -1.0)];
        want.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (g, w) in got.iter().zip(want.iter()) {
            assert!((g.0 - w.0).abs() < 1e-12 && (g.1 - w.1).abs() < 1e-12);
        }
        // residuals
        for j in 0..4 {
            let v: [C; 4] = std::array::from_fn(|i| vecs.0[i][j]);
            let mv = d.apply(&v);
            let mut res = 0.0f64;
            for i in 0..4 {
                res = res.max((mv[i] - vals[j] * v[i]).norm());
            }
            assert!(res < 1e-10);
        }
    }

    #[test]
    fn eig4_similarity_invariance() {
        let d = Mat4::diag([C::new(2.0, 0.0), C::new(-1.0, 0.5), C::new(0.3, -0.7), C::new(1.1, 1.1)]);
        for seed in 0..20u64 {
            let u = haar_random_su4(seed);
            let m = u.adjoint().matrix().clone() * d * *u.matrix();
            let (vals, vecs) = eig4(&m).unwrap();
            let mut got: Vec<(f64, f64)> = vals.iter().map(|v| (v.re, v.im)).collect();
            got.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let mut want: Vec<(f64, f64)> = (0..4).map(|i| (d.0[i][i].re, d.0[i][i].im)).collect();
            want.sort_by(|a, b| a.partial_cmp(b).unwrap());
            for (g, w) in got.iter().zip(want.iter()) {
                assert!((g.0 - w.0).abs() < 1e-8 && (g.1 - w.1).abs() < 1e-8, "seed {seed}");
            }
            for j in 0..4 {
                let v: [C; 4] = std::array::from_fn(|i| vecs.0[i][j]);
                let mv = m.apply(&v);
                let mut res = 0.0f64;
                for i in 0..4 {
                    res = res.max((mv[i] - vals[j] * v[i]).norm());
                }
                assert!(res < crate::tol::EIG_RESIDUAL, "seed {seed} residual {res}");
            }
        }
    }

    #[test]
    fn eig4_unitary_spectrum_on_unit_circle() {
        for seed in 100..140u64 {
            let u = haar_random_su4(seed);
            let (vals, _) = eig4(u.matrix()).unwrap();
            for v in vals {
                assert!((v.norm() - 1.0).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn jacobi_diagonalizes_symmetric() {
        let a = [
            [2.0, 0.5, -0.3, 0.1],
            [0.5, 1.0, 0.2, -0.6],
            [-0.3, 0.2, -1.5, 0.4],
            [0.1, -0.6, 0.4, 0.8],
        ];
        let (vals, p) = sym_eig4(&a);
        let d = project(&p, &a);
        assert!(max_offdiag(&d) < 1e-12);
        let mut trace = 0.0;
        for v in vals {
            trace += v;
        }
        assert!((trace - (2.0 + 1.0 - 1.5 + 0.8)).abs() < 1e-12);
    }

    #[test]
    fn joint_diag_commuting_pair() {
        // build commuting pair from a shared eigenbasis with degeneracies
        let q = {
            let a = [
                [1.0, 0.4, 0.0, -0.2],
                [0.4, 0.7, 0.3, 0.0],
                [0.0, 0.3, -0.5, 0.6],
                [-0.2, 0.0, 0.6, 0.2],
            ];
            sym_eig4(&a).1
        };
        let build = |d: [f64; 4]| -> [[f64; 4]; 4] {
            let mut out = [[0.0f64; 4]; 4];
            for i in 0..4 {
                for j in 0..4 {
                    let mut acc = 0.0;
                    for k in 0..4 {
                        acc += q[i][k] * d[k] * q[j][k];
                    }
                    out[i][j] = acc;
                }
            }
            out
        };
        let r = build([1.0, 1.0, -0.5, -0.5]); // degenerate pairs
        let s = build([0.3, -0.9, 0.3, 0.7]);
        let p = joint_diag_sym4(&r, &s).unwrap();
        assert!(max_offdiag(&project(&p, &r)) < 1e-8);
        assert!(max_offdiag(&project(&p, &s)) < 1e-8);
    }
}
