//! Shared oracles for the integration suites. These stay independent of the
//! implementation paths they check.

use gulps::invariants::CanonicalCoord;
use gulps::lp::LpProblem;
use gulps::matcore::{haar_random_su2_with, kron_unitary, Unitary4};
use rand::Rng;

/// Uniform draw from the Weyl chamber by rejection.
pub fn random_chamber(rng: &mut impl Rng) -> CanonicalCoord {
    loop {
        let mut c: [f64; 3] = std::array::from_fn(|_| rng.random_range(0.0..0.5));
        c.sort_by(|a, b| b.partial_cmp(a).unwrap());
        if c[0] + c[1] <= 0.5 {
            return CanonicalCoord::new(c[0], c[1], c[2]);
        }
    }
}

/// A Haar-random local layer.
pub fn random_local(rng: &mut impl Rng) -> Unitary4 {
    let a = haar_random_su2_with(rng);
    let b = haar_random_su2_with(rng);
    kron_unitary(&a, &b)
}

/// Dress a unitary with Haar-random locals on both sides.
pub fn dress(u: &Unitary4, rng: &mut impl Rng) -> Unitary4 {
    random_local(rng) * *u * random_local(rng)
}

/// Fourier-Motzkin feasibility oracle for systems with up to a few
/// variables; exact up to floating arithmetic.
pub fn fourier_motzkin_feasible(p: &LpProblem) -> bool {
    let mut sys: Vec<(Vec<f64>, f64)> = p.rows.clone();
    for (i, (lo, hi)) in p.var_bounds.iter().enumerate() {
        if let Some(hi) = hi {
            let mut c = vec![0.0; p.num_vars];
            c[i] = 1.0;
            sys.push((c, *hi));
        }
        if let Some(lo) = lo {
            let mut c = vec![0.0; p.num_vars];
            c[i] = -1.0;
            sys.push((c, -*lo));
        }
    }
    for var in (0..p.num_vars).rev() {
        let mut pos = Vec::new();
        let mut neg = Vec::new();
        let mut rest = Vec::new();
        for (c, b) in sys {
            let a = c[var];
            if a > 1e-12 {
                pos.push((c, b));
            } else if a < -1e-12 {
                neg.push((c, b));
            } else {
                rest.push((c, b));
            }
        }
        for (cp, bp) in &pos {
            for (cn, bn) in &neg {
                let ap = cp[var];
                let an = -cn[var];
                let mut c = vec![0.0; var];
                for (j, cj) in c.iter_mut().enumerate() {
                    *cj = cp[j] / ap + cn[j] / an;
                }
                rest.push((c, bp / ap + bn / an));
            }
        }
        for row in rest.iter_mut() {
            row.0.truncate(var);
        }
        sys = rest;
    }
    sys.iter().all(|(_, b)| *b >= -1e-7)
}
