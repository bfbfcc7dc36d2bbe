//! Haar-distributed unitary sampling: complex Ginibre ensemble followed by a
//! QR factorization with the R-diagonal phase fix, then a determinant rescale
//! into the special unitary group. Gaussians come from the Box-Muller
//! transform so the stream is a pure function of the seed.

use super::{Mat2, Mat4, Unitary4, C, C_ZERO};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn gaussian_pair(rng: &mut impl Rng) -> (f64, f64) {
    // Box-Muller; u1 in (0, 1] avoids log(0)
    let u1: f64 = 1.0 - rng.random::<f64>();
    let u2: f64 = rng.random::<f64>();
    let r = (-2.0 * u1.ln()).sqrt();
    let t = 2.0 * std::f64::consts::PI * u2;
    (r * t.cos(), r * t.sin())
}

fn complex_gaussian(rng: &mut impl Rng) -> C {
    let (a, b) = gaussian_pair(rng);
    C::new(a, b)
}

/// Gram-Schmidt QR of an n x n complex matrix stored as rows of columns;
/// returns Q columns and the R diagonal.
fn qr_columns<const N: usize>(cols: &mut [[C; N]], rdiag: &mut [C]) {
    for j in 0..cols.len() {
        for k in 0..j {
            let mut proj = C_ZERO;
            for i in 0..N {
                proj += cols[k][i].conj() * cols[j][i];
            }
            for i in 0..N {
                let sub = proj * cols[k][i];
                cols[j][i] -= sub;
            }
        }
        // repeat once for numerical orthogonality
        for k in 0..j {
            let mut proj = C_ZERO;
            for i in 0..N {
                proj += cols[k][i].conj() * cols[j][i];
            }
            for i in 0..N {
                let sub = proj * cols[k][i];
                cols[j][i] -= sub;
            }
        }
        let norm = cols[j].iter().map(|e| e.norm_sqr()).sum::<f64>().sqrt();
        rdiag[j] = C::from(norm);
        for i in 0..N {
            cols[j][i] /= C::from(norm);
        }
    }
}

/// Haar-random element of SU(4), deterministic in the seed.
pub fn haar_random_su4(seed: u64) -> Unitary4 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    haar_random_su4_with(&mut rng)
}

/// Haar-random element of SU(4) drawn from a caller-owned generator.
pub fn haar_random_su4_with(rng: &mut impl Rng) -> Unitary4 {
    let mut cols = [[C_ZERO; 4]; 4];
    // Ginibre entries column by column so QR sees them in a fixed order
    for col in cols.iter_mut() {
        for e in col.iter_mut() {
            *e = complex_gaussian(rng);
        }
    }
    // phase fix: with Gram-Schmidt the R diagonal is already real positive,
    // which is exactly the required lambda = r_jj / |r_jj| correction
    let mut rdiag = [C_ZERO; 4];
    qr_columns::<4>(&mut cols, &mut rdiag);
    let q = Mat4::from_fn(|i, j| cols[j][i]);
    // rescale determinant to 1 (principal root)
    let d = q.det();
    let phase = C::from_polar(1.0, -d.arg() / 4.0);
    Unitary4::new(q.scale(phase)).expect("haar sample must be unitary")
}

/// Haar-random element of SU(2), deterministic in the seed.
pub fn haar_random_su2(seed: u64) -> Mat2 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    haar_random_su2_with(&mut rng)
}

/// Haar-random element of SU(2) drawn from a caller-owned generator.
pub fn haar_random_su2_with(rng: &mut impl Rng) -> Mat2 {
    let mut cols = [[C_ZERO; 2]; 2];
    for col in cols.iter_mut() {
        for e in col.iter_mut() {
            *e = complex_gaussian(rng);
        }
    }
    let mut rdiag = [C_ZERO; 2];
    qr_columns::<2>(&mut cols, &mut rdiag);
    let q = Mat2([[cols[0][0], cols[1][0]], [cols[0][1], cols[1][1]]]);
    let d = q.det();
    let phase = C::from_polar(1.0, -d.arg() / 2.0);
    q.scale(phase)
}
