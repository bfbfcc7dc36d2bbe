//! Gate-invariant representations: the log spectrum of the Cartan double,
//! Weyl-chamber canonical coordinates, Makhlin invariants, and the full KAK
//! decomposition used to upgrade local equivalence to unitary equivalence.
//!
//! Conventions (shared by every map in this module):
//! - the magic basis is [`crate::matcore::magic_basis`];
//! - canonical coordinates are in units of pi, so CNOT sits at (1/4, 0, 0);
//! - log spectra are in full turns: the Cartan double has eigenvalues
//!   exp(-2 pi i a_k), sorted non-increasing with sum zero, branch cut at
//!   (-1/2, 1/2] before the sum fix.

use crate::matcore::{
    can_gate, from_magic, joint_diag_sym4, kron, to_magic, Mat2, Mat4, Unitary4, C, C_ONE, C_ZERO,
    MAGIC_SIGNS,
};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum InvariantError {
    #[error("eigenstructure extraction failed: {0}")]
    Eig(#[from] crate::matcore::EigError),
    #[error("could not align Cartan-double spectra (best mismatch {0:.3e})")]
    SpectrumMismatch(f64),
    #[error("local factor is not a Kronecker product (defect {0:.3e})")]
    NotProduct(f64),
}

// ---------------------------------------------------------------------------
// Types
// ---------------------------------------------------------------------------

/// Weyl-chamber point (c1, c2, c3) in units of pi.
///
/// Canonical form satisfies 1/2 >= c1 >= c2 >= c3 >= 0 and c1 + c2 <= 1/2;
/// raw triples are ordinary `[f64; 3]` arrays until passed through
/// [`weyl_canonicalize`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CanonicalCoord {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
}

impl CanonicalCoord {
    pub fn new(c1: f64, c2: f64, c3: f64) -> Self {
        CanonicalCoord { c1, c2, c3 }
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.c1, self.c2, self.c3]
    }

    pub fn is_chamber(&self, eps: f64) -> bool {
        self.c1 <= 0.5 + eps
            && self.c1 >= self.c2 - eps
            && self.c2 >= self.c3 - eps
            && self.c3 >= -eps
            && self.c1 + self.c2 <= 0.5 + eps
    }

    pub fn max_abs_diff(&self, other: &CanonicalCoord) -> f64 {
        (self.c1 - other.c1)
            .abs()
            .max((self.c2 - other.c2).abs())
            .max((self.c3 - other.c3).abs())
    }

    /// The canonical gate carrying these coordinates.
    pub fn gate(&self) -> Unitary4 {
        can_gate(self.as_array())
    }
}

/// Log spectrum of the Cartan double, in turn units: four reals sorted
/// non-increasing summing to zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogSpec(pub [f64; 4]);

impl LogSpec {
    pub fn sum(&self) -> f64 {
        self.0.iter().sum()
    }

    pub fn max_abs_diff(&self, other: &LogSpec) -> f64 {
        (0..4).map(|i| (self.0[i] - other.0[i]).abs()).fold(0.0, f64::max)
    }
}

/// Makhlin invariant triple (Re g1, Im g1, g2).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MakhlinInv {
    pub g1_re: f64,
    pub g1_im: f64,
    pub g2: f64,
}

impl MakhlinInv {
    pub fn as_array(&self) -> [f64; 3] {
        [self.g1_re, self.g1_im, self.g2]
    }

    pub fn distance(&self, other: &MakhlinInv) -> f64 {
        let a = self.as_array();
        let b = other.as_array();
        (0..3).map(|i| (a[i] - b[i]).powi(2)).sum::<f64>().sqrt()
    }
}

/// KAK factorization u = e^{i phase} (k1l x k1r) CAN(coord) (k2l x k2r),
/// with all four local factors in SU(2).
#[derive(Debug, Clone)]
pub struct KakDecomp {
    pub k1: (Mat2, Mat2),
    pub coord: CanonicalCoord,
    pub k2: (Mat2, Mat2),
    pub global_phase: f64,
}

impl KakDecomp {
    /// Multiply the factorization back out.
    pub fn reconstruct(&self) -> Mat4 {
        let left = kron(&self.k1.0, &self.k1.1);
        let right = kron(&self.k2.0, &self.k2.1);
        (left * *self.coord.gate().matrix() * right).scale(C::from_polar(1.0, self.global_phase))
    }
}

// ---------------------------------------------------------------------------
// Log spectrum
// ---------------------------------------------------------------------------

/// Wrap into (-1/2, 1/2].
fn wrap_turn(x: f64) -> f64 {
    x - (x - 0.5).ceil()
}

/// Deterministic representative: wrap each entry, shift entries by +-1 until
/// the (integer) sum vanishes, sort non-increasing.
pub(crate) fn normalize_logspec(raw: [f64; 4]) -> LogSpec {
    let mut a: [f64; 4] = std::array::from_fn(|i| wrap_turn(raw[i]));
    let mut k = a.iter().sum::<f64>().round() as i64;
    while k > 0 {
        let idx = (0..4).max_by(|&i, &j| a[i].partial_cmp(&a[j]).unwrap()).unwrap();
        a[idx] -= 1.0;
        k -= 1;
    }
    while k < 0 {
        let idx = (0..4).min_by(|&i, &j| a[i].partial_cmp(&a[j]).unwrap()).unwrap();
        a[idx] += 1.0;
        k += 1;
    }
    a.sort_by(|x, y| y.partial_cmp(x).unwrap());
    LogSpec(a)
}

/// Slot phases of CAN(c) in magic-basis column order (unsorted):
/// the gate is diag(exp(-i pi theta_j)) with theta_j the sign-pattern dot c.
pub(crate) fn theta_slots(c: &CanonicalCoord) -> [f64; 4] {
    let v = c.as_array();
    std::array::from_fn(|j| {
        MAGIC_SIGNS[j][0] * v[0] + MAGIC_SIGNS[j][1] * v[1] + MAGIC_SIGNS[j][2] * v[2]
    })
}

/// The Cartan double in the magic basis, symmetrized against roundoff.
fn cartan_double(u: &Unitary4) -> Mat4 {
    let ub = to_magic(&u.special_lift());
    let mt = ub.transpose() * ub;
    mt.add(&mt.transpose()).scale(C::from(0.5))
}

/// Eigenvalues of a symmetric unitary matrix through the real joint
/// diagonalization of its commuting real and imaginary parts; considerably
/// more accurate than the general QR path, which remains the fallback.
fn sym_unitary_eigenvalues(m: &Mat4) -> Result<[C; 4], InvariantError> {
    let re: [[f64; 4]; 4] = std::array::from_fn(|i| std::array::from_fn(|j| m.0[i][j].re));
    let im: [[f64; 4]; 4] = std::array::from_fn(|i| std::array::from_fn(|j| m.0[i][j].im));
    match joint_diag_sym4(&re, &im) {
        Ok(p) => {
            let pm = Mat4::from_fn(|i, j| C::from(p[i][j]));
            let d = pm.transpose() * *m * pm;
            Ok(std::array::from_fn(|i| d.0[i][i]))
        }
        Err(_) => {
            let (vals, _) = crate::matcore::eig4(m)?;
            Ok(vals)
        }
    }
}

/// Log spectrum of the Cartan double of `u`: lift into SU(4), conjugate into
/// the magic basis, form m = u_B^T u_B and read off the eigenvalue phases
/// exp(-2 pi i a_k). Repeated eigenvalues are fine here (values only).
pub fn log_spectrum(u: &Unitary4) -> Result<LogSpec, InvariantError> {
    let vals = sym_unitary_eigenvalues(&cartan_double(u))?;
    let raw: [f64; 4] = std::array::from_fn(|i| -vals[i].arg() / (2.0 * std::f64::consts::PI));
    Ok(normalize_logspec(raw))
}

/// The two-turn shift identifying a projective target with its other
/// special-unitary lift: spectrum of i*U given the spectrum of U.
pub fn rho_reflect(spec: &LogSpec) -> LogSpec {
    normalize_logspec(std::array::from_fn(|i| spec.0[i] + 0.5))
}

/// Affine bridge from chamber coordinates to the log spectrum:
/// (c1+c2-c3, c1-c2+c3, -c1+c2+c3, -c1-c2-c3), re-sorted non-increasing.
/// For chamber triples the map is already sorted, which is what lets LP
/// variables stay in coordinate space while rows act on spectra.
pub fn coords_to_logspec(c: &CanonicalCoord) -> LogSpec {
    let mut a = theta_slots(c);
    a.sort_by(|x, y| y.partial_cmp(x).unwrap());
    LogSpec(a)
}

/// Chamber triple from a normalized log spectrum (inverse of the affine
/// bridge, before Weyl reduction).
pub(crate) fn coords_from_logspec(s: &LogSpec) -> [f64; 3] {
    let a = &s.0;
    [(a[0] + a[1]) / 2.0, (a[0] + a[2]) / 2.0, (a[1] + a[2]) / 2.0]
}

// ---------------------------------------------------------------------------
// Weyl chamber reduction
// ---------------------------------------------------------------------------

/// Reduce a raw triple into the Weyl chamber: coordinates mod 1/2, sorted
/// non-increasing, the (c1, c2) pair reflected through c1 + c2 = 1/2 when it
/// overshoots, and the base-edge identification (c3 = 0 allows a lone
/// reflection c1 -> 1/2 - c1) applied so the map is constant on
/// local-equivalence classes.
pub fn weyl_canonicalize(raw: [f64; 3]) -> CanonicalCoord {
    let mut c: [f64; 3] = std::array::from_fn(|i| raw[i].rem_euclid(0.5));
    c.sort_by(|a, b| b.partial_cmp(a).unwrap());
    if c[0] + c[1] > 0.5 {
        let (a, b) = (0.5 - c[1], 0.5 - c[0]);
        c[0] = a;
        c[1] = b;
        c.sort_by(|a, b| b.partial_cmp(a).unwrap());
    }
    debug_assert!(c[0] + c[1] <= 0.5 + 1e-12);
    // base-edge identification
    if c[2] <= 1e-9 && c[0] > 0.25 {
        c[0] = 0.5 - c[0];
        c.sort_by(|a, b| b.partial_cmp(a).unwrap());
    }
    CanonicalCoord::new(c[0], c[1], c[2])
}

/// Canonical coordinates of a unitary: spectrum route plus Weyl reduction.
/// Invariant under local multiplication on either side and global phase.
pub fn canonical_coords(u: &Unitary4) -> Result<CanonicalCoord, InvariantError> {
    let spec = log_spectrum(u)?;
    Ok(weyl_canonicalize(coords_from_logspec(&spec)))
}

// ---------------------------------------------------------------------------
// Makhlin invariants
// ---------------------------------------------------------------------------

/// Makhlin invariants from the matrix: with m = u_B^T u_B over the SU(4)
/// lift, g1 = tr^2(m) / (16 det u_B) and g2 = (tr^2 m - tr m^2) / (4 det u_B).
pub fn makhlin(u: &Unitary4) -> MakhlinInv {
    let ub = to_magic(&u.special_lift());
    let m = ub.transpose() * ub;
    let tr = m.trace();
    let tr2 = (m * m).trace();
    let det = ub.det();
    let g1 = tr * tr / (C::from(16.0) * det);
    let g2 = (tr * tr - tr2) / (C::from(4.0) * det);
    MakhlinInv { g1_re: g1.re, g1_im: g1.im, g2: g2.re }
}

/// Closed-form Makhlin invariants of CAN(c); smooth in c and equal to
/// `makhlin(can_gate(c))` within 1e-10.
pub fn makhlin_of_coords(c: &CanonicalCoord) -> MakhlinInv {
    let theta = theta_slots(c);
    let mut tr = C_ZERO;
    let mut tr2 = C_ZERO;
    for t in theta {
        let lam = C::from_polar(1.0, -2.0 * std::f64::consts::PI * t);
        tr += lam;
        tr2 += lam * lam;
    }
    let g1 = tr * tr / C::from(16.0);
    let g2 = (tr * tr - tr2) / C::from(4.0);
    MakhlinInv { g1_re: g1.re, g1_im: g1.im, g2: g2.re }
}

/// Euclidean distance between Makhlin triples; zero iff locally equivalent.
pub fn local_equiv_distance(u: &Unitary4, v: &Unitary4) -> f64 {
    makhlin(u).distance(&makhlin(v))
}

// ---------------------------------------------------------------------------
// KAK decomposition
// ---------------------------------------------------------------------------

/// Split an exact Kronecker product in SU(2) (x) SU(2) into its factors.
fn split_local(k: &Mat4) -> Result<(Mat2, Mat2), InvariantError> {
    let block = |a: usize, b: usize| -> Mat2 {
        Mat2([
            [k.0[2 * a][2 * b], k.0[2 * a][2 * b + 1]],
            [k.0[2 * a + 1][2 * b], k.0[2 * a + 1][2 * b + 1]],
        ])
    };
    let (mut ba, mut bb, mut best) = (0usize, 0usize, -1.0f64);
    for a in 0..2 {
        for b in 0..2 {
            let n = block(a, b).frobenius_norm();
            if n > best {
                best = n;
                ba = a;
                bb = b;
            }
        }
    }
    let pivot = block(ba, bb);
    let det = pivot.det();
    if det.norm() < 1e-12 {
        return Err(InvariantError::NotProduct(det.norm()));
    }
    let right = pivot.scale(C_ONE / det.sqrt());
    let right_inv = right.adjoint();
    let mut left = Mat2::zero();
    for a in 0..2 {
        for b in 0..2 {
            left.0[a][b] = (block(a, b) * right_inv).trace() * C::from(0.5);
        }
    }
    let defect = kron(&left, &right).max_abs_diff(k);
    if defect > 1e-7 {
        return Err(InvariantError::NotProduct(defect));
    }
    Ok((left, right))
}

/// Match the diagonal `d` against slot values `mu` by brute-force assignment;
/// returns the permutation p with d[p[j]] ~= mu[j] and the worst pair error.
fn match_slots(d: &[C; 4], mu: &[C; 4]) -> ([usize; 4], f64) {
    let perms: [[usize; 4]; 24] = {
        let mut out = [[0usize; 4]; 24];
        let mut idx = 0;
        for a in 0..4 {
            for b in 0..4 {
                if b == a {
                    continue;
                }
                for c in 0..4 {
                    if c == a || c == b {
                        continue;
                    }
                    let e = 6 - a - b - c;
                    out[idx] = [a, b, c, e];
                    idx += 1;
                }
            }
        }
        out
    };
    let mut best_perm = perms[0];
    let mut best_err = f64::INFINITY;
    for p in perms {
        let mut err = 0.0f64;
        for j in 0..4 {
            err = err.max((d[p[j]] - mu[j]).norm());
        }
        if err < best_err {
            best_err = err;
            best_perm = p;
        }
    }
    (best_perm, best_err)
}

/// Full KAK decomposition. The coordinate field equals [`canonical_coords`]
/// (computed from the same eigenstructure); the local factors land in SU(2)
/// with the remaining phase pushed into `global_phase`, and the
/// reconstruction matches the input entrywise within the KAK tolerance.
pub fn kak(u: &Unitary4) -> Result<KakDecomp, InvariantError> {
    let pi = std::f64::consts::PI;
    let ub0 = to_magic(&u.special_lift());
    let mt = ub0.transpose() * ub0;
    let m0 = mt.add(&mt.transpose()).scale(C::from(0.5));
    let re: [[f64; 4]; 4] = std::array::from_fn(|i| std::array::from_fn(|j| m0.0[i][j].re));
    let im: [[f64; 4]; 4] = std::array::from_fn(|i| std::array::from_fn(|j| m0.0[i][j].im));
    let p = joint_diag_sym4(&re, &im)?;
    let pm = Mat4::from_fn(|i, j| C::from(p[i][j]));
    let diag = pm.transpose() * m0 * pm;
    let d0: [C; 4] = std::array::from_fn(|i| diag.0[i][i]);

    // chamber point from the same (high-accuracy) diagonal
    let raw: [f64; 4] = std::array::from_fn(|i| -d0[i].arg() / (2.0 * pi));
    let coord = weyl_canonicalize(coords_from_logspec(&normalize_logspec(raw)));
    let theta = theta_slots(&coord);
    // canonical gate in the magic basis is diag(exp(-i pi theta_j))
    let mu: [C; 4] = std::array::from_fn(|j| C::from_polar(1.0, -2.0 * pi * theta[j]));

    // The projective lift is fixed only up to a factor of i, which negates
    // the Cartan double (same eigenvectors); keep the branch whose spectrum
    // aligns with the chamber representative.
    let mut chosen: Option<(Mat4, [usize; 4])> = None;
    let mut best_err = f64::INFINITY;
    for twist in 0..2 {
        let d: [C; 4] = std::array::from_fn(|i| if twist == 0 { d0[i] } else { -d0[i] });
        let (perm, err) = match_slots(&d, &mu);
        best_err = best_err.min(err);
        if err <= 1e-6 {
            let ub = if twist == 0 { ub0 } else { ub0.scale(C::new(0.0, 1.0)) };
            chosen = Some((ub, perm));
            break;
        }
    }
    let (ub, perm) = chosen.ok_or(InvariantError::SpectrumMismatch(best_err))?;
    // reorder columns so slot j carries mu_j, then fix det = +1
    let mut pp = Mat4::from_fn(|i, j| C::from(p[i][perm[j]]));
    if pp.det().re < 0.0 {
        for i in 0..4 {
            pp.0[i][0] = -pp.0[i][0];
        }
    }

    // u_B = O1 V_B O2 with O2 = P^T and O1 = u_B P V_B^H, both real orthogonal
    let vb_inv = Mat4::diag(std::array::from_fn(|j| C::from_polar(1.0, pi * theta[j])));
    let o1 = ub * pp * vb_inv;
    let o2 = pp.transpose();
    let im_norm = o1.0.iter().flatten().fold(0.0f64, |acc, e| acc.max(e.im.abs()));
    if im_norm > 1e-6 {
        return Err(InvariantError::SpectrumMismatch(im_norm));
    }
    let o1 = Mat4::from_fn(|i, j| C::from(o1.0[i][j].re));

    let k1 = split_local(&from_magic(&o1))?;
    let k2 = split_local(&from_magic(&o2))?;

    // pin the global phase so reconstruction is entrywise exact
    let recon = kron(&k1.0, &k1.1) * *coord.gate().matrix() * kron(&k2.0, &k2.1);
    let phase = (recon.adjoint() * **u).trace().arg();
    Ok(KakDecomp { k1, coord, k2, global_phase: phase })
}
