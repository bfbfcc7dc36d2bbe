//! Dense complex linear algebra for 2x2 and 4x4 matrices, gate constructors,
//! Haar sampling and the magic-basis machinery everything else builds on.
//!
//! Matrices are fixed-size value types; all operations are pure. The qubit
//! convention is big-endian: the first factor of a Kronecker product acts on
//! the first qubit (most significant index).

mod eig;
mod haar;

pub use eig::{eig4, joint_diag_sym4, sym_eig4, EigError};
pub use haar::{haar_random_su2, haar_random_su2_with, haar_random_su4, haar_random_su4_with};

use crate::tol;
use num_complex::Complex64;
use thiserror::Error;

pub type C = Complex64;

pub const C_ZERO: C = C::new(0.0, 0.0);
pub const C_ONE: C = C::new(1.0, 0.0);
pub const IM: C = C::new(0.0, 1.0);

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MatError {
    #[error("matrix is not unitary: ||U^H U - I||_F = {defect:.3e} exceeds {limit:.1e}")]
    NotUnitary { defect: f64, limit: f64 },
    #[error("matrix determinant modulus {modulus:.17} deviates from 1 beyond {limit:.1e}")]
    BadDeterminant { modulus: f64, limit: f64 },
    #[error("matrix entry is not finite")]
    NonFinite,
}

/// 2x2 complex matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2(pub [[C; 2]; 2]);

/// 4x4 complex matrix (no unitarity claim; see [`Unitary4`]).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat4(pub [[C; 4]; 4]);

impl std::ops::Index<(usize, usize)> for Mat2 {
    type Output = C;
    fn index(&self, (i, j): (usize, usize)) -> &C {
        &self.0[i][j]
    }
}

impl std::ops::Index<(usize, usize)> for Mat4 {
    type Output = C;
    fn index(&self, (i, j): (usize, usize)) -> &C {
        &self.0[i][j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Mat4 {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C {
        &mut self.0[i][j]
    }
}

impl Mat2 {
    pub fn zero() -> Self {
        Mat2([[C_ZERO; 2]; 2])
    }

    pub fn identity() -> Self {
        Mat2([[C_ONE, C_ZERO], [C_ZERO, C_ONE]])
    }

    pub fn adjoint(&self) -> Self {
        let m = &self.0;
        Mat2([[m[0][0].conj(), m[1][0].conj()], [m[0][1].conj(), m[1][1].conj()]])
    }

    pub fn det(&self) -> C {
        self.0[0][0] * self.0[1][1] - self.0[0][1] * self.0[1][0]
    }

    pub fn trace(&self) -> C {
        self.0[0][0] + self.0[1][1]
    }

    pub fn scale(&self, s: C) -> Self {
        let mut out = *self;
        for row in out.0.iter_mut() {
            for e in row.iter_mut() {
                *e *= s;
            }
        }
        out
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.iter().flatten().map(|e| e.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn unitarity_defect(&self) -> f64 {
        let g = self.adjoint() * *self;
        let mut s = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                let id = if i == j { C_ONE } else { C_ZERO };
                s += (g.0[i][j] - id).norm_sqr();
            }
        }
        s.sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().flatten().all(|e| e.re.is_finite() && e.im.is_finite())
    }

    pub fn max_abs_diff(&self, other: &Mat2) -> f64 {
        let mut m = 0.0_f64;
        for i in 0..2 {
            for j in 0..2 {
                m = m.max((self.0[i][j] - other.0[i][j]).norm());
            }
        }
        m
    }
}

impl std::ops::Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, rhs: Mat2) -> Mat2 {
        let mut out = Mat2::zero();
        for i in 0..2 {
            for j in 0..2 {
                let mut acc = C_ZERO;
                for k in 0..2 {
                    acc += self.0[i][k] * rhs.0[k][j];
                }
                out.0[i][j] = acc;
            }
        }
        out
    }
}

impl Mat4 {
    pub fn zero() -> Self {
        Mat4([[C_ZERO; 4]; 4])
    }

    pub fn identity() -> Self {
        let mut m = Mat4::zero();
        for i in 0..4 {
            m.0[i][i] = C_ONE;
        }
        m
    }

    pub fn from_fn(mut f: impl FnMut(usize, usize) -> C) -> Self {
        let mut m = Mat4::zero();
        for i in 0..4 {
            for j in 0..4 {
                m.0[i][j] = f(i, j);
            }
        }
        m
    }

    pub fn diag(d: [C; 4]) -> Self {
        let mut m = Mat4::zero();
        for i in 0..4 {
            m.0[i][i] = d[i];
        }
        m
    }

    pub fn adjoint(&self) -> Self {
        Mat4::from_fn(|i, j| self.0[j][i].conj())
    }

    pub fn transpose(&self) -> Self {
        Mat4::from_fn(|i, j| self.0[j][i])
    }

    pub fn conj(&self) -> Self {
        Mat4::from_fn(|i, j| self.0[i][j].conj())
    }

    pub fn trace(&self) -> C {
        (0..4).map(|i| self.0[i][i]).sum()
    }

    pub fn scale(&self, s: C) -> Self {
        Mat4::from_fn(|i, j| self.0[i][j] * s)
    }

    pub fn add(&self, other: &Mat4) -> Self {
        Mat4::from_fn(|i, j| self.0[i][j] + other.0[i][j])
    }

    pub fn sub(&self, other: &Mat4) -> Self {
        Mat4::from_fn(|i, j| self.0[i][j] - other.0[i][j])
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.iter().flatten().map(|e| e.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs_diff(&self, other: &Mat4) -> f64 {
        let mut m = 0.0_f64;
        for i in 0..4 {
            for j in 0..4 {
                m = m.max((self.0[i][j] - other.0[i][j]).norm());
            }
        }
        m
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().flatten().all(|e| e.re.is_finite() && e.im.is_finite())
    }

    /// Determinant by cofactor expansion along the first row.
    pub fn det(&self) -> C {
        let m = &self.0;
        let det3 = |a: [[C; 3]; 3]| -> C {
            a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1])
                - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
                + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0])
        };
        let minor = |col: usize| -> [[C; 3]; 3] {
            let mut out = [[C_ZERO; 3]; 3];
            for (oi, i) in (1..4).enumerate() {
                let mut oj = 0;
                for j in 0..4 {
                    if j == col {
                        continue;
                    }
                    out[oi][oj] = m[i][j];
                    oj += 1;
                }
            }
            out
        };
        let mut acc = C_ZERO;
        let mut sign = C_ONE;
        for col in 0..4 {
            acc += sign * m[0][col] * det3(minor(col));
            sign = -sign;
        }
        acc
    }

    pub fn unitarity_defect(&self) -> f64 {
        let g = self.adjoint() * *self;
        g.sub(&Mat4::identity()).frobenius_norm()
    }

    /// Inverse by Gaussian elimination with partial pivoting; None when
    /// numerically singular.
    pub fn inverse(&self) -> Option<Mat4> {
        let mut a = *self;
        let mut inv = Mat4::identity();
        for col in 0..4 {
            let pivot = (col..4).max_by(|&i, &j| {
                a.0[i][col].norm().partial_cmp(&a.0[j][col].norm()).unwrap()
            })?;
            if a.0[pivot][col].norm() < 1e-14 {
                return None;
            }
            a.0.swap(col, pivot);
            inv.0.swap(col, pivot);
            let p = a.0[col][col];
            for j in 0..4 {
                a.0[col][j] /= p;
                inv.0[col][j] /= p;
            }
            for r in 0..4 {
                if r == col {
                    continue;
                }
                let f = a.0[r][col];
                if f.norm() < 1e-300 {
                    continue;
                }
                for j in 0..4 {
                    let (s, t) = (f * a.0[col][j], f * inv.0[col][j]);
                    a.0[r][j] -= s;
                    inv.0[r][j] -= t;
                }
            }
        }
        Some(inv)
    }

    /// Matrix-vector product.
    pub fn apply(&self, v: &[C; 4]) -> [C; 4] {
        let mut out = [C_ZERO; 4];
        for i in 0..4 {
            for j in 0..4 {
                out[i] += self.0[i][j] * v[j];
            }
        }
        out
    }
}

impl std::ops::Mul for Mat4 {
    type Output = Mat4;
    fn mul(self, rhs: Mat4) -> Mat4 {
        let mut out = Mat4::zero();
        for i in 0..4 {
            for k in 0..4 {
                let a = self.0[i][k];
                if a == C_ZERO {
                    continue;
                }
                for j in 0..4 {
                    out.0[i][j] += a * rhs.0[k][j];
                }
            }
        }
        out
    }
}

/// A 4x4 matrix validated to be unitary within [`tol::CONSTRUCT`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Unitary4(Mat4);

impl Unitary4 {
    /// Validate and wrap. Checks unitarity and |det| = 1 within the
    /// construction tolerance.
    pub fn new(m: Mat4) -> Result<Self, MatError> {
        if !m.is_finite() {
            return Err(MatError::NonFinite);
        }
        let defect = m.unitarity_defect();
        if defect > tol::CONSTRUCT {
            return Err(MatError::NotUnitary { defect, limit: tol::CONSTRUCT });
        }
        let dm = m.det().norm();
        if (dm - 1.0).abs() > tol::CONSTRUCT {
            return Err(MatError::BadDeterminant { modulus: dm, limit: tol::CONSTRUCT });
        }
        Ok(Unitary4(m))
    }

    /// Wrap a matrix known unitary by construction (products of validated
    /// unitaries, basis changes by fixed unitaries).
    pub fn new_unchecked(m: Mat4) -> Self {
        debug_assert!(m.unitarity_defect() <= tol::VERIFY, "unchecked Unitary4 fails verification tolerance");
        Unitary4(m)
    }

    pub fn matrix(&self) -> &Mat4 {
        &self.0
    }

    pub fn into_matrix(self) -> Mat4 {
        self.0
    }

    pub fn identity() -> Self {
        Unitary4(Mat4::identity())
    }

    pub fn adjoint(&self) -> Self {
        Unitary4(self.0.adjoint())
    }

    /// Rescale into SU(4) using the principal fourth root of the determinant.
    pub fn special_lift(&self) -> Mat4 {
        let d = self.0.det();
        let phase = C::from_polar(1.0, -d.arg() / 4.0);
        self.0.scale(phase / C::from(d.norm().powf(0.25)))
    }
}

impl std::ops::Deref for Unitary4 {
    type Target = Mat4;
    fn deref(&self) -> &Mat4 {
        &self.0
    }
}

impl std::ops::Mul for Unitary4 {
    type Output = Unitary4;
    fn mul(self, rhs: Unitary4) -> Unitary4 {
        Unitary4(self.0 * rhs.0)
    }
}

/// Kronecker product of two 2x2 matrices; the first factor acts on the
/// first (most significant) qubit.
pub fn kron(a: &Mat2, b: &Mat2) -> Mat4 {
    Mat4::from_fn(|i, j| a.0[i >> 1][j >> 1] * b.0[i & 1][j & 1])
}

/// Kronecker product of two unitary 2x2 factors, wrapped as a unitary.
pub fn kron_unitary(a: &Mat2, b: &Mat2) -> Unitary4 {
    Unitary4::new_unchecked(kron(a, b))
}

// ---------------------------------------------------------------------------
// Fixed gates
// ---------------------------------------------------------------------------

pub fn pauli_x() -> Mat2 {
    Mat2([[C_ZERO, C_ONE], [C_ONE, C_ZERO]])
}

pub fn pauli_y() -> Mat2 {
    Mat2([[C_ZERO, -IM], [IM, C_ZERO]])
}

pub fn pauli_z() -> Mat2 {
    Mat2([[C_ONE, C_ZERO], [C_ZERO, -C_ONE]])
}

pub fn hadamard() -> Mat2 {
    let s = C::from(std::f64::consts::FRAC_1_SQRT_2);
    Mat2([[s, s], [s, -s]])
}

pub fn cx_gate() -> Unitary4 {
    let mut m = Mat4::zero();
    m.0[0][0] = C_ONE;
    m.0[1][1] = C_ONE;
    m.0[2][3] = C_ONE;
    m.0[3][2] = C_ONE;
    Unitary4(m)
}

pub fn cz_gate() -> Unitary4 {
    Unitary4(Mat4::diag([C_ONE, C_ONE, C_ONE, -C_ONE]))
}

pub fn iswap_gate() -> Unitary4 {
    let mut m = Mat4::zero();
    m.0[0][0] = C_ONE;
    m.0[1][2] = IM;
    m.0[2][1] = IM;
    m.0[3][3] = C_ONE;
    Unitary4(m)
}

pub fn swap_gate() -> Unitary4 {
    let mut m = Mat4::zero();
    m.0[0][0] = C_ONE;
    m.0[1][2] = C_ONE;
    m.0[2][1] = C_ONE;
    m.0[3][3] = C_ONE;
    Unitary4(m)
}

// ---------------------------------------------------------------------------
// Magic (Bell) basis
// ---------------------------------------------------------------------------

/// The magic-basis change matrix. Columns are the phased Bell states
/// (|Φ+>, i|Φ−>, i|Ψ+>, |Ψ−>) over the computational basis; every CAN gate
/// is diagonal in this basis.
pub fn magic_basis() -> Mat4 {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let r = C::from(s);
    let i = C::new(0.0, s);
    Mat4([
        [r, i, C_ZERO, C_ZERO],
        [C_ZERO, C_ZERO, i, r],
        [C_ZERO, C_ZERO, i, -r],
        [r, -i, C_ZERO, C_ZERO],
    ])
}

/// Conjugate into the magic basis: B^H m B.
pub fn to_magic(m: &Mat4) -> Mat4 {
    let b = magic_basis();
    b.adjoint() * *m * b
}

/// Conjugate out of the magic basis: B m B^H.
pub fn from_magic(m: &Mat4) -> Mat4 {
    let b = magic_basis();
    b * *m * b.adjoint()
}

/// Sign patterns of (XX, YY, ZZ) on the magic-basis vectors, in column order.
pub const MAGIC_SIGNS: [[f64; 3]; 4] =
    [[1.0, -1.0, 1.0], [-1.0, 1.0, 1.0], [1.0, 1.0, -1.0], [-1.0, -1.0, -1.0]];

// ---------------------------------------------------------------------------
// Parameterized gates
// ---------------------------------------------------------------------------

/// Single-qubit rotation exp(-i v.sigma / 2) = cos(t/2) I - i sin(t/2) (v_hat.sigma)
/// with t = |v|. Continuous at v = 0.
pub fn rv_gate(v: [f64; 3]) -> Mat2 {
    let t2 = v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
    let t = t2.sqrt();
    // k = sin(t/2)/t, series near zero
    let (c, k) = if t < 1e-8 {
        (1.0 - t2 / 8.0, 0.5 - t2 / 48.0)
    } else {
        ((t / 2.0).cos(), (t / 2.0).sin() / t)
    };
    let (nx, ny, nz) = (v[0] * k, v[1] * k, v[2] * k);
    Mat2([
        [C::new(c, -nz), C::new(-ny, -nx)],
        [C::new(ny, -nx), C::new(c, nz)],
    ])
}

/// Canonical two-qubit gate exp(-i pi (c1 XX + c2 YY + c3 ZZ)), built in the
/// magic basis where the three generators are simultaneously diagonal with
/// the [`MAGIC_SIGNS`] patterns. Coordinates are in units of pi.
pub fn can_gate(c: [f64; 3]) -> Unitary4 {
    let mut d = [C_ZERO; 4];
    for (slot, signs) in MAGIC_SIGNS.iter().enumerate() {
        let theta = signs[0] * c[0] + signs[1] * c[1] + signs[2] * c[2];
        d[slot] = C::from_polar(1.0, -std::f64::consts::PI * theta);
    }
    Unitary4::new_unchecked(from_magic(&Mat4::diag(d)))
}

/// Minimum Frobenius distance over a global phase,
/// min_phi ||u - e^{i phi} v||_F. The closed form sqrt(8 - 2 |tr(u^H v)|)
/// cancels catastrophically near zero (its floating-point floor is ~1e-7),
/// so the minimum is evaluated directly: the optimal phase is the argument
/// of the trace and the norm is taken entrywise.
pub fn phase_distance(u: &Mat4, v: &Mat4) -> f64 {
    let t = (u.adjoint() * *v).trace();
    if t.norm() < 1e-12 {
        // trace-orthogonal: every phase gives sqrt(8)
        return 8.0f64.sqrt();
    }
    // e^{i phi} t must land on the positive real axis
    let phase = C::from_polar(1.0, -t.arg());
    u.sub(&v.scale(phase)).frobenius_norm()
}

/// Polar projection onto the unitary group by Newton iteration
/// X <- (X + (X^H)^{-1}) / 2; quadratically convergent for near-unitary
/// input. Used to admit matrices that pass a loose external check into the
/// strict construction tolerance.
pub fn nearest_unitary(m: &Mat4) -> Result<Unitary4, MatError> {
    if !m.is_finite() {
        return Err(MatError::NonFinite);
    }
    let mut x = *m;
    for _ in 0..24 {
        if x.unitarity_defect() <= tol::CONSTRUCT / 4.0 {
            break;
        }
        let inv = x.adjoint().inverse().ok_or(MatError::NonFinite)?;
        x = x.add(&inv).scale(C::from(0.5));
    }
    Unitary4::new(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    /// Brute-force matrix exponential of -i*pi*(c1 XX + c2 YY + c3 ZZ)
    /// via scaling and squaring; the oracle for the magic sign table.
    fn can_expm(c: [f64; 3]) -> Mat4 {
        let xx = kron(&pauli_x(), &pauli_x());
        let yy = kron(&pauli_y(), &pauli_y());
        let zz = kron(&pauli_z(), &pauli_z());
        let mut h = Mat4::zero();
        let pi = std::f64::consts::PI;
        for i in 0..4 {
            for j in 0..4 {
                h.0[i][j] = (xx.0[i][j] * C::from(c[0])
                    + yy.0[i][j] * C::from(c[1])
                    + zz.0[i][j] * C::from(c[2]))
                    * C::new(0.0, -pi);
            }
        }
        expm(&h)
    }

    fn expm(a: &Mat4) -> Mat4 {
        let norm = a.frobenius_norm();
        let k = (norm.log2().ceil().max(0.0) as u32) + 4;
        let scaled = a.scale(C::from(1.0 / f64::powi(2.0, k as i32)));
        let mut term = Mat4::identity();
        let mut sum = Mat4::identity();
        for n in 1..24 {
            term = term * scaled;
            term = term.scale(C::from(1.0 / n as f64));
            sum = sum.add(&term);
        }
        let mut out = sum;
        for _ in 0..k {
            out = out * out;
        }
        out
    }

    #[test]
    fn kron_identity_and_pauli() {
        let i4 = kron(&Mat2::identity(), &Mat2::identity());
        assert_eq!(i4, Mat4::identity());
        let xx = kron(&pauli_x(), &pauli_x());
        // antidiagonal ones
        for i in 0..4 {
            for j in 0..4 {
                let want = if i + j == 3 { C_ONE } else { C_ZERO };
                assert_eq!(xx.0[i][j], want);
            }
        }
    }

    #[test]
    fn kron_hadamard_squares_to_identity() {
        let h = kron(&hadamard(), &Mat2::identity());
        let prod = h * h;
        assert!(prod.max_abs_diff(&Mat4::identity()) < 1e-15);
    }

    #[test]
    fn rv_zero_is_identity() {
        assert!(rv_gate([0.0, 0.0, 0.0]).max_abs_diff(&Mat2::identity()) == 0.0);
    }

    #[test]
    fn rv_pi_x_is_minus_i_x() {
        let r = rv_gate([std::f64::consts::PI, 0.0, 0.0]);
        let want = pauli_x().scale(-IM);
        assert!(r.max_abs_diff(&want) < 1e-15);
    }

    #[test]
    fn rv_matches_exponential_oracle_and_is_unitary() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let v = [
                rng.random_range(-6.0..6.0),
                rng.random_range(-6.0..6.0),
                rng.random_range(-6.0..6.0),
            ];
            let r = rv_gate(v);
            assert!(r.unitarity_defect() < 1e-12);
            // oracle: exp of the 2x2 generator embedded in a 4x4 corner is
            // overkill; expand the series directly on 2x2.
            let h = Mat2([
                [C::new(0.0, -v[2] / 2.0), C::new(-v[1] / 2.0, -v[0] / 2.0)],
                [C::new(v[1] / 2.0, -v[0] / 2.0), C::new(0.0, v[2] / 2.0)],
            ]);
            let mut term = Mat2::identity();
            let mut sum = Mat2::identity();
            let scale = 1.0 / 64.0;
            let hs = h.scale(C::from(scale));
            for n in 1..20 {
                term = term * hs;
                term = term.scale(C::from(1.0 / n as f64));
                sum = Mat2([[sum.0[0][0] + term.0[0][0], sum.0[0][1] + term.0[0][1]],
                            [sum.0[1][0] + term.0[1][0], sum.0[1][1] + term.0[1][1]]]);
            }
            let mut e = sum;
            for _ in 0..6 {
                e = e * e;
            }
            assert!(r.max_abs_diff(&e) < 1e-10, "rv mismatch for {v:?}");
        }
    }

    #[test]
    fn can_gate_zero_is_identity() {
        let g = can_gate([0.0, 0.0, 0.0]);
        assert!(g.max_abs_diff(&Mat4::identity()) < 1e-15);
    }

    #[test]
    fn can_gate_matches_exponential_oracle() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..40 {
            let c = [
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
            ];
            let fast = can_gate(c);
            let oracle = can_expm(c);
            assert!(fast.max_abs_diff(&oracle) < 1e-12, "sign table broken for {c:?}");
        }
    }

    #[test]
    fn can_gate_is_additive_up_to_phase() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(13);
        for _ in 0..25 {
            let a: [f64; 3] = std::array::from_fn(|_| rng.random_range(-0.5..0.5));
            let b: [f64; 3] = std::array::from_fn(|_| rng.random_range(-0.5..0.5));
            let ab = [a[0] + b[0], a[1] + b[1], a[2] + b[2]];
            let prod = can_gate(a) * can_gate(b);
            assert!(phase_distance(&prod, &can_gate(ab)) < 1e-9);
        }
    }

    #[test]
    fn magic_basis_is_unitary() {
        assert!(magic_basis().unitarity_defect() < 1e-15);
    }

    #[test]
    fn phase_distance_examples() {
        let u = cx_gate();
        assert_abs_diff_eq!(phase_distance(&u, &u), 0.0, epsilon = 1e-12);
        let minus = u.matrix().scale(-C_ONE);
        assert_abs_diff_eq!(phase_distance(u.matrix(), &minus), 0.0, epsilon = 1e-12);
        // tr(CX) = 2, so distance from identity is sqrt(8 - 2*2) = 2
        assert_abs_diff_eq!(phase_distance(&Mat4::identity(), u.matrix()), 2.0, epsilon = 1e-12);
    }

    #[test]
    fn phase_distance_agrees_with_closed_form_at_scale() {
        // away from zero the stable evaluation equals sqrt(8 - 2|tr|)
        for (i, j) in [(0u64, 1u64), (2, 3), (4, 5), (6, 7)] {
            let u = haar_random_su4(i);
            let v = haar_random_su4(j);
            let stable = phase_distance(u.matrix(), v.matrix());
            let tr = (u.adjoint().matrix().clone() * *v.matrix()).trace().norm();
            let closed = (8.0 - 2.0 * tr).max(0.0).sqrt();
            assert_abs_diff_eq!(stable, closed, epsilon = 1e-7);
        }
    }

    #[test]
    fn unitary4_rejects_non_unitary() {
        let mut m = Mat4::identity();
        m.0[0][0] = C::new(1.5, 0.0);
        assert!(Unitary4::new(m).is_err());
    }

    #[test]
    fn special_lift_has_unit_determinant() {
        let u = haar_random_su4(5);
        let s = u.special_lift();
        let d = s.det();
        assert!((d - C_ONE).norm() < 1e-10);
    }

    #[test]
    fn inverse_and_polar_projection() {
        let u = haar_random_su4(9);
        let inv = u.inverse().unwrap();
        assert!((inv * *u.matrix()).max_abs_diff(&Mat4::identity()) < 1e-12);
        // perturb within the loose input band and reproject
        let mut noisy = *u.matrix();
        noisy.0[1][2] += C::new(3e-9, -2e-9);
        assert!(Unitary4::new(noisy).is_err());
        let fixed = nearest_unitary(&noisy).unwrap();
        assert!(fixed.max_abs_diff(&noisy) < 1e-7);
    }
}
