//! Scalar abstraction for the residual path: the same code evaluates plain
//! values (`f64`) and forward-mode dual numbers, which is how the
//! least-squares Jacobians are produced.

use std::ops::{Add, Div, Mul, Neg, Sub};

pub trait Real:
    Copy
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn from_f64(x: f64) -> Self;
    fn value(self) -> f64;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn sqrt(self) -> Self;
}

impl Real for f64 {
    fn from_f64(x: f64) -> Self {
        x
    }
    fn value(self) -> f64 {
        self
    }
    fn sin(self) -> Self {
        f64::sin(self)
    }
    fn cos(self) -> Self {
        f64::cos(self)
    }
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
}

/// First-order dual number carrying one directional derivative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dual {
    pub v: f64,
    pub d: f64,
}

impl Dual {
    pub fn constant(v: f64) -> Self {
        Dual { v, d: 0.0 }
    }

    pub fn seed(v: f64) -> Self {
        Dual { v, d: 1.0 }
    }
}

impl Add for Dual {
    type Output = Dual;
    fn add(self, o: Dual) -> Dual {
        Dual { v: self.v + o.v, d: self.d + o.d }
    }
}

impl Sub for Dual {
    type Output = Dual;
    fn sub(self, o: Dual) -> Dual {
        Dual { v: self.v - o.v, d: self.d - o.d }
    }
}

impl Mul for Dual {
    type Output = Dual;
    fn mul(self, o: Dual) -> Dual {
        Dual { v: self.v * o.v, d: self.v * o.d + self.d * o.v }
    }
}

impl Div for Dual {
    type Output = Dual;
    fn div(self, o: Dual) -> Dual {
        Dual { v: self.v / o.v, d: (self.d * o.v - self.v * o.d) / (o.v * o.v) }
    }
}

impl Neg for Dual {
    type Output = Dual;
    fn neg(self) -> Dual {
        Dual { v: -self.v, d: -self.d }
    }
}

impl Real for Dual {
    fn from_f64(x: f64) -> Self {
        Dual::constant(x)
    }
    fn value(self) -> f64 {
        self.v
    }
    fn sin(self) -> Self {
        Dual { v: self.v.sin(), d: self.d * self.v.cos() }
    }
    fn cos(self) -> Self {
        Dual { v: self.v.cos(), d: -self.d * self.v.sin() }
    }
    fn sqrt(self) -> Self {
        let s = self.v.sqrt();
        Dual { v: s, d: self.d / (2.0 * s) }
    }
}

/// Complex number over a generic real scalar.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CR<R: Real> {
    pub re: R,
    pub im: R,
}

impl<R: Real> CR<R> {
    pub fn new(re: R, im: R) -> Self {
        CR { re, im }
    }

    pub fn zero() -> Self {
        CR { re: R::from_f64(0.0), im: R::from_f64(0.0) }
    }

    pub fn from_c(c: num_complex::Complex64) -> Self {
        CR { re: R::from_f64(c.re), im: R::from_f64(c.im) }
    }
}

impl<R: Real> Add for CR<R> {
    type Output = CR<R>;
    fn add(self, o: CR<R>) -> CR<R> {
        CR { re: self.re + o.re, im: self.im + o.im }
    }
}

impl<R: Real> Sub for CR<R> {
    type Output = CR<R>;
    fn sub(self, o: CR<R>) -> CR<R> {
        CR { re: self.re - o.re, im: self.im - o.im }
    }
}

impl<R: Real> Mul for CR<R> {
    type Output = CR<R>;
    fn mul(self, o: CR<R>) -> CR<R> {
        CR {
            re: self.re * o.re - self.im * o.im,
            im: self.re * o.im + self.im * o.re,
        }
    }
}

impl<R: Real> Div for CR<R> {
    type Output = CR<R>;
    fn div(self, o: CR<R>) -> CR<R> {
        let den = o.re * o.re + o.im * o.im;
        CR {
            re: (self.re * o.re + self.im * o.im) / den,
            im: (self.im * o.re - self.re * o.im) / den,
        }
    }
}

impl<R: Real> Neg for CR<R> {
    type Output = CR<R>;
    fn neg(self) -> CR<R> {
        CR { re: -self.re, im: -self.im }
    }
}

pub type GM4<R> = [[CR<R>; 4]; 4];

pub fn gm4_from(m: &crate::matcore::Mat4) -> GM4<f64> {
    std::array::from_fn(|i| std::array::from_fn(|j| CR::from_c(m.0[i][j])))
}

pub fn gm4_lift<R: Real>(m: &GM4<f64>) -> GM4<R> {
    std::array::from_fn(|i| {
        std::array::from_fn(|j| CR::new(R::from_f64(m[i][j].re), R::from_f64(m[i][j].im)))
    })
}

pub fn gm4_mul<R: Real>(a: &GM4<R>, b: &GM4<R>) -> GM4<R> {
    let mut out: GM4<R> = std::array::from_fn(|_| std::array::from_fn(|_| CR::zero()));
    for i in 0..4 {
        for k in 0..4 {
            let aik = a[i][k];
            for j in 0..4 {
                out[i][j] = out[i][j] + aik * b[k][j];
            }
        }
    }
    out
}

pub fn gm4_transpose<R: Real>(a: &GM4<R>) -> GM4<R> {
    std::array::from_fn(|i| std::array::from_fn(|j| a[j][i]))
}

pub fn gm4_trace<R: Real>(a: &GM4<R>) -> CR<R> {
    a[0][0] + a[1][1] + a[2][2] + a[3][3]
}

pub fn gm4_det<R: Real>(m: &GM4<R>) -> CR<R> {
    let det3 = |a: [[CR<R>; 3]; 3]| -> CR<R> {
        a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1])
            - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
            + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0])
    };
    let minor = |col: usize| -> [[CR<R>; 3]; 3] {
        std::array::from_fn(|oi| {
            let i = oi + 1;
            let mut row = [CR::zero(); 3];
            let mut oj = 0;
            for j in 0..4 {
                if j == col {
                    continue;
                }
                row[oj] = m[i][j];
                oj += 1;
            }
            row
        })
    };
    let mut acc = CR::zero();
    for col in 0..4 {
        let term = m[0][col] * det3(minor(col));
        acc = if col % 2 == 0 { acc + term } else { acc - term };
    }
    acc
}

/// Generic RV gate as a 2x2 block: exp(-i v.sigma/2). The small-angle branch
/// keeps the map smooth (and dual-differentiable) through v = 0.
pub fn rv2<R: Real>(v: [R; 3]) -> [[CR<R>; 2]; 2] {
    let t2 = v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
    let (c, k) = if t2.value() < 1e-16 {
        let half = R::from_f64(0.5);
        let eighth = R::from_f64(1.0 / 8.0);
        let f48 = R::from_f64(1.0 / 48.0);
        (R::from_f64(1.0) - t2 * eighth, half - t2 * f48)
    } else {
        let t = t2.sqrt();
        let half_t = t * R::from_f64(0.5);
        (half_t.cos(), half_t.sin() / t)
    };
    let nx = v[0] * k;
    let ny = v[1] * k;
    let nz = v[2] * k;
    [
        [CR::new(c, -nz), CR::new(-ny, -nx)],
        [CR::new(ny, -nx), CR::new(c, nz)],
    ]
}

pub fn gkron<R: Real>(a: &[[CR<R>; 2]; 2], b: &[[CR<R>; 2]; 2]) -> GM4<R> {
    std::array::from_fn(|i| std::array::from_fn(|j| a[i >> 1][j >> 1] * b[i & 1][j & 1]))
}

/// Makhlin triple (Re g1, Im g1, Re g2) of a determinant-normalized unitary,
/// generic over the scalar. `bk` and `bkh` are the magic basis and its
/// adjoint lifted to the scalar type.
pub fn makhlin_generic<R: Real>(u: &GM4<R>, bk: &GM4<R>, bkh: &GM4<R>) -> [R; 3] {
    let ub = gm4_mul(bkh, &gm4_mul(u, bk));
    let m = gm4_mul(&gm4_transpose(&ub), &ub);
    let tr = gm4_trace(&m);
    let tr2 = gm4_trace(&gm4_mul(&m, &m));
    let det = gm4_det(&ub);
    let sixteen = CR::new(R::from_f64(16.0), R::from_f64(0.0));
    let four = CR::new(R::from_f64(4.0), R::from_f64(0.0));
    let g1 = (tr * tr) / (sixteen * det);
    let g2 = (tr * tr - tr2) / (four * det);
    [g1.re, g1.im, g2.re]
}
