//! Minimal 2x2 complex matrix arithmetic for the `(alpha, alpha*)` dynamics.

use core::ops::{Add, Mul, Sub};

use num_complex::Complex64;

/// Dense 2x2 complex matrix, row-major.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mat2(pub [[Complex64; 2]; 2]);

impl Mat2 {
    pub const fn new(m00: Complex64, m01: Complex64, m10: Complex64, m11: Complex64) -> Self {
        Mat2([[m00, m01], [m10, m11]])
    }

    pub fn identity() -> Self {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        Mat2([[one, zero], [zero, one]])
    }

    pub fn zeros() -> Self {
        let zero = Complex64::new(0.0, 0.0);
        Mat2([[zero, zero], [zero, zero]])
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Mat2([
            [self.0[0][0].conj(), self.0[1][0].conj()],
            [self.0[0][1].conj(), self.0[1][1].conj()],
        ])
    }

    pub fn det(&self) -> Complex64 {
        self.0[0][0] * self.0[1][1] - self.0[0][1] * self.0[1][0]
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Mat2([
            [self.0[0][0] * c, self.0[0][1] * c],
            [self.0[1][0] * c, self.0[1][1] * c],
        ])
    }

    pub fn mul_vec(&self, v: [Complex64; 2]) -> [Complex64; 2] {
        [
            self.0[0][0] * v[0] + self.0[0][1] * v[1],
            self.0[1][0] * v[0] + self.0[1][1] * v[1],
        ]
    }

    /// Largest entrywise absolute difference.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..2 {
            for j in 0..2 {
                let d = (self.0[i][j] - other.0[i][j]).norm();
                if d > worst {
                    worst = d;
                }
            }
        }
        worst
    }

    pub(crate) fn to_reals(self) -> [f64; 8] {
        [
            self.0[0][0].re,
            self.0[0][0].im,
            self.0[0][1].re,
            self.0[0][1].im,
            self.0[1][0].re,
            self.0[1][0].im,
            self.0[1][1].re,
            self.0[1][1].im,
        ]
    }

    pub(crate) fn from_reals(r: &[f64; 8]) -> Self {
        Mat2([
            [Complex64::new(r[0], r[1]), Complex64::new(r[2], r[3])],
            [Complex64::new(r[4], r[5]), Complex64::new(r[6], r[7])],
        ])
    }
}

impl Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, rhs: Mat2) -> Mat2 {
        let a = &self.0;
        let b = &rhs.0;
        Mat2([
            [
                a[0][0] * b[0][0] + a[0][1] * b[1][0],
                a[0][0] * b[0][1] + a[0][1] * b[1][1],
            ],
            [
                a[1][0] * b[0][0] + a[1][1] * b[1][0],
                a[1][0] * b[0][1] + a[1][1] * b[1][1],
            ],
        ])
    }
}

impl Add for Mat2 {
    type Output = Mat2;
    fn add(self, rhs: Mat2) -> Mat2 {
        let mut out = self;
        for i in 0..2 {
            for j in 0..2 {
                out.0[i][j] += rhs.0[i][j];
            }
        }
        out
    }
}

impl Sub for Mat2 {
    type Output = Mat2;
    fn sub(self, rhs: Mat2) -> Mat2 {
        let mut out = self;
        for i in 0..2 {
            for j in 0..2 {
                out.0[i][j] -= rhs.0[i][j];
            }
        }
        out
    }
}
