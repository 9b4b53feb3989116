//! Just enough 2×2 complex linear algebra for single-spin propagators.

use std::ops::Mul;

use num_complex::Complex64;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2(pub [[Complex64; 2]; 2]);

impl Mat2 {
    pub const IDENTITY: Mat2 = Mat2([[ONE, ZERO], [ZERO, ONE]]);
    pub const SIGMA_X: Mat2 = Mat2([[ZERO, ONE], [ONE, ZERO]]);
    pub const SIGMA_Y: Mat2 = Mat2([[ZERO, Complex64::new(0.0, -1.0)], [I, ZERO]]);
    pub const SIGMA_Z: Mat2 = Mat2([[ONE, ZERO], [ZERO, Complex64::new(-1.0, 0.0)]]);

    /// exp(-i·angle·(n·σ)/2) for a unit vector n.
    pub fn su2(angle: f64, n: [f64; 3]) -> Mat2 {
        let (s, c) = (angle / 2.0).sin_cos();
        Mat2([
            [
                Complex64::new(c, -s * n[2]),
                Complex64::new(-s * n[1], -s * n[0]),
            ],
            [
                Complex64::new(s * n[1], -s * n[0]),
                Complex64::new(c, s * n[2]),
            ],
        ])
    }

    /// exp(-i·2π·(a·σ)·dt) for a Hamiltonian a·σ given in Hz.
    pub fn exp_pauli(a: [f64; 3], dt: f64) -> Mat2 {
        let norm = (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt();
        if norm == 0.0 {
            return Mat2::IDENTITY;
        }
        let n = [a[0] / norm, a[1] / norm, a[2] / norm];
        Mat2::su2(4.0 * std::f64::consts::PI * norm * dt, n)
    }

    /// diag(e^{iα}, e^{-iα}).
    pub fn z_phase(alpha: f64) -> Mat2 {
        Mat2([
            [Complex64::from_polar(1.0, alpha), ZERO],
            [ZERO, Complex64::from_polar(1.0, -alpha)],
        ])
    }

    pub fn adjoint(&self) -> Mat2 {
        let m = &self.0;
        Mat2([
            [m[0][0].conj(), m[1][0].conj()],
            [m[0][1].conj(), m[1][1].conj()],
        ])
    }

    pub fn trace(&self) -> Complex64 {
        self.0[0][0] + self.0[1][1]
    }

    pub fn det(&self) -> Complex64 {
        self.0[0][0] * self.0[1][1] - self.0[0][1] * self.0[1][0]
    }

    pub fn scale(&self, z: Complex64) -> Mat2 {
        let m = &self.0;
        Mat2([[m[0][0] * z, m[0][1] * z], [m[1][0] * z, m[1][1] * z]])
    }

    /// Largest entry-wise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Mat2) -> f64 {
        let mut worst: f64 = 0.0;
        for r in 0..2 {
            for c in 0..2 {
                worst = worst.max((self.0[r][c] - other.0[r][c]).norm());
            }
        }
        worst
    }

    pub fn apply(&self, v: [Complex64; 2]) -> [Complex64; 2] {
        let m = &self.0;
        [
            m[0][0] * v[0] + m[0][1] * v[1],
            m[1][0] * v[0] + m[1][1] * v[1],
        ]
    }
}

impl Mul for Mat2 {
    type Output = Mat2;

    fn mul(self, rhs: Mat2) -> Mat2 {
        let (a, b) = (&self.0, &rhs.0);
        let mut out = [[ZERO; 2]; 2];
        for (r, row) in out.iter_mut().enumerate() {
            for (c, cell) in row.iter_mut().enumerate() {
                *cell = a[r][0] * b[0][c] + a[r][1] * b[1][c];
            }
        }
        Mat2(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pauli_algebra() {
        let xy = Mat2::SIGMA_X * Mat2::SIGMA_Y;
        assert!(xy.max_abs_diff(&Mat2::SIGMA_Z.scale(I)) < 1e-15);
        assert!((Mat2::SIGMA_Z * Mat2::SIGMA_Z).max_abs_diff(&Mat2::IDENTITY) < 1e-15);
    }

    #[test]
    fn su2_half_turn_is_minus_i_sigma() {
        let u = Mat2::su2(std::f64::consts::PI, [1.0, 0.0, 0.0]);
        assert!(u.max_abs_diff(&Mat2::SIGMA_X.scale(-I)) < 1e-15);
        let u = Mat2::su2(std::f64::consts::PI, [0.0, 1.0, 0.0]);
        assert!(u.max_abs_diff(&Mat2::SIGMA_Y.scale(-I)) < 1e-15);
        let u = Mat2::su2(std::f64::consts::PI, [0.0, 0.0, 1.0]);
        assert!(u.max_abs_diff(&Mat2::SIGMA_Z.scale(-I)) < 1e-15);
    }
}
