//! Spin-(N−1)/2 generators of 𝔰𝔲(2) and the rotation operators they generate.
//!
//! The generators are `X_k = −(i/N) J_k`, where `J_k` are the angular momentum
//! matrices with `J_3` diagonal and ascending, so row/column `N` (index `N−1`)
//! carries the `+s` eigenvalue and sits at the north pole.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{c, matrix_exponential, CMatrix, I};

/// A point on the unit sphere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitVector3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl UnitVector3 {
    pub const NORTH: UnitVector3 = UnitVector3 { x: 0.0, y: 0.0, z: 1.0 };
    pub const SOUTH: UnitVector3 = UnitVector3 { x: 0.0, y: 0.0, z: -1.0 };
    pub const X: UnitVector3 = UnitVector3 { x: 1.0, y: 0.0, z: 0.0 };

    /// Normalizes `(x, y, z)`; fails on the zero vector or non-finite input.
    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        let n = (x * x + y * y + z * z).sqrt();
        if !n.is_finite() || n < 1e-300 {
            return Err(Error::Degenerate(format!("cannot normalize ({x}, {y}, {z})")));
        }
        Ok(UnitVector3 { x: x / n, y: y / n, z: z / n })
    }

    pub fn from_array(v: [f64; 3]) -> Result<Self> {
        Self::new(v[0], v[1], v[2])
    }

    pub fn from_spherical(colat: f64, lon: f64) -> Self {
        let s = colat.sin();
        UnitVector3 { x: s * lon.cos(), y: s * lon.sin(), z: colat.cos() }
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn dot(self, o: UnitVector3) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    /// Great-circle distance in radians.
    pub fn angle_to(self, o: UnitVector3) -> f64 {
        let cr = cross(self.to_array(), o.to_array());
        let sin = (cr[0] * cr[0] + cr[1] * cr[1] + cr[2] * cr[2]).sqrt();
        sin.atan2(self.dot(o))
    }

    pub fn colatitude(self) -> f64 {
        self.z.clamp(-1.0, 1.0).acos()
    }

    pub fn longitude(self) -> f64 {
        self.y.atan2(self.x)
    }
}

pub fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

/// The three generators of the spin-(N−1)/2 representation, scaled by 1/N.
#[derive(Debug, Clone)]
pub struct SpinBasis {
    n: usize,
    x: [CMatrix; 3],
    j_plus: CMatrix,
}

impl SpinBasis {
    pub fn new(n: usize) -> Result<Self> {
        build_spin_basis(n)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Spin `s = (N−1)/2`.
    pub fn spin(&self) -> f64 {
        (self.n as f64 - 1.0) / 2.0
    }

    pub fn x(&self, k: usize) -> &CMatrix {
        &self.x[k]
    }

    pub fn generators(&self) -> &[CMatrix; 3] {
        &self.x
    }

    /// Raising operator `J_+` (nonzero on the first subdiagonal).
    pub fn j_plus(&self) -> &CMatrix {
        &self.j_plus
    }

    /// Angular momentum matrix `J_k = i N X_k`.
    pub fn j(&self, k: usize) -> CMatrix {
        &self.x[k] * (I * c(self.n as f64))
    }

    /// `J_3` eigenvalue of basis index `i` (0-based): `−s + i`.
    pub fn weight(&self, i: usize) -> f64 {
        i as f64 - self.spin()
    }

    /// Off-diagonal ladder coefficient `(J_+)_{i+1,i}`.
    pub fn ladder(&self, i: usize) -> f64 {
        if i + 1 >= self.n {
            return 0.0;
        }
        let s = self.spin();
        let m = self.weight(i);
        (s * (s + 1.0) - m * (m + 1.0)).sqrt()
    }

    /// `Σ_k u_k X_k`.
    pub fn combination(&self, u: [f64; 3]) -> CMatrix {
        &self.x[0] * c(u[0]) + &self.x[1] * c(u[1]) + &self.x[2] * c(u[2])
    }
}

/// Builds `X_k = −(i/N) J_k` for the spin-(N−1)/2 representation.
pub fn build_spin_basis(n: usize) -> Result<SpinBasis> {
    if n < 2 {
        return Err(Error::InvalidSize(n));
    }
    let s = (n as f64 - 1.0) / 2.0;
    let mut j3 = CMatrix::zeros(n, n);
    let mut jp = CMatrix::zeros(n, n);
    for i in 0..n {
        let m = i as f64 - s;
        j3[(i, i)] = c(m);
        if i + 1 < n {
            jp[(i + 1, i)] = c((s * (s + 1.0) - m * (m + 1.0)).sqrt());
        }
    }
    let jm = jp.transpose();
    let j1 = (&jp + &jm) * c(0.5);
    let j2 = (&jp - &jm) * Complex64::new(0.0, -0.5);
    let scale = Complex64::new(0.0, -1.0 / n as f64);
    Ok(SpinBasis { n, x: [j1 * scale, j2 * scale, j3 * scale], j_plus: jp })
}

/// `exp(angle · N · (u · X))`; conjugation by the result rotates by `angle` about `axis`.
pub fn rotation_operator(basis: &SpinBasis, axis: UnitVector3, angle: f64) -> CMatrix {
    let gen = basis.combination(axis.to_array()) * c(angle * basis.n() as f64);
    // Skew-Hermitian argument with a finite norm; the exponential cannot fail.
    matrix_exponential(&gen).expect("finite skew-Hermitian exponent")
}

/// Hermitian position observables `C_k = 2 J_k / √(N²−1)` with `Σ C_k² = I`.
pub fn coordinate_matrices(basis: &SpinBasis) -> [CMatrix; 3] {
    let n = basis.n() as f64;
    let scale = c(2.0 / (n * n - 1.0).sqrt());
    [basis.j(0) * scale, basis.j(1) * scale, basis.j(2) * scale]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{commutator, frobenius, identity};

    #[test]
    fn rejects_small_n() {
        assert_eq!(build_spin_basis(1).unwrap_err(), Error::InvalidSize(1));
        assert!(build_spin_basis(0).is_err());
    }

    #[test]
    fn n2_x3_is_diagonal_quarter() {
        let b = build_spin_basis(2).unwrap();
        let x3 = b.x(2);
        assert!((x3[(0, 0)] - Complex64::new(0.0, 0.25)).norm() < 1e-15);
        assert!((x3[(1, 1)] - Complex64::new(0.0, -0.25)).norm() < 1e-15);
        assert_eq!(x3[(0, 1)], c(0.0));
    }

    #[test]
    fn n2_commutator_entrywise() {
        let b = build_spin_basis(2).unwrap();
        let lhs = commutator(b.x(0), b.x(1));
        let rhs = b.x(2) * c(0.5);
        for (l, r) in lhs.iter().zip(rhs.iter()) {
            assert!((l - r).norm() < 1e-15);
        }
    }

    #[test]
    fn generators_are_skew_and_trace_free() {
        for n in [2, 3, 7, 16] {
            let b = build_spin_basis(n).unwrap();
            for k in 0..3 {
                let x = b.x(k);
                assert!(frobenius(&(x + x.adjoint())) < 1e-15);
                assert!(x.trace().norm() < 1e-14);
            }
        }
    }

    #[test]
    fn casimir() {
        for n in [2, 5, 12] {
            let b = build_spin_basis(n).unwrap();
            let nf = n as f64;
            let sum = b.generators().iter().map(|x| x * x).fold(CMatrix::zeros(n, n), |a, x| a + x) * c(nf * nf);
            let want = identity(n) * c(-(nf * nf - 1.0) / 4.0);
            assert!(frobenius(&(sum - want)) < 1e-12);
        }
    }

    #[test]
    fn rotation_zero_angle_is_identity() {
        let b = build_spin_basis(5).unwrap();
        let r = rotation_operator(&b, UnitVector3::X, 0.0);
        assert!(frobenius(&(r - identity(5))) < 1e-15);
    }

    #[test]
    fn rotation_two_pi_is_minus_identity_for_half_spin() {
        let b = build_spin_basis(2).unwrap();
        let r = rotation_operator(&b, UnitVector3::NORTH, 2.0 * std::f64::consts::PI);
        assert!(frobenius(&(r + identity(2))) < 1e-14);
    }

    #[test]
    fn rotation_about_z_is_diagonal() {
        let b = build_spin_basis(6).unwrap();
        let r = rotation_operator(&b, UnitVector3::NORTH, 0.7);
        for i in 0..6 {
            for j in 0..6 {
                if i != j {
                    assert!(r[(i, j)].norm() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn coordinate_matrices_n2() {
        let b = build_spin_basis(2).unwrap();
        let cm = coordinate_matrices(&b);
        // 2/√3 · diag(−1/2, 1/2); the squares of all three sum to the identity.
        let v = 1.0 / 3f64.sqrt();
        assert!((cm[2][(0, 0)] - c(-v)).norm() < 1e-14);
        assert!((cm[2][(1, 1)] - c(v)).norm() < 1e-14);
        for k in 0..3 {
            assert!(cm[k].trace().norm() < 1e-14);
        }
    }

    #[test]
    fn coordinate_matrices_square_to_identity() {
        for n in [2, 9, 20] {
            let b = build_spin_basis(n).unwrap();
            let cm = coordinate_matrices(&b);
            let s = cm.iter().map(|m| m * m).fold(CMatrix::zeros(n, n), |a, x| a + x);
            assert!(frobenius(&(s - identity(n))) < 1e-12);
        }
    }

    #[test]
    fn unit_vector_rejects_zero() {
        assert!(UnitVector3::new(0.0, 0.0, 0.0).is_err());
        let u = UnitVector3::new(3.0, 0.0, 4.0).unwrap();
        assert!((u.dot(u) - 1.0).abs() < 1e-15);
    }
}
