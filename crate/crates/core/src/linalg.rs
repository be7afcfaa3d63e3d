//! Dense complex matrix helpers shared by every module.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;

pub const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

#[inline]
pub fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

pub fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b - b * a
}

pub fn dagger(a: &CMatrix) -> CMatrix {
    a.adjoint()
}

pub fn trace(a: &CMatrix) -> Complex64 {
    a.trace()
}

pub fn frobenius(a: &CMatrix) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Frobenius inner product `Tr(a† b)`.
pub fn inner(a: &CMatrix, b: &CMatrix) -> Complex64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

pub fn max_abs_entry(a: &CMatrix) -> f64 {
    a.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn check_square(a: &CMatrix, n: usize) -> Result<()> {
    if a.nrows() != n || a.ncols() != n {
        return Err(Error::SizeMismatch { expected: n, rows: a.nrows(), cols: a.ncols() });
    }
    Ok(())
}

/// Removes the multiple of the identity, leaving a trace-free matrix.
pub fn trace_free(a: &CMatrix) -> CMatrix {
    let n = a.nrows();
    let shift = a.trace() / c(n as f64);
    let mut out = a.clone();
    for i in 0..n {
        out[(i, i)] -= shift;
    }
    out
}

/// Distance of `a` from the skew-Hermitian subspace, `‖a + a†‖_F`.
pub fn skew_residual(a: &CMatrix) -> f64 {
    frobenius(&(a + a.adjoint()))
}

pub fn hermitian_residual(a: &CMatrix) -> f64 {
    frobenius(&(a - a.adjoint()))
}

/// Ascending eigenvalues of a Hermitian matrix.
pub fn hermitian_eigenvalues(a: &CMatrix) -> Vec<f64> {
    let mut ev: Vec<f64> = SymmetricEigen::new(a.clone()).eigenvalues.iter().copied().collect();
    ev.sort_by(|x, y| x.total_cmp(y));
    ev
}

/// Ascending imaginary parts of the eigenvalues of a skew-Hermitian matrix.
pub fn skew_hermitian_spectrum(a: &CMatrix) -> Vec<f64> {
    // a = iH with H Hermitian; eigenvalues of a are i·eig(H).
    let h = a * (-I);
    hermitian_eigenvalues(&h)
}

/// Eigenvalues of a general complex matrix, sorted by real then imaginary part.
pub fn general_spectrum(a: &CMatrix) -> Vec<Complex64> {
    // The complex Schur form is triangular, so the eigenvalues always exist.
    let mut ev: Vec<Complex64> = a.clone().eigenvalues().map(|v| v.iter().copied().collect()).unwrap_or_default();
    ev.sort_by(|x, y| x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im)));
    ev
}

const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

// Largest 1-norm for which the degree-13 approximant meets unit roundoff.
const THETA13: f64 = 5.371920351148152;

fn one_norm(a: &CMatrix) -> f64 {
    (0..a.ncols()).map(|j| a.column(j).iter().map(|z| z.norm()).sum::<f64>()).fold(0.0, f64::max)
}

/// Matrix exponential by scaling and squaring with the [13/13] Padé approximant.
pub fn matrix_exponential(m: &CMatrix) -> Result<CMatrix> {
    let n = m.nrows();
    if m.ncols() != n {
        return Err(Error::SizeMismatch { expected: n, rows: n, cols: m.ncols() });
    }
    if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Overflow(f64::INFINITY));
    }
    let norm = one_norm(m);
    if n == 0 {
        return Ok(m.clone());
    }
    let squarings = if norm > THETA13 { (norm / THETA13).log2().ceil() as i32 } else { 0 };
    if squarings > 1000 {
        return Err(Error::Overflow(norm));
    }
    let a = m * c(0.5f64.powi(squarings));
    let id = identity(n);
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let b = |k: usize| c(PADE13[k]);

    let u_inner = &a6 * b(13) + &a4 * b(11) + &a2 * b(9);
    let u = &a * (&a6 * u_inner + &a6 * b(7) + &a4 * b(5) + &a2 * b(3) + &id * b(1));
    let v_inner = &a6 * b(12) + &a4 * b(10) + &a2 * b(8);
    let v = &a6 * v_inner + &a6 * b(6) + &a4 * b(4) + &a2 * b(2) + &id * b(0);

    let p = &v + &u;
    let q = &v - &u;
    let mut r = q.lu().solve(&p).ok_or_else(|| Error::Degenerate("singular Padé denominator".into()))?;
    for _ in 0..squarings {
        r = &r * &r;
    }
    if r.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Overflow(norm));
    }
    Ok(r)
}
