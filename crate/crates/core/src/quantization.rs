//! Maps between functions on the sphere and N×N matrices, and blob matrices.
//!
//! Two conventions coexist:
//!
//! * `quantize`/`dequantize` are the bare expansion `Σ a_{l,m} T_{l,m}` and its
//!   Frobenius projection. Real functions land in Hermitian matrices.
//! * `quantize_function`/`dequantize_function` use `f ↦ −iλ_N Σ a_{l,m} T_{l,m}`
//!   with `λ_N = √(N²−1) / (4√(πN))`. This sends the coordinate functions
//!   `x_k` exactly to `X_k`, real functions to 𝔲(N), and satisfies
//!   `N[Q f, Q g] → Q{f, g}` as `N → ∞`.
//!
//! Stream and vorticity matrices are `N · quantize_function`, which makes
//! `Ẇ = [P, W]` and `Ḟ = P F` run on the classical time scale.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::harmonics::HarmonicCoefficients;
use crate::laplacian::LaplacianEigenbasis;
use crate::linalg::{c, check_square, trace_free, CMatrix, I};
use crate::spin::{coordinate_matrices, cross, rotation_operator, SpinBasis, UnitVector3};

/// `λ_N = √(N²−1) / (4√(πN))`.
pub fn quantization_scale(n: usize) -> f64 {
    let nf = n as f64;
    (nf * nf - 1.0).sqrt() / (4.0 * (PI * nf).sqrt())
}

/// `Σ a_{l,m} T_{l,m}` over `l ≤ min(lmax, N−1)`; higher degrees are dropped.
pub fn quantize(coeffs: &HarmonicCoefficients, eig: &LaplacianEigenbasis) -> CMatrix {
    let n = eig.n();
    let mut out = CMatrix::zeros(n, n);
    for (l, m, a) in coeffs.iter() {
        if l >= n || a == Complex64::new(0.0, 0.0) {
            continue;
        }
        let p = m.unsigned_abs() as usize;
        let col = eig.band(p).column(l - p);
        let sign = if m < 0 && p % 2 == 1 { -1.0 } else { 1.0 };
        for k in 0..n - p {
            if m >= 0 {
                out[(k + p, k)] += a * col[k];
            } else {
                out[(k, k + p)] += a * (sign * col[k]);
            }
        }
    }
    out
}

/// `a_{l,m} = Tr(T_{l,m}† M)` for `l ≤ N−1`.
pub fn dequantize(m: &CMatrix, eig: &LaplacianEigenbasis) -> Result<HarmonicCoefficients> {
    let n = eig.n();
    check_square(m, n)?;
    let mut out = HarmonicCoefficients::zeros(n - 1);
    for l in 0..n {
        for mm in -(l as i64)..=l as i64 {
            out.set(l, mm, eig.coefficient(l, mm, m)?)?;
        }
    }
    Ok(out)
}

/// `−iλ_N Σ a_{l,m} T_{l,m}`: real functions map to skew-Hermitian matrices.
pub fn quantize_function(coeffs: &HarmonicCoefficients, eig: &LaplacianEigenbasis) -> CMatrix {
    quantize(coeffs, eig) * (-I * quantization_scale(eig.n()))
}

/// Left inverse of [`quantize_function`] on `l ≤ N−1`.
pub fn dequantize_function(m: &CMatrix, eig: &LaplacianEigenbasis) -> Result<HarmonicCoefficients> {
    Ok(dequantize(m, eig)?.scale(I / quantization_scale(eig.n())))
}

/// Stream matrix of a complex generator `ψ`: `N · quantize_function(ψ)`, trace-free.
///
/// For `ψ = z` the flow `exp(tP)` equals `rotation_operator(ẑ, t)`.
pub fn quantize_generator(coeffs: &HarmonicCoefficients, eig: &LaplacianEigenbasis) -> CMatrix {
    trace_free(&(quantize_function(coeffs, eig) * c(eig.n() as f64)))
}

/// Quantized vorticity `N · quantize_function(ω)`, trace-free.
pub fn quantize_vorticity(coeffs: &HarmonicCoefficients, eig: &LaplacianEigenbasis) -> CMatrix {
    quantize_generator(coeffs, eig)
}

/// Inverse of [`quantize_vorticity`] on the trace-free part.
pub fn dequantize_vorticity(w: &CMatrix, eig: &LaplacianEigenbasis) -> Result<HarmonicCoefficients> {
    Ok(dequantize_function(w, eig)?.scale(c(1.0 / eig.n() as f64)))
}

/// Real density represented by a matrix whose trace sets its phase, e.g. a
/// blob `B` (trace `i`) or `F F†` (positive trace). The matrix is rotated to
/// Hermitian form and projected, so positive-definite matrices give densities
/// peaked where their weight sits.
pub fn dequantize_density(m: &CMatrix, eig: &LaplacianEigenbasis) -> Result<HarmonicCoefficients> {
    let tr = m.trace();
    let phase = if tr.norm() > 0.0 { tr.conj() / tr.norm() } else { c(1.0) };
    dequantize(&(m * phase), eig)
}

/// The blob at the north pole: `i` at entry `(N, N)`, zero elsewhere.
pub fn blob_north(n: usize) -> Result<CMatrix> {
    if n < 2 {
        return Err(Error::InvalidSize(n));
    }
    let mut b = CMatrix::zeros(n, n);
    b[(n - 1, n - 1)] = I;
    Ok(b)
}

/// Rotation taking the north pole to `y0`: axis `ẑ × y0` (or `x̂` at the poles).
pub fn placement_rotation(basis: &SpinBasis, y0: UnitVector3) -> CMatrix {
    let ax = cross([0.0, 0.0, 1.0], y0.to_array());
    let norm = (ax[0] * ax[0] + ax[1] * ax[1] + ax[2] * ax[2]).sqrt();
    let axis =
        if norm > 1e-14 { UnitVector3 { x: ax[0] / norm, y: ax[1] / norm, z: ax[2] / norm } } else { UnitVector3::X };
    rotation_operator(basis, axis, y0.colatitude())
}

/// `R B_north R†` with `R` from [`placement_rotation`].
pub fn blob_at(basis: &SpinBasis, y0: UnitVector3) -> Result<CMatrix> {
    let r = placement_rotation(basis, y0);
    Ok(&r * blob_north(basis.n())? * r.adjoint())
}

/// Normalized `(Tr(C_k B / Tr B))_k` with the coordinate matrices `C_k`.
pub fn blob_center(basis: &SpinBasis, b: &CMatrix) -> Result<UnitVector3> {
    check_square(b, basis.n())?;
    let tr = b.trace();
    if tr.norm() < 1e-14 * (1.0 + crate::linalg::frobenius(b)) {
        return Err(Error::Degenerate("blob has zero trace".into()));
    }
    let rho = b / tr;
    let cm = coordinate_matrices(basis);
    let v: Vec<Complex64> = cm.iter().map(|ck| crate::linalg::inner(&ck.adjoint(), &rho)).collect();
    let re = [v[0].re, v[1].re, v[2].re];
    let len = (re[0] * re[0] + re[1] * re[1] + re[2] * re[2]).sqrt();
    let im = v.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    if im > 1e-10 * (1.0 + len) {
        return Err(Error::Degenerate(format!("center has imaginary part {im:e}")));
    }
    if len < 1e-10 {
        return Err(Error::Degenerate("blob has no center (uniform density)".into()));
    }
    UnitVector3::from_array(re)
}
