//! Classical Poisson brackets on the sphere, evaluated spectrally.
//!
//! `{f, g} = n · (∇f × ∇g)`, so `{x, y} = z`. With `u_f = r × ∇f = i L f`
//! for the angular momentum operator `L`, the bracket is `n · (u_f × u_g)`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::harmonics::{analyze, synthesize_like, GridField, HarmonicCoefficients};
use crate::linalg::I;

/// Rotated gradient `r × ∇f` sampled on `like`.
fn rotated_gradient(f: &HarmonicCoefficients, like: &GridField) -> Result<[GridField; 3]> {
    let l = f.angular_momentum();
    Ok([
        synthesize_like(&l[0].scale(I), like)?,
        synthesize_like(&l[1].scale(I), like)?,
        synthesize_like(&l[2].scale(I), like)?,
    ])
}

/// Bilinear bracket of two band-limited coefficient sets, sampled on `like`.
pub fn bracket_of_coefficients(
    f: &HarmonicCoefficients,
    g: &HarmonicCoefficients,
    like: &GridField,
) -> Result<GridField> {
    let uf = rotated_gradient(f, like)?;
    let ug = rotated_gradient(g, like)?;
    let nlon = like.nlon();
    let values = (0..like.values().len())
        .map(|k| {
            let p = like.point(k / nlon, k % nlon).to_array();
            let a = [uf[0].values()[k], uf[1].values()[k], uf[2].values()[k]];
            let b = [ug[0].values()[k], ug[1].values()[k], ug[2].values()[k]];
            let cr = [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]];
            cr[0] * p[0] + cr[1] * p[1] + cr[2] * p[2]
        })
        .collect();
    like.with_values(values)
}

/// Band limit of inputs whose bracket (degree `2L − 1`) the grid resolves exactly.
pub fn bracket_lmax(grid: &GridField) -> usize {
    grid.max_lmax().div_ceil(2)
}

/// `{f, g}` for fields of degree at most `lmax` sampled on the same grid.
pub fn classical_bracket_with_lmax(f: &GridField, g: &GridField, lmax: usize) -> Result<GridField> {
    if !f.same_grid(g) {
        return Err(Error::SizeMismatch { expected: f.nlat(), rows: g.nlat(), cols: g.nlon() });
    }
    let product = (2 * lmax).saturating_sub(1);
    if !f.supports(product) {
        return Err(Error::InsufficientResolution { nlat: f.nlat(), nlon: f.nlon(), lmax: product });
    }
    let fc = analyze(f, lmax)?;
    let gc = analyze(g, lmax)?;
    bracket_of_coefficients(&fc, &gc, f)
}

/// `{f, g}` assuming inputs are band-limited to [`bracket_lmax`] of the grid.
pub fn classical_bracket(f: &GridField, g: &GridField) -> Result<GridField> {
    classical_bracket_with_lmax(f, g, bracket_lmax(f))
}

fn real_part(f: &GridField) -> GridField {
    f.map(|_, v| Complex64::new(v.re, 0.0))
}

fn imag_part(f: &GridField) -> GridField {
    f.map(|_, v| Complex64::new(v.im, 0.0))
}

/// `{Re ψ1, Re ψ2} − {Im ψ1, Im ψ2} + i({Re ψ1, Im ψ2} + {Im ψ1, Re ψ2})`.
pub fn complex_bracket(psi1: &GridField, psi2: &GridField) -> Result<GridField> {
    let (r1, i1) = (real_part(psi1), imag_part(psi1));
    let (r2, i2) = (real_part(psi2), imag_part(psi2));
    let rr = classical_bracket(&r1, &r2)?;
    let ii = classical_bracket(&i1, &i2)?;
    let ri = classical_bracket(&r1, &i2)?;
    let ir = classical_bracket(&i1, &r2)?;
    let real = rr.zip_with(&ii, |a, b| a - b)?;
    let imag = ri.zip_with(&ir, |a, b| a + b)?;
    real.zip_with(&imag, |a, b| a + I * b)
}
