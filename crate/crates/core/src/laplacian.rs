//! The quantized (Hoppe–Yau) Laplacian `Δ_N = N² Σ_k [X_k, [X_k, ·]]`, its
//! eigenbasis `T_{l,m}`, inverses, and the quantized gradient.
//!
//! `Δ_N` preserves each diagonal band of a matrix. On band `m` it acts as a
//! real symmetric tridiagonal operator of size `N − |m|`, so the eigenbasis is
//! computed band by band. Band `m > 0` is the `m`-th subdiagonal; `T_{l,−m}` is
//! obtained from `T_{l,m}† = (−1)^m T_{l,−m}`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{c, check_square, commutator, CMatrix};
use crate::spin::SpinBasis;

/// Which stream function inverts the vorticity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Model {
    /// `P = Δ_N⁻¹ W`
    Euler,
    /// `P = (1 − Δ_N)⁻¹ Δ_N⁻¹ W`
    Epdiff,
}

impl std::str::FromStr for Model {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "euler" => Ok(Model::Euler),
            "epdiff" => Ok(Model::Epdiff),
            other => Err(Error::InvalidArgument(format!("unknown model '{other}'"))),
        }
    }
}

impl std::fmt::Display for Model {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Model::Euler => "euler",
            Model::Epdiff => "epdiff",
        })
    }
}

/// `N² Σ_k [X_k, [X_k, M]]`, evaluated densely.
pub fn apply_laplacian(basis: &SpinBasis, m: &CMatrix) -> Result<CMatrix> {
    let n = basis.n();
    check_square(m, n)?;
    let mut out = CMatrix::zeros(n, n);
    for x in basis.generators() {
        out += commutator(x, &commutator(x, m));
    }
    Ok(out * c((n * n) as f64))
}

/// Tridiagonal restriction of `Δ_N` to band `m` in the basis `E_{k+m,k}`.
fn band_operator(basis: &SpinBasis, m: usize) -> DMatrix<f64> {
    let n = basis.n();
    let len = n - m;
    let s = basis.spin();
    let mut a = DMatrix::zeros(len, len);
    for k in 0..len {
        a[(k, k)] = -(2.0 * s * (s + 1.0) - 2.0 * basis.weight(k + m) * basis.weight(k));
        if k + 1 < len {
            let off = basis.ladder(k + m) * basis.ladder(k);
            a[(k + 1, k)] = off;
            a[(k, k + 1)] = off;
        }
    }
    a
}

/// `ad_{J_+}` mapping a band-(m−1) vector to a band-m vector.
fn raise_band(basis: &SpinBasis, m: usize, t: &[f64]) -> Vec<f64> {
    let len = basis.n() - m;
    (0..len).map(|k| basis.ladder(k + m - 1) * t[k] - basis.ladder(k) * t[k + 1]).collect()
}

/// Orthonormal eigenmatrices `T_{l,m}` of `Δ_N`, stored as band vectors.
#[derive(Debug, Clone)]
pub struct LaplacianEigenbasis {
    n: usize,
    // bands[m] has N−m rows; column j holds T_{m+j, m}.
    bands: Vec<DMatrix<f64>>,
    eigenvalues: Vec<Vec<f64>>,
}

impl LaplacianEigenbasis {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn lmax(&self) -> usize {
        self.n - 1
    }

    /// Band vectors for `m ≥ 0`; column `j` is `T_{m+j,m}` along the subdiagonal.
    pub fn band(&self, m: usize) -> &DMatrix<f64> {
        &self.bands[m]
    }

    /// Computed eigenvalues of band `m`, ordered by `l = m, m+1, …`.
    pub fn band_eigenvalues(&self, m: usize) -> &[f64] {
        &self.eigenvalues[m]
    }

    /// All computed `(l, m, λ)` triples, including negative `m`.
    pub fn spectrum(&self) -> Vec<(usize, i64, f64)> {
        let mut out = Vec::with_capacity(self.n * self.n);
        for (m, ev) in self.eigenvalues.iter().enumerate() {
            for (j, &lam) in ev.iter().enumerate() {
                out.push((m + j, m as i64, lam));
                if m > 0 {
                    out.push((m + j, -(m as i64), lam));
                }
            }
        }
        out
    }

    fn check_index(&self, l: usize, m: i64) -> Result<()> {
        if l >= self.n || m.unsigned_abs() as usize > l {
            return Err(Error::IndexOutOfRange { l: l as i64, m });
        }
        Ok(())
    }

    /// Dense `T_{l,m}`.
    pub fn matrix(&self, l: usize, m: i64) -> Result<CMatrix> {
        self.check_index(l, m)?;
        let p = m.unsigned_abs() as usize;
        let col = self.bands[p].column(l - p);
        let sign = if m < 0 && p % 2 == 1 { -1.0 } else { 1.0 };
        let mut t = CMatrix::zeros(self.n, self.n);
        for k in 0..self.n - p {
            if m >= 0 {
                t[(k + p, k)] = c(col[k]);
            } else {
                t[(k, k + p)] = c(sign * col[k]);
            }
        }
        Ok(t)
    }

    /// `Tr(T_{l,m}† M)`.
    pub fn coefficient(&self, l: usize, m: i64, mat: &CMatrix) -> Result<Complex64> {
        self.check_index(l, m)?;
        check_square(mat, self.n)?;
        let p = m.unsigned_abs() as usize;
        let col = self.bands[p].column(l - p);
        let mut acc = Complex64::new(0.0, 0.0);
        for k in 0..self.n - p {
            acc += if m >= 0 { mat[(k + p, k)] } else { mat[(k, k + p)] } * col[k];
        }
        if m < 0 && p % 2 == 1 {
            acc = -acc;
        }
        Ok(acc)
    }

    /// Applies `f(Δ_N)` given the scalar response `f(l)` on each eigenspace.
    pub fn apply_spectral<F>(&self, mat: &CMatrix, f: F) -> Result<CMatrix>
    where
        F: Fn(usize) -> f64 + Sync,
    {
        check_square(mat, self.n)?;
        let n = self.n;
        let mut out = CMatrix::zeros(n, n);
        for p in 0..n {
            let v = &self.bands[p];
            let weights = DVector::from_iterator(n - p, (p..n).map(&f));
            let diagonals: &[bool] = if p == 0 { &[true] } else { &[true, false] };
            for &lower in diagonals {
                let w = DVector::from_iterator(
                    n - p,
                    (0..n - p).map(|k| if lower { mat[(k + p, k)] } else { mat[(k, k + p)] }),
                );
                let re = v * (v.tr_mul(&w.map(|z| z.re)).component_mul(&weights));
                let im = v * (v.tr_mul(&w.map(|z| z.im)).component_mul(&weights));
                for k in 0..n - p {
                    let z = Complex64::new(re[k], im[k]);
                    if lower {
                        out[(k + p, k)] = z;
                    } else {
                        out[(k, k + p)] = z;
                    }
                }
            }
        }
        Ok(out)
    }

    /// Rebuilds an eigenbasis from stored band vectors (e.g. a disk cache),
    /// verifying the eigen-residual of every column.
    pub fn from_bands(basis: &SpinBasis, bands: Vec<DMatrix<f64>>) -> Result<Self> {
        let n = basis.n();
        if bands.len() != n {
            return Err(Error::Format(format!("expected {n} bands, found {}", bands.len())));
        }
        let mut eigenvalues = Vec::with_capacity(n);
        for (m, v) in bands.iter().enumerate() {
            if v.nrows() != n - m || v.ncols() != n - m {
                return Err(Error::Format(format!("band {m} has shape {}x{}", v.nrows(), v.ncols())));
            }
            let a = band_operator(basis, m);
            let mut ev = Vec::with_capacity(n - m);
            for j in 0..n - m {
                let l = (m + j) as f64;
                let lam = -l * (l + 1.0);
                let col = v.column(j);
                let resid = (&a * col - col * lam).norm();
                if resid > 1e-9 * (1.0 + lam.abs()) {
                    return Err(Error::Eigensolver {
                        band: m,
                        reason: format!("cached vector l={} has residual {resid:e}", m + j),
                    });
                }
                ev.push(col.dot(&(&a * col)));
            }
            eigenvalues.push(ev);
        }
        Ok(LaplacianEigenbasis { n, bands, eigenvalues })
    }
}

/// Solves the band eigenproblems of `Δ_N` and fixes phases to mirror the
/// spherical harmonics: `T_{l,0}` has a positive `(N,N)` entry and
/// `T_{l,m+1}` is a positive multiple of `[J_+, T_{l,m}]`.
pub fn build_eigenbasis(basis: &SpinBasis) -> Result<LaplacianEigenbasis> {
    let n = basis.n();
    let solved: Vec<(DMatrix<f64>, Vec<f64>)> =
        (0..n).into_par_iter().map(|m| solve_band(basis, m)).collect::<Result<_>>()?;

    let (mut bands, eigenvalues): (Vec<_>, Vec<_>) = solved.into_iter().unzip();

    for j in 0..n {
        if bands[0][(n - 1, j)] < 0.0 {
            bands[0].column_mut(j).neg_mut();
        }
    }
    for m in 1..n {
        for j in 0..n - m {
            // T_{l,m} pairs with T_{l,m−1}, which sits in column j+1 of band m−1.
            let prev: Vec<f64> = bands[m - 1].column(j + 1).iter().copied().collect();
            let raised = raise_band(basis, m, &prev);
            let overlap: f64 = bands[m].column(j).iter().zip(&raised).map(|(a, b)| a * b).sum();
            if overlap.abs() < 1e-8 {
                return Err(Error::Eigensolver {
                    band: m,
                    reason: format!("ladder image of l={} is orthogonal to the eigenvector", m + j),
                });
            }
            if overlap < 0.0 {
                bands[m].column_mut(j).neg_mut();
            }
        }
    }
    Ok(LaplacianEigenbasis { n, bands, eigenvalues })
}

fn solve_band(basis: &SpinBasis, m: usize) -> Result<(DMatrix<f64>, Vec<f64>)> {
    let n = basis.n();
    let len = n - m;
    let a = band_operator(basis, m);
    let eig = SymmetricEigen::try_new(a, 1e-15, 10_000)
        .ok_or_else(|| Error::Eigensolver { band: m, reason: "symmetric eigensolver did not converge".into() })?;
    let mut order: Vec<usize> = (0..len).collect();
    // −l(l+1) decreases with l.
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let mut vectors = DMatrix::zeros(len, len);
    let mut values = Vec::with_capacity(len);
    for (j, &idx) in order.iter().enumerate() {
        let l = (m + j) as f64;
        let lam = eig.eigenvalues[idx];
        if (lam + l * (l + 1.0)).abs() > 1e-8 * (1.0 + l * (l + 1.0)) {
            return Err(Error::Eigensolver {
                band: m,
                reason: format!("eigenvalue {lam} does not match −l(l+1) for l={}", m + j),
            });
        }
        let col = eig.eigenvectors.column(idx);
        vectors.set_column(j, &(col / col.norm()));
        values.push(lam);
    }
    Ok((vectors, values))
}

/// Trace-free `Ψ` with `Δ_N Ψ = W − (Tr W / N) I`.
pub fn solve_poisson(eig: &LaplacianEigenbasis, w: &CMatrix) -> Result<CMatrix> {
    eig.apply_spectral(w, |l| if l == 0 { 0.0 } else { -1.0 / (l * (l + 1)) as f64 })
}

/// Stream matrix of the vorticity `W` for the given model.
pub fn solve_stream(eig: &LaplacianEigenbasis, w: &CMatrix, model: Model) -> Result<CMatrix> {
    match model {
        Model::Euler => solve_poisson(eig, w),
        Model::Epdiff => eig.apply_spectral(w, |l| {
            if l == 0 {
                0.0
            } else {
                let ll = (l * (l + 1)) as f64;
                -1.0 / (ll * (1.0 + ll))
            }
        }),
    }
}

/// `(N[X_1,P], N[X_2,P], N[X_3,P])`.
pub fn quantized_gradient(basis: &SpinBasis, p: &CMatrix) -> Result<[CMatrix; 3]> {
    let n = basis.n();
    check_square(p, n)?;
    let scale = c(n as f64);
    Ok([commutator(basis.x(0), p) * scale, commutator(basis.x(1), p) * scale, commutator(basis.x(2), p) * scale])
}
