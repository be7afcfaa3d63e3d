//! Spherical harmonics, band-limited coefficient sets and Gauss–Legendre grids.
//!
//! `Y_{l,m}` are L²-orthonormal with the Condon–Shortley phase. Coefficients are
//! packed with index `l² + l + m`.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::spin::UnitVector3;

/// Normalized associated Legendre values `P̄_l^m(x)` for `0 ≤ m ≤ l ≤ lmax`,
/// indexed `l(l+1)/2 + m`, such that `Y_{l,m} = P̄_l^m(cos θ) e^{imφ}`.
pub fn legendre_table(lmax: usize, x: f64) -> Vec<f64> {
    let len = (lmax + 1) * (lmax + 2) / 2;
    let mut p = vec![0.0; len];
    let idx = |l: usize, m: usize| l * (l + 1) / 2 + m;
    let sin = (1.0 - x * x).max(0.0).sqrt();
    let mut pmm = 1.0 / (4.0 * PI).sqrt();
    for m in 0..=lmax {
        if m > 0 {
            pmm *= -((2 * m + 1) as f64 / (2 * m) as f64).sqrt() * sin;
        }
        p[idx(m, m)] = pmm;
        if m < lmax {
            p[idx(m + 1, m)] = ((2 * m + 3) as f64).sqrt() * x * pmm;
        }
        for l in m + 2..=lmax {
            let (lf, mf) = (l as f64, m as f64);
            let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
            let b = (((lf - 1.0).powi(2) - mf * mf) / (4.0 * (lf - 1.0).powi(2) - 1.0)).sqrt();
            p[idx(l, m)] = a * (x * p[idx(l - 1, m)] - b * p[idx(l - 2, m)]);
        }
    }
    p
}

/// Orthonormal complex spherical harmonic `Y_{l,m}(θ, φ)`.
pub fn harmonic(l: usize, m: i64, colat: f64, lon: f64) -> Result<Complex64> {
    let p = m.unsigned_abs() as usize;
    if p > l || !(0.0..=PI).contains(&colat) {
        return Err(Error::IndexOutOfRange { l: l as i64, m });
    }
    let table = legendre_table(l, colat.cos());
    let val = table[l * (l + 1) / 2 + p];
    let phase = Complex64::from_polar(1.0, p as f64 * lon);
    let y = phase * val;
    Ok(if m < 0 {
        let s = if p % 2 == 1 { -1.0 } else { 1.0 };
        y.conj() * s
    } else {
        y
    })
}

/// Complex coefficients `a_{l,m}` of a band-limited function.
#[derive(Debug, Clone, PartialEq)]
pub struct HarmonicCoefficients {
    lmax: usize,
    data: Vec<Complex64>,
}

impl HarmonicCoefficients {
    pub fn zeros(lmax: usize) -> Self {
        HarmonicCoefficients { lmax, data: vec![Complex64::new(0.0, 0.0); (lmax + 1) * (lmax + 1)] }
    }

    /// Wraps packed data of length `(lmax+1)²`.
    pub fn from_packed(lmax: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != (lmax + 1) * (lmax + 1) {
            return Err(Error::Format(format!(
                "expected {} coefficients for lmax={lmax}, found {}",
                (lmax + 1) * (lmax + 1),
                data.len()
            )));
        }
        Ok(HarmonicCoefficients { lmax, data })
    }

    /// Single nonzero coefficient.
    pub fn single(lmax: usize, l: usize, m: i64, value: Complex64) -> Result<Self> {
        let mut c = Self::zeros(lmax);
        c.set(l, m, value)?;
        Ok(c)
    }

    /// Real band-limited function with independent standard normal coefficients.
    pub fn random_real<R: Rng + ?Sized>(lmax: usize, rng: &mut R) -> Self {
        let mut c = Self::zeros(lmax);
        for l in 0..=lmax {
            c.data[Self::index(l, 0)] = Complex64::new(StandardNormal.sample(rng), 0.0);
            for m in 1..=l as i64 {
                let z = Complex64::new(StandardNormal.sample(rng), StandardNormal.sample(rng));
                c.data[Self::index(l, m)] = z;
                let s = if m % 2 == 1 { -1.0 } else { 1.0 };
                c.data[Self::index(l, -m)] = z.conj() * s;
            }
        }
        c
    }

    /// Independent complex standard normal coefficients.
    pub fn random_complex<R: Rng + ?Sized>(lmax: usize, rng: &mut R) -> Self {
        let mut c = Self::zeros(lmax);
        for z in c.data.iter_mut() {
            *z = Complex64::new(StandardNormal.sample(rng), StandardNormal.sample(rng));
        }
        c
    }

    pub fn index(l: usize, m: i64) -> usize {
        ((l * l + l) as i64 + m) as usize
    }

    pub fn lmax(&self) -> usize {
        self.lmax
    }

    pub fn packed(&self) -> &[Complex64] {
        &self.data
    }

    fn check(&self, l: usize, m: i64) -> Result<()> {
        if l > self.lmax || m.unsigned_abs() as usize > l {
            return Err(Error::IndexOutOfRange { l: l as i64, m });
        }
        Ok(())
    }

    pub fn get(&self, l: usize, m: i64) -> Result<Complex64> {
        self.check(l, m)?;
        Ok(self.data[Self::index(l, m)])
    }

    pub fn set(&mut self, l: usize, m: i64, value: Complex64) -> Result<()> {
        self.check(l, m)?;
        self.data[Self::index(l, m)] = value;
        Ok(())
    }

    /// Iterates `(l, m, a_{l,m})` in packed order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, i64, Complex64)> + '_ {
        (0..=self.lmax).flat_map(move |l| (-(l as i64)..=l as i64).map(move |m| (l, m, self.data[Self::index(l, m)])))
    }

    /// Copy truncated or zero-padded to `lmax`.
    pub fn with_lmax(&self, lmax: usize) -> Self {
        let mut out = Self::zeros(lmax);
        let keep = (lmax.min(self.lmax) + 1).pow(2);
        out.data[..keep].copy_from_slice(&self.data[..keep]);
        out
    }

    /// Largest violation of `a_{l,−m} = (−1)^m conj(a_{l,m})`.
    pub fn reality_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (l, m, a) in self.iter() {
            let s = if m.rem_euclid(2) == 1 { -1.0 } else { 1.0 };
            let partner = self.data[Self::index(l, -m)];
            worst = worst.max((partner - a.conj() * s).norm());
        }
        worst
    }

    pub fn is_real(&self, tol: f64) -> bool {
        self.reality_defect() <= tol
    }

    /// ℓ² norm, equal to the L² norm of the represented function.
    pub fn norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn scale(&self, s: Complex64) -> Self {
        HarmonicCoefficients { lmax: self.lmax, data: self.data.iter().map(|z| z * s).collect() }
    }

    /// `self − other` after padding both to the larger `lmax`.
    pub fn sub(&self, other: &Self) -> Self {
        let lmax = self.lmax.max(other.lmax);
        let a = self.with_lmax(lmax);
        let b = other.with_lmax(lmax);
        HarmonicCoefficients { lmax, data: a.data.iter().zip(&b.data).map(|(x, y)| x - y).collect() }
    }

    pub fn add(&self, other: &Self) -> Self {
        self.sub(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    /// Multiplies each `a_{l,m}` by `f(l)`.
    pub fn map_degree<F: Fn(usize) -> f64>(&self, f: F) -> Self {
        let mut out = self.clone();
        for l in 0..=self.lmax {
            let s = f(l);
            for m in -(l as i64)..=l as i64 {
                out.data[Self::index(l, m)] *= s;
            }
        }
        out
    }

    /// Value of the represented function at a point.
    pub fn evaluate(&self, p: UnitVector3) -> Complex64 {
        let table = legendre_table(self.lmax, p.z.clamp(-1.0, 1.0));
        let lon = p.longitude();
        let mut acc = Complex64::new(0.0, 0.0);
        for l in 0..=self.lmax {
            for m in -(l as i64)..=l as i64 {
                let mp = m.unsigned_abs() as usize;
                let mut y = Complex64::from_polar(table[l * (l + 1) / 2 + mp], m as f64 * lon);
                if m < 0 && mp % 2 == 1 {
                    y = -y;
                }
                acc += self.data[Self::index(l, m)] * y;
            }
        }
        acc
    }

    /// Components of the angular momentum operator `(L_x, L_y, L_z)` applied
    /// to the represented function, `L = −i r × ∇`.
    pub fn angular_momentum(&self) -> [Self; 3] {
        let mut plus = Self::zeros(self.lmax);
        let mut minus = Self::zeros(self.lmax);
        let mut lz = Self::zeros(self.lmax);
        for (l, m, a) in self.iter() {
            let lf = l as f64;
            let mf = m as f64;
            lz.data[Self::index(l, m)] = a * mf;
            if m < l as i64 {
                plus.data[Self::index(l, m + 1)] += a * (lf * (lf + 1.0) - mf * (mf + 1.0)).sqrt();
            }
            if m > -(l as i64) {
                minus.data[Self::index(l, m - 1)] += a * (lf * (lf + 1.0) - mf * (mf - 1.0)).sqrt();
            }
        }
        let half = Complex64::new(0.5, 0.0);
        let lx = plus.add(&minus).scale(half);
        let ly = plus.sub(&minus).scale(Complex64::new(0.0, -0.5));
        [lx, ly, lz]
    }
}

/// Gauss–Legendre nodes (ascending in `x = cos θ`) and weights on `[−1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 0 {
                1.0
            } else if n == 1 {
                z
            } else {
                p1
            };
            let pnm1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (z * pn - pnm1) / (z * z - 1.0);
            let dz = pn / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let wt = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = wt;
        w[n - 1 - i] = wt;
    }
    (x, w)
}

/// Samples on a Gauss–Legendre × uniform-longitude grid, row-major by ring.
#[derive(Debug, Clone, PartialEq)]
pub struct GridField {
    nlat: usize,
    nlon: usize,
    colatitudes: Vec<f64>,
    weights: Vec<f64>,
    values: Vec<Complex64>,
}

impl GridField {
    /// Zero field. Rings are ordered from north to south.
    pub fn zeros(nlat: usize, nlon: usize) -> Result<Self> {
        if nlat == 0 || nlon == 0 {
            return Err(Error::InsufficientResolution { nlat, nlon, lmax: 0 });
        }
        let (x, w) = gauss_legendre(nlat);
        // x ascends, so reversing puts the northernmost ring first.
        let colatitudes = x.iter().rev().map(|v| v.clamp(-1.0, 1.0).acos()).collect();
        let weights = w.into_iter().rev().collect();
        Ok(GridField { nlat, nlon, colatitudes, weights, values: vec![Complex64::new(0.0, 0.0); nlat * nlon] })
    }

    /// Smallest grid that integrates degree-`lmax` products exactly.
    pub fn for_lmax(lmax: usize) -> Self {
        Self::zeros(lmax + 1, 2 * lmax + 2).expect("positive sizes")
    }

    pub fn from_fn<F>(nlat: usize, nlon: usize, f: F) -> Result<Self>
    where
        F: Fn(UnitVector3) -> Complex64 + Sync,
    {
        let mut g = Self::zeros(nlat, nlon)?;
        let pts: Vec<UnitVector3> = (0..nlat * nlon).map(|k| g.point(k / nlon, k % nlon)).collect();
        g.values = pts.par_iter().map(|&p| f(p)).collect();
        Ok(g)
    }

    /// Same grid with new values.
    pub fn with_values(&self, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != self.values.len() {
            return Err(Error::Format(format!("expected {} grid values, found {}", self.values.len(), values.len())));
        }
        Ok(GridField { values, ..self.clone() })
    }

    pub fn map<F: Fn(UnitVector3, Complex64) -> Complex64>(&self, f: F) -> Self {
        let values =
            (0..self.values.len()).map(|k| f(self.point(k / self.nlon, k % self.nlon), self.values[k])).collect();
        GridField { values, ..self.clone() }
    }

    pub fn nlat(&self) -> usize {
        self.nlat
    }

    pub fn nlon(&self) -> usize {
        self.nlon
    }

    pub fn colatitudes(&self) -> &[f64] {
        &self.colatitudes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn longitude(&self, j: usize) -> f64 {
        2.0 * PI * j as f64 / self.nlon as f64
    }

    pub fn longitudes(&self) -> Vec<f64> {
        (0..self.nlon).map(|j| self.longitude(j)).collect()
    }

    pub fn point(&self, i: usize, j: usize) -> UnitVector3 {
        UnitVector3::from_spherical(self.colatitudes[i], self.longitude(j))
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn value(&self, i: usize, j: usize) -> Complex64 {
        self.values[i * self.nlon + j]
    }

    /// Largest degree this grid resolves exactly.
    pub fn max_lmax(&self) -> usize {
        (self.nlat - 1).min((self.nlon - 1) / 2)
    }

    pub fn supports(&self, lmax: usize) -> bool {
        self.nlat > lmax && self.nlon > 2 * lmax
    }

    pub fn same_grid(&self, other: &Self) -> bool {
        self.nlat == other.nlat && self.nlon == other.nlon
    }

    /// Quadrature of `∫ |f|² dA`, square-rooted.
    pub fn l2_norm(&self) -> f64 {
        let dphi = 2.0 * PI / self.nlon as f64;
        let mut s = 0.0;
        for i in 0..self.nlat {
            let ring: f64 = self.values[i * self.nlon..(i + 1) * self.nlon].iter().map(|z| z.norm_sqr()).sum();
            s += self.weights[i] * ring * dphi;
        }
        s.sqrt()
    }

    pub fn zip_with<F: Fn(Complex64, Complex64) -> Complex64>(&self, other: &Self, f: F) -> Result<Self> {
        if !self.same_grid(other) {
            return Err(Error::SizeMismatch { expected: self.nlat, rows: other.nlat, cols: other.nlon });
        }
        let values = self.values.iter().zip(&other.values).map(|(a, b)| f(*a, *b)).collect();
        Ok(GridField { values, ..self.clone() })
    }
}

/// Forward transform by Gauss–Legendre quadrature; exact for band-limited input.
pub fn analyze(field: &GridField, lmax: usize) -> Result<HarmonicCoefficients> {
    if !field.supports(lmax) {
        return Err(Error::InsufficientResolution { nlat: field.nlat, nlon: field.nlon, lmax });
    }
    let nlon = field.nlon;
    let dphi = 2.0 * PI / nlon as f64;
    let partials: Vec<Vec<Complex64>> = (0..field.nlat)
        .into_par_iter()
        .map(|i| {
            let ring = &field.values[i * nlon..(i + 1) * nlon];
            let table = legendre_table(lmax, field.colatitudes[i].cos());
            let mut acc = vec![Complex64::new(0.0, 0.0); (lmax + 1) * (lmax + 1)];
            for m in -(lmax as i64)..=lmax as i64 {
                let fm: Complex64 = ring
                    .iter()
                    .enumerate()
                    .map(|(j, v)| v * Complex64::from_polar(1.0, -(m as f64) * field.longitude(j)))
                    .sum::<Complex64>()
                    * (dphi * field.weights[i]);
                let mp = m.unsigned_abs() as usize;
                let sign = if m < 0 && mp % 2 == 1 { -1.0 } else { 1.0 };
                for l in mp..=lmax {
                    acc[HarmonicCoefficients::index(l, m)] += fm * (sign * table[l * (l + 1) / 2 + mp]);
                }
            }
            acc
        })
        .collect();
    let mut data = vec![Complex64::new(0.0, 0.0); (lmax + 1) * (lmax + 1)];
    for p in partials {
        for (d, v) in data.iter_mut().zip(p) {
            *d += v;
        }
    }
    HarmonicCoefficients::from_packed(lmax, data)
}

/// Inverse transform onto an `nlat × nlon` grid.
pub fn synthesize(coeffs: &HarmonicCoefficients, nlat: usize, nlon: usize) -> Result<GridField> {
    let mut g = GridField::zeros(nlat, nlon)?;
    let lmax = coeffs.lmax;
    let lons = g.longitudes();
    let rings: Vec<Vec<Complex64>> = g
        .colatitudes
        .par_iter()
        .map(|&th| {
            let table = legendre_table(lmax, th.cos());
            let mut fm = Vec::with_capacity(2 * lmax + 1);
            for m in -(lmax as i64)..=lmax as i64 {
                let mp = m.unsigned_abs() as usize;
                let sign = if m < 0 && mp % 2 == 1 { -1.0 } else { 1.0 };
                let s: Complex64 = (mp..=lmax)
                    .map(|l| coeffs.data[HarmonicCoefficients::index(l, m)] * (sign * table[l * (l + 1) / 2 + mp]))
                    .sum();
                fm.push((m, s));
            }
            lons.iter()
                .map(|&phi| fm.iter().map(|&(m, s)| s * Complex64::from_polar(1.0, m as f64 * phi)).sum())
                .collect()
        })
        .collect();
    g.values = rings.into_iter().flatten().collect();
    Ok(g)
}

/// Synthesizes onto an existing grid layout.
pub fn synthesize_like(coeffs: &HarmonicCoefficients, like: &GridField) -> Result<GridField> {
    synthesize(coeffs, like.nlat, like.nlon)
}
