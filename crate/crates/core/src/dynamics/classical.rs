//! Pseudo-spectral reference solver for the classical vorticity equation
//! `ω̇ = {ψ, ω}` with `ψ = Δ⁻¹ω` (Euler) or `ψ = (1−Δ)⁻¹Δ⁻¹ω` (EPDiff).

use crate::error::{Error, Result};
use crate::harmonics::{analyze, GridField, HarmonicCoefficients};
use crate::laplacian::Model;

use super::bracket::bracket_of_coefficients;

/// Classical stream function of a vorticity, dropping the mean.
pub fn stream_function(omega: &HarmonicCoefficients, model: Model) -> HarmonicCoefficients {
    omega.map_degree(|l| {
        if l == 0 {
            return 0.0;
        }
        let ll = (l * (l + 1)) as f64;
        match model {
            Model::Euler => -1.0 / ll,
            Model::Epdiff => -1.0 / (ll * (1.0 + ll)),
        }
    })
}

/// Galerkin truncation at `lmax` with an exactly dealiased product grid.
#[derive(Debug, Clone)]
pub struct ClassicalVorticitySolver {
    lmax: usize,
    model: Model,
    grid: GridField,
}

impl ClassicalVorticitySolver {
    pub fn new(lmax: usize, model: Model) -> Result<Self> {
        if lmax == 0 {
            return Err(Error::InvalidArgument("reference solver needs lmax ≥ 1".into()));
        }
        let grid = GridField::zeros(2 * lmax, 4 * lmax)?;
        Ok(ClassicalVorticitySolver { lmax, model, grid })
    }

    pub fn lmax(&self) -> usize {
        self.lmax
    }

    pub fn rhs(&self, omega: &HarmonicCoefficients) -> Result<HarmonicCoefficients> {
        let omega = omega.with_lmax(self.lmax);
        let psi = stream_function(&omega, self.model);
        let b = bracket_of_coefficients(&psi, &omega, &self.grid)?;
        analyze(&b, self.lmax)
    }

    /// RK4 to `t_final` with steps no larger than `h`.
    pub fn evolve(&self, omega0: &HarmonicCoefficients, t_final: f64, h: f64) -> Result<HarmonicCoefficients> {
        if !(h > 0.0) || !(t_final >= 0.0) {
            return Err(Error::InvalidArgument(format!("invalid time stepping t={t_final} h={h}")));
        }
        let steps = (t_final / h).ceil() as usize;
        let dt = if steps == 0 { 0.0 } else { t_final / steps as f64 };
        let half = num_complex::Complex64::new(dt / 2.0, 0.0);
        let full = num_complex::Complex64::new(dt, 0.0);
        let mut w = omega0.with_lmax(self.lmax);
        for _ in 0..steps {
            let k1 = self.rhs(&w)?;
            let k2 = self.rhs(&w.add(&k1.scale(half)))?;
            let k3 = self.rhs(&w.add(&k2.scale(half)))?;
            let k4 = self.rhs(&w.add(&k3.scale(full)))?;
            let incr = k1.add(&k2.scale(2.0.into())).add(&k3.scale(2.0.into())).add(&k4);
            w = w.add(&incr.scale(num_complex::Complex64::new(dt / 6.0, 0.0)));
        }
        Ok(w)
    }
}
