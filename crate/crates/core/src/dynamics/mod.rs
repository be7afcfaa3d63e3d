//! Quantized vorticity evolution, quantized flows and their action on densities.

pub mod bracket;
pub mod classical;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::laplacian::{solve_stream, LaplacianEigenbasis, Model};
use crate::linalg::{
    c, check_square, commutator, frobenius, general_spectrum, identity, matrix_exponential, skew_hermitian_spectrum,
    skew_residual, CMatrix,
};

pub use bracket::{classical_bracket, complex_bracket};

const FIXED_POINT_TOL: f64 = 1e-12;
const FIXED_POINT_MAX_ITER: usize = 100;

/// Time integrator for the vorticity equation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Integrator {
    /// Isospectral midpoint rule.
    IsospectralMidpoint,
    /// Classical fourth-order Runge–Kutta (not structure preserving).
    Rk4,
}

impl std::str::FromStr for Integrator {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "isomp" => Ok(Integrator::IsospectralMidpoint),
            "rk4" => Ok(Integrator::Rk4),
            other => Err(Error::InvalidArgument(format!("unknown integrator '{other}'"))),
        }
    }
}

impl std::fmt::Display for Integrator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Integrator::IsospectralMidpoint => "isomp",
            Integrator::Rk4 => "rk4",
        })
    }
}

/// Quantized vorticity `W` at a time.
#[derive(Debug, Clone, PartialEq)]
pub struct VorticityState {
    pub w: CMatrix,
    pub model: Model,
    pub time: f64,
}

impl VorticityState {
    /// Rejects non-square or traceful `W`.
    pub fn new(w: CMatrix, model: Model) -> Result<Self> {
        let n = w.nrows();
        check_square(&w, n)?;
        let tr = w.trace().norm();
        if tr > 1e-12 * frobenius(&w).max(1.0) {
            return Err(Error::InvalidArgument(format!("vorticity has trace {tr:e}")));
        }
        Ok(VorticityState { w, model, time: 0.0 })
    }

    pub fn n(&self) -> usize {
        self.w.nrows()
    }
}

/// `[P, W]` with `P = solve_stream(W)`.
pub fn vorticity_rhs(eig: &LaplacianEigenbasis, state: &VorticityState) -> Result<CMatrix> {
    let p = solve_stream(eig, &state.w, state.model)?;
    Ok(commutator(&p, &state.w))
}

fn rhs_of(eig: &LaplacianEigenbasis, w: &CMatrix, model: Model) -> Result<CMatrix> {
    let p = solve_stream(eig, w, model)?;
    Ok(commutator(&p, w))
}

/// One isospectral midpoint step.
///
/// Solves `W̃ = W + (h/2)[P̃, W̃] + (h²/4) P̃ W̃ P̃` by fixed-point iteration and
/// sets `W' = W̃ + (h/2)[P̃, W̃] − (h²/4) P̃ W̃ P̃`. Then
/// `W' = A B⁻¹ W (A B⁻¹)⁻¹` with `A = I + (h/2)P̃`, `B = I − (h/2)P̃`.
pub fn step_isospectral_midpoint(eig: &LaplacianEigenbasis, state: &VorticityState, h: f64) -> Result<VorticityState> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::InvalidArgument(format!("step size must be positive, got {h}")));
    }
    let w0 = &state.w;
    let scale = frobenius(w0).max(f64::MIN_POSITIVE);
    let half = c(h / 2.0);
    let quarter = c(h * h / 4.0);
    let mut wt = w0.clone();
    let mut p = solve_stream(eig, &wt, state.model)?;
    let mut residual = f64::INFINITY;
    let mut converged = false;
    for _ in 0..FIXED_POINT_MAX_ITER {
        let next = w0 + commutator(&p, &wt) * half + &p * &wt * &p * quarter;
        residual = frobenius(&(&next - &wt)) / scale;
        wt = next;
        p = solve_stream(eig, &wt, state.model)?;
        if !residual.is_finite() {
            break;
        }
        if residual <= FIXED_POINT_TOL {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NoConvergence { iterations: FIXED_POINT_MAX_ITER, residual });
    }
    let w1 = &wt + commutator(&p, &wt) * half - &p * &wt * &p * quarter;
    Ok(VorticityState { w: w1, model: state.model, time: state.time + h })
}

/// One classical RK4 step.
pub fn step_rk4(eig: &LaplacianEigenbasis, state: &VorticityState, h: f64) -> Result<VorticityState> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::InvalidArgument(format!("step size must be positive, got {h}")));
    }
    let w = &state.w;
    let m = state.model;
    let k1 = rhs_of(eig, w, m)?;
    let k2 = rhs_of(eig, &(w + &k1 * c(h / 2.0)), m)?;
    let k3 = rhs_of(eig, &(w + &k2 * c(h / 2.0)), m)?;
    let k4 = rhs_of(eig, &(w + &k3 * c(h)), m)?;
    let w1 = w + (k1 + k2 * c(2.0) + k3 * c(2.0) + k4) * c(h / 6.0);
    Ok(VorticityState { w: w1, model: m, time: state.time + h })
}

pub fn step(
    eig: &LaplacianEigenbasis,
    state: &VorticityState,
    h: f64,
    integrator: Integrator,
) -> Result<VorticityState> {
    match integrator {
        Integrator::IsospectralMidpoint => step_isospectral_midpoint(eig, state, h),
        Integrator::Rk4 => step_rk4(eig, state, h),
    }
}

/// Spectrum of `W`, using the Hermitian solver when `W` is skew-Hermitian.
pub fn spectrum(w: &CMatrix) -> Vec<Complex64> {
    if skew_residual(w) <= 1e-12 * frobenius(w).max(1.0) {
        skew_hermitian_spectrum(w).into_iter().map(|v| Complex64::new(0.0, v)).collect()
    } else {
        general_spectrum(w)
    }
}

/// Largest distance between two spectra under greedy nearest matching.
pub fn spectral_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    let mut used = vec![false; b.len()];
    let mut worst: f64 = 0.0;
    for x in a {
        let mut best = (f64::INFINITY, usize::MAX);
        for (j, y) in b.iter().enumerate() {
            if !used[j] {
                let d = (x - y).norm();
                if d < best.0 {
                    best = (d, j);
                }
            }
        }
        if best.1 == usize::MAX {
            return f64::INFINITY;
        }
        used[best.1] = true;
        worst = worst.max(best.0);
    }
    worst
}

/// Conservation diagnostics of one trajectory sample.
#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostics {
    pub step: usize,
    pub time: f64,
    pub trace: Complex64,
    pub trace_w2: Complex64,
    /// `|Tr W² − Tr W₀²|`.
    pub trace_w2_drift: f64,
    /// Matched eigenvalue distance to the initial spectrum.
    pub spectral_drift: f64,
}

/// States at `t = 0, h, 2h, …, t_final` with per-state diagnostics.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub states: Vec<VorticityState>,
    pub diagnostics: Vec<Diagnostics>,
}

impl Trajectory {
    pub fn last(&self) -> &VorticityState {
        self.states.last().expect("trajectory holds the initial state")
    }

    pub fn max_spectral_drift(&self) -> f64 {
        self.diagnostics.iter().map(|d| d.spectral_drift).fold(0.0, f64::max)
    }

    pub fn max_trace_w2_drift(&self) -> f64 {
        self.diagnostics.iter().map(|d| d.trace_w2_drift).fold(0.0, f64::max)
    }
}

fn diagnose(step: usize, w: &CMatrix, time: f64, tw2_0: Complex64, spec0: &[Complex64]) -> Diagnostics {
    let tw2 = (w * w).trace();
    Diagnostics {
        step,
        time,
        trace: w.trace(),
        trace_w2: tw2,
        trace_w2_drift: (tw2 - tw2_0).norm(),
        spectral_drift: spectral_distance(&spectrum(w), spec0),
    }
}

/// Integrates to `t_final` with step `h`; the last step is shortened if
/// `t_final` is not a multiple of `h`.
pub fn evolve_vorticity(
    eig: &LaplacianEigenbasis,
    state: &VorticityState,
    t_final: f64,
    h: f64,
    integrator: Integrator,
) -> Result<Trajectory> {
    if !(t_final >= 0.0) || !t_final.is_finite() {
        return Err(Error::InvalidArgument(format!("t_final must be non-negative, got {t_final}")));
    }
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::InvalidArgument(format!("step size must be positive, got {h}")));
    }
    let steps = if t_final == 0.0 { 0 } else { (t_final / h - 1e-9).ceil().max(1.0) as usize };
    let tw2_0 = (&state.w * &state.w).trace();
    let spec0 = spectrum(&state.w);
    let mut states = vec![state.clone()];
    let mut diagnostics = vec![diagnose(0, &state.w, state.time, tw2_0, &spec0)];
    for k in 1..=steps {
        let prev = states.last().expect("nonempty");
        let dt = if k == steps { t_final - (k - 1) as f64 * h } else { h };
        let mut next = step(eig, prev, dt, integrator)?;
        next.time = state.time + if k == steps { t_final } else { k as f64 * h };
        diagnostics.push(diagnose(k, &next.w, next.time, tw2_0, &spec0));
        states.push(next);
    }
    Ok(Trajectory { states, diagnostics })
}

/// Quantized diffeomorphism `F`.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowMatrix {
    pub f: CMatrix,
}

impl FlowMatrix {
    pub fn identity(n: usize) -> Self {
        FlowMatrix { f: identity(n) }
    }

    pub fn determinant(&self) -> Complex64 {
        self.f.determinant()
    }

    pub fn compose(&self, other: &FlowMatrix) -> FlowMatrix {
        FlowMatrix { f: &self.f * &other.f }
    }
}

/// `F(t) = exp(P t)` solving `Ḟ = P F`, `F(0) = I`.
pub fn flow_of_stream(p: &CMatrix, t: f64) -> Result<FlowMatrix> {
    check_square(p, p.nrows())?;
    let tr = p.trace().norm();
    if tr > 1e-12 * frobenius(p).max(1.0) {
        return Err(Error::InvalidArgument(format!("stream matrix has trace {tr:e}")));
    }
    Ok(FlowMatrix { f: matrix_exponential(&(p * c(t)))? })
}

/// `F.B = F B F†`.
pub fn act_density(flow: &FlowMatrix, b: &CMatrix) -> Result<CMatrix> {
    check_square(b, flow.f.nrows())?;
    Ok(&flow.f * b * flow.f.adjoint())
}
