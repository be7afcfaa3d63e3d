//! Transport of a blob by its own point values: the quantized vector field is
//! evaluated at the blob, giving a velocity `a`, and the blob is conjugated by
//! `exp(h Σ a_k X_k)`.
//!
//! A stream matrix splits as `P = A + iG'` with `A = (P − P†)/2` (Hamiltonian
//! part) and `G = −i(P + P†)/2` (gradient part), both skew-Hermitian.
//! For a blob with moment `c_i = Re Tr(N X_i B)`, `p = c/|c|`, the components
//!
//! ```text
//! V_k = −(N/|c|) N[X_k, G] + (N/|c|²) Σ ε_{kij} c_i N[X_j, A]
//! ```
//!
//! give `a_k = Re Tr(V_k B) = N (p × v)_k`, where `v` is the classical field
//! at the blob. Conjugation by `exp(h Σ a_k X_k)` rotates by `h|v|` about
//! `p × v`, so the blob moves along `v`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{c, check_square, commutator, frobenius, inner, matrix_exponential, CMatrix, I};
use crate::quantization::blob_center;
use crate::spin::{SpinBasis, UnitVector3};

/// The three components `V_k` of the quantized field of `P` seen from blob `B`.
pub fn quantized_vector_field(basis: &SpinBasis, p: &CMatrix, b: &CMatrix) -> Result<[CMatrix; 3]> {
    let n = basis.n();
    check_square(p, n)?;
    check_square(b, n)?;
    let nf = n as f64;
    let ham = (p - p.adjoint()) * c(0.5);
    let grad = (p + p.adjoint()) * (-I * 0.5);

    let moment: Vec<f64> = (0..3).map(|i| (basis.x(i) * b).trace().re * nf).collect();
    let len = moment.iter().map(|v| v * v).sum::<f64>().sqrt();
    if len < 1e-12 {
        return Err(Error::Degenerate("blob has no moment; cannot locate it".into()));
    }

    let dg: Vec<CMatrix> = (0..3).map(|k| commutator(basis.x(k), &grad) * c(nf)).collect();
    let da: Vec<CMatrix> = (0..3).map(|k| commutator(basis.x(k), &ham) * c(nf)).collect();
    let gscale = c(-nf / len);
    let hscale = nf / (len * len);
    let component = |k: usize| {
        let (i, j) = ((k + 1) % 3, (k + 2) % 3);
        // ε_{kij} c_i A_j − ε_{kji} c_j A_i for the cyclic pair (i, j).
        &dg[k] * gscale + (&da[j] * c(moment[i]) - &da[i] * c(moment[j])) * c(hscale)
    };
    Ok([component(0), component(1), component(2)])
}

/// `a_k = Re Tr(V_k B)`; fails if an imaginary part is not negligible.
pub fn blob_components(v: &[CMatrix; 3], b: &CMatrix) -> Result<[f64; 3]> {
    let mut a = [0.0; 3];
    for (k, vk) in v.iter().enumerate() {
        check_square(b, vk.nrows())?;
        let t: Complex64 = inner(&vk.adjoint(), b);
        if t.im.abs() > 1e-8 * frobenius(vk) * frobenius(b) {
            return Err(Error::Degenerate(format!("component {k} has imaginary part {:e}", t.im)));
        }
        a[k] = t.re;
    }
    Ok(a)
}

/// `B ↦ E B E⁻¹` with `E = exp(h Σ a_k X_k)` (unitary).
pub fn blob_step(basis: &SpinBasis, b: &CMatrix, a: [f64; 3], h: f64) -> Result<CMatrix> {
    check_square(b, basis.n())?;
    let e = matrix_exponential(&(basis.combination(a) * c(h)))?;
    Ok(&e * b * e.adjoint())
}

/// Blob states and the components used for each step.
#[derive(Debug, Clone)]
pub struct BlobTrajectory {
    pub h: f64,
    pub steps: Vec<CMatrix>,
    pub a_history: Vec<[f64; 3]>,
}

impl BlobTrajectory {
    pub fn last(&self) -> &CMatrix {
        self.steps.last().expect("trajectory holds the initial blob")
    }

    pub fn centers(&self, basis: &SpinBasis) -> Result<Vec<UnitVector3>> {
        self.steps.iter().map(|b| blob_center(basis, b)).collect()
    }

    /// Largest entry magnitude of every state.
    pub fn max_entries(&self) -> Vec<f64> {
        self.steps.iter().map(crate::linalg::max_abs_entry).collect()
    }
}

/// Iterates field evaluation, component extraction and conjugation `n_steps` times.
pub fn transport_blob(basis: &SpinBasis, p: &CMatrix, b0: &CMatrix, n_steps: usize, h: f64) -> Result<BlobTrajectory> {
    if n_steps == 0 {
        return Err(Error::InvalidArgument("need at least one step".into()));
    }
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::InvalidArgument(format!("step size must be positive, got {h}")));
    }
    let mut steps = Vec::with_capacity(n_steps + 1);
    let mut a_history = Vec::with_capacity(n_steps);
    steps.push(b0.clone());
    for _ in 0..n_steps {
        let b = steps.last().expect("nonempty");
        let v = quantized_vector_field(basis, p, b)?;
        let a = blob_components(&v, b)?;
        let next = blob_step(basis, b, a, h)?;
        a_history.push(a);
        steps.push(next);
    }
    Ok(BlobTrajectory { h, steps, a_history })
}
