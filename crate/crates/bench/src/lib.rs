//! Shared fixtures for the benchmarks.

use qdiff_core::{CMatrix, GridField, HarmonicCoefficients, LaplacianEigenbasis};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Seeded real vorticity of low degree, quantized at the basis size.
pub fn sample_vorticity(eig: &LaplacianEigenbasis, seed: u64) -> CMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let lmax = 6.min(eig.n() - 1);
    let w = HarmonicCoefficients::random_real(lmax, &mut rng);
    qdiff_core::quantization::quantize_vorticity(&w, eig)
}

/// Seeded real field of degree `lmax` sampled on the grid for `2 lmax`.
pub fn sample_field(lmax: usize, seed: u64) -> GridField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = HarmonicCoefficients::random_real(lmax, &mut rng);
    let grid = GridField::for_lmax(2 * lmax);
    qdiff_core::harmonics::synthesize_like(&a, &grid).expect("grid resolves the field")
}
