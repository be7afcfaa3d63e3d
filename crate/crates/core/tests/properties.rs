use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64;
use proptest::prelude::*;
use qdiff_core::blob::transport_blob;
use qdiff_core::dynamics::{act_density, flow_of_stream};
use qdiff_core::laplacian::Model;
use qdiff_core::linalg::{c, commutator, frobenius, hermitian_eigenvalues, skew_hermitian_spectrum, trace_free};
use qdiff_core::quantization::blob_at;
use qdiff_core::reference::{exact_flow, example_field, example_generator, icosasphere, transport_mesh};
use qdiff_core::{
    apply_laplacian, build_eigenbasis, build_spin_basis, dequantize, dequantize_function, quantize, quantize_function,
    quantize_generator, rotation_operator, solve_stream, CMatrix, HarmonicCoefficients, LaplacianEigenbasis, SpinBasis,
    UnitVector3,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig { cases, ..ProptestConfig::default() }
}

fn random_matrix(n: usize, seed: u64) -> CMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    CMatrix::from_fn(n, n, |_, _| Complex64::new(StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng)))
}

fn cached(n: usize) -> &'static (SpinBasis, LaplacianEigenbasis) {
    static CACHE: OnceLock<Vec<(SpinBasis, LaplacianEigenbasis)>> = OnceLock::new();
    let all = CACHE.get_or_init(|| {
        (0..=24)
            .map(|k| {
                let b = build_spin_basis(k.max(2)).unwrap();
                let e = build_eigenbasis(&b).unwrap();
                (b, e)
            })
            .collect()
    });
    &all[n]
}

fn unit(colat: f64, lon: f64) -> UnitVector3 {
    UnitVector3::from_spherical(colat, lon)
}

/// Rotation of `p` by `angle` about `axis` (Rodrigues).
fn rotate(axis: UnitVector3, angle: f64, p: UnitVector3) -> UnitVector3 {
    let (k, v) = (axis.to_array(), p.to_array());
    let kv = qdiff_core::spin::cross(k, v);
    let kd = axis.dot(p);
    let (s, co) = angle.sin_cos();
    let r: Vec<f64> = (0..3).map(|i| v[i] * co + kv[i] * s + k[i] * kd * (1.0 - co)).collect();
    UnitVector3::new(r[0], r[1], r[2]).unwrap()
}

fn laplacian_of(n: usize, m: &CMatrix) -> CMatrix {
    apply_laplacian(&cached(n).0, m).unwrap()
}

proptest! {
    #![proptest_config(config(24))]

    #[test]
    fn commutation_relations(n in 2usize..=64) {
        let b = build_spin_basis(n).unwrap();
        for k in 0..3 {
            let (i, j) = (k, (k + 1) % 3);
            let l = (k + 2) % 3;
            let r = commutator(b.x(i), b.x(j)) - b.x(l) * c(1.0 / n as f64);
            prop_assert!(frobenius(&r) <= 1e-13 * n as f64);
        }
    }

    #[test]
    fn rotations_form_a_group(
        n in 2usize..=24, colat in 0.0..PI, lon in -PI..PI, a in -PI..PI, bb in -PI..PI, seed in any::<u64>()
    ) {
        let basis = &cached(n).0;
        let u = unit(colat, lon);
        let whole = rotation_operator(basis, u, a + bb);
        let parts = rotation_operator(basis, u, a) * rotation_operator(basis, u, bb);
        prop_assert!(frobenius(&(whole - parts)) <= 1e-11);

        let m = random_matrix(n, seed);
        let r = rotation_operator(basis, u, a);
        let conj = &r * &m * r.adjoint();
        prop_assert!((frobenius(&conj) - frobenius(&m)).abs() <= 1e-12 * frobenius(&m));
    }

    #[test]
    fn laplacian_integration_by_parts(n in 2usize..=16, seed in any::<u64>()) {
        let basis = &cached(n).0;
        let f = random_matrix(n, seed);
        let g = random_matrix(n, seed.wrapping_add(1));
        let lhs = (laplacian_of(n, &f) * &g).trace();
        let mut rhs = Complex64::new(0.0, 0.0);
        for k in 0..3 {
            rhs += (commutator(basis.x(k), &f) * commutator(basis.x(k), &g)).trace();
        }
        rhs *= -((n * n) as f64);
        prop_assert!((lhs - rhs).norm() <= 1e-11 * frobenius(&f) * frobenius(&g));
    }

    #[test]
    fn solve_stream_inverts_the_operator(n in 2usize..=16, seed in any::<u64>(), epdiff in any::<bool>()) {
        let eig = &cached(n).1;
        let w = trace_free(&random_matrix(n, seed));
        let model = if epdiff { Model::Epdiff } else { Model::Euler };
        let p = solve_stream(eig, &w, model).unwrap();
        let lp = laplacian_of(n, &p);
        let back = match model {
            Model::Euler => lp,
            Model::Epdiff => &lp - laplacian_of(n, &lp),
        };
        prop_assert!(frobenius(&(back - &w)) <= 1e-10 * frobenius(&w));
    }

    #[test]
    fn laplacian_preserves_hermitian_symmetry(n in 2usize..=16, seed in any::<u64>()) {
        let a = random_matrix(n, seed);
        let herm = &a + a.adjoint();
        let skew = &a - a.adjoint();
        let lh = laplacian_of(n, &herm);
        let ls = laplacian_of(n, &skew);
        prop_assert!(frobenius(&(&lh - lh.adjoint())) <= 1e-12 * frobenius(&lh).max(1.0));
        prop_assert!(frobenius(&(&ls + ls.adjoint())) <= 1e-12 * frobenius(&ls).max(1.0));
    }

    #[test]
    fn quantize_is_linear_with_exact_left_inverse(n in 2usize..=16, seed in any::<u64>(), s in -3.0f64..3.0) {
        let eig = &cached(n).1;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = HarmonicCoefficients::random_complex(n - 1, &mut rng);
        let b = HarmonicCoefficients::random_complex(n - 1, &mut rng);
        let z = Complex64::new(s, 0.5);
        let lhs = quantize(&a.add(&b.scale(z)), eig);
        let rhs = quantize(&a, eig) + quantize(&b, eig) * z;
        prop_assert!(frobenius(&(&lhs - rhs)) <= 1e-12 * frobenius(&lhs));
        let back = dequantize(&quantize(&a, eig), eig).unwrap();
        prop_assert!(back.sub(&a).norm() <= 1e-10 * a.norm());
    }

    #[test]
    fn dequantization_is_rotation_equivariant(
        n in 4usize..=16, seed in any::<u64>(), colat in 0.0..PI, lon in -PI..PI, angle in -PI..PI
    ) {
        let (basis, eig) = cached(n);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = HarmonicCoefficients::random_real(3, &mut rng);
        let axis = unit(colat, lon);
        let r = rotation_operator(basis, axis, angle);
        let q = quantize_function(&f, eig);
        let rotated = dequantize_function(&(&r * q * r.adjoint()), eig).unwrap();
        let mut worst: f64 = 0.0;
        for i in 0..6 {
            for j in 0..8 {
                let p = unit((i as f64 + 0.5) * PI / 6.0, j as f64 * PI / 4.0);
                let expected = f.evaluate(rotate(axis, -angle, p));
                worst = worst.max((rotated.evaluate(p) - expected).norm());
            }
        }
        prop_assert!(worst <= 1e-9 * f.norm(), "worst {worst:e}");
    }

    #[test]
    fn flows_form_a_group(n in 2usize..=16, seed in any::<u64>(), s in -1.0f64..1.0, t in -1.0f64..1.0) {
        let p = trace_free(&random_matrix(n, seed)) * c(0.3);
        let whole = flow_of_stream(&p, s + t).unwrap();
        let parts = flow_of_stream(&p, s).unwrap().compose(&flow_of_stream(&p, t).unwrap());
        prop_assert!(frobenius(&(&whole.f - &parts.f)) <= 1e-9 * frobenius(&whole.f));
    }

    #[test]
    fn congruence_keeps_positive_definiteness(n in 2usize..=16, seed in any::<u64>(), t in 0.0f64..2.0) {
        let a = random_matrix(n, seed);
        let b = &a * a.adjoint() + CMatrix::identity(n, n) * c(1e-3);
        let p = trace_free(&random_matrix(n, seed.wrapping_add(7))) * c(0.3);
        let fb = act_density(&flow_of_stream(&p, t).unwrap(), &b).unwrap();
        prop_assert!(hermitian_eigenvalues(&fb)[0] > 0.0);
    }

    #[test]
    fn exact_flow_group_norm_and_tangency(colat in 0.0..3.0f64, lon in -PI..PI, s in 0.0f64..2.0, t in 0.0f64..2.0) {
        let y0 = unit(colat, lon);
        let v = example_field(y0);
        prop_assert!(y0.to_array().iter().zip(&v).map(|(a, b)| a * b).sum::<f64>().abs() <= 1e-12);
        let two = exact_flow(exact_flow(y0, s).unwrap(), t).unwrap();
        let one = exact_flow(y0, s + t).unwrap();
        prop_assert!(two.angle_to(one) <= 1e-10);
        let raw = one.to_array();
        prop_assert!(((raw[0] * raw[0] + raw[1] * raw[1] + raw[2] * raw[2]).sqrt() - 1.0).abs() <= 1e-12);
    }
}

proptest! {
    #![proptest_config(config(8))]

    #[test]
    fn blob_transport_is_isospectral_and_equivariant(
        seed in any::<u64>(), colat in 0.3..2.8f64, lon in -PI..PI, acolat in 0.0..PI, alon in -PI..PI, angle in -PI..PI
    ) {
        let n = 12;
        let (basis, eig) = cached(n);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let psi = HarmonicCoefficients::random_complex(2, &mut rng).scale(c(0.2));
        let p = quantize_generator(&psi, eig);
        let b0 = blob_at(basis, unit(colat, lon)).unwrap();
        let tr = transport_blob(basis, &p, &b0, 30, 0.2).unwrap();
        let s0 = skew_hermitian_spectrum(&b0);
        for s in &tr.steps {
            let d = skew_hermitian_spectrum(s).iter().zip(&s0).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
            prop_assert!(d <= 1e-10);
        }

        let r = rotation_operator(basis, unit(acolat, alon), angle);
        let rot = |m: &CMatrix| &r * m * r.adjoint();
        let moved = transport_blob(basis, &rot(&p), &rot(&b0), 30, 0.2).unwrap();
        prop_assert!(frobenius(&(moved.last() - rot(tr.last()))) <= 1e-8);
    }
}

#[test]
fn transported_mesh_keeps_total_area() {
    let mesh = icosasphere(4).unwrap();
    for t in [0.5, 1.0, 2.0] {
        let moved = transport_mesh(&mesh, t).unwrap();
        assert!((moved.total_area() - 4.0 * PI).abs() <= 1e-6, "t={t}: {}", moved.total_area());
    }
}

#[test]
fn example_generator_reproduces_its_field_in_the_blob_flow() {
    // Sanity link between the property suite and the reference flow.
    let (basis, eig) = cached(16);
    let p = quantize_generator(&example_generator(), eig);
    let y0 = UnitVector3::new(0.3, -0.4, 0.2).unwrap();
    let f = flow_of_stream(&p, 0.3).unwrap();
    let moved = act_density(&f, &blob_at(basis, y0).unwrap()).unwrap();
    let center = qdiff_core::blob_center(basis, &moved).unwrap();
    assert!(center.angle_to(exact_flow(y0, 0.3).unwrap()) < 1e-10);
}
