use bpnorm_core::json;
use bpnorm_core::linalg::{self, kron_vec};
use bpnorm_core::rng;
use bpnorm_core::structure::make_swap;
use bpnorm_core::{schmidt_decompose, BipartiteOperator, Subsystem};
use proptest::prelude::*;

fn random_operator(seed: u64, n: usize) -> BipartiteOperator {
    BipartiteOperator::new(n, rng::ginibre(&mut rng::stream(seed, 0), n * n)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn partial_traces_keep_the_trace(seed in any::<u64>(), n in 2usize..=4) {
        let s = random_operator(seed, n);
        let t = s.trace();
        for sub in [Subsystem::First, Subsystem::Second] {
            prop_assert!((linalg::trace(&s.partial_trace(sub)) - t).norm() <= 1e-10);
        }
    }

    #[test]
    fn partial_transpose_is_a_trace_preserving_isometry(seed in any::<u64>(), n in 2usize..=4) {
        let s = random_operator(seed, n);
        let t = s.partial_transpose();
        prop_assert!((t.trace() - s.trace()).norm() <= 1e-12);
        prop_assert!((linalg::frobenius(t.matrix()) - linalg::frobenius(s.matrix())).abs() <= 1e-12);
        prop_assert_eq!(t.partial_transpose().into_matrix(), s.matrix().clone());
    }

    #[test]
    fn local_conjugation_composes(seed in any::<u64>(), n in 2usize..=3) {
        let mut r = rng::stream(seed, 1);
        let s = random_operator(seed, n);
        let (u1, u2, v1, v2) = (
            rng::haar_unitary(&mut r, n),
            rng::haar_unitary(&mut r, n),
            rng::haar_unitary(&mut r, n),
            rng::haar_unitary(&mut r, n),
        );
        let once = s.conjugate_local(&(&u1 * &v1), &(&u2 * &v2)).unwrap();
        let twice = s.conjugate_local(&v1, &v2).unwrap().conjugate_local(&u1, &u2).unwrap();
        prop_assert!(once.max_abs_diff(&twice) <= 1e-10);
    }

    #[test]
    fn operator_json_round_trip_is_exact(seed in any::<u64>(), n in 2usize..=3) {
        let s = random_operator(seed, n);
        let text = json::to_json_string(&json::OperatorJson::from_operator(&s)).unwrap();
        let back = json::parse_operator(&text).unwrap();
        prop_assert_eq!(back.matrix(), s.matrix());
    }
}

#[test]
fn schmidt_decomposition_reconstructs() {
    for n in 2..=4 {
        for k in 0..100 {
            let f = rng::unit_vector(&mut rng::stream(77 + n as u64, k), n * n);
            let sch = schmidt_decompose(&f).unwrap();
            assert!((sch.reconstruct() - &f).norm() <= 1e-10, "n = {n}, vector {k}");
            let squares: f64 = sch.coefficients.iter().map(|c| c * c).sum();
            assert!((squares - 1.0).abs() <= 1e-10);
        }
    }
}

#[test]
fn swap_exchanges_tensor_factors() {
    for n in 2..=4 {
        let w = make_swap(n);
        assert_eq!(w.trace().re, n as f64);
        assert!(w.mul_op(&w).max_abs_diff(&BipartiteOperator::identity(n)) <= 1e-12);
        for k in 0..100 {
            let mut r = rng::stream(5 + n as u64, k);
            let f = rng::unit_vector(&mut r, n);
            let g = rng::unit_vector(&mut r, n);
            let image = w.matrix() * kron_vec(&f, &g);
            assert!((image - kron_vec(&g, &f)).norm() <= 1e-12);
        }
    }
}
