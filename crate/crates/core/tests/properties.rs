use proptest::prelude::*;
use qsr_core::convex_split::lemma_n;
use qsr_core::entropies::{dmax, fidelity, purified_distance, rel_entropy, von_neumann_entropy};
use qsr_core::linalg::io::{from_json, to_json, StateFile};
use qsr_core::linalg::random::{haar_vector, random_density_matrix, rng_from_seed};
use qsr_core::linalg::{purify, Quantum};
use qsr_core::protocols::{superdense_cost, uhlmann_isometry};
use qsr_core::{DensityOperator, RegisterLayout, StateVector};

fn lay(e: &[(&str, usize)]) -> RegisterLayout {
    RegisterLayout::new(e.iter().copied()).unwrap()
}

fn density(l: RegisterLayout, seed: u64) -> DensityOperator {
    let d = l.total_dim();
    DensityOperator::new(l, random_density_matrix(d, &mut rng_from_seed(seed))).unwrap()
}

fn pure(l: RegisterLayout, seed: u64) -> StateVector {
    let d = l.total_dim();
    StateVector::new(l, haar_vector(d, &mut rng_from_seed(seed))).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn fidelity_is_symmetric_and_bounded(seed in any::<u64>(), d in 2usize..5) {
        let r = density(lay(&[("X", d)]), seed);
        let s = density(lay(&[("X", d)]), seed ^ 1);
        let f = fidelity(&r, &s).unwrap();
        prop_assert!((0.0..=1.0).contains(&f));
        prop_assert!((f - fidelity(&s, &r).unwrap()).abs() < 1e-9);
        prop_assert!((fidelity(&r, &r).unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn purified_distance_triangle(seed in any::<u64>(), d in 2usize..5) {
        let l = lay(&[("X", d)]);
        let (a, b, c) = (density(l.clone(), seed), density(l.clone(), seed ^ 2), density(l, seed ^ 3));
        let lhs = purified_distance(&a, &c).unwrap();
        prop_assert!(lhs <= purified_distance(&a, &b).unwrap() + purified_distance(&b, &c).unwrap() + 1e-9);
    }

    #[test]
    fn dmax_dominates_relative_entropy(seed in any::<u64>(), d in 2usize..5) {
        let l = lay(&[("X", d)]);
        let (r, s) = (density(l.clone(), seed), density(l, seed ^ 5));
        prop_assert!(dmax(&r, &s).unwrap() >= rel_entropy(&r, &s).unwrap() - 1e-8);
    }

    #[test]
    fn purification_reproduces_state(seed in any::<u64>(), d in 2usize..5) {
        let r = density(lay(&[("X", d)]), seed);
        let p = purify(&r, "P").unwrap();
        let back = p.marginal(&["X"]).unwrap();
        prop_assert!((back.matrix() - r.matrix()).iter().all(|z| z.norm() < 1e-9));
    }

    #[test]
    fn pure_marginals_share_entropy(seed in any::<u64>(), da in 1usize..4, db in 1usize..4) {
        let p = pure(lay(&[("A", da), ("B", db)]), seed);
        let sa = von_neumann_entropy(&p.marginal(&["A"]).unwrap());
        let sb = von_neumann_entropy(&p.marginal(&["B"]).unwrap());
        prop_assert!((sa - sb).abs() < 1e-8);
    }

    #[test]
    fn uhlmann_reaches_marginal_fidelity(seed in any::<u64>(), dy in 2usize..4) {
        let p1 = pure(lay(&[("X", 2), ("Y", dy + 1)]), seed);
        let p2 = pure(lay(&[("X", 2), ("Z", dy)]), seed ^ 7);
        let v = uhlmann_isometry(&p1, &p2, &["X"]).unwrap();
        let moved = p2.transformed(&v).unwrap();
        let got = p1.inner(&moved.permuted(&["X", "Y"]).unwrap()).unwrap().norm();
        let want = fidelity(&p1.marginal(&["X"]).unwrap(), &p2.marginal(&["X"]).unwrap()).unwrap();
        prop_assert!((got - want).abs() < 1e-7, "{} vs {}", got, want);
    }

    #[test]
    fn state_files_round_trip(seed in any::<u64>(), d in 1usize..5) {
        let s = StateFile::Pure(pure(lay(&[("R", 2), ("C", d)]), seed));
        prop_assert_eq!(from_json(&to_json(&s)).unwrap(), s);
    }

    #[test]
    fn superdense_counts(n in 1u64..1_000_000) {
        let c = superdense_cost(n).unwrap();
        prop_assert!((c.real_qubits - (n as f64).log2() / 2.0).abs() < 1e-12);
        let bits = (n as f64).log2().ceil() as u64;
        prop_assert_eq!(c.operational_qubits, bits.div_ceil(2));
        prop_assert_eq!(c.bell_pairs, c.operational_qubits);
    }

    #[test]
    fn copy_count_grows_with_k(k in 0.4f64..3.0, dk in 0.0f64..1.0) {
        let a = lemma_n(k, 0.12).unwrap();
        let b = lemma_n(k + dk, 0.12).unwrap();
        prop_assert!(b >= a);
    }
}
