use super::*;
use crate::linalg::random::{haar_vector, rng_from_seed};
use crate::linalg::CVec;
use crate::entropies::SmoothOptions;

fn lay(d: [usize; 4]) -> RegisterLayout {
    RegisterLayout::new([("R", d[0]), ("A", d[1]), ("B", d[2]), ("C", d[3])]).unwrap()
}

fn random_pure(d: [usize; 4], seed: u64) -> StateVector {
    let mut rng = rng_from_seed(seed);
    let l = lay(d);
    StateVector::new(l.clone(), haar_vector(l.total_dim(), &mut rng)).unwrap()
}

/// |Φ+⟩ on R, C with trivial A and B.
fn bell_rc() -> StateVector {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let amps = CVec::from_vec(vec![c(h), c(0.0), c(0.0), c(h)]);
    StateVector::new(lay([2, 1, 1, 2]), amps).unwrap()
}

fn quick(t: usize, seed: u64) -> QepsOptions {
    QepsOptions { t_dim: t, restarts: 2, iterations: 120, seed, ..Default::default() }
}

#[test]
fn decoupled_c_has_zero_value() {
    let rab = {
        let mut rng = rng_from_seed(1);
        let l = RegisterLayout::new([("R", 2), ("A", 2), ("B", 2)]).unwrap();
        StateVector::new(l, haar_vector(8, &mut rng)).unwrap()
    };
    let c0 = StateVector::basis(RegisterLayout::single("C", 2).unwrap(), 0).unwrap();
    let psi = rab.tensor_with(&c0).unwrap();
    let est = qeps_upper(&psi, 0.1, &quick(1, 3)).unwrap();
    assert!(est.upper.abs() < 1e-6, "{}", est.upper);
    assert!(est.lower <= est.upper + 1e-6);
}

#[test]
fn bell_pair_bounds() {
    let psi = bell_rc();
    for t in [1, 2] {
        let est = qeps_upper(&psi, 0.1, &quick(t, 5)).unwrap();
        assert!(est.upper <= 2.0 + 2.0 * (t as f64).log2() + 1e-6);
        assert!(est.upper <= 2.0 + 1e-6);
        assert!(est.lower <= est.upper + 1e-6);
        let (pd, res) = check_feasible(&psi, &est.feasible_point).unwrap();
        assert!(pd <= 0.1 + 1e-6 && res <= 1e-8);
    }
}

#[test]
fn returned_points_are_feasible() {
    for seed in 0..3 {
        let psi = random_pure([2, 1, 2, 2], 100 + seed);
        let est = qeps_upper(&psi, 0.15, &quick(2, seed)).unwrap();
        let (pd, res) = check_feasible(&psi, &est.feasible_point).unwrap();
        assert!(pd <= 0.15 + 1e-6, "{pd}");
        assert!(res <= 1e-8, "{res}");
        assert!(est.upper <= 2.0 * 2.0f64.log2() + 2.0 + 1e-6);
        // the identity point gives Imax(RB:C), which the search can only improve
        let rbc = standard_form(&psi).unwrap().marginal(&["R", "B", "C"]).unwrap();
        let id = crate::entropies::imax(&rbc, &["R", "B"], &["C"]).unwrap().value;
        assert!(est.upper <= id + 1e-9);
        assert!(est.lower <= est.upper + 1e-6);
    }
}

#[test]
fn embedding_preserves_the_point() {
    let psi = random_pure([2, 2, 2, 2], 7);
    let small = Problem::new(&psi, 0.2, 1).unwrap();
    let mut rng = rng_from_seed(8);
    let p = small.kicked_start(&mut rng);
    let e1 = small.evaluate(&p);
    let big = Problem::new(&psi, 0.2, 2).unwrap();
    let q = big.embed(&p, 1);
    let e2 = big.evaluate(&q);
    assert!((e1.distance - e2.distance).abs() < 1e-9);
    let v1 = small.value(&e1.kappa).unwrap().0;
    let v2 = big.value(&e2.kappa).unwrap().0;
    assert!((v1 - v2).abs() < 1e-6, "{v1} {v2}");
}

#[test]
fn sweep_is_no_worse_than_single_sizes() {
    let psi = random_pure([2, 1, 2, 2], 11);
    let o = QepsOptions { t_cap: 2, ..quick(1, 2) };
    let sw = qeps_upper_sweep(&psi, 0.1, &o).unwrap();
    let one = qeps_upper(&psi, 0.1, &o).unwrap();
    assert!(sw.upper <= one.upper + 1e-9);
}

#[test]
fn markov_state_is_recoverable() {
    // R and C both correlated only with B's two halves: take Ψ = |φ⟩_{R B1} |φ'⟩_{B2 C}
    let mut rng = rng_from_seed(4);
    let a = haar_vector(4, &mut rng);
    let b = haar_vector(4, &mut rng);
    // order R, B1, B2, C → R, A(1), B(4), C
    let amps = a.kronecker(&b);
    let psi = StateVector::new(lay([2, 1, 4, 2]), amps).unwrap();
    let lb = qeps_lower_recovery(&psi, 0.1, 0).unwrap();
    assert!((lb.petz_fidelity - 1.0).abs() < 1e-8);
    assert!((lb.petz - (0.99f64).log2()).abs() < 1e-7);
    let zero = qeps_lower_recovery(&psi, 0.0, 0).unwrap();
    assert!(zero.petz.abs() < 1e-7);
}

#[test]
fn out_of_range_inputs() {
    let psi = bell_rc();
    assert!(qeps_upper(&psi, 0.0, &quick(1, 0)).is_err());
    assert!(qeps_upper(&psi, 0.1, &quick(5, 0)).is_err());
    let bad = StateVector::basis(RegisterLayout::new([("R", 2), ("X", 2)]).unwrap(), 0).unwrap();
    assert!(standard_form(&bad).is_err());
}

#[test]
fn decomposition_identity_holds() {
    for seed in 0..2 {
        let psi = random_pure([2, 1, 2, 2], 40 + seed);
        let rep = qprime_decomposition(&psi, 2, 3, 60, seed).unwrap();
        assert!(rep.max_identity_residual < 1e-6, "{}", rep.max_identity_residual);
        assert!(rep.i_b_ct >= -1e-9);
        assert!(rep.evaluated > rep.rejected);
        // identity unitary recovers I(B:C) of Ψ, which bounds the best from above
        let rbc = standard_form(&psi).unwrap().to_density();
        let ibc = crate::entropies::mutual_info(&rbc, &["B"], &["C"]).unwrap();
        assert!(rep.i_b_ct <= ibc + 1e-9);
    }
}

#[test]
fn product_split_check() {
    let mut rng = rng_from_seed(9);
    let r = StateVector::new(RegisterLayout::single("R", 2).unwrap(), haar_vector(2, &mut rng)).unwrap();
    let ac = StateVector::new(RegisterLayout::new([("A", 2), ("C", 2)]).unwrap(), haar_vector(4, &mut rng)).unwrap();
    let psi = r.tensor_with(&ac).unwrap();
    let rep = splitting_identity_check(&psi, 0.1, &quick(1, 1), SmoothOptions { restarts: 2, iterations: 60, seed: 1 }).unwrap();
    assert!(rep.qeps_upper.abs() < 1e-6 && rep.smooth_imax.abs() < 1e-6);
    assert!(rep.qeps_below_imax && rep.smooth_below_imax);
}

#[test]
fn bell_split_check() {
    let rep = splitting_identity_check(&bell_rc(), 0.1, &quick(1, 1), SmoothOptions { restarts: 2, iterations: 60, seed: 1 }).unwrap();
    assert!(rep.qeps_upper <= 2.0 + 1e-6 && rep.smooth_imax <= 2.0 + 1e-6);
}

#[test]
fn budgets_hold() {
    let psi = random_pure([2, 1, 2, 2], 12);
    let est = qeps_upper(&psi, 0.3, &quick(1, 0)).unwrap();
    let rep = bound_suite(&psi, 0.3, &est).unwrap();
    assert!(rep.budget_ok && rep.recovery_ok);
    assert!(rep.recovery_witness <= est.upper + 1e-6);
    assert!((budget_formula(1.0, 0.3) - (49.0 / 0.18 + 98.0 / 0.18 + 15.0)).abs() < 1e-9);
}

#[test]
fn two_copies_layout() {
    let psi = random_pure([2, 1, 1, 2], 13);
    let two = diagnostics::copies(&psi, 2).unwrap();
    assert_eq!(two.layout().dims(), vec![4, 1, 1, 4]);
    let r = two.marginal(&["R"]).unwrap();
    let r1 = psi.marginal(&["R"]).unwrap();
    assert!((r.matrix() - r1.matrix().kronecker(r1.matrix())).iter().all(|z| z.norm() < 1e-12));
}
