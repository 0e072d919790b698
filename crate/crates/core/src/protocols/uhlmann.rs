//! Uhlmann isometries between purifications and the pure close extension.

use crate::error::{QsrError, Result};
use crate::linalg::eig::{complete_unitary, svd_thin};
use crate::linalg::state::purify_with_dim;
use crate::linalg::{c, CMat, DensityOperator, IsometryMap, Quantum, RegisterLayout, StateVector};

/// Amplitudes as a `dim(fixed) x dim(rest)` matrix, `fixed` in the order
/// given, plus the layout of the rest.
pub(crate) fn bipartite(sv: &StateVector, fixed: &[&str]) -> Result<(CMat, RegisterLayout)> {
    let rest: Vec<&str> = sv.layout().complement(fixed);
    let mut order = fixed.to_vec();
    order.extend(rest.iter().copied());
    let p = sv.permuted(&order)?;
    let df = sv.layout().dim_of_set(fixed)?;
    let m = CMat::from_row_slice(df, sv.dim() / df, p.amplitudes().as_slice());
    let rl = if rest.is_empty() { RegisterLayout::empty() } else { sv.layout().select(&rest)? };
    Ok((m, rl))
}

/// Inverse of [`bipartite`]: a `fixed x rest` matrix as a state on the
/// concatenated layout.
pub(crate) fn from_bipartite(m: &CMat, fixed: &RegisterLayout, rest: &RegisterLayout) -> Result<StateVector> {
    let layout = fixed.concat(rest)?;
    let (r, k) = m.shape();
    let amps = crate::linalg::CVec::from_iterator(r * k, (0..r).flat_map(|i| (0..k).map(move |j| m[(i, j)])));
    StateVector::new_unchecked(layout, amps)
}

pub(crate) struct Uhlmann {
    /// `c_t x c_s`, maximizing `|⟨Y| (I⊗V) |X⟩|`.
    pub isometry: CMat,
    /// Square completion whose column `k·c_s + x` is `isometry[:, x]` for
    /// `k = 0`; present when asked for and `c_s` divides `c_t`.
    pub unitary: Option<CMat>,
    /// `F(X X†, Y Y†)`.
    pub fidelity: f64,
}

/// `x` is `f x c_s` (source), `y` is `f x c_t` (target).
pub(crate) fn uhlmann_core(x: &CMat, y: &CMat, complete: bool) -> Result<Uhlmann> {
    let (cs, ct) = (x.ncols(), y.ncols());
    if x.nrows() != y.nrows() {
        return Err(QsrError::LayoutMismatch(format!("fixed dimensions differ: {} vs {}", x.nrows(), y.nrows())));
    }
    if ct < cs {
        return Err(QsrError::LayoutMismatch(format!(
            "target complement ({ct}) smaller than source complement ({cs}); pad the target with an ancilla"
        )));
    }
    let m = y.adjoint() * x;
    let (p, s, q) = svd_thin(&m);
    let v = p.conjugate() * q.transpose();
    let fidelity = s.iter().sum::<f64>().min(1.0);
    let unitary = (complete && ct % cs == 0).then(|| complete_unitary(&v));
    Ok(Uhlmann { isometry: v, unitary, fidelity })
}

/// Isometry `V` from the complement of `fixed` in `pur2` to the complement
/// in `pur1` with `F((I⊗V)|pur2⟩, |pur1⟩) = F(pur1_fixed, pur2_fixed)`.
pub fn uhlmann_isometry(pur1: &StateVector, pur2: &StateVector, fixed: &[&str]) -> Result<IsometryMap> {
    let d1 = pur1.layout().select(fixed)?.dims();
    let d2 = pur2.layout().select(fixed)?.dims();
    if d1 != d2 {
        return Err(QsrError::LayoutMismatch(format!("fixed registers differ in dimension: {d1:?} vs {d2:?}")));
    }
    let (y, rest1) = bipartite(pur1, fixed)?;
    let (x, rest2) = bipartite(pur2, fixed)?;
    if rest2.is_empty() {
        return Err(QsrError::InvalidLayout("source has no registers outside the fixed set".into()));
    }
    let u = uhlmann_core(&x, &y, false)?;
    IsometryMap::new(rest2, rest1, u.isometry)
}

/// A state `θ` on the registers of `rho_ab` other than `psi_a`'s with
/// `F(ψ⊗θ, ρ) ≥ F(ψ, ρ_A)`.
///
/// Projects a purification of ρ onto ψ; the normalized remainder is the
/// Uhlmann-optimal partner of ψ and its reduction is θ.
pub fn pure_close_extension(psi_a: &StateVector, rho_ab: &DensityOperator) -> Result<DensityOperator> {
    rho_ab.validate()?;
    let a_labels = psi_a.layout().labels();
    for (l, d) in psi_a.layout().entries() {
        if rho_ab.layout().dim_of(l)? != *d {
            return Err(QsrError::LayoutMismatch(format!("register {l} has a different dimension in ρ")));
        }
    }
    let b_labels: Vec<&str> = rho_ab.layout().complement(&a_labels);
    if b_labels.is_empty() {
        return Err(QsrError::InvalidLayout("ρ has no registers besides ψ's".into()));
    }
    let anc = "__purifier";
    let pur = purify_with_dim(rho_ab, anc, rho_ab.dim())?;
    let (x, _) = bipartite(&pur, &a_labels)?;
    let psi = psi_a.permuted(&a_labels)?;
    let phi = psi.amplitudes().transpose().conjugate() * &x;
    let db = rho_ab.layout().dim_of_set(&b_labels)?;
    let b_layout = rho_ab.layout().select(&b_labels)?;
    let norm = phi.norm();
    if norm < 1e-12 {
        // ψ is orthogonal to ρ_A; every θ gives zero
        return rho_ab.marginal(&b_labels).and_then(|m| m.permuted(&b_labels));
    }
    let de = phi.len() / db;
    let f = CMat::from_fn(db, de, |i, j| phi[i * de + j] / c(norm));
    DensityOperator::new_unchecked(b_layout, &f * f.adjoint())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::entropies::fidelity;
    use crate::linalg::random::{haar_vector, random_density_matrix, rng_from_seed};
    use crate::linalg::state::purify;

    fn lay(e: &[(&str, usize)]) -> RegisterLayout {
        RegisterLayout::new(e.iter().copied()).unwrap()
    }

    fn random_pure(l: RegisterLayout, seed: u64) -> StateVector {
        let mut rng = rng_from_seed(seed);
        StateVector::new(l.clone(), haar_vector(l.total_dim(), &mut rng)).unwrap()
    }

    fn overlap(a: &StateVector, b: &StateVector) -> f64 {
        let order: Vec<&str> = a.layout().labels();
        a.inner(&b.permuted(&order).unwrap()).unwrap().norm()
    }

    #[test]
    fn identical_purifications() {
        let p = random_pure(lay(&[("X", 2), ("Y", 3)]), 1);
        let v = uhlmann_isometry(&p, &p, &["X"]).unwrap();
        let moved = p.transformed(&v).unwrap();
        assert!((overlap(&p, &moved) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn same_marginal_saturates() {
        let mut rng = rng_from_seed(4);
        let rho = DensityOperator::new(lay(&[("X", 2)]), random_density_matrix(2, &mut rng)).unwrap();
        let p1 = purify(&rho, "Y").unwrap();
        let u = crate::linalg::random_unitary(2, 9).unwrap().with_layouts(lay(&[("Y", 2)]), lay(&[("Y", 2)])).unwrap();
        let p2 = p1.transformed(&u).unwrap();
        let v = uhlmann_isometry(&p1, &p2, &["X"]).unwrap();
        assert!((overlap(&p1, &p2.transformed(&v).unwrap()) - 1.0).abs() < 1e-7);
    }

    #[test]
    fn achieves_marginal_fidelity() {
        for seed in 0..10 {
            let p1 = random_pure(lay(&[("X", 2), ("Y", 3)]), 100 + seed);
            let p2 = random_pure(lay(&[("X", 2), ("Z", 2)]), 200 + seed);
            let v = uhlmann_isometry(&p1, &p2, &["X"]).unwrap();
            let got = overlap(&p1, &p2.transformed(&v).unwrap());
            let want = fidelity(&p1.marginal(&["X"]).unwrap(), &p2.marginal(&["X"]).unwrap()).unwrap();
            assert!((got - want).abs() < 1e-7, "seed {seed}: {got} vs {want}");
        }
    }

    #[test]
    fn small_target_needs_padding() {
        let p1 = random_pure(lay(&[("X", 2), ("Y", 2)]), 1);
        let p2 = random_pure(lay(&[("X", 2), ("Z", 4)]), 2);
        assert!(matches!(uhlmann_isometry(&p1, &p2, &["X"]), Err(QsrError::LayoutMismatch(_))));
    }

    #[test]
    fn unitary_completion_extends_isometry() {
        let mut rng = rng_from_seed(3);
        let x = CMat::from_fn(3, 2, |_, _| crate::linalg::random::gaussian_c64(&mut rng));
        let y = CMat::from_fn(3, 4, |_, _| crate::linalg::random::gaussian_c64(&mut rng));
        let u = uhlmann_core(&x, &y, true).unwrap();
        let w = u.unitary.unwrap();
        assert!(crate::linalg::max_abs(&(w.adjoint() * &w - CMat::identity(4, 4))) < 1e-10);
        assert!(crate::linalg::max_abs(&(w.columns(0, 2) - &u.isometry)) < 1e-12);
    }

    #[test]
    fn product_extension_is_exact() {
        let psi = random_pure(lay(&[("A", 2)]), 5);
        let mut rng = rng_from_seed(6);
        let tau = DensityOperator::new(lay(&[("B", 3)]), random_density_matrix(3, &mut rng)).unwrap();
        let rho = psi.to_density().tensor_with(&tau).unwrap();
        let theta = pure_close_extension(&psi, &rho).unwrap();
        assert!(crate::linalg::max_abs(&(theta.matrix() - tau.matrix())) < 1e-9);
    }

    #[test]
    fn extension_meets_marginal_fidelity() {
        for seed in 0..20 {
            let psi = random_pure(lay(&[("A", 2)]), 300 + seed);
            let mut rng = rng_from_seed(400 + seed);
            let rho = DensityOperator::new(lay(&[("A", 2), ("B", 2)]), random_density_matrix(4, &mut rng)).unwrap();
            let theta = pure_close_extension(&psi, &rho).unwrap();
            let got = fidelity(&psi.to_density().tensor_with(&theta).unwrap(), &rho).unwrap();
            let bound = fidelity(&psi.to_density(), &rho.marginal(&["A"]).unwrap()).unwrap();
            assert!(got >= bound - 1e-6, "seed {seed}: {got} < {bound}");
        }
    }
}
