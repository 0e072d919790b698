use super::sdp::{min_trace_dominating, SdpSolution};
use super::{Certificate, QuantityKind, QuantityResult};
use crate::error::{QsrError, Result};
use crate::linalg::eig::{pinv_sqrt_psd, RANK_TOL};
use crate::linalg::state::purify_with_dim;
use crate::linalg::{CMat, DensityOperator, Quantum, RegisterLayout};

/// Marginal on `a ∪ b`, ordered with `a` first.
fn bipartite(rho: &DensityOperator, a: &[&str], b: &[&str]) -> Result<(DensityOperator, usize, usize)> {
    if a.is_empty() || b.is_empty() {
        return Err(QsrError::InvalidLayout("empty part".into()));
    }
    if let Some(l) = a.iter().find(|l| b.contains(l)) {
        return Err(QsrError::InvalidLayout(format!("label {l} in both parts")));
    }
    let mut all: Vec<&str> = a.to_vec();
    all.extend_from_slice(b);
    let m = rho.marginal(&all)?.permuted(&all)?;
    let da = rho.layout().dim_of_set(a)?;
    let db = rho.layout().dim_of_set(b)?;
    Ok((m, da, db))
}

/// Reduced matrix on the leading factor of a `da x db` bipartite matrix.
pub(crate) fn ptrace_b(m: &CMat, da: usize, db: usize) -> CMat {
    CMat::from_fn(da, da, |i, j| (0..db).map(|t| m[(i * db + t, j * db + t)]).sum())
}

/// Imax(A:B) on a raw bipartite matrix; returns `(log2 upper, solution)`.
pub(crate) fn imax_mat(rho_ab: &CMat, da: usize, db: usize) -> Result<(f64, SdpSolution)> {
    let ra = ptrace_b(rho_ab, da, db);
    let k = pinv_sqrt_psd(&ra).kronecker(&CMat::identity(db, db));
    let x = &k * rho_ab * &k;
    let sol = min_trace_dominating(&x, da, db)?;
    Ok((sol.upper.log2(), sol))
}

pub(crate) fn hmin_mat(rho_ab: &CMat, da: usize, db: usize) -> Result<(f64, SdpSolution)> {
    let sol = min_trace_dominating(rho_ab, da, db)?;
    Ok((-sol.upper.log2(), sol))
}

fn sdp_result(value: f64, bounds: (f64, f64), sol: SdpSolution, b_layout: RegisterLayout) -> Result<QuantityResult> {
    let tr = sol.y.trace().re;
    let sigma = DensityOperator::new_unchecked(b_layout, sol.y.scale(1.0 / tr))?;
    Ok(QuantityResult {
        value,
        kind: QuantityKind::SdpCertified,
        bounds: Some(bounds),
        converged: sol.converged,
        certificate: Some(Certificate::Sdp { sigma, y: sol.y, z: sol.z }),
    })
}

/// `Imax(A:B) = inf_σ Dmax(ρ_AB‖ρ_A⊗σ_B)` via the trace-minimization program.
pub fn imax(rho: &DensityOperator, a: &[&str], b: &[&str]) -> Result<QuantityResult> {
    let (m, da, db) = bipartite(rho, a, b)?;
    let (v, sol) = imax_mat(m.matrix(), da, db)?;
    let lo = sol.lower.max(f64::MIN_POSITIVE).log2();
    sdp_result(v, (lo, v), sol, rho.layout().select(b)?)
}

/// `Hmin(A|B) = -inf_σ Dmax(ρ_AB‖I_A⊗σ_B)`.
pub fn hmin(rho: &DensityOperator, a: &[&str], b: &[&str]) -> Result<QuantityResult> {
    let (m, da, db) = bipartite(rho, a, b)?;
    let (v, sol) = hmin_mat(m.matrix(), da, db)?;
    let hi = -sol.lower.max(f64::MIN_POSITIVE).log2();
    sdp_result(v, (v, hi), sol, rho.layout().select(b)?)
}

/// `Hmax(A|B) = -Hmin(A|R)` with R purifying ρ_AB. R is restricted to the
/// support of ρ_AB, which leaves the value unchanged.
pub fn hmax(rho: &DensityOperator, a: &[&str], b: &[&str], purifying_label: &str) -> Result<QuantityResult> {
    let (m, _, _) = bipartite(rho, a, b)?;
    let rank = m.rank(RANK_TOL).max(1);
    let pure = purify_with_dim(&m, purifying_label, rank)?;
    let rho_ar = pure.marginal(&[a, &[purifying_label]].concat())?;
    let h = hmin(&rho_ar, a, &[purifying_label])?;
    let (lo, hi) = h.bounds.unwrap_or((h.value, h.value));
    Ok(QuantityResult { value: -h.value, bounds: Some((-hi, -lo)), ..h })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::random::{random_density_matrix, rng_from_seed};
    use crate::linalg::{c, tensor, CVec, StateVector};

    fn bell() -> DensityOperator {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        StateVector::new(
            RegisterLayout::new([("A", 2), ("B", 2)]).unwrap(),
            CVec::from_vec(vec![c(s), c(0.0), c(0.0), c(s)]),
        )
        .unwrap()
        .to_density()
    }

    fn q(label: &str, m: CMat) -> DensityOperator {
        DensityOperator::new(RegisterLayout::single(label, m.nrows()).unwrap(), m).unwrap()
    }

    #[test]
    fn imax_examples() {
        let r = imax(&bell(), &["A"], &["B"]).unwrap();
        assert!(r.converged);
        assert!((r.value - 2.0).abs() < 1e-7, "{}", r.value);
        let mut cl = CMat::zeros(4, 4);
        cl[(0, 0)] = c(0.5);
        cl[(3, 3)] = c(0.5);
        let cl = DensityOperator::new(bell().layout().clone(), cl).unwrap();
        assert!((imax(&cl, &["A"], &["B"]).unwrap().value - 1.0).abs() < 1e-7);
        let mut rng = rng_from_seed(3);
        let prod = tensor(&q("A", random_density_matrix(2, &mut rng)), &q("B", random_density_matrix(3, &mut rng))).unwrap();
        assert!(imax(&prod, &["A"], &["B"]).unwrap().value.abs() < 1e-7);
    }

    #[test]
    fn hmin_examples() {
        let r = hmin(&bell(), &["A"], &["B"]).unwrap();
        assert!((r.value + 1.0).abs() < 1e-7);
        let mut rng = rng_from_seed(4);
        let prod = tensor(&DensityOperator::maximally_mixed(RegisterLayout::single("A", 2).unwrap()), &q("B", random_density_matrix(2, &mut rng))).unwrap();
        assert!((hmin(&prod, &["A"], &["B"]).unwrap().value - 1.0).abs() < 1e-7);
    }

    #[test]
    fn hmax_of_bell_and_ordering() {
        let r = hmax(&bell(), &["A"], &["B"], "R").unwrap();
        assert!((r.value + 1.0).abs() < 1e-6, "{}", r.value);
        let mut rng = rng_from_seed(12);
        for _ in 0..10 {
            let l = RegisterLayout::new([("A", 2), ("B", 2)]).unwrap();
            let rho = DensityOperator::new(l, random_density_matrix(4, &mut rng)).unwrap();
            let lo = hmin(&rho, &["A"], &["B"]).unwrap().value;
            let hi = hmax(&rho, &["A"], &["B"], "R").unwrap().value;
            assert!(hi >= lo - 1e-7);
        }
    }

    #[test]
    fn certified_bounds_are_tight() {
        let mut rng = rng_from_seed(21);
        for _ in 0..10 {
            let l = RegisterLayout::new([("A", 2), ("B", 2)]).unwrap();
            let rho = DensityOperator::new(l, random_density_matrix(4, &mut rng)).unwrap();
            let r = imax(&rho, &["A"], &["B"]).unwrap();
            let (lo, hi) = r.bounds.unwrap();
            assert!(r.converged && hi - lo < 1e-7 && lo <= hi);
            assert!(r.value <= 2.0 + 1e-7);
        }
    }
}

#[cfg(test)]
mod pure_tests {
    use super::*;
    use crate::linalg::random::{haar_vector, rng_from_seed};
    use crate::linalg::StateVector;

    #[test]
    fn pure_states_converge() {
        let mut rng = rng_from_seed(77);
        for (da, db) in [(2, 2), (2, 3), (3, 2), (4, 2)] {
            let l = RegisterLayout::new([("A", da), ("B", db)]).unwrap();
            let rho = StateVector::new(l, haar_vector(da * db, &mut rng)).unwrap().to_density();
            let r = imax(&rho, &["A"], &["B"]).unwrap();
            let (lo, hi) = r.bounds.unwrap();
            assert!(r.converged, "{da}x{db}: {lo} {hi}");
            // pure states: 2 log of the Schmidt rank
            let want = 2.0 * (da.min(db) as f64).log2();
            assert!((r.value - want).abs() < 1e-6, "{} vs {}", r.value, want);
        }
    }
}
