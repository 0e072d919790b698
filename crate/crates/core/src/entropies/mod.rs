//! Entropic quantities. All logarithms are base 2.

pub mod maxinfo;
pub mod recovery;
pub mod sdp;
pub mod smooth;

pub use maxinfo::{hmax, hmin, imax};
pub use recovery::{fidelity_of_recovery, RecoveryMethod};
pub use smooth::{smooth, SmoothOptions, SmoothQuantity};



use crate::error::{QsrError, Result};
use crate::linalg::eig::{eigh, sqrt_psd};
use crate::linalg::{CMat, DensityOperator};

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum QuantityKind {
    Exact,
    SdpCertified,
    HeuristicUpper,
    HeuristicLower,
}

#[derive(Debug, Clone)]
pub enum Certificate {
    /// Optimal `σ_B` plus the primal and dual matrices of the program.
    Sdp { sigma: DensityOperator, y: CMat, z: CMat },
    /// State in the smoothing ball that attains the value.
    BallState(DensityOperator),
    /// Kraus operators of a recovery channel.
    Channel(Vec<CMat>),
}

#[derive(Debug, Clone)]
pub struct QuantityResult {
    pub value: f64,
    pub kind: QuantityKind,
    /// Certified interval around `value` when the kind is `SdpCertified`.
    pub bounds: Option<(f64, f64)>,
    pub converged: bool,
    pub certificate: Option<Certificate>,
}

fn same_layout(a: &DensityOperator, b: &DensityOperator) -> Result<()> {
    if a.layout() != b.layout() {
        return Err(QsrError::LayoutMismatch(format!("{} vs {}", a.layout(), b.layout())));
    }
    Ok(())
}

pub(crate) fn fidelity_mat(a: &CMat, b: &CMat) -> f64 {
    let p = sqrt_psd(a) * sqrt_psd(b);
    crate::linalg::eig::trace_norm(&p).clamp(0.0, 1.0)
}

/// `‖√ρ√σ‖₁`.
pub fn fidelity(rho: &DensityOperator, sigma: &DensityOperator) -> Result<f64> {
    same_layout(rho, sigma)?;
    Ok(fidelity_mat(rho.matrix(), sigma.matrix()))
}

pub(crate) fn pd_from_fidelity(f: f64) -> f64 {
    (1.0 - f * f).max(0.0).sqrt()
}

pub fn purified_distance(rho: &DensityOperator, sigma: &DensityOperator) -> Result<f64> {
    Ok(pd_from_fidelity(fidelity(rho, sigma)?))
}

pub(crate) fn entropy_mat(m: &CMat) -> f64 {
    eigh(m).0.iter().filter(|&&v| v > 0.0).map(|&v| -v * v.log2()).sum()
}

pub fn von_neumann_entropy(rho: &DensityOperator) -> f64 {
    entropy_mat(rho.matrix())
}

const SUPPORT_TOL: f64 = 1e-12;

pub(crate) fn rel_entropy_mat(rho: &CMat, sigma: &CMat) -> f64 {
    let (mu, w) = eigh(sigma);
    let rw = w.adjoint() * rho * &w;
    let mut cross = 0.0;
    for (j, &m) in mu.iter().enumerate() {
        let weight = rw[(j, j)].re;
        if m < SUPPORT_TOL {
            if weight > SUPPORT_TOL {
                return f64::INFINITY;
            }
            continue;
        }
        cross += weight * m.log2();
    }
    (-entropy_mat(rho) - cross).max(0.0)
}

/// `D(ρ‖σ)`, `+∞` when the support of ρ is not inside that of σ.
pub fn rel_entropy(rho: &DensityOperator, sigma: &DensityOperator) -> Result<f64> {
    same_layout(rho, sigma)?;
    Ok(rel_entropy_mat(rho.matrix(), sigma.matrix()))
}

pub(crate) fn dmax_mat(rho: &CMat, sigma: &CMat) -> f64 {
    let (mu, w) = eigh(sigma);
    let rw = w.adjoint() * rho * &w;
    let d = mu.len();
    let mut keep = Vec::new();
    for (j, &m) in mu.iter().enumerate() {
        if m < SUPPORT_TOL {
            if rw[(j, j)].re > 1e-10 {
                return f64::INFINITY;
            }
        } else {
            keep.push(j);
        }
    }
    if keep.is_empty() {
        return f64::INFINITY;
    }
    // σ^{-1/2} ρ σ^{-1/2} restricted to supp σ, in σ's eigenbasis
    let r = keep.len();
    let g = CMat::from_fn(r, r, |a, b| rw[(keep[a], keep[b])] / (mu[keep[a]] * mu[keep[b]]).sqrt());
    let _ = d;
    let l = crate::linalg::eig::max_eig(&g);
    if l <= 0.0 {
        f64::NEG_INFINITY
    } else {
        l.log2()
    }
}

/// `log₂ λ_max(σ^{-1/2} ρ σ^{-1/2})` after a support check.
pub fn dmax(rho: &DensityOperator, sigma: &DensityOperator) -> Result<f64> {
    same_layout(rho, sigma)?;
    Ok(dmax_mat(rho.matrix(), sigma.matrix()))
}

fn check_disjoint(sets: &[&[&str]]) -> Result<()> {
    for (i, a) in sets.iter().enumerate() {
        for b in &sets[i + 1..] {
            if let Some(l) = a.iter().find(|l| b.contains(l)) {
                return Err(QsrError::InvalidLayout(format!("label {l} appears in two parts")));
            }
        }
    }
    Ok(())
}

fn marginal_entropy(rho: &DensityOperator, labels: &[&str]) -> Result<f64> {
    if labels.is_empty() {
        return Ok(0.0);
    }
    Ok(entropy_mat(rho.marginal(labels)?.matrix()))
}

fn union<'a>(a: &[&'a str], b: &[&'a str]) -> Vec<&'a str> {
    a.iter().chain(b.iter()).copied().collect()
}

/// `I(A:B) = D(ρ_AB‖ρ_A⊗ρ_B)`, evaluated through entropies.
pub fn mutual_info(rho: &DensityOperator, a: &[&str], b: &[&str]) -> Result<f64> {
    check_disjoint(&[a, b])?;
    if a.is_empty() || b.is_empty() {
        return Err(QsrError::InvalidLayout("empty part".into()));
    }
    let sa = marginal_entropy(rho, a)?;
    let sb = marginal_entropy(rho, b)?;
    let sab = marginal_entropy(rho, &union(a, b))?;
    Ok(sa + sb - sab)
}

/// `I(A:B|C) = S(AC) + S(BC) - S(ABC) - S(C)`.
pub fn cond_mutual_info(rho: &DensityOperator, a: &[&str], b: &[&str], cc: &[&str]) -> Result<f64> {
    check_disjoint(&[a, b, cc])?;
    if a.is_empty() || b.is_empty() {
        return Err(QsrError::InvalidLayout("empty part".into()));
    }
    let sac = marginal_entropy(rho, &union(a, cc))?;
    let sbc = marginal_entropy(rho, &union(b, cc))?;
    let sabc = marginal_entropy(rho, &union(&union(a, b), cc))?;
    let sc = marginal_entropy(rho, cc)?;
    Ok(sac + sbc - sabc - sc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::random::{haar_vector, random_density_matrix, rng_from_seed};
    use crate::linalg::{c, tensor, CVec, RegisterLayout, StateVector};

    fn q(label: &str, m: CMat) -> DensityOperator {
        DensityOperator::new(RegisterLayout::single(label, m.nrows()).unwrap(), m).unwrap()
    }

    fn ket0() -> CMat {
        CMat::from_row_slice(2, 2, &[c(1.0), c(0.0), c(0.0), c(0.0)])
    }

    fn bell() -> DensityOperator {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        StateVector::new(
            RegisterLayout::new([("P", 2), ("Q", 2)]).unwrap(),
            CVec::from_vec(vec![c(s), c(0.0), c(0.0), c(s)]),
        )
        .unwrap()
        .to_density()
    }

    #[test]
    fn fidelity_examples() {
        let z = q("A", ket0());
        let plus = q("A", CMat::from_element(2, 2, c(0.5)));
        let mixed = q("A", CMat::identity(2, 2).scale(0.5));
        assert!((fidelity(&z, &z).unwrap() - 1.0).abs() < 1e-12);
        assert!((fidelity(&z, &plus).unwrap() - 0.5f64.sqrt()).abs() < 1e-12);
        // pure vs mixed: sqrt(<0|σ|0>)
        assert!((fidelity(&z, &mixed).unwrap() - 0.5f64.sqrt()).abs() < 1e-12);
        let one = q("A", CMat::from_row_slice(2, 2, &[c(0.0), c(0.0), c(0.0), c(1.0)]));
        assert!((purified_distance(&z, &one).unwrap() - 1.0).abs() < 1e-12);
        assert!(purified_distance(&z, &z).unwrap() < 1e-6);
    }

    #[test]
    fn fidelity_symmetric() {
        let mut rng = rng_from_seed(1);
        for _ in 0..20 {
            let a = q("A", random_density_matrix(3, &mut rng));
            let b = q("A", random_density_matrix(3, &mut rng));
            assert!((fidelity(&a, &b).unwrap() - fidelity(&b, &a).unwrap()).abs() < 1e-9);
        }
    }

    #[test]
    fn relative_entropy_examples() {
        let z = q("A", ket0());
        let mixed = q("A", CMat::identity(2, 2).scale(0.5));
        assert!((rel_entropy(&z, &mixed).unwrap() - 1.0).abs() < 1e-12);
        assert!(rel_entropy(&mixed, &mixed).unwrap().abs() < 1e-12);
        assert_eq!(rel_entropy(&mixed, &z).unwrap(), f64::INFINITY);
        assert_eq!(dmax(&mixed, &z).unwrap(), f64::INFINITY);
        let other = q("B", ket0());
        assert!(rel_entropy(&z, &other).is_err());
    }

    #[test]
    fn dmax_examples() {
        let phi = bell();
        let mm = DensityOperator::maximally_mixed(phi.layout().clone());
        assert!((dmax(&phi, &mm).unwrap() - 2.0).abs() < 1e-12);
        assert!(dmax(&phi, &phi).unwrap().abs() < 1e-9);
    }

    #[test]
    fn mutual_information_examples() {
        let phi = bell();
        assert!((mutual_info(&phi, &["P"], &["Q"]).unwrap() - 2.0).abs() < 1e-12);
        let mut rng = rng_from_seed(5);
        let prod = tensor(&q("P", random_density_matrix(2, &mut rng)), &q("Q", random_density_matrix(2, &mut rng))).unwrap();
        assert!(mutual_info(&prod, &["P"], &["Q"]).unwrap().abs() < 1e-12);
        assert!(mutual_info(&prod, &["P"], &["P"]).is_err());
    }

    #[test]
    fn cmi_second_form() {
        let mut rng = rng_from_seed(6);
        let l = RegisterLayout::new([("A", 2), ("B", 2), ("C", 2)]).unwrap();
        for _ in 0..20 {
            let rho = StateVector::new(l.clone(), haar_vector(8, &mut rng)).unwrap().to_density();
            let lhs = cond_mutual_info(&rho, &["A"], &["B"], &["C"]).unwrap();
            let rhs = mutual_info(&rho, &["B"], &["A", "C"]).unwrap() - mutual_info(&rho, &["B"], &["C"]).unwrap();
            assert!((lhs - rhs).abs() < 1e-9);
            assert!(lhs > -1e-9);
        }
    }

    #[test]
    fn mutual_info_matches_relative_entropy() {
        let mut rng = rng_from_seed(8);
        let l = RegisterLayout::new([("A", 2), ("B", 3)]).unwrap();
        let rho = DensityOperator::new(l, random_density_matrix(6, &mut rng)).unwrap();
        let prod = tensor(&rho.marginal(&["A"]).unwrap(), &rho.marginal(&["B"]).unwrap()).unwrap();
        let d = rel_entropy(&rho, &prod).unwrap();
        assert!((d - mutual_info(&rho, &["A"], &["B"]).unwrap()).abs() < 1e-9);
    }
}
