use super::{fidelity_mat, Certificate, QuantityKind, QuantityResult};
use crate::error::{QsrError, Result};
use crate::linalg::eig::{hermitize, pinv_sqrt_psd, sqrt_psd};
use crate::linalg::random::{derive_seed, haar_unitary, rng_from_seed};
use crate::linalg::{CMat, DensityOperator, Quantum};
use crate::search::{complete_to_unitary, minimize, perturb_unitary, SearchBudget};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RecoveryMethod {
    Petz,
    /// Search over Stinespring isometries B → BCG, started from the Petz
    /// dilation and from Haar-random ones.
    Optimize { restarts: usize, iterations: usize, seed: u64 },
}

impl RecoveryMethod {
    pub fn optimize(seed: u64) -> Self {
        RecoveryMethod::Optimize { restarts: 4, iterations: 300, seed }
    }
}

struct Tripartite {
    abc: CMat,
    ab: CMat,
    da: usize,
    db: usize,
    dc: usize,
}

fn tripartite(rho: &DensityOperator, a: &[&str], cc: &[&str], b: &[&str]) -> Result<Tripartite> {
    if a.is_empty() || b.is_empty() || cc.is_empty() {
        return Err(QsrError::InvalidLayout("degenerate tripartition".into()));
    }
    let all: Vec<&str> = a.iter().chain(b).chain(cc).copied().collect();
    for (i, l) in all.iter().enumerate() {
        if all[..i].contains(l) {
            return Err(QsrError::InvalidLayout(format!("label {l} in two parts")));
        }
    }
    let abc = rho.marginal(&all)?.permuted(&all)?.into_matrix();
    let da = rho.layout().dim_of_set(a)?;
    let db = rho.layout().dim_of_set(b)?;
    let dc = rho.layout().dim_of_set(cc)?;
    let ab = super::maxinfo::ptrace_b(&abc, da * db, dc);
    Ok(Tripartite { abc, ab, da, db, dc })
}

/// Kraus operators `(dB·dC) x dB` of the Petz map, padded to be trace
/// preserving off the support of ρ_B.
fn petz_kraus(t: &Tripartite) -> Vec<CMat> {
    let bc = ptrace_leading(&t.abc, t.da, t.db * t.dc);
    let b = super::maxinfo::ptrace_b(&bc, t.db, t.dc);
    let sbc = sqrt_psd(&bc);
    let ib = pinv_sqrt_psd(&b);
    let mut out = Vec::with_capacity(t.dc + 1);
    for cidx in 0..t.dc {
        // ib ⊗ |c⟩ : B → BC
        let mut emb = CMat::zeros(t.db * t.dc, t.db);
        for i in 0..t.db {
            for j in 0..t.db {
                emb[(i * t.dc + cidx, j)] = ib[(i, j)];
            }
        }
        out.push(&sbc * emb);
    }
    let proj = &ib * &b * &ib;
    let comp = CMat::identity(t.db, t.db) - hermitize(&proj);
    let mut pad = CMat::zeros(t.db * t.dc, t.db);
    for i in 0..t.db {
        for j in 0..t.db {
            pad[(i * t.dc, j)] = comp[(i, j)];
        }
    }
    out.push(pad);
    out
}

fn ptrace_leading(m: &CMat, dl: usize, dr: usize) -> CMat {
    CMat::from_fn(dr, dr, |i, j| (0..dl).map(|a| m[(a * dr + i, a * dr + j)]).sum())
}

fn apply_kraus(t: &Tripartite, kraus: &[CMat]) -> CMat {
    let n = t.da * t.db * t.dc;
    let mut out = CMat::zeros(n, n);
    let ia = CMat::identity(t.da, t.da);
    for k in kraus {
        let big = ia.kronecker(k);
        out += &big * &t.ab * big.adjoint();
    }
    hermitize(&out)
}

fn recovered_fidelity(t: &Tripartite, kraus: &[CMat]) -> f64 {
    let out = apply_kraus(t, kraus);
    let tr = out.trace().re;
    let out = if tr > 0.0 { out.scale(1.0 / tr) } else { out };
    fidelity_mat(&t.abc, &out)
}

/// Kraus operators of the channel whose Stinespring unitary on BCG maps
/// `|b⟩|0⟩_C|0⟩_G` to the first `dB` columns.
fn kraus_from_unitary(u: &CMat, db: usize, dc: usize, g: usize) -> Vec<CMat> {
    (0..g)
        .map(|k| {
            CMat::from_fn(db * dc, db, |row, col| u[(row * g + k, col * dc * g)])
        })
        .collect()
}

/// Stinespring unitary on BCG of a channel given by `g` Kraus operators.
fn unitary_from_kraus(kraus: &[CMat], db: usize, dc: usize) -> CMat {
    let g = kraus.len();
    let d = db * dc * g;
    let mut w = CMat::zeros(d, db);
    for (k, kr) in kraus.iter().enumerate() {
        for row in 0..db * dc {
            for col in 0..db {
                w[(row * g + k, col)] = kr[(row, col)];
            }
        }
    }
    let full = complete_to_unitary(&w);
    // put column b at position b·dC·g so the input is |b⟩|0⟩|0⟩
    let mut u = CMat::zeros(d, d);
    let mut rest = db;
    for col in 0..d {
        let src = if col % (dc * g) == 0 { col / (dc * g) } else {
            let s = rest;
            rest += 1;
            s
        };
        u.set_column(col, &full.column(src));
    }
    u
}

/// `sup_{E: B→BC} F(ρ_ABC, E(ρ_AB))`, bounded from below by the channel
/// found.
pub fn fidelity_of_recovery(
    rho: &DensityOperator,
    a: &[&str],
    cc: &[&str],
    b: &[&str],
    method: RecoveryMethod,
) -> Result<QuantityResult> {
    let t = tripartite(rho, a, cc, b)?;
    let petz = petz_kraus(&t);
    let petz_f = recovered_fidelity(&t, &petz);
    let (value, kraus) = match method {
        RecoveryMethod::Petz => (petz_f, petz),
        RecoveryMethod::Optimize { restarts, iterations, seed } => {
            let g = t.dc + 1;
            let mut best = (petz_f, petz.clone());
            for r in 0..=restarts {
                let mut rng = rng_from_seed(derive_seed(seed, r as u64));
                let u0 = if r == 0 {
                    unitary_from_kraus(&petz, t.db, t.dc)
                } else {
                    haar_unitary(t.db * t.dc * g, &mut rng)
                };
                let f0 = recovered_fidelity(&t, &kraus_from_unitary(&u0, t.db, t.dc, g));
                let budget = SearchBudget { iterations, initial_step: if r == 0 { 0.05 } else { 0.5 }, min_step: 1e-7 };
                let (u, v, _) = minimize(u0, -f0, budget, &mut rng, perturb_unitary, |u| {
                    Some(-recovered_fidelity(&t, &kraus_from_unitary(u, t.db, t.dc, g)))
                });
                if -v > best.0 {
                    best = (-v, kraus_from_unitary(&u, t.db, t.dc, g));
                }
            }
            best
        }
    };
    Ok(QuantityResult {
        value,
        kind: QuantityKind::HeuristicLower,
        bounds: None,
        converged: true,
        certificate: Some(Certificate::Channel(kraus)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::random::{haar_vector, random_density_matrix, rng_from_seed};
    use crate::linalg::{tensor, RegisterLayout, StateVector};

    fn q(label: &str, m: CMat) -> DensityOperator {
        DensityOperator::new(RegisterLayout::single(label, m.nrows()).unwrap(), m).unwrap()
    }

    #[test]
    fn product_state_is_recoverable() {
        let mut rng = rng_from_seed(1);
        let s = tensor(
            &tensor(&q("A", random_density_matrix(2, &mut rng)), &q("B", random_density_matrix(2, &mut rng))).unwrap(),
            &q("C", random_density_matrix(2, &mut rng)),
        )
        .unwrap();
        let r = fidelity_of_recovery(&s, &["A"], &["C"], &["B"], RecoveryMethod::Petz).unwrap();
        assert!((r.value - 1.0).abs() < 1e-6);
    }

    #[test]
    fn markov_state_is_recoverable() {
        // ρ_{A B_L} ⊗ ρ_{B_R C} with B = B_L B_R
        let mut rng = rng_from_seed(2);
        let left = DensityOperator::new(RegisterLayout::new([("A", 2), ("BL", 2)]).unwrap(), random_density_matrix(4, &mut rng)).unwrap();
        let right = DensityOperator::new(RegisterLayout::new([("BR", 2), ("C", 2)]).unwrap(), random_density_matrix(4, &mut rng)).unwrap();
        let s = tensor(&left, &right).unwrap();
        let r = fidelity_of_recovery(&s, &["A"], &["C"], &["BL", "BR"], RecoveryMethod::Petz).unwrap();
        assert!((r.value - 1.0).abs() < 1e-6, "{}", r.value);
    }

    #[test]
    fn dilation_round_trip() {
        let mut rng = rng_from_seed(3);
        let l = RegisterLayout::new([("A", 2), ("B", 2), ("C", 2)]).unwrap();
        let s = StateVector::new(l, haar_vector(8, &mut rng)).unwrap().to_density();
        let t = tripartite(&s, &["A"], &["C"], &["B"]).unwrap();
        let k = petz_kraus(&t);
        let u = unitary_from_kraus(&k, 2, 2);
        let e = u.adjoint() * &u - CMat::identity(12, 12);
        assert!(e.iter().all(|z| z.norm() < 1e-10));
        let back = kraus_from_unitary(&u, 2, 2, 3);
        assert!((recovered_fidelity(&t, &back) - recovered_fidelity(&t, &k)).abs() < 1e-10);
    }

    #[test]
    fn optimize_dominates_petz() {
        let mut rng = rng_from_seed(4);
        let l = RegisterLayout::new([("A", 2), ("B", 2), ("C", 2)]).unwrap();
        for s in 0..3 {
            let st = StateVector::new(l.clone(), haar_vector(8, &mut rng)).unwrap().to_density();
            let p = fidelity_of_recovery(&st, &["A"], &["C"], &["B"], RecoveryMethod::Petz).unwrap();
            let o = fidelity_of_recovery(&st, &["A"], &["C"], &["B"], RecoveryMethod::optimize(s)).unwrap();
            assert!(p.value <= o.value + 1e-6);
        }
        let mm = DensityOperator::maximally_mixed(l);
        assert!(fidelity_of_recovery(&mm, &["A"], &[], &["B"], RecoveryMethod::Petz).is_err());
    }
}
