//! Type-class evaluation of `τ` when `ρ_PQ` is block diagonal in the
//! eigenbasis of `σ_Q`, i.e. `ρ_PQ = Σ_q A_q ⊗ |q⟩⟨q|` (up to ordering).
//! Then `τ` is block diagonal over strings `x ∈ [d_Q]^n` and each block
//! depends only on the type (letter counts) of `x`.

use super::{ConvexSplitInstance, StageInputs};
use crate::linalg::eig::{eigh, sqrt_psd};
use crate::linalg::CMat;

#[derive(Debug, Clone)]
pub struct ClassicalSplit {
    /// `A_q = (I ⊗ ⟨q|) ρ_PQ (I ⊗ |q⟩)` in σ's eigenbasis.
    blocks: Vec<CMat>,
    /// Eigenvalues of `σ_Q`.
    s: Vec<f64>,
    rho_p: CMat,
}

fn ln_fact(n: usize) -> f64 {
    (1..=n).map(|i| (i as f64).ln()).sum()
}

fn compositions(n: usize, parts: usize) -> Vec<Vec<usize>> {
    if parts == 1 {
        return vec![vec![n]];
    }
    let mut out = Vec::new();
    for first in 0..=n {
        for mut rest in compositions(n - first, parts - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

fn xlogx_sum(m: &CMat) -> f64 {
    eigh(m).0.iter().filter(|&&v| v > 0.0).map(|&v| v * v.log2()).sum()
}

impl ClassicalSplit {
    /// `None` if `ρ_PQ` has coherences between distinct eigenvectors of σ
    /// (beyond 1e-12).
    pub fn try_new(inst: &ConvexSplitInstance) -> Option<Self> {
        let (dp, dq) = (inst.dp(), inst.dq());
        let (s, w) = eigh(inst.sigma_q.matrix());
        let rot = CMat::identity(dp, dp).kronecker(&w);
        let r = rot.adjoint() * inst.rho_pq.matrix() * &rot;
        for i in 0..dp * dq {
            for j in 0..dp * dq {
                if i % dq != j % dq && r[(i, j)].norm() > 1e-12 {
                    return None;
                }
            }
        }
        let blocks = (0..dq)
            .map(|q| CMat::from_fn(dp, dp, |a, b| r[(a * dq + q, b * dq + q)]))
            .collect();
        Some(Self { blocks, s: s.iter().map(|v| v.max(0.0)).collect(), rho_p: inst.rho_p() })
    }

    fn weight(&self, counts: &[usize]) -> f64 {
        counts.iter().zip(&self.s).map(|(&c, &s)| if c == 0 { 1.0 } else { s.powi(c as i32) }).product()
    }

    fn multiplicity(counts: &[usize]) -> f64 {
        let n: usize = counts.iter().sum();
        (ln_fact(n) - counts.iter().map(|&c| ln_fact(c)).sum::<f64>()).exp()
    }

    /// P-block of `τ` for a string of the given type.
    fn tau_block(&self, counts: &[usize]) -> CMat {
        let n: usize = counts.iter().sum();
        let w = self.weight(counts);
        let dp = self.rho_p.nrows();
        let mut t = CMat::zeros(dp, dp);
        if w == 0.0 {
            return t;
        }
        for (q, &c) in counts.iter().enumerate() {
            if c > 0 && self.s[q] > 0.0 {
                t += self.blocks[q].scale(c as f64 / self.s[q]);
            }
        }
        t.scale(w / n as f64)
    }

    pub(crate) fn inputs(&self, n: u64) -> StageInputs {
        let n = n as usize;
        let dq = self.s.len();
        let s_p = -xlogx_sum(&self.rho_p);
        let sqrt_rp = sqrt_psd(&self.rho_p);
        let mut s_pq = 0.0;
        let mut s_q = 0.0;
        let mut fid = 0.0;
        for counts in compositions(n, dq) {
            let mult = Self::multiplicity(&counts);
            let tb = self.tau_block(&counts);
            let t = tb.trace().re;
            if t <= 0.0 {
                continue;
            }
            s_pq -= mult * xlogx_sum(&tb);
            s_q -= mult * t * t.log2();
            let prod = sqrt_rp.scale(t.sqrt()) * sqrt_psd(&tb);
            fid += mult * crate::linalg::eig::trace_norm(&prod);
        }
        // D(ρ_{PQ_n} ⊗ σ^{⊗(n-1)} ‖ ρ_P ⊗ τ_{Q^n}), block by block
        let (lam, u) = eigh(&self.rho_p);
        let log_rp = |a: &CMat| -> f64 {
            let aw = u.adjoint() * a * &u;
            lam.iter()
                .enumerate()
                .filter(|(_, &l)| l > 1e-14)
                .map(|(i, &l)| aw[(i, i)].re * l.log2())
                .sum()
        };
        let mut d_big = 0.0;
        for (qn, a) in self.blocks.iter().enumerate() {
            let ta = a.trace().re;
            if ta <= 1e-300 {
                continue;
            }
            let a_log_a = xlogx_sum(a);
            let a_log_rp = log_rp(a);
            for rest in compositions(n - 1, dq) {
                let wr = self.weight(&rest);
                if wr <= 0.0 {
                    continue;
                }
                let mut full = rest.clone();
                full[qn] += 1;
                let t = self.tau_block(&full).trace().re;
                let mult = Self::multiplicity(&rest);
                d_big += mult * wr * (a_log_a + ta * wr.log2() - a_log_rp - ta * t.log2());
            }
        }
        StageInputs { mutual_info: s_p + s_q - s_pq, fidelity: fid.min(1.0), d_big }
    }
}
