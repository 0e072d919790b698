//! The convex-split mixture `τ = (1/n) Σ_j ρ_{PQ_j} ⊗ σ^{⊗(n-1)}` and
//! numerical checks of its decoupling properties.

mod classical;

pub use classical::ClassicalSplit;

use crate::entropies::{dmax_mat, entropy_mat, fidelity_mat, rel_entropy_mat};
use crate::error::{QsrError, Result};
use crate::linalg::eig::eigh;
use crate::linalg::{c, CMat, CVec, DensityOperator, Quantum, RegisterLayout, StateVector};
use serde::Serialize;

/// Default cap on the total dimension of a dense `τ`.
pub const DENSE_CAP: usize = 1 << 10;

#[derive(Debug, Clone)]
pub struct ConvexSplitInstance {
    pub rho_pq: DensityOperator,
    pub sigma_q: DensityOperator,
    pub delta: f64,
    /// `Dmax(ρ_PQ ‖ ρ_P ⊗ σ_Q)` in bits.
    pub k: f64,
    pub n: u64,
    pub n_overridden: bool,
}

/// `1` if `k ≤ 3δ`, else `ceil(8·2^k·log₂(k/δ)/δ³)`.
pub fn lemma_n(k: f64, delta: f64) -> Result<u64> {
    if !(delta > 0.0 && delta < 1.0 / 6.0) {
        return Err(QsrError::OutOfRange(format!("delta = {delta} not in (0, 1/6)")));
    }
    if !(k.is_finite() && k >= 0.0) {
        return Err(QsrError::OutOfRange(format!("k = {k} must be finite and non-negative")));
    }
    if k <= 3.0 * delta {
        return Ok(1);
    }
    let v = 8.0 * k.exp2() * (k / delta).log2() / delta.powi(3);
    Ok(v.ceil() as u64)
}

impl ConvexSplitInstance {
    /// `rho_pq` must have exactly two registers (P then Q); `sigma_q` lives
    /// on a single register with Q's dimension.
    pub fn new(rho_pq: DensityOperator, sigma_q: DensityOperator, delta: f64, n_override: Option<u64>) -> Result<Self> {
        if rho_pq.layout().len() != 2 || sigma_q.layout().len() != 1 {
            return Err(QsrError::InvalidLayout("expected ρ on [P,Q] and σ on [Q]".into()));
        }
        let (dp, dq) = (rho_pq.layout().dims()[0], rho_pq.layout().dims()[1]);
        if sigma_q.dim() != dq {
            return Err(QsrError::LayoutMismatch(format!("σ has dim {}, Q has dim {dq}", sigma_q.dim())));
        }
        let rho_p = ptrace_right(rho_pq.matrix(), dp, dq);
        let k = dmax_mat(rho_pq.matrix(), &rho_p.kronecker(sigma_q.matrix())).max(0.0);
        if !k.is_finite() {
            return Err(QsrError::OutOfRange("Dmax(ρ_PQ‖ρ_P⊗σ_Q) is infinite".into()));
        }
        let formula = lemma_n(k, delta)?;
        let (n, n_overridden) = match n_override {
            Some(0) => return Err(QsrError::OutOfRange("n must be positive".into())),
            Some(v) => (v, true),
            None => (formula, false),
        };
        Ok(Self { rho_pq, sigma_q, delta, k, n, n_overridden })
    }

    pub fn dp(&self) -> usize {
        self.rho_pq.layout().dims()[0]
    }

    pub fn dq(&self) -> usize {
        self.rho_pq.layout().dims()[1]
    }

    fn p_label(&self) -> &str {
        &self.rho_pq.layout().entries()[0].0
    }

    fn q_label(&self) -> &str {
        &self.rho_pq.layout().entries()[1].0
    }

    pub fn q_labels(&self) -> Vec<String> {
        (1..=self.n).map(|j| format!("{}{j}", self.q_label())).collect()
    }

    pub fn rho_p(&self) -> CMat {
        ptrace_right(self.rho_pq.matrix(), self.dp(), self.dq())
    }

    /// Total dimension of `τ`, or `None` on overflow.
    pub fn tau_dim(&self) -> Option<usize> {
        let mut d = self.dp();
        for _ in 0..self.n {
            d = d.checked_mul(self.dq())?;
        }
        Some(d)
    }

    fn with_n(&self, n: u64) -> Self {
        Self { n, n_overridden: true, ..self.clone() }
    }
}

pub(crate) fn ptrace_right(m: &CMat, dl: usize, dr: usize) -> CMat {
    CMat::from_fn(dl, dl, |i, j| (0..dr).map(|t| m[(i * dr + t, j * dr + t)]).sum())
}

fn ptrace_left(m: &CMat, dl: usize, dr: usize) -> CMat {
    CMat::from_fn(dr, dr, |i, j| (0..dl).map(|a| m[(a * dr + i, a * dr + j)]).sum())
}

/// Dense `τ` on `[P, Q1..Qn]`, subject to `cap` on the total dimension.
pub fn build_tau_capped(inst: &ConvexSplitInstance, cap: usize) -> Result<DensityOperator> {
    let d = inst.tau_dim().filter(|&d| d <= cap).ok_or_else(|| {
        QsrError::MemoryCap(format!(
            "τ for n = {} needs dimension {}·{}^{} > {cap}; use the diagnostics path",
            inst.n,
            inst.dp(),
            inst.dq(),
            inst.n
        ))
    })?;
    let n = inst.n as usize;
    let qs = inst.q_labels();
    let p = inst.p_label().to_string();
    let mut order: Vec<&str> = vec![p.as_str()];
    order.extend(qs.iter().map(String::as_str));
    let mut acc = CMat::zeros(d, d);
    for j in 0..n {
        let l = RegisterLayout::new([(p.as_str(), inst.dp()), (qs[j].as_str(), inst.dq())])?;
        let mut term = inst.rho_pq.relabel(l)?;
        for (i, q) in qs.iter().enumerate() {
            if i != j {
                term = term.tensor_with(&inst.sigma_q.relabel(RegisterLayout::single(q, inst.dq())?)?)?;
            }
        }
        acc += term.permuted(&order)?.matrix();
    }
    let layout = RegisterLayout::new(order.iter().map(|l| (*l, if *l == p { inst.dp() } else { inst.dq() })))?;
    DensityOperator::new_unchecked(layout, acc.scale(1.0 / n as f64))
}

pub fn build_tau(inst: &ConvexSplitInstance) -> Result<DensityOperator> {
    build_tau_capped(inst, DENSE_CAP)
}

#[derive(Debug, Clone, Serialize)]
pub struct StageTerms {
    /// `D(ρ_{PQ_n}⊗σ^{⊗(n-1)} ‖ ρ_P⊗τ_{Q^n}) - D(ρ_{PQ_n}‖τ_{PQ_n})`, the
    /// upper bound on `I(P:Q^n)_τ`.
    pub eq1_rhs: f64,
    pub eq1_ok: bool,
    /// `D(ρ_{PQ_n}‖τ_{PQ_n})`.
    pub eq2_lhs: f64,
    /// `D(ρ_{PQ}‖ρ_P⊗σ_Q) - log(1+2^k/n)`.
    pub eq2_rhs: f64,
    pub eq2_ok: bool,
    /// `D(ρ_{PQ_n}⊗σ^{⊗(n-1)} ‖ ρ_P⊗τ_{Q^n})`.
    pub eq3_lhs: f64,
    /// Mixture bound `D(ρ‖ρ_P⊗σ) + Σ_s σ(s) log(n/(|s|2^k+1))`.
    pub eq3_mixture: f64,
    /// `D(ρ‖ρ_P⊗σ) + log(1/(1-δ)) + log(n)·exp(-δ²2^{-k}(n-1)/2)`.
    pub eq3_rhs: f64,
    pub eq3_ok: bool,
    /// Binomial weight of `|s| < (n-1)2^{-k}(1-δ)`.
    pub tail_weight: f64,
    pub tail_bound: f64,
    pub tail_ok: bool,
    /// `log(1/(1-δ)) + log(n)·exp(-δ²2^{-k}(n-1)/2) + log(1+2^k/n)`.
    pub final_bound: f64,
    pub final_ok: bool,
}

impl StageTerms {
    pub fn all_ok(&self) -> bool {
        self.eq1_ok && self.eq2_ok && self.eq3_ok && self.tail_ok && self.final_ok
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SplitReport {
    pub n: u64,
    pub n_overridden: bool,
    pub n_rounding: &'static str,
    pub k: f64,
    pub delta: f64,
    pub mutual_info: f64,
    pub fidelity_sq: f64,
    pub bound_3delta_ok: bool,
    pub bound_6delta_ok: bool,
    /// `F ≥ 2^{-I/2} ≥ 1 - I`.
    pub pinsker_chain_ok: bool,
    pub stage_terms: Option<StageTerms>,
}

fn ln_binom(n: u64, m: u64) -> f64 {
    let lg = |x: u64| (1..=x).map(|i| (i as f64).ln()).sum::<f64>();
    lg(n) - lg(m) - lg(n - m)
}

/// Binomial bookkeeping of the string weights `σ(s)`; returns the mixture
/// term `Σ_s σ(s) log(n/(|s|2^k+1))` and the lower-tail weight.
pub(crate) fn binomial_terms(n: u64, k: f64, delta: f64) -> (f64, f64) {
    if n <= 1 {
        return (0.0, 0.0);
    }
    let p = (-k).exp2();
    let m_tot = n - 1;
    let thr = (m_tot as f64) * p * (1.0 - delta);
    let mut mix = 0.0;
    let mut tail = 0.0;
    for m in 0..=m_tot {
        let w = if p >= 1.0 {
            if m == m_tot { 1.0 } else { 0.0 }
        } else {
            (ln_binom(m_tot, m) + m as f64 * p.ln() + (m_tot - m) as f64 * (1.0 - p).ln()).exp()
        };
        mix += w * ((n as f64) / (m as f64 * k.exp2() + 1.0)).log2();
        if (m as f64) < thr {
            tail += w;
        }
    }
    (mix, tail)
}

/// The n-dependent inputs of the stage check, computed either densely or
/// by type classes.
pub(crate) struct StageInputs {
    pub mutual_info: f64,
    pub fidelity: f64,
    /// `D(ρ_{PQ_n}⊗σ^{⊗(n-1)} ‖ ρ_P⊗τ_{Q^n})`.
    pub d_big: f64,
}

fn dense_inputs(inst: &ConvexSplitInstance) -> Result<StageInputs> {
    let tau = build_tau(inst)?;
    let dp = inst.dp();
    let dqn = tau.dim() / dp;
    let t = tau.matrix();
    let tp = ptrace_right(t, dp, dqn);
    let tq = ptrace_left(t, dp, dqn);
    let mutual_info = entropy_mat(&tp) + entropy_mat(&tq) - entropy_mat(t);
    let fidelity = fidelity_mat(&tp.kronecker(&tq), t);
    // ρ_{PQ_n} ⊗ σ^{⊗(n-1)} on [P, Q1..Qn]
    let n = inst.n as usize;
    let mut big = inst.rho_pq.matrix().clone();
    for _ in 1..n {
        big = big.kronecker(inst.sigma_q.matrix());
    }
    // currently ordered [P, Qn, Q1..Q(n-1)]: move Qn to the back
    let qs = inst.q_labels();
    let mut cur: Vec<(&str, usize)> = vec![(inst.p_label(), dp), (qs[n - 1].as_str(), inst.dq())];
    cur.extend(qs[..n - 1].iter().map(|q| (q.as_str(), inst.dq())));
    let lay = RegisterLayout::new(cur)?;
    let mut order = vec![inst.p_label()];
    order.extend(qs.iter().map(String::as_str));
    let big = DensityOperator::new_unchecked(lay, big)?.permuted(&order)?;
    let d_big = rel_entropy_mat(big.matrix(), &tp.kronecker(&tq));
    Ok(StageInputs { mutual_info, fidelity, d_big })
}

fn stage_inputs(inst: &ConvexSplitInstance) -> Result<StageInputs> {
    // type classes are exact and much cheaper whenever they apply
    if let Some(cs) = ClassicalSplit::try_new(inst) {
        return Ok(cs.inputs(inst.n));
    }
    match inst.tau_dim() {
        Some(d) if d <= DENSE_CAP => dense_inputs(inst),
        _ => Err(QsrError::MemoryCap(format!(
            "n = {} exceeds the dense cap and the instance is not classical on Q",
            inst.n
        ))),
    }
}

fn stage_terms(inst: &ConvexSplitInstance, si: &StageInputs) -> StageTerms {
    let n = inst.n;
    let (dp, dq) = (inst.dp(), inst.dq());
    let rho = inst.rho_pq.matrix();
    let rho_p = inst.rho_p();
    let ref_state = rho_p.kronecker(inst.sigma_q.matrix());
    let d_ref = rel_entropy_mat(rho, &ref_state);
    let nf = n as f64;
    let tau_pqn = rho.scale(1.0 / nf) + ref_state.scale((nf - 1.0) / nf);
    let eq2_lhs = rel_entropy_mat(rho, &tau_pqn);
    let growth = (1.0 + inst.k.exp2() / nf).log2();
    let eq2_rhs = d_ref - growth;
    let eq1_rhs = si.d_big - eq2_lhs;
    let (mix, tail) = binomial_terms(n, inst.k, inst.delta);
    let chern = (-inst.delta.powi(2) * (-inst.k).exp2() * (nf - 1.0) / 2.0).exp();
    let eq3_mixture = d_ref + mix;
    let eq3_rhs = d_ref + (1.0 / (1.0 - inst.delta)).log2() + nf.log2() * chern;
    let final_bound = (1.0 / (1.0 - inst.delta)).log2() + nf.log2() * chern + growth;
    let tol = 1e-8;
    let _ = (dp, dq);
    StageTerms {
        eq1_rhs,
        eq1_ok: si.mutual_info <= eq1_rhs + tol,
        eq2_lhs,
        eq2_rhs,
        eq2_ok: eq2_lhs >= eq2_rhs - tol,
        eq3_lhs: si.d_big,
        eq3_mixture,
        eq3_rhs,
        eq3_ok: si.d_big <= eq3_mixture + tol && eq3_mixture <= eq3_rhs + tol,
        tail_weight: tail,
        tail_bound: chern,
        tail_ok: tail <= chern + tol,
        final_bound,
        final_ok: si.mutual_info <= final_bound + tol,
    }
}

/// Each side of the proof-stage inequalities at the instance's `n`.
pub fn derivation_diagnostics(inst: &ConvexSplitInstance) -> Result<StageTerms> {
    let si = stage_inputs(inst)?;
    Ok(stage_terms(inst, &si))
}

/// Mutual information and product fidelity of `τ`, with the lemma's flags
/// and the proof-stage terms.
pub fn verify_lemma(inst: &ConvexSplitInstance) -> Result<SplitReport> {
    let si = stage_inputs(inst)?;
    let tol = 1e-9;
    let f = si.fidelity;
    let i = si.mutual_info;
    Ok(SplitReport {
        n: inst.n,
        n_overridden: inst.n_overridden,
        n_rounding: "ceil",
        k: inst.k,
        delta: inst.delta,
        mutual_info: i,
        fidelity_sq: f * f,
        bound_3delta_ok: i <= 3.0 * inst.delta + tol,
        bound_6delta_ok: f * f >= 1.0 - 6.0 * inst.delta - tol,
        pinsker_chain_ok: f >= (-i / 2.0).exp2() - tol && f >= 1.0 - i - tol,
        stage_terms: if inst.n > 1 { Some(stage_terms(inst, &si)) } else { None },
    })
}

/// Reports for the same instance at several values of `n`.
pub fn sweep_n(inst: &ConvexSplitInstance, ns: &[u64]) -> Result<Vec<SplitReport>> {
    ns.iter().map(|&n| verify_lemma(&inst.with_n(n))).collect()
}

/// `(1/√n) Σ_j |j⟩_M |κ⟩_{S E_j P Q_j} ⊗_{i≠j} |σ⟩_{E_i Q_i}` on
/// `[M, S, E1..En, P.., Q1..Qn]`.
///
/// `kappa` is on `[S, E, P.., Q]` and `sigma` on `[E, Q]` with the given
/// register names.
pub fn mixture_purification(
    kappa: &StateVector,
    sigma: &StateVector,
    e: &str,
    q: &str,
    n: usize,
    m_label: &str,
) -> Result<StateVector> {
    if n == 0 {
        return Err(QsrError::OutOfRange("n must be positive".into()));
    }
    let kl = kappa.layout();
    let de = kl.dim_of(e)?;
    let dq = kl.dim_of(q)?;
    if sigma.layout().dims() != vec![de, dq] || sigma.layout().labels() != vec![e, q] {
        return Err(QsrError::LayoutMismatch(format!("σ purification must be on [{e}:{de},{q}:{dq}]")));
    }
    let es: Vec<String> = (1..=n).map(|j| format!("{e}{j}")).collect();
    let qs: Vec<String> = (1..=n).map(|j| format!("{q}{j}")).collect();
    let s_labels: Vec<&str> = kl.labels().into_iter().filter(|l| *l != e && *l != q).collect();
    // S first, then the Es, then the Ps, then the Qs
    let s_label = s_labels[0];
    let p_labels = &s_labels[1..];
    let mut order: Vec<&str> = vec![s_label];
    order.extend(es.iter().map(String::as_str));
    order.extend(p_labels.iter().copied());
    order.extend(qs.iter().map(String::as_str));
    let mut blocks = Vec::with_capacity(n);
    for j in 0..n {
        let lay = kl.rename(e, &es[j])?.rename(q, &qs[j])?;
        let mut v = kappa.relabel(lay)?;
        for i in 0..n {
            if i != j {
                let sl = RegisterLayout::new([(es[i].as_str(), de), (qs[i].as_str(), dq)])?;
                v = v.tensor_with(&sigma.relabel(sl)?)?;
            }
        }
        blocks.push(v.permuted(&order)?);
    }
    let layout = RegisterLayout::single(m_label, n)?.concat(blocks[0].layout())?;
    let w = c(1.0 / (n as f64).sqrt());
    let amps = CVec::from_iterator(layout.total_dim(), blocks.iter().flat_map(|b| b.amplitudes().iter().map(move |z| z * w)));
    StateVector::new_unchecked(layout, amps)
}

/// Purification of `τ` on `[M, S, E1..En, P, Q1..Qn]` built from the
/// canonical purifications of `ρ_PQ` (ancilla split as `S ⊗ E`) and `σ_Q`.
pub fn canonical_purification_of_tau(inst: &ConvexSplitInstance) -> Result<StateVector> {
    let n = inst.n as usize;
    let (dp, dq) = (inst.dp(), inst.dq());
    let rough = (n as f64) * ((dp * dq) as f64).powi(2) * ((dq * dq) as f64).powi(n as i32 - 1);
    if rough > (1u64 << 22) as f64 {
        return Err(QsrError::MemoryCap(format!("purification of τ for n = {n} is too large")));
    }
    let ksv = crate::linalg::state::purify_with_dim(&inst.rho_pq, "SE", dp * dq)?;
    let lay = ksv.layout().split("SE", &[("S", dp), ("E", dq)])?;
    let ksv = ksv.relabel(lay)?;
    let p = inst.p_label().to_string();
    let q = inst.q_label().to_string();
    let ksv = ksv.permuted(&["S", "E", p.as_str(), q.as_str()])?;
    let sq = crate::linalg::state::purify_with_dim(&inst.sigma_q, "E", dq)?;
    let sq = sq.permuted(&["E", q.as_str()])?;
    mixture_purification(&ksv, &sq, "E", &q, n, "M")
}

/// `τ_{PQ_n}` and its operator upper bound `(1+2^k/n) ρ_P⊗σ`; returns the
/// smallest eigenvalue of the difference.
pub fn operator_bound_margin(inst: &ConvexSplitInstance) -> f64 {
    let nf = inst.n as f64;
    let r = inst.rho_p().kronecker(inst.sigma_q.matrix());
    let tau = inst.rho_pq.matrix().scale(1.0 / nf) + r.scale((nf - 1.0) / nf);
    let diff = r.scale(1.0 + inst.k.exp2() / nf) - tau;
    eigh(&diff).0.last().copied().unwrap_or(0.0)
}
