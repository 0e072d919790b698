//! Redistribution protocol simulated on explicit state vectors, and state
//! splitting and merging built from it.
//!
//! The convex-split state `μ` is purified on `[M, S, E1..En, R, B, F1..Fn]`
//! with `F_j ≅ CT`. Alice starts from `Ψ ⊗ θ`, where `θ` on `E1..En F1..Fn`
//! purifies `μ_{F1..Fn}`, rotates her registers onto `μ` with an Uhlmann
//! isometry `V'`, then runs the inner protocol: measure `M` and send the
//! outcome `j`, swap `E_j ↔ E_1` and `F_j ↔ F_1`, Bob applies `U` on
//! `B F_1`, Alice applies the Uhlmann isometry `V: S E_1 → A T'`.

mod uhlmann;

pub use uhlmann::{pure_close_extension, uhlmann_isometry};

use std::collections::BTreeMap;

use crate::convex_split::mixture_purification;
use crate::entropies::{dmax_mat, fidelity, pd_from_fidelity, smooth, SmoothOptions, SmoothQuantity};
use crate::error::{QsrError, Result};
use crate::linalg::random::{derive_seed, rng_from_seed};
use crate::linalg::state::{permute_vec, purify_with_dim};
use crate::linalg::{c, kron, CMat, CVec, DensityOperator, IsometryMap, Quantum, RegisterLayout, StateVector};
use crate::qeps::{check_feasible, qeps_upper, standard_form, FeasiblePoint, QepsOptions};
use rand::Rng;
use serde::Serialize;
use uhlmann::{bipartite, from_bipartite, uhlmann_core, Uhlmann};

/// Largest state vector a simulation may allocate, in amplitudes.
pub const DEFAULT_AMPLITUDE_CAP: usize = 1 << 21;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SuperdenseCost {
    pub real_qubits: f64,
    pub operational_qubits: u64,
    pub bell_pairs: u64,
}

/// Cost of sending one of `n` outcomes by superdense coding.
pub fn superdense_cost(n: u64) -> Result<SuperdenseCost> {
    if n == 0 {
        return Err(QsrError::OutOfRange("n must be positive".into()));
    }
    let bits = if n == 1 { 0 } else { 64 - u64::from((n - 1).leading_zeros()) };
    let op = bits.div_ceil(2);
    Ok(SuperdenseCost { real_qubits: (n as f64).log2() / 2.0, operational_qubits: op, bell_pairs: op })
}

#[derive(Debug, Clone)]
pub struct RedistributionInput {
    /// Pure state on `[R, A, B, C]` (missing `A` or `B` are taken trivial).
    pub psi: StateVector,
    pub eps: f64,
    /// Found with the optimizer when absent.
    pub achieving_point: Option<FeasiblePoint>,
    pub n_override: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum MeasurementMode {
    /// Outcomes of `M` kept as the exact mixture.
    Channel,
    /// One outcome drawn with its Born weight.
    Sampled,
}

#[derive(Debug, Clone, Copy)]
pub struct ProtocolOptions {
    pub qeps: QepsOptions,
    pub amplitude_cap: usize,
    pub mode: MeasurementMode,
    pub seed: u64,
}

impl Default for ProtocolOptions {
    fn default() -> Self {
        Self {
            qeps: QepsOptions { restarts: 2, iterations: 200, ..QepsOptions::default() },
            amplitude_cap: DEFAULT_AMPLITUDE_CAP,
            mode: MeasurementMode::Channel,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Party {
    Alice,
    Bob,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ProtocolKind {
    Redistribute,
    Split,
    Merge,
}

#[derive(Debug, Clone, Serialize)]
pub struct Step {
    pub name: String,
    pub party: Party,
    pub registers: Vec<String>,
}

/// Splitting budget `½·Imax + loglog + constant`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SplitBudget {
    pub smooth_imax: f64,
    pub loglog: f64,
    /// `3·log₂(1/ε) + 5`.
    pub constant: f64,
    pub total: f64,
    pub within: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ProtocolTranscript {
    pub kind: ProtocolKind,
    pub eps: f64,
    /// Number of convex-split copies simulated.
    pub n: u64,
    /// Copies the construction asks for at this `k`.
    pub n_theory: f64,
    /// `n < n_theory` because of the amplitude cap.
    pub n_capped: bool,
    /// `Dmax(κ ‖ κ_RB ⊗ σ_CT)` at the achieving point.
    pub k: f64,
    pub t_dim: usize,
    /// `k ≤ ε²/2`, where a single copy suffices and nothing is sent.
    pub decoupled: bool,
    pub steps: Vec<Step>,
    pub comm_qubits: f64,
    pub comm_qubits_operational: u64,
    pub bell_pairs: u64,
    /// Pre-shared registers and their dimensions.
    pub entanglement_dims: BTreeMap<String, usize>,
    #[serde(skip)]
    pub output: DensityOperator,
    pub output_fidelity_sq: f64,
    pub output_distance: f64,
    pub in_ball_2eps: bool,
    pub in_ball_3eps: bool,
    /// Distance at the achieving point.
    pub point_distance: f64,
    /// `F²(Ψ_RB ⊗ μ_F, μ_RBF)`.
    pub convex_split_fidelity_sq: f64,
    /// `F²(Φ, Φ¹)` with `Φ¹` the inner protocol run on `μ` itself.
    pub wrapper_fidelity_sq: f64,
    /// `F²(Φ¹, Ψ)`.
    pub ideal_fidelity_sq: f64,
    /// `F²(Φ, Φ¹) ≥ convex_split_fidelity_sq`.
    pub wrapper_ok: bool,
    /// `F²(Φ¹, Ψ) ≥ 1 − point_distance²`.
    pub ideal_ok: bool,
    /// `P(Φ, Ψ) ≤ P(Φ, Φ¹) + P(Φ¹, Ψ)`.
    pub triangle_ok: bool,
    /// Largest deviation of the squared norm from one over all steps.
    pub max_trace_defect: f64,
    pub sampled_outcome: Option<usize>,
    pub budget: Option<SplitBudget>,
    /// Merge only: overlap of the reversed run with the split's initial
    /// global state. Equals the split's output fidelity.
    pub global_fidelity_sq: Option<f64>,
}

fn check_eps(eps: f64) -> Result<()> {
    if !(eps > 0.0 && eps < 1.0 / 3.0) {
        return Err(QsrError::OutOfRange(format!("eps = {eps} not in (0, 1/3)")));
    }
    Ok(())
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn labels(prefix: &str, n: usize) -> Vec<String> {
    (1..=n).map(|j| format!("{prefix}{j}")).collect()
}

fn refs(v: &[String]) -> Vec<&str> {
    v.iter().map(String::as_str).collect()
}

fn lay(e: &[(&str, usize)]) -> Result<RegisterLayout> {
    RegisterLayout::new(e.iter().copied())
}

/// Register dimensions of one simulation.
#[derive(Debug, Clone, Copy)]
struct Dims {
    dr: usize,
    da: usize,
    db: usize,
    dc: usize,
    dt: usize,
    /// `F ≅ CT`; also the dimension of every `E`.
    df: usize,
    ds: usize,
    n: usize,
    /// Pad on the target side of `V'` so that its source divides it.
    dj: usize,
    /// Input ancilla of the unitary completing `V'`.
    dk1: usize,
    /// `T'`, padded so that `A T'` is a multiple of `S E`.
    dtp: usize,
    dk2: usize,
}

impl Dims {
    fn new(dr: usize, da: usize, db: usize, dc: usize, dt: usize, ds: usize, n: usize) -> Self {
        let df = dc * dt;
        let (src, tgt) = (da * dc, n * ds);
        let l = src / gcd(src, tgt) * tgt;
        let base = ds * df;
        let mut m = dt.max(base.div_ceil(da));
        while (da * m) % base != 0 {
            m += 1;
        }
        Self { dr, da, db, dc, dt, df, ds, n, dj: l / tgt, dk1: l / src, dtp: m, dk2: da * m / base }
    }

    /// Largest vector the run allocates (saturating).
    fn amplitudes(&self) -> usize {
        let pow = (0..self.n).fold(1usize, |a, _| a.saturating_mul(self.df));
        let mu = [self.n, self.ds, self.dj, self.dr, self.db, pow, pow].iter().fold(1usize, |a, &x| a.saturating_mul(x));
        let fin = (mu / (self.ds * self.df)).saturating_mul(self.da * self.dtp);
        mu.max(fin)
    }
}

/// One run of the protocol, kept whole so that merging can reverse it.
struct Simulation {
    d: Dims,
    k: f64,
    n_theory: f64,
    n_capped: bool,
    /// `Ψ ⊗ θ`.
    xi: StateVector,
    v_prime: Uhlmann,
    v: Uhlmann,
    /// `U` on `[B, F1]`.
    u: IsometryMap,
    /// Global state after the inner protocol, from `V'ξ` and from `μ`.
    actual: StateVector,
    ideal: StateVector,
    phi: DensityOperator,
    phi1: DensityOperator,
    cs_fidelity: f64,
    max_trace_defect: f64,
    sampled: Option<usize>,
}

fn defect(s: &StateVector) -> f64 {
    (s.amplitudes().norm_squared() - 1.0).abs()
}

/// `μ_{F1..Fn} = (1/n) Σ_j σ ⊗ .. ⊗ κ_F (at j) ⊗ .. ⊗ σ`.
fn mixture_marginal(kf: &CMat, sigma: &CMat, n: usize) -> CMat {
    let d = kf.nrows().pow(n as u32);
    let mut acc = CMat::zeros(d, d);
    for j in 0..n {
        let mut m = CMat::identity(1, 1);
        for i in 0..n {
            m = kron(&m, if i == j { kf } else { sigma });
        }
        acc += m;
    }
    acc.scale(1.0 / n as f64)
}

/// Applies the outcome-controlled swaps `E_j ↔ E_1`, `F_j ↔ F_1`. In
/// sampled mode only the drawn block survives, renormalized.
fn controlled_swaps(st: StateVector, n: usize, sample: Option<f64>) -> Result<(StateVector, Option<usize>)> {
    let mut order = vec!["M"];
    order.extend(st.layout().complement(&["M"]));
    let st = st.permuted(&order)?;
    let layout = st.layout().clone();
    let inner = layout.select(&order[1..])?;
    let block = st.dim() / n;
    let mut amps = st.into_amplitudes();
    let mut drawn = None;
    if let Some(u) = sample {
        let w: Vec<f64> = (0..n).map(|j| amps.rows(j * block, block).norm_squared()).collect();
        let total: f64 = w.iter().sum();
        let mut acc = 0.0;
        let mut pick = n - 1;
        for (j, x) in w.iter().enumerate() {
            acc += x / total;
            if u < acc {
                pick = j;
                break;
            }
        }
        let s = c(1.0 / w[pick].sqrt());
        for j in 0..n {
            let mut b = amps.rows_mut(j * block, block);
            if j == pick {
                b *= s;
            } else {
                b.fill(c(0.0));
            }
        }
        drawn = Some(pick);
    }
    let names = inner.labels();
    for j in 1..n {
        if drawn.is_some_and(|p| p != j) {
            continue;
        }
        let (ej, fj) = (format!("E{}", j + 1), format!("F{}", j + 1));
        let sw: Vec<&str> = names
            .iter()
            .map(|&l| match l {
                "E1" => ej.as_str(),
                "F1" => fj.as_str(),
                x if x == ej => "E1",
                x if x == fj => "F1",
                x => x,
            })
            .collect();
        let b = CVec::from_column_slice(amps.rows(j * block, block).as_slice());
        let p = permute_vec(&inner, &b, &sw)?;
        amps.rows_mut(j * block, block).copy_from(&p);
    }
    Ok((StateVector::new_unchecked(layout, amps)?, drawn))
}

impl Simulation {
    fn run(
        s: &StateVector,
        eps: f64,
        point: &FeasiblePoint,
        n_override: Option<u64>,
        opts: &ProtocolOptions,
        complete: bool,
    ) -> Result<Self> {
        let sd = s.layout().dims();
        let (dr, da, db, dc) = (sd[0], sd[1], sd[2], sd[3]);
        let dt = point.t_dim;
        let df = dc * dt;
        let kappa = point.kappa.permuted(&["R", "B", "C", "T"])?;
        let krb = kappa.marginal(&["R", "B"])?;
        let sct = point.sigma_ct.permuted(&["C", "T"])?;
        let k = dmax_mat(kappa.matrix(), &krb.matrix().kronecker(sct.matrix())).max(0.0);
        if !k.is_finite() {
            return Err(QsrError::Solver("κ is not dominated by κ_RB ⊗ σ_CT".into()));
        }
        let delta = eps * eps / 4.0;
        let n_theory = if k <= 2.0 * delta { 1.0 } else { (8.0 * k.exp2() * (k / delta).log2() / delta.powi(3)).ceil() };

        let rank = kappa.eigenvalues().iter().filter(|&&v| v > 1e-14).count().max(1);
        let ds = rank.div_ceil(df);
        let dims = |n: usize| Dims::new(dr, da, db, dc, dt, ds, n);
        let cap = opts.amplitude_cap;
        let (n, n_capped) = match n_override {
            Some(0) => return Err(QsrError::OutOfRange("n must be positive".into())),
            Some(v) => {
                let v = usize::try_from(v).map_err(|_| QsrError::MemoryCap(format!("n = {v}")))?;
                if dims(v).amplitudes() > cap {
                    return Err(QsrError::MemoryCap(format!("n = {v} needs {} amplitudes (cap {cap})", dims(v).amplitudes())));
                }
                (v, false)
            }
            None => {
                if dims(1).amplitudes() > cap {
                    return Err(QsrError::MemoryCap(format!("a single copy needs {} amplitudes (cap {cap})", dims(1).amplitudes())));
                }
                let mut n = 1usize;
                while ((n + 1) as f64) <= n_theory && dims(n + 1).amplitudes() <= cap {
                    n += 1;
                }
                (n, (n as f64) < n_theory)
            }
        };
        let d = dims(n);

        // purifications of κ on [S, E, R, B, F] and of σ_CT on [E, F]
        let ksv = purify_with_dim(&kappa, "SE", ds * df)?;
        let kl = ksv.layout().split("SE", &[("S", ds), ("E", df)])?.merge(&["C", "T"], "F")?;
        let ksv = ksv.relabel(kl)?.permuted(&["S", "E", "R", "B", "F"])?;
        let spur = purify_with_dim(&sct, "E", df)?;
        let spur = spur.relabel(spur.layout().merge(&["C", "T"], "F")?)?.permuted(&["E", "F"])?;

        let es = labels("E", n);
        let fs = labels("F", n);
        let mu = mixture_purification(&ksv, &spur, "E", "F", n, "M")?
            .tensor_with(&StateVector::basis(RegisterLayout::single("J", d.dj)?, 0)?)?;

        let kf = kappa.marginal(&["C", "T"])?.permuted(&["C", "T"])?;
        let mu_f = mixture_marginal(kf.matrix(), sct.matrix(), n);
        let fl = RegisterLayout::new(fs.iter().map(|l| (l.as_str(), df)))?;
        let theta = purify_with_dim(&DensityOperator::new_unchecked(fl, mu_f)?, "EE", df.pow(n as u32))?;
        let parts: Vec<(&str, usize)> = es.iter().map(|l| (l.as_str(), df)).collect();
        let theta = theta.relabel(theta.layout().split("EE", &parts)?)?;
        let xi = s.tensor_with(&theta)?;

        let mut fixed = vec!["R", "B"];
        fixed.extend(refs(&fs));
        let (x, _) = bipartite(&xi, &fixed)?;
        let (y, rest_y) = bipartite(&mu, &fixed)?;
        let v_prime = uhlmann_core(&x, &y, complete)?;
        let fixed_layout = xi.layout().select(&fixed)?;
        let start = from_bipartite(&(&x * v_prime.isometry.transpose()), &fixed_layout, &rest_y)?;
        let mu = from_bipartite(&y, &fixed_layout, &rest_y)?;

        // V from the ideal post-U state against Ψ ⊗ |σ'⟩_{T T'}
        let u_bf = point.u_bct.with_layouts(lay(&[("B", db), ("F", df)])?, lay(&[("B", db), ("F", df)])?)?;
        let rho = ksv.transformed(&u_bf)?;
        let rho = rho.relabel(rho.layout().split("F", &[("C", dc), ("T", dt)])?)?;
        let sp = purify_with_dim(&point.sigma_prime.permuted(&["T"])?, "Tp", d.dtp)?;
        let target = s.tensor_with(&sp)?;
        let rbct = ["R", "B", "C", "T"];
        let (x2, _) = bipartite(&rho, &rbct)?;
        let (y2, _) = bipartite(&target, &rbct)?;
        let v = uhlmann_core(&x2, &y2, complete)?;

        let u = point.u_bct.with_layouts(lay(&[("B", db), ("F1", df)])?, lay(&[("B", db), ("F1", df)])?)?;
        let mut sim = Simulation {
            d,
            k,
            n_theory,
            n_capped,
            xi,
            v_prime,
            v,
            u,
            actual: mu.clone(),
            ideal: mu.clone(),
            phi: DensityOperator::maximally_mixed(RegisterLayout::empty()),
            phi1: DensityOperator::maximally_mixed(RegisterLayout::empty()),
            cs_fidelity: 0.0,
            max_trace_defect: defect(&start).max(defect(&mu)),
            sampled: None,
        };
        sim.cs_fidelity = sim.v_prime.fidelity;
        let sample = match opts.mode {
            MeasurementMode::Channel => None,
            MeasurementMode::Sampled => Some(rng_from_seed(derive_seed(opts.seed, 2)).gen::<f64>()),
        };
        let (actual, drawn) = sim.inner(start, sample)?;
        let (ideal, _) = sim.inner(mu, None)?;
        sim.phi = sim.output(&actual)?;
        sim.phi1 = sim.output(&ideal)?;
        sim.actual = actual;
        sim.ideal = ideal;
        sim.sampled = drawn;
        Ok(sim)
    }

    fn v_map(&self) -> Result<IsometryMap> {
        let d = &self.d;
        IsometryMap::new_unchecked(
            lay(&[("S", d.ds), ("E1", d.df)])?,
            lay(&[("A", d.da), ("Tp", d.dtp)])?,
            self.v.isometry.clone(),
        )
    }

    /// Swaps, `U` and `V` on a state over `[R, B, F.., M, S, E.., J]`.
    fn inner(&mut self, st: StateVector, sample: Option<f64>) -> Result<(StateVector, Option<usize>)> {
        let (st, drawn) = controlled_swaps(st, self.d.n, sample)?;
        self.max_trace_defect = self.max_trace_defect.max(defect(&st));
        let st = st.transformed(&self.u)?;
        self.max_trace_defect = self.max_trace_defect.max(defect(&st));
        let st = st.transformed(&self.v_map()?)?;
        self.max_trace_defect = self.max_trace_defect.max(defect(&st));
        let st = st.relabel(st.layout().split("F1", &[("C", self.d.dc), ("T", self.d.dt)])?)?;
        Ok((st, drawn))
    }

    fn output(&self, fin: &StateVector) -> Result<DensityOperator> {
        fin.marginal(&["R", "A", "B", "C"])?.permuted(&["R", "A", "B", "C"])
    }

    /// Runs the unitary completion of every step backwards on a state over
    /// the final registers. Requires a run with `complete = true`.
    fn reverse(&self, st: StateVector) -> Result<StateVector> {
        let d = &self.d;
        let missing = || QsrError::Solver("unitary completion unavailable".into());
        let uv = self.v.unitary.as_ref().ok_or_else(missing)?;
        let uvp = self.v_prime.unitary.as_ref().ok_or_else(missing)?;
        let mut order: Vec<&str> = vec!["C", "T"];
        order.extend(st.layout().complement(&["C", "T"]));
        let st = st.permuted(&order)?;
        let st = st.relabel(st.layout().merge(&["C", "T"], "F1")?)?;
        let back_v = IsometryMap::new_unchecked(
            lay(&[("A", d.da), ("Tp", d.dtp)])?,
            lay(&[("K2", d.dk2), ("S", d.ds), ("E1", d.df)])?,
            uv.adjoint(),
        )?;
        let st = st.transformed(&back_v)?;
        let back_u = IsometryMap::new_unchecked(self.u.output_layout().clone(), self.u.input_layout().clone(), self.u.matrix().adjoint())?;
        let st = st.transformed(&back_u)?;
        let (st, _) = controlled_swaps(st, d.n, None)?;
        let es = labels("E", d.n);
        let mut tgt = vec![("M", d.n), ("S", d.ds)];
        tgt.extend(es.iter().map(|l| (l.as_str(), d.df)));
        tgt.push(("J", d.dj));
        let mut src = vec![("K1", d.dk1), ("A", d.da), ("C", d.dc)];
        src.extend(es.iter().map(|l| (l.as_str(), d.df)));
        let back_vp = IsometryMap::new_unchecked(lay(&tgt)?, lay(&src)?, uvp.adjoint())?;
        st.transformed(&back_vp)
    }
}

fn steps(n: usize, merge: bool) -> Vec<Step> {
    let es = labels("E", n);
    let fs = labels("F", n);
    let step = |name: &str, party: Party, regs: Vec<String>| Step { name: name.into(), party, registers: regs };
    let mut alice_v = vec!["A".to_string(), "C".to_string()];
    alice_v.extend(es.iter().cloned());
    let mut swap = es.clone();
    swap.extend(fs.iter().cloned());
    let forward = vec![
        step("share θ", Party::Both, swap.clone()),
        step("isometry V'", Party::Alice, alice_v),
        step("measure M and send j", Party::Alice, vec!["M".into()]),
        step("swap E_j and E_1", Party::Alice, es.clone()),
        step("swap F_j and F_1", Party::Bob, fs.clone()),
        step("unitary U", Party::Bob, vec!["B".into(), "F1".into()]),
        step("isometry V", Party::Alice, vec!["S".into(), "E1".into()]),
    ];
    if !merge {
        return forward;
    }
    // time reversal; the sender of the merge is the receiver of the split
    let flip = |p: Party| match p {
        Party::Alice => Party::Bob,
        Party::Bob => Party::Alice,
        Party::Both => Party::Both,
    };
    let mut out = vec![
        step("share split output with Uhlmann partner", Party::Both, Vec::new()),
    ];
    for st in forward.into_iter().skip(1).rev() {
        out.push(Step { name: format!("inverse of {}", st.name), party: flip(st.party), registers: st.registers });
    }
    out
}

fn assemble(kind: ProtocolKind, sim: &Simulation, psi: &StateVector, eps: f64, point: &FeasiblePoint) -> Result<ProtocolTranscript> {
    let psi_d = psi.to_density();
    let f_out = fidelity(&sim.phi, &psi_d)?;
    let f_w = fidelity(&sim.phi, &sim.phi1)?;
    let f_i = fidelity(&sim.phi1, &psi_d)?;
    let (p_out, p_w, p_i) = (pd_from_fidelity(f_out), pd_from_fidelity(f_w), pd_from_fidelity(f_i));
    let n = sim.d.n as u64;
    let cost = superdense_cost(n)?;
    let mut ent = BTreeMap::new();
    for (e, f) in labels("E", sim.d.n).into_iter().zip(labels("F", sim.d.n)) {
        ent.insert(e, sim.d.df);
        ent.insert(f, sim.d.df);
    }
    Ok(ProtocolTranscript {
        kind,
        eps,
        n,
        n_theory: sim.n_theory,
        n_capped: sim.n_capped,
        k: sim.k,
        t_dim: sim.d.dt,
        decoupled: sim.n_theory <= 1.0,
        steps: steps(sim.d.n, false),
        comm_qubits: cost.real_qubits,
        comm_qubits_operational: cost.operational_qubits,
        bell_pairs: cost.bell_pairs,
        entanglement_dims: ent,
        output: sim.phi.clone(),
        output_fidelity_sq: f_out * f_out,
        output_distance: p_out,
        in_ball_2eps: p_out <= 2.0 * eps + 1e-6,
        in_ball_3eps: p_out <= 3.0 * eps + 1e-6,
        point_distance: point.distance,
        convex_split_fidelity_sq: sim.cs_fidelity * sim.cs_fidelity,
        wrapper_fidelity_sq: f_w * f_w,
        ideal_fidelity_sq: f_i * f_i,
        wrapper_ok: f_w * f_w >= sim.cs_fidelity * sim.cs_fidelity - 1e-6,
        ideal_ok: f_i * f_i >= 1.0 - point.distance * point.distance - 1e-6,
        triangle_ok: p_out <= p_w + p_i + 1e-8,
        max_trace_defect: sim.max_trace_defect,
        sampled_outcome: sim.sampled,
        budget: None,
        global_fidelity_sq: None,
    })
}

fn achieving_point(s: &StateVector, input: &RedistributionInput, opts: &ProtocolOptions) -> Result<FeasiblePoint> {
    let point = match &input.achieving_point {
        Some(p) => p.clone(),
        None => {
            let q = QepsOptions { seed: derive_seed(opts.seed, 1), ..opts.qeps };
            qeps_upper(s, input.eps, &q)?.feasible_point
        }
    };
    let (pd, res) = check_feasible(s, &point)?;
    if pd > input.eps + 1e-6 || res > 1e-8 {
        return Err(QsrError::Infeasible(format!("achieving point violates its constraints: distance {pd:.3e}, marginal residual {res:.3e}")));
    }
    Ok(point)
}

/// Simulates the redistribution protocol for `input.psi`.
pub fn redistribute(input: &RedistributionInput, opts: &ProtocolOptions) -> Result<ProtocolTranscript> {
    check_eps(input.eps)?;
    let s = standard_form(&input.psi)?;
    let point = achieving_point(&s, input, opts)?;
    let sim = Simulation::run(&s, input.eps, &point, input.n_override, opts, false)?;
    assemble(ProtocolKind::Redistribute, &sim, &s, input.eps, &point)
}

/// `(loglog term, constant, total)` of the splitting budget.
pub fn split_budget(smooth_imax: f64, eps: f64) -> (f64, f64, f64) {
    let x = 4.0 * smooth_imax.max(0.0) / (eps * eps);
    let loglog = if x > 2.0 { 0.5 * x.log2().log2() } else { 0.0 };
    let constant = 3.0 * (1.0 / eps).log2() + 5.0;
    (loglog, constant, smooth_imax / 2.0 + loglog + constant)
}

fn no_b(psi: &StateVector, reg: &str) -> Result<()> {
    if psi.layout().contains(reg) && psi.layout().dim_of(reg)? != 1 {
        return Err(QsrError::InvalidLayout(format!("register {reg} must be absent or trivial")));
    }
    Ok(())
}

/// State splitting: Alice holds `A C`, Bob nothing; `psi` on `[R, A, C]`.
pub fn split(psi: &StateVector, eps: f64, opts: &ProtocolOptions) -> Result<ProtocolTranscript> {
    check_eps(eps)?;
    no_b(psi, "B")?;
    let s = standard_form(psi)?;
    let input = RedistributionInput { psi: s.clone(), eps, achieving_point: None, n_override: None };
    let mut t = redistribute(&input, opts)?;
    t.kind = ProtocolKind::Split;
    let rc = s.marginal(&["R", "C"])?;
    let so = SmoothOptions { restarts: 2, iterations: 200, seed: derive_seed(opts.seed, 3) };
    let sm = smooth(SmoothQuantity::Imax, &rc, &["R"], &["C"], eps, so)?.value;
    let (loglog, constant, total) = split_budget(sm, eps);
    t.budget = Some(SplitBudget { smooth_imax: sm, loglog, constant, total, within: t.comm_qubits <= total + 1e-9 });
    Ok(t)
}

/// Swaps the names of `A` and `B` on a state in standard form.
fn swap_ab(s: &StateVector) -> Result<StateVector> {
    let d = s.layout().dims();
    let l = lay(&[("R", d[0]), ("B", d[1]), ("A", d[2]), ("C", d[3])])?;
    s.relabel(l)?.permuted(&["R", "A", "B", "C"])
}

/// State merging: Alice holds `C`, Bob holds `B`; `psi` on `[R, B, C]`.
/// Runs the splitting protocol for the state with `B` renamed `A`
/// backwards, starting from its output and the Uhlmann partner of `Ψ`.
pub fn merge(psi: &StateVector, eps: f64, opts: &ProtocolOptions) -> Result<ProtocolTranscript> {
    check_eps(eps)?;
    no_b(psi, "A")?;
    let s = standard_form(psi)?;
    let s_split = swap_ab(&s)?;
    let input = RedistributionInput { psi: s_split.clone(), eps, achieving_point: None, n_override: None };
    let point = achieving_point(&s_split, &input, opts)?;
    let channel = ProtocolOptions { mode: MeasurementMode::Channel, ..*opts };
    let sim = Simulation::run(&s_split, eps, &point, None, &channel, true)?;
    let mut t = assemble(ProtocolKind::Merge, &sim, &s_split, eps, &point)?;

    // Uhlmann partner of Ψ in the split's final global state
    let rabc = ["R", "A", "B", "C"];
    let (x, rest) = bipartite(&sim.actual, &rabc)?;
    let psi_row = s_split.amplitudes().adjoint();
    let partner = &psi_row * &x;
    let norm = partner.norm();
    if norm < 1e-12 {
        return Err(QsrError::Solver("split output is orthogonal to Ψ".into()));
    }
    let start_m = s_split.amplitudes() * partner.map(|z| z / c(norm));
    let start = from_bipartite(&start_m, s_split.layout(), &rest)?;
    let end = sim.reverse(start)?;

    let reference = sim
        .xi
        .tensor_with(&StateVector::basis(RegisterLayout::single("K1", sim.d.dk1)?, 0)?)?
        .tensor_with(&StateVector::basis(RegisterLayout::single("K2", sim.d.dk2)?, 0)?)?;
    let ro: Vec<&str> = reference.layout().labels();
    let global = reference.inner(&end.permuted(&ro)?)?.norm_sqr();

    let phi = end.marginal(&rabc)?.permuted(&rabc)?;
    let d = phi.layout().dims();
    let phi = phi.relabel(lay(&[("R", d[0]), ("B", d[1]), ("A", d[2]), ("C", d[3])])?)?.permuted(&rabc)?;
    let f = fidelity(&phi, &s.to_density())?;
    let p = pd_from_fidelity(f);
    t.output = phi;
    t.output_fidelity_sq = f * f;
    t.output_distance = p;
    t.in_ball_2eps = p <= 2.0 * eps + 1e-6;
    t.in_ball_3eps = p <= 3.0 * eps + 1e-6;
    t.global_fidelity_sq = Some(global);
    t.max_trace_defect = t.max_trace_defect.max((end.amplitudes().norm_squared() - 1.0).abs());
    t.steps = steps(sim.d.n, true);
    Ok(t)
}
