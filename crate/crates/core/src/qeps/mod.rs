//! Estimates of the redistribution quantity
//!
//! ```text
//! Q^ε(Ψ) = inf Imax(RB:CT)_κ
//! ```
//!
//! over a register `T`, a unitary `U` on `BCT`, a state `σ'_T` and an
//! extension `κ_RBCT` of `Ψ_RB` such that `(I⊗U)κ(I⊗U†)` lies within
//! purified distance ε of `Ψ_RBC ⊗ σ'_T`.
//!
//! The upper estimate searches over feasible points only: κ is produced by
//! an isometry acting on the purifying side `AC` of `Ψ_RB`, so `κ_RB = Ψ_RB`
//! holds by construction, and candidates outside the ball are rejected.

mod diagnostics;

pub use diagnostics::{
    budget_formula, copies,
    asymptotic_diagnostic, bound_suite, qprime_decomposition, splitting_identity_check, AsymptoticRow,
    BoundReport, QprimeReport, SplittingReport,
};

use crate::entropies::maxinfo::imax_mat;
use crate::entropies::sdp::SdpSolution;
use crate::entropies::{fidelity_mat, fidelity_of_recovery, pd_from_fidelity, RecoveryMethod};
use crate::error::{QsrError, Result};
use crate::linalg::random::{derive_seed, gaussian_c64, rng_from_seed, QsrRng};
use crate::linalg::{c, CMat, DensityOperator, IsometryMap, Quantum, RegisterLayout, StateVector};
use crate::search::{minimize, perturb_unitary, SearchBudget};
use rand::Rng;

/// Largest register `T` the optimizer accepts unless told otherwise.
pub const DEFAULT_T_CAP: usize = 4;

#[derive(Debug, Clone, Copy)]
pub struct QepsOptions {
    pub t_dim: usize,
    pub t_cap: usize,
    pub restarts: usize,
    pub iterations: usize,
    pub seed: u64,
}

impl Default for QepsOptions {
    fn default() -> Self {
        Self { t_dim: 1, t_cap: DEFAULT_T_CAP, restarts: 4, iterations: 500, seed: 0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub struct SearchMeta {
    pub restarts: usize,
    pub iterations: usize,
    pub seed: u64,
}

/// A point satisfying both constraints, with the reference state `σ_CT`
/// certifying its Imax value.
#[derive(Debug, Clone)]
pub struct FeasiblePoint {
    pub t_dim: usize,
    /// Unitary on `[B, C, T]`.
    pub u_bct: IsometryMap,
    /// `σ'` on `[T]`.
    pub sigma_prime: DensityOperator,
    /// `κ` on `[R, B, C, T]`.
    pub kappa: DensityOperator,
    /// `σ` on `[C, T]` with `κ ≤ 2^value κ_RB ⊗ σ`.
    pub sigma_ct: DensityOperator,
    /// `P((I⊗U)κ(I⊗U†), Ψ_RBC⊗σ')`.
    pub distance: f64,
}

#[derive(Debug, Clone)]
pub struct QepsEstimate {
    /// Imax(RB:CT) at the best feasible point, in bits.
    pub upper: f64,
    /// Recovery bound from the optimized recovery channel.
    pub lower: f64,
    /// Same bound from the Petz map alone.
    pub lower_petz: f64,
    pub feasible_point: FeasiblePoint,
    pub search_meta: SearchMeta,
    /// Whether the SDP at the best point closed its gap.
    pub converged: bool,
}

/// Permutes `psi` into `[R, A, B, C]`, inserting one-dimensional `A` or `B`
/// when absent.
pub fn standard_form(psi: &StateVector) -> Result<StateVector> {
    let l = psi.layout();
    for need in ["R", "C"] {
        if !l.contains(need) {
            return Err(QsrError::UnknownLabel(need.into()));
        }
    }
    let extra: Vec<&str> = l.labels().into_iter().filter(|x| !["R", "A", "B", "C"].contains(x)).collect();
    if !extra.is_empty() {
        return Err(QsrError::InvalidLayout(format!("unexpected registers {extra:?}; expected R, A, B, C")));
    }
    let mut s = psi.clone();
    for opt in ["A", "B"] {
        if !l.contains(opt) {
            let one = StateVector::basis(RegisterLayout::single(opt, 1)?, 0)?;
            s = s.tensor_with(&one)?;
        }
    }
    s.permuted(&["R", "A", "B", "C"])
}

fn check_eps(eps: f64, hi: f64) -> Result<()> {
    if !(eps > 0.0 && eps < hi) {
        return Err(QsrError::OutOfRange(format!("eps = {eps} not in (0, {hi})")));
    }
    Ok(())
}

/// Precomputed matrices for one `(Ψ, ε, T)` instance.
pub(crate) struct Problem {
    pub dr: usize,
    pub db: usize,
    pub dc: usize,
    pub dt: usize,
    pub dg: usize,
    /// Ψ reshaped to `(RB) x (AC)`.
    x: CMat,
    /// Ψ_RBC.
    pub target_rbc: CMat,
    /// Embedding `|a,c⟩ ↦ |c⟩|0⟩_T|a⟩_G`.
    e0: CMat,
    pub eps: f64,
}

#[derive(Debug, Clone)]
pub(crate) struct Params {
    /// Unitary on `CTG`.
    pub w: CMat,
    /// Unitary on `BCT`.
    pub u: CMat,
    /// `σ' = g g† / Tr`.
    pub g: CMat,
}

pub(crate) struct Evaluation {
    pub kappa: CMat,
    pub sigma_prime: CMat,
    pub distance: f64,
}

impl Problem {
    pub fn new(psi: &StateVector, eps: f64, dt: usize) -> Result<Self> {
        let s = standard_form(psi)?;
        let d = s.layout().dims();
        let (dr, da, db, dc) = (d[0], d[1], d[2], d[3]);
        let v = s.permuted(&["R", "B", "A", "C"])?;
        let amps = v.amplitudes();
        let (drb, dac) = (dr * db, da * dc);
        let x = CMat::from_fn(drb, dac, |i, j| amps[i * dac + j]);
        let target_rbc = s.marginal(&["R", "B", "C"])?.into_matrix();
        let dg = da.max(2);
        let dd = dc * dt * dg;
        let mut e0 = CMat::zeros(dd, dac);
        for a in 0..da {
            for cc in 0..dc {
                e0[(cc * dt * dg + a, a * dc + cc)] = c(1.0);
            }
        }
        Ok(Self { dr, db, dc, dt, dg, x, target_rbc, e0, eps })
    }

    pub fn identity(&self) -> Params {
        let dd = self.dc * self.dt * self.dg;
        let dbct = self.db * self.dc * self.dt;
        let mut g = CMat::zeros(self.dt, self.dt);
        g[(0, 0)] = c(1.0);
        Params { w: CMat::identity(dd, dd), u: CMat::identity(dbct, dbct), g }
    }

    pub fn kappa(&self, w: &CMat) -> CMat {
        let wt = (w * &self.e0).transpose();
        let k = &self.x * wt;
        let drb = self.dr * self.db;
        let dct = self.dc * self.dt;
        let m = CMat::from_fn(drb * dct, self.dg, |i, g| k[(i / dct, (i % dct) * self.dg + g)]);
        &m * m.adjoint()
    }

    pub fn evaluate(&self, p: &Params) -> Evaluation {
        let kappa = self.kappa(&p.w);
        let big_u = CMat::identity(self.dr, self.dr).kronecker(&p.u);
        let rho = &big_u * &kappa * big_u.adjoint();
        let gg = &p.g * p.g.adjoint();
        let sigma_prime = gg.scale(1.0 / gg.trace().re);
        let distance = pd_from_fidelity(fidelity_mat(&rho, &self.target_rbc.kronecker(&sigma_prime)));
        Evaluation { kappa, sigma_prime, distance }
    }

    fn value(&self, kappa: &CMat) -> Result<(f64, SdpSolution)> {
        imax_mat(kappa, self.dr * self.db, self.dc * self.dt)
    }

    /// Objective for the search; `None` outside the ball.
    fn objective(&self, p: &Params) -> Option<f64> {
        let e = self.evaluate(p);
        if e.distance > self.eps {
            return None;
        }
        self.value(&e.kappa).ok().map(|x| x.0).filter(|v| v.is_finite())
    }

    fn perturb(&self, p: &Params, step: f64, rng: &mut QsrRng) -> Params {
        let mut q = p.clone();
        let mut parts = vec![0, 1];
        if self.dt > 1 {
            parts.push(2);
        }
        match parts[rng.gen_range(0..parts.len())] {
            0 => q.w = perturb_unitary(&q.w, step, rng),
            1 => q.u = perturb_unitary(&q.u, step, rng),
            _ => {
                let n = self.dt;
                q.g = &q.g + CMat::from_fn(n, n, |_, _| gaussian_c64(rng)).scale(step);
            }
        }
        q
    }

    /// Random feasible start: a kick from the identity, halved until the
    /// result is inside the ball.
    fn kicked_start(&self, rng: &mut QsrRng) -> Params {
        let mut s = 1.0;
        let base = self.identity();
        for _ in 0..30 {
            let mut p = base.clone();
            p.w = perturb_unitary(&p.w, s, rng);
            p.u = perturb_unitary(&p.u, s, rng);
            if self.dt > 1 {
                let n = self.dt;
                p.g = &p.g + CMat::from_fn(n, n, |_, _| gaussian_c64(rng)).scale(s);
            }
            if self.evaluate(&p).distance <= self.eps {
                return p;
            }
            s *= 0.5;
        }
        base
    }

    /// Same point on a larger `T` (the old space embedded as the leading
    /// basis states).
    pub fn embed(&self, p: &Params, from_dt: usize) -> Params {
        let (dc, dg, db) = (self.dc, self.dg, self.db);
        let map_ctg = |i: usize| {
            let (cc, rest) = (i / (from_dt * dg), i % (from_dt * dg));
            (cc * self.dt + rest / dg) * dg + rest % dg
        };
        let map_bct = |i: usize| {
            let (bc, t) = (i / from_dt, i % from_dt);
            bc * self.dt + t
        };
        let mut out = self.identity();
        let n_old = dc * from_dt * dg;
        for i in 0..n_old {
            for j in 0..n_old {
                out.w[(map_ctg(i), map_ctg(j))] = p.w[(i, j)];
            }
        }
        let n_old_u = db * dc * from_dt;
        for i in 0..n_old_u {
            for j in 0..n_old_u {
                out.u[(map_bct(i), map_bct(j))] = p.u[(i, j)];
            }
        }
        out.g = CMat::zeros(self.dt, self.dt);
        for i in 0..from_dt {
            for j in 0..from_dt {
                out.g[(i, j)] = p.g[(i, j)];
            }
        }
        out
    }

    fn search(&self, opts: &QepsOptions, warm: Option<Params>) -> (Params, f64) {
        let start0 = warm.unwrap_or_else(|| self.identity());
        let mut best: Option<(Params, f64)> = None;
        for r in 0..opts.restarts.max(1) {
            let mut rng = rng_from_seed(derive_seed(opts.seed, (self.dt as u64) << 32 | r as u64));
            let start = if r == 0 { start0.clone() } else { self.kicked_start(&mut rng) };
            let v0 = match self.objective(&start) {
                Some(v) => v,
                None => continue,
            };
            let budget = SearchBudget { iterations: opts.iterations, initial_step: 0.3, min_step: 1e-5 };
            let (p, v, _) = minimize(
                start,
                v0,
                budget,
                &mut rng,
                |p, s, rng| self.perturb(p, s, rng),
                |p| self.objective(p),
            );
            if best.as_ref().map_or(true, |b| v < b.1) {
                best = Some((p, v));
            }
        }
        best.unwrap_or_else(|| {
            let p = self.identity();
            let v = self.objective(&p).unwrap_or(f64::INFINITY);
            (p, v)
        })
    }

    /// Packs a parameter set into a checked feasible point.
    pub fn point(&self, p: &Params) -> Result<(FeasiblePoint, f64, bool)> {
        let e = self.evaluate(p);
        let (value, sol) = self.value(&e.kappa)?;
        let rbct = RegisterLayout::new([("R", self.dr), ("B", self.db), ("C", self.dc), ("T", self.dt)])?;
        let bct = rbct.select(&["B", "C", "T"])?;
        let tr = sol.y.trace().re;
        let point = FeasiblePoint {
            t_dim: self.dt,
            u_bct: IsometryMap::new(bct.clone(), bct, p.u.clone())?,
            sigma_prime: DensityOperator::new_unchecked(RegisterLayout::single("T", self.dt)?, e.sigma_prime)?,
            kappa: DensityOperator::new_unchecked(rbct.clone(), e.kappa)?,
            sigma_ct: DensityOperator::new_unchecked(rbct.select(&["C", "T"])?, sol.y.scale(1.0 / tr))?,
            distance: e.distance,
        };
        Ok((point, value, sol.converged))
    }
}

/// Distance and marginal residual of a candidate point, recomputed from
/// scratch: `(P((I⊗U)κ(I⊗U†), Ψ_RBC⊗σ'), max |κ_RB − Ψ_RB|)`.
pub fn check_feasible(psi: &StateVector, point: &FeasiblePoint) -> Result<(f64, f64)> {
    let s = standard_form(psi)?;
    let target = s.marginal(&["R", "B", "C"])?.tensor_with(&point.sigma_prime)?;
    let kappa = point.kappa.permuted(&["R", "B", "C", "T"])?;
    let rho = kappa.transformed(&point.u_bct)?.permuted(&["R", "B", "C", "T"])?;
    let pd = pd_from_fidelity(fidelity_mat(rho.matrix(), target.matrix()));
    let krb = kappa.marginal(&["R", "B"])?;
    let prb = s.marginal(&["R", "B"])?;
    let res = (krb.matrix() - prb.matrix()).iter().map(|z| z.norm()).fold(0.0, f64::max);
    Ok((pd, res))
}

fn run_single(psi: &StateVector, eps: f64, opts: &QepsOptions, warm: Option<(&Problem, &Params)>) -> Result<(Problem, Params, f64)> {
    let prob = Problem::new(psi, eps, opts.t_dim)?;
    let start = warm.map(|(wp, p)| prob.embed(p, wp.dt));
    let (p, v) = prob.search(opts, start);
    Ok((prob, p, v))
}

fn finish(psi: &StateVector, eps: f64, prob: &Problem, p: &Params, opts: &QepsOptions) -> Result<QepsEstimate> {
    let (point, upper, converged) = prob.point(p)?;
    let (pd, res) = check_feasible(psi, &point)?;
    if pd > eps + 1e-6 || res > 1e-8 {
        return Err(QsrError::Infeasible(format!("returned point fails re-check: distance {pd:.3e}, marginal residual {res:.3e}")));
    }
    let lb = qeps_lower_recovery(psi, eps, opts.seed)?;
    Ok(QepsEstimate {
        upper,
        lower: lb.optimized,
        lower_petz: lb.petz,
        feasible_point: point,
        search_meta: SearchMeta { restarts: opts.restarts, iterations: opts.iterations, seed: opts.seed },
        converged,
    })
}

/// Upper estimate of `Q^ε` with a fixed `T` dimension.
pub fn qeps_upper(psi: &StateVector, eps: f64, opts: &QepsOptions) -> Result<QepsEstimate> {
    check_eps(eps, 1.0)?;
    if opts.t_dim == 0 || opts.t_dim > opts.t_cap {
        return Err(QsrError::OutOfRange(format!("t_dim = {} not in [1, {}]", opts.t_dim, opts.t_cap)));
    }
    let (prob, p, _) = run_single(psi, eps, opts, None)?;
    finish(psi, eps, &prob, &p, opts)
}

/// Sweeps `T` over 1, 2, 4 up to `opts.t_cap`, each size warm-started from
/// the best point of the previous one, and keeps the smallest value.
pub fn qeps_upper_sweep(psi: &StateVector, eps: f64, opts: &QepsOptions) -> Result<QepsEstimate> {
    check_eps(eps, 1.0)?;
    let mut runs: Vec<(Problem, Params, f64)> = Vec::new();
    for t in [1usize, 2, 4].into_iter().filter(|&t| t <= opts.t_cap) {
        let o = QepsOptions { t_dim: t, ..*opts };
        let run = run_single(psi, eps, &o, runs.last().map(|(a, b, _)| (a, b)))?;
        runs.push(run);
    }
    let best = runs
        .iter()
        .enumerate()
        .min_by(|x, y| x.1 .2.partial_cmp(&y.1 .2).unwrap_or(std::cmp::Ordering::Equal).then(x.0.cmp(&y.0)))
        .map(|(i, _)| i)
        .ok_or_else(|| QsrError::OutOfRange("t_cap must be at least 1".into()))?;
    let (prob, p, _) = &runs[best];
    finish(psi, eps, prob, p, &QepsOptions { t_dim: prob.dt, ..*opts })
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct RecoveryBound {
    /// Fidelity of recovery reached by the Petz map.
    pub petz_fidelity: f64,
    /// Fidelity of recovery reached by the optimized channel.
    pub optimized_fidelity: f64,
    pub petz: f64,
    pub optimized: f64,
}

fn recovery_bound(f: f64, eps: f64) -> f64 {
    if f <= 0.0 {
        f64::NEG_INFINITY
    } else {
        -2.0 * f.log2() + (1.0 - eps * eps).log2()
    }
}

/// Largest unitary dimension the recovery-channel search will walk.
pub const RECOVERY_SEARCH_CAP: usize = 96;

/// `-2 log F(R:C|B) + log(1 - ε²)` for the Petz map and for the optimized
/// recovery channel. The optimized value is the one to pair with upper
/// estimates, as its fidelity is the closer one to the supremum.
pub fn qeps_lower_recovery(psi: &StateVector, eps: f64, seed: u64) -> Result<RecoveryBound> {
    if !(0.0..1.0).contains(&eps) {
        return Err(QsrError::OutOfRange(format!("eps = {eps} not in [0, 1)")));
    }
    let s = standard_form(psi)?;
    let rbc = s.marginal(&["R", "B", "C"])?;
    let petz = fidelity_of_recovery(&rbc, &["R"], &["C"], &["B"], RecoveryMethod::Petz)?.value;
    let (db, dc) = (rbc.layout().dim_of("B")?, rbc.layout().dim_of("C")?);
    // the channel search walks unitaries on B ⊗ C ⊗ C⁺; past the cap the
    // Petz map, itself an achievable recovery, is the bound
    let opt = if db * dc * (dc + 1) <= RECOVERY_SEARCH_CAP {
        fidelity_of_recovery(&rbc, &["R"], &["C"], &["B"], RecoveryMethod::optimize(seed))?.value.max(petz)
    } else {
        petz
    };
    Ok(RecoveryBound {
        petz_fidelity: petz,
        optimized_fidelity: opt,
        petz: recovery_bound(petz, eps),
        optimized: recovery_bound(opt, eps),
    })
}

#[cfg(test)]
mod tests;
