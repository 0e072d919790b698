use super::maxinfo::{hmin_mat, imax_mat, ptrace_b};
use super::{fidelity_mat, pd_from_fidelity, Certificate, QuantityKind, QuantityResult};
use crate::error::{QsrError, Result};
use crate::linalg::eig::{eigh, from_spectrum, hermitize};
use crate::linalg::random::{derive_seed, rng_from_seed, QsrRng};
use crate::linalg::state::purify_with_dim;
use crate::linalg::{CMat, DensityOperator, Quantum, RegisterLayout};
use crate::search::{minimize, random_direction, SearchBudget};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SmoothQuantity {
    Imax,
    Hmin,
    Hmax,
}

#[derive(Debug, Clone, Copy)]
pub struct SmoothOptions {
    pub restarts: usize,
    pub iterations: usize,
    pub seed: u64,
}

impl Default for SmoothOptions {
    fn default() -> Self {
        Self { restarts: 8, iterations: 500, seed: 0 }
    }
}

/// Objective to minimize on a bipartite matrix (A leading).
fn objective(q: SmoothQuantity, m: &CMat, da: usize, db: usize) -> Option<f64> {
    let r = match q {
        SmoothQuantity::Imax => imax_mat(m, da, db).map(|x| x.0),
        SmoothQuantity::Hmin => hmin_mat(m, da, db).map(|x| -x.0),
        SmoothQuantity::Hmax => hmax_value(m, da, db),
    };
    r.ok().filter(|v| v.is_finite())
}

fn hmax_value(m: &CMat, da: usize, db: usize) -> Result<f64> {
    let l = RegisterLayout::new([("A", da), ("B", db)])?;
    let rho = DensityOperator::new_unchecked(l, m.clone())?;
    let rank = rho.rank(1e-10).max(1);
    let pure = purify_with_dim(&rho, "R", rank)?;
    let ar = pure.marginal(&["A", "R"])?;
    Ok(hmin_mat(ar.matrix(), da, rank)?.0)
}

/// Projects onto normalized PSD matrices.
fn to_state(m: &CMat) -> CMat {
    let (v, u) = eigh(m);
    let clipped: Vec<f64> = v.iter().map(|&x| x.max(0.0)).collect();
    let s: f64 = clipped.iter().sum();
    from_spectrum(&clipped.iter().map(|x| x / s).collect::<Vec<_>>(), &u)
}

/// Point on the segment from `base` toward `target` that is as far as
/// possible while staying in the ε-ball around `center`.
fn pull_into_ball(center: &CMat, base: &CMat, target: &CMat, eps: f64) -> CMat {
    let pd = |m: &CMat| pd_from_fidelity(fidelity_mat(center, m));
    if pd(target) <= eps {
        return target.clone();
    }
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..40 {
        let mid = 0.5 * (lo + hi);
        let m = base.scale(1.0 - mid) + target.scale(mid);
        if pd(&m) <= eps {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hermitize(&(base.scale(1.0 - lo) + target.scale(lo)))
}

fn product_of_marginals(m: &CMat, da: usize, db: usize) -> CMat {
    let ra = ptrace_b(m, da, db);
    let rb = CMat::from_fn(db, db, |i, j| (0..da).map(|a| m[(a * db + i, a * db + j)]).sum());
    ra.kronecker(&rb)
}

/// Smoothed quantity by local search over normalized states in the
/// purified-distance ball. Imax^ε and Hmax^ε are upper estimates (the
/// infimum is at most the value found); Hmin^ε is a lower estimate.
pub fn smooth(
    quantity: SmoothQuantity,
    rho: &DensityOperator,
    a: &[&str],
    b: &[&str],
    eps: f64,
    opts: SmoothOptions,
) -> Result<QuantityResult> {
    if !(0.0..1.0).contains(&eps) {
        return Err(QsrError::OutOfRange(format!("eps = {eps} not in [0, 1)")));
    }
    let mut all: Vec<&str> = a.to_vec();
    all.extend_from_slice(b);
    let m0 = rho.marginal(&all)?.permuted(&all)?;
    let layout = m0.layout().clone();
    let da = rho.layout().dim_of_set(a)?;
    let db = rho.layout().dim_of_set(b)?;
    let center = m0.into_matrix();
    let sign = if quantity == SmoothQuantity::Hmin { -1.0 } else { 1.0 };
    let kind = if quantity == SmoothQuantity::Hmin { QuantityKind::HeuristicLower } else { QuantityKind::HeuristicUpper };
    let v0 = objective(quantity, &center, da, db)
        .ok_or_else(|| QsrError::Solver("objective failed at the center state".into()))?;

    let mut best = (v0, center.clone());
    if eps > 0.0 {
        let d = da * db;
        let mm = CMat::identity(d, d).scale(1.0 / d as f64);
        let prod = product_of_marginals(&center, da, db);
        for r in 0..opts.restarts.max(1) {
            let mut rng = rng_from_seed(derive_seed(opts.seed, r as u64));
            let start = match r {
                0 => pull_into_ball(&center, &center, &prod, eps),
                1 => pull_into_ball(&center, &center, &mm, eps),
                _ => {
                    let h = random_direction(d, &mut rng);
                    pull_into_ball(&center, &center, &to_state(&(&center + h)), eps)
                }
            };
            let sv = match objective(quantity, &start, da, db) {
                Some(v) => v,
                None => continue,
            };
            let budget = SearchBudget { iterations: opts.iterations, initial_step: 0.2, min_step: 1e-6 };
            let perturb = |cur: &CMat, step: f64, rng: &mut QsrRng| {
                let h = random_direction(d, rng).scale(step);
                pull_into_ball(&center, cur, &to_state(&(cur + h)), eps)
            };
            let (m, v, _) = minimize(start, sv, budget, &mut rng, perturb, |m| objective(quantity, m, da, db));
            if v < best.0 {
                best = (v, m);
            }
        }
    }
    let state = DensityOperator::new_unchecked(layout, best.1)?;
    Ok(QuantityResult {
        value: sign * best.0,
        kind,
        bounds: None,
        converged: true,
        certificate: Some(Certificate::BallState(state)),
    })
}
