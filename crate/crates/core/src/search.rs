//! Gradient-free local search shared by the heuristic optimizers.

use crate::linalg::random::{gaussian_c64, QsrRng};
use crate::linalg::{CMat, C64};

#[derive(Debug, Clone, Copy)]
pub struct SearchBudget {
    pub iterations: usize,
    pub initial_step: f64,
    pub min_step: f64,
}

impl Default for SearchBudget {
    fn default() -> Self {
        Self { iterations: 500, initial_step: 0.3, min_step: 1e-6 }
    }
}

/// Minimizes `eval` by accepting improving random perturbations; the step
/// grows after a success and shrinks after a run of failures. `eval`
/// returns `None` for rejected (infeasible) candidates.
pub(crate) fn minimize<P: Clone>(
    init: P,
    init_value: f64,
    budget: SearchBudget,
    rng: &mut QsrRng,
    mut perturb: impl FnMut(&P, f64, &mut QsrRng) -> P,
    mut eval: impl FnMut(&P) -> Option<f64>,
) -> (P, f64, usize) {
    let mut best = init;
    let mut best_v = init_value;
    let mut step = budget.initial_step;
    let mut fails = 0;
    let mut used = 0;
    for _ in 0..budget.iterations {
        used += 1;
        let cand = perturb(&best, step, rng);
        match eval(&cand) {
            Some(v) if v < best_v - 1e-13 => {
                best = cand;
                best_v = v;
                step = (step * 1.3).min(budget.initial_step * 4.0);
                fails = 0;
            }
            _ => {
                fails += 1;
                if fails >= 8 {
                    step *= 0.6;
                    fails = 0;
                }
            }
        }
        if step < budget.min_step {
            break;
        }
    }
    (best, best_v, used)
}

/// Random Hermitian matrix with unit Frobenius norm.
pub(crate) fn random_direction(dim: usize, rng: &mut QsrRng) -> CMat {
    let g = CMat::from_fn(dim, dim, |_, _| gaussian_c64(rng));
    let h = (&g + g.adjoint()).scale(0.5);
    let n = h.norm();
    if n > 0.0 {
        h.scale(1.0 / n)
    } else {
        h
    }
}

/// `exp(i t H) U` for a random unit-norm Hermitian `H`.
pub(crate) fn perturb_unitary(u: &CMat, step: f64, rng: &mut QsrRng) -> CMat {
    let h = random_direction(u.nrows(), rng).scale(step);
    crate::linalg::eig::expi_herm(&h) * u
}

/// Completes the orthonormal columns of `w` to a unitary.
pub(crate) fn complete_to_unitary(w: &CMat) -> CMat {
    let d = w.nrows();
    let k = w.ncols();
    let mut cols: Vec<nalgebra::DVector<C64>> = (0..k).map(|j| w.column(j).into_owned()).collect();
    for e in 0..d {
        if cols.len() == d {
            break;
        }
        let mut v = nalgebra::DVector::<C64>::zeros(d);
        v[e] = C64::new(1.0, 0.0);
        for _ in 0..2 {
            for c in &cols {
                let p = c.dotc(&v);
                v -= c * p;
            }
        }
        let n = v.norm();
        if n > 1e-8 {
            cols.push(v / C64::new(n, 0.0));
        }
    }
    CMat::from_columns(&cols)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::random::{haar_unitary, rng_from_seed};

    #[test]
    fn completion_is_unitary() {
        let mut rng = rng_from_seed(1);
        let u = haar_unitary(6, &mut rng);
        let w = u.columns(0, 2).into_owned();
        let full = complete_to_unitary(&w);
        let e = full.adjoint() * &full - CMat::identity(6, 6);
        assert!(e.iter().all(|z| z.norm() < 1e-12));
        assert!((full.columns(0, 2) - &w).iter().all(|z| z.norm() < 1e-15));
    }

    #[test]
    fn minimizes_a_quadratic() {
        let mut rng = rng_from_seed(2);
        let (p, v, _) = minimize(
            vec![3.0f64, -2.0],
            13.0,
            SearchBudget { iterations: 2000, initial_step: 1.0, min_step: 1e-9 },
            &mut rng,
            |p, s, r| {
                use rand::Rng;
                p.iter().map(|x| x + s * (r.gen::<f64>() - 0.5)).collect()
            },
            |p| Some(p.iter().map(|x| x * x).sum()),
        );
        assert!(v < 1e-6, "{v} at {p:?}");
    }
}
