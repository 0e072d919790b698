//! Primal-dual interior point method for
//!
//! ```text
//! minimize Tr Y   subject to  I_A ⊗ Y ⪰ X          (primal, Y Hermitian on B)
//! maximize Tr XZ  subject to  Tr_A Z = I_B, Z ⪰ 0   (dual)
//! ```
//!
//! HKM search direction with Mehrotra predictor-corrector. Both iterates
//! stay strictly feasible, and the returned bounds are certified by
//! repairing residual infeasibility exactly.

use crate::error::{QsrError, Result};
use crate::linalg::eig::{eigh, hermitize, max_eig, min_eig, pinv_sqrt_psd};
use crate::linalg::{c, CMat, C64};
use nalgebra::{DMatrix, DVector};

#[derive(Debug, Clone)]
pub struct SdpSolution {
    /// Primal optimizer, shifted to be exactly feasible.
    pub y: CMat,
    /// Dual optimizer, rescaled to satisfy `Tr_A Z = I` exactly.
    pub z: CMat,
    /// `Tr Y` of the certified primal point.
    pub upper: f64,
    /// `Tr XZ` of the certified dual point.
    pub lower: f64,
    pub iterations: usize,
    pub converged: bool,
}

pub(crate) fn kron_id(da: usize, y: &CMat) -> CMat {
    CMat::identity(da, da).kronecker(y)
}

pub(crate) fn ptrace_a(z: &CMat, da: usize, db: usize) -> CMat {
    CMat::from_fn(db, db, |b, bp| {
        let mut s = C64::new(0.0, 0.0);
        for a in 0..da {
            s += z[(a * db + b, a * db + bp)];
        }
        s
    })
}

/// Orthonormal real basis of Hermitian `db x db` matrices, as sparse
/// coefficient lists over matrix units.
fn herm_basis(db: usize) -> Vec<Vec<((usize, usize), C64)>> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut out = Vec::with_capacity(db * db);
    for k in 0..db {
        out.push(vec![((k, k), c(1.0))]);
    }
    for k in 0..db {
        for l in k + 1..db {
            out.push(vec![((k, l), c(h)), ((l, k), c(h))]);
            out.push(vec![((k, l), C64::new(0.0, h)), ((l, k), C64::new(0.0, -h))]);
        }
    }
    out
}

fn coords(basis: &[Vec<((usize, usize), C64)>], w: &CMat) -> DVector<f64> {
    DVector::from_iterator(
        basis.len(),
        basis.iter().map(|b| b.iter().map(|&((k, l), cf)| (cf * w[(l, k)]).re).sum::<f64>()),
    )
}

fn from_coords(basis: &[Vec<((usize, usize), C64)>], y: &DVector<f64>, db: usize) -> CMat {
    let mut m = CMat::zeros(db, db);
    for (b, &v) in basis.iter().zip(y.iter()) {
        for &((k, l), cf) in b {
            m[(k, l)] += cf * v;
        }
    }
    m
}

fn re_trace_prod(a: &CMat, b: &CMat) -> f64 {
    // Re Tr(AB) without forming AB
    let n = a.nrows();
    let mut s = 0.0;
    for i in 0..n {
        for k in 0..n {
            s += (a[(i, k)] * b[(k, i)]).re;
        }
    }
    s
}

/// Largest step `α ≤ 1` keeping `P + αD` positive definite, damped by `tau`.
fn step_length(p: &CMat, d: &CMat, tau: f64) -> f64 {
    let lmin = match p.clone().cholesky() {
        Some(ch) => {
            let l = ch.l();
            let linv = l.clone().try_inverse().unwrap_or_else(|| CMat::identity(l.nrows(), l.nrows()));
            min_eig(&(&linv * d * linv.adjoint()))
        }
        None => {
            let s = pinv_sqrt_psd(p);
            min_eig(&(&s * d * &s))
        }
    };
    if lmin >= 0.0 {
        1.0
    } else {
        (tau * (-1.0 / lmin)).min(1.0)
    }
}

fn hpd_inverse(s: &CMat) -> CMat {
    match s.clone().cholesky() {
        Some(ch) => hermitize(&ch.inverse()),
        None => {
            let (v, u) = eigh(s);
            let vals: Vec<f64> = v.iter().map(|&x| if x > 1e-300 { 1.0 / x } else { 0.0 }).collect();
            crate::linalg::eig::from_spectrum(&vals, &u)
        }
    }
}

/// Schur complement matrix `M_ij = Re Tr((I⊗B_i) Z (I⊗B_j) S⁻¹)`.
fn schur(basis: &[Vec<((usize, usize), C64)>], z: &CMat, sinv: &CMat, da: usize, db: usize) -> DMatrix<f64> {
    let d2 = db * db;
    // h[(k*db+l), (p*db+q)] = Σ_{a,a'} Z[(a,l),(a',p)] S⁻¹[(a',q),(a,k)]
    let mut h = CMat::zeros(d2, d2);
    for a in 0..da {
        for ap in 0..da {
            for k in 0..db {
                for q in 0..db {
                    let s = sinv[(ap * db + q, a * db + k)];
                    if s == C64::new(0.0, 0.0) {
                        continue;
                    }
                    for l in 0..db {
                        let zrow = a * db + l;
                        for p in 0..db {
                            h[(k * db + l, p * db + q)] += z[(zrow, ap * db + p)] * s;
                        }
                    }
                }
            }
        }
    }
    let m = basis.len();
    let mut out = DMatrix::<f64>::zeros(m, m);
    for i in 0..m {
        for j in i..m {
            let mut s = C64::new(0.0, 0.0);
            for &((k, l), ci) in &basis[i] {
                for &((p, q), cj) in &basis[j] {
                    s += ci * cj * h[(k * db + l, p * db + q)];
                }
            }
            out[(i, j)] = s.re;
            out[(j, i)] = s.re;
        }
    }
    out
}

/// Solves the program for Hermitian PSD `x` on `A ⊗ B` (A is the leading
/// factor of the row index).
pub fn min_trace_dominating(x: &CMat, da: usize, db: usize) -> Result<SdpSolution> {
    let n = da * db;
    if x.nrows() != n || x.ncols() != n {
        return Err(QsrError::Solver(format!("matrix side {} does not match {da}x{db}", x.nrows())));
    }
    let x = hermitize(x);
    let basis = herm_basis(db);
    let cvec = coords(&basis, &CMat::identity(db, db));

    let beta = max_eig(&x).max(0.0) + 1.0;
    let mut y = CMat::identity(db, db).scale(beta);
    let mut z = CMat::identity(n, n).scale(1.0 / da as f64);
    let mut iterations = 0;
    let mut converged = false;
    let max_iter = 150;

    for it in 0..max_iter {
        iterations = it;
        let s = hermitize(&(kron_id(da, &y) - &x));
        let p_obj = y.trace().re;
        let d_obj = re_trace_prod(&x, &z);
        let gap = re_trace_prod(&z, &s);
        if gap <= 1e-11 * (1.0 + p_obj.abs()) && (p_obj - d_obj).abs() <= 1e-10 * (1.0 + p_obj.abs()) {
            converged = true;
            break;
        }
        let mu = gap / n as f64;
        let sinv = hpd_inverse(&s);
        let m = schur(&basis, &z, &sinv, da, db);
        let chol = match m.clone().cholesky() {
            Some(ch) => ch,
            None => break,
        };

        let direction = |sigma_mu: f64, corr: Option<&CMat>| -> (CMat, CMat, CMat) {
            let mut t = sinv.scale(sigma_mu);
            if let Some(cm) = corr {
                t -= cm * &sinv;
            }
            let rhs = coords(&basis, &ptrace_a(&t, da, db)) - &cvec;
            let dy = chol.solve(&rhs);
            let dym = from_coords(&basis, &dy, db);
            let ds = kron_id(da, &dym);
            let mut dz = sinv.scale(sigma_mu) - &z - &z * &ds * &sinv;
            if let Some(cm) = corr {
                dz -= cm * &sinv;
            }
            (dym, ds, hermitize(&dz))
        };

        let (_, ds_a, dz_a) = direction(0.0, None);
        let ap = step_length(&s, &ds_a, 1.0);
        let ad = step_length(&z, &dz_a, 1.0);
        let mu_aff = re_trace_prod(&(&z + dz_a.scale(ad)), &(&s + ds_a.scale(ap))) / n as f64;
        let sigma = (mu_aff / mu).clamp(0.0, 1.0).powi(3);
        let corr = &dz_a * &ds_a;
        let (dy, ds, dz) = direction(sigma * mu, Some(&corr));
        let ap = step_length(&s, &ds, 0.98);
        let ad = step_length(&z, &dz, 0.98);
        if ap < 1e-12 && ad < 1e-12 {
            break;
        }
        y = hermitize(&(&y + dy.scale(ap)));
        z = hermitize(&(&z + dz.scale(ad)));
    }

    // certify primal: shift Y so that I⊗Y - X ⪰ 0 exactly
    let s = hermitize(&(kron_id(da, &y) - &x));
    let lm = min_eig(&s);
    let shift = if lm < 0.0 { -lm * (1.0 + 1e-9) + 1e-15 } else { 0.0 };
    let y_cert = &y + CMat::identity(db, db).scale(shift);
    let upper = y_cert.trace().re;
    // certify dual: rescale Z so that Tr_A Z = I exactly
    let w = ptrace_a(&z, da, db);
    let wis = pinv_sqrt_psd(&w);
    let k = kron_id(da, &wis);
    let z_cert = hermitize(&(&k * &z * &k));
    let lower = re_trace_prod(&x, &z_cert).max(0.0);
    let converged = converged && (upper - lower) <= 1e-7 * upper.max(1e-300);
    Ok(SdpSolution { y: y_cert, z: z_cert, upper, lower, iterations, converged })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::random::{random_density_matrix, rng_from_seed};

    #[test]
    fn basis_is_orthonormal() {
        let b = herm_basis(3);
        assert_eq!(b.len(), 9);
        for i in 0..9 {
            let bi = from_coords(&b, &DVector::from_fn(9, |k, _| if k == i { 1.0 } else { 0.0 }), 3);
            assert!(crate::linalg::eig::hermiticity_residual(&bi) < 1e-15);
            for j in 0..9 {
                let bj = from_coords(&b, &DVector::from_fn(9, |k, _| if k == j { 1.0 } else { 0.0 }), 3);
                let ip = re_trace_prod(&bi, &bj);
                assert!((ip - if i == j { 1.0 } else { 0.0 }).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn trivial_a_gives_trace() {
        let mut rng = rng_from_seed(2);
        let x = random_density_matrix(3, &mut rng);
        let s = min_trace_dominating(&x, 1, 3).unwrap();
        assert!(s.converged);
        assert!((s.upper - 1.0).abs() < 1e-8);
    }

    #[test]
    fn bell_state_hmin() {
        let h = 0.5;
        let mut x = CMat::zeros(4, 4);
        for &(i, j) in &[(0, 0), (0, 3), (3, 0), (3, 3)] {
            x[(i, j)] = c(h);
        }
        let s = min_trace_dominating(&x, 2, 2).unwrap();
        assert!(s.converged);
        assert!((s.upper - 2.0).abs() < 1e-8, "{}", s.upper);
        assert!(s.lower <= s.upper);
    }

    #[test]
    fn bounds_bracket_on_random() {
        let mut rng = rng_from_seed(9);
        for _ in 0..10 {
            let x = random_density_matrix(6, &mut rng);
            let s = min_trace_dominating(&x, 2, 3).unwrap();
            assert!(s.converged, "gap {} {}", s.lower, s.upper);
            assert!(s.lower <= s.upper + 1e-12);
            let slack = kron_id(2, &s.y) - &x;
            assert!(min_eig(&slack) >= -1e-12);
        }
    }
}
