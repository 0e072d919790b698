use super::{CMat, C64};
use crate::error::{invariant, QsrError, Result};

pub const TOL_HERM: f64 = 1e-10;
pub const RANK_TOL: f64 = 1e-10;

/// Largest absolute entry of `m - m†`.
pub fn hermiticity_residual(m: &CMat) -> f64 {
    let n = m.nrows();
    let mut r: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            r = r.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    r
}

pub(crate) fn hermitize(m: &CMat) -> CMat {
    (m + m.adjoint()).scale(0.5)
}

/// Hermitian eigendecomposition with eigenvalues in descending order and
/// the largest-magnitude component of every eigenvector real and positive.
pub fn eig_hermitian(m: &CMat) -> Result<(Vec<f64>, CMat)> {
    if m.nrows() != m.ncols() {
        return Err(QsrError::InvalidLayout("matrix is not square".into()));
    }
    let r = hermiticity_residual(m);
    if r > TOL_HERM {
        return Err(invariant("hermiticity", r));
    }
    Ok(eigh(m))
}

/// Same as [`eig_hermitian`] for matrices known to be Hermitian up to
/// rounding; the input is symmetrized first.
pub(crate) fn eigh(m: &CMat) -> (Vec<f64>, CMat) {
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), CMat::zeros(0, 0));
    }
    if n == 1 {
        return (vec![m[(0, 0)].re], CMat::from_element(1, 1, C64::new(1.0, 0.0)));
    }
    let h = hermitize(m);
    let (raw_vals, raw_vecs) = raw_eigh(&h);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| raw_vals[b].partial_cmp(&raw_vals[a]).unwrap_or(std::cmp::Ordering::Equal));
    let vals = order.iter().map(|&i| raw_vals[i]).collect();
    let mut vecs = CMat::zeros(n, n);
    for (c, &i) in order.iter().enumerate() {
        let col: Vec<C64> = raw_vecs.column(i).iter().copied().collect();
        let mut best = 0;
        let mut bm = -1.0;
        for k in 0..n {
            let a = col[k].norm();
            if a > bm + 1e-14 {
                bm = a;
                best = k;
            }
        }
        let phase = if bm > 0.0 { col[best].conj() / bm } else { C64::new(1.0, 0.0) };
        for k in 0..n {
            vecs[(k, c)] = col[k] * phase;
        }
        vecs[(best, c)] = C64::new(vecs[(best, c)].norm(), 0.0);
    }
    (vals, vecs)
}

/// nalgebra's QR iteration is fast on small matrices but occasionally
/// returns a wrong decomposition for matrices with many repeated
/// eigenvalues; the residual `AV − VΛ` is checked and faer's solver used
/// when it is too large.
fn raw_eigh(h: &CMat) -> (Vec<f64>, CMat) {
    let n = h.nrows();
    let se = h.clone().symmetric_eigen();
    let scale = 1.0 + h.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let mut v = se.eigenvectors.clone();
    for (j, &l) in se.eigenvalues.iter().enumerate() {
        v.column_mut(j).scale_mut(l);
    }
    let resid = (h * &se.eigenvectors - v).iter().map(|z| z.norm()).fold(0.0, f64::max);
    if resid <= 1e-11 * scale * (n as f64).sqrt() && se.eigenvalues.iter().all(|x| x.is_finite()) {
        return (se.eigenvalues.iter().copied().collect(), se.eigenvectors);
    }
    let ev = to_faer(h).selfadjoint_eigendecomposition(faer::Side::Lower);
    let (s, u) = (ev.s().column_vector(), ev.u());
    ((0..n).map(|i| s.read(i).re).collect(), CMat::from_fn(n, n, |i, j| from_faer(u.read(i, j))))
}

fn to_faer(m: &CMat) -> faer::Mat<faer::complex_native::c64> {
    faer::Mat::from_fn(m.nrows(), m.ncols(), |i, j| faer::complex_native::c64::new(m[(i, j)].re, m[(i, j)].im))
}

fn from_faer(z: faer::complex_native::c64) -> C64 {
    C64::new(z.re, z.im)
}

/// Thin SVD `m = U diag(s) V†` with `U` of size `r x min(r, c)`, singular
/// values descending.
///
/// nalgebra first; faer's singular vectors can be wrong on clustered
/// spectra, so each candidate is checked by reconstruction.
pub(crate) fn svd_thin(m: &CMat) -> (CMat, Vec<f64>, CMat) {
    let (r, c) = m.shape();
    let k = r.min(c);
    if k == 0 {
        return (CMat::zeros(r, 0), Vec::new(), CMat::zeros(c, 0));
    }
    let scale = 1.0 + crate::linalg::max_abs(m);
    let tol = 1e-10 * scale * (k as f64).sqrt();
    let a = svd_nalgebra(m);
    let ea = svd_residual(m, &a);
    if ea <= tol {
        return a;
    }
    let b = svd_faer(m);
    if svd_residual(m, &b) < ea {
        b
    } else {
        a
    }
}

fn svd_nalgebra(m: &CMat) -> (CMat, Vec<f64>, CMat) {
    let d = m.clone().svd(true, true);
    let (u, vt) = (d.u.expect("u requested"), d.v_t.expect("v_t requested"));
    let mut order: Vec<usize> = (0..d.singular_values.len()).collect();
    order.sort_by(|&i, &j| d.singular_values[j].total_cmp(&d.singular_values[i]));
    let s = order.iter().map(|&i| d.singular_values[i]).collect();
    let u = CMat::from_fn(u.nrows(), order.len(), |i, j| u[(i, order[j])]);
    let v = CMat::from_fn(vt.ncols(), order.len(), |i, j| vt[(order[j], i)].conj());
    (u, s, v)
}

fn svd_faer(m: &CMat) -> (CMat, Vec<f64>, CMat) {
    let (r, c) = m.shape();
    let k = r.min(c);
    let d = to_faer(m).thin_svd();
    let u = CMat::from_fn(r, k, |i, j| from_faer(d.u().read(i, j)));
    let v = CMat::from_fn(c, k, |i, j| from_faer(d.v().read(i, j)));
    let s = (0..k).map(|i| d.s_diagonal().read(i).re).collect();
    (u, s, v)
}

fn svd_residual(m: &CMat, (u, s, v): &(CMat, Vec<f64>, CMat)) -> f64 {
    let mut us = u.clone();
    for (j, sj) in s.iter().enumerate() {
        us.column_mut(j).scale_mut(*sj);
    }
    let rec = crate::linalg::max_abs(&(us * v.adjoint() - m));
    let k = s.len();
    let orth = crate::linalg::max_abs(&(u.adjoint() * u - CMat::identity(k, k)))
        .max(crate::linalg::max_abs(&(v.adjoint() * v - CMat::identity(k, k))));
    rec.max(orth)
}

/// Unitary whose first columns are the orthonormal columns of `v`.
pub(crate) fn complete_unitary(v: &CMat) -> CMat {
    let (r, k) = v.shape();
    let mut a = CMat::zeros(r, k + r);
    a.columns_mut(0, k).copy_from(v);
    a.columns_mut(k, r).fill_with_identity();
    let q = a.qr().q();
    let mut u = q.columns(0, r).into_owned();
    u.columns_mut(0, k).copy_from(v);
    u
}

/// Sum of singular values.
pub(crate) fn trace_norm(m: &CMat) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    to_faer(m).singular_values().iter().sum()
}

/// `U f(Λ) U†` for a Hermitian matrix.
pub(crate) fn herm_fn(m: &CMat, f: impl Fn(f64) -> f64) -> CMat {
    let (vals, u) = eigh(m);
    from_spectrum(&vals.iter().map(|&v| f(v)).collect::<Vec<_>>(), &u)
}

pub(crate) fn from_spectrum(vals: &[f64], u: &CMat) -> CMat {
    let n = u.nrows();
    let mut scaled = u.clone();
    for (c, &v) in vals.iter().enumerate() {
        for r in 0..n {
            scaled[(r, c)] *= v;
        }
    }
    hermitize(&(scaled * u.adjoint()))
}

fn check_psd(vals: &[f64]) -> Result<()> {
    if let Some(&min) = vals.last() {
        if min < -1e-9 {
            return Err(invariant("positive semidefinite", -min));
        }
    }
    Ok(())
}

pub fn mat_sqrt(m: &CMat) -> Result<CMat> {
    let r = hermiticity_residual(m);
    if r > TOL_HERM {
        return Err(invariant("hermiticity", r));
    }
    let (vals, u) = eigh(m);
    check_psd(&vals)?;
    Ok(from_spectrum(&vals.iter().map(|&v| v.max(0.0).sqrt()).collect::<Vec<_>>(), &u))
}

/// Square root of the pseudo-inverse; eigenvalues below `rank_tol` are
/// treated as zero.
pub fn mat_pinv_sqrt(m: &CMat, rank_tol: f64) -> Result<CMat> {
    let r = hermiticity_residual(m);
    if r > TOL_HERM {
        return Err(invariant("hermiticity", r));
    }
    let (vals, u) = eigh(m);
    check_psd(&vals)?;
    Ok(pinv_sqrt_from(&vals, &u, rank_tol))
}

pub(crate) fn sqrt_psd(m: &CMat) -> CMat {
    herm_fn(m, |v| v.max(0.0).sqrt())
}

pub(crate) fn pinv_sqrt_psd(m: &CMat) -> CMat {
    let (vals, u) = eigh(m);
    pinv_sqrt_from(&vals, &u, RANK_TOL)
}

fn pinv_sqrt_from(vals: &[f64], u: &CMat, tol: f64) -> CMat {
    from_spectrum(&vals.iter().map(|&v| if v > tol { 1.0 / v.sqrt() } else { 0.0 }).collect::<Vec<_>>(), u)
}

/// `exp(iH)` for Hermitian `H`.
pub(crate) fn expi_herm(h: &CMat) -> CMat {
    let (vals, u) = eigh(h);
    let n = u.nrows();
    let mut scaled = u.clone();
    for (c, &v) in vals.iter().enumerate() {
        let p = C64::new(0.0, v).exp();
        for r in 0..n {
            scaled[(r, c)] *= p;
        }
    }
    scaled * u.adjoint()
}

pub(crate) fn min_eig(m: &CMat) -> f64 {
    eigh(m).0.last().copied().unwrap_or(0.0)
}

pub(crate) fn max_eig(m: &CMat) -> f64 {
    eigh(m).0.first().copied().unwrap_or(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::random::{random_hermitian, rng_from_seed};

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn pauli_z() {
        let z = CMat::from_row_slice(2, 2, &[c(1.0), c(0.0), c(0.0), c(-1.0)]);
        let (v, u) = eig_hermitian(&z).unwrap();
        assert_eq!(v, vec![1.0, -1.0]);
        assert!((u[(0, 0)] - c(1.0)).norm() < 1e-15);
        assert!((u[(1, 1)] - c(1.0)).norm() < 1e-15);
    }

    #[test]
    fn degenerate_half_identity() {
        let m = CMat::identity(2, 2).scale(0.5);
        let (v, _) = eig_hermitian(&m).unwrap();
        assert!((v[0] - 0.5).abs() < 1e-15 && (v[1] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn rejects_non_hermitian() {
        let m = CMat::from_row_slice(2, 2, &[c(0.0), c(1.0), c(0.0), c(0.0)]);
        assert!(eig_hermitian(&m).is_err());
    }

    #[test]
    fn random_eigensystem() {
        let mut rng = rng_from_seed(11);
        for _ in 0..20 {
            let h = random_hermitian(8, &mut rng);
            let (v, u) = eig_hermitian(&h).unwrap();
            let tr: f64 = (0..8).map(|i| h[(i, i)].re).sum();
            assert!((v.iter().sum::<f64>() - tr).abs() < 1e-9);
            assert!(v.windows(2).all(|w| w[0] >= w[1]));
            let rec = from_spectrum(&v, &u);
            let scale = h.iter().map(|z| z.norm()).fold(0.0, f64::max);
            assert!((rec - &h).iter().map(|z| z.norm()).fold(0.0, f64::max) <= 1e-9 * scale);
            for col in 0..8 {
                let mut best = 0;
                for k in 0..8 {
                    if u[(k, col)].norm() > u[(best, col)].norm() {
                        best = k;
                    }
                }
                assert!(u[(best, col)].im.abs() < 1e-12 && u[(best, col)].re > 0.0);
            }
        }
    }

    #[test]
    fn sqrt_examples() {
        let q = CMat::identity(4, 4).scale(0.25);
        let s = mat_sqrt(&q).unwrap();
        assert!((s - CMat::identity(4, 4).scale(0.5)).norm() < 1e-14);
        let p = CMat::from_row_slice(2, 2, &[c(1.0), c(0.0), c(0.0), c(0.0)]);
        assert!((mat_sqrt(&p).unwrap() - &p).norm() < 1e-14);
        let bad = CMat::from_row_slice(1, 1, &[c(-1e-6)]);
        assert!(mat_sqrt(&bad).is_err());
    }

    #[test]
    fn pinv_sqrt_on_support() {
        let p = CMat::from_row_slice(2, 2, &[c(0.25), c(0.0), c(0.0), c(0.0)]);
        let s = mat_pinv_sqrt(&p, RANK_TOL).unwrap();
        assert!((s[(0, 0)] - c(2.0)).norm() < 1e-14);
        assert!(s[(1, 1)].norm() < 1e-14);
    }
}
