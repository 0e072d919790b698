use super::{CMat, CVec, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub type QsrRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> QsrRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Seed for a derived stream, e.g. one restart of a search.
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(0xD1B5_4A32_D192_ED03);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub(crate) fn gaussian_c64(rng: &mut impl Rng) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn gaussian_matrix(rows: usize, cols: usize, rng: &mut impl Rng) -> CMat {
    // fill row-major so the draw order does not depend on storage order
    let data: Vec<C64> = (0..rows * cols).map(|_| gaussian_c64(rng)).collect();
    CMat::from_row_slice(rows, cols, &data)
}

/// Haar unitary from QR of a complex Ginibre matrix with the diagonal of R
/// made positive.
pub fn haar_unitary(dim: usize, rng: &mut impl Rng) -> CMat {
    let g = gaussian_matrix(dim, dim, rng);
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for c in 0..dim {
        let d = r[(c, c)];
        let ph = if d.norm() > 0.0 { d / d.norm() } else { C64::new(1.0, 0.0) };
        for k in 0..dim {
            q[(k, c)] *= ph;
        }
    }
    q
}

pub fn haar_vector(dim: usize, rng: &mut impl Rng) -> CVec {
    let mut v = CVec::from_iterator(dim, (0..dim).map(|_| gaussian_c64(rng)));
    let n = v.norm();
    v /= C64::new(n, 0.0);
    v
}

/// Induced-measure density matrix: partial trace of a Haar pure state on
/// a `dim x dim` space.
pub fn random_density_matrix(dim: usize, rng: &mut impl Rng) -> CMat {
    let v = haar_vector(dim * dim, rng);
    let m = CMat::from_row_slice(dim, dim, v.as_slice());
    let rho = &m * m.adjoint();
    super::eig::hermitize(&rho)
}

pub fn random_hermitian(dim: usize, rng: &mut impl Rng) -> CMat {
    let g = gaussian_matrix(dim, dim, rng);
    super::eig::hermitize(&(&g + g.adjoint()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unitary_is_unitary() {
        let mut rng = rng_from_seed(3);
        let u = haar_unitary(4, &mut rng);
        let e = u.adjoint() * &u - CMat::identity(4, 4);
        assert!(e.iter().all(|z| z.norm() < 1e-10));
    }

    #[test]
    fn deterministic_for_seed() {
        let a = haar_unitary(3, &mut rng_from_seed(99));
        let b = haar_unitary(3, &mut rng_from_seed(99));
        assert_eq!(a, b);
    }

    #[test]
    fn density_trace_one() {
        let mut rng = rng_from_seed(5);
        let r = random_density_matrix(3, &mut rng);
        assert!((r.trace().re - 1.0).abs() < 1e-12);
    }
}

/// Kind of random state to draw.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StateKind {
    Pure,
    Density,
}

pub fn random_state(kind: StateKind, layout: super::RegisterLayout, seed: u64) -> crate::error::Result<super::io::StateFile> {
    let d = layout.total_dim();
    let mut rng = rng_from_seed(seed);
    Ok(match kind {
        StateKind::Pure => super::io::StateFile::Pure(super::StateVector::new(layout, haar_vector(d, &mut rng))?),
        StateKind::Density => {
            super::io::StateFile::Density(super::DensityOperator::new(layout, random_density_matrix(d, &mut rng))?)
        }
    })
}

pub fn random_unitary(dim: usize, seed: u64) -> crate::error::Result<super::IsometryMap> {
    if dim == 0 {
        return Err(crate::error::QsrError::OutOfRange("dimension 0".into()));
    }
    let l = super::RegisterLayout::single("U", dim)?;
    super::IsometryMap::new(l.clone(), l, haar_unitary(dim, &mut rng_from_seed(seed)))
}
