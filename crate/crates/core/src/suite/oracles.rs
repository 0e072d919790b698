//! Independent reference computations used by the acceptance battery.

use crate::linalg::eig::{eigh, sqrt_psd};
use crate::linalg::{c, CMat, C64};
use nalgebra::SMatrix;

type M4 = SMatrix<C64, 4, 4>;

fn paulis() -> [CMat; 4] {
    let z = c(0.0);
    let o = c(1.0);
    let i = C64::new(0.0, 1.0);
    [
        CMat::from_row_slice(2, 2, &[o, z, z, o]),
        CMat::from_row_slice(2, 2, &[z, o, o, z]),
        CMat::from_row_slice(2, 2, &[z, -i, i, z]),
        CMat::from_row_slice(2, 2, &[o, z, z, -o]),
    ]
}

/// Largest eigenvalue of a 4x4 Hermitian matrix through its real
/// symmetric embedding `[[Re, -Im], [Im, Re]]`.
fn lambda_max(h: &M4) -> f64 {
    let r = SMatrix::<f64, 8, 8>::from_fn(|i, j| {
        let z = h[(i % 4, j % 4)];
        match (i < 4, j < 4) {
            (true, true) | (false, false) => z.re,
            (true, false) => -z.im,
            (false, true) => z.im,
        }
    });
    r.symmetric_eigenvalues().max()
}

/// `min_σ Dmax(ρ_AB ‖ ρ_A ⊗ σ_B)` over Bloch vectors on the cubic grid of
/// the given step strictly inside the unit ball, for `A` of dimension
/// two and a qubit `B`.
///
/// With `σ⁻¹ = 2(I - r·P)/(1 - |r|²)` the objective is
/// `log 2/(1-|r|²) + log λmax(M₀ - Σ rᵢ Mᵢ)`, which is convex in `r`, so
/// along each grid line in `z` the lattice values are unimodal and the
/// line minimum is found by bisection on the discrete slope. Every line
/// in `x` and `y` is visited.
pub fn imax_bloch_grid(rho_ab: &CMat, step: f64) -> f64 {
    let da = 2;
    let rho_a = crate::entropies::maxinfo::ptrace_b(rho_ab, da, 2);
    let (va, wa) = eigh(&rho_a);
    let inv_a = &wa * CMat::from_diagonal(&crate::linalg::CVec::from_iterator(da, va.iter().map(|&v| c(1.0 / v)))) * wa.adjoint();
    let half = sqrt_psd(rho_ab);
    let m: Vec<M4> = paulis().iter().map(|p| M4::from_fn(|i, j| (&half * inv_a.kronecker(p) * &half)[(i, j)])).collect();
    let f = |r: [f64; 3]| -> f64 {
        let r2 = r[0] * r[0] + r[1] * r[1] + r[2] * r[2];
        let h = m[0] - m[1] * c(r[0]) - m[2] * c(r[1]) - m[3] * c(r[2]);
        (2.0 / (1.0 - r2)).log2() + lambda_max(&h).log2()
    };
    let steps = (1.0 / step).round() as i64;
    let coord = |i: i64| i as f64 * step;
    let mut best = f64::INFINITY;
    for ix in -steps..=steps {
        for iy in -steps..=steps {
            let (x, y) = (coord(ix), coord(iy));
            let rest = 1.0 - x * x - y * y;
            if rest <= 0.0 {
                continue;
            }
            // largest |iz| with x² + y² + z² < 1
            let mut zmax = (rest.sqrt() / step).floor() as i64;
            while zmax >= 0 && coord(zmax).powi(2) >= rest {
                zmax -= 1;
            }
            if zmax < 0 {
                continue;
            }
            let g = |iz: i64| f([x, y, coord(iz)]);
            let (mut lo, mut hi) = (-zmax, zmax);
            while lo < hi {
                let mid = lo + (hi - lo) / 2;
                if g(mid) <= g(mid + 1) {
                    hi = mid;
                } else {
                    lo = mid + 1;
                }
            }
            best = best.min(g(lo));
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bell_pair_grid_value() {
        let h = 0.5;
        let mut m = CMat::zeros(4, 4);
        for &(i, j) in &[(0, 0), (0, 3), (3, 0), (3, 3)] {
            m[(i, j)] = c(h);
        }
        // full rank needed for the square root route; mix in a little noise
        let m = m.scale(1.0 - 1e-9) + CMat::identity(4, 4).scale(1e-9 / 4.0);
        let v = imax_bloch_grid(&m, 0.05);
        assert!((v - 2.0).abs() < 1e-6, "{v}");
    }

    #[test]
    fn product_grid_value() {
        let a = CMat::from_row_slice(2, 2, &[c(0.7), c(0.1), c(0.1), c(0.3)]);
        let b = CMat::from_row_slice(2, 2, &[c(0.6), c(0.0), c(0.0), c(0.4)]);
        // σ = diag(0.6, 0.4) has Bloch vector (0, 0, 0.2), on the 0.05 grid
        let v = imax_bloch_grid(&a.kronecker(&b), 0.05);
        assert!(v.abs() < 1e-9, "{v}");
    }
}
