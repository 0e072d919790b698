use super::eig::{eigh, hermiticity_residual, hermitize, TOL_HERM};
use super::{c, CMat, CVec, RegisterLayout, C64};
use crate::error::{invariant, QsrError, Result};

/// Hermitian, positive semidefinite, unit-trace matrix on a layout.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    layout: RegisterLayout,
    matrix: CMat,
}

/// Unit vector on a layout.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    layout: RegisterLayout,
    amps: CVec,
}

/// Linear map with `M†M = I` between two layouts.
#[derive(Debug, Clone, PartialEq)]
pub struct IsometryMap {
    input: RegisterLayout,
    output: RegisterLayout,
    matrix: CMat,
}

impl DensityOperator {
    pub fn new(layout: RegisterLayout, matrix: CMat) -> Result<Self> {
        let s = Self::new_unchecked(layout, matrix)?;
        s.validate()?;
        Ok(s)
    }

    /// Checks only the shape. Used for intermediate results whose
    /// invariants hold up to rounding by construction.
    pub fn new_unchecked(layout: RegisterLayout, matrix: CMat) -> Result<Self> {
        let d = layout.total_dim();
        if matrix.nrows() != d || matrix.ncols() != d {
            return Err(QsrError::LayoutMismatch(format!(
                "matrix is {}x{}, layout {layout} has dimension {d}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        Ok(Self { layout, matrix })
    }

    pub fn validate(&self) -> Result<()> {
        let h = hermiticity_residual(&self.matrix);
        if h > TOL_HERM {
            return Err(invariant("hermiticity", h));
        }
        let tr = self.matrix.trace();
        if (tr.re - 1.0).abs() > 1e-9 || tr.im.abs() > 1e-9 {
            return Err(invariant("unit trace", (tr - c(1.0)).norm()));
        }
        let (vals, _) = eigh(&self.matrix);
        let min = vals.last().copied().unwrap_or(0.0);
        if min < -1e-9 {
            return Err(invariant("positive semidefinite", -min));
        }
        Ok(())
    }

    pub fn layout(&self) -> &RegisterLayout {
        &self.layout
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMat {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn maximally_mixed(layout: RegisterLayout) -> Self {
        let d = layout.total_dim();
        Self { layout, matrix: CMat::identity(d, d).scale(1.0 / d as f64) }
    }

    pub fn basis(layout: RegisterLayout, index: usize) -> Result<Self> {
        Ok(StateVector::basis(layout, index)?.to_density())
    }

    /// Same matrix, different labeling with identical total dimension.
    pub fn relabel(&self, layout: RegisterLayout) -> Result<Self> {
        Self::new_unchecked(layout, self.matrix.clone())
    }

    pub fn marginal(&self, keep: &[&str]) -> Result<Self> {
        partial_trace(self, keep)
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        eigh(&self.matrix).0
    }

    pub fn rank(&self, tol: f64) -> usize {
        self.eigenvalues().iter().filter(|&&v| v > tol).count()
    }
}

impl StateVector {
    pub fn new(layout: RegisterLayout, amps: CVec) -> Result<Self> {
        let s = Self::new_unchecked(layout, amps)?;
        let n = s.amps.norm();
        if (n - 1.0).abs() > 1e-10 {
            return Err(invariant("unit norm", (n - 1.0).abs()));
        }
        Ok(s)
    }

    pub fn new_unchecked(layout: RegisterLayout, amps: CVec) -> Result<Self> {
        if amps.len() != layout.total_dim() {
            return Err(QsrError::LayoutMismatch(format!(
                "vector has length {}, layout {layout} has dimension {}",
                amps.len(),
                layout.total_dim()
            )));
        }
        Ok(Self { layout, amps })
    }

    pub fn basis(layout: RegisterLayout, index: usize) -> Result<Self> {
        let d = layout.total_dim();
        if index >= d {
            return Err(QsrError::OutOfRange(format!("basis index {index} >= {d}")));
        }
        let mut amps = CVec::zeros(d);
        amps[index] = c(1.0);
        Ok(Self { layout, amps })
    }

    /// Basis state with one index per register.
    pub fn product_basis(layout: RegisterLayout, digits: &[usize]) -> Result<Self> {
        let dims = layout.dims();
        if digits.len() != dims.len() || digits.iter().zip(&dims).any(|(a, d)| a >= d) {
            return Err(QsrError::OutOfRange("basis digits do not fit layout".into()));
        }
        let idx = digits.iter().zip(&dims).fold(0, |acc, (a, d)| acc * d + a);
        Self::basis(layout, idx)
    }

    pub fn layout(&self) -> &RegisterLayout {
        &self.layout
    }

    pub fn amplitudes(&self) -> &CVec {
        &self.amps
    }

    pub fn into_amplitudes(self) -> CVec {
        self.amps
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn to_density(&self) -> DensityOperator {
        let m = &self.amps * self.amps.adjoint();
        DensityOperator { layout: self.layout.clone(), matrix: m }
    }

    pub fn relabel(&self, layout: RegisterLayout) -> Result<Self> {
        Self::new_unchecked(layout, self.amps.clone())
    }

    /// Reduced state on `keep` (original relative order).
    pub fn marginal(&self, keep: &[&str]) -> Result<DensityOperator> {
        let (kl, x) = self.split_matrix(keep)?;
        let m = &x * x.adjoint();
        Ok(DensityOperator { layout: kl, matrix: hermitize(&m) })
    }

    /// Amplitudes reshaped as a `dim(keep) x dim(rest)` matrix, with `keep`
    /// in original relative order.
    pub(crate) fn split_matrix(&self, keep: &[&str]) -> Result<(RegisterLayout, CMat)> {
        if keep.is_empty() {
            return Err(QsrError::InvalidLayout("empty keep set".into()));
        }
        let kl = self.layout.restrict(keep)?;
        let rest = self.layout.complement(keep);
        let mut order: Vec<&str> = kl.labels();
        order.extend(rest.iter().copied());
        let p = permute_vec(&self.layout, &self.amps, &order)?;
        let dk = kl.total_dim();
        let dr = self.amps.len() / dk;
        Ok((kl, CMat::from_row_slice(dk, dr, p.as_slice())))
    }

    pub fn inner(&self, other: &StateVector) -> Result<C64> {
        if self.layout != other.layout {
            return Err(QsrError::LayoutMismatch(format!("{} vs {}", self.layout, other.layout)));
        }
        Ok(self.amps.dotc(&other.amps))
    }
}

impl IsometryMap {
    pub fn new(input: RegisterLayout, output: RegisterLayout, matrix: CMat) -> Result<Self> {
        let s = Self::new_unchecked(input, output, matrix)?;
        let d = s.matrix.ncols();
        let e = s.matrix.adjoint() * &s.matrix - CMat::identity(d, d);
        let r = super::max_abs(&e);
        if r > 1e-9 {
            return Err(invariant("isometry (M†M = I)", r));
        }
        Ok(s)
    }

    pub fn new_unchecked(input: RegisterLayout, output: RegisterLayout, matrix: CMat) -> Result<Self> {
        if matrix.nrows() != output.total_dim() || matrix.ncols() != input.total_dim() {
            return Err(QsrError::LayoutMismatch(format!(
                "matrix {}x{} does not map {input} to {output}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        if output.total_dim() < input.total_dim() {
            return Err(QsrError::InvalidLayout("isometry output smaller than input".into()));
        }
        Ok(Self { input, output, matrix })
    }

    pub fn identity(layout: RegisterLayout) -> Self {
        let d = layout.total_dim();
        Self { input: layout.clone(), output: layout, matrix: CMat::identity(d, d) }
    }

    /// Embedding of the input as the `|0>` block of a larger output space.
    pub fn embedding(input: RegisterLayout, output: RegisterLayout) -> Result<Self> {
        let mut m = CMat::zeros(output.total_dim(), input.total_dim());
        for i in 0..input.total_dim() {
            m[(i, i)] = c(1.0);
        }
        Self::new_unchecked(input, output, m)
    }

    pub fn input_layout(&self) -> &RegisterLayout {
        &self.input
    }

    pub fn output_layout(&self) -> &RegisterLayout {
        &self.output
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn is_unitary(&self) -> bool {
        self.matrix.nrows() == self.matrix.ncols()
    }

    pub fn with_layouts(&self, input: RegisterLayout, output: RegisterLayout) -> Result<Self> {
        Self::new_unchecked(input, output, self.matrix.clone())
    }
}

/// Values that live on a layout: pure or mixed states.
pub trait Quantum: Sized {
    fn layout(&self) -> &RegisterLayout;
    fn tensor_with(&self, other: &Self) -> Result<Self>;
    fn permuted(&self, new_order: &[&str]) -> Result<Self>;
    fn transformed(&self, v: &IsometryMap) -> Result<Self>;
}

impl Quantum for DensityOperator {
    fn layout(&self) -> &RegisterLayout {
        &self.layout
    }

    fn tensor_with(&self, other: &Self) -> Result<Self> {
        let layout = self.layout.concat(&other.layout)?;
        Ok(Self { layout, matrix: self.matrix.kronecker(&other.matrix) })
    }

    fn permuted(&self, new_order: &[&str]) -> Result<Self> {
        let idx = self.layout.permutation_indices(new_order)?;
        let layout = self.layout.select(new_order)?;
        let d = idx.len();
        let m = CMat::from_fn(d, d, |a, b| self.matrix[(idx[a], idx[b])]);
        Ok(Self { layout, matrix: m })
    }

    fn transformed(&self, v: &IsometryMap) -> Result<Self> {
        let (order, final_order, out_layout) = plan_application(&self.layout, v)?;
        let o: Vec<&str> = order.iter().map(String::as_str).collect();
        let p = self.permuted(&o)?;
        let r = p.dim() / v.input.total_dim();
        let left = left_mul_kron_id(&v.matrix, &p.matrix, r);
        let both = left_mul_kron_id(&v.matrix, &left.adjoint(), r).adjoint();
        let tmp = Self { layout: out_layout, matrix: both };
        let fo: Vec<&str> = final_order.iter().map(String::as_str).collect();
        tmp.permuted(&fo)
    }
}

impl Quantum for StateVector {
    fn layout(&self) -> &RegisterLayout {
        &self.layout
    }

    fn tensor_with(&self, other: &Self) -> Result<Self> {
        let layout = self.layout.concat(&other.layout)?;
        Ok(Self { layout, amps: self.amps.kronecker(&other.amps) })
    }

    fn permuted(&self, new_order: &[&str]) -> Result<Self> {
        let amps = permute_vec(&self.layout, &self.amps, new_order)?;
        Ok(Self { layout: self.layout.select(new_order)?, amps })
    }

    fn transformed(&self, v: &IsometryMap) -> Result<Self> {
        let (layout, amps) = apply_matrix_vec(&self.layout, &self.amps, v)?;
        Ok(Self { layout, amps })
    }
}

pub fn tensor<Q: Quantum>(a: &Q, b: &Q) -> Result<Q> {
    a.tensor_with(b)
}

pub fn permute<Q: Quantum>(s: &Q, new_order: &[&str]) -> Result<Q> {
    s.permuted(new_order)
}

pub fn apply_isometry<Q: Quantum>(v: &IsometryMap, s: &Q) -> Result<Q> {
    s.transformed(v)
}

pub fn partial_trace(op: &DensityOperator, keep: &[&str]) -> Result<DensityOperator> {
    if keep.is_empty() {
        return Err(QsrError::InvalidLayout("empty keep set".into()));
    }
    let kl = op.layout.restrict(keep)?;
    if kl.len() == op.layout.len() {
        return Ok(op.clone());
    }
    let mut order = kl.labels();
    let rest = op.layout.complement(keep);
    order.extend(rest.iter().copied());
    let p = op.permuted(&order)?;
    let dk = kl.total_dim();
    let dt = op.dim() / dk;
    let m = CMat::from_fn(dk, dk, |i, j| {
        let mut s = C64::new(0.0, 0.0);
        for t in 0..dt {
            s += p.matrix[(i * dt + t, j * dt + t)];
        }
        s
    });
    Ok(DensityOperator { layout: kl, matrix: m })
}

pub(crate) fn permute_vec(layout: &RegisterLayout, amps: &CVec, new_order: &[&str]) -> Result<CVec> {
    let idx = layout.permutation_indices(new_order)?;
    Ok(CVec::from_iterator(idx.len(), idx.iter().map(|&i| amps[i])))
}

/// Acting-register ordering, final ordering and the intermediate layout
/// for applying `v` to a state on `layout`. Output registers take the
/// place of the first input register.
fn plan_application(
    layout: &RegisterLayout,
    v: &IsometryMap,
) -> Result<(Vec<String>, Vec<String>, RegisterLayout)> {
    let ins = v.input.labels();
    for (l, d) in v.input.entries() {
        let have = layout.dim_of(l)?;
        if have != *d {
            return Err(QsrError::LayoutMismatch(format!("register {l}: state has {have}, map expects {d}")));
        }
    }
    let rest = layout.complement(&ins);
    let mut order: Vec<String> = ins.iter().map(|s| s.to_string()).collect();
    order.extend(rest.iter().map(|s| s.to_string()));
    let rest_layout = layout.restrict(&rest)?;
    let out_layout = v.output.concat(&rest_layout)?;
    let first = ins
        .iter()
        .filter_map(|l| layout.position(l))
        .min()
        .unwrap_or(0);
    let mut final_order = Vec::new();
    let mut inserted = false;
    for (i, (l, _)) in layout.entries().iter().enumerate() {
        if i == first && !inserted {
            final_order.extend(v.output.labels().iter().map(|s| s.to_string()));
            inserted = true;
        }
        if !ins.contains(&l.as_str()) {
            final_order.push(l.clone());
        }
    }
    if !inserted {
        final_order.extend(v.output.labels().iter().map(|s| s.to_string()));
    }
    Ok((order, final_order, out_layout))
}

/// Applies `v.matrix` (any linear map, not necessarily isometric) to a
/// vector on `layout`.
pub(crate) fn apply_matrix_vec(layout: &RegisterLayout, amps: &CVec, v: &IsometryMap) -> Result<(RegisterLayout, CVec)> {
    let (order, final_order, out_layout) = plan_application(layout, v)?;
    let o: Vec<&str> = order.iter().map(String::as_str).collect();
    let p = permute_vec(layout, amps, &o)?;
    let din = v.input.total_dim();
    let r = amps.len() / din;
    let x = CMat::from_row_slice(din, r, p.as_slice());
    let y = &v.matrix * x;
    let flat = CVec::from_iterator(y.len(), (0..y.nrows()).flat_map(|i| (0..r).map(move |t| (i, t))).map(|(i, t)| y[(i, t)]));
    let fo: Vec<&str> = final_order.iter().map(String::as_str).collect();
    let amps = permute_vec(&out_layout, &flat, &fo)?;
    Ok((out_layout.select(&fo)?, amps))
}

/// `(V ⊗ I_r) M` where the first factor of M's row index is V's input.
fn left_mul_kron_id(v: &CMat, m: &CMat, r: usize) -> CMat {
    let din = v.ncols();
    let dout = v.nrows();
    let cols = m.ncols();
    let x = CMat::from_fn(din, r * cols, |xi, tc| m[(xi * r + tc / cols, tc % cols)]);
    let y = v * x;
    CMat::from_fn(dout * r, cols, |row, col| y[(row / r, (row % r) * cols + col)])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::random::{haar_unitary, haar_vector, random_density_matrix, rng_from_seed};

    fn lay(e: &[(&str, usize)]) -> RegisterLayout {
        RegisterLayout::new(e.iter().copied()).unwrap()
    }

    fn close(a: &CMat, b: &CMat, tol: f64) -> bool {
        a.shape() == b.shape() && (a - b).iter().all(|z| z.norm() <= tol)
    }

    #[test]
    fn tensor_basis_vectors() {
        let p = StateVector::basis(lay(&[("P", 2)]), 0).unwrap();
        let q = StateVector::basis(lay(&[("Q", 2)]), 1).unwrap();
        let pq = tensor(&p, &q).unwrap();
        assert_eq!(pq.layout().labels(), vec!["P", "Q"]);
        assert_eq!(pq.amplitudes()[1], c(1.0));
        assert!(tensor(&p, &p).is_err());
    }

    #[test]
    fn tensor_maximally_mixed() {
        let a = DensityOperator::maximally_mixed(lay(&[("P", 2)]));
        let b = DensityOperator::maximally_mixed(lay(&[("Q", 2)]));
        let ab = tensor(&a, &b).unwrap();
        assert!(close(ab.matrix(), &CMat::identity(4, 4).scale(0.25), 1e-15));
    }

    #[test]
    fn trace_of_bell_state() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let v = CVec::from_vec(vec![c(s), c(0.0), c(0.0), c(s)]);
        let phi = StateVector::new(lay(&[("P", 2), ("Q", 2)]), v).unwrap().to_density();
        let r = partial_trace(&phi, &["P"]).unwrap();
        assert!(close(r.matrix(), &CMat::identity(2, 2).scale(0.5), 1e-15));
        assert!(partial_trace(&phi, &[]).is_err());
        assert!(partial_trace(&phi, &["X"]).is_err());
    }

    #[test]
    fn permute_swaps_factors() {
        let v = StateVector::product_basis(lay(&[("P", 2), ("Q", 2)]), &[0, 1]).unwrap();
        let w = permute(&v, &["Q", "P"]).unwrap();
        assert_eq!(w.amplitudes()[2], c(1.0));
        let back = permute(&w, &["P", "Q"]).unwrap();
        assert_eq!(back, v);
        assert!(permute(&v, &["P", "P"]).is_err());
    }

    #[test]
    fn product_round_trip_and_composition() {
        let mut rng = rng_from_seed(1);
        let rp = DensityOperator::new(lay(&[("P", 3)]), random_density_matrix(3, &mut rng)).unwrap();
        let sq = DensityOperator::new(lay(&[("Q", 2)]), random_density_matrix(2, &mut rng)).unwrap();
        let j = tensor(&rp, &sq).unwrap();
        assert!(close(partial_trace(&j, &["P"]).unwrap().matrix(), rp.matrix(), 1e-12));
        assert!(close(partial_trace(&j, &["Q"]).unwrap().matrix(), sq.matrix(), 1e-12));

        let psi = StateVector::new(lay(&[("A", 2), ("B", 2), ("C", 2)]), haar_vector(8, &mut rng)).unwrap();
        let rho = psi.to_density();
        let two = partial_trace(&partial_trace(&rho, &["A", "B"]).unwrap(), &["A"]).unwrap();
        let one = partial_trace(&rho, &["A"]).unwrap();
        assert!(close(two.matrix(), one.matrix(), 1e-12));
        assert!(close(psi.marginal(&["A", "C"]).unwrap().matrix(), partial_trace(&rho, &["A", "C"]).unwrap().matrix(), 1e-12));
    }

    #[test]
    fn marginal_keeps_relative_order() {
        let mut rng = rng_from_seed(2);
        let psi = StateVector::new(lay(&[("A", 2), ("B", 3), ("C", 2)]), haar_vector(12, &mut rng)).unwrap();
        let m = psi.marginal(&["C", "A"]).unwrap();
        assert_eq!(m.layout().labels(), vec!["A", "C"]);
    }

    #[test]
    fn isometry_in_the_middle() {
        let mut rng = rng_from_seed(4);
        let psi = StateVector::new(lay(&[("A", 2), ("B", 2), ("C", 3)]), haar_vector(12, &mut rng)).unwrap();
        let u = IsometryMap::new(lay(&[("B", 2)]), lay(&[("B", 2)]), haar_unitary(2, &mut rng)).unwrap();
        let out = apply_isometry(&u, &psi).unwrap();
        assert_eq!(out.layout().labels(), vec!["A", "B", "C"]);
        assert!((out.amplitudes().norm() - 1.0).abs() < 1e-12);
        // density path agrees with vector path
        let d = apply_isometry(&u, &psi.to_density()).unwrap();
        assert!(close(d.matrix(), out.to_density().matrix(), 1e-12));
        // untouched marginal unchanged
        assert!(close(
            out.marginal(&["A", "C"]).unwrap().matrix(),
            psi.marginal(&["A", "C"]).unwrap().matrix(),
            1e-12
        ));
    }

    #[test]
    fn embedding_then_trace_back() {
        let q = lay(&[("Q", 2)]);
        let e = IsometryMap::embedding(q.clone(), lay(&[("X", 3)])).unwrap();
        let mut rng = rng_from_seed(8);
        let rho = DensityOperator::new(q, random_density_matrix(2, &mut rng)).unwrap();
        let out = apply_isometry(&e, &rho).unwrap();
        assert_eq!(out.layout().labels(), vec!["X"]);
        assert!(close(&out.matrix().view((0, 0), (2, 2)).into_owned(), rho.matrix(), 1e-15));
    }

    #[test]
    fn wrong_dims_rejected() {
        let psi = StateVector::basis(lay(&[("A", 2), ("B", 2)]), 0).unwrap();
        let u = IsometryMap::identity(lay(&[("B", 3)]));
        assert!(apply_isometry(&u, &psi).is_err());
    }

    #[test]
    fn validation() {
        let l = lay(&[("A", 2)]);
        assert!(DensityOperator::new(l.clone(), CMat::identity(2, 2)).is_err());
        let neg = CMat::from_row_slice(2, 2, &[c(1.1), c(0.0), c(0.0), c(-0.1)]);
        assert!(DensityOperator::new(l.clone(), neg).is_err());
        assert!(StateVector::new(l, CVec::from_vec(vec![c(1.0), c(1.0)])).is_err());
    }
}

/// Canonical purification `Σ_i √λ_i |v_i⟩|i⟩` with an ancilla of the same
/// dimension as the system.
pub fn purify(rho: &DensityOperator, anc_label: &str) -> Result<StateVector> {
    rho.validate()?;
    purify_with_dim(rho, anc_label, rho.dim())
}

/// Canonical purification with an ancilla of dimension `anc_dim`, which
/// must be at least the rank of `rho`. Extra ancilla levels stay empty.
pub(crate) fn purify_with_dim(rho: &DensityOperator, anc_label: &str, anc_dim: usize) -> Result<StateVector> {
    if rho.layout.contains(anc_label) {
        return Err(QsrError::LabelCollision(anc_label.to_string()));
    }
    let (vals, u) = eigh(&rho.matrix);
    let rank = vals.iter().filter(|&&v| v > 1e-14).count();
    if rank > anc_dim {
        return Err(QsrError::OutOfRange(format!("ancilla dimension {anc_dim} below rank {rank}")));
    }
    let d = rho.dim();
    let mut amps = CVec::zeros(d * anc_dim);
    for (i, &l) in vals.iter().enumerate().take(anc_dim.min(d)) {
        if l <= 0.0 {
            continue;
        }
        let s = l.sqrt();
        for k in 0..d {
            amps[k * anc_dim + i] += u[(k, i)] * s;
        }
    }
    let n = amps.norm();
    amps /= c(n);
    let layout = rho.layout.concat(&RegisterLayout::single(anc_label, anc_dim)?)?;
    Ok(StateVector { layout, amps })
}
