use crate::error::{QsrError, Result};
use serde::{Deserialize, Serialize};

/// Ordered list of labeled subsystems. The first entry is the most
/// significant factor of the row-major basis index.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RegisterLayout {
    entries: Vec<(String, usize)>,
}

impl RegisterLayout {
    pub fn new<S: Into<String>>(entries: impl IntoIterator<Item = (S, usize)>) -> Result<Self> {
        let entries: Vec<(String, usize)> =
            entries.into_iter().map(|(l, d)| (l.into(), d)).collect();
        for (i, (l, d)) in entries.iter().enumerate() {
            if *d == 0 {
                return Err(QsrError::InvalidLayout(format!("register {l} has dimension 0")));
            }
            if l.is_empty() {
                return Err(QsrError::InvalidLayout("empty label".into()));
            }
            if entries[..i].iter().any(|(o, _)| o == l) {
                return Err(QsrError::LabelCollision(l.clone()));
            }
        }
        Ok(Self { entries })
    }

    /// Single register layout.
    pub fn single(label: &str, dim: usize) -> Result<Self> {
        Self::new([(label, dim)])
    }

    /// Layout with no registers (total dimension 1).
    pub fn empty() -> Self {
        Self { entries: Vec::new() }
    }

    pub fn entries(&self) -> &[(String, usize)] {
        &self.entries
    }

    pub fn labels(&self) -> Vec<&str> {
        self.entries.iter().map(|(l, _)| l.as_str()).collect()
    }

    pub fn dims(&self) -> Vec<usize> {
        self.entries.iter().map(|(_, d)| *d).collect()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn total_dim(&self) -> usize {
        self.entries.iter().map(|(_, d)| *d).product()
    }

    pub fn position(&self, label: &str) -> Option<usize> {
        self.entries.iter().position(|(l, _)| l == label)
    }

    pub fn contains(&self, label: &str) -> bool {
        self.position(label).is_some()
    }

    pub fn dim_of(&self, label: &str) -> Result<usize> {
        self.position(label)
            .map(|p| self.entries[p].1)
            .ok_or_else(|| QsrError::UnknownLabel(label.to_string()))
    }

    /// Product of the dimensions of the given labels.
    pub fn dim_of_set(&self, labels: &[&str]) -> Result<usize> {
        labels.iter().try_fold(1usize, |acc, l| Ok(acc * self.dim_of(l)?))
    }

    pub fn concat(&self, other: &RegisterLayout) -> Result<Self> {
        let mut e = self.entries.clone();
        e.extend(other.entries.iter().cloned());
        Self::new(e)
    }

    /// Sub-layout with the given labels, in the order given.
    pub fn select(&self, labels: &[&str]) -> Result<Self> {
        let e = labels
            .iter()
            .map(|l| Ok(((*l).to_string(), self.dim_of(l)?)))
            .collect::<Result<Vec<_>>>()?;
        Self::new(e)
    }

    /// Labels not in `labels`, in layout order.
    pub fn complement(&self, labels: &[&str]) -> Vec<&str> {
        self.entries
            .iter()
            .map(|(l, _)| l.as_str())
            .filter(|l| !labels.contains(l))
            .collect()
    }

    /// Keep only `labels`, in their original relative order.
    pub fn restrict(&self, labels: &[&str]) -> Result<Self> {
        for l in labels {
            self.dim_of(l)?;
        }
        Ok(Self {
            entries: self
                .entries
                .iter()
                .filter(|(l, _)| labels.contains(&l.as_str()))
                .cloned()
                .collect(),
        })
    }

    pub fn rename(&self, from: &str, to: &str) -> Result<Self> {
        let p = self.position(from).ok_or_else(|| QsrError::UnknownLabel(from.into()))?;
        let mut e = self.entries.clone();
        e[p].0 = to.to_string();
        Self::new(e)
    }

    /// Replace one register by several whose dimensions multiply to its
    /// dimension. The basis ordering is unchanged.
    pub fn split(&self, label: &str, parts: &[(&str, usize)]) -> Result<Self> {
        let p = self.position(label).ok_or_else(|| QsrError::UnknownLabel(label.into()))?;
        let prod: usize = parts.iter().map(|(_, d)| d).product();
        if prod != self.entries[p].1 {
            return Err(QsrError::InvalidLayout(format!(
                "cannot split {label} of dim {} into parts of product {prod}",
                self.entries[p].1
            )));
        }
        let mut e = self.entries[..p].to_vec();
        e.extend(parts.iter().map(|(l, d)| (l.to_string(), *d)));
        e.extend(self.entries[p + 1..].iter().cloned());
        Self::new(e)
    }

    /// Fuse a contiguous run of registers into one.
    pub fn merge(&self, labels: &[&str], into: &str) -> Result<Self> {
        let first = self
            .position(labels.first().ok_or_else(|| QsrError::InvalidLayout("empty merge".into()))?)
            .ok_or_else(|| QsrError::UnknownLabel(labels[0].into()))?;
        for (i, l) in labels.iter().enumerate() {
            if self.position(l) != Some(first + i) {
                return Err(QsrError::InvalidLayout(format!("merge labels not contiguous at {l}")));
            }
        }
        let dim = self.entries[first..first + labels.len()].iter().map(|(_, d)| d).product();
        let mut e = self.entries[..first].to_vec();
        e.push((into.to_string(), dim));
        e.extend(self.entries[first + labels.len()..].iter().cloned());
        Self::new(e)
    }

    /// Index map for a reordering: `out[new_flat] = old_flat`.
    pub(crate) fn permutation_indices(&self, new_order: &[&str]) -> Result<Vec<usize>> {
        if new_order.len() != self.len() {
            return Err(QsrError::InvalidLayout("new order is not a permutation".into()));
        }
        let mut seen = vec![false; self.len()];
        let mut old_pos = Vec::with_capacity(self.len());
        for l in new_order {
            let p = self.position(l).ok_or_else(|| QsrError::UnknownLabel(l.to_string()))?;
            if seen[p] {
                return Err(QsrError::InvalidLayout(format!("label {l} repeated")));
            }
            seen[p] = true;
            old_pos.push(p);
        }
        let dims = self.dims();
        let mut old_stride = vec![1usize; dims.len()];
        for i in (0..dims.len().saturating_sub(1)).rev() {
            old_stride[i] = old_stride[i + 1] * dims[i + 1];
        }
        let nd: Vec<usize> = old_pos.iter().map(|&p| dims[p]).collect();
        let ns: Vec<usize> = old_pos.iter().map(|&p| old_stride[p]).collect();
        let total = self.total_dim();
        let mut out = Vec::with_capacity(total);
        let mut idx = vec![0usize; nd.len()];
        let mut old = 0usize;
        for _ in 0..total {
            out.push(old);
            for k in (0..nd.len()).rev() {
                idx[k] += 1;
                old += ns[k];
                if idx[k] < nd[k] {
                    break;
                }
                old -= ns[k] * nd[k];
                idx[k] = 0;
            }
        }
        Ok(out)
    }
}

impl std::fmt::Display for RegisterLayout {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.entries.iter().map(|(l, d)| format!("{l}:{d}")).collect();
        write!(f, "[{}]", parts.join(","))
    }
}
