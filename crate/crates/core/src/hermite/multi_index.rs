use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

/// Exponent vector of a tensor Hermite basis element.
///
/// The dimension is part of the identity: `(1)` and `(1, 0)` are different
/// indices. Ordering is graded: lower total order first, then exponents in
/// descending lexicographic order, so `(1, 0)` precedes `(0, 1)`.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn new(exponents: Vec<u32>) -> Self {
        MultiIndex(exponents)
    }

    /// The all-zero index (the constant basis element).
    pub fn zero(dimension: usize) -> Self {
        MultiIndex(vec![0; dimension])
    }

    /// The index `e_i` of the `i`-th coordinate function.
    pub fn unit(dimension: usize, i: usize) -> Self {
        let mut e = vec![0; dimension];
        e[i] = 1;
        MultiIndex(e)
    }

    pub fn dimension(&self) -> usize {
        self.0.len()
    }

    /// Total degree `|α|`.
    pub fn order(&self) -> usize {
        self.0.iter().map(|&a| a as usize).sum()
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn get(&self, i: usize) -> u32 {
        self.0[i]
    }

    /// `α - e_i`, or `None` when `α_i = 0`.
    pub fn lowered(&self, i: usize) -> Option<Self> {
        if self.0[i] == 0 {
            return None;
        }
        let mut e = self.0.clone();
        e[i] -= 1;
        Some(MultiIndex(e))
    }

    /// `α + e_i`.
    pub fn raised(&self, i: usize) -> Self {
        let mut e = self.0.clone();
        e[i] += 1;
        MultiIndex(e)
    }

    /// True when every nonzero exponent sits in the first `k` coordinates.
    pub fn supported_in(&self, k: usize) -> bool {
        self.0.iter().skip(k).all(|&a| a == 0)
    }

    /// Same exponents padded with zeros up to `dimension`.
    pub fn embedded(&self, dimension: usize) -> Self {
        let mut e = self.0.clone();
        e.resize(dimension.max(e.len()), 0);
        MultiIndex(e)
    }
}

impl Ord for MultiIndex {
    fn cmp(&self, other: &Self) -> Ordering {
        self.order()
            .cmp(&other.order())
            .then_with(|| self.0.len().cmp(&other.0.len()))
            .then_with(|| other.0.cmp(&self.0))
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, a) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{a}")?;
        }
        write!(f, ")")
    }
}

impl From<Vec<u32>> for MultiIndex {
    fn from(v: Vec<u32>) -> Self {
        MultiIndex(v)
    }
}

impl<const N: usize> From<[u32; N]> for MultiIndex {
    fn from(v: [u32; N]) -> Self {
        MultiIndex(v.to_vec())
    }
}

/// All indices of dimension `n` with total degree at most `max_degree`, in
/// graded order. The count is `C(n + d, d)`.
pub fn enumerate_multi_indices(n: usize, max_degree: usize) -> Vec<MultiIndex> {
    let mut out = Vec::new();
    let mut buf = vec![0u32; n];
    for degree in 0..=max_degree {
        compositions(&mut buf, 0, degree, &mut out);
    }
    out
}

// Writes every split of `remaining` over buf[pos..], largest leading entry first.
fn compositions(buf: &mut [u32], pos: usize, remaining: usize, out: &mut Vec<MultiIndex>) {
    if buf.is_empty() {
        if remaining == 0 {
            out.push(MultiIndex(Vec::new()));
        }
        return;
    }
    if pos == buf.len() - 1 {
        buf[pos] = remaining as u32;
        out.push(MultiIndex(buf.to_vec()));
        return;
    }
    for first in (0..=remaining).rev() {
        buf[pos] = first as u32;
        compositions(buf, pos + 1, remaining - first, out);
    }
    buf[pos] = 0;
}
