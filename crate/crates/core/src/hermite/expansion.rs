use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::hermite::polynomial::{factorial, normalized_hermite_table};
use crate::hermite::MultiIndex;
use crate::scalar::Scalar;

/// Coefficients with magnitude below this are dropped after arithmetic.
pub const PRUNE_THRESHOLD: f64 = 1e-15;

/// A finite Hermite chaos expansion `F = Σ c_α h_α` in `L²(γ_n)`, with the
/// orthonormal basis `h_α = Π He_{α_i}(x_i) / sqrt(α_i!)`.
///
/// Keys always have length `dimension`, zero coefficients are never stored,
/// and iteration follows the graded multi-index order.
#[derive(Clone, Debug, PartialEq)]
pub struct ChaosExpansion<T> {
    dimension: usize,
    coefficients: BTreeMap<MultiIndex, T>,
    max_degree: usize,
}

impl<T: Scalar> ChaosExpansion<T> {
    pub fn zero(dimension: usize) -> Self {
        assert!(dimension >= 1, "expansion dimension must be positive");
        ChaosExpansion { dimension, coefficients: BTreeMap::new(), max_degree: 0 }
    }

    pub fn constant(dimension: usize, value: T) -> Self {
        Self::from_map(dimension, BTreeMap::from([(MultiIndex::zero(dimension), value)]))
    }

    /// The coordinate function `x_i` (zero-based `i`).
    pub fn coordinate(dimension: usize, i: usize) -> Self {
        assert!(i < dimension, "coordinate {i} out of range for dimension {dimension}");
        Self::from_map(dimension, BTreeMap::from([(MultiIndex::unit(dimension, i), T::one())]))
    }

    /// Builds an expansion from `(index, coefficient)` pairs; repeated
    /// indices are summed.
    pub fn from_terms<I>(dimension: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (MultiIndex, T)>,
    {
        if dimension == 0 {
            return Err(Error::InvalidParameter { name: "dimension", reason: "must be positive".into() });
        }
        let mut map: BTreeMap<MultiIndex, T> = BTreeMap::new();
        for (alpha, c) in terms {
            if alpha.dimension() != dimension {
                return Err(Error::DimensionMismatch { expected: dimension, found: alpha.dimension() });
            }
            let slot = map.entry(alpha).or_insert_with(T::zero);
            *slot = *slot + c;
        }
        Ok(Self::from_map(dimension, map))
    }

    pub(crate) fn from_map(dimension: usize, mut coefficients: BTreeMap<MultiIndex, T>) -> Self {
        let threshold = T::lit(PRUNE_THRESHOLD);
        coefficients.retain(|_, c| c.abs() >= threshold);
        let max_degree = coefficients.keys().map(MultiIndex::order).max().unwrap_or(0);
        ChaosExpansion { dimension, coefficients, max_degree }
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    /// Largest total degree among stored coefficients (0 for the zero expansion).
    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    pub fn len(&self) -> usize {
        self.coefficients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coefficients.is_empty()
    }

    pub fn coefficient(&self, alpha: &MultiIndex) -> T {
        self.coefficients.get(alpha).copied().unwrap_or_else(T::zero)
    }

    /// Coefficient of the constant basis element, i.e. the Gaussian mean.
    pub fn constant_term(&self) -> T {
        self.coefficient(&MultiIndex::zero(self.dimension))
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, T)> + '_ {
        self.coefficients.iter().map(|(a, &c)| (a, c))
    }

    /// `Σ c_α²`, the squared `L²(γ_n)` norm.
    pub fn norm_squared(&self) -> T {
        self.coefficients.values().map(|&c| c * c).sum()
    }

    /// Applies `f(α, c_α)` to every coefficient, keeping indices fixed.
    pub fn map_coefficients(&self, f: impl Fn(&MultiIndex, T) -> T) -> Self {
        let map = self.coefficients.iter().map(|(a, &c)| (a.clone(), f(a, c))).collect();
        Self::from_map(self.dimension, map)
    }

    /// Keeps only the terms for which `keep(α)` holds.
    pub fn filter_terms(&self, keep: impl Fn(&MultiIndex) -> bool) -> Self {
        let map = self
            .coefficients
            .iter()
            .filter(|(a, _)| keep(a))
            .map(|(a, &c)| (a.clone(), c))
            .collect();
        Self::from_map(self.dimension, map)
    }

    pub fn scale(&self, factor: T) -> Self {
        self.map_coefficients(|_, c| c * factor)
    }

    /// `self + factor * other`.
    pub fn add_scaled(&self, other: &Self, factor: T) -> Result<Self> {
        self.check_dimension(other.dimension)?;
        let mut map = self.coefficients.clone();
        for (a, &c) in &other.coefficients {
            let slot = map.entry(a.clone()).or_insert_with(T::zero);
            *slot = *slot + factor * c;
        }
        Ok(Self::from_map(self.dimension, map))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.add_scaled(other, T::one())
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add_scaled(other, -T::one())
    }

    /// Exact product of two expansions via the Hermite linearization formula
    ///
    /// `h_m h_n = Σ_k sqrt(m! n! (m+n-2k)!) / (k! (m-k)! (n-k)!) h_{m+n-2k}`
    ///
    /// applied coordinate by coordinate.
    pub fn multiply(&self, other: &Self) -> Result<Self> {
        self.check_dimension(other.dimension)?;
        let n = self.dimension;
        let mut map: BTreeMap<MultiIndex, T> = BTreeMap::new();
        let mut cache: BTreeMap<(u32, u32), Vec<(u32, T)>> = BTreeMap::new();
        let mut current = vec![0u32; n];
        for (a, &ca) in &self.coefficients {
            for (b, &cb) in &other.coefficients {
                let factors: Vec<Vec<(u32, T)>> = (0..n)
                    .map(|i| {
                        cache
                            .entry((a.get(i), b.get(i)))
                            .or_insert_with(|| linearization(a.get(i), b.get(i)))
                            .clone()
                    })
                    .collect();
                accumulate_tensor(&factors, 0, ca * cb, &mut current, &mut map);
            }
        }
        Ok(Self::from_map(n, map))
    }

    /// Evaluates `Σ c_α h_α(point)`.
    pub fn evaluate(&self, point: &[T]) -> Result<T> {
        self.check_dimension(point.len())?;
        let tables: Vec<Vec<T>> =
            point.iter().map(|&x| normalized_hermite_table(self.max_degree, x)).collect();
        Ok(self.evaluate_with_tables(|i, k| tables[i][k]))
    }

    /// Evaluates using precomputed per-coordinate basis values
    /// `table(i, k) = h_k(x_i)`.
    pub(crate) fn evaluate_with_tables(&self, table: impl Fn(usize, usize) -> T) -> T {
        let mut acc = T::zero();
        for (alpha, &c) in &self.coefficients {
            let mut basis = c;
            for (i, &a) in alpha.exponents().iter().enumerate() {
                if a != 0 {
                    basis = basis * table(i, a as usize);
                }
            }
            acc = acc + basis;
        }
        acc
    }

    /// Re-expresses the expansion in a higher dimension (new coordinates unused).
    pub fn embedded(&self, dimension: usize) -> Result<Self> {
        if dimension < self.dimension {
            return Err(Error::DimensionOutOfRange { k: dimension, n: self.dimension });
        }
        let map = self.coefficients.iter().map(|(a, &c)| (a.embedded(dimension), c)).collect();
        Ok(Self::from_map(dimension, map))
    }

    /// Largest coefficient-wise absolute difference over the union of supports.
    pub fn max_coefficient_difference(&self, other: &Self) -> Result<T> {
        self.check_dimension(other.dimension)?;
        Ok(raw_max_difference(self, other))
    }

    /// Largest absolute coefficient.
    pub fn max_abs_coefficient(&self) -> T {
        self.coefficients.values().fold(T::zero(), |m, c| m.max(c.abs()))
    }

    fn check_dimension(&self, found: usize) -> Result<()> {
        if found != self.dimension {
            return Err(Error::DimensionMismatch { expected: self.dimension, found });
        }
        Ok(())
    }
}

// Computed on the raw union of supports: pruning a difference would hide it.
fn raw_max_difference<T: Scalar>(a: &ChaosExpansion<T>, b: &ChaosExpansion<T>) -> T {
    let mut worst = T::zero();
    for (alpha, ca) in a.terms() {
        worst = worst.max((ca - b.coefficient(alpha)).abs());
    }
    for (alpha, cb) in b.terms() {
        if !a.coefficients.contains_key(alpha) {
            worst = worst.max(cb.abs());
        }
    }
    worst
}

/// One-dimensional linearization `h_m h_n = Σ (degree, coefficient)`.
fn linearization<T: Scalar>(m: u32, n: u32) -> Vec<(u32, T)> {
    let (m, n) = (m as usize, n as usize);
    (0..=m.min(n))
        .map(|k| {
            let num = (factorial(m) * factorial(n) * factorial(m + n - 2 * k)).sqrt();
            let den = factorial(k) * factorial(m - k) * factorial(n - k);
            ((m + n - 2 * k) as u32, T::lit(num / den))
        })
        .collect()
}

fn accumulate_tensor<T: Scalar>(
    factors: &[Vec<(u32, T)>],
    pos: usize,
    weight: T,
    current: &mut Vec<u32>,
    out: &mut BTreeMap<MultiIndex, T>,
) {
    if pos == factors.len() {
        let slot = out.entry(MultiIndex::new(current.clone())).or_insert_with(T::zero);
        *slot = *slot + weight;
        return;
    }
    for &(deg, c) in &factors[pos] {
        current[pos] = deg;
        accumulate_tensor(factors, pos + 1, weight * c, current, out);
    }
}

/// Evaluates `F` at `point`.
pub fn evaluate_expansion<T: Scalar>(f: &ChaosExpansion<T>, point: &[T]) -> Result<T> {
    f.evaluate(point)
}
