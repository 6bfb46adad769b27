//! Tensor Gauss–Hermite quadrature for the standard Gaussian measure.
//!
//! The one-dimensional rule comes from Golub–Welsch: the nodes are the
//! eigenvalues of the Jacobi matrix of the probabilists' Hermite recurrence
//! (zero diagonal, off-diagonal `sqrt(k)`). Nodes are polished with Newton
//! steps on `h_m` and the weights taken from `w = 1 / (m h_{m-1}(x)²)`, which
//! keeps small tail weights accurate to full relative precision.

use crate::error::{Error, Result};
use crate::hermite::polynomial::normalized_hermite_table;
use crate::scalar::{compensated_sum, Scalar};

/// Default cap on the number of tensor-grid nodes.
pub const DEFAULT_NODE_BUDGET: u64 = 2_000_000;

/// One-dimensional Gauss–Hermite rule for `N(0, 1)`; weights sum to one.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussHermiteRule<T> {
    pub nodes: Vec<T>,
    pub weights: Vec<T>,
}

impl<T: Scalar> GaussHermiteRule<T> {
    /// `order`-point rule, exact for polynomials of degree `2 * order - 1`.
    pub fn new(order: usize) -> Result<Self> {
        if order == 0 {
            return Err(Error::InvalidParameter { name: "order", reason: "must be at least 1".into() });
        }
        let (mut nodes, _) = jacobi_eigen::<T>(order);
        nodes.sort_by(|a, b| a.partial_cmp(b).expect("finite nodes"));

        for x in nodes.iter_mut() {
            for _ in 0..4 {
                let h = normalized_hermite_table(order, *x);
                let deriv = T::from_count(order).sqrt() * h[order - 1];
                if deriv == T::zero() {
                    break;
                }
                *x = *x - h[order] / deriv;
            }
        }
        // The rule is symmetric about zero.
        for i in 0..order / 2 {
            let j = order - 1 - i;
            let r = (nodes[j] - nodes[i]) / T::lit(2.0);
            nodes[i] = -r;
            nodes[j] = r;
        }
        if order % 2 == 1 {
            nodes[order / 2] = T::zero();
        }

        let mut weights: Vec<T> = nodes
            .iter()
            .map(|&x| {
                let h = normalized_hermite_table(order - 1, x)[order - 1];
                T::one() / (T::from_count(order) * h * h)
            })
            .collect();
        let total = compensated_sum(weights.iter().copied());
        for w in weights.iter_mut() {
            *w = *w / total;
        }
        Ok(GaussHermiteRule { nodes, weights })
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }
}

/// Eigenvalues of the `order × order` Hermite Jacobi matrix together with the
/// Golub–Welsch weights (squared first eigenvector components), unsorted.
pub fn jacobi_eigen<T: Scalar>(order: usize) -> (Vec<T>, Vec<T>) {
    let mut diag = vec![T::zero(); order];
    let mut off: Vec<T> = (1..order).map(|k| T::from_count(k).sqrt()).collect();
    off.push(T::zero());
    let mut first_row = vec![T::zero(); order];
    first_row[0] = T::one();
    tridiagonal_ql(&mut diag, &mut off, &mut first_row);
    let weights = first_row.iter().map(|&z| z * z).collect();
    (diag, weights)
}

/// Implicit QL iteration with Wilkinson shifts on a symmetric tridiagonal
/// matrix. `off[i]` couples rows `i` and `i + 1`. Only the first row of the
/// eigenvector matrix is accumulated.
fn tridiagonal_ql<T: Scalar>(diag: &mut [T], off: &mut [T], first_row: &mut [T]) {
    let n = diag.len();
    let two = T::lit(2.0);
    for l in 0..n {
        let mut iterations = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = diag[m].abs() + diag[m + 1].abs();
                if off[m].abs() <= T::epsilon() * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iterations += 1;
            assert!(iterations <= 64, "tridiagonal QL failed to converge");

            let mut g = (diag[l + 1] - diag[l]) / (two * off[l]);
            let mut r = g.hypot(T::one());
            let shifted = if g >= T::zero() { r } else { -r };
            g = diag[m] - diag[l] + off[l] / (g + shifted);
            let (mut s, mut c, mut p) = (T::one(), T::one(), T::zero());
            let mut deflated = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * off[i];
                let b = c * off[i];
                r = f.hypot(g);
                off[i + 1] = r;
                if r == T::zero() {
                    diag[i + 1] = diag[i + 1] - p;
                    off[m] = T::zero();
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = diag[i + 1] - p;
                r = (diag[i] - g) * s + two * c * b;
                p = s * r;
                diag[i + 1] = g + p;
                g = c * r - b;

                let z = first_row[i + 1];
                first_row[i + 1] = s * first_row[i] + c * z;
                first_row[i] = c * first_row[i] - s * z;
            }
            if deflated {
                continue;
            }
            diag[l] = diag[l] - p;
            off[l] = g;
            off[m] = T::zero();
        }
    }
}

/// Full tensor-product Gauss–Hermite grid on `ℝⁿ` for `γ_n`.
///
/// Node `j` has per-coordinate digits `j = Σ d_i m^{n-1-i}` (coordinate 0 most
/// significant), so nodes are stored in lexicographic order.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadratureGrid<T> {
    dimension: usize,
    rule: GaussHermiteRule<T>,
    nodes: Vec<T>,
    weights: Vec<T>,
}

/// Node count `order^dimension` of a tensor grid, or `NodeBudgetExceeded`.
pub fn check_node_budget(dimension: usize, order: usize, budget: u64) -> Result<usize> {
    let count = u32::try_from(dimension)
        .ok()
        .and_then(|d| (order as u128).checked_pow(d))
        .unwrap_or(u128::MAX);
    if count > budget as u128 {
        return Err(Error::NodeBudgetExceeded { nodes: count, budget });
    }
    Ok(count as usize)
}

impl<T: Scalar> QuadratureGrid<T> {
    /// Grid with `order` points per coordinate under the default node budget.
    pub fn new(dimension: usize, order: usize) -> Result<Self> {
        Self::with_budget(dimension, order, DEFAULT_NODE_BUDGET)
    }

    pub fn with_budget(dimension: usize, order: usize, budget: u64) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::InvalidParameter { name: "dimension", reason: "must be at least 1".into() });
        }
        if order == 0 {
            return Err(Error::InvalidParameter { name: "order", reason: "must be at least 1".into() });
        }
        let count = check_node_budget(dimension, order, budget)?;
        let rule = GaussHermiteRule::new(order)?;
        let mut nodes = Vec::with_capacity(count * dimension);
        let mut weights = Vec::with_capacity(count);
        let mut digits = vec![0usize; dimension];
        for _ in 0..count {
            let mut w = T::one();
            for &d in &digits {
                nodes.push(rule.nodes[d]);
                w = w * rule.weights[d];
            }
            weights.push(w);
            increment_digits(&mut digits, order);
        }
        Ok(QuadratureGrid { dimension, rule, nodes, weights })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    /// Points per coordinate.
    pub fn order(&self) -> usize {
        self.rule.order()
    }

    /// Highest per-coordinate polynomial degree integrated exactly.
    pub fn exact_degree(&self) -> usize {
        2 * self.order() - 1
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn node(&self, j: usize) -> &[T] {
        &self.nodes[j * self.dimension..(j + 1) * self.dimension]
    }

    pub fn nodes(&self) -> impl Iterator<Item = &[T]> + '_ {
        self.nodes.chunks_exact(self.dimension)
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn rule(&self) -> &GaussHermiteRule<T> {
        &self.rule
    }

    /// Per-coordinate 1-D node indices of node `j`.
    pub fn node_digits(&self, j: usize, digits: &mut [usize]) {
        let m = self.order();
        let mut rest = j;
        for d in digits.iter_mut().rev() {
            *d = rest % m;
            rest /= m;
        }
    }

    /// `Σ_j w_j values[j]` with compensated summation in node order.
    pub fn integrate(&self, values: &[T]) -> Result<T> {
        if values.len() != self.len() {
            return Err(Error::DimensionMismatch { expected: self.len(), found: values.len() });
        }
        Ok(compensated_sum(self.weights.iter().zip(values).map(|(&w, &v)| w * v)))
    }

    /// Integrates `f` evaluated at every node.
    pub fn integrate_fn(&self, mut f: impl FnMut(&[T]) -> T) -> T {
        compensated_sum(self.nodes().zip(&self.weights).map(|(x, &w)| w * f(x)))
    }

    /// Table `t[node_1d][k] = h_k(x_node_1d)` for `k ≤ max_degree`.
    pub(crate) fn basis_table(&self, max_degree: usize) -> Vec<Vec<T>> {
        self.rule.nodes.iter().map(|&x| normalized_hermite_table(max_degree, x)).collect()
    }
}

fn increment_digits(digits: &mut [usize], base: usize) {
    for d in digits.iter_mut().rev() {
        *d += 1;
        if *d < base {
            return;
        }
        *d = 0;
    }
}

/// Tensor Gauss–Hermite grid with `m` points per coordinate in dimension `n`.
pub fn gauss_hermite_grid<T: Scalar>(n: usize, m: usize) -> Result<QuadratureGrid<T>> {
    QuadratureGrid::new(n, m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn double_factorial_odd(j: usize) -> f64 {
        // (2j - 1)!!
        (1..=j).fold(1.0, |acc, i| acc * (2 * i - 1) as f64)
    }

    #[test]
    fn two_point_rule() {
        let g = gauss_hermite_grid::<f64>(1, 2).unwrap();
        assert_relative_eq!(g.node(0)[0], -1.0, epsilon = 1e-15);
        assert_relative_eq!(g.node(1)[0], 1.0, epsilon = 1e-15);
        assert_relative_eq!(g.weights()[0], 0.5, epsilon = 1e-15);
        assert_relative_eq!(g.integrate_fn(|x| x[0] * x[0]), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn three_point_rule() {
        let g = gauss_hermite_grid::<f64>(1, 3).unwrap();
        let s3 = 3f64.sqrt();
        assert_relative_eq!(g.node(0)[0], -s3, epsilon = 1e-15);
        assert_eq!(g.node(1)[0], 0.0);
        assert_relative_eq!(g.node(2)[0], s3, epsilon = 1e-15);
        assert_relative_eq!(g.weights()[0], 1.0 / 6.0, epsilon = 1e-15);
        assert_relative_eq!(g.weights()[1], 2.0 / 3.0, epsilon = 1e-15);
        assert_relative_eq!(g.integrate_fn(|x| x[0].powi(4)), 3.0, epsilon = 1e-14);
    }

    #[test]
    fn tensor_grid_normalized() {
        let g = gauss_hermite_grid::<f64>(2, 3).unwrap();
        assert_eq!(g.len(), 9);
        let total: f64 = g.weights().iter().sum();
        assert!((total - 1.0).abs() < 1e-14);
        assert_relative_eq!(g.node(1)[0], -(3f64.sqrt()), epsilon = 1e-15);
        assert_eq!(g.node(1)[1], 0.0);
    }

    #[test]
    fn even_moments_are_double_factorials() {
        for m in 1..=20 {
            let g = gauss_hermite_grid::<f64>(1, m).unwrap();
            assert!((g.weights().iter().sum::<f64>() - 1.0).abs() < 1e-14);
            for j in 0..=(2 * m - 1) / 2 {
                let moment = g.integrate_fn(|x| x[0].powi(2 * j as i32));
                let exact = double_factorial_odd(j);
                assert!((moment - exact).abs() <= 1e-12 * exact, "m={m} j={j}: {moment} vs {exact}");
            }
            let odd = g.integrate_fn(|x| x[0].powi(2 * m as i32 - 1));
            assert!(odd.abs() < 1e-12 * double_factorial_odd(m));
        }
    }

    #[test]
    fn eigenvector_weights_agree_with_closed_form() {
        for m in [2usize, 5, 9, 16] {
            let (mut nodes, weights) = jacobi_eigen::<f64>(m);
            let mut pairs: Vec<(f64, f64)> = nodes.drain(..).zip(weights).collect();
            pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
            let rule = GaussHermiteRule::<f64>::new(m).unwrap();
            for (i, (x, w)) in pairs.iter().enumerate() {
                assert!((x - rule.nodes[i]).abs() < 1e-12);
                assert!((w - rule.weights[i]).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn digits_roundtrip() {
        let g = gauss_hermite_grid::<f64>(3, 4).unwrap();
        let mut digits = [0usize; 3];
        for j in 0..g.len() {
            g.node_digits(j, &mut digits);
            for (i, &d) in digits.iter().enumerate() {
                assert_eq!(g.node(j)[i], g.rule().nodes[d]);
            }
        }
    }

    #[test]
    fn budget_is_enforced() {
        let err = QuadratureGrid::<f64>::with_budget(4, 10, 9_999).unwrap_err();
        assert!(matches!(err, Error::NodeBudgetExceeded { nodes: 10_000, budget: 9_999 }));
        let err = QuadratureGrid::<f64>::new(50, 3).unwrap_err();
        assert!(matches!(err, Error::NodeBudgetExceeded { .. }));
    }

    #[test]
    fn single_precision_rule() {
        let g = gauss_hermite_grid::<f32>(1, 5).unwrap();
        assert!((g.integrate_fn(|x| x[0].powi(4)) - 3.0).abs() < 1e-5);
    }
}
