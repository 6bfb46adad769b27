use crate::error::{Error, Result};
use crate::hermite::{enumerate_multi_indices, ChaosExpansion, QuadratureGrid};
use crate::scalar::{compensated_sum, Scalar};

/// Nodal values of a function on a quadrature grid.
#[derive(Clone, Debug)]
pub struct GridFunction<'g, T> {
    grid: &'g QuadratureGrid<T>,
    values: Vec<T>,
}

impl<'g, T: Scalar> GridFunction<'g, T> {
    pub fn new(grid: &'g QuadratureGrid<T>, values: Vec<T>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::DimensionMismatch { expected: grid.len(), found: values.len() });
        }
        Ok(GridFunction { grid, values })
    }

    /// Samples `f` at every node.
    pub fn from_fn(grid: &'g QuadratureGrid<T>, f: impl Fn(&[T]) -> T) -> Self {
        let values = grid.nodes().map(f).collect();
        GridFunction { grid, values }
    }

    pub fn grid(&self) -> &'g QuadratureGrid<T> {
        self.grid
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    /// Pointwise image `f(value)`.
    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        GridFunction { grid: self.grid, values: self.values.iter().map(|&v| f(v)).collect() }
    }

    /// Quadrature of the nodal values against `γ_n`.
    pub fn integrate(&self) -> T {
        compensated_sum(self.grid.weights().iter().zip(&self.values).map(|(&w, &v)| w * v))
    }

    /// Smallest nodal value and its node index.
    pub fn min_with_index(&self) -> (T, usize) {
        let mut best = (T::infinity(), 0);
        for (j, &v) in self.values.iter().enumerate() {
            if v < best.0 || v.is_nan() {
                best = (v, j);
            }
        }
        best
    }
}

/// Evaluates `F` at every node of `grid`.
pub fn expansion_to_grid<'g, T: Scalar>(
    f: &ChaosExpansion<T>,
    grid: &'g QuadratureGrid<T>,
) -> Result<GridFunction<'g, T>> {
    if f.dimension() != grid.dimension() {
        return Err(Error::DimensionMismatch { expected: grid.dimension(), found: f.dimension() });
    }
    let table = grid.basis_table(f.max_degree());
    let n = grid.dimension();
    let mut digits = vec![0usize; n];
    let values = (0..grid.len())
        .map(|j| {
            grid.node_digits(j, &mut digits);
            f.evaluate_with_tables(|i, k| table[digits[i]][k])
        })
        .collect();
    Ok(GridFunction { grid, values })
}

/// Discrete `L²(γ_n)` projection onto chaos of total degree `≤ max_degree`:
/// `c_α = Σ_j w_j g(x_j) h_α(x_j)`.
///
/// Exact for polynomial `g` when the grid integrates `g · h_α` exactly;
/// otherwise an approximation carrying the quadrature error.
pub fn project_to_expansion<T: Scalar>(g: &GridFunction<'_, T>, max_degree: usize) -> ChaosExpansion<T> {
    let grid = g.grid();
    let n = grid.dimension();
    let table = grid.basis_table(max_degree);
    let indices = enumerate_multi_indices(n, max_degree);
    let weighted: Vec<T> = grid.weights().iter().zip(g.values()).map(|(&w, &v)| w * v).collect();

    let mut digit_rows = vec![0usize; grid.len() * n];
    for (j, row) in digit_rows.chunks_exact_mut(n).enumerate() {
        grid.node_digits(j, row);
    }

    let terms = indices.into_iter().map(|alpha| {
        let c = compensated_sum(weighted.iter().zip(digit_rows.chunks_exact(n)).map(|(&wv, digits)| {
            let mut basis = wv;
            for (i, &a) in alpha.exponents().iter().enumerate() {
                if a != 0 {
                    basis = basis * table[digits[i]][a as usize];
                }
            }
            basis
        }));
        (alpha, c)
    });
    ChaosExpansion::from_terms(n, terms).expect("indices generated with grid dimension")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hermite::{gauss_hermite_grid, hermite_eval, MultiIndex};
    use approx::assert_relative_eq;

    #[test]
    fn to_grid_examples() {
        let g1 = gauss_hermite_grid::<f64>(1, 2).unwrap();
        let c = ChaosExpansion::constant(1, 3.0);
        assert!(expansion_to_grid(&c, &g1).unwrap().values().iter().all(|&v| v == 3.0));

        let x = ChaosExpansion::coordinate(1, 0);
        let vals = expansion_to_grid(&x, &g1).unwrap();
        assert_relative_eq!(vals.values()[0], -1.0, epsilon = 1e-15);
        assert_relative_eq!(vals.values()[1], 1.0, epsilon = 1e-15);

        // x² - 1 = sqrt(2) h_2
        let he2 = ChaosExpansion::from_terms(1, [(MultiIndex::from([2]), 2f64.sqrt())]).unwrap();
        let g3 = gauss_hermite_grid::<f64>(1, 3).unwrap();
        let vals = expansion_to_grid(&he2, &g3).unwrap();
        for (v, e) in vals.values().iter().zip([2.0, -1.0, 2.0]) {
            assert_relative_eq!(*v, e, epsilon = 1e-14);
        }
    }

    #[test]
    fn to_grid_dimension_mismatch() {
        let g = gauss_hermite_grid::<f64>(2, 2).unwrap();
        assert!(expansion_to_grid(&ChaosExpansion::<f64>::coordinate(1, 0), &g).is_err());
    }

    #[test]
    fn projection_examples() {
        let g = gauss_hermite_grid::<f64>(1, 3).unwrap();
        let one = GridFunction::from_fn(&g, |_| 1.0);
        let p = project_to_expansion(&one, 2);
        assert_eq!(p.len(), 1);
        assert_relative_eq!(p.constant_term(), 1.0, epsilon = 1e-15);

        let sq = GridFunction::from_fn(&g, |x| x[0] * x[0]);
        let p = project_to_expansion(&sq, 2);
        assert_relative_eq!(p.coefficient(&MultiIndex::from([2])), 2f64.sqrt(), epsilon = 1e-14);
        assert_relative_eq!(p.coefficient(&MultiIndex::from([0])), 1.0, epsilon = 1e-14);
        assert!(p.coefficient(&MultiIndex::from([1])).abs() < 1e-14);

        let g4 = gauss_hermite_grid::<f64>(1, 4).unwrap();
        let he3 = GridFunction::from_fn(&g4, |x| hermite_eval(3, x[0]));
        let p = project_to_expansion(&he3, 3);
        assert_relative_eq!(p.coefficient(&MultiIndex::from([3])), 6f64.sqrt(), epsilon = 1e-13);
        assert_eq!(p.len(), 1);
    }

    #[test]
    fn min_with_index_finds_smallest() {
        let g = gauss_hermite_grid::<f64>(1, 5).unwrap();
        let f = GridFunction::from_fn(&g, |x| x[0] * x[0]);
        let (min, j) = f.min_with_index();
        assert_eq!(min, 0.0);
        assert_eq!(j, 2);
    }
}
