//! Ornstein–Uhlenbeck calculus on chaos expansions: gradient, Hessian,
//! divergence, the generator `L = Δ - x·∇`, the semigroup `P_t` and the
//! conditional expectation onto the first `k` coordinates.
//!
//! In the orthonormal basis the operators are index shifts:
//!
//! * `∂_i h_α = sqrt(α_i) h_{α - e_i}`
//! * `δ_i h_α = sqrt(α_i + 1) h_{α + e_i}` (the Gaussian adjoint of `∂_i`)
//! * `L h_α = -|α| h_α`, `P_t h_α = e^{-|α| t} h_α`
//!
//! The generator and the divergence also have a second, formula-based path
//! (`Σ ∂_ii F - x_i ∂_i F` and `Σ x_i Z_i - ∂_i Z_i`) built from the exact
//! product of expansions, so the two routes can be cross-checked.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hermite::{project_to_expansion, ChaosExpansion, GridFunction, MultiIndex, QuadratureGrid};
use crate::scalar::{compensated_sum, mehler_spread, Scalar};

/// An `ℝⁿ`-valued functional; component `i` is the coefficient of direction `e_i`.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorExpansion<T> {
    components: Vec<ChaosExpansion<T>>,
}

impl<T: Scalar> VectorExpansion<T> {
    pub fn new(components: Vec<ChaosExpansion<T>>) -> Result<Self> {
        let n = components.len();
        if n == 0 {
            return Err(Error::InvalidParameter { name: "components", reason: "must be non-empty".into() });
        }
        if let Some(bad) = components.iter().find(|c| c.dimension() != n) {
            return Err(Error::DimensionMismatch { expected: n, found: bad.dimension() });
        }
        Ok(VectorExpansion { components })
    }

    /// Field with constant component values.
    pub fn constant(values: &[T]) -> Self {
        let n = values.len();
        VectorExpansion { components: values.iter().map(|&v| ChaosExpansion::constant(n, v)).collect() }
    }

    pub fn dimension(&self) -> usize {
        self.components.len()
    }

    pub fn component(&self, i: usize) -> &ChaosExpansion<T> {
        &self.components[i]
    }

    pub fn components(&self) -> &[ChaosExpansion<T>] {
        &self.components
    }

    pub fn map(&self, f: impl Fn(&ChaosExpansion<T>) -> ChaosExpansion<T>) -> Self {
        VectorExpansion { components: self.components.iter().map(f).collect() }
    }

    pub fn scale(&self, factor: T) -> Self {
        self.map(|c| c.scale(factor))
    }

    /// Pointwise inner product `⟨self, other⟩` as an exact expansion.
    pub fn dot(&self, other: &Self) -> Result<ChaosExpansion<T>> {
        check_dim(self.dimension(), other.dimension())?;
        let mut acc = ChaosExpansion::zero(self.dimension());
        for (a, b) in self.components.iter().zip(&other.components) {
            acc = acc.add(&a.multiply(b)?)?;
        }
        Ok(acc)
    }

    pub fn evaluate(&self, point: &[T]) -> Result<Vec<T>> {
        self.components.iter().map(|c| c.evaluate(point)).collect()
    }

    pub fn max_coefficient_difference(&self, other: &Self) -> Result<T> {
        check_dim(self.dimension(), other.dimension())?;
        self.components
            .iter()
            .zip(&other.components)
            .try_fold(T::zero(), |m, (a, b)| Ok(m.max(a.max_coefficient_difference(b)?)))
    }

    pub fn is_zero(&self) -> bool {
        self.components.iter().all(ChaosExpansion::is_empty)
    }
}

/// An `n × n` array of expansions, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct MatrixExpansion<T> {
    n: usize,
    entries: Vec<ChaosExpansion<T>>,
}

impl<T: Scalar> MatrixExpansion<T> {
    pub fn dimension(&self) -> usize {
        self.n
    }

    pub fn entry(&self, i: usize, j: usize) -> &ChaosExpansion<T> {
        &self.entries[i * self.n + j]
    }

    /// Largest coefficient difference between entries `(i, j)` and `(j, i)`.
    pub fn asymmetry(&self) -> T {
        let mut worst = T::zero();
        for i in 0..self.n {
            for j in i + 1..self.n {
                let d = self.entry(i, j).max_coefficient_difference(self.entry(j, i)).expect("same dimension");
                worst = worst.max(d);
            }
        }
        worst
    }

    /// Pointwise squared Hilbert–Schmidt norm `Σ_ij (entry_ij)²` as an expansion.
    pub fn frobenius_squared(&self) -> Result<ChaosExpansion<T>> {
        let mut acc = ChaosExpansion::zero(self.n);
        for e in &self.entries {
            acc = acc.add(&e.multiply(e)?)?;
        }
        Ok(acc)
    }

    /// Row-major values at `point`.
    pub fn evaluate(&self, point: &[T]) -> Result<Vec<T>> {
        self.entries.iter().map(|e| e.evaluate(point)).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(ChaosExpansion::is_empty)
    }
}

fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

/// `∂_i F`.
pub fn partial<T: Scalar>(f: &ChaosExpansion<T>, i: usize) -> ChaosExpansion<T> {
    let terms = f.terms().filter_map(|(alpha, c)| {
        alpha.lowered(i).map(|lowered| (lowered, c * T::from_count(alpha.get(i) as usize).sqrt()))
    });
    ChaosExpansion::from_terms(f.dimension(), terms).expect("shifted indices keep dimension")
}

/// Gradient `∇F = (∂_1 F, ..., ∂_n F)`, exact by index shifting.
pub fn gradient<T: Scalar>(f: &ChaosExpansion<T>) -> VectorExpansion<T> {
    VectorExpansion { components: (0..f.dimension()).map(|i| partial(f, i)).collect() }
}

/// Hessian `∂_i ∂_j F`.
pub fn hessian<T: Scalar>(f: &ChaosExpansion<T>) -> MatrixExpansion<T> {
    let n = f.dimension();
    let grad = gradient(f);
    let entries = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| partial(grad.component(i), j));
    MatrixExpansion { n, entries: entries.collect() }
}

/// Gaussian divergence `δ(Z) = Σ_i (x_i Z_i - ∂_i Z_i)`, computed with the
/// raising rule `h_α ↦ sqrt(α_i + 1) h_{α + e_i}`.
pub fn divergence<T: Scalar>(z: &VectorExpansion<T>) -> ChaosExpansion<T> {
    let n = z.dimension();
    let terms = z.components.iter().enumerate().flat_map(|(i, comp)| {
        comp.terms()
            .map(move |(alpha, c)| (alpha.raised(i), c * T::from_count(alpha.get(i) as usize + 1).sqrt()))
            .collect::<Vec<_>>()
    });
    ChaosExpansion::from_terms(n, terms).expect("raised indices keep dimension")
}

/// Divergence by the pointwise formula `Σ_i x_i Z_i - ∂_i Z_i`, using the
/// exact expansion product for `x_i Z_i`.
pub fn divergence_by_formula<T: Scalar>(z: &VectorExpansion<T>) -> Result<ChaosExpansion<T>> {
    let n = z.dimension();
    let mut acc = ChaosExpansion::zero(n);
    for (i, comp) in z.components.iter().enumerate() {
        let xz = ChaosExpansion::coordinate(n, i).multiply(comp)?;
        acc = acc.add(&xz)?.sub(&partial(comp, i))?;
    }
    Ok(acc)
}

/// Which route [`apply_generator`] takes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GeneratorPath {
    /// Eigenvalue scaling `c_α ↦ -|α| c_α`.
    Spectral,
    /// `Σ_i (∂_ii F - x_i ∂_i F)`.
    Direct,
}

/// The OU generator `L F`.
pub fn apply_generator<T: Scalar>(f: &ChaosExpansion<T>, path: GeneratorPath) -> ChaosExpansion<T> {
    match path {
        GeneratorPath::Spectral => f.map_coefficients(|alpha, c| -T::from_count(alpha.order()) * c),
        GeneratorPath::Direct => {
            let n = f.dimension();
            let mut acc = ChaosExpansion::zero(n);
            for i in 0..n {
                let di = partial(f, i);
                let dii = partial(&di, i);
                let drift = ChaosExpansion::coordinate(n, i).multiply(&di).expect("same dimension");
                acc = acc.add(&dii).and_then(|a| a.sub(&drift)).expect("same dimension");
            }
            acc
        }
    }
}

/// `-δ(∇F)`, a third route to the generator.
pub fn generator_via_divergence<T: Scalar>(f: &ChaosExpansion<T>) -> ChaosExpansion<T> {
    divergence(&gradient(f)).scale(-T::one())
}

/// How [`apply_semigroup`] realizes `P_t`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SemigroupBackend {
    /// Coefficient damping `c_α ↦ e^{-|α| t} c_α`.
    Spectral,
    /// The Mehler integral `∫ F(e^{-t} x + sqrt(1 - e^{-2t}) y) dγ(y)` by
    /// Gauss–Hermite quadrature in `y`, projected back onto chaos of degree
    /// `deg F` with an outer grid exact for that projection. `inner_order`
    /// defaults to `⌈(deg F + 1) / 2⌉ + 2`.
    MehlerQuadrature { inner_order: Option<usize> },
}

impl SemigroupBackend {
    pub fn mehler() -> Self {
        SemigroupBackend::MehlerQuadrature { inner_order: None }
    }
}

fn check_time<T: Scalar>(t: T) -> Result<()> {
    if t < T::zero() || t.is_nan() {
        return Err(Error::NegativeTime(t.as_f64()));
    }
    Ok(())
}

/// `P_t F`.
pub fn apply_semigroup<T: Scalar>(f: &ChaosExpansion<T>, t: T, backend: SemigroupBackend) -> Result<ChaosExpansion<T>> {
    check_time(t)?;
    if t == T::zero() {
        return Ok(f.clone());
    }
    match backend {
        SemigroupBackend::Spectral => Ok(f.map_coefficients(|alpha, c| (-T::from_count(alpha.order()) * t).exp() * c)),
        SemigroupBackend::MehlerQuadrature { inner_order } => {
            let degree = f.max_degree();
            let inner_order = inner_order.unwrap_or(degree.div_ceil(2) + 1 + 2);
            let inner = QuadratureGrid::new(f.dimension(), inner_order)?;
            let outer = QuadratureGrid::new(f.dimension(), degree + 1)?;
            let values = GridFunction::from_fn(&outer, |x| mehler_pointwise(f, t, x, &inner).expect("dimension checked"));
            Ok(project_to_expansion(&values, degree))
        }
    }
}

/// `P_t F(x)` by the Mehler formula with the `y`-integral done on `inner`.
pub fn mehler_pointwise<T: Scalar>(f: &ChaosExpansion<T>, t: T, x: &[T], inner: &QuadratureGrid<T>) -> Result<T> {
    check_time(t)?;
    check_dim(f.dimension(), x.len())?;
    check_dim(f.dimension(), inner.dimension())?;
    let decay = (-t).exp();
    let spread = mehler_spread(t);
    let mut shifted = vec![T::zero(); x.len()];
    let terms = inner.nodes().zip(inner.weights()).map(|(y, &w)| {
        for ((s, &xi), &yi) in shifted.iter_mut().zip(x).zip(y) {
            *s = decay * xi + spread * yi;
        }
        w * f.evaluate(&shifted).expect("dimension checked")
    });
    Ok(compensated_sum(terms.collect::<Vec<_>>()))
}

/// `∂_t P_t F = L P_t F`, spectrally `c_α ↦ -|α| e^{-|α| t} c_α`.
pub fn time_derivative<T: Scalar>(f: &ChaosExpansion<T>, t: T) -> Result<ChaosExpansion<T>> {
    check_time(t)?;
    Ok(f.map_coefficients(|alpha, c| {
        let k = T::from_count(alpha.order());
        -k * (-k * t).exp() * c
    }))
}

/// Gaussian conditional expectation onto the first `k` coordinates: drops
/// every term whose index is nonzero beyond position `k`.
pub fn project_dimensions<T: Scalar>(f: &ChaosExpansion<T>, k: usize) -> Result<ChaosExpansion<T>> {
    let n = f.dimension();
    if k == 0 || k > n {
        return Err(Error::DimensionOutOfRange { k, n });
    }
    Ok(f.filter_terms(|alpha| alpha.supported_in(k)))
}

/// Applies a coefficient-wise operation to each component of a vector field.
pub fn semigroup_per_component<T: Scalar>(
    z: &VectorExpansion<T>,
    t: T,
    backend: SemigroupBackend,
) -> Result<VectorExpansion<T>> {
    let components = z.components().iter().map(|c| apply_semigroup(c, t, backend)).collect::<Result<_>>()?;
    Ok(VectorExpansion { components })
}

/// `|∇F|²` as an exact expansion.
pub fn gradient_norm_squared<T: Scalar>(f: &ChaosExpansion<T>) -> ChaosExpansion<T> {
    let g = gradient(f);
    g.dot(&g).expect("same dimension")
}

/// Expansion built from `(exponents, coefficient)` literals; convenience for tests and presets.
pub fn expansion_from<T: Scalar>(dimension: usize, terms: &[(&[u32], f64)]) -> Result<ChaosExpansion<T>> {
    ChaosExpansion::from_terms(
        dimension,
        terms.iter().map(|(e, c)| (MultiIndex::new(e.to_vec()), T::lit(*c))),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn x2() -> ChaosExpansion<f64> {
        // x² = sqrt(2) h_2 + h_0
        expansion_from(1, &[(&[2], 2f64.sqrt()), (&[0], 1.0)]).unwrap()
    }

    fn xy() -> ChaosExpansion<f64> {
        expansion_from(2, &[(&[1, 1], 1.0)]).unwrap()
    }

    fn close(a: &ChaosExpansion<f64>, b: &ChaosExpansion<f64>) -> bool {
        a.max_coefficient_difference(b).unwrap() < 1e-13
    }

    #[test]
    fn gradient_examples() {
        assert!(gradient(&ChaosExpansion::constant(2, 3.0)).is_zero());
        let g = gradient(&x2());
        // 2x
        assert!(close(g.component(0), &ChaosExpansion::coordinate(1, 0).scale(2.0)));
        let g = gradient(&xy());
        assert!(close(g.component(0), &ChaosExpansion::coordinate(2, 1)));
        assert!(close(g.component(1), &ChaosExpansion::coordinate(2, 0)));
    }

    #[test]
    fn hessian_examples() {
        let linear = expansion_from::<f64>(2, &[(&[1, 0], 0.3), (&[0, 1], -2.0), (&[0, 0], 1.0)]).unwrap();
        assert!(hessian(&linear).is_zero());
        let h = hessian(&x2());
        assert!(close(h.entry(0, 0), &ChaosExpansion::constant(1, 2.0)));
        let h = hessian(&xy());
        assert!(h.entry(0, 0).is_empty() && h.entry(1, 1).is_empty());
        assert!(close(h.entry(0, 1), &ChaosExpansion::constant(2, 1.0)));
        assert!(close(h.entry(1, 0), &ChaosExpansion::constant(2, 1.0)));
    }

    #[test]
    fn divergence_examples() {
        let zero = VectorExpansion::new(vec![ChaosExpansion::<f64>::zero(1)]).unwrap();
        assert!(divergence(&zero).is_empty());
        let one = VectorExpansion::constant(&[1.0f64]);
        assert!(close(&divergence(&one), &ChaosExpansion::coordinate(1, 0)));
        let x = VectorExpansion::new(vec![ChaosExpansion::<f64>::coordinate(1, 0)]).unwrap();
        // x² - 1 = sqrt(2) h_2
        let expected = expansion_from(1, &[(&[2], 2f64.sqrt())]).unwrap();
        assert!(close(&divergence(&x), &expected));
        assert!(close(&divergence_by_formula(&x).unwrap(), &expected));
    }

    #[test]
    fn generator_examples() {
        for path in [GeneratorPath::Spectral, GeneratorPath::Direct] {
            assert!(apply_generator(&ChaosExpansion::constant(1, 5.0f64), path).is_empty());
            let h2 = expansion_from::<f64>(1, &[(&[2], 1.0)]).unwrap();
            assert!(close(&apply_generator(&h2, path), &h2.scale(-2.0)));
            // 2 - 2x² = -2 sqrt(2) h_2
            let expected = expansion_from(1, &[(&[2], -2.0 * 2f64.sqrt())]).unwrap();
            assert!(close(&apply_generator(&x2(), path), &expected));
        }
        assert!(close(&generator_via_divergence(&x2()), &apply_generator(&x2(), GeneratorPath::Spectral)));
    }

    #[test]
    fn semigroup_examples() {
        for backend in [SemigroupBackend::Spectral, SemigroupBackend::mehler()] {
            let f = xy();
            assert_eq!(apply_semigroup(&f, 0.0, backend).unwrap(), f);
            let x = ChaosExpansion::<f64>::coordinate(1, 0);
            let px = apply_semigroup(&x, 2f64.ln(), backend).unwrap();
            assert!(close(&px, &x.scale(0.5)), "{backend:?}");
            let he2 = expansion_from::<f64>(1, &[(&[2], 2f64.sqrt())]).unwrap();
            let t = 0.7;
            let p = apply_semigroup(&he2, t, backend).unwrap();
            assert!(close(&p, &he2.scale((-2.0 * t).exp())), "{backend:?}");
        }
        assert!(matches!(
            apply_semigroup(&xy(), -1.0, SemigroupBackend::Spectral),
            Err(Error::NegativeTime(_))
        ));
    }

    #[test]
    fn time_derivative_examples() {
        assert!(time_derivative(&ChaosExpansion::constant(1, 2.0f64), 0.4).unwrap().is_empty());
        let x = ChaosExpansion::<f64>::coordinate(1, 0);
        assert!(close(&time_derivative(&x, 0.0).unwrap(), &x.scale(-1.0)));
        let he2 = expansion_from::<f64>(1, &[(&[2], 2f64.sqrt())]).unwrap();
        assert!(close(&time_derivative(&he2, 2f64.ln()).unwrap(), &he2.scale(-0.5)));
    }

    #[test]
    fn projection_examples() {
        let f = expansion_from::<f64>(2, &[(&[1, 1], 1.0), (&[1, 0], 1.0)]).unwrap();
        assert!(close(&project_dimensions(&f, 1).unwrap(), &ChaosExpansion::coordinate(2, 0)));
        let only_x = expansion_from::<f64>(2, &[(&[3, 0], 0.2), (&[1, 0], 1.0)]).unwrap();
        assert_eq!(project_dimensions(&only_x, 1).unwrap(), only_x);
        let pure_y = expansion_from::<f64>(2, &[(&[0, 2], 1.0)]).unwrap();
        assert!(project_dimensions(&pure_y, 1).unwrap().is_empty());
        assert!(matches!(project_dimensions(&pure_y, 0), Err(Error::DimensionOutOfRange { k: 0, n: 2 })));
        assert!(matches!(project_dimensions(&pure_y, 3), Err(Error::DimensionOutOfRange { k: 3, n: 2 })));
    }

    #[test]
    fn mehler_pointwise_tiny_time() {
        let f = x2();
        let inner = QuadratureGrid::new(1, 4).unwrap();
        let v = mehler_pointwise(&f, 1e-9, &[1.3], &inner).unwrap();
        assert_relative_eq!(v, 1.69, epsilon = 1e-8);
    }
}
