//! Scalar functionals of densities against `γ_n`: mass, `L^p` norms,
//! entropy `-∫ u log u` and Fisher information `∫ |∇u|² / u`.
//!
//! Positivity can only be checked where the density is evaluated, so it is
//! certified at the quadrature nodes. A polynomial such as `1 + εx` is not
//! positive on all of `ℝ`, but every nonlinear functional here only ever sees
//! its nodal values, and the certificate records exactly which nodes were
//! inspected.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::hermite::{expansion_to_grid, ChaosExpansion, QuadratureGrid};
use crate::ou::gradient;
use crate::scalar::{compensated_sum, Scalar};

/// Per-coordinate quadrature order margin added to `deg u` for nonlinear functionals.
pub const FUNCTIONAL_ORDER_MARGIN: usize = 12;

/// Default per-coordinate order `deg u + 12` for entropy and Fisher quadrature.
pub fn default_functional_order<T: Scalar>(u: &ChaosExpansion<T>) -> usize {
    u.max_degree() + FUNCTIONAL_ORDER_MARGIN
}

/// Record of a node-wise lower-bound check `u(x_j) ≥ floor`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PositivityCertificate<T> {
    pub floor: T,
    pub min_observed: T,
    /// Node index where the minimum occurs.
    pub argmin: usize,
    pub grid_dimension: usize,
    pub grid_order: usize,
}

impl<T: Scalar> PositivityCertificate<T> {
    pub fn is_valid(&self) -> bool {
        self.min_observed >= self.floor
    }

    /// Errors unless the certificate is valid and was issued on `grid`.
    pub fn require_valid_on(&self, grid: &QuadratureGrid<T>) -> Result<()> {
        if self.grid_dimension != grid.dimension() || self.grid_order != grid.order() {
            return Err(Error::CertificateGridMismatch {
                cert_dim: self.grid_dimension,
                cert_order: self.grid_order,
                grid_dim: grid.dimension(),
                grid_order: grid.order(),
            });
        }
        if !self.is_valid() {
            return Err(Error::InvalidCertificate {
                min_observed: self.min_observed.as_f64(),
                floor: self.floor.as_f64(),
                node: self.argmin,
            });
        }
        Ok(())
    }
}

/// Checks `u ≥ floor` at every node of `grid`.
pub fn check_positivity<T: Scalar>(
    u: &ChaosExpansion<T>,
    grid: &QuadratureGrid<T>,
    floor: T,
) -> Result<PositivityCertificate<T>> {
    if !(floor > T::zero()) {
        return Err(Error::InvalidParameter { name: "floor", reason: format!("must be positive, got {floor}") });
    }
    let values = expansion_to_grid(u, grid)?;
    let (min_observed, argmin) = values.min_with_index();
    Ok(PositivityCertificate {
        floor,
        min_observed,
        argmin,
        grid_dimension: grid.dimension(),
        grid_order: grid.order(),
    })
}

/// `∫ u dγ`, which is the constant coefficient.
pub fn mass<T: Scalar>(u: &ChaosExpansion<T>) -> T {
    u.constant_term()
}

// Nodal values of u, rejecting any that are not strictly positive.
fn positive_values<T: Scalar>(
    u: &ChaosExpansion<T>,
    grid: &QuadratureGrid<T>,
    cert: &PositivityCertificate<T>,
) -> Result<Vec<T>> {
    cert.require_valid_on(grid)?;
    let values = expansion_to_grid(u, grid)?.into_values();
    if let Some((node, &v)) = values.iter().enumerate().find(|(_, &v)| !(v > T::zero())) {
        return Err(Error::InvalidCertificate { min_observed: v.as_f64(), floor: cert.floor.as_f64(), node });
    }
    Ok(values)
}

/// `Ent(u) = -∫ u log u dγ` by quadrature.
pub fn entropy<T: Scalar>(u: &ChaosExpansion<T>, grid: &QuadratureGrid<T>, cert: &PositivityCertificate<T>) -> Result<T> {
    let values = positive_values(u, grid, cert)?;
    Ok(compensated_sum(grid.weights().iter().zip(&values).map(|(&w, &v)| -w * v * v.ln())))
}

/// `I(u) = ∫ |∇u|² / u dγ` by quadrature.
pub fn fisher<T: Scalar>(u: &ChaosExpansion<T>, grid: &QuadratureGrid<T>, cert: &PositivityCertificate<T>) -> Result<T> {
    let values = positive_values(u, grid, cert)?;
    let grad = gradient(u);
    if grad.is_zero() {
        return Ok(T::zero());
    }
    let mut sq = vec![T::zero(); grid.len()];
    for comp in grad.components() {
        for (acc, d) in sq.iter_mut().zip(expansion_to_grid(comp, grid)?.values()) {
            *acc = *acc + *d * *d;
        }
    }
    Ok(compensated_sum(grid.weights().iter().zip(sq.iter().zip(&values)).map(|(&w, (&s, &v))| w * s / v)))
}

/// `(∫ |u|^p dγ)^{1/p}` by quadrature.
pub fn lp_norm<T: Scalar>(u: &ChaosExpansion<T>, p: T, grid: &QuadratureGrid<T>) -> Result<T> {
    if !(p >= T::one()) {
        return Err(Error::InvalidParameter { name: "p", reason: format!("must be at least 1, got {p}") });
    }
    let values = expansion_to_grid(u, grid)?;
    let integral = compensated_sum(grid.weights().iter().zip(values.values()).map(|(&w, &v)| w * v.abs().powf(p)));
    Ok(integral.powf(T::one() / p))
}

/// Bundle of the functionals of one density on one grid.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FunctionalReport<T> {
    pub mass: T,
    pub entropy: T,
    pub fisher: T,
    /// `(p, ‖u‖_p)` pairs in the order requested.
    pub lp_norms: Vec<(T, T)>,
}

impl<T: Scalar> FunctionalReport<T> {
    pub fn compute(
        u: &ChaosExpansion<T>,
        grid: &QuadratureGrid<T>,
        cert: &PositivityCertificate<T>,
        exponents: &[T],
    ) -> Result<Self> {
        Ok(FunctionalReport {
            mass: mass(u),
            entropy: entropy(u, grid, cert)?,
            fisher: fisher(u, grid, cert)?,
            lp_norms: exponents.iter().map(|&p| Ok((p, lp_norm(u, p, grid)?))).collect::<Result<_>>()?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ou::expansion_from;
    use approx::assert_relative_eq;

    fn first_chaos(eps: f64) -> ChaosExpansion<f64> {
        expansion_from(1, &[(&[0], 1.0), (&[1], eps)]).unwrap()
    }

    #[test]
    fn positivity_examples() {
        let grid = QuadratureGrid::new(1, 5).unwrap();
        let one = ChaosExpansion::constant(1, 1.0);
        let c = check_positivity(&one, &grid, 0.5).unwrap();
        assert!(c.is_valid());
        assert_eq!(c.min_observed, 1.0);

        let c = check_positivity(&first_chaos(0.1), &grid, 0.1).unwrap();
        let max_node = grid.rule().nodes.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        assert!(c.is_valid());
        assert_relative_eq!(c.min_observed, 1.0 - 0.1 * max_node, epsilon = 1e-14);

        let x2 = expansion_from(1, &[(&[2], 2f64.sqrt()), (&[0], 1.0)]).unwrap();
        let c = check_positivity(&x2, &grid, 0.01).unwrap();
        assert!(!c.is_valid());
        assert!(c.min_observed.abs() < 1e-15);

        assert!(check_positivity(&one, &grid, 0.0).is_err());
    }

    #[test]
    fn mass_examples() {
        assert_eq!(mass(&ChaosExpansion::constant(1, 1.0f64)), 1.0);
        assert_eq!(mass(&first_chaos(0.3)), 1.0);
        let x2 = expansion_from::<f64>(1, &[(&[2], 2f64.sqrt()), (&[0], 1.0)]).unwrap();
        assert_eq!(mass(&x2), 1.0);
    }

    #[test]
    fn entropy_examples() {
        let grid = QuadratureGrid::new(1, 9).unwrap();
        let one = ChaosExpansion::constant(1, 1.0);
        let cert = check_positivity(&one, &grid, 0.5).unwrap();
        assert_eq!(entropy(&one, &grid, &cert).unwrap(), 0.0);

        let c: f64 = 2.5;
        let u = ChaosExpansion::constant(1, c);
        let cert = check_positivity(&u, &grid, 0.5).unwrap();
        assert_relative_eq!(entropy(&u, &grid, &cert).unwrap(), -c * c.ln(), epsilon = 1e-14);

        let u = first_chaos(0.01);
        let cert = check_positivity(&u, &grid, 0.5).unwrap();
        let ent = entropy(&u, &grid, &cert).unwrap();
        assert!((ent - (-0.5e-4)).abs() <= 0.02 * 0.5e-4, "{ent}");
    }

    #[test]
    fn fisher_examples() {
        let grid = QuadratureGrid::new(1, 9).unwrap();
        let one = ChaosExpansion::constant(1, 1.0);
        let cert = check_positivity(&one, &grid, 0.5).unwrap();
        assert_eq!(fisher(&one, &grid, &cert).unwrap(), 0.0);

        let a = 0.01;
        let u = first_chaos(a);
        let cert = check_positivity(&u, &grid, 0.5).unwrap();
        let i = fisher(&u, &grid, &cert).unwrap();
        assert!((i - 1e-4).abs() <= 0.01 * 1e-4);
        // a² ∫ 1/(1 + a x) on the same grid
        let reduced = a * a * grid.integrate_fn(|x| 1.0 / (1.0 + a * x[0]));
        assert_relative_eq!(i, reduced, max_relative = 1e-14);
    }

    #[test]
    fn lp_examples() {
        let grid = QuadratureGrid::new(1, 6).unwrap();
        let c = ChaosExpansion::constant(1, -1.5);
        for p in [1.0, 2.0, 3.5] {
            assert_relative_eq!(lp_norm(&c, p, &grid).unwrap(), 1.5, epsilon = 1e-14);
        }
        let x = ChaosExpansion::coordinate(1, 0);
        assert_relative_eq!(lp_norm(&x, 2.0, &grid).unwrap(), 1.0, epsilon = 1e-14);
        assert_relative_eq!(lp_norm(&x, 4.0, &grid).unwrap(), 3f64.powf(0.25), epsilon = 1e-14);
        assert!(lp_norm(&x, 0.5, &grid).is_err());
    }

    #[test]
    fn invalid_certificate_is_rejected() {
        let grid = QuadratureGrid::new(1, 5).unwrap();
        let x = ChaosExpansion::coordinate(1, 0);
        let cert = check_positivity(&x, &grid, 0.1).unwrap();
        assert!(matches!(entropy(&x, &grid, &cert), Err(Error::InvalidCertificate { .. })));
        assert!(matches!(fisher(&x, &grid, &cert), Err(Error::InvalidCertificate { .. })));

        let other = QuadratureGrid::new(1, 7).unwrap();
        let one = ChaosExpansion::constant(1, 1.0);
        let cert = check_positivity(&one, &grid, 0.1).unwrap();
        assert!(matches!(entropy(&one, &other, &cert), Err(Error::CertificateGridMismatch { .. })));
    }
}
