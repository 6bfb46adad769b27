//! Seeded random test data: polynomial chaos expansions and densities.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::hermite::{enumerate_multi_indices, expansion_to_grid, ChaosExpansion, QuadratureGrid};
use crate::scalar::Scalar;

/// Deterministic generator used by every seeded suite.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Expansion with every coefficient of total degree `≤ max_degree` drawn
/// uniformly from `[-amplitude, amplitude]`.
pub fn random_polynomial<T: Scalar, R: Rng + ?Sized>(
    rng: &mut R,
    dimension: usize,
    max_degree: usize,
    amplitude: f64,
) -> ChaosExpansion<T> {
    let terms = enumerate_multi_indices(dimension, max_degree)
        .into_iter()
        .map(|alpha| (alpha, T::lit(rng.gen_range(-amplitude..=amplitude))))
        .collect::<Vec<_>>();
    ChaosExpansion::from_terms(dimension, terms).expect("generated with matching dimension")
}

/// Density `c + p` with `c` uniform in `[1, 2]` and a mean-zero polynomial
/// perturbation `p` of degree `≤ max_degree`, rescaled so that its largest
/// magnitude on `grid` equals `sup_norm`.
pub fn random_density<T: Scalar, R: Rng + ?Sized>(
    rng: &mut R,
    grid: &QuadratureGrid<T>,
    max_degree: usize,
    sup_norm: f64,
) -> Result<ChaosExpansion<T>> {
    let n = grid.dimension();
    let base = rng.gen_range(1.0..=2.0);
    let raw: ChaosExpansion<T> = random_polynomial(rng, n, max_degree.max(1), 1.0);
    let perturbation = raw.filter_terms(|alpha| alpha.order() > 0);
    let values = expansion_to_grid(&perturbation, grid)?;
    let peak = values.values().iter().fold(T::zero(), |m, v| m.max(v.abs()));
    let scaled = if peak > T::zero() { perturbation.scale(T::lit(sup_norm) / peak) } else { perturbation };
    ChaosExpansion::constant(n, T::lit(base)).add(&scaled)
}
