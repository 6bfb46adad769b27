use crate::error::{Error, Result};
use crate::hermite::MultiIndex;
use crate::scalar::Scalar;

/// Probabilists' Hermite polynomial `He_k(x)` by the three-term recurrence
/// `He_{k+1} = x He_k - k He_{k-1}`.
pub fn hermite_eval<T: Scalar>(k: usize, x: T) -> T {
    let mut prev = T::one();
    if k == 0 {
        return prev;
    }
    let mut cur = x;
    for j in 1..k {
        let next = x * cur - T::from_count(j) * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// Orthonormal Hermite values `h_0(x), ..., h_{max_degree}(x)` with
/// `h_k = He_k / sqrt(k!)`.
///
/// Uses the normalized recurrence `sqrt(k+1) h_{k+1} = x h_k - sqrt(k) h_{k-1}`,
/// which stays bounded where `He_k` would overflow.
pub fn normalized_hermite_table<T: Scalar>(max_degree: usize, x: T) -> Vec<T> {
    let mut out = Vec::with_capacity(max_degree + 1);
    out.push(T::one());
    if max_degree == 0 {
        return out;
    }
    out.push(x);
    for k in 1..max_degree {
        let next = (x * out[k] - T::from_count(k).sqrt() * out[k - 1]) / T::from_count(k + 1).sqrt();
        out.push(next);
    }
    out
}

/// The orthonormal tensor Hermite basis element `h_α(x) = Π He_{α_i}(x_i) / sqrt(α_i!)`.
pub fn normalized_hermite_eval<T: Scalar>(alpha: &MultiIndex, point: &[T]) -> Result<T> {
    if alpha.dimension() != point.len() {
        return Err(Error::DimensionMismatch { expected: alpha.dimension(), found: point.len() });
    }
    Ok(alpha
        .exponents()
        .iter()
        .zip(point)
        .map(|(&a, &x)| normalized_hermite_table(a as usize, x)[a as usize])
        .fold(T::one(), |acc, v| acc * v))
}

/// `k!` as an `f64`; exact up to 22!.
pub(crate) fn factorial(k: usize) -> f64 {
    (1..=k).fold(1.0, |acc, j| acc * j as f64)
}
