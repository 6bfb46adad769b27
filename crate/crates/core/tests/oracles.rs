//! Values checked against oracles computed independently of the library's
//! quadrature: adaptive Simpson integration against the Gaussian density and
//! closed forms worked out by hand.

use approx::assert_relative_eq;
use ou_lab_core::experiments::{Experiment, ExperimentConfig, Preset};
use ou_lab_core::functionals::{check_positivity, entropy, fisher};
use ou_lab_core::hermite::{GaussHermiteRule, QuadratureGrid};
use ou_lab_core::ou::{mehler_pointwise, SemigroupBackend};
use ou_lab_core::verifier::BochnerTerms;
use ou_lab_core::{hermite_eval, Expansion};

fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, eps: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    refine(f, a, b, fa, fm, fb, whole, eps, depth)
}

#[allow(clippy::too_many_arguments)]
fn refine(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, eps: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    if depth == 0 || (left + right - whole).abs() <= 15.0 * eps {
        return left + right + (left + right - whole) / 15.0;
    }
    refine(f, a, m, fa, flm, fm, left, eps / 2.0, depth - 1) + refine(f, m, b, fm, frm, fb, right, eps / 2.0, depth - 1)
}

/// `∫ g dγ` on `[-12, 12]`.
fn gaussian_integral(g: impl Fn(f64) -> f64) -> f64 {
    let phi = |x: f64| (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt();
    simpson(&|x| g(x) * phi(x), -12.0, 12.0, 1e-15, 40)
}

fn mixed(c0: f64, c1: f64, c2: f64) -> impl Fn(f64) -> f64 {
    move |x| c0 + c1 * x + c2 * (x * x - 1.0)
}

#[test]
fn three_point_rule_matches_hand_values() {
    let r = GaussHermiteRule::<f64>::new(3).unwrap();
    let s3 = 3f64.sqrt();
    for (x, e) in r.nodes.iter().zip([-s3, 0.0, s3]) {
        assert_relative_eq!(*x, e, epsilon = 1e-15);
    }
    for (w, e) in r.weights.iter().zip([1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0]) {
        assert_relative_eq!(*w, e, epsilon = 1e-15);
    }
    assert_eq!(hermite_eval(3, 2.0f64), 2.0);
}

#[test]
fn entropy_of_first_chaos_against_simpson() {
    for eps in [0.01, 0.05] {
        let e = Experiment::<f64>::new(ExperimentConfig { initial: Preset::FirstChaos { epsilon: eps }, ..Default::default() })
            .unwrap();
        let quad = e.entropy_at(0.0).unwrap();
        let u = mixed(1.0, eps, 0.0);
        let oracle = gaussian_integral(|x| -u(x) * u(x).ln());
        assert_relative_eq!(quad, oracle, max_relative = 1e-9);
        // second-order expansion -ε²/2
        assert!((quad + eps * eps / 2.0).abs() < eps.powi(4));
    }
}

#[test]
fn mixed_functionals_against_simpson() {
    let (c0, c1, c2) = (1.5, 0.2, 0.1);
    let u = mixed(c0, c1, c2);
    let du = |x: f64| c1 + 2.0 * c2 * x;
    let fisher_oracle = gaussian_integral(|x| du(x) * du(x) / u(x));
    let entropy_oracle = gaussian_integral(|x| -u(x) * u(x).ln());

    let f: Expansion = Preset::Mixed { c0, c1, c2 }.expansion(1).unwrap();
    // Gauss-Hermite error on a rational integrand shrinks with the order; 14 is the default deg + 12.
    for (order, tol) in [(10, 1e-6), (14, 1e-8), (40, 1e-11)] {
        let grid = QuadratureGrid::new(1, order).unwrap();
        let cert = check_positivity(&f, &grid, 0.1).unwrap();
        assert_relative_eq!(fisher(&f, &grid, &cert).unwrap(), fisher_oracle, max_relative = tol);
        assert_relative_eq!(entropy(&f, &grid, &cert).unwrap(), entropy_oracle, max_relative = tol);
    }
}

#[test]
fn fisher_of_evolved_first_chaos_against_simpson() {
    let a = 0.01;
    let e = Experiment::<f64>::new(ExperimentConfig::default()).unwrap();
    for t in [0.5f64, 2.0] {
        let at = a * (-t).exp();
        let oracle = gaussian_integral(|x| at * at / (1.0 + at * x));
        assert_relative_eq!(e.fisher_at(t).unwrap(), oracle, max_relative = 1e-10);
    }
}

#[test]
fn bochner_sides_match_closed_form() {
    let a = 0.1;
    let u: Expansion = Preset::FirstChaos { epsilon: a }.expansion(1).unwrap();
    let terms = BochnerTerms::new(&u, 0.0).unwrap();
    let (lhs, rhs) = terms.sides_at(&[1.0]).unwrap();
    let closed = 2.0 * a.powi(4) / (1.0 + a).powi(3) + 2.0 * a * a / (1.0 + a);
    assert_relative_eq!(closed, 0.018_332_081_141_998_5, max_relative = 1e-12);
    assert_relative_eq!(lhs, closed, max_relative = 1e-13);
    assert_relative_eq!(rhs, closed, max_relative = 1e-13);
}

#[test]
fn mehler_formula_against_simpson() {
    let f: Expansion = Preset::Mixed { c0: 0.3, c1: -1.2, c2: 0.8 }.expansion(1).unwrap();
    let inner = QuadratureGrid::new(1, 8).unwrap();
    for (t, x) in [(0.1f64, 0.7), (1.0, -2.0), (3.0, 1.5)] {
        let (d, s) = ((-t).exp(), (1.0 - (-2.0 * t).exp()).sqrt());
        let oracle = gaussian_integral(|y| f.evaluate(&[d * x + s * y]).unwrap());
        let quad = mehler_pointwise(&f, t, &[x], &inner).unwrap();
        assert_relative_eq!(quad, oracle, max_relative = 1e-12);
        let spectral = ou_lab_core::ou::apply_semigroup(&f, t, SemigroupBackend::Spectral).unwrap();
        assert_relative_eq!(spectral.evaluate(&[x]).unwrap(), oracle, max_relative = 1e-12);
    }
}
