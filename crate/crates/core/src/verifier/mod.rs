//! Residual checks of the exact identities of the OU calculus.
//!
//! Every check evaluates two independently assembled sides and reports the
//! largest absolute residual together with a relative residual normalized by
//! `max(1, max|lhs|, max|rhs|)`, so that `0 = 0` identities stay well defined.
//! Inequality checks are one-sided: only the amount by which the bound is
//! violated counts as residual.

mod report;
pub mod suite;

pub use report::{IdentityReport, Residuals, Tolerances};

use crate::error::{Error, Result};
use crate::functionals::{entropy, lp_norm, mass, PositivityCertificate};
use crate::hermite::{expansion_to_grid, ChaosExpansion, QuadratureGrid};
use crate::ou::{
    apply_generator, apply_semigroup, divergence, divergence_by_formula, generator_via_divergence, gradient,
    gradient_norm_squared, hessian, project_dimensions, semigroup_per_component, time_derivative, GeneratorPath,
    SemigroupBackend, VectorExpansion,
};
use crate::scalar::{compensated_sum, Scalar};

pub const WEITZENBOCK: &str = "L|∇F|² = 2⟨∇F, ∇LF⟩ + 2|∇F|² + 2‖∇²F‖² (Weitzenböck formula for the OU operator)";
pub const BOCHNER_ENTROPY: &str =
    "(L - ∂_t)(|∇u_t|²/u_t) = (2/u_t)|∇u_t|² + (2/u_t)‖∇²u_t - ∇u_t⊗∇u_t/u_t‖² for u_t = P_t u_0";
pub const BOCHNER_TIME_FD: &str = "∂_t(|∇u_t|²/u_t): analytic time derivative vs central finite difference";
pub const INTEGRATION_BY_PARTS: &str = "∫(LF)G dγ = -∫⟨∇F, ∇G⟩ dγ (L = -δ∘∇)";
pub const DIVERGENCE_ADJOINT: &str = "∫ δ(Z) G dγ = ∫ ⟨Z, ∇G⟩ dγ";
pub const SEMIGROUP_SYMMETRY: &str = "∫ u P_t v dγ = ∫ v P_t u dγ";
pub const CONTRACTION: &str = "‖P_t u‖_p ≤ ‖u‖_p";
pub const PROJECTION_COMMUTES: &str = "E[P_t u | x_1..x_k] = P_t E[u | x_1..x_k]";
pub const SEMIGROUP_LAW: &str = "P_s P_t F = P_{s+t} F";
pub const GENERATOR_PATHS: &str = "spectral L = Σ(∂_ii - x_i ∂_i) = -δ∘∇";
pub const DIVERGENCE_PATHS: &str = "raising-operator δ(Z) = Σ(x_i Z_i - ∂_i Z_i)";
pub const GRADIENT_COMMUTATION: &str = "∇P_t F = e^{-t} P_t ∇F";
pub const MASS_INVARIANCE: &str = "∫ P_t u dγ = ∫ u dγ";
pub const BACKEND_AGREEMENT: &str = "spectral P_t = Mehler-quadrature P_t";
pub const HESSIAN_SYMMETRY: &str = "∂_i∂_j F = ∂_j∂_i F";
pub const ENTROPY_BOUND: &str = "Ent(u) ≤ 1 - ∫ u dγ (from -x log x ≤ 1 - x)";

fn nodal<T: Scalar>(f: &ChaosExpansion<T>, grid: &QuadratureGrid<T>) -> Result<Vec<T>> {
    Ok(expansion_to_grid(f, grid)?.into_values())
}

fn nodal_vector<T: Scalar>(z: &VectorExpansion<T>, grid: &QuadratureGrid<T>) -> Result<Vec<Vec<T>>> {
    z.components().iter().map(|c| nodal(c, grid)).collect()
}

/// Weitzenböck identity at every node of `grid`. The left side is the exact
/// expansion `L(|∇F|²)`; the right side is assembled pointwise from `∇F`,
/// `∇LF` and `∇²F`.
pub fn check_weitzenbock<T: Scalar>(f: &ChaosExpansion<T>, grid: &QuadratureGrid<T>, tolerance: f64) -> Result<IdentityReport> {
    let lhs = nodal(&apply_generator(&gradient_norm_squared(f), GeneratorPath::Spectral), grid)?;

    let n = f.dimension();
    let grad = nodal_vector(&gradient(f), grid)?;
    let grad_l = nodal_vector(&gradient(&apply_generator(f, GeneratorPath::Spectral)), grid)?;
    let hess = hessian(f);
    let mut hess_sq = vec![T::zero(); grid.len()];
    for i in 0..n {
        for j in 0..n {
            for (acc, h) in hess_sq.iter_mut().zip(nodal(hess.entry(i, j), grid)?) {
                *acc = *acc + h * h;
            }
        }
    }
    let two = T::lit(2.0);
    let rhs: Vec<T> = (0..grid.len())
        .map(|j| {
            let mut cross = T::zero();
            let mut sq = T::zero();
            for i in 0..n {
                cross = cross + grad[i][j] * grad_l[i][j];
                sq = sq + grad[i][j] * grad[i][j];
            }
            two * cross + two * sq + two * hess_sq[j]
        })
        .collect();
    Ok(Residuals::pointwise(&lhs, &rhs).into_report("weitzenbock", WEITZENBOCK, tolerance))
}

/// Polynomial ingredients of the Bochner-type identity for `|∇u_t|²/u_t`.
///
/// Both sides are evaluated pointwise from exact expansions: the left side
/// expands `L(G/u)` with the product rule and `L(u⁻¹) = -u⁻² Lu + 2u⁻³|∇u|²`,
/// and `∂_t(G/u) = (2/u)⟨∇u, ∇∂_t u⟩ - (G/u²) ∂_t u` with the spectral `∂_t u`.
pub struct BochnerTerms<T> {
    u: ChaosExpansion<T>,
    grad: VectorExpansion<T>,
    hess: Vec<ChaosExpansion<T>>,
    gen_u: ChaosExpansion<T>,
    grad_sq: ChaosExpansion<T>,
    gen_grad_sq: ChaosExpansion<T>,
    grad_grad_sq: VectorExpansion<T>,
    du_dt: ChaosExpansion<T>,
    grad_du_dt: VectorExpansion<T>,
}

impl<T: Scalar> BochnerTerms<T> {
    pub fn new(u0: &ChaosExpansion<T>, t: T) -> Result<Self> {
        let u = apply_semigroup(u0, t, SemigroupBackend::Spectral)?;
        let n = u.dimension();
        let hess_m = hessian(&u);
        let hess = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| hess_m.entry(i, j).clone()).collect();
        let grad_sq = gradient_norm_squared(&u);
        let du_dt = time_derivative(u0, t)?;
        Ok(BochnerTerms {
            grad: gradient(&u),
            gen_u: apply_generator(&u, GeneratorPath::Spectral),
            gen_grad_sq: apply_generator(&grad_sq, GeneratorPath::Spectral),
            grad_grad_sq: gradient(&grad_sq),
            grad_du_dt: gradient(&du_dt),
            grad_sq,
            du_dt,
            hess,
            u,
        })
    }

    pub fn density(&self) -> &ChaosExpansion<T> {
        &self.u
    }

    /// `(lhs, rhs)` at one point.
    pub fn sides_at(&self, point: &[T]) -> Result<(T, T)> {
        let u = self.u.evaluate(point)?;
        let g = self.grad.evaluate(point)?;
        let h = self.hess.iter().map(|e| e.evaluate(point)).collect::<Result<Vec<_>>>()?;
        let vals = PointValues {
            u,
            grad: &g,
            hess: &h,
            gen_u: self.gen_u.evaluate(point)?,
            grad_sq: self.grad_sq.evaluate(point)?,
            gen_grad_sq: self.gen_grad_sq.evaluate(point)?,
            grad_grad_sq: &self.grad_grad_sq.evaluate(point)?,
            du_dt: self.du_dt.evaluate(point)?,
            grad_du_dt: &self.grad_du_dt.evaluate(point)?,
        };
        Ok((vals.lhs(), vals.rhs()))
    }

    /// `(lhs, rhs)` at every node of `grid`.
    pub fn sides_on_grid(&self, grid: &QuadratureGrid<T>) -> Result<(Vec<T>, Vec<T>)> {
        let n = self.u.dimension();
        let u = nodal(&self.u, grid)?;
        let grad = nodal_vector(&self.grad, grid)?;
        let hess = self.hess.iter().map(|e| nodal(e, grid)).collect::<Result<Vec<_>>>()?;
        let gen_u = nodal(&self.gen_u, grid)?;
        let grad_sq = nodal(&self.grad_sq, grid)?;
        let gen_grad_sq = nodal(&self.gen_grad_sq, grid)?;
        let grad_grad_sq = nodal_vector(&self.grad_grad_sq, grid)?;
        let du_dt = nodal(&self.du_dt, grid)?;
        let grad_du_dt = nodal_vector(&self.grad_du_dt, grid)?;

        let mut lhs = Vec::with_capacity(grid.len());
        let mut rhs = Vec::with_capacity(grid.len());
        let mut g = vec![T::zero(); n];
        let mut h = vec![T::zero(); n * n];
        let mut ggs = vec![T::zero(); n];
        let mut gdt = vec![T::zero(); n];
        for j in 0..grid.len() {
            for i in 0..n {
                g[i] = grad[i][j];
                ggs[i] = grad_grad_sq[i][j];
                gdt[i] = grad_du_dt[i][j];
            }
            for (k, e) in hess.iter().enumerate() {
                h[k] = e[j];
            }
            let vals = PointValues {
                u: u[j],
                grad: &g,
                hess: &h,
                gen_u: gen_u[j],
                grad_sq: grad_sq[j],
                gen_grad_sq: gen_grad_sq[j],
                grad_grad_sq: &ggs,
                du_dt: du_dt[j],
                grad_du_dt: &gdt,
            };
            lhs.push(vals.lhs());
            rhs.push(vals.rhs());
        }
        Ok((lhs, rhs))
    }

    /// Nodal values of `|∇u_t|² / u_t` and its analytic `∂_t`.
    fn ratio_and_time_derivative(&self, grid: &QuadratureGrid<T>) -> Result<(Vec<T>, Vec<T>)> {
        let n = self.u.dimension();
        let u = nodal(&self.u, grid)?;
        let grad = nodal_vector(&self.grad, grid)?;
        let grad_sq = nodal(&self.grad_sq, grid)?;
        let du_dt = nodal(&self.du_dt, grid)?;
        let grad_du_dt = nodal_vector(&self.grad_du_dt, grid)?;
        let two = T::lit(2.0);
        let ratio = u.iter().zip(&grad_sq).map(|(&u, &g)| g / u).collect();
        let dt = (0..grid.len())
            .map(|j| {
                let inv = T::one() / u[j];
                let cross = (0..n).fold(T::zero(), |acc, i| acc + grad[i][j] * grad_du_dt[i][j]);
                two * inv * cross - grad_sq[j] * inv * inv * du_dt[j]
            })
            .collect();
        Ok((ratio, dt))
    }
}

struct PointValues<'a, T> {
    u: T,
    grad: &'a [T],
    hess: &'a [T],
    gen_u: T,
    grad_sq: T,
    gen_grad_sq: T,
    grad_grad_sq: &'a [T],
    du_dt: T,
    grad_du_dt: &'a [T],
}

impl<T: Scalar> PointValues<'_, T> {
    fn lhs(&self) -> T {
        let two = T::lit(2.0);
        let inv = T::one() / self.u;
        let inv2 = inv * inv;
        let gen_inv = -inv2 * self.gen_u + two * inv2 * inv * self.grad_sq;
        let cross_grad_sq = dot(self.grad, self.grad_grad_sq);
        let generator_term = inv * self.gen_grad_sq + self.grad_sq * gen_inv - two * inv2 * cross_grad_sq;
        let time_term = two * inv * dot(self.grad, self.grad_du_dt) - self.grad_sq * inv2 * self.du_dt;
        generator_term - time_term
    }

    fn rhs(&self) -> T {
        let two = T::lit(2.0);
        let inv = T::one() / self.u;
        let n = self.grad.len();
        let sq = dot(self.grad, self.grad);
        let mut frob = T::zero();
        for i in 0..n {
            for j in 0..n {
                let d = self.hess[i * n + j] - self.grad[i] * self.grad[j] * inv;
                frob = frob + d * d;
            }
        }
        two * inv * sq + two * inv * frob
    }
}

fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + x * y)
}

/// Bochner-type identity for `|∇u_t|²/u_t` at every node of `grid`.
pub fn check_bochner_entropy<T: Scalar>(
    u0: &ChaosExpansion<T>,
    t: T,
    grid: &QuadratureGrid<T>,
    cert: &PositivityCertificate<T>,
    tolerance: f64,
) -> Result<IdentityReport> {
    cert.require_valid_on(grid)?;
    let terms = BochnerTerms::new(u0, t)?;
    let (lhs, rhs) = terms.sides_on_grid(grid)?;
    Ok(Residuals::pointwise(&lhs, &rhs).into_report("bochner-entropy", BOCHNER_ENTROPY, tolerance))
}

/// Secondary diagnostic: the analytic `∂_t(|∇u_t|²/u_t)` against a central
/// difference with step `h` (second-order forward difference when `t < h`).
pub fn check_bochner_time_derivative_fd<T: Scalar>(
    u0: &ChaosExpansion<T>,
    t: T,
    h: T,
    grid: &QuadratureGrid<T>,
    tolerance: f64,
) -> Result<IdentityReport> {
    let (_, analytic) = BochnerTerms::new(u0, t)?.ratio_and_time_derivative(grid)?;
    let ratio_at = |s: T| -> Result<Vec<T>> { Ok(BochnerTerms::new(u0, s)?.ratio_and_time_derivative(grid)?.0) };
    let two = T::lit(2.0);
    let fd: Vec<T> = if t >= h {
        let (a, b) = (ratio_at(t + h)?, ratio_at(t - h)?);
        a.iter().zip(&b).map(|(&p, &m)| (p - m) / (two * h)).collect()
    } else {
        let (f0, f1, f2) = (ratio_at(t)?, ratio_at(t + h)?, ratio_at(t + two * h)?);
        (0..grid.len()).map(|j| (-T::lit(3.0) * f0[j] + T::lit(4.0) * f1[j] - f2[j]) / (two * h)).collect()
    };
    Ok(Residuals::pointwise(&fd, &analytic).into_report("bochner-time-derivative-fd", BOCHNER_TIME_FD, tolerance))
}

/// `∫(LF)G` against `-∫⟨∇F, ∇G⟩`, both by quadrature on `grid`.
pub fn check_integration_by_parts<T: Scalar>(
    f: &ChaosExpansion<T>,
    g: &ChaosExpansion<T>,
    grid: &QuadratureGrid<T>,
    tolerance: f64,
) -> Result<IdentityReport> {
    let lf = nodal(&apply_generator(f, GeneratorPath::Spectral), grid)?;
    let gv = nodal(g, grid)?;
    let lhs = grid.integrate(&lf.iter().zip(&gv).map(|(&a, &b)| a * b).collect::<Vec<_>>())?;
    let rhs = -inner_on_grid(&gradient(f), &gradient(g), grid)?;
    Ok(Residuals::scalar(lhs, rhs, grid.len()).into_report("integration-by-parts", INTEGRATION_BY_PARTS, tolerance))
}

fn inner_on_grid<T: Scalar>(a: &VectorExpansion<T>, b: &VectorExpansion<T>, grid: &QuadratureGrid<T>) -> Result<T> {
    let mut pointwise = vec![T::zero(); grid.len()];
    for (ca, cb) in a.components().iter().zip(b.components()) {
        for ((acc, x), y) in pointwise.iter_mut().zip(nodal(ca, grid)?).zip(nodal(cb, grid)?) {
            *acc = *acc + x * y;
        }
    }
    grid.integrate(&pointwise)
}

/// `∫ δ(Z) G` against `∫ ⟨Z, ∇G⟩`, by quadrature.
pub fn check_divergence_adjoint<T: Scalar>(
    z: &VectorExpansion<T>,
    g: &ChaosExpansion<T>,
    grid: &QuadratureGrid<T>,
    tolerance: f64,
) -> Result<IdentityReport> {
    let dz = nodal(&divergence(z), grid)?;
    let gv = nodal(g, grid)?;
    let lhs = grid.integrate(&dz.iter().zip(&gv).map(|(&a, &b)| a * b).collect::<Vec<_>>())?;
    let rhs = inner_on_grid(z, &gradient(g), grid)?;
    Ok(Residuals::scalar(lhs, rhs, grid.len()).into_report("divergence-adjoint", DIVERGENCE_ADJOINT, tolerance))
}

/// `∫ u P_t v` against `∫ v P_t u`, by quadrature.
pub fn check_semigroup_symmetry<T: Scalar>(
    u: &ChaosExpansion<T>,
    v: &ChaosExpansion<T>,
    t: T,
    grid: &QuadratureGrid<T>,
    tolerance: f64,
) -> Result<IdentityReport> {
    let pair = |a: &ChaosExpansion<T>, b: &ChaosExpansion<T>| -> Result<T> {
        let pb = nodal(&apply_semigroup(b, t, SemigroupBackend::Spectral)?, grid)?;
        let av = nodal(a, grid)?;
        grid.integrate(&av.iter().zip(&pb).map(|(&x, &y)| x * y).collect::<Vec<_>>())
    };
    let lhs = pair(u, v)?;
    let rhs = pair(v, u)?;
    Ok(Residuals::scalar(lhs, rhs, grid.len()).into_report("semigroup-symmetry", SEMIGROUP_SYMMETRY, tolerance))
}

/// One-sided `‖P_t u‖_p ≤ ‖u‖_p`.
pub fn check_contraction<T: Scalar>(
    u: &ChaosExpansion<T>,
    p: T,
    t: T,
    grid: &QuadratureGrid<T>,
    tolerance: f64,
) -> Result<IdentityReport> {
    if !(p > T::one()) {
        return Err(Error::InvalidParameter { name: "p", reason: format!("must exceed 1, got {p}") });
    }
    let evolved = apply_semigroup(u, t, SemigroupBackend::Spectral)?;
    let lhs = lp_norm(&evolved, p, grid)?;
    let rhs = lp_norm(u, p, grid)?;
    let mut report = Residuals::at_most(lhs, rhs, grid.len()).into_report("contraction", CONTRACTION, tolerance);
    report.diagnostics.insert("p".into(), p.as_f64());
    report.diagnostics.insert("t".into(), t.as_f64());
    report.diagnostics.insert("norm_evolved".into(), lhs.as_f64());
    report.diagnostics.insert("norm_initial".into(), rhs.as_f64());
    Ok(report)
}

/// Conditional expectation onto the first `k` coordinates commutes with `P_t`, coefficient-wise.
pub fn check_projection_commutes<T: Scalar>(u: &ChaosExpansion<T>, k: usize, t: T, tolerance: f64) -> Result<IdentityReport> {
    let a = project_dimensions(&apply_semigroup(u, t, SemigroupBackend::Spectral)?, k)?;
    let b = apply_semigroup(&project_dimensions(u, k)?, t, SemigroupBackend::Spectral)?;
    Ok(Residuals::coefficients(&a, &b)?.into_report("projection-commutes", PROJECTION_COMMUTES, tolerance))
}

/// `P_s P_t F = P_{s+t} F`, coefficient-wise.
pub fn check_semigroup_law<T: Scalar>(f: &ChaosExpansion<T>, s: T, t: T, tolerance: f64) -> Result<IdentityReport> {
    let b = SemigroupBackend::Spectral;
    let composed = apply_semigroup(&apply_semigroup(f, t, b)?, s, b)?;
    let direct = apply_semigroup(f, s + t, b)?;
    Ok(Residuals::coefficients(&composed, &direct)?.into_report("semigroup-law", SEMIGROUP_LAW, tolerance))
}

/// Spectral, direct and `-δ∘∇` generators agree coefficient-wise.
pub fn check_generator_paths<T: Scalar>(f: &ChaosExpansion<T>, tolerance: f64) -> Result<IdentityReport> {
    let spectral = apply_generator(f, GeneratorPath::Spectral);
    let direct = apply_generator(f, GeneratorPath::Direct);
    let via_div = generator_via_divergence(f);
    let r = Residuals::coefficients(&spectral, &direct)?.merge(Residuals::coefficients(&spectral, &via_div)?);
    Ok(r.into_report("generator-paths", GENERATOR_PATHS, tolerance))
}

/// Raising-operator divergence against the pointwise formula, coefficient-wise.
pub fn check_divergence_paths<T: Scalar>(z: &VectorExpansion<T>, tolerance: f64) -> Result<IdentityReport> {
    let a = divergence(z);
    let b = divergence_by_formula(z)?;
    Ok(Residuals::coefficients(&a, &b)?.into_report("divergence-paths", DIVERGENCE_PATHS, tolerance))
}

/// `∇P_t F = e^{-t} P_t ∇F`, coefficient-wise per component.
pub fn check_gradient_commutation<T: Scalar>(f: &ChaosExpansion<T>, t: T, tolerance: f64) -> Result<IdentityReport> {
    let b = SemigroupBackend::Spectral;
    let lhs = gradient(&apply_semigroup(f, t, b)?);
    let rhs = semigroup_per_component(&gradient(f), t, b)?.scale((-t).exp());
    let mut r = Residuals::default();
    for (a, c) in lhs.components().iter().zip(rhs.components()) {
        r = r.merge(Residuals::coefficients(a, c)?);
    }
    Ok(r.into_report("gradient-commutation", GRADIENT_COMMUTATION, tolerance))
}

/// The constant coefficient is unchanged by `P_t`.
pub fn check_mass_invariance<T: Scalar>(u: &ChaosExpansion<T>, t: T, tolerance: f64) -> Result<IdentityReport> {
    let evolved = apply_semigroup(u, t, SemigroupBackend::Spectral)?;
    Ok(Residuals::scalar(mass(&evolved), mass(u), 1).into_report("mass-invariance", MASS_INVARIANCE, tolerance))
}

/// Spectral and Mehler-quadrature semigroups agree coefficient-wise.
pub fn check_backend_agreement<T: Scalar>(f: &ChaosExpansion<T>, t: T, tolerance: f64) -> Result<IdentityReport> {
    let spectral = apply_semigroup(f, t, SemigroupBackend::Spectral)?;
    let mehler = apply_semigroup(f, t, SemigroupBackend::mehler())?;
    Ok(Residuals::coefficients(&spectral, &mehler)?.into_report("backend-agreement", BACKEND_AGREEMENT, tolerance))
}

/// Entries `(i, j)` and `(j, i)` of the Hessian agree coefficient-wise.
pub fn check_hessian_symmetry<T: Scalar>(f: &ChaosExpansion<T>, tolerance: f64) -> Result<IdentityReport> {
    let h = hessian(f);
    let n = f.dimension();
    let mut r = Residuals::default();
    for i in 0..n {
        for j in i + 1..n {
            r = r.merge(Residuals::coefficients(h.entry(i, j), h.entry(j, i))?);
        }
    }
    Ok(r.into_report("hessian-symmetry", HESSIAN_SYMMETRY, tolerance))
}

/// One-sided `Ent(u) ≤ 1 - mass(u)`.
pub fn check_entropy_bound<T: Scalar>(
    u: &ChaosExpansion<T>,
    grid: &QuadratureGrid<T>,
    cert: &PositivityCertificate<T>,
    tolerance: f64,
) -> Result<IdentityReport> {
    let ent = entropy(u, grid, cert)?;
    let bound = T::one() - mass(u);
    let mut report = Residuals::at_most(ent, bound, grid.len()).into_report("entropy-bound", ENTROPY_BOUND, tolerance);
    report.diagnostics.insert("entropy".into(), ent.as_f64());
    report.diagnostics.insert("one_minus_mass".into(), bound.as_f64());
    Ok(report)
}

/// Quadrature of `u * v` (used by tests and suites).
pub fn integrate_product<T: Scalar>(u: &ChaosExpansion<T>, v: &ChaosExpansion<T>, grid: &QuadratureGrid<T>) -> Result<T> {
    let a = nodal(u, grid)?;
    let b = nodal(v, grid)?;
    Ok(compensated_sum(grid.weights().iter().zip(a.iter().zip(&b)).map(|(&w, (&x, &y))| w * x * y)))
}
