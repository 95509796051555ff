//! Norm-scaled dynamics that turn an asymptotically stable field into a
//! fixed-time stable one.
//!
//! Two constructions are provided.
//!
//! **Sum scaling** ([`fxts_scale`]): for 0 < p < 1 and q < 0,
//!
//! ```text
//! ẋ = (‖f(x)‖^(−p) + ‖f(x)‖^(−q)) f(x),   ẋ|₀ = 0.
//! ```
//!
//! The magnitude is ‖f‖^(1−p) + ‖f‖^(1−q); both exponents are positive, so
//! the right-hand side extends continuously by zero at the origin.
//!
//! **Piecewise scaling** ([`piecewise_scale`]): for α ∈ (0,1) and β < 0,
//!
//! ```text
//! ẋ = c·f(x)/‖f(x)‖^α   (0 < ‖f‖ ≤ 1),
//! ẋ = c·f(x)/‖f(x)‖^β   (‖f‖ > 1),
//! ```
//!
//! with derived exponents p = (2−2α)/(2−α) ∈ (0,1), q = (2−2β)/(2−β) ∈ (1,2)
//! and the continuity constant
//!
//! ```text
//! c = ((2−β)/(2−α))^(1/(q−p)).
//! ```
//!
//! The exponent is 1/(q−p): this is the unique sign for which the two
//! branches of the associated comparison function agree at r = 1
//! (c^(2−p)(2−α) = c^(2−q)(2−β)); with 1/(p−q) they disagree for every
//! admissible (α, β) because q > p and (2−β)/(2−α) > 1.

use nalgebra::DVector;
use serde::Serialize;

use crate::error::{FxtsError, Result};
use crate::field::{JacobianMode, VectorFieldSpec};

/// Below this ‖f‖ the scaled right-hand side is taken as exactly zero,
/// consistent with the continuous extension and safe against overflow in
/// ‖f‖^(−q) with q < 0.
pub const SCALE_UNDERFLOW_GUARD: f64 = 1e-300;

/// Exponent pair of the sum scaling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScaleExponentsEq5 {
    pub p: f64,
    pub q: f64,
}

impl ScaleExponentsEq5 {
    pub fn new(p: f64, q: f64) -> Result<Self> {
        if !(0.0 < p && p < 1.0) {
            return Err(FxtsError::Parameter(format!("p = {p} must lie in (0, 1)")));
        }
        if !(q < 0.0) {
            return Err(FxtsError::Parameter(format!("q = {q} must be negative")));
        }
        Ok(ScaleExponentsEq5 { p, q })
    }
}

/// Parameters of the piecewise scaling, with the derived (p, q, c).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PiecewiseScaleParams {
    pub alpha: f64,
    pub beta: f64,
    /// Continuity constant of the comparison function.
    pub c: f64,
    /// Derived exponent (2−2α)/(2−α) ∈ (0, 1).
    pub p: f64,
    /// Derived exponent (2−2β)/(2−β) ∈ (1, 2).
    pub q: f64,
}

/// Derives (p, q, c) from (α, β).
pub fn compute_c_and_exponents(alpha: f64, beta: f64) -> Result<PiecewiseScaleParams> {
    if !(0.0 < alpha && alpha < 1.0) {
        return Err(FxtsError::Parameter(format!("alpha = {alpha} must lie in (0, 1)")));
    }
    if !(beta < 0.0) {
        return Err(FxtsError::Parameter(format!("beta = {beta} must be negative")));
    }
    let p = (2.0 - 2.0 * alpha) / (2.0 - alpha);
    let q = (2.0 - 2.0 * beta) / (2.0 - beta);
    // c^(q−p) = (2−β)/(2−α); computed in log form for accuracy.
    let c = (((2.0 - beta) / (2.0 - alpha)).ln() / (q - p)).exp();
    Ok(PiecewiseScaleParams { alpha, beta, c, p, q })
}

/// Which scaling produced a [`ScaledSystem`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum ScaleKind {
    Eq5(ScaleExponentsEq5),
    Eq6Piecewise(PiecewiseScaleParams),
}

/// A base field composed with one of the two scalings. Evaluates to
/// s(x)·f(x) where s is the scalar scale factor.
#[derive(Debug, Clone)]
pub struct ScaledSystem {
    pub base: VectorFieldSpec,
    pub kind: ScaleKind,
}

impl ScaledSystem {
    /// Scale factor s(x) ≥ 0 with ẋ = s(x)·f(x); zero inside the guard.
    pub fn scale_factor_of_norm(&self, f_norm: f64) -> f64 {
        if f_norm < SCALE_UNDERFLOW_GUARD {
            return 0.0;
        }
        match self.kind {
            ScaleKind::Eq5(ScaleExponentsEq5 { p, q }) => {
                f_norm.powf(-p) + f_norm.powf(-q)
            }
            ScaleKind::Eq6Piecewise(PiecewiseScaleParams { alpha, beta, c, .. }) => {
                if f_norm <= 1.0 {
                    c * f_norm.powf(-alpha)
                } else {
                    c * f_norm.powf(-beta)
                }
            }
        }
    }

    /// Right-hand side of the scaled system.
    pub fn evaluate(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        let f = self.base.evaluate(x)?;
        let s = self.scale_factor_of_norm(f.norm());
        Ok(f * s)
    }

    /// The composite as a plain [`VectorFieldSpec`] (FD Jacobian; the chain
    /// rule through ‖f‖^(−p) is not provided analytically).
    pub fn as_field(&self) -> VectorFieldSpec {
        let me = self.clone();
        let dim = self.base.dimension;
        let eq_tol = self.base.equilibrium_tolerance;
        let mut field = VectorFieldSpec::new(dim, move |x: &DVector<f64>| {
            me.evaluate(x).unwrap_or_else(|_| DVector::zeros(dim))
        });
        field.equilibrium_tolerance = eq_tol;
        field.jacobian_mode = JacobianMode::FiniteDifference {
            step_scale: crate::field::DEFAULT_FD_STEP_SCALE,
        };
        field.zero_only_at_origin = self.base.zero_only_at_origin;
        field
    }
}

/// Builds the sum-scaled system.
pub fn fxts_scale(field: VectorFieldSpec, params: ScaleExponentsEq5) -> ScaledSystem {
    ScaledSystem { base: field, kind: ScaleKind::Eq5(params) }
}

/// Builds the piecewise-scaled system from (α, β).
pub fn piecewise_scale(field: VectorFieldSpec, alpha: f64, beta: f64) -> Result<ScaledSystem> {
    let params = compute_c_and_exponents(alpha, beta)?;
    Ok(ScaledSystem { base: field, kind: ScaleKind::Eq6Piecewise(params) })
}

/// Either a plain field or a scaled composite; the unit every simulator and
/// verifier operates on.
#[derive(Debug, Clone)]
pub enum System {
    Plain(VectorFieldSpec),
    Scaled(ScaledSystem),
}

impl System {
    pub fn dimension(&self) -> usize {
        self.base_field().dimension
    }

    pub fn base_field(&self) -> &VectorFieldSpec {
        match self {
            System::Plain(f) => f,
            System::Scaled(s) => &s.base,
        }
    }

    /// Right-hand side g(x).
    pub fn rhs(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        match self {
            System::Plain(f) => f.evaluate(x),
            System::Scaled(s) => s.evaluate(x),
        }
    }

    /// Scale factor s(x) with g = s·f (1 for plain systems).
    pub fn scale_factor(&self, f_norm: f64) -> f64 {
        match self {
            System::Plain(_) => 1.0,
            System::Scaled(s) => s.scale_factor_of_norm(f_norm),
        }
    }

    pub fn scale_kind(&self) -> Option<&ScaleKind> {
        match self {
            System::Plain(_) => None,
            System::Scaled(s) => Some(&s.kind),
        }
    }
}

impl From<VectorFieldSpec> for System {
    fn from(f: VectorFieldSpec) -> Self {
        System::Plain(f)
    }
}

impl From<ScaledSystem> for System {
    fn from(s: ScaledSystem) -> Self {
        System::Scaled(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn scalar_linear() -> VectorFieldSpec {
        catalog::parse_system_spec("linear_contraction:n=1").unwrap().field
    }

    fn dv1(v: f64) -> DVector<f64> {
        DVector::from_column_slice(&[v])
    }

    #[test]
    fn eq5_hand_evaluations() {
        let sys = fxts_scale(scalar_linear(), ScaleExponentsEq5::new(0.5, -2.0).unwrap());
        // x = 1: ‖f‖ = 1, both terms 1, so ẋ = -2
        assert_relative_eq!(sys.evaluate(&dv1(1.0)).unwrap()[0], -2.0, max_relative = 1e-14);
        // x = 4: magnitude 4^{1/2} + 4^{3} = 66
        assert_relative_eq!(sys.evaluate(&dv1(4.0)).unwrap()[0], -66.0, max_relative = 1e-14);
        // origin is a defined value
        assert_eq!(sys.evaluate(&dv1(0.0)).unwrap()[0], 0.0);
    }

    #[test]
    fn eq5_parameter_validation() {
        assert!(ScaleExponentsEq5::new(0.0, -1.0).is_err());
        assert!(ScaleExponentsEq5::new(1.0, -1.0).is_err());
        assert!(ScaleExponentsEq5::new(0.5, 0.0).is_err());
        assert!(ScaleExponentsEq5::new(0.5, 1.5).is_err());
    }

    #[test]
    fn eq5_continuous_at_origin() {
        // magnitudes ‖f‖^{1−p} + ‖f‖^{1−q} must decay to 0 along shrinking radii
        for (p, q) in [(0.5, -2.0), (0.1, -0.1), (0.9, -5.0)] {
            let sys = fxts_scale(scalar_linear(), ScaleExponentsEq5::new(p, q).unwrap());
            let mut prev = f64::INFINITY;
            for k in 0..20 {
                let r = 10f64.powf(-(k as f64) * 10.0 / 19.0); // 1 down to 1e-10
                let norm = sys.evaluate(&dv1(r)).unwrap().norm();
                assert!(norm < prev, "p={p} q={q}: not decreasing at r={r:e}");
                prev = norm;
            }
            assert!(prev < 1e-2, "p={p} q={q}: limit {prev:e}");
        }
    }

    #[test]
    fn derived_exponents_match_formulas() {
        let pr = compute_c_and_exponents(0.5, -2.0).unwrap();
        assert_relative_eq!(pr.p, 2.0 / 3.0, max_relative = 1e-15);
        assert_relative_eq!(pr.q, 1.5, max_relative = 1e-15);
        assert_relative_eq!(pr.c, (8.0f64 / 3.0).powf(1.2), max_relative = 1e-14);

        let pr = compute_c_and_exponents(0.5, -0.5).unwrap();
        assert_relative_eq!(pr.q, 1.2, max_relative = 1e-15);
        assert_relative_eq!(pr.c, (5.0f64 / 3.0).powf(1.875), max_relative = 1e-14);
        assert_relative_eq!(pr.c, 2.605951961070237, max_relative = 1e-12);

        // boundary sanity near the admissible corners
        let pr = compute_c_and_exponents(0.99, -0.01).unwrap();
        assert_relative_eq!(pr.p, 0.02 / 1.01, max_relative = 1e-12);
        assert_relative_eq!(pr.q, 2.02 / 2.01, max_relative = 1e-12);
        assert!(pr.c.is_finite() && pr.c > 1.0);
    }

    #[test]
    fn piecewise_parameter_validation() {
        assert!(compute_c_and_exponents(0.0, -1.0).is_err());
        assert!(compute_c_and_exponents(1.0, -1.0).is_err());
        assert!(compute_c_and_exponents(0.5, 0.0).is_err());
    }

    #[test]
    fn eq6_branches_agree_on_switching_surface() {
        // pick x so that ‖f(x)‖ = 1 exactly: f = -x, so ‖x‖ = 1
        let params = compute_c_and_exponents(0.5, -2.0).unwrap();
        let lower = params.c * 1.0f64.powf(-params.alpha);
        let upper = params.c * 1.0f64.powf(-params.beta);
        assert_eq!(lower, upper);
        let sys = piecewise_scale(scalar_linear(), 0.5, -2.0).unwrap();
        assert_relative_eq!(sys.evaluate(&dv1(1.0)).unwrap()[0], -params.c, max_relative = 1e-14);
    }

    #[test]
    fn eq6_lower_branch_hand_evaluation() {
        // f = -0.25 at x = 0.25: ẋ = -c·0.25^{1/2} = -0.5c
        let sys = piecewise_scale(scalar_linear(), 0.5, -2.0).unwrap();
        let c = compute_c_and_exponents(0.5, -2.0).unwrap().c;
        assert_relative_eq!(sys.evaluate(&dv1(0.25)).unwrap()[0], -0.5 * c, max_relative = 1e-14);
    }

    #[test]
    fn eq6_switching_surface_continuity_random_states() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        let field = catalog::parse_system_spec("quadratic_gradient:q=1,4").unwrap().field;
        let sys = piecewise_scale(field.clone(), 0.3, -1.5).unwrap();
        for _ in 0..100 {
            let dir = {
                let v = DVector::from_fn(2, |_, _| rng.random_range(-1.0..1.0f64));
                &v / v.norm()
            };
            // rescale x so that ‖f(x)‖ = 1 ± 1e-9 (f linear in x here)
            let f1 = field.evaluate(&dir).unwrap().norm();
            let lo = &dir * ((1.0 - 1e-9) / f1);
            let hi = &dir * ((1.0 + 1e-9) / f1);
            let a = sys.evaluate(&lo).unwrap();
            let b = sys.evaluate(&hi).unwrap();
            let rel = (&a - &b).norm() / a.norm();
            assert!(rel < 1e-7, "branch jump {rel:e} near the switching surface");
        }
    }

    proptest! {
        #[test]
        fn phi_continuity_residual_vanishes(alpha in 0.01f64..0.99, beta in -10.0f64..-0.01) {
            let pr = compute_c_and_exponents(alpha, beta).unwrap();
            let lhs = pr.c.powf(2.0 - pr.p) * (2.0 - alpha);
            let rhs = pr.c.powf(2.0 - pr.q) * (2.0 - beta);
            prop_assert!((lhs - rhs).abs() < 1e-12, "residual {:e}", (lhs - rhs).abs());
        }

        #[test]
        fn derived_exponent_ranges(alpha in 0.01f64..0.99, beta in -10.0f64..-0.01) {
            let pr = compute_c_and_exponents(alpha, beta).unwrap();
            prop_assert!(pr.p > 0.0 && pr.p < 1.0);
            prop_assert!(pr.q > 1.0 && pr.q < 2.0);
            prop_assert!(pr.c > 1.0 && pr.c.is_finite());
        }
    }

    #[test]
    fn printed_sign_of_c_exponent_breaks_continuity() {
        // With 1/(p−q) instead of 1/(q−p) the comparison-function branches
        // disagree at r = 1 for every admissible pair; keep one witness.
        let pr = compute_c_and_exponents(0.5, -2.0).unwrap();
        let c_bad = ((2.0f64 + 2.0) / 1.5).powf(1.0 / (pr.p - pr.q));
        let lhs = c_bad.powf(2.0 - pr.p) * 1.5;
        let rhs = c_bad.powf(2.0 - pr.q) * 4.0;
        assert!((lhs - rhs).abs() > 1e-1, "wrong sign should break continuity");
    }

    #[test]
    fn scaled_as_field_matches_direct_evaluation() {
        let sys = fxts_scale(scalar_linear(), ScaleExponentsEq5::new(0.5, -2.0).unwrap());
        let fld = sys.as_field();
        let x = dv1(2.5);
        assert_eq!(fld.evaluate(&x).unwrap(), sys.evaluate(&x).unwrap());
    }
}
