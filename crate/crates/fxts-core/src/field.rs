//! Vector fields ẋ = f(x) with f(0) = 0: evaluation, Jacobians, and
//! gradient-field potentials.
//!
//! A [`VectorFieldSpec`] wraps a user- or catalog-supplied map f: ℝⁿ → ℝⁿ
//! together with the metadata the verification machinery needs:
//!
//! * how to obtain the Jacobian ∇f (analytic closure or central finite
//!   differences),
//! * whether f is a gradient field, i.e. f = −∇F for some potential F, in
//!   which case V(x) = −∫₀ˣ f(y)ᵀdy is path-independent,
//! * an equilibrium tolerance: the closed ball inside which f is treated as
//!   exactly zero, so forward orbits of the origin stay at the origin and the
//!   scaled systems never divide by a denormal ‖f‖.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{FxtsError, Result};
use crate::quad;

/// Default ball radius inside which f snaps to exactly zero.
pub const DEFAULT_EQUILIBRIUM_TOL: f64 = 1e-12;

/// Default finite-difference scale: h = FD_STEP_SCALE · max(1, ‖x‖).
pub const DEFAULT_FD_STEP_SCALE: f64 = 1e-6;

/// Default panel count for potential path quadrature (16-pt Gauss each).
pub const DEFAULT_POTENTIAL_PANELS: usize = 64;

type EvalFn = Arc<dyn Fn(&DVector<f64>) -> DVector<f64> + Send + Sync>;
type JacFn = Arc<dyn Fn(&DVector<f64>) -> DMatrix<f64> + Send + Sync>;
type PotentialFn = Arc<dyn Fn(&DVector<f64>) -> f64 + Send + Sync>;

/// How Jacobians of the field are produced.
#[derive(Clone)]
pub enum JacobianMode {
    /// Closed-form Jacobian supplied with the field.
    Analytic(JacFn),
    /// Central differences with step h = step_scale · max(1, ‖x‖).
    FiniteDifference { step_scale: f64 },
}

/// Gradient-field declaration; `potential` is the closed-form F with
/// f = −∇F when one is known (catalog entries ship it).
#[derive(Clone)]
pub struct GradientInfo {
    pub potential: Option<PotentialFn>,
}

/// Integration path for the potential line integral −∫₀ˣ f(y)ᵀdy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PathKind {
    /// y(t) = t·x, t ∈ [0, 1].
    StraightLine,
    /// Axis-aligned staircase: sweep coordinate 1 first, then 2, ...
    AxisAligned,
}

/// A dimension-n dynamical map f with Jacobian access and optional
/// gradient-field potential.
#[derive(Clone)]
pub struct VectorFieldSpec {
    pub dimension: usize,
    evaluator: EvalFn,
    pub jacobian_mode: JacobianMode,
    pub gradient: Option<GradientInfo>,
    pub equilibrium_tolerance: f64,
    /// Declared "f(x) = 0 ⟺ x = 0" property. Verifiers emit a contract
    /// warning instead of a verdict-changing failure when this is false.
    pub zero_only_at_origin: bool,
}

impl VectorFieldSpec {
    /// Builds a field from a raw evaluator with FD Jacobians and defaults.
    pub fn new<F>(dimension: usize, evaluator: F) -> Self
    where
        F: Fn(&DVector<f64>) -> DVector<f64> + Send + Sync + 'static,
    {
        VectorFieldSpec {
            dimension,
            evaluator: Arc::new(evaluator),
            jacobian_mode: JacobianMode::FiniteDifference { step_scale: DEFAULT_FD_STEP_SCALE },
            gradient: None,
            equilibrium_tolerance: DEFAULT_EQUILIBRIUM_TOL,
            zero_only_at_origin: true,
        }
    }

    pub fn with_analytic_jacobian<J>(mut self, jac: J) -> Self
    where
        J: Fn(&DVector<f64>) -> DMatrix<f64> + Send + Sync + 'static,
    {
        self.jacobian_mode = JacobianMode::Analytic(Arc::new(jac));
        self
    }

    pub fn with_gradient_potential<P>(mut self, potential: P) -> Self
    where
        P: Fn(&DVector<f64>) -> f64 + Send + Sync + 'static,
    {
        self.gradient = Some(GradientInfo { potential: Some(Arc::new(potential)) });
        self
    }

    /// Declares the field a gradient field without a closed-form potential.
    pub fn with_gradient_flag(mut self) -> Self {
        if self.gradient.is_none() {
            self.gradient = Some(GradientInfo { potential: None });
        }
        self
    }

    pub fn with_zero_only_at_origin(mut self, flag: bool) -> Self {
        self.zero_only_at_origin = flag;
        self
    }

    pub fn is_gradient_field(&self) -> bool {
        self.gradient.is_some()
    }

    fn check_dimension(&self, x: &DVector<f64>) -> Result<()> {
        if x.len() != self.dimension {
            return Err(FxtsError::Input(format!(
                "state has length {}, field dimension is {}",
                x.len(),
                self.dimension
            )));
        }
        Ok(())
    }

    /// f(x); exact zero vector inside the equilibrium ball.
    pub fn evaluate(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        self.check_dimension(x)?;
        if x.norm() <= self.equilibrium_tolerance {
            return Ok(DVector::zeros(self.dimension));
        }
        let fx = (self.evaluator)(x);
        if fx.len() != self.dimension {
            return Err(FxtsError::Input(format!(
                "evaluator returned length {}, expected {}",
                fx.len(),
                self.dimension
            )));
        }
        Ok(fx)
    }

    /// Raw evaluator access without the equilibrium snap (quadrature paths
    /// pass through the origin and must not see an artificial plateau).
    fn evaluate_raw(&self, x: &DVector<f64>) -> DVector<f64> {
        (self.evaluator)(x)
    }

    /// ∇f(x): analytic when supplied, otherwise column-wise central
    /// differences (f(x + h eᵢ) − f(x − h eᵢ)) / 2h.
    pub fn jacobian(&self, x: &DVector<f64>) -> Result<DMatrix<f64>> {
        self.check_dimension(x)?;
        let j = match &self.jacobian_mode {
            JacobianMode::Analytic(jac) => jac(x),
            JacobianMode::FiniteDifference { step_scale } => {
                if x.norm() <= self.equilibrium_tolerance {
                    return Err(FxtsError::Input(format!(
                        "finite-difference Jacobian requested at ‖x‖ = {:e} inside the \
                         equilibrium ball (radius {:e})",
                        x.norm(),
                        self.equilibrium_tolerance
                    )));
                }
                let h = step_scale * x.norm().max(1.0);
                let n = self.dimension;
                let mut m = DMatrix::zeros(n, n);
                let mut xp = x.clone();
                let mut xm = x.clone();
                for col in 0..n {
                    xp[col] = x[col] + h;
                    xm[col] = x[col] - h;
                    let fp = self.evaluate_raw(&xp);
                    let fm = self.evaluate_raw(&xm);
                    for row in 0..n {
                        m[(row, col)] = (fp[row] - fm[row]) / (2.0 * h);
                    }
                    xp[col] = x[col];
                    xm[col] = x[col];
                }
                m
            }
        };
        if j.iter().any(|v| !v.is_finite()) {
            return Err(FxtsError::Numeric(format!(
                "non-finite Jacobian entry at x = {:?}",
                x.as_slice()
            )));
        }
        Ok(j)
    }

    /// Line integral −∫₀ˣ f(y)ᵀdy along `path` with composite Gauss panels.
    ///
    /// No gradient-field contract is enforced here; [`Self::potential`] is
    /// the checked entry point. Exposed so tests can use the straight/axis
    /// disagreement as a non-gradient detector.
    pub fn line_integral(&self, x: &DVector<f64>, path: PathKind, panels: usize) -> Result<f64> {
        self.check_dimension(x)?;
        let n = self.dimension;
        match path {
            PathKind::StraightLine => {
                // −∫₀¹ f(t x)ᵀ x dt
                let mut g = |t: f64| {
                    let y = x * t;
                    -self.evaluate_raw(&y).dot(x)
                };
                Ok(quad::gauss16_composite(&mut g, 0.0, 1.0, panels))
            }
            PathKind::AxisAligned => {
                let mut total = 0.0;
                let mut base = DVector::zeros(n);
                for i in 0..n {
                    let xi = x[i];
                    if xi != 0.0 {
                        let mut g = |s: f64| {
                            let mut y = base.clone();
                            y[i] = s;
                            -self.evaluate_raw(&y)[i]
                        };
                        total += quad::gauss16_composite(&mut g, 0.0, xi, panels);
                    }
                    base[i] = xi;
                }
                Ok(total)
            }
        }
    }

    /// V(x) = −∫₀ˣ f(y)ᵀdy for a declared gradient field.
    pub fn potential(&self, x: &DVector<f64>, path: PathKind) -> Result<f64> {
        self.potential_with(x, path, DEFAULT_POTENTIAL_PANELS)
    }

    /// As [`Self::potential`] with an explicit panel count.
    pub fn potential_with(&self, x: &DVector<f64>, path: PathKind, panels: usize) -> Result<f64> {
        if !self.is_gradient_field() {
            return Err(FxtsError::Contract(
                "potential requested on a field not declared gradient_field; \
                 the line integral would be path-dependent"
                    .into(),
            ));
        }
        self.line_integral(x, path, panels)
    }

    /// Closed-form potential when the field ships one.
    pub fn closed_form_potential(&self, x: &DVector<f64>) -> Option<f64> {
        self.gradient
            .as_ref()
            .and_then(|g| g.potential.as_ref())
            .map(|p| p(x))
    }

    /// Potential value preferring the closed form, falling back to the
    /// straight-line quadrature.
    pub fn potential_value(&self, x: &DVector<f64>) -> Result<f64> {
        if let Some(v) = self.closed_form_potential(x) {
            return Ok(v);
        }
        self.potential(x, PathKind::StraightLine)
    }
}

impl std::fmt::Debug for VectorFieldSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("VectorFieldSpec")
            .field("dimension", &self.dimension)
            .field("gradient", &self.is_gradient_field())
            .field("equilibrium_tolerance", &self.equilibrium_tolerance)
            .finish()
    }
}
