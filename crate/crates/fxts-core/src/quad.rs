//! Gauss–Legendre quadrature with adaptive bisection and endpoint-singularity
//! substitutions.
//!
//! Everything downstream (path potentials, settling-time integrals) is built
//! on three primitives:
//!
//! * [`gauss16`] — one 16-point Gauss–Legendre panel, exact for polynomials
//!   of degree ≤ 31.
//! * [`integrate_adaptive`] — panel bisection until the G16 vs 2×G16
//!   disagreement meets a relative tolerance.
//! * [`integrate_power_singular`] — ∫₀ᵇ f with a declared integrable
//!   power singularity f(v) ~ K·v^(−p₀) at v = 0, removed analytically by the
//!   substitution w = v^(1−p₀) before the adaptive rule runs.
//!
//! The substitution: with v = w^(1/(1−p₀)),
//!
//! ```text
//! ∫₀ᵇ f(v) dv = 1/(1−p₀) ∫₀^(b^(1−p₀)) f(w^(1/(1−p₀))) · w^(p₀/(1−p₀)) dw
//! ```
//!
//! and the transformed integrand tends to a finite limit at w = 0, so plain
//! Gauss panels converge at full rate.

use crate::error::{FxtsError, Result};

/// Abscissae of the 16-point Gauss–Legendre rule on [-1, 1] (positive half).
const G16_NODES: [f64; 8] = [
    0.095_012_509_837_637_440_185,
    0.281_603_550_779_258_913_230,
    0.458_016_777_657_227_386_342,
    0.617_876_244_402_643_748_447,
    0.755_404_408_355_003_033_895,
    0.865_631_202_387_831_743_880,
    0.944_575_023_073_232_576_078,
    0.989_400_934_991_649_932_596,
];

/// Weights paired with [`G16_NODES`].
const G16_WEIGHTS: [f64; 8] = [
    0.189_450_610_455_068_496_285,
    0.182_603_415_044_923_588_867,
    0.169_156_519_395_002_538_189,
    0.149_595_988_816_576_732_081,
    0.124_628_971_255_533_872_052,
    0.095_158_511_682_492_784_810,
    0.062_253_523_938_647_892_863,
    0.027_152_459_411_754_094_852,
];

/// One 16-point Gauss–Legendre panel over [a, b].
pub fn gauss16<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> f64 {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut acc = 0.0;
    for (&x, &w) in G16_NODES.iter().zip(G16_WEIGHTS.iter()) {
        acc += w * (f(mid + half * x) + f(mid - half * x));
    }
    acc * half
}

/// Composite G16 with `panels` equal panels over [a, b].
pub fn gauss16_composite<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64, panels: usize) -> f64 {
    let n = panels.max(1);
    let h = (b - a) / n as f64;
    let mut acc = 0.0;
    for k in 0..n {
        let lo = a + k as f64 * h;
        acc += gauss16(f, lo, lo + h);
    }
    acc
}

/// Outcome of an adaptive integration: value plus an achieved-error estimate.
#[derive(Debug, Clone, Copy)]
pub struct QuadResult {
    pub value: f64,
    /// Accumulated |I_fine − I_coarse| over accepted panels; a conservative
    /// absolute error proxy.
    pub error_estimate: f64,
}

/// Adaptive bisection on [a, b] to relative tolerance `rel_tol`.
///
/// A panel is accepted when the 2-half refinement changes it by less than its
/// length-proportional share of the global budget. Depth is capped; hitting
/// the cap is reported as a quadrature error rather than silently accepted.
pub fn integrate_adaptive<F: FnMut(f64) -> f64>(
    f: &mut F,
    a: f64,
    b: f64,
    rel_tol: f64,
) -> Result<QuadResult> {
    if a == b {
        return Ok(QuadResult { value: 0.0, error_estimate: 0.0 });
    }
    let whole = gauss16(f, a, b);
    let scale = whole.abs().max(1e-300);
    let mut value = 0.0;
    let mut err_acc = 0.0;
    // (lo, hi, coarse estimate, depth)
    let mut stack = vec![(a, b, whole, 0u32)];
    const MAX_DEPTH: u32 = 60;
    while let Some((lo, hi, coarse, depth)) = stack.pop() {
        let mid = 0.5 * (lo + hi);
        let left = gauss16(f, lo, mid);
        let right = gauss16(f, mid, hi);
        let fine = left + right;
        let diff = (fine - coarse).abs();
        let budget = rel_tol * scale * ((hi - lo) / (b - a)).max(1e-12);
        if diff <= budget || diff <= 1e-3 * rel_tol * scale {
            value += fine;
            err_acc += diff;
        } else if depth >= MAX_DEPTH {
            return Err(FxtsError::Quadrature(format!(
                "adaptive panel [{lo:e}, {hi:e}] did not converge at depth {MAX_DEPTH} \
                 (last refinement change {diff:e})"
            )));
        } else {
            stack.push((lo, mid, left, depth + 1));
            stack.push((mid, hi, right, depth + 1));
        }
    }
    if !value.is_finite() {
        return Err(FxtsError::Quadrature(format!(
            "non-finite integral value on [{a:e}, {b:e}]"
        )));
    }
    Ok(QuadResult { value, error_estimate: err_acc })
}

/// ∫₀ᵇ f(v) dv where f has a declared power singularity v^(−p₀), p₀ ∈ [0, 1),
/// at the origin. Singularity strength outside [0,1) is a parameter error.
pub fn integrate_power_singular<F: FnMut(f64) -> f64>(
    f: &mut F,
    b: f64,
    p0: f64,
    rel_tol: f64,
) -> Result<QuadResult> {
    if !(0.0..1.0).contains(&p0) {
        return Err(FxtsError::Parameter(format!(
            "endpoint exponent p0 = {p0} outside [0, 1)"
        )));
    }
    if b <= 0.0 {
        return Ok(QuadResult { value: 0.0, error_estimate: 0.0 });
    }
    let one_m = 1.0 - p0;
    let inv = 1.0 / one_m;
    let w_hi = b.powf(one_m);
    let mut g = |w: f64| {
        let v = w.powf(inv);
        f(v) * w.powf(p0 * inv) * inv
    };
    integrate_adaptive(&mut g, 0.0, w_hi, rel_tol)
}

/// ∫₀ᵇ f(v) dv with an *unknown* integrable singularity at 0: geometric panel
/// refinement toward the origin with a Richardson-style convergence check.
///
/// Panels [b·2^(−k−1), b·2^(−k)] are summed until the increments decay
/// geometrically and the extrapolated remainder drops below tolerance. If the
/// increments do not contract (ratio ≥ 0.995, e.g. ∫ dv/v), the integral is
/// declared non-convergent.
pub fn integrate_refine_to_zero<F: FnMut(f64) -> f64>(
    f: &mut F,
    b: f64,
    rel_tol: f64,
) -> Result<QuadResult> {
    if b <= 0.0 {
        return Ok(QuadResult { value: 0.0, error_estimate: 0.0 });
    }
    let mut total = 0.0;
    let mut err_acc = 0.0;
    let mut hi = b;
    let mut prev_inc: Option<f64> = None;
    for _ in 0..2000 {
        let lo = 0.5 * hi;
        let piece = integrate_adaptive(f, lo, hi, rel_tol)?;
        total += piece.value;
        err_acc += piece.error_estimate;
        if let Some(prev) = prev_inc {
            if prev > 0.0 && piece.value >= 0.0 {
                let ratio = piece.value / prev;
                if ratio >= 0.995 {
                    return Err(FxtsError::Quadrature(format!(
                        "integrand not integrable at 0: panel sums decay with ratio {ratio:.6} \
                         (≥ 0.995) near v = {hi:e}"
                    )));
                }
                // Geometric extrapolation of what the remaining panels add.
                let remainder = piece.value * ratio / (1.0 - ratio);
                if remainder <= rel_tol * total.abs().max(1e-300) {
                    return Ok(QuadResult {
                        value: total + remainder,
                        error_estimate: err_acc + remainder,
                    });
                }
            }
        }
        prev_inc = Some(piece.value);
        hi = lo;
    }
    Err(FxtsError::Quadrature(
        "geometric refinement toward 0 exhausted 2000 halvings without converging".into(),
    ))
}
