//! Built-in test systems with known spectral constants.
//!
//! | name                  | f(x)                      | gradient | λ₀ (H = −(J+Jᵀ)) | λ₀ (H = −½(J+Jᵀ)) |
//! |-----------------------|---------------------------|----------|------------------|--------------------|
//! | `linear_contraction`  | −x (any n)                | yes      | 2                | 1                  |
//! | `rotation_contraction`| (A−I)x, A = [[0,1],[−1,0]]| no       | 2                | 1                  |
//! | `quadratic_gradient`  | −Qx, Q = diag(q₁,…)       | yes      | 2·min qᵢ         | min qᵢ             |
//! | `quartic_well`        | −(Qx + ‖x‖²x)             | yes      | 2·min qᵢ (inf)   | min qᵢ (inf)       |
//! | `scalar_cubic`        | −x³ (n = 1)               | yes      | none (inf = 0)   | none (inf = 0)     |
//!
//! `scalar_cubic` is the stock counterexample: asymptotically but not
//! exponentially stable, H(x) → 0 as x → 0, so the positive-λ₀ condition
//! fails near the origin.
//!
//! Entries are addressable by spec string `name[:key=value,...]`, e.g.
//! `linear_contraction:n=3` or `quadratic_gradient:q=1,4`.

use nalgebra::{DMatrix, DVector};

use crate::error::{FxtsError, Result};
use crate::field::VectorFieldSpec;

/// Spectral constants known in closed form for a catalog entry.
#[derive(Debug, Clone, Default)]
pub struct KnownConstants {
    /// min eigenvalue of H(x) = −(∇f + ∇fᵀ) over x ≠ 0, when constant/known.
    pub lambda0_theorem4: Option<f64>,
    /// min eigenvalue of H(x) = −½(∇f + ∇fᵀ) over x ≠ 0.
    pub lambda0_theorem5: Option<f64>,
    /// Human-readable settling facts (documentation only).
    pub settling_note: Option<&'static str>,
}

/// A named test system plus its known constants.
#[derive(Debug, Clone)]
pub struct CatalogEntry {
    pub name: String,
    /// Canonical spec string that reproduces this entry.
    pub spec: String,
    pub field: VectorFieldSpec,
    pub known: KnownConstants,
}

/// Names of all shipped systems.
pub fn names() -> &'static [&'static str] {
    &[
        "linear_contraction",
        "rotation_contraction",
        "quadratic_gradient",
        "quartic_well",
        "scalar_cubic",
    ]
}

/// Looks up `name` with default parameters.
pub fn get(name: &str) -> Result<CatalogEntry> {
    parse_system_spec(name)
}

/// Splits `key=value` pairs separated by commas, re-attaching comma-separated
/// list values to their key (`q=1,4` parses as one pair).
fn split_params(s: &str) -> Result<Vec<(String, String)>> {
    let mut out: Vec<(String, String)> = Vec::new();
    for seg in s.split(',') {
        match seg.split_once('=') {
            Some((k, v)) => out.push((k.trim().to_string(), v.trim().to_string())),
            None => match out.last_mut() {
                Some((_, v)) => {
                    v.push(',');
                    v.push_str(seg.trim());
                }
                None => {
                    return Err(FxtsError::Parameter(format!(
                        "expected key=value, got `{seg}`"
                    )))
                }
            },
        }
    }
    Ok(out)
}

fn parse_f64_list(v: &str) -> Result<Vec<f64>> {
    v.split(',')
        .map(|p| {
            p.trim()
                .parse::<f64>()
                .map_err(|_| FxtsError::Parameter(format!("`{p}` is not a number")))
        })
        .collect()
}

/// Builds a catalog entry from `name[:key=value,...]`.
pub fn parse_system_spec(spec: &str) -> Result<CatalogEntry> {
    let (name, params) = match spec.split_once(':') {
        Some((n, p)) => (n.trim(), split_params(p)?),
        None => (spec.trim(), Vec::new()),
    };
    let mut dim: Option<usize> = None;
    let mut qdiag: Option<Vec<f64>> = None;
    for (k, v) in &params {
        match k.as_str() {
            "n" => {
                let n: usize = v
                    .parse()
                    .map_err(|_| FxtsError::Parameter(format!("n = `{v}` is not an integer")))?;
                if n == 0 {
                    return Err(FxtsError::Parameter("dimension n must be positive".into()));
                }
                dim = Some(n);
            }
            "q" => {
                let qs = parse_f64_list(v)?;
                if qs.iter().any(|&q| q <= 0.0) {
                    return Err(FxtsError::Parameter(
                        "q entries must be positive (Q symmetric positive definite)".into(),
                    ));
                }
                qdiag = Some(qs);
            }
            other => {
                return Err(FxtsError::Parameter(format!(
                    "unknown system parameter `{other}` for `{name}`"
                )))
            }
        }
    }

    match name {
        "linear_contraction" => {
            let n = dim.unwrap_or(2);
            let field = VectorFieldSpec::new(n, |x: &DVector<f64>| -x)
                .with_analytic_jacobian(move |_x| DMatrix::from_diagonal_element(n, n, -1.0))
                .with_gradient_potential(|x: &DVector<f64>| 0.5 * x.norm_squared());
            Ok(CatalogEntry {
                name: name.into(),
                spec: format!("linear_contraction:n={n}"),
                field,
                known: KnownConstants {
                    lambda0_theorem4: Some(2.0),
                    lambda0_theorem5: Some(1.0),
                    settling_note: Some("unscaled solution x0·e^{-t}; settling to eps takes ln(‖x0‖/eps)"),
                },
            })
        }
        "rotation_contraction" => {
            if dim.is_some_and(|n| n != 2) {
                return Err(FxtsError::Parameter("rotation_contraction is 2-dimensional".into()));
            }
            // (A - I)x with A skew; the skew part cancels in H.
            let field = VectorFieldSpec::new(2, |x: &DVector<f64>| {
                DVector::from_column_slice(&[x[1] - x[0], -x[0] - x[1]])
            })
            .with_analytic_jacobian(|_x| {
                DMatrix::from_row_slice(2, 2, &[-1.0, 1.0, -1.0, -1.0])
            });
            Ok(CatalogEntry {
                name: name.into(),
                spec: "rotation_contraction".into(),
                field,
                known: KnownConstants {
                    lambda0_theorem4: Some(2.0),
                    lambda0_theorem5: Some(1.0),
                    settling_note: Some("spiral sink; ‖f‖² = 2‖x‖² decays exponentially"),
                },
            })
        }
        "quadratic_gradient" => {
            let q = qdiag.unwrap_or_else(|| vec![1.0, 4.0]);
            if let Some(n) = dim {
                if n != q.len() {
                    return Err(FxtsError::Parameter(format!(
                        "n = {n} conflicts with q list of length {}",
                        q.len()
                    )));
                }
            }
            let n = q.len();
            let qmin = q.iter().cloned().fold(f64::INFINITY, f64::min);
            let qe = q.clone();
            let qj = q.clone();
            let qp = q.clone();
            let field = VectorFieldSpec::new(n, move |x: &DVector<f64>| {
                DVector::from_fn(n, |i, _| -qe[i] * x[i])
            })
            .with_analytic_jacobian(move |_x| {
                DMatrix::from_diagonal(&DVector::from_fn(n, |i, _| -qj[i]))
            })
            .with_gradient_potential(move |x: &DVector<f64>| {
                0.5 * x.iter().enumerate().map(|(i, xi)| qp[i] * xi * xi).sum::<f64>()
            });
            let qstr = q.iter().map(|v| format!("{v}")).collect::<Vec<_>>().join(",");
            Ok(CatalogEntry {
                name: name.into(),
                spec: format!("quadratic_gradient:q={qstr}"),
                field,
                known: KnownConstants {
                    lambda0_theorem4: Some(2.0 * qmin),
                    lambda0_theorem5: Some(qmin),
                    settling_note: None,
                },
            })
        }
        "quartic_well" => {
            let q = qdiag.unwrap_or_else(|| vec![1.0, 4.0]);
            if let Some(n) = dim {
                if n != q.len() {
                    return Err(FxtsError::Parameter(format!(
                        "n = {n} conflicts with q list of length {}",
                        q.len()
                    )));
                }
            }
            let n = q.len();
            let qmin = q.iter().cloned().fold(f64::INFINITY, f64::min);
            let qe = q.clone();
            let qj = q.clone();
            let qp = q.clone();
            let field = VectorFieldSpec::new(n, move |x: &DVector<f64>| {
                let nsq = x.norm_squared();
                DVector::from_fn(n, |i, _| -(qe[i] * x[i] + nsq * x[i]))
            })
            .with_analytic_jacobian(move |x: &DVector<f64>| {
                let nsq = x.norm_squared();
                let mut m = DMatrix::from_fn(n, n, |r, c| -2.0 * x[r] * x[c]);
                for i in 0..n {
                    m[(i, i)] -= qj[i] + nsq;
                }
                m
            })
            .with_gradient_potential(move |x: &DVector<f64>| {
                let nsq = x.norm_squared();
                0.5 * x.iter().enumerate().map(|(i, xi)| qp[i] * xi * xi).sum::<f64>()
                    + 0.25 * nsq * nsq
            });
            let qstr = q.iter().map(|v| format!("{v}")).collect::<Vec<_>>().join(",");
            Ok(CatalogEntry {
                name: name.into(),
                spec: format!("quartic_well:q={qstr}"),
                field,
                known: KnownConstants {
                    // H(x) = Q + ‖x‖²(I + 2 x̂x̂ᵀ‖x‖²/‖x‖²) ≻ Q; infimum over x ≠ 0.
                    lambda0_theorem4: Some(2.0 * qmin),
                    lambda0_theorem5: Some(qmin),
                    settling_note: None,
                },
            })
        }
        "scalar_cubic" => {
            if dim.is_some_and(|n| n != 1) {
                return Err(FxtsError::Parameter("scalar_cubic is 1-dimensional".into()));
            }
            let field = VectorFieldSpec::new(1, |x: &DVector<f64>| {
                DVector::from_column_slice(&[-x[0].powi(3)])
            })
            .with_analytic_jacobian(|x: &DVector<f64>| {
                DMatrix::from_element(1, 1, -3.0 * x[0] * x[0])
            })
            .with_gradient_potential(|x: &DVector<f64>| 0.25 * x[0].powi(4));
            Ok(CatalogEntry {
                name: name.into(),
                spec: "scalar_cubic".into(),
                field,
                known: KnownConstants {
                    lambda0_theorem4: None,
                    lambda0_theorem5: None,
                    settling_note: Some("AS but not ES: H(x) = 6x² (no positive lower bound near 0)"),
                },
            })
        }
        other => Err(FxtsError::Lookup(format!(
            "unknown system `{other}`; available: {}",
            names().join(", ")
        ))),
    }
}
