//! Expression registry: the closed set of scalar fields and test functions
//! a config file can name.
//!
//! Configs stay declarative — an expression is an `"id"` plus numeric
//! parameters, never code — so identical configs always rebuild identical
//! closures and runs stay reproducible.
//!
//! Unknown `"id"`s and missing required parameters are rejected. Extra keys
//! inside an expression object are ignored (the cost of the tagged-enum
//! encoding); top-level config keys are strict.

use plap::exponent::PExponent;
use plap::solver::ScalarFn;
use plap::testfn::SmoothTestFunction;
use serde::Deserialize;
use std::sync::Arc;

use crate::CliError;

/// A planar scalar field `ℝ² → ℝ`, usable as source `f`, collar data `G`,
/// or exact solution.
#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "id", rename_all = "snake_case", deny_unknown_fields)]
pub enum Expr {
    /// `0`.
    Zero,
    /// `value`.
    Constant { value: f64 },
    /// `offset + coeffs·x`.
    Linear {
        coeffs: [f64; 2],
        #[serde(default)]
        offset: f64,
    },
    /// `offset + amplitude · sin(wavevector·x + phase)`.
    Wave {
        amplitude: f64,
        wavevector: [f64; 2],
        #[serde(default)]
        phase: f64,
        #[serde(default)]
        offset: f64,
    },
    /// `|x − center|^exponent`.
    RadialPower { center: [f64; 2], exponent: f64 },
    /// `|x − center|^{p/(p−1)}`, the radial profile whose operator value is
    /// constant; the exponent follows the run's `p`.
    ConjugatePower { center: [f64; 2] },
}

impl Expr {
    /// Build the shared closure. `p` is only read by `conjugate_power`.
    pub fn scalar(&self, p: &PExponent) -> ScalarFn {
        match self {
            Expr::Zero => Arc::new(|_x: &[f64; 2]| 0.0),
            Expr::Constant { value } => {
                let value = *value;
                Arc::new(move |_x: &[f64; 2]| value)
            }
            Expr::Linear { coeffs, offset } => {
                let [a, b] = *coeffs;
                let offset = *offset;
                Arc::new(move |x: &[f64; 2]| offset + a * x[0] + b * x[1])
            }
            Expr::Wave { amplitude, wavevector, phase, offset } => {
                let amplitude = *amplitude;
                let [kx, ky] = *wavevector;
                let phase = *phase;
                let offset = *offset;
                Arc::new(move |x: &[f64; 2]| {
                    offset + amplitude * (kx * x[0] + ky * x[1] + phase).sin()
                })
            }
            Expr::RadialPower { center, exponent } => {
                let [cx, cy] = *center;
                let beta = *exponent;
                Arc::new(move |x: &[f64; 2]| x_minus_c_norm(x, cx, cy).powf(beta))
            }
            Expr::ConjugatePower { center } => {
                let [cx, cy] = *center;
                let beta = p.p() / p.pm1();
                Arc::new(move |x: &[f64; 2]| x_minus_c_norm(x, cx, cy).powf(beta))
            }
        }
    }

    /// Finite-value sanity checks that don't need a grid (e.g. the conjugate
    /// power is fine everywhere, but a negative radial power blows up at its
    /// center — the solver would only notice via a NaN deep inside a sweep).
    pub fn validate(&self) -> Result<(), CliError> {
        match self {
            Expr::RadialPower { exponent, .. } if !exponent.is_finite() => Err(CliError::Usage(
                format!("radial_power exponent must be finite, got {exponent}"),
            )),
            Expr::Wave { amplitude, wavevector, .. }
                if !(amplitude.is_finite()
                    && wavevector[0].is_finite()
                    && wavevector[1].is_finite()) =>
            {
                Err(CliError::Usage("wave parameters must be finite".to_string()))
            }
            _ => Ok(()),
        }
    }
}

fn x_minus_c_norm(x: &[f64; 2], cx: f64, cy: f64) -> f64 {
    let dx = x[0] - cx;
    let dy = x[1] - cy;
    (dx * dx + dy * dy).sqrt()
}

/// A smooth test function with exact derivatives, for operator consistency
/// sweeps in any supported dimension.
#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "id", rename_all = "snake_case", deny_unknown_fields)]
pub enum TestFnSpec {
    /// `offset + coeffs·x`.
    Linear {
        coeffs: Vec<f64>,
        #[serde(default)]
        offset: f64,
    },
    /// `½ xᵀAx + b·x + c` with `A` row-major symmetric.
    Quadratic {
        a: Vec<f64>,
        b: Vec<f64>,
        #[serde(default)]
        c: f64,
    },
    /// `|x − center|^exponent`, valid on the ball `B_radius(base)` (which
    /// must exclude `center` unless the exponent is benign).
    RadialPower {
        center: Vec<f64>,
        exponent: f64,
        base: Vec<f64>,
        radius: f64,
    },
    /// The fundamental-solution profile for the run's `(d, p)`, valid on
    /// `B_radius(base)` away from its pole at the origin.
    Fundamental { base: Vec<f64>, radius: f64 },
}

impl TestFnSpec {
    pub fn build(&self, dim: usize, p: &PExponent) -> Result<SmoothTestFunction, CliError> {
        let built = match self {
            TestFnSpec::Linear { coeffs, offset } => {
                if coeffs.len() != dim {
                    return Err(CliError::Usage(format!(
                        "linear coeffs have length {}, expected the evaluation point's dimension {dim}",
                        coeffs.len()
                    )));
                }
                Ok(SmoothTestFunction::linear(coeffs.clone(), *offset))
            }
            TestFnSpec::Quadratic { a, b, c } => {
                SmoothTestFunction::quadratic(a.clone(), b.clone(), *c)
            }
            TestFnSpec::RadialPower { center, exponent, base, radius } => {
                SmoothTestFunction::radial_power(center.clone(), *exponent, base.clone(), *radius)
            }
            TestFnSpec::Fundamental { base, radius } => {
                SmoothTestFunction::fundamental(dim, p, base.clone(), *radius)
            }
        };
        built.map_err(CliError::from)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn px(p: f64) -> PExponent {
        PExponent::new(p).unwrap()
    }

    #[test]
    fn expressions_parse_and_evaluate() {
        let cases: Vec<(&str, f64)> = vec![
            (r#"{"id": "zero"}"#, 0.0),
            (r#"{"id": "constant", "value": -4.5}"#, -4.5),
            (r#"{"id": "linear", "coeffs": [2.0, -1.0], "offset": 0.5}"#, 0.5 + 2.0 * 0.3 - 0.7),
            (
                r#"{"id": "radial_power", "center": [2.0, 0.0], "exponent": 1.5}"#,
                ((0.3f64 - 2.0).powi(2) + 0.7f64.powi(2)).sqrt().powf(1.5),
            ),
        ];
        let p = px(3.0);
        for (text, want) in cases {
            let expr: Expr = serde_json::from_str(text).unwrap();
            let f = expr.scalar(&p);
            let got = f(&[0.3, 0.7]);
            assert!((got - want).abs() < 1e-15, "{text}: got {got}, want {want}");
        }
    }

    #[test]
    fn conjugate_power_tracks_p() {
        let expr: Expr =
            serde_json::from_str(r#"{"id": "conjugate_power", "center": [2.0, 0.0]}"#).unwrap();
        let x = [0.25, -0.4];
        let r = ((x[0] - 2.0f64).powi(2) + x[1].powi(2)).sqrt();
        let f15 = expr.scalar(&px(1.5));
        let f3 = expr.scalar(&px(3.0));
        assert!((f15(&x) - r.powf(3.0)).abs() < 1e-14);
        assert!((f3(&x) - r.powf(1.5)).abs() < 1e-14);
    }

    #[test]
    fn unknown_expression_id_is_rejected() {
        let err = serde_json::from_str::<Expr>(r#"{"id": "cubic_spline"}"#).unwrap_err();
        assert!(err.to_string().contains("cubic_spline"));
    }

    #[test]
    fn misspelled_required_field_is_rejected() {
        // The typo leaves the required field missing, which is an error even
        // though tagged enums tolerate extra keys.
        let err =
            serde_json::from_str::<Expr>(r#"{"id": "constant", "valeu": 1.0}"#).unwrap_err();
        assert!(err.to_string().contains("value"));
    }

    #[test]
    fn test_function_dimension_mismatch_is_a_usage_error() {
        let spec = TestFnSpec::Linear { coeffs: vec![1.0, 2.0, 3.0], offset: 0.0 };
        match spec.build(2, &px(2.0)) {
            Err(CliError::Usage(msg)) => assert!(msg.contains("length 3")),
            other => panic!("expected a usage error, got {other:?}"),
        }
    }
}
