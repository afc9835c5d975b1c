//! Shared domain types: equation coefficients, wave constants, jet points,
//! the quartic `P`, the first integrals `I3`/`I2`, and the integrand `h`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    #[error("wave speed c must be nonzero")]
    ZeroWaveSpeed,
    #[error("I2 is undefined at v = 0")]
    ZeroV,
    #[error("coefficient {0} must be finite")]
    NonFinite(&'static str),
}

/// Coefficients `A, B, M, N` of the modified Zakharov-Kuznetsov equation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EquationParams {
    pub a: f64,
    pub b: f64,
    pub m: f64,
    pub n: f64,
}

impl EquationParams {
    pub fn new(a: f64, b: f64, m: f64, n: f64) -> Result<Self, ModelError> {
        for (v, name) in [(a, "A"), (b, "B"), (m, "M"), (n, "N")] {
            if !v.is_finite() {
                return Err(ModelError::NonFinite(name));
            }
        }
        Ok(Self { a, b, m, n })
    }

    /// The dispersion sum `M + N`; the reduced ODE degenerates when it
    /// vanishes and only constant profiles remain.
    pub fn mu(&self) -> f64 {
        self.m + self.n
    }

    pub fn is_degenerate(&self) -> bool {
        self.mu() == 0.0
    }

    /// `K = -6 (M+N) / B`, defined for `B != 0`.
    pub fn k_const(&self) -> Option<f64> {
        if self.b != 0.0 {
            Some(-6.0 * self.mu() / self.b)
        } else {
            None
        }
    }
}

/// Wave speed and the three integration constants.
///
/// `C3` is the level of `I3`; `C2` the level of `I2` on that set; `C1` the
/// phase constant of the final quadrature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WaveConstants {
    pub c: f64,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
}

impl WaveConstants {
    pub fn new(c: f64, c1: f64, c2: f64, c3: f64) -> Result<Self, ModelError> {
        if c == 0.0 || !c.is_finite() {
            return Err(ModelError::ZeroWaveSpeed);
        }
        Ok(Self { c, c1, c2, c3 })
    }
}

/// Prolongation data `(r, v, v1, v2[, v3])` of a profile at one point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JetPoint {
    pub r: f64,
    pub v: f64,
    pub v1: f64,
    pub v2: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub v3: Option<f64>,
}

impl JetPoint {
    pub fn new(r: f64, v: f64, v1: f64, v2: f64) -> Self {
        Self { r, v, v1, v2, v3: None }
    }
}

/// The polynomial `P(z) = B z^4 + 2A z^3 - 6c z^2 - C2 z + C3` stored in
/// descending degree. Effective degree is 2 when `A = B = 0`, 3 when
/// `B = 0 != A`, and 4 otherwise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuarticPoly {
    pub coeffs: [f64; 5],
}

impl QuarticPoly {
    pub fn degree(&self) -> usize {
        if self.coeffs[0] != 0.0 {
            4
        } else if self.coeffs[1] != 0.0 {
            3
        } else {
            2
        }
    }

    pub fn eval(&self, z: f64) -> f64 {
        self.coeffs.iter().fold(0.0, |acc, &c| acc * z + c)
    }

    /// Derivative coefficients, descending degree (length 4).
    pub fn derivative(&self) -> [f64; 4] {
        let c = &self.coeffs;
        [4.0 * c[0], 3.0 * c[1], 2.0 * c[2], c[3]]
    }

    pub fn eval_derivative(&self, z: f64) -> f64 {
        self.derivative().iter().fold(0.0, |acc, &c| acc * z + c)
    }
}

/// Builds `P` from the coefficients and constants. Rejects `c = 0`.
pub fn build_p(params: &EquationParams, wc: &WaveConstants) -> Result<QuarticPoly, ModelError> {
    if wc.c == 0.0 {
        return Err(ModelError::ZeroWaveSpeed);
    }
    Ok(QuarticPoly {
        coeffs: [params.b, 2.0 * params.a, -6.0 * wc.c, -wc.c2, wc.c3],
    })
}

/// First integral of the reduced third-order ODE:
///
/// `I3 = 3B v^4 + 4A v^3 - 6c v^2 + 6(M+N)(2 v v2 - v1^2)`.
///
/// Constant along solutions; its level is `C3`.
pub fn i3(params: &EquationParams, c: f64, p: &JetPoint) -> f64 {
    let v = p.v;
    let v2 = v * v;
    3.0 * params.b * v2 * v2 + 4.0 * params.a * v2 * v - 6.0 * c * v2
        + 6.0 * params.mu() * (2.0 * v * p.v2 - p.v1 * p.v1)
}

/// Second first integral, defined on the `I3 = C3` level set away from `v = 0`:
///
/// `I2 = (B v^4 + 2A v^3 + 6(M+N) v1^2 - 6c v^2 + C3) / v`.
pub fn i2(params: &EquationParams, c: f64, c3: f64, p: &JetPoint) -> Result<f64, ModelError> {
    if p.v == 0.0 {
        return Err(ModelError::ZeroV);
    }
    let v = p.v;
    let v2 = v * v;
    let num = params.b * v2 * v2 + 2.0 * params.a * v2 * v + 6.0 * params.mu() * p.v1 * p.v1
        - 6.0 * c * v2
        + c3;
    Ok(num / v)
}

#[derive(Debug, Error, PartialEq)]
pub enum HEvalError {
    #[error("pole of h: P({0}) = 0")]
    Pole(f64),
    #[error("negative radicand: -6(M+N)/P({0}) = {1}")]
    Domain(f64, f64),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// The quadrature integrand `h(v) = sqrt(-6(M+N) / P(v))` of the final
/// Pfaffian reduction. Errors at roots of `P` and where the radicand turns
/// negative.
pub fn h_eval(params: &EquationParams, wc: &WaveConstants, v: f64) -> Result<f64, HEvalError> {
    let p = build_p(params, wc)?;
    let pv = p.eval(v);
    if pv == 0.0 {
        return Err(HEvalError::Pole(v));
    }
    let radicand = -6.0 * params.mu() / pv;
    if radicand <= 0.0 {
        return Err(HEvalError::Domain(v, radicand));
    }
    Ok(radicand.sqrt())
}

/// Level-set slope: `v1^2 = -P(v) / (6(M+N))` on `Sigma_(C2,C3)`. Returns the
/// radicand; the caller picks the sign branch.
pub fn level_set_v1_squared(params: &EquationParams, wc: &WaveConstants, v: f64) -> Result<f64, ModelError> {
    let p = build_p(params, wc)?;
    Ok(-p.eval(v) / (6.0 * params.mu()))
}
