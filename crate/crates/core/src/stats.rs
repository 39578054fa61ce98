//! Standard-normal primitives and effect-scale transforms.
//!
//! The normal CDF is evaluated through the complementary error function so
//! that both tails keep full relative precision. The quantile starts from
//! Acklam's rational approximation (relative error below 1.2e-9) and is
//! polished with two Halley steps against the CDF.

use std::f64::consts::{PI, SQRT_2};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A probability in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Probability(f64);

impl Probability {
    pub fn new(value: f64) -> Result<Self> {
        if (0.0..=1.0).contains(&value) {
            Ok(Probability(value))
        } else {
            Err(Error::domain("probability", value, "must lie in [0, 1]"))
        }
    }

    /// Clamps into `[0, 1]`; for values produced by arithmetic that may drift
    /// by an ulp.
    pub(crate) fn saturating(value: f64) -> Self {
        Probability(value.clamp(0.0, 1.0))
    }

    pub const fn value(self) -> f64 {
        self.0
    }
}

impl fmt::Display for Probability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// A signed statistic on the standard-normal scale.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ZValue(f64);

impl ZValue {
    pub fn new(value: f64) -> Result<Self> {
        if value.is_finite() {
            Ok(ZValue(value))
        } else {
            Err(Error::domain("z", value, "must be finite"))
        }
    }

    pub const fn value(self) -> f64 {
        self.0
    }
}

impl fmt::Display for ZValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Direction of an observed effect. Two-sided p-values are sign-blind, so
/// recovering a z-statistic from one needs this.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Positive,
    Negative,
}

impl Direction {
    pub fn sign(self) -> f64 {
        match self {
            Direction::Positive => 1.0,
            Direction::Negative => -1.0,
        }
    }

    pub fn of(x: f64) -> Self {
        if x < 0.0 {
            Direction::Negative
        } else {
            Direction::Positive
        }
    }
}

/// Φ(x). Saturates to 0 or 1 for large `|x|`; NaN maps to NaN.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / SQRT_2)
}

/// Standard-normal CDF as a [`Probability`].
pub fn std_normal_cdf(x: f64) -> Probability {
    Probability::saturating(normal_cdf(x))
}

fn normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

const ACKLAM_A: [f64; 6] = [
    -3.969683028665376e+01,
    2.209460984245205e+02,
    -2.759285104469687e+02,
    1.383577518672690e+02,
    -3.066479806614716e+01,
    2.506628277459239e+00,
];
const ACKLAM_B: [f64; 5] = [
    -5.447609879822406e+01,
    1.615858368580409e+02,
    -1.556989798598866e+02,
    6.680131188771972e+01,
    -1.328068155288572e+01,
];
const ACKLAM_C: [f64; 6] = [
    -7.784894002430293e-03,
    -3.223964580411365e-01,
    -2.400758277161838e+00,
    -2.549732539343734e+00,
    4.374664141464968e+00,
    2.938163982698783e+00,
];
const ACKLAM_D: [f64; 4] = [
    7.784695709041462e-03,
    3.224671290700398e-01,
    2.445134137142996e+00,
    3.754408661907416e+00,
];
const ACKLAM_P_LOW: f64 = 0.02425;

fn acklam_lower(p: f64) -> f64 {
    // p in (0, 0.5]
    if p < ACKLAM_P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        let c = &ACKLAM_C;
        let d = &ACKLAM_D;
        (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5])
            / ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0)
    } else {
        let q = p - 0.5;
        let r = q * q;
        let a = &ACKLAM_A;
        let b = &ACKLAM_B;
        (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q
            / (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0)
    }
}

fn quantile_lower(p: f64) -> f64 {
    let mut x = acklam_lower(p);
    for _ in 0..2 {
        let e = normal_cdf(x) - p;
        let u = e / normal_pdf(x);
        x -= u / (1.0 + 0.5 * x * u);
    }
    x
}

/// Φ⁻¹(p) for raw `p` strictly inside `(0, 1)`.
pub fn normal_quantile(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::domain("p", p, "quantile needs 0 < p < 1"));
    }
    if p == 0.5 {
        return Ok(0.0);
    }
    // 1 - p is exact for p in [0.5, 1).
    Ok(if p < 0.5 {
        quantile_lower(p)
    } else {
        -quantile_lower(1.0 - p)
    })
}

/// Standard-normal quantile. Errors for `p ∈ {0, 1}`.
pub fn std_normal_quantile(p: Probability) -> Result<ZValue> {
    normal_quantile(p.value()).map(ZValue)
}

/// Fisher's z transform, `atanh(r)`.
pub fn fisher_z(r: f64) -> Result<f64> {
    if r.is_nan() || r.abs() >= 1.0 {
        return Err(Error::domain("r", r, "correlation must satisfy |r| < 1"));
    }
    Ok(r.atanh())
}

pub fn fisher_z_inv(z: f64) -> f64 {
    z.tanh()
}

/// Signed z-statistic from a two-sided p-value: `direction · Φ⁻¹(1 − p/2)`.
pub fn p_to_z(p: f64, direction: Direction) -> Result<ZValue> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::domain("p", p, "two-sided p-value must lie in (0, 1)"));
    }
    // Φ⁻¹(1 − p/2) = −Φ⁻¹(p/2), which avoids the cancellation in 1 − p/2.
    let z = -normal_quantile(0.5 * p)?;
    Ok(ZValue(direction.sign() * z))
}

/// Two-sided p-value of a z-statistic.
pub fn z_to_p(z: f64) -> Probability {
    Probability::saturating(2.0 * normal_cdf(-z.abs()))
}
