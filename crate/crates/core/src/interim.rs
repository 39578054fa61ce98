//! Powers recomputed at an interim analysis of the replication.
//!
//! With `n_i` observations already collected and `n_j` still to come, the
//! formulas depend on the interim statistic `t_i`, the relative sample size
//! `c = n_r / n_o` and the completed fraction `f = n_i / n_r`. When the
//! remaining sample size varies with the interim data fixed, `n_i / n_o = c·f`
//! stays constant, so curves are parametrised by `k = n_j / n_o` with
//! `c = c·f + k` and `f = c·f / c`.

use serde::{Deserialize, Serialize};

use crate::config::{DesignConfig, Method};
use crate::error::{Error, Result};
use crate::fixed::{
    check_c, fixed_power, grow, scan_max, shrunk, Argument, EndLimit, FixedDesign, PowerResult,
};
use crate::stats::{normal_cdf, ZValue};

/// Interim data of a running replication.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InterimState {
    /// Interim test statistic, signed relative to the original effect.
    pub t_i: ZValue,
    /// Fraction of the replication already completed, `n_i / n_r`.
    pub f: f64,
    /// Relative sample size `n_r / n_o`.
    pub c: f64,
}

impl InterimState {
    /// Accepts `0 ≤ f < 1`; `f = 0` is the design-time special case.
    pub fn new(t_i: f64, f: f64, c: f64) -> Result<Self> {
        check_f(f)?;
        check_c(c)?;
        Ok(InterimState {
            t_i: ZValue::new(t_i)?,
            f,
            c,
        })
    }

    /// Interim sample size relative to the original, `n_i / n_o`.
    pub fn interim_ratio(&self) -> f64 {
        self.c * self.f
    }
}

fn check_f(f: f64) -> Result<()> {
    if (0.0..1.0).contains(&f) {
        Ok(())
    } else {
        Err(Error::domain("f", f, "completed fraction must satisfy 0 <= f < 1"))
    }
}

fn check_state(s: &InterimState) -> Result<()> {
    check_f(s.f)?;
    check_c(s.c)
}

/// Coefficients of `t_o`, `t_i` and `z_{α/2}` inside Φ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Weights {
    pub original: f64,
    pub interim: f64,
    pub alpha: f64,
}

pub fn weights(method: Method, c: f64, f: f64) -> Result<Weights> {
    check_c(c)?;
    check_f(f)?;
    Ok(raw_weights(method, c, f))
}

fn raw_weights(method: Method, c: f64, f: f64) -> Weights {
    match method {
        Method::Cpi => Weights {
            original: (c * (1.0 - f)).sqrt(),
            interim: (f / (1.0 - f)).sqrt(),
            alpha: (1.0 / (1.0 - f)).sqrt(),
        },
        Method::Ippi => {
            let cf1 = c * f + 1.0;
            Weights {
                original: (c * (1.0 - f) / (cf1 * (1.0 + c))).sqrt(),
                interim: (f * (1.0 + c) / ((1.0 - f) * cf1)).sqrt(),
                alpha: (cf1 / ((1.0 + c) * (1.0 - f))).sqrt(),
            }
        }
        Method::Ppi => Weights {
            original: 0.0,
            interim: (1.0 / (1.0 - f)).sqrt(),
            alpha: (f / (1.0 - f)).sqrt(),
        },
        _ => unreachable!("design-time methods are handled in `fixed`"),
    }
}

fn interim_argument(method: Method, t: f64, t_i: f64, c: f64, f: f64, z: f64) -> Argument {
    let w = raw_weights(method, c, f);
    Argument {
        data: w.original * t + w.interim * t_i,
        z: w.alpha * z,
    }
}

/// Bare interim power; `t_o` is unshrunk and ignored by PPi.
pub(crate) fn interim_power_value(
    method: Method,
    t_o: f64,
    t_i: f64,
    c: f64,
    f: f64,
    cfg: &DesignConfig,
) -> f64 {
    let t = shrunk(t_o, cfg);
    interim_argument(method, t, t_i, c, f, cfg.z_alpha()).power(cfg.tail())
}

/// Limits as the remaining sample size goes to zero and to infinity.
fn interim_limits(method: Method, t: f64, t_i: f64, ratio: f64, z: f64) -> (EndLimit, EndLimit) {
    let at_zero = EndLimit {
        upper: grow(t_i + z, 0.0),
        lower: grow(-t_i + z, 0.0),
    };
    let at_inf = match method {
        Method::Cpi => EndLimit {
            upper: grow(t, z),
            lower: grow(-t, z),
        },
        Method::Ippi => {
            let l = ippi_limit_argument(t, t_i, ratio);
            EndLimit { upper: l, lower: -l }
        }
        Method::Ppi => EndLimit {
            upper: t_i,
            lower: -t_i,
        },
        _ => unreachable!(),
    };
    (at_zero, at_inf)
}

fn ippi_limit_argument(t: f64, t_i: f64, ratio: f64) -> f64 {
    (1.0 / (ratio + 1.0)).sqrt() * t + (ratio / (ratio + 1.0)).sqrt() * t_i
}

fn interim_supremum(method: Method, t_o: f64, s: &InterimState, cfg: &DesignConfig) -> f64 {
    let t = shrunk(t_o, cfg);
    let t_i = s.t_i.value();
    let ratio = s.interim_ratio();
    let z = cfg.z_alpha();
    let tail = cfg.tail();
    let (at_zero, at_inf) = interim_limits(method, t, t_i, ratio, z);
    let interior = scan_max(|k| {
        let c = ratio + k;
        interim_argument(method, t, t_i, c, ratio / c, z).power(tail)
    });
    at_zero.power(tail).max(at_inf.power(tail)).max(interior)
}

/// Any of the three interim powers. `t_o` is ignored by PPi.
pub fn interim_power(
    method: Method,
    t_o: ZValue,
    s: &InterimState,
    cfg: &DesignConfig,
) -> Result<PowerResult> {
    if !method.is_interim() {
        return Err(Error::InvalidSpec(format!("{method} is a design-time power")));
    }
    check_state(s)?;
    if s.f == 0.0 {
        // Nothing observed yet: CPi and IPPi coincide with CP and PP.
        let design = FixedDesign { t_o, c: s.c };
        return match method {
            Method::Cpi => fixed_power(Method::Cp, &design, cfg),
            Method::Ippi => fixed_power(Method::Pp, &design, cfg),
            _ => Err(Error::domain("f", s.f, "PPi needs 0 < f < 1")),
        }
        .map(|r| PowerResult { method, ..r });
    }
    let power = interim_power_value(method, t_o.value(), s.t_i.value(), s.c, s.f, cfg);
    let supremum = interim_supremum(method, t_o.value(), s, cfg);
    Ok(PowerResult::new(method, power, supremum))
}

/// Conditional power at interim, targeting the (shrunk) original effect.
pub fn cpi(t_o: ZValue, s: &InterimState, cfg: &DesignConfig) -> Result<PowerResult> {
    interim_power(Method::Cpi, t_o, s, cfg)
}

/// Informed predictive power at interim: normal design prior updated by the
/// interim data.
pub fn ippi(t_o: ZValue, s: &InterimState, cfg: &DesignConfig) -> Result<PowerResult> {
    interim_power(Method::Ippi, t_o, s, cfg)
}

/// Predictive power at interim under a flat design prior; the original study
/// plays no role.
pub fn ppi(s: &InterimState, cfg: &DesignConfig) -> Result<PowerResult> {
    // Any finite t_o will do; it carries zero weight.
    interim_power(Method::Ppi, ZValue::new(0.0)?, s, cfg)
}

/// IPPi as the remaining sample size grows without bound.
pub fn ippi_asymptote(t_o: ZValue, t_i: ZValue, interim_ratio: f64, cfg: &DesignConfig) -> Result<f64> {
    if !(interim_ratio.is_finite() && interim_ratio >= 0.0) {
        return Err(Error::domain("n_i/n_o", interim_ratio, "must be non-negative"));
    }
    let t = shrunk(t_o.value(), cfg);
    Ok(normal_cdf(ippi_limit_argument(t, t_i.value(), interim_ratio)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PpiMinimum {
    /// Completed fraction at which the minimum is reached.
    pub f: f64,
    pub power: f64,
}

/// Interior minimum of PPi over the remaining sample size. It exists when
/// the interim result is already significant (`t_i > −z_{α/2}`), is reached at
/// `f = z²_{α/2} / t_i²` and equals `Φ[√(t_i² − z²_{α/2})]`.
pub fn ppi_minimum(t_i: ZValue, cfg: &DesignConfig) -> Option<PpiMinimum> {
    let t = t_i.value();
    let z = cfg.z_alpha();
    if t <= -z {
        return None;
    }
    Some(PpiMinimum {
        f: (z / t).powi(2),
        power: normal_cdf((t * t - z * z).sqrt()),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InterimOrdering {
    /// CPi ≥ IPPi ≥ PPi is guaranteed.
    Ordered,
    /// The sufficient conditions do not hold; the order may still occur.
    NotGuaranteed,
}

/// Checks the sufficient conditions for CPi ≥ IPPi ≥ PPi: a significant
/// original result, a non-significant interim result, `c ≥ 2` and `f > 0.25`.
pub fn interim_ordering_holds(t_o: ZValue, s: &InterimState, cfg: &DesignConfig) -> InterimOrdering {
    let crit = -cfg.z_alpha();
    let t = shrunk(t_o.value(), cfg);
    if t > crit && s.t_i.value() < crit && s.c >= 2.0 && s.f > 0.25 && s.f < 1.0 {
        InterimOrdering::Ordered
    } else {
        InterimOrdering::NotGuaranteed
    }
}

/// Largest completed fraction for which the original result still carries
/// more weight than the interim result.
pub fn weight_dominance_threshold(method: Method, c: f64) -> Result<f64> {
    check_c(c)?;
    match method {
        Method::Cpi => Ok(1.0 - ((4.0 * c + 1.0).sqrt() - 1.0) / (2.0 * c)),
        Method::Ippi => {
            let root = (c * c + 6.0 * c + 1.0).sqrt();
            Ok((c * c - root * c - root + 4.0 * c + 1.0) / (2.0 * c))
        }
        _ => Err(Error::InvalidSpec(format!(
            "weight dominance is defined for CPi and IPPi, not {method}"
        ))),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    /// Remaining sample size relative to the original, `n_j / n_o`.
    pub n_j: f64,
    pub c: f64,
    pub f: f64,
    pub cpi: f64,
    pub ippi: f64,
    pub ppi: f64,
}

/// Interim powers as functions of the sample size still to be collected,
/// holding `t_i` and `n_i / n_o` fixed.
pub fn remaining_n_curve(
    t_o: ZValue,
    t_i: ZValue,
    interim_ratio: f64,
    n_j_grid: &[f64],
    cfg: &DesignConfig,
) -> Result<Vec<CurvePoint>> {
    if !(interim_ratio.is_finite() && interim_ratio > 0.0) {
        return Err(Error::domain("n_i/n_o", interim_ratio, "must be positive"));
    }
    n_j_grid
        .iter()
        .map(|&k| {
            if !(k.is_finite() && k > 0.0) {
                return Err(Error::domain("n_j/n_o", k, "must be positive"));
            }
            let c = interim_ratio + k;
            let f = interim_ratio / c;
            let value = |m| interim_power_value(m, t_o.value(), t_i.value(), c, f, cfg);
            Ok(CurvePoint {
                n_j: k,
                c,
                f,
                cpi: value(Method::Cpi),
                ippi: value(Method::Ippi),
                ppi: value(Method::Ppi),
            })
        })
        .collect()
}
