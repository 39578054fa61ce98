//! Design-time powers of a replication study.
//!
//! Every formula is written in unitless form: the original test statistic
//! `t_o` and the relative sample size `c = n_r / n_o`. Each power is
//! `Φ[data + z]`, where `data` collects the terms carrying evidence and `z` the
//! critical-value term; the opposite-direction rejection probability is then
//! `Φ[−data + z]`.

use serde::{Deserialize, Serialize};

use crate::config::{DesignConfig, Method, Tail};
use crate::error::{Error, Result};
use crate::stats::{normal_cdf, Probability, ZValue};

/// An original study and a planned replication size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FixedDesign {
    /// Original test statistic.
    pub t_o: ZValue,
    /// Relative sample size `n_r / n_o`.
    pub c: f64,
}

impl FixedDesign {
    pub fn new(t_o: f64, c: f64) -> Result<Self> {
        check_c(c)?;
        Ok(FixedDesign {
            t_o: ZValue::new(t_o)?,
            c,
        })
    }
}

/// A power together with the least upper bound it can reach as the
/// still-to-be-collected sample size varies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerResult {
    pub method: Method,
    pub power: Probability,
    pub supremum: Probability,
    /// Whether 100% power is approachable at all.
    pub feasible_100: bool,
}

impl PowerResult {
    pub(crate) fn new(method: Method, power: f64, supremum: f64) -> Self {
        let supremum = supremum.max(power);
        PowerResult {
            method,
            power: Probability::saturating(power),
            supremum: Probability::saturating(supremum),
            feasible_100: supremum >= 1.0,
        }
    }
}

pub(crate) fn check_c(c: f64) -> Result<()> {
    if c.is_finite() && c > 0.0 {
        Ok(())
    } else {
        Err(Error::domain("c", c, "relative sample size must be positive and finite"))
    }
}

/// The argument of Φ split into evidence and critical-value parts.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Argument {
    pub data: f64,
    pub z: f64,
}

impl Argument {
    pub fn power(self, tail: Tail) -> f64 {
        let upper = normal_cdf(self.data + self.z);
        match tail {
            Tail::Upper => upper,
            Tail::TwoSided => upper + normal_cdf(-self.data + self.z),
        }
    }
}

/// Limit of `k·slope + rest` as `k → ∞`.
pub(crate) fn grow(slope: f64, rest: f64) -> f64 {
    if slope > 0.0 {
        f64::INFINITY
    } else if slope < 0.0 {
        f64::NEG_INFINITY
    } else {
        rest
    }
}

/// Limits of the upper and lower Φ arguments at one end of the sample-size
/// range.
#[derive(Debug, Clone, Copy)]
pub(crate) struct EndLimit {
    pub upper: f64,
    pub lower: f64,
}

impl EndLimit {
    pub fn power(self, tail: Tail) -> f64 {
        let upper = normal_cdf(self.upper);
        match tail {
            Tail::Upper => upper,
            Tail::TwoSided => upper + normal_cdf(self.lower),
        }
    }
}

/// Maximum of `f` over `x ∈ [1e-8, 1e8]` by a log-spaced scan refined with a
/// golden-section search around the best grid point.
pub(crate) fn scan_max<F: Fn(f64) -> f64>(f: F) -> f64 {
    const LO: f64 = -8.0;
    const STEP: f64 = 0.05;
    const N: usize = 321;
    let at = |e: f64| f(10f64.powf(e));
    let mut best_i = 0;
    let mut best = f64::NEG_INFINITY;
    for i in 0..N {
        let v = at(LO + STEP * i as f64);
        if v > best {
            best = v;
            best_i = i;
        }
    }
    let mut a = LO + STEP * best_i.saturating_sub(1) as f64;
    let mut b = LO + STEP * (best_i + 1).min(N - 1) as f64;
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = b - g * (b - a);
    let mut x2 = a + g * (b - a);
    let (mut f1, mut f2) = (at(x1), at(x2));
    for _ in 0..60 {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = at(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = at(x1);
        }
    }
    best.max(f1).max(f2)
}

/// Original test statistic after shrinkage of the design-prior mean.
pub(crate) fn shrunk(t_o: f64, cfg: &DesignConfig) -> f64 {
    cfg.deflation() * t_o
}

pub(crate) fn fixed_argument(method: Method, t: f64, c: f64, cfg: &DesignConfig) -> Argument {
    match method {
        Method::Cp => Argument {
            data: c.sqrt() * t,
            z: cfg.z_alpha(),
        },
        Method::Pp => Argument {
            data: (c / (c + 1.0)).sqrt() * t,
            z: (1.0 / (c + 1.0)).sqrt() * cfg.z_alpha(),
        },
        Method::Fbp => Argument {
            data: ((c + 1.0) / c).sqrt() * t,
            z: (1.0 / c).sqrt() * cfg.z_alpha_tilde(),
        },
        Method::Cbp => Argument {
            data: (c + 1.0) / c.sqrt() * t,
            z: ((c + 1.0) / c).sqrt() * cfg.z_alpha_tilde(),
        },
        _ => unreachable!("interim methods are handled in `interim`"),
    }
}

/// Limits as `c → 0⁺` and `c → ∞`.
fn fixed_limits(method: Method, t: f64, cfg: &DesignConfig) -> (EndLimit, EndLimit) {
    match method {
        Method::Cp => {
            let z = cfg.z_alpha();
            (
                EndLimit { upper: z, lower: z },
                EndLimit {
                    upper: grow(t, z),
                    lower: grow(-t, z),
                },
            )
        }
        Method::Pp => {
            let z = cfg.z_alpha();
            (
                EndLimit { upper: z, lower: z },
                EndLimit { upper: t, lower: -t },
            )
        }
        Method::Fbp => {
            let z = cfg.z_alpha_tilde();
            (
                EndLimit {
                    upper: grow(t + z, 0.0),
                    lower: grow(-t + z, 0.0),
                },
                EndLimit { upper: t, lower: -t },
            )
        }
        Method::Cbp => {
            let z = cfg.z_alpha_tilde();
            (
                EndLimit {
                    upper: grow(t + z, 0.0),
                    lower: grow(-t + z, 0.0),
                },
                EndLimit {
                    upper: grow(t, z),
                    lower: grow(-t, z),
                },
            )
        }
        _ => unreachable!("interim methods are handled in `interim`"),
    }
}

/// Bare power value, without the supremum search. `t_o` is unshrunk.
pub(crate) fn fixed_power_value(method: Method, t_o: f64, c: f64, cfg: &DesignConfig) -> f64 {
    fixed_argument(method, shrunk(t_o, cfg), c, cfg).power(cfg.tail())
}

fn fixed_supremum(method: Method, t_o: f64, cfg: &DesignConfig) -> f64 {
    let t = shrunk(t_o, cfg);
    let (at_zero, at_inf) = fixed_limits(method, t, cfg);
    let tail = cfg.tail();
    let interior = scan_max(|c| fixed_argument(method, t, c, cfg).power(tail));
    at_zero.power(tail).max(at_inf.power(tail)).max(interior)
}

/// Any of the four design-time powers.
pub fn fixed_power(method: Method, design: &FixedDesign, cfg: &DesignConfig) -> Result<PowerResult> {
    if method.is_interim() {
        return Err(Error::InvalidSpec(format!(
            "{method} needs an interim state"
        )));
    }
    check_c(design.c)?;
    let t_o = design.t_o.value();
    let power = fixed_power_value(method, t_o, design.c, cfg);
    Ok(PowerResult::new(method, power, fixed_supremum(method, t_o, cfg)))
}

/// Conditional power, `Φ[√c·t_o + z_{α/2}]`.
pub fn cp(design: &FixedDesign, cfg: &DesignConfig) -> Result<PowerResult> {
    fixed_power(Method::Cp, design, cfg)
}

/// Predictive power, `Φ[√(c/(c+1))·t_o + √(1/(c+1))·z_{α/2}]`.
pub fn pp(design: &FixedDesign, cfg: &DesignConfig) -> Result<PowerResult> {
    fixed_power(Method::Pp, design, cfg)
}

/// Fully Bayesian power, `Φ[√((c+1)/c)·t_o + √(1/c)·z_{α̃/2}]`.
pub fn fbp(design: &FixedDesign, cfg: &DesignConfig) -> Result<PowerResult> {
    fixed_power(Method::Fbp, design, cfg)
}

/// Conditional Bayesian power, `Φ[((c+1)/√c)·t_o + √((c+1)/c)·z_{α̃/2}]`.
pub fn cbp(design: &FixedDesign, cfg: &DesignConfig) -> Result<PowerResult> {
    fixed_power(Method::Cbp, design, cfg)
}

fn nonzero(t_o: ZValue, cfg: &DesignConfig) -> Result<f64> {
    let t = shrunk(t_o.value(), cfg);
    if t == 0.0 {
        Err(Error::Degenerate("the original test statistic is zero"))
    } else {
        Ok(t)
    }
}

/// Relative sample size `z²_{α/2} / t_o²` at which CP and PP both equal 50%.
pub fn cp_pp_intersection(t_o: ZValue, cfg: &DesignConfig) -> Result<f64> {
    let t = nonzero(t_o, cfg)?;
    Ok((cfg.z_alpha() / t).powi(2))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Crossing {
    pub c: f64,
    /// False when the crossing is not at a positive `c`.
    pub feasible: bool,
}

/// Relative sample size `z²_{α̃/2} / t_o² − 1` at which FBP and CBP cross at
/// 50%; infeasible when `p_o ≤ α̃`.
pub fn fbp_cbp_intersection(t_o: ZValue, cfg: &DesignConfig) -> Result<Crossing> {
    let t = nonzero(t_o, cfg)?;
    let c = (cfg.z_alpha_tilde() / t).powi(2) - 1.0;
    Ok(Crossing { c, feasible: c > 0.0 })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Minimum {
    pub c: f64,
    pub power: f64,
}

/// Interior minimum of the FBP curve, which exists only when the original
/// study already passes the pooled level (`t_o > −z_{α̃/2}`): FBP then falls
/// from 1 to `Φ[√(t_o² − z²_{α̃/2})]` at `c = t_o²/z²_{α̃/2} − 1` before
/// rising to its asymptote.
pub fn fbp_minimum(t_o: ZValue, cfg: &DesignConfig) -> Option<Minimum> {
    let t = shrunk(t_o.value(), cfg);
    let z = cfg.z_alpha_tilde();
    if t <= -z {
        return None;
    }
    Some(Minimum {
        c: (t / z).powi(2) - 1.0,
        power: normal_cdf((t * t - z * z).sqrt()),
    })
}
