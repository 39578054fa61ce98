//! Sample-size inversion and futility rules.
//!
//! The inverse is found by scanning a log-spaced grid of relative sample
//! sizes for the first crossing of the target and bisecting inside it. One
//! mechanism covers every method, including the non-monotone curves (FBP and
//! CBP when the original result already passes the pooled level, interim
//! curves after a significant interim result).

use serde::{Deserialize, Serialize};

use crate::config::{DesignConfig, Method};
use crate::error::{Error, Result};
use crate::fixed::{fixed_power, fixed_power_value, FixedDesign};
use crate::interim::{interim_power, interim_power_value, InterimState};
use crate::stats::ZValue;

/// Relative sample sizes above this are treated as unreachable.
pub const C_CAP: f64 = 1e9;

const C_FLOOR: f64 = 1e-12;
const GRID_STEPS_PER_DECADE: f64 = 50.0;

/// Interim quantities that stay fixed while the remaining sample size varies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InterimInputs {
    pub t_i: ZValue,
    /// `n_i / n_o`.
    pub interim_ratio: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolveRequest {
    pub method: Method,
    pub target_power: f64,
    pub t_o: ZValue,
    pub interim: Option<InterimInputs>,
    pub cfg: DesignConfig,
    /// Smallest admissible `c`; defaults to 0 (or `n_i / n_o` at interim).
    pub c_lower: f64,
}

impl SolveRequest {
    pub fn fixed(method: Method, target_power: f64, t_o: ZValue, cfg: DesignConfig) -> Self {
        SolveRequest {
            method,
            target_power,
            t_o,
            interim: None,
            cfg,
            c_lower: 0.0,
        }
    }

    pub fn interim(
        method: Method,
        target_power: f64,
        t_o: ZValue,
        interim: InterimInputs,
        cfg: DesignConfig,
    ) -> Self {
        SolveRequest {
            method,
            target_power,
            t_o,
            interim: Some(interim),
            cfg,
            c_lower: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    /// Smallest admissible relative sample size reaching the target.
    pub c: f64,
    /// Completed fraction at the solution, for interim methods.
    pub f: Option<f64>,
    pub power: f64,
    /// The target is already exceeded at the lower end of the range; the
    /// returned `c` is where the power first falls back to the target.
    pub degenerate: bool,
}

struct Curve<'a> {
    req: &'a SolveRequest,
    base: f64,
}

impl Curve<'_> {
    fn c_at(&self, k: f64) -> f64 {
        self.base + k
    }

    fn power(&self, k: f64) -> f64 {
        let r = self.req;
        let c = self.c_at(k);
        match r.interim {
            None => fixed_power_value(r.method, r.t_o.value(), c, &r.cfg),
            Some(i) => interim_power_value(
                r.method,
                r.t_o.value(),
                i.t_i.value(),
                c,
                i.interim_ratio / c,
                &r.cfg,
            ),
        }
    }

    fn supremum(&self) -> Result<f64> {
        let r = self.req;
        let result = match r.interim {
            None => fixed_power(r.method, &FixedDesign { t_o: r.t_o, c: 1.0 }, &r.cfg)?,
            Some(i) => {
                let c = i.interim_ratio + 1.0;
                let state = InterimState::new(i.t_i.value(), i.interim_ratio / c, c)?;
                interim_power(r.method, r.t_o, &state, &r.cfg)?
            }
        };
        Ok(result.supremum.value())
    }
}

fn validate(req: &SolveRequest) -> Result<f64> {
    if !(req.target_power > 0.0 && req.target_power < 1.0) {
        return Err(Error::domain("target", req.target_power, "must lie in (0, 1)"));
    }
    if !(req.c_lower.is_finite() && req.c_lower >= 0.0) {
        return Err(Error::domain("c_lower", req.c_lower, "must be non-negative"));
    }
    match (req.method.is_interim(), req.interim) {
        (true, None) => Err(Error::InvalidSpec(format!(
            "{} needs interim inputs",
            req.method
        ))),
        (false, Some(_)) => Err(Error::InvalidSpec(format!(
            "{} is a design-time power",
            req.method
        ))),
        (true, Some(i)) => {
            if i.interim_ratio.is_finite() && i.interim_ratio > 0.0 {
                Ok(i.interim_ratio)
            } else {
                Err(Error::domain("n_i/n_o", i.interim_ratio, "must be positive"))
            }
        }
        (false, None) => Ok(0.0),
    }
}

/// Smallest relative sample size `c ≥ c_lower` at which the power equals the
/// target.
pub fn solve_c(req: &SolveRequest) -> Result<Solution> {
    let base = validate(req)?;
    let curve = Curve { req, base };
    let target = req.target_power;

    let supremum = curve.supremum()?;
    if target > supremum {
        return Err(Error::Infeasible { target, supremum });
    }

    let k_lo = (req.c_lower - base).max(C_FLOOR);
    let k_hi = C_CAP - base;
    if k_lo >= k_hi {
        return Err(Error::domain("c_lower", req.c_lower, "exceeds the sample-size cap"));
    }
    let gap = |k: f64| curve.power(k) - target;

    let ratio = 10f64.powf(1.0 / GRID_STEPS_PER_DECADE);
    let start = gap(k_lo);
    if start == 0.0 {
        return Ok(finish(&curve, k_lo, false));
    }
    let degenerate = start > 0.0;
    let mut prev = k_lo;
    let mut infimum = curve.power(k_lo);
    loop {
        let next = (prev * ratio).min(k_hi);
        let g = gap(next);
        infimum = infimum.min(g + target);
        if (g > 0.0) != degenerate || g == 0.0 {
            let k = bisect(&gap, prev, next, degenerate);
            return Ok(finish(&curve, k, degenerate));
        }
        if next >= k_hi {
            break;
        }
        prev = next;
    }
    if degenerate {
        Err(Error::BelowMinimum { target, infimum })
    } else {
        Err(Error::Infeasible { target, supremum })
    }
}

fn bisect(gap: &dyn Fn(f64) -> f64, mut lo: f64, mut hi: f64, descending: bool) -> f64 {
    // Invariant: gap(lo) has the starting sign, gap(hi) has crossed.
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi || hi - lo <= 1e-10 * 1e-4 * hi.max(1e-300) {
            break;
        }
        let g = gap(mid);
        if g == 0.0 {
            return mid;
        }
        if (g > 0.0) == descending {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if gap(lo).abs() <= gap(hi).abs() {
        lo
    } else {
        hi
    }
}

fn finish(curve: &Curve<'_>, k: f64, degenerate: bool) -> Solution {
    let c = curve.c_at(k);
    Solution {
        c,
        f: curve.req.interim.map(|i| i.interim_ratio / c),
        power: curve.power(k),
        degenerate,
    }
}

/// A futility boundary on an interim power.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FutilityRule {
    pub method: Method,
    pub boundary: f64,
}

impl FutilityRule {
    pub fn new(method: Method, boundary: f64) -> Result<Self> {
        if !matches!(method, Method::Ippi | Method::Ppi) {
            return Err(Error::InvalidSpec(format!(
                "futility rules use IPPi or PPi, not {method}"
            )));
        }
        if !(boundary > 0.0 && boundary < 1.0) {
            return Err(Error::domain("boundary", boundary, "must lie in (0, 1)"));
        }
        Ok(FutilityRule { method, boundary })
    }
}

impl Default for FutilityRule {
    fn default() -> Self {
        FutilityRule {
            method: Method::Ippi,
            boundary: 0.30,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Decision {
    Stop,
    Continue,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FutilityDecision {
    pub method: Method,
    pub power: f64,
    pub boundary: f64,
    pub decision: Decision,
}

/// Stops when the interim power is strictly below the boundary.
pub fn futility_decision(
    rule: &FutilityRule,
    t_o: ZValue,
    state: &InterimState,
    cfg: &DesignConfig,
) -> Result<FutilityDecision> {
    let power = interim_power(rule.method, t_o, state, cfg)?.power.value();
    let decision = if power < rule.boundary {
        Decision::Stop
    } else {
        Decision::Continue
    };
    Ok(FutilityDecision {
        method: rule.method,
        power,
        boundary: rule.boundary,
        decision,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::{normal_quantile, p_to_z, Direction};
    use approx::assert_abs_diff_eq;

    fn cfg() -> DesignConfig {
        DesignConfig::default()
    }

    fn t(p: f64) -> ZValue {
        p_to_z(p, Direction::Positive).unwrap()
    }

    // Closed-form inverse of CP: c = ((Φ⁻¹(power) − z_{α/2}) / t_o)².
    fn cp_inverse(t_o: f64, power: f64, alpha: f64) -> f64 {
        let z = normal_quantile(alpha / 2.0).unwrap();
        ((normal_quantile(power).unwrap() - z) / t_o).powi(2)
    }

    #[test]
    fn cp_half_at_unit_c() {
        let sol = solve_c(&SolveRequest::fixed(Method::Cp, 0.5, t(0.05), cfg())).unwrap();
        assert_abs_diff_eq!(sol.c, 1.0, epsilon = 1e-9);
        assert!(!sol.degenerate);
    }

    #[test]
    fn cp_matches_closed_form() {
        let t_o = 2.807033768343804;
        let sol = solve_c(&SolveRequest::fixed(Method::Cp, 0.9, ZValue::new(t_o).unwrap(), cfg())).unwrap();
        assert_abs_diff_eq!(sol.power, 0.9, epsilon = 1e-8);
        assert_abs_diff_eq!(sol.c, cp_inverse(t_o, 0.9, 0.05), epsilon = 1e-8);
        assert_abs_diff_eq!(sol.c, 1.333524331621189, epsilon = 1e-8);
    }

    #[test]
    fn pp_above_asymptote_is_infeasible() {
        let err = solve_c(&SolveRequest::fixed(Method::Pp, 0.975 + 1e-4, t(0.05), cfg())).unwrap_err();
        match err {
            Error::Infeasible { supremum, .. } => assert_abs_diff_eq!(supremum, 0.975, epsilon = 1e-12),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn fbp_degenerate_region_is_flagged() {
        let req = SolveRequest::fixed(Method::Fbp, 0.9995, ZValue::new(4.465).unwrap(), cfg());
        let sol = solve_c(&req).unwrap();
        assert!(sol.degenerate);
        assert_abs_diff_eq!(sol.power, 0.9995, epsilon = 1e-8);
        // Below the interior minimum: the curve never drops that far.
        let req = SolveRequest::fixed(Method::Fbp, 0.99, ZValue::new(4.465).unwrap(), cfg());
        assert!(matches!(solve_c(&req), Err(Error::BelowMinimum { .. })));
        // Starting past the minimum finds the rising branch.
        let mut req = SolveRequest::fixed(Method::Fbp, 0.9995, ZValue::new(4.465).unwrap(), cfg());
        req.c_lower = 1.0;
        let sol = solve_c(&req).unwrap();
        assert!(!sol.degenerate && sol.c > 1.0);
        assert_abs_diff_eq!(sol.power, 0.9995, epsilon = 1e-8);
    }

    #[test]
    fn interim_solve_round_trip() {
        let inputs = InterimInputs {
            t_i: ZValue::new(0.8).unwrap(),
            interim_ratio: 2.0,
        };
        for m in [Method::Cpi, Method::Ippi, Method::Ppi] {
            let sol = solve_c(&SolveRequest::interim(m, 0.6, t(0.01), inputs, cfg())).unwrap();
            assert!(sol.c > 2.0);
            assert_abs_diff_eq!(sol.power, 0.6, epsilon = 1e-8);
            assert_abs_diff_eq!(sol.f.unwrap() * sol.c, 2.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn request_validation() {
        assert!(solve_c(&SolveRequest::fixed(Method::Cp, 1.0, t(0.05), cfg())).is_err());
        assert!(solve_c(&SolveRequest::fixed(Method::Cpi, 0.5, t(0.05), cfg())).is_err());
        let inputs = InterimInputs {
            t_i: ZValue::new(0.8).unwrap(),
            interim_ratio: 0.0,
        };
        assert!(solve_c(&SolveRequest::interim(Method::Cpi, 0.5, t(0.05), inputs, cfg())).is_err());
    }

    #[test]
    fn futility_is_strict() {
        let s = InterimState::new(0.5, 0.4, 5.0).unwrap();
        let rule = FutilityRule::new(Method::Ppi, 0.5).unwrap();
        let d = futility_decision(&rule, t(0.01), &s, &cfg()).unwrap();
        let exact = FutilityRule::new(Method::Ppi, d.power).unwrap();
        assert_eq!(
            futility_decision(&exact, t(0.01), &s, &cfg()).unwrap().decision,
            Decision::Continue
        );
        assert!(FutilityRule::new(Method::Cpi, 0.3).is_err());
        assert!(FutilityRule::new(Method::Ppi, 0.0).is_err());
    }
}
