//! Monte-Carlo estimates of every power, built directly from the generative
//! model rather than from the closed forms.
//!
//! Data are simulated on the mean scale with unit standard deviation and an
//! internal original sample size `n_o`; the closed forms depend only on `t_o`
//! and `c`, so the estimates must not depend on `n_o` either.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{DesignConfig, Method, Tail};
use crate::error::{Error, Result};
use crate::fixed::{check_c, fixed_power, FixedDesign};
use crate::interim::{interim_power, InterimState};
use crate::stats::{normal_quantile, ZValue};

pub const DEFAULT_SIMS: u64 = 100_000;
pub const MIN_SIMS: u64 = 1_000;
pub const DEFAULT_N_O: f64 = 1_000.0;
const BATCH: u64 = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimSpec {
    pub method: Method,
    pub t_o: ZValue,
    /// Interim statistic; required by the interim methods.
    pub t_i: Option<ZValue>,
    pub c: f64,
    /// Completed fraction of the replication; 0 for design-time methods.
    pub f: f64,
    pub cfg: DesignConfig,
    pub n_sims: u64,
    pub seed: u64,
    /// Original sample size used internally; the estimand does not depend on it.
    pub n_o: f64,
}

impl SimSpec {
    pub fn fixed(method: Method, t_o: ZValue, c: f64, cfg: DesignConfig) -> Self {
        SimSpec {
            method,
            t_o,
            t_i: None,
            c,
            f: 0.0,
            cfg,
            n_sims: DEFAULT_SIMS,
            seed: 0,
            n_o: DEFAULT_N_O,
        }
    }

    pub fn interim(method: Method, t_o: ZValue, t_i: ZValue, state_c: f64, f: f64, cfg: DesignConfig) -> Self {
        SimSpec {
            t_i: Some(t_i),
            f,
            ..SimSpec::fixed(method, t_o, state_c, cfg)
        }
    }

    pub fn with_sims(mut self, n_sims: u64) -> Self {
        self.n_sims = n_sims;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_n_o(mut self, n_o: f64) -> Self {
        self.n_o = n_o;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.n_sims < MIN_SIMS {
            return Err(Error::InvalidSpec(format!(
                "at least {MIN_SIMS} simulations are needed, got {}",
                self.n_sims
            )));
        }
        if !(self.n_o.is_finite() && self.n_o > 0.0) {
            return Err(Error::domain("n_o", self.n_o, "must be positive"));
        }
        check_c(self.c)?;
        if self.method.is_interim() {
            if self.t_i.is_none() {
                return Err(Error::InvalidSpec(format!("{} needs an interim statistic", self.method)));
            }
            let f_ok = if self.method == Method::Ppi {
                self.f > 0.0 && self.f < 1.0
            } else {
                (0.0..1.0).contains(&self.f)
            };
            if !f_ok {
                return Err(Error::domain("f", self.f, "completed fraction out of range"));
            }
        } else if self.t_i.is_some() || self.f != 0.0 {
            return Err(Error::InvalidSpec(format!(
                "{} is a design-time power and takes no interim data",
                self.method
            )));
        }
        Ok(())
    }

    /// Closed-form power for the same inputs.
    pub fn analytic(&self) -> Result<f64> {
        let r = match self.t_i {
            Some(t_i) if self.method.is_interim() => {
                let state = InterimState::new(t_i.value(), self.f, self.c)?;
                interim_power(self.method, self.t_o, &state, &self.cfg)?
            }
            _ => fixed_power(self.method, &FixedDesign { t_o: self.t_o, c: self.c }, &self.cfg)?,
        };
        Ok(r.power.value())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimEstimate {
    pub method: Method,
    pub estimate: f64,
    pub std_err: f64,
    pub n_sims: u64,
    pub seed: u64,
}

/// Per-draw constants on the mean scale.
struct Model {
    method: Method,
    tail: Tail,
    /// Critical value on the z scale (positive).
    crit: f64,
    n_o: f64,
    n_i: f64,
    n_j: f64,
    /// Shrunk original estimate.
    theta_o: f64,
    /// `n_i · θ̂_i`, which stays finite as `n_i → 0`.
    sum_i: f64,
}

impl Model {
    fn new(spec: &SimSpec) -> Self {
        let n_o = spec.n_o;
        let n_r = spec.c * n_o;
        let n_i = spec.f * n_r;
        let t_i = spec.t_i.map_or(0.0, ZValue::value);
        let crit = if spec.method.is_pooled() {
            -spec.cfg.z_alpha_tilde()
        } else {
            -spec.cfg.z_alpha()
        };
        Model {
            method: spec.method,
            tail: spec.cfg.tail(),
            crit,
            n_o,
            n_i,
            n_j: n_r - n_i,
            theta_o: spec.cfg.deflation() * spec.t_o.value() / n_o.sqrt(),
            sum_i: t_i * n_i.sqrt(),
        }
    }

    fn rejects(&self, stat: f64) -> bool {
        match self.tail {
            Tail::Upper => stat > self.crit,
            Tail::TwoSided => stat.abs() > self.crit,
        }
    }

    /// One replication; `z1`, `z2` are independent standard normals.
    fn draw(&self, z1: f64, z2: f64) -> bool {
        let (n_o, n_i, n_j) = (self.n_o, self.n_i, self.n_j);
        let theta = match self.method {
            Method::Cp | Method::Cbp | Method::Cpi => self.theta_o,
            Method::Pp | Method::Fbp => self.theta_o + z1 / n_o.sqrt(),
            Method::Ippi => {
                let precision = n_o + n_i;
                (n_o * self.theta_o + self.sum_i) / precision + z1 / precision.sqrt()
            }
            Method::Ppi => (self.sum_i + z1 * n_i.sqrt()) / n_i,
        };
        // Mean of the not-yet-observed part of the replication.
        let mean_j = theta + z2 / n_j.sqrt();
        let n_r = n_i + n_j;
        let mean_r = (self.sum_i + n_j * mean_j) / n_r;
        let stat = if self.method.is_pooled() {
            let n = n_o + n_r;
            (n_o * self.theta_o + n_r * mean_r) / n * n.sqrt()
        } else {
            mean_r * n_r.sqrt()
        };
        self.rejects(stat)
    }
}

fn standard_normal(rng: &mut ChaCha8Rng) -> f64 {
    // 53 random bits, centred in their cell so the value is never 0 or 1.
    let u = ((rng.next_u64() >> 11) as f64 + 0.5) / (1u64 << 53) as f64;
    normal_quantile(u).expect("u lies strictly inside (0, 1)")
}

fn run_batch(model: &Model, seed: u64, batch: u64, size: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(batch);
    (0..size)
        .filter(|_| {
            let z1 = standard_normal(&mut rng);
            let z2 = standard_normal(&mut rng);
            model.draw(z1, z2)
        })
        .count() as u64
}

/// Estimates the power by simulation. Results depend only on the spec, not
/// on the number of threads.
pub fn simulate_power(spec: &SimSpec) -> Result<SimEstimate> {
    spec.validate()?;
    let model = Model::new(spec);
    let batches = spec.n_sims.div_ceil(BATCH);
    let hits: u64 = (0..batches)
        .into_par_iter()
        .map(|b| {
            let size = BATCH.min(spec.n_sims - b * BATCH);
            run_batch(&model, spec.seed, b, size)
        })
        .sum();
    let n = spec.n_sims as f64;
    let p = hits as f64 / n;
    Ok(SimEstimate {
        method: spec.method,
        estimate: p,
        std_err: (p * (1.0 - p) / n).sqrt(),
        n_sims: spec.n_sims,
        seed: spec.seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::{p_to_z, Direction};

    fn z(x: f64) -> ZValue {
        ZValue::new(x).unwrap()
    }

    fn within(spec: &SimSpec, k: f64) {
        let est = simulate_power(spec).unwrap();
        let exact = spec.analytic().unwrap();
        let se = est.std_err.max(1e-4);
        assert!(
            (est.estimate - exact).abs() <= k * se,
            "{}: mc {} vs exact {} (se {})",
            spec.method,
            est.estimate,
            exact,
            se
        );
    }

    #[test]
    fn design_methods_agree_with_closed_forms() {
        let cfg = DesignConfig::default();
        let t_o = p_to_z(0.01, Direction::Positive).unwrap();
        for (i, m) in [Method::Cp, Method::Pp, Method::Fbp, Method::Cbp].into_iter().enumerate() {
            within(&SimSpec::fixed(m, t_o, 1.3, cfg).with_seed(i as u64), 4.0);
        }
    }

    #[test]
    fn interim_methods_agree_with_closed_forms() {
        let cfg = DesignConfig::new(0.05, 0.25).unwrap();
        for (i, m) in [Method::Cpi, Method::Ippi, Method::Ppi].into_iter().enumerate() {
            within(&SimSpec::interim(m, z(2.4), z(1.1), 3.0, 0.4, cfg).with_seed(10 + i as u64), 4.0);
        }
    }

    #[test]
    fn two_sided_counts_both_tails() {
        let cfg = DesignConfig::default().with_tail(Tail::TwoSided);
        within(&SimSpec::fixed(Method::Pp, z(0.3), 0.5, cfg).with_seed(3), 4.0);
        within(&SimSpec::interim(Method::Ppi, z(0.3), z(-0.4), 2.0, 0.5, cfg).with_seed(4), 4.0);
    }

    #[test]
    fn seeded_runs_are_reproducible() {
        let spec = SimSpec::fixed(Method::Pp, z(2.5), 1.0, DesignConfig::default()).with_sims(25_000).with_seed(42);
        let a = simulate_power(&spec).unwrap();
        let b = simulate_power(&spec).unwrap();
        assert_eq!(a, b);
        let c = simulate_power(&spec.with_seed(43)).unwrap();
        assert_ne!(a.estimate, c.estimate);
    }

    #[test]
    fn internal_sample_size_does_not_matter() {
        let cfg = DesignConfig::new(0.05, 0.1).unwrap();
        for m in Method::ALL {
            let base = if m.is_interim() {
                SimSpec::interim(m, z(2.2), z(0.9), 2.0, 0.3, cfg)
            } else {
                SimSpec::fixed(m, z(2.2), 2.0, cfg)
            };
            let small = simulate_power(&base.with_n_o(100.0).with_seed(5)).unwrap();
            let large = simulate_power(&base.with_n_o(1e4).with_seed(5)).unwrap();
            let se = (small.std_err.powi(2) + large.std_err.powi(2)).sqrt().max(1e-4);
            assert!((small.estimate - large.estimate).abs() <= 4.0 * se, "{m}");
        }
    }

    #[test]
    fn rejects_bad_specs() {
        let cfg = DesignConfig::default();
        assert!(simulate_power(&SimSpec::fixed(Method::Cp, z(2.0), 1.0, cfg).with_sims(10)).is_err());
        assert!(simulate_power(&SimSpec::fixed(Method::Cpi, z(2.0), 1.0, cfg)).is_err());
        assert!(simulate_power(&SimSpec::interim(Method::Ppi, z(2.0), z(1.0), 1.0, 0.0, cfg)).is_err());
        assert!(simulate_power(&SimSpec::fixed(Method::Cp, z(2.0), 0.0, cfg)).is_err());
    }
}
