use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::normal_quantile;

/// Which rejection region a power counts.
///
/// `Upper` is the conventional choice: the probability that the replication is
/// significant in the direction of the original effect. `TwoSided` adds the
/// (usually negligible) probability of significance in the opposite direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Tail {
    #[default]
    Upper,
    TwoSided,
}

/// Significance level, pooled level and shrinkage shared by every power.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DesignConfig {
    alpha: f64,
    alpha_tilde: f64,
    shrinkage: f64,
    tail: Tail,
}

impl DesignConfig {
    /// `alpha` is the two-sided level; the pooled level is `alpha² / 2`.
    pub fn new(alpha: f64, shrinkage: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::domain("alpha", alpha, "must lie in (0, 1)"));
        }
        if !(0.0..1.0).contains(&shrinkage) {
            return Err(Error::domain("shrinkage", shrinkage, "must lie in [0, 1)"));
        }
        Ok(DesignConfig {
            alpha,
            alpha_tilde: alpha * alpha / 2.0,
            shrinkage,
            tail: Tail::Upper,
        })
    }

    pub fn with_tail(mut self, tail: Tail) -> Self {
        self.tail = tail;
        self
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn alpha_tilde(&self) -> f64 {
        self.alpha_tilde
    }

    pub fn shrinkage(&self) -> f64 {
        self.shrinkage
    }

    pub fn tail(&self) -> Tail {
        self.tail
    }

    /// Multiplier `d = 1 − s` applied to the original effect.
    pub fn deflation(&self) -> f64 {
        1.0 - self.shrinkage
    }

    /// `z_{α/2}` (negative).
    pub fn z_alpha(&self) -> f64 {
        normal_quantile(self.alpha / 2.0).expect("alpha validated in (0, 1)")
    }

    /// `z_{α̃/2}` (negative).
    pub fn z_alpha_tilde(&self) -> f64 {
        normal_quantile(self.alpha_tilde / 2.0).expect("alpha validated in (0, 1)")
    }
}

impl Default for DesignConfig {
    fn default() -> Self {
        DesignConfig::new(0.05, 0.0).expect("valid defaults")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DesignPrior {
    Point,
    Normal,
    Flat,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AnalysisPrior {
    Flat,
    Normal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Stage {
    Design,
    Interim,
}

/// The seven power quantities.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Method {
    /// Conditional power: point design prior, flat analysis prior.
    #[serde(rename = "CP")]
    Cp,
    /// Predictive power: normal design prior, flat analysis prior.
    #[serde(rename = "PP")]
    Pp,
    /// Fully Bayesian power: normal design and analysis priors.
    #[serde(rename = "FBP")]
    Fbp,
    /// Conditional Bayesian power: point design prior, normal analysis prior.
    #[serde(rename = "CBP")]
    Cbp,
    /// Conditional power at interim.
    #[serde(rename = "CPi")]
    Cpi,
    /// Informed predictive power at interim (normal design prior).
    #[serde(rename = "IPPi")]
    Ippi,
    /// Predictive power at interim (flat design prior).
    #[serde(rename = "PPi")]
    Ppi,
}

impl Method {
    pub const ALL: [Method; 7] = [
        Method::Cp,
        Method::Pp,
        Method::Fbp,
        Method::Cbp,
        Method::Cpi,
        Method::Ippi,
        Method::Ppi,
    ];

    pub fn is_interim(self) -> bool {
        matches!(self, Method::Cpi | Method::Ippi | Method::Ppi)
    }

    /// Methods whose analysis pools the original study and tests at `α̃`.
    pub fn is_pooled(self) -> bool {
        matches!(self, Method::Fbp | Method::Cbp)
    }

    /// Maps a design/analysis prior combination onto a method. A flat design
    /// prior exists only at interim; interim analyses use a flat analysis prior.
    pub fn from_priors(design: DesignPrior, analysis: AnalysisPrior, stage: Stage) -> Result<Self> {
        use AnalysisPrior as A;
        use DesignPrior as D;
        match (stage, design, analysis) {
            (Stage::Design, D::Point, A::Flat) => Ok(Method::Cp),
            (Stage::Design, D::Normal, A::Flat) => Ok(Method::Pp),
            (Stage::Design, D::Normal, A::Normal) => Ok(Method::Fbp),
            (Stage::Design, D::Point, A::Normal) => Ok(Method::Cbp),
            (Stage::Design, D::Flat, _) => Err(Error::InvalidSpec(
                "a flat design prior is only defined at an interim analysis".into(),
            )),
            (Stage::Interim, _, A::Normal) => Err(Error::InvalidSpec(
                "pooled analysis is not available at interim".into(),
            )),
            (Stage::Interim, D::Point, A::Flat) => Ok(Method::Cpi),
            (Stage::Interim, D::Normal, A::Flat) => Ok(Method::Ippi),
            (Stage::Interim, D::Flat, A::Flat) => Ok(Method::Ppi),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Method::Cp => "CP",
            Method::Pp => "PP",
            Method::Fbp => "FBP",
            Method::Cbp => "CBP",
            Method::Cpi => "CPi",
            Method::Ippi => "IPPi",
            Method::Ppi => "PPi",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.label().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidSpec(format!("unknown method `{s}`")))
    }
}
