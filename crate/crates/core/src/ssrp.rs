//! The Social Science Replication Project two-stage dataset: loading,
//! validation, derived unitless quantities and the case-study reports.
//!
//! All sample-size arithmetic uses the effective sample size `n − 3` of a
//! Fisher-z transformed correlation.

use std::fmt::Write as _;
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::config::{DesignConfig, Method};
use crate::error::{Error, Result};
use crate::fixed::{fixed_power, FixedDesign};
use crate::interim::{interim_power, InterimState};
use crate::solver::{futility_decision, Decision, FutilityRule};
use crate::stats::{fisher_z, normal_quantile, ZValue};

/// Environment variable naming an alternative dataset file.
pub const DATA_ENV: &str = "REPPOWER_DATA";

const EMBEDDED: &str = include_str!("../data/ssrp.csv");

const SE_REL_TOL: f64 = 0.01;
const FISHER_TOL: f64 = 1e-6;
const DUAL_ROUTE_TOL: f64 = 1e-6;
const P_WARN_GAP: f64 = 0.25;

/// One study. Column names follow the public dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SsrpRecord {
    pub study: String,
    #[serde(rename = "ro")]
    pub r_o: f64,
    #[serde(rename = "ri")]
    pub r_i: Option<f64>,
    #[serde(rename = "rr")]
    pub r_r: Option<f64>,
    #[serde(rename = "fiso")]
    pub fis_o: f64,
    #[serde(rename = "fisi")]
    pub fis_i: Option<f64>,
    #[serde(rename = "fisr")]
    pub fis_r: Option<f64>,
    #[serde(rename = "se_fiso")]
    pub se_fis_o: f64,
    #[serde(rename = "se_fisi")]
    pub se_fis_i: Option<f64>,
    #[serde(rename = "se_fisr")]
    pub se_fis_r: Option<f64>,
    #[serde(rename = "no")]
    pub n_o: u32,
    #[serde(rename = "ni")]
    pub n_i: Option<u32>,
    #[serde(rename = "nr")]
    pub n_r: Option<u32>,
    #[serde(rename = "po")]
    pub p_o: Option<f64>,
    #[serde(rename = "pi")]
    pub p_i: Option<f64>,
    #[serde(rename = "pr")]
    pub p_r: Option<f64>,
}

/// One stage of a study: correlation, Fisher-z effect, its standard error and
/// the sample size.
struct StageView<'a> {
    label: &'static str,
    r: Option<f64>,
    fis: Option<f64>,
    se: Option<f64>,
    n: Option<u32>,
    p: Option<f64>,
    study: &'a str,
}

impl SsrpRecord {
    /// Stage 2 was run: the final replication result is present.
    pub fn continued(&self) -> bool {
        self.r_r.is_some() && self.n_r.is_some()
    }

    fn stages(&self) -> [StageView<'_>; 3] {
        [
            StageView {
                label: "o",
                r: Some(self.r_o),
                fis: Some(self.fis_o),
                se: Some(self.se_fis_o),
                n: Some(self.n_o),
                p: self.p_o,
                study: &self.study,
            },
            StageView {
                label: "i",
                r: self.r_i,
                fis: self.fis_i,
                se: self.se_fis_i,
                n: self.n_i,
                p: self.p_i,
                study: &self.study,
            },
            StageView {
                label: "r",
                r: self.r_r,
                fis: self.fis_r,
                se: self.se_fis_r,
                n: self.n_r,
                p: self.p_r,
                study: &self.study,
            },
        ]
    }

    /// Invariant violations (hard) and cross-check warnings (soft).
    fn check(&self) -> (Vec<String>, Vec<String>) {
        let mut bad = Vec::new();
        let mut warn = Vec::new();
        for s in self.stages() {
            let who = format!("{} ({})", s.study, s.label);
            let present = [s.r.is_some(), s.fis.is_some(), s.se.is_some(), s.n.is_some()];
            if present.iter().any(|&x| x) && !present.iter().all(|&x| x) {
                bad.push(format!("{who}: r, fis, se and n must be given together"));
                continue;
            }
            let (Some(r), Some(fis), Some(se), Some(n)) = (s.r, s.fis, s.se, s.n) else {
                continue;
            };
            if n < 4 {
                bad.push(format!("{who}: n = {n} is below 4"));
                continue;
            }
            match fisher_z(r) {
                Ok(z) if (z - fis).abs() <= FISHER_TOL => {}
                Ok(z) => bad.push(format!("{who}: fis = {fis} but atanh(r) = {z}")),
                Err(_) => bad.push(format!("{who}: r = {r} outside (-1, 1)")),
            }
            let expected = 1.0 / (f64::from(n) - 3.0).sqrt();
            if !(se > 0.0) || ((se - expected) / expected).abs() > SE_REL_TOL {
                bad.push(format!("{who}: se = {se} but 1/sqrt(n - 3) = {expected:.6}"));
            }
            if let Some(p) = s.p {
                if !(p > 0.0 && p <= 1.0) {
                    bad.push(format!("{who}: p = {p} outside (0, 1]"));
                } else if se > 0.0 && p < 1.0 {
                    let from_p = -normal_quantile(p / 2.0).unwrap_or(f64::NAN);
                    let t = (fis / se).abs();
                    if (from_p - t).abs() > P_WARN_GAP {
                        warn.push(format!(
                            "{who}: reported p = {p} implies |z| = {from_p:.3}, effect gives {t:.3}"
                        ));
                    }
                }
            }
        }
        if self.r_r.is_some() != self.n_r.is_some() {
            bad.push(format!("{}: final result and final sample size must be given together", self.study));
        }
        if self.continued() && self.n_i.is_none() {
            bad.push(format!("{}: continued study without interim data", self.study));
        }
        if let (Some(ni), Some(nr)) = (self.n_i, self.n_r) {
            if ni >= nr {
                bad.push(format!("{}: n_i = {ni} is not below n_r = {nr}", self.study));
            }
        }
        if let (Some(ni), Some(se_i)) = (self.n_i, self.se_fis_i) {
            let by_n = (f64::from(ni) - 3.0) / (f64::from(self.n_o) - 3.0);
            let by_se = (self.se_fis_o / se_i).powi(2);
            if (by_n - by_se).abs() > DUAL_ROUTE_TOL * by_n.max(1.0) {
                warn.push(format!(
                    "{}: stage-1 c from sample sizes {by_n:.6} vs variance ratio {by_se:.6}",
                    self.study
                ));
            }
        }
        (bad, warn)
    }

    pub fn derive(&self) -> Result<DerivedQuantities> {
        let t_o = ZValue::new(self.fis_o / self.se_fis_o)?;
        let t_i = match (self.fis_i, self.se_fis_i) {
            (Some(fis), Some(se)) => Some(ZValue::new(fis / se)?),
            _ => None,
        };
        let eff = |n: u32| f64::from(n) - 3.0;
        let eff_o = eff(self.n_o);
        let c_stage1 = self.n_i.map(|n| eff(n) / eff_o);
        let c = self.n_r.map(|n| eff(n) / eff_o);
        let f = match (self.n_i, self.n_r) {
            (Some(ni), Some(nr)) => Some(eff(ni) / eff(nr)),
            _ => None,
        };
        if let (Some(c), Some(se_r)) = (c, self.se_fis_r) {
            let by_se = (self.se_fis_o / se_r).powi(2);
            if (c - by_se).abs() > DUAL_ROUTE_TOL * c.max(1.0) {
                return Err(Error::Invariant(vec![format!(
                    "{}: c from sample sizes {c} vs variance ratio {by_se}",
                    self.study
                )]));
            }
        }
        Ok(DerivedQuantities {
            study: self.study.clone(),
            t_o,
            t_i,
            t_r: match (self.fis_r, self.se_fis_r) {
                (Some(fis), Some(se)) => Some(ZValue::new(fis / se)?),
                _ => None,
            },
            c,
            c_stage1,
            f,
            continued: self.continued(),
        })
    }
}

/// Unitless inputs of the power functions for one study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DerivedQuantities {
    pub study: String,
    pub t_o: ZValue,
    pub t_i: Option<ZValue>,
    pub t_r: Option<ZValue>,
    /// `(n_r − 3) / (n_o − 3)`.
    pub c: Option<f64>,
    /// `(n_i − 3) / (n_o − 3)`: the relative size if stage 2 is ignored.
    pub c_stage1: Option<f64>,
    /// `(n_i − 3) / (n_r − 3)`.
    pub f: Option<f64>,
    pub continued: bool,
}

impl DerivedQuantities {
    /// Interim statistic and state; only continued studies have one.
    pub fn interim_state(&self) -> Result<InterimState> {
        let missing = |field| Error::MissingField {
            study: self.study.clone(),
            field,
        };
        let t_i = self.t_i.ok_or_else(|| missing("fisi"))?;
        let c = self.c.ok_or_else(|| missing("nr"))?;
        let f = self.f.ok_or_else(|| missing("ni"))?;
        InterimState::new(t_i.value(), f, c)
    }

    /// Stage-1 relative size, used when stage 2 is ignored.
    pub fn stage1_c(&self) -> Result<f64> {
        self.c_stage1.ok_or_else(|| Error::MissingField {
            study: self.study.clone(),
            field: "ni",
        })
    }
}

/// A validated dataset.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SsrpDataset {
    pub records: Vec<SsrpRecord>,
    /// Cross-check disagreements that do not invalidate the data.
    pub warnings: Vec<String>,
}

fn parse_error(e: csv::Error, headers: &csv::StringRecord) -> Error {
    let row = e.position().map_or(0, |p| p.line() as usize);
    let column = match e.kind() {
        csv::ErrorKind::Deserialize { err, .. } => err
            .field()
            .and_then(|i| headers.get(i as usize))
            .unwrap_or("")
            .to_string(),
        _ => String::new(),
    };
    let message = match e.kind() {
        csv::ErrorKind::Deserialize { err, .. } => err.kind().to_string(),
        _ => e.to_string(),
    };
    Error::Parse { row, column, message }
}

impl SsrpDataset {
    pub fn from_reader<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let headers = rdr.headers().map_err(|e| parse_error(e, &csv::StringRecord::new()))?.clone();
        if headers.is_empty() || headers.iter().all(str::is_empty) {
            return Err(Error::Parse {
                row: 1,
                column: String::new(),
                message: "missing header row".into(),
            });
        }
        let records = rdr
            .deserialize()
            .collect::<std::result::Result<Vec<SsrpRecord>, _>>()
            .map_err(|e| parse_error(e, &headers))?;
        if records.is_empty() {
            return Err(Error::Parse {
                row: 2,
                column: String::new(),
                message: "no data rows".into(),
            });
        }
        let mut bad = Vec::new();
        let mut warnings = Vec::new();
        for r in &records {
            let (b, w) = r.check();
            bad.extend(b);
            warnings.extend(w);
        }
        if !bad.is_empty() {
            return Err(Error::Invariant(bad));
        }
        Ok(SsrpDataset { records, warnings })
    }

    pub fn load_csv(path: impl AsRef<Path>) -> Result<Self> {
        let file = std::fs::File::open(path.as_ref())
            .map_err(|e| Error::Io(format!("{}: {e}", path.as_ref().display())))?;
        SsrpDataset::from_reader(std::io::BufReader::new(file))
    }

    /// The copy shipped with the crate.
    pub fn embedded() -> Self {
        SsrpDataset::from_reader(EMBEDDED.as_bytes()).expect("embedded dataset is valid")
    }

    /// The file named by [`DATA_ENV`] if set, otherwise the embedded copy.
    pub fn load_default() -> Result<Self> {
        match std::env::var_os(DATA_ENV) {
            Some(path) if !path.is_empty() => SsrpDataset::load_csv(path),
            _ => Ok(SsrpDataset::embedded()),
        }
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn continued(&self) -> impl Iterator<Item = &SsrpRecord> {
        self.records.iter().filter(|r| r.continued())
    }

    pub fn find(&self, study: &str) -> Option<&SsrpRecord> {
        self.records.iter().find(|r| r.study.eq_ignore_ascii_case(study))
    }

    /// Interim powers of the continued studies next to the published values.
    pub fn reproduce_table3(&self) -> Result<Table3Report> {
        let cfg = DesignConfig::new(0.05, 0.0)?;
        let mut rows = Vec::new();
        let mut mismatches = Vec::new();
        for rec in self.continued() {
            let d = rec.derive()?;
            let state = d.interim_state()?;
            let mut computed = [0.0; 3];
            for (slot, m) in computed.iter_mut().zip(INTERIM_METHODS) {
                *slot = interim_power(m, d.t_o, &state, &cfg)?.power.value();
            }
            let published = PUBLISHED_INTERIM
                .iter()
                .find(|(s, _)| s.eq_ignore_ascii_case(&rec.study))
                .map(|(_, v)| *v);
            let mut max_diff = None;
            if let Some(published) = published {
                let mut worst: f64 = 0.0;
                for ((value, reference), m) in computed.iter().zip(published).zip(INTERIM_METHODS) {
                    let diff = (round1(value * 100.0) - reference).abs();
                    worst = worst.max(diff);
                    if diff > TABLE3_TOL_PP + 1e-9 {
                        mismatches.push(format!(
                            "{} {m}: computed {:.1} vs published {reference:.1}",
                            rec.study,
                            value * 100.0
                        ));
                    }
                }
                max_diff = Some(worst);
            } else {
                mismatches.push(format!("{}: no published reference", rec.study));
            }
            rows.push(Table3Row {
                study: rec.study.clone(),
                t_o: d.t_o.value(),
                t_i: state.t_i.value(),
                c: state.c,
                f: state.f,
                cpi: computed[0],
                ippi: computed[1],
                ppi: computed[2],
                published,
                max_abs_diff_pp: max_diff,
            });
        }
        Ok(Table3Report {
            alpha: cfg.alpha(),
            shrinkage: cfg.shrinkage(),
            tolerance_pp: TABLE3_TOL_PP,
            rows,
            mismatches,
        })
    }

    /// Design-time powers of every study with stage 2 ignored.
    pub fn reproduce_design_powers(&self, shrinkage: f64) -> Result<DesignPowersReport> {
        let cfg = DesignConfig::new(0.05, shrinkage)?;
        let mut rows = Vec::new();
        for rec in &self.records {
            let d = rec.derive()?;
            let design = FixedDesign {
                t_o: d.t_o,
                c: d.stage1_c()?,
            };
            let p = |m| fixed_power(m, &design, &cfg).map(|r| r.power.value());
            rows.push(DesignPowersRow {
                study: rec.study.clone(),
                t_o: d.t_o.value(),
                c: design.c,
                cp: p(Method::Cp)?,
                pp: p(Method::Pp)?,
                fbp: p(Method::Fbp)?,
                cbp: p(Method::Cbp)?,
            });
        }
        let cp_above_pp = rows.iter().filter(|r| r.cp > r.pp).count();
        let cbp_above_fbp = rows.iter().filter(|r| r.cbp > r.fbp).count();
        let fbp_above_pp = rows.iter().filter(|r| r.fbp > r.pp).count();
        Ok(DesignPowersReport {
            alpha: cfg.alpha(),
            alpha_tilde: cfg.alpha_tilde(),
            shrinkage,
            cp_above_pp,
            cbp_above_fbp,
            fbp_above_pp,
            rows,
        })
    }

    /// Replays a futility rule on the continued studies.
    pub fn futility_replay(&self, rule: &FutilityRule) -> Result<FutilityReport> {
        let cfg = DesignConfig::new(0.05, 0.0)?;
        let crit = -cfg.z_alpha();
        let mut rows = Vec::new();
        for rec in self.continued() {
            let d = rec.derive()?;
            let state = d.interim_state()?;
            let decision = futility_decision(rule, d.t_o, &state, &cfg)?;
            let t_r = d.t_r.ok_or_else(|| Error::MissingField {
                study: rec.study.clone(),
                field: "fisr",
            })?;
            rows.push(FutilityRow {
                study: rec.study.clone(),
                power: decision.power,
                decision: decision.decision,
                replicated: t_r.value() > crit,
            });
        }
        let failed = rows.iter().filter(|r| !r.replicated).count();
        let stopped_failed = rows
            .iter()
            .filter(|r| !r.replicated && r.decision == Decision::Stop)
            .count();
        let stopped_replicated = rows
            .iter()
            .filter(|r| r.replicated && r.decision == Decision::Stop)
            .count();
        Ok(FutilityReport {
            method: rule.method,
            boundary: rule.boundary,
            continued: rows.len(),
            failed,
            stopped_failed,
            stopped_replicated,
            rows,
        })
    }

    /// Original effects compared with the latest available replication
    /// effect (final if stage 2 ran, interim otherwise).
    pub fn effect_audit(&self) -> EffectAudit {
        let latest = |r: &SsrpRecord| r.r_r.or(r.r_i);
        EffectAudit {
            studies: self.records.len(),
            original_positive: self.records.iter().filter(|r| r.r_o > 0.0).count(),
            replication_smaller: self
                .records
                .iter()
                .filter(|r| latest(r).is_some_and(|x| x < r.r_o))
                .count(),
        }
    }
}

const INTERIM_METHODS: [Method; 3] = [Method::Cpi, Method::Ippi, Method::Ppi];

/// Tolerance, in percentage points, for the published interim powers.
pub const TABLE3_TOL_PP: f64 = 0.1;

/// Published CPi, IPPi and PPi (percent) of the continued studies.
pub const PUBLISHED_INTERIM: [(&str, [f64; 3]); 10] = [
    ("Duncan", [100.0, 74.6, 43.4]),
    ("Pyc", [100.0, 85.3, 71.0]),
    ("Ackerman", [100.0, 95.0, 90.3]),
    ("Rand", [99.8, 51.9, 27.0]),
    ("Ramirez", [100.0, 61.4, 4.2]),
    ("Gervais", [97.5, 1.9, 0.3]),
    ("Lee", [97.7, 3.1, 0.4]),
    ("Sparrow", [99.7, 74.1, 40.1]),
    ("Kidd", [98.9, 1.6, 0.1]),
    ("Shah", [87.0, 0.1, 0.0]),
];

fn round1(x: f64) -> f64 {
    (x * 10.0).round() / 10.0
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table3Row {
    pub study: String,
    pub t_o: f64,
    pub t_i: f64,
    pub c: f64,
    pub f: f64,
    pub cpi: f64,
    pub ippi: f64,
    pub ppi: f64,
    pub published: Option<[f64; 3]>,
    pub max_abs_diff_pp: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table3Report {
    pub alpha: f64,
    pub shrinkage: f64,
    pub tolerance_pp: f64,
    pub rows: Vec<Table3Row>,
    pub mismatches: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DesignPowersRow {
    pub study: String,
    pub t_o: f64,
    pub c: f64,
    pub cp: f64,
    pub pp: f64,
    pub fbp: f64,
    pub cbp: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DesignPowersReport {
    pub alpha: f64,
    pub alpha_tilde: f64,
    pub shrinkage: f64,
    pub cp_above_pp: usize,
    pub cbp_above_fbp: usize,
    pub fbp_above_pp: usize,
    pub rows: Vec<DesignPowersRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FutilityRow {
    pub study: String,
    pub power: f64,
    pub decision: Decision,
    /// Final replication significant in the original direction.
    pub replicated: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FutilityReport {
    pub method: Method,
    pub boundary: f64,
    pub continued: usize,
    pub failed: usize,
    pub stopped_failed: usize,
    pub stopped_replicated: usize,
    pub rows: Vec<FutilityRow>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct EffectAudit {
    pub studies: usize,
    pub original_positive: usize,
    pub replication_smaller: usize,
}

fn pct(p: f64) -> String {
    format!("{:.1}", p * 100.0)
}

/// Left-aligns the first column and right-aligns the rest.
fn render(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut width: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
    for row in rows {
        for (w, cell) in width.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let mut out = String::new();
    let line = |out: &mut String, cells: Vec<&str>| {
        let mut parts = Vec::with_capacity(cells.len());
        for (i, (cell, w)) in cells.iter().zip(&width).enumerate() {
            parts.push(if i == 0 {
                format!("{cell:<w$}")
            } else {
                format!("{cell:>w$}")
            });
        }
        let _ = writeln!(out, "{}", parts.join("  ").trim_end());
    };
    line(&mut out, header.to_vec());
    for row in rows {
        line(&mut out, row.iter().map(String::as_str).collect());
    }
    out
}

impl Table3Report {
    pub fn text_table(&self) -> String {
        let rows: Vec<Vec<String>> = self
            .rows
            .iter()
            .map(|r| {
                let reference = r
                    .published
                    .map(|p| format!("{:.1}/{:.1}/{:.1}", p[0], p[1], p[2]))
                    .unwrap_or_else(|| "-".into());
                vec![
                    r.study.clone(),
                    format!("{:.2}", r.c),
                    format!("{:.2}", r.f),
                    pct(r.cpi),
                    pct(r.ippi),
                    pct(r.ppi),
                    reference,
                ]
            })
            .collect();
        let mut out = render(&["study", "c", "f", "CPi", "IPPi", "PPi", "published"], &rows);
        if self.mismatches.is_empty() {
            let _ = writeln!(out, "all values within {} pp", self.tolerance_pp);
        } else {
            for m in &self.mismatches {
                let _ = writeln!(out, "mismatch: {m}");
            }
        }
        out
    }
}

impl DesignPowersReport {
    pub fn text_table(&self) -> String {
        let rows: Vec<Vec<String>> = self
            .rows
            .iter()
            .map(|r| {
                vec![
                    r.study.clone(),
                    format!("{:.2}", r.c),
                    pct(r.cp),
                    pct(r.pp),
                    pct(r.fbp),
                    pct(r.cbp),
                ]
            })
            .collect();
        let mut out = render(&["study", "c", "CP", "PP", "FBP", "CBP"], &rows);
        let n = self.rows.len();
        let _ = writeln!(
            out,
            "CP > PP: {}/{n}  CBP > FBP: {}/{n}  FBP > PP: {}/{n}",
            self.cp_above_pp, self.cbp_above_fbp, self.fbp_above_pp
        );
        out
    }
}

impl FutilityReport {
    pub fn text_table(&self) -> String {
        let rows: Vec<Vec<String>> = self
            .rows
            .iter()
            .map(|r| {
                vec![
                    r.study.clone(),
                    pct(r.power),
                    match r.decision {
                        Decision::Stop => "stop".into(),
                        Decision::Continue => "continue".into(),
                    },
                    if r.replicated { "yes" } else { "no" }.into(),
                ]
            })
            .collect();
        let mut out = render(&["study", self.method.label(), "decision", "replicated"], &rows);
        let _ = writeln!(
            out,
            "{} < {}: {} of {} failed studies stopped, {} successful studies stopped",
            self.method, self.boundary, self.stopped_failed, self.failed, self.stopped_replicated
        );
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn data() -> SsrpDataset {
        SsrpDataset::embedded()
    }

    #[test]
    fn embedded_counts() {
        let d = data();
        assert_eq!(d.len(), 21);
        assert_eq!(d.continued().count(), 10);
    }

    #[test]
    fn derived_quantities() {
        let d = data();
        let duncan = d.find("duncan").unwrap().derive().unwrap();
        assert_abs_diff_eq!(duncan.c.unwrap(), 7.42, epsilon = 0.005);
        assert_abs_diff_eq!(duncan.f.unwrap(), 0.37, epsilon = 0.005);
        let shah = d.find("Shah").unwrap().derive().unwrap();
        assert_abs_diff_eq!(shah.c.unwrap(), 11.62, epsilon = 0.005);
        assert_abs_diff_eq!(shah.f.unwrap(), 0.45, epsilon = 0.005);
        assert!(shah.t_i.unwrap().value() < 0.0);
        for rec in d.continued() {
            let q = rec.derive().unwrap();
            let f = q.f.unwrap();
            assert!(f > 0.0 && f < 1.0);
            assert_abs_diff_eq!(q.c.unwrap(), q.c_stage1.unwrap() / f, epsilon = 1e-9);
        }
    }

    #[test]
    fn stopped_study_has_no_interim_state() {
        let d = data();
        let stopped = d.records.iter().find(|r| !r.continued()).unwrap();
        let q = stopped.derive().unwrap();
        assert!(!q.continued && q.c.is_none());
        assert!(matches!(q.interim_state(), Err(Error::MissingField { .. })));
        assert!(q.stage1_c().is_ok());
    }

    #[test]
    fn equal_sizes_give_unit_c() {
        let mut rec = data().find("Duncan").unwrap().clone();
        rec.n_r = Some(rec.n_o);
        rec.se_fis_r = Some(rec.se_fis_o);
        assert_eq!(rec.derive().unwrap().c, Some(1.0));
    }

    #[test]
    fn published_rows_reproduce() {
        let report = data().reproduce_table3().unwrap();
        assert_eq!(report.rows.len(), 10);
        assert!(report.mismatches.is_empty(), "{:?}", report.mismatches);
        let ackerman = report.rows.iter().find(|r| r.study == "Ackerman").unwrap();
        assert_abs_diff_eq!(round1(ackerman.ppi * 100.0), 90.3, epsilon = 0.1 + 1e-9);
    }

    #[test]
    fn design_power_orderings() {
        let report = data().reproduce_design_powers(0.25).unwrap();
        assert_eq!(report.rows.len(), 21);
        assert_eq!(report.cp_above_pp, 21);
        assert_eq!(report.cbp_above_fbp, 21);
        assert!(report.fbp_above_pp > 0 && report.fbp_above_pp < 21);
    }

    #[test]
    fn futility_counts() {
        let d = data();
        let ippi = d.futility_replay(&FutilityRule::new(Method::Ippi, 0.30).unwrap()).unwrap();
        assert_eq!((ippi.failed, ippi.stopped_failed, ippi.stopped_replicated), (8, 4, 0));
        let ppi = d.futility_replay(&FutilityRule::new(Method::Ppi, 0.30).unwrap()).unwrap();
        assert_eq!((ppi.failed, ppi.stopped_failed), (8, 6));
    }

    #[test]
    fn effect_direction_audit() {
        let a = data().effect_audit();
        assert_eq!(a, EffectAudit { studies: 21, original_positive: 21, replication_smaller: 19 });
    }

    #[test]
    fn empty_input_is_a_parse_error() {
        assert!(matches!(SsrpDataset::from_reader("".as_bytes()), Err(Error::Parse { .. })));
        let header_only = EMBEDDED.lines().next().unwrap();
        assert!(matches!(
            SsrpDataset::from_reader(header_only.as_bytes()),
            Err(Error::Parse { .. })
        ));
    }

    #[test]
    fn bad_number_reports_row_and_column() {
        let mut lines: Vec<String> = EMBEDDED.lines().map(String::from).collect();
        lines[2] = lines[2].replacen(",15,", ",fifteen,", 1);
        let text = lines.join("\n");
        match SsrpDataset::from_reader(text.as_bytes()) {
            Err(Error::Parse { row, column, .. }) => {
                assert_eq!(row, 3);
                assert_eq!(column, "no");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn inconsistent_standard_error_is_reported() {
        let text = EMBEDDED.replacen("0.1400280084", "0.1500280084", 1);
        match SsrpDataset::from_reader(text.as_bytes()) {
            Err(Error::Invariant(v)) => {
                assert_eq!(v.len(), 1);
                assert!(v[0].starts_with("Ackerman (o)"), "{v:?}");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn text_tables_align() {
        let t = data().reproduce_table3().unwrap().text_table();
        let widths: Vec<usize> = t.lines().take(11).map(|l| l.len()).collect();
        assert!(widths.windows(2).all(|w| w[0] == w[1]), "{t}");
    }
}
