use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use indexmap::IndexMap;
use serde::Serialize;
use serde_json::{json, Value};

use reppower::mc::{simulate_power, SimSpec, DEFAULT_N_O, DEFAULT_SIMS, MIN_SIMS};
use reppower::solver::{solve_c, FutilityRule, InterimInputs, SolveRequest};
use reppower::ssrp::{SsrpDataset, DATA_ENV};
use reppower::stats::{p_to_z, Direction};
use reppower::{
    fixed_power, interim_power, remaining_n_curve, DesignConfig, FixedDesign, InterimState,
    Method, Tail, ZValue,
};

#[derive(Parser)]
#[command(name = "reppower", version, about = "Power calculations for replication studies")]
struct Cli {
    /// Output format.
    #[arg(long, value_enum, global = true, default_value_t = Format::Text)]
    format: Format,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Design-time power of a replication (CP, PP, FBP, CBP).
    Power {
        #[arg(long, value_parser = design_method)]
        method: Method,
        #[command(flatten)]
        original: OriginalArgs,
        #[arg(long, value_parser = positive)]
        c: f64,
        #[command(flatten)]
        level: LevelArgs,
    },
    /// Power at an interim analysis (CPi, IPPi, PPi).
    Interim {
        #[arg(long, value_parser = interim_method)]
        method: Method,
        #[command(flatten)]
        original: OriginalArgs,
        #[command(flatten)]
        interim: InterimArgs,
        #[arg(long, value_parser = positive)]
        c: f64,
        /// Completed fraction of the replication.
        #[arg(long, value_parser = unit_half_open)]
        f: f64,
        #[command(flatten)]
        level: LevelArgs,
    },
    /// Smallest relative sample size reaching a target power.
    Solve {
        #[arg(long)]
        method: Method,
        #[arg(long, value_parser = open_unit)]
        target: f64,
        #[command(flatten)]
        original: OriginalArgs,
        #[command(flatten)]
        interim: OptionalInterimArgs,
        /// Interim sample size relative to the original, `n_i / n_o`.
        #[arg(long, value_parser = positive, conflicts_with = "f")]
        ni_ratio: Option<f64>,
        /// Completed fraction at the current plan; with `--c` gives `n_i / n_o = c·f`.
        #[arg(long, value_parser = open_unit, requires = "c")]
        f: Option<f64>,
        /// Current relative sample size, used with `--f`.
        #[arg(long, value_parser = positive)]
        c: Option<f64>,
        /// Smallest admissible relative sample size.
        #[arg(long, value_parser = non_negative, default_value_t = 0.0)]
        c_lower: f64,
        #[command(flatten)]
        level: LevelArgs,
    },
    /// Power over a grid of sample sizes, as CSV-friendly rows.
    #[command(group(ArgGroup::new("range").required(true).args(["c_range", "nj_range"])))]
    Curve {
        #[arg(long)]
        method: Method,
        #[command(flatten)]
        original: OriginalArgs,
        #[command(flatten)]
        interim: OptionalInterimArgs,
        /// Grid of `c` as start:end:step.
        #[arg(long, value_parser = parse_range)]
        c_range: Option<Grid>,
        /// Grid of remaining sample size `n_j / n_o` as start:end:step (interim methods).
        #[arg(long, value_parser = parse_range, requires = "ni_ratio")]
        nj_range: Option<Grid>,
        /// Completed fraction, held fixed along `--c-range` for interim methods.
        #[arg(long, value_parser = unit_half_open)]
        f: Option<f64>,
        #[arg(long, value_parser = positive)]
        ni_ratio: Option<f64>,
        #[command(flatten)]
        level: LevelArgs,
    },
    /// Case-study reports on the replication-project dataset.
    Ssrp {
        /// Dataset file; defaults to the bundled copy.
        #[arg(long, env = DATA_ENV)]
        data: Option<PathBuf>,
        #[arg(long, value_enum)]
        report: Report,
        #[arg(long, value_parser = open_unit, default_value_t = 0.30)]
        boundary: f64,
        #[arg(long, value_enum, default_value_t = FutilityMethod::Ippi)]
        futility_method: FutilityMethod,
        /// Shrinkage for the design-powers report.
        #[arg(long, value_parser = shrinkage, default_value_t = 0.25)]
        shrinkage: f64,
    },
    /// Monte-Carlo estimate of a power, next to its closed form.
    Simulate {
        #[arg(long)]
        method: Method,
        #[command(flatten)]
        original: OriginalArgs,
        #[command(flatten)]
        interim: OptionalInterimArgs,
        #[arg(long, value_parser = positive)]
        c: f64,
        #[arg(long, value_parser = unit_half_open, default_value_t = 0.0)]
        f: f64,
        #[arg(long, value_parser = sims, default_value_t = DEFAULT_SIMS)]
        nsims: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Internal original sample size of the simulated studies.
        #[arg(long, value_parser = positive, default_value_t = DEFAULT_N_O)]
        n_o: f64,
        #[command(flatten)]
        level: LevelArgs,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Report {
    Table3,
    DesignPowers,
    Futility,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FutilityMethod {
    Ippi,
    Ppi,
}

#[derive(Args)]
#[command(group(ArgGroup::new("original").required(true).args(["zo", "po"])))]
struct OriginalArgs {
    /// Original z-statistic.
    #[arg(long, allow_negative_numbers = true)]
    zo: Option<f64>,
    /// Original two-sided p-value; needs `--dir`.
    #[arg(long, value_parser = open_unit, requires = "dir")]
    po: Option<f64>,
    /// Direction of the original effect: + or -.
    #[arg(long, value_parser = direction, allow_hyphen_values = true)]
    dir: Option<Direction>,
}

#[derive(Args)]
#[command(group(ArgGroup::new("interim_stat").required(true).args(["zi", "pi"])))]
struct InterimArgs {
    /// Interim z-statistic.
    #[arg(long, allow_negative_numbers = true)]
    zi: Option<f64>,
    /// Interim two-sided p-value; needs `--dir-i`.
    #[arg(long, value_parser = open_unit, requires = "dir_i")]
    pi: Option<f64>,
    /// Direction of the interim effect: + or -.
    #[arg(long, value_parser = direction, allow_hyphen_values = true)]
    dir_i: Option<Direction>,
}

#[derive(Args)]
struct OptionalInterimArgs {
    /// Interim z-statistic.
    #[arg(long, allow_negative_numbers = true, conflicts_with = "pi")]
    zi: Option<f64>,
    /// Interim two-sided p-value; needs `--dir-i`.
    #[arg(long, value_parser = open_unit, requires = "dir_i")]
    pi: Option<f64>,
    /// Direction of the interim effect: + or -.
    #[arg(long, value_parser = direction, allow_hyphen_values = true)]
    dir_i: Option<Direction>,
}

#[derive(Args)]
struct LevelArgs {
    /// Two-sided significance level.
    #[arg(long, value_parser = open_unit, default_value_t = 0.05)]
    alpha: f64,
    /// Shrinkage of the original effect, in [0, 1).
    #[arg(long, value_parser = shrinkage, default_value_t = 0.0)]
    shrinkage: f64,
    /// Also count significance in the opposite direction.
    #[arg(long)]
    two_sided: bool,
}

#[derive(Clone, Copy, Debug)]
struct Grid {
    start: f64,
    end: f64,
    step: f64,
}

impl Grid {
    fn values(self) -> Vec<f64> {
        let n = ((self.end - self.start) / self.step + 1e-9).floor() as usize;
        (0..=n).map(|i| self.start + i as f64 * self.step).collect()
    }
}

fn number(s: &str) -> Result<f64, String> {
    let x: f64 = s.trim().parse().map_err(|_| format!("`{s}` is not a number"))?;
    if x.is_finite() {
        Ok(x)
    } else {
        Err(format!("`{s}` is not finite"))
    }
}

fn positive(s: &str) -> Result<f64, String> {
    let x = number(s)?;
    if x > 0.0 {
        Ok(x)
    } else {
        Err("must be positive".into())
    }
}

fn non_negative(s: &str) -> Result<f64, String> {
    let x = number(s)?;
    if x >= 0.0 {
        Ok(x)
    } else {
        Err("must be non-negative".into())
    }
}

fn open_unit(s: &str) -> Result<f64, String> {
    let x = number(s)?;
    if x > 0.0 && x < 1.0 {
        Ok(x)
    } else {
        Err("must lie strictly between 0 and 1".into())
    }
}

fn unit_half_open(s: &str) -> Result<f64, String> {
    let x = number(s)?;
    if (0.0..1.0).contains(&x) {
        Ok(x)
    } else {
        Err("must lie in [0, 1)".into())
    }
}

fn shrinkage(s: &str) -> Result<f64, String> {
    unit_half_open(s)
}

fn sims(s: &str) -> Result<u64, String> {
    let n: u64 = s.parse().map_err(|_| format!("`{s}` is not a count"))?;
    if n >= MIN_SIMS {
        Ok(n)
    } else {
        Err(format!("at least {MIN_SIMS} simulations are needed"))
    }
}

fn direction(s: &str) -> Result<Direction, String> {
    match s.to_ascii_lowercase().as_str() {
        "+" | "pos" | "positive" | "1" => Ok(Direction::Positive),
        "-" | "neg" | "negative" | "-1" => Ok(Direction::Negative),
        _ => Err("expected + or -".into()),
    }
}

fn design_method(s: &str) -> Result<Method, String> {
    let m: Method = s.parse().map_err(|e: reppower::Error| e.to_string())?;
    if m.is_interim() {
        Err(format!("{m} is an interim power; use the `interim` command"))
    } else {
        Ok(m)
    }
}

fn interim_method(s: &str) -> Result<Method, String> {
    let m: Method = s.parse().map_err(|e: reppower::Error| e.to_string())?;
    if m.is_interim() {
        Ok(m)
    } else {
        Err(format!("{m} is a design-time power; use the `power` command"))
    }
}

fn parse_range(s: &str) -> Result<Grid, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let [a, b, step] = parts.as_slice() else {
        return Err("expected start:end:step".into());
    };
    let grid = Grid {
        start: number(a)?,
        end: number(b)?,
        step: number(step)?,
    };
    if !(grid.start > 0.0 && grid.end >= grid.start && grid.step > 0.0) {
        return Err("need 0 < start <= end and step > 0".into());
    }
    if (grid.end - grid.start) / grid.step > 1e6 {
        return Err("more than a million grid points".into());
    }
    Ok(grid)
}

/// Failure after argument parsing; maps onto the process exit code.
enum Failure {
    Usage(String),
    Compute(reppower::Error),
    Io(io::Error),
}

impl From<reppower::Error> for Failure {
    fn from(e: reppower::Error) -> Self {
        Failure::Compute(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e)
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Failure::Io(io::Error::other(e))
    }
}

type CmdResult = Result<Output, Failure>;

impl LevelArgs {
    fn config(&self) -> Result<DesignConfig, Failure> {
        let tail = if self.two_sided { Tail::TwoSided } else { Tail::Upper };
        Ok(DesignConfig::new(self.alpha, self.shrinkage)?.with_tail(tail))
    }

    fn echo(&self, inputs: &mut IndexMap<String, Value>) {
        inputs.insert("alpha".into(), json!(self.alpha));
        inputs.insert("shrinkage".into(), json!(self.shrinkage));
        inputs.insert("tail".into(), json!(if self.two_sided { "two-sided" } else { "upper" }));
    }
}

fn statistic(z: Option<f64>, p: Option<f64>, dir: Option<Direction>, flag: &str) -> Result<ZValue, Failure> {
    match (z, p) {
        (Some(z), _) => Ok(ZValue::new(z)?),
        (None, Some(p)) => {
            let dir = dir.ok_or_else(|| Failure::Usage(format!("--{flag} needs a direction")))?;
            Ok(p_to_z(p, dir)?)
        }
        (None, None) => Err(Failure::Usage(format!("one of --z{} / --{flag} is required", &flag[1..]))),
    }
}

impl OriginalArgs {
    fn t_o(&self) -> Result<ZValue, Failure> {
        statistic(self.zo, self.po, self.dir, "po")
    }
}

impl InterimArgs {
    fn t_i(&self) -> Result<ZValue, Failure> {
        statistic(self.zi, self.pi, self.dir_i, "pi")
    }
}

impl OptionalInterimArgs {
    fn t_i(&self) -> Result<Option<ZValue>, Failure> {
        if self.zi.is_none() && self.pi.is_none() {
            return Ok(None);
        }
        statistic(self.zi, self.pi, self.dir_i, "pi").map(Some)
    }

    fn require(&self, method: Method) -> Result<ZValue, Failure> {
        self.t_i()?
            .ok_or_else(|| Failure::Usage(format!("{method} needs --zi or --pi with --dir-i")))
    }
}

#[derive(Serialize)]
struct Envelope {
    command: &'static str,
    inputs: IndexMap<String, Value>,
    results: IndexMap<String, Value>,
    warnings: Vec<String>,
}

enum Body {
    /// Flat key/value results.
    Record,
    /// Tabular results: header and rows for CSV, plus a rendered text table.
    Table {
        header: Vec<String>,
        rows: Vec<Vec<String>>,
        text: Option<String>,
    },
}

struct Output {
    envelope: Envelope,
    body: Body,
}

impl Output {
    fn new(command: &'static str) -> Self {
        Output {
            envelope: Envelope {
                command,
                inputs: IndexMap::new(),
                results: IndexMap::new(),
                warnings: Vec::new(),
            },
            body: Body::Record,
        }
    }

    fn input(&mut self, key: &str, value: impl Serialize) -> &mut Self {
        self.envelope.inputs.insert(key.into(), json!(value));
        self
    }

    fn result(&mut self, key: &str, value: impl Serialize) -> &mut Self {
        self.envelope.results.insert(key.into(), json!(value));
        self
    }

    fn write(&self, format: Format, out: &mut impl Write) -> Result<(), Failure> {
        match format {
            Format::Json => {
                serde_json::to_writer_pretty(&mut *out, &self.envelope).map_err(io::Error::other)?;
                writeln!(out)?;
            }
            Format::Csv => {
                let mut w = csv::Writer::from_writer(out);
                match &self.body {
                    Body::Record => {
                        let keys: Vec<&String> = self.envelope.results.keys().collect();
                        w.write_record(&keys)?;
                        w.write_record(self.envelope.results.values().map(plain))?;
                    }
                    Body::Table { header, rows, .. } => {
                        w.write_record(header)?;
                        for row in rows {
                            w.write_record(row)?;
                        }
                    }
                }
                w.flush()?;
            }
            Format::Text => {
                match &self.body {
                    Body::Table { text: Some(text), .. } => write!(out, "{text}")?,
                    Body::Table { header, rows, .. } => {
                        writeln!(out, "{}", header.join("\t"))?;
                        for row in rows {
                            writeln!(out, "{}", row.join("\t"))?;
                        }
                    }
                    Body::Record => {
                        let width = self.envelope.results.keys().map(String::len).max().unwrap_or(0);
                        for (k, v) in &self.envelope.results {
                            writeln!(out, "{k:<width$}  {}", pretty(v))?;
                        }
                    }
                }
                for w in &self.envelope.warnings {
                    writeln!(out, "warning: {w}")?;
                }
            }
        }
        Ok(())
    }
}

fn plain(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => String::new(),
        other => other.to_string(),
    }
}

fn pretty(v: &Value) -> String {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = n.as_f64().unwrap_or(f64::NAN);
            if x != 0.0 && x.abs() < 1e-4 {
                format!("{x:.6e}")
            } else {
                format!("{x:.6}")
            }
        }
        other => plain(other),
    }
}

fn echo_original(out: &mut Output, t_o: ZValue, original: &OriginalArgs) {
    out.input("t_o", t_o.value());
    if let (Some(p), Some(d)) = (original.po, original.dir) {
        out.input("p_o", p).input("dir", d);
    }
}

fn cmd_power(method: Method, original: &OriginalArgs, c: f64, level: &LevelArgs) -> CmdResult {
    let cfg = level.config()?;
    let t_o = original.t_o()?;
    let r = fixed_power(method, &FixedDesign::new(t_o.value(), c)?, &cfg)?;
    let mut out = Output::new("power");
    out.input("method", method);
    echo_original(&mut out, t_o, original);
    out.input("c", c);
    level.echo(&mut out.envelope.inputs);
    if method.is_pooled() {
        out.input("alpha_tilde", cfg.alpha_tilde());
    }
    out.result(method.label(), r.power.value())
        .result("supremum", r.supremum.value())
        .result("feasible_100", r.feasible_100);
    Ok(out)
}

fn cmd_interim(
    method: Method,
    original: &OriginalArgs,
    interim: &InterimArgs,
    c: f64,
    f: f64,
    level: &LevelArgs,
) -> CmdResult {
    let cfg = level.config()?;
    let t_o = original.t_o()?;
    let t_i = interim.t_i()?;
    let state = InterimState::new(t_i.value(), f, c)?;
    let r = interim_power(method, t_o, &state, &cfg)?;
    let mut out = Output::new("interim");
    out.input("method", method);
    echo_original(&mut out, t_o, original);
    out.input("t_i", t_i.value()).input("c", c).input("f", f);
    level.echo(&mut out.envelope.inputs);
    out.result(method.label(), r.power.value())
        .result("supremum", r.supremum.value())
        .result("feasible_100", r.feasible_100);
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn cmd_solve(
    method: Method,
    target: f64,
    original: &OriginalArgs,
    interim: &OptionalInterimArgs,
    ni_ratio: Option<f64>,
    f: Option<f64>,
    c: Option<f64>,
    c_lower: f64,
    level: &LevelArgs,
) -> CmdResult {
    let cfg = level.config()?;
    let t_o = original.t_o()?;
    let mut out = Output::new("solve");
    out.input("method", method).input("target", target);
    echo_original(&mut out, t_o, original);
    let mut req = if method.is_interim() {
        let t_i = interim.require(method)?;
        let ratio = match (ni_ratio, f, c) {
            (Some(a), _, _) => a,
            (None, Some(f), Some(c)) => c * f,
            _ => {
                return Err(Failure::Usage(format!(
                    "{method} needs --ni-ratio, or --f together with --c"
                )))
            }
        };
        out.input("t_i", t_i.value()).input("ni_ratio", ratio);
        SolveRequest::interim(method, target, t_o, InterimInputs { t_i, interim_ratio: ratio }, cfg)
    } else {
        if interim.t_i()?.is_some() || ni_ratio.is_some() || f.is_some() {
            return Err(Failure::Usage(format!("{method} takes no interim flags")));
        }
        SolveRequest::fixed(method, target, t_o, cfg)
    };
    req.c_lower = c_lower;
    out.input("c_lower", c_lower);
    level.echo(&mut out.envelope.inputs);
    let sol = solve_c(&req)?;
    out.result("c", sol.c);
    if let Some(f) = sol.f {
        out.result("f", f);
    }
    out.result("power", sol.power).result("degenerate", sol.degenerate);
    if sol.degenerate {
        out.envelope.warnings.push(format!(
            "the target is already exceeded as c approaches {c_lower}; reported c is where the power first falls back to it"
        ));
    }
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn cmd_curve(
    method: Method,
    original: &OriginalArgs,
    interim: &OptionalInterimArgs,
    c_range: Option<Grid>,
    nj_range: Option<Grid>,
    f: Option<f64>,
    ni_ratio: Option<f64>,
    level: &LevelArgs,
) -> CmdResult {
    let cfg = level.config()?;
    let t_o = original.t_o()?;
    let mut out = Output::new("curve");
    out.input("method", method);
    echo_original(&mut out, t_o, original);
    level.echo(&mut out.envelope.inputs);
    let label = method.label().to_string();
    let (header, rows): (Vec<String>, Vec<Vec<String>>) = match (c_range, nj_range) {
        (Some(grid), _) => {
            let mut rows = Vec::new();
            let t_i = if method.is_interim() {
                let f = f.ok_or_else(|| Failure::Usage(format!("{method} along --c-range needs --f")))?;
                out.input("f", f);
                Some((interim.require(method)?, f))
            } else {
                None
            };
            for c in grid.values() {
                let power = match t_i {
                    Some((t_i, f)) => {
                        interim_power(method, t_o, &InterimState::new(t_i.value(), f, c)?, &cfg)?
                    }
                    None => fixed_power(method, &FixedDesign::new(t_o.value(), c)?, &cfg)?,
                };
                rows.push(vec![c.to_string(), power.power.value().to_string()]);
            }
            (vec!["c".into(), label], rows)
        }
        (None, Some(grid)) => {
            if !method.is_interim() {
                return Err(Failure::Usage("--nj-range applies to interim methods".into()));
            }
            let t_i = interim.require(method)?;
            let ratio = ni_ratio.ok_or_else(|| Failure::Usage("--nj-range needs --ni-ratio".into()))?;
            out.input("t_i", t_i.value()).input("ni_ratio", ratio);
            let points = remaining_n_curve(t_o, t_i, ratio, &grid.values(), &cfg)?;
            let rows = points
                .iter()
                .map(|p| {
                    let power = match method {
                        Method::Cpi => p.cpi,
                        Method::Ippi => p.ippi,
                        _ => p.ppi,
                    };
                    vec![p.n_j.to_string(), p.c.to_string(), p.f.to_string(), power.to_string()]
                })
                .collect();
            (vec!["n_j".into(), "c".into(), "f".into(), label], rows)
        }
        (None, None) => return Err(Failure::Usage("one of --c-range / --nj-range is required".into())),
    };
    let columns: Vec<&str> = header.iter().map(String::as_str).collect();
    let points: Vec<IndexMap<&str, f64>> = rows
        .iter()
        .map(|row| columns.iter().copied().zip(row.iter().map(|x| x.parse().unwrap_or(f64::NAN))).collect())
        .collect();
    out.result("points", points);
    out.body = Body::Table {
        header,
        rows,
        text: None,
    };
    Ok(out)
}

fn cmd_ssrp(
    data: Option<PathBuf>,
    report: Report,
    boundary: f64,
    futility_method: FutilityMethod,
    shrinkage: f64,
) -> CmdResult {
    let dataset = match &data {
        Some(path) => SsrpDataset::load_csv(path)?,
        None => SsrpDataset::embedded(),
    };
    let mut out = Output::new("ssrp");
    out.input("data", data.as_ref().map_or("bundled".into(), |p| p.display().to_string()));
    out.envelope.warnings.extend(dataset.warnings.iter().cloned());
    let pct = |x: f64| format!("{:.1}", x * 100.0);
    match report {
        Report::Table3 => {
            out.input("report", "table3").input("alpha", 0.05).input("shrinkage", 0.0);
            let r = dataset.reproduce_table3()?;
            let rows = r
                .rows
                .iter()
                .map(|row| {
                    vec![
                        row.study.clone(),
                        row.c.to_string(),
                        row.f.to_string(),
                        pct(row.cpi),
                        pct(row.ippi),
                        pct(row.ppi),
                    ]
                })
                .collect();
            out.envelope.warnings.extend(r.mismatches.iter().map(|m| format!("mismatch: {m}")));
            out.body = Body::Table {
                header: ["study", "c", "f", "CPi", "IPPi", "PPi"].map(String::from).to_vec(),
                rows,
                text: Some(r.text_table()),
            };
            out.result("within_tolerance", r.mismatches.is_empty())
                .result("tolerance_pp", r.tolerance_pp)
                .result("rows", &r.rows);
        }
        Report::DesignPowers => {
            out.input("report", "design-powers").input("alpha", 0.05).input("shrinkage", shrinkage);
            let r = dataset.reproduce_design_powers(shrinkage)?;
            let rows = r
                .rows
                .iter()
                .map(|row| {
                    vec![
                        row.study.clone(),
                        row.c.to_string(),
                        pct(row.cp),
                        pct(row.pp),
                        pct(row.fbp),
                        pct(row.cbp),
                    ]
                })
                .collect();
            out.body = Body::Table {
                header: ["study", "c", "CP", "PP", "FBP", "CBP"].map(String::from).to_vec(),
                rows,
                text: Some(r.text_table()),
            };
            out.result("alpha_tilde", r.alpha_tilde)
                .result("cp_above_pp", r.cp_above_pp)
                .result("cbp_above_fbp", r.cbp_above_fbp)
                .result("fbp_above_pp", r.fbp_above_pp)
                .result("rows", &r.rows);
        }
        Report::Futility => {
            let method = match futility_method {
                FutilityMethod::Ippi => Method::Ippi,
                FutilityMethod::Ppi => Method::Ppi,
            };
            out.input("report", "futility").input("method", method).input("boundary", boundary);
            let r = dataset.futility_replay(&FutilityRule::new(method, boundary)?)?;
            let rows = r
                .rows
                .iter()
                .map(|row| {
                    vec![
                        row.study.clone(),
                        pct(row.power),
                        json!(row.decision).as_str().unwrap_or_default().to_string(),
                        row.replicated.to_string(),
                    ]
                })
                .collect();
            out.body = Body::Table {
                header: vec!["study".into(), method.label().into(), "decision".into(), "replicated".into()],
                rows,
                text: Some(r.text_table()),
            };
            out.result("continued", r.continued)
                .result("failed", r.failed)
                .result("stopped_failed", r.stopped_failed)
                .result("stopped_replicated", r.stopped_replicated)
                .result("rows", &r.rows);
        }
    }
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn cmd_simulate(
    method: Method,
    original: &OriginalArgs,
    interim: &OptionalInterimArgs,
    c: f64,
    f: f64,
    nsims: u64,
    seed: u64,
    n_o: f64,
    level: &LevelArgs,
) -> CmdResult {
    let cfg = level.config()?;
    let t_o = original.t_o()?;
    let spec = if method.is_interim() {
        SimSpec::interim(method, t_o, interim.require(method)?, c, f, cfg)
    } else {
        if interim.t_i()?.is_some() || f != 0.0 {
            return Err(Failure::Usage(format!("{method} takes no interim flags")));
        }
        SimSpec::fixed(method, t_o, c, cfg)
    }
    .with_sims(nsims)
    .with_seed(seed)
    .with_n_o(n_o);
    let est = simulate_power(&spec)?;
    let exact = spec.analytic()?;
    let mut out = Output::new("simulate");
    out.input("method", method);
    echo_original(&mut out, t_o, original);
    if let Some(t_i) = spec.t_i {
        out.input("t_i", t_i.value()).input("f", f);
    }
    out.input("c", c).input("nsims", nsims).input("seed", seed).input("n_o", n_o);
    level.echo(&mut out.envelope.inputs);
    let z = if est.std_err > 0.0 {
        (est.estimate - exact) / est.std_err
    } else {
        0.0
    };
    out.result("estimate", est.estimate)
        .result("std_err", est.std_err)
        .result("closed_form", exact)
        .result("z_discrepancy", z);
    if z.abs() > 3.0 {
        out.envelope
            .warnings
            .push(format!("simulation differs from the closed form by {z:.2} standard errors"));
    }
    Ok(out)
}

fn run(cli: Cli) -> CmdResult {
    match cli.command {
        Command::Power { method, original, c, level } => cmd_power(method, &original, c, &level),
        Command::Interim { method, original, interim, c, f, level } => {
            cmd_interim(method, &original, &interim, c, f, &level)
        }
        Command::Solve { method, target, original, interim, ni_ratio, f, c, c_lower, level } => {
            cmd_solve(method, target, &original, &interim, ni_ratio, f, c, c_lower, &level)
        }
        Command::Curve { method, original, interim, c_range, nj_range, f, ni_ratio, level } => {
            cmd_curve(method, &original, &interim, c_range, nj_range, f, ni_ratio, &level)
        }
        Command::Ssrp { data, report, boundary, futility_method, shrinkage } => {
            cmd_ssrp(data, report, boundary, futility_method, shrinkage)
        }
        Command::Simulate { method, original, interim, c, f, nsims, seed, n_o, level } => {
            cmd_simulate(method, &original, &interim, c, f, nsims, seed, n_o, &level)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let format = cli.format;
    let result = run(cli).and_then(|out| {
        let stdout = io::stdout();
        let mut lock = stdout.lock();
        out.write(format, &mut lock)?;
        lock.flush()?;
        Ok(())
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Compute(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
        Err(Failure::Io(e)) if e.kind() == io::ErrorKind::BrokenPipe => ExitCode::SUCCESS,
        Err(Failure::Io(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
