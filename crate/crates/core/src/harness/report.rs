use std::io;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

/// One evaluated check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub suite: String,
    pub check: String,
    pub state: String,
    pub params: Map<String, Value>,
    pub value: f64,
    pub threshold: f64,
    pub pass: bool,
    pub wall_ms: Option<f64>,
}

/// Builder for the `params` object of a report.
#[derive(Debug, Clone, Default)]
pub struct Params(Map<String, Value>);

impl Params {
    pub fn new() -> Params {
        Params::default()
    }

    pub fn t(self, t: f64) -> Params {
        self.with("t", t)
    }

    pub fn j(self, j: usize) -> Params {
        self.with("j", j)
    }

    pub fn m(self, m: f64) -> Params {
        self.with("m", m)
    }

    pub fn hbar(self, h: f64) -> Params {
        self.with("hbar", h)
    }

    pub fn with(mut self, key: &str, value: impl Into<Value>) -> Params {
        self.0.insert(key.to_string(), value.into());
        self
    }

    pub fn into_map(self) -> Map<String, Value> {
        self.0
    }
}

impl CheckReport {
    /// A residual-style check: passes when `value ≤ threshold`.
    pub fn at_most(suite: &str, check: &str, state: &str, params: Params, value: f64, threshold: f64) -> CheckReport {
        CheckReport {
            suite: suite.into(),
            check: check.into(),
            state: state.into(),
            params: params.into_map(),
            value,
            threshold,
            pass: value <= threshold,
            wall_ms: None,
        }
    }

    /// A bound-style check: passes when `value ≥ threshold`.
    pub fn at_least(suite: &str, check: &str, state: &str, params: Params, value: f64, threshold: f64) -> CheckReport {
        CheckReport { pass: value >= threshold, ..CheckReport::at_most(suite, check, state, params, value, threshold) }
    }

    pub fn timed(mut self, wall_ms: Option<f64>) -> CheckReport {
        self.wall_ms = wall_ms;
        self
    }

    /// Marks the report as evaluated on a state outside the operator domain;
    /// such reports never pass.
    pub fn flag_noncompliant(mut self) -> CheckReport {
        self.params.insert("compliant".into(), Value::Bool(false));
        self.pass = false;
        self
    }

    fn param_f64(&self, key: &str) -> Option<f64> {
        self.params.get(key).and_then(Value::as_f64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    #[default]
    Json,
    Csv,
}

pub fn write_json<W: io::Write>(reports: &[CheckReport], mut out: W) -> io::Result<()> {
    serde_json::to_writer_pretty(&mut out, reports)?;
    writeln!(out)
}

/// CSV with header `suite,check,state,t,j,value,threshold,pass`.
pub fn write_csv<W: io::Write>(reports: &[CheckReport], out: W) -> io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["suite", "check", "state", "t", "j", "value", "threshold", "pass"])?;
    let opt = |v: Option<f64>| v.map(|x| format!("{x}")).unwrap_or_default();
    for r in reports {
        w.write_record([
            r.suite.clone(),
            r.check.clone(),
            r.state.clone(),
            opt(r.param_f64("t")),
            r.params.get("j").and_then(Value::as_u64).map(|j| j.to_string()).unwrap_or_default(),
            format!("{:e}", r.value),
            format!("{:e}", r.threshold),
            r.pass.to_string(),
        ])?;
    }
    w.flush()
}

pub fn write_reports<W: io::Write>(reports: &[CheckReport], format: ReportFormat, out: W) -> io::Result<()> {
    match format {
        ReportFormat::Json => write_json(reports, out),
        ReportFormat::Csv => write_csv(reports, out),
    }
}
