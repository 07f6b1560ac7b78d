//! The JSON report written by the `hardy` command, and its CSV table.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::constants::{BConfig, BoundReport, Exponents};
use crate::error::{Error, Result};
use crate::spec::MeasureSpec;
use crate::variational::{RayleighResult, TestFunction};

pub const SCHEMA_VERSION: u32 = 1;

/// What the command was asked to do.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Inputs {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scenario: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nu: Option<MeasureSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu: Option<MeasureSpec>,
    pub dual: bool,
    pub certify: bool,
    pub seed: u64,
    pub tol: f64,
    pub depth: u32,
}

/// `k_{q,p}` next to the earlier factors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Factors {
    pub k_sharp: f64,
    pub k_literature: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trial {
    pub family: String,
    pub function: TestFunction,
    pub result: RayleighResult,
}

/// One line of the expected-versus-computed table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub scenario: String,
    pub quantity: String,
    pub expected: String,
    #[serde(with = "crate::extended")]
    pub computed: f64,
    pub tolerance: String,
    pub pass: bool,
}

impl Row {
    pub fn new(
        scenario: &str,
        quantity: &str,
        expected: impl Into<String>,
        computed: f64,
        tolerance: impl Into<String>,
        pass: bool,
    ) -> Self {
        Self {
            scenario: scenario.into(),
            quantity: quantity.into(),
            expected: expected.into(),
            computed,
            tolerance: tolerance.into(),
            pass,
        }
    }

    /// `|computed - expected| <= tol`.
    pub fn near(scenario: &str, quantity: &str, expected: f64, computed: f64, tol: f64) -> Self {
        let pass = (computed - expected).abs() <= tol;
        Self::new(
            scenario,
            quantity,
            fmt_num(expected),
            computed,
            format!("abs {tol:e}"),
            pass,
        )
    }

    /// `lo <= computed <= hi`.
    pub fn within(scenario: &str, quantity: &str, lo: f64, hi: f64, computed: f64) -> Self {
        let pass = lo <= computed && computed <= hi;
        Self::new(
            scenario,
            quantity,
            format!("[{}, {}]", fmt_num(lo), fmt_num(hi)),
            computed,
            "interval",
            pass,
        )
    }

    pub fn flag(scenario: &str, quantity: &str, expected: bool, got: bool) -> Self {
        Self::new(
            scenario,
            quantity,
            expected.to_string(),
            if got { 1.0 } else { 0.0 },
            "exact",
            expected == got,
        )
    }
}

fn fmt_num(x: f64) -> String {
    if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.to_string()
    } else if x != 0.0 && (x.abs() < 1e-4 || x.abs() >= 1e15) {
        format!("{x:e}")
    } else {
        format!("{x}")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub b_config: BConfig,
    pub refinement_levels: usize,
    /// Only recorded on request, so that reports stay byte-identical across runs.
    #[serde(
        with = "crate::extended::option",
        default,
        skip_serializing_if = "Option::is_none"
    )]
    pub wall_clock_seconds: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: u32,
    pub command: String,
    pub inputs: Inputs,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exponents: Option<Exponents>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub factors: Option<Factors>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bound: Option<BoundReport>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub trials: Vec<Trial>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub table: Vec<Row>,
    pub metadata: Metadata,
}

impl Report {
    pub fn new(command: &str, inputs: Inputs, cfg: &BConfig) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            command: command.into(),
            inputs,
            exponents: None,
            factors: None,
            bound: None,
            trials: Vec::new(),
            table: Vec::new(),
            metadata: Metadata {
                b_config: cfg.clone(),
                refinement_levels: 0,
                wall_clock_seconds: None,
            },
        }
    }

    pub fn with_bound(mut self, bound: BoundReport) -> Self {
        self.metadata.refinement_levels = bound.refinement_trace.len();
        self.exponents = Some(bound.exponents);
        self.bound = Some(bound);
        self
    }

    pub fn all_pass(&self) -> bool {
        self.table.iter().all(|r| r.pass)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports serialize");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Spec {
            path: format!("line {}, column {}", e.line(), e.column()),
            message: e.to_string(),
        })
    }

    /// The PASS/FAIL table as CSV.
    pub fn table_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record([
            "scenario",
            "quantity",
            "expected",
            "computed",
            "tolerance",
            "result",
        ])
        .map_err(|e| Error::InvalidArgument(e.to_string()))?;
        for r in &self.table {
            let computed = fmt_num(r.computed);
            let verdict = if r.pass { "PASS" } else { "FAIL" };
            w.write_record([
                &r.scenario,
                &r.quantity,
                &r.expected,
                &computed,
                &r.tolerance,
                verdict,
            ])
            .map_err(|e| Error::InvalidArgument(e.to_string()))?;
        }
        let bytes = w
            .into_inner()
            .map_err(|e| Error::InvalidArgument(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    /// Human-readable table, one `[PASS]`/`[FAIL]` line per row.
    pub fn table_text(&self) -> String {
        self.table
            .iter()
            .map(|r| {
                format!(
                    "[{}] {} {}: expected {}, computed {}, tolerance {}\n",
                    if r.pass { "PASS" } else { "FAIL" },
                    r.scenario,
                    r.quantity,
                    r.expected,
                    fmt_num(r.computed),
                    r.tolerance
                )
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::{bound_report, LowerBound};

    #[test]
    fn json_round_trip() {
        let e = Exponents::new(2.0, 2.0).unwrap();
        let cfg = BConfig::default();
        let nu =
            MeasureSpec::from_json(r#"{"type":"atoms","points":[0,1],"weights":[1,2]}"#).unwrap();
        let mu = MeasureSpec::from_json(r#"{"type":"density","kind":"power","coefficient":1,"exponent":-2,"support":[1,"inf"]}"#).unwrap();
        let b = bound_report(
            &nu.build().unwrap(),
            &mu.build().unwrap(),
            &e,
            &cfg,
            &LowerBound::Steps,
        )
        .unwrap();
        let inputs = Inputs {
            nu: Some(nu),
            mu: Some(mu),
            p: Some(2.0),
            q: Some(2.0),
            seed: 1,
            tol: 1e-10,
            depth: 14,
            ..Inputs::default()
        };
        let mut r = Report::new("bound", inputs, &cfg).with_bound(b);
        r.table
            .push(Row::near("demo", "B", 1.0, f64::INFINITY, 1e-9));
        let text = r.to_json();
        let back = Report::from_json(&text).unwrap();
        assert_eq!(back, r);
        assert_eq!(back.to_json(), text);
        assert!(text.contains("\"computed\": \"inf\""));
    }

    #[test]
    fn csv_table() {
        let mut r = Report::new("reproduce", Inputs::default(), &BConfig::default());
        r.table.push(Row::within("demo", "A, lower", 1.8, 2.0, 1.9));
        let csv = r.table_csv().unwrap();
        assert_eq!(csv, "scenario,quantity,expected,computed,tolerance,result\ndemo,\"A, lower\",\"[1.8, 2]\",1.9,interval,PASS\n");
    }
}
