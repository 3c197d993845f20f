use fatdist_core::report::Report as CoreReport;
use fatdist_core::Tolerance64;
use serde::Serialize;
use serde_json::Value;

use crate::error::CliError;

#[derive(Debug, Clone, Serialize)]
pub struct CheckOut {
    pub name: String,
    pub pass: bool,
    /// `null` when the residual is not finite.
    pub residual: Option<f64>,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct TolOut {
    pub rel_eps: f64,
    pub abs_eps: f64,
}

impl From<Tolerance64> for TolOut {
    fn from(t: Tolerance64) -> Self {
        Self {
            rel_eps: t.rel_eps,
            abs_eps: t.abs_eps,
        }
    }
}

/// Command report printed as JSON on stdout.
#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub command: String,
    pub inputs: Vec<String>,
    pub seed: u64,
    pub tol: TolOut,
    pub pass: bool,
    pub checks: Vec<CheckOut>,
    pub result: Value,
}

fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

impl Report {
    pub fn new(command: &str, inputs: Vec<String>, seed: u64, tol: Tolerance64) -> Self {
        Self {
            command: command.to_owned(),
            inputs,
            seed,
            tol: tol.into(),
            pass: true,
            checks: Vec::new(),
            result: Value::Null,
        }
    }

    pub fn flag(&mut self, name: impl Into<String>, pass: bool, residual: f64) {
        self.pass &= pass;
        self.checks.push(CheckOut {
            name: name.into(),
            pass,
            residual: finite(residual),
        });
    }

    /// Passes iff `residual ≤ limit`.
    pub fn bound(&mut self, name: impl Into<String>, residual: f64, limit: f64) {
        self.flag(name, residual <= limit, residual);
    }

    pub fn extend(&mut self, prefix: &str, r: &CoreReport<f64>) {
        for c in &r.checks {
            self.flag(format!("{prefix}{}", c.name), c.pass, c.residual);
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn summary(&self) -> String {
        let failed: Vec<&CheckOut> = self.checks.iter().filter(|c| !c.pass).collect();
        let mut s = format!(
            "fatdist {}: {} ({} checks, {} failed)",
            self.command,
            if self.pass { "PASS" } else { "FAIL" },
            self.checks.len(),
            failed.len()
        );
        for c in failed {
            let res = c.residual.map_or("non-finite".to_owned(), |r| format!("{r:e}"));
            s.push_str(&format!("\n  failed: {} (residual {res})", c.name));
        }
        s
    }
}

#[derive(Debug, Serialize)]
struct ErrorBody<'a> {
    exit_code: i32,
    kind: &'static str,
    message: &'a str,
}

#[derive(Debug, Serialize)]
struct ErrorOut<'a> {
    command: &'a str,
    inputs: &'a [String],
    seed: u64,
    error: ErrorBody<'a>,
}

pub fn error_json(command: &str, inputs: &[String], seed: u64, e: &CliError) -> String {
    let out = ErrorOut {
        command,
        inputs,
        seed,
        error: ErrorBody {
            exit_code: e.exit.code(),
            kind: e.exit.name(),
            message: &e.message,
        },
    };
    serde_json::to_string_pretty(&out).expect("error serializes")
}
