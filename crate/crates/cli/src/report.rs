use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use serde::Serialize;
use serde_json::Value;

use crate::Failure;

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    /// The statement being checked, in words.
    pub claim: String,
    pub trials: usize,
    pub max_residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Check {
    /// Passes when `max_residual < tolerance`; NaN never passes.
    pub fn below(name: &str, claim: &str, trials: usize, max_residual: f64, tolerance: f64) -> Self {
        Check {
            name: name.into(),
            claim: claim.into(),
            trials,
            max_residual,
            tolerance,
            pass: max_residual < tolerance,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Environment {
    pub version: &'static str,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub command: String,
    pub environment: Environment,
    pub config: Value,
    pub checks: Vec<Check>,
    /// Measured quantities that are reported rather than asserted.
    pub measurements: BTreeMap<String, Value>,
    pub pass: bool,
}

impl Report {
    pub fn new<C: Serialize>(command: &str, seed: Option<u64>, config: &C) -> Self {
        Report {
            command: command.into(),
            environment: Environment {
                version: env!("CARGO_PKG_VERSION"),
                seed,
            },
            config: serde_json::to_value(config).expect("configs serialize"),
            checks: Vec::new(),
            measurements: BTreeMap::new(),
            pass: true,
        }
    }

    pub fn check(&mut self, c: Check) {
        self.pass &= c.pass;
        self.checks.push(c);
    }

    pub fn measure<V: Serialize>(&mut self, key: &str, v: V) {
        self.measurements
            .insert(key.into(), serde_json::to_value(v).expect("measurements serialize"));
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports serialize");
        s.push('\n');
        s
    }

    /// Writes to `path`, or to stdout without one.
    pub fn write(&self, path: Option<&Path>) -> Result<(), Failure> {
        let text = self.to_json();
        match path {
            Some(p) => std::fs::write(p, text)?,
            None => std::io::stdout().write_all(text.as_bytes())?,
        }
        Ok(())
    }
}

/// 17 significant digits, `.` decimal separator.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes a header and rows of numbers.
pub fn write_csv(path: &Path, header: &[String], rows: &[Vec<f64>]) -> Result<(), Failure> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header)?;
    for r in rows {
        w.write_record(r.iter().map(|&x| num(x)))?;
    }
    w.flush()?;
    Ok(())
}
