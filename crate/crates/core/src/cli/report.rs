use super::{Format, RunConfig, SCHEMA_VERSION};
use crate::error::{Error, Result};
use serde::Serialize;
use serde_json::{json, Value};
use std::path::PathBuf;
use std::time::{SystemTime, UNIX_EPOCH};

/// A named check with its outcome; `detail` names the inputs involved.
#[derive(Clone, Debug, Serialize)]
pub struct Assertion {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Assertion {
    pub fn new(name: &str, passed: bool, detail: impl Into<String>) -> Assertion {
        Assertion {
            name: name.to_string(),
            passed,
            detail: detail.into(),
        }
    }
}

/// CSV table, one row per radius or per pair.
#[derive(Clone, Debug, Serialize)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: &str, header: &[&str]) -> Table {
        Table {
            name: name.to_string(),
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }
}

/// Formats a point as `a;b;c` for a single CSV cell.
pub fn point_cell(x: &[f64]) -> String {
    x.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(";")
}

#[derive(Clone, Debug)]
pub struct Report {
    pub operation: String,
    pub parameters: Value,
    pub estimate: Value,
    pub ci: Value,
    pub resolution: Value,
    pub assertions: Vec<Assertion>,
    pub tables: Vec<Table>,
}

impl Report {
    pub fn new(operation: &str) -> Report {
        Report {
            operation: operation.to_string(),
            parameters: Value::Null,
            estimate: Value::Null,
            ci: Value::Null,
            resolution: Value::Null,
            assertions: Vec::new(),
            tables: Vec::new(),
        }
    }

    /// Report of an operation that stopped with an error.
    pub fn failed(operation: &str, parameters: Value, err: &Error) -> Report {
        let mut r = Report::new(operation);
        r.parameters = parameters;
        r.assertions
            .push(Assertion::new("operation completed", false, err.to_string()));
        r
    }

    pub fn check(&mut self, name: &str, passed: bool, detail: impl Into<String>) {
        self.assertions.push(Assertion::new(name, passed, detail));
    }

    pub fn passed(&self) -> bool {
        self.assertions.iter().all(|a| a.passed)
    }

    /// Deterministic summary (no wall-clock data).
    pub fn summary(&self, system: &str, seed: u64) -> Value {
        let failures: Vec<Value> = self
            .assertions
            .iter()
            .filter(|a| !a.passed)
            .map(|a| json!({"name": a.name, "detail": a.detail}))
            .collect();
        json!({
            "schema": SCHEMA_VERSION,
            "system": system,
            "operation": self.operation,
            "parameters": self.parameters,
            "estimate": self.estimate,
            "ci": self.ci,
            "resolution": self.resolution,
            "seed": seed,
            "passed": self.passed(),
            "assertions": self.assertions,
            "failures": failures,
        })
    }

    pub fn write(
        &self,
        system: &str,
        config: &RunConfig,
        started: SystemTime,
        elapsed: f64,
    ) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(&config.out)?;
        let mut files = Vec::new();
        if config.format != Format::Csv {
            let path = config.out.join("summary.json");
            let text = serde_json::to_string_pretty(&self.summary(system, config.seed))
                .map_err(|e| Error::Io(e.to_string()))?;
            std::fs::write(&path, text + "\n")?;
            files.push(path);
        }
        if config.format != Format::Json {
            for t in &self.tables {
                let path = config.out.join(format!("{}.csv", t.name));
                let mut w = csv::Writer::from_path(&path).map_err(|e| Error::Io(e.to_string()))?;
                w.write_record(&t.header).map_err(|e| Error::Io(e.to_string()))?;
                for row in &t.rows {
                    w.write_record(row).map_err(|e| Error::Io(e.to_string()))?;
                }
                w.flush()?;
                files.push(path);
            }
        }
        let stamp = started
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        let run = json!({
            "schema": SCHEMA_VERSION,
            "timestamp": stamp,
            "elapsed_seconds": elapsed,
            "workers": config.workers,
        });
        let path = config.out.join("run.json");
        std::fs::write(&path, run.to_string() + "\n")?;
        files.push(path);
        Ok(files)
    }
}
