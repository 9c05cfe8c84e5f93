use std::collections::BTreeMap;
use std::io;
use std::path::Path;
use std::time::Instant;

use serde::Serialize;
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

use crate::config::AnalysisConfig;

/// One CSV line; every table shares these columns.
#[derive(Debug, Clone, Serialize)]
pub struct Row {
    pub case: String,
    pub t_or_xi: String,
    pub value: String,
    pub fit_exponent: String,
    pub predicted: String,
    pub source: String,
    pub verdict: String,
}

pub fn num(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{x}")
    }
}

pub fn opt_num(x: Option<f64>) -> String {
    x.map(num).unwrap_or_else(|| "none".into())
}

pub struct Report {
    command: String,
    digest: String,
    config: Value,
    fields: Map<String, Value>,
    tables: BTreeMap<String, Vec<Row>>,
    checks: Vec<Value>,
    failures: Vec<String>,
    timing: Vec<(String, f64)>,
}

/// Config echo without run-environment fields (threads, out_dir).
fn canonical(cfg: &AnalysisConfig) -> Value {
    let mut v = serde_json::to_value(cfg).expect("serializable config");
    if let Value::Object(m) = &mut v {
        m.remove("threads");
        m.remove("out_dir");
    }
    v
}

impl Report {
    pub fn new(command: &str, cfg: &AnalysisConfig) -> Self {
        let config = canonical(cfg);
        let bytes = serde_json::to_vec(&json!({ "command": command, "config": config })).expect("serializable");
        let digest = Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect();
        Report {
            command: command.into(),
            digest,
            config,
            fields: Map::new(),
            tables: BTreeMap::new(),
            checks: Vec::new(),
            failures: Vec::new(),
            timing: Vec::new(),
        }
    }

    pub fn row(&mut self, table: &str, row: Row) {
        self.tables.entry(table.into()).or_default().push(row);
    }

    pub fn set(&mut self, key: &str, v: Value) {
        self.fields.insert(key.into(), v);
    }

    pub fn check(&mut self, name: String, value: f64, target: String, passed: bool) {
        if !passed {
            self.failures.push(format!("{name} = {} (want {target})", num(value)));
        }
        self.checks.push(json!({ "name": name, "value": value, "target": target, "passed": passed }));
    }

    pub fn fail(&mut self, message: String) {
        self.failures.push(message);
    }

    pub fn failures(&self) -> Vec<String> {
        self.failures.clone()
    }

    pub fn time(&mut self, stage: &str, start: Instant) {
        self.seconds(stage, start.elapsed().as_secs_f64());
    }

    pub fn seconds(&mut self, stage: &str, s: f64) {
        self.timing.push((stage.into(), s));
    }

    /// Writes `summary.json`, one CSV per table and `timing.json`.
    pub fn write(&self, dir: &Path, threads: usize) -> io::Result<()> {
        std::fs::create_dir_all(dir)?;
        let mut summary = self.fields.clone();
        summary.insert("command".into(), json!(self.command));
        summary.insert("inputs_digest".into(), json!(self.digest));
        summary.insert("config".into(), self.config.clone());
        summary.insert("checks".into(), Value::Array(self.checks.clone()));
        summary.insert("failures".into(), json!(self.failures));
        summary.insert("status".into(), json!(if self.failures.is_empty() { "PASS" } else { "FAIL" }));
        let text = serde_json::to_string_pretty(&Value::Object(summary))?;
        std::fs::write(dir.join("summary.json"), text + "\n")?;
        for (name, rows) in &self.tables {
            let mut w = csv::Writer::from_path(dir.join(format!("{name}.csv")))?;
            for r in rows {
                w.serialize(r)?;
            }
            w.flush()?;
        }
        let stages: Vec<Value> = self.timing.iter().map(|(s, t)| json!({ "stage": s, "seconds": t })).collect();
        let timing = json!({ "threads": threads, "stages": stages });
        std::fs::write(dir.join("timing.json"), serde_json::to_string_pretty(&timing)? + "\n")?;
        Ok(())
    }
}
