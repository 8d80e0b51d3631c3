use std::collections::BTreeMap;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use steiner_core::geometry::SpaceDescriptor;
use steiner_core::verifier::Verdict;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Text,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub command: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub space: Option<SpaceDescriptor>,
    #[serde(default)]
    pub verdicts: Vec<Verdict>,
    /// Command-specific output.
    #[serde(default)]
    pub result: Value,
    /// Cross-check against an independent route, when `--validate` is given.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub validation: Option<Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    /// Seconds per phase.
    #[serde(default)]
    pub timing: BTreeMap<String, f64>,
    pub version: String,
}

impl RunReport {
    pub fn new(command: &str) -> Self {
        RunReport {
            command: command.to_owned(),
            space: None,
            verdicts: Vec::new(),
            result: Value::Null,
            validation: None,
            error: None,
            timing: BTreeMap::new(),
            version: env!("CARGO_PKG_VERSION").to_owned(),
        }
    }

    pub fn failure(command: &str, error: String) -> Self {
        RunReport { error: Some(error), ..RunReport::new(command) }
    }

    /// Runs `f`, recording its duration under `phase`.
    pub fn timed<T>(&mut self, phase: &str, f: impl FnOnce() -> T) -> T {
        let t = Instant::now();
        let out = f();
        *self.timing.entry(phase.to_owned()).or_default() += t.elapsed().as_secs_f64();
        out
    }

    pub fn to_text(&self) -> String {
        let mut lines = vec![format!("command: {}", self.command)];
        if let Some(s) = &self.space {
            lines.push(format!("space: {s}"));
        }
        if let Some(e) = &self.error {
            lines.push(format!("error: {e}"));
        }
        for (i, v) in self.verdicts.iter().enumerate() {
            let w = v.witness.as_ref().map(|w| format!(" witness {}", compact(&serde_json::to_value(w).unwrap_or_default())));
            lines.push(format!("verdict {}: is_smt={} method={:?}{}", i + 1, v.is_smt, v.method, w.unwrap_or_default()));
        }
        flatten("", &self.result, &mut lines);
        if let Some(v) = &self.validation {
            flatten("validation.", v, &mut lines);
        }
        lines.join("\n")
    }
}

fn compact(v: &Value) -> String {
    serde_json::to_string(v).unwrap_or_default()
}

fn flatten(prefix: &str, v: &Value, out: &mut Vec<String>) {
    match v {
        Value::Null => {}
        Value::Object(map) => {
            for (k, x) in map {
                match x {
                    Value::Object(_) => flatten(&format!("{prefix}{k}."), x, out),
                    _ => out.push(format!("{prefix}{k}: {}", compact(x))),
                }
            }
        }
        other => out.push(format!("{}: {}", prefix.trim_end_matches('.'), compact(other))),
    }
}
