use std::collections::BTreeMap;

use rowsketch::bounds::SampleBudget;
use rowsketch::verify::TrialReport;
use serde::{Deserialize, Serialize};
use serde_json::Value;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Ok,
    TaskError,
    GateFailed,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorInfo {
    pub name: String,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub command: String,
    pub status: Status,
    pub parameters: BTreeMap<String, Value>,
    pub budget: Option<SampleBudget>,
    pub metrics: BTreeMap<String, f64>,
    pub trial_report: Option<TrialReport>,
    pub error: Option<ErrorInfo>,
    /// Wall-clock time; the only field that varies between identical runs.
    pub runtime_seconds: f64,
}

impl RunReport {
    pub fn new(command: &str, parameters: BTreeMap<String, Value>) -> Self {
        RunReport {
            command: command.to_string(),
            status: Status::Ok,
            parameters,
            budget: None,
            metrics: BTreeMap::new(),
            trial_report: None,
            error: None,
            runtime_seconds: 0.0,
        }
    }

    pub fn metric(&mut self, key: &str, value: f64) {
        debug_assert!(value.is_finite(), "metric {key} = {value}");
        self.metrics.insert(key.to_string(), value);
    }
}

/// Flatten serialized arguments into a key-value map, dropping unset flags.
pub fn parameters<A: Serialize>(args: &A) -> BTreeMap<String, Value> {
    let mut out = BTreeMap::new();
    if let Ok(Value::Object(map)) = serde_json::to_value(args) {
        flatten(&mut out, map);
    }
    out
}

fn flatten(out: &mut BTreeMap<String, Value>, map: serde_json::Map<String, Value>) {
    for (k, v) in map {
        match v {
            Value::Null => {}
            Value::Object(inner) => flatten(out, inner),
            v => {
                out.insert(k, v);
            }
        }
    }
}
