use std::collections::BTreeMap;

use serde::Serialize;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Envelope for every machine-readable CLI result. `timing_ms` is present only
/// when asked for, so default output stays byte-identical across runs.
#[derive(Debug, Serialize)]
pub struct Report<'a, T: Serialize> {
    pub command: &'a str,
    pub inputs: BTreeMap<String, String>,
    pub result: &'a T,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing_ms: Option<u128>,
    pub version: &'static str,
}

impl<'a, T: Serialize> Report<'a, T> {
    pub fn new(command: &'a str, inputs: BTreeMap<String, String>, result: &'a T) -> Self {
        Report { command, inputs, result, timing_ms: None, version: VERSION }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report values serialize");
        s.push('\n');
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn field_order_and_timing() {
        let r = Report::new("dq", BTreeMap::from([("q".to_string(), "2.2".to_string())]), &1);
        let s = r.to_json();
        let pos = |k: &str| s.find(k).unwrap();
        assert!(pos("\"command\"") < pos("\"inputs\"") && pos("\"result\"") < pos("\"version\""));
        assert!(!s.contains("timing_ms"));
        let r = Report { timing_ms: Some(3), ..r };
        assert!(r.to_json().contains("\"timing_ms\": 3"));
    }
}
