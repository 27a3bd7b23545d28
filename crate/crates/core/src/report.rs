//! JSON report shared by every command: `{"value", "sequence", "flips", "meta"}`.

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::formula::{Assignment, ReconfSequence};
use crate::rational::{format_ratio, parse_ratio, Rational};

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Report {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<String>,
    #[serde(default)]
    pub sequence: Vec<String>,
    #[serde(default)]
    pub flips: Vec<usize>,
    #[serde(default)]
    pub meta: Map<String, Value>,
}

impl Report {
    pub fn new() -> Self {
        Report::default()
    }

    pub fn with_value(mut self, v: &Rational) -> Self {
        self.value = Some(format_ratio(v));
        self
    }

    pub fn with_sequence(mut self, seq: &ReconfSequence) -> Self {
        self.sequence = seq.iter().map(ToString::to_string).collect();
        self.flips = seq.flips();
        self
    }

    pub fn meta(mut self, key: &str, v: impl Into<Value>) -> Self {
        self.meta.insert(key.to_string(), v.into());
        self
    }

    pub fn value_rational(&self) -> Result<Option<Rational>> {
        self.value.as_deref().map(parse_ratio).transpose()
    }

    pub fn assignments(&self) -> Result<Vec<Assignment>> {
        self.sequence
            .iter()
            .map(|s| {
                s.parse::<Assignment>()
                    .map_err(|e| Error::invalid(format!("sequence entry: {e}")))
            })
            .collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::invalid(format!("report JSON: {e}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    #[test]
    fn roundtrip() {
        let start: Assignment = "00".parse().unwrap();
        let seq = ReconfSequence::from_flips(&start, &[2, 1]);
        let r = Report::new()
            .with_value(&ratio(5, 6))
            .with_sequence(&seq)
            .meta("n", 2);
        let json = r.to_json();
        assert!(json.starts_with(r#"{"value":"5/6","sequence":["00","01","11"],"flips":[2,1]"#));
        let back = Report::from_json(&json).unwrap();
        assert_eq!(back, r);
        assert_eq!(back.value_rational().unwrap(), Some(ratio(5, 6)));
        assert_eq!(back.assignments().unwrap(), seq.steps());
    }
}
