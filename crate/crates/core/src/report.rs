//! Machine-readable verification reports.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Verdict {
    Pass,
    Fail,
    /// A computed outcome for a case the theorem does not claim.
    Finding,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
            Verdict::Finding => "FINDING",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Window {
    pub from: u32,
    pub to: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceOutcome {
    /// A monomial, or `block [..]` for a whole multidegree block.
    pub monomial: String,
    pub degree: u32,
    pub outcome: String,
    pub mode: String,
    pub status: Verdict,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certificate: Option<Value>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub statement: String,
    pub params: BTreeMap<String, Value>,
    pub window: Window,
    pub instances: Vec<InstanceOutcome>,
    pub verdict: Verdict,
    pub timing_ms: u64,
}

impl VerificationReport {
    pub fn new(statement: &str, window: Window) -> Self {
        VerificationReport {
            statement: statement.into(),
            params: BTreeMap::new(),
            window,
            instances: Vec::new(),
            verdict: Verdict::Pass,
            timing_ms: 0,
        }
    }

    pub fn param(mut self, key: &str, v: impl Into<Value>) -> Self {
        self.params.insert(key.into(), v.into());
        self
    }

    /// Verdict from the instances: any FAIL fails; PASS if at least one
    /// instance passed; FINDING if only findings were recorded.
    pub fn finish(&mut self) {
        let statuses: Vec<Verdict> = self.instances.iter().map(|i| i.status).collect();
        self.verdict = if statuses.contains(&Verdict::Fail) {
            Verdict::Fail
        } else if statuses.contains(&Verdict::Pass) || statuses.is_empty() {
            Verdict::Pass
        } else {
            Verdict::Finding
        };
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports are plain data")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Parse { pos: e.column(), msg: e.to_string() })
    }

    /// Canonical JSON with `timing_ms` zeroed, for determinism checks.
    pub fn to_json_without_timing(&self) -> String {
        let mut r = self.clone();
        r.timing_ms = 0;
        r.to_json()
    }

    pub fn count(&self, v: Verdict) -> usize {
        self.instances.iter().filter(|i| i.status == v).count()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_lossless() {
        let mut r = VerificationReport::new("demo", Window { from: 8, to: 10 }).param("p", 7).param("module", "V1+V2");
        r.instances.push(InstanceOutcome {
            monomial: "V1a_0^7*V2a_0".into(),
            degree: 8,
            outcome: "member".into(),
            mode: "exact".into(),
            status: Verdict::Finding,
            certificate: Some(serde_json::json!({"rank": 3, "pivots": [0, 2, 5]})),
        });
        r.instances.push(InstanceOutcome {
            monomial: "block [1,7]".into(),
            degree: 8,
            outcome: "contained".into(),
            mode: "certified-modular(1073741827)".into(),
            status: Verdict::Pass,
            certificate: None,
        });
        r.finish();
        r.timing_ms = 12;
        assert_eq!(r.verdict, Verdict::Pass);
        let back = VerificationReport::from_json(&r.to_json()).unwrap();
        assert_eq!(back, r);
        assert!(r.to_json().contains("\"verdict\": \"PASS\""));
    }

    #[test]
    fn verdict_aggregation() {
        let mut r = VerificationReport::new("x", Window { from: 0, to: 0 });
        let inst = |s| InstanceOutcome {
            monomial: String::new(),
            degree: 0,
            outcome: String::new(),
            mode: String::new(),
            status: s,
            certificate: None,
        };
        r.instances = vec![inst(Verdict::Finding)];
        r.finish();
        assert_eq!(r.verdict, Verdict::Finding);
        r.instances.push(inst(Verdict::Fail));
        r.finish();
        assert_eq!(r.verdict, Verdict::Fail);
    }
}
