//! Verification reports with stable JSON field names.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Comparison {
    /// residual < tolerance
    Below,
    /// residual > tolerance (negative controls)
    Above,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub residual: f64,
    pub tolerance: f64,
    pub comparison: Comparison,
    pub pass: bool,
    /// Quantity measured alongside the residual, if any.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub value: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub detail: Option<String>,
}

impl Check {
    pub fn below(name: impl Into<String>, residual: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            residual,
            tolerance,
            comparison: Comparison::Below,
            pass: residual.is_finite() && residual < tolerance,
            value: None,
            detail: None,
        }
    }

    pub fn above(name: impl Into<String>, residual: f64, threshold: f64) -> Self {
        Self {
            name: name.into(),
            residual,
            tolerance: threshold,
            comparison: Comparison::Above,
            pass: residual.is_finite() && residual > threshold,
            value: None,
            detail: None,
        }
    }

    /// A check that could not be evaluated.
    pub fn failed(name: impl Into<String>, tolerance: f64, error: impl std::fmt::Display) -> Self {
        Self {
            name: name.into(),
            residual: f64::NAN,
            tolerance,
            comparison: Comparison::Below,
            pass: false,
            value: None,
            detail: Some(format!("error: {error}")),
        }
    }

    pub fn with_value(mut self, v: f64) -> Self {
        self.value = Some(v);
        self
    }

    pub fn with_detail(mut self, d: impl Into<String>) -> Self {
        self.detail = Some(d.into());
        self
    }

    pub fn line(&self) -> String {
        let op = match self.comparison {
            Comparison::Below => "<",
            Comparison::Above => ">",
        };
        let mut s = format!(
            "[{}] {}: {:.3e} {op} {:.1e}",
            if self.pass { "PASS" } else { "FAIL" },
            self.name,
            self.residual,
            self.tolerance
        );
        if let Some(v) = self.value {
            s.push_str(&format!(" (value {v:.12})"));
        }
        if let Some(d) = &self.detail {
            s.push_str(&format!(" {d}"));
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub command: String,
    pub inputs: BTreeMap<String, String>,
    pub input_hash: String,
    pub checks: Vec<Check>,
    pub pass: bool,
}

impl RunReport {
    pub fn new(command: impl Into<String>, inputs: BTreeMap<String, String>, checks: Vec<Check>) -> Self {
        let command = command.into();
        let mut h = Sha256::new();
        h.update(command.as_bytes());
        for (k, v) in &inputs {
            h.update([0u8]);
            h.update(k.as_bytes());
            h.update([0u8]);
            h.update(v.as_bytes());
        }
        let input_hash = h.finalize().iter().map(|b| format!("{b:02x}")).collect();
        let pass = checks.iter().all(|c| c.pass);
        Self { command, inputs, input_hash, checks, pass }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pass_iff_all_checks_pass() {
        let ok = RunReport::new("x", BTreeMap::new(), vec![Check::below("a", 1e-12, 1e-9), Check::above("b", 1.0, 1e-3)]);
        assert!(ok.pass);
        let bad = RunReport::new("x", BTreeMap::new(), vec![Check::below("a", 1e-12, 1e-9), Check::below("c", f64::NAN, 1.0)]);
        assert!(!bad.pass);
        assert!(!Check::failed("e", 1.0, "boom").pass);
    }

    #[test]
    fn hash_depends_on_inputs() {
        let mut a = BTreeMap::new();
        a.insert("z".to_string(), "0,1".to_string());
        let mut b = a.clone();
        b.insert("z".to_string(), "0,2".to_string());
        let ra = RunReport::new("eta", a.clone(), vec![]);
        assert_eq!(ra.input_hash, RunReport::new("eta", a, vec![]).input_hash);
        assert_ne!(ra.input_hash, RunReport::new("eta", b, vec![]).input_hash);
        assert_eq!(ra.input_hash.len(), 64);
    }

    #[test]
    fn json_field_names() {
        let r = RunReport::new("verify-all", BTreeMap::new(), vec![Check::below("a", 0.0, 1.0).with_value(2.0)]);
        let v: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
        for k in ["command", "inputs", "input_hash", "checks", "pass"] {
            assert!(v.get(k).is_some(), "{k}");
        }
        assert_eq!(v["checks"][0]["comparison"], "below");
        assert_eq!(v["checks"][0]["value"], 2.0);
    }
}
