use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use bellnet_core::NetworkSpec;

pub const SCHEMA: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Status {
    Pass,
    Fail,
    Skip,
}

impl Status {
    pub fn from_bool(ok: bool) -> Status {
        if ok {
            Status::Pass
        } else {
            Status::Fail
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Skip => "SKIP",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub name: String,
    pub status: Status,
    pub detail: String,
}

impl Verdict {
    pub fn new(name: impl Into<String>, status: Status, detail: impl Into<String>) -> Verdict {
        Verdict {
            name: name.into(),
            status,
            detail: detail.into(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LEntry {
    pub l: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omega: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub g: Option<String>,
    /// B-side setting label per type-B observer.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub settings: BTreeMap<String, String>,
    /// Value of `⟨B_l⟩` per model.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub values: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema: u32,
    pub command: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spec_digest: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default)]
    pub per_l: Vec<LEntry>,
    #[serde(default)]
    pub bounds: BTreeMap<String, f64>,
    #[serde(default)]
    pub verdicts: Vec<Verdict>,
    #[serde(default)]
    pub details: serde_json::Value,
    pub wall_time_ms: u64,
}

impl RunReport {
    pub fn new(command: Vec<String>) -> RunReport {
        RunReport {
            schema: SCHEMA,
            command,
            spec_digest: None,
            seed: None,
            per_l: Vec::new(),
            bounds: BTreeMap::new(),
            verdicts: Vec::new(),
            details: serde_json::Value::Null,
            wall_time_ms: 0,
        }
    }

    pub fn failed(&self) -> bool {
        self.verdicts.iter().any(|v| v.status == Status::Fail)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_table(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "command: {}", self.command.join(" "));
        if let Some(d) = &self.spec_digest {
            let _ = writeln!(s, "spec digest: {d}");
        }
        if let Some(seed) = self.seed {
            let _ = writeln!(s, "seed: {seed}");
        }
        if !self.per_l.is_empty() {
            let models: Vec<&String> = {
                let mut m: Vec<&String> = self.per_l.iter().flat_map(|r| r.values.keys()).collect();
                m.sort();
                m.dedup();
                m
            };
            let _ = write!(s, "{:<8} {:>10}", "l", "omega");
            for m in &models {
                let _ = write!(s, " {m:>12}");
            }
            let _ = writeln!(s, "  g");
            for r in &self.per_l {
                let omega = r.omega.map_or("-".to_string(), |w| format!("{w:.6}"));
                let _ = write!(s, "{:<8} {omega:>10}", r.l);
                for m in &models {
                    let v = r.values.get(*m).map_or("-".to_string(), |v| format!("{v:.6}"));
                    let _ = write!(s, " {v:>12}");
                }
                let _ = write!(s, "  {}", r.g.as_deref().unwrap_or(""));
                for (obs, label) in &r.settings {
                    let _ = write!(s, " {obs}={label}");
                }
                let _ = writeln!(s);
            }
        }
        if !self.bounds.is_empty() {
            let _ = writeln!(s, "bounds:");
            for (k, v) in &self.bounds {
                let _ = writeln!(s, "  {k:<16} {v:.9}");
            }
        }
        for v in &self.verdicts {
            let _ = writeln!(s, "{} {}: {}", v.status.as_str(), v.name, v.detail);
        }
        let _ = writeln!(s, "wall time: {} ms", self.wall_time_ms);
        s
    }
}

/// SHA-256 of the canonical document of a network.
pub fn spec_digest(spec: &NetworkSpec) -> String {
    hex::encode(Sha256::digest(spec.to_document().as_bytes()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn failed_only_on_fail_rows() {
        let mut r = RunReport::new(vec!["bellnet".into()]);
        r.verdicts.push(Verdict::new("a", Status::Pass, ""));
        r.verdicts.push(Verdict::new("b", Status::Skip, ""));
        assert!(!r.failed());
        r.verdicts.push(Verdict::new("c", Status::Fail, ""));
        assert!(r.failed());
    }

    #[test]
    fn json_carries_schema_and_uppercase_status() {
        let mut r = RunReport::new(vec!["bellnet".into(), "bounds".into()]);
        r.verdicts.push(Verdict::new("x", Status::Skip, "guard"));
        let v: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(v["schema"], 1);
        assert_eq!(v["verdicts"][0]["status"], "SKIP");
    }

    #[test]
    fn table_has_one_row_per_l() {
        let mut r = RunReport::new(vec!["bellnet".into()]);
        for l in ["0", "1"] {
            r.per_l.push(LEntry {
                l: l.into(),
                omega: Some(0.5),
                values: BTreeMap::from([("quantum".to_string(), 0.5)]),
                ..LEntry::default()
            });
        }
        let t = r.to_table();
        assert_eq!(t.lines().filter(|line| line.contains("0.500000")).count(), 2);
        assert!(t.contains("quantum"));
    }
}
