//! Verification reports: residual statistics and a verdict.

use serde::{Deserialize, Serialize};
use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Pass,
    PassWithTaint,
    Fail,
    Inconclusive,
}

impl Verdict {
    pub fn is_success(self) -> bool {
        matches!(self, Verdict::Pass | Verdict::PassWithTaint)
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "pass",
            Verdict::PassWithTaint => "pass-with-taint",
            Verdict::Fail => "fail",
            Verdict::Inconclusive => "inconclusive",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub location: String,
    pub margin: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub location: String,
    pub margin: f64,
    pub tainted: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub name: String,
    pub samples: String,
    pub sample_count: usize,
    pub min_margin: f64,
    pub mean_margin: f64,
    pub worst: Option<String>,
    pub violations: Vec<Violation>,
    pub tolerance: f64,
    pub taints: Vec<String>,
    pub verdict: Verdict,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub margins: Vec<Sample>,
}

impl VerificationReport {
    pub fn inconclusive(name: &str, samples: &str, reason: impl Into<String>) -> Self {
        VerificationReport {
            name: name.into(),
            samples: samples.into(),
            sample_count: 0,
            min_margin: f64::NAN,
            mean_margin: f64::NAN,
            worst: None,
            violations: Vec::new(),
            tolerance: 0.0,
            taints: Vec::new(),
            verdict: Verdict::Inconclusive,
            notes: vec![reason.into()],
            margins: Vec::new(),
        }
    }

    /// CSV `location,margin,tainted`.
    pub fn margins_csv(&self) -> String {
        let mut s = String::from("location,margin,tainted\n");
        for m in &self.margins {
            s.push_str(&format!("{},{:e},{}\n", m.location, m.margin, m.tainted));
        }
        s
    }
}

/// Accumulates margins; fails iff an untainted margin is below `−tolerance`.
#[derive(Clone, Debug)]
pub struct ReportBuilder {
    name: String,
    samples: String,
    tolerance: f64,
    entries: Vec<Sample>,
    taints: Vec<String>,
    notes: Vec<String>,
}

impl ReportBuilder {
    pub fn new(name: &str, samples: impl Into<String>, tolerance: f64) -> Self {
        ReportBuilder {
            name: name.into(),
            samples: samples.into(),
            tolerance,
            entries: Vec::new(),
            taints: Vec::new(),
            notes: Vec::new(),
        }
    }

    pub fn push(&mut self, location: impl Into<String>, margin: f64, tainted: bool) {
        self.entries.push(Sample { location: location.into(), margin, tainted });
    }

    pub fn taint(&mut self, msg: impl Into<String>) {
        let msg = msg.into();
        if !self.taints.contains(&msg) {
            self.taints.push(msg);
        }
    }

    pub fn note(&mut self, msg: impl Into<String>) {
        self.notes.push(msg.into());
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn finish(self) -> VerificationReport {
        let tol = self.tolerance;
        if self.entries.is_empty() {
            let mut r = VerificationReport::inconclusive(&self.name, &self.samples, "no samples");
            r.tolerance = tol;
            r.taints = self.taints;
            r.notes.extend(self.notes);
            return r;
        }
        let mut min = f64::INFINITY;
        let mut worst = None;
        let mut sum = 0.0;
        let mut violations = Vec::new();
        let mut any_taint = !self.taints.is_empty();
        for e in &self.entries {
            sum += e.margin;
            if e.margin < min || min.is_nan() {
                min = e.margin;
                worst = Some(e.location.clone());
            }
            any_taint |= e.tainted;
            if e.margin < -tol || e.margin.is_nan() {
                violations.push(Violation { location: e.location.clone(), margin: e.margin });
            }
        }
        let hard = self.entries.iter().any(|e| !e.tainted && (e.margin < -tol || e.margin.is_nan()));
        let verdict = if hard {
            Verdict::Fail
        } else if any_taint {
            Verdict::PassWithTaint
        } else {
            Verdict::Pass
        };
        let mut taints = self.taints;
        let tainted_samples = self.entries.iter().filter(|e| e.tainted).count();
        if tainted_samples > 0 {
            taints.push(format!("{tainted_samples} tainted samples"));
        }
        VerificationReport {
            name: self.name,
            samples: self.samples,
            sample_count: self.entries.len(),
            min_margin: min,
            mean_margin: sum / self.entries.len() as f64,
            worst,
            violations,
            tolerance: tol,
            taints,
            verdict,
            notes: self.notes,
            margins: self.entries,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn verdicts() {
        let mut b = ReportBuilder::new("x", "s", 1e-3);
        b.push("a", 0.5, false);
        b.push("b", -1e-4, false);
        let r = b.finish();
        assert_eq!(r.verdict, Verdict::Pass);
        assert_eq!(r.min_margin, -1e-4);
        assert_eq!(r.worst.as_deref(), Some("b"));

        let mut b = ReportBuilder::new("x", "s", 1e-3);
        b.push("a", -1.0, true);
        assert_eq!(b.finish().verdict, Verdict::PassWithTaint);

        let mut b = ReportBuilder::new("x", "s", 1e-3);
        b.push("a", -1.0, false);
        let r = b.finish();
        assert_eq!(r.verdict, Verdict::Fail);
        assert_eq!(r.violations.len(), 1);

        assert_eq!(ReportBuilder::new("x", "s", 0.0).finish().verdict, Verdict::Inconclusive);
    }

    #[test]
    fn json_round_trip() {
        let mut b = ReportBuilder::new("x", "s", 1e-3);
        b.push("a", 0.25, false);
        let r = b.finish();
        let s = serde_json::to_string(&r).unwrap();
        assert!(s.contains("\"verdict\":\"pass\""));
        let back: VerificationReport = serde_json::from_str(&s).unwrap();
        assert_eq!(back, r);
    }
}
