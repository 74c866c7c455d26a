//! Consolidation of report files.

use katolab::report::{Verdict, VerificationReport};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use std::collections::BTreeMap;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub counts: BTreeMap<String, usize>,
    pub reports: Vec<VerificationReport>,
}

/// Reports inside a file: a bare report, a step output `{"report": ...}`, or a summary.
pub fn extract(path: &str, text: &str) -> Result<Vec<VerificationReport>, String> {
    let value: Value = serde_json::from_str(text).map_err(|e| format!("{path}: not JSON: {e}"))?;
    let parse = |v: &Value| serde_json::from_value::<VerificationReport>(v.clone()).map_err(|e| format!("{path}: schema mismatch: {e}"));
    if let Some(list) = value.get("reports").and_then(Value::as_array) {
        return list.iter().map(parse).collect();
    }
    if let Some(r) = value.get("report") {
        return Ok(vec![parse(r)?]);
    }
    Ok(vec![parse(&value)?])
}

/// Union sorted by name; repeated names get `_2`, `_3`, ... suffixes, with a warning each.
pub fn merge(mut reports: Vec<VerificationReport>) -> (Summary, Vec<String>) {
    reports.sort_by(|a, b| a.name.cmp(&b.name));
    let mut seen: BTreeMap<String, usize> = BTreeMap::new();
    let mut warnings = Vec::new();
    for r in reports.iter_mut() {
        let count = seen.entry(r.name.clone()).or_insert(0);
        *count += 1;
        if *count > 1 {
            let renamed = format!("{}_{}", r.name, count);
            warnings.push(format!("duplicate report name `{}` renamed to `{renamed}`", r.name));
            r.name = renamed;
        }
    }
    let mut counts = BTreeMap::new();
    for r in &reports {
        *counts.entry(r.verdict.to_string()).or_insert(0) += 1;
    }
    (Summary { counts, reports }, warnings)
}

/// Histogram CSV `bin_lo,bin_hi,count` of the per-sample margins.
pub fn histogram(report: &VerificationReport, bins: usize) -> String {
    let mut s = String::from("bin_lo,bin_hi,count\n");
    let m: Vec<f64> = report.margins.iter().map(|m| m.margin).filter(|v| v.is_finite()).collect();
    if m.is_empty() {
        return s;
    }
    let lo = m.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = m.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let width = if hi > lo { (hi - lo) / bins as f64 } else { 1.0 };
    let mut counts = vec![0usize; bins];
    for v in m {
        counts[(((v - lo) / width) as usize).min(bins - 1)] += 1;
    }
    for (k, c) in counts.iter().enumerate() {
        s.push_str(&format!("{:e},{:e},{c}\n", lo + k as f64 * width, lo + (k + 1) as f64 * width));
    }
    s
}

/// 0 when every verdict is a pass, 2 on any failure, otherwise 3 (some inconclusive).
pub fn exit_code<'a>(verdicts: impl IntoIterator<Item = &'a Verdict>) -> i32 {
    let (mut fail, mut inconclusive) = (false, false);
    for v in verdicts {
        match v {
            Verdict::Fail => fail = true,
            Verdict::Inconclusive => inconclusive = true,
            _ => {}
        }
    }
    if fail {
        2
    } else if inconclusive {
        3
    } else {
        0
    }
}
