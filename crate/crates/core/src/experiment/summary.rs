use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::ResultRecord;

/// One row of the per-set table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub group: String,
    pub variant: String,
    /// Mean time over solved records.
    pub time: Option<f64>,
    /// Mean gap over records that are feasible but not solved.
    pub gap: Option<f64>,
    pub solved: usize,
}

/// `J30{p}` for PSPLIB names like `j30{p}_{i}`, `other` for anything else.
pub fn instance_set_label(name: &str) -> String {
    let lower = name.to_ascii_lowercase();
    if let Some(rest) = lower.strip_prefix("j30") {
        if let Some((param, idx)) = rest.split_once('_') {
            let digits = |s: &str| !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit());
            if digits(param) && digits(idx) {
                return format!("J30{param}");
            }
        }
    }
    "other".to_string()
}

fn mean(xs: &[f64]) -> Option<f64> {
    (!xs.is_empty()).then(|| xs.iter().sum::<f64>() / xs.len() as f64)
}

/// Groups by instance set (in natural order of the parameter number) and
/// variant.
pub fn summarize(records: &[ResultRecord]) -> Vec<SummaryRow> {
    type Key = (u32, String, String);
    let mut groups: BTreeMap<Key, (Vec<f64>, Vec<f64>)> = BTreeMap::new();
    for r in records {
        let group = instance_set_label(&r.instance);
        let rank = group
            .strip_prefix("J30")
            .and_then(|p| p.parse().ok())
            .unwrap_or(u32::MAX);
        let entry = groups.entry((rank, group, r.variant.clone())).or_default();
        if r.is_solved() {
            entry.0.push(r.time_s);
        } else if r.objective.is_some() {
            if let Some(g) = r.gap {
                entry.1.push(g);
            }
        }
    }
    groups
        .into_iter()
        .map(|((_, group, variant), (times, gaps))| SummaryRow {
            group,
            variant,
            time: mean(&times),
            gap: mean(&gaps),
            solved: times.len(),
        })
        .collect()
}

pub(super) fn to_csv(rows: &[SummaryRow]) -> String {
    let mut out = String::from("group,variant,time,gap,solv\n");
    let cell = |x: Option<f64>| x.map(|v| format!("{v:.3}")).unwrap_or_default();
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            r.group,
            r.variant,
            cell(r.time),
            cell(r.gap),
            r.solved
        );
    }
    out
}
