//! Constraint matrix of the linearised adversary and a Ghouila-Houri sign
//! search used to show it is not totally unimodular.
//!
//! A matrix is totally unimodular iff every subset of its rows can be signed
//! with ±1 so that each column of the signed sum lies in `{−1, 0, 1}`. One
//! subset without such a signing is a refutation.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::AdversaryError;
use crate::instance::ProjectInstance;
use crate::network::{topological_order, Selection};
use crate::ActivityId;

/// Largest row subset accepted by [`ghouila_houri_refute`].
pub const MAX_SIGNING_ROWS: usize = 25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RowGroup {
    /// Node-arc incidence (out − in) per activity.
    Flow,
    /// `w_ij − δ_i ≤ 0`.
    DelayCap,
    /// `w_ij − α_ij ≤ 0`.
    PathCap,
    /// `Σ δ_i ≤ Γ`.
    Budget,
    /// `δ_i ≤ 1`.
    UnitDelay,
}

/// Dense integer matrix with labelled rows and columns.
///
/// Columns are `α` per arc, then `w` per arc, then `δ` per activity; arcs are
/// in lexicographic order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstraintMatrix {
    arcs: Vec<(ActivityId, ActivityId)>,
    activities: usize,
    rows: Vec<Vec<i64>>,
    rhs: Vec<i64>,
    groups: Vec<RowGroup>,
    row_labels: Vec<String>,
    col_labels: Vec<String>,
}

impl ConstraintMatrix {
    pub fn rows(&self) -> &[Vec<i64>] {
        &self.rows
    }

    pub fn rhs(&self) -> &[i64] {
        &self.rhs
    }

    pub fn groups(&self) -> &[RowGroup] {
        &self.groups
    }

    pub fn row_labels(&self) -> &[String] {
        &self.row_labels
    }

    pub fn col_labels(&self) -> &[String] {
        &self.col_labels
    }

    pub fn arcs(&self) -> &[(ActivityId, ActivityId)] {
        &self.arcs
    }

    pub fn rows_in(&self, group: RowGroup) -> Vec<usize> {
        (0..self.rows.len()).filter(|&r| self.groups[r] == group).collect()
    }

    /// Row of `group` for arc `(i, j)` or activity `i` (pass `j = i`).
    pub fn row_of(&self, group: RowGroup, i: ActivityId, j: ActivityId) -> Option<usize> {
        let m = self.arcs.len();
        let n = self.activities;
        match group {
            RowGroup::Flow => (i < n).then_some(i),
            RowGroup::DelayCap => self.arcs.binary_search(&(i, j)).ok().map(|a| n + a),
            RowGroup::PathCap => self.arcs.binary_search(&(i, j)).ok().map(|a| n + m + a),
            RowGroup::Budget => Some(n + 2 * m),
            RowGroup::UnitDelay => (i < n).then_some(n + 2 * m + 1 + i),
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("row,group,rhs");
        for c in &self.col_labels {
            out.push(',');
            out.push_str(c);
        }
        out.push('\n');
        for (r, row) in self.rows.iter().enumerate() {
            let group = serde_json::to_value(self.groups[r])
                .ok()
                .and_then(|v| v.as_str().map(str::to_string))
                .unwrap_or_default();
            let _ = write!(out, "{},{},{}", self.row_labels[r], group, self.rhs[r]);
            for v in row {
                let _ = write!(out, ",{v}");
            }
            out.push('\n');
        }
        out
    }
}

pub fn build_adversary_constraint_matrix(
    inst: &ProjectInstance,
    sel: &Selection,
    gamma: usize,
) -> Result<ConstraintMatrix, AdversaryError> {
    let arcs = sel.extended_arcs(inst);
    let mut succs = vec![Vec::new(); inst.num_activities()];
    for &(i, j) in &arcs {
        succs[i].push(j);
    }
    topological_order(&succs).map_err(AdversaryError::Cycle)?;

    let n = inst.num_activities();
    let m = arcs.len();
    let cols = 2 * m + n;
    let alpha = |a: usize| a;
    let w = |a: usize| m + a;
    let delta = |i: usize| 2 * m + i;

    let mut col_labels = Vec::with_capacity(cols);
    col_labels.extend(arcs.iter().map(|(i, j)| format!("alpha[{i},{j}]")));
    col_labels.extend(arcs.iter().map(|(i, j)| format!("w[{i},{j}]")));
    col_labels.extend((0..n).map(|i| format!("delta[{i}]")));

    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    let mut groups = Vec::new();
    let mut row_labels = Vec::new();

    for v in 0..n {
        let mut row = vec![0i64; cols];
        for (a, &(i, j)) in arcs.iter().enumerate() {
            if i == v {
                row[alpha(a)] += 1;
            }
            if j == v {
                row[alpha(a)] -= 1;
            }
        }
        rows.push(row);
        rhs.push(if v == inst.source() {
            1
        } else if v == inst.sink() {
            -1
        } else {
            0
        });
        groups.push(RowGroup::Flow);
        row_labels.push(format!("flow[{v}]"));
    }
    for (a, &(i, j)) in arcs.iter().enumerate() {
        let mut row = vec![0i64; cols];
        row[w(a)] = 1;
        row[delta(i)] = -1;
        rows.push(row);
        rhs.push(0);
        groups.push(RowGroup::DelayCap);
        row_labels.push(format!("w_le_delta[{i},{j}]"));
    }
    for (a, &(i, j)) in arcs.iter().enumerate() {
        let mut row = vec![0i64; cols];
        row[alpha(a)] = -1;
        row[w(a)] = 1;
        rows.push(row);
        rhs.push(0);
        groups.push(RowGroup::PathCap);
        row_labels.push(format!("w_le_alpha[{i},{j}]"));
    }
    let mut budget = vec![0i64; cols];
    for i in 0..n {
        budget[delta(i)] = 1;
    }
    rows.push(budget);
    rhs.push(gamma as i64);
    groups.push(RowGroup::Budget);
    row_labels.push("budget".to_string());
    for i in 0..n {
        let mut row = vec![0i64; cols];
        row[delta(i)] = 1;
        rows.push(row);
        rhs.push(1);
        groups.push(RowGroup::UnitDelay);
        row_labels.push(format!("delta_le_1[{i}]"));
    }

    Ok(ConstraintMatrix {
        arcs,
        activities: n,
        rows,
        rhs,
        groups,
        row_labels,
        col_labels,
    })
}

/// The five-row subset that breaks total unimodularity: the flow row of the
/// first activity with two outgoing arcs, and the two capacity rows of each of
/// its first two outgoing arcs. `None` when every activity has out-degree ≤ 1.
pub fn branching_row_subset(matrix: &ConstraintMatrix) -> Option<Vec<usize>> {
    let arcs = matrix.arcs();
    let branching = (0..matrix.activities).find(|&v| arcs.iter().filter(|a| a.0 == v).count() >= 2)?;
    let mut out = arcs.iter().filter(|a| a.0 == branching).take(2);
    let (a1, a2) = (*out.next()?, *out.next()?);
    Some(vec![
        matrix.row_of(RowGroup::Flow, branching, branching)?,
        matrix.row_of(RowGroup::DelayCap, a1.0, a1.1)?,
        matrix.row_of(RowGroup::DelayCap, a2.0, a2.1)?,
        matrix.row_of(RowGroup::PathCap, a1.0, a1.1)?,
        matrix.row_of(RowGroup::PathCap, a2.0, a2.1)?,
    ])
}

/// A row subset together with a valid signing, when one exists.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignedRowSubset {
    pub rows: Vec<usize>,
    pub signs: Option<Vec<i8>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum TuVerdict {
    /// All `2^k` signings were tried and each left a column outside `{−1,0,1}`.
    NotTu { rows: Vec<usize>, assignments_checked: u64 },
    /// The subset admits this signing.
    Signed(SignedRowSubset),
}

impl TuVerdict {
    pub fn is_not_tu(&self) -> bool {
        matches!(self, TuVerdict::NotTu { .. })
    }
}

/// Exhaustive sign search over `rows` of `matrix`.
pub fn ghouila_houri_refute(matrix: &[Vec<i64>], rows: &[usize]) -> Result<TuVerdict, AdversaryError> {
    if rows.len() > MAX_SIGNING_ROWS {
        return Err(AdversaryError::TooManyRows(rows.len()));
    }
    if let Some(&bad) = rows.iter().find(|&&r| r >= matrix.len()) {
        return Err(AdversaryError::RowOutOfRange(bad));
    }
    let cols = matrix.first().map_or(0, Vec::len);
    let total: u64 = 1 << rows.len();
    for mask in 0..total {
        let sign = |p: usize| if mask >> p & 1 == 1 { -1 } else { 1 };
        let ok = (0..cols).all(|c| {
            let s: i64 = rows.iter().enumerate().map(|(p, &r)| sign(p) * matrix[r][c]).sum();
            (-1..=1).contains(&s)
        });
        if ok {
            return Ok(TuVerdict::Signed(SignedRowSubset {
                rows: rows.to_vec(),
                signs: Some((0..rows.len()).map(|p| sign(p) as i8).collect()),
            }));
        }
    }
    Ok(TuVerdict::NotTu {
        rows: rows.to_vec(),
        assignments_checked: total,
    })
}
