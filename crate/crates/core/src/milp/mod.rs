//! Solver-neutral mixed-integer model, the compact reformulation built on
//! it, LP-format export and an external solver bridge.

mod bridge;
mod compact;
mod lp;

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::heuristics::WarmStart;
use crate::instance::ProjectInstance;
use crate::{ActivityId, Rational, Time};

pub use bridge::{export_warm_start, solve_external, BridgeLimits, SolveOutcome, SolveStatus};
pub use compact::{build_compact, fix_order, CompactOptions};
pub use lp::{export_lp, parse_lp};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MilpError {
    #[error("variable `{0}` declared twice")]
    DuplicateVariable(String),
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("horizon {horizon} is below the nominal critical path {critical_path}")]
    InvalidHorizon { horizon: Time, critical_path: Time },
    #[error("time windows cover {got} activities, instance has {expected}")]
    WindowSize { got: usize, expected: usize },
    #[error("LP parse error on line {line}: {message}")]
    LpParse { line: usize, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VarKind {
    Continuous,
    Integer,
    Binary,
}

/// What a variable stands for, recovered from its name.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VarRole {
    Start {
        activity: ActivityId,
        level: usize,
    },
    Order {
        from: ActivityId,
        to: ActivityId,
    },
    Flow {
        from: ActivityId,
        to: ActivityId,
        resource: usize,
    },
    Other,
}

impl VarRole {
    pub fn of(name: &str) -> Self {
        let mut parts = name.split('_');
        let head = parts.next().unwrap_or("");
        let idx: Option<Vec<usize>> = parts.map(|p| p.parse().ok()).collect();
        match (head, idx.as_deref()) {
            ("S", Some(&[a, l])) => VarRole::Start { activity: a, level: l },
            ("y", Some(&[i, j])) => VarRole::Order { from: i, to: j },
            ("f", Some(&[i, j, k])) => VarRole::Flow {
                from: i,
                to: j,
                resource: k,
            },
            _ => VarRole::Other,
        }
    }
}

/// `None` bounds are infinite.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Variable {
    pub name: String,
    pub kind: VarKind,
    pub lower: Option<i64>,
    pub upper: Option<i64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sense {
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = ">=")]
    Ge,
    #[serde(rename = "=")]
    Eq,
}

impl fmt::Display for Sense {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sense::Le => "<=",
            Sense::Ge => ">=",
            Sense::Eq => "=",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Constraint {
    pub name: String,
    /// `(variable index, coefficient)`; one entry per variable, zero
    /// coefficients allowed.
    pub terms: Vec<(usize, i64)>,
    pub sense: Sense,
    pub rhs: i64,
}

/// A minimisation model with integer coefficients.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MilpModel {
    name: String,
    variables: Vec<Variable>,
    constraints: Vec<Constraint>,
    objective: Vec<(usize, i64)>,
    #[serde(skip)]
    index: HashMap<String, usize>,
}

fn merge_terms(terms: impl IntoIterator<Item = (usize, i64)>) -> Vec<(usize, i64)> {
    let mut out: Vec<(usize, i64)> = Vec::new();
    for (v, c) in terms {
        match out.iter_mut().find(|t| t.0 == v) {
            Some(t) => t.1 += c,
            None => out.push((v, c)),
        }
    }
    out
}

impl MilpModel {
    pub fn new(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            ..Self::default()
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn add_variable(
        &mut self,
        name: impl Into<String>,
        kind: VarKind,
        lower: Option<i64>,
        upper: Option<i64>,
    ) -> Result<usize, MilpError> {
        let name = name.into();
        if self.index.contains_key(&name) {
            return Err(MilpError::DuplicateVariable(name));
        }
        let idx = self.variables.len();
        self.index.insert(name.clone(), idx);
        self.variables.push(Variable {
            name,
            kind,
            lower,
            upper,
        });
        Ok(idx)
    }

    /// Adds a row; repeated variables are merged, zero sums are kept.
    pub fn add_constraint(
        &mut self,
        name: impl Into<String>,
        terms: impl IntoIterator<Item = (usize, i64)>,
        sense: Sense,
        rhs: i64,
    ) {
        self.constraints.push(Constraint {
            name: name.into(),
            terms: merge_terms(terms),
            sense,
            rhs,
        });
    }

    pub fn set_objective(&mut self, terms: impl IntoIterator<Item = (usize, i64)>) {
        self.objective = merge_terms(terms);
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn objective(&self) -> &[(usize, i64)] {
        &self.objective
    }

    pub fn var(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn role(&self, idx: usize) -> VarRole {
        VarRole::of(&self.variables[idx].name)
    }

    /// Rows whose name starts with `prefix` followed by `_`.
    pub fn count_rows(&self, prefix: &str) -> usize {
        self.constraints
            .iter()
            .filter(|c| c.name.strip_prefix(prefix).is_some_and(|r| r.starts_with('_')))
            .count()
    }

    pub fn count_vars(&self, prefix: &str) -> usize {
        self.variables
            .iter()
            .filter(|v| v.name.strip_prefix(prefix).is_some_and(|r| r.starts_with('_')))
            .count()
    }

    /// Fixes a variable through its bounds.
    pub fn fix(&mut self, name: &str, value: i64) -> Result<(), MilpError> {
        let idx = self
            .var(name)
            .ok_or_else(|| MilpError::UnknownVariable(name.to_string()))?;
        self.variables[idx].lower = Some(value);
        self.variables[idx].upper = Some(value);
        Ok(())
    }

    fn rebuild_index(&mut self) {
        self.index = self
            .variables
            .iter()
            .enumerate()
            .map(|(i, v)| (v.name.clone(), i))
            .collect();
    }

    /// Exact feasibility check. Variables missing from `values` count as 0.
    /// Returns the objective value or every violated bound and row.
    pub fn check_assignment(&self, values: &WarmStartAssignment) -> Result<Rational, Vec<String>> {
        let x: Vec<Rational> = self
            .variables
            .iter()
            .map(|v| values.values.get(&v.name).copied().unwrap_or_else(Rational::zero))
            .collect();
        let mut bad = Vec::new();
        for (v, val) in self.variables.iter().zip(&x) {
            if v.lower.is_some_and(|l| *val < Rational::from_integer(l)) {
                bad.push(format!("{} = {val} below lower bound", v.name));
            }
            if v.upper.is_some_and(|u| *val > Rational::from_integer(u)) {
                bad.push(format!("{} = {val} above upper bound", v.name));
            }
            if v.kind != VarKind::Continuous && !val.is_integer() {
                bad.push(format!("{} = {val} is not integral", v.name));
            }
        }
        for c in &self.constraints {
            let lhs: Rational = c.terms.iter().map(|&(v, a)| Rational::from_integer(a) * x[v]).sum();
            let rhs = Rational::from_integer(c.rhs);
            let ok = match c.sense {
                Sense::Le => lhs <= rhs,
                Sense::Ge => lhs >= rhs,
                Sense::Eq => lhs == rhs,
            };
            if !ok {
                bad.push(format!("{}: lhs {lhs} {} {rhs}", c.name, c.sense));
            }
        }
        if bad.is_empty() {
            Ok(self
                .objective
                .iter()
                .map(|&(v, a)| Rational::from_integer(a) * x[v])
                .sum())
        } else {
            Err(bad)
        }
    }

    /// Floating-point check with absolute tolerance `tol`.
    pub fn check_values(&self, values: &BTreeMap<String, f64>, tol: f64) -> Result<f64, Vec<String>> {
        let x: Vec<f64> = self
            .variables
            .iter()
            .map(|v| values.get(&v.name).copied().unwrap_or(0.0))
            .collect();
        let mut bad = Vec::new();
        for (v, &val) in self.variables.iter().zip(&x) {
            if v.lower.is_some_and(|l| val < l as f64 - tol) || v.upper.is_some_and(|u| val > u as f64 + tol) {
                bad.push(format!("{} = {val} outside its bounds", v.name));
            }
            if v.kind != VarKind::Continuous && (val - val.round()).abs() > tol {
                bad.push(format!("{} = {val} is not integral", v.name));
            }
        }
        for c in &self.constraints {
            let lhs: f64 = c.terms.iter().map(|&(v, a)| a as f64 * x[v]).sum();
            let rhs = c.rhs as f64;
            let ok = match c.sense {
                Sense::Le => lhs <= rhs + tol,
                Sense::Ge => lhs >= rhs - tol,
                Sense::Eq => (lhs - rhs).abs() <= tol,
            };
            if !ok {
                bad.push(format!("{}: lhs {lhs} {} {rhs}", c.name, c.sense));
            }
        }
        if bad.is_empty() {
            Ok(self.objective.iter().map(|&(v, a)| a as f64 * x[v]).sum())
        } else {
            Err(bad)
        }
    }
}

/// Exact values keyed by variable name.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct WarmStartAssignment {
    pub values: BTreeMap<String, Rational>,
}

impl WarmStartAssignment {
    pub fn get(&self, name: &str) -> Option<Rational> {
        self.values.get(name).copied()
    }

    pub fn to_f64(&self) -> BTreeMap<String, f64> {
        self.values
            .iter()
            .map(|(k, v)| (k.clone(), v.to_f64().unwrap_or(f64::NAN)))
            .collect()
    }
}

/// Values of every `S`, `y` and `f` variable for a warm start: leveled starts,
/// `y` as the closure of `E ∪ X` plus the sink self-pair, and the allocated
/// resource flows.
pub fn warm_start_assignment(inst: &ProjectInstance, ws: &WarmStart) -> WarmStartAssignment {
    let int = Rational::from_integer;
    let mut values = BTreeMap::new();
    for i in inst.activities() {
        for (g, &s) in ws.leveled_starts[i].iter().enumerate() {
            values.insert(format!("S_{i}_{g}"), int(s));
        }
    }
    let sink = inst.sink();
    for i in inst.activities() {
        for j in inst.activities() {
            let on = ws.order().reaches(i, j) || (i == sink && j == sink);
            values.insert(format!("y_{i}_{j}"), int(on as i64));
            for k in 0..inst.num_resources() {
                let f = ws.flows.get(&(i, j, k)).copied().unwrap_or(0);
                values.insert(format!("f_{i}_{j}_{k}"), int(f));
            }
        }
    }
    WarmStartAssignment { values }
}
