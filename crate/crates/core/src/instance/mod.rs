//! Project instances and the budgeted uncertainty set attached to them.

mod psplib;

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::network::topological_order;
use crate::{ActivityId, Rational, Time};

pub use psplib::{parse_psplib, parse_psplib_file, psplib_set_parameters, write_psplib};

#[derive(Debug, Error)]
pub enum InstanceError {
    #[error("line {line} [{section}]: {message}")]
    Parse {
        line: usize,
        section: String,
        message: String,
    },
    #[error("precedence graph contains a cycle through activities {0:?}")]
    Cycle(Vec<ActivityId>),
    #[error("invalid instance: {0}")]
    Invalid(String),
    #[error("scenario coefficient delta[{index}] = {value} lies outside [0, 1]")]
    Domain { index: usize, value: Rational },
    #[error("budget {gamma} exceeds the number of non-dummy activities ({n})")]
    Budget { gamma: usize, n: usize },
    #[error("instance JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("reading {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// Descriptive data carried alongside an instance.
///
/// The PSPLIB generator parameters are only known for files whose name
/// encodes a parameter set (e.g. `j3013_4.sm`).
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct InstanceMeta {
    pub name: String,
    #[serde(default)]
    pub network_complexity: Option<f64>,
    #[serde(default)]
    pub resource_factor: Option<f64>,
    #[serde(default)]
    pub resource_strength: Option<f64>,
    #[serde(default)]
    pub source_path: Option<String>,
    /// Set once the deviations have been derived from the nominal durations.
    #[serde(default)]
    pub robustified: bool,
}

/// A single-mode project with renewable resources and budgeted duration
/// uncertainty.
///
/// Activities are numbered `0..=n+1`; `0` and `n+1` are zero-duration dummies
/// that use no resources. Every activity is reachable from `0` and reaches
/// `n+1`. Instances are immutable once built.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "InstanceJson", into = "InstanceJson")]
pub struct ProjectInstance {
    nominal: Vec<Time>,
    deviation: Vec<Time>,
    requirements: Vec<Vec<i64>>,
    capacities: Vec<i64>,
    arcs: Vec<(ActivityId, ActivityId)>,
    meta: InstanceMeta,
    successors: Vec<Vec<ActivityId>>,
    predecessors: Vec<Vec<ActivityId>>,
    topo: Vec<ActivityId>,
}

impl ProjectInstance {
    /// Builds and validates an instance from raw per-activity data.
    ///
    /// `requirements[i][k]` is the demand of activity `i` for resource `k`.
    /// Arcs are kept verbatim, redundant ones included.
    pub fn new(
        nominal: Vec<Time>,
        deviation: Vec<Time>,
        requirements: Vec<Vec<i64>>,
        capacities: Vec<i64>,
        arcs: Vec<(ActivityId, ActivityId)>,
        meta: InstanceMeta,
    ) -> Result<Self, InstanceError> {
        let size = nominal.len();
        if size < 2 {
            return Err(InstanceError::Invalid(
                "an instance needs at least the two dummy activities".into(),
            ));
        }
        if deviation.len() != size || requirements.len() != size {
            return Err(InstanceError::Invalid(format!(
                "{} nominal durations, {} deviations and {} requirement rows",
                size,
                deviation.len(),
                requirements.len()
            )));
        }
        for (k, &cap) in capacities.iter().enumerate() {
            if cap <= 0 {
                return Err(InstanceError::Invalid(format!(
                    "capacity of resource {k} must be positive, got {cap}"
                )));
            }
        }
        for i in 0..size {
            if nominal[i] < 0 || deviation[i] < 0 {
                return Err(InstanceError::Invalid(format!(
                    "activity {i} has a negative duration or deviation"
                )));
            }
            if requirements[i].len() != capacities.len() {
                return Err(InstanceError::Invalid(format!(
                    "activity {i} lists {} requirements for {} resources",
                    requirements[i].len(),
                    capacities.len()
                )));
            }
            for (k, &r) in requirements[i].iter().enumerate() {
                if r < 0 {
                    return Err(InstanceError::Invalid(format!(
                        "activity {i} has negative demand {r} for resource {k}"
                    )));
                }
                if r > capacities[k] {
                    return Err(InstanceError::Invalid(format!(
                        "activity {i} demands {r} units of resource {k} (capacity {})",
                        capacities[k]
                    )));
                }
            }
        }
        let sink = size - 1;
        for dummy in [0, sink] {
            if nominal[dummy] != 0 || deviation[dummy] != 0 {
                return Err(InstanceError::Invalid(format!(
                    "dummy activity {dummy} must have zero duration and deviation"
                )));
            }
            if requirements[dummy].iter().any(|&r| r != 0) {
                return Err(InstanceError::Invalid(format!(
                    "dummy activity {dummy} must not use resources"
                )));
            }
        }

        let mut successors = vec![Vec::new(); size];
        let mut predecessors = vec![Vec::new(); size];
        for &(i, j) in &arcs {
            if i >= size || j >= size {
                return Err(InstanceError::Invalid(format!(
                    "arc ({i}, {j}) references an unknown activity"
                )));
            }
            if i == j {
                return Err(InstanceError::Cycle(vec![i]));
            }
            if !successors[i].contains(&j) {
                successors[i].push(j);
                predecessors[j].push(i);
            }
        }
        for list in successors.iter_mut().chain(predecessors.iter_mut()) {
            list.sort_unstable();
        }
        let topo = topological_order(&successors).map_err(InstanceError::Cycle)?;

        let forward = reach_from(0, &successors);
        let backward = reach_from(sink, &predecessors);
        for v in 0..size {
            if !forward[v] {
                return Err(InstanceError::Invalid(format!(
                    "activity {v} is not reachable from the source"
                )));
            }
            if !backward[v] {
                return Err(InstanceError::Invalid(format!("activity {v} does not reach the sink")));
            }
        }

        Ok(Self {
            nominal,
            deviation,
            requirements,
            capacities,
            arcs,
            meta,
            successors,
            predecessors,
            topo,
        })
    }

    /// Number of activities including both dummies, `|V| = n + 2`.
    pub fn num_activities(&self) -> usize {
        self.nominal.len()
    }

    /// Number of non-dummy activities `n`.
    pub fn num_jobs(&self) -> usize {
        self.nominal.len() - 2
    }

    pub fn num_resources(&self) -> usize {
        self.capacities.len()
    }

    pub fn source(&self) -> ActivityId {
        0
    }

    pub fn sink(&self) -> ActivityId {
        self.nominal.len() - 1
    }

    pub fn activities(&self) -> std::ops::Range<ActivityId> {
        0..self.nominal.len()
    }

    /// Non-dummy activities `1..=n`.
    pub fn jobs(&self) -> std::ops::Range<ActivityId> {
        1..self.nominal.len() - 1
    }

    pub fn nominal(&self, i: ActivityId) -> Time {
        self.nominal[i]
    }

    pub fn deviation(&self, i: ActivityId) -> Time {
        self.deviation[i]
    }

    /// Worst-case duration `θ̄_i + θ̂_i`.
    pub fn worst_case(&self, i: ActivityId) -> Time {
        self.nominal[i] + self.deviation[i]
    }

    pub fn nominal_durations(&self) -> &[Time] {
        &self.nominal
    }

    pub fn deviations(&self) -> &[Time] {
        &self.deviation
    }

    pub fn requirement(&self, i: ActivityId, k: usize) -> i64 {
        self.requirements[i][k]
    }

    pub fn requirements(&self, i: ActivityId) -> &[i64] {
        &self.requirements[i]
    }

    pub fn capacity(&self, k: usize) -> i64 {
        self.capacities[k]
    }

    pub fn capacities(&self) -> &[i64] {
        &self.capacities
    }

    /// Precedence arcs `E` in input order.
    pub fn arcs(&self) -> &[(ActivityId, ActivityId)] {
        &self.arcs
    }

    pub fn has_arc(&self, i: ActivityId, j: ActivityId) -> bool {
        self.successors[i].binary_search(&j).is_ok()
    }

    pub fn successors(&self, i: ActivityId) -> &[ActivityId] {
        &self.successors[i]
    }

    pub fn predecessors(&self, i: ActivityId) -> &[ActivityId] {
        &self.predecessors[i]
    }

    /// A topological order of `(V, E)`, lexicographically smallest.
    pub fn topological_order(&self) -> &[ActivityId] {
        &self.topo
    }

    pub fn meta(&self) -> &InstanceMeta {
        &self.meta
    }

    pub fn name(&self) -> &str {
        &self.meta.name
    }

    pub fn is_robustified(&self) -> bool {
        self.meta.robustified
    }

    /// Returns a copy with different deviations `θ̂`.
    pub fn with_deviations(&self, deviation: Vec<Time>) -> Result<Self, InstanceError> {
        Self::new(
            self.nominal.clone(),
            deviation,
            self.requirements.clone(),
            self.capacities.clone(),
            self.arcs.clone(),
            self.meta.clone(),
        )
    }

    pub fn with_meta(mut self, meta: InstanceMeta) -> Self {
        self.meta = meta;
        self
    }

    /// Sum of worst-case durations, a trivial upper bound on any makespan.
    pub fn worst_case_total(&self) -> Time {
        self.activities().map(|i| self.worst_case(i)).sum()
    }

    /// Canonical JSON text.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("instance serialization is infallible")
    }

    pub fn from_json(text: &str) -> Result<Self, InstanceError> {
        Ok(serde_json::from_str(text)?)
    }

    /// Loads an instance from a PSPLIB `.sm` file or a canonical `.json` file.
    pub fn load(path: impl AsRef<Path>) -> Result<Self, InstanceError> {
        let path = path.as_ref();
        if path.extension().is_some_and(|e| e == "json") {
            let text = std::fs::read_to_string(path).map_err(|source| InstanceError::Io {
                path: path.display().to_string(),
                source,
            })?;
            Self::from_json(&text)
        } else {
            parse_psplib_file(path)
        }
    }
}

fn reach_from(start: ActivityId, adjacency: &[Vec<ActivityId>]) -> Vec<bool> {
    let mut seen = vec![false; adjacency.len()];
    let mut stack = vec![start];
    seen[start] = true;
    while let Some(v) = stack.pop() {
        for &w in &adjacency[v] {
            if !seen[w] {
                seen[w] = true;
                stack.push(w);
            }
        }
    }
    seen
}

impl fmt::Display for ProjectInstance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} ({} jobs, {} resources, {} arcs)",
            if self.meta.name.is_empty() {
                "<unnamed>"
            } else {
                &self.meta.name
            },
            self.num_jobs(),
            self.num_resources(),
            self.arcs.len()
        )
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceJson {
    activities: Vec<ActivityId>,
    nominal: Vec<Time>,
    deviation: Vec<Time>,
    requirements: Vec<Vec<i64>>,
    capacities: Vec<i64>,
    arcs: Vec<[ActivityId; 2]>,
    meta: InstanceMeta,
}

impl From<ProjectInstance> for InstanceJson {
    fn from(inst: ProjectInstance) -> Self {
        Self {
            activities: inst.activities().collect(),
            arcs: inst.arcs.iter().map(|&(i, j)| [i, j]).collect(),
            nominal: inst.nominal,
            deviation: inst.deviation,
            requirements: inst.requirements,
            capacities: inst.capacities,
            meta: inst.meta,
        }
    }
}

impl TryFrom<InstanceJson> for ProjectInstance {
    type Error = InstanceError;

    fn try_from(json: InstanceJson) -> Result<Self, Self::Error> {
        let expected: Vec<ActivityId> = (0..json.nominal.len()).collect();
        if json.activities != expected {
            return Err(InstanceError::Invalid(
                "`activities` must list the ids 0..=n+1 in order".into(),
            ));
        }
        ProjectInstance::new(
            json.nominal,
            json.deviation,
            json.requirements,
            json.capacities,
            json.arcs.into_iter().map(|[i, j]| (i, j)).collect(),
            json.meta,
        )
    }
}

/// Convenience builder that adds the dummy source and sink.
///
/// Activities added with [`activity`](Self::activity) receive ids `1, 2, ...`
/// in insertion order. On [`build`](Self::build) the source is linked to every
/// activity without a predecessor and every activity without a successor is
/// linked to the sink.
#[derive(Debug, Clone, Default)]
pub struct InstanceBuilder {
    name: String,
    nominal: Vec<Time>,
    deviation: Vec<Time>,
    requirements: Vec<Vec<i64>>,
    capacities: Vec<i64>,
    arcs: Vec<(ActivityId, ActivityId)>,
}

impl InstanceBuilder {
    pub fn new(capacities: Vec<i64>) -> Self {
        Self {
            capacities,
            ..Self::default()
        }
    }

    pub fn name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn activity(mut self, nominal: Time, deviation: Time, requirement: Vec<i64>) -> Self {
        self.nominal.push(nominal);
        self.deviation.push(deviation);
        self.requirements.push(requirement);
        self
    }

    /// Adds `from → to`, both ids in `1..=n`.
    pub fn precedence(mut self, from: ActivityId, to: ActivityId) -> Self {
        self.arcs.push((from, to));
        self
    }

    pub fn build(self) -> Result<ProjectInstance, InstanceError> {
        let n = self.nominal.len();
        let sink = n + 1;
        let k = self.capacities.len();
        let mut has_pred = vec![false; n + 2];
        let mut has_succ = vec![false; n + 2];
        for &(i, j) in &self.arcs {
            if i == 0 || j == 0 || i > n || j > n {
                return Err(InstanceError::Invalid(format!(
                    "builder arc ({i}, {j}) must join activities in 1..={n}"
                )));
            }
            has_succ[i] = true;
            has_pred[j] = true;
        }
        let mut arcs = Vec::with_capacity(self.arcs.len() + 2 * n);
        arcs.extend((1..=n).filter(|&j| !has_pred[j]).map(|j| (0, j)));
        arcs.extend(self.arcs.iter().copied());
        arcs.extend((1..=n).filter(|&i| !has_succ[i]).map(|i| (i, sink)));
        if n == 0 {
            arcs.push((0, sink));
        }

        let mut nominal = vec![0];
        nominal.extend(self.nominal);
        nominal.push(0);
        let mut deviation = vec![0];
        deviation.extend(self.deviation);
        deviation.push(0);
        let mut requirements = vec![vec![0; k]];
        requirements.extend(self.requirements);
        requirements.push(vec![0; k]);

        ProjectInstance::new(
            nominal,
            deviation,
            requirements,
            self.capacities,
            arcs,
            InstanceMeta {
                name: self.name,
                ..InstanceMeta::default()
            },
        )
    }
}

/// Budget `Γ` of the uncertainty set, `0 ≤ Γ ≤ n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Budget(usize);

impl Budget {
    pub fn new(gamma: usize, inst: &ProjectInstance) -> Result<Self, InstanceError> {
        if gamma > inst.num_jobs() {
            return Err(InstanceError::Budget {
                gamma,
                n: inst.num_jobs(),
            });
        }
        Ok(Self(gamma))
    }

    pub fn get(self) -> usize {
        self.0
    }
}

impl fmt::Display for Budget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Sets `θ̂_i = ⌈θ̄_i / 2⌉` for every non-dummy activity.
///
/// Applied at most once: an instance already marked as robustified is
/// returned unchanged.
pub fn robustify(inst: &ProjectInstance) -> ProjectInstance {
    if inst.is_robustified() {
        return inst.clone();
    }
    let sink = inst.sink();
    let deviation = inst
        .activities()
        .map(|i| {
            if i == 0 || i == sink {
                0
            } else {
                (inst.nominal(i) + 1) / 2
            }
        })
        .collect();
    let mut out = inst
        .with_deviations(deviation)
        .expect("half-durations keep the instance valid");
    out.meta.robustified = true;
    out
}

/// Durations `θ_i = θ̄_i + δ_i θ̂_i` of the scenario `δ`.
///
/// The budget `Σδ ≤ Γ` is not checked here.
pub fn scenario_durations(inst: &ProjectInstance, delta: &[Rational]) -> Result<Vec<Rational>, InstanceError> {
    if delta.len() != inst.num_activities() {
        return Err(InstanceError::Invalid(format!(
            "scenario has {} coefficients for {} activities",
            delta.len(),
            inst.num_activities()
        )));
    }
    let zero = Rational::from_integer(0);
    let one = Rational::from_integer(1);
    delta
        .iter()
        .enumerate()
        .map(|(i, &d)| {
            if d < zero || d > one {
                return Err(InstanceError::Domain { index: i, value: d });
            }
            Ok(Rational::from_integer(inst.nominal(i)) + d * Rational::from_integer(inst.deviation(i)))
        })
        .collect()
}
