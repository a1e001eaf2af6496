//! Second-stage evaluation of a fixed selection.
//!
//! Once the extended network `E ∪ X` is fixed, the adversary delays at most
//! `Γ` activities to `θ̄ + θ̂` so as to maximise the longest path. The layered
//! recursion below solves this exactly in `O((Γ+1)·|E ∪ X|)`:
//!
//! ```text
//! V(j, γ) = max_{i ∈ pred(j)} max( V(i, γ) + θ̄_i , V(i, γ−1) + θ̄_i + θ̂_i )
//! ```
//!
//! with `V(0, 0) = 0` and `V(0, γ) = −∞` for `γ > 0`. The worst case is
//! `max_{γ ≤ Γ} V(n+1, γ)`, which is also the longest `(0,0) → (n+1,Γ)` path
//! of [`AugmentedNetwork`] thanks to its zero-weight sink arcs.

mod bruteforce;
mod certificate;
mod unimodularity;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::instance::ProjectInstance;
use crate::network::{topological_order, ReachMatrix, Selection};
use crate::{ActivityId, Time};

pub use bruteforce::{worst_case_makespan_bruteforce, BRUTEFORCE_MAX_JOBS, BRUTEFORCE_MAX_SCENARIOS};
pub use certificate::{check_fractional_certificate, CertificateCheck, FractionalCertificate};
pub use unimodularity::{
    branching_row_subset, build_adversary_constraint_matrix, ghouila_houri_refute, ConstraintMatrix, RowGroup,
    SignedRowSubset, TuVerdict, MAX_SIGNING_ROWS,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AdversaryError {
    #[error("extended network contains a cycle through {0:?}")]
    Cycle(Vec<ActivityId>),
    #[error("brute force refused: {jobs} jobs and Γ = {gamma} give {scenarios} scenarios")]
    TooManyScenarios { jobs: usize, gamma: usize, scenarios: u128 },
    #[error("certificate uses arc ({0}, {1}) which is not in E ∪ X")]
    UnknownArc(ActivityId, ActivityId),
    #[error("certificate has {got} delta entries, expected {jobs} or {all}")]
    DeltaLength { got: usize, jobs: usize, all: usize },
    #[error("sign search over {0} rows refused (limit {MAX_SIGNING_ROWS})")]
    TooManyRows(usize),
    #[error("row index {0} out of range")]
    RowOutOfRange(usize),
}

const NEG: Time = Time::MIN / 4;

/// Values `V(j, γ)` of the layered recursion. `None` marks unreachable states.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DpTable {
    gamma: usize,
    values: Vec<Vec<Option<Time>>>,
}

impl DpTable {
    pub fn gamma(&self) -> usize {
        self.gamma
    }

    pub fn value(&self, j: ActivityId, level: usize) -> Option<Time> {
        self.values[j][level]
    }

    /// One row per activity, one column per level.
    pub fn rows(&self) -> &[Vec<Option<Time>>] {
        &self.values
    }
}

/// Worst-case makespan with one maximising delay set and critical path.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DpOutcome {
    pub value: Time,
    pub delayed: Vec<ActivityId>,
    pub path: Vec<ActivityId>,
    pub table: DpTable,
}

struct Layered {
    gamma: usize,
    width: usize,
    v: Vec<Time>,
}

impl Layered {
    #[inline]
    fn get(&self, j: usize, g: usize) -> Time {
        self.v[j * self.width + g]
    }
}

fn layered_values(inst: &ProjectInstance, order: &[ActivityId], preds: &[Vec<ActivityId>], gamma: usize) -> Layered {
    let width = gamma + 1;
    let mut v = vec![NEG; inst.num_activities() * width];
    v[inst.source() * width] = 0;
    for &j in order {
        for &i in &preds[j] {
            let nominal = inst.nominal(i);
            let worst = nominal + inst.deviation(i);
            for g in 0..width {
                let mut best = v[j * width + g];
                let stay = v[i * width + g];
                if stay > NEG {
                    best = best.max(stay + nominal);
                }
                if g > 0 {
                    let up = v[i * width + g - 1];
                    if up > NEG {
                        best = best.max(up + worst);
                    }
                }
                v[j * width + g] = best;
            }
        }
    }
    Layered { gamma, width, v }
}

fn sink_best(inst: &ProjectInstance, layered: &Layered) -> (Time, usize) {
    let sink = inst.sink();
    let mut best = (NEG, 0);
    for g in 0..=layered.gamma {
        let val = layered.get(sink, g);
        if val > best.0 {
            best = (val, g);
        }
    }
    best
}

/// Worst-case makespan over a transitively closed order.
pub(crate) fn worst_case_value_on_order(inst: &ProjectInstance, order: &ReachMatrix, gamma: usize) -> Time {
    let n = inst.num_activities();
    let mut preds = vec![Vec::new(); n];
    for (i, j) in order.pairs() {
        preds[j].push(i);
    }
    let mut topo: Vec<ActivityId> = (0..n).collect();
    topo.sort_by_key(|&j| (preds[j].len(), j));
    let layered = layered_values(inst, &topo, &preds, gamma);
    sink_best(inst, &layered).0
}

/// Evaluates `max_{θ ∈ 𝒰(Γ)}` of the longest path of `E ∪ X`.
///
/// `gamma` may exceed the number of jobs; extra budget is simply unused.
pub fn worst_case_makespan_dp(
    inst: &ProjectInstance,
    sel: &Selection,
    gamma: usize,
) -> Result<DpOutcome, AdversaryError> {
    let n = inst.num_activities();
    let mut preds = vec![Vec::new(); n];
    let mut succs = vec![Vec::new(); n];
    for (i, j) in sel.extended_arcs(inst) {
        if i == j {
            return Err(AdversaryError::Cycle(vec![i]));
        }
        preds[j].push(i);
        succs[i].push(j);
    }
    let order = topological_order(&succs).map_err(AdversaryError::Cycle)?;
    let layered = layered_values(inst, &order, &preds, gamma);
    let (value, level) = sink_best(inst, &layered);

    let mut delayed = Vec::new();
    let mut path = vec![inst.sink()];
    let (mut j, mut g) = (inst.sink(), level);
    while j != inst.source() {
        let target = layered.get(j, g);
        let mut next = None;
        for &i in &preds[j] {
            let nominal = inst.nominal(i);
            let stay = layered.get(i, g);
            if stay > NEG && stay + nominal == target {
                next = Some((i, g, false));
                break;
            }
            if g > 0 {
                let up = layered.get(i, g - 1);
                if up > NEG && up + nominal + inst.deviation(i) == target {
                    next = Some((i, g - 1, true));
                    break;
                }
            }
        }
        let (i, ng, was_delayed) = next.expect("every finite state has a witness predecessor");
        if was_delayed {
            delayed.push(i);
        }
        path.push(i);
        j = i;
        g = ng;
    }
    path.reverse();
    delayed.sort_unstable();

    let table = DpTable {
        gamma,
        values: (0..n)
            .map(|j| {
                (0..=gamma)
                    .map(|g| Some(layered.get(j, g)).filter(|&x| x > NEG))
                    .collect()
            })
            .collect(),
    };
    Ok(DpOutcome {
        value,
        delayed,
        path,
        table,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AugmentedArcKind {
    /// `(i,γ) → (j,γ)` with weight `θ̄_i`.
    Alpha,
    /// `(i,γ) → (j,γ+1)` with weight `θ̄_i + θ̂_i`.
    Beta,
    /// `(n+1,γ) → (n+1,γ+1)` with weight 0.
    SinkLoop,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AugmentedArc {
    pub tail: (ActivityId, usize),
    pub head: (ActivityId, usize),
    pub weight: Time,
    pub kind: AugmentedArcKind,
}

/// Layered copy of `E ∪ X` with one level per unit of budget.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AugmentedNetwork {
    gamma: usize,
    activities: usize,
    source: ActivityId,
    sink: ActivityId,
    rank: Vec<usize>,
    arcs: Vec<AugmentedArc>,
}

impl AugmentedNetwork {
    pub fn build(inst: &ProjectInstance, sel: &Selection, gamma: usize) -> Result<Self, AdversaryError> {
        let extended = sel.extended_arcs(inst);
        let mut succs = vec![Vec::new(); inst.num_activities()];
        for &(i, j) in &extended {
            succs[i].push(j);
        }
        let order = topological_order(&succs).map_err(AdversaryError::Cycle)?;
        let mut rank = vec![0; inst.num_activities()];
        for (pos, &v) in order.iter().enumerate() {
            rank[v] = pos;
        }
        let mut arcs = Vec::new();
        for g in 0..=gamma {
            for &(i, j) in &extended {
                arcs.push(AugmentedArc {
                    tail: (i, g),
                    head: (j, g),
                    weight: inst.nominal(i),
                    kind: AugmentedArcKind::Alpha,
                });
            }
        }
        for g in 0..gamma {
            for &(i, j) in &extended {
                arcs.push(AugmentedArc {
                    tail: (i, g),
                    head: (j, g + 1),
                    weight: inst.worst_case(i),
                    kind: AugmentedArcKind::Beta,
                });
            }
        }
        for g in 0..gamma {
            arcs.push(AugmentedArc {
                tail: (inst.sink(), g),
                head: (inst.sink(), g + 1),
                weight: 0,
                kind: AugmentedArcKind::SinkLoop,
            });
        }
        Ok(Self {
            gamma,
            activities: inst.num_activities(),
            source: inst.source(),
            sink: inst.sink(),
            rank,
            arcs,
        })
    }

    pub fn gamma(&self) -> usize {
        self.gamma
    }

    pub fn arcs(&self) -> &[AugmentedArc] {
        &self.arcs
    }

    pub fn count(&self, kind: AugmentedArcKind) -> usize {
        self.arcs.iter().filter(|a| a.kind == kind).count()
    }

    /// Longest path from `(0, 0)` to `(n+1, Γ)`.
    pub fn longest_path(&self) -> Option<Time> {
        let levels = self.gamma + 1;
        let idx = |(v, g): (ActivityId, usize)| g * self.activities + v;
        let mut arcs: Vec<&AugmentedArc> = self.arcs.iter().collect();
        // (level, rank) of the tail is a topological key: α-arcs follow the
        // rank within a level, β- and sink arcs climb one level
        arcs.sort_by_key(|a| (a.tail.1, self.rank[a.tail.0], a.head.1, self.rank[a.head.0]));
        let mut dist = vec![None::<Time>; levels * self.activities];
        dist[idx((self.source, 0))] = Some(0);
        for a in arcs {
            if let Some(d) = dist[idx(a.tail)] {
                let h = &mut dist[idx(a.head)];
                *h = Some(h.map_or(d + a.weight, |x| x.max(d + a.weight)));
            }
        }
        dist[idx((self.sink, self.gamma))]
    }
}
