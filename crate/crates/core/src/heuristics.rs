//! LFT serial schedule, the warm start derived from it, and time windows
//! for big-M tightening.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::adversary::worst_case_makespan_dp;
use crate::instance::ProjectInstance;
use crate::network::{selection_from_schedule, ReachMatrix, Selection};
use crate::{ActivityId, Time};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum HeuristicsError {
    #[error("horizon {horizon} is below the nominal critical path {critical_path}")]
    InvalidHorizon { horizon: Time, critical_path: Time },
}

/// Start times together with the durations they were computed for.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Schedule {
    pub start: Vec<Time>,
    pub makespan: Time,
    #[serde(skip)]
    pub durations_used: Vec<Time>,
}

impl Schedule {
    pub fn finish(&self, i: ActivityId) -> Time {
        self.start[i] + self.durations_used[i]
    }

    /// Checks precedences and a unit-step resource profile. A zero-duration
    /// activity with demand occupies its start instant.
    pub fn audit(&self, inst: &ProjectInstance) -> Result<(), String> {
        if self.start[inst.source()] != 0 {
            return Err("source does not start at 0".into());
        }
        for &(i, j) in inst.arcs() {
            if self.start[j] < self.finish(i) {
                return Err(format!("arc ({i}, {j}) violated"));
            }
        }
        let horizon = self.makespan.max(0) as usize + 1;
        let mut usage = vec![vec![0i64; inst.num_resources()]; horizon];
        for i in inst.activities() {
            let from = self.start[i] as usize;
            let to = self.finish(i).max(self.start[i] + 1) as usize;
            for slot in usage.iter_mut().take(to.min(horizon)).skip(from) {
                for (u, r) in slot.iter_mut().zip(inst.requirements(i)) {
                    *u += r;
                }
            }
        }
        for (t, slot) in usage.iter().enumerate() {
            for (k, (&u, &cap)) in slot.iter().zip(inst.capacities()).enumerate() {
                if u > cap {
                    return Err(format!("resource {k} overloaded at t = {t}: {u} > {cap}"));
                }
            }
        }
        Ok(())
    }
}

/// Earliest starts by a forward pass over `E` with nominal durations.
pub fn earliest_starts(inst: &ProjectInstance) -> Vec<Time> {
    let mut es = vec![0; inst.num_activities()];
    for &j in inst.topological_order() {
        for &i in inst.predecessors(j) {
            es[j] = es[j].max(es[i] + inst.nominal(i));
        }
    }
    es
}

/// Latest finishes by a backward pass over `E` with nominal durations.
fn latest_finishes(inst: &ProjectInstance, horizon: Time) -> Vec<Time> {
    let mut lf = vec![horizon; inst.num_activities()];
    for &i in inst.topological_order().iter().rev() {
        for &j in inst.successors(i) {
            lf[i] = lf[i].min(lf[j] - inst.nominal(j));
        }
    }
    lf
}

/// Serial schedule generation in order of nondecreasing latest finish time
/// (ties by id), each activity at its earliest feasible start.
pub fn lft_schedule(inst: &ProjectInstance) -> Schedule {
    let n = inst.num_activities();
    let lft = latest_finishes(inst, inst.nominal_durations().iter().sum());
    let caps = inst.capacities();
    let mut usage: Vec<Vec<i64>> = Vec::new();
    let mut start = vec![0; n];
    let mut done = vec![false; n];
    let mut missing: Vec<usize> = (0..n).map(|j| inst.predecessors(j).len()).collect();

    for _ in 0..n {
        let j = (0..n)
            .filter(|&j| !done[j] && missing[j] == 0)
            .min_by_key(|&j| (lft[j], j))
            .expect("acyclic instance always has an eligible activity");
        let demand = inst.requirements(j);
        let occupied = if demand.iter().any(|&r| r > 0) {
            inst.nominal(j).max(1)
        } else {
            inst.nominal(j)
        } as usize;
        let mut t = inst
            .predecessors(j)
            .iter()
            .map(|&i| start[i] + inst.nominal(i))
            .max()
            .unwrap_or(0) as usize;
        loop {
            if usage.len() < t + occupied {
                usage.resize(t + occupied, vec![0; caps.len()]);
            }
            let blocked =
                (t..t + occupied).find(|&tau| usage[tau].iter().zip(demand).zip(caps).any(|((u, r), c)| u + r > *c));
            match blocked {
                Some(tau) => t = tau + 1,
                None => break,
            }
        }
        for slot in &mut usage[t..t + occupied] {
            for (u, r) in slot.iter_mut().zip(demand) {
                *u += r;
            }
        }
        start[j] = t as Time;
        done[j] = true;
        for &s in inst.successors(j) {
            missing[s] -= 1;
        }
    }
    Schedule {
        makespan: start[inst.sink()],
        start,
        durations_used: inst.nominal_durations().to_vec(),
    }
}

/// Earliest starts and latest finishes used to tighten big-M coefficients.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TimeWindows {
    pub es: Vec<Time>,
    pub lf: Vec<Time>,
    pub horizon: Time,
}

impl TimeWindows {
    /// `max(0, LF_i − ES_j)`.
    pub fn big_m(&self, i: ActivityId, j: ActivityId) -> Time {
        (self.lf[i] - self.es[j]).max(0)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("activity,ES,LF\n");
        for (i, (es, lf)) in self.es.iter().zip(&self.lf).enumerate() {
            let _ = writeln!(out, "{i},{es},{lf}");
        }
        out
    }
}

/// Windows relative to `horizon`, which must bound the optimum from above.
///
/// Both passes use nominal durations over `E`. In a schedule with minimal
/// start times and worst-case makespan at most `horizon`, every activity
/// together with its possible delay still finishes by `LF_i`, because the
/// rest of the network can be traversed at nominal speed.
pub fn time_windows(inst: &ProjectInstance, horizon: Time) -> Result<TimeWindows, HeuristicsError> {
    let es = earliest_starts(inst);
    let critical_path = es[inst.sink()];
    if horizon < critical_path {
        return Err(HeuristicsError::InvalidHorizon { horizon, critical_path });
    }
    Ok(TimeWindows {
        es,
        lf: latest_finishes(inst, horizon),
        horizon,
    })
}

/// Heuristic first-stage solution with everything the compact model needs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WarmStart {
    pub gamma: usize,
    pub schedule: Schedule,
    pub selection: Selection,
    /// `S_{jγ}`, indexed `[j][γ]`.
    pub leveled_starts: Vec<Vec<Time>>,
    pub ub: Time,
    /// Resource flow `f_{ijk}`; absent entries are zero.
    #[serde(skip)]
    pub flows: BTreeMap<(ActivityId, ActivityId, usize), i64>,
    #[serde(skip)]
    order: Option<ReachMatrix>,
}

impl WarmStart {
    /// Closure of `E ∪ X`.
    pub fn order(&self) -> &ReachMatrix {
        self.order.as_ref().expect("set by warm_start")
    }
}

/// Minimal leveled starts `S_{jγ}` over a transitively closed order.
pub fn leveled_starts(inst: &ProjectInstance, order: &ReachMatrix, gamma: usize) -> Vec<Vec<Time>> {
    let n = inst.num_activities();
    let mut preds = vec![Vec::new(); n];
    for (i, j) in order.pairs() {
        preds[j].push(i);
    }
    let mut topo: Vec<ActivityId> = (0..n).collect();
    topo.sort_by_key(|&j| (preds[j].len(), j));
    let mut s = vec![vec![0; gamma + 1]; n];
    for &j in &topo {
        for g in 0..=gamma {
            let mut best = 0;
            for &i in &preds[j] {
                best = best.max(s[i][g] + inst.nominal(i));
                if g > 0 {
                    best = best.max(s[i][g - 1] + inst.worst_case(i));
                }
            }
            s[j][g] = best;
        }
    }
    s
}

/// Routes every resource unit from the source through the schedule to the
/// sink. Activities are visited by start time, ties in topological order, and
/// draw from finished holders they succeed in `order`.
fn allocate_flows(
    inst: &ProjectInstance,
    schedule: &Schedule,
    order: &ReachMatrix,
) -> BTreeMap<(ActivityId, ActivityId, usize), i64> {
    let mut rank = vec![0; inst.num_activities()];
    for (pos, &v) in inst.topological_order().iter().enumerate() {
        rank[v] = pos;
    }
    let mut visit: Vec<ActivityId> = inst.activities().filter(|&v| v != inst.source()).collect();
    visit.sort_by_key(|&v| (schedule.start[v], rank[v]));

    let mut flows = BTreeMap::new();
    for k in 0..inst.num_resources() {
        let mut holders: Vec<(ActivityId, i64)> = vec![(inst.source(), inst.capacity(k))];
        for &j in &visit {
            let mut need = if j == inst.sink() {
                inst.capacity(k)
            } else {
                inst.requirement(j, k)
            };
            for (h, left) in holders.iter_mut() {
                if need == 0 {
                    break;
                }
                if *left == 0 || schedule.finish(*h) > schedule.start[j] || !order.reaches(*h, j) {
                    continue;
                }
                let take = need.min(*left);
                *left -= take;
                need -= take;
                *flows.entry((*h, j, k)).or_insert(0) += take;
            }
            assert_eq!(need, 0, "resource {k} short for activity {j}");
            holders.push((j, inst.requirement(j, k)));
        }
    }
    flows
}

/// LFT schedule, its induced selection, minimal leveled starts and resource
/// flows. `ub` is the worst-case makespan of the selection.
pub fn warm_start(inst: &ProjectInstance, gamma: usize) -> WarmStart {
    let schedule = lft_schedule(inst);
    let selection = selection_from_schedule(inst, &schedule.start, &schedule.durations_used);
    let order = selection
        .closure(inst)
        .expect("a schedule induces an acyclic selection");
    let levels = leveled_starts(inst, &order, gamma);
    let ub = levels[inst.sink()][gamma];
    debug_assert_eq!(
        Some(ub),
        worst_case_makespan_dp(inst, &selection, gamma).ok().map(|o| o.value)
    );
    let flows = allocate_flows(inst, &schedule, &order);
    WarmStart {
        gamma,
        schedule,
        selection,
        leveled_starts: levels,
        ub,
        flows,
        order: Some(order),
    }
}
