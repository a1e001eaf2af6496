//! Exact solver: best-first branch-and-bound over forbidden-set resolutions.
//!
//! A node is a partial order containing `E`. Its lower bound is the
//! worst-case makespan of the order, which can only grow as arcs are added.
//! Branching picks the first unresolved minimal forbidden set `F` and creates
//! one child per ordered pair `(i, j)` of `F` that keeps the order acyclic.
//! Every sufficient selection relates some pair of `F`, so it extends one of
//! the children; the search therefore misses no selection.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashSet};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::adversary::worst_case_value_on_order;
use crate::heuristics::warm_start;
use crate::instance::ProjectInstance;
use crate::network::{minimal_forbidden_sets, ForbiddenSetCatalog, NetworkError, ReachMatrix, Selection};
use crate::Time;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BnbError {
    #[error(transparent)]
    Network(#[from] NetworkError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchLimits {
    pub time_s: Option<f64>,
    pub node_cap: Option<usize>,
}

impl Default for SearchLimits {
    fn default() -> Self {
        Self {
            time_s: None,
            node_cap: Some(1_000_000),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProofStatus {
    Optimal,
    /// A limit was hit; `value` is the best selection found so far.
    IncumbentOnly,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptResult {
    pub selection: Selection,
    pub value: Time,
    /// Best proven lower bound; equals `value` when optimal.
    pub bound: Time,
    pub status: ProofStatus,
    pub nodes: usize,
    pub time_s: f64,
}

impl OptResult {
    pub fn is_optimal(&self) -> bool {
        self.status == ProofStatus::Optimal
    }
}

/// `100 · (incumbent − bound) / incumbent`; `None` without a positive
/// incumbent.
pub fn optimality_gap(result: &OptResult, best_bound: Time) -> Option<f64> {
    if result.value <= 0 {
        return None;
    }
    let bound = best_bound.min(result.value);
    Some(100.0 * (result.value - bound) as f64 / result.value as f64)
}

/// Open node of the search.
#[derive(Debug, Clone)]
pub struct SearchNode {
    pub order: ReachMatrix,
    pub lower_bound: Time,
    pub depth: usize,
}

fn selection_of(inst: &ProjectInstance, order: &ReachMatrix) -> Selection {
    Selection::new(order.cover_pairs().into_iter().filter(|&(i, j)| !inst.has_arc(i, j)))
}

pub fn solve_exact(
    inst: &ProjectInstance,
    gamma: usize,
    limits: SearchLimits,
    ub_hint: Option<Time>,
) -> Result<OptResult, BnbError> {
    let catalog = minimal_forbidden_sets(inst)?;
    solve_with_catalog(inst, &catalog, gamma, limits, ub_hint)
}

/// [`solve_exact`] with a precomputed catalog.
pub fn solve_with_catalog(
    inst: &ProjectInstance,
    catalog: &ForbiddenSetCatalog,
    gamma: usize,
    limits: SearchLimits,
    ub_hint: Option<Time>,
) -> Result<OptResult, BnbError> {
    let started = Instant::now();
    let deadline = limits.time_s.map(Duration::from_secs_f64);

    let ws = warm_start(inst, gamma);
    let mut best_value = ws.ub;
    let mut best_selection = Some(selection_of(inst, ws.order()));
    if let Some(hint) = ub_hint.filter(|&h| h < ws.ub) {
        // a bare value: a node matching it must still be found
        best_value = hint;
        best_selection = None;
    }
    let pruned = |lb: Time, best: Time, have: bool| lb > best || (have && lb == best);

    let root = ReachMatrix::from_arcs(inst.num_activities(), inst.arcs().iter().copied())?;
    let root_lb = worst_case_value_on_order(inst, &root, gamma);
    let mut heap: BinaryHeap<(Reverse<Time>, usize, Reverse<usize>)> = BinaryHeap::new();
    let mut nodes: Vec<Option<SearchNode>> = Vec::new();
    let mut seen: HashSet<ReachMatrix> = HashSet::new();

    let push = |node: SearchNode,
                heap: &mut BinaryHeap<(Reverse<Time>, usize, Reverse<usize>)>,
                nodes: &mut Vec<Option<SearchNode>>| {
        let id = nodes.len();
        heap.push((Reverse(node.lower_bound), node.depth, Reverse(id)));
        nodes.push(Some(node));
    };
    seen.insert(root.clone());
    push(
        SearchNode {
            order: root,
            lower_bound: root_lb,
            depth: 0,
        },
        &mut heap,
        &mut nodes,
    );

    let mut expanded = 0usize;
    let mut stopped = false;
    while let Some((Reverse(lb), depth, Reverse(id))) = heap.pop() {
        // best-first: once the cheapest open node is pruned, all of them are
        if pruned(lb, best_value, best_selection.is_some()) {
            heap.clear();
            break;
        }
        if limits.node_cap.is_some_and(|cap| expanded >= cap) || deadline.is_some_and(|d| started.elapsed() >= d) {
            heap.push((Reverse(lb), depth, Reverse(id)));
            stopped = true;
            break;
        }
        expanded += 1;
        let node = nodes[id].take().expect("each node is popped once");
        let Some(fidx) = catalog.first_unresolved(&node.order) else {
            best_value = lb;
            best_selection = Some(selection_of(inst, &node.order));
            continue;
        };
        let set = &catalog.sets()[fidx];
        for &i in set {
            for &j in set {
                if i == j || node.order.reaches(j, i) {
                    continue;
                }
                let mut child = node.order.clone();
                child.add_arc(i, j).expect("checked acyclic");
                if !seen.insert(child.clone()) {
                    continue;
                }
                let child_lb = worst_case_value_on_order(inst, &child, gamma);
                if pruned(child_lb, best_value, best_selection.is_some()) {
                    continue;
                }
                push(
                    SearchNode {
                        order: child,
                        lower_bound: child_lb,
                        depth: node.depth + 1,
                    },
                    &mut heap,
                    &mut nodes,
                );
            }
        }
    }

    let open_bound = heap.iter().map(|e| (e.0).0).min();
    let (selection, value, bound) = match best_selection {
        Some(sel) => {
            let bound = if stopped {
                open_bound.map_or(best_value, |b| b.min(best_value))
            } else {
                best_value
            };
            (sel, best_value, bound)
        }
        None => {
            // the hint was below every selection explored; fall back to the
            // warm start and keep what the search proved
            let proven = if stopped {
                open_bound.unwrap_or(best_value)
            } else {
                best_value + 1
            };
            (selection_of(inst, ws.order()), ws.ub, proven.min(ws.ub))
        }
    };
    Ok(OptResult {
        selection,
        value,
        bound,
        status: if bound == value {
            ProofStatus::Optimal
        } else {
            ProofStatus::IncumbentOnly
        },
        nodes: expanded,
        time_s: started.elapsed().as_secs_f64(),
    })
}
