//! Precedence-graph algebra: reachability, minimal forbidden sets and
//! sufficient selections.
//!
//! A selection `X` is *sufficient* when `(V, E ∪ X)` is acyclic and every
//! minimal forbidden set contains two activities related in the transitive
//! closure of `E ∪ X`; such activities can never overlap, so the set can never
//! be processed simultaneously.

use std::cmp::Reverse;
use std::collections::{BTreeSet, BinaryHeap, HashSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::instance::ProjectInstance;
use crate::{ActivityId, Time};

/// Default bound on the number of minimal forbidden sets enumerated.
pub const DEFAULT_CATALOG_CAP: usize = 1_000_000;

/// Default bound on non-dummy activities for exhaustive selection enumeration.
pub const DEFAULT_ENUMERATION_CAP: usize = 8;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NetworkError {
    #[error("graph contains a cycle through activities {0:?}")]
    Cycle(Vec<ActivityId>),
    #[error("more than {cap} minimal forbidden sets; raise the cap to continue")]
    CatalogTooLarge { cap: usize },
    #[error("exhaustive enumeration refused: {jobs} jobs exceed the cap of {cap}")]
    EnumerationRefused { jobs: usize, cap: usize },
}

/// Topological order of the graph given by successor lists; ties go to the
/// smallest id. On failure returns the nodes of one cycle in arc order.
pub(crate) fn topological_order(successors: &[Vec<usize>]) -> Result<Vec<usize>, Vec<usize>> {
    let n = successors.len();
    let mut indegree = vec![0usize; n];
    for list in successors {
        for &j in list {
            indegree[j] += 1;
        }
    }
    let mut ready: BinaryHeap<Reverse<usize>> = (0..n).filter(|&v| indegree[v] == 0).map(Reverse).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(Reverse(v)) = ready.pop() {
        order.push(v);
        for &w in &successors[v] {
            indegree[w] -= 1;
            if indegree[w] == 0 {
                ready.push(Reverse(w));
            }
        }
    }
    if order.len() == n {
        return Ok(order);
    }
    // every leftover node keeps a leftover predecessor, so walking backwards
    // must revisit a node
    let mut leftover_pred = vec![None; n];
    for (v, list) in successors.iter().enumerate() {
        if indegree[v] == 0 {
            continue;
        }
        for &w in list {
            if indegree[w] > 0 {
                leftover_pred[w] = Some(v);
            }
        }
    }
    let start = (0..n).find(|&v| indegree[v] > 0).expect("cycle exists");
    let mut position = vec![usize::MAX; n];
    let mut walk = Vec::new();
    let mut v = start;
    while position[v] == usize::MAX {
        position[v] = walk.len();
        walk.push(v);
        v = leftover_pred[v].expect("leftover node has a leftover predecessor");
    }
    let mut cycle: Vec<usize> = walk[position[v]..].to_vec();
    cycle.reverse();
    let min_pos = cycle
        .iter()
        .enumerate()
        .min_by_key(|&(_, &a)| a)
        .map(|(p, _)| p)
        .unwrap_or(0);
    cycle.rotate_left(min_pos);
    Err(cycle)
}

/// Strict reachability relation stored as one bitset row per node.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ReachMatrix {
    size: usize,
    words: usize,
    bits: Vec<u64>,
}

impl ReachMatrix {
    pub fn empty(size: usize) -> Self {
        let words = size.div_ceil(64).max(1);
        Self {
            size,
            words,
            bits: vec![0; size * words],
        }
    }

    /// Closure of an arc list over `size` nodes.
    pub fn from_arcs(size: usize, arcs: impl IntoIterator<Item = (usize, usize)>) -> Result<Self, NetworkError> {
        let mut successors = vec![Vec::new(); size];
        for (i, j) in arcs {
            if i == j {
                return Err(NetworkError::Cycle(vec![i]));
            }
            successors[i].push(j);
        }
        let order = topological_order(&successors).map_err(NetworkError::Cycle)?;
        let mut m = Self::empty(size);
        for &v in order.iter().rev() {
            for &w in &successors[v] {
                m.set(v, w);
                m.or_row_into(w, v);
            }
        }
        Ok(m)
    }

    pub fn size(&self) -> usize {
        self.size
    }

    #[inline]
    pub fn reaches(&self, i: usize, j: usize) -> bool {
        self.bits[i * self.words + j / 64] >> (j % 64) & 1 == 1
    }

    /// True when `i` and `j` are comparable in either direction.
    #[inline]
    pub fn related(&self, i: usize, j: usize) -> bool {
        self.reaches(i, j) || self.reaches(j, i)
    }

    #[inline]
    fn set(&mut self, i: usize, j: usize) {
        self.bits[i * self.words + j / 64] |= 1 << (j % 64);
    }

    #[inline]
    fn clear(&mut self, i: usize, j: usize) {
        self.bits[i * self.words + j / 64] &= !(1 << (j % 64));
    }

    fn or_row_into(&mut self, from: usize, into: usize) {
        for w in 0..self.words {
            let v = self.bits[from * self.words + w];
            self.bits[into * self.words + w] |= v;
        }
    }

    /// Adds arc `i → j` and updates the closure. Fails, leaving the matrix
    /// untouched, when the arc would close a cycle.
    pub fn add_arc(&mut self, i: usize, j: usize) -> Result<(), NetworkError> {
        if i == j || self.reaches(j, i) {
            return Err(NetworkError::Cycle(vec![i, j]));
        }
        if self.reaches(i, j) {
            return Ok(());
        }
        let sources: Vec<usize> = (0..self.size).filter(|&a| a == i || self.reaches(a, i)).collect();
        for a in sources {
            self.set(a, j);
            self.or_row_into(j, a);
        }
        Ok(())
    }

    /// All reachable pairs in row-major order.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.size).flat_map(move |i| (0..self.size).filter(move |&j| self.reaches(i, j)).map(move |j| (i, j)))
    }

    /// Pairs `(i, j)` of the relation with no `l` strictly between them.
    pub fn cover_pairs(&self) -> Vec<(usize, usize)> {
        self.pairs()
            .filter(|&(i, j)| !(0..self.size).any(|l| self.reaches(i, l) && self.reaches(l, j)))
            .collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<bool>> {
        (0..self.size)
            .map(|i| (0..self.size).map(|j| self.reaches(i, j)).collect())
            .collect()
    }
}

/// Reachability matrix of an acyclic arc set over `size` nodes.
pub fn transitive_closure(size: usize, arcs: &[(ActivityId, ActivityId)]) -> Result<ReachMatrix, NetworkError> {
    ReachMatrix::from_arcs(size, arcs.iter().copied())
}

/// Added precedence arcs `X`; together with `E` they define the extended
/// network.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Selection {
    arcs: BTreeSet<(ActivityId, ActivityId)>,
}

impl Selection {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn new(arcs: impl IntoIterator<Item = (ActivityId, ActivityId)>) -> Self {
        Self {
            arcs: arcs.into_iter().collect(),
        }
    }

    /// Drops arcs that duplicate `E`.
    pub fn without_base_arcs(&self, inst: &ProjectInstance) -> Self {
        Self::new(self.arcs.iter().copied().filter(|&(i, j)| !inst.has_arc(i, j)))
    }

    pub fn arcs(&self) -> impl Iterator<Item = (ActivityId, ActivityId)> + '_ {
        self.arcs.iter().copied()
    }

    pub fn len(&self) -> usize {
        self.arcs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.arcs.is_empty()
    }

    pub fn contains(&self, i: ActivityId, j: ActivityId) -> bool {
        self.arcs.contains(&(i, j))
    }

    pub fn insert(&mut self, i: ActivityId, j: ActivityId) -> bool {
        self.arcs.insert((i, j))
    }

    pub fn is_subset(&self, other: &Selection) -> bool {
        self.arcs.is_subset(&other.arcs)
    }

    /// `E ∪ X` without duplicates, sorted.
    pub fn extended_arcs(&self, inst: &ProjectInstance) -> Vec<(ActivityId, ActivityId)> {
        let mut all: BTreeSet<(ActivityId, ActivityId)> = inst.arcs().iter().copied().collect();
        all.extend(self.arcs.iter().copied());
        all.into_iter().collect()
    }

    /// Closure of `E ∪ X`.
    pub fn closure(&self, inst: &ProjectInstance) -> Result<ReachMatrix, NetworkError> {
        ReachMatrix::from_arcs(inst.num_activities(), self.extended_arcs(inst))
    }
}

/// Family of minimal forbidden sets, each sorted, in lexicographic order.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ForbiddenSetCatalog {
    sets: Vec<Vec<ActivityId>>,
}

impl ForbiddenSetCatalog {
    pub fn new(mut sets: Vec<Vec<ActivityId>>) -> Self {
        for s in &mut sets {
            s.sort_unstable();
        }
        sets.sort();
        sets.dedup();
        Self { sets }
    }

    pub fn sets(&self) -> &[Vec<ActivityId>] {
        &self.sets
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Vec<ActivityId>> {
        self.sets.iter()
    }

    /// Index of the first set without a related pair under `closure`.
    pub fn first_unresolved(&self, closure: &ReachMatrix) -> Option<usize> {
        self.sets.iter().position(|f| !is_resolved(f, closure))
    }
}

pub(crate) fn is_resolved(set: &[ActivityId], closure: &ReachMatrix) -> bool {
    set.iter()
        .enumerate()
        .any(|(a, &i)| set[a + 1..].iter().any(|&j| closure.related(i, j)))
}

pub fn minimal_forbidden_sets(inst: &ProjectInstance) -> Result<ForbiddenSetCatalog, NetworkError> {
    minimal_forbidden_sets_capped(inst, DEFAULT_CATALOG_CAP)
}

/// Enumerates minimal forbidden sets by depth-first growth of antichains in
/// increasing id order. Sets stop growing as soon as they exceed a capacity.
pub fn minimal_forbidden_sets_capped(inst: &ProjectInstance, cap: usize) -> Result<ForbiddenSetCatalog, NetworkError> {
    let closure = ReachMatrix::from_arcs(inst.num_activities(), inst.arcs().iter().copied())?;
    let k = inst.num_resources();
    let candidates: Vec<ActivityId> = inst
        .jobs()
        .filter(|&i| inst.requirements(i).iter().any(|&r| r > 0))
        .collect();

    struct Search<'a> {
        inst: &'a ProjectInstance,
        closure: &'a ReachMatrix,
        candidates: &'a [ActivityId],
        usage: Vec<i64>,
        current: Vec<ActivityId>,
        found: Vec<Vec<ActivityId>>,
        cap: usize,
    }

    impl Search<'_> {
        fn exceeds(&self) -> bool {
            self.usage.iter().zip(self.inst.capacities()).any(|(u, c)| u > c)
        }

        fn is_minimal(&self) -> bool {
            self.current.iter().all(|&x| {
                self.usage
                    .iter()
                    .zip(self.inst.requirements(x))
                    .zip(self.inst.capacities())
                    .all(|((u, r), c)| u - r <= *c)
            })
        }

        fn grow(&mut self, from: usize) -> Result<(), NetworkError> {
            for pos in from..self.candidates.len() {
                let v = self.candidates[pos];
                if self.current.iter().any(|&u| self.closure.related(u, v)) {
                    continue;
                }
                for (u, r) in self.usage.iter_mut().zip(self.inst.requirements(v)) {
                    *u += r;
                }
                self.current.push(v);
                if self.exceeds() {
                    if self.is_minimal() {
                        if self.found.len() == self.cap {
                            return Err(NetworkError::CatalogTooLarge { cap: self.cap });
                        }
                        self.found.push(self.current.clone());
                    }
                } else {
                    self.grow(pos + 1)?;
                }
                self.current.pop();
                for (u, r) in self.usage.iter_mut().zip(self.inst.requirements(v)) {
                    *u -= r;
                }
            }
            Ok(())
        }
    }

    let mut search = Search {
        inst,
        closure: &closure,
        candidates: &candidates,
        usage: vec![0; k],
        current: Vec::new(),
        found: Vec::new(),
        cap,
    };
    search.grow(0)?;
    Ok(ForbiddenSetCatalog::new(search.found))
}

/// Outcome of [`verify_selection`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", content = "witness", rename_all = "snake_case")]
pub enum SelectionVerdict {
    Sufficient,
    /// `E ∪ X` contains this cycle.
    Cyclic(Vec<ActivityId>),
    /// First catalog set left without a related pair.
    Unresolved(Vec<ActivityId>),
}

impl SelectionVerdict {
    pub fn is_sufficient(&self) -> bool {
        matches!(self, SelectionVerdict::Sufficient)
    }
}

pub fn verify_selection(inst: &ProjectInstance, sel: &Selection, catalog: &ForbiddenSetCatalog) -> SelectionVerdict {
    let closure = match sel.closure(inst) {
        Ok(c) => c,
        Err(NetworkError::Cycle(c)) => return SelectionVerdict::Cyclic(c),
        Err(_) => unreachable!("closure only fails on cycles"),
    };
    match catalog.first_unresolved(&closure) {
        None => SelectionVerdict::Sufficient,
        Some(idx) => SelectionVerdict::Unresolved(catalog.sets()[idx].clone()),
    }
}

/// Selection induced by a schedule: `(i, j) ∉ E` whenever `s_j ≥ s_i + dur_i`.
///
/// Two zero-duration activities starting together satisfy the rule in both
/// directions; only the pair that follows the topological order of `E` is
/// kept, so the result is acyclic and transitively closed.
pub fn selection_from_schedule(inst: &ProjectInstance, start: &[Time], dur: &[Time]) -> Selection {
    let mut rank = vec![0usize; inst.num_activities()];
    for (pos, &v) in inst.topological_order().iter().enumerate() {
        rank[v] = pos;
    }
    let mut sel = Selection::empty();
    for i in inst.activities() {
        for j in inst.activities() {
            if i == j || inst.has_arc(i, j) {
                continue;
            }
            let forward = start[j] >= start[i] + dur[i];
            let backward = start[i] >= start[j] + dur[j];
            if forward && (!backward || rank[i] < rank[j]) {
                sel.insert(i, j);
            }
        }
    }
    sel
}

/// Every inclusion-minimal sufficient selection, up to closure equivalence.
///
/// Each emitted selection is the set of covering pairs of a minimal sufficient
/// order that are not already arcs of `E`; its closure is the order itself.
/// Output is sorted by arc list.
pub fn enumerate_sufficient_selections(
    inst: &ProjectInstance,
    catalog: &ForbiddenSetCatalog,
    cap: usize,
) -> Result<std::vec::IntoIter<Selection>, NetworkError> {
    if inst.num_jobs() > cap {
        return Err(NetworkError::EnumerationRefused {
            jobs: inst.num_jobs(),
            cap,
        });
    }
    let root = ReachMatrix::from_arcs(inst.num_activities(), inst.arcs().iter().copied())?;
    let mut visited: HashSet<ReachMatrix> = HashSet::new();
    let mut leaves: Vec<ReachMatrix> = Vec::new();
    let mut stack = vec![root];
    while let Some(order) = stack.pop() {
        if !visited.insert(order.clone()) {
            continue;
        }
        let Some(idx) = catalog.first_unresolved(&order) else {
            leaves.push(order);
            continue;
        };
        let set = &catalog.sets()[idx];
        for &i in set {
            for &j in set {
                if i != j && !order.reaches(j, i) {
                    let mut child = order.clone();
                    child.add_arc(i, j).expect("checked acyclic");
                    stack.push(child);
                }
            }
        }
    }

    let mut out: Vec<Selection> = leaves
        .into_iter()
        .filter(|order| {
            order.cover_pairs().into_iter().all(|(i, j)| {
                if inst.has_arc(i, j) {
                    return true;
                }
                let mut smaller = order.clone();
                smaller.clear(i, j);
                catalog.first_unresolved(&smaller).is_some()
            })
        })
        .map(|order| Selection::new(order.cover_pairs().into_iter().filter(|&(i, j)| !inst.has_arc(i, j))))
        .collect();
    out.sort_by(|a, b| a.arcs.iter().cmp(b.arcs.iter()));
    out.dedup();
    Ok(out.into_iter())
}
