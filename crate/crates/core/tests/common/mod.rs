//! Independent reference computations for the integration tests. Nothing here
//! calls into the solver code; only instance accessors are used.

#![allow(dead_code)]

use robust_rcpsp::ProjectInstance;

pub type Arc = (usize, usize);

fn all_arcs(inst: &ProjectInstance, extra: &[Arc]) -> Vec<Arc> {
    inst.arcs().iter().chain(extra).copied().collect()
}

/// Earliest finish of the sink, or `None` if the arcs contain a cycle.
pub fn longest_path(n: usize, arcs: &[Arc], dur: &[i64]) -> Option<i64> {
    let mut es = vec![0i64; n];
    for _ in 0..=n {
        let mut changed = false;
        for &(i, j) in arcs {
            if es[i] + dur[i] > es[j] {
                es[j] = es[i] + dur[i];
                changed = true;
            }
        }
        if !changed {
            return Some(es[n - 1] + dur[n - 1]);
        }
    }
    None
}

/// Worst case over every set of at most `gamma` delayed jobs.
pub fn worst_case_by_subsets(inst: &ProjectInstance, extra: &[Arc], gamma: usize) -> Option<i64> {
    let n = inst.num_activities();
    let jobs = inst.num_jobs();
    let arcs = all_arcs(inst, extra);
    let mut best = None;
    for mask in 0u32..(1 << jobs) {
        if mask.count_ones() as usize > gamma {
            continue;
        }
        let dur: Vec<i64> = (0..n)
            .map(|i| {
                let delayed = i >= 1 && i <= jobs && mask & (1 << (i - 1)) != 0;
                inst.nominal(i) + if delayed { inst.deviation(i) } else { 0 }
            })
            .collect();
        let v = longest_path(n, &arcs, &dur)?;
        best = Some(best.map_or(v, |b: i64| b.max(v)));
    }
    best
}

/// Reachability matrix by Floyd–Warshall.
pub fn reach(n: usize, arcs: &[Arc]) -> Vec<Vec<bool>> {
    let mut r = vec![vec![false; n]; n];
    for &(i, j) in arcs {
        r[i][j] = true;
    }
    for k in 0..n {
        for i in 0..n {
            if r[i][k] {
                for j in 0..n {
                    if r[k][j] {
                        r[i][j] = true;
                    }
                }
            }
        }
    }
    r
}

fn exceeds(inst: &ProjectInstance, set: &[usize]) -> bool {
    (0..inst.num_resources()).any(|k| set.iter().map(|&i| inst.requirement(i, k)).sum::<i64>() > inst.capacity(k))
}

/// Minimal forbidden sets by enumerating every subset of jobs.
pub fn forbidden_sets_by_subsets(inst: &ProjectInstance) -> Vec<Vec<usize>> {
    let n = inst.num_activities();
    let jobs = inst.num_jobs();
    let r = reach(n, inst.arcs());
    let mut out = Vec::new();
    for mask in 1u32..(1 << jobs) {
        let set: Vec<usize> = (1..=jobs).filter(|&i| mask & (1 << (i - 1)) != 0).collect();
        let antichain = set.iter().all(|&a| set.iter().all(|&b| a == b || !r[a][b]));
        if !antichain || !exceeds(inst, &set) {
            continue;
        }
        let minimal = (0..set.len()).all(|skip| {
            let sub: Vec<usize> = set
                .iter()
                .enumerate()
                .filter(|&(p, _)| p != skip)
                .map(|(_, &v)| v)
                .collect();
            !exceeds(inst, &sub)
        });
        if minimal {
            out.push(set);
        }
    }
    out.sort();
    out
}

/// Every permutation of the jobs that respects the precedence arcs.
fn feasible_permutations(inst: &ProjectInstance, visit: &mut dyn FnMut(&[usize])) {
    let jobs = inst.num_jobs();
    let r = reach(inst.num_activities(), inst.arcs());
    fn rec(
        r: &[Vec<bool>],
        jobs: usize,
        prefix: &mut Vec<usize>,
        used: &mut Vec<bool>,
        visit: &mut dyn FnMut(&[usize]),
    ) {
        if prefix.len() == jobs {
            visit(prefix);
            return;
        }
        for j in 1..=jobs {
            if used[j] {
                continue;
            }
            let ready = (1..=jobs).all(|p| !r[p][j] || used[p]);
            if ready {
                used[j] = true;
                prefix.push(j);
                rec(r, jobs, prefix, used, visit);
                prefix.pop();
                used[j] = false;
            }
        }
    }
    rec(&r, jobs, &mut Vec::new(), &mut vec![false; jobs + 2], visit);
}

/// Serial schedule generation on a time grid: each job starts at the first
/// time after its predecessors where its demand fits for its whole duration.
pub fn serial_sgs(inst: &ProjectInstance, order: &[usize]) -> i64 {
    let horizon: i64 = inst.activities().map(|i| inst.nominal(i)).sum::<i64>() + 1;
    let kk = inst.num_resources();
    let mut used = vec![vec![0i64; horizon as usize + 1]; kk];
    let mut finish = vec![0i64; inst.num_activities()];
    for &j in order {
        let d = inst.nominal(j);
        let mut t = inst.predecessors(j).iter().map(|&p| finish[p]).max().unwrap_or(0);
        loop {
            let fits =
                (t..t + d).all(|u| (0..kk).all(|k| used[k][u as usize] + inst.requirement(j, k) <= inst.capacity(k)));
            if fits {
                break;
            }
            t += 1;
        }
        for u in t..t + d {
            for k in 0..kk {
                used[k][u as usize] += inst.requirement(j, k);
            }
        }
        finish[j] = t + d;
    }
    let sink = inst.sink();
    inst.predecessors(sink).iter().map(|&p| finish[p]).max().unwrap_or(0)
}

/// Deterministic optimum: best serial schedule over all feasible orders.
pub fn deterministic_optimum(inst: &ProjectInstance) -> i64 {
    let mut best = i64::MAX;
    feasible_permutations(inst, &mut |perm| best = best.min(serial_sgs(inst, perm)));
    best
}

/// Robust optimum over every orientation of the pairs left unrelated by the
/// precedence arcs. Returns the value and the number of sufficient
/// orientations seen.
pub fn robust_optimum_by_orientations(inst: &ProjectInstance, gamma: usize) -> (i64, usize) {
    let n = inst.num_activities();
    let jobs = inst.num_jobs();
    let base = reach(n, inst.arcs());
    let pairs: Vec<Arc> = (1..=jobs)
        .flat_map(|i| (i + 1..=jobs).map(move |j| (i, j)))
        .filter(|&(i, j)| !base[i][j] && !base[j][i])
        .collect();
    let forbidden = forbidden_sets_by_subsets(inst);
    let mut best = i64::MAX;
    let mut count = 0;
    let total = 3usize.pow(pairs.len() as u32);
    for code in 0..total {
        let mut c = code;
        let mut extra = Vec::new();
        for &(i, j) in &pairs {
            match c % 3 {
                1 => extra.push((i, j)),
                2 => extra.push((j, i)),
                _ => {}
            }
            c /= 3;
        }
        let arcs = all_arcs(inst, &extra);
        let r = reach(n, &arcs);
        if (0..n).any(|v| r[v][v]) {
            continue;
        }
        let resolved = forbidden.iter().all(|f| f.iter().any(|&a| f.iter().any(|&b| r[a][b])));
        if !resolved {
            continue;
        }
        count += 1;
        let v = worst_case_by_subsets(inst, &extra, gamma).expect("acyclic");
        best = best.min(v);
    }
    (best, count)
}
