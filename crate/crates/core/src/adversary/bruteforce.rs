use super::AdversaryError;
use crate::instance::ProjectInstance;
use crate::network::Selection;
use crate::Time;

/// Largest job count accepted by [`worst_case_makespan_bruteforce`].
pub const BRUTEFORCE_MAX_JOBS: usize = 20;

/// Largest number of delay sets enumerated (20 jobs with `Γ = 3`).
pub const BRUTEFORCE_MAX_SCENARIOS: u128 = 1351;

fn scenario_count(jobs: usize, gamma: usize) -> u128 {
    let mut total = 0u128;
    let mut binom = 1u128;
    for k in 0..=gamma.min(jobs) {
        total += binom;
        binom = binom * (jobs - k) as u128 / (k + 1) as u128;
    }
    total
}

/// Longest path by repeated relaxation in Kahn order; kept separate from the
/// layered recursion on purpose.
fn longest_path(inst: &ProjectInstance, arcs: &[(usize, usize)], dur: &[Time]) -> Option<Time> {
    let n = inst.num_activities();
    let mut indeg = vec![0usize; n];
    for &(_, j) in arcs {
        indeg[j] += 1;
    }
    let mut start = vec![0 as Time; n];
    let mut queue: Vec<usize> = (0..n).filter(|&v| indeg[v] == 0).collect();
    let mut seen = 0;
    while let Some(v) = queue.pop() {
        seen += 1;
        for &(i, j) in arcs {
            if i == v {
                start[j] = start[j].max(start[i] + dur[i]);
                indeg[j] -= 1;
                if indeg[j] == 0 {
                    queue.push(j);
                }
            }
        }
    }
    (seen == n).then(|| start[inst.sink()])
}

/// Worst case over every delay set `D` of at most `Γ` jobs.
///
/// Refuses instances with more than [`BRUTEFORCE_MAX_JOBS`] jobs or more than
/// [`BRUTEFORCE_MAX_SCENARIOS`] delay sets.
pub fn worst_case_makespan_bruteforce(
    inst: &ProjectInstance,
    sel: &Selection,
    gamma: usize,
) -> Result<Time, AdversaryError> {
    let jobs = inst.num_jobs();
    let scenarios = scenario_count(jobs, gamma);
    if jobs > BRUTEFORCE_MAX_JOBS || scenarios > BRUTEFORCE_MAX_SCENARIOS {
        return Err(AdversaryError::TooManyScenarios { jobs, gamma, scenarios });
    }
    let arcs = sel.extended_arcs(inst);
    let mut best = None::<Time>;
    let mut chosen: Vec<usize> = Vec::new();
    let mut dur: Vec<Time> = inst.nominal_durations().to_vec();

    fn recurse(
        inst: &ProjectInstance,
        arcs: &[(usize, usize)],
        gamma: usize,
        next: usize,
        chosen: &mut Vec<usize>,
        dur: &mut Vec<Time>,
        best: &mut Option<Time>,
    ) -> Result<(), AdversaryError> {
        let value = longest_path(inst, arcs, dur)
            .ok_or_else(|| AdversaryError::Cycle(arcs.iter().flat_map(|&(i, j)| [i, j]).collect()))?;
        *best = Some(best.map_or(value, |b| b.max(value)));
        if chosen.len() == gamma {
            return Ok(());
        }
        for job in next..=inst.num_jobs() {
            chosen.push(job);
            dur[job] += inst.deviation(job);
            recurse(inst, arcs, gamma, job + 1, chosen, dur, best)?;
            dur[job] -= inst.deviation(job);
            chosen.pop();
        }
        Ok(())
    }

    recurse(inst, &arcs, gamma, 1, &mut chosen, &mut dur, &mut best)?;
    Ok(best.expect("the empty delay set is always evaluated"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reference::diamond_instance;

    #[test]
    fn scenario_counts() {
        assert_eq!(scenario_count(20, 3), 1351);
        assert_eq!(scenario_count(3, 5), 8);
        assert_eq!(scenario_count(4, 0), 1);
    }

    #[test]
    fn diamond_values() {
        let inst = diamond_instance();
        let sel = Selection::empty();
        assert_eq!(worst_case_makespan_bruteforce(&inst, &sel, 0).unwrap(), 2);
        assert_eq!(worst_case_makespan_bruteforce(&inst, &sel, 1).unwrap(), 3);
        assert_eq!(worst_case_makespan_bruteforce(&inst, &sel, 2).unwrap(), 4);
        assert_eq!(worst_case_makespan_bruteforce(&inst, &sel, 3).unwrap(), 4);
    }

    #[test]
    fn large_budgets_are_refused() {
        let mut b = crate::instance::InstanceBuilder::new(vec![]);
        for _ in 0..21 {
            b = b.activity(1, 1, vec![]);
        }
        let inst = b.build().unwrap();
        assert!(matches!(
            worst_case_makespan_bruteforce(&inst, &Selection::empty(), 1),
            Err(AdversaryError::TooManyScenarios { jobs: 21, .. })
        ));
    }

    #[test]
    fn cyclic_selection_is_an_error() {
        let inst = diamond_instance();
        let sel = Selection::new([(2, 3), (3, 2)]);
        assert!(worst_case_makespan_bruteforce(&inst, &sel, 1).is_err());
    }
}
