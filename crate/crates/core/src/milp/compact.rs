use serde::{Deserialize, Serialize};

use super::{MilpError, MilpModel, Sense, VarKind};
use crate::heuristics::TimeWindows;
use crate::instance::ProjectInstance;
use crate::network::ReachMatrix;
use crate::Time;

/// Switches for [`build_compact`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompactOptions {
    /// Add `y_ij + y_ji ≤ 1` and `y_ij ≥ y_il + y_lj − 1`.
    pub transitivity: bool,
    /// Replace the global big-M by `max(0, LF_i − ES_j)`.
    pub tighten: Option<TimeWindows>,
    /// Declare the start variables integer.
    pub integral_starts: bool,
    /// Global big-M; defaults to `Σ (θ̄_i + θ̂_i)`.
    pub big_m: Option<Time>,
    /// Let the source emit and the sink absorb `R_k` units of flow. With
    /// `false` the dummies keep their zero demands.
    pub classical_source_flow: bool,
}

impl Default for CompactOptions {
    fn default() -> Self {
        Self {
            transitivity: false,
            tighten: None,
            integral_starts: false,
            big_m: None,
            classical_source_flow: true,
        }
    }
}

/// Compact reformulation of the two-stage problem for budget `gamma`.
///
/// Variables, in order: `S_i_g` for every activity and level, `y_i_j` for
/// every ordered pair and `f_i_j_k` for every ordered pair and resource. The
/// objective is `min S_{n+1,Γ}`. Rows, in order:
///
/// - `prec_i_j_g`: `S_jg − S_ig − M_ij y_ij ≥ θ̄_i − M_ij`
/// - `delay_i_j_g`: `S_j,g+1 − S_ig − M_ij y_ij ≥ θ̄_i + θ̂_i − M_ij`
/// - `cap_i_j_k`: `f_ijk − R_k y_ij ≤ 0`
/// - `flowin_j_k`, `flowout_i_k`: flow balance
/// - `asym_i_j`, `trans_i_l_j`: transitivity rows, when enabled
///
/// `S_0_0` is fixed to 0, `y` is fixed to 1 on `E` and on the sink
/// self-pair and to 0 on every other self-pair.
pub fn build_compact(inst: &ProjectInstance, gamma: usize, opts: &CompactOptions) -> Result<MilpModel, MilpError> {
    let n = inst.num_activities();
    let kk = inst.num_resources();
    let sink = inst.sink();
    if let Some(tw) = &opts.tighten {
        if tw.es.len() != n || tw.lf.len() != n {
            return Err(MilpError::WindowSize {
                got: tw.es.len().min(tw.lf.len()),
                expected: n,
            });
        }
        let critical_path = crate::heuristics::earliest_starts(inst)[sink];
        if tw.horizon < critical_path {
            return Err(MilpError::InvalidHorizon {
                horizon: tw.horizon,
                critical_path,
            });
        }
    }
    let global_m = opts.big_m.unwrap_or_else(|| inst.worst_case_total());
    let big_m = |i: usize, j: usize| match &opts.tighten {
        Some(tw) => tw.big_m(i, j),
        None => global_m,
    };

    let mut m = MilpModel::new(format!("{}_gamma{gamma}", inst.name()));
    let s_kind = if opts.integral_starts {
        VarKind::Integer
    } else {
        VarKind::Continuous
    };
    let mut s = vec![vec![0; gamma + 1]; n];
    for i in 0..n {
        for g in 0..=gamma {
            let upper = (i == inst.source() && g == 0).then_some(0);
            s[i][g] = m.add_variable(format!("S_{i}_{g}"), s_kind, Some(0), upper)?;
        }
    }
    let mut y = vec![vec![0; n]; n];
    for i in 0..n {
        for j in 0..n {
            let (lo, hi) = if inst.has_arc(i, j) || (i == sink && j == sink) {
                (1, 1)
            } else if i == j {
                (0, 0)
            } else {
                (0, 1)
            };
            y[i][j] = m.add_variable(format!("y_{i}_{j}"), VarKind::Binary, Some(lo), Some(hi))?;
        }
    }
    let mut f = vec![vec![vec![0; kk]; n]; n];
    for i in 0..n {
        for j in 0..n {
            for k in 0..kk {
                f[i][j][k] = m.add_variable(format!("f_{i}_{j}_{k}"), VarKind::Continuous, Some(0), None)?;
            }
        }
    }
    m.set_objective([(s[sink][gamma], 1)]);

    for i in 0..n {
        for j in 0..n {
            let mij = big_m(i, j);
            for g in 0..=gamma {
                m.add_constraint(
                    format!("prec_{i}_{j}_{g}"),
                    [(s[j][g], 1), (s[i][g], -1), (y[i][j], -mij)],
                    Sense::Ge,
                    inst.nominal(i) - mij,
                );
            }
        }
    }
    for i in 0..n {
        for j in 0..n {
            let mij = big_m(i, j);
            for g in 0..gamma {
                m.add_constraint(
                    format!("delay_{i}_{j}_{g}"),
                    [(s[j][g + 1], 1), (s[i][g], -1), (y[i][j], -mij)],
                    Sense::Ge,
                    inst.worst_case(i) - mij,
                );
            }
        }
    }
    for i in 0..n {
        for j in 0..n {
            for k in 0..kk {
                m.add_constraint(
                    format!("cap_{i}_{j}_{k}"),
                    [(f[i][j][k], 1), (y[i][j], -inst.capacity(k))],
                    Sense::Le,
                    0,
                );
            }
        }
    }
    let demand_in = |j: usize, k: usize| match (opts.classical_source_flow, j) {
        (true, j) if j == sink => inst.capacity(k),
        (true, 0) => 0,
        _ => inst.requirement(j, k),
    };
    let demand_out = |i: usize, k: usize| match (opts.classical_source_flow, i) {
        (true, 0) => inst.capacity(k),
        (true, i) if i == sink => 0,
        _ => inst.requirement(i, k),
    };
    for j in 0..n {
        for k in 0..kk {
            m.add_constraint(
                format!("flowin_{j}_{k}"),
                (0..n).map(|i| (f[i][j][k], 1)),
                Sense::Eq,
                demand_in(j, k),
            );
        }
    }
    for i in 0..n {
        for k in 0..kk {
            m.add_constraint(
                format!("flowout_{i}_{k}"),
                (0..n).map(|j| (f[i][j][k], 1)),
                Sense::Eq,
                demand_out(i, k),
            );
        }
    }
    if opts.transitivity {
        for i in 0..n {
            for j in 0..n {
                if i == sink && j == sink {
                    continue;
                }
                m.add_constraint(format!("asym_{i}_{j}"), [(y[i][j], 1), (y[j][i], 1)], Sense::Le, 1);
            }
        }
        for i in 0..n {
            for l in 0..n {
                for j in 0..n {
                    m.add_constraint(
                        format!("trans_{i}_{l}_{j}"),
                        [(y[i][j], 1), (y[i][l], -1), (y[l][j], -1)],
                        Sense::Ge,
                        -1,
                    );
                }
            }
        }
    }
    Ok(m)
}

/// Fixes every `y_i_j` to the given order, keeping the sink self-pair at 1.
pub fn fix_order(model: &mut MilpModel, inst: &ProjectInstance, order: &ReachMatrix) -> Result<(), MilpError> {
    let sink = inst.sink();
    for i in inst.activities() {
        for j in inst.activities() {
            let on = order.reaches(i, j) || (i == sink && j == sink);
            model.fix(&format!("y_{i}_{j}"), on as i64)?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::heuristics::{time_windows, warm_start};
    use crate::milp::warm_start_assignment;
    use crate::reference::{diamond_instance, seven_job_instance};

    #[test]
    fn diamond_sizes() {
        let inst = diamond_instance();
        let m = build_compact(&inst, 1, &CompactOptions::default()).unwrap();
        assert_eq!(m.count_vars("S"), 10);
        assert_eq!(m.count_rows("prec"), 2 * 25);
        assert_eq!(m.count_rows("delay"), 25);
        assert_eq!(m.count_rows("flowin") + m.count_rows("flowout"), 0);
        assert_eq!(m.count_rows("asym"), 0);
        let y01 = m.var("y_0_1").unwrap();
        assert_eq!(m.variables()[y01].lower, Some(1));
        let s00 = m.var("S_0_0").unwrap();
        assert_eq!(m.variables()[s00].upper, Some(0));
    }

    #[test]
    fn names_avoid_lp_keywords() {
        // LP readers take a leading `inf` as infinity and a leading `e` as an exponent
        let opts = CompactOptions {
            transitivity: true,
            ..Default::default()
        };
        let m = build_compact(&seven_job_instance(), 2, &opts).unwrap();
        let names = m
            .constraints()
            .iter()
            .map(|c| c.name.as_str())
            .chain(m.variables().iter().map(|v| v.name.as_str()));
        for name in names {
            let lower = name.to_ascii_lowercase();
            assert!(!lower.starts_with("inf") && !lower.starts_with('e'), "{name}");
        }
    }

    #[test]
    fn transitivity_row_counts() {
        let inst = diamond_instance();
        let opts = CompactOptions {
            transitivity: true,
            ..Default::default()
        };
        let m = build_compact(&inst, 0, &opts).unwrap();
        assert_eq!(m.count_rows("asym"), 24);
        assert_eq!(m.count_rows("trans"), 125);
    }

    #[test]
    fn warm_start_satisfies_all_variants() {
        for inst in [diamond_instance(), seven_job_instance()] {
            for gamma in 0..3 {
                let ws = warm_start(&inst, gamma);
                let assignment = warm_start_assignment(&inst, &ws);
                for transitivity in [false, true] {
                    for tighten in [None, Some(time_windows(&inst, ws.ub).unwrap())] {
                        let opts = CompactOptions {
                            transitivity,
                            tighten,
                            integral_starts: true,
                            ..Default::default()
                        };
                        let m = build_compact(&inst, gamma, &opts).unwrap();
                        let obj = m.check_assignment(&assignment).unwrap();
                        assert_eq!(obj, crate::Rational::from_integer(ws.ub));
                    }
                }
            }
        }
    }

    #[test]
    fn short_horizon_is_rejected() {
        let inst = diamond_instance();
        let mut tw = time_windows(&inst, 2).unwrap();
        tw.horizon = 1;
        let opts = CompactOptions {
            tighten: Some(tw),
            ..Default::default()
        };
        assert!(matches!(
            build_compact(&inst, 1, &opts),
            Err(MilpError::InvalidHorizon { .. })
        ));
    }
}
