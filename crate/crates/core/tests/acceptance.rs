//! Acceptance run: one `[PASS]`/`[FAIL]`/`[SKIP]` line per criterion.
//!
//! Runs without the libtest harness so the report always reaches stdout.
//! The process fails when a computed check fails. A criterion whose input data
//! is absent from the machine is reported as `[FAIL]` with the reason, but
//! does not fail the process.
//!
//! Environment:
//! - `ROBUST_RCPSP_J30_DIR`: directory with the 480 PSPLIB j30 files
//!   (default `<workspace>/data/j30`).
//! - `ROBUST_RCPSP_BRIDGE`: MILP bridge command template; without it the
//!   bundled HiGHS script is used when `highspy` imports, otherwise the
//!   cross-solver criterion is skipped.

mod common;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use robust_rcpsp::adversary::{
    branching_row_subset, build_adversary_constraint_matrix, check_fractional_certificate, ghouila_houri_refute,
};
use robust_rcpsp::experiment::{performance_profile, ResultRecord};
use robust_rcpsp::instance::{parse_psplib, robustify, write_psplib};
use robust_rcpsp::milp::{fix_order, solve_external, warm_start_assignment, BridgeLimits};
use robust_rcpsp::network::{enumerate_sufficient_selections, minimal_forbidden_sets, DEFAULT_ENUMERATION_CAP};
use robust_rcpsp::reference::{diamond_fractional_certificate, diamond_instance};
use robust_rcpsp::{
    build_compact, random_instance, solve_exact, time_windows, warm_start, worst_case_makespan_dp, CompactOptions,
    GeneratorConfig, ProjectInstance, Rational, SearchLimits, Selection, SolveStatus,
};

enum Outcome {
    Pass(String),
    Fail(String),
    /// Required input is not available here.
    Missing(String),
    Skip(String),
}

fn verdict(ok: bool, detail: String) -> Outcome {
    if ok {
        Outcome::Pass(detail)
    } else {
        Outcome::Fail(detail)
    }
}

/// Fastest of `reps` runs, after one warm-up.
fn best_time<T>(reps: usize, mut f: impl FnMut() -> T) -> (T, Duration) {
    let mut out = f();
    let mut best = Duration::MAX;
    for _ in 0..reps {
        let t = Instant::now();
        out = f();
        best = best.min(t.elapsed());
    }
    (out, best)
}

fn ms(d: Duration) -> f64 {
    d.as_secs_f64() * 1e3
}

fn golden_counterexample() -> Outcome {
    const LIMIT_MS: f64 = 1.0;
    let inst = diamond_instance();
    let empty = Selection::empty();
    let cert = diamond_fractional_certificate();
    let ((dp, check), t) = best_time(20, || {
        let dp = worst_case_makespan_dp(&inst, &empty, 1).unwrap().value;
        let check = check_fractional_certificate(&inst, &empty, 1, &cert).unwrap();
        (dp, check)
    });
    let ok = dp == 3 && check.feasible && check.objective == Rational::new(7, 2) && ms(t) < LIMIT_MS;
    verdict(
        ok,
        format!(
            "integral = {dp} (want 3), fractional = {} feasible = {} (want 7/2, true), {:.3} ms (limit {LIMIT_MS} ms)",
            check.objective,
            check.feasible,
            ms(t)
        ),
    )
}

fn branching_subset_refutation() -> Outcome {
    const LIMIT_MS: f64 = 1.0;
    let matrix = build_adversary_constraint_matrix(&diamond_instance(), &Selection::empty(), 1).unwrap();
    let Some(rows) = branching_row_subset(&matrix) else {
        return Outcome::Fail("no branching activity in the diamond".into());
    };
    let labels: Vec<&str> = rows.iter().map(|&r| matrix.row_labels()[r].as_str()).collect();
    let (v, t) = best_time(20, || ghouila_houri_refute(matrix.rows(), &rows).unwrap());
    let checked = match &v {
        robust_rcpsp::adversary::TuVerdict::NotTu {
            assignments_checked, ..
        } => *assignments_checked,
        _ => 0,
    };
    let ok = v.is_not_tu() && rows.len() == 5 && checked == 32 && ms(t) < LIMIT_MS;
    verdict(
        ok,
        format!(
            "rows {labels:?}: not_tu = {}, {checked} of 32 signings tried, {:.3} ms (limit {LIMIT_MS} ms)",
            v.is_not_tu(),
            ms(t)
        ),
    )
}

/// Random DAG with `jobs` activities and forward extra arcs as a selection.
fn random_dag(rng: &mut ChaCha8Rng, seed: u64) -> (ProjectInstance, Vec<(usize, usize)>) {
    let jobs = rng.random_range(1..=8);
    let cfg = GeneratorConfig {
        jobs,
        resources: 0,
        max_duration: 9,
        arc_probability: rng.random_range(0.0..0.6),
        zero_duration_probability: 0.1,
        ..Default::default()
    };
    let inst = random_instance(&cfg, seed);
    let extra: Vec<(usize, usize)> = (1..=jobs)
        .flat_map(|i| (i + 1..=jobs).map(move |j| (i, j)))
        .filter(|&(i, j)| !inst.has_arc(i, j))
        .filter(|_| rng.random_bool(0.15))
        .collect();
    (inst, extra)
}

fn dp_matches_subsets() -> Outcome {
    const CASES: usize = 240;
    const LIMIT_S: f64 = 10.0;
    let mut rng = ChaCha8Rng::seed_from_u64(0xD0);
    let started = Instant::now();
    let mut mismatches = Vec::new();
    for case in 0..CASES {
        let (inst, extra) = random_dag(&mut rng, 1000 + case as u64);
        let sel = Selection::new(extra.iter().copied());
        for gamma in 0..=3 {
            let dp = worst_case_makespan_dp(&inst, &sel, gamma).unwrap().value;
            let oracle = common::worst_case_by_subsets(&inst, &extra, gamma).unwrap();
            if dp != oracle {
                mismatches.push(format!("{} Γ={gamma}: {dp} vs {oracle}", inst.name()));
            }
        }
    }
    let secs = started.elapsed().as_secs_f64();
    verdict(
        mismatches.is_empty() && secs < LIMIT_S,
        format!(
            "{CASES} DAGs x Γ 0..3, {} mismatches {:?}, {secs:.2} s (limit {LIMIT_S} s)",
            mismatches.len(),
            mismatches.iter().take(3).collect::<Vec<_>>()
        ),
    )
}

/// Small resource-constrained instances shared by the solver criteria.
fn solver_suite() -> Vec<(ProjectInstance, usize)> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5E);
    (0..60)
        .map(|case| {
            let cfg = GeneratorConfig {
                jobs: rng.random_range(3..=6),
                resources: rng.random_range(1..=2),
                max_duration: 9,
                arc_probability: rng.random_range(0.0..0.35),
                max_requirement: 4,
                ..Default::default()
            };
            (random_instance(&cfg, 2000 + case), case as usize % 3)
        })
        .collect()
}

struct Solved {
    inst: ProjectInstance,
    gamma: usize,
    optimum: i64,
    selection: Selection,
}

fn exact_matches_enumeration(suite: &[(ProjectInstance, usize)], solved: &mut Vec<Solved>) -> Outcome {
    const LIMIT_S: f64 = 60.0;
    let started = Instant::now();
    let mut mismatches = Vec::new();
    let mut selections = 0usize;
    for (inst, gamma) in suite {
        let gamma = *gamma;
        let catalog = minimal_forbidden_sets(inst).unwrap();
        let exhaustive = enumerate_sufficient_selections(inst, &catalog, DEFAULT_ENUMERATION_CAP)
            .unwrap()
            .map(|sel| {
                selections += 1;
                worst_case_makespan_dp(inst, &sel, gamma).unwrap().value
            })
            .min()
            .unwrap();
        let res = solve_exact(inst, gamma, SearchLimits::default(), None).unwrap();
        if !res.is_optimal() || res.value != exhaustive {
            mismatches.push(format!("{} Γ={gamma}: {} vs {exhaustive}", inst.name(), res.value));
        } else {
            solved.push(Solved {
                inst: inst.clone(),
                gamma,
                optimum: res.value,
                selection: res.selection,
            });
        }
    }
    let secs = started.elapsed().as_secs_f64();
    verdict(
        mismatches.is_empty() && secs < LIMIT_S,
        format!(
            "{} instances, {selections} sufficient selections scored, {} mismatches {:?}, {secs:.2} s (limit {LIMIT_S} s)",
            suite.len(),
            mismatches.len(),
            mismatches.iter().take(3).collect::<Vec<_>>()
        ),
    )
}

fn exact_matches_orientations() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x0A);
    let mut mismatches = Vec::new();
    let mut cases = 0;
    for case in 0..40 {
        let cfg = GeneratorConfig {
            jobs: rng.random_range(2..=5),
            resources: rng.random_range(1..=2),
            arc_probability: 0.3,
            ..Default::default()
        };
        let inst = random_instance(&cfg, 3000 + case);
        let gamma = case as usize % 3;
        let (oracle, _) = common::robust_optimum_by_orientations(&inst, gamma);
        let res = solve_exact(&inst, gamma, SearchLimits::default(), None).unwrap();
        cases += 1;
        if res.value != oracle {
            mismatches.push(format!("{} Γ={gamma}: {} vs {oracle}", inst.name(), res.value));
        }
    }
    verdict(
        mismatches.is_empty(),
        format!(
            "{cases} instances against pair-orientation enumeration, {} mismatches {:?}",
            mismatches.len(),
            mismatches
        ),
    )
}

fn gamma_zero_is_deterministic(suite: &[(ProjectInstance, usize)]) -> Outcome {
    let mut mismatches = Vec::new();
    for (inst, _) in suite {
        let res = solve_exact(inst, 0, SearchLimits::default(), None).unwrap();
        let oracle = common::deterministic_optimum(inst);
        if res.value != oracle {
            mismatches.push(format!("{}: {} vs {oracle}", inst.name(), res.value));
        }
    }
    verdict(
        mismatches.is_empty(),
        format!(
            "{} instances against permutation + serial SGS, {} mismatches {:?}",
            suite.len(),
            mismatches.len(),
            mismatches
        ),
    )
}

fn monotonicity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x30);
    let mut pairs = 0usize;
    let mut violations = Vec::new();
    for case in 0..200 {
        let (inst, extra) = random_dag(&mut rng, 4000 + case);
        let full = Selection::new(extra.iter().copied());
        let part = Selection::new(extra.iter().copied().filter(|_| rng.random_bool(0.5)));
        let mut last_full = None;
        for gamma in 0..=4 {
            let vf = worst_case_makespan_dp(&inst, &full, gamma).unwrap().value;
            let vp = worst_case_makespan_dp(&inst, &part, gamma).unwrap().value;
            pairs += 2;
            if vf < vp {
                violations.push(format!("{} Γ={gamma}: X' {vf} < X {vp}", inst.name()));
            }
            if let Some(prev) = last_full {
                if vf < prev {
                    violations.push(format!("{} Γ={gamma}: {vf} < value at Γ-1 {prev}", inst.name()));
                }
            }
            last_full = Some(vf);
        }
    }
    verdict(
        violations.is_empty(),
        format!(
            "{pairs} (selection, Γ) evaluations, {} violations {:?}",
            violations.len(),
            violations
        ),
    )
}

fn warm_start_validity(solved: &[Solved]) -> Outcome {
    let mut problems = Vec::new();
    let mut checks = 0;
    for s in solved {
        let ws = warm_start(&s.inst, s.gamma);
        if ws.ub < s.optimum {
            problems.push(format!("{}: ub {} < optimum {}", s.inst.name(), ws.ub, s.optimum));
        }
        let assignment = warm_start_assignment(&s.inst, &ws);
        let windows = time_windows(&s.inst, ws.ub).unwrap();
        for transitivity in [false, true] {
            for tighten in [None, Some(windows.clone())] {
                let tight = tighten.is_some();
                let opts = CompactOptions {
                    transitivity,
                    tighten,
                    ..Default::default()
                };
                let model = build_compact(&s.inst, s.gamma, &opts).unwrap();
                checks += 1;
                match model.check_assignment(&assignment) {
                    Ok(obj) if obj == Rational::from_integer(ws.ub) => {}
                    Ok(obj) => problems.push(format!("{}: objective {obj} != ub {}", s.inst.name(), ws.ub)),
                    Err(v) => problems.push(format!(
                        "{} trans={transitivity} tight={tight}: {:?}",
                        s.inst.name(),
                        v.iter().take(2).collect::<Vec<_>>()
                    )),
                }
            }
        }
    }
    verdict(
        problems.is_empty() && !solved.is_empty(),
        format!(
            "{} solved instances, {checks} model checks, {} problems {:?}",
            solved.len(),
            problems.len(),
            problems.iter().take(3).collect::<Vec<_>>()
        ),
    )
}

fn model_sizes() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x81);
    let mut wrong = Vec::new();
    for case in 0..20 {
        let cfg = GeneratorConfig {
            jobs: rng.random_range(1..=10),
            resources: rng.random_range(1..=3),
            ..Default::default()
        };
        let inst = random_instance(&cfg, 5000 + case);
        let gamma = rng.random_range(0..=3usize);
        let transitivity = rng.random_bool(0.5);
        let opts = CompactOptions {
            transitivity,
            ..Default::default()
        };
        let m = build_compact(&inst, gamma, &opts).unwrap();
        let v = inst.num_activities();
        let k = inst.num_resources();
        let big_m = m.count_rows("prec") + m.count_rows("delay");
        let flow = m.count_rows("flowin") + m.count_rows("flowout");
        let starts = m.count_vars("S");
        if big_m != (2 * gamma + 1) * v * v || flow != 2 * v * k || starts != (gamma + 1) * v {
            wrong.push(format!(
                "{} Γ={gamma}: big-M {big_m} vs {}, flow {flow} vs {}, S {starts} vs {}",
                inst.name(),
                (2 * gamma + 1) * v * v,
                2 * v * k,
                (gamma + 1) * v
            ));
        }
    }
    verdict(
        wrong.is_empty(),
        format!("20 instances, {} mismatches {:?}", wrong.len(), wrong),
    )
}

fn workspace_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn psplib_ingestion() -> Outcome {
    let dir = std::env::var_os("ROBUST_RCPSP_J30_DIR")
        .map(PathBuf::from)
        .unwrap_or_else(|| workspace_root().join("data/j30"));
    let files: Vec<PathBuf> = match std::fs::read_dir(&dir) {
        Ok(entries) => {
            let mut f: Vec<PathBuf> = entries
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.extension().is_some_and(|e| e == "sm"))
                .collect();
            f.sort();
            f
        }
        Err(_) => Vec::new(),
    };
    if files.is_empty() {
        return Outcome::Missing(format!(
            "no j30 .sm files at {} (set ROBUST_RCPSP_J30_DIR); 480-file ingestion not verified",
            dir.display()
        ));
    }
    let mut problems = Vec::new();
    for path in &files {
        let text = match std::fs::read_to_string(path) {
            Ok(t) => t,
            Err(e) => {
                problems.push(format!("{}: {e}", path.display()));
                continue;
            }
        };
        let inst = match parse_psplib(&text) {
            Ok(i) => i,
            Err(e) => {
                problems.push(format!("{}: {e}", path.display()));
                continue;
            }
        };
        let rob = robustify(&inst);
        if rob.jobs().any(|i| rob.deviation(i) != (rob.nominal(i) + 1) / 2) {
            problems.push(format!("{}: deviations", path.display()));
        }
        let again = parse_psplib(&write_psplib(&inst)).map(|i| i == inst).unwrap_or(false);
        let json = ProjectInstance::from_json(&rob.to_json())
            .map(|i| i == rob)
            .unwrap_or(false);
        if !again || !json {
            problems.push(format!("{}: round trip", path.display()));
        }
    }
    verdict(
        files.len() == 480 && problems.is_empty(),
        format!(
            "{} files (want 480), {} problems {:?}",
            files.len(),
            problems.len(),
            problems.iter().take(3).collect::<Vec<_>>()
        ),
    )
}

fn record(inst: &str, variant: &str, solved: bool, t: f64) -> ResultRecord {
    ResultRecord {
        instance: inst.into(),
        gamma: 3,
        variant: variant.into(),
        status: if solved { "optimal" } else { "timeout" }.into(),
        objective: None,
        bound: None,
        gap: None,
        time_s: t,
    }
}

fn profile_arithmetic() -> Outcome {
    let times = [[1.0, 2.0], [2.0, 2.0], [4.0, 1.0]];
    let variants = vec!["A".to_string(), "B".to_string()];
    let recs: Vec<ResultRecord> = times
        .iter()
        .enumerate()
        .flat_map(|(i, t)| {
            [
                record(&format!("i{i}"), "A", true, t[0]),
                record(&format!("i{i}"), "B", true, t[1]),
            ]
        })
        .collect();
    let p = performance_profile(&recs, &variants).unwrap();
    let ratios: Vec<[f64; 2]> = (0..3).map(|i| [p.ratio(0, i), p.ratio(1, i)]).collect();
    let want_ratios = vec![[1.0, 2.0], [1.0, 1.0], [4.0, 1.0]];
    let rho = [p.rho(0, 1.0), p.rho(1, 1.0), p.rho(0, 2.0), p.rho(1, 2.0)];
    let want_rho = [2.0 / 3.0, 2.0 / 3.0, 2.0 / 3.0, 1.0];
    let hand_ok = ratios == want_ratios && rho == want_rho;

    let mut rng = ChaCha8Rng::seed_from_u64(0x9F);
    let mut non_monotone = 0;
    for _ in 0..100 {
        let vs = rng.random_range(1..=4usize);
        let names: Vec<String> = (0..vs).map(|v| format!("v{v}")).collect();
        let recs: Vec<ResultRecord> = (0..rng.random_range(1..=12))
            .flat_map(|i| {
                names
                    .iter()
                    .map(|v| record(&format!("i{i}"), v, rng.random_bool(0.7), rng.random_range(0.0..100.0)))
                    .collect::<Vec<_>>()
            })
            .collect();
        let p = performance_profile(&recs, &names).unwrap();
        let mut grid = p.taus.clone();
        grid.push(p.failure_ratio);
        for v in 0..vs {
            let values: Vec<f64> = grid.iter().map(|&t| p.rho(v, t)).collect();
            if values.windows(2).any(|w| w[1] < w[0]) || values.iter().any(|r| !(0.0..=1.0).contains(r)) {
                non_monotone += 1;
            }
        }
    }
    verdict(
        hand_ok && non_monotone == 0,
        format!(
            "p = {ratios:?}, ρ_A(1), ρ_B(1), ρ_A(2), ρ_B(2) = {rho:.4?}; {non_monotone} non-monotone profiles in 100"
        ),
    )
}

fn bridge_command() -> Option<String> {
    if let Ok(cmd) = std::env::var("ROBUST_RCPSP_BRIDGE") {
        return Some(cmd);
    }
    let ok = std::process::Command::new("python3")
        .args(["-c", "import highspy"])
        .output()
        .is_ok_and(|o| o.status.success());
    let script = workspace_root().join("scripts/highs_bridge.py");
    (ok && script.is_file()).then(|| format!("python3 '{}' {{lp}} {{mst}} {{sol}} {{time_s}}", script.display()))
}

fn cross_solver(solved: &[Solved]) -> Outcome {
    let Some(command) = bridge_command() else {
        return Outcome::Skip("no bridge configured and highspy unavailable".into());
    };
    let limits = BridgeLimits { command, time_s: 60.0 };
    let mut problems = Vec::new();
    let tiny: Vec<&Solved> = solved.iter().filter(|s| s.inst.num_jobs() <= 4).take(20).collect();
    for s in &tiny {
        let ws = warm_start(&s.inst, s.gamma);
        let windows = time_windows(&s.inst, ws.ub).unwrap();
        for transitivity in [false, true] {
            for tighten in [None, Some(windows.clone())] {
                let tight = tighten.is_some();
                let opts = CompactOptions {
                    transitivity,
                    tighten,
                    ..Default::default()
                };
                let model = build_compact(&s.inst, s.gamma, &opts).unwrap();
                let out = solve_external(&model, Some(&warm_start_assignment(&s.inst, &ws)), &limits);
                match (out.status, out.objective) {
                    (SolveStatus::Optimal, Some(obj)) if (obj - s.optimum as f64).abs() <= 1e-6 => {}
                    _ => problems.push(format!(
                        "{} trans={transitivity} tight={tight}: {:?} {:?} vs {} ({:?})",
                        s.inst.name(),
                        out.status,
                        out.objective,
                        s.optimum,
                        out.message
                    )),
                }
            }
        }

        let mut fixed = build_compact(&s.inst, s.gamma, &CompactOptions::default()).unwrap();
        let order = s.selection.closure(&s.inst).unwrap();
        fix_order(&mut fixed, &s.inst, &order).unwrap();
        let dp = worst_case_makespan_dp(&s.inst, &s.selection, s.gamma).unwrap().value;
        let out = solve_external(&fixed, None, &limits);
        match (out.status, out.objective) {
            (SolveStatus::Optimal, Some(obj)) if (obj - dp as f64).abs() <= 1e-6 => {}
            _ => problems.push(format!(
                "{} fixed: {:?} {:?} vs DP {dp}",
                s.inst.name(),
                out.status,
                out.objective
            )),
        }
    }
    verdict(
        tiny.len() == 20 && problems.is_empty(),
        format!(
            "{} tiny instances x 4 model variants plus the y-fixed model, {} problems {:?}",
            tiny.len(),
            problems.len(),
            problems.iter().take(3).collect::<Vec<_>>()
        ),
    )
}

fn main() -> ExitCode {
    let suite = solver_suite();
    let mut solved = Vec::new();
    let criteria: Vec<(&str, &str, Outcome)> = vec![
        ("C1", "counterexample golden values", golden_counterexample()),
        ("C2", "unimodularity refutation", branching_subset_refutation()),
        ("C3", "DP equals subset enumeration", dp_matches_subsets()),
        (
            "C4",
            "exact solver equals selection enumeration",
            exact_matches_enumeration(&suite, &mut solved),
        ),
        (
            "C4b",
            "exact solver equals pair-orientation enumeration",
            exact_matches_orientations(),
        ),
        (
            "C5",
            "Γ = 0 equals deterministic optimum",
            gamma_zero_is_deterministic(&suite),
        ),
        ("C6", "monotone in Γ and in the selection", monotonicity()),
        (
            "C7",
            "warm start bounds and satisfies all models",
            warm_start_validity(&solved),
        ),
        ("C8", "model size formulas", model_sizes()),
        ("C9", "PSPLIB j30 ingestion", psplib_ingestion()),
        ("C10", "performance profile arithmetic", profile_arithmetic()),
        ("C11", "cross-solver equality through the bridge", cross_solver(&solved)),
    ];
    let mut failed = 0;
    let mut missing = 0;
    for (id, name, outcome) in &criteria {
        let (tag, detail) = match outcome {
            Outcome::Pass(d) => ("PASS", d),
            Outcome::Fail(d) => {
                failed += 1;
                ("FAIL", d)
            }
            Outcome::Missing(d) => {
                missing += 1;
                ("FAIL", d)
            }
            Outcome::Skip(d) => ("SKIP", d),
        };
        println!("[{tag}] {id} {name}: {detail}");
    }
    println!(
        "acceptance: {} criteria, {failed} failed checks, {missing} failed for missing input",
        criteria.len()
    );
    if failed > 0 {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
