//! Runs an external MILP solver as a subprocess.
//!
//! The command template may use `{lp}`, `{mst}`, `{sol}` and `{time_s}`; it is
//! run through `sh -c` in a scratch directory. The solver writes a solution
//! file whose first line is `<status> [bound]`, with status one of
//! `optimal`, `feasible`, `infeasible`, `timeout` or `error`, followed by
//! `<name> <value>` lines.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::process::{Command, Stdio};
use std::time::{Duration, Instant};

use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use super::{export_lp, MilpModel, WarmStartAssignment};

/// Slack granted to the solver process on top of its time limit.
const GRACE: Duration = Duration::from_secs(10);

/// Absolute tolerance for validating returned solutions.
pub const SOLUTION_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BridgeLimits {
    pub command: String,
    pub time_s: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Optimal,
    Feasible,
    Infeasible,
    Timeout,
    Error,
}

impl SolveStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::Feasible => "feasible",
            SolveStatus::Infeasible => "infeasible",
            SolveStatus::Timeout => "timeout",
            SolveStatus::Error => "error",
        }
    }
}

/// `objective` is present exactly for optimal and feasible outcomes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveOutcome {
    pub status: SolveStatus,
    pub objective: Option<f64>,
    pub bound: Option<f64>,
    pub values: BTreeMap<String, f64>,
    pub time_s: f64,
    pub message: Option<String>,
}

impl SolveOutcome {
    fn failure(status: SolveStatus, time_s: f64, message: impl Into<String>) -> Self {
        Self {
            status,
            objective: None,
            bound: None,
            values: BTreeMap::new(),
            time_s,
            message: Some(message.into()),
        }
    }
}

/// One `<name> <value>` line per variable, sorted by name.
pub fn export_warm_start(assignment: &WarmStartAssignment) -> String {
    let mut out = String::new();
    for (name, v) in &assignment.values {
        if v.is_integer() {
            let _ = writeln!(out, "{name} {}", v.to_integer());
        } else {
            let _ = writeln!(out, "{name} {}", v.to_f64().unwrap_or(f64::NAN));
        }
    }
    out
}

fn parse_solution(model: &MilpModel, text: &str, time_s: f64) -> SolveOutcome {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let Some(head) = lines.next() else {
        return SolveOutcome::failure(SolveStatus::Error, time_s, "empty solution file");
    };
    let mut head_toks = head.split_whitespace();
    let status_tok = head_toks.next().unwrap_or("");
    let bound = match head_toks.next().map(str::parse::<f64>) {
        None => None,
        Some(Ok(b)) => Some(b),
        Some(Err(_)) => return SolveOutcome::failure(SolveStatus::Error, time_s, format!("bad status line `{head}`")),
    };
    let mut values = BTreeMap::new();
    for line in lines {
        let mut t = line.split_whitespace();
        match (t.next(), t.next().map(str::parse::<f64>), t.next()) {
            (Some(name), Some(Ok(v)), None) => {
                if model.var(name).is_none() {
                    return SolveOutcome::failure(
                        SolveStatus::Error,
                        time_s,
                        format!("solution names unknown variable `{name}`"),
                    );
                }
                values.insert(name.to_string(), v);
            }
            _ => return SolveOutcome::failure(SolveStatus::Error, time_s, format!("bad value line `{line}`")),
        }
    }
    let status = match (status_tok, values.is_empty()) {
        ("optimal", false) => SolveStatus::Optimal,
        ("feasible", false) | ("timeout", false) => SolveStatus::Feasible,
        ("timeout", true) => SolveStatus::Timeout,
        ("infeasible", _) => SolveStatus::Infeasible,
        ("optimal" | "feasible", true) => {
            return SolveOutcome::failure(
                SolveStatus::Error,
                time_s,
                "status claims a solution but lists no values",
            )
        }
        ("error", _) => return SolveOutcome::failure(SolveStatus::Error, time_s, "solver reported an error"),
        _ => return SolveOutcome::failure(SolveStatus::Error, time_s, format!("unknown status `{status_tok}`")),
    };
    if !matches!(status, SolveStatus::Optimal | SolveStatus::Feasible) {
        return SolveOutcome {
            status,
            objective: None,
            bound,
            values,
            time_s,
            message: None,
        };
    }
    match model.check_values(&values, SOLUTION_TOLERANCE) {
        Ok(objective) => {
            let bound = match status {
                SolveStatus::Optimal => Some(bound.unwrap_or(objective)),
                _ => bound,
            };
            SolveOutcome {
                status,
                objective: Some(objective),
                bound: bound.map(|b| b.min(objective)),
                values,
                time_s,
                message: None,
            }
        }
        Err(violations) => {
            let shown: Vec<String> = violations.into_iter().take(5).collect();
            SolveOutcome::failure(
                SolveStatus::Error,
                time_s,
                format!("solution violates the model: {}", shown.join("; ")),
            )
        }
    }
}

fn quote(path: &std::path::Path) -> String {
    format!("'{}'", path.display().to_string().replace('\'', "'\\''"))
}

/// Writes the model (and warm start) to a scratch directory, runs the
/// command and validates what it returns. Failures never panic; they come
/// back as [`SolveStatus::Error`] with a message.
pub fn solve_external(model: &MilpModel, warm: Option<&WarmStartAssignment>, limits: &BridgeLimits) -> SolveOutcome {
    let started = Instant::now();
    let elapsed = || started.elapsed().as_secs_f64();
    let dir = match tempfile::tempdir() {
        Ok(d) => d,
        Err(e) => return SolveOutcome::failure(SolveStatus::Error, elapsed(), format!("scratch dir: {e}")),
    };
    let lp = dir.path().join("model.lp");
    let mst = dir.path().join("warm.mst");
    let sol = dir.path().join("model.sol");
    if let Err(e) = std::fs::write(&lp, export_lp(model)) {
        return SolveOutcome::failure(SolveStatus::Error, elapsed(), format!("writing LP: {e}"));
    }
    let mst_arg = match warm {
        Some(w) => {
            if let Err(e) = std::fs::write(&mst, export_warm_start(w)) {
                return SolveOutcome::failure(SolveStatus::Error, elapsed(), format!("writing MST: {e}"));
            }
            quote(&mst)
        }
        None => "''".to_string(),
    };
    let command = limits
        .command
        .replace("{lp}", &quote(&lp))
        .replace("{mst}", &mst_arg)
        .replace("{sol}", &quote(&sol))
        .replace("{time_s}", &format!("{}", limits.time_s));

    let mut child = match Command::new("sh")
        .arg("-c")
        .arg(&command)
        .current_dir(dir.path())
        .stdin(Stdio::null())
        .stdout(Stdio::null())
        .stderr(Stdio::piped())
        .spawn()
    {
        Ok(c) => c,
        Err(e) => return SolveOutcome::failure(SolveStatus::Error, elapsed(), format!("spawn failed: {e}")),
    };
    let deadline = Duration::from_secs_f64(limits.time_s.max(0.0)) + GRACE;
    let exit = loop {
        match child.try_wait() {
            Ok(Some(status)) => break status,
            Ok(None) if started.elapsed() > deadline => {
                let _ = child.kill();
                let _ = child.wait();
                return SolveOutcome::failure(SolveStatus::Timeout, elapsed(), "solver killed after the time limit");
            }
            Ok(None) => std::thread::sleep(Duration::from_millis(5)),
            Err(e) => return SolveOutcome::failure(SolveStatus::Error, elapsed(), format!("wait failed: {e}")),
        }
    };
    let time_s = elapsed();
    if !exit.success() {
        let mut stderr = String::new();
        if let Some(mut pipe) = child.stderr.take() {
            let _ = std::io::Read::read_to_string(&mut pipe, &mut stderr);
        }
        return SolveOutcome::failure(
            SolveStatus::Error,
            time_s,
            format!("solver exited with {exit}: {}", stderr.trim()),
        );
    }
    match std::fs::read_to_string(&sol) {
        Ok(text) => parse_solution(model, &text, time_s),
        Err(e) => SolveOutcome::failure(SolveStatus::Error, time_s, format!("reading solution: {e}")),
    }
}
