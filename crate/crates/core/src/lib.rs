//! Two-stage adjustable robust resource-constrained project scheduling under
//! budgeted duration uncertainty.
//!
//! The first stage picks a *sufficient selection* of extra precedence arcs that
//! resolves every resource conflict; the second stage schedules activities after
//! an adversary has delayed at most `Γ` of them to their worst-case durations.
//!
//! The crate is organised bottom-up:
//!
//! - [`instance`]: project data, PSPLIB ingestion, budgeted uncertainty.
//! - [`network`]: reachability, minimal forbidden sets, selections.
//! - [`adversary`]: worst-case makespan of a fixed selection (layered DP,
//!   brute-force oracle, fractional certificates, unimodularity refutation).
//! - [`heuristics`]: LFT serial schedule, warm start and time windows.
//! - [`milp`]: compact MILP reformulation, LP/MST export, external solver bridge.
//! - [`bnb`]: exact branch-and-bound over forbidden-set resolutions.
//! - [`experiment`]: batch runner, performance profiles, per-set summaries.
//! - [`generator`]: seeded random instances.

pub mod adversary;
pub mod bnb;
pub mod experiment;
pub mod generator;
pub mod heuristics;
pub mod instance;
pub mod milp;
pub mod network;
pub mod reference;

/// Exact rational used by scenario vectors and certificates.
pub type Rational = num_rational::Rational64;

/// Integer time unit.
pub type Time = i64;

/// Activity index in `0..=n+1`; `0` is the dummy source, `n+1` the dummy sink.
pub type ActivityId = usize;

pub use adversary::{
    worst_case_makespan_bruteforce, worst_case_makespan_dp, AugmentedNetwork, DpOutcome, DpTable, FractionalCertificate,
};
pub use bnb::{solve_exact, OptResult, SearchLimits};
pub use experiment::{performance_profile, run_experiment, summarize, ExperimentConfig, ResultRecord, Variant};
pub use generator::{random_instance, GeneratorConfig};
pub use heuristics::{lft_schedule, time_windows, warm_start, Schedule, TimeWindows, WarmStart};
pub use instance::{parse_psplib, Budget, InstanceError, InstanceMeta, ProjectInstance};
pub use milp::{build_compact, CompactOptions, MilpModel, SolveOutcome, SolveStatus};
pub use network::{
    minimal_forbidden_sets, transitive_closure, verify_selection, ForbiddenSetCatalog, ReachMatrix, Selection,
    SelectionVerdict,
};
