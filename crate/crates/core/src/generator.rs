//! Seeded random project instances for tests and benchmarks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::instance::{robustify, InstanceBuilder, ProjectInstance};
use crate::Time;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorConfig {
    pub jobs: usize,
    pub resources: usize,
    /// Nominal durations are drawn from `1..=max_duration`.
    pub max_duration: Time,
    /// Probability of each forward arc `i → j`, `i < j`.
    pub arc_probability: f64,
    pub max_requirement: i64,
    /// Probability that a job gets duration 0.
    pub zero_duration_probability: f64,
    /// Use `θ̂ = ⌈θ̄/2⌉`; otherwise deviations are drawn from `0..=θ̄`.
    pub robustify: bool,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        Self {
            jobs: 6,
            resources: 1,
            max_duration: 9,
            arc_probability: 0.25,
            max_requirement: 4,
            zero_duration_probability: 0.0,
            robustify: false,
        }
    }
}

/// Instance number `seed` of the family described by `cfg`.
///
/// Capacities lie between the largest single demand and a fraction of the
/// total demand, so most instances have resource conflicts.
pub fn random_instance(cfg: &GeneratorConfig, seed: u64) -> ProjectInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = cfg.jobs;
    let k = cfg.resources;
    let mut durations = Vec::with_capacity(n);
    let mut deviations = Vec::with_capacity(n);
    let mut demands = Vec::with_capacity(n);
    for _ in 0..n {
        let d = if rng.random_bool(cfg.zero_duration_probability) {
            0
        } else {
            rng.random_range(1..=cfg.max_duration.max(1))
        };
        durations.push(d);
        deviations.push(rng.random_range(0..=d));
        demands.push(
            (0..k)
                .map(|_| rng.random_range(0..=cfg.max_requirement))
                .collect::<Vec<i64>>(),
        );
    }
    let capacities: Vec<i64> = (0..k)
        .map(|r| {
            let peak = demands.iter().map(|d| d[r]).max().unwrap_or(0).max(1);
            let total: i64 = demands.iter().map(|d| d[r]).sum();
            let high = (total * 3 / 5).max(peak);
            rng.random_range(peak..=high)
        })
        .collect();
    let mut b = InstanceBuilder::new(capacities).name(format!("rand{n}_{seed}"));
    for i in 0..n {
        b = b.activity(durations[i], deviations[i], demands[i].clone());
    }
    for i in 1..=n {
        for j in i + 1..=n {
            if rng.random_bool(cfg.arc_probability) {
                b = b.precedence(i, j);
            }
        }
    }
    let inst = b.build().expect("generated instances are valid");
    if cfg.robustify {
        robustify(&inst)
    } else {
        inst
    }
}
