//! Small hand-built instances with known answers, used by tests and the
//! `verify` subcommands.

use std::collections::BTreeMap;

use num_traits::Zero;

use crate::adversary::FractionalCertificate;
use crate::instance::{InstanceBuilder, ProjectInstance};
use crate::Rational;

/// Diamond `0→1, 1→2, 1→3, 2→4, 3→4` with `θ̄ = θ̂ = 1` on the three jobs and
/// no resources.
///
/// Its worst case under `Γ = 1` is 3, while the linear relaxation of the
/// adversary reaches 7/2 by splitting the path flow after activity 1.
pub fn diamond_instance() -> ProjectInstance {
    InstanceBuilder::new(vec![])
        .name("diamond")
        .activity(1, 1, vec![])
        .activity(1, 1, vec![])
        .activity(1, 1, vec![])
        .precedence(1, 2)
        .precedence(1, 3)
        .build()
        .expect("diamond is valid")
}

fn r(n: i64, d: i64) -> Rational {
    Rational::new(n, d)
}

/// Half the path flow through each branch with `δ = (1/2, 1/4, 1/4)`.
pub fn diamond_fractional_certificate() -> FractionalCertificate {
    let alpha: BTreeMap<_, _> = [
        ((0, 1), r(1, 1)),
        ((1, 2), r(1, 2)),
        ((1, 3), r(1, 2)),
        ((2, 4), r(1, 2)),
        ((3, 4), r(1, 2)),
    ]
    .into_iter()
    .collect();
    FractionalCertificate::with_tight_delays(alpha, vec![r(1, 2), r(1, 4), r(1, 4)], true)
}

/// Path `0→1→2→4` with activity 2 fully delayed.
pub fn diamond_integral_certificate() -> FractionalCertificate {
    let alpha: BTreeMap<_, _> = [((0, 1), r(1, 1)), ((1, 2), r(1, 1)), ((2, 4), r(1, 1))]
        .into_iter()
        .collect();
    let mut w = BTreeMap::new();
    w.insert((2, 4), r(1, 1));
    FractionalCertificate {
        alpha,
        w,
        delta: vec![Rational::zero(), r(1, 1), Rational::zero()],
    }
}

/// Seven jobs on one resource of capacity 5 whose minimal forbidden sets are
/// `{1,5}, {2,6}, {3,4,5}, {5,6}, {6,7}`.
///
/// Demands are `(3, 3, 2, 1, 3, 3, 3)` with precedences `3→1, 1→2, 5→2, 2→7,
/// 1→6`; durations are illustrative.
pub fn seven_job_instance() -> ProjectInstance {
    let durations = [2, 3, 1, 2, 2, 4, 3];
    let demands = [3, 3, 2, 1, 3, 3, 3];
    let mut b = InstanceBuilder::new(vec![5]).name("seven");
    for (d, r) in durations.iter().zip(demands) {
        b = b.activity(*d, (d + 1) / 2, vec![r]);
    }
    b.precedence(3, 1)
        .precedence(1, 2)
        .precedence(5, 2)
        .precedence(2, 7)
        .precedence(1, 6)
        .build()
        .expect("seven-job instance is valid")
}

/// Two unit jobs that each need the whole resource.
pub fn pair_conflict_instance() -> ProjectInstance {
    InstanceBuilder::new(vec![2])
        .name("pair")
        .activity(1, 1, vec![2])
        .activity(1, 1, vec![2])
        .build()
        .expect("pair instance is valid")
}
