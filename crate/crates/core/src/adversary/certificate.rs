use std::collections::{BTreeMap, BTreeSet};

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use super::AdversaryError;
use crate::instance::ProjectInstance;
use crate::network::Selection;
use crate::{ActivityId, Rational};

type ArcMap = BTreeMap<(ActivityId, ActivityId), Rational>;

/// A point of the linearised adversary polytope: unit path flow `α`,
/// delay flow `w` and per-activity delay fractions `δ`. Arcs left out of the
/// maps carry zero.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FractionalCertificate {
    #[serde(with = "arc_entries")]
    pub alpha: ArcMap,
    #[serde(with = "arc_entries")]
    pub w: ArcMap,
    /// Either one entry per job or one per activity including dummies.
    pub delta: Vec<Rational>,
}

mod arc_entries {
    use super::ArcMap;
    use crate::Rational;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(map: &ArcMap, s: S) -> Result<S::Ok, S::Error> {
        let entries: Vec<(usize, usize, Rational)> = map.iter().map(|(&(i, j), &v)| (i, j, v)).collect();
        entries.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<ArcMap, D::Error> {
        let entries: Vec<(usize, usize, Rational)> = Vec::deserialize(d)?;
        Ok(entries.into_iter().map(|(i, j, v)| ((i, j), v)).collect())
    }
}

impl FractionalCertificate {
    /// Certificate with `w_ij = min(δ_i, α_ij)` on every arc carrying flow.
    pub fn with_tight_delays(alpha: ArcMap, delta: Vec<Rational>, jobs_only: bool) -> Self {
        let w = alpha
            .iter()
            .map(|(&(i, j), &a)| {
                let d = if jobs_only {
                    if i == 0 || i > delta.len() {
                        Rational::zero()
                    } else {
                        delta[i - 1]
                    }
                } else {
                    delta.get(i).copied().unwrap_or_else(Rational::zero)
                };
                ((i, j), a.min(d))
            })
            .collect();
        Self { alpha, w, delta }
    }
}

/// Result of [`check_fractional_certificate`]; `violations` is empty exactly
/// when `feasible` holds.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertificateCheck {
    pub feasible: bool,
    pub objective: Rational,
    pub violations: Vec<String>,
}

/// Checks a certificate in exact arithmetic and evaluates
/// `Σ θ̄_i α_ij + θ̂_i w_ij`.
pub fn check_fractional_certificate(
    inst: &ProjectInstance,
    sel: &Selection,
    gamma: usize,
    cert: &FractionalCertificate,
) -> Result<CertificateCheck, AdversaryError> {
    let arcs: BTreeSet<(ActivityId, ActivityId)> = sel.extended_arcs(inst).into_iter().collect();
    for &(i, j) in cert.alpha.keys().chain(cert.w.keys()) {
        if !arcs.contains(&(i, j)) {
            return Err(AdversaryError::UnknownArc(i, j));
        }
    }
    let n = inst.num_activities();
    let delta: Vec<Rational> = if cert.delta.len() == n {
        cert.delta.clone()
    } else if cert.delta.len() == inst.num_jobs() {
        let mut d = vec![Rational::zero(); n];
        d[1..=inst.num_jobs()].copy_from_slice(&cert.delta);
        d
    } else {
        return Err(AdversaryError::DeltaLength {
            got: cert.delta.len(),
            jobs: inst.num_jobs(),
            all: n,
        });
    };

    let zero = Rational::zero();
    let one = Rational::one();
    let alpha = |a: &(ActivityId, ActivityId)| cert.alpha.get(a).copied().unwrap_or(zero);
    let w = |a: &(ActivityId, ActivityId)| cert.w.get(a).copied().unwrap_or(zero);
    let mut violations = Vec::new();

    let mut inflow = vec![zero; n];
    let mut outflow = vec![zero; n];
    let mut objective = zero;
    for a @ &(i, j) in &arcs {
        let (x, y) = (alpha(a), w(a));
        if x < zero || x > one {
            violations.push(format!("alpha[{i},{j}] = {x} outside [0,1]"));
        }
        if y < zero {
            violations.push(format!("w[{i},{j}] = {y} is negative"));
        }
        if y > delta[i] {
            violations.push(format!("w[{i},{j}] = {y} exceeds delta[{i}] = {}", delta[i]));
        }
        if y > x {
            violations.push(format!("w[{i},{j}] = {y} exceeds alpha[{i},{j}] = {x}"));
        }
        outflow[i] += x;
        inflow[j] += x;
        objective += Rational::from_integer(inst.nominal(i)) * x + Rational::from_integer(inst.deviation(i)) * y;
    }
    for v in inst.activities() {
        if v == inst.source() {
            if outflow[v] != one {
                violations.push(format!("source outflow is {}, expected 1", outflow[v]));
            }
        } else if v == inst.sink() {
            if inflow[v] != one {
                violations.push(format!("sink inflow is {}, expected 1", inflow[v]));
            }
        } else if inflow[v] != outflow[v] {
            violations.push(format!(
                "flow not conserved at {v}: in {} out {}",
                inflow[v], outflow[v]
            ));
        }
    }
    let mut budget = zero;
    for (i, &d) in delta.iter().enumerate() {
        if d < zero || d > one {
            violations.push(format!("delta[{i}] = {d} outside [0,1]"));
        }
        budget += d;
    }
    if budget > Rational::from_integer(gamma as i64) {
        violations.push(format!("delta sums to {budget}, budget is {gamma}"));
    }

    Ok(CertificateCheck {
        feasible: violations.is_empty(),
        objective,
        violations,
    })
}
