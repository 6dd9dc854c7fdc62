//! Deterministic finite-horizon realization of a state distribution.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use thiserror::Error;

use super::{validate_distribution, JointState, StateDistribution, ViolationReport};

/// Per-channel-use joint states over a horizon of `len()` uses.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Schedule {
    states: Vec<JointState>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScheduleError {
    #[error("horizon {n} too short: {required} states carry nonzero fractions")]
    HorizonTooShort { n: usize, required: usize },
    #[error(transparent)]
    Invalid(#[from] ViolationReport),
}

impl Schedule {
    pub fn from_states(states: Vec<JointState>) -> Self {
        Self { states }
    }

    pub fn states(&self) -> &[JointState] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// Number of uses in `state`.
    pub fn count(&self, state: JointState) -> usize {
        self.states.iter().filter(|s| **s == state).count()
    }
}

impl fmt::Display for Schedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.states.iter().map(|s| s.to_string()).collect();
        write!(f, "[{}]", parts.join(", "))
    }
}

/// Largest-remainder counts, then a smooth interleave.
///
/// Counts: every state gets `floor(lambda * n)` uses, and the leftover uses go
/// to the largest remainders, ties broken in lexicographic state order.
/// Order: position `i` takes the state whose running deficit
/// `count * (i + 1) - n * placed` is largest (lexicographically first on
/// ties), which spreads uses of each state as evenly as the counts allow.
pub fn periodic_schedule(dist: &StateDistribution, n: usize) -> Result<Schedule, ScheduleError> {
    validate_distribution(dist)?;
    let support: Vec<(JointState, BigRational)> = dist
        .support()
        .map(|(s, f)| (s, f.exact().clone()))
        .collect();
    if n == 0 || n < support.len() {
        return Err(ScheduleError::HorizonTooShort {
            n,
            required: support.len(),
        });
    }

    let n_big = BigRational::from_integer(BigInt::from(n));
    let mut counts: Vec<usize> = Vec::with_capacity(support.len());
    let mut remainders: Vec<(BigRational, usize)> = Vec::with_capacity(support.len());
    for (idx, (_, lambda)) in support.iter().enumerate() {
        let quota = lambda * &n_big;
        let floor = quota.floor();
        counts.push(floor.to_integer().to_usize().unwrap_or(0));
        remainders.push((quota - floor, idx));
    }
    let assigned: usize = counts.iter().sum();
    let leftover = n.saturating_sub(assigned);
    // stable: equal remainders keep lexicographic order
    remainders.sort_by(|a, b| b.0.cmp(&a.0));
    // With fractions summing to one within tolerance, leftover never exceeds
    // the support size; cycling keeps the total at n regardless.
    for (_, idx) in remainders.iter().cycle().take(leftover) {
        counts[*idx] += 1;
    }

    let mut placed = vec![0usize; support.len()];
    let mut states = Vec::with_capacity(n);
    for i in 0..n {
        let mut best: Option<(i128, usize)> = None;
        for (idx, &count) in counts.iter().enumerate() {
            if placed[idx] >= count {
                continue;
            }
            let deficit = count as i128 * (i as i128 + 1) - n as i128 * placed[idx] as i128;
            if best.map_or(true, |(d, _)| deficit > d) {
                best = Some((deficit, idx));
            }
        }
        let (_, idx) = best.expect("counts sum to n");
        placed[idx] += 1;
        states.push(support[idx].0);
    }
    Ok(Schedule { states })
}

/// `|count / n - lambda|` for every supported state; used by tests.
#[allow(dead_code)]
pub(crate) fn max_deviation(dist: &StateDistribution, schedule: &Schedule) -> BigRational {
    let n = BigRational::from_integer(BigInt::from(schedule.len()));
    dist.entries()
        .map(|(s, f)| {
            let empirical = BigRational::from_integer(BigInt::from(schedule.count(s))) / &n;
            (empirical - f.exact()).abs()
        })
        .fold(BigRational::zero(), |a, b| if b > a { b } else { a })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::{joint, Alpha, Fraction};

    #[test]
    fn pn_np_alternates() {
        let dist = StateDistribution::empty(Alpha::ratio(1, 2))
            .with(joint("PN", "SW"), Fraction::ratio(1, 2))
            .with(joint("NP", "SW"), Fraction::ratio(1, 2));
        let s = periodic_schedule(&dist, 4).unwrap();
        let pn = joint("PN", "SW");
        let np = joint("NP", "SW");
        assert_eq!(s.states(), &[pn, np, pn, np]);
    }

    #[test]
    fn alternating_topologies_in_two_uses() {
        let dist = StateDistribution::empty(Alpha::ratio(1, 2))
            .with(joint("DD", "SW"), Fraction::ratio(1, 2))
            .with(joint("DD", "WS"), Fraction::ratio(1, 2));
        let s = periodic_schedule(&dist, 2).unwrap();
        assert_eq!(s.states(), &[joint("DD", "SW"), joint("DD", "WS")]);
    }

    #[test]
    fn two_thirds_one_third() {
        let dist = StateDistribution::empty(Alpha::ratio(1, 2))
            .with(joint("PN", "SW"), Fraction::ratio(2, 3))
            .with(joint("NP", "SW"), Fraction::ratio(1, 3));
        let s = periodic_schedule(&dist, 3).unwrap();
        let pn = joint("PN", "SW");
        assert_eq!(s.states(), &[pn, joint("NP", "SW"), pn]);
    }

    #[test]
    fn largest_remainder_ties_go_to_lexicographic_first() {
        let dist = StateDistribution::empty(Alpha::ratio(1, 2))
            .with(joint("NP", "SW"), Fraction::ratio(1, 3))
            .with(joint("PN", "SW"), Fraction::ratio(1, 3))
            .with(joint("DD", "SW"), Fraction::ratio(1, 3));
        let s = periodic_schedule(&dist, 4).unwrap();
        // remainders all 1/3: the extra use lands on PN (first in P < D < N)
        assert_eq!(s.count(joint("PN", "SW")), 2);
        assert_eq!(s.count(joint("DD", "SW")), 1);
        assert_eq!(s.count(joint("NP", "SW")), 1);
    }

    #[test]
    fn horizon_must_cover_support() {
        let dist = StateDistribution::empty(Alpha::ratio(1, 2))
            .with(joint("PN", "SW"), Fraction::ratio(1, 3))
            .with(joint("NP", "SW"), Fraction::ratio(1, 3))
            .with(joint("DD", "SW"), Fraction::ratio(1, 3));
        assert_eq!(
            periodic_schedule(&dist, 2),
            Err(ScheduleError::HorizonTooShort { n: 2, required: 3 })
        );
    }

    #[test]
    fn invalid_distribution_is_rejected() {
        let dist = StateDistribution::empty(Alpha::ratio(1, 2))
            .with(joint("PN", "SW"), Fraction::ratio(1, 2));
        assert!(matches!(
            periodic_schedule(&dist, 4),
            Err(ScheduleError::Invalid(_))
        ));
    }

    #[test]
    fn deviation_bound_on_small_horizons() {
        let dist = StateDistribution::empty(Alpha::ratio(1, 2))
            .with(joint("PN", "SW"), Fraction::ratio(5, 12))
            .with(joint("NP", "WS"), Fraction::ratio(1, 4))
            .with(joint("DD", "SS"), Fraction::ratio(1, 3));
        for n in 3..40 {
            let s = periodic_schedule(&dist, n).unwrap();
            assert_eq!(s.len(), n);
            let bound = BigRational::new(1.into(), (n as i64).into());
            assert!(max_deviation(&dist, &s) <= bound, "n = {n}");
        }
    }
}
