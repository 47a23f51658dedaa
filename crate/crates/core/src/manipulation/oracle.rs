use itertools::Itertools;

use super::{CmOutcome, Coalition, Witness};
use crate::error::{Error, Result};
use crate::profile::{factorial, DiscreteProfile};
use crate::rules::Rule;

/// Caps for [`brute_force_cm`]; exceeding any of them is an error.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OracleLimits {
    pub max_m: usize,
    pub max_manipulators: u64,
    /// Cap on `C(M + m! - 1, m! - 1)`, the number of ballot multisets tried
    /// for one target.
    pub max_enumeration: u64,
}

impl Default for OracleLimits {
    fn default() -> Self {
        OracleLimits {
            max_m: 4,
            max_manipulators: 12,
            max_enumeration: 5_000_000,
        }
    }
}

/// Number of multisets of size `k` drawn from `kinds` kinds, saturating.
fn multisets(kinds: u64, k: u64) -> u64 {
    // C(k + kinds - 1, k), built incrementally so each step stays integral.
    let mut acc: u128 = 1;
    for i in 1..=k as u128 {
        acc = acc * (kinds as u128 + i - 1) / i;
        if acc > u64::MAX as u128 {
            return u64::MAX;
        }
    }
    acc as u64
}

/// Coalitional manipulation by definition: for every challenger `c` of the
/// sincere winner, every multiset of ballots for the coalition preferring `c`
/// is replayed.
pub fn brute_force_cm(p: &DiscreteProfile, rule: Rule, limits: &OracleLimits) -> Result<CmOutcome> {
    if p.m() > limits.max_m {
        return Err(Error::OracleLimits(format!(
            "m = {} exceeds max_m = {}",
            p.m(),
            limits.max_m
        )));
    }
    if p.m() < 2 || p.is_empty() {
        return Ok(CmOutcome::NotManipulable);
    }
    let w = rule.winner(p);
    let coalitions: Vec<Coalition> = Coalition::all(p, w).collect();
    let kinds = factorial(p.m()) as u64;
    for coalition in &coalitions {
        if coalition.size > limits.max_manipulators {
            return Err(Error::OracleLimits(format!(
                "coalition of {} exceeds max_manipulators = {}",
                coalition.size, limits.max_manipulators
            )));
        }
        let count = multisets(kinds, coalition.size);
        if count > limits.max_enumeration {
            return Err(Error::OracleLimits(format!(
                "{count} ballot multisets exceed max_enumeration = {}",
                limits.max_enumeration
            )));
        }
    }
    let ballots: Vec<_> = (0..kinds as usize).map(|i| p.ranking(i)).collect();
    for coalition in &coalitions {
        if coalition.size == 0 {
            continue;
        }
        let mut q = coalition.sincere.clone();
        for combo in (0..ballots.len()).combinations_with_replacement(coalition.size as usize) {
            for &i in &combo {
                q.weights_mut()[i] += 1;
            }
            let elected = rule.winner(&q) == coalition.target;
            for &i in &combo {
                q.weights_mut()[i] -= 1;
            }
            if elected {
                let witness = Witness::new(coalition, combo.iter().map(|&i| (ballots[i], 1)));
                return Ok(CmOutcome::Manipulable(witness));
            }
        }
    }
    Ok(CmOutcome::NotManipulable)
}
