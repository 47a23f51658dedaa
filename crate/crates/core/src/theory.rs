//! Closed-form results: critical thresholds, limiting CM rates, the
//! expected-profile CM status, the Hoeffding bound for Plurality and the
//! explicit Two-Round strategy below its threshold.

use num_rational::Rational64;
use num_traits::{One, Zero};

use crate::culture::theta_to_f64;
use crate::error::{Error, Result};
use crate::profile::{factorial, Candidate, DiscreteProfile, Ranking};
use crate::rules::Rule;

/// Position of `theta` relative to the critical value of a rule.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Regime {
    Subcritical,
    Critical,
    Supercritical,
}

/// Limit of the CM rate as `n` grows.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum LimitRate {
    Zero,
    One,
    /// At the critical value; the limit is not determined.
    Unknown,
}

/// CM status of the expected profile. At the critical value the status is
/// reported as not manipulable with `critical` set.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ExpectedCm {
    pub manipulable: bool,
    pub critical: bool,
}

fn check_m(m: usize) -> Result<i64> {
    if m == 0 {
        return Err(Error::invalid("number of candidates must be at least 1"));
    }
    Ok(m as i64)
}

fn check_theta(theta: Rational64) -> Result<()> {
    if theta < Rational64::zero() || theta > Rational64::one() {
        return Err(Error::invalid(format!("theta must lie in [0, 1], got {theta}")));
    }
    Ok(())
}

/// Critical concentration: `(m-2)/(3m-2)` for Plurality, `(m-3)/(5m-3)` for
/// Two-Round (zero for `m <= 2`) and zero for IRV.
pub fn theta_c(rule: Rule, m: usize) -> Result<Rational64> {
    let m = check_m(m)?;
    Ok(match rule {
        Rule::Plurality if m >= 2 => Rational64::new(m - 2, 3 * m - 2),
        Rule::TwoRound if m >= 3 => Rational64::new(m - 3, 5 * m - 3),
        _ => Rational64::zero(),
    })
}

pub fn regime(rule: Rule, m: usize, theta: Rational64) -> Result<Regime> {
    check_theta(theta)?;
    let tc = theta_c(rule, m)?;
    Ok(match theta.cmp(&tc) {
        std::cmp::Ordering::Less => Regime::Subcritical,
        std::cmp::Ordering::Equal => Regime::Critical,
        std::cmp::Ordering::Greater => Regime::Supercritical,
    })
}

pub fn limit_cm_rate(rule: Rule, m: usize, theta: Rational64) -> Result<LimitRate> {
    Ok(match regime(rule, m, theta)? {
        Regime::Subcritical => LimitRate::One,
        Regime::Critical => LimitRate::Unknown,
        Regime::Supercritical => LimitRate::Zero,
    })
}

/// Expected-profile CM status. Plurality and Two-Round are manipulable
/// exactly below their critical value; IRV never is (the reference top
/// candidate is a Super Condorcet Winner for every `theta > 0`).
pub fn expected_profile_cm(rule: Rule, m: usize, theta: Rational64) -> Result<ExpectedCm> {
    let r = regime(rule, m, theta)?;
    Ok(ExpectedCm {
        manipulable: r == Regime::Subcritical,
        critical: r == Regime::Critical,
    })
}

/// `2 m! exp(-2 eps^2 n)` with `eps = ((3m-2) theta - (m-2)) / (2 m!)`, an
/// upper bound on the Plurality CM rate above the critical value. Values
/// above 1 are returned as is.
pub fn hoeffding_bound_plurality(m: usize, n: u64, theta: Rational64) -> Result<f64> {
    check_theta(theta)?;
    if m < 2 || m > crate::profile::MAX_CANDIDATES {
        return Err(Error::invalid(format!("m must be in 2..=8, got {m}")));
    }
    if regime(Rule::Plurality, m, theta)? != Regime::Supercritical {
        return Err(Error::invalid(format!(
            "the bound requires theta above the critical value {}",
            theta_c(Rule::Plurality, m)?
        )));
    }
    let f = factorial(m) as f64;
    let mf = m as f64;
    let eps = ((3.0 * mf - 2.0) * theta_to_f64(theta) - (mf - 2.0)) / (2.0 * f);
    Ok(2.0 * f * (-2.0 * eps * eps * n as f64).exp())
}

/// Split of the coalition preferring 2 to 1 below the Two-Round critical
/// value: `2(1-2t)/(3(1-t))` vote `2>3>...>m>1`, `(1+t)/(3(1-t))` vote
/// `3>...>m>1>2`.
pub fn tr_strategy_fractions(theta: Rational64) -> Result<(Rational64, Rational64)> {
    check_theta(theta)?;
    if theta >= Rational64::new(1, 2) {
        return Err(Error::invalid(format!(
            "the strategy needs theta < 1/2, got {theta}"
        )));
    }
    let one = Rational64::one();
    let denom = Rational64::from_integer(3) * (one - theta);
    let first = Rational64::from_integer(2) * (one - Rational64::from_integer(2) * theta) / denom;
    let second = (one + theta) / denom;
    Ok((first, second))
}

/// The two ballots of the Two-Round strategy for `m >= 3` candidates.
pub fn tr_strategy_ballots(m: usize) -> Result<(Ranking, Ranking)> {
    if !(3..=crate::profile::MAX_CANDIDATES).contains(&m) {
        return Err(Error::invalid(format!("the strategy needs 3..=8 candidates, got {m}")));
    }
    let m = m as u8;
    let first: Vec<u8> = (2..=m).chain([1]).collect();
    let second: Vec<u8> = (3..=m).chain([1, 2]).collect();
    Ok((Ranking::from_ids(&first)?, Ranking::from_ids(&second)?))
}

/// Replaces the ballots of all voters preferring 2 to 1 by the Two-Round
/// strategy, with `round(M * first fraction)` on the first ballot.
pub fn apply_tr_strategy(p: &DiscreteProfile, theta: Rational64) -> Result<DiscreteProfile> {
    let (f1, _) = tr_strategy_fractions(theta)?;
    let (b1, b2) = tr_strategy_ballots(p.m())?;
    let (one, two) = (Candidate(1), Candidate(2));
    let coalition: u64 = p.filter(|r| r.prefers(two, one)).n();
    let k1 = (Rational64::from_integer(coalition as i64) * f1).round().to_integer() as u64;
    let mut q = p.filter(|r| !r.prefers(two, one));
    q.add(&b1, k1)?;
    q.add(&b2, coalition - k1)?;
    Ok(q)
}
