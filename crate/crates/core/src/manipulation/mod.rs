//! Exact coalitional-manipulation (CM) deciders.
//!
//! A rule is CM in a discrete profile if the voters who prefer some candidate
//! `c` to the sincere winner `w` can change their ballots so that `c` wins.
//! Only those voters may change, and it is enough to consider, for each `c`,
//! the whole coalition of voters preferring `c` to `w`: any successful
//! manipulation towards `c` only alters ballots of that coalition.
//!
//! Plurality and Two-Round are decided in closed form. IRV is decided by a
//! depth-first search over elimination orders ([`irv`]). [`brute_force_cm`]
//! applies the definition literally and serves as the test oracle.

mod irv;
mod oracle;
mod plurality;
mod scw;
mod two_round;
mod unison;

use std::fmt;

pub use irv::{cm_irv, cm_irv_with_budget};
pub use oracle::{brute_force_cm, OracleLimits};
pub use plurality::cm_plurality;
pub use scw::{exists_scw, is_scw};
pub use two_round::cm_two_round;
pub use unison::um;

use crate::error::{Error, Result};
use crate::profile::{Candidate, DiscreteProfile, Ranking};
use crate::rules::Rule;

/// Decision of a CM decider.
#[derive(Clone, Debug, PartialEq)]
pub enum CmOutcome {
    NotManipulable,
    Manipulable(Witness),
    /// The search exhausted its node budget before reaching a decision.
    Undecided,
}

impl CmOutcome {
    pub fn is_manipulable(&self) -> bool {
        matches!(self, CmOutcome::Manipulable(_))
    }

    pub fn is_undecided(&self) -> bool {
        matches!(self, CmOutcome::Undecided)
    }

    pub fn witness(&self) -> Option<&Witness> {
        match self {
            CmOutcome::Manipulable(w) => Some(w),
            _ => None,
        }
    }
}

/// A successful manipulation: the ballots cast by the whole coalition of
/// voters preferring `target` to `sincere_winner`.
#[derive(Clone, PartialEq, Eq)]
pub struct Witness {
    pub target: Candidate,
    pub sincere_winner: Candidate,
    /// Replacement ballots of the coalition; counts sum to its size.
    pub ballots: Vec<(Ranking, u64)>,
}

impl Witness {
    pub(crate) fn new(
        coalition: &Coalition,
        ballots: impl IntoIterator<Item = (Ranking, u64)>,
    ) -> Self {
        let mut merged: Vec<(Ranking, u64)> = Vec::new();
        for (r, k) in ballots {
            if k == 0 {
                continue;
            }
            match merged.iter_mut().find(|(x, _)| *x == r) {
                Some((_, acc)) => *acc += k,
                None => merged.push((r, k)),
            }
        }
        merged.sort_by_key(|(r, _)| r.lex_index());
        Witness {
            target: coalition.target,
            sincere_winner: coalition.sincere_winner,
            ballots: merged,
        }
    }

    /// Profile obtained by replacing the coalition's ballots.
    pub fn manipulated_profile(&self, p: &DiscreteProfile) -> Result<DiscreteProfile> {
        let coalition = Coalition::new(p, self.target, self.sincere_winner);
        let cast: u64 = self.ballots.iter().map(|(_, k)| k).sum();
        if cast != coalition.size {
            return Err(Error::invalid(format!(
                "witness casts {cast} ballots for a coalition of {}",
                coalition.size
            )));
        }
        let mut q = coalition.sincere;
        for (r, k) in &self.ballots {
            q.add(r, *k)?;
        }
        Ok(q)
    }

    /// Replays the witness: the rule must elect the target, and the sincere
    /// winner must be the winner of `p`.
    pub fn verify(&self, p: &DiscreteProfile, rule: Rule) -> bool {
        rule.winner(p) == self.sincere_winner
            && self.target != self.sincere_winner
            && self
                .manipulated_profile(p)
                .map(|q| rule.winner(&q) == self.target)
                .unwrap_or(false)
    }

    /// The ballots that differ from the coalition's sincere ballots (as a
    /// multiset difference).
    pub fn changed_ballots(&self, p: &DiscreteProfile) -> Vec<(Ranking, u64)> {
        let coalition = Coalition::new(p, self.target, self.sincere_winner);
        self.ballots
            .iter()
            .filter_map(|(r, k)| {
                let kept = coalition.members.weight(r);
                (*k > kept).then(|| (*r, *k - kept))
            })
            .collect()
    }
}

impl fmt::Debug for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "toward {} (over {}):", self.target, self.sincere_winner)?;
        for (r, k) in &self.ballots {
            write!(f, " {k}x({r})")?;
        }
        Ok(())
    }
}

/// Voters preferring `target` to `sincere_winner`, split from the rest.
#[derive(Clone, Debug)]
pub(crate) struct Coalition {
    pub target: Candidate,
    pub sincere_winner: Candidate,
    /// Number of manipulators `M`.
    pub size: u64,
    /// Ballots of voters outside the coalition; they stay unchanged.
    pub sincere: DiscreteProfile,
    /// Sincere ballots of the coalition.
    pub members: DiscreteProfile,
}

impl Coalition {
    pub fn new(p: &DiscreteProfile, target: Candidate, sincere_winner: Candidate) -> Self {
        let members = p.filter(|r| r.prefers(target, sincere_winner));
        let sincere = p.filter(|r| !r.prefers(target, sincere_winner));
        Coalition {
            target,
            sincere_winner,
            size: members.n(),
            sincere,
            members,
        }
    }

    /// Coalitions for every challenger of the sincere winner, by id.
    pub fn all(p: &DiscreteProfile, sincere_winner: Candidate) -> impl Iterator<Item = Coalition> + '_ {
        p.candidates()
            .iter()
            .filter(move |&c| c != sincere_winner)
            .map(move |c| Coalition::new(p, c, sincere_winner))
    }

    /// A complete ranking starting with `head` and continuing with the other
    /// candidates in increasing id order.
    pub fn ballot(&self, head: &[Candidate]) -> Ranking {
        let mut order: Vec<Candidate> = head.to_vec();
        order.extend(self.sincere.candidates().iter().filter(|c| !head.contains(c)));
        let ids: Vec<u8> = order.iter().map(|c| c.id()).collect();
        Ranking::from_ids(&ids).expect("complete ranking")
    }
}

/// CM decision for `rule` with the exact decider of that rule.
pub fn cm(p: &DiscreteProfile, rule: Rule) -> CmOutcome {
    match rule {
        Rule::Plurality => cm_plurality(p),
        Rule::TwoRound => cm_two_round(p),
        Rule::Irv => cm_irv(p),
    }
}
