//! Plurality, Two-Round (single-ballot) and Instant-Runoff Voting, plus
//! Condorcet-winner detection.
//!
//! Every comparison between candidates goes through [`TieBreak`]: higher score
//! first, and among equal scores the lower id. Winners and finalists are the
//! maxima of that order, IRV eliminates its minimum.

use std::fmt;
use std::ops::Index;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::profile::{Candidate, CandidateSet, Profile, Weight, MAX_CANDIDATES};

/// The implemented voting rules.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Rule {
    Plurality,
    TwoRound,
    Irv,
}

impl Rule {
    pub const ALL: [Rule; 3] = [Rule::Plurality, Rule::TwoRound, Rule::Irv];

    /// Canonical name, as written in CSV files.
    pub fn name(self) -> &'static str {
        match self {
            Rule::Plurality => "plurality",
            Rule::TwoRound => "two-round",
            Rule::Irv => "irv",
        }
    }

    /// Winner of `p` under this rule.
    pub fn winner<W: Weight>(self, p: &Profile<W>) -> Candidate {
        match self {
            Rule::Plurality => plurality_winner(p),
            Rule::TwoRound => two_round_winner(p).winner,
            Rule::Irv => irv_winner_fast(p),
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Rule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "plurality" | "plu" => Ok(Rule::Plurality),
            "two-round" | "tworound" | "two_round" | "tr" => Ok(Rule::TwoRound),
            "irv" => Ok(Rule::Irv),
            other => Err(Error::invalid(format!(
                "unknown rule {other:?} (expected plurality|plu, two-round|tr, irv)"
            ))),
        }
    }
}

/// Fixed lexicographic tie-breaking: among equal scores the lower id is
/// favored, so IRV eliminates the highest id among minimal scores.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct TieBreak;

impl TieBreak {
    /// Whether `a` (with score `sa`) ranks above `b` (with score `sb`).
    #[inline]
    pub fn ranks_above<W: PartialOrd>(a: Candidate, sa: W, b: Candidate, sb: W) -> bool {
        sa > sb || (sa == sb && a < b)
    }

    /// Smallest `v >= 0` such that `a` with score `sa + v` ranks above `b`
    /// with score `sb`, in integer votes.
    #[inline]
    pub fn votes_to_pass(a: Candidate, sa: u64, b: Candidate, sb: u64) -> u64 {
        let needed = sb + u64::from(a > b);
        needed.saturating_sub(sa)
    }

    /// Best candidate of `set` under `scores`.
    pub fn best<W: Weight>(set: CandidateSet, scores: &Scores<W>) -> Candidate {
        let mut it = set.iter();
        let mut best = it.next().expect("nonempty candidate set");
        for c in it {
            if Self::ranks_above(c, scores[c], best, scores[best]) {
                best = c;
            }
        }
        best
    }

    /// Worst candidate of `set` under `scores`.
    pub fn worst<W: Weight>(set: CandidateSet, scores: &Scores<W>) -> Candidate {
        let mut it = set.iter();
        let mut worst = it.next().expect("nonempty candidate set");
        for c in it {
            if Self::ranks_above(worst, scores[worst], c, scores[c]) {
                worst = c;
            }
        }
        worst
    }
}

/// Per-candidate scores (zero for candidates outside the profile).
#[derive(Clone, Copy, PartialEq)]
pub struct Scores<W>([W; MAX_CANDIDATES]);

impl<W: Weight> Scores<W> {
    pub fn zero() -> Self {
        Scores([W::ZERO; MAX_CANDIDATES])
    }

    #[inline]
    pub fn get(&self, c: Candidate) -> W {
        self.0[c.index()]
    }

    #[inline]
    pub fn add(&mut self, c: Candidate, w: W) {
        self.0[c.index()] += w;
    }

    pub fn sum_over(&self, set: CandidateSet) -> W {
        set.iter().fold(W::ZERO, |acc, c| acc + self.get(c))
    }

    /// Scores of the members of `set`, in id order.
    pub fn to_vec(&self, set: CandidateSet) -> Vec<W> {
        set.iter().map(|c| self.get(c)).collect()
    }
}

impl<W> Index<Candidate> for Scores<W> {
    type Output = W;
    #[inline]
    fn index(&self, c: Candidate) -> &W {
        &self.0[c.index()]
    }
}

impl<W: fmt::Debug> fmt::Debug for Scores<W> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.0.iter()).finish()
    }
}

/// `s_Plu(c, P)`: weight of voters ranking `c` first.
pub fn plurality_scores<W: Weight>(p: &Profile<W>) -> Scores<W> {
    plurality_scores_within(p, p.candidates())
}

/// `s_Plu(c, P_K)`: weight of voters ranking `c` first among `within`.
pub fn plurality_scores_within<W: Weight>(p: &Profile<W>, within: CandidateSet) -> Scores<W> {
    let mut scores = Scores::zero();
    if within == p.candidates() {
        for (r, w) in p.iter() {
            scores.add(r.top(), w);
        }
    } else {
        for (r, w) in p.iter() {
            if let Some(top) = r.top_in(within) {
                scores.add(top, w);
            }
        }
    }
    scores
}

pub fn plurality_winner<W: Weight>(p: &Profile<W>) -> Candidate {
    TieBreak::best(p.candidates(), &plurality_scores(p))
}

/// Result of a Two-Round election.
#[derive(Clone, Debug, PartialEq)]
pub struct TwoRoundOutcome<W> {
    pub winner: Candidate,
    /// The (up to) two candidates advancing to the second round.
    pub finalists: CandidateSet,
    pub first_round: Scores<W>,
    /// Scores within the finalists.
    pub second_round: Scores<W>,
}

/// Instant Two-Round System: the two best first-round scorers meet in a
/// majority contest on the same ballots.
pub fn two_round_winner<W: Weight>(p: &Profile<W>) -> TwoRoundOutcome<W> {
    let all = p.candidates();
    let first_round = plurality_scores(p);
    let first = TieBreak::best(all, &first_round);
    let rest = all.without(first);
    if rest.is_empty() {
        return TwoRoundOutcome {
            winner: first,
            finalists: all,
            first_round,
            second_round: first_round,
        };
    }
    let second = TieBreak::best(rest, &first_round);
    let finalists = CandidateSet::EMPTY.with(first).with(second);
    let second_round = plurality_scores_within(p, finalists);
    TwoRoundOutcome {
        winner: TieBreak::best(finalists, &second_round),
        finalists,
        first_round,
        second_round,
    }
}

/// One IRV round.
#[derive(Clone, Debug, PartialEq)]
pub struct IrvRound<W> {
    /// `K(r)`: candidates still running at the start of the round.
    pub remaining: CandidateSet,
    /// Plurality scores within `remaining`.
    pub scores: Scores<W>,
    /// `l(r)`: the candidate eliminated this round.
    pub eliminated: Candidate,
}

/// Full IRV elimination trace.
#[derive(Clone, Debug, PartialEq)]
pub struct IrvTrace<W> {
    pub rounds: Vec<IrvRound<W>>,
    pub winner: Candidate,
}

/// Instant-Runoff Voting with its round-by-round trace.
pub fn irv_winner<W: Weight>(p: &Profile<W>) -> IrvTrace<W> {
    let mut remaining = p.candidates();
    let mut rounds = Vec::with_capacity(p.m().saturating_sub(1));
    while remaining.len() > 1 {
        let scores = plurality_scores_within(p, remaining);
        let eliminated = TieBreak::worst(remaining, &scores);
        rounds.push(IrvRound {
            remaining,
            scores,
            eliminated,
        });
        remaining = remaining.without(eliminated);
    }
    IrvTrace {
        rounds,
        winner: remaining.iter().next().expect("one candidate remains"),
    }
}

/// IRV winner without building the trace. Ballots are transferred
/// incrementally instead of rescanning the profile each round.
pub(crate) fn irv_winner_fast<W: Weight>(p: &Profile<W>) -> Candidate {
    let mut remaining = p.candidates();
    if remaining.len() == 1 {
        return remaining.iter().next().unwrap();
    }
    let ballots: Vec<_> = p.iter().collect();
    // Index of the current (first remaining) candidate of each ballot.
    let mut cursor = vec![0usize; ballots.len()];
    let mut scores = Scores::<W>::zero();
    for (r, w) in &ballots {
        scores.add(r.top(), *w);
    }
    while remaining.len() > 1 {
        let loser = TieBreak::worst(remaining, &scores);
        remaining = remaining.without(loser);
        for (i, (r, w)) in ballots.iter().enumerate() {
            let order = r.as_slice();
            if order[cursor[i]] == loser {
                let mut k = cursor[i] + 1;
                while !remaining.contains(order[k]) {
                    k += 1;
                }
                cursor[i] = k;
                scores.add(order[k], *w);
            }
        }
    }
    remaining.iter().next().unwrap()
}

/// Weight of voters preferring `a` to `b`, `w(P^{a>b})`.
pub fn pairwise_support<W: Weight>(p: &Profile<W>, a: Candidate, b: Candidate) -> W {
    p.iter()
        .filter(|(r, _)| r.prefers(a, b))
        .fold(W::ZERO, |acc, (_, w)| acc + w)
}

/// The candidate `c` with `w(P^{c>d}) > w(P)/2` for every `d != c`, if any.
pub fn condorcet_winner<W: Weight>(p: &Profile<W>) -> Option<Candidate> {
    let total = p.total();
    let two = W::from_u64(2);
    p.candidates().iter().find(|&c| {
        p.candidates()
            .iter()
            .filter(|&d| d != c)
            .all(|d| (two * pairwise_support(p, c, d)).exceeds(total))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::culture::PerturbedCulture;
    use crate::profile::{DiscreteProfile, Ranking};
    use num_rational::Rational64;
    use proptest::prelude::*;

    fn r(ids: &[u8]) -> Ranking {
        Ranking::from_ids(ids).unwrap()
    }
    fn c(id: u8) -> Candidate {
        Candidate(id)
    }
    fn profile(m: usize, ballots: &[(&[u8], u64)]) -> DiscreteProfile {
        DiscreteProfile::from_ballots(m, ballots.iter().map(|(o, k)| (r(o), *k))).unwrap()
    }
    fn ten_voter() -> DiscreteProfile {
        profile(3, &[(&[1, 2, 3], 4), (&[2, 1, 3], 3), (&[3, 2, 1], 3)])
    }

    #[test]
    fn plurality_score_examples() {
        let p = profile(3, &[(&[1, 2, 3], 7)]);
        assert_eq!(plurality_scores(&p).to_vec(p.candidates()), vec![7, 0, 0]);
        let p = profile(3, &[(&[1, 3, 2], 3), (&[2, 1, 3], 5)]);
        assert_eq!(plurality_scores(&p).to_vec(p.candidates()), vec![3, 5, 0]);

        let expected = PerturbedCulture::new(3, Rational64::new(2, 5))
            .unwrap()
            .expected_profile();
        let s = plurality_scores(&expected).to_vec(expected.candidates());
        for (got, want) in s.iter().zip([0.6, 0.2, 0.2]) {
            assert!((got - want).abs() < 1e-12, "{s:?}");
        }
    }

    #[test]
    fn plurality_winner_examples() {
        assert_eq!(plurality_winner(&profile(3, &[(&[1, 3, 2], 3), (&[2, 1, 3], 5)])), c(2));
        assert_eq!(plurality_winner(&profile(2, &[(&[1, 2], 2), (&[2, 1], 2)])), c(1));
        assert_eq!(plurality_winner(&profile(4, &[(&[4, 1, 2, 3], 3)])), c(4));
    }

    #[test]
    fn two_round_examples() {
        let out = two_round_winner(&ten_voter());
        assert_eq!(out.finalists, [c(1), c(2)].into_iter().collect());
        assert_eq!(out.winner, c(2));
        assert_eq!(out.second_round.get(c(2)), 6);
        assert_eq!(out.second_round.get(c(1)), 4);

        let p = profile(2, &[(&[1, 2], 2), (&[2, 1], 3)]);
        assert_eq!(two_round_winner(&p).winner, plurality_winner(&p));
        assert_eq!(two_round_winner(&profile(4, &[(&[3, 1, 2, 4], 5)])).winner, c(3));
        assert_eq!(two_round_winner(&profile(1, &[(&[1], 2)])).winner, c(1));
    }

    #[test]
    fn irv_examples() {
        let t = irv_winner(&ten_voter());
        assert_eq!(t.rounds.len(), 2);
        assert_eq!(t.rounds[0].scores.to_vec(CandidateSet::full(3)), vec![4, 3, 3]);
        assert_eq!(t.rounds[0].eliminated, c(3));
        assert_eq!(t.rounds[1].scores.get(c(1)), 4);
        assert_eq!(t.rounds[1].scores.get(c(2)), 6);
        assert_eq!(t.winner, c(2));

        let t = irv_winner(&profile(4, &[(&[2, 1, 3, 4], 5)]));
        assert_eq!(t.winner, c(2));
        let order: Vec<_> = t.rounds.iter().map(|r| r.eliminated).collect();
        assert_eq!(order, vec![c(4), c(3), c(1)]);
    }

    #[test]
    fn condorcet_examples() {
        let cycle = profile(3, &[(&[1, 2, 3], 1), (&[2, 3, 1], 1), (&[3, 1, 2], 1)]);
        assert_eq!(condorcet_winner(&cycle), None);
        let expected = PerturbedCulture::new(4, Rational64::new(1, 10))
            .unwrap()
            .expected_profile();
        assert_eq!(condorcet_winner(&expected), Some(c(1)));
        assert_eq!(condorcet_winner(&profile(3, &[(&[3, 1, 2], 2)])), Some(c(3)));
    }

    #[test]
    fn rule_names_parse() {
        for rule in Rule::ALL {
            assert_eq!(rule.name().parse::<Rule>().unwrap(), rule);
        }
        assert_eq!("plu".parse::<Rule>().unwrap(), Rule::Plurality);
        assert_eq!("TR".parse::<Rule>().unwrap(), Rule::TwoRound);
        assert!("borda".parse::<Rule>().is_err());
    }

    fn arb_profile(m: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = DiscreteProfile> {
        m.prop_flat_map(|m| {
            proptest::collection::vec(0u64..6, crate::profile::factorial(m)).prop_map(move |w| {
                DiscreteProfile::from_weights(CandidateSet::full(m), w).unwrap()
            })
        })
    }

    proptest! {
        #[test]
        fn irv_equals_two_round_for_three_candidates(p in arb_profile(3..=3)) {
            prop_assert_eq!(irv_winner(&p).winner, two_round_winner(&p).winner);
        }

        #[test]
        fn fast_irv_matches_trace(p in arb_profile(1..=5)) {
            prop_assert_eq!(irv_winner_fast(&p), irv_winner(&p).winner);
        }

        #[test]
        fn irv_rounds_are_consistent(p in arb_profile(1..=5)) {
            let t = irv_winner(&p);
            prop_assert_eq!(t.rounds.first().map(|r| r.scores), (p.m() > 1).then(|| plurality_scores(&p)));
            let mut expected = p.candidates();
            for round in &t.rounds {
                prop_assert_eq!(round.remaining, expected);
                prop_assert_eq!(round.scores.sum_over(round.remaining), p.n());
                prop_assert_eq!(round.eliminated, TieBreak::worst(round.remaining, &round.scores));
                expected = expected.without(round.eliminated);
            }
            prop_assert_eq!(expected.iter().collect::<Vec<_>>(), vec![t.winner]);
        }

        #[test]
        fn winners_are_scale_invariant(p in arb_profile(1..=5), k in 1u64..5) {
            let q = p.scale(k);
            for rule in Rule::ALL {
                prop_assert_eq!(rule.winner(&p), rule.winner(&q));
            }
        }
    }
}
