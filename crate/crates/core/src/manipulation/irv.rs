//! IRV coalitional manipulation by search over elimination orders.
//!
//! Fix a target `c` and an order in which the other candidates are
//! eliminated. Let `s_R(x)` be the first-place count of `x` among the
//! non-manipulators when only the candidates of `R` remain. Walking the order,
//! keep for every remaining candidate the number of manipulator votes it must
//! hold, `need[x]`; those requirements never decrease because a ballot leaves a
//! candidate only when that candidate is eliminated. When `e` is eliminated
//! from `R` it should hold exactly `need[e]` manipulator votes (more would only
//! raise the bar for everyone else), and every survivor `x` must rank above it:
//!
//! ```text
//! need'[x] = max(need[x], s_R(e) + need[e] + [x > e] - s_R(x))
//! ```
//!
//! Each unit of requirement is a job that occupies one manipulator ballot from
//! the round it appears until its candidate is eliminated; a ballot runs its
//! jobs in the order they appear on it. These jobs form an interval graph, so
//! the coalition can serve them iff in every round the total requirement of
//! the remaining candidates is at most `M`. The search prunes an order as soon
//! as one round exceeds `M`.

use super::{CmOutcome, Coalition, Witness};
use crate::profile::{Candidate, CandidateSet, DiscreteProfile, Ranking, MAX_CANDIDATES};
use crate::rules::{irv_winner_fast, Scores, TieBreak};

type Need = [u64; MAX_CANDIDATES];

/// Exact IRV CM decision without a node budget.
pub fn cm_irv(p: &DiscreteProfile) -> CmOutcome {
    cm_irv_with_budget(p, None)
}

/// Exact IRV CM decision. With `Some(budget)`, the search gives up after
/// visiting that many nodes (summed over all targets) and returns
/// [`CmOutcome::Undecided`] unless a manipulation was already found.
pub fn cm_irv_with_budget(p: &DiscreteProfile, node_budget: Option<u64>) -> CmOutcome {
    if p.m() < 2 || p.is_empty() {
        return CmOutcome::NotManipulable;
    }
    let w = irv_winner_fast(p);
    let mut nodes = 0u64;
    let mut exhausted = false;
    for coalition in Coalition::all(p, w) {
        if coalition.size == 0 {
            continue;
        }
        let mut search = Search::new(&coalition, node_budget, &mut nodes);
        match search.run() {
            Ok(true) => {
                let ballots = search.witness_ballots();
                return CmOutcome::Manipulable(Witness::new(&coalition, ballots));
            }
            Ok(false) => {}
            Err(OutOfBudget) => exhausted = true,
        }
    }
    if exhausted {
        CmOutcome::Undecided
    } else {
        CmOutcome::NotManipulable
    }
}

struct OutOfBudget;

struct Search<'a> {
    coalition: &'a Coalition,
    ballots: Vec<(Ranking, u64)>,
    cache: Vec<Option<Scores<u64>>>,
    /// Eliminated candidates so far and the requirements in force in the round
    /// each was eliminated (the victim's own entry included).
    order: Vec<(Candidate, CandidateSet, Need)>,
    budget: Option<u64>,
    nodes: &'a mut u64,
}

impl<'a> Search<'a> {
    fn new(coalition: &'a Coalition, budget: Option<u64>, nodes: &'a mut u64) -> Self {
        Search {
            coalition,
            ballots: coalition.sincere.iter().collect(),
            cache: vec![None; 1 << MAX_CANDIDATES],
            order: Vec::new(),
            budget,
            nodes,
        }
    }

    fn run(&mut self) -> Result<bool, OutOfBudget> {
        let all = self.coalition.sincere.candidates();
        self.dfs(all, [0; MAX_CANDIDATES])
    }

    fn scores(&mut self, remaining: CandidateSet) -> Scores<u64> {
        let slot = remaining.bits() as usize;
        if let Some(s) = self.cache[slot] {
            return s;
        }
        let mut s = Scores::zero();
        for (r, k) in &self.ballots {
            if let Some(top) = r.top_in(remaining) {
                s.add(top, *k);
            }
        }
        self.cache[slot] = Some(s);
        s
    }

    fn dfs(&mut self, remaining: CandidateSet, need: Need) -> Result<bool, OutOfBudget> {
        let c = self.coalition.target;
        if remaining.len() == 1 {
            return Ok(true);
        }
        *self.nodes += 1;
        if self.budget.is_some_and(|b| *self.nodes > b) {
            return Err(OutOfBudget);
        }
        let s = self.scores(remaining);
        for e in remaining.without(c).iter() {
            let a = need[e.index()];
            let bar = s[e] + a;
            let mut next = need;
            let mut total = a;
            for x in remaining.without(e).iter() {
                let required = TieBreak::votes_to_pass(x, s[x], e, bar);
                let slot = &mut next[x.index()];
                *slot = (*slot).max(required);
                total += *slot;
            }
            if total > self.coalition.size {
                continue;
            }
            self.order.push((e, remaining, next));
            if self.dfs(remaining.without(e), next)? {
                return Ok(true);
            }
            self.order.pop();
        }
        Ok(false)
    }

    /// Turns the successful elimination order into ballots by assigning jobs
    /// to ballots in order of their first round (greedy interval coloring).
    fn witness_ballots(&self) -> Vec<(Ranking, u64)> {
        let c = self.coalition.target;
        let rounds = self.order.len();
        let elim_round = |x: Candidate| {
            self.order
                .iter()
                .position(|(e, _, _)| *e == x)
                .unwrap_or(rounds)
        };
        // Groups of identical ballots: (chain, round in which the last job
        // ends, count). `None` means the ballot holds no job yet.
        let mut groups: Vec<(Vec<Candidate>, Option<usize>, u64)> =
            vec![(Vec::new(), None, self.coalition.size)];
        let mut prev: Need = [0; MAX_CANDIDATES];
        for (r, (_, remaining, need)) in self.order.iter().enumerate() {
            for x in remaining.iter() {
                let mut demand = need[x.index()].saturating_sub(prev[x.index()]);
                if demand == 0 {
                    continue;
                }
                let end = elim_round(x);
                let mut i = 0;
                while demand > 0 {
                    let free = groups[i].1.map_or(true, |last| last < r);
                    if free && groups[i].2 > 0 {
                        let take = demand.min(groups[i].2);
                        let mut chain = groups[i].0.clone();
                        chain.push(x);
                        groups[i].2 -= take;
                        groups.push((chain, Some(end), take));
                        demand -= take;
                    }
                    i += 1;
                }
            }
            prev = *need;
        }
        groups
            .into_iter()
            .filter(|g| g.2 > 0)
            .map(|(mut chain, _, k)| {
                if !chain.contains(&c) {
                    chain.push(c);
                }
                (self.coalition.ballot(&chain), k)
            })
            .collect()
    }
}
