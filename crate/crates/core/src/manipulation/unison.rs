use super::{CmOutcome, Coalition, Witness};
use crate::profile::{all_rankings, DiscreteProfile};
use crate::rules::Rule;

/// Unison manipulation: whether the coalition preferring some `c` to the
/// sincere winner can elect `c` when all its members cast the same ballot.
/// All `m!` ballots are tried.
pub fn um(p: &DiscreteProfile, rule: Rule) -> CmOutcome {
    if p.m() < 2 || p.is_empty() {
        return CmOutcome::NotManipulable;
    }
    let w = rule.winner(p);
    let ballots: Vec<_> = all_rankings(p.candidates()).collect();
    for coalition in Coalition::all(p, w) {
        if coalition.size == 0 {
            continue;
        }
        let mut q = coalition.sincere.clone();
        for ballot in &ballots {
            q.weights_mut()[ballot.lex_index()] += coalition.size;
            let elected = rule.winner(&q) == coalition.target;
            q.weights_mut()[ballot.lex_index()] -= coalition.size;
            if elected {
                return CmOutcome::Manipulable(Witness::new(
                    &coalition,
                    [(*ballot, coalition.size)],
                ));
            }
        }
    }
    CmOutcome::NotManipulable
}
