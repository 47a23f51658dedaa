use crate::profile::{Candidate, Profile, Weight};
use crate::rules::{condorcet_winner, plurality_scores_within};

/// Super-Condorcet-Winner test: for every subset `K` containing `c` with at
/// least two members, `|K| * s_Plu(c, P_K) > w(P)`.
pub fn is_scw<W: Weight>(p: &Profile<W>, c: Candidate) -> bool {
    if !p.candidates().contains(c) {
        return false;
    }
    let total = p.total();
    p.candidates()
        .subsets()
        .filter(|k| k.contains(c) && k.len() >= 2)
        .all(|k| (W::from_u64(k.len() as u64) * plurality_scores_within(p, k)[c]).exceeds(total))
}

/// The Super Condorcet Winner, if any. An SCW is in particular a Condorcet
/// winner, so only that candidate needs the full subset check.
pub fn exists_scw<W: Weight>(p: &Profile<W>) -> Option<Candidate> {
    if p.m() == 1 {
        return p.candidates().iter().next().filter(|&c| is_scw(p, c));
    }
    condorcet_winner(p).filter(|&c| is_scw(p, c))
}
