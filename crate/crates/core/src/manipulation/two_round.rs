use super::{CmOutcome, Coalition, Witness};
use crate::profile::{Candidate, DiscreteProfile, Ranking};
use crate::rules::{pairwise_support, plurality_scores, two_round_winner, TieBreak};

/// Two-Round CM in closed form.
///
/// With the coalition of size `M` casting instant ballots, target `c` can win
/// in two ways:
///
/// * final against the sincere winner `w`: `y` manipulators rank `w` first
///   (and then support `w` in the final), the other `M - y` rank `c` first.
///   Every constraint is an interval on `y`.
/// * final against a third candidate `d`: `x` manipulators rank `c` first and
///   `M - x` rank `d` first. The first-round constraints form an interval on
///   `x`; in the final the `d`-first ballots back `d`, so the largest feasible
///   `x` is the one to check.
pub fn cm_two_round(p: &DiscreteProfile) -> CmOutcome {
    if p.m() < 2 || p.is_empty() {
        return CmOutcome::NotManipulable;
    }
    let w = two_round_winner(p).winner;
    for coalition in Coalition::all(p, w) {
        if let Some(ballots) = against_winner(p, &coalition) {
            return CmOutcome::Manipulable(Witness::new(&coalition, ballots));
        }
        for d in p.candidates().iter() {
            if d == w || d == coalition.target {
                continue;
            }
            if let Some(ballots) = against_third(p, &coalition, d) {
                return CmOutcome::Manipulable(Witness::new(&coalition, ballots));
            }
        }
    }
    CmOutcome::NotManipulable
}

fn against_winner(p: &DiscreteProfile, coalition: &Coalition) -> Option<Vec<(Ranking, u64)>> {
    let (c, w, m) = (coalition.target, coalition.sincere_winner, coalition.size);
    let n = p.n();
    let s = plurality_scores(&coalition.sincere);
    let others = p.candidates().without(c).without(w);

    let y_lo = others
        .iter()
        .map(|e| TieBreak::votes_to_pass(w, s[w], e, s[e]))
        .max()
        .unwrap_or(0);
    let c_need = others
        .iter()
        .map(|e| TieBreak::votes_to_pass(c, s[c], e, s[e]))
        .max()
        .unwrap_or(0);
    // Final: c has `M - y` supporters against `n - M + y`.
    let lhs = 2 * m;
    let rhs = n + u64::from(c > w);
    if c_need > m || lhs < rhs {
        return None;
    }
    let y_hi = (m - c_need).min((lhs - rhs) / 2);
    if y_lo > y_hi {
        return None;
    }
    Some(vec![
        (coalition.ballot(&[w, c]), y_lo),
        (coalition.ballot(&[c, w]), m - y_lo),
    ])
}

fn against_third(
    p: &DiscreteProfile,
    coalition: &Coalition,
    d: Candidate,
) -> Option<Vec<(Ranking, u64)>> {
    let (c, m) = (coalition.target, coalition.size);
    let s = plurality_scores(&coalition.sincere);
    let others = p.candidates().without(c).without(d);

    let x_lo = others
        .iter()
        .map(|e| TieBreak::votes_to_pass(c, s[c], e, s[e]))
        .max()
        .unwrap_or(0);
    // d needs `s_d + M - x` to rank above every e: `x <= s_d + M - need_e`.
    let mut x_hi = m;
    for e in others.iter() {
        let need = s[e] + u64::from(d > e);
        x_hi = x_hi.min((s[d] + m).checked_sub(need)?);
    }
    if x_lo > x_hi {
        return None;
    }
    // The final favors the largest x.
    let final_c = x_hi + pairwise_support(&coalition.sincere, c, d);
    let final_d = m - x_hi + pairwise_support(&coalition.sincere, d, c);
    if !TieBreak::ranks_above(c, final_c, d, final_d) {
        return None;
    }
    Some(vec![
        (coalition.ballot(&[c, d]), x_hi),
        (coalition.ballot(&[d, c]), m - x_hi),
    ])
}
