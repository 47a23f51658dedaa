use super::{CmOutcome, Coalition, Witness};
use crate::profile::DiscreteProfile;
use crate::rules::{plurality_scores, plurality_winner, TieBreak};

/// Plurality is manipulable toward `c` exactly when `c`, ranked first by the
/// whole coalition, beats every other candidate's first-place count among the
/// remaining voters.
pub fn cm_plurality(p: &DiscreteProfile) -> CmOutcome {
    if p.m() < 2 || p.is_empty() {
        return CmOutcome::NotManipulable;
    }
    let w = plurality_winner(p);
    for coalition in Coalition::all(p, w) {
        let c = coalition.target;
        let s = plurality_scores(&coalition.sincere);
        let wins = p
            .candidates()
            .iter()
            .filter(|&d| d != c)
            .all(|d| TieBreak::ranks_above(c, coalition.size, d, s[d]));
        if wins {
            let ballot = coalition.ballot(&[c]);
            return CmOutcome::Manipulable(Witness::new(&coalition, [(ballot, coalition.size)]));
        }
    }
    CmOutcome::NotManipulable
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manipulation::test_support::*;
    use crate::manipulation::{brute_force_cm, OracleLimits};
    use crate::rules::Rule;
    use proptest::prelude::*;

    #[test]
    fn manipulable_toward_second() {
        let p = profile(3, &[(&[1, 2, 3], 4), (&[2, 1, 3], 3), (&[3, 2, 1], 2)]);
        let w = cm_plurality(&p).witness().cloned().expect("manipulable");
        assert_eq!(w.target, c(2));
        assert_eq!(w.ballots, vec![(r(&[2, 1, 3]), 5)]);
        assert!(w.verify(&p, Rule::Plurality));
    }

    #[test]
    fn not_manipulable_with_clear_majority() {
        let p = profile(3, &[(&[1, 3, 2], 3), (&[2, 1, 3], 5)]);
        assert_eq!(cm_plurality(&p), CmOutcome::NotManipulable);
    }

    #[test]
    fn degenerate_profiles() {
        assert_eq!(cm_plurality(&profile(1, &[(&[1], 3)])), CmOutcome::NotManipulable);
        assert_eq!(cm_plurality(&profile(3, &[])), CmOutcome::NotManipulable);
        assert_eq!(cm_plurality(&profile(3, &[(&[1, 2, 3], 5)])), CmOutcome::NotManipulable);
    }

    proptest! {
        #[test]
        fn agrees_with_oracle(p in arb_small_profile(2..=4, 5)) {
            let oracle = brute_force_cm(&p, Rule::Plurality, &OracleLimits::default()).unwrap();
            prop_assert_eq!(cm_plurality(&p).is_manipulable(), oracle.is_manipulable(), "{:?}", p);
        }
    }
}
