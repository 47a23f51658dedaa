//! Condorcet / Super Condorcet / IRV-manipulability statistics over a corpus
//! of profiles.

use crate::manipulation::{cm_irv, exists_scw};
use crate::profile::{Candidate, DiscreteProfile};
use crate::rules::condorcet_winner;

/// Properties of one profile.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ProfileFacts {
    pub condorcet_winner: Option<Candidate>,
    pub irv_not_cm: bool,
    pub scw: Option<Candidate>,
}

impl ProfileFacts {
    pub fn of(p: &DiscreteProfile) -> Self {
        ProfileFacts {
            condorcet_winner: condorcet_winner(p),
            irv_not_cm: !cm_irv(p).is_manipulable(),
            scw: exists_scw(p),
        }
    }
}

/// Aggregate fractions over a corpus.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DatasetStats {
    pub profile_count: usize,
    pub fraction_with_cw: f64,
    pub fraction_irv_not_cm: f64,
    pub fraction_with_scw: f64,
    /// `fraction_with_scw / fraction_irv_not_cm`, when the latter is positive.
    pub ratio_scw_over_not_cm: Option<f64>,
}

impl DatasetStats {
    pub fn from_facts(facts: &[ProfileFacts]) -> Self {
        let count = facts.len();
        let frac = |k: usize| if count == 0 { 0.0 } else { k as f64 / count as f64 };
        let cw = frac(facts.iter().filter(|f| f.condorcet_winner.is_some()).count());
        let not_cm = frac(facts.iter().filter(|f| f.irv_not_cm).count());
        let scw = frac(facts.iter().filter(|f| f.scw.is_some()).count());
        DatasetStats {
            profile_count: count,
            fraction_with_cw: cw,
            fraction_irv_not_cm: not_cm,
            fraction_with_scw: scw,
            ratio_scw_over_not_cm: (not_cm > 0.0).then(|| scw / not_cm),
        }
    }

    pub fn from_profiles<'a>(profiles: impl IntoIterator<Item = &'a DiscreteProfile>) -> Self {
        let facts: Vec<ProfileFacts> = profiles.into_iter().map(ProfileFacts::of).collect();
        Self::from_facts(&facts)
    }
}
