//! Ballots, anonymous profiles and the restriction operators used throughout
//! the rules and manipulation deciders.
//!
//! A profile stores one weight per ranking of its candidate set, keyed by the
//! ranking's lexicographic index. Discrete profiles carry integer voter counts;
//! weighted profiles carry nonnegative reals (normalized and expected
//! profiles).

mod format;
mod ranking;

use std::fmt::Debug;
use std::ops::{Add, AddAssign, Mul, Sub};

pub use format::{convert_soc, parse_profile, write_profile};
pub use ranking::{
    all_rankings, factorial, Candidate, CandidateSet, Ranking, MAX_CANDIDATES,
};
pub(crate) use ranking::{ranking_at, FACTORIALS};

use crate::error::{Error, Result};

/// Scalar type of ballot weights.
pub trait Weight:
    Copy
    + PartialOrd
    + Default
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + AddAssign
    + Debug
    + Send
    + Sync
    + 'static
{
    const ZERO: Self;
    fn from_u64(v: u64) -> Self;
    fn to_f64(self) -> f64;
    #[inline]
    fn is_zero(self) -> bool {
        self == Self::ZERO
    }
    /// Strict `self > other`; real weights ignore differences at the level
    /// of rounding error so that exact ties in expected profiles stay ties.
    #[inline]
    fn exceeds(self, other: Self) -> bool {
        self > other
    }
}

impl Weight for u64 {
    const ZERO: Self = 0;
    #[inline]
    fn from_u64(v: u64) -> Self {
        v
    }
    #[inline]
    fn to_f64(self) -> f64 {
        self as f64
    }
}

impl Weight for f64 {
    const ZERO: Self = 0.0;
    #[inline]
    fn from_u64(v: u64) -> Self {
        v as f64
    }
    #[inline]
    fn to_f64(self) -> f64 {
        self
    }
    #[inline]
    fn exceeds(self, other: Self) -> bool {
        self > other + 1e-12 * other.abs().max(1.0)
    }
}

/// An anonymous profile: a weight for every ranking of a candidate set.
#[derive(Clone, PartialEq)]
pub struct Profile<W> {
    candidates: CandidateSet,
    /// Members of `candidates` in increasing order.
    members: Ranking,
    weights: Vec<W>,
}

/// Integer voter counts per ranking.
pub type DiscreteProfile = Profile<u64>;
/// Nonnegative real weights per ranking.
pub type WeightedProfile = Profile<f64>;

impl<W: Weight> Profile<W> {
    /// Empty profile over an arbitrary nonempty candidate set.
    pub fn empty(candidates: CandidateSet) -> Result<Self> {
        if candidates.is_empty() {
            return Err(Error::invalid("a profile needs at least one candidate"));
        }
        let members: Vec<Candidate> = candidates.iter().collect();
        Ok(Profile {
            candidates,
            members: Ranking::from_candidates(&members),
            weights: vec![W::ZERO; FACTORIALS[members.len()]],
        })
    }

    /// Empty profile over candidates `1..=m`.
    pub fn with_candidates(m: usize) -> Result<Self> {
        if m == 0 || m > MAX_CANDIDATES {
            return Err(Error::Unsupported(format!(
                "number of candidates must be in 1..={MAX_CANDIDATES}, got {m}"
            )));
        }
        Self::empty(CandidateSet::full(m))
    }

    /// Builds a profile over `1..=m` from `(ranking, weight)` pairs; repeated
    /// rankings are aggregated.
    pub fn from_ballots(m: usize, ballots: impl IntoIterator<Item = (Ranking, W)>) -> Result<Self> {
        let mut p = Self::with_candidates(m)?;
        for (r, w) in ballots {
            p.add(&r, w)?;
        }
        Ok(p)
    }

    /// Builds a profile directly from its dense weight vector.
    pub fn from_weights(candidates: CandidateSet, weights: Vec<W>) -> Result<Self> {
        let mut p = Self::empty(candidates)?;
        if weights.len() != p.weights.len() {
            return Err(Error::invalid(format!(
                "expected {} weights, got {}",
                p.weights.len(),
                weights.len()
            )));
        }
        if weights.iter().any(|&w| w < W::ZERO) {
            return Err(Error::invalid("ballot weights must be nonnegative"));
        }
        p.weights = weights;
        Ok(p)
    }

    pub fn m(&self) -> usize {
        self.members.len()
    }

    pub fn candidates(&self) -> CandidateSet {
        self.candidates
    }

    /// Adds `w` to the weight of ranking `r`.
    pub fn add(&mut self, r: &Ranking, w: W) -> Result<()> {
        if r.candidates() != self.candidates {
            return Err(Error::invalid(format!(
                "ranking {r} is not over the candidates {:?}",
                self.candidates
            )));
        }
        if w < W::ZERO {
            return Err(Error::invalid("ballot weights must be nonnegative"));
        }
        self.weights[r.lex_index()] += w;
        Ok(())
    }

    /// Weight of ranking `r` (zero for rankings over other candidates).
    pub fn weight(&self, r: &Ranking) -> W {
        if r.candidates() != self.candidates {
            return W::ZERO;
        }
        self.weights[r.lex_index()]
    }

    /// Dense weights, indexed by lexicographic ranking index.
    pub fn weights(&self) -> &[W] {
        &self.weights
    }

    pub(crate) fn weights_mut(&mut self) -> &mut [W] {
        &mut self.weights
    }

    #[inline]
    pub fn ranking(&self, index: usize) -> Ranking {
        ranking_at(self.members.as_slice(), index)
    }

    /// Rankings with nonzero weight, in lexicographic order.
    pub fn iter(&self) -> impl Iterator<Item = (Ranking, W)> + '_ {
        self.weights
            .iter()
            .enumerate()
            .filter(|(_, w)| !w.is_zero())
            .map(move |(i, &w)| (self.ranking(i), w))
    }

    /// Total weight `w(P)`.
    pub fn total(&self) -> W {
        self.weights.iter().fold(W::ZERO, |acc, &w| acc + w)
    }

    pub fn is_empty(&self) -> bool {
        self.weights.iter().all(|w| w.is_zero())
    }

    /// Keeps only the ballots accepted by `keep`.
    pub fn filter(&self, mut keep: impl FnMut(&Ranking) -> bool) -> Self {
        let mut out = self.clone();
        for (i, w) in out.weights.iter_mut().enumerate() {
            if !w.is_zero() && !keep(&ranking_at(self.members.as_slice(), i)) {
                *w = W::ZERO;
            }
        }
        out
    }

    /// `P_K`: every ballot keeps the relative order of the candidates in `k`.
    /// Candidate ids are preserved.
    pub fn restrict_candidates(&self, k: CandidateSet) -> Result<Self> {
        if k.is_empty() {
            return Err(Error::invalid("restriction to an empty candidate set"));
        }
        if !k.is_subset_of(self.candidates) {
            return Err(Error::invalid(format!(
                "{k:?} is not a subset of the candidates {:?}",
                self.candidates
            )));
        }
        let mut out = Self::empty(k)?;
        for (r, w) in self.iter() {
            out.weights[r.restrict(k).lex_index()] += w;
        }
        Ok(out)
    }

    /// `P^{c>d}`: voters ranking `c` above `d`.
    pub fn restrict_voters_preferring(&self, c: Candidate, d: Candidate) -> Result<Self> {
        if c == d {
            return Err(Error::invalid(format!("c and d must differ (both {c})")));
        }
        self.check_member(c)?;
        self.check_member(d)?;
        Ok(self.filter(|r| r.prefers(c, d)))
    }

    /// `P^{r(c)=k}`: voters ranking `c` in position `k` (1-based).
    pub fn restrict_by_rank_position(&self, c: Candidate, k: usize) -> Result<Self> {
        self.check_member(c)?;
        if k == 0 || k > self.m() {
            return Err(Error::invalid(format!(
                "rank position {k} out of range 1..={}",
                self.m()
            )));
        }
        Ok(self.filter(|r| r.position(c) == Some(k)))
    }

    pub(crate) fn check_member(&self, c: Candidate) -> Result<()> {
        if c.0 == 0 || c.index() >= MAX_CANDIDATES || !self.candidates.contains(c) {
            return Err(Error::invalid(format!("unknown candidate {c}")));
        }
        Ok(())
    }
}

impl Profile<u64> {
    /// Number of voters `n(P)`.
    pub fn n(&self) -> u64 {
        self.total()
    }

    /// `P̄`: weights divided by the number of voters.
    pub fn normalize(&self) -> Result<WeightedProfile> {
        let n = self.n();
        if n == 0 {
            return Err(Error::invalid("cannot normalize an empty profile"));
        }
        let nf = n as f64;
        Ok(Profile {
            candidates: self.candidates,
            members: self.members,
            weights: self.weights.iter().map(|&w| w as f64 / nf).collect(),
        })
    }

    /// Multiplies every count by `k`.
    pub fn scale(&self, k: u64) -> Self {
        let mut out = self.clone();
        for w in &mut out.weights {
            *w *= k;
        }
        out
    }

    pub fn to_weighted(&self) -> WeightedProfile {
        Profile {
            candidates: self.candidates,
            members: self.members,
            weights: self.weights.iter().map(|&w| w as f64).collect(),
        }
    }
}

impl Profile<f64> {
    /// Rescales to total weight 1.
    pub fn normalize(&self) -> Result<WeightedProfile> {
        let total = self.total();
        if total <= 0.0 {
            return Err(Error::invalid("cannot normalize a profile of zero weight"));
        }
        let mut out = self.clone();
        for w in &mut out.weights {
            *w /= total;
        }
        Ok(out)
    }
}

impl<W: Weight> Debug for Profile<W> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_map().entries(self.iter()).finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn r(ids: &[u8]) -> Ranking {
        Ranking::from_ids(ids).unwrap()
    }

    fn c(id: u8) -> Candidate {
        Candidate(id)
    }

    fn eight_voter() -> DiscreteProfile {
        DiscreteProfile::from_ballots(3, [(r(&[1, 3, 2]), 3), (r(&[2, 1, 3]), 5)]).unwrap()
    }

    #[test]
    fn normalize_examples() {
        let single = DiscreteProfile::from_ballots(2, [(r(&[1, 2]), 1)]).unwrap();
        assert_eq!(single.normalize().unwrap().weight(&r(&[1, 2])), 1.0);

        let p = eight_voter().normalize().unwrap();
        assert_eq!(p.weight(&r(&[1, 3, 2])), 0.375);
        assert_eq!(p.weight(&r(&[2, 1, 3])), 0.625);

        let sym = DiscreteProfile::from_ballots(2, [(r(&[1, 2]), 2), (r(&[2, 1]), 2)]).unwrap();
        let s = sym.normalize().unwrap();
        assert_eq!(s.weight(&r(&[1, 2])), 0.5);
        assert_eq!(s.weight(&r(&[2, 1])), 0.5);
    }

    #[test]
    fn normalize_rejects_empty() {
        let p = DiscreteProfile::with_candidates(3).unwrap();
        assert!(matches!(p.normalize(), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn restrict_candidates_examples() {
        let p = DiscreteProfile::from_ballots(3, [(r(&[1, 3, 2]), 1)]).unwrap();
        let k: CandidateSet = [c(2), c(3)].into_iter().collect();
        let q = p.restrict_candidates(k).unwrap();
        assert_eq!(q.weight(&r(&[3, 2])), 1);
        assert_eq!(q.n(), 1);

        assert_eq!(p.restrict_candidates(CandidateSet::full(3)).unwrap(), p);

        let p = DiscreteProfile::from_ballots(3, [(r(&[1, 2, 3]), 4), (r(&[2, 1, 3]), 3)]).unwrap();
        let k: CandidateSet = [c(1), c(3)].into_iter().collect();
        let q = p.restrict_candidates(k).unwrap();
        assert_eq!(q.weight(&r(&[1, 3])), 7);
        assert_eq!(q.n(), 7);
    }

    #[test]
    fn restrict_candidates_errors() {
        let p = eight_voter();
        assert!(p.restrict_candidates(CandidateSet::EMPTY).is_err());
        let k: CandidateSet = [c(1), c(4)].into_iter().collect();
        assert!(p.restrict_candidates(k).is_err());
    }

    #[test]
    fn restrict_voters_preferring_examples() {
        let unanimous = DiscreteProfile::from_ballots(3, [(r(&[1, 2, 3]), 4)]).unwrap();
        assert_eq!(unanimous.restrict_voters_preferring(c(2), c(1)).unwrap().n(), 0);

        let p = eight_voter();
        let q = p.restrict_voters_preferring(c(2), c(1)).unwrap();
        assert_eq!(q, DiscreteProfile::from_ballots(3, [(r(&[2, 1, 3]), 5)]).unwrap());
        let q = p.restrict_voters_preferring(c(3), c(2)).unwrap();
        assert_eq!(q, DiscreteProfile::from_ballots(3, [(r(&[1, 3, 2]), 3)]).unwrap());

        assert!(p.restrict_voters_preferring(c(2), c(2)).is_err());
    }

    #[test]
    fn restrict_by_rank_position_examples() {
        let unanimous = DiscreteProfile::from_ballots(3, [(r(&[1, 2, 3]), 4)]).unwrap();
        assert_eq!(unanimous.restrict_by_rank_position(c(1), 1).unwrap(), unanimous);

        let p = DiscreteProfile::from_ballots(3, [(r(&[2, 1, 3]), 5)]).unwrap();
        assert_eq!(p.restrict_by_rank_position(c(1), 2).unwrap(), p);

        let p = DiscreteProfile::from_ballots(3, [(r(&[1, 3, 2]), 3)]).unwrap();
        assert_eq!(p.restrict_by_rank_position(c(3), 1).unwrap().n(), 0);

        assert!(p.restrict_by_rank_position(c(3), 0).is_err());
        assert!(p.restrict_by_rank_position(c(3), 4).is_err());
    }

    #[test]
    fn add_rejects_foreign_rankings() {
        let mut p = DiscreteProfile::with_candidates(3).unwrap();
        assert!(p.add(&r(&[1, 2]), 1).is_err());
        assert!(DiscreteProfile::with_candidates(9).is_err());
    }

    fn arb_profile() -> impl Strategy<Value = DiscreteProfile> {
        (1usize..=5).prop_flat_map(|m| {
            proptest::collection::vec(0u64..5, factorial(m)).prop_map(move |w| {
                DiscreteProfile::from_weights(CandidateSet::full(m), w).unwrap()
            })
        })
    }

    proptest! {
        #[test]
        fn voter_restrictions_are_additive(p in arb_profile(), a in 1u8..=5, b in 1u8..=5) {
            let m = p.m() as u8;
            prop_assume!(a <= m && b <= m && a != b);
            let ab = p.restrict_voters_preferring(c(a), c(b)).unwrap();
            let ba = p.restrict_voters_preferring(c(b), c(a)).unwrap();
            prop_assert_eq!(ab.n() + ba.n(), p.n());
        }

        #[test]
        fn rank_positions_partition_the_profile(p in arb_profile(), a in 1u8..=5) {
            prop_assume!(a as usize <= p.m());
            let total: u64 = (1..=p.m())
                .map(|k| p.restrict_by_rank_position(c(a), k).unwrap().n())
                .sum();
            prop_assert_eq!(total, p.n());
        }

        #[test]
        fn candidate_restriction_preserves_weight(p in arb_profile(), bits in 1u8..32) {
            let k = CandidateSet::from_bits(bits & p.candidates().bits());
            prop_assume!(!k.is_empty());
            prop_assert_eq!(p.restrict_candidates(k).unwrap().n(), p.n());
        }

        #[test]
        fn normalize_is_idempotent(p in arb_profile()) {
            prop_assume!(p.n() > 0);
            let once = p.normalize().unwrap();
            let twice = once.normalize().unwrap();
            for (a, b) in once.weights().iter().zip(twice.weights()) {
                prop_assert!((a - b).abs() <= 1e-12);
            }
            prop_assert!((once.total() - 1.0).abs() <= 1e-12);
        }
    }
}
