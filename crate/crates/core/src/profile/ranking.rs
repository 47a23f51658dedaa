use std::fmt;

use once_cell::sync::Lazy;

use crate::error::{Error, Result};

/// Largest supported number of candidates. Profiles are stored densely over
/// all `m!` rankings, so this caps storage at 40320 weights.
pub const MAX_CANDIDATES: usize = 8;

/// A candidate, identified by its 1-based id.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Candidate(pub u8);

impl Candidate {
    /// Zero-based index, suitable for indexing per-candidate arrays.
    #[inline]
    pub const fn index(self) -> usize {
        self.0 as usize - 1
    }

    #[inline]
    pub const fn from_index(index: usize) -> Self {
        Candidate(index as u8 + 1)
    }

    #[inline]
    pub const fn id(self) -> u8 {
        self.0
    }
}

impl fmt::Debug for Candidate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for Candidate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A set of candidates as a bitmask (bit `i` is candidate `i + 1`).
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct CandidateSet(u8);

impl CandidateSet {
    pub const EMPTY: CandidateSet = CandidateSet(0);

    /// The set `{1, ..., m}`.
    pub fn full(m: usize) -> Self {
        debug_assert!(m <= MAX_CANDIDATES);
        CandidateSet(((1u16 << m) - 1) as u8)
    }

    pub const fn from_bits(bits: u8) -> Self {
        CandidateSet(bits)
    }

    pub const fn bits(self) -> u8 {
        self.0
    }

    #[inline]
    pub const fn contains(self, c: Candidate) -> bool {
        self.0 & (1 << c.index()) != 0
    }

    #[inline]
    pub fn insert(&mut self, c: Candidate) {
        self.0 |= 1 << c.index();
    }

    #[inline]
    #[must_use]
    pub const fn without(self, c: Candidate) -> Self {
        CandidateSet(self.0 & !(1 << c.index()))
    }

    #[inline]
    #[must_use]
    pub const fn with(self, c: Candidate) -> Self {
        CandidateSet(self.0 | (1 << c.index()))
    }

    #[inline]
    pub const fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    #[inline]
    pub const fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub const fn is_subset_of(self, other: CandidateSet) -> bool {
        self.0 & !other.0 == 0
    }

    /// Members in increasing id order.
    pub fn iter(self) -> impl Iterator<Item = Candidate> + Clone {
        (0..MAX_CANDIDATES)
            .filter(move |&i| self.0 & (1 << i) != 0)
            .map(Candidate::from_index)
    }

    /// All subsets of `self` (including the empty set and `self`).
    pub fn subsets(self) -> impl Iterator<Item = CandidateSet> {
        let full = self.0 as u16;
        // Standard submask enumeration, descending, terminating after 0.
        let mut next = Some(full);
        std::iter::from_fn(move || {
            let cur = next?;
            next = if cur == 0 {
                None
            } else {
                Some((cur - 1) & full)
            };
            Some(CandidateSet(cur as u8))
        })
    }
}

impl FromIterator<Candidate> for CandidateSet {
    fn from_iter<T: IntoIterator<Item = Candidate>>(iter: T) -> Self {
        let mut set = CandidateSet::EMPTY;
        for c in iter {
            set.insert(c);
        }
        set
    }
}

impl fmt::Debug for CandidateSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

/// A strict total order over a set of candidates, most preferred first.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Ranking {
    len: u8,
    order: [Candidate; MAX_CANDIDATES],
}

impl Ranking {
    /// Builds a ranking from candidate ids, most preferred first. The ids must
    /// be distinct and in `1..=8`.
    pub fn from_ids(ids: &[u8]) -> Result<Self> {
        if ids.is_empty() || ids.len() > MAX_CANDIDATES {
            return Err(Error::invalid(format!(
                "a ranking must list between 1 and {MAX_CANDIDATES} candidates, got {}",
                ids.len()
            )));
        }
        let mut seen = CandidateSet::EMPTY;
        let mut order = [Candidate(0); MAX_CANDIDATES];
        for (slot, &id) in order.iter_mut().zip(ids) {
            if id == 0 || id as usize > MAX_CANDIDATES {
                return Err(Error::invalid(format!("candidate id {id} out of range")));
            }
            let c = Candidate(id);
            if seen.contains(c) {
                return Err(Error::invalid(format!("candidate {id} listed twice")));
            }
            seen.insert(c);
            *slot = c;
        }
        Ok(Ranking {
            len: ids.len() as u8,
            order,
        })
    }

    /// The reference ranking `1 > 2 > ... > m`.
    pub fn identity(m: usize) -> Self {
        let mut order = [Candidate(0); MAX_CANDIDATES];
        for (i, slot) in order.iter_mut().enumerate().take(m) {
            *slot = Candidate::from_index(i);
        }
        Ranking {
            len: m as u8,
            order,
        }
    }

    pub(crate) fn from_candidates(cands: &[Candidate]) -> Self {
        let mut order = [Candidate(0); MAX_CANDIDATES];
        order[..cands.len()].copy_from_slice(cands);
        Ranking {
            len: cands.len() as u8,
            order,
        }
    }

    #[inline]
    pub fn as_slice(&self) -> &[Candidate] {
        &self.order[..self.len as usize]
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len as usize
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn candidates(&self) -> CandidateSet {
        self.as_slice().iter().copied().collect()
    }

    #[inline]
    pub fn top(&self) -> Candidate {
        self.order[0]
    }

    /// Most preferred candidate among `within`, if any.
    #[inline]
    pub fn top_in(&self, within: CandidateSet) -> Option<Candidate> {
        self.as_slice().iter().copied().find(|&c| within.contains(c))
    }

    /// 1-based rank of `c`, if ranked.
    pub fn position(&self, c: Candidate) -> Option<usize> {
        self.as_slice().iter().position(|&x| x == c).map(|p| p + 1)
    }

    /// Whether `a` is ranked above `b`. Both must be ranked.
    #[inline]
    pub fn prefers(&self, a: Candidate, b: Candidate) -> bool {
        for &x in self.as_slice() {
            if x == a {
                return true;
            }
            if x == b {
                return false;
            }
        }
        false
    }

    /// Keeps the relative order of the candidates in `within`.
    pub fn restrict(&self, within: CandidateSet) -> Ranking {
        let mut out = [Candidate(0); MAX_CANDIDATES];
        let mut len = 0;
        for &c in self.as_slice() {
            if within.contains(c) {
                out[len] = c;
                len += 1;
            }
        }
        Ranking {
            len: len as u8,
            order: out,
        }
    }

    /// Position of this ranking in the lexicographic enumeration of all
    /// rankings of its candidate set (Lehmer code).
    pub fn lex_index(&self) -> usize {
        let s = self.as_slice();
        let k = s.len();
        let mut idx = 0;
        for i in 0..k {
            let smaller_after = s[i + 1..].iter().filter(|&&x| x < s[i]).count();
            idx += smaller_after * FACTORIALS[k - 1 - i];
        }
        idx
    }

    /// Inverse of [`Ranking::lex_index`] over the candidates of `set`.
    pub fn from_lex_index(set: CandidateSet, index: usize) -> Result<Self> {
        let k = set.len();
        if k == 0 || index >= FACTORIALS[k] {
            return Err(Error::invalid(format!(
                "index {index} out of range for {k} candidates"
            )));
        }
        Ok(ranking_at(&sorted_members(set), index))
    }
}

impl fmt::Debug for Ranking {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for Ranking {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, c) in self.as_slice().iter().enumerate() {
            if i > 0 {
                f.write_str(">")?;
            }
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

pub(crate) const FACTORIALS: [usize; MAX_CANDIDATES + 1] =
    [1, 1, 2, 6, 24, 120, 720, 5040, 40320];

/// `k!` for `k <= 8`.
pub fn factorial(k: usize) -> usize {
    FACTORIALS[k]
}

/// Lexicographic permutation tables of `0..k`, for every `k <= 8`.
static PERMUTATIONS: Lazy<Vec<Vec<[u8; MAX_CANDIDATES]>>> = Lazy::new(|| {
    (0..=MAX_CANDIDATES)
        .map(|k| {
            let mut out = Vec::with_capacity(FACTORIALS[k]);
            let mut cur: Vec<u8> = (0..k as u8).collect();
            loop {
                let mut row = [0u8; MAX_CANDIDATES];
                row[..k].copy_from_slice(&cur);
                out.push(row);
                if !next_permutation(&mut cur) {
                    break;
                }
            }
            out
        })
        .collect()
});

fn next_permutation(v: &mut [u8]) -> bool {
    if v.len() < 2 {
        return false;
    }
    let mut i = v.len() - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = v.len() - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

pub(crate) fn sorted_members(set: CandidateSet) -> Vec<Candidate> {
    set.iter().collect()
}

/// The ranking with lexicographic index `index` over `members` (sorted).
#[inline]
pub(crate) fn ranking_at(members: &[Candidate], index: usize) -> Ranking {
    let perm = &PERMUTATIONS[members.len()][index];
    let mut order = [Candidate(0); MAX_CANDIDATES];
    for (slot, &p) in order.iter_mut().zip(&perm[..members.len()]) {
        *slot = members[p as usize];
    }
    Ranking {
        len: members.len() as u8,
        order,
    }
}

/// All rankings of `set`, in lexicographic order.
pub fn all_rankings(set: CandidateSet) -> impl Iterator<Item = Ranking> {
    let members = sorted_members(set);
    (0..FACTORIALS[members.len()]).map(move |i| ranking_at(&members, i))
}
