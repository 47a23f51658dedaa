//! Perturbed Culture: each voter independently takes the reference ranking
//! `1 > 2 > ... > m` with probability `theta`, and a uniformly random ranking
//! otherwise.

use num_rational::Rational64;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::profile::{factorial, CandidateSet, DiscreteProfile, WeightedProfile, MAX_CANDIDATES};

/// Random-profile model with `m` candidates and concentration `theta`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PerturbedCulture {
    m: usize,
    theta: Rational64,
}

impl PerturbedCulture {
    pub fn new(m: usize, theta: Rational64) -> Result<Self> {
        if m == 0 || m > MAX_CANDIDATES {
            return Err(Error::Unsupported(format!(
                "number of candidates must be in 1..={MAX_CANDIDATES}, got {m}"
            )));
        }
        if theta < Rational64::zero() || theta > Rational64::one() {
            return Err(Error::invalid(format!("theta must lie in [0, 1], got {theta}")));
        }
        Ok(PerturbedCulture { m, theta })
    }

    /// Impartial Culture (`theta = 0`).
    pub fn impartial(m: usize) -> Result<Self> {
        Self::new(m, Rational64::zero())
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn theta(&self) -> Rational64 {
        self.theta
    }

    /// Draws `n` voters from a generator seeded with `trial_seed`.
    pub fn sample_profile(&self, n: u64, trial_seed: u64) -> DiscreteProfile {
        let mut rng = ChaCha8Rng::seed_from_u64(trial_seed);
        self.sample_with(&mut rng, n)
    }

    /// Draws `n` voters from `rng`. The reference ranking has lexicographic
    /// index 0; a uniform ranking is a uniform index in `0..m!`.
    pub fn sample_with<R: Rng + ?Sized>(&self, rng: &mut R, n: u64) -> DiscreteProfile {
        let mut profile = DiscreteProfile::with_candidates(self.m).expect("validated m");
        let rankings = factorial(self.m) as u32;
        let counts = profile.weights_mut();
        let (num, den) = (*self.theta.numer() as u64, *self.theta.denom() as u64);
        if num == 0 {
            for _ in 0..n {
                counts[rng.gen_range(0..rankings) as usize] += 1;
            }
        } else if num == den {
            counts[0] += n;
        } else {
            for _ in 0..n {
                if rng.gen_range(0..den) < num {
                    counts[0] += 1;
                } else {
                    counts[rng.gen_range(0..rankings) as usize] += 1;
                }
            }
        }
        profile
    }

    /// The expected normalized profile: `theta + (1-theta)/m!` on the
    /// reference ranking and `(1-theta)/m!` on every other ranking.
    pub fn expected_profile(&self) -> WeightedProfile {
        let f = factorial(self.m);
        let theta = theta_to_f64(self.theta);
        let base = (1.0 - theta) / f as f64;
        let mut weights = vec![base; f];
        weights[0] = theta + base;
        WeightedProfile::from_weights(CandidateSet::full(self.m), weights).expect("valid weights")
    }
}

/// Derives independent per-trial seeds from one master seed, so that every
/// trial's random stream depends only on `(master_seed, trial_index)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SeedPolicy {
    pub master_seed: u64,
}

impl SeedPolicy {
    pub fn new(master_seed: u64) -> Self {
        SeedPolicy { master_seed }
    }

    /// `splitmix64(master_seed ^ splitmix64(trial_index))`.
    pub fn trial_seed(&self, trial_index: u64) -> u64 {
        splitmix64(self.master_seed ^ splitmix64(trial_index))
    }
}

/// The SplitMix64 output function applied to `x + golden gamma`.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn theta_to_f64(theta: Rational64) -> f64 {
    *theta.numer() as f64 / *theta.denom() as f64
}

/// Parses `theta` as an exact rational from `p/q`, an integer, or a decimal
/// (`0.05` is read as `1/20`).
pub fn parse_theta(s: &str) -> Result<Rational64> {
    let s = s.trim();
    let bad = || Error::invalid(format!("cannot parse {s:?} as a rational number"));
    if let Some((p, q)) = s.split_once('/') {
        let p: i64 = p.trim().parse().map_err(|_| bad())?;
        let q: i64 = q.trim().parse().map_err(|_| bad())?;
        if q == 0 {
            return Err(bad());
        }
        return Ok(Rational64::new(p, q));
    }
    let (neg, digits) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s),
    };
    let (int, frac) = digits.split_once('.').unwrap_or((digits, ""));
    if int.is_empty() && frac.is_empty()
        || !int.chars().all(|c| c.is_ascii_digit())
        || !frac.chars().all(|c| c.is_ascii_digit())
        || frac.len() > 15
    {
        return Err(bad());
    }
    let den = 10i64.pow(frac.len() as u32);
    let int_part: i64 = if int.is_empty() { 0 } else { int.parse().map_err(|_| bad())? };
    let frac_part: i64 = if frac.is_empty() { 0 } else { frac.parse().map_err(|_| bad())? };
    let num = int_part
        .checked_mul(den)
        .and_then(|x| x.checked_add(frac_part))
        .ok_or_else(bad)?;
    Ok(Rational64::new(if neg { -num } else { num }, den))
}

/// Exact decimal when the denominator divides a power of ten, `p/q`
/// otherwise.
pub fn format_theta(theta: Rational64) -> String {
    let (num, den) = (*theta.numer(), *theta.denom());
    if den == 1 {
        return num.to_string();
    }
    let mut d = den;
    let (mut twos, mut fives) = (0u32, 0u32);
    while d % 2 == 0 {
        d /= 2;
        twos += 1;
    }
    while d % 5 == 0 {
        d /= 5;
        fives += 1;
    }
    if d != 1 {
        return format!("{num}/{den}");
    }
    let digits = twos.max(fives);
    let scale = 10i64.pow(digits) / den;
    let scaled = num.abs() * scale;
    let pow = 10i64.pow(digits);
    let sign = if num < 0 { "-" } else { "" };
    format!(
        "{sign}{}.{:0width$}",
        scaled / pow,
        scaled % pow,
        width = digits as usize
    )
}
