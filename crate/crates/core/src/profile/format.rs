//! Line-based profile text format.
//!
//! ```text
//! # optional comments
//! m=3
//! 3: 1>3>2
//! 5: 2>1>3
//! ```
//!
//! Duplicate ranking lines are aggregated. [`convert_soc`] reads the
//! strict-order-complete format used by PrefLib (`# NUMBER ALTERNATIVES: m`
//! header, `count: a,b,c` lines).

use std::fmt::Write as _;

use super::{CandidateSet, DiscreteProfile, Ranking, MAX_CANDIDATES};
use crate::error::{Error, Result};

pub fn parse_profile(text: &str) -> Result<DiscreteProfile> {
    let mut profile: Option<DiscreteProfile> = None;
    for (i, raw) in text.lines().enumerate() {
        let lineno = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        match profile.as_mut() {
            None => {
                let m = line
                    .strip_prefix("m=")
                    .ok_or_else(|| Error::parse(lineno, "expected header `m=<int>`"))?
                    .trim()
                    .parse::<usize>()
                    .map_err(|e| Error::parse(lineno, format!("bad candidate count: {e}")))?;
                if m == 0 || m > MAX_CANDIDATES {
                    return Err(Error::parse(
                        lineno,
                        format!("candidate count must be in 1..={MAX_CANDIDATES}, got {m}"),
                    ));
                }
                profile = Some(DiscreteProfile::with_candidates(m)?);
            }
            Some(p) => {
                let (count, ranking) = parse_ballot_line(line, '>', lineno)?;
                add_ballot(p, &ranking, count, lineno)?;
            }
        }
    }
    profile.ok_or_else(|| Error::parse(0, "missing header `m=<int>`"))
}

/// Serializes a profile over candidates `1..=m`; rankings appear in
/// lexicographic order, zero counts are omitted.
pub fn write_profile(p: &DiscreteProfile) -> Result<String> {
    if p.candidates() != CandidateSet::full(p.m()) {
        return Err(Error::invalid(
            "only profiles over candidates 1..=m can be written",
        ));
    }
    let mut out = format!("m={}\n", p.m());
    for (r, count) in p.iter() {
        let _ = writeln!(out, "{count}: {r}");
    }
    Ok(out)
}

/// Reads a strict-order-complete (`soc`) ballot file.
pub fn convert_soc(text: &str) -> Result<DiscreteProfile> {
    let mut m: Option<usize> = None;
    let mut profile: Option<DiscreteProfile> = None;
    for (i, raw) in text.lines().enumerate() {
        let lineno = i + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(meta) = line.strip_prefix('#') {
            let meta = meta.trim();
            if let Some(v) = meta.strip_prefix("NUMBER ALTERNATIVES:") {
                let k = v
                    .trim()
                    .parse::<usize>()
                    .map_err(|e| Error::parse(lineno, format!("bad alternative count: {e}")))?;
                if k == 0 || k > MAX_CANDIDATES {
                    return Err(Error::parse(
                        lineno,
                        format!("alternative count must be in 1..={MAX_CANDIDATES}, got {k}"),
                    ));
                }
                m = Some(k);
            } else if let Some(v) = meta.strip_prefix("DATA TYPE:") {
                if v.trim() != "soc" {
                    return Err(Error::parse(
                        lineno,
                        format!("only complete strict orders (soc) are supported, got {}", v.trim()),
                    ));
                }
            }
            continue;
        }
        if profile.is_none() {
            let k = m.ok_or_else(|| {
                Error::parse(lineno, "ballot line before `# NUMBER ALTERNATIVES:` header")
            })?;
            profile = Some(DiscreteProfile::with_candidates(k)?);
        }
        let (count, ranking) = parse_ballot_line(line, ',', lineno)?;
        add_ballot(profile.as_mut().unwrap(), &ranking, count, lineno)?;
    }
    match (profile, m) {
        (Some(p), _) => Ok(p),
        (None, Some(k)) => DiscreteProfile::with_candidates(k),
        (None, None) => Err(Error::parse(0, "missing `# NUMBER ALTERNATIVES:` header")),
    }
}

fn parse_ballot_line(line: &str, sep: char, lineno: usize) -> Result<(u64, Ranking)> {
    let (count, order) = line
        .split_once(':')
        .ok_or_else(|| Error::parse(lineno, "expected `<count>: <ranking>`"))?;
    let count = count
        .trim()
        .parse::<u64>()
        .map_err(|e| Error::parse(lineno, format!("bad count: {e}")))?;
    let ids = order
        .split(sep)
        .map(|t| {
            t.trim()
                .parse::<u8>()
                .map_err(|e| Error::parse(lineno, format!("bad candidate id {:?}: {e}", t.trim())))
        })
        .collect::<Result<Vec<_>>>()?;
    let ranking = Ranking::from_ids(&ids).map_err(|e| Error::parse(lineno, e.to_string()))?;
    Ok((count, ranking))
}

fn add_ballot(p: &mut DiscreteProfile, r: &Ranking, count: u64, lineno: usize) -> Result<()> {
    if r.candidates() != p.candidates() {
        return Err(Error::parse(
            lineno,
            format!("ranking {r} is not a permutation of 1..={}", p.m()),
        ));
    }
    p.add(r, count)
}
