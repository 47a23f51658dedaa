//! Monte-Carlo estimation of CM rates over `(n, theta)` grids.
//!
//! Every trial draws its profile from a generator seeded by
//! [`SeedPolicy::trial_seed`], so an estimate depends only on its parameters
//! and the master seed, never on the number of worker threads.

use std::collections::HashMap;
use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use num_rational::Rational64;
use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::culture::{format_theta, parse_theta, PerturbedCulture, SeedPolicy};
use crate::error::{Error, Result};
use crate::manipulation::{cm_irv_with_budget, cm_plurality, cm_two_round, CmOutcome};
use crate::profile::MAX_CANDIDATES;
use crate::rules::Rule;
use crate::theory::theta_c;

pub const DEFAULT_TRIALS: u64 = 100_000;
pub const DEFAULT_SEED: u64 = 2024;

pub const CSV_HEADER: [&str; 10] = [
    "rule",
    "m",
    "n",
    "theta",
    "trials",
    "cm_count",
    "rate",
    "std_error",
    "margin",
    "config_hash",
];

/// One estimated CM rate.
#[derive(Clone, Debug, PartialEq)]
pub struct RatePoint {
    pub rule: Rule,
    pub m: usize,
    pub n: u64,
    pub theta: Rational64,
    pub trials: u64,
    pub cm_count: u64,
    pub rate: f64,
    /// Binomial standard error `sqrt(rate (1 - rate) / trials)`.
    pub std_error: f64,
    /// `1 / sqrt(trials)`.
    pub margin: f64,
    pub config_hash: String,
}

impl RatePoint {
    pub fn new(
        rule: Rule,
        m: usize,
        n: u64,
        theta: Rational64,
        trials: u64,
        cm_count: u64,
        master_seed: u64,
    ) -> Self {
        let rate = cm_count as f64 / trials as f64;
        RatePoint {
            rule,
            m,
            n,
            theta,
            trials,
            cm_count,
            rate,
            std_error: (rate * (1.0 - rate) / trials as f64).sqrt(),
            margin: 1.0 / (trials as f64).sqrt(),
            config_hash: config_hash(rule, m, n, theta, trials, master_seed),
        }
    }

    fn record(&self) -> [String; 10] {
        [
            self.rule.name().to_string(),
            self.m.to_string(),
            self.n.to_string(),
            format_theta(self.theta),
            self.trials.to_string(),
            self.cm_count.to_string(),
            self.rate.to_string(),
            self.std_error.to_string(),
            self.margin.to_string(),
            self.config_hash.clone(),
        ]
    }

    fn from_record(rec: &csv::StringRecord, line: usize) -> Result<Self> {
        if rec.len() != CSV_HEADER.len() {
            return Err(Error::parse(line, format!("expected 10 fields, got {}", rec.len())));
        }
        let field = |i: usize| rec.get(i).unwrap_or("").trim();
        let num = |i: usize| -> Result<u64> {
            field(i)
                .parse()
                .map_err(|e| Error::parse(line, format!("bad {}: {e}", CSV_HEADER[i])))
        };
        let real = |i: usize| -> Result<f64> {
            field(i)
                .parse()
                .map_err(|e| Error::parse(line, format!("bad {}: {e}", CSV_HEADER[i])))
        };
        Ok(RatePoint {
            rule: field(0).parse().map_err(|e: Error| Error::parse(line, e.to_string()))?,
            m: num(1)? as usize,
            n: num(2)?,
            theta: parse_theta(field(3)).map_err(|e| Error::parse(line, e.to_string()))?,
            trials: num(4)?,
            cm_count: num(5)?,
            rate: real(6)?,
            std_error: real(7)?,
            margin: real(8)?,
            config_hash: field(9).to_string(),
        })
    }
}

/// First 16 hex digits of SHA-256 over `rule;m;n;theta;trials;seed`.
pub fn config_hash(rule: Rule, m: usize, n: u64, theta: Rational64, trials: u64, seed: u64) -> String {
    let canonical = format!("{};{m};{n};{};{trials};{seed}", rule.name(), format_theta(theta));
    Sha256::digest(canonical.as_bytes())
        .iter()
        .take(8)
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// Parameters of a sweep over the grid `thetas x ns`.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepConfig {
    pub rule: Rule,
    pub m: usize,
    pub thetas: Vec<Rational64>,
    pub ns: Vec<u64>,
    pub trials: u64,
    pub master_seed: u64,
    /// Worker threads; 0 uses the rayon default.
    pub workers: usize,
    /// Replace `thetas` by the rule's critical value.
    pub at_critical: bool,
    /// IRV search budget per profile; `None` is unlimited.
    pub node_budget: Option<u64>,
}

impl SweepConfig {
    pub fn new(rule: Rule, m: usize) -> Self {
        SweepConfig {
            rule,
            m,
            thetas: Vec::new(),
            ns: Vec::new(),
            trials: DEFAULT_TRIALS,
            master_seed: DEFAULT_SEED,
            workers: 0,
            at_critical: false,
            node_budget: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.m == 0 || self.m > MAX_CANDIDATES {
            return Err(Error::Unsupported(format!(
                "number of candidates must be in 1..={MAX_CANDIDATES}, got {}",
                self.m
            )));
        }
        if self.trials == 0 {
            return Err(Error::invalid("trials must be at least 1"));
        }
        if self.ns.contains(&0) {
            return Err(Error::invalid("every n must be at least 1"));
        }
        for &t in &self.thetas {
            PerturbedCulture::new(self.m, t)?;
        }
        Ok(())
    }

    /// Grid cells in output order: by theta, then by n.
    pub fn cells(&self) -> Result<Vec<(Rational64, u64)>> {
        let thetas = if self.at_critical {
            vec![theta_c(self.rule, self.m)?]
        } else {
            self.thetas.clone()
        };
        Ok(thetas
            .iter()
            .flat_map(|&t| self.ns.iter().map(move |&n| (t, n)))
            .collect())
    }
}

fn decide(rule: Rule, p: &crate::profile::DiscreteProfile, budget: Option<u64>) -> CmOutcome {
    match rule {
        Rule::Plurality => cm_plurality(p),
        Rule::TwoRound => cm_two_round(p),
        Rule::Irv => cm_irv_with_budget(p, budget),
    }
}

/// Counts CM profiles among `trials` draws, in the current rayon pool.
/// Returns `(cm_count, undecided)`.
fn count_cm(
    rule: Rule,
    culture: PerturbedCulture,
    n: u64,
    trials: u64,
    seeds: SeedPolicy,
    budget: Option<u64>,
) -> (u64, u64) {
    (0..trials)
        .into_par_iter()
        .map(|i| {
            let p = culture.sample_profile(n, seeds.trial_seed(i));
            match decide(rule, &p, budget) {
                CmOutcome::Manipulable(_) => (1u64, 0u64),
                CmOutcome::NotManipulable => (0, 0),
                CmOutcome::Undecided => (0, 1),
            }
        })
        .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1))
}

/// Estimates the CM rate of `rule` for `n` voters drawn from the Perturbed
/// Culture with `m` candidates and concentration `theta`.
pub fn estimate_cm_rate(
    rule: Rule,
    m: usize,
    n: u64,
    theta: Rational64,
    trials: u64,
    master_seed: u64,
) -> Result<RatePoint> {
    estimate_with_budget(rule, m, n, theta, trials, master_seed, None)
}

fn estimate_with_budget(
    rule: Rule,
    m: usize,
    n: u64,
    theta: Rational64,
    trials: u64,
    master_seed: u64,
    budget: Option<u64>,
) -> Result<RatePoint> {
    if trials == 0 {
        return Err(Error::invalid("trials must be at least 1"));
    }
    if n == 0 {
        return Err(Error::invalid("n must be at least 1"));
    }
    let culture = PerturbedCulture::new(m, theta)?;
    let (cm_count, undecided) = count_cm(rule, culture, n, trials, SeedPolicy::new(master_seed), budget);
    if undecided > 0 {
        return Err(Error::Undecided { undecided, trials });
    }
    Ok(RatePoint::new(rule, m, n, theta, trials, cm_count, master_seed))
}

/// Runs every cell of the sweep. With `out`, cells already present in that
/// file (same config hash) are reused, and the file is rewritten after every
/// new cell so an interrupted run leaves valid CSV behind.
pub fn run_sweep(config: &SweepConfig, out: Option<&Path>) -> Result<Vec<RatePoint>> {
    config.validate()?;
    let cells = config.cells()?;
    let mut previous: HashMap<String, RatePoint> = HashMap::new();
    if let Some(path) = out {
        if path.exists() {
            for p in read_rate_points(fs::File::open(path)?)? {
                previous.insert(p.config_hash.clone(), p);
            }
        }
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .map_err(|e| Error::invalid(format!("cannot start worker pool: {e}")))?;

    let mut points = Vec::with_capacity(cells.len());
    for (theta, n) in cells {
        let hash = config_hash(config.rule, config.m, n, theta, config.trials, config.master_seed);
        if let Some(p) = previous.remove(&hash) {
            log::info!("reusing n={n} theta={} from previous run", format_theta(theta));
            points.push(p);
            continue;
        }
        let point = pool.install(|| {
            estimate_with_budget(
                config.rule,
                config.m,
                n,
                theta,
                config.trials,
                config.master_seed,
                config.node_budget,
            )
        })?;
        log::info!(
            "{} m={} n={n} theta={}: rate {}",
            config.rule,
            config.m,
            format_theta(theta),
            point.rate
        );
        points.push(point);
        if let Some(path) = out {
            write_atomically(path, &points)?;
        }
    }
    if let Some(path) = out {
        write_atomically(path, &points)?;
    }
    Ok(points)
}

fn write_atomically(path: &Path, points: &[RatePoint]) -> Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = std::path::PathBuf::from(tmp);
    {
        let mut file = fs::File::create(&tmp)?;
        write_rate_points(&mut file, points)?;
        file.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

pub fn write_rate_points<W: Write>(w: W, points: &[RatePoint]) -> Result<()> {
    let mut writer = csv::Writer::from_writer(w);
    writer.write_record(CSV_HEADER)?;
    for p in points {
        writer.write_record(p.record())?;
    }
    writer.flush()?;
    Ok(())
}

pub fn read_rate_points<R: Read>(r: R) -> Result<Vec<RatePoint>> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(r);
    let header = reader.headers()?.clone();
    if header.iter().map(str::trim).ne(CSV_HEADER) {
        return Err(Error::parse(1, "unexpected header for a rate CSV"));
    }
    reader
        .records()
        .enumerate()
        .map(|(i, rec)| RatePoint::from_record(&rec?, i + 2))
        .collect()
}

/// Parses an `n` grid: a comma-separated list of integers, inclusive ranges
/// `a:b:step`, and geometric ranges `lo..hi(log)` with four points per
/// doubling (`round(lo * 2^(k/4))`, duplicates removed).
pub fn parse_n_grid(s: &str) -> Result<Vec<u64>> {
    let bad = |item: &str, why: &str| Error::invalid(format!("bad n grid item {item:?}: {why}"));
    let mut out = Vec::new();
    for item in s.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        if let Some(range) = item.strip_suffix("(log)") {
            let (lo, hi) = range.split_once("..").ok_or_else(|| bad(item, "expected lo..hi(log)"))?;
            let lo: u64 = lo.trim().parse().map_err(|_| bad(item, "lo is not an integer"))?;
            let hi: u64 = hi.trim().parse().map_err(|_| bad(item, "hi is not an integer"))?;
            if lo == 0 || hi < lo {
                return Err(bad(item, "need 1 <= lo <= hi"));
            }
            for k in 0.. {
                let v = (lo as f64 * 2f64.powf(k as f64 / 4.0)).round() as u64;
                if v > hi {
                    break;
                }
                if out.last() != Some(&v) {
                    out.push(v);
                }
            }
        } else if item.contains(':') {
            let parts: Vec<&str> = item.split(':').collect();
            let [a, b, step] = parts[..] else {
                return Err(bad(item, "expected a:b:step"));
            };
            let parse = |t: &str| t.trim().parse::<u64>().map_err(|_| bad(item, "not an integer"));
            let (a, b, step) = (parse(a)?, parse(b)?, parse(step)?);
            if step == 0 || b < a {
                return Err(bad(item, "need a <= b and step > 0"));
            }
            out.extend((a..=b).step_by(step as usize));
        } else {
            out.push(item.parse().map_err(|_| bad(item, "not an integer"))?);
        }
    }
    Ok(out)
}

/// Parses a theta grid: a comma-separated list of values (`0.05`, `1/7`) and
/// inclusive ranges `a:b:step`, all exact.
pub fn parse_theta_grid(s: &str) -> Result<Vec<Rational64>> {
    let mut out = Vec::new();
    for item in s.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        if item.contains(':') {
            let parts: Vec<&str> = item.split(':').collect();
            let [a, b, step] = parts[..] else {
                return Err(Error::invalid(format!("bad theta grid item {item:?}: expected a:b:step")));
            };
            let (a, b, step) = (parse_theta(a)?, parse_theta(b)?, parse_theta(step)?);
            if step <= Rational64::from_integer(0) || b < a {
                return Err(Error::invalid(format!(
                    "bad theta grid item {item:?}: need a <= b and step > 0"
                )));
            }
            let mut t = a;
            while t <= b {
                out.push(t);
                t += step;
            }
        } else {
            out.push(parse_theta(item)?);
        }
    }
    Ok(out)
}
