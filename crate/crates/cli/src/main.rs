use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use log::{info, warn};

use maniplab_core::analysis::{
    fit_power_law, fit_slopes, read_slope_fits, write_power_law_fits, write_slope_fits, PowerLawFit,
    TailWindow,
};
use maniplab_core::culture::format_theta;
use maniplab_core::dataset::{DatasetStats, ProfileFacts};
use maniplab_core::experiment::{
    parse_n_grid, parse_theta_grid, read_rate_points, run_sweep, write_rate_points, SweepConfig,
    DEFAULT_SEED, DEFAULT_TRIALS,
};
use maniplab_core::manipulation::{brute_force_cm, cm, exists_scw, OracleLimits};
use maniplab_core::profile::{convert_soc, parse_profile, write_profile};
use maniplab_core::rules::{irv_winner, two_round_winner};
use maniplab_core::theory::theta_c;
use maniplab_core::{CmOutcome, DiscreteProfile, Error, Rule};

#[derive(Parser)]
#[command(name = "maniplab", version, about = "Coalitional manipulation of Plurality, Two-Round and IRV")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the critical concentration of a rule.
    ThetaC {
        #[arg(long)]
        rule: Rule,
        #[arg(long)]
        m: usize,
    },
    /// Estimate CM rates over a grid of theta and n.
    Sweep(SweepArgs),
    /// Fit the exponential decay rate of every curve in a rate CSV.
    Slopes {
        /// Rate CSV written by `sweep`.
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = TailWindow::default().rate_lo)]
        rate_lo: f64,
        #[arg(long, default_value_t = TailWindow::default().rate_hi)]
        rate_hi: f64,
        #[arg(long, default_value_t = TailWindow::default().min_count)]
        min_count: u64,
    },
    /// Fit power laws `C = A x^beta` to a slope CSV, separately near and far
    /// from the threshold.
    Exponent {
        /// Slope CSV written by `slopes`.
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Distance to the threshold separating the two regimes.
        #[arg(long, default_value_t = 0.05)]
        split: f64,
    },
    /// Condorcet, SCW and IRV statistics over a directory of profile files.
    DatasetStats {
        dir: PathBuf,
        /// Per-file CSV.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Inspect one profile: winner, CM verdict and witness, SCW.
    Check {
        file: PathBuf,
        /// Defaults to all three rules.
        #[arg(long)]
        rule: Option<Rule>,
        /// Cross-check the verdict with the brute-force oracle.
        #[arg(long)]
        oracle: bool,
    },
    /// Convert a strict-order-complete (PrefLib soc) file to the profile format.
    Convert {
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    rule: Rule,
    #[arg(long)]
    m: usize,
    /// `a:b:step`, a comma list, or a single value; exact rationals such as
    /// `1/17` are accepted.
    #[arg(long, conflicts_with = "critical", required_unless_present = "critical")]
    theta: Option<String>,
    /// Use the rule's critical theta.
    #[arg(long)]
    critical: bool,
    /// `lo..hi(log)`, `a:b:step`, a comma list, or a single value.
    #[arg(long)]
    n: String,
    #[arg(long, default_value_t = DEFAULT_TRIALS)]
    trials: u64,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Worker threads; the output does not depend on it.
    #[arg(long, env = "MANIPLAB_WORKERS")]
    workers: Option<usize>,
    /// Resumable output CSV; prints to stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// IRV search nodes per profile before giving up.
    #[arg(long)]
    node_budget: Option<u64>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::ThetaC { rule, m } => cmd_theta_c(rule, m),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Slopes { input, out, rate_lo, rate_hi, min_count } => {
            let window = TailWindow { rate_lo, rate_hi, min_count, ..TailWindow::default() };
            cmd_slopes(&input, out.as_deref(), &window)
        }
        Command::Exponent { input, out, split } => cmd_exponent(&input, out.as_deref(), split),
        Command::DatasetStats { dir, out } => cmd_dataset_stats(&dir, out.as_deref()),
        Command::Check { file, rule, oracle } => cmd_check(&file, rule, oracle),
        Command::Convert { input, out } => cmd_convert(&input, out.as_deref()),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

/// Writes to `path`, or to stdout when it is `None`.
fn output(path: Option<&Path>, f: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
    match path {
        Some(path) => {
            let mut file = io::BufWriter::new(
                fs::File::create(path).with_context(|| format!("creating {}", path.display()))?,
            );
            f(&mut file)?;
            file.flush()?;
        }
        None => f(&mut io::stdout().lock())?,
    }
    Ok(())
}

fn cmd_theta_c(rule: Rule, m: usize) -> Result<()> {
    let t = theta_c(rule, m)?;
    if *t.numer() == 0 {
        println!("0");
    } else {
        println!("{t} = {}", *t.numer() as f64 / *t.denom() as f64);
    }
    Ok(())
}

fn cmd_sweep(args: SweepArgs) -> Result<()> {
    let mut config = SweepConfig::new(args.rule, args.m);
    config.at_critical = args.critical;
    if let Some(theta) = &args.theta {
        config.thetas = parse_theta_grid(theta)?;
    }
    config.ns = parse_n_grid(&args.n)?;
    if config.ns.is_empty() || (!config.at_critical && config.thetas.is_empty()) {
        bail!("empty grid");
    }
    config.trials = args.trials;
    config.master_seed = args.seed;
    config.workers = args
        .workers
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    config.node_budget = args.node_budget;
    info!(
        "{} m={}: {} cells, {} trials each, {} workers",
        config.rule,
        config.m,
        config.cells()?.len(),
        config.trials,
        config.workers
    );
    let points = run_sweep(&config, args.out.as_deref())?;
    match &args.out {
        Some(path) => info!("wrote {} rate points to {}", points.len(), path.display()),
        None => write_rate_points(io::stdout().lock(), &points)?,
    }
    Ok(())
}

fn cmd_slopes(input: &Path, out: Option<&Path>, window: &TailWindow) -> Result<()> {
    let file = fs::File::open(input).with_context(|| format!("opening {}", input.display()))?;
    let points = read_rate_points(file)?;
    let mut fits = Vec::new();
    for (theta, fit) in fit_slopes(&points, window) {
        match fit {
            Ok(f) => fits.push(f),
            Err(e) => warn!("theta={}: {e}", format_theta(theta)),
        }
    }
    if fits.is_empty() {
        bail!("no curve in {} has enough tail points", input.display());
    }
    output(out, |w| Ok(write_slope_fits(w, &fits)?))
}

fn cmd_exponent(input: &Path, out: Option<&Path>, split: f64) -> Result<()> {
    let file = fs::File::open(input).with_context(|| format!("opening {}", input.display()))?;
    let slopes = read_slope_fits(file)?;
    let mut fits: Vec<(String, PowerLawFit)> = Vec::new();
    for (regime, near) in [("near", true), ("far", false)] {
        let pairs: Vec<(f64, f64)> = slopes
            .iter()
            .filter(|s| (s.theta_minus_thetac < split) == near)
            .map(|s| (s.theta_minus_thetac, s.c))
            .collect();
        match fit_power_law(&pairs) {
            Ok(f) => fits.push((regime.to_string(), f)),
            Err(e) => warn!("{regime} regime: {e}"),
        }
    }
    if fits.is_empty() {
        bail!("not enough slopes in {} for a power-law fit", input.display());
    }
    output(out, |w| Ok(write_power_law_fits(w, &fits)?))
}

/// Profile files use the native format unless their extension is `soc`.
fn read_profile(path: &Path) -> Result<DiscreteProfile> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let profile = if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("soc")) {
        convert_soc(&text)
    } else {
        parse_profile(&text)
    };
    profile.with_context(|| format!("parsing {}", path.display()))
}

fn yes_no(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

fn cmd_dataset_stats(dir: &Path, out: Option<&Path>) -> Result<()> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .with_context(|| format!("listing {}", dir.display()))?
        .map(|e| e.map(|e| e.path()))
        .collect::<io::Result<_>>()?;
    paths.retain(|p| p.is_file());
    paths.sort();

    let mut rows = Vec::new();
    let mut warnings = 0usize;
    for path in &paths {
        match read_profile(path) {
            Ok(p) => rows.push((path, p.m(), p.n(), ProfileFacts::of(&p))),
            Err(e) => {
                warn!("skipping: {e:#}");
                warnings += 1;
            }
        }
    }
    if rows.is_empty() {
        bail!("no parseable profile in {} ({warnings} skipped)", dir.display());
    }

    if let Some(out) = out {
        output(Some(out), |w| {
            writeln!(w, "file,m,n,condorcet_winner,irv_not_cm,scw")?;
            for (path, m, n, f) in &rows {
                let name = path.file_name().unwrap_or_default().to_string_lossy();
                let cand = |c: Option<_>| c.map(|c: maniplab_core::Candidate| c.to_string()).unwrap_or_default();
                writeln!(
                    w,
                    "{name},{m},{n},{},{},{}",
                    cand(f.condorcet_winner),
                    f.irv_not_cm,
                    cand(f.scw)
                )?;
            }
            Ok(())
        })?;
    }

    let facts: Vec<ProfileFacts> = rows.iter().map(|r| r.3).collect();
    let s = DatasetStats::from_facts(&facts);
    let pct = |x: f64| format!("{:.1}%", 100.0 * x);
    println!("profiles             {}", s.profile_count);
    println!("with a CW            {}", pct(s.fraction_with_cw));
    println!("IRV not CM (a)       {}", pct(s.fraction_irv_not_cm));
    println!("with an SCW (b)      {}", pct(s.fraction_with_scw));
    match s.ratio_scw_over_not_cm {
        Some(r) => println!("ratio (b) / (a)      {}", pct(r)),
        None => println!("ratio (b) / (a)      n/a"),
    }
    if warnings > 0 {
        println!("warnings             {warnings} file(s) skipped");
    }
    Ok(())
}

fn describe_outcome(p: &DiscreteProfile, outcome: &CmOutcome) -> Vec<String> {
    match outcome {
        CmOutcome::NotManipulable => vec!["not CM".into()],
        CmOutcome::Undecided => vec!["CM undecided".into()],
        CmOutcome::Manipulable(w) => {
            let changed = w.changed_ballots(p);
            let total: u64 = changed.iter().map(|(_, k)| k).sum();
            let list: Vec<String> = changed
                .iter()
                .map(|(r, k)| if *k == 1 { format!("({r})") } else { format!("{k}x({r})") })
                .collect();
            let noun = if total == 1 { "ballot" } else { "ballots" };
            vec![
                format!("CM toward {}", w.target),
                format!("witness: {total} {noun} {}", list.join(" ")),
            ]
        }
    }
}

fn cmd_check(file: &Path, rule: Option<Rule>, oracle: bool) -> Result<()> {
    let p = read_profile(file)?;
    println!("m={} n={}", p.m(), p.n());
    let mut disagreements = 0;
    let rules = rule.map_or(Rule::ALL.to_vec(), |r| vec![r]);
    for rule in rules {
        println!("[{rule}]");
        println!("winner {}", rule.winner(&p));
        match rule {
            Rule::Irv => {
                for (i, round) in irv_winner(&p).rounds.iter().enumerate() {
                    let scores: Vec<String> = round
                        .remaining
                        .iter()
                        .map(|c| format!("{c}:{}", round.scores.get(c)))
                        .collect();
                    println!("  round {}: {}; eliminate {}", i + 1, scores.join(" "), round.eliminated);
                }
            }
            Rule::TwoRound => {
                let o = two_round_winner(&p);
                let finalists: Vec<String> = o.finalists.iter().map(|c| c.to_string()).collect();
                println!("  finalists {}", finalists.join(" "));
            }
            Rule::Plurality => {}
        }
        let outcome = cm(&p, rule);
        for line in describe_outcome(&p, &outcome) {
            println!("{line}");
        }
        if oracle {
            match brute_force_cm(&p, rule, &OracleLimits::default()) {
                Ok(o) if o.is_manipulable() == outcome.is_manipulable() => println!("oracle agrees"),
                Ok(_) => {
                    println!("oracle DISAGREES");
                    disagreements += 1;
                }
                Err(Error::OracleLimits(msg)) => println!("oracle skipped: {msg}"),
                Err(e) => return Err(e.into()),
            }
        }
    }
    match exists_scw(&p) {
        Some(c) => println!("SCW = candidate {c}"),
        None => println!("no SCW"),
    }
    println!("CW {}", yes_no(maniplab_core::rules::condorcet_winner(&p).is_some()));
    if disagreements > 0 {
        bail!("the oracle disagrees on {disagreements} rule(s)");
    }
    Ok(())
}

fn cmd_convert(input: &Path, out: Option<&Path>) -> Result<()> {
    let text = fs::read_to_string(input).with_context(|| format!("reading {}", input.display()))?;
    let p = convert_soc(&text).with_context(|| format!("parsing {}", input.display()))?;
    let body = write_profile(&p)?;
    output(out, |w| Ok(w.write_all(body.as_bytes())?))
}
