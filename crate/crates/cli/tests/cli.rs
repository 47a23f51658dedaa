use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use maniplab_core::analysis::{write_slope_fits, SlopeFit};
use maniplab_core::experiment::{write_rate_points, RatePoint};
use maniplab_core::Rule;
use num_rational::Rational64;

fn maniplab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_maniplab"))
        .args(args)
        .env("RUST_LOG", "warn")
        .env_remove("MANIPLAB_WORKERS")
        .output()
        .expect("binary runs")
}

fn stdout(args: &[&str]) -> String {
    let out = maniplab(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn theta_c_prints_exact_values() {
    assert_eq!(stdout(&["theta-c", "--rule", "plurality", "--m", "4"]), "1/5 = 0.2\n");
    assert_eq!(stdout(&["theta-c", "--rule", "irv", "--m", "10"]), "0\n");
    assert_eq!(stdout(&["theta-c", "--rule", "tr", "--m", "2"]), "0\n");
    assert!(!maniplab(&["theta-c", "--rule", "borda", "--m", "4"]).status.success());
}

#[test]
fn sweep_writes_grid_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let common = ["sweep", "--rule", "plu", "--m", "4", "--theta", "0:1:0.05", "--n", "100"];
    let run = |out: &Path, workers: &str| {
        let mut args = common.to_vec();
        args.extend(["--trials", "300", "--seed", "42", "--workers", workers, "--out", path(out)]);
        stdout(&args);
    };
    run(&a, "1");
    run(&b, "2");
    let text = fs::read_to_string(&a).unwrap();
    assert_eq!(text.lines().count(), 22);
    assert!(text.starts_with("rule,m,n,theta,trials,cm_count,rate,std_error,margin,config_hash\n"));
    assert_eq!(text, fs::read_to_string(&b).unwrap());

    fs::remove_file(&b).unwrap();
    run(&b, "1");
    assert_eq!(text, fs::read_to_string(&b).unwrap());
}

#[test]
fn sweep_at_critical_theta_to_stdout() {
    let text = stdout(&[
        "sweep", "--rule", "irv", "--m", "4", "--critical", "--n", "2..8(log)", "--trials", "200",
    ]);
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 7);
    assert!(rows.iter().all(|r| r.starts_with("irv,4,") && r.split(',').nth(3) == Some("0")));
}

#[test]
fn sweep_rejects_bad_grids() {
    for n in ["", "10..2(log)", "a,b", "0"] {
        let out = maniplab(&["sweep", "--rule", "plu", "--m", "3", "--theta", "0.1", "--n", n]);
        assert!(!out.status.success(), "n grid {n:?} accepted");
    }
    let out = maniplab(&["sweep", "--rule", "plu", "--m", "3", "--theta", "2", "--n", "5"]);
    assert!(!out.status.success());
}

#[test]
fn slopes_and_exponent_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let rates = dir.path().join("rates.csv");
    let trials = 1_000_000_000;
    let mut points = Vec::new();
    for (p, q, c) in [(1, 2, 0.02), (2, 5, 0.01)] {
        let theta = Rational64::new(p, q);
        for n in (50..=400).step_by(50) {
            let count = (0.15 * (-c * (n - 50) as f64).exp() * trials as f64).round() as u64;
            points.push(RatePoint::new(Rule::Plurality, 4, n, theta, trials, count, 1));
        }
    }
    // Subcritical curve: reported, not fitted.
    points.push(RatePoint::new(Rule::Plurality, 4, 10, Rational64::new(1, 10), 100, 90, 1));
    write_rate_points(fs::File::create(&rates).unwrap(), &points).unwrap();

    let slopes = dir.path().join("slopes.csv");
    let out = maniplab(&["slopes", path(&rates), "--out", path(&slopes)]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("theta=0.1"));
    let text = fs::read_to_string(&slopes).unwrap();
    let rows: Vec<Vec<&str>> = text.lines().skip(1).map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 2);
    for (theta, expected) in [("0.5", 0.02), ("0.4", 0.01)] {
        let row = rows.iter().find(|r| r[2] == theta).unwrap();
        let c: f64 = row[4].parse().unwrap();
        assert!((c - expected).abs() < 1e-5, "{theta}: {c}");
    }

    let fits: Vec<SlopeFit> = [0.01, 0.02, 0.03, 0.1, 0.2, 0.3]
        .iter()
        .map(|&x: &f64| SlopeFit {
            rule: Rule::Plurality,
            m: 4,
            theta: Rational64::new((1000.0 * (x + 0.2)).round() as i64, 1000),
            theta_minus_thetac: x,
            c: if x < 0.05 { 0.5 * x.powf(1.5) } else { 2.0 * x * x },
            c_stderr: 0.0,
            intercept: 0.0,
            window_lo: 1,
            window_hi: 2,
            points_used: 4,
        })
        .collect();
    let slopes = dir.path().join("synthetic.csv");
    write_slope_fits(fs::File::create(&slopes).unwrap(), &fits).unwrap();
    let text = stdout(&["exponent", path(&slopes)]);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "regime,points,amplitude,exponent,residual_rms");
    let near: Vec<&str> = lines[1].split(',').collect();
    let far: Vec<&str> = lines[2].split(',').collect();
    assert_eq!(&near[..2], ["near", "3"]);
    assert!((near[3].parse::<f64>().unwrap() - 1.5).abs() < 1e-6);
    assert_eq!(&far[..2], ["far", "3"]);
    assert!((far[2].parse::<f64>().unwrap() - 2.0).abs() < 1e-6);
    assert!((far[3].parse::<f64>().unwrap() - 2.0).abs() < 1e-6);
}

#[test]
fn dataset_stats_on_unanimous_corpus() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    fs::create_dir(&data).unwrap();
    for k in 1..=100 {
        fs::write(data.join(format!("p{k:03}.txt")), format!("m=4\n{k}: 3>1>2>4\n")).unwrap();
    }
    fs::write(data.join("broken.txt"), "m=3\n2: 1>1>2\n").unwrap();
    let per_file = dir.path().join("per_file.csv");
    let text = stdout(&["dataset-stats", path(&data), "--out", path(&per_file)]);
    assert!(text.contains("profiles             100"), "{text}");
    assert!(text.contains("with a CW            100.0%"));
    assert!(text.contains("IRV not CM (a)       100.0%"));
    assert!(text.contains("with an SCW (b)      100.0%"));
    assert!(text.contains("ratio (b) / (a)      100.0%"));
    assert!(text.contains("warnings             1 file(s) skipped"));
    let csv = fs::read_to_string(&per_file).unwrap();
    assert_eq!(csv.lines().count(), 101);
    assert_eq!(csv.lines().nth(1), Some("p001.txt,4,1,3,true,3"));

    let empty = dir.path().join("empty");
    fs::create_dir(&empty).unwrap();
    assert!(!maniplab(&["dataset-stats", path(&empty)]).status.success());
}

#[test]
fn check_reports_irv_witness() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("ten.txt");
    fs::write(&file, "# ten voters\nm=3\n4: 1>2>3\n3: 2>1>3\n3: 3>2>1\n").unwrap();
    let text = stdout(&["check", path(&file), "--rule", "irv"]);
    assert!(text.contains("winner 2\n"), "{text}");
    assert!(text.contains("round 1: 1:4 2:3 3:3; eliminate 3"));
    assert!(text.contains("CM toward 1\nwitness: 1 ballot (3>1>2)\n"));
    assert!(text.contains("no SCW"));
}

#[test]
fn check_unanimous_and_oracle() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("u.txt");
    fs::write(&file, "m=4\n7: 2>4>1>3\n").unwrap();
    let text = stdout(&["check", path(&file)]);
    assert_eq!(text.matches("not CM").count(), 3, "{text}");
    assert!(text.contains("SCW = candidate 2"));

    let file = dir.path().join("six.txt");
    fs::write(&file, "m=3\n2: 1>2>3\n1: 2>3>1\n2: 3>1>2\n1: 2>1>3\n").unwrap();
    let text = stdout(&["check", path(&file), "--oracle"]);
    assert_eq!(text.matches("oracle agrees").count(), 3, "{text}");

    let file = dir.path().join("big.txt");
    fs::write(&file, "m=5\n3: 1>2>3>4>5\n").unwrap();
    let text = stdout(&["check", path(&file), "--rule", "plu", "--oracle"]);
    assert!(text.contains("oracle skipped"), "{text}");
}

#[test]
fn check_rejects_malformed_profile() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("bad.txt");
    fs::write(&file, "m=3\n2: 1>2\n").unwrap();
    let out = maniplab(&["check", path(&file)]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));
}

#[test]
fn convert_soc_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let soc = dir.path().join("in.soc");
    fs::write(
        &soc,
        "# FILE NAME: in.soc\n# DATA TYPE: soc\n# NUMBER ALTERNATIVES: 3\n\
         # ALTERNATIVE NAME 1: a\n3: 1,3,2\n5: 2,1,3\n1: 1,3,2\n",
    )
    .unwrap();
    let out = dir.path().join("out.txt");
    stdout(&["convert", path(&soc), "--out", path(&out)]);
    let text = fs::read_to_string(&out).unwrap();
    assert_eq!(text, "m=3\n4: 1>3>2\n5: 2>1>3\n");
    assert!(stdout(&["check", path(&out), "--rule", "plu"]).contains("winner 2"));
}
