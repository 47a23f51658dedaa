//! Exponential-tail slope fits of CM rates and power-law fits of the slopes.
//!
//! Above the critical value the rate decays like `B exp(-C n)`. The slope `C`
//! is read off the tail of each curve: the points after the curve's maximum
//! whose rate lies in a window and that rest on enough positive trials.

use std::io::{Read, Write};

use num_rational::Rational64;

use crate::culture::{format_theta, parse_theta, theta_to_f64};
use crate::error::{Error, Result};
use crate::experiment::RatePoint;
use crate::rules::Rule;
use crate::theory::{regime, theta_c, Regime};

/// Which points of a curve enter the slope fit.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TailWindow {
    /// Exclusive bounds on the rate.
    pub rate_lo: f64,
    pub rate_hi: f64,
    /// Minimum number of manipulable trials behind a point.
    pub min_count: u64,
    /// Keep only points after the curve's maximum (the rising part at small
    /// `n` is not exponential).
    pub after_peak: bool,
}

impl Default for TailWindow {
    fn default() -> Self {
        TailWindow {
            rate_lo: 1e-5,
            rate_hi: 0.2,
            min_count: 10,
            after_peak: true,
        }
    }
}

/// Least-squares fit of `ln rate = ln B - C n` at fixed `(rule, m, theta)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SlopeFit {
    pub rule: Rule,
    pub m: usize,
    pub theta: Rational64,
    pub theta_minus_thetac: f64,
    /// Decay rate per voter.
    pub c: f64,
    pub c_stderr: f64,
    /// `ln B`.
    pub intercept: f64,
    /// Smallest and largest `n` used.
    pub window_lo: u64,
    pub window_hi: u64,
    pub points_used: usize,
}

/// `C = amplitude * x^exponent` fitted on logs.
#[derive(Clone, Debug, PartialEq)]
pub struct PowerLawFit {
    pub amplitude: f64,
    pub exponent: f64,
    /// Root mean square of the residuals of `ln C`.
    pub residual_rms: f64,
    pub points: usize,
}

/// Weighted straight-line fit; returns `(slope, intercept, slope_stderr)`.
fn weighted_line(x: &[f64], y: &[f64], w: &[f64]) -> (f64, f64, f64) {
    let sw: f64 = w.iter().sum();
    let mx = x.iter().zip(w).map(|(a, b)| a * b).sum::<f64>() / sw;
    let my = y.iter().zip(w).map(|(a, b)| a * b).sum::<f64>() / sw;
    let sxx: f64 = x.iter().zip(w).map(|(a, b)| b * (a - mx) * (a - mx)).sum();
    let sxy: f64 = x
        .iter()
        .zip(y)
        .zip(w)
        .map(|((a, c), b)| b * (a - mx) * (c - my))
        .sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx, (1.0 / sxx).sqrt())
}

/// Fits the tail slope of one curve. All points must share rule, `m` and
/// `theta`, and `theta` must lie above the critical value.
pub fn fit_asymptotic_slope(points: &[RatePoint], window: &TailWindow) -> Result<SlopeFit> {
    let first = points
        .first()
        .ok_or_else(|| Error::InsufficientData("no points".into()))?;
    let (rule, m, theta) = (first.rule, first.m, first.theta);
    if points.iter().any(|p| p.rule != rule || p.m != m || p.theta != theta) {
        return Err(Error::invalid("points mix different rules, m or theta"));
    }
    if regime(rule, m, theta)? != Regime::Supercritical {
        return Err(Error::invalid(format!(
            "theta = {} is not above the critical value of {rule} for m = {m}",
            format_theta(theta)
        )));
    }
    let mut sorted: Vec<&RatePoint> = points.iter().collect();
    sorted.sort_by_key(|p| p.n);
    let start = if window.after_peak {
        let peak = sorted
            .iter()
            .enumerate()
            .fold(0, |best, (i, p)| if p.rate > sorted[best].rate { i } else { best });
        peak + 1
    } else {
        0
    };
    let tail: Vec<&RatePoint> = sorted[start.min(sorted.len())..]
        .iter()
        .copied()
        .filter(|p| {
            p.rate > window.rate_lo
                && p.rate < window.rate_hi
                && p.cm_count >= window.min_count
                && p.std_error > 0.0
        })
        .collect();
    if tail.len() < 4 {
        return Err(Error::InsufficientData(format!(
            "{} tail points for {rule} m={m} theta={} (need 4)",
            tail.len(),
            format_theta(theta)
        )));
    }
    let x: Vec<f64> = tail.iter().map(|p| p.n as f64).collect();
    let y: Vec<f64> = tail.iter().map(|p| p.rate.ln()).collect();
    // Delta method: sd(ln rate) = std_error / rate.
    let w: Vec<f64> = tail.iter().map(|p| (p.rate / p.std_error).powi(2)).collect();
    let (slope, intercept, stderr) = weighted_line(&x, &y, &w);
    Ok(SlopeFit {
        rule,
        m,
        theta,
        theta_minus_thetac: theta_to_f64(theta - theta_c(rule, m)?),
        c: -slope,
        c_stderr: stderr,
        intercept,
        window_lo: tail[0].n,
        window_hi: tail[tail.len() - 1].n,
        points_used: tail.len(),
    })
}

/// Groups points by `(rule, m, theta)` in order of first appearance and fits
/// each group.
pub fn fit_slopes(points: &[RatePoint], window: &TailWindow) -> Vec<(Rational64, Result<SlopeFit>)> {
    let mut keys: Vec<(Rule, usize, Rational64)> = Vec::new();
    for p in points {
        let key = (p.rule, p.m, p.theta);
        if !keys.contains(&key) {
            keys.push(key);
        }
    }
    keys.into_iter()
        .map(|(rule, m, theta)| {
            let group: Vec<RatePoint> = points
                .iter()
                .filter(|p| p.rule == rule && p.m == m && p.theta == theta)
                .cloned()
                .collect();
            (theta, fit_asymptotic_slope(&group, window))
        })
        .collect()
}

/// Ordinary least squares of `ln C` on `ln x`.
pub fn fit_power_law(pairs: &[(f64, f64)]) -> Result<PowerLawFit> {
    if pairs.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "{} pairs for a power law (need 3)",
            pairs.len()
        )));
    }
    if pairs.iter().any(|&(x, c)| !(x > 0.0 && c > 0.0)) {
        return Err(Error::invalid("power-law inputs must be positive"));
    }
    let x: Vec<f64> = pairs.iter().map(|p| p.0.ln()).collect();
    let y: Vec<f64> = pairs.iter().map(|p| p.1.ln()).collect();
    let (slope, intercept, _) = weighted_line(&x, &y, &vec![1.0; x.len()]);
    let rss: f64 = x
        .iter()
        .zip(&y)
        .map(|(a, b)| (b - intercept - slope * a).powi(2))
        .sum();
    Ok(PowerLawFit {
        amplitude: intercept.exp(),
        exponent: slope,
        residual_rms: (rss / x.len() as f64).sqrt(),
        points: x.len(),
    })
}

pub const SLOPE_CSV_HEADER: [&str; 9] = [
    "rule",
    "m",
    "theta",
    "theta_minus_thetac",
    "C",
    "C_stderr",
    "window_lo",
    "window_hi",
    "points_used",
];

pub const POWER_LAW_CSV_HEADER: [&str; 5] =
    ["regime", "points", "amplitude", "exponent", "residual_rms"];

pub fn write_slope_fits<W: Write>(w: W, fits: &[SlopeFit]) -> Result<()> {
    let mut writer = csv::Writer::from_writer(w);
    writer.write_record(SLOPE_CSV_HEADER)?;
    for f in fits {
        writer.write_record([
            f.rule.name().to_string(),
            f.m.to_string(),
            format_theta(f.theta),
            f.theta_minus_thetac.to_string(),
            f.c.to_string(),
            f.c_stderr.to_string(),
            f.window_lo.to_string(),
            f.window_hi.to_string(),
            f.points_used.to_string(),
        ])?;
    }
    writer.flush()?;
    Ok(())
}

/// Reads a slope CSV. The intercept is not stored and reads back as NaN.
pub fn read_slope_fits<R: Read>(r: R) -> Result<Vec<SlopeFit>> {
    let mut reader = csv::Reader::from_reader(r);
    if reader.headers()?.iter().map(str::trim).ne(SLOPE_CSV_HEADER) {
        return Err(Error::parse(1, "unexpected header for a slope CSV"));
    }
    let mut out = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec?;
        let line = i + 2;
        if rec.len() != SLOPE_CSV_HEADER.len() {
            return Err(Error::parse(line, format!("expected 9 fields, got {}", rec.len())));
        }
        let bad = |what: &str| Error::parse(line, format!("bad {what}"));
        let f = |k: usize| rec.get(k).unwrap_or("").trim();
        out.push(SlopeFit {
            rule: f(0).parse().map_err(|_| bad("rule"))?,
            m: f(1).parse().map_err(|_| bad("m"))?,
            theta: parse_theta(f(2)).map_err(|_| bad("theta"))?,
            theta_minus_thetac: f(3).parse().map_err(|_| bad("theta_minus_thetac"))?,
            c: f(4).parse().map_err(|_| bad("C"))?,
            c_stderr: f(5).parse().map_err(|_| bad("C_stderr"))?,
            intercept: f64::NAN,
            window_lo: f(6).parse().map_err(|_| bad("window_lo"))?,
            window_hi: f(7).parse().map_err(|_| bad("window_hi"))?,
            points_used: f(8).parse().map_err(|_| bad("points_used"))?,
        });
    }
    Ok(out)
}

pub fn write_power_law_fits<W: Write>(w: W, fits: &[(String, PowerLawFit)]) -> Result<()> {
    let mut writer = csv::Writer::from_writer(w);
    writer.write_record(POWER_LAW_CSV_HEADER)?;
    for (regime, f) in fits {
        writer.write_record([
            regime.clone(),
            f.points.to_string(),
            f.amplitude.to_string(),
            f.exponent.to_string(),
            f.residual_rms.to_string(),
        ])?;
    }
    writer.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Measured slopes `(theta - theta_c, C)` for Plurality with four candidates.
    pub(crate) const REFERENCE_SLOPES: [(f64, f64); 10] = [
        (0.005, 8.33e-5),
        (0.008, 1.51e-4),
        (0.012, 2.65e-4),
        (0.02, 5.754e-4),
        (0.031, 1.1475e-3),
        (0.049, 2.583e-3),
        (0.077, 6.129e-3),
        (0.121, 1.4968e-2),
        (0.19, 3.5993e-2),
        (0.3, 9.3728e-2),
    ];

    fn synthetic(theta: Rational64, slope: f64, scale: f64, ns: &[u64]) -> Vec<RatePoint> {
        ns.iter()
            .map(|&n| {
                let rate = scale * (-slope * n as f64).exp();
                let mut p = RatePoint::new(Rule::Plurality, 4, n, theta, 1_000_000_000, 1_000, 0);
                p.rate = rate;
                p.cm_count = (rate * 1e9) as u64;
                p.std_error = (rate * (1.0 - rate) / 1e9).sqrt();
                p
            })
            .collect()
    }

    #[test]
    fn recovers_noiseless_slope() {
        let pts = synthetic(Rational64::new(1, 2), 0.01, 0.15, &[50, 100, 200, 400, 800]);
        let fit = fit_asymptotic_slope(&pts, &TailWindow::default()).unwrap();
        assert!((fit.c - 0.01).abs() <= 1e-12 * 0.01, "{}", fit.c);
        assert!((fit.intercept - 0.15f64.ln()).abs() < 1e-9);
        assert!((fit.theta_minus_thetac - 0.3).abs() < 1e-15);
        assert_eq!((fit.window_lo, fit.window_hi, fit.points_used), (100, 800, 4));
    }

    #[test]
    fn slope_ignores_common_rescaling() {
        let ns = [20, 40, 60, 80, 100, 120];
        let a = fit_asymptotic_slope(&synthetic(Rational64::new(1, 2), 0.02, 0.1, &ns), &TailWindow::default())
            .unwrap();
        let b = fit_asymptotic_slope(&synthetic(Rational64::new(1, 2), 0.02, 0.02, &ns), &TailWindow::default())
            .unwrap();
        assert!((a.c - b.c).abs() < 1e-12);
    }

    #[test]
    fn rising_part_is_excluded() {
        let mut pts = synthetic(Rational64::new(1, 2), 0.01, 0.15, &[100, 200, 300, 400, 500]);
        let mut low = pts[0].clone();
        low.n = 10;
        low.rate = 0.001;
        pts.insert(0, low);
        let fit = fit_asymptotic_slope(&pts, &TailWindow::default()).unwrap();
        assert_eq!(fit.window_lo, 200);
    }

    #[test]
    fn too_few_points() {
        let pts = synthetic(Rational64::new(1, 2), 0.01, 0.15, &[10, 20, 30]);
        assert!(matches!(
            fit_asymptotic_slope(&pts, &TailWindow::default()),
            Err(Error::InsufficientData(_))
        ));
        let sub = synthetic(Rational64::new(1, 10), 0.01, 0.15, &[10, 20, 30, 40, 50, 60]);
        assert!(matches!(
            fit_asymptotic_slope(&sub, &TailWindow::default()),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn power_law_examples() {
        let exact: Vec<(f64, f64)> = [0.1, 0.2, 0.5, 1.0].iter().map(|&x| (x, x * x)).collect();
        let fit = fit_power_law(&exact).unwrap();
        assert!((fit.amplitude - 1.0).abs() < 1e-12 && (fit.exponent - 2.0).abs() < 1e-12);
        assert!(fit.residual_rms < 1e-12);

        let far: Vec<(f64, f64)> = REFERENCE_SLOPES.iter().copied().filter(|p| p.0 >= 0.077).collect();
        let fit = fit_power_law(&far).unwrap();
        assert!((fit.exponent - 2.0).abs() <= 0.15, "{}", fit.exponent);
        assert!((fit.amplitude - 1.022).abs() < 0.01, "{}", fit.amplitude);

        let near: Vec<(f64, f64)> = REFERENCE_SLOPES.iter().copied().filter(|p| p.0 <= 0.031).collect();
        let fit = fit_power_law(&near).unwrap();
        assert!((fit.exponent - 1.265).abs() <= 0.2, "{}", fit.exponent);

        assert!(fit_power_law(&[(0.1, 1.0), (0.0, 1.0), (0.3, 2.0)]).is_err());
        assert!(fit_power_law(&[(0.1, 1.0), (0.2, 2.0)]).is_err());
    }

    #[test]
    fn reference_slopes_increase() {
        assert!(REFERENCE_SLOPES.windows(2).all(|w| w[0].1 < w[1].1));
    }

    #[test]
    fn csv_round_trips() {
        let pts = synthetic(Rational64::new(1, 2), 0.01, 0.15, &[50, 100, 200, 400, 800]);
        let fit = fit_asymptotic_slope(&pts, &TailWindow::default()).unwrap();
        let mut buf = Vec::new();
        write_slope_fits(&mut buf, &[fit.clone()]).unwrap();
        let back = read_slope_fits(buf.as_slice()).unwrap();
        assert_eq!(back.len(), 1);
        assert_eq!(back[0].c, fit.c);
        assert_eq!(back[0].theta, fit.theta);
        assert!(String::from_utf8(buf).unwrap().starts_with(
            "rule,m,theta,theta_minus_thetac,C,C_stderr,window_lo,window_hi,points_used\n"
        ));

        let mut buf = Vec::new();
        write_power_law_fits(&mut buf, &[("far".into(), fit_power_law(&REFERENCE_SLOPES).unwrap())]).unwrap();
        assert!(String::from_utf8(buf).unwrap().starts_with("regime,points,amplitude,exponent,residual_rms\nfar,10,"));
    }

    #[test]
    fn groups_by_theta() {
        let mut pts = synthetic(Rational64::new(1, 2), 0.01, 0.15, &[50, 100, 200, 400, 800]);
        pts.extend(synthetic(Rational64::new(3, 10), 0.002, 0.15, &[10, 20]));
        let fits = fit_slopes(&pts, &TailWindow::default());
        assert_eq!(fits.len(), 2);
        assert!(fits[0].1.is_ok());
        assert!(fits[1].1.is_err());
    }
}
