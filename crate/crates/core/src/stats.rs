//! Two-sample t-tests, quartiles and completion-time summaries.

use serde::Serialize;
use statrs::distribution::{ContinuousCDF, StudentsT};
use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum StatsError {
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("need at least 2 values per group, got {0}")]
    InsufficientData(usize),
    #[error("time {0} is not positive")]
    NonPositiveTime(f64),
    #[error("cannot parse duration `{0}` (expected seconds or m:ss)")]
    BadDuration(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TTestKind {
    /// Unequal variances, Welch–Satterthwaite degrees of freedom.
    Welch,
    /// Pooled variance.
    Student,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TTest {
    pub t: f64,
    pub df: f64,
    /// Two-sided.
    pub p: f64,
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased sample variance.
pub fn variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64
}

/// Two-sample t-test of `a` against `b` (positive `t` when `a` is larger).
///
/// When both groups have zero variance the statistic is 0 for equal means
/// (p = 1) and infinite otherwise (p = 0).
pub fn t_test(a: &[f64], b: &[f64], kind: TTestKind) -> Result<TTest, StatsError> {
    for g in [a, b] {
        if g.len() < 2 {
            return Err(StatsError::InsufficientData(g.len()));
        }
    }
    let (n1, n2) = (a.len() as f64, b.len() as f64);
    let (v1, v2) = (variance(a), variance(b));
    let diff = mean(a) - mean(b);
    let (se2, df) = match kind {
        TTestKind::Welch => {
            let (q1, q2) = (v1 / n1, v2 / n2);
            let se2 = q1 + q2;
            let df = se2 * se2 / (q1 * q1 / (n1 - 1.0) + q2 * q2 / (n2 - 1.0));
            (se2, df)
        }
        TTestKind::Student => {
            let df = n1 + n2 - 2.0;
            let pooled = ((n1 - 1.0) * v1 + (n2 - 1.0) * v2) / df;
            (pooled * (1.0 / n1 + 1.0 / n2), df)
        }
    };
    if se2 == 0.0 {
        let df = n1 + n2 - 2.0;
        return Ok(if diff == 0.0 {
            TTest { t: 0.0, df, p: 1.0 }
        } else {
            TTest {
                t: diff.signum() * f64::INFINITY,
                df,
                p: 0.0,
            }
        });
    }
    let t = diff / se2.sqrt();
    let dist = StudentsT::new(0.0, 1.0, df).expect("df is positive");
    let p = (2.0 * dist.cdf(-t.abs())).min(1.0);
    Ok(TTest { t, df, p })
}

pub fn welch(a: &[f64], b: &[f64]) -> Result<TTest, StatsError> {
    t_test(a, b, TTestKind::Welch)
}

/// Quantile of sorted data by linear interpolation between closest ranks:
/// position `h = (n − 1)·q`, value `x[⌊h⌋] + (h − ⌊h⌋)(x[⌊h⌋+1] − x[⌊h⌋])`.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimeStats {
    pub n: usize,
    pub mean: f64,
    pub median: f64,
    pub q1: f64,
    pub q3: f64,
    pub iqr: f64,
    /// Values outside `[q1 − 1.5·iqr, q3 + 1.5·iqr]`, in input order.
    pub outliers: Vec<f64>,
}

pub fn time_stats(times: &[f64]) -> Result<TimeStats, StatsError> {
    if times.is_empty() {
        return Err(StatsError::EmptyDataset);
    }
    if let Some(bad) = times.iter().find(|t| t.is_nan() || **t <= 0.0) {
        return Err(StatsError::NonPositiveTime(*bad));
    }
    let mut sorted = times.to_vec();
    sorted.sort_by(f64::total_cmp);
    let q1 = quantile(&sorted, 0.25);
    let q3 = quantile(&sorted, 0.75);
    let iqr = q3 - q1;
    let (lo, hi) = (q1 - 1.5 * iqr, q3 + 1.5 * iqr);
    Ok(TimeStats {
        n: times.len(),
        // Summed in sorted order so the mean does not depend on input order.
        mean: mean(&sorted),
        median: quantile(&sorted, 0.5),
        q1,
        q3,
        iqr,
        outliers: times
            .iter()
            .copied()
            .filter(|t| *t < lo || *t > hi)
            .collect(),
    })
}

/// `m:ss`, rounded to the nearest second.
pub fn format_mss(seconds: f64) -> String {
    let total = seconds.round() as u64;
    format!("{}:{:02}", total / 60, total % 60)
}

/// Accepts plain seconds (`193`, `193.5`) or `m:ss`.
pub fn parse_duration(text: &str) -> Result<f64, StatsError> {
    let bad = || StatsError::BadDuration(text.to_string());
    let text = text.trim();
    match text.split_once(':') {
        Some((m, s)) => {
            let m: u64 = m.parse().map_err(|_| bad())?;
            let s: f64 = s.parse().map_err(|_| bad())?;
            if !(0.0..60.0).contains(&s) {
                return Err(bad());
            }
            Ok(m as f64 * 60.0 + s)
        }
        None => text.parse().map_err(|_| bad()),
    }
}

#[cfg(test)]
mod tests {
    use approx::assert_abs_diff_eq;

    use super::*;

    #[test]
    fn identical_groups() {
        let a = [1.0, 2.0, 3.5];
        let r = welch(&a, &a).unwrap();
        assert_eq!(r.t, 0.0);
        assert_abs_diff_eq!(r.p, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn constant_groups() {
        let r = welch(&[2.0, 2.0], &[2.0, 2.0, 2.0]).unwrap();
        assert_eq!((r.t, r.p), (0.0, 1.0));
        let r = welch(&[3.0, 3.0], &[2.0, 2.0]).unwrap();
        assert_eq!((r.t, r.p), (f64::INFINITY, 0.0));
    }

    #[test]
    fn too_few_values() {
        assert_eq!(
            welch(&[1.0], &[1.0, 2.0]),
            Err(StatsError::InsufficientData(1))
        );
    }

    #[test]
    fn swap_flips_sign_only() {
        let a = [1.0, 4.0, 2.0, 8.0];
        let b = [3.0, 3.5, 9.0];
        let (x, y) = (welch(&a, &b).unwrap(), welch(&b, &a).unwrap());
        assert_eq!(x.t, -y.t);
        assert_abs_diff_eq!(x.p, y.p, epsilon = 1e-15);
    }

    #[test]
    fn quartiles() {
        let s = [1.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 9.0];
        assert_abs_diff_eq!(quantile(&s, 0.25), 1.75);
        assert_abs_diff_eq!(quantile(&s, 0.5), 3.5);
        assert_abs_diff_eq!(quantile(&s, 0.75), 5.25);
        assert_eq!(quantile(&[7.0], 0.75), 7.0);
    }

    #[test]
    fn outliers() {
        assert!(time_stats(&[1.0, 2.0, 3.0, 4.0, 5.0])
            .unwrap()
            .outliers
            .is_empty());
        let r = time_stats(&[100.0, 101.0, 102.0, 103.0, 500.0]).unwrap();
        assert_eq!(r.outliers, vec![500.0]);
        assert_eq!(time_stats(&[]), Err(StatsError::EmptyDataset));
        assert_eq!(time_stats(&[0.0]), Err(StatsError::NonPositiveTime(0.0)));
    }

    #[test]
    fn mss() {
        assert_eq!(format_mss(193.0), "3:13");
        assert_eq!(format_mss(203.0), "3:23");
        assert_eq!(format_mss(59.6), "1:00");
        assert_eq!(format_mss(5.0), "0:05");
        assert_eq!(parse_duration("3:26").unwrap(), 206.0);
        assert_eq!(parse_duration("213").unwrap(), 213.0);
        assert!(parse_duration("3:75").is_err());
        assert!(parse_duration("abc").is_err());
    }
}
