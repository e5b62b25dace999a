//! Hypothesis tests and effect sizes used by the analyses.

use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;
use statrs::function::factorial::ln_binomial;
use statrs::statistics::{Data, OrderStatistics, RankTieBreaker};

use crate::error::{Error, Result};

/// Largest number of nonzero differences for which the Wilcoxon p-value is
/// computed from the exact null distribution.
pub const WILCOXON_EXACT_MAX: usize = 25;
/// Largest pooled sample size for the exact Mann-Whitney distribution.
pub const MANN_WHITNEY_EXACT_MAX: usize = 12;

const Z_95: f64 = 1.959963984540054;

/// Significance marker for a p-value: `***` below 0.001, `**` below 0.01,
/// `*` below 0.05, otherwise empty.
pub fn stars(p: f64) -> &'static str {
    if p < 0.001 {
        "***"
    } else if p < 0.01 {
        "**"
    } else if p < 0.05 {
        "*"
    } else {
        ""
    }
}

/// Two-sided normal tail probability `P(|Z| ≥ |z|)`.
fn normal_two_sided(z: f64) -> f64 {
    erfc(z.abs() / std::f64::consts::SQRT_2).min(1.0)
}

fn average_ranks(values: Vec<f64>) -> Vec<f64> {
    Data::new(values).ranks(RankTieBreaker::Average)
}

pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    Some(if n % 2 == 1 { v[n / 2] } else { (v[n / 2 - 1] + v[n / 2]) / 2.0 })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogOdds {
    pub lor: f64,
    pub se: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    /// Table cells `(a, b, c, d)` as observed, before any correction.
    pub table: [u64; 4],
    /// True when a zero cell forced the +0.5 correction.
    pub corrected: bool,
}

/// Log-odds ratio `ln[(a/b)/(c/d)]` with a Wald 95% interval. Any zero cell
/// adds 0.5 to all four cells.
pub fn log_odds_ratio(a: u64, b: u64, c: u64, d: u64) -> Result<LogOdds> {
    if a + b == 0 || c + d == 0 {
        return Err(Error::Undefined("log-odds ratio with an empty group".into()));
    }
    let corrected = a == 0 || b == 0 || c == 0 || d == 0;
    let shift = if corrected { 0.5 } else { 0.0 };
    let [fa, fb, fc, fd] = [a, b, c, d].map(|x| x as f64 + shift);
    let lor = (fa / fb).ln() - (fc / fd).ln();
    let se = ((1.0 / fa + 1.0 / fb) + (1.0 / fc + 1.0 / fd)).sqrt();
    Ok(LogOdds {
        lor,
        se,
        ci_low: lor - Z_95 * se,
        ci_high: lor + Z_95 * se,
        table: [a, b, c, d],
        corrected,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ZeroMethod {
    /// Discard zero differences before ranking.
    #[default]
    Wilcoxon,
    /// Rank zero differences with the rest, then leave them out of both sums.
    Pratt,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub statistic: f64,
    pub p: f64,
    pub exact: bool,
}

/// Number of sign assignments of `ranks` giving each positive-rank sum.
/// Ranks are doubled so tied averages stay integral.
fn signed_rank_counts(doubled: &[usize]) -> Vec<u64> {
    let total: usize = doubled.iter().sum();
    let mut counts = vec![0u64; total + 1];
    counts[0] = 1;
    let mut reach = 0;
    for &r in doubled {
        reach += r;
        for s in (r..=reach).rev() {
            counts[s] += counts[s - r];
        }
    }
    counts
}

/// Wilcoxon signed-rank test of `after - before`. The statistic is
/// `min(W+, W-)`. Exact two-sided p for up to 25 nonzero differences,
/// normal approximation (with tie-corrected variance) above.
pub fn wilcoxon_signed_rank(before: &[f64], after: &[f64], zero: ZeroMethod) -> Result<TestResult> {
    if before.len() != after.len() {
        return Err(Error::InvalidParameter {
            name: "after",
            reason: format!("{} paired values against {}", after.len(), before.len()),
        });
    }
    let diffs: Vec<f64> = before.iter().zip(after).map(|(b, a)| a - b).collect();
    let nonzero = diffs.iter().filter(|d| **d != 0.0).count();
    if nonzero == 0 {
        return Err(Error::DegenerateSample("all paired differences are zero".into()));
    }
    let ranked: Vec<f64> = match zero {
        ZeroMethod::Wilcoxon => diffs.iter().copied().filter(|d| *d != 0.0).collect(),
        ZeroMethod::Pratt => diffs.clone(),
    };
    let ranks = average_ranks(ranked.iter().map(|d| d.abs()).collect());
    let signed: Vec<(f64, f64)> = ranked
        .iter()
        .zip(&ranks)
        .filter(|(d, _)| **d != 0.0)
        .map(|(d, r)| (*d, *r))
        .collect();
    let w_plus: f64 = signed.iter().filter(|(d, _)| *d > 0.0).map(|(_, r)| r).sum::<f64>() + 0.0;
    let total: f64 = signed.iter().map(|(_, r)| r).sum();
    let statistic = w_plus.min(total - w_plus);

    if nonzero <= WILCOXON_EXACT_MAX {
        let doubled: Vec<usize> = signed.iter().map(|(_, r)| (2.0 * r).round() as usize).collect();
        let counts = signed_rank_counts(&doubled);
        let observed = (2.0 * w_plus).round() as usize;
        let lower: u64 = counts[..=observed].iter().sum();
        let upper: u64 = counts[observed..].iter().sum();
        let all = 1u64 << nonzero;
        let p = (2 * lower.min(upper)) as f64 / all as f64;
        return Ok(TestResult {
            statistic,
            p: p.min(1.0),
            exact: true,
        });
    }
    let mean = total / 2.0;
    let var: f64 = signed.iter().map(|(_, r)| r * r).sum::<f64>() / 4.0;
    let z = (w_plus - mean) / var.sqrt();
    Ok(TestResult {
        statistic,
        p: normal_two_sided(z),
        exact: false,
    })
}

/// Mann-Whitney U test. `U` counts, for the first sample, pairs `(x, y)`
/// with `x > y` plus half the ties. Exact two-sided p (conditional on ties)
/// for pooled size up to 12, otherwise normal approximation with tie and
/// continuity corrections.
pub fn mann_whitney_u(x: &[f64], y: &[f64]) -> Result<TestResult> {
    if x.is_empty() || y.is_empty() {
        return Err(Error::DegenerateSample("Mann-Whitney U needs two nonempty samples".into()));
    }
    let (n1, n2) = (x.len(), y.len());
    let n = n1 + n2;
    let pooled: Vec<f64> = x.iter().chain(y).copied().collect();
    let ranks = average_ranks(pooled);
    let r1: f64 = ranks[..n1].iter().sum();
    let u = r1 - (n1 * (n1 + 1)) as f64 / 2.0;

    if n <= MANN_WHITNEY_EXACT_MAX {
        // counts[j][s]: subsets of size j with doubled rank sum s.
        let doubled: Vec<usize> = ranks.iter().map(|r| (2.0 * r).round() as usize).collect();
        let total: usize = doubled.iter().sum();
        let mut counts = vec![vec![0u64; total + 1]; n1 + 1];
        counts[0][0] = 1;
        for &r in &doubled {
            for j in (1..=n1).rev() {
                for s in (r..=total).rev() {
                    counts[j][s] += counts[j - 1][s - r];
                }
            }
        }
        // |2U - n1 n2| with 2U = S - n1(n1 + 1) for doubled rank sum S.
        let offset = (n1 * (n1 + 1) + n1 * n2) as i64;
        let observed = ((2.0 * r1).round() as i64 - offset).abs();
        let mut extreme = 0u64;
        let mut all = 0u64;
        for (s, &c) in counts[n1].iter().enumerate() {
            all += c;
            if (s as i64 - offset).abs() >= observed {
                extreme += c;
            }
        }
        return Ok(TestResult {
            statistic: u,
            p: extreme as f64 / all as f64,
            exact: true,
        });
    }

    let (f1, f2, fnn) = (n1 as f64, n2 as f64, n as f64);
    let mut sorted: Vec<f64> = x.iter().chain(y).copied().collect();
    sorted.sort_by(f64::total_cmp);
    let mut tie_term = 0.0;
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j < n && sorted[j] == sorted[i] {
            j += 1;
        }
        let t = (j - i) as f64;
        tie_term += t * t * t - t;
        i = j;
    }
    let var = f1 * f2 / 12.0 * ((fnn + 1.0) - tie_term / (fnn * (fnn - 1.0)));
    let mean = f1 * f2 / 2.0;
    let p = if var <= 0.0 {
        1.0
    } else {
        let z = ((u - mean).abs() - 0.5).max(0.0) / var.sqrt();
        normal_two_sided(z)
    };
    Ok(TestResult {
        statistic: u,
        p,
        exact: false,
    })
}

/// Exact two-sided binomial test: the total probability of outcomes no more
/// likely than `k` under `Binomial(n, p0)`.
pub fn binomial_test(k: u64, n: u64, p0: f64) -> Result<f64> {
    if k > n {
        return Err(Error::InvalidParameter {
            name: "k",
            reason: format!("{k} successes out of {n} trials"),
        });
    }
    if !(p0 > 0.0 && p0 < 1.0) {
        return Err(Error::InvalidParameter {
            name: "p0",
            reason: format!("{p0} is not in (0, 1)"),
        });
    }
    let pmf = |i: u64| (ln_binomial(n, i) + i as f64 * p0.ln() + (n - i) as f64 * (1.0 - p0).ln()).exp();
    let threshold = pmf(k) * (1.0 + 1e-7);
    let p: f64 = (0..=n).map(pmf).filter(|&q| q <= threshold).sum();
    Ok(p.min(1.0))
}
