//! Wilcoxon signed-rank test, two-sided.
//!
//! Zero differences are dropped and tied magnitudes get midranks. Up to
//! [`EXACT_MAX_N`] nonzero differences the null distribution of the
//! positive rank sum is counted exactly; above that a normal approximation
//! with tie and continuity corrections is used.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use super::EvalError;

pub const EXACT_MAX_N: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WilcoxonMethod {
    Exact,
    Normal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WilcoxonResult {
    /// min(W+, W-)
    pub statistic: f64,
    pub p_value: f64,
    /// Nonzero differences used.
    pub n: usize,
    pub method: WilcoxonMethod,
}

/// Signed midranks of the nonzero differences `a - b`, doubled so that
/// every rank is an integer.
struct Ranked {
    /// (doubled rank, positive?)
    ranks: Vec<(u64, bool)>,
    /// Sizes of tie groups.
    ties: Vec<usize>,
}

fn rank(pairs: &[(f64, f64)]) -> Ranked {
    let mut diffs: Vec<f64> = pairs.iter().map(|(a, b)| a - b).filter(|d| *d != 0.0).collect();
    diffs.sort_by(|x, y| x.abs().total_cmp(&y.abs()));
    let mut ranks = Vec::with_capacity(diffs.len());
    let mut ties = Vec::new();
    let mut i = 0;
    while i < diffs.len() {
        let mut j = i;
        while j + 1 < diffs.len() && diffs[j + 1].abs() == diffs[i].abs() {
            j += 1;
        }
        // positions i..=j share rank ((i+1)+(j+1))/2; doubled: i+j+2
        let doubled = (i + j + 2) as u64;
        for d in &diffs[i..=j] {
            ranks.push((doubled, *d > 0.0));
        }
        ties.push(j - i + 1);
        i = j + 1;
    }
    Ranked { ranks, ties }
}

fn positive_sum(r: &Ranked) -> u64 {
    r.ranks.iter().filter(|(_, pos)| *pos).map(|(d, _)| d).sum()
}

pub fn wilcoxon_signed_rank(pairs: &[(f64, f64)]) -> Result<WilcoxonResult, EvalError> {
    let n = pairs.iter().filter(|(a, b)| a != b).count();
    if n <= EXACT_MAX_N {
        wilcoxon_exact(pairs)
    } else {
        wilcoxon_normal(pairs)
    }
}

/// Exact two-sided p: the share of the 2^n equally likely sign assignments
/// whose min(W+, W-) is at most the observed one.
pub fn wilcoxon_exact(pairs: &[(f64, f64)]) -> Result<WilcoxonResult, EvalError> {
    if pairs.is_empty() {
        return Err(EvalError::EmptyInput);
    }
    let r = rank(pairs);
    let n = r.ranks.len();
    if n == 0 {
        return Ok(WilcoxonResult { statistic: 0.0, p_value: 1.0, n, method: WilcoxonMethod::Exact });
    }
    if n > 63 {
        return Err(EvalError::TooLargeForExact(n));
    }
    let total: u64 = r.ranks.iter().map(|(d, _)| d).sum();
    let plus = positive_sum(&r);
    let observed = plus.min(total - plus);

    // counts[s]: number of sign assignments with doubled positive sum s
    let mut counts = vec![0u64; total as usize + 1];
    counts[0] = 1;
    let mut reach = 0usize;
    for &(d, _) in &r.ranks {
        let d = d as usize;
        for s in (0..=reach).rev() {
            counts[s + d] += counts[s];
        }
        reach += d;
    }
    let hits: u64 = counts.iter().enumerate().filter(|&(s, _)| (s as u64).min(total - s as u64) <= observed).map(|(_, c)| c).sum();
    let p_value = hits as f64 / 2f64.powi(n as i32);
    Ok(WilcoxonResult { statistic: observed as f64 / 2.0, p_value: p_value.min(1.0), n, method: WilcoxonMethod::Exact })
}

pub fn wilcoxon_normal(pairs: &[(f64, f64)]) -> Result<WilcoxonResult, EvalError> {
    if pairs.is_empty() {
        return Err(EvalError::EmptyInput);
    }
    let r = rank(pairs);
    let n = r.ranks.len();
    if n == 0 {
        return Ok(WilcoxonResult { statistic: 0.0, p_value: 1.0, n, method: WilcoxonMethod::Normal });
    }
    let total = r.ranks.iter().map(|(d, _)| d).sum::<u64>() as f64 / 2.0;
    let plus = positive_sum(&r) as f64 / 2.0;
    let w = plus.min(total - plus);
    let nf = n as f64;
    let mean = nf * (nf + 1.0) / 4.0;
    let tie_term: f64 = r.ties.iter().map(|&t| (t * t * t - t) as f64).sum::<f64>() / 48.0;
    let var = nf * (nf + 1.0) * (2.0 * nf + 1.0) / 24.0 - tie_term;
    let p_value = if var <= 0.0 {
        1.0
    } else {
        let z = ((w - mean).abs() - 0.5).max(0.0) / var.sqrt();
        let std = Normal::new(0.0, 1.0).expect("unit normal");
        (2.0 * std.sf(z)).min(1.0)
    };
    Ok(WilcoxonResult { statistic: w, p_value, n, method: WilcoxonMethod::Normal })
}
