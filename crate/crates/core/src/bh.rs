//! Benjamini–Hochberg step-up procedure and realized error metrics.

use crate::model::HypothesisSet;
use crate::report::check_p;
use crate::{Error, Result};

/// Outcome of one BH run.
#[derive(Debug, Clone, PartialEq)]
pub struct RejectionResult {
    /// Rejected hypothesis ids, ascending.
    pub rejected: Vec<usize>,
    /// Step-up index `i0`; zero when nothing is rejected.
    pub cutoff_index: usize,
    /// `q * i0 / n_effective`.
    pub threshold: f64,
}

impl RejectionResult {
    pub fn r(&self) -> usize {
        self.rejected.len()
    }
}

pub(crate) fn check_q(q: f64) -> Result<()> {
    if q.is_finite() && q > 0.0 && q <= 1.0 {
        Ok(())
    } else {
        Err(Error::param("q", format!("target level must lie in (0, 1], got {q}")))
    }
}

#[inline]
fn rank_threshold(q: f64, rank: usize, n_effective: usize) -> f64 {
    q * rank as f64 / n_effective as f64
}

/// Largest `i` with `sorted[i - 1] <= q * i / n_effective`, or 0.
///
/// `sorted` must be ascending.
pub fn step_up_cutoff(sorted: &[f64], q: f64, n_effective: usize) -> usize {
    debug_assert!(sorted.windows(2).all(|w| w[0] <= w[1]));
    (1..=sorted.len()).rev().find(|&i| sorted[i - 1] <= rank_threshold(q, i, n_effective)).unwrap_or(0)
}

/// Number of BH rejections among `pvalues`.
pub fn rejection_count(pvalues: &[f64], q: f64, n_effective: usize) -> usize {
    let mut sorted = pvalues.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    step_up_cutoff(&sorted, q, n_effective)
}

/// Per-position rejection flags plus the rejection count.
///
/// Everything at or below the `i0`-th smallest value is rejected; ties with
/// that value cannot extend past rank `i0`, so the count equals `i0`.
pub fn rejection_mask(pvalues: &[f64], q: f64, n_effective: usize) -> (Vec<bool>, usize) {
    let mut sorted = pvalues.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    let i0 = step_up_cutoff(&sorted, q, n_effective);
    if i0 == 0 {
        return (vec![false; pvalues.len()], 0);
    }
    let cut = sorted[i0 - 1];
    (pvalues.iter().map(|&p| p <= cut).collect(), i0)
}

/// Runs BH over `(id, p)` pairs with threshold denominator `n_effective`.
pub fn bh_procedure(pvalues: &[(usize, f64)], q: f64, n_effective: usize) -> Result<RejectionResult> {
    check_q(q)?;
    if n_effective < pvalues.len() {
        return Err(Error::param(
            "n_effective",
            format!("{n_effective} is smaller than the {} supplied p-values", pvalues.len()),
        ));
    }
    for &(id, p) in pvalues {
        check_p(id, p)?;
    }
    let mut order: Vec<(usize, f64)> = pvalues.to_vec();
    order.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
    let sorted: Vec<f64> = order.iter().map(|&(_, p)| p).collect();
    let i0 = step_up_cutoff(&sorted, q, n_effective);
    let mut rejected: Vec<usize> = order[..i0].iter().map(|&(id, _)| id).collect();
    rejected.sort_unstable();
    let threshold = if i0 == 0 { 0.0 } else { rank_threshold(q, i0, n_effective) };
    Ok(RejectionResult { rejected, cutoff_index: i0, threshold })
}

/// Realized false rejections, FDP and true-positive proportion of one run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialMetrics {
    pub v: usize,
    pub r: usize,
    pub fdp: f64,
    pub power_prop: f64,
}

impl TrialMetrics {
    pub fn from_counts(v: usize, r: usize, n1: usize) -> Self {
        debug_assert!(v <= r);
        Self { v, r, fdp: v as f64 / r.max(1) as f64, power_prop: (r - v) as f64 / n1.max(1) as f64 }
    }
}

pub fn realized_metrics(res: &RejectionResult, hs: &HypothesisSet) -> Result<TrialMetrics> {
    let mut v = 0;
    for &id in &res.rejected {
        if id >= hs.n() {
            return Err(Error::UnknownHypothesis(id));
        }
        v += usize::from(hs.is_null(id));
    }
    Ok(TrialMetrics::from_counts(v, res.r(), hs.n1()))
}
