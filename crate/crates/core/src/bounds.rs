//! Monte Carlo estimators for FDR expressions under attack.
//!
//! Every estimator is the sample mean of a per-trial quantity, so each one
//! is linear in its trials and carries the usual `sd / sqrt(T)` error. The
//! expectations couple local and global rejection counts from the same
//! trial, which is why samples arrive trial-aligned rather than being
//! re-simulated here.

use std::fmt;
use std::str::FromStr;

use crate::attack::bh_classifier_attack;
use crate::bh::{self, rejection_count};
use crate::model::HypothesisSet;
use crate::report::PValueReport;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BoundKind {
    /// `q * n0 / n`, the FDR of BH without an attack.
    BhBaseline,
    /// Exact FDR under the oracle attack:
    /// `m0 E[1 / (R~ v 1)] + q (n0 - m0) / n`. An upper bound for any attack
    /// when evaluated on that attack's `R~`.
    OracleAttack,
    /// Attack-independent bound on the attacked-null term:
    /// `m0 E[1 / (R~(attacked -> 1) v 1)]`.
    StrategyFreeUpper,
    /// Leave-one-out identity for the single-node BH-classifier attack.
    ClassifierExact,
    /// `m0 E[(1 - (q/m) R_a) / (R~ v 1)] + q (n0 - m0) / n`, single captured node.
    ClassifierUpper,
    /// Per-node form of [`BoundKind::ClassifierUpper`] for several captured nodes.
    DistributedUpper,
    /// Bound on the attacked-null term under shuffling:
    /// `m0 (m0 q / (m n) + (m1 / m) E[1 / (R v 1)])`.
    ShufflingUpper,
}

impl BoundKind {
    pub const ALL: [BoundKind; 7] = [
        BoundKind::BhBaseline,
        BoundKind::OracleAttack,
        BoundKind::StrategyFreeUpper,
        BoundKind::ClassifierExact,
        BoundKind::ClassifierUpper,
        BoundKind::DistributedUpper,
        BoundKind::ShufflingUpper,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BoundKind::BhBaseline => "bh-baseline",
            BoundKind::OracleAttack => "oracle",
            BoundKind::StrategyFreeUpper => "strategy-free",
            BoundKind::ClassifierExact => "classifier-exact",
            BoundKind::ClassifierUpper => "classifier-upper",
            BoundKind::DistributedUpper => "distributed-upper",
            BoundKind::ShufflingUpper => "shuffling-upper",
        }
    }
}

impl fmt::Display for BoundKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BoundKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        BoundKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::param("bound", format!("unknown bound kind `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundEstimate {
    pub kind: BoundKind,
    pub value: f64,
    pub std_error: f64,
    pub trials: usize,
}

/// Sample mean and standard error (sample variance, `n - 1` denominator).
pub fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

impl BoundEstimate {
    /// Estimate from per-trial values of the bound's integrand.
    pub fn from_terms(kind: BoundKind, terms: &[f64], name: &'static str) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::EmptySamples(name));
        }
        let (value, std_error) = mean_se(terms);
        Ok(Self { kind, value, std_error, trials: terms.len() })
    }
}

fn guard(r: usize) -> f64 {
    r.max(1) as f64
}

/// Untouched-null contribution `q (n0 - m0) / n`.
pub fn untouched_null_term(m0: usize, n0: usize, n: usize, q: f64) -> f64 {
    q * (n0 - m0) as f64 / n as f64
}

fn check_counts(m0: usize, n0: usize, n: usize) -> Result<()> {
    if m0 > n0 || n0 > n {
        return Err(Error::param("m0", format!("need m0 <= n0 <= n, got {m0}, {n0}, {n}")));
    }
    Ok(())
}

pub fn bh_baseline(n0: usize, n: usize, q: f64, trials: usize) -> BoundEstimate {
    BoundEstimate { kind: BoundKind::BhBaseline, value: q * n0 as f64 / n as f64, std_error: 0.0, trials }
}

/// Per-trial integrand of [`oracle_fdr`].
pub fn oracle_term(m0: usize, n0: usize, n: usize, q: f64, r_tilde: usize) -> f64 {
    m0 as f64 / guard(r_tilde) + untouched_null_term(m0, n0, n, q)
}

/// FDR of the oracle attack from global rejection counts `R~`.
pub fn oracle_fdr(m0: usize, n0: usize, n: usize, q: f64, r_tilde: &[usize]) -> Result<BoundEstimate> {
    check_counts(m0, n0, n)?;
    let terms: Vec<f64> = r_tilde.iter().map(|&r| oracle_term(m0, n0, n, q, r)).collect();
    BoundEstimate::from_terms(BoundKind::OracleAttack, &terms, "oracle")
}

/// Attacked-null term bound from `R~(attacked -> 1)` samples.
pub fn strategy_free_upper(m0: usize, r_tilde_allones: &[usize]) -> Result<BoundEstimate> {
    let terms: Vec<f64> = r_tilde_allones.iter().map(|&r| m0 as f64 / guard(r)).collect();
    BoundEstimate::from_terms(BoundKind::StrategyFreeUpper, &terms, "strategy-free")
}

/// Per-trial integrand of [`classifier_upper`].
pub fn classifier_term(m0: usize, n0: usize, n: usize, m: usize, q: f64, r_a: usize, r_tilde: usize) -> f64 {
    let first = if m == 0 { 0.0 } else { m0 as f64 * (1.0 - q * r_a as f64 / m as f64) / guard(r_tilde) };
    first + untouched_null_term(m0, n0, n, q)
}

/// Upper bound for the single-node BH-classifier attack from `(R_a, R~)` pairs.
pub fn classifier_upper(
    m0: usize,
    n0: usize,
    n: usize,
    m: usize,
    q: f64,
    paired: &[(usize, usize)],
) -> Result<BoundEstimate> {
    check_counts(m0, n0, n)?;
    if m0 > m {
        return Err(Error::param("m0", format!("{m0} exceeds m = {m}")));
    }
    if let Some(&(r_a, _)) = paired.iter().find(|&&(r_a, _)| r_a > m) {
        return Err(Error::param("r_a", format!("local rejections {r_a} exceed m = {m}")));
    }
    let terms: Vec<f64> = paired.iter().map(|&(r_a, r_tilde)| classifier_term(m0, n0, n, m, q, r_a, r_tilde)).collect();
    BoundEstimate::from_terms(BoundKind::ClassifierUpper, &terms, "classifier-upper")
}

/// Largest `n` accepted by [`classifier_exact_term`].
pub const EXACT_TERM_MAX_N: usize = 500;

/// One trial of the leave-one-out sum over captured nulls `i`:
/// `(1 - (q/m) R_a(p_i -> 0)) / R~(p_i -> 1)`.
///
/// `pvalues` holds the original (pre-attack) p-values indexed by id and
/// `captured` the captured node's original report. Both counts are obtained
/// by replaying the local classification and the global BH run with the
/// substitution; every other node reports honestly.
pub fn classifier_exact_term(pvalues: &[f64], captured: &PValueReport, hs: &HypothesisSet, q: f64) -> Result<f64> {
    let n = pvalues.len();
    if n > EXACT_TERM_MAX_N {
        return Err(Error::SizeGuard { what: "classifier-exact replay", limit: EXACT_TERM_MAX_N, got: n });
    }
    if n != hs.n() {
        return Err(Error::Misaligned(format!("{n} p-values for {} hypotheses", hs.n())));
    }
    let m = captured.len();
    let mut sum = 0.0;
    for (pos, &(id, _)) in captured.entries.iter().enumerate() {
        if !hs.is_null(id) {
            continue;
        }
        let mut local = captured.values();
        local[pos] = 0.0;
        let r_a_zero = rejection_count(&local, q, m);

        let mut raised = captured.clone();
        raised.entries[pos].1 = 1.0;
        let (attacked, _) = bh_classifier_attack(&raised, q);
        let mut global = pvalues.to_vec();
        for &(j, p) in &attacked.entries {
            global[j] = p;
        }
        let r_tilde_one = bh::rejection_count(&global, q, n);

        sum += (1.0 - q * r_a_zero as f64 / m as f64) / guard(r_tilde_one);
    }
    Ok(sum)
}

/// Local rejection samples of one captured node with its null count.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeSamples {
    pub m0: usize,
    pub r_local: Vec<usize>,
}

/// Per-trial integrand of [`distributed_upper`]: `(m0_i, R_i)` for each captured node.
pub fn distributed_term(nodes: &[(usize, usize)], r_tilde: usize, q: f64, d: usize, n: usize, n0: usize) -> f64 {
    let scale = q * d as f64 / n as f64;
    let m0_total: usize = nodes.iter().map(|&(m0, _)| m0).sum();
    let first: f64 = nodes.iter().map(|&(m0, r)| m0 as f64 * (1.0 - scale * r as f64) / guard(r_tilde)).sum();
    first + untouched_null_term(m0_total, n0, n, q)
}

/// Upper bound for BH-classifier attacks on several nodes.
pub fn distributed_upper(
    per_node: &[NodeSamples],
    r_tilde: &[usize],
    q: f64,
    d: usize,
    n: usize,
    n0: usize,
) -> Result<BoundEstimate> {
    if d == 0 || n % d != 0 {
        return Err(Error::IndivisibleNodes { n, d });
    }
    let node_size = n / d;
    let m0_total: usize = per_node.iter().map(|s| s.m0).sum();
    check_counts(m0_total, n0, n)?;
    for s in per_node {
        if s.r_local.len() != r_tilde.len() {
            return Err(Error::Misaligned(format!(
                "{} local samples against {} global samples",
                s.r_local.len(),
                r_tilde.len()
            )));
        }
        if s.m0 > node_size || s.r_local.iter().any(|&r| r > node_size) {
            return Err(Error::param("r_local", format!("counts must not exceed n/d = {node_size}")));
        }
    }
    let terms: Vec<f64> = r_tilde
        .iter()
        .enumerate()
        .map(|(t, &rt)| {
            let nodes: Vec<(usize, usize)> = per_node.iter().map(|s| (s.m0, s.r_local[t])).collect();
            distributed_term(&nodes, rt, q, d, n, n0)
        })
        .collect();
    BoundEstimate::from_terms(BoundKind::DistributedUpper, &terms, "distributed-upper")
}

/// Per-trial integrand of [`shuffling_upper`].
pub fn shuffling_term(m0: usize, m1: usize, n: usize, q: f64, r: usize) -> f64 {
    let m = (m0 + m1) as f64;
    if m0 == 0 {
        return 0.0;
    }
    m0 as f64 * (m0 as f64 * q / (m * n as f64) + m1 as f64 / m / guard(r))
}

/// Bound on the attacked-null term under shuffling from global rejection counts.
pub fn shuffling_upper(m0: usize, m1: usize, n: usize, q: f64, r: &[usize]) -> Result<BoundEstimate> {
    if m0 + m1 > n {
        return Err(Error::param("m", format!("m0 + m1 = {} exceeds n = {n}", m0 + m1)));
    }
    let terms: Vec<f64> = r.iter().map(|&r| shuffling_term(m0, m1, n, q, r)).collect();
    BoundEstimate::from_terms(BoundKind::ShufflingUpper, &terms, "shuffling-upper")
}
