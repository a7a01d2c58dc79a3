//! Hypotheses, their split across nodes, and the Gaussian data model that
//! produces test statistics and two-sided p-values.

use std::ops::Range;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::normal;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Label {
    TrueNull,
    NonNull,
}

impl Label {
    pub fn is_null(self) -> bool {
        self == Label::TrueNull
    }
}

/// Ground truth for `n` hypotheses spread over `d` nodes.
///
/// Node `k` owns the contiguous index block `k * n/d .. (k + 1) * n/d`.
#[derive(Debug, Clone, PartialEq)]
pub struct HypothesisSet {
    labels: Vec<Label>,
    nodes: usize,
    n0: usize,
}

impl HypothesisSet {
    pub fn new(labels: Vec<Label>, nodes: usize) -> Result<Self> {
        let n = labels.len();
        if nodes == 0 || n % nodes != 0 {
            return Err(Error::IndivisibleNodes { n, d: nodes });
        }
        let n0 = labels.iter().filter(|l| l.is_null()).count();
        Ok(Self { labels, nodes, n0 })
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn n0(&self) -> usize {
        self.n0
    }

    pub fn n1(&self) -> usize {
        self.n() - self.n0
    }

    pub fn nodes(&self) -> usize {
        self.nodes
    }

    /// Hypotheses per node (`n / d`).
    pub fn node_size(&self) -> usize {
        self.n() / self.nodes
    }

    pub fn node_of(&self, id: usize) -> usize {
        id / self.node_size()
    }

    pub fn node_range(&self, node: usize) -> Range<usize> {
        let k = self.node_size();
        node * k..(node + 1) * k
    }

    pub fn label(&self, id: usize) -> Label {
        self.labels[id]
    }

    pub fn is_null(&self, id: usize) -> bool {
        self.labels[id].is_null()
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    /// Number of true nulls owned by `node`.
    pub fn node_nulls(&self, node: usize) -> usize {
        self.labels[self.node_range(node)].iter().filter(|l| l.is_null()).count()
    }
}

/// Where the true nulls sit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NullPlacement {
    /// A uniformly random size-`n0` subset of all indices.
    RandomUniform,
    /// Exact null count per node; within a node the nulls take the lowest indices.
    FixedPerNode(Vec<usize>),
}

/// Spread `n0` nulls as evenly as possible; earlier nodes take the remainder.
pub fn proportional_counts(n0: usize, d: usize) -> Vec<usize> {
    (0..d).map(|k| n0 / d + usize::from(k < n0 % d)).collect()
}

pub fn build_hypotheses<R: Rng + ?Sized>(
    n: usize,
    n0: usize,
    d: usize,
    placement: &NullPlacement,
    rng: &mut R,
) -> Result<HypothesisSet> {
    if d == 0 || n % d != 0 {
        return Err(Error::IndivisibleNodes { n, d });
    }
    if n0 > n {
        return Err(Error::Placement(format!("n0 = {n0} exceeds n = {n}")));
    }
    let mut labels = vec![Label::NonNull; n];
    match placement {
        NullPlacement::RandomUniform => {
            for id in rand::seq::index::sample(rng, n, n0) {
                labels[id] = Label::TrueNull;
            }
        }
        NullPlacement::FixedPerNode(counts) => {
            let k = n / d;
            if counts.len() != d {
                return Err(Error::Placement(format!("{} per-node counts given for {d} nodes", counts.len())));
            }
            if let Some(c) = counts.iter().find(|&&c| c > k) {
                return Err(Error::Placement(format!("node count {c} exceeds node size {k}")));
            }
            let total: usize = counts.iter().sum();
            if total != n0 {
                return Err(Error::Placement(format!("per-node counts sum to {total}, expected n0 = {n0}")));
            }
            for (node, &c) in counts.iter().enumerate() {
                labels[node * k..node * k + c].fill(Label::TrueNull);
            }
        }
    }
    HypothesisSet::new(labels, d)
}

/// Range of the alternative mean; each non-null draws its own mean from it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AltMeanDistribution {
    lo: f64,
    hi: f64,
}

impl AltMeanDistribution {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite()) || lo > hi {
            return Err(Error::param("alt", format!("need finite lo <= hi, got ({lo}, {hi})")));
        }
        Ok(Self { lo, hi })
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.lo + (self.hi - self.lo) * rng.random::<f64>()
    }
}

impl Default for AltMeanDistribution {
    fn default() -> Self {
        Self { lo: 1.0, hi: 1.5 }
    }
}

/// Nulls ~ N(0, 1); non-nulls ~ N(mu, 1) with a fresh mu per index.
pub fn sample_statistics<R: Rng + ?Sized>(hs: &HypothesisSet, alt: &AltMeanDistribution, rng: &mut R) -> Vec<f64> {
    hs.labels()
        .iter()
        .map(|label| {
            let z: f64 = rng.sample(StandardNormal);
            match label {
                Label::TrueNull => z,
                Label::NonNull => z + alt.sample(rng),
            }
        })
        .collect()
}

/// `2 (1 - Phi(|x|))`.
pub fn two_sided_p(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::NonFinite(x));
    }
    Ok(normal::two_sided_tail(x))
}

pub fn p_values(statistics: &[f64]) -> Result<Vec<f64>> {
    statistics.iter().map(|&x| two_sided_p(x)).collect()
}
