//! What a node sends to the central agent.

use std::collections::HashSet;

use crate::model::HypothesisSet;
use crate::{Error, Result};

/// One node's `(hypothesis id, p-value)` pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct PValueReport {
    pub node_id: usize,
    pub entries: Vec<(usize, f64)>,
}

impl PValueReport {
    /// Builds a report after checking value range and id uniqueness.
    pub fn new(node_id: usize, entries: Vec<(usize, f64)>) -> Result<Self> {
        let mut seen = HashSet::with_capacity(entries.len());
        for &(id, p) in &entries {
            check_p(id, p)?;
            if !seen.insert(id) {
                return Err(Error::DuplicateHypothesis(id));
            }
        }
        Ok(Self { node_id, entries })
    }

    /// Like [`PValueReport::new`], also requiring every id to be owned by the node.
    pub fn for_node(hs: &HypothesisSet, node_id: usize, entries: Vec<(usize, f64)>) -> Result<Self> {
        for &(id, _) in &entries {
            if id >= hs.n() {
                return Err(Error::UnknownHypothesis(id));
            }
            if hs.node_of(id) != node_id {
                return Err(Error::ForeignHypothesis { id, node: node_id });
            }
        }
        Self::new(node_id, entries)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn values(&self) -> Vec<f64> {
        self.entries.iter().map(|&(_, p)| p).collect()
    }

    pub(crate) fn with_values(&self, values: impl IntoIterator<Item = f64>) -> Self {
        let entries = self.entries.iter().zip(values).map(|(&(id, _), p)| (id, p)).collect();
        Self { node_id: self.node_id, entries }
    }
}

pub(crate) fn check_p(id: usize, p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::PValueRange { id, value: p })
    }
}

/// Splits a full p-value vector (indexed by hypothesis id) into node reports.
pub fn node_reports(hs: &HypothesisSet, pvalues: &[f64]) -> Vec<PValueReport> {
    assert_eq!(pvalues.len(), hs.n(), "one p-value per hypothesis");
    (0..hs.nodes())
        .map(|node| PValueReport { node_id: node, entries: hs.node_range(node).map(|id| (id, pvalues[id])).collect() })
        .collect()
}
