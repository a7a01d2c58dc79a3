//! Counter-attacks run by the central agent. Both assume the agent knows
//! which nodes are captured and target exact zeros from those nodes only.

use std::fmt;
use std::str::FromStr;

use rand::distr::Open01;
use rand::Rng;

use crate::report::PValueReport;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Defense {
    None,
    /// Replace attacker zeros with fresh Unif(0, 1) draws.
    ResampleZeros,
    /// Drop attacker zeros and run BH over what is left.
    RemoveZeros,
}

impl Defense {
    pub const ALL: [Defense; 3] = [Defense::None, Defense::ResampleZeros, Defense::RemoveZeros];

    pub fn name(self) -> &'static str {
        match self {
            Defense::None => "none",
            Defense::ResampleZeros => "resample",
            Defense::RemoveZeros => "remove",
        }
    }
}

impl fmt::Display for Defense {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Defense {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Defense::ALL
            .into_iter()
            .find(|d| d.name() == s)
            .ok_or_else(|| Error::param("defense", format!("unknown defense `{s}`")))
    }
}

fn is_attacked(report: &PValueReport, attacked: &[usize]) -> bool {
    attacked.contains(&report.node_id)
}

pub fn counter_resample_zeros<R: Rng + ?Sized>(
    reports: &[PValueReport],
    attacked: &[usize],
    rng: &mut R,
) -> Vec<PValueReport> {
    reports
        .iter()
        .map(|report| {
            if !is_attacked(report, attacked) {
                return report.clone();
            }
            let entries = report
                .entries
                .iter()
                .map(|&(id, p)| if p == 0.0 { (id, rng.sample(Open01)) } else { (id, p) })
                .collect();
            PValueReport { node_id: report.node_id, entries }
        })
        .collect()
}

/// Reports with attacker zeros removed.
#[derive(Debug, Clone, PartialEq)]
pub struct Reduced {
    pub reports: Vec<PValueReport>,
    /// Threshold denominator for the downstream BH run: `n - removed`.
    pub n_effective: usize,
    pub removed: usize,
}

pub fn counter_remove_zeros(reports: &[PValueReport], attacked: &[usize]) -> Reduced {
    let n: usize = reports.iter().map(PValueReport::len).sum();
    let mut removed = 0;
    let reports = reports
        .iter()
        .map(|report| {
            if !is_attacked(report, attacked) {
                return report.clone();
            }
            let entries: Vec<_> = report.entries.iter().copied().filter(|&(_, p)| p != 0.0).collect();
            removed += report.len() - entries.len();
            PValueReport { node_id: report.node_id, entries }
        })
        .collect();
    Reduced { reports, n_effective: n - removed, removed }
}
