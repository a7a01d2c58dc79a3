//! Monte Carlo trial runner.
//!
//! One trial: derive the trial stream, draw labels (random placement only),
//! statistics and p-values, pick captured nodes, attack, defend, run the
//! global BH and record everything the bound estimators need. The draws that
//! define the data come first, so two configurations differing only in
//! attack or defense see the same realization for the same trial index.

use rayon::prelude::*;

use crate::attack::{apply_attack, AttackConfig, Capture};
use crate::bh::{self, TrialMetrics};
use crate::bounds::{self, mean_se, BoundEstimate, BoundKind};
use crate::defense::{counter_remove_zeros, counter_resample_zeros, Defense};
use crate::model::{
    build_hypotheses, p_values, proportional_counts, sample_statistics, AltMeanDistribution, NullPlacement,
};
use crate::report::node_reports;
use crate::rng::{trial_rng, INDEX_LIMIT};
use crate::{Error, Result};

/// How many nulls there are and where they sit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NullSpec {
    /// `n0` nulls at uniformly random positions, redrawn every trial.
    Random { n0: usize },
    /// `n0` nulls spread evenly over nodes, fixed across trials.
    Proportional { n0: usize },
    /// Exact per-node null counts, fixed across trials.
    PerNode(Vec<usize>),
}

impl NullSpec {
    pub fn n0(&self) -> usize {
        match self {
            NullSpec::Random { n0 } | NullSpec::Proportional { n0 } => *n0,
            NullSpec::PerNode(counts) => counts.iter().sum(),
        }
    }

    pub fn placement(&self, d: usize) -> NullPlacement {
        match self {
            NullSpec::Random { .. } => NullPlacement::RandomUniform,
            NullSpec::Proportional { n0 } => NullPlacement::FixedPerNode(proportional_counts(*n0, d)),
            NullSpec::PerNode(counts) => NullPlacement::FixedPerNode(counts.clone()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub n: usize,
    pub d: usize,
    pub nulls: NullSpec,
    pub q: f64,
    pub attack: AttackConfig,
    pub defense: Defense,
    pub alt: AltMeanDistribution,
    pub trials: usize,
    pub master_seed: u64,
    /// Mixed into every trial stream; sweeps set it to the grid position.
    pub grid_index: u64,
    /// Bound estimates to attach to the aggregate.
    pub bounds: Vec<BoundKind>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            n: 10_000,
            d: 5,
            nulls: NullSpec::Proportional { n0: 8000 },
            q: 0.05,
            attack: AttackConfig::none(),
            defense: Defense::None,
            alt: AltMeanDistribution::default(),
            trials: 10_000,
            master_seed: 0,
            grid_index: 0,
            bounds: Vec::new(),
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.d == 0 || self.n % self.d != 0 {
            return Err(Error::IndivisibleNodes { n: self.n, d: self.d });
        }
        bh::check_q(self.q)?;
        if self.trials == 0 || self.trials as u64 >= INDEX_LIMIT {
            return Err(Error::param("trials", format!("must be in [1, 2^32), got {}", self.trials)));
        }
        if self.grid_index >= INDEX_LIMIT {
            return Err(Error::param("grid_index", "must be below 2^32"));
        }
        // Shape checks only; FixedPerNode placement never touches the stream.
        let mut dummy = trial_rng(0, 0, 0);
        if !matches!(self.nulls, NullSpec::Random { .. }) {
            build_hypotheses(self.n, self.nulls.n0(), self.d, &self.nulls.placement(self.d), &mut dummy)?;
        } else if self.nulls.n0() > self.n {
            return Err(Error::Placement(format!("n0 = {} exceeds n = {}", self.nulls.n0(), self.n)));
        }
        self.attack.validate(self.d)?;
        let captured = self.attack.captured_count(self.d)?;
        for kind in &self.bounds {
            match kind {
                BoundKind::ClassifierUpper | BoundKind::ClassifierExact if captured > 1 => {
                    return Err(Error::param(
                        "bounds",
                        format!("`{kind}` applies to a single captured node; use distributed-upper"),
                    ));
                }
                BoundKind::ClassifierExact if self.n > bounds::EXACT_TERM_MAX_N => {
                    return Err(Error::SizeGuard {
                        what: "classifier-exact replay",
                        limit: bounds::EXACT_TERM_MAX_N,
                        got: self.n,
                    });
                }
                _ => {}
            }
        }
        Ok(())
    }

    pub fn node_size(&self) -> usize {
        self.n / self.d
    }

    fn wants(&self, kind: BoundKind) -> bool {
        self.bounds.contains(&kind)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CapturedNode {
    pub node_id: usize,
    /// True nulls on the node.
    pub m0: usize,
    /// Local BH rejections on the node's honest values at level `q`.
    pub local_rejections: usize,
}

/// Everything realized in one trial.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub trial_index: usize,
    pub fdp: f64,
    pub power_prop: f64,
    /// Global rejections after attack and defense.
    pub r_tilde: usize,
    /// False rejections.
    pub v: usize,
    /// False rejections among captured hypotheses.
    pub v_attacked: usize,
    /// Captured hypotheses.
    pub m: usize,
    /// True nulls among the captured hypotheses.
    pub m0: usize,
    /// Entries dropped by the remove-zeros defense.
    pub removed: usize,
    pub captured: Vec<CapturedNode>,
    /// Global rejections with every captured value set to 1, when requested.
    pub r_tilde_allones: Option<usize>,
    /// Leave-one-out sum for the single-node classifier identity, when requested.
    pub classifier_exact: Option<f64>,
}

impl TrialRecord {
    pub fn m1(&self) -> usize {
        self.m - self.m0
    }

    /// Per-trial integrand of a bound; see [`BoundKind`].
    pub fn bound_term(&self, kind: BoundKind, cfg: &ExperimentConfig) -> Result<f64> {
        let (n, n0, q) = (cfg.n, cfg.nulls.n0(), cfg.q);
        let missing = |what: &str| Error::param("bounds", format!("trial record lacks {what}"));
        Ok(match kind {
            BoundKind::BhBaseline => q * n0 as f64 / n as f64,
            BoundKind::OracleAttack => bounds::oracle_term(self.m0, n0, n, q, self.r_tilde),
            BoundKind::StrategyFreeUpper => {
                let r = self.r_tilde_allones.ok_or_else(|| missing("R~(attacked -> 1)"))?;
                self.m0 as f64 / r.max(1) as f64
            }
            BoundKind::ClassifierExact => {
                self.classifier_exact.ok_or_else(|| missing("the leave-one-out sum"))?
                    + bounds::untouched_null_term(self.m0, n0, n, q)
            }
            BoundKind::ClassifierUpper => {
                let r_a = self.captured.iter().map(|c| c.local_rejections).sum();
                bounds::classifier_term(self.m0, n0, n, self.m, q, r_a, self.r_tilde)
            }
            BoundKind::DistributedUpper => {
                let nodes: Vec<_> = self.captured.iter().map(|c| (c.m0, c.local_rejections)).collect();
                bounds::distributed_term(&nodes, self.r_tilde, q, cfg.d, n, n0)
            }
            BoundKind::ShufflingUpper => bounds::shuffling_term(self.m0, self.m1(), n, q, self.r_tilde),
        })
    }
}

pub fn run_trial(cfg: &ExperimentConfig, trial_index: usize) -> Result<TrialRecord> {
    let mut rng = trial_rng(cfg.master_seed, cfg.grid_index, trial_index as u64);
    let (n, q) = (cfg.n, cfg.q);

    let hs = build_hypotheses(n, cfg.nulls.n0(), cfg.d, &cfg.nulls.placement(cfg.d), &mut rng)?;
    let pvalues = p_values(&sample_statistics(&hs, &cfg.alt, &mut rng))?;
    let captured_ids = cfg.attack.resolve(cfg.d, &mut rng)?;

    let honest = node_reports(&hs, &pvalues);
    let captured_reports: Vec<_> = captured_ids.iter().map(|&k| honest[k].clone()).collect();
    let outcome = apply_attack(cfg.attack.model, &captured_reports, &hs, q, &mut rng);

    let mut received = honest.clone();
    for (&k, report) in captured_ids.iter().zip(outcome.reports) {
        received[k] = report;
    }
    let (received, n_effective, removed) = match cfg.defense {
        Defense::None => (received, n, 0),
        Defense::ResampleZeros => (counter_resample_zeros(&received, &captured_ids, &mut rng), n, 0),
        Defense::RemoveZeros => {
            let reduced = counter_remove_zeros(&received, &captured_ids);
            (reduced.reports, reduced.n_effective, reduced.removed)
        }
    };

    let (ids, values): (Vec<usize>, Vec<f64>) = received.iter().flat_map(|r| r.entries.iter().copied()).unzip();
    let (rejected, r_tilde) = bh::rejection_mask(&values, q, n_effective);
    let is_captured = |id: usize| captured_ids.binary_search(&hs.node_of(id)).is_ok();
    let (mut v, mut v_attacked) = (0, 0);
    for (&id, _) in ids.iter().zip(&rejected).filter(|(_, &r)| r) {
        if hs.is_null(id) {
            v += 1;
            v_attacked += usize::from(is_captured(id));
        }
    }
    let metrics = TrialMetrics::from_counts(v, r_tilde, hs.n1());

    let captured: Vec<CapturedNode> = captured_ids
        .iter()
        .map(|&k| CapturedNode {
            node_id: k,
            m0: hs.node_nulls(k),
            local_rejections: bh::rejection_count(&honest[k].values(), q, cfg.node_size()),
        })
        .collect();

    let r_tilde_allones = cfg.wants(BoundKind::StrategyFreeUpper).then(|| {
        let mut raised = pvalues.clone();
        for &k in &captured_ids {
            raised[hs.node_range(k)].fill(1.0);
        }
        bh::rejection_count(&raised, q, n)
    });
    let classifier_exact = match (cfg.wants(BoundKind::ClassifierExact), captured_ids.as_slice()) {
        (false, _) => None,
        (true, []) => Some(0.0),
        (true, &[k]) => Some(bounds::classifier_exact_term(&pvalues, &honest[k], &hs, q)?),
        (true, _) => return Err(Error::param("bounds", "classifier-exact needs at most one captured node")),
    };

    Ok(TrialRecord {
        trial_index,
        fdp: metrics.fdp,
        power_prop: metrics.power_prop,
        r_tilde,
        v,
        v_attacked,
        m: captured_ids.len() * cfg.node_size(),
        m0: outcome.m0_realized,
        removed,
        captured,
        r_tilde_allones,
        classifier_exact,
    })
}

/// All trials of `cfg`, ordered by trial index. Runs on the current rayon pool;
/// the output does not depend on its size.
pub fn run_trials(cfg: &ExperimentConfig) -> Result<Vec<TrialRecord>> {
    cfg.validate()?;
    (0..cfg.trials).into_par_iter().map(|t| run_trial(cfg, t)).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct AggregateStats {
    pub mean_fdr: f64,
    pub se_fdr: f64,
    pub mean_power: f64,
    pub se_power: f64,
    pub trials: usize,
    pub bound_estimates: Vec<BoundEstimate>,
}

pub fn bound_estimate(kind: BoundKind, cfg: &ExperimentConfig, records: &[TrialRecord]) -> Result<BoundEstimate> {
    let terms = records.iter().map(|r| r.bound_term(kind, cfg)).collect::<Result<Vec<f64>>>()?;
    BoundEstimate::from_terms(kind, &terms, kind.name())
}

/// Sequential reduction in trial order.
pub fn aggregate(cfg: &ExperimentConfig, records: &[TrialRecord]) -> Result<AggregateStats> {
    if records.is_empty() {
        return Err(Error::EmptySamples("aggregate"));
    }
    let fdp: Vec<f64> = records.iter().map(|r| r.fdp).collect();
    let power: Vec<f64> = records.iter().map(|r| r.power_prop).collect();
    let (mean_fdr, se_fdr) = mean_se(&fdp);
    let (mean_power, se_power) = mean_se(&power);
    let bound_estimates =
        cfg.bounds.iter().map(|&kind| bound_estimate(kind, cfg, records)).collect::<Result<Vec<_>>>()?;
    Ok(AggregateStats { mean_fdr, se_fdr, mean_power, se_power, trials: records.len(), bound_estimates })
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<AggregateStats> {
    aggregate(cfg, &run_trials(cfg)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    /// Number of true nulls.
    N0,
    /// Size of a single captured node; sets `d = n / m` and `lambda = 1 / d`.
    M,
    /// Fraction of captured nodes.
    Lambda,
}

impl SweepAxis {
    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::N0 => "n0",
            SweepAxis::M => "m",
            SweepAxis::Lambda => "lambda",
        }
    }

    /// `template` moved to grid point `value` at position `grid_index`.
    pub fn apply(self, template: &ExperimentConfig, value: f64, grid_index: usize) -> Result<ExperimentConfig> {
        let mut cfg = template.clone();
        cfg.grid_index = grid_index as u64;
        let count = |name: &'static str| -> Result<usize> {
            if value >= 0.0 && value.fract() == 0.0 && value <= template.n as f64 {
                Ok(value as usize)
            } else {
                Err(Error::param(name, format!("grid value {value} is not a count in [0, {}]", template.n)))
            }
        };
        match self {
            SweepAxis::N0 => {
                let n0 = count("n0")?;
                cfg.nulls = match template.nulls {
                    NullSpec::Random { .. } => NullSpec::Random { n0 },
                    NullSpec::Proportional { .. } => NullSpec::Proportional { n0 },
                    NullSpec::PerNode(_) => {
                        return Err(Error::param("n0", "cannot sweep n0 with explicit per-node counts"))
                    }
                };
            }
            SweepAxis::M => {
                let m = count("m")?;
                if m == 0 || template.n % m != 0 {
                    return Err(Error::param("m", format!("{m} does not divide n = {}", template.n)));
                }
                if matches!(template.nulls, NullSpec::PerNode(_)) {
                    return Err(Error::param("m", "cannot change the node count with explicit per-node counts"));
                }
                cfg.d = template.n / m;
                cfg.attack.lambda_frac = 1.0 / cfg.d as f64;
                if let Capture::Fixed(_) = cfg.attack.capture {
                    cfg.attack.capture = Capture::Fixed(vec![0]);
                }
            }
            SweepAxis::Lambda => {
                cfg.attack.lambda_frac = value;
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

impl std::str::FromStr for SweepAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [SweepAxis::N0, SweepAxis::M, SweepAxis::Lambda]
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::param("axis", format!("unknown sweep axis `{s}`")))
    }
}

/// One aggregate per grid value; grid position `i` feeds the trial streams.
pub fn sweep(template: &ExperimentConfig, axis: SweepAxis, values: &[f64]) -> Result<Vec<(f64, AggregateStats)>> {
    values
        .iter()
        .enumerate()
        .map(|(i, &value)| {
            let cfg = axis.apply(template, value, i)?;
            Ok((value, run_experiment(&cfg)?))
        })
        .collect()
}
