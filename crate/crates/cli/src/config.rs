//! Flat key-value configuration and the precedence rules that turn a preset,
//! a config file and command-line flags into a [`Plan`].
//!
//! Precedence is field-wise: flag, then file, then preset default.

use std::path::Path;

use anyhow::{bail, Context, Result};
use byzfdr_core::attack::{AttackModel, Capture};
use byzfdr_core::bounds::BoundKind;
use byzfdr_core::defense::Defense;
use byzfdr_core::model::AltMeanDistribution;
use byzfdr_core::sim::{ExperimentConfig, NullSpec, SweepAxis};
use serde::Deserialize;

use crate::presets::{preset, Plan, Series};

/// One configuration layer. Every key is optional; unknown keys are errors.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Layer {
    pub preset: Option<String>,
    pub n: Option<usize>,
    pub d: Option<usize>,
    pub n0: Option<usize>,
    /// `random` or `proportional`.
    pub nulls: Option<String>,
    /// Explicit per-node null counts; overrides `n0` and `nulls`.
    pub nulls_per_node: Option<Vec<usize>>,
    pub q: Option<f64>,
    pub attack: Option<String>,
    pub defense: Option<String>,
    pub lambda: Option<f64>,
    /// Fixed captured node ids instead of a random draw per trial.
    pub captured: Option<Vec<usize>>,
    pub alt_lo: Option<f64>,
    pub alt_hi: Option<f64>,
    pub trials: Option<usize>,
    pub seed: Option<u64>,
    /// `n0`, `m`, `lambda` or `none`.
    pub axis: Option<String>,
    pub values: Option<Vec<f64>>,
    pub bounds: Option<Vec<String>>,
}

macro_rules! overlay {
    ($top:expr, $bottom:expr, $($field:ident),*) => {
        Layer { $($field: $top.$field.or($bottom.$field)),* }
    };
}

impl Layer {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).context("invalid config file")
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::from_toml(&text).with_context(|| format!("in {}", path.display()))
    }

    /// `self` wins wherever it sets a field.
    pub fn over(self, below: Layer) -> Layer {
        overlay!(
            self,
            below,
            preset,
            n,
            d,
            n0,
            nulls,
            nulls_per_node,
            q,
            attack,
            defense,
            lambda,
            captured,
            alt_lo,
            alt_hi,
            trials,
            seed,
            axis,
            values,
            bounds
        )
    }
}

fn parse<T: std::str::FromStr>(s: &str) -> Result<T>
where
    T::Err: std::error::Error + Send + Sync + 'static,
{
    Ok(s.parse::<T>()?)
}

/// Builds the plan for a merged layer.
pub fn resolve(layer: &Layer) -> Result<Plan> {
    let mut plan = match &layer.preset {
        Some(name) => preset(name).map_err(anyhow::Error::msg)?,
        None => Plan {
            name: "custom".into(),
            description: "single configuration".into(),
            base: ExperimentConfig::default(),
            axis: None,
            values: Vec::new(),
            series: vec![Series { attack: AttackModel::None, defense: Defense::None, bounds: Vec::new() }],
        },
    };
    let base = &mut plan.base;
    if let Some(n) = layer.n {
        base.n = n;
    }
    if let Some(d) = layer.d {
        base.d = d;
    }
    if let Some(n0) = layer.n0 {
        base.nulls = match base.nulls {
            NullSpec::Random { .. } => NullSpec::Random { n0 },
            _ => NullSpec::Proportional { n0 },
        };
    }
    if let Some(kind) = &layer.nulls {
        let n0 = base.nulls.n0();
        base.nulls = match kind.as_str() {
            "random" => NullSpec::Random { n0 },
            "proportional" => NullSpec::Proportional { n0 },
            other => bail!("unknown null placement `{other}` (expected random or proportional)"),
        };
    }
    if let Some(counts) = &layer.nulls_per_node {
        base.nulls = NullSpec::PerNode(counts.clone());
    }
    if let Some(q) = layer.q {
        base.q = q;
    }
    if let Some(lambda) = layer.lambda {
        base.attack.lambda_frac = lambda;
    }
    if let Some(nodes) = &layer.captured {
        base.attack.capture = Capture::Fixed(nodes.clone());
    }
    if layer.alt_lo.is_some() || layer.alt_hi.is_some() {
        let lo = layer.alt_lo.unwrap_or(base.alt.lo());
        let hi = layer.alt_hi.unwrap_or(base.alt.hi());
        base.alt = AltMeanDistribution::new(lo, hi)?;
    }
    if let Some(trials) = layer.trials {
        base.trials = trials;
    }
    if let Some(seed) = layer.seed {
        base.master_seed = seed;
    }
    if let Some(axis) = &layer.axis {
        plan.axis = match axis.as_str() {
            "none" => None,
            other => Some(parse::<SweepAxis>(other)?),
        };
    }
    if let Some(values) = &layer.values {
        plan.values = values.clone();
    }
    if plan.axis.is_none() {
        plan.values.clear();
    }

    if let Some(attack) = &layer.attack {
        let attack = parse::<AttackModel>(attack)?;
        plan.series.iter_mut().for_each(|s| s.attack = attack);
    }
    if let Some(defense) = &layer.defense {
        let defense = parse::<Defense>(defense)?;
        plan.series.iter_mut().for_each(|s| s.defense = defense);
    }
    if let Some(bounds) = &layer.bounds {
        let kinds = bounds.iter().map(|b| parse::<BoundKind>(b)).collect::<Result<Vec<_>>>()?;
        plan.series.iter_mut().for_each(|s| s.bounds = kinds.clone());
    }
    // Overrides can collapse series onto each other.
    let mut unique: Vec<Series> = Vec::new();
    for s in plan.series.drain(..) {
        if !unique.iter().any(|u| u.attack == s.attack && u.defense == s.defense) {
            unique.push(s);
        }
    }
    plan.series = unique;

    for (series, value, index) in plan.points() {
        plan.config(series, value, index).with_context(|| match value {
            Some(v) => format!("invalid grid point {v} for {}/{}", series.attack, series.defense),
            None => format!("invalid configuration for {}/{}", series.attack, series.defense),
        })?;
    }
    Ok(plan)
}

impl Plan {
    /// Every `(series, grid value, grid index)` in output order.
    pub fn points(&self) -> Vec<(&Series, Option<f64>, usize)> {
        let grid: Vec<Option<f64>> = match self.axis {
            Some(_) => self.values.iter().copied().map(Some).collect(),
            None => vec![None],
        };
        self.series.iter().flat_map(|s| grid.iter().enumerate().map(move |(i, &v)| (s, v, i))).collect()
    }

    /// Configuration for one point. Grid index alone keys the trial streams, so
    /// series at the same grid point share their data realizations.
    pub fn config(&self, series: &Series, value: Option<f64>, index: usize) -> Result<ExperimentConfig> {
        let mut cfg = self.base.clone();
        cfg.attack.model = series.attack;
        cfg.defense = series.defense;
        cfg.bounds = series.bounds.clone();
        match (self.axis, value) {
            (Some(axis), Some(v)) => Ok(axis.apply(&cfg, v, index)?),
            _ => {
                cfg.validate()?;
                Ok(cfg)
            }
        }
    }
}
