//! CSV files: aggregated results and per-trial dumps.

use std::io::{Read, Write};

use anyhow::{bail, Context, Result};
use byzfdr_core::bounds::BoundKind;
use byzfdr_core::sim::{aggregate, AggregateStats, CapturedNode, ExperimentConfig, NullSpec, TrialRecord};
use serde::Deserialize;

use crate::fmt::float;

pub const RESULTS_HEADER: [&str; 12] = [
    "axis_value",
    "attack",
    "defense",
    "mean_fdr",
    "se_fdr",
    "mean_power",
    "se_power",
    "bound_kind",
    "bound_value",
    "bound_se",
    "trials",
    "seed",
];

pub const DUMP_HEADER: [&str; 20] = [
    "axis_value",
    "attack",
    "defense",
    "n",
    "d",
    "n0",
    "q",
    "seed",
    "trial_index",
    "fdp",
    "power_prop",
    "r_tilde",
    "v",
    "v_attacked",
    "m",
    "m0",
    "removed",
    "r_tilde_allones",
    "classifier_exact",
    "captured",
];

/// Identifies one grid point of one series.
#[derive(Debug, Clone, PartialEq)]
pub struct PointKey {
    pub axis_value: Option<f64>,
    pub attack: String,
    pub defense: String,
}

fn opt_float(x: Option<f64>) -> String {
    x.map(float).unwrap_or_default()
}

pub struct ResultsWriter<W: Write> {
    inner: csv::Writer<W>,
}

impl<W: Write> ResultsWriter<W> {
    pub fn new(out: W) -> Result<Self> {
        let mut inner = csv::Writer::from_writer(out);
        inner.write_record(RESULTS_HEADER)?;
        Ok(Self { inner })
    }

    /// One row per bound estimate, or a single row with empty bound columns.
    pub fn write(&mut self, key: &PointKey, stats: &AggregateStats, seed: u64) -> Result<()> {
        let lead = [
            opt_float(key.axis_value),
            key.attack.clone(),
            key.defense.clone(),
            float(stats.mean_fdr),
            float(stats.se_fdr),
            float(stats.mean_power),
            float(stats.se_power),
        ];
        let tail = [stats.trials.to_string(), seed.to_string()];
        if stats.bound_estimates.is_empty() {
            let row = lead.iter().cloned().chain([String::new(), String::new(), String::new()]).chain(tail.clone());
            self.inner.write_record(row.collect::<Vec<_>>())?;
        }
        for b in &stats.bound_estimates {
            let bound = [b.kind.name().to_string(), float(b.value), float(b.std_error)];
            let row: Vec<String> = lead.iter().cloned().chain(bound).chain(tail.clone()).collect();
            self.inner.write_record(row)?;
        }
        Ok(())
    }

    pub fn finish(mut self) -> Result<()> {
        self.inner.flush()?;
        Ok(())
    }
}

fn encode_captured(nodes: &[CapturedNode]) -> String {
    nodes.iter().map(|c| format!("{}:{}:{}", c.node_id, c.m0, c.local_rejections)).collect::<Vec<_>>().join(";")
}

fn decode_captured(s: &str) -> Result<Vec<CapturedNode>> {
    if s.is_empty() {
        return Ok(Vec::new());
    }
    s.split(';')
        .map(|part| {
            let fields: Vec<&str> = part.split(':').collect();
            let [node, m0, r] = fields[..] else {
                bail!("captured node `{part}` is not node:m0:local_rejections");
            };
            Ok(CapturedNode { node_id: node.parse()?, m0: m0.parse()?, local_rejections: r.parse()? })
        })
        .collect()
}

pub struct DumpWriter<W: Write> {
    inner: csv::Writer<W>,
}

impl<W: Write> DumpWriter<W> {
    pub fn new(out: W) -> Result<Self> {
        let mut inner = csv::Writer::from_writer(out);
        inner.write_record(DUMP_HEADER)?;
        Ok(Self { inner })
    }

    pub fn write(&mut self, key: &PointKey, cfg: &ExperimentConfig, records: &[TrialRecord]) -> Result<()> {
        for r in records {
            let row = [
                opt_float(key.axis_value),
                key.attack.clone(),
                key.defense.clone(),
                cfg.n.to_string(),
                cfg.d.to_string(),
                cfg.nulls.n0().to_string(),
                float(cfg.q),
                cfg.master_seed.to_string(),
                r.trial_index.to_string(),
                float(r.fdp),
                float(r.power_prop),
                r.r_tilde.to_string(),
                r.v.to_string(),
                r.v_attacked.to_string(),
                r.m.to_string(),
                r.m0.to_string(),
                r.removed.to_string(),
                r.r_tilde_allones.map(|x| x.to_string()).unwrap_or_default(),
                opt_float(r.classifier_exact),
                encode_captured(&r.captured),
            ];
            self.inner.write_record(row)?;
        }
        Ok(())
    }

    pub fn finish(mut self) -> Result<()> {
        self.inner.flush()?;
        Ok(())
    }
}

#[derive(Debug, Deserialize)]
struct DumpRow {
    axis_value: Option<f64>,
    attack: String,
    defense: String,
    n: usize,
    d: usize,
    n0: usize,
    q: f64,
    seed: u64,
    trial_index: usize,
    fdp: f64,
    power_prop: f64,
    r_tilde: usize,
    v: usize,
    v_attacked: usize,
    m: usize,
    m0: usize,
    removed: usize,
    r_tilde_allones: Option<usize>,
    classifier_exact: Option<f64>,
    captured: String,
}

/// Trials of one grid point read back from a dump, with the configuration
/// fields the bound estimators need.
pub struct DumpGroup {
    pub key: PointKey,
    pub cfg: ExperimentConfig,
    pub records: Vec<TrialRecord>,
}

/// Groups dump rows by `(axis_value, attack, defense)` in order of first appearance.
pub fn read_dump<R: Read>(input: R) -> Result<Vec<DumpGroup>> {
    let mut reader = csv::Reader::from_reader(input);
    let mut groups: Vec<DumpGroup> = Vec::new();
    for (i, row) in reader.deserialize::<DumpRow>().enumerate() {
        let row = row.with_context(|| format!("trial dump row {}", i + 1))?;
        let key = PointKey { axis_value: row.axis_value, attack: row.attack.clone(), defense: row.defense.clone() };
        let record = TrialRecord {
            trial_index: row.trial_index,
            fdp: row.fdp,
            power_prop: row.power_prop,
            r_tilde: row.r_tilde,
            v: row.v,
            v_attacked: row.v_attacked,
            m: row.m,
            m0: row.m0,
            removed: row.removed,
            captured: decode_captured(&row.captured).with_context(|| format!("trial dump row {}", i + 1))?,
            r_tilde_allones: row.r_tilde_allones,
            classifier_exact: row.classifier_exact,
        };
        let cfg = ExperimentConfig {
            n: row.n,
            d: row.d,
            nulls: NullSpec::Random { n0: row.n0 },
            q: row.q,
            master_seed: row.seed,
            trials: 1,
            ..Default::default()
        };
        match groups.iter_mut().find(|g| g.key == key) {
            Some(g) => {
                let c = &g.cfg;
                if (c.n, c.d, c.nulls.n0(), c.q, c.master_seed) != (cfg.n, cfg.d, row.n0, cfg.q, cfg.master_seed) {
                    bail!("trial dump row {}: configuration differs from earlier rows of the same point", i + 1);
                }
                g.records.push(record);
            }
            None => groups.push(DumpGroup { key, cfg, records: vec![record] }),
        }
    }
    for g in &mut groups {
        g.cfg.trials = g.records.len();
    }
    Ok(groups)
}

/// Re-aggregates a dump, attaching the requested bounds, in the results schema.
pub fn bounds_from_dump<R: Read, W: Write>(input: R, kinds: &[BoundKind], out: W) -> Result<()> {
    let groups = read_dump(input)?;
    if groups.is_empty() {
        bail!("trial dump has no rows");
    }
    let mut writer = ResultsWriter::new(out)?;
    for mut g in groups {
        g.cfg.bounds = kinds.to_vec();
        let stats = aggregate(&g.cfg, &g.records)?;
        writer.write(&g.key, &stats, g.cfg.master_seed)?;
    }
    writer.finish()
}
