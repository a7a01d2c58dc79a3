//! Command-line layer for the byzfdr simulator: presets, configuration
//! files, CSV output and the node-report wire format.

pub mod config;
pub mod fmt;
pub mod output;
pub mod presets;
pub mod wire;

use std::io::Write;

use anyhow::Result;
use byzfdr_core::sim::{aggregate, run_trials};

use crate::output::{DumpWriter, PointKey, ResultsWriter};
use crate::presets::Plan;

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "BYZFDR_THREADS";

/// Runs every point of `plan`, writing results and optionally a trial dump.
pub fn simulate<W: Write, D: Write>(plan: &Plan, out: W, dump: Option<D>) -> Result<()> {
    let mut results = ResultsWriter::new(out)?;
    let mut dump = dump.map(DumpWriter::new).transpose()?;
    for (series, value, index) in plan.points() {
        let cfg = plan.config(series, value, index)?;
        let records = run_trials(&cfg)?;
        let key = PointKey {
            axis_value: value,
            attack: series.attack.name().to_string(),
            defense: series.defense.name().to_string(),
        };
        results.write(&key, &aggregate(&cfg, &records)?, cfg.master_seed)?;
        if let Some(d) = dump.as_mut() {
            d.write(&key, &cfg, &records)?;
        }
    }
    results.finish()?;
    if let Some(d) = dump {
        d.finish()?;
    }
    Ok(())
}
