//! Parameter sweeps over a grid of initial metrics.
//!
//! Points run in parallel; every output is keyed by grid index, so files and
//! the summary do not depend on scheduling.

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use xcf_core::MilnorMetric;

use crate::analysis::{simulate, SimulateReport};
use crate::config::RunConfig;
use crate::error::{LabError, Result};
use crate::output::{write_json, write_run};

pub const SUMMARY_FILE: &str = "summary.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub index: usize,
    pub init: [f64; 3],
    pub dir: String,
    pub termination: Option<String>,
    pub t_final: Option<f64>,
    pub t_hat: Option<f64>,
    pub regime: Option<String>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub geometry: String,
    pub sign: String,
    pub points: Vec<SweepPoint>,
}

pub fn point_dir(index: usize) -> String {
    format!("point_{index:05}")
}

fn summarize(index: usize, init: [f64; 3], result: &Result<SimulateReport>) -> SweepPoint {
    let mut p = SweepPoint {
        index,
        init,
        dir: point_dir(index),
        termination: None,
        t_final: None,
        t_hat: None,
        regime: None,
        error: None,
    };
    match result {
        Ok(r) => {
            p.termination = Some(r.termination.clone());
            p.t_final = Some(r.final_state.t);
            p.t_hat = r.blowup.as_ref().map(|b| b.t_hat);
            p.regime = r.regime.as_ref().map(|g| g.regime.clone());
        }
        Err(e) => p.error = Some(e.to_string()),
    }
    p
}

fn run_point(cfg: &RunConfig, out: &Path, index: usize, init: [f64; 3]) -> Result<SimulateReport> {
    let run = simulate(cfg, MilnorMetric::from_array(init)?)?;
    write_run(&out.join(point_dir(index)), &run.trajectory, &run.report)?;
    Ok(run.report)
}

/// Run every grid point, writing `point_NNNNN/` directories and `summary.json`
/// under the output directory. A failing point is recorded, not fatal.
pub fn sweep(cfg: &RunConfig) -> Result<SweepSummary> {
    let grid = cfg.grid.as_ref().ok_or_else(|| LabError::Config("sweep needs --grid".into()))?;
    let out = cfg.out.as_deref().ok_or_else(|| LabError::Config("sweep needs --out".into()))?;
    let points = grid.points(cfg.init.map(|m| m.to_array()))?;
    std::fs::create_dir_all(out).map_err(crate::error::io_err(out))?;

    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(j) = cfg.jobs {
        builder = builder.num_threads(j);
    }
    let pool = builder.build().map_err(|e| LabError::Failed(format!("thread pool: {e}")))?;
    let results: Vec<SweepPoint> = pool.install(|| {
        points.par_iter().enumerate().map(|(i, init)| summarize(i, *init, &run_point(cfg, out, i, *init))).collect()
    });
    let summary = SweepSummary { geometry: cfg.geometry.name().into(), sign: cfg.sign.to_string(), points: results };
    write_json(&out.join(SUMMARY_FILE), &summary)?;
    Ok(summary)
}
