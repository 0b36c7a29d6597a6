//! Append-only JSON Lines result records and their CSV export.

use std::fs::OpenOptions;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harness::{ExperimentSpec, NoiseModel, RunResult};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub decoder: String,
    pub d: usize,
    pub noise_model: String,
    pub p: f64,
    pub q: f64,
    pub p_sig: f64,
    pub p_cs: f64,
    pub p_fs: f64,
    #[serde(rename = "t_R")]
    pub t_r: Option<usize>,
    pub shots: u64,
    pub failures: u64,
    pub estimate: f64,
    pub se: f64,
    pub censored: u64,
    pub seed: u64,
    pub schema_version: u32,
    pub wall_ms: u64,
    /// `1 / estimate` for lifetimes (geometric approximation); empty for rates.
    pub per_step_rate: Option<f64>,
}

impl ResultRecord {
    pub fn from_run(spec: &ExperimentSpec, run: &RunResult) -> Self {
        let n = spec.noise;
        let lifetime = spec.model != NoiseModel::CodeCapacity;
        ResultRecord {
            decoder: spec.decoder.id().into(),
            d: spec.d,
            noise_model: spec.model.id().into(),
            p: n.p,
            q: n.q,
            p_sig: n.p_sig,
            p_cs: n.p_cs,
            p_fs: n.p_fs,
            t_r: run.t_r,
            shots: run.shots,
            failures: run.failures,
            estimate: run.estimate,
            se: run.se,
            censored: run.censored,
            seed: run.seed,
            schema_version: SCHEMA_VERSION,
            wall_ms: run.wall_ms,
            per_step_rate: (lifetime && run.estimate > 0.0).then(|| 1.0 / run.estimate),
        }
    }

    /// Record for a closed-form model evaluated at rate `p`.
    pub fn analytic(model: &str, d: usize, p: f64, estimate: f64) -> Self {
        ResultRecord {
            decoder: "analytic".into(),
            d,
            noise_model: model.into(),
            p,
            q: 0.0,
            p_sig: 0.0,
            p_cs: 0.0,
            p_fs: 0.0,
            t_r: None,
            shots: 0,
            failures: 0,
            estimate,
            se: 0.0,
            censored: 0,
            seed: 0,
            schema_version: SCHEMA_VERSION,
            wall_ms: 0,
            per_step_rate: None,
        }
    }

    pub fn to_json_line(&self) -> Result<String> {
        serde_json::to_string(self).map_err(|e| Error::Io(e.to_string()))
    }
}

pub fn write_jsonl<W: Write>(mut w: W, records: &[ResultRecord]) -> Result<()> {
    for r in records {
        writeln!(w, "{}", r.to_json_line()?)?;
    }
    w.flush()?;
    Ok(())
}

/// Appends records to `path`, creating it if needed; each record is written as one complete line.
pub fn append_jsonl(path: &Path, records: &[ResultRecord]) -> Result<()> {
    let f = OpenOptions::new().create(true).append(true).open(path)?;
    write_jsonl(f, records)
}

pub fn read_jsonl<R: Read>(r: R) -> Result<Vec<ResultRecord>> {
    BufReader::new(r)
        .lines()
        .filter(|l| l.as_ref().map_or(true, |s| !s.trim().is_empty()))
        .map(|l| serde_json::from_str(&l?).map_err(|e| Error::Io(e.to_string())))
        .collect()
}

pub fn write_csv<W: Write>(w: W, records: &[ResultRecord]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    for r in records {
        out.serialize(r).map_err(|e| Error::Io(e.to_string()))?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_csv<R: Read>(r: R) -> Result<Vec<ResultRecord>> {
    csv::Reader::from_reader(r)
        .deserialize()
        .map(|x| x.map_err(|e| Error::Io(e.to_string())))
        .collect()
}
