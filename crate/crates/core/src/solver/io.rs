//! On-disk layout of a run directory:
//!
//! - `series.csv` with header `t,s,s_prime,sup_u,sup_v`
//! - `profile_<index>.csv` with header `x,u,v` (physical `x = s xi`)
//! - `metadata.json` with the inputs, snapshot times and the code version

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{CeilingMonitor, GridSpec, RunRecord, Sample, Snapshot};
use crate::error::{Error, Result};
use crate::model::{ModelParams, ProblemKind};

pub const SERIES_FILE: &str = "series.csv";
pub const METADATA_FILE: &str = "metadata.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetadata {
    pub version: String,
    pub params: ModelParams,
    pub kind: ProblemKind,
    pub grid: GridSpec,
    /// `(t, s)` of each `profile_<index>.csv`.
    pub snapshots: Vec<(f64, f64)>,
    pub monitor: CeilingMonitor,
    pub failure: Option<String>,
    pub stopped_early: bool,
}

impl RunMetadata {
    pub fn of(record: &RunRecord) -> Self {
        Self {
            version: env!("CARGO_PKG_VERSION").to_string(),
            params: record.params,
            kind: record.kind,
            grid: record.grid,
            snapshots: record.snapshots.iter().map(|s| (s.t, s.s)).collect(),
            monitor: record.monitor,
            failure: record.failure.clone(),
            stopped_early: record.stopped_early,
        }
    }
}

pub fn write_series_csv(series: &[Sample], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["t", "s", "s_prime", "sup_u", "sup_v"])?;
    for p in series {
        w.write_record([p.t, p.s, p.s_prime, p.sup_u, p.sup_v].map(|x| x.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_series_csv(path: &Path) -> Result<Vec<Sample>> {
    let mut r = csv::Reader::from_path(path)?;
    let headers = r.headers()?.clone();
    if headers.iter().collect::<Vec<_>>() != ["t", "s", "s_prime", "sup_u", "sup_v"] {
        return Err(Error::Config(format!("{}: unexpected series header", path.display())));
    }
    let mut out = Vec::new();
    for row in r.deserialize() {
        let (t, s, s_prime, sup_u, sup_v): (f64, f64, f64, f64, f64) = row?;
        out.push(Sample {
            t,
            s,
            s_prime,
            sup_u,
            sup_v,
        });
    }
    Ok(out)
}

pub fn write_snapshots(snapshots: &[Snapshot], dir: &Path) -> Result<()> {
    for (index, snap) in snapshots.iter().enumerate() {
        let mut w = csv::Writer::from_path(dir.join(format!("profile_{index}.csv")))?;
        w.write_record(["x", "u", "v"])?;
        for ((x, u), v) in snap.xs().iter().zip(&snap.u).zip(&snap.v) {
            w.write_record([x, u, v].map(|x| x.to_string()))?;
        }
        w.flush()?;
    }
    Ok(())
}

pub fn write_metadata(record: &RunRecord, path: &Path) -> Result<()> {
    fs::write(path, serde_json::to_string_pretty(&RunMetadata::of(record))?)?;
    Ok(())
}

/// Writes series, snapshots and metadata into `dir`, creating it if needed.
pub fn write_run_dir(record: &RunRecord, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    write_series_csv(&record.series, &dir.join(SERIES_FILE))?;
    write_snapshots(&record.snapshots, dir)?;
    write_metadata(record, &dir.join(METADATA_FILE))
}

/// Loads a run directory written by [`write_run_dir`].
pub fn read_run_dir(dir: &Path) -> Result<RunRecord> {
    let meta: RunMetadata = serde_json::from_str(&fs::read_to_string(dir.join(METADATA_FILE))?)?;
    let series = read_series_csv(&dir.join(SERIES_FILE))?;
    let mut snapshots = Vec::with_capacity(meta.snapshots.len());
    for (index, &(t, s)) in meta.snapshots.iter().enumerate() {
        let mut r = csv::Reader::from_path(dir.join(format!("profile_{index}.csv")))?;
        let (mut u, mut v) = (Vec::new(), Vec::new());
        for row in r.deserialize() {
            let (_x, ui, vi): (f64, f64, f64) = row?;
            u.push(ui);
            v.push(vi);
        }
        snapshots.push(Snapshot { t, s, u, v });
    }
    if series.is_empty() {
        return Err(Error::Config(format!("{}: empty series", dir.display())));
    }
    Ok(RunRecord {
        params: meta.params,
        kind: meta.kind,
        grid: meta.grid,
        series,
        snapshots,
        monitor: meta.monitor,
        failure: meta.failure,
        stopped_early: meta.stopped_early,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::InitialData;
    use crate::solver::simulate;

    #[test]
    fn run_dir_round_trip() {
        let params = ModelParams::default();
        let init = InitialData::preset(ProblemKind::Nfb, 2.0, 0.5);
        let grid = GridSpec {
            n_cells: 32,
            dt: 1e-2,
            t_max: 0.5,
            snapshot_stride: 10,
            series_stride: 1,
        };
        let rec = simulate(&params, ProblemKind::Nfb, &init, &grid).unwrap();
        let dir = tempfile::tempdir().unwrap();
        write_run_dir(&rec, dir.path()).unwrap();
        let back = read_run_dir(dir.path()).unwrap();
        assert_eq!(back, rec);
        let text = fs::read_to_string(dir.path().join("profile_0.csv")).unwrap();
        assert!(text.starts_with("x,u,v\n0,0.5,0.5\n"));
    }

    #[test]
    fn rejects_foreign_header() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.csv");
        fs::write(&path, "a,b\n1,2\n").unwrap();
        assert!(read_series_csv(&path).is_err());
    }
}
