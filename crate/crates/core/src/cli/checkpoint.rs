use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::classifier::ThresholdBracket;
use crate::error::{Error, Result};
use crate::solver::{RunRecord, SimState};

pub const CHECKPOINT_VERSION: u32 = 1;
pub const RUN_CHECKPOINT_FILE: &str = "checkpoint.json";
pub const THRESHOLD_CHECKPOINT_FILE: &str = "threshold_checkpoint.json";

/// Solver state at the end of a run plus the record accumulated so far.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub version: u32,
    pub config_hash: String,
    pub state: SimState,
    pub record: RunRecord,
}

impl Checkpoint {
    pub fn new(config_hash: String, state: SimState, record: RunRecord) -> Self {
        Self {
            version: CHECKPOINT_VERSION,
            config_hash,
            state,
            record,
        }
    }

    /// The record as an uninterrupted run would hold it at this step: the
    /// closing sample and snapshot are dropped unless they fall on a stride.
    pub fn resumable_record(&self) -> RunRecord {
        let mut record = self.record.clone();
        let step = self.state.step;
        if !step.is_multiple_of(record.grid.series_stride) && record.series.len() > 1 {
            record.series.pop();
        }
        if !step.is_multiple_of(record.grid.snapshot_stride) && record.snapshots.len() > 1 {
            record.snapshots.pop();
        }
        record.stopped_early = false;
        record
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdCheckpoint {
    pub version: u32,
    pub config_hash: String,
    pub bracket: ThresholdBracket,
}

pub fn save<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    // write-then-rename so an interrupted write never leaves a torn file
    let tmp = path.with_extension("json.tmp");
    fs::write(&tmp, serde_json::to_vec_pretty(value)?)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

trait Versioned {
    fn version(&self) -> u32;
    fn hash(&self) -> &str;
}

impl Versioned for Checkpoint {
    fn version(&self) -> u32 {
        self.version
    }
    fn hash(&self) -> &str {
        &self.config_hash
    }
}

impl Versioned for ThresholdCheckpoint {
    fn version(&self) -> u32 {
        self.version
    }
    fn hash(&self) -> &str {
        &self.config_hash
    }
}

fn load<T: DeserializeOwned + Versioned>(path: &Path, expected_hash: &str) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    let value: T = serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    if value.version() != CHECKPOINT_VERSION {
        return Err(Error::Config(format!(
            "checkpoint version {} (expected {CHECKPOINT_VERSION})",
            value.version()
        )));
    }
    if value.hash() != expected_hash {
        return Err(Error::Config(
            "checkpoint was written for a different configuration".into(),
        ));
    }
    Ok(value)
}

pub fn load_run(path: &Path, expected_hash: &str) -> Result<Checkpoint> {
    load(path, expected_hash)
}

pub fn load_threshold(path: &Path, expected_hash: &str) -> Result<ThresholdCheckpoint> {
    load(path, expected_hash)
}
