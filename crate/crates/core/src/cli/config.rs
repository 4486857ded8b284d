//! JSON run configuration: defaults, file merge, environment overrides and
//! up-front validation.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

use crate::barriers::SearchSpec;
use crate::classifier::{ThresholdSearch, Tolerances};
use crate::error::{Error, Result};
use crate::model::{InitialData, ModelParams, ProblemKind};
use crate::solver::GridSpec;
use crate::steady::HalfLineGrid;

/// Prefix of environment overrides; `LVFB_PARAMS__MU=0.3` sets `params.mu`.
pub const ENV_PREFIX: &str = "LVFB_";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSection {
    pub kind: ProblemKind,
}

/// Initial data: a preset bump or a CSV table with header `x,u,v`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "preset", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitSection {
    Auto { amplitude: f64, amplitude_v: Option<f64> },
    Table { path: PathBuf },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub dir: PathBuf,
    pub plots: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThresholdSection {
    pub mu_lo: f64,
    pub mu_hi: f64,
    pub rel_tol: f64,
    pub max_retries: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SandwichSection {
    pub enabled: bool,
    pub window: (f64, f64),
    pub slack: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SteadySection {
    pub grid: HalfLineGrid,
    pub sandwich: SandwichSection,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OdeSection {
    pub u0: f64,
    pub v0: f64,
    pub t_max: f64,
    /// Terms of the bound iteration, written when `0 < h < 1 <= k`.
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub mus: Vec<f64>,
    pub s0s: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub problem: ProblemSection,
    pub params: ModelParams,
    pub init: InitSection,
    pub grid: GridSpec,
    pub classify: Tolerances,
    pub output: OutputSection,
    pub threshold: ThresholdSection,
    pub steady: SteadySection,
    pub ode: OdeSection,
    pub barrier: SearchSpec,
    pub sweep: SweepSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        let search = ThresholdSearch::default();
        Self {
            problem: ProblemSection { kind: ProblemKind::Nfb },
            params: ModelParams::default(),
            init: InitSection::Auto {
                amplitude: crate::model::DEFAULT_AMPLITUDE,
                amplitude_v: None,
            },
            grid: GridSpec::default(),
            classify: Tolerances::default(),
            output: OutputSection {
                dir: PathBuf::from("lvfb-out"),
                plots: true,
            },
            threshold: ThresholdSection {
                mu_lo: search.bracket.0,
                mu_hi: search.bracket.1,
                rel_tol: search.rel_tol,
                max_retries: search.max_retries,
            },
            steady: SteadySection {
                grid: HalfLineGrid::default(),
                sandwich: SandwichSection {
                    enabled: false,
                    window: (0.0, 5.0),
                    slack: 0.02,
                },
            },
            ode: OdeSection {
                u0: 0.1,
                v0: 0.1,
                t_max: 100.0,
                iterations: 20,
            },
            barrier: SearchSpec::default(),
            sweep: SweepSection {
                mus: vec![0.01, 0.1, 1.0],
                s0s: vec![0.5, 1.0, 2.0],
            },
        }
    }
}

/// Recursively overlays `patch` on `base`. Objects carrying a different
/// `preset` tag replace the base object instead of merging into it.
pub fn merge(base: &mut Value, patch: Value) {
    match (base, patch) {
        (Value::Object(b), Value::Object(p)) => {
            let retagged = matches!((b.get("preset"), p.get("preset")), (Some(x), Some(y)) if x != y);
            if retagged {
                *b = p;
                return;
            }
            for (key, value) in p {
                match b.get_mut(&key) {
                    Some(slot) => merge(slot, value),
                    None => {
                        b.insert(key, value);
                    }
                }
            }
        }
        (slot, p) => *slot = p,
    }
}

/// Applies `PREFIX` + `SECTION__KEY` variables. Segments match existing keys
/// case-insensitively; values parse as JSON and fall back to strings.
pub fn apply_env(config: &mut Value, vars: impl IntoIterator<Item = (String, String)>) -> Result<()> {
    let mut vars: Vec<_> = vars.into_iter().filter(|(k, _)| k.starts_with(ENV_PREFIX)).collect();
    vars.sort();
    for (name, raw) in vars {
        let path: Vec<&str> = name[ENV_PREFIX.len()..].split("__").collect();
        if path.iter().any(|s| s.is_empty()) {
            return Err(Error::Config(format!("malformed override {name}")));
        }
        let value = serde_json::from_str(&raw).unwrap_or(Value::String(raw));
        let mut node = &mut *config;
        for (depth, segment) in path.iter().enumerate() {
            let obj = node
                .as_object_mut()
                .ok_or_else(|| Error::Config(format!("{name}: not an object path")))?;
            let key = find_key(obj, segment).ok_or_else(|| Error::Config(format!("{name}: unknown key {segment}")))?;
            if depth + 1 == path.len() {
                obj.insert(key, value);
                break;
            }
            node = obj.get_mut(&key).unwrap();
        }
    }
    Ok(())
}

fn find_key(obj: &Map<String, Value>, segment: &str) -> Option<String> {
    obj.keys().find(|k| k.eq_ignore_ascii_case(segment)).cloned()
}

impl RunConfig {
    /// Defaults, overlaid by the file at `path` (if any), then by `vars`.
    pub fn load(path: Option<&Path>, vars: impl IntoIterator<Item = (String, String)>) -> Result<Self> {
        let mut value = serde_json::to_value(Self::default())?;
        if let Some(path) = path {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
            let patch: Value =
                serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
            if !patch.is_object() {
                return Err(Error::Config(format!("{}: expected a JSON object", path.display())));
            }
            merge(&mut value, patch);
        }
        apply_env(&mut value, vars)?;
        serde_json::from_value(value).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn kind(&self) -> ProblemKind {
        self.problem.kind
    }

    pub fn initial_data(&self, s0: f64) -> Result<InitialData> {
        match &self.init {
            InitSection::Auto { amplitude, amplitude_v } => {
                if !(*amplitude > 0.0 && amplitude_v.unwrap_or(*amplitude) > 0.0) {
                    return Err(Error::Config("initial amplitudes must be positive".into()));
                }
                Ok(InitialData::preset_pair(
                    self.kind(),
                    s0,
                    *amplitude,
                    amplitude_v.unwrap_or(*amplitude),
                ))
            }
            InitSection::Table { path } => {
                let data = read_table(path)?;
                if (data.s0 - s0).abs() > 1e-12 * s0 {
                    return Err(Error::Config(format!("table spans [0, {}] but s0 = {s0}", data.s0)));
                }
                Ok(data)
            }
        }
    }

    pub fn search(&self) -> ThresholdSearch {
        ThresholdSearch {
            bracket: (self.threshold.mu_lo, self.threshold.mu_hi),
            rel_tol: self.threshold.rel_tol,
            max_retries: self.threshold.max_retries,
            tolerances: self.classify,
        }
    }

    /// Checks everything a single simulation at `params` needs.
    pub fn validate_run(&self, params: &ModelParams) -> Result<InitialData> {
        params.validate().map_err(as_config)?;
        self.grid.validate().map_err(as_config)?;
        self.classify.validate().map_err(as_config)?;
        if params.s0 < 10.0 * self.grid.dxi() {
            return Err(Error::Config(format!(
                "s0 = {} below 10 grid spacings ({})",
                params.s0,
                10.0 * self.grid.dxi()
            )));
        }
        let init = self.initial_data(params.s0)?;
        init.validate(self.kind()).map_err(as_config)?;
        Ok(init)
    }

    pub fn validate_threshold(&self) -> Result<InitialData> {
        let t = &self.threshold;
        if !(t.mu_lo > 0.0 && t.mu_hi > t.mu_lo && t.mu_hi.is_finite() && t.rel_tol > 0.0) {
            return Err(Error::Config(format!(
                "invalid threshold bracket [{}, {}] / rel_tol {}",
                t.mu_lo, t.mu_hi, t.rel_tol
            )));
        }
        self.validate_run(&self.params)
    }

    pub fn validate_steady(&self) -> Result<()> {
        self.params.validate().map_err(as_config)?;
        if crate::model::classify_regime(&self.params) != crate::model::Regime::WeakCompetition {
            return Err(Error::Config("steady barriers need 0 < h, k < 1".into()));
        }
        self.steady.grid.validate().map_err(as_config)?;
        let sw = &self.steady.sandwich;
        if sw.enabled {
            if self.kind() != ProblemKind::Dfb {
                return Err(Error::Config("sandwich check needs problem.kind = DFB".into()));
            }
            if !(sw.slack >= 0.0 && 0.0 <= sw.window.0 && sw.window.0 <= sw.window.1) {
                return Err(Error::Config(format!(
                    "invalid sandwich window {:?} / slack {}",
                    sw.window, sw.slack
                )));
            }
            if sw.window.1 > self.steady.grid.length {
                return Err(Error::Config("sandwich window exceeds steady grid length".into()));
            }
            self.validate_run(&self.params)?;
        }
        Ok(())
    }

    pub fn validate_ode(&self) -> Result<()> {
        self.params.validate_numerics().map_err(as_config)?;
        let o = &self.ode;
        if !(o.u0 > 0.0 && o.v0 > 0.0 && o.t_max >= 0.0 && o.t_max.is_finite()) {
            return Err(Error::Config(format!("invalid ode section {o:?}")));
        }
        Ok(())
    }

    pub fn validate_barrier(&self) -> Result<InitialData> {
        let b = &self.barrier;
        let lattice = [&b.deltas, &b.gammas, &b.amplitude_factors];
        if lattice
            .iter()
            .any(|l| l.is_empty() || l.iter().any(|x| !(*x > 0.0 && x.is_finite())))
        {
            return Err(Error::Config(
                "barrier lattice values must be positive and non-empty".into(),
            ));
        }
        if b.amplitude_factors.iter().any(|&f| f < 1.0) {
            return Err(Error::Config("barrier amplitude factors must be >= 1".into()));
        }
        if !(b.sample.t_check > 0.0 && b.sample.nt >= 2 && b.sample.nx >= 2) {
            return Err(Error::Config(format!("invalid barrier sample grid {:?}", b.sample)));
        }
        if self.kind() != ProblemKind::Dfb {
            return Err(Error::Config("barrier search needs problem.kind = DFB".into()));
        }
        self.params.validate().map_err(as_config)?;
        let init = self.initial_data(self.params.s0)?;
        init.validate(self.kind()).map_err(as_config)?;
        Ok(init)
    }

    pub fn validate_sweep(&self) -> Result<()> {
        let s = &self.sweep;
        if s.mus.is_empty() || s.s0s.is_empty() {
            return Err(Error::Config("sweep needs non-empty mus and s0s".into()));
        }
        if let InitSection::Table { .. } = self.init {
            return Err(Error::Config("sweep varies s0 and needs a preset initial shape".into()));
        }
        for &mu in &s.mus {
            for &s0 in &s.s0s {
                self.validate_run(&self.params.with_mu(mu).with_s0(s0))?;
            }
        }
        Ok(())
    }

    /// Hash of everything that determines a trajectory, excluding the
    /// horizon, the output location and the search tolerance, so that runs
    /// may be extended by resuming.
    pub fn physics_hash(&self) -> Result<String> {
        let mut grid = serde_json::to_value(self.grid)?;
        grid.as_object_mut().unwrap().remove("t_max");
        let init = match &self.init {
            InitSection::Table { path } => {
                let data = read_table(path)?;
                serde_json::to_value(data)?
            }
            auto => serde_json::to_value(auto)?,
        };
        let threshold = serde_json::json!({
            "mu_lo": self.threshold.mu_lo,
            "mu_hi": self.threshold.mu_hi,
            "max_retries": self.threshold.max_retries,
        });
        let payload = serde_json::json!({
            "problem": self.problem,
            "params": self.params,
            "init": init,
            "grid": grid,
            "classify": self.classify,
            "threshold": threshold,
        });
        Ok(hex::encode(Sha256::digest(serde_json::to_vec(&payload)?)))
    }
}

fn as_config(e: Error) -> Error {
    match e {
        Error::Config(_) => e,
        other => Error::Config(other.to_string()),
    }
}

/// Reads an initial-data table with header `x,u,v`.
pub fn read_table(path: &Path) -> Result<InitialData> {
    let mut r = csv::Reader::from_path(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    if r.headers()?.iter().collect::<Vec<_>>() != ["x", "u", "v"] {
        return Err(Error::Config(format!("{}: expected header x,u,v", path.display())));
    }
    let (mut x, mut u, mut v) = (Vec::new(), Vec::new(), Vec::new());
    for row in r.deserialize() {
        let (xi, ui, vi): (f64, f64, f64) = row.map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        x.push(xi);
        u.push(ui);
        v.push(vi);
    }
    InitialData::table(x, u, v).map_err(as_config)
}
