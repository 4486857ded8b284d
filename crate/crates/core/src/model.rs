//! Model parameters, long-time regimes, spreading thresholds and initial data.
//!
//! Both problems share the competition system
//!
//! ```text
//! u_t = u_xx + u(1 - u - k v)
//! v_t = D v_xx + r v(1 - v - h u),          0 < x < s(t)
//! u = v = 0,  s'(t) = -mu (u_x + rho v_x),  x = s(t)
//! ```
//!
//! and differ only at the fixed end `x = 0`: no-flux for [`ProblemKind::Nfb`],
//! homogeneous Dirichlet for [`ProblemKind::Dfb`].

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Left boundary condition selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ProblemKind {
    /// `u_x = v_x = 0` at `x = 0`.
    #[serde(rename = "NFB", alias = "nfb")]
    Nfb,
    /// `u = v = 0` at `x = 0`.
    #[serde(rename = "DFB", alias = "dfb")]
    Dfb,
}

impl fmt::Display for ProblemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProblemKind::Nfb => f.write_str("NFB"),
            ProblemKind::Dfb => f.write_str("DFB"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelParams {
    /// Competition pressure of `v` on `u`.
    pub k: f64,
    /// Competition pressure of `u` on `v`.
    pub h: f64,
    /// Growth rate of `v`.
    pub r: f64,
    /// Diffusivity of `v`.
    #[serde(rename = "D")]
    pub d: f64,
    /// Front response coefficient.
    pub mu: f64,
    /// Weight of the `v` flux in the front law.
    pub rho: f64,
    /// Initial front position.
    pub s0: f64,
}

impl Default for ModelParams {
    fn default() -> Self {
        Self {
            k: 0.5,
            h: 0.5,
            r: 1.0,
            d: 1.0,
            mu: 1.0,
            rho: 1.0,
            s0: 2.0,
        }
    }
}

impl ModelParams {
    fn named(&self) -> [(&'static str, f64); 7] {
        [
            ("k", self.k),
            ("h", self.h),
            ("r", self.r),
            ("D", self.d),
            ("mu", self.mu),
            ("rho", self.rho),
            ("s0", self.s0),
        ]
    }

    /// All seven constants finite and strictly positive.
    pub fn validate(&self) -> Result<()> {
        for (name, value) in self.named() {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::Config(format!(
                    "{name} must be positive and finite, got {value}"
                )));
            }
        }
        Ok(())
    }

    /// Weaker check used by the numerical kernels: the degenerate values
    /// `k = h = mu = rho = 0` are allowed (decoupled or fixed-domain runs).
    pub fn validate_numerics(&self) -> Result<()> {
        for (name, value) in self.named() {
            let ok = match name {
                "k" | "h" | "mu" | "rho" => value.is_finite() && value >= 0.0,
                _ => value.is_finite() && value > 0.0,
            };
            if !ok {
                return Err(Error::Config(format!("{name} out of range: {value}")));
            }
        }
        Ok(())
    }

    pub fn with_mu(mut self, mu: f64) -> Self {
        self.mu = mu;
        self
    }

    pub fn with_s0(mut self, s0: f64) -> Self {
        self.s0 = s0;
        self
    }
}

/// Threshold length `Lambda`: a front that ever exceeds it spreads to infinity.
pub fn lambda_threshold(params: &ModelParams, kind: ProblemKind) -> f64 {
    let m = 1.0_f64.min((params.d / params.r).sqrt());
    match kind {
        ProblemKind::Nfb => 0.5 * PI * m,
        ProblemKind::Dfb => PI * m,
    }
}

/// Long-time regime of a spreading solution, by the competition coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    /// `0 < h < 1` and `0 < k < 1`.
    WeakCompetition,
    /// `0 < k < 1 <= h`.
    UWins,
    /// `0 < h < 1 <= k`.
    VWins,
    /// `h >= 1` and `k >= 1`: no limit is known.
    Uncovered,
}

pub fn classify_regime(params: &ModelParams) -> Regime {
    match (params.h < 1.0, params.k < 1.0) {
        (true, true) => Regime::WeakCompetition,
        (false, true) => Regime::UWins,
        (true, false) => Regime::VWins,
        (false, false) => Regime::Uncovered,
    }
}

/// Locally uniform limit `(u, v)` of a spreading solution.
pub fn coexistence_limit(params: &ModelParams) -> Result<(f64, f64)> {
    let (k, h) = (params.k, params.h);
    match classify_regime(params) {
        Regime::WeakCompetition => {
            let den = 1.0 - h * k;
            Ok(((1.0 - k) / den, (1.0 - h) / den))
        }
        Regime::UWins => Ok((1.0, 0.0)),
        Regime::VWins => Ok((0.0, 1.0)),
        Regime::Uncovered => Err(Error::NoProvenLimit { h, k }),
    }
}

/// Shape of the initial profiles on `[0, s0]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "preset", rename_all = "snake_case")]
pub enum InitialShape {
    /// `a cos(pi x / (2 s0))`: zero slope at 0, zero at `s0`.
    CosineBump { amp_u: f64, amp_v: f64 },
    /// `a sin(pi x / s0)`: zero at both ends.
    SineBump { amp_u: f64, amp_v: f64 },
    /// Tabulated samples, linearly interpolated. `x` must run from 0 to `s0`.
    Table { x: Vec<f64>, u: Vec<f64>, v: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InitialData {
    pub s0: f64,
    pub shape: InitialShape,
}

pub const DEFAULT_AMPLITUDE: f64 = 0.5;

impl InitialData {
    /// Compatible smooth preset for `kind` with equal amplitudes.
    pub fn preset(kind: ProblemKind, s0: f64, amplitude: f64) -> Self {
        Self::preset_pair(kind, s0, amplitude, amplitude)
    }

    pub fn preset_pair(kind: ProblemKind, s0: f64, amp_u: f64, amp_v: f64) -> Self {
        let shape = match kind {
            ProblemKind::Nfb => InitialShape::CosineBump { amp_u, amp_v },
            ProblemKind::Dfb => InitialShape::SineBump { amp_u, amp_v },
        };
        Self { s0, shape }
    }

    pub fn table(x: Vec<f64>, u: Vec<f64>, v: Vec<f64>) -> Result<Self> {
        if x.len() < 3 || x.len() != u.len() || x.len() != v.len() {
            return Err(Error::Config("initial table needs >= 3 rows of equal length".into()));
        }
        if x[0] != 0.0 || x.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Config("initial table x must start at 0 and increase".into()));
        }
        let s0 = *x.last().unwrap();
        Ok(Self {
            s0,
            shape: InitialShape::Table { x, u, v },
        })
    }

    /// Profile values at `x`; zero outside `[0, s0]`.
    pub fn sample(&self, x: f64) -> (f64, f64) {
        if !(0.0..=self.s0).contains(&x) {
            return (0.0, 0.0);
        }
        match &self.shape {
            InitialShape::CosineBump { amp_u, amp_v } => {
                if x == self.s0 {
                    return (0.0, 0.0);
                }
                let c = (0.5 * PI * x / self.s0).cos();
                (amp_u * c, amp_v * c)
            }
            InitialShape::SineBump { amp_u, amp_v } => {
                if x == 0.0 || x == self.s0 {
                    return (0.0, 0.0);
                }
                let s = (PI * x / self.s0).sin();
                (amp_u * s, amp_v * s)
            }
            InitialShape::Table { x: xs, u, v } => {
                let j = match xs.binary_search_by(|p| p.partial_cmp(&x).unwrap()) {
                    Ok(j) => return (u[j], v[j]),
                    Err(j) => j,
                };
                let w = (x - xs[j - 1]) / (xs[j] - xs[j - 1]);
                (u[j - 1] + w * (u[j] - u[j - 1]), v[j - 1] + w * (v[j] - v[j - 1]))
            }
        }
    }

    /// `(sup u0, sup v0)`.
    pub fn sup(&self) -> (f64, f64) {
        match &self.shape {
            InitialShape::CosineBump { amp_u, amp_v } | InitialShape::SineBump { amp_u, amp_v } => {
                (amp_u.max(0.0), amp_v.max(0.0))
            }
            InitialShape::Table { u, v, .. } => (
                u.iter().copied().fold(0.0, f64::max),
                v.iter().copied().fold(0.0, f64::max),
            ),
        }
    }

    fn endpoint_values(&self) -> [(f64, f64); 2] {
        [self.sample(0.0), self.sample(self.s0)]
    }

    /// Conditions the numerical solver relies on: finite, nonnegative,
    /// zero at the front, and zero at the origin for DFB.
    pub fn check_compatible(&self, kind: ProblemKind) -> Result<()> {
        if !(self.s0.is_finite() && self.s0 > 0.0) {
            return Err(Error::Config(format!("initial s0 must be positive, got {}", self.s0)));
        }
        match &self.shape {
            InitialShape::CosineBump { amp_u, amp_v } | InitialShape::SineBump { amp_u, amp_v } => {
                if !(amp_u.is_finite() && amp_v.is_finite() && *amp_u >= 0.0 && *amp_v >= 0.0) {
                    return Err(Error::Config("preset amplitudes must be nonnegative".into()));
                }
            }
            InitialShape::Table { u, v, .. } => {
                if u.iter().chain(v).any(|y| !y.is_finite() || *y < 0.0) {
                    return Err(Error::Config(
                        "initial table values must be finite and nonnegative".into(),
                    ));
                }
            }
        }
        let [origin, front] = self.endpoint_values();
        if front != (0.0, 0.0) {
            return Err(Error::Config("initial data must vanish at x = s0".into()));
        }
        if kind == ProblemKind::Dfb && origin != (0.0, 0.0) {
            return Err(Error::Config("DFB initial data must vanish at x = 0".into()));
        }
        Ok(())
    }

    /// Full compatibility: [`Self::check_compatible`] plus strict positivity
    /// inside `(0, s0)` and, for NFB, zero slope at the origin.
    pub fn validate(&self, kind: ProblemKind) -> Result<()> {
        self.check_compatible(kind)?;
        let shape_name = match (&self.shape, kind) {
            (InitialShape::SineBump { .. }, ProblemKind::Nfb) => Some("sine_bump"),
            (InitialShape::CosineBump { .. }, ProblemKind::Dfb) => Some("cosine_bump"),
            _ => None,
        };
        if let Some(name) = shape_name {
            return Err(Error::Config(format!("{name} preset is incompatible with {kind}")));
        }
        match &self.shape {
            InitialShape::CosineBump { amp_u, amp_v } | InitialShape::SineBump { amp_u, amp_v } => {
                if *amp_u <= 0.0 || *amp_v <= 0.0 {
                    return Err(Error::Config("initial data must be positive inside (0, s0)".into()));
                }
            }
            InitialShape::Table { x, u, v } => {
                let n = x.len();
                if u[1..n - 1].iter().chain(&v[1..n - 1]).any(|y| *y <= 0.0) {
                    return Err(Error::Config("initial data must be positive inside (0, s0)".into()));
                }
                if kind == ProblemKind::Nfb {
                    let (h1, h2) = (x[1] - x[0], x[2] - x[0]);
                    let scale = self.sup().0.max(self.sup().1).max(1.0) / self.s0;
                    for y in [u, v] {
                        // three-point one-sided slope on a possibly uneven grid
                        let slope =
                            -(h1 + h2) / (h1 * h2) * y[0] + h2 / (h1 * (h2 - h1)) * y[1] - h1 / (h2 * (h2 - h1)) * y[2];
                        if slope.abs() > 1e-3 * scale {
                            return Err(Error::Config(format!(
                                "NFB initial data must have zero slope at x = 0 (got {slope:e})"
                            )));
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

/// Recipe for initial data that can be re-targeted to any `s0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "preset", rename_all = "snake_case")]
pub enum InitSpec {
    /// Cosine bump for NFB, sine bump for DFB.
    Auto {
        #[serde(default = "default_amplitude")]
        amplitude: f64,
        /// Separate amplitude for `v`; defaults to `amplitude`.
        #[serde(default)]
        amplitude_v: Option<f64>,
    },
    /// Fixed data, usable only with its own `s0`.
    Data(InitialData),
}

fn default_amplitude() -> f64 {
    DEFAULT_AMPLITUDE
}

impl Default for InitSpec {
    fn default() -> Self {
        InitSpec::Auto {
            amplitude: DEFAULT_AMPLITUDE,
            amplitude_v: None,
        }
    }
}

impl InitSpec {
    pub fn build(&self, kind: ProblemKind, s0: f64) -> Result<InitialData> {
        match self {
            InitSpec::Auto { amplitude, amplitude_v } => Ok(InitialData::preset_pair(
                kind,
                s0,
                *amplitude,
                amplitude_v.unwrap_or(*amplitude),
            )),
            InitSpec::Data(data) => {
                if (data.s0 - s0).abs() > 1e-12 * s0 {
                    return Err(Error::Config(format!(
                        "initial data spans [0, {}] but s0 = {s0}",
                        data.s0
                    )));
                }
                Ok(data.clone())
            }
        }
    }
}

/// Monitored ceiling `M = max{1, sup u0, sup v0}` for the profiles; the front
/// speed obeys `0 < s' <= mu M (1 + rho)`.
pub fn a_priori_bound(init: &InitialData) -> f64 {
    let (su, sv) = init.sup();
    1.0_f64.max(su).max(sv)
}
