//! Front-fixing finite differences for the free-boundary competition system.
//!
//! With `xi = x / s(t)` the moving habitat `[0, s(t)]` becomes `[0, 1]` and the
//! profiles `U(t, xi) = u(t, s xi)` obey
//!
//! ```text
//! U_t = U_xixi / s^2 + xi (s'/s) U_xi + U (1 - U - k V)
//! V_t = D V_xixi / s^2 + xi (s'/s) V_xi + r V (1 - V - h U)
//! ```
//!
//! One step computes `s'` from the current boundary fluxes, moves the front by
//! forward Euler, applies advection and reaction explicitly with the new `s`,
//! and finishes with one implicit diffusion solve per species.

mod io;

pub use io::{
    read_run_dir, read_series_csv, write_metadata, write_run_dir, write_series_csv, write_snapshots, RunMetadata,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{a_priori_bound, InitialData, ModelParams, ProblemKind};
use crate::tridiag;

/// Negative values at or above this are roundoff and get flushed to zero.
pub const UNDERSHOOT_TOL: f64 = 1e-12;

/// Courant factor for the explicit advection term.
pub const CFL: f64 = 0.5;

/// Relative slack allowed above the a priori ceiling before a run is flagged.
pub const EPS_SCHEME: f64 = 1e-2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub n_cells: usize,
    pub dt: f64,
    pub t_max: f64,
    /// Steps between stored profile snapshots.
    pub snapshot_stride: u64,
    /// Steps between series samples; 1 records every step.
    #[serde(default = "one")]
    pub series_stride: u64,
}

fn one() -> u64 {
    1
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            n_cells: 400,
            dt: 2.5e-4,
            t_max: 50.0,
            snapshot_stride: 40_000,
            series_stride: 1,
        }
    }
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_cells < 16 {
            return Err(Error::Config(format!("n_cells must be >= 16, got {}", self.n_cells)));
        }
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::Config(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.t_max.is_finite() && self.t_max >= 0.0) {
            return Err(Error::Config(format!("t_max must be nonnegative, got {}", self.t_max)));
        }
        if self.snapshot_stride == 0 || self.series_stride == 0 {
            return Err(Error::Config("strides must be positive".into()));
        }
        Ok(())
    }

    pub fn dxi(&self) -> f64 {
        1.0 / self.n_cells as f64
    }

    /// Number of steps needed to reach `t_max`.
    pub fn total_steps(&self) -> u64 {
        let ratio = self.t_max / self.dt;
        let nearest = ratio.round();
        if (ratio - nearest).abs() < 1e-9 * ratio.max(1.0) {
            nearest as u64
        } else {
            ratio.ceil() as u64
        }
    }

    /// Halved `dt` and doubled resolution with the same snapshot times.
    pub fn refined(&self) -> Self {
        Self {
            n_cells: self.n_cells * 2,
            dt: self.dt / 2.0,
            snapshot_stride: self.snapshot_stride * 2,
            series_stride: self.series_stride * 2,
            ..*self
        }
    }
}

/// Solver state on the uniform grid `xi_i = i / n_cells`, `i = 0..=n_cells`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimState {
    pub step: u64,
    pub t: f64,
    pub s: f64,
    pub s_prime: f64,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
}

impl SimState {
    /// Samples `init` on the grid and evaluates the initial front speed.
    pub fn initial(params: &ModelParams, init: &InitialData, n_cells: usize) -> Result<Self> {
        let s = init.s0;
        let (u, v): (Vec<f64>, Vec<f64>) = (0..=n_cells)
            .map(|i| init.sample(s * i as f64 / n_cells as f64))
            .unzip();
        let mut state = Self {
            step: 0,
            t: 0.0,
            s,
            s_prime: 0.0,
            u,
            v,
        };
        state.s_prime = checked_speed(&state, params, 0)?;
        Ok(state)
    }

    pub fn n_cells(&self) -> usize {
        self.u.len() - 1
    }

    pub fn sup_u(&self) -> f64 {
        self.u.iter().copied().fold(0.0, f64::max)
    }

    pub fn sup_v(&self) -> f64 {
        self.v.iter().copied().fold(0.0, f64::max)
    }

    pub fn validate(&self, kind: ProblemKind) -> Result<()> {
        let n = self.u.len();
        if n < 4 || self.v.len() != n {
            return Err(Error::Precondition(
                "state profiles need >= 4 equal-length nodes".into(),
            ));
        }
        if !(self.s.is_finite() && self.s > 0.0) {
            return Err(Error::Precondition(format!(
                "front position must be positive, got {}",
                self.s
            )));
        }
        if self.u.iter().chain(&self.v).any(|y| !y.is_finite() || *y < 0.0) {
            return Err(Error::Precondition("profiles must be finite and nonnegative".into()));
        }
        if self.u[n - 1] != 0.0 || self.v[n - 1] != 0.0 {
            return Err(Error::Precondition("profiles must vanish at the front".into()));
        }
        if kind == ProblemKind::Dfb && (self.u[0] != 0.0 || self.v[0] != 0.0) {
            return Err(Error::Precondition("DFB profiles must vanish at the origin".into()));
        }
        Ok(())
    }

    /// Physical coordinate of node `i`.
    pub fn x(&self, i: usize) -> f64 {
        self.s * i as f64 / self.n_cells() as f64
    }
}

/// `(u_x, v_x)` at the front from the second-order one-sided stencil,
/// using the pinned zero at `xi = 1`.
pub fn boundary_flux(state: &SimState) -> (f64, f64) {
    let n = state.n_cells();
    let scale = n as f64 / (2.0 * state.s);
    let grad = |y: &[f64]| (y[n - 2] - 4.0 * y[n - 1]) * scale;
    (grad(&state.u), grad(&state.v))
}

/// Stefan law `s' = -mu (u_x + rho v_x)`.
pub fn front_speed(flux_u: f64, flux_v: f64, params: &ModelParams) -> f64 {
    -params.mu * (flux_u + params.rho * flux_v)
}

fn checked_speed(state: &SimState, params: &ModelParams, step: u64) -> Result<f64> {
    let (fu, fv) = boundary_flux(state);
    let speed = front_speed(fu, fv, params);
    if !speed.is_finite() {
        return Err(Error::BlowUp { step });
    }
    if speed < 0.0 {
        if speed >= -UNDERSHOOT_TOL {
            return Ok(0.0);
        }
        return Err(Error::FrontRetreat { step, speed });
    }
    Ok(speed)
}

/// Reusable buffers for [`transformed_step`].
#[derive(Debug, Default, Clone)]
pub struct Stepper {
    lower: Vec<f64>,
    diag: Vec<f64>,
    upper: Vec<f64>,
    rhs_u: Vec<f64>,
    rhs_v: Vec<f64>,
    scratch: Vec<f64>,
}

impl Stepper {
    /// Number of equal sub-steps that keep the advection Courant number at or
    /// below [`CFL`] for a step of length `dt`.
    pub fn substeps(state: &SimState, dt: f64) -> u64 {
        let dxi = 1.0 / state.n_cells() as f64;
        let limit = CFL * dxi * state.s / state.s_prime.max(f64::MIN_POSITIVE);
        if dt <= limit {
            1
        } else {
            (dt / limit).ceil() as u64
        }
    }

    /// Advances `state` by `dt`, split into [`Self::substeps`] pieces when the
    /// front moves too fast for one explicit advection step.
    pub fn advance(&mut self, state: &mut SimState, params: &ModelParams, kind: ProblemKind, dt: f64) -> Result<()> {
        let pieces = Self::substeps(state, dt);
        let h = dt / pieces as f64;
        let (step, t) = (state.step, state.t);
        for _ in 0..pieces {
            self.step(state, params, kind, h)?;
        }
        state.step = step + 1;
        state.t = t + dt;
        Ok(())
    }

    /// One step of length `dt`; `state.step` and `state.t` advance by one and `dt`.
    pub fn step(&mut self, state: &mut SimState, params: &ModelParams, kind: ProblemKind, dt: f64) -> Result<()> {
        let n = state.n_cells();
        let step_id = state.step + 1;
        let speed = state.s_prime;
        let s_new = state.s + dt * speed;
        if !s_new.is_finite() {
            return Err(Error::BlowUp { step: step_id });
        }

        let first = match kind {
            ProblemKind::Nfb => 0,
            ProblemKind::Dfb => 1,
        };
        let m = n - first;
        for buf in [
            &mut self.lower,
            &mut self.diag,
            &mut self.upper,
            &mut self.rhs_u,
            &mut self.rhs_v,
            &mut self.scratch,
        ] {
            buf.resize(m, 0.0);
        }

        // explicit advection + reaction
        let adv = speed / s_new * dt * 0.5;
        let (u, v) = (&state.u, &state.v);
        for i in first..n {
            let (ui, vi) = (u[i], v[i]);
            let drift = adv * i as f64; // xi * (s'/s) * dt / (2 dxi)
            let (du, dv) = if i == 0 {
                (0.0, 0.0)
            } else {
                (u[i + 1] - u[i - 1], v[i + 1] - v[i - 1])
            };
            self.rhs_u[i - first] = ui + drift * du + dt * ui * (1.0 - ui - params.k * vi);
            self.rhs_v[i - first] = vi + drift * dv + dt * params.r * vi * (1.0 - vi - params.h * ui);
        }

        // implicit diffusion, zero at xi = 1, mirror or zero at xi = 0
        let base = dt * (n * n) as f64 / (s_new * s_new);
        for (coef, rhs) in [(base, &mut self.rhs_u), (base * params.d, &mut self.rhs_v)] {
            self.lower.fill(-coef);
            self.upper.fill(-coef);
            self.diag.fill(1.0 + 2.0 * coef);
            if kind == ProblemKind::Nfb {
                self.upper[0] = -2.0 * coef;
            }
            tridiag::solve_in_place(&self.lower, &self.diag, &self.upper, rhs, &mut self.scratch);
        }

        for (dst, src) in [(&mut state.u, &self.rhs_u), (&mut state.v, &self.rhs_v)] {
            for (j, &y) in src.iter().enumerate() {
                let i = j + first;
                dst[i] = if y >= f64::MIN_POSITIVE {
                    if !y.is_finite() {
                        return Err(Error::BlowUp { step: step_id });
                    }
                    y
                } else if y >= -UNDERSHOOT_TOL {
                    // also flushes subnormals, which stall the arithmetic on long vanishing runs
                    0.0
                } else if y.is_nan() {
                    return Err(Error::BlowUp { step: step_id });
                } else {
                    return Err(Error::Positivity {
                        step: step_id,
                        node: i,
                        value: y,
                    });
                };
            }
        }

        state.s = s_new;
        state.step = step_id;
        state.t += dt;
        state.s_prime = checked_speed(state, params, step_id)?;
        Ok(())
    }
}

/// One front-fixed step of length `dt` from `state`.
pub fn transformed_step(state: &SimState, params: &ModelParams, kind: ProblemKind, dt: f64) -> Result<SimState> {
    params.validate_numerics()?;
    state.validate(kind)?;
    let mut next = state.clone();
    Stepper::default().step(&mut next, params, kind, dt)?;
    Ok(next)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub t: f64,
    pub s: f64,
    pub s_prime: f64,
    pub sup_u: f64,
    pub sup_v: f64,
}

impl Sample {
    pub fn of(state: &SimState) -> Self {
        Self {
            t: state.t,
            s: state.s,
            s_prime: state.s_prime,
            sup_u: state.sup_u(),
            sup_v: state.sup_v(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub t: f64,
    pub s: f64,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
}

impl Snapshot {
    pub fn of(state: &SimState) -> Self {
        Self {
            t: state.t,
            s: state.s,
            u: state.u.clone(),
            v: state.v.clone(),
        }
    }

    /// Physical node coordinates `x_i = s xi_i`.
    pub fn xs(&self) -> Vec<f64> {
        let n = self.u.len() - 1;
        (0..=n).map(|i| self.s * i as f64 / n as f64).collect()
    }

    /// Linear interpolation of `(u, v)` at physical `x`; zero beyond the front.
    pub fn at(&self, x: f64) -> (f64, f64) {
        let n = self.u.len() - 1;
        let pos = x / self.s * n as f64;
        if !(0.0..n as f64).contains(&pos) {
            return if pos >= n as f64 || pos.is_nan() {
                (0.0, 0.0)
            } else {
                (self.u[0], self.v[0])
            };
        }
        let i = pos.floor() as usize;
        let w = pos - i as f64;
        (
            self.u[i] + w * (self.u[i + 1] - self.u[i]),
            self.v[i] + w * (self.v[i + 1] - self.v[i]),
        )
    }
}

/// Monitored ratios against the a priori ceiling `M`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct CeilingMonitor {
    pub bound: f64,
    /// max over the run of `max(sup U, sup V) / M`.
    pub profile_ratio: f64,
    /// max over the run of `s' / (mu M (1 + rho))`.
    pub speed_ratio: f64,
    /// Accepted steps after `t = 0` with `s' = 0` while a profile was nonzero.
    pub stalled_steps: u64,
}

impl CeilingMonitor {
    fn observe(&mut self, state: &SimState, params: &ModelParams) {
        let sup = state.sup_u().max(state.sup_v());
        self.profile_ratio = self.profile_ratio.max(sup / self.bound);
        let cap = params.mu * self.bound * (1.0 + params.rho);
        if cap > 0.0 {
            self.speed_ratio = self.speed_ratio.max(state.s_prime / cap);
        }
        if state.step > 0 && state.s_prime == 0.0 && sup > 0.0 && params.mu > 0.0 {
            self.stalled_steps += 1;
        }
    }

    pub fn within_profile_ceiling(&self) -> bool {
        self.profile_ratio <= 1.0 + EPS_SCHEME
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub params: ModelParams,
    pub kind: ProblemKind,
    pub grid: GridSpec,
    pub series: Vec<Sample>,
    pub snapshots: Vec<Snapshot>,
    pub monitor: CeilingMonitor,
    /// Set when the run stopped on a numerical failure.
    pub failure: Option<String>,
    /// Set when the run stopped early on a spreading certificate.
    pub stopped_early: bool,
}

impl RunRecord {
    pub fn last(&self) -> &Sample {
        self.series.last().expect("record always holds the t = 0 sample")
    }

    pub fn final_snapshot(&self) -> Option<&Snapshot> {
        self.snapshots.last()
    }

    pub fn is_complete(&self) -> bool {
        self.failure.is_none()
    }

    /// Checks the stored series invariants: strictly increasing times and a
    /// nondecreasing front.
    pub fn check_invariants(&self) -> Result<()> {
        for w in self.series.windows(2) {
            if w[1].t <= w[0].t {
                return Err(Error::Consistency(format!(
                    "series time not increasing at t = {}",
                    w[1].t
                )));
            }
            if w[1].s < w[0].s {
                return Err(Error::Consistency(format!("front moved back at t = {}", w[1].t)));
            }
        }
        Ok(())
    }
}

/// Run control beyond the grid.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct RunOptions {
    /// Stop as soon as the front exceeds this length (spreading certificate).
    pub stop_above: Option<f64>,
}

/// A resumable simulation: the current state plus the record so far.
#[derive(Debug, Clone)]
pub struct Simulation {
    pub state: SimState,
    pub record: RunRecord,
    stepper: Stepper,
}

impl Simulation {
    pub fn new(params: ModelParams, kind: ProblemKind, init: &InitialData, grid: GridSpec) -> Result<Self> {
        params.validate_numerics()?;
        grid.validate()?;
        init.check_compatible(kind)?;
        if (init.s0 - params.s0).abs() > 1e-12 * params.s0 {
            return Err(Error::Config(format!(
                "initial data spans [0, {}] but s0 = {}",
                init.s0, params.s0
            )));
        }
        if params.s0 < 10.0 * grid.dxi() {
            return Err(Error::Config(format!(
                "s0 = {} below 10 grid spacings ({})",
                params.s0,
                10.0 * grid.dxi()
            )));
        }
        let state = SimState::initial(&params, init, grid.n_cells)?;
        let mut monitor = CeilingMonitor {
            bound: a_priori_bound(init),
            ..Default::default()
        };
        monitor.observe(&state, &params);
        let record = RunRecord {
            params,
            kind,
            grid,
            series: vec![Sample::of(&state)],
            snapshots: vec![Snapshot::of(&state)],
            monitor,
            failure: None,
            stopped_early: false,
        };
        Ok(Self {
            state,
            record,
            stepper: Stepper::default(),
        })
    }

    pub fn resume(state: SimState, record: RunRecord) -> Self {
        Self {
            state,
            record,
            stepper: Stepper::default(),
        }
    }

    /// Steps until `t_max` of the record's grid, a failure, or the stop rule.
    pub fn run(&mut self, opts: &RunOptions) {
        let total = self.record.grid.total_steps();
        let grid = self.record.grid;
        if let Some(limit) = opts.stop_above {
            if self.state.s > limit {
                self.record.stopped_early = true;
                return;
            }
        }
        while self.state.step < total && self.record.failure.is_none() {
            let params = self.record.params;
            let outcome = self
                .stepper
                .advance(&mut self.state, &params, self.record.kind, grid.dt);
            if let Err(e) = outcome {
                self.record.failure = Some(e.to_string());
                break;
            }
            // recompute t from the step index so resumed runs line up exactly
            self.state.t = self.state.step as f64 * grid.dt;
            self.record.monitor.observe(&self.state, &params);
            let done = self.state.step == total;
            let stop = opts.stop_above.is_some_and(|limit| self.state.s > limit);
            if self.state.step.is_multiple_of(grid.series_stride) || done || stop {
                self.record.series.push(Sample::of(&self.state));
            }
            if self.state.step.is_multiple_of(grid.snapshot_stride) || done || stop {
                self.record.snapshots.push(Snapshot::of(&self.state));
            }
            if stop {
                self.record.stopped_early = true;
                break;
            }
        }
    }

    pub fn into_record(self) -> RunRecord {
        self.record
    }
}

/// Runs the system from `init` to `grid.t_max`. Numerical failures end the
/// run early and are reported in [`RunRecord::failure`].
pub fn simulate(params: &ModelParams, kind: ProblemKind, init: &InitialData, grid: &GridSpec) -> Result<RunRecord> {
    simulate_with(params, kind, init, grid, &RunOptions::default())
}

pub fn simulate_with(
    params: &ModelParams,
    kind: ProblemKind,
    init: &InitialData,
    grid: &GridSpec,
    opts: &RunOptions,
) -> Result<RunRecord> {
    let mut sim = Simulation::new(*params, kind, init, *grid)?;
    sim.run(opts);
    Ok(sim.into_record())
}
