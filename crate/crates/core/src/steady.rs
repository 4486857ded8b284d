//! Half-line steady states and the barrier profiles that sandwich the
//! long-time DFB solution in the weak competition regime.
//!
//! Every problem here has the form
//!
//! ```text
//! -d y'' = y (f(x) - lambda y),   y(0) = 0,   y(x) -> f(inf) / lambda
//! ```
//!
//! truncated to `[0, L]` with the far-field value imposed at `L`, and solved by
//! damped Newton on centred differences.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{classify_regime, ModelParams, ProblemKind, Regime};
use crate::solver::RunRecord;
use crate::tridiag;

const MAX_NEWTON: usize = 100;
const NEWTON_TOL: f64 = 1e-11;
const ORDER_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HalfLineGrid {
    /// Truncation length `L`.
    pub length: f64,
    /// Number of cells; nodes are `x_j = j L / m`, `j = 0..=m`.
    pub cells: usize,
}

impl Default for HalfLineGrid {
    fn default() -> Self {
        Self {
            length: 40.0,
            cells: 8000,
        }
    }
}

impl HalfLineGrid {
    pub fn validate(&self) -> Result<()> {
        if self.length.is_nan() || self.length < 20.0 || self.cells < 200 {
            return Err(Error::Config(format!(
                "half-line grid needs L >= 20 and m >= 200, got L = {}, m = {}",
                self.length, self.cells
            )));
        }
        Ok(())
    }

    pub fn step(&self) -> f64 {
        self.length / self.cells as f64
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..=self.cells)
            .map(|j| self.length * j as f64 / self.cells as f64)
            .collect()
    }

    /// Same spacing, twice the length.
    pub fn doubled(&self) -> Self {
        Self {
            length: 2.0 * self.length,
            cells: 2 * self.cells,
        }
    }
}

/// Linear interpolation of a grid profile at `x`.
pub fn interpolate(grid: &HalfLineGrid, y: &[f64], x: f64) -> f64 {
    let pos = (x / grid.step()).clamp(0.0, grid.cells as f64);
    let j = (pos.floor() as usize).min(grid.cells - 1);
    let w = pos - j as f64;
    y[j] + w * (y[j + 1] - y[j])
}

/// Positive solution of `-d y'' = alpha y (1 - y)`, `y(0) = 0`, `y(L) = 1`.
pub fn solve_logistic_halfline(d: f64, alpha: f64, grid: &HalfLineGrid) -> Result<Vec<f64>> {
    if !(d > 0.0 && alpha > 0.0) {
        return Err(Error::Precondition(format!(
            "d and alpha must be positive, got {d}, {alpha}"
        )));
    }
    let f = vec![alpha; grid.cells + 1];
    solve_coupled_halfline(&f, d, alpha, grid)
}

/// Positive solution of `-d y'' = y (f(x) - lamb y)`, `y(0) = 0`, with the
/// far-field closure `y(L) = f(L) / lamb`. `f` is tabulated on the grid nodes
/// and must be bounded below by a positive constant.
pub fn solve_coupled_halfline(f: &[f64], d: f64, lamb: f64, grid: &HalfLineGrid) -> Result<Vec<f64>> {
    grid.validate()?;
    let m = grid.cells;
    if f.len() != m + 1 {
        return Err(Error::Precondition(format!(
            "coefficient has {} values for {} nodes",
            f.len(),
            m + 1
        )));
    }
    if !(d > 0.0 && lamb > 0.0) {
        return Err(Error::Precondition(format!(
            "d and lambda must be positive, got {d}, {lamb}"
        )));
    }
    let f_min = f.iter().copied().fold(f64::INFINITY, f64::min);
    if f_min.is_nan() || f_min <= 0.0 || f.iter().any(|x| !x.is_finite()) {
        return Err(Error::Precondition(format!("inf f must be positive, got {f_min}")));
    }
    let diffusion_length = (d / f_min).sqrt();
    if grid.length < 20.0 * diffusion_length {
        return Err(Error::Precondition(format!(
            "L = {} shorter than 20 diffusion lengths ({diffusion_length})",
            grid.length
        )));
    }

    let h = grid.step();
    let far = f[m] / lamb;
    let ramp = 2.0 * diffusion_length;
    let mut y: Vec<f64> = grid.nodes().iter().map(|&x| far * (x / ramp).min(1.0)).collect();
    y[0] = 0.0;
    y[m] = far;

    let coupling = d / (h * h);
    let residual = |y: &[f64], out: &mut [f64]| -> f64 {
        let mut norm = 0.0_f64;
        for j in 1..m {
            let r = coupling * (y[j - 1] - 2.0 * y[j] + y[j + 1]) + y[j] * (f[j] - lamb * y[j]);
            out[j - 1] = r;
            norm = norm.max(r.abs());
        }
        norm
    };

    let n = m - 1;
    let (mut lower, mut diag, mut upper) = (vec![coupling; n], vec![0.0; n], vec![coupling; n]);
    let (mut res, mut delta, mut scratch) = (vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    let mut trial = y.clone();
    let mut norm = residual(&y, &mut res);
    // scale the stopping rule by the size of the discrete operator
    let tol = NEWTON_TOL * (1.0 + far) * f.iter().copied().fold(lamb, f64::max);

    for _ in 0..MAX_NEWTON {
        if norm <= tol {
            break;
        }
        for j in 1..m {
            diag[j - 1] = -2.0 * coupling + f[j] - 2.0 * lamb * y[j];
            delta[j - 1] = -res[j - 1];
        }
        lower[0] = 0.0;
        upper[n - 1] = 0.0;
        tridiag::solve_in_place(&lower, &diag, &upper, &mut delta, &mut scratch);
        lower[0] = coupling;
        upper[n - 1] = coupling;

        let mut damping = 1.0;
        loop {
            for j in 1..m {
                trial[j] = y[j] + damping * delta[j - 1];
            }
            let trial_norm = residual(&trial, &mut res);
            if trial_norm < norm || damping < 1e-6 {
                norm = trial_norm;
                std::mem::swap(&mut y, &mut trial);
                break;
            }
            damping *= 0.5;
        }
    }
    if norm.is_nan() || norm > tol {
        return Err(Error::NewtonDivergence {
            iterations: MAX_NEWTON,
            residual: norm,
        });
    }
    if y[1..m].iter().any(|&v| v <= 0.0) {
        return Err(Error::Consistency("newton converged to a non-positive profile".into()));
    }
    Ok(y)
}

/// Barrier curves on a shared grid: `u_low <= u <= u_bar`, `v_low <= v <= v_bar`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SteadyProfiles {
    pub grid: HalfLineGrid,
    pub u_bar: Vec<f64>,
    pub v_bar: Vec<f64>,
    pub u_low: Vec<f64>,
    pub v_low: Vec<f64>,
}

impl SteadyProfiles {
    /// Checks zeros at the origin, ordering, monotone upper barriers and the
    /// `1 - k`, `1 - h` caps on the lower barriers.
    pub fn check_invariants(&self, params: &ModelParams) -> Result<()> {
        let named = [
            ("u_bar", &self.u_bar),
            ("v_bar", &self.v_bar),
            ("u_low", &self.u_low),
            ("v_low", &self.v_low),
        ];
        for (name, y) in named {
            if y[0] != 0.0 {
                return Err(Error::Consistency(format!("{name} does not vanish at the origin")));
            }
            if y[1..y.len() - 1].iter().any(|&v| v <= 0.0) {
                return Err(Error::Consistency(format!("{name} is not positive inside")));
            }
        }
        for (name, y) in [("u_bar", &self.u_bar), ("v_bar", &self.v_bar)] {
            if y.windows(2).any(|w| w[1] < w[0] - ORDER_TOL) {
                return Err(Error::Consistency(format!("{name} is not nondecreasing")));
            }
        }
        for (name, low, bar) in [("u", &self.u_low, &self.u_bar), ("v", &self.v_low, &self.v_bar)] {
            if let Some(j) = (0..low.len()).find(|&j| low[j] > bar[j] + ORDER_TOL) {
                return Err(Error::Consistency(format!("{name}_low exceeds {name}_bar at node {j}")));
            }
        }
        for (name, y, cap) in [
            ("u_low", &self.u_low, 1.0 - params.k),
            ("v_low", &self.v_low, 1.0 - params.h),
        ] {
            let top = y.iter().copied().fold(0.0, f64::max);
            if top > cap + ORDER_TOL {
                return Err(Error::Consistency(format!("{name} reaches {top}, above its cap {cap}")));
            }
        }
        Ok(())
    }

    pub fn write_csv(&self, path: &std::path::Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["x", "u_bar", "v_bar", "u_low", "v_low"])?;
        for (j, x) in self.grid.nodes().into_iter().enumerate() {
            w.write_record([x, self.u_bar[j], self.v_bar[j], self.u_low[j], self.v_low[j]].map(|x| x.to_string()))?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Upper barriers from the single-species logistic problems, lower barriers
/// from the same problems with the competitor frozen at its upper barrier.
pub fn build_barriers(params: &ModelParams, grid: &HalfLineGrid) -> Result<SteadyProfiles> {
    params.validate()?;
    if classify_regime(params) != Regime::WeakCompetition {
        return Err(Error::Precondition(format!(
            "barriers need 0 < h, k < 1, got h = {}, k = {}",
            params.h, params.k
        )));
    }
    let u_bar = solve_logistic_halfline(1.0, 1.0, grid)?;
    let v_bar = solve_logistic_halfline(params.d, params.r, grid)?;
    let f_v: Vec<f64> = u_bar.iter().map(|u| params.r * (1.0 - params.h * u)).collect();
    let v_low = solve_coupled_halfline(&f_v, params.d, params.r, grid)?;
    let f_u: Vec<f64> = v_bar.iter().map(|v| 1.0 - params.k * v).collect();
    let u_low = solve_coupled_halfline(&f_u, 1.0, 1.0, grid)?;
    let profiles = SteadyProfiles {
        grid: *grid,
        u_bar,
        v_bar,
        u_low,
        v_low,
    };
    profiles.check_invariants(params)?;
    Ok(profiles)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SandwichReport {
    pub window: (f64, f64),
    pub slack: f64,
    /// Largest `max(0, u_low - u)` over the window.
    pub max_lower_violation_u: f64,
    /// Largest `max(0, u - u_bar)` over the window.
    pub max_upper_violation_u: f64,
    pub max_lower_violation_v: f64,
    pub max_upper_violation_v: f64,
    pub nodes_checked: usize,
    pub passed: bool,
}

/// Compares the final profiles of a DFB run with the barriers on `window`.
pub fn check_sandwich(
    record: &RunRecord,
    barriers: &SteadyProfiles,
    window: (f64, f64),
    slack: f64,
) -> Result<SandwichReport> {
    if record.kind != ProblemKind::Dfb {
        return Err(Error::Precondition("sandwich check needs a DFB run".into()));
    }
    if !(slack >= 0.0 && slack.is_finite()) {
        return Err(Error::Precondition(format!("slack must be nonnegative, got {slack}")));
    }
    let snap = record
        .final_snapshot()
        .ok_or_else(|| Error::Precondition("record has no snapshot".into()))?;
    let (lo, hi) = window;
    if !(0.0 <= lo && lo <= hi && hi <= snap.s) {
        return Err(Error::Precondition(format!(
            "window [{lo}, {hi}] outside [0, {}]",
            snap.s
        )));
    }
    if hi > barriers.grid.length {
        return Err(Error::Precondition(format!(
            "window exceeds barrier grid length {}",
            barriers.grid.length
        )));
    }
    let g = &barriers.grid;
    let mut report = SandwichReport {
        window,
        slack,
        max_lower_violation_u: 0.0,
        max_upper_violation_u: 0.0,
        max_lower_violation_v: 0.0,
        max_upper_violation_v: 0.0,
        nodes_checked: 0,
        passed: false,
    };
    for (i, x) in snap.xs().into_iter().enumerate() {
        if x < lo || x > hi {
            continue;
        }
        let (u, v) = (snap.u[i], snap.v[i]);
        let at = |y: &[f64]| interpolate(g, y, x);
        report.max_lower_violation_u = report.max_lower_violation_u.max(at(&barriers.u_low) - u);
        report.max_upper_violation_u = report.max_upper_violation_u.max(u - at(&barriers.u_bar));
        report.max_lower_violation_v = report.max_lower_violation_v.max(at(&barriers.v_low) - v);
        report.max_upper_violation_v = report.max_upper_violation_v.max(v - at(&barriers.v_bar));
        report.nodes_checked += 1;
    }
    report.passed = [
        report.max_lower_violation_u,
        report.max_upper_violation_u,
        report.max_lower_violation_v,
        report.max_upper_violation_v,
    ]
    .iter()
    .all(|&viol| viol <= slack);
    Ok(report)
}
