//! Explicit vanishing super-solution for DFB and the search for a certified
//! small front coefficient.
//!
//! The candidate is
//!
//! ```text
//! sigma(t) = s0 (1 + delta - delta/2 e^{-gamma t})
//! w(t, x)  = K e^{-gamma t} sin(pi x / sigma(t)),   0 <= x <= sigma(t)
//! ```
//!
//! used as the barrier for both species. When the two PDE inequalities, the
//! initial domination and the front inequality
//! `sigma' + mu (1 + rho) w_x(t, sigma) >= 0` hold, comparison keeps
//! `s(t) <= sigma(t) < s0 (1 + delta)` forever.
//!
//! Verification here is pointwise on a dense sample grid with closed-form
//! derivatives: a numerical certificate, not an interval-arithmetic proof.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{lambda_threshold, InitialData, ModelParams, ProblemKind};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SupersolutionParams {
    pub delta: f64,
    pub gamma: f64,
    /// Amplitude `K`.
    #[serde(rename = "K")]
    pub amplitude: f64,
    pub s0: f64,
}

impl SupersolutionParams {
    pub fn sigma(&self, t: f64) -> f64 {
        self.s0 * (1.0 + self.delta - 0.5 * self.delta * (-self.gamma * t).exp())
    }

    pub fn sigma_prime(&self, t: f64) -> f64 {
        0.5 * self.s0 * self.delta * self.gamma * (-self.gamma * t).exp()
    }

    /// Limit of `sigma` as `t -> inf`; bounds the front of any dominated run.
    pub fn sigma_limit(&self) -> f64 {
        self.s0 * (1.0 + self.delta)
    }

    /// `(w, w_t, w_x, w_xx)` at `(t, x)`.
    fn jet(&self, t: f64, x: f64) -> (f64, f64, f64, f64) {
        let sigma = self.sigma(t);
        let decay = self.amplitude * (-self.gamma * t).exp();
        let phase = PI * x / sigma;
        let (sin, cos) = phase.sin_cos();
        let w = decay * sin;
        let w_t = -self.gamma * w - decay * cos * phase * self.sigma_prime(t) / sigma;
        let w_x = decay * cos * PI / sigma;
        let w_xx = -(PI / sigma).powi(2) * w;
        (w, w_t, w_x, w_xx)
    }
}

/// `(sigma(t), w(t, x))`.
pub fn eval_barrier(p: &SupersolutionParams, t: f64, x: f64) -> Result<(f64, f64)> {
    let sigma = p.sigma(t);
    if !(0.0..=sigma).contains(&x) {
        return Err(Error::Precondition(format!("x = {x} outside [0, sigma(t) = {sigma}]")));
    }
    if x == sigma {
        return Ok((sigma, 0.0));
    }
    Ok((sigma, p.amplitude * (-p.gamma * t).exp() * (PI * x / sigma).sin()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleGrid {
    /// Inequalities are checked for `t` in `[0, t_check]`.
    pub t_check: f64,
    pub nt: usize,
    pub nx: usize,
}

impl Default for SampleGrid {
    fn default() -> Self {
        Self {
            t_check: 50.0,
            nt: 400,
            nx: 400,
        }
    }
}

impl SampleGrid {
    pub fn refined(&self) -> Self {
        Self {
            nt: 2 * self.nt,
            nx: 2 * self.nx,
            ..*self
        }
    }
}

/// Smallest value of each inequality's `lhs - rhs` over the samples.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Margins {
    pub pde_u: f64,
    pub pde_v: f64,
    pub initial: f64,
    pub front: f64,
}

impl Margins {
    pub fn all_nonnegative(&self) -> bool {
        self.pde_u >= 0.0 && self.pde_v >= 0.0 && self.initial >= 0.0 && self.front >= 0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SupersolutionReport {
    pub passed: bool,
    pub worst_margins: Margins,
    pub grid: SampleGrid,
}

fn pde_margins(p: &SupersolutionParams, params: &ModelParams, grid: &SampleGrid) -> (f64, f64) {
    let mut worst = (f64::INFINITY, f64::INFINITY);
    for i in 0..=grid.nt {
        let t = grid.t_check * i as f64 / grid.nt as f64;
        let sigma = p.sigma(t);
        for j in 1..grid.nx {
            let x = sigma * j as f64 / grid.nx as f64;
            let (w, w_t, _, w_xx) = p.jet(t, x);
            let logistic = w * (1.0 - w);
            worst.0 = worst.0.min(w_t - w_xx - logistic);
            worst.1 = worst.1.min(w_t - params.d * w_xx - params.r * logistic);
        }
    }
    worst
}

fn initial_margin(p: &SupersolutionParams, init: &InitialData, nx: usize) -> f64 {
    let sigma = p.sigma(0.0);
    (0..=nx)
        .map(|j| {
            let x = init.s0 * j as f64 / nx as f64;
            let w = p.amplitude * (PI * x / sigma).sin();
            let (u0, v0) = init.sample(x);
            (w - u0).min(w - v0)
        })
        .fold(f64::INFINITY, f64::min)
}

/// Largest `mu` with `sigma'(t) + mu (1 + rho) w_x(t, sigma(t)) >= 0` at every
/// sampled time.
fn front_mu_limit(p: &SupersolutionParams, rho: f64, grid: &SampleGrid) -> f64 {
    (0..=grid.nt)
        .map(|i| {
            let t = grid.t_check * i as f64 / grid.nt as f64;
            let slope = p.amplitude * (-p.gamma * t).exp() * PI / p.sigma(t);
            p.sigma_prime(t) / ((1.0 + rho) * slope)
        })
        .fold(f64::INFINITY, f64::min)
}

fn front_margin(p: &SupersolutionParams, mu: f64, rho: f64, grid: &SampleGrid) -> f64 {
    (0..=grid.nt)
        .map(|i| {
            let t = grid.t_check * i as f64 / grid.nt as f64;
            let (_, _, w_x, _) = p.jet(t, p.sigma(t));
            p.sigma_prime(t) + mu * (1.0 + rho) * w_x
        })
        .fold(f64::INFINITY, f64::min)
}

/// Evaluates all four inequalities on `grid` and reports the worst margins.
pub fn verify_supersolution(
    p: &SupersolutionParams,
    mu: f64,
    params: &ModelParams,
    init: &InitialData,
    grid: &SampleGrid,
) -> SupersolutionReport {
    let (pde_u, pde_v) = pde_margins(p, params, grid);
    let worst_margins = Margins {
        pde_u,
        pde_v,
        initial: initial_margin(p, init, grid.nx),
        front: front_margin(p, mu, params.rho, grid),
    };
    SupersolutionReport {
        passed: worst_margins.all_nonnegative(),
        worst_margins,
        grid: *grid,
    }
}

/// Candidate lattice for [`search_mu0`]: `K` is given as multiples of
/// `max(sup u0, sup v0)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SearchSpec {
    pub deltas: Vec<f64>,
    pub gammas: Vec<f64>,
    pub amplitude_factors: Vec<f64>,
    pub sample: SampleGrid,
}

fn log_lattice(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo * (hi / lo).powf(i as f64 / (n - 1) as f64)).collect()
}

impl Default for SearchSpec {
    fn default() -> Self {
        Self {
            deltas: log_lattice(0.01, 0.5, 9),
            gammas: log_lattice(0.01, 2.0, 12),
            amplitude_factors: vec![1.0, 1.1, 1.25, 1.5, 2.0, 3.0],
            sample: SampleGrid::default(),
        }
    }
}

/// A certified vanishing configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub delta: f64,
    pub gamma: f64,
    #[serde(rename = "K")]
    pub amplitude: f64,
    pub mu0: f64,
    pub worst_margins: Margins,
    pub grid: SampleGrid,
    /// Margins on the doubled sample grid.
    pub refined_margins: Margins,
    /// `s0 (1 + delta)`: the front of every run with `mu <= mu0` stays below it.
    pub front_bound: f64,
    pub lambda: f64,
    pub kind: String,
}

impl Certificate {
    pub fn witness(&self, s0: f64) -> SupersolutionParams {
        SupersolutionParams {
            delta: self.delta,
            gamma: self.gamma,
            amplitude: self.amplitude,
            s0,
        }
    }
}

/// Safety factor applied to the sampled front limit so the certified `mu0`
/// passes strictly, not by roundoff.
const MU_SHRINK: f64 = 1.0 - 1e-6;

/// Searches the lattice for the tuple certifying the largest `mu0`.
pub fn search_mu0(
    params: &ModelParams,
    kind: ProblemKind,
    init: &InitialData,
    spec: &SearchSpec,
) -> Result<(f64, Certificate)> {
    if kind != ProblemKind::Dfb {
        return Err(Error::Precondition(
            "the explicit super-solution covers DFB only".into(),
        ));
    }
    params.validate()?;
    let lambda = lambda_threshold(params, kind);
    if params.s0 >= lambda {
        return Err(Error::Precondition(format!(
            "s0 = {} must be below lambda = {lambda}",
            params.s0
        )));
    }
    if spec.deltas.is_empty() || spec.gammas.is_empty() || spec.amplitude_factors.is_empty() {
        return Err(Error::Config("empty search lattice".into()));
    }
    let (su, sv) = init.sup();
    let scale = su.max(sv);
    let mut tuples = Vec::new();
    for &delta in &spec.deltas {
        for &gamma in &spec.gammas {
            for &factor in &spec.amplitude_factors {
                tuples.push(SupersolutionParams {
                    delta,
                    gamma,
                    amplitude: factor * scale,
                    s0: params.s0,
                });
            }
        }
    }

    let candidates: Vec<(usize, f64)> = tuples
        .par_iter()
        .enumerate()
        .filter_map(|(i, p)| {
            let report = verify_supersolution(p, 0.0, params, init, &spec.sample);
            report
                .passed
                .then(|| (i, front_mu_limit(p, params.rho, &spec.sample) * MU_SHRINK))
        })
        .collect();

    // best first; ties keep lattice order
    let mut ranked = candidates;
    ranked.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
    for (i, mu0) in ranked {
        let p = &tuples[i];
        let coarse = verify_supersolution(p, mu0, params, init, &spec.sample);
        let fine = verify_supersolution(p, mu0, params, init, &spec.sample.refined());
        if coarse.passed && fine.passed && mu0 > 0.0 {
            let cert = Certificate {
                delta: p.delta,
                gamma: p.gamma,
                amplitude: p.amplitude,
                mu0,
                worst_margins: coarse.worst_margins,
                grid: spec.sample,
                refined_margins: fine.worst_margins,
                front_bound: p.sigma_limit(),
                lambda,
                kind: kind.to_string(),
            };
            return Ok((mu0, cert));
        }
    }
    Err(Error::NoWitness(format!(
        "no lattice point passes (delta range {:?}, gamma range {:?}, K/sup range {:?})",
        spec.deltas.first().zip(spec.deltas.last()),
        spec.gammas.first().zip(spec.gammas.last()),
        spec.amplitude_factors.first().zip(spec.amplitude_factors.last()),
    )))
}
