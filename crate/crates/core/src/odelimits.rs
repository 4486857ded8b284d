//! Spatially homogeneous competition dynamics and the bound iteration used
//! for the `0 < h < 1 <= k` exclusion case.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::ModelParams;

/// Fixed RK4 step.
pub const ODE_DT: f64 = 1e-3;
/// RK4 steps between stored samples.
pub const ODE_SAMPLE_EVERY: u64 = 100;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OdeState {
    pub t: f64,
    pub u: f64,
    pub v: f64,
}

fn rhs(p: &ModelParams, u: f64, v: f64) -> (f64, f64) {
    (u * (1.0 - u - p.k * v), p.r * v * (1.0 - v - p.h * u))
}

/// Integrates `u' = u(1 - u - k v)`, `v' = r v(1 - v - h u)` with classic RK4
/// at [`ODE_DT`], sampling every [`ODE_SAMPLE_EVERY`] steps and at `t_max`.
pub fn integrate_ode(params: &ModelParams, u0: f64, v0: f64, t_max: f64) -> Result<Vec<OdeState>> {
    if !(u0 > 0.0 && v0 > 0.0 && u0.is_finite() && v0.is_finite()) {
        return Err(Error::Precondition(format!(
            "initial state must be positive, got ({u0}, {v0})"
        )));
    }
    if !(t_max >= 0.0 && t_max.is_finite()) {
        return Err(Error::Precondition(format!("t_max must be nonnegative, got {t_max}")));
    }
    params.validate_numerics()?;
    let steps = (t_max / ODE_DT).round() as u64;
    let (mut u, mut v) = (u0, v0);
    let mut out = vec![OdeState { t: 0.0, u, v }];
    for n in 1..=steps {
        let h = ODE_DT;
        let k1 = rhs(params, u, v);
        let k2 = rhs(params, u + 0.5 * h * k1.0, v + 0.5 * h * k1.1);
        let k3 = rhs(params, u + 0.5 * h * k2.0, v + 0.5 * h * k2.1);
        let k4 = rhs(params, u + h * k3.0, v + h * k3.1);
        u += h / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0);
        v += h / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1);
        if !(u.is_finite() && v.is_finite()) {
            return Err(Error::BlowUp { step: n });
        }
        if n % ODE_SAMPLE_EVERY == 0 || n == steps {
            out.push(OdeState { t: n as f64 * h, u, v });
        }
    }
    Ok(out)
}

pub fn write_trajectory_csv(traj: &[OdeState], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["t", "u", "v"])?;
    for s in traj {
        w.write_record([s.t, s.u, s.v].map(|x| x.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

/// Bound sequence `u_bar_{j+1} = 1 - k v_low_j`, `v_low_{j+1} = 1 - h u_bar_{j+1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationSeq {
    /// `(u_bar_j, v_low_j)` for `j = 1..=len`.
    pub pairs: Vec<(f64, f64)>,
    /// `sigma = h k`.
    pub sigma: f64,
    /// Set when some `k v_low_j >= 1` ended the iteration before `J` terms.
    pub stopped_at: Option<usize>,
}

impl IterationSeq {
    /// `v_low_j` for 1-based `j`.
    pub fn v_low(&self, j: usize) -> f64 {
        self.pairs[j - 1].1
    }

    pub fn u_bar(&self, j: usize) -> f64 {
        self.pairs[j - 1].0
    }
}

/// Closed form `(1 - h)(1 + sigma + ... + sigma^(j-1))`, summed term by term.
pub fn v_low_closed_form(h: f64, k: f64, j: usize) -> f64 {
    let sigma = h * k;
    let mut term = 1.0;
    let mut sum = 0.0;
    for _ in 0..j {
        sum += term;
        term *= sigma;
    }
    (1.0 - h) * sum
}

/// Runs the bound iteration from `u_bar_1 = 1`, `v_low_1 = 1 - h` for up to
/// `count` terms, checking each term against [`v_low_closed_form`].
pub fn iterate_bounds(h: f64, k: f64, count: usize) -> Result<IterationSeq> {
    if !(0.0 < h && h < 1.0 && k >= 1.0 && k.is_finite()) {
        return Err(Error::Precondition(format!(
            "iteration needs 0 < h < 1 <= k, got h = {h}, k = {k}"
        )));
    }
    if count == 0 {
        return Err(Error::Precondition("need at least one term".into()));
    }
    let mut pairs = vec![(1.0, 1.0 - h)];
    let mut stopped_at = None;
    while pairs.len() < count {
        let (_, v_low) = *pairs.last().unwrap();
        if k * v_low >= 1.0 {
            stopped_at = Some(pairs.len());
            break;
        }
        let u_bar = 1.0 - k * v_low;
        pairs.push((u_bar, 1.0 - h * u_bar));
    }
    for (j, &(_, v_low)) in pairs.iter().enumerate() {
        let closed = v_low_closed_form(h, k, j + 1);
        if (closed - v_low).abs() > 1e-12 {
            return Err(Error::Consistency(format!(
                "term {} deviates from closed form: {v_low} vs {closed}",
                j + 1
            )));
        }
    }
    Ok(IterationSeq {
        pairs,
        sigma: h * k,
        stopped_at,
    })
}

pub fn write_iteration_csv(seq: &IterationSeq, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["j", "u_bar_j", "v_low_j"])?;
    for (j, (u, v)) in seq.pairs.iter().enumerate() {
        w.write_record([(j + 1).to_string(), u.to_string(), v.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::coexistence_limit;

    fn params(k: f64, h: f64) -> ModelParams {
        ModelParams {
            k,
            h,
            r: 1.0,
            ..ModelParams::default()
        }
    }

    #[test]
    fn coexistence_trajectory() {
        let traj = integrate_ode(&params(0.5, 0.5), 0.1, 0.1, 100.0).unwrap();
        let last = traj.last().unwrap();
        assert_eq!(last.t, 100.0);
        assert!((last.u - 2.0 / 3.0).abs() < 1e-4 && (last.v - 2.0 / 3.0).abs() < 1e-4);
    }

    #[test]
    fn decoupled_logistic() {
        let traj = integrate_ode(&params(0.0, 0.0), 0.1, 0.3, 100.0).unwrap();
        let last = traj.last().unwrap();
        assert!((last.u - 1.0).abs() < 1e-6);
        // exact logistic at t = 1
        let at1 = traj.iter().find(|s| (s.t - 1.0).abs() < 1e-12).unwrap();
        let exact = 0.1 * 1f64.exp() / (1.0 - 0.1 + 0.1 * 1f64.exp());
        assert!((at1.u - exact).abs() < 1e-12);
    }

    #[test]
    fn exclusion_trajectory() {
        let p = params(1.5, 0.5);
        let last = *integrate_ode(&p, 0.1, 0.1, 100.0).unwrap().last().unwrap();
        let (u, v) = coexistence_limit(&p).unwrap();
        assert!((last.u - u).abs() < 1e-3 && (last.v - v).abs() < 1e-3);
    }

    #[test]
    fn rejects_nonpositive_start() {
        assert!(integrate_ode(&params(0.5, 0.5), 0.0, 0.1, 1.0).is_err());
    }

    #[test]
    fn iteration_examples() {
        let seq = iterate_bounds(0.5, 1.0, 3).unwrap();
        assert_eq!(seq.v_low(3), 0.875);
        assert_eq!(seq.u_bar(3), 0.25);

        let long = iterate_bounds(0.5, 1.0, 40).unwrap();
        assert!((long.v_low(40) - 1.0).abs() < 1e-11);
        assert!(long.u_bar(40) < 1e-11);
        // once v_low rounds to 1 = 1/k the stopping branch takes over
        let rounded = iterate_bounds(0.5, 1.0, 60).unwrap();
        assert!(rounded.stopped_at.is_some_and(|j| j < 60));
        assert!(long.pairs.windows(2).all(|w| w[1].1 > w[0].1));

        let early = iterate_bounds(0.5, 4.0, 10).unwrap();
        assert_eq!(early.pairs.len(), 1);
        assert_eq!(early.stopped_at, Some(1));
    }

    #[test]
    fn iteration_hypotheses() {
        assert!(iterate_bounds(1.0, 2.0, 5).is_err());
        assert!(iterate_bounds(0.5, 0.9, 5).is_err());
    }
}
