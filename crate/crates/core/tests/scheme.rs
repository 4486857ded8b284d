use lvfb::solver::{simulate, transformed_step, GridSpec, SimState};
use lvfb::{a_priori_bound, InitialData, ModelParams, ProblemKind};
use proptest::prelude::*;

fn state(params: &ModelParams, kind: ProblemKind, init: &InitialData, n: usize) -> SimState {
    SimState::initial(params, init, n).unwrap_or_else(|e| panic!("{kind}: {e}"))
}

/// With the front frozen and no competition, one step must agree with a
/// forward-Euler step of `u_t = u_xx + u(1 - u)` on the fixed interval.
#[test]
fn one_step_matches_explicit_fixed_domain_update() {
    let params = ModelParams {
        k: 0.0,
        h: 0.0,
        mu: 0.0,
        ..ModelParams::default()
    };
    let (n, dt) = (64, 1e-4);
    for kind in [ProblemKind::Nfb, ProblemKind::Dfb] {
        let init = InitialData::preset(kind, params.s0, 0.5);
        let s0 = state(&params, kind, &init, n);
        let s1 = transformed_step(&s0, &params, kind, dt).unwrap();
        assert_eq!(s1.s, s0.s);
        let dx = params.s0 / n as f64;
        for i in 0..n {
            let (left, right) = match (i, kind) {
                (0, ProblemKind::Nfb) => (s0.u[1], s0.u[1]),
                (0, ProblemKind::Dfb) => continue,
                _ => (s0.u[i - 1], s0.u[i + 1]),
            };
            let u = s0.u[i];
            let explicit = u + dt * ((left - 2.0 * u + right) / (dx * dx) + u * (1.0 - u));
            assert!(
                (s1.u[i] - explicit).abs() < 1e-6,
                "{kind} node {i}: {} vs {explicit}",
                s1.u[i]
            );
        }
    }
}

/// Single-species front-fixing step written independently: dense Gaussian
/// elimination instead of the banded solver.
#[allow(clippy::needless_range_loop)]
fn one_species_step(u: &mut [f64], s: &mut f64, mu: f64, dt: f64) {
    let n = u.len() - 1;
    let dxi = 1.0 / n as f64;
    let speed = -mu * (u[n - 2] - 4.0 * u[n - 1]) / (2.0 * dxi * *s);
    let s_new = *s + dt * speed;
    let mut a = vec![vec![0.0; n]; n];
    let mut b = vec![0.0; n];
    let c = dt / (s_new * s_new * dxi * dxi);
    for i in 0..n {
        let xi = i as f64 * dxi;
        let grad = if i == 0 {
            0.0
        } else {
            (u[i + 1] - u[i - 1]) / (2.0 * dxi)
        };
        b[i] = u[i] + dt * xi * speed / s_new * grad + dt * u[i] * (1.0 - u[i]);
        a[i][i] = 1.0 + 2.0 * c;
        if i == 0 {
            a[0][1] = -2.0 * c;
        } else {
            a[i][i - 1] = -c;
            if i + 1 < n {
                a[i][i + 1] = -c;
            }
        }
    }
    for col in 0..n {
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            if f != 0.0 {
                for j in col..n {
                    a[row][j] -= f * a[col][j];
                }
                b[row] -= f * b[col];
            }
        }
    }
    for row in (0..n).rev() {
        let tail: f64 = (row + 1..n).map(|j| a[row][j] * u[j]).sum();
        u[row] = (b[row] - tail) / a[row][row];
    }
    u[n] = 0.0;
    *s = s_new;
}

#[test]
fn absent_competitor_reduces_to_one_species_problem() {
    let params = ModelParams {
        k: 0.0,
        mu: 1.0,
        ..ModelParams::default()
    };
    let kind = ProblemKind::Nfb;
    let init = InitialData::preset_pair(kind, params.s0, 0.5, 0.0);
    let (n, dt) = (64, 1e-3);
    let mut full = state(&params, kind, &init, n);
    let (mut u, mut s) = (full.u.clone(), full.s);
    for _ in 0..300 {
        full = transformed_step(&full, &params, kind, dt).unwrap();
        one_species_step(&mut u, &mut s, params.mu, dt);
    }
    assert!(full.v.iter().all(|&v| v == 0.0));
    assert!((full.s - s).abs() < 1e-12, "{} vs {s}", full.s);
    let dev = full.u.iter().zip(&u).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    assert!(dev < 1e-12, "profile deviation {dev:e}");
}

#[test]
fn profiles_respect_ceiling_and_positivity() {
    let params = ModelParams {
        k: 0.3,
        h: 0.8,
        r: 1.5,
        d: 0.7,
        mu: 2.0,
        ..ModelParams::default()
    };
    for kind in [ProblemKind::Nfb, ProblemKind::Dfb] {
        let init = InitialData::preset_pair(kind, 2.0, 1.4, 0.9);
        let grid = GridSpec {
            n_cells: 100,
            dt: 1e-3,
            t_max: 20.0,
            snapshot_stride: 500,
            series_stride: 1,
        };
        let record = simulate(&params, kind, &init, &grid).unwrap();
        assert!(record.failure.is_none());
        assert_eq!(record.monitor.bound, a_priori_bound(&init));
        assert!(record.monitor.within_profile_ceiling(), "{:?}", record.monitor);
        for snap in &record.snapshots {
            assert!(snap.u.iter().chain(&snap.v).all(|&y| y >= 0.0));
        }
        record.check_invariants().unwrap();
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    /// A faster-responding front is never behind a slower one.
    #[test]
    fn larger_mu_front_stays_ahead(
        mu1 in 0.05f64..1.5,
        gap in 0.05f64..1.5,
        k in 0.1f64..1.5,
        h in 0.1f64..1.5,
        s0 in 0.8f64..2.5,
        dfb in any::<bool>(),
    ) {
        let kind = if dfb { ProblemKind::Dfb } else { ProblemKind::Nfb };
        let base = ModelParams { k, h, s0, ..ModelParams::default() };
        let init = InitialData::preset(kind, s0, 0.5);
        let grid = GridSpec { n_cells: 80, dt: 2e-3, t_max: 8.0, snapshot_stride: u64::MAX, series_stride: 10 };
        let a = simulate(&base.with_mu(mu1), kind, &init, &grid).unwrap();
        let b = simulate(&base.with_mu(mu1 + gap), kind, &init, &grid).unwrap();
        for (p, q) in a.series.iter().zip(&b.series) {
            prop_assert_eq!(p.t, q.t);
            prop_assert!(p.s <= q.s * (1.0 + 1e-3), "t = {}: {} > {}", p.t, p.s, q.s);
        }
    }
}
