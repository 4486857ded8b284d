use lvfb::odelimits::{integrate_ode, iterate_bounds, v_low_closed_form};
use lvfb::{coexistence_limit, Error, ModelParams};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn weak_competition_converges(k in 0.05f64..0.8, h in 0.05f64..0.8, r in 0.3f64..3.0, u0 in 0.01f64..2.0, v0 in 0.01f64..2.0) {
        let params = ModelParams { k, h, r, ..ModelParams::default() };
        let last = *integrate_ode(&params, u0, v0, 300.0).unwrap().last().unwrap();
        let den = 1.0 - h * k;
        prop_assert!((last.u - (1.0 - k) / den).abs() < 1e-3);
        prop_assert!((last.v - (1.0 - h) / den).abs() < 1e-3);
    }

    #[test]
    fn recurrence_matches_geometric_sum(h in 0.01f64..0.99, k in 1.0f64..4.0, j in 1usize..60) {
        let seq = iterate_bounds(h, k, j).unwrap();
        prop_assert!(seq.pairs.len() <= j);
        for (idx, &(u_bar, v_low)) in seq.pairs.iter().enumerate() {
            prop_assert!((v_low - v_low_closed_form(h, k, idx + 1)).abs() <= 1e-12);
            prop_assert!((v_low - (1.0 - h * u_bar)).abs() <= 1e-15);
        }
        if seq.pairs.len() < j {
            prop_assert!(k * seq.v_low(seq.pairs.len()) >= 1.0);
        }
    }
}

#[test]
fn uncovered_regime_has_no_limit() {
    let params = ModelParams {
        k: 1.5,
        h: 2.0,
        ..ModelParams::default()
    };
    assert!(matches!(coexistence_limit(&params), Err(Error::NoProvenLimit { .. })));
    // the trajectory itself is still computed
    assert!(integrate_ode(&params, 0.5, 0.5, 10.0).is_ok());
}
