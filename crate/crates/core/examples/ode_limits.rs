//! Kinetic limits of the competition ODE in each covered regime, plus the
//! bound iteration behind competitive exclusion.

use lvfb::odelimits::{integrate_ode, iterate_bounds, v_low_closed_form};
use lvfb::{classify_regime, coexistence_limit, ModelParams};

fn main() -> lvfb::Result<()> {
    for (k, h) in [(0.5, 0.5), (0.5, 1.5), (1.5, 0.5), (2.0, 2.0)] {
        let params = ModelParams {
            k,
            h,
            ..ModelParams::default()
        };
        let last = *integrate_ode(&params, 0.2, 0.3, 200.0)?.last().unwrap();
        let limit = coexistence_limit(&params).map_or("none proven".to_string(), |l| format!("{l:.6?}"));
        println!(
            "k = {k}, h = {h}: {:?}, (u, v)(200) = ({:.6}, {:.6}), limit {limit}",
            classify_regime(&params),
            last.u,
            last.v
        );
    }

    let seq = iterate_bounds(0.5, 1.0, 12)?;
    println!(" j   u_bar_j   v_low_j   closed form");
    for (j, (u, v)) in seq.pairs.iter().enumerate() {
        println!("{:2} {u:9.6} {v:9.6} {:9.6}", j + 1, v_low_closed_form(0.5, 1.0, j + 1));
    }
    Ok(())
}
