//! Steady barrier profiles for weak competition on the half-line, checked
//! against a long DFB run.

use lvfb::solver::{simulate, GridSpec};
use lvfb::steady::{build_barriers, check_sandwich, interpolate, HalfLineGrid};
use lvfb::{InitialData, ModelParams, ProblemKind};

fn main() -> lvfb::Result<()> {
    let params = ModelParams {
        s0: 4.0,
        ..ModelParams::default()
    };
    let grid = HalfLineGrid::default();
    let barriers = build_barriers(&params, &grid)?;
    println!("     x   u_low   u_bar   v_low   v_bar");
    for x in [0.5, 1.0, 2.0, 5.0, 10.0] {
        let at = |y: &[f64]| interpolate(&grid, y, x);
        println!(
            "{x:6.2} {:7.4} {:7.4} {:7.4} {:7.4}",
            at(&barriers.u_low),
            at(&barriers.u_bar),
            at(&barriers.v_low),
            at(&barriers.v_bar)
        );
    }

    let kind = ProblemKind::Dfb;
    let init = InitialData::preset(kind, params.s0, 0.5);
    let record = simulate(
        &params,
        kind,
        &init,
        &GridSpec {
            t_max: 150.0,
            ..GridSpec::default()
        },
    )?;
    let report = check_sandwich(&record, &barriers, (0.0, 5.0), 0.02)?;
    println!("{report:#?}");
    Ok(())
}
