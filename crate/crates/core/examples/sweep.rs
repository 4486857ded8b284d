//! Parallel (mu, s0) sweep, summarised as CSV on stdout. The full sweep CSV
//! format is produced by `write_sweep_csv` and the `sweep` command.

use lvfb::classifier::{mu_s0_plan, sweep, SweepRow, Tolerances};
use lvfb::solver::GridSpec;
use lvfb::{InitSpec, ModelParams, ProblemKind};

fn main() -> lvfb::Result<()> {
    let plan = mu_s0_plan(&ModelParams::default(), &[0.01, 0.1, 1.0], &[0.5, 1.0, 2.0]);
    let grid = GridSpec {
        n_cells: 200,
        dt: 1e-3,
        t_max: 40.0,
        ..GridSpec::default()
    };
    let rows = sweep(
        &plan,
        ProblemKind::Nfb,
        &InitSpec::default(),
        &grid,
        &Tolerances::default(),
    )?;
    println!("key,mu,s0,verdict,final_s");
    for SweepRow { key, params, outcome } in rows {
        match outcome {
            Ok(c) => println!(
                "{key},{},{},{},{:.5}",
                params.mu, params.s0, c.verdict, c.evidence.final_s
            ),
            Err(e) => println!("{key},{},{},Error,{e}", params.mu, params.s0),
        }
    }
    Ok(())
}
