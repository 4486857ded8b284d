//! Small habitat and slow front: both species die out and the front stalls
//! below the threshold.

use lvfb::classifier::{classify_record, Tolerances};
use lvfb::solver::{simulate, GridSpec};
use lvfb::{lambda_threshold, InitialData, ModelParams, ProblemKind};

fn main() -> lvfb::Result<()> {
    let params = ModelParams {
        s0: 0.5,
        mu: 0.01,
        ..ModelParams::default()
    };
    let kind = ProblemKind::Nfb;
    let init = InitialData::preset(kind, params.s0, 0.5);
    let grid = GridSpec {
        t_max: 100.0,
        ..GridSpec::default()
    };

    let record = simulate(&params, kind, &init, &grid)?;
    let c = classify_record(&record, &Tolerances::default())?;
    println!("verdict: {}", c.verdict);
    println!(
        "final s = {:.6} (lambda = {:.6}), sup u = {:e}, sup v = {:e}",
        c.evidence.final_s,
        lambda_threshold(&params, kind),
        c.evidence.final_sup_u,
        c.evidence.final_sup_v
    );
    println!("ceiling monitor: {:?}", record.monitor);
    Ok(())
}
