//! NFB run with s0 above the threshold: spreading is certified at once and
//! the profiles settle on the coexistence state behind the front.
//!
//! `cargo run --release --example spreading [t_max]`

use lvfb::classifier::{classify_record, Tolerances};
use lvfb::solver::{simulate, GridSpec};
use lvfb::{coexistence_limit, lambda_threshold, InitialData, ModelParams, ProblemKind};

fn main() -> lvfb::Result<()> {
    let t_max = std::env::args().nth(1).map_or(60.0, |a| a.parse().expect("t_max"));
    let params = ModelParams::default();
    let kind = ProblemKind::Nfb;
    let init = InitialData::preset(kind, params.s0, 0.5);
    let grid = GridSpec {
        t_max,
        ..GridSpec::default()
    };

    let record = simulate(&params, kind, &init, &grid)?;
    let verdict = classify_record(&record, &Tolerances::default())?;
    println!("lambda = {:.6}, s0 = {}", lambda_threshold(&params, kind), params.s0);
    println!(
        "verdict {} (certified at t = {:?})",
        verdict.verdict, verdict.certificate_time
    );

    for p in record.series.iter().step_by(record.series.len() / 10) {
        println!("t = {:7.2}  s = {:9.4}  s' = {:.4}", p.t, p.s, p.s_prime);
    }
    let (u_star, v_star) = coexistence_limit(&params)?;
    let snap = record.final_snapshot().expect("final snapshot");
    for x in [0.0, 2.5, 5.0] {
        let (u, v) = snap.at(x);
        println!("x = {x}: u = {u:.5}, v = {v:.5}  (limit {u_star:.5}, {v_star:.5})");
    }
    Ok(())
}
