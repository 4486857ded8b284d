//! Searches for an explicit vanishing super-solution for DFB with s0 = 2,
//! prints the certificate, and confirms by simulation at half the certified
//! coefficient.

use lvfb::barriers::{search_mu0, SearchSpec};
use lvfb::classifier::{probe, Tolerances};
use lvfb::solver::GridSpec;
use lvfb::{InitialData, ModelParams, ProblemKind};

fn main() -> lvfb::Result<()> {
    let params = ModelParams::default();
    let kind = ProblemKind::Dfb;
    let init = InitialData::preset(kind, params.s0, 0.5);
    let (mu0, cert) = search_mu0(&params, kind, &init, &SearchSpec::default())?;
    println!("{}", serde_json::to_string_pretty(&cert)?);

    let grid = GridSpec {
        t_max: 100.0,
        ..GridSpec::default()
    };
    let c = probe(&params.with_mu(mu0 / 2.0), kind, &init, &grid, &Tolerances::default())?;
    println!(
        "mu = {:.6}: {} with final s = {:.6} <= {:.6}",
        mu0 / 2.0,
        c.verdict,
        c.evidence.final_s,
        cert.front_bound
    );
    Ok(())
}
