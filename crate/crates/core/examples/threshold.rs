//! Brackets the critical front coefficient for NFB with s0 = 1 by geometric
//! bisection, printing each probe as it completes.

use lvfb::classifier::{find_mu_star_resumable, ThresholdSearch};
use lvfb::solver::GridSpec;
use lvfb::{InitialData, ModelParams, ProblemKind};

fn main() -> lvfb::Result<()> {
    let params = ModelParams {
        s0: 1.0,
        ..ModelParams::default()
    };
    let kind = ProblemKind::Nfb;
    let init = InitialData::preset(kind, params.s0, 0.5);
    let grid = GridSpec::default();
    let search = ThresholdSearch::default();

    let bracket = find_mu_star_resumable(&params, kind, &init, &grid, &search, None, |b| {
        let last = b.history.last().unwrap();
        println!(
            "mu = {:<10.6} {:<20} (t_max {}) -> [{:.5}, {:.5}]",
            last.mu, last.verdict, last.t_max, b.mu_lo, b.mu_hi
        );
    })?;
    println!(
        "mu* in [{:.6}, {:.6}], relative width {:.4}",
        bracket.mu_lo,
        bracket.mu_hi,
        bracket.relative_width()
    );
    Ok(())
}
