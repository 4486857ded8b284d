//! Drives the command layer from a configuration value instead of the
//! binary: a quick DFB simulation written to a temporary directory.

use lvfb::cli::{cmd_simulate, RunConfig};
use lvfb::ProblemKind;

fn main() -> lvfb::Result<()> {
    let mut cfg = RunConfig::load(None, [("LVFB_GRID__T_MAX".to_string(), "10".to_string())])?;
    cfg.problem.kind = ProblemKind::Dfb;
    cfg.params.s0 = 4.0;
    cfg.output.dir = std::env::temp_dir().join("lvfb-config-run");
    cmd_simulate(&cfg, None, false)?;
    for entry in std::fs::read_dir(&cfg.output.dir)? {
        println!("{}", entry?.path().display());
    }
    Ok(())
}
