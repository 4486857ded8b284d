//! Numerical laboratory for one-dimensional free-boundary Lotka-Volterra
//! competition problems with a no-flux (NFB) or Dirichlet (DFB) origin.

pub mod barriers;
pub mod classifier;
pub mod cli;
pub mod error;
pub mod model;
pub mod odelimits;
pub mod solver;
pub mod steady;
pub mod tridiag;

pub use error::{Error, Result};
pub use model::{
    a_priori_bound, classify_regime, coexistence_limit, lambda_threshold, InitSpec, InitialData, InitialShape,
    ModelParams, ProblemKind, Regime,
};
