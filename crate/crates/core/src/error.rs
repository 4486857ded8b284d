use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("no proven long-time limit for h = {h}, k = {k} (both >= 1)")]
    NoProvenLimit { h: f64, k: f64 },

    #[error("blow-up: non-finite value at step {step}")]
    BlowUp { step: u64 },

    #[error("positivity violation at step {step}, node {node}: {value:e}")]
    Positivity { step: u64, node: usize, value: f64 },

    #[error("front retreat at step {step}: s' = {speed:e}")]
    FrontRetreat { step: u64, speed: f64 },

    #[error("newton did not converge after {iterations} iterations (residual {residual:e})")]
    NewtonDivergence { iterations: usize, residual: f64 },

    #[error("internal consistency: {0}")]
    Consistency(String),

    #[error("no threshold exists: s0 = {s0} >= lambda = {lambda}")]
    NoThreshold { s0: f64, lambda: f64 },

    #[error("no bracket: {0}")]
    NoBracket(String),

    #[error("non-monotone verdicts: spreading at mu = {spreading_mu}, vanishing at mu = {vanishing_mu}")]
    NonMonotone { spreading_mu: f64, vanishing_mu: f64 },

    #[error("undetermined verdict at mu = {mu} after {retries} t_max escalations")]
    Undetermined { mu: f64, retries: u32 },

    #[error("no witness: {0}")]
    NoWitness(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
