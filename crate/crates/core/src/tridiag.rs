//! Thomas algorithm for diagonally dominant tridiagonal systems.

/// Solves `A x = rhs` in place, where row `i` of `A` is
/// `lower[i] x[i-1] + diag[i] x[i] + upper[i] x[i+1]`.
///
/// `lower[0]` and `upper[n-1]` are ignored. `scratch` must have the same
/// length as `rhs`. No pivoting: callers guarantee diagonal dominance.
pub fn solve_in_place(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &mut [f64], scratch: &mut [f64]) {
    let n = rhs.len();
    debug_assert!(lower.len() == n && diag.len() == n && upper.len() == n && scratch.len() == n);
    if n == 0 {
        return;
    }
    let mut beta = diag[0];
    rhs[0] /= beta;
    for i in 1..n {
        scratch[i] = upper[i - 1] / beta;
        beta = diag[i] - lower[i] * scratch[i];
        rhs[i] = (rhs[i] - lower[i] * rhs[i - 1]) / beta;
    }
    for i in (0..n - 1).rev() {
        rhs[i] -= scratch[i + 1] * rhs[i + 1];
    }
}
