// SPDX-License-Identifier: MIT OR Apache-2.0

//! Elimination for the shifted Neumann block `rho I - B`.
//!
//! The pivots are carried as `e_i = d_i - 1`, which satisfy
//! `e_0 = rho`, `e_i = rho + e_{i-1} / (1 + e_{i-1})`. Every step adds
//! positive numbers, so the last pivot `e_{m-1}` (of size about `m rho`) keeps
//! full relative accuracy even when `rho` is tiny.

/// Pivot excesses `e_0..e_{m-1}`; the pivots are `1 + e_i` except the last,
/// which is `e_{m-1}`.
pub(crate) fn pivot_excess(rho: f64, m: usize) -> Vec<f64> {
    let mut e = Vec::with_capacity(m);
    let mut cur = rho;
    for _ in 0..m {
        e.push(cur);
        cur = rho + cur / (1.0 + cur);
    }
    e
}

/// Solve `(rho I - B) x = rhs` in place for an `m x m` Neumann block, `m >= 2`.
pub(crate) fn solve_neumann(rho: f64, rhs: &mut [f64]) {
    let m = rhs.len();
    debug_assert!(m >= 2 && rho > 0.0);
    let e = pivot_excess(rho, m);
    let pivot = |i: usize| if i + 1 == m { e[i] } else { 1.0 + e[i] };
    for i in 1..m {
        rhs[i] += rhs[i - 1] / pivot(i - 1);
    }
    rhs[m - 1] /= pivot(m - 1);
    for i in (0..m - 1).rev() {
        rhs[i] = (rhs[i] + rhs[i + 1]) / pivot(i);
    }
}
