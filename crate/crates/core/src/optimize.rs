// SPDX-License-Identifier: MIT OR Apache-2.0

//! Global minimization over partitions.
//!
//! Once the jump set is fixed the optimal function is given by the partition
//! solver, so the global problem becomes
//! `min_p gamma j(p) + sum_blocks c(block)` with the interval cost
//! `c(j, k) = -<g, f*_block> + ||g||^2_block`. [`minimize_dp`] solves this
//! exactly with the recursion
//! `m(k) = min_{j < k} m(j) + gamma [j > 0] + c(j, k)`; [`brute_force_min`]
//! enumerates every partition for small `n`.
//!
//! For `mu = 0` the interval cost is the scatter of the block, read off a
//! compensated prefix table in `O(1)`. For `mu > 0` one row `j` of the table
//! is produced in `O(n - j)` by extending an `LDL^T` factorization of the
//! block matrix one sample at a time.

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::error::{argument, Error, Result};
use crate::exec::Execution;
use crate::functionals::{family_eval, reduced_bz, Candidate, ObjectiveBreakdown, Observation, ParameterPoint};
use crate::grid::{build_prefix, ContinuousSignal, DiscreteSignal, Grid, PrefixTable};
use crate::partitions::{GridPartition, Partition};
use crate::solvers::{cosine_coefficients, partition_solver_continuous, partition_solver_discrete, PiecewiseSolution};

/// Problem-size limits.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Caps {
    /// Largest `n` for the Potts table.
    pub potts_n: usize,
    /// Largest `n` for the Blake-Zisserman table.
    pub bz_n: usize,
    /// Largest `n` for exhaustive enumeration.
    pub brute_force_n: usize,
    /// Largest candidate grid for the continuous minimization.
    pub ms_nref: usize,
}

impl Default for Caps {
    fn default() -> Self {
        Self {
            potts_n: 20_000,
            bz_n: 4_000,
            brute_force_n: 16,
            ms_nref: 512,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolveOptions {
    pub caps: Caps,
    pub execution: Execution,
}

/// Interval costs `c(j, k)`, `0 <= j < k <= n`.
#[derive(Clone, Debug)]
pub enum IntervalCostTable {
    /// Potts costs evaluated on demand from prefix sums of the centered signal.
    Prefix { n: usize, prefix: PrefixTable },
    /// Packed upper triangle, row `j` holding `c(j, j+1..=n)`.
    Dense { n: usize, costs: Vec<f64> },
}

fn row_offset(n: usize, j: usize) -> usize {
    j * n - j * (j.saturating_sub(1)) / 2
}

impl IntervalCostTable {
    pub fn n(&self) -> usize {
        match self {
            IntervalCostTable::Prefix { n, .. } | IntervalCostTable::Dense { n, .. } => *n,
        }
    }

    /// Number of `(j, k)` pairs.
    pub fn entries(&self) -> usize {
        let n = self.n();
        n * (n + 1) / 2
    }

    pub fn cost(&self, j: usize, k: usize) -> f64 {
        debug_assert!(j < k && k <= self.n());
        match self {
            IntervalCostTable::Prefix { n, prefix } => prefix.range_scatter(j, k) / *n as f64,
            IntervalCostTable::Dense { n, costs } => costs[row_offset(*n, j) + (k - j - 1)],
        }
    }
}

fn centered(g: &DiscreteSignal) -> Vec<f64> {
    let mean = g.mean();
    g.values().iter().map(|v| v - mean).collect()
}

/// Costs `c(j, j+1..=n)` for one row, by a growing `LDL^T` factorization of
/// `rho I - B`. With `e_0 = rho` and `e_i = rho + e_{i-1} / (1 + e_{i-1})`
/// the pivots are `1 + e_i`, except the last pivot of a block, which is `e_i`.
/// Appending a sample therefore only closes the previous last pivot.
fn bz_row(v: &[f64], j: usize, rho: f64, n: f64) -> Vec<f64> {
    let len = v.len() - j;
    let mut row = Vec::with_capacity(len);
    row.push(0.0);
    let mut energy = v[j] * v[j];
    // Running sum of y_i^2 / (1 + e_i) over closed pivots.
    let mut quad = 0.0;
    let mut e = rho;
    let mut y = v[j];
    for &gi in &v[j + 1..] {
        energy += gi * gi;
        let closed = 1.0 + e;
        let next_e = rho + e / closed;
        let next_y = gi + y / closed;
        quad += y * y / closed;
        let q = quad + next_y * next_y / next_e;
        row.push(((energy - rho * q) / n).max(0.0));
        y = next_y;
        e = next_e;
    }
    row
}

/// Interval cost table with default options.
pub fn build_cost_table(g: &DiscreteSignal, mu: f64) -> Result<IntervalCostTable> {
    build_cost_table_with(g, mu, &SolveOptions::default())
}

pub fn build_cost_table_with(g: &DiscreteSignal, mu: f64, opts: &SolveOptions) -> Result<IntervalCostTable> {
    if !(mu >= 0.0 && mu.is_finite()) {
        return Err(argument(format!("mu = {mu} must be finite and nonnegative")));
    }
    let n = g.n();
    let v = centered(g);
    if mu == 0.0 {
        if n > opts.caps.potts_n {
            return Err(Error::Resource(format!(
                "n = {n} exceeds the Potts cap {}; raise it with --cap or coarsen the input",
                opts.caps.potts_n
            )));
        }
        let prefix = build_prefix(&DiscreteSignal::new(v)?);
        return Ok(IntervalCostTable::Prefix { n, prefix });
    }
    if n > opts.caps.bz_n {
        return Err(Error::Resource(format!(
            "n = {n} exceeds the Blake-Zisserman cap {} (the table holds n^2/2 entries); \
             raise it with --cap or coarsen the input",
            opts.caps.bz_n
        )));
    }
    let rho = (mu / n as f64).powi(2);
    let rows = opts.execution.map(n, |j| bz_row(&v, j, rho, n as f64));
    Ok(IntervalCostTable::Dense {
        n,
        costs: rows.concat(),
    })
}

/// Relative tolerance under which two objective values count as tied.
const TIE_TOLERANCE: f64 = 1e-12;

fn tied(a: f64, b: f64) -> bool {
    a.is_finite() && b.is_finite() && (a - b).abs() <= TIE_TOLERANCE * (1.0 + a.abs().max(b.abs()))
}

/// Run the recursion over `n` cells and return the optimal value with its
/// interior breakpoints. Among tied values fewer jumps win, then the
/// leftmost last breakpoint.
fn dp_sweep(n: usize, gamma: f64, cost: impl Fn(usize, usize) -> f64) -> (f64, Vec<usize>) {
    let mut best = vec![0.0f64; n + 1];
    let mut jumps = vec![0usize; n + 1];
    let mut arg = vec![0usize; n + 1];
    for k in 1..=n {
        let (mut bv, mut bj, mut ba) = (f64::INFINITY, usize::MAX, 0);
        // Ascending j keeps the leftmost candidate among exact ties.
        for j in 0..k {
            let charge = if j > 0 { gamma } else { 0.0 };
            let base = best[j] + charge;
            if base > bv && !tied(base, bv) {
                continue;
            }
            let value = base + cost(j, k);
            let nj = jumps[j] + usize::from(j > 0);
            let better = if tied(value, bv) { nj < bj } else { value < bv };
            if better {
                (bv, bj, ba) = (value, nj, j);
            }
        }
        best[k] = bv;
        jumps[k] = bj;
        arg[k] = ba;
    }
    let mut breaks = Vec::new();
    let mut k = n;
    while k > 0 {
        k = arg[k];
        if k > 0 {
            breaks.push(k);
        }
    }
    breaks.reverse();
    (best[n], breaks)
}

/// Bookkeeping reported with every minimizer.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    /// Interval costs available to the recursion.
    pub table_entries: usize,
    /// Optimal value as found by the recursion.
    pub dp_value: f64,
    /// Candidate grid of the continuous minimization.
    pub n_ref: Option<usize>,
    pub truncation_warnings: usize,
    #[serde(skip)]
    pub runtime: Duration,
}

/// A global minimizer with its objective value.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SegmentationResult {
    pub solution: PiecewiseSolution,
    pub objective: ObjectiveBreakdown,
    pub parameters: ParameterPoint,
    pub diagnostics: Diagnostics,
}

impl SegmentationResult {
    pub fn partition(&self) -> Partition {
        self.solution.partition()
    }

    pub fn grid_partition(&self) -> Option<&GridPartition> {
        self.solution.as_discrete().map(|d| &d.partition)
    }
}

fn check_parameters(gamma: f64, mu: f64) -> Result<()> {
    if !(gamma >= 0.0 && gamma.is_finite()) {
        return Err(argument(format!("gamma = {gamma} must be finite and nonnegative")));
    }
    if !(mu >= 0.0 && mu.is_finite()) {
        return Err(argument(format!("mu = {mu} must be finite and nonnegative")));
    }
    Ok(())
}

fn discrete_result(
    g: &DiscreteSignal,
    partition: GridPartition,
    gamma: f64,
    mu: f64,
    mut diagnostics: Diagnostics,
    start: Instant,
) -> Result<SegmentationResult> {
    let parameters = ParameterPoint::discrete(gamma, mu, g.n())?;
    let sol = partition_solver_discrete(g, &partition, mu)?;
    let mut objective = family_eval(&parameters, Candidate::Discrete(&sol), Observation::Samples(g))?;
    objective.partition_jumps = partition.jump_count();
    diagnostics.runtime = start.elapsed();
    Ok(SegmentationResult {
        solution: PiecewiseSolution::Discrete(sol),
        objective,
        parameters,
        diagnostics,
    })
}

/// Exact global minimizer of the Blake-Zisserman (`mu > 0`) or Potts
/// (`mu = 0`) functional on the grid of `g`.
pub fn minimize_dp(g: &DiscreteSignal, gamma: f64, mu: f64) -> Result<SegmentationResult> {
    minimize_dp_with(g, gamma, mu, &SolveOptions::default())
}

pub fn minimize_dp_with(g: &DiscreteSignal, gamma: f64, mu: f64, opts: &SolveOptions) -> Result<SegmentationResult> {
    check_parameters(gamma, mu)?;
    let start = Instant::now();
    let table = build_cost_table_with(g, mu, opts)?;
    let (value, breaks) = dp_sweep(g.n(), gamma, |j, k| table.cost(j, k));
    let partition = GridPartition::from_breakpoints(g.grid(), &breaks)?;
    let diagnostics = Diagnostics {
        table_entries: table.entries(),
        dp_value: value,
        ..Default::default()
    };
    discrete_result(g, partition, gamma, mu, diagnostics, start)
}

/// `true` when `(value, breaks)` beats `(best_value, best_breaks)` under the
/// ordering of [`minimize_dp`].
fn lexicographically_better(value: f64, breaks: &[usize], best_value: f64, best_breaks: &[usize]) -> bool {
    if !tied(value, best_value) {
        return value < best_value;
    }
    if breaks.len() != best_breaks.len() {
        return breaks.len() < best_breaks.len();
    }
    breaks.iter().rev().lt(best_breaks.iter().rev())
}

/// Exhaustive minimization over all `2^(n-1)` grid partitions, evaluating
/// each with the reduced functional.
pub fn brute_force_min(g: &DiscreteSignal, gamma: f64, mu: f64) -> Result<SegmentationResult> {
    brute_force_min_with(g, gamma, mu, &SolveOptions::default())
}

pub fn brute_force_min_with(g: &DiscreteSignal, gamma: f64, mu: f64, opts: &SolveOptions) -> Result<SegmentationResult> {
    check_parameters(gamma, mu)?;
    let n = g.n();
    if n > opts.caps.brute_force_n {
        return Err(Error::Resource(format!(
            "brute force enumerates 2^(n-1) partitions; n = {n} exceeds the cap {}",
            opts.caps.brute_force_n
        )));
    }
    let start = Instant::now();
    let grid = g.grid();
    let count = 1usize << (n - 1);
    let mut best_value = f64::INFINITY;
    let mut best_breaks: Vec<usize> = Vec::new();
    for mask in 0..count {
        let breaks: Vec<usize> = (1..n).filter(|&k| mask >> (k - 1) & 1 == 1).collect();
        let p = GridPartition::from_breakpoints(grid, &breaks)?;
        let value = reduced_bz(&p, g, gamma, mu)?;
        if best_value.is_infinite() || lexicographically_better(value, &breaks, best_value, &best_breaks) {
            best_value = value;
            best_breaks = breaks;
        }
    }
    let partition = GridPartition::from_breakpoints(grid, &best_breaks)?;
    let diagnostics = Diagnostics {
        table_entries: count,
        dp_value: best_value,
        ..Default::default()
    };
    discrete_result(g, partition, gamma, mu, diagnostics, start)
}

/// Continuous minimization restricted to partitions with points on
/// `{k / n_ref}`, using `modes` cosine modes per interval.
pub fn minimize_ms_grid(
    g: &ContinuousSignal,
    gamma: f64,
    mu: f64,
    n_ref: usize,
    modes: usize,
) -> Result<SegmentationResult> {
    minimize_ms_grid_with(g, gamma, mu, n_ref, modes, &SolveOptions::default())
}

pub fn minimize_ms_grid_with(
    g: &ContinuousSignal,
    gamma: f64,
    mu: f64,
    n_ref: usize,
    modes: usize,
    opts: &SolveOptions,
) -> Result<SegmentationResult> {
    check_parameters(gamma, mu)?;
    if n_ref == 0 {
        return Err(argument("the candidate grid needs n_ref >= 1"));
    }
    if modes == 0 {
        return Err(argument("truncation order must be at least 1"));
    }
    if n_ref > opts.caps.ms_nref {
        return Err(Error::Resource(format!(
            "n_ref = {n_ref} exceeds the cap {}; raise it with --cap",
            opts.caps.ms_nref
        )));
    }
    let start = Instant::now();
    let grid = Grid::new(n_ref)?;
    // Interval costs are invariant under adding a constant.
    let h = g.offset(-g.mean());
    let rows = opts.execution.map(n_ref, |j| {
        let lo = grid.point(j);
        (j + 1..=n_ref)
            .map(|k| {
                let hi = grid.point(k);
                let energy = h.integral_sq_offset(lo, hi, 0.0);
                let captured = if mu == 0.0 {
                    (h.integral(lo, hi)).powi(2) / (hi - lo)
                } else {
                    let len = hi - lo;
                    let mu2 = mu * mu;
                    cosine_coefficients(&h, lo, hi, modes)
                        .iter()
                        .enumerate()
                        .map(|(s, c)| {
                            let w = s as f64 * std::f64::consts::PI / len;
                            mu2 / (mu2 + w * w) * c * c
                        })
                        .sum()
                };
                (energy - captured).max(0.0)
            })
            .collect::<Vec<f64>>()
    });
    let costs = rows.concat();
    let (value, breaks) = dp_sweep(n_ref, gamma, |j, k| costs[row_offset(n_ref, j) + (k - j - 1)]);
    let partition = GridPartition::from_breakpoints(grid, &breaks)?.to_partition();
    let parameters = ParameterPoint::continuous(gamma, mu)?;
    let sol = partition_solver_continuous(g, &partition, mu, modes)?;
    let objective = family_eval(&parameters, Candidate::Continuous(&sol), Observation::Signal(g))?;
    let diagnostics = Diagnostics {
        table_entries: costs.len(),
        dp_value: value,
        n_ref: Some(n_ref),
        truncation_warnings: sol.warnings.len(),
        runtime: start.elapsed(),
    };
    Ok(SegmentationResult {
        solution: PiecewiseSolution::Continuous(sol),
        objective,
        parameters,
        diagnostics,
    })
}
