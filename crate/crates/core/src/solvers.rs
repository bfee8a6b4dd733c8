// SPDX-License-Identifier: MIT OR Apache-2.0

//! Partition solvers: the unique minimizer of the quadratic part of the
//! functional once the jump set is fixed.
//!
//! On every block the discrete problem is the symmetric tridiagonal system
//! `(n^2 B - mu^2) f = -mu^2 g` with `B` the Neumann second-difference
//! matrix. The continuous problem `-mu^-2 f'' + f = g` with Neumann ends is
//! diagonal in the cosine basis `sqrt(2/L) cos(s pi (x - a) / L)`, where the
//! solution coefficient is `mu^2 / (mu^2 + (s pi / L)^2)` times the signal's.
//! For `mu = 0` both reduce to block means.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{argument, Error, Result};
use crate::grid::{ContinuousSignal, DiscreteSignal};
use crate::l2;
use crate::partitions::{GridPartition, Partition};
use crate::tridiag;

/// Default number of cosine modes per block.
pub const DEFAULT_MODES: usize = 256;

/// Relative tail level above which a truncation warning is raised.
pub const TRUNCATION_LEVEL: f64 = 1e-14;

/// Eigenvalues `2 (cos(pi (s - 1) / m) - 1)`, `s = 1..m`, of the `m x m`
/// Neumann block matrix, in descending order starting at 0.
pub fn block_eigenvalues(m: usize) -> Vec<f64> {
    (0..m)
        .map(|s| 2.0 * ((PI * s as f64 / m as f64).cos() - 1.0))
        .collect()
}

/// Largest nonzero eigenvalue of the block matrix scaled by `n^2`, or `None`
/// for single-sample blocks.
pub fn discrete_spectral_gap(m: usize, n: usize) -> Option<f64> {
    (m >= 2).then(|| {
        let nn = n as f64;
        // 2 (1 - cos x) = 4 sin^2(x/2) avoids cancellation for long blocks.
        let half = (PI / (2.0 * m as f64)).sin();
        nn * nn * 4.0 * half * half
    })
}

/// One block of the discrete problem.
#[derive(Clone, Copy, Debug)]
pub struct BlockSystem<'a> {
    g_block: &'a [f64],
    n: usize,
    mu: f64,
}

impl<'a> BlockSystem<'a> {
    pub fn new(g_block: &'a [f64], n: usize, mu: f64) -> Result<Self> {
        if g_block.is_empty() {
            return Err(argument("block must contain at least one sample"));
        }
        if g_block.len() > n {
            return Err(argument(format!(
                "block of {} samples does not fit a grid of {n}",
                g_block.len()
            )));
        }
        if !(mu >= 0.0 && mu.is_finite()) {
            return Err(argument(format!("mu = {mu} must be finite and nonnegative")));
        }
        Ok(Self { g_block, n, mu })
    }

    pub fn len(&self) -> usize {
        self.g_block.len()
    }

    pub fn is_empty(&self) -> bool {
        self.g_block.is_empty()
    }
}

/// Solve `(n^2 B - mu^2 I) f = -mu^2 g` on one block by forward elimination
/// and back substitution.
pub fn solve_block_discrete(sys: &BlockSystem<'_>) -> Result<Vec<f64>> {
    if sys.mu <= 0.0 {
        return Err(Error::Routing(
            "mu = 0 blocks are solved by their mean (solve_block_mean)".into(),
        ));
    }
    let m = sys.len();
    if m == 1 {
        return Ok(sys.g_block.to_vec());
    }
    // Divide by n^2: (rho I - B) f = rho g with rho = (mu / n)^2, which is
    // symmetric positive definite.
    let rho = (sys.mu / sys.n as f64).powi(2);
    let mut rhs: Vec<f64> = sys.g_block.iter().map(|g| rho * g).collect();
    tridiag::solve_neumann(rho, &mut rhs);
    Ok(rhs)
}

/// Constant block equal to the mean of `g_block`.
pub fn solve_block_mean(g_block: &[f64]) -> Result<Vec<f64>> {
    if g_block.is_empty() {
        return Err(argument("cannot average an empty block"));
    }
    let mean = g_block.iter().sum::<f64>() / g_block.len() as f64;
    Ok(vec![mean; g_block.len()])
}

/// Fixed-partition minimizer on the grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiscreteSolution {
    pub partition: GridPartition,
    pub mu: f64,
    values: DiscreteSignal,
}

impl DiscreteSolution {
    /// Wrap externally supplied values (e.g. a stored result) on a partition.
    pub fn from_parts(partition: GridPartition, mu: f64, values: DiscreteSignal) -> Result<Self> {
        if partition.grid() != values.grid() {
            return Err(argument("solution values and partition use different grids"));
        }
        Ok(Self {
            partition,
            mu,
            values,
        })
    }

    pub fn values(&self) -> &DiscreteSignal {
        &self.values
    }

    pub fn into_values(self) -> DiscreteSignal {
        self.values
    }

    /// Number of block boundaries across which the solution changes value.
    pub fn effective_jumps(&self) -> usize {
        let v = self.values.values();
        self.partition
            .interior()
            .iter()
            .filter(|&&k| v[k] != v[k - 1])
            .count()
    }
}

/// Cosine-series solution on one interval `(lo, hi)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralBlock {
    pub lo: f64,
    pub hi: f64,
    /// Solution coefficients `c_0..c_S` in the normalized cosine basis.
    pub coefficients: Vec<f64>,
    /// Signal coefficients for the same modes.
    pub signal_coefficients: Vec<f64>,
    /// `int_lo^hi g^2`.
    pub signal_norm_sq: f64,
}

impl SpectralBlock {
    pub fn length(&self) -> f64 {
        self.hi - self.lo
    }

    /// Angular frequency of mode `s`.
    pub fn frequency(&self, s: usize) -> f64 {
        s as f64 * PI / self.length()
    }

    pub fn eval(&self, x: f64) -> f64 {
        let len = self.length();
        let mut acc = self.coefficients[0] / len.sqrt();
        let scale = (2.0 / len).sqrt();
        for (s, c) in self.coefficients.iter().enumerate().skip(1) {
            acc += c * scale * (self.frequency(s) * (x - self.lo)).cos();
        }
        acc
    }

    /// `<g, f>` on this block.
    pub fn inner_with_signal(&self) -> f64 {
        self.coefficients
            .iter()
            .zip(&self.signal_coefficients)
            .map(|(c, g)| c * g)
            .sum()
    }

    pub fn norm_sq(&self) -> f64 {
        self.coefficients.iter().map(|c| c * c).sum()
    }

    /// `int |f'|^2` on this block.
    pub fn derivative_energy(&self) -> f64 {
        self.coefficients
            .iter()
            .enumerate()
            .skip(1)
            .map(|(s, c)| (self.frequency(s) * c).powi(2))
            .sum()
    }

    pub fn is_constant(&self) -> bool {
        self.coefficients.iter().skip(1).all(|&c| c == 0.0)
    }
}

/// Raised when the signal's cosine coefficients have not decayed by the
/// truncation order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TruncationWarning {
    pub block: usize,
    pub tail_energy: f64,
    pub threshold: f64,
}

/// Fixed-partition minimizer of the continuous functional.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContinuousSolution {
    pub partition: Partition,
    pub mu: f64,
    pub blocks: Vec<SpectralBlock>,
    pub warnings: Vec<TruncationWarning>,
}

impl ContinuousSolution {
    pub fn eval(&self, x: f64) -> f64 {
        let i = self
            .blocks
            .partition_point(|b| b.hi <= x)
            .min(self.blocks.len() - 1);
        self.blocks[i].eval(x)
    }

    pub fn norm_sq(&self) -> f64 {
        self.blocks.iter().map(SpectralBlock::norm_sq).sum()
    }

    pub fn inner_with_signal(&self) -> f64 {
        self.blocks.iter().map(SpectralBlock::inner_with_signal).sum()
    }

    pub fn signal_norm_sq(&self) -> f64 {
        self.blocks.iter().map(|b| b.signal_norm_sq).sum()
    }

    pub fn derivative_energy(&self) -> f64 {
        self.blocks.iter().map(SpectralBlock::derivative_energy).sum()
    }

    pub fn is_piecewise_constant(&self) -> bool {
        self.blocks.iter().all(SpectralBlock::is_constant)
    }

    /// Rebuild a solution from stored coefficients, recomputing the signal side.
    pub fn from_coefficients(
        g: &ContinuousSignal,
        partition: Partition,
        mu: f64,
        coefficients: Vec<Vec<f64>>,
    ) -> Result<Self> {
        if coefficients.len() != partition.len() - 1 {
            return Err(argument("one coefficient list per interval is required"));
        }
        let blocks = partition
            .intervals()
            .into_iter()
            .zip(coefficients)
            .map(|(iv, coefficients)| {
                if coefficients.is_empty() {
                    return Err(argument("empty coefficient list"));
                }
                let signal_coefficients =
                    cosine_coefficients(g, iv.lo, iv.hi, coefficients.len() - 1);
                Ok(SpectralBlock {
                    lo: iv.lo,
                    hi: iv.hi,
                    coefficients,
                    signal_coefficients,
                    signal_norm_sq: g.integral_sq_offset(iv.lo, iv.hi, 0.0),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            partition,
            mu,
            blocks,
            warnings: Vec::new(),
        })
    }
}

/// Output of either partition solver.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PiecewiseSolution {
    Discrete(DiscreteSolution),
    Continuous(ContinuousSolution),
}

impl PiecewiseSolution {
    pub fn partition(&self) -> Partition {
        match self {
            PiecewiseSolution::Discrete(d) => d.partition.to_partition(),
            PiecewiseSolution::Continuous(c) => c.partition.clone(),
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            PiecewiseSolution::Discrete(d) => {
                let v = d.values();
                v.values()[v.grid().cell_of(x)]
            }
            PiecewiseSolution::Continuous(c) => c.eval(x),
        }
    }

    pub fn norm(&self) -> f64 {
        match self {
            PiecewiseSolution::Discrete(d) => d.values().norm(),
            PiecewiseSolution::Continuous(c) => c.norm_sq().sqrt(),
        }
    }

    /// L2 distance between the two solutions as functions on `[0, 1]`.
    pub fn l2_distance(&self, other: &PiecewiseSolution) -> f64 {
        l2::distance_sq(&l2::pieces_of(self), &l2::pieces_of(other)).sqrt()
    }

    pub fn as_discrete(&self) -> Option<&DiscreteSolution> {
        match self {
            PiecewiseSolution::Discrete(d) => Some(d),
            PiecewiseSolution::Continuous(_) => None,
        }
    }

    pub fn as_continuous(&self) -> Option<&ContinuousSolution> {
        match self {
            PiecewiseSolution::Continuous(c) => Some(c),
            PiecewiseSolution::Discrete(_) => None,
        }
    }
}

/// Minimizer of the fixed-partition objective on the grid: block-wise
/// tridiagonal solves for `mu > 0`, block means for `mu = 0`.
pub fn partition_solver_discrete(
    g: &DiscreteSignal,
    p: &GridPartition,
    mu: f64,
) -> Result<DiscreteSolution> {
    if p.grid() != g.grid() {
        return Err(argument(format!(
            "partition on {} cells does not match signal on {}",
            p.grid().n(),
            g.n()
        )));
    }
    if !(mu >= 0.0 && mu.is_finite()) {
        return Err(argument(format!("mu = {mu} must be finite and nonnegative")));
    }
    let n = g.n();
    let mut values = Vec::with_capacity(n);
    for (j, k) in p.blocks() {
        let block = &g.values()[j..k];
        let solved = if mu == 0.0 {
            solve_block_mean(block)?
        } else {
            solve_block_discrete(&BlockSystem::new(block, n, mu)?)?
        };
        values.extend(solved);
    }
    Ok(DiscreteSolution {
        partition: p.clone(),
        mu,
        values: DiscreteSignal::new(values)?,
    })
}

/// Antiderivative of `q(y) cos(w y)` for a local cubic `q`, given
/// `sin(w y)` and `cos(w y)`.
fn cos_poly_antiderivative(q: &[f64; 4], w: f64, y: f64, sin: f64, cos: f64) -> f64 {
    let val = ((q[3] * y + q[2]) * y + q[1]) * y + q[0];
    let d1 = (3.0 * q[3] * y + 2.0 * q[2]) * y + q[1];
    let d2 = 6.0 * q[3] * y + 2.0 * q[2];
    let d3 = 6.0 * q[3];
    let w2 = w * w;
    sin / w * (val - d2 / w2) + cos / w2 * (d1 - d3 / w2)
}

/// `int_a^b g phi_s` for `s = 0..=modes`, with `phi_0 = 1/sqrt(L)` and
/// `phi_s = sqrt(2/L) cos(s pi (x - a) / L)`.
pub fn cosine_coefficients(g: &ContinuousSignal, a: f64, b: f64, modes: usize) -> Vec<f64> {
    let len = b - a;
    let mut out = vec![0.0; modes + 1];
    out[0] = g.integral(a, b) / len.sqrt();
    for (u, v, poly) in g.overlaps(a, b) {
        let q = poly.shifted(a).0;
        let (yu, yv) = (u - a, v - a);
        for (s, slot) in out.iter_mut().enumerate().skip(1) {
            let w = s as f64 * PI / len;
            let (su, cu) = if yu == 0.0 { (0.0, 1.0) } else { (w * yu).sin_cos() };
            let (sv, cv) = if yv == len {
                (0.0, if s % 2 == 0 { 1.0 } else { -1.0 })
            } else {
                (w * yv).sin_cos()
            };
            *slot += cos_poly_antiderivative(&q, w, yv, sv, cv)
                - cos_poly_antiderivative(&q, w, yu, su, cu);
        }
    }
    let scale = (2.0 / len).sqrt();
    for c in out.iter_mut().skip(1) {
        *c *= scale;
    }
    out
}

fn spectral_block(
    g: &ContinuousSignal,
    lo: f64,
    hi: f64,
    mu: f64,
    modes: usize,
) -> (SpectralBlock, Option<f64>) {
    let signal_norm_sq = g.integral_sq_offset(lo, hi, 0.0);
    if mu == 0.0 {
        let g0 = g.integral(lo, hi) / (hi - lo).sqrt();
        let block = SpectralBlock {
            lo,
            hi,
            coefficients: vec![g0],
            signal_coefficients: vec![g0],
            signal_norm_sq,
        };
        return (block, None);
    }
    let signal_coefficients = cosine_coefficients(g, lo, hi, modes);
    let len = hi - lo;
    let mu2 = mu * mu;
    let coefficients = signal_coefficients
        .iter()
        .enumerate()
        .map(|(s, &gs)| {
            let w = s as f64 * PI / len;
            mu2 / (mu2 + w * w) * gs
        })
        .collect();
    // Look at the last two modes so an odd/even cancellation cannot hide the tail.
    let tail = signal_coefficients
        .iter()
        .rev()
        .take(2.min(modes))
        .map(|c| c * c)
        .fold(0.0, f64::max);
    let block = SpectralBlock {
        lo,
        hi,
        coefficients,
        signal_coefficients,
        signal_norm_sq,
    };
    (block, Some(tail))
}

/// Fixed-partition minimizer of the continuous functional, truncated at
/// `modes` cosine modes per interval. `mu = 0` yields interval means.
pub fn partition_solver_continuous(
    g: &ContinuousSignal,
    p: &Partition,
    mu: f64,
    modes: usize,
) -> Result<ContinuousSolution> {
    if modes < 1 {
        return Err(argument("truncation order must be at least 1"));
    }
    if !(mu >= 0.0 && mu.is_finite()) {
        return Err(argument(format!("mu = {mu} must be finite and nonnegative")));
    }
    let threshold = TRUNCATION_LEVEL * g.norm_sq();
    let mut warnings = Vec::new();
    let blocks = p
        .intervals()
        .into_iter()
        .enumerate()
        .map(|(i, iv)| {
            let (block, tail) = spectral_block(g, iv.lo, iv.hi, mu, modes);
            if let Some(t) = tail.filter(|&t| t > threshold) {
                warnings.push(TruncationWarning {
                    block: i,
                    tail_energy: t,
                    threshold,
                });
            }
            block
        })
        .collect();
    Ok(ContinuousSolution {
        partition: p.clone(),
        mu,
        blocks,
        warnings,
    })
}

/// Lipschitz constant of `mu^2 -> f*(mu)` on the grid:
/// `||g_n|| / min_blocks |n^2 lambda_1|`. Zero when every block is a single sample.
pub fn lipschitz_bound_discrete(g: &DiscreteSignal, p: &GridPartition) -> f64 {
    let n = g.n();
    p.blocks()
        .filter_map(|(j, k)| discrete_spectral_gap(k - j, n))
        .map(|gap| g.norm() / gap)
        .fold(0.0, f64::max)
}

/// Continuous counterpart: `||g|| L_max^2 / pi^2`.
pub fn lipschitz_bound_continuous(g: &ContinuousSignal, p: &Partition) -> f64 {
    let len = p.max_gap();
    g.norm() * len * len / (PI * PI)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{discretize, Cubic, Grid};

    #[test]
    fn eigenvalue_examples() {
        assert_eq!(block_eigenvalues(1), vec![0.0]);
        let e2 = block_eigenvalues(2);
        assert_eq!(e2[0], 0.0);
        assert!((e2[1] + 2.0).abs() < 1e-15);
    }

    fn dense_block(m: usize) -> Vec<Vec<f64>> {
        let mut b = vec![vec![0.0; m]; m];
        for i in 0..m {
            if i > 0 {
                b[i][i - 1] = 1.0;
                b[i][i] -= 1.0;
            }
            if i + 1 < m {
                b[i][i + 1] = 1.0;
                b[i][i] -= 1.0;
            }
        }
        b
    }

    fn det(mut a: Vec<Vec<f64>>) -> f64 {
        let m = a.len();
        let mut d = 1.0;
        for c in 0..m {
            let p = (c..m)
                .max_by(|&x, &y| a[x][c].abs().partial_cmp(&a[y][c].abs()).unwrap())
                .unwrap();
            if a[p][c] == 0.0 {
                return 0.0;
            }
            if p != c {
                a.swap(p, c);
                d = -d;
            }
            d *= a[c][c];
            let (top, rest) = a.split_at_mut(c + 1);
            let pivot = &top[c];
            for row in rest {
                let f = row[c] / pivot[c];
                for (x, y) in row[c..].iter_mut().zip(&pivot[c..]) {
                    *x -= f * y;
                }
            }
        }
        d
    }

    #[test]
    fn eigenvalues_are_roots_of_block_determinant() {
        let b = dense_block(4);
        for lambda in block_eigenvalues(4) {
            let mut shifted = b.clone();
            for (i, row) in shifted.iter_mut().enumerate() {
                row[i] -= lambda;
            }
            assert!(det(shifted).abs() < 1e-9);
        }
    }

    #[test]
    fn constant_block_is_fixed() {
        let g = vec![2.5; 7];
        for mu in [0.1, 1.0, 30.0] {
            let f = solve_block_discrete(&BlockSystem::new(&g, 10, mu).unwrap()).unwrap();
            for v in f {
                assert!((v - 2.5).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn large_mu_reproduces_signal() {
        let g = vec![0.3, -1.0, 2.0, 0.7, 0.1];
        let n = 5;
        let f = solve_block_discrete(&BlockSystem::new(&g, n, 1e6 * n as f64).unwrap()).unwrap();
        for (a, b) in f.iter().zip(&g) {
            assert!((a - b).abs() <= 1e-3 * b.abs().max(1e-3));
        }
    }

    #[test]
    fn two_by_two_hand_solution() {
        let f = solve_block_discrete(&BlockSystem::new(&[0.0, 1.0], 2, 1.0).unwrap()).unwrap();
        assert!((f[0] - 4.0 / 9.0).abs() < 1e-15);
        assert!((f[1] - 5.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn residual_is_small() {
        let g: Vec<f64> = (0..50).map(|i| ((i * 7919) % 13) as f64 / 13.0 - 0.4).collect();
        let (n, mu) = (80usize, 3.0);
        let f = solve_block_discrete(&BlockSystem::new(&g, n, mu).unwrap()).unwrap();
        let nn = (n * n) as f64;
        let m = g.len();
        let mut res = 0.0f64;
        for i in 0..m {
            let left = if i > 0 { f[i - 1] - f[i] } else { 0.0 };
            let right = if i + 1 < m { f[i + 1] - f[i] } else { 0.0 };
            let r = nn * (left + right) - mu * mu * f[i] + mu * mu * g[i];
            res += r * r;
        }
        let gnorm: f64 = g.iter().map(|x| x * x).sum::<f64>().sqrt();
        // Row scale is n^2, so compare against n^2 ||g|| eps-level.
        assert!(res.sqrt() <= 1e-10 * gnorm * nn);
    }

    #[test]
    fn routing_and_argument_errors() {
        assert!(matches!(
            solve_block_discrete(&BlockSystem::new(&[1.0], 1, 0.0).unwrap()),
            Err(Error::Routing(_))
        ));
        assert!(BlockSystem::new(&[], 1, 1.0).is_err());
        assert!(solve_block_mean(&[]).is_err());
    }

    #[test]
    fn mean_examples() {
        assert_eq!(solve_block_mean(&[1.0, 3.0]).unwrap(), vec![2.0, 2.0]);
        assert_eq!(solve_block_mean(&[4.2]).unwrap(), vec![4.2]);
    }

    #[test]
    fn small_mu_approaches_mean() {
        let g = [0.0, 1.0, 3.0, -1.0];
        let mean = solve_block_mean(&g).unwrap()[0];
        let dev = |mu: f64| {
            solve_block_discrete(&BlockSystem::new(&g, 4, mu).unwrap())
                .unwrap()
                .iter()
                .map(|v| (v - mean).abs())
                .fold(0.0, f64::max)
        };
        let (d3, d4) = (dev(1e-3), dev(1e-4));
        // O(mu^2): a tenfold smaller mu shrinks the deviation about a hundredfold.
        assert!(d3 < 1e-6);
        assert!((d3 / d4 - 100.0).abs() < 1.0, "ratio {}", d3 / d4);
    }

    #[test]
    fn discrete_partition_solver_examples() {
        let g = DiscreteSignal::new(vec![0.0, 0.0, 1.0, 1.0]).unwrap();
        let grid = g.grid();
        let trivial = partition_solver_discrete(&g, &GridPartition::trivial(grid), 0.0).unwrap();
        assert_eq!(trivial.values().values(), &[0.5; 4]);
        let full = partition_solver_discrete(&g, &GridPartition::full(grid), 2.0).unwrap();
        assert_eq!(full.values(), &g);
        let split = GridPartition::new(grid, vec![0, 2, 4]).unwrap();
        let s = partition_solver_discrete(&g, &split, 0.0).unwrap();
        assert_eq!(s.values().values(), &[0.0, 0.0, 1.0, 1.0]);
        assert_eq!(s.effective_jumps(), 1);
        let other = GridPartition::trivial(Grid::new(5).unwrap());
        assert!(partition_solver_discrete(&g, &other, 0.0).is_err());
    }

    #[test]
    fn continuous_constant_signal() {
        let g = ContinuousSignal::constant(1.5);
        let p = Partition::new(vec![0.0, 0.3, 1.0]).unwrap();
        for mu in [0.0, 0.5, 4.0] {
            let sol = partition_solver_continuous(&g, &p, mu, 64).unwrap();
            for x in [0.0, 0.1, 0.29, 0.3, 0.77, 1.0] {
                assert!((sol.eval(x) - 1.5).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn continuous_mu_zero_gives_means() {
        let g = ContinuousSignal::polynomial(Cubic([0.0, 1.0, 0.0, 0.0]));
        let p = Partition::new(vec![0.0, 0.5, 1.0]).unwrap();
        let sol = partition_solver_continuous(&g, &p, 0.0, 8).unwrap();
        assert!((sol.eval(0.2) - 0.25).abs() < 1e-15);
        assert!((sol.eval(0.9) - 0.75).abs() < 1e-15);
        assert!(sol.is_piecewise_constant());
    }

    #[test]
    fn single_mode_filter_factor() {
        // cos(pi x) is mode 1 on (0, 1) with coefficient 1/sqrt(2).
        let g = ContinuousSignal::new(
            (0..64)
                .map(|i| {
                    // Cubic Taylor pieces of cos(pi x) are not exact; use many small pieces.
                    let lo = i as f64 / 64.0;
                    let hi = (i + 1) as f64 / 64.0;
                    let hi = if i == 63 { 1.0 } else { hi };
                    let c = (PI * lo).cos();
                    let s = (PI * lo).sin();
                    let poly = Cubic([c, -PI * s, -PI * PI * c / 2.0, PI.powi(3) * s / 6.0]).shifted(-lo);
                    crate::grid::Piece::new(lo, hi, poly)
                })
                .collect(),
        )
        .unwrap();
        let p = Partition::trivial();
        let sol = partition_solver_continuous(&g, &p, PI, 16).unwrap();
        let b = &sol.blocks[0];
        assert!((b.signal_coefficients[1] - 0.5f64.sqrt()).abs() < 1e-6);
        assert!((b.coefficients[1] / b.signal_coefficients[1] - 0.5).abs() < 1e-14);
        assert!(b.signal_coefficients[2].abs() < 1e-6);
    }

    #[test]
    fn cosine_coefficients_of_linear_signal() {
        // int_0^1 x sqrt(2) cos(s pi x) dx = sqrt(2) ((-1)^s - 1) / (s pi)^2
        let g = ContinuousSignal::polynomial(Cubic([0.0, 1.0, 0.0, 0.0]));
        let c = cosine_coefficients(&g, 0.0, 1.0, 9);
        assert!((c[0] - 0.5).abs() < 1e-15);
        for (s, &cs) in c.iter().enumerate().skip(1) {
            let sign = if s % 2 == 0 { 1.0 } else { -1.0 };
            let exact = 2f64.sqrt() * (sign - 1.0) / (s as f64 * PI).powi(2);
            assert!((cs - exact).abs() < 1e-15, "s={s}: {cs} vs {exact}");
        }
    }

    #[test]
    fn continuous_rejects_zero_modes() {
        let g = ContinuousSignal::constant(1.0);
        assert!(partition_solver_continuous(&g, &Partition::trivial(), 1.0, 0).is_err());
    }

    #[test]
    fn lipschitz_bound_examples() {
        let g = ContinuousSignal::constant(1.0);
        let b = lipschitz_bound_continuous(&g, &Partition::trivial());
        assert!((b - 1.0 / (PI * PI)).abs() < 1e-15);

        let n = 16;
        let gd = DiscreteSignal::new((0..n).map(|i| i as f64).collect()).unwrap();
        let bd = lipschitz_bound_discrete(&gd, &GridPartition::trivial(gd.grid()));
        let expected = gd.norm() / ((n * n) as f64 * 2.0 * (1.0 - (PI / n as f64).cos()));
        assert!((bd - expected).abs() < 1e-12 * expected);
        assert_eq!(lipschitz_bound_discrete(&gd, &GridPartition::full(gd.grid())), 0.0);
    }

    #[test]
    fn scaled_gap_tends_to_continuous_gap() {
        // Block of relative length 1/2 on ever finer grids.
        let mut prev = f64::INFINITY;
        for j in 3..12 {
            let n = 1usize << j;
            let gap = discrete_spectral_gap(n / 2, n).unwrap();
            let err = (gap - 4.0 * PI * PI).abs();
            assert!(err < prev);
            prev = err;
        }
        assert!(prev < 1e-4);
    }

    #[test]
    fn truncation_warning_on_jump_inside_block() {
        let g = ContinuousSignal::indicator(0.37).unwrap();
        let sol = partition_solver_continuous(&g, &Partition::trivial(), 1.0, 32).unwrap();
        assert_eq!(sol.warnings.len(), 1);
        let sol = partition_solver_continuous(
            &g,
            &Partition::new(vec![0.0, 0.37, 1.0]).unwrap(),
            1.0,
            32,
        )
        .unwrap();
        assert!(sol.warnings.is_empty());
        let d = discretize(&g, 8).unwrap();
        assert_eq!(d.n(), 8);
    }
}
