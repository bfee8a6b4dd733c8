// SPDX-License-Identifier: MIT OR Apache-2.0

//! Equidistant sampling grids and the maps between signals on `[0, 1]` and
//! their cell averages.
//!
//! Cell `k` of a grid with `n` cells is `[k/n, (k+1)/n)`, except the last
//! one which is closed: `[(n-1)/n, 1]`. Sampling a signal means averaging it
//! over each cell ([`discretize`]); [`embed`] maps samples back to the right
//! continuous step function that is also continuous at `1`.

use serde::{Deserialize, Serialize};

use crate::error::{argument, Error, Result};

/// Equidistant grid with `n >= 1` cells on `[0, 1]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Grid {
    n: usize,
}

impl Grid {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(argument("grid needs at least one cell"));
        }
        Ok(Self { n })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Grid point `k/n`.
    pub fn point(&self, k: usize) -> f64 {
        if k == self.n {
            1.0
        } else {
            k as f64 / self.n as f64
        }
    }

    /// Bounds of cell `k`.
    pub fn cell(&self, k: usize) -> (f64, f64) {
        (self.point(k), self.point(k + 1))
    }

    /// Index of the cell containing `x`; values outside `[0, 1]` are clamped.
    pub fn cell_of(&self, x: f64) -> usize {
        if x <= 0.0 {
            return 0;
        }
        let mut k = ((x * self.n as f64).floor() as usize).min(self.n - 1);
        // floor(x * n) can land one cell low right at a grid point.
        if k + 1 < self.n && self.point(k + 1) <= x {
            k += 1;
        }
        if k > 0 && self.point(k) > x {
            k -= 1;
        }
        k
    }

    pub fn width(&self) -> f64 {
        1.0 / self.n as f64
    }
}

/// Cubic polynomial `c0 + c1 x + c2 x^2 + c3 x^3`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Cubic(pub [f64; 4]);

impl Cubic {
    pub const ZERO: Cubic = Cubic([0.0; 4]);

    pub fn constant(c: f64) -> Self {
        Cubic([c, 0.0, 0.0, 0.0])
    }

    pub fn eval(&self, x: f64) -> f64 {
        let c = &self.0;
        ((c[3] * x + c[2]) * x + c[1]) * x + c[0]
    }

    pub fn derivative(&self) -> Cubic {
        let c = &self.0;
        Cubic([c[1], 2.0 * c[2], 3.0 * c[3], 0.0])
    }

    /// Coefficients of `y -> p(origin + y)`.
    pub fn shifted(&self, origin: f64) -> Cubic {
        let c = &self.0;
        let a = origin;
        Cubic([
            self.eval(a),
            c[1] + 2.0 * c[2] * a + 3.0 * c[3] * a * a,
            c[2] + 3.0 * c[3] * a,
            c[3],
        ])
    }

    pub fn is_constant(&self) -> bool {
        self.0[1] == 0.0 && self.0[2] == 0.0 && self.0[3] == 0.0
    }

    /// Exact integral over `[a, b]`.
    pub fn integral(&self, a: f64, b: f64) -> f64 {
        let q = self.shifted(a);
        integrate_local(&q.0, b - a)
    }

    /// Exact integral of `(p - c)^2` over `[a, b]`.
    pub fn integral_sq_offset(&self, a: f64, b: f64, c: f64) -> f64 {
        let mut q = self.shifted(a);
        q.0[0] -= c;
        integrate_product_local(&q.0, &q.0, b - a)
    }
}

/// `int_0^h sum_k q_k y^k dy`.
pub(crate) fn integrate_local(q: &[f64; 4], h: f64) -> f64 {
    let mut acc = 0.0;
    let mut hp = h;
    for (k, &qk) in q.iter().enumerate() {
        acc += qk * hp / (k + 1) as f64;
        hp *= h;
    }
    acc
}

/// `int_0^h p(y) q(y) dy` for local cubic coefficients.
pub(crate) fn integrate_product_local(p: &[f64; 4], q: &[f64; 4], h: f64) -> f64 {
    let mut prod = [0.0; 7];
    for (i, &pi) in p.iter().enumerate() {
        for (j, &qj) in q.iter().enumerate() {
            prod[i + j] += pi * qj;
        }
    }
    let mut acc = 0.0;
    let mut hp = h;
    for (k, &ck) in prod.iter().enumerate() {
        acc += ck * hp / (k + 1) as f64;
        hp *= h;
    }
    acc
}

/// One polynomial piece of a [`ContinuousSignal`], active on `[lo, hi)`.
///
/// Serializes as the flat row `[lo, hi, c0, c1, c2, c3]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 6]", into = "[f64; 6]")]
pub struct Piece {
    pub lo: f64,
    pub hi: f64,
    pub poly: Cubic,
}

impl From<[f64; 6]> for Piece {
    fn from(r: [f64; 6]) -> Self {
        Piece::new(r[0], r[1], Cubic([r[2], r[3], r[4], r[5]]))
    }
}

impl From<Piece> for [f64; 6] {
    fn from(p: Piece) -> Self {
        let c = p.poly.0;
        [p.lo, p.hi, c[0], c[1], c[2], c[3]]
    }
}

impl Piece {
    pub fn new(lo: f64, hi: f64, poly: Cubic) -> Self {
        Self { lo, hi, poly }
    }
}

/// Piecewise cubic signal on `[0, 1]`, right continuous at piece boundaries.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Piece>", into = "Vec<Piece>")]
pub struct ContinuousSignal {
    pieces: Vec<Piece>,
}

impl TryFrom<Vec<Piece>> for ContinuousSignal {
    type Error = Error;

    fn try_from(pieces: Vec<Piece>) -> Result<Self> {
        Self::new(pieces)
    }
}

impl From<ContinuousSignal> for Vec<Piece> {
    fn from(s: ContinuousSignal) -> Self {
        s.pieces
    }
}

impl ContinuousSignal {
    /// Validate that the pieces tile `[0, 1]` without gaps or overlaps.
    pub fn new(pieces: Vec<Piece>) -> Result<Self> {
        let first = pieces
            .first()
            .ok_or_else(|| Error::Structure("signal has no pieces".into()))?;
        if first.lo != 0.0 {
            return Err(Error::Structure(format!(
                "first piece starts at {} instead of 0",
                first.lo
            )));
        }
        for (i, piece) in pieces.iter().enumerate() {
            if !(piece.lo.is_finite() && piece.hi.is_finite()) || piece.poly.0.iter().any(|c| !c.is_finite()) {
                return Err(Error::Structure(format!("piece {i} has non-finite data")));
            }
            if piece.lo >= piece.hi {
                return Err(Error::Structure(format!(
                    "piece {i} is empty or reversed: [{}, {})",
                    piece.lo, piece.hi
                )));
            }
            if let Some(next) = pieces.get(i + 1) {
                if next.lo != piece.hi {
                    let kind = if next.lo > piece.hi { "gap" } else { "overlap" };
                    return Err(Error::Structure(format!(
                        "{kind} between piece {i} (ends {}) and piece {} (starts {})",
                        piece.hi,
                        i + 1,
                        next.lo
                    )));
                }
            }
        }
        let last = pieces.last().expect("nonempty");
        if last.hi != 1.0 {
            return Err(Error::Structure(format!(
                "last piece ends at {} instead of 1",
                last.hi
            )));
        }
        Ok(Self { pieces })
    }

    pub fn constant(c: f64) -> Self {
        Self::polynomial(Cubic::constant(c))
    }

    pub fn polynomial(poly: Cubic) -> Self {
        Self {
            pieces: vec![Piece::new(0.0, 1.0, poly)],
        }
    }

    /// Heaviside function `1` on `[a, 1]`, `0` before.
    pub fn indicator(a: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&a) {
            return Err(argument(format!("indicator jump {a} must lie in [0, 1)")));
        }
        if a == 0.0 {
            return Ok(Self::constant(1.0));
        }
        Self::new(vec![
            Piece::new(0.0, a, Cubic::ZERO),
            Piece::new(a, 1.0, Cubic::constant(1.0)),
        ])
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    fn piece_index(&self, x: f64) -> usize {
        let idx = self.pieces.partition_point(|p| p.hi <= x);
        idx.min(self.pieces.len() - 1)
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.pieces[self.piece_index(x)].poly.eval(x)
    }

    /// Sub-intervals of `[a, b]` on which a single piece is active.
    pub fn overlaps(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64, &Cubic)> + '_ {
        let start = self.pieces.partition_point(|p| p.hi <= a);
        self.pieces[start..]
            .iter()
            .take_while(move |p| p.lo < b)
            .filter_map(move |p| {
                let lo = p.lo.max(a);
                let hi = p.hi.min(b);
                (lo < hi).then_some((lo, hi, &p.poly))
            })
    }

    pub fn integral(&self, a: f64, b: f64) -> f64 {
        self.overlaps(a, b).map(|(lo, hi, p)| p.integral(lo, hi)).sum()
    }

    /// `int_a^b (g - c)^2`.
    pub fn integral_sq_offset(&self, a: f64, b: f64, c: f64) -> f64 {
        self.overlaps(a, b)
            .map(|(lo, hi, p)| p.integral_sq_offset(lo, hi, c))
            .sum()
    }

    pub fn mean(&self) -> f64 {
        self.integral(0.0, 1.0)
    }

    pub fn norm_sq(&self) -> f64 {
        self.integral_sq_offset(0.0, 1.0, 0.0)
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    /// The same signal plus a constant.
    pub fn offset(&self, delta: f64) -> Self {
        Self {
            pieces: self
                .pieces
                .iter()
                .map(|p| {
                    let mut poly = p.poly;
                    poly.0[0] += delta;
                    Piece::new(p.lo, p.hi, poly)
                })
                .collect(),
        }
    }

    /// Number of piece boundaries where the one-sided limits differ by more than `tol`.
    pub fn jump_count(&self, tol: f64) -> usize {
        self.pieces
            .windows(2)
            .filter(|w| (w[0].poly.eval(w[0].hi) - w[1].poly.eval(w[1].lo)).abs() > tol)
            .count()
    }

    /// `int_0^1 |g'|^2` over the smooth parts.
    pub fn derivative_energy(&self) -> f64 {
        self.pieces
            .iter()
            .map(|p| p.poly.derivative().integral_sq_offset(p.lo, p.hi, 0.0))
            .sum()
    }

    /// Squared L2 distance between this signal and the step function of `d`.
    pub fn step_distance_sq(&self, d: &DiscreteSignal) -> f64 {
        let grid = d.grid();
        d.values()
            .iter()
            .enumerate()
            .map(|(k, &v)| {
                let (a, b) = grid.cell(k);
                self.integral_sq_offset(a, b, v)
            })
            .sum()
    }
}

/// Cell-average samples on an equidistant grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct DiscreteSignal {
    grid: Grid,
    values: Vec<f64>,
}

impl TryFrom<Vec<f64>> for DiscreteSignal {
    type Error = Error;

    fn try_from(values: Vec<f64>) -> Result<Self> {
        Self::new(values)
    }
}

impl From<DiscreteSignal> for Vec<f64> {
    fn from(s: DiscreteSignal) -> Self {
        s.values
    }
}

impl DiscreteSignal {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        let grid = Grid::new(values.len())?;
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(argument(format!("sample {k} is not finite")));
        }
        Ok(Self { grid, values })
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn n(&self) -> usize {
        self.grid.n
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.n() as f64
    }

    /// `(1/n) sum f_k^2`, the squared L2 norm of the embedded step function.
    pub fn norm_sq(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>() / self.n() as f64
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    /// `(1/n) sum f_k g_k`.
    pub fn inner(&self, other: &DiscreteSignal) -> Result<f64> {
        self.check_same_grid(other)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a * b)
            .sum::<f64>()
            / self.n() as f64)
    }

    pub(crate) fn check_same_grid(&self, other: &DiscreteSignal) -> Result<()> {
        if self.n() != other.n() {
            return Err(argument(format!(
                "signals live on different grids ({} vs {} cells)",
                self.n(),
                other.n()
            )));
        }
        Ok(())
    }
}

/// Right-continuous step function with value `values[k]` on cell `k`.
#[derive(Clone, Debug, PartialEq)]
pub struct StepFunction {
    grid: Grid,
    values: Vec<f64>,
}

impl StepFunction {
    pub fn eval(&self, x: f64) -> f64 {
        self.values[self.grid.cell_of(x)]
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    /// The step function as a piecewise-constant [`ContinuousSignal`].
    pub fn to_signal(&self) -> ContinuousSignal {
        let pieces = self
            .values
            .iter()
            .enumerate()
            .map(|(k, &v)| {
                let (lo, hi) = self.grid.cell(k);
                Piece::new(lo, hi, Cubic::constant(v))
            })
            .collect();
        ContinuousSignal { pieces }
    }

    pub fn norm_sq(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>() * self.grid.width()
    }
}

/// Cell averages `n * int_{cell k} g` for every cell of the `n`-grid.
pub fn discretize(g: &ContinuousSignal, n: usize) -> Result<DiscreteSignal> {
    let grid = Grid::new(n)?;
    let values = (0..n)
        .map(|k| {
            let (a, b) = grid.cell(k);
            g.integral(a, b) / (b - a)
        })
        .collect();
    DiscreteSignal::new(values)
}

pub fn embed(d: &DiscreteSignal) -> StepFunction {
    StepFunction {
        grid: d.grid,
        values: d.values.clone(),
    }
}

/// Average blocks of `n/m` consecutive samples.
pub fn coarsen(d: &DiscreteSignal, m: usize) -> Result<DiscreteSignal> {
    let n = d.n();
    if m == 0 || !n.is_multiple_of(m) {
        return Err(argument(format!("{m} does not divide the grid size {n}")));
    }
    let ratio = n / m;
    let values = d
        .values
        .chunks_exact(ratio)
        .map(|c| c.iter().sum::<f64>() / ratio as f64)
        .collect();
    DiscreteSignal::new(values)
}

/// Prefix sums of samples and squared samples, accumulated with Neumaier
/// compensation so interval sums keep their low-order bits.
#[derive(Clone, Debug)]
pub struct PrefixTable {
    sums: Vec<f64>,
    sums_err: Vec<f64>,
    squares: Vec<f64>,
    squares_err: Vec<f64>,
}

fn compensated_prefix(xs: impl Iterator<Item = f64>, len: usize) -> (Vec<f64>, Vec<f64>) {
    let mut hi = Vec::with_capacity(len + 1);
    let mut lo = Vec::with_capacity(len + 1);
    let (mut s, mut c) = (0.0f64, 0.0f64);
    hi.push(0.0);
    lo.push(0.0);
    for x in xs {
        let t = s + x;
        if s.abs() >= x.abs() {
            c += (s - t) + x;
        } else {
            c += (x - t) + s;
        }
        s = t;
        hi.push(s);
        lo.push(c);
    }
    (hi, lo)
}

pub fn build_prefix(d: &DiscreteSignal) -> PrefixTable {
    let n = d.n();
    let (sums, sums_err) = compensated_prefix(d.values.iter().copied(), n);
    let (squares, squares_err) = compensated_prefix(d.values.iter().map(|v| v * v), n);
    PrefixTable {
        sums,
        sums_err,
        squares,
        squares_err,
    }
}

impl PrefixTable {
    /// Number of samples covered.
    pub fn len(&self) -> usize {
        self.sums.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Sum of the first `k` samples.
    pub fn sum(&self, k: usize) -> f64 {
        self.sums[k] + self.sums_err[k]
    }

    /// Sum of the first `k` squared samples.
    pub fn sum_sq(&self, k: usize) -> f64 {
        self.squares[k] + self.squares_err[k]
    }

    /// Sum of samples `j..k`.
    pub fn range_sum(&self, j: usize, k: usize) -> f64 {
        (self.sums[k] - self.sums[j]) + (self.sums_err[k] - self.sums_err[j])
    }

    pub fn range_sum_sq(&self, j: usize, k: usize) -> f64 {
        (self.squares[k] - self.squares[j]) + (self.squares_err[k] - self.squares_err[j])
    }

    /// `sum (g_i - mean)^2` over samples `j..k`, clamped at zero.
    pub fn range_scatter(&self, j: usize, k: usize) -> f64 {
        let s = self.range_sum(j, k);
        (self.range_sum_sq(j, k) - s * s / (k - j) as f64).max(0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn discretize_linear() {
        let g = ContinuousSignal::polynomial(Cubic([0.0, 1.0, 0.0, 0.0]));
        let d = discretize(&g, 2).unwrap();
        assert!(close(d.values()[0], 0.25, 1e-15));
        assert!(close(d.values()[1], 0.75, 1e-15));
    }

    #[test]
    fn discretize_indicator_aligned_and_split() {
        let g = ContinuousSignal::indicator(0.5).unwrap();
        assert_eq!(discretize(&g, 2).unwrap().values(), &[0.0, 1.0]);
        let d3 = discretize(&g, 3).unwrap();
        assert_eq!(d3.values()[0], 0.0);
        assert!(close(d3.values()[1], 0.5, 1e-15));
        assert!(close(d3.values()[2], 1.0, 1e-15));
    }

    #[test]
    fn invalid_piece_layouts() {
        let gap = ContinuousSignal::new(vec![
            Piece::new(0.0, 0.4, Cubic::ZERO),
            Piece::new(0.5, 1.0, Cubic::ZERO),
        ]);
        assert!(matches!(gap, Err(Error::Structure(m)) if m.contains("gap")));
        let overlap = ContinuousSignal::new(vec![
            Piece::new(0.0, 0.6, Cubic::ZERO),
            Piece::new(0.5, 1.0, Cubic::ZERO),
        ]);
        assert!(matches!(overlap, Err(Error::Structure(m)) if m.contains("overlap")));
        assert!(ContinuousSignal::new(vec![Piece::new(0.0, 0.9, Cubic::ZERO)]).is_err());
        assert!(ContinuousSignal::new(vec![]).is_err());
    }

    #[test]
    fn embed_cells() {
        let d = DiscreteSignal::new(vec![0.25, 0.75]).unwrap();
        let s = embed(&d);
        assert_eq!(s.eval(0.49), 0.25);
        assert_eq!(s.eval(0.5), 0.75);
        assert_eq!(s.eval(1.0), 0.75);
        assert_eq!(s.eval(0.0), 0.25);
    }

    #[test]
    fn cell_of_grid_points_is_right_continuous() {
        for n in [3usize, 7, 10, 49, 1000] {
            let grid = Grid::new(n).unwrap();
            for k in 0..n {
                assert_eq!(grid.cell_of(grid.point(k)), k, "n={n} k={k}");
            }
            assert_eq!(grid.cell_of(1.0), n - 1);
        }
    }

    #[test]
    fn coarsen_block_means() {
        let d = DiscreteSignal::new(vec![0.0, 1.0, 2.0, 3.0]).unwrap();
        assert_eq!(coarsen(&d, 2).unwrap().values(), &[0.5, 2.5]);
        assert_eq!(coarsen(&d, 4).unwrap(), d);
        assert!(matches!(coarsen(&d, 3), Err(Error::Argument(_))));
    }

    #[test]
    fn prefix_examples() {
        let d = DiscreteSignal::new(vec![1.0, 2.0, 3.0]).unwrap();
        let t = build_prefix(&d);
        let sums: Vec<f64> = (0..=3).map(|k| t.sum(k)).collect();
        let squares: Vec<f64> = (0..=3).map(|k| t.sum_sq(k)).collect();
        assert_eq!(sums, vec![0.0, 1.0, 3.0, 6.0]);
        assert_eq!(squares, vec![0.0, 1.0, 5.0, 14.0]);
    }

    #[test]
    fn grid_rejects_zero() {
        assert!(Grid::new(0).is_err());
        assert!(DiscreteSignal::new(vec![]).is_err());
        assert!(DiscreteSignal::new(vec![f64::NAN]).is_err());
    }

    #[test]
    fn cell_widths_sum_to_one() {
        for n in [1usize, 3, 7, 1000] {
            let grid = Grid::new(n).unwrap();
            let total: f64 = (0..n).map(|k| grid.cell(k).1 - grid.cell(k).0).sum();
            assert!(close(total, 1.0, 1e-12));
            assert_eq!(grid.cell(n - 1).1, 1.0);
        }
    }

    #[test]
    fn derivative_energy_and_jumps() {
        let g = ContinuousSignal::polynomial(Cubic([0.0, 1.0, 0.0, 0.0]));
        assert!(close(g.derivative_energy(), 1.0, 1e-15));
        assert_eq!(g.jump_count(1e-12), 0);
        let h = ContinuousSignal::indicator(0.3).unwrap();
        assert_eq!(h.jump_count(1e-12), 1);
        assert_eq!(h.derivative_energy(), 0.0);
    }

    fn arb_signal() -> impl Strategy<Value = ContinuousSignal> {
        (
            prop::collection::vec(0.05f64..1.0, 1..5),
            prop::collection::vec(prop::array::uniform4(-2.0f64..2.0), 5),
        )
            .prop_map(|(widths, coeffs)| {
                let total: f64 = widths.iter().sum();
                let mut lo = 0.0;
                let mut pieces = Vec::new();
                for (i, w) in widths.iter().enumerate() {
                    let hi = if i + 1 == widths.len() { 1.0 } else { lo + w / total };
                    pieces.push(Piece::new(lo, hi, Cubic(coeffs[i])));
                    lo = hi;
                }
                ContinuousSignal::new(pieces).unwrap()
            })
    }

    proptest! {
        #[test]
        fn embed_discretize_round_trip(values in prop::collection::vec(-5.0f64..5.0, 1..40)) {
            let d = DiscreteSignal::new(values).unwrap();
            let back = discretize(&embed(&d).to_signal(), d.n()).unwrap();
            for (a, b) in back.values().iter().zip(d.values()) {
                prop_assert!((a - b).abs() <= 1e-12 * (1.0 + b.abs()));
            }
        }

        #[test]
        fn averaging_is_a_contraction(g in arb_signal(), n in 1usize..200) {
            let d = discretize(&g, n).unwrap();
            prop_assert!(embed(&d).norm_sq() <= g.norm_sq() * (1.0 + 1e-12) + 1e-14);
        }

        #[test]
        fn refinement_consistency(g in arb_signal(), m in 1usize..20, k in 1usize..8) {
            let fine = discretize(&g, m * k).unwrap();
            let coarse = discretize(&g, m).unwrap();
            let via = coarsen(&fine, m).unwrap();
            for (a, b) in via.values().iter().zip(coarse.values()) {
                prop_assert!((a - b).abs() <= 1e-11 * (1.0 + b.abs()));
            }
        }

        #[test]
        fn prefix_matches_direct_sum(values in prop::collection::vec(-1e3f64..1e3, 1..500)) {
            let d = DiscreteSignal::new(values.clone()).unwrap();
            let t = build_prefix(&d);
            let direct: f64 = values.iter().sum();
            let direct_sq: f64 = values.iter().map(|v| v * v).sum();
            prop_assert_eq!(t.sum(0), 0.0);
            prop_assert!((t.sum(values.len()) - direct).abs() <= 1e-12 * values.iter().map(|v| v.abs()).sum::<f64>().max(1.0));
            prop_assert!((t.sum_sq(values.len()) - direct_sq).abs() <= 1e-12 * direct_sq.max(1.0));
        }
    }

    #[test]
    fn coarsen_tower_property() {
        let g = ContinuousSignal::new(vec![
            Piece::new(0.0, 0.37, Cubic([0.1, -1.0, 2.0, 0.5])),
            Piece::new(0.37, 1.0, Cubic([1.0, 0.3, 0.0, -0.7])),
        ])
        .unwrap();
        let fine = discretize(&g, 8).unwrap();
        let a = coarsen(&fine, 2).unwrap();
        let b = discretize(&g, 2).unwrap();
        for (x, y) in a.values().iter().zip(b.values()) {
            assert!(close(*x, *y, 1e-14));
        }
    }
}
