// SPDX-License-Identifier: MIT OR Apache-2.0

//! Partitions of `[0, 1]`: finite breakpoint sets containing both endpoints.

use serde::{Deserialize, Serialize};

use crate::error::{argument, Error, Result};
use crate::grid::{DiscreteSignal, Grid};

/// Minimal separation between distinct real partition points.
pub const POINT_TOLERANCE: f64 = 1e-12;

/// Strictly increasing points in `[0, 1]`, starting at 0 and ending at 1.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Partition {
    points: Vec<f64>,
}

impl TryFrom<Vec<f64>> for Partition {
    type Error = Error;

    fn try_from(points: Vec<f64>) -> Result<Self> {
        Self::new(points)
    }
}

impl From<Partition> for Vec<f64> {
    fn from(p: Partition) -> Self {
        p.points
    }
}

impl Partition {
    pub fn new(points: Vec<f64>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::Structure(
                "a partition needs at least the points 0 and 1".into(),
            ));
        }
        if points[0] != 0.0 || *points.last().expect("len >= 2") != 1.0 {
            return Err(Error::Structure(format!(
                "partition must start at 0 and end at 1, got {:?} .. {:?}",
                points[0],
                points.last()
            )));
        }
        for w in points.windows(2) {
            if !w[1].is_finite() || w[1] - w[0] <= POINT_TOLERANCE {
                return Err(Error::Structure(format!(
                    "partition points must increase strictly: {} then {}",
                    w[0], w[1]
                )));
            }
        }
        Ok(Self { points })
    }

    /// `{0, 1}`.
    pub fn trivial() -> Self {
        Self {
            points: vec![0.0, 1.0],
        }
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Interior breakpoints, i.e. `|p| - 2`.
    pub fn jump_count(&self) -> usize {
        self.points.len() - 2
    }

    pub fn intervals(&self) -> Vec<Interval> {
        self.points
            .windows(2)
            .map(|w| Interval { lo: w[0], hi: w[1] })
            .collect()
    }

    /// Smallest distance between consecutive points.
    pub fn min_gap(&self) -> f64 {
        self.points
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::INFINITY, f64::min)
    }

    /// Largest interval length.
    pub fn max_gap(&self) -> f64 {
        self.points.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max)
    }

    /// Point sets agree up to [`POINT_TOLERANCE`].
    pub fn approx_eq(&self, other: &Partition) -> bool {
        self.len() == other.len()
            && self
                .points
                .iter()
                .zip(&other.points)
                .all(|(a, b)| (a - b).abs() <= POINT_TOLERANCE)
    }

    pub fn hausdorff_distance(&self, other: &Partition) -> f64 {
        hausdorff_distance(self, other)
    }

    /// Indices of these points on the `n`-grid, if every point is a grid point.
    pub fn on_grid(&self, grid: Grid) -> Result<GridPartition> {
        let n = grid.n() as f64;
        let indices = self
            .points
            .iter()
            .map(|&x| {
                let k = (x * n).round();
                if (k - x * n).abs() > 1e-9 {
                    Err(argument(format!(
                        "partition point {x} is not on the grid with {} cells",
                        grid.n()
                    )))
                } else {
                    Ok(k as usize)
                }
            })
            .collect::<Result<Vec<_>>>()?;
        GridPartition::new(grid, indices)
    }
}

/// Open interval `(lo, hi)` between consecutive partition points.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn length(&self) -> f64 {
        self.hi - self.lo
    }
}

/// Partition whose points are grid points `k/n`, stored by index.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawGridPartition")]
pub struct GridPartition {
    grid: Grid,
    indices: Vec<usize>,
}

#[derive(Deserialize)]
struct RawGridPartition {
    grid: Grid,
    indices: Vec<usize>,
}

impl TryFrom<RawGridPartition> for GridPartition {
    type Error = Error;

    fn try_from(raw: RawGridPartition) -> Result<Self> {
        Self::new(raw.grid, raw.indices)
    }
}

impl GridPartition {
    pub fn new(grid: Grid, indices: Vec<usize>) -> Result<Self> {
        let n = grid.n();
        if indices.first() != Some(&0) || indices.last() != Some(&n) || indices.len() < 2 {
            return Err(Error::Structure(format!(
                "grid partition must start at 0 and end at {n}"
            )));
        }
        if indices.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Structure(
                "grid partition indices must increase strictly".into(),
            ));
        }
        Ok(Self { grid, indices })
    }

    /// Build from the interior breakpoints only.
    pub fn from_breakpoints(grid: Grid, breakpoints: &[usize]) -> Result<Self> {
        let mut indices = Vec::with_capacity(breakpoints.len() + 2);
        indices.push(0);
        indices.extend_from_slice(breakpoints);
        indices.push(grid.n());
        Self::new(grid, indices)
    }

    /// `{0, n}`: one block.
    pub fn trivial(grid: Grid) -> Self {
        Self {
            grid,
            indices: vec![0, grid.n()],
        }
    }

    /// `{0, 1, ..., n}`: every sample its own block.
    pub fn full(grid: Grid) -> Self {
        Self {
            grid,
            indices: (0..=grid.n()).collect(),
        }
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn interior(&self) -> &[usize] {
        &self.indices[1..self.indices.len() - 1]
    }

    pub fn jump_count(&self) -> usize {
        self.indices.len() - 2
    }

    /// Half-open sample ranges `[start, end)` of the blocks.
    pub fn blocks(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.indices.windows(2).map(|w| (w[0], w[1]))
    }

    pub fn block_count(&self) -> usize {
        self.indices.len() - 1
    }

    /// Block index containing sample `k`.
    pub fn block_of(&self, k: usize) -> usize {
        self.indices.partition_point(|&i| i <= k) - 1
    }

    pub fn to_partition(&self) -> Partition {
        Partition {
            points: self.indices.iter().map(|&k| self.grid.point(k)).collect(),
        }
    }

    /// Whether every breakpoint of `self` is also one of `other`.
    pub fn is_subset_of(&self, other: &GridPartition) -> bool {
        self.grid == other.grid && self.indices.iter().all(|k| other.indices.binary_search(k).is_ok())
    }
}

fn directed(from: &[f64], to: &[f64]) -> f64 {
    from.iter()
        .map(|&x| {
            let i = to.partition_point(|&y| y < x);
            let right = to.get(i).map_or(f64::INFINITY, |&y| (y - x).abs());
            let left = if i > 0 { (x - to[i - 1]).abs() } else { f64::INFINITY };
            right.min(left)
        })
        .fold(0.0, f64::max)
}

/// Hausdorff distance between the point sets of two partitions.
pub fn hausdorff_distance(p: &Partition, q: &Partition) -> f64 {
    directed(&p.points, &q.points).max(directed(&q.points, &p.points))
}

pub fn intervals(p: &Partition) -> Vec<Interval> {
    p.intervals()
}

pub fn jump_count(p: &Partition) -> usize {
    p.jump_count()
}

/// Grid partition of the discrete discontinuities of `f`: a breakpoint at
/// index `k + 1` whenever `|f[k+1] - f[k]| > threshold`.
pub fn threshold_partition(f: &DiscreteSignal, threshold: f64) -> Result<GridPartition> {
    if threshold.is_nan() || threshold < 0.0 {
        return Err(argument(format!("threshold {threshold} must be nonnegative")));
    }
    let v = f.values();
    let breakpoints: Vec<usize> = (0..v.len().saturating_sub(1))
        .filter(|&k| (v[k + 1] - v[k]).abs() > threshold)
        .map(|k| k + 1)
        .collect();
    GridPartition::from_breakpoints(f.grid(), &breakpoints)
}

/// Edge threshold `mu * sqrt(gamma / n)` separating discrete jumps from
/// smooth variation at the Blake-Zisserman parameters.
pub fn edge_threshold(gamma: f64, mu: f64, n: usize) -> f64 {
    mu * (gamma / n as f64).sqrt()
}

/// Pairing of intervals of a limit partition with intervals of an approximation.
#[derive(Clone, Debug, PartialEq)]
pub enum IntervalMatching {
    /// One entry per limit interval, in order.
    Matched(Vec<(Interval, Interval)>),
    /// The approximation is not yet within a third of the minimal gap of the
    /// limit partition, so no matching is defined.
    NotInRegime { distance: f64, radius: f64 },
}

impl IntervalMatching {
    /// Per limit interval, the matched approximating interval if any.
    pub fn pairs(&self, limit: &Partition) -> Vec<(Interval, Option<Interval>)> {
        match self {
            IntervalMatching::Matched(m) => m.iter().map(|&(l, a)| (l, Some(a))).collect(),
            IntervalMatching::NotInRegime { .. } => {
                limit.intervals().into_iter().map(|l| (l, None)).collect()
            }
        }
    }

    pub fn is_matched(&self) -> bool {
        matches!(self, IntervalMatching::Matched(_))
    }
}

/// Match every interval `(a, b)` of `limit` with
/// `(max{x in approx : x <= a + r}, min{x in approx : x >= b - r})`,
/// where `r` is a third of the minimal gap of `limit`.
pub fn match_intervals(approx: &Partition, limit: &Partition) -> IntervalMatching {
    let radius = limit.min_gap() / 3.0;
    let distance = hausdorff_distance(approx, limit);
    if distance >= radius {
        return IntervalMatching::NotInRegime { distance, radius };
    }
    let pts = approx.points();
    let pairs = limit
        .intervals()
        .into_iter()
        .map(|iv| {
            let i = pts.partition_point(|&x| x <= iv.lo + radius);
            let lo = pts[i - 1];
            let j = pts.partition_point(|&x| x < iv.hi - radius);
            let hi = pts[j];
            (iv, Interval { lo, hi })
        })
        .collect();
    IntervalMatching::Matched(pairs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn part(points: &[f64]) -> Partition {
        Partition::new(points.to_vec()).unwrap()
    }

    #[test]
    fn hausdorff_examples() {
        assert_eq!(hausdorff_distance(&part(&[0.0, 1.0]), &part(&[0.0, 1.0])), 0.0);
        assert_eq!(hausdorff_distance(&part(&[0.0, 1.0]), &part(&[0.0, 0.5, 1.0])), 0.5);
        let d = hausdorff_distance(&part(&[0.0, 0.3, 1.0]), &part(&[0.0, 0.4, 1.0]));
        assert!((d - 0.1).abs() < 1e-15);
    }

    #[test]
    fn interval_examples() {
        assert_eq!(part(&[0.0, 1.0]).intervals(), vec![Interval { lo: 0.0, hi: 1.0 }]);
        assert_eq!(
            part(&[0.0, 0.5, 1.0]).intervals(),
            vec![Interval { lo: 0.0, hi: 0.5 }, Interval { lo: 0.5, hi: 1.0 }]
        );
    }

    #[test]
    fn jump_count_examples() {
        assert_eq!(part(&[0.0, 1.0]).jump_count(), 0);
        assert_eq!(part(&[0.0, 0.3, 1.0]).jump_count(), 1);
        assert_eq!(part(&[0.0, 0.2, 0.7, 1.0]).jump_count(), 2);
    }

    #[test]
    fn rejects_malformed() {
        assert!(Partition::new(vec![0.0]).is_err());
        assert!(Partition::new(vec![0.1, 1.0]).is_err());
        assert!(Partition::new(vec![0.0, 0.5, 0.5, 1.0]).is_err());
        assert!(Partition::new(vec![0.0, 0.6, 0.5, 1.0]).is_err());
        let grid = Grid::new(4).unwrap();
        assert!(GridPartition::new(grid, vec![0, 2]).is_err());
        assert!(GridPartition::new(grid, vec![0, 3, 2, 4]).is_err());
        assert!(GridPartition::new(grid, vec![0, 2, 4]).is_ok());
    }

    #[test]
    fn threshold_examples() {
        let f = DiscreteSignal::new(vec![0.0, 0.05, 1.0]).unwrap();
        assert_eq!(threshold_partition(&f, 0.5).unwrap().indices(), &[0, 2, 3]);
        assert_eq!(threshold_partition(&f, 2.0).unwrap().indices(), &[0, 3]);
        assert_eq!(threshold_partition(&f, 0.0).unwrap().indices(), &[0, 1, 2, 3]);
        assert!(threshold_partition(&f, -1.0).is_err());
    }

    #[test]
    fn matching_examples() {
        let limit = part(&[0.0, 0.5, 1.0]);
        match match_intervals(&limit, &limit) {
            IntervalMatching::Matched(pairs) => {
                for (l, a) in pairs {
                    assert_eq!(l, a);
                }
            }
            other => panic!("expected a matching, got {other:?}"),
        }

        let approx = part(&[0.0, 0.5004, 1.0]);
        let m = match_intervals(&approx, &limit);
        assert_eq!(
            m,
            IntervalMatching::Matched(vec![
                (Interval { lo: 0.0, hi: 0.5 }, Interval { lo: 0.0, hi: 0.5004 }),
                (Interval { lo: 0.5, hi: 1.0 }, Interval { lo: 0.5004, hi: 1.0 }),
            ])
        );

        let far = match_intervals(&Partition::trivial(), &limit);
        assert!(matches!(far, IntervalMatching::NotInRegime { distance, .. } if distance == 0.5));
        assert!(far.pairs(&limit).iter().all(|(_, a)| a.is_none()));
    }

    #[test]
    fn grid_partition_roundtrip() {
        let grid = Grid::new(8).unwrap();
        let gp = GridPartition::new(grid, vec![0, 2, 5, 8]).unwrap();
        let p = gp.to_partition();
        assert_eq!(p.points(), &[0.0, 0.25, 0.625, 1.0]);
        assert_eq!(p.on_grid(grid).unwrap(), gp);
        assert!(part(&[0.0, 0.3, 1.0]).on_grid(grid).is_err());
        assert_eq!(gp.block_of(0), 0);
        assert_eq!(gp.block_of(2), 1);
        assert_eq!(gp.block_of(7), 2);
    }

    fn arb_partition() -> impl Strategy<Value = Partition> {
        prop::collection::btree_set(1u32..999, 0..8).prop_map(|s| {
            let mut pts = vec![0.0];
            pts.extend(s.into_iter().map(|k| k as f64 / 1000.0));
            pts.push(1.0);
            Partition::new(pts).unwrap()
        })
    }

    proptest! {
        #[test]
        fn hausdorff_is_a_metric(p in arb_partition(), q in arb_partition(), r in arb_partition()) {
            let dpq = hausdorff_distance(&p, &q);
            prop_assert_eq!(dpq, hausdorff_distance(&q, &p));
            prop_assert_eq!(hausdorff_distance(&p, &p), 0.0);
            prop_assert_eq!(dpq == 0.0, p == q);
            prop_assert!(hausdorff_distance(&p, &r) <= dpq + hausdorff_distance(&q, &r) + 1e-15);
        }

        #[test]
        fn interval_count(p in arb_partition()) {
            prop_assert_eq!(p.intervals().len(), p.len() - 1);
        }

        #[test]
        fn cardinality_is_lower_semicontinuous(
            p in arb_partition(),
            extra in prop::collection::vec(0.0f64..1.0, 0..6),
            shifts in prop::collection::vec(-1.0f64..1.0, 10),
        ) {
            // Perturb interior points by less than the matching radius and add extra points.
            let radius = p.min_gap() / 3.0;
            let mut pts: Vec<f64> = p.points().iter().enumerate().map(|(i, &x)| {
                if i == 0 || i + 1 == p.len() { x } else { x + 0.9 * radius * shifts[i % shifts.len()] }
            }).collect();
            for e in extra {
                if pts.iter().all(|&x| (x - e).abs() > 1e-9) { pts.push(e); }
            }
            pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
            pts.dedup_by(|a, b| (*a - *b).abs() <= 1e-9);
            let approx = Partition::new(pts).unwrap();
            if let IntervalMatching::Matched(pairs) = match_intervals(&approx, &p) {
                let lefts: Vec<f64> = pairs.iter().map(|(_, a)| a.lo).collect();
                prop_assert!(lefts.windows(2).all(|w| w[0] < w[1]));
                for w in pairs.windows(2) {
                    prop_assert!(w[0].1.hi <= w[1].1.lo);
                }
                prop_assert!(approx.len() >= p.len());
            }
        }

        #[test]
        fn threshold_is_monotone(values in prop::collection::vec(-3.0f64..3.0, 2..40), t1 in 0.0f64..2.0, dt in 0.0f64..2.0) {
            let f = DiscreteSignal::new(values).unwrap();
            let coarse = threshold_partition(&f, t1 + dt).unwrap();
            let fine = threshold_partition(&f, t1).unwrap();
            prop_assert!(coarse.is_subset_of(&fine));
        }
    }
}
