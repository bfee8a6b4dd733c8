// SPDX-License-Identifier: MIT OR Apache-2.0

//! Direct evaluation of the functional family indexed by `(gamma, mu, t)`.
//!
//! | gamma | mu  | t     | functional                         |
//! |-------|-----|-------|------------------------------------|
//! | > 0   | > 0 | 1/n   | Blake-Zisserman on the `n`-grid    |
//! | > 0   | > 0 | 0     | Mumford-Shah                       |
//! | > 0   | 0   | 1/n   | discrete Potts                     |
//! | > 0   | 0   | 0     | continuous Potts                   |
//! | 0     | any | 1/n   | discrete squared distance          |
//! | 0     | any | 0     | continuous squared distance        |
//!
//! Discrete inner products carry the weight `1/n` so that all values are
//! comparable with their continuous counterparts.

use serde::{Deserialize, Serialize};

use crate::error::{argument, Error, Result};
use crate::grid::{discretize, ContinuousSignal, DiscreteSignal};
use crate::partitions::{GridPartition, Partition};
use crate::solvers::{
    partition_solver_continuous, partition_solver_discrete, ContinuousSolution, DiscreteSolution,
};

/// Sampling resolution `t`: `0` for the continuum, `1/n` for the `n`-grid.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Resolution {
    Continuous,
    Grid(usize),
}

impl Resolution {
    pub fn t(self) -> f64 {
        match self {
            Resolution::Continuous => 0.0,
            Resolution::Grid(n) => 1.0 / n as f64,
        }
    }

    /// Parse `t`, accepting only `0` and reciprocals of positive integers.
    pub fn from_t(t: f64) -> Result<Self> {
        if t == 0.0 {
            return Ok(Resolution::Continuous);
        }
        if !(t > 0.0 && t <= 1.0) {
            return Err(argument(format!("t = {t} must be 0 or 1/n")));
        }
        let n = (1.0 / t).round();
        if (1.0 / n - t).abs() > 1e-12 * t {
            return Err(argument(format!("t = {t} is not the reciprocal of an integer")));
        }
        Ok(Resolution::Grid(n as usize))
    }
}

/// A point `(gamma, mu, t)` of the parameter cube.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParameterPoint {
    pub gamma: f64,
    pub mu: f64,
    pub resolution: Resolution,
}

/// Which member of the family a parameter point selects.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Functional {
    BlakeZisserman,
    MumfordShah,
    DiscretePotts,
    ContinuousPotts,
    DiscreteDistance,
    ContinuousDistance,
}

impl ParameterPoint {
    pub fn new(gamma: f64, mu: f64, resolution: Resolution) -> Result<Self> {
        if !(gamma >= 0.0 && gamma.is_finite()) {
            return Err(argument(format!("gamma = {gamma} must be finite and nonnegative")));
        }
        if !(mu >= 0.0 && mu.is_finite()) {
            return Err(argument(format!("mu = {mu} must be finite and nonnegative")));
        }
        if resolution == Resolution::Grid(0) {
            return Err(argument("grid resolution needs n >= 1"));
        }
        Ok(Self {
            gamma,
            mu,
            resolution,
        })
    }

    pub fn discrete(gamma: f64, mu: f64, n: usize) -> Result<Self> {
        Self::new(gamma, mu, Resolution::Grid(n))
    }

    pub fn continuous(gamma: f64, mu: f64) -> Result<Self> {
        Self::new(gamma, mu, Resolution::Continuous)
    }

    pub fn t(&self) -> f64 {
        self.resolution.t()
    }

    pub fn functional(&self) -> Functional {
        let discrete = matches!(self.resolution, Resolution::Grid(_));
        match (self.gamma > 0.0, self.mu > 0.0, discrete) {
            (false, _, true) => Functional::DiscreteDistance,
            (false, _, false) => Functional::ContinuousDistance,
            (true, true, true) => Functional::BlakeZisserman,
            (true, true, false) => Functional::MumfordShah,
            (true, false, true) => Functional::DiscretePotts,
            (true, false, false) => Functional::ContinuousPotts,
        }
    }
}

/// Termwise value of a functional.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveBreakdown {
    /// `gamma` times the number of charged jumps.
    pub jump_term: f64,
    /// Weighted squared-derivative (or squared-difference) term.
    pub smooth_term: f64,
    /// Squared L2 distance to the data.
    pub fidelity_term: f64,
    pub total: f64,
    /// Interior points of the partition the candidate was built on.
    pub partition_jumps: usize,
    /// Jumps actually charged.
    pub effective_jumps: usize,
}

impl ObjectiveBreakdown {
    fn new(jump_term: f64, smooth_term: f64, fidelity_term: f64, partition_jumps: usize, effective_jumps: usize) -> Self {
        Self {
            jump_term,
            smooth_term,
            fidelity_term,
            total: jump_term + smooth_term + fidelity_term,
            partition_jumps,
            effective_jumps,
        }
    }
}

fn discrete_fidelity(f: &DiscreteSignal, g: &DiscreteSignal) -> f64 {
    f.values()
        .iter()
        .zip(g.values())
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        / f.n() as f64
}

/// Blake-Zisserman value: `sum_k min{(n/mu^2) (f[k+1] - f[k])^2, gamma}` plus
/// `(1/n) sum (f - g)^2`. Bonds charged `gamma` count as jumps.
pub fn eval_bz(f: &DiscreteSignal, g: &DiscreteSignal, gamma: f64, mu: f64) -> Result<ObjectiveBreakdown> {
    f.check_same_grid(g)?;
    if mu <= 0.0 {
        return Err(Error::Routing("mu = 0 is the Potts functional (eval_potts_discrete)".into()));
    }
    let n = f.n() as f64;
    let weight = n / (mu * mu);
    let (mut smooth, mut jumps) = (0.0, 0usize);
    for w in f.values().windows(2) {
        let bond = weight * (w[1] - w[0]).powi(2);
        if bond < gamma {
            smooth += bond;
        } else {
            jumps += 1;
        }
    }
    Ok(ObjectiveBreakdown::new(
        gamma * jumps as f64,
        smooth,
        discrete_fidelity(f, g),
        jumps,
        jumps,
    ))
}

/// Discrete Potts value: `gamma` per index with `f[k+1] != f[k]` plus `(1/n) sum (f - g)^2`.
pub fn eval_potts_discrete(f: &DiscreteSignal, g: &DiscreteSignal, gamma: f64) -> Result<ObjectiveBreakdown> {
    f.check_same_grid(g)?;
    let jumps = f.values().windows(2).filter(|w| w[1] != w[0]).count();
    Ok(ObjectiveBreakdown::new(
        gamma * jumps as f64,
        0.0,
        discrete_fidelity(f, g),
        jumps,
        jumps,
    ))
}

/// Potts value of a partition-solver output, counting jumps on its own block
/// structure: block boundaries where adjacent values coincide are not charged.
pub fn eval_potts_solution(sol: &DiscreteSolution, g: &DiscreteSignal, gamma: f64) -> Result<ObjectiveBreakdown> {
    let f = sol.values();
    f.check_same_grid(g)?;
    let v = f.values();
    let constant_blocks = sol.partition.blocks().all(|(j, k)| v[j..k].iter().all(|&x| x == v[j]));
    if !constant_blocks {
        return Err(argument("Potts evaluation needs a piecewise constant solution"));
    }
    let effective = sol.effective_jumps();
    Ok(ObjectiveBreakdown::new(
        gamma * effective as f64,
        0.0,
        discrete_fidelity(f, g),
        sol.partition.jump_count(),
        effective,
    ))
}

/// Mumford-Shah value of a spectral solution: `gamma j(p) + mu^-2 int |f'|^2 + ||f - g||^2`.
///
/// With `mu = 0` the candidate must be piecewise constant (continuous Potts).
pub fn eval_ms(sol: &ContinuousSolution, gamma: f64, mu: f64) -> Result<ObjectiveBreakdown> {
    let smooth = if mu > 0.0 {
        sol.derivative_energy() / (mu * mu)
    } else if sol.is_piecewise_constant() {
        0.0
    } else {
        return Err(argument("mu = 0 requires a piecewise constant candidate"));
    };
    let fidelity = (sol.signal_norm_sq() - 2.0 * sol.inner_with_signal() + sol.norm_sq()).max(0.0);
    let jumps = sol.partition.jump_count();
    Ok(ObjectiveBreakdown::new(gamma * jumps as f64, smooth, fidelity, jumps, jumps))
}

/// The candidate side of [`family_eval`] and [`eval_distance`].
#[derive(Clone, Copy, Debug)]
pub enum Candidate<'a> {
    Samples(&'a DiscreteSignal),
    Discrete(&'a DiscreteSolution),
    Continuous(&'a ContinuousSolution),
}

/// The data side: grid samples `g_n` or a continuous signal `g`.
#[derive(Clone, Copy, Debug)]
pub enum Observation<'a> {
    Samples(&'a DiscreteSignal),
    Signal(&'a ContinuousSignal),
}

impl Observation<'_> {
    fn on_grid(&self, n: usize) -> Result<DiscreteSignal> {
        match self {
            Observation::Samples(s) => {
                if s.n() != n {
                    return Err(argument(format!("data has {} samples, expected {n}", s.n())));
                }
                Ok((*s).clone())
            }
            Observation::Signal(g) => discretize(g, n),
        }
    }
}

impl<'a> Candidate<'a> {
    fn samples(&self) -> Option<&'a DiscreteSignal> {
        match *self {
            Candidate::Samples(s) => Some(s),
            Candidate::Discrete(d) => Some(d.values()),
            Candidate::Continuous(_) => None,
        }
    }
}

/// Squared distance: `(1/n) sum (f - g_n)^2` at `t = 1/n`, `int (f - g)^2` at `t = 0`.
pub fn eval_distance(f: Candidate<'_>, g: Observation<'_>, resolution: Resolution) -> Result<f64> {
    match (resolution, f) {
        (Resolution::Grid(n), _) => {
            let fs = f
                .samples()
                .ok_or_else(|| argument("a grid functional needs grid samples as candidate"))?;
            if fs.n() != n {
                return Err(argument(format!("candidate has {} samples, expected {n}", fs.n())));
            }
            Ok(discrete_fidelity(fs, &g.on_grid(n)?))
        }
        (Resolution::Continuous, Candidate::Continuous(sol)) => match g {
            Observation::Signal(_) => Ok((sol.signal_norm_sq() - 2.0 * sol.inner_with_signal() + sol.norm_sq()).max(0.0)),
            Observation::Samples(_) => Err(argument("the continuous distance needs a continuous signal")),
        },
        (Resolution::Continuous, _) => Err(argument("the continuous distance needs a spectral candidate")),
    }
}

/// Fixed-partition objective: squared differences weighted `n/mu^2` on bonds
/// inside blocks plus `(1/n) sum (f - g)^2`. Infinite for `mu = 0` unless `f`
/// is constant on every block.
pub fn fixed_edge_objective(f: &DiscreteSignal, g: &DiscreteSignal, p: &GridPartition, mu: f64) -> Result<f64> {
    f.check_same_grid(g)?;
    if p.grid() != f.grid() {
        return Err(argument("partition and signal use different grids"));
    }
    let v = f.values();
    let mut penalty = 0.0;
    for (j, k) in p.blocks() {
        for i in j..k - 1 {
            let d = v[i + 1] - v[i];
            if mu == 0.0 {
                if d != 0.0 {
                    return Ok(f64::INFINITY);
                }
            } else {
                penalty += d * d;
            }
        }
    }
    let weight = if mu == 0.0 { 0.0 } else { f.n() as f64 / (mu * mu) };
    Ok(weight * penalty + discrete_fidelity(f, g))
}

/// Reduced Blake-Zisserman functional `gamma j(p) - <g_n, f*(p)> + ||g_n||^2`.
pub fn reduced_bz(p: &GridPartition, g: &DiscreteSignal, gamma: f64, mu: f64) -> Result<f64> {
    let sol = partition_solver_discrete(g, p, mu)?;
    let residual_inner: f64 = g
        .values()
        .iter()
        .zip(sol.values().values())
        .map(|(gv, fv)| gv * (gv - fv))
        .sum::<f64>()
        / g.n() as f64;
    Ok(gamma * p.jump_count() as f64 + residual_inner)
}

/// Reduced Mumford-Shah functional `gamma j(p) - <g, f*(p)> + ||g||^2`.
pub fn reduced_ms(p: &Partition, g: &ContinuousSignal, gamma: f64, mu: f64, modes: usize) -> Result<f64> {
    let sol = partition_solver_continuous(g, p, mu, modes)?;
    Ok(gamma * p.jump_count() as f64 + g.norm_sq() - sol.inner_with_signal())
}

/// Evaluate the family member selected by `q` at candidate `f` with data `g`.
pub fn family_eval(q: &ParameterPoint, f: Candidate<'_>, g: Observation<'_>) -> Result<ObjectiveBreakdown> {
    match q.resolution {
        Resolution::Grid(n) => {
            let fs = f
                .samples()
                .ok_or_else(|| argument("grid functionals are infinite off grid step functions"))?;
            if fs.n() != n {
                return Err(argument(format!(
                    "candidate lives on {} cells but t = 1/{n}; the functional is infinite there",
                    fs.n()
                )));
            }
            let gn = g.on_grid(n)?;
            match q.functional() {
                Functional::DiscreteDistance => {
                    let d = discrete_fidelity(fs, &gn);
                    Ok(ObjectiveBreakdown::new(0.0, 0.0, d, 0, 0))
                }
                Functional::DiscretePotts => match f {
                    Candidate::Discrete(sol) => eval_potts_solution(sol, &gn, q.gamma),
                    _ => eval_potts_discrete(fs, &gn, q.gamma),
                },
                _ => eval_bz(fs, &gn, q.gamma, q.mu),
            }
        }
        Resolution::Continuous => {
            let sol = match f {
                Candidate::Continuous(sol) => sol,
                _ => return Err(argument("continuous functionals need a spectral candidate")),
            };
            if !matches!(g, Observation::Signal(_)) {
                return Err(argument("continuous functionals need a continuous signal"));
            }
            match q.functional() {
                Functional::ContinuousDistance => {
                    let d = eval_distance(f, g, Resolution::Continuous)?;
                    Ok(ObjectiveBreakdown::new(0.0, 0.0, d, 0, 0))
                }
                Functional::ContinuousPotts => eval_ms(sol, q.gamma, 0.0),
                _ => eval_ms(sol, q.gamma, q.mu),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;

    fn sig(v: &[f64]) -> DiscreteSignal {
        DiscreteSignal::new(v.to_vec()).unwrap()
    }

    #[test]
    fn bz_examples() {
        let c = sig(&[0.7; 5]);
        assert_eq!(eval_bz(&c, &c, 1.0, 1.0).unwrap().total, 0.0);
        let f = sig(&[0.0, 1.0]);
        let b = eval_bz(&f, &f, 10.0, 1.0).unwrap();
        assert_eq!((b.smooth_term, b.fidelity_term, b.total), (2.0, 0.0, 2.0));
        let b = eval_bz(&f, &f, 1.0, 1.0).unwrap();
        assert_eq!((b.jump_term, b.total, b.effective_jumps), (1.0, 1.0, 1));
        assert!(matches!(eval_bz(&f, &f, 1.0, 0.0), Err(Error::Routing(_))));
        assert!(eval_bz(&f, &sig(&[0.0, 1.0, 2.0]), 1.0, 1.0).is_err());
    }

    #[test]
    fn potts_examples() {
        let c = sig(&[0.3; 4]);
        assert_eq!(eval_potts_discrete(&c, &c, 1.0).unwrap().total, 0.0);
        let f = sig(&[0.0, 0.0, 1.0, 1.0]);
        assert_eq!(eval_potts_discrete(&f, &f, 0.1).unwrap().total, 0.1);
        let flat = sig(&[0.5; 4]);
        assert_eq!(eval_potts_discrete(&flat, &f, 0.1).unwrap().total, 0.25);
    }

    #[test]
    fn potts_solution_counts_only_real_jumps() {
        let g = sig(&[1.0, 1.0, 1.0, 1.0]);
        let p = GridPartition::new(g.grid(), vec![0, 2, 4]).unwrap();
        let sol = partition_solver_discrete(&g, &p, 0.0).unwrap();
        let b = eval_potts_solution(&sol, &g, 0.3).unwrap();
        assert_eq!((b.partition_jumps, b.effective_jumps, b.total), (1, 0, 0.0));
    }

    #[test]
    fn distance_examples() {
        let f = sig(&[0.0, 0.0]);
        let g = sig(&[1.0, 1.0]);
        assert_eq!(eval_distance(Candidate::Samples(&f), Observation::Samples(&g), Resolution::Grid(2)).unwrap(), 1.0);
        assert_eq!(eval_distance(Candidate::Samples(&g), Observation::Samples(&g), Resolution::Grid(2)).unwrap(), 0.0);
        assert!(eval_distance(Candidate::Samples(&g), Observation::Samples(&g), Resolution::Continuous).is_err());
    }

    #[test]
    fn ms_examples() {
        let g = ContinuousSignal::constant(2.0);
        let sol = partition_solver_continuous(&g, &Partition::trivial(), 1.0, 16).unwrap();
        assert!(eval_ms(&sol, 1.0, 1.0).unwrap().total.abs() < 1e-12);

        let h = ContinuousSignal::indicator(0.5).unwrap();
        let p = Partition::new(vec![0.0, 0.5, 1.0]).unwrap();
        let sol = partition_solver_continuous(&h, &p, 0.0, 16).unwrap();
        let b = eval_ms(&sol, 0.7, 0.0).unwrap();
        assert_eq!(b.smooth_term, 0.0);
        assert!((b.total - 0.7).abs() < 1e-15);
    }

    #[test]
    fn reduced_bz_examples() {
        let g = sig(&[0.0, 1.0, 3.0, 2.0]);
        let grid = g.grid();
        let mean = g.mean();
        let variance = g.values().iter().map(|v| (v - mean).powi(2)).sum::<f64>() / 4.0;
        let trivial = reduced_bz(&GridPartition::trivial(grid), &g, 0.4, 0.0).unwrap();
        assert!((trivial - variance).abs() < 1e-15);
        let direct = eval_potts_discrete(&sig(&[mean; 4]), &g, 0.4).unwrap().total;
        assert!((trivial - direct).abs() < 1e-15);
        let full = reduced_bz(&GridPartition::full(grid), &g, 0.4, 1.3).unwrap();
        assert!((full - 0.4 * 3.0).abs() < 1e-15);
    }

    #[test]
    fn reduced_bz_matches_fixed_edge_objective() {
        let g = sig(&[0.1, 0.9, 0.4, 1.7, 1.2, -0.3, 0.0, 0.8]);
        let grid = g.grid();
        for indices in [vec![0, 8], vec![0, 3, 8], vec![0, 1, 5, 6, 8]] {
            let p = GridPartition::new(grid, indices).unwrap();
            for mu in [0.0, 0.5, 2.0, 9.0] {
                let gamma = 0.05;
                let reduced = reduced_bz(&p, &g, gamma, mu).unwrap();
                let sol = partition_solver_discrete(&g, &p, mu).unwrap();
                let direct = gamma * p.jump_count() as f64 + fixed_edge_objective(sol.values(), &g, &p, mu).unwrap();
                assert!((reduced - direct).abs() < 1e-10, "{reduced} vs {direct}");
            }
        }
    }

    #[test]
    fn reduced_ms_examples() {
        let g = ContinuousSignal::constant(1.3);
        let p = Partition::new(vec![0.0, 0.25, 1.0]).unwrap();
        assert!((reduced_ms(&p, &g, 0.2, 1.0, 32).unwrap() - 0.2).abs() < 1e-12);

        let h = ContinuousSignal::indicator(0.5).unwrap();
        let v = reduced_ms(&Partition::trivial(), &h, 0.9, 0.0, 32).unwrap();
        assert!((v - 0.25).abs() < 1e-15);

        let p = Partition::new(vec![0.0, 0.3, 1.0]).unwrap();
        for mu in [0.5, 2.0] {
            let reduced = reduced_ms(&p, &h, 0.1, mu, 128).unwrap();
            let sol = partition_solver_continuous(&h, &p, mu, 128).unwrap();
            let direct = eval_ms(&sol, 0.1, mu).unwrap().total;
            assert!((reduced - direct).abs() < 1e-8, "{reduced} vs {direct}");
        }
    }

    #[test]
    fn family_dispatch() {
        let g = sig(&[0.0, 1.0, 1.0, 0.5]);
        let q = ParameterPoint::discrete(0.0, 2.0, 4).unwrap();
        assert_eq!(q.functional(), Functional::DiscreteDistance);
        let b = family_eval(&q, Candidate::Samples(&g), Observation::Samples(&g)).unwrap();
        assert_eq!(b.total, 0.0);

        let q = ParameterPoint::continuous(0.3, 0.0).unwrap();
        assert_eq!(q.functional(), Functional::ContinuousPotts);
        let h = ContinuousSignal::indicator(0.5).unwrap();
        let sol = partition_solver_continuous(&h, &Partition::new(vec![0.0, 0.5, 1.0]).unwrap(), 0.0, 4).unwrap();
        let b = family_eval(&q, Candidate::Continuous(&sol), Observation::Signal(&h)).unwrap();
        assert!((b.total - 0.3).abs() < 1e-15);

        let q = ParameterPoint::discrete(0.3, 1.0, 8).unwrap();
        assert!(family_eval(&q, Candidate::Samples(&g), Observation::Samples(&g)).is_err());

        // Penalty only when f = g.
        let q = ParameterPoint::discrete(0.3, 1.0, 4).unwrap();
        let b = family_eval(&q, Candidate::Samples(&g), Observation::Samples(&g)).unwrap();
        assert_eq!(b.fidelity_term, 0.0);
        assert!(b.total > 0.0);
    }

    #[test]
    fn resolution_parsing() {
        assert_eq!(Resolution::from_t(0.0).unwrap(), Resolution::Continuous);
        assert_eq!(Resolution::from_t(0.125).unwrap(), Resolution::Grid(8));
        assert_eq!(Resolution::from_t(1.0 / 3.0).unwrap(), Resolution::Grid(3));
        assert!(Resolution::from_t(0.3).is_err());
        assert!(Resolution::from_t(-0.5).is_err());
        assert!(ParameterPoint::new(-1.0, 0.0, Resolution::Continuous).is_err());
        assert!(ParameterPoint::new(1.0, 0.0, Resolution::Grid(0)).is_err());
        let _ = Grid::new(1).unwrap();
    }

    #[test]
    fn refinement_never_increases_the_quadratic_part() {
        let g = sig(&[0.3, -0.2, 1.1, 0.9, 0.0, 0.4, 2.0, 1.5]);
        let grid = g.grid();
        let coarse = GridPartition::new(grid, vec![0, 4, 8]).unwrap();
        let fine = GridPartition::new(grid, vec![0, 2, 4, 7, 8]).unwrap();
        for mu in [0.0, 0.7, 3.0] {
            let a = reduced_bz(&coarse, &g, 0.0, mu).unwrap();
            let b = reduced_bz(&fine, &g, 0.0, mu).unwrap();
            assert!(b <= a + 1e-14);
        }
    }
}
