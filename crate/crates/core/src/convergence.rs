// SPDX-License-Identifier: MIT OR Apache-2.0

//! Experiments on the stability of minimizers.
//!
//! A [`Trajectory`] is a sequence of parameter points converging to a limit
//! point. [`run_trajectory`] computes the global minimizer at every step and
//! at the limit and records L2 and Hausdorff distances; the verdict asks for
//! small final distances and a tail that does not grow by more than the
//! configured slack. The remaining runs check the partition solvers under
//! grid refinement, the discrete penalty on cell averages, and the
//! Lipschitz dependence on `mu^2`.

use serde::{Deserialize, Serialize};

use crate::error::{argument, Result};
use crate::exec::Execution;
use crate::functionals::{eval_bz, ParameterPoint, Resolution};
use crate::grid::{discretize, ContinuousSignal, Cubic, Grid, Piece};
use crate::optimize::{minimize_dp_with, minimize_ms_grid_with, SegmentationResult, SolveOptions};
use crate::partitions::{GridPartition, Partition};
use crate::solvers::{
    lipschitz_bound_continuous, lipschitz_bound_discrete, partition_solver_continuous, partition_solver_discrete,
    DiscreteSolution, PiecewiseSolution, DEFAULT_MODES,
};

/// Parameter points `q_s` with their declared limit `q`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    steps: Vec<ParameterPoint>,
    limit: ParameterPoint,
}

fn component_error(q: &ParameterPoint, limit: &ParameterPoint) -> f64 {
    (q.gamma - limit.gamma)
        .abs()
        .max((q.mu - limit.mu).abs())
        .max((q.t() - limit.t()).abs())
}

impl Trajectory {
    /// Accepts the declaration when the largest component distance to the
    /// limit never grows and either reaches zero or at least halves over the
    /// run. A grid limit must be attained by the last step.
    pub fn new(steps: Vec<ParameterPoint>, limit: ParameterPoint) -> Result<Self> {
        if steps.is_empty() {
            return Err(argument("a trajectory needs at least one step"));
        }
        let errors: Vec<f64> = steps.iter().map(|q| component_error(q, &limit)).collect();
        if let Some(s) = errors.windows(2).position(|w| w[1] > w[0] * (1.0 + 1e-12)) {
            return Err(argument(format!(
                "step {} moves away from the declared limit ({} > {})",
                s + 1,
                errors[s + 1],
                errors[s]
            )));
        }
        let (first, last) = (errors[0], errors[errors.len() - 1]);
        if last > 0.0 && last > first / 2.0 {
            return Err(argument(format!(
                "steps do not approach the declared limit (distance {first} -> {last})"
            )));
        }
        if let Resolution::Grid(n) = limit.resolution {
            if steps[steps.len() - 1].resolution != Resolution::Grid(n) {
                return Err(argument(format!("the limit grid n = {n} is not reached by the last step")));
            }
        }
        Ok(Self { steps, limit })
    }

    pub fn constant(q: ParameterPoint, len: usize) -> Result<Self> {
        Self::new(vec![q; len], q)
    }

    pub fn steps(&self) -> &[ParameterPoint] {
        &self.steps
    }

    pub fn limit(&self) -> &ParameterPoint {
        &self.limit
    }
}

/// How limit minimizers are computed and how the verdict is judged.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LimitConfig {
    /// Candidate grid for continuous minimizers.
    pub n_ref: usize,
    /// Coarser grid used to test the continuous limit for sensitivity.
    pub check_n_ref: Option<usize>,
    /// Cosine modes per interval.
    pub modes: usize,
    /// Bound on the final L2 distances.
    pub tolerance: f64,
    /// Bound on the final Hausdorff distances.
    pub hausdorff_tolerance: f64,
    /// Allowed relative growth between consecutive tail distances.
    pub tail_slack: f64,
    /// Number of final steps that must meet the tolerances.
    pub final_count: usize,
    pub options: SolveOptions,
}

impl Default for LimitConfig {
    fn default() -> Self {
        Self {
            n_ref: 256,
            check_n_ref: Some(128),
            modes: 64,
            tolerance: 1e-2,
            hausdorff_tolerance: 1.0 / 64.0,
            tail_slack: 0.1,
            final_count: 3,
            options: SolveOptions::default(),
        }
    }
}

/// Absolute allowance added to the tail comparison.
const TAIL_FLOOR: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub parameters: ParameterPoint,
    pub objective: f64,
    pub partition: Partition,
    pub l2_distance: f64,
    pub hausdorff_distance: f64,
    pub norm: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LimitRecord {
    pub parameters: ParameterPoint,
    pub objective: f64,
    pub partition: Partition,
    pub n_ref: Option<usize>,
    /// Set when the coarser candidate grid produced a different partition.
    pub unstable: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub passed: bool,
    pub final_distances: Vec<f64>,
    pub final_hausdorff: Vec<f64>,
    pub monotone_tail: bool,
    /// Every minimizer norm is at most `||g|| + 1e-9`.
    pub bounded: bool,
    pub tolerance: f64,
    pub hausdorff_tolerance: f64,
    pub tail_slack: f64,
}

/// Judge a distance sequence: the last `final_count` entries below the
/// tolerances and no growth beyond the slack over the second half.
pub fn judge(distances: &[f64], hausdorff: &[f64], bounded: bool, cfg: &LimitConfig) -> Verdict {
    let k = cfg.final_count.min(distances.len());
    let final_distances = distances[distances.len() - k..].to_vec();
    let final_hausdorff = hausdorff[hausdorff.len() - k..].to_vec();
    let tail = &distances[distances.len() / 2..];
    let monotone_tail = tail
        .windows(2)
        .all(|w| w[1] <= (1.0 + cfg.tail_slack) * w[0] + TAIL_FLOOR);
    let passed = monotone_tail
        && bounded
        && final_distances.iter().all(|&d| d < cfg.tolerance)
        && final_hausdorff.iter().all(|&d| d < cfg.hausdorff_tolerance);
    Verdict {
        passed,
        final_distances,
        final_hausdorff,
        monotone_tail,
        bounded,
        tolerance: cfg.tolerance,
        hausdorff_tolerance: cfg.hausdorff_tolerance,
        tail_slack: cfg.tail_slack,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryReport {
    pub steps: Vec<StepRecord>,
    pub limit: LimitRecord,
    pub verdict: Verdict,
}

/// Global minimizer of the family member selected by `q`.
pub fn minimizer_at(g: &ContinuousSignal, q: &ParameterPoint, cfg: &LimitConfig) -> Result<SegmentationResult> {
    match q.resolution {
        Resolution::Grid(n) => minimize_dp_with(&discretize(g, n)?, q.gamma, q.mu, &cfg.options),
        Resolution::Continuous => minimize_ms_grid_with(g, q.gamma, q.mu, cfg.n_ref, cfg.modes, &cfg.options),
    }
}

pub fn run_trajectory(g: &ContinuousSignal, traj: &Trajectory, cfg: &LimitConfig) -> Result<TrajectoryReport> {
    let limit = minimizer_at(g, &traj.limit, cfg)?;
    let limit_partition = limit.partition();
    let unstable = match (traj.limit.resolution, cfg.check_n_ref) {
        (Resolution::Continuous, Some(coarse)) => {
            let check = minimize_ms_grid_with(g, traj.limit.gamma, traj.limit.mu, coarse, cfg.modes, &cfg.options)?;
            !check.partition().approx_eq(&limit_partition)
        }
        _ => false,
    };
    let steps = cfg.options.execution.map(traj.steps.len(), |s| minimizer_at(g, &traj.steps[s], cfg));
    let bound = g.norm() + 1e-9;
    let records = steps
        .into_iter()
        .zip(&traj.steps)
        .map(|(r, q)| {
            let r = r?;
            let partition = r.partition();
            Ok(StepRecord {
                parameters: *q,
                objective: r.objective.total,
                l2_distance: r.solution.l2_distance(&limit.solution),
                hausdorff_distance: partition.hausdorff_distance(&limit_partition),
                norm: r.solution.norm(),
                partition,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let distances: Vec<f64> = records.iter().map(|r| r.l2_distance).collect();
    let hausdorff: Vec<f64> = records.iter().map(|r| r.hausdorff_distance).collect();
    let bounded = records.iter().all(|r| r.norm <= bound);
    Ok(TrajectoryReport {
        verdict: judge(&distances, &hausdorff, bounded, cfg),
        limit: LimitRecord {
            parameters: traj.limit,
            objective: limit.objective.total,
            partition: limit_partition,
            n_ref: limit.diagnostics.n_ref,
            unstable,
        },
        steps: records,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverRecord {
    pub n: usize,
    pub distance: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverReport {
    pub partition: Partition,
    pub mu: f64,
    pub records: Vec<SolverRecord>,
    /// Each distance is below its predecessor (or both vanish).
    pub decreasing: bool,
    pub tolerance: f64,
    pub passed: bool,
}

/// Distances at or below this level count as exact.
const EXACT: f64 = 1e-13;

/// Distance between the embedded discrete partition solution at each `n`
/// and the continuous one.
pub fn solver_convergence(
    g: &ContinuousSignal,
    p: &Partition,
    mu: f64,
    n_list: &[usize],
    tolerance: f64,
    execution: Execution,
) -> Result<SolverReport> {
    if n_list.is_empty() {
        return Err(argument("n_list must not be empty"));
    }
    let limit = PiecewiseSolution::Continuous(partition_solver_continuous(g, p, mu, DEFAULT_MODES)?);
    let results = execution.map(n_list.len(), |i| -> Result<SolverRecord> {
        let n = n_list[i];
        let grid = Grid::new(n)?;
        let pn = p.on_grid(grid)?;
        let sol = partition_solver_discrete(&discretize(g, n)?, &pn, mu)?;
        Ok(SolverRecord {
            n,
            distance: PiecewiseSolution::Discrete(sol).l2_distance(&limit),
        })
    });
    let records = results.into_iter().collect::<Result<Vec<_>>>()?;
    let decreasing = records
        .windows(2)
        .all(|w| w[1].distance < w[0].distance || w[0].distance.max(w[1].distance) <= EXACT);
    let passed = decreasing && records[records.len() - 1].distance < tolerance;
    Ok(SolverReport {
        partition: p.clone(),
        mu,
        records,
        decreasing,
        tolerance,
        passed,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PenaltyRecord {
    pub parameters: ParameterPoint,
    pub penalty: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PenaltyReport {
    pub records: Vec<PenaltyRecord>,
    /// `gamma j(f) + mu^-2 int |f'|^2` at the limit parameters.
    pub limit_value: f64,
    pub relative_tolerance: f64,
    pub upper_ok: bool,
    pub lower_ok: bool,
    pub passed: bool,
}

/// Discrete penalty `sum min{(n/mu^2) (Delta f)^2, gamma}` of `discretize(f, n)`
/// along grid parameter points, compared at the last point with the
/// continuous penalty at `(gamma, mu)`.
pub fn penalty_gamma_check(
    f: &ContinuousSignal,
    steps: &[ParameterPoint],
    gamma: f64,
    mu: f64,
    relative_tolerance: f64,
) -> Result<PenaltyReport> {
    if steps.is_empty() {
        return Err(argument("at least one step is required"));
    }
    if mu.is_nan() || mu <= 0.0 {
        return Err(argument("the penalty needs mu > 0"));
    }
    let records = steps
        .iter()
        .map(|q| {
            let n = match q.resolution {
                Resolution::Grid(n) => n,
                Resolution::Continuous => return Err(argument("penalty steps must be grid points")),
            };
            let fn_ = discretize(f, n)?;
            let b = eval_bz(&fn_, &fn_, q.gamma, q.mu)?;
            Ok(PenaltyRecord {
                parameters: *q,
                penalty: b.jump_term + b.smooth_term,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let limit_value = gamma * f.jump_count(1e-12) as f64 + f.derivative_energy() / (mu * mu);
    let last = records[records.len() - 1].penalty;
    let slack = relative_tolerance * limit_value + 1e-12;
    let upper_ok = last <= limit_value + slack;
    let lower_ok = last >= limit_value - slack;
    Ok(PenaltyReport {
        records,
        limit_value,
        relative_tolerance,
        upper_ok,
        lower_ok,
        passed: upper_ok && lower_ok,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LipschitzRecord {
    pub n: usize,
    pub bound: f64,
    pub continuous_bound: f64,
    /// Largest `||f*(mu) - f*(mu')|| / (bound |mu^2 - mu'^2|)` over all pairs.
    pub max_ratio: f64,
    /// Largest `||f*|| - ||g_n||` over the sweep.
    pub max_norm_excess: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LipschitzReport {
    pub records: Vec<LipschitzRecord>,
    pub passed: bool,
}

/// Check the Lipschitz bound in `mu^2` for each grid partition over all
/// pairs of `mu_grid`, and compare each bound with its continuous counterpart.
pub fn lipschitz_sweep(g: &ContinuousSignal, partitions: &[GridPartition], mu_grid: &[f64]) -> Result<LipschitzReport> {
    let records = partitions
        .iter()
        .map(|p| {
            let n = p.grid().n();
            let gn = discretize(g, n)?;
            let bound = lipschitz_bound_discrete(&gn, p);
            let sols = mu_grid
                .iter()
                .map(|&mu| partition_solver_discrete(&gn, p, mu))
                .collect::<Result<Vec<DiscreteSolution>>>()?;
            let mut max_ratio = 0.0f64;
            for (a, (sa, &ma)) in sols.iter().zip(mu_grid).enumerate() {
                for (sb, &mb) in sols.iter().zip(mu_grid).skip(a + 1) {
                    let dist = sa
                        .values()
                        .values()
                        .iter()
                        .zip(sb.values().values())
                        .map(|(x, y)| (x - y) * (x - y))
                        .sum::<f64>()
                        / n as f64;
                    let scale = bound * (ma * ma - mb * mb).abs();
                    if scale > 0.0 {
                        max_ratio = max_ratio.max(dist.sqrt() / scale);
                    } else if dist > 0.0 {
                        max_ratio = f64::INFINITY;
                    }
                }
            }
            let max_norm_excess = sols
                .iter()
                .map(|s| s.values().norm() - gn.norm())
                .fold(f64::NEG_INFINITY, f64::max);
            Ok(LipschitzRecord {
                n,
                bound,
                continuous_bound: lipschitz_bound_continuous(g, &p.to_partition()),
                max_ratio,
                max_norm_excess,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let passed = records.iter().all(|r| {
        let stable = r.bound == 0.0 || (0.5..=2.0).contains(&(r.bound / r.continuous_bound));
        r.max_ratio <= 1.0 + 1e-12 && r.max_norm_excess <= 1e-12 && stable
    });
    Ok(LipschitzReport { records, passed })
}

/// Partition of `[0, 1]` at the block boundaries where the solution jumps by
/// more than `tol`.
pub fn associated_partition(sol: &DiscreteSolution, tol: f64) -> Partition {
    let v = sol.values().values();
    let grid = sol.partition.grid();
    let mut points = vec![0.0];
    points.extend(
        sol.partition
            .interior()
            .iter()
            .filter(|&&k| (v[k] - v[k - 1]).abs() > tol)
            .map(|&k| grid.point(k)),
    );
    points.push(1.0);
    Partition::new(points).expect("grid points are sorted and interior")
}

/// Any of the report kinds, for serialization.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ConvergenceReport {
    Trajectory(TrajectoryReport),
    Solver(SolverReport),
    Penalty(PenaltyReport),
    Lipschitz(LipschitzReport),
}

impl ConvergenceReport {
    pub fn passed(&self) -> bool {
        match self {
            ConvergenceReport::Trajectory(r) => r.verdict.passed,
            ConvergenceReport::Solver(r) => r.passed,
            ConvergenceReport::Penalty(r) => r.passed,
            ConvergenceReport::Lipschitz(r) => r.passed,
        }
    }
}

/// A named trajectory together with its signal.
#[derive(Clone, Debug, PartialEq)]
pub struct BundledTrajectory {
    pub name: &'static str,
    pub signal: ContinuousSignal,
    pub trajectory: Trajectory,
}

/// Two jumps on a linear, a constant and a linear piece, aligned with the
/// 64-point grid.
pub fn two_jump_signal() -> ContinuousSignal {
    ContinuousSignal::new(vec![
        Piece::new(0.0, 0.3125, Cubic([0.2, 0.5, 0.0, 0.0])),
        Piece::new(0.3125, 0.6875, Cubic::constant(1.0)),
        Piece::new(0.6875, 1.0, Cubic([0.4, -0.2, 0.0, 0.0])),
    ])
    .expect("pieces tile [0, 1]")
}

/// The three reference trajectories: `gamma_s -> gamma` and `mu_s -> mu` on a
/// fixed grid, and `t_s = 2^-s -> 0` for a unit step.
pub fn bundled_trajectories() -> Vec<BundledTrajectory> {
    let point = |gamma: f64, mu: f64, resolution| ParameterPoint::new(gamma, mu, resolution).expect("valid");
    let n = Resolution::Grid(64);
    let gamma_steps = (1..=12)
        .map(|s| point(0.02 * (1.0 + 0.5f64.powi(s)), 2.0, n))
        .collect();
    let mu_steps = (1..=12).map(|s| point(0.02, 2.0 + 0.5f64.powi(s), n)).collect();
    let t_steps = (1..=10)
        .map(|s| point(0.1, 1.0, Resolution::Grid(1 << s)))
        .collect();
    vec![
        BundledTrajectory {
            name: "gamma",
            signal: two_jump_signal(),
            trajectory: Trajectory::new(gamma_steps, point(0.02, 2.0, n)).expect("converges"),
        },
        BundledTrajectory {
            name: "mu",
            signal: two_jump_signal(),
            trajectory: Trajectory::new(mu_steps, point(0.02, 2.0, n)).expect("converges"),
        },
        BundledTrajectory {
            name: "refinement",
            signal: ContinuousSignal::indicator(0.5).expect("valid"),
            trajectory: Trajectory::new(t_steps, point(0.1, 1.0, Resolution::Continuous)).expect("converges"),
        },
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trajectory_validation() {
        let q = ParameterPoint::discrete(0.1, 1.0, 8).unwrap();
        assert!(Trajectory::constant(q, 4).is_ok());
        let limit = ParameterPoint::continuous(0.1, 1.0).unwrap();
        assert!(Trajectory::new(vec![q; 5], limit).is_err());
        let away = vec![
            ParameterPoint::discrete(0.2, 1.0, 8).unwrap(),
            ParameterPoint::discrete(0.3, 1.0, 8).unwrap(),
        ];
        assert!(Trajectory::new(away, q).is_err());
        let short = vec![ParameterPoint::discrete(0.1, 1.0, 4).unwrap()];
        assert!(Trajectory::new(short, q).is_err());
        assert!(Trajectory::new(Vec::new(), q).is_err());
    }

    #[test]
    fn constant_trajectory_has_zero_distances() {
        let g = two_jump_signal();
        let q = ParameterPoint::discrete(0.02, 2.0, 32).unwrap();
        let r = run_trajectory(&g, &Trajectory::constant(q, 4).unwrap(), &LimitConfig::default()).unwrap();
        assert!(r.steps.iter().all(|s| s.l2_distance == 0.0 && s.hausdorff_distance == 0.0));
        assert!(r.verdict.passed);
    }

    #[test]
    fn refinement_of_a_step_keeps_its_jump() {
        let g = ContinuousSignal::indicator(0.5).unwrap();
        let steps = (1..=6).map(|s| ParameterPoint::discrete(0.1, 0.0, 1 << s).unwrap()).collect();
        let traj = Trajectory::new(steps, ParameterPoint::continuous(0.1, 0.0).unwrap()).unwrap();
        let cfg = LimitConfig {
            n_ref: 32,
            check_n_ref: Some(16),
            ..Default::default()
        };
        let r = run_trajectory(&g, &traj, &cfg).unwrap();
        for s in &r.steps {
            assert_eq!(s.partition.points(), &[0.0, 0.5, 1.0]);
            assert!(s.l2_distance < 1e-14);
        }
        assert!(!r.limit.unstable);
        assert!(r.verdict.passed);
    }

    #[test]
    fn solver_convergence_examples() {
        let c = ContinuousSignal::constant(0.3);
        let p = Partition::new(vec![0.0, 0.25, 1.0]).unwrap();
        let r = solver_convergence(&c, &p, 1.5, &[4, 8, 16], 1e-3, Execution::Sequential).unwrap();
        assert!(r.records.iter().all(|x| x.distance < 1e-13));
        assert!(r.passed);

        let h = ContinuousSignal::indicator(0.5).unwrap();
        let p = Partition::new(vec![0.0, 0.5, 1.0]).unwrap();
        let r = solver_convergence(&h, &p, 0.0, &[2, 4, 6, 10], 1e-3, Execution::Sequential).unwrap();
        assert!(r.records.iter().all(|x| x.distance < 1e-13));

        assert!(solver_convergence(&h, &p, 0.0, &[3], 1e-3, Execution::Sequential).is_err());
    }

    #[test]
    fn penalty_examples() {
        let c = ContinuousSignal::constant(1.0);
        let steps: Vec<_> = [8, 64].iter().map(|&n| ParameterPoint::discrete(0.5, 1.0, n).unwrap()).collect();
        let r = penalty_gamma_check(&c, &steps, 0.5, 1.0, 0.05).unwrap();
        assert!(r.records.iter().all(|x| x.penalty == 0.0));
        assert!(r.passed);

        let h = ContinuousSignal::indicator(0.5).unwrap();
        let steps: Vec<_> = [2, 4, 8].iter().map(|&n| ParameterPoint::discrete(0.5, 1.0, n).unwrap()).collect();
        let r = penalty_gamma_check(&h, &steps, 0.5, 1.0, 0.05).unwrap();
        assert!(r.records.iter().all(|x| x.penalty == 0.5));
        assert_eq!(r.limit_value, 0.5);
    }

    #[test]
    fn lipschitz_examples() {
        let g = two_jump_signal();
        let parts: Vec<_> = [16, 32]
            .iter()
            .map(|&n| Partition::new(vec![0.0, 0.3125, 1.0]).unwrap().on_grid(Grid::new(n).unwrap()).unwrap())
            .collect();
        let r = lipschitz_sweep(&g, &parts, &[0.0, 0.5, 1.0, 3.0]).unwrap();
        assert!(r.passed, "{r:?}");
        let same = lipschitz_sweep(&g, &parts[..1], &[1.0, 1.0]).unwrap();
        assert_eq!(same.records[0].max_ratio, 0.0);
    }

    #[test]
    fn judge_applies_slack_to_the_tail_only() {
        let cfg = LimitConfig::default();
        let v = judge(&[0.5, 0.9, 0.004, 0.0041, 0.004], &[0.0; 5], true, &cfg);
        assert!(v.passed);
        let v = judge(&[0.5, 0.1, 0.004, 0.005, 0.004], &[0.0; 5], true, &cfg);
        assert!(!v.monotone_tail);
    }
}
