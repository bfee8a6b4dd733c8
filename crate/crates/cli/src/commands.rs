// SPDX-License-Identifier: MIT OR Apache-2.0

use std::fs;
use std::path::Path;
use std::time::Instant;

use msbz_core::convergence::{
    bundled_trajectories, run_trajectory, solver_convergence, ConvergenceReport, LimitConfig, Trajectory,
};
use msbz_core::functionals::{family_eval, Candidate, Observation};
use msbz_core::grid::{coarsen, discretize};
use msbz_core::optimize::{brute_force_min, minimize_dp_with, minimize_ms_grid_with};
use msbz_core::solvers::{partition_solver_continuous, partition_solver_discrete, ContinuousSolution, DiscreteSolution};
use msbz_core::{
    ContinuousSignal, DiscreteSignal, Execution, Grid, ParameterPoint, Partition, PiecewiseSolution, Resolution,
    SolveOptions,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

use crate::document::{
    payload_text, Document, NamedReport, OracleInstance, OraclePayload, PartitionSummary, Payload, SegmentPayload,
    SolvePayload, SweepPayload,
};
use crate::io::{read_bytes, read_signal, InputInfo, Signal, SignalKind};
use crate::{CliError, Model, OracleArgs, ProblemArgs, ReportArgs, SegmentArgs, SolvePartitionArgs, SweepArgs};

/// Jump charges cycled through by random oracle instances.
pub const ORACLE_GAMMAS: [f64; 5] = [0.0, 0.01, 0.1, 1.0, 10.0];
/// Smoothing parameters cycled through by random oracle instances.
pub const ORACLE_MUS: [f64; 4] = [0.0, 0.5, 1.0, 5.0];
/// Objective agreement required between the two minimizers.
pub const ORACLE_TOLERANCE: f64 = 1e-9;

fn arg(msg: impl Into<String>) -> CliError {
    CliError::Argument(msg.into())
}

fn emit(doc: &Document, output: Option<&Path>) -> Result<(), CliError> {
    let json = doc.to_json();
    match output {
        Some(path) => fs::write(path, json).map_err(|e| arg(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{json}");
            Ok(())
        }
    }
}

/// Data as seen by a problem: grid samples or a continuous signal.
enum Data {
    Grid(DiscreteSignal),
    Continuous(ContinuousSignal),
}

fn resolution(problem: &ProblemArgs, signal: &Signal) -> Result<Resolution, CliError> {
    if let Some(n) = problem.n {
        if n == 0 {
            return Err(arg("--n must be positive"));
        }
        return Ok(Resolution::Grid(n));
    }
    if let Some(t) = problem.t {
        return Ok(Resolution::from_t(t)?);
    }
    Ok(match signal {
        Signal::Samples(s) => Resolution::Grid(s.n()),
        Signal::Piecewise(_) => Resolution::Continuous,
    })
}

fn load(problem: &ProblemArgs) -> Result<(Data, InputInfo, Resolution), CliError> {
    if !(problem.mu >= 0.0 && problem.mu.is_finite()) {
        return Err(arg(format!("--mu {} must be finite and nonnegative", problem.mu)));
    }
    let (signal, info) = read_signal(&problem.input, problem.kind)?;
    let res = resolution(problem, &signal)?;
    let data = match (&signal, res) {
        (Signal::Samples(s), Resolution::Grid(n)) if n == s.n() => Data::Grid(s.clone()),
        (Signal::Samples(s), Resolution::Grid(n)) => Data::Grid(coarsen(s, n).map_err(|_| {
            arg(format!("--n {n} must divide the number of samples {}", s.n()))
        })?),
        (Signal::Samples(_), Resolution::Continuous) => {
            return Err(arg("t = 0 needs a piecewise signal; samples only define grid problems"))
        }
        (Signal::Piecewise(g), Resolution::Grid(n)) => Data::Grid(discretize(g, n)?),
        (Signal::Piecewise(g), Resolution::Continuous) => Data::Continuous(g.clone()),
    };
    Ok((data, info, res))
}

fn model_name(model: Model, data: &Data, mu: f64) -> Result<&'static str, CliError> {
    match (model, data) {
        (Model::Bz, Data::Grid(_)) if mu > 0.0 => Ok("bz"),
        (Model::Bz, Data::Grid(_)) => Err(arg("--model bz needs --mu > 0 (mu = 0 is the Potts model)")),
        (Model::Bz, Data::Continuous(_)) => Err(arg("--model bz needs a grid (--n or samples)")),
        (Model::Potts, _) if mu > 0.0 => Err(arg("--model potts needs --mu 0")),
        (Model::Potts, _) => Ok("potts"),
        (Model::Ms, Data::Continuous(_)) => Ok("ms"),
        (Model::Ms, Data::Grid(_)) => Err(arg("--model ms needs a piecewise signal at t = 0")),
        (Model::Auto, Data::Grid(_)) => Ok(if mu > 0.0 { "bz" } else { "potts" }),
        (Model::Auto, Data::Continuous(_)) => Ok(if mu > 0.0 { "ms" } else { "potts" }),
    }
}

pub fn segment(a: &SegmentArgs) -> Result<(), CliError> {
    let start = Instant::now();
    let p = &a.problem;
    if !(a.gamma >= 0.0 && a.gamma.is_finite()) {
        return Err(arg(format!("--gamma {} must be finite and nonnegative", a.gamma)));
    }
    let (data, info, _) = load(p)?;
    let model = model_name(a.model, &data, p.mu)?;
    let mut opts = SolveOptions::default();
    if let Some(cap) = a.cap {
        opts.caps.potts_n = cap;
        opts.caps.bz_n = cap;
        opts.caps.ms_nref = cap;
    }
    let result = match &data {
        Data::Grid(g) => minimize_dp_with(g, a.gamma, p.mu, &opts)?,
        Data::Continuous(g) => minimize_ms_grid_with(g, a.gamma, p.mu, a.nref, p.modes, &opts)?,
    };
    let payload = Payload::Segment(SegmentPayload {
        input: info,
        model: model.to_string(),
        partition: PartitionSummary::of(&result.solution),
        result,
    });
    emit(&Document::new(payload, start.elapsed()), p.output.as_deref())
}

pub fn solve_partition(a: &SolvePartitionArgs) -> Result<(), CliError> {
    let start = Instant::now();
    let p = &a.problem;
    if !(a.gamma >= 0.0 && a.gamma.is_finite()) {
        return Err(arg(format!("--gamma {} must be finite and nonnegative", a.gamma)));
    }
    let partition = Partition::new(a.partition.clone())?;
    let (data, info, res) = load(p)?;
    let parameters = ParameterPoint::new(a.gamma, p.mu, res)?;
    let (solution, objective) = match &data {
        Data::Grid(g) => {
            let gp = partition.on_grid(g.grid())?;
            let sol = partition_solver_discrete(g, &gp, p.mu)?;
            let objective = family_eval(&parameters, Candidate::Discrete(&sol), Observation::Samples(g))?;
            (PiecewiseSolution::Discrete(sol), objective)
        }
        Data::Continuous(g) => {
            let sol = partition_solver_continuous(g, &partition, p.mu, p.modes)?;
            for w in &sol.warnings {
                eprintln!(
                    "msbz: warning: interval {} keeps tail energy {:.3e} after {} modes",
                    w.block, w.tail_energy, p.modes
                );
            }
            let objective = family_eval(&parameters, Candidate::Continuous(&sol), Observation::Signal(g))?;
            (PiecewiseSolution::Continuous(sol), objective)
        }
    };
    let payload = Payload::SolvePartition(SolvePayload {
        input: info,
        parameters,
        partition: PartitionSummary::of(&solution),
        objective,
        solution,
    });
    emit(&Document::new(payload, start.elapsed()), p.output.as_deref())
}

/// One parameter point of a declared trajectory: exactly one of `n`, `t`.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct StepDecl {
    gamma: f64,
    mu: f64,
    #[serde(default)]
    n: Option<usize>,
    #[serde(default)]
    t: Option<f64>,
}

impl StepDecl {
    fn point(&self) -> Result<ParameterPoint, CliError> {
        let res = match (self.n, self.t) {
            (Some(n), None) => Resolution::Grid(n),
            (None, Some(t)) => Resolution::from_t(t)?,
            _ => return Err(arg("each step needs exactly one of \"n\" and \"t\"")),
        };
        Ok(ParameterPoint::new(self.gamma, self.mu, res)?)
    }
}

fn default_tolerance() -> f64 {
    1e-3
}

/// Sweep declaration file.
#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum SweepDecl {
    Trajectory {
        signal: ContinuousSignal,
        steps: Vec<StepDecl>,
        limit: StepDecl,
    },
    Solver {
        signal: ContinuousSignal,
        partition: Partition,
        mu: f64,
        n_list: Vec<usize>,
        #[serde(default = "default_tolerance")]
        tolerance: f64,
    },
}

pub fn sweep(a: &SweepArgs) -> Result<(), CliError> {
    let start = Instant::now();
    let cfg = LimitConfig {
        n_ref: a.nref,
        modes: a.modes,
        ..Default::default()
    };
    let (input, reports) = if a.bundled {
        let reports = bundled_trajectories()
            .into_iter()
            .map(|b| {
                Ok(NamedReport {
                    name: b.name.to_string(),
                    report: ConvergenceReport::Trajectory(run_trajectory(&b.signal, &b.trajectory, &cfg)?),
                })
            })
            .collect::<Result<Vec<_>, CliError>>()?;
        (None, reports)
    } else {
        let path = a.input.as_deref().expect("clap enforces --input or --bundled");
        let bytes = read_bytes(path)?;
        let decl: SweepDecl = serde_json::from_slice(&bytes)
            .map_err(|e| arg(format!("{}: line {}: {e}", path.display(), e.line())))?;
        let info = InputInfo {
            path: path.display().to_string(),
            kind: SignalKind::Piecewise,
            sha256: crate::io::digest(&bytes),
        };
        let report = match decl {
            SweepDecl::Trajectory { signal, steps, limit } => {
                let steps = steps.iter().map(StepDecl::point).collect::<Result<Vec<_>, _>>()?;
                let traj = Trajectory::new(steps, limit.point()?)?;
                ConvergenceReport::Trajectory(run_trajectory(&signal, &traj, &cfg)?)
            }
            SweepDecl::Solver {
                signal,
                partition,
                mu,
                n_list,
                tolerance,
            } => ConvergenceReport::Solver(solver_convergence(
                &signal,
                &partition,
                mu,
                &n_list,
                tolerance,
                Execution::default(),
            )?),
        };
        let name = path.file_stem().and_then(|s| s.to_str()).unwrap_or("sweep").to_string();
        (Some(info), vec![NamedReport { name, report }])
    };
    let passed = reports.iter().all(|r| r.report.passed());
    let payload = Payload::Sweep(SweepPayload { input, passed, reports });
    emit(&Document::new(payload, start.elapsed()), a.output.as_deref())?;
    if passed {
        Ok(())
    } else {
        Err(CliError::Verdict)
    }
}

fn breakpoints(r: &msbz_core::SegmentationResult) -> Vec<usize> {
    r.grid_partition().map(|p| p.interior().to_vec()).unwrap_or_default()
}

/// Random instance `i` of the oracle suite for `seed`.
pub fn oracle_instance(seed: u64, i: usize, n: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(i as u64));
    (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

pub fn oracle(a: &OracleArgs) -> Result<(), CliError> {
    let start = Instant::now();
    let cap = SolveOptions::default().caps.brute_force_n;
    let fixed = match &a.input {
        Some(path) => match read_signal(path, Some(SignalKind::Samples))?.0 {
            Signal::Samples(s) => Some(s),
            Signal::Piecewise(_) => unreachable!("read as samples"),
        },
        None => None,
    };
    let n = fixed.as_ref().map_or(a.n, DiscreteSignal::n);
    if n == 0 || n > cap {
        return Err(arg(format!("oracle instances need 1 <= n <= {cap} (exhaustive search), got {n}")));
    }
    let count = if fixed.is_some() { 1 } else { a.instances };
    let mut failures = Vec::new();
    for i in 0..count {
        let g = match &fixed {
            Some(s) => s.clone(),
            None => DiscreteSignal::new(oracle_instance(a.seed, i, n))?,
        };
        let gamma = a.gamma.unwrap_or(ORACLE_GAMMAS[i % ORACLE_GAMMAS.len()]);
        let mu = a.mu.unwrap_or(ORACLE_MUS[(i / ORACLE_GAMMAS.len()) % ORACLE_MUS.len()]);
        let dp = minimize_dp_with(&g, gamma, mu, &SolveOptions::default())?;
        let bf = brute_force_min(&g, gamma, mu)?;
        let (dv, bv) = (dp.diagnostics.dp_value, bf.diagnostics.dp_value);
        if breakpoints(&dp) != breakpoints(&bf) || (dv - bv).abs() > ORACLE_TOLERANCE {
            failures.push(OracleInstance {
                index: i,
                gamma,
                mu,
                values: g.values().to_vec(),
                dp_breakpoints: breakpoints(&dp),
                brute_force_breakpoints: breakpoints(&bf),
                dp_objective: dv,
                brute_force_objective: bv,
            });
        }
    }
    let first_failure = failures.first().map(|f| serde_json::to_string(f).expect("serializable"));
    let payload = Payload::Oracle(OraclePayload {
        seed: a.seed,
        n,
        instances: count,
        tolerance: ORACLE_TOLERANCE,
        agreed: count - failures.len(),
        failures,
    });
    emit(&Document::new(payload, start.elapsed()), a.output.as_deref())?;
    match first_failure {
        Some(f) => Err(CliError::Disagreement(f)),
        None => Ok(()),
    }
}

/// Stored and recomputed objective of a segment or solve-partition payload.
/// The input is re-read from the recorded path and must match its digest.
pub fn reevaluate(payload: &Payload) -> Result<Option<(f64, f64)>, CliError> {
    let (input, parameters, solution, stored) = match payload {
        Payload::Segment(s) => (&s.input, &s.result.parameters, &s.result.solution, s.result.objective.total),
        Payload::SolvePartition(s) => (&s.input, &s.parameters, &s.solution, s.objective.total),
        _ => return Ok(None),
    };
    let path = Path::new(&input.path);
    let (signal, info) = read_signal(path, Some(input.kind))?;
    if info.sha256 != input.sha256 {
        return Err(arg(format!("{} changed since the result was written", input.path)));
    }
    let total = match (solution, parameters.resolution) {
        (PiecewiseSolution::Discrete(d), Resolution::Grid(n)) => {
            let g = match signal {
                Signal::Samples(s) if s.n() == n => s,
                Signal::Samples(s) => coarsen(&s, n)?,
                Signal::Piecewise(g) => discretize(&g, n)?,
            };
            let sol = DiscreteSolution::from_parts(d.partition.clone(), d.mu, d.values().clone())?;
            family_eval(parameters, Candidate::Discrete(&sol), Observation::Samples(&g))?.total
        }
        (PiecewiseSolution::Continuous(c), Resolution::Continuous) => {
            let g = match signal {
                Signal::Piecewise(g) => g,
                Signal::Samples(_) => return Err(arg("continuous result with sample input")),
            };
            let coefficients = c.blocks.iter().map(|b| b.coefficients.clone()).collect();
            let sol = ContinuousSolution::from_coefficients(&g, c.partition.clone(), c.mu, coefficients)?;
            family_eval(parameters, Candidate::Continuous(&sol), Observation::Signal(&g))?.total
        }
        _ => return Err(arg("solution kind does not match the stored resolution")),
    };
    Ok(Some((stored, total)))
}

fn step_trace(solution: &PiecewiseSolution) -> String {
    let mut out = String::from("x,value\n");
    match solution {
        PiecewiseSolution::Discrete(d) => {
            let grid: Grid = d.values().grid();
            for (k, v) in d.values().values().iter().enumerate() {
                let (lo, hi) = grid.cell(k);
                out.push_str(&format!("{lo},{v}\n{hi},{v}\n"));
            }
        }
        PiecewiseSolution::Continuous(c) => {
            const SAMPLES: usize = 64;
            for b in &c.blocks {
                for i in 0..=SAMPLES {
                    let x = b.lo + (b.hi - b.lo) * i as f64 / SAMPLES as f64;
                    out.push_str(&format!("{x},{}\n", b.eval(x)));
                }
            }
        }
    }
    out
}

fn curve(report: &ConvergenceReport) -> String {
    match report {
        ConvergenceReport::Solver(r) => {
            let mut out = String::from("n,distance\n");
            for rec in &r.records {
                out.push_str(&format!("{},{}\n", rec.n, rec.distance));
            }
            out
        }
        ConvergenceReport::Trajectory(r) => {
            let mut out = String::from("step,t,l2_distance,hausdorff_distance\n");
            for (s, rec) in r.steps.iter().enumerate() {
                out.push_str(&format!(
                    "{},{},{},{}\n",
                    s + 1,
                    rec.parameters.t(),
                    rec.l2_distance,
                    rec.hausdorff_distance
                ));
            }
            out
        }
        ConvergenceReport::Penalty(r) => {
            let mut out = String::from("t,penalty\n");
            for rec in &r.records {
                out.push_str(&format!("{},{}\n", rec.parameters.t(), rec.penalty));
            }
            out
        }
        ConvergenceReport::Lipschitz(r) => {
            let mut out = String::from("n,bound,continuous_bound,max_ratio\n");
            for rec in &r.records {
                out.push_str(&format!("{},{},{},{}\n", rec.n, rec.bound, rec.continuous_bound, rec.max_ratio));
            }
            out
        }
    }
}

pub fn report(a: &ReportArgs) -> Result<(), CliError> {
    let text = fs::read_to_string(&a.input).map_err(|e| arg(format!("cannot read {}: {e}", a.input.display())))?;
    if payload_text(&text).is_none() {
        return Err(arg(format!("{} is not a result document", a.input.display())));
    }
    let doc = Document::from_json(&text)?;
    fs::create_dir_all(&a.output).map_err(|e| arg(format!("cannot create {}: {e}", a.output.display())))?;
    let write = |name: &str, body: String| {
        let path = a.output.join(name);
        fs::write(&path, body).map_err(|e| arg(format!("cannot write {}: {e}", path.display())))
    };
    match &doc.payload {
        Payload::Segment(s) => write("trace.csv", step_trace(&s.result.solution))?,
        Payload::SolvePartition(s) => write("trace.csv", step_trace(&s.solution))?,
        Payload::Sweep(s) => {
            for r in &s.reports {
                write(&format!("curve_{}.csv", r.name), curve(&r.report))?;
            }
        }
        Payload::Oracle(o) => println!("oracle: {}/{} instances agree", o.agreed, o.instances),
    }
    if let Some((stored, total)) = reevaluate(&doc.payload)? {
        println!(
            "{}",
            serde_json::json!({ "stored_total": stored, "reevaluated_total": total, "difference": (stored - total).abs() })
        );
    }
    Ok(())
}
