//! Dörfler marking, the solve-estimate-mark-refine loop and rate fitting.

use std::time::Instant;

use crate::assembly::solve_system;
use crate::element::ElementDegrees;
use crate::error::{Error, Result};
use crate::estimate::{estimate, residual_norm_sq, u_error, IndicatorSet};
use crate::mesh::{PrismaticMesh, TriMesh};
use crate::problems::Problem;
use crate::simplicial::P1Space;
use crate::space::build_space;
use crate::sparse::SolverOptions;

/// Shortest prefix of the indicators sorted by decreasing size (ties by increasing
/// id) whose squares sum to at least `theta` times the total. Returns positions.
pub fn doerfler_mark(eta_sq: &[f64], ids: &[usize], theta: f64) -> Vec<usize> {
    let total: f64 = eta_sq.iter().sum();
    let mut order: Vec<usize> = (0..eta_sq.len()).collect();
    order.sort_by(|&a, &b| eta_sq[b].total_cmp(&eta_sq[a]).then(ids[a].cmp(&ids[b])));
    let goal = theta * total;
    let mut acc = 0.0;
    let mut out = Vec::new();
    for i in order {
        if acc >= goal && !out.is_empty() {
            break;
        }
        acc += eta_sq[i];
        out.push(i);
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Uniform,
    Adaptive,
}

/// Result of solving and estimating on one mesh.
#[derive(Clone, Debug)]
pub struct StepResult {
    pub dofs: usize,
    pub indicators: IndicatorSet,
    pub error_u: Option<f64>,
    /// `|eta^2 - sum eta(P)^2| / eta^2`, with `eta^2` computed independently.
    pub partition_gap: f64,
}

/// A mesh family that can be solved on, estimated and refined.
pub trait Discretization: Sized {
    fn n_dofs(&self) -> usize;
    /// Stable element ids used to break ties in marking.
    fn ids(&self) -> Vec<usize>;
    fn solve_and_estimate(&self, problem: &Problem, opts: &SolverOptions) -> Result<StepResult>;
    fn refine_marked(&self, marked: &[usize]) -> Result<Self>;
    fn refine_all(&self) -> Self;
}

impl Discretization for PrismaticMesh {
    fn n_dofs(&self) -> usize {
        build_space(self, ElementDegrees::LOWEST).map(|s| s.n_dofs()).unwrap_or(0)
    }

    fn ids(&self) -> Vec<usize> {
        PrismaticMesh::ids(self)
    }

    fn solve_and_estimate(&self, problem: &Problem, opts: &SolverOptions) -> Result<StepResult> {
        let space = build_space(self, ElementDegrees::LOWEST)?;
        let sol = solve_system(&space, problem, opts)?;
        let indicators = estimate(&space, &sol.field, problem)?;
        let direct = residual_norm_sq(&space, &sol.field, problem)?;
        let sum: f64 = indicators.eta_sq.iter().sum();
        let partition_gap = if direct > 0.0 { (direct - sum).abs() / direct } else { (direct - sum).abs() };
        let error_u = problem.exact.as_ref().map(|ex| u_error(&space, &sol.field, ex)).transpose()?;
        Ok(StepResult { dofs: space.n_dofs(), indicators, error_u, partition_gap })
    }

    fn refine_marked(&self, marked: &[usize]) -> Result<Self> {
        Ok(self.refine_indices(marked))
    }

    fn refine_all(&self) -> Self {
        self.uniform_refine()
    }
}

impl Discretization for TriMesh {
    fn n_dofs(&self) -> usize {
        P1Space::new(self).n_dofs()
    }

    fn ids(&self) -> Vec<usize> {
        (0..self.len()).collect()
    }

    fn solve_and_estimate(&self, problem: &Problem, opts: &SolverOptions) -> Result<StepResult> {
        let space = P1Space::new(self);
        let (c, _) = space.solve(problem, opts)?;
        let indicators = space.estimate(&c, problem)?;
        let error_u = problem.exact.as_ref().map(|ex| space.u_error(&c, ex)).transpose()?;
        Ok(StepResult { dofs: space.n_dofs(), indicators, error_u, partition_gap: 0.0 })
    }

    fn refine_marked(&self, marked: &[usize]) -> Result<Self> {
        self.refine(marked)
    }

    fn refine_all(&self) -> Self {
        TriMesh::refine_all(self)
    }
}

/// One line of a convergence history.
#[derive(Clone, Debug, PartialEq)]
pub struct RunRecord {
    pub step: usize,
    pub dofs: usize,
    pub estimator: f64,
    pub error_u: Option<f64>,
    /// Seconds spent on this step; zero in deterministic mode.
    pub wall_time: f64,
    pub partition_gap: f64,
}

#[derive(Clone, Copy, Debug)]
pub struct LoopOptions {
    pub mode: Mode,
    pub theta: f64,
    /// Meshes with more free DoFs than this are not solved.
    pub max_dofs: usize,
    pub solver: SolverOptions,
    pub deterministic: bool,
}

/// Solves, estimates, marks and refines until the DoF budget is exhausted.
/// `on_step` sees each record as soon as it is available.
pub fn adaptive_loop<D: Discretization>(
    initial: D,
    problem: &Problem,
    opts: &LoopOptions,
    mut on_step: impl FnMut(&RunRecord),
) -> Result<Vec<RunRecord>> {
    if !(opts.theta > 0.0 && opts.theta <= 1.0) {
        return Err(Error::InvalidConfig(format!("theta must lie in (0, 1], got {}", opts.theta)));
    }
    let mut mesh = initial;
    let mut records = Vec::new();
    for step in 0.. {
        let clock = Instant::now();
        let res = mesh.solve_and_estimate(problem, &opts.solver).map_err(|e| Error::Step { step, source: Box::new(e) })?;
        let next = match opts.mode {
            Mode::Uniform => mesh.refine_all(),
            Mode::Adaptive => {
                let marked = doerfler_mark(&res.indicators.eta_sq, &mesh.ids(), opts.theta);
                mesh.refine_marked(&marked).map_err(|e| Error::Step { step, source: Box::new(e) })?
            }
        };
        let rec = RunRecord {
            step,
            dofs: res.dofs,
            estimator: res.indicators.total,
            error_u: res.error_u,
            wall_time: if opts.deterministic { 0.0 } else { clock.elapsed().as_secs_f64() },
            partition_gap: res.partition_gap,
        };
        on_step(&rec);
        records.push(rec);
        if next.n_dofs() > opts.max_dofs {
            break;
        }
        mesh = next;
    }
    Ok(records)
}

/// Negative least-squares slope of `log(estimator)` against `log(dofs)` over the last `window` records.
pub fn fit_rate(records: &[RunRecord], window: usize) -> Result<f64> {
    let pts: Vec<(f64, f64)> = records.iter().map(|r| (r.dofs as f64, r.estimator)).collect();
    fit_rate_points(&pts, window)
}

pub fn fit_rate_points(points: &[(f64, f64)], window: usize) -> Result<f64> {
    if window < 2 || points.len() < window {
        return Err(Error::DegenerateWindow(format!("{window} of {} points", points.len())));
    }
    let pts = &points[points.len() - window..];
    let xs: Vec<f64> = pts.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = pts.iter().map(|p| p.1.ln()).collect();
    let n = window as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if !(sxx > 0.0) || ys.iter().any(|y| !y.is_finite()) {
        return Err(Error::DegenerateWindow("DoF counts must differ and estimators be positive".into()));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    Ok(-sxy / sxx)
}

/// Fit window: the last five steps for uniform runs, the last third
/// (at least eight points) for adaptive runs, never more than available.
pub fn default_window(mode: Mode, n: usize) -> usize {
    match mode {
        Mode::Uniform => 5.min(n),
        Mode::Adaptive => (n / 3).max(8).min(n),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::initial_prism_mesh;
    use crate::problems::problem;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rec(dofs: usize, estimator: f64) -> RunRecord {
        RunRecord { step: 0, dofs, estimator, error_u: None, wall_time: 0.0, partition_gap: 0.0 }
    }

    #[test]
    fn doerfler_examples() {
        assert_eq!(doerfler_mark(&[9.0, 4.0, 1.0], &[0, 1, 2], 0.5), vec![0]);
        assert_eq!(doerfler_mark(&[1.0; 4], &[0, 1, 2, 3], 0.5), vec![0, 1]);
        let mut all = doerfler_mark(&[1.0, 0.5, 2.0, 0.0], &[0, 1, 2, 3], 1.0);
        all.sort();
        assert_eq!(all, vec![0, 1, 2]);
        // ties go to the smaller id
        assert_eq!(doerfler_mark(&[1.0, 1.0], &[5, 3], 0.5), vec![1]);
    }

    #[test]
    fn doerfler_is_minimal() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..200 {
            let n = rng.gen_range(1..=10);
            let eta: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..1.0f64).powi(2)).collect();
            let theta = rng.gen_range(0.05..1.0);
            let ids: Vec<usize> = (0..n).collect();
            let m = doerfler_mark(&eta, &ids, theta);
            let total: f64 = eta.iter().sum();
            assert!(m.iter().map(|&i| eta[i]).sum::<f64>() >= theta * total * (1.0 - 1e-12));
            let best = (1u32..1 << n)
                .filter(|s| (0..n).filter(|i| s >> i & 1 == 1).map(|i| eta[i]).sum::<f64>() >= theta * total)
                .map(|s| s.count_ones() as usize)
                .min()
                .unwrap();
            assert_eq!(m.len(), best);
        }
    }

    #[test]
    fn rate_fit_examples() {
        assert!((fit_rate(&[rec(100, 1.0), rec(400, 0.5)], 2).unwrap() - 0.5).abs() < 1e-14);
        assert_eq!(fit_rate(&[rec(100, 2.0), rec(400, 2.0), rec(900, 2.0)], 3).unwrap(), 0.0);
        assert!(matches!(fit_rate(&[rec(100, 1.0)], 2), Err(Error::DegenerateWindow(_))));
        assert!(matches!(fit_rate(&[rec(100, 1.0), rec(100, 0.5)], 2), Err(Error::DegenerateWindow(_))));
    }

    #[test]
    fn theta_one_matches_uniform_marking() {
        let p = problem("1d-interior-kink").unwrap();
        let base = LoopOptions {
            mode: Mode::Uniform,
            theta: 1.0,
            max_dofs: 2000,
            solver: SolverOptions::default(),
            deterministic: true,
        };
        let m = initial_prism_mesh(1, 1.0).unwrap();
        let u = adaptive_loop(m.clone(), &p, &base, |_| {}).unwrap();
        let a = adaptive_loop(m, &p, &LoopOptions { mode: Mode::Adaptive, ..base }, |_| {}).unwrap();
        assert_eq!(u, a);
        assert!(u.len() >= 3);
    }
}
