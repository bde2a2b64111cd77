//! One experiment: a problem, a mesh family and a refinement mode, run to a DoF budget.

use std::fs;
use std::path::PathBuf;

use crate::adapt::{adaptive_loop, default_window, fit_rate, LoopOptions, Mode, RunRecord};
use crate::error::{Error, Result};
use crate::mesh::{Diagonal, PrismaticMesh, TriMesh};
use crate::output::{csv_string, svg_plot};
use crate::problems::problem;
use crate::sparse::SolverOptions;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MeshFamily {
    Prism,
    /// Triangles with newest-vertex bisection, `d = 1` only.
    Simplex,
}

#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub problem: String,
    pub dim: usize,
    pub mesh: MeshFamily,
    pub mode: Mode,
    pub theta: f64,
    pub max_dofs: usize,
    pub solver: SolverOptions,
    /// Directory for `history.csv` and `convergence.svg`; nothing is written when `None`.
    pub out: Option<PathBuf>,
    pub deterministic: bool,
}

impl ExperimentConfig {
    pub fn new(problem: &str, dim: usize, mesh: MeshFamily, mode: Mode) -> Self {
        Self {
            problem: problem.to_string(),
            dim,
            mesh,
            mode,
            theta: 0.5,
            max_dofs: if dim == 1 { 100_000 } else { 300_000 },
            solver: SolverOptions::default(),
            out: None,
            deterministic: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim != 1 && self.dim != 2 {
            return Err(Error::UnsupportedDimension(self.dim));
        }
        if self.mesh == MeshFamily::Simplex && self.dim != 1 {
            return Err(Error::InvalidConfig("the simplex mesh family needs dim = 1".into()));
        }
        if !(self.theta > 0.0 && self.theta <= 1.0) {
            return Err(Error::InvalidConfig(format!("theta must lie in (0, 1], got {}", self.theta)));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub records: Vec<RunRecord>,
    /// Fitted rate over the default window, when it has at least two points.
    pub rate: Option<f64>,
}

pub fn run(config: &ExperimentConfig) -> Result<RunOutcome> {
    run_with(config, |_| {})
}

/// Like [`run`], reporting each step as it finishes.
pub fn run_with(config: &ExperimentConfig, on_step: impl FnMut(&RunRecord)) -> Result<RunOutcome> {
    config.validate()?;
    let p = problem(&config.problem)?;
    if p.dim != config.dim {
        return Err(Error::InvalidConfig(format!("problem {} is posed in dimension {}", p.id, p.dim)));
    }
    let opts = LoopOptions {
        mode: config.mode,
        theta: config.theta,
        max_dofs: config.max_dofs,
        solver: config.solver,
        deterministic: config.deterministic,
    };
    let records = match config.mesh {
        MeshFamily::Prism => adaptive_loop(PrismaticMesh::initial(config.dim, p.t_end, Diagonal::Main)?, &p, &opts, on_step)?,
        MeshFamily::Simplex => adaptive_loop(TriMesh::initial(p.t_end)?, &p, &opts, on_step)?,
    };
    let w = default_window(config.mode, records.len());
    let rate = fit_rate(&records, w).ok();
    if let Some(dir) = &config.out {
        fs::create_dir_all(dir)?;
        fs::write(dir.join("history.csv"), csv_string(&records))?;
        let title = format!(
            "{} ({}, {})",
            p.id,
            if config.mesh == MeshFamily::Prism { "prisms" } else { "triangles" },
            if config.mode == Mode::Uniform { "uniform" } else { "adaptive" }
        );
        fs::write(dir.join("convergence.svg"), svg_plot(&records, &title, rate))?;
    }
    Ok(RunOutcome { records, rate })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_checks() {
        let c = ExperimentConfig::new("2d-nonmatching", 2, MeshFamily::Simplex, Mode::Uniform);
        assert!(matches!(run(&c), Err(Error::InvalidConfig(_))));
        let c = ExperimentConfig::new("2d-nonmatching", 1, MeshFamily::Prism, Mode::Uniform);
        assert!(matches!(run(&c), Err(Error::InvalidConfig(_))));
        let c = ExperimentConfig::new("nope", 1, MeshFamily::Prism, Mode::Uniform);
        assert!(matches!(run(&c), Err(Error::UnknownProblem(_))));
        let c = ExperimentConfig { theta: 0.0, ..ExperimentConfig::new("1d-smooth", 1, MeshFamily::Prism, Mode::Adaptive) };
        assert!(matches!(run(&c), Err(Error::InvalidConfig(_))));
    }

    #[test]
    fn small_run_is_reproducible() {
        let c = ExperimentConfig {
            max_dofs: 3000,
            deterministic: true,
            ..ExperimentConfig::new("1d-interior-kink", 1, MeshFamily::Prism, Mode::Adaptive)
        };
        let a = run(&c).unwrap();
        let b = run(&c).unwrap();
        assert_eq!(csv_string(&a.records), csv_string(&b.records));
        assert!(a.records.windows(2).all(|w| w[1].dofs > w[0].dofs));
        assert!(a.records.last().unwrap().dofs <= 3000);
    }
}
