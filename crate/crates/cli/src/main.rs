use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, ValueEnum};
use prism_fosls::problems::PROBLEM_IDS;
use prism_fosls::sparse::{SolverKind, SolverOptions};
use prism_fosls::{experiment, ExperimentConfig, MeshFamily, Mode, PrismaticMesh};

#[derive(Clone, Copy, Debug, ValueEnum)]
enum MeshArg {
    Prism,
    Simplex,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModeArg {
    Uniform,
    Adaptive,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SolverArg {
    Auto,
    Direct,
    Cg,
}

/// Adaptive space-time least-squares solver for the heat equation.
#[derive(Debug, Parser)]
#[command(version)]
struct Args {
    /// Problem id; see --list-problems.
    #[arg(long, required_unless_present = "list_problems")]
    problem: Option<String>,
    /// Spatial dimension; defaults to the problem's own.
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long, value_enum, default_value = "prism")]
    mesh: MeshArg,
    #[arg(long, value_enum, default_value = "adaptive")]
    mode: ModeArg,
    /// Dörfler bulk parameter.
    #[arg(long, default_value_t = 0.5)]
    theta: f64,
    /// Stop before the first mesh with more free DoFs than this
    /// [default: 100000 for d = 1, 300000 for d = 2].
    #[arg(long)]
    max_dofs: Option<usize>,
    #[arg(long, value_enum, default_value = "auto")]
    solver: SolverArg,
    /// Output directory for history.csv and convergence.svg.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write zero wall times so that reruns give identical files.
    #[arg(long)]
    deterministic: bool,
    /// Also write the uniformly refined initial prism mesh after N refinements to mesh.txt.
    #[arg(long, value_name = "N")]
    dump_mesh: Option<usize>,
    #[arg(long)]
    list_problems: bool,
    #[arg(long, short)]
    quiet: bool,
}

fn main() -> ExitCode {
    match real_main() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn real_main() -> anyhow::Result<()> {
    let args = Args::parse();
    if args.list_problems {
        for id in PROBLEM_IDS {
            println!("{id}");
        }
        return Ok(());
    }
    let id = args.problem.expect("clap enforces --problem");
    let p = prism_fosls::problem(&id)?;
    let dim = args.dim.unwrap_or(p.dim);
    if dim != p.dim {
        bail!("problem {id} is posed in dimension {}, not {dim}", p.dim);
    }
    let mesh = match args.mesh {
        MeshArg::Prism => MeshFamily::Prism,
        MeshArg::Simplex => MeshFamily::Simplex,
    };
    let mode = match args.mode {
        ModeArg::Uniform => Mode::Uniform,
        ModeArg::Adaptive => Mode::Adaptive,
    };
    let mut cfg = ExperimentConfig::new(&id, dim, mesh, mode);
    cfg.theta = args.theta;
    if let Some(m) = args.max_dofs {
        cfg.max_dofs = m;
    }
    cfg.solver = SolverOptions {
        kind: match args.solver {
            SolverArg::Auto => SolverKind::Auto,
            SolverArg::Direct => SolverKind::Direct,
            SolverArg::Cg => SolverKind::Cg,
        },
        ..SolverOptions::default()
    };
    cfg.out = args.out.clone();
    cfg.deterministic = args.deterministic;

    if let (Some(n), Some(dir)) = (args.dump_mesh, &args.out) {
        let mut m = PrismaticMesh::initial(dim, p.t_end, Default::default())?;
        for _ in 0..n {
            m = m.uniform_refine();
        }
        std::fs::create_dir_all(dir)?;
        let mut f = std::fs::File::create(dir.join("mesh.txt")).context("creating mesh dump")?;
        m.write_dump(&mut f)?;
    }

    let quiet = args.quiet;
    let outcome = experiment::run_with(&cfg, |r| {
        if !quiet {
            match r.error_u {
                Some(e) => eprintln!("step {:3}  dofs {:8}  eta {:.6e}  err {:.6e}  {:.2}s", r.step, r.dofs, r.estimator, e, r.wall_time),
                None => eprintln!("step {:3}  dofs {:8}  eta {:.6e}  {:.2}s", r.step, r.dofs, r.estimator, r.wall_time),
            }
        }
    })
    .with_context(|| format!("running {id}"))?;
    match outcome.rate {
        Some(r) => println!("fitted rate {r:.4} over {} steps", outcome.records.len()),
        None => println!("too few steps to fit a rate"),
    }
    Ok(())
}
