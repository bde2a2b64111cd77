use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use prism_fosls::adapt::doerfler_mark;
use prism_fosls::assembly::{assemble, solve_system};
use prism_fosls::element::ElementDegrees;
use prism_fosls::estimate::estimate;
use prism_fosls::mesh::initial_prism_mesh;
use prism_fosls::space::build_space;
use prism_fosls::sparse::{solve, SolverKind, SolverOptions};
use prism_fosls::{problem, PrismaticMesh};

fn uniform(dim: usize, levels: usize) -> PrismaticMesh {
    let mut m = initial_prism_mesh(dim, 1.0).unwrap();
    for _ in 0..levels {
        m = m.uniform_refine();
    }
    m
}

fn cases() -> [(&'static str, usize, usize); 2] {
    [("1d-nonmatching", 1, 5), ("2d-nonmatching", 2, 3)]
}

fn bench_assembly(c: &mut Criterion) {
    let mut g = c.benchmark_group("assemble");
    for (id, dim, levels) in cases() {
        let p = problem(id).unwrap();
        let s = build_space(&uniform(dim, levels), ElementDegrees::LOWEST).unwrap();
        g.bench_with_input(BenchmarkId::new(id, s.n_dofs()), &s, |b, s| b.iter(|| assemble(s, &p).unwrap()));
    }
    g.finish();
}

fn bench_solve(c: &mut Criterion) {
    let mut g = c.benchmark_group("solve");
    g.sample_size(10);
    for (id, dim, levels) in cases() {
        let p = problem(id).unwrap();
        let s = build_space(&uniform(dim, levels), ElementDegrees::LOWEST).unwrap();
        let sys = assemble(&s, &p).unwrap();
        for kind in [SolverKind::Direct, SolverKind::Cg] {
            let opts = SolverOptions { kind, ..SolverOptions::default() };
            g.bench_function(BenchmarkId::new(format!("{id}/{kind:?}"), s.n_dofs()), |b| {
                b.iter(|| solve(&sys.matrix, &sys.rhs, &opts).unwrap())
            });
        }
    }
    g.finish();
}

fn bench_estimate_and_refine(c: &mut Criterion) {
    let mut g = c.benchmark_group("adaptive step");
    g.sample_size(10);
    for (id, dim, levels) in cases() {
        let p = problem(id).unwrap();
        let m = uniform(dim, levels);
        let s = build_space(&m, ElementDegrees::LOWEST).unwrap();
        let sol = solve_system(&s, &p, &SolverOptions::default()).unwrap();
        g.bench_function(BenchmarkId::new(format!("{id}/space"), m.len()), |b| {
            b.iter(|| build_space(&m, ElementDegrees::LOWEST).unwrap())
        });
        g.bench_function(BenchmarkId::new(format!("{id}/estimate"), m.len()), |b| {
            b.iter(|| estimate(&s, &sol.field, &p).unwrap())
        });
        let ind = estimate(&s, &sol.field, &p).unwrap();
        let marked = doerfler_mark(&ind.eta_sq, &m.ids(), 0.5);
        g.bench_function(BenchmarkId::new(format!("{id}/refine"), m.len()), |b| b.iter(|| m.refine_indices(&marked)));
    }
    g.finish();
}

criterion_group!(benches, bench_assembly, bench_solve, bench_estimate_and_refine);
criterion_main!(benches);
