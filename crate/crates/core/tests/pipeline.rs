use prism_fosls::output::{csv_string, svg_plot};
use prism_fosls::{run, ExperimentConfig, MeshFamily, Mode};

fn cfg(problem: &str, dim: usize, mesh: MeshFamily, mode: Mode, max_dofs: usize) -> ExperimentConfig {
    ExperimentConfig { max_dofs, deterministic: true, ..ExperimentConfig::new(problem, dim, mesh, mode) }
}

#[test]
fn uniform_dof_growth() {
    for (problem, dim, factor, budget) in [("1d-interior-kink", 1, 4.0, 60_000), ("2d-interior-kink", 2, 8.0, 50_000)] {
        let out = run(&cfg(problem, dim, MeshFamily::Prism, Mode::Uniform, budget)).unwrap();
        let r = &out.records;
        assert!(r.len() >= 5, "{problem}");
        for w in r.windows(2).skip(2) {
            let q = w[1].dofs as f64 / w[0].dofs as f64;
            assert!((q / factor - 1.0).abs() <= 0.1, "{problem}: {q}");
        }
    }
}

#[test]
fn adaptive_histories_are_monotone() {
    for mesh in [MeshFamily::Prism, MeshFamily::Simplex] {
        let out = run(&cfg("1d-nonmatching", 1, mesh, Mode::Adaptive, 5_000)).unwrap();
        let r = &out.records;
        assert!(r.windows(2).all(|w| w[1].dofs > w[0].dofs));
        assert!(r.iter().all(|s| s.estimator > 0.0 && s.wall_time == 0.0));
        assert!(r.iter().all(|s| s.partition_gap <= 1e-12));
        assert!(out.rate.is_some());
    }
}

#[test]
fn outputs_match_the_records() {
    let out = run(&cfg("2d-nonmatching", 2, MeshFamily::Prism, Mode::Adaptive, 2_000)).unwrap();
    let csv = csv_string(&out.records);
    assert_eq!(csv.lines().count(), out.records.len() + 1);
    for (line, r) in csv.lines().skip(1).zip(&out.records) {
        let eta: f64 = line.split(',').nth(2).unwrap().parse().unwrap();
        assert_eq!(eta, r.estimator);
    }
    let svg = svg_plot(&out.records, "2d", out.rate);
    assert_eq!(svg.matches("<circle").count(), out.records.len());
}
