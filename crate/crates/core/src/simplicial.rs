//! Baseline discretization in one space dimension: continuous piecewise linear
//! `u1` and `u2` on a triangulation of the `(t, x)` rectangle, `u1 = 0` at
//! `x = 0` and `x = 1`.

use rayon::prelude::*;

use crate::assembly::{Rhs, DATA_DEGREE};
use crate::error::{Error, Result};
use crate::estimate::IndicatorSet;
use crate::geometry::{Point, Simplex};
use crate::mesh::TriMesh;
use crate::problems::Exact;
use crate::quadrature::{LineRule, SimplexRule};
use crate::sparse::{solve, CsrMatrix, SolveStats, SolverOptions};

/// Numbering of the P1 x P1 space: `u1` at interior-in-space vertices, then `u2` at all vertices.
#[derive(Clone, Debug)]
pub struct P1Space {
    pub mesh: TriMesh,
    u1: Vec<Option<usize>>,
    u2: Vec<usize>,
    n_dofs: usize,
}

/// Barycentric gradients of a triangle with vertices `(t, x)`, as `(d/dt, d/dx)`.
fn gradients(p: [Point; 3]) -> [Point; 3] {
    let det = (p[1][0] - p[0][0]) * (p[2][1] - p[0][1]) - (p[2][0] - p[0][0]) * (p[1][1] - p[0][1]);
    let mut g = [[0.0; 2]; 3];
    for i in 0..3 {
        let (a, b) = (p[(i + 1) % 3], p[(i + 2) % 3]);
        g[i] = [(a[1] - b[1]) / det, (b[0] - a[0]) / det];
    }
    g
}

fn barycentric(p: [Point; 3], g: [Point; 3], q: Point) -> [f64; 3] {
    let mut l = [0.0; 3];
    for i in 0..3 {
        // lambda_i vanishes at the next vertex
        let a = p[(i + 1) % 3];
        l[i] = g[i][0] * (q[0] - a[0]) + g[i][1] * (q[1] - a[1]);
    }
    l
}

impl P1Space {
    pub fn new(mesh: &TriMesh) -> Self {
        let nv = mesh.vertices().len();
        let mut used = vec![false; nv];
        for t in mesh.triangles() {
            for &v in t {
                used[v] = true;
            }
        }
        let mut n = 0;
        let mut u1 = vec![None; nv];
        for v in 0..nv {
            let x = mesh.vertices()[v][1];
            if used[v] && x != 0.0 && x != 1.0 {
                u1[v] = Some(n);
                n += 1;
            }
        }
        let mut u2 = vec![usize::MAX; nv];
        for v in 0..nv {
            if used[v] {
                u2[v] = n;
                n += 1;
            }
        }
        Self { mesh: mesh.clone(), u1, u2, n_dofs: n }
    }

    pub fn n_dofs(&self) -> usize {
        self.n_dofs
    }

    fn corners(&self, i: usize) -> [Point; 3] {
        self.mesh.triangles()[i].map(|v| self.mesh.vertices()[v])
    }

    /// Values `(u1, u2)` and gradients on triangle `i`.
    fn local(&self, c: &[f64], i: usize) -> ([f64; 3], [f64; 3]) {
        let tri = self.mesh.triangles()[i];
        let mut a = [0.0; 3];
        let mut b = [0.0; 3];
        for k in 0..3 {
            a[k] = self.u1[tri[k]].map_or(0.0, |g| c[g]);
            b[k] = c[self.u2[tri[k]]];
        }
        (a, b)
    }

    fn bottom_edges(&self, i: usize) -> Vec<(Point, Point, usize, usize)> {
        let p = self.corners(i);
        let mut out = Vec::new();
        for k in 0..3 {
            let (a, b) = (k, (k + 1) % 3);
            if p[a][0] == 0.0 && p[b][0] == 0.0 {
                out.push((p[a], p[b], a, b));
            }
        }
        out
    }

    pub fn solve(&self, rhs: &dyn Rhs, opts: &SolverOptions) -> Result<(Vec<f64>, SolveStats)> {
        let mrule = SimplexRule::new(2, 4)?;
        let drule = SimplexRule::new(2, DATA_DEGREE)?;
        let erule = LineRule::gauss(DATA_DEGREE)?;
        let locals: Vec<([[f64; 6]; 6], [f64; 6])> = (0..self.mesh.len())
            .into_par_iter()
            .map(|i| {
                let p = self.corners(i);
                let g = gradients(p);
                let area = self.mesh.area(i);
                let mut a = [[0.0; 6]; 6];
                let mut b = [0.0; 6];
                // local functions 0..3: u1 hats, 3..6: u2 hats; G-rows (dt v1 + dx v2, v2 + dx v1)
                let g_of = |l: [f64; 3]| {
                    let mut r1 = [0.0; 6];
                    let mut r2 = [0.0; 6];
                    for k in 0..3 {
                        r1[k] = g[k][0];
                        r2[k] = g[k][1];
                        r1[3 + k] = g[k][1];
                        r2[3 + k] = l[k];
                    }
                    (r1, r2)
                };
                let simplex = Simplex::triangle(p[0], p[1], p[2]).expect("valid triangle");
                for (xi, w) in mrule.points.iter().zip(&mrule.weights) {
                    let q = simplex.map(*xi);
                    let (r1, r2) = g_of(barycentric(p, g, q));
                    for m in 0..6 {
                        for n in 0..6 {
                            a[m][n] += w * area * (r1[m] * r1[n] + r2[m] * r2[n]);
                        }
                    }
                }
                for (xi, w) in drule.points.iter().zip(&drule.weights) {
                    let q = simplex.map(*xi);
                    let (r1, r2) = g_of(barycentric(p, g, q));
                    let (f1, f2) = (rhs.f1(i, q[0], [q[1], 0.0]), rhs.f2(i, q[0], [q[1], 0.0])[0]);
                    if !(f1.is_finite() && f2.is_finite()) {
                        return Err(Error::NonFiniteData { element: i });
                    }
                    for m in 0..6 {
                        b[m] += w * area * (f1 * r1[m] - f2 * r2[m]);
                    }
                }
                for (pa, pb, ka, kb) in self.bottom_edges(i) {
                    let len = (pb[1] - pa[1]).abs();
                    for (&s, &w) in erule.points.iter().zip(&erule.weights) {
                        let x = pa[1] + s * (pb[1] - pa[1]);
                        let mut l = [0.0; 3];
                        l[ka] = 1.0 - s;
                        l[kb] = s;
                        let u0 = rhs.u0(i, [x, 0.0]);
                        if !u0.is_finite() {
                            return Err(Error::NonFiniteData { element: i });
                        }
                        for m in 0..3 {
                            b[m] += w * len * u0 * l[m];
                            for n in 0..3 {
                                a[m][n] += w * len * l[m] * l[n];
                            }
                        }
                    }
                }
                Ok((a, b))
            })
            .collect::<Result<_>>()?;

        let mut triplets = Vec::with_capacity(self.mesh.len() * 36);
        let mut load = vec![0.0; self.n_dofs];
        for (i, (a, b)) in locals.iter().enumerate() {
            let tri = self.mesh.triangles()[i];
            let glob: Vec<Option<usize>> =
                (0..6).map(|m| if m < 3 { self.u1[tri[m]] } else { Some(self.u2[tri[m - 3]]) }).collect();
            for m in 0..6 {
                let Some(gm) = glob[m] else { continue };
                load[gm] += b[m];
                for n in 0..6 {
                    if let Some(gn) = glob[n] {
                        triplets.push((gm as u32, gn as u32, a[m][n]));
                    }
                }
            }
        }
        let mat = CsrMatrix::from_triplets(self.n_dofs, &triplets);
        solve(&mat, &load, opts)
    }

    pub fn estimate(&self, c: &[f64], rhs: &dyn Rhs) -> Result<IndicatorSet> {
        let drule = SimplexRule::new(2, DATA_DEGREE)?;
        let erule = LineRule::gauss(DATA_DEGREE)?;
        let eta_sq = (0..self.mesh.len())
            .into_par_iter()
            .map(|i| {
                let p = self.corners(i);
                let g = gradients(p);
                let area = self.mesh.area(i);
                let (a, b) = self.local(c, i);
                let dt1: f64 = (0..3).map(|k| a[k] * g[k][0]).sum();
                let dx1: f64 = (0..3).map(|k| a[k] * g[k][1]).sum();
                let dx2: f64 = (0..3).map(|k| b[k] * g[k][1]).sum();
                let simplex = Simplex::triangle(p[0], p[1], p[2]).expect("valid triangle");
                let mut acc = 0.0;
                for (xi, w) in drule.points.iter().zip(&drule.weights) {
                    let q = simplex.map(*xi);
                    let l = barycentric(p, g, q);
                    let v2: f64 = (0..3).map(|k| b[k] * l[k]).sum();
                    let r1 = rhs.f1(i, q[0], [q[1], 0.0]) - dt1 - dx2;
                    let r2 = rhs.f2(i, q[0], [q[1], 0.0])[0] + v2 + dx1;
                    acc += w * area * (r1 * r1 + r2 * r2);
                }
                for (pa, pb, ka, kb) in self.bottom_edges(i) {
                    let len = (pb[1] - pa[1]).abs();
                    for (&s, &w) in erule.points.iter().zip(&erule.weights) {
                        let x = pa[1] + s * (pb[1] - pa[1]);
                        let v1 = a[ka] * (1.0 - s) + a[kb] * s;
                        acc += w * len * (rhs.u0(i, [x, 0.0]) - v1).powi(2);
                    }
                }
                acc
            })
            .collect();
        Ok(IndicatorSet::from_squares(eta_sq))
    }

    pub fn u_error(&self, c: &[f64], exact: &Exact) -> Result<f64> {
        let rule = SimplexRule::new(2, DATA_DEGREE)?;
        let sq: Vec<f64> = (0..self.mesh.len())
            .into_par_iter()
            .map(|i| {
                let p = self.corners(i);
                let g = gradients(p);
                let area = self.mesh.area(i);
                let (a, b) = self.local(c, i);
                let dt1: f64 = (0..3).map(|k| a[k] * g[k][0]).sum();
                let dx1: f64 = (0..3).map(|k| a[k] * g[k][1]).sum();
                let dx2: f64 = (0..3).map(|k| b[k] * g[k][1]).sum();
                let simplex = Simplex::triangle(p[0], p[1], p[2]).expect("valid triangle");
                let mut acc = 0.0;
                for (xi, w) in rule.points.iter().zip(&rule.weights) {
                    let q = simplex.map(*xi);
                    let l = barycentric(p, g, q);
                    let v2: f64 = (0..3).map(|k| b[k] * l[k]).sum();
                    let x = [q[1], 0.0];
                    let e1 = (exact.grad_u1)(q[0], x)[0] - dx1;
                    let e2 = (exact.u2)(q[0], x)[0] - v2;
                    let ed = (exact.div)(q[0], x) - dt1 - dx2;
                    acc += w * area * (e1 * e1 + e2 * e2 + ed * ed);
                }
                acc
            })
            .collect();
        Ok(sq.iter().sum::<f64>().sqrt())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::problem;

    #[test]
    fn counts_and_zero_solution_estimate() {
        let m = TriMesh::initial(1.0).unwrap();
        let s = P1Space::new(&m);
        // u1 only at the centre; the corners lie on x = 0 or x = 1
        assert_eq!(s.n_dofs(), 1 + 5);
        let p = problem("1d-nonmatching").unwrap();
        let ind = s.estimate(&vec![0.0; s.n_dofs()], &p).unwrap();
        // ||f1||^2 + ||u0||^2 = 4 + 1
        assert!((ind.total.powi(2) - 5.0).abs() < 1e-12);
    }

    #[test]
    fn smooth_problem_converges() {
        let p = problem("1d-smooth").unwrap();
        let mut m = TriMesh::initial(1.0).unwrap();
        let mut errs = Vec::new();
        for _ in 0..7 {
            m = m.refine_all();
            let s = P1Space::new(&m);
            let (c, _) = s.solve(&p, &SolverOptions::default()).unwrap();
            errs.push(s.u_error(&c, p.exact.as_ref().unwrap()).unwrap());
        }
        // first order in h
        let ratio = errs[5] / errs[6];
        assert!(ratio > 1.8 && ratio < 2.2, "{errs:?}");
    }
}
