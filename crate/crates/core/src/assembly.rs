//! Assembly of the least-squares normal equations `<G u, G v>_L = <f, G v>_L`
//! on the discrete space, with constraints folded in (`A = C^T A_loc C`).

use rayon::prelude::*;

use crate::element::{combine, BasisValues, PrismElement};
use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::quadrature::{simplex_quadrature, PrismRule};
use crate::space::{DiscreteField, DiscreteSpace};
use crate::sparse::{solve, CsrMatrix, SolveStats, SolverOptions};

/// Per-direction exactness of the rule used for data integrals.
pub const DATA_DEGREE: usize = 10;

/// Right-hand side `f = (f1, f2, u0)`. The element index lets piecewise data
/// be evaluated on the correct side of element interfaces.
pub trait Rhs: Sync {
    fn f1(&self, e: usize, t: f64, x: Point) -> f64;
    fn f2(&self, e: usize, t: f64, x: Point) -> Point;
    fn u0(&self, e: usize, x: Point) -> f64;
}

/// Data `f = G w` of a discrete field `w`.
pub struct DiscreteRhs<'a> {
    space: &'a DiscreteSpace,
    locals: Vec<Vec<f64>>,
}

impl<'a> DiscreteRhs<'a> {
    pub fn new(space: &'a DiscreteSpace, w: &DiscreteField) -> Self {
        let locals = (0..space.elements.len()).map(|e| space.local_coeffs(w, e)).collect();
        Self { space, locals }
    }

    fn values(&self, e: usize, t: f64, x: Point) -> (f64, f64, Point, Point, f64) {
        let mut b = BasisValues::default();
        self.space.elements[e].eval(t, x, &mut b);
        combine(&b, &self.locals[e])
    }
}

impl Rhs for DiscreteRhs<'_> {
    fn f1(&self, e: usize, t: f64, x: Point) -> f64 {
        let (_, dt, _, _, div) = self.values(e, t, x);
        dt + div
    }

    fn f2(&self, e: usize, t: f64, x: Point) -> Point {
        let (_, _, g, v2, _) = self.values(e, t, x);
        [-v2[0] - g[0], -v2[1] - g[1]]
    }

    fn u0(&self, e: usize, x: Point) -> f64 {
        self.values(e, 0.0, x).0
    }
}

/// Symmetric positive definite system over the free DoFs.
#[derive(Clone, Debug)]
pub struct SparseSystem {
    pub matrix: CsrMatrix,
    pub rhs: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct Solution {
    pub field: DiscreteField,
    pub stats: SolveStats,
}

/// Reference rules shared by all elements.
pub(crate) struct Rules {
    pub matrix: PrismRule,
    pub data: PrismRule,
}

impl Rules {
    pub fn new(space: &DiscreteSpace) -> Result<Self> {
        let d = space.degrees.assembly_degree();
        Ok(Self {
            matrix: PrismRule::new(space.dim(), d, d)?,
            data: PrismRule::new(space.dim(), DATA_DEGREE, DATA_DEGREE)?,
        })
    }
}

/// `(dt v1 + div_x v2, v2 + grad_x v1)` of every local basis function.
fn g_of_basis(b: &BasisValues) -> (Vec<f64>, Vec<Point>) {
    let n1 = b.u1.len();
    let n = n1 + b.u2.len();
    let mut g1 = vec![0.0; n];
    let mut g2 = vec![[0.0; 2]; n];
    g1[..n1].copy_from_slice(&b.dt_u1);
    g2[..n1].copy_from_slice(&b.grad_u1);
    g1[n1..].copy_from_slice(&b.div_u2);
    g2[n1..].copy_from_slice(&b.u2);
    (g1, g2)
}

fn check(v: f64, e: usize) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFiniteData { element: e })
    }
}

/// Element matrix (row-major) and load vector.
pub(crate) fn local_system(el: &PrismElement, e: usize, rhs: &dyn Rhs, rules: &Rules) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = el.n_local();
    let n1 = el.n_u1();
    let mut a = vec![0.0; n * n];
    let mut b = vec![0.0; n];
    let mut bv = BasisValues::default();
    let q = rules.matrix.map(&el.time, el.base());
    for (&(t, x), &w) in q.points.iter().zip(&q.weights) {
        el.eval(t, x, &mut bv);
        let (g1, g2) = g_of_basis(&bv);
        for i in 0..n {
            for j in i..n {
                let v = w * (g1[i] * g1[j] + g2[i][0] * g2[j][0] + g2[i][1] * g2[j][1]);
                a[i * n + j] += v;
            }
        }
    }
    let qd = rules.data.map(&el.time, el.base());
    for (&(t, x), &w) in qd.points.iter().zip(&qd.weights) {
        el.eval(t, x, &mut bv);
        let (g1, g2) = g_of_basis(&bv);
        let f1 = check(rhs.f1(e, t, x), e)?;
        let f2 = rhs.f2(e, t, x);
        check(f2[0] + f2[1], e)?;
        for i in 0..n {
            b[i] += w * (f1 * g1[i] - f2[0] * g2[i][0] - f2[1] * g2[i][1]);
        }
    }
    if el.time.a == 0.0 {
        let d = el.degrees.assembly_degree();
        for (x, w) in simplex_quadrature(el.base(), d)? {
            el.eval(0.0, x, &mut bv);
            for i in 0..n1 {
                for j in i..n1 {
                    a[i * n + j] += w * bv.u1[i] * bv.u1[j];
                }
            }
        }
        for (x, w) in simplex_quadrature(el.base(), DATA_DEGREE)? {
            el.eval(0.0, x, &mut bv);
            let u0 = check(rhs.u0(e, x), e)?;
            for i in 0..n1 {
                b[i] += w * u0 * bv.u1[i];
            }
        }
    }
    for i in 0..n {
        for j in 0..i {
            a[i * n + j] = a[j * n + i];
        }
    }
    Ok((a, b))
}

/// Element contributions are computed in parallel and summed in element order.
pub fn assemble(space: &DiscreteSpace, rhs: &dyn Rhs) -> Result<SparseSystem> {
    let rules = Rules::new(space)?;
    let locals: Vec<(Vec<f64>, Vec<f64>)> = space
        .elements
        .par_iter()
        .enumerate()
        .map(|(e, el)| local_system(el, e, rhs, &rules))
        .collect::<Result<_>>()?;
    let n = space.n_dofs();
    let nl = space.dofs.n_local;
    let c = &space.constraints;
    let mut triplets: Vec<(u32, u32, f64)> = Vec::with_capacity(locals.len() * nl * nl);
    let mut load = vec![0.0; n];
    for (e, (a, b)) in locals.iter().enumerate() {
        for i in 0..nl {
            let ri = c.row(e, i);
            if ri.is_empty() {
                continue;
            }
            for &(gi, wi) in ri {
                load[gi] += wi * b[i];
            }
            for j in 0..nl {
                let aij = a[i * nl + j];
                if aij == 0.0 {
                    continue;
                }
                for &(gi, wi) in ri {
                    for &(gj, wj) in c.row(e, j) {
                        triplets.push((gi as u32, gj as u32, wi * wj * aij));
                    }
                }
            }
        }
    }
    Ok(SparseSystem { matrix: CsrMatrix::from_triplets(n, &triplets), rhs: load })
}

pub fn solve_system(space: &DiscreteSpace, rhs: &dyn Rhs, opts: &SolverOptions) -> Result<Solution> {
    let sys = assemble(space, rhs)?;
    let (x, stats) = solve(&sys.matrix, &sys.rhs, opts)?;
    Ok(Solution { field: DiscreteField { coeffs: x }, stats })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::element::ElementDegrees;
    use crate::mesh::initial_prism_mesh;
    use crate::space::build_space;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    struct Zero;
    impl Rhs for Zero {
        fn f1(&self, _: usize, _: f64, _: Point) -> f64 {
            0.0
        }
        fn f2(&self, _: usize, _: f64, _: Point) -> Point {
            [0.0, 0.0]
        }
        fn u0(&self, _: usize, _: Point) -> f64 {
            0.0
        }
    }

    fn mesh(dim: usize) -> crate::mesh::PrismaticMesh {
        let m = initial_prism_mesh(dim, 1.0).unwrap().uniform_refine();
        let i = m.prisms().iter().position(|p| p.time.a == 0.0).unwrap();
        m.refine_indices(&[i])
    }

    #[test]
    fn matrix_is_symmetric_and_zero_data_gives_zero() {
        for dim in 1..=2 {
            let s = build_space(&mesh(dim), ElementDegrees::LOWEST).unwrap();
            let sys = assemble(&s, &Zero).unwrap();
            assert!(sys.matrix.max_asymmetry() <= 1e-12 * sys.matrix.max_abs());
            let sol = solve_system(&s, &Zero, &SolverOptions::default()).unwrap();
            assert!(sol.field.coeffs.iter().all(|&c| c == 0.0));
        }
    }

    #[test]
    fn discrete_data_is_recovered() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for dim in 1..=2 {
            let s = build_space(&mesh(dim), ElementDegrees::LOWEST).unwrap();
            let w = DiscreteField { coeffs: (0..s.n_dofs()).map(|_| rng.gen_range(-1.0..1.0)).collect() };
            let rhs = DiscreteRhs::new(&s, &w);
            let sol = solve_system(&s, &rhs, &SolverOptions::default()).unwrap();
            for (a, b) in sol.field.coeffs.iter().zip(&w.coeffs) {
                assert!((a - b).abs() < 1e-9, "{a} {b}");
            }
        }
    }
}
