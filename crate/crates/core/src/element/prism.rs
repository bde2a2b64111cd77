use faer::Mat;

use super::poly::{dim_p, lagrange_1d, orthonormal_legendre, shifted_legendre};
use super::spatial::{dim_rt, invert, SpatialBasis, SpatialValues};
use crate::error::{Error, Result};
use crate::geometry::{Interval, Point, Simplex};
use crate::quadrature::{make_quadrature, LineRule, QuadratureRule};

/// Polynomial degrees `(l, k)` of the shape system
/// `(P_{l+1}(J) x P_k(K)) x (P_l(J) x RT_k(K))`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ElementDegrees {
    pub l: usize,
    pub k: usize,
}

impl ElementDegrees {
    /// The lowest-order pair used by the solver.
    pub const LOWEST: ElementDegrees = ElementDegrees { l: 0, k: 1 };

    pub fn new(l: usize, k: usize) -> Result<Self> {
        if k == 0 || k > 3 || l > 3 {
            return Err(Error::UnsupportedElement { l, k });
        }
        Ok(Self { l, k })
    }

    pub fn n_u1(&self, dim: usize) -> usize {
        (self.l + 2) * dim_p(dim, self.k)
    }

    pub fn n_u2(&self, dim: usize) -> usize {
        (self.l + 1) * dim_rt(dim, self.k)
    }

    /// Exactness per direction used for element matrices.
    pub fn assembly_degree(&self) -> usize {
        2 * (self.k + 1) + 2
    }
}

/// All local basis quantities at one space-time point.
///
/// Local ordering: `u1` functions first (time-lattice major, space-lattice
/// minor), then `u2` functions (time-moment major, RT functional minor).
#[derive(Clone, Debug, Default)]
pub struct BasisValues {
    pub u1: Vec<f64>,
    pub dt_u1: Vec<f64>,
    pub grad_u1: Vec<Point>,
    pub u2: Vec<Point>,
    pub div_u2: Vec<f64>,
    spatial: SpatialValues,
}

/// Residual components of `G u = (dt u1 + div_x u2, -u2 - grad_x u1, u1(0, .))` at a point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GResidual {
    pub r1: f64,
    pub r2: Point,
    pub r0: Option<f64>,
}

/// The finite element `S_{l,k}(P)` on one prism `P = J x K`.
#[derive(Clone, Debug)]
pub struct PrismElement {
    pub time: Interval,
    pub degrees: ElementDegrees,
    pub spatial: SpatialBasis,
}

impl PrismElement {
    pub fn new(time: Interval, base: &Simplex, degrees: ElementDegrees) -> Result<Self> {
        let spatial = SpatialBasis::new(base, degrees.k)?;
        Ok(Self { time, degrees, spatial })
    }

    pub fn base(&self) -> &Simplex {
        &self.spatial.base
    }

    pub fn dim(&self) -> usize {
        self.spatial.dim()
    }

    pub fn n_u1(&self) -> usize {
        self.degrees.n_u1(self.dim())
    }

    pub fn n_u2(&self) -> usize {
        self.degrees.n_u2(self.dim())
    }

    pub fn n_local(&self) -> usize {
        self.n_u1() + self.n_u2()
    }

    fn n_space(&self) -> usize {
        self.spatial.n_scalar()
    }

    pub fn contains(&self, t: f64, x: Point) -> bool {
        let tol = 1e-12;
        t >= self.time.a - tol * self.time.length()
            && t <= self.time.b + tol * self.time.length()
            && self.base().contains(x, 1e-12)
    }

    /// Evaluates every local basis function at `(t, x)`.
    pub fn eval(&self, t: f64, x: Point, out: &mut BasisValues) {
        let l = self.degrees.l;
        let h = self.time.length();
        let s = (t - self.time.a) / h;
        self.spatial.eval(x, &mut out.spatial);
        let sv = &out.spatial;
        let (tv, td) = lagrange_1d(l + 1, s);
        out.u1.clear();
        out.dt_u1.clear();
        out.grad_u1.clear();
        for a in 0..l + 2 {
            for i in 0..sv.scalar.len() {
                out.u1.push(tv[a] * sv.scalar[i]);
                out.dt_u1.push(td[a] / h * sv.scalar[i]);
                let g = sv.scalar_grad[i];
                out.grad_u1.push([tv[a] * g[0], tv[a] * g[1]]);
            }
        }
        out.u2.clear();
        out.div_u2.clear();
        for m in 0..=l {
            let (p, _) = orthonormal_legendre(m, &self.time, t);
            for r in 0..sv.rt.len() {
                let v = sv.rt[r];
                out.u2.push([p * v[0], p * v[1]]);
                out.div_u2.push(p * sv.rt_div[r]);
            }
        }
    }

    fn check_u1(&self, idx: usize) -> Result<()> {
        if idx >= self.n_u1() {
            return Err(Error::IndexOutOfRange { index: idx, dim: self.n_u1() });
        }
        Ok(())
    }

    fn check_u2(&self, idx: usize) -> Result<()> {
        if idx >= self.n_u2() {
            return Err(Error::IndexOutOfRange { index: idx, dim: self.n_u2() });
        }
        Ok(())
    }

    pub fn eval_u1(&self, idx: usize, t: f64, x: Point) -> Result<f64> {
        self.check_u1(idx)?;
        let mut b = BasisValues::default();
        self.eval(t, x, &mut b);
        Ok(b.u1[idx])
    }

    pub fn eval_grad_x_u1(&self, idx: usize, t: f64, x: Point) -> Result<Point> {
        self.check_u1(idx)?;
        let mut b = BasisValues::default();
        self.eval(t, x, &mut b);
        Ok(b.grad_u1[idx])
    }

    pub fn eval_dt_u1(&self, idx: usize, t: f64, x: Point) -> Result<f64> {
        self.check_u1(idx)?;
        let mut b = BasisValues::default();
        self.eval(t, x, &mut b);
        Ok(b.dt_u1[idx])
    }

    pub fn eval_u2(&self, idx: usize, t: f64, x: Point) -> Result<Point> {
        self.check_u2(idx)?;
        let mut b = BasisValues::default();
        self.eval(t, x, &mut b);
        Ok(b.u2[idx])
    }

    pub fn eval_div_x_u2(&self, idx: usize, t: f64, x: Point) -> Result<f64> {
        self.check_u2(idx)?;
        let mut b = BasisValues::default();
        self.eval(t, x, &mut b);
        Ok(b.div_u2[idx])
    }

    /// Residual components of `G` for local coefficients `coeffs` at `(t, x)`.
    /// The initial-trace component is present only when `J` starts at `t = 0`.
    pub fn apply_g(&self, coeffs: &[f64], t: f64, x: Point) -> GResidual {
        let mut b = BasisValues::default();
        self.eval(t, x, &mut b);
        let (_, dt, g1, v2, div) = combine(&b, coeffs);
        let r0 = (self.time.a == 0.0).then(|| {
            self.eval(0.0, x, &mut b);
            combine(&b, coeffs).0
        });
        GResidual { r1: dt + div, r2: [-v2[0] - g1[0], -v2[1] - g1[1]], r0 }
    }

    /// The degrees of freedom of `(v1, v2)`:
    /// `u1`: (endpoint values, moments against `P_{l-1}(J)`) x moments against `P_k(K)`,
    /// `u2`: moments against orthonormal `P_l(J)` x `RT_k(K)` functionals.
    /// Integrals use Gauss rules exact to `degree` in each direction.
    pub fn apply_dofs(
        &self,
        v1: &dyn Fn(f64, Point) -> f64,
        v2: &dyn Fn(f64, Point) -> Point,
        degree: usize,
    ) -> Vec<f64> {
        let mut out = self.u1_dofs(v1, degree);
        out.extend(self.u2_dofs(v2, degree));
        out
    }

    fn u1_dofs(&self, v1: &dyn Fn(f64, Point) -> f64, degree: usize) -> Vec<f64> {
        let l = self.degrees.l;
        let j = &self.time;
        let mut out = Vec::with_capacity(self.n_u1());
        for &t in &[j.a, j.b] {
            out.extend(self.spatial.scalar_functionals(&|x| v1(t, x), degree));
        }
        if l >= 1 {
            let rule = LineRule::gauss(degree).expect("degree within range");
            let ns = self.n_space();
            let mut acc = vec![0.0; l * ns];
            for (&s, &w) in rule.points.iter().zip(&rule.weights) {
                let t = j.map(s);
                let sf = self.spatial.scalar_functionals(&|x| v1(t, x), degree);
                for m in 0..l {
                    let p = shifted_legendre(m, s);
                    for (i, v) in sf.iter().enumerate() {
                        acc[m * ns + i] += w * p * v;
                    }
                }
            }
            out.extend(acc);
        }
        out
    }

    fn u2_dofs(&self, v2: &dyn Fn(f64, Point) -> Point, degree: usize) -> Vec<f64> {
        let l = self.degrees.l;
        let nr = self.spatial.n_rt();
        let rule = LineRule::gauss(degree).expect("degree within range");
        let mut acc = vec![0.0; (l + 1) * nr];
        let h = self.time.length();
        for (&s, &w) in rule.points.iter().zip(&rule.weights) {
            let t = self.time.map(s);
            let f = self.spatial.rt_functionals(&|x| v2(t, x), degree);
            for m in 0..=l {
                let (p, _) = orthonormal_legendre(m, &self.time, t);
                for (r, v) in f.iter().enumerate() {
                    acc[m * nr + r] += w * h * p * v;
                }
            }
        }
        acc
    }

    /// Matrix of all functionals applied to all basis functions (rows: functionals).
    pub fn dof_matrix(&self) -> Mat<f64> {
        let n = self.n_local();
        let n1 = self.n_u1();
        let deg = 2 * (self.degrees.k + self.degrees.l + 2);
        let mut m = Mat::<f64>::zeros(n, n);
        for col in 0..n {
            let v1 = |t: f64, x: Point| {
                if col < n1 {
                    let mut b = BasisValues::default();
                    self.eval(t, x, &mut b);
                    b.u1[col]
                } else {
                    0.0
                }
            };
            let v2 = |t: f64, x: Point| {
                if col >= n1 {
                    let mut b = BasisValues::default();
                    self.eval(t, x, &mut b);
                    b.u2[col - n1]
                } else {
                    [0.0, 0.0]
                }
            };
            for (row, v) in self.apply_dofs(&v1, &v2, deg).into_iter().enumerate() {
                m[(row, col)] = v;
            }
        }
        m
    }

    /// 2-norm condition number of the DoF matrix.
    pub fn dof_condition_number(&self) -> f64 {
        let s = self.dof_matrix().singular_values().expect("svd converges");
        let max = s.iter().cloned().fold(0.0, f64::max);
        let min = s.iter().cloned().fold(f64::INFINITY, f64::min);
        max / min
    }

    /// Local quasi-interpolant: the element function with the same DoFs as `(v1, v2)`.
    pub fn local_interpolant(
        &self,
        v1: &dyn Fn(f64, Point) -> f64,
        v2: &dyn Fn(f64, Point) -> Point,
        degree: usize,
    ) -> Result<Vec<f64>> {
        let dofs = self.apply_dofs(v1, v2, degree);
        let n1 = self.n_u1();
        let d1 = self.u1_dof_block();
        let inv = invert(&d1).ok_or_else(|| Error::SingularDofMatrix(format!("{:?}", self.base())))?;
        let mut coeffs = vec![0.0; self.n_local()];
        for i in 0..n1 {
            coeffs[i] = (0..n1).map(|j| inv[(i, j)] * dofs[j]).sum();
        }
        // the u2 basis is dual to its functionals
        coeffs[n1..].copy_from_slice(&dofs[n1..]);
        Ok(coeffs)
    }

    /// `u1` block of the DoF matrix, assembled as a Kronecker product of the time and space factors.
    fn u1_dof_block(&self) -> Mat<f64> {
        let l = self.degrees.l;
        let ns = self.n_space();
        let nt = l + 2;
        // time functionals on the Lagrange basis of P_{l+1}(J)
        let mut dt = Mat::<f64>::zeros(nt, nt);
        let (v0, _) = lagrange_1d(l + 1, 0.0);
        let (v1, _) = lagrange_1d(l + 1, 1.0);
        for a in 0..nt {
            dt[(0, a)] = v0[a];
            dt[(1, a)] = v1[a];
        }
        if l >= 1 {
            let rule = LineRule::gauss(2 * l + 2).expect("degree within range");
            for (&s, &w) in rule.points.iter().zip(&rule.weights) {
                let (v, _) = lagrange_1d(l + 1, s);
                for m in 0..l {
                    let p = shifted_legendre(m, s);
                    for a in 0..nt {
                        dt[(2 + m, a)] += w * p * v[a];
                    }
                }
            }
        }
        let sp = &self.spatial;
        let mut ds = Mat::<f64>::zeros(ns, ns);
        for i in 0..ns {
            let col = sp.scalar_functionals(
                &|x| {
                    let mut sv = SpatialValues::default();
                    sp.eval(x, &mut sv);
                    sv.scalar[i]
                },
                2 * sp.k,
            );
            for (b, v) in col.into_iter().enumerate() {
                ds[(b, i)] = v;
            }
        }
        Mat::from_fn(nt * ns, nt * ns, |r, c| dt[(r / ns, c / ns)] * ds[(r % ns, c % ns)])
    }

    /// Coefficients of the `L2(P)`-orthogonal projection onto `P_l(J) x P_k(K)`
    /// in the basis `L_m(t) S_i(x)` (orthonormal Legendre times nodal Lagrange).
    pub fn local_l2_project(&self, w: &dyn Fn(f64, Point) -> f64, degree: usize) -> Result<Vec<f64>> {
        let l = self.degrees.l;
        let ns = self.n_space();
        let quad = self.quadrature(degree, degree)?;
        let mut sv = SpatialValues::default();
        let mut mass = Mat::<f64>::zeros(ns, ns);
        let mut rhs = vec![0.0; (l + 1) * ns];
        for (&(t, x), &wq) in quad.points.iter().zip(&quad.weights) {
            self.spatial.eval(x, &mut sv);
            let wv = w(t, x);
            for m in 0..=l {
                let (p, _) = orthonormal_legendre(m, &self.time, t);
                for i in 0..ns {
                    rhs[m * ns + i] += wq * wv * p * sv.scalar[i];
                }
            }
            // time basis is orthonormal, so the spatial mass is recovered from L_0^2
            let (p0, _) = orthonormal_legendre(0, &self.time, t);
            for i in 0..ns {
                for j in 0..ns {
                    mass[(i, j)] += wq * p0 * p0 * sv.scalar[i] * sv.scalar[j];
                }
            }
        }
        let inv = invert(&mass).ok_or_else(|| Error::SingularDofMatrix(format!("{:?}", self.base())))?;
        let mut out = vec![0.0; rhs.len()];
        for m in 0..=l {
            for i in 0..ns {
                out[m * ns + i] = (0..ns).map(|j| inv[(i, j)] * rhs[m * ns + j]).sum();
            }
        }
        Ok(out)
    }

    /// Evaluates a function of `P_l(J) x P_k(K)` given by projection coefficients.
    pub fn eval_projection(&self, coeffs: &[f64], t: f64, x: Point) -> f64 {
        let ns = self.n_space();
        let mut sv = SpatialValues::default();
        self.spatial.eval(x, &mut sv);
        let mut acc = 0.0;
        for m in 0..=self.degrees.l {
            let (p, _) = orthonormal_legendre(m, &self.time, t);
            for i in 0..ns {
                acc += coeffs[m * ns + i] * p * sv.scalar[i];
            }
        }
        acc
    }

    /// Space-time divergence `dt u1 + div_x u2` of a local element function.
    pub fn eval_div(&self, coeffs: &[f64], t: f64, x: Point) -> f64 {
        let mut b = BasisValues::default();
        self.eval(t, x, &mut b);
        let (_, dt, _, _, div) = combine(&b, coeffs);
        dt + div
    }

    /// `(u1, u2)` of a local element function at `(t, x)`.
    pub fn eval_field(&self, coeffs: &[f64], t: f64, x: Point) -> (f64, Point) {
        let mut b = BasisValues::default();
        self.eval(t, x, &mut b);
        let (v1, _, _, v2, _) = combine(&b, coeffs);
        (v1, v2)
    }

    pub fn quadrature(&self, degree_t: usize, degree_x: usize) -> Result<QuadratureRule> {
        make_quadrature(&self.time, self.base(), degree_t, degree_x)
    }

    /// Local `U`-norm `(|grad_x e1|^2 + |e2|^2 + |div e|^2)^{1/2}` of `e = v - u_h`,
    /// with `v` given through `grad_x v1`, `v2` and `div v`.
    pub fn u_norm_error(
        &self,
        coeffs: &[f64],
        grad_v1: &dyn Fn(f64, Point) -> Point,
        v2: &dyn Fn(f64, Point) -> Point,
        div_v: &dyn Fn(f64, Point) -> f64,
        degree: usize,
    ) -> Result<f64> {
        let quad = self.quadrature(degree, degree)?;
        let mut b = BasisValues::default();
        let mut acc = 0.0;
        for (&(t, x), &w) in quad.points.iter().zip(&quad.weights) {
            self.eval(t, x, &mut b);
            let (_, dt, g1, w2, div) = combine(&b, coeffs);
            let gv = grad_v1(t, x);
            let vv = v2(t, x);
            let e_g = [gv[0] - g1[0], gv[1] - g1[1]];
            let e_2 = [vv[0] - w2[0], vv[1] - w2[1]];
            let e_d = div_v(t, x) - dt - div;
            acc += w * (e_g[0] * e_g[0] + e_g[1] * e_g[1] + e_2[0] * e_2[0] + e_2[1] * e_2[1] + e_d * e_d);
        }
        Ok(acc.sqrt())
    }
}

/// Combines basis values with coefficients into `(u1, dt u1, grad_x u1, u2, div_x u2)`.
pub fn combine(b: &BasisValues, coeffs: &[f64]) -> (f64, f64, Point, Point, f64) {
    let n1 = b.u1.len();
    let mut v1 = 0.0;
    let mut dt = 0.0;
    let mut g = [0.0; 2];
    for i in 0..n1 {
        let c = coeffs[i];
        v1 += c * b.u1[i];
        dt += c * b.dt_u1[i];
        g[0] += c * b.grad_u1[i][0];
        g[1] += c * b.grad_u1[i][1];
    }
    let mut v2 = [0.0; 2];
    let mut div = 0.0;
    for r in 0..b.u2.len() {
        let c = coeffs[n1 + r];
        v2[0] += c * b.u2[r][0];
        v2[1] += c * b.u2[r][1];
        div += c * b.div_u2[r];
    }
    (v1, dt, g, v2, div)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_prism(dim: usize, deg: ElementDegrees) -> PrismElement {
        let j = Interval::new(0.0, 1.0).unwrap();
        let k = if dim == 1 {
            Simplex::segment(0.0, 1.0).unwrap()
        } else {
            Simplex::triangle([0.0, 0.0], [1.0, 0.0], [0.0, 1.0]).unwrap()
        };
        PrismElement::new(j, &k, deg).unwrap()
    }

    #[test]
    fn local_dimensions() {
        let e = unit_prism(2, ElementDegrees::LOWEST);
        assert_eq!(e.spatial.n_rt(), 8);
        assert_eq!(e.n_u1(), 6);
        assert_eq!(e.n_u2(), 8);
        let e = unit_prism(1, ElementDegrees::LOWEST);
        assert_eq!(e.spatial.n_rt(), 3);
        assert_eq!(e.n_u1(), 4);
        let e = unit_prism(2, ElementDegrees::new(1, 2).unwrap());
        assert_eq!(e.n_u1(), 3 * 6);
        assert_eq!(e.n_u2(), 2 * 15);
    }

    #[test]
    fn u1_basis_is_nodal_and_sums_to_one() {
        for dim in 1..=2 {
            let e = unit_prism(dim, ElementDegrees::LOWEST);
            let mut b = BasisValues::default();
            let verts = e.base().vertices().to_vec();
            for (a, &t) in [0.0, 1.0].iter().enumerate() {
                for (i, &x) in verts.iter().enumerate() {
                    e.eval(t, x, &mut b);
                    for (idx, v) in b.u1.iter().enumerate() {
                        let expect = if idx == a * verts.len() + i { 1.0 } else { 0.0 };
                        assert!((v - expect).abs() < 1e-14);
                    }
                }
            }
            e.eval(0.3, [0.2, 0.1], &mut b);
            assert!((b.u1.iter().sum::<f64>() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn gradients_match_finite_differences() {
        let e = unit_prism(2, ElementDegrees::new(1, 2).unwrap());
        let (t, x) = (0.5, [0.3, 0.3]);
        let h = 1e-6;
        for i in 0..e.n_u1() {
            let g = e.eval_grad_x_u1(i, t, x).unwrap();
            let fx = (e.eval_u1(i, t, [x[0] + h, x[1]]).unwrap() - e.eval_u1(i, t, [x[0] - h, x[1]]).unwrap()) / (2.0 * h);
            let fy = (e.eval_u1(i, t, [x[0], x[1] + h]).unwrap() - e.eval_u1(i, t, [x[0], x[1] - h]).unwrap()) / (2.0 * h);
            let ft = (e.eval_u1(i, t + h, x).unwrap() - e.eval_u1(i, t - h, x).unwrap()) / (2.0 * h);
            assert!((g[0] - fx).abs() < 1e-8 && (g[1] - fy).abs() < 1e-8);
            assert!((e.eval_dt_u1(i, t, x).unwrap() - ft).abs() < 1e-8);
        }
        for r in 0..e.n_u2() {
            let vx = |x: Point| e.eval_u2(r, t, x).unwrap();
            let div = (vx([x[0] + h, x[1]])[0] - vx([x[0] - h, x[1]])[0] + vx([x[0], x[1] + h])[1]
                - vx([x[0], x[1] - h])[1])
                / (2.0 * h);
            assert!((e.eval_div_x_u2(r, t, x).unwrap() - div).abs() < 1e-6);
        }
    }

    #[test]
    fn index_out_of_range() {
        let e = unit_prism(1, ElementDegrees::LOWEST);
        assert!(matches!(e.eval_u1(4, 0.0, [0.0, 0.0]), Err(Error::IndexOutOfRange { .. })));
        assert!(matches!(e.eval_u2(3, 0.0, [0.0, 0.0]), Err(Error::IndexOutOfRange { .. })));
    }

    #[test]
    fn u2_block_of_dof_matrix_is_identity() {
        let j = Interval::new(0.25, 0.75).unwrap();
        let k = Simplex::triangle([0.1, 0.2], [0.9, 0.3], [0.4, 0.8]).unwrap();
        for deg in [ElementDegrees::LOWEST, ElementDegrees::new(1, 2).unwrap()] {
            let e = PrismElement::new(j, &k, deg).unwrap();
            let m = e.dof_matrix();
            let n1 = e.n_u1();
            for r in n1..e.n_local() {
                for c in 0..e.n_local() {
                    let expect = if r == c { 1.0 } else { 0.0 };
                    assert!((m[(r, c)] - expect).abs() < 1e-12, "{r} {c} {}", m[(r, c)]);
                }
            }
            assert!(e.dof_condition_number().is_finite());
        }
    }

    #[test]
    fn interpolant_reproduces_element_functions() {
        let j = Interval::new(0.0, 0.5).unwrap();
        let k = Simplex::triangle([0.0, 0.0], [0.5, 0.0], [0.5, 0.5]).unwrap();
        let e = PrismElement::new(j, &k, ElementDegrees::LOWEST).unwrap();
        let coeffs: Vec<f64> = (0..e.n_local()).map(|i| ((i * 7 + 3) % 11) as f64 - 5.0).collect();
        let v1 = |t: f64, x: Point| e.eval_field(&coeffs, t, x).0;
        let v2 = |t: f64, x: Point| e.eval_field(&coeffs, t, x).1;
        let back = e.local_interpolant(&v1, &v2, 12).unwrap();
        for (a, b) in coeffs.iter().zip(&back) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn divergence_of_interpolant_on_unit_square() {
        let e = unit_prism(1, ElementDegrees::LOWEST);
        let c = e.local_interpolant(&|t, x| t * t * x[0], &|_, x| [x[0] * x[0], 0.0], 12).unwrap();
        for &(t, x) in &[(0.1, 0.2), (0.7, 0.9), (0.5, 0.5)] {
            assert!((e.eval_div(&c, t, [x, 0.0]) - 3.0 * x).abs() < 1e-12);
        }
        let q = e.local_l2_project(&|t, x| 2.0 * t * x[0] + 2.0 * x[0], 10).unwrap();
        assert!((e.eval_projection(&q, 0.3, [0.4, 0.0]) - 1.2).abs() < 1e-12);
    }

    #[test]
    fn vanishing_normal_trace_gives_zero_facet_dofs() {
        let e = unit_prism(2, ElementDegrees::LOWEST);
        // x2 * (..) has zero normal trace on the facet x2 = 0 (opposite vertex 2)
        let c = e.local_interpolant(&|_, _| 0.0, &|t, x| [x[1] * t, x[1] * x[0]], 12).unwrap();
        let n1 = e.n_u1();
        assert!(c[n1 + 4].abs() < 1e-13 && c[n1 + 5].abs() < 1e-13);
    }

    #[test]
    fn l2_projection_is_orthogonal() {
        let j = Interval::new(0.5, 1.0).unwrap();
        let k = Simplex::triangle([0.0, 0.0], [0.5, 0.0], [0.0, 0.5]).unwrap();
        let e = PrismElement::new(j, &k, ElementDegrees::new(1, 2).unwrap()).unwrap();
        let w = |t: f64, x: Point| (t * x[0]).sin() + (x[1] - t).exp();
        let q = e.local_l2_project(&w, 16).unwrap();
        let quad = e.quadrature(16, 16).unwrap();
        for m in 0..=1 {
            for i in 0..e.spatial.n_scalar() {
                let r = quad.integrate(|t, x| {
                    let mut s = SpatialValues::default();
                    e.spatial.eval(x, &mut s);
                    (w(t, x) - e.eval_projection(&q, t, x)) * orthonormal_legendre(m, &e.time, t).0 * s.scalar[i]
                });
                assert!(r.abs() < 1e-12, "{r}");
            }
        }
    }

    #[test]
    fn g_of_simple_fields() {
        let e = unit_prism(1, ElementDegrees::LOWEST);
        // u1 = t x
        let c = e.local_interpolant(&|t, x| t * x[0], &|_, _| [0.0, 0.0], 10).unwrap();
        let g = e.apply_g(&c, 0.4, [0.7, 0.0]);
        assert!((g.r1 - 0.7).abs() < 1e-13 && (g.r2[0] + 0.4).abs() < 1e-13);
        assert!(g.r0.unwrap().abs() < 1e-13);
        // u2 = const
        let c = e.local_interpolant(&|_, _| 0.0, &|_, _| [2.5, 0.0], 10).unwrap();
        let g = e.apply_g(&c, 0.4, [0.7, 0.0]);
        assert!(g.r1.abs() < 1e-13 && (g.r2[0] + 2.5).abs() < 1e-13);
        let late = PrismElement::new(Interval::new(0.5, 1.0).unwrap(), e.base(), e.degrees).unwrap();
        assert!(late.apply_g(&c, 0.7, [0.5, 0.0]).r0.is_none());
    }

    #[test]
    fn commuting_diagram_on_skew_prisms() {
        let j = Interval::new(0.2, 0.45).unwrap();
        let k2 = Simplex::triangle([0.1, 0.2], [0.7, 0.1], [0.3, 0.6]).unwrap();
        let k1 = Simplex::segment(0.3, 0.55).unwrap();
        let v1 = |t: f64, x: Point| (t + 2.0 * x[0]).sin() * (x[1] + 1.0).exp();
        let v2 = |t: f64, x: Point| [(t * x[1]).cos() + x[0] * x[0] * t, (x[0] - t).exp()];
        let div = |t: f64, x: Point| (t + 2.0 * x[0]).cos() * (x[1] + 1.0).exp() + 2.0 * x[0] * t;
        let high = ElementDegrees::new(1, 2).unwrap();
        for (k, deg) in [(k1, ElementDegrees::LOWEST), (k2, ElementDegrees::LOWEST), (k1, high), (k2, high)] {
            let e = PrismElement::new(j, &k, deg).unwrap();
            let c = e.local_interpolant(&v1, &v2, 30).unwrap();
            let q = e.local_l2_project(&div, 30).unwrap();
            let quad = e.quadrature(20, 20).unwrap();
            let err = quad.integrate(|t, x| (e.eval_div(&c, t, x) - e.eval_projection(&q, t, x)).powi(2)).sqrt();
            assert!(err < 1e-10, "{deg:?} d={} err={err}", k.dim());
        }
    }
}
