//! Spatial factors on a physical simplex `K`: the nodal Lagrange basis of
//! `P_k(K)` and the Raviart–Thomas space `RT_k(K)` (read as `P_{k+1}(K)` when
//! `d = 1`) with the basis dual to its facet/interior moment functionals.
//!
//! Facet functionals use a globally consistent orientation: the normal and the
//! parametrisation of a facet depend only on the facet's geometry, never on the
//! element it is seen from. Two elements sharing a facet, or a coarse facet and
//! a fine facet contained in it, therefore use identical functionals.

use faer::Mat;

use super::poly::{
    dim_p, homogeneous_exponents, monomial, monomial_exponents, monomial_grad, principal_lattice,
    shifted_legendre,
};
use crate::error::{Error, Result};
use crate::geometry::{dist, lex_less, sub, AffineMap, Point, Simplex};
use crate::quadrature::{LineRule, SimplexRule};

/// A raw reference Raviart–Thomas field: `e_c xi^alpha` or `xi xi^alpha` with `|alpha| = k`.
#[derive(Clone, Copy, Debug)]
enum RawRt {
    Component { c: usize, e: [usize; 2] },
    Radial { e: [usize; 2] },
}

impl RawRt {
    fn eval(&self, dim: usize, k: usize, xi: Point) -> (Point, f64) {
        match *self {
            RawRt::Component { c, e } => {
                let mut v = [0.0; 2];
                v[c] = monomial(e, xi);
                (v, monomial_grad(e, xi)[c])
            }
            RawRt::Radial { e } => {
                let m = monomial(e, xi);
                let v = if dim == 1 { [xi[0] * m, 0.0] } else { [xi[0] * m, xi[1] * m] };
                (v, (dim + k) as f64 * m)
            }
        }
    }
}

/// Oriented facet of a simplex. For `d = 1` the facet is a point with normal `+1`.
#[derive(Clone, Copy, Debug)]
pub struct OrientedFacet {
    /// Lexicographically smaller endpoint (the point itself when `d = 1`).
    pub start: Point,
    /// Larger endpoint (equal to `start` when `d = 1`).
    pub end: Point,
    pub normal: Point,
    pub measure: f64,
}

impl OrientedFacet {
    pub fn of(base: &Simplex, f: usize) -> Self {
        let vs = base.facet_vertices(f);
        if base.dim() == 1 {
            let p = base.vertex(vs[0]);
            return Self { start: p, end: p, normal: [1.0, 0.0], measure: 1.0 };
        }
        let (mut a, mut b) = (base.vertex(vs[0]), base.vertex(vs[1]));
        if lex_less(b, a) {
            std::mem::swap(&mut a, &mut b);
        }
        let len = dist(a, b);
        let tau = sub(b, a);
        Self { start: a, end: b, normal: [tau[1] / len, -tau[0] / len], measure: len }
    }

    pub fn point(&self, s: f64) -> Point {
        [
            self.start[0] + s * (self.end[0] - self.start[0]),
            self.start[1] + s * (self.end[1] - self.start[1]),
        ]
    }

    /// Outward sign of the oriented normal relative to `base`.
    pub fn outward_sign(&self, base: &Simplex) -> f64 {
        let c = base.centroid();
        let d = sub(self.start, c);
        if d[0] * self.normal[0] + d[1] * self.normal[1] > 0.0 {
            1.0
        } else {
            -1.0
        }
    }
}

/// Number of normal moments per facet.
pub fn facet_moments(dim: usize, k: usize) -> usize {
    if dim == 1 {
        1
    } else {
        k + 1
    }
}

pub fn dim_rt(dim: usize, k: usize) -> usize {
    match dim {
        1 => k + 2,
        _ => (k + 1) * (k + 3),
    }
}

/// Nodal `P_k(K)` basis and dual `RT_k(K)` basis on one physical simplex.
#[derive(Clone, Debug)]
pub struct SpatialBasis {
    pub base: Simplex,
    pub k: usize,
    pub map: AffineMap,
    pk: Vec<[usize; 2]>,
    /// `lagrange[i * n + m]`: coefficient of monomial `m` in nodal function `i`.
    lagrange: Vec<f64>,
    raw: Vec<RawRt>,
    /// `dual[r * n + j]`: coefficient of raw field `j` in dual basis field `r`.
    dual: Vec<f64>,
    interior: Vec<[usize; 2]>,
    facets: Vec<OrientedFacet>,
}

/// Values of the spatial bases at one point.
#[derive(Clone, Debug, Default)]
pub struct SpatialValues {
    pub scalar: Vec<f64>,
    pub scalar_grad: Vec<Point>,
    pub rt: Vec<Point>,
    pub rt_div: Vec<f64>,
}

impl SpatialBasis {
    pub fn new(base: &Simplex, k: usize) -> Result<Self> {
        let dim = base.dim();
        if k == 0 || k > 3 {
            return Err(Error::UnsupportedElement { l: 0, k });
        }
        let map = AffineMap::new(base);
        let pk = monomial_exponents(dim, k);
        let n = pk.len();
        let lattice = principal_lattice(dim, k);
        let vander = Mat::from_fn(n, n, |p, m| monomial(pk[m], lattice[p]));
        let inv = invert(&vander).ok_or_else(|| Error::SingularDofMatrix(format!("{base:?}")))?;
        let mut lagrange = vec![0.0; n * n];
        for i in 0..n {
            for m in 0..n {
                lagrange[i * n + m] = inv[(m, i)];
            }
        }

        let mut raw = Vec::new();
        for e in &pk {
            for c in 0..dim {
                raw.push(RawRt::Component { c, e: *e });
            }
        }
        for e in homogeneous_exponents(dim, k) {
            raw.push(RawRt::Radial { e });
        }
        debug_assert_eq!(raw.len(), dim_rt(dim, k));
        let interior = monomial_exponents(dim, k - 1);
        let facets = (0..=dim).map(|f| OrientedFacet::of(base, f)).collect();

        let mut basis = Self { base: *base, k, map, pk, lagrange, raw, dual: Vec::new(), interior, facets };
        let nr = basis.raw.len();
        let mut dmat = Mat::<f64>::zeros(nr, nr);
        for j in 0..nr {
            let field = |x: Point| basis.raw_eval(j, x).0;
            let col = basis.rt_functionals(&field, 2 * k + 2);
            for (i, v) in col.into_iter().enumerate() {
                dmat[(i, j)] = v;
            }
        }
        let dinv = invert(&dmat).ok_or_else(|| Error::SingularDofMatrix(format!("{base:?}")))?;
        let mut dual = vec![0.0; nr * nr];
        for r in 0..nr {
            for j in 0..nr {
                dual[r * nr + j] = dinv[(j, r)];
            }
        }
        basis.dual = dual;
        Ok(basis)
    }

    pub fn dim(&self) -> usize {
        self.base.dim()
    }

    pub fn n_scalar(&self) -> usize {
        self.pk.len()
    }

    pub fn n_rt(&self) -> usize {
        self.raw.len()
    }

    pub fn facet(&self, f: usize) -> &OrientedFacet {
        &self.facets[f]
    }

    pub fn monomials(&self) -> &[[usize; 2]] {
        &self.pk
    }

    fn raw_eval(&self, j: usize, x: Point) -> (Point, f64) {
        let xi = self.map.to_reference(x);
        let (v, div) = self.raw[j].eval(self.dim(), self.k, xi);
        (self.map.piola(v), div / self.map.det.abs())
    }

    /// Reference coordinates of a physical point.
    pub fn reference(&self, x: Point) -> Point {
        self.map.to_reference(x)
    }

    /// Evaluates both spatial bases at `x` into `out`.
    pub fn eval(&self, x: Point, out: &mut SpatialValues) {
        let dim = self.dim();
        let xi = self.map.to_reference(x);
        let n = self.pk.len();
        out.scalar.clear();
        out.scalar_grad.clear();
        let mut mono = [0.0; 16];
        let mut mgrad = [[0.0; 2]; 16];
        for (m, e) in self.pk.iter().enumerate() {
            mono[m] = monomial(*e, xi);
            mgrad[m] = monomial_grad(*e, xi);
        }
        for i in 0..n {
            let row = &self.lagrange[i * n..(i + 1) * n];
            let mut v = 0.0;
            let mut g = [0.0; 2];
            for m in 0..n {
                v += row[m] * mono[m];
                g[0] += row[m] * mgrad[m][0];
                g[1] += row[m] * mgrad[m][1];
            }
            out.scalar.push(v);
            out.scalar_grad.push(self.map.push_gradient(g));
        }

        let nr = self.raw.len();
        let mut rv = [[0.0; 2]; 64];
        let mut rd = [0.0; 64];
        for j in 0..nr {
            let (v, d) = self.raw[j].eval(dim, self.k, xi);
            rv[j] = v;
            rd[j] = d;
        }
        let inv_det = 1.0 / self.map.det.abs();
        out.rt.clear();
        out.rt_div.clear();
        for r in 0..nr {
            let row = &self.dual[r * nr..(r + 1) * nr];
            let mut v = [0.0; 2];
            let mut d = 0.0;
            for j in 0..nr {
                v[0] += row[j] * rv[j][0];
                v[1] += row[j] * rv[j][1];
                d += row[j] * rd[j];
            }
            out.rt.push(self.map.piola(v));
            out.rt_div.push(d * inv_det);
        }
    }

    /// The `RT_k(K)` functionals: facet normal moments (facet-major, moment-minor)
    /// followed by interior moments against `P_{k-1}(K)^d`, normalized by `|K|`.
    pub fn rt_functionals(&self, w: &dyn Fn(Point) -> Point, degree: usize) -> Vec<f64> {
        let dim = self.dim();
        let mut out = Vec::with_capacity(self.raw.len());
        let nm = facet_moments(dim, self.k);
        for f in 0..=dim {
            for j in 0..nm {
                out.push(self.facet_moment(f, j, w, degree));
            }
        }
        let rule = SimplexRule::new(dim, degree).expect("quadrature degree within range");
        for e in &self.interior {
            for c in 0..dim {
                let mut acc = 0.0;
                for (xi, wq) in rule.points.iter().zip(&rule.weights) {
                    let x = self.base.map(*xi);
                    acc += wq * w(x)[c] * monomial(*e, *xi);
                }
                // rule weights sum to one, so this is already divided by |K|
                out.push(acc);
            }
        }
        out
    }

    /// Normal moment `int_e w.n P_j ds` over facet `f` (point value when `d = 1`).
    pub fn facet_moment(&self, f: usize, j: usize, w: &dyn Fn(Point) -> Point, degree: usize) -> f64 {
        let fac = &self.facets[f];
        if self.dim() == 1 {
            return w(fac.start)[0] * fac.normal[0];
        }
        let rule = LineRule::gauss(degree).expect("quadrature degree within range");
        let mut acc = 0.0;
        for (&s, &ws) in rule.points.iter().zip(&rule.weights) {
            let x = fac.point(s);
            let v = w(x);
            acc += ws * (v[0] * fac.normal[0] + v[1] * fac.normal[1]) * shifted_legendre(j, s);
        }
        acc * fac.measure
    }

    /// Moments `|K|^{-1} int_K p xi^beta` used as `P_k(K)` functionals.
    pub fn scalar_functionals(&self, p: &dyn Fn(Point) -> f64, degree: usize) -> Vec<f64> {
        let rule = SimplexRule::new(self.dim(), degree).expect("quadrature degree within range");
        self.pk
            .iter()
            .map(|e| {
                rule.points
                    .iter()
                    .zip(&rule.weights)
                    .map(|(xi, w)| w * p(self.base.map(*xi)) * monomial(*e, *xi))
                    .sum()
            })
            .collect()
    }
}

/// Dense inverse with a residual check; `None` if numerically singular.
pub(crate) fn invert(m: &Mat<f64>) -> Option<Mat<f64>> {
    use faer::linalg::solvers::DenseSolveCore;
    let n = m.nrows();
    let inv = m.partial_piv_lu().inverse();
    let prod = m * &inv;
    for i in 0..n {
        for j in 0..n {
            let e = if i == j { 1.0 } else { 0.0 };
            let v = prod[(i, j)];
            if !v.is_finite() || (v - e).abs() > 1e-8 {
                return None;
            }
        }
    }
    Some(inv)
}

pub fn n_scalar(dim: usize, k: usize) -> usize {
    dim_p(dim, k)
}
