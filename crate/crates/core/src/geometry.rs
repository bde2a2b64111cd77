//! Intervals, simplices and the affine maps between reference and physical cells.
//!
//! Spatial points are stored as `[f64; 2]` for both spatial dimensions; in one
//! space dimension only the first coordinate is meaningful and the second is 0.

use crate::error::{Error, Result};

pub type Point = [f64; 2];

/// Closed time interval `[a, b]` with `a < b`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Interval {
    pub a: f64,
    pub b: f64,
}

impl Interval {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a < b) {
            return Err(Error::InvalidMesh(format!("empty interval [{a}, {b}]")));
        }
        Ok(Self { a, b })
    }

    pub fn length(&self) -> f64 {
        self.b - self.a
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.a + self.b)
    }

    /// Maps `s` in `[0, 1]` onto the interval.
    pub fn map(&self, s: f64) -> f64 {
        self.a + s * (self.b - self.a)
    }

    pub fn contains(&self, t: f64) -> bool {
        self.a <= t && t <= self.b
    }

    pub fn halves(&self) -> [Interval; 2] {
        let m = self.midpoint();
        [Interval { a: self.a, b: m }, Interval { a: m, b: self.b }]
    }
}

/// Closed `d`-simplex in `R^d`, `d` in {1, 2}.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Simplex {
    dim: usize,
    vertices: [Point; 3],
}

impl Simplex {
    pub fn new(dim: usize, vertices: &[Point]) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return Err(Error::UnsupportedDimension(dim));
        }
        if vertices.len() != dim + 1 {
            return Err(Error::InvalidMesh(format!(
                "a {dim}-simplex needs {} vertices, got {}",
                dim + 1,
                vertices.len()
            )));
        }
        let mut v = [[0.0; 2]; 3];
        v[..=dim].copy_from_slice(vertices);
        if dim == 1 {
            for p in v.iter_mut() {
                p[1] = 0.0;
            }
        }
        let s = Self { dim, vertices: v };
        if !(s.volume() > 0.0) {
            return Err(Error::InvalidMesh(format!("degenerate simplex {vertices:?}")));
        }
        Ok(s)
    }

    pub fn segment(a: f64, b: f64) -> Result<Self> {
        let (a, b) = if a < b { (a, b) } else { (b, a) };
        Self::new(1, &[[a, 0.0], [b, 0.0]])
    }

    pub fn triangle(p0: Point, p1: Point, p2: Point) -> Result<Self> {
        Self::new(2, &[p0, p1, p2])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices[..=self.dim]
    }

    pub fn vertex(&self, i: usize) -> Point {
        self.vertices[i]
    }

    /// Columns `v_i - v_0` of the affine map `x = v_0 + B xi`.
    pub fn jacobian(&self) -> [[f64; 2]; 2] {
        let v0 = self.vertices[0];
        match self.dim {
            1 => [[self.vertices[1][0] - v0[0], 0.0], [0.0, 1.0]],
            _ => {
                let e1 = sub(self.vertices[1], v0);
                let e2 = sub(self.vertices[2], v0);
                [[e1[0], e2[0]], [e1[1], e2[1]]]
            }
        }
    }

    /// Signed determinant of the affine map.
    pub fn det(&self) -> f64 {
        let b = self.jacobian();
        match self.dim {
            1 => b[0][0],
            _ => b[0][0] * b[1][1] - b[0][1] * b[1][0],
        }
    }

    pub fn volume(&self) -> f64 {
        match self.dim {
            1 => self.det().abs(),
            _ => 0.5 * self.det().abs(),
        }
    }

    pub fn diameter(&self) -> f64 {
        let vs = self.vertices();
        let mut h: f64 = 0.0;
        for i in 0..vs.len() {
            for j in i + 1..vs.len() {
                h = h.max(dist(vs[i], vs[j]));
            }
        }
        h
    }

    pub fn inradius(&self) -> f64 {
        match self.dim {
            1 => 0.5 * self.volume(),
            _ => {
                let v = &self.vertices;
                let perimeter = dist(v[0], v[1]) + dist(v[1], v[2]) + dist(v[2], v[0]);
                2.0 * self.volume() / perimeter
            }
        }
    }

    pub fn centroid(&self) -> Point {
        let n = (self.dim + 1) as f64;
        let mut c = [0.0; 2];
        for v in self.vertices() {
            c[0] += v[0] / n;
            c[1] += v[1] / n;
        }
        c
    }

    /// Physical point of reference coordinates `xi`.
    pub fn map(&self, xi: Point) -> Point {
        let b = self.jacobian();
        let v0 = self.vertices[0];
        match self.dim {
            1 => [v0[0] + b[0][0] * xi[0], 0.0],
            _ => [
                v0[0] + b[0][0] * xi[0] + b[0][1] * xi[1],
                v0[1] + b[1][0] * xi[0] + b[1][1] * xi[1],
            ],
        }
    }

    /// Barycentric coordinates of `x` (no containment check).
    pub fn barycentric(&self, x: Point) -> [f64; 3] {
        let xi = AffineMap::new(self).to_reference(x);
        match self.dim {
            1 => [1.0 - xi[0], xi[0], 0.0],
            _ => [1.0 - xi[0] - xi[1], xi[0], xi[1]],
        }
    }

    /// Vertex indices of the facet opposite vertex `f`, in increasing local order.
    pub fn facet_vertices(&self, f: usize) -> Vec<usize> {
        (0..=self.dim).filter(|&i| i != f).collect()
    }

    /// The `2^d` children: midpoint bisection for `d = 1`, red refinement for `d = 2`.
    pub fn split(&self) -> Vec<Simplex> {
        let v = &self.vertices;
        match self.dim {
            1 => {
                let m = mid(v[0], v[1]);
                vec![
                    Simplex { dim: 1, vertices: [v[0], m, [0.0; 2]] },
                    Simplex { dim: 1, vertices: [m, v[1], [0.0; 2]] },
                ]
            }
            _ => {
                let m01 = mid(v[0], v[1]);
                let m12 = mid(v[1], v[2]);
                let m20 = mid(v[2], v[0]);
                vec![
                    Simplex { dim: 2, vertices: [v[0], m01, m20] },
                    Simplex { dim: 2, vertices: [m01, v[1], m12] },
                    Simplex { dim: 2, vertices: [m20, m12, v[2]] },
                    Simplex { dim: 2, vertices: [m12, m20, m01] },
                ]
            }
        }
    }

    /// Closed-set intersection test (separating axes; exact on dyadic coordinates).
    pub fn intersects(&self, other: &Simplex) -> bool {
        match self.dim {
            1 => {
                let (a0, a1) = (self.vertices[0][0], self.vertices[1][0]);
                let (b0, b1) = (other.vertices[0][0], other.vertices[1][0]);
                a0.min(a1) <= b0.max(b1) && b0.min(b1) <= a0.max(a1)
            }
            _ => {
                for tri in [self, other] {
                    for i in 0..3 {
                        let p = tri.vertices[i];
                        let q = tri.vertices[(i + 1) % 3];
                        let n = [q[1] - p[1], p[0] - q[0]];
                        let proj = |s: &Simplex| {
                            let mut lo = f64::INFINITY;
                            let mut hi = f64::NEG_INFINITY;
                            for v in s.vertices() {
                                let x = n[0] * v[0] + n[1] * v[1];
                                lo = lo.min(x);
                                hi = hi.max(x);
                            }
                            (lo, hi)
                        };
                        let (alo, ahi) = proj(self);
                        let (blo, bhi) = proj(other);
                        if ahi < blo || bhi < alo {
                            return false;
                        }
                    }
                }
                true
            }
        }
    }

    /// Whether `x` lies in the closed simplex, up to `tol` in barycentric coordinates.
    pub fn contains(&self, x: Point, tol: f64) -> bool {
        let l = self.barycentric(x);
        l[..=self.dim].iter().all(|&li| li >= -tol)
    }
}

/// Affine reference map of a simplex with its inverse, cached.
#[derive(Clone, Copy, Debug)]
pub struct AffineMap {
    pub dim: usize,
    pub origin: Point,
    pub jac: [[f64; 2]; 2],
    pub inv: [[f64; 2]; 2],
    pub det: f64,
}

impl AffineMap {
    pub fn new(s: &Simplex) -> Self {
        let jac = s.jacobian();
        let det = s.det();
        let inv = match s.dim {
            1 => [[1.0 / jac[0][0], 0.0], [0.0, 1.0]],
            _ => [
                [jac[1][1] / det, -jac[0][1] / det],
                [-jac[1][0] / det, jac[0][0] / det],
            ],
        };
        Self { dim: s.dim, origin: s.vertices[0], jac, inv, det }
    }

    pub fn to_reference(&self, x: Point) -> Point {
        let d = sub(x, self.origin);
        match self.dim {
            1 => [self.inv[0][0] * d[0], 0.0],
            _ => [
                self.inv[0][0] * d[0] + self.inv[0][1] * d[1],
                self.inv[1][0] * d[0] + self.inv[1][1] * d[1],
            ],
        }
    }

    pub fn to_physical(&self, xi: Point) -> Point {
        match self.dim {
            1 => [self.origin[0] + self.jac[0][0] * xi[0], 0.0],
            _ => [
                self.origin[0] + self.jac[0][0] * xi[0] + self.jac[0][1] * xi[1],
                self.origin[1] + self.jac[1][0] * xi[0] + self.jac[1][1] * xi[1],
            ],
        }
    }

    /// Physical gradient `B^{-T} g` of a reference gradient `g`.
    pub fn push_gradient(&self, g: Point) -> Point {
        match self.dim {
            1 => [self.inv[0][0] * g[0], 0.0],
            _ => [
                self.inv[0][0] * g[0] + self.inv[1][0] * g[1],
                self.inv[0][1] * g[0] + self.inv[1][1] * g[1],
            ],
        }
    }

    /// Contravariant Piola transform `B v / |det B|`.
    pub fn piola(&self, v: Point) -> Point {
        let s = 1.0 / self.det.abs();
        match self.dim {
            1 => [self.jac[0][0] * v[0] * s, 0.0],
            _ => [
                (self.jac[0][0] * v[0] + self.jac[0][1] * v[1]) * s,
                (self.jac[1][0] * v[0] + self.jac[1][1] * v[1]) * s,
            ],
        }
    }
}

pub fn sub(a: Point, b: Point) -> Point {
    [a[0] - b[0], a[1] - b[1]]
}

pub fn mid(a: Point, b: Point) -> Point {
    [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])]
}

pub fn dist(a: Point, b: Point) -> f64 {
    let d = sub(a, b);
    (d[0] * d[0] + d[1] * d[1]).sqrt()
}

pub fn dot(a: Point, b: Point) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

/// Lexicographic order on points, used to orient facets independently of the element.
pub fn lex_less(a: Point, b: Point) -> bool {
    a[0] < b[0] || (a[0] == b[0] && a[1] < b[1])
}

/// Bit pattern key of a coordinate, with `-0.0` folded onto `0.0`.
pub fn coord_key(x: f64) -> u64 {
    if x == 0.0 {
        0
    } else {
        x.to_bits()
    }
}
