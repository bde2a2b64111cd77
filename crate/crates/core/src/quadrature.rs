//! Gauss rules on intervals, collapsed (Duffy) rules on triangles, and their
//! tensor products on prisms.

use crate::error::{Error, Result};
use crate::geometry::{Interval, Point, Simplex};

/// Largest supported polynomial exactness per direction.
pub const MAX_DEGREE: usize = 120;

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, z);
        if d != 0.0 {
            dp = d;
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

/// Legendre polynomial `P_n(x)` and its derivative.
pub fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    if n == 0 {
        return (1.0, 0.0);
    }
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let n = n as f64;
    let d = if (1.0 - x * x).abs() < 1e-300 {
        // endpoint limit P_n'(+-1) = (+-1)^{n+1} n(n+1)/2
        let s = if x > 0.0 { 1.0 } else if (n as usize).is_multiple_of(2) { -1.0 } else { 1.0 };
        s * n * (n + 1.0) / 2.0
    } else {
        n * (x * p1 - p0) / (x * x - 1.0)
    };
    (p1, d)
}

/// Rule on `[0, 1]` with weights summing to one.
#[derive(Clone, Debug)]
pub struct LineRule {
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
}

impl LineRule {
    /// Gauss rule exact for polynomials of degree `degree`.
    pub fn gauss(degree: usize) -> Result<Self> {
        if degree > MAX_DEGREE {
            return Err(Error::UnsupportedDegree(degree));
        }
        let n = degree / 2 + 1;
        let (x, w) = gauss_legendre(n);
        Ok(Self {
            points: x.iter().map(|&xi| 0.5 * (xi + 1.0)).collect(),
            weights: w.iter().map(|&wi| 0.5 * wi).collect(),
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Rule on the reference simplex (`[0,1]` or the unit triangle) with weights
/// summing to one, i.e. it computes the mean value.
#[derive(Clone, Debug)]
pub struct SimplexRule {
    pub dim: usize,
    pub points: Vec<Point>,
    pub weights: Vec<f64>,
}

impl SimplexRule {
    pub fn new(dim: usize, degree: usize) -> Result<Self> {
        match dim {
            1 => {
                let l = LineRule::gauss(degree)?;
                Ok(Self {
                    dim,
                    points: l.points.iter().map(|&x| [x, 0.0]).collect(),
                    weights: l.weights,
                })
            }
            2 => {
                // xi1 = u, xi2 = v (1 - u); the Jacobian (1 - u) raises the degree in u by one.
                let lu = LineRule::gauss(degree + 1)?;
                let lv = LineRule::gauss(degree)?;
                let mut points = Vec::with_capacity(lu.len() * lv.len());
                let mut weights = Vec::with_capacity(lu.len() * lv.len());
                for (&u, &wu) in lu.points.iter().zip(&lu.weights) {
                    for (&v, &wv) in lv.points.iter().zip(&lv.weights) {
                        points.push([u, v * (1.0 - u)]);
                        // reference area 1/2, normalized to mean value
                        weights.push(2.0 * wu * wv * (1.0 - u));
                    }
                }
                Ok(Self { dim, points, weights })
            }
            d => Err(Error::UnsupportedDimension(d)),
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Reference rules for a prism, to be mapped onto many elements.
#[derive(Clone, Debug)]
pub struct PrismRule {
    pub time: LineRule,
    pub space: SimplexRule,
    pub degree_t: usize,
    pub degree_x: usize,
}

impl PrismRule {
    pub fn new(dim: usize, degree_t: usize, degree_x: usize) -> Result<Self> {
        Ok(Self {
            time: LineRule::gauss(degree_t)?,
            space: SimplexRule::new(dim, degree_x)?,
            degree_t,
            degree_x,
        })
    }

    pub fn map(&self, time: &Interval, base: &Simplex) -> QuadratureRule {
        let vol = time.length() * base.volume();
        let mut points = Vec::with_capacity(self.time.len() * self.space.len());
        let mut weights = Vec::with_capacity(points.capacity());
        for (&s, &ws) in self.time.points.iter().zip(&self.time.weights) {
            let t = time.map(s);
            for (&xi, &wx) in self.space.points.iter().zip(&self.space.weights) {
                points.push((t, base.map(xi)));
                weights.push(ws * wx * vol);
            }
        }
        QuadratureRule { points, weights, degree_t: self.degree_t, degree_x: self.degree_x }
    }
}

/// Quadrature on a physical prism `J x K`.
#[derive(Clone, Debug)]
pub struct QuadratureRule {
    pub points: Vec<(f64, Point)>,
    pub weights: Vec<f64>,
    pub degree_t: usize,
    pub degree_x: usize,
}

impl QuadratureRule {
    pub fn integrate(&self, f: impl Fn(f64, Point) -> f64) -> f64 {
        self.points
            .iter()
            .zip(&self.weights)
            .map(|(&(t, x), &w)| w * f(t, x))
            .sum()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Gauss rule in time tensorized with a collapsed simplex rule in space, mapped to `J x K`.
pub fn make_quadrature(
    time: &Interval,
    base: &Simplex,
    degree_t: usize,
    degree_x: usize,
) -> Result<QuadratureRule> {
    Ok(PrismRule::new(base.dim(), degree_t, degree_x)?.map(time, base))
}

/// Rule on the physical simplex `K`, weights summing to `|K|`.
pub fn simplex_quadrature(base: &Simplex, degree: usize) -> Result<Vec<(Point, f64)>> {
    let r = SimplexRule::new(base.dim(), degree)?;
    let vol = base.volume();
    Ok(r.points.iter().zip(&r.weights).map(|(&xi, &w)| (base.map(xi), w * vol)).collect())
}
