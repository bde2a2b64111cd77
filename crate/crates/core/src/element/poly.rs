//! Polynomial building blocks: monomials on the reference simplex, Lagrange
//! bases on principal lattices and orthonormal Legendre polynomials on intervals.

use crate::geometry::{Interval, Point};
use crate::quadrature::legendre_with_derivative;

/// Exponents `alpha` with `|alpha| <= degree` in `dim` variables, graded order.
pub fn monomial_exponents(dim: usize, degree: usize) -> Vec<[usize; 2]> {
    let mut out = Vec::new();
    for total in 0..=degree {
        match dim {
            1 => out.push([total, 0]),
            _ => {
                for a in (0..=total).rev() {
                    out.push([a, total - a]);
                }
            }
        }
    }
    out
}

/// Homogeneous exponents of exactly `degree`.
pub fn homogeneous_exponents(dim: usize, degree: usize) -> Vec<[usize; 2]> {
    monomial_exponents(dim, degree)
        .into_iter()
        .filter(|e| e[0] + e[1] == degree)
        .collect()
}

pub fn dim_p(dim: usize, degree: usize) -> usize {
    match dim {
        1 => degree + 1,
        _ => (degree + 1) * (degree + 2) / 2,
    }
}

fn powi(x: f64, n: usize) -> f64 {
    let mut r = 1.0;
    for _ in 0..n {
        r *= x;
    }
    r
}

/// Value of `xi^alpha`.
pub fn monomial(e: [usize; 2], xi: Point) -> f64 {
    powi(xi[0], e[0]) * powi(xi[1], e[1])
}

/// Reference gradient of `xi^alpha`.
pub fn monomial_grad(e: [usize; 2], xi: Point) -> Point {
    let dx = if e[0] == 0 { 0.0 } else { e[0] as f64 * powi(xi[0], e[0] - 1) * powi(xi[1], e[1]) };
    let dy = if e[1] == 0 { 0.0 } else { e[1] as f64 * powi(xi[0], e[0]) * powi(xi[1], e[1] - 1) };
    [dx, dy]
}

/// Principal lattice of order `k` on the reference simplex, vertices first.
pub fn principal_lattice(dim: usize, k: usize) -> Vec<Point> {
    let kf = k as f64;
    match dim {
        1 => {
            let mut pts = vec![[0.0, 0.0], [1.0, 0.0]];
            for j in 1..k {
                pts.push([j as f64 / kf, 0.0]);
            }
            if k == 0 {
                return vec![[0.5, 0.0]];
            }
            pts
        }
        _ => {
            if k == 0 {
                return vec![[1.0 / 3.0, 1.0 / 3.0]];
            }
            let mut pts = vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
            for j in 0..=k {
                for i in 0..=k - j {
                    let p = [i as f64 / kf, j as f64 / kf];
                    if !pts.contains(&p) {
                        pts.push(p);
                    }
                }
            }
            pts
        }
    }
}

/// Lagrange basis of `P_{n}(J)` on the equispaced lattice `t_a = a/n`, `a = 0..=n`,
/// evaluated in the unit coordinate `s`; returns values and `d/ds`.
pub fn lagrange_1d(n: usize, s: f64) -> (Vec<f64>, Vec<f64>) {
    if n == 0 {
        return (vec![1.0], vec![0.0]);
    }
    let nodes: Vec<f64> = (0..=n).map(|a| a as f64 / n as f64).collect();
    let mut val = vec![0.0; n + 1];
    let mut der = vec![0.0; n + 1];
    for a in 0..=n {
        let mut v = 1.0;
        let mut d = 0.0;
        for b in 0..=n {
            if b == a {
                continue;
            }
            let denom = nodes[a] - nodes[b];
            d = d * (s - nodes[b]) / denom + v / denom;
            v *= (s - nodes[b]) / denom;
        }
        val[a] = v;
        der[a] = d;
    }
    (val, der)
}

/// `L2(J)`-orthonormal Legendre polynomial of degree `m` and its time derivative.
pub fn orthonormal_legendre(m: usize, time: &Interval, t: f64) -> (f64, f64) {
    let h = time.length();
    let z = 2.0 * (t - time.a) / h - 1.0;
    let (p, dp) = legendre_with_derivative(m, z);
    let c = ((2 * m + 1) as f64 / h).sqrt();
    (c * p, c * dp * 2.0 / h)
}

/// Legendre polynomial `P_m(2s - 1)` on `[0, 1]`.
pub fn shifted_legendre(m: usize, s: f64) -> f64 {
    legendre_with_derivative(m, 2.0 * s - 1.0).0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::LineRule;

    #[test]
    fn lattice_sizes_match_polynomial_dimension() {
        for d in 1..=2 {
            for k in 1..=3 {
                assert_eq!(principal_lattice(d, k).len(), dim_p(d, k));
                assert_eq!(monomial_exponents(d, k).len(), dim_p(d, k));
            }
        }
    }

    #[test]
    fn lagrange_1d_kronecker_and_derivative() {
        for n in 0..4 {
            for a in 0..=n {
                let s = if n == 0 { 0.3 } else { a as f64 / n as f64 };
                let (v, _) = lagrange_1d(n, s);
                for (b, vb) in v.iter().enumerate() {
                    let expect = if n == 0 || a == b { 1.0 } else { 0.0 };
                    assert!((vb - expect).abs() < 1e-14);
                }
            }
            let s = 0.37;
            let h = 1e-6;
            let (_, d) = lagrange_1d(n, s);
            let (vp, _) = lagrange_1d(n, s + h);
            let (vm, _) = lagrange_1d(n, s - h);
            for a in 0..=n {
                assert!((d[a] - (vp[a] - vm[a]) / (2.0 * h)).abs() < 1e-7);
            }
        }
    }

    #[test]
    fn legendre_is_orthonormal_on_interval() {
        let j = Interval::new(0.25, 1.0).unwrap();
        let r = LineRule::gauss(10).unwrap();
        for m in 0..4 {
            for n in 0..4 {
                let ip: f64 = r
                    .points
                    .iter()
                    .zip(&r.weights)
                    .map(|(&s, &w)| {
                        let t = j.map(s);
                        w * j.length() * orthonormal_legendre(m, &j, t).0 * orthonormal_legendre(n, &j, t).0
                    })
                    .sum();
                let expect = if m == n { 1.0 } else { 0.0 };
                assert!((ip - expect).abs() < 1e-13);
            }
        }
    }
}
