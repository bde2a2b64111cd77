//! Registered model problems on `[0, 1] x (0, 1)^d`.

use std::f64::consts::PI;

use crate::assembly::Rhs;
use crate::error::{Error, Result};
use crate::geometry::Point;

type ScalarFn = Box<dyn Fn(f64, Point) -> f64 + Send + Sync>;
type VectorFn = Box<dyn Fn(f64, Point) -> Point + Send + Sync>;
type InitialFn = Box<dyn Fn(Point) -> f64 + Send + Sync>;

/// Quantities of a known solution entering the `U`-norm error.
pub struct Exact {
    pub grad_u1: VectorFn,
    pub u2: VectorFn,
    /// Space-time divergence `dt u1 + div_x u2`.
    pub div: ScalarFn,
}

/// Data `(f1, f2, u0)` of the first-order heat system.
pub struct Problem {
    pub id: &'static str,
    pub dim: usize,
    pub t_end: f64,
    pub f1: ScalarFn,
    pub f2: VectorFn,
    pub u0: InitialFn,
    pub exact: Option<Exact>,
}

impl std::fmt::Debug for Problem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Problem").field("id", &self.id).field("dim", &self.dim).finish_non_exhaustive()
    }
}

impl Rhs for Problem {
    fn f1(&self, _e: usize, t: f64, x: Point) -> f64 {
        (self.f1)(t, x)
    }

    fn f2(&self, _e: usize, t: f64, x: Point) -> Point {
        (self.f2)(t, x)
    }

    fn u0(&self, _e: usize, x: Point) -> f64 {
        (self.u0)(x)
    }
}

fn constant(dim: usize, id: &'static str, f1: f64, u0: InitialFn) -> Problem {
    Problem {
        id,
        dim,
        t_end: 1.0,
        f1: Box::new(move |_, _| f1),
        f2: Box::new(|_, _| [0.0, 0.0]),
        u0,
        exact: None,
    }
}

pub const PROBLEM_IDS: [&str; 7] = [
    "1d-nonmatching",
    "1d-interior-kink",
    "1d-boundary-sqrt",
    "2d-nonmatching",
    "2d-interior-kink",
    "2d-boundary-edge",
    "1d-smooth",
];

/// Looks a problem up by id.
pub fn problem(id: &str) -> Result<Problem> {
    let p = match id {
        "1d-nonmatching" => constant(1, "1d-nonmatching", 2.0, Box::new(|_| 1.0)),
        "1d-interior-kink" => constant(1, "1d-interior-kink", 1.0, Box::new(|x| 1.0 - 2.0 * (x[0] - 0.5).abs())),
        "1d-boundary-sqrt" => constant(1, "1d-boundary-sqrt", 0.0, Box::new(|x| x[0].sqrt() * (1.0 - x[0]))),
        "2d-nonmatching" => constant(2, "2d-nonmatching", 0.0, Box::new(|_| 1.0)),
        "2d-interior-kink" => constant(
            2,
            "2d-interior-kink",
            0.0,
            Box::new(|x| {
                let r = ((x[0] - 0.5).powi(2) + (x[1] - 0.5).powi(2)).sqrt();
                r * (PI * x[0]).sin() * (PI * x[1]).sin()
            }),
        ),
        "2d-boundary-edge" => constant(
            2,
            "2d-boundary-edge",
            0.0,
            Box::new(|x| x[0].powf(0.75) * (1.0 - x[0]) * x[1] * (1.0 - x[1])),
        ),
        "1d-smooth" => {
            let decay = |t: f64| (-PI * PI * t).exp();
            Problem {
                id: "1d-smooth",
                dim: 1,
                t_end: 1.0,
                f1: Box::new(|_, _| 0.0),
                f2: Box::new(|_, _| [0.0, 0.0]),
                u0: Box::new(|x| (PI * x[0]).sin()),
                exact: Some(Exact {
                    grad_u1: Box::new(move |t, x| [PI * decay(t) * (PI * x[0]).cos(), 0.0]),
                    u2: Box::new(move |t, x| [-PI * decay(t) * (PI * x[0]).cos(), 0.0]),
                    div: Box::new(|_, _| 0.0),
                }),
            }
        }
        other => return Err(Error::UnknownProblem(other.to_string())),
    };
    Ok(p)
}

pub fn registry() -> Vec<Problem> {
    PROBLEM_IDS.iter().map(|id| problem(id).expect("registered id")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_lookup() {
        assert_eq!(registry().len(), 7);
        let p = problem("1d-nonmatching").unwrap();
        assert_eq!(((p.f1)(0.3, [0.2, 0.0]), (p.u0)([0.7, 0.0])), (2.0, 1.0));
        let k = problem("2d-interior-kink").unwrap();
        assert_eq!((k.u0)([0.5, 0.5]), 0.0);
        assert!(((k.u0)([0.25, 0.5]) - 0.25 * (PI / 4.0).sin()).abs() < 1e-15);
        assert!(matches!(problem("3d"), Err(Error::UnknownProblem(_))));
    }

    #[test]
    fn smooth_solution_solves_the_system() {
        let p = problem("1d-smooth").unwrap();
        let e = p.exact.as_ref().unwrap();
        // u2 = -grad u1, and dt u1 + div u2 = dt u - u_xx = 0
        let (t, x) = (0.3, [0.4, 0.0]);
        let h = 1e-5;
        let u = |t: f64, x: f64| (-PI * PI * t).exp() * (PI * x).sin();
        let dt = (u(t + h, x[0]) - u(t - h, x[0])) / (2.0 * h);
        let div_u2 = ((e.u2)(t, [x[0] + h, 0.0])[0] - (e.u2)(t, [x[0] - h, 0.0])[0]) / (2.0 * h);
        assert!((dt + div_u2).abs() < 1e-6);
        assert!(((e.grad_u1)(t, x)[0] + (e.u2)(t, x)[0]).abs() < 1e-15);
    }
}
