//! Least-squares residual estimator `eta(f, v) = ||f - G v||_L` and its
//! element indicators, plus the `U`-norm error against a known solution.

use rayon::prelude::*;

use crate::assembly::{Rhs, DATA_DEGREE};
use crate::element::{combine, BasisValues, PrismElement};
use crate::error::Result;
use crate::mesh::BoundaryKind;
use crate::problems::Exact;
use crate::quadrature::{simplex_quadrature, PrismRule};
use crate::space::{DiscreteField, DiscreteSpace};

/// Squared element indicators `eta(P)^2` and the total `eta`.
#[derive(Clone, Debug, PartialEq)]
pub struct IndicatorSet {
    pub eta_sq: Vec<f64>,
    pub total: f64,
}

impl IndicatorSet {
    pub fn from_squares(eta_sq: Vec<f64>) -> Self {
        let total = eta_sq.iter().sum::<f64>().sqrt();
        Self { eta_sq, total }
    }
}

/// Volume part `||f1 - div v||^2 + ||f2 + v2 + grad v1||^2` on one prism.
fn volume_term(el: &PrismElement, e: usize, c: &[f64], rhs: &dyn Rhs, rule: &PrismRule) -> f64 {
    let q = rule.map(&el.time, el.base());
    let mut b = BasisValues::default();
    let mut acc = 0.0;
    for (&(t, x), &w) in q.points.iter().zip(&q.weights) {
        el.eval(t, x, &mut b);
        let (_, dt, g, v2, div) = combine(&b, c);
        let f2 = rhs.f2(e, t, x);
        let r1 = rhs.f1(e, t, x) - dt - div;
        let r2 = [f2[0] + v2[0] + g[0], f2[1] + v2[1] + g[1]];
        acc += w * (r1 * r1 + r2[0] * r2[0] + r2[1] * r2[1]);
    }
    acc
}

/// `||u0 - v1(0)||^2` over the bottom of a prism.
fn trace_term(el: &PrismElement, e: usize, c: &[f64], rhs: &dyn Rhs) -> Result<f64> {
    let mut b = BasisValues::default();
    let mut acc = 0.0;
    for (x, w) in simplex_quadrature(el.base(), DATA_DEGREE)? {
        el.eval(0.0, x, &mut b);
        let r = rhs.u0(e, x) - combine(&b, c).0;
        acc += w * r * r;
    }
    Ok(acc)
}

pub fn estimate(space: &DiscreteSpace, field: &DiscreteField, rhs: &dyn Rhs) -> Result<IndicatorSet> {
    let rule = PrismRule::new(space.dim(), DATA_DEGREE, DATA_DEGREE)?;
    let eta_sq = space
        .elements
        .par_iter()
        .enumerate()
        .map(|(e, el)| {
            let c = space.local_coeffs(field, e);
            let mut v = volume_term(el, e, &c, rhs, &rule);
            if el.time.a == 0.0 {
                v += trace_term(el, e, &c, rhs)?;
            }
            Ok(v)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(IndicatorSet::from_squares(eta_sq))
}

/// `||f - G v||_L^2` assembled as the cylinder integral plus the integral over
/// the initial boundary facets found by the facet classification.
pub fn residual_norm_sq(space: &DiscreteSpace, field: &DiscreteField, rhs: &dyn Rhs) -> Result<f64> {
    let rule = PrismRule::new(space.dim(), DATA_DEGREE, DATA_DEGREE)?;
    let volume: f64 = space
        .elements
        .par_iter()
        .enumerate()
        .map(|(e, el)| volume_term(el, e, &space.local_coeffs(field, e), rhs, &rule))
        .collect::<Vec<f64>>()
        .iter()
        .sum();
    let mut initial = 0.0;
    for bf in space.topology.boundary.iter().filter(|b| b.kind == BoundaryKind::Initial) {
        let e = bf.facet.prism;
        initial += trace_term(&space.elements[e], e, &space.local_coeffs(field, e), rhs)?;
    }
    Ok(volume + initial)
}

/// `||u - v||_U` with `||w||_U^2 = ||grad_x w1||^2 + ||w2||^2 + ||dt w1 + div_x w2||^2`.
pub fn u_error(space: &DiscreteSpace, field: &DiscreteField, exact: &Exact) -> Result<f64> {
    let sq = space
        .elements
        .par_iter()
        .enumerate()
        .map(|(e, el)| {
            let c = space.local_coeffs(field, e);
            el.u_norm_error(&c, &*exact.grad_u1, &*exact.u2, &*exact.div, DATA_DEGREE).map(|v| v * v)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(sq.iter().sum::<f64>().sqrt())
}
