//! The global discrete space on a (possibly 1-irregular) prismatic mesh:
//! degree-of-freedom enumeration, lateral boundary conditions for `u1` and the
//! algebraic constraints on hanging nodes and slave facets.

use std::collections::HashMap;

use crate::element::{combine, BasisValues, ElementDegrees, PrismElement};
use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::mesh::{point_key, FacetKind, FacetRef, FacetTopology, Orientation, PointKey, PrismaticMesh};
use crate::quadrature::LineRule;

/// Status of a global degree of freedom.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DofClass {
    /// Unknown of the linear system, with its position among the free DoFs.
    Free(usize),
    /// `u1 = 0` on the lateral boundary.
    Fixed,
    /// Determined by free DoFs of a master prism.
    Slave,
}

/// Local-to-global numbering and the classification of every global DoF.
#[derive(Clone, Debug)]
pub struct DofMap {
    pub n_local: usize,
    /// `local_to_global[e * n_local + i]`
    pub local_to_global: Vec<usize>,
    pub class: Vec<DofClass>,
    pub n_free: usize,
    /// Free DoFs belonging to `u1`.
    pub n_u1_free: usize,
}

impl DofMap {
    pub fn global(&self, e: usize, i: usize) -> usize {
        self.local_to_global[e * self.n_local + i]
    }
}

/// Linear map from free coefficients to the local coefficients of every element.
#[derive(Clone, Debug)]
pub struct ConstraintMap {
    n_local: usize,
    row_ptr: Vec<usize>,
    terms: Vec<(usize, f64)>,
    /// Slave rows in terms of global master DoFs, before elimination of fixed DoFs.
    pub slave_rows: HashMap<usize, Vec<(usize, f64)>>,
}

impl ConstraintMap {
    /// `(free index, weight)` pairs of local DoF `i` of element `e`.
    pub fn row(&self, e: usize, i: usize) -> &[(usize, f64)] {
        let r = e * self.n_local + i;
        &self.terms[self.row_ptr[r]..self.row_ptr[r + 1]]
    }

    pub fn n_local(&self) -> usize {
        self.n_local
    }

    pub fn expand(&self, free: &[f64], e: usize) -> Vec<f64> {
        (0..self.n_local).map(|i| self.row(e, i).iter().map(|&(k, w)| w * free[k]).sum()).collect()
    }
}

/// Coefficients of a member of the discrete space, indexed by free DoFs.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteField {
    pub coeffs: Vec<f64>,
}

/// Jump magnitudes on one interior facet relation.
#[derive(Clone, Copy, Debug)]
pub struct FacetJump {
    pub relation: usize,
    /// `||[u1]||_{L2(F)}`
    pub u1: f64,
    /// `||[u2 . n_x]||_{L2(F)}` on lateral facets.
    pub u2n: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct DiscreteSpace {
    pub mesh: PrismaticMesh,
    pub degrees: ElementDegrees,
    pub elements: Vec<PrismElement>,
    pub topology: FacetTopology,
    pub dofs: DofMap,
    pub constraints: ConstraintMap,
}

/// `u1` nodal index of time endpoint `a` and base vertex `i` for `k = 1`.
fn u1_local(dim: usize, a: usize, i: usize) -> usize {
    a * (dim + 1) + i
}

pub fn build_space(mesh: &PrismaticMesh, degrees: ElementDegrees) -> Result<DiscreteSpace> {
    if degrees != ElementDegrees::LOWEST {
        return Err(Error::UnsupportedElement { l: degrees.l, k: degrees.k });
    }
    let dim = mesh.dim();
    let topology = mesh.facet_relations()?;
    let prisms = mesh.prisms();
    let elements: Vec<PrismElement> = prisms
        .iter()
        .map(|p| PrismElement::new(p.time, &p.base, degrees))
        .collect::<Result<_>>()?;
    let n_el = elements.len();
    let n1 = degrees.n_u1(dim);
    let n_local = n1 + degrees.n_u2(dim);
    let n_rt = crate::element::dim_rt(dim, degrees.k);
    let nm = crate::element::facet_moments(dim, degrees.k);

    // Hanging nodes: non-vertex points of the level+1 lattice on the boundary of a prism.
    let mut hanging: HashMap<PointKey, usize> = HashMap::new();
    for (q, p) in prisms.iter().enumerate() {
        let times = [p.time.a, p.time.midpoint(), p.time.b];
        let verts = p.base.vertices();
        let mut spatial: Vec<(Point, bool)> = verts.iter().map(|&v| (v, true)).collect();
        for i in 0..verts.len() {
            for j in i + 1..verts.len() {
                spatial.push((crate::geometry::mid(verts[i], verts[j]), false));
            }
        }
        for (ti, &t) in times.iter().enumerate() {
            for (si, &(x, is_vertex)) in spatial.iter().enumerate() {
                let t_end = ti != 1;
                if t_end && is_vertex {
                    continue;
                }
                // the centre of a 1+1D prism is interior
                if dim == 1 && ti == 1 && si == 2 {
                    continue;
                }
                hanging.entry(point_key(t, x)).or_insert(q);
            }
        }
    }

    let mut class: Vec<DofClass> = Vec::new();
    let mut local_to_global = vec![usize::MAX; n_el * n_local];
    let mut slave_rows: HashMap<usize, Vec<(usize, f64)>> = HashMap::new();

    // u1 nodes
    let mut node_id: HashMap<PointKey, usize> = HashMap::new();
    let mut hanging_nodes: Vec<(usize, f64, Point, usize)> = Vec::new();
    for (e, p) in prisms.iter().enumerate() {
        for (a, t) in [p.time.a, p.time.b].into_iter().enumerate() {
            for (i, &x) in p.base.vertices().iter().enumerate() {
                let key = point_key(t, x);
                let g = *node_id.entry(key).or_insert_with(|| {
                    let g = class.len();
                    let c = if mesh.on_lateral_boundary(x) {
                        DofClass::Fixed
                    } else if let Some(&q) = hanging.get(&key) {
                        hanging_nodes.push((g, t, x, q));
                        DofClass::Slave
                    } else {
                        DofClass::Free(0)
                    };
                    class.push(c);
                    g
                });
                local_to_global[e * n_local + u1_local(dim, a, i)] = g;
            }
        }
    }
    let n_u1_global = class.len();
    let mut bv = BasisValues::default();
    for &(g, t, x, q) in &hanging_nodes {
        elements[q].eval(t, x, &mut bv);
        let mut row = Vec::new();
        for (i, &w) in bv.u1.iter().enumerate() {
            if w.abs() > 1e-14 {
                let mg = local_to_global[q * n_local + i];
                row.push((mg, w));
            }
        }
        slave_rows.insert(g, row);
    }

    // u2: lateral facet moments shared or constrained, interior moments local.
    let mut shared_with: HashMap<FacetRef, FacetRef> = HashMap::new();
    let mut master_of: HashMap<FacetRef, FacetRef> = HashMap::new();
    for r in &topology.relations {
        if r.orientation != Orientation::Lateral {
            continue;
        }
        match r.kind {
            FacetKind::Shared => {
                shared_with.insert(r.master, r.slave);
            }
            FacetKind::MasterSlave => {
                master_of.insert(r.slave, r.master);
            }
        }
    }
    let mut pending: Vec<(FacetRef, FacetRef)> = Vec::new();
    for e in 0..n_el {
        for m in 0..=degrees.l {
            for f in 0..=dim {
                let fr = FacetRef { prism: e, facet: f + 2 };
                for j in 0..nm {
                    let li = n1 + m * n_rt + f * nm + j;
                    let g = if let Some(other) = shared_with.get(&fr) {
                        let oi = n1 + m * n_rt + (other.facet - 2) * nm + j;
                        local_to_global[other.prism * n_local + oi]
                    } else {
                        let g = class.len();
                        if let Some(&master) = master_of.get(&fr) {
                            class.push(DofClass::Slave);
                            if j == 0 && m == 0 {
                                pending.push((fr, master));
                            }
                        } else {
                            class.push(DofClass::Free(0));
                        }
                        g
                    };
                    local_to_global[e * n_local + li] = g;
                }
            }
            for li in n1 + m * n_rt + (dim + 1) * nm..n1 + (m + 1) * n_rt {
                local_to_global[e * n_local + li] = class.len();
                class.push(DofClass::Free(0));
            }
        }
    }
    debug_assert!(local_to_global.iter().all(|&g| g != usize::MAX));

    for (slave, master) in pending {
        let (se, me) = (&elements[slave.prism], &elements[master.prism]);
        for ms in 0..=degrees.l {
            for js in 0..nm {
                let ls = n1 + ms * n_rt + (slave.facet - 2) * nm + js;
                let gs = local_to_global[slave.prism * n_local + ls];
                let mut row = Vec::new();
                for mm in 0..=degrees.l {
                    for jm in 0..nm {
                        let lm = n1 + mm * n_rt + (master.facet - 2) * nm + jm;
                        let w = lateral_functional(se, slave.facet - 2, ms, js, &|t, x| {
                            let mut b = BasisValues::default();
                            me.eval(t, x, &mut b);
                            b.u2[lm - n1]
                        });
                        if w.abs() > 1e-14 {
                            row.push((local_to_global[master.prism * n_local + lm], w));
                        }
                    }
                }
                slave_rows.insert(gs, row);
            }
        }
    }

    let mut n_free = 0;
    let mut n_u1_free = 0;
    for (g, c) in class.iter_mut().enumerate() {
        if let DofClass::Free(k) = c {
            *k = n_free;
            n_free += 1;
            if g < n_u1_global {
                n_u1_free += 1;
            }
        }
    }

    // Expand slave rows to free indices; masters must not be slaves themselves.
    let mut row_ptr = Vec::with_capacity(n_el * n_local + 1);
    let mut terms = Vec::new();
    row_ptr.push(0);
    let mut resolved: HashMap<usize, Vec<(usize, f64)>> = HashMap::new();
    for (&g, row) in &slave_rows {
        let mut out = Vec::new();
        for &(mg, w) in row {
            match class[mg] {
                DofClass::Free(k) => out.push((k, w)),
                DofClass::Fixed => {}
                DofClass::Slave => {
                    return Err(Error::ConstraintChain(format!("global DoF {g} depends on constrained DoF {mg}")))
                }
            }
        }
        resolved.insert(g, out);
    }
    for e in 0..n_el {
        for i in 0..n_local {
            let g = local_to_global[e * n_local + i];
            match class[g] {
                DofClass::Free(k) => terms.push((k, 1.0)),
                DofClass::Fixed => {}
                DofClass::Slave => terms.extend_from_slice(&resolved[&g]),
            }
            row_ptr.push(terms.len());
        }
    }

    Ok(DiscreteSpace {
        mesh: mesh.clone(),
        degrees,
        elements,
        topology,
        dofs: DofMap { n_local, local_to_global, class, n_free, n_u1_free },
        constraints: ConstraintMap { n_local, row_ptr, terms, slave_rows },
    })
}

/// `int_J L_m(t) (int_e w(t).n P_j ds) dt` for lateral facet `f` of `el`.
fn lateral_functional(el: &PrismElement, f: usize, m: usize, j: usize, w: &dyn Fn(f64, Point) -> Point) -> f64 {
    let k = el.degrees.k;
    let rule = LineRule::gauss(2 * (el.degrees.l + 1) + 2).expect("degree within range");
    let h = el.time.length();
    let mut acc = 0.0;
    for (&s, &ws) in rule.points.iter().zip(&rule.weights) {
        let t = el.time.map(s);
        let (p, _) = crate::element::poly::orthonormal_legendre(m, &el.time, t);
        acc += ws * h * p * el.spatial.facet_moment(f, j, &|x| w(t, x), 2 * k + 1);
    }
    acc
}

impl DiscreteSpace {
    pub fn n_dofs(&self) -> usize {
        self.dofs.n_free
    }

    pub fn dim(&self) -> usize {
        self.mesh.dim()
    }

    pub fn local_coeffs(&self, field: &DiscreteField, e: usize) -> Vec<f64> {
        self.constraints.expand(&field.coeffs, e)
    }

    pub fn zero_field(&self) -> DiscreteField {
        DiscreteField { coeffs: vec![0.0; self.n_dofs()] }
    }

    /// Element containing `(t, x)` (first match).
    pub fn locate(&self, t: f64, x: Point) -> Option<usize> {
        self.elements.iter().position(|el| el.contains(t, x))
    }

    /// `(u1, u2)` of a field at a point.
    pub fn eval(&self, field: &DiscreteField, t: f64, x: Point) -> Option<(f64, Point)> {
        let e = self.locate(t, x)?;
        Some(self.elements[e].eval_field(&self.local_coeffs(field, e), t, x))
    }

    /// Element-wise interpolation followed by averaging of the free DoFs.
    pub fn interp_onto_space(
        &self,
        v1: &(dyn Fn(f64, Point) -> f64 + Sync),
        v2: &(dyn Fn(f64, Point) -> Point + Sync),
    ) -> Result<DiscreteField> {
        let mut sum = vec![0.0; self.n_dofs()];
        let mut count = vec![0usize; self.n_dofs()];
        for (e, el) in self.elements.iter().enumerate() {
            let local = el.local_interpolant(v1, v2, 12)?;
            for (i, v) in local.iter().enumerate() {
                if let DofClass::Free(k) = self.dofs.class[self.dofs.global(e, i)] {
                    sum[k] += v;
                    count[k] += 1;
                }
            }
        }
        Ok(DiscreteField { coeffs: sum.iter().zip(&count).map(|(s, &c)| s / c as f64).collect() })
    }

    /// Free coefficients of the element-wise data `local` (one vector per element),
    /// read off from the first element holding each free DoF.
    pub fn restrict(&self, local: &[Vec<f64>]) -> DiscreteField {
        let mut out = vec![f64::NAN; self.n_dofs()];
        for (e, l) in local.iter().enumerate() {
            for (i, v) in l.iter().enumerate() {
                if let DofClass::Free(k) = self.dofs.class[self.dofs.global(e, i)] {
                    if out[k].is_nan() {
                        out[k] = *v;
                    }
                }
            }
        }
        DiscreteField { coeffs: out }
    }

    /// L2 norms of `[u1]` on every interior facet and of `[u2 . n_x]` on lateral ones.
    pub fn facet_jump_norms(&self, field: &DiscreteField) -> Vec<FacetJump> {
        let locals: Vec<Vec<f64>> = (0..self.elements.len()).map(|e| self.local_coeffs(field, e)).collect();
        self.local_jump_norms(&locals)
    }

    /// As [`facet_jump_norms`](Self::facet_jump_norms) for arbitrary element-wise coefficients.
    pub fn local_jump_norms(&self, locals: &[Vec<f64>]) -> Vec<FacetJump> {
        let dim = self.dim();
        let rule_t = LineRule::gauss(8).expect("degree within range");
        let mut out = Vec::with_capacity(self.topology.relations.len());
        let mut ba = BasisValues::default();
        let mut bb = BasisValues::default();
        for (ri, r) in self.topology.relations.iter().enumerate() {
            let s = self.mesh.prisms()[r.slave.prism];
            let (ea, eb) = (&self.elements[r.slave.prism], &self.elements[r.master.prism]);
            let (ca, cb) = (&locals[r.slave.prism], &locals[r.master.prism]);
            let mut j1 = 0.0;
            let mut j2 = 0.0;
            let mut point = |t: f64, x: Point, w: f64, normal: Option<Point>| {
                ea.eval(t, x, &mut ba);
                eb.eval(t, x, &mut bb);
                let (u1a, _, _, u2a, _) = combine(&ba, ca);
                let (u1b, _, _, u2b, _) = combine(&bb, cb);
                j1 += w * (u1a - u1b).powi(2);
                if let Some(n) = normal {
                    let d = (u2a[0] - u2b[0]) * n[0] + (u2a[1] - u2b[1]) * n[1];
                    j2 += w * d * d;
                }
            };
            match r.orientation {
                Orientation::Horizontal => {
                    let t = if r.slave.facet == 0 { s.time.a } else { s.time.b };
                    for (x, w) in crate::quadrature::simplex_quadrature(&s.base, 6).expect("degree within range") {
                        point(t, x, w, None);
                    }
                }
                Orientation::Lateral => {
                    let fac = ea.spatial.facet(r.slave.facet - 2);
                    let space: Vec<(Point, f64)> = if dim == 1 {
                        vec![(fac.start, 1.0)]
                    } else {
                        rule_t.points.iter().zip(&rule_t.weights).map(|(&u, &w)| (fac.point(u), w * fac.measure)).collect()
                    };
                    for (&st, &wt) in rule_t.points.iter().zip(&rule_t.weights) {
                        let t = s.time.map(st);
                        for &(x, wx) in &space {
                            point(t, x, wt * s.time.length() * wx, Some(fac.normal));
                        }
                    }
                }
            }
            out.push(FacetJump {
                relation: ri,
                u1: j1.sqrt(),
                u2n: (r.orientation == Orientation::Lateral).then(|| j2.sqrt()),
            });
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::initial_prism_mesh;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn space(mesh: &PrismaticMesh) -> DiscreteSpace {
        build_space(mesh, ElementDegrees::LOWEST).unwrap()
    }

    /// Free u1 nodes by brute force: distinct prism vertices off the lateral
    /// boundary that are not inside a facet of another prism.
    fn count_free_nodes(mesh: &PrismaticMesh) -> usize {
        let mut nodes: Vec<(f64, Point)> = mesh.prisms().iter().flat_map(|p| p.vertices()).collect();
        nodes.sort_by(|a, b| a.partial_cmp(b).unwrap());
        nodes.dedup();
        nodes
            .into_iter()
            .filter(|&(_, x)| !mesh.on_lateral_boundary(x))
            .filter(|&(t, x)| {
                mesh.prisms().iter().all(|p| {
                    let inside = p.time.contains(t) && p.base.contains(x, 1e-14);
                    !inside || p.vertices().contains(&(t, x))
                })
            })
            .count()
    }

    #[test]
    fn single_prism_counts() {
        let s = space(&initial_prism_mesh(1, 1.0).unwrap());
        assert_eq!(s.dofs.n_u1_free, 0);
        assert_eq!(s.n_dofs(), 3);
    }

    #[test]
    fn tensor_mesh_counts() {
        let mut m = initial_prism_mesh(1, 1.0).unwrap();
        for level in 1..4 {
            m = m.uniform_refine();
            let s = space(&m);
            let n = 1usize << level;
            assert_eq!(s.dofs.n_u1_free, (n + 1) * (n - 1));
            assert_eq!(s.dofs.n_u1_free, count_free_nodes(&m));
            assert_eq!(s.n_dofs() - s.dofs.n_u1_free, n * (n + 1) + n * n);
        }
        let m2 = initial_prism_mesh(2, 1.0).unwrap().uniform_refine();
        let s = space(&m2);
        // 3 time levels x 1 interior vertex; 16 edges and 8 triangles, each x 2 slabs x 2 moments
        assert_eq!(s.dofs.n_u1_free, 3);
        assert_eq!(s.n_dofs() - 3, 16 * 2 * 2 + 8 * 2 * 2);
    }

    fn irregular(dim: usize) -> PrismaticMesh {
        let mut m = initial_prism_mesh(dim, 1.0).unwrap().uniform_refine();
        for _ in 0..2 {
            let i = m.prisms().iter().position(|p| p.time.a == 0.0 && p.base.contains([0.3, 0.2], 0.0)).unwrap();
            m = m.refine_indices(&[i]);
        }
        m
    }

    #[test]
    fn hanging_node_count_matches_oracle() {
        for dim in 1..=2 {
            let m = irregular(dim);
            let s = space(&m);
            assert!(s.topology.master_slave().count() > 0);
            assert_eq!(s.dofs.n_u1_free, count_free_nodes(&m));
        }
    }

    #[test]
    fn random_fields_are_conforming() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for dim in 1..=2 {
            let s = space(&irregular(dim));
            for _ in 0..5 {
                let f = DiscreteField { coeffs: (0..s.n_dofs()).map(|_| rng.gen_range(-1.0..1.0)).collect() };
                let norm = f.coeffs.iter().map(|c| c * c).sum::<f64>().sqrt();
                for j in s.facet_jump_norms(&f) {
                    assert!(j.u1 <= 1e-10 * norm, "{j:?}");
                    assert!(j.u2n.unwrap_or(0.0) <= 1e-10 * norm, "{j:?}");
                }
            }
        }
    }

    #[test]
    fn corrupted_slave_shows_up_on_its_facet() {
        let s = space(&irregular(1));
        let f = DiscreteField { coeffs: vec![0.0; s.n_dofs()] };
        let mut locals: Vec<Vec<f64>> = (0..s.elements.len()).map(|e| s.local_coeffs(&f, e)).collect();
        let r = s.topology.master_slave().find(|r| r.orientation == Orientation::Lateral).unwrap();
        let n1 = s.elements[0].n_u1();
        locals[r.slave.prism][n1 + r.slave.facet - 2] = 1.0;
        let jumps = s.local_jump_norms(&locals);
        let bad: Vec<_> = jumps.iter().filter(|j| j.u1 + j.u2n.unwrap_or(0.0) > 1e-12).collect();
        assert_eq!(bad.len(), 1);
        assert_eq!(s.topology.relations[bad[0].relation], *r);
    }

    #[test]
    fn coarse_fields_are_reproduced_on_refined_meshes() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for dim in 1..=2 {
            let coarse_mesh = initial_prism_mesh(dim, 1.0).unwrap().uniform_refine();
            let coarse = space(&coarse_mesh);
            let cf = DiscreteField { coeffs: (0..coarse.n_dofs()).map(|_| rng.gen_range(-1.0..1.0)).collect() };
            let fine = space(&irregular(dim));
            let v = |t: f64, x: Point| {
                let e = coarse.locate(t, x).unwrap();
                coarse.elements[e].eval_field(&coarse.local_coeffs(&cf, e), t, x)
            };
            let fine_field = fine
                .interp_onto_space(&|t, x| v(t, x).0, &|t, x| v(t, x).1)
                .unwrap();
            for _ in 0..50 {
                let t: f64 = rng.gen_range(0.0..1.0);
                let x = if dim == 1 { [rng.gen_range(0.0..1.0), 0.0] } else {
                    let a: f64 = rng.gen_range(0.0..1.0);
                    [a, rng.gen_range(0.0..1.0)]
                };
                let (a1, a2) = v(t, x);
                let (b1, b2) = fine.eval(&fine_field, t, x).unwrap();
                assert!((a1 - b1).abs() < 1e-12 && (a2[0] - b2[0]).abs() < 1e-11 && (a2[1] - b2[1]).abs() < 1e-11);
            }
            // the constraint map round-trips the free coefficients
            let locals: Vec<Vec<f64>> = (0..fine.elements.len()).map(|e| fine.local_coeffs(&fine_field, e)).collect();
            let back = fine.restrict(&locals);
            for (a, b) in back.coeffs.iter().zip(&fine_field.coeffs) {
                assert!((a - b).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn zero_function_interpolates_to_zero() {
        let s = space(&irregular(2));
        let f = s.interp_onto_space(&|_, _| 0.0, &|_, _| [0.0, 0.0]).unwrap();
        assert!(f.coeffs.iter().all(|&c| c == 0.0));
    }
}
