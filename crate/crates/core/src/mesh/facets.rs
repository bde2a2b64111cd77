//! Classification of prism facets into shared, master-slave and boundary facets.
//!
//! Local facet numbering of a prism: 0 is the bottom `K x {a}`, 1 the top
//! `K x {b}`, and `2 + f` the lateral facet `J x e_f` with `e_f` opposite vertex `f` of `K`.

use std::collections::HashMap;

use super::{Prism, PrismaticMesh};
use crate::error::{Error, Result};
use crate::geometry::{coord_key, mid, Interval, Point, Simplex};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Orientation {
    /// `K x {t}`
    Horizontal,
    /// `J x e`
    Lateral,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FacetKind {
    Shared,
    MasterSlave,
}

/// A facet of a prism, by position of the prism in the mesh and local facet number.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FacetRef {
    pub prism: usize,
    pub facet: usize,
}

/// An interior facet relation. For shared facets `slave` is simply the side
/// with the smaller prism position.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FacetRelation {
    pub kind: FacetKind,
    pub orientation: Orientation,
    pub slave: FacetRef,
    pub master: FacetRef,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BoundaryKind {
    /// `{0} x Omega`
    Initial,
    /// `{T} x Omega`
    Terminal,
    /// `I x boundary(Omega)`
    Lateral,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BoundaryFacet {
    pub facet: FacetRef,
    pub kind: BoundaryKind,
}

#[derive(Clone, Debug, Default)]
pub struct FacetTopology {
    pub relations: Vec<FacetRelation>,
    pub boundary: Vec<BoundaryFacet>,
}

impl FacetTopology {
    pub fn shared(&self) -> impl Iterator<Item = &FacetRelation> {
        self.relations.iter().filter(|r| r.kind == FacetKind::Shared)
    }

    pub fn master_slave(&self) -> impl Iterator<Item = &FacetRelation> {
        self.relations.iter().filter(|r| r.kind == FacetKind::MasterSlave)
    }
}

type FacetKey = [u64; 8];

pub fn n_facets(dim: usize) -> usize {
    3 + dim
}

pub fn orientation(facet: usize) -> Orientation {
    if facet < 2 {
        Orientation::Horizontal
    } else {
        Orientation::Lateral
    }
}

fn sorted_points(mut pts: Vec<Point>) -> Vec<Point> {
    pts.sort_by(|a, b| a.partial_cmp(b).expect("finite coordinates"));
    pts
}

fn horizontal_key(t: f64, base: &Simplex) -> FacetKey {
    let mut k = [0u64; 8];
    k[0] = 0;
    k[1] = coord_key(t);
    for (i, p) in sorted_points(base.vertices().to_vec()).iter().enumerate() {
        k[2 + 2 * i] = coord_key(p[0]);
        k[3 + 2 * i] = coord_key(p[1]);
    }
    k
}

fn lateral_key(time: &Interval, pts: Vec<Point>) -> FacetKey {
    let mut k = [0u64; 8];
    k[0] = 1;
    k[1] = coord_key(time.a);
    k[2] = coord_key(time.b);
    for (i, p) in sorted_points(pts).iter().enumerate() {
        k[3 + 2 * i] = coord_key(p[0]);
        k[4 + 2 * i] = coord_key(p[1]);
    }
    k
}

/// Spatial vertices of the lateral facet opposite vertex `f`.
pub fn lateral_points(base: &Simplex, f: usize) -> Vec<Point> {
    base.facet_vertices(f).into_iter().map(|i| base.vertex(i)).collect()
}

fn facet_key(p: &Prism, f: usize) -> FacetKey {
    match f {
        0 => horizontal_key(p.time.a, &p.base),
        1 => horizontal_key(p.time.b, &p.base),
        _ => lateral_key(&p.time, lateral_points(&p.base, f - 2)),
    }
}

/// Key of the parent's facet containing facet `f` of `p`, if there is one.
fn parent_facet_key(p: &Prism, f: usize) -> Option<FacetKey> {
    let (pj, pk) = p.parent?;
    match f {
        0 | 1 => {
            let t = if f == 0 { p.time.a } else { p.time.b };
            (t == pj.a || t == pj.b).then(|| horizontal_key(t, &pk))
        }
        _ => {
            let pts = lateral_points(&p.base, f - 2);
            let same = |a: Point, b: Point| a == b;
            for g in 0..=pk.dim() {
                let edge = lateral_points(&pk, g);
                let on = |x: Point| {
                    edge.iter().any(|&e| same(e, x)) || (edge.len() == 2 && same(mid(edge[0], edge[1]), x))
                };
                if pts.iter().all(|&x| on(x)) {
                    return Some(lateral_key(&pj, edge));
                }
            }
            None
        }
    }
}

/// Which side of its facet `f` the prism lies on, relative to a
/// geometry-only orientation of the facet.
fn side(p: &Prism, f: usize) -> bool {
    match f {
        0 => true,
        1 => false,
        _ => {
            let pts = lateral_points(&p.base, f - 2);
            let opp = p.base.vertex(f - 2);
            if pts.len() == 1 {
                return opp[0] > pts[0][0];
            }
            let s = sorted_points(pts);
            let (a, b) = (s[0], s[1]);
            (b[0] - a[0]) * (opp[1] - a[1]) - (b[1] - a[1]) * (opp[0] - a[0]) > 0.0
        }
    }
}

impl PrismaticMesh {
    fn boundary_kind(&self, p: &Prism, f: usize) -> Option<BoundaryKind> {
        match f {
            0 if p.time.a == 0.0 => Some(BoundaryKind::Initial),
            1 if p.time.b == self.t_end => Some(BoundaryKind::Terminal),
            0 | 1 => None,
            _ => {
                let pts = lateral_points(&p.base, f - 2);
                let side = (0..self.dim).any(|c| {
                    [0.0, 1.0].iter().any(|&v| pts.iter().all(|x| x[c] == v))
                });
                side.then_some(BoundaryKind::Lateral)
            }
        }
    }

    /// Classifies every facet. Fails if facets overlap or leave gaps.
    pub fn facet_relations(&self) -> Result<FacetTopology> {
        let nf = n_facets(self.dim);
        let mut groups: HashMap<FacetKey, Vec<FacetRef>> = HashMap::new();
        let mut order: Vec<FacetKey> = Vec::new();
        for (i, p) in self.prisms.iter().enumerate() {
            for f in 0..nf {
                let key = facet_key(p, f);
                let e = groups.entry(key).or_default();
                if e.is_empty() {
                    order.push(key);
                }
                e.push(FacetRef { prism: i, facet: f });
            }
        }

        let mut topo = FacetTopology::default();
        let mut slaves_of: HashMap<FacetKey, usize> = HashMap::new();
        let mut unresolved = Vec::new();
        for key in &order {
            let refs = &groups[key];
            match refs.len() {
                1 => {
                    let r = refs[0];
                    let p = &self.prisms[r.prism];
                    if let Some(kind) = self.boundary_kind(p, r.facet) {
                        topo.boundary.push(BoundaryFacet { facet: r, kind });
                        continue;
                    }
                    let master = parent_facet_key(p, r.facet)
                        .and_then(|pk| groups.get(&pk).map(|m| (pk, m)))
                        .filter(|(_, m)| m.len() == 1);
                    match master {
                        Some((pk, m)) => {
                            *slaves_of.entry(pk).or_default() += 1;
                            topo.relations.push(FacetRelation {
                                kind: FacetKind::MasterSlave,
                                orientation: orientation(r.facet),
                                slave: r,
                                master: m[0],
                            });
                        }
                        None => unresolved.push(*key),
                    }
                }
                2 => {
                    let (a, b) = (refs[0].min(refs[1]), refs[0].max(refs[1]));
                    if side(&self.prisms[a.prism], a.facet) == side(&self.prisms[b.prism], b.facet) {
                        return Err(Error::InvalidMesh(format!(
                            "prisms {} and {} overlap across a facet",
                            self.prisms[a.prism].id, self.prisms[b.prism].id
                        )));
                    }
                    topo.relations.push(FacetRelation {
                        kind: FacetKind::Shared,
                        orientation: orientation(a.facet),
                        slave: a,
                        master: b,
                    });
                }
                n => {
                    return Err(Error::InvalidMesh(format!(
                        "facet of prism {} is shared by {n} prisms",
                        self.prisms[refs[0].prism].id
                    )))
                }
            }
        }
        let full = 1usize << self.dim;
        for key in unresolved {
            if slaves_of.get(&key) != Some(&full) {
                let r = groups[&key][0];
                return Err(Error::InvalidMesh(format!(
                    "facet {} of prism {} is neither boundary, shared, nor fully covered by slaves",
                    r.facet, self.prisms[r.prism].id
                )));
            }
        }
        topo.relations.sort_by_key(|r| (r.slave, r.master));
        topo.boundary.sort_by_key(|b| b.facet);
        Ok(topo)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::initial_prism_mesh;

    #[test]
    fn single_prism_has_only_boundary() {
        let m = initial_prism_mesh(1, 1.0).unwrap();
        let t = m.facet_relations().unwrap();
        assert!(t.relations.is_empty());
        assert_eq!(t.boundary.len(), 4);
    }

    #[test]
    fn uniform_grid_relations() {
        let m = initial_prism_mesh(1, 1.0).unwrap().uniform_refine();
        let t = m.facet_relations().unwrap();
        assert_eq!(t.shared().count(), 4);
        assert_eq!(t.master_slave().count(), 0);
        assert_eq!(t.boundary.len(), 8);
        let m2 = initial_prism_mesh(2, 1.0).unwrap();
        let t2 = m2.facet_relations().unwrap();
        assert_eq!(t2.shared().count(), 1);
        assert_eq!(t2.boundary.len(), 8);
    }

    #[test]
    fn slaves_sit_on_level_interface() {
        let m = initial_prism_mesh(1, 1.0).unwrap().uniform_refine();
        let m = m.refine(&[m.prisms()[0].id]).unwrap();
        let t = m.facet_relations().unwrap();
        let ms: Vec<_> = t.master_slave().collect();
        // fine block [0,1/2]^2: top facets (2) against the prism above, right facets (2) against the one beside
        assert_eq!(ms.len(), 4);
        for r in &ms {
            let s = &m.prisms()[r.slave.prism];
            let q = &m.prisms()[r.master.prism];
            assert_eq!((s.level, q.level), (2, 1));
        }
        assert_eq!(ms.iter().filter(|r| r.orientation == Orientation::Horizontal).count(), 2);
    }

    #[test]
    fn two_d_local_refinement_is_classified() {
        let m = initial_prism_mesh(2, 1.0).unwrap();
        let m = m.refine(&[0]).unwrap();
        let t = m.facet_relations().unwrap();
        // the diagonal lateral facet of the coarse prism is split into 2 x 2 slaves
        assert_eq!(t.master_slave().count(), 4);
        assert!(t.master_slave().all(|r| r.orientation == Orientation::Lateral));
    }

    #[test]
    fn overlap_is_detected() {
        let m = initial_prism_mesh(1, 1.0).unwrap();
        let mut bad = m.clone();
        bad.prisms.push(bad.prisms[0]);
        assert!(matches!(bad.facet_relations(), Err(Error::InvalidMesh(_))));
        let mut gap = m.uniform_refine();
        gap.prisms.pop();
        assert!(matches!(gap.facet_relations(), Err(Error::InvalidMesh(_))));
    }
}
