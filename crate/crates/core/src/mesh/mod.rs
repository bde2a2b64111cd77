//! Prismatic space-time meshes `J x K` with product refinement and a
//! level-difference closure, plus the triangular baseline mesh.

mod facets;
mod io;
pub mod nvb;

use std::collections::{HashMap, HashSet};

pub use facets::{BoundaryFacet, BoundaryKind, FacetKind, FacetRef, FacetRelation, FacetTopology, Orientation};
pub use nvb::TriMesh;

use crate::error::{Error, Result};
use crate::geometry::{coord_key, Interval, Point, Simplex};

/// Exact key of a space-time point.
pub(crate) type PointKey = [u64; 3];

pub(crate) fn point_key(t: f64, x: Point) -> PointKey {
    [coord_key(t), coord_key(x[0]), coord_key(x[1])]
}

/// A space-time prism `J x K` with its refinement level.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Prism {
    pub id: usize,
    pub time: Interval,
    pub base: Simplex,
    pub level: usize,
    /// Geometry of the prism this one was cut from.
    pub parent: Option<(Interval, Simplex)>,
}

impl Prism {
    pub fn volume(&self) -> f64 {
        self.time.length() * self.base.volume()
    }

    /// Closed-set intersection.
    pub fn intersects(&self, other: &Prism) -> bool {
        self.time.a <= other.time.b && other.time.a <= self.time.b && self.base.intersects(&other.base)
    }

    /// The `2 * 2^d` children, time halves major, space children minor.
    pub fn children(&self) -> Vec<(Interval, Simplex)> {
        let kids = self.base.split();
        let mut out = Vec::with_capacity(2 * kids.len());
        for j in self.time.halves() {
            for k in &kids {
                out.push((j, *k));
            }
        }
        out
    }

    /// Points of the uniform lattice `level + extra` that lie in this prism
    /// (vertices and dyadic subdivisions of edges/faces).
    fn lattice(&self, extra: usize) -> Vec<(f64, Point)> {
        let n = 1usize << extra;
        let times: Vec<f64> = (0..=n).map(|i| self.time.map(i as f64 / n as f64)).collect();
        let mut space: Vec<Point> = Vec::new();
        let v = self.base.vertices();
        match self.base.dim() {
            1 => {
                for i in 0..=n {
                    let s = i as f64 / n as f64;
                    space.push([v[0][0] + s * (v[1][0] - v[0][0]), 0.0]);
                }
            }
            _ => {
                for j in 0..=n {
                    for i in 0..=n - j {
                        let (a, b) = (i as f64 / n as f64, j as f64 / n as f64);
                        space.push([
                            v[0][0] + a * (v[1][0] - v[0][0]) + b * (v[2][0] - v[0][0]),
                            v[0][1] + a * (v[1][1] - v[0][1]) + b * (v[2][1] - v[0][1]),
                        ]);
                    }
                }
            }
        }
        let mut out = Vec::with_capacity(times.len() * space.len());
        for &t in &times {
            for &x in &space {
                out.push((t, x));
            }
        }
        out
    }

    pub fn vertices(&self) -> Vec<(f64, Point)> {
        let mut out = Vec::new();
        for t in [self.time.a, self.time.b] {
            for &x in self.base.vertices() {
                out.push((t, x));
            }
        }
        out
    }
}

/// Diagonal used to split the unit square into two triangles.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Diagonal {
    /// From `(0,0)` to `(1,1)`.
    #[default]
    Main,
    /// From `(1,0)` to `(0,1)`.
    Anti,
}

/// A partition of `[0, T] x [0, 1]^d` into prisms.
#[derive(Clone, Debug)]
pub struct PrismaticMesh {
    dim: usize,
    t_end: f64,
    prisms: Vec<Prism>,
    next_id: usize,
}

pub fn initial_prism_mesh(dim: usize, t_end: f64) -> Result<PrismaticMesh> {
    PrismaticMesh::initial(dim, t_end, Diagonal::Main)
}

impl PrismaticMesh {
    /// `[0,T] x [0,1]` as one prism, or `[0,T] x [0,1]^2` as two prisms.
    pub fn initial(dim: usize, t_end: f64, diagonal: Diagonal) -> Result<Self> {
        if !(t_end > 0.0) {
            return Err(Error::InvalidConfig(format!("final time must be positive, got {t_end}")));
        }
        let time = Interval::new(0.0, t_end)?;
        let bases = match dim {
            1 => vec![Simplex::segment(0.0, 1.0)?],
            2 => match diagonal {
                Diagonal::Main => vec![
                    Simplex::triangle([0.0, 0.0], [1.0, 0.0], [1.0, 1.0])?,
                    Simplex::triangle([0.0, 0.0], [1.0, 1.0], [0.0, 1.0])?,
                ],
                Diagonal::Anti => vec![
                    Simplex::triangle([0.0, 0.0], [1.0, 0.0], [0.0, 1.0])?,
                    Simplex::triangle([1.0, 0.0], [1.0, 1.0], [0.0, 1.0])?,
                ],
            },
            d => return Err(Error::UnsupportedDimension(d)),
        };
        let prisms: Vec<Prism> = bases
            .into_iter()
            .enumerate()
            .map(|(id, base)| Prism { id, time, base, level: 0, parent: None })
            .collect();
        let next_id = prisms.len();
        Ok(Self { dim, t_end, prisms, next_id })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    pub fn prisms(&self) -> &[Prism] {
        &self.prisms
    }

    pub fn len(&self) -> usize {
        self.prisms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.prisms.is_empty()
    }

    pub fn ids(&self) -> Vec<usize> {
        self.prisms.iter().map(|p| p.id).collect()
    }

    pub fn index_of(&self, id: usize) -> Option<usize> {
        self.prisms.iter().position(|p| p.id == id)
    }

    pub fn volume(&self) -> f64 {
        self.prisms.iter().map(Prism::volume).sum()
    }

    pub fn max_level(&self) -> usize {
        self.prisms.iter().map(|p| p.level).max().unwrap_or(0)
    }

    /// Whether `x` lies on the lateral boundary `[0,1]^d`.
    pub fn on_lateral_boundary(&self, x: Point) -> bool {
        (0..self.dim).any(|c| x[c] == 0.0 || x[c] == 1.0)
    }

    /// Refines the prisms with the given ids plus the closure needed to keep
    /// intersecting prisms within one level of each other.
    pub fn refine(&self, marked: &[usize]) -> Result<Self> {
        let pos: HashMap<usize, usize> = self.prisms.iter().enumerate().map(|(i, p)| (p.id, i)).collect();
        let mut idx = Vec::with_capacity(marked.len());
        for id in marked {
            idx.push(*pos.get(id).ok_or(Error::InvalidPrismId(*id))?);
        }
        Ok(self.refine_indices(&idx))
    }

    /// As [`refine`](Self::refine) but with positions in [`prisms`](Self::prisms).
    pub fn refine_indices(&self, marked: &[usize]) -> Self {
        let flags = self.closure(marked);
        let out = self.split(&flags);
        debug_assert!(out.max_level_jump() <= 1, "level rule violated after refinement");
        out
    }

    pub fn uniform_refine(&self) -> Self {
        self.split(&vec![true; self.prisms.len()])
    }

    /// Marks every prism that has to be refined together with `marked`: a prism
    /// intersecting a refined prism of higher level is refined as well, until stable.
    pub fn closure(&self, marked: &[usize]) -> Vec<bool> {
        let mut flags = vec![false; self.prisms.len()];
        let mut work: Vec<usize> = Vec::new();
        for &i in marked {
            if !flags[i] {
                flags[i] = true;
                work.push(i);
            }
        }
        if work.is_empty() {
            return flags;
        }
        // Every prism is registered at its level+1 lattice points; in a mesh
        // obeying the level rule, a coarser prism touching P contains a vertex of P
        // that is one of these points.
        let mut at: HashMap<PointKey, Vec<usize>> = HashMap::new();
        for (i, p) in self.prisms.iter().enumerate() {
            for (t, x) in p.lattice(1) {
                at.entry(point_key(t, x)).or_default().push(i);
            }
        }
        while let Some(i) = work.pop() {
            let p = &self.prisms[i];
            for (t, x) in p.vertices() {
                if let Some(list) = at.get(&point_key(t, x)) {
                    for &j in list {
                        if !flags[j] && self.prisms[j].level < p.level {
                            flags[j] = true;
                            work.push(j);
                        }
                    }
                }
            }
        }
        flags
    }

    fn split(&self, flags: &[bool]) -> Self {
        let mut next_id = self.next_id;
        let mut prisms = Vec::with_capacity(self.prisms.len() + flags.iter().filter(|&&f| f).count() * 7);
        for (p, &f) in self.prisms.iter().zip(flags) {
            if !f {
                prisms.push(*p);
                continue;
            }
            for (time, base) in p.children() {
                prisms.push(Prism { id: next_id, time, base, level: p.level + 1, parent: Some((p.time, p.base)) });
                next_id += 1;
            }
        }
        Self { dim: self.dim, t_end: self.t_end, prisms, next_id }
    }

    /// Largest level difference between intersecting prisms whose levels differ by at most two.
    /// Larger jumps cannot arise from refinement of a valid mesh.
    pub fn max_level_jump(&self) -> usize {
        let mut at: HashMap<PointKey, Vec<usize>> = HashMap::new();
        for (i, p) in self.prisms.iter().enumerate() {
            for (t, x) in p.lattice(2) {
                at.entry(point_key(t, x)).or_default().push(i);
            }
        }
        let mut worst = 0;
        for p in &self.prisms {
            for (t, x) in p.vertices() {
                for &j in &at[&point_key(t, x)] {
                    let q = &self.prisms[j];
                    if q.level < p.level {
                        worst = worst.max(p.level - q.level);
                    }
                }
            }
        }
        worst
    }

    /// Distinct vertices of all prisms.
    pub fn vertex_set(&self) -> HashSet<PointKey> {
        self.prisms.iter().flat_map(|p| p.vertices()).map(|(t, x)| point_key(t, x)).collect()
    }
}
