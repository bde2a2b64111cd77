//! Conforming triangulations of the `(t, x)` rectangle refined by newest vertex bisection.
//!
//! A triangle `[a, b, c]` has refinement edge `(a, b)` and newest vertex `c`.
//! Bisection inserts `m = mid(a, b)` and yields `[c, a, m]` and `[b, c, m]`.

use std::collections::{HashMap, HashSet};

use crate::error::{Error, Result};
use crate::geometry::{dist, mid, Point};

#[derive(Clone, Debug)]
pub struct TriMesh {
    t_end: f64,
    /// Vertices as `(t, x)`.
    vertices: Vec<Point>,
    triangles: Vec<[usize; 3]>,
}

fn edge(a: usize, b: usize) -> (usize, usize) {
    (a.min(b), a.max(b))
}

impl TriMesh {
    /// `[0,T] x [0,1]` cut along both diagonals into four triangles.
    pub fn initial(t_end: f64) -> Result<Self> {
        if !(t_end > 0.0) {
            return Err(Error::InvalidConfig(format!("final time must be positive, got {t_end}")));
        }
        let vertices = vec![[0.0, 0.0], [t_end, 0.0], [t_end, 1.0], [0.0, 1.0], [0.5 * t_end, 0.5]];
        let raw = [[0, 1, 4], [1, 2, 4], [2, 3, 4], [3, 0, 4]];
        let mut mesh = Self { t_end, vertices, triangles: Vec::new() };
        mesh.triangles = raw.iter().map(|t| mesh.tag_longest_edge(*t)).collect();
        Ok(mesh)
    }

    /// Rotates `t` so that its refinement edge is the longest edge, ties going
    /// to the edge with the lowest vertex index.
    fn tag_longest_edge(&self, t: [usize; 3]) -> [usize; 3] {
        let mut best = t;
        let mut best_key = (f64::NEG_INFINITY, usize::MAX);
        for r in 0..3 {
            let c = [t[r], t[(r + 1) % 3], t[(r + 2) % 3]];
            let len = dist(self.vertices[c[0]], self.vertices[c[1]]);
            let key = (len, c[0].min(c[1]));
            if key.0 > best_key.0 + 1e-14 || ((key.0 - best_key.0).abs() <= 1e-14 && key.1 < best_key.1) {
                best = c;
                best_key = key;
            }
        }
        best
    }

    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn len(&self) -> usize {
        self.triangles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triangles.is_empty()
    }

    pub fn area(&self, i: usize) -> f64 {
        let [a, b, c] = self.triangles[i].map(|v| self.vertices[v]);
        0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])).abs()
    }

    /// Refines every marked triangle into four (all three edges bisected) and
    /// closes by bisecting refinement edges of triangles with a bisected edge.
    pub fn refine(&self, marked: &[usize]) -> Result<Self> {
        let mut edges: HashSet<(usize, usize)> = HashSet::new();
        for &i in marked {
            let t = self.triangles.get(i).ok_or(Error::InvalidTriangle(i))?;
            for r in 0..3 {
                edges.insert(edge(t[r], t[(r + 1) % 3]));
            }
        }
        // closure: a triangle with any marked edge must bisect its refinement edge
        let mut edge_tris: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
        for (i, t) in self.triangles.iter().enumerate() {
            for r in 0..3 {
                edge_tris.entry(edge(t[r], t[(r + 1) % 3])).or_default().push(i);
            }
        }
        let mut work: Vec<(usize, usize)> = edges.iter().copied().collect();
        work.sort_unstable();
        while let Some(e) = work.pop() {
            for &i in &edge_tris[&e] {
                let t = self.triangles[i];
                let re = edge(t[0], t[1]);
                if edges.insert(re) {
                    work.push(re);
                }
            }
        }

        let mut out = Self { t_end: self.t_end, vertices: self.vertices.clone(), triangles: Vec::new() };
        let mut midpoints: HashMap<(usize, usize), usize> = HashMap::new();
        let mut sorted: Vec<(usize, usize)> = edges.into_iter().collect();
        sorted.sort_unstable();
        for e in &sorted {
            let m = mid(out.vertices[e.0], out.vertices[e.1]);
            midpoints.insert(*e, out.vertices.len());
            out.vertices.push(m);
        }
        for t in &self.triangles {
            out.bisect_into(*t, &midpoints);
        }
        Ok(out)
    }

    fn bisect_into(&mut self, t: [usize; 3], midpoints: &HashMap<(usize, usize), usize>) {
        let [a, b, c] = t;
        match midpoints.get(&edge(a, b)) {
            None => self.triangles.push(t),
            Some(&m) => {
                self.bisect_into([c, a, m], midpoints);
                self.bisect_into([b, c, m], midpoints);
            }
        }
    }

    pub fn refine_all(&self) -> Self {
        let all: Vec<usize> = (0..self.len()).collect();
        self.refine(&all).expect("all indices valid")
    }

    /// Whether every edge is shared by two triangles or lies on the boundary.
    pub fn is_conforming(&self) -> bool {
        let mut count: HashMap<(usize, usize), usize> = HashMap::new();
        for t in &self.triangles {
            for r in 0..3 {
                *count.entry(edge(t[r], t[(r + 1) % 3])).or_default() += 1;
            }
        }
        let on_boundary = |p: Point, q: Point| {
            (p[0] == 0.0 && q[0] == 0.0)
                || (p[0] == self.t_end && q[0] == self.t_end)
                || (p[1] == 0.0 && q[1] == 0.0)
                || (p[1] == 1.0 && q[1] == 1.0)
        };
        count.iter().all(|(&(i, j), &n)| match n {
            2 => true,
            1 => on_boundary(self.vertices[i], self.vertices[j]),
            _ => false,
        })
    }

    /// Vertices lying strictly inside an edge of some triangle.
    pub fn hanging_vertices(&self) -> usize {
        let used: HashSet<usize> = self.triangles.iter().flatten().copied().collect();
        let mut n = 0;
        for &v in &used {
            let p = self.vertices[v];
            for t in &self.triangles {
                for r in 0..3 {
                    let (a, b) = (t[r], t[(r + 1) % 3]);
                    if a == v || b == v {
                        continue;
                    }
                    let (pa, pb) = (self.vertices[a], self.vertices[b]);
                    let cross = (pb[0] - pa[0]) * (p[1] - pa[1]) - (pb[1] - pa[1]) * (p[0] - pa[0]);
                    let along = (p[0] - pa[0]) * (pb[0] - pa[0]) + (p[1] - pa[1]) * (pb[1] - pa[1]);
                    let len2 = dist(pa, pb).powi(2);
                    if cross.abs() < 1e-14 && along > 0.0 && along < len2 {
                        n += 1;
                    }
                }
            }
        }
        n
    }
}
