//! Conforming triangular meshes with newest-vertex bisection.
//!
//! Triangles are stored counter-clockwise. Local edge `i` of a triangle is the
//! edge opposite its local vertex `i`, i.e. the segment from vertex `i + 1` to
//! vertex `i + 2` (indices mod 3). The refinement edge of a triangle is the
//! local edge opposite its newest vertex.

mod io;
mod refine;

use std::collections::HashMap;

pub use io::{read_mesh_text, write_mesh_text};
pub use refine::bisect;

use thiserror::Error;

/// Relative area threshold below which a triangle counts as degenerate.
pub const DEGENERACY_TOL: f64 = 1e-14;

#[derive(Debug, Error)]
pub enum MeshError {
    #[error("vertex {0} has non-finite coordinates")]
    NonFiniteVertex(usize),
    #[error("triangle {0} references vertex {1} which does not exist")]
    VertexOutOfRange(usize, usize),
    #[error("triangle {0} repeats a vertex")]
    RepeatedVertex(usize),
    #[error("triangle {triangle} is degenerate or clockwise (signed area {area:e})")]
    Degenerate { triangle: usize, area: f64 },
    #[error("refinement edge index {1} of triangle {0} is not in 0..3")]
    BadRefinementEdge(usize, u8),
    #[error("edge ({0}, {1}) is shared by more than two triangles")]
    NonManifoldEdge(usize, usize),
    #[error("closure did not terminate after {0} passes; refinement-edge labels are incompatible")]
    ClosureDiverged(usize),
    #[error("triangle id {0} is out of range")]
    UnknownTriangle(usize),
    #[error("mesh text: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Point = [f64; 2];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Triangle {
    pub vertices: [usize; 3],
    /// Local edge opposite the newest vertex.
    pub refinement_edge: u8,
    pub generation: u32,
}

impl Triangle {
    /// Global endpoints of local edge `i`.
    pub fn edge_vertices(&self, i: usize) -> [usize; 2] {
        [self.vertices[(i + 1) % 3], self.vertices[(i + 2) % 3]]
    }
}

/// One side of an edge: the triangle and the local index of the edge in it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EdgeSide {
    pub triangle: usize,
    pub local: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    /// Endpoints in ascending global-index order.
    pub vertices: [usize; 2],
    pub first: EdgeSide,
    pub second: Option<EdgeSide>,
}

impl Edge {
    pub fn is_boundary(&self) -> bool {
        self.second.is_none()
    }

    pub fn sides(&self) -> impl Iterator<Item = EdgeSide> + '_ {
        std::iter::once(self.first).chain(self.second)
    }
}

/// Cached per-triangle geometry.
#[derive(Debug, Clone, PartialEq)]
pub struct TriangleGeometry {
    pub area: f64,
    /// Diameter h_τ: the longest edge.
    pub diameter: f64,
    pub centroid: Point,
    /// Length of local edge `i`.
    pub edge_lengths: [f64; 3],
    /// Outward unit normal of local edge `i`.
    pub normals: [Point; 3],
}

impl TriangleGeometry {
    pub fn from_points(p: &[Point; 3]) -> TriangleGeometry {
        let area = signed_area(p);
        let mut edge_lengths = [0.0; 3];
        let mut normals = [[0.0; 2]; 3];
        for i in 0..3 {
            let a = p[(i + 1) % 3];
            let b = p[(i + 2) % 3];
            let (tx, ty) = (b[0] - a[0], b[1] - a[1]);
            let len = tx.hypot(ty);
            edge_lengths[i] = len;
            normals[i] = [ty / len, -tx / len];
        }
        let diameter = edge_lengths.iter().cloned().fold(0.0, f64::max);
        let centroid = [
            (p[0][0] + p[1][0] + p[2][0]) / 3.0,
            (p[0][1] + p[1][1] + p[2][1]) / 3.0,
        ];
        TriangleGeometry {
            area,
            diameter,
            centroid,
            edge_lengths,
            normals,
        }
    }

    pub fn is_degenerate(&self) -> bool {
        !(self.area > DEGENERACY_TOL * self.diameter * self.diameter)
    }
}

pub fn signed_area(p: &[Point; 3]) -> f64 {
    0.5 * ((p[1][0] - p[0][0]) * (p[2][1] - p[0][1]) - (p[2][0] - p[0][0]) * (p[1][1] - p[0][1]))
}

/// Built-in computational domains.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Domain {
    /// (0,1)²
    UnitSquare,
    /// (-1,1)² minus (0,1)×(-1,0), reentrant corner at the origin.
    LShape,
}

impl Domain {
    pub fn area(self) -> f64 {
        match self {
            Domain::UnitSquare => 1.0,
            Domain::LShape => 3.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Mesh {
    vertices: Vec<Point>,
    triangles: Vec<Triangle>,
    edges: Vec<Edge>,
    triangle_edges: Vec<[usize; 3]>,
    geometry: Vec<TriangleGeometry>,
}

impl Mesh {
    /// Builds edge topology and the geometry cache, validating every triangle.
    pub fn new(vertices: Vec<Point>, triangles: Vec<Triangle>) -> Result<Mesh, MeshError> {
        for (i, v) in vertices.iter().enumerate() {
            if !v[0].is_finite() || !v[1].is_finite() {
                return Err(MeshError::NonFiniteVertex(i));
            }
        }
        let mut geometry = Vec::with_capacity(triangles.len());
        for (t, tri) in triangles.iter().enumerate() {
            for &v in &tri.vertices {
                if v >= vertices.len() {
                    return Err(MeshError::VertexOutOfRange(t, v));
                }
            }
            let [a, b, c] = tri.vertices;
            if a == b || b == c || a == c {
                return Err(MeshError::RepeatedVertex(t));
            }
            if tri.refinement_edge > 2 {
                return Err(MeshError::BadRefinementEdge(t, tri.refinement_edge));
            }
            let g = TriangleGeometry::from_points(&[vertices[a], vertices[b], vertices[c]]);
            if g.is_degenerate() {
                return Err(MeshError::Degenerate {
                    triangle: t,
                    area: g.area,
                });
            }
            geometry.push(g);
        }

        let mut lookup: HashMap<[usize; 2], usize> = HashMap::with_capacity(triangles.len() * 2);
        let mut edges: Vec<Edge> = Vec::with_capacity(triangles.len() * 2);
        let mut triangle_edges = Vec::with_capacity(triangles.len());
        for (t, tri) in triangles.iter().enumerate() {
            let mut ids = [0; 3];
            for (local, id) in ids.iter_mut().enumerate() {
                let [a, b] = tri.edge_vertices(local);
                let key = [a.min(b), a.max(b)];
                let side = EdgeSide { triangle: t, local };
                *id = match lookup.get(&key) {
                    Some(&e) => {
                        if edges[e].second.is_some() {
                            return Err(MeshError::NonManifoldEdge(key[0], key[1]));
                        }
                        edges[e].second = Some(side);
                        e
                    }
                    None => {
                        let e = edges.len();
                        edges.push(Edge {
                            vertices: key,
                            first: side,
                            second: None,
                        });
                        lookup.insert(key, e);
                        e
                    }
                };
            }
            triangle_edges.push(ids);
        }

        Ok(Mesh {
            vertices,
            triangles,
            edges,
            triangle_edges,
            geometry,
        })
    }

    /// Coarse mesh of a built-in domain. Every triangle is a right isosceles
    /// triangle whose refinement edge is its hypotenuse.
    pub fn build_initial(domain: Domain) -> Mesh {
        let (vertices, corners): (Vec<Point>, Vec<[usize; 3]>) = match domain {
            Domain::UnitSquare => (
                vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]],
                vec![[0, 1, 2], [0, 2, 3]],
            ),
            // 0:(-1,-1) 1:(0,-1) 2:(-1,0) 3:(0,0) 4:(1,0) 5:(-1,1) 6:(0,1) 7:(1,1)
            // Every square diagonal runs through the reentrant corner.
            Domain::LShape => (
                vec![
                    [-1.0, -1.0],
                    [0.0, -1.0],
                    [-1.0, 0.0],
                    [0.0, 0.0],
                    [1.0, 0.0],
                    [-1.0, 1.0],
                    [0.0, 1.0],
                    [1.0, 1.0],
                ],
                vec![
                    [0, 1, 3],
                    [0, 3, 2],
                    [2, 3, 5],
                    [3, 6, 5],
                    [3, 4, 7],
                    [3, 7, 6],
                ],
            ),
        };
        let triangles = corners
            .into_iter()
            .map(|v| Triangle {
                vertices: v,
                refinement_edge: longest_edge(&vertices, v),
                generation: 0,
            })
            .collect();
        Mesh::new(vertices, triangles).expect("built-in coarse mesh is valid")
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[Triangle] {
        &self.triangles
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn n_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    /// Global edge ids of the three local edges of triangle `t`.
    pub fn triangle_edges(&self, t: usize) -> [usize; 3] {
        self.triangle_edges[t]
    }

    pub fn geometry(&self, t: usize) -> Result<&TriangleGeometry, MeshError> {
        self.geometry.get(t).ok_or(MeshError::UnknownTriangle(t))
    }

    /// Geometry of a triangle id known to be valid.
    pub fn geom(&self, t: usize) -> &TriangleGeometry {
        &self.geometry[t]
    }

    pub fn triangle_points(&self, t: usize) -> [Point; 3] {
        let v = self.triangles[t].vertices;
        [self.vertices[v[0]], self.vertices[v[1]], self.vertices[v[2]]]
    }

    pub fn edge_points(&self, e: usize) -> [Point; 2] {
        let [a, b] = self.edges[e].vertices;
        [self.vertices[a], self.vertices[b]]
    }

    pub fn edge_length(&self, e: usize) -> f64 {
        let [a, b] = self.edge_points(e);
        (b[0] - a[0]).hypot(b[1] - a[1])
    }

    /// Outward unit normal of edge `e` as seen from the given side.
    pub fn outward_normal(&self, side: EdgeSide) -> Point {
        self.geometry[side.triangle].normals[side.local]
    }

    pub fn total_area(&self) -> f64 {
        self.geometry.iter().map(|g| g.area).sum()
    }

    pub fn max_generation(&self) -> u32 {
        self.triangles.iter().map(|t| t.generation).max().unwrap_or(0)
    }

    /// Smallest interior angle over all triangles, in radians.
    pub fn min_angle(&self) -> f64 {
        (0..self.n_triangles())
            .map(|t| {
                let p = self.triangle_points(t);
                (0..3)
                    .map(|i| {
                        let o = p[i];
                        let a = p[(i + 1) % 3];
                        let b = p[(i + 2) % 3];
                        let u = [a[0] - o[0], a[1] - o[1]];
                        let v = [b[0] - o[0], b[1] - o[1]];
                        let cross = u[0] * v[1] - u[1] * v[0];
                        let dot = u[0] * v[0] + u[1] * v[1];
                        cross.abs().atan2(dot)
                    })
                    .fold(f64::INFINITY, f64::min)
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// Number of edges that have a mesh vertex strictly inside them.
    /// Zero for a conforming mesh.
    pub fn hanging_node_count(&self) -> usize {
        let mut neighbours: Vec<Vec<usize>> = vec![Vec::new(); self.vertices.len()];
        for e in &self.edges {
            let [a, b] = e.vertices;
            neighbours[a].push(b);
            neighbours[b].push(a);
        }
        self.edges
            .iter()
            .filter(|e| {
                let [a, b] = e.vertices;
                let (pa, pb) = (self.vertices[a], self.vertices[b]);
                let len2 = (pb[0] - pa[0]).powi(2) + (pb[1] - pa[1]).powi(2);
                neighbours[a].iter().filter(|m| neighbours[b].contains(m)).any(|&m| {
                    let pm = self.vertices[m];
                    let u = [pm[0] - pa[0], pm[1] - pa[1]];
                    let v = [pb[0] - pa[0], pb[1] - pa[1]];
                    let cross = u[0] * v[1] - u[1] * v[0];
                    let t = (u[0] * v[0] + u[1] * v[1]) / len2;
                    cross.abs() <= 1e-12 * len2 && t > 0.0 && t < 1.0
                })
            })
            .count()
    }
}

/// Index of the longest local edge; ties go to the smallest opposite vertex id.
fn longest_edge(vertices: &[Point], tri: [usize; 3]) -> u8 {
    let len = |i: usize| {
        let a = vertices[tri[(i + 1) % 3]];
        let b = vertices[tri[(i + 2) % 3]];
        (b[0] - a[0]).hypot(b[1] - a[1])
    };
    let longest = (0..3).map(len).fold(0.0, f64::max);
    (0..3)
        .filter(|&i| len(i) >= longest * (1.0 - 1e-12))
        .min_by_key(|&i| tri[i])
        .unwrap() as u8
}
