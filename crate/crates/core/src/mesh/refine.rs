use std::collections::HashMap;

use super::{Mesh, MeshError, Point, Triangle};

/// Newest-vertex bisection of the marked triangles followed by closure.
///
/// A bisected triangle keeps its id for its first child; the second child is
/// appended. Triangles that are never touched keep their id, and existing
/// vertices keep theirs, so the output mesh extends the input numbering.
pub fn bisect(mesh: &Mesh, marked: &[usize]) -> Result<Mesh, MeshError> {
    let mut flagged = vec![false; mesh.n_triangles()];
    for &t in marked {
        *flagged
            .get_mut(t)
            .ok_or(MeshError::UnknownTriangle(t))? = true;
    }
    if !flagged.iter().any(|&f| f) {
        return Ok(mesh.clone());
    }

    let mut vertices: Vec<Point> = mesh.vertices().to_vec();
    let mut triangles: Vec<Triangle> = mesh.triangles().to_vec();
    let mut midpoints: HashMap<[usize; 2], usize> = HashMap::new();

    let cap = (mesh.max_generation() as usize + 2) * mesh.n_triangles();
    let mut passes = 0;
    loop {
        let mut split_any = false;
        let n = triangles.len();
        for t in 0..n {
            let tri = triangles[t];
            let hanging = (0..3).any(|i| midpoints.contains_key(&key(tri.edge_vertices(i))));
            if !(flagged[t] || hanging) {
                continue;
            }
            let [a, b] = tri.edge_vertices(tri.refinement_edge as usize);
            let m = *midpoints.entry(key([a, b])).or_insert_with(|| {
                let (pa, pb) = (vertices[a], vertices[b]);
                vertices.push([0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])]);
                vertices.len() - 1
            });
            let (left, right) = split(tri, m);
            triangles[t] = left;
            triangles.push(right);
            flagged[t] = false;
            flagged.push(false);
            split_any = true;
        }
        if !split_any {
            break;
        }
        passes += 1;
        if passes > cap {
            return Err(MeshError::ClosureDiverged(passes));
        }
    }

    Mesh::new(vertices, triangles)
}

fn key([a, b]: [usize; 2]) -> [usize; 2] {
    [a.min(b), a.max(b)]
}

/// Children of `tri` after bisecting its refinement edge at vertex `m`.
/// The midpoint becomes local vertex 0 of both children.
fn split(tri: Triangle, m: usize) -> (Triangle, Triangle) {
    let r = tri.refinement_edge as usize;
    let newest = tri.vertices[r];
    let a = tri.vertices[(r + 1) % 3];
    let b = tri.vertices[(r + 2) % 3];
    let child = |vertices| Triangle {
        vertices,
        refinement_edge: 0,
        generation: tri.generation + 1,
    };
    (child([m, newest, a]), child([m, b, newest]))
}
