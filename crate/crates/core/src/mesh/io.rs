//! Plain-text mesh format.
//!
//! ```text
//! nvertices ntriangles
//! x y                               (one line per vertex)
//! v0 v1 v2 refedge generation       (one line per triangle, zero-based)
//! ```

use std::io::{BufRead, Write};

use super::{Mesh, MeshError, Triangle};

pub fn write_mesh_text<W: Write>(mesh: &Mesh, mut out: W) -> std::io::Result<()> {
    writeln!(out, "{} {}", mesh.vertices().len(), mesh.n_triangles())?;
    for v in mesh.vertices() {
        writeln!(out, "{:.17e} {:.17e}", v[0], v[1])?;
    }
    for t in mesh.triangles() {
        let [a, b, c] = t.vertices;
        writeln!(out, "{a} {b} {c} {} {}", t.refinement_edge, t.generation)?;
    }
    Ok(())
}

pub fn read_mesh_text<R: BufRead>(input: R) -> Result<Mesh, MeshError> {
    let mut lines = input.lines();
    let mut next = || -> Result<String, MeshError> {
        lines
            .next()
            .ok_or_else(|| MeshError::Parse("unexpected end of file".into()))?
            .map_err(MeshError::from)
    };
    fn fields<T: std::str::FromStr>(line: &str, n: usize) -> Result<Vec<T>, MeshError> {
        let v: Vec<T> = line
            .split_whitespace()
            .map(|s| s.parse::<T>())
            .collect::<Result<_, _>>()
            .map_err(|_| MeshError::Parse(format!("cannot parse line {line:?}")))?;
        if v.len() != n {
            return Err(MeshError::Parse(format!("expected {n} fields in {line:?}")));
        }
        Ok(v)
    }

    let header = fields::<usize>(&next()?, 2)?;
    let mut vertices = Vec::with_capacity(header[0]);
    for _ in 0..header[0] {
        let xy = fields::<f64>(&next()?, 2)?;
        vertices.push([xy[0], xy[1]]);
    }
    let mut triangles = Vec::with_capacity(header[1]);
    for _ in 0..header[1] {
        let f = fields::<usize>(&next()?, 5)?;
        let refinement_edge =
            u8::try_from(f[3]).map_err(|_| MeshError::Parse(format!("bad refinement edge {}", f[3])))?;
        triangles.push(Triangle {
            vertices: [f[0], f[1], f[2]],
            refinement_edge,
            generation: f[4] as u32,
        });
    }
    Mesh::new(vertices, triangles)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{bisect, Domain};

    #[test]
    fn round_trip() {
        let m = Mesh::build_initial(Domain::LShape);
        let m = bisect(&m, &[0, 3]).unwrap();
        let mut buf = Vec::new();
        write_mesh_text(&m, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with(&format!("{} {}\n", m.vertices().len(), m.n_triangles())));
        let back = read_mesh_text(&buf[..]).unwrap();
        assert_eq!(back.vertices(), m.vertices());
        assert_eq!(back.triangles(), m.triangles());
    }

    #[test]
    fn truncated_input() {
        let err = read_mesh_text("3 1\n0 0\n1 0\n".as_bytes()).unwrap_err();
        assert!(matches!(err, MeshError::Parse(_)));
    }
}
