//! STL (binary and ASCII) and Wavefront OBJ geometry ingestion.

use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use super::mesh::TriangleMesh;
use super::GeometryError;
use crate::Vec3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeshFormat {
    Stl,
    Obj,
}

impl MeshFormat {
    pub fn from_path(path: &Path) -> Option<Self> {
        path.extension()?.to_str()?.parse().ok()
    }
}

impl FromStr for MeshFormat {
    type Err = GeometryError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "stl" => Ok(Self::Stl),
            "obj" => Ok(Self::Obj),
            other => Err(GeometryError::Parse(format!("unknown mesh format '{other}'"))),
        }
    }
}

/// Reads a whole mesh from `reader`, merges coincident vertices and validates
/// the result (see [`TriangleMesh::new`]).
pub fn load_mesh<R: Read>(mut reader: R, format: MeshFormat) -> Result<TriangleMesh, GeometryError> {
    let mut bytes = Vec::new();
    reader.read_to_end(&mut bytes)?;
    let soup = match format {
        MeshFormat::Stl => parse_stl(&bytes)?,
        MeshFormat::Obj => parse_obj(&bytes)?,
    };
    TriangleMesh::from_soup(&soup)
}

/// Loads a mesh, taking the format from the file extension.
pub fn load_mesh_file(path: &Path) -> Result<TriangleMesh, GeometryError> {
    let format = MeshFormat::from_path(path).ok_or_else(|| {
        GeometryError::Parse(format!("cannot infer mesh format of {}", path.display()))
    })?;
    load_mesh(std::fs::File::open(path)?, format)
}

fn parse_stl(bytes: &[u8]) -> Result<Vec<[Vec3; 3]>, GeometryError> {
    if bytes.len() >= 84 {
        let n = u32::from_le_bytes(bytes[80..84].try_into().unwrap()) as usize;
        if bytes.len() == 84 + 50 * n {
            return Ok(parse_binary_stl(&bytes[84..], n));
        }
    }
    let head = bytes.iter().skip_while(|b| b.is_ascii_whitespace()).take(5);
    if head.copied().eq(*b"solid") {
        if let Ok(text) = std::str::from_utf8(bytes) {
            return parse_ascii_stl(text);
        }
    }
    if bytes.len() < 84 {
        return Err(GeometryError::Parse(format!(
            "STL too short: {} bytes, header needs 84",
            bytes.len()
        )));
    }
    let n = u32::from_le_bytes(bytes[80..84].try_into().unwrap()) as usize;
    Err(GeometryError::Parse(format!(
        "binary STL declares {n} facets ({} bytes) but has {} bytes",
        84 + 50 * n,
        bytes.len()
    )))
}

fn parse_binary_stl(body: &[u8], n: usize) -> Vec<[Vec3; 3]> {
    let f = |b: &[u8], i: usize| f32::from_le_bytes(b[4 * i..4 * i + 4].try_into().unwrap()) as f64;
    (0..n)
        .map(|k| {
            let rec = &body[50 * k..50 * k + 50];
            // floats 0..3 are the stored normal, which is recomputed
            [
                Vec3::new(f(rec, 3), f(rec, 4), f(rec, 5)),
                Vec3::new(f(rec, 6), f(rec, 7), f(rec, 8)),
                Vec3::new(f(rec, 9), f(rec, 10), f(rec, 11)),
            ]
        })
        .collect()
}

fn parse_ascii_stl(text: &str) -> Result<Vec<[Vec3; 3]>, GeometryError> {
    let mut soup = Vec::new();
    let mut loop_pts: Vec<Vec3> = Vec::new();
    let mut in_loop = false;
    let mut ended = false;
    for (lineno, line) in text.lines().enumerate() {
        let mut tok = line.split_whitespace();
        let err = |m: &str| GeometryError::Parse(format!("STL line {}: {m}", lineno + 1));
        match tok.next() {
            Some("outer") => {
                in_loop = true;
                loop_pts.clear();
            }
            Some("vertex") => {
                if !in_loop {
                    return Err(err("vertex outside a loop"));
                }
                let mut xyz = [0.0; 3];
                for c in &mut xyz {
                    *c = tok
                        .next()
                        .and_then(|t| t.parse().ok())
                        .ok_or_else(|| err("bad vertex coordinate"))?;
                }
                loop_pts.push(Vec3::from(xyz));
            }
            Some("endloop") => {
                if loop_pts.len() != 3 {
                    return Err(err(&format!("facet has {} vertices", loop_pts.len())));
                }
                soup.push([loop_pts[0], loop_pts[1], loop_pts[2]]);
                in_loop = false;
            }
            Some("endsolid") => {
                ended = true;
                break;
            }
            _ => {}
        }
    }
    if in_loop || !ended {
        return Err(GeometryError::Parse("ASCII STL ends before 'endsolid'".into()));
    }
    Ok(soup)
}

fn parse_obj(bytes: &[u8]) -> Result<Vec<[Vec3; 3]>, GeometryError> {
    let text = std::str::from_utf8(bytes)
        .map_err(|e| GeometryError::Parse(format!("OBJ is not UTF-8: {e}")))?;
    let mut verts: Vec<Vec3> = Vec::new();
    let mut soup = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let err = |m: String| GeometryError::Parse(format!("OBJ line {}: {m}", lineno + 1));
        let mut tok = line.split_whitespace();
        match tok.next() {
            Some("v") => {
                let c: Vec<f64> = tok
                    .map(|t| t.parse::<f64>())
                    .collect::<Result<_, _>>()
                    .map_err(|e| err(e.to_string()))?;
                if c.len() < 3 {
                    return Err(err(format!("vertex has {} coordinates", c.len())));
                }
                verts.push(Vec3::new(c[0], c[1], c[2]));
            }
            Some("f") => {
                let idx: Vec<usize> = tok
                    .map(|t| {
                        let i: i64 = t
                            .split('/')
                            .next()
                            .unwrap()
                            .parse()
                            .map_err(|e: std::num::ParseIntError| err(e.to_string()))?;
                        let n = verts.len() as i64;
                        let k = if i < 0 { n + i } else { i - 1 };
                        if k < 0 || k >= n {
                            return Err(err(format!("face index {i} out of range")));
                        }
                        Ok(k as usize)
                    })
                    .collect::<Result<_, _>>()?;
                if idx.len() < 3 {
                    return Err(err(format!("face has {} vertices", idx.len())));
                }
                for k in 1..idx.len() - 1 {
                    soup.push([verts[idx[0]], verts[idx[k]], verts[idx[k + 1]]]);
                }
            }
            _ => {}
        }
    }
    if soup.is_empty() {
        return Err(GeometryError::Parse("OBJ contains no faces".into()));
    }
    Ok(soup)
}

/// Writes a mesh as Wavefront OBJ.
pub fn write_obj<W: Write>(mesh: &TriangleMesh, mut w: W) -> std::io::Result<()> {
    for v in mesh.vertices() {
        writeln!(w, "v {:e} {:e} {:e}", v.x, v.y, v.z)?;
    }
    for t in mesh.triangles() {
        writeln!(w, "f {} {} {}", t[0] + 1, t[1] + 1, t[2] + 1)?;
    }
    Ok(())
}

/// Writes a mesh as binary STL (single precision).
pub fn write_stl<W: Write>(mesh: &TriangleMesh, mut w: W) -> std::io::Result<()> {
    w.write_all(&[0u8; 80])?;
    w.write_all(&(mesh.triangles().len() as u32).to_le_bytes())?;
    for (t, n) in mesh.normals().iter().enumerate() {
        for v in std::iter::once(*n).chain(mesh.corners(t)) {
            for c in v.iter() {
                w.write_all(&(*c as f32).to_le_bytes())?;
            }
        }
        w.write_all(&[0u8; 2])?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ascii_stl_round() {
        let m = TriangleMesh::cuboid(Vec3::new(1.0, 1.0, 1.0));
        let mut s = String::from("solid cube\n");
        for t in 0..12 {
            let n = m.normals()[t];
            s += &format!("facet normal {} {} {}\nouter loop\n", n.x, n.y, n.z);
            for v in m.corners(t) {
                s += &format!("vertex {} {} {}\n", v.x, v.y, v.z);
            }
            s += "endloop\nendfacet\n";
        }
        s += "endsolid cube\n";
        let back = load_mesh(s.as_bytes(), MeshFormat::Stl).unwrap();
        assert_eq!(back.vertices().len(), 8);
        assert!((back.signed_volume() - 1.0).abs() < 1e-12);

        let cut = &s[..s.len() / 2];
        assert!(matches!(
            load_mesh(cut.as_bytes(), MeshFormat::Stl),
            Err(GeometryError::Parse(_))
        ));
    }

    #[test]
    fn obj_polygons_and_negative_indices() {
        let text = "v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nv 0 0 1\nv 1 0 1\nv 1 1 1\nv 0 1 1\n\
                    f 1 4 3 2\nf 5 6 7 8\nf 1 2 6 5\nf 2 3 7 6\nf 3 4 8 7\nf -4 -8 -5 -1\n";
        let m = load_mesh(text.as_bytes(), MeshFormat::Obj).unwrap();
        assert_eq!(m.triangles().len(), 12);
        assert!((m.signed_volume() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn format_from_extension() {
        assert_eq!(MeshFormat::from_path(Path::new("a/b.STL")), Some(MeshFormat::Stl));
        assert_eq!(MeshFormat::from_path(Path::new("x.obj")), Some(MeshFormat::Obj));
        assert_eq!(MeshFormat::from_path(Path::new("x.ply")), None);
    }
}
