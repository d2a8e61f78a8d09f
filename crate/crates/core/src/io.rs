//! Mesh parsing and geometry output.
//!
//! Input: an ASCII mesh subset (`v x y z` vertex lines, `f i j k ...`
//! face lines with fan triangulation) plus binary and ASCII STL. Output:
//! the same ASCII format with deduplicated vertices and deterministic
//! ordering.

use crate::fold::SlabSet;
use crate::mesh::{MeshError, TriangleMesh};
use nalgebra::Point3;
use std::io::Write;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("parse error at line {line}: {message}")]
    ParseError { line: usize, message: String },
    #[error("unsupported feature at line {line}: {feature}")]
    UnsupportedFeature { line: usize, feature: String },
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn parse_err(line: usize, message: impl Into<String>) -> IoError {
    IoError::ParseError {
        line,
        message: message.into(),
    }
}

/// Parses OBJ-style text or STL (binary or ASCII), detected from the
/// content.
pub fn parse_mesh(bytes: &[u8]) -> Result<TriangleMesh, IoError> {
    if looks_like_binary_stl(bytes) {
        return parse_binary_stl(bytes);
    }
    let text = std::str::from_utf8(bytes)
        .map_err(|_| parse_err(0, "input is neither valid UTF-8 text nor binary STL"))?;
    if text.trim_start().starts_with("solid") && text.contains("facet") {
        parse_ascii_stl(text)
    } else {
        parse_obj(text)
    }
}

pub fn parse_mesh_file(path: &Path) -> Result<TriangleMesh, IoError> {
    let bytes = std::fs::read(path)?;
    parse_mesh(&bytes)
}

fn looks_like_binary_stl(bytes: &[u8]) -> bool {
    if bytes.len() < 84 {
        return false;
    }
    let count = u32::from_le_bytes([bytes[80], bytes[81], bytes[82], bytes[83]]) as usize;
    if bytes.len() == 84 + count * 50 {
        // An ASCII file of exactly this size is possible but would then
        // also start with "solid" and contain "facet".
        let head = String::from_utf8_lossy(&bytes[..80.min(bytes.len())]);
        return !(head.trim_start().starts_with("solid")
            && String::from_utf8_lossy(bytes).contains("facet"));
    }
    false
}

fn parse_obj(text: &str) -> Result<TriangleMesh, IoError> {
    let mut vertices: Vec<Point3<f64>> = Vec::new();
    let mut triangles: Vec<[usize; 3]> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut tokens = line.split_whitespace();
        let keyword = tokens.next().unwrap();
        match keyword {
            "v" => {
                let coords: Vec<&str> = tokens.collect();
                if coords.len() < 3 {
                    return Err(parse_err(
                        line_no,
                        format!("vertex needs 3 coordinates, got {}", coords.len()),
                    ));
                }
                let mut p = [0.0f64; 3];
                for k in 0..3 {
                    p[k] = coords[k].parse().map_err(|_| {
                        parse_err(line_no, format!("bad coordinate {:?}", coords[k]))
                    })?;
                    if !p[k].is_finite() {
                        return Err(parse_err(line_no, "non-finite coordinate"));
                    }
                }
                vertices.push(Point3::new(p[0], p[1], p[2]));
            }
            "f" => {
                let mut ids = Vec::new();
                for tok in tokens {
                    let first = tok.split('/').next().unwrap_or("");
                    let i: i64 = first
                        .parse()
                        .map_err(|_| parse_err(line_no, format!("bad face index {tok:?}")))?;
                    if i < 1 {
                        return Err(parse_err(line_no, "face indices must be positive 1-based"));
                    }
                    let i = (i - 1) as usize;
                    if i >= vertices.len() {
                        return Err(parse_err(line_no, format!("face index {} out of range", i + 1)));
                    }
                    ids.push(i);
                }
                if ids.len() < 3 {
                    return Err(parse_err(line_no, "face needs at least 3 vertices"));
                }
                for k in 1..ids.len() - 1 {
                    triangles.push([ids[0], ids[k], ids[k + 1]]);
                }
            }
            // Irrelevant but harmless attributes.
            "vn" | "vt" | "s" | "g" | "o" | "usemtl" | "mtllib" => {}
            // Free-form geometry is out of scope.
            "vp" | "curv" | "curv2" | "surf" | "cstype" | "deg" => {
                return Err(IoError::UnsupportedFeature {
                    line: line_no,
                    feature: keyword.to_string(),
                })
            }
            other => {
                return Err(parse_err(line_no, format!("unknown directive {other:?}")));
            }
        }
    }
    Ok(TriangleMesh::new(vertices, triangles)?)
}

fn parse_ascii_stl(text: &str) -> Result<TriangleMesh, IoError> {
    let mut verts: Vec<Point3<f64>> = Vec::new();
    let mut index: std::collections::HashMap<[u64; 3], usize> = std::collections::HashMap::new();
    let mut triangles: Vec<[usize; 3]> = Vec::new();
    let mut current: Vec<usize> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.starts_with("vertex") {
            let coords: Vec<&str> = line.split_whitespace().skip(1).collect();
            if coords.len() != 3 {
                return Err(parse_err(line_no, "vertex needs 3 coordinates"));
            }
            let mut p = [0.0f64; 3];
            for k in 0..3 {
                p[k] = coords[k]
                    .parse()
                    .map_err(|_| parse_err(line_no, format!("bad coordinate {:?}", coords[k])))?;
                if !p[k].is_finite() {
                    return Err(parse_err(line_no, "non-finite coordinate"));
                }
            }
            let key = [p[0].to_bits(), p[1].to_bits(), p[2].to_bits()];
            let id = *index.entry(key).or_insert_with(|| {
                verts.push(Point3::new(p[0], p[1], p[2]));
                verts.len() - 1
            });
            current.push(id);
        } else if line.starts_with("endfacet") {
            if current.len() != 3 {
                return Err(parse_err(line_no, "facet must have exactly 3 vertices"));
            }
            triangles.push([current[0], current[1], current[2]]);
            current.clear();
        }
    }
    Ok(TriangleMesh::new(verts, triangles)?)
}

fn parse_binary_stl(bytes: &[u8]) -> Result<TriangleMesh, IoError> {
    let count = u32::from_le_bytes([bytes[80], bytes[81], bytes[82], bytes[83]]) as usize;
    let mut verts: Vec<Point3<f64>> = Vec::new();
    let mut index: std::collections::HashMap<[u64; 3], usize> = std::collections::HashMap::new();
    let mut triangles: Vec<[usize; 3]> = Vec::with_capacity(count.min(1 << 20));
    let mut offset = 84;
    for _ in 0..count {
        let mut tri = [0usize; 3];
        offset += 12; // skip normal
        for t in &mut tri {
            let mut p = [0.0f64; 3];
            for coord in &mut p {
                let raw = f32::from_le_bytes([
                    bytes[offset],
                    bytes[offset + 1],
                    bytes[offset + 2],
                    bytes[offset + 3],
                ]);
                if !raw.is_finite() {
                    return Err(parse_err(0, "non-finite coordinate in binary STL"));
                }
                *coord = raw as f64;
                offset += 4;
            }
            let key = [p[0].to_bits(), p[1].to_bits(), p[2].to_bits()];
            *t = *index.entry(key).or_insert_with(|| {
                verts.push(Point3::new(p[0], p[1], p[2]));
                verts.len() - 1
            });
        }
        triangles.push(tri);
        offset += 2; // attribute byte count
    }
    Ok(TriangleMesh::new(verts, triangles)?)
}

/// Triangle soup of slab boxes and connector quads at one configuration.
#[derive(Debug, Clone)]
pub struct GeometrySnapshot {
    pub triangles: Vec<[Point3<f64>; 3]>,
    pub slab_count: usize,
    pub connector_count: usize,
}

impl GeometrySnapshot {
    pub fn empty() -> Self {
        GeometrySnapshot {
            triangles: Vec::new(),
            slab_count: 0,
            connector_count: 0,
        }
    }

    pub fn bbox(&self) -> Option<(Point3<f64>, Point3<f64>)> {
        let mut min = Point3::new(f64::INFINITY, f64::INFINITY, f64::INFINITY);
        let mut max = Point3::new(f64::NEG_INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
        if self.triangles.is_empty() {
            return None;
        }
        for tri in &self.triangles {
            for p in tri {
                for k in 0..3 {
                    min[k] = min[k].min(p[k]);
                    max[k] = max[k].max(p[k]);
                }
            }
        }
        Some((min, max))
    }
}

/// 12 triangles per slab, 2 per connector.
pub fn snapshot_from_slabs(slabs: &SlabSet) -> GeometrySnapshot {
    let mut triangles = Vec::with_capacity(slabs.slabs.len() * 12 + slabs.connectors.len() * 2);
    // Quads per box face, indexed into OrientedBox::corners bit order
    // (bit0 = +x, bit1 = +y, bit2 = +z).
    const FACES: [[usize; 4]; 6] = [
        [0, 2, 3, 1], // -z
        [4, 5, 7, 6], // +z
        [0, 1, 5, 4], // -y
        [2, 6, 7, 3], // +y
        [0, 4, 6, 2], // -x
        [1, 3, 7, 5], // +x
    ];
    for slab in &slabs.slabs {
        let c = slab.corners();
        for q in FACES {
            triangles.push([c[q[0]], c[q[1]], c[q[2]]]);
            triangles.push([c[q[0]], c[q[2]], c[q[3]]]);
        }
    }
    for conn in &slabs.connectors {
        let [a, b, c, d] = conn.corners;
        triangles.push([a, b, c]);
        triangles.push([a, c, d]);
    }
    GeometrySnapshot {
        triangles,
        slab_count: slabs.slabs.len(),
        connector_count: slabs.connectors.len(),
    }
}

fn fmt_coord(x: f64) -> String {
    let x = if x == 0.0 { 0.0 } else { x }; // normalize -0.0
    format!("{x:.9}")
}

/// Writes the snapshot as ASCII mesh text: vertices deduplicated within
/// 1e-9, first-use ordering.
pub fn write_geometry<W: Write>(snapshot: &GeometrySnapshot, mut out: W) -> Result<(), IoError> {
    let quant = |x: f64| -> i64 { (x * 1e9).round() as i64 };
    let mut index: std::collections::HashMap<[i64; 3], usize> = std::collections::HashMap::new();
    let mut verts: Vec<Point3<f64>> = Vec::new();
    let mut faces: Vec<[usize; 3]> = Vec::with_capacity(snapshot.triangles.len());
    for tri in &snapshot.triangles {
        let mut ids = [0usize; 3];
        for (k, p) in tri.iter().enumerate() {
            let key = [quant(p.x), quant(p.y), quant(p.z)];
            ids[k] = *index.entry(key).or_insert_with(|| {
                verts.push(*p);
                verts.len() - 1
            });
        }
        faces.push(ids);
    }
    for v in &verts {
        writeln!(out, "v {} {} {}", fmt_coord(v.x), fmt_coord(v.y), fmt_coord(v.z))?;
    }
    for f in &faces {
        writeln!(out, "f {} {} {}", f[0] + 1, f[1] + 1, f[2] + 1)?;
    }
    Ok(())
}

pub fn write_geometry_file(snapshot: &GeometrySnapshot, path: &Path) -> Result<(), IoError> {
    let mut buf = Vec::new();
    write_geometry(snapshot, &mut buf)?;
    std::fs::write(path, buf)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fold::OrientedBox;
    use nalgebra::Vector3;

    const CUBE_OBJ: &str = "\
v 0 0 0
v 1 0 0
v 1 1 0
v 0 1 0
v 0 0 1
v 1 0 1
v 1 1 1
v 0 1 1
f 1 3 2
f 1 4 3
f 5 6 7
f 5 7 8
f 1 2 6
f 1 6 5
f 2 3 7
f 2 7 6
f 3 4 8
f 3 8 7
f 4 1 5
f 4 5 8
";

    #[test]
    fn cube_obj_parses() {
        let mesh = parse_mesh(CUBE_OBJ.as_bytes()).unwrap();
        assert_eq!(mesh.triangles().len(), 12);
        assert_eq!(mesh.extents(), [1.0, 1.0, 1.0]);
    }

    #[test]
    fn quad_faces_fan_split() {
        let obj = "v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 1\nf 1 2 3 4\n";
        let mesh = parse_mesh(obj.as_bytes()).unwrap();
        assert_eq!(mesh.triangles().len(), 2);
    }

    #[test]
    fn missing_coordinate_is_a_parse_error() {
        let obj = "v 0 0 0\nv 1 2\nv 1 1 0\nf 1 2 3\n";
        match parse_mesh(obj.as_bytes()).unwrap_err() {
            IoError::ParseError { line, .. } => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn freeform_geometry_is_unsupported() {
        let obj = "v 0 0 0\ncurv 0 1 2 3\n";
        match parse_mesh(obj.as_bytes()).unwrap_err() {
            IoError::UnsupportedFeature { line, feature } => {
                assert_eq!(line, 2);
                assert_eq!(feature, "curv");
            }
            other => panic!("expected unsupported feature, got {other:?}"),
        }
    }

    #[test]
    fn ascii_stl_parses() {
        let stl = "\
solid box
facet normal 0 0 1
outer loop
vertex 0 0 0
vertex 1 0 0
vertex 0 1 0
endloop
endfacet
facet normal 0 0 1
vertex 0 0 0
vertex 1 0 0
vertex 0 0 1
endfacet
endsolid box
";
        let mesh = parse_mesh(stl.as_bytes()).unwrap();
        assert_eq!(mesh.triangles().len(), 2);
        assert_eq!(mesh.vertices().len(), 4, "shared vertices are welded");
    }

    #[test]
    fn binary_stl_round_trip() {
        // Two triangles, hand-encoded.
        let tris: [[[f32; 3]; 3]; 2] = [
            [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]],
            [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 1.0]],
        ];
        let mut bytes = vec![0u8; 80];
        bytes.extend_from_slice(&(tris.len() as u32).to_le_bytes());
        for tri in &tris {
            bytes.extend_from_slice(&[0u8; 12]);
            for v in tri {
                for c in v {
                    bytes.extend_from_slice(&c.to_le_bytes());
                }
            }
            bytes.extend_from_slice(&[0u8; 2]);
        }
        let mesh = parse_mesh(&bytes).unwrap();
        assert_eq!(mesh.triangles().len(), 2);
        assert_eq!(mesh.vertices().len(), 4);
    }

    #[test]
    fn one_slab_writes_eight_vertices_twelve_triangles() {
        let slabs = SlabSet {
            slabs: vec![OrientedBox {
                center: Point3::origin(),
                axes: [Vector3::x(), Vector3::y(), Vector3::z()],
                half: [0.4, 0.4, 0.05],
            }],
            connectors: vec![],
            edge_length: 1.0,
            thickness: 0.1,
        };
        let snapshot = snapshot_from_slabs(&slabs);
        assert_eq!(snapshot.triangles.len(), 12);
        let mut buf = Vec::new();
        write_geometry(&snapshot, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().filter(|l| l.starts_with("v ")).count(), 8);
        assert_eq!(text.lines().filter(|l| l.starts_with("f ")).count(), 12);
    }

    #[test]
    fn empty_snapshot_is_a_valid_file() {
        let mut buf = Vec::new();
        write_geometry(&GeometrySnapshot::empty(), &mut buf).unwrap();
        assert!(buf.is_empty());
    }

    #[test]
    fn write_then_parse_preserves_positions() {
        let slabs = SlabSet {
            slabs: vec![OrientedBox {
                center: Point3::new(0.123456789, -2.0, 7.25),
                axes: [Vector3::x(), Vector3::y(), Vector3::z()],
                half: [0.35, 0.35, 0.05],
            }],
            connectors: vec![],
            edge_length: 1.0,
            thickness: 0.1,
        };
        let snapshot = snapshot_from_slabs(&slabs);
        let mut buf = Vec::new();
        write_geometry(&snapshot, &mut buf).unwrap();
        let mesh = parse_mesh(&buf).unwrap();
        let (lo, hi) = snapshot.bbox().unwrap();
        for k in 0..3 {
            assert!((mesh.bbox_min()[k] - lo[k]).abs() < 1e-9);
            assert!((mesh.bbox_max()[k] - hi[k]).abs() < 1e-9);
        }
    }
}
