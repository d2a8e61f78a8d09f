//! Procedural test meshes: axis-aligned boxes and icospheres.

use crate::mesh::TriangleMesh;
use nalgebra::{Point3, Vector3};

/// Axis-aligned box spanning `[0, w] x [0, d] x [0, h]`, 12 triangles.
pub fn box_mesh(w: f64, d: f64, h: f64) -> TriangleMesh {
    let v = vec![
        Point3::new(0.0, 0.0, 0.0),
        Point3::new(w, 0.0, 0.0),
        Point3::new(w, d, 0.0),
        Point3::new(0.0, d, 0.0),
        Point3::new(0.0, 0.0, h),
        Point3::new(w, 0.0, h),
        Point3::new(w, d, h),
        Point3::new(0.0, d, h),
    ];
    let t = vec![
        [0, 2, 1],
        [0, 3, 2], // bottom
        [4, 5, 6],
        [4, 6, 7], // top
        [0, 1, 5],
        [0, 5, 4], // front
        [2, 3, 7],
        [2, 7, 6], // back
        [1, 2, 6],
        [1, 6, 5], // right
        [3, 0, 4],
        [3, 4, 7], // left
    ];
    TriangleMesh::new(v, t).expect("box mesh is valid")
}

/// Icosphere centered at the origin. At `subdivisions >= 1` the vertex set
/// contains all six axis poles, so the bounding box is exactly
/// `[-radius, radius]` on every axis.
pub fn icosphere(radius: f64, subdivisions: u32) -> TriangleMesh {
    let phi = (1.0 + 5.0_f64.sqrt()) / 2.0;
    let mut verts: Vec<Vector3<f64>> = vec![
        Vector3::new(-1.0, phi, 0.0),
        Vector3::new(1.0, phi, 0.0),
        Vector3::new(-1.0, -phi, 0.0),
        Vector3::new(1.0, -phi, 0.0),
        Vector3::new(0.0, -1.0, phi),
        Vector3::new(0.0, 1.0, phi),
        Vector3::new(0.0, -1.0, -phi),
        Vector3::new(0.0, 1.0, -phi),
        Vector3::new(phi, 0.0, -1.0),
        Vector3::new(phi, 0.0, 1.0),
        Vector3::new(-phi, 0.0, -1.0),
        Vector3::new(-phi, 0.0, 1.0),
    ];
    for v in &mut verts {
        v.normalize_mut();
    }
    let mut faces: Vec<[usize; 3]> = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];

    for _ in 0..subdivisions {
        let mut midpoints = std::collections::HashMap::new();
        let mut next = Vec::with_capacity(faces.len() * 4);
        let mut midpoint = |a: usize, b: usize, verts: &mut Vec<Vector3<f64>>| -> usize {
            let key = (a.min(b), a.max(b));
            *midpoints.entry(key).or_insert_with(|| {
                let m = ((verts[a] + verts[b]) / 2.0).normalize();
                verts.push(m);
                verts.len() - 1
            })
        };
        for [a, b, c] in faces {
            let ab = midpoint(a, b, &mut verts);
            let bc = midpoint(b, c, &mut verts);
            let ca = midpoint(c, a, &mut verts);
            next.push([a, ab, ca]);
            next.push([ab, b, bc]);
            next.push([ab, bc, ca]);
            next.push([ca, bc, c]);
        }
        faces = next;
    }

    let points = verts
        .into_iter()
        .map(|v| Point3::from(v * radius))
        .collect();
    TriangleMesh::new(points, faces).expect("icosphere mesh is valid")
}
