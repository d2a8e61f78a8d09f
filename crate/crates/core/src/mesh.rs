//! Input triangle meshes.

use nalgebra::Point3;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum MeshError {
    #[error("mesh has no triangles")]
    Empty,
    #[error("triangle {0} references vertex {1} which is out of range")]
    IndexOutOfRange(usize, usize),
    #[error("mesh bounding box is degenerate along axis {0}")]
    DegenerateBbox(usize),
}

/// A triangle surface in world units. Zero-area triangles are dropped at
/// construction; watertightness is not required.
#[derive(Debug, Clone)]
pub struct TriangleMesh {
    vertices: Vec<Point3<f64>>,
    triangles: Vec<[usize; 3]>,
    bbox_min: Point3<f64>,
    bbox_max: Point3<f64>,
}

impl TriangleMesh {
    pub fn new(
        vertices: Vec<Point3<f64>>,
        triangles: Vec<[usize; 3]>,
    ) -> Result<Self, MeshError> {
        for (ti, tri) in triangles.iter().enumerate() {
            for &v in tri {
                if v >= vertices.len() {
                    return Err(MeshError::IndexOutOfRange(ti, v));
                }
            }
        }
        let triangles: Vec<[usize; 3]> = triangles
            .into_iter()
            .filter(|t| {
                let [a, b, c] = *t;
                let ab = vertices[b] - vertices[a];
                let ac = vertices[c] - vertices[a];
                ab.cross(&ac).norm_squared() > 0.0
            })
            .collect();
        if triangles.is_empty() {
            return Err(MeshError::Empty);
        }

        let mut min = Point3::new(f64::INFINITY, f64::INFINITY, f64::INFINITY);
        let mut max = Point3::new(f64::NEG_INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
        for tri in &triangles {
            for &v in tri {
                let p = vertices[v];
                for k in 0..3 {
                    min[k] = min[k].min(p[k]);
                    max[k] = max[k].max(p[k]);
                }
            }
        }
        for k in 0..3 {
            if !(max[k] - min[k] > 0.0) {
                return Err(MeshError::DegenerateBbox(k));
            }
        }
        Ok(Self {
            vertices,
            triangles,
            bbox_min: min,
            bbox_max: max,
        })
    }

    pub fn vertices(&self) -> &[Point3<f64>] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn triangle_points(&self, i: usize) -> [Point3<f64>; 3] {
        let [a, b, c] = self.triangles[i];
        [self.vertices[a], self.vertices[b], self.vertices[c]]
    }

    pub fn bbox_min(&self) -> Point3<f64> {
        self.bbox_min
    }

    pub fn bbox_max(&self) -> Point3<f64> {
        self.bbox_max
    }

    /// World extents (width, depth, height) of the bounding box.
    pub fn extents(&self) -> [f64; 3] {
        [
            self.bbox_max.x - self.bbox_min.x,
            self.bbox_max.y - self.bbox_min.y,
            self.bbox_max.z - self.bbox_min.z,
        ]
    }
}
