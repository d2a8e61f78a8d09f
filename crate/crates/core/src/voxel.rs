//! Surface voxelization and outer-shell extraction.
//!
//! A cell is marked `Surface` when any input triangle intersects its box
//! (conservative rasterization), so the input does not have to be
//! watertight for shell extraction to work. Cells reachable from outside
//! the grid through empty space are `Exterior`; everything else that is
//! not surface is `Interior` (enclosed volume and cavities alike). The
//! outer shell is the set of faces between non-exterior and exterior
//! cells, which skips cavity walls.

use crate::mesh::TriangleMesh;
use nalgebra::{Point3, Vector3};
use thiserror::Error;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Debug, Error, PartialEq)]
pub enum VoxelError {
    #[error("mesh has no triangles to rasterize")]
    EmptyMesh,
    #[error("resolution {0} too low: shell has fewer than 6 faces")]
    ResolutionTooLow(u32),
    #[error("grid has no shell face between solid and exterior cells")]
    NoShell,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Occupancy {
    Empty,
    Surface,
    Interior,
    Exterior,
}

/// Axis-aligned face direction of a voxel; also the panel normal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FaceDir {
    PosX,
    NegX,
    PosY,
    NegY,
    PosZ,
    NegZ,
}

impl FaceDir {
    pub const ALL: [FaceDir; 6] = [
        FaceDir::PosX,
        FaceDir::NegX,
        FaceDir::PosY,
        FaceDir::NegY,
        FaceDir::PosZ,
        FaceDir::NegZ,
    ];

    pub fn offset(self) -> [i64; 3] {
        match self {
            FaceDir::PosX => [1, 0, 0],
            FaceDir::NegX => [-1, 0, 0],
            FaceDir::PosY => [0, 1, 0],
            FaceDir::NegY => [0, -1, 0],
            FaceDir::PosZ => [0, 0, 1],
            FaceDir::NegZ => [0, 0, -1],
        }
    }

    pub fn unit(self) -> Vector3<f64> {
        let [x, y, z] = self.offset();
        Vector3::new(x as f64, y as f64, z as f64)
    }

    pub fn opposite(self) -> FaceDir {
        match self {
            FaceDir::PosX => FaceDir::NegX,
            FaceDir::NegX => FaceDir::PosX,
            FaceDir::PosY => FaceDir::NegY,
            FaceDir::NegY => FaceDir::PosY,
            FaceDir::PosZ => FaceDir::NegZ,
            FaceDir::NegZ => FaceDir::PosZ,
        }
    }

    /// The four directions perpendicular to this one, in a fixed order.
    pub fn tangents(self) -> [FaceDir; 4] {
        match self {
            FaceDir::PosX | FaceDir::NegX => {
                [FaceDir::PosY, FaceDir::NegY, FaceDir::PosZ, FaceDir::NegZ]
            }
            FaceDir::PosY | FaceDir::NegY => {
                [FaceDir::PosX, FaceDir::NegX, FaceDir::PosZ, FaceDir::NegZ]
            }
            FaceDir::PosZ | FaceDir::NegZ => {
                [FaceDir::PosX, FaceDir::NegX, FaceDir::PosY, FaceDir::NegY]
            }
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            FaceDir::PosX => "+x",
            FaceDir::NegX => "-x",
            FaceDir::PosY => "+y",
            FaceDir::NegY => "-y",
            FaceDir::PosZ => "+z",
            FaceDir::NegZ => "-z",
        }
    }

    pub fn from_label(s: &str) -> Option<FaceDir> {
        Some(match s {
            "+x" => FaceDir::PosX,
            "-x" => FaceDir::NegX,
            "+y" => FaceDir::PosY,
            "-y" => FaceDir::NegY,
            "+z" => FaceDir::PosZ,
            "-z" => FaceDir::NegZ,
            _ => return None,
        })
    }
}

pub type Cell = [i64; 3];

/// Regular grid of cubic cells with classified occupancy.
#[derive(Debug, Clone)]
pub struct VoxelGrid {
    dims: [usize; 3],
    cell_size: f64,
    origin: Point3<f64>,
    occupancy: Vec<Occupancy>,
}

impl VoxelGrid {
    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn cell_size(&self) -> f64 {
        self.cell_size
    }

    pub fn origin(&self) -> Point3<f64> {
        self.origin
    }

    fn index(&self, c: Cell) -> usize {
        let [nx, ny, _] = self.dims;
        (c[2] as usize * ny + c[1] as usize) * nx + c[0] as usize
    }

    pub fn in_bounds(&self, c: Cell) -> bool {
        (0..3).all(|k| c[k] >= 0 && (c[k] as usize) < self.dims[k])
    }

    pub fn occupancy(&self, c: Cell) -> Occupancy {
        if self.in_bounds(c) {
            self.occupancy[self.index(c)]
        } else {
            Occupancy::Exterior
        }
    }

    /// Out-of-range cells count as exterior: the grid is embedded in
    /// unbounded empty space.
    pub fn is_exterior(&self, c: Cell) -> bool {
        self.occupancy(c) == Occupancy::Exterior
    }

    pub fn is_solid(&self, c: Cell) -> bool {
        matches!(self.occupancy(c), Occupancy::Surface | Occupancy::Interior)
    }

    pub fn cells(&self) -> impl Iterator<Item = Cell> + '_ {
        let [nx, ny, nz] = self.dims;
        (0..nz).flat_map(move |k| {
            (0..ny).flat_map(move |j| (0..nx).map(move |i| [i as i64, j as i64, k as i64]))
        })
    }

    pub fn count(&self, occ: Occupancy) -> usize {
        self.occupancy.iter().filter(|&&o| o == occ).count()
    }

    /// Builds a grid directly from occupied cells (polycube input). Cells
    /// are translated so the minimum corner is at the grid origin.
    pub fn from_cells(cells: &[Cell], cell_size: f64) -> Self {
        assert!(!cells.is_empty(), "polycube must have at least one cell");
        let mut lo = [i64::MAX; 3];
        let mut hi = [i64::MIN; 3];
        for c in cells {
            for k in 0..3 {
                lo[k] = lo[k].min(c[k]);
                hi[k] = hi[k].max(c[k]);
            }
        }
        let dims = [
            (hi[0] - lo[0] + 1) as usize,
            (hi[1] - lo[1] + 1) as usize,
            (hi[2] - lo[2] + 1) as usize,
        ];
        let mut grid = VoxelGrid {
            dims,
            cell_size,
            origin: Point3::new(
                lo[0] as f64 * cell_size,
                lo[1] as f64 * cell_size,
                lo[2] as f64 * cell_size,
            ),
            occupancy: vec![Occupancy::Empty; dims[0] * dims[1] * dims[2]],
        };
        for c in cells {
            let shifted = [c[0] - lo[0], c[1] - lo[1], c[2] - lo[2]];
            let idx = grid.index(shifted);
            grid.occupancy[idx] = Occupancy::Surface;
        }
        grid.flood_exterior();
        grid
    }

    /// Flood-fills `Exterior` from the grid boundary through non-surface
    /// cells, then relabels the remaining empty cells as `Interior`.
    fn flood_exterior(&mut self) {
        let [nx, ny, nz] = self.dims;
        let mut queue = std::collections::VecDeque::new();
        let boundary_cells: Vec<Cell> = self
            .cells()
            .filter(|c| {
                c[0] == 0
                    || c[1] == 0
                    || c[2] == 0
                    || c[0] as usize == nx - 1
                    || c[1] as usize == ny - 1
                    || c[2] as usize == nz - 1
            })
            .collect();
        for c in boundary_cells {
            if self.occupancy(c) == Occupancy::Empty {
                let idx = self.index(c);
                self.occupancy[idx] = Occupancy::Exterior;
                queue.push_back(c);
            }
        }
        while let Some(c) = queue.pop_front() {
            for dir in FaceDir::ALL {
                let o = dir.offset();
                let n = [c[0] + o[0], c[1] + o[1], c[2] + o[2]];
                if self.in_bounds(n) && self.occupancy(n) == Occupancy::Empty {
                    let idx = self.index(n);
                    self.occupancy[idx] = Occupancy::Exterior;
                    queue.push_back(n);
                }
            }
        }
        for o in &mut self.occupancy {
            if *o == Occupancy::Empty {
                *o = Occupancy::Interior;
            }
        }
    }
}

/// Rasterizes the mesh into a grid whose longest axis spans `resolution`
/// cells, then classifies cells by an exterior flood fill.
pub fn voxelize_surface(mesh: &TriangleMesh, resolution: u32) -> Result<VoxelGrid, VoxelError> {
    if mesh.triangles().is_empty() {
        return Err(VoxelError::EmptyMesh);
    }
    if resolution < 1 {
        return Err(VoxelError::ResolutionTooLow(resolution));
    }
    let ext = mesh.extents();
    let longest = ext[0].max(ext[1]).max(ext[2]);
    let cell_size = longest / resolution as f64;
    let dims = [
        ((ext[0] / cell_size).ceil() as usize).max(1),
        ((ext[1] / cell_size).ceil() as usize).max(1),
        ((ext[2] / cell_size).ceil() as usize).max(1),
    ];
    let origin = mesh.bbox_min();

    let mark_triangle = |ti: usize| -> Vec<usize> {
        let tri = mesh.triangle_points(ti);
        let mut cells = Vec::new();
        // Cell range covered by the triangle's AABB, clamped to the grid.
        let mut lo = [0usize; 3];
        let mut hi = [0usize; 3];
        // Widen by one cell on each side so triangles lying exactly on
        // cell boundaries still reach the touching cells; the overlap
        // test rejects the rest.
        for k in 0..3 {
            let tmin = tri.iter().map(|p| p[k]).fold(f64::INFINITY, f64::min);
            let tmax = tri.iter().map(|p| p[k]).fold(f64::NEG_INFINITY, f64::max);
            lo[k] = (((tmin - origin[k]) / cell_size).floor() as i64 - 1)
                .clamp(0, dims[k] as i64 - 1) as usize;
            hi[k] = (((tmax - origin[k]) / cell_size).floor() as i64 + 1)
                .clamp(0, dims[k] as i64 - 1) as usize;
        }
        let half = Vector3::new(cell_size / 2.0, cell_size / 2.0, cell_size / 2.0);
        for k in lo[2]..=hi[2] {
            for j in lo[1]..=hi[1] {
                for i in lo[0]..=hi[0] {
                    let center = origin
                        + Vector3::new(
                            (i as f64 + 0.5) * cell_size,
                            (j as f64 + 0.5) * cell_size,
                            (k as f64 + 0.5) * cell_size,
                        );
                    if triangle_box_overlap(center, half, &tri) {
                        cells.push((k * dims[1] + j) * dims[0] + i);
                    }
                }
            }
        }
        cells
    };

    #[cfg(feature = "parallel")]
    let marked: Vec<Vec<usize>> = (0..mesh.triangles().len())
        .into_par_iter()
        .map(mark_triangle)
        .collect();
    #[cfg(not(feature = "parallel"))]
    let marked: Vec<Vec<usize>> = (0..mesh.triangles().len()).map(mark_triangle).collect();

    let mut occupancy = vec![Occupancy::Empty; dims[0] * dims[1] * dims[2]];
    for cells in marked {
        for idx in cells {
            occupancy[idx] = Occupancy::Surface;
        }
    }

    let mut grid = VoxelGrid {
        dims,
        cell_size,
        origin,
        occupancy,
    };
    grid.flood_exterior();

    let shell = extract_outer_shell(&grid)?;
    if shell.len() < 6 {
        return Err(VoxelError::ResolutionTooLow(resolution));
    }
    Ok(grid)
}

/// Returns the faces between non-exterior cells and exterior cells
/// reachable from outside the grid. Cavity walls are not included.
pub fn extract_outer_shell(grid: &VoxelGrid) -> Result<Vec<(Cell, FaceDir)>, VoxelError> {
    let mut faces = Vec::new();
    for c in grid.cells() {
        if !grid.is_solid(c) {
            continue;
        }
        for dir in FaceDir::ALL {
            let o = dir.offset();
            let n = [c[0] + o[0], c[1] + o[1], c[2] + o[2]];
            if grid.is_exterior(n) {
                faces.push((c, dir));
            }
        }
    }
    if faces.is_empty() {
        return Err(VoxelError::NoShell);
    }
    faces.sort();
    Ok(faces)
}

/// Triangle/axis-aligned-box overlap via the separating axis test
/// (box face normals, triangle normal, nine edge cross products).
/// Touching counts as overlap.
pub fn triangle_box_overlap(
    center: Point3<f64>,
    half: Vector3<f64>,
    tri: &[Point3<f64>; 3],
) -> bool {
    let v0 = tri[0] - center;
    let v1 = tri[1] - center;
    let v2 = tri[2] - center;

    // Box face normals.
    for k in 0..3 {
        let min = v0[k].min(v1[k]).min(v2[k]);
        let max = v0[k].max(v1[k]).max(v2[k]);
        if min > half[k] || max < -half[k] {
            return false;
        }
    }

    let e0 = v1 - v0;
    let e1 = v2 - v1;
    let e2 = v0 - v2;

    // Triangle plane.
    let n = e0.cross(&e1);
    let d = n.dot(&v0);
    let r = half.x * n.x.abs() + half.y * n.y.abs() + half.z * n.z.abs();
    if d.abs() > r {
        return false;
    }

    // Nine edge cross-product axes.
    let axes = [Vector3::x(), Vector3::y(), Vector3::z()];
    for e in [e0, e1, e2] {
        for a in axes {
            let axis = a.cross(&e);
            if axis.norm_squared() < 1e-24 {
                continue;
            }
            let p0 = axis.dot(&v0);
            let p1 = axis.dot(&v1);
            let p2 = axis.dot(&v2);
            let min = p0.min(p1).min(p2);
            let max = p0.max(p1).max(p2);
            let r = half.x * axis.x.abs() + half.y * axis.y.abs() + half.z * axis.z.abs();
            if min > r || max < -r {
                return false;
            }
        }
    }
    true
}
