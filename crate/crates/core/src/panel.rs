//! Panel networks: identical square panels covering the outer voxel shell
//! with exact 4-neighbor adjacency.
//!
//! Neighbor resolution across a lattice edge walks three candidates in
//! order: the diagonal cell up-and-over (concave pair), the side cell
//! (coplanar pair), then the same cell's perpendicular face (convex pair).
//! Where four shell faces meet at one lattice edge this pairs each face
//! with the face bounding the same exterior wedge, so the shell stays a
//! combinatorial 2-manifold and every panel has exactly four neighbors.

use crate::voxel::{Cell, FaceDir, VoxelGrid};
use nalgebra::{Point3, Vector3};
use std::collections::HashMap;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum NetworkError {
    #[error("panel thickness {t} must be below half the edge length {l}")]
    ThicknessTooLarge { l: f64, t: f64 },
    #[error("no neighbor face found for panel {0} across edge {1}; shell is not closed")]
    NonManifoldUnresolvable(usize, usize),
    #[error("panels {0} and {1} share two edges (degenerate two-panel ring)")]
    DegenerateRing(usize, usize),
    #[error("shell face set is empty")]
    EmptyShell,
}

/// Fold relation across a shared panel edge in the deployed state.
/// Convex edges carry +pi/2 (the crease ridge points outward), coplanar
/// pairs 0, concave edges -pi/2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Dihedral {
    Convex,
    Flat,
    Concave,
}

impl Dihedral {
    pub fn angle(self) -> f64 {
        match self {
            Dihedral::Convex => std::f64::consts::FRAC_PI_2,
            Dihedral::Flat => 0.0,
            Dihedral::Concave => -std::f64::consts::FRAC_PI_2,
        }
    }
}

/// One square face of the voxel shell.
#[derive(Debug, Clone)]
pub struct Panel {
    pub id: usize,
    pub voxel: Cell,
    pub face_dir: FaceDir,
    pub center: Point3<f64>,
    pub normal: Vector3<f64>,
}

#[derive(Debug, Clone, Copy)]
pub struct Neighbor {
    pub panel: usize,
    /// Global shared-edge id; each id is referenced by exactly two panels.
    pub edge: usize,
    pub dihedral: Dihedral,
}

/// The deployed panel shell: panels plus 4-regular adjacency.
#[derive(Debug, Clone)]
pub struct PanelNetwork {
    panels: Vec<Panel>,
    adjacency: Vec<[Neighbor; 4]>,
    edge_count: usize,
    edge_length: f64,
    thickness: f64,
}

/// Unit lattice segment identifying a geometric face edge.
type LatticeEdge = ([i64; 3], [i64; 3]);

/// Lattice endpoints of the edge of face `(cell, dir)` on the `tangent`
/// side.
fn face_edge(cell: Cell, dir: FaceDir, tangent: FaceDir) -> LatticeEdge {
    let mut base = cell;
    let d = dir.offset();
    let t = tangent.offset();
    for k in 0..3 {
        if d[k] > 0 {
            base[k] += 1;
        }
        if t[k] > 0 {
            base[k] += 1;
        }
    }
    // The remaining axis spans the unit segment.
    let mut other = base;
    for k in 0..3 {
        if d[k] == 0 && t[k] == 0 {
            other[k] += 1;
        }
    }
    if base <= other {
        (base, other)
    } else {
        (other, base)
    }
}

/// Resolves the face adjacent to `(cell, dir)` across its `tangent` edge.
fn neighbor_face(
    grid: &VoxelGrid,
    cell: Cell,
    dir: FaceDir,
    tangent: FaceDir,
) -> ((Cell, FaceDir), Dihedral) {
    let d = dir.offset();
    let t = tangent.offset();
    let side = [cell[0] + t[0], cell[1] + t[1], cell[2] + t[2]];
    let diagonal = [side[0] + d[0], side[1] + d[1], side[2] + d[2]];
    if grid.is_solid(diagonal) {
        ((diagonal, tangent.opposite()), Dihedral::Concave)
    } else if grid.is_solid(side) {
        ((side, dir), Dihedral::Flat)
    } else {
        ((cell, tangent), Dihedral::Convex)
    }
}

/// Builds the panel network from shell faces. `edge_length` is the panel
/// size `l`, `thickness` the slab thickness `t` in the same units.
pub fn build_panel_network(
    grid: &VoxelGrid,
    faces: &[(Cell, FaceDir)],
    edge_length: f64,
    thickness: f64,
) -> Result<PanelNetwork, NetworkError> {
    if faces.is_empty() {
        return Err(NetworkError::EmptyShell);
    }
    if !(thickness > 0.0) || thickness >= edge_length / 2.0 {
        return Err(NetworkError::ThicknessTooLarge {
            l: edge_length,
            t: thickness,
        });
    }

    let mut index: HashMap<(Cell, FaceDir), usize> = HashMap::with_capacity(faces.len());
    for (i, &f) in faces.iter().enumerate() {
        index.insert(f, i);
    }

    let origin = grid.origin();
    let scale = edge_length / grid.cell_size();
    let panels: Vec<Panel> = faces
        .iter()
        .enumerate()
        .map(|(id, &(voxel, face_dir))| {
            let center = Point3::new(
                origin.x * scale + (voxel[0] as f64 + 0.5) * edge_length,
                origin.y * scale + (voxel[1] as f64 + 0.5) * edge_length,
                origin.z * scale + (voxel[2] as f64 + 0.5) * edge_length,
            ) + face_dir.unit() * (edge_length / 2.0);
            Panel {
                id,
                voxel,
                face_dir,
                center,
                normal: face_dir.unit(),
            }
        })
        .collect();

    // Resolve the raw neighbor of every panel edge.
    let mut raw: Vec<[(usize, LatticeEdge, Dihedral); 4]> = Vec::with_capacity(panels.len());
    for (id, &(cell, dir)) in faces.iter().enumerate() {
        let mut entry = [(usize::MAX, ([0; 3], [0; 3]), Dihedral::Flat); 4];
        for (slot, tangent) in dir.tangents().into_iter().enumerate() {
            let ((ncell, ndir), dihedral) = neighbor_face(grid, cell, dir, tangent);
            let nid = *index
                .get(&(ncell, ndir))
                .ok_or(NetworkError::NonManifoldUnresolvable(id, slot))?;
            entry[slot] = (nid, face_edge(cell, dir, tangent), dihedral);
        }
        raw.push(entry);
    }

    // Assign global edge ids. Each (pair, lattice edge) triple must occur
    // exactly twice (once from each side), and a pair of panels may share
    // only one edge.
    let mut edge_ids: HashMap<(usize, usize, LatticeEdge), usize> = HashMap::new();
    let mut pair_edges: HashMap<(usize, usize), LatticeEdge> = HashMap::new();
    let mut keys: Vec<(usize, usize, LatticeEdge)> = Vec::new();
    for (a, entry) in raw.iter().enumerate() {
        for &(b, ledge, _) in entry {
            if a == b {
                return Err(NetworkError::DegenerateRing(a, b));
            }
            let key = (a.min(b), a.max(b), ledge);
            if a < b {
                keys.push(key);
            }
        }
    }
    keys.sort();
    keys.dedup();
    for (i, &key) in keys.iter().enumerate() {
        let pair = (key.0, key.1);
        if let Some(&prev) = pair_edges.get(&pair) {
            if prev != key.2 {
                return Err(NetworkError::DegenerateRing(pair.0, pair.1));
            }
        }
        pair_edges.insert(pair, key.2);
        edge_ids.insert(key, i);
    }

    let mut adjacency: Vec<[Neighbor; 4]> = Vec::with_capacity(panels.len());
    for (a, entry) in raw.iter().enumerate() {
        let mut nbrs = [Neighbor {
            panel: usize::MAX,
            edge: usize::MAX,
            dihedral: Dihedral::Flat,
        }; 4];
        for (slot, &(b, ledge, dihedral)) in entry.iter().enumerate() {
            let key = (a.min(b), a.max(b), ledge);
            let edge = *edge_ids
                .get(&key)
                .ok_or(NetworkError::NonManifoldUnresolvable(a, slot))?;
            nbrs[slot] = Neighbor {
                panel: b,
                edge,
                dihedral,
            };
        }
        adjacency.push(nbrs);
    }

    // Reciprocity: if a lists b across edge e, b must list a across e.
    for (a, nbrs) in adjacency.iter().enumerate() {
        for n in nbrs {
            let back = adjacency[n.panel]
                .iter()
                .any(|m| m.panel == a && m.edge == n.edge && m.dihedral == n.dihedral);
            if !back {
                return Err(NetworkError::NonManifoldUnresolvable(a, n.edge));
            }
        }
    }

    Ok(PanelNetwork {
        panels,
        adjacency,
        edge_count: keys.len(),
        edge_length,
        thickness,
    })
}

impl PanelNetwork {
    pub fn panels(&self) -> &[Panel] {
        &self.panels
    }

    pub fn panel(&self, id: usize) -> &Panel {
        &self.panels[id]
    }

    pub fn len(&self) -> usize {
        self.panels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.panels.is_empty()
    }

    pub fn neighbors(&self, id: usize) -> &[Neighbor; 4] {
        &self.adjacency[id]
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn edge_length(&self) -> f64 {
        self.edge_length
    }

    pub fn thickness(&self) -> f64 {
        self.thickness
    }

    /// The neighbor record for the shared edge `edge` at panel `id`.
    pub fn neighbor_by_edge(&self, id: usize, edge: usize) -> Option<&Neighbor> {
        self.adjacency[id].iter().find(|n| n.edge == edge)
    }

    /// Shared edge id between two adjacent panels, if any.
    pub fn shared_edge(&self, a: usize, b: usize) -> Option<usize> {
        self.adjacency[a]
            .iter()
            .find(|n| n.panel == b)
            .map(|n| n.edge)
    }

    /// Midpoint of the shared edge `edge` as seen from panel `id`, in
    /// world units.
    pub fn edge_midpoint(&self, id: usize, edge: usize) -> Option<Point3<f64>> {
        let slot = self.adjacency[id].iter().position(|n| n.edge == edge)?;
        let p = &self.panels[id];
        let tangent = p.face_dir.tangents()[slot];
        Some(p.center + tangent.unit() * (self.edge_length / 2.0))
    }

    /// Number of connected components of the panel adjacency graph.
    pub fn component_count(&self) -> usize {
        let mut seen = vec![false; self.panels.len()];
        let mut components = 0;
        for start in 0..self.panels.len() {
            if seen[start] {
                continue;
            }
            components += 1;
            let mut stack = vec![start];
            seen[start] = true;
            while let Some(p) = stack.pop() {
                for n in &self.adjacency[p] {
                    if !seen[n.panel] {
                        seen[n.panel] = true;
                        stack.push(n.panel);
                    }
                }
            }
        }
        components
    }

    /// Recomputes the dihedral label of an adjacency from panel geometry;
    /// used to cross-check stored labels.
    pub fn dihedral_from_geometry(&self, a: usize, b: usize) -> Dihedral {
        let pa = &self.panels[a];
        let pb = &self.panels[b];
        let dot = pa.normal.dot(&pb.normal);
        if dot > 0.5 {
            Dihedral::Flat
        } else if pa.normal.dot(&(pb.center - pa.center)) < 0.0 {
            Dihedral::Convex
        } else {
            Dihedral::Concave
        }
    }
}
