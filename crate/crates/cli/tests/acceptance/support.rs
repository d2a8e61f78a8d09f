//! Shared fixtures and independent oracles for the acceptance suite.
//!
//! Everything here is deliberately separate from the library's solver
//! paths: the Hamiltonicity oracle is its own backtracker over plain
//! adjacency lists, and polycube enumeration is self-contained.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use stackfold_core::panel::{build_panel_network, PanelNetwork};
use stackfold_core::voxel::{extract_outer_shell, VoxelGrid};

pub type Cube = [i8; 3];

/// The 24 rotation matrices of the cube, rows are images of x, y, z.
fn rotations() -> Vec<[[i8; 3]; 3]> {
    let mut out = Vec::with_capacity(24);
    let axes: [[i8; 3]; 6] = [
        [1, 0, 0],
        [-1, 0, 0],
        [0, 1, 0],
        [0, -1, 0],
        [0, 0, 1],
        [0, 0, -1],
    ];
    for &x in &axes {
        for &y in &axes {
            // x and y must be orthogonal.
            if x.iter().zip(&y).map(|(a, b)| a * b).sum::<i8>() != 0 {
                continue;
            }
            let z = [
                x[1] * y[2] - x[2] * y[1],
                x[2] * y[0] - x[0] * y[2],
                x[0] * y[1] - x[1] * y[0],
            ];
            out.push([x, y, z]);
        }
    }
    assert_eq!(out.len(), 24);
    out
}

fn apply(rot: &[[i8; 3]; 3], c: Cube) -> Cube {
    [
        rot[0][0] * c[0] + rot[0][1] * c[1] + rot[0][2] * c[2],
        rot[1][0] * c[0] + rot[1][1] * c[1] + rot[1][2] * c[2],
        rot[2][0] * c[0] + rot[2][1] * c[1] + rot[2][2] * c[2],
    ]
}

fn normalize(mut cells: Vec<Cube>) -> Vec<Cube> {
    let mut lo = [i8::MAX; 3];
    for c in &cells {
        for k in 0..3 {
            lo[k] = lo[k].min(c[k]);
        }
    }
    for c in &mut cells {
        for k in 0..3 {
            c[k] -= lo[k];
        }
    }
    cells.sort();
    cells
}

/// Lexicographically smallest normalized rotation image.
pub fn canonical_polycube(cells: &[Cube], rots: &[[[i8; 3]; 3]]) -> Vec<Cube> {
    let mut best: Option<Vec<Cube>> = None;
    for rot in rots {
        let image = normalize(cells.iter().map(|&c| apply(rot, c)).collect());
        if best.as_ref().map_or(true, |b| image < *b) {
            best = Some(image);
        }
    }
    best.unwrap()
}

/// All free polycubes (up to rotation) with `1..=max_cells` cells.
pub fn enumerate_polycubes(max_cells: usize) -> Vec<Vec<Vec<Cube>>> {
    let rots = rotations();
    let mut by_size: Vec<Vec<Vec<Cube>>> = vec![vec![vec![[0, 0, 0]]]];
    for _ in 1..max_cells {
        let prev = by_size.last().unwrap();
        let mut seen: std::collections::HashSet<Vec<Cube>> = std::collections::HashSet::new();
        let mut next = Vec::new();
        for shape in prev {
            let occupied: std::collections::HashSet<Cube> = shape.iter().copied().collect();
            for cell in shape {
                for d in DIRS {
                    let cand = [cell[0] + d[0], cell[1] + d[1], cell[2] + d[2]];
                    if occupied.contains(&cand) {
                        continue;
                    }
                    let mut grown = shape.clone();
                    grown.push(cand);
                    let canon = canonical_polycube(&grown, &rots);
                    if seen.insert(canon.clone()) {
                        next.push(canon);
                    }
                }
            }
        }
        next.sort();
        by_size.push(next);
    }
    by_size
}

const DIRS: [[i8; 3]; 6] = [
    [1, 0, 0],
    [-1, 0, 0],
    [0, 1, 0],
    [0, -1, 0],
    [0, 0, 1],
    [0, 0, -1],
];

/// Seeded random polycube grown cell by cell.
pub fn random_polycube(rng: &mut ChaCha8Rng, cells: usize) -> Vec<Cube> {
    let mut shape: Vec<Cube> = vec![[0, 0, 0]];
    let mut occupied: std::collections::HashSet<Cube> = shape.iter().copied().collect();
    while shape.len() < cells {
        let base = shape[rng.gen_range(0..shape.len())];
        let d = DIRS[rng.gen_range(0..6)];
        let cand = [base[0] + d[0], base[1] + d[1], base[2] + d[2]];
        if occupied.insert(cand) {
            shape.push(cand);
        }
    }
    shape
}

pub fn network_of_cells(cells: &[Cube], t: f64) -> PanelNetwork {
    let cells64: Vec<[i64; 3]> = cells
        .iter()
        .map(|c| [c[0] as i64, c[1] as i64, c[2] as i64])
        .collect();
    let grid = VoxelGrid::from_cells(&cells64, 1.0);
    let faces = extract_outer_shell(&grid).unwrap();
    build_panel_network(&grid, &faces, 1.0, t).unwrap()
}

/// Deployed bounding box of a polycube in cell units.
pub fn cell_bbox(cells: &[Cube]) -> [f64; 3] {
    let mut lo = [i8::MAX; 3];
    let mut hi = [i8::MIN; 3];
    for c in cells {
        for k in 0..3 {
            lo[k] = lo[k].min(c[k]);
            hi[k] = hi[k].max(c[k]);
        }
    }
    [
        (hi[0] - lo[0] + 1) as f64,
        (hi[1] - lo[1] + 1) as f64,
        (hi[2] - lo[2] + 1) as f64,
    ]
}

/// Independent exhaustive Hamiltonian-cycle oracle on adjacency lists.
/// Returns Some(true/false) when the search completes, None when the
/// step budget runs out.
pub struct HamiltonOracle {
    adj: Vec<Vec<usize>>,
}

impl HamiltonOracle {
    pub fn from_network(net: &PanelNetwork) -> Self {
        let adj = (0..net.len())
            .map(|p| {
                let mut ids: Vec<usize> =
                    net.neighbors(p).iter().map(|n| n.panel).collect();
                ids.sort();
                ids
            })
            .collect();
        HamiltonOracle { adj }
    }

    pub fn has_cycle(&self, step_budget: u64) -> Option<bool> {
        let n = self.adj.len();
        if n < 3 {
            return Some(false);
        }
        let mut visited = vec![false; n];
        visited[0] = true;
        let mut steps = 0u64;
        let res = self.dfs(0, 1, &mut visited, &mut steps, step_budget);
        res
    }

    fn dfs(
        &self,
        cur: usize,
        depth: usize,
        visited: &mut [bool],
        steps: &mut u64,
        budget: u64,
    ) -> Option<bool> {
        *steps += 1;
        if *steps > budget {
            return None;
        }
        let n = self.adj.len();
        if depth == n {
            return Some(self.adj[cur].contains(&0));
        }
        // Availability prune: an unvisited node needs two usable links.
        for v in 0..n {
            if visited[v] {
                continue;
            }
            let mut links = 0;
            for &w in &self.adj[v] {
                if !visited[w] || w == cur || w == 0 {
                    links += 1;
                }
            }
            if links < 2 {
                return Some(false);
            }
        }
        let mut exhausted = true;
        for &w in &self.adj[cur] {
            if !visited[w] {
                visited[w] = true;
                match self.dfs(w, depth + 1, visited, steps, budget) {
                    Some(true) => {
                        visited[w] = false;
                        return Some(true);
                    }
                    Some(false) => {}
                    None => exhausted = false,
                }
                visited[w] = false;
            }
        }
        if exhausted {
            Some(false)
        } else {
            None
        }
    }
}

/// Named fixture shells used across several criteria.
pub fn fixture_polycubes() -> Vec<(&'static str, Vec<Cube>)> {
    let mut hollow = Vec::new();
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                if (i, j, k) != (1, 1, 1) {
                    hollow.push([i, j, k]);
                }
            }
        }
    }
    vec![
        ("cube", vec![[0, 0, 0]]),
        ("rod-1x1x7", (0..7).map(|k| [0, 0, k]).collect()),
        (
            "plate-3x3x1",
            (0..3).flat_map(|i| (0..3).map(move |j| [i, j, 0])).collect(),
        ),
        ("l-tromino", vec![[0, 0, 0], [1, 0, 0], [1, 1, 0]]),
        ("hollow-3x3x3", hollow),
        ("edge-pair", vec![[0, 0, 0], [1, 1, 0]]),
    ]
}
