//! Continuous thick-panel kinematics.
//!
//! Each ideal crease is realized as two parallel fold lines, one at
//! distance t/2 inside each panel, joined by a rigid connector whose
//! length follows the hinge law. In the folding stage (|theta| <= pi/2)
//! the connector length cos(theta/2) * t makes the chain coincide exactly
//! with zero-thickness kinematics: the two panels rotate about the ideal
//! shared edge. In the stacking stage the connector extends back to t so
//! that fully folded panels sit one slab thickness apart.

use crate::panel::PanelNetwork;
use crate::stack::{MoveKind, StackedPlacement, Strip, Turn};
use nalgebra::{Point3, Vector3};
use thiserror::Error;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Debug, Error, PartialEq)]
pub enum FoldError {
    #[error("fold angle {0} outside [-pi, pi]")]
    AngleOutOfRange(f64),
    #[error("configuration has {got} angles, strip needs {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("placement does not match the strip: {0}")]
    InfeasiblePlacement(String),
}

/// Length of a hinge at fold angle `theta` for panel thickness `t`.
///
/// Folding stage (|theta| <= pi/2): `cos(theta/2) * t`, which preserves
/// zero-thickness kinematics. Stacking stage (|theta| > pi/2):
/// `(sqrt(2)/2) * t / cos((|theta| - pi/2) / 2)`, extending the hinge
/// smoothly from `sqrt(2) t / 2` back to `t` at |theta| = pi. The result
/// always lies in `[sqrt(2) t / 2, t]`.
pub fn hinge_length(theta: f64, t: f64) -> Result<f64, FoldError> {
    let theta = clamp_angle(theta)?;
    let a = theta.abs();
    let h = if a <= std::f64::consts::FRAC_PI_2 {
        (theta / 2.0).cos() * t
    } else {
        (std::f64::consts::SQRT_2 / 2.0) * t / ((a - std::f64::consts::FRAC_PI_2) / 2.0).cos()
    };
    Ok(h)
}

fn clamp_angle(theta: f64) -> Result<f64, FoldError> {
    if !theta.is_finite() || theta.abs() > std::f64::consts::PI + 1e-6 {
        return Err(FoldError::AngleOutOfRange(theta));
    }
    Ok(theta.clamp(-std::f64::consts::PI, std::f64::consts::PI))
}

/// Per-hinge fold angles along a strip, with the panel dimensions they
/// apply to. Angles slightly beyond +-pi (parse round-off) are clamped.
#[derive(Debug, Clone, PartialEq)]
pub struct FoldConfiguration {
    angles: Vec<f64>,
    thickness: f64,
    edge_length: f64,
}

impl FoldConfiguration {
    pub fn new(angles: Vec<f64>, edge_length: f64, thickness: f64) -> Result<Self, FoldError> {
        let angles = angles
            .into_iter()
            .map(clamp_angle)
            .collect::<Result<Vec<_>, _>>()?;
        Ok(FoldConfiguration {
            angles,
            thickness,
            edge_length,
        })
    }

    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    pub fn thickness(&self) -> f64 {
        self.thickness
    }

    pub fn edge_length(&self) -> f64 {
        self.edge_length
    }

    pub fn len(&self) -> usize {
        self.angles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.angles.is_empty()
    }
}

/// Rigid frame of one ideal panel: center, travel direction at entry and
/// outward normal.
#[derive(Debug, Clone, Copy)]
pub struct PanelFrame {
    pub center: Point3<f64>,
    pub travel: Vector3<f64>,
    pub normal: Vector3<f64>,
}

impl PanelFrame {
    /// In-plane binormal completing the right-handed frame.
    pub fn binormal(&self) -> Vector3<f64> {
        self.normal.cross(&self.travel)
    }
}

/// Connector ribbon between the two sub-crease lines of a hinge.
#[derive(Debug, Clone, Copy)]
pub struct Connector {
    pub corners: [Point3<f64>; 4],
    pub length: f64,
}

/// Placements of every ideal panel and connector at one configuration.
#[derive(Debug, Clone)]
pub struct StripPose {
    pub frames: Vec<PanelFrame>,
    pub connectors: Vec<Connector>,
}

fn rotate_about(v: Vector3<f64>, axis: Vector3<f64>, angle: f64) -> Vector3<f64> {
    let (s, c) = angle.sin_cos();
    v * c + axis.cross(&v) * s + axis * (axis.dot(&v)) * (1.0 - c)
}

fn apply_turn(turn: Turn, travel: Vector3<f64>, normal: Vector3<f64>) -> Vector3<f64> {
    match turn {
        Turn::Straight => travel,
        Turn::Left => normal.cross(&travel),
        Turn::Right => -normal.cross(&travel),
    }
}

/// Chain forward kinematics. Panel 0 sits at the origin with normal +z
/// and its first hinge on the +x side; every hinge contributes two
/// theta/2 folds separated by the connector.
pub fn strip_fk(strip: &Strip, config: &FoldConfiguration) -> Result<StripPose, FoldError> {
    let n = strip.len();
    if config.len() != n - 1 {
        return Err(FoldError::LengthMismatch {
            expected: n - 1,
            got: config.len(),
        });
    }
    let l = config.edge_length;
    let t = config.thickness;
    let leg = l / 2.0 - t / 2.0;
    let ribbon_half = (l - 2.0 * t) / 2.0;

    let mut frames = Vec::with_capacity(n);
    let mut connectors = Vec::with_capacity(n - 1);
    let mut center = Point3::origin();
    let mut travel = Vector3::new(-1.0, 0.0, 0.0);
    let mut normal = Vector3::new(0.0, 0.0, 1.0);
    frames.push(PanelFrame {
        center,
        travel,
        normal,
    });

    for i in 0..n - 1 {
        let theta = config.angles[i];
        let out = if i == 0 {
            Vector3::new(1.0, 0.0, 0.0)
        } else {
            apply_turn(strip.turns[i], travel, normal)
        };
        let axis = normal.cross(&out);
        let h = hinge_length(theta, t)?;

        let crease_a = center + out * leg;
        let mid_dir = rotate_about(out, axis, theta / 2.0);
        let crease_b = crease_a + mid_dir * h;
        let new_dir = rotate_about(out, axis, theta);
        let new_normal = rotate_about(normal, axis, theta);

        connectors.push(Connector {
            corners: [
                crease_a - axis * ribbon_half,
                crease_a + axis * ribbon_half,
                crease_b + axis * ribbon_half,
                crease_b - axis * ribbon_half,
            ],
            length: h,
        });

        center = crease_b + new_dir * leg;
        travel = new_dir;
        normal = new_normal;
        frames.push(PanelFrame {
            center,
            travel,
            normal,
        });
    }
    Ok(StripPose { frames, connectors })
}

/// Oriented box with orthonormal axes and half extents.
#[derive(Debug, Clone, Copy)]
pub struct OrientedBox {
    pub center: Point3<f64>,
    pub axes: [Vector3<f64>; 3],
    pub half: [f64; 3],
}

impl OrientedBox {
    pub fn corners(&self) -> [Point3<f64>; 8] {
        let mut out = [Point3::origin(); 8];
        for (i, corner) in out.iter_mut().enumerate() {
            let sx = if i & 1 == 0 { -1.0 } else { 1.0 };
            let sy = if i & 2 == 0 { -1.0 } else { 1.0 };
            let sz = if i & 4 == 0 { -1.0 } else { 1.0 };
            *corner = self.center
                + self.axes[0] * (sx * self.half[0])
                + self.axes[1] * (sy * self.half[1])
                + self.axes[2] * (sz * self.half[2]);
        }
        out
    }

    fn aabb(&self) -> (Point3<f64>, Point3<f64>) {
        let mut r = Vector3::zeros();
        for k in 0..3 {
            r += self.axes[k].abs() * self.half[k];
        }
        (self.center - r, self.center + r)
    }
}

/// Signed penetration depth between two oriented boxes: the smallest
/// overlap over the 15 separating-axis candidates, negative when a
/// separating axis exists.
pub fn obb_penetration(a: &OrientedBox, b: &OrientedBox) -> f64 {
    let d = b.center - a.center;
    let mut min_overlap = f64::INFINITY;
    let mut test = |axis: Vector3<f64>| {
        let len2 = axis.norm_squared();
        if len2 < 1e-18 {
            return; // degenerate cross product, covered by face axes
        }
        let axis = axis / len2.sqrt();
        let ra: f64 = (0..3).map(|k| a.half[k] * a.axes[k].dot(&axis).abs()).sum();
        let rb: f64 = (0..3).map(|k| b.half[k] * b.axes[k].dot(&axis).abs()).sum();
        let overlap = ra + rb - d.dot(&axis).abs();
        min_overlap = min_overlap.min(overlap);
    };
    for k in 0..3 {
        test(a.axes[k]);
        test(b.axes[k]);
    }
    for i in 0..3 {
        for j in 0..3 {
            test(a.axes[i].cross(&b.axes[j]));
        }
    }
    min_overlap
}

/// Thick slabs plus hinge connectors at one pose.
#[derive(Debug, Clone)]
pub struct SlabSet {
    pub slabs: Vec<OrientedBox>,
    pub connectors: Vec<Connector>,
    pub edge_length: f64,
    pub thickness: f64,
}

/// Trims each panel to (l - 2t) x (l - 2t) x t, centered on its ideal
/// panel plane.
pub fn thick_geometry(pose: &StripPose, edge_length: f64, thickness: f64) -> SlabSet {
    let half_foot = (edge_length - 2.0 * thickness) / 2.0;
    let slabs = pose
        .frames
        .iter()
        .map(|f| OrientedBox {
            center: f.center,
            axes: [f.travel, f.binormal(), f.normal],
            half: [half_foot, half_foot, thickness / 2.0],
        })
        .collect();
    SlabSet {
        slabs,
        connectors: pose.connectors.clone(),
        edge_length,
        thickness,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SlabCollision {
    pub a: usize,
    pub b: usize,
    pub penetration: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum DisjointReport {
    /// No pair penetrates beyond the clearance tolerance; carries the
    /// largest penetration observed (can be negative).
    Disjoint { max_penetration: f64 },
    Colliding(Vec<SlabCollision>),
}

/// Pairwise slab separation with a spatial-hash broad phase. Slabs touch
/// in valid stacked states, so `clearance_tol` separates true
/// interpenetration from floating-point contact.
pub fn check_disjoint(slabs: &SlabSet, clearance_tol: f64) -> DisjointReport {
    let boxes = &slabs.slabs;
    let n = boxes.len();
    if n < 2 {
        return DisjointReport::Disjoint {
            max_penetration: f64::NEG_INFINITY,
        };
    }
    let cell = slabs.edge_length.max(1e-12);
    let mut buckets: std::collections::HashMap<(i64, i64, i64), Vec<usize>> =
        std::collections::HashMap::new();
    for (i, b) in boxes.iter().enumerate() {
        let (lo, hi) = b.aabb();
        let lo = [
            (lo.x / cell).floor() as i64,
            (lo.y / cell).floor() as i64,
            (lo.z / cell).floor() as i64,
        ];
        let hi = [
            (hi.x / cell).floor() as i64,
            (hi.y / cell).floor() as i64,
            (hi.z / cell).floor() as i64,
        ];
        for x in lo[0]..=hi[0] {
            for y in lo[1]..=hi[1] {
                for z in lo[2]..=hi[2] {
                    buckets.entry((x, y, z)).or_default().push(i);
                }
            }
        }
    }
    let mut candidates: Vec<(usize, usize)> = Vec::new();
    for ids in buckets.values() {
        for i in 0..ids.len() {
            for j in i + 1..ids.len() {
                candidates.push((ids[i].min(ids[j]), ids[i].max(ids[j])));
            }
        }
    }
    candidates.sort();
    candidates.dedup();

    let measure = |&(i, j): &(usize, usize)| -> (usize, usize, f64) {
        (i, j, obb_penetration(&boxes[i], &boxes[j]))
    };
    #[cfg(feature = "parallel")]
    let measured: Vec<(usize, usize, f64)> = candidates.par_iter().map(measure).collect();
    #[cfg(not(feature = "parallel"))]
    let measured: Vec<(usize, usize, f64)> = candidates.iter().map(measure).collect();

    let mut max_pen = f64::NEG_INFINITY;
    let mut colliding = Vec::new();
    for (i, j, pen) in measured {
        max_pen = max_pen.max(pen);
        if pen > clearance_tol {
            colliding.push(SlabCollision {
                a: i,
                b: j,
                penetration: pen,
            });
        }
    }
    if colliding.is_empty() {
        DisjointReport::Disjoint {
            max_penetration: max_pen,
        }
    } else {
        DisjointReport::Colliding(colliding)
    }
}

/// Per-hinge linear interpolation between two configurations. No
/// collision-freeness is implied at intermediate points.
pub fn interpolate_configuration(
    from: &FoldConfiguration,
    to: &FoldConfiguration,
    s: f64,
) -> Result<FoldConfiguration, FoldError> {
    if from.len() != to.len() {
        return Err(FoldError::LengthMismatch {
            expected: from.len(),
            got: to.len(),
        });
    }
    let angles = from
        .angles
        .iter()
        .zip(&to.angles)
        .map(|(&a, &b)| (1.0 - s) * a + s * b)
        .collect();
    FoldConfiguration::new(angles, from.edge_length, from.thickness)
}

/// Fold angles of the deployed state: each hinge takes the dihedral of
/// its shared voxel edge.
pub fn folded_configuration(
    strip: &Strip,
    network: &PanelNetwork,
) -> Result<FoldConfiguration, FoldError> {
    let mut angles = Vec::with_capacity(strip.hinges.len());
    for (i, &edge) in strip.hinges.iter().enumerate() {
        let n = network
            .neighbor_by_edge(strip.order[i], edge)
            .ok_or_else(|| {
                FoldError::InfeasiblePlacement(format!("hinge {i} is not an edge of its panel"))
            })?;
        angles.push(n.dihedral.angle());
    }
    FoldConfiguration::new(angles, network.edge_length(), network.thickness())
}

/// Fold angles realizing a stacked placement: +-pi on above/below moves
/// (sign from the face parity of the upstream panel), 0 on laterals.
pub fn angles_for_placement(
    strip: &Strip,
    placement: &StackedPlacement,
    network: &PanelNetwork,
) -> Result<FoldConfiguration, FoldError> {
    let n = strip.len();
    if placement.panels.len() != n || placement.moves.len() != n - 1 {
        return Err(FoldError::InfeasiblePlacement(format!(
            "placement covers {} panels and {} moves for a strip of {}",
            placement.panels.len(),
            placement.moves.len(),
            n
        )));
    }
    let pi = std::f64::consts::PI;
    let mut angles = Vec::with_capacity(n - 1);
    for i in 0..n - 1 {
        let face_up = placement.panels[i].face_up;
        let theta = match placement.moves[i].kind {
            MoveKind::Lateral => 0.0,
            MoveKind::Below => {
                if face_up {
                    pi
                } else {
                    -pi
                }
            }
            MoveKind::Above => {
                if face_up {
                    -pi
                } else {
                    pi
                }
            }
        };
        angles.push(theta);
    }
    FoldConfiguration::new(angles, network.edge_length(), network.thickness())
}

/// Runs the deployed-state kinematics and reports the largest distance
/// between a chain panel center and its voxel-shell position, after
/// aligning the first panel's frame.
pub fn deployed_deviation(
    strip: &Strip,
    network: &PanelNetwork,
    thickness: f64,
) -> Result<f64, FoldError> {
    let config = FoldConfiguration::new(
        folded_configuration(strip, network)?.angles().to_vec(),
        network.edge_length(),
        thickness,
    )?;
    let pose = strip_fk(strip, &config)?;
    let map = alignment_to_network(strip, network)?;
    let mut worst: f64 = 0.0;
    for (i, frame) in pose.frames.iter().enumerate() {
        let target = network.panel(strip.order[i]).center;
        let mapped = map(frame.center);
        worst = worst.max((mapped - target).norm());
    }
    Ok(worst)
}

/// Rigid map taking chain coordinates onto network coordinates by
/// aligning panel 0's frame (center, first-hinge direction, normal).
pub fn alignment_to_network(
    strip: &Strip,
    network: &PanelNetwork,
) -> Result<impl Fn(Point3<f64>) -> Point3<f64>, FoldError> {
    let p0 = network.panel(strip.order[0]);
    let mid = network
        .edge_midpoint(strip.order[0], strip.hinges[0])
        .ok_or_else(|| FoldError::InfeasiblePlacement("first hinge not on panel".into()))?;
    let out_world = (mid - p0.center).normalize();
    let n_world = p0.normal;
    let e_world = n_world.cross(&out_world);
    // Chain frame of panel 0: out +x, binormal +y, normal +z at origin.
    let rot = nalgebra::Matrix3::from_columns(&[out_world, e_world, n_world]);
    let center = p0.center;
    Ok(move |p: Point3<f64>| center + rot * p.coords)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::panel::build_panel_network;
    use crate::stack::{assign_uniform_plan, break_cycle, stack_forward_kinematics};
    use crate::stripify::{find_hamiltonian_cycle, SolveConfig};
    use crate::voxel::{extract_outer_shell, VoxelGrid};
    use std::f64::consts::{FRAC_PI_2, PI, SQRT_2};

    fn network_of(cells: &[[i64; 3]], t: f64) -> PanelNetwork {
        let grid = VoxelGrid::from_cells(cells, 1.0);
        let faces = extract_outer_shell(&grid).unwrap();
        build_panel_network(&grid, &faces, 1.0, t).unwrap()
    }

    #[test]
    fn hinge_law_boundary_values() {
        let t = 0.37;
        assert!((hinge_length(0.0, t).unwrap() - t).abs() < 1e-12 * t);
        assert!((hinge_length(FRAC_PI_2, t).unwrap() - SQRT_2 * t / 2.0).abs() < 1e-12 * t);
        assert!((hinge_length(-FRAC_PI_2, t).unwrap() - SQRT_2 * t / 2.0).abs() < 1e-12 * t);
        assert!((hinge_length(PI, t).unwrap() - t).abs() < 1e-12 * t);
        assert!((hinge_length(-PI, t).unwrap() - t).abs() < 1e-12 * t);
        assert!((hinge_length(PI / 3.0, 1.0).unwrap() - (PI / 6.0).cos()).abs() < 1e-12);
        assert!(hinge_length(3.5, 1.0).is_err());
    }

    #[test]
    fn hinge_law_bounds_symmetry_continuity() {
        let t = 1.0;
        let lo = SQRT_2 / 2.0;
        for i in 0..=10_000 {
            let theta = -PI + 2.0 * PI * (i as f64) / 10_000.0;
            let h = hinge_length(theta, t).unwrap();
            assert!(h >= lo - 1e-12 && h <= t + 1e-12, "theta={theta} h={h}");
            let hm = hinge_length(-theta, t).unwrap();
            assert!((h - hm).abs() < 1e-12, "symmetry at {theta}");
            // Linearity in t.
            let h3 = hinge_length(theta, 3.0).unwrap();
            assert!((h3 - 3.0 * h).abs() < 1e-12);
        }
        let eps = 1e-7;
        let gap = (hinge_length(FRAC_PI_2 - eps, t).unwrap()
            - hinge_length(FRAC_PI_2 + eps, t).unwrap())
        .abs();
        assert!(gap <= 1e-6 * t, "continuity gap {gap}");
        // Strictly increasing on the stacking branch.
        let mut prev = hinge_length(FRAC_PI_2, t).unwrap();
        for i in 1..=1000 {
            let theta = FRAC_PI_2 + (PI - FRAC_PI_2) * (i as f64) / 1000.0;
            let h = hinge_length(theta, t).unwrap();
            assert!(h > prev, "monotone at {theta}");
            prev = h;
        }
    }

    #[test]
    fn flat_strip_is_collinear() {
        let strip = Strip {
            order: (0..4).collect(),
            hinges: (0..3).collect(),
            turns: vec![Turn::Straight; 4],
            break_index: 0,
        };
        let config = FoldConfiguration::new(vec![0.0; 3], 1.0, 0.1).unwrap();
        let pose = strip_fk(&strip, &config).unwrap();
        for (i, f) in pose.frames.iter().enumerate() {
            assert!((f.center - Point3::new(i as f64, 0.0, 0.0)).norm() < 1e-12);
            assert!((f.normal - Vector3::z()).norm() < 1e-12);
        }
    }

    #[test]
    fn stacked_pair_separation_is_thickness() {
        let strip = Strip {
            order: vec![0, 1],
            hinges: vec![0],
            turns: vec![Turn::Straight; 2],
            break_index: 0,
        };
        let t = 0.1;
        let config = FoldConfiguration::new(vec![PI], 1.0, t).unwrap();
        let pose = strip_fk(&strip, &config).unwrap();
        let delta = pose.frames[1].center - pose.frames[0].center;
        assert!((delta.norm() - t).abs() < 1e-12, "plane separation t");
        assert!((delta.normalize().dot(&Vector3::z()).abs() - 1.0).abs() < 1e-12);

        let slabs = thick_geometry(&pose, 1.0, t);
        // Slabs occupy [-t/2, t/2] and [t/2, 3t/2] along z: touching.
        let z0 = slabs.slabs[0].center.z;
        let z1 = slabs.slabs[1].center.z;
        assert!(((z1 - z0).abs() - t).abs() < 1e-12);
        match check_disjoint(&slabs, 1e-6) {
            DisjointReport::Disjoint { max_penetration } => {
                assert!(max_penetration <= 1e-9, "touching, not overlapping");
            }
            DisjointReport::Colliding(c) => panic!("stacked pair collides: {c:?}"),
        }
    }

    #[test]
    fn cube_folded_state_reproduces_face_centers() {
        let t = 0.1;
        let net = network_of(&[[0, 0, 0]], t);
        let cycle = find_hamiltonian_cycle(&net, &SolveConfig::default()).unwrap();
        let strip = break_cycle(&cycle, &net, 0).unwrap();
        let dev = deployed_deviation(&strip, &net, t).unwrap();
        assert!(dev < 1e-9, "folding stage is exact, got deviation {dev}");
    }

    #[test]
    fn folded_corner_slabs_stay_clear() {
        let t = 0.3;
        let net = network_of(&[[0, 0, 0]], t);
        let cycle = find_hamiltonian_cycle(&net, &SolveConfig::default()).unwrap();
        let strip = break_cycle(&cycle, &net, 0).unwrap();
        let config = folded_configuration(&strip, &net).unwrap();
        let pose = strip_fk(&strip, &config).unwrap();
        let slabs = thick_geometry(&pose, 1.0, t);
        match check_disjoint(&slabs, 1e-6) {
            DisjointReport::Disjoint { .. } => {}
            DisjointReport::Colliding(c) => panic!("folded cube collides: {c:?}"),
        }
    }

    #[test]
    fn flat_configuration_slabs_coplanar() {
        let strip = Strip {
            order: (0..3).collect(),
            hinges: (0..2).collect(),
            turns: vec![Turn::Straight; 3],
            break_index: 0,
        };
        let config = FoldConfiguration::new(vec![0.0; 2], 1.0, 0.1).unwrap();
        let pose = strip_fk(&strip, &config).unwrap();
        let slabs = thick_geometry(&pose, 1.0, 0.1);
        for s in &slabs.slabs {
            let top = s.center.z + 0.05;
            let bottom = s.center.z - 0.05;
            assert!((top - 0.05).abs() < 1e-12 && (bottom + 0.05).abs() < 1e-12);
        }
        assert!(matches!(
            check_disjoint(&slabs, 1e-6),
            DisjointReport::Disjoint { .. }
        ));
    }

    #[test]
    fn overlapping_slabs_are_reported() {
        let b = OrientedBox {
            center: Point3::origin(),
            axes: [Vector3::x(), Vector3::y(), Vector3::z()],
            half: [0.4, 0.4, 0.05],
        };
        let slabs = SlabSet {
            slabs: vec![b, b],
            connectors: vec![],
            edge_length: 1.0,
            thickness: 0.1,
        };
        match check_disjoint(&slabs, 1e-6) {
            DisjointReport::Colliding(pairs) => {
                assert_eq!(pairs.len(), 1);
                assert_eq!((pairs[0].a, pairs[0].b), (0, 1));
            }
            other => panic!("expected collision, got {other:?}"),
        }
    }

    #[test]
    fn interpolation_endpoints_and_midpoint() {
        let from = FoldConfiguration::new(vec![0.0, 0.0], 1.0, 0.1).unwrap();
        let to = FoldConfiguration::new(vec![PI, -PI], 1.0, 0.1).unwrap();
        assert_eq!(
            interpolate_configuration(&from, &to, 0.0).unwrap().angles(),
            from.angles()
        );
        assert_eq!(
            interpolate_configuration(&from, &to, 1.0).unwrap().angles(),
            to.angles()
        );
        let mid = interpolate_configuration(&from, &to, 0.5).unwrap();
        assert!((mid.angles()[0] - FRAC_PI_2).abs() < 1e-12);
        assert!((mid.angles()[1] + FRAC_PI_2).abs() < 1e-12);
    }

    #[test]
    fn stacked_angles_round_trip_through_fk() {
        let t = 0.1;
        let net = network_of(&[[0, 0, 0]], t);
        let cycle = find_hamiltonian_cycle(&net, &SolveConfig::default()).unwrap();
        let strip = break_cycle(&cycle, &net, 0).unwrap();

        for k in [1usize, 2] {
            let plan = assign_uniform_plan(6, k);
            let placement = stack_forward_kinematics(&strip, &plan).unwrap();
            let config = angles_for_placement(&strip, &placement, &net).unwrap();
            if k == 1 {
                assert!(config.angles().iter().all(|a| a.abs() == PI));
            } else {
                let zeros = config.angles().iter().filter(|a| **a == 0.0).count();
                assert_eq!(zeros, 1, "one lateral hinge in a (3,3) stacking");
            }
            let pose = strip_fk(&strip, &config).unwrap();
            for (i, f) in pose.frames.iter().enumerate() {
                let p = &placement.panels[i];
                let expect = Point3::new(p.cell.0 as f64 * 1.0, p.cell.1 as f64 * 1.0, p.level as f64 * t);
                assert!(
                    (f.center - expect).norm() < 1e-9,
                    "panel {i}: fk {:?} vs cells {:?}",
                    f.center,
                    expect
                );
                let up = f.normal.z > 0.0;
                assert_eq!(up, p.face_up, "face parity at {i}");
            }
            let slabs = thick_geometry(&pose, 1.0, t);
            assert!(matches!(
                check_disjoint(&slabs, 1e-6),
                DisjointReport::Disjoint { .. }
            ));
        }
    }

    #[test]
    fn flat_placement_has_zero_angles() {
        let t = 0.1;
        let net = network_of(&[[0, 0, 0]], t);
        let cycle = find_hamiltonian_cycle(&net, &SolveConfig::default()).unwrap();
        let strip = break_cycle(&cycle, &net, 0).unwrap();
        let plan = assign_uniform_plan(6, 6);
        let placement = stack_forward_kinematics(&strip, &plan).unwrap();
        let config = angles_for_placement(&strip, &placement, &net).unwrap();
        assert!(config.angles().iter().all(|&a| a == 0.0));
    }

    #[test]
    fn zero_thickness_limit_matches_ideal_chain() {
        let t = 1e-9;
        let net = network_of(&[[0, 0, 0], [1, 0, 0]], t);
        let cycle = find_hamiltonian_cycle(&net, &SolveConfig::default()).unwrap();
        let strip = break_cycle(&cycle, &net, 0).unwrap();
        let dev = deployed_deviation(&strip, &net, t).unwrap();
        assert!(dev < 1e-9, "t -> 0 limit deviation {dev}");
    }
}
