//! Pluripotent transformation planning: stacking several equal-face-count
//! models into one common shape and diffing their hinge connectivities.
//!
//! Panels of different models are matched positionally: after canonical
//! alignment (translate to the origin, pick the lexicographically
//! smallest of the eight lattice symmetries), the panel occupying a given
//! (cell, level) slot of model i corresponds to the panel in the same
//! slot of model j.

use crate::fold::{
    angles_for_placement, check_disjoint, deployed_deviation, folded_configuration, strip_fk,
    thick_geometry, DisjointReport, FoldError,
};
use crate::panel::PanelNetwork;
use crate::stack::{
    assign_uniform_plan, break_cycle, stack_forward_kinematics, validate_stacking, GridDir,
    MoveKind, StackFeasibility, StackPlan, StackedPlacement, Strip,
};
use crate::stripify::{find_hamiltonian_cycle, SolveConfig, StripifyError};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum TransformError {
    #[error("models have different face counts: {0:?}")]
    FaceCountMismatch(Vec<usize>),
    #[error("model {model} has no feasible stacking with footprint {footprint:?} in budget")]
    ShapeUnrealizable {
        model: usize,
        footprint: (usize, usize),
    },
    #[error("stripification failed for model {model}: {source}")]
    Stripify {
        model: usize,
        source: StripifyError,
    },
    #[error(transparent)]
    Fold(#[from] FoldError),
}

/// Occupied slot in the canonical stacked frame.
pub type Slot = (i32, i32, i32);

/// A hinge connection in the canonical stacked frame: the two slots it
/// joins plus the cell side the physical hinge edge sits on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Connection {
    pub a: Slot,
    pub b: Slot,
    pub side: GridDir,
}

/// One model's realization of the common shape.
#[derive(Debug, Clone)]
pub struct Realization {
    pub strip: Strip,
    pub plan: StackPlan,
    pub placement: StackedPlacement,
    /// Index of the lattice symmetry used for canonical alignment.
    pub symmetry: usize,
}

/// A stacked shape shared by every model, with each model's strip,
/// plan and placement realizing it.
#[derive(Debug, Clone)]
pub struct CommonStacking {
    pub shape: Vec<Slot>,
    pub realizations: Vec<Realization>,
}

/// Hinge reconfiguration between two realizations: connections to remove
/// from model i and connections to add so that model j's strip emerges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HingeDiff {
    pub disconnect: Vec<Connection>,
    pub connect: Vec<Connection>,
}

/// The eight signed axis-aligned maps of the footprint lattice.
const SYMMETRIES: [[i32; 4]; 8] = [
    [1, 0, 0, 1],   // identity
    [0, -1, 1, 0],  // rot 90
    [-1, 0, 0, -1], // rot 180
    [0, 1, -1, 0],  // rot 270
    [1, 0, 0, -1],  // mirror x
    [0, 1, 1, 0],   // mirror diagonal
    [-1, 0, 0, 1],  // mirror y
    [0, -1, -1, 0], // mirror anti-diagonal
];

fn apply_symmetry(sym: &[i32; 4], cell: (i32, i32)) -> (i32, i32) {
    (
        sym[0] * cell.0 + sym[1] * cell.1,
        sym[2] * cell.0 + sym[3] * cell.1,
    )
}

fn apply_symmetry_dir(sym: &[i32; 4], dir: GridDir) -> GridDir {
    let o = dir.offset();
    let m = apply_symmetry(sym, o);
    match m {
        (1, 0) => GridDir::PosX,
        (-1, 0) => GridDir::NegX,
        (0, 1) => GridDir::PosY,
        (0, -1) => GridDir::NegY,
        _ => unreachable!("symmetry maps axis steps to axis steps"),
    }
}

/// Canonical slot list of a placement: smallest sorted slot list over the
/// eight symmetries, translated to the origin. Returns the slots and the
/// chosen symmetry index.
fn canonical_slots(placement: &StackedPlacement) -> (Vec<Slot>, usize) {
    let mut best: Option<(Vec<Slot>, usize)> = None;
    for (si, sym) in SYMMETRIES.iter().enumerate() {
        let mut slots: Vec<Slot> = placement
            .panels
            .iter()
            .map(|p| {
                let (x, y) = apply_symmetry(sym, p.cell);
                (x, y, p.level)
            })
            .collect();
        let minx = slots.iter().map(|s| s.0).min().unwrap();
        let miny = slots.iter().map(|s| s.1).min().unwrap();
        for s in &mut slots {
            s.0 -= minx;
            s.1 -= miny;
        }
        slots.sort();
        if best.as_ref().map_or(true, |(b, _)| slots < *b) {
            best = Some((slots, si));
        }
    }
    best.unwrap()
}

/// Slot of strip position `i` under the realization's symmetry, with the
/// same translation as `canonical_slots`.
fn slot_of(placement: &StackedPlacement, symmetry: usize, i: usize) -> Slot {
    let sym = &SYMMETRIES[symmetry];
    let minx = placement
        .panels
        .iter()
        .map(|p| apply_symmetry(sym, p.cell).0)
        .min()
        .unwrap();
    let miny = placement
        .panels
        .iter()
        .map(|p| apply_symmetry(sym, p.cell).1)
        .min()
        .unwrap();
    let p = &placement.panels[i];
    let (x, y) = apply_symmetry(sym, p.cell);
    (x - minx, y - miny, p.level)
}

/// Connection set of a realization in its canonical frame.
pub fn connections_of(realization: &Realization) -> Vec<Connection> {
    let sym = &SYMMETRIES[realization.symmetry];
    let n = realization.placement.panels.len();
    let mut out = Vec::with_capacity(n.saturating_sub(1));
    for i in 0..n - 1 {
        let a = slot_of(&realization.placement, realization.symmetry, i);
        let b = slot_of(&realization.placement, realization.symmetry, i + 1);
        let mv = realization.placement.moves[i];
        let side = match mv.kind {
            // Lateral hinges sit on the boundary between the two cells;
            // normalize to the direction from the smaller slot.
            MoveKind::Lateral => {
                let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
                match (hi.0 - lo.0, hi.1 - lo.1) {
                    (1, 0) => GridDir::PosX,
                    (-1, 0) => GridDir::NegX,
                    (0, 1) => GridDir::PosY,
                    (0, -1) => GridDir::NegY,
                    _ => unreachable!("lateral moves step one cell"),
                }
            }
            _ => apply_symmetry_dir(sym, mv.side),
        };
        let (a, b) = if a <= b { (a, b) } else { (b, a) };
        out.push(Connection { a, b, side });
    }
    out.sort();
    out
}

fn one_pile_realization(
    network: &PanelNetwork,
    cycle: &crate::stripify::StripCycle,
) -> Realization {
    let n = network.len();
    let strip = break_cycle(cycle, network, 0).expect("cycle is non-empty");
    let plan = assign_uniform_plan(n, 1);
    let placement = stack_forward_kinematics(&strip, &plan)
        .expect("one-pile stacking is always realizable");
    let (_, symmetry) = canonical_slots(&placement);
    Realization {
        strip,
        plan,
        placement,
        symmetry,
    }
}

/// Finds one stacked shape that every model can realize. The default
/// footprint is a single column, which always exists; larger footprints
/// are searched per model within a break-point budget and fail with
/// `ShapeUnrealizable` when no placement matches the canonical shape.
pub fn common_stacking(
    models: &[&PanelNetwork],
    footprint: Option<(usize, usize)>,
    solve: &SolveConfig,
) -> Result<CommonStacking, TransformError> {
    let counts: Vec<usize> = models.iter().map(|m| m.len()).collect();
    if counts.windows(2).any(|w| w[0] != w[1]) {
        return Err(TransformError::FaceCountMismatch(counts));
    }
    let cycles: Vec<_> = models
        .iter()
        .enumerate()
        .map(|(model, net)| {
            find_hamiltonian_cycle(net, solve)
                .map_err(|source| TransformError::Stripify { model, source })
        })
        .collect::<Result<Vec<_>, _>>()?;

    match footprint {
        None | Some((1, 1)) => {
            let realizations: Vec<Realization> = models
                .iter()
                .zip(&cycles)
                .map(|(net, cycle)| one_pile_realization(net, cycle))
                .collect();
            let (shape, _) = canonical_slots(&realizations[0].placement);
            Ok(CommonStacking {
                shape,
                realizations,
            })
        }
        Some((p, q)) => {
            let k = p * q;
            let mut shape: Option<Vec<Slot>> = None;
            let mut realizations = Vec::with_capacity(models.len());
            for (model, (net, cycle)) in models.iter().zip(&cycles).enumerate() {
                let n = net.len();
                let mut found = None;
                for b in 0..n {
                    let strip = match break_cycle(cycle, net, b) {
                        Ok(s) => s,
                        Err(_) => continue,
                    };
                    let plan = assign_uniform_plan(n, k);
                    let placement = match stack_forward_kinematics(&strip, &plan) {
                        Ok(p) => p,
                        Err(_) => continue,
                    };
                    if validate_stacking(&placement) != StackFeasibility::Feasible {
                        continue;
                    }
                    let (w, d) = placement.footprint();
                    let mut dims = [w as usize, d as usize];
                    dims.sort();
                    let mut want = [p, q];
                    want.sort();
                    if dims != want {
                        continue;
                    }
                    let (slots, symmetry) = canonical_slots(&placement);
                    match &shape {
                        None => {
                            shape = Some(slots);
                            found = Some(Realization {
                                strip,
                                plan,
                                placement,
                                symmetry,
                            });
                            break;
                        }
                        Some(target) if *target == slots => {
                            found = Some(Realization {
                                strip,
                                plan,
                                placement,
                                symmetry,
                            });
                            break;
                        }
                        Some(_) => continue,
                    }
                }
                match found {
                    Some(r) => realizations.push(r),
                    None => {
                        return Err(TransformError::ShapeUnrealizable {
                            model,
                            footprint: (p, q),
                        })
                    }
                }
            }
            Ok(CommonStacking {
                shape: shape.expect("first model set the shape"),
                realizations,
            })
        }
    }
}

/// Connections present in model i's strip but not j's, and vice versa,
/// under the positional correspondence.
pub fn hinge_diff(cs: &CommonStacking, i: usize, j: usize) -> HingeDiff {
    let ci = connections_of(&cs.realizations[i]);
    let cj = connections_of(&cs.realizations[j]);
    let si: std::collections::BTreeSet<Connection> = ci.into_iter().collect();
    let sj: std::collections::BTreeSet<Connection> = cj.into_iter().collect();
    HingeDiff {
        disconnect: si.difference(&sj).copied().collect(),
        connect: sj.difference(&si).copied().collect(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum TransformCheck {
    Ok,
    /// The reconfigured connection set does not reproduce model j's
    /// connectivity; carries the first mismatched connection.
    ConnectivityMismatch(Connection),
    /// A fold endpoint self-intersects.
    EndpointCollision { model: usize, stage: &'static str },
    /// Unfolding model j does not reproduce its voxel shell.
    ShellDeviation { deviation: f64, allowed: f64 },
}

/// End-to-end check: fold model i to the common shape with disjoint
/// slabs at both endpoints, apply the hinge diff, and unfold along model
/// j's angles back onto model j's voxel shell.
pub fn verify_transform(
    cs: &CommonStacking,
    networks: &[&PanelNetwork],
    i: usize,
    j: usize,
) -> Result<TransformCheck, TransformError> {
    verify_with_diff(cs, networks, i, j, &hinge_diff(cs, i, j))
}

/// Like [`verify_transform`] but with an explicit diff, so corrupted
/// reconfigurations can be detected.
pub fn verify_with_diff(
    cs: &CommonStacking,
    networks: &[&PanelNetwork],
    i: usize,
    j: usize,
    diff: &HingeDiff,
) -> Result<TransformCheck, TransformError> {
    let ri = &cs.realizations[i];
    let rj = &cs.realizations[j];

    // Reconfigure: connections(i) minus disconnect plus connect must be
    // exactly connections(j).
    let mut set: std::collections::BTreeSet<Connection> =
        connections_of(ri).into_iter().collect();
    for c in &diff.disconnect {
        set.remove(c);
    }
    for c in &diff.connect {
        set.insert(*c);
    }
    let target: std::collections::BTreeSet<Connection> =
        connections_of(rj).into_iter().collect();
    if set != target {
        let first = set
            .symmetric_difference(&target)
            .next()
            .copied()
            .expect("sets differ");
        return Ok(TransformCheck::ConnectivityMismatch(first));
    }

    // Model i folds to the common shape with self-intersection-free
    // endpoints.
    let net_i = networks[i];
    let folded = folded_configuration(&ri.strip, net_i)?;
    let pose = strip_fk(&ri.strip, &folded)?;
    let tol = 1e-6 * net_i.edge_length();
    if let DisjointReport::Colliding(_) =
        check_disjoint(&thick_geometry(&pose, net_i.edge_length(), net_i.thickness()), tol)
    {
        return Ok(TransformCheck::EndpointCollision {
            model: i,
            stage: "deployed",
        });
    }
    let stacked = angles_for_placement(&ri.strip, &ri.placement, net_i)?;
    let pose = strip_fk(&ri.strip, &stacked)?;
    if let DisjointReport::Colliding(_) =
        check_disjoint(&thick_geometry(&pose, net_i.edge_length(), net_i.thickness()), tol)
    {
        return Ok(TransformCheck::EndpointCollision {
            model: i,
            stage: "stacked",
        });
    }

    // Unfold along model j's angles and land on its voxel shell.
    let net_j = networks[j];
    let deviation = deployed_deviation(&rj.strip, net_j, net_j.thickness())?;
    let allowed = 2.0 * net_j.thickness();
    if deviation > allowed {
        return Ok(TransformCheck::ShellDeviation { deviation, allowed });
    }
    Ok(TransformCheck::Ok)
}
