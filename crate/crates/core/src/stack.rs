//! Breaking the cycle into strips and stacking strips into piles.
//!
//! Stacking is planned on a discrete frame: each panel occupies a 2D
//! footprint cell and an integer level (slab `[z*t, (z+1)*t)`). Between
//! consecutive strip panels there is exactly one move: above or below
//! (same cell, level +-1) inside a pile, or lateral (adjacent cell, same
//! level) at a pile boundary. The world direction of a lateral move is
//! dictated by the accumulated frame and the hinge's edge, not chosen.
//! Piles alternate uphill/downhill; a downhill pile must return exactly
//! to level 0, and only a trailing uphill pile may have a free height.

use crate::panel::PanelNetwork;
use crate::stripify::StripCycle;
use thiserror::Error;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Debug, Error, PartialEq)]
pub enum StackError {
    #[error("break index {0} out of range for cycle of length {1}")]
    IndexOutOfRange(usize, usize),
    #[error("height delta {m} must be positive and below the base height {h}")]
    DeltaTooLarge { m: usize, h: usize },
    #[error("plan heights sum to {got}, strip has {expected} panels")]
    PlanSumMismatch { expected: usize, got: usize },
    #[error("stacking infeasible: {0}")]
    Infeasible(InfeasibleReason),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InfeasibleReason {
    /// A below move would push the level under 0.
    NegativeLevel { hinge: usize },
    /// A lateral move into an uphill pile away from the base level.
    LateralOffBase { hinge: usize },
    /// The strip ends mid-descent: the final downhill pile does not
    /// return to level 0.
    UnfinishedDescent { level: i32 },
}

impl std::fmt::Display for InfeasibleReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            InfeasibleReason::NegativeLevel { hinge } => {
                write!(f, "level would go negative at hinge {hinge}")
            }
            InfeasibleReason::LateralOffBase { hinge } => {
                write!(f, "lateral move at hinge {hinge} requires base level 0")
            }
            InfeasibleReason::UnfinishedDescent { level } => {
                write!(f, "final downhill pile ends at level {level}, not 0")
            }
        }
    }
}

/// In-panel relation between the incoming and outgoing hinge edges.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Turn {
    Straight,
    Left,
    Right,
}

impl Turn {
    pub fn label(self) -> &'static str {
        match self {
            Turn::Straight => "straight",
            Turn::Left => "left",
            Turn::Right => "right",
        }
    }

    pub fn from_label(s: &str) -> Option<Turn> {
        Some(match s {
            "straight" => Turn::Straight,
            "left" => Turn::Left,
            "right" => Turn::Right,
            _ => return None,
        })
    }
}

/// Axis-aligned direction in the 2D footprint lattice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GridDir {
    PosX,
    NegX,
    PosY,
    NegY,
}

impl GridDir {
    pub fn offset(self) -> (i32, i32) {
        match self {
            GridDir::PosX => (1, 0),
            GridDir::NegX => (-1, 0),
            GridDir::PosY => (0, 1),
            GridDir::NegY => (0, -1),
        }
    }

    pub fn opposite(self) -> GridDir {
        match self {
            GridDir::PosX => GridDir::NegX,
            GridDir::NegX => GridDir::PosX,
            GridDir::PosY => GridDir::NegY,
            GridDir::NegY => GridDir::PosY,
        }
    }

    /// Counterclockwise quarter turn (viewed from +z).
    pub fn ccw(self) -> GridDir {
        match self {
            GridDir::PosX => GridDir::PosY,
            GridDir::PosY => GridDir::NegX,
            GridDir::NegX => GridDir::NegY,
            GridDir::NegY => GridDir::PosX,
        }
    }

    pub fn cw(self) -> GridDir {
        self.ccw().opposite()
    }

    pub fn label(self) -> &'static str {
        match self {
            GridDir::PosX => "+x",
            GridDir::NegX => "-x",
            GridDir::PosY => "+y",
            GridDir::NegY => "-y",
        }
    }

    pub fn from_label(s: &str) -> Option<GridDir> {
        Some(match s {
            "+x" => GridDir::PosX,
            "-x" => GridDir::NegX,
            "+y" => GridDir::PosY,
            "-y" => GridDir::NegY,
            _ => return None,
        })
    }
}

/// A cycle broken at one hinge: an open run of panels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Strip {
    /// Panel ids along the strip.
    pub order: Vec<usize>,
    /// Shared-edge ids; `hinges[i]` joins `order[i]` and `order[i + 1]`.
    pub hinges: Vec<usize>,
    /// Turn relation at each panel; entries 0 and n-1 are unused
    /// placeholders since end panels have only one hinge.
    pub turns: Vec<Turn>,
    /// Which cycle hinge was removed.
    pub break_index: usize,
}

impl Strip {
    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }
}

/// Turn relation at a panel given its in and out hinge edges, computed
/// from the panel frame: tangents toward both edge midpoints and the
/// outward normal.
fn turn_at(network: &PanelNetwork, panel: usize, edge_in: usize, edge_out: usize) -> Turn {
    let p = network.panel(panel);
    let slot_of = |edge: usize| {
        network
            .neighbors(panel)
            .iter()
            .position(|n| n.edge == edge)
            .expect("hinge edge belongs to panel")
    };
    let t_in = p.face_dir.tangents()[slot_of(edge_in)].unit();
    let t_out = p.face_dir.tangents()[slot_of(edge_out)].unit();
    let travel = -t_in;
    if (t_out - travel).norm() < 1e-9 {
        Turn::Straight
    } else if (t_out - p.normal.cross(&travel)).norm() < 1e-9 {
        Turn::Left
    } else {
        Turn::Right
    }
}

/// Removes the hinge at `index` and recomputes per-panel turn relations.
pub fn break_cycle(
    cycle: &StripCycle,
    network: &PanelNetwork,
    index: usize,
) -> Result<Strip, StackError> {
    let n = cycle.order.len();
    if index >= n {
        return Err(StackError::IndexOutOfRange(index, n));
    }
    let mut order = Vec::with_capacity(n);
    let mut hinges = Vec::with_capacity(n - 1);
    for i in 0..n {
        order.push(cycle.order[(index + 1 + i) % n]);
        if i < n - 1 {
            hinges.push(cycle.hinges[(index + 1 + i) % n]);
        }
    }
    let mut turns = vec![Turn::Straight; n];
    for i in 1..n - 1 {
        turns[i] = turn_at(network, order[i], hinges[i - 1], hinges[i]);
    }
    Ok(Strip {
        order,
        hinges,
        turns,
        break_index: index,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlanKind {
    Uniform,
    NonUniform,
}

/// Pile-height program: positive heights summing to the panel count.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StackPlan {
    pub kind: PlanKind,
    pub pile_heights: Vec<usize>,
}

impl StackPlan {
    pub fn pile_count(&self) -> usize {
        self.pile_heights.len()
    }

    pub fn total(&self) -> usize {
        self.pile_heights.iter().sum()
    }
}

/// Uniform plan: heights of ceil(n/k) with the last pile holding the
/// remainder; empty trailing piles are dropped.
pub fn assign_uniform_plan(n: usize, k: usize) -> StackPlan {
    let k = k.clamp(1, n.max(1));
    let h = n.div_ceil(k);
    let mut heights = Vec::new();
    let mut remaining = n;
    while remaining > 0 {
        let take = h.min(remaining);
        heights.push(take);
        remaining -= take;
    }
    StackPlan {
        kind: PlanKind::Uniform,
        pile_heights: heights,
    }
}

/// Lazily enumerates non-uniform plans: for each delta in `1..=m`, every
/// uphill/downhill pair height is drawn from `{h, h+delta, h-delta}`
/// excluding the all-`h` choice; the final pile absorbs the remainder and
/// candidates whose remainder drops below 1 are skipped.
pub fn enumerate_nonuniform_plans(
    n: usize,
    k: usize,
    m: usize,
) -> Result<impl Iterator<Item = StackPlan>, StackError> {
    let h = n.div_ceil(k.max(1));
    if m == 0 || m >= h {
        return Err(StackError::DeltaTooLarge { m, h });
    }
    let pairs = k / 2;
    let combos: u64 = 3u64.pow(pairs.min(32) as u32);
    let iter = (1..=m).flat_map(move |delta| {
        (0..combos).filter_map(move |mut code| {
            let mut pair_heights = Vec::with_capacity(pairs);
            let mut all_h = true;
            for _ in 0..pairs {
                let choice = (code % 3) as i64;
                code /= 3;
                let g = match choice {
                    0 => h as i64,
                    1 => h as i64 + delta as i64,
                    _ => h as i64 - delta as i64,
                };
                if choice != 0 {
                    all_h = false;
                }
                if g < 1 {
                    return None;
                }
                pair_heights.push(g as usize);
            }
            if all_h {
                return None;
            }
            let mut heights = Vec::with_capacity(k);
            for &g in &pair_heights {
                heights.push(g);
                heights.push(g);
            }
            if k % 2 == 1 {
                heights.push(0);
            }
            let fixed: usize = heights[..k - 1].iter().sum();
            let last = n as i64 - fixed as i64;
            if last < 1 {
                return None;
            }
            heights[k - 1] = last as usize;
            Some(StackPlan {
                kind: PlanKind::NonUniform,
                pile_heights: heights,
            })
        })
    });
    Ok(iter)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MoveKind {
    Above,
    Below,
    Lateral,
}

impl MoveKind {
    pub fn label(self) -> &'static str {
        match self {
            MoveKind::Above => "above",
            MoveKind::Below => "below",
            MoveKind::Lateral => "lateral",
        }
    }

    pub fn from_label(s: &str) -> Option<MoveKind> {
        Some(match s {
            "above" => MoveKind::Above,
            "below" => MoveKind::Below,
            "lateral" => MoveKind::Lateral,
            _ => return None,
        })
    }
}

/// World move across one hinge: the kind plus the side of the cell the
/// hinge edge sits on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StackMove {
    pub kind: MoveKind,
    pub side: GridDir,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PanelPlacement {
    pub cell: (i32, i32),
    pub level: i32,
    pub face_up: bool,
}

/// Discrete placement of every strip panel plus the per-hinge moves.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StackedPlacement {
    pub panels: Vec<PanelPlacement>,
    pub moves: Vec<StackMove>,
}

impl StackedPlacement {
    pub fn max_level(&self) -> i32 {
        self.panels.iter().map(|p| p.level).max().unwrap_or(0)
    }

    /// Footprint cell counts (width, depth) of the occupied bounding box.
    pub fn footprint(&self) -> (u32, u32) {
        let xs: Vec<i32> = self.panels.iter().map(|p| p.cell.0).collect();
        let ys: Vec<i32> = self.panels.iter().map(|p| p.cell.1).collect();
        let w = (xs.iter().max().unwrap() - xs.iter().min().unwrap() + 1) as u32;
        let d = (ys.iter().max().unwrap() - ys.iter().min().unwrap() + 1) as u32;
        (w, d)
    }
}

/// Out-side of a panel in the stacked frame.
fn out_side(turn: Turn, travel: GridDir, face_up: bool) -> GridDir {
    match turn {
        Turn::Straight => travel,
        Turn::Left => {
            if face_up {
                travel.ccw()
            } else {
                travel.cw()
            }
        }
        Turn::Right => {
            if face_up {
                travel.cw()
            } else {
                travel.ccw()
            }
        }
    }
}

/// Walks the strip under the plan's pile schedule. Piles alternate
/// uphill/downhill starting uphill; within a pile moves are above or
/// below over the hinge edge, at pile boundaries the move is lateral.
pub fn stack_forward_kinematics(
    strip: &Strip,
    plan: &StackPlan,
) -> Result<StackedPlacement, StackError> {
    let n = strip.len();
    if plan.total() != n {
        return Err(StackError::PlanSumMismatch {
            expected: n,
            got: plan.total(),
        });
    }

    // Move schedule: for hinge i, Some(kind) within a pile, Lateral at
    // boundaries.
    let mut kinds = Vec::with_capacity(n.saturating_sub(1));
    for (pile, &h) in plan.pile_heights.iter().enumerate() {
        let uphill = pile % 2 == 0;
        for _ in 0..h.saturating_sub(1) {
            kinds.push(if uphill { MoveKind::Above } else { MoveKind::Below });
        }
        if kinds.len() < n - 1 {
            kinds.push(MoveKind::Lateral);
        }
    }
    debug_assert_eq!(kinds.len(), n.saturating_sub(1));

    let mut panels = Vec::with_capacity(n);
    let mut moves = Vec::with_capacity(n - 1);
    let mut cell = (0i32, 0i32);
    let mut level = 0i32;
    let mut face_up = true;
    let mut travel = GridDir::NegX; // entering panel 0 against its +x out side
    panels.push(PanelPlacement {
        cell,
        level,
        face_up,
    });

    for i in 0..n - 1 {
        let side = if i == 0 {
            GridDir::PosX
        } else {
            out_side(strip.turns[i], travel, face_up)
        };
        match kinds[i] {
            MoveKind::Above => {
                level += 1;
                face_up = !face_up;
                travel = side.opposite();
            }
            MoveKind::Below => {
                level -= 1;
                if level < 0 {
                    return Err(StackError::Infeasible(InfeasibleReason::NegativeLevel {
                        hinge: i,
                    }));
                }
                face_up = !face_up;
                travel = side.opposite();
            }
            MoveKind::Lateral => {
                // A lateral into an uphill pile must happen at the base.
                let entering_uphill = {
                    // Count piles completed after this hinge.
                    let mut consumed = 0;
                    let mut pile = 0;
                    for (pi, &h) in plan.pile_heights.iter().enumerate() {
                        consumed += h;
                        if consumed > i + 1 {
                            pile = pi;
                            break;
                        }
                    }
                    pile % 2 == 0
                };
                if entering_uphill && level != 0 {
                    return Err(StackError::Infeasible(InfeasibleReason::LateralOffBase {
                        hinge: i,
                    }));
                }
                let o = side.offset();
                cell = (cell.0 + o.0, cell.1 + o.1);
                travel = side;
            }
        }
        moves.push(StackMove {
            kind: kinds[i],
            side,
        });
        panels.push(PanelPlacement {
            cell,
            level,
            face_up,
        });
    }

    // A trailing downhill pile must return to the base.
    if plan.pile_count() % 2 == 0 && level != 0 {
        return Err(StackError::Infeasible(InfeasibleReason::UnfinishedDescent {
            level,
        }));
    }
    Ok(StackedPlacement { panels, moves })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StackFeasibility {
    Feasible,
    /// Pairs of strip positions occupying the same (cell, level).
    Colliding(Vec<(usize, usize)>),
}

/// Hash-based occupancy check: feasible iff no (cell, level) slot is
/// taken twice. Expected O(n).
///
/// Open addressing with full-key comparison; the multiply hash only
/// affects probe counts, never correctness.
pub fn validate_stacking(placement: &StackedPlacement) -> StackFeasibility {
    let n = placement.panels.len();
    let capacity = (2 * n.max(4)).next_power_of_two();
    let mask = capacity - 1;
    let mut keys: Vec<(i32, i32, i32)> = vec![(i32::MIN, i32::MIN, i32::MIN); capacity];
    let mut owner: Vec<u32> = vec![u32::MAX; capacity];
    let mut collisions = Vec::new();
    for (i, p) in placement.panels.iter().enumerate() {
        let key = (p.cell.0, p.cell.1, p.level);
        let packed = (p.cell.0 as u32 as u64)
            .wrapping_mul(0x9e37_79b9_7f4a_7c15)
            ^ (p.cell.1 as u32 as u64).wrapping_mul(0xc2b2_ae3d_27d4_eb4f)
            ^ (p.level as u32 as u64).wrapping_mul(0x1656_67b1_9e37_79f9);
        let mut slot = (packed >> 32) as usize & mask;
        loop {
            if owner[slot] == u32::MAX {
                keys[slot] = key;
                owner[slot] = i as u32;
                break;
            }
            if keys[slot] == key {
                collisions.push((owner[slot] as usize, i));
                break;
            }
            slot = (slot + 1) & mask;
        }
    }
    if collisions.is_empty() {
        StackFeasibility::Feasible
    } else {
        StackFeasibility::Colliding(collisions)
    }
}

/// Achieved stacked dimensions plus the closed-form optimal compactness
/// ratio for the model.
#[derive(Debug, Clone, PartialEq)]
pub struct CompactnessReport {
    pub width: f64,
    pub depth: f64,
    pub height: f64,
    pub sum_dims: f64,
    pub compactness_ratio: f64,
    pub volume_ratio: f64,
    pub footprint: (u32, u32),
    pub height_levels: u32,
}

/// Stacked bounding box from the placement (footprint cells times `l`,
/// height levels times `t`) against the deployed model bounding box.
pub fn compactness_metrics(
    placement: &StackedPlacement,
    network: &PanelNetwork,
    mesh_bbox: [f64; 3],
) -> CompactnessReport {
    let l = network.edge_length();
    let t = network.thickness();
    let (cw, cd) = placement.footprint();
    let levels = (placement.max_level() + 1) as u32;
    let width = cw as f64 * l;
    let depth = cd as f64 * l;
    let height = levels as f64 * t;
    let faces = network.len() as f64;
    let optimal_side = (t * faces * l * l).cbrt();
    let bbox_sum = mesh_bbox[0] + mesh_bbox[1] + mesh_bbox[2];
    CompactnessReport {
        width,
        depth,
        height,
        sum_dims: width + depth + height,
        compactness_ratio: 3.0 * optimal_side / bbox_sum,
        volume_ratio: (width * depth * height) / (mesh_bbox[0] * mesh_bbox[1] * mesh_bbox[2]),
        footprint: (cw, cd),
        height_levels: levels,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Objective {
    /// Minimize W + D + H (the default).
    SumDims,
    /// Minimize the stacked bounding-box volume.
    BboxVolume,
}

#[derive(Debug, Clone)]
pub struct SearchParams {
    pub k_candidates: Vec<usize>,
    /// Max height delta for non-uniform plans.
    pub max_delta: usize,
    pub objective: Objective,
    /// Non-uniform candidates evaluated per break point.
    pub nonuniform_budget: usize,
}

impl SearchParams {
    /// Default candidate set: small pile counts plus a window around the
    /// count that balances footprint and height.
    pub fn for_strip_len(n: usize, t_over_l: f64) -> Self {
        let mut ks: Vec<usize> = (1..=8.min(n)).collect();
        let target = ((n as f64 * t_over_l).powf(2.0 / 3.0)).round() as usize;
        for k in target.saturating_sub(4)..=target + 4 {
            if k >= 1 && k <= n {
                ks.push(k);
            }
        }
        ks.sort();
        ks.dedup();
        SearchParams {
            k_candidates: ks,
            max_delta: 1,
            objective: Objective::SumDims,
            nonuniform_budget: 32,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SearchResult {
    pub strip: Strip,
    pub plan: StackPlan,
    pub placement: StackedPlacement,
    pub report: CompactnessReport,
}

/// Total order on candidates: objective, then footprint area, then break
/// index, pile count and heights. Makes the parallel reduction
/// deterministic.
type CandidateKey = (u64, u64, usize, usize, Vec<usize>);

fn objective_value(objective: Objective, report: &CompactnessReport) -> f64 {
    match objective {
        Objective::SumDims => report.sum_dims,
        Objective::BboxVolume => report.width * report.depth * report.height,
    }
}

fn candidate_key(
    objective: Objective,
    report: &CompactnessReport,
    break_index: usize,
    plan: &StackPlan,
) -> CandidateKey {
    let obj = objective_value(objective, report);
    let area = report.footprint.0 as u64 * report.footprint.1 as u64;
    (
        obj.to_bits(), // objective values are positive finite floats
        area,
        break_index,
        plan.pile_count(),
        plan.pile_heights.clone(),
    )
}

fn evaluate_break(
    cycle: &StripCycle,
    network: &PanelNetwork,
    mesh_bbox: [f64; 3],
    params: &SearchParams,
    break_index: usize,
) -> Option<(CandidateKey, SearchResult)> {
    let strip = break_cycle(cycle, network, break_index).ok()?;
    let n = strip.len();
    let mut best: Option<(CandidateKey, SearchResult)> = None;
    let consider = |plan: StackPlan, best: &mut Option<(CandidateKey, SearchResult)>| {
        let placement = match stack_forward_kinematics(&strip, &plan) {
            Ok(p) => p,
            Err(_) => return,
        };
        if validate_stacking(&placement) != StackFeasibility::Feasible {
            return;
        }
        let report = compactness_metrics(&placement, network, mesh_bbox);
        let key = candidate_key(params.objective, &report, break_index, &plan);
        if best.as_ref().map_or(true, |(k, _)| key < *k) {
            *best = Some((
                key,
                SearchResult {
                    strip: strip.clone(),
                    plan,
                    placement,
                    report,
                },
            ));
        }
    };

    for &k in &params.k_candidates {
        if k < 1 || k > n {
            continue;
        }
        consider(assign_uniform_plan(n, k), &mut best);
        if k >= 2 && params.nonuniform_budget > 0 {
            let h = n.div_ceil(k);
            if params.max_delta >= 1 && params.max_delta < h {
                if let Ok(plans) = enumerate_nonuniform_plans(n, k, params.max_delta) {
                    for plan in plans.take(params.nonuniform_budget) {
                        consider(plan, &mut best);
                    }
                }
            }
        }
    }
    best
}

/// Enumerates all break points times the plan candidates and keeps the
/// feasible placement minimizing the objective. The one-pile plan of
/// break 0 always succeeds, so the search never comes back empty.
pub fn search_compactest(
    cycle: &StripCycle,
    network: &PanelNetwork,
    mesh_bbox: [f64; 3],
    params: &SearchParams,
) -> SearchResult {
    let n = cycle.order.len();
    let breaks: Vec<usize> = (0..n).collect();

    #[cfg(feature = "parallel")]
    let best = breaks
        .par_iter()
        .filter_map(|&b| evaluate_break(cycle, network, mesh_bbox, params, b))
        .min_by(|a, b| a.0.cmp(&b.0));
    #[cfg(not(feature = "parallel"))]
    let best = breaks
        .iter()
        .filter_map(|&b| evaluate_break(cycle, network, mesh_bbox, params, b))
        .min_by(|a, b| a.0.cmp(&b.0));

    if let Some((_, result)) = best {
        return result;
    }

    // Guaranteed fallback: a single pile from break 0.
    let strip = break_cycle(cycle, network, 0).expect("cycle is non-empty");
    let plan = assign_uniform_plan(n, 1);
    let placement = stack_forward_kinematics(&strip, &plan)
        .expect("one-pile stacking is always realizable");
    let report = compactness_metrics(&placement, network, mesh_bbox);
    SearchResult {
        strip,
        plan,
        placement,
        report,
    }
}
