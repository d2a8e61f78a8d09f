//! Plan files: canonical structured text carrying the pipeline state.
//!
//! Sections appear in a fixed order with sorted keys and fixed decimal
//! formatting, so serializing a parsed file reproduces it byte for byte.
//! A plan grows through the pipeline: `[params]` and `[panels]` after
//! voxelization, `[cycle]` after stripification, and the strip, stack,
//! placement, move and angle sections after stacking.

use crate::panel::{build_panel_network, PanelNetwork};
use crate::stack::{
    GridDir, MoveKind, PanelPlacement, PlanKind, StackMove, StackPlan, StackedPlacement, Strip,
    Turn,
};
use crate::stripify::StripCycle;
use crate::transform::{CommonStacking, Connection, HingeDiff, Realization, Slot};
use crate::voxel::{extract_outer_shell, Cell, FaceDir, VoxelGrid};
use std::fmt::Write as _;
use thiserror::Error;

pub const PLAN_HEADER: &str = "stackfold-plan v1";
pub const TRANSFORM_HEADER: &str = "stackfold-transform v1";

#[derive(Debug, Error, PartialEq)]
pub enum PlanError {
    #[error("schema error at {path}: {message}")]
    SchemaError { path: String, message: String },
}

fn schema(path: impl Into<String>, message: impl Into<String>) -> PlanError {
    PlanError::SchemaError {
        path: path.into(),
        message: message.into(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlanParams {
    pub edge_length: f64,
    pub thickness: f64,
    pub resolution: u32,
    pub seed: u64,
    /// Deployed model bounding box (width, depth, height).
    pub bbox: [f64; 3],
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlanFile {
    pub params: PlanParams,
    pub panels: Vec<(Cell, FaceDir)>,
    pub cycle: Option<StripCycle>,
    pub break_index: Option<usize>,
    pub turns: Option<Vec<Turn>>,
    pub stack: Option<StackPlan>,
    pub placement: Option<StackedPlacement>,
    pub angles_folded: Option<Vec<f64>>,
    pub angles_stacked: Option<Vec<f64>>,
}

fn fmt_f(x: f64) -> String {
    let x = if x == 0.0 { 0.0 } else { x };
    format!("{x:.9}")
}

impl PlanFile {
    pub fn new(params: PlanParams, panels: Vec<(Cell, FaceDir)>) -> Self {
        PlanFile {
            params,
            panels,
            cycle: None,
            break_index: None,
            turns: None,
            stack: None,
            placement: None,
            angles_folded: None,
            angles_stacked: None,
        }
    }

    /// Rebuilds the panel network from the panel table. The owning cells
    /// of the shell faces are enough to re-run adjacency resolution.
    pub fn network(&self) -> Result<PanelNetwork, PlanError> {
        let mut cells: Vec<Cell> = self.panels.iter().map(|&(c, _)| c).collect();
        cells.sort();
        cells.dedup();
        let grid = VoxelGrid::from_cells(&cells, 1.0);
        let faces = extract_outer_shell(&grid)
            .map_err(|e| schema("panels", format!("panel table is not a shell: {e}")))?;
        if faces != self.panels {
            return Err(schema(
                "panels",
                "panel table does not match the shell of its own cells",
            ));
        }
        build_panel_network(&grid, &faces, self.params.edge_length, self.params.thickness)
            .map_err(|e| schema("panels", e.to_string()))
    }

    /// Rebuilds the strip from the cycle plus break index and checks the
    /// stored turn table.
    pub fn strip(&self, network: &PanelNetwork) -> Result<Strip, PlanError> {
        let cycle = self
            .cycle
            .as_ref()
            .ok_or_else(|| schema("cycle", "missing cycle section"))?;
        let break_index = self
            .break_index
            .ok_or_else(|| schema("strip.break_index", "missing strip section"))?;
        let strip = crate::stack::break_cycle(cycle, network, break_index)
            .map_err(|e| schema("strip.break_index", e.to_string()))?;
        if let Some(turns) = &self.turns {
            if *turns != strip.turns {
                return Err(schema("strip.turns", "stored turns do not match geometry"));
            }
        }
        Ok(strip)
    }

    pub fn serialize(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{PLAN_HEADER}");
        let _ = writeln!(s, "[params]");
        let _ = writeln!(
            s,
            "bbox = {} {} {}",
            fmt_f(self.params.bbox[0]),
            fmt_f(self.params.bbox[1]),
            fmt_f(self.params.bbox[2])
        );
        let _ = writeln!(s, "edge_length = {}", fmt_f(self.params.edge_length));
        let _ = writeln!(s, "resolution = {}", self.params.resolution);
        let _ = writeln!(s, "seed = {}", self.params.seed);
        let _ = writeln!(s, "thickness = {}", fmt_f(self.params.thickness));
        write_panels(&mut s, "panels", &self.panels);
        if let Some(cycle) = &self.cycle {
            let _ = writeln!(s, "[cycle]");
            let _ = writeln!(s, "hinges = {}", join_usize(&cycle.hinges));
            let _ = writeln!(s, "order = {}", join_usize(&cycle.order));
        }
        if let Some(b) = self.break_index {
            let _ = writeln!(s, "[strip]");
            let _ = writeln!(s, "break_index = {b}");
            if let Some(turns) = &self.turns {
                let labels: Vec<&str> = turns.iter().map(|t| t.label()).collect();
                let _ = writeln!(s, "turns = {}", labels.join(" "));
            }
        }
        if let Some(stack) = &self.stack {
            let _ = writeln!(s, "[stack]");
            let _ = writeln!(s, "heights = {}", join_usize(&stack.pile_heights));
            let _ = writeln!(
                s,
                "kind = {}",
                match stack.kind {
                    PlanKind::Uniform => "uniform",
                    PlanKind::NonUniform => "nonuniform",
                }
            );
        }
        if let Some(placement) = &self.placement {
            write_placement(&mut s, "placement", "moves", placement);
        }
        if let Some(angles) = &self.angles_folded {
            let _ = writeln!(s, "[angles_folded]");
            let _ = writeln!(s, "{}", join_f64(angles));
        }
        if let Some(angles) = &self.angles_stacked {
            let _ = writeln!(s, "[angles_stacked]");
            let _ = writeln!(s, "{}", join_f64(angles));
        }
        s
    }

    pub fn parse(text: &str) -> Result<PlanFile, PlanError> {
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| schema("header", "empty file"))?;
        if header != PLAN_HEADER {
            return Err(schema(
                "header",
                format!("unknown header {header:?}; supported: {PLAN_HEADER:?}"),
            ));
        }
        let sections = split_sections(lines)?;

        let mut params: Option<PlanParams> = None;
        let mut panels: Option<Vec<(Cell, FaceDir)>> = None;
        let mut cycle = None;
        let mut break_index = None;
        let mut turns = None;
        let mut stack = None;
        let mut placement_panels: Option<Vec<PanelPlacement>> = None;
        let mut moves: Option<Vec<StackMove>> = None;
        let mut angles_folded = None;
        let mut angles_stacked = None;

        for (name, body) in &sections {
            match name.as_str() {
                "params" => params = Some(parse_params(body)?),
                "panels" => panels = Some(parse_panels("panels", body)?),
                "cycle" => cycle = Some(parse_cycle(body)?),
                "strip" => {
                    let (b, t) = parse_strip(body)?;
                    break_index = Some(b);
                    turns = t;
                }
                "stack" => stack = Some(parse_stack(body)?),
                "placement" => placement_panels = Some(parse_placement("placement", body)?),
                "moves" => moves = Some(parse_moves("moves", body)?),
                "angles_folded" => angles_folded = Some(parse_floats("angles_folded", body)?),
                "angles_stacked" => angles_stacked = Some(parse_floats("angles_stacked", body)?),
                other => {
                    return Err(schema(
                        other,
                        format!("unknown section; supported version is {PLAN_HEADER:?}"),
                    ))
                }
            }
        }

        let params = params.ok_or_else(|| schema("params", "missing section"))?;
        let panels = panels.ok_or_else(|| schema("panels", "missing section"))?;
        let n = panels.len();
        if let Some(c) = &cycle {
            validate_cycle_schema(c, n)?;
        }
        if let Some(b) = break_index {
            if cycle.is_none() {
                return Err(schema("strip", "strip section requires a cycle section"));
            }
            if b >= n {
                return Err(schema("strip.break_index", "break index out of range"));
            }
            if let Some(t) = &turns {
                if t.len() != n {
                    return Err(schema("strip.turns", format!("expected {n} turns")));
                }
            }
        }
        if let Some(p) = &stack {
            if p.total() != n {
                return Err(schema("stack.heights", format!("heights must sum to {n}")));
            }
        }
        let placement = match (placement_panels, moves) {
            (Some(p), Some(m)) => {
                if p.len() != n {
                    return Err(schema("placement", format!("expected {n} rows")));
                }
                if m.len() != n - 1 {
                    return Err(schema("moves", format!("expected {} rows", n - 1)));
                }
                Some(StackedPlacement {
                    panels: p,
                    moves: m,
                })
            }
            (None, None) => None,
            _ => {
                return Err(schema(
                    "placement",
                    "placement and moves sections must appear together",
                ))
            }
        };
        for (name, a) in [
            ("angles_folded", &angles_folded),
            ("angles_stacked", &angles_stacked),
        ] {
            if let Some(a) = a {
                if a.len() != n - 1 {
                    return Err(schema(name, format!("expected {} angles, got {}", n - 1, a.len())));
                }
            }
        }

        Ok(PlanFile {
            params,
            panels,
            cycle,
            break_index,
            turns,
            stack,
            placement,
            angles_folded,
            angles_stacked,
        })
    }
}

fn join_usize(v: &[usize]) -> String {
    v.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

fn join_f64(v: &[f64]) -> String {
    v.iter().map(|&x| fmt_f(x)).collect::<Vec<_>>().join(" ")
}

fn write_panels(s: &mut String, section: &str, panels: &[(Cell, FaceDir)]) {
    let _ = writeln!(s, "[{section}]");
    for (id, (cell, dir)) in panels.iter().enumerate() {
        let _ = writeln!(s, "{id} {} {} {} {}", cell[0], cell[1], cell[2], dir.label());
    }
}

fn write_placement(s: &mut String, section: &str, moves_section: &str, p: &StackedPlacement) {
    let _ = writeln!(s, "[{section}]");
    for (i, pp) in p.panels.iter().enumerate() {
        let _ = writeln!(
            s,
            "{i} {} {} {} {}",
            pp.cell.0,
            pp.cell.1,
            pp.level,
            if pp.face_up { "up" } else { "down" }
        );
    }
    let _ = writeln!(s, "[{moves_section}]");
    for (i, m) in p.moves.iter().enumerate() {
        let _ = writeln!(s, "{i} {} {}", m.kind.label(), m.side.label());
    }
}

type Section = (String, Vec<String>);

fn split_sections<'a, I: Iterator<Item = &'a str>>(lines: I) -> Result<Vec<Section>, PlanError> {
    let mut sections: Vec<Section> = Vec::new();
    for raw in lines {
        let line = raw.trim_end();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            sections.push((name.to_string(), Vec::new()));
        } else {
            match sections.last_mut() {
                Some((_, body)) => body.push(line.to_string()),
                None => return Err(schema("header", format!("content before any section: {line:?}"))),
            }
        }
    }
    Ok(sections)
}

fn parse_kv<'a>(line: &'a str, path: &str) -> Result<(&'a str, &'a str), PlanError> {
    let mut parts = line.splitn(2, " = ");
    let key = parts
        .next()
        .ok_or_else(|| schema(path, "expected key = value"))?;
    let value = parts
        .next()
        .ok_or_else(|| schema(format!("{path}.{key}"), "expected key = value"))?;
    Ok((key, value))
}

fn parse_f64(s: &str, path: &str) -> Result<f64, PlanError> {
    let v: f64 = s
        .parse()
        .map_err(|_| schema(path, format!("bad number {s:?}")))?;
    if !v.is_finite() {
        return Err(schema(path, "non-finite number"));
    }
    Ok(v)
}

fn parse_params(body: &[String]) -> Result<PlanParams, PlanError> {
    let mut edge_length = None;
    let mut thickness = None;
    let mut resolution = None;
    let mut seed = None;
    let mut bbox = None;
    for line in body {
        let (key, value) = parse_kv(line, "params")?;
        match key {
            "edge_length" => edge_length = Some(parse_f64(value, "params.edge_length")?),
            "thickness" => thickness = Some(parse_f64(value, "params.thickness")?),
            "resolution" => {
                resolution = Some(value.parse().map_err(|_| {
                    schema("params.resolution", format!("bad integer {value:?}"))
                })?)
            }
            "seed" => {
                seed = Some(
                    value
                        .parse()
                        .map_err(|_| schema("params.seed", format!("bad integer {value:?}")))?,
                )
            }
            "bbox" => {
                let parts: Vec<&str> = value.split_whitespace().collect();
                if parts.len() != 3 {
                    return Err(schema("params.bbox", "expected 3 values"));
                }
                let mut b = [0.0; 3];
                for k in 0..3 {
                    b[k] = parse_f64(parts[k], "params.bbox")?;
                }
                bbox = Some(b);
            }
            other => {
                return Err(schema(
                    format!("params.{other}"),
                    format!("unknown field; supported version is {PLAN_HEADER:?}"),
                ))
            }
        }
    }
    Ok(PlanParams {
        edge_length: edge_length.ok_or_else(|| schema("params.edge_length", "missing"))?,
        thickness: thickness.ok_or_else(|| schema("params.thickness", "missing"))?,
        resolution: resolution.ok_or_else(|| schema("params.resolution", "missing"))?,
        seed: seed.ok_or_else(|| schema("params.seed", "missing"))?,
        bbox: bbox.ok_or_else(|| schema("params.bbox", "missing"))?,
    })
}

fn parse_panels(path: &str, body: &[String]) -> Result<Vec<(Cell, FaceDir)>, PlanError> {
    let mut panels = Vec::with_capacity(body.len());
    for (i, line) in body.iter().enumerate() {
        let row_path = format!("{path}[{i}]");
        let parts: Vec<&str> = line.split_whitespace().collect();
        if parts.len() != 5 {
            return Err(schema(row_path, "expected: id i j k dir"));
        }
        let id: usize = parts[0]
            .parse()
            .map_err(|_| schema(&row_path, "bad panel id"))?;
        if id != i {
            return Err(schema(row_path, format!("panel ids must be dense, got {id}")));
        }
        let mut cell = [0i64; 3];
        for k in 0..3 {
            cell[k] = parts[k + 1]
                .parse()
                .map_err(|_| schema(&row_path, "bad voxel coordinate"))?;
        }
        let dir = FaceDir::from_label(parts[4])
            .ok_or_else(|| schema(&row_path, format!("bad face direction {:?}", parts[4])))?;
        panels.push((cell, dir));
    }
    if panels.is_empty() {
        return Err(schema(path, "empty panel table"));
    }
    Ok(panels)
}

fn parse_usizes(path: &str, value: &str) -> Result<Vec<usize>, PlanError> {
    value
        .split_whitespace()
        .map(|t| t.parse().map_err(|_| schema(path, format!("bad integer {t:?}"))))
        .collect()
}

fn parse_cycle(body: &[String]) -> Result<StripCycle, PlanError> {
    let mut order = None;
    let mut hinges = None;
    for line in body {
        let (key, value) = parse_kv(line, "cycle")?;
        match key {
            "order" => order = Some(parse_usizes("cycle.order", value)?),
            "hinges" => hinges = Some(parse_usizes("cycle.hinges", value)?),
            other => return Err(schema(format!("cycle.{other}"), "unknown field")),
        }
    }
    Ok(StripCycle {
        order: order.ok_or_else(|| schema("cycle.order", "missing"))?,
        hinges: hinges.ok_or_else(|| schema("cycle.hinges", "missing"))?,
    })
}

fn validate_cycle_schema(cycle: &StripCycle, n: usize) -> Result<(), PlanError> {
    if cycle.order.len() != n {
        return Err(schema(
            "cycle.order",
            format!("expected {n} panels, got {}", cycle.order.len()),
        ));
    }
    if cycle.hinges.len() != n {
        return Err(schema(
            "cycle.hinges",
            format!("expected {n} hinges, got {}", cycle.hinges.len()),
        ));
    }
    if cycle.order.iter().any(|&p| p >= n) {
        return Err(schema("cycle.order", "panel id out of range"));
    }
    Ok(())
}

fn parse_strip(body: &[String]) -> Result<(usize, Option<Vec<Turn>>), PlanError> {
    let mut break_index = None;
    let mut turns = None;
    for line in body {
        let (key, value) = parse_kv(line, "strip")?;
        match key {
            "break_index" => {
                break_index = Some(
                    value
                        .parse()
                        .map_err(|_| schema("strip.break_index", "bad integer"))?,
                )
            }
            "turns" => {
                let parsed: Option<Vec<Turn>> =
                    value.split_whitespace().map(Turn::from_label).collect();
                turns = Some(parsed.ok_or_else(|| schema("strip.turns", "bad turn label"))?);
            }
            other => return Err(schema(format!("strip.{other}"), "unknown field")),
        }
    }
    Ok((
        break_index.ok_or_else(|| schema("strip.break_index", "missing"))?,
        turns,
    ))
}

fn parse_stack(body: &[String]) -> Result<StackPlan, PlanError> {
    let mut kind = None;
    let mut heights = None;
    for line in body {
        let (key, value) = parse_kv(line, "stack")?;
        match key {
            "kind" => {
                kind = Some(match value {
                    "uniform" => PlanKind::Uniform,
                    "nonuniform" => PlanKind::NonUniform,
                    other => return Err(schema("stack.kind", format!("bad kind {other:?}"))),
                })
            }
            "heights" => heights = Some(parse_usizes("stack.heights", value)?),
            other => return Err(schema(format!("stack.{other}"), "unknown field")),
        }
    }
    let heights = heights.ok_or_else(|| schema("stack.heights", "missing"))?;
    if heights.iter().any(|&h| h == 0) {
        return Err(schema("stack.heights", "pile heights must be positive"));
    }
    Ok(StackPlan {
        kind: kind.ok_or_else(|| schema("stack.kind", "missing"))?,
        pile_heights: heights,
    })
}

fn parse_placement(path: &str, body: &[String]) -> Result<Vec<PanelPlacement>, PlanError> {
    let mut rows = Vec::with_capacity(body.len());
    for (i, line) in body.iter().enumerate() {
        let row_path = format!("{path}[{i}]");
        let parts: Vec<&str> = line.split_whitespace().collect();
        if parts.len() != 5 {
            return Err(schema(row_path, "expected: idx cx cy level up|down"));
        }
        let idx: usize = parts[0]
            .parse()
            .map_err(|_| schema(&row_path, "bad index"))?;
        if idx != i {
            return Err(schema(row_path, "rows must be dense and ordered"));
        }
        let cx: i32 = parts[1].parse().map_err(|_| schema(&row_path, "bad cell"))?;
        let cy: i32 = parts[2].parse().map_err(|_| schema(&row_path, "bad cell"))?;
        let level: i32 = parts[3]
            .parse()
            .map_err(|_| schema(&row_path, "bad level"))?;
        if level < 0 {
            return Err(schema(row_path, "levels must be non-negative"));
        }
        let face_up = match parts[4] {
            "up" => true,
            "down" => false,
            other => return Err(schema(row_path, format!("bad face flag {other:?}"))),
        };
        rows.push(PanelPlacement {
            cell: (cx, cy),
            level,
            face_up,
        });
    }
    Ok(rows)
}

fn parse_moves(path: &str, body: &[String]) -> Result<Vec<StackMove>, PlanError> {
    let mut rows = Vec::with_capacity(body.len());
    for (i, line) in body.iter().enumerate() {
        let row_path = format!("{path}[{i}]");
        let parts: Vec<&str> = line.split_whitespace().collect();
        if parts.len() != 3 {
            return Err(schema(row_path, "expected: idx kind side"));
        }
        let idx: usize = parts[0]
            .parse()
            .map_err(|_| schema(&row_path, "bad index"))?;
        if idx != i {
            return Err(schema(row_path, "rows must be dense and ordered"));
        }
        let kind = MoveKind::from_label(parts[1])
            .ok_or_else(|| schema(&row_path, format!("bad move kind {:?}", parts[1])))?;
        let side = GridDir::from_label(parts[2])
            .ok_or_else(|| schema(&row_path, format!("bad side {:?}", parts[2])))?;
        rows.push(StackMove { kind, side });
    }
    Ok(rows)
}

fn parse_floats(path: &str, body: &[String]) -> Result<Vec<f64>, PlanError> {
    let mut out = Vec::new();
    for line in body {
        for tok in line.split_whitespace() {
            out.push(parse_f64(tok, path)?);
        }
    }
    Ok(out)
}

/// Transform plan: the common shape, each model's realization, and the
/// hinge diff between models 0 and 1.
#[derive(Debug, Clone)]
pub struct TransformPlanFile {
    pub edge_length: f64,
    pub thickness: f64,
    pub shape: Vec<Slot>,
    pub models: Vec<ModelSection>,
    pub diff: HingeDiff,
}

#[derive(Debug, Clone)]
pub struct ModelSection {
    pub panels: Vec<(Cell, FaceDir)>,
    pub strip_order: Vec<usize>,
    pub strip_hinges: Vec<usize>,
    pub turns: Vec<Turn>,
    pub break_index: usize,
    pub heights: Vec<usize>,
    pub plan_kind: PlanKind,
    pub placement: StackedPlacement,
    pub symmetry: usize,
}

impl TransformPlanFile {
    pub fn from_common(
        cs: &CommonStacking,
        networks: &[&PanelNetwork],
        diff: &HingeDiff,
    ) -> Self {
        let models = cs
            .realizations
            .iter()
            .zip(networks)
            .map(|(r, net)| ModelSection {
                panels: net
                    .panels()
                    .iter()
                    .map(|p| (p.voxel, p.face_dir))
                    .collect(),
                strip_order: r.strip.order.clone(),
                strip_hinges: r.strip.hinges.clone(),
                turns: r.strip.turns.clone(),
                break_index: r.strip.break_index,
                heights: r.plan.pile_heights.clone(),
                plan_kind: r.plan.kind,
                placement: r.placement.clone(),
                symmetry: r.symmetry,
            })
            .collect();
        TransformPlanFile {
            edge_length: networks[0].edge_length(),
            thickness: networks[0].thickness(),
            shape: cs.shape.clone(),
            models,
            diff: diff.clone(),
        }
    }

    pub fn serialize(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{TRANSFORM_HEADER}");
        let _ = writeln!(s, "[params]");
        let _ = writeln!(s, "edge_length = {}", fmt_f(self.edge_length));
        let _ = writeln!(s, "models = {}", self.models.len());
        let _ = writeln!(s, "thickness = {}", fmt_f(self.thickness));
        let _ = writeln!(s, "[shape]");
        for slot in &self.shape {
            let _ = writeln!(s, "{} {} {}", slot.0, slot.1, slot.2);
        }
        for (mi, model) in self.models.iter().enumerate() {
            write_panels(&mut s, &format!("model{mi}.panels"), &model.panels);
            let _ = writeln!(s, "[model{mi}.strip]");
            let _ = writeln!(s, "break_index = {}", model.break_index);
            let _ = writeln!(s, "hinges = {}", join_usize(&model.strip_hinges));
            let _ = writeln!(s, "order = {}", join_usize(&model.strip_order));
            let labels: Vec<&str> = model.turns.iter().map(|t| t.label()).collect();
            let _ = writeln!(s, "turns = {}", labels.join(" "));
            let _ = writeln!(s, "[model{mi}.stack]");
            let _ = writeln!(s, "heights = {}", join_usize(&model.heights));
            let _ = writeln!(
                s,
                "kind = {}",
                match model.plan_kind {
                    PlanKind::Uniform => "uniform",
                    PlanKind::NonUniform => "nonuniform",
                }
            );
            let _ = writeln!(s, "symmetry = {}", model.symmetry);
            write_placement(
                &mut s,
                &format!("model{mi}.placement"),
                &format!("model{mi}.moves"),
                &model.placement,
            );
        }
        let _ = writeln!(s, "[diff]");
        for c in &self.diff.disconnect {
            let _ = writeln!(
                s,
                "disconnect {} {} {} {} {} {} {}",
                c.a.0, c.a.1, c.a.2, c.b.0, c.b.1, c.b.2,
                c.side.label()
            );
        }
        for c in &self.diff.connect {
            let _ = writeln!(
                s,
                "connect {} {} {} {} {} {} {}",
                c.a.0, c.a.1, c.a.2, c.b.0, c.b.1, c.b.2,
                c.side.label()
            );
        }
        s
    }

    pub fn parse(text: &str) -> Result<TransformPlanFile, PlanError> {
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| schema("header", "empty file"))?;
        if header != TRANSFORM_HEADER {
            return Err(schema(
                "header",
                format!("unknown header {header:?}; supported: {TRANSFORM_HEADER:?}"),
            ));
        }
        let sections = split_sections(lines)?;
        let mut edge_length = None;
        let mut thickness = None;
        let mut shape: Vec<Slot> = Vec::new();
        let mut diff = HingeDiff {
            disconnect: Vec::new(),
            connect: Vec::new(),
        };
        #[derive(Default)]
        struct Partial {
            panels: Option<Vec<(Cell, FaceDir)>>,
            strip: Option<(usize, Vec<usize>, Vec<usize>, Vec<Turn>)>,
            stack: Option<(Vec<usize>, PlanKind, usize)>,
            placement: Option<Vec<PanelPlacement>>,
            moves: Option<Vec<StackMove>>,
        }
        let mut partials: Vec<Partial> = Vec::new();

        for (name, body) in &sections {
            if name == "params" {
                for line in body {
                    let (key, value) = parse_kv(line, "params")?;
                    match key {
                        "edge_length" => {
                            edge_length = Some(parse_f64(value, "params.edge_length")?)
                        }
                        "thickness" => thickness = Some(parse_f64(value, "params.thickness")?),
                        "models" => {
                            let count: usize = value
                                .parse()
                                .map_err(|_| schema("params.models", "bad integer"))?;
                            partials.resize_with(count, Partial::default);
                        }
                        other => return Err(schema(format!("params.{other}"), "unknown field")),
                    }
                }
            } else if name == "shape" {
                for (i, line) in body.iter().enumerate() {
                    let parts: Vec<&str> = line.split_whitespace().collect();
                    if parts.len() != 3 {
                        return Err(schema(format!("shape[{i}]"), "expected: x y z"));
                    }
                    let mut v = [0i32; 3];
                    for k in 0..3 {
                        v[k] = parts[k]
                            .parse()
                            .map_err(|_| schema(format!("shape[{i}]"), "bad coordinate"))?;
                    }
                    shape.push((v[0], v[1], v[2]));
                }
            } else if name == "diff" {
                for (i, line) in body.iter().enumerate() {
                    let parts: Vec<&str> = line.split_whitespace().collect();
                    if parts.len() != 8 {
                        return Err(schema(
                            format!("diff[{i}]"),
                            "expected: kind ax ay az bx by bz side",
                        ));
                    }
                    let mut v = [0i32; 6];
                    for k in 0..6 {
                        v[k] = parts[k + 1]
                            .parse()
                            .map_err(|_| schema(format!("diff[{i}]"), "bad coordinate"))?;
                    }
                    let side = GridDir::from_label(parts[7])
                        .ok_or_else(|| schema(format!("diff[{i}]"), "bad side"))?;
                    let conn = Connection {
                        a: (v[0], v[1], v[2]),
                        b: (v[3], v[4], v[5]),
                        side,
                    };
                    match parts[0] {
                        "disconnect" => diff.disconnect.push(conn),
                        "connect" => diff.connect.push(conn),
                        other => {
                            return Err(schema(format!("diff[{i}]"), format!("bad kind {other:?}")))
                        }
                    }
                }
            } else if let Some(rest) = name.strip_prefix("model") {
                let (mi, part) = rest
                    .split_once('.')
                    .ok_or_else(|| schema(name, "expected model<i>.<section>"))?;
                let mi: usize = mi
                    .parse()
                    .map_err(|_| schema(name, "bad model index"))?;
                if mi >= partials.len() {
                    return Err(schema(name, "model index out of range"));
                }
                match part {
                    "panels" => partials[mi].panels = Some(parse_panels(name, body)?),
                    "strip" => {
                        let mut break_index = None;
                        let mut order = None;
                        let mut hinges = None;
                        let mut turns = None;
                        for line in body {
                            let (key, value) = parse_kv(line, name)?;
                            match key {
                                "break_index" => {
                                    break_index = Some(value.parse().map_err(|_| {
                                        schema(format!("{name}.break_index"), "bad integer")
                                    })?)
                                }
                                "order" => {
                                    order =
                                        Some(parse_usizes(&format!("{name}.order"), value)?)
                                }
                                "hinges" => {
                                    hinges =
                                        Some(parse_usizes(&format!("{name}.hinges"), value)?)
                                }
                                "turns" => {
                                    let parsed: Option<Vec<Turn>> =
                                        value.split_whitespace().map(Turn::from_label).collect();
                                    turns = Some(parsed.ok_or_else(|| {
                                        schema(format!("{name}.turns"), "bad turn label")
                                    })?);
                                }
                                other => {
                                    return Err(schema(
                                        format!("{name}.{other}"),
                                        "unknown field",
                                    ))
                                }
                            }
                        }
                        partials[mi].strip = Some((
                            break_index
                                .ok_or_else(|| schema(format!("{name}.break_index"), "missing"))?,
                            order.ok_or_else(|| schema(format!("{name}.order"), "missing"))?,
                            hinges.ok_or_else(|| schema(format!("{name}.hinges"), "missing"))?,
                            turns.ok_or_else(|| schema(format!("{name}.turns"), "missing"))?,
                        ));
                    }
                    "stack" => {
                        let mut heights = None;
                        let mut kind = None;
                        let mut symmetry = None;
                        for line in body {
                            let (key, value) = parse_kv(line, name)?;
                            match key {
                                "heights" => {
                                    heights =
                                        Some(parse_usizes(&format!("{name}.heights"), value)?)
                                }
                                "kind" => {
                                    kind = Some(match value {
                                        "uniform" => PlanKind::Uniform,
                                        "nonuniform" => PlanKind::NonUniform,
                                        other => {
                                            return Err(schema(
                                                format!("{name}.kind"),
                                                format!("bad kind {other:?}"),
                                            ))
                                        }
                                    })
                                }
                                "symmetry" => {
                                    symmetry = Some(value.parse().map_err(|_| {
                                        schema(format!("{name}.symmetry"), "bad integer")
                                    })?)
                                }
                                other => {
                                    return Err(schema(
                                        format!("{name}.{other}"),
                                        "unknown field",
                                    ))
                                }
                            }
                        }
                        partials[mi].stack = Some((
                            heights
                                .ok_or_else(|| schema(format!("{name}.heights"), "missing"))?,
                            kind.ok_or_else(|| schema(format!("{name}.kind"), "missing"))?,
                            symmetry
                                .ok_or_else(|| schema(format!("{name}.symmetry"), "missing"))?,
                        ));
                    }
                    "placement" => {
                        partials[mi].placement = Some(parse_placement(name, body)?)
                    }
                    "moves" => partials[mi].moves = Some(parse_moves(name, body)?),
                    other => return Err(schema(format!("model{mi}.{other}"), "unknown section")),
                }
            } else {
                return Err(schema(
                    name,
                    format!("unknown section; supported version is {TRANSFORM_HEADER:?}"),
                ));
            }
        }

        let mut models = Vec::with_capacity(partials.len());
        for (mi, p) in partials.into_iter().enumerate() {
            let path = format!("model{mi}");
            let panels = p
                .panels
                .ok_or_else(|| schema(format!("{path}.panels"), "missing"))?;
            let (break_index, order, hinges, turns) = p
                .strip
                .ok_or_else(|| schema(format!("{path}.strip"), "missing"))?;
            let (heights, kind, symmetry) = p
                .stack
                .ok_or_else(|| schema(format!("{path}.stack"), "missing"))?;
            let placement_rows = p
                .placement
                .ok_or_else(|| schema(format!("{path}.placement"), "missing"))?;
            let moves = p
                .moves
                .ok_or_else(|| schema(format!("{path}.moves"), "missing"))?;
            let n = panels.len();
            if order.len() != n || hinges.len() != n - 1 || turns.len() != n {
                return Err(schema(format!("{path}.strip"), "length mismatch"));
            }
            if placement_rows.len() != n || moves.len() != n - 1 {
                return Err(schema(format!("{path}.placement"), "length mismatch"));
            }
            models.push(ModelSection {
                panels,
                strip_order: order,
                strip_hinges: hinges,
                turns,
                break_index,
                heights,
                plan_kind: kind,
                placement: StackedPlacement {
                    panels: placement_rows,
                    moves,
                },
                symmetry,
            });
        }

        Ok(TransformPlanFile {
            edge_length: edge_length.ok_or_else(|| schema("params.edge_length", "missing"))?,
            thickness: thickness.ok_or_else(|| schema("params.thickness", "missing"))?,
            shape,
            models,
            diff,
        })
    }

    /// Rebuilds networks and realizations for verification.
    pub fn reconstruct(&self) -> Result<(Vec<PanelNetwork>, CommonStacking), PlanError> {
        let mut networks = Vec::with_capacity(self.models.len());
        let mut realizations = Vec::with_capacity(self.models.len());
        for (mi, model) in self.models.iter().enumerate() {
            let plan = PlanFile::new(
                PlanParams {
                    edge_length: self.edge_length,
                    thickness: self.thickness,
                    resolution: 0,
                    seed: 0,
                    bbox: [1.0, 1.0, 1.0],
                },
                model.panels.clone(),
            );
            let network = plan.network()?;
            let strip = Strip {
                order: model.strip_order.clone(),
                hinges: model.strip_hinges.clone(),
                turns: model.turns.clone(),
                break_index: model.break_index,
            };
            for i in 0..strip.order.len() - 1 {
                if network.shared_edge(strip.order[i], strip.order[i + 1])
                    != Some(strip.hinges[i])
                {
                    return Err(schema(
                        format!("model{mi}.strip"),
                        format!("strip step {i} is not an adjacency"),
                    ));
                }
            }
            networks.push(network);
            realizations.push(Realization {
                strip,
                plan: StackPlan {
                    kind: model.plan_kind,
                    pile_heights: model.heights.clone(),
                },
                placement: model.placement.clone(),
                symmetry: model.symmetry,
            });
        }
        Ok((
            networks,
            CommonStacking {
                shape: self.shape.clone(),
                realizations,
            },
        ))
    }
}
