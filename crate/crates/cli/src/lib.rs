//! Pipeline driver: voxelize, stripify, stack, simulate, transform,
//! report.
//!
//! Each subcommand reads and writes plan files so stages can be chained
//! or re-run individually. Exit codes: 0 success, 1 domain error, 2
//! usage error. Domain errors print a stable machine-parsable code on
//! stderr, e.g. `error[E_CYCLE_NOT_FOUND]: ...`.

use clap::{Args, Parser, Subcommand};
use stackfold_core::fold::{
    angles_for_placement, folded_configuration, interpolate_configuration, strip_fk,
    thick_geometry, FoldConfiguration, FoldError,
};
use stackfold_core::io::{parse_mesh_file, snapshot_from_slabs, write_geometry_file, IoError};
use stackfold_core::mesh::MeshError;
use stackfold_core::panel::{build_panel_network, NetworkError, PanelNetwork};
use stackfold_core::plan::{PlanError, PlanFile, PlanParams, TransformPlanFile};
use stackfold_core::stack::{
    compactness_metrics, search_compactest, Objective, SearchParams, StackError,
};
use stackfold_core::stripify::{find_hamiltonian_cycle, validate_cycle, SolveConfig, StripifyError};
use stackfold_core::transform::{
    common_stacking, hinge_diff, verify_with_diff, TransformCheck, TransformError,
};
use stackfold_core::voxel::{extract_outer_shell, voxelize_surface, VoxelError};
use std::path::PathBuf;

/// Environment variable overriding the default `--budget`.
pub const BUDGET_ENV: &str = "STACKFOLD_BUDGET";

#[derive(Parser)]
#[command(
    name = "stackfold",
    about = "Fold closed meshes into compact stacked panel strips",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Convert a mesh into a panel network plan.
    Voxelize(VoxelizeArgs),
    /// Find the Hamiltonian strip cycle over a panel network.
    Stripify(StripifyArgs),
    /// Search break points and pile plans for the compactest stacking.
    Stack(StackArgs),
    /// Write fold geometry at an interpolation parameter s in [0, 1].
    Simulate(SimulateArgs),
    /// Plan a shape transformation between two models.
    Transform(TransformArgs),
    /// Print the compactness report of a stacked plan.
    Report(ReportArgs),
}

#[derive(Args)]
struct VoxelizeArgs {
    /// Input mesh (.obj or .stl).
    #[arg(long)]
    input: PathBuf,
    /// Max cells along the longest axis.
    #[arg(long, default_value_t = 16)]
    resolution: u32,
    /// Panel thickness as a fraction of the panel edge length.
    #[arg(long, default_value_t = 0.1)]
    thickness: f64,
    /// Output plan file.
    #[arg(long)]
    output: PathBuf,
}

#[derive(Args)]
struct StripifyArgs {
    #[arg(long)]
    plan: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Independent solver attempts before the exact fallback.
    #[arg(long, default_value_t = 32)]
    retry_budget: u32,
    #[arg(long)]
    output: PathBuf,
}

#[derive(Args)]
struct StackArgs {
    #[arg(long)]
    plan: PathBuf,
    /// Comma-separated pile counts to try; empty picks a default set.
    #[arg(long, value_delimiter = ',')]
    piles: Vec<usize>,
    /// Max height delta for non-uniform plans.
    #[arg(long, default_value_t = 1)]
    nonuniform_m: usize,
    /// Override the thickness stored in the plan (fraction of edge length).
    #[arg(long)]
    thickness: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Non-uniform candidates per break point (env STACKFOLD_BUDGET
    /// overrides this default).
    #[arg(long)]
    budget: Option<usize>,
    /// Objective: sum-dims or volume.
    #[arg(long, default_value = "sum-dims")]
    objective: String,
    #[arg(long)]
    output: PathBuf,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    plan: PathBuf,
    /// 0 = deployed state, 1 = stacked state.
    #[arg(long, default_value_t = 1.0)]
    s: f64,
    #[arg(long)]
    output: PathBuf,
}

#[derive(Args)]
struct TransformArgs {
    #[arg(long)]
    plan_a: PathBuf,
    #[arg(long)]
    plan_b: PathBuf,
    /// Common footprint "PxQ"; defaults to the always-feasible 1x1.
    #[arg(long)]
    footprint: Option<String>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    output: PathBuf,
}

#[derive(Args)]
struct ReportArgs {
    #[arg(long)]
    plan: PathBuf,
}

/// Domain error with a stable code for scripting.
struct CliError {
    code: &'static str,
    message: String,
}

impl CliError {
    fn new(code: &'static str, message: impl Into<String>) -> Self {
        CliError {
            code,
            message: message.into(),
        }
    }
}

impl From<IoError> for CliError {
    fn from(e: IoError) -> Self {
        let code = match &e {
            IoError::ParseError { .. } => "E_PARSE",
            IoError::UnsupportedFeature { .. } => "E_UNSUPPORTED",
            IoError::Mesh(_) => "E_MESH",
            IoError::Io(_) => "E_IO",
        };
        CliError::new(code, e.to_string())
    }
}

impl From<MeshError> for CliError {
    fn from(e: MeshError) -> Self {
        CliError::new("E_MESH", e.to_string())
    }
}

impl From<VoxelError> for CliError {
    fn from(e: VoxelError) -> Self {
        let code = match &e {
            VoxelError::EmptyMesh => "E_EMPTY_MESH",
            VoxelError::ResolutionTooLow(_) => "E_RESOLUTION",
            VoxelError::NoShell => "E_NO_SHELL",
        };
        CliError::new(code, e.to_string())
    }
}

impl From<NetworkError> for CliError {
    fn from(e: NetworkError) -> Self {
        let code = match &e {
            NetworkError::ThicknessTooLarge { .. } => "E_THICKNESS",
            NetworkError::NonManifoldUnresolvable(..) => "E_NON_MANIFOLD",
            NetworkError::DegenerateRing(..) => "E_DEGENERATE_RING",
            NetworkError::EmptyShell => "E_NO_SHELL",
        };
        CliError::new(code, e.to_string())
    }
}

impl From<StripifyError> for CliError {
    fn from(e: StripifyError) -> Self {
        let code = match &e {
            StripifyError::NotFourRegular(..) => "E_NOT_FOUR_REGULAR",
            StripifyError::Disconnected(_) => "E_DISCONNECTED",
            StripifyError::TwoFactorNotFound => "E_TWO_FACTOR",
            StripifyError::MergeStuck { .. } => "E_MERGE_STUCK",
            StripifyError::CycleNotFound { .. } => "E_CYCLE_NOT_FOUND",
        };
        CliError::new(code, e.to_string())
    }
}

impl From<StackError> for CliError {
    fn from(e: StackError) -> Self {
        let code = match &e {
            StackError::IndexOutOfRange(..) => "E_INDEX",
            StackError::DeltaTooLarge { .. } => "E_DELTA",
            StackError::PlanSumMismatch { .. } => "E_PLAN_SUM",
            StackError::Infeasible(_) => "E_INFEASIBLE",
        };
        CliError::new(code, e.to_string())
    }
}

impl From<FoldError> for CliError {
    fn from(e: FoldError) -> Self {
        let code = match &e {
            FoldError::AngleOutOfRange(_) => "E_ANGLE",
            FoldError::LengthMismatch { .. } => "E_LENGTH",
            FoldError::InfeasiblePlacement(_) => "E_INFEASIBLE",
        };
        CliError::new(code, e.to_string())
    }
}

impl From<PlanError> for CliError {
    fn from(e: PlanError) -> Self {
        CliError::new("E_SCHEMA", e.to_string())
    }
}

impl From<TransformError> for CliError {
    fn from(e: TransformError) -> Self {
        let code = match &e {
            TransformError::FaceCountMismatch(_) => "E_FACE_COUNT",
            TransformError::ShapeUnrealizable { .. } => "E_SHAPE",
            TransformError::Stripify { source, .. } => match source {
                StripifyError::Disconnected(_) => "E_DISCONNECTED",
                _ => "E_CYCLE_NOT_FOUND",
            },
            TransformError::Fold(_) => "E_FOLD",
        };
        CliError::new(code, e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::new("E_IO", e.to_string())
    }
}

/// Entry point used by both `main` and the integration tests.
pub fn run(argv: &[String]) -> i32 {
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version requests are successes.
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let result = match cli.command {
        Command::Voxelize(args) => cmd_voxelize(args),
        Command::Stripify(args) => cmd_stripify(args),
        Command::Stack(args) => cmd_stack(args),
        Command::Simulate(args) => cmd_simulate(args),
        Command::Transform(args) => cmd_transform(args),
        Command::Report(args) => cmd_report(args),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error[{}]: {}", e.code, e.message);
            1
        }
    }
}

fn read_plan(path: &PathBuf) -> Result<PlanFile, CliError> {
    let text = std::fs::read_to_string(path)?;
    Ok(PlanFile::parse(&text)?)
}

fn load_network(plan: &PlanFile) -> Result<PanelNetwork, CliError> {
    Ok(plan.network()?)
}

fn cmd_voxelize(args: VoxelizeArgs) -> Result<(), CliError> {
    let mesh = parse_mesh_file(&args.input)?;
    let grid = voxelize_surface(&mesh, args.resolution)?;
    let faces = extract_outer_shell(&grid)?;
    let edge_length = 1.0;
    let thickness = args.thickness * edge_length;
    // Validate panel parameters before writing anything.
    let network = build_panel_network(&grid, &faces, edge_length, thickness)?;
    let ext = mesh.extents();
    let scale = edge_length / grid.cell_size();
    let plan = PlanFile::new(
        PlanParams {
            edge_length,
            thickness,
            resolution: args.resolution,
            seed: 0,
            bbox: [ext[0] * scale, ext[1] * scale, ext[2] * scale],
        },
        network
            .panels()
            .iter()
            .map(|p| (p.voxel, p.face_dir))
            .collect(),
    );
    std::fs::write(&args.output, plan.serialize())?;
    println!(
        "voxelized {} panels at resolution {}",
        network.len(),
        args.resolution
    );
    Ok(())
}

fn cmd_stripify(args: StripifyArgs) -> Result<(), CliError> {
    let mut plan = read_plan(&args.plan)?;
    let network = load_network(&plan)?;
    let config = SolveConfig {
        seed: args.seed,
        retry_budget: args.retry_budget,
        ..SolveConfig::default()
    };
    let cycle = find_hamiltonian_cycle(&network, &config)?;
    plan.params.seed = args.seed;
    plan.cycle = Some(cycle);
    std::fs::write(&args.output, plan.serialize())?;
    println!("strip cycle over {} panels", network.len());
    Ok(())
}

fn default_budget() -> usize {
    std::env::var(BUDGET_ENV)
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(32)
}

fn cmd_stack(args: StackArgs) -> Result<(), CliError> {
    let mut plan = read_plan(&args.plan)?;
    if let Some(frac) = args.thickness {
        plan.params.thickness = frac * plan.params.edge_length;
    }
    let network = load_network(&plan)?;
    let cycle = plan
        .cycle
        .clone()
        .ok_or_else(|| CliError::new("E_SCHEMA", "plan has no cycle; run stripify first"))?;
    validate_cycle(&cycle, &network)
        .map_err(|v| CliError::new("E_SCHEMA", format!("stored cycle invalid: {v}")))?;

    let objective = match args.objective.as_str() {
        "sum-dims" => Objective::SumDims,
        "volume" => Objective::BboxVolume,
        other => {
            return Err(CliError::new(
                "E_USAGE",
                format!("unknown objective {other:?} (sum-dims or volume)"),
            ))
        }
    };
    let t_over_l = plan.params.thickness / plan.params.edge_length;
    let mut params = SearchParams::for_strip_len(network.len(), t_over_l);
    if !args.piles.is_empty() {
        params.k_candidates = args.piles.clone();
    }
    params.max_delta = args.nonuniform_m.max(1);
    params.objective = objective;
    params.nonuniform_budget = args.budget.unwrap_or_else(default_budget);

    let best = search_compactest(&cycle, &network, plan.params.bbox, &params);
    let folded = folded_configuration(&best.strip, &network)?;
    let stacked = angles_for_placement(&best.strip, &best.placement, &network)?;

    plan.params.seed = args.seed;
    plan.break_index = Some(best.strip.break_index);
    plan.turns = Some(best.strip.turns.clone());
    plan.stack = Some(best.plan.clone());
    plan.placement = Some(best.placement.clone());
    plan.angles_folded = Some(folded.angles().to_vec());
    plan.angles_stacked = Some(stacked.angles().to_vec());
    std::fs::write(&args.output, plan.serialize())?;
    println!(
        "best stacking: {} piles, footprint {}x{}, sum of dims {:.4}",
        best.plan.pile_count(),
        best.report.footprint.0,
        best.report.footprint.1,
        best.report.sum_dims
    );
    Ok(())
}

fn cmd_simulate(args: SimulateArgs) -> Result<(), CliError> {
    if !(0.0..=1.0).contains(&args.s) {
        return Err(CliError::new("E_USAGE", "s must be in [0, 1]"));
    }
    let plan = read_plan(&args.plan)?;
    let network = load_network(&plan)?;
    let strip = plan.strip(&network)?;
    let folded = plan
        .angles_folded
        .as_ref()
        .ok_or_else(|| CliError::new("E_SCHEMA", "plan has no fold angles; run stack first"))?;
    let stacked = plan
        .angles_stacked
        .as_ref()
        .ok_or_else(|| CliError::new("E_SCHEMA", "plan has no stack angles; run stack first"))?;
    let from = FoldConfiguration::new(
        folded.clone(),
        plan.params.edge_length,
        plan.params.thickness,
    )?;
    let to = FoldConfiguration::new(
        stacked.clone(),
        plan.params.edge_length,
        plan.params.thickness,
    )?;
    let config = interpolate_configuration(&from, &to, args.s)?;
    let pose = strip_fk(&strip, &config)?;
    let slabs = thick_geometry(&pose, plan.params.edge_length, plan.params.thickness);
    let snapshot = snapshot_from_slabs(&slabs);
    write_geometry_file(&snapshot, &args.output)?;
    println!(
        "wrote {} triangles ({} slabs, {} connectors)",
        snapshot.triangles.len(),
        snapshot.slab_count,
        snapshot.connector_count
    );
    Ok(())
}

fn cmd_transform(args: TransformArgs) -> Result<(), CliError> {
    let plan_a = read_plan(&args.plan_a)?;
    let plan_b = read_plan(&args.plan_b)?;
    let net_a = load_network(&plan_a)?;
    let net_b = load_network(&plan_b)?;
    let footprint = match &args.footprint {
        None => None,
        Some(spec) => {
            let (p, q) = spec
                .split_once('x')
                .ok_or_else(|| CliError::new("E_USAGE", "footprint must look like PxQ"))?;
            let p: usize = p
                .parse()
                .map_err(|_| CliError::new("E_USAGE", "bad footprint"))?;
            let q: usize = q
                .parse()
                .map_err(|_| CliError::new("E_USAGE", "bad footprint"))?;
            Some((p, q))
        }
    };
    let solve = SolveConfig {
        seed: args.seed,
        ..SolveConfig::default()
    };
    let cs = common_stacking(&[&net_a, &net_b], footprint, &solve)?;
    let diff = hinge_diff(&cs, 0, 1);
    match verify_with_diff(&cs, &[&net_a, &net_b], 0, 1, &diff)? {
        TransformCheck::Ok => {}
        other => {
            return Err(CliError::new(
                "E_TRANSFORM_CHECK",
                format!("transform verification failed: {other:?}"),
            ))
        }
    }
    let file = TransformPlanFile::from_common(&cs, &[&net_a, &net_b], &diff);
    std::fs::write(&args.output, file.serialize())?;
    println!(
        "common shape of {} slots; diff: {} disconnect, {} connect",
        cs.shape.len(),
        diff.disconnect.len(),
        diff.connect.len()
    );
    Ok(())
}

fn cmd_report(args: ReportArgs) -> Result<(), CliError> {
    let plan = read_plan(&args.plan)?;
    let network = load_network(&plan)?;
    let placement = plan
        .placement
        .as_ref()
        .ok_or_else(|| CliError::new("E_SCHEMA", "plan has no placement; run stack first"))?;
    let report = compactness_metrics(placement, &network, plan.params.bbox);
    println!("width = {:.9}", report.width);
    println!("depth = {:.9}", report.depth);
    println!("height = {:.9}", report.height);
    println!("sum_dims = {:.9}", report.sum_dims);
    println!("compactness_ratio = {:.9}", report.compactness_ratio);
    println!("volume_ratio = {:.9}", report.volume_ratio);
    println!("footprint = {} {}", report.footprint.0, report.footprint.1);
    println!("height_levels = {}", report.height_levels);
    Ok(())
}
