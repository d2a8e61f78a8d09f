//! Compares the rayon-backed hot paths against the sequential fallback.
//!
//! Run `cargo bench -p stackfold-core` for the parallel build and
//! `cargo bench -p stackfold-core --no-default-features` for the
//! sequential one; bench ids carry the mode so criterion keeps separate
//! baselines.

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use stackfold_core::fold::{check_disjoint, strip_fk, thick_geometry};
use stackfold_core::panel::build_panel_network;
use stackfold_core::shapes::icosphere;
use stackfold_core::stack::{
    break_cycle, search_compactest, stack_forward_kinematics, validate_stacking,
    assign_uniform_plan, SearchParams,
};
use stackfold_core::stripify::{find_hamiltonian_cycle, SolveConfig};
use stackfold_core::voxel::{extract_outer_shell, voxelize_surface};
use stackfold_core::fold::angles_for_placement;

const MODE: &str = if cfg!(feature = "parallel") {
    "parallel"
} else {
    "sequential"
};

fn bench_pipeline(c: &mut Criterion) {
    let mesh = icosphere(4.0, 1);

    c.bench_function(&format!("voxelize_sphere_res16/{MODE}"), |b| {
        b.iter(|| voxelize_surface(&mesh, 16).unwrap())
    });

    let grid = voxelize_surface(&mesh, 12).unwrap();
    let faces = extract_outer_shell(&grid).unwrap();
    let net = build_panel_network(&grid, &faces, 1.0, 0.3).unwrap();

    c.bench_function(&format!("hamiltonian_cycle_sphere12/{MODE}"), |b| {
        b.iter(|| find_hamiltonian_cycle(&net, &SolveConfig::default()).unwrap())
    });

    let cycle = find_hamiltonian_cycle(&net, &SolveConfig::default()).unwrap();
    let params = SearchParams::for_strip_len(net.len(), 0.3);
    c.bench_function(&format!("search_compactest_sphere12/{MODE}"), |b| {
        b.iter(|| search_compactest(&cycle, &net, [8.0, 8.0, 8.0], &params))
    });

    let strip = break_cycle(&cycle, &net, 0).unwrap();
    let plan = assign_uniform_plan(net.len(), 1);
    let placement = stack_forward_kinematics(&strip, &plan).unwrap();
    c.bench_function(&format!("validate_stacking/{MODE}"), |b| {
        b.iter_batched(
            || placement.clone(),
            |p| validate_stacking(&p),
            BatchSize::SmallInput,
        )
    });

    let config = angles_for_placement(&strip, &placement, &net).unwrap();
    let pose = strip_fk(&strip, &config).unwrap();
    let slabs = thick_geometry(&pose, 1.0, 0.3);
    c.bench_function(&format!("check_disjoint_stacked/{MODE}"), |b| {
        b.iter(|| check_disjoint(&slabs, 1e-6))
    });
}

criterion_group!(benches, bench_pipeline);
criterion_main!(benches);
