//! Acceptance suite: one test per criterion, each printing a PASS line
//! with the measured values (visible with `--nocapture`).

mod support;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use stackfold_core::fold::{
    angles_for_placement, check_disjoint, deployed_deviation, folded_configuration,
    hinge_length, strip_fk, thick_geometry, DisjointReport,
};
use stackfold_core::panel::build_panel_network;
use stackfold_core::shapes::icosphere;
use stackfold_core::stack::{
    assign_uniform_plan, break_cycle, compactness_metrics, search_compactest,
    stack_forward_kinematics, validate_stacking, Objective, PanelPlacement, SearchParams,
    StackFeasibility, StackedPlacement,
};
use stackfold_core::stripify::{find_hamiltonian_cycle, validate_cycle, SolveConfig};
use stackfold_core::voxel::{extract_outer_shell, voxelize_surface};
use std::time::{Duration, Instant};
use support::*;

const PI: f64 = std::f64::consts::PI;
const FRAC_PI_2: f64 = std::f64::consts::FRAC_PI_2;
const SQRT_2: f64 = std::f64::consts::SQRT_2;

/// Criteria measure wall-clock budgets and scaling ratios, so they must
/// not compete for cores; every test serializes on this lock.
fn serial() -> std::sync::MutexGuard<'static, ()> {
    static LOCK: std::sync::Mutex<()> = std::sync::Mutex::new(());
    LOCK.lock().unwrap_or_else(|poisoned| poisoned.into_inner())
}

fn time_min<F: FnMut()>(runs: usize, mut f: F) -> Duration {
    let mut best = Duration::MAX;
    for _ in 0..runs {
        let start = Instant::now();
        f();
        best = best.min(start.elapsed());
    }
    best
}

#[test]
fn criterion_01_hinge_law_boundaries_and_bounds() {
    let _guard = serial();
    let start = Instant::now();
    let t = 0.73;
    for (theta, expect) in [
        (0.0, t),
        (FRAC_PI_2, SQRT_2 * t / 2.0),
        (-FRAC_PI_2, SQRT_2 * t / 2.0),
        (PI, t),
        (-PI, t),
    ] {
        let h = hinge_length(theta, t).unwrap();
        assert!(
            (h - expect).abs() <= 1e-9 * t,
            "h({theta}) = {h}, expected {expect}"
        );
    }
    let lo = SQRT_2 * t / 2.0;
    let samples = 1_000_000usize;
    for i in 0..=samples {
        let theta = -PI + 2.0 * PI * (i as f64) / (samples as f64);
        let h = hinge_length(theta, t).unwrap();
        assert!(
            h >= lo - 1e-12 && h <= t + 1e-12,
            "bounds violated at theta = {theta}: h = {h}"
        );
    }
    let eps = 1e-7;
    let gap = (hinge_length(FRAC_PI_2 - eps, t).unwrap()
        - hinge_length(FRAC_PI_2 + eps, t).unwrap())
    .abs();
    assert!(gap <= 1e-6 * t, "continuity gap {gap}");
    let elapsed = start.elapsed();
    assert!(elapsed < Duration::from_secs(1), "took {elapsed:?}");
    println!(
        "PASS criterion 1: hinge law boundaries exact, bounds hold on {} samples, \
         continuity gap {:.2e}*t, {:?}",
        samples + 1,
        gap / t,
        elapsed
    );
}

#[test]
fn criterion_02_one_or_two_piles_always_stack() {
    let _guard = serial();
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let polycubes: Vec<Vec<Cube>> = (0..50)
        .map(|_| {
            let cells = rng.gen_range(2..=30);
            random_polycube(&mut rng, cells)
        })
        .collect();

    let t = 0.1;
    let checked: usize = polycubes
        .par_iter()
        .map(|cells| {
            let net = network_of_cells(cells, t);
            let bbox = cell_bbox(cells);
            let cycle = find_hamiltonian_cycle(&net, &SolveConfig::default())
                .expect("polycube shells admit strip cycles");
            let n = net.len();
            let bound = 3.0 * (t * n as f64).cbrt() - 3.0f64.max(3.0 * t);
            let mut breaks = 0;
            for b in 0..n {
                let strip = break_cycle(&cycle, &net, b).unwrap();
                let one = stack_forward_kinematics(&strip, &assign_uniform_plan(n, 1))
                    .expect("one-pile plan is always feasible");
                assert_eq!(validate_stacking(&one), StackFeasibility::Feasible);
                let two = stack_forward_kinematics(&strip, &assign_uniform_plan(n, 2))
                    .expect("a two-pile plan is always feasible");
                assert_eq!(validate_stacking(&two), StackFeasibility::Feasible);
                for placement in [&one, &two] {
                    let report = compactness_metrics(placement, &net, bbox);
                    assert!(
                        report.sum_dims >= bound,
                        "sum of dims {} below bound {bound}",
                        report.sum_dims
                    );
                }
                breaks += 1;
            }
            breaks
        })
        .sum();

    let elapsed = start.elapsed();
    assert!(elapsed < Duration::from_secs(120), "took {elapsed:?}");
    println!(
        "PASS criterion 2: 1-pile and 2-pile plans feasible at all {checked} break points \
         of 50 random polycubes, {elapsed:?}"
    );
}

#[test]
fn criterion_03_linear_time_validator() {
    let _guard = serial();
    // Verdict agreement on 500 randomized placements.
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for _ in 0..500 {
        let n = rng.gen_range(2..60);
        let spread = rng.gen_range(1..7);
        let panels: Vec<PanelPlacement> = (0..n)
            .map(|_| PanelPlacement {
                cell: (rng.gen_range(0..spread), rng.gen_range(0..spread)),
                level: rng.gen_range(0..spread),
                face_up: rng.gen_bool(0.5),
            })
            .collect();
        let placement = StackedPlacement {
            panels,
            moves: vec![],
        };
        let mut colliding = false;
        for i in 0..placement.panels.len() {
            for j in i + 1..placement.panels.len() {
                let (a, b) = (&placement.panels[i], &placement.panels[j]);
                if a.cell == b.cell && a.level == b.level {
                    colliding = true;
                }
            }
        }
        let verdict = validate_stacking(&placement);
        assert_eq!(
            colliding,
            matches!(verdict, StackFeasibility::Colliding(_)),
            "validator disagrees with the all-pairs oracle"
        );
    }

    // Wall-clock scaling: one column of n panels. Each timing sample
    // batches repetitions so it stays well above scheduler noise.
    let tower = |n: i32| StackedPlacement {
        panels: (0..n)
            .map(|z| PanelPlacement {
                cell: (0, 0),
                level: z,
                face_up: z % 2 == 0,
            })
            .collect(),
        moves: vec![],
    };
    let small = tower(10_000);
    let large = tower(100_000);
    // Warm up allocators.
    let _ = validate_stacking(&small);
    let _ = validate_stacking(&large);
    let t_small = time_min(9, || {
        for _ in 0..50 {
            assert_eq!(validate_stacking(&small), StackFeasibility::Feasible);
        }
    })
    .as_secs_f64()
        / 50.0;
    let t_large = time_min(9, || {
        for _ in 0..5 {
            assert_eq!(validate_stacking(&large), StackFeasibility::Feasible);
        }
    })
    .as_secs_f64()
        / 5.0;
    let ratio = t_large / t_small.max(1e-12);
    assert!(ratio <= 15.0, "10x panels cost {ratio:.1}x time");
    println!(
        "PASS criterion 3: validator matches O(n^2) oracle on 500 placements; \
         10^5 vs 10^4 panels ratio {ratio:.2}x (<= 15x)"
    );
}

fn fixture_networks(t: f64) -> Vec<(String, stackfold_core::panel::PanelNetwork, [f64; 3])> {
    let mut out = Vec::new();
    for (name, cells) in fixture_polycubes() {
        let net = network_of_cells(&cells, t);
        let bbox = cell_bbox(&cells);
        out.push((name.to_string(), net, bbox));
    }
    // A curved model on top of the polycube fixtures.
    let sphere = icosphere(4.0, 2);
    let grid = voxelize_surface(&sphere, 8).unwrap();
    let faces = extract_outer_shell(&grid).unwrap();
    let net = build_panel_network(&grid, &faces, 1.0, t).unwrap();
    out.push(("sphere-8".to_string(), net, [8.0, 8.0, 8.0]));
    out
}

#[test]
fn criterion_04_endpoints_are_self_intersection_free() {
    let _guard = serial();
    let start = Instant::now();
    let mut checked = 0;
    for &t in &[0.05, 0.1, 0.3] {
        for (name, net, bbox) in fixture_networks(t) {
            let tol = 1e-6 * net.edge_length();
            let cycle = find_hamiltonian_cycle(&net, &SolveConfig::default()).unwrap();

            // Deployed state.
            let strip = break_cycle(&cycle, &net, 0).unwrap();
            let folded = folded_configuration(&strip, &net).unwrap();
            let pose = strip_fk(&strip, &folded).unwrap();
            let slabs = thick_geometry(&pose, net.edge_length(), net.thickness());
            match check_disjoint(&slabs, tol) {
                DisjointReport::Disjoint { .. } => {}
                DisjointReport::Colliding(c) => {
                    panic!("{name} at t={t}: deployed state collides: {c:?}")
                }
            }

            // Best stacked state found by the search.
            let params = SearchParams {
                nonuniform_budget: 8,
                ..SearchParams::for_strip_len(net.len(), t)
            };
            let best = search_compactest(&cycle, &net, bbox, &params);
            let stacked = angles_for_placement(&best.strip, &best.placement, &net).unwrap();
            let pose = strip_fk(&best.strip, &stacked).unwrap();
            let slabs = thick_geometry(&pose, net.edge_length(), net.thickness());
            match check_disjoint(&slabs, tol) {
                DisjointReport::Disjoint { .. } => {}
                DisjointReport::Colliding(c) => {
                    panic!("{name} at t={t}: stacked state collides: {c:?}")
                }
            }
            checked += 1;
        }
    }
    println!(
        "PASS criterion 4: deployed and stacked slabs disjoint (penetration <= 1e-6 l) \
         on {checked} fixture/thickness combinations, {:?}",
        start.elapsed()
    );
}

#[test]
fn criterion_05_compactness_bound_and_sphere_ratios() {
    let _guard = serial();
    let start = Instant::now();
    let sphere = icosphere(8.0, 2);
    let grid = voxelize_surface(&sphere, 16).unwrap();
    let faces = extract_outer_shell(&grid).unwrap();
    let bbox = [16.0, 16.0, 16.0];

    let mut ratios = Vec::new();
    for &t in &[0.3, 0.001] {
        let net = build_panel_network(&grid, &faces, 1.0, t).unwrap();
        let cycle = find_hamiltonian_cycle(&net, &SolveConfig::default()).unwrap();
        let n = net.len();
        let params = SearchParams {
            k_candidates: vec![1, 2, 4, 8, 16, 32, 64],
            max_delta: 1,
            objective: Objective::BboxVolume,
            nonuniform_budget: 4,
        };
        let best = search_compactest(&cycle, &net, bbox, &params);

        let bound = 3.0 * (t * n as f64).cbrt() - 3.0 * 1.0f64.max(t);
        assert!(
            best.report.sum_dims >= bound,
            "t={t}: sum of dims {} below lower bound {bound}",
            best.report.sum_dims
        );
        ratios.push((t, n, best.report.volume_ratio));
    }

    let (_, n03, r03) = ratios[0];
    assert!(
        r03 <= 0.10,
        "t=0.3l: best volume ratio {r03} above 0.10 ({n03} panels)"
    );
    let (_, _, r001) = ratios[1];
    assert!(r001 <= 0.001, "t=0.001l: best volume ratio {r001} above 0.001");

    let elapsed = start.elapsed();
    assert!(elapsed < Duration::from_secs(600), "took {elapsed:?}");
    println!(
        "PASS criterion 5: lower bound holds; sphere-16 volume ratios {:.4} (t=0.3l, <= 0.10) \
         and {:.6} (t=0.001l, <= 0.001), {elapsed:?}",
        r03, r001
    );
}

#[test]
fn criterion_06_stripifier_scales_near_linearly() {
    let _guard = serial();
    let sphere = icosphere(8.0, 2);
    let mut points = Vec::new();
    for res in [8u32, 16, 24, 32] {
        let grid = voxelize_surface(&sphere, res).unwrap();
        let faces = extract_outer_shell(&grid).unwrap();
        let net = build_panel_network(&grid, &faces, 1.0, 0.3).unwrap();
        let elapsed = time_min(3, || {
            let cycle = find_hamiltonian_cycle(&net, &SolveConfig::default()).unwrap();
            assert!(validate_cycle(&cycle, &net).is_ok());
        });
        points.push((net.len() as f64, elapsed.as_secs_f64()));
    }
    // Least-squares slope of log time against log panels.
    let logs: Vec<(f64, f64)> = points.iter().map(|&(n, t)| (n.ln(), t.ln())).collect();
    let m = logs.len() as f64;
    let sx: f64 = logs.iter().map(|p| p.0).sum();
    let sy: f64 = logs.iter().map(|p| p.1).sum();
    let sxx: f64 = logs.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = logs.iter().map(|p| p.0 * p.1).sum();
    let slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    assert!(slope <= 1.3, "log-log slope {slope:.3} above 1.3: {points:?}");
    println!(
        "PASS criterion 6: stripifier log-log slope {slope:.3} (<= 1.3) over panels {:?}",
        points.iter().map(|p| p.0 as usize).collect::<Vec<_>>()
    );
}

#[test]
fn criterion_07_solver_matches_exhaustive_oracle() {
    let _guard = serial();
    let start = Instant::now();
    let by_size = enumerate_polycubes(8);
    let counts: Vec<usize> = by_size.iter().map(|v| v.len()).collect();
    assert_eq!(
        counts,
        vec![1, 1, 2, 8, 29, 166, 1023, 6922],
        "polycube enumeration self-check"
    );

    let all: Vec<&Vec<Cube>> = by_size.iter().flatten().collect();
    let stats: (usize, usize, usize) = all
        .par_iter()
        .map(|cells| {
            let net = network_of_cells(cells, 0.1);
            let oracle = HamiltonOracle::from_network(&net);
            match oracle.has_cycle(20_000_000) {
                Some(true) => {
                    let cycle = find_hamiltonian_cycle(&net, &SolveConfig::default())
                        .unwrap_or_else(|e| {
                            panic!("oracle found a cycle on {cells:?}, solver failed: {e}")
                        });
                    assert!(validate_cycle(&cycle, &net).is_ok());
                    (1, 0, 0)
                }
                Some(false) => (0, 1, 0),
                None => (0, 0, 1),
            }
        })
        .reduce(|| (0, 0, 0), |a, b| (a.0 + b.0, a.1 + b.1, a.2 + b.2));

    // Spot-check larger sizes the same way.
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let big: Vec<Vec<Cube>> = (0..100)
        .map(|i| random_polycube(&mut rng, 9 + (i % 2)))
        .collect();
    let extra: usize = big
        .par_iter()
        .map(|cells| {
            let net = network_of_cells(cells, 0.1);
            let oracle = HamiltonOracle::from_network(&net);
            if oracle.has_cycle(20_000_000) == Some(true) {
                let cycle = find_hamiltonian_cycle(&net, &SolveConfig::default())
                    .expect("oracle found a cycle, solver must too");
                assert!(validate_cycle(&cycle, &net).is_ok());
                1
            } else {
                0
            }
        })
        .sum();

    let elapsed = start.elapsed();
    assert!(elapsed < Duration::from_secs(300), "took {elapsed:?}");
    println!(
        "PASS criterion 7: solver matched the oracle on {} exhaustive shells \
         ({} non-Hamiltonian, {} inconclusive) plus {extra} random 9-10 voxel shells, {elapsed:?}",
        stats.0, stats.1, stats.2
    );
}

#[test]
fn criterion_08_pluripotent_rod_plate_round_trip() {
    let _guard = serial();
    use stackfold_core::transform::{
        common_stacking, connections_of, hinge_diff, verify_transform, TransformCheck,
    };
    let start = Instant::now();
    let rod = network_of_cells(&(0..7).map(|k| [0, 0, k]).collect::<Vec<_>>(), 0.1);
    let plate = network_of_cells(
        &(0..3)
            .flat_map(|i| (0..3).map(move |j| [i, j, 0]))
            .collect::<Vec<_>>(),
        0.1,
    );
    assert_eq!(rod.len(), 30, "2(1*1 + 1*7 + 1*7)");
    assert_eq!(plate.len(), 30, "2(3*3 + 3*1 + 3*1)");

    let cs = common_stacking(&[&rod, &plate], None, &SolveConfig::default()).unwrap();
    assert_eq!(cs.shape.len(), 30);
    assert!(cs.shape.iter().all(|s| (s.0, s.1) == (0, 0)), "1-pile tower");

    let diff = hinge_diff(&cs, 0, 1);
    let mut set: std::collections::BTreeSet<_> =
        connections_of(&cs.realizations[0]).into_iter().collect();
    for c in &diff.disconnect {
        assert!(set.remove(c), "disconnect entry must exist in the rod strip");
    }
    for c in &diff.connect {
        assert!(set.insert(*c), "connect entry must be new");
    }
    let plate_set: std::collections::BTreeSet<_> =
        connections_of(&cs.realizations[1]).into_iter().collect();
    assert_eq!(set, plate_set, "diff reconfigures rod into plate exactly");

    assert_eq!(
        verify_transform(&cs, &[&rod, &plate], 0, 1).unwrap(),
        TransformCheck::Ok
    );

    let elapsed = start.elapsed();
    assert!(elapsed < Duration::from_secs(10), "took {elapsed:?}");
    println!(
        "PASS criterion 8: rod and plate share a 1x1x30 stacking; diff of {} reconnections \
         verifies end to end, {elapsed:?}",
        diff.disconnect.len()
    );
}

#[test]
fn criterion_09_folded_state_reproduces_the_shell() {
    let _guard = serial();
    let t = 0.1;
    let mut worst: f64 = 0.0;
    let mut worst_limit: f64 = 0.0;
    for (name, net, _) in fixture_networks(t) {
        let cycle = find_hamiltonian_cycle(&net, &SolveConfig::default()).unwrap();
        let strip = break_cycle(&cycle, &net, 0).unwrap();

        let dev = deployed_deviation(&strip, &net, t).unwrap();
        assert!(dev <= 2.0 * t, "{name}: deviation {dev} above 2t");
        worst = worst.max(dev);

        let dev0 = deployed_deviation(&strip, &net, 1e-6).unwrap();
        assert!(dev0 <= 1e-9, "{name}: t->0 deviation {dev0} above 1e-9");
        worst_limit = worst_limit.max(dev0);
    }
    println!(
        "PASS criterion 9: folded-state centers within {worst:.2e} of the shell (limit 2t), \
         and within {worst_limit:.2e} at t = 1e-6 l (limit 1e-9)"
    );
}

#[test]
fn criterion_10_pipeline_is_deterministic() {
    let _guard = serial();
    let bin = env!("CARGO_BIN_EXE_stackfold");
    let dir = tempfile::tempdir().unwrap();
    let fixtures = [
        ("cube", 1.0, 1.0, 1.0, 1u32),
        ("rod", 1.0, 1.0, 7.0, 7u32),
        ("plate", 3.0, 3.0, 1.0, 3u32),
    ];
    let obj_of = |w: f64, d: f64, h: f64| -> String {
        let v = [
            (0.0, 0.0, 0.0),
            (w, 0.0, 0.0),
            (w, d, 0.0),
            (0.0, d, 0.0),
            (0.0, 0.0, h),
            (w, 0.0, h),
            (w, d, h),
            (0.0, d, h),
        ];
        let f = [
            (1, 3, 2),
            (1, 4, 3),
            (5, 6, 7),
            (5, 7, 8),
            (1, 2, 6),
            (1, 6, 5),
            (2, 3, 7),
            (2, 7, 6),
            (3, 4, 8),
            (3, 8, 7),
            (4, 1, 5),
            (4, 5, 8),
        ];
        let mut s = String::new();
        for (x, y, z) in v {
            s.push_str(&format!("v {x} {y} {z}\n"));
        }
        for (a, b, c) in f {
            s.push_str(&format!("f {a} {b} {c}\n"));
        }
        s
    };
    let run = |args: &[&str]| {
        let out = std::process::Command::new(bin).args(args).output().unwrap();
        assert!(
            out.status.success(),
            "{args:?}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
    };

    for (name, w, d, h, res) in fixtures {
        let mesh = dir.path().join(format!("{name}.obj"));
        std::fs::write(&mesh, obj_of(w, d, h)).unwrap();
        let mut outputs: Vec<Vec<u8>> = Vec::new();
        for attempt in 0..2 {
            let net = dir.path().join(format!("{name}-{attempt}.net"));
            let cyc = dir.path().join(format!("{name}-{attempt}.cyc"));
            let full = dir.path().join(format!("{name}-{attempt}.plan"));
            run(&[
                "voxelize",
                "--input",
                mesh.to_str().unwrap(),
                "--resolution",
                &res.to_string(),
                "--thickness",
                "0.1",
                "--output",
                net.to_str().unwrap(),
            ]);
            run(&[
                "stripify",
                "--plan",
                net.to_str().unwrap(),
                "--seed",
                "42",
                "--output",
                cyc.to_str().unwrap(),
            ]);
            run(&[
                "stack",
                "--plan",
                cyc.to_str().unwrap(),
                "--seed",
                "42",
                "--output",
                full.to_str().unwrap(),
            ]);
            outputs.push(std::fs::read(&full).unwrap());
        }
        assert_eq!(outputs[0], outputs[1], "{name}: plans differ across runs");
    }

    // The transform plan is deterministic too.
    let rod_net = dir.path().join("rod-0.net");
    let plate_net = dir.path().join("plate-0.net");
    let mut transforms = Vec::new();
    for attempt in 0..2 {
        let out = dir.path().join(format!("t{attempt}.plan"));
        run(&[
            "transform",
            "--plan-a",
            rod_net.to_str().unwrap(),
            "--plan-b",
            plate_net.to_str().unwrap(),
            "--seed",
            "42",
            "--output",
            out.to_str().unwrap(),
        ]);
        transforms.push(std::fs::read(&out).unwrap());
    }
    assert_eq!(transforms[0], transforms[1]);
    println!("PASS criterion 10: byte-identical plan and transform files across repeated runs");
}
