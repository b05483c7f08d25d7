//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if a criterion outside `KNOWN_RED` fails.

use std::path::PathBuf;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use covplan::coverage_sensor::{
    apply_mask, build_coverage_mask, coverage_probability, coverage_update, CoverageModel,
    SensorParams,
};
use covplan::decision_core::{
    calibrated, marginal_coverage, reference_state, reward, transition, Direction, JointState,
    RewardWeights, RobotState,
};
use covplan::experiment::run_sweep;
use covplan::planner::{mcts, CoveragePlanner, PlannerConfig, RangeMode};
use covplan::simulator::{
    corridor_world, false_opening_world, load_environment, run_mission, run_mission_with,
    sense_in_place, standard_maze, GroundTruthGrid, MissionConfig, MissionLog, PlannerKind,
};
use covplan::world_model::{Irm, NodeId, RiskClass, WorldPoint};

// tolerances and budgets
const CALIBRATION_TOL: f64 = 1e-9;
const SIGMOID_STEP: f64 = 0.01;
const MCTS_REL_TOL: f64 = 0.05;
const MCTS_MIN_SHARE: f64 = 0.95;
const MAZE_SEEDS: [u64; 5] = [1, 2, 3, 4, 5];
const MAZE_STEP_LIMIT: usize = 2000;
const LF8_RATIO: f64 = 1.2;
const LF4_AREA_RATIO: f64 = 0.95;
const REACHABLE_SHARE: f64 = 0.9;
const EPISODE_MEDIAN_MS: f64 = 250.0;
const RISK_SEEDS: [u64; 3] = [1, 2, 3];

/// Criteria expected to stay red; see the README.
const KNOWN_RED: &[&str] = &["6a"];

struct Outcome {
    id: &'static str,
    pass: bool,
    line: String,
}

fn report(id: &'static str, title: &str, pass: bool, elapsed: Duration, budget: Duration, detail: String) -> Outcome {
    let in_time = elapsed <= budget;
    let pass = pass && in_time;
    let tag = if pass { "PASS" } else { "FAIL" };
    let line = format!(
        "[{tag}] {id:<3} {title}: {detail} ({:.2} s, budget {} s)",
        elapsed.as_secs_f64(),
        budget.as_secs()
    );
    println!("{line}");
    Outcome { id, pass, line }
}

fn free_world(w: usize, h: usize, cell: f64) -> Irm {
    let mut irm = Irm::new(w, h, cell, WorldPoint::default()).unwrap();
    for i in 0..irm.len() {
        let n = irm.node_from_index(i);
        irm.set_risk(n, RiskClass::Free).unwrap();
    }
    irm
}

fn c1_calibration() -> Outcome {
    let t = Instant::now();
    let params = SensorParams::default();
    let base = RewardWeights {
        k_rho: 0.0,
        k_mu: 0.0,
        ..RewardWeights::default()
    };
    let mut worst: f64 = 0.0;
    for q in 1..=32 {
        let r_adapt = q as f64 * 0.25;
        let mask = build_coverage_mask(r_adapt, &params, 0.5).unwrap();
        let wts = calibrated(&mask, &base);
        let s0 = reference_state(&mask, Direction::N);
        for (card, diag) in [
            (Direction::E, Direction::NE),
            (Direction::N, Direction::NW),
            (Direction::W, Direction::SW),
            (Direction::S, Direction::SE),
        ] {
            let d = (reward(&s0, card, &mask, &wts) - reward(&s0, diag, &mask, &wts)).abs();
            worst = worst.max(d);
        }
    }
    report(
        "1",
        "equal-reward calibration",
        worst <= CALIBRATION_TOL,
        t.elapsed(),
        Duration::from_secs(1),
        format!("max |R(a1) - R(a_sqrt2)| = {worst:.3e} over 32 ranges (tol {CALIBRATION_TOL:e})"),
    )
}

fn c2_sigmoid() -> Outcome {
    let t = Instant::now();
    let p = SensorParams::default();
    let mid = coverage_probability(p.r0, &p);
    let n = (2.0 * p.r0 / SIGMOID_STEP).round() as usize;
    let values: Vec<f64> = (0..=n)
        .map(|i| coverage_probability(i as f64 * SIGMOID_STEP, &p))
        .collect();
    let decreasing = values.windows(2).all(|w| w[1] < w[0]);
    report(
        "2",
        "sigmoid model",
        mid == 0.5 && decreasing,
        t.elapsed(),
        Duration::from_secs(1),
        format!("P(r0) = {mid}, strictly decreasing over {} samples: {decreasing}", n + 1),
    )
}

/// The sensor with its maximum range cut to `range`.
struct Cut(SensorParams, f64);

impl CoverageModel for Cut {
    fn probability(&self, r: f64) -> f64 {
        coverage_probability(r, &self.0)
    }
    fn max_range(&self) -> f64 {
        self.1
    }
    fn n_rays(&self) -> usize {
        self.0.n_rays
    }
    fn block_threshold(&self) -> f64 {
        self.0.block_threshold
    }
}

fn c3_mask_ray() -> Outcome {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let params = SensorParams::default();
    let mut mismatches = 0;
    for _ in 0..200 {
        let w = rng.random_range(5..=45);
        let h = rng.random_range(5..=45);
        let cell = [0.25, 0.5, 1.0][rng.random_range(0..3)];
        let r_adapt = rng.random_range(0.1..=params.r_max);
        let at = NodeId::new(rng.random_range(0..w), rng.random_range(0..h));
        let mut by_ray = free_world(w, h, cell);
        let mut by_mask = by_ray.clone();
        coverage_update(&mut by_ray, at, &Cut(params, r_adapt)).unwrap();
        let mask = build_coverage_mask(r_adapt, &params, cell).unwrap();
        apply_mask(&mut by_mask, at, &mask);
        let same = by_ray
            .nodes()
            .iter()
            .zip(by_mask.nodes())
            .all(|(a, b)| a.coverage.to_bits() == b.coverage.to_bits());
        if !same {
            mismatches += 1;
        }
    }
    report(
        "3",
        "mask/ray equivalence",
        mismatches == 0,
        t.elapsed(),
        Duration::from_secs(10),
        format!("{mismatches} of 200 random free lattices differ bitwise"),
    )
}

fn random_world(rng: &mut ChaCha8Rng) -> Irm {
    let mut irm = Irm::new(9, 9, 0.5, WorldPoint::default()).unwrap();
    for i in 0..irm.len() {
        let n = irm.node_from_index(i);
        let class = match rng.random_range(0..10) {
            0 => RiskClass::Occupied,
            1 | 2 => RiskClass::Unknown,
            _ => RiskClass::Free,
        };
        irm.set_risk(n, class).unwrap();
        if class == RiskClass::Free && rng.random_bool(0.5) {
            irm.set_coverage(n, rng.random_range(0.0..1.0)).unwrap();
        }
    }
    irm
}

fn c4_submodularity() -> Outcome {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let params = SensorParams::default();
    let wts = RewardWeights::default();
    let mut checks = 0usize;
    let mut violations = 0usize;
    for _ in 0..100 {
        let mut world = random_world(&mut rng);
        let robot = NodeId::new(4, 4);
        world.set_risk(robot, RiskClass::Free).unwrap();
        let mask = build_coverage_mask(rng.random_range(0.5..2.5), &params, 0.5).unwrap();
        let s = JointState::new(RobotState::new(robot, Direction::N), world).unwrap();
        // grow a random executed prefix one node-action at a time
        let mut covered = s.world.clone();
        let mut walker = s.clone();
        let mut before: Vec<f64> = Direction::ALL
            .iter()
            .map(|&a| marginal_coverage(&s, a, &mask, &wts))
            .collect();
        for _ in 0..6 {
            let a = Direction::ALL[rng.random_range(0..8)];
            walker = transition(&walker, a);
            apply_mask(&mut covered, walker.robot.node, &mask);
            let probe = JointState::new(s.robot, covered.clone()).unwrap();
            for (i, &a) in Direction::ALL.iter().enumerate() {
                let after = marginal_coverage(&probe, a, &mask, &wts);
                checks += 1;
                if after > before[i] {
                    violations += 1;
                }
                before[i] = after;
            }
        }
    }
    report(
        "4",
        "submodularity",
        violations == 0,
        t.elapsed(),
        Duration::from_secs(30),
        format!("{violations} increases in {checks} prefix extensions on 100 random 9x9 worlds"),
    )
}

fn discounted_return(s: &JointState, actions: &[Direction], mask: &covplan::CoverageMask, wts: &RewardWeights, gamma: f64) -> f64 {
    let mut s = s.clone();
    let mut total = 0.0;
    let mut g = 1.0;
    for &a in actions {
        total += g * reward(&s, a, mask, wts);
        s = transition(&s, a);
        let node = s.robot.node;
        apply_mask(&mut s.world, node, mask);
        g *= gamma;
    }
    total
}

fn c5_mcts_oracle() -> Outcome {
    let t = Instant::now();
    let params = SensorParams::default();
    let mask = build_coverage_mask(1.0, &params, 0.5).unwrap();
    let wts = RewardWeights {
        k_d: 0.0,
        ..RewardWeights::default()
    };
    let cfg = PlannerConfig {
        discount: 0.95,
        max_depth: 4,
        max_simulations: 20_000,
        ..PlannerConfig::default()
    };
    let s = JointState::new(
        RobotState::new(NodeId::new(2, 2), Direction::N),
        free_world(5, 5, 0.5),
    )
    .unwrap();
    let mut best = f64::NEG_INFINITY;
    for code in 0..8usize.pow(4) {
        let seq: Vec<Direction> = (0..4)
            .map(|k| Direction::ALL[(code / 8usize.pow(k)) % 8])
            .collect();
        best = best.max(discounted_return(&s, &seq, &mask, &wts, cfg.discount));
    }
    let mut hits = 0;
    let mut worst_gap: f64 = 0.0;
    for seed in 0..50u64 {
        let tree = mcts(&s, &mask, &wts, &cfg, seed);
        let actions: Vec<Direction> = tree.greedy_steps().iter().map(|st| st.action).collect();
        let value = discounted_return(&s, &actions, &mask, &wts, cfg.discount);
        let gap = (best - value) / best.abs();
        worst_gap = worst_gap.max(gap);
        if gap <= MCTS_REL_TOL {
            hits += 1;
        }
    }
    let share = hits as f64 / 50.0;
    report(
        "5",
        "MCTS vs exhaustive optimum",
        share >= MCTS_MIN_SHARE,
        t.elapsed(),
        Duration::from_secs(120),
        format!(
            "optimum {best:.4}, {hits}/50 seeds within {:.0}%, worst gap {:.2}%",
            MCTS_REL_TOL * 100.0,
            worst_gap * 100.0
        ),
    )
}

fn fixture(name: &str) -> GroundTruthGrid {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(name);
    let text = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    load_environment(&text).unwrap()
}

fn mean(xs: impl Iterator<Item = f64>) -> f64 {
    let v: Vec<f64> = xs.collect();
    v.iter().sum::<f64>() / v.len() as f64
}

struct MazeStudy {
    adaptive: Vec<MissionLog>,
    lf4: Vec<MissionLog>,
    lf8: Vec<MissionLog>,
    reachable: f64,
    elapsed: Duration,
}

fn maze_study(grid: &GroundTruthGrid) -> MazeStudy {
    let t = Instant::now();
    let cfg = MissionConfig {
        step_limit: MAZE_STEP_LIMIT,
        ..MissionConfig::default()
    };
    let run = |kind| {
        MAZE_SEEDS
            .iter()
            .map(|&s| run_mission(grid, kind, &cfg, s).unwrap())
            .collect::<Vec<_>>()
    };
    let adaptive = run(PlannerKind::Adaptive);
    let lf4 = run(PlannerKind::Lf4);
    let lf8 = run(PlannerKind::Lf8);
    MazeStudy {
        adaptive,
        lf4,
        lf8,
        reachable: grid.reachable_area(),
        elapsed: t.elapsed(),
    }
}

fn c6_maze(study: &MazeStudy) -> Vec<Outcome> {
    let area = |logs: &[MissionLog]| mean(logs.iter().map(|l| l.covered_area()));
    let path = |logs: &[MissionLog]| mean(logs.iter().map(|l| l.path_length()));
    let (a, l4, l8) = (area(&study.adaptive), area(&study.lf4), area(&study.lf8));
    let (pa, p4) = (path(&study.adaptive), path(&study.lf4));
    let budget = Duration::from_secs(600);
    vec![
        report(
            "6a",
            "maze: adaptive vs lf8 area",
            a >= LF8_RATIO * l8,
            study.elapsed,
            budget,
            format!("adaptive {a:.1} m2, lf8 {l8:.1} m2, ratio {:.3} (need >= {LF8_RATIO})", a / l8),
        ),
        report(
            "6b",
            "maze: adaptive vs lf4 area and path",
            a >= LF4_AREA_RATIO * l4 && pa <= p4,
            study.elapsed,
            budget,
            format!(
                "area ratio {:.3} (need >= {LF4_AREA_RATIO}), path adaptive {pa:.1} m vs lf4 {p4:.1} m",
                a / l4
            ),
        ),
        report(
            "6c",
            "maze: adaptive reachable share",
            a >= REACHABLE_SHARE * study.reachable,
            study.elapsed,
            budget,
            format!(
                "{a:.1} of {:.1} m2 reachable = {:.1}% (need >= {:.0}%)",
                study.reachable,
                100.0 * a / study.reachable,
                REACHABLE_SHARE * 100.0
            ),
        ),
    ]
}

fn c7_latency(grid: &GroundTruthGrid) -> Outcome {
    let t = Instant::now();
    let sensor = SensorParams::default();
    let mut irm = Irm::new(grid.width(), grid.height(), grid.cell_width(), WorldPoint::default()).unwrap();
    let poses = [(5, 5), (27, 27), (60, 38), (82, 71), (49, 93)];
    let mut times = Vec::new();
    for (i, &(c, r)) in poses.iter().cycle().take(15).enumerate() {
        let (c, r) = nearest_free(grid, c, r);
        let pose = grid.cell_center(c, r);
        let scan = sense_in_place(&mut irm, pose, grid, &sensor, sensor.r_max).unwrap();
        let node = irm.nearest_node(pose).unwrap();
        let window = irm.window(node, 50, 50);
        let wnode = window.nearest_node(pose).unwrap();
        let s = JointState::new(RobotState::new(wnode, Direction::N), window).unwrap();
        let mut planner = CoveragePlanner::new(
            sensor,
            RewardWeights::default(),
            PlannerConfig::default(),
            RangeMode::Adaptive { alpha: 2.0 },
        );
        let t0 = Instant::now();
        let out = planner.plan(&s, &scan, i as u64).unwrap();
        times.push(t0.elapsed().as_secs_f64() * 1e3);
        assert_eq!(out.trace.simulations, 2000);
    }
    times.sort_by(f64::total_cmp);
    let median = times[times.len() / 2];
    report(
        "7",
        "episode latency",
        median < EPISODE_MEDIAN_MS,
        t.elapsed(),
        Duration::from_secs(60),
        format!(
            "median {median:.1} ms, max {:.1} ms over 15 episodes, 2000 sims, depth 15, 50x50 (need < {EPISODE_MEDIAN_MS} ms)",
            times[times.len() - 1]
        ),
    )
}

fn nearest_free(grid: &GroundTruthGrid, c: usize, r: usize) -> (usize, usize) {
    let mut best = None;
    for row in 0..grid.height() {
        for col in 0..grid.width() {
            if grid.is_free(col as i64, row as i64) {
                let d = (col as i64 - c as i64).pow(2) + (row as i64 - r as i64).pow(2);
                if best.is_none_or(|(bd, _)| d < bd) {
                    best = Some((d, (col, row)));
                }
            }
        }
    }
    best.unwrap().1
}

/// Independent line-of-sight oracle: is some point of cell `(c, r)` visible
/// from the centre of cell `from` through truth-free cells only?
fn visible(grid: &GroundTruthGrid, from: (usize, usize), c: usize, r: usize) -> bool {
    let w = grid.cell_width();
    let o = grid.cell_center(from.0, from.1);
    let target = grid.cell_center(c, r);
    const OFFS: [f64; 5] = [-0.49, -0.25, 0.0, 0.25, 0.49];
    for &fx in &OFFS {
        for &fy in &OFFS {
            let q = WorldPoint::new(target.x + fx * w, target.y + fy * w);
            let len = o.distance(q);
            let n = (len / (0.02 * w)).ceil().max(1.0) as usize;
            let clear = (0..=n).all(|i| {
                let t = i as f64 / n as f64;
                let p = WorldPoint::new(o.x + t * (q.x - o.x), o.y + t * (q.y - o.y));
                let cx = (p.x / w + 0.5).floor() as i64;
                let cy = (p.y / w + 0.5).floor() as i64;
                (cx, cy) == (c as i64, r as i64) || grid.is_free(cx, cy)
            });
            if clear {
                return true;
            }
        }
    }
    false
}

fn occlusion_violations(grid: &GroundTruthGrid, log: &MissionLog) -> (usize, usize) {
    let mut poses = log.visited.clone();
    poses.sort_unstable();
    poses.dedup();
    let map = &log.final_map;
    let reach = SensorParams::default().r_max + grid.cell_width() * 2.0;
    let (mut covered, mut bad) = (0, 0);
    for i in 0..map.len() {
        if map.nodes()[i].coverage <= 0.0 {
            continue;
        }
        covered += 1;
        let n = map.node_from_index(i);
        let centre = grid.cell_center(n.col, n.row);
        let mut near: Vec<(f64, (usize, usize))> = poses
            .iter()
            .map(|&p| (grid.cell_center(p.0, p.1).distance(centre), p))
            .filter(|&(d, _)| d <= reach)
            .collect();
        near.sort_by(|a, b| a.0.total_cmp(&b.0));
        if !near.iter().any(|&(_, p)| visible(grid, p, n.col, n.row)) {
            bad += 1;
        }
    }
    (covered, bad)
}

fn c8_occlusion(maze_log: &MissionLog, maze: &GroundTruthGrid) -> Outcome {
    let t = Instant::now();
    let corridor = fixture("corridor.map");
    let cfg = MissionConfig::default();
    let corridor_log = run_mission(&corridor, PlannerKind::Adaptive, &cfg, 1).unwrap();
    let (cc, cb) = occlusion_violations(&corridor, &corridor_log);
    let (mc, mb) = occlusion_violations(maze, maze_log);
    report(
        "8",
        "occlusion",
        cb == 0 && mb == 0,
        t.elapsed(),
        Duration::from_secs(60),
        format!("cells covered without line of sight: corridor {cb}/{cc}, maze {mb}/{mc}"),
    )
}

fn c9_false_opening() -> Outcome {
    let t = Instant::now();
    let grid = fixture("false_opening.map");
    let (scenario, injection) = false_opening_world();
    assert_eq!(grid, scenario, "fixture matches the scenario generator");
    let cfg = MissionConfig {
        step_limit: 600,
        ..MissionConfig::default()
    };
    let risk = |kind, seed| {
        run_mission_with(&grid, kind, &cfg, seed, Some(&injection), &mut |_, _| {})
            .unwrap()
            .risk_sum
    };
    let mut ok = true;
    let mut parts = Vec::new();
    for &seed in &RISK_SEEDS {
        let (u, d) = (risk(PlannerKind::Adaptive, seed), risk(PlannerKind::Decoupled, seed));
        ok &= u < d;
        parts.push(format!("seed {seed}: {u:.2} vs {d:.2}"));
    }
    report(
        "9",
        "false-opening risk, unified < decoupled",
        ok,
        t.elapsed(),
        Duration::from_secs(120),
        parts.join(", "),
    )
}

fn c10_determinism(grid: &GroundTruthGrid, study: &MazeStudy) -> Outcome {
    let t = Instant::now();
    let cfg = MissionConfig {
        step_limit: MAZE_STEP_LIMIT,
        ..MissionConfig::default()
    };
    let again = run_sweep(grid, &cfg, &[PlannerKind::Adaptive, PlannerKind::Lf8], &MAZE_SEEDS, None).unwrap();
    let first: Vec<&MissionLog> = study.adaptive.iter().chain(&study.lf8).collect();
    let same = first.len() == again.len()
        && first.iter().zip(&again).all(|(a, b)| a.to_csv() == b.to_csv());
    report(
        "10",
        "determinism of the 6(a) logs",
        same,
        t.elapsed(),
        Duration::from_secs(600),
        format!("{} mission CSVs compared byte for byte: identical = {same}", again.len()),
    )
}

type Check = (&'static str, fn() -> Outcome);

fn main() {
    // optional criterion ids on the command line restrict the run
    let only: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let wants = |id: &str| only.is_empty() || only.iter().any(|o| o == id);
    let mut outcomes = Vec::new();
    let quick: [Check; 5] = [
        ("1", c1_calibration),
        ("2", c2_sigmoid),
        ("3", c3_mask_ray),
        ("4", c4_submodularity),
        ("5", c5_mcts_oracle),
    ];
    for (id, check) in quick {
        if wants(id) {
            outcomes.push(check());
        }
    }
    let maze = fixture("maze.map");
    assert_eq!(maze, standard_maze(), "fixture matches the generator");
    assert_eq!(fixture("corridor.map"), corridor_world());
    let study = (wants("6") || wants("8") || wants("10")).then(|| maze_study(&maze));
    if let (true, Some(study)) = (wants("6"), &study) {
        outcomes.extend(c6_maze(study));
    }
    if wants("7") {
        outcomes.push(c7_latency(&maze));
    }
    if let (true, Some(study)) = (wants("8"), &study) {
        outcomes.push(c8_occlusion(&study.adaptive[0], &maze));
    }
    if wants("9") {
        outcomes.push(c9_false_opening());
    }
    if let (true, Some(study)) = (wants("10"), &study) {
        outcomes.push(c10_determinism(&maze, study));
    }

    let failed: Vec<&Outcome> = outcomes.iter().filter(|o| !o.pass).collect();
    let unexpected: Vec<&&Outcome> = failed.iter().filter(|o| !KNOWN_RED.contains(&o.id)).collect();
    println!(
        "\n{} of {} checks pass; known red: {}",
        outcomes.len() - failed.len(),
        outcomes.len(),
        KNOWN_RED.join(", ")
    );
    for o in &outcomes {
        if o.pass && KNOWN_RED.contains(&o.id) {
            println!("note: {} is listed as known red but passed", o.id);
        }
    }
    if !unexpected.is_empty() {
        for o in unexpected {
            eprintln!("unexpected failure: {}", o.line);
        }
        std::process::exit(1);
    }
}
