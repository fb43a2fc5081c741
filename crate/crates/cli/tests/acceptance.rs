//! Acceptance suite: one test per shipping criterion, each printing a
//! single `[PASS]`/`[FAIL]` line (visible with `--nocapture`). A failing
//! criterion also prints every offending case before panicking.

use std::process::Command;

use patrol_core::chain::{is_irreducible, random_chain, stationary_distribution};
use patrol_core::evidence::{audit_dominance, char_poly_sweep, conjecture_sweep, symmetry_sweep};
use patrol_core::game::game_value;
use patrol_core::graph::{build_complete, build_line, build_star, DiGraph};
use patrol_core::hitting::{enumerate_hitting, hitting_profile, hitting_profile_vectorized};
use patrol_core::solver::{necessary_residual_line, solve_line, solve_maximin, SolveConfig};
use patrol_core::strategies::{
    complete_kron, line_optimal, random_walk, random_walk_value, star_optimal, star_value,
    suboptimality_factor,
};
use patrol_core::GameInstance;

fn criterion(number: usize, description: &str, failures: Vec<String>) {
    if failures.is_empty() {
        println!("[PASS] criterion {number}: {description}");
    } else {
        println!("[FAIL] criterion {number}: {description}");
        for f in &failures {
            println!("  - {f}");
        }
        panic!("criterion {number} failed with {} issue(s)", failures.len());
    }
}

/// Star, line, and complete graphs for one size.
fn topologies(n: usize) -> Vec<(&'static str, DiGraph)> {
    vec![
        ("star", build_star(n).unwrap()),
        ("line", build_line(n).unwrap()),
        ("complete", build_complete(n).unwrap()),
    ]
}

#[test]
fn criterion_01_hitting_engines_agree() {
    let mut failures = Vec::new();
    let mut chains = 0usize;
    let mut seed = 1000u64;
    for n in 3..=5 {
        for (kind, g) in topologies(n) {
            for tau in [2usize, 3, 4, 5, 6, 6] {
                seed += 1;
                let c = random_chain(&g, seed).unwrap();
                assert!(is_irreducible(&c), "random chains on {kind}-{n} are irreducible");
                chains += 1;
                let rec = hitting_profile(&c, tau).unwrap();
                let vec = hitting_profile_vectorized(&c, tau).unwrap();
                let mut gap = 0.0f64;
                for k in 1..=tau {
                    gap = gap.max((rec.step(k) - vec.step(k)).abs().max());
                }
                for i in 1..=n {
                    for j in 1..=n {
                        let e = enumerate_hitting(&c, i, j, tau).unwrap();
                        gap = gap.max((rec.capture(i, j) - e).abs());
                    }
                }
                if gap > 1e-12 {
                    failures.push(format!("{kind}-{n} tau={tau} seed={seed}: gap {gap:.3e}"));
                }
            }
        }
    }
    assert!(chains >= 50, "only {chains} chains sampled");
    criterion(
        1,
        "step recursion, vectorized operator, and path enumeration agree \
         to 1e-12 on 54 random irreducible chains (n <= 5, tau <= 6)",
        failures,
    );
}

#[test]
fn criterion_02_universal_bound_and_stationary_inequality() {
    let mut failures = Vec::new();
    let mut chains = 0usize;
    let mut seed = 2000u64;
    for n in 3..=6 {
        for (kind, g) in topologies(n) {
            let windows = match kind {
                "star" => [2, 2 * n - 3],
                "line" => [n - 1, 2 * n - 3],
                _ => [1, n - 1],
            };
            for tau in windows {
                for _ in 0..9 {
                    seed += 1;
                    let c = random_chain(&g, seed).unwrap();
                    chains += 1;
                    let value = game_value(&c, tau).unwrap();
                    let bound = tau as f64 / n as f64;
                    if value > bound + 1e-9 {
                        failures.push(format!(
                            "{kind}-{n} tau={tau} seed={seed}: value {value} > {bound}"
                        ));
                    }
                    let pi = stationary_distribution(&c).unwrap();
                    let pi = pi.as_slice().to_vec();
                    let profile = hitting_profile(&c, tau).unwrap();
                    for k in 1..=tau {
                        let f = profile.step(k);
                        for j in 0..n {
                            let mass: f64 = (0..n).map(|i| pi[i] * f[(i, j)]).sum();
                            if mass > pi[j] + 1e-10 {
                                failures.push(format!(
                                    "{kind}-{n} tau={tau} seed={seed}: pi F_{k} exceeds pi \
                                     at column {} by {:.3e}",
                                    j + 1,
                                    mass - pi[j]
                                ));
                            }
                        }
                    }
                }
            }
        }
    }
    assert!(chains >= 200, "only {chains} chains sampled");
    criterion(
        2,
        "216 random chains with nontrivial windows: value <= tau/n + 1e-9 \
         and pi'F_k <= pi' + 1e-10 elementwise",
        failures,
    );
}

#[test]
fn criterion_03_block_cyclic_strategies_are_tight() {
    let mut failures = Vec::new();
    for (n, tau) in [(4usize, 2usize), (6, 2), (6, 3), (8, 4)] {
        let c = complete_kron(n, tau).unwrap();
        let value = game_value(&c, tau).unwrap();
        let target = tau as f64 / n as f64;
        if (value - target).abs() > 1e-12 {
            failures.push(format!("({n},{tau}): value {value} vs {target}"));
        }
    }
    let half = game_value(&complete_kron(2, 1).unwrap(), 1).unwrap();
    if half != 0.5 {
        failures.push(format!("(2,1): value {half} is not exactly 1/2"));
    }
    let one = game_value(&complete_kron(2, 2).unwrap(), 2).unwrap();
    if one != 1.0 {
        failures.push(format!("(2,2): value {one} is not exactly 1"));
    }
    criterion(
        3,
        "block-cyclic values hit tau/n to 1e-12 at (4,2),(6,2),(6,3),(8,4); \
         two-node values are exactly 1/2 and 1",
        failures,
    );
}

#[test]
fn criterion_04_random_walk_value_and_suboptimality_factor() {
    let mut failures = Vec::new();
    for n in 2..=6 {
        let c = random_walk(n).unwrap();
        for tau in 1..=8 {
            let engine = game_value(&c, tau).unwrap();
            let closed = random_walk_value(n, tau).unwrap();
            if (engine - closed).abs() > 1e-12 {
                failures.push(format!("n={n} tau={tau}: engine {engine} vs closed {closed}"));
            }
        }
    }
    let floor = 1.0 - (-1.0f64).exp();
    for n in 3..=60 {
        let mut previous = f64::INFINITY;
        for tau in 1..n {
            let f = suboptimality_factor(n, tau).unwrap();
            if f < floor - 1e-12 {
                failures.push(format!("n={n} tau={tau}: factor {f} below 1-1/e"));
            }
            if f > previous + 1e-12 {
                failures.push(format!("n={n} tau={tau}: factor increased {previous} -> {f}"));
            }
            previous = f;
        }
    }
    criterion(
        4,
        "random-walk value matches 1-(1-1/n)^tau to 1e-12 (n <= 6); the \
         suboptimality factor stays above 1-1/e and is nonincreasing in tau",
        failures,
    );
}

#[test]
fn criterion_05_star_closed_form_and_search() {
    let mut failures = Vec::new();
    for n in 3..=6 {
        let c = star_optimal(n).unwrap();
        for tau in 2..=8 {
            let engine = game_value(&c, tau).unwrap();
            let closed = star_value(n, tau).unwrap();
            if (engine - closed).abs() > 1e-12 {
                failures.push(format!("n={n} tau={tau}: engine {engine} vs closed {closed}"));
            }
        }
    }
    for (n, tau) in [(3usize, 3usize), (4, 3), (5, 4)] {
        let inst = GameInstance::new(build_star(n).unwrap(), tau).unwrap();
        let report = solve_maximin(&inst, &SolveConfig::default()).unwrap();
        let target = star_value(n, tau).unwrap();
        if (report.value - target).abs() > 1e-3 {
            failures.push(format!(
                "search on star-{n} tau={tau}: {} vs optimum {target}",
                report.value
            ));
        }
    }
    criterion(
        5,
        "hub strategy matches its closed-form value to 1e-12 (n in 3..6, \
         tau in 2..8) and the search gets within 1e-3 of it",
        failures,
    );
}

#[test]
fn criterion_06_line_search_matches_the_balanced_optimum() {
    let mut failures = Vec::new();
    for n in 3..=5usize {
        let reference_chain = line_optimal(n).unwrap();
        for tau in (n - 1)..=(2 * n - 3) {
            let reference = game_value(&reference_chain, tau).unwrap();
            let report = solve_line(n, tau, &SolveConfig::default()).unwrap();
            if report.value > reference + 1e-6 {
                failures.push(format!(
                    "n={n} tau={tau}: search value {} exceeds the optimum {reference}",
                    report.value
                ));
            }
            if report.value < reference - 1e-3 {
                failures.push(format!(
                    "n={n} tau={tau}: search value {} misses the optimum {reference}",
                    report.value
                ));
            }
            let residual = necessary_residual_line(&report.best, tau).unwrap();
            if residual > 1e-3 {
                failures.push(format!("n={n} tau={tau}: optimality residual {residual:.3e}"));
            }
        }
    }
    criterion(
        6,
        "line search stays within [optimum - 1e-3, optimum + 1e-6] for every \
         nontrivial window (n in 3..5) with optimality residual <= 1e-3",
        failures,
    );
}

#[test]
fn criterion_07_balanced_line_sweeps_stay_clean() {
    let mut failures = Vec::new();
    for n in [5usize, 6] {
        let report = conjecture_sweep(n, 8, 5000, 2026, 1e-9).unwrap();
        if report.improvements != 0 {
            failures.push(format!(
                "n={n} tau=8: {} of {} samples matched or beat the balanced value",
                report.improvements, report.samples
            ));
        }
        if !report.certifies(0.99, 0.99) {
            failures.push(format!("n={n} tau=8: 5000 samples failed to certify (0.99, 0.99)"));
        }
        if report.samples < 459 {
            failures.push(format!("n={n} tau=8: only {} samples", report.samples));
        }
    }
    criterion(
        7,
        "5000-sample sweeps at (5,8) and (6,8) find no improvement over the \
         balanced line and certify the (0.99, 0.99) pair",
        failures,
    );
}

#[test]
fn criterion_08_dominance_audits_find_no_violations() {
    let mut failures = Vec::new();
    for n in 3..=6usize {
        for (kind, g, tau) in [
            ("star", build_star(n).unwrap(), 3),
            ("line", build_line(n).unwrap(), n),
            ("complete", build_complete(n).unwrap(), 2),
        ] {
            let violations = audit_dominance(&g, tau, 100, 4000 + n as u64).unwrap();
            if !violations.is_empty() {
                failures.push(format!(
                    "{kind}-{n} tau={tau}: {} violation(s), first: {:?}",
                    violations.len(),
                    violations[0]
                ));
            }
        }
    }
    criterion(
        8,
        "capture-inequality audits on star/line/complete (n <= 6, 100 chains \
         each, tau >= 2) report zero violations at 1e-10",
        failures,
    );
}

#[test]
fn criterion_09_reflection_and_recurrence_identities() {
    let mut failures = Vec::new();
    let mut instances = 0usize;
    for n in 3..=7usize {
        for sample in symmetry_sweep(n, n, 10, 900 + n as u64).unwrap() {
            instances += 1;
            if sample.difference > 1e-12 {
                failures.push(format!(
                    "n={n} sample {}: |f(x) - f(1-x)| = {:.3e}",
                    sample.index, sample.difference
                ));
            }
        }
    }
    assert!(instances >= 50, "only {instances} symmetry instances");
    for n in 3..=9usize {
        for sample in char_poly_sweep(n, 20, 10, 900 + n as u64).unwrap() {
            if sample.tail_gap > 1e-10 || sample.recurrence_gap > 1e-10 {
                failures.push(format!(
                    "n={n} sample {}: tail gap {:.3e}, recurrence gap {:.3e}",
                    sample.index, sample.tail_gap, sample.recurrence_gap
                ));
            }
        }
    }
    criterion(
        9,
        "reflection identity holds to 1e-12 on 50 random line instances and \
         both polynomial recurrence identities hold to 1e-10 on the grid",
        failures,
    );
}

#[test]
fn criterion_10_degenerate_windows_give_exact_zeros() {
    let mut failures = Vec::new();
    let line = build_line(5).unwrap();
    for tau in 1..=3usize {
        for seed in 0..10u64 {
            let c = random_chain(&line, 500 + seed).unwrap();
            let value = game_value(&c, tau).unwrap();
            if value != 0.0 {
                failures.push(format!("line-5 tau={tau} seed={seed}: value {value} != 0"));
            }
        }
    }
    // Two disconnected 2-cycles: every cross pair is unreachable.
    let split = DiGraph::new(
        4,
        [(1, 2), (2, 1), (3, 4), (4, 3), (1, 1), (2, 2), (3, 3), (4, 4)],
    )
    .unwrap();
    for seed in 0..10u64 {
        let c = random_chain(&split, 600 + seed).unwrap();
        for tau in [1usize, 3, 6] {
            let value = game_value(&c, tau).unwrap();
            if value != 0.0 {
                failures.push(format!("reducible seed={seed} tau={tau}: value {value} != 0"));
            }
        }
    }
    criterion(
        10,
        "windows below the diameter and reducible chains both give game \
         value exactly 0",
        failures,
    );
}

fn run_patrol(args: &[&str]) -> Vec<u8> {
    let out = Command::new(env!("CARGO_BIN_EXE_patrol"))
        .args(args)
        .output()
        .expect("spawn patrol");
    assert!(
        out.status.success(),
        "patrol {args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out.stdout
}

#[test]
fn criterion_11_seeded_subcommands_are_byte_reproducible() {
    let mut failures = Vec::new();
    let commands: Vec<Vec<&str>> = vec![
        vec!["solve", "--topology", "star", "--n", "4", "--tau", "3", "--seed", "9", "--restarts", "4"],
        vec!["solve", "--topology", "complete", "--n", "4", "--tau", "2", "--seed", "3", "--restarts", "4"],
        vec!["evidence", "sweep", "--n", "5", "--tau", "8", "--samples", "400", "--seed", "7"],
        vec!["evidence", "symmetry", "--n", "6", "--tau", "6", "--samples", "30", "--seed", "7"],
        vec!["evidence", "symmetry", "--n", "6", "--tau", "6", "--samples", "12", "--seed", "7", "--format", "csv"],
        vec!["evidence", "charpoly", "--n", "8", "--samples", "10", "--lambdas", "5", "--seed", "7"],
        vec!["evidence", "dominance", "--topology", "line", "--n", "5", "--tau", "5", "--samples", "40", "--seed", "7"],
    ];
    for args in &commands {
        let reference = run_patrol(args);
        for threads in ["1", "4"] {
            let mut with_threads = args.clone();
            with_threads.extend_from_slice(&["--threads", threads]);
            if run_patrol(&with_threads) != reference {
                failures.push(format!("{args:?} differs with --threads {threads}"));
            }
        }
        if run_patrol(args) != reference {
            failures.push(format!("{args:?} differs between identical runs"));
        }
    }
    criterion(
        11,
        "every seeded subcommand emits byte-identical output across repeated \
         runs and thread counts",
        failures,
    );
}
