//! Acceptance suite: one test per exit criterion, each printing a PASS/FAIL
//! line (visible with `cargo test --test acceptance -- --nocapture`).
//! Tolerances and thresholds are pinned in the assertions.

use std::time::Instant;

use widc::data::gen_xd6;
use widc::pipeline::{cross_validate, noise_sweep_kind, train, NoiseKind, PruneMode, RunConfig};
use widc::verify::{
    suite_multilabel_bound, suite_queyranne, suite_submodularity, suite_two_class_table,
    suite_vote_optimality,
};
use widc::Monomial;

fn report(criterion: usize, name: &str, ok: bool) {
    println!(
        "acceptance {criterion} ({name}): {}",
        if ok { "PASS" } else { "FAIL" }
    );
    assert!(ok, "acceptance criterion {criterion} ({name}) failed");
}

#[test]
fn a1_vote_assignment_optimality() {
    let start = Instant::now();
    let suite = suite_vote_optimality(0).unwrap();
    let elapsed = start.elapsed();
    let ok = suite.passed()
        && suite.cases >= 500
        && suite.max_deviation <= 1e-9
        && elapsed.as_secs_f64() < 10.0;
    println!(
        "  {} instances, max |Z - Z*| = {:.3e}, {:?}",
        suite.cases, suite.max_deviation, elapsed
    );
    report(1, "vote assignment optimality", ok);
}

#[test]
fn a2_two_class_table_agreement() {
    let suite = suite_two_class_table(0, 0.0).unwrap();
    let ok = suite.passed() && suite.cases >= 1000;
    println!(
        "  {} ratio points (incl. near-threshold), max loss slack = {:.3e}",
        suite.cases, suite.max_deviation
    );
    report(2, "two-class table agreement", ok);
}

#[test]
fn a3_multilabel_approximation_bound() {
    let suite = suite_multilabel_bound(0).unwrap();
    let ok = suite.passed() && suite.cases >= 200;
    println!(
        "  {} instances, worst Z/Z* ratio = {:.4}",
        suite.cases, suite.max_deviation
    );
    report(3, "multilabel approximation bound", ok);
}

#[test]
fn a4_submodular_inequality() {
    let suite = suite_submodularity(0).unwrap();
    let ok = suite.passed() && suite.cases >= 1000;
    println!(
        "  {} instances, max inequality gap = {:.3e}",
        suite.cases, suite.max_deviation
    );
    report(4, "submodular inequality", ok);
}

#[test]
fn a5_queyranne_equals_brute_force() {
    let start = Instant::now();
    let suite = suite_queyranne(0).unwrap();
    let elapsed = start.elapsed();
    let ok = suite.passed() && suite.cases >= 100 && elapsed.as_secs_f64() < 30.0;
    println!(
        "  {} instances, max |value difference| = {:.3e}, {:?}",
        suite.cases, suite.max_deviation, elapsed
    );
    report(5, "symmetric minimization equals brute force", ok);
}

#[test]
fn a6_xd6_reproduction() {
    // five seeded runs at 10% class noise, 10-fold CV, pessimistic pruning
    let mut errors = Vec::new();
    let mut l_dcs = Vec::new();
    for seed in 0..5u64 {
        let sample = gen_xd6(512, 0.10, 0.0, 1000 + seed).unwrap();
        let config = RunConfig {
            seed,
            mode: PruneMode::Pessimistic,
            folds: 10,
            ..RunConfig::default()
        };
        let cv = cross_validate(&sample, &config).unwrap();
        errors.push(cv.mean_error);
        l_dcs.push(cv.mean_l_dc);
    }
    let mean_error: f64 = errors.iter().sum::<f64>() / errors.len() as f64;
    let mean_l: f64 = l_dcs.iter().sum::<f64>() / l_dcs.len() as f64;

    // noise-free runs must recover the target terms and never touch x9
    let targets: Vec<Monomial> = [[0usize, 1, 2], [3, 4, 5], [6, 7, 8]]
        .iter()
        .map(|vars| Monomial::from_literals(10, vars, &[]).unwrap())
        .collect();
    let mut with_all_targets = 0;
    let mut x9_free = true;
    for seed in 0..20u64 {
        let sample = gen_xd6(512, 0.0, 0.0, seed).unwrap();
        let config = RunConfig {
            seed,
            mode: PruneMode::Pessimistic,
            ..RunConfig::default()
        };
        let model = train(&sample, &config).unwrap();
        let monomials: Vec<&Monomial> =
            model.committee.rules().iter().map(|r| &r.monomial).collect();
        if targets.iter().all(|t| monomials.iter().any(|m| *m == t)) {
            with_all_targets += 1;
        }
        if monomials.iter().any(|m| m.has_variable(9)) {
            x9_free = false;
        }
    }
    println!(
        "  10% noise: mean error {mean_error:.4} (<= 0.25), mean l_DC {mean_l:.1} (in [8, 40])"
    );
    println!("  0% noise: all targets in {with_all_targets}/20 runs (>= 10), x9 absent: {x9_free}");
    let ok = mean_error <= 0.25
        && (8.0..=40.0).contains(&mean_l)
        && with_all_targets * 2 >= 20
        && x9_free;
    report(6, "XD6 reproduction", ok);
}

#[test]
fn a7_noise_robustness() {
    let config = RunConfig {
        seed: 0,
        ..RunConfig::default()
    };
    let rows = noise_sweep_kind(&config, NoiseKind::Class).unwrap();
    let max_l = rows.iter().map(|r| r.mean_l_dc).fold(0.0f64, f64::max);
    let err_0 = rows.first().unwrap().mean_error;
    let err_40 = rows.last().unwrap().mean_error;
    println!(
        "  {} levels, max mean l_DC {max_l:.1} (<= 60), error {err_0:.4} @0% vs {err_40:.4} @40%",
        rows.len()
    );
    let ok = rows.len() == 21 && max_l <= 60.0 && err_0 <= err_40;
    report(7, "noise robustness", ok);
}

#[test]
fn a8_pipeline_invariants() {
    let mut prune_never_hurts = true;
    let mut prune_never_grows = true;
    for (seed, noise) in [(0u64, 0.0), (1, 0.10), (2, 0.20), (3, 0.10), (4, 0.30)] {
        let sample = gen_xd6(512, noise, 0.0, 5000 + seed).unwrap();
        let base = RunConfig {
            seed,
            ..RunConfig::default()
        };
        let unpruned = train(
            &sample,
            &RunConfig {
                mode: PruneMode::None,
                ..base
            },
        )
        .unwrap();
        let err_none = unpruned.committee.error_rate(&sample, seed).unwrap();
        let (r_none, _) = unpruned.committee.size_metrics();
        let pessimistic = train(
            &sample,
            &RunConfig {
                mode: PruneMode::Pessimistic,
                ..base
            },
        )
        .unwrap();
        let err_p = pessimistic.committee.error_rate(&sample, seed).unwrap();
        if err_p > err_none + 1e-12 {
            prune_never_hurts = false;
        }
        let optimistic = train(
            &sample,
            &RunConfig {
                mode: PruneMode::Optimistic,
                ..base
            },
        )
        .unwrap();
        for model in [&pessimistic, &optimistic] {
            if model.committee.size_metrics().0 > r_none {
                prune_never_grows = false;
            }
        }
    }

    // byte-identical reruns under a fixed seed
    let sample = gen_xd6(512, 0.10, 0.0, 99).unwrap();
    let config = RunConfig {
        seed: 9,
        ..RunConfig::default()
    };
    let model_a = train(&sample, &config).unwrap().committee.to_json().unwrap();
    let model_b = train(&sample, &config).unwrap().committee.to_json().unwrap();
    let cv_a = cross_validate(&sample, &config).unwrap();
    let cv_b = cross_validate(&sample, &config).unwrap();
    let reproducible = model_a == model_b
        && cv_a.to_csv() == cv_b.to_csv()
        && cv_a.to_json().unwrap() == cv_b.to_json().unwrap();

    println!(
        "  prune never hurts LS error: {prune_never_hurts}, never grows: {prune_never_grows}, byte-identical reruns: {reproducible}"
    );
    report(
        8,
        "pipeline invariants",
        prune_never_hurts && prune_never_grows && reproducible,
    );
}

#[test]
fn a9_z_sequence_strictly_decreasing() {
    let mut ok = true;
    let mut traces = 0;
    for (seed, noise) in [(0u64, 0.0), (1, 0.10), (2, 0.25), (3, 0.40)] {
        let sample = gen_xd6(512, noise, 0.0, 7000 + seed).unwrap();
        let config = RunConfig {
            seed,
            mode: PruneMode::None,
            ..RunConfig::default()
        };
        let model = train(&sample, &config).unwrap();
        let trace = &model.grow_trace;
        let mut prev = trace.initial_z;
        for &z in &trace.committee_z {
            let strictly_decreasing = z < prev - 1e-12;
            if !strictly_decreasing {
                ok = false;
            }
            prev = z;
        }
        traces += 1;
    }
    println!("  {traces} growth traces checked, gap threshold 1e-12");
    report(9, "Z sequence strictly decreasing", ok);
}
