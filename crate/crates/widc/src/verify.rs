//! Randomized verification suites for the optimization claims the trainer
//! rests on: optimality of the monotone vote assigner, the two-class
//! threshold table, the multilabel approximation bound, submodularity of the
//! ranking-loss set function, and agreement of Queyranne minimization with
//! brute force. The CLI `verify` subcommand runs all of them; the acceptance
//! tests call them directly.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::submodular::{
    brute_force_min, check_submodular, queyranne_min, SetFunctionInstance,
};
use crate::votes::{
    assign_vector, brute_force_vector, multilabel_bound_holds, two_class_delta_with_shift,
    z_ranking, ClassWeights, PairWeights,
};

/// Options for a verification run. The threshold shift perturbs the
/// two-class table inside the suite and exists so tests can prove the suite
/// notices a wrong table; leave it at zero otherwise.
#[derive(Clone, Copy, Debug)]
pub struct VerifyOptions {
    pub seed: u64,
    pub two_class_threshold_shift: f64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            seed: 0,
            two_class_threshold_shift: 0.0,
        }
    }
}

/// Outcome of one suite.
#[derive(Clone, Debug)]
pub struct SuiteResult {
    pub name: &'static str,
    pub cases: usize,
    pub failures: usize,
    pub max_deviation: f64,
}

impl SuiteResult {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

/// Results of all suites.
#[derive(Clone, Debug)]
pub struct VerifyReport {
    pub suites: Vec<SuiteResult>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.suites.iter().all(SuiteResult::passed)
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for s in &self.suites {
            out.push_str(&format!(
                "{}: {} ({} cases, {} failures, max deviation {:.3e})\n",
                s.name,
                if s.passed() { "PASS" } else { "FAIL" },
                s.cases,
                s.failures,
                s.max_deviation
            ));
        }
        out
    }
}

pub fn run_all(options: &VerifyOptions) -> Result<VerifyReport> {
    Ok(VerifyReport {
        suites: vec![
            suite_vote_optimality(options.seed)?,
            suite_two_class_table(options.seed, options.two_class_threshold_shift)?,
            suite_multilabel_bound(options.seed)?,
            suite_submodularity(options.seed)?,
            suite_queyranne(options.seed)?,
        ],
    })
}

fn random_pairs(rng: &mut ChaCha8Rng, c: usize, sparsity: f64) -> PairWeights {
    let mut p = PairWeights::zeros(c);
    for j in 0..c {
        for k in 0..c {
            if j != k && rng.random::<f64>() >= sparsity {
                p.add(j, k, rng.random::<f64>());
            }
        }
    }
    p
}

/// Pair weights equivalent to single-label class weights.
fn pairs_from_class_weights(w: &[f64]) -> PairWeights {
    let c = w.len();
    let mut p = PairWeights::zeros(c);
    for j in 0..c {
        for k in 0..c {
            if j != k {
                p.add(j, k, w[j] / (c - 1) as f64);
            }
        }
    }
    p
}

/// 500 random single-label instances with 2 to 6 classes: the monotone
/// assigner must match the exhaustive 3^c minimum to 1e-9 and return a
/// vector that is non-decreasing in ascending-weight order.
pub fn suite_vote_optimality(seed: u64) -> Result<SuiteResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(1));
    let mut failures = 0;
    let mut max_dev = 0.0f64;
    let cases = 500;
    for _ in 0..cases {
        let c = rng.random_range(2..=6);
        let w: Vec<f64> = (0..c)
            .map(|_| {
                if rng.random::<f64>() < 0.1 {
                    0.0
                } else {
                    rng.random::<f64>()
                }
            })
            .collect();
        let weights = ClassWeights::new(w.clone())?;
        let v = assign_vector(&weights);
        let pairs = pairs_from_class_weights(&w);
        let (_, z_best) = brute_force_vector(&pairs)?;
        let z_got = z_ranking(&pairs, &v);
        let dev = (z_got - z_best).abs();
        max_dev = max_dev.max(dev);
        let mut order: Vec<usize> = (0..c).collect();
        order.sort_by(|&a, &b| w[a].partial_cmp(&w[b]).unwrap().then(a.cmp(&b)));
        let read: Vec<i8> = order.iter().map(|&i| v.components()[i]).collect();
        let monotone = read.windows(2).all(|p| p[0] <= p[1]);
        if dev > 1e-9 || !monotone {
            failures += 1;
        }
    }
    Ok(SuiteResult {
        name: "ranking-vote-optimality",
        cases,
        failures,
        max_deviation: max_dev,
    })
}

/// The two-class table over 1000 ratio points spanning all five rows,
/// including points within 1e-6 of every threshold. The chosen delta must
/// match the table and attain the minimum of the explicit two-class loss.
pub fn suite_two_class_table(seed: u64, shift: f64) -> Result<SuiteResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(2));
    let mut log_ratios: Vec<f64> = (0..1000).map(|_| rng.random::<f64>() * 8.0 - 4.0).collect();
    for t in [1.5, 0.5, -0.5, -1.5] {
        for eps in [-1e-6, -1e-9, 1e-9, 1e-6] {
            log_ratios.push(t + eps);
        }
    }
    // reference thresholds for the expected delta
    let expected_delta = |log_ratio: f64| -> i8 {
        if log_ratio >= 1.5 {
            2
        } else if log_ratio >= 0.5 {
            1
        } else if log_ratio >= -0.5 {
            0
        } else if log_ratio >= -1.5 {
            -1
        } else {
            -2
        }
    };
    let mut failures = 0;
    let mut max_dev = 0.0f64;
    let cases = log_ratios.len();
    for &lr in &log_ratios {
        let ratio = lr.exp();
        let w_plus = ratio / (1.0 + ratio);
        let w_minus = 1.0 - w_plus;
        let got = two_class_delta_with_shift(w_minus, w_plus, shift)?;
        // two-class loss of a delta: W+ e^{-d/2} + W- e^{d/2}
        let loss = |d: i8| w_plus * (-0.5 * d as f64).exp() + w_minus * (0.5 * d as f64).exp();
        let best = (-2..=2).map(loss).fold(f64::INFINITY, f64::min);
        let dev = loss(got) - best;
        max_dev = max_dev.max(dev);
        // exact-threshold points accept either adjacent delta (equal loss)
        let table_ok = got == expected_delta((w_plus / w_minus).ln());
        let z_ok = dev <= 1e-9;
        if !table_ok || !z_ok {
            failures += 1;
        }
    }
    Ok(SuiteResult {
        name: "two-class-table",
        cases,
        failures,
        max_deviation: max_dev,
    })
}

/// 200 random multilabel instances with 4 to 8 classes and at most c/2
/// labels per example: the split-and-assign vector must beat the brute-force
/// optimum times (1 + e / (c - k)).
pub fn suite_multilabel_bound(seed: u64) -> Result<SuiteResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(3));
    let mut failures = 0;
    let mut max_ratio = 0.0f64;
    let cases = 200;
    for _ in 0..cases {
        let c = rng.random_range(4..=8);
        let k_cap = (c / 2).max(2);
        // draw weighted multilabel "examples" directly as (classes, weight)
        let count = rng.random_range(4..40);
        let mut k_seen = 1usize;
        let mut original = PairWeights::zeros(c);
        let mut class_w = vec![0.0; c];
        for _ in 0..count {
            let labels = rng.random_range(1..=k_cap);
            k_seen = k_seen.max(labels);
            let mut set: Vec<usize> = Vec::new();
            while set.len() < labels {
                let cls = rng.random_range(0..c);
                if !set.contains(&cls) {
                    set.push(cls);
                }
            }
            let w = rng.random::<f64>() + 0.01;
            // original pair weights: w / (s (c - s)) per (member, non-member)
            let pair_w = w / (labels * (c - labels)) as f64;
            for &j in &set {
                for k in 0..c {
                    if !set.contains(&k) {
                        original.add(j, k, pair_w);
                    }
                }
            }
            // split transform: w / s to each member class
            for &j in &set {
                class_w[j] += w / labels as f64;
            }
        }
        let v = assign_vector(&ClassWeights::new(class_w)?);
        if !multilabel_bound_holds(&original, &v, k_seen)? {
            failures += 1;
        }
        let (_, z_star) = brute_force_vector(&original)?;
        if z_star > 0.0 {
            let ratio = z_ranking(&original, &v) / z_star;
            max_ratio = max_ratio.max(ratio);
        }
    }
    Ok(SuiteResult {
        name: "multilabel-bound",
        cases,
        failures,
        max_deviation: max_ratio,
    })
}

/// 1000 random (pair matrix, alpha, A, B) instances with up to 10 classes:
/// the submodular inequality must hold every time.
pub fn suite_submodularity(seed: u64) -> Result<SuiteResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(4));
    let mut failures = 0;
    let mut max_gap = f64::NEG_INFINITY;
    let cases = 1000;
    for _ in 0..cases {
        let c = rng.random_range(2..=10);
        let pairs = random_pairs(&mut rng, c, 0.3);
        let alpha = rng.random::<f64>() * 6.0 - 3.0;
        let instance = SetFunctionInstance::new(pairs, alpha)?;
        let a = rng.random_range(0..1u64 << c);
        let b = rng.random_range(0..1u64 << c);
        if !check_submodular(&instance, a, b) {
            failures += 1;
        }
        let gap = crate::submodular::f_eval(&instance, a | b)
            + crate::submodular::f_eval(&instance, a & b)
            - crate::submodular::f_eval(&instance, a)
            - crate::submodular::f_eval(&instance, b);
        max_gap = max_gap.max(gap);
    }
    Ok(SuiteResult {
        name: "submodularity",
        cases,
        failures,
        max_deviation: max_gap,
    })
}

/// 100 random symmetric instances with 3 to 10 classes: Queyranne's value
/// must equal the brute-force minimum to 1e-9.
pub fn suite_queyranne(seed: u64) -> Result<SuiteResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(5));
    let mut failures = 0;
    let mut max_dev = 0.0f64;
    let cases = 100;
    for round in 0..cases {
        let c = rng.random_range(3..=10);
        let sparsity = if round % 4 == 0 { 0.6 } else { 0.0 };
        let pairs = random_pairs(&mut rng, c, sparsity);
        let (_, qz) = queyranne_min(&pairs)?;
        let (_, bz) = brute_force_min(&pairs)?;
        let dev = (qz - bz).abs();
        max_dev = max_dev.max(dev);
        if dev > 1e-9 {
            failures += 1;
        }
    }
    Ok(SuiteResult {
        name: "queyranne-equivalence",
        cases,
        failures,
        max_deviation: max_dev,
    })
}
