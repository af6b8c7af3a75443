//! Committee pruning.
//!
//! Pessimistic pruning greedily removes the rule whose removal gives the
//! lowest training error, records the whole removal sequence, and returns the
//! smallest committee attaining the lowest error seen. Optimistic pruning
//! makes a single pass over the rules and drops a rule when its local error
//! plus a combinatorial penalty is no better than the local error after
//! removal; small samples are first uniformly resampled to a larger set so
//! the penalty does not dwarf every local error.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::committee::{
    classify_votes, compute_default_vector, DecisionCommittee, DefaultVector, Example, Sample,
};
use crate::error::{Error, Result};

const ERR_TOL: f64 = 1e-12;

/// Parameters of the optimistic pruning test.
#[derive(Clone, Copy, Debug)]
pub struct PenaltyParams {
    pub delta: f64,
    pub resample_target: usize,
    pub seed: u64,
}

impl PenaltyParams {
    pub fn new(delta: f64, resample_target: usize, seed: u64) -> Result<Self> {
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::precondition(format!("delta {delta} outside (0,1)")));
        }
        if resample_target == 0 {
            return Err(Error::precondition("resample target must be positive"));
        }
        Ok(Self {
            delta,
            resample_target,
            seed,
        })
    }
}

impl Default for PenaltyParams {
    fn default() -> Self {
        Self {
            delta: 0.05,
            resample_target: 5000,
            seed: 0,
        }
    }
}

/// One pessimistic removal: which rule went and what was left.
#[derive(Clone, Debug)]
pub struct PruneRecord {
    /// Index of the removed rule in the committee passed in.
    pub rule_index: usize,
    /// Training error of the committee after the removal.
    pub error: f64,
    pub r_dc: usize,
    pub l_dc: usize,
}

/// The full removal sequence of a pessimistic pruning run.
#[derive(Clone, Debug)]
pub struct PruneTrace {
    pub initial_error: f64,
    pub steps: Vec<PruneRecord>,
}

impl PruneTrace {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("step,rule_id,error,r_dc,l_dc\n");
        for (i, s) in self.steps.iter().enumerate() {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                i + 1,
                s.rule_index,
                s.error,
                s.r_dc,
                s.l_dc
            ));
        }
        out
    }
}

/// Evaluates the error of a vote table (one c-wide row per example) with the
/// default vector recomputed from the ambiguous rows, exactly as the deployed
/// committee would behave.
fn error_of_votes(
    votes: &[i32],
    examples: &[Example],
    c: usize,
    fallback: &[f64],
    tie_seed: u64,
) -> f64 {
    let mut dist = vec![0.0; c];
    let mut mass = 0.0;
    for (i, e) in examples.iter().enumerate() {
        let row = &votes[i * c..(i + 1) * c];
        let max = *row.iter().max().expect("non-empty row");
        if row.iter().filter(|&&v| v == max).count() > 1 {
            mass += e.weight();
            let share = e.weight() / e.class_count() as f64;
            for cls in e.classes().ones() {
                dist[cls] += share;
            }
        }
    }
    if mass == 0.0 {
        dist.copy_from_slice(fallback);
        mass = dist.iter().sum();
    }
    let default =
        DefaultVector::new(dist.iter().map(|w| w / mass).collect()).expect("normalized default");
    let mut wrong = 0.0;
    let mut total = 0.0;
    for (i, e) in examples.iter().enumerate() {
        let row = &votes[i * c..(i + 1) * c];
        let predicted = classify_votes(row, &default, tie_seed);
        total += e.weight();
        if !e.classes().get(predicted) {
            wrong += e.weight();
        }
    }
    wrong / total
}

/// Greedy global pruning: repeatedly removes the rule whose removal yields
/// the minimum committee error on the sample until no rules remain, then
/// returns the smallest committee attaining the lowest error of the whole
/// sequence (the input committee counts as a member). The default vector is
/// recomputed per evaluated candidate and on the result.
pub fn prune_pessimistic(
    dc: &DecisionCommittee,
    sample: &Sample,
    tie_seed: u64,
) -> Result<(DecisionCommittee, PruneTrace)> {
    let c = dc.c();
    let examples = sample.examples();
    let fallback = sample.class_distribution();
    let rules = dc.rules();
    let sat: Vec<Vec<u32>> = rules
        .iter()
        .map(|r| {
            examples
                .iter()
                .enumerate()
                .filter(|(_, e)| r.monomial.matches(e.observation()))
                .map(|(i, _)| i as u32)
                .collect()
        })
        .collect();

    let mut votes = vec![0i32; examples.len() * c];
    for (ri, r) in rules.iter().enumerate() {
        for &e in &sat[ri] {
            let row = &mut votes[e as usize * c..(e as usize + 1) * c];
            for (slot, &v) in row.iter_mut().zip(r.votes.components()) {
                *slot += v as i32;
            }
        }
    }

    let initial_error = error_of_votes(&votes, examples, c, &fallback, tie_seed);
    let mut trace = PruneTrace {
        initial_error,
        steps: Vec::new(),
    };

    let mut alive: Vec<usize> = (0..rules.len()).collect();
    let mut best_error = initial_error;
    let mut best_prefix = 0usize;
    let mut scratch = votes.clone();
    let mut removals = 0usize;

    while !alive.is_empty() {
        let mut chosen: Option<(f64, usize)> = None; // (error, position in alive)
        for (pos, &ri) in alive.iter().enumerate() {
            scratch.copy_from_slice(&votes);
            for &e in &sat[ri] {
                let row = &mut scratch[e as usize * c..(e as usize + 1) * c];
                for (slot, &v) in row.iter_mut().zip(rules[ri].votes.components()) {
                    *slot -= v as i32;
                }
            }
            let err = error_of_votes(&scratch, examples, c, &fallback, tie_seed);
            let replace = match chosen {
                None => true,
                Some((best, best_pos)) => {
                    let best_ri = alive[best_pos];
                    err < best - ERR_TOL
                        || ((err - best).abs() <= ERR_TOL
                            && rules[ri].monomial.literal_count()
                                > rules[best_ri].monomial.literal_count())
                }
            };
            if replace {
                chosen = Some((err, pos));
            }
        }
        let (err, pos) = chosen.expect("alive not empty");
        let ri = alive.remove(pos);
        for &e in &sat[ri] {
            let row = &mut votes[e as usize * c..(e as usize + 1) * c];
            for (slot, &v) in row.iter_mut().zip(rules[ri].votes.components()) {
                *slot -= v as i32;
            }
        }
        removals += 1;
        let l_dc: usize = alive
            .iter()
            .map(|&i| rules[i].monomial.literal_count())
            .sum();
        trace.steps.push(PruneRecord {
            rule_index: ri,
            error: err,
            r_dc: alive.len(),
            l_dc,
        });
        if err < best_error - ERR_TOL {
            best_error = err;
            best_prefix = removals;
        } else if (err - best_error).abs() <= ERR_TOL {
            // same error with fewer rules: prefer the smaller committee
            best_error = best_error.min(err);
            best_prefix = removals;
        }
    }

    let removed: Vec<usize> = trace.steps[..best_prefix]
        .iter()
        .map(|s| s.rule_index)
        .collect();
    let keep: Vec<usize> = (0..rules.len()).filter(|i| !removed.contains(i)).collect();
    let pruned = dc.with_rule_subset(&keep)?;
    let default = compute_default_vector(&pruned, sample)?;
    Ok((pruned.with_default(default)?, trace))
}

/// The largest total literal count, over the given observations, of the
/// rules other than the excluded one that a single observation satisfies.
/// This is the empirical proxy for the worst co-satisfiable literal mass.
pub fn set_bound(
    dc: &DecisionCommittee,
    excluded_rule: usize,
    examples: &[Example],
) -> Result<usize> {
    if excluded_rule >= dc.rules().len() {
        return Err(Error::precondition(format!(
            "rule index {excluded_rule} not in committee"
        )));
    }
    let mut best = 0usize;
    for e in examples {
        let mut total = 0usize;
        for (ri, r) in dc.rules().iter().enumerate() {
            if ri != excluded_rule && r.monomial.matches(e.observation()) {
                total += r.monomial.literal_count();
            }
        }
        best = best.max(total);
    }
    Ok(best)
}

/// The local-convergence penalty:
/// sqrt(((set_value + 2) * ln(n) + ln(1/delta)) / local_count).
pub fn penalty(set_value: usize, n: usize, delta: f64, local_count: usize) -> Result<f64> {
    if n < 1 {
        return Err(Error::precondition("variable count must be positive"));
    }
    if local_count < 1 {
        return Err(Error::precondition("local sample must be non-empty"));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::precondition(format!("delta {delta} outside (0,1)")));
    }
    let numerator = (set_value + 2) as f64 * (n as f64).ln() + (1.0 / delta).ln();
    Ok((numerator / local_count as f64).sqrt())
}

/// Single-pass local pruning. When the sample is smaller than the resample
/// target it is first uniformly resampled with replacement to that size.
/// Rules are tested once each, most specific first; a rule goes when its
/// local error plus the penalty reaches the local error after removal, and a
/// rule with an empty local sample goes unconditionally. The default vector
/// of the result is recomputed on the original sample.
pub fn prune_optimistic(
    dc: &DecisionCommittee,
    sample: &Sample,
    params: &PenaltyParams,
    tie_seed: u64,
) -> Result<DecisionCommittee> {
    PenaltyParams::new(params.delta, params.resample_target, params.seed)?;
    let working: Vec<Example> = if sample.len() < params.resample_target {
        let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
        let uniform = 1.0 / params.resample_target as f64;
        (0..params.resample_target)
            .map(|_| {
                sample.examples()[rng.random_range(0..sample.len())].with_weight(uniform)
            })
            .collect()
    } else {
        sample.examples().to_vec()
    };

    let rules = dc.rules();
    let mut order: Vec<usize> = (0..rules.len()).collect();
    order.sort_by(|&a, &b| {
        rules[b]
            .monomial
            .literal_count()
            .cmp(&rules[a].monomial.literal_count())
            .then(a.cmp(&b))
    });

    let mut alive: Vec<bool> = vec![true; rules.len()];
    for &ri in &order {
        let local: Vec<Example> = working
            .iter()
            .filter(|e| rules[ri].monomial.matches(e.observation()))
            .cloned()
            .collect();
        if local.is_empty() {
            alive[ri] = false;
            continue;
        }
        let keep: Vec<usize> = (0..rules.len()).filter(|&i| alive[i]).collect();
        let current = dc.with_rule_subset(&keep)?;
        let current = refresh_default(current, &working)?;
        let eps_with = current.error_on_examples(&local, tie_seed)?;

        let keep_without: Vec<usize> = keep.iter().copied().filter(|&i| i != ri).collect();
        let without = dc.with_rule_subset(&keep_without)?;
        let without = refresh_default(without, &working)?;
        let eps_without = without.error_on_examples(&local, tie_seed)?;

        let excluded_pos = keep.iter().position(|&i| i == ri).expect("rule is alive");
        let set_v = set_bound(&current, excluded_pos, &working)?;
        let alpha = penalty(set_v, dc.n(), params.delta, local.len())?;
        if eps_with + alpha >= eps_without {
            alive[ri] = false;
        }
    }

    let keep: Vec<usize> = (0..rules.len()).filter(|&i| alive[i]).collect();
    let pruned = dc.with_rule_subset(&keep)?;
    let default = compute_default_vector(&pruned, sample)?;
    pruned.with_default(default)
}

/// Recomputes a committee's default vector from a raw example slice.
fn refresh_default(dc: DecisionCommittee, examples: &[Example]) -> Result<DecisionCommittee> {
    let c = dc.c();
    let mut dist = vec![0.0; c];
    let mut mass = 0.0;
    let mut fallback = vec![0.0; c];
    for e in examples {
        let votes = dc.vote(e.observation())?;
        let max = *votes.iter().max().expect("non-empty");
        let share = e.weight() / e.class_count() as f64;
        for cls in e.classes().ones() {
            fallback[cls] += share;
        }
        if votes.iter().filter(|&&v| v == max).count() > 1 {
            mass += e.weight();
            let share = e.weight() / e.class_count() as f64;
            for cls in e.classes().ones() {
                dist[cls] += share;
            }
        }
    }
    if mass == 0.0 {
        dist = fallback;
        mass = dist.iter().sum();
    }
    let default = DefaultVector::new(dist.into_iter().map(|w| w / mass).collect())?;
    dc.with_default(default)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::Bits;
    use crate::committee::{Monomial, Rule, VoteVector};

    fn obs(bits: &[u8]) -> Bits {
        Bits::from_bools(&bits.iter().map(|&b| b == 1).collect::<Vec<_>>())
    }

    fn ex(bits: &[u8], cls: usize, c: usize) -> Example {
        let mut classes = Bits::zeros(c);
        classes.set(cls, true);
        Example::new(obs(bits), classes, 1.0).unwrap()
    }

    fn rule(n: usize, pos: &[usize], votes: Vec<i8>) -> Rule {
        Rule {
            monomial: Monomial::from_literals(n, pos, &[]).unwrap(),
            votes: VoteVector::new(votes).unwrap(),
        }
    }

    /// Three classes, two essential rules: x0 votes class 1, x1 votes class
    /// 2, and the uncovered examples are class 0 so the default vector can
    /// rescue only them. Removing either rule dumps its class onto the
    /// default, which then ties and must misclassify someone.
    fn essential_dc_and_sample() -> (DecisionCommittee, Sample) {
        let rules = vec![
            rule(2, &[0], vec![-1, 1, -1]),
            rule(2, &[1], vec![-1, -1, 1]),
        ];
        let names = vec!["0".to_string(), "1".to_string(), "2".to_string()];
        let dc = DecisionCommittee::new(2, 3, names.clone(), rules, DefaultVector::uniform(3))
            .unwrap();
        let mut examples = vec![
            ex(&[1, 0], 1, 3),
            ex(&[1, 0], 1, 3),
            ex(&[0, 1], 2, 3),
            ex(&[0, 1], 2, 3),
        ];
        for _ in 0..4 {
            examples.push(ex(&[0, 0], 0, 3));
        }
        let sample = Sample::new(examples, 2, 3, names).unwrap();
        (dc, sample)
    }

    #[test]
    fn pessimistic_keeps_needed_rules() {
        let (dc, sample) = essential_dc_and_sample();
        let (pruned, trace) = prune_pessimistic(&dc, &sample, 0).unwrap();
        assert_eq!(trace.initial_error, 0.0);
        assert_eq!(pruned.rules().len(), 2);
        assert_eq!(pruned.error_rate(&sample, 0).unwrap(), 0.0);
        assert_eq!(trace.steps.len(), 2); // sequence always runs to empty
    }

    #[test]
    fn pessimistic_strips_unsupported_rule() {
        let (dc, sample) = essential_dc_and_sample();
        let mut rules = dc.rules().to_vec();
        // satisfied by no example in the sample
        rules.push(rule(2, &[0, 1], vec![1, 1, 0]));
        let bigger = DecisionCommittee::new(
            2,
            3,
            dc.class_names().to_vec(),
            rules,
            DefaultVector::uniform(3),
        )
        .unwrap();
        let (pruned, trace) = prune_pessimistic(&bigger, &sample, 0).unwrap();
        assert_eq!(pruned.rules().len(), 2);
        assert_eq!(pruned.error_rate(&sample, 0).unwrap(), 0.0);
        assert_eq!(trace.initial_error, 0.0);
        // no kept-trace entry may beat the result on (error, then size)
        let (best_err, best_r) = (0.0, 2);
        for s in &trace.steps {
            assert!(s.error > best_err - 1e-12 || s.r_dc >= best_r);
        }
    }

    #[test]
    fn pessimistic_empty_committee_passthrough() {
        let dc = DecisionCommittee::new(
            2,
            2,
            vec!["0".into(), "1".into()],
            vec![],
            DefaultVector::uniform(2),
        )
        .unwrap();
        let sample = Sample::new(
            vec![ex(&[0, 0], 0, 2), ex(&[1, 1], 1, 2)],
            2,
            2,
            vec!["0".into(), "1".into()],
        )
        .unwrap();
        let (pruned, trace) = prune_pessimistic(&dc, &sample, 0).unwrap();
        assert!(pruned.rules().is_empty());
        assert!(trace.steps.is_empty());
    }

    #[test]
    fn pessimistic_never_increases_error() {
        let rules = vec![
            rule(3, &[0], vec![-1, 1]),
            rule(3, &[1], vec![1, -1]),
            rule(3, &[2], vec![1, 1]),
            rule(3, &[0, 1], vec![0, 1]),
        ];
        let dc = DecisionCommittee::new(
            3,
            2,
            vec!["0".into(), "1".into()],
            rules,
            DefaultVector::uniform(2),
        )
        .unwrap();
        let mut examples = vec![];
        for i in 0..16u8 {
            let bits = [i & 1, (i >> 1) & 1, (i >> 2) & 1];
            let cls = ((i & 1) ^ ((i >> 1) & 1)) as usize;
            examples.push(ex(&bits, cls, 2));
        }
        let sample = Sample::new(examples, 3, 2, vec!["0".into(), "1".into()]).unwrap();
        let before = dc.error_rate(&sample, 0).unwrap();
        let (pruned, trace) = prune_pessimistic(&dc, &sample, 0).unwrap();
        let after = pruned.error_rate(&sample, 0).unwrap();
        assert!(after <= before + 1e-12);
        // returned member is minimal among lowest-error members of the trace
        let best = trace
            .steps
            .iter()
            .map(|s| s.error)
            .fold(trace.initial_error, f64::min);
        assert!((after - best).abs() <= 1e-9);
        for s in &trace.steps {
            if (s.error - best).abs() <= 1e-12 {
                assert!(s.r_dc >= pruned.rules().len());
            }
        }
    }

    #[test]
    fn set_bound_cases() {
        // rule 0: 1 literal (excluded); rule 1: 3 literals on x1,x2,x3
        let rules = vec![
            rule(4, &[0], vec![-1, 1]),
            rule(4, &[1, 2, 3], vec![1, -1]),
        ];
        let dc = DecisionCommittee::new(
            4,
            2,
            vec!["0".into(), "1".into()],
            rules,
            DefaultVector::uniform(2),
        )
        .unwrap();
        let examples = vec![ex(&[0, 1, 1, 1], 0, 2), ex(&[1, 0, 0, 0], 1, 2)];
        assert_eq!(set_bound(&dc, 0, &examples).unwrap(), 3);
        // no observation satisfies the other rule
        let examples = vec![ex(&[1, 0, 0, 0], 1, 2), ex(&[1, 1, 0, 1], 1, 2)];
        assert_eq!(set_bound(&dc, 0, &examples).unwrap(), 0);
        // co-satisfiable rules of 2 and 3 literals on disjoint variables
        let rules = vec![
            rule(6, &[5], vec![-1, 1]),
            rule(6, &[0, 1], vec![1, -1]),
            rule(6, &[2, 3, 4], vec![1, -1]),
        ];
        let dc = DecisionCommittee::new(
            6,
            2,
            vec!["0".into(), "1".into()],
            rules,
            DefaultVector::uniform(2),
        )
        .unwrap();
        let examples = vec![ex(&[1, 1, 1, 1, 1, 0], 0, 2)];
        assert_eq!(set_bound(&dc, 0, &examples).unwrap(), 5);
        assert!(set_bound(&dc, 9, &examples).is_err());
    }

    #[test]
    fn penalty_values() {
        // set=3, n=10, delta=0.05, count=5000
        let p = penalty(3, 10, 0.05, 5000).unwrap();
        assert!((p - 0.05387).abs() < 1e-4);
        // 4x the count halves the penalty
        let p4 = penalty(3, 10, 0.05, 20000).unwrap();
        assert!((p4 - p / 2.0).abs() < 1e-12);
        // n = 1 contributes nothing through ln(n)
        let p1 = penalty(7, 1, 0.05, 100).unwrap();
        assert!((p1 - ((1.0f64 / 0.05).ln() / 100.0).sqrt()).abs() < 1e-12);
        assert!(penalty(3, 0, 0.05, 10).is_err());
        assert!(penalty(3, 10, 0.05, 0).is_err());
        assert!(penalty(3, 10, 1.5, 10).is_err());
    }

    #[test]
    fn penalty_monotonicity() {
        let base = penalty(3, 10, 0.05, 500).unwrap();
        assert!(penalty(4, 10, 0.05, 500).unwrap() > base);
        assert!(penalty(3, 10, 0.01, 500).unwrap() > base);
        assert!(penalty(3, 10, 0.05, 1000).unwrap() < base);
    }

    #[test]
    fn optimistic_removes_vacuous_rule() {
        let (dc, sample) = essential_dc_and_sample();
        let mut rules = dc.rules().to_vec();
        rules.push(rule(2, &[0, 1], vec![1, 1, 0])); // never satisfied
        let bigger = DecisionCommittee::new(
            2,
            3,
            dc.class_names().to_vec(),
            rules,
            DefaultVector::uniform(3),
        )
        .unwrap();
        let params = PenaltyParams::new(0.05, 500, 9).unwrap();
        let pruned = prune_optimistic(&bigger, &sample, &params, 0).unwrap();
        assert!(pruned
            .rules()
            .iter()
            .all(|r| r.monomial.literal_count() < 2));
    }

    #[test]
    fn optimistic_removes_redundant_and_keeps_decisive() {
        // x0 decides the class; a redundant duplicate-effect rule on x0 & x1
        // changes nothing locally and must go, while the decisive rule stays.
        let rules = vec![rule(2, &[0], vec![-1, 1]), rule(2, &[0, 1], vec![0, 1])];
        let dc = DecisionCommittee::new(
            2,
            2,
            vec!["0".into(), "1".into()],
            rules,
            DefaultVector::uniform(2),
        )
        .unwrap();
        let mut examples = vec![];
        for _ in 0..15 {
            examples.push(ex(&[1, 0], 1, 2));
            examples.push(ex(&[1, 1], 1, 2));
        }
        for _ in 0..50 {
            examples.push(ex(&[0, 1], 0, 2));
            examples.push(ex(&[0, 0], 0, 2));
        }
        let sample = Sample::new(examples, 2, 2, vec!["0".into(), "1".into()]).unwrap();
        let params = PenaltyParams::new(0.05, 5000, 3).unwrap();
        let pruned = prune_optimistic(&dc, &sample, &params, 0).unwrap();
        let kept: Vec<usize> = pruned
            .rules()
            .iter()
            .map(|r| r.monomial.literal_count())
            .collect();
        assert_eq!(kept, vec![1], "decisive one-literal rule kept, redundant dropped");
        assert_eq!(pruned.error_rate(&sample, 0).unwrap(), 0.0);
    }

    #[test]
    fn pruning_is_deterministic() {
        let (dc, sample) = essential_dc_and_sample();
        let params = PenaltyParams::new(0.05, 200, 11).unwrap();
        let a = prune_optimistic(&dc, &sample, &params, 5).unwrap();
        let b = prune_optimistic(&dc, &sample, &params, 5).unwrap();
        assert_eq!(a.to_json().unwrap(), b.to_json().unwrap());
        let (pa, ta) = prune_pessimistic(&dc, &sample, 5).unwrap();
        let (pb, tb) = prune_pessimistic(&dc, &sample, 5).unwrap();
        assert_eq!(pa.to_json().unwrap(), pb.to_json().unwrap());
        assert_eq!(ta.to_csv(), tb.to_csv());
    }
}
