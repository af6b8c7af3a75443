//! Ranking-loss vote assignment.
//!
//! Each rule's vote vector in {-1, 0, +1}^c is chosen to minimize the
//! exponential ranking loss Z = sum over (true class j, non-class k) pairs of
//! pair weight times `exp(-(v[j] - v[k]) / 2)`. When every contributing example
//! has a single class, sorting classes by their satisfied weight reduces the
//! search from 3^c vectors to the (c+1)(c+2)/2 monotone ones, and the result
//! is exactly optimal. Multilabel examples are first split into single-label
//! ones; the approximation this induces is bounded and checkable against the
//! brute-force oracle kept here.

use crate::committee::{Example, VoteVector};
use crate::error::{Error, Result};

/// Largest class count accepted by the exhaustive 3^c oracle.
pub const BRUTE_FORCE_CLASS_LIMIT: usize = 12;

/// Per-class satisfied weight W_j: total weight of examples that satisfy a
/// rule's monomial and belong to class j.
#[derive(Clone, Debug)]
pub struct ClassWeights(Vec<f64>);

impl ClassWeights {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        for &w in &weights {
            if w < 0.0 || !w.is_finite() {
                return Err(Error::precondition(format!("negative class weight {w}")));
            }
        }
        Ok(Self(weights))
    }

    pub fn components(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Class weights of the examples satisfying nothing in particular: sums
    /// each example's weight split evenly over its classes (the single-label
    /// transform applied implicitly).
    pub fn from_examples(examples: &[Example], c: usize) -> Result<Self> {
        let mut w = vec![0.0; c];
        for e in examples {
            let share = e.weight() / e.class_count() as f64;
            for cls in e.classes().ones() {
                w[cls] += share;
            }
        }
        Self::new(w)
    }
}

/// Aggregated pair weights `M[j][k]`: total renormalized weight of ranking
/// pairs with true class j against non-class k. The diagonal is zero.
#[derive(Clone, Debug)]
pub struct PairWeights {
    c: usize,
    m: Vec<f64>,
}

impl PairWeights {
    pub fn zeros(c: usize) -> Self {
        Self { c, m: vec![0.0; c * c] }
    }

    pub fn from_matrix(c: usize, entries: Vec<f64>) -> Result<Self> {
        if entries.len() != c * c {
            return Err(Error::DimensionMismatch {
                expected: c * c,
                got: entries.len(),
            });
        }
        for j in 0..c {
            for k in 0..c {
                let v = entries[j * c + k];
                if v < 0.0 || !v.is_finite() {
                    return Err(Error::precondition(format!("negative pair weight {v}")));
                }
                if j == k && v != 0.0 {
                    return Err(Error::precondition("nonzero diagonal pair weight"));
                }
            }
        }
        Ok(Self { c, m: entries })
    }

    pub fn c(&self) -> usize {
        self.c
    }

    #[inline]
    pub fn get(&self, j: usize, k: usize) -> f64 {
        self.m[j * self.c + k]
    }

    pub fn add(&mut self, j: usize, k: usize, w: f64) {
        debug_assert_ne!(j, k);
        self.m[j * self.c + k] += w;
    }

    pub fn total(&self) -> f64 {
        self.m.iter().sum()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.c);
        for j in 0..self.c {
            for k in 0..self.c {
                t.m[k * self.c + j] = self.get(j, k);
            }
        }
        t
    }
}

/// Builds the pair-weight matrix of a restricted sample: every example with
/// s classes out of c contributes weight w / (s * (c - s)) to each (member
/// class, non-member class) pair. Examples belonging to all classes carry no
/// ranking constraint and contribute nothing.
pub fn rankloss_pair_weights(examples: &[Example], c: usize) -> Result<PairWeights> {
    let mut pairs = PairWeights::zeros(c);
    for e in examples {
        let s = e.class_count();
        if s >= c {
            continue;
        }
        let w = e.weight() / (s * (c - s)) as f64;
        for j in e.classes().ones() {
            for k in 0..c {
                if !e.classes().get(k) {
                    pairs.add(j, k, w);
                }
            }
        }
    }
    Ok(pairs)
}

/// The ranking loss of a vote vector against a pair-weight matrix.
pub fn z_ranking(pairs: &PairWeights, v: &VoteVector) -> f64 {
    debug_assert_eq!(pairs.c(), v.len());
    let comp = v.components();
    let mut z = 0.0;
    for j in 0..pairs.c() {
        for k in 0..pairs.c() {
            if j == k {
                continue;
            }
            let w = pairs.get(j, k);
            if w != 0.0 {
                z += w * (-0.5 * (comp[j] - comp[k]) as f64).exp();
            }
        }
    }
    z
}

/// Ranking loss computed directly from class weights under the single-label
/// assumption: Z = sum over j != k of W_j / (c - 1) * exp(-(v[j] - v[k]) / 2).
fn z_from_class_weights(weights: &[f64], v: &[i8]) -> f64 {
    let c = weights.len();
    let norm = 1.0 / (c - 1) as f64;
    let mut z = 0.0;
    for j in 0..c {
        if weights[j] == 0.0 {
            continue;
        }
        for k in 0..c {
            if j != k {
                z += weights[j] * norm * (-0.5 * (v[j] - v[k]) as f64).exp();
            }
        }
    }
    z
}

/// Chooses the vote vector minimizing the ranking loss for a rule whose
/// contributing examples each have a single class. Classes are sorted by
/// ascending weight and only monotone vectors of the form
/// (-1 repeated a times, 0 repeated b times, +1 for the rest) are scanned.
/// Among loss-equal candidates the one with component sum closest to zero
/// wins, ties going to the lexicographically smallest; all-zero weights give
/// the all-zero vector.
pub fn assign_vector(weights: &ClassWeights) -> VoteVector {
    let c = weights.len();
    let w = weights.components();
    if c == 0 || w.iter().all(|&x| x == 0.0) {
        return VoteVector::zeros(c);
    }
    let mut order: Vec<usize> = (0..c).collect();
    order.sort_by(|&a, &b| w[a].partial_cmp(&w[b]).unwrap().then(a.cmp(&b)));
    let sorted_w: Vec<f64> = order.iter().map(|&i| w[i]).collect();

    let mut best: Option<(f64, i32, Vec<i8>)> = None;
    let mut candidate = vec![0i8; c];
    for a in 0..=c {
        for b in 0..=(c - a) {
            for (i, slot) in candidate.iter_mut().enumerate() {
                *slot = if i < a {
                    -1
                } else if i < a + b {
                    0
                } else {
                    1
                };
            }
            let z = z_from_class_weights(&sorted_w, &candidate);
            let sum: i32 = candidate.iter().map(|&x| x as i32).sum();
            let mut mapped = vec![0i8; c];
            for (i, &cls) in order.iter().enumerate() {
                mapped[cls] = candidate[i];
            }
            let better = match &best {
                None => true,
                Some((bz, bsum, bvec)) => {
                    z < *bz
                        || (z == *bz
                            && (sum.abs() < bsum.abs()
                                || (sum.abs() == bsum.abs() && mapped < *bvec)))
                }
            };
            if better {
                best = Some((z, sum, mapped));
            }
        }
    }
    VoteVector::new(best.expect("at least one candidate").2).expect("valid components")
}

/// Two-class rule table on the ratio W+/W-, with thresholds e^{3/2}, sqrt(e),
/// 1/sqrt(e) and e^{-3/2}, realized by the canonical vectors
/// (-1,+1), (-1,0), (0,0), (0,-1), (+1,-1) for deltas +2..-2.
pub fn assign_vector_two_class(w_minus: f64, w_plus: f64) -> Result<VoteVector> {
    let delta = two_class_delta_with_shift(w_minus, w_plus, 0.0)?;
    Ok(vote_for_delta(delta))
}

/// Canonical two-class vector for a given delta = v[1] - v[0].
fn vote_for_delta(delta: i8) -> VoteVector {
    let v = match delta {
        2 => vec![-1, 1],
        1 => vec![-1, 0],
        0 => vec![0, 0],
        -1 => vec![0, -1],
        -2 => vec![1, -1],
        _ => unreachable!("delta out of range"),
    };
    VoteVector::new(v).expect("valid components")
}

/// Threshold table with an adjustable shift on the log-ratio cut points.
/// The shift exists only so the verification suite can prove it detects a
/// perturbed table; production callers pass 0.
pub(crate) fn two_class_delta_with_shift(w_minus: f64, w_plus: f64, shift: f64) -> Result<i8> {
    if w_minus < 0.0 || w_plus < 0.0 {
        return Err(Error::precondition("negative class weight"));
    }
    if w_minus == 0.0 && w_plus == 0.0 {
        return Err(Error::precondition("both class weights are zero"));
    }
    if w_minus == 0.0 {
        return Ok(2);
    }
    if w_plus == 0.0 {
        return Ok(-2);
    }
    let ratio = w_plus / w_minus;
    let delta = if ratio >= (1.5 + shift).exp() {
        2
    } else if ratio >= (0.5 + shift).exp() {
        1
    } else if ratio >= (-0.5 + shift).exp() {
        0
    } else if ratio >= (-1.5 + shift).exp() {
        -1
    } else {
        -2
    };
    Ok(delta)
}

/// Splits a multilabel example into one single-label example per class it
/// belongs to, each carrying weight w / (number of classes). Single-label
/// examples come back unchanged, so total and per-class weight are conserved.
pub fn multilabel_split(example: &Example) -> Vec<Example> {
    let s = example.class_count();
    if s == 1 {
        return vec![example.clone()];
    }
    let c = example.classes().len();
    let w = example.weight() / s as f64;
    example
        .classes()
        .ones()
        .map(|cls| {
            let mut bits = crate::bits::Bits::zeros(c);
            bits.set(cls, true);
            Example::new(example.observation().clone(), bits, w).expect("valid split example")
        })
        .collect()
}

/// Exhaustive minimization of the ranking loss over all 3^c vote vectors.
/// Guarded to small class counts; this is the verification oracle the fast
/// assigner is checked against.
pub fn brute_force_vector(pairs: &PairWeights) -> Result<(VoteVector, f64)> {
    let c = pairs.c();
    if c > BRUTE_FORCE_CLASS_LIMIT {
        return Err(Error::TooManyClasses {
            got: c,
            limit: BRUTE_FORCE_CLASS_LIMIT,
        });
    }
    let mut best: Option<(VoteVector, f64)> = None;
    let total = 3usize.pow(c as u32);
    let mut digits = vec![0u8; c];
    for idx in 0..total {
        let mut rem = idx;
        for d in digits.iter_mut() {
            *d = (rem % 3) as u8;
            rem /= 3;
        }
        let v = VoteVector::new(digits.iter().map(|&d| d as i8 - 1).collect())
            .expect("valid components");
        let z = z_ranking(pairs, &v);
        match &best {
            Some((_, bz)) if z >= *bz => {}
            _ => best = Some((v, z)),
        }
    }
    Ok(best.expect("non-empty enumeration"))
}

/// Checks the multilabel approximation bound: the split-and-assign vector's
/// loss on the original pair weights must stay below the brute-force optimum
/// times (1 + e / (c - k)), where k is the largest class count of any
/// contributing example.
pub fn multilabel_bound_holds(
    pairs_original: &PairWeights,
    v_approx: &VoteVector,
    k: usize,
) -> Result<bool> {
    let c = pairs_original.c();
    if k >= c {
        return Err(Error::precondition(format!(
            "max class count k={k} must be below c={c}"
        )));
    }
    let (_, z_star) = brute_force_vector(pairs_original)?;
    let z_approx = z_ranking(pairs_original, v_approx);
    let factor = 1.0 + std::f64::consts::E / (c - k) as f64;
    Ok(z_approx < z_star * factor)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::Bits;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn example(c: usize, set: &[usize], w: f64) -> Example {
        let mut classes = Bits::zeros(c);
        for &i in set {
            classes.set(i, true);
        }
        Example::new(Bits::zeros(1), classes, w).unwrap()
    }

    /// Pair weights of a single-label instance: M[j][k] = W_j / (c - 1).
    fn pairs_from_weights(w: &[f64]) -> PairWeights {
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

    #[test]
    fn pair_weights_single_label() {
        let p = rankloss_pair_weights(&[example(3, &[0], 1.0)], 3).unwrap();
        assert!((p.get(0, 1) - 0.5).abs() < 1e-12);
        assert!((p.get(0, 2) - 0.5).abs() < 1e-12);
        assert_eq!(p.get(1, 0), 0.0);
        assert_eq!(p.get(1, 2), 0.0);
    }

    #[test]
    fn pair_weights_two_of_three_classes() {
        let p = rankloss_pair_weights(&[example(3, &[0, 1], 1.0)], 3).unwrap();
        assert!((p.get(0, 2) - 0.5).abs() < 1e-12);
        assert!((p.get(1, 2) - 0.5).abs() < 1e-12);
        assert_eq!(p.get(0, 1), 0.0);
    }

    #[test]
    fn pair_weights_empty_and_full_label() {
        let p = rankloss_pair_weights(&[], 3).unwrap();
        assert_eq!(p.total(), 0.0);
        // an example in every class carries no ranking pair
        let p = rankloss_pair_weights(&[example(3, &[0, 1, 2], 1.0)], 3).unwrap();
        assert_eq!(p.total(), 0.0);
    }

    #[test]
    fn z_ranking_all_equal_votes_gives_total_mass() {
        let p = pairs_from_weights(&[0.2, 0.3, 0.5]);
        let z = z_ranking(&p, &VoteVector::zeros(3));
        assert!((z - p.total()).abs() < 1e-12);
    }

    #[test]
    fn z_ranking_two_class_value() {
        let mut p = PairWeights::zeros(2);
        p.add(1, 0, 0.9);
        p.add(0, 1, 0.1);
        let v = VoteVector::new(vec![-1, 1]).unwrap();
        let expected = 0.9 * (-1.0f64).exp() + 0.1 * 1.0f64.exp();
        assert!((z_ranking(&p, &v) - expected).abs() < 1e-12);
        assert!((expected - 0.6029).abs() < 1e-4);
    }

    #[test]
    fn z_ranking_negation_equals_transpose() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let c = rng.random_range(2..6);
            let mut p = PairWeights::zeros(c);
            for j in 0..c {
                for k in 0..c {
                    if j != k {
                        p.add(j, k, rng.random::<f64>());
                    }
                }
            }
            let v: Vec<i8> = (0..c).map(|_| rng.random_range(-1..=1)).collect();
            let neg: Vec<i8> = v.iter().map(|&x| -x).collect();
            let zv = z_ranking(&p, &VoteVector::new(neg).unwrap());
            let zt = z_ranking(&p.transpose(), &VoteVector::new(v).unwrap());
            assert!((zv - zt).abs() < 1e-12);
        }
    }

    #[test]
    fn assign_vector_two_class_case() {
        let w = ClassWeights::new(vec![0.1, 0.9]).unwrap();
        assert_eq!(assign_vector(&w).components(), &[-1, 1]);
    }

    #[test]
    fn assign_vector_three_class_dominant() {
        // confirmed against the exhaustive 27-vector sweep below
        let w = ClassWeights::new(vec![0.05, 0.05, 0.9]).unwrap();
        let v = assign_vector(&w);
        assert_eq!(v.components(), &[-1, -1, 1]);
        let (bv, bz) = brute_force_vector(&pairs_from_weights(w.components())).unwrap();
        assert!((z_ranking(&pairs_from_weights(w.components()), &v) - bz).abs() < 1e-12);
        assert_eq!(bv.components(), v.components());
    }

    #[test]
    fn assign_vector_symmetric_weights_gives_zero_vector() {
        let third = 1.0 / 3.0;
        let w = ClassWeights::new(vec![third, third, third]).unwrap();
        assert_eq!(assign_vector(&w).components(), &[0, 0, 0]);
    }

    #[test]
    fn assign_vector_zero_weights_gives_zero_vector() {
        let w = ClassWeights::new(vec![0.0, 0.0]).unwrap();
        assert!(assign_vector(&w).is_zero());
    }

    #[test]
    fn assign_vector_monotone_and_optimal_on_random_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let c = rng.random_range(2..=6);
            let w: Vec<f64> = (0..c)
                .map(|_| if rng.random::<f64>() < 0.15 { 0.0 } else { rng.random::<f64>() })
                .collect();
            if w.iter().all(|&x| x == 0.0) {
                continue;
            }
            let cw = ClassWeights::new(w.clone()).unwrap();
            let v = assign_vector(&cw);
            // monotone when read in ascending-weight order
            let mut order: Vec<usize> = (0..c).collect();
            order.sort_by(|&a, &b| w[a].partial_cmp(&w[b]).unwrap().then(a.cmp(&b)));
            let read: Vec<i8> = order.iter().map(|&i| v.components()[i]).collect();
            assert!(read.windows(2).all(|p| p[0] <= p[1]), "not monotone: {read:?}");
            // optimal against the exhaustive oracle
            let pairs = pairs_from_weights(&w);
            let (_, bz) = brute_force_vector(&pairs).unwrap();
            assert!((z_ranking(&pairs, &v) - bz).abs() < 1e-9);
        }
    }

    #[test]
    fn two_class_table_rows() {
        assert_eq!(
            assign_vector_two_class(0.1, 0.9).unwrap().components(),
            &[-1, 1]
        );
        assert_eq!(
            assign_vector_two_class(0.5, 0.5).unwrap().components(),
            &[0, 0]
        );
        assert_eq!(
            assign_vector_two_class(0.95, 0.05).unwrap().components(),
            &[1, -1]
        );
        assert_eq!(
            assign_vector_two_class(0.0, 1.0).unwrap().components(),
            &[-1, 1]
        );
        assert_eq!(
            assign_vector_two_class(1.0, 0.0).unwrap().components(),
            &[1, -1]
        );
        assert!(assign_vector_two_class(0.0, 0.0).is_err());
    }

    #[test]
    fn two_class_agrees_with_general_assigner() {
        for i in 1..1000 {
            let log_ratio = i as f64 / 1000.0 * 6.0 - 3.0; // spans all five rows
            if [1.5f64, 0.5, -0.5, -1.5]
                .iter()
                .any(|t| (log_ratio - t).abs() < 1e-9)
            {
                // at an exact threshold both adjacent deltas are optimal and
                // the two code paths may legitimately pick different ones
                continue;
            }
            let ratio = log_ratio.exp();
            let w_plus = ratio / (1.0 + ratio);
            let w_minus = 1.0 - w_plus;
            let table = assign_vector_two_class(w_minus, w_plus).unwrap();
            let general = assign_vector(&ClassWeights::new(vec![w_minus, w_plus]).unwrap());
            let d_table = table.components()[1] - table.components()[0];
            let d_general = general.components()[1] - general.components()[0];
            assert_eq!(d_table, d_general, "ratio {ratio}");
        }
    }

    #[test]
    fn multilabel_split_conserves_weight() {
        let e = example(3, &[0, 2], 0.6);
        let parts = multilabel_split(&e);
        assert_eq!(parts.len(), 2);
        assert!((parts[0].weight() - 0.3).abs() < 1e-12);
        assert!(parts[0].classes().get(0) && !parts[0].classes().get(2));
        assert!(parts[1].classes().get(2));
        let total: f64 = parts.iter().map(|p| p.weight()).sum();
        assert!((total - e.weight()).abs() < 1e-12);
        // identity on single-label examples
        let single = example(3, &[1], 0.4);
        let parts = multilabel_split(&single);
        assert_eq!(parts.len(), 1);
        assert_eq!(parts[0].weight(), 0.4);
    }

    #[test]
    fn brute_force_two_class() {
        let mut p = PairWeights::zeros(2);
        p.add(1, 0, 0.9);
        p.add(0, 1, 0.1);
        let (v, z) = brute_force_vector(&p).unwrap();
        assert_eq!(v.components()[1] - v.components()[0], 2);
        assert!((z - (0.9 * (-1.0f64).exp() + 0.1 * 1.0f64.exp())).abs() < 1e-12);
    }

    #[test]
    fn brute_force_symmetric_matrix_has_constant_minimizer() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let c = rng.random_range(2..5);
            let mut p = PairWeights::zeros(c);
            for j in 0..c {
                for k in (j + 1)..c {
                    let w = rng.random::<f64>();
                    p.add(j, k, w);
                    p.add(k, j, w);
                }
            }
            let (_, z) = brute_force_vector(&p).unwrap();
            let constant = z_ranking(&p, &VoteVector::zeros(c));
            assert!(z <= constant + 1e-12);
            assert!((z - constant).abs() < 1e-9, "symmetric optimum is constant");
        }
    }

    #[test]
    fn brute_force_guard() {
        let p = PairWeights::zeros(13);
        assert!(matches!(
            brute_force_vector(&p),
            Err(Error::TooManyClasses { .. })
        ));
    }

    #[test]
    fn scaling_weights_preserves_argmin_and_scales_z() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..50 {
            let c = rng.random_range(2..6);
            let w: Vec<f64> = (0..c).map(|_| rng.random::<f64>() + 0.01).collect();
            let scale = rng.random::<f64>() * 10.0 + 0.1;
            let scaled: Vec<f64> = w.iter().map(|&x| x * scale).collect();
            let v1 = assign_vector(&ClassWeights::new(w.clone()).unwrap());
            let v2 = assign_vector(&ClassWeights::new(scaled.clone()).unwrap());
            assert_eq!(v1.components(), v2.components());
            let z1 = z_ranking(&pairs_from_weights(&w), &v1);
            let z2 = z_ranking(&pairs_from_weights(&scaled), &v1);
            assert!((z2 - scale * z1).abs() < 1e-9 * scale.max(1.0));
        }
    }

    #[test]
    fn aggregated_z_matches_per_pair_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..30 {
            let c = rng.random_range(2..6);
            let examples: Vec<Example> = (0..rng.random_range(1..30))
                .map(|_| {
                    let count = rng.random_range(1..c);
                    let mut set = vec![];
                    while set.len() < count {
                        let cls = rng.random_range(0..c);
                        if !set.contains(&cls) {
                            set.push(cls);
                        }
                    }
                    example(c, &set, rng.random::<f64>() + 0.01)
                })
                .collect();
            let pairs = rankloss_pair_weights(&examples, c).unwrap();
            let v = VoteVector::new((0..c).map(|_| rng.random_range(-1..=1)).collect()).unwrap();
            // naive per-(example, j, k) sum
            let mut naive = 0.0;
            for e in &examples {
                let s = e.class_count();
                let w = e.weight() / (s * (c - s)) as f64;
                for j in e.classes().ones() {
                    for k in 0..c {
                        if !e.classes().get(k) {
                            let d = (v.components()[j] - v.components()[k]) as f64;
                            naive += w * (-0.5 * d).exp();
                        }
                    }
                }
            }
            assert!((z_ranking(&pairs, &v) - naive).abs() < 1e-9);
        }
    }

    #[test]
    fn multilabel_bound_on_random_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        for _ in 0..40 {
            let c = rng.random_range(4..=7);
            let k_cap = (c / 2).max(2);
            let mut k_seen = 1;
            let examples: Vec<Example> = (0..rng.random_range(5..40))
                .map(|_| {
                    let count = rng.random_range(1..=k_cap);
                    k_seen = k_seen.max(count);
                    let mut set = vec![];
                    while set.len() < count {
                        let cls = rng.random_range(0..c);
                        if !set.contains(&cls) {
                            set.push(cls);
                        }
                    }
                    example(c, &set, rng.random::<f64>() + 0.01)
                })
                .collect();
            let original = rankloss_pair_weights(&examples, c).unwrap();
            let split: Vec<Example> = examples.iter().flat_map(multilabel_split).collect();
            let cw = ClassWeights::from_examples(&split, c).unwrap();
            let v = assign_vector(&cw);
            assert!(multilabel_bound_holds(&original, &v, k_seen).unwrap());
        }
    }

    #[test]
    fn bound_check_rejects_k_at_or_above_c() {
        let p = PairWeights::zeros(3);
        let v = VoteVector::zeros(3);
        assert!(multilabel_bound_holds(&p, &v, 3).is_err());
    }

    #[test]
    fn bound_is_trivial_for_single_label_data() {
        // with k = 1 the split is the identity, Z(v) = Z(v*), and the factor
        // 1 + e/(c-1) makes the strict inequality automatic
        let mut rng = ChaCha8Rng::seed_from_u64(37);
        for _ in 0..20 {
            let c = rng.random_range(3..=6);
            let examples: Vec<Example> = (0..rng.random_range(2..20))
                .map(|_| example(c, &[rng.random_range(0..c)], rng.random::<f64>() + 0.01))
                .collect();
            let original = rankloss_pair_weights(&examples, c).unwrap();
            let v = assign_vector(&ClassWeights::from_examples(&examples, c).unwrap());
            let (_, z_star) = brute_force_vector(&original).unwrap();
            assert!((z_ranking(&original, &v) - z_star).abs() < 1e-9);
            assert!(multilabel_bound_holds(&original, &v, 1).unwrap());
        }
    }

    #[test]
    fn bound_factors_at_fixed_class_counts() {
        // c = 6 with k = 2 gives factor 1 + e/4, c = 8 with k = 2 gives the
        // tighter 1 + e/6; both must hold on random instances
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for &(c, k) in &[(6usize, 2usize), (8, 2)] {
            let factor = 1.0 + std::f64::consts::E / (c - k) as f64;
            for _ in 0..10 {
                let examples: Vec<Example> = (0..rng.random_range(5..30))
                    .map(|_| {
                        let labels = rng.random_range(1..=k);
                        let mut set = vec![];
                        while set.len() < labels {
                            let cls = rng.random_range(0..c);
                            if !set.contains(&cls) {
                                set.push(cls);
                            }
                        }
                        example(c, &set, rng.random::<f64>() + 0.01)
                    })
                    .collect();
                let k_seen = examples.iter().map(|e| e.class_count()).max().unwrap();
                let original = rankloss_pair_weights(&examples, c).unwrap();
                let split: Vec<Example> = examples.iter().flat_map(multilabel_split).collect();
                let v = assign_vector(&ClassWeights::from_examples(&split, c).unwrap());
                let (_, z_star) = brute_force_vector(&original).unwrap();
                assert!(z_ranking(&original, &v) < z_star * factor);
                assert!(multilabel_bound_holds(&original, &v, k_seen).unwrap());
            }
        }
    }
}
