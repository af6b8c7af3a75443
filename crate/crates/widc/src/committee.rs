//! Decision-committee data model and classification semantics.
//!
//! A committee is an unordered set of rules, each pairing a monomial (a
//! conjunction of literals over boolean variables) with a vote vector in
//! {-1, 0, +1}^c. Classifying an observation sums the vote vectors of the
//! rules it satisfies and takes the arg max; ties fall back to the default
//! vector, and residual ties are broken by a seeded uniform draw.

use std::collections::HashSet;
use std::fmt;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bits::Bits;
use crate::error::{Error, Result};

/// A single literal: a variable index with a polarity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Literal {
    pub var: usize,
    pub positive: bool,
}

impl Literal {
    pub fn pos(var: usize) -> Self {
        Self { var, positive: true }
    }

    pub fn neg(var: usize) -> Self {
        Self {
            var,
            positive: false,
        }
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.positive {
            write!(f, "x{}", self.var)
        } else {
            write!(f, "!x{}", self.var)
        }
    }
}

/// A conjunction of literals stored as two n-bit masks: variables required
/// positive and variables required negative. A variable can never be in both
/// masks, so contradictory conjunctions are unrepresentable. The empty
/// monomial is satisfied by every observation.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Monomial {
    pos: Bits,
    neg: Bits,
}

impl Monomial {
    pub fn empty(n: usize) -> Self {
        Self {
            pos: Bits::zeros(n),
            neg: Bits::zeros(n),
        }
    }

    /// Builds a monomial from positive and negative variable indices.
    pub fn from_literals(n: usize, pos: &[usize], neg: &[usize]) -> Result<Self> {
        let mut m = Self::empty(n);
        for &v in pos {
            m = m.with_literal(Literal::pos(v))?;
        }
        for &v in neg {
            m = m.with_literal(Literal::neg(v))?;
        }
        Ok(m)
    }

    pub fn n(&self) -> usize {
        self.pos.len()
    }

    pub fn has_variable(&self, var: usize) -> bool {
        self.pos.get(var) || self.neg.get(var)
    }

    /// A copy of this monomial specialized by one more literal.
    pub fn with_literal(&self, lit: Literal) -> Result<Self> {
        if lit.var >= self.n() {
            return Err(Error::DimensionMismatch {
                expected: self.n(),
                got: lit.var,
            });
        }
        if self.has_variable(lit.var) {
            return Err(Error::VariableAlreadyBound(lit.var));
        }
        let mut out = self.clone();
        if lit.positive {
            out.pos.set(lit.var, true);
        } else {
            out.neg.set(lit.var, true);
        }
        Ok(out)
    }

    pub fn literal_count(&self) -> usize {
        self.pos.count_ones() + self.neg.count_ones()
    }

    pub fn is_empty_conjunction(&self) -> bool {
        !self.pos.any() && !self.neg.any()
    }

    /// Literals in ascending variable order.
    pub fn literals(&self) -> Vec<Literal> {
        let mut out = Vec::with_capacity(self.literal_count());
        for v in 0..self.n() {
            if self.pos.get(v) {
                out.push(Literal::pos(v));
            } else if self.neg.get(v) {
                out.push(Literal::neg(v));
            }
        }
        out
    }

    pub fn positive_vars(&self) -> Vec<usize> {
        self.pos.ones().collect()
    }

    pub fn negative_vars(&self) -> Vec<usize> {
        self.neg.ones().collect()
    }

    /// True iff the observation sets every positive literal and no negative
    /// literal of this monomial. Errors when the lengths disagree.
    pub fn satisfied_by(&self, observation: &Bits) -> Result<bool> {
        if observation.len() != self.n() {
            return Err(Error::DimensionMismatch {
                expected: self.n(),
                got: observation.len(),
            });
        }
        Ok(self.matches(observation))
    }

    /// Unchecked satisfaction test for hot loops; lengths must agree.
    #[inline]
    pub(crate) fn matches(&self, observation: &Bits) -> bool {
        observation.contains_all(&self.pos) && !observation.intersects(&self.neg)
    }
}

impl fmt::Debug for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty_conjunction() {
            return write!(f, "(true)");
        }
        let lits: Vec<String> = self.literals().iter().map(|l| l.to_string()).collect();
        write!(f, "{}", lits.join(" & "))
    }
}

/// Per-class votes, each component in {-1, 0, +1}.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct VoteVector(Vec<i8>);

impl VoteVector {
    pub fn new(components: Vec<i8>) -> Result<Self> {
        for &v in &components {
            if !(-1..=1).contains(&v) {
                return Err(Error::InvalidVote(v as i64));
            }
        }
        Ok(Self(components))
    }

    pub fn zeros(c: usize) -> Self {
        Self(vec![0; c])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn components(&self) -> &[i8] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&v| v == 0)
    }
}

/// One committee rule: a monomial and the votes it casts when satisfied.
#[derive(Clone, Debug)]
pub struct Rule {
    pub monomial: Monomial,
    pub votes: VoteVector,
}

/// Per-class weights in [0, 1] consulted when the summed vote has a
/// non-unique maximum.
#[derive(Clone, Debug, PartialEq)]
pub struct DefaultVector(Vec<f64>);

impl DefaultVector {
    /// Accepts any components in [0, 1]; they need not sum to one.
    pub fn new(components: Vec<f64>) -> Result<Self> {
        for &v in &components {
            if !(0.0..=1.0).contains(&v) || !v.is_finite() {
                return Err(Error::InvalidDefault(v));
            }
        }
        Ok(Self(components))
    }

    /// Like `new` but additionally requires the components to sum to one.
    pub fn from_distribution(components: Vec<f64>) -> Result<Self> {
        let sum: f64 = components.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::Inconsistency(format!(
                "default distribution sums to {sum}, expected 1"
            )));
        }
        Self::new(components)
    }

    pub fn uniform(c: usize) -> Self {
        Self(vec![1.0 / c as f64; c])
    }

    pub fn components(&self) -> &[f64] {
        &self.0
    }
}

/// A weighted training example: a boolean observation plus a class-membership
/// bit vector (more than one bit may be set on multilabel data).
#[derive(Clone, Debug)]
pub struct Example {
    observation: Bits,
    classes: Bits,
    weight: f64,
}

impl Example {
    pub fn new(observation: Bits, classes: Bits, weight: f64) -> Result<Self> {
        if !classes.any() {
            return Err(Error::precondition("example belongs to no class"));
        }
        if !weight.is_finite() || weight <= 0.0 {
            return Err(Error::precondition(format!("non-positive weight {weight}")));
        }
        Ok(Self {
            observation,
            classes,
            weight,
        })
    }

    pub fn observation(&self) -> &Bits {
        &self.observation
    }

    pub fn classes(&self) -> &Bits {
        &self.classes
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }

    pub(crate) fn with_weight(&self, weight: f64) -> Self {
        Self {
            observation: self.observation.clone(),
            classes: self.classes.clone(),
            weight,
        }
    }

    /// Number of classes the example belongs to.
    pub fn class_count(&self) -> usize {
        self.classes.count_ones()
    }

    /// The single class index when exactly one bit is set.
    pub fn single_class(&self) -> Option<usize> {
        if self.class_count() == 1 {
            self.classes.ones().next()
        } else {
            None
        }
    }
}

/// A learning sample with normalized weights.
#[derive(Clone, Debug)]
pub struct Sample {
    examples: Vec<Example>,
    n: usize,
    c: usize,
    class_names: Vec<String>,
}

impl Sample {
    /// Validates dimensions and normalizes weights to sum to one.
    pub fn new(
        examples: Vec<Example>,
        n: usize,
        c: usize,
        class_names: Vec<String>,
    ) -> Result<Self> {
        if examples.is_empty() {
            return Err(Error::EmptySample);
        }
        if class_names.len() != c {
            return Err(Error::DimensionMismatch {
                expected: c,
                got: class_names.len(),
            });
        }
        for e in &examples {
            if e.observation.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: e.observation.len(),
                });
            }
            if e.classes.len() != c {
                return Err(Error::DimensionMismatch {
                    expected: c,
                    got: e.classes.len(),
                });
            }
        }
        let total: f64 = examples.iter().map(|e| e.weight).sum();
        let examples = examples
            .into_iter()
            .map(|e| {
                let w = e.weight / total;
                e.with_weight(w)
            })
            .collect();
        Ok(Self {
            examples,
            n,
            c,
            class_names,
        })
    }

    pub fn len(&self) -> usize {
        self.examples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.examples.is_empty()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn c(&self) -> usize {
        self.c
    }

    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    pub fn examples(&self) -> &[Example] {
        &self.examples
    }

    /// A renormalized sub-sample from example indices.
    pub fn subset(&self, indices: &[usize]) -> Result<Sample> {
        let examples: Vec<Example> = indices.iter().map(|&i| self.examples[i].clone()).collect();
        Sample::new(examples, self.n, self.c, self.class_names.clone())
    }

    /// Weight of each class, with multilabel weight split evenly across the
    /// example's classes.
    pub fn class_distribution(&self) -> Vec<f64> {
        let mut dist = vec![0.0; self.c];
        for e in &self.examples {
            let share = e.weight / e.class_count() as f64;
            for cls in e.classes.ones() {
                dist[cls] += share;
            }
        }
        dist
    }
}

/// An induced decision committee.
#[derive(Clone, Debug)]
pub struct DecisionCommittee {
    n: usize,
    c: usize,
    class_names: Vec<String>,
    rules: Vec<Rule>,
    default: DefaultVector,
}

impl DecisionCommittee {
    pub fn new(
        n: usize,
        c: usize,
        class_names: Vec<String>,
        rules: Vec<Rule>,
        default: DefaultVector,
    ) -> Result<Self> {
        if class_names.len() != c || default.components().len() != c {
            return Err(Error::DimensionMismatch {
                expected: c,
                got: class_names.len(),
            });
        }
        let mut seen = HashSet::new();
        for r in &rules {
            if r.monomial.n() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: r.monomial.n(),
                });
            }
            if r.votes.len() != c {
                return Err(Error::DimensionMismatch {
                    expected: c,
                    got: r.votes.len(),
                });
            }
            if !seen.insert(r.monomial.clone()) {
                return Err(Error::DuplicateMonomial);
            }
        }
        Ok(Self {
            n,
            c,
            class_names,
            rules,
            default,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn c(&self) -> usize {
        self.c
    }

    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn default(&self) -> &DefaultVector {
        &self.default
    }

    pub fn with_default(mut self, default: DefaultVector) -> Result<Self> {
        if default.components().len() != self.c {
            return Err(Error::DimensionMismatch {
                expected: self.c,
                got: default.components().len(),
            });
        }
        self.default = default;
        Ok(self)
    }

    /// A copy keeping only the rules at the given indices (in order).
    pub fn with_rule_subset(&self, keep: &[usize]) -> Result<Self> {
        let rules = keep.iter().map(|&i| self.rules[i].clone()).collect();
        DecisionCommittee::new(
            self.n,
            self.c,
            self.class_names.clone(),
            rules,
            self.default.clone(),
        )
    }

    /// Componentwise sum of the vote vectors of the satisfied rules; the zero
    /// vector when no rule fires.
    pub fn vote(&self, observation: &Bits) -> Result<Vec<i32>> {
        if observation.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: observation.len(),
            });
        }
        let mut v = vec![0i32; self.c];
        for r in &self.rules {
            if r.monomial.matches(observation) {
                for (acc, &x) in v.iter_mut().zip(r.votes.components()) {
                    *acc += x as i32;
                }
            }
        }
        Ok(v)
    }

    /// Arg max of the summed votes; vote ties are resolved by the default
    /// vector restricted to the tied indices, and residual ties by a seeded
    /// uniform choice.
    pub fn classify(&self, observation: &Bits, tie_seed: u64) -> Result<usize> {
        let votes = self.vote(observation)?;
        Ok(classify_votes(&votes, &self.default, tie_seed))
    }

    /// (r_DC, l_DC): rule count and total literal count.
    pub fn size_metrics(&self) -> (usize, usize) {
        let l = self.rules.iter().map(|r| r.monomial.literal_count()).sum();
        (self.rules.len(), l)
    }

    /// Sum of the weights of misclassified examples. A prediction is correct
    /// when the predicted class bit is set on the example, so multilabel
    /// examples accept any of their classes.
    pub fn error_rate(&self, sample: &Sample, tie_seed: u64) -> Result<f64> {
        self.error_on_examples(sample.examples(), tie_seed)
    }

    /// Weighted error over an example slice, normalized by its total weight.
    pub fn error_on_examples(&self, examples: &[Example], tie_seed: u64) -> Result<f64> {
        if examples.is_empty() {
            return Err(Error::EmptySample);
        }
        let mut wrong = 0.0;
        let mut total = 0.0;
        for e in examples {
            let predicted = self.classify(e.observation(), tie_seed)?;
            total += e.weight();
            if !e.classes().get(predicted) {
                wrong += e.weight();
            }
        }
        Ok(wrong / total)
    }

    pub fn to_json(&self) -> Result<String> {
        let file = ModelFile {
            n: self.n,
            c: self.c,
            class_names: self.class_names.clone(),
            rules: self
                .rules
                .iter()
                .map(|r| ModelRule {
                    pos_literals: r.monomial.positive_vars(),
                    neg_literals: r.monomial.negative_vars(),
                    votes: r.votes.components().to_vec(),
                })
                .collect(),
            default: self.default.components().to_vec(),
        };
        Ok(serde_json::to_string_pretty(&file)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: ModelFile = serde_json::from_str(text)?;
        let mut rules = Vec::with_capacity(file.rules.len());
        for r in &file.rules {
            rules.push(Rule {
                monomial: Monomial::from_literals(file.n, &r.pos_literals, &r.neg_literals)?,
                votes: VoteVector::new(r.votes.clone())?,
            });
        }
        DecisionCommittee::new(
            file.n,
            file.c,
            file.class_names,
            rules,
            DefaultVector::new(file.default)?,
        )
    }
}

impl fmt::Display for DecisionCommittee {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in &self.rules {
            let votes: Vec<String> = r
                .votes
                .components()
                .iter()
                .map(|v| format!("{v:+}"))
                .collect();
            writeln!(f, "{}  [{}]", r.monomial, votes.join(", "))?;
        }
        let d: Vec<String> = self
            .default
            .components()
            .iter()
            .map(|v| format!("{v:.4}"))
            .collect();
        write!(f, "default  [{}]", d.join(", "))
    }
}

/// Arg max over summed votes with the tie policy of `classify`.
pub(crate) fn classify_votes(votes: &[i32], default: &DefaultVector, tie_seed: u64) -> usize {
    let max = *votes.iter().max().expect("non-empty vote vector");
    let tied: Vec<usize> = (0..votes.len()).filter(|&j| votes[j] == max).collect();
    if tied.len() == 1 {
        return tied[0];
    }
    let defaults = default.components();
    let best = tied
        .iter()
        .map(|&j| defaults[j])
        .fold(f64::NEG_INFINITY, f64::max);
    let remaining: Vec<usize> = tied.into_iter().filter(|&j| defaults[j] == best).collect();
    if remaining.len() == 1 {
        return remaining[0];
    }
    let mut rng = ChaCha8Rng::seed_from_u64(tie_seed);
    remaining[rng.random_range(0..remaining.len())]
}

/// The weight-normalized class distribution of the ambiguously classified
/// examples: those whose summed vote has a non-unique arg max, including
/// examples satisfying no rule. Falls back to the overall class distribution
/// when no example is ambiguous.
pub fn compute_default_vector(dc: &DecisionCommittee, sample: &Sample) -> Result<DefaultVector> {
    if sample.is_empty() {
        return Err(Error::EmptySample);
    }
    let mut dist = vec![0.0; dc.c()];
    let mut mass = 0.0;
    for e in sample.examples() {
        let votes = dc.vote(e.observation())?;
        let max = *votes.iter().max().expect("non-empty");
        if votes.iter().filter(|&&v| v == max).count() > 1 {
            mass += e.weight();
            let share = e.weight() / e.class_count() as f64;
            for cls in e.classes().ones() {
                dist[cls] += share;
            }
        }
    }
    if mass == 0.0 {
        dist = sample.class_distribution();
        mass = dist.iter().sum();
    }
    DefaultVector::new(dist.into_iter().map(|w| w / mass).collect())
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    n: usize,
    c: usize,
    class_names: Vec<String>,
    rules: Vec<ModelRule>,
    default: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct ModelRule {
    pos_literals: Vec<usize>,
    neg_literals: Vec<usize>,
    votes: Vec<i8>,
}
