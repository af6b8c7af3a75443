//! The three-stage training pipeline and its evaluation harnesses.
//!
//! Training grows the unpruned committee, assigns each rule's vote vector
//! from the class weights of the examples satisfying it (multilabel examples
//! are split first), drops rules whose vector came out all zero, prunes per
//! the configured mode, and finally recomputes the default vector. Everything
//! is deterministic given the seed.

use std::time::{Duration, Instant};

use serde::Serialize;

use crate::committee::{compute_default_vector, DecisionCommittee, DefaultVector, Rule, Sample};
use crate::error::{Error, Result};
use crate::grower::{grow_committee, GrowLimits, GrowTrace};
use crate::prune::{prune_optimistic, prune_pessimistic, PenaltyParams, PruneTrace};
use crate::votes::{assign_vector, multilabel_split, ClassWeights};

/// Which pruning stage runs after vote assignment.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PruneMode {
    Optimistic,
    Pessimistic,
    None,
}

impl PruneMode {
    pub fn parse(text: &str) -> Result<Self> {
        match text {
            "o" | "optimistic" => Ok(Self::Optimistic),
            "p" | "pessimistic" => Ok(Self::Pessimistic),
            "none" => Ok(Self::None),
            other => Err(Error::precondition(format!(
                "unknown mode '{other}' (expected o, p or none)"
            ))),
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Optimistic => "o",
            Self::Pessimistic => "p",
            Self::None => "none",
        }
    }
}

/// Run configuration shared by the training and evaluation entry points.
#[derive(Clone, Copy, Debug)]
pub struct RunConfig {
    pub mode: PruneMode,
    pub delta: f64,
    pub resample_target: usize,
    pub seed: u64,
    pub folds: usize,
    pub limits: GrowLimits,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            mode: PruneMode::Pessimistic,
            delta: 0.05,
            resample_target: 5000,
            seed: 0,
            folds: 10,
            limits: GrowLimits::default(),
        }
    }
}

/// A trained committee plus the traces of how it got there.
#[derive(Clone, Debug)]
pub struct TrainedModel {
    pub committee: DecisionCommittee,
    pub grow_trace: GrowTrace,
    pub prune_trace: Option<PruneTrace>,
}

/// Grow, assign votes, drop zero-vote rules, prune, recompute the default.
pub fn train(sample: &Sample, config: &RunConfig) -> Result<TrainedModel> {
    let (monomials, grow_trace) = grow_committee(sample, &config.limits)?;
    let c = sample.c();
    let mut rules = Vec::new();
    for monomial in monomials {
        let restricted: Vec<_> = sample
            .examples()
            .iter()
            .filter(|e| monomial.matches(e.observation()))
            .flat_map(multilabel_split)
            .collect();
        let weights = ClassWeights::from_examples(&restricted, c)?;
        let votes = assign_vector(&weights);
        if !votes.is_zero() {
            rules.push(Rule { monomial, votes });
        }
    }
    let dc = DecisionCommittee::new(
        sample.n(),
        c,
        sample.class_names().to_vec(),
        rules,
        DefaultVector::uniform(c),
    )?;
    let dc = dc.clone().with_default(compute_default_vector(&dc, sample)?)?;

    let (dc, prune_trace) = match config.mode {
        PruneMode::Pessimistic => {
            let (pruned, trace) = prune_pessimistic(&dc, sample, config.seed)?;
            (pruned, Some(trace))
        }
        PruneMode::Optimistic => {
            let params = PenaltyParams::new(config.delta, config.resample_target, config.seed)?;
            (prune_optimistic(&dc, sample, &params, config.seed)?, None)
        }
        PruneMode::None => (dc, None),
    };
    let dc = dc.clone().with_default(compute_default_vector(&dc, sample)?)?;
    Ok(TrainedModel {
        committee: dc,
        grow_trace,
        prune_trace,
    })
}

/// One cross-validation fold's held-out metrics.
#[derive(Clone, Debug, Serialize)]
pub struct FoldResult {
    pub fold: usize,
    pub error: f64,
    pub r_dc: usize,
    pub l_dc: usize,
}

/// Cross-validation report: per-fold rows and their arithmetic means. Wall
/// time is informational and deliberately kept out of the serialized form so
/// reruns stay byte-identical.
#[derive(Clone, Debug, Serialize)]
pub struct EvalReport {
    pub mode: String,
    pub seed: u64,
    pub folds_count: usize,
    pub delta: f64,
    pub resample_target: usize,
    pub folds: Vec<FoldResult>,
    pub mean_error: f64,
    pub mean_r_dc: f64,
    pub mean_l_dc: f64,
    #[serde(skip)]
    pub wall: Duration,
}

impl EvalReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("fold,error,r_dc,l_dc\n");
        for f in &self.folds {
            out.push_str(&format!("{},{},{},{}\n", f.fold, f.error, f.r_dc, f.l_dc));
        }
        out.push_str(&format!(
            "mean,{},{},{}\n",
            self.mean_error, self.mean_r_dc, self.mean_l_dc
        ));
        out
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Stratified k-fold cross validation. Fold i trains with seed
/// `config.seed + i` and is evaluated on its held-out split.
pub fn cross_validate(sample: &Sample, config: &RunConfig) -> Result<EvalReport> {
    let start = Instant::now();
    let folds = crate::data::stratified_folds(sample, config.folds, config.seed)?;
    let mut rows = Vec::with_capacity(folds.len());
    for (i, (train_idx, test_idx)) in folds.iter().enumerate() {
        let train_sample = sample.subset(train_idx)?;
        let fold_config = RunConfig {
            seed: config.seed.wrapping_add(i as u64),
            ..*config
        };
        let model = train(&train_sample, &fold_config)?;
        let test_examples: Vec<_> = test_idx
            .iter()
            .map(|&j| sample.examples()[j].clone())
            .collect();
        let error = model
            .committee
            .error_on_examples(&test_examples, fold_config.seed)?;
        let (r_dc, l_dc) = model.committee.size_metrics();
        rows.push(FoldResult {
            fold: i,
            error,
            r_dc,
            l_dc,
        });
    }
    let k = rows.len() as f64;
    Ok(EvalReport {
        mode: config.mode.as_str().to_string(),
        seed: config.seed,
        folds_count: config.folds,
        delta: config.delta,
        resample_target: config.resample_target,
        mean_error: rows.iter().map(|r| r.error).sum::<f64>() / k,
        mean_r_dc: rows.iter().map(|r| r.r_dc as f64).sum::<f64>() / k,
        mean_l_dc: rows.iter().map(|r| r.l_dc as f64).sum::<f64>() / k,
        folds: rows,
        wall: start.elapsed(),
    })
}

/// Which attribute of the generator a sweep perturbs.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NoiseKind {
    Class,
    Attribute,
}

impl NoiseKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Class => "class",
            Self::Attribute => "attribute",
        }
    }
}

/// One sweep point: cross-validated metrics at a noise level.
#[derive(Clone, Debug, Serialize)]
pub struct SweepRow {
    pub noise_kind: String,
    pub level: f64,
    pub mean_error: f64,
    pub mean_l_dc: f64,
    pub mean_r_dc: f64,
}

/// Noise levels 0 to 0.40 in steps of 0.02.
pub fn noise_levels() -> Vec<f64> {
    (0..=20).map(|i| i as f64 * 0.02).collect()
}

/// Sweeps one noise kind: for each level, generates a fresh 512-example XD6
/// sample and runs 10-fold cross validation with pessimistic pruning.
pub fn noise_sweep_kind(config: &RunConfig, kind: NoiseKind) -> Result<Vec<SweepRow>> {
    let mut rows = Vec::new();
    let base_offset = match kind {
        NoiseKind::Class => 10_000u64,
        NoiseKind::Attribute => 20_000u64,
    };
    for (i, level) in noise_levels().into_iter().enumerate() {
        let gen_seed = config.seed.wrapping_add(base_offset + i as u64);
        let sample = match kind {
            NoiseKind::Class => crate::data::gen_xd6(512, level, 0.0, gen_seed)?,
            NoiseKind::Attribute => crate::data::gen_xd6(512, 0.0, level, gen_seed)?,
        };
        let sweep_config = RunConfig {
            mode: PruneMode::Pessimistic,
            folds: 10,
            seed: gen_seed,
            ..*config
        };
        let report = cross_validate(&sample, &sweep_config)?;
        rows.push(SweepRow {
            noise_kind: kind.as_str().to_string(),
            level,
            mean_error: report.mean_error,
            mean_l_dc: report.mean_l_dc,
            mean_r_dc: report.mean_r_dc,
        });
    }
    Ok(rows)
}

/// Both sweeps: class noise first, then attribute noise.
pub fn noise_sweep(config: &RunConfig) -> Result<Vec<SweepRow>> {
    let mut rows = noise_sweep_kind(config, NoiseKind::Class)?;
    rows.extend(noise_sweep_kind(config, NoiseKind::Attribute)?);
    Ok(rows)
}

pub fn sweep_to_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("noise_kind,level,mean_error,mean_l_dc,mean_r_dc\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            r.noise_kind, r.level, r.mean_error, r.mean_l_dc, r.mean_r_dc
        ));
    }
    out
}
