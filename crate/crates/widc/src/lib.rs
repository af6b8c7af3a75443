//! Induction of small, interpretable decision committees.
//!
//! A decision committee is an unordered set of rules, each a monomial over
//! boolean variables paired with a vote vector in {-1, 0, +1} per class,
//! plus a default vector consulted on vote ties. Training is a three-stage
//! pipeline: greedy monomial growth over the partition criterion, per-rule
//! vote assignment by ranking-loss minimization, and pruning (global greedy
//! or single-pass local). The crate also ships exact oracles — exhaustive
//! vote search and symmetric submodular minimization via Queyranne's
//! algorithm — that verify the optimization claims the pipeline rests on.
//!
//! ```
//! use widc::data::gen_xd6;
//! use widc::pipeline::{train, RunConfig};
//!
//! let sample = gen_xd6(256, 0.0, 0.0, 42).unwrap();
//! let model = train(&sample, &RunConfig::default()).unwrap();
//! assert!(model.committee.error_rate(&sample, 0).unwrap() < 0.1);
//! ```

pub mod bits;
pub mod committee;
pub mod data;
pub mod error;
pub mod grower;
pub mod pipeline;
pub mod prune;
pub mod submodular;
pub mod verify;
pub mod votes;

pub use committee::{
    compute_default_vector, DecisionCommittee, DefaultVector, Example, Literal, Monomial, Rule,
    Sample, VoteVector,
};
pub use error::{Error, Result};
pub use grower::GrowLimits;
pub use pipeline::{cross_validate, train, PruneMode, RunConfig, TrainedModel};
