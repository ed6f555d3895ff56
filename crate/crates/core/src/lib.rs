//! Synergy-order truncation of multivariate mutual information for discrete
//! variables.
//!
//! The central quantity is `I^(k)`: the union information that feature
//! subsets of cardinality exactly `k` carry about a target variable. It is
//! non-decreasing in `k`, reaches the full mutual information at `k = N`, and
//! depends only on joint probabilities with `k + 1` arguments — which makes
//! low truncation orders cheap to compute exactly and noticeably more stable
//! to estimate from small samples than the full multivariate information.
//!
//! - [`dist`] — dense joint probability tables, sampling, empirical tables
//! - [`pid`] — specific information, redundancy (`I_min`), union information
//! - [`synergy`] — subset families `C^(k)`, the truncation `I^(k)`, selection
//! - [`estimator`] — plug-in estimates with a leading-order bias correction
//! - [`xor`] — the XOR exponential-family benchmark model

pub mod dist;
pub mod error;
pub mod estimator;
pub mod pid;
pub mod synergy;
pub mod xor;

pub use dist::{
    derive_seed, Alphabet, DiscreteJointDistribution, EmpiricalDistribution, LogBase, SampleSet,
    VariableId,
};
pub use error::{Error, Result};
pub use estimator::{
    bias_delta, corrected_specific_information, i_k_estimate, i_k_plugin,
    normalized_deviation_stats, plugin_specific_information, BiasCorrectedEstimate,
    DeviationStats,
};
pub use pid::{
    i_min, i_union_inclexcl, i_union_max, mutual_information, specific_info_table,
    specific_information, SourceSubset, SpecificInfoTable,
};
pub use synergy::{
    enumerate_family, i_k, i_k_profile, prune_features, select_features, IkProfile,
    OutcomeArgmax, SelectionReport, SubsetFamily,
};
pub use xor::{
    generate_spec, generate_spec_with_targets, split_target, MaskPolicy, SplitModel,
    XorModelSpec,
};
