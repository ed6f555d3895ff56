//! Truncation of multivariate information by synergy order.
//!
//! `I^(k)` is the union information carried by the family `C^(k)` of all
//! feature subsets of cardinality exactly `k`:
//!
//! ```text
//! I^(k) = Σ_y p(y) max_{C ∈ C^(k)} I(Y=y : C).
//! ```
//!
//! It is non-decreasing in `k`, reaches the full mutual information at
//! `k = N`, and touches nothing beyond the `(k+1)`-argument marginals
//! `p(y, x_{i1}, .., x_{ik})`. The gap `Δ^(k+1) = I^(N) − I^(k)` is the
//! information living only in synergies of more than `k` features, so a small
//! gap at low `k` certifies that a cheap truncation already accounts for
//! almost everything the features say about the target.
//!
//! Feature selection falls out of the same computation: only features that
//! appear in some per-outcome argmax subset can contribute to `I^(k)`, and the
//! rest can be dropped without changing it.

use std::collections::BTreeSet;
use std::io::Write;

use itertools::Itertools;
use serde::Serialize;

use crate::dist::{DiscreteJointDistribution, LogBase, VariableId};
use crate::error::{Error, Result};
use crate::pid::{
    i_union_max, mutual_information, specific_info_table, SourceSubset,
};

/// Guard against accidental combinatorial blowup of `C(N, k)`.
pub const MAX_EXHAUSTIVE_FEATURES: usize = 25;

/// Subsets within this distance of the per-outcome maximum count as argmax.
pub const ARGMAX_TIE_TOL: f64 = 1e-10;

/// Default tolerance for the greedy backward pruning pass.
pub const DEFAULT_PRUNE_TOL: f64 = 1e-10;

/// The family `C^(k)`: every subset of exactly `k` features, in lexicographic
/// order of the feature list.
#[derive(Debug, Clone)]
pub struct SubsetFamily {
    k: usize,
    subsets: Vec<SourceSubset>,
}

impl SubsetFamily {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.subsets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.subsets.is_empty()
    }

    pub fn subsets(&self) -> &[SourceSubset] {
        &self.subsets
    }
}

fn validate_features(features: &[VariableId]) -> Result<()> {
    if features.is_empty() {
        return Err(Error::InvalidArgument(
            "the feature list must be non-empty".into(),
        ));
    }
    let mut indices: Vec<usize> = features.iter().map(|f| f.index).collect();
    indices.sort_unstable();
    indices.dedup();
    if indices.len() != features.len() {
        return Err(Error::InvalidArgument(
            "the feature list contains duplicate variables".into(),
        ));
    }
    Ok(())
}

/// Enumerates `C^(k)` over the given features.
pub fn enumerate_family(features: &[VariableId], k: usize) -> Result<SubsetFamily> {
    validate_features(features)?;
    let n = features.len();
    if k < 1 || k > n {
        return Err(Error::InvalidArgument(format!(
            "k = {k} out of range 1..={n}"
        )));
    }
    if n > MAX_EXHAUSTIVE_FEATURES && k > 3 {
        return Err(Error::InvalidArgument(format!(
            "refusing to enumerate C({n},{k}) subsets; {n} features exceed the \
             exhaustive limit of {MAX_EXHAUSTIVE_FEATURES} for k > 3"
        )));
    }
    let subsets = features
        .iter()
        .cloned()
        .combinations(k)
        .map(SourceSubset::new)
        .collect::<Result<Vec<_>>>()?;
    Ok(SubsetFamily { k, subsets })
}

/// Truncated information `I^(k)`: union information over `C^(k)`.
pub fn i_k(
    dist: &DiscreteJointDistribution,
    target: &VariableId,
    features: &[VariableId],
    k: usize,
) -> Result<f64> {
    let family = enumerate_family(features, k)?;
    i_union_max(dist, target, family.subsets())
}

/// The ladder `I^(1) .. I^(k_max)` with gaps and the total mutual information.
#[derive(Debug, Clone)]
pub struct IkProfile {
    values: Vec<f64>,
    gaps: Option<Vec<f64>>,
    total_mi: f64,
    units: LogBase,
}

impl IkProfile {
    /// Wraps raw per-`k` values (e.g. estimates); no gaps are attached.
    pub fn from_values(values: Vec<f64>, total_mi: f64, units: LogBase) -> Self {
        IkProfile {
            values,
            gaps: None,
            total_mi,
            units,
        }
    }

    pub fn k_max(&self) -> usize {
        self.values.len()
    }

    /// `I^(k)` for 1-based `k`.
    pub fn value(&self, k: usize) -> f64 {
        self.values[k - 1]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `Δ^(k+1) = I^(N) − I^(k)` per k, present only when the profile reached
    /// `k_max = N`.
    pub fn gaps(&self) -> Option<&[f64]> {
        self.gaps.as_deref()
    }

    pub fn total_mi(&self) -> f64 {
        self.total_mi
    }

    pub fn units(&self) -> LogBase {
        self.units
    }

    pub fn write_json<W: Write>(&self, writer: W) -> Result<()> {
        let file = ProfileJson {
            k: self.k_max(),
            i_k: self.values.clone(),
            delta: self.gaps.clone().unwrap_or_default(),
            units: self.units.to_string(),
            total_mi: self.total_mi,
        };
        serde_json::to_writer_pretty(writer, &file)?;
        Ok(())
    }

    pub fn to_json_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_json(&mut buf)?;
        Ok(String::from_utf8(buf).expect("serde_json emits UTF-8"))
    }
}

#[derive(Serialize)]
struct ProfileJson {
    k: usize,
    #[serde(rename = "I_k")]
    i_k: Vec<f64>,
    delta: Vec<f64>,
    units: String,
    total_mi: f64,
}

/// Computes `I^(1) .. I^(k_max)`. Gaps are attached when `k_max` equals the
/// number of features, using the computed `I^(N)` as the top so the last gap
/// is exactly zero.
pub fn i_k_profile(
    dist: &DiscreteJointDistribution,
    target: &VariableId,
    features: &[VariableId],
    k_max: usize,
) -> Result<IkProfile> {
    validate_features(features)?;
    let n = features.len();
    if k_max < 1 || k_max > n {
        return Err(Error::InvalidArgument(format!(
            "k_max = {k_max} out of range 1..={n}"
        )));
    }
    let mut values = Vec::with_capacity(k_max);
    for k in 1..=k_max {
        values.push(i_k(dist, target, features, k)?);
    }
    let total_mi =
        mutual_information(dist, &SourceSubset::new(features.iter().cloned())?, target)?;
    let gaps = (k_max == n).then(|| {
        let top = values[k_max - 1];
        values.iter().map(|v| top - v).collect()
    });
    Ok(IkProfile {
        values,
        gaps,
        total_mi,
        units: dist.log_base(),
    })
}

/// All subsets achieving the per-outcome maximum within [`ARGMAX_TIE_TOL`].
#[derive(Debug, Clone)]
pub struct OutcomeArgmax {
    pub y_value: u32,
    pub subsets: Vec<SourceSubset>,
}

/// Result of selecting features at truncation order `k`.
///
/// `relevant` is the union of all features appearing in any per-outcome
/// argmax subset; dropping the others cannot change `I^(k)`, which
/// `i_k_selected` re-verifies.
#[derive(Debug, Clone)]
pub struct SelectionReport {
    pub k: usize,
    pub relevant: Vec<VariableId>,
    pub per_outcome_argmax: Vec<OutcomeArgmax>,
    pub i_k_full: f64,
    pub i_k_selected: f64,
}

impl SelectionReport {
    pub fn relevant_names(&self) -> Vec<String> {
        self.relevant.iter().map(|v| v.name.clone()).collect()
    }

    pub fn write_json<W: Write>(&self, writer: W) -> Result<()> {
        let file = SelectionJson {
            k: self.k,
            relevant: self.relevant_names(),
            i_k_full: self.i_k_full,
            i_k_selected: self.i_k_selected,
        };
        serde_json::to_writer_pretty(writer, &file)?;
        Ok(())
    }
}

#[derive(Serialize)]
struct SelectionJson {
    k: usize,
    relevant: Vec<String>,
    i_k_full: f64,
    i_k_selected: f64,
}

/// Keeps every feature that appears in some per-outcome argmax subset of
/// `C^(k)`. Ties within [`ARGMAX_TIE_TOL`] of the maximum all count, which is
/// the conservative choice: a feature is only dropped when no outcome needs it.
pub fn select_features(
    dist: &DiscreteJointDistribution,
    target: &VariableId,
    features: &[VariableId],
    k: usize,
) -> Result<SelectionReport> {
    let family = enumerate_family(features, k)?;
    let table = specific_info_table(dist, target, family.subsets())?;

    let mut relevant: BTreeSet<VariableId> = BTreeSet::new();
    let mut per_outcome_argmax = Vec::new();
    let mut i_k_full = 0.0;
    for y in 0..table.target_cardinality() {
        let py = table.p_y(y);
        if py <= 0.0 {
            continue;
        }
        let best = (0..family.len())
            .map(|s| table.value(s, y).expect("p(y) > 0"))
            .fold(f64::NEG_INFINITY, f64::max);
        i_k_full += py * best;
        let subsets: Vec<SourceSubset> = (0..family.len())
            .filter(|&s| table.value(s, y).expect("p(y) > 0") >= best - ARGMAX_TIE_TOL)
            .map(|s| family.subsets()[s].clone())
            .collect();
        for subset in &subsets {
            relevant.extend(subset.members().iter().cloned());
        }
        per_outcome_argmax.push(OutcomeArgmax {
            y_value: y as u32,
            subsets,
        });
    }

    let relevant: Vec<VariableId> = relevant.into_iter().collect();
    let i_k_selected = i_k(dist, target, &relevant, k)?;
    Ok(SelectionReport {
        k,
        relevant,
        per_outcome_argmax,
        i_k_full,
        i_k_selected,
    })
}

/// Greedy backward refinement: repeatedly drop the feature whose removal
/// decreases `I^(k)` the least, while the decrease from the initial value
/// stays below `tol`. One reading of "prune further by re-checking `I^(k)`
/// on fewer features"; heuristic, and kept separate from
/// [`select_features`] which is the argmax-exact rule.
pub fn prune_features(
    dist: &DiscreteJointDistribution,
    target: &VariableId,
    features: &[VariableId],
    k: usize,
    tol: f64,
) -> Result<Vec<VariableId>> {
    validate_features(features)?;
    let mut kept: Vec<VariableId> = features.to_vec();
    let base = i_k(dist, target, &kept, k)?;
    while kept.len() > k {
        let mut best: Option<(usize, f64)> = None;
        for drop_idx in 0..kept.len() {
            let mut candidate = kept.clone();
            candidate.remove(drop_idx);
            let value = i_k(dist, target, &candidate, k)?;
            if best.is_none_or(|(_, b)| value > b) {
                best = Some((drop_idx, value));
            }
        }
        let (drop_idx, value) = best.expect("kept.len() > k >= 1");
        if base - value < tol {
            kept.remove(drop_idx);
        } else {
            break;
        }
    }
    Ok(kept)
}
