//! Plug-in estimation of specific information and `I^(k)` from samples.
//!
//! Plug-in values computed from empirical frequencies carry an `O(1/N_s)`
//! upward bias that grows with the size of the joint state space being
//! estimated. The leading-order correction for one target outcome `y` and one
//! joint source `C` is
//!
//! ```text
//! p̂(y) δ(y,C) = Σ_c (1 − p̂(y,c)) / 2N_s
//!             + Σ_c p̂(y,c) (1 − p̂(y)) / (2N_s p̂(y))
//!             + Σ_c p̂(y,c) (1 − p̂(c)) / (2N_s p̂(c)),
//! ```
//!
//! with `c` running over the **full declared alphabet** of `C` (unobserved
//! cells included) and `0/0` summands taken as zero; their numerators vanish
//! whenever a denominator does. Every summand is non-negative, so `δ ≥ 0` and
//! the corrected value never exceeds the raw one.

use crate::dist::{EmpiricalDistribution, SampleSet, VariableId};
use crate::error::{Error, Result};
use crate::pid::{specific_info_vector, SourceSubset, SourceTargetMarginal};
use crate::synergy::{enumerate_family, IkProfile};

/// A plug-in value together with its bias term.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BiasCorrectedEstimate {
    /// Plug-in value evaluated on empirical frequencies.
    pub raw: f64,
    /// Leading-order bias term; always ≥ 0.
    pub delta: f64,
    /// `raw − delta`, exactly.
    pub corrected: f64,
    pub sample_count: u64,
}

/// Specific information evaluated on the empirical table. Same code path as
/// the exact computation, so feeding the true table reproduces exact values.
pub fn plugin_specific_information(
    emp: &EmpiricalDistribution,
    target: &VariableId,
    y_value: u32,
    source: &SourceSubset,
) -> Result<f64> {
    crate::pid::specific_information(emp.dist(), target, y_value, source)
}

/// Bias terms `δ(y, C)` for every target outcome, in the table's log units.
/// Entries at outcomes with `p̂(y) = 0` are zero and carry no meaning.
fn delta_vector(
    emp: &EmpiricalDistribution,
    target: &VariableId,
    source: &SourceSubset,
) -> Result<Vec<f64>> {
    let st = SourceTargetMarginal::build(emp.dist(), target, source)?;
    let (joint, p_y, p_c) = st.joint_and_marginals();
    let two_n = 2.0 * emp.sample_count() as f64;
    let scale = emp.dist().log_base().scale();

    let mut deltas = vec![0.0; st.target_card];
    for (y, delta) in deltas.iter_mut().enumerate() {
        let py = p_y[y];
        if py <= 0.0 {
            continue;
        }
        let mut joint_complement = 0.0; // Σ_c (1 − p̂(y,c))
        let mut target_weighted = 0.0; //  Σ_c p̂(y,c) (1 − p̂(y)) / p̂(y)
        let mut source_weighted = 0.0; //  Σ_c p̂(y,c) (1 − p̂(c)) / p̂(c)
        for c in 0..st.source_len {
            let p_yc = joint[c * st.target_card + y];
            joint_complement += 1.0 - p_yc;
            target_weighted += p_yc * (1.0 - py) / py;
            if p_c[c] > 0.0 {
                source_weighted += p_yc * (1.0 - p_c[c]) / p_c[c];
            }
        }
        *delta = (joint_complement + target_weighted + source_weighted) / (two_n * py) * scale;
    }
    Ok(deltas)
}

/// The bias term `δ(y_value, source)`.
pub fn bias_delta(
    emp: &EmpiricalDistribution,
    target: &VariableId,
    y_value: u32,
    source: &SourceSubset,
) -> Result<f64> {
    let deltas = delta_vector(emp, target, source)?;
    let p_y = emp
        .dist()
        .marginalize(std::slice::from_ref(target))?
        .probs()
        .to_vec();
    let y = y_value as usize;
    if y >= p_y.len() {
        return Err(Error::InvalidArgument(format!(
            "outcome {y_value} out of range for `{}` (cardinality {})",
            target.name,
            p_y.len()
        )));
    }
    if p_y[y] <= 0.0 {
        return Err(Error::ZeroProbabilityOutcome {
            variable: target.name.clone(),
            value: y_value,
        });
    }
    Ok(deltas[y])
}

/// Plug-in specific information with its bias term.
pub fn corrected_specific_information(
    emp: &EmpiricalDistribution,
    target: &VariableId,
    y_value: u32,
    source: &SourceSubset,
) -> Result<BiasCorrectedEstimate> {
    let raw = plugin_specific_information(emp, target, y_value, source)?;
    let delta = bias_delta(emp, target, y_value, source)?;
    Ok(BiasCorrectedEstimate {
        raw,
        delta,
        corrected: raw - delta,
        sample_count: emp.sample_count(),
    })
}

/// `Î^(k)` evaluated on an empirical table:
/// `Σ_y p̂(y) max_C [ Î(Y=y:C) − δ(y,C) ]`, the correction applied per
/// subset before the maximum when `correct_bias` is set. Outcomes with
/// `p̂(y) = 0` contribute nothing.
pub fn i_k_plugin(
    emp: &EmpiricalDistribution,
    target: &VariableId,
    features: &[VariableId],
    k: usize,
    correct_bias: bool,
) -> Result<f64> {
    let family = enumerate_family(features, k)?;
    let p_y = emp
        .dist()
        .marginalize(std::slice::from_ref(target))?
        .probs()
        .to_vec();

    let mut per_source: Vec<Vec<f64>> = Vec::with_capacity(family.len());
    for source in family.subsets() {
        let mut values = specific_info_vector(emp.dist(), target, source)?.values;
        if correct_bias {
            for (v, d) in values.iter_mut().zip(delta_vector(emp, target, source)?) {
                *v -= d;
            }
        }
        per_source.push(values);
    }

    let mut total = 0.0;
    for (y, &py) in p_y.iter().enumerate() {
        if py <= 0.0 {
            continue;
        }
        let mut acc = per_source[0][y];
        for values in &per_source[1..] {
            acc = f64::max(acc, values[y]);
        }
        total += py * acc;
    }
    Ok(total)
}

/// `Î^(k)` from raw samples; builds the empirical table and delegates to
/// [`i_k_plugin`].
pub fn i_k_estimate(
    samples: &SampleSet,
    target: &VariableId,
    features: &[VariableId],
    k: usize,
    correct_bias: bool,
) -> Result<f64> {
    i_k_plugin(&samples.empirical(), target, features, k, correct_bias)
}

/// Mean and standard deviation of the normalized deviation
/// `î^(k) = Î^(k) / I^(k) − 1` across resampled estimates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeviationStats {
    pub k: usize,
    pub mean: f64,
    pub stdev: f64,
}

/// Summarizes resampled profiles against the exact one. The standard
/// deviation uses the unbiased `n − 1` denominator. Errors if any exact
/// `I^(k)` is zero (the deviation is undefined there) or if units differ.
pub fn normalized_deviation_stats(
    exact: &IkProfile,
    estimates: &[IkProfile],
) -> Result<Vec<DeviationStats>> {
    if estimates.len() < 2 {
        return Err(Error::InvalidArgument(
            "at least two estimated profiles are required".into(),
        ));
    }
    for est in estimates {
        if est.k_max() != exact.k_max() {
            return Err(Error::InvalidArgument(format!(
                "estimated profile has k_max = {}, exact has {}",
                est.k_max(),
                exact.k_max()
            )));
        }
        if est.units() != exact.units() {
            return Err(Error::InvalidArgument(
                "cannot mix log units across profiles in one query".into(),
            ));
        }
    }
    let n = estimates.len() as f64;
    let mut stats = Vec::with_capacity(exact.k_max());
    for k in 1..=exact.k_max() {
        let exact_k = exact.value(k);
        if exact_k <= 0.0 {
            return Err(Error::ZeroExactInformation { k });
        }
        let deviations: Vec<f64> = estimates
            .iter()
            .map(|e| e.value(k) / exact_k - 1.0)
            .collect();
        let mean = deviations.iter().sum::<f64>() / n;
        let variance = deviations
            .iter()
            .map(|d| (d - mean) * (d - mean))
            .sum::<f64>()
            / (n - 1.0);
        stats.push(DeviationStats {
            k,
            mean,
            stdev: variance.sqrt(),
        });
    }
    Ok(stats)
}
