//! Specific information, redundancy and union information.
//!
//! Everything here decomposes over target outcomes. The per-outcome building
//! block is the specific information
//!
//! ```text
//! I(Y=y : A) = Σ_a p(a|y) [log 1/p(y) − log 1/p(y|a)] = KL(p(a|y) ‖ p(a)) ≥ 0,
//! ```
//!
//! which only grows as the source `A` is refined. Redundancy across sources is
//! the expected minimum over the per-outcome values; union information is the
//! expected maximum. The inclusion–exclusion form of union information is kept
//! as an independent cross-check: by the max–min identity the alternating sum
//! of minima collapses to the maximum, so both routes must agree.

use std::fmt;

use crate::dist::{DiscreteJointDistribution, VariableId};
use crate::error::{Error, Result};

/// Inclusion–exclusion expands to `2^n − 1` terms; refuse past this many sources.
pub const MAX_INCLEXCL_SOURCES: usize = 20;

/// A non-empty set of feature variables, kept sorted by index.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SourceSubset {
    members: Vec<VariableId>,
}

impl SourceSubset {
    pub fn new<I: IntoIterator<Item = VariableId>>(members: I) -> Result<Self> {
        let mut members: Vec<VariableId> = members.into_iter().collect();
        members.sort();
        members.dedup();
        if members.is_empty() {
            return Err(Error::InvalidArgument(
                "a source subset must be non-empty".into(),
            ));
        }
        Ok(SourceSubset { members })
    }

    pub fn single(member: VariableId) -> Self {
        SourceSubset {
            members: vec![member],
        }
    }

    pub fn members(&self) -> &[VariableId] {
        &self.members
    }

    pub fn contains(&self, id: &VariableId) -> bool {
        self.members.iter().any(|m| m == id)
    }
}

impl fmt::Display for SourceSubset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, m) in self.members.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", m.name)?;
        }
        write!(f, "}}")
    }
}

/// Marginal of `dist` over `source ∪ {target}` together with the layout
/// needed to address it: target digit position and collapsed source index.
pub(crate) struct SourceTargetMarginal {
    pub marg: DiscreteJointDistribution,
    pub target_pos: usize,
    pub target_card: usize,
    pub source_len: usize,
}

impl SourceTargetMarginal {
    pub(crate) fn build(
        dist: &DiscreteJointDistribution,
        target: &VariableId,
        source: &SourceSubset,
    ) -> Result<Self> {
        dist.position_of(target)?;
        if source.contains(target) {
            return Err(Error::InvalidArgument(format!(
                "target `{}` must not appear among the sources",
                target.name
            )));
        }
        let mut keep: Vec<VariableId> = source.members().to_vec();
        keep.push(target.clone());
        let marg = dist.marginalize(&keep)?;
        // Kept variables stay in index order, so the target lands after every
        // source member with a smaller original index.
        let target_pos = source
            .members()
            .iter()
            .filter(|m| m.index < target.index)
            .count();
        let target_card = marg.cardinality(target_pos);
        let source_len = marg.table_len() / target_card;
        Ok(SourceTargetMarginal {
            marg,
            target_pos,
            target_card,
            source_len,
        })
    }

    /// Splits a flat cell of the marginal into (source index, target value).
    #[inline]
    pub(crate) fn split_cell(&self, cell: usize) -> (usize, usize) {
        let stride = self.marg.stride(self.target_pos);
        let y = (cell / stride) % self.target_card;
        let a = (cell / (stride * self.target_card)) * stride + cell % stride;
        (a, y)
    }

    /// Dense `p(a, y)` matrix indexed `[a * target_card + y]`, plus the two
    /// marginals `p(y)` and `p(a)`.
    pub(crate) fn joint_and_marginals(&self) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let mut joint = vec![0.0; self.source_len * self.target_card];
        let mut p_y = vec![0.0; self.target_card];
        let mut p_a = vec![0.0; self.source_len];
        for (cell, &p) in self.marg.probs().iter().enumerate() {
            let (a, y) = self.split_cell(cell);
            joint[a * self.target_card + y] = p;
            p_y[y] += p;
            p_a[a] += p;
        }
        (joint, p_y, p_a)
    }
}

/// Per-outcome specific information for one source, in the distribution's log
/// units. Entries at outcomes with `p(y) = 0` are zero and carry no meaning.
pub(crate) struct SpecificInfo {
    pub p_y: Vec<f64>,
    pub values: Vec<f64>,
}

pub(crate) fn specific_info_vector(
    dist: &DiscreteJointDistribution,
    target: &VariableId,
    source: &SourceSubset,
) -> Result<SpecificInfo> {
    let st = SourceTargetMarginal::build(dist, target, source)?;
    let (joint, p_y, p_a) = st.joint_and_marginals();
    let scale = dist.log_base().scale();
    let mut values = vec![0.0; st.target_card];
    for a in 0..st.source_len {
        for (y, value) in values.iter_mut().enumerate() {
            let p_ay = joint[a * st.target_card + y];
            if p_ay <= 0.0 {
                continue; // x log x → 0
            }
            // p(a,y) > 0 implies p(a) > 0 and p(y) > 0.
            *value += (p_ay / p_y[y]) * (p_ay / (p_a[a] * p_y[y])).ln() * scale;
        }
    }
    Ok(SpecificInfo { p_y, values })
}

/// Mutual information between a feature subset and the target.
///
/// Computed directly from the joint table as
/// `Σ p(x,y) log p(x,y) / (p(x) p(y))`; terms with `p(x,y) = 0` contribute 0.
pub fn mutual_information(
    dist: &DiscreteJointDistribution,
    features: &SourceSubset,
    target: &VariableId,
) -> Result<f64> {
    let st = SourceTargetMarginal::build(dist, target, features)?;
    let (joint, p_y, p_a) = st.joint_and_marginals();
    let scale = dist.log_base().scale();
    let mut mi = 0.0;
    for a in 0..st.source_len {
        for y in 0..st.target_card {
            let p_ay = joint[a * st.target_card + y];
            if p_ay <= 0.0 {
                continue;
            }
            mi += p_ay * (p_ay / (p_a[a] * p_y[y])).ln() * scale;
        }
    }
    Ok(mi)
}

/// Information the source carries about the single outcome `target = y_value`.
pub fn specific_information(
    dist: &DiscreteJointDistribution,
    target: &VariableId,
    y_value: u32,
    source: &SourceSubset,
) -> Result<f64> {
    let info = specific_info_vector(dist, target, source)?;
    let y = y_value as usize;
    if y >= info.p_y.len() {
        return Err(Error::InvalidArgument(format!(
            "outcome {y_value} out of range for `{}` (cardinality {})",
            target.name,
            info.p_y.len()
        )));
    }
    if info.p_y[y] <= 0.0 {
        return Err(Error::ZeroProbabilityOutcome {
            variable: target.name.clone(),
            value: y_value,
        });
    }
    Ok(info.values[y])
}

/// Per-outcome specific information of every source in a query, plus `p(y)`.
#[derive(Debug, Clone)]
pub struct SpecificInfoTable {
    p_y: Vec<f64>,
    /// `values[source][y]`; meaningful only where `p_y[y] > 0`.
    values: Vec<Vec<f64>>,
}

impl SpecificInfoTable {
    pub fn target_cardinality(&self) -> usize {
        self.p_y.len()
    }

    pub fn num_sources(&self) -> usize {
        self.values.len()
    }

    pub fn p_y(&self, y: usize) -> f64 {
        self.p_y[y]
    }

    /// `I(Y=y : source)`, or `None` when the outcome has zero probability.
    pub fn value(&self, source: usize, y: usize) -> Option<f64> {
        (self.p_y[y] > 0.0).then(|| self.values[source][y])
    }

    /// `Σ_y p(y) min_sources I(Y=y : ·)` — redundancy across the sources.
    pub fn expected_min(&self) -> f64 {
        self.expected_extremum(f64::min)
    }

    /// `Σ_y p(y) max_sources I(Y=y : ·)` — union information of the sources.
    pub fn expected_max(&self) -> f64 {
        self.expected_extremum(f64::max)
    }

    fn expected_extremum(&self, pick: fn(f64, f64) -> f64) -> f64 {
        let mut total = 0.0;
        for (y, &py) in self.p_y.iter().enumerate() {
            if py <= 0.0 {
                continue;
            }
            let mut acc = self.values[0][y];
            for values in &self.values[1..] {
                acc = pick(acc, values[y]);
            }
            total += py * acc;
        }
        total
    }
}

/// Evaluates the specific information of every source against a shared target
/// marginal. The outer weights `p(y)` come from the target marginal of `dist`.
pub fn specific_info_table(
    dist: &DiscreteJointDistribution,
    target: &VariableId,
    sources: &[SourceSubset],
) -> Result<SpecificInfoTable> {
    if sources.is_empty() {
        return Err(Error::InvalidArgument(
            "at least one source subset is required".into(),
        ));
    }
    let target_marg = dist.marginalize(std::slice::from_ref(target))?;
    let p_y = target_marg.probs().to_vec();
    let values = sources
        .iter()
        .map(|s| specific_info_vector(dist, target, s).map(|info| info.values))
        .collect::<Result<Vec<_>>>()?;
    Ok(SpecificInfoTable { p_y, values })
}

/// Redundancy: expected minimum specific information across the sources.
pub fn i_min(
    dist: &DiscreteJointDistribution,
    target: &VariableId,
    sources: &[SourceSubset],
) -> Result<f64> {
    Ok(specific_info_table(dist, target, sources)?.expected_min())
}

/// Union information: expected maximum specific information across the sources.
pub fn i_union_max(
    dist: &DiscreteJointDistribution,
    target: &VariableId,
    sources: &[SourceSubset],
) -> Result<f64> {
    Ok(specific_info_table(dist, target, sources)?.expected_max())
}

/// Union information via inclusion–exclusion over all non-empty
/// sub-collections of the sources.
///
/// Exponential in the number of sources; it exists as the cross-check oracle
/// for [`i_union_max`], which is the production path.
pub fn i_union_inclexcl(
    dist: &DiscreteJointDistribution,
    target: &VariableId,
    sources: &[SourceSubset],
) -> Result<f64> {
    if sources.len() > MAX_INCLEXCL_SOURCES {
        return Err(Error::InvalidArgument(format!(
            "inclusion–exclusion over {} sources needs 2^{} terms; refusing (max {})",
            sources.len(),
            sources.len(),
            MAX_INCLEXCL_SOURCES
        )));
    }
    let table = specific_info_table(dist, target, sources)?;
    let m = sources.len();
    let mut total = 0.0;
    for mask in 1u32..(1u32 << m) {
        let sign = if mask.count_ones() % 2 == 1 { 1.0 } else { -1.0 };
        let mut acc = 0.0;
        for y in 0..table.target_cardinality() {
            let py = table.p_y(y);
            if py <= 0.0 {
                continue;
            }
            let mut min = f64::INFINITY;
            for s in 0..m {
                if mask & (1 << s) != 0 {
                    min = min.min(table.values[s][y]);
                }
            }
            acc += py * min;
        }
        total += sign * acc;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::{DiscreteJointDistribution, LogBase};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::LN_2;

    /// Y = X1 over i.i.d. uniform bits, X2 independent noise.
    fn copy_with_noise() -> DiscreteJointDistribution {
        // vars X1, X2, Y; p = 1/4 where y == x1.
        let mut probs = vec![0.0; 8];
        for x1 in 0..2usize {
            for x2 in 0..2usize {
                probs[x1 * 4 + x2 * 2 + x1] = 0.25;
            }
        }
        DiscreteJointDistribution::new(&[("X1", 2), ("X2", 2), ("Y", 2)], probs, LogBase::Nats)
            .unwrap()
    }

    /// Y = X1 ⊕ X2 over i.i.d. uniform bits.
    fn xor_dist() -> DiscreteJointDistribution {
        let mut probs = vec![0.0; 8];
        for x1 in 0..2usize {
            for x2 in 0..2usize {
                probs[x1 * 4 + x2 * 2 + (x1 ^ x2)] = 0.25;
            }
        }
        DiscreteJointDistribution::new(&[("X1", 2), ("X2", 2), ("Y", 2)], probs, LogBase::Nats)
            .unwrap()
    }

    fn subset(d: &DiscreteJointDistribution, names: &[&str]) -> SourceSubset {
        SourceSubset::new(names.iter().map(|n| d.var(n).unwrap())).unwrap()
    }

    #[test]
    fn mi_of_independent_product_is_zero() {
        let d = DiscreteJointDistribution::uniform(&[("X1", 2), ("Y", 3)]).unwrap();
        let mi = mutual_information(&d, &subset(&d, &["X1"]), &d.var("Y").unwrap()).unwrap();
        assert_abs_diff_eq!(mi, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn mi_of_uniform_bit_copy_is_ln2() {
        let d = copy_with_noise();
        let mi = mutual_information(&d, &subset(&d, &["X1"]), &d.var("Y").unwrap()).unwrap();
        assert_abs_diff_eq!(mi, LN_2, epsilon = 1e-12);
    }

    #[test]
    fn mi_of_xor_joint_pair_is_ln2() {
        let d = xor_dist();
        let mi = mutual_information(&d, &subset(&d, &["X1", "X2"]), &d.var("Y").unwrap()).unwrap();
        assert_abs_diff_eq!(mi, LN_2, epsilon = 1e-12);
    }

    #[test]
    fn mi_respects_bits_units() {
        let d = copy_with_noise().with_log_base(LogBase::Bits);
        let mi = mutual_information(&d, &subset(&d, &["X1"]), &d.var("Y").unwrap()).unwrap();
        assert_abs_diff_eq!(mi, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn mi_rejects_target_among_features() {
        let d = xor_dist();
        let y = d.var("Y").unwrap();
        let sources = SourceSubset::new([d.var("X1").unwrap(), y.clone()]).unwrap();
        assert!(mutual_information(&d, &sources, &y).is_err());
    }

    #[test]
    fn specific_information_of_independent_source_is_zero() {
        let d = DiscreteJointDistribution::uniform(&[("X1", 2), ("Y", 2)]).unwrap();
        let si =
            specific_information(&d, &d.var("Y").unwrap(), 0, &subset(&d, &["X1"])).unwrap();
        assert_abs_diff_eq!(si, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn specific_information_of_copy_channel_is_ln2() {
        let d = copy_with_noise();
        let si =
            specific_information(&d, &d.var("Y").unwrap(), 0, &subset(&d, &["X1"])).unwrap();
        assert_abs_diff_eq!(si, LN_2, epsilon = 1e-12);
    }

    #[test]
    fn specific_information_of_single_xor_leg_is_zero() {
        let d = xor_dist();
        for y in 0..2 {
            let si =
                specific_information(&d, &d.var("Y").unwrap(), y, &subset(&d, &["X1"])).unwrap();
            assert_abs_diff_eq!(si, 0.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn specific_information_zero_outcome_is_domain_error() {
        let d = DiscreteJointDistribution::new(
            &[("X", 2), ("Y", 2)],
            vec![0.5, 0.0, 0.5, 0.0],
            LogBase::Nats,
        )
        .unwrap();
        let err =
            specific_information(&d, &d.var("Y").unwrap(), 1, &subset(&d, &["X"])).unwrap_err();
        assert!(err.is_domain());
    }

    #[test]
    fn i_min_of_single_source_equals_mi() {
        let d = copy_with_noise();
        let y = d.var("Y").unwrap();
        let a = subset(&d, &["X1"]);
        let mi = mutual_information(&d, &a, &y).unwrap();
        let imin = i_min(&d, &y, &[a]).unwrap();
        assert_abs_diff_eq!(imin, mi, epsilon = 1e-12);
    }

    #[test]
    fn i_min_of_xor_legs_is_zero() {
        let d = xor_dist();
        let y = d.var("Y").unwrap();
        let imin = i_min(&d, &y, &[subset(&d, &["X1"]), subset(&d, &["X2"])]).unwrap();
        assert_abs_diff_eq!(imin, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn i_min_is_idempotent_under_duplicated_sources() {
        let d = copy_with_noise();
        let y = d.var("Y").unwrap();
        let a = subset(&d, &["X1"]);
        let once = i_min(&d, &y, std::slice::from_ref(&a)).unwrap();
        let twice = i_min(&d, &y, &[a.clone(), a]).unwrap();
        assert_eq!(once, twice);
    }

    #[test]
    fn i_min_rejects_empty_source_list() {
        let d = xor_dist();
        assert!(i_min(&d, &d.var("Y").unwrap(), &[]).is_err());
    }

    #[test]
    fn i_union_of_xor_family_is_ln2() {
        let d = xor_dist();
        let y = d.var("Y").unwrap();
        let sources = [
            subset(&d, &["X1"]),
            subset(&d, &["X2"]),
            subset(&d, &["X1", "X2"]),
        ];
        let u = i_union_max(&d, &y, &sources).unwrap();
        assert_abs_diff_eq!(u, LN_2, epsilon = 1e-12);
    }

    #[test]
    fn inclexcl_two_sources_matches_hand_expansion() {
        let d = copy_with_noise();
        let y = d.var("Y").unwrap();
        let a1 = subset(&d, &["X1"]);
        let a2 = subset(&d, &["X2"]);
        let direct = i_union_inclexcl(&d, &y, &[a1.clone(), a2.clone()]).unwrap();
        let hand = i_min(&d, &y, std::slice::from_ref(&a1)).unwrap()
            + i_min(&d, &y, std::slice::from_ref(&a2)).unwrap()
            - i_min(&d, &y, &[a1, a2]).unwrap();
        assert_abs_diff_eq!(direct, hand, epsilon = 1e-12);
    }

    #[test]
    fn inclexcl_refuses_oversized_queries() {
        let d = xor_dist();
        let y = d.var("Y").unwrap();
        let sources: Vec<SourceSubset> = (0..21).map(|_| subset(&d, &["X1"])).collect();
        assert!(i_union_inclexcl(&d, &y, &sources).is_err());
    }

    // ---- randomized invariants ----

    prop_compose! {
        /// Random distribution: 2..=4 variables, cardinalities 2..=3, some
        /// cells forced to zero. The last variable plays the target.
        fn arb_dist()(cards in proptest::collection::vec(2usize..=3, 2..=4))
                     (weights in proptest::collection::vec(
                          prop_oneof![3 => 0.05f64..1.0, 1 => Just(0.0)],
                          cards.iter().product::<usize>()),
                      cards in Just(cards))
                     -> DiscreteJointDistribution {
            let sum: f64 = weights.iter().sum();
            let (probs, cards) = if sum <= 0.0 {
                (vec![1.0 / weights.len() as f64; weights.len()], cards)
            } else {
                (weights.iter().map(|w| w / sum).collect(), cards)
            };
            let names: Vec<String> = (0..cards.len()).map(|i| format!("V{i}")).collect();
            let named: Vec<(&str, usize)> =
                names.iter().map(|n| n.as_str()).zip(cards).collect();
            DiscreteJointDistribution::from_validated(
                named.iter().enumerate()
                    .map(|(i, (n, c))| (VariableId::new(i, *n), Alphabet::new(*c).unwrap()))
                    .collect(),
                probs,
                LogBase::Nats,
            )
        }
    }

    use crate::dist::Alphabet;

    fn all_feature_subsets(d: &DiscreteJointDistribution) -> Vec<SourceSubset> {
        let features: Vec<VariableId> = d
            .variable_ids()
            .into_iter()
            .take(d.num_vars() - 1)
            .collect();
        let n = features.len();
        (1usize..(1 << n))
            .map(|mask| {
                SourceSubset::new(
                    features
                        .iter()
                        .enumerate()
                        .filter(|(i, _)| mask & (1 << i) != 0)
                        .map(|(_, f)| f.clone()),
                )
                .unwrap()
            })
            .collect()
    }

    proptest! {
        #[test]
        fn specific_information_is_nonnegative(d in arb_dist()) {
            let target = d.variable_ids().pop().unwrap();
            for s in all_feature_subsets(&d) {
                let info = specific_info_vector(&d, &target, &s).unwrap();
                for (y, &py) in info.p_y.iter().enumerate() {
                    if py > 0.0 {
                        prop_assert!(info.values[y] >= -1e-12,
                            "I(Y={y}:{s}) = {}", info.values[y]);
                    }
                }
            }
        }

        #[test]
        fn single_source_collapse(d in arb_dist()) {
            let target = d.variable_ids().pop().unwrap();
            for s in all_feature_subsets(&d) {
                let sources = [s.clone()];
                let imin = i_min(&d, &target, &sources).unwrap();
                let imax = i_union_max(&d, &target, &sources).unwrap();
                prop_assert_eq!(imin, imax);
                let mi = mutual_information(&d, &s, &target).unwrap();
                // Same summands in a different association order.
                prop_assert!((imin - mi).abs() <= 1e-12, "imin={imin} mi={mi}");
            }
        }

        #[test]
        fn source_order_is_irrelevant(d in arb_dist()) {
            let target = d.variable_ids().pop().unwrap();
            let mut sources = all_feature_subsets(&d);
            let forward_min = i_min(&d, &target, &sources).unwrap();
            let forward_max = i_union_max(&d, &target, &sources).unwrap();
            sources.reverse();
            prop_assert_eq!(forward_min, i_min(&d, &target, &sources).unwrap());
            prop_assert_eq!(forward_max, i_union_max(&d, &target, &sources).unwrap());
        }

        #[test]
        fn min_max_sandwich(d in arb_dist()) {
            let target = d.variable_ids().pop().unwrap();
            let sources = all_feature_subsets(&d);
            let lo = i_min(&d, &target, &sources).unwrap();
            let hi = i_union_max(&d, &target, &sources).unwrap();
            prop_assert!(lo <= hi + 1e-12, "lo={lo} hi={hi}");
        }

        #[test]
        fn max_min_identity(d in arb_dist()) {
            let target = d.variable_ids().pop().unwrap();
            let subsets = all_feature_subsets(&d);
            // Sliding windows of up to 4 distinct subsets.
            for i in 0..subsets.len() {
                let collection: Vec<SourceSubset> =
                    subsets[i..].iter().take(4).cloned().collect();
                let max = i_union_max(&d, &target, &collection).unwrap();
                let ie = i_union_inclexcl(&d, &target, &collection).unwrap();
                prop_assert!((max - ie).abs() <= 1e-10, "max={max} inclexcl={ie}");
            }
        }

        #[test]
        fn specific_information_grows_with_the_source(d in arb_dist()) {
            let target = d.variable_ids().pop().unwrap();
            let features: Vec<VariableId> = d.variable_ids().into_iter()
                .take(d.num_vars() - 1).collect();
            if features.len() < 2 {
                return Ok(());
            }
            let small = SourceSubset::new([features[0].clone()]).unwrap();
            let grown = SourceSubset::new(features.into_iter().take(2)).unwrap();
            let lo = specific_info_vector(&d, &target, &small).unwrap();
            let hi = specific_info_vector(&d, &target, &grown).unwrap();
            for (y, &py) in lo.p_y.iter().enumerate() {
                if py > 0.0 {
                    prop_assert!(hi.values[y] >= lo.values[y] - 1e-12);
                }
            }
        }
    }
}
