//! Pattern probabilities for family members.
//!
//! For a member `C` of an antimonotonic family, the probability `p(C = t)` of
//! any 0/1 pattern `t` is a fixed linear combination of the given frequencies
//! by inclusion-exclusion, so it is identical across every distribution that
//! satisfies the frequencies. This module evaluates that combination directly.

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::Error;
use crate::model::{BinaryVector, FrequencyAssignment, Itemset, ItemsetFamily};

/// The determined value of `p(C = t)`, plus whether it fell inside `[0, 1]`.
///
/// For consistent frequencies the value always lies in `[0, 1]`. Inconsistent
/// frequencies can push it outside; the raw value is returned unclamped since
/// an out-of-range projection is itself a useful inconsistency symptom.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Projection {
    pub value: BigRational,
    pub in_range: bool,
}

/// Evaluates `p(C = t)` for a family member `C` from the frequencies alone.
///
/// Splitting `C` into `U` (positions where `t` is 1) and `W = C − U`, the
/// probability expands over the nonempty subsets `H ⊆ W` as
/// `θ_U − Σ_H (−1)^{|H|+1} θ_{U∪H}`. Antimonotonicity guarantees every
/// itemset looked up is a family member.
pub fn project(
    family: &ItemsetFamily,
    theta: &FrequencyAssignment,
    member: Itemset,
    pattern: &BinaryVector,
) -> Result<Projection, Error> {
    if pattern.len() != member.len() {
        return Err(Error::MalformedInput(format!(
            "pattern {pattern} has length {}, itemset {member} has {} members",
            pattern.len(),
            member.len()
        )));
    }
    if theta.len() != family.len() {
        return Err(Error::MalformedInput(format!(
            "{} frequencies given for a family of {} itemsets",
            theta.len(),
            family.len()
        )));
    }
    if !family.contains(member) {
        return Err(Error::UnknownItemset(member));
    }
    if let Some((violator, missing)) = family.first_closure_violation() {
        return Err(Error::NotAntimonotonic { member: violator, missing });
    }

    let mut ones = Itemset::EMPTY;
    for (attr, bit) in member.members().zip(pattern.iter()) {
        if bit {
            ones = ones.union(Itemset::from_indices([attr])?);
        }
    }
    let zeros = member.difference(ones);

    // Σ over all H ⊆ W of (−1)^{|H|} θ_{U ∪ H}; the H = ∅ term is θ_U.
    let mut value = BigRational::zero();
    for h in zeros.subsets() {
        let looked_up = ones.union(h);
        let position = family
            .position(looked_up)
            .expect("antimonotonicity puts every subset of a member in the family");
        if h.len() % 2 == 0 {
            value += theta.get(position);
        } else {
            value -= theta.get(position);
        }
    }

    let in_range = !value.is_negative() && value <= BigRational::one();
    Ok(Projection { value, in_range })
}

/// Largest member size for which zero patterns are enumerated exhaustively.
pub(crate) const PATTERN_MEMBER_CAP: usize = 8;

/// Enumerates `(member mask, ones mask)` pairs whose pattern probability is
/// determined to be zero by the frequencies.
///
/// Every distribution satisfying the frequencies puts zero mass on each state
/// agreeing with such a pattern, so callers may treat those states as
/// removed. Requires an antimonotonic family. Members larger than
/// `member_size_cap` are not enumerated pattern-by-pattern; for those only a
/// zero frequency itself (the all-ones pattern) is reported.
pub(crate) fn determined_zero_patterns(
    family: &ItemsetFamily,
    theta: &FrequencyAssignment,
    member_size_cap: usize,
) -> Vec<(u64, u64)> {
    let mut patterns = Vec::new();
    for (i, &member) in family.items().iter().enumerate() {
        if member.is_empty() {
            continue;
        }
        let mask = member.bits();
        if member.len() > member_size_cap {
            if theta.get(i).is_zero() {
                patterns.push((mask, mask));
            }
            continue;
        }
        for bits in 0..(1u64 << member.len()) {
            let pattern =
                BinaryVector::new((0..member.len()).map(|j| bits >> j & 1 == 1).collect());
            let projected = project(family, theta, member, &pattern)
                .expect("members of a closed family project cleanly");
            if projected.value.is_zero() {
                let ones: u64 = member
                    .members()
                    .enumerate()
                    .filter(|(j, _)| bits >> j & 1 == 1)
                    .map(|(_, attr)| 1u64 << attr)
                    .sum();
                patterns.push((mask, ones));
            }
        }
    }
    patterns
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::downward_closure;
    use num_bigint::BigInt;

    fn ratio(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    fn set(indices: &[usize]) -> Itemset {
        Itemset::from_indices(indices.iter().copied()).unwrap()
    }

    /// Family {∅, a, b, ab} with θ = (1, 3/5, 1/2, 3/10).
    fn extended_intro() -> (ItemsetFamily, FrequencyAssignment) {
        let family = downward_closure(&[set(&[0, 1])], 2).unwrap();
        let theta = FrequencyAssignment::new(
            &family,
            vec![ratio(1, 1), ratio(3, 5), ratio(1, 2), ratio(3, 10)],
        )
        .unwrap();
        (family, theta)
    }

    #[test]
    fn two_term_expansion() {
        let (family, theta) = extended_intro();
        let p = project(&family, &theta, set(&[0, 1]), &BinaryVector::parse01("10").unwrap()).unwrap();
        assert_eq!(p.value, ratio(3, 10));
        assert!(p.in_range);
    }

    #[test]
    fn all_ones_pattern_returns_theta_itself() {
        let (family, theta) = extended_intro();
        let p = project(&family, &theta, set(&[0, 1]), &BinaryVector::all_ones(2)).unwrap();
        assert_eq!(p.value, ratio(3, 10));
        let p = project(&family, &theta, set(&[0]), &BinaryVector::all_ones(1)).unwrap();
        assert_eq!(p.value, ratio(3, 5));
    }

    #[test]
    fn patterns_sum_to_one_for_consistent_frequencies() {
        let (family, theta) = extended_intro();
        for &member in family.items() {
            let mut total = BigRational::zero();
            for bits in 0..(1u32 << member.len()) {
                let pattern =
                    BinaryVector::new((0..member.len()).map(|j| bits >> j & 1 == 1).collect());
                total += project(&family, &theta, member, &pattern).unwrap().value;
            }
            assert!(total.is_one(), "patterns of {member} sum to {total}");
        }
    }

    #[test]
    fn non_member_is_rejected() {
        let family = downward_closure(&[set(&[0]), set(&[1])], 2).unwrap();
        let theta = FrequencyAssignment::new(
            &family,
            vec![ratio(1, 1), ratio(3, 5), ratio(1, 2)],
        )
        .unwrap();
        let err = project(&family, &theta, set(&[0, 1]), &BinaryVector::all_ones(2));
        assert_eq!(err.unwrap_err(), Error::UnknownItemset(set(&[0, 1])));
    }

    #[test]
    fn non_antimonotonic_family_is_rejected() {
        let family = ItemsetFamily::new(2, vec![Itemset::EMPTY, set(&[0, 1])]).unwrap();
        let theta =
            FrequencyAssignment::new(&family, vec![ratio(1, 1), ratio(1, 4)]).unwrap();
        let err = project(&family, &theta, set(&[0, 1]), &BinaryVector::all_ones(2));
        assert!(matches!(err, Err(Error::NotAntimonotonic { .. })));
    }

    #[test]
    fn inconsistent_frequencies_can_project_out_of_range() {
        let family = downward_closure(&[set(&[0, 1])], 2).unwrap();
        // θ_ab > θ_a forces p(a=1, b=0) below zero.
        let theta = FrequencyAssignment::new(
            &family,
            vec![ratio(1, 1), ratio(1, 10), ratio(1, 2), ratio(1, 2)],
        )
        .unwrap();
        let p = project(&family, &theta, set(&[0, 1]), &BinaryVector::parse01("10").unwrap()).unwrap();
        assert_eq!(p.value, ratio(-2, 5));
        assert!(!p.in_range);
    }

    mod properties {
        use super::*;
        use crate::model::JointDistribution;
        use num_traits::One;
        use proptest::prelude::*;

        fn consistent_case() -> impl Strategy<
            Value = (usize, Vec<u64>, Vec<u32>),
        > {
            (1usize..=5).prop_flat_map(|k| {
                let mask = (1u64 << k) - 1;
                (
                    Just(k),
                    proptest::collection::vec((0..=mask).prop_map(move |m| m & mask), 1..4),
                    proptest::collection::vec(0u32..100, 1usize << k),
                )
            })
        }

        fn weighted(k: usize, weights: &[u32]) -> JointDistribution {
            let total: u64 = weights.iter().map(|&w| w as u64).sum::<u64>().max(1);
            let states: Vec<(u64, BigRational)> = if weights.iter().all(|&w| w == 0) {
                vec![(0, BigRational::one())]
            } else {
                weights
                    .iter()
                    .enumerate()
                    .filter(|(_, w)| **w > 0)
                    .map(|(s, &w)| {
                        (s as u64, BigRational::new(BigInt::from(w), BigInt::from(total)))
                    })
                    .collect()
            };
            JointDistribution::exact_from_states(k, states).unwrap()
        }

        proptest! {
            /// Against frequencies read off an explicit distribution, every
            /// member pattern projects to that distribution's own event
            /// probability, and the patterns of each member partition the
            /// mass.
            #[test]
            fn projections_match_the_generating_distribution(
                (k, seeds, weights) in consistent_case(),
            ) {
                let seeds: Vec<Itemset> = seeds.iter().map(|&m| Itemset::from_bits(m)).collect();
                let family = downward_closure(&seeds, k).unwrap();
                let p = weighted(k, &weights);
                let values = family
                    .items()
                    .iter()
                    .map(|&member| {
                        p.frequency(member).unwrap().as_exact().unwrap().clone()
                    })
                    .collect();
                let theta = FrequencyAssignment::new(&family, values).unwrap();

                for &member in family.items() {
                    let mut total = BigRational::zero();
                    for bits in 0..(1u32 << member.len()) {
                        let pattern = BinaryVector::new(
                            (0..member.len()).map(|j| bits >> j & 1 == 1).collect(),
                        );
                        let projected = project(&family, &theta, member, &pattern).unwrap();
                        let direct = p.event_probability(member, &pattern).unwrap();
                        prop_assert!(projected.in_range);
                        prop_assert_eq!(&projected.value, direct.as_exact().unwrap());
                        total += projected.value;
                    }
                    prop_assert!(total.is_one());
                }
            }
        }
    }
}
