//! Core domain types: attributes, itemsets, families, frequency vectors and
//! explicit joint distributions over the sample space `{0,1}^K`.
//!
//! Attributes are integer indices `0..K`; itemsets are bitmasks over them, so
//! subset and membership tests are single word operations. Distributions are
//! either exact (sparse rational masses) or floating (dense `f64` vector) and
//! the two modes never mix silently.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::Error;

/// Hard cap on the number of attributes: states are `u64` bitmasks.
pub const MAX_ATTRIBUTES: usize = 63;

/// Largest `K` for which a dense floating distribution may be materialized.
pub const DENSE_K_LIMIT: usize = 24;

/// A set of attribute indices, stored as a bitmask (bit `i` = attribute `i`).
///
/// The ordering is by size first, then lexicographic on the ascending list of
/// members; this is the canonical order used everywhere a family is sorted.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Itemset(u64);

impl Itemset {
    /// The empty itemset.
    pub const EMPTY: Itemset = Itemset(0);

    /// Builds an itemset from attribute indices. Duplicates collapse.
    pub fn from_indices<I: IntoIterator<Item = usize>>(indices: I) -> Result<Itemset, Error> {
        let mut bits = 0u64;
        for i in indices {
            if i >= MAX_ATTRIBUTES {
                return Err(Error::MalformedInput(format!(
                    "attribute index {i} exceeds the maximum of {}",
                    MAX_ATTRIBUTES - 1
                )));
            }
            bits |= 1 << i;
        }
        Ok(Itemset(bits))
    }

    pub(crate) fn from_bits(bits: u64) -> Itemset {
        Itemset(bits)
    }

    /// The raw bitmask.
    pub fn bits(self) -> u64 {
        self.0
    }

    /// Number of members.
    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn contains(self, attribute: usize) -> bool {
        attribute < 64 && self.0 >> attribute & 1 == 1
    }

    pub fn is_subset_of(self, other: Itemset) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn union(self, other: Itemset) -> Itemset {
        Itemset(self.0 | other.0)
    }

    pub fn difference(self, other: Itemset) -> Itemset {
        Itemset(self.0 & !other.0)
    }

    pub fn remove(self, attribute: usize) -> Itemset {
        Itemset(self.0 & !(1 << attribute))
    }

    /// Member indices in ascending order.
    pub fn members(self) -> impl Iterator<Item = usize> {
        let mut bits = self.0;
        std::iter::from_fn(move || {
            if bits == 0 {
                None
            } else {
                let i = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                Some(i)
            }
        })
    }

    /// All subsets, including the empty set and the set itself.
    pub fn subsets(self) -> impl Iterator<Item = Itemset> {
        let mask = self.0;
        let mut current = mask;
        let mut done = false;
        std::iter::from_fn(move || {
            if done {
                return None;
            }
            let out = Itemset(current);
            if current == 0 {
                done = true;
            } else {
                current = (current - 1) & mask;
            }
            Some(out)
        })
    }
}

impl Ord for Itemset {
    fn cmp(&self, other: &Itemset) -> Ordering {
        self.len().cmp(&other.len()).then_with(|| {
            let diff = self.0 ^ other.0;
            if diff == 0 {
                return Ordering::Equal;
            }
            // Same size: the set holding the lowest differing attribute has
            // the smaller element at the first difference, so it sorts first.
            let low = diff & diff.wrapping_neg();
            if self.0 & low != 0 {
                Ordering::Less
            } else {
                Ordering::Greater
            }
        })
    }
}

impl PartialOrd for Itemset {
    fn partial_cmp(&self, other: &Itemset) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Itemset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (n, i) in self.members().enumerate() {
            if n > 0 {
                write!(f, ",")?;
            }
            write!(f, "{i}")?;
        }
        write!(f, "}}")
    }
}

impl fmt::Debug for Itemset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// A fixed-length vector of binary values.
///
/// When paired with an itemset, position `j` refers to the `j`-th smallest
/// member of the set.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct BinaryVector {
    bits: Vec<bool>,
}

impl BinaryVector {
    pub fn new(bits: Vec<bool>) -> BinaryVector {
        BinaryVector { bits }
    }

    pub fn all_ones(len: usize) -> BinaryVector {
        BinaryVector { bits: vec![true; len] }
    }

    pub fn all_zeros(len: usize) -> BinaryVector {
        BinaryVector { bits: vec![false; len] }
    }

    /// Parses a string of `0` and `1` characters.
    pub fn parse01(s: &str) -> Result<BinaryVector, Error> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::MalformedInput(format!(
                    "invalid bit character {other:?} in pattern {s:?}"
                ))),
            })
            .collect::<Result<Vec<bool>, Error>>()
            .map(BinaryVector::new)
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn get(&self, i: usize) -> bool {
        self.bits[i]
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        self.bits.iter().copied()
    }
}

impl fmt::Display for BinaryVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in &self.bits {
            write!(f, "{}", if *b { '1' } else { '0' })?;
        }
        Ok(())
    }
}

/// An ordered collection of distinct itemsets over `attribute_count`
/// attributes.
#[derive(Clone, Debug)]
pub struct ItemsetFamily {
    items: Vec<Itemset>,
    attribute_count: usize,
    index: HashMap<u64, usize>,
}

impl ItemsetFamily {
    pub fn new(attribute_count: usize, items: Vec<Itemset>) -> Result<ItemsetFamily, Error> {
        if attribute_count > MAX_ATTRIBUTES {
            return Err(Error::ResourceLimit { needed: attribute_count, limit: MAX_ATTRIBUTES });
        }
        let mut index = HashMap::with_capacity(items.len());
        for (pos, item) in items.iter().enumerate() {
            if attribute_count < 64 && item.bits() >> attribute_count != 0 {
                return Err(Error::MalformedInput(format!(
                    "itemset {item} references attributes outside 0..{attribute_count}"
                )));
            }
            if index.insert(item.bits(), pos).is_some() {
                return Err(Error::MalformedInput(format!("duplicate itemset {item} in family")));
            }
        }
        Ok(ItemsetFamily { items, attribute_count, index })
    }

    pub fn attribute_count(&self) -> usize {
        self.attribute_count
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn items(&self) -> &[Itemset] {
        &self.items
    }

    pub fn get(&self, i: usize) -> Itemset {
        self.items[i]
    }

    /// Position of `item` in the family, if it is a member.
    pub fn position(&self, item: Itemset) -> Option<usize> {
        self.index.get(&item.bits()).copied()
    }

    pub fn contains(&self, item: Itemset) -> bool {
        self.index.contains_key(&item.bits())
    }

    /// True iff every subset of every member is also a member.
    ///
    /// Closure under removing one attribute implies closure under arbitrary
    /// subsets, so only the one-step subsets are checked.
    pub fn is_antimonotonic(&self) -> bool {
        self.first_closure_violation().is_none()
    }

    /// The first (member, missing subset) pair violating closure, if any.
    pub fn first_closure_violation(&self) -> Option<(Itemset, Itemset)> {
        for &member in &self.items {
            for attr in member.members() {
                let subset = member.remove(attr);
                if !self.contains(subset) {
                    return Some((member, subset));
                }
            }
        }
        None
    }

    /// Every subset missing from the family, across all members.
    pub fn missing_subsets(&self) -> Vec<Itemset> {
        let mut missing = std::collections::BTreeSet::new();
        for &member in &self.items {
            for subset in member.subsets() {
                if !self.contains(subset) {
                    missing.insert(subset);
                }
            }
        }
        missing.into_iter().collect()
    }
}

/// Builds the smallest antimonotonic family containing every seed itemset.
pub fn downward_closure(seeds: &[Itemset], attribute_count: usize) -> Result<ItemsetFamily, Error> {
    if attribute_count > MAX_ATTRIBUTES {
        return Err(Error::ResourceLimit { needed: attribute_count, limit: MAX_ATTRIBUTES });
    }
    let mut closed = std::collections::BTreeSet::new();
    for &seed in seeds {
        if attribute_count < 64 && seed.bits() >> attribute_count != 0 {
            return Err(Error::MalformedInput(format!(
                "seed itemset {seed} references attributes outside 0..{attribute_count}"
            )));
        }
        for subset in seed.subsets() {
            closed.insert(subset);
        }
    }
    ItemsetFamily::new(attribute_count, closed.into_iter().collect())
}

/// Exact rational frequencies, aligned index-for-index with a family.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FrequencyAssignment {
    values: Vec<BigRational>,
}

impl FrequencyAssignment {
    pub fn new(family: &ItemsetFamily, values: Vec<BigRational>) -> Result<FrequencyAssignment, Error> {
        if values.len() != family.len() {
            return Err(Error::MalformedInput(format!(
                "{} frequencies given for a family of {} itemsets",
                values.len(),
                family.len()
            )));
        }
        for (item, value) in family.items().iter().zip(&values) {
            if value.is_negative() || value > &BigRational::one() {
                return Err(Error::MalformedInput(format!(
                    "frequency {value} of {item} lies outside [0, 1]"
                )));
            }
            if item.is_empty() && !value.is_one() {
                return Err(Error::MalformedInput(format!(
                    "the empty itemset must have frequency 1, got {value}"
                )));
            }
        }
        Ok(FrequencyAssignment { values })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, i: usize) -> &BigRational {
        &self.values[i]
    }

    pub fn values(&self) -> &[BigRational] {
        &self.values
    }
}

/// Whether a distribution stores exact rational or floating-point masses.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum DistributionMode {
    Exact,
    Float,
}

/// A probability value in either arithmetic mode.
#[derive(Clone, PartialEq, Debug)]
pub enum MassValue {
    Exact(BigRational),
    Float(f64),
}

impl MassValue {
    pub fn to_f64(&self) -> f64 {
        match self {
            MassValue::Exact(r) => r.to_f64().unwrap_or(f64::NAN),
            MassValue::Float(x) => *x,
        }
    }

    pub fn as_exact(&self) -> Option<&BigRational> {
        match self {
            MassValue::Exact(r) => Some(r),
            MassValue::Float(_) => None,
        }
    }
}

#[derive(Debug)]
enum MassStore {
    /// Sparse map from state bitmask to a positive rational mass.
    Exact(BTreeMap<u64, BigRational>),
    /// Dense vector indexed by state bitmask.
    Float(Vec<f64>),
}

/// An explicit probability mass function on `{0,1}^K`.
///
/// States are `u64` bitmasks with bit `i` holding the value of attribute `i`.
#[derive(Debug)]
pub struct JointDistribution {
    attribute_count: usize,
    mass: MassStore,
}

impl JointDistribution {
    /// Builds an exact sparse distribution. Zero masses are dropped; the
    /// remaining masses must be nonnegative and sum to exactly 1.
    pub fn exact_from_states<I>(attribute_count: usize, states: I) -> Result<JointDistribution, Error>
    where
        I: IntoIterator<Item = (u64, BigRational)>,
    {
        if attribute_count > MAX_ATTRIBUTES {
            return Err(Error::ResourceLimit { needed: attribute_count, limit: MAX_ATTRIBUTES });
        }
        let mut mass = BTreeMap::new();
        let mut total = BigRational::zero();
        for (state, value) in states {
            if attribute_count < 64 && state >> attribute_count != 0 {
                return Err(Error::MalformedInput(format!(
                    "state {state:#b} lies outside the {attribute_count}-attribute sample space"
                )));
            }
            if value.is_negative() {
                return Err(Error::MalformedInput(format!("negative mass {value} on state {state:#b}")));
            }
            if value.is_zero() {
                continue;
            }
            total += &value;
            if mass.insert(state, value).is_some() {
                return Err(Error::MalformedInput(format!("state {state:#b} listed twice")));
            }
        }
        if !total.is_one() {
            return Err(Error::MalformedInput(format!("masses sum to {total}, expected exactly 1")));
        }
        Ok(JointDistribution { attribute_count, mass: MassStore::Exact(mass) })
    }

    /// Builds a floating distribution from a dense mass vector of length
    /// `2^attribute_count`. Masses must be nonnegative and sum to 1 within
    /// 1e-12.
    pub fn float_from_dense(attribute_count: usize, mass: Vec<f64>) -> Result<JointDistribution, Error> {
        if attribute_count > DENSE_K_LIMIT {
            return Err(Error::ResourceLimit { needed: attribute_count, limit: DENSE_K_LIMIT });
        }
        if mass.len() != 1usize << attribute_count {
            return Err(Error::MalformedInput(format!(
                "dense mass vector has length {}, expected {}",
                mass.len(),
                1usize << attribute_count
            )));
        }
        let mut total = 0.0;
        for (state, value) in mass.iter().enumerate() {
            if !value.is_finite() || *value < 0.0 {
                return Err(Error::MalformedInput(format!("invalid mass {value} on state {state:#b}")));
            }
            total += value;
        }
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::MalformedInput(format!("masses sum to {total}, expected 1 within 1e-12")));
        }
        Ok(JointDistribution { attribute_count, mass: MassStore::Float(mass) })
    }

    pub fn attribute_count(&self) -> usize {
        self.attribute_count
    }

    pub fn mode(&self) -> DistributionMode {
        match self.mass {
            MassStore::Exact(_) => DistributionMode::Exact,
            MassStore::Float(_) => DistributionMode::Float,
        }
    }

    /// Number of states carrying nonzero mass.
    pub fn support_len(&self) -> usize {
        match &self.mass {
            MassStore::Exact(map) => map.len(),
            MassStore::Float(v) => v.iter().filter(|x| **x != 0.0).count(),
        }
    }

    /// The sparse exact masses, in ascending state order.
    pub fn exact_masses(&self) -> Result<&BTreeMap<u64, BigRational>, Error> {
        match &self.mass {
            MassStore::Exact(map) => Ok(map),
            MassStore::Float(_) => Err(Error::ExactModeRequired),
        }
    }

    /// The dense floating masses, indexed by state.
    pub fn float_masses(&self) -> Option<&[f64]> {
        match &self.mass {
            MassStore::Exact(_) => None,
            MassStore::Float(v) => Some(v),
        }
    }

    /// The probability that every attribute of `event` takes the value given
    /// by `pattern` (position `j` of `pattern` pairs with the `j`-th smallest
    /// member of `event`).
    pub fn event_probability(&self, event: Itemset, pattern: &BinaryVector) -> Result<MassValue, Error> {
        if pattern.len() != event.len() {
            return Err(Error::MalformedInput(format!(
                "pattern {pattern} has length {}, itemset {event} has {} members",
                pattern.len(),
                event.len()
            )));
        }
        if self.attribute_count < 64 && event.bits() >> self.attribute_count != 0 {
            return Err(Error::MalformedInput(format!(
                "itemset {event} references attributes outside 0..{}",
                self.attribute_count
            )));
        }
        let mut ones = 0u64;
        for (attr, bit) in event.members().zip(pattern.iter()) {
            if bit {
                ones |= 1 << attr;
            }
        }
        Ok(self.conditioned_mass(event.bits(), ones))
    }

    /// The frequency of `event`: the probability that all of its attributes
    /// are 1 simultaneously.
    pub fn frequency(&self, event: Itemset) -> Result<MassValue, Error> {
        self.event_probability(event, &BinaryVector::all_ones(event.len()))
    }

    /// Sum of mass over states agreeing with `ones` on the `event` bits.
    fn conditioned_mass(&self, event: u64, ones: u64) -> MassValue {
        match &self.mass {
            MassStore::Exact(map) => {
                let mut total = BigRational::zero();
                for (state, value) in map {
                    if state & event == ones {
                        total += value;
                    }
                }
                MassValue::Exact(total)
            }
            MassStore::Float(v) => {
                let mut total = 0.0;
                for state in superstates(self.attribute_count, event) {
                    total += v[(state ^ event ^ ones) as usize];
                }
                MassValue::Float(total)
            }
        }
    }

    /// True iff this distribution reproduces every family frequency within
    /// `tol`. In exact mode with `tol == 0` the comparison is exact.
    ///
    /// The distribution and the family must agree on the attribute count.
    pub fn satisfies(&self, family: &ItemsetFamily, theta: &FrequencyAssignment, tol: f64) -> bool {
        assert_eq!(
            family.attribute_count(),
            self.attribute_count,
            "family and distribution attribute counts differ"
        );
        assert_eq!(theta.len(), family.len(), "frequencies not aligned with family");
        for (i, &member) in family.items().iter().enumerate() {
            let freq = self
                .frequency(member)
                .expect("family members are within the attribute range");
            let target = theta.get(i);
            let ok = match freq {
                MassValue::Exact(ref value) => {
                    if tol == 0.0 {
                        value == target
                    } else {
                        (value - target).abs().to_f64().is_some_and(|d| d <= tol)
                    }
                }
                MassValue::Float(value) => {
                    let target = target.to_f64().unwrap_or(f64::NAN);
                    (value - target).abs() <= tol
                }
            };
            if !ok {
                return false;
            }
        }
        true
    }
}

/// Iterates all states `s` with `s ⊇ mask` in a `k`-attribute space,
/// ascending.
pub(crate) fn superstates(k: usize, mask: u64) -> impl Iterator<Item = u64> {
    let space = if k == 64 { u64::MAX } else { (1u64 << k) - 1 };
    let free = space & !mask;
    let mut next = Some(mask);
    std::iter::from_fn(move || {
        let current = next?;
        next = if (current | !free) == u64::MAX || current == space {
            None
        } else {
            // Advance the free bits only: add one in the subspace of free
            // positions.
            Some(((current | !free).wrapping_add(1) & free) | mask)
        };
        Some(current)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    fn ratio(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    fn set(indices: &[usize]) -> Itemset {
        Itemset::from_indices(indices.iter().copied()).unwrap()
    }

    fn uniform_exact(k: usize) -> JointDistribution {
        let n = 1u64 << k;
        JointDistribution::exact_from_states(k, (0..n).map(|s| (s, ratio(1, n as i64)))).unwrap()
    }

    #[test]
    fn closure_of_a_pair_has_four_members() {
        let family = downward_closure(&[set(&[0, 1])], 2).unwrap();
        assert_eq!(family.items(), &[Itemset::EMPTY, set(&[0]), set(&[1]), set(&[0, 1])]);
        assert!(family.is_antimonotonic());
    }

    #[test]
    fn closure_of_empty_seed_is_the_empty_itemset_alone() {
        let family = downward_closure(&[Itemset::EMPTY], 3).unwrap();
        assert_eq!(family.items(), &[Itemset::EMPTY]);
    }

    #[test]
    fn closure_of_a_four_set_has_sixteen_members() {
        let family = downward_closure(&[set(&[0, 1, 2, 3])], 4).unwrap();
        assert_eq!(family.len(), 16);
        assert!(family.is_antimonotonic());
    }

    #[test]
    fn closure_rejects_out_of_range_seed() {
        assert!(matches!(downward_closure(&[set(&[2])], 2), Err(Error::MalformedInput(_))));
    }

    #[test]
    fn antimonotonicity_detects_missing_subsets() {
        let good = ItemsetFamily::new(2, vec![Itemset::EMPTY, set(&[0]), set(&[1]), set(&[0, 1])]).unwrap();
        assert!(good.is_antimonotonic());

        let bad = ItemsetFamily::new(2, vec![set(&[0, 1])]).unwrap();
        assert!(!bad.is_antimonotonic());
        assert_eq!(bad.missing_subsets(), vec![Itemset::EMPTY, set(&[0]), set(&[1])]);
    }

    #[test]
    fn family_rejects_duplicates_and_out_of_range_members() {
        assert!(ItemsetFamily::new(2, vec![set(&[0]), set(&[0])]).is_err());
        assert!(ItemsetFamily::new(2, vec![set(&[5])]).is_err());
    }

    #[test]
    fn canonical_order_is_size_then_lexicographic() {
        let mut items = vec![set(&[1, 2]), set(&[0, 3]), set(&[2]), Itemset::EMPTY, set(&[0, 1, 2])];
        items.sort();
        assert_eq!(items, vec![Itemset::EMPTY, set(&[2]), set(&[0, 3]), set(&[1, 2]), set(&[0, 1, 2])]);
    }

    #[test]
    fn empty_event_has_probability_one() {
        let p = uniform_exact(3);
        let value = p.event_probability(Itemset::EMPTY, &BinaryVector::new(vec![])).unwrap();
        assert_eq!(value.as_exact().unwrap(), &ratio(1, 1));
    }

    #[test]
    fn uniform_pair_event_probability_is_a_quarter() {
        let p = uniform_exact(3);
        let value = p
            .event_probability(set(&[0, 1]), &BinaryVector::new(vec![true, true]))
            .unwrap();
        assert_eq!(value.as_exact().unwrap(), &ratio(1, 4));
    }

    #[test]
    fn event_probability_rejects_dimension_mismatch() {
        let p = uniform_exact(2);
        assert!(p.event_probability(set(&[0, 1]), &BinaryVector::new(vec![true])).is_err());
    }

    #[test]
    fn uniform_satisfies_its_own_marginals() {
        let p = uniform_exact(2);
        let family = downward_closure(&[set(&[0]), set(&[1])], 2).unwrap();
        let theta =
            FrequencyAssignment::new(&family, vec![ratio(1, 1), ratio(1, 2), ratio(1, 2)]).unwrap();
        assert!(p.satisfies(&family, &theta, 0.0));

        let wrong =
            FrequencyAssignment::new(&family, vec![ratio(1, 1), ratio(1, 2), ratio(1, 4)]).unwrap();
        assert!(!p.satisfies(&family, &wrong, 0.0));
    }

    #[test]
    fn frequencies_must_lie_in_unit_interval_and_empty_gets_one() {
        let family = downward_closure(&[set(&[0])], 1).unwrap();
        assert!(FrequencyAssignment::new(&family, vec![ratio(1, 1), ratio(3, 2)]).is_err());
        assert!(FrequencyAssignment::new(&family, vec![ratio(1, 2), ratio(1, 2)]).is_err());
        assert!(FrequencyAssignment::new(&family, vec![ratio(1, 1), ratio(1, 2)]).is_ok());
    }

    #[test]
    fn exact_masses_must_sum_to_one() {
        let err = JointDistribution::exact_from_states(1, vec![(0, ratio(1, 2))]);
        assert!(err.is_err());
        let err = JointDistribution::exact_from_states(1, vec![(0, ratio(-1, 2)), (1, ratio(3, 2))]);
        assert!(err.is_err());
    }

    #[test]
    fn float_mass_vector_is_validated() {
        assert!(JointDistribution::float_from_dense(1, vec![0.5, 0.5]).is_ok());
        assert!(JointDistribution::float_from_dense(1, vec![0.6, 0.5]).is_err());
        assert!(JointDistribution::float_from_dense(1, vec![-0.1, 1.1]).is_err());
        assert!(JointDistribution::float_from_dense(1, vec![0.5]).is_err());
        assert!(matches!(
            JointDistribution::float_from_dense(30, vec![]),
            Err(Error::ResourceLimit { .. })
        ));
    }

    #[test]
    fn superstates_enumerates_exactly_the_superset_states() {
        let got: Vec<u64> = superstates(4, 0b0101).collect();
        assert_eq!(got, vec![0b0101, 0b0111, 0b1101, 0b1111]);
        let all: Vec<u64> = superstates(3, 0).collect();
        assert_eq!(all, (0..8).collect::<Vec<u64>>());
    }

    #[test]
    fn frequency_is_monotone_under_supersets() {
        let p = JointDistribution::exact_from_states(
            3,
            vec![(0b000, ratio(1, 4)), (0b011, ratio(1, 4)), (0b111, ratio(1, 2))],
        )
        .unwrap();
        let small = set(&[0]);
        let large = set(&[0, 2]);
        let f_small = p.frequency(small).unwrap().as_exact().unwrap().clone();
        let f_large = p.frequency(large).unwrap().as_exact().unwrap().clone();
        assert!(f_large <= f_small);
    }

    #[test]
    fn event_probabilities_sum_to_one_over_all_patterns() {
        let p = JointDistribution::exact_from_states(
            3,
            vec![(0b001, ratio(1, 3)), (0b010, ratio(1, 6)), (0b111, ratio(1, 2))],
        )
        .unwrap();
        let event = set(&[0, 2]);
        let mut total = BigRational::zero();
        for bits in 0..4u8 {
            let pattern = BinaryVector::new(vec![bits & 1 == 1, bits & 2 == 2]);
            total += p.event_probability(event, &pattern).unwrap().as_exact().unwrap();
        }
        assert!(total.is_one());
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        /// A distribution over `{0,1}^k` from integer weights, exact.
        pub(crate) fn weighted_distribution(k: usize, weights: &[u32]) -> JointDistribution {
            let total: u64 = weights.iter().map(|&w| w as u64).sum::<u64>().max(1);
            let states = weights.iter().enumerate().filter(|(_, w)| **w > 0).map(|(s, &w)| {
                (s as u64, BigRational::new(BigInt::from(w), BigInt::from(total)))
            });
            let states: Vec<(u64, BigRational)> = if weights.iter().all(|&w| w == 0) {
                vec![(0, BigRational::one())]
            } else {
                states.collect()
            };
            JointDistribution::exact_from_states(k, states).unwrap()
        }

        fn seeds_strategy() -> impl Strategy<Value = (usize, Vec<u64>)> {
            (1usize..=6).prop_flat_map(|k| {
                let mask = (1u64 << k) - 1;
                (Just(k), proptest::collection::vec((0..=mask).prop_map(move |m| m & mask), 1..4))
            })
        }

        proptest! {
            #[test]
            fn closures_are_antimonotonic_and_contain_their_seeds((k, masks) in seeds_strategy()) {
                let seeds: Vec<Itemset> = masks.iter().map(|&m| Itemset::from_bits(m)).collect();
                let family = downward_closure(&seeds, k).unwrap();
                prop_assert!(family.is_antimonotonic());
                for seed in seeds {
                    prop_assert!(family.contains(seed));
                }
            }

            #[test]
            fn pattern_probabilities_partition_the_mass(
                (k, masks) in seeds_strategy(),
                weights in proptest::collection::vec(0u32..100, 64),
            ) {
                let p = weighted_distribution(k, &weights[..1 << k]);
                let event = Itemset::from_bits(masks[0]);
                let mut total = BigRational::zero();
                for bits in 0..(1u32 << event.len()) {
                    let pattern = BinaryVector::new(
                        (0..event.len()).map(|j| bits >> j & 1 == 1).collect(),
                    );
                    total += p.event_probability(event, &pattern).unwrap().as_exact().unwrap();
                }
                prop_assert!(total.is_one());
            }

            #[test]
            fn frequencies_shrink_as_events_grow(
                (k, masks) in seeds_strategy(),
                weights in proptest::collection::vec(0u32..100, 64),
            ) {
                let p = weighted_distribution(k, &weights[..1 << k]);
                let small = Itemset::from_bits(masks[0]);
                let large = small.union(Itemset::from_bits(*masks.last().unwrap()));
                let f_small = p.frequency(small).unwrap().as_exact().unwrap().clone();
                let f_large = p.frequency(large).unwrap().as_exact().unwrap().clone();
                prop_assert!(f_large <= f_small);
            }
        }
    }
}
