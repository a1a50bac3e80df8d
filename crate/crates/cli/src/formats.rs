//! Instance and distribution files.
//!
//! Both formats are JSON documents. Exact rationals travel as strings
//! (`"3/5"`, `"1"`, or a plain decimal like `"0.6"`, which is expanded
//! literally) so no precision is lost in serialization. Attribute naming
//! lives entirely in this layer; the engine sees integer indices.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use entail_core::reduction::{InstanceGoal, ReductionInstance};
use entail_core::{
    DistributionMode, FrequencyAssignment, Itemset, ItemsetFamily, JointDistribution,
};

use crate::failure::Failure;

/// An entailment instance: named attributes, one frequency constraint per
/// itemset, and optionally a query itemset and threshold.
#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub attributes: Vec<String>,
    pub constraints: Vec<ConstraintEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub query: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threshold: Option<String>,
}

#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstraintEntry {
    pub items: Vec<String>,
    pub frequency: String,
}

/// An explicit distribution: binary state strings (character `j` is the
/// value of attribute `j`) and their masses.
#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistributionFile {
    pub mode: String,
    pub attributes: Vec<String>,
    pub states: Vec<StateMass>,
}

#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateMass {
    pub state: String,
    pub mass: String,
}

/// An instance file resolved against the engine's integer-indexed types.
pub struct LoadedInstance {
    pub family: ItemsetFamily,
    pub theta: FrequencyAssignment,
    pub attribute_names: Vec<String>,
    pub query: Option<Itemset>,
    pub threshold: Option<BigRational>,
    name_index: HashMap<String, usize>,
}

impl LoadedInstance {
    /// Resolves a comma-separated list of attribute names to an itemset.
    pub fn itemset_from_names(&self, names: &str) -> Result<Itemset, Failure> {
        let mut indices = Vec::new();
        for name in names.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            match self.name_index.get(name) {
                Some(&i) => indices.push(i),
                None => {
                    return Err(Failure::malformed(format!("unknown attribute {name:?}")));
                }
            }
        }
        Itemset::from_indices(indices).map_err(Failure::from)
    }

    /// Attribute indices of `member` resolved in the order the user listed
    /// them, for pattern alignment.
    pub fn ordered_indices(&self, names: &str) -> Result<Vec<usize>, Failure> {
        names
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|name| {
                self.name_index
                    .get(name)
                    .copied()
                    .ok_or_else(|| Failure::malformed(format!("unknown attribute {name:?}")))
            })
            .collect()
    }

    pub fn display_itemset(&self, itemset: Itemset) -> String {
        let names: Vec<&str> =
            itemset.members().map(|i| self.attribute_names[i].as_str()).collect();
        if names.is_empty() {
            "(empty)".to_string()
        } else {
            names.join(",")
        }
    }
}

/// Parses `"p/q"`, a bare integer, or a plain decimal into an exact
/// rational. Decimals expand literally (`0.6` becomes `3/5`).
pub fn parse_rational(text: &str) -> Result<BigRational, Failure> {
    let text = text.trim();
    let bad = || Failure::malformed(format!("invalid rational {text:?}"));
    if let Some((numerator, denominator)) = text.split_once('/') {
        let numerator: BigInt = numerator.trim().parse().map_err(|_| bad())?;
        let denominator: BigInt = denominator.trim().parse().map_err(|_| bad())?;
        if denominator.is_zero() {
            return Err(Failure::malformed(format!("zero denominator in {text:?}")));
        }
        return Ok(BigRational::new(numerator, denominator));
    }
    if let Some((integer, fraction)) = text.split_once('.') {
        let integer = if integer.is_empty() { "0" } else { integer };
        if fraction.is_empty() || !fraction.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let whole: BigInt = integer.parse().map_err(|_| bad())?;
        let digits: BigInt = fraction.parse().map_err(|_| bad())?;
        let scale = BigInt::from(10).pow(fraction.len() as u32);
        let numerator = whole * &scale + digits * whole_sign(text);
        return Ok(BigRational::new(numerator, scale));
    }
    let value: BigInt = text.parse().map_err(|_| bad())?;
    Ok(BigRational::from_integer(value))
}

fn whole_sign(text: &str) -> BigInt {
    if text.trim_start().starts_with('-') {
        BigInt::from(-1)
    } else {
        BigInt::one()
    }
}

/// Canonical lowest-terms string for an exact rational.
pub fn rational_string(value: &BigRational) -> String {
    value.to_string()
}

pub fn load_instance(path: &std::path::Path) -> Result<LoadedInstance, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::malformed(format!("cannot read {}: {e}", path.display())))?;
    let file: InstanceFile = serde_json::from_str(&text)?;
    resolve_instance(&file)
}

/// Resolves names, parses frequencies, and validates ranges. Family order
/// follows the file.
pub fn resolve_instance(file: &InstanceFile) -> Result<LoadedInstance, Failure> {
    let mut name_index = HashMap::new();
    for (i, name) in file.attributes.iter().enumerate() {
        if name.is_empty() || name.contains(',') || name.contains(char::is_whitespace) {
            return Err(Failure::malformed(format!("invalid attribute name {name:?}")));
        }
        if name_index.insert(name.clone(), i).is_some() {
            return Err(Failure::malformed(format!("duplicate attribute {name:?}")));
        }
    }
    let k = file.attributes.len();

    let mut items = Vec::with_capacity(file.constraints.len());
    let mut values = Vec::with_capacity(file.constraints.len());
    for entry in &file.constraints {
        let mut indices = Vec::with_capacity(entry.items.len());
        for name in &entry.items {
            match name_index.get(name) {
                Some(&i) => indices.push(i),
                None => {
                    return Err(Failure::malformed(format!("undeclared attribute {name:?}")));
                }
            }
        }
        items.push(Itemset::from_indices(indices)?);
        let frequency = parse_rational(&entry.frequency)?;
        if frequency.is_negative() || frequency > BigRational::one() {
            return Err(Failure::malformed(format!(
                "frequency {} lies outside [0, 1]",
                entry.frequency
            )));
        }
        values.push(frequency);
    }
    let family = ItemsetFamily::new(k, items)?;
    let theta = FrequencyAssignment::new(&family, values)?;

    let query = match &file.query {
        Some(names) => {
            let mut indices = Vec::new();
            for name in names {
                match name_index.get(name) {
                    Some(&i) => indices.push(i),
                    None => {
                        return Err(Failure::malformed(format!(
                            "undeclared query attribute {name:?}"
                        )));
                    }
                }
            }
            Some(Itemset::from_indices(indices)?)
        }
        None => None,
    };
    let threshold = file.threshold.as_deref().map(parse_rational).transpose()?;

    Ok(LoadedInstance {
        family,
        theta,
        attribute_names: file.attributes.clone(),
        query,
        threshold,
        name_index,
    })
}

/// Renders a loaded instance back into its file form.
pub fn instance_file(
    family: &ItemsetFamily,
    theta: &FrequencyAssignment,
    attribute_names: &[String],
    query: Option<Itemset>,
    threshold: Option<&BigRational>,
) -> InstanceFile {
    let constraints = family
        .items()
        .iter()
        .enumerate()
        .map(|(i, &member)| ConstraintEntry {
            items: member.members().map(|a| attribute_names[a].clone()).collect(),
            frequency: rational_string(theta.get(i)),
        })
        .collect();
    InstanceFile {
        attributes: attribute_names.to_vec(),
        constraints,
        query: query.map(|q| q.members().map(|a| attribute_names[a].clone()).collect()),
        threshold: threshold.map(rational_string),
    }
}

pub fn instance_from_reduction(instance: &ReductionInstance) -> InstanceFile {
    let (query, threshold) = match &instance.goal {
        InstanceGoal::MaxQuery { query, threshold } => (Some(*query), Some(threshold)),
        InstanceGoal::Consistency => (None, None),
    };
    instance_file(
        &instance.family,
        &instance.theta,
        &instance.attribute_names,
        query,
        threshold,
    )
}

/// Pretty JSON with a trailing newline; byte-stable for a fixed instance.
pub fn emit_instance(file: &InstanceFile) -> String {
    let mut out = serde_json::to_string_pretty(file).expect("instance files always serialize");
    out.push('\n');
    out
}

/// Renders a distribution with the given attribute names. Exact masses are
/// lowest-terms rational strings; floating masses are shortest decimals.
pub fn distribution_file(
    distribution: &JointDistribution,
    attribute_names: &[String],
) -> DistributionFile {
    let k = distribution.attribute_count();
    let state_string = |state: u64| -> String {
        (0..k).map(|j| if state >> j & 1 == 1 { '1' } else { '0' }).collect()
    };
    let states = match distribution.mode() {
        DistributionMode::Exact => distribution
            .exact_masses()
            .expect("mode checked")
            .iter()
            .map(|(&state, mass)| StateMass {
                state: state_string(state),
                mass: rational_string(mass),
            })
            .collect(),
        DistributionMode::Float => distribution
            .float_masses()
            .expect("mode checked")
            .iter()
            .enumerate()
            .filter(|(_, mass)| **mass != 0.0)
            .map(|(state, mass)| StateMass {
                state: state_string(state as u64),
                mass: format!("{mass:?}"),
            })
            .collect(),
    };
    DistributionFile {
        mode: match distribution.mode() {
            DistributionMode::Exact => "exact".into(),
            DistributionMode::Float => "float".into(),
        },
        attributes: attribute_names.to_vec(),
        states,
    }
}

pub fn emit_distribution(file: &DistributionFile) -> String {
    let mut out = serde_json::to_string_pretty(file).expect("distribution files always serialize");
    out.push('\n');
    out
}

/// Parses a distribution file back into an explicit distribution.
///
/// Exact masses must sum to exactly 1. Floating masses must sum to 1 within
/// 1e-9; they are then renormalized before the dense distribution is built.
pub fn resolve_distribution(file: &DistributionFile) -> Result<JointDistribution, Failure> {
    let k = file.attributes.len();
    let parse_state = |text: &str| -> Result<u64, Failure> {
        if text.len() != k {
            return Err(Failure::malformed(format!(
                "state {text:?} has length {}, expected {k}",
                text.len()
            )));
        }
        let mut state = 0u64;
        for (j, c) in text.chars().enumerate() {
            match c {
                '1' => state |= 1 << j,
                '0' => {}
                other => {
                    return Err(Failure::malformed(format!(
                        "invalid state character {other:?} in {text:?}"
                    )));
                }
            }
        }
        Ok(state)
    };

    match file.mode.as_str() {
        "exact" => {
            let mut states = Vec::with_capacity(file.states.len());
            for entry in &file.states {
                states.push((parse_state(&entry.state)?, parse_rational(&entry.mass)?));
            }
            Ok(JointDistribution::exact_from_states(k, states)?)
        }
        "float" => {
            let mut mass = vec![0.0f64; 1usize << k];
            for entry in &file.states {
                let state = parse_state(&entry.state)?;
                let value: f64 = entry
                    .mass
                    .trim()
                    .parse()
                    .map_err(|_| Failure::malformed(format!("invalid mass {:?}", entry.mass)))?;
                if !value.is_finite() || value < 0.0 {
                    return Err(Failure::malformed(format!("invalid mass {:?}", entry.mass)));
                }
                mass[state as usize] += value;
            }
            let total: f64 = mass.iter().sum();
            if (total - 1.0).abs() > 1e-9 {
                return Err(Failure::malformed(format!(
                    "floating masses sum to {total}, expected 1 within 1e-9"
                )));
            }
            for value in mass.iter_mut() {
                *value /= total;
            }
            Ok(JointDistribution::float_from_dense(k, mass)?)
        }
        other => Err(Failure::malformed(format!("unknown distribution mode {other:?}"))),
    }
}

/// Names every subset the input family is missing, for closure reports.
pub fn closure_report(instance: &LoadedInstance) -> Vec<String> {
    instance
        .family
        .missing_subsets()
        .into_iter()
        .map(|missing| instance.display_itemset(missing))
        .collect()
}
