//! Maximum-entropy frequency estimation.
//!
//! The entropy-maximizing distribution under the family constraints is the
//! I-projection of the uniform distribution, so iterative proportional
//! fitting from uniform converges to it: cycle over the constraints and
//! rescale each event to its target mass. This path is floating point; the
//! optimum is generically irrational, so no exactness is claimed.

use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

use crate::error::Error;
use crate::model::{
    superstates, FrequencyAssignment, Itemset, ItemsetFamily, JointDistribution, DENSE_K_LIMIT,
};
use crate::projection::{determined_zero_patterns, PATTERN_MEMBER_CAP};

/// IPF controls: residual tolerance, sweep budget, and the dense size cap.
#[derive(Clone, Copy, Debug)]
pub struct MaxEntOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub k_limit: usize,
}

impl Default for MaxEntOptions {
    fn default() -> MaxEntOptions {
        MaxEntOptions { tol: 1e-9, max_iter: 100_000, k_limit: DENSE_K_LIMIT }
    }
}

/// A fitted maximum-entropy distribution.
#[derive(Debug)]
pub struct MaxEntFit {
    /// The fitted distribution (floating mode, dense).
    pub distribution: JointDistribution,
    /// Number of full constraint sweeps performed.
    pub iterations: usize,
    /// Largest absolute constraint violation at exit.
    pub residual: f64,
    /// Whether `residual <= tol` was reached within the sweep budget.
    pub converged: bool,
}

impl MaxEntFit {
    /// The fitted frequency of a query itemset.
    pub fn frequency(&self, query: Itemset) -> Result<f64, Error> {
        Ok(self.distribution.frequency(query)?.to_f64())
    }
}

/// Three-way answer for threshold questions asked of a floating estimate.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum ThresholdDecision {
    /// The estimate clears the threshold by more than the tolerance.
    Exceeds,
    /// The estimate falls short of the threshold by more than the tolerance.
    Below,
    /// The estimate sits within the tolerance band, or the fit did not
    /// converge.
    Indeterminate,
}

impl ThresholdDecision {
    /// Classifies `estimate` against `threshold` with a `tol`-wide band.
    pub fn classify(
        estimate: f64,
        threshold: &BigRational,
        tol: f64,
        converged: bool,
    ) -> ThresholdDecision {
        if !converged {
            return ThresholdDecision::Indeterminate;
        }
        let threshold = threshold.to_f64().unwrap_or(f64::NAN);
        if estimate > threshold + tol {
            ThresholdDecision::Exceeds
        } else if estimate < threshold - tol {
            ThresholdDecision::Below
        } else {
            ThresholdDecision::Indeterminate
        }
    }
}

/// Shannon entropy in nats, with the `0·log 0 = 0` convention.
pub fn entropy(p: &JointDistribution) -> f64 {
    let term = |mass: f64| if mass > 0.0 { -mass * mass.ln() } else { 0.0 };
    match p.float_masses() {
        Some(masses) => masses.iter().copied().map(term).sum(),
        None => p
            .exact_masses()
            .expect("distributions are exact or float")
            .values()
            .map(|v| term(v.to_f64().unwrap_or(0.0)))
            .sum(),
    }
}

/// Fits the maximum-entropy distribution for the family frequencies by
/// iterative proportional fitting from the uniform distribution.
///
/// Constraints with a zero target are applied once up front by permanently
/// zeroing their event states; the remaining constraints are swept in
/// canonical order (size, then lexicographic). A sweep update skips any
/// constraint already matched to machine precision; the fit stops when the
/// largest constraint violation drops to `tol` or the sweep budget runs out,
/// reported in [`MaxEntFit::converged`] rather than as an error.
///
/// The frequencies are assumed consistent (pre-check with the exact engine
/// when in doubt); inconsistent inputs simply fail to converge.
pub fn fit_maxent(
    family: &ItemsetFamily,
    theta: &FrequencyAssignment,
    options: &MaxEntOptions,
) -> Result<MaxEntFit, Error> {
    let k = family.attribute_count();
    let limit = options.k_limit.min(DENSE_K_LIMIT);
    if k > limit {
        return Err(Error::ResourceLimit { needed: k, limit });
    }
    if theta.len() != family.len() {
        return Err(Error::MalformedInput(format!(
            "{} frequencies given for a family of {} itemsets",
            theta.len(),
            family.len()
        )));
    }
    if options.tol.is_nan() || options.tol <= 0.0 {
        return Err(Error::MalformedInput(format!("tolerance {} must be positive", options.tol)));
    }
    if options.max_iter == 0 {
        return Err(Error::MalformedInput("the sweep budget must be at least 1".into()));
    }

    // Sweep order: members by size then lexicographically, the normalization
    // member (∅) excluded, zero targets handled once by the presolve.
    let mut ordered: Vec<(Itemset, &BigRational)> =
        family.items().iter().enumerate().map(|(i, &member)| (member, theta.get(i))).collect();
    ordered.sort_by_key(|a| a.0);
    let mut constraints: Vec<(u64, f64)> = Vec::new();
    for (member, value) in ordered {
        if !member.is_empty() && !value.is_zero() {
            constraints.push((member.bits(), value.to_f64().expect("frequency is in [0,1]")));
        }
    }

    let size = 1usize << k;
    let mut mass = vec![1.0 / size as f64; size];
    presolve_zero_states(family, theta, k, &mut mass);
    // The all-zeros state contains no nonempty member, so some mass survives.
    let after_zeroing: f64 = mass.iter().sum();
    normalize(&mut mass, after_zeroing);

    let mut iterations = 0;
    let mut residual = f64::INFINITY;
    let mut converged = false;
    while iterations < options.max_iter {
        let mut scale = 1.0f64;
        for &(mask, target) in &constraints {
            let raw: f64 = superstates(k, mask).map(|s| mass[s as usize]).sum();
            let current = raw * scale;
            if (current - target).abs() <= f64::EPSILON {
                continue;
            }
            if current <= 0.0 {
                // A zeroed event cannot be rescaled upward; with consistent
                // frequencies this does not happen.
                continue;
            }
            if current >= 1.0 {
                let factor = target / current;
                for state in superstates(k, mask) {
                    mass[state as usize] *= factor;
                }
                continue;
            }
            // Rescale the event to `target` and the complement to
            // `1 - target`; the complement factor is deferred into `scale`
            // so only the event states are touched.
            let complement_factor = (1.0 - target) / (1.0 - current);
            let adjust = (target / current) / complement_factor;
            scale *= complement_factor;
            for state in superstates(k, mask) {
                mass[state as usize] *= adjust;
            }
        }
        iterations += 1;

        // Renormalizing the raw array by its own sum also folds away the
        // deferred complement scale.
        let raw_total: f64 = mass.iter().sum();
        normalize(&mut mass, raw_total);

        residual = 0.0;
        for (i, &member) in family.items().iter().enumerate() {
            let frequency: f64 = superstates(k, member.bits()).map(|s| mass[s as usize]).sum();
            let target = theta.get(i).to_f64().expect("frequency is in [0,1]");
            residual = residual.max((frequency - target).abs());
        }
        if residual <= options.tol {
            converged = true;
            break;
        }
    }

    let distribution = JointDistribution::float_from_dense(k, mass)?;
    Ok(MaxEntFit { distribution, iterations, residual, converged })
}

/// Fits the maximum-entropy distribution and asks whether the query estimate
/// exceeds `threshold`, with an indeterminate band of width `tol` around it.
pub fn decide_entr_query(
    family: &ItemsetFamily,
    theta: &FrequencyAssignment,
    query: Itemset,
    threshold: &BigRational,
    options: &MaxEntOptions,
) -> Result<ThresholdDecision, Error> {
    let fit = fit_maxent(family, theta, options)?;
    let estimate = fit.frequency(query)?;
    Ok(ThresholdDecision::classify(estimate, threshold, options.tol, fit.converged))
}

/// Zeroes every state that must carry no mass under any satisfying
/// distribution.
///
/// For an antimonotonic family, each member's pattern probabilities are
/// fixed linear combinations of the frequencies; a pattern whose determined
/// probability is zero therefore pins all matching states to zero. Applying
/// these zeros once keeps the fit away from the slow asymptotic approach to
/// the boundary (plain cyclic updates reach such states only at a `1/n`
/// rate). Families that are not downward closed, and members too large to
/// enumerate patterns for, fall back to zeroing only the events whose own
/// frequency is zero.
fn presolve_zero_states(
    family: &ItemsetFamily,
    theta: &FrequencyAssignment,
    k: usize,
    mass: &mut [f64],
) {
    if family.is_antimonotonic() {
        for (mask, ones) in determined_zero_patterns(family, theta, PATTERN_MEMBER_CAP) {
            for state in superstates(k, mask) {
                mass[(state ^ mask ^ ones) as usize] = 0.0;
            }
        }
    } else {
        for (i, &member) in family.items().iter().enumerate() {
            if !member.is_empty() && theta.get(i).is_zero() {
                for state in superstates(k, member.bits()) {
                    mass[state as usize] = 0.0;
                }
            }
        }
    }
}

fn normalize(mass: &mut [f64], total: f64) {
    if total > 0.0 {
        let inv = 1.0 / total;
        for value in mass.iter_mut() {
            *value *= inv;
        }
    }
}
