//! Exact linear programming over the distribution polytope.
//!
//! The feasible region is the set of distributions on `{0,1}^K` matching the
//! family frequencies: one equality row per nonempty member plus a
//! normalization row, over `2^K` implicit columns. Columns are never
//! materialized; pricing scans the states in ascending order and derives each
//! column's entries from subset tests against the member bitmasks. A revised
//! simplex with an explicit rational basis inverse and Bland's rule does the
//! rest: phase one decides consistency, phase two maximizes or minimizes the
//! query frequency. States whose mass is forced to zero by a determined-zero
//! member pattern are removed from the column universe before solving, which
//! leaves the polytope unchanged and keeps degenerate pivoting off the dead
//! columns. All arithmetic is exact; every reported endpoint is attained by
//! an explicit sparse rational witness with at most `N + 1` states of
//! support.

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::Error;
use crate::model::{superstates, FrequencyAssignment, Itemset, ItemsetFamily, JointDistribution};
use crate::projection::{determined_zero_patterns, PATTERN_MEMBER_CAP};

/// Solver size limits.
///
/// Pricing walks all `2^K` states per pivot, so the default cap is modest;
/// it can be raised to [`LpConfig::MAX_K_LIMIT`] when the wait is acceptable.
#[derive(Clone, Copy, Debug)]
pub struct LpConfig {
    pub k_limit: usize,
}

impl LpConfig {
    pub const DEFAULT_K_LIMIT: usize = 16;
    pub const MAX_K_LIMIT: usize = 24;

    pub fn with_k_limit(k_limit: usize) -> Result<LpConfig, Error> {
        if k_limit > Self::MAX_K_LIMIT {
            return Err(Error::ResourceLimit { needed: k_limit, limit: Self::MAX_K_LIMIT });
        }
        Ok(LpConfig { k_limit })
    }
}

impl Default for LpConfig {
    fn default() -> LpConfig {
        LpConfig { k_limit: Self::DEFAULT_K_LIMIT }
    }
}

/// Outcome of a consistency check.
#[derive(Debug)]
pub struct Consistency {
    pub consistent: bool,
    /// A satisfying distribution with at most `N + 1` nonzero states, when
    /// one exists.
    pub witness: Option<JointDistribution>,
}

/// The tight interval of consistent query frequencies, with witnesses
/// attaining both ends exactly.
#[derive(Debug)]
pub struct QueryInterval {
    pub lo: BigRational,
    pub hi: BigRational,
    pub lo_witness: JointDistribution,
    pub hi_witness: JointDistribution,
}

/// Result of checking a certificate distribution.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum WitnessCheck {
    Valid,
    /// Masses are negative or do not sum to 1.
    NotADistribution,
    /// Some family frequency is not reproduced exactly.
    ViolatesTheta,
    /// The query frequency does not exceed the threshold.
    BelowThreshold,
}

impl WitnessCheck {
    pub fn is_valid(self) -> bool {
        self == WitnessCheck::Valid
    }
}

/// Decides whether any distribution satisfies the frequencies.
pub fn check_consistent(
    family: &ItemsetFamily,
    theta: &FrequencyAssignment,
    config: &LpConfig,
) -> Result<Consistency, Error> {
    validate_inputs(family, theta, None, config)?;
    let mut simplex = Simplex::new(family, theta);
    if simplex.feasibility()? {
        Ok(Consistency { consistent: true, witness: Some(simplex.basic_distribution()?) })
    } else {
        Ok(Consistency { consistent: false, witness: None })
    }
}

/// Computes the exact interval of consistent frequencies for `query`,
/// together with distributions attaining both endpoints.
pub fn query_bounds(
    family: &ItemsetFamily,
    theta: &FrequencyAssignment,
    query: Itemset,
    config: &LpConfig,
) -> Result<QueryInterval, Error> {
    validate_inputs(family, theta, Some(query), config)?;
    let mut simplex = Simplex::new(family, theta);
    if !simplex.feasibility()? {
        return Err(Error::Inconsistent);
    }
    simplex.drive_out_artificials();

    let mut max_side = simplex.clone();
    let hi = max_side.optimize(Objective { query: query.bits(), negate: false }, None)?;
    let hi_witness = max_side.basic_distribution()?;

    let negated_lo = simplex.optimize(Objective { query: query.bits(), negate: true }, None)?;
    let lo = -negated_lo;
    let lo_witness = simplex.basic_distribution()?;

    debug_assert!(lo <= hi);
    debug_assert!(!lo.is_negative() && hi <= BigRational::one());
    Ok(QueryInterval { lo, hi, lo_witness, hi_witness })
}

/// Decides whether some satisfying distribution gives `query` a frequency
/// strictly larger than `threshold`.
///
/// Equivalent to `query_bounds(..).hi > threshold`, but the maximization
/// stops as soon as the running objective clears the threshold.
pub fn decide_max_query(
    family: &ItemsetFamily,
    theta: &FrequencyAssignment,
    query: Itemset,
    threshold: &BigRational,
    config: &LpConfig,
) -> Result<bool, Error> {
    validate_inputs(family, theta, Some(query), config)?;
    let mut simplex = Simplex::new(family, theta);
    if !simplex.feasibility()? {
        return Err(Error::Inconsistent);
    }
    simplex.drive_out_artificials();
    let best =
        simplex.optimize(Objective { query: query.bits(), negate: false }, Some(threshold))?;
    Ok(best > *threshold)
}

/// Checks a certificate: `witness` must be a genuine distribution, reproduce
/// every family frequency exactly, and give `query` a frequency strictly
/// above `threshold`.
///
/// The nonnegativity and total-mass checks are repeated here rather than
/// trusted from the type so the certificate check stands on its own.
pub fn verify_witness(
    witness: &JointDistribution,
    family: &ItemsetFamily,
    theta: &FrequencyAssignment,
    query: Itemset,
    threshold: &BigRational,
) -> Result<WitnessCheck, Error> {
    let masses = witness.exact_masses()?;
    if witness.attribute_count() != family.attribute_count() {
        return Err(Error::MalformedInput(format!(
            "witness has {} attributes, family has {}",
            witness.attribute_count(),
            family.attribute_count()
        )));
    }
    if theta.len() != family.len() {
        return Err(Error::MalformedInput(format!(
            "{} frequencies given for a family of {} itemsets",
            theta.len(),
            family.len()
        )));
    }

    let mut total = BigRational::zero();
    for value in masses.values() {
        if value.is_negative() {
            return Ok(WitnessCheck::NotADistribution);
        }
        total += value;
    }
    if !total.is_one() {
        return Ok(WitnessCheck::NotADistribution);
    }

    for (i, &member) in family.items().iter().enumerate() {
        let mask = member.bits();
        let mut frequency = BigRational::zero();
        for (state, value) in masses {
            if mask & !state == 0 {
                frequency += value;
            }
        }
        if frequency != *theta.get(i) {
            return Ok(WitnessCheck::ViolatesTheta);
        }
    }

    let mut query_frequency = BigRational::zero();
    for (state, value) in masses {
        if query.bits() & !state == 0 {
            query_frequency += value;
        }
    }
    if query_frequency <= *threshold {
        return Ok(WitnessCheck::BelowThreshold);
    }
    Ok(WitnessCheck::Valid)
}

fn validate_inputs(
    family: &ItemsetFamily,
    theta: &FrequencyAssignment,
    query: Option<Itemset>,
    config: &LpConfig,
) -> Result<(), Error> {
    let k = family.attribute_count();
    let limit = config.k_limit.min(LpConfig::MAX_K_LIMIT);
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
    if let Some((member, missing)) = family.first_closure_violation() {
        return Err(Error::NotAntimonotonic { member, missing });
    }
    if let Some(query) = query {
        if k < 64 && query.bits() >> k != 0 {
            return Err(Error::MalformedInput(format!(
                "query {query} references attributes outside 0..{k}"
            )));
        }
    }
    Ok(())
}

/// Builds the bitmap of states not forced to zero mass by the frequencies.
///
/// For an antimonotonic family each member pattern's probability is a fixed
/// linear combination of the frequencies; states matching a pattern whose
/// determined probability is zero carry no mass in any satisfying
/// distribution, so the solver removes them from the column universe.
fn allowed_state_bitmap(family: &ItemsetFamily, theta: &FrequencyAssignment) -> Vec<u64> {
    let k = family.attribute_count();
    let state_count = 1u64 << k;
    let words = state_count.div_ceil(64) as usize;
    let mut bitmap = vec![u64::MAX; words];
    let excess = words as u64 * 64 - state_count;
    if excess > 0 {
        bitmap[words - 1] >>= excess;
    }
    for (mask, ones) in determined_zero_patterns(family, theta, PATTERN_MEMBER_CAP) {
        for superstate in superstates(k, mask) {
            let state = superstate ^ mask ^ ones;
            bitmap[(state >> 6) as usize] &= !(1u64 << (state & 63));
        }
    }
    bitmap
}

/// Which basis slot a row is currently owned by.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum BasisVar {
    /// A structural column: one state of the sample space.
    State(u64),
    /// The artificial column introduced for this row.
    Artificial(usize),
}

/// Phase-two objective: maximize (or, negated, minimize) the query mass.
#[derive(Clone, Copy)]
struct Objective {
    query: u64,
    negate: bool,
}

impl Objective {
    fn state_cost(&self, state: u64) -> i8 {
        if self.query & !state == 0 {
            if self.negate {
                -1
            } else {
                1
            }
        } else {
            0
        }
    }
}

/// Revised simplex state over the implicit column set.
#[derive(Clone)]
struct Simplex {
    attribute_count: usize,
    state_count: u64,
    /// Bitmasks of the nonempty family members, one constraint row each; the
    /// normalization row is the final, implicit row.
    member_masks: Vec<u64>,
    /// Row count: `member_masks.len() + 1`.
    m: usize,
    /// Bitmap over the states still in play. States whose mass is forced to
    /// zero by a determined-zero member pattern are removed up front; this
    /// leaves the polytope unchanged but keeps pricing off the dead columns.
    allowed: Vec<u64>,
    basis: Vec<BasisVar>,
    /// Explicit basis inverse, row-major `m × m`.
    binv: Vec<Vec<BigRational>>,
    /// Current basic variable values (always nonnegative).
    values: Vec<BigRational>,
}

impl Simplex {
    fn new(family: &ItemsetFamily, theta: &FrequencyAssignment) -> Simplex {
        let attribute_count = family.attribute_count();
        let mut member_masks = Vec::new();
        let mut rhs = Vec::new();
        for (i, &member) in family.items().iter().enumerate() {
            if member.is_empty() {
                // θ_∅ duplicates the normalization row; its value is pinned
                // to 1 at construction of the frequency assignment.
                continue;
            }
            member_masks.push(member.bits());
            rhs.push(theta.get(i).clone());
        }
        rhs.push(BigRational::one());
        let m = rhs.len();
        let mut binv = vec![vec![BigRational::zero(); m]; m];
        for (r, row) in binv.iter_mut().enumerate() {
            row[r] = BigRational::one();
        }
        Simplex {
            attribute_count,
            state_count: 1u64 << attribute_count,
            member_masks,
            m,
            allowed: allowed_state_bitmap(family, theta),
            basis: (0..m).map(BasisVar::Artificial).collect(),
            binv,
            values: rhs,
        }
    }

    /// Ascending iterator over the states still in play.
    fn allowed_states<'a>(&'a self) -> impl Iterator<Item = u64> + 'a {
        self.allowed.iter().enumerate().flat_map(|(w, &word)| {
            let base = w as u64 * 64;
            let mut bits = word;
            std::iter::from_fn(move || {
                if bits == 0 {
                    return None;
                }
                let state = base + bits.trailing_zeros() as u64;
                bits &= bits - 1;
                Some(state)
            })
        })
    }

    /// Rows where state `s` has coefficient 1: every member contained in the
    /// state, plus the normalization row.
    fn column_rows<'a>(&'a self, state: u64) -> impl Iterator<Item = usize> + 'a {
        self.member_masks
            .iter()
            .enumerate()
            .filter(move |(_, &mask)| mask & !state == 0)
            .map(|(i, _)| i)
            .chain(std::iter::once(self.m - 1))
    }

    /// The tableau column `B^{-1} a_s`.
    fn tableau_column(&self, state: u64) -> Vec<BigRational> {
        let mut column = vec![BigRational::zero(); self.m];
        for i in self.column_rows(state) {
            for (r, entry) in column.iter_mut().enumerate() {
                *entry += &self.binv[r][i];
            }
        }
        column
    }

    /// Runs phase one: maximizes minus the artificial mass, stopping early
    /// once it reaches zero. Returns whether the constraints are feasible.
    fn feasibility(&mut self) -> Result<bool, Error> {
        loop {
            let infeasibility: BigRational = self
                .basis
                .iter()
                .zip(&self.values)
                .filter(|(var, _)| matches!(var, BasisVar::Artificial(_)))
                .map(|(_, value)| value)
                .sum();
            if infeasibility.is_zero() {
                return Ok(true);
            }

            // y = c_B B^{-1} with cost −1 on artificial basis rows.
            let mut y = vec![BigRational::zero(); self.m];
            for (i, var) in self.basis.iter().enumerate() {
                if matches!(var, BasisVar::Artificial(_)) {
                    for (r, entry) in y.iter_mut().enumerate() {
                        *entry -= &self.binv[i][r];
                    }
                }
            }

            match self.find_entering(&y, None) {
                Some(state) => self.pivot_in(state)?,
                None => return Ok(false),
            }
        }
    }

    /// Phase two: maximizes the objective from a feasible all-structural
    /// basis. With `stop_above`, returns as soon as the running objective
    /// exceeds it (the returned value is then a lower bound on the optimum).
    fn optimize(
        &mut self,
        objective: Objective,
        stop_above: Option<&BigRational>,
    ) -> Result<BigRational, Error> {
        loop {
            let mut current = BigRational::zero();
            for (i, var) in self.basis.iter().enumerate() {
                if let BasisVar::State(state) = var {
                    match objective.state_cost(*state) {
                        1 => current += &self.values[i],
                        -1 => current -= &self.values[i],
                        _ => {}
                    }
                }
            }
            if let Some(threshold) = stop_above {
                if current > *threshold {
                    return Ok(current);
                }
            }

            let mut y = vec![BigRational::zero(); self.m];
            for (i, var) in self.basis.iter().enumerate() {
                if let BasisVar::State(state) = var {
                    match objective.state_cost(*state) {
                        1 => {
                            for (r, entry) in y.iter_mut().enumerate() {
                                *entry += &self.binv[i][r];
                            }
                        }
                        -1 => {
                            for (r, entry) in y.iter_mut().enumerate() {
                                *entry -= &self.binv[i][r];
                            }
                        }
                        _ => {}
                    }
                }
            }

            match self.find_entering(&y, Some(&objective)) {
                Some(state) => self.pivot_in(state)?,
                None => return Ok(current),
            }
        }
    }

    /// Bland's entering rule: the lowest in-play state whose reduced cost is
    /// positive, i.e. whose priced column sum falls below its cost.
    fn find_entering(&self, y: &[BigRational], objective: Option<&Objective>) -> Option<u64> {
        let one = BigRational::one();
        let minus_one = -BigRational::one();
        let y_norm = &y[self.m - 1];
        let priced: Vec<(u64, &BigRational)> = self
            .member_masks
            .iter()
            .enumerate()
            .filter(|(i, _)| !y[*i].is_zero())
            .map(|(i, &mask)| (mask, &y[i]))
            .collect();

        for state in self.allowed_states() {
            let mut sum = y_norm.clone();
            for (mask, weight) in &priced {
                if mask & !state == 0 {
                    sum += *weight;
                }
            }
            let cost = objective.map_or(0, |objective| objective.state_cost(state));
            let eligible = match cost {
                0 => sum.is_negative(),
                1 => sum < one,
                -1 => sum < minus_one,
                _ => unreachable!(),
            };
            if eligible {
                return Some(state);
            }
        }
        None
    }

    /// Computes the entering column, picks the leaving row by the minimum
    /// ratio with Bland's tie-break, and updates the basis inverse.
    fn pivot_in(&mut self, state: u64) -> Result<(), Error> {
        let column = self.tableau_column(state);
        let mut leaving: Option<(BigRational, usize)> = None;
        for (r, coefficient) in column.iter().enumerate() {
            if coefficient.is_positive() {
                let ratio = &self.values[r] / coefficient;
                let better = match &leaving {
                    None => true,
                    Some((best, row)) => {
                        ratio < *best
                            || (ratio == *best
                                && self.variable_index(self.basis[r])
                                    < self.variable_index(self.basis[*row]))
                    }
                };
                if better {
                    leaving = Some((ratio, r));
                }
            }
        }
        let (_, row) = leaving.ok_or_else(|| {
            Error::Internal("unbounded direction in a bounded polytope".into())
        })?;
        self.apply_pivot(row, BasisVar::State(state), &column);
        Ok(())
    }

    fn apply_pivot(&mut self, row: usize, entering: BasisVar, column: &[BigRational]) {
        let pivot = column[row].clone();
        for entry in self.binv[row].iter_mut() {
            *entry /= &pivot;
        }
        self.values[row] /= &pivot;
        for (r, coefficient) in column.iter().enumerate() {
            if r == row || coefficient.is_zero() {
                continue;
            }
            let factor = coefficient.clone();
            for c in 0..self.m {
                let delta = &factor * &self.binv[row][c];
                self.binv[r][c] -= delta;
            }
            let delta = &factor * &self.values[row];
            self.values[r] -= delta;
        }
        self.basis[row] = entering;
    }

    /// Total order used by Bland's leaving tie-break: states first by value,
    /// artificials after all states.
    fn variable_index(&self, var: BasisVar) -> u64 {
        match var {
            BasisVar::State(state) => state,
            BasisVar::Artificial(row) => self.state_count + row as u64,
        }
    }

    /// Replaces artificials still in the feasible basis (necessarily at
    /// value zero) with structural columns, by degenerate pivots.
    ///
    /// A row whose tableau entries vanish on every in-play state is
    /// redundant over the restricted column set; its artificial stays basic
    /// at zero and is inert from then on (no pivot can change its value), so
    /// it is simply left in place.
    fn drive_out_artificials(&mut self) {
        for row in 0..self.m {
            if !matches!(self.basis[row], BasisVar::Artificial(_)) {
                continue;
            }
            debug_assert!(self.values[row].is_zero());
            let entering = self.allowed_states().find(|&state| {
                let mut entry = BigRational::zero();
                for i in self.column_rows(state) {
                    entry += &self.binv[row][i];
                }
                !entry.is_zero()
            });
            if let Some(state) = entering {
                let column = self.tableau_column(state);
                self.apply_pivot(row, BasisVar::State(state), &column);
            }
        }
    }

    /// The current basic solution as a sparse exact distribution. Inert
    /// artificials sit at value zero and contribute nothing.
    fn basic_distribution(&self) -> Result<JointDistribution, Error> {
        let states = self.basis.iter().zip(&self.values).filter_map(|(var, value)| match var {
            BasisVar::State(state) if !value.is_zero() => Some((*state, value.clone())),
            _ => None,
        });
        JointDistribution::exact_from_states(self.attribute_count, states)
            .map_err(|e| Error::Internal(format!("basic solution is not a distribution: {e}")))
    }
}
