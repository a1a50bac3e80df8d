//! Independent verification machinery.
//!
//! Everything here exists to cross-check the exact engine: a brute-force
//! model counter, a floating-point LP solver that shares no code with the
//! exact simplex, and seeded generators for random test corpora. The float
//! solver deliberately uses a dense full tableau and largest-coefficient
//! pivoting so that a bug in the exact engine's pricing or basis handling
//! cannot be mirrored here.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};
use rand::Rng;

use crate::error::Error;
use crate::model::{
    downward_closure, superstates, FrequencyAssignment, Itemset, ItemsetFamily,
};
use crate::reduction::{CnfFormula, Literal};

/// Largest variable count accepted by [`count_satisfying`].
pub const SAT_VARIABLE_LIMIT: usize = 24;

/// Largest attribute count accepted by [`float_lp_bounds`] (dense columns).
pub const FLOAT_LP_K_LIMIT: usize = 12;

/// Counts satisfying assignments by full enumeration. No propagation, no
/// pruning; simplicity is the point of an oracle.
pub fn count_satisfying(formula: &CnfFormula) -> Result<u64, Error> {
    let l = formula.variable_count();
    if l > SAT_VARIABLE_LIMIT {
        return Err(Error::ResourceLimit { needed: l, limit: SAT_VARIABLE_LIMIT });
    }
    Ok((0..1u64 << l).filter(|&assignment| formula.satisfied(assignment)).count() as u64)
}

/// Floating-point bounds on the consistent frequencies of `query`.
#[derive(Clone, Copy, Debug)]
pub struct FloatBounds {
    pub lo: f64,
    pub hi: f64,
}

/// Solves the query-bounds LP in double precision with a dense tableau.
///
/// Returns [`Error::Inconsistent`] when no distribution satisfies the
/// frequencies (within the solver's tolerance).
pub fn float_lp_bounds(
    family: &ItemsetFamily,
    theta: &FrequencyAssignment,
    query: Itemset,
) -> Result<FloatBounds, Error> {
    let k = family.attribute_count();
    if k > FLOAT_LP_K_LIMIT {
        return Err(Error::ResourceLimit { needed: k, limit: FLOAT_LP_K_LIMIT });
    }
    if theta.len() != family.len() {
        return Err(Error::MalformedInput(format!(
            "{} frequencies given for a family of {} itemsets",
            theta.len(),
            family.len()
        )));
    }
    if k < 64 && query.bits() >> k != 0 {
        return Err(Error::MalformedInput(format!(
            "query {query} references attributes outside 0..{k}"
        )));
    }

    let n = 1usize << k;
    // One row per nonempty member plus normalization; the empty member's
    // constraint is the normalization row itself.
    let mut row_masks: Vec<u64> = Vec::new();
    let mut rhs: Vec<f64> = Vec::new();
    for (i, &member) in family.items().iter().enumerate() {
        if member.is_empty() {
            continue;
        }
        row_masks.push(member.bits());
        rhs.push(theta.get(i).to_f64().expect("frequencies are in [0,1]"));
    }
    row_masks.push(0);
    rhs.push(1.0);

    let mut tableau = Tableau::new(&row_masks, &rhs, n);
    if !tableau.phase_one()? {
        return Err(Error::Inconsistent);
    }

    let objective: Vec<f64> =
        (0..n).map(|s| if query.bits() & !(s as u64) == 0 { 1.0 } else { 0.0 }).collect();
    let mut max_side = tableau.clone();
    let negated: Vec<f64> = objective.iter().map(|c| -c).collect();
    let hi = -max_side.phase_two(&negated)?;
    let lo = tableau.phase_two(&objective)?;
    Ok(FloatBounds { lo, hi })
}

const PIVOT_EPS: f64 = 1e-9;
const FEASIBILITY_EPS: f64 = 1e-7;
const MAX_PIVOTS: usize = 200_000;

/// Classic dense two-phase simplex tableau: `m` rows over `n` structural
/// columns, `m` artificial columns, and the right-hand side.
#[derive(Clone)]
struct Tableau {
    rows: Vec<Vec<f64>>,
    basis: Vec<usize>,
    n: usize,
}

impl Tableau {
    fn new(row_masks: &[u64], rhs: &[f64], n: usize) -> Tableau {
        let m = row_masks.len();
        let mut rows = Vec::with_capacity(m);
        for (r, &mask) in row_masks.iter().enumerate() {
            let mut row = vec![0.0; n + m + 1];
            for (s, cell) in row.iter_mut().enumerate().take(n) {
                if mask & !(s as u64) == 0 {
                    *cell = 1.0;
                }
            }
            row[n + r] = 1.0;
            row[n + m] = rhs[r];
            rows.push(row);
        }
        Tableau { rows, basis: (0..m).map(|r| n + r).collect(), n }
    }

    fn m(&self) -> usize {
        self.rows.len()
    }

    fn rhs_column(&self) -> usize {
        self.n + self.m()
    }

    /// Reduced-cost row for the given full cost vector (zeros beyond its
    /// length).
    fn reduced_costs(&self, costs: &[f64]) -> Vec<f64> {
        let width = self.rhs_column();
        let mut z: Vec<f64> = (0..width).map(|j| costs.get(j).copied().unwrap_or(0.0)).collect();
        for (r, row) in self.rows.iter().enumerate() {
            let cb = costs.get(self.basis[r]).copied().unwrap_or(0.0);
            if cb != 0.0 {
                for j in 0..width {
                    z[j] -= cb * row[j];
                }
            }
        }
        z
    }

    /// Runs simplex on `costs` (minimization), restricted to columns where
    /// `allowed` holds. Returns the optimal objective value.
    fn minimize(&mut self, costs: &[f64], allowed: impl Fn(usize) -> bool) -> Result<f64, Error> {
        let width = self.rhs_column();
        let mut z = self.reduced_costs(costs);
        for _ in 0..MAX_PIVOTS {
            // Largest-coefficient rule: most negative reduced cost enters.
            let mut entering = None;
            let mut best = -PIVOT_EPS;
            for (j, &zj) in z.iter().enumerate().take(width) {
                if zj < best && allowed(j) {
                    best = zj;
                    entering = Some(j);
                }
            }
            let entering = match entering {
                Some(j) => j,
                None => {
                    let objective = self
                        .rows
                        .iter()
                        .enumerate()
                        .map(|(r, row)| {
                            costs.get(self.basis[r]).copied().unwrap_or(0.0) * row[self.rhs_column()]
                        })
                        .sum();
                    return Ok(objective);
                }
            };
            let leaving = self.ratio_test(entering).ok_or_else(|| {
                Error::Internal("float LP objective is unbounded".into())
            })?;
            self.pivot(leaving, entering, Some(&mut z));
        }
        Err(Error::Internal("float LP pivot limit exceeded".into()))
    }

    fn ratio_test(&self, entering: usize) -> Option<usize> {
        let rhs_col = self.rhs_column();
        let mut best: Option<(f64, usize)> = None;
        for (r, row) in self.rows.iter().enumerate() {
            let coefficient = row[entering];
            if coefficient > PIVOT_EPS {
                let ratio = row[rhs_col] / coefficient;
                if best.is_none_or(|(b, _)| ratio < b - PIVOT_EPS) {
                    best = Some((ratio, r));
                }
            }
        }
        best.map(|(_, r)| r)
    }

    fn pivot(&mut self, leaving: usize, entering: usize, z: Option<&mut Vec<f64>>) {
        let width = self.rhs_column() + 1;
        let scale = self.rows[leaving][entering];
        for j in 0..width {
            self.rows[leaving][j] /= scale;
        }
        for r in 0..self.m() {
            if r != leaving {
                let factor = self.rows[r][entering];
                if factor != 0.0 {
                    for j in 0..width {
                        self.rows[r][j] -= factor * self.rows[leaving][j];
                    }
                }
            }
        }
        if let Some(z) = z {
            let factor = z[entering];
            if factor != 0.0 {
                for (j, zj) in z.iter_mut().enumerate().take(width - 1) {
                    *zj -= factor * self.rows[leaving][j];
                }
            }
        }
        self.basis[leaving] = entering;
    }

    /// Minimizes the sum of artificial variables. Returns false when the
    /// constraints are infeasible; otherwise drives artificials out of the
    /// basis so phase two can ignore them.
    fn phase_one(&mut self) -> Result<bool, Error> {
        let n = self.n;
        let m = self.m();
        let mut costs = vec![0.0; n + m];
        for c in costs.iter_mut().skip(n) {
            *c = 1.0;
        }
        let infeasibility = self.minimize(&costs, |_| true)?;
        if infeasibility > FEASIBILITY_EPS {
            return Ok(false);
        }
        for r in 0..m {
            if self.basis[r] >= n {
                let entering = (0..n)
                    .find(|&j| self.rows[r][j].abs() > FEASIBILITY_EPS)
                    .ok_or_else(|| {
                        Error::Internal("dependent constraint row in float LP".into())
                    })?;
                self.pivot(r, entering, None);
            }
        }
        Ok(true)
    }

    /// Minimizes a structural cost vector from the feasible basis left by
    /// phase one. Artificial columns are barred from re-entering.
    fn phase_two(&mut self, costs: &[f64]) -> Result<f64, Error> {
        let n = self.n;
        self.minimize(costs, |j| j < n)
    }
}

/// Draws a random formula with `1..=max_variables` variables and
/// `1..=max_clauses` clauses of one to three distinct variables each.
pub fn random_cnf<R: Rng>(rng: &mut R, max_variables: usize, max_clauses: usize) -> CnfFormula {
    let l = rng.gen_range(1..=max_variables);
    let m = rng.gen_range(1..=max_clauses);
    let clauses = (0..m)
        .map(|_| {
            let width = rng.gen_range(1..=3.min(l));
            let mut variables: Vec<usize> = (0..l).collect();
            for i in 0..width {
                let pick = rng.gen_range(i..l);
                variables.swap(i, pick);
            }
            variables[..width]
                .iter()
                .map(|&v| Literal { variable: v, positive: rng.gen_bool(0.5) })
                .collect()
        })
        .collect();
    CnfFormula::new(l, clauses).expect("generated clauses are valid by construction")
}

/// Draws a consistent instance: a random downward-closed family over
/// `1..=max_attributes` attributes together with the exact frequencies of a
/// random integer-weighted distribution, plus a random query itemset.
///
/// Consistency holds by construction, with exact rational frequencies.
pub fn random_consistent_instance<R: Rng>(
    rng: &mut R,
    max_attributes: usize,
    max_seeds: usize,
    max_seed_size: usize,
) -> (ItemsetFamily, FrequencyAssignment, Itemset) {
    let k = rng.gen_range(1..=max_attributes);
    let seed_count = rng.gen_range(1..=max_seeds);
    let seeds: Vec<Itemset> =
        (0..seed_count).map(|_| random_itemset(rng, k, max_seed_size)).collect();
    let family = downward_closure(&seeds, k).expect("seeds lie within the attribute range");

    let weights: Vec<u64> = (0..1u64 << k).map(|_| rng.gen_range(0..=16)).collect();
    let total: u64 = weights.iter().sum::<u64>().max(1);
    let values = family
        .items()
        .iter()
        .map(|&member| {
            let mass: u64 = superstates(k, member.bits()).map(|s| weights[s as usize]).sum();
            let mass = if member.is_empty() { total } else { mass };
            BigRational::new(BigInt::from(mass), BigInt::from(total))
        })
        .collect();
    let theta = FrequencyAssignment::new(&family, values).expect("weighted frequencies are valid");
    let query = random_itemset(rng, k, max_seed_size + 1);
    (family, theta, query)
}

/// Draws an instance whose family is the closure of all `k` singletons, with
/// uniformly random rational frequencies. Singleton frequencies are always
/// consistent (the product distribution satisfies them).
pub fn random_singleton_instance<R: Rng>(
    rng: &mut R,
    max_attributes: usize,
) -> (ItemsetFamily, FrequencyAssignment) {
    let k = rng.gen_range(1..=max_attributes);
    let seeds: Vec<Itemset> = (0..k)
        .map(|i| Itemset::from_indices([i]).expect("singleton index is in range"))
        .collect();
    let family = downward_closure(&seeds, k).expect("singletons lie within the attribute range");
    let values = family
        .items()
        .iter()
        .map(|&member| {
            if member.is_empty() {
                BigRational::one()
            } else {
                let denominator = rng.gen_range(1..=64u64);
                let numerator = rng.gen_range(0..=denominator);
                BigRational::new(BigInt::from(numerator), BigInt::from(denominator))
            }
        })
        .collect();
    let theta = FrequencyAssignment::new(&family, values).expect("random frequencies are in range");
    (family, theta)
}

fn random_itemset<R: Rng>(rng: &mut R, k: usize, max_size: usize) -> Itemset {
    let size = rng.gen_range(0..=max_size.min(k));
    let mut attributes: Vec<usize> = (0..k).collect();
    for i in 0..size {
        let pick = rng.gen_range(i..k);
        attributes.swap(i, pick);
    }
    Itemset::from_indices(attributes[..size].iter().copied()).expect("indices are below k")
}
