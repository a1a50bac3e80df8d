//! Instance generators that encode CNF satisfiability as frequency
//! entailment.
//!
//! Both generators start from the same construction: one attribute per
//! variable, one per clause, and a reference distribution under which the
//! variable attributes are uniform and each clause attribute equals the truth
//! value of its clause. The max-query generator asks whether the conjunction
//! of all clause attributes can have positive frequency; the consistency
//! generator instead adds a tag attribute `c0` whose constraints are
//! satisfiable exactly when the formula is.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;

use crate::error::Error;
use crate::model::{
    downward_closure, FrequencyAssignment, Itemset, ItemsetFamily, JointDistribution,
    MAX_ATTRIBUTES,
};

/// A signed propositional literal.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct Literal {
    pub variable: usize,
    pub positive: bool,
}

impl Literal {
    pub fn positive(variable: usize) -> Literal {
        Literal { variable, positive: true }
    }

    pub fn negative(variable: usize) -> Literal {
        Literal { variable, positive: false }
    }
}

/// A CNF formula with clauses of one to three literals.
#[derive(Clone, Debug)]
pub struct CnfFormula {
    variable_count: usize,
    clauses: Vec<Vec<Literal>>,
}

impl CnfFormula {
    pub fn new(variable_count: usize, clauses: Vec<Vec<Literal>>) -> Result<CnfFormula, Error> {
        for (i, clause) in clauses.iter().enumerate() {
            if clause.is_empty() {
                return Err(Error::MalformedInput(format!("clause {} is empty", i + 1)));
            }
            if clause.len() > 3 {
                return Err(Error::MalformedInput(format!(
                    "clause {} has {} literals, at most 3 are allowed",
                    i + 1,
                    clause.len()
                )));
            }
            for (j, lit) in clause.iter().enumerate() {
                if lit.variable >= variable_count {
                    return Err(Error::MalformedInput(format!(
                        "clause {} references variable {} of {}",
                        i + 1,
                        lit.variable + 1,
                        variable_count
                    )));
                }
                if clause[..j].contains(lit) {
                    return Err(Error::MalformedInput(format!(
                        "clause {} repeats a literal",
                        i + 1
                    )));
                }
            }
        }
        Ok(CnfFormula { variable_count, clauses })
    }

    pub fn variable_count(&self) -> usize {
        self.variable_count
    }

    pub fn clause_count(&self) -> usize {
        self.clauses.len()
    }

    pub fn clauses(&self) -> &[Vec<Literal>] {
        &self.clauses
    }

    /// True iff `assignment` (bit `v` = variable `v`) satisfies clause `i`.
    pub fn clause_satisfied(&self, i: usize, assignment: u64) -> bool {
        self.clauses[i]
            .iter()
            .any(|lit| (assignment >> lit.variable & 1 == 1) == lit.positive)
    }

    /// True iff `assignment` satisfies every clause.
    pub fn satisfied(&self, assignment: u64) -> bool {
        (0..self.clauses.len()).all(|i| self.clause_satisfied(i, assignment))
    }

    /// The distinct variables of clause `i`, as an itemset over variables.
    fn clause_variables(&self, i: usize) -> Itemset {
        Itemset::from_indices(self.clauses[i].iter().map(|lit| lit.variable))
            .expect("variable indices were validated at construction")
    }
}

/// Parses the DIMACS CNF subset: optional `c` comment lines, a `p cnf L M`
/// header, then clause tokens (signed variable numbers) terminated by `0`.
pub fn parse_dimacs(input: &str) -> Result<CnfFormula, Error> {
    let mut variable_count = None;
    let mut declared_clauses = 0usize;
    let mut clauses: Vec<Vec<Literal>> = Vec::new();
    let mut current: Vec<Literal> = Vec::new();

    for line in input.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('c') {
            continue;
        }
        if line.starts_with('p') {
            if variable_count.is_some() {
                return Err(Error::MalformedInput("duplicate DIMACS header".into()));
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 4 || fields[1] != "cnf" {
                return Err(Error::MalformedInput(format!("invalid DIMACS header {line:?}")));
            }
            let l = fields[2]
                .parse::<usize>()
                .map_err(|_| Error::MalformedInput(format!("invalid variable count {:?}", fields[2])))?;
            let m = fields[3]
                .parse::<usize>()
                .map_err(|_| Error::MalformedInput(format!("invalid clause count {:?}", fields[3])))?;
            variable_count = Some(l);
            declared_clauses = m;
            continue;
        }
        let l = match variable_count {
            Some(l) => l,
            None => {
                return Err(Error::MalformedInput(
                    "clause data before the `p cnf` header".into(),
                ))
            }
        };
        for token in line.split_whitespace() {
            let value = token
                .parse::<i64>()
                .map_err(|_| Error::MalformedInput(format!("invalid DIMACS token {token:?}")))?;
            if value == 0 {
                clauses.push(std::mem::take(&mut current));
            } else {
                let variable = value.unsigned_abs() as usize - 1;
                if variable >= l {
                    return Err(Error::MalformedInput(format!(
                        "literal {value} references a variable beyond the declared {l}"
                    )));
                }
                current.push(Literal { variable, positive: value > 0 });
            }
        }
    }

    let variable_count =
        variable_count.ok_or_else(|| Error::MalformedInput("missing `p cnf` header".into()))?;
    if !current.is_empty() {
        return Err(Error::MalformedInput("last clause is not terminated by 0".into()));
    }
    if clauses.len() != declared_clauses {
        return Err(Error::MalformedInput(format!(
            "header declares {declared_clauses} clauses but {} were given",
            clauses.len()
        )));
    }
    CnfFormula::new(variable_count, clauses)
}

/// Serializes a formula in the same DIMACS subset accepted by
/// [`parse_dimacs`].
pub fn to_dimacs(formula: &CnfFormula) -> String {
    let mut out = format!("p cnf {} {}\n", formula.variable_count(), formula.clause_count());
    for clause in formula.clauses() {
        for lit in clause {
            let v = lit.variable as i64 + 1;
            out.push_str(&format!("{} ", if lit.positive { v } else { -v }));
        }
        out.push_str("0\n");
    }
    out
}

/// What a generated instance asks of the engine.
#[derive(Clone, Debug, PartialEq)]
pub enum InstanceGoal {
    /// Decide whether the query itemset can exceed the threshold.
    MaxQuery { query: Itemset, threshold: BigRational },
    /// Decide whether the frequencies are consistent at all.
    Consistency,
}

/// A generated entailment instance, together with display names for its
/// attributes.
#[derive(Clone, Debug)]
pub struct ReductionInstance {
    pub family: ItemsetFamily,
    pub theta: FrequencyAssignment,
    pub goal: InstanceGoal,
    pub attribute_names: Vec<String>,
}

impl ReductionInstance {
    /// The query itemset, when the goal carries one.
    pub fn query(&self) -> Option<Itemset> {
        match &self.goal {
            InstanceGoal::MaxQuery { query, .. } => Some(*query),
            InstanceGoal::Consistency => None,
        }
    }
}

fn check_dimensions(formula: &CnfFormula, extra: usize) -> Result<(usize, usize), Error> {
    let l = formula.variable_count();
    let m = formula.clause_count();
    if l == 0 {
        return Err(Error::MalformedInput("the formula must have at least one variable".into()));
    }
    if m == 0 {
        return Err(Error::MalformedInput("the formula must have at least one clause".into()));
    }
    if l + m + extra > MAX_ATTRIBUTES {
        return Err(Error::ResourceLimit { needed: l + m + extra, limit: MAX_ATTRIBUTES });
    }
    Ok((l, m))
}

/// The frequency of family member `member` under the reference distribution.
///
/// A pure-variable member has frequency `2^{-|member|}`. A member containing
/// the clause attribute `c_i` has all of its variables inside clause `i`, so
/// the frequency is found by enumerating the at most `2^3` assignments of the
/// clause's variables.
fn member_frequency(formula: &CnfFormula, member: Itemset, variable_count: usize) -> BigRational {
    let variables = Itemset::from_bits(member.bits() & ((1u64 << variable_count) - 1));
    let clause_bits = member.bits() >> variable_count;
    if clause_bits == 0 {
        return dyadic(1, variables.len());
    }
    debug_assert_eq!(clause_bits.count_ones(), 1, "members hold at most one clause attribute");
    let clause = clause_bits.trailing_zeros() as usize;
    let scope = formula.clause_variables(clause);
    debug_assert!(variables.is_subset_of(scope));
    let mut count = 0u64;
    for assignment in scope.subsets() {
        if variables.is_subset_of(assignment) && formula.clause_satisfied(clause, assignment.bits())
        {
            count += 1;
        }
    }
    dyadic(count as i64, scope.len())
}

fn dyadic(numerator: i64, exponent: usize) -> BigRational {
    BigRational::new(BigInt::from(numerator), BigInt::one() << exponent)
}

/// Builds the max-query instance for `formula`: attributes `v1..vL, c1..cM`,
/// the downward closure of each clause's variables plus its clause attribute,
/// frequencies from the reference distribution, query `c1..cM`, threshold 0.
///
/// The query frequency can be positive iff the formula is satisfiable.
pub fn reduce_max_query(formula: &CnfFormula) -> Result<ReductionInstance, Error> {
    let (l, m) = check_dimensions(formula, 0)?;
    let seeds: Vec<Itemset> = (0..m)
        .map(|i| formula.clause_variables(i).union(clause_attribute(l, i)))
        .collect();
    let family = downward_closure(&seeds, l + m)?;
    let values =
        family.items().iter().map(|&member| member_frequency(formula, member, l)).collect();
    let theta = FrequencyAssignment::new(&family, values)?;
    let query = Itemset::from_indices(l..l + m)?;
    Ok(ReductionInstance {
        family,
        theta,
        goal: InstanceGoal::MaxQuery { query, threshold: BigRational::from_integer(0.into()) },
        attribute_names: attribute_names(l, m, false),
    })
}

/// Builds the consistency instance for `formula`: the max-query instance
/// plus a tag attribute `c0` constrained by members `c0` and `c0 c_i`, all
/// with frequency `2^{-L}`.
///
/// The resulting frequencies are consistent iff the formula is satisfiable.
pub fn reduce_consistent(formula: &CnfFormula) -> Result<ReductionInstance, Error> {
    let (l, m) = check_dimensions(formula, 1)?;
    let tag = Itemset::from_indices([l + m])?;
    let mut seeds: Vec<Itemset> = (0..m)
        .map(|i| formula.clause_variables(i).union(clause_attribute(l, i)))
        .collect();
    seeds.push(tag);
    for i in 0..m {
        seeds.push(tag.union(clause_attribute(l, i)));
    }
    let family = downward_closure(&seeds, l + m + 1)?;
    let values = family
        .items()
        .iter()
        .map(|&member| {
            if member.contains(l + m) {
                dyadic(1, l)
            } else {
                member_frequency(formula, member, l)
            }
        })
        .collect();
    let theta = FrequencyAssignment::new(&family, values)?;
    Ok(ReductionInstance {
        family,
        theta,
        goal: InstanceGoal::Consistency,
        attribute_names: attribute_names(l, m, true),
    })
}

/// The reference distribution itself: variables uniform, each clause
/// attribute equal to its clause's truth value. One state of mass `2^{-L}`
/// per assignment, so the support size is exactly `2^L`.
pub fn construction_distribution(formula: &CnfFormula) -> Result<JointDistribution, Error> {
    let (l, m) = check_dimensions(formula, 0)?;
    if l > crate::model::DENSE_K_LIMIT {
        return Err(Error::ResourceLimit { needed: l, limit: crate::model::DENSE_K_LIMIT });
    }
    let mass = dyadic(1, l);
    let states = (0..1u64 << l).map(|assignment| {
        let mut state = assignment;
        for i in 0..m {
            if formula.clause_satisfied(i, assignment) {
                state |= 1 << (l + i);
            }
        }
        (state, mass.clone())
    });
    JointDistribution::exact_from_states(l + m, states)
}

fn clause_attribute(variable_count: usize, clause: usize) -> Itemset {
    Itemset::from_indices([variable_count + clause]).expect("dimensions were checked")
}

fn attribute_names(l: usize, m: usize, tag: bool) -> Vec<String> {
    let mut names: Vec<String> = (1..=l).map(|j| format!("v{j}")).collect();
    names.extend((1..=m).map(|i| format!("c{i}")));
    if tag {
        names.push("c0".into());
    }
    names
}
