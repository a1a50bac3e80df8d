//! Acceptance suite: one test per criterion, each printing a pass line.
//!
//! Every tolerance and budget is pinned here. Exact claims are asserted with
//! rational equality, never with an epsilon; floating claims carry their
//! stated tolerance. Criteria 4, 5, 7 and 8 share one seeded CNF corpus.

use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use entail_core::lp::{check_consistent, decide_max_query, query_bounds, LpConfig};
use entail_core::maxent::{fit_maxent, MaxEntOptions};
use entail_core::model::BinaryVector;
use entail_core::oracle::{
    count_satisfying, float_lp_bounds, random_cnf, random_consistent_instance,
    random_singleton_instance,
};
use entail_core::projection::project;
use entail_core::reduction::{reduce_consistent, reduce_max_query, CnfFormula};
use entail_core::{downward_closure, FrequencyAssignment, Itemset, ItemsetFamily};

const CORPUS_SEED: u64 = 0x1af3;
const CORPUS_SIZE: usize = 200;

fn ratio(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn set(indices: &[usize]) -> Itemset {
    Itemset::from_indices(indices.iter().copied()).unwrap()
}

fn intro_instance() -> (ItemsetFamily, FrequencyAssignment) {
    let family = downward_closure(&[set(&[0]), set(&[1])], 2).unwrap();
    let theta =
        FrequencyAssignment::new(&family, vec![ratio(1, 1), ratio(3, 5), ratio(1, 2)]).unwrap();
    (family, theta)
}

/// The shared random corpus: 200 formulas with up to 6 variables and up to
/// 8 clauses of 1 to 3 literals.
fn cnf_corpus() -> Vec<CnfFormula> {
    let mut rng = ChaCha8Rng::seed_from_u64(CORPUS_SEED);
    (0..CORPUS_SIZE).map(|_| random_cnf(&mut rng, 6, 8)).collect()
}

fn pass(criterion: &str) {
    println!("acceptance {criterion}: PASS");
}

/// Criterion 1: the two-event instance has the exact interval
/// [1/10, 1/2] for the pair query, inside one second.
#[test]
fn criterion_01_intro_interval_exact() {
    let (family, theta) = intro_instance();
    let start = Instant::now();
    let interval = query_bounds(&family, &theta, set(&[0, 1]), &LpConfig::default()).unwrap();
    let elapsed = start.elapsed();
    assert_eq!(interval.lo, ratio(1, 10));
    assert_eq!(interval.hi, ratio(1, 2));
    assert!(elapsed < Duration::from_secs(1), "took {elapsed:?}");
    pass("criterion 1 (intro interval, exact, < 1 s)");
}

/// Criterion 2: the maximum-entropy estimate for the same query is 0.3
/// within 1e-6.
#[test]
fn criterion_02_intro_maxent_estimate() {
    let (family, theta) = intro_instance();
    let fit = fit_maxent(&family, &theta, &MaxEntOptions::default()).unwrap();
    assert!(fit.converged);
    let estimate = fit.frequency(set(&[0, 1])).unwrap();
    assert!((estimate - 0.3).abs() <= 1e-6, "estimate {estimate}");
    pass("criterion 2 (intro maxent estimate 0.3 ± 1e-6)");
}

const TWO_CLAUSE_DIMACS: &str = "p cnf 3 2\n1 2 0\n-2 3 0\n";

const TWO_CLAUSE_GOLDEN: &str = r#"{
  "attributes": [
    "v1",
    "v2",
    "v3",
    "c1",
    "c2"
  ],
  "constraints": [
    {
      "items": [],
      "frequency": "1"
    },
    {
      "items": [
        "v1"
      ],
      "frequency": "1/2"
    },
    {
      "items": [
        "v2"
      ],
      "frequency": "1/2"
    },
    {
      "items": [
        "v3"
      ],
      "frequency": "1/2"
    },
    {
      "items": [
        "c1"
      ],
      "frequency": "3/4"
    },
    {
      "items": [
        "c2"
      ],
      "frequency": "3/4"
    },
    {
      "items": [
        "v1",
        "v2"
      ],
      "frequency": "1/4"
    },
    {
      "items": [
        "v1",
        "c1"
      ],
      "frequency": "1/2"
    },
    {
      "items": [
        "v2",
        "v3"
      ],
      "frequency": "1/4"
    },
    {
      "items": [
        "v2",
        "c1"
      ],
      "frequency": "1/2"
    },
    {
      "items": [
        "v2",
        "c2"
      ],
      "frequency": "1/4"
    },
    {
      "items": [
        "v3",
        "c2"
      ],
      "frequency": "1/2"
    },
    {
      "items": [
        "v1",
        "v2",
        "c1"
      ],
      "frequency": "1/4"
    },
    {
      "items": [
        "v2",
        "v3",
        "c2"
      ],
      "frequency": "1/4"
    }
  ],
  "query": [
    "c1",
    "c2"
  ],
  "threshold": "0"
}
"#;

/// Criterion 3: reducing (v1 ∨ v2) ∧ (¬v2 ∨ v3) reproduces the known
/// 14-member instance byte-for-byte through the CLI, and the query maximum
/// is exactly 1/2, inside five seconds.
#[test]
fn criterion_03_two_clause_golden() {
    let start = Instant::now();

    let dir = std::env::temp_dir().join(format!("entail-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let dimacs = dir.join("two-clause.cnf");
    std::fs::write(&dimacs, TWO_CLAUSE_DIMACS).unwrap();
    let output = std::process::Command::new(env!("CARGO_BIN_EXE_entail"))
        .args(["reduce", dimacs.to_str().unwrap(), "--mode", "max-query"])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(0));
    assert_eq!(String::from_utf8_lossy(&output.stdout), TWO_CLAUSE_GOLDEN);

    let formula = entail_core::reduction::parse_dimacs(TWO_CLAUSE_DIMACS).unwrap();
    let instance = reduce_max_query(&formula).unwrap();
    assert_eq!(instance.family.len(), 14);
    let interval = query_bounds(
        &instance.family,
        &instance.theta,
        instance.query().unwrap(),
        &LpConfig::default(),
    )
    .unwrap();
    assert_eq!(interval.hi, ratio(1, 2));

    let elapsed = start.elapsed();
    assert!(elapsed < Duration::from_secs(5), "took {elapsed:?}");
    pass("criterion 3 (two-clause golden, byte-exact + hi = 1/2, < 5 s)");
}

/// Criterion 4: over 200 random formulas, the zero-threshold query decision
/// equals brute-force satisfiability exactly, inside ten minutes.
#[test]
fn criterion_04_max_query_equivalence_sweep() {
    let start = Instant::now();
    let config = LpConfig::default();
    let zero = ratio(0, 1);
    for (case, formula) in cnf_corpus().iter().enumerate() {
        let instance = reduce_max_query(formula).unwrap();
        let satisfiable = count_satisfying(formula).unwrap() > 0;
        let decided = decide_max_query(
            &instance.family,
            &instance.theta,
            instance.query().unwrap(),
            &zero,
            &config,
        )
        .unwrap();
        assert_eq!(decided, satisfiable, "case {case}");
    }
    let elapsed = start.elapsed();
    assert!(elapsed < Duration::from_secs(600), "took {elapsed:?}");
    pass("criterion 4 (200-case max-query equivalence, exact, < 10 min)");
}

/// Criterion 5: the same corpus through the consistency generator: the
/// instance is consistent exactly when the formula is satisfiable.
#[test]
fn criterion_05_consistency_equivalence_sweep() {
    let config = LpConfig::default();
    for (case, formula) in cnf_corpus().iter().enumerate() {
        let instance = reduce_consistent(formula).unwrap();
        let satisfiable = count_satisfying(formula).unwrap() > 0;
        let result = check_consistent(&instance.family, &instance.theta, &config).unwrap();
        assert_eq!(result.consistent, satisfiable, "case {case}");
        if let Some(witness) = result.witness {
            assert!(witness.support_len() <= instance.family.len() + 1, "case {case}");
            assert!(witness.satisfies(&instance.family, &instance.theta, 0.0), "case {case}");
        }
    }
    pass("criterion 5 (200-case consistency equivalence, exact)");
}

/// Criterion 6: over 50 random formulas, the maximum-entropy estimate of the
/// clause conjunction matches the model count scaled by 2^{-L} within 1e-6,
/// converging within the 100000-sweep budget.
#[test]
fn criterion_06_maxent_counts_models() {
    let mut rng = ChaCha8Rng::seed_from_u64(CORPUS_SEED.wrapping_add(6));
    let options = MaxEntOptions::default();
    for case in 0..50 {
        let formula = random_cnf(&mut rng, 6, 8);
        let instance = reduce_max_query(&formula).unwrap();
        let fit = fit_maxent(&instance.family, &instance.theta, &options).unwrap();
        assert!(
            fit.converged && fit.iterations <= 100_000,
            "case {case}: residual {} after {} sweeps",
            fit.residual,
            fit.iterations
        );
        let estimate = fit.frequency(instance.query().unwrap()).unwrap();
        let expected = count_satisfying(&formula).unwrap() as f64
            / (1u64 << formula.variable_count()) as f64;
        assert!(
            (estimate - expected).abs() <= 1e-6,
            "case {case}: estimate {estimate}, counted {expected}"
        );
    }
    pass("criterion 6 (50-case maxent model-count identity, ± 1e-6)");
}

/// Criterion 7: on the shared corpus, the two endpoint witnesses agree with
/// rational equality on every member pattern (and with direct projection).
#[test]
fn criterion_07_witnesses_agree_on_member_patterns() {
    let config = LpConfig::default();
    for (case, formula) in cnf_corpus().iter().enumerate() {
        let instance = reduce_max_query(formula).unwrap();
        let interval = query_bounds(
            &instance.family,
            &instance.theta,
            instance.query().unwrap(),
            &config,
        )
        .unwrap();
        for &member in instance.family.items() {
            for bits in 0..(1u32 << member.len()) {
                let pattern = BinaryVector::new(
                    (0..member.len()).map(|j| bits >> j & 1 == 1).collect(),
                );
                let lo_value =
                    interval.lo_witness.event_probability(member, &pattern).unwrap();
                let hi_value =
                    interval.hi_witness.event_probability(member, &pattern).unwrap();
                let projected =
                    project(&instance.family, &instance.theta, member, &pattern).unwrap();
                assert_eq!(
                    lo_value.as_exact(),
                    hi_value.as_exact(),
                    "case {case}, member {member}, pattern {pattern}"
                );
                assert_eq!(
                    lo_value.as_exact(),
                    Some(&projected.value),
                    "case {case}, member {member}, pattern {pattern}"
                );
            }
        }
    }
    pass("criterion 7 (witness pattern determinacy, rational equality)");
}

/// Criterion 8: every witness produced across the suites keeps its support
/// within N + 1 states.
#[test]
fn criterion_08_witness_support_bound() {
    let config = LpConfig::default();
    for formula in cnf_corpus().iter().take(60) {
        let instance = reduce_max_query(formula).unwrap();
        let bound = instance.family.len() + 1;
        let interval = query_bounds(
            &instance.family,
            &instance.theta,
            instance.query().unwrap(),
            &config,
        )
        .unwrap();
        assert!(interval.lo_witness.support_len() <= bound);
        assert!(interval.hi_witness.support_len() <= bound);

        let consistency = reduce_consistent(formula).unwrap();
        let result = check_consistent(&consistency.family, &consistency.theta, &config).unwrap();
        if let Some(witness) = result.witness {
            assert!(witness.support_len() <= consistency.family.len() + 1);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(CORPUS_SEED.wrapping_add(8));
    for _ in 0..60 {
        let (family, theta, query) = random_consistent_instance(&mut rng, 8, 3, 3);
        let interval = query_bounds(&family, &theta, query, &config).unwrap();
        assert!(interval.lo_witness.support_len() <= family.len() + 1);
        assert!(interval.hi_witness.support_len() <= family.len() + 1);
    }
    pass("criterion 8 (canonical witness support ≤ N + 1)");
}

/// Criterion 9: on 100 random consistent instances with K ≤ 10, the exact
/// bounds match the independent floating-point solver within 1e-7.
#[test]
fn criterion_09_float_oracle_agreement() {
    let mut rng = ChaCha8Rng::seed_from_u64(CORPUS_SEED.wrapping_add(9));
    let config = LpConfig::default();
    for case in 0..100 {
        let (family, theta, query) = random_consistent_instance(&mut rng, 10, 3, 3);
        let exact = query_bounds(&family, &theta, query, &config).unwrap();
        let float = float_lp_bounds(&family, &theta, query).unwrap();
        let lo_err = (exact.lo.to_f64().unwrap() - float.lo).abs();
        let hi_err = (exact.hi.to_f64().unwrap() - float.hi).abs();
        assert!(lo_err <= 1e-7, "case {case}: lo err {lo_err:.3e}");
        assert!(hi_err <= 1e-7, "case {case}: hi err {hi_err:.3e}");
        assert!(exact.lo_witness.support_len() <= family.len() + 1);
        assert!(exact.hi_witness.support_len() <= family.len() + 1);
    }
    pass("criterion 9 (100-case float-oracle agreement, ± 1e-7)");
}

/// Criterion 10: for singleton-only families, the maximal frequency of the
/// full conjunction is exactly the smallest singleton frequency.
#[test]
fn criterion_10_singleton_minimum_rule() {
    let mut rng = ChaCha8Rng::seed_from_u64(CORPUS_SEED.wrapping_add(10));
    let config = LpConfig::default();
    for case in 0..50 {
        let (family, theta) = random_singleton_instance(&mut rng, 10);
        let full = Itemset::from_indices(0..family.attribute_count()).unwrap();
        let interval = query_bounds(&family, &theta, full, &config).unwrap();
        let expected = family
            .items()
            .iter()
            .enumerate()
            .filter(|(_, member)| !member.is_empty())
            .map(|(i, _)| theta.get(i).clone())
            .min()
            .unwrap();
        assert_eq!(interval.hi, expected, "case {case}");
        assert!(interval.hi_witness.support_len() <= family.len() + 1);
    }
    pass("criterion 10 (singleton minimum rule, exact)");
}
