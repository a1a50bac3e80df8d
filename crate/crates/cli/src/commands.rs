use std::path::{Path, PathBuf};

use num_rational::BigRational;
use serde_json::json;

use entail_core::lp::{
    check_consistent, query_bounds, verify_witness, LpConfig, WitnessCheck,
};
use entail_core::maxent::{entropy, fit_maxent, MaxEntOptions, ThresholdDecision};
use entail_core::model::DENSE_K_LIMIT;
use entail_core::oracle::{
    count_satisfying, float_lp_bounds, random_cnf, random_consistent_instance,
};
use entail_core::projection::project;
use entail_core::reduction::{parse_dimacs, reduce_consistent, reduce_max_query};
use entail_core::{lp, BinaryVector, Itemset};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::failure::{Failure, EXIT_NEGATIVE, EXIT_OK, EXIT_UNRESOLVED};
use crate::formats::{
    closure_report, distribution_file, emit_distribution, emit_instance, instance_from_reduction,
    load_instance, parse_rational, rational_string, LoadedInstance,
};

#[derive(Clone, Copy, PartialEq, Eq, Debug, clap::ValueEnum)]
pub enum OutputFormat {
    Text,
    Json,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, clap::ValueEnum)]
pub enum ReduceMode {
    /// Query instance: is the clause conjunction's maximal frequency positive?
    MaxQuery,
    /// Consistency instance: are the generated frequencies satisfiable at all?
    Consistent,
}

fn print_report(format: OutputFormat, text: &[String], value: serde_json::Value) {
    match format {
        OutputFormat::Text => {
            for line in text {
                println!("{line}");
            }
        }
        OutputFormat::Json => {
            println!("{}", serde_json::to_string_pretty(&value).expect("reports serialize"));
        }
    }
}

fn lp_config(k_limit: Option<usize>) -> Result<LpConfig, Failure> {
    match k_limit {
        None => Ok(LpConfig::default()),
        Some(limit) => {
            if limit > LpConfig::DEFAULT_K_LIMIT {
                eprintln!(
                    "warning: the exact solver prices 2^K columns per pivot; \
                     K up to {limit} may be slow"
                );
            }
            LpConfig::with_k_limit(limit).map_err(Failure::from)
        }
    }
}

fn require_closure(instance: &LoadedInstance, report_all: bool) -> Result<(), Failure> {
    if let Some((member, missing)) = instance.family.first_closure_violation() {
        if report_all {
            eprintln!("the family is not closed under subsets; missing:");
            for name in closure_report(instance) {
                eprintln!("  {name}");
            }
            eprintln!("frequencies for missing subsets are not derivable; add them explicitly");
        }
        return Err(Failure::malformed(format!(
            "family is not antimonotonic: member {} is missing subset {}",
            instance.display_itemset(member),
            instance.display_itemset(missing),
        )));
    }
    Ok(())
}

fn resolve_query(instance: &LoadedInstance, flag: Option<&str>) -> Result<Itemset, Failure> {
    match flag {
        Some(names) => instance.itemset_from_names(names),
        None => instance
            .query
            .ok_or_else(|| Failure::malformed("no query: pass --query or add one to the file")),
    }
}

fn resolve_threshold(
    instance: &LoadedInstance,
    flag: Option<&str>,
) -> Result<Option<BigRational>, Failure> {
    match flag {
        Some(text) => parse_rational(text).map(Some),
        None => Ok(instance.threshold.clone()),
    }
}

pub fn cmd_check(
    path: &Path,
    witness_path: Option<&Path>,
    closure: bool,
    k_limit: Option<usize>,
    format: OutputFormat,
) -> Result<i32, Failure> {
    let instance = load_instance(path)?;
    require_closure(&instance, closure)?;
    let config = lp_config(k_limit)?;
    let result = check_consistent(&instance.family, &instance.theta, &config)?;

    let mut text = vec![format!("consistent: {}", result.consistent)];
    let mut report = json!({ "consistent": result.consistent });
    if let (Some(path), Some(witness)) = (witness_path, result.witness.as_ref()) {
        let file = distribution_file(witness, &instance.attribute_names);
        std::fs::write(path, emit_distribution(&file))?;
        text.push(format!("witness: {}", path.display()));
        report["witness"] = json!(path.display().to_string());
    }
    print_report(format, &text, report);
    Ok(if result.consistent { EXIT_OK } else { EXIT_NEGATIVE })
}

pub fn cmd_bounds(
    path: &Path,
    query_flag: Option<&str>,
    threshold_flag: Option<&str>,
    witness_prefix: Option<&str>,
    k_limit: Option<usize>,
    format: OutputFormat,
) -> Result<i32, Failure> {
    let instance = load_instance(path)?;
    require_closure(&instance, false)?;
    let query = resolve_query(&instance, query_flag)?;
    let threshold = resolve_threshold(&instance, threshold_flag)?;
    let config = lp_config(k_limit)?;

    let interval = query_bounds(&instance.family, &instance.theta, query, &config)?;
    let mut text = vec![
        format!("query: {}", instance.display_itemset(query)),
        format!("lo: {}", rational_string(&interval.lo)),
        format!("hi: {}", rational_string(&interval.hi)),
    ];
    let mut report = json!({
        "query": query.members().map(|a| instance.attribute_names[a].clone()).collect::<Vec<_>>(),
        "lo": rational_string(&interval.lo),
        "hi": rational_string(&interval.hi),
    });

    let mut code = EXIT_OK;
    if let Some(threshold) = &threshold {
        let exceeds = interval.hi > *threshold;
        text.push(format!("exceeds: {exceeds}"));
        report["threshold"] = json!(rational_string(threshold));
        report["exceeds"] = json!(exceeds);
        if !exceeds {
            code = EXIT_NEGATIVE;
        }
    }

    if let Some(prefix) = witness_prefix {
        for (side, witness) in [("lo", &interval.lo_witness), ("hi", &interval.hi_witness)] {
            let file = distribution_file(witness, &instance.attribute_names);
            let out = PathBuf::from(format!("{prefix}.{side}.json"));
            std::fs::write(&out, emit_distribution(&file))?;
            text.push(format!("{side} witness: {}", out.display()));
            report[format!("{side}_witness")] = json!(out.display().to_string());
        }
    }
    print_report(format, &text, report);
    Ok(code)
}

pub fn cmd_maxent(
    path: &Path,
    query_flag: Option<&str>,
    threshold_flag: Option<&str>,
    tol: f64,
    max_iter: usize,
    k_limit: Option<usize>,
    format: OutputFormat,
) -> Result<i32, Failure> {
    let instance = load_instance(path)?;
    let query = resolve_query(&instance, query_flag)?;
    let threshold = resolve_threshold(&instance, threshold_flag)?;
    if k_limit.is_some_and(|limit| limit > DENSE_K_LIMIT) {
        eprintln!("warning: the dense fit is capped at K = {DENSE_K_LIMIT}");
    }
    let options = MaxEntOptions {
        tol,
        max_iter,
        k_limit: k_limit.unwrap_or(DENSE_K_LIMIT),
    };

    let fit = fit_maxent(&instance.family, &instance.theta, &options)?;
    let estimate = fit.frequency(query)?;
    let fitted_entropy = entropy(&fit.distribution);

    let mut text = vec![
        format!("query: {}", instance.display_itemset(query)),
        format!("estimate: {estimate}"),
        format!("entropy: {fitted_entropy}"),
        format!("iterations: {}", fit.iterations),
        format!("converged: {}", fit.converged),
    ];
    let mut report = json!({
        "query": query.members().map(|a| instance.attribute_names[a].clone()).collect::<Vec<_>>(),
        "estimate": estimate,
        "entropy": fitted_entropy,
        "iterations": fit.iterations,
        "converged": fit.converged,
    });

    let code = match &threshold {
        Some(threshold) => {
            let decision = ThresholdDecision::classify(estimate, threshold, tol, fit.converged);
            let word = match decision {
                ThresholdDecision::Exceeds => "yes",
                ThresholdDecision::Below => "no",
                ThresholdDecision::Indeterminate => "indeterminate",
            };
            text.push(format!("exceeds: {word}"));
            report["threshold"] = json!(rational_string(threshold));
            report["exceeds"] = json!(word);
            match decision {
                ThresholdDecision::Exceeds => EXIT_OK,
                ThresholdDecision::Below => EXIT_NEGATIVE,
                ThresholdDecision::Indeterminate => EXIT_UNRESOLVED,
            }
        }
        None => {
            if fit.converged {
                EXIT_OK
            } else {
                EXIT_UNRESOLVED
            }
        }
    };
    print_report(format, &text, report);
    Ok(code)
}

pub fn cmd_reduce(
    dimacs_path: &Path,
    mode: ReduceMode,
    output: Option<&Path>,
) -> Result<i32, Failure> {
    let text = std::fs::read_to_string(dimacs_path)
        .map_err(|e| Failure::malformed(format!("cannot read {}: {e}", dimacs_path.display())))?;
    let formula = parse_dimacs(&text)?;
    let instance = match mode {
        ReduceMode::MaxQuery => reduce_max_query(&formula)?,
        ReduceMode::Consistent => reduce_consistent(&formula)?,
    };
    let rendered = emit_instance(&instance_from_reduction(&instance));
    match output {
        Some(path) => std::fs::write(path, rendered)?,
        None => print!("{rendered}"),
    }
    Ok(EXIT_OK)
}

pub fn cmd_project(
    path: &Path,
    member: &str,
    pattern: &str,
    format: OutputFormat,
) -> Result<i32, Failure> {
    let instance = load_instance(path)?;
    let indices = instance.ordered_indices(member)?;
    for (j, index) in indices.iter().enumerate() {
        if indices[..j].contains(index) {
            return Err(Failure::malformed(format!("member {member:?} repeats an attribute")));
        }
    }
    let itemset = Itemset::from_indices(indices.iter().copied())?;
    let bits = BinaryVector::parse01(pattern)?;
    if bits.len() != indices.len() {
        return Err(Failure::malformed(format!(
            "pattern {pattern:?} has length {}, member has {} attributes",
            bits.len(),
            indices.len()
        )));
    }
    // Realign the user's pattern with the member's ascending attribute order.
    let mut pairs: Vec<(usize, bool)> =
        indices.iter().copied().zip(bits.iter()).collect();
    pairs.sort_by_key(|(index, _)| *index);
    let aligned = BinaryVector::new(pairs.iter().map(|(_, bit)| *bit).collect());

    let projection = match project(&instance.family, &instance.theta, itemset, &aligned) {
        Ok(projection) => projection,
        Err(entail_core::Error::UnknownItemset(_)) => {
            return Err(Failure::malformed(format!(
                "{} is not a family member; its frequency is not determined — \
                 use `bounds` for the tight interval instead",
                instance.display_itemset(itemset)
            )));
        }
        Err(other) => return Err(other.into()),
    };

    let mut text = vec![format!("probability: {}", rational_string(&projection.value))];
    if !projection.in_range {
        text.push("in-range: false (the frequencies are inconsistent)".into());
    }
    let report = json!({
        "probability": rational_string(&projection.value),
        "in_range": projection.in_range,
    });
    print_report(format, &text, report);
    Ok(EXIT_OK)
}

struct SuiteResult {
    name: &'static str,
    cases: usize,
    failures: usize,
    first_failure: Option<String>,
}

pub fn cmd_selftest(cases: usize, seed: u64, format: OutputFormat) -> Result<i32, Failure> {
    let suites = vec![
        max_query_equivalence_suite(cases, seed)?,
        consistency_equivalence_suite(cases, seed)?,
        float_cross_check_suite(cases, seed)?,
        witness_invariant_suite(cases, seed)?,
    ];

    let mut all_passed = true;
    let mut text = vec![format!("{:<38} {:>5}  result", "suite", "cases")];
    let mut entries = Vec::new();
    for suite in &suites {
        let passed = suite.failures == 0;
        all_passed &= passed;
        let verdict = if passed { "PASS".to_string() } else { format!("FAIL ({})", suite.failures) };
        text.push(format!("{:<38} {:>5}  {verdict}", suite.name, suite.cases));
        if let Some(detail) = &suite.first_failure {
            text.push(format!("    first failure: {detail}"));
        }
        entries.push(json!({
            "suite": suite.name,
            "cases": suite.cases,
            "failures": suite.failures,
            "first_failure": suite.first_failure,
        }));
    }
    print_report(format, &text, json!({ "suites": entries, "passed": all_passed }));
    Ok(if all_passed { EXIT_OK } else { EXIT_NEGATIVE })
}

/// Generated max-query instances must answer exactly like brute-force model
/// counting.
fn max_query_equivalence_suite(cases: usize, seed: u64) -> Result<SuiteResult, Failure> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let config = LpConfig::default();
    let zero = BigRational::from_integer(0.into());
    let mut failures = 0;
    let mut first_failure = None;
    for case in 0..cases {
        let formula = random_cnf(&mut rng, 6, 8);
        let instance = reduce_max_query(&formula)?;
        let expected = count_satisfying(&formula)? > 0;
        let decided = lp::decide_max_query(
            &instance.family,
            &instance.theta,
            instance.query().expect("max-query instances carry a query"),
            &zero,
            &config,
        )?;
        if decided != expected {
            failures += 1;
            first_failure
                .get_or_insert_with(|| format!("case {case}: decided {decided}, counted {expected}"));
        }
    }
    Ok(SuiteResult { name: "max-query reduction vs model count", cases, failures, first_failure })
}

/// Generated consistency instances must be satisfiable exactly when the
/// formula is.
fn consistency_equivalence_suite(cases: usize, seed: u64) -> Result<SuiteResult, Failure> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(1));
    let config = LpConfig::default();
    let mut failures = 0;
    let mut first_failure = None;
    for case in 0..cases {
        let formula = random_cnf(&mut rng, 6, 8);
        let instance = reduce_consistent(&formula)?;
        let expected = count_satisfying(&formula)? > 0;
        let result = check_consistent(&instance.family, &instance.theta, &config)?;
        if result.consistent != expected {
            failures += 1;
            first_failure.get_or_insert_with(|| {
                format!("case {case}: consistent {}, satisfiable {expected}", result.consistent)
            });
        }
    }
    Ok(SuiteResult { name: "consistency reduction vs model count", cases, failures, first_failure })
}

/// Exact bounds must match the independent floating-point solver to 1e-7.
fn float_cross_check_suite(cases: usize, seed: u64) -> Result<SuiteResult, Failure> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(2));
    let config = LpConfig::default();
    let mut failures = 0;
    let mut first_failure = None;
    for case in 0..cases {
        let (family, theta, query) = random_consistent_instance(&mut rng, 8, 3, 3);
        let exact = query_bounds(&family, &theta, query, &config)?;
        let float = float_lp_bounds(&family, &theta, query)?;
        let lo_err = (rational_to_f64(&exact.lo) - float.lo).abs();
        let hi_err = (rational_to_f64(&exact.hi) - float.hi).abs();
        if lo_err > 1e-7 || hi_err > 1e-7 {
            failures += 1;
            first_failure
                .get_or_insert_with(|| format!("case {case}: lo err {lo_err:.2e}, hi err {hi_err:.2e}"));
        }
    }
    Ok(SuiteResult { name: "exact vs floating-point lp bounds", cases, failures, first_failure })
}

/// Witnesses must be sparse canonical certificates: few states, exact
/// satisfaction, and member patterns agreeing with direct projection.
fn witness_invariant_suite(cases: usize, seed: u64) -> Result<SuiteResult, Failure> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(3));
    let config = LpConfig::default();
    let mut failures = 0;
    let mut first_failure = None;
    for case in 0..cases {
        let (family, theta, query) = random_consistent_instance(&mut rng, 8, 3, 3);
        let interval = query_bounds(&family, &theta, query, &config)?;
        let mut ok = interval.lo_witness.support_len() <= family.len() + 1
            && interval.hi_witness.support_len() <= family.len() + 1
            && interval.lo_witness.satisfies(&family, &theta, 0.0)
            && interval.hi_witness.satisfies(&family, &theta, 0.0);
        if ok && interval.lo < interval.hi {
            let above_lo = verify_witness(&interval.hi_witness, &family, &theta, query, &interval.lo)?;
            ok &= above_lo == WitnessCheck::Valid;
        }
        if ok {
            'members: for &member in family.items() {
                for bits in 0..(1u32 << member.len()) {
                    let pattern = BinaryVector::new(
                        (0..member.len()).map(|j| bits >> j & 1 == 1).collect(),
                    );
                    let lo_value = interval.lo_witness.event_probability(member, &pattern)?;
                    let hi_value = interval.hi_witness.event_probability(member, &pattern)?;
                    let projected = project(&family, &theta, member, &pattern)?;
                    if lo_value.as_exact() != Some(&projected.value)
                        || hi_value.as_exact() != Some(&projected.value)
                    {
                        ok = false;
                        break 'members;
                    }
                }
            }
        }
        if !ok {
            failures += 1;
            first_failure.get_or_insert_with(|| format!("case {case}: witness invariant broken"));
        }
    }
    Ok(SuiteResult { name: "witness canonicality and agreement", cases, failures, first_failure })
}

fn rational_to_f64(value: &BigRational) -> f64 {
    num_traits::ToPrimitive::to_f64(value).unwrap_or(f64::NAN)
}
