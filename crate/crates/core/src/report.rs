//! Oracle-versus-closed-form verification report.

use num_traits::{One, Zero};
use serde::{Serialize, Serializer};

use crate::error::Result;
use crate::geometric::GeometricModel;
use crate::moments::{
    check_identities, expectation, expectation_limit, second_factorial_moment, theta, variance,
    variance_limit, xi, FormulaSet, KindTag, RangeId,
};
use crate::oracle::{permutation_moments, PatternStats};
use crate::scalar::{format_rational, Rational};

pub(crate) fn ser_rational<S: Serializer>(r: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&format_rational(r))
}

/// One named equality between two exact values.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Check {
    pub name: String,
    pub left: String,
    pub right: String,
    pub pass: bool,
}

impl Check {
    pub fn equal(name: impl Into<String>, left: &Rational, right: &Rational) -> Self {
        Self {
            name: name.into(),
            left: format_rational(left),
            right: format_rational(right),
            pass: left == right,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VerifyConfig {
    /// Largest word length checked against the pattern oracle.
    pub n_max: usize,
    pub qs: Vec<Rational>,
    /// The formula set whose checks decide the outcome.
    pub formulas: FormulaSet,
    /// Largest permutation length for the `q -> 1` limits.
    pub permutation_n_max: usize,
}

impl VerifyConfig {
    pub fn new(n_max: usize, qs: Vec<Rational>) -> Self {
        Self { n_max, qs, formulas: FormulaSet::Corrected, permutation_n_max: 8 }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct VerificationReport {
    pub formulas: FormulaSet,
    pub passed: bool,
    pub checks: Vec<Check>,
    /// Failing checks of the other formula set, itemized; informational only.
    pub other_formula_discrepancies: Vec<Check>,
}

impl VerificationReport {
    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("report serializes")
    }
}

fn q_label(q: &Rational) -> String {
    format_rational(q)
}

/// Closed-form checks for one `(n, q)` and one formula set.
fn closed_form_checks(
    set: FormulaSet,
    stats: &PatternStats,
    model: &GeometricModel<Rational>,
    oracle_sums: &[[Rational; 4]],
) -> Vec<Check> {
    let n = stats.n();
    let tag = format!("n={n} q={}", q_label(model.q()));
    let oracle = stats.moments(model);
    let mut checks = Vec::new();

    let e = expectation(n, model);
    let sf = second_factorial_moment(n, model, set);
    let v = variance(n, model, set);
    checks.push(Check::equal(format!("expectation {tag}"), &e, &oracle.expectation));
    checks.push(Check::equal(format!("second-factorial {tag}"), &sf, &oracle.second_factorial));
    checks.push(Check::equal(format!("variance {tag}"), &v, &oracle.variance));
    let assembled = sf.clone() + e.clone() - e.clone() * e;
    checks.push(Check::equal(format!("variance-assembly {tag}"), &v, &assembled));

    for (slot, kind) in KindTag::ALL.into_iter().enumerate() {
        let mut theta_total = Rational::zero();
        let mut oracle_total = Rational::zero();
        for range in RangeId::ALL {
            let t = theta(range, kind, n, model, set);
            let o = &oracle_sums[range.index() as usize - 1][slot];
            checks.push(Check::equal(format!("theta {range} {kind} {tag}"), &t, o));
            theta_total += t;
            oracle_total += o;
        }
        let x = xi(kind, n, model, set);
        checks.push(Check::equal(format!("xi-assembly {kind} {tag}"), &x, &theta_total));
        checks.push(Check::equal(format!("xi-oracle {kind} {tag}"), &x, &oracle_total));
    }
    checks
}

pub fn run_verification(config: &VerifyConfig) -> Result<VerificationReport> {
    let other = match config.formulas {
        FormulaSet::Original => FormulaSet::Corrected,
        FormulaSet::Corrected => FormulaSet::Original,
    };
    let mut checks = Vec::new();
    let mut other_failures = Vec::new();

    for n in 1..=config.n_max {
        let stats = PatternStats::new(n)?;
        for q in &config.qs {
            let model = GeometricModel::new(q.clone())?;
            let tag = format!("n={n} q={}", q_label(q));

            checks.push(Check::equal(
                format!("pattern-normalization {tag}"),
                &stats.total_probability(&model),
                &Rational::one(),
            ));
            checks.push(Check::equal(
                format!("pmf-total {tag}"),
                &stats.distribution(&model).total(),
                &Rational::one(),
            ));

            let sums = stats.range_sums(&model);
            checks.extend(closed_form_checks(config.formulas, &stats, &model, &sums));
            other_failures.extend(
                closed_form_checks(other, &stats, &model, &sums).into_iter().filter(|c| !c.pass),
            );

            for id in check_identities(n, &model) {
                checks.push(Check::equal(format!("identity {} {tag}", id.name), &id.lhs, &id.rhs));
            }
        }
    }

    for n in 1..=config.permutation_n_max {
        let pm = permutation_moments(n)?;
        checks.push(Check::equal(format!("expectation-limit n={n}"), &expectation_limit(n), &pm.expectation));
        checks.push(Check::equal(format!("variance-limit n={n}"), &variance_limit(n), &pm.variance));
    }

    let passed = checks.iter().all(|c| c.pass);
    Ok(VerificationReport {
        formulas: config.formulas,
        passed,
        checks,
        other_formula_discrepancies: other_failures,
    })
}
