use std::fmt::Write as _;
use std::ops::RangeInclusive;

use clap::{Parser, Subcommand, ValueEnum};
use num_traits::{One, Zero};
use serde_json::{json, Value};
use thiserror::Error;

use qpath_core::moments::{
    check_exact_budget, closed_form_moments, expectation_limit, float_moments, harmonic, variance_limit,
    EXACT_BITS_CAP,
};
use qpath_core::montecarlo::{compare, estimate, EstimateReport};
use qpath_core::oracle::exact_distribution;
use qpath_core::pathlen::rho_breakdown_fast;
use qpath_core::report::{run_verification, VerifyConfig};
use qpath_core::scalar::{format_float, format_rational, parse_decimal, parse_rational};
use qpath_core::{Error as CoreError, FormulaSet, GeometricModel, Rational, Scalar, Word};

#[derive(Debug, Parser)]
#[command(name = "qpath", version, about = "Path length of binary search trees built from geometric words")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// ρ of a comma-separated word, with its L/R/B breakdown.
    Rho {
        #[arg(long, allow_hyphen_values = true)]
        word: String,
    },
    /// Closed-form E, E[ρ(ρ-1)] and V for one (n, q).
    Moments {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        q: String,
        /// Exact rational arithmetic; q must be given as a/b.
        #[arg(long)]
        exact: bool,
        #[arg(long, value_enum, default_value_t = Formulas::Corrected)]
        formulas: Formulas,
        /// Refuse exact evaluation whose estimated denominator exceeds this many bits.
        #[arg(long, default_value_t = EXACT_BITS_CAP)]
        max_exact_bits: usize,
    },
    /// Uniform-permutation limits (q -> 1).
    Limit {
        #[arg(long)]
        n: usize,
    },
    /// Exact distribution of ρ by pattern enumeration.
    Dist {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        q: String,
        /// Accepted for symmetry; the distribution is always exact.
        #[arg(long)]
        exact: bool,
    },
    /// Every closed form against exhaustive enumeration.
    Verify {
        #[arg(long, default_value_t = 6)]
        nmax: usize,
        /// One or more rationals a/b, comma-separated or repeated.
        #[arg(long, value_delimiter = ',', num_args = 1.., required = true)]
        q: Vec<String>,
        /// Largest permutation length for the q -> 1 limits.
        #[arg(long, default_value_t = 8)]
        pmax: usize,
        #[arg(long, value_enum, default_value_t = Formulas::Corrected)]
        formulas: Formulas,
    },
    /// Monte Carlo estimate with a closed-form comparison.
    Simulate {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        q: String,
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// One row of E and V per n.
    Table {
        /// Inclusive range a..b, or a single n.
        #[arg(long)]
        n: String,
        #[arg(long)]
        q: String,
        #[arg(long)]
        exact: bool,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        #[arg(long, value_enum, default_value_t = Formulas::Corrected)]
        formulas: Formulas,
        /// Refuse exact evaluation whose estimated denominator exceeds this many bits.
        #[arg(long, default_value_t = EXACT_BITS_CAP)]
        max_exact_bits: usize,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Formulas {
    Original,
    Corrected,
}

impl From<Formulas> for FormulaSet {
    fn from(f: Formulas) -> Self {
        match f {
            Formulas::Original => FormulaSet::Original,
            Formulas::Corrected => FormulaSet::Corrected,
        }
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Resource(String),
    /// Verification ran but some check failed; carries the full report.
    #[error("verification failed: {summary}")]
    Verification { summary: String, output: String },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Verification { .. } => 1,
            CliError::Usage(_) => 2,
            CliError::Resource(_) => 3,
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::ResourceLimit { .. } => CliError::Resource(e.to_string()),
            other => CliError::Usage(other.to_string()),
        }
    }
}

type Output = Result<String, CliError>;

/// Parses `q`. Exact mode accepts only `a/b` (or an integer, which is then out
/// of range); otherwise decimals are also accepted and read exactly.
pub fn parse_q(raw: &str, exact: bool) -> Result<Rational, CliError> {
    let q = if raw.contains('.') {
        if exact {
            return Err(CliError::Usage(format!(
                "q = {raw} is a decimal; exact mode needs a rational such as 1/2"
            )));
        }
        parse_decimal(raw)?
    } else {
        parse_rational(raw)?
    };
    if q.is_one() {
        return Err(CliError::Usage(
            "q = 1 is the uniform-permutation limit; use `qpath limit --n N`".into(),
        ));
    }
    if q <= Rational::zero() || q > Rational::one() {
        return Err(CliError::Usage(format!("q must lie in (0, 1), got {raw}")));
    }
    Ok(q)
}

pub fn parse_n_range(raw: &str) -> Result<RangeInclusive<usize>, CliError> {
    let bad = || CliError::Usage(format!("expected n or a..b, got {raw:?}"));
    let (lo, hi) = match raw.split_once("..") {
        Some((a, b)) => (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?),
        None => {
            let n = raw.trim().parse().map_err(|_| bad())?;
            (n, n)
        }
    };
    if lo > hi {
        return Err(bad());
    }
    Ok(lo..=hi)
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json value");
    s.push('\n');
    s
}

pub fn run(cli: Cli) -> Output {
    match cli.command {
        Command::Rho { word } => rho(&word),
        Command::Moments { n, q, exact, formulas, max_exact_bits } => {
            moments(n, &q, exact, formulas.into(), max_exact_bits)
        }
        Command::Limit { n } => limit(n),
        Command::Dist { n, q, .. } => dist(n, &q),
        Command::Verify { nmax, q, pmax, formulas } => verify(nmax, &q, pmax, formulas.into()),
        Command::Simulate { n, q, trials, seed, format } => simulate(n, &q, trials, seed, format),
        Command::Table { n, q, exact, format, formulas, max_exact_bits } => {
            table(&n, &q, exact, format, formulas.into(), max_exact_bits)
        }
    }
}

fn rho(raw: &str) -> Output {
    let word: Word = raw.parse()?;
    let b = rho_breakdown_fast(&word);
    Ok(pretty(&json!({
        "word": word.letters(),
        "rho": b.rho,
        "l": b.l_count,
        "r": b.r_count,
        "b": b.b_count,
    })))
}

fn moments(n: usize, raw_q: &str, exact: bool, set: FormulaSet, max_bits: usize) -> Output {
    let q = parse_q(raw_q, exact)?;
    if exact {
        check_exact_budget(n, &q, max_bits)?;
        let report = closed_form_moments(n, &GeometricModel::new(q)?, set);
        let mut v = report.to_json();
        v["formulas"] = json!(set);
        Ok(pretty(&v))
    } else {
        let (report, fallback) = float_moments(n, &q, set)?;
        let mut v = report.to_json();
        v["formulas"] = json!(set);
        v["exact_fallback"] = json!(fallback);
        Ok(pretty(&v))
    }
}

fn limit(n: usize) -> Output {
    let h = harmonic(n);
    Ok(pretty(&json!({
        "n": n,
        "expectation": format_rational(&expectation_limit(n)),
        "variance": format_rational(&variance_limit(n)),
        "harmonic": format_rational(&h.h1),
        "harmonic2": format_rational(&h.h2),
    })))
}

fn dist(n: usize, raw_q: &str) -> Output {
    let q = parse_q(raw_q, true)?;
    let pmf = exact_distribution(n, &GeometricModel::new(q.clone())?)?;
    Ok(pretty(&json!({
        "n": n,
        "q": format_rational(&q),
        "pmf": pmf.to_json(),
    })))
}

fn verify(nmax: usize, raw_qs: &[String], pmax: usize, set: FormulaSet) -> Output {
    let qs = raw_qs.iter().map(|q| parse_q(q, true)).collect::<Result<Vec<_>, _>>()?;
    let mut config = VerifyConfig::new(nmax, qs);
    config.formulas = set;
    config.permutation_n_max = pmax;
    let report = run_verification(&config)?;
    let output = pretty(&report.to_json());
    if report.passed {
        Ok(output)
    } else {
        let failures: Vec<&str> = report.failures().map(|c| c.name.as_str()).collect();
        let mut summary = format!("{} of {} checks failed", failures.len(), report.checks.len());
        for name in failures.iter().take(10) {
            let _ = write!(summary, "\n  {name}");
        }
        Err(CliError::Verification { summary, output })
    }
}

fn simulate(n: usize, raw_q: &str, trials: u64, seed: u64, format: Format) -> Output {
    let q = parse_q(raw_q, false)?;
    let (exact, _) = float_moments(n, &q, FormulaSet::Corrected)?;
    let model = GeometricModel::new(q.to_f64())?;
    let report = estimate(&model, n, trials, seed)?;
    let cmp = compare(&report, exact.expectation, exact.variance);
    match format {
        Format::Json => Ok(pretty(&json!({ "estimate": report, "comparison": cmp }))),
        Format::Csv => Ok(format!(
            "{},expected_mean,expected_variance,mean_z,variance_rel_err,variance_band\n{},{},{},{},{},{}\n",
            EstimateReport::CSV_HEADER,
            report.csv_row(),
            format_float(cmp.expected_mean),
            format_float(cmp.expected_variance),
            format_float(cmp.mean_z),
            format_float(cmp.variance_rel_err),
            json!(cmp.variance_band).as_str().unwrap_or_default(),
        )),
    }
}

fn table(raw_n: &str, raw_q: &str, exact: bool, format: Format, set: FormulaSet, max_bits: usize) -> Output {
    let ns = parse_n_range(raw_n)?;
    let q = parse_q(raw_q, exact)?;
    if exact {
        check_exact_budget(*ns.end(), &q, max_bits)?;
    }
    let mut rows: Vec<[String; 5]> = Vec::new();
    let model = GeometricModel::new(q.clone())?;
    for n in ns {
        let (e, v, q_str) = if exact {
            let r = closed_form_moments(n, &model, set);
            (r.expectation.render(), r.variance.render(), format_rational(&q))
        } else {
            let (r, _) = float_moments(n, &q, set)?;
            (format_float(r.expectation), format_float(r.variance), format_float(r.q))
        };
        rows.push([n.to_string(), q_str, e, v, "closed-form".to_string()]);
    }
    match format {
        Format::Csv => {
            let mut out = String::from("n,q,E,V,source\n");
            for row in &rows {
                out.push_str(&row.join(","));
                out.push('\n');
            }
            Ok(out)
        }
        Format::Json => {
            let items: Vec<Value> = rows
                .iter()
                .map(|[n, q, e, v, source]| {
                    let num = |s: &str| if exact { json!(s) } else { json!(s.parse::<f64>().unwrap_or(f64::NAN)) };
                    json!({
                        "n": n.parse::<usize>().unwrap_or_default(),
                        "q": num(q),
                        "expectation": num(e),
                        "variance": num(v),
                        "source": source,
                    })
                })
                .collect();
            Ok(pretty(&Value::Array(items)))
        }
    }
}
