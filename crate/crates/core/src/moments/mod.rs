//! Closed-form moments of the path-length parameter under the geometric model.
//!
//! Everything here is written in terms of `a_i = 1/(1-q^i)` and `p = 1-q`, and
//! evaluated over any [`Scalar`]: exact rationals for verification, `f64` for
//! tables. The classical permutation case `q -> 1` is only available through
//! [`expectation_limit`] and [`variance_limit`], since every `a_i` has a pole
//! at `q = 1`.

pub mod identities;
pub mod theta;
pub mod variance;
pub mod xi;

use std::str::FromStr;

use num_traits::{Signed, Zero};
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::geometric::GeometricModel;
use crate::scalar::{ratio, Rational, Scalar, Tracked};

fn int(v: i64) -> Rational {
    ratio(v, 1)
}

pub use identities::{check_identities, IdentityCheck};
pub use theta::{theta, KindTag, RangeId};
pub use variance::variance;
pub use xi::{xi, Basis};

/// Which version of the range contributions, `Ξ` lines and variance to use.
///
/// `Original` keeps the closed forms exactly as first stated; four range
/// entries, three of the `Ξ` sums and the variance polynomial built on them
/// disagree with exhaustive enumeration. `Corrected` replaces exactly those
/// pieces and agrees with the oracle.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FormulaSet {
    Original,
    #[default]
    Corrected,
}

impl FromStr for FormulaSet {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "original" => Ok(FormulaSet::Original),
            "corrected" => Ok(FormulaSet::Corrected),
            _ => Err(Error::Parse(format!("unknown formula set {s:?}"))),
        }
    }
}

/// `C(a, 2)`, zero for `a < 2`.
pub(crate) fn binom2(a: i64) -> i64 {
    if a < 2 {
        0
    } else {
        a * (a - 1) / 2
    }
}

/// `a_i = 1/(1-q^i)`.
pub fn a_coeff<S: Scalar>(i: usize, model: &GeometricModel<S>) -> Result<S> {
    if i == 0 {
        return invalid("a_i is defined for i >= 1");
    }
    Ok(S::one() / (S::one() - model.q().powu(i as u32)))
}

/// Precomputed `a_1 … a_n` together with `p`.
#[derive(Clone, Debug)]
pub struct ACoeffs<S> {
    p: S,
    a: Vec<S>,
}

impl<S: Scalar> ACoeffs<S> {
    pub fn new(model: &GeometricModel<S>, n: usize) -> Self {
        let mut a = Vec::with_capacity(n + 1);
        a.push(S::zero());
        let mut qi = S::one();
        for _ in 1..=n {
            qi = qi * model.q().clone();
            a.push(S::one() / (S::one() - qi.clone()));
        }
        Self { p: model.p().clone(), a }
    }

    pub fn p(&self) -> &S {
        &self.p
    }

    pub fn get(&self, i: usize) -> &S {
        &self.a[i]
    }

    pub(crate) fn at(&self, i: i64) -> S {
        self.a[i as usize].clone()
    }
}

/// Endpoint indicator kind for a single pair.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Indicator {
    L,
    R,
    B,
}

/// Probability that the indicator of a pair spanning `window = k+1-j >= 2`
/// letters is 1: `p/(1-q^m)` for L and R, `p^2/(1-q^m)` for B.
pub fn indicator_probability<S: Scalar>(
    kind: Indicator,
    window: usize,
    model: &GeometricModel<S>,
) -> Result<S> {
    if window < 2 {
        return invalid(format!("a pair spans at least 2 letters, got window {window}"));
    }
    let a = a_coeff(window, model)?;
    Ok(match kind {
        Indicator::L | Indicator::R => model.p().clone() * a,
        Indicator::B => model.p().powu(2) * a,
    })
}

/// `E[ρ] = p(2-p) Σ_{1<=i<=n} (n+1-i)/(1-q^i) - n(2-p)`.
pub fn expectation<S: Scalar>(n: usize, model: &GeometricModel<S>) -> S {
    expectation_with(&ACoeffs::new(model, n), n)
}

pub(crate) fn expectation_with<S: Scalar>(a: &ACoeffs<S>, n: usize) -> S {
    let p = a.p().clone();
    let two_minus_p = S::from_i64(2) - p.clone();
    let sum = (1..=n).fold(S::zero(), |acc, i| {
        acc + S::from_i64((n + 1 - i) as i64) * a.get(i).clone()
    });
    p * two_minus_p.clone() * sum - S::from_i64(n as i64) * two_minus_p
}

/// The same expectation assembled pair by pair from the indicator probabilities.
pub fn expectation_by_pairs<S: Scalar>(n: usize, model: &GeometricModel<S>) -> S {
    (2..=n).fold(S::zero(), |acc, m| {
        let l = indicator_probability(Indicator::L, m, model).expect("m >= 2");
        let b = indicator_probability(Indicator::B, m, model).expect("m >= 2");
        acc + S::from_i64((n + 1 - m) as i64) * (S::from_i64(2) * l - b)
    })
}

/// `E[ρ(ρ-1)] = 2Ξ^LL + 2Ξ^LR - 4Ξ^LB + Ξ^BB`.
pub fn second_factorial_moment<S: Scalar>(
    n: usize,
    model: &GeometricModel<S>,
    set: FormulaSet,
) -> S {
    second_factorial_with(&ACoeffs::new(model, n), n, set)
}

pub(crate) fn second_factorial_with<S: Scalar>(a: &ACoeffs<S>, n: usize, set: FormulaSet) -> S {
    let x = |kind| xi::xi_with(a, kind, n, set);
    S::from_i64(2) * x(KindTag::LL) + S::from_i64(2) * x(KindTag::LR)
        - S::from_i64(4) * x(KindTag::LB)
        + x(KindTag::BB)
}

/// Harmonic numbers `H_n` and `H_n^(2)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HarmonicPair {
    #[serde(serialize_with = "crate::report::ser_rational")]
    pub h1: Rational,
    #[serde(serialize_with = "crate::report::ser_rational")]
    pub h2: Rational,
}

pub fn harmonic(n: usize) -> HarmonicPair {
    let mut h1 = Rational::zero();
    let mut h2 = Rational::zero();
    for i in 1..=n as i64 {
        let inv = ratio(1, i);
        h2 += inv.clone() * inv.clone();
        h1 += inv;
    }
    HarmonicPair { h1, h2 }
}

/// `lim_{q->1} E = 2(n+1)H_n - 4n`.
pub fn expectation_limit(n: usize) -> Rational {
    let h = harmonic(n);
    let n = int(n as i64);
    int(2) * (n.clone() + int(1)) * h.h1 - int(4) * n
}

/// `lim_{q->1} V = 7n^2 - 4(n+1)^2 H_n^(2) - 2(n+1)H_n + 13n`.
pub fn variance_limit(n: usize) -> Rational {
    let h = harmonic(n);
    let n = int(n as i64);
    let n1 = n.clone() + int(1);
    int(7) * n.clone() * n.clone() - int(4) * n1.clone() * n1.clone() * h.h2
        - int(2) * n1 * h.h1
        + int(13) * n
}

/// Where a [`MomentReport`] came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Source {
    ClosedForm,
    Oracle,
    MonteCarlo,
}

impl std::fmt::Display for Source {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Source::ClosedForm => "closed-form",
            Source::Oracle => "oracle",
            Source::MonteCarlo => "monte-carlo",
        })
    }
}

/// Expectation, second factorial moment and variance of ρ for one `(n, q)`.
#[derive(Clone, Debug, PartialEq)]
pub struct MomentReport<S> {
    pub n: usize,
    pub q: S,
    pub expectation: S,
    pub second_factorial: S,
    pub variance: S,
    pub source: Source,
}

impl<S: Scalar> MomentReport<S> {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "n": self.n,
            "q": self.q.to_json(),
            "expectation": self.expectation.to_json(),
            "second_factorial": self.second_factorial.to_json(),
            "variance": self.variance.to_json(),
            "source": self.source,
        })
    }

    /// `V = E^(2) + E - E^2`.
    pub fn is_consistent(&self) -> bool {
        let e = self.expectation.clone();
        self.variance == self.second_factorial.clone() + e.clone() - e.clone() * e
    }
}

/// All three moments from the closed forms.
pub fn closed_form_moments<S: Scalar>(
    n: usize,
    model: &GeometricModel<S>,
    set: FormulaSet,
) -> MomentReport<S> {
    let a = ACoeffs::new(model, n);
    MomentReport {
        n,
        q: model.q().clone(),
        expectation: expectation_with(&a, n),
        second_factorial: second_factorial_with(&a, n, set),
        variance: variance::variance_with(&a, n, set),
        source: Source::ClosedForm,
    }
}

/// Default budget for [`check_exact_budget`], in bits of the result's denominator.
pub const EXACT_BITS_CAP: usize = 40_000;

/// Estimated size in bits of the denominators produced by exact evaluation
/// at `(n, q)`: the `1/(1-q^i)` share a common denominator of roughly
/// `0.6 n^2 log2(den q)` bits.
pub fn exact_size_bits(n: usize, q: &Rational) -> usize {
    let big = q.denom().abs().max(q.numer().abs());
    let log2 = big
        .to_string()
        .parse::<f64>()
        .ok()
        .map(f64::log2)
        .filter(|x| x.is_finite())
        .unwrap_or(big.bits() as f64)
        .max(1.0);
    (0.6 * (n * n) as f64 * log2).ceil() as usize
}

/// Refuses exact closed-form evaluation whose estimated size exceeds `cap`.
pub fn check_exact_budget(n: usize, q: &Rational, cap: usize) -> Result<()> {
    let requested = exact_size_bits(n, q);
    if requested > cap {
        return Err(Error::ResourceLimit { what: "estimated exact denominator bits", requested, cap });
    }
    Ok(())
}

/// Relative error above which floating evaluation is abandoned for exact arithmetic.
pub const FLOAT_TOLERANCE: f64 = 1e-9;

/// Floating-point moments for a rational `q`.
///
/// The closed forms are evaluated in `f64` with a running rounding-error
/// bound. When cancellation pushes the estimated relative error of any moment
/// past [`FLOAT_TOLERANCE`] (typically as `q -> 1`), the moments are computed
/// exactly and rounded once, provided that stays within [`EXACT_BITS_CAP`];
/// otherwise a resource error is returned. The flag reports whether the
/// exact fallback was used.
pub fn float_moments(n: usize, q: &Rational, set: FormulaSet) -> Result<(MomentReport<f64>, bool)> {
    let exact_model = GeometricModel::new(q.clone())?;
    let tracked = GeometricModel::new(Tracked::from_f64(q.to_f64()))?;
    let t = closed_form_moments(n, &tracked, set);
    let ill = [&t.expectation, &t.second_factorial, &t.variance]
        .iter()
        .any(|x| x.relative_error().is_nan() || x.relative_error() > FLOAT_TOLERANCE);
    let report = if ill {
        check_exact_budget(n, q, EXACT_BITS_CAP)?;
        let exact = closed_form_moments(n, &exact_model, set);
        MomentReport {
            n,
            q: q.to_f64(),
            expectation: exact.expectation.to_f64(),
            second_factorial: exact.second_factorial.to_f64(),
            variance: exact.variance.to_f64(),
            source: Source::ClosedForm,
        }
    } else {
        MomentReport {
            n,
            q: q.to_f64(),
            expectation: t.expectation.value,
            second_factorial: t.second_factorial.value,
            variance: t.variance.value,
            source: Source::ClosedForm,
        }
    };
    Ok((report, ill))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::One;

    fn model(num: i64, den: i64) -> GeometricModel<Rational> {
        GeometricModel::new(ratio(num, den)).unwrap()
    }

    #[test]
    fn a_coeff_examples() {
        let m = model(1, 2);
        assert_eq!(a_coeff(1, &m).unwrap(), ratio(2, 1));
        assert_eq!(a_coeff(2, &m).unwrap(), ratio(4, 3));
        assert_eq!(a_coeff(3, &m).unwrap(), ratio(8, 7));
        assert!(a_coeff(0, &m).is_err());
    }

    #[test]
    fn indicator_examples() {
        let m = model(1, 2);
        assert_eq!(indicator_probability(Indicator::L, 2, &m).unwrap(), ratio(2, 3));
        assert_eq!(indicator_probability(Indicator::B, 2, &m).unwrap(), ratio(1, 3));
        assert!(indicator_probability(Indicator::R, 1, &m).is_err());
        for q in [ratio(1, 5), ratio(2, 3), ratio(9, 10)] {
            let m = GeometricModel::new(q).unwrap();
            let l = indicator_probability(Indicator::L, 2, &m).unwrap();
            let r = indicator_probability(Indicator::R, 2, &m).unwrap();
            let b = indicator_probability(Indicator::B, 2, &m).unwrap();
            assert_eq!(l + r - b, Rational::one());
        }
    }

    #[test]
    fn expectation_examples() {
        for q in [ratio(1, 5), ratio(1, 2), ratio(7, 8)] {
            let m = GeometricModel::new(q).unwrap();
            assert!(expectation(0, &m).is_zero());
            assert!(expectation(1, &m).is_zero());
            assert_eq!(expectation(2, &m), Rational::one());
        }
        assert_eq!(expectation(3, &model(1, 2)), ratio(20, 7));
    }

    #[test]
    fn expectation_decomposes_by_pairs() {
        for q in [ratio(1, 7), ratio(1, 2), ratio(5, 6)] {
            let m = GeometricModel::new(q).unwrap();
            for n in 0..=25 {
                assert_eq!(expectation(n, &m), expectation_by_pairs(n, &m));
            }
        }
    }

    #[test]
    fn second_factorial_examples() {
        let m = model(1, 2);
        assert!(second_factorial_moment(1, &m, FormulaSet::Corrected).is_zero());
        assert!(second_factorial_moment(2, &m, FormulaSet::Corrected).is_zero());
        assert_eq!(second_factorial_moment(3, &m, FormulaSet::Corrected), ratio(38, 7));
    }

    #[test]
    fn harmonic_examples() {
        assert_eq!(harmonic(0), HarmonicPair { h1: Rational::zero(), h2: Rational::zero() });
        assert_eq!(harmonic(1), HarmonicPair { h1: ratio(1, 1), h2: ratio(1, 1) });
        assert_eq!(harmonic(3), HarmonicPair { h1: ratio(11, 6), h2: ratio(49, 36) });
    }

    #[test]
    fn limit_examples() {
        assert!(expectation_limit(1).is_zero());
        assert_eq!(expectation_limit(2), ratio(1, 1));
        assert_eq!(expectation_limit(3), ratio(8, 3));
        assert!(variance_limit(1).is_zero());
        assert!(variance_limit(2).is_zero());
        assert_eq!(variance_limit(3), ratio(2, 9));
        assert!(expectation_limit(0).is_zero());
        assert!(variance_limit(0).is_zero());
    }

    #[test]
    fn closed_form_report_is_consistent() {
        let r = closed_form_moments(3, &model(1, 2), FormulaSet::Corrected);
        assert_eq!(r.expectation, ratio(20, 7));
        assert_eq!(r.variance, ratio(6, 49));
        assert!(r.is_consistent());
        assert_eq!(r.to_json()["variance"], serde_json::json!("6/49"));
    }

    #[test]
    fn float_moments_track_exact_values() {
        let (r, fell_back) = float_moments(10, &ratio(1, 2), FormulaSet::Corrected).unwrap();
        assert!(!fell_back);
        let exact = closed_form_moments(10, &model(1, 2), FormulaSet::Corrected);
        assert!((r.expectation - exact.expectation.to_f64()).abs() < 1e-12);
        assert!((r.variance - exact.variance.to_f64()).abs() < 1e-9);
    }

    #[test]
    fn float_moments_switch_to_exact_near_one() {
        let q = Rational::one() - ratio(1, 1_000_000);
        let (r, fell_back) = float_moments(40, &q, FormulaSet::Corrected).unwrap();
        assert!(fell_back);
        let exact = closed_form_moments(40, &GeometricModel::new(q).unwrap(), FormulaSet::Corrected);
        assert_eq!(r.variance, exact.variance.to_f64());
        assert!(r.variance > 0.0);
    }

    #[test]
    fn formula_set_parsing() {
        assert_eq!("original".parse::<FormulaSet>().unwrap(), FormulaSet::Original);
        assert_eq!("corrected".parse::<FormulaSet>().unwrap(), FormulaSet::Corrected);
        assert!("printed".parse::<FormulaSet>().is_err());
    }

    #[test]
    fn exact_budget() {
        let half = ratio(1, 2);
        assert_eq!(exact_size_bits(10, &half), 60);
        assert!(check_exact_budget(200, &half, EXACT_BITS_CAP).is_ok());
        let near_one = ratio(999, 1000);
        assert!(check_exact_budget(50, &near_one, EXACT_BITS_CAP).is_ok());
        assert!(matches!(
            check_exact_budget(200, &near_one, EXACT_BITS_CAP),
            Err(Error::ResourceLimit { .. })
        ));
    }

    #[test]
    fn float_refuses_when_fallback_is_too_large() {
        let q = ratio(99_999, 100_000);
        assert!(matches!(
            float_moments(400, &q, FormulaSet::Corrected),
            Err(Error::ResourceLimit { .. })
        ));
    }
}
