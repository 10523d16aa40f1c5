//! Closed-form variance.
//!
//! Both versions share one shape,
//!
//! ```text
//! V = 2p^2 Σ_{i<j} (n+1-j) α(i) a_i a_j
//!   - p^2 (2-p)^2 Σ_i (n+1-i)^2 a_i^2
//!   + p Σ_i (n+1-i) a_i β(n, i)
//!   + n γ
//! ```
//!
//! and differ only in the integer polynomials `α`, `β`, `γ` in `p`. The
//! original polynomials have the right `q -> 1` limit but are wrong for
//! `p > 0` (the value at `n = 3, q = 1/2` is negative).

use super::xi::pair_sum;
use super::{ACoeffs, FormulaSet};
use crate::geometric::GeometricModel;
use crate::scalar::Scalar;

/// `Var[ρ]` for words of length `n`.
pub fn variance<S: Scalar>(n: usize, model: &GeometricModel<S>, set: FormulaSet) -> S {
    variance_with(&ACoeffs::new(model, n), n, set)
}

pub(crate) fn variance_with<S: Scalar>(a: &ACoeffs<S>, n: usize, set: FormulaSet) -> S {
    match set {
        FormulaSet::Original => original(a, n),
        FormulaSet::Corrected => corrected(a, n),
    }
}

fn c<S: Scalar>(v: i64) -> S {
    S::from_i64(v)
}

fn squared_term<S: Scalar>(a: &ACoeffs<S>, n: i64) -> S {
    let p = a.p().clone();
    let two_minus_p = c::<S>(2) - p.clone();
    let sum = (1..=n).fold(S::zero(), |acc, i| {
        let ai = a.at(i);
        acc + c::<S>((n + 1 - i) * (n + 1 - i)) * ai.clone() * ai
    });
    p.clone() * p * two_minus_p.clone() * two_minus_p * sum
}

fn cross_term<S: Scalar>(a: &ACoeffs<S>, n: i64, alpha: impl Fn(i64) -> S) -> S {
    let p = a.p().clone();
    c::<S>(2) * p.clone() * p * pair_sum(a, 1, n, alpha, |j| c(n + 1 - j))
}

fn single_term<S: Scalar>(a: &ACoeffs<S>, n: i64, beta: impl Fn(i64) -> S) -> S {
    let sum = (1..=n).fold(S::zero(), |acc, i| acc + c::<S>(n + 1 - i) * a.at(i) * beta(i));
    a.p().clone() * sum
}

fn original<S: Scalar>(a: &ACoeffs<S>, n: usize) -> S {
    let n = n as i64;
    let p = a.p().clone();
    let p2 = p.powu(2);
    let p3 = p.powu(3);

    // 4i + p(5 - 4i)
    let alpha = |i: i64| c::<S>(4 * i) + p.clone() * c(5 - 4 * i);
    // 6i - 2 + p(-4ni + 4n - 19i + 3i^2 + 7) + 4p^2(ni - n + 3i - 1 - i^2)
    //   + p^3(-ni + n + 2i^2 - 8i + 8)
    let beta = |i: i64| {
        c::<S>(6 * i - 2)
            + p.clone() * c(-4 * n * i + 4 * n - 19 * i + 3 * i * i + 7)
            + c::<S>(4) * p2.clone() * c(n * i - n + 3 * i - 1 - i * i)
            + p3.clone() * c(-n * i + n + 2 * i * i - 8 * i + 8)
    };
    // 5pn - 3p^2 n - 2p^3 n
    let tail = c::<S>(5) * p.clone() * c(n) - c::<S>(3) * p2.clone() * c(n)
        - c::<S>(2) * p3.clone() * c(n);

    cross_term(a, n, alpha) - squared_term(a, n) + single_term(a, n, beta) + tail
}

fn corrected<S: Scalar>(a: &ACoeffs<S>, n: usize) -> S {
    let n = n as i64;
    let p = a.p().clone();
    let p2 = p.powu(2);
    let p3 = p.powu(3);

    // 4i - 2pi
    let alpha = |i: i64| c::<S>(4 * i) - c::<S>(2 * i) * p.clone();
    // 6i - 2 + p(-4ni + 4n - 22i + 4i^2 + 15) + p^2(4ni - 4n + 24i - 20 - 6i^2)
    //   + p^3(-ni + n + 2i^2 - 8i + 8)
    let beta = |i: i64| {
        c::<S>(6 * i - 2)
            + p.clone() * c(-4 * n * i + 4 * n - 22 * i + 4 * i * i + 15)
            + p2.clone() * c(4 * n * i - 4 * n + 24 * i - 20 - 6 * i * i)
            + p3.clone() * c(-n * i + n + 2 * i * i - 8 * i + 8)
    };
    // -pn + 3p^2 n - 2p^3 n
    let tail = c::<S>(3) * p2.clone() * c(n) - p.clone() * c(n) - c::<S>(2) * p3.clone() * c(n);

    cross_term(a, n, alpha) - squared_term(a, n) + single_term(a, n, beta) + tail
}
