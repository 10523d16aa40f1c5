//! Simplified sums `Ξ^kind = Σ_i Θ_i^kind`, one line per basis sum.

use serde::Serialize;

use super::theta::KindTag;
use super::{binom2, ACoeffs, FormulaSet};
use crate::geometric::GeometricModel;
use crate::scalar::Scalar;

/// The single and double sums the `Ξ` lines are built from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Basis {
    /// `Σ_{2<=i,j<=n-2, i+j<=n} a_i a_j C(n+2-i-j, 2)`: disjoint windows.
    Disjoint,
    /// `Σ_{2<=i<j<=n} a_i a_j (n+1-j)(j-i-1)`: strictly nested windows.
    Nested,
    /// `Σ_{3<=i<j<=n} a_i a_j (n+1-j)(i-2)`.
    Crossing,
    /// `Σ_{2<=i<j<=n} a_i a_j (n+1-j)`: windows sharing an endpoint.
    SharedEnd,
    /// `Σ_{3<=i<=n} a_i (i-2)(n+1-i)`.
    Single,
    /// `Σ_{4<=i<=n} a_i C(i-2, 2)(n+1-i)`.
    SinglePairs,
}

impl Basis {
    pub fn eval<S: Scalar>(self, a: &ACoeffs<S>, n: usize) -> S {
        let n = n as i64;
        let int = S::from_i64;
        match self {
            Basis::Disjoint => disjoint_sum(a, n),
            Basis::Nested => {
                pair_sum(a, 2, n, |_| int(1), |j| int((n + 1 - j) * (j - 1)))
                    - pair_sum(a, 2, n, int, |j| int(n + 1 - j))
            }
            Basis::Crossing => pair_sum(a, 3, n, |i| int(i - 2), |j| int(n + 1 - j)),
            Basis::SharedEnd => pair_sum(a, 2, n, |_| int(1), |j| int(n + 1 - j)),
            Basis::Single => (3..=n).fold(S::zero(), |acc, i| acc + a.at(i) * int((i - 2) * (n + 1 - i))),
            Basis::SinglePairs => {
                (4..=n).fold(S::zero(), |acc, i| acc + a.at(i) * int(binom2(i - 2) * (n + 1 - i)))
            }
        }
    }
}

/// `Σ_{lo<=i<j<=n} f(i) a_i g(j) a_j`, accumulated through a running prefix.
pub(crate) fn pair_sum<S: Scalar>(
    a: &ACoeffs<S>,
    lo: i64,
    n: i64,
    f: impl Fn(i64) -> S,
    g: impl Fn(i64) -> S,
) -> S {
    let mut below = S::zero();
    let mut sum = S::zero();
    for j in lo..=n {
        let aj = a.at(j);
        sum = sum + g(j) * aj.clone() * below.clone();
        below = below + f(j) * aj;
    }
    sum
}

/// `Σ_{2<=i,j<=n-2, i+j<=n} a_i a_j C(n+2-i-j, 2)`.
///
/// With `u = n+2-i`, `2 C(u-j, 2) = (u^2-u) - (2u-1) j + j^2`, so each inner
/// sum over `j in 2..=n-i` comes from three prefix moments of `a`.
pub(crate) fn disjoint_sum<S: Scalar>(a: &ACoeffs<S>, n: i64) -> S {
    if n < 4 {
        return S::zero();
    }
    let int = S::from_i64;
    let moments = |k: i64| {
        let mut out = vec![S::zero(); n as usize + 1];
        for j in 2..=n {
            out[j as usize] = out[(j - 1) as usize].clone() + a.at(j) * int(j.pow(k as u32));
        }
        out
    };
    let (m0, m1, m2) = (moments(0), moments(1), moments(2));
    let mut sum = S::zero();
    for i in 2..=n - 2 {
        let u = n + 2 - i;
        let hi = (n - i) as usize;
        let twice = int(u * u - u) * m0[hi].clone() - int(2 * u - 1) * m1[hi].clone() + m2[hi].clone();
        sum = sum + a.at(i) * twice;
    }
    sum / int(2)
}

/// Integer polynomial in `p`, lowest degree first.
type PPoly = &'static [i64];

type Line = (PPoly, Basis);

use Basis::*;

const P1: PPoly = &[0, 1];
const P2: PPoly = &[0, 0, 1];
const P3: PPoly = &[0, 0, 0, 1];
const TWO_P: PPoly = &[0, 2];
const TWO_P2: PPoly = &[0, 0, 2];
const FOUR_P2: PPoly = &[0, 0, 4];
const MINUS_TWO_P2: PPoly = &[0, 0, -2];
const TWO_P3: PPoly = &[0, 0, 0, 2];
const FOUR_P3: PPoly = &[0, 0, 0, 4];
const SIX_P3: PPoly = &[0, 0, 0, 6];
const TWO_P4: PPoly = &[0, 0, 0, 0, 2];
const THREE_P2_PLUS_P3: PPoly = &[0, 0, 3, 1];

const LL_LINES: &[Line] = &[
    (TWO_P2, Disjoint),
    (TWO_P2, Nested),
    (TWO_P2, Crossing),
    (FOUR_P2, SharedEnd),
    (TWO_P, Single),
];

const LR_ORIGINAL: &[Line] = &[
    (TWO_P2, Disjoint),
    (TWO_P2, Nested),
    (FOUR_P2, Crossing),
    (MINUS_TWO_P2, SinglePairs),
    (FOUR_P2, SharedEnd),
    (P2, Single),
    (P1, Single),
];

const LB_ORIGINAL: &[Line] = &[
    (TWO_P3, Disjoint),
    (TWO_P3, Nested),
    (TWO_P3, Crossing),
    (TWO_P3, SharedEnd),
    (THREE_P2_PLUS_P3, Single),
];

const BB_ORIGINAL: &[Line] = &[
    (TWO_P4, Disjoint),
    (TWO_P4, Nested),
    (TWO_P3, SharedEnd),
    (TWO_P4, SinglePairs),
    (FOUR_P3, Single),
];

const LR_CORRECTED: &[Line] = &[
    (TWO_P2, Disjoint),
    (TWO_P2, Nested),
    (TWO_P2, Crossing),
    (FOUR_P2, SharedEnd),
    (P2, Single),
    (P1, Single),
];

const LB_CORRECTED: &[Line] = &[
    (TWO_P3, Disjoint),
    (TWO_P3, Nested),
    (P3, Crossing),
    (P3, SinglePairs),
    (TWO_P3, SharedEnd),
    (THREE_P2_PLUS_P3, Single),
];

const BB_CORRECTED: &[Line] = &[
    (TWO_P4, Disjoint),
    (TWO_P4, Nested),
    (TWO_P4, SinglePairs),
    (SIX_P3, Single),
];

fn lines(kind: KindTag, set: FormulaSet) -> &'static [Line] {
    match (kind, set) {
        (KindTag::LL, _) => LL_LINES,
        (KindTag::LR, FormulaSet::Original) => LR_ORIGINAL,
        (KindTag::LB, FormulaSet::Original) => LB_ORIGINAL,
        (KindTag::BB, FormulaSet::Original) => BB_ORIGINAL,
        (KindTag::LR, FormulaSet::Corrected) => LR_CORRECTED,
        (KindTag::LB, FormulaSet::Corrected) => LB_CORRECTED,
        (KindTag::BB, FormulaSet::Corrected) => BB_CORRECTED,
    }
}

fn eval_poly<S: Scalar>(coeffs: PPoly, p: &S) -> S {
    coeffs
        .iter()
        .rev()
        .fold(S::zero(), |acc, &c| acc * p.clone() + S::from_i64(c))
}

/// `Ξ^kind` for words of length `n`.
pub fn xi<S: Scalar>(kind: KindTag, n: usize, model: &GeometricModel<S>, set: FormulaSet) -> S {
    let a = ACoeffs::new(model, n);
    xi_with(&a, kind, n, set)
}

pub(crate) fn xi_with<S: Scalar>(a: &ACoeffs<S>, kind: KindTag, n: usize, set: FormulaSet) -> S {
    lines(kind, set).iter().fold(S::zero(), |acc, &(poly, basis)| {
        acc + eval_poly(poly, a.p()) * basis.eval(a, n)
    })
}
