//! Range contributions to the indicator cross-products.
//!
//! The set of ordered pairs of distinct position pairs
//! `{(j,k), (l,m) : j<k, l<m, (j,k) != (l,m)}` splits into twelve disjoint
//! ranges by the relative order of `j, k, l, m`. For each range and each of the
//! products `L_jk L_lm`, `L_jk R_lm`, `L_jk B_lm`, `B_jk B_lm` there is a closed
//! form for the expected sum over the range, written with `a_i = 1/(1-q^i)`.

use std::fmt;

use serde::Serialize;

use super::{ACoeffs, FormulaSet};
use crate::error::{invalid, Result};
use crate::geometric::GeometricModel;
use crate::scalar::Scalar;

/// One of the twelve index ranges `Λ1 … Λ12`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct RangeId(u8);

impl RangeId {
    pub const ALL: [RangeId; 12] = [
        RangeId(1),
        RangeId(2),
        RangeId(3),
        RangeId(4),
        RangeId(5),
        RangeId(6),
        RangeId(7),
        RangeId(8),
        RangeId(9),
        RangeId(10),
        RangeId(11),
        RangeId(12),
    ];

    pub fn new(index: u8) -> Result<Self> {
        if (1..=12).contains(&index) {
            Ok(Self(index))
        } else {
            invalid(format!("range index must be 1..=12, got {index}"))
        }
    }

    pub fn index(self) -> u8 {
        self.0
    }

    /// Whether `(j,k,l,m)` lies in this range. Pairs are assumed ordered
    /// (`j<k`, `l<m`).
    pub fn contains(self, j: usize, k: usize, l: usize, m: usize) -> bool {
        match self.0 {
            1 => j < k && k < l && l < m,
            2 => j < l && l < m && m < k,
            3 => j < l && l < k && k < m,
            4 => j < k && k == l && l < m,
            5 => j < l && l < m && m == k,
            6 => j == l && l < k && k < m,
            7 => l < m && m < j && j < k,
            8 => l < j && j < k && k < m,
            9 => l < j && j < m && m < k,
            10 => l < m && m == j && j < k,
            11 => l < j && j < k && k == m,
            12 => l == j && j < m && m < k,
            _ => unreachable!(),
        }
    }

    /// The unique range holding `(j,k,l,m)`, or `None` when `(j,k) = (l,m)`.
    pub fn classify(j: usize, k: usize, l: usize, m: usize) -> Option<RangeId> {
        Self::ALL.into_iter().find(|r| r.contains(j, k, l, m))
    }

    /// All `(j,k,l,m)` in this range with positions in `1..=n`.
    pub fn tuples(self, n: usize) -> impl Iterator<Item = (usize, usize, usize, usize)> {
        ordered_pair_pairs(n).filter(move |&(j, k, l, m)| self.contains(j, k, l, m))
    }
}

impl fmt::Display for RangeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Λ{}", self.0)
    }
}

/// `((j,k),(l,m))` over all ordered pairs of distinct position pairs.
pub fn ordered_pair_pairs(n: usize) -> impl Iterator<Item = (usize, usize, usize, usize)> {
    let pairs: Vec<(usize, usize)> =
        (1..=n).flat_map(|j| (j + 1..=n).map(move |k| (j, k))).collect();
    let second = pairs.clone();
    pairs.into_iter().flat_map(move |(j, k)| {
        second
            .clone()
            .into_iter()
            .filter(move |&(l, m)| (l, m) != (j, k))
            .map(move |(l, m)| (j, k, l, m))
    })
}

/// Which product of indicators a contribution belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum KindTag {
    LL,
    LR,
    LB,
    BB,
}

impl KindTag {
    pub const ALL: [KindTag; 4] = [KindTag::LL, KindTag::LR, KindTag::LB, KindTag::BB];

    /// The indicator product `X_jk · Y_lm` evaluated from the endpoint flags
    /// `(L, R)` of each pair.
    pub fn product(self, first: (bool, bool), second: (bool, bool)) -> bool {
        let (l1, r1) = first;
        let (l2, r2) = second;
        match self {
            KindTag::LL => l1 && l2,
            KindTag::LR => l1 && r2,
            KindTag::LB => l1 && l2 && r2,
            KindTag::BB => l1 && r1 && l2 && r2,
        }
    }
}

impl fmt::Display for KindTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// Window lengths appearing as `a` indices: `Span::KJ` is `k+1-j`, and so on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Span {
    KJ,
    ML,
    MJ,
    MK,
    KL,
}

impl Span {
    fn len(self, j: usize, k: usize, l: usize, m: usize) -> usize {
        match self {
            Span::KJ => k + 1 - j,
            Span::ML => m + 1 - l,
            Span::MJ => m + 1 - j,
            Span::MK => m + 1 - k,
            Span::KL => k + 1 - l,
        }
    }
}

type Term = (i64, &'static [Span]);

/// `p^p_pow · Σ_{domain} Σ_terms coeff · Π a_span`.
#[derive(Clone, Copy, Debug)]
struct Entry {
    domain: u8,
    p_pow: u32,
    terms: &'static [Term],
}

const fn e(domain: u8, p_pow: u32, terms: &'static [Term]) -> Entry {
    Entry { domain, p_pow, terms }
}

use Span::*;

const KJ_ML: &[Term] = &[(1, &[KJ, ML])];
const MJ_ML: &[Term] = &[(1, &[MJ, ML])];
const MJ_MK: &[Term] = &[(1, &[MJ, MK])];
const MJ_KJ: &[Term] = &[(1, &[MJ, KJ])];
const MJ_ONLY: &[Term] = &[(1, &[MJ])];
const KL_ONLY: &[Term] = &[(1, &[KL])];
const LR_CROSS: &[Term] = &[(1, &[MJ, ML]), (1, &[MJ, KJ]), (-1, &[MJ])];
const LR_SHARED_END: &[Term] = &[(1, &[MJ, MK]), (1, &[MJ, KJ]), (-1, &[MJ])];

/// Entries as originally stated. Where a range is declared equal to another
/// (e.g. the seventh equal to the first) the other range's sum is used.
fn original_entry(range: u8, kind: KindTag) -> Entry {
    match (kind, range) {
        (KindTag::LL, 1 | 7) => e(1, 2, KJ_ML),
        (KindTag::LL, 2 | 8) => e(2, 2, KJ_ML),
        (KindTag::LL, 3 | 9) => e(3, 2, MJ_ML),
        (KindTag::LL, 4 | 10) => e(4, 2, MJ_MK),
        (KindTag::LL, 5 | 11) => e(5, 2, MJ_ML),
        (KindTag::LL, 6 | 12) => e(6, 1, MJ_ONLY),

        (KindTag::LR, 1 | 7) => e(1, 2, KJ_ML),
        (KindTag::LR, 2 | 8) => e(2, 2, KJ_ML),
        (KindTag::LR, 3 | 9) => e(3, 2, LR_CROSS),
        (KindTag::LR, 4) => e(4, 2, LR_SHARED_END),
        // stated over j<l<m with k = m
        (KindTag::LR, 5) => e(5, 2, MJ_ML),
        // stated over j<k<m with l = j
        (KindTag::LR, 6) => e(6, 2, MJ_KJ),
        (KindTag::LR, 10) => e(10, 1, KL_ONLY),
        // both stated over l=j<m<k
        (KindTag::LR, 11 | 12) => e(12, 2, KL_ONLY),

        (KindTag::LB, 1 | 7) => e(1, 3, KJ_ML),
        (KindTag::LB, 2 | 8) => e(2, 3, KJ_ML),
        (KindTag::LB, 3 | 9) => e(3, 3, MJ_ML),
        (KindTag::LB, 4) => e(4, 3, MJ_MK),
        (KindTag::LB, 5) => e(5, 3, MJ_ML),
        (KindTag::LB, 6) => e(6, 2, MJ_ONLY),
        (KindTag::LB, 10) => e(10, 2, KL_ONLY),
        (KindTag::LB, 11) => e(11, 3, KL_ONLY),
        (KindTag::LB, 12) => e(12, 2, KL_ONLY),

        (KindTag::BB, 1 | 7) => e(1, 4, KJ_ML),
        (KindTag::BB, 2 | 8) => e(2, 4, KJ_ML),
        (KindTag::BB, 3 | 9) => e(3, 4, MJ_ONLY),
        (KindTag::BB, 4 | 10) => e(4, 3, MJ_ONLY),
        (KindTag::BB, 5 | 11) => e(5, 3, MJ_ML),
        (KindTag::BB, 6 | 12) => e(6, 3, MJ_ONLY),

        _ => unreachable!("range index validated by RangeId"),
    }
}

/// Entries that agree with exhaustive enumeration. Four differ from the
/// original statement:
///
/// * `Λ9, LR` and `Λ9, LB`: with `l<j<m<k`, `L_jk` and `R_lm` force
///   `π_j = π_m = min(π_l..π_k)`, so a single `a_{k+1-l}` remains.
/// * `Λ5, BB` and `Λ11, BB`: three letters tie at the minimum of the outer
///   window, giving `p^3 a_{m+1-j}` without a second factor.
fn corrected_entry(range: u8, kind: KindTag) -> Entry {
    match (kind, range) {
        (KindTag::LR, 9) => e(9, 2, KL_ONLY),
        (KindTag::LB, 9) => e(9, 3, KL_ONLY),
        (KindTag::BB, 5 | 11) => e(5, 3, MJ_ONLY),
        _ => original_entry(range, kind),
    }
}

fn entry(set: FormulaSet, range: RangeId, kind: KindTag) -> Entry {
    match set {
        FormulaSet::Original => original_entry(range.0, kind),
        FormulaSet::Corrected => corrected_entry(range.0, kind),
    }
}

/// Closed-form contribution `Θ_range^kind` for words of length `n`.
pub fn theta<S: Scalar>(
    range: RangeId,
    kind: KindTag,
    n: usize,
    model: &GeometricModel<S>,
    set: FormulaSet,
) -> S {
    let a = ACoeffs::new(model, n);
    theta_with(&a, range, kind, n, set)
}

pub(crate) fn theta_with<S: Scalar>(
    a: &ACoeffs<S>,
    range: RangeId,
    kind: KindTag,
    n: usize,
    set: FormulaSet,
) -> S {
    let entry = entry(set, range, kind);
    let domain = RangeId(entry.domain);
    let mut sum = S::zero();
    for (j, k, l, m) in domain.tuples(n) {
        for &(coeff, spans) in entry.terms {
            let mut term = S::from_i64(coeff);
            for span in spans {
                term = term * a.get(span.len(j, k, l, m)).clone();
            }
            sum = sum + term;
        }
    }
    a.p().powu(entry.p_pow) * sum
}
