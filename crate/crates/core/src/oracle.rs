//! Exact ground truth by finite enumeration.
//!
//! Nothing in this module calls the closed forms in [`crate::moments`]; it is
//! built only from the definition of ρ and from pattern probabilities. Each
//! pattern's statistics (ρ and the 12×4 indicator-product counts) are integers,
//! and the pattern probability depends only on the multiplicity composition
//! `(m_1, …, m_d)`, so patterns are tallied per composition and the exact
//! rational weighting happens once per composition.

use std::collections::{BTreeMap, HashMap};

use num_bigint::BigInt;
use num_traits::Zero;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::geometric::{enumerate_patterns_capped, pattern_probability, GeometricModel, Pattern};
use crate::moments::{KindTag, MomentReport, RangeId, Source};
use crate::pathlen::{rho_fast, rho_naive, Word};
use crate::scalar::{format_rational, Rational};

/// Size limits for exhaustive enumeration.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OracleCaps {
    /// Longest word length for pattern enumeration (Fubini(7) = 47293).
    pub pattern_len: usize,
    /// Longest permutation length (8! = 40320).
    pub permutation_len: usize,
}

impl Default for OracleCaps {
    fn default() -> Self {
        Self { pattern_len: 7, permutation_len: 8 }
    }
}

/// Exact distribution of ρ: value ↦ probability.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Pmf {
    entries: BTreeMap<u64, Rational>,
}

impl Pmf {
    pub fn entries(&self) -> &BTreeMap<u64, Rational> {
        &self.entries
    }

    pub fn get(&self, value: u64) -> Rational {
        self.entries.get(&value).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn total(&self) -> Rational {
        self.entries.values().fold(Rational::zero(), |acc, p| acc + p)
    }

    pub fn min_value(&self) -> Option<u64> {
        self.entries.keys().next().copied()
    }

    pub fn max_value(&self) -> Option<u64> {
        self.entries.keys().next_back().copied()
    }

    /// `Σ k·p_k`.
    pub fn mean(&self) -> Rational {
        self.entries
            .iter()
            .fold(Rational::zero(), |acc, (&k, p)| acc + p * Rational::from_integer(k.into()))
    }

    /// `Σ k(k-1)·p_k`.
    pub fn second_factorial(&self) -> Rational {
        self.entries.iter().fold(Rational::zero(), |acc, (&k, p)| {
            acc + p * Rational::from_integer(BigInt::from(k) * BigInt::from(k.saturating_sub(1)))
        })
    }

    pub fn to_json(&self) -> serde_json::Value {
        let map: serde_json::Map<String, serde_json::Value> = self
            .entries
            .iter()
            .map(|(k, p)| (k.to_string(), serde_json::Value::String(format_rational(p))))
            .collect();
        serde_json::Value::Object(map)
    }
}

/// Integer tallies of one multiplicity composition.
#[derive(Clone, Debug, Default)]
struct Tally {
    patterns: u64,
    rho: BTreeMap<u64, u64>,
    range_counts: [[u64; 4]; 12],
}

impl Tally {
    fn merge(&mut self, other: Tally) {
        self.patterns += other.patterns;
        for (k, c) in other.rho {
            *self.rho.entry(k).or_insert(0) += c;
        }
        for (mine, theirs) in self.range_counts.iter_mut().zip(other.range_counts) {
            for (a, b) in mine.iter_mut().zip(theirs) {
                *a += b;
            }
        }
    }
}

/// Per-composition statistics of every pattern of length `n`.
///
/// Build once, then weight for as many `q` values as needed.
#[derive(Clone, Debug)]
pub struct PatternStats {
    n: usize,
    // keyed by the multiplicity composition; value carries one representative
    groups: BTreeMap<Vec<usize>, (Pattern, Tally)>,
}

fn pattern_tally(pattern: &Pattern, tuples: &[(usize, usize, usize)], pairs: &[(usize, usize)]) -> Tally {
    let word = pattern.to_word();
    let letters = word.letters();
    let flags: Vec<(bool, bool)> = pairs
        .iter()
        .map(|&(j, k)| {
            let min = *letters[j - 1..k].iter().min().unwrap();
            (letters[j - 1] == min, letters[k - 1] == min)
        })
        .collect();

    let mut tally = Tally { patterns: 1, ..Tally::default() };
    tally.rho.insert(rho_naive(&word).rho, 1);
    for &(first, second, range) in tuples {
        for (slot, kind) in KindTag::ALL.iter().enumerate() {
            if kind.product(flags[first], flags[second]) {
                tally.range_counts[range][slot] += 1;
            }
        }
    }
    tally
}

impl PatternStats {
    pub fn new(n: usize) -> Result<Self> {
        Self::with_caps(n, &OracleCaps::default())
    }

    pub fn with_caps(n: usize, caps: &OracleCaps) -> Result<Self> {
        if n == 0 {
            return invalid("the oracle needs n >= 1");
        }
        if n > caps.pattern_len {
            return Err(Error::ResourceLimit {
                what: "oracle word length",
                requested: n,
                cap: caps.pattern_len,
            });
        }
        let patterns = enumerate_patterns_capped(n, caps.pattern_len)?;

        let pairs: Vec<(usize, usize)> =
            (1..=n).flat_map(|j| (j + 1..=n).map(move |k| (j, k))).collect();
        let mut tuples = Vec::new();
        for (a, &(j, k)) in pairs.iter().enumerate() {
            for (b, &(l, m)) in pairs.iter().enumerate() {
                if let Some(range) = RangeId::classify(j, k, l, m) {
                    tuples.push((a, b, range.index() as usize - 1));
                }
            }
        }

        let groups = patterns
            .par_iter()
            .fold(HashMap::new, |mut acc: HashMap<Vec<usize>, (Pattern, Tally)>, pattern| {
                let tally = pattern_tally(pattern, &tuples, &pairs);
                acc.entry(pattern.multiplicities())
                    .and_modify(|(_, t)| t.merge(tally.clone()))
                    .or_insert_with(|| (pattern.clone(), tally));
                acc
            })
            .reduce(HashMap::new, |mut left, right| {
                for (key, (rep, tally)) in right {
                    match left.get_mut(&key) {
                        Some((_, t)) => t.merge(tally),
                        None => {
                            left.insert(key, (rep, tally));
                        }
                    }
                }
                left
            });

        Ok(Self { n, groups: groups.into_iter().collect() })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn pattern_count(&self) -> u64 {
        self.groups.values().map(|(_, t)| t.patterns).sum()
    }

    fn weighted<'a>(
        &'a self,
        model: &'a GeometricModel<Rational>,
    ) -> impl Iterator<Item = (Rational, &'a Tally)> + 'a {
        self.groups
            .values()
            .map(move |(rep, tally)| (pattern_probability(rep, model), tally))
    }

    /// Sum of all pattern probabilities; exactly 1 when the pattern
    /// probabilities are right.
    pub fn total_probability(&self, model: &GeometricModel<Rational>) -> Rational {
        self.weighted(model).fold(Rational::zero(), |acc, (p, t)| {
            acc + p * Rational::from_integer(t.patterns.into())
        })
    }

    pub fn distribution(&self, model: &GeometricModel<Rational>) -> Pmf {
        let mut entries: BTreeMap<u64, Rational> = BTreeMap::new();
        for (p, tally) in self.weighted(model) {
            for (&value, &count) in &tally.rho {
                *entries.entry(value).or_insert_with(Rational::zero) +=
                    p.clone() * Rational::from_integer(count.into());
            }
        }
        entries.retain(|_, p| !p.is_zero());
        Pmf { entries }
    }

    pub fn moments(&self, model: &GeometricModel<Rational>) -> MomentReport<Rational> {
        let pmf = self.distribution(model);
        let expectation = pmf.mean();
        let second_factorial = pmf.second_factorial();
        let variance = second_factorial.clone() + expectation.clone() - expectation.clone() * expectation.clone();
        MomentReport {
            n: self.n,
            q: model.q().clone(),
            expectation,
            second_factorial,
            variance,
            source: Source::Oracle,
        }
    }

    /// `E[Σ_{(j,k,l,m) ∈ range} X_jk Y_lm]` for the product selected by `kind`.
    pub fn range_sum(&self, range: RangeId, kind: KindTag, model: &GeometricModel<Rational>) -> Rational {
        let r = range.index() as usize - 1;
        let slot = kind_slot(kind);
        self.weighted(model).fold(Rational::zero(), |acc, (p, t)| {
            acc + p * Rational::from_integer(t.range_counts[r][slot].into())
        })
    }

    /// All 48 range sums, indexed `[range - 1][kind]` in [`KindTag::ALL`] order.
    pub fn range_sums(&self, model: &GeometricModel<Rational>) -> Vec<[Rational; 4]> {
        let mut out: Vec<[Rational; 4]> =
            (0..12).map(|_| std::array::from_fn(|_| Rational::zero())).collect();
        for (p, t) in self.weighted(model) {
            for (r, row) in out.iter_mut().enumerate() {
                for (slot, cell) in row.iter_mut().enumerate() {
                    let c = t.range_counts[r][slot];
                    if c > 0 {
                        *cell += p.clone() * Rational::from_integer(c.into());
                    }
                }
            }
        }
        out
    }
}

fn kind_slot(kind: KindTag) -> usize {
    KindTag::ALL.iter().position(|&k| k == kind).unwrap()
}

/// Coefficients of the probability generating function of ρ for `(n, q)`.
pub fn exact_distribution(n: usize, model: &GeometricModel<Rational>) -> Result<Pmf> {
    Ok(PatternStats::new(n)?.distribution(model))
}

pub fn exact_moments(n: usize, model: &GeometricModel<Rational>) -> Result<MomentReport<Rational>> {
    Ok(PatternStats::new(n)?.moments(model))
}

pub fn exact_range_sum(
    range: RangeId,
    kind: KindTag,
    n: usize,
    model: &GeometricModel<Rational>,
) -> Result<Rational> {
    Ok(PatternStats::new(n)?.range_sum(range, kind, model))
}

/// Mean and variance of ρ over all permutations of length `n`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PermutationMoments {
    #[serde(serialize_with = "crate::report::ser_rational")]
    pub expectation: Rational,
    #[serde(serialize_with = "crate::report::ser_rational")]
    pub variance: Rational,
}

pub fn permutation_moments(n: usize) -> Result<PermutationMoments> {
    permutation_moments_capped(n, OracleCaps::default().permutation_len)
}

pub fn permutation_moments_capped(n: usize, cap: usize) -> Result<PermutationMoments> {
    if n == 0 {
        return invalid("permutation moments need n >= 1");
    }
    if n > cap {
        return Err(Error::ResourceLimit { what: "permutation length", requested: n, cap });
    }
    let mut perm: Vec<u64> = (1..=n as u64).collect();
    let (mut count, mut sum, mut sum_sq) = (0u64, 0u64, 0u64);
    loop {
        let rho = rho_fast(&Word::new(perm.clone()).expect("letters >= 1"));
        count += 1;
        sum += rho;
        sum_sq += rho * rho;
        if !next_permutation(&mut perm) {
            break;
        }
    }
    let total = Rational::from_integer(count.into());
    let expectation = Rational::from_integer(sum.into()) / total.clone();
    let variance = Rational::from_integer(sum_sq.into()) / total - expectation.clone() * expectation.clone();
    Ok(PermutationMoments { expectation, variance })
}

/// Lexicographic successor; false once the last permutation is reached.
fn next_permutation(v: &mut [u64]) -> bool {
    let Some(i) = (1..v.len()).rev().find(|&i| v[i - 1] < v[i]) else {
        return false;
    };
    let j = (i..v.len()).rev().find(|&j| v[j] > v[i - 1]).unwrap();
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}
