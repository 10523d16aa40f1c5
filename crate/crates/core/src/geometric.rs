//! Geometric letters, word sampling and weak-order patterns.
//!
//! Every indicator of the path-length parameter depends only on the relative
//! order of letters (with ties), so the exact oracle sums over surjective rank
//! words ("patterns") instead of over the infinitely many words.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;
use rand_distr::{Distribution, Geometric};
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::pathlen::Word;
use crate::scalar::Scalar;

/// Longest word length for which `enumerate_patterns` materializes the list.
/// Fubini(8) = 545835.
pub const MAX_PATTERN_LEN: usize = 8;

/// Letter distribution `P(i) = p q^(i-1)` for `i >= 1`, with `p = 1 - q`.
#[derive(Clone, Debug, PartialEq)]
pub struct GeometricModel<S> {
    q: S,
    p: S,
}

impl<S: Scalar> GeometricModel<S> {
    pub fn new(q: S) -> Result<Self> {
        if !(q > S::zero() && q < S::one()) {
            return invalid(format!(
                "q must lie strictly between 0 and 1 (got {:?}); q = 1 is the permutation limit",
                q
            ));
        }
        let p = S::one() - q.clone();
        Ok(Self { q, p })
    }

    pub fn q(&self) -> &S {
        &self.q
    }

    pub fn p(&self) -> &S {
        &self.p
    }

    /// `P(letter = i)`.
    pub fn letter_probability(&self, i: u64) -> S {
        assert!(i >= 1, "letters start at 1");
        self.p.clone() * self.q.powu((i - 1) as u32)
    }

    pub fn to_f64(&self) -> GeometricModel<f64> {
        GeometricModel { q: self.q.to_f64(), p: self.p.to_f64() }
    }
}

/// Deterministic random stream for chunk `chunk` of a run seeded with `seed`.
pub fn substream(seed: u64, chunk: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk);
    rng
}

/// Geometric letter sampler.
#[derive(Clone, Copy, Debug)]
pub struct LetterSampler {
    failures: Geometric,
}

impl LetterSampler {
    pub fn new<S: Scalar>(model: &GeometricModel<S>) -> Self {
        let p = model.p().to_f64();
        let failures = Geometric::new(p).expect("0 < p < 1 was validated by the model");
        Self { failures }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        // number of failures before the first success, shifted to start at 1
        self.failures.sample(rng).saturating_add(1)
    }

    pub fn fill<R: Rng + ?Sized>(&self, rng: &mut R, buf: &mut Vec<u64>, n: usize) {
        buf.clear();
        buf.extend((0..n).map(|_| self.sample(rng)));
    }
}

/// `n` i.i.d. geometric letters drawn from `rng`.
pub fn sample_word<S: Scalar, R: Rng + ?Sized>(model: &GeometricModel<S>, n: usize, rng: &mut R) -> Word {
    let sampler = LetterSampler::new(model);
    let mut letters = Vec::with_capacity(n);
    sampler.fill(rng, &mut letters, n);
    Word::new(letters).expect("sampled letters are >= 1")
}

/// A surjective rank word: each of `1..=d` occurs at least once.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Pattern {
    ranks: Vec<u32>,
}

impl Pattern {
    pub fn new(ranks: Vec<u32>) -> Result<Self> {
        if ranks.is_empty() {
            return invalid("a pattern must be nonempty");
        }
        let d = *ranks.iter().max().unwrap() as usize;
        let mut seen = vec![false; d + 1];
        for &r in &ranks {
            if r == 0 {
                return invalid("ranks start at 1");
            }
            seen[r as usize] = true;
        }
        if !seen[1..].iter().all(|&s| s) {
            return invalid(format!("ranks {ranks:?} are not surjective onto 1..={d}"));
        }
        Ok(Self { ranks })
    }

    pub fn ranks(&self) -> &[u32] {
        &self.ranks
    }

    pub fn len(&self) -> usize {
        self.ranks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ranks.is_empty()
    }

    /// Number of distinct ranks.
    pub fn depth(&self) -> usize {
        *self.ranks.iter().max().unwrap() as usize
    }

    /// `m_t` for `t = 1..=d` (index 0 holds `m_1`).
    pub fn multiplicities(&self) -> Vec<usize> {
        let mut m = vec![0; self.depth()];
        for &r in &self.ranks {
            m[r as usize - 1] += 1;
        }
        m
    }

    /// `M_r = Σ_{t>=r} m_t` for `r = 1..=d`.
    pub fn tail_counts(&self) -> Vec<usize> {
        let m = self.multiplicities();
        let mut tails = vec![0; m.len()];
        let mut acc = 0;
        for r in (0..m.len()).rev() {
            acc += m[r];
            tails[r] = acc;
        }
        tails
    }

    pub fn to_word(&self) -> Word {
        Word::new(self.ranks.iter().map(|&r| u64::from(r)).collect()).expect("ranks are >= 1")
    }
}

/// Order-isomorphic compression of a nonempty word.
pub fn pattern_of(word: &Word) -> Result<Pattern> {
    if word.is_empty() {
        return invalid("the empty word has no pattern");
    }
    let mut values: Vec<u64> = word.letters().to_vec();
    values.sort_unstable();
    values.dedup();
    let ranks = word
        .letters()
        .iter()
        .map(|x| values.binary_search(x).unwrap() as u32 + 1)
        .collect();
    Ok(Pattern { ranks })
}

/// Ordered Bell number: the count of surjective rank words of length `n`.
pub fn fubini(n: usize) -> u64 {
    let mut binom = vec![vec![0u64; n + 1]; n + 1];
    for i in 0..=n {
        binom[i][0] = 1;
        for k in 1..=i {
            binom[i][k] = binom[i - 1][k - 1] + if k < i { binom[i - 1][k] } else { 0 };
        }
    }
    let mut a = vec![0u64; n + 1];
    a[0] = 1;
    for i in 1..=n {
        a[i] = (1..=i).map(|k| binom[i][k] * a[i - k]).sum();
    }
    a[n]
}

/// All surjective rank words of length `n`, in lexicographic order.
pub fn enumerate_patterns(n: usize) -> Result<Vec<Pattern>> {
    enumerate_patterns_capped(n, MAX_PATTERN_LEN)
}

pub fn enumerate_patterns_capped(n: usize, cap: usize) -> Result<Vec<Pattern>> {
    if n == 0 {
        return invalid("patterns have length >= 1");
    }
    if n > cap {
        return Err(Error::ResourceLimit { what: "pattern length", requested: n, cap });
    }
    let mut out = Vec::with_capacity(fubini(n) as usize);
    let mut counts = vec![0usize; n + 1];
    let mut current = Vec::with_capacity(n);
    extend_patterns(n, &mut current, &mut counts, 0, 0, &mut out);
    Ok(out)
}

// `distinct` ranks are in use, the largest is `max`; values below `max` that
// are unused still have to appear in the remaining slots.
fn extend_patterns(
    n: usize,
    current: &mut Vec<u32>,
    counts: &mut [usize],
    distinct: usize,
    max: usize,
    out: &mut Vec<Pattern>,
) {
    let remaining = n - current.len();
    if remaining == 0 {
        if distinct == max {
            out.push(Pattern { ranks: current.clone() });
        }
        return;
    }
    for v in 1..=n {
        let new_distinct = distinct + usize::from(counts[v] == 0);
        let new_max = max.max(v);
        if new_max - new_distinct > remaining - 1 {
            continue;
        }
        counts[v] += 1;
        current.push(v as u32);
        extend_patterns(n, current, counts, new_distinct, new_max, out);
        current.pop();
        counts[v] -= 1;
    }
}

/// Probability that `n` i.i.d. geometric letters have the given weak order:
/// `p^n · q^(Σ (t-1) m_t) · Π_r 1/(1 - q^{M_r})`.
///
/// Substituting gaps `g_1 = v_1 - 1 ≥ 0`, `g_t = v_t - v_{t-1} - 1 ≥ 0` turns
/// the sum over increasing values into independent geometric series, one per
/// tail count.
pub fn pattern_probability<S: Scalar>(pattern: &Pattern, model: &GeometricModel<S>) -> S {
    let m = pattern.multiplicities();
    let shift: usize = m.iter().enumerate().map(|(t, &mt)| t * mt).sum();
    let mut value = model.p().powu(pattern.len() as u32) * model.q().powu(shift as u32);
    for tail in pattern.tail_counts() {
        value = value / (S::one() - model.q().powu(tail as u32));
    }
    value
}

/// Truncated pattern sum with every letter at most `cap`.
#[derive(Clone, Debug, PartialEq)]
pub struct TruncatedSum<S> {
    pub value: S,
    /// `n · q^cap`, a union bound on the omitted mass.
    pub tail_bound: S,
}

/// Exact sum over all letter assignments consistent with `pattern` whose
/// largest letter is at most `cap`.
pub fn pattern_probability_truncated<S: Scalar>(
    pattern: &Pattern,
    model: &GeometricModel<S>,
    cap: u64,
) -> Result<TruncatedSum<S>> {
    let m = pattern.multiplicities();
    let d = m.len();
    if cap < d as u64 {
        return invalid(format!("cap {cap} is below the pattern depth {d}"));
    }
    let cap = cap as usize;
    // weights[v-1] = P(letter = v)
    let weights: Vec<S> = (1..=cap as u64).map(|v| model.letter_probability(v)).collect();

    // ways[v-1]: total weight of assigning ranks 1..=t with rank t at value v
    let mut ways: Vec<S> = weights.iter().map(|w| w.powu(m[0] as u32)).collect();
    for &mt in &m[1..] {
        let mut next = vec![S::zero(); cap];
        let mut below = S::zero();
        for v in 0..cap {
            next[v] = below.clone() * weights[v].powu(mt as u32);
            below = below + ways[v].clone();
        }
        ways = next;
    }
    let value = ways.into_iter().fold(S::zero(), |acc, x| acc + x);
    let tail_bound = S::from_i64(pattern.len() as i64) * model.q().powu(cap as u32);
    Ok(TruncatedSum { value, tail_bound })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{ratio, Rational};
    use num_traits::{One, Zero};
    use proptest::prelude::*;

    fn pat(r: &[u32]) -> Pattern {
        Pattern::new(r.to_vec()).unwrap()
    }

    fn half() -> GeometricModel<Rational> {
        GeometricModel::new(ratio(1, 2)).unwrap()
    }

    #[test]
    fn model_rejects_out_of_range_q() {
        assert!(GeometricModel::new(ratio(0, 1)).is_err());
        assert!(GeometricModel::new(ratio(1, 1)).is_err());
        assert!(GeometricModel::new(ratio(3, 2)).is_err());
        assert!(GeometricModel::new(-0.5f64).is_err());
        assert_eq!(*half().p(), ratio(1, 2));
    }

    #[test]
    fn pattern_of_examples() {
        let w = |s: &str| s.parse::<Word>().unwrap();
        assert_eq!(pattern_of(&w("3,1,2")).unwrap().ranks(), &[3, 1, 2]);
        assert_eq!(pattern_of(&w("5,9,5")).unwrap().ranks(), &[1, 2, 1]);
        assert_eq!(pattern_of(&w("7")).unwrap().ranks(), &[1]);
        assert!(pattern_of(&Word::empty()).is_err());
    }

    #[test]
    fn pattern_validation() {
        assert!(Pattern::new(vec![]).is_err());
        assert!(Pattern::new(vec![1, 3]).is_err());
        assert!(Pattern::new(vec![0, 1]).is_err());
        let p = pat(&[2, 1, 2, 3]);
        assert_eq!(p.multiplicities(), vec![1, 2, 1]);
        assert_eq!(p.tail_counts(), vec![4, 3, 1]);
    }

    #[test]
    fn small_enumerations() {
        let ranks = |n| -> Vec<Vec<u32>> {
            enumerate_patterns(n).unwrap().into_iter().map(|p| p.ranks).collect()
        };
        assert_eq!(ranks(1), vec![vec![1]]);
        assert_eq!(ranks(2), vec![vec![1, 1], vec![1, 2], vec![2, 1]]);
        assert_eq!(ranks(3).len(), 13);
        assert!(enumerate_patterns(0).is_err());
        assert!(matches!(
            enumerate_patterns(MAX_PATTERN_LEN + 1),
            Err(Error::ResourceLimit { .. })
        ));
    }

    #[test]
    fn enumeration_matches_brute_force() {
        for n in 1..=5usize {
            let brute: Vec<Vec<u32>> = (0..n.pow(n as u32))
                .map(|mut code| {
                    let mut v = vec![0u32; n];
                    for slot in v.iter_mut().rev() {
                        *slot = (code % n) as u32 + 1;
                        code /= n;
                    }
                    v
                })
                .filter(|v| Pattern::new(v.clone()).is_ok())
                .collect();
            let got: Vec<Vec<u32>> =
                enumerate_patterns(n).unwrap().into_iter().map(|p| p.ranks).collect();
            assert_eq!(got, brute, "n = {n}");
            assert_eq!(got.len() as u64, fubini(n));
        }
    }

    #[test]
    fn probability_examples() {
        let q13 = GeometricModel::new(ratio(1, 3)).unwrap();
        assert_eq!(pattern_probability(&pat(&[1]), &q13), Rational::one());
        assert_eq!(pattern_probability(&pat(&[1, 1]), &half()), ratio(1, 3));
        assert_eq!(pattern_probability(&pat(&[1, 2]), &half()), ratio(1, 3));
        assert_eq!(pattern_probability(&pat(&[2, 1]), &half()), ratio(1, 3));
    }

    #[test]
    fn normalization_is_exact() {
        for q in [ratio(1, 5), ratio(1, 2), ratio(4, 5)] {
            let model = GeometricModel::new(q).unwrap();
            for n in 1..=6 {
                let total = enumerate_patterns(n)
                    .unwrap()
                    .iter()
                    .fold(Rational::zero(), |acc, p| acc + pattern_probability(p, &model));
                assert_eq!(total, Rational::one(), "n = {n}");
            }
        }
    }

    #[test]
    fn truncated_examples() {
        let t = pattern_probability_truncated(&pat(&[1]), &half(), 20).unwrap();
        assert!((Rational::one() - t.value.clone()) <= ratio(1, 1 << 20));
        assert_eq!(t.tail_bound, ratio(1, 1 << 20));

        let t = pattern_probability_truncated(&pat(&[1, 1]), &half(), 30).unwrap();
        let gap = ratio(1, 3) - t.value;
        assert!(gap >= Rational::zero() && gap <= t.tail_bound);

        let q13 = GeometricModel::new(ratio(1, 3)).unwrap();
        let p = pat(&[2, 1]);
        let t = pattern_probability_truncated(&p, &q13, 40).unwrap();
        let gap = pattern_probability(&p, &q13) - t.value;
        assert!(gap >= Rational::zero() && gap <= t.tail_bound);

        assert!(pattern_probability_truncated(&pat(&[1, 2, 3]), &half(), 2).is_err());
    }

    #[test]
    fn sampling_is_deterministic() {
        let model = GeometricModel::new(0.3f64).unwrap();
        let a = sample_word(&model, 50, &mut substream(7, 0));
        let b = sample_word(&model, 50, &mut substream(7, 0));
        let c = sample_word(&model, 50, &mut substream(7, 1));
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert!(sample_word(&model, 0, &mut substream(1, 0)).is_empty());
    }

    #[test]
    fn letter_one_frequency() {
        let model = GeometricModel::new(0.5f64).unwrap();
        let trials = 1_000_000usize;
        let w = sample_word(&model, trials, &mut substream(2024, 0));
        let ones = w.letters().iter().filter(|&&x| x == 1).count() as f64;
        let freq = ones / trials as f64;
        let se = (0.5f64 * 0.5 / trials as f64).sqrt();
        assert!((freq - 0.5).abs() <= 3.0 * se, "freq {freq}");
    }

    #[test]
    fn pattern_frequencies_match_probabilities() {
        // chi-square over the 13 patterns of length 3
        let exact = GeometricModel::new(ratio(1, 2)).unwrap();
        let model = exact.to_f64();
        let patterns = enumerate_patterns(3).unwrap();
        let sampler = LetterSampler::new(&model);
        let mut rng = substream(99, 0);
        let trials = 1_000_000usize;
        let mut counts = std::collections::HashMap::new();
        let mut buf = Vec::new();
        for _ in 0..trials {
            sampler.fill(&mut rng, &mut buf, 3);
            let p = pattern_of(&Word::new(buf.clone()).unwrap()).unwrap();
            *counts.entry(p).or_insert(0usize) += 1;
        }
        let chi2: f64 = patterns
            .iter()
            .map(|p| {
                let expected = pattern_probability(p, &exact).to_f64() * trials as f64;
                let observed = *counts.get(p).unwrap_or(&0) as f64;
                (observed - expected).powi(2) / expected
            })
            .sum();
        // 12 degrees of freedom: mean 12, sd sqrt(24); 3 sigma above the mean
        let limit = 12.0 + 3.0 * 24f64.sqrt();
        assert!(chi2 <= limit, "chi2 = {chi2}");
    }

    proptest! {
        #[test]
        fn sampled_patterns_are_valid(seed in any::<u64>(), n in 1usize..40) {
            let model = GeometricModel::new(0.6f64).unwrap();
            let w = sample_word(&model, n, &mut substream(seed, 0));
            let p = pattern_of(&w).unwrap();
            prop_assert!(Pattern::new(p.ranks().to_vec()).is_ok());
            prop_assert_eq!(p.len(), n);
            let tails = p.tail_counts();
            prop_assert_eq!(tails[0], n);
            prop_assert!(tails.windows(2).all(|t| t[0] > t[1]));
            prop_assert!(*tails.last().unwrap() >= 1);
        }
    }
}
