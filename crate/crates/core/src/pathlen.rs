//! The path-length parameter on words.
//!
//! For a word `w_1 … w_n` a pair of positions `j < k` is counted when either
//! endpoint attains the minimum of the window `w_j … w_k`. For permutations the
//! count equals the internal path length of the binary search tree built from
//! the permutation; on words with repeated letters the same definition is used
//! as is.
//!
//! Positions are 1-based throughout the public API.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// A finite word over the alphabet `{1, 2, …}`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<u64>", into = "Vec<u64>")]
pub struct Word(Vec<u64>);

impl Word {
    pub fn new(letters: Vec<u64>) -> Result<Self> {
        if let Some(pos) = letters.iter().position(|&x| x == 0) {
            return invalid(format!("letter at position {} is 0; letters must be >= 1", pos + 1));
        }
        Ok(Self(letters))
    }

    pub fn empty() -> Self {
        Self(Vec::new())
    }

    pub fn letters(&self) -> &[u64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// True when no letter occurs twice.
    pub fn has_distinct_letters(&self) -> bool {
        let mut sorted = self.0.clone();
        sorted.sort_unstable();
        sorted.windows(2).all(|w| w[0] != w[1])
    }
}

impl TryFrom<Vec<u64>> for Word {
    type Error = Error;
    fn try_from(v: Vec<u64>) -> Result<Self> {
        Word::new(v)
    }
}

impl From<Word> for Vec<u64> {
    fn from(w: Word) -> Self {
        w.0
    }
}

impl FromStr for Word {
    type Err = Error;

    /// Comma-separated positive integers; the empty string is the empty word.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() {
            return Ok(Word::empty());
        }
        let letters = s
            .split(',')
            .map(|tok| {
                tok.trim()
                    .parse::<u64>()
                    .map_err(|_| Error::Parse(format!("bad letter {tok:?} in word {s:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Word::new(letters)
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{x}")?;
        }
        Ok(())
    }
}

/// Left/right/both/not indicators of one pair of positions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct PairIndicators {
    pub l: bool,
    pub r: bool,
    pub b: bool,
    pub n: bool,
}

impl PairIndicators {
    pub fn from_endpoints(l: bool, r: bool) -> Self {
        Self { l, r, b: l && r, n: !l && !r }
    }

    /// `L + R - B`, which is 0 or 1.
    pub fn counted(&self) -> u64 {
        u64::from(self.l || self.r)
    }
}

/// The parameter together with its indicator sums.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct RhoBreakdown {
    pub rho: u64,
    pub l_count: u64,
    pub r_count: u64,
    pub b_count: u64,
}

impl RhoBreakdown {
    fn from_counts(l_count: u64, r_count: u64, b_count: u64) -> Self {
        Self { rho: l_count + r_count - b_count, l_count, r_count, b_count }
    }
}

/// Indicators for positions `j < k` (1-based).
pub fn pair_indicators(word: &Word, j: usize, k: usize) -> Result<PairIndicators> {
    let n = word.len();
    if j == 0 || k > n || j >= k {
        return invalid(format!("need 1 <= j < k <= {n}, got j={j}, k={k}"));
    }
    let w = &word.0[j - 1..k];
    let min = *w.iter().min().expect("window has at least two letters");
    Ok(PairIndicators::from_endpoints(w[0] == min, w[w.len() - 1] == min))
}

/// Reference evaluation over all `n(n-1)/2` pairs.
pub fn rho_naive(word: &Word) -> RhoBreakdown {
    let w = &word.0;
    let (mut l, mut r, mut b) = (0, 0, 0);
    for j in 0..w.len() {
        let mut min = w[j];
        for k in j + 1..w.len() {
            min = min.min(w[k]);
            let ind = PairIndicators::from_endpoints(w[j] == min, w[k] == min);
            l += u64::from(ind.l);
            r += u64::from(ind.r);
            b += u64::from(ind.b);
        }
    }
    RhoBreakdown::from_counts(l, r, b)
}

/// Linear-time breakdown using monotonic stacks.
///
/// * `l_count`: for each `j`, the positions up to the next strictly smaller letter.
/// * `r_count`: for each `k`, the positions back to the previous strictly smaller letter.
/// * `b_count`: equal letters with nothing strictly smaller between them; the
///   stack keeps `(letter, occurrences)` with strictly increasing letters.
pub fn rho_breakdown_fast(word: &Word) -> RhoBreakdown {
    let w = &word.0;
    let n = w.len();

    let mut l_count = 0u64;
    let mut stack: Vec<usize> = Vec::with_capacity(n);
    for j in (0..n).rev() {
        while let Some(&top) = stack.last() {
            if w[top] >= w[j] {
                stack.pop();
            } else {
                break;
            }
        }
        let next_smaller = stack.last().copied().unwrap_or(n);
        l_count += (next_smaller - j - 1) as u64;
        stack.push(j);
    }

    let mut r_count = 0u64;
    stack.clear();
    for k in 0..n {
        while let Some(&top) = stack.last() {
            if w[top] >= w[k] {
                stack.pop();
            } else {
                break;
            }
        }
        r_count += match stack.last() {
            Some(&prev_smaller) => (k - prev_smaller - 1) as u64,
            None => k as u64,
        };
        stack.push(k);
    }

    let mut b_count = 0u64;
    let mut runs: Vec<(u64, u64)> = Vec::with_capacity(n);
    for &x in w {
        while let Some(&(v, _)) = runs.last() {
            if v > x {
                runs.pop();
            } else {
                break;
            }
        }
        match runs.last_mut() {
            Some((v, count)) if *v == x => {
                b_count += *count;
                *count += 1;
            }
            _ => runs.push((x, 1)),
        }
    }

    RhoBreakdown::from_counts(l_count, r_count, b_count)
}

pub fn rho_fast(word: &Word) -> u64 {
    rho_breakdown_fast(word).rho
}

/// Internal path length (root depth 0) of the min-rooted Cartesian tree.
/// Requires pairwise-distinct letters.
pub fn cartesian_ipl(word: &Word) -> Result<u64> {
    if !word.has_distinct_letters() {
        return invalid("cartesian_ipl requires pairwise-distinct letters");
    }
    let w = &word.0;
    let n = w.len();
    let mut parent = vec![usize::MAX; n];
    let mut stack: Vec<usize> = Vec::with_capacity(n);
    for i in 0..n {
        let mut last = None;
        while let Some(&top) = stack.last() {
            if w[top] > w[i] {
                last = stack.pop();
            } else {
                break;
            }
        }
        if let Some(child) = last {
            parent[child] = i;
        }
        if let Some(&top) = stack.last() {
            parent[i] = top;
        }
        stack.push(i);
    }

    // parents are final; resolve depths iteratively
    let mut depth = vec![u64::MAX; n];
    let mut path = Vec::new();
    for start in 0..n {
        let mut v = start;
        while depth[v] == u64::MAX && parent[v] != usize::MAX {
            path.push(v);
            v = parent[v];
        }
        if depth[v] == u64::MAX {
            depth[v] = 0;
        }
        let mut d = depth[v];
        while let Some(u) = path.pop() {
            d += 1;
            depth[u] = d;
        }
    }
    Ok(depth.iter().sum())
}

/// Splits at the leftmost minimum: `w = prefix · min · suffix`.
pub fn decompose_at_min(word: &Word) -> Result<(Word, Word)> {
    let w = &word.0;
    let Some(min) = w.iter().min() else {
        return invalid("cannot decompose the empty word");
    };
    let pos = w.iter().position(|x| x == min).expect("minimum exists");
    Ok((Word(w[..pos].to_vec()), Word(w[pos + 1..].to_vec())))
}
