//! Seeded Monte Carlo estimates of `E[ρ]` and `Var[ρ]`.
//!
//! Trials are cut into fixed-size chunks. Chunk `c` draws from the substream
//! `(seed, c)` and keeps running moments; chunks are merged in index order, so
//! a report depends only on `(q, n, trials, seed)` and never on the number of
//! worker threads.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Result};
use crate::geometric::{substream, GeometricModel, LetterSampler};
use crate::pathlen::{rho_fast, Word};
use crate::scalar::{format_float, Scalar};

/// Trials per random substream.
pub const CHUNK_TRIALS: u64 = 16_384;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EstimateReport {
    pub n: usize,
    pub q: f64,
    pub trials: u64,
    pub mean: f64,
    /// Unbiased (divisor `trials - 1`).
    pub sample_variance: f64,
    pub stderr_mean: f64,
    pub seed: u64,
}

impl EstimateReport {
    pub const CSV_HEADER: &'static str = "n,q,trials,mean,sample_variance,stderr_mean,seed";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{}",
            self.n,
            format_float(self.q),
            self.trials,
            format_float(self.mean),
            format_float(self.sample_variance),
            format_float(self.stderr_mean),
            self.seed
        )
    }
}

/// Count, mean and sum of squared deviations.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
struct Running {
    count: u64,
    mean: f64,
    m2: f64,
}

impl Running {
    fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    fn merge(self, other: Running) -> Running {
        if self.count == 0 {
            return other;
        }
        if other.count == 0 {
            return self;
        }
        let count = self.count + other.count;
        let delta = other.mean - self.mean;
        let mean = self.mean + delta * other.count as f64 / count as f64;
        let m2 = self.m2
            + other.m2
            + delta * delta * (self.count as f64) * (other.count as f64) / count as f64;
        Running { count, mean, m2 }
    }
}

pub fn estimate<S: Scalar>(
    model: &GeometricModel<S>,
    n: usize,
    trials: u64,
    seed: u64,
) -> Result<EstimateReport> {
    if trials < 2 {
        return invalid(format!("need at least 2 trials, got {trials}"));
    }
    let sampler = LetterSampler::new(model);
    let chunks = trials.div_ceil(CHUNK_TRIALS);

    let partials: Vec<Running> = (0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let start = chunk * CHUNK_TRIALS;
            let len = CHUNK_TRIALS.min(trials - start);
            let mut rng = substream(seed, chunk);
            let mut letters = Vec::with_capacity(n);
            let mut acc = Running::default();
            for _ in 0..len {
                sampler.fill(&mut rng, &mut letters, n);
                let word = Word::new(std::mem::take(&mut letters)).expect("letters >= 1");
                acc.push(rho_fast(&word) as f64);
                letters = word.into();
            }
            acc
        })
        .collect();

    let total = partials.into_iter().fold(Running::default(), Running::merge);
    let sample_variance = (total.m2 / (total.count - 1) as f64).max(0.0);
    Ok(EstimateReport {
        n,
        q: model.q().to_f64(),
        trials,
        mean: total.mean,
        sample_variance,
        stderr_mean: (sample_variance / trials as f64).sqrt(),
        seed,
    })
}

/// Outcome of comparing a relative variance error against the 5% / 10% bands.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Band {
    Pass,
    Flagged,
    Fail,
}

/// An estimate set against exact expectation and variance.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Comparison {
    pub expected_mean: f64,
    pub expected_variance: f64,
    /// `|mean - E| / stderr`.
    pub mean_z: f64,
    pub mean_ok: bool,
    pub variance_rel_err: f64,
    pub variance_band: Band,
}

/// Mean within 5 standard errors; variance within 10% relative, flagged above 5%.
pub fn compare(report: &EstimateReport, expected_mean: f64, expected_variance: f64) -> Comparison {
    let diff = (report.mean - expected_mean).abs();
    let mean_z = if report.stderr_mean > 0.0 {
        diff / report.stderr_mean
    } else if diff == 0.0 {
        0.0
    } else {
        f64::INFINITY
    };
    let variance_rel_err = if expected_variance == 0.0 {
        report.sample_variance.abs()
    } else {
        (report.sample_variance - expected_variance).abs() / expected_variance.abs()
    };
    let variance_band = if variance_rel_err <= 0.05 {
        Band::Pass
    } else if variance_rel_err <= 0.10 {
        Band::Flagged
    } else {
        Band::Fail
    };
    Comparison {
        expected_mean,
        expected_variance,
        mean_z,
        mean_ok: mean_z <= 5.0,
        variance_rel_err,
        variance_band,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_at_n2() {
        let model = GeometricModel::new(0.5f64).unwrap();
        let r = estimate(&model, 2, 1000, 3).unwrap();
        assert_eq!(r.mean, 1.0);
        assert_eq!(r.sample_variance, 0.0);
        assert_eq!(r.stderr_mean, 0.0);
    }

    #[test]
    fn reproducible_and_seeded() {
        let model = GeometricModel::new(0.7f64).unwrap();
        let a = estimate(&model, 12, 40_000, 11).unwrap();
        let b = estimate(&model, 12, 40_000, 11).unwrap();
        let c = estimate(&model, 12, 40_000, 12).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.mean, c.mean);
        assert_eq!(a.seed, 11);
    }

    #[test]
    fn independent_of_thread_count() {
        let model = GeometricModel::new(0.6f64).unwrap();
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| estimate(&model, 9, 100_000, 5).unwrap())
        };
        assert_eq!(run(1), run(4));
    }

    #[test]
    fn rejects_too_few_trials() {
        let model = GeometricModel::new(0.5f64).unwrap();
        assert!(estimate(&model, 3, 1, 0).is_err());
    }

    #[test]
    fn n3_mean_matches_exact() {
        let model = GeometricModel::new(0.5f64).unwrap();
        let r = estimate(&model, 3, 1_000_000, 42).unwrap();
        let cmp = compare(&r, 20.0 / 7.0, 6.0 / 49.0);
        assert!(cmp.mean_ok, "{cmp:?}");
    }

    #[test]
    fn merge_matches_single_pass() {
        let xs: Vec<f64> = (0..1000).map(|i| ((i * 37) % 101) as f64).collect();
        let mut whole = Running::default();
        xs.iter().for_each(|&x| whole.push(x));
        let (mut a, mut b) = (Running::default(), Running::default());
        xs[..333].iter().for_each(|&x| a.push(x));
        xs[333..].iter().for_each(|&x| b.push(x));
        let merged = a.merge(b);
        assert_eq!(merged.count, whole.count);
        assert!((merged.mean - whole.mean).abs() < 1e-12);
        assert!((merged.m2 - whole.m2).abs() < 1e-6 * whole.m2);
    }

    #[test]
    fn csv_row_echoes_seed() {
        let model = GeometricModel::new(0.5f64).unwrap();
        let r = estimate(&model, 2, 10, 77).unwrap();
        assert!(r.csv_row().ends_with(",77"));
        assert_eq!(EstimateReport::CSV_HEADER.split(',').count(), r.csv_row().split(',').count());
    }
}
