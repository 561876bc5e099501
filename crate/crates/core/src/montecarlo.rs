//! Seeded random-word experiments.
//!
//! Trial t of an experiment with seed s draws from ChaCha8 keyed by s on
//! stream t, so results do not depend on the thread count or on scheduling.

use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chain::ratio_to_f64;
use crate::error::{Error, Result};
use crate::frogs::{FrogArrangement, FrogState, Ring};
use crate::lcs::{delta_with, lcs_banded, lcs_bitparallel, lcs_heuristic, BandSchedule};
use crate::words::{Alphabet, Symbol, Word};

/// Above this length the Delta experiment switches to the banded heuristic.
pub const HEURISTIC_THRESHOLD: usize = 20_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub trials: usize,
    pub n: usize,
    pub alphabet_size: usize,
    /// Worker threads; 0 means rayon's default.
    #[serde(default)]
    pub threads: usize,
}

impl ExperimentConfig {
    pub fn new(seed: u64, trials: usize, n: usize, alphabet_size: usize) -> Self {
        ExperimentConfig { seed, trials, n, alphabet_size, threads: 0 }
    }

    pub fn with_threads(mut self, threads: usize) -> Self {
        self.threads = threads;
        self
    }

    fn validate(&self) -> Result<Alphabet> {
        if self.trials == 0 {
            return Err(Error::Invalid("trials must be at least 1".into()));
        }
        Alphabet::new(self.alphabet_size)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryStats {
    pub count: usize,
    pub mean: f64,
    pub stddev: f64,
    pub min: f64,
    pub max: f64,
}

impl SummaryStats {
    /// Sample statistics with the n-1 denominator (stddev 0 for one sample).
    pub fn from_samples(xs: &[f64]) -> Self {
        let count = xs.len();
        if count == 0 {
            return SummaryStats { count, mean: f64::NAN, stddev: f64::NAN, min: f64::NAN, max: f64::NAN };
        }
        let mean = xs.iter().sum::<f64>() / count as f64;
        let ss: f64 = xs.iter().map(|x| (x - mean) * (x - mean)).sum();
        let stddev = if count > 1 { (ss / (count - 1) as f64).sqrt() } else { 0.0 };
        let min = xs.iter().copied().fold(f64::INFINITY, f64::min);
        let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        SummaryStats { count, mean, stddev, min, max }
    }
}

/// Result record: the configuration and its statistics.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Report<T> {
    #[serde(flatten)]
    pub config: ExperimentConfig,
    pub stats: T,
}

pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

pub fn sample_word(n: usize, alphabet: Alphabet, rng: &mut impl Rng) -> Word {
    let size = alphabet.size();
    let symbols = (0..n).map(|_| rng.gen_range(0..size) as Symbol).collect();
    Word::new(symbols, alphabet).expect("sampled symbols lie in the alphabet")
}

/// Runs `f(trial, rng)` for every trial and returns the results in trial order.
pub fn run_trials<T, F>(seed: u64, trials: usize, threads: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64, &mut ChaCha8Rng) -> T + Sync,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Invalid(format!("thread pool: {e}")))?;
    Ok(pool.install(|| {
        (0..trials as u64)
            .into_par_iter()
            .map(|t| f(t, &mut trial_rng(seed, t)))
            .collect()
    }))
}

/// D_1, ..., D_k after feeding `r` to F_empty.
pub fn displacements(ring: &Ring, r: &[Symbol]) -> Vec<u64> {
    let k = ring.k();
    let mut st = FrogState::new(&FrogArrangement::identity(k));
    let mut d = vec![0u64; k];
    for &a in r {
        ring.poke(&mut st, a, |h| d[h.frog] += h.distance as u64);
    }
    d
}

fn checked_ring(w: &Word, alphabet: Alphabet) -> Result<(Word, Ring)> {
    let w = w.clone().with_alphabet(alphabet)?;
    if !w.is_irreducible()? {
        return Err(Error::Reducible);
    }
    let ring = Ring::new(&w)?;
    Ok((w, ring))
}

fn per_trial_speeds(w: &Word, alphabet: Alphabet, cfg: &ExperimentConfig) -> Result<Vec<Vec<f64>>> {
    let (_, ring) = checked_ring(w, alphabet)?;
    let n = cfg.n;
    run_trials(cfg.seed, cfg.trials, cfg.threads, |_, rng| {
        let r = sample_word(n, alphabet, rng);
        let d = displacements(&ring, r.symbols());
        d.iter().map(|&x| if n == 0 { 0.0 } else { x as f64 / n as f64 }).collect()
    })
}

/// Statistics of D_m(F_empty, R) / n for each frog m.
pub fn estimate_speeds(w: &Word, cfg: &ExperimentConfig) -> Result<Vec<SummaryStats>> {
    let alphabet = cfg.validate()?;
    let runs = per_trial_speeds(w, alphabet, cfg)?;
    Ok((0..w.len())
        .map(|m| SummaryStats::from_samples(&runs.iter().map(|r| r[m]).collect::<Vec<_>>()))
        .collect())
}

/// How an experiment computes LCS lengths.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LcsMethod {
    /// Bit-parallel exact DP.
    Exact,
    /// The doubling band heuristic with the default schedule for each length.
    Heuristic,
    /// A single banded DP with this half-width.
    Band(usize),
}

impl LcsMethod {
    pub fn lcs(&self, v: &Word, w: &Word) -> usize {
        match *self {
            LcsMethod::Exact => lcs_bitparallel(v, w),
            LcsMethod::Heuristic => lcs_heuristic(v, w, &BandSchedule::for_length(v.len().max(w.len()))).length,
            LcsMethod::Band(t) => lcs_banded(v, w, t as i64).expect("band is non-negative"),
        }
    }
}

/// Delta(n) for independent pairs of uniform words, in trial order.
pub fn delta_samples(cfg: &ExperimentConfig, method: LcsMethod) -> Result<Vec<usize>> {
    let alphabet = cfg.validate()?;
    if cfg.n % 2 == 1 {
        return Err(Error::OddLength(cfg.n));
    }
    let n = cfg.n;
    let samples = run_trials(cfg.seed, cfg.trials, cfg.threads, |_, rng| {
        let v = sample_word(n, alphabet, rng);
        let w = sample_word(n, alphabet, rng);
        delta_with(&v, &w, |a, b| method.lcs(a, b))
    })?;
    samples.into_iter().collect()
}

/// Statistics of Delta(n) over independent pairs of uniform words.
pub fn delta_experiment(cfg: &ExperimentConfig, use_heuristic: bool) -> Result<SummaryStats> {
    let method = if use_heuristic { LcsMethod::Heuristic } else { LcsMethod::Exact };
    let xs: Vec<f64> = delta_samples(cfg, method)?.into_iter().map(|d| d as f64).collect();
    Ok(SummaryStats::from_samples(&xs))
}

/// The default choice of `delta_experiment`'s `use_heuristic`.
pub fn default_use_heuristic(n: usize) -> bool {
    n > HEURISTIC_THRESHOLD
}

/// Samples of sum_m max(0, rho - D_m(F_empty, R) / n).
pub fn lambda_samples(w: &Word, rho: &BigRational, cfg: &ExperimentConfig) -> Result<Vec<f64>> {
    let alphabet = cfg.validate()?;
    let rho = ratio_to_f64(rho);
    let runs = per_trial_speeds(w, alphabet, cfg)?;
    Ok(runs.iter().map(|r| r.iter().map(|&d| (rho - d).max(0.0)).sum()).collect())
}

/// LCS(R, R') / n for pairs of uniform words, via the banded heuristic.
pub fn estimate_gamma_cs(cfg: &ExperimentConfig) -> Result<SummaryStats> {
    let alphabet = cfg.validate()?;
    let n = cfg.n;
    if n == 0 {
        return Err(Error::Invalid("n must be positive".into()));
    }
    let samples = run_trials(cfg.seed, cfg.trials, cfg.threads, |_, rng| {
        let v = sample_word(n, alphabet, rng);
        let w = sample_word(n, alphabet, rng);
        lcs_heuristic(&v, &w, &BandSchedule::for_length(n)).length as f64 / n as f64
    })?;
    Ok(SummaryStats::from_samples(&samples))
}

/// gamma_W(rho) from Monte Carlo speed means, together with those means.
pub fn estimate_gamma(w: &Word, rho: &BigRational, cfg: &ExperimentConfig) -> Result<(f64, Vec<SummaryStats>)> {
    let speeds = estimate_speeds(w, cfg)?;
    let rho_f = ratio_to_f64(rho);
    let k = w.len() as f64;
    let lost: f64 = speeds.iter().map(|s| (rho_f - s.mean).max(0.0)).sum();
    Ok((rho_f - lost / k, speeds))
}
