//! Unbiased Monte Carlo estimation of the externality-aware Shapley value.
//!
//! Each sample draws two uniform permutations. The cycles of the second one
//! form the initial coalition structure; players of the first one are then
//! moved, in order, into a growing coalition `S`, and each move yields the
//! mover's marginal contribution. Averaging over samples gives an unbiased
//! estimate of [`crate::game::exact_shapley`].

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{transfer, ValueOracle};
use crate::graph::{CoalitionStructure, NodeSet};
use crate::rng::{below, stream_rng};

/// Largest player count accepted by [`enumerate_sampler_expectation`].
pub const EXPECTATION_CAP: usize = 5;

pub const DEFAULT_SAMPLES: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleConfig {
    pub num_samples: usize,
    pub seed: u64,
    pub workers: usize,
    /// Reuse the previous step's `V_after` as the next `V_before`. The
    /// values are identical; only the oracle call count changes
    /// (`n + 1` instead of `2n` per sample).
    pub reuse_values: bool,
}

impl Default for SampleConfig {
    fn default() -> Self {
        SampleConfig { num_samples: DEFAULT_SAMPLES, seed: 0, workers: 1, reuse_values: true }
    }
}

impl SampleConfig {
    pub fn new(num_samples: usize, seed: u64) -> Self {
        SampleConfig { num_samples, seed, ..Default::default() }
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_samples == 0 {
            return Err(Error::InvalidArgument("num_samples must be at least 1".into()));
        }
        if self.workers == 0 {
            return Err(Error::InvalidArgument("workers must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShapleyEstimate {
    pub values: Vec<f64>,
    /// Standard error of each mean, from the unbiased per-sample variance.
    /// Zero when only one sample was drawn.
    pub std_errors: Vec<f64>,
    pub num_samples: usize,
    pub total_oracle_calls: u64,
}

/// Fisher-Yates shuffle of `0..n`.
pub fn knuth_shuffle<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = below(rng, i + 1);
        perm.swap(i, j);
    }
    perm
}

/// The cycles of `perm` (which maps `i` to `perm[i]`) as a partition.
pub fn partition_from_cycles(perm: &[usize]) -> Result<CoalitionStructure> {
    let n = perm.len();
    let mut seen = vec![false; n];
    for &x in perm {
        if x >= n || seen[x] {
            return Err(Error::InvalidArgument(format!("{perm:?} is not a permutation")));
        }
        seen[x] = true;
    }
    seen.fill(false);
    let mut labels = vec![0; n];
    let mut next = 0;
    for start in 0..n {
        if seen[start] {
            continue;
        }
        let mut i = start;
        while !seen[i] {
            seen[i] = true;
            labels[i] = next;
            i = perm[i];
        }
        next += 1;
    }
    Ok(CoalitionStructure::from_labels(&labels))
}

/// Marginal contributions of one `(order, cycles)` draw.
///
/// Returns the per-player contributions and the number of oracle calls made.
pub fn marginal_contributions<V: ValueOracle + ?Sized>(
    v: &V,
    order: &[usize],
    cycles: &[usize],
    reuse_values: bool,
) -> Result<(Vec<f64>, u64)> {
    let n = order.len();
    let mut p = partition_from_cycles(cycles)?;
    let mut s = NodeSet::empty();
    let mut mc = vec![0.0; n];
    let mut calls = 0;
    let mut previous = 0.0;
    if reuse_values {
        previous = v.value(&s, &p)?;
        calls += 1;
    }
    for &player in order {
        let before = if reuse_values {
            previous
        } else {
            calls += 1;
            v.value(&s, &p)?
        };
        s.insert(player);
        p = transfer(&p, &s)?;
        let after = v.value(&s, &p)?;
        calls += 1;
        mc[player] = after - before;
        previous = after;
    }
    Ok((mc, calls))
}

/// One sample: draws the order, then the cycle permutation, from `rng`.
pub fn one_sample<V, R>(v: &V, n: usize, rng: &mut R) -> Result<Vec<f64>>
where
    V: ValueOracle + ?Sized,
    R: Rng + ?Sized,
{
    let order = knuth_shuffle(n, rng);
    let cycles = knuth_shuffle(n, rng);
    Ok(marginal_contributions(v, &order, &cycles, true)?.0)
}

fn sample_with_stream<V: ValueOracle + ?Sized>(
    v: &V,
    n: usize,
    cfg: &SampleConfig,
    index: usize,
) -> Result<(Vec<f64>, u64)> {
    let mut rng = stream_rng(cfg.seed, index as u64);
    let order = knuth_shuffle(n, &mut rng);
    let cycles = knuth_shuffle(n, &mut rng);
    marginal_contributions(v, &order, &cycles, cfg.reuse_values)
}

/// Averages `cfg.num_samples` independent samples.
///
/// Sample `m` draws from stream `m` of the generator keyed by `cfg.seed`,
/// and sums are accumulated in sample order, so the result is bit-identical
/// for any worker count.
pub fn estimate_shapley<V: ValueOracle + ?Sized>(
    v: &V,
    n: usize,
    cfg: &SampleConfig,
) -> Result<ShapleyEstimate> {
    cfg.validate()?;
    let run = |m: usize| sample_with_stream(v, n, cfg, m);
    let samples: Vec<Result<(Vec<f64>, u64)>> = if cfg.workers == 1 {
        (0..cfg.num_samples).map(run).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.workers)
            .build()
            .map_err(|e| Error::InvalidArgument(format!("cannot start worker pool: {e}")))?;
        pool.install(|| (0..cfg.num_samples).into_par_iter().map(run).collect())
    };

    let mut contributions = Vec::with_capacity(cfg.num_samples);
    let mut calls = 0;
    for (m, sample) in samples.into_iter().enumerate() {
        let (mc, c) = sample.map_err(|e| Error::Sampling {
            sample: m,
            completed: m,
            source: Box::new(e),
        })?;
        contributions.push(mc);
        calls += c;
    }
    let t = cfg.num_samples as f64;
    let mut values = vec![0.0; n];
    for mc in &contributions {
        for (v, x) in values.iter_mut().zip(mc) {
            *v += x;
        }
    }
    for v in &mut values {
        *v /= t;
    }
    let mut std_errors = vec![0.0; n];
    if cfg.num_samples > 1 {
        for mc in &contributions {
            for ((se, x), mean) in std_errors.iter_mut().zip(mc).zip(&values) {
                *se += (x - mean) * (x - mean);
            }
        }
        for se in &mut std_errors {
            *se = (*se / (t - 1.0) / t).sqrt();
        }
    }
    Ok(ShapleyEstimate { values, std_errors, num_samples: cfg.num_samples, total_oracle_calls: calls })
}

/// All permutations of `0..n` in lexicographic order.
pub(crate) fn all_permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut perm: Vec<usize> = (0..n).collect();
    loop {
        out.push(perm.clone());
        let Some(i) = (1..n).rev().find(|&i| perm[i - 1] < perm[i]) else {
            return out;
        };
        let j = (i..n).rev().find(|&j| perm[j] > perm[i - 1]).unwrap();
        perm.swap(i - 1, j);
        perm[i..].reverse();
    }
}

/// Exact expectation of the sampler: the mean of the marginal contributions
/// over all `(n!)^2` equally likely `(order, cycles)` draws.
pub fn enumerate_sampler_expectation<V: ValueOracle + ?Sized>(v: &V, n: usize) -> Result<Vec<f64>> {
    if n > EXPECTATION_CAP {
        return Err(Error::Capacity { what: "sampler expectation enumeration", n, cap: EXPECTATION_CAP });
    }
    let perms = all_permutations(n);
    let mut sum = vec![0.0; n];
    for order in &perms {
        for cycles in &perms {
            let (mc, _) = marginal_contributions(v, order, cycles, true)?;
            for (s, x) in sum.iter_mut().zip(mc) {
                *s += x;
            }
        }
    }
    let draws = (perms.len() * perms.len()) as f64;
    Ok(sum.into_iter().map(|s| s / draws).collect())
}
