//! Histogram densities, KL and Jensen-Shannon divergence, and the
//! label-permutation significance test.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum StatsError {
    #[error("empty sample set")]
    Empty,
    #[error("need at least 2 bins, got {0}")]
    Bins(usize),
    #[error("all pooled values equal {0}; histogram range is degenerate")]
    DegenerateRange(f64),
    #[error("non-finite sample value")]
    NonFinite,
    #[error("distributions use different bin edges")]
    Incompatible,
    #[error("divergence is infinite: bin {bin} has mass in P but none in Q")]
    Infinite { bin: usize },
    #[error("invalid distribution: {0}")]
    Invalid(String),
    #[error("invalid test parameters: {0}")]
    Params(String),
}

/// Discrete density over shared bin edges.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalDistribution {
    edges: Vec<f64>,
    mass: Vec<f64>,
}

const MASS_TOLERANCE: f64 = 1e-9;

impl EmpiricalDistribution {
    pub fn new(edges: Vec<f64>, mass: Vec<f64>) -> Result<Self, StatsError> {
        if mass.is_empty() || edges.len() != mass.len() + 1 {
            return Err(StatsError::Invalid(format!(
                "{} edges for {} bins",
                edges.len(),
                mass.len()
            )));
        }
        if edges.windows(2).any(|e| !(e[0] < e[1])) {
            return Err(StatsError::Invalid("edges not strictly increasing".into()));
        }
        if mass.iter().any(|m| !(*m >= 0.0) || !m.is_finite()) {
            return Err(StatsError::Invalid("negative or non-finite mass".into()));
        }
        let total: f64 = mass.iter().sum();
        if (total - 1.0).abs() > MASS_TOLERANCE {
            return Err(StatsError::Invalid(format!("mass sums to {total}")));
        }
        Ok(EmpiricalDistribution { edges, mass })
    }

    pub fn edges(&self) -> &[f64] {
        &self.edges
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    pub fn bins(&self) -> usize {
        self.mass.len()
    }
}

/// Bin count and additive smoothing shared by every histogram in a test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HistogramConfig {
    pub bins: usize,
    /// Pseudo-count added to every bin.
    pub smoothing: f64,
}

impl Default for HistogramConfig {
    fn default() -> Self {
        HistogramConfig {
            bins: 50,
            smoothing: 0.5,
        }
    }
}

/// Equal-width bins over the pooled range of `a` and `b`.
struct Binning {
    lo: f64,
    hi: f64,
    bins: usize,
}

impl Binning {
    fn pooled(a: &[f64], b: &[f64], bins: usize) -> Result<Self, StatsError> {
        if a.is_empty() || b.is_empty() {
            return Err(StatsError::Empty);
        }
        if bins < 2 {
            return Err(StatsError::Bins(bins));
        }
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for &x in a.iter().chain(b) {
            if !x.is_finite() {
                return Err(StatsError::NonFinite);
            }
            lo = lo.min(x);
            hi = hi.max(x);
        }
        if !(hi > lo) {
            return Err(StatsError::DegenerateRange(lo));
        }
        Ok(Binning { lo, hi, bins })
    }

    fn index(&self, x: f64) -> usize {
        let i = ((x - self.lo) / (self.hi - self.lo) * self.bins as f64).floor() as usize;
        i.min(self.bins - 1)
    }

    fn edges(&self) -> Vec<f64> {
        let width = self.hi - self.lo;
        (0..=self.bins)
            .map(|i| {
                if i == self.bins {
                    self.hi
                } else {
                    self.lo + width * i as f64 / self.bins as f64
                }
            })
            .collect()
    }
}

fn smoothed_mass(counts: &[usize], n: usize, smoothing: f64) -> Vec<f64> {
    let denom = n as f64 + counts.len() as f64 * smoothing;
    counts.iter().map(|&c| (c as f64 + smoothing) / denom).collect()
}

/// Histograms of `a` and `b` over identical edges spanning their pooled range.
pub fn shared_histogram(
    a: &[f64],
    b: &[f64],
    config: HistogramConfig,
) -> Result<(EmpiricalDistribution, EmpiricalDistribution), StatsError> {
    if !(config.smoothing >= 0.0) {
        return Err(StatsError::Params(format!("smoothing {}", config.smoothing)));
    }
    let binning = Binning::pooled(a, b, config.bins)?;
    let count = |xs: &[f64]| {
        let mut c = vec![0usize; config.bins];
        for &x in xs {
            c[binning.index(x)] += 1;
        }
        c
    };
    let edges = binning.edges();
    let p = smoothed_mass(&count(a), a.len(), config.smoothing);
    let q = smoothed_mass(&count(b), b.len(), config.smoothing);
    Ok((
        EmpiricalDistribution::new(edges.clone(), p)?,
        EmpiricalDistribution::new(edges, q)?,
    ))
}

/// Discrete KL divergence `sum p ln(p / q)` over bins with `p > 0`.
pub fn kl_divergence(p: &EmpiricalDistribution, q: &EmpiricalDistribution) -> Result<f64, StatsError> {
    if p.edges != q.edges {
        return Err(StatsError::Incompatible);
    }
    kl_masses(&p.mass, &q.mass)
}

fn kl_masses(p: &[f64], q: &[f64]) -> Result<f64, StatsError> {
    let mut sum = 0.0;
    for (bin, (&pb, &qb)) in p.iter().zip(q).enumerate() {
        if pb > 0.0 {
            if qb <= 0.0 {
                return Err(StatsError::Infinite { bin });
            }
            sum += pb * (pb / qb).ln();
        }
    }
    Ok(sum)
}

/// Jensen-Shannon divergence, bounded by `ln 2`.
pub fn jsd(p: &EmpiricalDistribution, q: &EmpiricalDistribution) -> Result<f64, StatsError> {
    if p.edges != q.edges {
        return Err(StatsError::Incompatible);
    }
    Ok(jsd_masses(&p.mass, &q.mass))
}

fn jsd_masses(p: &[f64], q: &[f64]) -> f64 {
    let m: Vec<f64> = p.iter().zip(q).map(|(a, b)| 0.5 * (a + b)).collect();
    // m >= p/2 and m >= q/2, so neither term can be infinite
    let d_pm = kl_masses(p, &m).unwrap_or(f64::INFINITY);
    let d_qm = kl_masses(q, &m).unwrap_or(f64::INFINITY);
    0.5 * d_pm + 0.5 * d_qm
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PermutationConfig {
    pub permutations: usize,
    pub histogram: HistogramConfig,
    pub seed: u64,
}

impl Default for PermutationConfig {
    fn default() -> Self {
        PermutationConfig {
            permutations: 999,
            histogram: HistogramConfig::default(),
            seed: 42,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PermutationResult {
    pub observed_jsd: f64,
    pub permuted_jsds: Vec<f64>,
    /// Rank of the observation among all `M + 1` values over `M + 1`.
    pub p_value: f64,
    pub mean_permuted: f64,
    /// Sample standard deviation (divisor `M - 1`; zero when `M = 1`).
    pub sd_permuted: f64,
    pub seed: u64,
}

/// JSD between the true grouping and `M` random relabelings that preserve
/// group sizes.
///
/// Each relabeling draws from its own ChaCha stream keyed by the iteration
/// index, so the result does not depend on evaluation order. Permuted values
/// tying the observation count against significance.
pub fn permutation_test(
    group_a: &[f64],
    group_b: &[f64],
    config: PermutationConfig,
) -> Result<PermutationResult, StatsError> {
    if config.permutations == 0 {
        return Err(StatsError::Params("need at least one permutation".into()));
    }
    if !(config.histogram.smoothing >= 0.0) {
        return Err(StatsError::Params(format!("smoothing {}", config.histogram.smoothing)));
    }
    let binning = Binning::pooled(group_a, group_b, config.histogram.bins)?;
    let bins = config.histogram.bins;
    let pooled: Vec<usize> = group_a
        .iter()
        .chain(group_b)
        .map(|&x| binning.index(x))
        .collect();
    let (na, n) = (group_a.len(), pooled.len());
    let mut total = vec![0usize; bins];
    for &b in &pooled {
        total[b] += 1;
    }

    let divergence = |a_counts: &[usize]| {
        let b_counts: Vec<usize> = total.iter().zip(a_counts).map(|(t, a)| t - a).collect();
        let p = smoothed_mass(a_counts, na, config.histogram.smoothing);
        let q = smoothed_mass(&b_counts, n - na, config.histogram.smoothing);
        jsd_masses(&p, &q)
    };
    let mut observed_counts = vec![0usize; bins];
    for &b in &pooled[..na] {
        observed_counts[b] += 1;
    }
    let observed_jsd = divergence(&observed_counts);

    // Shuffle only the smaller side into the prefix.
    let take = na.min(n - na);
    let permuted_jsds: Vec<f64> = (0..config.permutations)
        .into_par_iter()
        .map(|m| {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            rng.set_stream(m as u64 + 1);
            let mut order: Vec<u32> = (0..n as u32).collect();
            let (chosen, _) = order.partial_shuffle(&mut rng, take);
            let mut counts = vec![0usize; bins];
            for &i in chosen.iter() {
                counts[pooled[i as usize]] += 1;
            }
            if take != na {
                counts = total.iter().zip(&counts).map(|(t, c)| t - c).collect();
            }
            divergence(&counts)
        })
        .collect();

    let m = permuted_jsds.len();
    let rank = 1 + permuted_jsds.iter().filter(|&&j| j >= observed_jsd).count();
    let mean_permuted = permuted_jsds.iter().sum::<f64>() / m as f64;
    let sd_permuted = if m > 1 {
        (permuted_jsds
            .iter()
            .map(|j| (j - mean_permuted).powi(2))
            .sum::<f64>()
            / (m - 1) as f64)
            .sqrt()
    } else {
        0.0
    };
    Ok(PermutationResult {
        observed_jsd,
        permuted_jsds,
        p_value: rank as f64 / (m + 1) as f64,
        mean_permuted,
        sd_permuted,
        seed: config.seed,
    })
}
