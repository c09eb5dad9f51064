//! Independent Monte Carlo validation layer.
//!
//! Everything here exists to check the closed forms in the example modules
//! from the outside: generalization-error estimation, plug-in histogram
//! mutual information, empirical sub-Gaussian MGF ceilings, and per-level
//! chained-increment (Donsker-Varadhan direction) checks.
//!
//! Trial `i` draws from a counter-based substream that is a pure function of
//! `(seed, i)`, so serial and parallel execution produce bit-identical
//! results. Reduction is over fixed trial blocks with pairwise summation.

use crate::error::{domain, precondition, Result};
use crate::gaussian::{self, GaussianParams};
use crate::phase::{self, PhaseParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;
/// Trials per reduction block; block boundaries are independent of the
/// thread count.
const MC_BLOCK: u64 = 8192;
/// Angular noise below this width is dropped from the truncated chain-noise
/// sums.
const ANGLE_EPS: f64 = 1e-14;

/// A Monte Carlo estimate: point value, standard error of the mean, trial
/// count, and the master seed that reproduces it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub value: f64,
    pub std_error: f64,
    pub trials: u64,
    pub seed: u64,
}

impl McEstimate {
    fn from_sums(sum: f64, sum_sq: f64, trials: u64, seed: u64) -> Self {
        let n = trials as f64;
        let mean = sum / n;
        let var = ((sum_sq - sum * sum / n) / (n - 1.0)).max(0.0);
        McEstimate {
            value: mean,
            std_error: (var / n).sqrt(),
            trials,
            seed,
        }
    }
}

fn substream(base: &ChaCha8Rng, i: u64) -> ChaCha8Rng {
    let mut rng = base.clone();
    rng.set_stream(i);
    rng
}

/// Pairwise (tree) reduction; deterministic for a fixed block list.
fn pairwise_sum(v: &[(f64, f64)]) -> (f64, f64) {
    match v.len() {
        0 => (0.0, 0.0),
        1 => v[0],
        n => {
            let (a, b) = v.split_at(n / 2);
            let (s0, q0) = pairwise_sum(a);
            let (s1, q1) = pairwise_sum(b);
            (s0 + s1, q0 + q1)
        }
    }
}

/// Run `trials` independent evaluations of `f`, each on its own substream.
pub(crate) fn run_mc(
    trials: u64,
    seed: u64,
    f: impl Fn(&mut ChaCha8Rng) -> f64 + Sync,
) -> McEstimate {
    assert!(trials >= 2, "run_mc needs at least two trials");
    let base = ChaCha8Rng::seed_from_u64(seed);
    let nblocks = trials.div_ceil(MC_BLOCK);
    let blocks: Vec<(f64, f64)> = (0..nblocks)
        .into_par_iter()
        .map(|b| {
            let lo = b * MC_BLOCK;
            let hi = ((b + 1) * MC_BLOCK).min(trials);
            let mut s = 0.0;
            let mut q = 0.0;
            for i in lo..hi {
                let mut rng = substream(&base, i);
                let x = f(&mut rng);
                s += x;
                q += x * x;
            }
            (s, q)
        })
        .collect();
    let (sum, sum_sq) = pairwise_sum(&blocks);
    McEstimate::from_sums(sum, sum_sq, trials, seed)
}

/// Multi-statistic variant: `f` fills `dim` values per trial; returns one
/// `(sum, sum_sq)` pair per component, pairwise-reduced.
fn run_mc_multi(
    trials: u64,
    seed: u64,
    dim: usize,
    f: impl Fn(&mut ChaCha8Rng, &mut [f64]) + Sync,
) -> Vec<(f64, f64)> {
    assert!(trials >= 2 && dim >= 1);
    let base = ChaCha8Rng::seed_from_u64(seed);
    let nblocks = trials.div_ceil(MC_BLOCK);
    let blocks: Vec<Vec<(f64, f64)>> = (0..nblocks)
        .into_par_iter()
        .map(|b| {
            let lo = b * MC_BLOCK;
            let hi = ((b + 1) * MC_BLOCK).min(trials);
            let mut acc = vec![(0.0f64, 0.0f64); dim];
            let mut buf = vec![0.0f64; dim];
            for i in lo..hi {
                let mut rng = substream(&base, i);
                f(&mut rng, &mut buf);
                for (a, &x) in acc.iter_mut().zip(buf.iter()) {
                    a.0 += x;
                    a.1 += x * x;
                }
            }
            acc
        })
        .collect();
    (0..dim)
        .map(|d| {
            let column: Vec<(f64, f64)> = blocks.iter().map(|b| b[d]).collect();
            pairwise_sum(&column)
        })
        .collect()
}

/// Generate `count` values of `f`, one substream per index, in index order.
fn sample_vec(count: usize, seed: u64, f: impl Fn(&mut ChaCha8Rng) -> (f64, f64) + Sync) -> (Vec<f64>, Vec<f64>) {
    let base = ChaCha8Rng::seed_from_u64(seed);
    let pairs: Vec<(f64, f64)> = (0..count as u64)
        .into_par_iter()
        .map(|i| f(&mut substream(&base, i)))
        .collect();
    pairs.into_iter().unzip()
}

/// A named generative process: how to draw data, the learned parameter, the
/// generalization value, and chain levels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ProcessSampler {
    GaussianMean(GaussianParams),
    PhaseRetrieval(PhaseParams),
}

fn wrap_angle(x: f64) -> f64 {
    x.rem_euclid(TWO_PI)
}

impl ProcessSampler {
    pub fn gaussian_mean(mu: f64, sigma: f64, n: u32) -> Result<Self> {
        Ok(ProcessSampler::GaussianMean(GaussianParams::new(mu, sigma, n)?))
    }

    pub fn phase_retrieval(epsilon: f64, gamma: f64) -> Result<Self> {
        Ok(ProcessSampler::PhaseRetrieval(PhaseParams::new(epsilon, gamma)?))
    }

    /// The metric under which the process is sub-Gaussian:
    /// `2 sigma |w - v| / sqrt(n)` for the Gaussian mean, the Euclidean chord
    /// for phase retrieval.
    pub fn metric(&self, w: f64, v: f64) -> f64 {
        match self {
            ProcessSampler::GaussianMean(p) => {
                2.0 * p.sigma * (w - v).abs() / (p.n as f64).sqrt()
            }
            ProcessSampler::PhaseRetrieval(_) => 2.0 * ((w - v) / 2.0).sin().abs(),
        }
    }

    /// Closed-form per-level ceiling `sqrt(E[d²]) sqrt(2 I_k)` for the
    /// chained-increment check.
    pub fn dv_ceiling(&self, k: i64) -> Result<f64> {
        match self {
            ProcessSampler::GaussianMean(p) => {
                Ok((gaussian::link_dist_sq_bound(p, k) * 2.0 * gaussian::mi_level(k)).sqrt())
            }
            ProcessSampler::PhaseRetrieval(p) => {
                if k < 0 {
                    return Err(precondition("phase chain levels start at k = 0"));
                }
                let term = phase::bound_term(p, k as u32);
                Ok(term.link_length * (2.0 * term.mi_upper).sqrt())
            }
        }
    }

    /// One generalization-error draw.
    fn gen_value(&self, rng: &mut ChaCha8Rng) -> f64 {
        match self {
            ProcessSampler::GaussianMean(p) => {
                let (mean, gen_at) = gaussian_data(p, rng);
                gen_at(mean)
            }
            ProcessSampler::PhaseRetrieval(p) => {
                let draw = phase_data(p, rng);
                // population risk is exactly 0; the empirical term is -<t(W), Z>
                draw.w.cos() * draw.g1 + draw.w.sin() * draw.g2
            }
        }
    }

    /// `X_w - X_v` for fixed parameters under one data draw.
    fn process_increment(&self, w: f64, v: f64, rng: &mut ChaCha8Rng) -> f64 {
        match self {
            ProcessSampler::GaussianMean(p) => {
                let (_, gen_at) = gaussian_data(p, rng);
                gen_at(w) - gen_at(v)
            }
            ProcessSampler::PhaseRetrieval(_) => {
                let g1: f64 = rng.sample(StandardNormal);
                let g2: f64 = rng.sample(StandardNormal);
                (w.cos() - v.cos()) * g1 + (w.sin() - v.sin()) * g2
            }
        }
    }

    /// `X_(W_k) - X_(W_(k-1))` for one joint draw of data and chain.
    fn chain_increment(&self, k: i64, rng: &mut ChaCha8Rng) -> f64 {
        match self {
            ProcessSampler::GaussianMean(p) => {
                let (mean, gen_at) = gaussian_data(p, rng);
                let (w_k, w_prev) = gaussian_chain_pair(p, k, mean, rng);
                gen_at(w_k) - gen_at(w_prev)
            }
            ProcessSampler::PhaseRetrieval(p) => {
                let draw = phase_data(p, rng);
                let (w_k, w_prev) = phase_chain_pair(p, k as u32, draw.w, rng);
                let x = |t: f64| t.cos() * draw.g1 + t.sin() * draw.g2;
                x(w_k) - x(w_prev)
            }
        }
    }

    /// Paired samples of (data statistic, chain level `W_k`): the data side
    /// is the sample mean for the Gaussian example and the data phase for
    /// phase retrieval.
    pub fn sample_data_level_pairs(
        &self,
        k: i64,
        count: usize,
        seed: u64,
    ) -> Result<(Vec<f64>, Vec<f64>)> {
        self.check_level(k)?;
        Ok(match self {
            ProcessSampler::GaussianMean(p) => sample_vec(count, seed, |rng| {
                let (mean, _) = gaussian_data(p, rng);
                let (w_k, _) = gaussian_chain_pair(p, k, mean, rng);
                (mean, w_k)
            }),
            ProcessSampler::PhaseRetrieval(p) => sample_vec(count, seed, |rng| {
                let draw = phase_data(p, rng);
                let (w_k, _) = phase_chain_pair(p, k as u32, draw.w, rng);
                (draw.phi, w_k)
            }),
        })
    }

    /// Paired samples of (learned parameter `W`, chain level `W_k`).
    pub fn sample_w_level_pairs(
        &self,
        k: i64,
        count: usize,
        seed: u64,
    ) -> Result<(Vec<f64>, Vec<f64>)> {
        self.check_level(k)?;
        Ok(match self {
            ProcessSampler::GaussianMean(p) => sample_vec(count, seed, |rng| {
                let (mean, _) = gaussian_data(p, rng);
                let (w_k, _) = gaussian_chain_pair(p, k, mean, rng);
                (mean, w_k)
            }),
            ProcessSampler::PhaseRetrieval(p) => sample_vec(count, seed, |rng| {
                let draw = phase_data(p, rng);
                let (w_k, _) = phase_chain_pair(p, k as u32, draw.w, rng);
                (draw.w, w_k)
            }),
        })
    }

    fn check_level(&self, k: i64) -> Result<()> {
        match self {
            ProcessSampler::PhaseRetrieval(_) if k < 0 => {
                Err(precondition("phase chain levels start at k = 0"))
            }
            _ => Ok(()),
        }
    }
}

/// Draw one Gaussian data set; returns the sample mean and the
/// generalization process `w -> gen(w)` for this draw.
fn gaussian_data<'a>(
    p: &'a GaussianParams,
    rng: &mut ChaCha8Rng,
) -> (f64, impl Fn(f64) -> f64 + 'a) {
    let n = p.n as f64;
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for _ in 0..p.n {
        let z = p.mu + p.sigma * rng.sample::<f64, _>(StandardNormal);
        sum += z;
        sum_sq += z * z;
    }
    let mean = sum / n;
    let s2 = p.sigma * p.sigma;
    let mu = p.mu;
    let gen_at = move |w: f64| s2 + (w - mu) * (w - mu) - (sum_sq / n - 2.0 * w * mean + w * w);
    (mean, gen_at)
}

/// Chain pair `(W_k, W_(k-1))` for the Gaussian example given `W = mean`.
fn gaussian_chain_pair(
    p: &GaussianParams,
    k: i64,
    mean: f64,
    rng: &mut ChaCha8Rng,
) -> (f64, f64) {
    let alpha_k = gaussian::shrinkage(k);
    let alpha_prev = gaussian::shrinkage(k - 1);
    let sd = gaussian::level_noise_var(p, k).sqrt(); // N_k and N'_k share this scale
    let n_k = sd * rng.sample::<f64, _>(StandardNormal);
    let n_step = sd * rng.sample::<f64, _>(StandardNormal);
    let w_k = p.mu + alpha_k * (mean - p.mu + n_k);
    let w_prev = p.mu + alpha_prev / alpha_k * (w_k - p.mu) + alpha_prev * n_step;
    (w_k, w_prev)
}

/// One phase-retrieval draw: the data vector, its phase, and the learned
/// (noise-contaminated) parameter.
struct PhaseDraw {
    g1: f64,
    g2: f64,
    /// Phase of the data vector.
    phi: f64,
    /// `phi + zeta mod 2pi`.
    w: f64,
}

fn phase_data(p: &PhaseParams, rng: &mut ChaCha8Rng) -> PhaseDraw {
    let g1: f64 = rng.sample(StandardNormal);
    let g2: f64 = rng.sample(StandardNormal);
    let phi = wrap_angle(g2.atan2(g1));
    let zeta = if rng.gen::<f64>() < p.epsilon {
        0.0
    } else {
        TWO_PI * rng.gen::<f64>()
    };
    PhaseDraw {
        g1,
        g2,
        phi,
        w: wrap_angle(phi + zeta),
    }
}

/// Chain pair `(W_k, W_(k-1))` for the phase example given `W`.
///
/// The cumulative noise sum is truncated once the level width drops below
/// `ANGLE_EPS`; the draw count is a pure function of `(gamma, k)`.
fn phase_chain_pair(p: &PhaseParams, k: u32, w: f64, rng: &mut ChaCha8Rng) -> (f64, f64) {
    let mut n_k = 0.0;
    let mut i = k as i64 + 1;
    loop {
        let width = p.gamma.powi(-(i as i32)) * std::f64::consts::PI;
        if width < ANGLE_EPS || i > k as i64 + 4096 {
            break;
        }
        n_k += width * (2.0 * rng.gen::<f64>() - 1.0);
        i += 1;
    }
    let w_k = wrap_angle(w + n_k);
    let step_width = p.gamma.powi(-(k as i32)) * std::f64::consts::PI;
    let n_step = step_width * (2.0 * rng.gen::<f64>() - 1.0);
    (w_k, wrap_angle(w_k + n_step))
}

/// Monte Carlo estimate of the expected generalization error.
pub fn mc_generalization(sampler: &ProcessSampler, trials: u64, seed: u64) -> Result<McEstimate> {
    if trials < 100 {
        return Err(precondition(format!("trials must be >= 100, got {trials}")));
    }
    Ok(run_mc(trials, seed, |rng| sampler.gen_value(rng)))
}

/// Plug-in mutual information (nats) from a 2-D histogram with automatic
/// per-axis ranges.
pub fn histogram_mi(x: &[f64], y: &[f64], bins: usize) -> Result<f64> {
    let (xr, yr) = (data_range(x), data_range(y));
    histogram_mi_ranged(x, y, bins, xr, yr)
}

/// Plug-in mutual information with explicit bin ranges (circular variables
/// bin uniformly over `[0, 2pi)`).
pub fn histogram_mi_ranged(
    x: &[f64],
    y: &[f64],
    bins: usize,
    x_range: (f64, f64),
    y_range: (f64, f64),
) -> Result<f64> {
    if x.len() != y.len() {
        return Err(domain(format!("length mismatch: {} vs {}", x.len(), y.len())));
    }
    if x.len() < 10_000 {
        return Err(precondition(format!(
            "histogram MI needs at least 10^4 pairs, got {}",
            x.len()
        )));
    }
    if bins < 8 {
        return Err(precondition(format!("bins must be >= 8, got {bins}")));
    }
    let n = x.len() as f64;
    let mut joint = vec![0u64; bins * bins];
    let bx = bin_of(x_range, bins);
    let by = bin_of(y_range, bins);
    for (&xi, &yi) in x.iter().zip(y) {
        joint[bx(xi) * bins + by(yi)] += 1;
    }
    let mut row = vec![0u64; bins];
    let mut col = vec![0u64; bins];
    for i in 0..bins {
        for j in 0..bins {
            row[i] += joint[i * bins + j];
            col[j] += joint[i * bins + j];
        }
    }
    let mut mi = 0.0;
    for i in 0..bins {
        for j in 0..bins {
            let c = joint[i * bins + j];
            if c > 0 {
                let p = c as f64 / n;
                mi += p * ((c as f64 * n) / (row[i] as f64 * col[j] as f64)).ln();
            }
        }
    }
    Ok(mi.max(0.0))
}

fn data_range(v: &[f64]) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &x in v {
        lo = lo.min(x);
        hi = hi.max(x);
    }
    (lo, hi)
}

fn bin_of(range: (f64, f64), bins: usize) -> impl Fn(f64) -> usize {
    let (lo, hi) = range;
    let width = hi - lo;
    move |v: f64| {
        if width <= 0.0 {
            return 0;
        }
        (((v - lo) / width * bins as f64) as usize).min(bins - 1)
    }
}

/// Verdict of one MGF ceiling comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MgfVerdict {
    Pass,
    Fail,
    /// The empirical MGF variance is too large at this lambda to decide
    /// (relative standard error above 0.5).
    Inconclusive,
}

/// Empirical MGF of `X_w - X_v` at one lambda against the sub-Gaussian
/// ceiling `exp(lambda² d²(w, v) / 2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MgfLambdaReport {
    pub lambda: f64,
    pub empirical: f64,
    pub std_error: f64,
    pub ceiling: f64,
    pub verdict: MgfVerdict,
}

impl MgfLambdaReport {
    pub fn passed(&self) -> bool {
        self.verdict == MgfVerdict::Pass
    }
}

/// Check the sub-Gaussian increment hypothesis
/// `E[exp(lambda (X_w - X_v))] <= exp(lambda² d²(w, v)/2)` on a lambda grid.
///
/// Pass means `empirical <= ceiling + 5 standard errors`; the 5-sigma slack
/// absorbs the multiple comparisons across the grid.
pub fn mgf_subgaussian_check(
    sampler: &ProcessSampler,
    pair: (f64, f64),
    lambda_grid: &[f64],
    trials: u64,
    seed: u64,
) -> Result<Vec<MgfLambdaReport>> {
    let (w, v) = pair;
    let d = sampler.metric(w, v);
    if !(d > 0.0) {
        return Err(precondition(format!("pair must be separated, d(w, v) = {d}")));
    }
    if trials < 10_000 {
        return Err(precondition(format!("trials must be >= 10^4, got {trials}")));
    }
    if lambda_grid.is_empty() || lambda_grid.iter().any(|&l| l < 0.0 || !l.is_finite()) {
        return Err(precondition("lambda grid must be nonempty and nonnegative"));
    }
    let sums = run_mc_multi(trials, seed, lambda_grid.len(), |rng, out| {
        let incr = sampler.process_increment(w, v, rng);
        for (slot, &lambda) in out.iter_mut().zip(lambda_grid) {
            *slot = (lambda * incr).exp();
        }
    });
    Ok(lambda_grid
        .iter()
        .zip(sums)
        .map(|(&lambda, (s, q))| {
            let est = McEstimate::from_sums(s, q, trials, seed);
            let ceiling = (0.5 * lambda * lambda * d * d).exp();
            let verdict = if est.std_error > 0.5 * est.value.abs() && lambda > 0.0 {
                MgfVerdict::Inconclusive
            } else if est.value <= ceiling + 5.0 * est.std_error {
                MgfVerdict::Pass
            } else {
                MgfVerdict::Fail
            };
            MgfLambdaReport {
                lambda,
                empirical: est.value,
                std_error: est.std_error,
                ceiling,
                verdict,
            }
        })
        .collect())
}

/// Result of one per-level chained-increment check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DvReport {
    pub k: i64,
    /// Sample mean of `X_(W_k) - X_(W_(k-1))`.
    pub mean_increment: f64,
    pub std_error: f64,
    /// Closed-form ceiling `sqrt(E[d²]) sqrt(2 I_k)`.
    pub ceiling: f64,
    pub pass: bool,
}

/// Verify the per-level step of the chained bound empirically:
/// the mean increment must not exceed the closed-form ceiling by more than
/// five standard errors.
pub fn dv_direction_check(
    sampler: &ProcessSampler,
    k: i64,
    trials: u64,
    seed: u64,
) -> Result<DvReport> {
    if trials < 100 {
        return Err(precondition(format!("trials must be >= 100, got {trials}")));
    }
    let ceiling = sampler.dv_ceiling(k)?;
    let est = run_mc(trials, seed, |rng| sampler.chain_increment(k, rng));
    Ok(DvReport {
        k,
        mean_increment: est.value,
        std_error: est.std_error,
        ceiling,
        pass: est.value <= ceiling + 5.0 * est.std_error,
    })
}

/// Two-sample Kolmogorov-Smirnov comparison.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KsReport {
    pub statistic: f64,
    pub threshold: f64,
    pub reject: bool,
}

/// Two-sample KS test at significance `alpha` (asymptotic critical value).
pub fn ks_two_sample(a: &[f64], b: &[f64], alpha: f64) -> Result<KsReport> {
    if a.len() < 2 || b.len() < 2 {
        return Err(precondition("KS test needs at least two samples per side"));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(precondition(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    let mut xs = a.to_vec();
    let mut ys = b.to_vec();
    xs.sort_by(|p, q| p.total_cmp(q));
    ys.sort_by(|p, q| p.total_cmp(q));
    let (m, n) = (xs.len() as f64, ys.len() as f64);
    let mut i = 0;
    let mut j = 0;
    let mut d: f64 = 0.0;
    while i < xs.len() && j < ys.len() {
        if xs[i] <= ys[j] {
            i += 1;
        } else {
            j += 1;
        }
        d = d.max((i as f64 / m - j as f64 / n).abs());
    }
    let c = (-(alpha / 2.0).ln() / 2.0).sqrt();
    let threshold = c * ((m + n) / (m * n)).sqrt();
    Ok(KsReport {
        statistic: d,
        threshold,
        reject: d > threshold,
    })
}

/// Monte Carlo estimate of the exact expected squared link distance
/// `E[d²(W_k, W_(k-1))]` over the Gaussian chain construction; the
/// closed-form bound must dominate it.
pub fn gaussian_link_dist_sq_mc(
    params: &GaussianParams,
    k: i64,
    trials: u64,
    seed: u64,
) -> Result<McEstimate> {
    if trials < 100 {
        return Err(precondition(format!("trials must be >= 100, got {trials}")));
    }
    let p = *params;
    let metric_sq = 4.0 * p.sigma * p.sigma / p.n as f64;
    Ok(run_mc(trials, seed, move |rng| {
        let w = p.mu + p.mean_variance().sqrt() * rng.sample::<f64, _>(StandardNormal);
        let (w_k, w_prev) = gaussian_chain_pair(&p, k, w, rng);
        metric_sq * (w_k - w_prev) * (w_k - w_prev)
    }))
}

/// Sample `W_(k-1)` by the two equivalent routes (directly, and through
/// `W_k` plus one refinement step); the marginals must agree.
pub fn gaussian_two_route_samples(
    params: &GaussianParams,
    k: i64,
    count: usize,
    seed: u64,
) -> (Vec<f64>, Vec<f64>) {
    let p = *params;
    let alpha_prev = gaussian::shrinkage(k - 1);
    let sd_w = p.mean_variance().sqrt();
    let sd_prev = gaussian::level_noise_var(&p, k - 1).sqrt();
    sample_vec(count, seed, move |rng| {
        // direct construction
        let w = p.mu + sd_w * rng.sample::<f64, _>(StandardNormal);
        let noise = sd_prev * rng.sample::<f64, _>(StandardNormal);
        let direct = p.mu + alpha_prev * (w - p.mu + noise);
        // chained construction from an independent draw
        let w2 = p.mu + sd_w * rng.sample::<f64, _>(StandardNormal);
        let (_, chained) = gaussian_chain_pair(&p, k, w2, rng);
        (direct, chained)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gauss(n: u32) -> ProcessSampler {
        ProcessSampler::gaussian_mean(0.0, 1.0, n).unwrap()
    }

    fn phase_sampler(eps: f64, gamma: f64) -> ProcessSampler {
        ProcessSampler::phase_retrieval(eps, gamma).unwrap()
    }

    #[test]
    fn estimates_are_bit_identical_across_runs_and_thread_counts() {
        let sampler = gauss(10);
        let a = mc_generalization(&sampler, 40_000, 7).unwrap();
        let b = mc_generalization(&sampler, 40_000, 7).unwrap();
        assert_eq!(a, b);
        let single = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap()
            .install(|| mc_generalization(&sampler, 40_000, 7).unwrap());
        let quad = rayon::ThreadPoolBuilder::new()
            .num_threads(4)
            .build()
            .unwrap()
            .install(|| mc_generalization(&sampler, 40_000, 7).unwrap());
        assert_eq!(single, quad);
        assert_eq!(a, single);
    }

    #[test]
    fn gaussian_generalization_matches_closed_form() {
        let sampler = gauss(50);
        let est = mc_generalization(&sampler, 100_000, 11).unwrap();
        let truth = 2.0 / 50.0;
        assert!(
            (est.value - truth).abs() <= 3.0 * est.std_error,
            "{} vs {truth} (se {})",
            est.value,
            est.std_error
        );
    }

    #[test]
    fn generalization_is_invariant_to_the_unknown_mean() {
        // the chain is defined relative to mu; gen error stays 2 sigma²/n
        let shifted = ProcessSampler::gaussian_mean(3.0, 1.0, 20).unwrap();
        let est = mc_generalization(&shifted, 100_000, 4).unwrap();
        assert!((est.value - 0.1).abs() <= 3.0 * est.std_error);
        let dv = dv_direction_check(&shifted, 0, 100_000, 5).unwrap();
        assert!(dv.pass);
    }

    #[test]
    fn zero_mass_phase_generalization_is_zero() {
        let sampler = phase_sampler(0.0, 2.0);
        let est = mc_generalization(&sampler, 50_000, 3).unwrap();
        assert!(est.value.abs() <= 3.0 * est.std_error);
    }

    #[test]
    fn trials_precondition() {
        assert!(mc_generalization(&gauss(5), 99, 0).is_err());
    }

    #[test]
    fn std_error_shrinks_like_inverse_sqrt_trials() {
        let sampler = gauss(10);
        let se = |t: u64| mc_generalization(&sampler, t, 99).unwrap().std_error;
        let (s3, s4, s5) = (se(1_000), se(10_000), se(100_000));
        let expect = 10f64.sqrt();
        for ratio in [s3 / s4, s4 / s5] {
            assert!(
                (ratio / expect - 1.0).abs() < 0.2,
                "ratio {ratio} vs {expect}"
            );
        }
    }

    #[test]
    fn histogram_mi_of_independent_uniforms_is_small() {
        let base = ChaCha8Rng::seed_from_u64(5);
        let mut rng = substream(&base, 0);
        let n = 1_000_000;
        let x: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
        let y: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
        let mi = histogram_mi(&x, &y, 32).unwrap();
        assert!(mi < 0.01, "mi = {mi}");
    }

    #[test]
    fn histogram_mi_saturates_at_bin_entropy_for_identity() {
        let base = ChaCha8Rng::seed_from_u64(6);
        let mut rng = substream(&base, 0);
        let x: Vec<f64> = (0..200_000).map(|_| rng.gen::<f64>()).collect();
        let mi = histogram_mi(&x, &x, 32).unwrap();
        assert!((mi - 32f64.ln()).abs() < 0.02, "mi = {mi}");
    }

    #[test]
    fn histogram_mi_matches_gaussian_channel() {
        // Y = X + N with X, N standard normal: I = 0.5 ln 2
        let base = ChaCha8Rng::seed_from_u64(8);
        let n = 1_000_000;
        let mut x = Vec::with_capacity(n);
        let mut y = Vec::with_capacity(n);
        let mut rng = substream(&base, 0);
        for _ in 0..n {
            let a: f64 = rng.sample(StandardNormal);
            let b: f64 = rng.sample(StandardNormal);
            x.push(a);
            y.push(a + b);
        }
        let mi = histogram_mi(&x, &y, 64).unwrap();
        let truth = 0.5 * 2f64.ln();
        assert!((mi - truth).abs() < 0.02, "mi = {mi} vs {truth}");
    }

    #[test]
    fn histogram_mi_validations() {
        let x = vec![0.0; 10_000];
        let y = vec![0.0; 9_999];
        assert!(histogram_mi(&x, &y, 16).is_err()); // length mismatch
        let y = vec![0.0; 10_000];
        assert!(histogram_mi(&x[..100], &y[..100], 16).is_err()); // too few
        assert!(histogram_mi(&x, &y, 4).is_err()); // too few bins
        assert!(histogram_mi(&x, &y, 16).unwrap() >= 0.0); // constant data
    }

    #[test]
    fn mgf_check_passes_at_lambda_zero_and_moderate_grid() {
        let sampler = gauss(10);
        let reports =
            mgf_subgaussian_check(&sampler, (1.0, 0.0), &[0.0, 0.5, 1.0, 2.0], 50_000, 13)
                .unwrap();
        assert_eq!(reports[0].empirical, 1.0);
        assert_eq!(reports[0].ceiling, 1.0);
        for r in &reports {
            assert!(r.passed(), "lambda {} failed: {r:?}", r.lambda);
        }
    }

    #[test]
    fn mgf_check_is_inconclusive_for_huge_lambda() {
        let sampler = gauss(10);
        let reports = mgf_subgaussian_check(&sampler, (1.0, 0.0), &[40.0], 10_000, 17).unwrap();
        assert_eq!(reports[0].verdict, MgfVerdict::Inconclusive);
    }

    #[test]
    fn mgf_check_passes_for_phase_pair() {
        let sampler = phase_sampler(0.05, 2.0);
        let w = std::f64::consts::FRAC_PI_2;
        let reports = mgf_subgaussian_check(&sampler, (w, 0.0), &[1.0], 50_000, 19).unwrap();
        assert!(reports[0].passed());
        assert!((reports[0].empirical - reports[0].ceiling).abs() <= 5.0 * reports[0].std_error);
    }

    #[test]
    fn mgf_check_rejects_coincident_pair() {
        let sampler = gauss(10);
        assert!(mgf_subgaussian_check(&sampler, (1.0, 1.0), &[0.5], 10_000, 0).is_err());
    }

    #[test]
    fn dv_check_passes_on_both_examples() {
        let g = gauss(10);
        let report = dv_direction_check(&g, 0, 200_000, 23).unwrap();
        assert!(report.pass, "{report:?}");
        assert!(report.mean_increment > 0.0); // the chain refines toward W
        let p = phase_sampler(0.05, 3.75);
        let report = dv_direction_check(&p, 0, 200_000, 29).unwrap();
        assert!(report.pass, "{report:?}");
    }

    #[test]
    fn dv_check_degenerates_to_zero_at_deep_levels() {
        // at k = 60 the refinement step is numerically null: both the mean
        // increment and the ceiling collapse to zero
        let g = gauss(10);
        let report = dv_direction_check(&g, 60, 10_000, 31).unwrap();
        assert!(report.mean_increment.abs() < 1e-6);
        assert!(report.ceiling < 1e-6);
        assert!(report.pass);
    }

    #[test]
    fn phase_levels_below_zero_are_rejected() {
        let p = phase_sampler(0.05, 2.0);
        assert!(dv_direction_check(&p, -1, 10_000, 0).is_err());
    }

    #[test]
    fn ks_accepts_identical_law_and_rejects_shifted_law() {
        let base = ChaCha8Rng::seed_from_u64(37);
        let mut rng = substream(&base, 0);
        let a: Vec<f64> = (0..20_000).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let b: Vec<f64> = (0..20_000).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let same = ks_two_sample(&a, &b, 0.001).unwrap();
        assert!(!same.reject, "{same:?}");
        let shifted: Vec<f64> = b.iter().map(|x| x + 0.1).collect();
        let diff = ks_two_sample(&a, &shifted, 0.001).unwrap();
        assert!(diff.reject, "{diff:?}");
    }

    #[test]
    fn two_route_chain_marginals_agree() {
        let p = GaussianParams::new(0.0, 1.0, 5).unwrap();
        let (direct, chained) = gaussian_two_route_samples(&p, 0, 100_000, 41);
        let report = ks_two_sample(&direct, &chained, 0.001).unwrap();
        assert!(!report.reject, "{report:?}");
    }

    #[test]
    fn data_level_mi_is_bounded_by_closed_form() {
        let g = gauss(5);
        for k in [-2i64, 0, 2] {
            let (data, level) = g.sample_data_level_pairs(k, 300_000, 43).unwrap();
            let mi = histogram_mi(&data, &level, 64).unwrap();
            let closed = gaussian::mi_level(k);
            assert!(mi <= closed + 0.02, "k={k}: {mi} vs {closed}");
        }
    }
}
