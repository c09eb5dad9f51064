//! Finite-class chaining under the empirical Rademacher metric.
//!
//! The symmetrized process over a finite binary hypothesis class,
//!
//! ```text
//!   X_w = (1/sqrt(n)) sum_i R_i (l(w, Z_i+) - l(w, Z_i-)),
//! ```
//!
//! is sub-Gaussian given the sample pair under
//! `d²(w, u) = (2/n) (disagreements on Z+) + (2/n) (disagreements on Z-)`.
//! A nested hierarchy of greedy epsilon-nets at radii `2^-k` yields the
//! deterministic chain `W_k = nearest net center of W_(k+1)` and the bound
//! `sum 2^(-k+1) sqrt(2 ln |P_k|)`; divided by `sqrt(n)` this is the
//! generalization bound, which scales like `sqrt(d_vc / n)`.

use crate::chain::{ChainLevel, ChainSpec, ChainStart, TailMajorant, TruncationPolicy};
use crate::error::{domain, precondition, Result};
use crate::estimators::McEstimate;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A finite class of binary classifiers over a fixed instance set, stored as
/// label vectors. Duplicates are removed at construction.
#[derive(Debug, Clone)]
pub struct FiniteClass {
    hypotheses: Vec<Vec<u8>>,
    /// Sample count per empirical draw.
    n: usize,
}

impl FiniteClass {
    pub fn new(hypotheses: Vec<Vec<u8>>, n: usize) -> Result<Self> {
        if hypotheses.is_empty() {
            return Err(domain("hypothesis class must be nonempty"));
        }
        if n == 0 {
            return Err(precondition("sample count n must be at least 1"));
        }
        let width = hypotheses[0].len();
        if width == 0 {
            return Err(domain("instance set must be nonempty"));
        }
        let mut seen = std::collections::HashSet::new();
        let mut unique = Vec::new();
        for h in hypotheses {
            if h.len() != width {
                return Err(domain(format!(
                    "all label vectors must have length {width}, got {}",
                    h.len()
                )));
            }
            if h.iter().any(|&b| b > 1) {
                return Err(domain("label vectors must be 0/1-valued"));
            }
            if seen.insert(h.clone()) {
                unique.push(h);
            }
        }
        Ok(Self { hypotheses: unique, n })
    }

    /// Threshold classifiers `h_t(x) = 1{x >= t}` over `points` instances.
    pub fn thresholds(points: usize, n: usize) -> Result<Self> {
        let hypotheses = (0..=points)
            .map(|t| (0..points).map(|x| u8::from(x >= t)).collect())
            .collect();
        Self::new(hypotheses, n)
    }

    /// Interval classifiers `h_(a,b)(x) = 1{a <= x <= b}` over `points`
    /// instances, plus the empty classifier.
    pub fn intervals(points: usize, n: usize) -> Result<Self> {
        let mut hypotheses: Vec<Vec<u8>> = vec![vec![0; points]];
        for a in 0..points {
            for b in a..points {
                hypotheses.push((0..points).map(|x| u8::from(x >= a && x <= b)).collect());
            }
        }
        Self::new(hypotheses, n)
    }

    pub fn len(&self) -> usize {
        self.hypotheses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.hypotheses.is_empty()
    }

    pub fn instance_count(&self) -> usize {
        self.hypotheses[0].len()
    }

    pub fn sample_count(&self) -> usize {
        self.n
    }

    pub fn hypothesis(&self, i: usize) -> &[u8] {
        &self.hypotheses[i]
    }
}

/// One labeled draw: instance index and binary label.
pub type LabeledSample = (usize, u8);

/// A sampled pair of instance multisets and the induced empirical
/// pseudometric, with per-hypothesis loss vectors bit-packed for fast
/// Hamming counts.
#[derive(Debug, Clone)]
pub struct EmpiricalMetricContext {
    z_plus: Vec<LabeledSample>,
    z_minus: Vec<LabeledSample>,
    loss_plus: Vec<Vec<u64>>,
    loss_minus: Vec<Vec<u64>>,
    n: usize,
    words: usize,
}

impl EmpiricalMetricContext {
    /// Draw `n` instances per side uniformly with uniform labels.
    pub fn sample(class: &FiniteClass, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = class.instance_count();
        let draw = |rng: &mut ChaCha8Rng| -> Vec<LabeledSample> {
            (0..class.n)
                .map(|_| (rng.gen_range(0..m), rng.gen_range(0..=1u8)))
                .collect()
        };
        let z_plus = draw(&mut rng);
        let z_minus = draw(&mut rng);
        Self::from_samples(class, z_plus, z_minus).expect("samples drawn to size")
    }

    /// Build the context from explicit sample multisets.
    pub fn from_samples(
        class: &FiniteClass,
        z_plus: Vec<LabeledSample>,
        z_minus: Vec<LabeledSample>,
    ) -> Result<Self> {
        if z_plus.len() != class.n || z_minus.len() != class.n {
            return Err(domain(format!(
                "sample multisets must have size n = {}, got {} and {}",
                class.n,
                z_plus.len(),
                z_minus.len()
            )));
        }
        let m = class.instance_count();
        for &(x, y) in z_plus.iter().chain(&z_minus) {
            if x >= m || y > 1 {
                return Err(domain(format!("invalid sample ({x}, {y})")));
            }
        }
        let words = class.n.div_ceil(64);
        let pack = |samples: &[LabeledSample]| -> Vec<Vec<u64>> {
            class
                .hypotheses
                .iter()
                .map(|h| {
                    let mut bits = vec![0u64; words];
                    for (i, &(x, y)) in samples.iter().enumerate() {
                        if h[x] != y {
                            bits[i / 64] |= 1u64 << (i % 64);
                        }
                    }
                    bits
                })
                .collect()
        };
        Ok(Self {
            loss_plus: pack(&z_plus),
            loss_minus: pack(&z_minus),
            z_plus,
            z_minus,
            n: class.n,
            words,
        })
    }

    pub fn z_plus(&self) -> &[LabeledSample] {
        &self.z_plus
    }

    pub fn z_minus(&self) -> &[LabeledSample] {
        &self.z_minus
    }

    fn disagreements(a: &[u64], b: &[u64]) -> u32 {
        a.iter().zip(b).map(|(x, y)| (x ^ y).count_ones()).sum()
    }

    /// Squared empirical metric
    /// `(2/n) sum (l(w,z+) - l(u,z+))² + (2/n) sum (l(w,z-) - l(u,z-))²`.
    pub fn dist_sq(&self, w: usize, u: usize) -> f64 {
        let c = Self::disagreements(&self.loss_plus[w], &self.loss_plus[u])
            + Self::disagreements(&self.loss_minus[w], &self.loss_minus[u]);
        2.0 * c as f64 / self.n as f64
    }

    pub fn dist(&self, w: usize, u: usize) -> f64 {
        self.dist_sq(w, u).sqrt()
    }

    /// Smallest strictly positive pairwise distance, if any.
    fn min_positive_dist(&self, count: usize) -> Option<f64> {
        let mut best: Option<f64> = None;
        for w in 0..count {
            for u in w + 1..count {
                let d = self.dist(w, u);
                if d > 0.0 && best.is_none_or(|b| d < b) {
                    best = Some(d);
                }
            }
        }
        best
    }
}

/// Greedy cover: repeatedly take the lowest-index uncovered hypothesis as a
/// center and mark its closed `radius`-ball covered.
pub fn greedy_cover(
    class: &FiniteClass,
    ctx: &EmpiricalMetricContext,
    radius: f64,
) -> Result<Vec<usize>> {
    if !(radius > 0.0) {
        return Err(precondition(format!("radius must be positive, got {radius}")));
    }
    let h = class.len();
    let mut covered = vec![false; h];
    let mut net = Vec::new();
    for i in 0..h {
        if covered[i] {
            continue;
        }
        net.push(i);
        for u in i..h {
            if !covered[u] && ctx.dist(i, u) <= radius {
                covered[u] = true;
            }
        }
    }
    Ok(net)
}

/// One level of the net hierarchy: the net (hypothesis indices) and the
/// nearest-center assignment for every hypothesis (ties to the lowest index).
#[derive(Debug, Clone)]
pub struct NetLevel {
    pub k: i64,
    pub net: Vec<usize>,
    pub assign: Vec<usize>,
}

/// Nested greedy nets at radii `2^-k` for `k` from the single-ball root
/// scale to the separating scale.
#[derive(Debug, Clone)]
pub struct NetHierarchy {
    pub levels: Vec<NetLevel>,
}

impl NetHierarchy {
    /// Root scale `k0` (net size 1).
    pub fn k_root(&self) -> i64 {
        self.levels[0].k
    }

    /// Separating scale `k1`.
    pub fn k_leaf(&self) -> i64 {
        self.levels[self.levels.len() - 1].k
    }

    /// Follow assignments from the leaf level down to the root.
    pub fn descend(&self, hypothesis: usize) -> usize {
        let mut w = hypothesis;
        for level in self.levels.iter().rev() {
            w = level.assign[w];
        }
        w
    }
}

fn nearest_center(ctx: &EmpiricalMetricContext, net: &[usize], h: usize) -> usize {
    let mut best = net[0];
    let mut best_d = ctx.dist(best, h);
    for &c in &net[1..] {
        let d = ctx.dist(c, h);
        if d < best_d {
            best = c;
            best_d = d;
        }
    }
    best
}

/// Build the full hierarchy: `k0` is the largest scale whose greedy net is a
/// single ball, `k1` the first scale finer than the smallest positive
/// pairwise distance (where the net separates all distinct hypotheses).
pub fn build_hierarchy(
    class: &FiniteClass,
    ctx: &EmpiricalMetricContext,
) -> Result<NetHierarchy> {
    let h = class.len();
    let trivial = |assign: Vec<usize>| NetHierarchy {
        levels: vec![NetLevel {
            k: 0,
            net: vec![0],
            assign,
        }],
    };
    if h == 1 {
        return Ok(trivial(vec![0]));
    }
    let r_max = (1..h).map(|u| ctx.dist(0, u)).fold(0.0f64, f64::max);
    let Some(min_pos) = ctx.min_positive_dist(h) else {
        // empirically indistinguishable class: the process is constant in w
        return Ok(trivial(vec![0; h]));
    };
    if r_max == 0.0 {
        return Ok(trivial(vec![0; h]));
    }

    let radius = |k: i64| (-(k as f64)).exp2();
    let mut k0 = (-r_max.log2()).floor() as i64;
    while radius(k0) < r_max {
        k0 -= 1;
    }
    while radius(k0 + 1) >= r_max {
        k0 += 1;
    }
    let mut k1 = (-min_pos.log2()).floor() as i64 + 1;
    while radius(k1) >= min_pos {
        k1 += 1;
    }
    while k1 - 1 > k0 && radius(k1 - 1) < min_pos {
        k1 -= 1;
    }
    debug_assert!(k1 > k0);

    let mut levels = vec![NetLevel {
        k: k0,
        net: vec![0],
        assign: vec![0; h],
    }];
    for k in k0 + 1..=k1 {
        let net = greedy_cover(class, ctx, radius(k))?;
        let assign = (0..h).map(|i| nearest_center(ctx, &net, i)).collect();
        levels.push(NetLevel { k, net, assign });
    }
    Ok(NetHierarchy { levels })
}

/// The chained covering bound `sum_(k=k0+1..k1) 2^(-k+1) sqrt(2 ln |P_k|)`,
/// evaluated through the partition-chain machinery. Dividing by `sqrt(n)`
/// gives the generalization bound.
pub fn covering_bound(hierarchy: &NetHierarchy) -> f64 {
    if hierarchy.levels.len() <= 1 {
        return 0.0;
    }
    let levels: Vec<ChainLevel> = hierarchy.levels[1..]
        .iter()
        .map(|level| {
            let link = ((1 - level.k) as f64).exp2();
            ChainLevel::new(level.k, link * link).with_mi((level.net.len() as f64).ln())
        })
        .collect();
    let policy = TruncationPolicy {
        abs_tol: 1e-10,
        max_levels_each_side: levels.len().max(1),
        tail_majorant: TailMajorant::None,
    };
    let chain = ChainSpec::new(levels, ChainStart::At(hierarchy.k_root()), policy, "net hierarchy")
        .expect("hierarchy levels are well-formed")
        .mark_partition();
    crate::chain::evaluate_mi_bound(&chain)
        .expect("complete finite chain evaluates")
        .total
}

/// Exact VC dimension by exhaustive shattering search (instance sets up to
/// 20 points).
pub fn vc_dimension(class: &FiniteClass) -> Result<usize> {
    let m = class.instance_count();
    if m > 20 {
        return Err(precondition(format!(
            "exhaustive shattering search is limited to 20 instances, got {m}"
        )));
    }
    let mut d = 0;
    for s in 1..=m {
        if (1usize << s) > class.len() {
            break; // cannot realize 2^s patterns with fewer hypotheses
        }
        if any_shattered_subset(class, s) {
            d = s;
        } else {
            break;
        }
    }
    Ok(d)
}

fn any_shattered_subset(class: &FiniteClass, size: usize) -> bool {
    let m = class.instance_count();
    let mut subset: Vec<usize> = (0..size).collect();
    loop {
        if is_shattered(class, &subset) {
            return true;
        }
        // next combination in lexicographic order
        let mut i = size;
        loop {
            if i == 0 {
                return false;
            }
            i -= 1;
            if subset[i] != i + m - size {
                break;
            }
            if i == 0 {
                return false;
            }
        }
        subset[i] += 1;
        for j in i + 1..size {
            subset[j] = subset[j - 1] + 1;
        }
    }
}

fn is_shattered(class: &FiniteClass, subset: &[usize]) -> bool {
    let want = 1usize << subset.len();
    let mut patterns = std::collections::HashSet::with_capacity(want);
    for h in 0..class.len() {
        let mut pat = 0usize;
        for (bit, &x) in subset.iter().enumerate() {
            pat |= (class.hypothesis(h)[x] as usize) << bit;
        }
        patterns.insert(pat);
        if patterns.len() == want {
            return true;
        }
    }
    false
}

/// Monte Carlo estimate of `E[X_W | Z±]` where `W` is the empirical risk
/// minimizer over the Rademacher-selected data set (ties to the lowest
/// index). The value is on the `sqrt(n)`-scaled process; divide by
/// `sqrt(n)` for the generalization scale.
pub fn rademacher_erm_estimate(
    class: &FiniteClass,
    ctx: &EmpiricalMetricContext,
    trials: u64,
    seed: u64,
) -> Result<McEstimate> {
    if trials < 100 {
        return Err(precondition(format!("trials must be >= 100, got {trials}")));
    }
    let n = ctx.n;
    let words = ctx.words;
    let last_mask = if n % 64 == 0 {
        u64::MAX
    } else {
        (1u64 << (n % 64)) - 1
    };
    let sqrt_n = (n as f64).sqrt();
    let h = class.len();
    Ok(crate::estimators::run_mc(trials, seed, move |rng| {
        let mut r = vec![0u64; words];
        for (i, word) in r.iter_mut().enumerate() {
            *word = rng.gen::<u64>();
            if i == words - 1 {
                *word &= last_mask;
            }
        }
        // ERM over the training selection; the bit at i picks which of the
        // pair is held out, so X_w measures held-out minus training loss
        let mut best = 0usize;
        let mut best_risk = u32::MAX;
        for w in 0..h {
            let mut risk = 0u32;
            for j in 0..words {
                let train = (ctx.loss_minus[w][j] & r[j])
                    | (ctx.loss_plus[w][j] & !r[j] & last_mask_at(j, words, last_mask));
                risk += train.count_ones();
            }
            if risk < best_risk {
                best_risk = risk;
                best = w;
            }
        }
        // X_w at the chosen hypothesis
        let mut signed = 0i64;
        for j in 0..words {
            let mask = last_mask_at(j, words, last_mask);
            let lp = ctx.loss_plus[best][j];
            let lm = ctx.loss_minus[best][j];
            let p_in = (lp & r[j]).count_ones() as i64;
            let m_in = (lm & r[j]).count_ones() as i64;
            let p_out = (lp & !r[j] & mask).count_ones() as i64;
            let m_out = (lm & !r[j] & mask).count_ones() as i64;
            signed += (p_in - m_in) - (p_out - m_out);
        }
        signed as f64 / sqrt_n
    }))
}

fn last_mask_at(j: usize, words: usize, last_mask: u64) -> u64 {
    if j == words - 1 {
        last_mask
    } else {
        u64::MAX
    }
}
