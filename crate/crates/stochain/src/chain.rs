//! Chained-series bound evaluation.
//!
//! A stochastic chain `{W_k}` decomposes the expected supremum of a
//! sub-Gaussian process into per-level increments. Each level carries an
//! expected squared link distance `E[d²(W_k, W_(k-1))]` and an information
//! term, and the bound is the series
//!
//! ```text
//!   E[X_W] <= sum_k sqrt(E[d²(W_k, W_(k-1))]) * sqrt(2 I_k)
//! ```
//!
//! (mutual-information form), or `sum_k E[d * sqrt(2 KL_k)]` when the
//! per-level KL-conditional expectations are supplied as data. Finite
//! evaluation adds a certified geometric tail bound for the omitted levels.

use crate::error::{domain, invariant, precondition, Error, Result};
use crate::render::{json_escape, sig12};

/// One link of a stochastic chain.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainLevel {
    /// Level index `k`.
    pub k: i64,
    /// Expected squared metric distance `E[d²(W_k, W_(k-1))]` (metric units²).
    pub link_dist_sq: f64,
    /// Upper bound on the mutual information at this level (nats).
    pub mi_upper: Option<f64>,
    /// Per-level KL-conditional term `E[d * sqrt(2 KL)]` (metric units · √nats).
    pub kl_term: Option<f64>,
}

impl ChainLevel {
    pub fn new(k: i64, link_dist_sq: f64) -> Self {
        Self {
            k,
            link_dist_sq,
            mi_upper: None,
            kl_term: None,
        }
    }

    pub fn with_mi(mut self, mi_upper: f64) -> Self {
        self.mi_upper = Some(mi_upper);
        self
    }

    pub fn with_kl(mut self, kl_term: f64) -> Self {
        self.kl_term = Some(kl_term);
        self
    }

    fn validate(&self) -> Result<()> {
        if !self.link_dist_sq.is_finite() || self.link_dist_sq < 0.0 {
            return Err(invariant(format!(
                "link_dist_sq must be finite and nonnegative at k={}, got {}",
                self.k, self.link_dist_sq
            )));
        }
        if let Some(mi) = self.mi_upper {
            if !mi.is_finite() || mi < 0.0 {
                return Err(invariant(format!(
                    "mi_upper must be finite and nonnegative at k={}, got {mi}",
                    self.k
                )));
            }
        }
        if let Some(kl) = self.kl_term {
            if !kl.is_finite() || kl < 0.0 {
                return Err(invariant(format!(
                    "kl_term must be finite and nonnegative at k={}, got {kl}",
                    self.k
                )));
            }
        }
        Ok(())
    }
}

/// The chain's starting index `k0`; the series runs from `k0 + 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChainStart {
    /// Doubly infinite chain; both series tails are truncated and certified.
    MinusInfinity,
    /// Finite root: the first level is `k0 + 1` and there is no lower tail.
    At(i64),
}

/// How the omitted series tail is certified.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TailMajorant {
    /// Bound the tail by a geometric series with the observed edge ratio.
    Geometric,
    /// No tail bound; the caller asserts the supplied chain is complete.
    None,
}

/// Truncation policy for finite evaluation of an infinite chained series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncationPolicy {
    /// Stop extending a side once its contribution falls below this (bound units).
    pub abs_tol: f64,
    /// Hard cap on the number of levels on each side of k = 0 (or above k0).
    pub max_levels_each_side: usize,
    pub tail_majorant: TailMajorant,
}

impl TruncationPolicy {
    pub fn new(abs_tol: f64, max_levels_each_side: usize, tail_majorant: TailMajorant) -> Result<Self> {
        let policy = Self {
            abs_tol,
            max_levels_each_side,
            tail_majorant,
        };
        policy.validate()?;
        Ok(policy)
    }

    fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0) {
            return Err(invariant(format!(
                "abs_tol must be positive, got {}",
                self.abs_tol
            )));
        }
        if self.max_levels_each_side == 0 {
            return Err(invariant("max_levels_each_side must be at least 1"));
        }
        Ok(())
    }
}

impl Default for TruncationPolicy {
    fn default() -> Self {
        Self {
            abs_tol: 1e-10,
            max_levels_each_side: 200,
            tail_majorant: TailMajorant::Geometric,
        }
    }
}

/// An ordered stochastic chain plus evaluation metadata.
#[derive(Debug, Clone)]
pub struct ChainSpec {
    levels: Vec<ChainLevel>,
    k_start: ChainStart,
    truncation: TruncationPolicy,
    label: String,
    partition: bool,
}

impl ChainSpec {
    pub fn new(
        levels: Vec<ChainLevel>,
        k_start: ChainStart,
        truncation: TruncationPolicy,
        label: impl Into<String>,
    ) -> Result<Self> {
        truncation.validate()?;
        for level in &levels {
            level.validate()?;
        }
        for pair in levels.windows(2) {
            if pair[1].k <= pair[0].k {
                return Err(invariant(format!(
                    "level indices must be strictly increasing; got {} after {}",
                    pair[1].k, pair[0].k
                )));
            }
        }
        if let ChainStart::At(k0) = k_start {
            if let Some(first) = levels.first() {
                if first.k != k0 + 1 {
                    return Err(invariant(format!(
                        "first level must be k0+1 = {} for a chain rooted at k0 = {k0}, got {}",
                        k0 + 1,
                        first.k
                    )));
                }
            }
        }
        Ok(Self {
            levels,
            k_start,
            truncation,
            label: label.into(),
            partition: false,
        })
    }

    /// Build a chain adaptively from per-level closures.
    ///
    /// Starting from `k0 + 1` (or symmetrically around `k = 0` for a doubly
    /// infinite chain), levels are appended until the per-level contribution
    /// `sqrt(link_dist_sq * 2 * mi_upper)` drops below `abs_tol` while
    /// non-increasing, or the per-side cap is hit. With a geometric majorant
    /// the series must be decaying at the window edge, otherwise the tail is
    /// not certifiable and an error is returned.
    pub fn adaptive(
        k_start: ChainStart,
        truncation: TruncationPolicy,
        label: impl Into<String>,
        link_dist_sq: impl Fn(i64) -> f64,
        mi_upper: impl Fn(i64) -> f64,
    ) -> Result<Self> {
        let contribution = |k: i64| -> f64 { (link_dist_sq(k) * 2.0 * mi_upper(k)).sqrt() };
        let cap = truncation.max_levels_each_side as i64;
        let done = |c: f64, c_prev: f64| c < truncation.abs_tol && c <= c_prev;

        let (k_lo, k_hi) = match k_start {
            ChainStart::At(k0) => {
                let mut hi = k0 + 1;
                let mut c_prev = contribution(hi);
                while hi - k0 < cap {
                    let c = contribution(hi + 1);
                    let stop = done(c, c_prev);
                    c_prev = c;
                    hi += 1;
                    if stop {
                        break;
                    }
                }
                (k0 + 1, hi)
            }
            ChainStart::MinusInfinity => {
                let mut hi = 0;
                let mut c_prev = contribution(0);
                while hi < cap {
                    let c = contribution(hi + 1);
                    let stop = done(c, c_prev);
                    c_prev = c;
                    hi += 1;
                    if stop {
                        break;
                    }
                }
                let mut lo = 0;
                let mut c_prev = contribution(0);
                while lo > -cap {
                    let c = contribution(lo - 1);
                    let stop = done(c, c_prev);
                    c_prev = c;
                    lo -= 1;
                    if stop {
                        break;
                    }
                }
                (lo, hi)
            }
        };

        let levels = (k_lo..=k_hi)
            .map(|k| ChainLevel::new(k, link_dist_sq(k)).with_mi(mi_upper(k)))
            .collect();
        Self::new(levels, k_start, truncation, label)
    }

    pub fn levels(&self) -> &[ChainLevel] {
        &self.levels
    }

    pub fn k_start(&self) -> ChainStart {
        self.k_start
    }

    pub fn truncation(&self) -> &TruncationPolicy {
        &self.truncation
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Fill the mutual-information field of every level from `f`.
    pub fn fill_mi(&mut self, f: impl Fn(i64) -> f64) -> Result<()> {
        for level in &mut self.levels {
            let mi = f(level.k);
            if !mi.is_finite() || mi < 0.0 {
                return Err(invariant(format!(
                    "mi_upper must be finite and nonnegative at k={}, got {mi}",
                    level.k
                )));
            }
            level.mi_upper = Some(mi);
        }
        Ok(())
    }

    /// Fill the KL-conditional term of every level from `f`.
    pub fn fill_kl(&mut self, f: impl Fn(i64) -> f64) -> Result<()> {
        for level in &mut self.levels {
            let kl = f(level.k);
            if !kl.is_finite() || kl < 0.0 {
                return Err(invariant(format!(
                    "kl_term must be finite and nonnegative at k={}, got {kl}",
                    level.k
                )));
            }
            level.kl_term = Some(kl);
        }
        Ok(())
    }

    pub(crate) fn mark_partition(mut self) -> Self {
        self.partition = true;
        self
    }
}

/// Which per-level form produced a [`BoundReport`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundVariant {
    MiForm,
    KlForm,
    CgfForm,
    PartitionForm,
}

impl BoundVariant {
    pub fn as_str(self) -> &'static str {
        match self {
            BoundVariant::MiForm => "mi_form",
            BoundVariant::KlForm => "kl_form",
            BoundVariant::CgfForm => "cgf_form",
            BoundVariant::PartitionForm => "partition_form",
        }
    }
}

/// The evaluated bound: per-level contributions, their sum, and a certified
/// bound on the omitted tail. The reported guarantee is `total + tail_bound`.
#[derive(Debug, Clone)]
pub struct BoundReport {
    pub variant: BoundVariant,
    pub total: f64,
    pub tail_bound: f64,
    pub per_level: Vec<(i64, f64)>,
    pub label: String,
}

impl BoundReport {
    /// The certified guarantee: series total plus the omitted-tail bound.
    pub fn guarantee(&self) -> f64 {
        self.total + self.tail_bound
    }

    /// Serialize as JSON with fixed field order and 12-significant-digit reals.
    pub fn to_json(&self) -> String {
        let mut out = String::with_capacity(64 + 32 * self.per_level.len());
        out.push_str("{\"variant\":\"");
        out.push_str(self.variant.as_str());
        out.push_str("\",\"total\":");
        out.push_str(&sig12(self.total));
        out.push_str(",\"tail_bound\":");
        out.push_str(&sig12(self.tail_bound));
        out.push_str(",\"per_level\":[");
        for (i, (k, c)) in self.per_level.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            out.push_str(&format!("[{},{}]", k, sig12(*c)));
        }
        out.push_str("],\"label\":\"");
        out.push_str(&json_escape(&self.label));
        out.push_str("\"}");
        out
    }
}

/// Certified bound on one omitted tail from the two edge contributions.
///
/// Valid when the term ratio is nonincreasing beyond the window edge, which
/// holds for the geometric-tailed chains evaluated here.
fn side_tail(c_edge: f64, c_prev: f64) -> Result<f64> {
    if c_edge == 0.0 {
        return Ok(0.0);
    }
    if c_prev <= 0.0 || !c_prev.is_finite() {
        return Err(Error::Tail(
            "edge contribution follows a zero term; no geometric ratio available".into(),
        ));
    }
    let r = c_edge / c_prev;
    if r >= 1.0 {
        return Err(Error::Tail(format!(
            "series not decaying at the window edge (ratio {r}); extend the window"
        )));
    }
    Ok(c_edge * r / (1.0 - r))
}

/// Tail certification for externally computed per-level contributions
/// (used by the CGF-form evaluator).
pub(crate) fn certify_tail_for(chain: &ChainSpec, contributions: &[f64]) -> Result<f64> {
    certified_tail(contributions, chain.k_start, &chain.truncation)
}

fn certified_tail(
    contributions: &[f64],
    k_start: ChainStart,
    policy: &TruncationPolicy,
) -> Result<f64> {
    match policy.tail_majorant {
        TailMajorant::None => Ok(0.0),
        TailMajorant::Geometric => {
            if contributions.len() < 2 {
                return Err(Error::Tail(
                    "geometric tail certification needs at least two levels".into(),
                ));
            }
            let n = contributions.len();
            let mut tail = side_tail(contributions[n - 1], contributions[n - 2])?;
            if k_start == ChainStart::MinusInfinity {
                tail += side_tail(contributions[0], contributions[1])?;
            }
            Ok(tail)
        }
    }
}

fn report(
    chain: &ChainSpec,
    contributions: Vec<f64>,
    variant: BoundVariant,
) -> Result<BoundReport> {
    let tail_bound = certified_tail(&contributions, chain.k_start, &chain.truncation)?;
    // total is the plain left-to-right sum of the per-level contributions
    let total = contributions.iter().sum();
    let per_level = chain
        .levels
        .iter()
        .map(|l| l.k)
        .zip(contributions)
        .collect();
    let variant = if chain.partition && variant == BoundVariant::MiForm {
        BoundVariant::PartitionForm
    } else {
        variant
    };
    Ok(BoundReport {
        variant,
        total,
        tail_bound,
        per_level,
        label: chain.label.clone(),
    })
}

/// Evaluate the mutual-information form: per-level contribution
/// `sqrt(link_dist_sq * 2 * mi_upper)`.
pub fn evaluate_mi_bound(chain: &ChainSpec) -> Result<BoundReport> {
    if chain.levels.is_empty() {
        return Err(domain("empty chain"));
    }
    let contributions = chain
        .levels
        .iter()
        .map(|l| {
            let mi = l
                .mi_upper
                .ok_or_else(|| domain(format!("missing mi_upper at level k={}", l.k)))?;
            Ok((l.link_dist_sq * 2.0 * mi).sqrt())
        })
        .collect::<Result<Vec<_>>>()?;
    report(chain, contributions, BoundVariant::MiForm)
}

/// Evaluate the KL-conditional form: the per-level expectations
/// `E[d * sqrt(2 KL)]` are supplied as data and summed.
pub fn evaluate_kl_bound(chain: &ChainSpec) -> Result<BoundReport> {
    if chain.levels.is_empty() {
        return Err(domain("empty chain"));
    }
    let contributions = chain
        .levels
        .iter()
        .map(|l| {
            l.kl_term
                .ok_or_else(|| domain(format!("missing kl_term at level k={}", l.k)))
        })
        .collect::<Result<Vec<_>>>()?;
    report(chain, contributions, BoundVariant::KlForm)
}

/// Deterministic-partition chain: `depth` levels from `k0 + 1` with link
/// distance `3 · 2^{-k}` per level (center-to-center steps in nested
/// partitions). Mutual-information fields are left unset for the caller.
pub fn partition_chain(diam: f64, k0: i64, depth: usize) -> Result<ChainSpec> {
    if !(diam > 0.0) || !diam.is_finite() {
        return Err(precondition(format!("diameter must be positive, got {diam}")));
    }
    if depth == 0 {
        return Err(precondition("depth must be at least 1"));
    }
    let root_radius = (-(k0 as f64)).exp2();
    if root_radius < diam {
        return Err(precondition(format!(
            "2^-k0 = {root_radius} does not cover the diameter {diam}; decrease k0"
        )));
    }
    let levels = (k0 + 1..=k0 + depth as i64)
        .map(|k| {
            let link = 3.0 * (-(k as f64)).exp2();
            ChainLevel::new(k, link * link)
        })
        .collect();
    let policy = TruncationPolicy {
        abs_tol: 1e-10,
        max_levels_each_side: depth,
        tail_majorant: TailMajorant::None,
    };
    Ok(ChainSpec::new(
        levels,
        ChainStart::At(k0),
        policy,
        format!("partition diam={diam} k0={k0} depth={depth}"),
    )?
    .mark_partition())
}
