//! Cumulant-generating-function machinery for processes that are not
//! sub-Gaussian: a convex `psi` on `[0, b)` with `psi(0) = psi'(0) = 0`, its
//! Legendre dual `psi*(x) = sup_l (l x - psi(l))`, the inverse
//! `psi*^{-1}(y) = inf_l ((y + psi(l)) / l)`, and the chained bound
//! `sum_k sigma_k psi*^{-1}(I_k)`.

use crate::chain::{BoundReport, BoundVariant, ChainSpec};
use crate::error::{domain, invariant, precondition, Result};
use crate::opt::{expand_right_while_decreasing, golden_min};

/// Interval tolerance for the one-dimensional searches.
const SEARCH_TOL: f64 = 1e-10;
/// Expansion cap when the CGF domain is unbounded.
const UNBOUNDED_CAP: f64 = 1e12;

/// A cumulant generating function `psi` on the domain `[0, b)`.
///
/// Construction validates `psi(0) = 0`, a vanishing right derivative at 0,
/// and convexity by sampled second differences.
pub struct CgfSpec {
    psi: Box<dyn Fn(f64) -> f64 + Send + Sync>,
    b: f64,
}

impl CgfSpec {
    pub fn new(psi: impl Fn(f64) -> f64 + Send + Sync + 'static, b: f64) -> Result<Self> {
        if !(b > 0.0) {
            return Err(invariant(format!("domain endpoint must be positive, got {b}")));
        }
        let spec = Self { psi: Box::new(psi), b };
        spec.validate()?;
        Ok(spec)
    }

    /// The quadratic CGF `psi(l) = l² sigma² / 2` of a sigma-sub-Gaussian
    /// variable, on `[0, inf)`.
    pub fn quadratic(sigma: f64) -> Result<Self> {
        if !(sigma > 0.0) || !sigma.is_finite() {
            return Err(invariant(format!("sigma must be positive, got {sigma}")));
        }
        let s2 = sigma * sigma;
        Self::new(move |l| 0.5 * l * l * s2, f64::INFINITY)
    }

    pub fn psi(&self, lambda: f64) -> f64 {
        (self.psi)(lambda)
    }

    pub fn domain_end(&self) -> f64 {
        self.b
    }

    /// Largest argument the searches are allowed to probe.
    fn lambda_cap(&self) -> f64 {
        if self.b.is_finite() {
            self.b * (1.0 - 1e-12)
        } else {
            UNBOUNDED_CAP
        }
    }

    fn validate(&self) -> Result<()> {
        let v0 = self.psi(0.0);
        if v0.abs() > 1e-12 {
            return Err(invariant(format!("psi(0) must be 0, got {v0}")));
        }
        // right derivative at 0 by a one-sided finite difference
        let h = 1e-8f64.min(self.lambda_cap() * 0.5);
        let slope = self.psi(h) / h;
        if slope.abs() > 1e-4 {
            return Err(invariant(format!(
                "psi must have zero right derivative at 0, finite difference gives {slope}"
            )));
        }
        // convexity on a sampled grid
        let hi = if self.b.is_finite() { self.b * (1.0 - 1e-6) } else { 32.0 };
        let n = 64;
        let step = hi / n as f64;
        for i in 1..n {
            let x = i as f64 * step;
            let second = self.psi(x - step) + self.psi(x + step) - 2.0 * self.psi(x);
            let scale = self.psi(x + step).abs().max(1.0);
            if second < -1e-9 * scale {
                return Err(invariant(format!(
                    "psi is not convex: negative second difference at lambda={x}"
                )));
            }
        }
        Ok(())
    }
}

impl std::fmt::Debug for CgfSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CgfSpec").field("b", &self.b).finish()
    }
}

/// Legendre dual `psi*(x) = sup_{l in [0, b)} (l x - psi(l))`.
///
/// The objective is concave; the maximizer is bracketed by geometric
/// expansion and refined by golden-section search.
pub fn legendre_dual(cgf: &CgfSpec, x: f64) -> Result<f64> {
    if !(x >= 0.0) {
        return Err(precondition(format!("x must be nonnegative, got {x}")));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    let neg = |l: f64| cgf.psi(l) - l * x; // minimize -objective
    let cap = cgf.lambda_cap();
    let hi = expand_right_while_decreasing(&neg, 1.0f64.min(cap * 0.5), cap);
    if hi >= UNBOUNDED_CAP && neg(hi) < neg(hi * 0.5) {
        return Err(domain(format!(
            "legendre dual diverges: objective still increasing at lambda={hi}"
        )));
    }
    let (_, m) = golden_min(&neg, 0.0, hi, SEARCH_TOL);
    Ok((-m).max(0.0))
}

/// Inverse of the Legendre dual, `psi*^{-1}(y) = inf_{l in (0, b)} ((y + psi(l)) / l)`.
///
/// For the quadratic CGF this is `sqrt(2 y sigma²)`.
pub fn legendre_dual_inverse(cgf: &CgfSpec, y: f64) -> Result<f64> {
    if !(y >= 0.0) {
        return Err(precondition(format!("y must be nonnegative, got {y}")));
    }
    if y == 0.0 {
        // (0 + psi(l)) / l -> psi'(0) = 0 as l -> 0+
        return Ok(0.0);
    }
    let objective = |l: f64| (y + cgf.psi(l)) / l;
    let cap = cgf.lambda_cap();
    let hi = expand_right_while_decreasing(&objective, 1.0f64.min(cap * 0.5), cap);
    let (_, m) = golden_min(&objective, 1e-12, hi, SEARCH_TOL);
    Ok(m.max(0.0))
}

/// Evaluate the CGF-form chained bound `sum_k sigma_k(k) * psi*^{-1}(mi_k)`.
///
/// `sigma_k(k) >= sqrt(link_dist_sq at k)` is the caller's responsibility and
/// is not checked; with the quadratic CGF and `sigma_k = sqrt(link_dist_sq)`
/// the result reduces to the mutual-information form.
pub fn evaluate_cgf_bound(
    chain: &ChainSpec,
    cgf: &CgfSpec,
    sigma_k: impl Fn(i64) -> f64,
) -> Result<BoundReport> {
    if chain.levels().is_empty() {
        return Err(domain("empty chain"));
    }
    let mut contributions = Vec::with_capacity(chain.levels().len());
    for level in chain.levels() {
        let mi = level
            .mi_upper
            .ok_or_else(|| domain(format!("missing mi_upper at level k={}", level.k)))?;
        let s = sigma_k(level.k);
        if !(s > 0.0) || !s.is_finite() {
            return Err(invariant(format!(
                "sigma_k must be positive at k={}, got {s}",
                level.k
            )));
        }
        contributions.push(s * legendre_dual_inverse(cgf, mi)?);
    }
    let tail_bound = crate::chain::certify_tail_for(chain, &contributions)?;
    let total = contributions.iter().sum();
    let per_level = chain
        .levels()
        .iter()
        .map(|l| l.k)
        .zip(contributions)
        .collect();
    Ok(BoundReport {
        variant: BoundVariant::CgfForm,
        total,
        tail_bound,
        per_level,
        label: chain.label().to_string(),
    })
}
