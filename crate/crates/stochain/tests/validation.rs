//! Monte Carlo cross-checks of the closed forms that are too heavy for unit
//! tests: the KL-form chain, the exact phase value at ten million trials,
//! the chain-ordering of mutual information, and the link-distance bound.

use stochain::chain::{ChainLevel, ChainSpec, ChainStart, TailMajorant, TruncationPolicy};
use stochain::estimators::{self, ProcessSampler};
use stochain::gaussian::{self, GaussianParams};
use stochain::phase;

fn window_policy(width: usize) -> TruncationPolicy {
    TruncationPolicy {
        abs_tol: 1e-10,
        max_levels_each_side: width,
        tail_majorant: TailMajorant::None,
    }
}

#[test]
fn kl_form_chain_is_dominated_by_the_mi_form() {
    // per-level KL terms estimated by Monte Carlo on a fixed window; the
    // Cauchy-Schwarz direction puts their sum below the MI-form sum
    let params = GaussianParams::new(0.0, 1.0, 10).unwrap();
    let window: Vec<i64> = (-6..=6).collect();
    let mut levels = Vec::new();
    let mut se_sq = 0.0;
    for &k in &window {
        let est = gaussian::kl_term_mc(&params, k, 200_000, (900 + k) as u64).unwrap();
        se_sq += est.std_error * est.std_error;
        levels.push(
            ChainLevel::new(k, gaussian::link_dist_sq_bound(&params, k))
                .with_mi(gaussian::mi_level(k))
                .with_kl(est.value),
        );
    }
    let chain = ChainSpec::new(
        levels,
        ChainStart::MinusInfinity,
        window_policy(6),
        "gaussian kl window",
    )
    .unwrap();
    let kl = stochain::evaluate_kl_bound(&chain).unwrap();
    let mi = stochain::evaluate_mi_bound(&chain).unwrap();
    assert_eq!(kl.variant, stochain::BoundVariant::KlForm);
    assert!(
        kl.total <= mi.total + 3.0 * se_sq.sqrt(),
        "KL form {} vs MI form {}",
        kl.total,
        mi.total
    );
    // the KL form is strictly tighter here, not just within noise
    assert!(kl.total < mi.total);
}

#[test]
fn phase_true_value_monte_carlo_at_ten_million_trials() {
    let sampler = ProcessSampler::phase_retrieval(1.0 / 20.0, 3.75).unwrap();
    let est = estimators::mc_generalization(&sampler, 10_000_000, 2024).unwrap();
    let truth = phase::true_value(1.0 / 20.0).unwrap();
    assert!(
        (est.value - truth).abs() <= 3.0 * est.std_error,
        "estimate {} +- {} vs exact {truth}",
        est.value,
        est.std_error
    );
}

#[test]
fn chain_level_information_is_nondecreasing_in_k() {
    // finer levels carry more information about the learned parameter
    let sampler = ProcessSampler::phase_retrieval(1.0 / 20.0, 3.75).unwrap();
    let two_pi = std::f64::consts::TAU;
    let mut previous = -1.0;
    for k in [0i64, 2, 4] {
        let (w, w_k) = sampler.sample_w_level_pairs(k, 2_000_000, 60 + k as u64).unwrap();
        let mi = estimators::histogram_mi_ranged(&w, &w_k, 64, (0.0, two_pi), (0.0, two_pi))
            .unwrap();
        assert!(
            mi >= previous - 0.01,
            "I(W_k; W) fell from {previous} to {mi} at k={k}"
        );
        previous = mi;
    }
}

#[test]
fn link_distance_bound_dominates_the_sampled_chain() {
    // sigma=2, n=4, k=0: closed-form bound 2.0; the exact second moment of
    // the constructed chain is (2/3) sigma^4/n^2 = 2/3
    let params = GaussianParams::new(0.0, 2.0, 4).unwrap();
    let bound = gaussian::link_dist_sq_bound(&params, 0);
    assert!((bound - 2.0).abs() < 1e-12);
    let est = estimators::gaussian_link_dist_sq_mc(&params, 0, 1_000_000, 71).unwrap();
    let exact = 2.0 / 3.0;
    assert!(
        (est.value - exact).abs() <= 3.0 * est.std_error,
        "sampled {} +- {} vs exact {exact}",
        est.value,
        est.std_error
    );
    assert!(est.value <= bound);
}

#[test]
fn channel_mi_matches_histogram_at_level_three() {
    // I(W; W_3) = 0.5 ln(1 + 2^3); 128 bins keep the discretization loss
    // under the 0.01-nat tolerance at 10^7 samples
    let sampler = ProcessSampler::gaussian_mean(0.0, 1.0, 1).unwrap();
    let (w, w_k) = sampler.sample_w_level_pairs(3, 10_000_000, 83).unwrap();
    let mi = estimators::histogram_mi(&w, &w_k, 128).unwrap();
    let closed = gaussian::mi_level(3);
    assert!(
        (mi - closed).abs() <= 0.01,
        "histogram {mi} vs closed form {closed}"
    );
}
