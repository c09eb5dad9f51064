//! Validation suites: named checks with a value, a bound, and a verdict.

use stochain::estimators::{self, ProcessSampler};
use stochain::gaussian::{self, GaussianParams};
use stochain::phase::{self, PhaseParams};
use stochain::render::sig12;
use stochain::Result;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub bound: f64,
    pub pass: bool,
}

impl Check {
    fn upper(name: String, value: f64, bound: f64) -> Self {
        Check {
            name,
            value,
            bound,
            pass: value <= bound,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Example {
    Gaussian,
    Phase,
}

impl Example {
    pub fn as_str(self) -> &'static str {
        match self {
            Example::Gaussian => "gaussian",
            Example::Phase => "phase",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Suite {
    /// Empirical sub-Gaussian MGF ceilings on sampled (pair, lambda) configs.
    Mgf,
    /// Per-level chained-increment direction checks.
    Dv,
    /// Histogram mutual information against the closed forms.
    Mi,
    /// Monte Carlo generalization error against the exact values.
    Gen,
}

impl Suite {
    pub fn as_str(self) -> &'static str {
        match self {
            Suite::Mgf => "mgf",
            Suite::Dv => "dv",
            Suite::Mi => "mi",
            Suite::Gen => "gen",
        }
    }
}

fn gaussian_sampler(n: u32) -> ProcessSampler {
    ProcessSampler::gaussian_mean(0.0, 1.0, n).expect("valid parameters")
}

fn phase_sampler() -> ProcessSampler {
    ProcessSampler::phase_retrieval(1.0 / 20.0, 3.75).expect("valid parameters")
}

pub fn run_suite(suite: Suite, example: Example, trials: u64, seed: u64) -> Result<Vec<Check>> {
    match suite {
        Suite::Mgf => mgf_suite(example, trials, seed),
        Suite::Dv => dv_suite(example, trials, seed),
        Suite::Mi => mi_suite(example, trials as usize, seed),
        Suite::Gen => gen_suite(example, trials, seed),
    }
}

pub fn default_trials(suite: Suite) -> u64 {
    match suite {
        Suite::Mgf => 200_000,
        Suite::Dv => 1_000_000,
        Suite::Mi => 2_000_000,
        Suite::Gen => 200_000,
    }
}

fn mgf_suite(example: Example, trials: u64, seed: u64) -> Result<Vec<Check>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut checks = Vec::new();
    for i in 0..20 {
        let (sampler, w, v) = match example {
            Example::Gaussian => {
                let v = rng.gen_range(-2.0..2.0);
                let gap: f64 = rng.gen_range(0.1..1.5);
                (gaussian_sampler(10), v + gap, v)
            }
            Example::Phase => {
                let v = rng.gen_range(0.0..std::f64::consts::TAU);
                let gap = rng.gen_range(0.15..std::f64::consts::FRAC_PI_2);
                (phase_sampler(), v + gap, v)
            }
        };
        let lambda = rng.gen_range(0.2..1.2);
        let reports = estimators::mgf_subgaussian_check(&sampler, (w, v), &[lambda], trials, rng.gen())?;
        let r = &reports[0];
        checks.push(Check {
            name: format!(
                "mgf[{i}] d={} lambda={}",
                sig12(sampler.metric(w, v)),
                sig12(lambda)
            ),
            value: r.empirical,
            bound: r.ceiling + 5.0 * r.std_error,
            pass: r.passed(),
        });
    }
    Ok(checks)
}

fn dv_suite(example: Example, trials: u64, seed: u64) -> Result<Vec<Check>> {
    let (sampler, levels): (_, &[i64]) = match example {
        Example::Gaussian => (gaussian_sampler(10), &[-2, 0, 2]),
        Example::Phase => (phase_sampler(), &[0, 1, 2]),
    };
    levels
        .iter()
        .map(|&k| {
            let r = estimators::dv_direction_check(&sampler, k, trials, seed ^ (k as u64))?;
            Ok(Check {
                name: format!("dv k={k}"),
                value: r.mean_increment,
                bound: r.ceiling + 5.0 * r.std_error,
                pass: r.pass,
            })
        })
        .collect()
}

fn mi_suite(example: Example, samples: usize, seed: u64) -> Result<Vec<Check>> {
    let two_pi = std::f64::consts::TAU;
    match example {
        Example::Gaussian => {
            let sampler = gaussian_sampler(5);
            [-2i64, 0, 2]
                .iter()
                .map(|&k| {
                    let (data, level) = sampler.sample_data_level_pairs(k, samples, seed ^ (k as u64))?;
                    let mi = estimators::histogram_mi(&data, &level, 64)?;
                    Ok(Check::upper(
                        format!("mi k={k}"),
                        mi,
                        gaussian::mi_level(k) + 0.02,
                    ))
                })
                .collect()
        }
        Example::Phase => {
            let sampler = phase_sampler();
            let params = PhaseParams::new(1.0 / 20.0, 3.75)?;
            [0i64, 1, 2]
                .iter()
                .map(|&k| {
                    let (data, level) = sampler.sample_data_level_pairs(k, samples, seed ^ (k as u64))?;
                    let mi = estimators::histogram_mi_ranged(
                        &data,
                        &level,
                        64,
                        (0.0, two_pi),
                        (0.0, two_pi),
                    )?;
                    Ok(Check::upper(
                        format!("mi k={k}"),
                        mi,
                        phase::mi_level_upper(&params, k as u32) + 0.02,
                    ))
                })
                .collect()
        }
    }
}

fn gen_suite(example: Example, trials: u64, seed: u64) -> Result<Vec<Check>> {
    let (sampler, truth) = match example {
        Example::Gaussian => {
            let params = GaussianParams::new(0.0, 1.0, 50)?;
            (
                ProcessSampler::gaussian_mean(0.0, 1.0, 50)?,
                gaussian::true_generalization(&params),
            )
        }
        Example::Phase => (phase_sampler(), phase::true_value(1.0 / 20.0)?),
    };
    let est = estimators::mc_generalization(&sampler, trials, seed)?;
    Ok(vec![Check {
        name: format!("gen vs exact {}", sig12(truth)),
        value: est.value,
        bound: truth + 3.0 * est.std_error,
        pass: (est.value - truth).abs() <= 3.0 * est.std_error,
    }])
}
