//! Statistical oracles and the conformance suite.

mod cdf;
mod ks;
mod suite;

pub use cdf::{logistic_cdf, neglogistic_cdf, NEGLOGISTIC_MAX_DIM};
pub use ks::{
    ks_one_sample, ks_one_sample_threshold, ks_two_sample, ks_two_sample_threshold, KsOneSample, KsTwoSample,
    KS_CRITICAL,
};
pub use suite::{
    cdf_probe_points, empirical_cdf_at, run_suite, CheckEntry, CorruptedAnchor, SuiteConfig, ValidationReport,
};

/// Sample mean and standard error of the mean (0 for a single value).
pub fn mean_and_se(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    if x.len() < 2 {
        return (mean, 0.0);
    }
    let var = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}
