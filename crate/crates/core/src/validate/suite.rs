use std::fmt::Write as _;

use serde::Serialize;

use super::cdf::{logistic_cdf, neglogistic_cdf};
use super::ks::{ks_one_sample, ks_one_sample_threshold, ks_two_sample, ks_two_sample_threshold};
use super::mean_and_se;
use crate::error::{Error, Result};
use crate::models::ModelSpec;
use crate::rng_math::{derive_seed, unit_frechet_cdf, unit_frechet_quantile, RngStream};
use crate::simulate::{run_replications, summarize_counts, Algorithm, Realization};
use crate::spectral::{sample_spectral_h, PreparedModel, SpectralLaw, SpectralSample};

/// Tolerance on `Σ_j Q_j = 1` for spectral-measure draws.
const SIMPLEX_TOL: f64 = 1e-12;
/// Moment checks pass within this many standard errors.
const SE_MULTIPLIER: f64 = 4.0;
const PROBE_LEVELS: [f64; 5] = [0.25, 0.5, 0.75, 0.9, 0.95];

/// One line of a validation report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckEntry {
    pub check_name: String,
    pub statistic: f64,
    pub threshold: f64,
    pub standard_error: Option<f64>,
    pub passed: bool,
    pub details: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub family: String,
    pub seed: u64,
    pub reps: usize,
    pub negative_control: bool,
    pub entries: Vec<CheckEntry>,
}

impl ValidationReport {
    pub fn all_passed(&self) -> bool {
        self.entries.iter().all(|e| e.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckEntry> {
        self.entries.iter().filter(|e| !e.passed)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "family: {}  seed: {}  reps: {}  negative_control: {}",
            self.family, self.seed, self.reps, self.negative_control
        );
        let width = self
            .entries
            .iter()
            .map(|e| e.check_name.len())
            .max()
            .unwrap_or(5)
            .max(5);
        let _ = writeln!(
            out,
            "{:<width$}  {:>12}  {:>12}  {:>12}  result  details",
            "check", "statistic", "threshold", "std_err"
        );
        for e in &self.entries {
            let se = e.standard_error.map_or_else(|| "-".to_string(), |s| format!("{s:.6e}"));
            let _ = writeln!(
                out,
                "{:<width$}  {:>12.6e}  {:>12.6e}  {:>12}  {:<6}  {}",
                e.check_name,
                e.statistic,
                e.threshold,
                se,
                if e.passed { "PASS" } else { "FAIL" },
                e.details
            );
        }
        let failed = self.failures().count();
        let _ = writeln!(out, "{} checks, {} failed", self.entries.len(), failed);
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteConfig {
    pub reps: usize,
    pub h_draws: usize,
    pub fold_k: usize,
    pub seed: u64,
    pub threads: usize,
    pub negative_control: bool,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            reps: 10_000,
            h_draws: 100_000,
            fold_k: 5,
            seed: 0,
            threads: 1,
            negative_control: false,
        }
    }
}

/// Wraps a law and corrupts the anchor coordinate of every draw to 0.5.
/// Used to confirm the suite has power.
pub struct CorruptedAnchor<L>(pub L);

impl<L: SpectralLaw> SpectralLaw for CorruptedAnchor<L> {
    fn n_sites(&self) -> usize {
        self.0.n_sites()
    }

    fn sample_px(&self, rng: &mut RngStream, anchor: usize) -> Result<SpectralSample> {
        let mut s = self.0.sample_px(rng, anchor)?;
        s.overwrite_anchor(0.5);
        Ok(s)
    }
}

/// Empirical `P(Z ≤ z)` componentwise, with its binomial standard error.
pub fn empirical_cdf_at<R: AsRef<[f64]>>(realizations: &[R], z: &[f64]) -> Result<(f64, f64)> {
    if realizations.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut hits = 0usize;
    for r in realizations {
        let r = r.as_ref();
        if r.len() != z.len() {
            return Err(Error::DimensionMismatch {
                expected: z.len(),
                got: r.len(),
            });
        }
        if r.iter().zip(z).all(|(a, b)| a <= b) {
            hits += 1;
        }
    }
    let n = realizations.len() as f64;
    let p = hits as f64 / n;
    Ok((p, (p * (1.0 - p) / n).sqrt()))
}

/// Five probe points for CDF checks; coordinate `j` of point `k` is the
/// unit-Fréchet quantile at level `PROBE_LEVELS[(k + j) % 5]`.
pub fn cdf_probe_points(n: usize) -> Vec<Vec<f64>> {
    (0..PROBE_LEVELS.len())
        .map(|k| {
            (0..n)
                .map(|j| unit_frechet_quantile(PROBE_LEVELS[(k + j) % PROBE_LEVELS.len()]))
                .collect()
        })
        .collect()
}

type ClosedFormCdf = Box<dyn Fn(&[f64]) -> Result<f64>>;

struct Checks(Vec<CheckEntry>);

impl Checks {
    fn ks(&mut self, name: String, d: f64, threshold: f64, details: String) {
        self.0.push(CheckEntry {
            check_name: name,
            statistic: d,
            threshold,
            standard_error: None,
            passed: d < threshold,
            details,
        });
    }

    /// Passes when `|estimate - target| < 4·se`.
    fn moment(&mut self, name: String, estimate: f64, target: f64, se: f64) {
        let stat = (estimate - target).abs();
        let threshold = SE_MULTIPLIER * se;
        self.0.push(CheckEntry {
            check_name: name,
            statistic: stat,
            threshold,
            standard_error: Some(se),
            passed: stat < threshold || stat == 0.0,
            details: format!("estimate {estimate:.6} target {target:.6}"),
        });
    }
}

fn margin(realizations: &[Realization], i: usize) -> Vec<f64> {
    realizations.iter().map(|r| r.z[i]).collect()
}

fn site_max(realizations: &[Realization]) -> Vec<f64> {
    realizations
        .iter()
        .map(|r| r.z.iter().copied().fold(f64::MIN, f64::max))
        .collect()
}

/// Runs the full conformance suite for one model.
pub fn run_suite(model: &ModelSpec, config: &SuiteConfig) -> Result<ValidationReport> {
    if config.fold_k < 2 {
        return Err(Error::Parameter(format!(
            "fold_k must be at least 2, got {}",
            config.fold_k
        )));
    }
    if config.h_draws < 2 {
        return Err(Error::Parameter(format!(
            "h_draws must be at least 2, got {}",
            config.h_draws
        )));
    }
    let prepared = PreparedModel::new(model)?;
    let entries = if config.negative_control {
        checks_for(&CorruptedAnchor(prepared), model, config)?
    } else {
        checks_for(&prepared, model, config)?
    };
    Ok(ValidationReport {
        family: model.family_name().to_string(),
        seed: config.seed,
        reps: config.reps,
        negative_control: config.negative_control,
        entries,
    })
}

fn checks_for<L: SpectralLaw>(law: &L, model: &ModelSpec, config: &SuiteConfig) -> Result<Vec<CheckEntry>> {
    let n = law.n_sites();
    let (seed, reps, threads) = (config.seed, config.reps, config.threads);
    let spectral = run_replications(derive_seed(seed, 1), law, Algorithm::Spectral, reps, threads)?;
    let extremal = run_replications(derive_seed(seed, 2), law, Algorithm::Extremal, reps, threads)?;
    let mut c = Checks(Vec::new());

    for (name, real) in [("spectral", &spectral), ("extremal", &extremal)] {
        for i in 0..n {
            let r = ks_one_sample(&margin(real, i), unit_frechet_cdf)?;
            c.ks(
                format!("margin_ks/{name}/site_{}", i + 1),
                r.d,
                ks_one_sample_threshold(r.n),
                format!("n={}", r.n),
            );
        }
    }

    for i in 0..n {
        let r = ks_two_sample(&margin(&spectral, i), &margin(&extremal, i))?;
        c.ks(
            format!("cross_algorithm_ks/site_{}", i + 1),
            r.d,
            ks_two_sample_threshold(r.n, r.m),
            format!("n={} m={}", r.n, r.m),
        );
    }
    let r = ks_two_sample(&site_max(&spectral), &site_max(&extremal))?;
    c.ks(
        "cross_algorithm_ks/site_max".into(),
        r.d,
        ks_two_sample_threshold(r.n, r.m),
        format!("n={} m={}", r.n, r.m),
    );

    let k = config.fold_k;
    let pool = run_replications(derive_seed(seed, 3), law, Algorithm::Extremal, reps * k, threads)?;
    let folded: Vec<Vec<f64>> = pool
        .chunks(k)
        .map(|group| {
            (0..n)
                .map(|i| group.iter().map(|r| r.z[i]).fold(f64::MIN, f64::max) / k as f64)
                .collect()
        })
        .collect();
    for i in 0..n {
        let a: Vec<f64> = folded.iter().map(|z| z[i]).collect();
        let r = ks_two_sample(&a, &margin(&extremal, i))?;
        c.ks(
            format!("max_stability_ks/site_{}", i + 1),
            r.d,
            ks_two_sample_threshold(r.n, r.m),
            format!("fold_k={k}"),
        );
    }

    let mut rng = RngStream::new(derive_seed(seed, 4), 0);
    let mut q = vec![Vec::with_capacity(config.h_draws); n];
    let mut simplex_err = 0.0f64;
    for _ in 0..config.h_draws {
        let p = sample_spectral_h(&mut rng, law)?;
        let w = p.weights();
        simplex_err = simplex_err.max((w.iter().sum::<f64>() - 1.0).abs());
        if w.iter().any(|v| *v < 0.0) {
            simplex_err = f64::INFINITY;
        }
        for (col, v) in q.iter_mut().zip(w) {
            col.push(*v);
        }
    }
    for (j, col) in q.iter().enumerate() {
        let (m, se) = mean_and_se(col);
        c.moment(format!("spectral_mean/coord_{}", j + 1), m, 1.0 / n as f64, se);
    }
    c.0.push(CheckEntry {
        check_name: "spectral_simplex".into(),
        statistic: simplex_err,
        threshold: SIMPLEX_TOL,
        standard_error: None,
        passed: simplex_err < SIMPLEX_TOL,
        details: format!("max |sum Q - 1| over {} draws", config.h_draws),
    });

    let s1 = summarize_counts(&spectral)?;
    let s2 = summarize_counts(&extremal)?;
    c.moment("extremal_cost".into(), s2.mean_count, n as f64, s2.se_count);
    let pooled = (s1.se_count.powi(2) + s2.se_count.powi(2)).sqrt();
    let gap = s2.mean_count - s1.mean_count;
    c.0.push(CheckEntry {
        check_name: "spectral_cost_dominates".into(),
        statistic: gap,
        threshold: SE_MULTIPLIER * pooled,
        standard_error: Some(pooled),
        passed: gap < SE_MULTIPLIER * pooled,
        details: format!("mean C1 {:.4} mean C2 {:.4}", s1.mean_count, s2.mean_count),
    });

    let closed_form: Option<ClosedFormCdf> = match model {
        ModelSpec::Logistic(s) => {
            let t = s.theta;
            Some(Box::new(move |z| logistic_cdf(z, t)))
        }
        ModelSpec::NegLogistic(s) => {
            let t = s.theta;
            Some(Box::new(move |z| neglogistic_cdf(z, t)))
        }
        _ => None,
    };
    if let Some(cdf) = closed_form {
        for (name, real) in [("spectral", &spectral), ("extremal", &extremal)] {
            let zs: Vec<&[f64]> = real.iter().map(|r| r.z.as_slice()).collect();
            for (k, point) in cdf_probe_points(n).iter().enumerate() {
                let (p, se) = empirical_cdf_at(&zs, point)?;
                c.moment(format!("cdf/{name}/point_{}", k + 1), p, cdf(point)?, se);
            }
        }
    }
    Ok(c.0)
}
