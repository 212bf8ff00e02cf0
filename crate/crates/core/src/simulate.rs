//! The two exact simulation engines and their cost diagnostics.
//!
//! `spectral_draw_count` counts draws from the anchored spectral laws only;
//! exponential increments of the Poisson cascade are not counted.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng_math::{sample_exponential, RngStream};
use crate::spectral::{sample_spectral_h, SpectralLaw};
use crate::validate::mean_and_se;

/// Site processing order for the extremal-functions engine.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OrderingPolicy {
    GivenOrder,
    /// After the first site, always process the unprocessed site with the
    /// smallest current running maximum (smallest index on ties).
    Adaptive,
}

/// Which engine produced a realization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Spectral,
    Extremal,
    ExtremalAdaptive,
}

impl Algorithm {
    pub fn extremal(ordering: OrderingPolicy) -> Self {
        match ordering {
            OrderingPolicy::GivenOrder => Algorithm::Extremal,
            OrderingPolicy::Adaptive => Algorithm::ExtremalAdaptive,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Spectral => "spectral",
            Algorithm::Extremal => "extremal",
            Algorithm::ExtremalAdaptive => "extremal_adaptive",
        }
    }
}

impl std::str::FromStr for Algorithm {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "spectral" => Ok(Algorithm::Spectral),
            "extremal" => Ok(Algorithm::Extremal),
            "extremal_adaptive" => Ok(Algorithm::ExtremalAdaptive),
            other => Err(Error::Parameter(format!(
                "unknown algorithm {other:?} (expected spectral, extremal or extremal_adaptive)"
            ))),
        }
    }
}

/// A function accepted by the extremal-functions engine, already scaled by
/// its Poisson point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AcceptedFunction {
    /// 1-based processing step.
    pub step: usize,
    /// Site processed at that step.
    pub site: usize,
    pub values: Vec<f64>,
}

/// One exact draw of `Z(x)` with its diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Realization {
    pub z: Vec<f64>,
    pub spectral_draw_count: u64,
    /// Smallest number of processed steps after which the running maximum
    /// already equals the final field. Extremal engine only.
    pub n_zero: Option<usize>,
    pub acceptance_log: Vec<AcceptedFunction>,
    pub algorithm: Algorithm,
}

fn componentwise_max(z: &mut [f64], scale: f64, y: &[f64]) {
    for (zi, yi) in z.iter_mut().zip(y) {
        *zi = zi.max(scale * yi);
    }
}

/// Spectral-measure engine: Poisson points `ζ` in decreasing order, each
/// paired with an independent draw from the spectral measure, until no
/// remaining point can exceed the running minimum.
pub fn simulate_spectral<L: SpectralLaw + ?Sized>(rng: &mut RngStream, law: &L) -> Result<Realization> {
    let n = law.n_sites();
    let rate = n as f64;
    let mut inv_zeta = sample_exponential(rng, rate)?;
    let mut z = vec![0.0; n];
    let mut count = 0u64;
    while 1.0 / inv_zeta > z.iter().copied().fold(f64::INFINITY, f64::min) {
        let zeta = 1.0 / inv_zeta;
        let q = sample_spectral_h(rng, law)?;
        count += 1;
        componentwise_max(&mut z, zeta, q.weights());
        inv_zeta += sample_exponential(rng, rate)?;
    }
    Ok(Realization {
        z,
        spectral_draw_count: count,
        n_zero: None,
        acceptance_log: Vec::new(),
        algorithm: Algorithm::Spectral,
    })
}

/// Extremal-functions engine. Sites are processed one at a time; at each
/// site, candidates `ζY` with `Y ~ P_{x_n}` are drawn while `ζ > Z(x_n)` and
/// kept only if they stay strictly below `Z` at every processed site.
pub fn simulate_extremal<L: SpectralLaw + ?Sized>(
    rng: &mut RngStream,
    law: &L,
    ordering: OrderingPolicy,
) -> Result<Realization> {
    let n = law.n_sites();
    let mut processed = vec![false; n];
    let mut order: Vec<usize> = Vec::with_capacity(n);
    let mut log = Vec::new();

    let first = 0;
    let zeta = 1.0 / sample_exponential(rng, 1.0)?;
    let y = law.sample_px(rng, first)?;
    let mut count = 1u64;
    let mut z: Vec<f64> = y.values().iter().map(|v| zeta * v).collect();
    log.push(AcceptedFunction {
        step: 1,
        site: first,
        values: z.clone(),
    });
    processed[first] = true;
    order.push(first);

    for step in 2..=n {
        let site = match ordering {
            OrderingPolicy::GivenOrder => step - 1,
            OrderingPolicy::Adaptive => next_adaptive(&z, &processed),
        };
        let mut inv_zeta = sample_exponential(rng, 1.0)?;
        while 1.0 / inv_zeta > z[site] {
            let zeta = 1.0 / inv_zeta;
            let y = law.sample_px(rng, site)?;
            count += 1;
            let values = y.values();
            if order.iter().all(|&i| zeta * values[i] < z[i]) {
                let scaled: Vec<f64> = values.iter().map(|v| zeta * v).collect();
                componentwise_max(&mut z, 1.0, &scaled);
                log.push(AcceptedFunction {
                    step,
                    site,
                    values: scaled,
                });
            }
            inv_zeta += sample_exponential(rng, 1.0)?;
        }
        processed[site] = true;
        order.push(site);
    }

    let n_zero = Some(optimal_abort_step(&z, &log));
    Ok(Realization {
        z,
        spectral_draw_count: count,
        n_zero,
        acceptance_log: log,
        algorithm: Algorithm::extremal(ordering),
    })
}

fn next_adaptive(z: &[f64], processed: &[bool]) -> usize {
    let mut best: Option<usize> = None;
    for (i, &done) in processed.iter().enumerate() {
        if !done && best.is_none_or(|b| z[i] < z[b]) {
            best = Some(i);
        }
    }
    best.expect("an unprocessed site remains")
}

/// Smallest step `m` such that the functions accepted up to step `m`
/// already attain the final maximum at every site. When two accepted
/// functions tie at a site, the earlier one counts.
fn optimal_abort_step(z: &[f64], log: &[AcceptedFunction]) -> usize {
    z.iter()
        .enumerate()
        .map(|(i, &zi)| {
            log.iter()
                .find(|f| f.values[i] == zi)
                .map(|f| f.step)
                .expect("every site value comes from an accepted function")
        })
        .max()
        .unwrap_or(1)
}

/// Runs one realization of `algorithm`.
pub fn simulate<L: SpectralLaw + ?Sized>(rng: &mut RngStream, law: &L, algorithm: Algorithm) -> Result<Realization> {
    match algorithm {
        Algorithm::Spectral => simulate_spectral(rng, law),
        Algorithm::Extremal => simulate_extremal(rng, law, OrderingPolicy::GivenOrder),
        Algorithm::ExtremalAdaptive => simulate_extremal(rng, law, OrderingPolicy::Adaptive),
    }
}

/// `reps` independent realizations; replication `r` draws from stream
/// `(master_seed, r)`, so the output does not depend on `threads`.
pub fn run_replications<L: SpectralLaw + ?Sized>(
    master_seed: u64,
    law: &L,
    algorithm: Algorithm,
    reps: usize,
    threads: usize,
) -> Result<Vec<Realization>> {
    if reps == 0 {
        return Err(Error::Parameter("reps must be at least 1".into()));
    }
    if threads == 0 {
        return Err(Error::Parameter("threads must be at least 1".into()));
    }
    let run = || {
        (0..reps)
            .into_par_iter()
            .map(|r| {
                let mut rng = RngStream::new(master_seed, r as u64);
                simulate(&mut rng, law, algorithm)
            })
            .collect::<Result<Vec<_>>>()
    };
    if threads == 1 {
        return (0..reps)
            .map(|r| simulate(&mut RngStream::new(master_seed, r as u64), law, algorithm))
            .collect();
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Parameter(format!("thread pool: {e}")))?
        .install(run)
}

/// Means and standard errors of the cost diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CountSummary {
    pub reps: usize,
    pub mean_count: f64,
    pub se_count: f64,
    pub mean_n_zero: Option<f64>,
    pub se_n_zero: Option<f64>,
    /// `n_zero_histogram[k]` counts realizations with `N₀ = k + 1`.
    pub n_zero_histogram: Vec<u64>,
}

pub fn summarize_counts(realizations: &[Realization]) -> Result<CountSummary> {
    if realizations.is_empty() {
        return Err(Error::EmptyInput);
    }
    let counts: Vec<f64> = realizations.iter().map(|r| r.spectral_draw_count as f64).collect();
    let (mean_count, se_count) = mean_and_se(&counts);
    let n0: Vec<usize> = realizations.iter().filter_map(|r| r.n_zero).collect();
    let n_sites = realizations.iter().map(|r| r.z.len()).max().unwrap_or(0);
    let mut hist = vec![0u64; if n0.is_empty() { 0 } else { n_sites }];
    for &k in &n0 {
        hist[k - 1] += 1;
    }
    let (mean_n_zero, se_n_zero) = if n0.is_empty() {
        (None, None)
    } else {
        let v: Vec<f64> = n0.iter().map(|&k| k as f64).collect();
        let (m, s) = mean_and_se(&v);
        (Some(m), Some(s))
    };
    Ok(CountSummary {
        reps: realizations.len(),
        mean_count,
        se_count,
        mean_n_zero,
        se_n_zero,
        n_zero_histogram: hist,
    })
}
