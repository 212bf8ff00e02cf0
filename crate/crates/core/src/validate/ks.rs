use serde::Serialize;

use crate::error::{Error, Result};

const MIN_SAMPLES: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KsOneSample {
    pub d: f64,
    pub n: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KsTwoSample {
    pub d: f64,
    pub n: usize,
    pub m: usize,
}

fn check_len(len: usize) -> Result<()> {
    match len {
        0 => Err(Error::EmptyInput),
        l if l < MIN_SAMPLES => Err(Error::TooFewSamples {
            min: MIN_SAMPLES,
            got: l,
        }),
        _ => Ok(()),
    }
}

fn sorted(x: &[f64]) -> Result<Vec<f64>> {
    if x.iter().any(|v| v.is_nan()) {
        return Err(Error::Parameter("samples contain NaN".into()));
    }
    let mut v = x.to_vec();
    v.sort_by(f64::total_cmp);
    Ok(v)
}

/// Supremum distance between the empirical CDF of `samples` and `cdf`.
pub fn ks_one_sample(samples: &[f64], cdf: impl Fn(f64) -> f64) -> Result<KsOneSample> {
    check_len(samples.len())?;
    let x = sorted(samples)?;
    let n = x.len() as f64;
    let d = x
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let f = cdf(v);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max);
    Ok(KsOneSample { d, n: x.len() })
}

/// Supremum distance between two empirical CDFs (ties handled jointly).
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<KsTwoSample> {
    check_len(a.len())?;
    check_len(b.len())?;
    let (x, y) = (sorted(a)?, sorted(b)?);
    let (n, m) = (x.len() as f64, y.len() as f64);
    let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
    while i < x.len() && j < y.len() {
        let v = x[i].min(y[j]);
        while i < x.len() && x[i] <= v {
            i += 1;
        }
        while j < y.len() && y[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / n - j as f64 / m).abs());
    }
    Ok(KsTwoSample {
        d,
        n: x.len(),
        m: y.len(),
    })
}

/// Asymptotic 0.1% critical value of the Kolmogorov distribution.
pub const KS_CRITICAL: f64 = 1.949;

/// One-sample rejection threshold `KS_CRITICAL/√n` (about 0.0195 at n = 10^4).
pub fn ks_one_sample_threshold(n: usize) -> f64 {
    KS_CRITICAL / (n as f64).sqrt()
}

/// Two-sample rejection threshold `KS_CRITICAL·√((n+m)/(nm))`.
pub fn ks_two_sample_threshold(n: usize, m: usize) -> f64 {
    let (n, m) = (n as f64, m as f64);
    KS_CRITICAL * ((n + m) / (n * m)).sqrt()
}
