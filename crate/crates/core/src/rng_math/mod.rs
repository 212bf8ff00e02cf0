//! Seeded random streams, scalar variate generators and the dense linear
//! algebra behind the Gaussian and Student spectral laws.
//!
//! Exponential, Fréchet and Weibull variates are drawn by inversion of a
//! single open-interval uniform, so every call consumes exactly one uniform
//! from the stream. Gamma variates use Marsaglia–Tsang (with the
//! `U^{1/shape}` boost below shape 1) and normals use the ziggurat method,
//! both from `rand_distr`.

mod linalg;

pub use linalg::{cholesky, sample_mvn, sample_mvt, CholeskyFactor, Matrix};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, Open01, StandardNormal};

use crate::error::{Error, Result};

/// A reproducible random stream identified by `(master_seed, stream_id)`.
///
/// Streams with different ids share no state; replication `r` of an
/// experiment always draws from stream `r`, whatever the thread count.
#[derive(Debug, Clone)]
pub struct RngStream {
    master_seed: u64,
    stream_id: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(master_seed: u64, stream_id: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
        rng.set_stream(stream_id);
        Self {
            master_seed,
            stream_id,
            rng,
        }
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// Uniform draw on the open interval (0, 1).
    pub fn uniform_open(&mut self) -> f64 {
        Open01.sample(&mut self.rng)
    }

    /// Uniform index in `0..n`.
    pub fn index(&mut self, n: usize) -> usize {
        self.rng.random_range(0..n)
    }

    pub fn standard_normal(&mut self) -> f64 {
        StandardNormal.sample(&mut self.rng)
    }
}

/// Derives an independent master seed for a labelled sub-experiment
/// (splitmix64 finalizer over `seed ^ label`).
pub fn derive_seed(seed: u64, label: u64) -> u64 {
    let mut z = (seed ^ label.wrapping_mul(0x9E37_79B9_7F4A_7C15)).wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn check_positive(name: &str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::Parameter(format!(
            "{name} must be positive and finite, got {value}"
        )))
    }
}

/// Exponential variate with the given rate.
pub fn sample_exponential(rng: &mut RngStream, rate: f64) -> Result<f64> {
    check_positive("rate", rate)?;
    Ok(exponential_quantile(rng.uniform_open(), rate))
}

/// Fréchet variate with CDF `exp(-(u/scale)^{-shape})`. The shape must
/// exceed 1 so that the mean `scale·Γ(1-1/shape)` is finite.
pub fn sample_frechet(rng: &mut RngStream, shape: f64, scale: f64) -> Result<f64> {
    if !(shape > 1.0 && shape.is_finite()) {
        return Err(Error::Parameter(format!("Frechet shape must exceed 1, got {shape}")));
    }
    check_positive("scale", scale)?;
    Ok(frechet_quantile(rng.uniform_open(), shape, scale))
}

/// Weibull variate with CDF `1 - exp(-(u/scale)^shape)`.
pub fn sample_weibull(rng: &mut RngStream, shape: f64, scale: f64) -> Result<f64> {
    check_positive("shape", shape)?;
    check_positive("scale", scale)?;
    Ok(weibull_quantile(rng.uniform_open(), shape, scale))
}

/// Gamma variate with the given shape and rate; any positive shape.
pub fn sample_gamma(rng: &mut RngStream, shape: f64, rate: f64) -> Result<f64> {
    check_positive("shape", shape)?;
    check_positive("rate", rate)?;
    let dist = Gamma::new(shape, 1.0 / rate).map_err(|e| Error::Parameter(format!("gamma({shape}, {rate}): {e}")))?;
    Ok(dist.sample(&mut rng.rng))
}

pub fn exponential_quantile(p: f64, rate: f64) -> f64 {
    -(-p).ln_1p() / rate
}

pub fn frechet_quantile(p: f64, shape: f64, scale: f64) -> f64 {
    scale * (-p.ln()).powf(-1.0 / shape)
}

pub fn weibull_quantile(p: f64, shape: f64, scale: f64) -> f64 {
    scale * (-(-p).ln_1p()).powf(1.0 / shape)
}

/// Unit Fréchet CDF `exp(-1/z)`, zero for non-positive arguments.
pub fn unit_frechet_cdf(z: f64) -> f64 {
    if z <= 0.0 {
        0.0
    } else {
        (-1.0 / z).exp()
    }
}

/// `-1/ln p`, the unit Fréchet quantile.
pub fn unit_frechet_quantile(p: f64) -> f64 {
    -1.0 / p.ln()
}
