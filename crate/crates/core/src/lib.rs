//! Exact simulation of max-stable random vectors at finitely many sites.
//!
//! Two engines are provided: the spectral-measure cascade
//! ([`simulate::simulate_spectral`]) and the extremal-functions cascade
//! ([`simulate::simulate_extremal`]), optionally with adaptive site
//! ordering. Both only need draws from the anchored spectral laws
//! `P_{x₀}` ([`spectral::SpectralLaw`]), which are implemented in closed
//! form for moving maxima, Brown–Resnick, extremal-t, logistic, negative
//! logistic and Dirichlet mixture models.

pub mod error;
pub mod models;
pub mod rng_math;
pub mod simulate;
pub mod spectral;
pub mod validate;

pub use error::{Error, Result};
pub use models::{
    validate as validate_model, BrownResnickSpec, DirichletSpec, ExtremalTSpec, LogisticSpec, ModelSpec, MovingMaxSpec,
    NegLogisticSpec, SiteSet, Violation,
};
pub use rng_math::RngStream;
pub use simulate::{Algorithm, OrderingPolicy, Realization};
pub use spectral::{PreparedModel, SpectralLaw, SpectralSample};
