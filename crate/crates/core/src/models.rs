//! Parameter containers for the six supported families and the Gaussian /
//! Student moment structures their spectral laws are built from.
//!
//! Site indices (including anchors) are 0-based throughout the crate.

use std::fmt;

use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};
use crate::rng_math::{cholesky, CholeskyFactor, Matrix};

const DISTINCT_TOL: f64 = 1e-12;
const MOMENT_TOL: f64 = 1e-8;

/// One violated model invariant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub field: String,
    pub message: String,
}

impl Violation {
    fn new(field: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            field: field.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

/// Ordered simulation sites in `R^d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct SiteSet {
    dim: usize,
    coords: Vec<Vec<f64>>,
}

impl SiteSet {
    /// All coordinates must share one dimension. Emptiness and coincident
    /// sites are reported by [`validate`], not here.
    pub fn new(coords: Vec<Vec<f64>>) -> Result<Self> {
        let dim = coords.first().map_or(0, Vec::len);
        if let Some(bad) = coords.iter().find(|c| c.len() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: bad.len(),
            });
        }
        if dim == 0 && !coords.is_empty() {
            return Err(Error::Parameter("site coordinates must have dimension >= 1".into()));
        }
        Ok(Self { dim, coords })
    }

    /// Regular grid `origin + step·k` in lexicographic order, the last
    /// coordinate varying fastest.
    pub fn grid(origin: &[f64], step: f64, counts: &[usize]) -> Result<Self> {
        if origin.len() != counts.len() {
            return Err(Error::DimensionMismatch {
                expected: counts.len(),
                got: origin.len(),
            });
        }
        if !(step > 0.0 && step.is_finite()) {
            return Err(Error::Parameter(format!("grid step must be positive, got {step}")));
        }
        if counts.is_empty() || counts.contains(&0) {
            return Err(Error::Parameter("grid counts must be positive".into()));
        }
        let total: usize = counts.iter().product();
        let mut coords = Vec::with_capacity(total);
        let mut idx = vec![0usize; counts.len()];
        for _ in 0..total {
            coords.push(idx.iter().zip(origin).map(|(&k, o)| o + step * k as f64).collect());
            for axis in (0..counts.len()).rev() {
                idx[axis] += 1;
                if idx[axis] < counts[axis] {
                    break;
                }
                idx[axis] = 0;
            }
        }
        Self::new(coords)
    }

    /// The index set `{1, …, n}` embedded on the real line.
    pub fn index_set(n: usize) -> Self {
        Self {
            dim: 1,
            coords: (1..=n).map(|i| vec![i as f64]).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn coords(&self) -> &[Vec<f64>] {
        &self.coords
    }

    pub fn site(&self, i: usize) -> &[f64] {
        &self.coords[i]
    }

    /// `x_j - x_i`.
    pub fn offset(&self, i: usize, j: usize) -> Vec<f64> {
        self.coords[j].iter().zip(&self.coords[i]).map(|(a, b)| a - b).collect()
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        self.coords[i]
            .iter()
            .zip(&self.coords[j])
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    fn violations(&self, out: &mut Vec<Violation>) {
        if self.is_empty() {
            out.push(Violation::new("sites", "at least one site is required"));
            return;
        }
        if self.coords.iter().flatten().any(|v| !v.is_finite()) {
            out.push(Violation::new("sites", "coordinates must be finite"));
        }
        for i in 0..self.len() {
            for j in 0..i {
                if self.distance(i, j) <= DISTINCT_TOL {
                    out.push(Violation::new(
                        "sites",
                        format!(
                            "sites {} and {} coincide (locations must be pairwise distinct)",
                            j + 1,
                            i + 1
                        ),
                    ));
                }
            }
        }
    }
}

impl TryFrom<Vec<Vec<f64>>> for SiteSet {
    type Error = Error;
    fn try_from(v: Vec<Vec<f64>>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<SiteSet> for Vec<Vec<f64>> {
    fn from(s: SiteSet) -> Self {
        s.coords
    }
}

/// Moving maxima (Smith) model with a centred Gaussian density kernel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MovingMaxSpec {
    pub kernel_cov: Matrix,
}

/// Brown–Resnick model with power variogram `γ(h) = c‖h‖^α`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BrownResnickSpec {
    pub variogram_c: f64,
    pub variogram_alpha: f64,
}

impl BrownResnickSpec {
    pub fn variogram(&self, h: f64) -> f64 {
        if h == 0.0 {
            0.0
        } else {
            self.variogram_c * h.powf(self.variogram_alpha)
        }
    }
}

/// Extremal-t model driven by a unit-variance Gaussian process with
/// powered-exponential correlation `exp(-(‖h‖/ρ)^κ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExtremalTSpec {
    pub alpha: f64,
    pub corr_range: f64,
    pub corr_smoothness: f64,
}

impl ExtremalTSpec {
    pub fn correlation(&self, h: f64) -> f64 {
        if h == 0.0 {
            1.0
        } else {
            (-(h / self.corr_range).powf(self.corr_smoothness)).exp()
        }
    }

    /// `c_α = π^{1/2} 2^{-(α-2)/2} / Γ((1+α)/2)`, the constant making
    /// `E[c_α max(0, W)^α] = 1`. It cancels in the anchored spectral law.
    pub fn c_alpha(&self) -> f64 {
        std::f64::consts::PI.sqrt() * 2f64.powf(-(self.alpha - 2.0) / 2.0) / gamma((1.0 + self.alpha) / 2.0)
    }
}

/// Symmetric logistic model in dimension `n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LogisticSpec {
    pub theta: f64,
    #[serde(rename = "N")]
    pub n: usize,
}

impl LogisticSpec {
    pub fn beta(&self) -> f64 {
        1.0 / self.theta
    }

    /// `c_β = Γ(1 - 1/β)^{-1}`.
    pub fn c_beta(&self) -> f64 {
        1.0 / gamma(1.0 - self.theta)
    }
}

/// Negative logistic model in dimension `n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NegLogisticSpec {
    pub theta: f64,
    #[serde(rename = "N")]
    pub n: usize,
}

impl NegLogisticSpec {
    /// `c_θ = Γ(1 + 1/θ)^{-1}`.
    pub fn c_theta(&self) -> f64 {
        1.0 / gamma(1.0 + 1.0 / self.theta)
    }
}

/// Mixture of `m` Dirichlet spectral densities in dimension `N`.
///
/// `alpha[j][k]` is the concentration of coordinate `j` in component `k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DirichletSpec {
    pub weights: Vec<f64>,
    pub alpha: Vec<Vec<f64>>,
}

impl DirichletSpec {
    pub fn n(&self) -> usize {
        self.alpha.len()
    }

    pub fn m(&self) -> usize {
        self.weights.len()
    }

    fn column_sum(&self, k: usize) -> f64 {
        self.alpha.iter().map(|row| row[k]).sum()
    }

    /// `Σ_k π_k α_{jk} / Σ_i α_{ik}`, which must equal `1/N`.
    pub fn coordinate_mean(&self, j: usize) -> f64 {
        (0..self.m())
            .map(|k| self.weights[k] * self.alpha[j][k] / self.column_sum(k))
            .sum()
    }

    /// Component probabilities of the anchored law at `anchor`:
    /// `π_k α_{anchor,k} / Σ_i α_{ik}`, renormalized to sum to one.
    pub fn anchored_weights(&self, anchor: usize) -> Vec<f64> {
        let raw: Vec<f64> = (0..self.m())
            .map(|k| self.weights[k] * self.alpha[anchor][k] / self.column_sum(k))
            .collect();
        let total: f64 = raw.iter().sum();
        raw.into_iter().map(|w| w / total).collect()
    }
}

/// A fully specified model bound to its sites.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum ModelSpec {
    MovingMax { spec: MovingMaxSpec, sites: SiteSet },
    BrownResnick { spec: BrownResnickSpec, sites: SiteSet },
    ExtremalT { spec: ExtremalTSpec, sites: SiteSet },
    Logistic(LogisticSpec),
    NegLogistic(NegLogisticSpec),
    Dirichlet(DirichletSpec),
}

impl ModelSpec {
    pub fn n_sites(&self) -> usize {
        match self {
            ModelSpec::MovingMax { sites, .. }
            | ModelSpec::BrownResnick { sites, .. }
            | ModelSpec::ExtremalT { sites, .. } => sites.len(),
            ModelSpec::Logistic(s) => s.n,
            ModelSpec::NegLogistic(s) => s.n,
            ModelSpec::Dirichlet(s) => s.n(),
        }
    }

    pub fn family_name(&self) -> &'static str {
        match self {
            ModelSpec::MovingMax { .. } => "moving_max",
            ModelSpec::BrownResnick { .. } => "brown_resnick",
            ModelSpec::ExtremalT { .. } => "extremal_t",
            ModelSpec::Logistic(_) => "logistic",
            ModelSpec::NegLogistic(_) => "neg_logistic",
            ModelSpec::Dirichlet(_) => "dirichlet",
        }
    }

    /// Sites the model lives on; the finite-dimensional families use the
    /// index set `{1, …, N}`.
    pub fn sites(&self) -> SiteSet {
        match self {
            ModelSpec::MovingMax { sites, .. }
            | ModelSpec::BrownResnick { sites, .. }
            | ModelSpec::ExtremalT { sites, .. } => sites.clone(),
            _ => SiteSet::index_set(self.n_sites()),
        }
    }

    /// Returns the model or every violated invariant.
    pub fn validated(self) -> Result<Self> {
        let v = validate(&self);
        if v.is_empty() {
            Ok(self)
        } else {
            Err(Error::InvalidModel(v))
        }
    }
}

fn finite_positive(out: &mut Vec<Violation>, field: &str, v: f64) {
    if !(v > 0.0 && v.is_finite()) {
        out.push(Violation::new(field, format!("must be positive and finite, got {v}")));
    }
}

/// Every violated invariant of `spec`; empty iff the model is usable.
pub fn validate(spec: &ModelSpec) -> Vec<Violation> {
    let mut out = Vec::new();
    match spec {
        ModelSpec::MovingMax { spec, sites } => {
            sites.violations(&mut out);
            let k = &spec.kernel_cov;
            if k.dim() == 0 {
                out.push(Violation::new("kernel_cov", "kernel covariance must be non-empty"));
            } else {
                if !sites.is_empty() && k.dim() != sites.dim() {
                    out.push(Violation::new(
                        "kernel_cov",
                        format!("dimension {} does not match site dimension {}", k.dim(), sites.dim()),
                    ));
                }
                if cholesky(k, 0.0).is_err() {
                    out.push(Violation::new("kernel_cov", "must be symmetric positive definite"));
                }
            }
        }
        ModelSpec::BrownResnick { spec, sites } => {
            sites.violations(&mut out);
            finite_positive(&mut out, "variogram_c", spec.variogram_c);
            let a = spec.variogram_alpha;
            if !(a > 0.0 && a <= 2.0) {
                out.push(Violation::new(
                    "variogram_alpha",
                    format!("must lie in (0, 2], got {a}"),
                ));
            }
        }
        ModelSpec::ExtremalT { spec, sites } => {
            sites.violations(&mut out);
            finite_positive(&mut out, "alpha", spec.alpha);
            finite_positive(&mut out, "corr_range", spec.corr_range);
            let k = spec.corr_smoothness;
            if !(k > 0.0 && k <= 2.0) {
                out.push(Violation::new(
                    "corr_smoothness",
                    format!("must lie in (0, 2], got {k}"),
                ));
            }
        }
        ModelSpec::Logistic(s) => {
            if !(s.theta > 0.0 && s.theta < 1.0) {
                out.push(Violation::new(
                    "theta",
                    format!("must lie in the open interval (0, 1), got {}", s.theta),
                ));
            }
            if s.n == 0 {
                out.push(Violation::new("N", "must be at least 1"));
            }
        }
        ModelSpec::NegLogistic(s) => {
            finite_positive(&mut out, "theta", s.theta);
            if s.n == 0 {
                out.push(Violation::new("N", "must be at least 1"));
            }
        }
        ModelSpec::Dirichlet(s) => dirichlet_violations(s, &mut out),
    }
    out
}

fn dirichlet_violations(s: &DirichletSpec, out: &mut Vec<Violation>) {
    let m = s.m();
    if m == 0 {
        out.push(Violation::new("weights", "at least one mixture component is required"));
        return;
    }
    if s.n() == 0 {
        out.push(Violation::new("alpha", "at least one coordinate is required"));
        return;
    }
    if s.weights.iter().any(|w| !(*w >= 0.0 && w.is_finite())) {
        out.push(Violation::new("weights", "must be non-negative and finite"));
    }
    let total: f64 = s.weights.iter().sum();
    if (total - 1.0).abs() > MOMENT_TOL {
        out.push(Violation::new("weights", format!("must sum to 1, got {total}")));
    }
    let mut shape_ok = true;
    for (j, row) in s.alpha.iter().enumerate() {
        if row.len() != m {
            out.push(Violation::new(
                "alpha",
                format!("row {} has {} entries, expected {m}", j + 1, row.len()),
            ));
            shape_ok = false;
        } else if row.iter().any(|a| !(*a > 0.0 && a.is_finite())) {
            out.push(Violation::new(
                "alpha",
                format!("row {} must be positive and finite", j + 1),
            ));
            shape_ok = false;
        }
    }
    if !shape_ok {
        return;
    }
    let target = 1.0 / s.n() as f64;
    for j in 0..s.n() {
        let mean = s.coordinate_mean(j);
        if (mean - target).abs() > MOMENT_TOL {
            out.push(Violation::new(
                "alpha",
                format!("mean of coordinate {} is {mean}, must equal 1/N = {target}", j + 1),
            ));
        }
    }
}

fn check_anchor(anchor: usize, n: usize) -> Result<()> {
    if anchor < n {
        Ok(())
    } else {
        Err(Error::AnchorOutOfRange { anchor, n })
    }
}

fn others(n: usize, anchor: usize) -> Vec<usize> {
    (0..n).filter(|&i| i != anchor).collect()
}

/// Mean and covariance of `G_i = W(x_i - x_0) - W(0) - γ(x_i - x_0)` over
/// the non-anchor sites, for a variogram with stationary increments:
/// `mean_i = -γ(x_i - x_0)` and
/// `cov_ij = γ(x_i - x_0) + γ(x_j - x_0) - γ(x_i - x_j)`.
pub fn br_gaussian_moments(spec: &BrownResnickSpec, sites: &SiteSet, anchor: usize) -> Result<(Vec<f64>, Matrix)> {
    check_anchor(anchor, sites.len())?;
    let idx = others(sites.len(), anchor);
    let g0: Vec<f64> = idx.iter().map(|&i| spec.variogram(sites.distance(i, anchor))).collect();
    let mean = g0.iter().map(|g| -g).collect();
    let cov = Matrix::from_fn(idx.len(), |a, b| {
        g0[a] + g0[b] - spec.variogram(sites.distance(idx[a], idx[b]))
    });
    Ok((mean, cov))
}

/// Degrees of freedom, location and scale of the Student vector whose
/// positive part raised to `α` gives the anchored extremal-t law:
/// `dof = α + 1`, `location_i = c(x_0, x_i)` and
/// `scale_ij = (c(x_i, x_j) - c(x_0, x_i) c(x_0, x_j)) / (α + 1)`.
pub fn extt_student_moments(spec: &ExtremalTSpec, sites: &SiteSet, anchor: usize) -> Result<(f64, Vec<f64>, Matrix)> {
    check_anchor(anchor, sites.len())?;
    let idx = others(sites.len(), anchor);
    let dof = spec.alpha + 1.0;
    let loc: Vec<f64> = idx
        .iter()
        .map(|&i| spec.correlation(sites.distance(i, anchor)))
        .collect();
    let scale = Matrix::from_fn(idx.len(), |a, b| {
        (spec.correlation(sites.distance(idx[a], idx[b])) - loc[a] * loc[b]) / dof
    });
    Ok((dof, loc, scale))
}

/// Gaussian density kernel with a cached Cholesky factor of its covariance.
#[derive(Debug, Clone)]
pub struct GaussianKernel {
    factor: CholeskyFactor,
    log_norm: f64,
}

impl GaussianKernel {
    pub fn new(spec: &MovingMaxSpec) -> Result<Self> {
        let factor = cholesky(&spec.kernel_cov, 0.0)?;
        let d = factor.dim() as f64;
        let log_norm = 0.5 * (d * (2.0 * std::f64::consts::PI).ln() + factor.log_det());
        Ok(Self { factor, log_norm })
    }

    pub fn factor(&self) -> &CholeskyFactor {
        &self.factor
    }

    /// `-½ uᵀK⁻¹u`, the log-density without its normalizing constant.
    pub fn log_shape(&self, u: &[f64]) -> f64 {
        -0.5 * self.factor.solve_lower(u).iter().map(|v| v * v).sum::<f64>()
    }

    pub fn log_density(&self, u: &[f64]) -> f64 {
        self.log_shape(u) - self.log_norm
    }
}

/// `log h(u)` for the moving-maxima Gaussian kernel.
///
/// # Panics
///
/// If `kernel_cov` is not positive definite; validate the model first.
pub fn moving_max_log_kernel(spec: &MovingMaxSpec, u: &[f64]) -> f64 {
    GaussianKernel::new(spec)
        .expect("kernel covariance must be positive definite")
        .log_density(u)
}
