//! Exact samplers for the anchored spectral laws `P_{x₀}` and for the
//! spectral measure `H` on the unit simplex.
//!
//! `P_{x₀}` is the law of the extremal function at `x₀` divided by its
//! value there, so every draw equals 1 at the anchor. Both simulation
//! engines consume nothing else from a model.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::models::{
    br_gaussian_moments, extt_student_moments, validate, BrownResnickSpec, DirichletSpec, ExtremalTSpec,
    GaussianKernel, LogisticSpec, ModelSpec, MovingMaxSpec, NegLogisticSpec, SiteSet,
};
use crate::rng_math::{
    cholesky, sample_frechet, sample_gamma, sample_mvn, sample_mvt, sample_weibull, CholeskyFactor, RngStream,
};

/// Largest diagonal jitter accepted when factorizing per-anchor covariances.
pub const DEFAULT_MAX_JITTER: f64 = 1e-6;

/// A draw from `P_{x_anchor}` restricted to the sites.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectralSample {
    anchor: usize,
    values: Vec<f64>,
}

impl SpectralSample {
    /// Pins `values[anchor]` to exactly 1.
    pub fn new(anchor: usize, mut values: Vec<f64>) -> Self {
        values[anchor] = 1.0;
        Self { anchor, values }
    }

    pub fn anchor(&self) -> usize {
        self.anchor
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Breaks the anchor invariant; only the validation negative control
    /// uses this.
    pub(crate) fn overwrite_anchor(&mut self, value: f64) {
        self.values[self.anchor] = value;
    }
}

/// A point of the unit L1-simplex.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimplexPoint {
    weights: Vec<f64>,
}

impl SimplexPoint {
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn into_weights(self) -> Vec<f64> {
        self.weights
    }
}

/// Anything that can draw from the anchored spectral laws of `n_sites()`
/// sites.
pub trait SpectralLaw: Sync {
    fn n_sites(&self) -> usize;

    fn sample_px(&self, rng: &mut RngStream, anchor: usize) -> Result<SpectralSample>;
}

impl<L: SpectralLaw + ?Sized> SpectralLaw for &L {
    fn n_sites(&self) -> usize {
        (**self).n_sites()
    }

    fn sample_px(&self, rng: &mut RngStream, anchor: usize) -> Result<SpectralSample> {
        (**self).sample_px(rng, anchor)
    }
}

#[derive(Debug, Clone)]
struct GaussianAnchor {
    mean: Vec<f64>,
    factor: CholeskyFactor,
}

#[derive(Debug, Clone)]
struct StudentAnchor {
    dof: f64,
    location: Vec<f64>,
    factor: CholeskyFactor,
}

#[derive(Debug, Clone)]
enum Prepared {
    MovingMax {
        kernel: GaussianKernel,
        sites: SiteSet,
    },
    BrownResnick {
        anchors: Vec<GaussianAnchor>,
    },
    ExtremalT {
        alpha: f64,
        anchors: Vec<StudentAnchor>,
    },
    Logistic(LogisticSpec),
    NegLogistic(NegLogisticSpec),
    Dirichlet {
        spec: DirichletSpec,
        anchored: Vec<Vec<f64>>,
    },
}

/// A validated model with every per-anchor factorization precomputed.
#[derive(Debug, Clone)]
pub struct PreparedModel {
    spec: ModelSpec,
    prepared: Prepared,
    max_jitter_used: f64,
}

impl PreparedModel {
    pub fn new(spec: &ModelSpec) -> Result<Self> {
        Self::with_max_jitter(spec, DEFAULT_MAX_JITTER)
    }

    pub fn with_max_jitter(spec: &ModelSpec, max_jitter: f64) -> Result<Self> {
        let violations = validate(spec);
        if !violations.is_empty() {
            return Err(Error::InvalidModel(violations));
        }
        let mut max_jitter_used = 0.0f64;
        let prepared = match spec {
            ModelSpec::MovingMax { spec, sites } => Prepared::MovingMax {
                kernel: GaussianKernel::new(spec)?,
                sites: sites.clone(),
            },
            ModelSpec::BrownResnick { spec, sites } => {
                let anchors = (0..sites.len())
                    .map(|a| {
                        let g = br_anchor(spec, sites, a, max_jitter)?;
                        max_jitter_used = max_jitter_used.max(g.factor.jitter_used());
                        Ok(g)
                    })
                    .collect::<Result<_>>()?;
                Prepared::BrownResnick { anchors }
            }
            ModelSpec::ExtremalT { spec, sites } => {
                let anchors = (0..sites.len())
                    .map(|a| {
                        let s = extt_anchor(spec, sites, a, max_jitter)?;
                        max_jitter_used = max_jitter_used.max(s.factor.jitter_used());
                        Ok(s)
                    })
                    .collect::<Result<_>>()?;
                Prepared::ExtremalT {
                    alpha: spec.alpha,
                    anchors,
                }
            }
            ModelSpec::Logistic(s) => Prepared::Logistic(*s),
            ModelSpec::NegLogistic(s) => Prepared::NegLogistic(*s),
            ModelSpec::Dirichlet(s) => Prepared::Dirichlet {
                anchored: (0..s.n()).map(|a| s.anchored_weights(a)).collect(),
                spec: s.clone(),
            },
        };
        Ok(Self {
            spec: spec.clone(),
            prepared,
            max_jitter_used,
        })
    }

    pub fn spec(&self) -> &ModelSpec {
        &self.spec
    }

    /// Largest jitter any per-anchor factorization needed.
    pub fn max_jitter_used(&self) -> f64 {
        self.max_jitter_used
    }
}

impl SpectralLaw for PreparedModel {
    fn n_sites(&self) -> usize {
        self.spec.n_sites()
    }

    fn sample_px(&self, rng: &mut RngStream, anchor: usize) -> Result<SpectralSample> {
        let n = self.n_sites();
        if anchor >= n {
            return Err(Error::AnchorOutOfRange { anchor, n });
        }
        match &self.prepared {
            Prepared::MovingMax { kernel, sites } => Ok(moving_max_draw(rng, kernel, sites, anchor)),
            Prepared::BrownResnick { anchors } => br_draw(rng, &anchors[anchor], n, anchor),
            Prepared::ExtremalT { alpha, anchors } => extt_draw(rng, &anchors[anchor], *alpha, n, anchor),
            Prepared::Logistic(s) => sample_px_logistic(rng, s, anchor),
            Prepared::NegLogistic(s) => sample_px_neglogistic(rng, s, anchor),
            Prepared::Dirichlet { spec, anchored } => {
                dirichlet_draw(rng, spec, &anchored[anchor], anchor).map(|(s, _)| s)
            }
        }
    }
}

fn br_anchor(spec: &BrownResnickSpec, sites: &SiteSet, anchor: usize, max_jitter: f64) -> Result<GaussianAnchor> {
    let (mean, cov) = br_gaussian_moments(spec, sites, anchor)?;
    Ok(GaussianAnchor {
        mean,
        factor: cholesky(&cov, max_jitter)?,
    })
}

fn extt_anchor(spec: &ExtremalTSpec, sites: &SiteSet, anchor: usize, max_jitter: f64) -> Result<StudentAnchor> {
    let (dof, location, scale) = extt_student_moments(spec, sites, anchor)?;
    Ok(StudentAnchor {
        dof,
        location,
        factor: cholesky(&scale, max_jitter)?,
    })
}

/// Scatters non-anchor coordinates back into a full-length vector.
fn with_anchor(n: usize, anchor: usize, rest: impl IntoIterator<Item = f64>) -> Vec<f64> {
    let mut out = Vec::with_capacity(n);
    let mut rest = rest.into_iter();
    for j in 0..n {
        out.push(if j == anchor { 1.0 } else { rest.next().unwrap() });
    }
    out
}

fn moving_max_draw(rng: &mut RngStream, kernel: &GaussianKernel, sites: &SiteSet, anchor: usize) -> SpectralSample {
    let d = sites.dim();
    let g: Vec<f64> = (0..d).map(|_| rng.standard_normal()).collect();
    let chi = kernel.factor().mul_vec(&g);
    let base = -0.5 * g.iter().map(|v| v * v).sum::<f64>();
    let values = (0..sites.len())
        .map(|j| {
            if j == anchor {
                return 1.0;
            }
            let u: Vec<f64> = sites.offset(anchor, j).iter().zip(&chi).map(|(a, b)| a + b).collect();
            (kernel.log_shape(&u) - base).exp()
        })
        .collect();
    SpectralSample::new(anchor, values)
}

fn br_draw(rng: &mut RngStream, g: &GaussianAnchor, n: usize, anchor: usize) -> Result<SpectralSample> {
    let logs = sample_mvn(rng, &g.mean, &g.factor)?;
    Ok(SpectralSample::new(
        anchor,
        with_anchor(n, anchor, logs.into_iter().map(f64::exp)),
    ))
}

fn extt_draw(rng: &mut RngStream, s: &StudentAnchor, alpha: f64, n: usize, anchor: usize) -> Result<SpectralSample> {
    let t = sample_mvt(rng, s.dof, &s.location, &s.factor)?;
    Ok(SpectralSample::new(
        anchor,
        with_anchor(n, anchor, t.into_iter().map(|v| v.max(0.0).powf(alpha))),
    ))
}

fn dirichlet_draw(
    rng: &mut RngStream,
    spec: &DirichletSpec,
    anchored: &[f64],
    anchor: usize,
) -> Result<(SpectralSample, usize)> {
    let u = rng.uniform_open();
    let mut acc = 0.0;
    let mut k = anchored.len() - 1;
    for (i, w) in anchored.iter().enumerate() {
        acc += w;
        if u < acc {
            k = i;
            break;
        }
    }
    let g_anchor = sample_gamma(rng, spec.alpha[anchor][k] + 1.0, 1.0)?;
    let mut values = Vec::with_capacity(spec.n());
    for j in 0..spec.n() {
        if j == anchor {
            values.push(1.0);
        } else {
            values.push(sample_gamma(rng, spec.alpha[j][k], 1.0)? / g_anchor);
        }
    }
    Ok((SpectralSample::new(anchor, values), k))
}

fn check_anchor(anchor: usize, n: usize) -> Result<()> {
    if anchor < n {
        Ok(())
    } else {
        Err(Error::AnchorOutOfRange { anchor, n })
    }
}

/// Moving maxima: `h(· + χ - x₀) / h(χ)` with `χ` drawn from the kernel,
/// evaluated in log space.
pub fn sample_px_moving_max(
    rng: &mut RngStream,
    spec: &MovingMaxSpec,
    sites: &SiteSet,
    anchor: usize,
) -> Result<SpectralSample> {
    check_anchor(anchor, sites.len())?;
    let kernel = GaussianKernel::new(spec)?;
    if kernel.factor().dim() != sites.dim() {
        return Err(Error::DimensionMismatch {
            expected: sites.dim(),
            got: kernel.factor().dim(),
        });
    }
    Ok(moving_max_draw(rng, &kernel, sites, anchor))
}

/// Brown–Resnick: `exp(G)` with `G` the Gaussian vector of
/// [`br_gaussian_moments`].
pub fn sample_px_brown_resnick(
    rng: &mut RngStream,
    spec: &BrownResnickSpec,
    sites: &SiteSet,
    anchor: usize,
) -> Result<SpectralSample> {
    let g = br_anchor(spec, sites, anchor, DEFAULT_MAX_JITTER)?;
    br_draw(rng, &g, sites.len(), anchor)
}

/// Extremal-t: `max(T, 0)^α` with `T` the Student vector of
/// [`extt_student_moments`] on the non-anchor sites.
pub fn sample_px_extremal_t(
    rng: &mut RngStream,
    spec: &ExtremalTSpec,
    sites: &SiteSet,
    anchor: usize,
) -> Result<SpectralSample> {
    let s = extt_anchor(spec, sites, anchor, DEFAULT_MAX_JITTER)?;
    extt_draw(rng, &s, spec.alpha, sites.len(), anchor)
}

/// Logistic: `F_j / F_anchor` with independent `F_j ~ Fréchet(β, c_β)` and
/// `(F_anchor / c_β)^{-β} ~ Gamma(1 - 1/β, 1)`.
pub fn sample_px_logistic(rng: &mut RngStream, spec: &LogisticSpec, anchor: usize) -> Result<SpectralSample> {
    check_anchor(anchor, spec.n)?;
    let beta = spec.beta();
    let c = spec.c_beta();
    let g = sample_gamma(rng, 1.0 - 1.0 / beta, 1.0)?;
    let f_anchor = c * g.powf(-1.0 / beta);
    let mut values = Vec::with_capacity(spec.n);
    for j in 0..spec.n {
        values.push(if j == anchor {
            1.0
        } else {
            sample_frechet(rng, beta, c)? / f_anchor
        });
    }
    Ok(SpectralSample::new(anchor, values))
}

/// Negative logistic: `W_j / W_anchor` with independent
/// `W_j ~ Weibull(θ, c_θ)` and `(W_anchor / c_θ)^θ ~ Gamma(1 + 1/θ, 1)`.
pub fn sample_px_neglogistic(rng: &mut RngStream, spec: &NegLogisticSpec, anchor: usize) -> Result<SpectralSample> {
    check_anchor(anchor, spec.n)?;
    let theta = spec.theta;
    let c = spec.c_theta();
    let g = sample_gamma(rng, 1.0 + 1.0 / theta, 1.0)?;
    let w_anchor = c * g.powf(1.0 / theta);
    let mut values = Vec::with_capacity(spec.n);
    for j in 0..spec.n {
        values.push(if j == anchor {
            1.0
        } else {
            sample_weibull(rng, theta, c)? / w_anchor
        });
    }
    Ok(SpectralSample::new(anchor, values))
}

/// Dirichlet mixture: pick a component with the anchored weights, then
/// return `G_j / G_anchor` with independent Gammas whose anchor shape is
/// boosted by one.
pub fn sample_px_dirichlet(rng: &mut RngStream, spec: &DirichletSpec, anchor: usize) -> Result<SpectralSample> {
    sample_px_dirichlet_component(rng, spec, anchor).map(|(s, _)| s)
}

/// As [`sample_px_dirichlet`], also returning the chosen component.
pub fn sample_px_dirichlet_component(
    rng: &mut RngStream,
    spec: &DirichletSpec,
    anchor: usize,
) -> Result<(SpectralSample, usize)> {
    check_anchor(anchor, spec.n())?;
    dirichlet_draw(rng, spec, &spec.anchored_weights(anchor), anchor)
}

/// One draw from `P_{x_anchor}` for any model. Prefer [`PreparedModel`]
/// when drawing repeatedly: this validates and factorizes on every call.
pub fn sample_px(rng: &mut RngStream, model: &ModelSpec, anchor: usize) -> Result<SpectralSample> {
    PreparedModel::new(model)?.sample_px(rng, anchor)
}

/// One draw from the spectral measure `H`: a uniform anchor `T`, then
/// `Y / ‖Y‖₁` with `Y ~ P_{x_T}`.
pub fn sample_spectral_h<L: SpectralLaw + ?Sized>(rng: &mut RngStream, law: &L) -> Result<SimplexPoint> {
    let anchor = rng.index(law.n_sites());
    let y = law.sample_px(rng, anchor)?;
    let norm: f64 = y.values().iter().sum();
    if !(norm > 0.0 && norm.is_finite()) {
        return Err(Error::Invariant(format!("spectral draw has L1 norm {norm}")));
    }
    Ok(SimplexPoint {
        weights: y.into_values().into_iter().map(|v| v / norm).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng_math::{sample_exponential, Matrix};

    fn line(xs: &[f64]) -> SiteSet {
        SiteSet::new(xs.iter().map(|&x| vec![x]).collect()).unwrap()
    }

    fn mean_se(x: &[f64]) -> (f64, f64) {
        let n = x.len() as f64;
        let m = x.iter().sum::<f64>() / n;
        let v = x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (n - 1.0);
        (m, (v / n).sqrt())
    }

    fn ks2(mut a: Vec<f64>, mut b: Vec<f64>) -> f64 {
        a.sort_by(|x, y| x.partial_cmp(y).unwrap());
        b.sort_by(|x, y| x.partial_cmp(y).unwrap());
        let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
        while i < a.len() && j < b.len() {
            let v = a[i].min(b[j]);
            while i < a.len() && a[i] <= v {
                i += 1;
            }
            while j < b.len() && b[j] <= v {
                j += 1;
            }
            d = d.max((i as f64 / a.len() as f64 - j as f64 / b.len() as f64).abs());
        }
        d
    }

    fn coordinate(law: &PreparedModel, anchor: usize, j: usize, n: usize, seed: u64) -> Vec<f64> {
        let mut rng = RngStream::new(seed, 0);
        (0..n)
            .map(|_| law.sample_px(&mut rng, anchor).unwrap().values()[j])
            .collect()
    }

    fn assert_unit_mean(x: &[f64]) {
        let (m, se) = mean_se(x);
        assert!((m - 1.0).abs() < 4.0 * se, "mean {m} se {se}");
    }

    fn all_families() -> Vec<ModelSpec> {
        let sites = line(&[0.0, 0.6, 1.1, 2.0]);
        vec![
            ModelSpec::MovingMax {
                spec: MovingMaxSpec {
                    kernel_cov: Matrix::identity(1),
                },
                sites: sites.clone(),
            },
            ModelSpec::BrownResnick {
                spec: BrownResnickSpec {
                    variogram_c: 1.0,
                    variogram_alpha: 1.0,
                },
                sites: sites.clone(),
            },
            ModelSpec::ExtremalT {
                spec: ExtremalTSpec {
                    alpha: 1.0,
                    corr_range: 1.0,
                    corr_smoothness: 1.0,
                },
                sites,
            },
            ModelSpec::Logistic(LogisticSpec { theta: 0.5, n: 4 }),
            ModelSpec::NegLogistic(NegLogisticSpec { theta: 2.0, n: 4 }),
            ModelSpec::Dirichlet(DirichletSpec {
                weights: vec![0.5, 0.5],
                alpha: vec![vec![1.0, 3.0], vec![2.0, 2.0], vec![2.0, 2.0], vec![3.0, 1.0]],
            }),
        ]
    }

    #[test]
    fn single_site_is_one() {
        let singles = vec![
            ModelSpec::Logistic(LogisticSpec { theta: 0.3, n: 1 }),
            ModelSpec::NegLogistic(NegLogisticSpec { theta: 0.7, n: 1 }),
            ModelSpec::Dirichlet(DirichletSpec {
                weights: vec![1.0],
                alpha: vec![vec![2.5]],
            }),
            ModelSpec::BrownResnick {
                spec: BrownResnickSpec {
                    variogram_c: 1.0,
                    variogram_alpha: 1.0,
                },
                sites: line(&[0.3]),
            },
            ModelSpec::ExtremalT {
                spec: ExtremalTSpec {
                    alpha: 2.0,
                    corr_range: 1.0,
                    corr_smoothness: 1.0,
                },
                sites: line(&[0.3]),
            },
            ModelSpec::MovingMax {
                spec: MovingMaxSpec {
                    kernel_cov: Matrix::identity(1),
                },
                sites: line(&[0.3]),
            },
        ];
        let mut rng = RngStream::new(0, 0);
        for m in &singles {
            assert_eq!(sample_px(&mut rng, m, 0).unwrap().values(), &[1.0]);
            assert_eq!(
                sample_spectral_h(&mut rng, &PreparedModel::new(m).unwrap())
                    .unwrap()
                    .weights(),
                &[1.0]
            );
        }
    }

    #[test]
    fn anchor_pinned_for_every_family() {
        let mut rng = RngStream::new(5, 0);
        for m in all_families() {
            let law = PreparedModel::new(&m).unwrap();
            for a in 0..law.n_sites() {
                for _ in 0..200 {
                    let s = law.sample_px(&mut rng, a).unwrap();
                    assert_eq!(s.anchor(), a);
                    assert_eq!(s.values()[a], 1.0);
                    assert!(s.values().iter().all(|v| v.is_finite() && *v >= 0.0));
                    if !matches!(m, ModelSpec::ExtremalT { .. }) {
                        assert!(s.values().iter().all(|v| *v > 0.0), "{}", m.family_name());
                    }
                }
            }
            assert!(law.sample_px(&mut rng, law.n_sites()).is_err());
        }
    }

    #[test]
    fn invalid_model_rejected() {
        let mut rng = RngStream::new(0, 0);
        let m = ModelSpec::Logistic(LogisticSpec { theta: 1.5, n: 2 });
        assert!(matches!(sample_px(&mut rng, &m, 0), Err(Error::InvalidModel(_))));
    }

    // E[Y(x)] under P_{x0} is E[W(x) 1{W(x0) > 0}]: 1 for positive spectral
    // functions, (1 + ρ)/2 for extremal-t with α = 1 (Gaussian orthant moment).
    fn expected_mean(m: &ModelSpec, anchor: usize, j: usize) -> f64 {
        match m {
            ModelSpec::ExtremalT { spec, sites } => {
                assert_eq!(spec.alpha, 1.0);
                (1.0 + spec.correlation(sites.distance(anchor, j))) / 2.0
            }
            _ => 1.0,
        }
    }

    #[test]
    fn non_anchor_means() {
        for (f, m) in all_families().into_iter().enumerate() {
            let law = PreparedModel::new(&m).unwrap();
            for (anchor, j) in [(0, 1), (2, 3)] {
                let x = coordinate(&law, anchor, j, 100_000, 100 + f as u64);
                let (mean, se) = mean_se(&x);
                let target = expected_mean(&m, anchor, j);
                assert!(
                    (mean - target).abs() < 4.0 * se,
                    "{} anchor {anchor} site {j}: {mean} ± {se} vs {target}",
                    m.family_name()
                );
            }
        }
    }

    #[test]
    fn logistic_mean_and_strong_dependence() {
        let law = PreparedModel::new(&ModelSpec::Logistic(LogisticSpec { theta: 0.5, n: 3 })).unwrap();
        assert_unit_mean(&coordinate(&law, 0, 1, 100_000, 1));
        let law = PreparedModel::new(&ModelSpec::Logistic(LogisticSpec { theta: 0.5, n: 2 })).unwrap();
        assert_unit_mean(&coordinate(&law, 0, 1, 100_000, 2));

        let law = PreparedModel::new(&ModelSpec::Logistic(LogisticSpec { theta: 0.05, n: 2 })).unwrap();
        let x = coordinate(&law, 0, 1, 10_000, 3);
        let (m, _) = mean_se(&x);
        let var = x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / 9_999.0;
        assert!(var < 0.1, "variance {var}");
    }

    #[test]
    fn brown_resnick_log_normal_law() {
        let spec = BrownResnickSpec {
            variogram_c: 1.0,
            variogram_alpha: 1.0,
        };
        let sites = line(&[0.0, 1.0]);
        let mut rng = RngStream::new(4, 0);
        let mut logs: Vec<f64> = (0..10_000)
            .map(|_| sample_px_brown_resnick(&mut rng, &spec, &sites, 0).unwrap().values()[1].ln())
            .collect();
        // KS against Normal(-1, 2).
        logs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let n = logs.len() as f64;
        let d = logs
            .iter()
            .enumerate()
            .map(|(i, &v)| {
                let f = 0.5 * statrs::function::erf::erfc(-(v + 1.0) / 2.0);
                (f - i as f64 / n).max((i + 1) as f64 / n - f)
            })
            .fold(0.0, f64::max);
        assert!(d < 0.02, "D = {d}");

        let law = PreparedModel::new(&ModelSpec::BrownResnick {
            spec: BrownResnickSpec {
                variogram_c: 0.8,
                variogram_alpha: 1.7,
            },
            sites: line(&[0.0, 1.3]),
        })
        .unwrap();
        assert_unit_mean(&coordinate(&law, 0, 1, 100_000, 5));
    }

    #[test]
    fn brown_resnick_degenerate_variogram() {
        let law = PreparedModel::new(&ModelSpec::BrownResnick {
            spec: BrownResnickSpec {
                variogram_c: 1e-300,
                variogram_alpha: 1.0,
            },
            sites: line(&[0.0, 1.0, 2.0, 3.5]),
        })
        .unwrap();
        assert_eq!(law.max_jitter_used(), 0.0);
        let mut rng = RngStream::new(6, 0);
        for _ in 0..100 {
            assert_eq!(law.sample_px(&mut rng, 2).unwrap().values(), &[1.0; 4]);
            assert_eq!(sample_spectral_h(&mut rng, &law).unwrap().weights(), &[0.25; 4]);
        }
    }

    #[test]
    fn extremal_t_zero_mass_and_mean() {
        let spec = ExtremalTSpec {
            alpha: 1.0,
            corr_range: 1.0,
            corr_smoothness: 1.0,
        };
        let far = line(&[0.0, 1e3]);
        let mut rng = RngStream::new(7, 0);
        let n = 100_000;
        let zeros = (0..n)
            .filter(|_| sample_px_extremal_t(&mut rng, &spec, &far, 0).unwrap().values()[1] == 0.0)
            .count() as f64
            / n as f64;
        assert!((zeros - 0.5).abs() < 4.0 * (0.25 / n as f64).sqrt(), "P(0) = {zeros}");

        // c(x0, x1) = 0.5 at distance ln 2.
        let law = PreparedModel::new(&ModelSpec::ExtremalT {
            spec,
            sites: line(&[0.0, std::f64::consts::LN_2]),
        })
        .unwrap();
        for (anchor, j, seed) in [(0, 1, 8), (1, 0, 9)] {
            let (m, se) = mean_se(&coordinate(&law, anchor, j, 100_000, seed));
            assert!((m - 0.75).abs() < 4.0 * se, "mean {m} se {se}");
        }
    }

    #[test]
    fn moving_max_closed_form() {
        let spec = MovingMaxSpec {
            kernel_cov: Matrix::identity(1),
        };
        let t = 0.8;
        let sites = line(&[0.0, t]);
        let mut rng = RngStream::new(10, 0);
        let x: Vec<f64> = (0..100_000)
            .map(|_| sample_px_moving_max(&mut rng, &spec, &sites, 0).unwrap().values()[1])
            .collect();
        assert_unit_mean(&x);
        // values[1] = exp(-t²/2 - tχ): its log is Normal(-t²/2, t²).
        let logs: Vec<f64> = x.iter().map(|v| v.ln()).collect();
        let (m, se) = mean_se(&logs);
        assert!((m + t * t / 2.0).abs() < 4.0 * se);

        let far = line(&[0.0, 10.0]);
        let mut logs: Vec<f64> = (0..10_000)
            .map(|_| sample_px_moving_max(&mut rng, &spec, &far, 0).unwrap().values()[1].ln())
            .collect();
        assert!(logs.iter().all(|v| v.is_finite()));
        logs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let median = 0.5 * (logs[4_999] + logs[5_000]);
        // SE of the median of Normal(-50, 100) at n = 10^4 is about 0.125.
        assert!((median + 50.0).abs() < 0.5, "median {median}");
    }

    #[test]
    fn neglogistic_theta_one_matches_direct_construction() {
        let spec = NegLogisticSpec { theta: 1.0, n: 3 };
        let mut rng = RngStream::new(11, 0);
        let a: Vec<f64> = (0..10_000)
            .map(|_| sample_px_neglogistic(&mut rng, &spec, 0).unwrap().values()[2])
            .collect();
        let mut rng = RngStream::new(12, 0);
        let b: Vec<f64> = (0..10_000)
            .map(|_| {
                let e = sample_exponential(&mut rng, 1.0).unwrap();
                let g = sample_gamma(&mut rng, 2.0, 1.0).unwrap();
                e / g
            })
            .collect();
        assert!(ks2(a, b) < 0.03);

        let law = PreparedModel::new(&ModelSpec::NegLogistic(NegLogisticSpec { theta: 2.0, n: 2 })).unwrap();
        assert_unit_mean(&coordinate(&law, 0, 1, 100_000, 13));
    }

    #[test]
    fn dirichlet_ratio_and_components() {
        let spec = DirichletSpec {
            weights: vec![1.0],
            alpha: vec![vec![2.0], vec![2.0]],
        };
        let mut rng = RngStream::new(14, 0);
        let x: Vec<f64> = (0..100_000)
            .map(|_| sample_px_dirichlet(&mut rng, &spec, 0).unwrap().values()[1])
            .collect();
        assert_unit_mean(&x);

        let mix = DirichletSpec {
            weights: vec![0.3, 0.7],
            alpha: vec![vec![1.0, 3.0], vec![2.0, 1.0]],
        };
        // The moment constraint does not hold here; component selection
        // alone is under test, so skip validation.
        let w1 = 0.3 * 1.0 / 3.0;
        let w2 = 0.7 * 3.0 / 4.0;
        let expect = w1 / (w1 + w2);
        let n = 100_000;
        let hits = (0..n)
            .filter(|_| sample_px_dirichlet_component(&mut rng, &mix, 0).unwrap().1 == 0)
            .count() as f64
            / n as f64;
        let se = (expect * (1.0 - expect) / n as f64).sqrt();
        assert!((hits - expect).abs() < 4.0 * se, "{hits} vs {expect}");
    }

    #[test]
    fn spectral_measure_moments() {
        for (f, m) in all_families().into_iter().enumerate() {
            let law = PreparedModel::new(&m).unwrap();
            let n = law.n_sites();
            let mut rng = RngStream::new(200 + f as u64, 0);
            let draws = 100_000;
            let mut cols = vec![Vec::with_capacity(draws); n];
            for _ in 0..draws {
                let q = sample_spectral_h(&mut rng, &law).unwrap();
                let s: f64 = q.weights().iter().sum();
                assert!((s - 1.0).abs() < 1e-12);
                for (c, w) in cols.iter_mut().zip(q.weights()) {
                    assert!(*w >= 0.0);
                    c.push(*w);
                }
            }
            for c in &cols {
                let (mean, se) = mean_se(c);
                assert!(
                    (mean - 1.0 / n as f64).abs() < 4.0 * se,
                    "{}: {mean} ± {se}",
                    m.family_name()
                );
            }
        }
    }

    #[test]
    fn draws_are_reproducible() {
        for m in all_families() {
            let law = PreparedModel::new(&m).unwrap();
            let a: Vec<_> = {
                let mut rng = RngStream::new(99, 3);
                (0..20)
                    .map(|i| law.sample_px(&mut rng, i % law.n_sites()).unwrap())
                    .collect()
            };
            let b: Vec<_> = {
                let mut rng = RngStream::new(99, 3);
                (0..20)
                    .map(|i| law.sample_px(&mut rng, i % law.n_sites()).unwrap())
                    .collect()
            };
            assert_eq!(a, b);
        }
    }
}
