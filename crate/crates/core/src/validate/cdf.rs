use crate::error::{Error, Result};

/// Largest dimension accepted by [`neglogistic_cdf`] (2^N subset terms).
pub const NEGLOGISTIC_MAX_DIM: usize = 20;

fn check_positive(z: &[f64]) -> Result<()> {
    if z.is_empty() {
        return Err(Error::EmptyInput);
    }
    match z.iter().find(|v| v.is_nan() || **v <= 0.0) {
        Some(v) => Err(Error::Parameter(format!("CDF arguments must be positive, got {v}"))),
        None => Ok(()),
    }
}

/// Symmetric logistic CDF `exp(-(Σ_j z_j^{-1/θ})^θ)`.
pub fn logistic_cdf(z: &[f64], theta: f64) -> Result<f64> {
    check_positive(z)?;
    if !(theta > 0.0 && theta < 1.0) {
        return Err(Error::Parameter(format!("theta must lie in (0, 1), got {theta}")));
    }
    let s: f64 = z.iter().map(|v| v.powf(-1.0 / theta)).sum();
    Ok((-s.powf(theta)).exp())
}

/// Negative logistic CDF by inclusion–exclusion over the non-empty subsets
/// `J`: `exp(Σ_J (-1)^{|J|} (Σ_{j∈J} z_j^θ)^{-1/θ})`. The alternating sum
/// is accumulated with Neumaier compensation.
pub fn neglogistic_cdf(z: &[f64], theta: f64) -> Result<f64> {
    check_positive(z)?;
    if !(theta > 0.0 && theta.is_finite()) {
        return Err(Error::Parameter(format!("theta must be positive, got {theta}")));
    }
    let n = z.len();
    if n > NEGLOGISTIC_MAX_DIM {
        return Err(Error::Parameter(format!(
            "negative logistic CDF supports at most {NEGLOGISTIC_MAX_DIM} coordinates, got {n}"
        )));
    }
    let powers: Vec<f64> = z.iter().map(|v| v.powf(theta)).collect();
    let (mut sum, mut comp) = (0.0f64, 0.0f64);
    for mask in 1u32..(1u32 << n) {
        let inner: f64 = (0..n).filter(|j| mask & (1 << j) != 0).map(|j| powers[j]).sum();
        let term = inner.powf(-1.0 / theta);
        let term = if mask.count_ones() % 2 == 1 { -term } else { term };
        let t = sum + term;
        if sum.abs() >= term.abs() {
            comp += (sum - t) + term;
        } else {
            comp += (term - t) + sum;
        }
        sum = t;
    }
    // The exponent is -E[max_j W_j / z_j] < 0; clamp rounding residue.
    Ok((sum + comp).min(0.0).exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use statrs::function::gamma::gamma;

    // Independent route: P(Z ≤ z) = exp(-∫_0^∞ (1 - Π_j F_j(z_j u)) du)
    // with F_j the CDF of the spectral components. The integral is done by
    // the trapezoid rule after the substitution u = e^s.
    fn exponent_by_quadrature(inside: impl Fn(f64) -> f64) -> f64 {
        let (a, b, steps) = (-40.0f64, 40.0f64, 400_000);
        let h = (b - a) / steps as f64;
        let f = |s: f64| {
            let u = s.exp();
            (1.0 - inside(u)) * u
        };
        let mut total = 0.5 * (f(a) + f(b));
        for i in 1..steps {
            total += f(a + i as f64 * h);
        }
        total * h
    }

    fn logistic_oracle(z: &[f64], theta: f64) -> f64 {
        let beta = 1.0 / theta;
        let c = 1.0 / gamma(1.0 - theta);
        let e = exponent_by_quadrature(|u| z.iter().map(|zj| (-(zj * u / c).powf(-beta)).exp()).product());
        (-e).exp()
    }

    fn neglogistic_oracle(z: &[f64], theta: f64) -> f64 {
        let c = 1.0 / gamma(1.0 + 1.0 / theta);
        let e = exponent_by_quadrature(|u| z.iter().map(|zj| 1.0 - (-(zj * u / c).powf(theta)).exp()).product());
        (-e).exp()
    }

    #[test]
    fn logistic_values() {
        let e1 = (-1.0f64).exp();
        for theta in [0.1, 0.5, 0.9] {
            assert!((logistic_cdf(&[1.0], theta).unwrap() - e1).abs() < 1e-15);
        }
        assert!((logistic_cdf(&[1.0, 1.0], 0.5).unwrap() - (-(2f64.sqrt())).exp()).abs() < 1e-15);
        let expect = (-(1.3125f64.sqrt())).exp();
        assert!((logistic_cdf(&[1.0, 2.0, 4.0], 0.5).unwrap() - expect).abs() < 1e-15);
        assert!((logistic_cdf(&[1.0, 2.0, 4.0], 0.5).unwrap() - logistic_oracle(&[1.0, 2.0, 4.0], 0.5)).abs() < 1e-6);
        assert!(logistic_cdf(&[1.0, 0.0], 0.5).is_err());
        assert!(logistic_cdf(&[1.0], 1.0).is_err());
    }

    #[test]
    fn neglogistic_values() {
        let e1 = (-1.0f64).exp();
        for theta in [0.3, 1.0, 4.0] {
            assert!((neglogistic_cdf(&[1.0], theta).unwrap() - e1).abs() < 1e-15);
        }
        assert!((neglogistic_cdf(&[1.0, 1.0], 1.0).unwrap() - (-1.5f64).exp()).abs() < 1e-15);
        // Complete-dependence limit.
        assert!((neglogistic_cdf(&[1.0, 1.0], 200.0).unwrap() - e1).abs() < 1e-2);
        for (z, theta) in [(vec![0.7, 1.9, 3.0], 2.0), (vec![1.0, 0.4, 2.2, 5.0], 0.6)] {
            let a = neglogistic_cdf(&z, theta).unwrap();
            let b = neglogistic_oracle(&z, theta);
            assert!((a - b).abs() < 1e-6, "{a} vs {b}");
        }
        assert!(neglogistic_cdf(&[1.0; 21], 1.0).is_err());
        assert!(neglogistic_cdf(&[-1.0], 1.0).is_err());
    }

    #[test]
    fn neglogistic_high_dimension_stays_in_range() {
        let z: Vec<f64> = (0..16).map(|i| 0.5 + 0.25 * i as f64).collect();
        for theta in [0.2, 1.0, 3.0] {
            let p = neglogistic_cdf(&z, theta).unwrap();
            assert!(p > 0.0 && p <= 1.0, "{p}");
        }
    }

    proptest! {
        #[test]
        fn cdfs_are_monotone(
            z in proptest::collection::vec(0.05f64..20.0, 1..6),
            bump in 0.0f64..5.0,
            k in 0usize..6,
            theta in 0.05f64..0.95,
        ) {
            let k = k % z.len();
            let mut w = z.clone();
            w[k] += bump;
            prop_assert!(logistic_cdf(&w, theta).unwrap() >= logistic_cdf(&z, theta).unwrap());
            let t = 0.2 + 3.0 * theta;
            let a = neglogistic_cdf(&z, t).unwrap();
            let b = neglogistic_cdf(&w, t).unwrap();
            prop_assert!(b >= a - 1e-12);
            prop_assert!(a > 0.0 && a <= 1.0);
        }

        #[test]
        fn single_coordinate_is_unit_frechet(z in 0.01f64..100.0, theta in 0.05f64..0.95) {
            let f = (-1.0 / z).exp();
            prop_assert!((logistic_cdf(&[z], theta).unwrap() - f).abs() < 1e-14);
            prop_assert!((neglogistic_cdf(&[z], 5.0 * theta).unwrap() - f).abs() < 1e-14);
        }
    }

    #[test]
    fn logistic_tends_to_one() {
        assert!(logistic_cdf(&[1e12, 1e12, 1e12], 0.4).unwrap() > 1.0 - 1e-11);
    }
}
