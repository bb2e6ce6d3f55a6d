//! Privacy-constrained MMSE for the additive filter `Z = X + λN`.
//!
//! Closed forms cover the Gaussian case (`α = 2`); the Monte Carlo estimator
//! regresses `Y` on equal-mass bins of `Z`. Stable noise with `α < 2` has
//! infinite variance and is rejected.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::maxcorr::quantile_bins;
use crate::seed::derive_seed;
use crate::stable::{lambda_star, sample_pairs, varrho_epsilon_gaussian, PairSampler, StableFilterSpec};

const BATCHES: usize = 10;
/// Two-sided 97.5% Student t quantile with 9 degrees of freedom.
const T_975_9: f64 = 2.262_157_162_740_992;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MmseMethod {
    GaussianClosedForm,
    MonteCarloBinned,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MmseResult {
    pub lambda: f64,
    pub mmse: f64,
    pub method: MmseMethod,
    pub n: Option<usize>,
    pub bins: Option<usize>,
    pub seed: Option<u64>,
    pub ci_halfwidth: f64,
}

fn check_gaussian_inputs(rho_xy: f64, var_y: f64) -> Result<()> {
    if !(rho_xy.abs() < 1.0) {
        return Err(Error::DegenerateRho(rho_xy));
    }
    if !(var_y > 0.0 && var_y.is_finite()) {
        return Err(Error::InvalidParams(format!("var_y {var_y} must be positive")));
    }
    Ok(())
}

/// `var_y (1 − rho² / (1 + λ²))` for standard Gaussian `X` and `N`.
pub fn mmse_gaussian(rho_xy: f64, var_y: f64, lambda: f64) -> Result<MmseResult> {
    check_gaussian_inputs(rho_xy, var_y)?;
    if !(lambda >= 0.0) || lambda.is_infinite() {
        return Err(Error::InvalidParams(format!("lambda {lambda} must be finite and >= 0")));
    }
    Ok(MmseResult {
        lambda,
        mmse: var_y * (1.0 - rho_xy * rho_xy / (1.0 + lambda * lambda)),
        method: MmseMethod::GaussianClosedForm,
        n: None,
        bins: None,
        seed: None,
        ci_halfwidth: 0.0,
    })
}

/// Lower bound `(1 − ϱ_ε²) var(Y)`.
pub fn mmse_bound(varrho_eps: f64, var_y: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&varrho_eps) {
        return Err(Error::InvalidParams(format!("varrho {varrho_eps} not in [0, 1]")));
    }
    if !(var_y > 0.0) {
        return Err(Error::InvalidParams(format!("var_y {var_y} must be positive")));
    }
    Ok((1.0 - varrho_eps * varrho_eps) * var_y)
}

/// Least MMSE over gains meeting `ρ_m(X;Z) ≤ ε`. The MMSE grows with λ, so
/// the optimum sits at `λ*_ε`.
pub fn mmse_eps(rho_xy: f64, var_y: f64, epsilon: f64) -> Result<MmseResult> {
    mmse_gaussian(rho_xy, var_y, lambda_star(epsilon, 2.0)?)
}

/// Gaussian-case bound `(1 − (|rho| ε)²) var_y`.
pub fn mmse_bound_gaussian(rho_xy: f64, var_y: f64, epsilon: f64) -> Result<f64> {
    mmse_bound(varrho_epsilon_gaussian(rho_xy, epsilon)?, var_y)
}

/// Binned regression of `y` on `z`.
#[derive(Debug, Clone, PartialEq)]
pub struct BinnedRegression {
    /// Mean squared residual.
    pub mmse: f64,
    /// Population variance of `y`.
    pub var_y: f64,
    /// Squared correlation of `y` with its fitted values.
    pub rho_sq: f64,
    /// Batch-means 95% half-width of `mmse`.
    pub ci_halfwidth: f64,
    pub bins_used: usize,
}

/// Regresses `y` on equal-mass bins of `z` (within-bin means) and reports
/// the residual error, the fit correlation and a batch-means interval over
/// `10` contiguous batches.
pub fn binned_regression(z: &[f64], y: &[f64], bins: usize) -> Result<BinnedRegression> {
    if z.len() != y.len() {
        return Err(Error::LengthMismatch(z.len(), y.len()));
    }
    let n = y.len();
    if n < BATCHES * bins.max(1) {
        return Err(Error::TooFewSamples { required: BATCHES * bins.max(1), got: n });
    }
    let (idx, k) = quantile_bins(z, bins);
    let mut sum = vec![0.0; k];
    let mut count = vec![0usize; k];
    for (&b, &v) in idx.iter().zip(y) {
        sum[b] += v;
        count[b] += 1;
    }
    let fit: Vec<f64> = sum.iter().zip(&count).map(|(s, &c)| s / c as f64).collect();
    let nf = n as f64;
    let mean_y = y.iter().sum::<f64>() / nf;
    let var_y = y.iter().map(|v| (v - mean_y).powi(2)).sum::<f64>() / nf;

    let resid: Vec<f64> = idx.iter().zip(y).map(|(&b, &v)| (v - fit[b]).powi(2)).collect();
    let mmse = resid.iter().sum::<f64>() / nf;

    let (mut cov, mut var_fit) = (0.0, 0.0);
    for (&b, &v) in idx.iter().zip(y) {
        let f = fit[b] - mean_y;
        cov += (v - mean_y) * f;
        var_fit += f * f;
    }
    let rho_sq = if var_fit > 0.0 && var_y > 0.0 { cov * cov / (var_fit * var_y * nf) } else { 0.0 };

    let batch = n / BATCHES;
    let means: Vec<f64> = (0..BATCHES)
        .map(|i| {
            let hi = if i + 1 == BATCHES { n } else { (i + 1) * batch };
            let s = &resid[i * batch..hi];
            s.iter().sum::<f64>() / s.len() as f64
        })
        .collect();
    let m = means.iter().sum::<f64>() / BATCHES as f64;
    let sd = (means.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (BATCHES - 1) as f64).sqrt();
    Ok(BinnedRegression { mmse, var_y, rho_sq, ci_halfwidth: T_975_9 * sd / (BATCHES as f64).sqrt(), bins_used: k })
}

/// Monte Carlo `mmse(Y; λ)`: draws `(X, Y)` from `sampler`, forms
/// `Z = X + λN`, and regresses `Y` on equal-mass bins of `Z`. Biased upward
/// by the within-bin spread of `E[Y|Z]`.
pub fn mmse_monte_carlo<S: PairSampler + ?Sized>(
    sampler: &S,
    filter: &StableFilterSpec,
    n: usize,
    bins: usize,
    seed: u64,
    exec: Execution,
) -> Result<(MmseResult, BinnedRegression)> {
    if filter.params.alpha != 2.0 {
        return Err(Error::InvalidParams(format!(
            "alpha = {} noise has infinite variance; MMSE is only defined for alpha = 2",
            filter.params.alpha
        )));
    }
    if n < 10_000 {
        return Err(Error::TooFewSamples { required: 10_000, got: n });
    }
    if bins < 8 {
        return Err(Error::InvalidParams(format!("bins {bins} < 8")));
    }
    let (x, y) = sample_pairs(sampler, n, derive_seed(seed, "mmse_pairs", 0), exec);
    let z = filter.apply(&x, derive_seed(seed, "mmse_noise", 0), exec)?;
    let reg = binned_regression(&z, &y, bins)?;
    Ok((
        MmseResult {
            lambda: filter.lambda,
            mmse: reg.mmse,
            method: MmseMethod::MonteCarloBinned,
            n: Some(n),
            bins: Some(bins),
            seed: Some(seed),
            ci_halfwidth: reg.ci_halfwidth,
        },
        reg,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stable::{GaussianPair, StableParams};
    use rand::Rng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn closed_form_examples() {
        assert!((mmse_gaussian(0.8, 1.0, 0.0).unwrap().mmse - 0.36).abs() < 1e-15);
        assert_eq!(mmse_gaussian(0.0, 2.5, 1.0).unwrap().mmse, 2.5);
        assert!((mmse_gaussian(0.8, 1.0, 3f64.sqrt()).unwrap().mmse - 0.84).abs() < 1e-15);
        assert!(mmse_gaussian(1.0, 1.0, 0.0).is_err());
        assert!(mmse_gaussian(0.5, 0.0, 0.0).is_err());
        assert!(mmse_gaussian(0.5, 1.0, -1.0).is_err());
    }

    #[test]
    fn bound_examples() {
        assert_eq!(mmse_bound(0.0, 3.0).unwrap(), 3.0);
        assert_eq!(mmse_bound(1.0, 3.0).unwrap(), 0.0);
        let b = mmse_bound_gaussian(0.8, 1.0, 0.5).unwrap();
        assert!((b - 0.84).abs() < 1e-12);
        assert!((mmse_eps(0.8, 1.0, 0.5).unwrap().mmse - b).abs() < 1e-12);
        assert!(mmse_bound(1.2, 1.0).is_err());
    }

    #[test]
    fn mmse_eps_examples() {
        let r = mmse_eps(0.8, 1.0, 1.0).unwrap();
        assert_eq!(r.lambda, 0.0);
        assert!((r.mmse - 0.36).abs() < 1e-15);
        assert!(matches!(mmse_eps(0.8, 1.0, 0.0), Err(Error::EpsilonOutOfRange(..))));
        let mut prev = f64::INFINITY;
        for k in 1..=100 {
            let m = mmse_eps(0.6, 2.0, k as f64 / 100.0).unwrap().mmse;
            assert!(m <= prev && m <= 2.0);
            prev = m;
        }
        assert!((mmse_eps(0.6, 2.0, 1e-6).unwrap().mmse - 2.0).abs() < 1e-9);
    }

    #[test]
    fn monte_carlo_rejects_heavy_tails() {
        let s = GaussianPair::new(0.5, 1.0).unwrap();
        let f = StableFilterSpec::new(StableParams::symmetric(1.5).unwrap(), 1.0).unwrap();
        assert!(matches!(
            mmse_monte_carlo(&s, &f, 100_000, 64, 0, Execution::Sequential),
            Err(Error::InvalidParams(_))
        ));
        let g = StableFilterSpec::new(StableParams::standard_gaussian(), 1.0).unwrap();
        assert!(matches!(
            mmse_monte_carlo(&s, &g, 100, 64, 0, Execution::Sequential),
            Err(Error::TooFewSamples { .. })
        ));
    }

    #[test]
    fn deterministic_target_has_tiny_residual() {
        // Y = sin(X); with λ = 0 it is a smooth function of Z
        let s = |rng: &mut ChaCha8Rng| {
            let x: f64 = rand_distr::Distribution::sample(&rand_distr::StandardNormal, rng);
            (x, x.sin())
        };
        let f = StableFilterSpec::new(StableParams::standard_gaussian(), 0.0).unwrap();
        let (r, _) = mmse_monte_carlo(&s, &f, 200_000, 64, 1, Execution::default()).unwrap();
        assert!(r.mmse <= 0.01, "{}", r.mmse);
    }

    #[test]
    fn independent_target_keeps_full_variance() {
        let s = |rng: &mut ChaCha8Rng| (rng.random::<f64>(), 2.0 * rng.random::<f64>());
        // treat X as if Gaussian: only the regression matters here
        let f = StableFilterSpec::new(StableParams::standard_gaussian(), 1.0).unwrap();
        let (r, reg) = mmse_monte_carlo(&s, &f, 200_000, 64, 2, Execution::default()).unwrap();
        assert!((r.mmse - 4.0 / 12.0).abs() < 0.01);
        assert!((reg.var_y - 4.0 / 12.0).abs() < 0.01);
    }

    #[test]
    fn regression_identity_holds_exactly() {
        let s = GaussianPair::new(0.6, 2.0).unwrap();
        let f = StableFilterSpec::new(StableParams::standard_gaussian(), 0.7).unwrap();
        let (r, reg) = mmse_monte_carlo(&s, &f, 100_000, 32, 3, Execution::default()).unwrap();
        assert!((r.mmse - reg.var_y * (1.0 - reg.rho_sq)).abs() < 1e-9);
        assert!(r.ci_halfwidth > 0.0);
    }
}
