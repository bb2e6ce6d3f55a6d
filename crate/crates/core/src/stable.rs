//! α-stable laws and additive stable-noise privacy filters `Z = X + λN`.
//!
//! Parameters follow the characteristic function
//!
//! ```text
//! φ(t) = exp( i t c − b |t|^α (1 + i κ sgn(t) ω_α(t)) )
//! ω_α(t) = tan(πα/2)       for α ≠ 1
//!        = (2/π) log|t|    for α = 1
//! ```
//!
//! with `b > 0` a scale acting on `|t|^α`. In the common S1 convention
//! `S_α(σ, β, μ)` this is `σ = b^(1/α)`, `μ = c` and `β = −κ` for `α ≠ 1`
//! (`β = κ` for `α = 1`). In particular `α = 2` is a Gaussian with variance
//! `2b`, `α = 1, κ = 0` is Cauchy with scale `b`, and `α = ½, κ = −1` is the
//! Lévy law supported on `[c, ∞)`.

use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::Complex;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::maxcorr::{maximal_correlation_from_samples_ace, AceConfig};
use crate::seed::rng_for;

const CHUNK: usize = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StableParams {
    pub alpha: f64,
    /// `b` in `b|t|^α`.
    pub scale: f64,
    /// `κ ∈ [−1, 1]`.
    pub skew: f64,
    /// `c`.
    pub location: f64,
}

/// The same law in S1 form `(α, β, σ, μ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct S1Params {
    pub alpha: f64,
    pub beta: f64,
    pub sigma: f64,
    pub mu: f64,
}

impl StableParams {
    pub fn new(alpha: f64, scale: f64, skew: f64, location: f64) -> Result<Self> {
        let p = StableParams { alpha, scale, skew, location };
        p.validate()?;
        Ok(p)
    }

    /// Symmetric law with `b = 1`, `c = 0`.
    pub fn symmetric(alpha: f64) -> Result<Self> {
        Self::new(alpha, 1.0, 0.0, 0.0)
    }

    /// `N(0, 1)`, i.e. `α = 2, b = ½`.
    pub fn standard_gaussian() -> Self {
        StableParams { alpha: 2.0, scale: 0.5, skew: 0.0, location: 0.0 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha <= 2.0) {
            return Err(Error::InvalidParams(format!("alpha {} not in (0, 2]", self.alpha)));
        }
        if !(self.scale > 0.0 && self.scale.is_finite()) {
            return Err(Error::InvalidParams(format!("scale {} must be positive", self.scale)));
        }
        if !(-1.0..=1.0).contains(&self.skew) {
            return Err(Error::InvalidParams(format!("skew {} not in [-1, 1]", self.skew)));
        }
        if !self.location.is_finite() {
            return Err(Error::InvalidParams("location must be finite".into()));
        }
        Ok(())
    }

    pub fn to_s1(&self) -> S1Params {
        if self.alpha == 1.0 {
            S1Params { alpha: 1.0, beta: self.skew, sigma: self.scale, mu: self.location }
        } else {
            S1Params {
                alpha: self.alpha,
                beta: -self.skew,
                sigma: self.scale.powf(1.0 / self.alpha),
                mu: self.location,
            }
        }
    }

    pub fn from_s1(s: S1Params) -> Result<Self> {
        if s.alpha == 1.0 {
            Self::new(1.0, s.sigma, s.beta, s.mu)
        } else {
            Self::new(s.alpha, s.sigma.powf(s.alpha), -s.beta, s.mu)
        }
    }

    /// `φ(t)`; `φ(0) = 1` by continuity on the `α = 1` branch.
    pub fn characteristic_function(&self, t: f64) -> Complex<f64> {
        if t == 0.0 {
            return Complex::new(1.0, 0.0);
        }
        let omega = if self.alpha == 1.0 { 2.0 / PI * t.abs().ln() } else { (PI * self.alpha / 2.0).tan() };
        let a = self.scale * t.abs().powf(self.alpha);
        let exponent = Complex::new(-a, t * self.location - a * self.skew * t.signum() * omega);
        exponent.exp()
    }

    /// Variance when finite (`α = 2` only).
    pub fn variance(&self) -> Option<f64> {
        (self.alpha == 2.0).then_some(2.0 * self.scale)
    }

    /// One draw by the Chambers–Mallows–Stuck construction.
    pub fn sample_one<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let s = self.to_s1();
        if s.alpha == 2.0 {
            let z: f64 = StandardNormal.sample(rng);
            return s.mu + s.sigma * std::f64::consts::SQRT_2 * z;
        }
        let v = loop {
            let u: f64 = rng.random();
            if u > 0.0 {
                break PI * (u - 0.5);
            }
        };
        let w: f64 = Exp1.sample(rng);
        let w = w.max(f64::MIN_POSITIVE);
        if s.alpha == 1.0 {
            let h = FRAC_PI_2 + s.beta * v;
            let x = (h * v.tan() - s.beta * (FRAC_PI_2 * w * v.cos() / h).ln()) * 2.0 / PI;
            s.sigma * x + 2.0 / PI * s.beta * s.sigma * s.sigma.ln() + s.mu
        } else {
            let zeta = s.beta * (PI * s.alpha / 2.0).tan();
            let b = zeta.atan() / s.alpha;
            let scale = (1.0 + zeta * zeta).powf(1.0 / (2.0 * s.alpha));
            let x = scale * (s.alpha * (v + b)).sin() / v.cos().powf(1.0 / s.alpha)
                * ((v - s.alpha * (v + b)).cos() / w).powf((1.0 - s.alpha) / s.alpha);
            s.sigma * x + s.mu
        }
    }
}

/// `n` i.i.d. draws, split into fixed chunks with derived seeds so the
/// output is the same for every execution mode.
pub fn sample_stable_with(params: &StableParams, n: usize, seed: u64, exec: Execution) -> Result<Vec<f64>> {
    params.validate()?;
    if n == 0 {
        return Err(Error::InvalidParams("n must be at least 1".into()));
    }
    let mut out = vec![0.0; n];
    exec.for_each_chunk_mut(&mut out, CHUNK, |i, chunk| {
        let mut rng = rng_for(seed, "stable", i as u64);
        chunk.iter_mut().for_each(|v| *v = params.sample_one(&mut rng));
    });
    Ok(out)
}

pub fn sample_stable(params: &StableParams, n: usize, seed: u64) -> Result<Vec<f64>> {
    sample_stable_with(params, n, seed, Execution::default())
}

/// `ρ_m(X, X + λN)` for `X`, `N` i.i.d. α-stable: `1/sqrt(1 + λ^α)`.
pub fn rho_m_stable(alpha: f64, lambda: f64) -> Result<f64> {
    check_alpha(alpha)?;
    if !(lambda >= 0.0) || lambda.is_infinite() {
        return Err(Error::InvalidParams(format!("lambda {lambda} must be finite and >= 0")));
    }
    Ok(1.0 / (1.0 + lambda.powf(alpha)).sqrt())
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha <= 2.0 {
        Ok(())
    } else {
        Err(Error::InvalidParams(format!("alpha {alpha} not in (0, 2]")))
    }
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if epsilon.is_nan() || epsilon <= 0.0 {
        Err(Error::EpsilonOutOfRange(epsilon, "must be > 0; zero maximal correlation needs infinite noise gain"))
    } else if epsilon > 1.0 {
        Err(Error::EpsilonOutOfRange(epsilon, "must be <= 1"))
    } else {
        Ok(())
    }
}

/// Smallest gain with `ρ_m(X; X + λN) ≤ ε`: `(1/ε² − 1)^(1/α)`.
pub fn lambda_star(epsilon: f64, alpha: f64) -> Result<f64> {
    check_epsilon(epsilon)?;
    check_alpha(alpha)?;
    Ok((1.0 / (epsilon * epsilon) - 1.0).max(0.0).powf(1.0 / alpha))
}

/// Utility ceiling `ρ_m(Y; X + λ*N)` for jointly Gaussian `(X, Y)` with
/// correlation `rho_xy` and Gaussian noise: `|rho_xy| · ε`.
pub fn varrho_epsilon_gaussian(rho_xy: f64, epsilon: f64) -> Result<f64> {
    if !(rho_xy.abs() < 1.0) {
        return Err(Error::DegenerateRho(rho_xy));
    }
    check_epsilon(epsilon)?;
    let lambda = lambda_star(epsilon, 2.0)?;
    // Cov(Y, X + λN) = Cov(Y, X), Var(X + λN) = (1 + λ²) Var(X)
    Ok(rho_xy.abs() / (1.0 + lambda * lambda).sqrt())
}

/// Additive filter `Z = X + λN` where `N` shares the law of `X`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StableFilterSpec {
    pub params: StableParams,
    pub lambda: f64,
}

impl StableFilterSpec {
    pub fn new(params: StableParams, lambda: f64) -> Result<Self> {
        params.validate()?;
        if !(lambda >= 0.0) || lambda.is_infinite() {
            return Err(Error::InvalidParams(format!("lambda {lambda} must be finite and >= 0")));
        }
        Ok(StableFilterSpec { params, lambda })
    }

    /// Filter meeting `ρ_m(X;Z) ≤ ε` with the least noise.
    pub fn for_epsilon(params: StableParams, epsilon: f64) -> Result<Self> {
        Self::new(params, lambda_star(epsilon, params.alpha)?)
    }

    pub fn closed_form_rho_m(&self) -> f64 {
        1.0 / (1.0 + self.lambda.powf(self.params.alpha)).sqrt()
    }

    /// `x + λ N` with fresh noise from `seed`.
    pub fn apply(&self, x: &[f64], seed: u64, exec: Execution) -> Result<Vec<f64>> {
        let noise = sample_stable_with(&self.params, x.len().max(1), seed, exec)?;
        Ok(x.iter().zip(&noise).map(|(a, n)| a + self.lambda * n).collect())
    }
}

/// Source of paired samples `(X, Y)`.
pub trait PairSampler: Sync {
    fn sample_pair(&self, rng: &mut ChaCha8Rng) -> (f64, f64);
}

impl<F> PairSampler for F
where
    F: Fn(&mut ChaCha8Rng) -> (f64, f64) + Sync,
{
    fn sample_pair(&self, rng: &mut ChaCha8Rng) -> (f64, f64) {
        self(rng)
    }
}

/// `X ~ N(0,1)`, `Y = sqrt(var_y) (rho X + sqrt(1 − rho²) W)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianPair {
    pub rho: f64,
    pub var_y: f64,
}

impl GaussianPair {
    pub fn new(rho: f64, var_y: f64) -> Result<Self> {
        if !(rho.abs() < 1.0) {
            return Err(Error::DegenerateRho(rho));
        }
        if !(var_y > 0.0 && var_y.is_finite()) {
            return Err(Error::InvalidParams(format!("var_y {var_y} must be positive")));
        }
        Ok(GaussianPair { rho, var_y })
    }
}

impl PairSampler for GaussianPair {
    fn sample_pair(&self, rng: &mut ChaCha8Rng) -> (f64, f64) {
        let x: f64 = StandardNormal.sample(rng);
        let w: f64 = StandardNormal.sample(rng);
        let y = self.var_y.sqrt() * (self.rho * x + (1.0 - self.rho * self.rho).sqrt() * w);
        (x, y)
    }
}

/// `n` pairs from `sampler`, chunked with derived seeds.
pub fn sample_pairs<S: PairSampler + ?Sized>(
    sampler: &S,
    n: usize,
    seed: u64,
    exec: Execution,
) -> (Vec<f64>, Vec<f64>) {
    let mut pairs = vec![(0.0, 0.0); n];
    exec.for_each_chunk_mut(&mut pairs, CHUNK, |i, chunk| {
        let mut rng = rng_for(seed, "pairs", i as u64);
        chunk.iter_mut().for_each(|p| *p = sampler.sample_pair(&mut rng));
    });
    pairs.into_iter().unzip()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbePoint {
    pub lambda: f64,
    pub estimate: f64,
}

/// ACE estimates of `ρ_m(Y; X + λN)` along increasing `lambdas`, reusing
/// the same `(X, Y, N)` draws at every gain.
pub fn monotonicity_probe<S: PairSampler + ?Sized>(
    sampler: &S,
    noise: &StableParams,
    lambdas: &[f64],
    n: usize,
    seed: u64,
    ace: AceConfig,
    exec: Execution,
) -> Result<Vec<ProbePoint>> {
    if lambdas.windows(2).any(|w| !(w[0] < w[1])) || lambdas.iter().any(|l| !(*l >= 0.0)) {
        return Err(Error::InvalidParams("lambdas must be non-negative and strictly increasing".into()));
    }
    if n < 100_000 {
        return Err(Error::TooFewSamples { required: 100_000, got: n });
    }
    let (x, y) = sample_pairs(sampler, n, seed, exec);
    let nz = sample_stable_with(noise, n, crate::seed::derive_seed(seed, "probe_noise", 0), exec)?;
    let estimates = exec.map(lambdas.len(), |k| {
        let lambda = lambdas[k];
        let z: Vec<f64> = x.iter().zip(&nz).map(|(a, b)| a + lambda * b).collect();
        maximal_correlation_from_samples_ace(&y, &z, ace).map(|r| ProbePoint { lambda, estimate: r.value })
    });
    estimates.into_iter().collect()
}

/// One row of a λ sweep of `(X, X + λN)` for i.i.d. symmetric α-stable `X, N`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LambdaSweepRow {
    pub lambda: f64,
    pub closed_form: f64,
    pub ace_estimate: f64,
    pub n: usize,
    pub seed: u64,
}

pub fn lambda_sweep(
    params: &StableParams,
    lambdas: &[f64],
    n: usize,
    seed: u64,
    ace: AceConfig,
    exec: Execution,
) -> Result<Vec<LambdaSweepRow>> {
    let x = sample_stable_with(params, n, crate::seed::derive_seed(seed, "sweep_x", 0), exec)?;
    let nz = sample_stable_with(params, n, crate::seed::derive_seed(seed, "sweep_n", 0), exec)?;
    exec.map(lambdas.len(), |k| {
        let lambda = lambdas[k];
        let z: Vec<f64> = x.iter().zip(&nz).map(|(a, b)| a + lambda * b).collect();
        let est = maximal_correlation_from_samples_ace(&x, &z, ace)?;
        Ok(LambdaSweepRow {
            lambda,
            closed_form: rho_m_stable(params.alpha, lambda)?,
            ace_estimate: est.value,
            n,
            seed,
        })
    })
    .into_iter()
    .collect()
}
