//! Rényi maximal correlation.
//!
//! For a finite joint pmf, `ρ_m(X;Y)` is the second largest singular value of
//! `Q[x][y] = p(x,y) / sqrt(p_X(x) p_Y(y))`. The top singular pair is always
//! `(1, sqrt(p_X), sqrt(p_Y))`; it is subtracted before the decomposition so numerical
//! ties with it can never be reported.
//!
//! Three routes are provided:
//! - [`maximal_correlation_spectral`]: dense decomposition of the deflated Q matrix.
//! - [`maximal_correlation_power`]: alternating conditional expectations
//!   (ACE), i.e. power iteration on the conditional expectation operator and
//!   its adjoint.
//! - [`maximal_correlation_from_samples_ace`]: ACE on a quantile-binned
//!   empirical joint built from paired samples.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bounds::BoundReport;
use crate::dist::{join, JointDistribution, RawJoint};
use crate::error::{Error, Result};
use crate::linalg::top_singular_triplet;

/// Largest alphabet handled by the dense decomposition in [`maximal_correlation`].
pub const DENSE_SVD_LIMIT: usize = 64;
pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_ITER: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Spectral,
    PowerIteration,
    ClosedForm,
    AceSample,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaxCorrResult {
    pub value: f64,
    pub method: Method,
    pub iterations: usize,
    pub residual: f64,
    /// Maximizing `g(X)`: zero mean, unit second moment under `P_X`.
    pub optimal_g: Option<Vec<f64>>,
    /// Maximizing `f(Y)`: zero mean, unit second moment under `P_Y`.
    pub optimal_f: Option<Vec<f64>>,
}

/// Spectral for alphabets up to [`DENSE_SVD_LIMIT`], power iteration beyond.
pub fn maximal_correlation(dist: &JointDistribution) -> Result<MaxCorrResult> {
    if dist.nx().max(dist.ny()) <= DENSE_SVD_LIMIT {
        Ok(maximal_correlation_spectral(dist))
    } else {
        maximal_correlation_power(dist, DEFAULT_TOL, DEFAULT_MAX_ITER)
    }
}

/// Convenience: just the value of [`maximal_correlation_spectral`].
pub fn rho_m(dist: &JointDistribution) -> f64 {
    maximal_correlation_spectral(dist).value
}

/// Second singular value of the Q matrix, from a dense eigensolver.
pub fn maximal_correlation_spectral(dist: &JointDistribution) -> MaxCorrResult {
    let (nx, ny) = (dist.nx(), dist.ny());
    let (px, py) = dist.marginals();
    let sx: Vec<f64> = px.iter().map(|p| p.sqrt()).collect();
    let sy: Vec<f64> = py.iter().map(|p| p.sqrt()).collect();
    if nx < 2 || ny < 2 {
        return MaxCorrResult {
            value: 0.0,
            method: Method::Spectral,
            iterations: 0,
            residual: 0.0,
            optimal_g: None,
            optimal_f: None,
        };
    }
    let qd = DMatrix::from_fn(nx, ny, |x, y| dist.p(x, y) / (sx[x] * sy[y]) - sx[x] * sy[y]);
    let (sigma, u, v) = top_singular_triplet(&qd);
    let residual = (qd.transpose() * &u - &v * sigma).amax();

    let g: Vec<f64> = (0..nx).map(|x| u[x] / sx[x]).collect();
    let f: Vec<f64> = (0..ny).map(|y| v[y] / sy[y]).collect();
    MaxCorrResult {
        value: sigma.clamp(0.0, 1.0),
        method: Method::Spectral,
        iterations: 1,
        residual,
        optimal_g: standardize(g, &px),
        optimal_f: standardize(f, &py),
    }
}

/// Second singular value of the Q matrix of a row-major `nx × ny` grid
/// that may contain empty rows or columns; those symbols are ignored.
pub(crate) fn rho_m_grid(p: &[f64], nx: usize, ny: usize) -> f64 {
    let mut px = vec![0.0; nx];
    let mut py = vec![0.0; ny];
    for (x, row) in p.chunks(ny).enumerate() {
        for (y, &v) in row.iter().enumerate() {
            px[x] += v;
            py[y] += v;
        }
    }
    let xs: Vec<usize> = (0..nx).filter(|&x| px[x] > 0.0).collect();
    let ys: Vec<usize> = (0..ny).filter(|&y| py[y] > 0.0).collect();
    if xs.len() < 2 || ys.len() < 2 {
        return 0.0;
    }
    let q = DMatrix::from_fn(xs.len(), ys.len(), |i, j| {
        let (x, y) = (xs[i], ys[j]);
        let s = (px[x] * py[y]).sqrt();
        p[x * ny + y] / s - s
    });
    top_singular_triplet(&q).0.clamp(0.0, 1.0)
}

/// Centers and scales `v` to unit second moment under `w`; `None` if it is
/// constant.
fn standardize(mut v: Vec<f64>, w: &[f64]) -> Option<Vec<f64>> {
    center(&mut v, w);
    let n = norm(&v, w);
    if n < 1e-13 {
        return None;
    }
    v.iter_mut().for_each(|a| *a /= n);
    Some(v)
}

fn center(v: &mut [f64], w: &[f64]) {
    let m: f64 = v.iter().zip(w).map(|(a, b)| a * b).sum();
    v.iter_mut().for_each(|a| *a -= m);
}

fn norm(v: &[f64], w: &[f64]) -> f64 {
    v.iter().zip(w).map(|(a, b)| a * a * b).sum::<f64>().sqrt()
}

/// ACE on the exact pmf: `g ← E[f(Y)|X]`, `f ← E[g(X)|Y]`, each centered and
/// normalized, until the sup-norm change in `g` drops below `tol`.
pub fn maximal_correlation_power(dist: &JointDistribution, tol: f64, max_iter: usize) -> Result<MaxCorrResult> {
    let (nx, ny) = (dist.nx(), dist.ny());
    let (px, py) = dist.marginals();
    let zero = |iterations| MaxCorrResult {
        value: 0.0,
        method: Method::PowerIteration,
        iterations,
        residual: 0.0,
        optimal_g: None,
        optimal_f: None,
    };
    if nx < 2 || ny < 2 {
        return Ok(zero(0));
    }

    // fixed start so the routine is deterministic
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut f: Vec<f64> = (0..ny).map(|_| rng.random_range(-1.0..1.0)).collect();
    center(&mut f, &py);
    let nf = norm(&f, &py);
    f.iter_mut().for_each(|a| *a /= nf);

    let mut g = vec![0.0; nx];
    let mut g_prev: Option<Vec<f64>> = None;
    let mut residual = f64::INFINITY;
    let mut value = 0.0;
    for it in 1..=max_iter {
        for (x, gx) in g.iter_mut().enumerate() {
            *gx = dist.row(x).iter().zip(&f).map(|(p, fy)| p * fy).sum::<f64>() / px[x];
        }
        center(&mut g, &px);
        let ng = norm(&g, &px);
        if ng < 1e-13 {
            return Ok(zero(it));
        }
        g.iter_mut().for_each(|a| *a /= ng);

        f.iter_mut().for_each(|a| *a = 0.0);
        for (x, &gx) in g.iter().enumerate() {
            f.iter_mut().zip(dist.row(x)).for_each(|(fy, p)| *fy += p * gx);
        }
        f.iter_mut().zip(&py).for_each(|(fy, m)| *fy /= m);
        center(&mut f, &py);
        let nf = norm(&f, &py);
        if nf < 1e-13 {
            return Ok(zero(it));
        }
        f.iter_mut().for_each(|a| *a /= nf);

        value = (0..nx).map(|x| g[x] * dist.row(x).iter().zip(&f).map(|(p, fy)| p * fy).sum::<f64>()).sum::<f64>();
        residual = g_prev
            .as_ref()
            .map_or(f64::INFINITY, |prev| g.iter().zip(prev).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max));
        if residual < tol {
            return Ok(MaxCorrResult {
                value: value.clamp(0.0, 1.0),
                method: Method::PowerIteration,
                iterations: it,
                residual,
                optimal_g: Some(g),
                optimal_f: Some(f),
            });
        }
        g_prev = Some(g.clone());
    }
    Err(Error::NotConverged { iterations: max_iter, residual, value: value.clamp(0.0, 1.0) })
}

/// Settings for the sample-based estimator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AceConfig {
    pub bins: usize,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for AceConfig {
    fn default() -> Self {
        AceConfig { bins: 24, tol: 1e-9, max_iter: DEFAULT_MAX_ITER }
    }
}

impl AceConfig {
    pub fn with_bins(bins: usize) -> Self {
        AceConfig { bins, ..Self::default() }
    }
}

/// Equal-mass bin index of each value. Tied values always share a bin, and
/// bins left empty by ties are dropped. Returns the indices and the number
/// of bins actually used.
pub fn quantile_bins(values: &[f64], bins: usize) -> (Vec<usize>, usize) {
    let n = values.len();
    if n == 0 {
        return (Vec::new(), 0);
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut cuts: Vec<f64> = (1..bins).map(|k| sorted[k * n / bins]).collect();
    cuts.dedup();
    let raw: Vec<usize> = values.iter().map(|v| cuts.partition_point(|c| c <= v)).collect();
    compact(raw, cuts.len() + 1)
}

fn compact(raw: Vec<usize>, n_raw: usize) -> (Vec<usize>, usize) {
    let mut used = vec![false; n_raw];
    raw.iter().for_each(|&b| used[b] = true);
    let mut map = vec![usize::MAX; n_raw];
    let mut k = 0;
    for (b, &u) in used.iter().enumerate() {
        if u {
            map[b] = k;
            k += 1;
        }
    }
    (raw.into_iter().map(|b| map[b]).collect(), k)
}

/// Empirical joint of two index sequences.
pub fn empirical_joint(xb: &[usize], nbx: usize, yb: &[usize], nby: usize) -> Result<JointDistribution> {
    if xb.len() != yb.len() {
        return Err(Error::LengthMismatch(xb.len(), yb.len()));
    }
    let mut counts = vec![vec![0.0; nby]; nbx];
    for (&a, &b) in xb.iter().zip(yb) {
        counts[a][b] += 1.0;
    }
    let n = xb.len() as f64;
    counts.iter_mut().flatten().for_each(|c| *c /= n);
    crate::dist::validate(RawJoint::from_grid(counts).drop_empty_symbols())
}

/// ACE estimate of `ρ_m` from paired real samples, using equal-mass binning
/// on each coordinate.
pub fn maximal_correlation_from_samples_ace(x: &[f64], y: &[f64], cfg: AceConfig) -> Result<MaxCorrResult> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch(x.len(), y.len()));
    }
    if cfg.bins < 2 {
        return Err(Error::InvalidParams("ACE needs at least 2 bins".into()));
    }
    let required = 10 * cfg.bins * cfg.bins;
    if x.len() < required {
        return Err(Error::TooFewSamples { required, got: x.len() });
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::InvalidParams("samples must be finite".into()));
    }
    let (xb, nbx) = quantile_bins(x, cfg.bins);
    let (yb, nby) = quantile_bins(y, cfg.bins);
    ace_on_bins(&xb, nbx, &yb, nby, cfg)
}

/// ACE estimate from categorical samples; each distinct label is one symbol.
pub fn maximal_correlation_from_labels<A: Ord, B: Ord>(
    x: &[A],
    y: &[B],
    tol: f64,
    max_iter: usize,
) -> Result<MaxCorrResult> {
    fn index<T: Ord>(v: &[T]) -> (Vec<usize>, usize) {
        let mut ids = BTreeMap::new();
        for t in v {
            let k = ids.len();
            ids.entry(t).or_insert(k);
        }
        (v.iter().map(|t| ids[t]).collect(), ids.len())
    }
    if x.len() != y.len() {
        return Err(Error::LengthMismatch(x.len(), y.len()));
    }
    let (xb, nbx) = index(x);
    let (yb, nby) = index(y);
    let required = 10 * nbx * nby;
    if x.len() < required {
        return Err(Error::TooFewSamples { required, got: x.len() });
    }
    ace_on_bins(&xb, nbx, &yb, nby, AceConfig { bins: nbx.max(nby), tol, max_iter })
}

fn ace_on_bins(xb: &[usize], nbx: usize, yb: &[usize], nby: usize, cfg: AceConfig) -> Result<MaxCorrResult> {
    let joint = empirical_joint(xb, nbx, yb, nby)?;
    let mut r = maximal_correlation_power(&joint, cfg.tol, cfg.max_iter)?;
    r.method = Method::AceSample;
    Ok(r)
}

/// Checks `ρ_m²(P;W) = ρ_m(P; W̃∘W)`, where `W̃` is the backward channel:
/// the pair `(X, X')` obtained by going forward to Y and back.
pub fn backward_identity_check(dist: &JointDistribution) -> Result<BoundReport> {
    let lhs = rho_m(dist).powi(2);
    let (p, w) = dist.decompose();
    let round_trip = w.then(&dist.backward_channel())?;
    let rhs = rho_m(&join(&p, &round_trip)?);
    Ok(BoundReport::identity("backward_channel_identity", lhs, rhs, 1e-9, format!("{}x{}", dist.nx(), dist.ny())))
}
