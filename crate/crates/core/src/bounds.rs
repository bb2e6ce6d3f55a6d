//! Inequalities linking maximal correlation to mutual information, checked
//! instance by instance and over randomized sweeps.
//!
//! Every check produces a [`BoundReport`] oriented as `lhs ≤ rhs`, so
//! `slack = rhs − lhs ≥ 0` means the bound holds.

use std::f64::consts::LN_2;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dist::{join, JointDistribution};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::fixtures::{adversarial_joint, random_channel, random_joint_with, Adversarial};
use crate::maxcorr::{backward_identity_check, rho_m};
use crate::measures::{chi_squared, mutual_information};
use crate::seed::rng_for;

/// Tolerance at which a report counts as holding.
pub const HOLD_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "type")]
pub enum BoundKind {
    /// `lhs ≤ rhs`.
    Inequality,
    /// `|lhs − rhs| ≤ tol`; slack is `tol − |lhs − rhs|`.
    Identity { tol: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub bound_name: String,
    pub kind: BoundKind,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub holds: bool,
    pub context: String,
}

impl BoundReport {
    pub fn inequality(name: &str, lhs: f64, rhs: f64, context: impl Into<String>) -> Self {
        let slack = rhs - lhs;
        BoundReport {
            bound_name: name.to_string(),
            kind: BoundKind::Inequality,
            lhs,
            rhs,
            slack,
            holds: slack >= -HOLD_TOL,
            context: context.into(),
        }
    }

    pub fn identity(name: &str, lhs: f64, rhs: f64, tol: f64, context: impl Into<String>) -> Self {
        let slack = tol - (lhs - rhs).abs();
        BoundReport {
            bound_name: name.to_string(),
            kind: BoundKind::Identity { tol },
            lhs,
            rhs,
            slack,
            holds: slack >= -HOLD_TOL,
            context: context.into(),
        }
    }
}

/// Mutual information (bits) of a bivariate Gaussian with correlation `rho`.
pub fn gaussian_mutual_information(rho: f64) -> f64 {
    -0.5 * (1.0 - rho * rho).log2()
}

/// For jointly Gaussian `(X, Y)` with correlation `rho`, where `ρ_m = |rho|`:
/// `ρ_m² ≤ 1 − 2^(−2I)` (tight) and `1 − 2^(−2I) ≤ (2 ln 2) I`.
pub fn check_gaussian_bound(rho: f64) -> Result<(BoundReport, BoundReport)> {
    if !(rho.abs() < 1.0) {
        return Err(Error::DegenerateRho(rho));
    }
    let i = gaussian_mutual_information(rho);
    let mid = 1.0 - (-2.0 * i).exp2();
    let ctx = format!("gaussian rho={rho}");
    Ok((
        BoundReport::inequality("gaussian_rho_m_sq_le_linfoot_sq", rho * rho, mid, ctx.clone()),
        BoundReport::inequality("gaussian_linfoot_sq_le_2ln2_i", mid, 2.0 * LN_2 * i, ctx),
    ))
}

/// Linfoot's informational correlation `sqrt(1 − 2^(−2I))`, `I` in bits.
pub fn linfoot(mutual_information_bits: f64) -> f64 {
    (1.0 - (-2.0 * mutual_information_bits.max(0.0)).exp2()).max(0.0).sqrt()
}

/// [`linfoot`] evaluated at `I(X;Y)` of a finite joint.
pub fn linfoot_of(dist: &JointDistribution) -> f64 {
    linfoot(mutual_information(dist))
}

fn dims(d: &JointDistribution) -> String {
    format!("{}x{}", d.nx(), d.ny())
}

/// `2^I − 1 ≤ ρ_m²` when one alphabet is binary.
pub fn check_binary_lower_bound(dist: &JointDistribution) -> Result<BoundReport> {
    if dist.nx().min(dist.ny()) != 2 {
        return Err(Error::AlphabetTooLarge { nx: dist.nx(), ny: dist.ny() });
    }
    let lhs = mutual_information(dist).exp2() - 1.0;
    Ok(BoundReport::inequality("binary_lower_bound", lhs, rho_m(dist).powi(2), dims(dist)))
}

/// `ρ_m² = χ²(P_XY ‖ P_X P_Y)` when one alphabet is binary.
pub fn check_chi_squared_identity(dist: &JointDistribution) -> Result<BoundReport> {
    if dist.nx().min(dist.ny()) != 2 {
        return Err(Error::AlphabetTooLarge { nx: dist.nx(), ny: dist.ny() });
    }
    Ok(BoundReport::identity("chi_squared_identity", rho_m(dist).powi(2), chi_squared(dist), 1e-9, dims(dist)))
}

/// `P_min ρ_m² ≤ sqrt((2 ln 2) I)`.
pub fn check_pmin_upper_bound(dist: &JointDistribution) -> BoundReport {
    let pmin = dist.x_marginal().into_iter().fold(f64::INFINITY, f64::min);
    let lhs = pmin * rho_m(dist).powi(2);
    let rhs = (2.0 * LN_2 * mutual_information(dist)).sqrt();
    BoundReport::inequality("pmin_upper_bound", lhs, rhs, dims(dist))
}

/// Result of the ratio-supremum check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioTheoremReport {
    /// Largest `ρ_m(X;Z)/ρ_m(Y;Z)` over the random filters against `ρ_m(X;Y)`.
    pub random_filters: BoundReport,
    /// `ρ_m(X;X')/ρ_m(Y;X')` for the backward-channel filter, against `ρ_m(X;Y)`.
    pub achievability: BoundReport,
    pub filters_tried: usize,
}

/// `sup ρ_m(X;Z)/ρ_m(Y;Z) = ρ_m(X;Y)` over Markov chains `X → Y → Z`:
/// random filters `P_{Z|Y}` never exceed it and the backward channel attains it.
pub fn check_ratio_theorem<R: Rng + ?Sized>(
    dist: &JointDistribution,
    n_filters: usize,
    rng: &mut R,
) -> Result<RatioTheoremReport> {
    let rxy = rho_m(dist);
    if rxy < 1e-12 {
        return Err(Error::DegenerateDependence);
    }
    let (px, w) = dist.decompose();
    let py = dist.y_marginal();
    let mut worst = f64::NEG_INFINITY;
    let mut tried = 0;
    for _ in 0..n_filters {
        let nz = rng.random_range(2..=dist.ny() + 1);
        let k = random_channel(dist.ny(), nz, rng);
        let ryz = rho_m(&join(&py, &k)?);
        // ratios of two roundoff-sized numbers carry no information
        if ryz < 1e-6 {
            continue;
        }
        let rxz = rho_m(&join(&px, &w.then(&k)?)?);
        worst = worst.max(rxz / ryz);
        tried += 1;
    }
    let ctx = dims(dist);
    let random_filters = BoundReport::inequality("ratio_random_filters", worst.max(0.0), rxy, ctx.clone());

    let back = dist.backward_channel();
    let rxx = rho_m(&join(&px, &w.then(&back)?)?);
    let ryx = rho_m(&join(&py, &back)?);
    let achievability = BoundReport::identity("ratio_achievability", rxx / ryx, rxy, 1e-8, ctx);
    Ok(RatioTheoremReport { random_filters, achievability, filters_tried: tried })
}

/// Configuration of a randomized bound sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepConfig {
    pub trials: usize,
    pub max_dims: usize,
    pub seed: u64,
    /// Random filters per trial for the ratio check.
    pub ratio_filters: usize,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig { trials: 1000, max_dims: 8, seed: 0, ratio_filters: 50 }
    }
}

/// Reports of one sweep trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialReports {
    pub trial: usize,
    pub reports: Vec<BoundReport>,
}

/// Draws the distribution of trial `i`: mostly uniform on the simplex, every
/// tenth trial an adversarial fixture, and every other trial has a binary
/// alphabet so the min-alphabet-2 results get exercised.
pub fn sweep_distribution(cfg: &SweepConfig, i: usize) -> JointDistribution {
    let mut rng = rng_for(cfg.seed, "bounds_sweep", i as u64);
    let max = cfg.max_dims.max(2);
    let (mut nx, mut ny) = (rng.random_range(2..=max), rng.random_range(2..=max));
    if i % 2 == 1 {
        if rng.random::<bool>() {
            nx = 2;
        } else {
            ny = 2;
        }
    }
    match i % 30 {
        9 => adversarial_joint(Adversarial::NearDeterministic, nx, ny, &mut rng),
        19 => adversarial_joint(Adversarial::NearIndependent, nx, ny, &mut rng),
        29 => adversarial_joint(Adversarial::Sparse, nx, ny, &mut rng),
        _ => random_joint_with(nx, ny, &mut rng),
    }
}

/// Every applicable check on one distribution.
pub fn check_all<R: Rng + ?Sized>(
    dist: &JointDistribution,
    ratio_filters: usize,
    rng: &mut R,
) -> Result<Vec<BoundReport>> {
    let mut out = Vec::new();
    if dist.nx().min(dist.ny()) == 2 {
        out.push(check_chi_squared_identity(dist)?);
        out.push(check_binary_lower_bound(dist)?);
    }
    out.push(check_pmin_upper_bound(dist));
    out.push(backward_identity_check(dist)?);
    if ratio_filters > 0 {
        match check_ratio_theorem(dist, ratio_filters, rng) {
            Ok(r) => {
                out.push(r.random_filters);
                out.push(r.achievability);
            }
            Err(Error::DegenerateDependence) => {}
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

/// Runs [`check_all`] over `cfg.trials` seeded random distributions.
pub fn sweep(cfg: &SweepConfig, exec: Execution) -> Result<Vec<TrialReports>> {
    exec.map(cfg.trials, |i| {
        let d = sweep_distribution(cfg, i);
        let mut rng = rng_for(cfg.seed, "bounds_sweep_filters", i as u64);
        check_all(&d, cfg.ratio_filters, &mut rng).map(|reports| TrialReports { trial: i, reports })
    })
    .into_iter()
    .collect()
}

/// Smallest slack per bound name, in first-seen order.
pub fn min_slack_summary(trials: &[TrialReports]) -> Vec<(String, f64, usize)> {
    let mut out: Vec<(String, f64, usize)> = Vec::new();
    for r in trials.iter().flat_map(|t| &t.reports) {
        match out.iter_mut().find(|(n, _, _)| *n == r.bound_name) {
            Some(e) => {
                e.1 = e.1.min(r.slack);
                e.2 += usize::from(!r.holds);
            }
            None => out.push((r.bound_name.clone(), r.slack, usize::from(!r.holds))),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn gaussian_examples() {
        let (a, b) = check_gaussian_bound(0.0).unwrap();
        assert_eq!((a.lhs, a.rhs, b.rhs), (0.0, 0.0, 0.0));
        assert!(a.holds && b.holds);
        let (a, b) = check_gaussian_bound(0.8).unwrap();
        assert!((gaussian_mutual_information(0.8) - 0.7370).abs() < 5e-5);
        assert!((a.lhs - 0.64).abs() < 1e-15 && a.slack.abs() < 1e-12);
        // (2 ln 2) · 0.73697 bits = ln(1/0.36)
        assert!((b.rhs - (1.0f64 / 0.36).ln()).abs() < 1e-12);
        assert!(b.holds && b.rhs >= 0.64);
        assert_eq!(check_gaussian_bound(1.0), Err(Error::DegenerateRho(1.0)));
        assert!(check_gaussian_bound(f64::NAN).is_err());
    }

    #[test]
    fn gaussian_chain_ordering_on_dense_grid() {
        for k in 0..=20_000 {
            let i = k as f64 * 1e-3;
            assert!(1.0 - (-2.0 * i).exp2() <= 2.0 * LN_2 * i + 1e-12);
        }
    }

    #[test]
    fn linfoot_examples() {
        assert_eq!(linfoot(0.0), 0.0);
        assert!((linfoot(0.5) - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
        assert!(linfoot(60.0) <= 1.0 && linfoot(1e6) <= 1.0);
        assert!((linfoot_of(&fixtures::identity(&[0.5, 0.5])) - 0.75f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn binary_lower_bound_examples() {
        let r = check_binary_lower_bound(&fixtures::independent(&[0.5, 0.5], &[0.2, 0.8])).unwrap();
        assert!(r.lhs.abs() < 1e-12 && r.rhs.abs() < 1e-12 && r.holds);
        let r = check_binary_lower_bound(&fixtures::dsbs(0.1)).unwrap();
        assert!((r.lhs - 0.4449).abs() < 1e-4 && (r.rhs - 0.64).abs() < 1e-12 && r.holds);
        assert!(matches!(
            check_binary_lower_bound(&fixtures::random_joint(3, 3, 1)),
            Err(Error::AlphabetTooLarge { nx: 3, ny: 3 })
        ));
    }

    #[test]
    fn pmin_examples() {
        let r = check_pmin_upper_bound(&fixtures::independent(&[0.5, 0.5], &[0.2, 0.8]));
        assert!(r.lhs.abs() < 1e-12 && r.rhs.abs() < 1e-6 && r.holds);
        let r = check_pmin_upper_bound(&fixtures::dsbs(0.1));
        assert!((r.lhs - 0.32).abs() < 1e-12 && (r.rhs - 0.8580).abs() < 5e-5);
    }

    #[test]
    fn ratio_theorem_on_dsbs() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let r = check_ratio_theorem(&fixtures::dsbs(0.1), 100, &mut rng).unwrap();
        assert!(r.random_filters.holds && r.achievability.holds);
        assert!((r.achievability.lhs - 0.8).abs() < 1e-12);
        assert!(matches!(
            check_ratio_theorem(&fixtures::independent(&[0.5, 0.5], &[0.5, 0.5]), 10, &mut rng),
            Err(Error::DegenerateDependence)
        ));
    }

    #[test]
    fn identity_report_orientation() {
        let r = BoundReport::identity("t", 1.0, 1.0 + 5e-9, 1e-8, "");
        assert!(r.holds && r.slack > 0.0);
        let r = BoundReport::identity("t", 1.0, 1.1, 1e-8, "");
        assert!(!r.holds);
        let r = BoundReport::inequality("t", 2.0, 1.0, "");
        assert!(!r.holds && r.slack == -1.0);
    }

    #[test]
    fn small_sweep_is_clean_and_deterministic() {
        let cfg = SweepConfig { trials: 40, max_dims: 5, seed: 3, ratio_filters: 5 };
        let a = sweep(&cfg, Execution::Sequential).unwrap();
        let b = sweep(&cfg, Execution::Parallel).unwrap();
        assert_eq!(a, b);
        for (name, slack, violations) in min_slack_summary(&a) {
            assert_eq!(violations, 0, "{name} slack {slack}");
        }
    }
}
