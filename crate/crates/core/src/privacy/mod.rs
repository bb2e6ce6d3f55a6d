//! Rate-privacy functions on finite alphabets.
//!
//! `g_ε = sup { I(Y;Z) : X → Y → Z, I(X;Z) ≤ ε }` and its maximal-correlation
//! variant `ĝ_ε`, where the leakage constraint is `ρ_m(X;Z) ≤ ε`. The filter
//! `P_{Z|Y}` ranges over channels with `|Z| = |Y| + 1` outputs.
//!
//! The problem is non-convex, so every value returned here is a lower bound
//! found by multi-start local search. Each restart starts from a feasible
//! channel and repeatedly proposes mass transfers inside one row (or a
//! perturbation of all rows). A proposal that breaks the constraint is pulled
//! back onto it by mixing with a constant channel, which lowers leakage
//! monotonically. Steps shrink after repeated failures. Two structured starts
//! are always included: the erasure filter (`Z = Y` or an erasure symbol),
//! and, when the joint pmf is rank deficient, a perfectly private filter
//! built from its null space.

pub mod oracle;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bounds::BoundReport;
use crate::dist::{Channel, JointDistribution};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::fixtures::dirichlet_pmf;
use crate::linalg::singular_values;
use crate::maxcorr::rho_m_grid;
use crate::measures::{entropy, mutual_information, mutual_information_grid};
use crate::seed::rng_for;

/// Largest alphabet accepted by the solver.
pub const MAX_SOLVER_ALPHABET: usize = 6;
/// Slack allowed on the leakage constraint of a returned filter.
pub const LEAKAGE_TOL: f64 = 1e-6;
/// Tolerance absorbing solver suboptimality in curve checks.
pub const SOLVER_TOL: f64 = 2e-3;
const FEAS_TOL: f64 = 1e-10;
const MIN_STEP: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Leakage {
    /// `I(X;Z)` in bits.
    MutualInformation,
    /// `ρ_m(X;Z)`.
    MaximalCorrelation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Solved,
    /// `Z = Y` already meets the constraint.
    ConstraintVacuous,
    /// The best restart ran out of evaluations before its step size settled.
    BudgetExhausted,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SolverBudget {
    pub restarts: usize,
    /// Objective evaluations per restart.
    pub max_evals: usize,
}

impl Default for SolverBudget {
    fn default() -> Self {
        SolverBudget { restarts: 64, max_evals: 20_000 }
    }
}

/// Best filter found for one `ε`.
#[derive(Debug, Clone, PartialEq)]
pub struct PrivacyFilterSpec {
    /// `P_{Z|Y}`.
    pub filter: Channel,
    pub leakage: Leakage,
    pub epsilon: f64,
    pub achieved_leakage: f64,
    /// `I(Y;Z)` in bits.
    pub achieved_utility: f64,
    pub status: SolveStatus,
    pub restarts: usize,
    pub evaluations: usize,
}

/// Evaluates leakage and utility of filters on a fixed joint pmf.
#[derive(Debug, Clone)]
struct Problem {
    nx: usize,
    ny: usize,
    nz: usize,
    pxy: Vec<f64>,
    py: Vec<f64>,
    kind: Leakage,
}

impl Problem {
    fn new(dist: &JointDistribution, kind: Leakage) -> Self {
        Problem {
            nx: dist.nx(),
            ny: dist.ny(),
            nz: dist.ny() + 1,
            pxy: dist.as_slice().to_vec(),
            py: dist.y_marginal(),
            kind,
        }
    }

    fn leakage(&self, k: &[f64]) -> f64 {
        let (nx, ny, nz) = (self.nx, self.ny, self.nz);
        let mut pxz = vec![0.0; nx * nz];
        for x in 0..nx {
            for y in 0..ny {
                let p = self.pxy[x * ny + y];
                if p == 0.0 {
                    continue;
                }
                for z in 0..nz {
                    pxz[x * nz + z] += p * k[y * nz + z];
                }
            }
        }
        match self.kind {
            Leakage::MutualInformation => mutual_information_grid(&pxz, nx, nz),
            Leakage::MaximalCorrelation => rho_m_grid(&pxz, nx, nz),
        }
    }

    fn utility(&self, k: &[f64]) -> f64 {
        let nz = self.nz;
        let pyz: Vec<f64> = k.chunks(nz).zip(&self.py).flat_map(|(row, &p)| row.iter().map(move |v| p * v)).collect();
        mutual_information_grid(&pyz, self.ny, nz)
    }

    /// `Z = Y` with an unused extra symbol.
    fn identity_filter(&self) -> Vec<f64> {
        let mut k = vec![0.0; self.ny * self.nz];
        (0..self.ny).for_each(|y| k[y * self.nz + y] = 1.0);
        k
    }

    /// `Z = Y` with probability `t`, otherwise the last symbol.
    fn erasure_filter(&self, t: f64) -> Vec<f64> {
        let mut k = vec![0.0; self.ny * self.nz];
        for y in 0..self.ny {
            k[y * self.nz + y] = t;
            k[y * self.nz + self.nz - 1] += 1.0 - t;
        }
        k
    }

    /// Binary-output filter that is independent of X, from a null vector
    /// of the joint pmf. `None` when the pmf has full column rank.
    fn null_space_filter(&self) -> Option<Vec<f64>> {
        let (nx, ny, nz) = (self.nx, self.ny, self.nz);
        let p = DMatrix::from_row_slice(nx, ny, &self.pxy);
        let gram = p.transpose() * &p;
        let eig = SymmetricEigen::new(gram.clone());
        let (i, &lam) = eig.eigenvalues.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1))?;
        let top = eig.eigenvalues.amax();
        if lam > RANK_TOL * RANK_TOL * top {
            return None;
        }
        let u = eig.eigenvectors.column(i);
        let umax = u.amax();
        if umax == 0.0 {
            return None;
        }
        let mut k = vec![0.0; ny * nz];
        for y in 0..ny {
            let a = 0.5 + 0.5 * u[y] / umax;
            k[y * nz] = a;
            k[y * nz + 1] = 1.0 - a;
        }
        Some(k)
    }
}

/// `t k + (1 − t) e_z` row by row, where `e_z` puts all mass on symbol `z`.
fn mix_toward_symbol(k: &[f64], nz: usize, z: usize, t: f64) -> Vec<f64> {
    let mut out: Vec<f64> = k.iter().map(|v| t * v).collect();
    out.chunks_mut(nz).for_each(|row| row[z] += 1.0 - t);
    out
}

fn mix(a: &[f64], b: &[f64], t: f64) -> Vec<f64> {
    a.iter().zip(b).map(|(u, v)| (1.0 - t) * u + t * v).collect()
}

struct RestartOutcome {
    k: Vec<f64>,
    utility: f64,
    leakage: f64,
    evals: usize,
    converged: bool,
}

impl Problem {
    /// Largest `t ∈ [0, 1]` on the path `path(t)` found feasible by bisection,
    /// assuming `path(0)` is feasible.
    fn restore<F: Fn(f64) -> Vec<f64>>(&self, eps: f64, path: F, evals: &mut usize) -> (Vec<f64>, f64) {
        let (mut lo, mut hi) = (0.0, 1.0);
        let mut best = path(0.0);
        let mut best_leak = self.leakage(&best);
        *evals += 1;
        for _ in 0..30 {
            let mid = 0.5 * (lo + hi);
            let k = path(mid);
            let l = self.leakage(&k);
            *evals += 1;
            if l <= eps + FEAS_TOL {
                lo = mid;
                best = k;
                best_leak = l;
            } else {
                hi = mid;
            }
            if hi - lo < 1e-9 {
                break;
            }
        }
        (best, best_leak)
    }

    fn local_search(&self, start: Vec<f64>, eps: f64, rng: &mut ChaCha8Rng, max_evals: usize) -> RestartOutcome {
        let (ny, nz) = (self.ny, self.nz);
        let mut evals = 0;
        let mut k = start;
        let mut leak = self.leakage(&k);
        if leak > eps + FEAS_TOL {
            let z = rng.random_range(0..nz);
            let base = k.clone();
            let (kk, l) = self.restore(eps, |t| mix_toward_symbol(&base, nz, z, t), &mut evals);
            k = kk;
            leak = l;
        }
        let mut util = self.utility(&k);
        let mut step = 0.25;
        let mut fails = 0;
        let fail_limit = 6 * ny * nz;
        let mut converged = false;
        while evals < max_evals {
            let mut cand = k.clone();
            if rng.random::<f64>() < 0.75 {
                let y = rng.random_range(0..ny);
                let from = rng.random_range(0..nz);
                let to = (from + rng.random_range(1..nz)) % nz;
                let amount = (step * rng.random::<f64>()).min(cand[y * nz + from]);
                if amount <= 0.0 {
                    fails += 1;
                    continue;
                }
                cand[y * nz + from] -= amount;
                cand[y * nz + to] += amount;
            } else {
                for y in 0..ny {
                    let d = dirichlet_pmf(nz, rng);
                    for z in 0..nz {
                        let v = &mut cand[y * nz + z];
                        *v = (1.0 - step) * *v + step * d[z];
                    }
                }
            }
            let mut cand_leak = self.leakage(&cand);
            evals += 1;
            if cand_leak > eps + FEAS_TOL {
                let (kk, l) = if rng.random::<bool>() {
                    let z = rng.random_range(0..nz);
                    self.restore(eps, |t| mix_toward_symbol(&cand, nz, z, t), &mut evals)
                } else {
                    self.restore(eps, |t| mix(&k, &cand, t), &mut evals)
                };
                cand = kk;
                cand_leak = l;
            }
            let cand_util = self.utility(&cand);
            evals += 1;
            if cand_util > util + 1e-13 {
                k = cand;
                util = cand_util;
                leak = cand_leak;
                fails = 0;
            } else {
                fails += 1;
                if fails >= fail_limit {
                    step *= 0.5;
                    fails = 0;
                    if step < MIN_STEP {
                        converged = true;
                        break;
                    }
                }
            }
        }
        RestartOutcome { k, utility: util, leakage: leak, evals, converged }
    }

    fn start(&self, restart: usize, eps: f64, rng: &mut ChaCha8Rng, evals: &mut usize) -> Vec<f64> {
        match restart {
            0 => {
                let (k, _) = self.restore(eps, |t| self.erasure_filter(t), evals);
                k
            }
            1 => self.null_space_filter().unwrap_or_else(|| random_filter(self.ny, self.nz, rng)),
            _ => random_filter(self.ny, self.nz, rng),
        }
    }
}

fn random_filter(ny: usize, nz: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..ny).flat_map(|_| dirichlet_pmf(nz, rng)).collect()
}

fn filter_channel(dist: &JointDistribution, k: &[f64], nz: usize) -> Channel {
    let labels = (0..nz).map(|z| format!("z{z}")).collect();
    Channel::new(dist.y_alphabet().to_vec(), labels, k.chunks(nz).map(<[f64]>::to_vec).collect())
        .expect("solver keeps rows stochastic")
}

/// Shared driver for [`rate_privacy`] and [`rate_privacy_maxcorr`].
pub fn solve(
    dist: &JointDistribution,
    kind: Leakage,
    epsilon: f64,
    budget: SolverBudget,
    seed: u64,
    exec: Execution,
) -> Result<PrivacyFilterSpec> {
    if !(epsilon >= 0.0) {
        return Err(Error::EpsilonOutOfRange(epsilon, "leakage budget must be >= 0"));
    }
    if dist.nx() > MAX_SOLVER_ALPHABET || dist.ny() > MAX_SOLVER_ALPHABET {
        return Err(Error::InvalidParams(format!(
            "solver handles alphabets up to {MAX_SOLVER_ALPHABET}, got {}x{}",
            dist.nx(),
            dist.ny()
        )));
    }
    if budget.restarts == 0 {
        return Err(Error::InvalidParams("need at least one restart".into()));
    }
    let problem = Problem::new(dist, kind);
    let nz = problem.nz;

    let id = problem.identity_filter();
    let id_leak = problem.leakage(&id);
    if id_leak <= epsilon + FEAS_TOL {
        return Ok(PrivacyFilterSpec {
            filter: filter_channel(dist, &id, nz),
            leakage: kind,
            epsilon,
            achieved_leakage: id_leak,
            achieved_utility: problem.utility(&id),
            status: SolveStatus::ConstraintVacuous,
            restarts: 0,
            evaluations: 1,
        });
    }

    let tag = match kind {
        Leakage::MutualInformation => "rate_privacy",
        Leakage::MaximalCorrelation => "rate_privacy_maxcorr",
    };
    let outcomes = exec.map(budget.restarts, |r| {
        let mut rng = rng_for(seed, tag, r as u64);
        let mut evals = 0;
        let start = problem.start(r, epsilon, &mut rng, &mut evals);
        let mut out = problem.local_search(start, epsilon, &mut rng, budget.max_evals.saturating_sub(evals));
        out.evals += evals;
        out
    });
    let evaluations = outcomes.iter().map(|o| o.evals).sum();
    let best =
        outcomes.into_iter().reduce(|a, b| if b.utility > a.utility { b } else { a }).expect("at least one restart");
    debug_assert!(best.leakage <= epsilon + LEAKAGE_TOL);
    Ok(PrivacyFilterSpec {
        filter: filter_channel(dist, &best.k, nz),
        leakage: kind,
        epsilon,
        achieved_leakage: best.leakage,
        achieved_utility: best.utility,
        status: if best.converged { SolveStatus::Solved } else { SolveStatus::BudgetExhausted },
        restarts: budget.restarts,
        evaluations,
    })
}

/// Best filter found for `g_ε` (leakage `I(X;Z) ≤ ε`).
pub fn rate_privacy(
    dist: &JointDistribution,
    epsilon: f64,
    budget: SolverBudget,
    seed: u64,
) -> Result<PrivacyFilterSpec> {
    solve(dist, Leakage::MutualInformation, epsilon, budget, seed, Execution::default())
}

/// Best filter found for `ĝ_ε` (leakage `ρ_m(X;Z) ≤ ε`).
pub fn rate_privacy_maxcorr(
    dist: &JointDistribution,
    epsilon: f64,
    budget: SolverBudget,
    seed: u64,
) -> Result<PrivacyFilterSpec> {
    solve(dist, Leakage::MaximalCorrelation, epsilon, budget, seed, Execution::default())
}

/// Relative singular-value threshold for numerical rank.
pub const RANK_TOL: f64 = 1e-10;

/// Whether the vectors `P_{X|Y}(·|y)` are linearly dependent, which is
/// exactly when some filter has zero leakage and positive utility.
pub fn perfect_privacy_test(dist: &JointDistribution) -> bool {
    let (nx, ny) = (dist.nx(), dist.ny());
    if ny > nx {
        return true;
    }
    let back = dist.backward_channel();
    // columns are P_{X|Y}(·|y), i.e. rows of the backward channel
    let m = DMatrix::from_fn(nx, ny, |x, y| back.w(y, x));
    let sv = singular_values(&m);
    let top = sv[0];
    let rank = sv.iter().filter(|&&s| s > RANK_TOL * top).count();
    rank < ny
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverMeta {
    pub restarts: usize,
    pub evaluations: usize,
    /// `value − oracle value` per grid point, when an oracle was run.
    pub oracle_gap: Vec<Option<f64>>,
}

/// `g_ε` (or `ĝ_ε`) over an increasing grid of `ε`.
#[derive(Debug, Clone, PartialEq)]
pub struct PrivacyCurve {
    pub leakage: Leakage,
    pub epsilons: Vec<f64>,
    /// Running maximum of the raw solver values.
    pub values: Vec<f64>,
    pub raw_values: Vec<f64>,
    pub filters: Vec<PrivacyFilterSpec>,
    pub solver_meta: SolverMeta,
    /// `H(Y)` in bits.
    pub h_y: f64,
    /// `I(X;Y)` in bits.
    pub mutual_information: f64,
}

impl PrivacyCurve {
    /// A raw value fell more than [`SOLVER_TOL`] below an earlier one.
    pub fn raw_monotonicity_violated(&self) -> bool {
        self.raw_values.iter().zip(&self.values).any(|(r, v)| v - r > SOLVER_TOL)
    }

    pub fn budget_exhausted(&self) -> bool {
        self.filters.iter().any(|f| f.status == SolveStatus::BudgetExhausted)
    }
}

pub fn privacy_curve(
    dist: &JointDistribution,
    kind: Leakage,
    epsilons: &[f64],
    budget: SolverBudget,
    seed: u64,
    exec: Execution,
) -> Result<PrivacyCurve> {
    if epsilons.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::InvalidParams("epsilon grid must be strictly increasing".into()));
    }
    let filters = epsilons
        .iter()
        .enumerate()
        .map(|(i, &e)| solve(dist, kind, e, budget, crate::seed::derive_seed(seed, "curve", i as u64), exec))
        .collect::<Result<Vec<_>>>()?;
    let raw_values: Vec<f64> = filters.iter().map(|f| f.achieved_utility).collect();
    let mut values = raw_values.clone();
    for i in 1..values.len() {
        values[i] = values[i].max(values[i - 1]);
    }
    Ok(PrivacyCurve {
        leakage: kind,
        epsilons: epsilons.to_vec(),
        values,
        raw_values,
        solver_meta: SolverMeta {
            restarts: budget.restarts,
            evaluations: filters.iter().map(|f| f.evaluations).sum(),
            oracle_gap: vec![None; epsilons.len()],
        },
        filters,
        h_y: entropy(&dist.y_marginal()),
        mutual_information: mutual_information(dist),
    })
}

/// Checks that `g_ε/ε` is non-increasing along the curve and that
/// `g_ε ≥ ε H(Y)/I(X;Y)` for `ε ≤ I(X;Y)`, both up to [`SOLVER_TOL`].
/// Returns `(ratio report, lower-bound report)`, each for the worst point.
pub fn curve_bound_checks(curve: &PrivacyCurve) -> (BoundReport, BoundReport) {
    let pts: Vec<(f64, f64)> =
        curve.epsilons.iter().zip(&curve.values).filter(|(e, _)| **e > 0.0).map(|(&e, &v)| (e, v)).collect();
    let mut ratio = BoundReport::inequality("ratio_non_increasing", 0.0, 0.0, "vacuous");
    for w in pts.windows(2) {
        let (e0, g0) = w[0];
        let (e1, g1) = w[1];
        let r =
            BoundReport::inequality("ratio_non_increasing", g1 / e1 - SOLVER_TOL, g0 / e0, format!("eps {e0} -> {e1}"));
        if ratio.context == "vacuous" || r.slack < ratio.slack {
            ratio = r;
        }
    }
    let mut lower = BoundReport::inequality("linear_lower_bound", 0.0, 0.0, "vacuous");
    if curve.mutual_information > 0.0 {
        for &(e, g) in pts.iter().filter(|(e, _)| *e <= curve.mutual_information) {
            let r = BoundReport::inequality(
                "linear_lower_bound",
                e * curve.h_y / curve.mutual_information - SOLVER_TOL,
                g,
                format!("eps {e}"),
            );
            if lower.context == "vacuous" || r.slack < lower.slack {
                lower = r;
            }
        }
    }
    (ratio, lower)
}
