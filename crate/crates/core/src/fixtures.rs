//! Named distributions and random generators used by sweeps, the CLI and
//! the test suites.

use rand::Rng;
use rand_distr::{Distribution, Exp1};

use crate::dist::{Channel, JointDistribution};
use crate::seed::rng_for;

/// Doubly symmetric binary source: uniform X through BSC(p).
pub fn dsbs(p: f64) -> JointDistribution {
    JointDistribution::new(vec![vec![(1.0 - p) / 2.0, p / 2.0], vec![p / 2.0, (1.0 - p) / 2.0]])
        .expect("dsbs crossover must lie in (0, 1)")
}

/// Product distribution `a ⊗ b`.
pub fn independent(a: &[f64], b: &[f64]) -> JointDistribution {
    JointDistribution::new(a.iter().map(|x| b.iter().map(|y| x * y).collect()).collect())
        .expect("marginals must be positive pmfs")
}

/// `Y = X` with `X ~ p`.
pub fn identity(p: &[f64]) -> JointDistribution {
    let n = p.len();
    JointDistribution::new((0..n).map(|i| (0..n).map(|j| if i == j { p[i] } else { 0.0 }).collect()).collect())
        .expect("pmf must be positive")
}

/// `X = U1·V`, `Y = U2·V` with independent uniform signs `U1, U2` and `V`
/// uniform on `{1, 2}`. Uncorrelated, yet `X² = Y²` almost surely.
pub fn sign_product_counterexample() -> JointDistribution {
    let values = [-2.0, -1.0, 1.0, 2.0];
    let grid = values
        .iter()
        .map(|x: &f64| values.iter().map(|y: &f64| if x.abs() == y.abs() { 0.125 } else { 0.0 }).collect())
        .collect();
    JointDistribution::new(grid)
        .and_then(|d| {
            let labels: Vec<String> = values.iter().map(|v| v.to_string()).collect();
            d.with_labels(labels.clone(), labels)
        })
        .and_then(|d| d.with_values(Some(values.to_vec()), Some(values.to_vec())))
        .expect("fixture is valid")
}

/// Symmetric Dirichlet(1) vector of length `n`.
pub fn dirichlet_pmf<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
    let mut v: Vec<f64> = (0..n)
        .map(|_| {
            let e: f64 = Exp1.sample(rng);
            e.max(1e-300)
        })
        .collect();
    let s: f64 = v.iter().sum();
    v.iter_mut().for_each(|x| *x /= s);
    v
}

/// Uniform draw from the simplex of `nx × ny` joint pmfs.
pub fn random_joint_with<R: Rng + ?Sized>(nx: usize, ny: usize, rng: &mut R) -> JointDistribution {
    loop {
        let flat = dirichlet_pmf(nx * ny, rng);
        let grid = flat.chunks(ny).map(<[f64]>::to_vec).collect();
        // a row can only vanish through structural-zero clamping of
        // astronomically small draws; redraw in that case
        if let Ok(d) = JointDistribution::new(grid) {
            return d;
        }
    }
}

/// Seeded [`random_joint_with`].
pub fn random_joint(nx: usize, ny: usize, seed: u64) -> JointDistribution {
    random_joint_with(nx, ny, &mut rng_for(seed, "random_joint", 0))
}

/// Channel whose rows are independent Dirichlet(1) draws.
pub fn random_channel<R: Rng + ?Sized>(n_in: usize, n_out: usize, rng: &mut R) -> Channel {
    Channel::from_rows((0..n_in).map(|_| dirichlet_pmf(n_out, rng)).collect()).expect("dirichlet rows are stochastic")
}

/// Distributions that stress bound tightness: near-deterministic,
/// near-independent and sparse.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Adversarial {
    NearDeterministic,
    NearIndependent,
    Sparse,
}

pub fn adversarial_joint<R: Rng + ?Sized>(kind: Adversarial, nx: usize, ny: usize, rng: &mut R) -> JointDistribution {
    let px = dirichlet_pmf(nx, rng);
    let py = dirichlet_pmf(ny, rng);
    let grid: Vec<Vec<f64>> = match kind {
        Adversarial::NearDeterministic => {
            // y = x mod ny, plus a little leakage
            let eta = 1e-3 * rng.random::<f64>();
            (0..nx)
                .map(|x| {
                    (0..ny)
                        .map(|y| {
                            let hit = if y == x % ny { 1.0 - eta } else { eta / (ny - 1).max(1) as f64 };
                            px[x] * hit
                        })
                        .collect()
                })
                .collect()
        }
        Adversarial::NearIndependent => {
            let noise = random_joint_with(nx, ny, rng);
            let t = 1e-3 * rng.random::<f64>();
            (0..nx).map(|x| (0..ny).map(|y| (1.0 - t) * px[x] * py[y] + t * noise.p(x, y)).collect()).collect()
        }
        Adversarial::Sparse => {
            let mut g = vec![vec![0.0; ny]; nx];
            // one guaranteed cell per row and column, plus random extras
            for (i, row) in g.iter_mut().enumerate().take(nx.max(ny)) {
                row[i % ny] = rng.random::<f64>() + 0.1;
            }
            for j in 0..ny {
                g[j % nx][j] += rng.random::<f64>() + 0.1;
            }
            for row in g.iter_mut() {
                for v in row.iter_mut() {
                    if rng.random::<f64>() < 0.2 {
                        *v += rng.random::<f64>();
                    }
                }
            }
            let s: f64 = g.iter().flatten().sum();
            g.iter_mut().flatten().for_each(|v| *v /= s);
            g
        }
    };
    JointDistribution::new(grid).expect("adversarial fixtures have positive marginals")
}
