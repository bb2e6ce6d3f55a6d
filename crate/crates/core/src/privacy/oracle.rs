//! Brute-force reference for the rate-privacy solver.
//!
//! Enumerates every filter whose rows lie on the lattice `{k/units}` of the
//! probability simplex and keeps the best feasible one. Leakage is evaluated
//! without the spectral code: for binary X, `ρ_m(X;Z)² = χ²(X;Z)`.

use crate::dist::JointDistribution;
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::maxcorr::rho_m_grid;
use crate::measures::mutual_information_grid;

use super::Leakage;

/// Best lattice filter.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    pub utility: f64,
    pub leakage: f64,
    /// Row-major `|Y| × |Z|`.
    pub filter: Vec<f64>,
    pub candidates: usize,
}

/// All compositions of `units` into `parts` non-negative integers.
fn compositions(units: usize, parts: usize) -> Vec<Vec<usize>> {
    if parts == 1 {
        return vec![vec![units]];
    }
    (0..=units)
        .flat_map(|first| {
            compositions(units - first, parts - 1).into_iter().map(move |mut rest| {
                rest.insert(0, first);
                rest
            })
        })
        .collect()
}

fn chi_squared_grid(p: &[f64], nx: usize, nz: usize) -> f64 {
    let mut px = vec![0.0; nx];
    let mut pz = vec![0.0; nz];
    for (x, row) in p.chunks(nz).enumerate() {
        for (z, &v) in row.iter().enumerate() {
            px[x] += v;
            pz[z] += v;
        }
    }
    let mut s = 0.0;
    for (x, row) in p.chunks(nz).enumerate() {
        for (z, &v) in row.iter().enumerate() {
            if v > 0.0 {
                s += v * v / (px[x] * pz[z]);
            }
        }
    }
    (s - 1.0).max(0.0)
}

/// Exhaustive search over filters with `nz` outputs quantized to `1/units`.
///
/// The number of candidates is `C(units + nz − 1, nz − 1)^|Y|`; keep it
/// below a few million.
pub fn quantized_oracle(
    dist: &JointDistribution,
    kind: Leakage,
    epsilon: f64,
    nz: usize,
    units: usize,
    exec: Execution,
) -> Result<OracleResult> {
    let (nx, ny) = (dist.nx(), dist.ny());
    if nz < 2 || units == 0 {
        return Err(Error::InvalidParams("oracle needs nz >= 2 and units >= 1".into()));
    }
    let rows: Vec<Vec<f64>> =
        compositions(units, nz).into_iter().map(|c| c.into_iter().map(|k| k as f64 / units as f64).collect()).collect();
    let total = (rows.len() as f64).powi(ny as i32);
    if total > 5e7 {
        return Err(Error::InvalidParams(format!("oracle grid too large: {total:.0} candidates")));
    }
    let pxy = dist.as_slice();
    let py = dist.y_marginal();
    let n_rows = rows.len();

    // split on the filter row for y = 0, enumerate the rest as a mixed-radix counter
    let per_first = exec.map(n_rows, |first| {
        let mut idx = vec![0usize; ny];
        idx[0] = first;
        let mut best: Option<(f64, f64, Vec<usize>)> = None;
        let mut pxz = vec![0.0; nx * nz];
        let mut pyz = vec![0.0; ny * nz];
        loop {
            pxz.iter_mut().for_each(|v| *v = 0.0);
            for y in 0..ny {
                let row = &rows[idx[y]];
                for z in 0..nz {
                    pyz[y * nz + z] = py[y] * row[z];
                }
                for x in 0..nx {
                    let p = pxy[x * ny + y];
                    for z in 0..nz {
                        pxz[x * nz + z] += p * row[z];
                    }
                }
            }
            let leak = match kind {
                Leakage::MutualInformation => mutual_information_grid(&pxz, nx, nz),
                Leakage::MaximalCorrelation if nx == 2 => chi_squared_grid(&pxz, nx, nz).sqrt(),
                Leakage::MaximalCorrelation => rho_m_grid(&pxz, nx, nz),
            };
            if leak <= epsilon + 1e-12 {
                let util = mutual_information_grid(&pyz, ny, nz);
                if best.as_ref().is_none_or(|b| util > b.0) {
                    best = Some((util, leak, idx.clone()));
                }
            }
            // advance positions 1..ny
            let mut pos = 1;
            while pos < ny {
                idx[pos] += 1;
                if idx[pos] < n_rows {
                    break;
                }
                idx[pos] = 0;
                pos += 1;
            }
            if pos == ny {
                break;
            }
        }
        best
    });
    let (utility, leakage, idx) = per_first
        .into_iter()
        .flatten()
        .reduce(|a, b| if b.0 > a.0 { b } else { a })
        .expect("constant filters are always feasible");
    Ok(OracleResult {
        utility,
        leakage,
        filter: idx.iter().flat_map(|&i| rows[i].clone()).collect(),
        candidates: total as usize,
    })
}
