//! Scalar information and correlation measures on a [`JointDistribution`].
//!
//! Entropic quantities are in bits. Total variation is the unnormalized
//! `Σ |P - Q|`, so it ranges over `[0, 2]`.

use serde::{Deserialize, Serialize};

use crate::dist::JointDistribution;
use crate::error::{Axis, Error, Result};
use crate::units::xlog2_ratio;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeasureName {
    Entropy,
    MutualInformation,
    ChiSquared,
    TotalVariationFromProduct,
    LinearCorrelation,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Measure {
    pub name: MeasureName,
    pub value: f64,
}

/// Shannon entropy of a pmf, in bits.
pub fn entropy(pmf: &[f64]) -> f64 {
    -pmf.iter().filter(|&&p| p > 0.0).map(|&p| p * p.log2()).sum::<f64>()
}

/// Binary entropy function `h2(p)`.
pub fn binary_entropy(p: f64) -> f64 {
    entropy(&[p, 1.0 - p])
}

/// `I(X;Y)` in bits, clamped at zero.
pub fn mutual_information(dist: &JointDistribution) -> f64 {
    let (px, py) = dist.marginals();
    let mut mi = 0.0;
    for (x, &mx) in px.iter().enumerate() {
        for (y, &my) in py.iter().enumerate() {
            mi += xlog2_ratio(dist.p(x, y), mx * my);
        }
    }
    mi.max(0.0)
}

/// `I` in bits of a row-major `nx × ny` grid that may contain empty rows
/// or columns (unlike a validated [`JointDistribution`]).
pub(crate) fn mutual_information_grid(p: &[f64], nx: usize, ny: usize) -> f64 {
    let mut px = vec![0.0; nx];
    let mut py = vec![0.0; ny];
    for (x, row) in p.chunks(ny).enumerate() {
        for (y, &v) in row.iter().enumerate() {
            px[x] += v;
            py[y] += v;
        }
    }
    let mut mi = 0.0;
    for (x, row) in p.chunks(ny).enumerate() {
        for (y, &v) in row.iter().enumerate() {
            mi += xlog2_ratio(v, px[x] * py[y]);
        }
    }
    mi.max(0.0)
}

/// `χ²(P_XY || P_X × P_Y) = Σ p² / (p_X p_Y) − 1`.
pub fn chi_squared(dist: &JointDistribution) -> f64 {
    let (px, py) = dist.marginals();
    let mut s = 0.0;
    for (x, &mx) in px.iter().enumerate() {
        for (y, &my) in py.iter().enumerate() {
            let p = dist.p(x, y);
            s += p * p / (mx * my);
        }
    }
    (s - 1.0).max(0.0)
}

/// `Σ |p(x,y) − p_X(x) p_Y(y)|`.
pub fn total_variation_from_product(dist: &JointDistribution) -> f64 {
    let (px, py) = dist.marginals();
    let mut s = 0.0;
    for (x, &mx) in px.iter().enumerate() {
        for (y, &my) in py.iter().enumerate() {
            s += (dist.p(x, y) - mx * my).abs();
        }
    }
    s
}

/// Entrywise `p(x,y) / (p_X(x) p_Y(y))`, zero at structural zeros.
pub fn information_density(dist: &JointDistribution) -> Vec<Vec<f64>> {
    let (px, py) = dist.marginals();
    px.iter()
        .enumerate()
        .map(|(x, &mx)| py.iter().enumerate().map(|(y, &my)| dist.p(x, y) / (mx * my)).collect())
        .collect()
}

/// Pearson correlation of the embedded variables under the joint pmf.
pub fn linear_correlation(dist: &JointDistribution) -> Result<f64> {
    let xv = dist.x_values().ok_or(Error::MissingValues(Axis::X))?;
    let yv = dist.y_values().ok_or(Error::MissingValues(Axis::Y))?;
    let (px, py) = dist.marginals();
    let mx: f64 = px.iter().zip(xv).map(|(p, v)| p * v).sum();
    let my: f64 = py.iter().zip(yv).map(|(p, v)| p * v).sum();
    let vx: f64 = px.iter().zip(xv).map(|(p, v)| p * (v - mx).powi(2)).sum();
    let vy: f64 = py.iter().zip(yv).map(|(p, v)| p * (v - my).powi(2)).sum();
    // relative threshold so that constant embeddings with roundoff count as degenerate
    let scale = |v: &[f64]| v.iter().fold(0.0f64, |a, b| a.max(b.abs())).max(1.0);
    if vx <= 1e-24 * scale(xv).powi(2) {
        return Err(Error::DegenerateVariable(Axis::X));
    }
    if vy <= 1e-24 * scale(yv).powi(2) {
        return Err(Error::DegenerateVariable(Axis::Y));
    }
    let mut cov = 0.0;
    for (x, &a) in xv.iter().enumerate() {
        for (y, &b) in yv.iter().enumerate() {
            cov += dist.p(x, y) * (a - mx) * (b - my);
        }
    }
    Ok((cov / (vx * vy).sqrt()).clamp(-1.0, 1.0))
}

/// All scalar measures that apply to `dist`.
pub fn all_measures(dist: &JointDistribution) -> Vec<Measure> {
    let mut out = vec![
        Measure { name: MeasureName::MutualInformation, value: mutual_information(dist) },
        Measure { name: MeasureName::ChiSquared, value: chi_squared(dist) },
        Measure { name: MeasureName::TotalVariationFromProduct, value: total_variation_from_product(dist) },
    ];
    if let Ok(r) = linear_correlation(dist) {
        out.push(Measure { name: MeasureName::LinearCorrelation, value: r });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use proptest::prelude::*;

    #[test]
    fn entropy_examples() {
        assert_eq!(entropy(&[0.5, 0.5]), 1.0);
        assert_eq!(entropy(&[1.0, 0.0]), 0.0);
        assert!((binary_entropy(0.1) - 0.46900).abs() < 5e-6);
    }

    #[test]
    fn independent_product_is_zero_everywhere() {
        let d = fixtures::independent(&[0.7, 0.3], &[0.4, 0.6]);
        assert!(mutual_information(&d).abs() < 1e-15);
        assert!(chi_squared(&d).abs() < 1e-14);
        assert!(total_variation_from_product(&d).abs() < 1e-15);
        for row in information_density(&d) {
            for v in row {
                assert!((v - 1.0).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn identity_fixture() {
        let d = fixtures::identity(&[0.5, 0.5]);
        assert!((mutual_information(&d) - 1.0).abs() < 1e-15);
        assert!((chi_squared(&d) - 1.0).abs() < 1e-15);
        assert!((total_variation_from_product(&d) - 1.0).abs() < 1e-15);
        assert_eq!(information_density(&d), vec![vec![2.0, 0.0], vec![0.0, 2.0]]);
    }

    #[test]
    fn dsbs_values() {
        let d = fixtures::dsbs(0.1);
        assert!((mutual_information(&d) - 0.53100).abs() < 5e-6);
        assert!((chi_squared(&d) - 0.64).abs() < 1e-14);
        assert!((total_variation_from_product(&d) - 0.8).abs() < 1e-14);
        let d = d.with_values(Some(vec![-1.0, 1.0]), Some(vec![-1.0, 1.0])).unwrap();
        assert!((linear_correlation(&d).unwrap() - 0.8).abs() < 1e-14);
    }

    #[test]
    fn correlation_errors() {
        let d = fixtures::dsbs(0.1);
        assert_eq!(linear_correlation(&d), Err(Error::MissingValues(Axis::X)));
        let d = d.with_values(Some(vec![1.0, 1.0]), Some(vec![0.0, 1.0])).unwrap();
        assert_eq!(linear_correlation(&d), Err(Error::DegenerateVariable(Axis::X)));
    }

    #[test]
    fn product_has_zero_correlation() {
        let d = fixtures::independent(&[0.2, 0.5, 0.3], &[0.6, 0.4])
            .with_values(Some(vec![1.0, 2.0, 5.0]), Some(vec![-3.0, 4.0]))
            .unwrap();
        assert!(linear_correlation(&d).unwrap().abs() < 1e-14);
    }

    fn arb_dist() -> impl Strategy<Value = JointDistribution> {
        (1usize..6, 1usize..6, any::<u64>()).prop_map(|(nx, ny, seed)| fixtures::random_joint(nx, ny, seed))
    }

    proptest! {
        #[test]
        fn dependence_measures_agree_on_zero(d in arb_dist()) {
            let i = mutual_information(&d);
            let c = chi_squared(&d);
            let tv = total_variation_from_product(&d);
            prop_assert!(i >= 0.0 && c >= 0.0 && (0.0..=2.0).contains(&tv));
            prop_assert_eq!(i < 1e-10, c < 1e-10);
            prop_assert_eq!(c < 1e-10, tv < 1e-10);
        }

        #[test]
        fn pinsker_chain(d in arb_dist()) {
            let tv = total_variation_from_product(&d);
            let i = mutual_information(&d);
            prop_assert!(tv <= (2.0 * std::f64::consts::LN_2 * i).sqrt() + 1e-12);
        }

        #[test]
        fn density_log_expectation_is_mi(d in arb_dist()) {
            let dens = information_density(&d);
            let mut s = 0.0;
            for (x, row) in dens.iter().enumerate() {
                for (y, &v) in row.iter().enumerate() {
                    let p = d.p(x, y);
                    if p > 0.0 { s += p * v.log2(); }
                }
            }
            prop_assert!((s - mutual_information(&d)).abs() < 1e-12);
        }

        #[test]
        fn correlation_is_bounded(d in arb_dist(), seed in any::<u64>()) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let xv = (0..d.nx()).map(|_| rng.random_range(-5.0..5.0)).collect();
            let yv = (0..d.ny()).map(|_| rng.random_range(-5.0..5.0)).collect();
            let d = d.with_values(Some(xv), Some(yv)).unwrap();
            if let Ok(r) = linear_correlation(&d) {
                prop_assert!(r.abs() <= 1.0);
            }
        }
    }
}
