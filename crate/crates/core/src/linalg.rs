//! Singular values through the symmetric eigenproblem.
//!
//! The eigenvalues of `[[0, A], [Aᵀ, 0]]` are `±σᵢ` plus `|m − n|` zeros, and
//! the eigenvector for `σ` is `(u, v) / √2`. This keeps full absolute
//! accuracy on small singular values, unlike eigenvalues of `AᵀA`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

fn augmented(a: &DMatrix<f64>) -> DMatrix<f64> {
    let (m, n) = a.shape();
    let mut h = DMatrix::zeros(m + n, m + n);
    h.view_mut((0, m), (m, n)).copy_from(a);
    h.view_mut((m, 0), (n, m)).copy_from(&a.transpose());
    h
}

/// Largest singular value with unit left and right singular vectors.
pub(crate) fn top_singular_triplet(a: &DMatrix<f64>) -> (f64, DVector<f64>, DVector<f64>) {
    let (m, n) = a.shape();
    let eig = SymmetricEigen::new(augmented(a));
    let k = eig.eigenvalues.imax();
    let w = eig.eigenvectors.column(k);
    let mut u = w.rows(0, m).into_owned();
    let mut v = w.rows(m, n).into_owned();
    let (nu, nv) = (u.norm(), v.norm());
    if nu > 0.0 {
        u /= nu;
    }
    if nv > 0.0 {
        v /= nv;
    }
    (eig.eigenvalues[k].max(0.0), u, v)
}

/// All `min(m, n)` singular values in decreasing order.
pub(crate) fn singular_values(a: &DMatrix<f64>) -> Vec<f64> {
    let (m, n) = a.shape();
    let mut ev: Vec<f64> = SymmetricEigen::new(augmented(a)).eigenvalues.iter().copied().collect();
    ev.sort_by(|x, y| y.total_cmp(x));
    ev.truncate(m.min(n));
    ev.iter_mut().for_each(|s| *s = s.max(0.0));
    ev
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_and_rank_one() {
        let a = DMatrix::from_row_slice(2, 3, &[3.0, 0.0, 0.0, 0.0, -2.0, 0.0]);
        assert_eq!(singular_values(&a).len(), 2);
        let s = singular_values(&a);
        assert!((s[0] - 3.0).abs() < 1e-14 && (s[1] - 2.0).abs() < 1e-14);
        let b = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 4.0]);
        let s = singular_values(&b);
        assert!((s[0] - 5.0).abs() < 1e-13 && s[1] < 1e-14);
    }

    #[test]
    fn triplet_satisfies_definition() {
        let a = DMatrix::from_row_slice(3, 2, &[0.3, -0.1, 0.2, 0.5, -0.4, 0.05]);
        let (s, u, v) = top_singular_triplet(&a);
        assert!((&a * &v - &u * s).amax() < 1e-13);
        assert!((a.transpose() * &u - &v * s).amax() < 1e-13);
        // Frobenius norm squared equals the sum of squared singular values
        let sv = singular_values(&a);
        assert!((sv.iter().map(|x| x * x).sum::<f64>() - a.norm_squared()).abs() < 1e-14);
        assert!((sv[0] - s).abs() < 1e-14);
    }
}
