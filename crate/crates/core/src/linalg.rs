//! Small dense helpers for complex Hermitian problems, solved through the real
//! symmetric embedding `[[A, -B], [B, A]]` of `A + iB`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

pub fn real_embedding(m: &DMatrix<Complex64>) -> DMatrix<f64> {
    let d = m.nrows();
    let mut big = DMatrix::<f64>::zeros(2 * d, 2 * d);
    for i in 0..d {
        for j in 0..d {
            let z = m[(i, j)];
            big[(i, j)] = z.re;
            big[(i + d, j + d)] = z.re;
            big[(i, j + d)] = -z.im;
            big[(i + d, j)] = z.im;
        }
    }
    big
}

/// Sorted eigenvalues of a Hermitian matrix.
pub fn hermitian_eigenvalues(m: &DMatrix<Complex64>) -> Vec<f64> {
    let mut ev: Vec<f64> = SymmetricEigen::new(real_embedding(m)).eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev.into_iter().step_by(2).collect()
}

/// `exp(A)` for anti-Hermitian `A`, via `exp(-iH)` with `H = iA`.
///
/// Every eigenvector of `H` appears twice in the embedding (as `v` and `iv`)
/// and both carry the same projector, hence the factor one half.
pub fn expm_anti_hermitian(a: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let d = a.nrows();
    let h = a.map(|z| z * Complex64::new(0.0, 1.0));
    let eig = SymmetricEigen::new(real_embedding(&h));
    let mut out = DMatrix::<Complex64>::zeros(d, d);
    for k in 0..2 * d {
        let col = eig.eigenvectors.column(k);
        let v = DVector::<Complex64>::from_fn(d, |i, _| Complex64::new(col[i], col[i + d]));
        out += &v * v.adjoint() * Complex64::new(0.0, -eig.eigenvalues[k]).exp();
    }
    out * Complex64::new(0.5, 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn taylor_expm(a: &DMatrix<Complex64>) -> DMatrix<Complex64> {
        let d = a.nrows();
        let mut term = DMatrix::<Complex64>::identity(d, d);
        let mut sum = term.clone();
        for k in 1..60 {
            term = &term * a / Complex64::new(k as f64, 0.0);
            sum += &term;
        }
        sum
    }

    #[test]
    fn exponential_matches_taylor_series() {
        let a = DMatrix::from_row_slice(
            3,
            3,
            &[
                Complex64::new(0.0, 0.3),
                Complex64::new(0.4, 0.1),
                Complex64::new(-0.2, 0.5),
                Complex64::new(-0.4, 0.1),
                Complex64::new(0.0, -0.7),
                Complex64::new(0.3, 0.0),
                Complex64::new(0.2, 0.5),
                Complex64::new(-0.3, 0.0),
                Complex64::new(0.0, 0.3),
            ],
        );
        let diff = (expm_anti_hermitian(&a) - taylor_expm(&a)).iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(diff < 1e-12);
    }

    #[test]
    fn degenerate_spectrum() {
        // a multiple of the identity exercises fully degenerate eigenspaces
        let a = DMatrix::<Complex64>::identity(4, 4) * Complex64::new(0.0, 0.8);
        let diff = (expm_anti_hermitian(&a) - taylor_expm(&a)).iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(diff < 1e-12);
        let ev = hermitian_eigenvalues(&DMatrix::<Complex64>::identity(3, 3));
        assert_eq!(ev.len(), 3);
    }
}
