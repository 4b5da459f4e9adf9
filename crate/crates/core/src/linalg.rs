//! Dense Hermitian helpers shared by the Fock-space modules.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64 as C64;

/// Eigenvalues below `PINV_CUTOFF * max_eigenvalue` are treated as zero.
pub const PINV_CUTOFF: f64 = 1e-12;

pub fn hermitian_part(m: &DMatrix<C64>) -> DMatrix<C64> {
    (m + m.adjoint()) * C64::new(0.5, 0.0)
}

/// Eigen-decomposition of the Hermitian part of `m`.
pub fn hermitian_eigen(m: &DMatrix<C64>) -> (Vec<f64>, DMatrix<C64>) {
    if m.nrows() == 0 {
        return (Vec::new(), DMatrix::zeros(0, 0));
    }
    let eig = SymmetricEigen::new(hermitian_part(m));
    (eig.eigenvalues.iter().copied().collect(), eig.eigenvectors)
}

pub fn min_eigenvalue(m: &DMatrix<C64>) -> f64 {
    hermitian_eigen(m).0.into_iter().fold(f64::INFINITY, f64::min)
}

pub fn max_eigenvalue(m: &DMatrix<C64>) -> f64 {
    hermitian_eigen(m).0.into_iter().fold(f64::NEG_INFINITY, f64::max)
}

/// Columns spanning the numerical range of the PSD matrix `g`, scaled by
/// `lambda^{-1/2}`, so that `W^H g W = I`.
pub fn whitening(g: &DMatrix<C64>) -> DMatrix<C64> {
    let (vals, vecs) = hermitian_eigen(g);
    let top = vals.iter().copied().fold(0.0, f64::max);
    let keep: Vec<usize> = (0..vals.len())
        .filter(|&i| vals[i] > PINV_CUTOFF * top.max(f64::MIN_POSITIVE))
        .collect();
    let mut w = DMatrix::zeros(g.nrows(), keep.len());
    for (c, &i) in keep.iter().enumerate() {
        let s = C64::new(1.0 / vals[i].sqrt(), 0.0);
        w.set_column(c, &(vecs.column(i) * s));
    }
    w
}

/// Norm of `t : (V_in, g_in) -> (V_out, g_out)`: the square root of the top
/// eigenvalue of `t^H g_out t v = lambda g_in v`, solved on the range of `g_in`.
pub fn operator_norm(t: &DMatrix<C64>, g_in: &DMatrix<C64>, g_out: &DMatrix<C64>) -> f64 {
    let w = whitening(g_in);
    if w.ncols() == 0 {
        return 0.0;
    }
    let tw = t * &w;
    let b = tw.adjoint() * g_out * &tw;
    max_eigenvalue(&b).max(0.0).sqrt()
}

pub fn max_abs(m: &DMatrix<C64>) -> f64 {
    m.iter().map(|x| x.norm()).fold(0.0, f64::max)
}

pub fn max_abs_vec(v: &[C64]) -> f64 {
    v.iter().map(|x| x.norm()).fold(0.0, f64::max)
}

pub fn column(v: &[C64]) -> DVector<C64> {
    DVector::from_column_slice(v)
}

/// Least-squares scalar `k` minimizing `|a - k b|_F`, together with the
/// residual `max |a - k b|`.
pub fn fit_scalar(a: &[C64], b: &[C64]) -> (C64, f64) {
    let num: C64 = b.iter().zip(a).map(|(x, y)| x.conj() * y).sum();
    let den: f64 = b.iter().map(|x| x.norm_sqr()).sum();
    let k = if den > 0.0 { num / den } else { C64::new(0.0, 0.0) };
    let res = a
        .iter()
        .zip(b)
        .map(|(y, x)| (y - k * x).norm())
        .fold(0.0, f64::max);
    (k, res)
}

/// Least-squares fit `a ≈ k1 b1 + k2 b2` via the 2x2 normal equations.
pub fn fit_two(a: &[C64], b1: &[C64], b2: &[C64]) -> ([C64; 2], f64) {
    let dot = |x: &[C64], y: &[C64]| -> C64 { x.iter().zip(y).map(|(p, q)| p.conj() * q).sum() };
    let m = nalgebra::Matrix2::new(dot(b1, b1), dot(b1, b2), dot(b2, b1), dot(b2, b2));
    let r = nalgebra::Vector2::new(dot(b1, a), dot(b2, a));
    let k = m.lu().solve(&r).unwrap_or_else(nalgebra::Vector2::zeros);
    let res = a
        .iter()
        .zip(b1.iter().zip(b2))
        .map(|(y, (x1, x2))| (y - k[0] * x1 - k[1] * x2).norm())
        .fold(0.0, f64::max);
    ([k[0], k[1]], res)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn real(rows: usize, cols: usize, v: &[f64]) -> DMatrix<C64> {
        DMatrix::from_row_iterator(rows, cols, v.iter().map(|&x| C64::new(x, 0.0)))
    }

    #[test]
    fn norm_of_identity_under_scaled_gram() {
        // |v|^2 = 4 v^2 in and out: identity has norm 1
        let g = real(1, 1, &[4.0]);
        let t = real(1, 1, &[1.0]);
        assert!((operator_norm(&t, &g, &g) - 1.0).abs() < 1e-14);
        // plain Euclidean: spectral norm
        let id = DMatrix::identity(2, 2);
        let t = real(2, 2, &[3.0, 0.0, 0.0, 1.0]);
        assert!((operator_norm(&t, &id, &id) - 3.0).abs() < 1e-12);
    }

    #[test]
    fn singular_input_gram_is_projected() {
        let g = real(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        let whitened = whitening(&g);
        assert_eq!(whitened.ncols(), 1);
        let back = whitened.adjoint() * &g * &whitened;
        assert!((back[(0, 0)].re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn scalar_fit_recovers_coefficient() {
        let b = [C64::new(1.0, 0.0), C64::new(2.0, 1.0)];
        let a: Vec<C64> = b.iter().map(|x| x * 3.0).collect();
        let (k, r) = fit_scalar(&a, &b);
        assert!((k - C64::new(3.0, 0.0)).norm() < 1e-14 && r < 1e-14);
        let b2 = [C64::new(0.0, 1.0), C64::new(1.0, 0.0)];
        let a: Vec<C64> = b.iter().zip(&b2).map(|(x, y)| x * 2.0 + y * 4.0).collect();
        let (k, r) = fit_two(&a, &b, &b2);
        assert!((k[0] - C64::new(2.0, 0.0)).norm() < 1e-12);
        assert!((k[1] - C64::new(4.0, 0.0)).norm() < 1e-12);
        assert!(r < 1e-12);
    }
}
