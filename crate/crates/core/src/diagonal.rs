//! Grade-`k` vectors as functions on `M^k` for a finite point space `M`. The
//! bosonic scalar product becomes an `L^2` product against a measure `mu_k`
//! carried by the product set and all of its multidiagonals.
//!
//! Functions are stored as arrays over `M^k` in the same row-major order as
//! tensor coefficients, so with the delta basis a function and a tensor
//! coefficient array are the same data.

use rand::Rng;

use crate::algebra::{Element, PointMeasureSpace, C64};
use crate::bosonic::{BosonicFock, BosonicParams};
use crate::combinatorics::ordered_partitions;
use crate::error::{Error, Result};
use crate::fock::{self, grade_len, FockSpace, GradedOperator};
use crate::linalg;
use crate::report::{worst, CheckRecord};

pub const LOC_DIAGONAL: &str = "function representation on products of the base space";

/// Largest `d^k` for which a measure is materialized.
pub const MAX_TUPLES: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalMeasure {
    k: usize,
    dim: usize,
    weights: Vec<f64>,
}

impl DiagonalMeasure {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn total_mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Weight of the tuple `(x_1, .., x_k)`.
    pub fn weight(&self, tuple: &[usize]) -> f64 {
        self.weights[fock::encode(tuple, self.dim)]
    }
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|i| i as f64).product()
}

/// Pushes `gamma0^m / (n_1 .. n_m) * mu^{⊗m}` forward along every ordered
/// partition's diagonal embedding and sums.
pub fn build_measure(gamma0: f64, space: &PointMeasureSpace, k: usize) -> Result<DiagonalMeasure> {
    let d = space.len();
    let n = d
        .checked_pow(k as u32)
        .filter(|&n| n <= MAX_TUPLES)
        .ok_or(Error::TooLarge {
            what: "diagonal measure tuples",
            n: d.saturating_pow(k as u32),
            cap: MAX_TUPLES,
        })?;
    let mut weights = vec![0.0; n];
    if k == 0 {
        weights[0] = 1.0;
        return Ok(DiagonalMeasure { k, dim: d, weights });
    }
    let pre = 2f64.powi(k as i32) / factorial(k);
    let w = space.weights();
    for pi in ordered_partitions(k)? {
        let blocks = pi.blocks();
        let m = blocks.len();
        let coeff = pre * gamma0.powi(m as i32) / blocks.iter().map(|b| b.len() as f64).product::<f64>();
        let mut tuple = vec![0usize; k];
        for y_idx in 0..grade_len(d, m) {
            let y = fock::decode(y_idx, d, m);
            for (s, b) in blocks.iter().enumerate() {
                for &r in b {
                    tuple[r] = y[s];
                }
            }
            let mass: f64 = y.iter().map(|&p| w[p]).product();
            weights[fock::encode(&tuple, d)] += coeff * mass;
        }
    }
    Ok(DiagonalMeasure { k, dim: d, weights })
}

/// `int conj(Phi) Psi dmu_k`.
pub fn inner_product(measure: &DiagonalMeasure, phi: &[C64], psi: &[C64]) -> Result<C64> {
    let n = measure.weights.len();
    for v in [phi, psi] {
        if v.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: v.len() });
        }
    }
    Ok(phi
        .iter()
        .zip(psi)
        .zip(&measure.weights)
        .map(|((a, b), w)| a.conj() * b * *w)
        .sum())
}

/// `(b*_phi Psi)(x_1..x_{k+1}) = sum_i phi(x_i) Psi(.. x_i omitted ..)`.
pub fn apply_creation(space: &PointMeasureSpace, phi: &Element, psi: &[C64], k: usize) -> Vec<C64> {
    let d = space.len();
    (0..grade_len(d, k + 1))
        .map(|idx| {
            let x = fock::decode(idx, d, k + 1);
            (0..=k)
                .map(|i| {
                    let mut rest = x.clone();
                    rest.remove(i);
                    phi.coords()[x[i]] * psi[fock::encode(&rest, d)]
                })
                .sum()
        })
        .collect()
}

/// `(b_phi Psi)(x_1..x_{k-1}) = 2 g0 int conj(phi(y)) Psi(x, y) dmu(y)
///   + 2 sum_i conj(phi(x_i)) Psi(x_1..x_i, x_i, ..x_{k-1})`.
pub fn apply_annihilation(space: &PointMeasureSpace, gamma0: f64, phi: &Element, psi: &[C64], k: usize) -> Vec<C64> {
    if k == 0 {
        return Vec::new();
    }
    let d = space.len();
    let w = space.weights();
    (0..grade_len(d, k - 1))
        .map(|idx| {
            let x = fock::decode(idx, d, k - 1);
            let mut full = x.clone();
            full.push(0);
            let integral: C64 = (0..d)
                .map(|y| {
                    full[k - 1] = y;
                    phi.coords()[y].conj() * psi[fock::encode(&full, d)] * w[y]
                })
                .sum();
            let doubled: C64 = (0..k - 1)
                .map(|i| {
                    let mut t = x.clone();
                    t.insert(i, x[i]);
                    phi.coords()[x[i]].conj() * psi[fock::encode(&t, d)]
                })
                .sum();
            integral * (2.0 * gamma0) + doubled * 2.0
        })
        .collect()
}

/// `(n_phi Psi)(x) = Psi(x) sum_i phi(x_i)`.
pub fn apply_number(space: &PointMeasureSpace, phi: &Element, psi: &[C64], k: usize) -> Vec<C64> {
    let d = space.len();
    psi.iter()
        .enumerate()
        .map(|(idx, v)| v * fock::decode(idx, d, k).iter().map(|&x| phi.coords()[x]).sum::<C64>())
        .collect()
}

fn random_vec<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<C64> {
    (0..n)
        .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect()
}

fn symmetrize(v: &[C64], d: usize, k: usize) -> Vec<C64> {
    let s = fock::symmetric_isometry(d, k);
    let p = &s * s.adjoint();
    (p * linalg::column(v)).iter().copied().collect()
}

fn rel_diff(a: &[C64], b: &[C64]) -> f64 {
    let scale = linalg::max_abs_vec(a).max(linalg::max_abs_vec(b)).max(1.0);
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max) / scale
}

/// Cross-checks the function representation against the tensor one for all
/// grades `<= k_max`: the Gram matrices, random inner products and the three
/// operators. The annihilator is compared on symmetric input only, since the
/// two formulas contract different slots.
pub fn check_against_tensor<R: Rng + ?Sized>(
    gamma0: f64,
    space: &PointMeasureSpace,
    k_max: usize,
    trials: usize,
    rng: &mut R,
    tol: f64,
) -> Result<Vec<CheckRecord>> {
    let d = space.len();
    let alg = crate::algebra::StatefulAlgebra::functions(space.clone());
    let fockspace = BosonicFock::new(BosonicParams::new(gamma0, k_max.max(1), alg.clone())?);
    let (mut gram, mut inner, mut cre, mut ann, mut num) = (vec![], vec![], vec![], vec![], vec![]);
    for k in 0..=k_max {
        let mu = build_measure(gamma0, space, k)?;
        let g = fockspace.gram_literal(k)?;
        let diag = nalgebra::DMatrix::from_fn(g.nrows(), g.ncols(), |i, j| {
            C64::new(if i == j { mu.weights[i] } else { 0.0 }, 0.0)
        });
        let scale = linalg::max_abs(&g).max(1.0);
        gram.push(CheckRecord::residual(
            format!("gram k={k}"),
            LOC_DIAGONAL,
            linalg::max_abs(&(&g - diag)) / scale,
            tol,
        ));
        for _ in 0..trials {
            let n = grade_len(d, k);
            let (u, v) = (random_vec(rng, n), random_vec(rng, n));
            let lhs = inner_product(&mu, &u, &v)?;
            let rhs = fock::form(&g, &u, &v);
            inner.push(CheckRecord::residual(
                format!("inner k={k}"),
                LOC_DIAGONAL,
                (lhs - rhs).norm() / rhs.norm().max(1.0),
                tol,
            ));
            let phi = alg.random_element(rng);
            if k < k_max {
                let a = apply_creation(space, &phi, &v, k);
                let b = fockspace.apply_grade(&GradedOperator::creation(phi.clone()), k, &v)?;
                cre.push(CheckRecord::residual(format!("b* k={k}"), LOC_DIAGONAL, rel_diff(&a, &b), tol));
            }
            if k > 0 {
                let sv = symmetrize(&v, d, k);
                let a = apply_annihilation(space, gamma0, &phi, &sv, k);
                let b = fockspace.apply_grade(&GradedOperator::annihilation(phi.clone()), k, &sv)?;
                ann.push(CheckRecord::residual(format!("b k={k}"), LOC_DIAGONAL, rel_diff(&a, &b), tol));
            }
            let a = apply_number(space, &phi, &v, k);
            let b = fockspace.apply_grade(&GradedOperator::number(phi.clone()), k, &v)?;
            num.push(CheckRecord::residual(format!("n k={k}"), LOC_DIAGONAL, rel_diff(&a, &b), tol));
        }
    }
    Ok(vec![
        worst("diagonal.gram", LOC_DIAGONAL, gram),
        worst("diagonal.inner_product", LOC_DIAGONAL, inner),
        worst("diagonal.creation", LOC_DIAGONAL, cre),
        worst("diagonal.annihilation", LOC_DIAGONAL, ann),
        worst("diagonal.number", LOC_DIAGONAL, num),
    ])
}
