//! The free quadratic Fock space: full tensor powers with the interval
//! (Boolean) partition form
//!
//! ```text
//! <psi_1 ⊗ .. ⊗ psi_k, chi_1 ⊗ .. ⊗ chi_k> = sum_{intervals} prod_B g mu((psi_a .. psi_b)* chi_a .. chi_b)
//! ```
//!
//! `b*` prepends, `b` contracts or merges the first two slots, and `n` acts on
//! the first slot only. No symmetrization is involved anywhere.

use nalgebra::DMatrix;
use rand::Rng;
use rayon::prelude::*;

use crate::algebra::{Element, StatefulAlgebra, C64};
use crate::combinatorics::{
    cumulant_weight, interval_compositions, moments_to_free_cumulants, multivariate_free_cumulant,
    noncrossing_partitions,
};
use crate::error::{Error, Result};
use crate::fock::{self, grade_len, FockSpace, GradedOperator, OpKind, Polynomial};
use crate::linalg;
use crate::report::{worst, CheckRecord};

pub const LOC_FORM: &str = "free quadratic Fock space: Boolean partition scalar product";
pub const LOC_RELATIONS: &str = "free quadratic Fock space: operator relations";
pub const LOC_ADJOINT: &str = "free quadratic Fock space: adjointness of b and b*";
pub const LOC_NORMS: &str = "free quadratic Fock space: operator norm estimates";
pub const LOC_MOMENTS: &str = "free quadratic Fock space: noncrossing moment theorem";
pub const LOC_CUMULANTS: &str = "free quadratic Fock space: free cumulants of Q_s";
pub const LOC_TRACE: &str = "free quadratic Fock space: traciality of the vacuum state";
pub const LOC_FREENESS: &str = "free quadratic Fock space: freeness for disjoint supports";

#[derive(Debug, Clone, PartialEq)]
pub struct FreeParams {
    gamma: f64,
    truncation: usize,
    algebra: StatefulAlgebra,
}

impl FreeParams {
    pub fn new(gamma: f64, truncation: usize, algebra: StatefulAlgebra) -> Result<Self> {
        if !(gamma > 0.0) || !gamma.is_finite() {
            return Err(Error::InvalidParameter(format!("gamma must be positive, got {gamma}")));
        }
        if truncation == 0 {
            return Err(Error::InvalidParameter("truncation must be >= 1".into()));
        }
        Ok(Self {
            gamma,
            truncation,
            algebra,
        })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn truncation(&self) -> usize {
        self.truncation
    }

    pub fn algebra(&self) -> &StatefulAlgebra {
        &self.algebra
    }

    pub fn is_tracial(&self) -> bool {
        self.algebra.state_functional().tracial
    }
}

#[derive(Debug, Clone)]
pub struct FreeFock {
    params: FreeParams,
}

impl FreeFock {
    pub fn new(params: FreeParams) -> Self {
        Self { params }
    }

    pub fn params(&self) -> &FreeParams {
        &self.params
    }

    fn alg(&self) -> &StatefulAlgebra {
        &self.params.algebra
    }

    /// `Q_s(phi) = b*_phi + b_{phi*} + s n_phi`.
    pub fn q(&self, s: f64, phi: &Element) -> Polynomial {
        let one = C64::new(1.0, 0.0);
        vec![
            (one, vec![GradedOperator::creation(phi.clone())]),
            (one, vec![GradedOperator::annihilation(self.alg().star(phi))]),
            (C64::new(s, 0.0), vec![GradedOperator::number(phi.clone())]),
        ]
    }

    /// `tau[Q_s(phi_1) .. Q_s(phi_k)]` computed on the truncated space.
    pub fn moment_operator(&self, s: f64, phis: &[Element]) -> Result<C64> {
        let factors: Vec<Polynomial> = phis.iter().map(|p| self.q(s, p)).collect();
        fock::vacuum_expectation_product(self, &factors)
    }

    /// The noncrossing-partition sum with block factors
    /// `g mu(phi_{i_1} .. phi_{i_n}) w(n, s)`, indices increasing.
    pub fn moment_formula(&self, s: f64, phis: &[Element]) -> Result<C64> {
        if phis.is_empty() {
            return Ok(C64::new(1.0, 0.0));
        }
        let alg = self.alg();
        let g = self.params.gamma;
        let mut acc = C64::new(0.0, 0.0);
        for pi in noncrossing_partitions(phis.len())? {
            let mut term = C64::new(1.0, 0.0);
            for b in pi.blocks() {
                let w = cumulant_weight(b.len(), s);
                if w == 0.0 {
                    term = C64::new(0.0, 0.0);
                    break;
                }
                term *= alg.state(&alg.product(b.iter().map(|&i| &phis[i]))) * (g * w);
            }
            acc += term;
        }
        Ok(acc)
    }

    /// `k_n = g mu(phi_1 .. phi_n) w(n, s)`.
    pub fn cumulant_closed_form(&self, s: f64, phis: &[Element]) -> C64 {
        let alg = self.alg();
        alg.state(&alg.product(phis.iter())) * (self.params.gamma * cumulant_weight(phis.len(), s))
    }
}

impl FockSpace for FreeFock {
    fn dim(&self) -> usize {
        self.params.algebra.dim()
    }

    fn truncation(&self) -> usize {
        self.params.truncation
    }

    fn gram(&self, k: usize) -> Result<DMatrix<C64>> {
        free_gram(self, k)
    }

    fn apply_grade(&self, op: &GradedOperator, k: usize, v: &[C64]) -> Result<Vec<C64>> {
        let d = self.dim();
        let alg = self.alg();
        let psi = &op.symbol;
        if psi.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: psi.len(),
            });
        }
        let zero = C64::new(0.0, 0.0);
        let len = grade_len(d, k);
        match op.kind {
            OpKind::Creation => {
                if k >= self.params.truncation {
                    return Err(Error::GradeCap {
                        grade: k + 1,
                        cap: self.params.truncation,
                    });
                }
                let mut out = vec![zero; len * d];
                for c in psi.support() {
                    for (j, x) in v.iter().enumerate() {
                        out[c * len + j] = psi.coords()[c] * x;
                    }
                }
                Ok(out)
            }
            OpKind::Annihilation => {
                if k == 0 {
                    return Ok(Vec::new());
                }
                let g = self.params.gamma;
                let psi_star = alg.star(psi);
                let rest_len = grade_len(d, k - 1);
                let mut out = vec![zero; rest_len];
                for a in 0..d {
                    let c = alg.state(&alg.mul(&psi_star, &alg.basis(a))) * g;
                    if c == zero {
                        continue;
                    }
                    for r in 0..rest_len {
                        out[r] += c * v[a * rest_len + r];
                    }
                }
                if k >= 2 {
                    let tail = grade_len(d, k - 2);
                    for a in 0..d {
                        let left = alg.mul(&psi_star, &alg.basis(a));
                        if left.is_zero() {
                            continue;
                        }
                        for b in 0..d {
                            let merged = alg.mul(&left, &alg.basis(b));
                            for (c, m) in merged.coords().iter().enumerate() {
                                if *m == zero {
                                    continue;
                                }
                                for t in 0..tail {
                                    out[c * tail + t] += m * v[(a * d + b) * tail + t];
                                }
                            }
                        }
                    }
                }
                Ok(out)
            }
            OpKind::Number => {
                let mut out = vec![zero; len];
                if k == 0 {
                    return Ok(out);
                }
                let tail = grade_len(d, k - 1);
                for a in 0..d {
                    let m = alg.mul(psi, &alg.basis(a));
                    for (c, x) in m.coords().iter().enumerate() {
                        if *x == zero {
                            continue;
                        }
                        for t in 0..tail {
                            out[c * tail + t] += x * v[a * tail + t];
                        }
                    }
                }
                Ok(out)
            }
        }
    }
}

/// Gram matrix of grade `k` on the full tensor basis.
pub fn free_gram(fock: &FreeFock, k: usize) -> Result<DMatrix<C64>> {
    if k > fock.params.truncation {
        return Err(Error::GradeCap {
            grade: k,
            cap: fock.params.truncation,
        });
    }
    let n = fock::dense_guard(fock.dim(), k)?;
    let d = fock.dim();
    let alg = fock.alg();
    let g = fock.params.gamma;
    let comps: Vec<Vec<std::ops::Range<usize>>> = interval_compositions(k).map(|c| c.blocks().collect()).collect();
    let basis: Vec<Element> = (0..d).map(|a| alg.basis(a)).collect();
    let rows: Vec<Vec<C64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let left = fock::decode(i, d, k);
            (0..n)
                .map(|j| {
                    let right = fock::decode(j, d, k);
                    comps
                        .iter()
                        .map(|blocks| {
                            blocks.iter().fold(C64::new(1.0, 0.0), |acc, r| {
                                if acc == C64::new(0.0, 0.0) {
                                    return acc;
                                }
                                let x = alg.product(left[r.clone()].iter().map(|&a| &basis[a]));
                                let y = alg.product(right[r.clone()].iter().map(|&a| &basis[a]));
                                acc * alg.inner(&x, &y) * g
                            })
                        })
                        .sum()
                })
                .collect()
        })
        .collect();
    Ok(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

/// Relations residual on a block pair, relative to the larger side.
fn rel(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
    linalg::max_abs(&(a - b)) / linalg::max_abs(a).max(linalg::max_abs(b)).max(1.0)
}

/// `b_psi b*_phi = g mu(psi* phi) + n_{psi* phi}`, `n_zeta b*_phi = b*_{zeta phi}`,
/// `b_psi n_zeta = b_{zeta* psi}` and `n_zeta n_eta = n_{zeta eta}` as block
/// identities on every grade where they are defined.
pub fn check_relations(
    fock: &FreeFock,
    phi: &Element,
    psi: &Element,
    zeta: &Element,
    eta: &Element,
    tol: f64,
) -> Result<Vec<CheckRecord>> {
    let alg = fock.alg();
    let top = fock.params.truncation;
    if top < 2 {
        return Err(Error::InvalidParameter("relation checks need truncation >= 2".into()));
    }
    let g = fock.params.gamma;
    let (mut r1, mut r2, mut r3, mut r4) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    let bs_phi = GradedOperator::creation(phi.clone());
    let b_psi = GradedOperator::annihilation(psi.clone());
    let n_zeta = GradedOperator::number(zeta.clone());
    let psi_star_phi = alg.mul(&alg.star(psi), phi);
    for k in 0..top {
        let lhs = fock.block(&b_psi, k + 1)? * fock.block(&bs_phi, k)?;
        let id = DMatrix::<C64>::identity(grade_len(fock.dim(), k), grade_len(fock.dim(), k));
        let rhs = id * (alg.state(&psi_star_phi) * g) + fock.block(&GradedOperator::number(psi_star_phi.clone()), k)?;
        r1.push(CheckRecord::residual(format!("free1 k={k}"), LOC_RELATIONS, rel(&lhs, &rhs), tol));

        let lhs = fock.block(&n_zeta, k + 1)? * fock.block(&bs_phi, k)?;
        let rhs = fock.block(&GradedOperator::creation(alg.mul(zeta, phi)), k)?;
        r2.push(CheckRecord::residual(format!("free2 k={k}"), LOC_RELATIONS, rel(&lhs, &rhs), tol));
    }
    for k in 1..=top {
        let lhs = fock.block(&b_psi, k)? * fock.block(&n_zeta, k)?;
        let rhs = fock.block(&GradedOperator::annihilation(alg.mul(&alg.star(zeta), psi)), k)?;
        r3.push(CheckRecord::residual(format!("free3 k={k}"), LOC_RELATIONS, rel(&lhs, &rhs), tol));
    }
    for k in 0..=top {
        let lhs = fock.block(&n_zeta, k)? * fock.block(&GradedOperator::number(eta.clone()), k)?;
        let rhs = fock.block(&GradedOperator::number(alg.mul(zeta, eta)), k)?;
        r4.push(CheckRecord::residual(format!("nn k={k}"), LOC_RELATIONS, rel(&lhs, &rhs), tol));
    }
    Ok(vec![
        worst("free.relation.annihilation_creation", LOC_RELATIONS, r1),
        worst("free.relation.number_creation", LOC_RELATIONS, r2),
        worst("free.relation.annihilation_number", LOC_RELATIONS, r3),
        worst("free.relation.number_number", LOC_RELATIONS, r4),
    ])
}

/// `(b_zeta)^H G_k = G_{k+1} b*_zeta` and `(n_zeta)^H G_k = G_k n_{zeta*}`.
pub fn adjointness_residual(fock: &FreeFock, grams: &[DMatrix<C64>], zeta: &Element) -> Result<f64> {
    let alg = fock.alg();
    let mut worst_res = 0.0f64;
    for k in 0..fock.params.truncation {
        let ann = fock.block(&GradedOperator::annihilation(zeta.clone()), k + 1)?;
        let cre = fock.block(&GradedOperator::creation(zeta.clone()), k)?;
        worst_res = worst_res.max(rel(&(ann.adjoint() * &grams[k]), &(&grams[k + 1] * cre)));
    }
    for (k, g) in grams.iter().enumerate() {
        let n = fock.block(&GradedOperator::number(zeta.clone()), k)?;
        let n_star = fock.block(&GradedOperator::number(alg.star(zeta)), k)?;
        worst_res = worst_res.max(rel(&(n.adjoint() * g), &(g * n_star)));
    }
    Ok(worst_res)
}

pub fn grams(fock: &FreeFock) -> Result<Vec<DMatrix<C64>>> {
    (0..=fock.params.truncation).map(|k| free_gram(fock, k)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FreeNorms {
    pub annihilation: f64,
    pub creation: f64,
    pub number: f64,
    pub ladder_bound: f64,
    pub number_bound: f64,
}

/// Norms of `b_phi: k -> k-1`, `b*_phi: k-1 -> k` and `n_phi` on grade `k`.
pub fn measure_norms(fock: &FreeFock, grams: &[DMatrix<C64>], phi: &Element, k: usize) -> Result<FreeNorms> {
    if k == 0 || k > fock.params.truncation {
        return Err(Error::InvalidParameter(format!("norm grade must be in 1..=N, got {k}")));
    }
    let alg = fock.alg();
    let ann = fock.block(&GradedOperator::annihilation(phi.clone()), k)?;
    let cre = fock.block(&GradedOperator::creation(phi.clone()), k - 1)?;
    let num = fock.block(&GradedOperator::number(phi.clone()), k)?;
    Ok(FreeNorms {
        annihilation: linalg::operator_norm(&ann, &grams[k], &grams[k - 1]),
        creation: linalg::operator_norm(&cre, &grams[k - 1], &grams[k]),
        number: linalg::operator_norm(&num, &grams[k], &grams[k]),
        ladder_bound: fock.params.gamma.sqrt() * alg.l2_norm(phi) + alg.linf_norm(phi),
        number_bound: alg.linf_norm(phi),
    })
}

pub const POSITIVITY_FLOOR: f64 = -1e-10;

pub fn min_gram_eigenvalue(grams: &[DMatrix<C64>]) -> f64 {
    grams.iter().map(linalg::min_eigenvalue).fold(f64::INFINITY, f64::min)
}

fn relative(a: C64, b: C64) -> f64 {
    (a - b).norm() / b.norm().max(1.0)
}

/// Operator moments against the noncrossing formula for random words of
/// every length up to `max_len`.
pub fn check_moments<R: Rng + ?Sized>(
    fock: &FreeFock,
    s: f64,
    max_len: usize,
    trials: usize,
    rng: &mut R,
    tol: f64,
) -> Result<CheckRecord> {
    let alg = fock.alg();
    let mut recs = Vec::new();
    for _ in 0..trials {
        for len in 0..=max_len {
            let phis: Vec<Element> = (0..len).map(|_| alg.random_element(rng)).collect();
            let op = fock.moment_operator(s, &phis)?;
            let formula = fock.moment_formula(s, &phis)?;
            recs.push(CheckRecord::residual(format!("len {len}"), LOC_MOMENTS, relative(op, formula), tol));
        }
    }
    Ok(worst("free.moments", LOC_MOMENTS, recs))
}

/// Closed-form cumulants against the recursive extraction from operator
/// moments, univariate and multivariate.
pub fn check_cumulants<R: Rng + ?Sized>(
    fock: &FreeFock,
    s: f64,
    max_len: usize,
    trials: usize,
    rng: &mut R,
    tol: f64,
) -> Result<CheckRecord> {
    let alg = fock.alg();
    let mut recs = Vec::new();
    for _ in 0..trials {
        let phi = alg.random_element(rng);
        let moments = (1..=max_len)
            .map(|m| fock.moment_operator(s, &vec![phi.clone(); m]))
            .collect::<Result<Vec<_>>>()?;
        for (i, k) in moments_to_free_cumulants(&moments).into_iter().enumerate() {
            let closed = fock.cumulant_closed_form(s, &vec![phi.clone(); i + 1]);
            recs.push(CheckRecord::residual(format!("univariate n={}", i + 1), LOC_CUMULANTS, relative(k, closed), tol));
        }
        let phis: Vec<Element> = (0..max_len).map(|_| alg.random_element(rng)).collect();
        let moment = |idx: &[usize]| {
            let sub: Vec<Element> = idx.iter().map(|&i| phis[i].clone()).collect();
            fock.moment_operator(s, &sub).unwrap_or(C64::new(f64::NAN, f64::NAN))
        };
        let k = multivariate_free_cumulant(max_len, moment)?;
        let closed = fock.cumulant_closed_form(s, &phis);
        recs.push(CheckRecord::residual(format!("multivariate n={max_len}"), LOC_CUMULANTS, relative(k, closed), tol));
    }
    Ok(worst("free.cumulants", LOC_CUMULANTS, recs))
}

fn random_word<R: Rng + ?Sized>(fock: &FreeFock, s: f64, pool: &[Element], max_factors: usize, rng: &mut R) -> Polynomial {
    let len = rng.gen_range(1..=max_factors);
    let mut poly: Polynomial = vec![(C64::new(1.0, 0.0), Vec::new())];
    for _ in 0..len {
        poly = poly_mul(&poly, &fock.q(s, &pool[rng.gen_range(0..pool.len())]));
    }
    poly
}

pub fn poly_mul(a: &Polynomial, b: &Polynomial) -> Polynomial {
    let mut out = Vec::with_capacity(a.len() * b.len());
    for (ca, wa) in a {
        for (cb, wb) in b {
            let mut w = wa.clone();
            w.extend(wb.iter().cloned());
            out.push((ca * cb, w));
        }
    }
    out
}

/// `|rho(XY) - rho(YX)|` for random words `X`, `Y` with at most `max_factors`
/// factors `Q_s(phi_i)` each.
pub fn check_traciality<R: Rng + ?Sized>(
    fock: &FreeFock,
    s: f64,
    max_factors: usize,
    trials: usize,
    rng: &mut R,
    tol: f64,
) -> Result<CheckRecord> {
    if !fock.params.is_tracial() {
        return Err(Error::NotTracial);
    }
    let alg = fock.alg();
    let pool: Vec<Element> = (0..3).map(|_| alg.random_element(rng)).collect();
    let mut recs = Vec::new();
    for _ in 0..trials {
        let x = random_word(fock, s, &pool, max_factors, rng);
        let y = random_word(fock, s, &pool, max_factors, rng);
        let xy = fock::vacuum_expectation_product(fock, &[x.clone(), y.clone()])?;
        let yx = fock::vacuum_expectation_product(fock, &[y, x])?;
        recs.push(CheckRecord::residual("trace", LOC_TRACE, relative(xy, yx), tol));
    }
    Ok(worst("free.traciality", LOC_TRACE, recs))
}

/// Splits the points of a function algebra into two halves and tests that
/// alternating products of centered polynomials (degree <= 2) in `Q_s(phi)`,
/// `supp phi` inside one half, have vanishing vacuum expectation.
pub fn check_freeness<R: Rng + ?Sized>(
    fock: &FreeFock,
    s: f64,
    order: usize,
    trials: usize,
    rng: &mut R,
    tol: f64,
) -> Result<CheckRecord> {
    let alg = fock.alg();
    if !alg.is_commutative() {
        return Err(Error::NotCommutative);
    }
    let d = alg.dim();
    if d < 2 || order < 2 {
        return Err(Error::InvalidParameter("freeness needs at least two points and order >= 2".into()));
    }
    let halves = [0..d / 2, d / 2..d];
    let supported = |rng: &mut R, h: usize| {
        let x = alg.random_element(rng);
        let coords = (0..d)
            .map(|i| if halves[h].contains(&i) { x.coords()[i] } else { C64::new(0.0, 0.0) })
            .collect();
        Element::from_coords(coords)
    };
    let mut recs = Vec::new();
    for _ in 0..trials {
        let mut budget = order;
        let mut factors: Vec<Polynomial> = Vec::new();
        let mut h = rng.gen_range(0..2);
        while budget > 0 && (factors.len() < 2 || rng.gen_bool(0.5)) {
            let deg = if budget >= 2 { rng.gen_range(1..=2) } else { 1 };
            budget -= deg;
            let mut poly = fock.q(s, &supported(rng, h));
            for (c, _) in poly.iter_mut() {
                *c *= rng.gen_range(0.5..1.5);
            }
            if deg == 2 {
                let sq = poly_mul(&fock.q(s, &supported(rng, h)), &fock.q(s, &supported(rng, h)));
                poly.extend(sq);
            }
            let mean = fock::vacuum_expectation_product(fock, std::slice::from_ref(&poly))?;
            poly.push((-mean, Vec::new()));
            factors.push(poly);
            h = 1 - h;
        }
        if factors.len() < 2 {
            continue;
        }
        let value = fock::vacuum_expectation_product(fock, &factors)?;
        recs.push(CheckRecord::residual(
            format!("alternation of {}", factors.len()),
            LOC_FREENESS,
            value.norm(),
            tol,
        ));
    }
    Ok(worst("free.freeness", LOC_FREENESS, recs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    fn functions(g: f64, n: usize, w: Vec<f64>) -> FreeFock {
        FreeFock::new(FreeParams::new(g, n, StatefulAlgebra::functions_with_weights(w).unwrap()).unwrap())
    }

    fn matrices(g: f64, n: usize, m: usize) -> FreeFock {
        FreeFock::new(FreeParams::new(g, n, StatefulAlgebra::matrices(m).unwrap()).unwrap())
    }

    #[test]
    fn gram_small_values() {
        let f = functions(1.0, 3, vec![1.0]);
        assert_eq!(free_gram(&f, 0).unwrap()[(0, 0)], c(1.0));
        assert!((free_gram(&f, 2).unwrap()[(0, 0)] - c(2.0)).norm() < 1e-14);
        assert!(free_gram(&f, 4).is_err());
    }

    #[test]
    fn gram_grade_two_by_hand_on_matrices() {
        // g^2 mu(psi1* chi1) mu(psi2* chi2) + g mu(psi2* psi1* chi1 chi2)
        let g = 0.7;
        let f = matrices(g, 2, 2);
        let alg = f.params().algebra().clone();
        let gram = free_gram(&f, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let (p1, p2, c1, c2) = (
            alg.random_element(&mut rng),
            alg.random_element(&mut rng),
            alg.random_element(&mut rng),
            alg.random_element(&mut rng),
        );
        let tensor = |a: &Element, b: &Element| -> Vec<C64> {
            a.coords().iter().flat_map(|x| b.coords().iter().map(move |y| x * y)).collect()
        };
        let got = fock::form(&gram, &tensor(&p1, &p2), &tensor(&c1, &c2));
        let inner_block = alg.state(&alg.product([&alg.star(&p2), &alg.star(&p1), &c1, &c2]));
        let expect = alg.inner(&p1, &c1) * alg.inner(&p2, &c2) * (g * g) + inner_block * g;
        assert!((got - expect).norm() < 1e-13);
    }

    #[test]
    fn operators_by_hand() {
        let g = 1.3;
        let f = functions(g, 2, vec![0.4]);
        let chi = Element::from_real(&[1.0]);
        let v = fock::GradedVector::homogeneous(1, 2, 2, vec![c(1.0)]).unwrap();
        // b_chi (chi ⊗ chi) = (g mu(chi) + 1) chi
        let out = f.apply(&GradedOperator::annihilation(chi.clone()), &v).unwrap();
        assert!((out.grade(1)[0] - c(g * 0.4 + 1.0)).norm() < 1e-14);
        let w = fock::GradedVector::homogeneous(1, 2, 1, vec![c(2.0)]).unwrap();
        let out = f.apply(&GradedOperator::annihilation(chi.clone()), &w).unwrap();
        assert!((out.vacuum_component() - c(2.0 * g * 0.4)).norm() < 1e-14);
    }

    #[test]
    fn number_acts_on_first_slot() {
        let f = functions(1.0, 2, vec![1.0, 1.0]);
        let psi = Element::from_real(&[2.0, 5.0]);
        // (e_1 ⊗ e_0): n_psi gives 5 (e_1 ⊗ e_0)
        let mut coeffs = vec![c(0.0); 4];
        coeffs[2] = c(1.0);
        let out = f.apply_grade(&GradedOperator::number(psi), 2, &coeffs).unwrap();
        assert_eq!(out, vec![c(0.0), c(0.0), c(5.0), c(0.0)]);
    }

    #[test]
    fn relations_and_adjointness() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for f in [functions(0.8, 3, vec![0.3, 1.0, 2.0]), matrices(1.2, 3, 2)] {
            let alg = f.params().algebra().clone();
            let r: Vec<Element> = (0..4).map(|_| alg.random_element(&mut rng)).collect();
            let recs = check_relations(&f, &r[0], &r[1], &r[2], &r[3], 1e-12).unwrap();
            assert!(recs.iter().all(CheckRecord::passed), "{recs:#?}");
            let gs = grams(&f).unwrap();
            assert!(adjointness_residual(&f, &gs, &r[0]).unwrap() < 1e-10);
            assert!(min_gram_eigenvalue(&gs) > POSITIVITY_FLOOR);
        }
    }

    #[test]
    fn low_moments_by_hand() {
        let g = 0.9;
        let s = 1.7;
        let f = functions(g, 3, vec![0.5, 1.5]);
        let alg = f.params().algebra().clone();
        let phi = Element::from_real(&[1.2, -0.3]);
        let sq = alg.mul(&phi, &phi);
        let cube = alg.mul(&sq, &phi);
        let m2 = f.moment_operator(s, &[phi.clone(), phi.clone()]).unwrap();
        assert!((m2 - alg.state(&sq) * g).norm() < 1e-14);
        let m3 = f.moment_operator(s, &vec![phi.clone(); 3]).unwrap();
        assert!((m3 - alg.state(&cube) * (s * g)).norm() < 1e-13);
        assert!(f.moment_operator(s, &[phi.clone()]).unwrap().norm() < 1e-15);
        // n = 4, s = 0 keeps only the l = 1 term of the 4-block
        assert_eq!(cumulant_weight(4, 0.0), 1.0);
    }

    #[test]
    fn moment_theorem_both_kinds() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for f in [functions(1.1, 3, vec![0.6, 1.4]), matrices(0.7, 3, 2)] {
            let rec = check_moments(&f, 0.8, 6, 3, &mut rng, 1e-9).unwrap();
            assert!(rec.passed(), "{rec:?}");
            let rec = check_cumulants(&f, -0.4, 6, 2, &mut rng, 1e-9).unwrap();
            assert!(rec.passed(), "{rec:?}");
        }
    }

    #[test]
    fn traciality_and_freeness() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let f = matrices(1.0, 3, 2);
        assert!(check_traciality(&f, 0.5, 3, 10, &mut rng, 1e-9).unwrap().passed());
        let f = functions(1.0, 3, vec![0.5, 1.0, 0.8, 1.2]);
        let rec = check_freeness(&f, 0.5, 6, 20, &mut rng, 1e-9).unwrap();
        assert!(rec.passed(), "{rec:?}");
    }

    #[test]
    fn norm_bounds_small() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let f = functions(1.5, 3, vec![0.5, 1.5]);
        let gs = grams(&f).unwrap();
        let phi = f.params().algebra().random_element(&mut rng);
        for k in 1..=3 {
            let m = measure_norms(&f, &gs, &phi, k).unwrap();
            assert!(m.annihilation <= m.ladder_bound * (1.0 + 1e-9));
            assert!(m.creation <= m.ladder_bound * (1.0 + 1e-9));
            assert!(m.number <= m.number_bound * (1.0 + 1e-9));
        }
    }
}
