//! A truncated q-deformed Fock space over `L^2(M, mu)` for a finite weighted
//! point set `M`, and the squared-mode construction of `b`, `b*` on blocks of
//! equal measure.
//!
//! Tensors are stored over the delta basis `e_p`, `<e_p, e_r> = w_p delta_pr`.
//! `a*_phi` prepends `phi`; `a_phi` contracts slot `i` with weight `q^(i-1)`.

use nalgebra::DMatrix;
use rand::Rng;

use crate::algebra::{Element, PointMeasureSpace, StatefulAlgebra, C64};
use crate::bosonic::{BosonicFock, BosonicParams};
use crate::combinatorics::{inversions, permutations};
use crate::error::{Error, Result};
use crate::fock::{self, grade_len, FockSpace, GradedOperator};
use crate::linalg;
use crate::report::{worst, CheckRecord};

pub const LOC_R1: &str = "q-deformed white noise: commutation relation a a* - q a* a";
pub const LOC_SQUARES: &str = "q-deformed white noise: relation for squares of a and a*";
pub const LOC_SSS: &str = "q-deformed white noise: discretized relation for b, b* on piecewise constant functions";
pub const LOC_QGRAM: &str = "q-deformed white noise: q-Fock scalar product";

/// Largest truncation: the q-Gram sums over `S_n`.
pub const MAX_Q_TRUNCATION: usize = 5;

#[derive(Debug, Clone)]
pub struct QFockSpace {
    q: f64,
    space: PointMeasureSpace,
    truncation: usize,
}

fn zero() -> C64 {
    C64::new(0.0, 0.0)
}

impl QFockSpace {
    pub fn new(q: f64, space: PointMeasureSpace, truncation: usize) -> Result<Self> {
        if !(q > -1.0 && q <= 1.0) {
            return Err(Error::InvalidParameter(format!("q must lie in (-1, 1], got {q}")));
        }
        if truncation == 0 || truncation > MAX_Q_TRUNCATION {
            return Err(Error::InvalidParameter(format!(
                "truncation must be in 1..={MAX_Q_TRUNCATION}, got {truncation}"
            )));
        }
        fock::dense_guard(space.len(), truncation)?;
        Ok(Self { q, space, truncation })
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn dim(&self) -> usize {
        self.space.len()
    }

    pub fn truncation(&self) -> usize {
        self.truncation
    }

    pub fn space(&self) -> &PointMeasureSpace {
        &self.space
    }

    /// One-particle product `sum_p conj(phi_p) psi_p w_p`.
    pub fn inner(&self, phi: &Element, psi: &Element) -> C64 {
        phi.coords()
            .iter()
            .zip(psi.coords())
            .zip(self.space.weights())
            .map(|((a, b), w)| a.conj() * b * *w)
            .sum()
    }

    /// `sum_sigma q^inv(sigma) <e_I, e_{sigma J}>_0` on grade `n`.
    pub fn q_gram(&self, n: usize) -> Result<DMatrix<C64>> {
        if n > self.truncation {
            return Err(Error::GradeCap {
                grade: n,
                cap: self.truncation,
            });
        }
        let d = self.dim();
        let len = grade_len(d, n);
        let w = self.space.weights();
        let perms: Vec<(f64, Vec<usize>)> = permutations(n)
            .map(|p| (self.q.powi(inversions(&p) as i32), p))
            .collect();
        let mut g = DMatrix::zeros(len, len);
        for i in 0..len {
            let idx = fock::decode(i, d, n);
            let mass: f64 = idx.iter().map(|&p| w[p]).product();
            for (coeff, p) in &perms {
                if *coeff == 0.0 {
                    continue;
                }
                let permuted: Vec<usize> = p.iter().map(|&r| idx[r]).collect();
                g[(i, fock::encode(&permuted, d))] += C64::new(coeff * mass, 0.0);
            }
        }
        Ok(g)
    }

    fn check_symbol(&self, phi: &Element) -> Result<()> {
        if phi.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: phi.len(),
            });
        }
        Ok(())
    }

    /// `a*_phi` from grade `k` to `k + 1`.
    pub fn create(&self, phi: &Element, k: usize, v: &[C64]) -> Result<Vec<C64>> {
        self.check_symbol(phi)?;
        if k >= self.truncation {
            return Err(Error::GradeCap {
                grade: k + 1,
                cap: self.truncation,
            });
        }
        let len = grade_len(self.dim(), k);
        let mut out = vec![zero(); len * self.dim()];
        for (c, x) in phi.coords().iter().enumerate() {
            for (j, y) in v.iter().enumerate() {
                out[c * len + j] = x * y;
            }
        }
        Ok(out)
    }

    /// `a_phi` from grade `k` to `k - 1`.
    pub fn annihilate(&self, phi: &Element, k: usize, v: &[C64]) -> Result<Vec<C64>> {
        self.check_symbol(phi)?;
        if k == 0 {
            return Ok(Vec::new());
        }
        let d = self.dim();
        let pair: Vec<C64> = (0..d)
            .map(|a| phi.coords()[a].conj() * self.space.weights()[a])
            .collect();
        let mut out = vec![zero(); grade_len(d, k - 1)];
        for (j, x) in v.iter().enumerate() {
            if *x == zero() {
                continue;
            }
            let idx = fock::decode(j, d, k);
            let mut weight = 1.0;
            for i in 0..k {
                let c = pair[idx[i]];
                if c != zero() && weight != 0.0 {
                    let mut rest = idx.clone();
                    rest.remove(i);
                    out[fock::encode(&rest, d)] += x * c * weight;
                }
                weight *= self.q;
            }
        }
        Ok(out)
    }

    fn matrix<F>(&self, rows: usize, cols: usize, f: F) -> Result<DMatrix<C64>>
    where
        F: Fn(&[C64]) -> Result<Vec<C64>>,
    {
        let mut m = DMatrix::zeros(rows, cols);
        let mut unit = vec![zero(); cols];
        for j in 0..cols {
            unit[j] = C64::new(1.0, 0.0);
            for (i, x) in f(&unit)?.into_iter().enumerate() {
                m[(i, j)] = x;
            }
            unit[j] = zero();
        }
        Ok(m)
    }

    pub fn create_block(&self, phi: &Element, k: usize) -> Result<DMatrix<C64>> {
        let d = self.dim();
        self.matrix(grade_len(d, k + 1), grade_len(d, k), |v| self.create(phi, k, v))
    }

    /// Matrix of `a_phi` from grade `k`; zero rows when `k = 0`.
    pub fn annihilate_block(&self, phi: &Element, k: usize) -> Result<DMatrix<C64>> {
        let d = self.dim();
        if k == 0 {
            return Ok(DMatrix::zeros(0, 1));
        }
        self.matrix(grade_len(d, k - 1), grade_len(d, k), |v| self.annihilate(phi, k, v))
    }

    fn id(&self, k: usize) -> DMatrix<C64> {
        let n = grade_len(self.dim(), k);
        DMatrix::identity(n, n)
    }
}

fn rel(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
    linalg::max_abs(&(a - b)) / linalg::max_abs(a).max(linalg::max_abs(b)).max(1.0)
}

/// `a_phi a*_psi - q a*_psi a_phi = <phi, psi>` on grades `< N`.
pub fn r1_residual(space: &QFockSpace, phi: &Element, psi: &Element) -> Result<f64> {
    let c = space.inner(phi, psi);
    let mut res = 0.0f64;
    for k in 0..space.truncation {
        let mut lhs = space.annihilate_block(phi, k + 1)? * space.create_block(psi, k)?;
        if k > 0 {
            lhs -= space.create_block(psi, k - 1)? * space.annihilate_block(phi, k)? * C64::new(space.q, 0.0);
        }
        res = res.max(rel(&lhs, &(space.id(k) * c)));
    }
    Ok(res)
}

/// `a_zeta^2 a*_xi^2 - q^4 a*_xi^2 a_zeta^2 = (1+q) c^2 + q (1+q)^2 c a*_xi a_zeta`
/// with `c = <zeta, xi>`, on grades `<= N - 2`.
pub fn squared_residual(space: &QFockSpace, zeta: &Element, xi: &Element) -> Result<f64> {
    if space.truncation < 2 {
        return Err(Error::InvalidParameter("squared relation needs truncation >= 2".into()));
    }
    let q = space.q;
    let c = space.inner(zeta, xi);
    let mut res = 0.0f64;
    for k in 0..=space.truncation - 2 {
        let cre2 = space.create_block(xi, k + 1)? * space.create_block(xi, k)?;
        let ann2 = space.annihilate_block(zeta, k + 1)? * space.annihilate_block(zeta, k + 2)?;
        let mut lhs = ann2 * cre2;
        let mut rhs = space.id(k) * (c * c * (1.0 + q));
        if k >= 1 {
            rhs += space.create_block(xi, k - 1)? * space.annihilate_block(zeta, k)? * (c * q * (1.0 + q).powi(2));
        }
        if k >= 2 {
            let cre2 = space.create_block(xi, k - 1)? * space.create_block(xi, k - 2)?;
            let ann2 = space.annihilate_block(zeta, k - 1)? * space.annihilate_block(zeta, k)?;
            lhs -= cre2 * ann2 * C64::new(q.powi(4), 0.0);
        }
        res = res.max(rel(&lhs, &rhs));
    }
    Ok(res)
}

/// `(a_phi)^H P_k = P_{k+1} a*_phi` on grades `< N`.
pub fn adjointness_residual(space: &QFockSpace, phi: &Element) -> Result<f64> {
    let mut res = 0.0f64;
    for k in 0..space.truncation {
        let lhs = space.annihilate_block(phi, k + 1)?.adjoint() * space.q_gram(k)?;
        let rhs = space.q_gram(k + 1)? * space.create_block(phi, k)?;
        res = res.max(rel(&lhs, &rhs));
    }
    Ok(res)
}

/// Smallest eigenvalue of the q-Gram over grades `<= N`; at `q = 1` only the
/// symmetric subspace is considered.
pub fn min_gram_eigenvalue(space: &QFockSpace) -> Result<f64> {
    let mut min = f64::INFINITY;
    for k in 0..=space.truncation {
        let mut g = space.q_gram(k)?;
        if space.q == 1.0 {
            let s = fock::symmetric_isometry(space.dim(), k);
            g = s.adjoint() * g * &s;
        }
        min = min.min(linalg::min_eigenvalue(&g));
    }
    Ok(min)
}

/// Disjoint blocks of points of equal measure `l`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeBlocks {
    blocks: Vec<Vec<usize>>,
    l: f64,
}

impl ModeBlocks {
    pub fn new(space: &PointMeasureSpace, blocks: Vec<Vec<usize>>) -> Result<Self> {
        let mut seen = vec![false; space.len()];
        for b in &blocks {
            if b.is_empty() {
                return Err(Error::InvalidParameter("empty mode block".into()));
            }
            for &p in b {
                if p >= space.len() || seen[p] {
                    return Err(Error::OverlappingSupport);
                }
                seen[p] = true;
            }
        }
        let masses: Vec<f64> = blocks
            .iter()
            .map(|b| b.iter().map(|&p| space.weights()[p]).sum())
            .collect();
        let l = *masses
            .first()
            .ok_or_else(|| Error::InvalidParameter("no mode blocks".into()))?;
        if masses.iter().any(|m| (m - l).abs() > 1e-12 * l) {
            return Err(Error::InvalidParameter(format!("mode blocks must have equal measure, got {masses:?}")));
        }
        Ok(Self { blocks, l })
    }

    pub fn l(&self) -> f64 {
        self.l
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    /// `chi_i / sqrt(l)`.
    pub fn mode(&self, dim: usize, i: usize) -> Element {
        let mut c = vec![zero(); dim];
        for &p in &self.blocks[i] {
            c[p] = C64::new(1.0 / self.l.sqrt(), 0.0);
        }
        Element::from_coords(c)
    }

    /// Block values of a function that is constant on each block and vanishes
    /// elsewhere.
    pub fn values(&self, f: &Element) -> Result<Vec<C64>> {
        let mut inside = vec![false; f.len()];
        let mut vals = Vec::with_capacity(self.blocks.len());
        for b in &self.blocks {
            let v = f.coords()[b[0]];
            for &p in b {
                inside[p] = true;
                if (f.coords()[p] - v).norm() > 1e-14 * v.norm().max(1.0) {
                    return Err(Error::NotPiecewiseConstant);
                }
            }
            vals.push(v);
        }
        if f.coords().iter().zip(&inside).any(|(x, &i)| !i && *x != zero()) {
            return Err(Error::NotPiecewiseConstant);
        }
        Ok(vals)
    }

    pub fn from_values(&self, dim: usize, vals: &[C64]) -> Element {
        let mut c = vec![zero(); dim];
        for (b, v) in self.blocks.iter().zip(vals) {
            for &p in b {
                c[p] = *v;
            }
        }
        Element::from_coords(c)
    }

    pub fn random<R: Rng + ?Sized>(&self, dim: usize, rng: &mut R) -> Element {
        let vals: Vec<C64> = (0..self.blocks.len())
            .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        self.from_values(dim, &vals)
    }
}

/// `b_phi` (from grade `k`) or `b*_psi` (from grade `k`) built from squared
/// block modes.
fn quadratic_block(space: &QFockSpace, modes: &ModeBlocks, f: &Element, k: usize, creation: bool) -> Result<DMatrix<C64>> {
    let d = space.dim();
    let vals = modes.values(f)?;
    let (rows, cols) = if creation {
        (grade_len(d, k + 2), grade_len(d, k))
    } else {
        (grade_len(d, k.saturating_sub(2)), grade_len(d, k))
    };
    let mut acc = DMatrix::zeros(if !creation && k < 2 { 0 } else { rows }, cols);
    if !creation && k < 2 {
        return Ok(acc);
    }
    for (i, v) in vals.iter().enumerate() {
        if *v == zero() {
            continue;
        }
        let u = modes.mode(d, i);
        if creation {
            acc += space.create_block(&u, k + 1)? * space.create_block(&u, k)? * *v;
        } else {
            acc += space.annihilate_block(&u, k - 1)? * space.annihilate_block(&u, k)? * v.conj();
        }
    }
    Ok(acc)
}

/// Test vector `a*_{theta_1} .. a*_{theta_m} Omega`.
fn pc_vector<R: Rng + ?Sized>(space: &QFockSpace, modes: &ModeBlocks, m: usize, rng: &mut R) -> Result<Vec<C64>> {
    let mut v = vec![C64::new(1.0, 0.0)];
    for k in 0..m {
        v = space.create(&modes.random(space.dim(), rng), k, &v)?;
    }
    Ok(v)
}

/// Largest relative deviation between matrix elements of
/// `b_phi b*_psi - q^4 b*_psi b_phi` and of
/// `(1+q)/l int psi conj(phi) + q (1+q)^2 sum_p (psi conj(phi))(p) a*_p a_p`
/// (normalized point modes) between piecewise-constant test vectors.
pub fn sss_residual<R: Rng + ?Sized>(
    space: &QFockSpace,
    modes: &ModeBlocks,
    phi: &Element,
    psi: &Element,
    trials: usize,
    rng: &mut R,
) -> Result<f64> {
    if space.truncation < 2 {
        return Err(Error::InvalidParameter("squared modes need truncation >= 2".into()));
    }
    modes.values(phi)?;
    modes.values(psi)?;
    let d = space.dim();
    let q = space.q;
    let w = space.space.weights();
    let integral: C64 = (0..d).map(|p| psi.coords()[p] * phi.coords()[p].conj() * w[p]).sum();
    let mut res = 0.0f64;
    for m in 0..=space.truncation - 2 {
        let mut lhs = quadratic_block(space, modes, phi, m + 2, false)? * quadratic_block(space, modes, psi, m, true)?;
        if m >= 2 {
            lhs -= quadratic_block(space, modes, psi, m - 2, true)?
                * quadratic_block(space, modes, phi, m, false)?
                * C64::new(q.powi(4), 0.0);
        }
        let mut rhs = space.id(m) * (integral * ((1.0 + q) / modes.l));
        if m >= 1 {
            for p in 0..d {
                let f = psi.coords()[p] * phi.coords()[p].conj();
                if f == zero() {
                    continue;
                }
                let mut e = vec![zero(); d];
                e[p] = C64::new(1.0 / w[p].sqrt(), 0.0);
                let e = Element::from_coords(e);
                rhs += space.create_block(&e, m - 1)? * space.annihilate_block(&e, m)? * (f * q * (1.0 + q).powi(2));
            }
        }
        let g = space.q_gram(m)?;
        for _ in 0..trials {
            let u = linalg::column(&pc_vector(space, modes, m, rng)?);
            let v = linalg::column(&pc_vector(space, modes, m, rng)?);
            let a = (u.adjoint() * &g * &lhs * &v)[(0, 0)];
            let b = (u.adjoint() * &g * &rhs * &v)[(0, 0)];
            res = res.max((a - b).norm() / b.norm().max(1.0));
        }
    }
    Ok(res)
}

/// At `q = 1`: the vacuum element `tau(b_phi b*_psi)` from squared modes
/// against the bosonic Fock space over the block algebra with `g0 = 1/l`,
/// and the ratio of the grade-one number terms of the two pictures.
pub fn bosonic_cross_check(space: &QFockSpace, modes: &ModeBlocks, phi: &Element, psi: &Element) -> Result<(f64, C64)> {
    if space.q != 1.0 {
        return Err(Error::InvalidParameter("cross-check needs q = 1".into()));
    }
    let d = space.dim();
    let (pv, sv) = (modes.values(phi)?, modes.values(psi)?);
    let l = modes.l;
    let tau_q = quadratic_block(space, modes, phi, 2, false)? * quadratic_block(space, modes, psi, 0, true)?;
    let tau_q = tau_q[(0, 0)];

    let blocks = StatefulAlgebra::functions_with_weights(vec![l; modes.blocks.len()])?;
    let bos = BosonicFock::new(BosonicParams::new(1.0 / l, 2, blocks)?);
    let (bphi, bpsi) = (Element::from_coords(pv.clone()), Element::from_coords(sv.clone()));
    let tau_b = bos.vacuum_expectation(&[GradedOperator::annihilation(bphi.clone()), GradedOperator::creation(bpsi.clone())])?;
    let vac = (tau_q - tau_b).norm() / tau_b.norm().max(1.0);

    // number term applied to b*_chi Omega, chi = 1 on every block: the mode
    // picture gives sum_i f_i N_i a*_i^2 Omega = 2 sum_i f_i a*_i^2 Omega,
    // the Fock space gives n_f b*_1 Omega = b*_f Omega
    let f: Vec<C64> = pv.iter().zip(&sv).map(|(p, s)| p.conj() * s).collect();
    let f_el = modes.from_values(d, &f);
    let ones = modes.from_values(d, &vec![C64::new(1.0, 0.0); modes.blocks.len()]);
    let created = quadratic_block(space, modes, &ones, 0, true)?;
    let mut number = DMatrix::zeros(grade_len(d, 2), grade_len(d, 2));
    for p in 0..d {
        let mut e = vec![zero(); d];
        e[p] = C64::new(1.0 / space.space.weights()[p].sqrt(), 0.0);
        let e = Element::from_coords(e);
        number += space.create_block(&e, 1)? * space.annihilate_block(&e, 2)? * f_el.coords()[p];
    }
    let mode_side: Vec<C64> = (number * &created).iter().copied().collect();
    let reference: Vec<C64> = quadratic_block(space, modes, &f_el, 0, true)?.iter().copied().collect();
    let (ratio, _) = linalg::fit_scalar(&mode_side, &reference);
    Ok((vac, ratio))
}

/// Records for one value of `q`.
pub fn check_all<R: Rng + ?Sized>(
    space: &QFockSpace,
    modes: &ModeBlocks,
    trials: usize,
    rng: &mut R,
    tol: f64,
) -> Result<Vec<CheckRecord>> {
    let d = space.dim();
    let mut r1 = Vec::new();
    let mut sq = Vec::new();
    let mut adj = Vec::new();
    let mut sss = Vec::new();
    let random = |rng: &mut R| {
        Element::from_coords(
            (0..d)
                .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect(),
        )
    };
    let tag = format!("q={}", space.q);
    for _ in 0..trials {
        let (a, b) = (random(rng), random(rng));
        r1.push(CheckRecord::residual(tag.clone(), LOC_R1, r1_residual(space, &a, &b)?, tol));
        sq.push(CheckRecord::residual(tag.clone(), LOC_SQUARES, squared_residual(space, &a, &b)?, tol));
        adj.push(CheckRecord::residual(tag.clone(), LOC_QGRAM, adjointness_residual(space, &a)?, tol));
        let (phi, psi) = (modes.random(d, rng), modes.random(d, rng));
        sss.push(CheckRecord::residual(tag.clone(), LOC_SSS, sss_residual(space, modes, &phi, &psi, 3, rng)?, tol));
    }
    let min = min_gram_eigenvalue(space)?;
    let suffix = |s: &str| format!("qdeform.{s}.{tag}");
    let mut out = vec![
        worst(&suffix("r1"), LOC_R1, r1),
        worst(&suffix("squares"), LOC_SQUARES, sq),
        worst(&suffix("adjointness"), LOC_QGRAM, adj),
        worst(&suffix("sss"), LOC_SSS, sss),
    ];
    let floor = if space.q.abs() < 1.0 { 0.0 } else { -1e-10 };
    let mut pos = CheckRecord::at_least(suffix("positivity"), LOC_QGRAM, min, floor);
    if space.q.abs() < 1.0 && min <= 0.0 {
        pos.status = crate::report::Status::Fail;
    }
    out.push(pos);
    if space.q == 1.0 {
        let (phi, psi) = (modes.random(d, rng), modes.random(d, rng));
        let (vac, ratio) = bosonic_cross_check(space, modes, &phi, &psi)?;
        out.push(CheckRecord::residual(suffix("bosonic_vacuum"), LOC_SSS, vac, tol));
        out.push(
            CheckRecord::reported(suffix("number_term_ratio"), LOC_SSS, ratio.re, Some(1.0), ratio.im.abs())
                .with_notes("squared-mode number term over the bosonic Fock number term on b*Omega"),
        );
    }
    Ok(out)
}
