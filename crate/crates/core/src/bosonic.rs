//! The quadratic bosonic Fock space at finite truncation.
//!
//! Grade `k` carries the sesquilinear form
//!
//! ```text
//! <x_1 ⊗ .. ⊗ x_k, y_1 ⊗ .. ⊗ y_k> = 2^k / k! * sum_{ordered pi} prod_p (g0 / n_p) mu(x*_{p1} y_{p1} ... x*_{p n_p} y_{p n_p})
//! ```
//!
//! which is well defined on the full tensor power but is only claimed to be
//! positive (and to make `b`, `b*` adjoint) on symmetric tensors. Every check
//! that depends on symmetry is therefore carried out after compressing to the
//! symmetric subspace.

use nalgebra::DMatrix;
use rand::Rng;
use rayon::prelude::*;

use crate::algebra::{AlgebraKind, Element, StatefulAlgebra, C64};
use crate::combinatorics::{ordered_partitions, set_partitions};
use crate::error::{Error, Result};
use crate::fock::{self, grade_len, FockSpace, GradedOperator, GradedVector, OpKind};
use crate::linalg;
use crate::report::{worst, CheckRecord};

pub const LOC_FORM: &str = "bosonic quadratic Fock space: partition-weighted scalar product";
pub const LOC_OPERATORS: &str = "bosonic quadratic Fock space: creation, annihilation and number operators";
pub const LOC_ADJOINT: &str = "bosonic quadratic Fock space: adjointness theorem";
pub const LOC_COMMUTATION: &str = "bosonic quadratic Fock space: commutation theorem";
pub const LOC_NORMS: &str = "bosonic quadratic Fock space: operator norm estimates";
pub const LOC_POSITIVITY: &str = "bosonic quadratic Fock space: positivity question for noncommutative algebras";

#[derive(Debug, Clone, PartialEq)]
pub struct BosonicParams {
    gamma0: f64,
    truncation: usize,
    algebra: StatefulAlgebra,
}

impl BosonicParams {
    pub fn new(gamma0: f64, truncation: usize, algebra: StatefulAlgebra) -> Result<Self> {
        if !(gamma0 > 0.0) || !gamma0.is_finite() {
            return Err(Error::InvalidParameter(format!("gamma0 must be positive, got {gamma0}")));
        }
        if truncation == 0 {
            return Err(Error::InvalidParameter("truncation must be >= 1".into()));
        }
        Ok(Self {
            gamma0,
            truncation,
            algebra,
        })
    }

    pub fn gamma0(&self) -> f64 {
        self.gamma0
    }

    /// The lengthscale `1 / gamma0`.
    pub fn lengthscale(&self) -> f64 {
        1.0 / self.gamma0
    }

    pub fn truncation(&self) -> usize {
        self.truncation
    }

    pub fn algebra(&self) -> &StatefulAlgebra {
        &self.algebra
    }
}

#[derive(Debug, Clone)]
pub struct BosonicFock {
    params: BosonicParams,
}

/// Per-grade Gram matrices on the full tensor basis together with isometries
/// onto the symmetric subspaces.
#[derive(Debug, Clone)]
pub struct GramStack {
    grams: Vec<DMatrix<C64>>,
    sym: Vec<DMatrix<C64>>,
}

impl GramStack {
    pub fn gram(&self, k: usize) -> &DMatrix<C64> {
        &self.grams[k]
    }

    /// Orthonormal basis (columns) of the symmetric tensors of grade `k`.
    pub fn isometry(&self, k: usize) -> &DMatrix<C64> {
        &self.sym[k]
    }

    /// Orthogonal projector onto the symmetric tensors.
    pub fn projector(&self, k: usize) -> DMatrix<C64> {
        &self.sym[k] * self.sym[k].adjoint()
    }

    /// Gram form restricted to the symmetric subspace, in the isometry basis.
    pub fn compressed(&self, k: usize) -> DMatrix<C64> {
        self.sym[k].adjoint() * &self.grams[k] * &self.sym[k]
    }

    pub fn top(&self) -> usize {
        self.grams.len() - 1
    }
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|i| i as f64).product()
}

impl BosonicFock {
    pub fn new(params: BosonicParams) -> Self {
        Self { params }
    }

    pub fn params(&self) -> &BosonicParams {
        &self.params
    }

    fn algebra(&self) -> &StatefulAlgebra {
        &self.params.algebra
    }

    fn check_grade(&self, k: usize) -> Result<()> {
        if k > self.params.truncation {
            return Err(Error::GradeCap {
                grade: k,
                cap: self.params.truncation,
            });
        }
        fock::dense_guard(self.dim(), k)?;
        Ok(())
    }

    /// `mu(prod_{r in block} x*_{left[r]} y_{right[r]})` in block order, for
    /// basis tensors. On a point set this is a single weight or zero.
    fn block_state(&self, block: &[usize], left: &[usize], right: &[usize], pairs: &[Element]) -> C64 {
        match self.algebra().kind() {
            AlgebraKind::Functions(space) => {
                let p = left[block[0]];
                if block.iter().all(|&r| left[r] == p && right[r] == p) {
                    C64::new(space.weights()[p], 0.0)
                } else {
                    C64::new(0.0, 0.0)
                }
            }
            AlgebraKind::Matrices { .. } => {
                let d = self.dim();
                let alg = self.algebra();
                alg.state(&alg.product(block.iter().map(|&r| &pairs[left[r] * d + right[r]])))
            }
        }
    }

    /// `e_a* e_b` for all pairs of basis elements.
    fn pair_products(&self) -> Vec<Element> {
        let alg = self.algebra();
        let d = alg.dim();
        (0..d * d)
            .map(|ab| alg.mul(&alg.star(&alg.basis(ab / d)), &alg.basis(ab % d)))
            .collect()
    }

    fn assemble<F>(&self, k: usize, entry: F) -> DMatrix<C64>
    where
        F: Fn(&[usize], &[usize]) -> C64 + Sync,
    {
        let n = grade_len(self.dim(), k);
        let d = self.dim();
        let rows: Vec<Vec<C64>> = (0..n)
            .into_par_iter()
            .map(|i| {
                let left = fock::decode(i, d, k);
                (0..n).map(|j| entry(&left, &fock::decode(j, d, k))).collect()
            })
            .collect();
        DMatrix::from_fn(n, n, |i, j| rows[i][j])
    }

    /// The literal ordered-partition sum.
    pub fn gram_literal(&self, k: usize) -> Result<DMatrix<C64>> {
        self.check_grade(k)?;
        if k == 0 {
            return Ok(DMatrix::from_element(1, 1, C64::new(1.0, 0.0)));
        }
        let g0 = self.params.gamma0;
        let parts: Vec<(f64, Vec<Vec<usize>>)> = ordered_partitions(k)?
            .map(|p| {
                let w = p.blocks().iter().map(|b| g0 / b.len() as f64).product();
                (w, p.blocks().to_vec())
            })
            .collect();
        let pairs = self.pair_products();
        let pre = 2f64.powi(k as i32) / factorial(k);
        Ok(self.assemble(k, |left, right| {
            let mut acc = C64::new(0.0, 0.0);
            for (w, blocks) in &parts {
                let mut term = C64::new(*w, 0.0);
                for b in blocks {
                    term *= self.block_state(b, left, right, &pairs);
                    if term == C64::new(0.0, 0.0) {
                        break;
                    }
                }
                acc += term;
            }
            acc * pre
        }))
    }

    /// Set-partition form of the same sum, valid for commutative algebras: a
    /// block of size `n` collects its `n!` orderings into the weight
    /// `g0 (n - 1)!`.
    pub fn gram_fast(&self, k: usize) -> Result<DMatrix<C64>> {
        self.check_grade(k)?;
        if !self.algebra().is_commutative() {
            return Err(Error::NotCommutative);
        }
        if k == 0 {
            return Ok(DMatrix::from_element(1, 1, C64::new(1.0, 0.0)));
        }
        let g0 = self.params.gamma0;
        let parts: Vec<(f64, Vec<Vec<usize>>)> = set_partitions(k)?
            .map(|p| {
                let w = p.blocks().iter().map(|b| g0 * factorial(b.len() - 1)).product();
                (w, p.blocks().to_vec())
            })
            .collect();
        let pairs = self.pair_products();
        let pre = 2f64.powi(k as i32) / factorial(k);
        Ok(self.assemble(k, |left, right| {
            parts
                .iter()
                .map(|(w, blocks)| {
                    blocks
                        .iter()
                        .fold(C64::new(*w, 0.0), |t, b| t * self.block_state(b, left, right, &pairs))
                })
                .sum::<C64>()
                * pre
        }))
    }

    pub fn gram_stack(&self) -> Result<GramStack> {
        let top = self.params.truncation;
        let grams = (0..=top)
            .map(|k| {
                if self.algebra().is_commutative() {
                    self.gram_fast(k)
                } else {
                    self.gram_literal(k)
                }
            })
            .collect::<Result<Vec<_>>>()?;
        let sym = (0..=top).map(|k| fock::symmetric_isometry(self.dim(), k)).collect();
        Ok(GramStack { grams, sym })
    }

    /// `<u, v>` summed over grades.
    pub fn inner(&self, stack: &GramStack, u: &GradedVector, v: &GradedVector) -> C64 {
        (0..=stack.top()).map(|k| fock::form(stack.gram(k), u.grade(k), v.grade(k))).sum()
    }

    pub fn creation(&self, psi: Element) -> GradedOperator {
        GradedOperator::creation(psi)
    }

    pub fn annihilation(&self, psi: Element) -> GradedOperator {
        GradedOperator::annihilation(psi)
    }

    pub fn number(&self, psi: Element) -> GradedOperator {
        GradedOperator::number(psi)
    }

    pub fn apply_creation(&self, psi: &Element, v: &GradedVector) -> Result<GradedVector> {
        self.apply(&GradedOperator::creation(psi.clone()), v)
    }

    pub fn apply_annihilation(&self, psi: &Element, v: &GradedVector) -> Result<GradedVector> {
        self.apply(&GradedOperator::annihilation(psi.clone()), v)
    }

    pub fn apply_number(&self, psi: &Element, v: &GradedVector) -> Result<GradedVector> {
        self.apply(&GradedOperator::number(psi.clone()), v)
    }

    /// `Q_s(phi) = b*_phi + b_{phi*} + s n_phi` as a list of weighted words.
    pub fn q_process(&self, s: f64, phi: &Element) -> Vec<(C64, GradedOperator)> {
        let alg = self.algebra();
        vec![
            (C64::new(1.0, 0.0), GradedOperator::creation(phi.clone())),
            (C64::new(1.0, 0.0), GradedOperator::annihilation(alg.star(phi))),
            (C64::new(s, 0.0), GradedOperator::number(phi.clone())),
        ]
    }
}

impl FockSpace for BosonicFock {
    fn dim(&self) -> usize {
        self.params.algebra.dim()
    }

    fn truncation(&self) -> usize {
        self.params.truncation
    }

    fn gram(&self, k: usize) -> Result<DMatrix<C64>> {
        if self.algebra().is_commutative() {
            self.gram_fast(k)
        } else {
            self.gram_literal(k)
        }
    }

    fn apply_grade(&self, op: &GradedOperator, k: usize, v: &[C64]) -> Result<Vec<C64>> {
        let d = self.dim();
        let alg = self.algebra();
        let psi = &op.symbol;
        if psi.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: psi.len(),
            });
        }
        let zero = C64::new(0.0, 0.0);
        match op.kind {
            OpKind::Creation => {
                if k >= self.params.truncation {
                    return Err(Error::GradeCap {
                        grade: k + 1,
                        cap: self.params.truncation,
                    });
                }
                let mut out = vec![zero; grade_len(d, k + 1)];
                let support = psi.support();
                for (j, x) in v.iter().enumerate() {
                    if *x == zero {
                        continue;
                    }
                    for slot in 0..=k {
                        let tail = grade_len(d, k - slot);
                        let (head, rest) = (j / tail, j % tail);
                        for &c in &support {
                            out[(head * d + c) * tail + rest] += x * psi.coords()[c];
                        }
                    }
                }
                Ok(out)
            }
            OpKind::Annihilation => {
                if k == 0 {
                    return Ok(Vec::new());
                }
                let g0 = self.params.gamma0;
                let psi_star = alg.star(psi);
                // mu(psi* e_a)
                let contraction: Vec<C64> = (0..d).map(|a| alg.state(&alg.mul(&psi_star, &alg.basis(a)))).collect();
                // e_a psi* e_b
                let merge: Vec<Element> = (0..d * d)
                    .map(|ab| alg.mul(&alg.mul(&alg.basis(ab / d), &psi_star), &alg.basis(ab % d)))
                    .collect();
                let mut out = vec![zero; grade_len(d, k - 1)];
                let rest_len = grade_len(d, k - 1);
                for (j, x) in v.iter().enumerate() {
                    if *x == zero {
                        continue;
                    }
                    let (first, rest) = (j / rest_len, j % rest_len);
                    out[rest] += x * contraction[first] * (2.0 * g0);
                    // merge into slot p of the remaining k-1 slots
                    for p in 0..k - 1 {
                        let place = grade_len(d, k - 2 - p);
                        let a = (rest / place) % d;
                        let base = rest - a * place;
                        for (c, m) in merge[a * d + first].coords().iter().enumerate() {
                            if *m != zero {
                                out[base + c * place] += x * m * 2.0;
                            }
                        }
                    }
                }
                Ok(out)
            }
            OpKind::Number => {
                let mult: Vec<Element> = (0..d).map(|a| alg.mul(psi, &alg.basis(a))).collect();
                let mut out = vec![zero; grade_len(d, k)];
                for (j, x) in v.iter().enumerate() {
                    if *x == zero {
                        continue;
                    }
                    for p in 0..k {
                        let place = grade_len(d, k - 1 - p);
                        let a = (j / place) % d;
                        let base = j - a * place;
                        for (c, m) in mult[a].coords().iter().enumerate() {
                            if *m != zero {
                                out[base + c * place] += x * m;
                            }
                        }
                    }
                }
                Ok(out)
            }
        }
    }
}

fn scaled_residual(diff: &DMatrix<C64>, scale: f64) -> f64 {
    linalg::max_abs(diff) / scale.max(1.0)
}

/// Adjointness of `b_zeta`/`b*_zeta` and of `n_zeta`/`n_{zeta*}` under the Gram
/// form, compressed to symmetric tensors on both sides.
pub fn check_adjointness(fock: &BosonicFock, stack: &GramStack, zeta: &Element, tol: f64) -> Result<CheckRecord> {
    let alg = fock.params().algebra();
    let top = fock.params().truncation;
    let mut records = Vec::new();
    for k in 0..top {
        let ann = fock.block(&GradedOperator::annihilation(zeta.clone()), k + 1)?;
        let cre = fock.block(&GradedOperator::creation(zeta.clone()), k)?;
        let lhs = ann.adjoint() * stack.gram(k);
        let rhs = stack.gram(k + 1) * &cre;
        let diff = stack.isometry(k + 1).adjoint() * (&lhs - &rhs) * stack.isometry(k);
        let scale = linalg::max_abs(&lhs).max(linalg::max_abs(&rhs));
        records.push(CheckRecord::residual(
            format!("b adjoint grade {k}"),
            LOC_ADJOINT,
            scaled_residual(&diff, scale),
            tol,
        ));
    }
    for k in 0..=top {
        let n = fock.block(&GradedOperator::number(zeta.clone()), k)?;
        let n_star = fock.block(&GradedOperator::number(alg.star(zeta)), k)?;
        let lhs = n.adjoint() * stack.gram(k);
        let rhs = stack.gram(k) * &n_star;
        let diff = stack.isometry(k).adjoint() * (&lhs - &rhs) * stack.isometry(k);
        let scale = linalg::max_abs(&lhs).max(linalg::max_abs(&rhs));
        records.push(CheckRecord::residual(
            format!("n adjoint grade {k}"),
            LOC_ADJOINT,
            scaled_residual(&diff, scale),
            tol,
        ));
    }
    Ok(worst("bosonic.adjointness", LOC_ADJOINT, records))
}

/// Measured coefficients from the commutator checks.
#[derive(Debug, Clone, PartialEq)]
pub struct CommutatorMeasurement {
    pub creators_commute: f64,
    pub annihilators_commute: f64,
    pub numbers_commute: f64,
    /// Residual of `[b_phi, b*_psi] - 2 g0 <phi, psi> - 4 n_{phi* psi}`.
    pub bracket_residual: f64,
    /// Least-squares `(c1, c2)` in `[b_phi, b*_psi] = c1 g0 <phi,psi> + c2 n_{phi* psi}`.
    pub bracket_fit: [C64; 2],
    pub bracket_fit_residual: f64,
    /// `kappa` in `[n_zeta, b*_psi] = kappa b*_{zeta psi}`.
    pub kappa: C64,
    pub kappa_residual: f64,
    /// `kappa'` in `[b_psi, n_zeta] = kappa' b_{zeta* psi}`.
    pub kappa_adjoint: C64,
    pub kappa_adjoint_residual: f64,
}

fn commutator(
    fock: &BosonicFock,
    x: &GradedOperator,
    y: &GradedOperator,
    k: usize,
) -> Result<DMatrix<C64>> {
    let d = fock.dim();
    let target = k as isize + x.kind.shift() + y.kind.shift();
    if target < 0 {
        return Ok(DMatrix::zeros(0, grade_len(d, k)));
    }
    let product = |outer: &GradedOperator, inner: &GradedOperator| -> Result<DMatrix<C64>> {
        let mid = k as isize + inner.kind.shift();
        if mid < 0 {
            return Ok(DMatrix::zeros(grade_len(d, target as usize), grade_len(d, k)));
        }
        Ok(fock.block(outer, mid as usize)? * fock.block(inner, k)?)
    };
    Ok(product(x, y)? - product(y, x)?)
}

fn flatten(m: &DMatrix<C64>) -> Vec<C64> {
    m.iter().copied().collect()
}

/// Evaluates every commutator on grades where both products stay within the
/// truncation. Inputs are restricted to symmetric tensors.
pub fn measure_commutators(
    fock: &BosonicFock,
    phi: &Element,
    psi: &Element,
    zeta: &Element,
) -> Result<CommutatorMeasurement> {
    let alg = fock.params().algebra();
    let top = fock.params().truncation;
    let g0 = fock.params().gamma0;
    let d = fock.dim();
    let sym = |k: usize| fock::symmetric_isometry(d, k);

    let (bs_phi, bs_psi) = (GradedOperator::creation(phi.clone()), GradedOperator::creation(psi.clone()));
    let (b_phi, b_psi) = (GradedOperator::annihilation(phi.clone()), GradedOperator::annihilation(psi.clone()));
    let (n_phi, n_psi) = (GradedOperator::number(phi.clone()), GradedOperator::number(psi.clone()));

    let mut creators = 0.0f64;
    for k in 0..top.saturating_sub(1) {
        creators = creators.max(linalg::max_abs(&commutator(fock, &bs_phi, &bs_psi, k)?));
    }
    let mut annihilators = 0.0f64;
    for k in 2..=top {
        annihilators = annihilators.max(linalg::max_abs(&(commutator(fock, &b_phi, &b_psi, k)? * sym(k))));
    }
    let mut numbers = 0.0f64;
    for k in 0..=top {
        numbers = numbers.max(linalg::max_abs(&commutator(fock, &n_phi, &n_psi, k)?));
    }

    let inner = alg.inner(phi, psi);
    let n_mixed = GradedOperator::number(alg.mul(&alg.star(phi), psi));
    let mut bracket_residual = 0.0f64;
    let (mut lhs_all, mut id_all, mut n_all) = (Vec::new(), Vec::new(), Vec::new());
    for k in 0..top {
        let s = sym(k);
        let lhs = commutator(fock, &b_phi, &bs_psi, k)? * &s;
        let id = &s * C64::new(g0, 0.0) * inner;
        let num = fock.block(&n_mixed, k)? * &s;
        let expect = &id * C64::new(2.0, 0.0) + &num * C64::new(4.0, 0.0);
        bracket_residual = bracket_residual.max(linalg::max_abs(&(&lhs - expect)));
        lhs_all.extend(flatten(&lhs));
        id_all.extend(flatten(&id));
        n_all.extend(flatten(&num));
    }
    let (bracket_fit, bracket_fit_residual) = linalg::fit_two(&lhs_all, &id_all, &n_all);

    let bs_zp = GradedOperator::creation(alg.mul(zeta, psi));
    let n_zeta = GradedOperator::number(zeta.clone());
    let (mut lhs_all, mut rhs_all) = (Vec::new(), Vec::new());
    for k in 0..top {
        let s = sym(k);
        lhs_all.extend(flatten(&(commutator(fock, &n_zeta, &bs_psi, k)? * &s)));
        rhs_all.extend(flatten(&(fock.block(&bs_zp, k)? * &s)));
    }
    let (kappa, kappa_residual) = linalg::fit_scalar(&lhs_all, &rhs_all);

    let b_zp = GradedOperator::annihilation(alg.mul(&alg.star(zeta), psi));
    let (mut lhs_all, mut rhs_all) = (Vec::new(), Vec::new());
    for k in 1..=top {
        let s = sym(k);
        lhs_all.extend(flatten(&(commutator(fock, &b_psi, &n_zeta, k)? * &s)));
        rhs_all.extend(flatten(&(fock.block(&b_zp, k)? * &s)));
    }
    let (kappa_adjoint, kappa_adjoint_residual) = linalg::fit_scalar(&lhs_all, &rhs_all);

    Ok(CommutatorMeasurement {
        creators_commute: creators,
        annihilators_commute: annihilators,
        numbers_commute: numbers,
        bracket_residual,
        bracket_fit,
        bracket_fit_residual,
        kappa,
        kappa_residual,
        kappa_adjoint,
        kappa_adjoint_residual,
    })
}

/// Exact-commutation tolerance: the identities hold term by term, so only
/// floating reassociation separates the two sides.
pub const EXACT_TOL: f64 = 1e-12;

pub fn check_commutators(
    fock: &BosonicFock,
    phi: &Element,
    psi: &Element,
    zeta: &Element,
    tol: f64,
) -> Result<Vec<CheckRecord>> {
    if fock.params().truncation < 3 {
        return Err(Error::InvalidParameter("commutator checks need truncation >= 3".into()));
    }
    let m = measure_commutators(fock, phi, psi, zeta)?;
    let g0 = fock.params().gamma0;
    Ok(vec![
        CheckRecord::residual("bosonic.commute.creators", LOC_COMMUTATION, m.creators_commute, EXACT_TOL),
        CheckRecord::residual("bosonic.commute.annihilators", LOC_COMMUTATION, m.annihilators_commute, EXACT_TOL),
        CheckRecord::residual("bosonic.commute.numbers", LOC_COMMUTATION, m.numbers_commute, EXACT_TOL),
        CheckRecord::residual("bosonic.bracket", LOC_COMMUTATION, m.bracket_residual, tol).with_notes(format!(
            "fitted [b,b*] = c1*g0*<phi,psi> + c2*n: c1 = {:.12}, c2 = {:.12} (g0 = {g0})",
            m.bracket_fit[0].re, m.bracket_fit[1].re
        )),
        kappa_record("bosonic.kappa.number_creation", m.kappa, m.kappa_residual, tol),
        kappa_record("bosonic.kappa.annihilation_number", m.kappa_adjoint, m.kappa_adjoint_residual, tol),
    ])
}

/// Stated value of the number/creation commutator coefficient.
pub const KAPPA_STATED: f64 = 2.0;

fn kappa_record(name: &str, kappa: C64, residual: f64, tol: f64) -> CheckRecord {
    let rec = CheckRecord::reported(name, LOC_COMMUTATION, kappa.re, Some(KAPPA_STATED), residual);
    if residual > tol {
        // a grade-dependent coefficient is a genuine failure
        let mut r = rec.with_notes(format!("kappa not grade-consistent: fit residual {residual:e}"));
        r.status = crate::report::Status::Fail;
        r.tolerance = tol;
        r
    } else {
        rec.with_notes(format!(
            "measured kappa = {:.15} (imag {:.1e}) from the operator definitions; stated value {KAPPA_STATED}",
            kappa.re, kappa.im
        ))
    }
}

/// Norms of `b_phi: k -> k-1`, `b*_phi: k-1 -> k` and `n_phi: k -> k` between
/// symmetric subspaces.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormMeasurement {
    pub annihilation: f64,
    pub creation: f64,
    pub number: f64,
    pub ladder_bound: f64,
    pub number_bound: f64,
}

pub fn measure_norms(fock: &BosonicFock, stack: &GramStack, phi: &Element, k: usize) -> Result<NormMeasurement> {
    if k == 0 || k > fock.params().truncation {
        return Err(Error::InvalidParameter(format!("norm grade must be in 1..=N, got {k}")));
    }
    let alg = fock.params().algebra();
    let g0 = fock.params().gamma0;
    let compress = |t: DMatrix<C64>, out: usize, inp: usize| stack.isometry(out).adjoint() * t * stack.isometry(inp);
    let ann = compress(fock.block(&GradedOperator::annihilation(phi.clone()), k)?, k - 1, k);
    let cre = compress(fock.block(&GradedOperator::creation(phi.clone()), k - 1)?, k, k - 1);
    let num = compress(fock.block(&GradedOperator::number(phi.clone()), k)?, k, k);
    let (gk, gk1) = (stack.compressed(k), stack.compressed(k - 1));
    let kf = k as f64;
    Ok(NormMeasurement {
        annihilation: linalg::operator_norm(&ann, &gk, &gk1),
        creation: linalg::operator_norm(&cre, &gk1, &gk),
        number: linalg::operator_norm(&num, &gk, &gk),
        ladder_bound: (2.0 * kf).sqrt() * (g0.sqrt() * alg.l2_norm(phi) + (kf - 1.0) * alg.linf_norm(phi)),
        number_bound: kf * alg.linf_norm(phi),
    })
}

pub fn check_norm_estimates(
    fock: &BosonicFock,
    stack: &GramStack,
    phi: &Element,
    k: usize,
    tol: f64,
) -> Result<Vec<CheckRecord>> {
    let m = measure_norms(fock, stack, phi, k)?;
    Ok(vec![
        CheckRecord::bound(format!("b norm grade {k}"), LOC_NORMS, m.annihilation, m.ladder_bound, tol),
        CheckRecord::bound(format!("b* norm grade {k}"), LOC_NORMS, m.creation, m.ladder_bound, tol),
        CheckRecord::bound(format!("n norm grade {k}"), LOC_NORMS, m.number, m.number_bound, tol),
    ])
}

/// Smallest eigenvalue of the symmetric-subspace Gram over all grades.
pub fn min_symmetric_eigenvalue(stack: &GramStack) -> f64 {
    (0..=stack.top())
        .map(|k| linalg::min_eigenvalue(&stack.compressed(k)))
        .fold(f64::INFINITY, f64::min)
}

pub const POSITIVITY_FLOOR: f64 = -1e-10;

/// Positivity is asserted for commutative algebras and only reported for
/// matrix algebras, where it is an open question.
pub fn check_positivity(fock: &BosonicFock, stack: &GramStack) -> CheckRecord {
    let min = min_symmetric_eigenvalue(stack);
    let rec = CheckRecord::at_least("bosonic.positivity", LOC_POSITIVITY, min, POSITIVITY_FLOOR);
    if fock.params().algebra().is_commutative() {
        rec
    } else {
        rec.demote_to_reported()
            .with_notes(format!("noncommutative algebra: minimum symmetric eigenvalue {min:e}"))
    }
}

/// Max deviation of the ordered-partition sum from the set-partition sum,
/// relative to the largest entry.
pub fn gram_fast_path_deviation(fock: &BosonicFock, k: usize) -> Result<f64> {
    let lit = fock.gram_literal(k)?;
    let fast = fock.gram_fast(k)?;
    Ok(linalg::max_abs(&(&lit - &fast)) / linalg::max_abs(&lit).max(f64::MIN_POSITIVE))
}

/// Random words in `b`, `b*`, `n` applied to the vacuum stay symmetric.
pub fn symmetry_defect<R: Rng + ?Sized>(fock: &BosonicFock, rng: &mut R, words: usize) -> Result<f64> {
    let alg = fock.params().algebra();
    let top = fock.params().truncation;
    let d = fock.dim();
    let mut worst = 0.0f64;
    for _ in 0..words {
        let mut v = GradedVector::vacuum(d, top);
        let len = rng.gen_range(1..=2 * top);
        for _ in 0..len {
            let sym = alg.random_element(rng);
            let kind = match rng.gen_range(0..3) {
                0 => OpKind::Creation,
                1 => OpKind::Annihilation,
                _ => OpKind::Number,
            };
            let op = GradedOperator { kind, symbol: sym };
            if kind == OpKind::Creation && !v.is_grade_zero(top) {
                continue;
            }
            v = fock.apply(&op, &v)?;
        }
        for k in 2..=top {
            for p in 0..k - 1 {
                let swapped = fock::swap_adjacent(v.grade(k), d, k, p);
                let scale = linalg::max_abs_vec(v.grade(k)).max(1.0);
                let defect = v
                    .grade(k)
                    .iter()
                    .zip(&swapped)
                    .map(|(a, b)| (a - b).norm())
                    .fold(0.0, f64::max);
                worst = worst.max(defect / scale);
            }
        }
    }
    Ok(worst)
}
