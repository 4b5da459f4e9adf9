//! Graded tensor vectors, operator symbols, and the machinery shared by the
//! truncated Fock spaces.
//!
//! Grade `k` is stored as a dense coefficient array over the simple-tensor
//! basis `e_{i_1} ⊗ ... ⊗ e_{i_k}` of the algebra, indexed row-major (the first
//! slot is the most significant digit). Grade 0 is the vacuum line.

use nalgebra::DMatrix;

use crate::algebra::{Element, C64};
use crate::error::{Error, Result};

pub fn grade_len(dim: usize, k: usize) -> usize {
    dim.pow(k as u32)
}

/// Largest grade dimension for which dense matrices are formed.
pub const MAX_DENSE: usize = 4096;

pub fn dense_guard(dim: usize, k: usize) -> Result<usize> {
    match dim.checked_pow(k as u32) {
        Some(n) if n <= MAX_DENSE => Ok(n),
        other => Err(Error::TooLarge {
            what: "grade dimension",
            n: other.unwrap_or(usize::MAX),
            cap: MAX_DENSE,
        }),
    }
}

pub fn decode(mut idx: usize, dim: usize, k: usize) -> Vec<usize> {
    let mut out = vec![0; k];
    for slot in (0..k).rev() {
        out[slot] = idx % dim;
        idx /= dim;
    }
    out
}

pub fn encode(digits: &[usize], dim: usize) -> usize {
    digits.iter().fold(0, |acc, &d| acc * dim + d)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradedVector {
    dim: usize,
    grades: Vec<Vec<C64>>,
}

impl GradedVector {
    pub fn zero(dim: usize, cap: usize) -> Self {
        Self {
            dim,
            grades: (0..=cap).map(|k| vec![C64::new(0.0, 0.0); grade_len(dim, k)]).collect(),
        }
    }

    pub fn vacuum(dim: usize, cap: usize) -> Self {
        let mut v = Self::zero(dim, cap);
        v.grades[0][0] = C64::new(1.0, 0.0);
        v
    }

    /// A vector concentrated in grade `k`.
    pub fn homogeneous(dim: usize, cap: usize, k: usize, coeffs: Vec<C64>) -> Result<Self> {
        if k > cap {
            return Err(Error::GradeCap { grade: k, cap });
        }
        if coeffs.len() != grade_len(dim, k) {
            return Err(Error::DimensionMismatch {
                expected: grade_len(dim, k),
                got: coeffs.len(),
            });
        }
        let mut v = Self::zero(dim, cap);
        v.grades[k] = coeffs;
        Ok(v)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn cap(&self) -> usize {
        self.grades.len() - 1
    }

    pub fn grade(&self, k: usize) -> &[C64] {
        &self.grades[k]
    }

    pub fn grade_mut(&mut self, k: usize) -> &mut [C64] {
        &mut self.grades[k]
    }

    pub fn vacuum_component(&self) -> C64 {
        self.grades[0][0]
    }

    pub fn is_grade_zero(&self, k: usize) -> bool {
        self.grades[k].iter().all(|x| *x == C64::new(0.0, 0.0))
    }

    pub fn add_scaled(&mut self, other: &GradedVector, c: C64) {
        for (a, b) in self.grades.iter_mut().zip(&other.grades) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += c * y;
            }
        }
    }

    pub fn max_abs_diff(&self, other: &GradedVector) -> f64 {
        self.grades
            .iter()
            .zip(&other.grades)
            .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).norm()))
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum OpKind {
    Creation,
    Annihilation,
    Number,
}

impl OpKind {
    pub fn shift(self) -> isize {
        match self {
            OpKind::Creation => 1,
            OpKind::Annihilation => -1,
            OpKind::Number => 0,
        }
    }
}

/// `b*_psi`, `b_psi` or `n_psi`.
#[derive(Debug, Clone, PartialEq)]
pub struct GradedOperator {
    pub kind: OpKind,
    pub symbol: Element,
}

impl GradedOperator {
    pub fn creation(symbol: Element) -> Self {
        Self {
            kind: OpKind::Creation,
            symbol,
        }
    }

    pub fn annihilation(symbol: Element) -> Self {
        Self {
            kind: OpKind::Annihilation,
            symbol,
        }
    }

    pub fn number(symbol: Element) -> Self {
        Self {
            kind: OpKind::Number,
            symbol,
        }
    }
}

/// A truncated Fock space: a grade cap, a Gram form per grade and an action of
/// the three operator kinds on each grade.
pub trait FockSpace {
    fn dim(&self) -> usize;

    fn truncation(&self) -> usize;

    /// Gram matrix `<e_I, e_J>` of grade `k` on the full tensor basis.
    fn gram(&self, k: usize) -> Result<DMatrix<C64>>;

    /// Action of `op` on a grade-`k` coefficient array; the output lives in
    /// grade `k + shift`. Annihilation and number operators kill grade 0.
    fn apply_grade(&self, op: &GradedOperator, k: usize, v: &[C64]) -> Result<Vec<C64>>;

    fn apply(&self, op: &GradedOperator, v: &GradedVector) -> Result<GradedVector> {
        let cap = self.truncation();
        if op.kind == OpKind::Creation && !v.is_grade_zero(cap) {
            return Err(Error::GradeCap { grade: cap + 1, cap });
        }
        let mut out = GradedVector::zero(self.dim(), cap);
        for k in 0..=cap {
            if v.is_grade_zero(k) {
                continue;
            }
            let target = k as isize + op.kind.shift();
            if target < 0 {
                continue;
            }
            let w = self.apply_grade(op, k, v.grade(k))?;
            out.grades[target as usize] = w;
        }
        Ok(out)
    }

    /// Matrix of `op` from grade `k` to grade `k + shift`.
    fn block(&self, op: &GradedOperator, k: usize) -> Result<DMatrix<C64>> {
        let target = k as isize + op.kind.shift();
        if target < 0 {
            return Ok(DMatrix::zeros(0, grade_len(self.dim(), k)));
        }
        let rows = dense_guard(self.dim(), target as usize)?;
        let cols = dense_guard(self.dim(), k)?;
        let mut m = DMatrix::zeros(rows, cols);
        let mut unit = vec![C64::new(0.0, 0.0); cols];
        for j in 0..cols {
            unit[j] = C64::new(1.0, 0.0);
            let w = self.apply_grade(op, k, &unit)?;
            for (i, x) in w.into_iter().enumerate() {
                m[(i, j)] = x;
            }
            unit[j] = C64::new(0.0, 0.0);
        }
        Ok(m)
    }

    /// Apply a product of operators (rightmost first) to a vector.
    fn apply_word(&self, word: &[GradedOperator], v: &GradedVector) -> Result<GradedVector> {
        word.iter().rev().try_fold(v.clone(), |acc, op| self.apply(op, &acc))
    }

    /// `<Omega, X Omega>` for the product `X` of `word`. Components that can no
    /// longer return to the vacuum are dropped, so grades never exceed
    /// `len / 2`.
    fn vacuum_expectation(&self, word: &[GradedOperator]) -> Result<C64> {
        let cap = self.truncation();
        if word.len() > 2 * cap {
            return Err(Error::GradeCap {
                grade: word.len().div_ceil(2),
                cap,
            });
        }
        let mut grades: Vec<Vec<C64>> = vec![vec![C64::new(1.0, 0.0)]];
        for (pos, op) in word.iter().enumerate().rev() {
            // `pos` operators remain to the left of this one
            let mut next: Vec<Vec<C64>> = vec![Vec::new(); pos + 1];
            for (k, v) in grades.iter().enumerate() {
                if v.is_empty() {
                    continue;
                }
                let target = k as isize + op.kind.shift();
                if target < 0 || target as usize > pos {
                    continue;
                }
                let w = self.apply_grade(op, k, v)?;
                let slot = &mut next[target as usize];
                if slot.is_empty() {
                    *slot = w;
                } else {
                    for (a, b) in slot.iter_mut().zip(w) {
                        *a += b;
                    }
                }
            }
            grades = next;
            if grades.iter().all(Vec::is_empty) {
                return Ok(C64::new(0.0, 0.0));
            }
        }
        Ok(grades[0].first().copied().unwrap_or(C64::new(0.0, 0.0)))
    }
}

/// A linear combination of operator words; the empty word is the identity.
pub type Polynomial = Vec<(C64, Vec<GradedOperator>)>;

/// `<Omega, P_1 P_2 .. P_m Omega>` for a product of operator polynomials.
/// As in [`FockSpace::vacuum_expectation`], components that cannot return to
/// the vacuum through the operators still to the left are dropped.
pub fn vacuum_expectation_product<F: FockSpace + ?Sized>(space: &F, factors: &[Polynomial]) -> Result<C64> {
    let cap = space.truncation();
    let lens: Vec<usize> = factors
        .iter()
        .map(|f| f.iter().map(|(_, w)| w.len()).max().unwrap_or(0))
        .collect();
    let total: usize = lens.iter().sum();
    if total > 2 * cap {
        return Err(Error::GradeCap {
            grade: total.div_ceil(2),
            cap,
        });
    }
    let zero = C64::new(0.0, 0.0);
    let mut state: Vec<Vec<C64>> = vec![Vec::new(); cap + 1];
    state[0] = vec![C64::new(1.0, 0.0)];
    for (i, factor) in factors.iter().enumerate().rev() {
        let left_before: usize = lens[..i].iter().sum();
        let mut next: Vec<Vec<C64>> = vec![Vec::new(); cap + 1];
        for (c, word) in factor {
            if *c == zero {
                continue;
            }
            let mut s = state.clone();
            for (p, op) in word.iter().enumerate().rev() {
                let left = left_before + p;
                let mut out: Vec<Vec<C64>> = vec![Vec::new(); cap + 1];
                for (k, v) in s.iter().enumerate() {
                    if v.is_empty() {
                        continue;
                    }
                    let target = k as isize + op.kind.shift();
                    if target < 0 || target as usize > left {
                        continue;
                    }
                    let w = space.apply_grade(op, k, v)?;
                    accumulate(&mut out[target as usize], w, C64::new(1.0, 0.0));
                }
                s = out;
            }
            for (k, v) in s.into_iter().enumerate() {
                if !v.is_empty() {
                    accumulate(&mut next[k], v, *c);
                }
            }
        }
        state = next;
    }
    Ok(state[0].first().copied().unwrap_or(zero))
}

fn accumulate(slot: &mut Vec<C64>, w: Vec<C64>, c: C64) {
    if slot.is_empty() {
        *slot = w.into_iter().map(|x| x * c).collect();
    } else {
        for (a, b) in slot.iter_mut().zip(w) {
            *a += b * c;
        }
    }
}

/// Isometry onto the symmetric tensors of grade `k`: one orthonormal column per
/// multiset of basis indices.
pub fn symmetric_isometry(dim: usize, k: usize) -> DMatrix<C64> {
    let n = grade_len(dim, k);
    let mut reps: Vec<usize> = Vec::new();
    let mut rep_of = vec![0usize; n];
    let mut lookup = std::collections::HashMap::new();
    for idx in 0..n {
        let mut digits = decode(idx, dim, k);
        digits.sort_unstable();
        let key = encode(&digits, dim);
        let col = *lookup.entry(key).or_insert_with(|| {
            reps.push(key);
            reps.len() - 1
        });
        rep_of[idx] = col;
    }
    let mut counts = vec![0usize; reps.len()];
    for &c in &rep_of {
        counts[c] += 1;
    }
    let mut s = DMatrix::zeros(n, reps.len());
    for (idx, &c) in rep_of.iter().enumerate() {
        s[(idx, c)] = C64::new(1.0 / (counts[c] as f64).sqrt(), 0.0);
    }
    s
}

/// Swap tensor slots `p` and `p + 1` of a grade-`k` array.
pub fn swap_adjacent(v: &[C64], dim: usize, k: usize, p: usize) -> Vec<C64> {
    let mut out = vec![C64::new(0.0, 0.0); v.len()];
    for (idx, x) in v.iter().enumerate() {
        let mut d = decode(idx, dim, k);
        d.swap(p, p + 1);
        out[encode(&d, dim)] = *x;
    }
    out
}

/// Hermitian form `u^H g v`.
pub fn form(g: &DMatrix<C64>, u: &[C64], v: &[C64]) -> C64 {
    let mut acc = C64::new(0.0, 0.0);
    for (i, ui) in u.iter().enumerate() {
        if *ui == C64::new(0.0, 0.0) {
            continue;
        }
        let row: C64 = v.iter().enumerate().map(|(j, vj)| g[(i, j)] * vj).sum();
        acc += ui.conj() * row;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn encode_decode_round_trip() {
        for idx in 0..27 {
            assert_eq!(encode(&decode(idx, 3, 3), 3), idx);
        }
        assert_eq!(decode(5, 2, 3), vec![1, 0, 1]);
    }

    #[test]
    fn symmetric_isometry_gives_orthogonal_projector() {
        for (d, k) in [(2, 3), (3, 2), (1, 4), (2, 0)] {
            let s = symmetric_isometry(d, k);
            let sts = s.adjoint() * &s;
            let id = DMatrix::<C64>::identity(s.ncols(), s.ncols());
            assert!(crate::linalg::max_abs(&(sts - id)) < 1e-14);
            let p = &s * s.adjoint();
            assert!(crate::linalg::max_abs(&(&p * &p - &p)) < 1e-14);
            assert!(crate::linalg::max_abs(&(p.adjoint() - &p)) < 1e-14);
        }
        // multisets of size 3 from 2 letters
        assert_eq!(symmetric_isometry(2, 3).ncols(), 4);
    }
}
