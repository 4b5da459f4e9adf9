//! Finite-dimensional *-algebras carrying a state.
//!
//! Two families are provided: the commutative algebra of complex functions on
//! a finite weighted point set (state = integration against the weights), and
//! the full matrix algebra `M_n(C)` with the normalized trace. Elements are
//! stored as coordinate vectors in a fixed basis: delta functions for the
//! function algebra, matrix units `E_ij` (row-major) for matrices.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;

pub type C64 = Complex64;

/// A finite set of labelled atoms with strictly positive masses.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointMeasureSpace {
    points: Vec<String>,
    weights: Vec<f64>,
    total_mass: f64,
}

impl PointMeasureSpace {
    pub fn new(points: Vec<String>, weights: Vec<f64>) -> Result<Self> {
        if points.len() != weights.len() {
            return Err(Error::DimensionMismatch {
                expected: points.len(),
                got: weights.len(),
            });
        }
        if weights.is_empty() {
            return Err(Error::InvalidParameter("empty point set".into()));
        }
        if let Some(w) = weights.iter().find(|w| !(**w > 0.0) || !w.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "weights must be strictly positive, got {w}"
            )));
        }
        let total_mass = weights.iter().sum();
        Ok(Self {
            points,
            weights,
            total_mass,
        })
    }

    /// Points labelled `x0, x1, ...`.
    pub fn from_weights(weights: Vec<f64>) -> Result<Self> {
        let points = (0..weights.len()).map(|i| format!("x{i}")).collect();
        Self::new(points, weights)
    }

    pub fn points(&self) -> &[String] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn total_mass(&self) -> f64 {
        self.total_mass
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum AlgebraKind {
    Functions(PointMeasureSpace),
    /// `M_n(C)` with the normalized trace.
    Matrices { n: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StateKind {
    WeightedSum,
    NormalizedTrace,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StateFunctional {
    pub kind: StateKind,
    pub tracial: bool,
}

/// Coordinates of an algebra element in the algebra's basis.
#[derive(Debug, Clone, PartialEq)]
pub struct Element(Vec<C64>);

impl Element {
    pub fn from_coords(coords: Vec<C64>) -> Self {
        Element(coords)
    }

    pub fn from_real(values: &[f64]) -> Self {
        Element(values.iter().map(|&v| C64::new(v, 0.0)).collect())
    }

    pub fn coords(&self) -> &[C64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn scale(&self, c: C64) -> Element {
        Element(self.0.iter().map(|x| x * c).collect())
    }

    pub fn add(&self, other: &Element) -> Element {
        Element(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().map(|x| x.norm()).fold(0.0, f64::max)
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|x| *x == C64::new(0.0, 0.0))
    }

    /// Indices of nonzero coordinates.
    pub fn support(&self) -> Vec<usize> {
        self.0
            .iter()
            .enumerate()
            .filter(|(_, x)| x.norm() != 0.0)
            .map(|(i, _)| i)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatefulAlgebra {
    kind: AlgebraKind,
}

impl StatefulAlgebra {
    pub fn functions(space: PointMeasureSpace) -> Self {
        Self {
            kind: AlgebraKind::Functions(space),
        }
    }

    pub fn functions_with_weights(weights: Vec<f64>) -> Result<Self> {
        Ok(Self::functions(PointMeasureSpace::from_weights(weights)?))
    }

    pub fn matrices(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("matrix dimension must be >= 1".into()));
        }
        Ok(Self {
            kind: AlgebraKind::Matrices { n },
        })
    }

    pub fn kind(&self) -> &AlgebraKind {
        &self.kind
    }

    /// Dimension of the algebra as a vector space.
    pub fn dim(&self) -> usize {
        match &self.kind {
            AlgebraKind::Functions(s) => s.len(),
            AlgebraKind::Matrices { n } => n * n,
        }
    }

    pub fn is_commutative(&self) -> bool {
        match &self.kind {
            AlgebraKind::Functions(_) => true,
            AlgebraKind::Matrices { n } => *n == 1,
        }
    }

    pub fn state_functional(&self) -> StateFunctional {
        match &self.kind {
            AlgebraKind::Functions(_) => StateFunctional {
                kind: StateKind::WeightedSum,
                tracial: true,
            },
            AlgebraKind::Matrices { .. } => StateFunctional {
                kind: StateKind::NormalizedTrace,
                tracial: true,
            },
        }
    }

    pub fn weights(&self) -> Option<&[f64]> {
        match &self.kind {
            AlgebraKind::Functions(s) => Some(s.weights()),
            AlgebraKind::Matrices { .. } => None,
        }
    }

    pub fn zero(&self) -> Element {
        Element(vec![C64::new(0.0, 0.0); self.dim()])
    }

    pub fn one(&self) -> Element {
        match &self.kind {
            AlgebraKind::Functions(s) => Element(vec![C64::new(1.0, 0.0); s.len()]),
            AlgebraKind::Matrices { n } => {
                let mut v = vec![C64::new(0.0, 0.0); n * n];
                for i in 0..*n {
                    v[i * n + i] = C64::new(1.0, 0.0);
                }
                Element(v)
            }
        }
    }

    pub fn basis(&self, i: usize) -> Element {
        let mut v = vec![C64::new(0.0, 0.0); self.dim()];
        v[i] = C64::new(1.0, 0.0);
        Element(v)
    }

    pub fn element(&self, coords: Vec<C64>) -> Result<Element> {
        let x = Element(coords);
        self.check(&x)?;
        Ok(x)
    }

    fn check(&self, x: &Element) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        Ok(())
    }

    /// Algebra product `x * y`.
    pub fn multiply(&self, x: &Element, y: &Element) -> Result<Element> {
        self.check(x)?;
        self.check(y)?;
        Ok(self.mul(x, y))
    }

    pub(crate) fn mul(&self, x: &Element, y: &Element) -> Element {
        debug_assert_eq!(x.len(), self.dim());
        debug_assert_eq!(y.len(), self.dim());
        match &self.kind {
            AlgebraKind::Functions(_) => Element(x.0.iter().zip(&y.0).map(|(a, b)| a * b).collect()),
            AlgebraKind::Matrices { n } => {
                let n = *n;
                let mut out = vec![C64::new(0.0, 0.0); n * n];
                for i in 0..n {
                    for k in 0..n {
                        let a = x.0[i * n + k];
                        if a == C64::new(0.0, 0.0) {
                            continue;
                        }
                        for j in 0..n {
                            out[i * n + j] += a * y.0[k * n + j];
                        }
                    }
                }
                Element(out)
            }
        }
    }

    /// Product of a sequence of elements, left to right. The empty product is 1.
    pub fn product<'a>(&self, xs: impl IntoIterator<Item = &'a Element>) -> Element {
        let mut acc: Option<Element> = None;
        for x in xs {
            acc = Some(match acc {
                None => x.clone(),
                Some(a) => self.mul(&a, x),
            });
        }
        acc.unwrap_or_else(|| self.one())
    }

    pub fn star(&self, x: &Element) -> Element {
        match &self.kind {
            AlgebraKind::Functions(_) => Element(x.0.iter().map(|a| a.conj()).collect()),
            AlgebraKind::Matrices { n } => {
                let n = *n;
                let mut out = vec![C64::new(0.0, 0.0); n * n];
                for i in 0..n {
                    for j in 0..n {
                        out[j * n + i] = x.0[i * n + j].conj();
                    }
                }
                Element(out)
            }
        }
    }

    /// The state `mu(x)`.
    pub fn state(&self, x: &Element) -> C64 {
        match &self.kind {
            AlgebraKind::Functions(s) => x
                .0
                .iter()
                .zip(s.weights())
                .map(|(a, w)| a * *w)
                .sum(),
            AlgebraKind::Matrices { n } => {
                let n = *n;
                let tr: C64 = (0..n).map(|i| x.0[i * n + i]).sum();
                tr / n as f64
            }
        }
    }

    /// `mu(x* y)`, the GNS inner product.
    pub fn inner(&self, x: &Element, y: &Element) -> C64 {
        self.state(&self.mul(&self.star(x), y))
    }

    pub fn l2_norm(&self, x: &Element) -> f64 {
        self.inner(x, x).re.max(0.0).sqrt()
    }

    /// Norm of left multiplication by `x` on the GNS space `<y, z> = mu(y* z)`.
    pub fn linf_norm(&self, x: &Element) -> f64 {
        match &self.kind {
            AlgebraKind::Functions(_) => x.max_abs(),
            AlgebraKind::Matrices { .. } => {
                let d = self.dim();
                let left = DMatrix::from_fn(d, d, |a, b| self.mul(x, &self.basis(b)).0[a]);
                linalg::operator_norm(&left, &self.gns_gram(), &self.gns_gram())
            }
        }
    }

    /// The literal `sup_{|y|_2 = 1} |mu(x y)|`. By Riesz this is `|x*|_2`.
    pub fn linf_literal(&self, x: &Element) -> f64 {
        self.l2_norm(&self.star(x))
    }

    /// Gram matrix `mu(e_a* e_b)` of the basis under the GNS form.
    pub fn gns_gram(&self) -> DMatrix<C64> {
        let d = self.dim();
        DMatrix::from_fn(d, d, |a, b| self.inner(&self.basis(a), &self.basis(b)))
    }

    /// Coordinates uniform in the unit square of the complex plane.
    pub fn random_element<R: Rng + ?Sized>(&self, rng: &mut R) -> Element {
        Element(
            (0..self.dim())
                .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect(),
        )
    }

    /// Self-adjoint random element.
    pub fn random_hermitian<R: Rng + ?Sized>(&self, rng: &mut R) -> Element {
        let x = self.random_element(rng);
        x.add(&self.star(&x)).scale(C64::new(0.5, 0.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn diag2(a: f64, b: f64) -> Element {
        Element::from_real(&[a, 0.0, 0.0, b])
    }

    #[test]
    fn pointwise_product() {
        let alg = StatefulAlgebra::functions_with_weights(vec![1.0, 1.0]).unwrap();
        let f = Element::from_real(&[1.0, 2.0]);
        let g = Element::from_real(&[3.0, 0.0]);
        assert_eq!(alg.multiply(&f, &g).unwrap(), Element::from_real(&[3.0, 0.0]));
        assert_eq!(alg.multiply(&f, &alg.one()).unwrap(), f);
    }

    #[test]
    fn diagonal_matrix_product() {
        let alg = StatefulAlgebra::matrices(2).unwrap();
        let p = alg.multiply(&diag2(1.0, 2.0), &diag2(3.0, 4.0)).unwrap();
        assert_eq!(p, diag2(3.0, 8.0));
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let alg = StatefulAlgebra::functions_with_weights(vec![1.0, 1.0]).unwrap();
        let bad = Element::from_real(&[1.0, 2.0, 3.0]);
        assert!(matches!(
            alg.multiply(&bad, &alg.one()),
            Err(Error::DimensionMismatch { expected: 2, got: 3 })
        ));
    }

    #[test]
    fn state_values() {
        let alg = StatefulAlgebra::functions_with_weights(vec![0.5, 0.5]).unwrap();
        assert_eq!(alg.state(&Element::from_real(&[2.0, 4.0])), c(3.0));
        let alg = StatefulAlgebra::functions_with_weights(vec![1.0, 1.0]).unwrap();
        assert_eq!(alg.state(&alg.one()), c(2.0));
        let mat = StatefulAlgebra::matrices(2).unwrap();
        assert_eq!(mat.state(&diag2(1.0, 3.0)), c(2.0));
        assert_eq!(mat.state(&mat.one()), c(1.0));
    }

    #[test]
    fn norms() {
        let alg = StatefulAlgebra::functions_with_weights(vec![1.0, 1.0]).unwrap();
        assert!((alg.l2_norm(&alg.one()) - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(alg.linf_norm(&Element::from_real(&[3.0, -1.0])), 3.0);
        let mat = StatefulAlgebra::matrices(2).unwrap();
        assert!((mat.linf_norm(&mat.one()) - 1.0).abs() < 1e-12);
        // operator norm of [[0,2],[0,0]] is 2
        let nil = Element::from_real(&[0.0, 2.0, 0.0, 0.0]);
        assert!((mat.linf_norm(&nil) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn literal_linf_collapses_to_l2_for_functions() {
        let alg = StatefulAlgebra::functions_with_weights(vec![0.3, 0.7]).unwrap();
        let f = Element::from_real(&[3.0, -1.0]);
        assert!((alg.linf_literal(&f) - alg.l2_norm(&f)).abs() < 1e-14);
    }

    #[test]
    fn rejects_nonpositive_weights() {
        assert!(PointMeasureSpace::from_weights(vec![1.0, 0.0]).is_err());
        assert!(PointMeasureSpace::from_weights(vec![-1.0]).is_err());
        let s = PointMeasureSpace::from_weights(vec![0.25, 1.5]).unwrap();
        assert_eq!(s.total_mass(), 1.75);
    }

    #[test]
    fn random_pairs_satisfy_state_axioms() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for alg in [
            StatefulAlgebra::functions_with_weights(vec![0.2, 1.3, 0.9]).unwrap(),
            StatefulAlgebra::matrices(3).unwrap(),
        ] {
            let tracial = alg.state_functional().tracial;
            for _ in 0..50 {
                let x = alg.random_element(&mut rng);
                let y = alg.random_element(&mut rng);
                assert_eq!(alg.star(&alg.star(&x)), x);
                assert!(alg.inner(&x, &x).re >= 0.0);
                assert!((alg.state(&alg.star(&x)) - alg.state(&x).conj()).norm() < 1e-14);
                // Cauchy-Schwarz
                assert!(alg.inner(&x, &y).norm() <= alg.l2_norm(&x) * alg.l2_norm(&y) + 1e-12);
                // submultiplicativity
                let xy = alg.mul(&x, &y);
                assert!(alg.l2_norm(&xy) <= alg.linf_norm(&x) * alg.l2_norm(&y) + 1e-10);
                if tracial {
                    let d = alg.state(&xy) - alg.state(&alg.mul(&y, &x));
                    assert!(d.norm() < 1e-12);
                }
                if alg.is_commutative() {
                    assert_eq!(xy, alg.mul(&y, &x));
                }
            }
        }
    }
}
