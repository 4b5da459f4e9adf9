//! Normal ordering for the abstract relation algebras generated by `b_phi`,
//! `b*_phi`, `n_phi` and optionally the linear `a_phi`, `a*_phi`.
//!
//! Relations (coefficients from a [`RelationTable`]):
//!
//! ```text
//! b_phi b*_psi = b*_psi b_phi + c1 g0 <phi, psi> + c2 n_{phi* psi}
//! n_phi b*_psi = b*_psi n_phi + kappa b*_{phi psi}
//! b_psi n_phi  = n_phi b_psi + kappa b_{phi* psi}
//! a_phi a*_psi = a*_psi a_phi + <phi, psi>
//! a_phi b*_psi = b*_psi a_phi + 2 a*_{phi* psi}
//! b_phi a*_psi = a*_psi b_phi + 2 a_{phi psi*}
//! ```
//!
//! and operators of the same class (creators, number operators, annihilators)
//! commute. A word is normal when creators precede number operators precede
//! annihilators, each class sorted by `(kind, symbol id)`.
//!
//! Every rule replaces an out-of-order adjacent pair by the swapped pair (one
//! inversion fewer, same length) plus strictly shorter words, so the pair
//! `(length, inversions)` decreases lexicographically.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::ToPrimitive;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::algebra::{Element, StatefulAlgebra, C64};
use crate::error::{Error, Result};
use crate::report::CheckRecord;

pub const LOC_NORMAL: &str = "quadratic white noise relations: normal form of operator products";
pub const LOC_COMMUTING: &str = "classical processes: Q_s forms a commuting family";
pub const LOC_FACTOR: &str = "classical processes: independent increments";
pub const LOC_GAMMA: &str = "classical processes: gamma distributions from Q_2";
pub const LOC_NOGO: &str = "quadratic and linear white noise: no Fock representation below the lengthscale";
pub const LOC_ENGINE_FOCK: &str = "bosonic Fock representation: vacuum expectations of operator words";

/// Longest word accepted by the engine.
pub const MAX_WORD_LEN: usize = 14;

/// Relative tolerance for identifying two symbols.
pub const SYMBOL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Kind {
    BStar,
    AStar,
    N,
    B,
    A,
}

impl Kind {
    fn class(self) -> u8 {
        match self {
            Kind::BStar | Kind::AStar => 0,
            Kind::N => 1,
            Kind::B | Kind::A => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Kind::BStar => "b*",
            Kind::AStar => "a*",
            Kind::N => "n",
            Kind::B => "b",
            Kind::A => "a",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "b*" | "bstar" => Ok(Kind::BStar),
            "a*" | "astar" => Ok(Kind::AStar),
            "n" => Ok(Kind::N),
            "b" => Ok(Kind::B),
            "a" => Ok(Kind::A),
            _ => Err(Error::InvalidParameter(format!("unknown generator kind {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Letter {
    pub kind: Kind,
    pub symbol: Element,
}

impl Letter {
    pub fn new(kind: Kind, symbol: Element) -> Self {
        Self { kind, symbol }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OperatorWord {
    pub coeff: C64,
    pub letters: Vec<Letter>,
}

impl OperatorWord {
    pub fn new(coeff: C64, letters: Vec<Letter>) -> Self {
        Self { coeff, letters }
    }

    pub fn scalar(coeff: C64) -> Self {
        Self {
            coeff,
            letters: Vec::new(),
        }
    }
}

/// `Q_s(phi) = b*_phi + b_{phi*} + s n_phi`.
pub fn q_process(alg: &StatefulAlgebra, s: f64, phi: &Element) -> Vec<OperatorWord> {
    let one = C64::new(1.0, 0.0);
    vec![
        OperatorWord::new(one, vec![Letter::new(Kind::BStar, phi.clone())]),
        OperatorWord::new(one, vec![Letter::new(Kind::B, alg.star(phi))]),
        OperatorWord::new(C64::new(s, 0.0), vec![Letter::new(Kind::N, phi.clone())]),
    ]
}

pub fn poly_mul(a: &[OperatorWord], b: &[OperatorWord]) -> Vec<OperatorWord> {
    let mut out = Vec::with_capacity(a.len() * b.len());
    for x in a {
        for y in b {
            let mut letters = x.letters.clone();
            letters.extend(y.letters.iter().cloned());
            out.push(OperatorWord::new(x.coeff * y.coeff, letters));
        }
    }
    out
}

pub fn poly_pow(p: &[OperatorWord], m: usize) -> Vec<OperatorWord> {
    (0..m).fold(vec![OperatorWord::scalar(C64::new(1.0, 0.0))], |acc, _| poly_mul(&acc, p))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelationTable {
    pub gamma0: f64,
    pub c1: f64,
    pub c2: f64,
    pub kappa: f64,
}

impl RelationTable {
    /// The abstract relations: `(c1, c2, kappa) = (2, 4, 2)`.
    pub fn abstract_relations(gamma0: f64) -> Self {
        Self {
            gamma0,
            c1: 2.0,
            c2: 4.0,
            kappa: 2.0,
        }
    }

    /// Coefficients realized by the bosonic Fock representation.
    pub fn fock(gamma0: f64, kappa: f64) -> Self {
        Self {
            gamma0,
            c1: 2.0,
            c2: 4.0,
            kappa,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Gen {
    pub kind: Kind,
    pub sym: usize,
}

impl Gen {
    fn key(self) -> (u8, Kind, usize) {
        (self.kind.class(), self.kind, self.sym)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    Leftmost,
    Rightmost,
    Random(u64),
}

/// A linear combination of normal words.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalForm {
    pub terms: BTreeMap<Vec<Gen>, C64>,
    pub steps: u64,
}

impl NormalForm {
    /// Coefficient of the empty word, which is the vacuum expectation.
    pub fn scalar(&self) -> C64 {
        self.terms.get(&Vec::new()).copied().unwrap_or(C64::new(0.0, 0.0))
    }

    pub fn max_coeff(&self) -> f64 {
        self.terms.values().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Largest coefficient difference over the union of the two supports.
    pub fn distance(&self, other: &NormalForm) -> f64 {
        let zero = C64::new(0.0, 0.0);
        self.terms
            .keys()
            .chain(other.terms.keys())
            .map(|k| {
                (self.terms.get(k).copied().unwrap_or(zero) - other.terms.get(k).copied().unwrap_or(zero)).norm()
            })
            .fold(0.0, f64::max)
    }

    pub fn is_normal(&self) -> bool {
        self.terms.keys().all(|w| inversions(w) == 0)
    }
}

fn inversions(w: &[Gen]) -> usize {
    let mut n = 0;
    for i in 0..w.len() {
        for j in i + 1..w.len() {
            if w[i].key() > w[j].key() {
                n += 1;
            }
        }
    }
    n
}

/// Normal-ordering engine over one backing algebra. Symbols are interned up to
/// [`SYMBOL_TOL`] so that equal products computed in different association
/// orders share an id.
#[derive(Debug, Clone)]
pub struct Engine {
    alg: StatefulAlgebra,
    table: RelationTable,
    symbols: Vec<Element>,
}

impl Engine {
    pub fn new(alg: StatefulAlgebra, table: RelationTable) -> Self {
        Self {
            alg,
            table,
            symbols: Vec::new(),
        }
    }

    pub fn algebra(&self) -> &StatefulAlgebra {
        &self.alg
    }

    pub fn table(&self) -> &RelationTable {
        &self.table
    }

    pub fn symbol(&self, id: usize) -> &Element {
        &self.symbols[id]
    }

    pub fn intern(&mut self, x: &Element) -> usize {
        let scale = x.max_abs().max(1.0);
        for (i, s) in self.symbols.iter().enumerate() {
            let diff = s.coords().iter().zip(x.coords()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
            if diff <= SYMBOL_TOL * scale {
                return i;
            }
        }
        self.symbols.push(x.clone());
        self.symbols.len() - 1
    }

    fn gen(&mut self, kind: Kind, x: &Element) -> Option<Gen> {
        if x.is_zero() {
            None
        } else {
            Some(Gen {
                kind,
                sym: self.intern(x),
            })
        }
    }

    /// Rewrites the out-of-order pair `(l, r)` into `(coefficient, replacement)`
    /// terms; `None` replacements are dropped because a symbol vanished.
    fn rule(&mut self, l: Gen, r: Gen) -> Result<Vec<(C64, Vec<Gen>)>> {
        let one = C64::new(1.0, 0.0);
        let mut out = vec![(one, vec![r, l])];
        if l.kind.class() == r.kind.class() {
            return Ok(out);
        }
        let (x, y) = (self.symbols[l.sym].clone(), self.symbols[r.sym].clone());
        let alg = self.alg.clone();
        let t = self.table;
        let push = |out: &mut Vec<(C64, Vec<Gen>)>, c: C64, g: Option<Gen>| {
            if let Some(g) = g {
                out.push((c, vec![g]));
            }
        };
        match (l.kind, r.kind) {
            (Kind::B, Kind::BStar) => {
                let s = alg.inner(&x, &y) * (t.c1 * t.gamma0);
                if s != C64::new(0.0, 0.0) {
                    out.push((s, Vec::new()));
                }
                let g = self.gen(Kind::N, &alg.mul(&alg.star(&x), &y));
                push(&mut out, C64::new(t.c2, 0.0), g);
            }
            (Kind::N, Kind::BStar) => {
                let g = self.gen(Kind::BStar, &alg.mul(&x, &y));
                push(&mut out, C64::new(t.kappa, 0.0), g);
            }
            (Kind::B, Kind::N) => {
                let g = self.gen(Kind::B, &alg.mul(&alg.star(&y), &x));
                push(&mut out, C64::new(t.kappa, 0.0), g);
            }
            (Kind::A, Kind::AStar) => {
                let s = alg.inner(&x, &y);
                if s != C64::new(0.0, 0.0) {
                    out.push((s, Vec::new()));
                }
            }
            (Kind::A, Kind::BStar) => {
                let g = self.gen(Kind::AStar, &alg.mul(&alg.star(&x), &y));
                push(&mut out, C64::new(2.0, 0.0), g);
            }
            (Kind::B, Kind::AStar) => {
                let g = self.gen(Kind::A, &alg.mul(&x, &alg.star(&y)));
                push(&mut out, C64::new(2.0, 0.0), g);
            }
            (a, b) => {
                return Err(Error::NoRule {
                    left: a.name().into(),
                    right: b.name().into(),
                })
            }
        }
        Ok(out)
    }

    /// Interns a polynomial; words containing a zero symbol are dropped.
    pub fn encode(&mut self, words: &[OperatorWord]) -> Result<BTreeMap<Vec<Gen>, C64>> {
        let mut map = BTreeMap::new();
        'words: for w in words {
            if w.letters.len() > MAX_WORD_LEN {
                return Err(Error::TooLarge {
                    what: "operator word length",
                    n: w.letters.len(),
                    cap: MAX_WORD_LEN,
                });
            }
            let mut gens = Vec::with_capacity(w.letters.len());
            for l in &w.letters {
                if l.symbol.len() != self.alg.dim() {
                    return Err(Error::DimensionMismatch {
                        expected: self.alg.dim(),
                        got: l.symbol.len(),
                    });
                }
                match self.gen(l.kind, &l.symbol) {
                    Some(g) => gens.push(g),
                    None => continue 'words,
                }
            }
            *map.entry(gens).or_insert(C64::new(0.0, 0.0)) += w.coeff;
        }
        Ok(map)
    }

    pub fn normal_order(&mut self, words: &[OperatorWord], strategy: Strategy) -> Result<NormalForm> {
        let pending = self.encode(words)?;
        self.normal_order_gens(pending, strategy)
    }

    pub fn normal_order_gens(&mut self, mut pending: BTreeMap<Vec<Gen>, C64>, strategy: Strategy) -> Result<NormalForm> {
        let bound: u64 = pending
            .keys()
            .map(|w| 4u64.saturating_pow(w.len() as u32))
            .fold(0u64, |a, b| a.saturating_add(b));
        let mut rng = match strategy {
            Strategy::Random(seed) => Some(ChaCha8Rng::seed_from_u64(seed)),
            _ => None,
        };
        let mut done: BTreeMap<Vec<Gen>, C64> = BTreeMap::new();
        let mut steps = 0u64;
        while let Some((word, coeff)) = pending.pop_first() {
            if coeff == C64::new(0.0, 0.0) {
                continue;
            }
            let spots: Vec<usize> = (0..word.len().saturating_sub(1))
                .filter(|&i| word[i].key() > word[i + 1].key())
                .collect();
            if spots.is_empty() {
                *done.entry(word).or_insert(C64::new(0.0, 0.0)) += coeff;
                continue;
            }
            let i = match (strategy, rng.as_mut()) {
                (Strategy::Leftmost, _) => spots[0],
                (Strategy::Rightmost, _) => spots[spots.len() - 1],
                (Strategy::Random(_), Some(r)) => spots[r.gen_range(0..spots.len())],
                _ => unreachable!(),
            };
            steps += 1;
            if steps > bound {
                return Err(Error::StepLimit(bound));
            }
            for (c, middle) in self.rule(word[i], word[i + 1])? {
                let mut w = Vec::with_capacity(word.len());
                w.extend_from_slice(&word[..i]);
                w.extend(middle);
                w.extend_from_slice(&word[i + 2..]);
                *pending.entry(w).or_insert(C64::new(0.0, 0.0)) += coeff * c;
            }
        }
        done.retain(|_, c| *c != C64::new(0.0, 0.0));
        Ok(NormalForm { terms: done, steps })
    }

    pub fn vacuum_moment(&mut self, words: &[OperatorWord]) -> Result<C64> {
        Ok(self.normal_order(words, Strategy::Leftmost)?.scalar())
    }

    /// `tau(Q_s(phi)^m)`.
    pub fn q_moment(&mut self, s: f64, phi: &Element, m: usize) -> Result<C64> {
        let q = q_process(&self.alg.clone(), s, phi);
        self.vacuum_moment(&poly_pow(&q, m))
    }

    pub fn render(&self, nf: &NormalForm) -> String {
        let mut parts = Vec::new();
        for (w, c) in &nf.terms {
            let word: Vec<String> = w.iter().map(|g| format!("{}[s{}]", g.kind.name(), g.sym)).collect();
            parts.push(format!("({:.6e}{:+.6e}i) {}", c.re, c.im, word.join(" ")).trim_end().to_string());
        }
        if parts.is_empty() {
            "0".into()
        } else {
            parts.join(" + ")
        }
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// `[Q_s(phi), Q_s(psi)]` and, for real symbols, `[Q_s(phi), Q_s(phi)*]` in
/// normal form; returns the largest surviving coefficient relative to the
/// size of the products.
pub fn commuting_family_residual(engine: &mut Engine, s: f64, phi: &Element, psi: &Element) -> Result<f64> {
    let alg = engine.algebra().clone();
    let (qp, qq) = (q_process(&alg, s, phi), q_process(&alg, s, psi));
    let mut words = poly_mul(&qp, &qq);
    for w in poly_mul(&qq, &qp) {
        words.push(OperatorWord::new(-w.coeff, w.letters));
    }
    let nf = engine.normal_order(&words, Strategy::Leftmost)?;
    let scale = engine.normal_order(&poly_mul(&qp, &qq), Strategy::Leftmost)?.max_coeff().max(1.0);
    let mut res = nf.max_coeff() / scale;
    let real = |x: &Element| x.coords().iter().all(|c| c.im == 0.0);
    if real(phi) {
        // Q_s(phi)* = b_phi + b*_{phi*} + s n_{phi*}
        let star = q_process(&alg, s, &alg.star(phi));
        let mut words = poly_mul(&qp, &star);
        for w in poly_mul(&star, &qp) {
            words.push(OperatorWord::new(-w.coeff, w.letters));
        }
        res = res.max(engine.normal_order(&words, Strategy::Leftmost)?.max_coeff() / scale);
    }
    Ok(res)
}

pub fn check_commuting_family(engine: &mut Engine, s: f64, phi: &Element, psi: &Element, tol: f64) -> Result<CheckRecord> {
    let res = commuting_family_residual(engine, s, phi, psi)?;
    Ok(CheckRecord::residual("classical.commuting_family", LOC_COMMUTING, res, tol))
}

fn disjoint(a: &Element, b: &Element) -> bool {
    a.coords()
        .iter()
        .zip(b.coords())
        .all(|(x, y)| *x == C64::new(0.0, 0.0) || *y == C64::new(0.0, 0.0))
}

/// `|tau(Q(phi1)^p Q(phi2)^q) - tau(Q(phi1)^p) tau(Q(phi2)^q)|`, relative.
pub fn factorization_residual(engine: &mut Engine, s: f64, phi1: &Element, phi2: &Element, p: usize, q: usize) -> Result<f64> {
    if !engine.algebra().is_commutative() {
        return Err(Error::NotCommutative);
    }
    if !disjoint(phi1, phi2) {
        return Err(Error::OverlappingSupport);
    }
    let alg = engine.algebra().clone();
    let (a, b) = (q_process(&alg, s, phi1), q_process(&alg, s, phi2));
    let joint = engine.vacuum_moment(&poly_mul(&poly_pow(&a, p), &poly_pow(&b, q)))?;
    let split = engine.q_moment(s, phi1, p)? * engine.q_moment(s, phi2, q)?;
    Ok((joint - split).norm() / split.norm().max(1.0))
}

pub fn check_factorization<R: Rng + ?Sized>(
    engine: &mut Engine,
    s: f64,
    max_total: usize,
    rng: &mut R,
    tol: f64,
) -> Result<CheckRecord> {
    let alg = engine.algebra().clone();
    let d = alg.dim();
    if d < 2 {
        return Err(Error::InvalidParameter("factorization needs at least two points".into()));
    }
    let split = |x: Element, lo: bool| {
        let coords = (0..d)
            .map(|i| if (i < d / 2) == lo { x.coords()[i] } else { C64::new(0.0, 0.0) })
            .collect();
        Element::from_coords(coords)
    };
    let phi1 = split(alg.random_hermitian(rng), true);
    let phi2 = split(alg.random_hermitian(rng), false);
    let mut res = 0.0f64;
    for p in 0..=max_total {
        for q in 0..=max_total - p {
            res = res.max(factorization_residual(engine, s, &phi1, &phi2, p, q)?);
        }
    }
    Ok(CheckRecord::residual("classical.factorization", LOC_FACTOR, res, tol))
}

/// Raw moments of the gamma law, `theta^m alpha (alpha + 1) .. (alpha + m - 1)`.
pub fn gamma_raw_moment(alpha: f64, theta: f64, m: usize) -> f64 {
    (0..m).map(|i| theta * (alpha + i as f64)).product()
}

/// `E[(scale Q_2(chi) + t)^m]` with `chi` the indicator of a set of measure `t`.
pub fn shifted_moment(engine: &mut Engine, t: f64, scale: f64, m: usize) -> Result<f64> {
    let chi = engine.algebra().one();
    let mut acc = 0.0;
    for j in 0..=m {
        let binom = crate::combinatorics::binomial(m as u64, j as u64).to_f64().unwrap_or(f64::NAN);
        let tau = engine.q_moment(2.0, &chi, j)?;
        acc += binom * scale.powi(j as i32) * tau.re * t.powi((m - j) as i32);
    }
    Ok(acc)
}

/// A one-point engine: the single point carries mass `t`, so the unit is the
/// indicator `chi` with `mu(chi^k) = t`.
pub fn indicator_engine(t: f64, table: RelationTable) -> Result<Engine> {
    Ok(Engine::new(StatefulAlgebra::functions_with_weights(vec![t])?, table))
}

pub fn gamma_moment_records(gamma0: f64, t: f64, m_max: usize, table: RelationTable, tol: f64) -> Result<Vec<CheckRecord>> {
    let mut engine = indicator_engine(t, RelationTable { gamma0, ..table })?;
    let (alpha, theta) = (gamma0 * t / 2.0, 2.0 / gamma0);
    let tag = format!("g0={gamma0},t={t}");
    let mut matched = Vec::new();
    let mut literal_worst = 0.0f64;
    for m in 1..=m_max {
        let expect = gamma_raw_moment(alpha, theta, m);
        let got = shifted_moment(&mut engine, t, 1.0 / gamma0, m)?;
        matched.push(CheckRecord::value(format!("m={m}"), LOC_GAMMA, got, expect, tol));
        let lit = shifted_moment(&mut engine, t, gamma0, m)?;
        literal_worst = literal_worst.max((lit - expect).abs() / expect.abs().max(1.0));
    }
    let matched = crate::report::worst(&format!("classical.gamma.{tag}"), LOC_GAMMA, matched);
    let literal = CheckRecord::reported(format!("classical.gamma_literal_scaling.{tag}"), LOC_GAMMA, literal_worst, Some(0.0), literal_worst)
        .with_notes(if literal_worst <= tol {
            "g0 Q_2 + t also matches the gamma moments at this g0".to_string()
        } else {
            "g0 Q_2 + t does not match the gamma moments; (1/g0) Q_2 + t does".to_string()
        });
    Ok(vec![matched, literal])
}

/// `2 c^2 l^2 + 4 c l + 2 g0 l`.
pub fn nogo_closed_form(gamma0: f64, l: f64, c: f64) -> f64 {
    2.0 * c * c * l * l + 4.0 * c * l + 2.0 * gamma0 * l
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NogoCertificate {
    pub value: f64,
    pub symbolic: f64,
    pub minimizer: f64,
    pub min_value: f64,
}

/// Squared norm of `(c a*_chi a*_chi + b*_chi) Omega` for the indicator `chi`
/// of a set of measure `l`, evaluated in closed form and by normal ordering
/// `(c a a + b)(c a* a* + b*)` with the mixed relations.
pub fn nogo_certificate(gamma0: f64, l: f64, c: f64) -> Result<NogoCertificate> {
    if !(gamma0 > 0.0 && l > 0.0) {
        return Err(Error::InvalidParameter("gamma0 and l must be positive".into()));
    }
    let mut engine = indicator_engine(l, RelationTable::abstract_relations(gamma0))?;
    let chi = engine.algebra().one();
    let cc = C64::new(c, 0.0);
    let left = vec![
        OperatorWord::new(cc, vec![Letter::new(Kind::A, chi.clone()), Letter::new(Kind::A, chi.clone())]),
        OperatorWord::new(C64::new(1.0, 0.0), vec![Letter::new(Kind::B, chi.clone())]),
    ];
    let right = vec![
        OperatorWord::new(cc, vec![Letter::new(Kind::AStar, chi.clone()), Letter::new(Kind::AStar, chi.clone())]),
        OperatorWord::new(C64::new(1.0, 0.0), vec![Letter::new(Kind::BStar, chi.clone())]),
    ];
    let symbolic = engine.vacuum_moment(&poly_mul(&left, &right))?;
    Ok(NogoCertificate {
        value: nogo_closed_form(gamma0, l, c),
        symbolic: symbolic.re,
        minimizer: -1.0 / l,
        min_value: 2.0 * gamma0 * l - 2.0,
    })
}

/// A random word over `kinds` with symbols drawn from `pool`.
pub fn random_word<R: Rng + ?Sized>(pool: &[Element], kinds: &[Kind], len: usize, rng: &mut R) -> OperatorWord {
    let letters = (0..len)
        .map(|_| Letter::new(kinds[rng.gen_range(0..kinds.len())], pool[rng.gen_range(0..pool.len())].clone()))
        .collect();
    OperatorWord::new(C64::new(1.0, 0.0), letters)
}

/// Normal-orders `words` random words of length `1..=max_len` over
/// `{b, b*, n}`; returns the largest ratio of steps taken to the step bound.
/// Exceeding the bound is an error.
pub fn termination_stress<R: Rng + ?Sized>(engine: &mut Engine, words: usize, max_len: usize, pool_size: usize, rng: &mut R) -> Result<f64> {
    let alg = engine.algebra().clone();
    let pool: Vec<Element> = (0..pool_size).map(|_| alg.random_element(rng)).collect();
    let mut worst_ratio = 0.0f64;
    for _ in 0..words {
        let len = rng.gen_range(1..=max_len);
        let w = random_word(&pool, &[Kind::B, Kind::BStar, Kind::N], len, rng);
        let nf = engine.normal_order(std::slice::from_ref(&w), Strategy::Leftmost)?;
        if !nf.is_normal() {
            return Err(Error::InvalidParameter("rewrite ended on a non-normal word".into()));
        }
        worst_ratio = worst_ratio.max(nf.steps as f64 / 4f64.powi(len as i32));
    }
    Ok(worst_ratio)
}

/// Largest coefficient distance between the leftmost normal form and those
/// from `strategies` other orders, relative to the largest coefficient.
pub fn strategy_spread(engine: &mut Engine, word: &[OperatorWord], strategies: usize, seed: u64) -> Result<f64> {
    let base = engine.normal_order(word, Strategy::Leftmost)?;
    let scale = base.max_coeff().max(1.0);
    let mut spread = base.distance(&engine.normal_order(word, Strategy::Rightmost)?) / scale;
    for i in 0..strategies as u64 {
        let other = engine.normal_order(word, Strategy::Random(seed.wrapping_add(i)))?;
        spread = spread.max(base.distance(&other) / scale);
    }
    Ok(spread)
}

/// Vacuum moments of random words in `{b, b*, n}` from the engine against the
/// bosonic Fock matrices; `engine` should carry the coefficients realized by
/// the representation.
pub fn engine_fock_residual<R: Rng + ?Sized>(
    engine: &mut Engine,
    fock: &crate::bosonic::BosonicFock,
    trials: usize,
    max_len: usize,
    rng: &mut R,
) -> Result<f64> {
    use crate::fock::{FockSpace, GradedOperator};
    let alg = engine.algebra().clone();
    let mut res = 0.0f64;
    for _ in 0..trials {
        let len = rng.gen_range(0..=max_len);
        let pool: Vec<Element> = (0..3).map(|_| alg.random_element(rng)).collect();
        // bias towards words that can return to the vacuum
        let w = random_word(&pool, &[Kind::B, Kind::B, Kind::BStar, Kind::BStar, Kind::N], len, rng);
        let ops: Vec<GradedOperator> = w
            .letters
            .iter()
            .map(|l| match l.kind {
                Kind::BStar => GradedOperator::creation(l.symbol.clone()),
                Kind::B => GradedOperator::annihilation(l.symbol.clone()),
                _ => GradedOperator::number(l.symbol.clone()),
            })
            .collect();
        let a = engine.vacuum_moment(std::slice::from_ref(&w))?;
        let b = fock.vacuum_expectation(&ops)?;
        res = res.max((a - b).norm() / b.norm().max(1.0));
    }
    Ok(res)
}
