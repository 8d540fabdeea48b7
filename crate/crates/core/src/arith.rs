//! Trace fields, boundedness of Galois conjugates, and arithmeticity verdicts.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::numberfield::{Embedding, FieldElement, FinitePlace, NumberField};
use crate::poly::{is_prime, QPoly};
use crate::presentation::{GroupPresentation, Mat};

/// Word enumeration refuses to visit more words than this.
pub const WORD_BUDGET: u64 = 1_000_000;

/// Tolerance on the reality and range of `tr^2/det` under an embedding.
pub const BOUNDED_TOL: f64 = 1e-8;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ArithError {
    #[error("word enumeration would visit {0} words (budget {WORD_BUDGET})")]
    BudgetExceeded(u64),
    #[error("no primitive element found for the trace field")]
    PrimitiveElementFailure,
    #[error("word length must be at least {0}")]
    WordLength(usize),
}

/// A word in the generators; letter `k` is generator `k/2`, inverted when odd.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Word(pub Vec<u16>);

impl Word {
    pub fn label(&self, labels: &[String]) -> String {
        if self.0.is_empty() {
            return "1".into();
        }
        self.0
            .iter()
            .map(|&l| {
                let name = &labels[(l / 2) as usize];
                if l % 2 == 1 {
                    format!("{name}^-1")
                } else {
                    name.clone()
                }
            })
            .collect::<Vec<_>>()
            .join(" ")
    }

    pub fn evaluate(&self, gens: &GroupPresentation) -> Mat {
        let mut m = Mat::identity_like(&gens.field.one());
        for &l in &self.0 {
            m = m.compose(&letter(gens, l));
        }
        m
    }
}

fn letter(gens: &GroupPresentation, l: u16) -> Mat {
    let g = &gens.generators[(l / 2) as usize];
    if l % 2 == 1 {
        g.adjugate()
    } else {
        g.clone()
    }
}

/// Number of reduced words of length `1..=len` in `k` generators and inverses.
pub fn reduced_word_count(k: usize, len: usize) -> u64 {
    let k = k as u64;
    let mut total = 0u64;
    let mut level = 2 * k;
    for _ in 0..len {
        total = total.saturating_add(level);
        level = level.saturating_mul((2 * k).saturating_sub(1));
    }
    total
}

/// Visit reduced words in order of length, with their matrices. The visitor
/// returns `false` to stop early.
pub fn for_each_word(
    gens: &GroupPresentation,
    max_len: usize,
    mut visit: impl FnMut(&Word, &Mat) -> bool,
) -> Result<(), ArithError> {
    let count = reduced_word_count(gens.len(), max_len);
    if count > WORD_BUDGET {
        return Err(ArithError::BudgetExceeded(count));
    }
    let letters: Vec<Mat> = (0..2 * gens.len() as u16).map(|l| letter(gens, l)).collect();
    let mut level: Vec<(Word, Mat)> = vec![(Word(Vec::new()), Mat::identity_like(&gens.field.one()))];
    for _ in 0..max_len {
        let mut next = Vec::with_capacity(level.len() * letters.len());
        for (w, m) in &level {
            for (l, g) in letters.iter().enumerate() {
                let l = l as u16;
                if let Some(&last) = w.0.last() {
                    if last ^ 1 == l {
                        continue;
                    }
                }
                let mut nw = w.clone();
                nw.0.push(l);
                let nm = m.compose(g);
                if !visit(&nw, &nm) {
                    return Ok(());
                }
                next.push((nw, nm));
            }
        }
        level = next;
    }
    Ok(())
}

/// The projectively invariant trace `tr(g)^2 / det(g)`.
pub fn normalized_trace(g: &Mat) -> FieldElement {
    let t = g.trace();
    t.mul(&t).mul(&g.det().inverse().expect("invertible"))
}

/// `Q(traces)` inside the ambient field, with a primitive element.
#[derive(Clone, Debug)]
pub struct TraceField {
    pub field: NumberField,
    /// Primitive element, as an element of the ambient field.
    pub theta: FieldElement,
    pub ambient: NumberField,
}

impl TraceField {
    pub fn degree(&self) -> usize {
        self.field.degree()
    }

    /// Coordinates of an ambient element in the basis `1, θ, θ^2, ...`, if it
    /// lies in the trace field.
    pub fn express(&self, x: &FieldElement) -> Option<FieldElement> {
        let c = solve_in_span(&self.theta, self.degree(), x)?;
        Some(self.field.element(c))
    }

    /// Whether the field is `Q(√d)` for a squarefree integer `d`.
    pub fn is_quadratic_of(&self, d: i64) -> bool {
        if self.degree() != 2 {
            return false;
        }
        let f = self.field.minpoly().monic();
        let (b, c) = (f.coeff(1), f.coeff(0));
        let disc = &b * &b - BigRational::from_integer(4.into()) * c;
        let ratio = disc / BigRational::from_integer(d.into());
        is_rational_square(&ratio)
    }
}

fn is_rational_square(q: &BigRational) -> bool {
    if q.is_negative() {
        return false;
    }
    let sq = |n: &BigInt| {
        let r = n.sqrt();
        &r * &r == *n
    };
    sq(q.numer()) && sq(q.denom())
}

/// Solve `x = Σ c_k θ^k`, `k < d`, exactly.
fn solve_in_span(theta: &FieldElement, d: usize, x: &FieldElement) -> Option<Vec<BigRational>> {
    let n = theta.field().degree();
    let mut cols = Vec::with_capacity(d);
    let mut pw = theta.field().one();
    for _ in 0..d {
        cols.push(pad(pw.coords(), n));
        pw = pw.mul(theta);
    }
    let rhs = pad(x.coords(), n);
    // augmented n × (d+1)
    let mut m: Vec<Vec<BigRational>> = (0..n)
        .map(|i| {
            let mut row: Vec<BigRational> = cols.iter().map(|c| c[i].clone()).collect();
            row.push(rhs[i].clone());
            row
        })
        .collect();
    let mut piv_cols = Vec::new();
    let mut r = 0;
    for c in 0..d {
        let Some(p) = (r..n).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let inv = m[r][c].recip();
        for v in m[r].iter_mut() {
            *v *= &inv;
        }
        for i in 0..n {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                for j in 0..=d {
                    let t = &f * &m[r][j];
                    m[i][j] -= t;
                }
            }
        }
        piv_cols.push(c);
        r += 1;
    }
    if m[r..].iter().any(|row| !row[d].is_zero()) {
        return None;
    }
    let mut sol = vec![BigRational::zero(); d];
    for (i, &c) in piv_cols.iter().enumerate() {
        sol[c] = m[i][d].clone();
    }
    Some(sol)
}

fn pad(mut v: Vec<BigRational>, n: usize) -> Vec<BigRational> {
    v.resize(n, BigRational::zero());
    v
}

fn degree_of(x: &FieldElement) -> usize {
    x.minimal_polynomial().degree().unwrap_or(0)
}

fn contains(theta: &FieldElement, x: &FieldElement) -> bool {
    solve_in_span(theta, degree_of(theta), x).is_some()
}

/// Traces of all words of length at most 3.
pub fn short_traces(gens: &GroupPresentation) -> Vec<FieldElement> {
    let mut out: Vec<FieldElement> = Vec::new();
    for_each_word(gens, 3, |_, m| {
        let t = m.trace();
        if !out.contains(&t) {
            out.push(t);
        }
        true
    })
    .expect("length-3 enumeration is small");
    out
}

/// The field generated by traces of words of length at most 3.
pub fn trace_field(gens: &GroupPresentation) -> Result<TraceField, ArithError> {
    let ambient = gens.field.clone();
    let mut theta = ambient.zero();
    for t in short_traces(gens) {
        if contains(&theta, &t) {
            continue;
        }
        let mut found = None;
        for c in 1..=32i64 {
            let cand = theta.add(&t.scale(&BigRational::from_integer(c.into())));
            if contains(&cand, &t) && contains(&cand, &theta) {
                found = Some(cand);
                break;
            }
        }
        theta = found.ok_or(ArithError::PrimitiveElementFailure)?;
    }
    let minpoly = if theta.is_rational() {
        QPoly::x()
    } else {
        theta.minimal_polynomial()
    };
    let theta = if theta.is_rational() { ambient.zero() } else { theta };
    let field = NumberField::new(minpoly).map_err(|_| ArithError::PrimitiveElementFailure)?;
    let target = ambient.identity_embedding().apply(&theta);
    let idx = (0..field.degree())
        .min_by(|&i, &j| {
            (field.roots()[i] - target)
                .norm()
                .partial_cmp(&(field.roots()[j] - target).norm())
                .unwrap()
        })
        .unwrap();
    Ok(TraceField {
        field: field.with_default_root(idx),
        theta,
        ambient,
    })
}

/// All complex embeddings of the field (conjugate pairs linked).
pub fn galois_embeddings(field: &NumberField) -> Vec<Embedding> {
    field.embeddings()
}

/// Where boundedness is tested.
#[derive(Clone, Debug)]
pub enum Place {
    Archimedean(Embedding),
    Finite(FinitePlace),
    /// Some place above `p` that the field's factorisation data cannot name.
    AbovePrime(u64),
}

impl Place {
    pub fn describe(&self) -> String {
        match self {
            Place::Archimedean(e) => format!(
                "archimedean #{} (x -> {:.10}{:+.10}i)",
                e.index, e.root.re, e.root.im
            ),
            Place::Finite(p) => p.describe(),
            Place::AbovePrime(p) => format!("a place above {p}"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Witness {
    pub place: Place,
    pub word: Word,
    pub word_label: String,
    /// Exact `tr^2/det` of the word.
    pub trace_sq: FieldElement,
    /// Its image at an Archimedean place, when relevant.
    pub value: Option<Complex64>,
}

impl Witness {
    /// Recompute the offending quantity from the presentation.
    pub fn recheck(&self, gens: &GroupPresentation) -> bool {
        let q = normalized_trace(&self.word.evaluate(gens));
        if q != self.trace_sq {
            return false;
        }
        match &self.place {
            Place::Archimedean(e) => !in_compact_range(e.apply(&q)),
            Place::Finite(p) => p.valuation(&q).is_some_and(|v| v < 0),
            Place::AbovePrime(_) => !q.is_algebraic_integer(),
        }
    }
}

#[derive(Clone, Debug)]
pub enum BoundednessReport {
    Unbounded(Witness),
    BoundedUpTo(usize),
}

impl BoundednessReport {
    pub fn is_unbounded(&self) -> bool {
        matches!(self, BoundednessReport::Unbounded(_))
    }
}

/// `tr^2/det` of an element of a compact form lies in `[0, 4]`.
fn in_compact_range(z: Complex64) -> bool {
    z.im.abs() <= BOUNDED_TOL && z.re >= -BOUNDED_TOL && z.re <= 4.0 + BOUNDED_TOL
}

/// Search reduced words up to `word_len` for one whose trace leaves the
/// compact range (Archimedean) or has negative valuation (finite).
pub fn embedding_bounded(
    place: &Place,
    gens: &GroupPresentation,
    word_len: usize,
) -> Result<BoundednessReport, ArithError> {
    if word_len < 1 {
        return Err(ArithError::WordLength(1));
    }
    let mut found = None;
    for_each_word(gens, word_len, |w, m| {
        let q = normalized_trace(m);
        let (bad, value) = match place {
            Place::Archimedean(e) => {
                let z = e.apply(&q);
                (!in_compact_range(z), Some(z))
            }
            Place::Finite(p) => (p.valuation(&q).is_some_and(|v| v < 0), None),
            Place::AbovePrime(_) => (!q.is_algebraic_integer(), None),
        };
        if bad {
            found = Some(Witness {
                place: place.clone(),
                word: w.clone(),
                word_label: w.label(&gens.labels),
                trace_sq: q,
                value,
            });
        }
        !bad
    })?;
    Ok(match found {
        Some(w) => BoundednessReport::Unbounded(w),
        None => BoundednessReport::BoundedUpTo(word_len),
    })
}

#[derive(Clone, Debug)]
pub enum ArithmeticityVerdict {
    /// No witness among words of length at most `word_len`.
    Arithmetic { word_len: usize, trace_field: String },
    NonArithmetic(Box<Witness>),
    Inconclusive { word_len: usize, reason: String },
}

impl ArithmeticityVerdict {
    pub fn name(&self) -> &'static str {
        match self {
            ArithmeticityVerdict::Arithmetic { .. } => "Arithmetic",
            ArithmeticityVerdict::NonArithmetic(_) => "NonArithmetic",
            ArithmeticityVerdict::Inconclusive { .. } => "Inconclusive",
        }
    }
}

fn smallest_denominator_prime(q: &FieldElement) -> Option<u64> {
    let cp = q.charpoly();
    let den = cp
        .coeffs()
        .iter()
        .fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
    let den: u64 = den.try_into().ok()?;
    (2..=den).find(|&p| den.is_multiple_of(p) && is_prime(p))
}

fn finite_witness_place(q: &FieldElement) -> Place {
    let Some(p) = smallest_denominator_prime(q) else {
        return Place::AbovePrime(0);
    };
    if let Ok(places) = q.field().finite_places(p) {
        if let Some(pl) = places.into_iter().find(|pl| pl.valuation(q).is_some_and(|v| v < 0)) {
            return Place::Finite(pl);
        }
    }
    Place::AbovePrime(p)
}

/// Non-identity Archimedean embeddings of the ambient field, as seen by the
/// trace field (embeddings agreeing with the identity place on `θ` skipped).
fn nonidentity_embeddings(tf: &TraceField) -> Vec<Embedding> {
    let id = tf.ambient.identity_embedding();
    let t0 = id.apply(&tf.theta);
    let tol = 1e-8 * (1.0 + t0.norm());
    let mut seen: Vec<Complex64> = Vec::new();
    let mut out = Vec::new();
    for e in tf.ambient.embeddings() {
        let t = e.apply(&tf.theta);
        if (t - t0).norm() <= tol || (t - t0.conj()).norm() <= tol {
            continue;
        }
        if seen.iter().any(|s| (t - s).norm() <= tol || (t - s.conj()).norm() <= tol) {
            continue;
        }
        seen.push(t);
        out.push(e);
    }
    out
}

/// Integral traces and bounded non-identity conjugates, up to `word_len`.
pub fn arithmeticity_test(gens: &GroupPresentation, word_len: usize) -> Result<ArithmeticityVerdict, ArithError> {
    if word_len < 3 {
        return Err(ArithError::WordLength(3));
    }
    let tf = trace_field(gens)?;
    let mut witness = None;
    let res = for_each_word(gens, word_len, |w, m| {
        let q = normalized_trace(m);
        if q.is_algebraic_integer() {
            return true;
        }
        witness = Some(Witness {
            place: finite_witness_place(&q),
            word: w.clone(),
            word_label: w.label(&gens.labels),
            trace_sq: q,
            value: None,
        });
        false
    });
    if let Err(ArithError::BudgetExceeded(n)) = res {
        return Ok(ArithmeticityVerdict::Inconclusive {
            word_len,
            reason: format!("{n} words exceed the budget"),
        });
    }
    if let Some(w) = witness {
        return Ok(ArithmeticityVerdict::NonArithmetic(Box::new(w)));
    }
    for e in nonidentity_embeddings(&tf) {
        if let BoundednessReport::Unbounded(w) = embedding_bounded(&Place::Archimedean(e), gens, word_len)? {
            return Ok(ArithmeticityVerdict::NonArithmetic(Box::new(w)));
        }
    }
    Ok(ArithmeticityVerdict::Arithmetic {
        word_len,
        trace_field: tf.field.minpoly().to_string(),
    })
}
