//! Number fields `Q(x)/(f)`, exact elements in the power basis, complex
//! embeddings and finite places.

use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::poly::{self, vp_int, vp_rat, QPoly};
use crate::scalar::{rat_to_f64, Field};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FieldError {
    #[error("minimal polynomial {0} is not irreducible over Q")]
    Reducible(String),
    #[error("minimal polynomial must have degree at least 1")]
    Degenerate,
    #[error("cannot parse field element `{0}`: {1}")]
    Parse(String, String),
    #[error("unsupported place above {p}: {reason}")]
    UnsupportedPlace { p: u64, reason: String },
    #[error("{0} is not prime")]
    NotPrime(u64),
}

struct FieldData {
    /// Monic defining polynomial used for reduction.
    modulus: QPoly,
    /// Primitive integer form of the user-supplied polynomial.
    original: QPoly,
    roots: Vec<Complex64>,
    default_root: usize,
}

/// A number field given by an irreducible polynomial over Q. Cheap to clone.
#[derive(Clone)]
pub struct NumberField {
    inner: Arc<FieldData>,
}

impl fmt::Debug for NumberField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "NumberField({})", self.inner.original)
    }
}

impl PartialEq for NumberField {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner)
            || (self.inner.modulus == other.inner.modulus
                && self.inner.default_root == other.inner.default_root)
    }
}

impl NumberField {
    /// Build from a polynomial, checking irreducibility. The identity
    /// embedding is the root with largest imaginary part (then largest real
    /// part).
    pub fn new(minpoly: QPoly) -> Result<Self, FieldError> {
        let deg = minpoly.degree().ok_or(FieldError::Degenerate)?;
        if deg == 0 {
            return Err(FieldError::Degenerate);
        }
        if !minpoly.is_irreducible() {
            return Err(FieldError::Reducible(minpoly.to_string()));
        }
        let original = QPoly::from_bigints(&minpoly.primitive_integer());
        let modulus = minpoly.monic();
        let mut roots = modulus.complex_roots();
        for r in roots.iter_mut() {
            if r.im.abs() < 1e-12 * (1.0 + r.re.abs()) {
                r.im = 0.0;
            }
        }
        roots.sort_by(|a, b| {
            a.re.partial_cmp(&b.re)
                .unwrap()
                .then(a.im.partial_cmp(&b.im).unwrap())
        });
        let default_root = (0..roots.len())
            .max_by(|&i, &j| {
                let (a, b) = (roots[i], roots[j]);
                a.im.partial_cmp(&b.im)
                    .unwrap()
                    .then(a.re.partial_cmp(&b.re).unwrap())
            })
            .unwrap();
        Ok(NumberField {
            inner: Arc::new(FieldData {
                modulus,
                original,
                roots,
                default_root,
            }),
        })
    }

    /// Pick a different root as the identity embedding.
    pub fn with_default_root(&self, index: usize) -> Self {
        assert!(index < self.degree());
        NumberField {
            inner: Arc::new(FieldData {
                modulus: self.inner.modulus.clone(),
                original: self.inner.original.clone(),
                roots: self.inner.roots.clone(),
                default_root: index,
            }),
        }
    }

    pub fn rationals() -> Self {
        NumberField::new(QPoly::x()).unwrap()
    }

    /// Q(i), `x^2 + 1`.
    pub fn gaussian() -> Self {
        NumberField::new(QPoly::from_ints(&[1, 0, 1])).unwrap()
    }

    /// Q(√-3) presented by a primitive sixth root of unity, `x^2 - x + 1`.
    pub fn eisenstein() -> Self {
        NumberField::new(QPoly::from_ints(&[1, -1, 1])).unwrap()
    }

    pub fn degree(&self) -> usize {
        self.inner.modulus.degree().unwrap()
    }

    pub fn minpoly(&self) -> &QPoly {
        &self.inner.original
    }

    pub fn roots(&self) -> &[Complex64] {
        &self.inner.roots
    }

    pub fn default_root_index(&self) -> usize {
        self.inner.default_root
    }

    pub fn default_root(&self) -> Complex64 {
        self.inner.roots[self.inner.default_root]
    }

    /// Whether the defining polynomial is monic with integer coefficients, so
    /// that the generator is an algebraic integer.
    pub fn generator_is_integral(&self) -> bool {
        self.inner.original.lead().is_one()
    }

    pub fn element(&self, coords: Vec<BigRational>) -> FieldElement {
        FieldElement::from_poly(self, QPoly::new(coords))
    }

    pub fn from_int(&self, n: i64) -> FieldElement {
        self.from_rational(BigRational::from_integer(n.into()))
    }

    pub fn from_rational(&self, c: BigRational) -> FieldElement {
        FieldElement::from_poly(self, QPoly::constant(c))
    }

    pub fn generator(&self) -> FieldElement {
        FieldElement::from_poly(self, QPoly::x())
    }

    pub fn zero(&self) -> FieldElement {
        self.from_int(0)
    }

    pub fn one(&self) -> FieldElement {
        self.from_int(1)
    }

    /// A nonzero element with `conj(y) = -y` (the square root of the
    /// discriminant for imaginary quadratic fields).
    pub fn pure_imaginary(&self) -> Option<FieldElement> {
        if self.degree() != 2 || self.roots().iter().all(|r| r.im == 0.0) {
            return None;
        }
        let p1 = self.inner.modulus.coeff(1);
        Some(self.generator().scale(&BigRational::from_integer(2.into())).add(&self.from_rational(p1)))
    }

    /// Parse a polynomial expression in the formal generator `x`.
    pub fn parse_element(&self, s: &str) -> Result<FieldElement, FieldError> {
        let p = crate::presentation::parse_poly_expr(s)
            .map_err(|e| FieldError::Parse(s.to_string(), e))?;
        Ok(FieldElement::from_poly(self, p))
    }

    /// All complex embeddings, one per root, with conjugate pairs linked.
    pub fn embeddings(&self) -> Vec<Embedding> {
        let roots = &self.inner.roots;
        roots
            .iter()
            .enumerate()
            .map(|(i, r)| {
                let real = r.im == 0.0;
                let conjugate = if real {
                    None
                } else {
                    (0..roots.len())
                        .filter(|&j| j != i)
                        .min_by(|&a, &b| {
                            (roots[a] - r.conj())
                                .norm()
                                .partial_cmp(&(roots[b] - r.conj()).norm())
                                .unwrap()
                        })
                };
                Embedding {
                    field: self.clone(),
                    index: i,
                    root: *r,
                    real,
                    conjugate,
                }
            })
            .collect()
    }

    /// The embedding used to view elements as complex numbers.
    pub fn identity_embedding(&self) -> Embedding {
        self.embeddings().swap_remove(self.inner.default_root)
    }

    /// Places above a rational prime that can be described from the
    /// factorisation of the defining polynomial modulo `p`.
    pub fn finite_places(&self, p: u64) -> Result<Vec<FinitePlace>, FieldError> {
        if !poly::is_prime(p) {
            return Err(FieldError::NotPrime(p));
        }
        let n = self.degree();
        if n == 1 {
            return Ok(vec![FinitePlace {
                field: self.clone(),
                p,
                kind: PlaceKind::Split { root: 0 },
            }]);
        }
        if !self.generator_is_integral() {
            return Err(FieldError::UnsupportedPlace {
                p,
                reason: "defining polynomial is not monic integral".into(),
            });
        }
        let c = self.inner.modulus.mod_p(p).ok_or(FieldError::UnsupportedPlace {
            p,
            reason: "defining polynomial does not reduce mod p".into(),
        })?;
        let d = self.inner.modulus.derivative().mod_p(p).unwrap();
        let roots = poly::roots_mod_p(&c, p);
        let simple: Vec<u64> = roots
            .iter()
            .copied()
            .filter(|&r| poly::eval_mod(&d, r, p) != 0)
            .collect();
        if !simple.is_empty() {
            return Ok(simple
                .into_iter()
                .map(|r| FinitePlace {
                    field: self.clone(),
                    p,
                    kind: PlaceKind::Split { root: r },
                })
                .collect());
        }
        if roots.len() == 1 {
            // f = (x - r)^n mod p exactly when the shifted polynomial is x^n
            let r = roots[0];
            let shifted = self
                .inner
                .modulus
                .compose(&QPoly::from_ints(&[r as i64, 1]))
                .mod_p(p)
                .unwrap();
            if shifted[..n].iter().all(|&v| v == 0) {
                return Ok(vec![FinitePlace {
                    field: self.clone(),
                    p,
                    kind: PlaceKind::TotallyRamified { e: n as u32 },
                }]);
            }
        }
        if roots.is_empty() && poly::irreducible_mod_p(&self.inner.modulus, p) == Some(true) {
            return Ok(vec![FinitePlace {
                field: self.clone(),
                p,
                kind: PlaceKind::Inert { f: n as u32 },
            }]);
        }
        Err(FieldError::UnsupportedPlace {
            p,
            reason: "no simple root and not totally ramified or inert".into(),
        })
    }
}

/// An element `sum c_i x^i` reduced modulo the defining polynomial.
#[derive(Clone)]
pub struct FieldElement {
    field: NumberField,
    poly: QPoly,
}

impl fmt::Debug for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.poly)
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.poly)
    }
}

impl PartialEq for FieldElement {
    fn eq(&self, other: &Self) -> bool {
        self.poly == other.poly && self.field == other.field
    }
}

impl Eq for FieldElement {}

impl Hash for FieldElement {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.poly.hash(state);
    }
}

impl FieldElement {
    pub fn from_poly(field: &NumberField, p: QPoly) -> Self {
        let poly = if p.degree().is_some_and(|d| d >= field.degree()) {
            p.rem(&field.inner.modulus)
        } else {
            p
        };
        FieldElement {
            field: field.clone(),
            poly,
        }
    }

    pub fn field(&self) -> &NumberField {
        &self.field
    }

    pub fn same_field(&self, other: &FieldElement) -> bool {
        self.field == other.field
    }

    pub fn as_poly(&self) -> &QPoly {
        &self.poly
    }

    pub fn coords(&self) -> Vec<BigRational> {
        (0..self.field.degree()).map(|i| self.poly.coeff(i)).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.poly.is_zero()
    }

    pub fn is_rational(&self) -> bool {
        self.poly.degree().is_none_or(|d| d == 0)
    }

    pub fn as_rational(&self) -> Option<BigRational> {
        self.is_rational().then(|| self.poly.coeff(0))
    }

    fn check(&self, o: &FieldElement) {
        assert!(
            self.same_field(o),
            "arithmetic between elements of different number fields"
        );
    }

    pub fn add(&self, o: &FieldElement) -> FieldElement {
        self.check(o);
        FieldElement {
            field: self.field.clone(),
            poly: self.poly.add(&o.poly),
        }
    }

    pub fn sub(&self, o: &FieldElement) -> FieldElement {
        self.check(o);
        FieldElement {
            field: self.field.clone(),
            poly: self.poly.sub(&o.poly),
        }
    }

    pub fn mul(&self, o: &FieldElement) -> FieldElement {
        self.check(o);
        FieldElement::from_poly(&self.field, self.poly.mul(&o.poly))
    }

    pub fn neg(&self) -> FieldElement {
        FieldElement {
            field: self.field.clone(),
            poly: self.poly.scale(&-BigRational::one()),
        }
    }

    pub fn scale(&self, c: &BigRational) -> FieldElement {
        FieldElement {
            field: self.field.clone(),
            poly: self.poly.scale(c),
        }
    }

    pub fn inverse(&self) -> Option<FieldElement> {
        if self.is_zero() {
            return None;
        }
        let (g, s, _) = self.poly.xgcd(&self.field.inner.modulus);
        debug_assert!(g.degree() == Some(0));
        Some(FieldElement::from_poly(&self.field, s))
    }

    pub fn pow(&self, e: u32) -> FieldElement {
        let mut acc = self.field.one();
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }

    /// Value at the `k`-th root.
    pub fn eval_at(&self, root: Complex64) -> Complex64 {
        self.poly.eval_complex(root)
    }

    /// Matrix of multiplication by this element in the power basis.
    pub fn mult_matrix(&self) -> Vec<Vec<BigRational>> {
        let n = self.field.degree();
        let mut cols = Vec::with_capacity(n);
        let mut basis = self.field.one();
        let x = self.field.generator();
        for _ in 0..n {
            cols.push(self.mul(&basis).coords());
            basis = basis.mul(&x);
        }
        // rows[i][j] = coordinate i of (self * x^j)
        (0..n).map(|i| (0..n).map(|j| cols[j][i].clone()).collect()).collect()
    }

    /// Characteristic polynomial of multiplication (Faddeev–LeVerrier).
    pub fn charpoly(&self) -> QPoly {
        let a = self.mult_matrix();
        let n = a.len();
        let mut c = vec![BigRational::zero(); n + 1];
        c[n] = BigRational::one();
        let mut m = vec![vec![BigRational::zero(); n]; n];
        for k in 1..=n {
            // M_k = A M_{k-1} + c_{n-k+1} I
            let mut next = matmul(&a, &m);
            for (i, row) in next.iter_mut().enumerate() {
                row[i] += &c[n - k + 1];
            }
            m = next;
            let am = matmul(&a, &m);
            let tr: BigRational = (0..n).map(|i| am[i][i].clone()).sum();
            c[n - k] = -tr / BigRational::from_integer(BigInt::from(k));
        }
        QPoly::new(c)
    }

    pub fn minimal_polynomial(&self) -> QPoly {
        self.charpoly().squarefree_part()
    }

    pub fn norm(&self) -> BigRational {
        let cp = self.charpoly();
        let n = self.field.degree();
        let c0 = cp.coeff(0);
        if n.is_multiple_of(2) {
            c0
        } else {
            -c0
        }
    }

    pub fn trace(&self) -> BigRational {
        -self.charpoly().coeff(self.field.degree() - 1)
    }

    /// Algebraic integrality: the characteristic polynomial has integer
    /// coefficients.
    pub fn is_algebraic_integer(&self) -> bool {
        self.charpoly().is_integral()
    }

    /// Complex conjugate under the identity embedding, when the field is
    /// stable under conjugation (Q, quadratic fields, totally real fields).
    pub fn conjugate(&self) -> Option<FieldElement> {
        let f = &self.field;
        let n = f.degree();
        if n == 1 || f.roots().iter().all(|r| r.im == 0.0) {
            return Some(self.clone());
        }
        if n == 2 {
            // x -> -p1 - x for monic x^2 + p1 x + p0
            let p1 = f.inner.modulus.coeff(1);
            let xbar = f.from_rational(-p1).sub(&f.generator());
            return Some(FieldElement::from_poly(f, self.poly.compose(xbar.as_poly())));
        }
        None
    }
}

fn matmul(a: &[Vec<BigRational>], b: &[Vec<BigRational>]) -> Vec<Vec<BigRational>> {
    let n = a.len();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| (0..n).map(|k| &a[i][k] * &b[k][j]).sum())
                .collect()
        })
        .collect()
}

impl Field for FieldElement {
    fn zero_like(&self) -> Self {
        self.field.zero()
    }
    fn one_like(&self) -> Self {
        self.field.one()
    }
    fn from_int_like(&self, n: i64) -> Self {
        self.field.from_int(n)
    }
    fn plus(&self, rhs: &Self) -> Self {
        self.add(rhs)
    }
    fn minus(&self, rhs: &Self) -> Self {
        self.sub(rhs)
    }
    fn times(&self, rhs: &Self) -> Self {
        self.mul(rhs)
    }
    fn negated(&self) -> Self {
        self.neg()
    }
    fn inverse(&self) -> Option<Self> {
        FieldElement::inverse(self)
    }
    fn is_zero_tol(&self, _tol: f64) -> bool {
        self.is_zero()
    }
    fn is_exact(&self) -> bool {
        true
    }
    fn to_complex(&self) -> Complex64 {
        self.eval_at(self.field.default_root())
    }
    fn pure_imaginary_like(&self) -> Option<Self> {
        self.field.pure_imaginary()
    }
    fn conj(&self) -> Option<Self> {
        self.conjugate()
    }
}

/// A complex embedding `x -> root`.
#[derive(Clone, Debug)]
pub struct Embedding {
    pub field: NumberField,
    pub index: usize,
    pub root: Complex64,
    pub real: bool,
    /// Index of the complex-conjugate embedding, for non-real roots.
    pub conjugate: Option<usize>,
}

impl Embedding {
    pub fn apply(&self, x: &FieldElement) -> Complex64 {
        x.eval_at(self.root)
    }

    pub fn is_identity(&self) -> bool {
        self.index == self.field.default_root_index()
    }

    /// Same Archimedean place as the identity embedding (itself or its conjugate).
    pub fn is_identity_place(&self) -> bool {
        self.is_identity() || self.conjugate == Some(self.field.default_root_index())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PlaceKind {
    /// Degree-one unramified place given by a simple root of the defining
    /// polynomial mod p.
    Split { root: u64 },
    /// Unique place above p with `f = 1`.
    TotallyRamified { e: u32 },
    /// Unique place above p with `e = 1`.
    Inert { f: u32 },
}

/// A finite place of a number field, normalised so a uniformiser has valuation 1.
#[derive(Clone, Debug)]
pub struct FinitePlace {
    pub field: NumberField,
    pub p: u64,
    pub kind: PlaceKind,
}

impl FinitePlace {
    pub fn ramification(&self) -> u32 {
        match self.kind {
            PlaceKind::TotallyRamified { e } => e,
            _ => 1,
        }
    }

    pub fn residue_degree(&self) -> u32 {
        match self.kind {
            PlaceKind::Inert { f } => f,
            _ => 1,
        }
    }

    /// Valuation; `None` is +infinity.
    pub fn valuation(&self, x: &FieldElement) -> Option<i64> {
        if x.is_zero() {
            return None;
        }
        if self.field.degree() == 1 {
            return vp_rat(&x.poly.coeff(0), self.p);
        }
        match self.kind {
            PlaceKind::Split { root } => Some(self.split_valuation(x, root)),
            PlaceKind::TotallyRamified { .. } => vp_rat(&x.norm(), self.p),
            PlaceKind::Inert { f } => vp_rat(&x.norm(), self.p).map(|v| v / f as i64),
        }
    }

    fn split_valuation(&self, x: &FieldElement, root: u64) -> i64 {
        let p = self.p;
        let coords = x.coords();
        let den = coords
            .iter()
            .fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
        let ints: Vec<BigInt> = coords
            .iter()
            .map(|c| (c * BigRational::from_integer(den.clone())).to_integer())
            .collect();
        let xi = self.field.element(ints.iter().map(|v| BigRational::from_integer(v.clone())).collect());
        let norm = xi.norm();
        // v_P(X) <= v_p(N(X)) for the integral element X = den * x
        let bound = vp_int(norm.numer(), p).max(0) as u32 + 1;
        let modulus_poly = &self.field.inner.modulus;
        let lifted = hensel_lift(modulus_poly, root, p, bound);
        let pk = BigInt::from(p).pow(bound);
        let mut acc = BigInt::zero();
        for c in ints.iter().rev() {
            acc = (acc * &lifted + c).mod_floor(&pk);
        }
        debug_assert!(!acc.is_zero());
        vp_int(&acc, p) - vp_int(&den, p)
    }

    pub fn describe(&self) -> String {
        match self.kind {
            PlaceKind::Split { root } => format!("p={} (x≡{} mod p)", self.p, root),
            PlaceKind::TotallyRamified { e } => format!("p={} (ramified, e={})", self.p, e),
            PlaceKind::Inert { f } => format!("p={} (inert, f={})", self.p, f),
        }
    }
}

/// Lift a simple root of `f` mod p to a root mod `p^k`.
pub fn hensel_lift(f: &QPoly, root: u64, p: u64, k: u32) -> BigInt {
    let pk = BigInt::from(p).pow(k);
    let fi: Vec<BigInt> = f.coeffs().iter().map(|c| c.to_integer()).collect();
    let df: Vec<BigInt> = fi
        .iter()
        .enumerate()
        .skip(1)
        .map(|(i, c)| c * BigInt::from(i))
        .collect();
    let eval = |c: &[BigInt], x: &BigInt, m: &BigInt| -> BigInt {
        c.iter().rev().fold(BigInt::zero(), |acc, a| (acc * x + a).mod_floor(m))
    };
    let mut r = BigInt::from(root);
    let mut prec = 1u32;
    while prec < k {
        prec = (prec * 2).min(k);
        let m = BigInt::from(p).pow(prec);
        let fv = eval(&fi, &r, &m);
        let dv = eval(&df, &r, &m);
        let inv = modinv_big(&dv, &m).expect("root is simple");
        r = (r - fv * inv).mod_floor(&m);
    }
    r.mod_floor(&pk)
}

pub fn modinv_big(a: &BigInt, m: &BigInt) -> Option<BigInt> {
    let e = a.extended_gcd(m);
    if !e.gcd.is_one() {
        return None;
    }
    Some(e.x.mod_floor(m))
}

/// Rational approximation helper used in reports.
pub fn element_to_f64_pair(x: &FieldElement) -> (f64, f64) {
    let z = x.to_complex();
    (z.re, z.im)
}

pub fn rational_to_string(q: &BigRational) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// Whether all power-basis coordinates are integers.
pub fn has_integral_coords(x: &FieldElement) -> bool {
    x.coords().iter().all(|c| c.is_integer())
}

pub fn f64_of(q: &BigRational) -> f64 {
    rat_to_f64(q)
}

pub fn abs_bits(x: &BigInt) -> u64 {
    x.abs().bits()
}

pub fn small_int(x: &BigRational) -> Option<i64> {
    if x.is_integer() {
        x.numer().to_i64()
    } else {
        None
    }
}
