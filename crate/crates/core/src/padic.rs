//! Rationals viewed p-adically, and distances in the Bruhat–Tits tree of PGL₂(Q_p).

use std::fmt;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::moebius::Moebius;
use crate::numberfield::{FieldElement, FinitePlace};
use crate::poly::{is_prime, vp_rat};
use crate::scalar::{rat_to_f64, Field};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PadicError {
    #[error("singular matrix")]
    InvalidMap,
    #[error("{0} is not prime")]
    NotPrime(u64),
}

/// `v_p(x)`, with `Infinite` for zero.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Valuation {
    Finite(i64),
    Infinite,
}

impl Valuation {
    pub fn finite(self) -> Option<i64> {
        match self {
            Valuation::Finite(v) => Some(v),
            Valuation::Infinite => None,
        }
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Valuation::Finite(v) => write!(f, "{v}"),
            Valuation::Infinite => write!(f, "inf"),
        }
    }
}

/// An exact rational tagged with a prime.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PAdicScalar {
    pub value: BigRational,
    pub p: u64,
}

impl PAdicScalar {
    pub fn new(value: BigRational, p: u64) -> Result<Self, PadicError> {
        if !is_prime(p) {
            return Err(PadicError::NotPrime(p));
        }
        Ok(PAdicScalar { value, p })
    }

    pub fn from_ints(n: i64, d: i64, p: u64) -> Self {
        PAdicScalar::new(BigRational::new(n.into(), d.into()), p).expect("prime")
    }

    pub fn valuation(&self) -> Valuation {
        match vp_rat(&self.value, self.p) {
            Some(v) => Valuation::Finite(v),
            None => Valuation::Infinite,
        }
    }

    fn same(&self, o: &Self) -> PAdicScalar {
        assert_eq!(self.p, o.p, "p-adic scalars over different primes");
        o.clone()
    }

    fn with(&self, value: BigRational) -> Self {
        PAdicScalar { value, p: self.p }
    }
}

/// Exact p-adic valuation.
pub fn valuation(x: &PAdicScalar) -> Valuation {
    x.valuation()
}

impl Field for PAdicScalar {
    fn zero_like(&self) -> Self {
        self.with(BigRational::zero())
    }
    fn one_like(&self) -> Self {
        self.with(BigRational::one())
    }
    fn from_int_like(&self, n: i64) -> Self {
        self.with(BigRational::from_integer(n.into()))
    }
    fn plus(&self, rhs: &Self) -> Self {
        self.with(&self.value + &self.same(rhs).value)
    }
    fn minus(&self, rhs: &Self) -> Self {
        self.with(&self.value - &self.same(rhs).value)
    }
    fn times(&self, rhs: &Self) -> Self {
        self.with(&self.value * &self.same(rhs).value)
    }
    fn negated(&self) -> Self {
        self.with(-&self.value)
    }
    fn inverse(&self) -> Option<Self> {
        (!self.value.is_zero()).then(|| self.with(self.value.recip()))
    }
    fn is_zero_tol(&self, _tol: f64) -> bool {
        self.value.is_zero()
    }
    fn is_exact(&self) -> bool {
        true
    }
    fn to_complex(&self) -> Complex64 {
        Complex64::new(rat_to_f64(&self.value), 0.0)
    }
    fn conj(&self) -> Option<Self> {
        Some(self.clone())
    }
}

fn min_val(vals: impl Iterator<Item = Valuation>) -> Valuation {
    vals.min().unwrap_or(Valuation::Infinite)
}

/// `d(g·o, o) = v(det g) - 2 min v(entries)`.
pub fn tree_distance(g: &Moebius<PAdicScalar>) -> Result<u64, PadicError> {
    let det = g.det();
    let vd = det.valuation().finite().ok_or(PadicError::InvalidMap)?;
    let m = min_val(g.entries().iter().map(|x| x.valuation()))
        .finite()
        .expect("nonzero matrix");
    Ok((vd - 2 * m) as u64)
}

/// Tree distance at a finite place of a number field, in the normalisation
/// where a uniformiser has valuation 1.
pub fn place_tree_distance(place: &FinitePlace, g: &Moebius<FieldElement>) -> Result<u64, PadicError> {
    let vd = place.valuation(&g.det()).ok_or(PadicError::InvalidMap)?;
    let m = g
        .entries()
        .iter()
        .filter_map(|x| place.valuation(x))
        .min()
        .expect("nonzero matrix");
    Ok((vd - 2 * m) as u64)
}

/// A homothety class of Z_p-lattices in Q_p², stored as the basis
/// `(p^a, 0), (u, 1)` with `u = N / p^k` reduced modulo `p^a`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TreeVertex {
    pub p: u64,
    pub a: i64,
    pub u: BigRational,
}

impl TreeVertex {
    /// The standard lattice.
    pub fn origin(p: u64) -> Self {
        TreeVertex {
            p,
            a: 0,
            u: BigRational::zero(),
        }
    }

    /// Canonical class of the lattice spanned by the columns of `m`.
    pub fn from_basis(m: &Moebius<BigRational>, p: u64) -> Result<Self, PadicError> {
        let v = |x: &BigRational| vp_rat(x, p);
        let det = &m.a * &m.d - &m.b * &m.c;
        let vdet = v(&det).ok_or(PadicError::InvalidMap)?;
        // pivot: column whose bottom entry has the smaller valuation
        let (x, y) = match (v(&m.c), v(&m.d)) {
            (Some(vc), Some(vd)) if vc <= vd => (&m.a, &m.c),
            (Some(_), None) => (&m.a, &m.c),
            _ => (&m.b, &m.d),
        };
        let vy = v(y).expect("invertible matrix has a nonzero bottom entry");
        let a = vdet - 2 * vy;
        let u = reduce_mod_pa(&(x / y), p, a);
        Ok(TreeVertex { p, a, u })
    }

    fn basis(&self) -> Moebius<BigRational> {
        let pa = pow_rat(self.p, self.a);
        Moebius::from_entries(pa, self.u.clone(), BigRational::zero(), BigRational::one())
    }

    /// The `p + 1` classes of index-`p` sublattices.
    pub fn neighbors(&self) -> Vec<TreeVertex> {
        let b = self.basis();
        let p = BigRational::from_integer(self.p.into());
        let mut out = Vec::with_capacity(self.p as usize + 1);
        for j in 0..self.p {
            let j = BigRational::from_integer(j.into());
            // span{p e1, e2 + j e1}
            let m = Moebius::from_entries(
                &b.a * &p,
                &b.b + &j * &b.a,
                &b.c * &p,
                &b.d + &j * &b.c,
            );
            out.push(TreeVertex::from_basis(&m, self.p).unwrap());
        }
        let m = Moebius::from_entries(b.a.clone(), &b.b * &p, b.c.clone(), &b.d * &p);
        out.push(TreeVertex::from_basis(&m, self.p).unwrap());
        out
    }
}

fn pow_rat(p: u64, e: i64) -> BigRational {
    let b = BigRational::from_integer(BigInt::from(p).pow(e.unsigned_abs() as u32));
    if e >= 0 {
        b
    } else {
        b.recip()
    }
}

/// Representative of `u` in `Q_p / p^a Z_p` of the form `N / p^k`, `0 <= N < p^{a+k}`.
fn reduce_mod_pa(u: &BigRational, p: u64, a: i64) -> BigRational {
    if u.is_zero() {
        return BigRational::zero();
    }
    let pb = BigInt::from(p);
    let vu = vp_rat(u, p).unwrap();
    if vu >= a {
        return BigRational::zero();
    }
    let k = (-vu).max(0);
    // u * p^k is p-integral: n / d with p ∤ d
    let scaled = u * pow_rat(p, k);
    let modulus = pb.pow((a + k) as u32);
    let n = scaled.numer().mod_floor(&modulus);
    let d = scaled.denom().mod_floor(&modulus);
    let dinv = crate::numberfield::modinv_big(&d, &modulus).expect("unit denominator");
    let nn = (n * dinv).mod_floor(&modulus);
    let r = BigRational::new(nn, pb.pow(k as u32));
    debug_assert!(!r.is_negative());
    r
}
