//! Dense univariate polynomials over the rationals.

use std::fmt;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::scalar::rat_to_f64;

/// Coefficients in increasing degree; no trailing zeros.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct QPoly {
    coeffs: Vec<BigRational>,
}

fn q(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

impl QPoly {
    pub fn new(mut coeffs: Vec<BigRational>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        QPoly { coeffs }
    }

    pub fn from_ints(c: &[i64]) -> Self {
        QPoly::new(c.iter().map(|&v| q(v)).collect())
    }

    pub fn zero() -> Self {
        QPoly { coeffs: vec![] }
    }

    pub fn one() -> Self {
        QPoly::from_ints(&[1])
    }

    /// The monomial `x`.
    pub fn x() -> Self {
        QPoly::from_ints(&[0, 1])
    }

    pub fn constant(c: BigRational) -> Self {
        QPoly::new(vec![c])
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree; the zero polynomial reports `None`.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn lead(&self) -> BigRational {
        self.coeffs.last().cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn coeff(&self, i: usize) -> BigRational {
        self.coeffs.get(i).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn add(&self, o: &QPoly) -> QPoly {
        let n = self.coeffs.len().max(o.coeffs.len());
        QPoly::new((0..n).map(|i| self.coeff(i) + o.coeff(i)).collect())
    }

    pub fn sub(&self, o: &QPoly) -> QPoly {
        let n = self.coeffs.len().max(o.coeffs.len());
        QPoly::new((0..n).map(|i| self.coeff(i) - o.coeff(i)).collect())
    }

    pub fn scale(&self, c: &BigRational) -> QPoly {
        QPoly::new(self.coeffs.iter().map(|a| a * c).collect())
    }

    pub fn mul(&self, o: &QPoly) -> QPoly {
        if self.is_zero() || o.is_zero() {
            return QPoly::zero();
        }
        let mut out = vec![BigRational::zero(); self.coeffs.len() + o.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        QPoly::new(out)
    }

    /// Euclidean division; panics on a zero divisor.
    pub fn divrem(&self, d: &QPoly) -> (QPoly, QPoly) {
        assert!(!d.is_zero(), "polynomial division by zero");
        let dd = d.degree().unwrap();
        let lead_inv = d.lead().recip();
        let mut rem = self.coeffs.clone();
        if rem.len() <= dd {
            return (QPoly::zero(), self.clone());
        }
        let mut quot = vec![BigRational::zero(); rem.len() - dd];
        for k in (0..quot.len()).rev() {
            let c = &rem[k + dd] * &lead_inv;
            if !c.is_zero() {
                for (j, dc) in d.coeffs.iter().enumerate() {
                    rem[k + j] -= &c * dc;
                }
            }
            quot[k] = c;
        }
        rem.truncate(dd);
        (QPoly::new(quot), QPoly::new(rem))
    }

    pub fn rem(&self, d: &QPoly) -> QPoly {
        self.divrem(d).1
    }

    pub fn monic(&self) -> QPoly {
        if self.is_zero() {
            return self.clone();
        }
        self.scale(&self.lead().recip())
    }

    /// Monic gcd.
    pub fn gcd(&self, o: &QPoly) -> QPoly {
        let (mut a, mut b) = (self.clone(), o.clone());
        while !b.is_zero() {
            let r = a.rem(&b);
            a = b;
            b = r;
        }
        a.monic()
    }

    /// Extended gcd: returns `(g, s, t)` with `s*self + t*o = g`, `g` monic.
    pub fn xgcd(&self, o: &QPoly) -> (QPoly, QPoly, QPoly) {
        let (mut r0, mut r1) = (self.clone(), o.clone());
        let (mut s0, mut s1) = (QPoly::one(), QPoly::zero());
        let (mut t0, mut t1) = (QPoly::zero(), QPoly::one());
        while !r1.is_zero() {
            let (qt, r) = r0.divrem(&r1);
            r0 = r1;
            r1 = r;
            let s = s0.sub(&qt.mul(&s1));
            s0 = s1;
            s1 = s;
            let t = t0.sub(&qt.mul(&t1));
            t0 = t1;
            t1 = t;
        }
        if r0.is_zero() {
            return (r0, s0, t0);
        }
        let inv = r0.lead().recip();
        (r0.scale(&inv), s0.scale(&inv), t0.scale(&inv))
    }

    pub fn derivative(&self) -> QPoly {
        QPoly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c * q(i as i64))
                .collect(),
        )
    }

    pub fn squarefree_part(&self) -> QPoly {
        let g = self.gcd(&self.derivative());
        self.divrem(&g).0.monic()
    }

    pub fn eval_rat(&self, x: &BigRational) -> BigRational {
        let mut acc = BigRational::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    pub fn eval_complex(&self, x: Complex64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for c in self.coeffs.iter().rev() {
            acc = acc * x + rat_to_f64(c);
        }
        acc
    }

    /// Substitute another polynomial: `self(p(x))`.
    pub fn compose(&self, p: &QPoly) -> QPoly {
        let mut acc = QPoly::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc.mul(p).add(&QPoly::constant(c.clone()));
        }
        acc
    }

    /// Primitive integer polynomial with positive leading coefficient and the
    /// same roots.
    pub fn primitive_integer(&self) -> Vec<BigInt> {
        if self.is_zero() {
            return vec![];
        }
        let lcm = self
            .coeffs
            .iter()
            .fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
        let ints: Vec<BigInt> = self
            .coeffs
            .iter()
            .map(|c| (c * BigRational::from_integer(lcm.clone())).to_integer())
            .collect();
        let g = ints.iter().fold(BigInt::zero(), |acc, c| acc.gcd(c));
        let sign = if ints.last().unwrap().is_negative() {
            -BigInt::one()
        } else {
            BigInt::one()
        };
        ints.into_iter().map(|c| c / &g * &sign).collect()
    }

    pub fn from_bigints(c: &[BigInt]) -> QPoly {
        QPoly::new(c.iter().map(|v| BigRational::from_integer(v.clone())).collect())
    }

    /// Whether all coefficients are integers.
    pub fn is_integral(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_integer())
    }

    /// Complex roots (with multiplicity) by Aberth iteration, polished with Newton.
    pub fn complex_roots(&self) -> Vec<Complex64> {
        let n = match self.degree() {
            None | Some(0) => return vec![],
            Some(n) => n,
        };
        let m = self.monic();
        let c: Vec<Complex64> = m.coeffs.iter().map(|v| Complex64::new(rat_to_f64(v), 0.0)).collect();
        if n == 1 {
            return vec![-c[0]];
        }
        let eval = |z: Complex64| -> (Complex64, Complex64) {
            let mut p = Complex64::new(0.0, 0.0);
            let mut dp = Complex64::new(0.0, 0.0);
            for a in c.iter().rev() {
                dp = dp * z + p;
                p = p * z + a;
            }
            (p, dp)
        };
        // Cauchy bound
        let bound = 1.0
            + c[..n]
                .iter()
                .map(|a| a.norm())
                .fold(0.0, f64::max);
        let mut z: Vec<Complex64> = (0..n)
            .map(|k| {
                let ang = 2.0 * std::f64::consts::PI * (k as f64 + 0.25) / n as f64 + 0.4;
                Complex64::from_polar(0.5 * bound, ang)
            })
            .collect();
        for _ in 0..500 {
            let mut moved = 0.0f64;
            for i in 0..n {
                let (p, dp) = eval(z[i]);
                if p.norm() == 0.0 {
                    continue;
                }
                let ratio = p / dp;
                let s: Complex64 = (0..n)
                    .filter(|&j| j != i)
                    .map(|j| Complex64::new(1.0, 0.0) / (z[i] - z[j]))
                    .sum();
                let w = ratio / (Complex64::new(1.0, 0.0) - ratio * s);
                if w.is_finite() {
                    z[i] -= w;
                    moved = moved.max(w.norm());
                }
            }
            if moved < 1e-15 * bound {
                break;
            }
        }
        for zi in z.iter_mut() {
            for _ in 0..3 {
                let (p, dp) = eval(*zi);
                if dp.norm() > 0.0 {
                    let step = p / dp;
                    if step.is_finite() {
                        *zi -= step;
                    }
                }
            }
        }
        z
    }

    /// Irreducibility over Q.
    ///
    /// The polynomial is rescaled to a monic integer polynomial; any nontrivial
    /// factor is then monic with integer coefficients, so every subset of roots
    /// is tried and candidate factors are confirmed by exact division.
    pub fn is_irreducible(&self) -> bool {
        let n = match self.degree() {
            None | Some(0) => return false,
            Some(1) => return true,
            Some(n) => n,
        };
        if !self.squarefree_part().degree().is_some_and(|d| d == n) {
            return false;
        }
        let (monic_int, _) = self.to_monic_integer();
        let roots = monic_int.complex_roots();
        if n > 20 {
            // subset search is exponential; fall back to the mod-p sufficient test
            return small_primes()
                .into_iter()
                .any(|p| irreducible_mod_p(&monic_int, p) == Some(true));
        }
        for mask in 1u32..(1u32 << n) - 1 {
            let k = mask.count_ones() as usize;
            if k > n / 2 {
                continue;
            }
            // factor coefficients from the chosen roots
            let mut f = vec![Complex64::new(1.0, 0.0)];
            for (i, r) in roots.iter().enumerate() {
                if mask & (1 << i) != 0 {
                    let mut g = vec![Complex64::new(0.0, 0.0); f.len() + 1];
                    for (j, a) in f.iter().enumerate() {
                        g[j + 1] += a;
                        g[j] -= a * r;
                    }
                    f = g;
                }
            }
            if f.iter().any(|a| a.im.abs() > 1e-6 * (1.0 + a.re.abs())) {
                continue;
            }
            if f.iter().any(|a| (a.re - a.re.round()).abs() > 1e-6 * (1.0 + a.re.abs())) {
                continue;
            }
            let cand = QPoly::new(
                f.iter()
                    .map(|a| BigRational::from_integer(BigInt::from(a.re.round() as i64)))
                    .collect(),
            );
            if !cand.is_zero() && monic_int.rem(&cand).is_zero() {
                return false;
            }
        }
        true
    }

    /// Rescale `f(x)` (degree n, leading `a`) into the monic integer polynomial
    /// `g(y) = a^{n-1} f(y / a)` for the primitive integer version of `f`.
    /// Returns `g` and `a`; roots satisfy `y = a x`.
    pub fn to_monic_integer(&self) -> (QPoly, BigInt) {
        let ints = self.primitive_integer();
        let n = ints.len() - 1;
        let a = ints[n].clone();
        let mut out = Vec::with_capacity(n + 1);
        for (i, c) in ints.iter().enumerate() {
            // coefficient of y^i is c_i * a^{n-1-i}
            if i == n {
                out.push(BigInt::one());
            } else {
                out.push(c * num_traits::pow(a.clone(), n - 1 - i));
            }
        }
        (QPoly::from_bigints(&out), a)
    }

    /// Coefficients reduced modulo a prime, for integral polynomials.
    pub fn mod_p(&self, p: u64) -> Option<Vec<u64>> {
        let pb = BigInt::from(p);
        let mut out = Vec::with_capacity(self.coeffs.len());
        for c in &self.coeffs {
            let d = c.denom().mod_floor(&pb);
            if d.is_zero() {
                return None;
            }
            let dinv = modinv(d.to_u64()?, p)?;
            let n = c.numer().mod_floor(&pb).to_u64()?;
            out.push(mulmod(n, dinv, p));
        }
        Some(out)
    }

    pub fn to_string_in(&self, var: &str) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let mut parts = Vec::new();
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let mag = c.abs();
            let sign = if c.is_negative() { "-" } else { "+" };
            let body = match i {
                0 => format!("{mag}"),
                _ => {
                    let mon = if i == 1 { var.to_string() } else { format!("{var}^{i}") };
                    if mag.is_one() {
                        mon
                    } else {
                        format!("{mag}*{mon}")
                    }
                }
            };
            parts.push((sign, body));
        }
        let mut s = String::new();
        for (k, (sign, body)) in parts.into_iter().enumerate() {
            if k == 0 {
                if sign == "-" {
                    s.push('-');
                }
            } else {
                s.push_str(&format!(" {sign} "));
            }
            s.push_str(&body);
        }
        s
    }
}

impl fmt::Display for QPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_string_in("x"))
    }
}

pub(crate) fn small_primes() -> Vec<u64> {
    vec![2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47]
}

pub fn mulmod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub fn powmod(mut a: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1 % m;
    a %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = mulmod(r, a, m);
        }
        a = mulmod(a, a, m);
        e >>= 1;
    }
    r
}

pub fn modinv(a: u64, p: u64) -> Option<u64> {
    let (g, x, _) = egcd(a as i128, p as i128);
    if g != 1 {
        return None;
    }
    Some(x.rem_euclid(p as i128) as u64)
}

fn egcd(a: i128, b: i128) -> (i128, i128, i128) {
    if b == 0 {
        (a, 1, 0)
    } else {
        let (g, x, y) = egcd(b, a % b);
        (g, y, x - (a / b) * y)
    }
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Evaluate a polynomial over F_p.
pub fn eval_mod(c: &[u64], x: u64, p: u64) -> u64 {
    c.iter().rev().fold(0, |acc, &a| (mulmod(acc, x, p) + a) % p)
}

/// Roots in F_p by exhaustive search (p is small in every use here).
pub fn roots_mod_p(c: &[u64], p: u64) -> Vec<u64> {
    (0..p).filter(|&x| eval_mod(c, x, p) == 0).collect()
}

fn trim(v: &mut Vec<u64>) {
    while v.last() == Some(&0) {
        v.pop();
    }
}

fn polymod_p(a: &[u64], m: &[u64], p: u64) -> Vec<u64> {
    let mut r = a.to_vec();
    trim(&mut r);
    let dm = m.len() - 1;
    let inv = modinv(m[dm], p).unwrap();
    while r.len() > dm {
        let k = r.len() - 1 - dm;
        let c = mulmod(*r.last().unwrap(), inv, p);
        for (j, &mj) in m.iter().enumerate() {
            r[k + j] = (r[k + j] + p - mulmod(c, mj, p)) % p;
        }
        trim(&mut r);
    }
    r
}

fn polymul_p(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    if a.is_empty() || b.is_empty() {
        return vec![];
    }
    let mut out = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = (out[i + j] + mulmod(x, y, p)) % p;
        }
    }
    out
}

fn polygcd_p(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    trim(&mut a);
    trim(&mut b);
    while !b.is_empty() {
        let r = polymod_p(&a, &b, p);
        a = b;
        b = r;
    }
    a
}

/// Rabin's irreducibility test over F_p. `None` when the degree drops mod p.
pub fn irreducible_mod_p(f: &QPoly, p: u64) -> Option<bool> {
    let c = f.mod_p(p)?;
    let n = f.degree()?;
    if c.len() != n + 1 || c[n] == 0 {
        return None;
    }
    // x^{p^k} mod f for k = 1..n
    let mut xp = vec![0, 1];
    let mut powers = Vec::new();
    for _ in 0..n {
        // raise to the p-th power by repeated squaring
        let mut base = xp.clone();
        let mut result = vec![1u64];
        let mut e = p;
        while e > 0 {
            if e & 1 == 1 {
                result = polymod_p(&polymul_p(&result, &base, p), &c, p);
            }
            base = polymod_p(&polymul_p(&base, &base, p), &c, p);
            e >>= 1;
        }
        xp = result;
        powers.push(xp.clone());
    }
    // x^{p^n} == x
    let mut last = powers[n - 1].clone();
    trim(&mut last);
    if last != vec![0, 1] {
        return Some(false);
    }
    for d in 1..n {
        if n % d != 0 || !is_prime((n / d) as u64) {
            continue;
        }
        let mut h = powers[d - 1].clone();
        if h.len() < 2 {
            h.resize(2, 0);
        }
        h[1] = (h[1] + p - 1) % p;
        let g = polygcd_p(&c, &h, p);
        if g.len() > 1 {
            return Some(false);
        }
    }
    Some(true)
}

/// p-adic valuation of a nonzero integer.
pub fn vp_int(n: &BigInt, p: u64) -> i64 {
    assert!(!n.is_zero());
    let pb = BigInt::from(p);
    let mut k = 0;
    let mut m = n.clone();
    loop {
        let (qt, r) = m.div_rem(&pb);
        if !r.is_zero() {
            return k;
        }
        m = qt;
        k += 1;
    }
}

/// p-adic valuation of a rational; `None` encodes +infinity.
pub fn vp_rat(x: &BigRational, p: u64) -> Option<i64> {
    if x.is_zero() {
        None
    } else {
        Some(vp_int(x.numer(), p) - vp_int(x.denom(), p))
    }
}
