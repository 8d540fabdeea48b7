//! Möbius maps on the projective line and isometries of upper half-space.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use rand::Rng;
use thiserror::Error;

use crate::scalar::{Field, DEFAULT_TOL};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MoebiusError {
    #[error("singular matrix")]
    InvalidMap,
    #[error("invalid point in H3 (height must be positive, got {0})")]
    InvalidPoint(f64),
    #[error("angle {0} outside [0, pi]")]
    InvalidAngle(f64),
    #[error("negative side length")]
    InvalidLength,
    #[error("homogeneous coordinates are both zero")]
    ZeroPoint,
}

/// A 2×2 matrix read projectively.
#[derive(Clone, Debug, PartialEq)]
pub struct Moebius<S> {
    pub a: S,
    pub b: S,
    pub c: S,
    pub d: S,
}

/// A point `[r : s]` of the projective line; `[1 : 0]` is infinity.
#[derive(Clone, Debug)]
pub struct ProjPoint<S> {
    pub r: S,
    pub s: S,
}

impl<S: Field> Moebius<S> {
    /// Checked constructor: the determinant must be nonzero.
    pub fn new(a: S, b: S, c: S, d: S) -> Result<Self, MoebiusError> {
        let m = Moebius { a, b, c, d };
        if m.det().is_zero_tol(DEFAULT_TOL * m.scale_hint().powi(2)) {
            return Err(MoebiusError::InvalidMap);
        }
        Ok(m)
    }

    pub fn from_entries(a: S, b: S, c: S, d: S) -> Self {
        Moebius { a, b, c, d }
    }

    pub fn identity_like(x: &S) -> Self {
        Moebius {
            a: x.one_like(),
            b: x.zero_like(),
            c: x.zero_like(),
            d: x.one_like(),
        }
    }

    pub fn identity(&self) -> Self {
        Self::identity_like(&self.a)
    }

    fn scale_hint(&self) -> f64 {
        [&self.a, &self.b, &self.c, &self.d]
            .iter()
            .map(|x| x.magnitude_hint())
            .fold(0.0, f64::max)
            .max(1e-300)
    }

    pub fn det(&self) -> S {
        self.a.times(&self.d).minus(&self.b.times(&self.c))
    }

    pub fn trace(&self) -> S {
        self.a.plus(&self.d)
    }

    /// Matrix product `self * rhs` (apply `rhs` first).
    pub fn compose(&self, rhs: &Self) -> Self {
        Moebius {
            a: self.a.times(&rhs.a).plus(&self.b.times(&rhs.c)),
            b: self.a.times(&rhs.b).plus(&self.b.times(&rhs.d)),
            c: self.c.times(&rhs.a).plus(&self.d.times(&rhs.c)),
            d: self.c.times(&rhs.b).plus(&self.d.times(&rhs.d)),
        }
    }

    /// `[[d, -b], [-c, a]]`, a projective inverse.
    pub fn adjugate(&self) -> Self {
        Moebius {
            a: self.d.clone(),
            b: self.b.negated(),
            c: self.c.negated(),
            d: self.a.clone(),
        }
    }

    /// Matrix inverse; `None` when singular.
    pub fn inverse(&self) -> Option<Self> {
        let inv = self.det().inverse()?;
        Some(self.adjugate().scale(&inv))
    }

    pub fn scale(&self, l: &S) -> Self {
        Moebius {
            a: self.a.times(l),
            b: self.b.times(l),
            c: self.c.times(l),
            d: self.d.times(l),
        }
    }

    pub fn entries(&self) -> [&S; 4] {
        [&self.a, &self.b, &self.c, &self.d]
    }

    pub fn map<T>(&self, f: impl Fn(&S) -> T) -> Moebius<T> {
        Moebius {
            a: f(&self.a),
            b: f(&self.b),
            c: f(&self.c),
            d: f(&self.d),
        }
    }

    pub fn to_complex(&self) -> Moebius<Complex64> {
        self.map(|x| x.to_complex())
    }

    /// Equality up to a nonzero scalar: all 2×2 minors of the entry pairs vanish.
    pub fn proj_eq(&self, other: &Self, tol: f64) -> bool {
        let x = self.entries();
        let y = other.entries();
        let scale = self.scale_hint() * other.scale_hint();
        for i in 0..4 {
            for j in (i + 1)..4 {
                let m = x[i].times(y[j]).minus(&x[j].times(y[i]));
                if !m.is_zero_tol(tol * scale) {
                    return false;
                }
            }
        }
        true
    }

    pub fn apply(&self, p: &ProjPoint<S>) -> Result<ProjPoint<S>, MoebiusError> {
        if self.det().is_zero_tol(DEFAULT_TOL * self.scale_hint().powi(2)) {
            return Err(MoebiusError::InvalidMap);
        }
        Ok(ProjPoint {
            r: self.a.times(&p.r).plus(&self.b.times(&p.s)),
            s: self.c.times(&p.r).plus(&self.d.times(&p.s)),
        }
        .normalized())
    }
}

/// `[a r + b s : c r + d s]`.
pub fn apply_to_p1<S: Field>(g: &Moebius<S>, x: &ProjPoint<S>) -> Result<ProjPoint<S>, MoebiusError> {
    g.apply(x)
}

impl<S: Field> ProjPoint<S> {
    pub fn new(r: S, s: S) -> Result<Self, MoebiusError> {
        let tol = DEFAULT_TOL * r.magnitude_hint().max(s.magnitude_hint());
        if r.is_zero_tol(tol) && s.is_zero_tol(tol) {
            return Err(MoebiusError::ZeroPoint);
        }
        Ok(ProjPoint { r, s }.normalized())
    }

    pub fn finite(z: S) -> Self {
        let one = z.one_like();
        ProjPoint { r: z, s: one }
    }

    pub fn infinity_like(x: &S) -> Self {
        ProjPoint {
            r: x.one_like(),
            s: x.zero_like(),
        }
    }

    /// Canonical representative `[z : 1]` or `[1 : 0]` for exact scalars;
    /// float points are left as they are.
    pub fn normalized(self) -> Self {
        if self.r.is_exact() {
            if self.s.is_zero_tol(0.0) {
                return ProjPoint::infinity_like(&self.r);
            }
            let inv = self.s.inverse().unwrap();
            return ProjPoint {
                r: self.r.times(&inv),
                s: self.s.one_like(),
            };
        }
        self
    }

    pub fn is_infinity(&self, tol: f64) -> bool {
        let r = self.r.magnitude_hint();
        let s = self.s.magnitude_hint();
        s <= tol * r
    }

    /// Affine coordinate `r / s`, `None` at infinity.
    pub fn affine(&self) -> Option<S> {
        if self.s.is_zero_tol(0.0) {
            return None;
        }
        self.r.divide(&self.s)
    }

    pub fn proj_eq(&self, o: &Self, tol: f64) -> bool {
        let m = self.r.times(&o.s).minus(&self.s.times(&o.r));
        let scale = (self.r.magnitude_hint().hypot(self.s.magnitude_hint()))
            * (o.r.magnitude_hint().hypot(o.s.magnitude_hint()));
        m.is_zero_tol(tol * scale)
    }

    pub fn to_complex(&self) -> ProjPoint<Complex64> {
        ProjPoint {
            r: self.r.to_complex(),
            s: self.s.to_complex(),
        }
    }
}

impl<S: Field + fmt::Display> fmt::Display for ProjPoint<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{} : {}]", self.r, self.s)
    }
}

impl ProjPoint<Complex64> {
    pub fn from_c(z: Complex64) -> Self {
        ProjPoint::finite(z)
    }

    pub fn inf() -> Self {
        ProjPoint {
            r: Complex64::new(1.0, 0.0),
            s: Complex64::new(0.0, 0.0),
        }
    }

    /// Chordal distance `|x - y| / (sqrt(1+|x|^2) sqrt(1+|y|^2))` in
    /// homogeneous form, so infinity needs no special case.
    pub fn chordal(&self, o: &Self) -> f64 {
        let num = (self.r * o.s - self.s * o.r).norm();
        let n1 = (self.r.norm_sqr() + self.s.norm_sqr()).sqrt();
        let n2 = (o.r.norm_sqr() + o.s.norm_sqr()).sqrt();
        num / (n1 * n2)
    }
}

/// Chordal distance between affine points, with `None` as infinity.
pub fn chordal(x: Option<Complex64>, y: Option<Complex64>) -> f64 {
    let p = |z: Option<Complex64>| z.map(ProjPoint::from_c).unwrap_or_else(ProjPoint::inf);
    p(x).chordal(&p(y))
}

/// A point `z + t j` of upper half-space.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct H3Point {
    pub z: Complex64,
    pub t: f64,
}

impl H3Point {
    pub fn new(z: Complex64, t: f64) -> Result<Self, MoebiusError> {
        if !(t > 0.0) || !t.is_finite() {
            return Err(MoebiusError::InvalidPoint(t));
        }
        Ok(H3Point { z, t })
    }

    /// The base point `o = j`.
    pub fn origin() -> Self {
        H3Point {
            z: Complex64::new(0.0, 0.0),
            t: 1.0,
        }
    }

    pub fn dist(&self, q: &H3Point) -> f64 {
        let dz2 = (self.z - q.z).norm_sqr();
        let dt = self.t - q.t;
        let s = ((dz2 + dt * dt).sqrt()) / (2.0 * (self.t * q.t).sqrt());
        2.0 * s.asinh()
    }

    /// `cosh d - 1` without the `acosh`, for fast comparisons.
    pub fn cosh_dist_m1(&self, q: &H3Point) -> f64 {
        let dz2 = (self.z - q.z).norm_sqr();
        let dt = self.t - q.t;
        (dz2 + dt * dt) / (2.0 * self.t * q.t)
    }
}

pub fn dist_h3(p: &H3Point, q: &H3Point) -> Result<f64, MoebiusError> {
    for x in [p, q] {
        if !(x.t > 0.0) {
            return Err(MoebiusError::InvalidPoint(x.t));
        }
    }
    Ok(p.dist(q))
}

pub type CMat = Moebius<Complex64>;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

impl Moebius<Complex64> {
    pub fn id() -> Self {
        Moebius::identity_like(&c(1.0, 0.0))
    }

    pub fn from_f64(a: f64, b: f64, cc: f64, d: f64) -> Self {
        Moebius {
            a: c(a, 0.0),
            b: c(b, 0.0),
            c: c(cc, 0.0),
            d: c(d, 0.0),
        }
    }

    /// Representative with determinant 1.
    pub fn normalized(&self) -> Self {
        let s = self.det().sqrt();
        self.scale(&(1.0 / s))
    }

    pub fn frobenius_sq(&self) -> f64 {
        self.a.norm_sqr() + self.b.norm_sqr() + self.c.norm_sqr() + self.d.norm_sqr()
    }

    pub fn is_finite(&self) -> bool {
        self.entries().iter().all(|x| x.re.is_finite() && x.im.is_finite())
    }

    /// The isometric action `(aP + b)(cP + d)^{-1}` with `P = z + t j`.
    pub fn act_on_h3(&self, p: &H3Point) -> H3Point {
        let g = self.normalized();
        let czd = g.c * p.z + g.d;
        let den = czd.norm_sqr() + g.c.norm_sqr() * p.t * p.t;
        let z = ((g.a * p.z + g.b) * czd.conj() + g.a * g.c.conj() * p.t * p.t) / den;
        H3Point { z, t: p.t / den }
    }

    /// `d(g o, o)` through the action.
    pub fn displacement(&self) -> f64 {
        self.act_on_h3(&H3Point::origin()).dist(&H3Point::origin())
    }

    /// `d(g o, o)` from the entries: `sinh(d/2) = |g - adj(g)^*|_F / 2` for `det g = 1`.
    pub fn displacement_closed_form(&self) -> f64 {
        let g = self.normalized();
        let s = ((g.a - g.d.conj()).norm_sqr() + (g.b + g.c.conj()).norm_sqr()).sqrt();
        2.0 * (s / 2.0).asinh()
    }

    /// Conjugate transpose.
    pub fn star(&self) -> Self {
        Moebius {
            a: self.a.conj(),
            b: self.c.conj(),
            c: self.b.conj(),
            d: self.d.conj(),
        }
    }

    /// The frame flow element `diag(e^{t/2}, e^{-t/2})`.
    pub fn a_t(t: f64) -> Self {
        Moebius::from_f64((t / 2.0).exp(), 0.0, 0.0, (-t / 2.0).exp())
    }

    /// Rotation by `θ` about the base point, in the real subgroup.
    pub fn r_theta(theta: f64) -> Self {
        let (s, co) = (theta / 2.0).sin_cos();
        Moebius::from_f64(co, -s, s, co)
    }

    /// Haar-random element of `SU(2)`, the stabiliser of `o`.
    pub fn random_su2<R: Rng + ?Sized>(rng: &mut R) -> Self {
        loop {
            let q: [f64; 4] = [
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
            ];
            let n2: f64 = q.iter().map(|x| x * x).sum();
            if n2 > 1e-6 && n2 <= 1.0 {
                let n = n2.sqrt();
                let q = q.map(|x| x / n);
                return Moebius {
                    a: c(q[0], q[1]),
                    b: c(q[2], q[3]),
                    c: c(-q[2], q[3]),
                    d: c(q[0], -q[1]),
                };
            }
        }
    }

    /// Upper-triangular `A_p` with `A_p · o = p`.
    pub fn moving_origin_to(p: &H3Point) -> Self {
        let s = p.t.sqrt();
        Moebius {
            a: c(s, 0.0),
            b: p.z / s,
            c: c(0.0, 0.0),
            d: c(1.0 / s, 0.0),
        }
    }
}

/// Symbolic flow elements; composition adds parameters exactly.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum FlowElement {
    Diagonal(f64),
    Rotation(f64),
}

impl FlowElement {
    pub fn a(t: f64) -> Self {
        FlowElement::Diagonal(t)
    }

    pub fn r(theta: f64) -> Self {
        FlowElement::Rotation(theta.rem_euclid(2.0 * PI))
    }

    /// Composition within a one-parameter subgroup.
    pub fn compose(&self, o: &FlowElement) -> Option<FlowElement> {
        match (self, o) {
            (FlowElement::Diagonal(s), FlowElement::Diagonal(t)) => Some(FlowElement::a(s + t)),
            (FlowElement::Rotation(s), FlowElement::Rotation(t)) => Some(FlowElement::r(s + t)),
            _ => None,
        }
    }

    pub fn to_moebius(&self) -> CMat {
        match *self {
            FlowElement::Diagonal(t) => CMat::a_t(t),
            FlowElement::Rotation(th) => CMat::r_theta(th),
        }
    }
}

/// Third side of a hyperbolic triangle from two sides and the included angle,
/// `cosh a = cosh b cosh c - cos θ sinh b sinh c`, evaluated in half-angle
/// form to keep small sides accurate.
pub fn law_of_cosines_side(b: f64, c: f64, theta: f64) -> Result<f64, MoebiusError> {
    if !(0.0..=PI).contains(&theta) {
        return Err(MoebiusError::InvalidAngle(theta));
    }
    if b < 0.0 || c < 0.0 {
        return Err(MoebiusError::InvalidLength);
    }
    let h = ((b - c) / 2.0).sinh();
    let s = (theta / 2.0).sin();
    let v = (h * h + s * s * b.sinh() * c.sinh()).sqrt();
    Ok(2.0 * v.asinh())
}

/// Unit tangent vector at `p` (in the Euclidean frame at `o` after moving `p`
/// to `o`) of the geodesic from `p` to `q`.
fn tangent_at(p: &H3Point, q: &H3Point) -> [f64; 3] {
    let m = CMat::moving_origin_to(p).adjugate();
    let q0 = m.act_on_h3(q);
    let v = [
        2.0 * q0.z.re,
        2.0 * q0.z.im,
        q0.z.norm_sqr() + q0.t * q0.t - 1.0,
    ];
    let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    [v[0] / n, v[1] / n, v[2] / n]
}

/// Angle at `p` between the geodesics towards `q` and `r`.
pub fn vertex_angle(p: &H3Point, q: &H3Point, r: &H3Point) -> f64 {
    let u = tangent_at(p, q);
    let v = tangent_at(p, r);
    let dot = u[0] * v[0] + u[1] * v[1] + u[2] * v[2];
    let cross = [
        u[1] * v[2] - u[2] * v[1],
        u[2] * v[0] - u[0] * v[2],
        u[0] * v[1] - u[1] * v[0],
    ];
    let cn = (cross[0] * cross[0] + cross[1] * cross[1] + cross[2] * cross[2]).sqrt();
    cn.atan2(dot)
}
