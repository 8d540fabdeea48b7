//! Circles on the Riemann sphere as Hermitian forms, linked pairs, pencil
//! inversions and the invariant measure on circle space.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::moebius::{CMat, Moebius, ProjPoint};
use crate::scalar::{Field, DEFAULT_TOL};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CircleError {
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
    #[error("point lies on the circle")]
    OnCircle,
    #[error("point is not on the circle")]
    OffCircle,
    #[error("points are not linked by the circle")]
    NotLinked,
    #[error("field has no complex conjugation")]
    NoConjugation,
}

/// `{ z : A|z|^2 + B conj(z) + conj(B) z + C = 0 }`, i.e. the Hermitian matrix
/// `[[A, B], [conj B, C]]` evaluated on `(r, s)`. `A = 0` is a line.
#[derive(Clone, Debug, PartialEq)]
pub struct Circle<S> {
    pub a: S,
    pub b: S,
    pub c: S,
}

fn conj<S: Field>(x: &S) -> Result<S, CircleError> {
    x.conj().ok_or(CircleError::NoConjugation)
}

impl<S: Field> Circle<S> {
    pub fn new(a: S, b: S, c: S) -> Result<Self, CircleError> {
        let circ = Circle { a, b, c };
        if circ.discriminant().to_complex().re <= 0.0 {
            return Err(CircleError::DegenerateInput("|B|^2 - AC must be positive".into()));
        }
        Ok(circ)
    }

    /// `|B|^2 - AC`.
    pub fn discriminant(&self) -> S {
        let bb = self.b.times(&self.b.conj().expect("conjugation"));
        bb.minus(&self.a.times(&self.c))
    }

    /// The form at `[r : s]`; real-valued. At infinity this is `A`.
    pub fn eval(&self, p: &ProjPoint<S>) -> Result<S, CircleError> {
        let (rb, sb) = (conj(&p.r)?, conj(&p.s)?);
        let bb = conj(&self.b)?;
        Ok(self
            .a
            .times(&p.r)
            .times(&rb)
            .plus(&self.b.times(&rb).times(&p.s))
            .plus(&bb.times(&p.r).times(&sb))
            .plus(&self.c.times(&p.s).times(&sb)))
    }

    /// Image `g·C`, with Hermitian matrix `(g^{-1})^* M g^{-1}` (adjugate used
    /// for `g^{-1}`).
    pub fn transform(&self, g: &Moebius<S>) -> Result<Self, CircleError> {
        let h = g.adjugate();
        let bb = conj(&self.b)?;
        // M h, with M = [[A, B], [Bb, C]]
        let m00 = self.a.times(&h.a).plus(&self.b.times(&h.c));
        let m01 = self.a.times(&h.b).plus(&self.b.times(&h.d));
        let m10 = bb.times(&h.a).plus(&self.c.times(&h.c));
        let m11 = bb.times(&h.b).plus(&self.c.times(&h.d));
        let (ha, hb, hc, hd) = (conj(&h.a)?, conj(&h.b)?, conj(&h.c)?, conj(&h.d)?);
        // h^* = [[conj a, conj c], [conj b, conj d]]
        let a = ha.times(&m00).plus(&hc.times(&m10));
        let b = ha.times(&m01).plus(&hc.times(&m11));
        let c = hb.times(&m01).plus(&hd.times(&m11));
        Ok(Circle { a, b, c })
    }

    /// Equality up to a nonzero real factor.
    pub fn proj_eq(&self, o: &Self, tol: f64) -> bool {
        let x = [&self.a, &self.b, &self.c];
        let y = [&o.a, &o.b, &o.c];
        let sx = x.iter().map(|v| v.magnitude_hint()).fold(0.0, f64::max);
        let sy = y.iter().map(|v| v.magnitude_hint()).fold(0.0, f64::max);
        for i in 0..3 {
            for j in (i + 1)..3 {
                if !x[i].times(y[j]).minus(&x[j].times(y[i])).is_zero_tol(tol * sx * sy) {
                    return false;
                }
            }
        }
        true
    }

    pub fn to_complex(&self) -> Circle<Complex64> {
        Circle {
            a: self.a.to_complex(),
            b: self.b.to_complex(),
            c: self.c.to_complex(),
        }
    }
}

/// The unique circle through three distinct points: the image of the real
/// line under the map sending `0, 1, ∞` to `p1, p2, p3`.
pub fn circle_through<S: Field>(
    p1: &ProjPoint<S>,
    p2: &ProjPoint<S>,
    p3: &ProjPoint<S>,
) -> Result<Circle<S>, CircleError> {
    let det = |x: &ProjPoint<S>, y: &ProjPoint<S>| x.r.times(&y.s).minus(&x.s.times(&y.r));
    let d23 = det(p2, p3);
    let d21 = det(p2, p1);
    let d13 = det(p1, p3);
    let tol = DEFAULT_TOL;
    if d23.is_zero_tol(tol) || d21.is_zero_tol(tol) || d13.is_zero_tol(tol) {
        return Err(CircleError::DegenerateInput("coincident points".into()));
    }
    // n sends p1, p2, p3 to 0, 1, ∞; the circle is n^{-1}(R̂)
    let n = Moebius::from_entries(
        d23.times(&p1.s),
        d23.times(&p1.r).negated(),
        d21.times(&p3.s),
        d21.times(&p3.r).negated(),
    );
    let z = p1.r.zero_like();
    let i = p1.r.pure_imaginary_like().ok_or(CircleError::NoConjugation)?;
    let real_line = Circle {
        a: z.clone(),
        b: i,
        c: z,
    };
    real_line.transform(&n.adjugate())
}

pub type CCircle = Circle<Complex64>;

fn cx(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

impl Circle<Complex64> {
    pub fn unit() -> Self {
        Circle {
            a: cx(1.0, 0.0),
            b: cx(0.0, 0.0),
            c: cx(-1.0, 0.0),
        }
    }

    pub fn real_line() -> Self {
        Circle {
            a: cx(0.0, 0.0),
            b: cx(0.0, 1.0),
            c: cx(0.0, 0.0),
        }
    }

    /// Circle `|z - center| = radius`.
    pub fn from_center_radius(center: Complex64, radius: f64) -> Self {
        Circle {
            a: cx(1.0, 0.0),
            b: -center,
            c: cx(center.norm_sqr() - radius * radius, 0.0),
        }
    }

    fn scale(&self) -> f64 {
        self.a.norm().max(self.b.norm()).max(self.c.norm())
    }

    /// Scale-free value of the form, `Q(r, s) / (|(r, s)|^2 |M|)`.
    pub fn relative_value(&self, p: &ProjPoint<Complex64>) -> f64 {
        let q = self.eval(p).unwrap().re;
        q / ((p.r.norm_sqr() + p.s.norm_sqr()) * self.scale())
    }

    pub fn is_line(&self) -> bool {
        self.a.norm() <= DEFAULT_TOL * self.scale()
    }

    /// Center and radius for genuine circles.
    pub fn center_radius(&self) -> Option<(Complex64, f64)> {
        if self.is_line() {
            return None;
        }
        let a = self.a.re;
        let center = -self.b / a;
        let r2 = (self.b.norm_sqr() - a * self.c.re) / (a * a);
        Some((center, r2.sqrt()))
    }
}

/// Which side of `C` the two points lie on: `Q(ξ) Q(ξ') < 0`.
pub fn is_linked(xi: &ProjPoint<Complex64>, xi2: &ProjPoint<Complex64>, c: &CCircle) -> Result<bool, CircleError> {
    let q1 = c.relative_value(xi);
    let q2 = c.relative_value(xi2);
    if q1.abs() <= DEFAULT_TOL || q2.abs() <= DEFAULT_TOL {
        return Err(CircleError::OnCircle);
    }
    Ok(q1 * q2 < 0.0)
}

/// Exact linkage test for exact scalars.
pub fn is_linked_exact<S: Field>(xi: &ProjPoint<S>, xi2: &ProjPoint<S>, c: &Circle<S>) -> Result<bool, CircleError> {
    let q1 = c.eval(xi)?;
    let q2 = c.eval(xi2)?;
    if q1.is_zero_tol(0.0) || q2.is_zero_tol(0.0) {
        return Err(CircleError::OnCircle);
    }
    Ok(q1.times(&q2).to_complex().re < 0.0)
}

/// Identification of a circle with `P^1(R)`: stereographic projection from
/// the highest point of the circle onto the horizontal line at relative
/// height `b` (`b = 0` is the line through the center). Lines use their
/// arclength coordinate from the foot of the perpendicular through 0.
#[derive(Clone, Debug)]
pub enum Chart {
    Round { center: Complex64, radius: f64, b: f64 },
    Line { foot: Complex64, dir: Complex64 },
}

impl Chart {
    pub fn for_circle(c: &CCircle) -> Self {
        Chart::with_height(c, 0.0)
    }

    pub fn with_height(c: &CCircle, b: f64) -> Self {
        match c.center_radius() {
            Some((center, radius)) => Chart::Round { center, radius, b },
            None => {
                let bn = c.b / c.b.norm();
                let foot = -c.c.re * c.b / (2.0 * c.b.norm_sqr());
                Chart::Line {
                    foot,
                    dir: cx(0.0, -1.0) * bn,
                }
            }
        }
    }

    /// Chart coordinate; `None` is infinity.
    pub fn coord(&self, p: &ProjPoint<Complex64>) -> Option<f64> {
        let z = if p.is_infinity(1e-14) { None } else { p.affine() };
        match *self {
            Chart::Round { center, radius, b } => {
                let w = (z? - center) / radius;
                let den = 1.0 - w.im;
                if den.abs() < 1e-15 {
                    return None;
                }
                Some((1.0 - b) * w.re / den)
            }
            Chart::Line { foot, dir } => z.map(|z| ((z - foot) / dir).re),
        }
    }

    pub fn point(&self, a: Option<f64>) -> ProjPoint<Complex64> {
        match *self {
            Chart::Round { center, radius, b } => {
                let w = match a {
                    None => cx(0.0, 1.0),
                    Some(a) => {
                        let s = 2.0 * (1.0 - b) / (a * a + (1.0 - b) * (1.0 - b));
                        cx(s * a, 1.0 - s * (1.0 - b))
                    }
                };
                ProjPoint::from_c(center + radius * w)
            }
            Chart::Line { foot, dir } => match a {
                None => ProjPoint::inf(),
                Some(a) => ProjPoint::from_c(foot + dir * a),
            },
        }
    }

    /// The Möbius map from `R̂` onto the circle that realises `point`.
    pub fn inverse_map(&self) -> CMat {
        let z0 = self.point(Some(0.0));
        let z1 = self.point(Some(1.0));
        let zi = self.point(None);
        three_point_map(&z0, &z1, &zi)
    }
}

/// Matrix sending `0, 1, ∞` to `p0, p1, pinf`.
fn three_point_map(p0: &ProjPoint<Complex64>, p1: &ProjPoint<Complex64>, pi: &ProjPoint<Complex64>) -> CMat {
    let det = |x: &ProjPoint<Complex64>, y: &ProjPoint<Complex64>| x.r * y.s - x.s * y.r;
    let d23 = det(p1, pi);
    let d21 = det(p1, p0);
    let n = Moebius::from_entries(d23 * p0.s, -d23 * p0.r, d21 * pi.s, -d21 * pi.r);
    n.adjugate()
}

/// Two points separated by a circle.
#[derive(Clone, Debug)]
pub struct LinkedPair {
    pub xi: ProjPoint<Complex64>,
    pub xi2: ProjPoint<Complex64>,
    pub circle: CCircle,
    pub chart: Chart,
}

impl LinkedPair {
    pub fn new(xi: ProjPoint<Complex64>, xi2: ProjPoint<Complex64>, circle: CCircle) -> Result<Self, CircleError> {
        let chart = Chart::for_circle(&circle);
        Self::with_chart(xi, xi2, circle, chart)
    }

    pub fn with_chart(
        xi: ProjPoint<Complex64>,
        xi2: ProjPoint<Complex64>,
        circle: CCircle,
        chart: Chart,
    ) -> Result<Self, CircleError> {
        if !is_linked(&xi, &xi2, &circle)? {
            return Err(CircleError::NotLinked);
        }
        Ok(LinkedPair {
            xi,
            xi2,
            circle,
            chart,
        })
    }

    /// The inversion in chart coordinates.
    pub fn inversion_coord(&self, a: Option<f64>) -> Result<Option<f64>, CircleError> {
        let phi_inv = self.chart.inverse_map();
        let p = self.chart.point(a);
        let pencil = circle_through(&self.xi, &self.xi2, &p)?;
        // pull the pencil circle back to chart coordinates
        let d = pencil.transform(&phi_inv.adjugate())?;
        // real points: A x^2 + 2 Re(B) x y + C y^2 = 0
        let (qa, qb, qc) = (d.a.re, 2.0 * d.b.re, d.c.re);
        let scale = qa.abs().max(qb.abs()).max(qc.abs());
        let (qa, qb, qc) = (qa / scale, qb / scale, qc / scale);
        if (qb * qb - 4.0 * qa * qc).abs() < 1e-10 {
            return Err(CircleError::DegenerateInput("pencil circle tangent to C".into()));
        }
        let (x1, y1) = match a {
            Some(a) => {
                let n = (1.0 + a * a).sqrt();
                (a / n, 1.0 / n)
            }
            None => (1.0, 0.0),
        };
        let (x2, y2) = if y1.abs() >= x1.abs() {
            (-(qb * y1 + qa * x1), qa * y1)
        } else {
            (qc * x1, -(qb * x1 + qc * y1))
        };
        if y2.abs() <= 1e-15 * x2.abs() {
            Ok(None)
        } else {
            Ok(Some(x2 / y2))
        }
    }

    /// `ι(p)`: the second intersection with `C` of the pencil circle through `p`.
    pub fn pencil_inversion(&self, p: &ProjPoint<Complex64>) -> Result<ProjPoint<Complex64>, CircleError> {
        if self.circle.relative_value(p).abs() > 1e-9 {
            return Err(CircleError::OffCircle);
        }
        let a = self.chart.coord(p);
        let q = self.inversion_coord(a)?;
        Ok(self.chart.point(q))
    }

    /// The inversion as a real Möbius map of the chart line, fitted from
    /// three image pairs and normalised to determinant 1.
    pub fn inversion_as_moebius(&self) -> Result<RealMat, CircleError> {
        let xs = [Some(-1.0), Some(0.0), Some(1.0)];
        let mut rows = Vec::new();
        for x in xs {
            let y = self.inversion_coord(x)?;
            let (x1, x2) = hom(x);
            let (y1, y2) = hom(y);
            rows.push([y2 * x1, y2 * x2, -y1 * x1, -y1 * x2]);
        }
        let v = null_vector(&rows);
        let m = RealMat { a: v[0], b: v[1], c: v[2], d: v[3] };
        Ok(m.normalized())
    }
}

fn hom(x: Option<f64>) -> (f64, f64) {
    match x {
        Some(x) => (x, 1.0),
        None => (1.0, 0.0),
    }
}

/// Kernel of a rank-3 3×4 matrix by signed 3×3 minors.
fn null_vector(rows: &[[f64; 4]]) -> [f64; 4] {
    let minor = |skip: usize| {
        let cols: Vec<usize> = (0..4).filter(|&c| c != skip).collect();
        let m = |r: usize, c: usize| rows[r][cols[c]];
        m(0, 0) * (m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1)) - m(0, 1) * (m(1, 0) * m(2, 2) - m(1, 2) * m(2, 0))
            + m(0, 2) * (m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0))
    };
    [minor(0), -minor(1), minor(2), -minor(3)]
}

/// A real 2×2 matrix acting on `P^1(R)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RealMat {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl RealMat {
    pub fn det(&self) -> f64 {
        self.a * self.d - self.b * self.c
    }

    pub fn trace(&self) -> f64 {
        self.a + self.d
    }

    pub fn norm(&self) -> f64 {
        (self.a * self.a + self.b * self.b + self.c * self.c + self.d * self.d).sqrt()
    }

    /// Scale to `|det| = 1`.
    pub fn normalized(&self) -> Self {
        let s = 1.0 / self.det().abs().sqrt();
        RealMat { a: self.a * s, b: self.b * s, c: self.c * s, d: self.d * s }
    }

    pub fn mul(&self, o: &RealMat) -> RealMat {
        RealMat {
            a: self.a * o.a + self.b * o.c,
            b: self.a * o.b + self.b * o.d,
            c: self.c * o.a + self.d * o.c,
            d: self.c * o.b + self.d * o.d,
        }
    }

    pub fn inverse(&self) -> RealMat {
        let det = self.det();
        RealMat { a: self.d / det, b: -self.b / det, c: -self.c / det, d: self.a / det }
    }

    pub fn apply(&self, x: Option<f64>) -> Option<f64> {
        let (x1, x2) = hom(x);
        let (y1, y2) = (self.a * x1 + self.b * x2, self.c * x1 + self.d * x2);
        if y2.abs() <= 1e-15 * y1.abs() {
            None
        } else {
            Some(y1 / y2)
        }
    }

    pub fn proj_eq(&self, o: &RealMat, tol: f64) -> bool {
        let x = [self.a, self.b, self.c, self.d];
        let y = [o.a, o.b, o.c, o.d];
        let s = self.norm() * o.norm();
        (0..4).all(|i| ((i + 1)..4).all(|j| (x[i] * y[j] - x[j] * y[i]).abs() <= tol * s))
    }

    pub fn to_moebius(&self) -> CMat {
        CMat::from_f64(self.a, self.b, self.c, self.d)
    }
}

/// Bounds for circle sampling in center/radius coordinates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CircleWindow {
    pub x: (f64, f64),
    pub y: (f64, f64),
    pub r: (f64, f64),
}

impl CircleWindow {
    pub fn contains(&self, s: &CircleSample) -> bool {
        let inside = |v: f64, (lo, hi): (f64, f64)| v >= lo && v <= hi;
        inside(s.center.re, self.x) && inside(s.center.im, self.y) && inside(s.radius, self.r)
    }

    /// σ-mass of the window, `area · (r0^{-2} - r1^{-2}) / 2`.
    pub fn mass(&self) -> f64 {
        (self.x.1 - self.x.0) * (self.y.1 - self.y.0) * (self.r.0.powi(-2) - self.r.1.powi(-2)) / 2.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CircleSample {
    pub center: Complex64,
    pub radius: f64,
    /// σ-density `r^{-3}` at the sample.
    pub weight: f64,
}

/// Density of σ in `(x, y, r)` coordinates, up to a constant.
pub fn sigma_density(radius: f64) -> f64 {
    radius.powi(-3)
}

/// I.i.d. samples of σ restricted to `window`.
pub fn sample_circles(window: &CircleWindow, n: usize, seed: u64) -> Result<Vec<CircleSample>, CircleError> {
    let CircleWindow { x, y, r } = *window;
    if !(x.0 <= x.1 && y.0 <= y.1 && r.0 <= r.1) {
        return Err(CircleError::DegenerateInput("empty window".into()));
    }
    if !(r.0 > 0.0) {
        return Err(CircleError::DegenerateInput("radius window must avoid 0".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (i0, i1) = (r.0.powi(-2), r.1.powi(-2));
    Ok((0..n)
        .map(|_| {
            let cx_ = x.0 + (x.1 - x.0) * rng.gen::<f64>();
            let cy_ = y.0 + (y.1 - y.0) * rng.gen::<f64>();
            let u: f64 = rng.gen();
            let radius = if r.0 == r.1 { r.0 } else { (i0 - u * (i0 - i1)).powf(-0.5) };
            CircleSample {
                center: cx(cx_, cy_),
                radius,
                weight: sigma_density(radius),
            }
        })
        .collect())
}

/// Center/radius of the image of a round circle under a Möbius map, when
/// the image is again a round circle.
pub fn image_center_radius(g: &CMat, center: Complex64, radius: f64) -> Option<(Complex64, f64)> {
    Circle::from_center_radius(center, radius)
        .transform(g)
        .ok()?
        .center_radius()
}

/// Sampled evidence that products of inversions fill a neighbourhood of
/// the identity in `PSL_2(R)`.
#[derive(Clone, Debug, PartialEq)]
pub struct InversionGenReport {
    pub inversions: usize,
    pub max_trace_defect: f64,
    /// Largest distance from the identity among sampled `Q^{-1}Q` elements
    /// inside the probe ball, in trace-free coordinates.
    pub enclosing_radius: f64,
    /// Fraction of the 6 coordinate directions of `sl_2(R)` reached by a
    /// sample within the probe ball and a 30° cone.
    pub direction_coverage: f64,
}

/// Trace-free coordinates of a unimodular real matrix near the identity.
pub fn sl2_coords(m: &RealMat) -> [f64; 3] {
    let s = if m.trace() < 0.0 { -1.0 } else { 1.0 };
    let (a, b, c, d) = (m.a * s, m.b * s, m.c * s, m.d * s);
    [(a - d) / 2.0, (b + c) / 2.0, (b - c) / 2.0]
}

/// Inversions of random linked pairs for the unit circle; `Q` is the set of
/// products `g g'` and the report describes `Q^{-1}Q` near the identity.
pub fn inversion_generation(n: usize, probe: f64, seed: u64) -> Result<InversionGenReport, CircleError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let c = CCircle::unit();
    let mut invs = Vec::with_capacity(n);
    let mut max_defect: f64 = 0.0;
    while invs.len() < n {
        let (xi, xi2) = random_linked_unit(&mut rng);
        let pair = LinkedPair::new(xi, xi2, c.clone())?;
        let m = pair.inversion_as_moebius()?;
        max_defect = max_defect.max(m.trace().abs() / m.norm());
        invs.push(m);
    }
    let q: Vec<RealMat> = invs.chunks(2).filter(|p| p.len() == 2).map(|p| p[0].mul(&p[1])).collect();
    let dirs: [[f64; 3]; 6] = [
        [1.0, 0.0, 0.0],
        [-1.0, 0.0, 0.0],
        [0.0, 1.0, 0.0],
        [0.0, -1.0, 0.0],
        [0.0, 0.0, 1.0],
        [0.0, 0.0, -1.0],
    ];
    let mut reached = [false; 6];
    let mut radius: f64 = 0.0;
    let cos30 = (PI / 6.0).cos();
    for (i, qi) in q.iter().enumerate() {
        let qinv = qi.inverse();
        for qj in q.iter().skip(i + 1) {
            let h = qinv.mul(qj).normalized();
            let v = sl2_coords(&h);
            let nv = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
            if nv > probe || nv == 0.0 {
                continue;
            }
            radius = radius.max(nv);
            for (k, d) in dirs.iter().enumerate() {
                if (v[0] * d[0] + v[1] * d[1] + v[2] * d[2]) / nv >= cos30 {
                    reached[k] = true;
                }
            }
        }
    }
    Ok(InversionGenReport {
        inversions: invs.len(),
        max_trace_defect: max_defect,
        enclosing_radius: radius,
        direction_coverage: reached.iter().filter(|&&r| r).count() as f64 / 6.0,
    })
}

/// A random pair separated by the unit circle (inside point uniform in the
/// disc of radius 0.9, outside point as the reflection of another).
pub fn random_linked_unit<R: Rng + ?Sized>(rng: &mut R) -> (ProjPoint<Complex64>, ProjPoint<Complex64>) {
    let mut disc = || loop {
        let z = cx(rng.gen_range(-0.9..0.9), rng.gen_range(-0.9..0.9));
        if z.norm() < 0.9 && z.norm() > 0.05 {
            return z;
        }
    };
    let inside = disc();
    let w = disc();
    let outside = 1.0 / w.conj();
    (ProjPoint::from_c(inside), ProjPoint::from_c(outside))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numberfield::NumberField;

    fn pc(re: f64, im: f64) -> ProjPoint<Complex64> {
        ProjPoint::from_c(cx(re, im))
    }

    #[test]
    fn circle_through_examples() {
        let c = circle_through(&pc(1.0, 0.0), &pc(0.0, 1.0), &pc(-1.0, 0.0)).unwrap();
        assert!(c.proj_eq(&CCircle::unit(), 1e-12));
        let l = circle_through(&pc(0.0, 0.0), &pc(1.0, 0.0), &ProjPoint::inf()).unwrap();
        assert!(l.is_line());
        assert!(l.proj_eq(&CCircle::real_line(), 1e-12));
        assert!(circle_through(&pc(1.0, 0.0), &pc(1.0, 0.0), &pc(2.0, 0.0)).is_err());
    }

    #[test]
    fn circle_through_exact() {
        let k = NumberField::gaussian();
        let p = |s: &str| ProjPoint::finite(k.parse_element(s).unwrap());
        let c = circle_through(&p("1"), &p("x"), &p("-1")).unwrap();
        for z in ["1", "x", "-1", "-x"] {
            assert!(c.eval(&p(z)).unwrap().is_zero());
        }
        assert!(!c.eval(&p("0")).unwrap().is_zero());
    }

    #[test]
    fn linked_examples() {
        let u = CCircle::unit();
        assert!(is_linked(&pc(0.0, 0.0), &ProjPoint::inf(), &u).unwrap());
        assert!(!is_linked(&pc(2.0, 0.0), &pc(3.0, 0.0), &u).unwrap());
        assert_eq!(is_linked(&pc(1.0, 0.0), &pc(3.0, 0.0), &u), Err(CircleError::OnCircle));
    }

    #[test]
    fn unit_circle_inversion_example() {
        let u = CCircle::unit();
        let b = 0.5;
        let chart = Chart::with_height(&u, b);
        let pair = LinkedPair::with_chart(pc(0.0, b), ProjPoint::inf(), u.clone(), chart.clone()).unwrap();
        let q = pair.pencil_inversion(&pc(0.0, 1.0)).unwrap();
        assert!(q.chordal(&pc(0.0, -1.0)) < 1e-12);
        assert_eq!(chart.coord(&pc(0.0, 1.0)), None);
        for a in [-3.0, -0.7, 0.4, 1.0, 2.5] {
            let p = chart.point(Some(a));
            let q = pair.pencil_inversion(&p).unwrap();
            let got = chart.coord(&q).unwrap();
            assert!((got - (b * b - 1.0) / a).abs() < 1e-12, "{a}: {got}");
        }
        let m = pair.inversion_as_moebius().unwrap();
        let expect = RealMat { a: 0.0, b: b * b - 1.0, c: 1.0, d: 0.0 };
        assert!(m.proj_eq(&expect, 1e-12), "{m:?}");
    }

    #[test]
    fn diameter_pencil_is_antipodal() {
        let u = CCircle::unit();
        let pair = LinkedPair::new(pc(0.0, 0.0), ProjPoint::inf(), u).unwrap();
        for t in [0.1, 1.0, 2.0, 4.0] {
            let p = pc(f64::cos(t), f64::sin(t));
            let q = pair.pencil_inversion(&p).unwrap();
            assert!(q.chordal(&pc(-f64::cos(t), -f64::sin(t))) < 1e-12);
        }
        let m = pair.inversion_as_moebius().unwrap();
        assert!(m.proj_eq(&RealMat { a: 0.0, b: -1.0, c: 1.0, d: 0.0 }, 1e-12));
        assert!(pair.pencil_inversion(&pc(0.5, 0.0)).is_err());
    }

    #[test]
    fn random_inversions_are_involutions() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..100 {
            let (a, b) = random_linked_unit(&mut rng);
            let pair = LinkedPair::new(a, b, CCircle::unit()).unwrap();
            let m = pair.inversion_as_moebius().unwrap();
            assert!(m.trace().abs() / m.norm() < 1e-9);
            assert!(m.det() > 0.0);
            assert!(m.mul(&m).proj_eq(&RealMat { a: 1.0, b: 0.0, c: 0.0, d: 1.0 }, 1e-9));
        }
    }

    #[test]
    fn sampling_windows() {
        let w = CircleWindow { x: (0.5, 0.5), y: (1.0, 1.0), r: (2.0, 2.0) };
        let s = sample_circles(&w, 10, 1).unwrap();
        assert!(s.iter().all(|c| c.center == cx(0.5, 1.0) && c.radius == 2.0));
        assert_eq!(sigma_density(1.0) / sigma_density(2.0), 8.0);
        let bad = CircleWindow { x: (1.0, 0.0), y: (0.0, 1.0), r: (1.0, 2.0) };
        assert!(sample_circles(&bad, 1, 1).is_err());
    }

    #[test]
    fn generation_surrogate_reaches_identity_neighbourhood() {
        let r = inversion_generation(400, 0.3, 5).unwrap();
        assert!(r.max_trace_defect < 1e-9);
        assert!(r.enclosing_radius > 0.1);
        assert_eq!(r.direction_coverage, 1.0);
    }
}
