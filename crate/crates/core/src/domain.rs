//! Dirichlet fundamental domains in `H^3`, reduction of frames, and a
//! volume sampler for Euclidean Bianchi groups.

use num_complex::Complex64;
use num_rational::BigRational;
use rand::Rng;
use thiserror::Error;

use crate::arith::{for_each_word, Word};
use crate::moebius::{CMat, H3Point, Moebius};
use crate::numberfield::FieldElement;
use crate::presentation::{GroupPresentation, Mat};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DomainError {
    #[error("face set insufficient: {0}")]
    FaceSetInsufficient(String),
    #[error("cusp excursion to height {0:.3e} exceeds the budget")]
    CuspExcursion(f64),
    #[error("word enumeration over budget")]
    Budget,
}

/// Point of the hyperboloid `x0^2 - x1^2 - x2^2 - x3^2 = 1`.
pub type Hyp = [f64; 4];

/// `cosh d(x, y)`.
pub fn bil(x: &Hyp, y: &Hyp) -> f64 {
    x[0] * y[0] - x[1] * y[1] - x[2] * y[2] - x[3] * y[3]
}

pub fn hyp_of(p: &H3Point) -> Hyp {
    let r2 = p.z.norm_sqr() + p.t * p.t;
    [
        (r2 + 1.0) / (2.0 * p.t),
        p.z.re / p.t,
        p.z.im / p.t,
        (r2 - 1.0) / (2.0 * p.t),
    ]
}

pub fn h3_of(x: &Hyp) -> H3Point {
    let t = 1.0 / (x[0] - x[3]);
    H3Point {
        z: Complex64::new(x[1], x[2]) * t,
        t,
    }
}

/// `g X g*` on Hermitian matrices; works for light-like vectors too.
pub fn act_hyp(g: &CMat, x: &Hyp) -> Hyp {
    let h00 = Complex64::new(x[0] + x[3], 0.0);
    let h01 = Complex64::new(x[1], x[2]);
    let h10 = h01.conj();
    let h11 = Complex64::new(x[0] - x[3], 0.0);
    // g H
    let m00 = g.a * h00 + g.b * h10;
    let m01 = g.a * h01 + g.b * h11;
    let m10 = g.c * h00 + g.d * h10;
    let m11 = g.c * h01 + g.d * h11;
    // (g H) g*
    let r00 = m00 * g.a.conj() + m01 * g.b.conj();
    let r01 = m00 * g.c.conj() + m01 * g.d.conj();
    let r11 = m10 * g.c.conj() + m11 * g.d.conj();
    [
        (r00.re + r11.re) / 2.0,
        r01.re,
        r01.im,
        (r00.re - r11.re) / 2.0,
    ]
}

/// Point `g^{-1} o` of a frame `g` (det 1).
pub fn frame_point(g: &CMat) -> Hyp {
    act_hyp(&g.adjugate(), &[1.0, 0.0, 0.0, 0.0])
}

/// Translation lattice of the cusp at infinity, from two unipotent generators.
#[derive(Clone, Debug)]
pub struct CuspLattice {
    pub b1: FieldElement,
    pub b2: FieldElement,
    pub w1: Complex64,
    pub w2: Complex64,
}

impl CuspLattice {
    pub fn from_presentation(gens: &GroupPresentation) -> Option<Self> {
        let one = gens.field.one();
        let id = gens.field.identity_embedding();
        let shifts: Vec<FieldElement> = gens
            .generators
            .iter()
            .filter(|g| g.c.is_zero() && g.a == one && g.d == one)
            .map(|g| g.b.clone())
            .collect();
        for i in 0..shifts.len() {
            for j in i + 1..shifts.len() {
                let (w1, w2) = (id.apply(&shifts[i]), id.apply(&shifts[j]));
                if (w1.conj() * w2).im.abs() > 1e-9 {
                    return Some(CuspLattice {
                        b1: shifts[i].clone(),
                        b2: shifts[j].clone(),
                        w1,
                        w2,
                    });
                }
            }
        }
        None
    }

    /// Real coordinates of `z` in the basis `(w1, w2)`.
    pub fn coords(&self, z: Complex64) -> (f64, f64) {
        let det = (self.w1.conj() * self.w2).im;
        let a = (z.conj() * self.w2).im / det;
        let b = (self.w1.conj() * z).im / det;
        (a, b)
    }

    pub fn point(&self, a: f64, b: f64) -> Complex64 {
        self.w1 * a + self.w2 * b
    }

    /// Distance from `z` to the nearest lattice point.
    pub fn dist(&self, z: Complex64) -> f64 {
        let (a, b) = self.coords(z);
        let (fa, fb) = (a.floor(), b.floor());
        let mut best = f64::INFINITY;
        for da in -1..=2 {
            for db in -1..=2 {
                let p = self.point(fa + da as f64, fb + db as f64);
                best = best.min((z - p).norm());
            }
        }
        best
    }

    /// Circumradius of the triangle `0, w1, w2` (covering radius for a
    /// reduced basis with non-obtuse triangle).
    pub fn covering_radius(&self) -> f64 {
        let (a, b, c) = ((self.w1).norm(), (self.w2).norm(), (self.w1 - self.w2).norm());
        let area = (self.w1.conj() * self.w2).im.abs() / 2.0;
        a * b * c / (4.0 * area)
    }

    pub fn translation(&self, a: i64, b: i64) -> Mat {
        let f = self.b1.field();
        let s = self.b1.scale(&BigRational::from_integer(a.into())).add(&self.b2.scale(&BigRational::from_integer(b.into())));
        Moebius::from_entries(f.one(), s, f.zero(), f.one())
    }
}

/// A step of a reduction, as the group element applied to the point.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Move {
    Face(usize),
    /// `z -> z + a w1 + b w2`.
    Translate(i64, i64),
}

#[derive(Clone, Debug)]
pub struct Face {
    pub word: Word,
    pub label: String,
    pub mat: Mat,
    pub fmat: CMat,
    pub finv: CMat,
    /// `f^{-1} c`: the face lies on the bisector of `c` and this point.
    pub point: Hyp,
    /// Index of the face paired by `f^{-1}`.
    pub inverse: usize,
}

#[derive(Clone, Debug)]
pub struct DirichletDomain {
    pub center: H3Point,
    pub center_hyp: Hyp,
    pub faces: Vec<Face>,
    pub cusp: Option<CuspLattice>,
    pub max_iter: usize,
    pub max_height: f64,
    /// Vertices of the domain in the Klein model (ideal ones on the sphere).
    pub vertices: Vec<[f64; 3]>,
}

/// Default generic center: its stabiliser in the preset groups is trivial.
pub fn default_center() -> H3Point {
    H3Point {
        z: Complex64::new(0.0713, 0.1291),
        t: 1.6173,
    }
}

fn klein(x: &Hyp) -> [f64; 3] {
    [x[1] / x[0], x[2] / x[0], x[3] / x[0]]
}

fn from_klein(y: &[f64; 3]) -> Hyp {
    // light-like for ideal points; scaling is irrelevant for the tests below
    [1.0, y[0], y[1], y[2]]
}

fn sub3(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn cross3(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn dot3(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn norm3(a: &[f64; 3]) -> f64 {
    dot3(a, a).sqrt()
}

/// Half-space `n . y <= r` in Klein coordinates, with `|n| = 1`.
#[derive(Clone, Copy, Debug)]
struct Plane {
    n: [f64; 3],
    r: f64,
}

fn bisector_plane(c: &Hyp, q: &Hyp) -> Plane {
    // cosh d(y, c) <= cosh d(y, q)  <=>  (c0 - q0) - y.(c - q) <= 0
    let n = [q[1] - c[1], q[2] - c[2], q[3] - c[3]];
    let r = q[0] - c[0];
    let s = norm3(&n);
    Plane {
        n: [n[0] / s, n[1] / s, n[2] / s],
        r: r / s,
    }
}

fn solve3(p: &Plane, q: &Plane, s: &Plane) -> Option<[f64; 3]> {
    let d = dot3(&p.n, &cross3(&q.n, &s.n));
    if d.abs() < 1e-10 {
        return None;
    }
    let a = cross3(&q.n, &s.n);
    let b = cross3(&s.n, &p.n);
    let c = cross3(&p.n, &q.n);
    Some([
        (p.r * a[0] + q.r * b[0] + s.r * c[0]) / d,
        (p.r * a[1] + q.r * b[1] + s.r * c[1]) / d,
        (p.r * a[2] + q.r * b[2] + s.r * c[2]) / d,
    ])
}

const PLANE_TOL: f64 = 1e-9;

struct Candidate {
    word: Word,
    mat: Mat,
    fmat: CMat,
    point: Hyp,
}

impl DirichletDomain {
    /// Dirichlet domain about `center`, with faces selected among reduced
    /// words of length at most `max_word`. The result is certified by the
    /// face-pairing check; otherwise `FaceSetInsufficient`.
    pub fn build(gens: &GroupPresentation, center: H3Point, max_word: usize) -> Result<Self, DomainError> {
        let c = hyp_of(&center);
        let id = gens.field.identity_embedding();
        let mut cands: Vec<Candidate> = Vec::new();
        for_each_word(gens, max_word, |w, m| {
            let fmat = m.map(|x| id.apply(x)).normalized();
            let point = act_hyp(&fmat.adjugate(), &c);
            if bil(&point, &c) - 1.0 < 1e-9 {
                return true; // stabilises the center
            }
            if cands.iter().all(|k| bil(&k.point, &point) - 1.0 > 1e-9) {
                cands.push(Candidate {
                    word: w.clone(),
                    mat: m.clone(),
                    fmat,
                    point,
                });
            }
            true
        })
        .map_err(|_| DomainError::Budget)?;
        cands.sort_by(|a, b| bil(&a.point, &c).partial_cmp(&bil(&b.point, &c)).unwrap());
        let planes: Vec<Plane> = cands.iter().map(|k| bisector_plane(&c, &k.point)).collect();
        let feasible = |y: &[f64; 3]| planes.iter().all(|p| dot3(&p.n, y) - p.r <= PLANE_TOL);

        // vertex enumeration
        let m = planes.len();
        let mut vertices: Vec<[f64; 3]> = Vec::new();
        let mut on: Vec<Vec<usize>> = vec![Vec::new(); m];
        for i in 0..m {
            for j in i + 1..m {
                for k in j + 1..m {
                    let Some(y) = solve3(&planes[i], &planes[j], &planes[k]) else {
                        continue;
                    };
                    if norm3(&y) > 1.0 + 1e-6 || !feasible(&y) {
                        continue;
                    }
                    if vertices.iter().any(|v| norm3(&sub3(v, &y)) < 1e-7) {
                        continue;
                    }
                    vertices.push(y);
                }
            }
        }
        for (vi, v) in vertices.iter().enumerate() {
            for (pi, p) in planes.iter().enumerate() {
                if (dot3(&p.n, v) - p.r).abs() <= 1e-7 {
                    on[pi].push(vi);
                }
            }
        }
        let is_facet = |vs: &Vec<usize>| {
            if vs.len() < 3 {
                return false;
            }
            let a = vertices[vs[0]];
            let b = vertices[vs[1]];
            vs[2..].iter().any(|&k| {
                let n = cross3(&sub3(&b, &a), &sub3(&vertices[k], &a));
                norm3(&n) > 1e-9
            })
        };
        let facet_idx: Vec<usize> = (0..m).filter(|&i| is_facet(&on[i])).collect();
        if facet_idx.is_empty() {
            return Err(DomainError::FaceSetInsufficient("no facets".into()));
        }
        // the region must close up inside the ball: probe directions
        for dir in probe_directions() {
            let mut lo = 0.0f64;
            for p in &planes {
                let s = dot3(&p.n, &dir);
                if s > 1e-12 {
                    let y0 = klein(&c);
                    let tmax = (p.r - dot3(&p.n, &y0)) / s;
                    lo = if lo == 0.0 { tmax } else { lo.min(tmax) };
                }
            }
            let y0 = klein(&c);
            let reach = [y0[0] + lo * dir[0], y0[1] + lo * dir[1], y0[2] + lo * dir[2]];
            if lo == 0.0 || norm3(&reach) > 1.0 + 1e-6 {
                return Err(DomainError::FaceSetInsufficient(format!(
                    "region leaves the ball in direction {dir:?}"
                )));
            }
        }

        let mut faces: Vec<Face> = facet_idx
            .iter()
            .map(|&i| {
                let k = &cands[i];
                Face {
                    label: k.word.label(&gens.labels),
                    word: k.word.clone(),
                    mat: k.mat.clone(),
                    finv: k.fmat.adjugate(),
                    fmat: k.fmat.clone(),
                    point: k.point,
                    inverse: usize::MAX,
                }
            })
            .collect();
        // pairing certificate: f maps its facet onto the facet of f^{-1}
        for fi in 0..faces.len() {
            let target = act_hyp(&faces[fi].fmat, &c);
            let Some(inv) = faces.iter().position(|g| bil(&g.point, &target) - 1.0 < 1e-8) else {
                return Err(DomainError::FaceSetInsufficient(format!(
                    "face {} has no paired face",
                    faces[fi].label
                )));
            };
            let src = &on[facet_idx[fi]];
            let dst = &on[facet_idx[inv]];
            for &v in src {
                let img = klein_normalize(&act_hyp(&faces[fi].fmat, &from_klein(&vertices[v])));
                if !dst.iter().any(|&w| norm3(&sub3(&vertices[w], &img)) < 1e-6) {
                    return Err(DomainError::FaceSetInsufficient(format!(
                        "face {} does not map onto its partner",
                        faces[fi].label
                    )));
                }
            }
            faces[fi].inverse = inv;
        }
        Ok(DirichletDomain {
            center,
            center_hyp: c,
            faces,
            cusp: CuspLattice::from_presentation(gens),
            max_iter: 10_000,
            max_height: 1e12,
            vertices,
        })
    }

    pub fn contains(&self, x: &Hyp, tol: f64) -> bool {
        let b0 = bil(x, &self.center_hyp);
        self.faces.iter().all(|f| bil(x, &f.point) >= b0 * (1.0 - tol))
    }

    /// Greedy descent of `d(x, c)`, after rounding into the cusp cell.
    pub fn reduce_point(&self, x: &Hyp) -> Result<(Hyp, Vec<Move>), DomainError> {
        let mut x = *x;
        let mut moves = Vec::new();
        let pc = h3_of(&self.center_hyp);
        for _ in 0..self.max_iter {
            if let Some(cl) = &self.cusp {
                let p = h3_of(&x);
                if p.t > self.max_height {
                    return Err(DomainError::CuspExcursion(p.t));
                }
                let (a, b) = cl.coords(p.z - pc.z);
                let (a, b) = (-a.round() as i64, -b.round() as i64);
                if a != 0 || b != 0 {
                    let s = cl.point(a as f64, b as f64);
                    if (p.z + s - pc.z).norm() < (p.z - pc.z).norm() * (1.0 - 1e-12) {
                        let tr = Moebius::from_entries(Complex64::new(1.0, 0.0), s, Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0));
                        x = act_hyp(&tr, &x);
                        moves.push(Move::Translate(a, b));
                    }
                }
            }
            let b0 = bil(&x, &self.center_hyp);
            let mut best = None;
            let mut best_val = b0 * (1.0 - 1e-12) - 1e-12;
            for (k, f) in self.faces.iter().enumerate() {
                let v = bil(&x, &f.point);
                if v < best_val {
                    best_val = v;
                    best = Some(k);
                }
            }
            match best {
                None => return Ok((x, moves)),
                Some(k) => {
                    x = act_hyp(&self.faces[k].fmat, &x);
                    moves.push(Move::Face(k));
                }
            }
        }
        Err(DomainError::FaceSetInsufficient(format!(
            "no convergence after {} iterations",
            self.max_iter
        )))
    }

    /// Float matrix of a move.
    pub fn move_fmat(&self, m: &Move) -> CMat {
        match *m {
            Move::Face(k) => self.faces[k].fmat.clone(),
            Move::Translate(a, b) => {
                let cl = self.cusp.as_ref().expect("cusp lattice");
                let one = Complex64::new(1.0, 0.0);
                Moebius::from_entries(one, cl.point(a as f64, b as f64), Complex64::new(0.0, 0.0), one)
            }
        }
    }

    /// Exact matrix of a move.
    pub fn move_mat(&self, m: &Move) -> Mat {
        match *m {
            Move::Face(k) => self.faces[k].mat.clone(),
            Move::Translate(a, b) => self.cusp.as_ref().expect("cusp lattice").translation(a, b),
        }
    }

    /// Exact product `m_k ... m_1` of the moves.
    pub fn moves_product(&self, moves: &[Move], one: &FieldElement) -> Mat {
        let mut g = Mat::identity_like(one);
        for m in moves {
            g = self.move_mat(m).compose(&g);
        }
        g
    }

    /// `(g γ^{-1}, moves)` with the point of `g γ^{-1}` in the domain.
    pub fn reduce(&self, g: &CMat) -> Result<(CMat, Vec<Move>), DomainError> {
        let g = g.normalized();
        let (_, moves) = self.reduce_point(&frame_point(&g))?;
        let mut f = g;
        for m in &moves {
            f = f.compose(&self.move_fmat(m).adjugate());
        }
        Ok((f.normalized(), moves))
    }
}

fn klein_normalize(x: &Hyp) -> [f64; 3] {
    klein(x)
}

fn probe_directions() -> Vec<[f64; 3]> {
    let mut out = Vec::new();
    let n = 40;
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    for k in 0..n {
        let z = 1.0 - 2.0 * (k as f64 + 0.5) / n as f64;
        let r = (1.0 - z * z).sqrt();
        let th = golden * k as f64;
        out.push([r * th.cos(), r * th.sin(), z]);
    }
    out
}

/// Uniform frames for a Euclidean Bianchi group whose Ford floor consists
/// of the unit hemispheres over the translation lattice.
#[derive(Clone, Debug)]
pub struct FordSampler {
    pub lattice: CuspLattice,
    tmin_floor: f64,
}

impl FordSampler {
    pub fn new(lattice: CuspLattice) -> Self {
        let r = lattice.covering_radius();
        FordSampler {
            tmin_floor: (1.0 - r * r).max(0.0).sqrt(),
            lattice,
        }
    }

    pub fn floor_height(&self, z: Complex64) -> f64 {
        let d = self.lattice.dist(z);
        (1.0 - d * d).max(0.0).sqrt()
    }

    /// A point above the floor with density `t^{-3}`, uniform in the cell.
    pub fn sample_point<R: Rng + ?Sized>(&self, rng: &mut R) -> H3Point {
        loop {
            let z = self.lattice.point(rng.gen::<f64>(), rng.gen::<f64>());
            let tm = self.floor_height(z);
            let accept = (self.tmin_floor / tm).powi(2);
            if rng.gen::<f64>() < accept {
                let u: f64 = 1.0 - rng.gen::<f64>();
                return H3Point { z, t: tm / u.sqrt() };
            }
        }
    }

    /// Frame `g` with `g^{-1} o` the sampled point and Haar-random rotation.
    pub fn sample_frame<R: Rng + ?Sized>(&self, rng: &mut R) -> CMat {
        let p = self.sample_point(rng);
        let k = CMat::random_su2(rng);
        k.adjugate().compose(&CMat::moving_origin_to(&p).adjugate()).normalized()
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::presets::Preset;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn hyperboloid_roundtrip_and_distance() {
        let p = H3Point::new(Complex64::new(0.3, -1.2), 0.7).unwrap();
        let q = H3Point::new(Complex64::new(-2.0, 0.5), 3.1).unwrap();
        let (x, y) = (hyp_of(&p), hyp_of(&q));
        assert!((bil(&x, &x) - 1.0).abs() < 1e-12);
        assert!((bil(&x, &y).acosh() - p.dist(&q)).abs() < 1e-9);
        let back = h3_of(&x);
        assert!((back.z - p.z).norm() < 1e-12 && (back.t - p.t).abs() < 1e-12);
        let g = CMat::from_f64(2.0, 1.0, 3.0, 2.0);
        let a = h3_of(&act_hyp(&g, &x));
        let b = g.act_on_h3(&p);
        assert!((a.z - b.z).norm() < 1e-12 && (a.t - b.t).abs() < 1e-12);
    }

    #[test]
    fn preset_domains_are_certified() {
        for p in [Preset::BianchiZi, Preset::BianchiZw] {
            let d = p.domain().unwrap();
            assert!(!d.faces.is_empty());
            for (i, f) in d.faces.iter().enumerate() {
                assert_eq!(d.faces[f.inverse].inverse, i);
            }
            // the only ideal vertex is the cusp at infinity
            for v in &d.vertices {
                if (norm3(v) - 1.0).abs() < 1e-6 {
                    assert!((v[2] - 1.0).abs() < 1e-6, "{v:?}");
                }
            }
        }
    }

    #[test]
    fn reduce_fixed_point_and_face_generator() {
        let d = Preset::BianchiZi.domain().unwrap();
        let (f, moves) = d.reduce(&CMat::id()).unwrap();
        assert!(moves.is_empty());
        assert!(f.proj_eq(&CMat::id(), 1e-12));
        // a frame based at the center, then a face element on the right
        let f0 = CMat::moving_origin_to(&d.center).adjugate();
        for face in &d.faces {
            let (f, moves) = d.reduce(&f0.compose(&face.fmat)).unwrap();
            assert!(f.proj_eq(&f0, 1e-9), "{}", face.label);
            let g = d.moves_product(&moves, &face.mat.a.field().one());
            assert!(g.proj_eq(&face.mat, 0.0), "{}", face.label);
        }
    }

    #[test]
    fn construct_and_recover() {
        let pre = Preset::BianchiZi;
        let d = pre.domain().unwrap();
        let gens = pre.presentation();
        let sampler = pre.sampler().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let one = gens.field.one();
        for _ in 0..200 {
            // f in F, then a random word w: recover w
            let (f, _) = d.reduce(&sampler.sample_frame(&mut rng)).unwrap();
            let w = random_word(&mut rng, gens.len(), 5);
            let wm = w.evaluate(&gens);
            let g = f.compose(&gens.embed(&wm));
            let (f2, moves) = d.reduce(&g).unwrap();
            let got = d.moves_product(&moves, &one);
            assert!(got.proj_eq(&wm, 0.0));
            assert!(f2.proj_eq(&f, 1e-7));
        }
    }

    #[test]
    fn reduction_lands_in_brute_force_domain() {
        let pre = Preset::BianchiZw;
        let d = pre.domain().unwrap();
        let gens = pre.presentation();
        let id = gens.field.identity_embedding();
        let mut brute: Vec<Hyp> = Vec::new();
        for_each_word(&gens, 4, |_, m| {
            let g = m.map(|x| id.apply(x)).normalized();
            brute.push(act_hyp(&g.adjugate(), &d.center_hyp));
            true
        })
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..300 {
            let g = CMat::random_su2(&mut rng)
                .compose(&CMat::a_t(rng.gen_range(0.0..6.0)))
                .compose(&CMat::random_su2(&mut rng));
            let (f, _) = d.reduce(&g).unwrap();
            let x = frame_point(&f);
            let b0 = bil(&x, &d.center_hyp);
            for q in &brute {
                assert!(bil(&x, q) >= b0 * (1.0 - 1e-9));
            }
        }
    }

    #[test]
    fn equivariance_of_reduction() {
        let pre = Preset::BianchiZi;
        let d = pre.domain().unwrap();
        let gens = pre.presentation();
        let one = gens.field.one();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let g = CMat::random_su2(&mut rng)
                .compose(&CMat::a_t(rng.gen_range(0.0..4.0)))
                .compose(&CMat::random_su2(&mut rng));
            let (_, m1) = d.reduce(&g).unwrap();
            let w = random_word(&mut rng, gens.len(), 3);
            let wm = w.evaluate(&gens);
            let (_, m2) = d.reduce(&g.compose(&gens.embed(&wm))).unwrap();
            // gamma_{g w} = gamma_g w
            let lhs = d.moves_product(&m2, &one);
            let rhs = d.moves_product(&m1, &one).compose(&wm);
            assert!(lhs.proj_eq(&rhs, 0.0));
        }
    }

    #[test]
    fn sampler_points_lie_above_floor() {
        let s = Preset::BianchiZw.sampler().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..1000 {
            let p = s.sample_point(&mut rng);
            assert!(p.t >= s.floor_height(p.z) - 1e-12);
        }
        assert!((s.lattice.covering_radius() - 1.0 / 3f64.sqrt()).abs() < 1e-12);
        let zi = Preset::BianchiZi.sampler().unwrap();
        assert!((zi.lattice.covering_radius() - 0.5f64.sqrt()).abs() < 1e-12);
    }

    pub(crate) fn random_word<R: Rng>(rng: &mut R, k: usize, len: usize) -> Word {
        let mut w: Vec<u16> = Vec::new();
        while w.len() < len {
            let l = rng.gen_range(0..2 * k as u16);
            if w.last().is_some_and(|&p| p ^ 1 == l) {
                continue;
            }
            w.push(l);
        }
        Word(w)
    }
}
