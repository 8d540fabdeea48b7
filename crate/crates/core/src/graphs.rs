//! Graphs of Möbius maps in `P^1 × P^1`, crosses, and limits of graphs.

use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::moebius::{CMat, Moebius, ProjPoint};
use crate::scalar::Field;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraphError {
    #[error("lower-left entry is zero; the graph is affine y = (a x + b) / d")]
    AffineGraph,
    #[error("sequence too short (need at least 3 elements)")]
    TooShort,
    #[error("singular element at index {0}")]
    Singular(usize),
}

pub type PPoint = ProjPoint<Complex64>;
pub type Pair = (PPoint, PPoint);

/// Whether `(x, y)` lies on the graph of `g`.
pub fn graph_contains<S: Field>(g: &Moebius<S>, x: &ProjPoint<S>, y: &ProjPoint<S>, tol: f64) -> bool {
    match g.apply(x) {
        Ok(gx) => gx.proj_eq(y, tol),
        Err(_) => false,
    }
}

/// `(u, v, w)` with the finite part of the graph given by `(s - u)(r - v) = w`:
/// `u = a/c`, `v = -d/c`, `w = -det/c^2`.
pub fn graph_product_form<S: Field>(g: &Moebius<S>) -> Result<(S, S, S), GraphError> {
    if g.c.is_zero_tol(0.0) {
        return Err(GraphError::AffineGraph);
    }
    let ci = g.c.inverse().ok_or(GraphError::AffineGraph)?;
    let u = g.a.times(&ci);
    let v = g.d.times(&ci).negated();
    let w = g.det().times(&ci).times(&ci).negated();
    Ok((u, v, w))
}

/// The set `{x = α} ∪ {y = β}`.
#[derive(Clone, Debug)]
pub struct Cross {
    pub alpha: PPoint,
    pub beta: PPoint,
}

#[derive(Clone, Debug)]
pub enum LimitClass {
    Graph(CMat),
    /// Limit cross `Crs(α, β)`: vertical line `x = α`, horizontal line `y = β`.
    CrossLimit { alpha: PPoint, beta: PPoint },
    /// The lower-left entries vanish along the tail: horizontal line `y = β`
    /// together with the point `(α, β)`. Graphs still accumulate on the
    /// whole rank-one set `{x = α} ∪ {y = β}`.
    LineAndPoint { alpha: PPoint, beta: PPoint },
    Unclassifiable(String),
}

impl LimitClass {
    pub fn name(&self) -> &'static str {
        match self {
            LimitClass::Graph(_) => "Graph",
            LimitClass::CrossLimit { .. } => "CrossLimit",
            LimitClass::LineAndPoint { .. } => "LineAndPoint",
            LimitClass::Unclassifiable(_) => "Unclassifiable",
        }
    }

    /// The set the graphs accumulate on.
    pub fn limit_set(&self) -> Option<PointSet> {
        match self {
            LimitClass::Graph(g) => Some(PointSet::Graph(g.clone())),
            LimitClass::CrossLimit { alpha, beta } | LimitClass::LineAndPoint { alpha, beta } => {
                Some(PointSet::Cross(Cross {
                    alpha: alpha.clone(),
                    beta: beta.clone(),
                }))
            }
            LimitClass::Unclassifiable(_) => None,
        }
    }
}

fn unit_rows(g: &CMat) -> CMat {
    let n = g.frobenius_sq().sqrt();
    g.scale(&Complex64::new(1.0 / n, 0.0))
}

/// Kernel and image points of a (nearly) rank-one unit-norm matrix.
fn rank_one_points(p: &CMat) -> (PPoint, PPoint) {
    let row0 = p.a.norm_sqr() + p.b.norm_sqr();
    let row1 = p.c.norm_sqr() + p.d.norm_sqr();
    let alpha = if row0 >= row1 {
        ProjPoint { r: -p.b, s: p.a }
    } else {
        ProjPoint { r: -p.d, s: p.c }
    };
    let col0 = p.a.norm_sqr() + p.c.norm_sqr();
    let col1 = p.b.norm_sqr() + p.d.norm_sqr();
    let beta = if col0 >= col1 {
        ProjPoint { r: p.a, s: p.c }
    } else {
        ProjPoint { r: p.b, s: p.d }
    };
    (alpha, beta)
}

fn proj_dist(g: &CMat, h: &CMat) -> f64 {
    let (g, h) = (unit_rows(g), unit_rows(h));
    // distance between lines in C^4
    let ip = g.a.conj() * h.a + g.b.conj() * h.b + g.c.conj() * h.c + g.d.conj() * h.d;
    (1.0 - ip.norm_sqr()).max(0.0).sqrt()
}

/// Classify the limit of the graphs of `gs` after normalising to `det = 1`.
///
/// Norms staying below `tol^{-1/2}` with settling differences give a graph;
/// norms growing beyond it with stable kernel and image points give a cross
/// (or line and point when the lower-left entries vanish on the tail).
pub fn classify_limit(gs: &[CMat], tol: f64) -> Result<LimitClass, GraphError> {
    if gs.len() < 3 {
        return Err(GraphError::TooShort);
    }
    let mut norm = Vec::with_capacity(gs.len());
    let mut hs = Vec::with_capacity(gs.len());
    for (i, g) in gs.iter().enumerate() {
        if g.det().norm() <= 1e-300 || !g.is_finite() {
            return Err(GraphError::Singular(i));
        }
        let h = g.normalized();
        norm.push(h.frobenius_sq().sqrt());
        hs.push(h);
    }
    let bound = tol.powf(-0.5);
    let tail = (gs.len() / 2).max(2);
    let tail_idx: Vec<usize> = (gs.len() - tail..gs.len()).collect();
    let last = *tail_idx.last().unwrap();
    let prev = last - 1;
    let all_bounded = tail_idx.iter().all(|&i| norm[i] <= bound);
    if all_bounded {
        let diffs: Vec<f64> = tail_idx.windows(2).map(|w| proj_dist(&hs[w[0]], &hs[w[1]])).collect();
        let last_diff = *diffs.last().unwrap();
        let max_diff = diffs.iter().cloned().fold(0.0, f64::max);
        if last_diff <= tol.sqrt() && last_diff <= max_diff {
            return Ok(LimitClass::Graph(hs[last].clone()));
        }
        return Ok(LimitClass::Unclassifiable(format!(
            "bounded but not settling (last step {last_diff:.3e})"
        )));
    }
    if norm[last] <= bound {
        return Ok(LimitClass::Unclassifiable("norms leave and re-enter the bounded regime".into()));
    }
    // diverging: norms should trend upward over the tail
    let ups = tail_idx.windows(2).filter(|w| norm[w[1]] >= norm[w[0]] * 0.999).count();
    if ups * 10 < (tail - 1) * 8 {
        return Ok(LimitClass::Unclassifiable("oscillating norms".into()));
    }
    let (a1, b1) = rank_one_points(&unit_rows(&hs[last]));
    let (a0, b0) = rank_one_points(&unit_rows(&hs[prev]));
    let settle = tol.sqrt().max(10.0 / norm[last]);
    if a1.chordal(&a0) > settle || b1.chordal(&b0) > settle {
        return Ok(LimitClass::Unclassifiable("kernel or image point still moving".into()));
    }
    let c_vanishes = tail_idx.iter().all(|&i| hs[i].c.norm() == 0.0);
    Ok(if c_vanishes {
        LimitClass::LineAndPoint { alpha: a1, beta: b1 }
    } else {
        LimitClass::CrossLimit { alpha: a1, beta: b1 }
    })
}

/// Deterministic near-uniform points of the Riemann sphere (Fibonacci lattice).
pub fn sphere_points(n: usize) -> Vec<PPoint> {
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    (0..n)
        .map(|k| {
            let z = 1.0 - 2.0 * (k as f64 + 0.5) / n as f64;
            let r = (1.0 - z * z).sqrt();
            let th = golden * k as f64;
            // stereographic from the north pole, in homogeneous form
            ProjPoint {
                r: Complex64::new(r * th.cos(), r * th.sin()),
                s: Complex64::new(1.0 - z, 0.0),
            }
        })
        .collect()
}

/// Subsets of `P^1 × P^1` that can be sampled.
#[derive(Clone, Debug)]
pub enum PointSet {
    Graph(CMat),
    Cross(Cross),
}

impl PointSet {
    /// `n` points: half parametrised by the first coordinate, half by the second.
    pub fn sample(&self, n: usize) -> Vec<Pair> {
        let half = n.div_ceil(2);
        let pts = sphere_points(half);
        let mut out = Vec::with_capacity(2 * half);
        match self {
            PointSet::Graph(g) => {
                let ginv = g.adjugate();
                for p in &pts {
                    out.push((p.clone(), apply_c(g, p)));
                    out.push((apply_c(&ginv, p), p.clone()));
                }
            }
            PointSet::Cross(c) => {
                for p in &pts {
                    out.push((c.alpha.clone(), p.clone()));
                    out.push((p.clone(), c.beta.clone()));
                }
            }
        }
        out.truncate(n);
        out
    }
}

fn apply_c(g: &CMat, p: &PPoint) -> PPoint {
    ProjPoint {
        r: g.a * p.r + g.b * p.s,
        s: g.c * p.r + g.d * p.s,
    }
}

/// Product chordal metric `max(d(x, x'), d(y, y'))`.
pub fn product_chordal(p: &Pair, q: &Pair) -> f64 {
    p.0.chordal(&q.0).max(p.1.chordal(&q.1))
}

/// Symmetric Hausdorff distance between `n`-point samples.
pub fn sampled_hausdorff(a: &PointSet, b: &PointSet, n: usize) -> f64 {
    let pa = a.sample(n.max(1));
    let pb = b.sample(n.max(1));
    let mut rng = ChaCha8Rng::seed_from_u64(0x6861);
    let (mut sa, mut sb) = (pa.clone(), pb.clone());
    sa.shuffle(&mut rng);
    sb.shuffle(&mut rng);
    directed_hausdorff(&pa, &sb).max(directed_hausdorff(&pb, &sa))
}

/// `max_x min_y d(x, y)`. The inner scan stops once some `y` is closer than
/// the running maximum, which leaves the value unchanged; a shuffled `y`
/// makes that happen early.
fn directed_hausdorff(x: &[Pair], y: &[Pair]) -> f64 {
    let mut cmax = 0.0f64;
    for p in x {
        let mut cmin = f64::INFINITY;
        for q in y {
            let d = product_chordal(p, q);
            if d < cmin {
                cmin = d;
                if cmin <= cmax {
                    break;
                }
            }
        }
        cmax = cmax.max(cmin);
    }
    cmax
}

/// The three canonical sequences at indices `2^k`, `k = 0..=kmax`.
pub fn canonical_sequence(name: &str, kmax: u32) -> Option<Vec<CMat>> {
    let f = |k: u32| 2f64.powi(k as i32);
    let seq = (0..=kmax).map(|k| {
        let t = f(k);
        match name {
            "identity" => Some(CMat::id()),
            "translation" => Some(CMat::from_f64(1.0, t, 0.0, 1.0)),
            "inversion" => Some(CMat::from_f64(t, -1.0, 1.0, 0.0)),
            _ => None,
        }
    });
    seq.collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn pc(re: f64) -> PPoint {
        ProjPoint::from_c(Complex64::new(re, 0.0))
    }

    #[test]
    fn containment() {
        let id = CMat::id();
        for p in sphere_points(20) {
            assert!(graph_contains(&id, &p, &p, 1e-12));
        }
        let s = Moebius::from_entries(q(0, 1), q(-1, 1), q(1, 1), q(0, 1));
        assert!(graph_contains(&s, &ProjPoint::finite(q(2, 1)), &ProjPoint::finite(q(-1, 2)), 0.0));
        assert!(!graph_contains(&id, &pc(2.0), &pc(3.0), 1e-12));
    }

    #[test]
    fn product_form_examples() {
        let s = Moebius::from_entries(q(0, 1), q(-1, 1), q(1, 1), q(0, 1));
        assert_eq!(graph_product_form(&s).unwrap(), (q(0, 1), q(0, 1), q(-1, 1)));
        let g = Moebius::from_entries(q(1, 1), q(0, 1), q(1, 1), q(1, 1));
        let (u, v, w) = graph_product_form(&g).unwrap();
        assert_eq!((u.clone(), v.clone(), w.clone()), (q(1, 1), q(-1, 1), q(-1, 1)));
        // r = 0 maps to s = 0
        assert_eq!((q(0, 1) - u) * (q(0, 1) - v), w);
        let t = Moebius::from_entries(q(1, 1), q(1, 1), q(0, 1), q(1, 1));
        assert_eq!(graph_product_form(&t), Err(GraphError::AffineGraph));
    }

    #[test]
    fn canonical_classes() {
        let id = classify_limit(&canonical_sequence("identity", 20).unwrap(), 1e-6).unwrap();
        assert_eq!(id.name(), "Graph");
        let tr = classify_limit(&canonical_sequence("translation", 20).unwrap(), 1e-6).unwrap();
        match &tr {
            LimitClass::LineAndPoint { alpha, beta } => {
                assert!(alpha.is_infinity(1e-5) && beta.is_infinity(1e-5));
            }
            other => panic!("{other:?}"),
        }
        let inv = classify_limit(&canonical_sequence("inversion", 20).unwrap(), 1e-6).unwrap();
        match &inv {
            LimitClass::CrossLimit { alpha, beta } => {
                assert!(alpha.chordal(&pc(0.0)) < 1e-6);
                assert!(beta.is_infinity(1e-6));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn inverses_swap_cross_coordinates() {
        let seq: Vec<CMat> = (0..=20)
            .map(|k| CMat::from_f64(2f64.powi(k), 3.0, 1.0, 0.5).compose(&CMat::from_f64(1.0, 0.0, 2.0, 1.0)))
            .collect();
        let inv: Vec<CMat> = seq.iter().map(|g| g.adjugate()).collect();
        let (LimitClass::CrossLimit { alpha: a, beta: b }, LimitClass::CrossLimit { alpha: a2, beta: b2 }) =
            (classify_limit(&seq, 1e-6).unwrap(), classify_limit(&inv, 1e-6).unwrap())
        else {
            panic!("expected crosses");
        };
        assert!(a.chordal(&b2) < 1e-5 && b.chordal(&a2) < 1e-5);
    }

    #[test]
    fn oscillating_sequence_is_unclassifiable() {
        let seq: Vec<CMat> = (0..20)
            .map(|k| if k % 2 == 0 { CMat::id() } else { CMat::from_f64(1.0, 2f64.powi(k), 0.0, 1.0) })
            .collect();
        assert_eq!(classify_limit(&seq, 1e-6).unwrap().name(), "Unclassifiable");
        assert_eq!(classify_limit(&seq[..2], 1e-6).unwrap_err(), GraphError::TooShort);
    }

    #[test]
    fn hausdorff_examples() {
        let id = PointSet::Graph(CMat::id());
        assert_eq!(sampled_hausdorff(&id, &id, 500), 0.0);
        let g = PointSet::Graph(CMat::from_f64(2f64.powi(20), 0.0, 0.0, 1.0));
        let cross = PointSet::Cross(Cross {
            alpha: pc(0.0),
            beta: ProjPoint::inf(),
        });
        assert!(sampled_hausdorff(&g, &cross, 2000) < 0.05);
        assert!(sampled_hausdorff(&id, &cross, 2000) > 0.3);
    }

    #[test]
    fn early_exit_matches_brute_force() {
        let brute = |a: &PointSet, b: &PointSet, n: usize| {
            let (pa, pb) = (a.sample(n), b.sample(n));
            let dir = |x: &[Pair], y: &[Pair]| {
                x.iter()
                    .map(|p| y.iter().map(|q| product_chordal(p, q)).fold(f64::INFINITY, f64::min))
                    .fold(0.0, f64::max)
            };
            dir(&pa, &pb).max(dir(&pb, &pa))
        };
        let sets = [
            PointSet::Graph(CMat::id()),
            PointSet::Graph(CMat::from_f64(3.0, 1.0, 1.0, 0.5)),
            PointSet::Graph(CMat::from_f64(2f64.powi(10), -1.0, 1.0, 0.0)),
            PointSet::Cross(Cross {
                alpha: pc(0.0),
                beta: ProjPoint::inf(),
            }),
        ];
        for a in &sets {
            for b in &sets {
                assert_eq!(sampled_hausdorff(a, b, 300), brute(a, b, 300));
            }
        }
    }
}
