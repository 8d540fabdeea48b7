//! Closed `H`-orbits from circles with exact coefficients: stabilizer search,
//! orbit sampling, window-mass probes and the drift probe along orbits.

use std::collections::HashSet;
use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use serde::Serialize;
use thiserror::Error;

use crate::arith::{for_each_word, normalized_trace, ArithError, Word};
use crate::circle::{Chart, Circle, CircleError};
use crate::cocycle::{markov_chain, CocycleError, ReturnMap, Target};
use crate::config::ExperimentConfig;
use crate::domain::{frame_point, DirichletDomain, FordSampler, Move};
use crate::moebius::CMat;
use crate::numberfield::FieldElement;
use crate::par::{sample_rng, try_map_samples};
use crate::presentation::{GroupPresentation, Mat};
use crate::scalar::Field;
use crate::stats;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SurfaceError {
    #[error(transparent)]
    Arith(#[from] ArithError),
    #[error(transparent)]
    Circle(#[from] CircleError),
    #[error(transparent)]
    Cocycle(#[from] CocycleError),
    #[error("stabilizer of {0} is elementary up to the searched word length")]
    Elementary(String),
    #[error("walk on {0} left the reach of the found stabilizer (|h|^2 = {1:e})")]
    WalkEscaped(String, f64),
    #[error("invalid request: {0}")]
    Invalid(String),
}

pub type ExactCircle = Circle<FieldElement>;

#[derive(Clone, Debug)]
pub struct StabilizerElement {
    pub word: Word,
    pub label: String,
    pub mat: Mat,
}

/// A circle with the part of its stabilizer found among short words.
#[derive(Clone, Debug)]
pub struct StabilizedCircle {
    pub label: String,
    pub circle: ExactCircle,
    /// One shortest word per projective class, identity excluded.
    pub stabilizer: Vec<StabilizerElement>,
    /// Two non-commuting loxodromics were found.
    pub non_elementary: bool,
    /// Shortest translation length among found loxodromics.
    pub systole: Option<f64>,
    pub word_len: usize,
}

/// Exact invariance: `g·C` is a multiple of `C`.
pub fn preserves(circle: &ExactCircle, g: &Mat) -> Result<bool, CircleError> {
    Ok(circle.transform(g)?.proj_eq(circle, 0.0))
}

fn is_loxodromic(g: &Mat) -> bool {
    let t = normalized_trace(g).to_complex();
    !(t.im.abs() < 1e-12 && t.re >= -1e-12 && t.re <= 4.0 + 1e-12)
}

fn translation_length(g: &CMat) -> f64 {
    let g = g.normalized();
    let t = g.trace();
    let s = (t * t - Complex64::new(4.0, 0.0)).sqrt();
    let l = ((t + s) / 2.0).norm().max(((t - s) / 2.0).norm());
    2.0 * l.ln()
}

fn projective_key(m: &Mat) -> Option<[FieldElement; 4]> {
    let e = [&m.a, &m.b, &m.c, &m.d];
    let lead = e.iter().find(|x| !x.is_zero())?;
    let inv = lead.inverse()?;
    Some([m.a.mul(&inv), m.b.mul(&inv), m.c.mul(&inv), m.d.mul(&inv)])
}

fn commute(g: &Mat, h: &Mat) -> bool {
    g.compose(h).proj_eq(&h.compose(g), 0.0)
}

/// All reduced words of length at most `word_len` preserving `C`, exactly.
pub fn circle_stabilizer(
    label: &str,
    circle: &ExactCircle,
    gens: &GroupPresentation,
    word_len: usize,
) -> Result<StabilizedCircle, SurfaceError> {
    let id = projective_key(&Mat::identity_like(&gens.field.one()));
    let mut seen: HashSet<[FieldElement; 4]> = id.into_iter().collect();
    let mut stab = Vec::new();
    let mut err = None;
    for_each_word(gens, word_len, |w, m| {
        match preserves(circle, m) {
            Ok(true) => {
                if let Some(k) = projective_key(m) {
                    if seen.insert(k) {
                        stab.push(StabilizerElement {
                            word: w.clone(),
                            label: w.label(&gens.labels),
                            mat: m.clone(),
                        });
                    }
                }
            }
            Ok(false) => {}
            Err(e) => {
                err = Some(e);
                return false;
            }
        }
        true
    })?;
    if let Some(e) = err {
        return Err(e.into());
    }
    let lox: Vec<&StabilizerElement> = stab.iter().filter(|s| is_loxodromic(&s.mat)).collect();
    let non_elementary = lox
        .iter()
        .enumerate()
        .any(|(i, g)| lox[i + 1..].iter().any(|h| !commute(&g.mat, &h.mat)));
    let systole = lox
        .iter()
        .map(|s| translation_length(&gens.embed(&s.mat)))
        .min_by(f64::total_cmp);
    Ok(StabilizedCircle {
        label: label.to_string(),
        circle: circle.clone(),
        stabilizer: stab,
        non_elementary,
        systole,
        word_len,
    })
}

/// The catalogued circles of a presentation, with stabilizers.
pub fn catalogue(gens: &GroupPresentation, word_len: usize) -> Result<Vec<StabilizedCircle>, SurfaceError> {
    gens.circles
        .iter()
        .map(|c| {
            let circle = Circle::new(c.a.clone(), c.b.clone(), c.c.clone())?;
            circle_stabilizer(&c.label, &circle, gens, word_len)
        })
        .collect()
}

/// Sort by systole, shortest first (the simplest surfaces), then by
/// discriminant. Circles without a found loxodromic go last.
pub fn order_by_complexity(xs: &mut [StabilizedCircle]) {
    let key = |s: &StabilizedCircle| {
        (
            s.systole.unwrap_or(f64::INFINITY),
            s.circle.discriminant().to_complex().norm(),
        )
    };
    xs.sort_by(|x, y| {
        let (a, b) = (key(x), key(y));
        a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1))
    });
}

/// A reduced frame on the orbit, with the moves that reduced it.
#[derive(Clone, Debug)]
pub struct OrbitSample {
    pub frame: CMat,
    pub moves: Vec<Move>,
}

impl OrbitSample {
    /// Height of the frame's point in the upper half-space.
    pub fn height(&self) -> f64 {
        let x = frame_point(&self.frame);
        1.0 / (x[0] - x[3])
    }
}

/// Frames `h g₀` with `g₀(C) = R̂` and `h` a random walk in `H`. The walk
/// is kept reduced modulo the conjugated stabilizer `g₀ Δ g₀^{-1}`, so `h`
/// stays bounded, and `h g₀` is reduced into the domain once at the end.
/// This is an ergodic-average surrogate for the invariant measure on the
/// orbit, not an exact sampler.
pub struct OrbitSampler<'a> {
    pub surface: &'a StabilizedCircle,
    pub domain: &'a DirichletDomain,
    pub base: CMat,
    /// Orientation-preserving stabilizer elements, conjugated into `PSL_2(R)`.
    pub fuchsian: Vec<CMat>,
    pub walk_steps: usize,
    pub seed: u64,
}

const FUCHSIAN_CAP: usize = 400;
const MAX_WALK_NORM: f64 = 1e8;

/// Real unimodular representatives, deduplicated up to sign, shortest first.
fn shortest_distinct(ms: Vec<CMat>, cap: usize) -> Vec<CMat> {
    let mut out: Vec<CMat> = Vec::new();
    let mut keyed: Vec<(f64, CMat)> = ms
        .into_iter()
        .map(|m| {
            let m = m.normalized();
            let lead = [m.a, m.b, m.c, m.d].into_iter().find(|x| x.norm() > 1e-9).unwrap();
            let m = if lead.re < 0.0 { m.scale(&Complex64::new(-1.0, 0.0)) } else { m };
            (m.frobenius_sq(), m)
        })
        .filter(|(_, m)| !m.proj_eq(&CMat::id(), 1e-9))
        .collect();
    keyed.sort_by(|x, y| x.0.total_cmp(&y.0));
    for (_, m) in keyed {
        if out.len() >= cap {
            break;
        }
        if !out.iter().any(|o| o.proj_eq(&m, 1e-9)) {
            out.push(m);
        }
    }
    out
}

const H2_CENTER: Complex64 = Complex64::new(0.1234, 1.1017);

fn h2_cosh(z: Complex64, w: Complex64) -> f64 {
    1.0 + (z - w).norm_sqr() / (2.0 * z.im * w.im)
}

fn mobius_c(g: &CMat, z: Complex64) -> Complex64 {
    (g.a * z + g.b) / (g.c * z + g.d)
}

impl<'a> OrbitSampler<'a> {
    pub fn new(
        surface: &'a StabilizedCircle,
        domain: &'a DirichletDomain,
        walk_steps: usize,
        seed: u64,
    ) -> Result<Self, SurfaceError> {
        if !surface.non_elementary {
            return Err(SurfaceError::Elementary(surface.label.clone()));
        }
        let c = surface.circle.to_complex();
        let base = Chart::for_circle(&c).inverse_map().adjugate().normalized();
        let field = surface.circle.a.field();
        let id = field.identity_embedding();
        let mut plus = Vec::new();
        let mut minus = Vec::new();
        for e in &surface.stabilizer {
            let d = base.compose(&e.mat.map(|x| id.apply(x))).compose(&base.adjugate()).normalized();
            let Some(lead) = [d.a, d.b, d.c, d.d].into_iter().max_by(|x, y| x.norm().total_cmp(&y.norm())) else {
                continue;
            };
            let r = d.scale(&(lead.norm() / lead));
            if [r.a, r.b, r.c, r.d].iter().any(|x| x.im.abs() > 1e-9) {
                continue;
            }
            let real = CMat::from_f64(r.a.re, r.b.re, r.c.re, r.d.re);
            if real.det().re > 0.0 {
                plus.push(real);
            } else {
                minus.push(real);
            }
        }
        for x in &minus {
            for y in &minus {
                plus.push(x.compose(y));
            }
        }
        let mut fuchsian = shortest_distinct(plus, FUCHSIAN_CAP);
        for _ in 0..2 {
            let mut more = fuchsian.clone();
            for x in &fuchsian {
                for y in &fuchsian {
                    more.push(x.compose(y));
                }
            }
            fuchsian = shortest_distinct(more, FUCHSIAN_CAP);
        }
        Ok(OrbitSampler {
            surface,
            domain,
            base,
            fuchsian,
            walk_steps,
            seed,
        })
    }

    /// Greedy reduction of the point `h^{-1} i` towards a generic center.
    fn reduce_h(&self, h: &CMat) -> CMat {
        let mut h = h.normalized();
        let mut p = mobius_c(&h.adjugate(), Complex64::new(0.0, 1.0));
        for _ in 0..10_000 {
            let d0 = h2_cosh(p, H2_CENTER);
            let best = self
                .fuchsian
                .iter()
                .map(|g| (g, mobius_c(g, p)))
                .map(|(g, q)| (g, q, h2_cosh(q, H2_CENTER)))
                .min_by(|x, y| x.2.total_cmp(&y.2));
            match best {
                Some((g, q, d)) if d < d0 * (1.0 - 1e-12) => {
                    p = q;
                    h = h.compose(&g.adjugate()).normalized();
                }
                _ => break,
            }
        }
        h
    }

    pub fn sample_one<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<OrbitSample, SurfaceError> {
        let mut h = CMat::id();
        for _ in 0..self.walk_steps {
            let step = CMat::a_t(rng.gen_range(0.0..3.0)).compose(&CMat::r_theta(rng.gen_range(0.0..2.0 * PI)));
            h = self.reduce_h(&step.compose(&h));
        }
        if h.frobenius_sq() > MAX_WALK_NORM {
            return Err(SurfaceError::WalkEscaped(self.surface.label.clone(), h.frobenius_sq()));
        }
        let (frame, moves) = self.domain.reduce(&h.compose(&self.base)).map_err(CocycleError::from)?;
        Ok(OrbitSample { frame, moves })
    }
}

pub fn sample_orbit(sampler: &OrbitSampler, n: usize) -> Result<Vec<OrbitSample>, SurfaceError> {
    try_map_samples(n, |i| sampler.sample_one(&mut sample_rng(sampler.seed, i)))
}

/// The sample's frame circle `f^{-1}(R̂)` equals `γ·C` for the accumulated
/// reduction element `γ`, computed exactly and compared in floating point.
pub fn on_orbit(sampler: &OrbitSampler, gens: &GroupPresentation, s: &OrbitSample, tol: f64) -> Result<bool, SurfaceError> {
    let gamma = sampler.domain.moves_product(&s.moves, &gens.field.one());
    let exact = sampler.surface.circle.transform(&gamma)?.to_complex();
    let seen = Circle::real_line().transform(&s.frame.adjugate())?;
    Ok(exact.proj_eq(&seen, tol))
}

/// A band of heights of reduced points.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct HeightWindow {
    pub lo: f64,
    pub hi: f64,
}

impl HeightWindow {
    pub fn contains(&self, h: f64) -> bool {
        self.lo <= h && h < self.hi
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct OrbitMass {
    pub label: String,
    pub systole: Option<f64>,
    pub stabilizer_size: usize,
    pub fraction: f64,
    pub error: f64,
    pub sigma: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct EquidistReport {
    pub window: HeightWindow,
    pub volume_fraction: f64,
    pub volume_samples: usize,
    pub orbit_samples: usize,
    pub orbits: Vec<OrbitMass>,
    /// Each error exceeds its predecessor by at most two standard deviations.
    pub trend_ok: bool,
}

/// Window mass of the volume measure, from reduced Ford samples.
pub fn volume_fraction(
    sampler: &FordSampler,
    domain: &DirichletDomain,
    window: HeightWindow,
    n: usize,
    seed: u64,
) -> Result<f64, SurfaceError> {
    let hits = try_map_samples(n, |i| -> Result<bool, SurfaceError> {
        let g = sampler.sample_frame(&mut sample_rng(seed, i));
        let (f, _) = domain.reduce(&g).map_err(CocycleError::from)?;
        let x = frame_point(&f);
        Ok(window.contains(1.0 / (x[0] - x[3])))
    })?;
    Ok(hits.iter().filter(|&&h| h).count() as f64 / n as f64)
}

/// Orbits are taken in the given order, which should be by increasing
/// complexity.
pub fn equidistribution_probe(
    orbits: &[StabilizedCircle],
    domain: &DirichletDomain,
    ford: &FordSampler,
    window: HeightWindow,
    cfg: &ExperimentConfig,
) -> Result<EquidistReport, SurfaceError> {
    if orbits.len() < 3 {
        return Err(SurfaceError::Invalid("need at least three orbits".into()));
    }
    let nv = 4 * cfg.samples;
    let vol = volume_fraction(ford, domain, window, nv, cfg.seed ^ 0x766f6c)?;
    let var_v = vol * (1.0 - vol) / nv as f64;
    let mut rows = Vec::new();
    for (k, s) in orbits.iter().enumerate() {
        let sampler = OrbitSampler::new(s, domain, cfg.walk_steps, cfg.seed.wrapping_add(k as u64))?;
        let hs = sample_orbit(&sampler, cfg.samples)?;
        let p = hs.iter().filter(|x| window.contains(x.height())).count() as f64 / cfg.samples as f64;
        rows.push(OrbitMass {
            label: s.label.clone(),
            systole: s.systole,
            stabilizer_size: s.stabilizer.len(),
            fraction: p,
            error: (p - vol).abs(),
            sigma: (p * (1.0 - p) / cfg.samples as f64 + var_v).sqrt(),
        });
    }
    let trend_ok = rows
        .windows(2)
        .all(|w| w[1].error <= w[0].error + 2.0 * (w[0].sigma.powi(2) + w[1].sigma.powi(2)).sqrt());
    Ok(EquidistReport {
        window,
        volume_fraction: vol,
        volume_samples: nv,
        orbit_samples: cfg.samples,
        orbits: rows,
        trend_ok,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct LambdaRow {
    pub lambda: f64,
    pub fraction: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct MainLemmaReport {
    pub label: String,
    pub tau: f64,
    /// Chain lengths counted; shorter chains are outside the statistic.
    pub n: usize,
    pub n_threshold: usize,
    pub samples: usize,
    pub lambda_hat: f64,
    pub distances: Vec<f64>,
    pub rows: Vec<LambdaRow>,
    /// Fraction with `d(u(nτ, z), o) > (λ̂/3) τ n`.
    pub fraction_at_third: f64,
}

/// Drift of `τ`-chains started on an orbit. The caller checks that the
/// target is unbounded.
pub fn main_lemma_probe<T: Target>(
    surface: &StabilizedCircle,
    rm: &ReturnMap<T>,
    lambda_hat: f64,
    cfg: &ExperimentConfig,
) -> Result<MainLemmaReport, SurfaceError> {
    let n = cfg.markov_steps();
    let n_threshold = cfg.n1().min(n);
    let sampler = OrbitSampler::new(surface, rm.domain, cfg.walk_steps, cfg.seed)?;
    let distances = try_map_samples(cfg.samples, |i| -> Result<f64, SurfaceError> {
        let mut rng = sample_rng(cfg.seed ^ 0x6d6c, i);
        let z = sampler.sample_one(&mut rng)?;
        let tr = markov_chain(rm, &z.frame, cfg.tau, n, &mut rng, None)?;
        Ok(rm.target.distance(&tr.u))
    })?;
    let scale = cfg.tau * n as f64;
    let frac = |l: f64| distances.iter().filter(|&&d| d > l * scale).count() as f64 / distances.len() as f64;
    let rows = (1..=12)
        .map(|j| {
            let lambda = lambda_hat * j as f64 / 12.0;
            LambdaRow {
                lambda,
                fraction: frac(lambda),
            }
        })
        .collect();
    Ok(MainLemmaReport {
        label: surface.label.clone(),
        tau: cfg.tau,
        n,
        n_threshold,
        samples: cfg.samples,
        lambda_hat,
        fraction_at_third: frac(lambda_hat / 3.0),
        distances,
        rows,
    })
}

/// Mean and sample standard deviation of orbit heights.
pub fn height_summary(xs: &[OrbitSample]) -> (f64, f64) {
    let h: Vec<f64> = xs.iter().map(|s| s.height()).collect();
    (stats::mean(&h), stats::sd(&h))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cocycle::FloatTarget;
    use crate::presentation::mat;
    use crate::presets::Preset;

    fn zi() -> (GroupPresentation, &'static DirichletDomain) {
        let p = Preset::BianchiZi;
        (p.presentation(), p.domain().unwrap())
    }

    fn named(gens: &GroupPresentation, label: &str) -> ExactCircle {
        let c = gens.circles.iter().find(|c| c.label == label).unwrap();
        Circle::new(c.a.clone(), c.b.clone(), c.c.clone()).unwrap()
    }

    #[test]
    fn real_and_unit_circles() {
        let (gens, _) = zi();
        let f = &gens.field;
        let real = named(&gens, "real-line");
        assert!(preserves(&real, &mat(f, ["1", "1", "0", "1"])).unwrap());
        assert!(preserves(&real, &mat(f, ["0", "-1", "1", "0"])).unwrap());
        assert!(!preserves(&real, &mat(f, ["1", "x", "0", "1"])).unwrap());
        let unit = named(&gens, "unit");
        assert!(preserves(&unit, &mat(f, ["0", "-1", "1", "0"])).unwrap());
        let s = circle_stabilizer("real-line", &real, &gens, 2).unwrap();
        for l in ["T", "S"] {
            assert!(s.stabilizer.iter().any(|e| e.label == l), "{l}");
        }
    }

    #[test]
    fn norm2_stabilizer_is_non_elementary() {
        let (gens, _) = zi();
        let c = named(&gens, "norm2");
        let s = circle_stabilizer("norm2", &c, &gens, 6).unwrap();
        assert!(s.non_elementary);
        for e in &s.stabilizer {
            assert!(preserves(&c, &e.mat).unwrap());
        }
    }

    #[test]
    fn stabilizers_conjugate() {
        let (gens, _) = zi();
        let f = &gens.field;
        let c = named(&gens, "unit");
        let g = mat(f, ["1", "x", "0", "1"]);
        let gc = c.transform(&g).unwrap();
        let s = circle_stabilizer("unit", &c, &gens, 3).unwrap();
        for e in &s.stabilizer {
            let conj = g.compose(&e.mat).compose(&g.adjugate());
            assert!(preserves(&gc, &conj).unwrap());
        }
    }

    #[test]
    fn orbit_samples_lie_on_the_orbit() {
        let (gens, d) = zi();
        let s = circle_stabilizer("norm2", &named(&gens, "norm2"), &gens, 4).unwrap();
        let sampler = OrbitSampler::new(&s, d, 30, 7).unwrap();
        assert!(sample_orbit(&sampler, 0).unwrap().is_empty());
        for x in sample_orbit(&sampler, 50).unwrap() {
            assert!(on_orbit(&sampler, &gens, &x, 1e-8).unwrap());
            assert!(d.contains(&frame_point(&x.frame), 1e-9));
        }
    }

    #[test]
    fn windows_all_and_nothing() {
        let (gens, d) = zi();
        let ford = Preset::BianchiZi.sampler().unwrap();
        let all = HeightWindow { lo: 0.0, hi: f64::INFINITY };
        let none = HeightWindow { lo: 5.0, hi: 5.0 };
        assert_eq!(volume_fraction(&ford, d, all, 200, 1).unwrap(), 1.0);
        assert_eq!(volume_fraction(&ford, d, none, 200, 1).unwrap(), 0.0);
        let mut s = catalogue(&gens, 5).unwrap();
        order_by_complexity(&mut s);
        assert_eq!(s[0].label, "real-line");
        let s: Vec<_> = s.into_iter().filter(|s| s.non_elementary).take(3).collect();
        let cfg = ExperimentConfig {
            samples: 100,
            ..Default::default()
        };
        let r = equidistribution_probe(&s, d, &ford, all, &cfg).unwrap();
        assert!(r.orbits.iter().all(|o| o.fraction == 1.0));
        let r = equidistribution_probe(&s, d, &ford, none, &cfg).unwrap();
        assert!(r.orbits.iter().all(|o| o.fraction == 0.0));
    }

    #[test]
    fn main_lemma_trivial_target() {
        let (gens, d) = zi();
        let s = circle_stabilizer("norm2", &named(&gens, "norm2"), &gens, 4).unwrap();
        let rm = ReturnMap::new(d, FloatTarget::trivial(d));
        let cfg = ExperimentConfig {
            samples: 20,
            ..Default::default()
        };
        let r = main_lemma_probe(&s, &rm, 1.0, &cfg).unwrap();
        assert_eq!(r.fraction_at_third, 0.0);
        assert!(r.rows.iter().all(|x| x.fraction == 0.0));
    }
}
