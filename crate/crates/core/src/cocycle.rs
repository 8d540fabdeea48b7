//! The return-map cocycle `u(t, x) = ω(x) ω(a_t x)^{-1}` along the frame
//! flow, pushed into a target group, and its drift statistics.
//!
//! Products are accumulated with the newest factor on the right, so that
//! `u(n + m, x) = u(m, x) u(n, a_m x)`.

use std::f64::consts::{LN_2, PI};

use num_complex::Complex64;
use rand::Rng;
use serde::Serialize;
use thiserror::Error;

use crate::config::{ExperimentConfig, TargetSpec};
use crate::domain::{DirichletDomain, DomainError, FordSampler, Move};
use crate::moebius::CMat;
use crate::numberfield::{Embedding, FinitePlace, NumberField};
use crate::padic::place_tree_distance;
use crate::par::{sample_rng, try_map_samples};
use crate::presentation::Mat;
use crate::stats;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CocycleError {
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error("budget exceeded: {0}")]
    BudgetExceeded(String),
    #[error("invalid request: {0}")]
    Invalid(String),
}

/// A group the cocycle takes values in, with a base point.
pub trait Target: Sync {
    type Elem: Clone + Send + Sync;
    fn identity(&self) -> Self::Elem;
    /// `ρ(m)^{-1}` for a reduction move.
    fn move_inv(&self, m: &Move) -> Self::Elem;
    fn mul(&self, x: &Self::Elem, y: &Self::Elem) -> Self::Elem;
    fn inverse(&self, x: &Self::Elem) -> Self::Elem;
    /// `d(x o, o)`.
    fn distance(&self, x: &Self::Elem) -> f64;
    fn dist_between(&self, x: &Self::Elem, y: &Self::Elem) -> f64 {
        self.distance(&self.mul(&self.inverse(x), y))
    }
}

/// `e^{s} m` with `|m|_F = 1`; `ld = log|det|` of the represented matrix.
#[derive(Clone, Debug)]
pub struct LogMat {
    pub m: CMat,
    pub s: f64,
    pub ld: f64,
}

impl LogMat {
    pub fn from_cmat(g: &CMat) -> Self {
        let n = g.frobenius_sq().sqrt();
        LogMat {
            m: g.scale(&Complex64::new(1.0 / n, 0.0)),
            s: n.ln(),
            ld: g.det().norm().ln(),
        }
    }

    /// `a_t` without overflow for large `|t|`.
    pub fn a_t(t: f64) -> Self {
        let h = t.abs() / 2.0;
        let r = (-2.0 * h).exp();
        let n = (1.0 + r * r).sqrt();
        let (big, small) = (Complex64::new(1.0 / n, 0.0), Complex64::new(r / n, 0.0));
        let zero = Complex64::new(0.0, 0.0);
        let m = if t >= 0.0 {
            CMat::from_entries(big, zero, zero, small)
        } else {
            CMat::from_entries(small, zero, zero, big)
        };
        LogMat { m, s: h + n.ln(), ld: 0.0 }
    }

    pub fn mul(&self, o: &LogMat) -> LogMat {
        let p = self.m.compose(&o.m);
        let n = p.frobenius_sq().sqrt();
        LogMat {
            m: p.scale(&Complex64::new(1.0 / n, 0.0)),
            s: self.s + o.s + n.ln(),
            ld: self.ld + o.ld,
        }
    }

    /// Up to a unimodular scalar.
    pub fn inverse(&self) -> LogMat {
        LogMat {
            m: self.m.adjugate(),
            s: self.s - self.ld,
            ld: -self.ld,
        }
    }

    /// `d(g o, o)` from `cosh d = |g|_F^2 / (2 |det g|)`.
    pub fn distance(&self) -> f64 {
        let l = 2.0 * self.s - self.ld - LN_2;
        if l > 20.0 {
            l + LN_2
        } else {
            l.exp().max(1.0).acosh()
        }
    }
}

/// A complex embedding of the field, in floating point; `None` is the
/// trivial representation realised in `PGL_2(C)`.
pub struct FloatTarget<'a> {
    pub domain: &'a DirichletDomain,
    pub embedding: Option<Embedding>,
    face_inv: Vec<LogMat>,
}

impl<'a> FloatTarget<'a> {
    pub fn new(domain: &'a DirichletDomain, embedding: Embedding) -> Self {
        let face_inv = domain
            .faces
            .iter()
            .map(|f| LogMat::from_cmat(&f.mat.adjugate().map(|x| embedding.apply(x))))
            .collect();
        FloatTarget {
            domain,
            embedding: Some(embedding),
            face_inv,
        }
    }

    pub fn trivial(domain: &'a DirichletDomain) -> Self {
        FloatTarget {
            domain,
            embedding: None,
            face_inv: vec![LogMat::from_cmat(&CMat::id()); domain.faces.len()],
        }
    }
}

impl Target for FloatTarget<'_> {
    type Elem = LogMat;
    fn identity(&self) -> LogMat {
        LogMat::from_cmat(&CMat::id())
    }
    fn move_inv(&self, m: &Move) -> LogMat {
        match m {
            Move::Face(k) => self.face_inv[*k].clone(),
            Move::Translate(..) => match &self.embedding {
                Some(e) => LogMat::from_cmat(&self.domain.move_mat(m).adjugate().map(|x| e.apply(x))),
                None => self.identity(),
            },
        }
    }
    fn mul(&self, x: &LogMat, y: &LogMat) -> LogMat {
        x.mul(y)
    }
    fn inverse(&self, x: &LogMat) -> LogMat {
        x.inverse()
    }
    fn distance(&self, x: &LogMat) -> f64 {
        x.distance()
    }
}

/// Exact values in the ambient field: `H^3` through the identity embedding,
/// or the tree of a finite place.
pub struct ExactTarget<'a> {
    pub domain: &'a DirichletDomain,
    pub field: NumberField,
    pub place: Option<FinitePlace>,
    face_inv: Vec<Mat>,
}

impl<'a> ExactTarget<'a> {
    pub fn new(domain: &'a DirichletDomain, field: NumberField, place: Option<FinitePlace>) -> Self {
        let face_inv = domain.faces.iter().map(|f| f.mat.adjugate()).collect();
        ExactTarget {
            domain,
            field,
            place,
            face_inv,
        }
    }
}

impl Target for ExactTarget<'_> {
    type Elem = Mat;
    fn identity(&self) -> Mat {
        Mat::identity_like(&self.field.one())
    }
    fn move_inv(&self, m: &Move) -> Mat {
        match m {
            Move::Face(k) => self.face_inv[*k].clone(),
            Move::Translate(..) => self.domain.move_mat(m).adjugate(),
        }
    }
    fn mul(&self, x: &Mat, y: &Mat) -> Mat {
        x.compose(y)
    }
    fn inverse(&self, x: &Mat) -> Mat {
        x.adjugate()
    }
    fn distance(&self, x: &Mat) -> f64 {
        match &self.place {
            Some(p) => place_tree_distance(p, x).expect("invertible") as f64,
            None => {
                let id = self.field.identity_embedding();
                LogMat::from_cmat(&x.map(|e| id.apply(e))).distance()
            }
        }
    }
}

/// The trivial representation.
pub struct TrivialTarget;

impl Target for TrivialTarget {
    type Elem = ();
    fn identity(&self) {}
    fn move_inv(&self, _: &Move) {}
    fn mul(&self, _: &(), _: &()) {}
    fn inverse(&self, _: &()) {}
    fn distance(&self, _: &()) -> f64 {
        0.0
    }
}

/// Frame, accumulated value, and elapsed flow time.
#[derive(Clone, Debug)]
pub struct CocycleState<E> {
    pub frame: CMat,
    pub u: E,
    pub time: f64,
}

/// `ω` on frames through a Dirichlet domain, pushed into a target.
pub struct ReturnMap<'a, T: Target> {
    pub domain: &'a DirichletDomain,
    pub target: T,
}

impl<'a, T: Target> ReturnMap<'a, T> {
    pub fn new(domain: &'a DirichletDomain, target: T) -> Self {
        ReturnMap { domain, target }
    }

    /// `ρ(γ)^{-1}` for the element `γ = m_k ... m_1` of a reduction.
    pub fn moves_inv(&self, moves: &[Move]) -> T::Elem {
        let mut acc = self.target.identity();
        for m in moves {
            acc = self.target.mul(&acc, &self.target.move_inv(m));
        }
        acc
    }

    /// Reduce `g` into the domain; `u = id`.
    pub fn start(&self, g: &CMat) -> Result<CocycleState<T::Elem>, CocycleError> {
        let (frame, _) = self.domain.reduce(g)?;
        Ok(CocycleState {
            frame,
            u: self.target.identity(),
            time: 0.0,
        })
    }

    /// Flow for time `t` in substeps of length at most 1; returns the increment.
    pub fn flow(&self, st: &mut CocycleState<T::Elem>, t: f64) -> Result<T::Elem, CocycleError> {
        let inc = self.advance(&mut st.frame, t)?;
        st.u = self.target.mul(&st.u, &inc);
        st.time += t;
        Ok(inc)
    }

    /// Move a reduced frame by `a_t` and reduce again; `u(t, x)` for its point.
    pub fn advance(&self, frame: &mut CMat, t: f64) -> Result<T::Elem, CocycleError> {
        let steps = t.ceil().max(1.0) as usize;
        let a = CMat::a_t(t / steps as f64);
        let mut inc = self.target.identity();
        for _ in 0..steps {
            let (f, moves) = self.domain.reduce(&a.compose(frame))?;
            *frame = f;
            inc = self.target.mul(&inc, &self.moves_inv(&moves));
        }
        Ok(inc)
    }

    /// `r_θ` fixes the base point, so the frame stays in the domain.
    pub fn rotate(&self, st: &mut CocycleState<T::Elem>, theta: f64) {
        st.frame = CMat::r_theta(theta).compose(&st.frame).normalized();
    }
}

/// `u(n, x)` for `x = π(g)`, by unit steps.
pub fn cocycle_u<T: Target>(rm: &ReturnMap<T>, n: usize, g: &CMat) -> Result<T::Elem, CocycleError> {
    let mut st = rm.start(g)?;
    for _ in 0..n {
        rm.flow(&mut st, 1.0)?;
    }
    Ok(st.u)
}

/// `u(t, x)` from a single reduction of `a_t g`.
pub fn cocycle_u_oneshot<T: Target>(rm: &ReturnMap<T>, t: f64, g: &CMat) -> Result<T::Elem, CocycleError> {
    let (f0, _) = rm.domain.reduce(g)?;
    let (_, moves) = rm.domain.reduce(&CMat::a_t(t).compose(&f0))?;
    Ok(rm.moves_inv(&moves))
}

/// Ordered product by halving, so exact entries grow evenly.
pub fn tree_product<T: Target>(target: &T, xs: &[T::Elem]) -> T::Elem {
    match xs.len() {
        0 => target.identity(),
        1 => xs[0].clone(),
        l => target.mul(&tree_product(target, &xs[..l / 2]), &tree_product(target, &xs[l / 2..])),
    }
}

/// Start frame for sample streams: volume sample, then a short random word.
pub fn sample_start<R: Rng + ?Sized>(sampler: &FordSampler, domain: &DirichletDomain, rng: &mut R) -> CMat {
    let g = sampler.sample_frame(rng);
    let k = domain.faces.len();
    let mut w = g;
    for _ in 0..3 {
        w = w.compose(&domain.faces[rng.gen_range(0..k)].fmat);
    }
    w.normalized()
}

#[derive(Clone, Debug, Serialize)]
pub struct SampleRow {
    pub sample: usize,
    pub n: usize,
    pub theta_seed: u64,
    pub dist: f64,
    pub slope: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct DriftReport {
    pub rows: Vec<SampleRow>,
    /// Mean of `d(u(n), o) / n`.
    pub slope: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    /// Same statistic at `n / 2`.
    pub slope_half: f64,
    /// `|slope - slope_half| / |slope|` (0 when both vanish).
    pub doubling_change: f64,
    /// Least squares slope of mean distance over ten checkpoints.
    pub lsq_slope: f64,
    pub lsq_residual: f64,
    /// Largest single-step displacement seen.
    pub max_step: f64,
    /// `d(u(n), o) <= max_step * n` on every sample.
    pub trivial_bound_ok: bool,
    /// Largest `dev_k / k` over the final 20% of checkpoints, where `dev_k`
    /// is the Gromov deviation of `u(k) o` from the segment `[o, u(n) o]`.
    pub tracking_ratio: f64,
}

struct SampleRun {
    dist: Vec<f64>,
    max_step: f64,
    tracking: f64,
}

/// Monte Carlo estimate of the top drift of the unit-time cocycle.
pub fn lyapunov_estimate<T: Target>(
    rm: &ReturnMap<T>,
    sampler: &FordSampler,
    cfg: &ExperimentConfig,
) -> Result<DriftReport, CocycleError> {
    if cfg.samples < 30 {
        return Err(CocycleError::Invalid("at least 30 samples".into()));
    }
    let n = cfg.n.max(10);
    let checkpoints: Vec<usize> = (1..=10).map(|j| j * n / 10).collect();
    let runs = try_map_samples(cfg.samples, |i| -> Result<SampleRun, CocycleError> {
        let mut rng = sample_rng(cfg.seed, i);
        let g = sample_start(sampler, rm.domain, &mut rng);
        let (mut frame, _) = rm.domain.reduce(&g)?;
        let mut max_step = 0.0f64;
        let mut segments = Vec::with_capacity(10);
        let mut incs = Vec::new();
        for k in 1..=n {
            let inc = rm.advance(&mut frame, 1.0)?;
            max_step = max_step.max(rm.target.distance(&inc));
            incs.push(inc);
            if checkpoints.contains(&k) {
                segments.push(tree_product(&rm.target, &incs));
                incs.clear();
            }
        }
        let mut prefix = Vec::with_capacity(10);
        let mut u = rm.target.identity();
        for s in &segments {
            u = rm.target.mul(&u, s);
            prefix.push(u.clone());
        }
        let dist: Vec<f64> = prefix.iter().map(|u| rm.target.distance(u)).collect();
        let dn = dist[9];
        let mut tracking = 0.0f64;
        let mut rest = rm.target.identity();
        for j in (0..10).rev() {
            if 10 * checkpoints[j] < 8 * n {
                break;
            }
            let dev = (dist[j] - dn + rm.target.distance(&rest)) / 2.0;
            tracking = tracking.max(dev.max(0.0) / checkpoints[j] as f64);
            rest = rm.target.mul(&segments[j], &rest);
        }
        Ok(SampleRun {
            dist,
            max_step,
            tracking,
        })
    })?;
    let slopes: Vec<f64> = runs.iter().map(|r| r.dist[9] / n as f64).collect();
    let halves: Vec<f64> = runs.iter().map(|r| r.dist[4] / checkpoints[4] as f64).collect();
    let (ci_low, ci_high) = stats::ci95(&slopes);
    let slope = stats::mean(&slopes);
    let slope_half = stats::mean(&halves);
    let xs: Vec<f64> = checkpoints.iter().map(|&k| k as f64).collect();
    let ys: Vec<f64> = (0..10).map(|j| stats::mean(&runs.iter().map(|r| r.dist[j]).collect::<Vec<_>>())).collect();
    let (_, lsq_slope, lsq_residual) = stats::least_squares(&xs, &ys);
    let max_step = runs.iter().map(|r| r.max_step).fold(0.0, f64::max);
    let trivial_bound_ok = runs.iter().all(|r| r.dist[9] <= r.max_step * n as f64 + 1e-9);
    let rows = runs
        .iter()
        .enumerate()
        .map(|(i, r)| SampleRow {
            sample: i,
            n,
            theta_seed: i as u64,
            dist: r.dist[9],
            slope: r.dist[9] / n as f64,
        })
        .collect();
    Ok(DriftReport {
        rows,
        slope,
        ci_low,
        ci_high,
        slope_half,
        doubling_change: if slope == 0.0 && slope_half == 0.0 {
            0.0
        } else {
            ((slope - slope_half) / slope).abs()
        },
        lsq_slope,
        lsq_residual,
        max_step,
        trivial_bound_ok,
        tracking_ratio: runs.iter().map(|r| r.tracking).fold(0.0, f64::max),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct ThetaRow {
    pub theta: f64,
    pub dist: f64,
    /// `d(u o, ξ_t)` for the reference geodesic `ξ_t = a_t o`.
    pub to_xi: f64,
    pub excess: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct RotationProfile {
    pub rows: Vec<ThetaRow>,
    /// `λ̂ n / 3`.
    pub threshold: f64,
    /// Fraction of θ with `excess > λ̂ n / 3`.
    pub fraction_exceeding: f64,
    /// θ-average of the excess, to compare with `λ̂ n / 5`.
    pub mean_excess: f64,
}

/// `d(u(n, r_θ g) o, ξ_t) - t` over a θ-grid for `ξ_t = a_t o`, with the
/// fraction of θ where it exceeds `λ̂ n / 3`.
pub fn rotation_drift_profile<T>(
    rm: &ReturnMap<T>,
    g: &CMat,
    n: usize,
    lambda_hat: f64,
    t_ref: f64,
    grid: usize,
) -> Result<RotationProfile, CocycleError>
where
    T: Target<Elem = LogMat>,
{
    if grid < 64 {
        return Err(CocycleError::Invalid("θ-grid must have at least 64 points".into()));
    }
    let xi_inv = LogMat::a_t(-t_ref);
    let rows = try_map_samples(grid, |j| -> Result<ThetaRow, CocycleError> {
        let theta = 2.0 * PI * j as f64 / grid as f64;
        let u = cocycle_u(rm, n, &CMat::r_theta(theta).compose(g))?;
        let to_xi = xi_inv.mul(&u).distance();
        Ok(ThetaRow {
            theta,
            dist: u.distance(),
            to_xi,
            excess: to_xi - t_ref,
        })
    })?;
    let threshold = lambda_hat * n as f64 / 3.0;
    let over = rows.iter().filter(|r| r.excess > threshold).count();
    Ok(RotationProfile {
        fraction_exceeding: over as f64 / grid as f64,
        mean_excess: stats::mean(&rows.iter().map(|r| r.excess).collect::<Vec<_>>()),
        threshold,
        rows,
    })
}

/// A `τ`-step chain `w_j = a_τ r_{θ_j} w_{j-1}` with its increments.
#[derive(Clone, Debug)]
pub struct MarkovTrajectory<E> {
    pub thetas: Vec<f64>,
    pub increments: Vec<E>,
    /// `u_{z,n} = u(τ, r_{θ_1} z) ... u(τ, r_{θ_n} w_{n-1})`.
    pub u: E,
    pub state: CocycleState<E>,
}

/// Run `n` Markov steps from `z`; `thetas` forces the angles when given.
pub fn markov_chain<T: Target, R: Rng + ?Sized>(
    rm: &ReturnMap<T>,
    z: &CMat,
    tau: f64,
    n: usize,
    rng: &mut R,
    thetas: Option<&[f64]>,
) -> Result<MarkovTrajectory<T::Elem>, CocycleError> {
    let mut st = rm.start(z)?;
    let mut th = Vec::with_capacity(n);
    let mut incs = Vec::with_capacity(n);
    for j in 0..n {
        let theta = match thetas {
            Some(t) => t[j],
            None => rng.gen_range(0.0..2.0 * PI),
        };
        rm.rotate(&mut st, theta);
        incs.push(rm.flow(&mut st, tau)?);
        th.push(theta);
    }
    Ok(MarkovTrajectory {
        thetas: th,
        increments: incs,
        u: st.u.clone(),
        state: st,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct MartingaleReport {
    pub trials: usize,
    pub n: usize,
    pub n1: usize,
    pub c: f64,
    pub grid: usize,
    /// Fraction of trials with `max_{N1<=m<=N} |S_m| / m > c`.
    pub frequency: f64,
    /// Right-hand side with second moments from the same runs.
    pub bound: f64,
    /// Largest `|φ|` seen.
    pub max_increment: f64,
    pub second_moments: Vec<f64>,
}

/// Empirical check of the maximal inequality for the centred increments
/// `φ̂_ℓ = φ(θ_ℓ) - mean_θ φ(θ)`, where
/// `φ(θ) = d(u_{ℓ-1} u(τ, r_θ w_{ℓ-1}) o, o) - d(u_{ℓ-1} o, o)`.
pub fn martingale_test<T: Target>(
    rm: &ReturnMap<T>,
    sampler: &FordSampler,
    cfg: &ExperimentConfig,
    c: f64,
) -> Result<MartingaleReport, CocycleError> {
    if cfg.trials < 100 {
        return Err(CocycleError::Invalid("at least 100 trials".into()));
    }
    let n = cfg.markov_steps();
    let n1 = cfg.n1().min(n);
    let grid = cfg.grid.max(1);
    let runs = try_map_samples(cfg.trials, |i| -> Result<(Vec<f64>, f64), CocycleError> {
        let mut rng = sample_rng(cfg.seed, i);
        let z = sample_start(sampler, rm.domain, &mut rng);
        let mut st = rm.start(&z)?;
        let mut phis = Vec::with_capacity(n);
        let mut max_inc = 0.0f64;
        for _ in 0..n {
            let d0 = rm.target.distance(&st.u);
            let phi = |theta: f64| -> Result<(f64, CocycleState<T::Elem>), CocycleError> {
                let mut s = st.clone();
                rm.rotate(&mut s, theta);
                rm.flow(&mut s, cfg.tau)?;
                Ok((rm.target.distance(&s.u) - d0, s))
            };
            let mut mean = 0.0;
            for j in 0..grid {
                mean += phi(2.0 * PI * j as f64 / grid as f64)?.0;
            }
            mean /= grid as f64;
            let (p, next) = phi(rng.gen_range(0.0..2.0 * PI))?;
            max_inc = max_inc.max(p.abs());
            phis.push(p - mean);
            st = next;
        }
        Ok((phis, max_inc))
    })?;
    let second_moments: Vec<f64> = (0..n)
        .map(|l| stats::mean(&runs.iter().map(|(p, _)| p[l] * p[l]).collect::<Vec<_>>()))
        .collect();
    let mut tail = 0.0;
    for m in n1..=n {
        tail += second_moments[m - 1] / (m * m) as f64;
    }
    let head: f64 = second_moments[..n1].iter().sum::<f64>() / (n1 * n1) as f64;
    let bound = (tail + head) / (c * c);
    let exceed = runs
        .iter()
        .filter(|(p, _)| {
            let mut s = 0.0;
            let mut hit = false;
            for (l, v) in p.iter().enumerate() {
                s += v;
                let m = l + 1;
                if m >= n1 && (s / m as f64).abs() > c {
                    hit = true;
                }
            }
            hit
        })
        .count();
    Ok(MartingaleReport {
        trials: cfg.trials,
        n,
        n1,
        c,
        grid,
        frequency: exceed as f64 / cfg.trials as f64,
        bound,
        max_increment: runs.iter().map(|r| r.1).fold(0.0, f64::max),
        second_moments,
    })
}

/// The float target for a configured embedding (identity when `None`).
pub fn float_target<'a>(
    domain: &'a DirichletDomain,
    field: &NumberField,
    spec: &TargetSpec,
) -> Result<FloatTarget<'a>, CocycleError> {
    let emb = match spec {
        TargetSpec::Embedding(None) => field.identity_embedding(),
        TargetSpec::Embedding(Some(k)) => field
            .embeddings()
            .into_iter()
            .nth(*k)
            .ok_or_else(|| CocycleError::Invalid(format!("no embedding #{k}")))?,
        _ => return Err(CocycleError::Invalid("not an embedding target".into())),
    };
    Ok(FloatTarget::new(domain, emb))
}
