//! Reproducible experiment runs: one CSV table and one JSON summary per
//! subcommand, with a manifest hashing every input.

use std::cell::OnceCell;
use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::arith::{arithmeticity_test, ArithError, ArithmeticityVerdict, Place};
use crate::circle::{inversion_generation, random_linked_unit, CCircle, Chart, Circle, CircleError, LinkedPair};
use crate::cocycle::{
    float_target, lyapunov_estimate, martingale_test, rotation_drift_profile, sample_start, CocycleError,
    ExactTarget, FloatTarget, ReturnMap, TrivialTarget,
};
use crate::config::{ConfigError, ExperimentConfig, TargetSpec};
use crate::domain::{CuspLattice, DirichletDomain, DomainError, FordSampler};
use crate::graphs::{canonical_sequence, classify_limit, sampled_hausdorff, GraphError, PointSet};
use crate::moebius::ProjPoint;
use crate::par::{map_samples, sample_rng};
use crate::presentation::{parse_presentation, GroupPresentation, PresentationError};
use crate::presets::{build_domain, Preset};
use crate::surfaces::{
    catalogue, circle_stabilizer, equidistribution_probe, main_lemma_probe, order_by_complexity, HeightWindow,
    SurfaceError,
};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("budget exceeded: {0}")]
    Budget(String),
    #[error("{0}")]
    Failed(String),
    #[error("write failed: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Budget(_) => 3,
            CliError::Failed(_) | CliError::Io(_) => 1,
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Validation(format!("config: {e}"))
    }
}

impl From<PresentationError> for CliError {
    fn from(e: PresentationError) -> Self {
        CliError::Validation(format!("presentation: {e}"))
    }
}

impl From<DomainError> for CliError {
    fn from(e: DomainError) -> Self {
        CliError::Budget(e.to_string())
    }
}

impl From<CocycleError> for CliError {
    fn from(e: CocycleError) -> Self {
        match e {
            CocycleError::Domain(d) => d.into(),
            CocycleError::BudgetExceeded(_) => CliError::Budget(e.to_string()),
            CocycleError::Invalid(m) => CliError::Validation(m),
        }
    }
}

impl From<ArithError> for CliError {
    fn from(e: ArithError) -> Self {
        match e {
            ArithError::BudgetExceeded(_) => CliError::Budget(e.to_string()),
            ArithError::WordLength(_) => CliError::Validation(e.to_string()),
            ArithError::PrimitiveElementFailure => CliError::Failed(e.to_string()),
        }
    }
}

impl From<CircleError> for CliError {
    fn from(e: CircleError) -> Self {
        CliError::Failed(e.to_string())
    }
}

impl From<GraphError> for CliError {
    fn from(e: GraphError) -> Self {
        match e {
            GraphError::TooShort => CliError::Validation(e.to_string()),
            _ => CliError::Failed(e.to_string()),
        }
    }
}

impl From<SurfaceError> for CliError {
    fn from(e: SurfaceError) -> Self {
        match e {
            SurfaceError::Arith(a) => a.into(),
            SurfaceError::Circle(c) => c.into(),
            SurfaceError::Cocycle(c) => c.into(),
            SurfaceError::Elementary(_) | SurfaceError::WalkEscaped(..) => CliError::Budget(e.to_string()),
            SurfaceError::Invalid(m) => CliError::Validation(m),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Lyapunov,
    Drift,
    InversionDemo,
    ClassifyLimit,
    Arithmeticity,
    Equidist,
    MainLemma,
    Martingale,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Lyapunov => "lyapunov",
            Command::Drift => "drift",
            Command::InversionDemo => "inversion-demo",
            Command::ClassifyLimit => "classify-limit",
            Command::Arithmeticity => "arithmeticity",
            Command::Equidist => "equidist",
            Command::MainLemma => "main-lemma",
            Command::Martingale => "martingale",
        }
    }

    /// Whether the command reads a group at all.
    fn uses_group(self) -> bool {
        !matches!(self, Command::InversionDemo | Command::ClassifyLimit)
    }
}

/// Everything a run depends on, as given on the command line.
#[derive(Clone, Debug, Default)]
pub struct RunArgs {
    pub config: Option<PathBuf>,
    pub presentation: Option<PathBuf>,
    pub preset: Option<String>,
    pub seed: Option<u64>,
    /// `key=value` overrides, applied after the config file.
    pub set: Vec<String>,
    pub out: PathBuf,
}

#[derive(Clone, Debug, Serialize)]
pub struct InputHash {
    pub name: String,
    pub hash: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub config_path: Option<String>,
    pub input_paths: Vec<String>,
    pub preset: Option<String>,
    pub seed: u64,
    pub output_dir: String,
    pub inputs: Vec<InputHash>,
    /// Hash over the sorted `name hash` lines of `inputs`.
    pub input_hash: String,
}

/// `sha256("blob <len>\0" ++ bytes)`, as git computes object ids.
pub fn git_blob_hash(bytes: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(format!("blob {}\0", bytes.len()).as_bytes());
    h.update(bytes);
    hex::encode(h.finalize())
}

fn combined_hash(inputs: &[InputHash]) -> String {
    let mut lines: Vec<String> = inputs.iter().map(|i| format!("{} {}\n", i.hash, i.name)).collect();
    lines.sort();
    git_blob_hash(lines.concat().as_bytes())
}

fn read_input(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Validation(format!("cannot read {}: {e}", path.display())))
}

struct Group {
    preset: Option<Preset>,
    gens: GroupPresentation,
    own_domain: OnceCell<Result<DirichletDomain, DomainError>>,
}

impl Group {
    fn domain(&self) -> Result<&DirichletDomain, CliError> {
        match self.preset {
            Some(p) => Ok(p.domain()?),
            None => self
                .own_domain
                .get_or_init(|| build_domain(&self.gens))
                .as_ref()
                .map_err(|e| e.clone().into()),
        }
    }

    fn sampler(&self) -> Result<FordSampler, CliError> {
        CuspLattice::from_presentation(&self.gens)
            .map(FordSampler::new)
            .ok_or_else(|| CliError::Validation("presentation has no rank-2 cusp lattice at infinity".into()))
    }

    fn trivial(&self, cfg: &ExperimentConfig) -> bool {
        self.preset.is_some_and(|p| p.is_trivial_target()) || cfg.target == TargetSpec::Trivial
    }
}

/// A resolved run: effective config, group and manifest.
struct Run {
    cmd: Command,
    cfg: ExperimentConfig,
    group: Option<Group>,
    manifest: RunManifest,
}

fn prepare(cmd: Command, args: &RunArgs) -> Result<Run, CliError> {
    let mut inputs = Vec::new();
    let mut input_paths = Vec::new();
    let mut cfg = match &args.config {
        Some(p) => {
            let text = read_input(p)?;
            inputs.push(InputHash {
                name: "config".into(),
                hash: git_blob_hash(text.as_bytes()),
            });
            ExperimentConfig::parse(&text)?
        }
        None => ExperimentConfig::default(),
    };
    for kv in &args.set {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| CliError::Validation(format!("--set expects key=value, got `{kv}`")))?;
        cfg.set(k.trim(), v.trim()).map_err(|m| CliError::Validation(format!("--set {kv}: {m}")))?;
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    cfg.validate()?;
    inputs.push(InputHash {
        name: "effective-config".into(),
        hash: git_blob_hash(serde_json::to_string(&cfg).expect("config serializes").as_bytes()),
    });

    let group = if cmd.uses_group() {
        let (preset, text) = match (&args.presentation, &args.preset) {
            (Some(_), Some(_)) => {
                return Err(CliError::Validation("give either --presentation or --preset, not both".into()))
            }
            (Some(p), None) => {
                input_paths.push(p.display().to_string());
                (None, read_input(p)?)
            }
            (None, name) => {
                let p: Preset = name.as_deref().unwrap_or("bianchi-zi").parse().map_err(CliError::Validation)?;
                (Some(p), p.source().to_string())
            }
        };
        inputs.push(InputHash {
            name: "presentation".into(),
            hash: git_blob_hash(text.as_bytes()),
        });
        let gens = match preset {
            Some(p) => p.presentation(),
            None => parse_presentation(&text)?,
        };
        Some(Group {
            preset,
            gens,
            own_domain: OnceCell::new(),
        })
    } else {
        None
    };

    let input_hash = combined_hash(&inputs);
    let manifest = RunManifest {
        subcommand: cmd.name().into(),
        config_path: args.config.as_ref().map(|p| p.display().to_string()),
        input_paths,
        preset: group.as_ref().and_then(|g| g.preset).map(|p| p.name().into()),
        seed: cfg.seed,
        output_dir: args.out.display().to_string(),
        inputs,
        input_hash,
    };
    Ok(Run {
        cmd,
        cfg,
        group,
        manifest,
    })
}

/// What a command produces before anything is written.
pub struct Output {
    pub csv: Vec<u8>,
    pub result: Value,
}

fn csv_of<T: Serialize>(rows: &[T]) -> Result<Vec<u8>, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| CliError::Failed(format!("csv: {e}")))?;
    }
    w.into_inner().map_err(|e| CliError::Failed(format!("csv: {e}")))
}

fn without(v: impl Serialize, key: &str) -> Value {
    let mut v = serde_json::to_value(v).expect("report serializes");
    if let Some(o) = v.as_object_mut() {
        o.remove(key);
    }
    v
}

fn target_label(g: &Group, cfg: &ExperimentConfig) -> String {
    if g.trivial(cfg) {
        return "trivial".into();
    }
    match &cfg.target {
        TargetSpec::Embedding(None) => "identity".into(),
        TargetSpec::Embedding(Some(k)) => format!("embedding:{k}"),
        TargetSpec::Padic(p) => format!("padic:{p}"),
        TargetSpec::Trivial => "trivial".into(),
    }
}

/// Bind `$rm` to a return map for the configured target and evaluate `$body`.
macro_rules! with_return_map {
    ($group:expr, $cfg:expr, |$rm:ident| $body:expr) => {{
        let group: &Group = $group;
        let cfg: &ExperimentConfig = $cfg;
        let domain = group.domain()?;
        if group.trivial(cfg) {
            let $rm = ReturnMap::new(domain, TrivialTarget);
            $body
        } else if let TargetSpec::Padic(p) = cfg.target {
            let place = group
                .gens
                .field
                .finite_places(p)
                .map_err(|e| CliError::Validation(e.to_string()))?
                .into_iter()
                .next()
                .ok_or_else(|| CliError::Validation(format!("no describable place above {p}")))?;
            let $rm = ReturnMap::new(domain, ExactTarget::new(domain, group.gens.field.clone(), Some(place)));
            $body
        } else {
            let $rm = ReturnMap::new(domain, float_target(domain, &group.gens.field, &cfg.target)?);
            $body
        }
    }};
}

/// `cfg.lambda_hat`, or a Lyapunov estimate for the configured target.
fn lambda_hat(g: &Group, cfg: &ExperimentConfig) -> Result<f64, CliError> {
    if cfg.lambda_hat > 0.0 {
        return Ok(cfg.lambda_hat);
    }
    let sampler = g.sampler()?;
    with_return_map!(g, cfg, |rm| Ok(lyapunov_estimate(&rm, &sampler, cfg)?.slope))
}

fn cmd_lyapunov(g: &Group, cfg: &ExperimentConfig) -> Result<Output, CliError> {
    let sampler = g.sampler()?;
    let rep = with_return_map!(g, cfg, |rm| lyapunov_estimate(&rm, &sampler, cfg)?);
    Ok(Output {
        csv: csv_of(&rep.rows)?,
        result: json!({ "target": target_label(g, cfg), "drift": without(&rep, "rows") }),
    })
}

fn cmd_drift(g: &Group, cfg: &ExperimentConfig) -> Result<Output, CliError> {
    if matches!(cfg.target, TargetSpec::Padic(_)) && !g.trivial(cfg) {
        return Err(CliError::Validation("drift profiles need an archimedean target".into()));
    }
    let domain = g.domain()?;
    let sampler = g.sampler()?;
    let lambda = lambda_hat(g, cfg)?;
    let start = sample_start(&sampler, domain, &mut sample_rng(cfg.seed, 0));
    let n = cfg.n.max(1);
    let t_ref = lambda * n as f64;
    let rep = if g.trivial(cfg) {
        let rm = ReturnMap::new(domain, FloatTarget::trivial(domain));
        rotation_drift_profile(&rm, &start, n, lambda, t_ref, cfg.grid)?
    } else {
        let rm = ReturnMap::new(domain, float_target(domain, &g.gens.field, &cfg.target)?);
        rotation_drift_profile(&rm, &start, n, lambda, t_ref, cfg.grid)?
    };
    Ok(Output {
        csv: csv_of(&rep.rows)?,
        result: json!({
            "target": target_label(g, cfg),
            "n": n,
            "lambda_hat": lambda,
            "t_ref": t_ref,
            "average_threshold": lambda * n as f64 / 5.0,
            "profile": without(&rep, "rows"),
        }),
    })
}

#[derive(Serialize)]
struct InversionRow {
    pair: usize,
    xi_re: f64,
    xi_im: f64,
    xi2_re: f64,
    xi2_im: f64,
    trace_defect: f64,
    square_defect: f64,
}

fn affine(p: &ProjPoint<Complex64>) -> Complex64 {
    if p.s.norm() <= 1e-300 {
        Complex64::new(f64::INFINITY, 0.0)
    } else {
        p.r / p.s
    }
}

fn cmd_inversion_demo(cfg: &ExperimentConfig) -> Result<Output, CliError> {
    let unit = CCircle::unit();
    let b = 0.5;
    let chart = Chart::with_height(&unit, b);
    let pair = LinkedPair::with_chart(
        ProjPoint::from_c(Complex64::new(0.0, b)),
        ProjPoint::inf(),
        unit.clone(),
        chart,
    )?;
    let image = pair.pencil_inversion(&ProjPoint::from_c(Complex64::new(0.0, 1.0)))?;
    let example_error = image.chordal(&ProjPoint::from_c(Complex64::new(0.0, -1.0)));

    let rows = map_samples(cfg.samples, |i| -> Result<InversionRow, CircleError> {
        let mut rng = sample_rng(cfg.seed, i);
        let (xi, xi2) = random_linked_unit(&mut rng);
        let m = LinkedPair::new(xi.clone(), xi2.clone(), unit.clone())?.inversion_as_moebius()?;
        let sq = m.mul(&m).normalized();
        let lead = sq.a.abs().max(sq.d.abs());
        let (a, c) = (affine(&xi), affine(&xi2));
        Ok(InversionRow {
            pair: i,
            xi_re: a.re,
            xi_im: a.im,
            xi2_re: c.re,
            xi2_im: c.im,
            trace_defect: m.trace().abs() / m.norm(),
            square_defect: sq.b.abs().max(sq.c.abs()).max((sq.a - sq.d).abs()) / lead,
        })
    })
    .into_iter()
    .collect::<Result<Vec<_>, _>>()?;
    let generation = inversion_generation(cfg.samples, cfg.probe, cfg.seed)?;
    let worst = |f: fn(&InversionRow) -> f64| rows.iter().map(f).fold(0.0, f64::max);
    Ok(Output {
        result: json!({
            "example": {
                "chart_height": b,
                "image_re": affine(&image).re,
                "image_im": affine(&image).im,
                "chordal_error": example_error,
            },
            "pairs": rows.len(),
            "max_trace_defect": worst(|r| r.trace_defect),
            "max_square_defect": worst(|r| r.square_defect),
            "generation": {
                "inversions": generation.inversions,
                "probe": cfg.probe,
                "max_trace_defect": generation.max_trace_defect,
                "enclosing_radius": generation.enclosing_radius,
                "direction_coverage": generation.direction_coverage,
            },
        }),
        csv: csv_of(&rows)?,
    })
}

#[derive(Serialize)]
struct LimitRow {
    k: u32,
    index: f64,
    hausdorff: f64,
}

fn cmd_classify_limit(cfg: &ExperimentConfig) -> Result<Output, CliError> {
    let seq = canonical_sequence(&cfg.sequence, cfg.seq_len).ok_or_else(|| {
        CliError::Validation(format!(
            "unknown sequence `{}` (identity, translation, inversion)",
            cfg.sequence
        ))
    })?;
    let class = classify_limit(&seq, cfg.tol)?;
    let limit = class.limit_set();
    let rows: Vec<LimitRow> = match &limit {
        Some(l) => map_samples(seq.len(), |k| LimitRow {
            k: k as u32,
            index: 2f64.powi(k as i32),
            hausdorff: sampled_hausdorff(&PointSet::Graph(seq[k].clone()), l, cfg.hausdorff_n),
        }),
        None => Vec::new(),
    };
    Ok(Output {
        csv: csv_of(&rows)?,
        result: json!({
            "sequence": cfg.sequence,
            "seq_len": cfg.seq_len,
            "class": class.name(),
            "final_hausdorff": rows.last().map(|r| r.hausdorff),
            "hausdorff_n": cfg.hausdorff_n,
        }),
    })
}

#[derive(Serialize)]
struct VerdictRow {
    word_len: usize,
    verdict: &'static str,
    detail: String,
}

fn verdict_json(v: &ArithmeticityVerdict, gens: &GroupPresentation) -> Value {
    match v {
        ArithmeticityVerdict::Arithmetic { word_len, trace_field } => {
            json!({ "verdict": v.name(), "word_len": word_len, "trace_field": trace_field })
        }
        ArithmeticityVerdict::NonArithmetic(w) => json!({
            "verdict": v.name(),
            "witness": {
                "place": w.place.describe(),
                "finite": !matches!(w.place, Place::Archimedean(_)),
                "word": w.word_label,
                "trace_sq": w.trace_sq.to_string(),
                "value": w.value.map(|z| [z.re, z.im]),
                "rechecked": w.recheck(gens),
            },
        }),
        ArithmeticityVerdict::Inconclusive { word_len, reason } => {
            json!({ "verdict": v.name(), "word_len": word_len, "reason": reason })
        }
    }
}

fn cmd_arithmeticity(g: &Group, cfg: &ExperimentConfig) -> Result<Output, CliError> {
    if cfg.word_len < 3 {
        return Err(CliError::Validation("word_len must be at least 3".into()));
    }
    let mut rows = Vec::new();
    let mut last = None;
    for len in 3..=cfg.word_len {
        let v = arithmeticity_test(&g.gens, len)?;
        let detail = match &v {
            ArithmeticityVerdict::Arithmetic { trace_field, .. } => trace_field.clone(),
            ArithmeticityVerdict::NonArithmetic(w) => format!("{} at {}", w.word_label, w.place.describe()),
            ArithmeticityVerdict::Inconclusive { reason, .. } => reason.clone(),
        };
        rows.push(VerdictRow {
            word_len: len,
            verdict: v.name(),
            detail,
        });
        last = Some(v);
    }
    let last = last.expect("at least one word length");
    let monotone = rows
        .windows(2)
        .all(|w| w[0].verdict != "NonArithmetic" || w[1].verdict == "NonArithmetic");
    Ok(Output {
        csv: csv_of(&rows)?,
        result: json!({
            "field": g.gens.field.minpoly().to_string(),
            "word_len": cfg.word_len,
            "result": verdict_json(&last, &g.gens),
            "monotone": monotone,
        }),
    })
}

fn cmd_equidist(g: &Group, cfg: &ExperimentConfig) -> Result<Output, CliError> {
    let domain = g.domain()?;
    let ford = g.sampler()?;
    let mut cat: Vec<_> = catalogue(&g.gens, cfg.word_len)?
        .into_iter()
        .filter(|s| s.non_elementary)
        .collect();
    order_by_complexity(&mut cat);
    if cat.len() < 3 {
        return Err(CliError::Budget(format!(
            "only {} catalogued circles have non-elementary stabilizers at word length {}",
            cat.len(),
            cfg.word_len
        )));
    }
    cat.truncate(3);
    let window = HeightWindow {
        lo: cfg.window_lo,
        hi: cfg.window_hi,
    };
    let rep = equidistribution_probe(&cat, domain, &ford, window, cfg)?;
    Ok(Output {
        csv: csv_of(&rep.orbits)?,
        result: json!({ "equidistribution": rep }),
    })
}

#[derive(Serialize)]
struct DistanceRow {
    sample: usize,
    distance: f64,
}

fn cmd_main_lemma(g: &Group, cfg: &ExperimentConfig) -> Result<Output, CliError> {
    let spec = g
        .gens
        .circles
        .iter()
        .find(|c| c.label == cfg.circle)
        .ok_or_else(|| CliError::Validation(format!("no catalogued circle `{}`", cfg.circle)))?;
    let circle = Circle::new(spec.a.clone(), spec.b.clone(), spec.c.clone())?;
    let surface = circle_stabilizer(&spec.label, &circle, &g.gens, cfg.word_len)?;
    let lambda = lambda_hat(g, cfg)?;
    let rep = with_return_map!(g, cfg, |rm| main_lemma_probe(&surface, &rm, lambda, cfg)?);
    let rows: Vec<DistanceRow> = rep
        .distances
        .iter()
        .enumerate()
        .map(|(sample, &distance)| DistanceRow { sample, distance })
        .collect();
    Ok(Output {
        csv: csv_of(&rows)?,
        result: json!({
            "target": target_label(g, cfg),
            "systole": surface.systole,
            "stabilizer_size": surface.stabilizer.len(),
            "main_lemma": without(&rep, "distances"),
        }),
    })
}

#[derive(Serialize)]
struct MomentRow {
    step: usize,
    second_moment: f64,
}

fn cmd_martingale(g: &Group, cfg: &ExperimentConfig) -> Result<Output, CliError> {
    let sampler = g.sampler()?;
    let lambda = lambda_hat(g, cfg)?;
    let c = cfg.c_scale * (lambda / 5.0) * cfg.tau;
    if !(c > 0.0) {
        return Err(CliError::Validation(format!(
            "threshold c = {c} must be positive (drift {lambda})"
        )));
    }
    let rep = with_return_map!(g, cfg, |rm| martingale_test(&rm, &sampler, cfg, c)?);
    let rows: Vec<MomentRow> = rep
        .second_moments
        .iter()
        .enumerate()
        .map(|(l, &second_moment)| MomentRow { step: l + 1, second_moment })
        .collect();
    Ok(Output {
        csv: csv_of(&rows)?,
        result: json!({
            "target": target_label(g, cfg),
            "lambda_hat": lambda,
            "martingale": without(&rep, "second_moments"),
            "within_bound": rep.frequency <= rep.bound,
        }),
    })
}

/// Compute a run without touching the output directory.
pub fn compute(cmd: Command, args: &RunArgs) -> Result<(Output, Value), CliError> {
    let run = prepare(cmd, args)?;
    let cfg = &run.cfg;
    let out = match (run.cmd, run.group.as_ref()) {
        (Command::InversionDemo, _) => cmd_inversion_demo(cfg)?,
        (Command::ClassifyLimit, _) => cmd_classify_limit(cfg)?,
        (Command::Lyapunov, Some(g)) => cmd_lyapunov(g, cfg)?,
        (Command::Drift, Some(g)) => cmd_drift(g, cfg)?,
        (Command::Arithmeticity, Some(g)) => cmd_arithmeticity(g, cfg)?,
        (Command::Equidist, Some(g)) => cmd_equidist(g, cfg)?,
        (Command::MainLemma, Some(g)) => cmd_main_lemma(g, cfg)?,
        (Command::Martingale, Some(g)) => cmd_martingale(g, cfg)?,
        (_, None) => unreachable!("group commands always resolve a group"),
    };
    let summary = json!({
        "command": run.cmd.name(),
        "version": VERSION,
        "config": cfg,
        "manifest": run.manifest,
        "result": out.result,
    });
    Ok((out, summary))
}

/// Run a command and write `<cmd>.csv` and `<cmd>.json` into `args.out`.
pub fn run(cmd: Command, args: &RunArgs) -> Result<Value, CliError> {
    let (out, summary) = compute(cmd, args)?;
    let io = |e: std::io::Error| CliError::Io(format!("{}: {e}", args.out.display()));
    fs::create_dir_all(&args.out).map_err(io)?;
    fs::write(args.out.join(format!("{}.csv", cmd.name())), &out.csv).map_err(io)?;
    let mut text = serde_json::to_string_pretty(&summary).expect("summary serializes");
    text.push('\n');
    fs::write(args.out.join(format!("{}.json", cmd.name())), text).map_err(io)?;
    Ok(summary)
}
