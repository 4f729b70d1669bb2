use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use nalgebra::DMatrix;

use super::config::{DescriptorChoice, PipelineConfig};
use super::dataset::ground_truth;
use super::store::{ensure_entry, list_shapes, write_file_atomic, EntryStatus, ShapeEntry};
use crate::coupling::{
    cqhb_baseline, optimize_coupled, trace_to_csv, CoupledResult, CouplingProblem, ShapeData,
};
use crate::error::{Error, Result};
use crate::io::cache::encode_matrix;
use crate::io::{format_correspondence, read_matrix, CorrespondenceMap};
use crate::matching::{kmeans_segment, mean_geodesic_error, nn_match, transfer_segments, GeodesicField};
use crate::spectral::{gt_indicator_descriptor, spectral_embedding_nn_baseline, Descriptor, DescriptorKind};

/// Methods accepted by [`match_eval`], in their default order.
pub const METHODS: [&str; 5] = ["coupled", "cqhb_hks", "cqhb_gt", "nn_spectral", "nn_hks"];

pub const MATCH_EVAL_HEADER: &str = "pair_id,method,k,d,seed,error_x100,wall_ms";

/// Per-item results of a batch command.
#[derive(Debug, Clone, Default)]
pub struct Outcome {
    pub succeeded: Vec<String>,
    pub skipped: Vec<(String, String)>,
    pub failed: Vec<(String, String)>,
}

impl Outcome {
    /// 0 when every item succeeded or was skipped, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.failed.is_empty() {
            0
        } else {
            1
        }
    }

    fn record<T>(&mut self, item: String, r: Result<T>) -> Option<T> {
        match r {
            Ok(v) => {
                self.succeeded.push(item);
                Some(v)
            }
            Err(e) => {
                log::error!("{item}: {e}");
                self.failed.push((item, e.to_string()));
                None
            }
        }
    }
}

/// One row of `match_eval.csv`.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalRow {
    pub pair_id: String,
    pub method: String,
    pub k: usize,
    pub d: usize,
    pub seed: u64,
    pub error_x100: f64,
    pub wall_ms: u128,
}

pub fn pair_id(source: &str, target: &str) -> String {
    format!("{source}__{target}")
}

pub fn pair_dir(cfg: &PipelineConfig, source: &str, target: &str) -> PathBuf {
    cfg.output_dir.join(pair_id(source, target))
}

fn require_pairs(cfg: &PipelineConfig) -> Result<&[(String, String)]> {
    if cfg.pairs.is_empty() {
        return Err(Error::InvalidConfig("no pairs configured (set pairs = a:b,...)".into()));
    }
    Ok(&cfg.pairs)
}

/// Computes or verifies the cache entry of each named shape, or of every
/// shape in the dataset when `names` is empty.
pub fn precompute(cfg: &PipelineConfig, names: &[String]) -> Result<Outcome> {
    let names = if names.is_empty() { list_shapes(cfg)? } else { names.to_vec() };
    let mut out = Outcome::default();
    for name in names {
        let r = ensure_entry(cfg, &name);
        if let Ok((_, status)) = &r {
            match status {
                EntryStatus::Computed => log::info!("{name}: computed"),
                EntryStatus::UpToDate => log::info!("{name}: up to date"),
            }
        }
        out.record(name, r);
    }
    Ok(out)
}

fn shape_data(entry: &ShapeEntry, descriptor: Descriptor) -> ShapeData {
    ShapeData {
        stiffness: entry.stiffness.clone(),
        mass: entry.mass.clone(),
        basis: entry.basis.clone(),
        descriptor,
    }
}

fn require_gt(
    cfg: &PipelineConfig,
    s: &ShapeEntry,
    t: &ShapeEntry,
    gt: Option<&CorrespondenceMap>,
) -> Result<(Descriptor, Descriptor)> {
    let gt = gt.ok_or_else(|| Error::Empty(format!("no ground truth for {} -> {}", s.name, t.name)))?;
    gt_indicator_descriptor(gt, cfg.gt_landmarks, &s.shape, t.shape.n_vertices())
}

fn build_problem(
    cfg: &PipelineConfig,
    s: &ShapeEntry,
    t: &ShapeEntry,
    gt: Option<&CorrespondenceMap>,
    choice: DescriptorChoice,
) -> Result<CouplingProblem> {
    let (ds, dt) = match choice {
        DescriptorChoice::Hks => (s.hks.clone(), t.hks.clone()),
        DescriptorChoice::Gt => require_gt(cfg, s, t, gt)?,
    };
    let mut p = CouplingProblem::new(shape_data(s, ds), shape_data(t, dt))?;
    p.weights = cfg.weights;
    p.partial_weights = cfg.partial_weights;
    p.mode = cfg.mode;
    p.parametrization = cfg.parametrization;
    p.norm = cfg.norm;
    p.descriptor_scaling = cfg.descriptor_scaling;
    p.validate()?;
    Ok(p)
}

fn load_pair(cfg: &PipelineConfig, source: &str, target: &str) -> Result<(ShapeEntry, ShapeEntry, Option<CorrespondenceMap>)> {
    let (s, _) = ensure_entry(cfg, source)?;
    let (t, _) = ensure_entry(cfg, target)?;
    let gt = ground_truth(cfg, source, target, s.shape.n_vertices(), t.shape.n_vertices())?;
    Ok((s, t, gt))
}

fn write_run(dir: &Path, cfg: &PipelineConfig, res: &CoupledResult) -> Result<()> {
    write_file_atomic(&dir.join("psi_source.bin"), &encode_matrix(&res.source.psi))?;
    write_file_atomic(&dir.join("psi_target.bin"), &encode_matrix(&res.target.psi))?;
    write_file_atomic(&dir.join("trace.csv"), trace_to_csv(&res.trace).as_bytes())?;
    let mut meta = res.info.to_text();
    let _ = writeln!(meta, "descriptor = {}", cfg.descriptor.as_str());
    let _ = writeln!(meta, "k = {}", res.source.k());
    write_file_atomic(&dir.join("meta.txt"), meta.as_bytes())?;
    write_file_atomic(&dir.join("config.txt"), cfg.to_text().as_bytes())
}

/// Runs the coupled optimization for one pair and writes its outputs.
pub fn couple_pair(cfg: &PipelineConfig, source: &str, target: &str) -> Result<CoupledResult> {
    let (s, t, gt) = load_pair(cfg, source, target)?;
    let problem = build_problem(cfg, &s, &t, gt.as_ref(), cfg.descriptor)?;
    let dir = pair_dir(cfg, source, target);
    match optimize_coupled(&problem, &cfg.optimizer_config()) {
        Ok(res) => {
            write_run(&dir, cfg, &res)?;
            Ok(res)
        }
        Err(Error::Divergence { iteration, trace }) => {
            write_file_atomic(&dir.join("trace.csv"), trace_to_csv(&trace).as_bytes())?;
            Err(Error::Divergence { iteration, trace })
        }
        Err(e) => Err(e),
    }
}

/// Runs [`couple_pair`] on every configured pair.
pub fn couple(cfg: &PipelineConfig) -> Result<Outcome> {
    let mut out = Outcome::default();
    for (a, b) in require_pairs(cfg)? {
        let r = couple_pair(cfg, a, b);
        out.record(pair_id(a, b), r);
    }
    Ok(out)
}

fn predict(
    cfg: &PipelineConfig,
    method: &str,
    s: &ShapeEntry,
    t: &ShapeEntry,
    gt: &CorrespondenceMap,
) -> Result<(CorrespondenceMap, usize)> {
    let opt = cfg.optimizer_config();
    match method {
        "coupled" => {
            let p = build_problem(cfg, s, t, Some(gt), cfg.descriptor)?;
            let d = p.source.descriptor.dim();
            let r = optimize_coupled(&p, &opt)?;
            Ok((nn_match(&r.source.psi, &r.target.psi)?, d))
        }
        "cqhb_hks" => {
            let p = build_problem(cfg, s, t, Some(gt), DescriptorChoice::Hks)?;
            let r = cqhb_baseline(&p, DescriptorKind::Hks, &opt)?;
            Ok((nn_match(&r.source.psi, &r.target.psi)?, p.source.descriptor.dim()))
        }
        "cqhb_gt" => {
            let p = build_problem(cfg, s, t, Some(gt), DescriptorChoice::Gt)?;
            let r = cqhb_baseline(&p, DescriptorKind::GtIndicator, &opt)?;
            Ok((nn_match(&r.source.psi, &r.target.psi)?, p.source.descriptor.dim()))
        }
        "nn_spectral" => Ok((spectral_embedding_nn_baseline(&s.basis, &t.basis)?, 0)),
        "nn_hks" => Ok((nn_match(&s.hks.values, &t.hks.values)?, s.hks.dim())),
        other => Err(Error::InvalidConfig(format!("unknown method '{other}'"))),
    }
}

/// Keeps only the source vertices that have ground truth.
fn restrict(pred: &CorrespondenceMap, gt: &CorrespondenceMap, n_source: usize) -> CorrespondenceMap {
    let has = gt.target_lookup(n_source);
    CorrespondenceMap::new(
        pred.pairs
            .iter()
            .copied()
            .filter(|&(s, _)| s < n_source && has[s].is_some())
            .collect(),
    )
}

pub fn format_eval_csv(rows: &[EvalRow]) -> String {
    let mut s = String::from(MATCH_EVAL_HEADER);
    s.push('\n');
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{:.6},{}",
            r.pair_id, r.method, r.k, r.d, r.seed, r.error_x100, r.wall_ms
        );
    }
    s
}

/// Evaluates each method on each configured pair and writes
/// `match_eval.csv` (replacing any previous one) plus one `.map` file per
/// pair and method. Pairs without ground truth are skipped.
pub fn match_eval(cfg: &PipelineConfig, methods: &[String]) -> Result<(Outcome, Vec<EvalRow>)> {
    for m in methods {
        if !METHODS.contains(&m.as_str()) {
            return Err(Error::InvalidConfig(format!("unknown method '{m}'")));
        }
    }
    let mut out = Outcome::default();
    let mut rows = Vec::new();
    for (a, b) in require_pairs(cfg)? {
        let id = pair_id(a, b);
        let loaded = match load_pair(cfg, a, b) {
            Ok(v) => v,
            Err(e) => {
                out.record::<()>(id, Err(e));
                continue;
            }
        };
        let (s, t, gt) = loaded;
        let Some(gt) = gt else {
            log::warn!("{id}: no ground truth, skipping");
            out.skipped.push((id, "no ground truth".into()));
            continue;
        };
        let geo = match GeodesicField::new(&t.shape) {
            Ok(g) => g,
            Err(e) => {
                out.record::<()>(id, Err(e));
                continue;
            }
        };
        let dir = pair_dir(cfg, a, b);
        for m in methods {
            let start = Instant::now();
            let r = predict(cfg, m, &s, &t, &gt).and_then(|(pred, d)| {
                let pred = restrict(&pred, &gt, s.shape.n_vertices());
                let err = mean_geodesic_error(&pred, &gt, &geo)?;
                write_file_atomic(
                    &dir.join(format!("{m}.map")),
                    format_correspondence(&pred, cfg.indexing).as_bytes(),
                )?;
                Ok((err, d))
            });
            let wall_ms = start.elapsed().as_millis();
            if let Some((err, d)) = out.record(format!("{id}/{m}"), r) {
                log::info!("{id} {m}: {err:.3}");
                rows.push(EvalRow {
                    pair_id: id.clone(),
                    method: m.clone(),
                    k: cfg.k,
                    d,
                    seed: cfg.seed,
                    error_x100: err,
                    wall_ms,
                });
            }
        }
    }
    write_file_atomic(&cfg.output_dir.join("match_eval.csv"), format_eval_csv(&rows).as_bytes())?;
    write_file_atomic(&cfg.output_dir.join("config.txt"), cfg.to_text().as_bytes())?;
    Ok((out, rows))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SegmentTarget {
    /// Segments one shape on its own eigenbasis.
    Shape(String),
    /// Segments the source of a coupled pair and transfers the labels.
    Pair(String, String),
}

/// Writes label files, one label per vertex and line. Shape mode writes
/// `<shape>/segments.txt`. Pair mode writes `segments_source.txt`,
/// `segments_target.txt` (native) and `segments_target_transferred.txt`
/// into the pair directory, running the coupling first if its embeddings
/// are missing.
pub fn segment(cfg: &PipelineConfig, target: &SegmentTarget) -> Result<Vec<PathBuf>> {
    let c = cfg.clusters;
    match target {
        SegmentTarget::Shape(name) => {
            let (e, _) = ensure_entry(cfg, name)?;
            let labels = kmeans_segment(&e.basis.phi, c, cfg.seed)?;
            let path = cfg.output_dir.join(name).join("segments.txt");
            write_file_atomic(&path, labels.to_text().as_bytes())?;
            Ok(vec![path])
        }
        SegmentTarget::Pair(a, b) => {
            let dir = pair_dir(cfg, a, b);
            let (ps, pt) = match (read_matrix(dir.join("psi_source.bin")), read_matrix(dir.join("psi_target.bin"))) {
                (Ok(ps), Ok(pt)) if ps.ncols() == cfg.k && pt.ncols() == cfg.k => (ps, pt),
                _ => {
                    let r = couple_pair(cfg, a, b)?;
                    (r.source.psi, r.target.psi)
                }
            };
            let files = segment_pair(&ps, &pt, c, cfg.seed)?;
            let mut paths = Vec::new();
            for (name, text) in files {
                let p = dir.join(name);
                write_file_atomic(&p, text.as_bytes())?;
                paths.push(p);
            }
            Ok(paths)
        }
    }
}

fn segment_pair(ps: &DMatrix<f64>, pt: &DMatrix<f64>, c: usize, seed: u64) -> Result<Vec<(&'static str, String)>> {
    let src = kmeans_segment(ps, c, seed)?;
    let native = kmeans_segment(pt, c, seed)?;
    let transferred = transfer_segments(&src, pt)?;
    Ok(vec![
        ("segments_source.txt", src.to_text()),
        ("segments_target.txt", native.to_text()),
        ("segments_target_transferred.txt", transferred.to_text()),
    ])
}

/// The loss-trace CSV of a coupled pair.
pub fn plot_trace(cfg: &PipelineConfig, source: &str, target: &str) -> Result<String> {
    let path = pair_dir(cfg, source, target).join("trace.csv");
    fs::read_to_string(&path).map_err(|e| Error::io(&path, e))
}
