use std::fmt::Write as _;

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::problem::{Compiled, CouplingProblem, LossTerms, Mode, Parametrization, ShapeData};
use super::Embedding;
use crate::error::{Error, Result};
use crate::spectral::DescriptorKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Init {
    /// `Psi = Phi`, i.e. `R = I` in the subspace parametrization.
    #[default]
    Eigenbasis,
    Random,
}

/// Adam settings.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerConfig {
    pub max_iters: usize,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    /// Stop once the gradient norm falls below this.
    pub grad_tol: f64,
    pub seed: u64,
    pub init: Init,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            max_iters: 2000,
            learning_rate: 1e-2,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            grad_tol: 1e-7,
            seed: 0,
            init: Init::Eigenbasis,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.max_iters >= 1
            && self.learning_rate > 0.0
            && (0.0..1.0).contains(&self.beta1)
            && (0.0..1.0).contains(&self.beta2)
            && self.epsilon > 0.0
            && self.grad_tol > 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!("invalid optimizer config {self:?}")))
        }
    }
}

/// One row of the loss trace, evaluated before the update of `iteration`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub iteration: usize,
    pub terms: LossTerms,
    pub total: f64,
}

pub const TRACE_HEADER: &str = "iteration,L_off_S,L_off_T,L_o_S,L_o_T,L_c,total";

/// Loss trace as CSV, one row per iteration.
pub fn trace_to_csv(trace: &[TraceRow]) -> String {
    let mut out = String::from(TRACE_HEADER);
    out.push('\n');
    for r in trace {
        let t = &r.terms;
        let _ = writeln!(
            out,
            "{},{:?},{:?},{:?},{:?},{:?},{:?}",
            r.iteration, t.off_source, t.off_target, t.ortho_source, t.ortho_target, t.coupling, r.total
        );
    }
    out
}

/// What produced a result, recorded alongside the embeddings.
#[derive(Debug, Clone, PartialEq)]
pub struct RunInfo {
    pub method: String,
    pub mode: Mode,
    pub parametrization: Parametrization,
    pub weights: Vec<(&'static str, f64)>,
    pub seed: u64,
    pub iterations: usize,
    pub converged: bool,
    pub best_iteration: usize,
}

impl RunInfo {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "method = {}", self.method);
        let mode = match self.mode {
            Mode::FullFull => "full_full",
            Mode::FullPartial => "full_partial",
        };
        let _ = writeln!(out, "mode = {mode}");
        let par = match self.parametrization {
            Parametrization::Subspace => "subspace",
            Parametrization::Free => "free",
        };
        let _ = writeln!(out, "parametrization = {par}");
        for (name, w) in &self.weights {
            let _ = writeln!(out, "{name} = {w:?}");
        }
        let _ = writeln!(out, "seed = {}", self.seed);
        let _ = writeln!(out, "iterations = {}", self.iterations);
        let _ = writeln!(out, "converged = {}", self.converged);
        let _ = writeln!(out, "best_iteration = {}", self.best_iteration);
        out
    }
}

#[derive(Debug, Clone)]
pub struct CoupledResult {
    /// Best iterate by total loss.
    pub source: Embedding,
    pub target: Embedding,
    /// Mixing matrices of the best iterate (subspace parametrization only).
    pub mixing: Option<(DMatrix<f64>, DMatrix<f64>)>,
    pub trace: Vec<TraceRow>,
    /// Loss terms at the last iterate.
    pub final_terms: LossTerms,
    pub info: RunInfo,
}

struct Adam {
    m: DMatrix<f64>,
    v: DMatrix<f64>,
}

impl Adam {
    fn new(shape: (usize, usize)) -> Self {
        Self {
            m: DMatrix::zeros(shape.0, shape.1),
            v: DMatrix::zeros(shape.0, shape.1),
        }
    }

    fn step(&mut self, x: &mut DMatrix<f64>, g: &DMatrix<f64>, cfg: &OptimizerConfig, t: usize) {
        let b1t = 1.0 - cfg.beta1.powi(t as i32);
        let b2t = 1.0 - cfg.beta2.powi(t as i32);
        for ((xi, gi), (mi, vi)) in x
            .iter_mut()
            .zip(g.iter())
            .zip(self.m.iter_mut().zip(self.v.iter_mut()))
        {
            *mi = cfg.beta1 * *mi + (1.0 - cfg.beta1) * gi;
            *vi = cfg.beta2 * *vi + (1.0 - cfg.beta2) * gi * gi;
            let mhat = *mi / b1t;
            let vhat = *vi / b2t;
            *xi -= cfg.learning_rate * mhat / (vhat.sqrt() + cfg.epsilon);
        }
    }
}

/// Independent random streams per shape, so a shape's initialization does
/// not depend on whether it is optimized alone or in a pair.
fn initial_point(shape: &ShapeData, par: Parametrization, cfg: &OptimizerConfig, stream: u64) -> DMatrix<f64> {
    let k = shape.basis.k();
    match (cfg.init, par) {
        (Init::Eigenbasis, Parametrization::Subspace) => DMatrix::identity(k, k),
        (Init::Eigenbasis, Parametrization::Free) => shape.basis.phi.clone(),
        (Init::Random, _) => {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(stream);
            let rows = if par == Parametrization::Subspace { k } else { shape.n() };
            // Columns of roughly unit M-norm.
            let scale = if par == Parametrization::Subspace {
                1.0 / (k as f64).sqrt()
            } else {
                1.0 / shape.mass.total().sqrt() / (shape.n() as f64).sqrt()
            };
            DMatrix::from_fn(rows, k, |_, _| {
                let z: f64 = StandardNormal.sample(&mut rng);
                z * scale
            })
        }
    }
}

fn to_embedding(shape: &ShapeData, par: Parametrization, x: &DMatrix<f64>) -> Embedding {
    match par {
        Parametrization::Subspace => Embedding::new(&shape.basis.phi * x),
        Parametrization::Free => Embedding::new(x.clone()),
    }
}

fn weight_list(problem: &CouplingProblem) -> Vec<(&'static str, f64)> {
    match problem.mode {
        Mode::FullFull => vec![
            ("mu_off", problem.weights.off),
            ("mu_o", problem.weights.ortho),
            ("mu_c", problem.weights.coupling),
        ],
        Mode::FullPartial => vec![
            ("mu_off_partial", problem.partial_weights.off_partial),
            ("mu_off_full", problem.partial_weights.off_full),
            ("mu_o_full", problem.partial_weights.ortho_full),
            ("mu_c", problem.partial_weights.coupling),
        ],
    }
}

fn check_finite(total: f64, iteration: usize, trace: &[TraceRow]) -> Result<()> {
    if total.is_finite() {
        Ok(())
    } else {
        Err(Error::Divergence {
            iteration,
            trace: trace.to_vec(),
        })
    }
}

/// Minimizes the coupled objective of `problem` with Adam.
///
/// Returns the best iterate by total loss. Running out of iterations before
/// the gradient tolerance is reached only logs a warning.
pub fn optimize_coupled(problem: &CouplingProblem, cfg: &OptimizerConfig) -> Result<CoupledResult> {
    run(problem, cfg, "coupled")
}

fn run(problem: &CouplingProblem, cfg: &OptimizerConfig, method: &str) -> Result<CoupledResult> {
    problem.validate()?;
    cfg.validate()?;
    let par = problem.parametrization;
    let compiled = Compiled::new(problem, par);
    let mut xs = initial_point(&problem.source, par, cfg, 0);
    let mut xt = initial_point(&problem.target, par, cfg, 1);
    let mut adam_s = Adam::new(xs.shape());
    let mut adam_t = Adam::new(xt.shape());
    let mut trace = Vec::with_capacity(cfg.max_iters + 1);
    let mut best = (f64::INFINITY, 0, xs.clone(), xt.clone());
    let mut converged = false;
    let mut iteration = 0;
    let final_terms = loop {
        let eval = compiled.evaluate(&xs, &xt);
        trace.push(TraceRow {
            iteration,
            terms: eval.terms,
            total: eval.total,
        });
        check_finite(eval.total, iteration, &trace)?;
        if eval.total < best.0 {
            best = (eval.total, iteration, xs.clone(), xt.clone());
        }
        let gnorm = (eval.grad_source.norm_squared() + eval.grad_target.norm_squared()).sqrt();
        if !gnorm.is_finite() {
            return Err(Error::Divergence { iteration, trace });
        }
        if gnorm < cfg.grad_tol {
            converged = true;
            break eval.terms;
        }
        if iteration == cfg.max_iters {
            break eval.terms;
        }
        iteration += 1;
        adam_s.step(&mut xs, &eval.grad_source, cfg, iteration);
        adam_t.step(&mut xt, &eval.grad_target, cfg, iteration);
    };
    if !converged {
        log::warn!(
            "{method}: gradient tolerance {:e} not reached in {} iterations; returning best iterate",
            cfg.grad_tol,
            cfg.max_iters
        );
    }
    let (_, best_iteration, bs, bt) = best;
    Ok(CoupledResult {
        source: to_embedding(&problem.source, par, &bs),
        target: to_embedding(&problem.target, par, &bt),
        mixing: (par == Parametrization::Subspace).then(|| (bs, bt)),
        trace,
        final_terms,
        info: RunInfo {
            method: method.to_string(),
            mode: problem.mode,
            parametrization: par,
            weights: weight_list(problem),
            seed: cfg.seed,
            iterations: iteration,
            converged,
            best_iteration,
        },
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Source,
    Target,
}

/// Result of optimizing one shape's own terms.
#[derive(Debug, Clone)]
pub struct SingleResult {
    pub embedding: Embedding,
    /// `(off, ortho)` at the last iterate.
    pub final_losses: (f64, f64),
    pub iterations: usize,
}

/// Optimizes the terms of one shape alone, ignoring the coupling term. The
/// update rule and random stream are those used by [`optimize_coupled`], so
/// with a zero coupling weight the two agree iterate by iterate. Runs for
/// exactly `max_iters` iterations.
pub fn optimize_single(problem: &CouplingProblem, side: Side, cfg: &OptimizerConfig) -> Result<SingleResult> {
    problem.validate()?;
    cfg.validate()?;
    let par = problem.parametrization;
    let compiled = Compiled::new(problem, par);
    let (shape, stream, is_target) = match side {
        Side::Source => (&problem.source, 0, false),
        Side::Target => (&problem.target, 1, true),
    };
    let mut x = initial_point(shape, par, cfg, stream);
    let mut adam = Adam::new(x.shape());
    for t in 1..=cfg.max_iters {
        let (_, _, total, grad) = compiled.shape_terms(&x, is_target);
        check_finite(total, t - 1, &[])?;
        adam.step(&mut x, &grad, cfg, t);
    }
    let (off, ortho, _, _) = compiled.shape_terms(&x, is_target);
    Ok(SingleResult {
        embedding: to_embedding(shape, par, &x),
        final_losses: (off, ortho),
        iterations: cfg.max_iters,
    })
}

/// The coupled quasi-harmonic bases baseline: the same objective restricted
/// to the subspace parametrization, with orthogonality as a penalty, and the
/// descriptor kind recorded as the method name.
pub fn cqhb_baseline(problem: &CouplingProblem, kind: DescriptorKind, cfg: &OptimizerConfig) -> Result<CoupledResult> {
    let name = match kind {
        DescriptorKind::Hks => "cqhb_hks",
        DescriptorKind::GtIndicator => "cqhb_gt",
        DescriptorKind::External => {
            return Err(Error::InvalidArgument("cqhb baseline takes hks or gt descriptors".into()))
        }
    };
    for d in [&problem.source.descriptor, &problem.target.descriptor] {
        if d.kind != kind {
            return Err(Error::InvalidArgument(format!(
                "{name} needs {kind:?} descriptors, problem has {:?}",
                d.kind
            )));
        }
    }
    let mut p = problem.clone();
    p.parametrization = Parametrization::Subspace;
    run(&p, cfg, name)
}
