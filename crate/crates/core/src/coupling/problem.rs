use nalgebra::DMatrix;

use super::loss::{
    coupling_projected, descriptor_projection, loss_off_partial_with, loss_off_with, loss_ortho_with,
    NormKind, SymmetricOperator,
};
use crate::error::{Error, Result};
use crate::laplacian::{MassDiagonal, SparseSymmetric};
use crate::spectral::{Descriptor, SpectralBasis};

/// Loss weights for a pair of complete shapes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Weights {
    pub off: f64,
    pub ortho: f64,
    pub coupling: f64,
}

impl Default for Weights {
    fn default() -> Self {
        Self {
            off: 1.0,
            ortho: 5e1,
            coupling: 1e3,
        }
    }
}

/// Loss weights for a full (source) / partial (target) pair. There is no
/// orthogonality term on the partial shape.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PartialWeights {
    pub off_partial: f64,
    pub off_full: f64,
    pub ortho_full: f64,
    pub coupling: f64,
}

impl Default for PartialWeights {
    fn default() -> Self {
        Self {
            off_partial: 1.0,
            off_full: 1.0,
            ortho_full: 5e3,
            coupling: 5e3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Mode {
    #[default]
    FullFull,
    /// Source is the full shape, target the partial one.
    FullPartial,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Parametrization {
    /// `Psi = Phi R` with a `k x k` mixing matrix per shape.
    #[default]
    Subspace,
    /// Optimize the `n x k` embedding entries directly.
    Free,
}

/// Column scaling applied to descriptors before they enter the coupling term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DescriptorScaling {
    None,
    /// Column `j` of each descriptor loses its mass-weighted mean, then both
    /// are divided by the root mean of their two squared M-norms, so every
    /// descriptor carries unit energy independent of the mesh resolution.
    #[default]
    MassNormalized,
}

/// Everything the losses need to know about one shape.
#[derive(Debug, Clone)]
pub struct ShapeData {
    pub stiffness: SparseSymmetric,
    pub mass: MassDiagonal,
    pub basis: SpectralBasis,
    pub descriptor: Descriptor,
}

impl ShapeData {
    pub fn n(&self) -> usize {
        self.stiffness.n()
    }
}

#[derive(Debug, Clone)]
pub struct CouplingProblem {
    pub source: ShapeData,
    pub target: ShapeData,
    pub weights: Weights,
    pub partial_weights: PartialWeights,
    pub mode: Mode,
    pub parametrization: Parametrization,
    pub norm: NormKind,
    pub descriptor_scaling: DescriptorScaling,
}

impl CouplingProblem {
    pub fn new(source: ShapeData, target: ShapeData) -> Result<Self> {
        let p = Self {
            source,
            target,
            weights: Weights::default(),
            partial_weights: PartialWeights::default(),
            mode: Mode::FullFull,
            parametrization: Parametrization::Subspace,
            norm: NormKind::Frobenius,
            descriptor_scaling: DescriptorScaling::MassNormalized,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        for s in [&self.source, &self.target] {
            let n = s.n();
            for found in [s.mass.len(), s.basis.n(), s.descriptor.n()] {
                if found != n {
                    return Err(Error::DimensionMismatch { expected: n, found });
                }
            }
            if !s.descriptor.is_finite() {
                return Err(Error::InvalidArgument("descriptor has non-finite entries".into()));
            }
        }
        if self.source.descriptor.dim() != self.target.descriptor.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.source.descriptor.dim(),
                found: self.target.descriptor.dim(),
            });
        }
        if self.source.basis.k() != self.target.basis.k() {
            return Err(Error::DimensionMismatch {
                expected: self.source.basis.k(),
                found: self.target.basis.k(),
            });
        }
        let w = self.weights;
        let pw = self.partial_weights;
        let all = [w.off, w.ortho, w.coupling, pw.off_partial, pw.off_full, pw.ortho_full, pw.coupling];
        if all.iter().any(|x| !(*x >= 0.0) || !x.is_finite()) {
            return Err(Error::InvalidArgument("loss weights must be finite and >= 0".into()));
        }
        Ok(())
    }

    pub fn k(&self) -> usize {
        self.source.basis.k()
    }

    /// Descriptors after the configured column scaling.
    pub fn scaled_descriptors(&self) -> (DMatrix<f64>, DMatrix<f64>) {
        let mut ds = self.source.descriptor.values.clone();
        let mut dt = self.target.descriptor.values.clone();
        if self.descriptor_scaling == DescriptorScaling::MassNormalized {
            let ms = self.source.mass.areas();
            let mt = self.target.mass.areas();
            for j in 0..ds.ncols() {
                let es = center_column(&mut ds, j, ms);
                let et = center_column(&mut dt, j, mt);
                let e = 0.5 * (es + et);
                if e > 0.0 {
                    let f = 1.0 / e.sqrt();
                    ds.column_mut(j).scale_mut(f);
                    dt.column_mut(j).scale_mut(f);
                }
            }
        }
        (ds, dt)
    }
}

/// Removes the mass-weighted mean of column `j`; returns its squared M-norm.
fn center_column(d: &mut DMatrix<f64>, j: usize, mass: &[f64]) -> f64 {
    let total: f64 = mass.iter().sum();
    let mean = d.column(j).iter().zip(mass).map(|(v, m)| v * m).sum::<f64>() / total;
    let mut col = d.column_mut(j);
    col.add_scalar_mut(-mean);
    col.iter().zip(mass).map(|(v, m)| v * v * m).sum()
}

/// Individual loss terms. In full/partial mode `off_target` holds the
/// unanchored partial term and `ortho_target` is zero.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LossTerms {
    pub off_source: f64,
    pub off_target: f64,
    pub ortho_source: f64,
    pub ortho_target: f64,
    pub coupling: f64,
}

#[derive(Debug, Clone)]
pub struct Evaluation {
    pub terms: LossTerms,
    pub total: f64,
    pub grad_source: DMatrix<f64>,
    pub grad_target: DMatrix<f64>,
}

/// Operators of one shape in the coordinates being optimized.
#[derive(Debug, Clone)]
pub(crate) enum Operator {
    Sparse(SparseSymmetric),
    Diagonal(MassDiagonal),
    Dense(DMatrix<f64>),
}

impl Operator {
    fn as_dyn(&self) -> &dyn SymmetricOperator {
        match self {
            Operator::Sparse(s) => s,
            Operator::Diagonal(d) => d,
            Operator::Dense(d) => d,
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct CompiledShape {
    pub stiffness: Operator,
    pub mass: Operator,
    pub lambda: Vec<f64>,
    pub projection: DMatrix<f64>,
}

/// The objective specialized to a parametrization.
#[derive(Debug, Clone)]
pub(crate) struct Compiled {
    pub source: CompiledShape,
    pub target: CompiledShape,
    pub weights: Weights,
    pub partial_weights: PartialWeights,
    pub mode: Mode,
    pub norm: NormKind,
}

impl Compiled {
    pub fn new(problem: &CouplingProblem, parametrization: Parametrization) -> Self {
        let (ds, dt) = problem.scaled_descriptors();
        let shape = |s: &ShapeData, d: &DMatrix<f64>| -> CompiledShape {
            match parametrization {
                Parametrization::Free => CompiledShape {
                    stiffness: Operator::Sparse(s.stiffness.clone()),
                    mass: Operator::Diagonal(s.mass.clone()),
                    lambda: s.basis.lambda.clone(),
                    projection: descriptor_projection(d, &s.mass),
                },
                Parametrization::Subspace => {
                    let phi = &s.basis.phi;
                    let sym = |m: DMatrix<f64>| (&m + m.transpose()) * 0.5;
                    CompiledShape {
                        stiffness: Operator::Dense(sym(phi.tr_mul(&s.stiffness.mul_dense(phi)))),
                        mass: Operator::Dense(sym(phi.tr_mul(&s.mass.mul_dense(phi)))),
                        lambda: s.basis.lambda.clone(),
                        projection: descriptor_projection(d, &s.mass) * phi,
                    }
                }
            }
        };
        Self {
            source: shape(&problem.source, &ds),
            target: shape(&problem.target, &dt),
            weights: problem.weights,
            partial_weights: problem.partial_weights,
            mode: problem.mode,
            norm: problem.norm,
        }
    }

    /// Off-diagonal and orthogonality terms of one shape with their weights
    /// applied, in the given mode. `is_target` selects the partial treatment.
    pub fn shape_terms(
        &self,
        x: &DMatrix<f64>,
        is_target: bool,
    ) -> (f64, f64, f64, DMatrix<f64>) {
        let s = if is_target { &self.target } else { &self.source };
        let partial_target = is_target && self.mode == Mode::FullPartial;
        let (w_off, w_ortho) = match self.mode {
            Mode::FullFull => (self.weights.off, self.weights.ortho),
            Mode::FullPartial if partial_target => (self.partial_weights.off_partial, 0.0),
            Mode::FullPartial => (self.partial_weights.off_full, self.partial_weights.ortho_full),
        };
        let off = if partial_target {
            loss_off_partial_with(x, s.stiffness.as_dyn(), self.norm)
        } else {
            loss_off_with(x, s.stiffness.as_dyn(), &s.lambda, self.norm)
        };
        let mut grad = off.grad * w_off;
        let ortho_value = if partial_target {
            0.0
        } else {
            let o = loss_ortho_with(x, s.mass.as_dyn(), self.norm);
            grad += o.grad * w_ortho;
            o.value
        };
        (off.value, ortho_value, w_off * off.value + w_ortho * ortho_value, grad)
    }

    pub fn coupling_weight(&self) -> f64 {
        match self.mode {
            Mode::FullFull => self.weights.coupling,
            Mode::FullPartial => self.partial_weights.coupling,
        }
    }

    pub fn evaluate(&self, xs: &DMatrix<f64>, xt: &DMatrix<f64>) -> Evaluation {
        let (off_s, ortho_s, total_s, mut gs) = self.shape_terms(xs, false);
        let (off_t, ortho_t, total_t, mut gt) = self.shape_terms(xt, true);
        let wc = self.coupling_weight();
        let c = coupling_projected(&self.source.projection, xs, &self.target.projection, xt, self.norm);
        gs += c.grad_source * wc;
        gt += c.grad_target * wc;
        Evaluation {
            terms: LossTerms {
                off_source: off_s,
                off_target: off_t,
                ortho_source: ortho_s,
                ortho_target: ortho_t,
                coupling: c.value,
            },
            total: total_s + total_t + wc * c.value,
            grad_source: gs,
            grad_target: gt,
        }
    }
}

/// Full/full objective at explicit embeddings; gradients are w.r.t. the
/// embeddings.
pub fn total_loss(problem: &CouplingProblem, psi_source: &DMatrix<f64>, psi_target: &DMatrix<f64>) -> Evaluation {
    let mut p = problem.clone();
    p.mode = Mode::FullFull;
    Compiled::new(&p, Parametrization::Free).evaluate(psi_source, psi_target)
}

/// Full/partial objective at explicit embeddings.
pub fn total_loss_partial(
    problem: &CouplingProblem,
    psi_full: &DMatrix<f64>,
    psi_partial: &DMatrix<f64>,
) -> Evaluation {
    let mut p = problem.clone();
    p.mode = Mode::FullPartial;
    Compiled::new(&p, Parametrization::Free).evaluate(psi_full, psi_partial)
}
