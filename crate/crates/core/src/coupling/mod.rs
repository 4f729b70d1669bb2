//! Coupled spectral embeddings: per-shape diagonalization and orthogonality
//! losses tied together by a descriptor coupling term, minimized with Adam.

mod loss;
mod optimize;
mod problem;

pub use loss::{
    coupling_projected, descriptor_projection, loss_coupling, loss_coupling_with, loss_off,
    loss_off_partial, loss_off_partial_with, loss_off_with, loss_ortho, loss_ortho_with, CouplingLoss,
    LossGrad, NormKind, SymmetricOperator,
};
pub use optimize::{
    cqhb_baseline, optimize_coupled, optimize_single, trace_to_csv, CoupledResult, Init, OptimizerConfig,
    RunInfo, Side, SingleResult, TraceRow, TRACE_HEADER,
};
pub use problem::{
    total_loss, total_loss_partial, CouplingProblem, DescriptorScaling, Evaluation, LossTerms, Mode,
    Parametrization, PartialWeights, ShapeData, Weights,
};

use nalgebra::DMatrix;

/// Per-vertex `k`-dimensional embedding of one shape.
#[derive(Debug, Clone, PartialEq)]
pub struct Embedding {
    pub psi: DMatrix<f64>,
}

impl Embedding {
    pub fn new(psi: DMatrix<f64>) -> Self {
        Self { psi }
    }

    pub fn n(&self) -> usize {
        self.psi.nrows()
    }

    pub fn k(&self) -> usize {
        self.psi.ncols()
    }
}
