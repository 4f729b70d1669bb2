//! Loss terms and their analytic gradients.
//!
//! All norms are Frobenius norms, unsquared by default. At a zero of an
//! unsquared norm the gradient is taken to be zero.

use nalgebra::DMatrix;

use crate::laplacian::{MassDiagonal, SparseSymmetric};

/// Symmetric linear operator acting on the rows of an `n x k` matrix.
pub trait SymmetricOperator {
    fn dim(&self) -> usize;
    fn apply(&self, x: &DMatrix<f64>) -> DMatrix<f64>;
}

impl SymmetricOperator for SparseSymmetric {
    fn dim(&self) -> usize {
        self.n()
    }

    fn apply(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        self.mul_dense(x)
    }
}

impl SymmetricOperator for MassDiagonal {
    fn dim(&self) -> usize {
        self.len()
    }

    fn apply(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        self.mul_dense(x)
    }
}

impl SymmetricOperator for DMatrix<f64> {
    fn dim(&self) -> usize {
        self.nrows()
    }

    fn apply(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        self * x
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NormKind {
    #[default]
    Frobenius,
    SquaredFrobenius,
}

/// Residuals smaller than this fraction of the magnitude of the terms they
/// are formed from are rounding noise; the unsquared norm gets a zero
/// gradient there instead of a unit vector in a noise direction.
pub const ZERO_RESIDUAL_RTOL: f64 = 1e-11;

impl NormKind {
    /// Value of the norm of `residual` and the factor `s` such that the
    /// gradient w.r.t. the residual is `s * residual`. `reference` is the
    /// size of the quantities whose difference is `residual`.
    fn value_and_scale(self, residual: &DMatrix<f64>, reference: f64) -> (f64, f64) {
        let norm = residual.norm();
        match self {
            NormKind::Frobenius => {
                let zero = norm <= ZERO_RESIDUAL_RTOL * reference || norm == 0.0;
                (norm, if zero { 0.0 } else { 1.0 / norm })
            }
            NormKind::SquaredFrobenius => (norm * norm, 2.0),
        }
    }
}

#[derive(Debug, Clone)]
pub struct LossGrad {
    pub value: f64,
    pub grad: DMatrix<f64>,
}

/// `||Psi^T A Psi - target||` where `target` is built from `Psi^T A Psi`.
fn quadratic_residual_loss(
    psi: &DMatrix<f64>,
    op: &dyn SymmetricOperator,
    norm: NormKind,
    target: impl Fn(&mut DMatrix<f64>),
) -> LossGrad {
    assert_eq!(psi.nrows(), op.dim(), "embedding rows must match the operator");
    let applied = op.apply(psi);
    let mut residual = psi.tr_mul(&applied);
    let reference = residual.norm();
    target(&mut residual);
    let (value, scale) = norm.value_and_scale(&residual, reference);
    let sym = &residual + residual.transpose();
    LossGrad {
        value,
        grad: applied * sym * scale,
    }
}

/// `||Psi^T L Psi - diag(lambda)||`.
pub fn loss_off_with(
    psi: &DMatrix<f64>,
    stiffness: &dyn SymmetricOperator,
    lambda: &[f64],
    norm: NormKind,
) -> LossGrad {
    assert_eq!(psi.ncols(), lambda.len(), "one eigenvalue per embedding column");
    quadratic_residual_loss(psi, stiffness, norm, |r| {
        for (i, l) in lambda.iter().enumerate() {
            r[(i, i)] -= l;
        }
    })
}

pub fn loss_off(psi: &DMatrix<f64>, stiffness: &dyn SymmetricOperator, lambda: &[f64]) -> LossGrad {
    loss_off_with(psi, stiffness, lambda, NormKind::Frobenius)
}

/// `||Psi^T M Psi - I||`.
pub fn loss_ortho_with(psi: &DMatrix<f64>, mass: &dyn SymmetricOperator, norm: NormKind) -> LossGrad {
    quadratic_residual_loss(psi, mass, norm, |r| {
        for i in 0..r.nrows() {
            r[(i, i)] -= 1.0;
        }
    })
}

pub fn loss_ortho(psi: &DMatrix<f64>, mass: &dyn SymmetricOperator) -> LossGrad {
    loss_ortho_with(psi, mass, NormKind::Frobenius)
}

/// `||Psi^T L Psi - diag(Psi^T L Psi)||`: diagonalization without
/// eigenvalue anchoring.
pub fn loss_off_partial_with(
    psi: &DMatrix<f64>,
    stiffness: &dyn SymmetricOperator,
    norm: NormKind,
) -> LossGrad {
    quadratic_residual_loss(psi, stiffness, norm, |r| r.fill_diagonal(0.0))
}

pub fn loss_off_partial(psi: &DMatrix<f64>, stiffness: &dyn SymmetricOperator) -> LossGrad {
    loss_off_partial_with(psi, stiffness, NormKind::Frobenius)
}

#[derive(Debug, Clone)]
pub struct CouplingLoss {
    pub value: f64,
    pub grad_source: DMatrix<f64>,
    pub grad_target: DMatrix<f64>,
}

/// `||A_S Psi_S - A_T Psi_T||` for precomputed projections `A = D^T M`
/// (or `D^T M Phi` in the subspace parametrization).
pub fn coupling_projected(
    proj_source: &DMatrix<f64>,
    psi_source: &DMatrix<f64>,
    proj_target: &DMatrix<f64>,
    psi_target: &DMatrix<f64>,
    norm: NormKind,
) -> CouplingLoss {
    assert_eq!(proj_source.nrows(), proj_target.nrows(), "descriptor dimensions differ");
    assert_eq!(psi_source.ncols(), psi_target.ncols(), "embedding dimensions differ");
    let a = proj_source * psi_source;
    let b = proj_target * psi_target;
    let reference = a.norm().max(b.norm());
    let residual = a - b;
    let (value, scale) = norm.value_and_scale(&residual, reference);
    CouplingLoss {
        value,
        grad_source: proj_source.tr_mul(&residual) * scale,
        grad_target: proj_target.tr_mul(&residual) * -scale,
    }
}

/// `D^T M`, the map from functions to descriptor Fourier coefficients.
pub fn descriptor_projection(descriptor: &DMatrix<f64>, mass: &dyn SymmetricOperator) -> DMatrix<f64> {
    mass.apply(descriptor).transpose()
}

/// `||D_S^T M_S Psi_S - D_T^T M_T Psi_T||`.
pub fn loss_coupling_with(
    psi_source: &DMatrix<f64>,
    psi_target: &DMatrix<f64>,
    desc_source: &DMatrix<f64>,
    desc_target: &DMatrix<f64>,
    mass_source: &dyn SymmetricOperator,
    mass_target: &dyn SymmetricOperator,
    norm: NormKind,
) -> CouplingLoss {
    coupling_projected(
        &descriptor_projection(desc_source, mass_source),
        psi_source,
        &descriptor_projection(desc_target, mass_target),
        psi_target,
        norm,
    )
}

pub fn loss_coupling(
    psi_source: &DMatrix<f64>,
    psi_target: &DMatrix<f64>,
    desc_source: &DMatrix<f64>,
    desc_target: &DMatrix<f64>,
    mass_source: &dyn SymmetricOperator,
    mass_target: &dyn SymmetricOperator,
) -> CouplingLoss {
    loss_coupling_with(
        psi_source,
        psi_target,
        desc_source,
        desc_target,
        mass_source,
        mass_target,
        NormKind::Frobenius,
    )
}
