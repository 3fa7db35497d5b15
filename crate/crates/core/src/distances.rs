//! Distances between states and marginals, and the entropy continuity bounds
//! that turn a distance into a bound on an entropy difference.

use thiserror::Error;

use crate::entropy::{
    gibbs_entropy, gibbs_state, von_neumann_entropy, MarginalDistribution, ThermoError,
};
use crate::matcore::{trace_norm, ComplexMatrix, DensityOperator, MatError};

/// Additive slack used when checking an inequality numerically.
pub const INEQUALITY_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DistanceError {
    #[error("dimension mismatch: {left} vs {right}")]
    DimMismatch { left: usize, right: usize },
    #[error("marginals are over different label sets ({left} vs {right})")]
    LabelMismatch { left: String, right: String },
    #[error(transparent)]
    Matrix(#[from] MatError),
    #[error(transparent)]
    Thermo(#[from] ThermoError),
}

/// `l(rho, sigma) = tr|rho - sigma| / 2`.
pub fn trace_distance(
    rho: &DensityOperator,
    sigma: &DensityOperator,
) -> Result<f64, DistanceError> {
    if rho.dim() != sigma.dim() {
        return Err(DistanceError::DimMismatch {
            left: rho.dim(),
            right: sigma.dim(),
        });
    }
    let diff: ComplexMatrix = rho.matrix() - sigma.matrix();
    Ok((0.5 * trace_norm(&diff)?).clamp(0.0, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WassersteinOrder {
    One,
    Two,
}

/// `(sum_x |p(x) - q(x)|^p)^(1/p)`: the p-norm of the difference of the
/// two marginals over a shared label set, not an optimal-transport cost.
pub fn wasserstein_p(
    p: &MarginalDistribution,
    q: &MarginalDistribution,
    order: WassersteinOrder,
) -> Result<f64, DistanceError> {
    if p.basis_id != q.basis_id || p.labels != q.labels {
        return Err(DistanceError::LabelMismatch {
            left: p.basis_id.clone(),
            right: q.basis_id.clone(),
        });
    }
    let diffs = p
        .probabilities
        .iter()
        .zip(&q.probabilities)
        .map(|(a, b)| (a - b).abs());
    Ok(match order {
        WassersteinOrder::One => diffs.sum(),
        WassersteinOrder::Two => diffs.map(|x| x * x).sum::<f64>().sqrt(),
    })
}

/// Right-hand side of the Fannes inequality, `2 l ln d + 1/e`.
pub fn fannes_rhs(ell: f64, d: usize) -> f64 {
    2.0 * ell * (d as f64).ln() + (-1.0f64).exp()
}

/// Right-hand side of the energy-constrained continuity bound,
/// `2 l H(rho_eq(E / l)) + 2 ln 2`, with the binary-entropy term at its
/// maximum `2 ln 2`. At `l = 0` the first term is dropped.
pub fn winter_rhs(ell: f64, h: &ComplexMatrix, energy: f64) -> Result<f64, DistanceError> {
    let tail = 2.0 * std::f64::consts::LN_2;
    if ell == 0.0 {
        return Ok(tail);
    }
    let ts = gibbs_state(h, energy / ell)?;
    Ok(2.0 * ell * gibbs_entropy(&ts, 1.0) + tail)
}

/// Constants of the Shannon-information continuity bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContinuityCoefficients {
    pub c1: f64,
    pub c2: f64,
    pub second_moment_rho: f64,
    pub second_moment_sigma: f64,
}

impl ContinuityCoefficients {
    pub fn new(c1: f64, c2: f64, second_moment_rho: f64, second_moment_sigma: f64) -> Self {
        assert!(c1 > 0.0, "c1 must be positive");
        assert!(c2 >= 0.0, "c2 must be nonnegative");
        assert!(
            second_moment_rho >= 0.0 && second_moment_sigma >= 0.0,
            "second moments must be nonnegative"
        );
        Self {
            c1,
            c2,
            second_moment_rho,
            second_moment_sigma,
        }
    }

    /// Coefficients with the second moments taken from two marginals.
    pub fn from_marginals(
        c1: f64,
        c2: f64,
        rho: &MarginalDistribution,
        sigma: &MarginalDistribution,
    ) -> Self {
        Self::new(c1, c2, rho.second_moment(), sigma.second_moment())
    }

    /// `alpha = c1 (sqrt<x^2>_rho + sqrt<x^2>_sigma) + c2`
    pub fn alpha(&self) -> f64 {
        self.c1 * (self.second_moment_rho.sqrt() + self.second_moment_sigma.sqrt()) + self.c2
    }
}

/// `alpha W`, bounding `|S_X(rho) - S_X(sigma)|` for either order of `W`.
pub fn shannon_continuity_rhs(coeffs: &ContinuityCoefficients, w: f64) -> f64 {
    coeffs.alpha() * w
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InequalityCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub satisfied: bool,
}

impl InequalityCheck {
    fn new(lhs: f64, rhs: f64) -> Self {
        Self {
            lhs,
            rhs,
            satisfied: lhs <= rhs + INEQUALITY_SLACK,
        }
    }
}

/// `|H(rho) - H(sigma)|` against [`fannes_rhs`].
pub fn check_fannes(
    rho: &DensityOperator,
    sigma: &DensityOperator,
) -> Result<InequalityCheck, DistanceError> {
    let ell = trace_distance(rho, sigma)?;
    let lhs = (von_neumann_entropy(rho) - von_neumann_entropy(sigma)).abs();
    Ok(InequalityCheck::new(lhs, fannes_rhs(ell, rho.dim())))
}

/// `|H(rho) - H(sigma)|` against [`winter_rhs`]; both states are assumed to
/// satisfy `tr(rho H), tr(sigma H) <= energy`.
pub fn check_winter(
    rho: &DensityOperator,
    sigma: &DensityOperator,
    h: &ComplexMatrix,
    energy: f64,
) -> Result<InequalityCheck, DistanceError> {
    let ell = trace_distance(rho, sigma)?;
    let lhs = (von_neumann_entropy(rho) - von_neumann_entropy(sigma)).abs();
    Ok(InequalityCheck::new(lhs, winter_rhs(ell, h, energy)?))
}
