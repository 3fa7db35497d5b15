//! Entropies and energy-constrained Gibbs states.
//!
//! All entropies are in nats. Conversion to bits happens where rates are
//! formed, in [`crate::qsl`].

use thiserror::Error;

use crate::matcore::{
    eig_hermitian, real_diagonal, unitarity_deviation, ComplexMatrix, DensityOperator,
    EigenDecomposition, MatError,
};

/// Tolerance on `V^dagger V = I` for a measurement basis.
pub const BASIS_UNITARY_TOL: f64 = 1e-9;
/// Tolerance on the normalization of a probability vector.
pub const DISTRIBUTION_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EntropyError {
    #[error("invalid state: {0}")]
    InvalidState(#[from] MatError),
    #[error("basis is not unitary (max |V^dagger V - I| = {deviation:e})")]
    NotUnitaryBasis { deviation: f64 },
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),
    #[error("dimension mismatch: state {state} vs basis {basis}")]
    DimMismatch { state: usize, basis: usize },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ThermoError {
    #[error("energy {energy} is at or below the ground-state energy {ground}")]
    EnergyBelowGroundState { energy: f64, ground: f64 },
    #[error("no inverse-temperature bracket found below beta = {beta_limit:e}")]
    NoBracket { beta_limit: f64 },
    #[error("invalid Hamiltonian: {0}")]
    InvalidHamiltonian(#[from] MatError),
}

fn entropy_of(values: impl IntoIterator<Item = f64>) -> f64 {
    values
        .into_iter()
        .filter(|&p| p > 0.0)
        .map(|p| -p * p.ln())
        .sum()
}

/// `-tr(rho ln rho)` with `0 ln 0 = 0`.
pub fn von_neumann_entropy(rho: &DensityOperator) -> f64 {
    entropy_of(rho.eigenvalues()).max(0.0)
}

/// Orthonormal eigenbasis of an observable, with the observable's
/// eigenvalue attached to each basis vector.
#[derive(Debug, Clone)]
pub struct Basis {
    pub id: String,
    /// Basis vectors as columns.
    pub vectors: ComplexMatrix,
    /// Observable value `x` carried by each basis vector.
    pub labels: Vec<f64>,
}

impl Basis {
    pub fn new(
        id: impl Into<String>,
        vectors: ComplexMatrix,
        labels: Vec<f64>,
    ) -> Result<Self, EntropyError> {
        if vectors.nrows() != vectors.ncols() || labels.len() != vectors.ncols() {
            return Err(EntropyError::InvalidDistribution(format!(
                "basis of shape {}x{} with {} labels",
                vectors.nrows(),
                vectors.ncols(),
                labels.len()
            )));
        }
        let deviation = unitarity_deviation(&vectors);
        if deviation > BASIS_UNITARY_TOL {
            return Err(EntropyError::NotUnitaryBasis { deviation });
        }
        Ok(Self {
            id: id.into(),
            vectors,
            labels,
        })
    }

    /// Computational basis labelled `0, 1, ..., dim-1`.
    pub fn computational(dim: usize) -> Self {
        Self {
            id: "z".to_string(),
            vectors: ComplexMatrix::identity(dim, dim),
            labels: (0..dim).map(|k| k as f64).collect(),
        }
    }

    /// Eigenbasis of a Hermitian observable, labelled by its eigenvalues.
    pub fn of_observable(
        id: impl Into<String>,
        observable: &ComplexMatrix,
    ) -> Result<Self, MatError> {
        let EigenDecomposition {
            eigenvalues,
            eigenvectors,
        } = eig_hermitian(observable)?;
        Ok(Self {
            id: id.into(),
            vectors: eigenvectors,
            labels: eigenvalues,
        })
    }

    pub fn dim(&self) -> usize {
        self.labels.len()
    }

    /// `<x|A|x>` for every basis vector; real part only, `A` is Hermitian.
    pub fn diagonal_of(&self, a: &ComplexMatrix) -> Vec<f64> {
        (0..self.dim())
            .map(|k| {
                let v = self.vectors.column(k);
                (v.adjoint() * a * v)[(0, 0)].re
            })
            .collect()
    }
}

/// Distribution of outcomes of a projective measurement in a [`Basis`].
#[derive(Debug, Clone, PartialEq)]
pub struct MarginalDistribution {
    pub probabilities: Vec<f64>,
    pub basis_id: String,
    pub labels: Vec<f64>,
}

impl MarginalDistribution {
    pub fn new(
        probabilities: Vec<f64>,
        basis_id: impl Into<String>,
        labels: Vec<f64>,
    ) -> Result<Self, EntropyError> {
        let dist = Self {
            probabilities,
            basis_id: basis_id.into(),
            labels,
        };
        dist.validate()?;
        Ok(dist)
    }

    fn validate(&self) -> Result<(), EntropyError> {
        if self.probabilities.is_empty() || self.probabilities.len() != self.labels.len() {
            return Err(EntropyError::InvalidDistribution(format!(
                "{} probabilities for {} labels",
                self.probabilities.len(),
                self.labels.len()
            )));
        }
        if let Some(p) = self
            .probabilities
            .iter()
            .find(|p| !(**p >= 0.0) || !p.is_finite())
        {
            return Err(EntropyError::InvalidDistribution(format!(
                "entry {p} is not a probability"
            )));
        }
        let total: f64 = self.probabilities.iter().sum();
        if (total - 1.0).abs() > DISTRIBUTION_TOL {
            return Err(EntropyError::InvalidDistribution(format!(
                "sums to {total}"
            )));
        }
        Ok(())
    }

    /// `<x^2>` under this distribution.
    pub fn second_moment(&self) -> f64 {
        self.probabilities
            .iter()
            .zip(&self.labels)
            .map(|(p, x)| p * x * x)
            .sum()
    }
}

/// `rho(x) = <x|rho|x>`.
pub fn marginal(
    rho: &DensityOperator,
    basis: &Basis,
) -> Result<MarginalDistribution, EntropyError> {
    if rho.dim() != basis.dim() {
        return Err(EntropyError::DimMismatch {
            state: rho.dim(),
            basis: basis.dim(),
        });
    }
    let deviation = unitarity_deviation(&basis.vectors);
    if deviation > BASIS_UNITARY_TOL {
        return Err(EntropyError::NotUnitaryBasis { deviation });
    }
    let raw = basis.diagonal_of(rho.matrix());
    let clipped: Vec<f64> = raw.iter().map(|&p| p.max(0.0)).collect();
    let total: f64 = clipped.iter().sum();
    MarginalDistribution::new(
        clipped.iter().map(|p| p / total).collect(),
        basis.id.clone(),
        basis.labels.clone(),
    )
}

/// `-sum_x p(x) ln p(x)`.
pub fn shannon_information(p: &MarginalDistribution) -> Result<f64, EntropyError> {
    p.validate()?;
    Ok(entropy_of(p.probabilities.iter().copied()))
}

/// `k_B ln d`.
pub fn boltzmann_entropy(d: usize, k_b: f64) -> f64 {
    assert!(d >= 1, "Hilbert dimension must be positive");
    k_b * (d as f64).ln()
}

/// Gibbs state `exp(-beta H) / Z` at fixed mean energy.
#[derive(Debug, Clone)]
pub struct ThermalState {
    pub beta: f64,
    /// `ln Z`; stored in log form so large `beta` does not underflow.
    pub ln_z: f64,
    /// Mean energy `tr(rho H)` of the returned state.
    pub energy: f64,
    pub state: DensityOperator,
    /// Level populations in ascending energy order.
    pub populations: Vec<f64>,
}

impl ThermalState {
    pub fn partition_function(&self) -> f64 {
        self.ln_z.exp()
    }

    /// `F = -ln Z / beta`; undefined at infinite temperature.
    pub fn free_energy(&self) -> Option<f64> {
        (self.beta != 0.0).then(|| -self.ln_z / self.beta)
    }
}

struct Spectrum {
    levels: Vec<f64>,
    decomposition: EigenDecomposition,
}

impl Spectrum {
    fn of(h: &ComplexMatrix) -> Result<Self, ThermoError> {
        let decomposition = eig_hermitian(h)?;
        Ok(Self {
            levels: decomposition.eigenvalues.clone(),
            decomposition,
        })
    }

    fn ground(&self) -> f64 {
        self.levels[0]
    }

    fn width(&self) -> f64 {
        self.levels[self.levels.len() - 1] - self.ground()
    }

    /// Boltzmann weights relative to the ground level, and their sum.
    fn weights(&self, beta: f64) -> (Vec<f64>, f64) {
        let e0 = self.ground();
        let w: Vec<f64> = self
            .levels
            .iter()
            .map(|e| (-beta * (e - e0)).exp())
            .collect();
        let total = w.iter().sum();
        (w, total)
    }

    fn mean_energy(&self, beta: f64) -> f64 {
        let (w, total) = self.weights(beta);
        // Measured from the ground level to keep the sum well conditioned.
        let e0 = self.ground();
        e0 + w
            .iter()
            .zip(&self.levels)
            .map(|(w, e)| w * (e - e0))
            .sum::<f64>()
            / total
    }

    fn thermal_state(&self, beta: f64) -> ThermalState {
        let (w, total) = self.weights(beta);
        let populations: Vec<f64> = w.iter().map(|w| w / total).collect();
        let pops = populations.clone();
        let matrix = EigenDecomposition {
            eigenvalues: (0..pops.len()).map(|k| k as f64).collect(),
            eigenvectors: self.decomposition.eigenvectors.clone(),
        }
        .map_spectrum(|k| pops[k as usize]);
        let state = DensityOperator::new(matrix).expect("Gibbs weights form a valid state");
        ThermalState {
            beta,
            ln_z: -beta * self.ground() + total.ln(),
            energy: self.mean_energy(beta),
            state,
            populations,
        }
    }
}

/// Gibbs state of `h` whose mean energy is `energy`.
///
/// Energies at or above the infinite-temperature mean `tr(H)/d` give
/// `beta = 0`. Otherwise `beta > 0` is found by doubling an upper bracket
/// from `beta = 1` and then bisecting on the decreasing map
/// `beta -> <H>_beta`.
pub fn gibbs_state(h: &ComplexMatrix, energy: f64) -> Result<ThermalState, ThermoError> {
    let spectrum = Spectrum::of(h)?;
    let ground = spectrum.ground();
    if energy <= ground || !energy.is_finite() {
        return Err(ThermoError::EnergyBelowGroundState { energy, ground });
    }
    let infinite_temperature = spectrum.levels.iter().sum::<f64>() / spectrum.levels.len() as f64;
    if energy >= infinite_temperature {
        return Ok(spectrum.thermal_state(0.0));
    }

    let beta_limit = 1e6 / spectrum.width();
    let mut lo = 0.0;
    let mut hi = 1.0;
    while spectrum.mean_energy(hi) > energy {
        lo = hi;
        hi *= 2.0;
        if hi > beta_limit {
            return Err(ThermoError::NoBracket { beta_limit });
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if spectrum.mean_energy(mid) > energy {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let beta = 0.5 * (lo + hi);
    Ok(spectrum.thermal_state(beta))
}

/// `k_B beta (E - F)`, written as `k_B (beta E + ln Z)` so that it stays
/// finite at `beta = 0`.
pub fn gibbs_entropy(ts: &ThermalState, k_b: f64) -> f64 {
    k_b * (ts.beta * ts.energy + ts.ln_z)
}

/// `diag(hbar_omega (n + 1/2))`, `n = 0..levels-1`.
pub fn truncated_oscillator_hamiltonian(hbar_omega: f64, levels: usize) -> ComplexMatrix {
    assert!(levels >= 2, "oscillator needs at least two levels");
    assert!(hbar_omega > 0.0, "oscillator quantum must be positive");
    let diag: Vec<f64> = (0..levels).map(|n| hbar_omega * (n as f64 + 0.5)).collect();
    real_diagonal(&diag)
}

/// Population left in the top level below which a truncation is accepted.
pub const OSCILLATOR_TAIL_TOL: f64 = 1e-12;

/// Smallest oscillator truncation whose Gibbs state at `energy` leaves
/// less than `tail_tol` population in the top level.
pub fn converged_oscillator(
    hbar_omega: f64,
    energy: f64,
    tail_tol: f64,
) -> Result<(usize, ThermalState), ThermoError> {
    let mut levels = 2;
    loop {
        let h = truncated_oscillator_hamiltonian(hbar_omega, levels);
        match gibbs_state(&h, energy) {
            Ok(ts) if ts.populations[levels - 1] < tail_tol => return Ok((levels, ts)),
            Ok(_) => {}
            Err(e) => return Err(e),
        }
        levels += 1;
        if levels > 100_000 {
            return Err(ThermoError::NoBracket { beta_limit: 0.0 });
        }
    }
}
