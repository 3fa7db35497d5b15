//! Parameter sweeps over the damped Jaynes-Cummings model and the Rabi
//! demonstration of the marginal (Shannon) bound.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::distances::ContinuityCoefficients;
use crate::dynamics::{
    evolve, integrate, jc_generator, unitary_generator, DampedJcParams, DynamicsError,
};
use crate::entropy::{marginal, von_neumann_entropy, Basis};
use crate::matcore::{ComplexMatrix, DensityOperator};
use crate::qsl::{
    bound_shannon, entropy_change, marginal_speed_summary, shannon_change, shannon_rate_exact,
    speed_summary, BoundReport, Flag, Flags, MarginalSpeedSummary, QslError, SpeedSummary,
};
use crate::units::Units;

/// Largest half-step discrepancy (trace distance) accepted as converged.
pub const CONVERGENCE_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SweepError {
    #[error("invalid configuration: {0}")]
    ConfigInvalid(String),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error(transparent)]
    Qsl(#[from] QslError),
    #[error("worker pool: {0}")]
    Pool(String),
}

/// Logarithmically spaced grid from `min` to `max` inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LogGrid {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl LogGrid {
    pub fn points(&self) -> Vec<f64> {
        let ratio = (self.max / self.min).ln();
        (0..self.count)
            .map(|k| {
                if k + 1 == self.count {
                    self.max
                } else {
                    self.min * (ratio * k as f64 / (self.count - 1) as f64).exp()
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub lambda: f64,
    pub omega0: f64,
    pub tau: f64,
    pub gamma0_grid: LogGrid,
    /// Hilbert dimension entering `ln d` in the microcanonical bound.
    pub dimension_for_bound: usize,
    /// RK4 steps per unit of `max(1, gamma0 tau)`.
    pub steps: usize,
    /// Whether the summary check uses the bound with the `1/e` term.
    pub include_additive: bool,
    pub seed: u64,
    pub constants: Units,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            lambda: 1.0,
            omega0: 1.0,
            tau: 1.0,
            gamma0_grid: LogGrid {
                min: 1e-2,
                max: 1e2,
                count: 60,
            },
            dimension_for_bound: 2,
            steps: 20_000,
            include_additive: true,
            seed: 0,
            constants: Units::default(),
        }
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<(), SweepError> {
        let positive = [
            ("lambda", self.lambda),
            ("omega0", self.omega0),
            ("tau", self.tau),
            ("gamma0_grid.min", self.gamma0_grid.min),
            ("gamma0_grid.max", self.gamma0_grid.max),
            ("constants.hbar", self.constants.hbar),
            ("constants.k_b", self.constants.k_b),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(SweepError::ConfigInvalid(format!(
                    "{name} must be positive and finite, got {v}"
                )));
            }
        }
        if self.gamma0_grid.min >= self.gamma0_grid.max {
            return Err(SweepError::ConfigInvalid(
                "gamma0_grid.min must be below gamma0_grid.max".into(),
            ));
        }
        if self.gamma0_grid.count < 2 {
            return Err(SweepError::ConfigInvalid(
                "gamma0_grid.count must be at least 2".into(),
            ));
        }
        if self.dimension_for_bound < 2 {
            return Err(SweepError::ConfigInvalid(
                "dimension_for_bound must be at least 2".into(),
            ));
        }
        if self.steps < 2 {
            return Err(SweepError::ConfigInvalid("steps must be at least 2".into()));
        }
        Ok(())
    }

    /// Step count for one grid point, scaled with `gamma0 tau`.
    pub fn steps_for(&self, gamma0: f64) -> usize {
        (self.steps as f64 * (gamma0 * self.tau).max(1.0)).ceil() as usize
    }
}

/// One grid point of the Jaynes-Cummings sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub gamma0: f64,
    pub lambda: f64,
    pub omega0: f64,
    pub tau: f64,
    pub ell: f64,
    pub lambda_tau: f64,
    pub tau_qsl: f64,
    pub delta_h_nats: f64,
    pub report: BoundReport,
}

impl SweepRow {
    fn flagged(cfg: &SweepConfig, gamma0: f64, flag: Flag) -> Self {
        Self {
            gamma0,
            lambda: cfg.lambda,
            omega0: cfg.omega0,
            tau: cfg.tau,
            ell: f64::NAN,
            lambda_tau: f64::NAN,
            tau_qsl: f64::NAN,
            delta_h_nats: f64::NAN,
            report: BoundReport {
                info_rate_exact: f64::NAN,
                bound_micro: f64::NAN,
                bound_micro_with_additive: f64::NAN,
                bound_canonical: None,
                bound_shannon: None,
                flags: [flag].into_iter().collect(),
            },
        }
    }

    pub fn flags(&self) -> &Flags {
        &self.report.flags
    }
}

fn jc_row(cfg: &SweepConfig, gamma0: f64) -> Result<SweepRow, SweepError> {
    let params = DampedJcParams::new(cfg.omega0, gamma0, cfg.lambda)?;
    let excited = DensityOperator::basis_state(2, 0);
    let evolution = match evolve(
        &jc_generator(params),
        &excited,
        cfg.tau,
        cfg.steps_for(gamma0),
    ) {
        Ok(ev) => ev,
        Err(DynamicsError::AmplitudeGuard { .. } | DynamicsError::AmplitudeZero { .. }) => {
            return Ok(SweepRow::flagged(cfg, gamma0, Flag::AmplitudeGuard));
        }
        Err(
            DynamicsError::StateInvariantViolation { .. }
            | DynamicsError::NonFiniteState { .. }
            | DynamicsError::GeneratorInvariant { .. },
        ) => return Ok(SweepRow::flagged(cfg, gamma0, Flag::NonConverged)),
        Err(e) => return Err(e.into()),
    };
    let traj = &evolution.trajectory;
    let ss = speed_summary(traj)?;
    let mut report = BoundReport::microcanonical(traj, &ss, cfg.dimension_for_bound);
    if !evolution.converged(CONVERGENCE_TOL) {
        report.flags.insert(Flag::NonConverged);
    }
    Ok(SweepRow {
        gamma0,
        lambda: cfg.lambda,
        omega0: cfg.omega0,
        tau: cfg.tau,
        ell: ss.ell,
        lambda_tau: ss.lambda_tau,
        tau_qsl: ss.tau_qsl,
        delta_h_nats: entropy_change(traj),
        report,
    })
}

/// One row per `gamma0` grid point, each from its own trajectory starting
/// in the excited state. Rows come back in grid order for any worker count.
pub fn run_jc_sweep(cfg: &SweepConfig, workers: usize) -> Result<Vec<SweepRow>, SweepError> {
    cfg.validate()?;
    let grid = cfg.gamma0_grid.points();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| SweepError::Pool(e.to_string()))?;
    pool.install(|| grid.par_iter().map(|&g| jc_row(cfg, g)).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RabiConfig {
    pub omega: f64,
    pub tau: f64,
    pub steps: usize,
    pub c1: f64,
    pub c2: f64,
    pub hbar: f64,
}

impl Default for RabiConfig {
    fn default() -> Self {
        Self {
            omega: 1.0,
            tau: std::f64::consts::PI,
            steps: 20_000,
            c1: 1.0,
            c2: 0.0,
            hbar: 1.0,
        }
    }
}

/// Speed limits and the Shannon-information bound for resonant Rabi
/// oscillation `H = (hbar Omega / 2) sigma_x` from `|0>`, measured in the
/// computational basis with labels `x in {0, 1}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RabiReport {
    pub omega: f64,
    pub tau: f64,
    pub ell: f64,
    pub lambda_tau: f64,
    pub tau_qsl: f64,
    pub w1: f64,
    pub lambda_x_tau: f64,
    pub tau_qsl_x: f64,
    pub delta_s_x_nats: f64,
    pub shannon_rate: f64,
    pub alpha: f64,
    pub bound_shannon: f64,
    /// `max_t |H(rho_t) - H(rho_0)|`; zero up to integration error.
    pub entropy_drift: f64,
    pub flags: String,
}

pub fn run_rabi_demo(cfg: &RabiConfig) -> Result<RabiReport, SweepError> {
    for (name, v) in [
        ("omega", cfg.omega),
        ("tau", cfg.tau),
        ("c1", cfg.c1),
        ("hbar", cfg.hbar),
    ] {
        if !(v > 0.0) || !v.is_finite() {
            return Err(SweepError::ConfigInvalid(format!(
                "{name} must be positive and finite, got {v}"
            )));
        }
    }
    if !(cfg.c2 >= 0.0) {
        return Err(SweepError::ConfigInvalid(format!(
            "c2 must be nonnegative, got {}",
            cfg.c2
        )));
    }
    if cfg.steps < 2 {
        return Err(SweepError::ConfigInvalid("steps must be at least 2".into()));
    }
    let traj = integrate(
        &rabi_generator(cfg.omega, cfg.hbar)?,
        &DensityOperator::basis_state(2, 0),
        cfg.tau,
        cfg.steps,
    )?;
    let basis = Basis::computational(2);
    let ss: SpeedSummary = speed_summary(&traj)?;
    let mss: MarginalSpeedSummary = marginal_speed_summary(&traj, &basis)?;
    let delta_s = shannon_change(&traj, &basis)?;
    let start = marginal(traj.initial(), &basis).map_err(QslError::from)?;
    let end = marginal(traj.last(), &basis).map_err(QslError::from)?;
    let coeffs = ContinuityCoefficients::from_marginals(cfg.c1, cfg.c2, &end, &start);
    let s0 = von_neumann_entropy(traj.initial());
    let entropy_drift = traj
        .states
        .iter()
        .map(|s| (von_neumann_entropy(s) - s0).abs())
        .fold(0.0, f64::max);
    let flags: Flags = ss.degeneracy.into_iter().chain(mss.degeneracy).collect();
    Ok(RabiReport {
        omega: cfg.omega,
        tau: cfg.tau,
        ell: ss.ell,
        lambda_tau: ss.lambda_tau,
        tau_qsl: ss.tau_qsl,
        w1: mss.w1,
        lambda_x_tau: mss.lambda_x_tau,
        tau_qsl_x: mss.tau_qsl_x,
        delta_s_x_nats: delta_s,
        shannon_rate: shannon_rate_exact(delta_s, &mss),
        alpha: coeffs.alpha(),
        bound_shannon: bound_shannon(&mss, &coeffs),
        entropy_drift,
        flags: flags.to_string(),
    })
}

/// `(hbar Omega / 2) sigma_x` as a von Neumann generator.
pub fn rabi_generator(
    omega: f64,
    hbar: f64,
) -> Result<crate::dynamics::UnitaryGenerator, DynamicsError> {
    let zero = num_complex::Complex64::new(0.0, 0.0);
    let half = num_complex::Complex64::new(0.5 * hbar * omega, 0.0);
    unitary_generator(
        ComplexMatrix::from_row_slice(2, 2, &[zero, half, half, zero]),
        hbar,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn log_grid_endpoints() {
        let g = LogGrid {
            min: 1e-2,
            max: 1e2,
            count: 5,
        }
        .points();
        assert_eq!(g.len(), 5);
        assert_eq!(g[0], 1e-2);
        assert_eq!(g[4], 1e2);
        assert!((g[2] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn config_validation() {
        assert!(SweepConfig::default().validate().is_ok());
        let mut cfg = SweepConfig::default();
        cfg.gamma0_grid.count = 1;
        assert!(matches!(cfg.validate(), Err(SweepError::ConfigInvalid(_))));
        let mut cfg = SweepConfig::default();
        cfg.gamma0_grid.min = 10.0;
        cfg.gamma0_grid.max = 1.0;
        assert!(cfg.validate().is_err());
        let cfg = SweepConfig {
            tau: -1.0,
            ..SweepConfig::default()
        };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn config_round_trips_through_json() {
        let text = serde_json::to_string(&SweepConfig::default()).unwrap();
        let back: SweepConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(back, SweepConfig::default());
        let partial: SweepConfig = serde_json::from_str(r#"{"tau": 2.0}"#).unwrap();
        assert_eq!(partial.tau, 2.0);
        assert_eq!(partial.lambda, 1.0);
        assert!(serde_json::from_str::<SweepConfig>(r#"{"bogus": 1}"#).is_err());
    }

    #[test]
    fn minimal_grid_gives_two_rows() {
        let cfg = SweepConfig {
            gamma0_grid: LogGrid {
                min: 0.1,
                max: 0.3,
                count: 2,
            },
            steps: 500,
            ..SweepConfig::default()
        };
        let rows = run_jc_sweep(&cfg, 1).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0].gamma0, 0.1);
        assert_eq!(rows[1].gamma0, 0.3);
        for row in &rows {
            assert!(row.flags().is_empty());
            assert!(row.report.within_bound());
            assert!(row.tau_qsl <= row.tau * (1.0 + 1e-5), "{row:?}");
        }
    }

    #[test]
    fn amplitude_zero_inside_horizon_is_flagged() {
        let cfg = SweepConfig {
            gamma0_grid: LogGrid {
                min: 20.0,
                max: 30.0,
                count: 2,
            },
            steps: 200,
            ..SweepConfig::default()
        };
        for row in run_jc_sweep(&cfg, 2).unwrap() {
            assert!(row.flags().contains(Flag::AmplitudeGuard));
            assert!(row.report.info_rate_exact.is_nan());
        }
    }

    #[test]
    fn rabi_demo_half_period() {
        let report = run_rabi_demo(&RabiConfig {
            omega: 1.0,
            tau: PI,
            ..RabiConfig::default()
        })
        .unwrap();
        assert!((report.tau_qsl_x - PI).abs() < 1e-6);
        assert!((report.tau_qsl - 2.0).abs() < 1e-6);
        assert!(report.entropy_drift < 1e-8);
        assert!(report.shannon_rate <= report.bound_shannon);
    }

    #[test]
    fn rabi_demo_full_period() {
        let report = run_rabi_demo(&RabiConfig {
            omega: 1.0,
            tau: 2.0 * PI,
            ..RabiConfig::default()
        })
        .unwrap();
        assert!(report.delta_s_x_nats.abs() < 1e-8);
        assert!(report.flags.contains("RETURNED"));
    }

    #[test]
    fn rabi_demo_rejects_bad_config() {
        assert!(run_rabi_demo(&RabiConfig {
            omega: 0.0,
            ..RabiConfig::default()
        })
        .is_err());
        assert!(run_rabi_demo(&RabiConfig {
            c2: -1.0,
            ..RabiConfig::default()
        })
        .is_err());
    }
}
