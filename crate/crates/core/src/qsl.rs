//! Quantum speed limit times and bounds on the rate of information production.
//!
//! Rates are reported in bits per unit time: an entropy change in nats is
//! divided by `ln 2` at the point where a rate is formed.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::distances::{trace_distance, wasserstein_p, ContinuityCoefficients, WassersteinOrder};
use crate::dynamics::Trajectory;
use crate::entropy::{
    boltzmann_entropy, gibbs_entropy, gibbs_state, marginal, shannon_information,
    von_neumann_entropy, Basis, EntropyError, ThermoError,
};
use crate::matcore::{trace_norm, ComplexMatrix, MatError};
use crate::units::Units;

const LN2: f64 = std::f64::consts::LN_2;

/// Distances at or below this are treated as zero when forming a QSL time.
pub const DEGENERATE_DISTANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QslError {
    #[error("trajectory is empty")]
    EmptyTrajectory,
    #[error(transparent)]
    Matrix(#[from] MatError),
    #[error(transparent)]
    Entropy(#[from] EntropyError),
    #[error(transparent)]
    Thermo(#[from] ThermoError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Flag {
    /// The amplitude of the Jaynes-Cummings model vanishes inside the horizon.
    AmplitudeGuard,
    /// The half-step rerun disagreed with the trajectory beyond tolerance.
    NonConverged,
    /// No motion at all: zero distance and zero speed.
    Stationary,
    /// The state moved but returned to its start: zero distance, nonzero speed.
    Returned,
}

impl Flag {
    pub fn as_str(&self) -> &'static str {
        match self {
            Flag::AmplitudeGuard => "AMPLITUDE_GUARD",
            Flag::NonConverged => "NONCONVERGED",
            Flag::Stationary => "STATIONARY",
            Flag::Returned => "RETURNED",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [
            Flag::AmplitudeGuard,
            Flag::NonConverged,
            Flag::Stationary,
            Flag::Returned,
        ]
        .into_iter()
        .find(|f| f.as_str() == s)
    }
}

impl fmt::Display for Flag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Ordered flag set; renders as `|`-separated names, empty when unset.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Flags(BTreeSet<Flag>);

impl Flags {
    pub fn insert(&mut self, flag: Flag) {
        self.0.insert(flag);
    }

    pub fn contains(&self, flag: Flag) -> bool {
        self.0.contains(&flag)
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = Flag> + '_ {
        self.0.iter().copied()
    }

    pub fn parse(s: &str) -> Option<Self> {
        let mut flags = Flags::default();
        for part in s.split('|').filter(|p| !p.is_empty()) {
            flags.insert(Flag::parse(part)?);
        }
        Some(flags)
    }
}

impl fmt::Display for Flags {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<&str> = self.0.iter().map(Flag::as_str).collect();
        f.write_str(&names.join("|"))
    }
}

impl FromIterator<Flag> for Flags {
    fn from_iter<I: IntoIterator<Item = Flag>>(iter: I) -> Self {
        Flags(iter.into_iter().collect())
    }
}

/// Trace distance travelled, average speed and the resulting QSL time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpeedSummary {
    /// `l(rho_tau, rho_0)`
    pub ell: f64,
    /// `(1/tau) int_0^tau ||d rho/dt||_1 dt`
    pub lambda_tau: f64,
    /// `2 l / Lambda_tau`
    pub tau_qsl: f64,
    pub tau: f64,
    pub degeneracy: Option<Flag>,
}

/// Marginal counterpart of [`SpeedSummary`] in the eigenbasis of an observable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarginalSpeedSummary {
    /// `W_1(rho_tau(x), rho_0(x))`
    pub w1: f64,
    /// `(1/tau) int_0^tau ||d rho_t(x)/dt||_1 dt`
    pub lambda_x_tau: f64,
    /// `W_1 / Lambda^X_tau`
    pub tau_qsl_x: f64,
    pub tau: f64,
    pub degeneracy: Option<Flag>,
}

fn trapezoid(times: &[f64], values: &[f64]) -> f64 {
    times
        .windows(2)
        .zip(values.windows(2))
        .map(|(t, v)| 0.5 * (t[1] - t[0]) * (v[0] + v[1]))
        .sum()
}

/// Integral of sampled `values` over `times`.
///
/// On a uniform grid this is composite Simpson (the Richardson-extrapolated
/// trapezoid rule, with a 3/8 panel at the end for an odd interval count);
/// any other grid falls back to the trapezoid rule.
pub fn time_integral(times: &[f64], values: &[f64]) -> f64 {
    assert_eq!(
        times.len(),
        values.len(),
        "times and values differ in length"
    );
    let n = times.len().saturating_sub(1);
    if n < 2 {
        return trapezoid(times, values);
    }
    let h = (times[n] - times[0]) / n as f64;
    let uniform = times
        .windows(2)
        .all(|t| ((t[1] - t[0]) - h).abs() <= 1e-9 * h.abs());
    if !uniform {
        return trapezoid(times, values);
    }
    let (even, tail) = if n.is_multiple_of(2) {
        (n, 0.0)
    } else if n == 3 {
        (0, simpson_38(h, &values[0..4]))
    } else {
        (n - 3, simpson_38(h, &values[n - 3..]))
    };
    let mut sum = 0.0;
    for k in (0..even).step_by(2) {
        sum += values[k] + 4.0 * values[k + 1] + values[k + 2];
    }
    sum * h / 3.0 + tail
}

fn simpson_38(h: f64, v: &[f64]) -> f64 {
    3.0 * h / 8.0 * (v[0] + 3.0 * v[1] + 3.0 * v[2] + v[3])
}

/// QSL time from a distance, an average speed and the horizon.
///
/// `prefactor` is 2 for the trace distance (which carries a factor 1/2)
/// and 1 for the marginal 1-norm.
fn qsl_time(distance: f64, speed: f64, tau: f64, prefactor: f64) -> (f64, Option<Flag>) {
    if distance <= DEGENERATE_DISTANCE {
        if speed <= DEGENERATE_DISTANCE {
            (tau, Some(Flag::Stationary))
        } else {
            (0.0, Some(Flag::Returned))
        }
    } else {
        (prefactor * distance / speed, None)
    }
}

pub fn speed_summary(traj: &Trajectory) -> Result<SpeedSummary, QslError> {
    if traj.len() < 2 {
        return Err(QslError::EmptyTrajectory);
    }
    let norms = traj
        .rates
        .iter()
        .map(trace_norm)
        .collect::<Result<Vec<f64>, _>>()?;
    let tau = traj.duration();
    let lambda_tau = time_integral(&traj.times, &norms) / tau;
    let ell = trace_distance(traj.last(), traj.initial()).map_err(|_| QslError::EmptyTrajectory)?;
    let (tau_qsl, degeneracy) = qsl_time(ell, lambda_tau, tau, 2.0);
    Ok(SpeedSummary {
        ell,
        lambda_tau,
        tau_qsl,
        tau,
        degeneracy,
    })
}

pub fn marginal_speed_summary(
    traj: &Trajectory,
    basis: &Basis,
) -> Result<MarginalSpeedSummary, QslError> {
    if traj.len() < 2 {
        return Err(QslError::EmptyTrajectory);
    }
    let start = marginal(traj.initial(), basis)?;
    let end = marginal(traj.last(), basis)?;
    let w1 = wasserstein_p(&end, &start, WassersteinOrder::One)
        .map_err(|_| QslError::EmptyTrajectory)?;
    let norms: Vec<f64> = traj
        .rates
        .iter()
        .map(|r| basis.diagonal_of(r).iter().map(|x| x.abs()).sum())
        .collect();
    let tau = traj.duration();
    let lambda_x_tau = time_integral(&traj.times, &norms) / tau;
    let (tau_qsl_x, degeneracy) = qsl_time(w1, lambda_x_tau, tau, 1.0);
    Ok(MarginalSpeedSummary {
        w1,
        lambda_x_tau,
        tau_qsl_x,
        tau,
        degeneracy,
    })
}

/// `H(rho_tau) - H(rho_0)` in nats.
pub fn entropy_change(traj: &Trajectory) -> f64 {
    von_neumann_entropy(traj.last()) - von_neumann_entropy(traj.initial())
}

/// `|Delta H| / (tau_QSL ln 2)`; zero for degenerate speed summaries.
pub fn info_rate_exact(traj: &Trajectory, ss: &SpeedSummary) -> f64 {
    if ss.degeneracy.is_some() {
        return 0.0;
    }
    entropy_change(traj).abs() / (ss.tau_qsl * LN2)
}

/// `S_X(rho_tau) - S_X(rho_0)` in nats.
pub fn shannon_change(traj: &Trajectory, basis: &Basis) -> Result<f64, QslError> {
    let start = shannon_information(&marginal(traj.initial(), basis)?)?;
    let end = shannon_information(&marginal(traj.last(), basis)?)?;
    Ok(end - start)
}

/// `|Delta S_X| / (tau^X_QSL ln 2)`; zero for degenerate summaries.
pub fn shannon_rate_exact(delta_s: f64, mss: &MarginalSpeedSummary) -> f64 {
    if mss.degeneracy.is_some() {
        return 0.0;
    }
    delta_s.abs() / (mss.tau_qsl_x * LN2)
}

/// `(ln d / ln 2) Lambda_tau`, plus `1 / (e tau_QSL ln 2)` when
/// `include_additive` is set.
pub fn bound_micro(ss: &SpeedSummary, d: usize, include_additive: bool) -> f64 {
    let main = (d as f64).ln() / LN2 * ss.lambda_tau;
    if include_additive {
        main + additive_term(ss)
    } else {
        main
    }
}

/// The same bound written through the Boltzmann entropy, `S_B Lambda_tau / (k_B ln 2)`.
pub fn bound_micro_boltzmann(
    ss: &SpeedSummary,
    d: usize,
    units: &Units,
    include_additive: bool,
) -> f64 {
    let main = boltzmann_entropy(d, units.k_b) * ss.lambda_tau / (units.k_b * LN2);
    if include_additive {
        main + additive_term(ss)
    } else {
        main
    }
}

/// `1 / (e tau_QSL ln 2)`: the Fannes constant `1/e` turned into a rate.
/// Infinite when the QSL time is zero.
fn additive_term(ss: &SpeedSummary) -> f64 {
    (-1.0f64).exp() / (ss.tau_qsl * LN2)
}

/// `S_G Lambda_tau / (k_B ln 2)` for the Gibbs state of `h` at mean energy `energy`.
pub fn bound_canonical(
    ss: &SpeedSummary,
    h: &ComplexMatrix,
    energy: f64,
    units: &Units,
) -> Result<f64, QslError> {
    let ts = gibbs_state(h, energy)?;
    Ok(gibbs_entropy(&ts, units.k_b) * ss.lambda_tau / (units.k_b * LN2))
}

/// `alpha Lambda^X_tau / ln 2`.
pub fn bound_shannon(mss: &MarginalSpeedSummary, coeffs: &ContinuityCoefficients) -> f64 {
    coeffs.alpha() * mss.lambda_x_tau / LN2
}

/// `pi E / (hbar ln 2)`.
pub fn bekenstein_bound(energy: f64, hbar: f64) -> f64 {
    assert!(energy >= 0.0, "energy must be nonnegative");
    std::f64::consts::PI * energy / (hbar * LN2)
}

/// `sqrt(pi P / (3 hbar)) / ln 2` for radiated power `P`.
pub fn pendry_bound(power: f64, hbar: f64) -> f64 {
    assert!(power >= 0.0, "power must be nonnegative");
    (std::f64::consts::PI * power / (3.0 * hbar)).sqrt() / LN2
}

/// Exact information rate of one trajectory alongside every applicable bound.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    pub info_rate_exact: f64,
    pub bound_micro: f64,
    pub bound_micro_with_additive: f64,
    pub bound_canonical: Option<f64>,
    pub bound_shannon: Option<f64>,
    pub flags: Flags,
}

impl BoundReport {
    /// Exact rate and both microcanonical bounds for a `d`-dimensional trajectory.
    pub fn microcanonical(traj: &Trajectory, ss: &SpeedSummary, d: usize) -> Self {
        let mut flags = Flags::default();
        if let Some(flag) = ss.degeneracy {
            flags.insert(flag);
        }
        Self {
            info_rate_exact: info_rate_exact(traj, ss),
            bound_micro: bound_micro(ss, d, false),
            bound_micro_with_additive: bound_micro(ss, d, true),
            bound_canonical: None,
            bound_shannon: None,
            flags,
        }
    }

    /// Whether the exact rate sits below the bound that includes the additive term.
    pub fn within_bound(&self) -> bool {
        self.info_rate_exact <= self.bound_micro_with_additive + 1e-9
    }
}
