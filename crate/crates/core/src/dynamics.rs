//! Time evolution of density operators.
//!
//! [`evolve`] integrates `d rho/dt = L(t, rho)` with fixed-step classical
//! RK4 for any [`Generator`]. Two generators are provided: von Neumann
//! dynamics for a (possibly time-dependent) Hamiltonian, and the exact
//! time-local master equation of a qubit coupled to a leaky cavity with a
//! Lorentzian spectral density (the damped Jaynes-Cummings model).
//!
//! Qubit basis convention for the Jaynes-Cummings model: index 0 is the
//! excited level `|e>`, index 1 the ground level `|g>`, so that
//! `sigma_+ sigma_- = diag(1, 0)`.

use num_complex::Complex64;
use thiserror::Error;

use crate::distances::trace_distance;
use crate::matcore::{
    check_hermitian, commutator, hermitian_deviation, hermitian_part, trace, ComplexMatrix,
    DensityOperator, MatError,
};

/// `|c_t|` below which the decay and Lamb-shift rates are not evaluated.
pub const AMPLITUDE_GUARD: f64 = 1e-14;

/// Relative tolerance on the Hermiticity and tracelessness of generator output.
pub const GENERATOR_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DynamicsError {
    #[error("at least {min} steps are required, got {got}")]
    TooFewSteps { min: usize, got: usize },
    #[error("invalid parameter: {0}")]
    InvalidParams(String),
    #[error("state left the density-operator set at t = {t}: {source}")]
    StateInvariantViolation { t: f64, source: MatError },
    #[error("non-finite state at t = {t}")]
    NonFiniteState { t: f64 },
    #[error("amplitude |c| = {modulus:e} at t = {t} is below the guard")]
    AmplitudeZero { t: f64, modulus: f64 },
    #[error("amplitude vanishes inside the step [{t0}, {t1}]")]
    AmplitudeGuard { t0: f64, t1: f64 },
    #[error(
        "generator output at t = {t} is not a traceless Hermitian matrix (deviation {deviation:e})"
    )]
    GeneratorInvariant { t: f64, deviation: f64 },
    #[error("dimension mismatch: generator {generator} vs state {state}")]
    DimMismatch { generator: usize, state: usize },
    #[error(transparent)]
    Matrix(#[from] MatError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GeneratorKind {
    Unitary,
    Dissipative,
}

/// Right-hand side `L(t, rho)` of a master equation.
pub trait Generator: Send + Sync {
    fn dim(&self) -> usize;

    fn kind(&self) -> GeneratorKind;

    /// `L(t, rho)`. `rho` may be an intermediate RK stage and need not be a
    /// valid state.
    fn apply(&self, t: f64, rho: &ComplexMatrix) -> Result<ComplexMatrix, DynamicsError>;

    /// Rejects an integration step over `[t0, t1]` that would cross a
    /// singularity of the generator.
    fn check_step(&self, _t0: f64, _t1: f64) -> Result<(), DynamicsError> {
        Ok(())
    }
}

/// `L = 0`.
#[derive(Debug, Clone, Copy)]
pub struct ZeroGenerator {
    pub dim: usize,
}

impl Generator for ZeroGenerator {
    fn dim(&self) -> usize {
        self.dim
    }

    fn kind(&self) -> GeneratorKind {
        GeneratorKind::Unitary
    }

    fn apply(&self, _t: f64, _rho: &ComplexMatrix) -> Result<ComplexMatrix, DynamicsError> {
        Ok(ComplexMatrix::zeros(self.dim, self.dim))
    }
}

type HamiltonianFn = dyn Fn(f64) -> ComplexMatrix + Send + Sync;

enum Hamiltonian {
    Constant(ComplexMatrix),
    TimeDependent { dim: usize, at: Box<HamiltonianFn> },
}

/// von Neumann dynamics `d rho/dt = -(i/hbar) [H(t), rho]`.
pub struct UnitaryGenerator {
    hamiltonian: Hamiltonian,
    hbar: f64,
}

impl UnitaryGenerator {
    pub fn time_dependent(
        dim: usize,
        hbar: f64,
        at: impl Fn(f64) -> ComplexMatrix + Send + Sync + 'static,
    ) -> Self {
        Self {
            hamiltonian: Hamiltonian::TimeDependent {
                dim,
                at: Box::new(at),
            },
            hbar,
        }
    }
}

/// Generator of unitary evolution under a constant Hamiltonian `h`.
pub fn unitary_generator(h: ComplexMatrix, hbar: f64) -> Result<UnitaryGenerator, DynamicsError> {
    check_hermitian(&h)?;
    if !(hbar > 0.0) {
        return Err(DynamicsError::InvalidParams(format!(
            "hbar must be positive, got {hbar}"
        )));
    }
    Ok(UnitaryGenerator {
        hamiltonian: Hamiltonian::Constant(hermitian_part(&h)),
        hbar,
    })
}

impl Generator for UnitaryGenerator {
    fn dim(&self) -> usize {
        match &self.hamiltonian {
            Hamiltonian::Constant(h) => h.nrows(),
            Hamiltonian::TimeDependent { dim, .. } => *dim,
        }
    }

    fn kind(&self) -> GeneratorKind {
        GeneratorKind::Unitary
    }

    fn apply(&self, t: f64, rho: &ComplexMatrix) -> Result<ComplexMatrix, DynamicsError> {
        let minus_i_over_hbar = Complex64::new(0.0, -1.0 / self.hbar);
        match &self.hamiltonian {
            Hamiltonian::Constant(h) => Ok(commutator(h, rho) * minus_i_over_hbar),
            Hamiltonian::TimeDependent { at, .. } => {
                let h = at(t);
                check_hermitian(&h)?;
                Ok(commutator(&h, rho) * minus_i_over_hbar)
            }
        }
    }
}

/// Time grid with the state and generator output at every grid point.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<DensityOperator>,
    /// `L(t_n, rho_n)` at every grid point.
    pub rates: Vec<ComplexMatrix>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn duration(&self) -> f64 {
        self.times.last().copied().unwrap_or(0.0)
    }

    pub fn initial(&self) -> &DensityOperator {
        &self.states[0]
    }

    pub fn last(&self) -> &DensityOperator {
        &self.states[self.states.len() - 1]
    }
}

/// A trajectory plus the result of re-running it at half the step size.
#[derive(Debug, Clone)]
pub struct Evolution {
    pub trajectory: Trajectory,
    /// Largest trace distance between the two runs on the shared grid.
    pub max_discrepancy: f64,
}

impl Evolution {
    pub fn converged(&self, tol: f64) -> bool {
        self.max_discrepancy <= tol
    }
}

fn validate_rate(t: f64, rate: &ComplexMatrix) -> Result<(), DynamicsError> {
    if rate.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(DynamicsError::NonFiniteState { t });
    }
    let scale = rate.iter().map(|z| z.norm()).fold(1.0, f64::max);
    let deviation = hermitian_deviation(rate).max(trace(rate).norm());
    if deviation > GENERATOR_TOL * scale {
        return Err(DynamicsError::GeneratorInvariant { t, deviation });
    }
    Ok(())
}

fn project(t: f64, m: ComplexMatrix) -> Result<DensityOperator, DynamicsError> {
    if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(DynamicsError::NonFiniteState { t });
    }
    DensityOperator::new(m).map_err(|source| match source {
        MatError::NonFinite => DynamicsError::NonFiniteState { t },
        source => DynamicsError::StateInvariantViolation { t, source },
    })
}

/// Single fixed-step RK4 run over `[0, tau]` with `steps` steps.
///
/// Every stored state is passed through [`DensityOperator::new`], which
/// clips eigenvalues in the `[-1e-12, 0)` window and fails beyond it.
pub fn integrate(
    generator: &dyn Generator,
    rho0: &DensityOperator,
    tau: f64,
    steps: usize,
) -> Result<Trajectory, DynamicsError> {
    if steps < 2 {
        return Err(DynamicsError::TooFewSteps { min: 2, got: steps });
    }
    if !(tau > 0.0) || !tau.is_finite() {
        return Err(DynamicsError::InvalidParams(format!(
            "tau must be positive, got {tau}"
        )));
    }
    if generator.dim() != rho0.dim() {
        return Err(DynamicsError::DimMismatch {
            generator: generator.dim(),
            state: rho0.dim(),
        });
    }
    let h = tau / steps as f64;
    let time = |n: usize| if n == steps { tau } else { n as f64 * h };

    let mut times = Vec::with_capacity(steps + 1);
    let mut states = Vec::with_capacity(steps + 1);
    let mut rates = Vec::with_capacity(steps + 1);

    let mut rho = rho0.clone();
    let mut k1 = generator.apply(0.0, rho.matrix())?;
    validate_rate(0.0, &k1)?;
    for n in 0..steps {
        let t = time(n);
        let t_next = time(n + 1);
        let dt = t_next - t;
        generator.check_step(t, t_next)?;

        let m = rho.matrix();
        let k2 = generator.apply(t + 0.5 * dt, &(m + &k1 * Complex64::from(0.5 * dt)))?;
        let k3 = generator.apply(t + 0.5 * dt, &(m + &k2 * Complex64::from(0.5 * dt)))?;
        let k4 = generator.apply(t_next, &(m + &k3 * Complex64::from(dt)))?;
        let increment =
            (&k1 + (&k2 + &k3) * Complex64::from(2.0) + &k4) * Complex64::from(dt / 6.0);
        let next = project(t_next, m + increment)?;

        times.push(t);
        states.push(rho);
        rates.push(k1);

        k1 = generator.apply(t_next, next.matrix())?;
        validate_rate(t_next, &k1)?;
        rho = next;
    }
    times.push(tau);
    states.push(rho);
    rates.push(k1);
    Ok(Trajectory {
        times,
        states,
        rates,
    })
}

/// [`integrate`] with `steps` steps, checked against a second run with
/// `2 * steps` steps.
pub fn evolve(
    generator: &dyn Generator,
    rho0: &DensityOperator,
    tau: f64,
    steps: usize,
) -> Result<Evolution, DynamicsError> {
    let trajectory = integrate(generator, rho0, tau, steps)?;
    let fine = integrate(generator, rho0, tau, 2 * steps)?;
    let mut max_discrepancy: f64 = 0.0;
    for (n, state) in trajectory.states.iter().enumerate() {
        let d =
            trace_distance(state, &fine.states[2 * n]).map_err(|_| DynamicsError::DimMismatch {
                generator: generator.dim(),
                state: state.dim(),
            })?;
        max_discrepancy = max_discrepancy.max(d);
    }
    Ok(Evolution {
        trajectory,
        max_discrepancy,
    })
}

/// Qubit frequency and Lorentzian environment of the damped Jaynes-Cummings model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DampedJcParams {
    pub omega0: f64,
    pub gamma0: f64,
    pub lambda: f64,
}

impl DampedJcParams {
    pub fn new(omega0: f64, gamma0: f64, lambda: f64) -> Result<Self, DynamicsError> {
        for (name, v) in [("omega0", omega0), ("gamma0", gamma0), ("lambda", lambda)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(DynamicsError::InvalidParams(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        Ok(Self {
            omega0,
            gamma0,
            lambda,
        })
    }

    /// `d^2 = lambda^2 - 2 gamma0 lambda`; negative in the oscillatory
    /// (non-Markovian) regime.
    pub fn discriminant(&self) -> f64 {
        self.lambda * self.lambda - 2.0 * self.gamma0 * self.lambda
    }

    pub fn is_markovian(&self) -> bool {
        self.discriminant() > 0.0
    }

    /// Zeros of the resonant amplitude `c_t` in `(0, horizon]`, ascending.
    ///
    /// With `delta = sqrt(2 gamma0 lambda - lambda^2)`, `c_t` vanishes where
    /// `tan(delta t / 2) = -delta / lambda`.
    pub fn amplitude_zeros(&self, horizon: f64) -> Vec<f64> {
        let d2 = self.discriminant();
        if d2 >= 0.0 {
            return Vec::new();
        }
        let delta = (-d2).sqrt();
        let first = std::f64::consts::PI - (delta / self.lambda).atan();
        (0..)
            .map(|k| 2.0 * (first + k as f64 * std::f64::consts::PI) / delta)
            .take_while(|&t| t <= horizon)
            .collect()
    }
}

/// `cosh(sqrt(x))` and `sinh(sqrt(x))/sqrt(x)` continued to `x < 0`, with
/// a power series around the removable singularity at `x = 0`.
fn even_hyperbolic(x: f64) -> (f64, f64) {
    if x.abs() < 0.5 {
        let mut c = 0.0;
        let mut s = 0.0;
        let mut term = 1.0; // x^k / (2k)!
        for k in 0..24 {
            c += term;
            let odd = term / (2 * k + 1) as f64; // x^k / (2k+1)!
            s += odd;
            if odd.abs() < 1e-18 {
                break;
            }
            term = odd * x / (2 * k + 2) as f64;
        }
        (c, s)
    } else if x > 0.0 {
        let r = x.sqrt();
        (r.cosh(), r.sinh() / r)
    } else {
        let r = (-x).sqrt();
        (r.cos(), r.sin() / r)
    }
}

/// Evaluates `c_t` and its derivative, analytically or from a table.
#[derive(Debug, Clone)]
pub enum AmplitudeSolution {
    Analytic(DampedJcParams),
    Tabulated(AmplitudeTable),
}

impl AmplitudeSolution {
    /// `(c_t, dc_t/dt)`.
    pub fn at(&self, t: f64) -> (Complex64, Complex64) {
        match self {
            Self::Analytic(p) => {
                // c_t = e^{-lambda t/2} [cosh(dt/2) + (lambda/d) sinh(dt/2)]
                let half_t = 0.5 * t;
                let (ch, sh) = even_hyperbolic(p.discriminant() * half_t * half_t);
                let decay = (-p.lambda * half_t).exp();
                let c = decay * (ch + p.lambda * half_t * sh);
                let cdot = -p.gamma0 * p.lambda * half_t * decay * sh;
                (Complex64::new(c, 0.0), Complex64::new(cdot, 0.0))
            }
            Self::Tabulated(table) => table.at(t),
        }
    }

    pub fn c(&self, t: f64) -> Complex64 {
        self.at(t).0
    }

    pub fn cdot(&self, t: f64) -> Complex64 {
        self.at(t).1
    }
}

/// RK4 samples of `(c, dc/dt)` on a uniform grid, with cubic Hermite
/// interpolation in between. Outside `[0, horizon]` evaluation yields NaN.
#[derive(Debug, Clone)]
pub struct AmplitudeTable {
    params: DampedJcParams,
    step: f64,
    c: Vec<Complex64>,
    cdot: Vec<Complex64>,
}

impl AmplitudeTable {
    fn second_derivative(&self, c: Complex64, cdot: Complex64) -> Complex64 {
        amplitude_acceleration(&self.params, c, cdot)
    }

    pub fn horizon(&self) -> f64 {
        self.step * (self.c.len() - 1) as f64
    }

    fn at(&self, t: f64) -> (Complex64, Complex64) {
        let nan = Complex64::new(f64::NAN, f64::NAN);
        if !(t >= 0.0) || t > self.horizon() * (1.0 + 1e-12) {
            return (nan, nan);
        }
        let n = ((t / self.step).floor() as usize).min(self.c.len() - 2);
        let s = (t - n as f64 * self.step) / self.step;
        let h = self.step;
        let (c0, c1) = (self.c[n], self.c[n + 1]);
        let (d0, d1) = (self.cdot[n], self.cdot[n + 1]);
        let (a0, a1) = (
            self.second_derivative(c0, d0),
            self.second_derivative(c1, d1),
        );
        (hermite(s, h, c0, d0, c1, d1), hermite(s, h, d0, a0, d1, a1))
    }
}

fn hermite(
    s: f64,
    h: f64,
    y0: Complex64,
    dy0: Complex64,
    y1: Complex64,
    dy1: Complex64,
) -> Complex64 {
    let s2 = s * s;
    let s3 = s2 * s;
    y0 * (2.0 * s3 - 3.0 * s2 + 1.0)
        + dy0 * (h * (s3 - 2.0 * s2 + s))
        + y1 * (-2.0 * s3 + 3.0 * s2)
        + dy1 * (h * (s3 - s2))
}

/// Differentiating the memory integral of the Lorentzian kernel
/// `(gamma0 lambda / 2) e^{-lambda |t-s|}` gives
/// `c'' = -lambda c' - (gamma0 lambda / 2) c`.
fn amplitude_acceleration(p: &DampedJcParams, c: Complex64, cdot: Complex64) -> Complex64 {
    -cdot * p.lambda - c * (0.5 * p.gamma0 * p.lambda)
}

/// Closed-form resonant amplitude.
pub fn jc_analytic_amplitude(params: DampedJcParams) -> AmplitudeSolution {
    AmplitudeSolution::Analytic(params)
}

/// Amplitude from RK4 integration of the second-order equation equivalent
/// to the Lorentzian integro-differential equation, `c(0) = 1`, `c'(0) = 0`.
///
/// The kernel exponent is taken as `i (omega - omega0)(t - s)`; a factor of
/// hbar in that exponent would not be dimensionless.
pub fn jc_numerical_amplitude(
    params: DampedJcParams,
    tau: f64,
    steps: usize,
) -> Result<AmplitudeSolution, DynamicsError> {
    if steps < 10 {
        return Err(DynamicsError::TooFewSteps {
            min: 10,
            got: steps,
        });
    }
    if !(tau > 0.0) || !tau.is_finite() {
        return Err(DynamicsError::InvalidParams(format!(
            "tau must be positive, got {tau}"
        )));
    }
    let h = tau / steps as f64;
    let f = |c: Complex64, v: Complex64| (v, amplitude_acceleration(&params, c, v));
    let mut c = Complex64::new(1.0, 0.0);
    let mut v = Complex64::new(0.0, 0.0);
    let mut cs = Vec::with_capacity(steps + 1);
    let mut vs = Vec::with_capacity(steps + 1);
    cs.push(c);
    vs.push(v);
    for n in 0..steps {
        let (k1c, k1v) = f(c, v);
        let (k2c, k2v) = f(c + k1c * (0.5 * h), v + k1v * (0.5 * h));
        let (k3c, k3v) = f(c + k2c * (0.5 * h), v + k2v * (0.5 * h));
        let (k4c, k4v) = f(c + k3c * h, v + k3v * h);
        c += (k1c + (k2c + k3c) * 2.0 + k4c) * (h / 6.0);
        v += (k1v + (k2v + k3v) * 2.0 + k4v) * (h / 6.0);
        if !(c.norm().is_finite() && v.norm().is_finite()) {
            return Err(DynamicsError::NonFiniteState {
                t: (n + 1) as f64 * h,
            });
        }
        cs.push(c);
        vs.push(v);
    }
    Ok(AmplitudeSolution::Tabulated(AmplitudeTable {
        params,
        step: h,
        c: cs,
        cdot: vs,
    }))
}

/// Decay rate and Lamb shift derived from an amplitude solution.
#[derive(Debug, Clone)]
pub struct JcRates {
    amplitude: AmplitudeSolution,
}

impl JcRates {
    pub fn amplitude(&self) -> &AmplitudeSolution {
        &self.amplitude
    }

    /// `(gamma_t, lambda_t) = (-2 Re(c'/c), -2 Im(c'/c))`.
    pub fn at(&self, t: f64) -> Result<(f64, f64), DynamicsError> {
        let (c, cdot) = self.amplitude.at(t);
        let modulus = c.norm();
        if !modulus.is_finite() {
            return Err(DynamicsError::NonFiniteState { t });
        }
        if modulus < AMPLITUDE_GUARD {
            return Err(DynamicsError::AmplitudeZero { t, modulus });
        }
        let ratio = cdot / c;
        Ok((-2.0 * ratio.re, -2.0 * ratio.im))
    }

    pub fn decay_rate(&self, t: f64) -> Result<f64, DynamicsError> {
        Ok(self.at(t)?.0)
    }

    pub fn lamb_shift(&self, t: f64) -> Result<f64, DynamicsError> {
        Ok(self.at(t)?.1)
    }
}

pub fn jc_rates(amplitude: AmplitudeSolution) -> JcRates {
    JcRates { amplitude }
}

/// Exact time-local master equation of the damped Jaynes-Cummings model:
///
/// `d rho/dt = -i [omega0 P_e, rho] - (i/2) [lambda_t P_e, rho]
///             + gamma_t (s- rho s+ - {P_e, rho}/2)`
///
/// with `P_e = s+ s-` and frequencies in units where `hbar` has been divided out.
#[derive(Debug, Clone)]
pub struct JcGenerator {
    params: DampedJcParams,
    rates: JcRates,
}

impl JcGenerator {
    pub fn with_amplitude(params: DampedJcParams, amplitude: AmplitudeSolution) -> Self {
        Self {
            params,
            rates: jc_rates(amplitude),
        }
    }

    pub fn params(&self) -> &DampedJcParams {
        &self.params
    }

    pub fn rates(&self) -> &JcRates {
        &self.rates
    }
}

/// Master-equation generator driven by the closed-form amplitude.
pub fn jc_generator(params: DampedJcParams) -> JcGenerator {
    JcGenerator::with_amplitude(params, jc_analytic_amplitude(params))
}

impl Generator for JcGenerator {
    fn dim(&self) -> usize {
        2
    }

    fn kind(&self) -> GeneratorKind {
        GeneratorKind::Dissipative
    }

    fn apply(&self, t: f64, rho: &ComplexMatrix) -> Result<ComplexMatrix, DynamicsError> {
        if rho.nrows() != 2 || rho.ncols() != 2 {
            return Err(DynamicsError::DimMismatch {
                generator: 2,
                state: rho.nrows(),
            });
        }
        let (gamma, shift) = self.rates.at(t)?;
        let omega = self.params.omega0 + 0.5 * shift;
        let excited = rho[(0, 0)];
        let coherence = rho[(0, 1)];
        // Coherent part: -i omega [P_e, rho]; dissipator: gamma (s- rho s+ - {P_e, rho}/2).
        let d_excited = -excited * gamma;
        let d_coherence = coherence * Complex64::new(-0.5 * gamma, -omega);
        Ok(ComplexMatrix::from_row_slice(
            2,
            2,
            &[d_excited, d_coherence, d_coherence.conj(), -d_excited],
        ))
    }

    /// Rejects steps across a zero of `c_t`, where `gamma_t` diverges. The
    /// resonant amplitude is real, so a zero shows up as a sign change.
    fn check_step(&self, t0: f64, t1: f64) -> Result<(), DynamicsError> {
        let samples = [t0, 0.5 * (t0 + t1), t1].map(|t| self.rates.amplitude().c(t));
        let guard_hit = samples.iter().any(|c| c.norm() < AMPLITUDE_GUARD)
            || samples.windows(2).any(|w| w[0].re * w[1].re < 0.0);
        if guard_hit {
            return Err(DynamicsError::AmplitudeGuard { t0, t1 });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::entropy::von_neumann_entropy;
    use crate::matcore::{random_density_operator_from, random_hermitian, sampling_rng};
    use std::f64::consts::PI;

    fn pauli_x() -> ComplexMatrix {
        let o = Complex64::new(0.0, 0.0);
        let l = Complex64::new(1.0, 0.0);
        ComplexMatrix::from_row_slice(2, 2, &[o, l, l, o])
    }

    fn rabi(omega: f64) -> UnitaryGenerator {
        unitary_generator(pauli_x() * Complex64::from(0.5 * omega), 1.0).unwrap()
    }

    #[test]
    fn zero_generator_is_stationary() {
        let rho = random_density_operator_from(3, &mut sampling_rng(1));
        let traj = integrate(&ZeroGenerator { dim: 3 }, &rho, 2.0, 10).unwrap();
        assert_eq!(traj.len(), 11);
        assert!(traj.states.iter().all(|s| s == &rho));
        assert_eq!(traj.times[10], 2.0);
    }

    #[test]
    fn rabi_pi_pulse_flips_the_qubit() {
        let omega = 1.3;
        let up = DensityOperator::basis_state(2, 0);
        let traj = integrate(&rabi(omega), &up, PI / omega, 1000).unwrap();
        let d = trace_distance(traj.last(), &DensityOperator::basis_state(2, 1)).unwrap();
        assert!(d < 1e-6, "distance {d}");
    }

    #[test]
    fn rk4_is_fourth_order() {
        // Endpoint error of the excited population against cos^2(omega t / 2).
        let omega: f64 = 2.0;
        let tau = 2.5;
        let up = DensityOperator::basis_state(2, 0);
        let exact = (0.5 * omega * tau).cos().powi(2);
        let err = |steps| {
            (integrate(&rabi(omega), &up, tau, steps)
                .unwrap()
                .last()
                .matrix()[(0, 0)]
                .re
                - exact)
                .abs()
        };
        let ratio = err(40) / err(80);
        assert!((ratio - 16.0).abs() < 1.5, "ratio {ratio}");
    }

    #[test]
    fn unitary_dynamics_conserve_purity_and_entropy() {
        let mut rng = sampling_rng(12);
        let h = random_hermitian(4, &mut rng);
        let rho = random_density_operator_from(4, &mut rng);
        let gen = unitary_generator(h, 1.0).unwrap();
        let traj = integrate(&gen, &rho, 3.0, 3000).unwrap();
        let p0 = rho.purity();
        let s0 = von_neumann_entropy(&rho);
        for s in &traj.states {
            assert!((s.purity() - p0).abs() < 1e-8);
            assert!((von_neumann_entropy(s) - s0).abs() < 1e-8);
        }
    }

    #[test]
    fn commuting_state_gives_zero_rate() {
        let h = crate::matcore::real_diagonal(&[0.0, 1.0, 3.0]);
        let rho = DensityOperator::diagonal(&[0.2, 0.3, 0.5]).unwrap();
        let gen = unitary_generator(h, 1.0).unwrap();
        let out = gen.apply(0.0, rho.matrix()).unwrap();
        assert!(out.iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn non_hermitian_hamiltonian_rejected() {
        let o = Complex64::new(0.0, 0.0);
        let l = Complex64::new(1.0, 0.0);
        let h = ComplexMatrix::from_row_slice(2, 2, &[o, l, o, o]);
        assert!(unitary_generator(h, 1.0).is_err());
    }

    #[test]
    fn too_few_steps_rejected() {
        let rho = DensityOperator::maximally_mixed(2);
        assert!(matches!(
            integrate(&ZeroGenerator { dim: 2 }, &rho, 1.0, 1),
            Err(DynamicsError::TooFewSteps { .. })
        ));
    }

    #[test]
    fn analytic_amplitude_initial_conditions() {
        for gamma0 in [0.1, 0.5, 5.0] {
            let amp = jc_analytic_amplitude(DampedJcParams::new(1.0, gamma0, 1.0).unwrap());
            let (c, cdot) = amp.at(0.0);
            assert_eq!(c, Complex64::new(1.0, 0.0));
            assert_eq!(cdot.norm(), 0.0);
        }
    }

    #[test]
    fn critical_damping_series_limit() {
        // gamma0 = lambda / 2 gives d = 0 and c_t = e^{-lambda t/2}(1 + lambda t/2).
        let p = DampedJcParams::new(1.0, 0.5, 1.0).unwrap();
        let amp = jc_analytic_amplitude(p);
        for t in [0.0f64, 0.3, 1.0, 4.0] {
            let expected = (-0.5 * t).exp() * (1.0 + 0.5 * t);
            assert!((amp.c(t).re - expected).abs() < 1e-15);
        }
    }

    #[test]
    fn amplitude_branches_join_smoothly() {
        // Crossing |d^2 t^2 / 4| = 0.5 switches from the series to closed forms.
        let p = DampedJcParams::new(1.0, 0.3, 1.0).unwrap();
        let amp = jc_analytic_amplitude(p);
        let t_switch = (0.5 / (p.discriminant() / 4.0)).sqrt();
        let below = amp.c(t_switch * (1.0 - 1e-12)).re;
        let above = amp.c(t_switch * (1.0 + 1e-12)).re;
        assert!((below - above).abs() < 1e-11);
    }

    #[test]
    fn decoupled_limit_keeps_amplitude_at_one() {
        let p = DampedJcParams::new(1.0, 1e-300, 1.0).unwrap();
        let num = jc_numerical_amplitude(p, 5.0, 100).unwrap();
        for t in [0.0, 1.0, 2.5, 5.0] {
            assert!((num.c(t).re - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn numerical_amplitude_rejects_bad_input() {
        let p = DampedJcParams::new(1.0, 0.3, 1.0).unwrap();
        assert!(jc_numerical_amplitude(p, 5.0, 5).is_err());
        let table = jc_numerical_amplitude(p, 5.0, 100).unwrap();
        assert!(table.c(6.0).re.is_nan());
    }

    #[test]
    fn rates_at_start_and_resonance() {
        let p = DampedJcParams::new(1.0, 0.25, 1.0).unwrap();
        let rates = jc_rates(jc_analytic_amplitude(p));
        assert_eq!(rates.decay_rate(0.0).unwrap(), 0.0);
        for t in [0.1, 1.0, 3.0] {
            assert_eq!(rates.lamb_shift(t).unwrap(), 0.0);
        }
    }

    #[test]
    fn rates_error_at_amplitude_zero() {
        let p = DampedJcParams::new(1.0, 5.0, 1.0).unwrap();
        let t0 = p.amplitude_zeros(5.0)[0];
        let rates = jc_rates(jc_analytic_amplitude(p));
        assert!(matches!(
            rates.at(t0),
            Err(DynamicsError::AmplitudeZero { .. })
        ));
    }

    #[test]
    fn ground_state_is_stationary() {
        let p = DampedJcParams::new(1.0, 2.0, 1.0).unwrap();
        let gen = jc_generator(p);
        let g = DensityOperator::basis_state(2, 1);
        for t in [0.0, 0.4, 1.0] {
            let out = gen.apply(t, g.matrix()).unwrap();
            assert!(out.iter().all(|z| z.norm() == 0.0));
        }
    }

    #[test]
    fn jc_output_is_traceless_hermitian() {
        let p = DampedJcParams::new(1.7, 0.8, 1.0).unwrap();
        let gen = jc_generator(p);
        let mut rng = sampling_rng(6);
        for k in 0..50 {
            let rho = random_density_operator_from(2, &mut rng);
            let out = gen.apply(0.05 * k as f64, rho.matrix()).unwrap();
            assert!(trace(&out).norm() < 1e-15);
            assert!(hermitian_deviation(&out) < 1e-15);
        }
    }

    #[test]
    fn jc_population_matches_amplitude_in_markovian_regime() {
        let p = DampedJcParams::new(1.0, 0.25, 1.0).unwrap();
        let amp = jc_analytic_amplitude(p);
        let traj = integrate(
            &jc_generator(p),
            &DensityOperator::basis_state(2, 0),
            5.0,
            5000,
        )
        .unwrap();
        for (t, s) in traj.times.iter().zip(&traj.states) {
            assert!((s.matrix()[(0, 0)].re - amp.c(*t).norm_sqr()).abs() < 1e-6);
        }
    }

    #[test]
    fn jc_step_across_amplitude_zero_is_rejected() {
        let p = DampedJcParams::new(1.0, 5.0, 1.0).unwrap();
        let first_zero = p.amplitude_zeros(5.0)[0];
        let err = integrate(
            &jc_generator(p),
            &DensityOperator::basis_state(2, 0),
            5.0,
            1000,
        )
        .unwrap_err();
        match err {
            DynamicsError::AmplitudeGuard { t0, t1 } => {
                assert!(t0 <= first_zero && first_zero <= t1)
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn evolve_reports_small_discrepancy() {
        let up = DensityOperator::basis_state(2, 0);
        let ev = evolve(&rabi(1.0), &up, PI, 500).unwrap();
        assert!(ev.converged(1e-9), "discrepancy {}", ev.max_discrepancy);
        assert!(ev.max_discrepancy > 0.0);
    }

    #[test]
    fn time_dependent_hamiltonian() {
        // H(t) = (omega(t)/2) sigma_x with pulse area pi rotates |e> to |g>.
        let gen =
            UnitaryGenerator::time_dependent(2, 1.0, |t| pauli_x() * Complex64::from(0.5 * PI * t));
        let traj = integrate(&gen, &DensityOperator::basis_state(2, 0), 2f64.sqrt(), 2000).unwrap();
        assert!(traj.last().matrix()[(1, 1)].re > 1.0 - 1e-9);
    }
}
