//! Dense complex Hermitian matrix algebra.
//!
//! Everything downstream works on small (d <= ~64) dense matrices stored as
//! [`ComplexMatrix`]. The Hermitian eigensolver is closed-form for 2x2 and
//! nalgebra's symmetric tridiagonal QR iteration otherwise; the rest of the
//! module (trace norm, matrix absolute value, density operators and their
//! sampling) is built on top.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use thiserror::Error;

pub type ComplexMatrix = DMatrix<Complex64>;

/// Entrywise tolerance on `max |A - A^dagger|` for a matrix to count as Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-10;
/// Allowed deviation of a density operator's trace from one.
pub const TRACE_TOL: f64 = 1e-10;
/// Eigenvalues in `[-CLIP_WINDOW, 0)` are clipped to zero; anything below is rejected.
pub const CLIP_WINDOW: f64 = 1e-12;

const EIG_EPS: f64 = 1e-15;
const EIG_MAX_ITER: usize = 10_000;

/// Seeded generator used for every random sample in this crate (ChaCha8).
pub type SamplingRng = ChaCha8Rng;

pub fn sampling_rng(seed: u64) -> SamplingRng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MatError {
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix has non-finite entries")]
    NonFinite,
    #[error("matrix is not Hermitian (max |A - A^dagger| = {deviation:e})")]
    NotHermitian { deviation: f64 },
    #[error("Hermitian eigensolver did not converge")]
    NoConvergence,
    #[error("trace {trace} differs from 1")]
    TraceNotUnit { trace: f64 },
    #[error("eigenvalue {value:e} is below the clipping window")]
    NegativeEigenvalue { value: f64 },
    #[error("dimension mismatch: {left} vs {right}")]
    DimMismatch { left: usize, right: usize },
    #[error("basis is not unitary (max |V^dagger V - I| = {deviation:e})")]
    NotUnitary { deviation: f64 },
}

fn check_square(a: &ComplexMatrix) -> Result<(), MatError> {
    if a.nrows() != a.ncols() {
        return Err(MatError::NotSquare {
            rows: a.nrows(),
            cols: a.ncols(),
        });
    }
    if a.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(MatError::NonFinite);
    }
    Ok(())
}

/// `max_ij |A_ij - conj(A_ji)|`.
pub fn hermitian_deviation(a: &ComplexMatrix) -> f64 {
    let n = a.nrows();
    let mut dev: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            dev = dev.max((a[(i, j)] - a[(j, i)].conj()).norm());
        }
    }
    dev
}

pub fn check_hermitian(a: &ComplexMatrix) -> Result<(), MatError> {
    check_square(a)?;
    let deviation = hermitian_deviation(a);
    if deviation > HERMITIAN_TOL {
        return Err(MatError::NotHermitian { deviation });
    }
    Ok(())
}

/// `(A + A^dagger) / 2`
pub fn hermitian_part(a: &ComplexMatrix) -> ComplexMatrix {
    (a + a.adjoint()).scale(0.5)
}

/// `max_ij |V^dagger V - I|`.
pub fn unitarity_deviation(v: &ComplexMatrix) -> f64 {
    let g = v.adjoint() * v;
    let n = g.nrows();
    let mut dev: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let target = if i == j {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            };
            dev = dev.max((g[(i, j)] - target).norm());
        }
    }
    dev
}

pub fn commutator(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a * b - b * a
}

pub fn anticommutator(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a * b + b * a
}

pub fn trace(a: &ComplexMatrix) -> Complex64 {
    a.diagonal().iter().sum()
}

pub fn real_diagonal(values: &[f64]) -> ComplexMatrix {
    ComplexMatrix::from_diagonal(&DVector::from_iterator(
        values.len(),
        values.iter().map(|&v| Complex64::new(v, 0.0)),
    ))
}

/// Spectral decomposition `A = V diag(w) V^dagger` with ascending `w`.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub eigenvalues: Vec<f64>,
    /// Eigenvectors as columns, in the order of `eigenvalues`.
    pub eigenvectors: ComplexMatrix,
}

impl EigenDecomposition {
    /// `V diag(f(w)) V^dagger`
    pub fn map_spectrum(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let mut scaled = self.eigenvectors.clone();
        for (j, &w) in self.eigenvalues.iter().enumerate() {
            let fw = f(w);
            scaled.column_mut(j).iter_mut().for_each(|z| *z *= fw);
        }
        scaled * self.eigenvectors.adjoint()
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        self.map_spectrum(|w| w)
    }
}

pub fn eig_hermitian(a: &ComplexMatrix) -> Result<EigenDecomposition, MatError> {
    check_hermitian(a)?;
    eig_of_hermitian_part(a)
}

fn eig_of_hermitian_part(a: &ComplexMatrix) -> Result<EigenDecomposition, MatError> {
    if a.nrows() == 2 {
        return Ok(eig_hermitian_2x2(a));
    }
    let sym = hermitian_part(a);
    let eig = sym
        .try_symmetric_eigen(EIG_EPS, EIG_MAX_ITER)
        .ok_or(MatError::NoConvergence)?;
    let n = a.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let eigenvalues = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let eigenvectors = ComplexMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    Ok(EigenDecomposition {
        eigenvalues,
        eigenvectors,
    })
}

fn eigenvalues_2x2(a: &ComplexMatrix) -> (f64, f64) {
    let (p, q) = (a[(0, 0)].re, a[(1, 1)].re);
    let b = 0.5 * (a[(0, 1)] + a[(1, 0)].conj());
    let mean = 0.5 * (p + q);
    let r = (0.5 * (p - q)).hypot(b.norm());
    (mean - r, mean + r)
}

fn eig_hermitian_2x2(a: &ComplexMatrix) -> EigenDecomposition {
    let (lo, hi) = eigenvalues_2x2(a);
    let (p, q) = (a[(0, 0)].re, a[(1, 1)].re);
    let b = 0.5 * (a[(0, 1)] + a[(1, 0)].conj());
    let zero = Complex64::new(0.0, 0.0);
    let vector = |w: f64| {
        // Two null vectors of A - w; take the better conditioned one.
        let u = [b, Complex64::new(w - p, 0.0)];
        let v = [Complex64::new(w - q, 0.0), b.conj()];
        let norm = |x: &[Complex64; 2]| x[0].norm().hypot(x[1].norm());
        let (x, n) = if norm(&u) >= norm(&v) {
            (u, norm(&u))
        } else {
            (v, norm(&v))
        };
        (n > 0.0).then(|| [x[0] / n, x[1] / n])
    };
    let eigenvectors = match (hi > lo).then(|| vector(lo)).flatten() {
        Some([x0, x1]) => ComplexMatrix::from_row_slice(2, 2, &[x0, -x1.conj(), x1, x0.conj()]),
        None => ComplexMatrix::from_row_slice(
            2,
            2,
            &[
                Complex64::new(1.0, 0.0),
                zero,
                zero,
                Complex64::new(1.0, 0.0),
            ],
        ),
    };
    EigenDecomposition {
        eigenvalues: vec![lo, hi],
        eigenvectors,
    }
}

/// Ascending eigenvalues only; skips accumulating eigenvectors.
pub fn eigenvalues_hermitian(a: &ComplexMatrix) -> Result<Vec<f64>, MatError> {
    check_hermitian(a)?;
    if a.nrows() == 2 {
        let (lo, hi) = eigenvalues_2x2(a);
        return Ok(vec![lo, hi]);
    }
    let mut w: Vec<f64> = hermitian_part(a)
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .collect();
    if w.iter().any(|x| !x.is_finite()) {
        return Err(MatError::NoConvergence);
    }
    w.sort_by(f64::total_cmp);
    Ok(w)
}

/// Schatten 1-norm `tr|A|` of a Hermitian matrix.
pub fn trace_norm(a: &ComplexMatrix) -> Result<f64, MatError> {
    Ok(eigenvalues_hermitian(a)?.iter().map(|w| w.abs()).sum())
}

/// `|A| = sqrt(A^dagger A)`, computed spectrally for Hermitian `A`.
pub fn matrix_abs(a: &ComplexMatrix) -> Result<ComplexMatrix, MatError> {
    Ok(eig_hermitian(a)?.map_spectrum(f64::abs))
}

/// A validated quantum state: Hermitian, unit trace, positive semidefinite.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    matrix: ComplexMatrix,
}

impl DensityOperator {
    /// Validates `matrix`. Eigenvalues inside the clipping window are set
    /// to zero and the result is renormalized.
    pub fn new(matrix: ComplexMatrix) -> Result<Self, MatError> {
        check_hermitian(&matrix)?;
        let tr = trace(&matrix).re;
        if (tr - 1.0).abs() > TRACE_TOL {
            return Err(MatError::TraceNotUnit { trace: tr });
        }
        let matrix = hermitian_part(&matrix);
        let eig = eig_of_hermitian_part(&matrix)?;
        let min = eig.eigenvalues[0];
        if min < -CLIP_WINDOW {
            return Err(MatError::NegativeEigenvalue { value: min });
        }
        if min >= 0.0 {
            return Ok(Self { matrix });
        }
        let clipped: Vec<f64> = eig.eigenvalues.iter().map(|&w| w.max(0.0)).collect();
        let total: f64 = clipped.iter().sum();
        let rebuilt = EigenDecomposition {
            eigenvalues: clipped,
            eigenvectors: eig.eigenvectors,
        }
        .map_spectrum(|w| w / total);
        Ok(Self {
            matrix: hermitian_part(&rebuilt),
        })
    }

    /// `|psi><psi|` for a (not necessarily normalized) vector.
    pub fn pure(psi: &DVector<Complex64>) -> Result<Self, MatError> {
        let norm = psi.norm();
        let v = psi.unscale(norm);
        Self::new(&v * v.adjoint())
    }

    /// Projector onto the `k`-th computational basis vector.
    pub fn basis_state(dim: usize, k: usize) -> Self {
        let mut m = ComplexMatrix::zeros(dim, dim);
        m[(k, k)] = Complex64::new(1.0, 0.0);
        Self { matrix: m }
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self {
            matrix: ComplexMatrix::identity(dim, dim).unscale(dim as f64),
        }
    }

    pub fn diagonal(probabilities: &[f64]) -> Result<Self, MatError> {
        Self::new(real_diagonal(probabilities))
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        // Validated on construction, so the eigensolver input is Hermitian.
        eigenvalues_hermitian(&self.matrix).expect("density operator is Hermitian")
    }

    pub fn purity(&self) -> f64 {
        trace(&(&self.matrix * &self.matrix)).re
    }

    /// `U rho U^dagger`
    pub fn conjugate_by(&self, u: &ComplexMatrix) -> Result<Self, MatError> {
        if u.nrows() != self.dim() {
            return Err(MatError::DimMismatch {
                left: u.nrows(),
                right: self.dim(),
            });
        }
        Self::new(u * &self.matrix * u.adjoint())
    }

    /// `tr(rho A)`
    pub fn expectation(&self, a: &ComplexMatrix) -> Complex64 {
        trace(&(&self.matrix * a))
    }
}

fn complex_normal(rng: &mut SamplingRng) -> Complex64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re, im)
}

/// `dim x dim` matrix of i.i.d. standard complex normal entries.
pub fn ginibre(dim: usize, rng: &mut SamplingRng) -> ComplexMatrix {
    ComplexMatrix::from_fn(dim, dim, |_, _| complex_normal(rng))
}

/// Ginibre state `G G^dagger / tr(G G^dagger)` drawn from `rng`.
pub fn random_density_operator_from(dim: usize, rng: &mut SamplingRng) -> DensityOperator {
    assert!(dim >= 1, "dimension must be positive");
    let g = ginibre(dim, rng);
    let gg = &g * g.adjoint();
    let tr = trace(&gg).re;
    DensityOperator::new(hermitian_part(&gg.unscale(tr))).expect("Ginibre product is a valid state")
}

/// Deterministic Ginibre state for a given seed.
pub fn random_density_operator(dim: usize, seed: u64) -> DensityOperator {
    random_density_operator_from(dim, &mut sampling_rng(seed))
}

/// GUE-like Hermitian matrix `(G + G^dagger) / 2`.
pub fn random_hermitian(dim: usize, rng: &mut SamplingRng) -> ComplexMatrix {
    hermitian_part(&ginibre(dim, rng))
}

/// Haar-random unitary from the QR decomposition of a Ginibre matrix,
/// with the phases of `R`'s diagonal absorbed into `Q`.
pub fn random_unitary(dim: usize, rng: &mut SamplingRng) -> ComplexMatrix {
    let qr = ginibre(dim, rng).qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..dim {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 {
            d / d.norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        q.column_mut(j).iter_mut().for_each(|z| *z *= phase);
    }
    q
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn max_abs(a: &ComplexMatrix) -> f64 {
        a.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    #[test]
    fn eig_of_diagonal_is_sorted() {
        let e = eig_hermitian(&real_diagonal(&[3.0, 1.0])).unwrap();
        assert_eq!(e.eigenvalues, vec![1.0, 3.0]);
        assert!((e.eigenvectors[(1, 0)].norm() - 1.0).abs() < 1e-12);
        assert!((e.eigenvectors[(0, 1)].norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn eig_of_pauli_x() {
        let x = ComplexMatrix::from_row_slice(2, 2, &[c(0.0), c(1.0), c(1.0), c(0.0)]);
        let e = eig_hermitian(&x).unwrap();
        assert!((e.eigenvalues[0] + 1.0).abs() < 1e-14);
        assert!((e.eigenvalues[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn eig_reconstructs_random_hermitian() {
        let mut rng = sampling_rng(7);
        let a = random_hermitian(6, &mut rng);
        let e = eig_hermitian(&a).unwrap();
        let err = max_abs(&(e.reconstruct() - &a));
        assert!(err <= 1e-9 * max_abs(&a), "reconstruction error {err}");
        assert!(unitarity_deviation(&e.eigenvectors) < 1e-9);
        assert!(e.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn eig_2x2_agrees_with_general_solver() {
        let mut rng = sampling_rng(8);
        for k in 0..200 {
            let mut a = random_hermitian(2, &mut rng);
            if k % 4 == 0 {
                a[(0, 1)] *= 1e-13;
                a[(1, 0)] *= 1e-13;
            }
            let e = eig_hermitian(&a).unwrap();
            let reference = hermitian_part(&a).symmetric_eigenvalues();
            let mut reference: Vec<f64> = reference.iter().copied().collect();
            reference.sort_by(f64::total_cmp);
            for (x, y) in e.eigenvalues.iter().zip(&reference) {
                assert!((x - y).abs() < 1e-12 * max_abs(&a).max(1.0));
            }
            assert!(max_abs(&(e.reconstruct() - &a)) < 1e-12 * max_abs(&a).max(1.0));
            assert!(unitarity_deviation(&e.eigenvectors) < 1e-12);
        }
        let degenerate = eig_hermitian(&real_diagonal(&[0.5, 0.5])).unwrap();
        assert_eq!(degenerate.eigenvalues, vec![0.5, 0.5]);
    }

    #[test]
    fn eig_rejects_non_hermitian() {
        let a = ComplexMatrix::from_row_slice(2, 2, &[c(0.0), c(1.0), c(0.0), c(0.0)]);
        assert!(matches!(
            eig_hermitian(&a),
            Err(MatError::NotHermitian { .. })
        ));
    }

    #[test]
    fn trace_norm_examples() {
        assert_eq!(trace_norm(&ComplexMatrix::zeros(3, 3)).unwrap(), 0.0);
        assert!((trace_norm(&real_diagonal(&[0.5, -0.5])).unwrap() - 1.0).abs() < 1e-15);
        let diff = DensityOperator::basis_state(2, 0).into_matrix()
            - DensityOperator::basis_state(2, 1).into_matrix();
        assert!((trace_norm(&diff).unwrap() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn matrix_abs_examples() {
        let abs = matrix_abs(&real_diagonal(&[-2.0, 3.0])).unwrap();
        assert!(max_abs(&(abs - real_diagonal(&[2.0, 3.0]))) < 1e-14);

        let rho = random_density_operator(5, 3);
        let abs = matrix_abs(rho.matrix()).unwrap();
        assert!(max_abs(&(abs - rho.matrix())) < 1e-10);

        let a = random_hermitian(5, &mut sampling_rng(4));
        let abs = matrix_abs(&a).unwrap();
        assert!(max_abs(&(&abs * &abs - &a * &a)) < 1e-9);
        assert!(eigenvalues_hermitian(&abs).unwrap()[0] >= -1e-12);
    }

    #[test]
    fn scalar_state_for_dim_one() {
        let rho = random_density_operator(1, 99);
        assert!((rho.matrix()[(0, 0)] - c(1.0)).norm() < 1e-15);
    }

    #[test]
    fn sampling_is_deterministic() {
        assert_eq!(
            random_density_operator(4, 11),
            random_density_operator(4, 11)
        );
        assert_ne!(
            random_density_operator(4, 11),
            random_density_operator(4, 12)
        );
    }

    #[test]
    fn sampled_states_satisfy_invariants() {
        let mut rng = sampling_rng(2024);
        for _ in 0..1000 {
            let rho = random_density_operator_from(4, &mut rng);
            assert!(hermitian_deviation(rho.matrix()) <= HERMITIAN_TOL);
            assert!((trace(rho.matrix()).re - 1.0).abs() <= TRACE_TOL);
            let w = rho.eigenvalues();
            assert!(w[0] >= 0.0);
            assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn clipping_window() {
        let rho = DensityOperator::diagonal(&[1.0 + 5e-13, -5e-13]).unwrap();
        assert!(rho.eigenvalues()[0] >= 0.0);
        assert!((trace(rho.matrix()).re - 1.0).abs() < 1e-15);
        assert!(matches!(
            DensityOperator::diagonal(&[1.0 + 1e-9, -1e-9]),
            Err(MatError::NegativeEigenvalue { .. })
        ));
        assert!(matches!(
            DensityOperator::diagonal(&[0.5, 0.4]),
            Err(MatError::TraceNotUnit { .. })
        ));
    }

    #[test]
    fn random_unitary_is_unitary() {
        let u = random_unitary(5, &mut sampling_rng(1));
        assert!(unitarity_deviation(&u) < 1e-12);
    }
}
