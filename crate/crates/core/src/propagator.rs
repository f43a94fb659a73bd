//! Time-ordered evolution with the exponential midpoint rule
//! `U(t+h, t) ≈ exp(-i H(t + h/2) h)`.
//!
//! Each step is the exact exponential of a Hermitian matrix, so unitarity
//! holds to roundoff; the global error is second order in `h`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::basis::{QuantumState, SectorBasis};
use crate::error::{JunctionError, Result};
use crate::hamiltonian::HamiltonianBuilder;
use crate::linalg::{max_abs_diff, unitarity_error, SymmetricExp};
use crate::model::JunctionModel;

pub const DEFAULT_STEPS_PER_PERIOD: usize = 2048;

/// Upper end of the step-count search in [`Propagator::convergence_probe`].
pub const MAX_PROBE_STEPS: usize = 1 << 18;

#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryMatrix {
    matrix: DMatrix<Complex64>,
}

impl UnitaryMatrix {
    pub fn identity(dim: usize) -> Self {
        UnitaryMatrix { matrix: DMatrix::identity(dim, dim) }
    }

    /// Wraps `matrix` after checking `max |U†U - I| < tol`.
    pub fn new(matrix: DMatrix<Complex64>, tol: f64) -> Result<Self> {
        let err = unitarity_error(&matrix);
        if !matrix.is_square() || !(err < tol) {
            return Err(JunctionError::NonUnitary(err));
        }
        Ok(UnitaryMatrix { matrix })
    }

    pub(crate) fn from_product(matrix: DMatrix<Complex64>) -> Self {
        UnitaryMatrix { matrix }
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn unitarity_error(&self) -> f64 {
        unitarity_error(&self.matrix)
    }

    /// `self · earlier`, i.e. `earlier` acts first.
    pub fn after(&self, earlier: &UnitaryMatrix) -> UnitaryMatrix {
        UnitaryMatrix { matrix: &self.matrix * &earlier.matrix }
    }
}

/// One-period propagator `F = U(T, 0)`.
#[derive(Debug, Clone)]
pub struct FloquetOperator {
    pub unitary: UnitaryMatrix,
    pub period: f64,
    pub steps: usize,
}

impl FloquetOperator {
    pub fn angular_frequency(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.period
    }
}

/// States sampled along one trajectory.
#[derive(Debug, Clone)]
pub struct StateTrajectory {
    pub times: Vec<f64>,
    pub states: Vec<QuantumState>,
    /// Midpoint steps taken in total.
    pub steps: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceReport {
    /// Smallest power of two `k` with `max |F_k - F_2k| < tol`.
    pub steps_per_period: usize,
    pub difference: f64,
    /// `log2(d_{k/2} / d_k)` from the last two differences.
    pub observed_order: Option<f64>,
    /// `(k, max |F_k - F_2k|)` for every `k` tried.
    pub history: Vec<(usize, f64)>,
}

pub struct Propagator<'a> {
    builder: HamiltonianBuilder<'a>,
}

impl<'a> Propagator<'a> {
    pub fn new(model: &'a JunctionModel, basis: &'a SectorBasis) -> Self {
        Propagator { builder: HamiltonianBuilder::new(model, basis) }
    }

    pub fn model(&self) -> &JunctionModel {
        self.builder.model()
    }

    pub fn basis(&self) -> &SectorBasis {
        self.builder.basis()
    }

    fn midpoint(&self, start: f64, h: f64) -> SymmetricExp {
        SymmetricExp::new(&self.builder.at(start + 0.5 * h).matrix)
    }

    /// `exp(-i H(start + h/2) h)`.
    pub fn step_unitary(&self, start: f64, h: f64) -> DMatrix<Complex64> {
        self.midpoint(start, h).unitary(h)
    }

    /// `U(end, start)` from `steps` equal midpoint steps.
    pub fn evolve_unitary(&self, start: f64, end: f64, steps: usize) -> Result<UnitaryMatrix> {
        let h = (end - start) / steps.max(1) as f64;
        if steps == 0 || !(h > 0.0 && h.is_finite()) {
            return Err(JunctionError::NonPositiveStep(h));
        }
        let mut u = DMatrix::<Complex64>::identity(self.builder.dim(), self.builder.dim());
        for k in 0..steps {
            u = self.step_unitary(start + k as f64 * h, h) * u;
        }
        Ok(UnitaryMatrix::from_product(u))
    }

    pub fn floquet_operator(&self, steps_per_period: usize) -> Result<FloquetOperator> {
        let period = self.model().period();
        let unitary = self.evolve_unitary(0.0, period, steps_per_period)?;
        Ok(FloquetOperator { unitary, period, steps: steps_per_period })
    }

    /// Evolves `initial` from `t = 0` and records it at each sample time.
    ///
    /// Each interval between consecutive samples is split into
    /// `ceil(Δt / step)` equal steps, so samples are hit exactly and no step
    /// is longer than `step`.
    pub fn evolve_state(&self, initial: &QuantumState, samples: &[f64], step: f64) -> Result<StateTrajectory> {
        if !(step > 0.0 && step.is_finite()) {
            return Err(JunctionError::NonPositiveStep(step));
        }
        initial.check_basis(self.basis())?;
        if samples.first().is_some_and(|&t| t < 0.0) || samples.windows(2).any(|w| w[1] < w[0]) {
            return Err(JunctionError::UnorderedSamples);
        }
        let mut psi = initial.amplitudes.clone();
        let mut now = 0.0;
        let mut steps = 0;
        let mut states = Vec::with_capacity(samples.len());
        for &target in samples {
            let span = target - now;
            if span > 0.0 {
                let n = ((span / step) * (1.0 - 1e-12)).ceil().max(1.0) as usize;
                let h = span / n as f64;
                for k in 0..n {
                    psi = self.midpoint(now + k as f64 * h, h).apply(h, &psi);
                }
                steps += n;
                now = target;
            }
            states.push(QuantumState { amplitudes: psi.clone(), tag: initial.tag });
        }
        Ok(StateTrajectory { times: samples.to_vec(), states, steps })
    }

    /// Doubles the step count from 1 until two successive Floquet operators
    /// agree to `tol` in max norm.
    pub fn convergence_probe(&self, tol: f64) -> Result<ConvergenceReport> {
        if !(tol > 0.0) {
            return Err(JunctionError::InvalidTolerance(tol));
        }
        let mut history: Vec<(usize, f64)> = Vec::new();
        let mut steps = 1;
        let mut coarse = self.floquet_operator(steps)?;
        while steps <= MAX_PROBE_STEPS {
            let fine = self.floquet_operator(2 * steps)?;
            let difference = max_abs_diff(coarse.unitary.matrix(), fine.unitary.matrix());
            let previous = history.last().map(|&(_, d)| d);
            history.push((steps, difference));
            let observed_order = previous.map(|p| (p / difference).log2());
            if difference < tol {
                return Ok(ConvergenceReport { steps_per_period: steps, difference, observed_order, history });
            }
            // below ~1e-9 a difference that stops shrinking is roundoff
            if let Some(p) = previous {
                if difference < 1e-9 && difference > 0.9 * p {
                    return Err(JunctionError::NotConverged { steps, difference, tolerance: tol });
                }
            }
            coarse = fine;
            steps *= 2;
        }
        let difference = history.last().map_or(f64::NAN, |&(_, d)| d);
        Err(JunctionError::NotConverged { steps: steps / 2, difference, tolerance: tol })
    }
}

pub fn evolve_state(
    model: &JunctionModel,
    basis: &SectorBasis,
    initial: &QuantumState,
    samples: &[f64],
    step: f64,
) -> Result<StateTrajectory> {
    Propagator::new(model, basis).evolve_state(initial, samples, step)
}

pub fn floquet_operator(model: &JunctionModel, basis: &SectorBasis, steps_per_period: usize) -> Result<FloquetOperator> {
    Propagator::new(model, basis).floquet_operator(steps_per_period)
}

pub fn convergence_probe(model: &JunctionModel, basis: &SectorBasis, tol: f64) -> Result<ConvergenceReport> {
    Propagator::new(model, basis).convergence_probe(tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{units, ChainSpec, DriveSpec, PotentialProfile, PotentialSpec};
    use nalgebra::{DVector, SymmetricEigen};

    const J: f64 = 11.5 * units::MHZ_TO_ANGULAR;

    fn static_chain(n: usize, coupling: f64, offsets: Vec<f64>) -> JunctionModel {
        let chain = ChainSpec::uniform(n, coupling, 0.0, 1).unwrap();
        let mut drive = DriveSpec::cosine(n, 0.0, 0.0, units::mhz_to_angular(19.67)).unwrap();
        drive.spatial_profile = vec![0.0; n];
        let potential = PotentialSpec { static_offsets: offsets, rotating_frame: 0.0 };
        JunctionModel::new(chain, drive, potential).unwrap()
    }

    fn paper_model() -> JunctionModel {
        let chain = ChainSpec::uniform(12, J, units::mhz_to_angular(-250.0), 2).unwrap();
        let drive = DriveSpec::cosine(12, 3.0 * J, 3.0 * J, units::mhz_to_angular(19.67)).unwrap();
        let potential = PotentialSpec::build(&PotentialProfile::Flat, &drive, 0.0, None).unwrap();
        JunctionModel::new(chain, drive, potential).unwrap()
    }

    fn population(state: &QuantumState, index: usize) -> f64 {
        state.amplitudes[index].norm_sqr()
    }

    #[test]
    fn two_site_rabi() {
        let model = static_chain(2, J, vec![0.0, 0.0]);
        let basis = SectorBasis::new(2, 1, 1).unwrap();
        let psi = basis.fock_state(1).unwrap();
        let samples: Vec<f64> = (0..=40).map(|k| k as f64 * 3.7).collect();
        let traj = evolve_state(&model, &basis, &psi, &samples, 0.5).unwrap();
        for (t, s) in traj.times.iter().zip(&traj.states) {
            assert!((population(s, 1) - (J * t).sin().powi(2)).abs() < 1e-12);
        }
    }

    #[test]
    fn no_hopping_freezes_populations() {
        let model = static_chain(4, 0.0, vec![0.1, -0.3, 0.7, 0.0]);
        let basis = SectorBasis::new(4, 1, 1).unwrap();
        let psi = QuantumState::new(&basis, DVector::from_element(4, Complex64::new(0.5, 0.0))).unwrap();
        let traj = evolve_state(&model, &basis, &psi, &[0.0, 10.0, 20.0], 0.3).unwrap();
        for s in &traj.states {
            for i in 0..4 {
                assert!((population(s, i) - 0.25).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn three_site_chain_matches_diagonalization() {
        let model = static_chain(3, J, vec![0.0; 3]);
        let basis = SectorBasis::new(3, 1, 1).unwrap();
        let t = std::f64::consts::PI / 2f64.sqrt() / J;
        let traj = evolve_state(&model, &basis, &basis.fock_state(1).unwrap(), &[t], 0.2).unwrap();
        let h = DMatrix::from_row_slice(3, 3, &[0.0, J, 0.0, J, 0.0, J, 0.0, J, 0.0]);
        let eig = SymmetricEigen::new(h);
        for site in 0..3 {
            let amp: Complex64 = (0..3)
                .map(|k| {
                    eig.eigenvectors[(site, k)]
                        * eig.eigenvectors[(0, k)]
                        * Complex64::from_polar(1.0, -eig.eigenvalues[k] * t)
                })
                .sum();
            assert!((amp.norm_sqr() - population(&traj.states[0], site)).abs() < 1e-8);
        }
    }

    #[test]
    fn bad_inputs() {
        let model = paper_model();
        let basis = SectorBasis::new(12, 1, 2).unwrap();
        let psi = basis.fock_state(3).unwrap();
        let p = Propagator::new(&model, &basis);
        assert!(matches!(p.evolve_state(&psi, &[1.0], 0.0), Err(JunctionError::NonPositiveStep(_))));
        assert!(matches!(p.evolve_state(&psi, &[2.0, 1.0], 0.1), Err(JunctionError::UnorderedSamples)));
        assert!(matches!(p.convergence_probe(0.0), Err(JunctionError::InvalidTolerance(_))));
        let other = SectorBasis::new(12, 1, 1).unwrap();
        assert!(p.evolve_state(&other.fock_state(3).unwrap(), &[1.0], 0.1).is_err());
    }

    #[test]
    fn floquet_unitarity_and_period() {
        let model = paper_model();
        let basis = SectorBasis::new(12, 1, 2).unwrap();
        let f = floquet_operator(&model, &basis, DEFAULT_STEPS_PER_PERIOD).unwrap();
        assert!((f.period - 50.84).abs() < 0.01);
        assert!(f.unitary.unitarity_error() < 1e-10);
    }

    #[test]
    fn composition() {
        let model = paper_model();
        let basis = SectorBasis::new(12, 1, 2).unwrap();
        let p = Propagator::new(&model, &basis);
        let h = 0.25;
        let first = p.evolve_unitary(0.0, 40.0 * h, 40).unwrap();
        let second = p.evolve_unitary(40.0 * h, 100.0 * h, 60).unwrap();
        let whole = p.evolve_unitary(0.0, 100.0 * h, 100).unwrap();
        assert!(max_abs_diff(second.after(&first).matrix(), whole.matrix()) < 1e-9);
    }

    #[test]
    fn time_reversal_returns_initial_state() {
        let model = paper_model();
        let basis = SectorBasis::new(12, 2, 2).unwrap();
        let p = Propagator::new(&model, &basis);
        let mut occupation = vec![0u8; 12];
        occupation[2] = 1;
        occupation[8] = 1;
        let psi0 = basis.basis_state(&occupation).unwrap().amplitudes;
        let h = model.period() / 64.0;
        let mut psi = psi0.clone();
        for k in 0..150 {
            psi = p.step_unitary(k as f64 * h, h) * psi;
        }
        for k in (0..150).rev() {
            // H is real, so the inverse step exp(+iHh) is the complex conjugate
            psi = p.step_unitary(k as f64 * h, h).map(|z| z.conj()) * psi;
        }
        assert!((psi - psi0).norm() < 1e-8);
    }

    #[test]
    fn static_model_converges_immediately() {
        let mut model = paper_model();
        model.drive.ac_amplitude = 0.0;
        let basis = SectorBasis::new(12, 1, 2).unwrap();
        let report = convergence_probe(&model, &basis, 1e-10).unwrap();
        assert_eq!(report.steps_per_period, 1);
    }

    #[test]
    fn norm_is_conserved_along_driven_trajectory() {
        let model = paper_model();
        let basis = SectorBasis::new(12, 2, 2).unwrap();
        let mut occupation = vec![0u8; 12];
        occupation[2] = 2;
        let psi = basis.basis_state(&occupation).unwrap();
        let samples: Vec<f64> = (0..=150).map(|t| t as f64).collect();
        let traj = evolve_state(&model, &basis, &psi, &samples, model.period() / 256.0).unwrap();
        for s in &traj.states {
            assert!((s.norm() - 1.0).abs() < 1e-10);
        }
    }
}
