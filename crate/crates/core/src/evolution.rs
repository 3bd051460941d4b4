//! Exact propagators of pulse schedules and the entanglement fidelity of
//! the qubit channel they induce.

use nalgebra::Matrix2;
use num_complex::Complex64;
use thiserror::Error;

use crate::bath::{total_hamiltonian, BathOperators};
use crate::linalg::{self, CMatrix};
use crate::pauli::PauliAxis;
use crate::sequence::PulseSequence;

/// Relative Hermiticity tolerance for Hamiltonians handed to the propagator.
pub const HERMITIAN_REL_TOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvolutionError {
    #[error("generator is not Hermitian (defect {0:e})")]
    NotHermitian(f64),
    #[error("time step must be finite, got {0}")]
    BadTimeStep(f64),
}

/// Eigen-decomposed Hamiltonian, reused across segments of one schedule.
pub struct Propagator {
    values: Vec<f64>,
    vectors: CMatrix,
}

impl Propagator {
    pub fn new(h: &CMatrix) -> Result<Self, EvolutionError> {
        let scale = linalg::max_abs(h).max(1.0);
        let defect = linalg::hermiticity_defect(h);
        if defect > HERMITIAN_REL_TOL * scale {
            return Err(EvolutionError::NotHermitian(defect));
        }
        let (values, vectors) = linalg::hermitian_eigen(h);
        Ok(Propagator { values, vectors })
    }

    /// `exp(-i H dt)`.
    pub fn step(&self, dt: f64) -> CMatrix {
        let n = self.values.len();
        let mut scaled = self.vectors.clone();
        for (j, &v) in self.values.iter().enumerate() {
            let phase = Complex64::from_polar(1.0, -v * dt);
            for i in 0..n {
                scaled[(i, j)] *= phase;
            }
        }
        scaled * self.vectors.adjoint()
    }
}

/// `exp(-i H dt)` through the eigen-decomposition of `H`.
pub fn expm_segment(h: &CMatrix, dt: f64) -> Result<CMatrix, EvolutionError> {
    if !dt.is_finite() {
        return Err(EvolutionError::BadTimeStep(dt));
    }
    if dt == 0.0 {
        return Ok(linalg::identity(h.nrows()));
    }
    Ok(Propagator::new(h)?.step(dt))
}

/// `σ_axis ⊗ I_d`, bare Pauli phase convention.
pub fn pulse_unitary(axis: PauliAxis, d: usize) -> CMatrix {
    linalg::qubit_op(&axis.matrix(), d)
}

#[derive(Debug, Clone)]
pub struct UnitaryResult {
    /// Full propagator, qubit factor first.
    pub u: CMatrix,
    /// Product of all pulse matrices in application order (entries exact).
    pub frame: Matrix2<Complex64>,
    pub total_duration: f64,
    pub pulse_count: usize,
    pub label: String,
}

impl UnitaryResult {
    /// Propagator with the net pulse product stripped: `(frame† ⊗ I) U`.
    /// This is the toggling-frame evolution the effective Hamiltonian
    /// describes.
    pub fn toggling(&self) -> CMatrix {
        let d = self.u.nrows() / 2;
        linalg::qubit_op(&self.frame.adjoint(), d) * &self.u
    }

    pub fn entanglement_fidelity(&self) -> f64 {
        entanglement_fidelity(&self.u)
    }

    pub fn unitarity_defect(&self) -> f64 {
        linalg::unitarity_defect(&self.u)
    }
}

/// Composes free segments and pulse matrices right to left, in time order.
pub fn sequence_unitary(seq: &PulseSequence, ops: &BathOperators) -> Result<UnitaryResult, EvolutionError> {
    let d = ops.dim();
    let prop = Propagator::new(&total_hamiltonian(ops))?;
    let t = seq.total_duration();
    let mut u = linalg::identity(2 * d);
    let mut frame = PauliAxis::I.matrix();
    let mut last = 0.0;
    for p in seq.pulses() {
        let x = p.t_frac();
        if x > last {
            u = prop.step((x - last) * t) * u;
        }
        last = last.max(x);
        u = pulse_unitary(p.axis, d) * u;
        frame = p.axis.matrix() * frame;
    }
    if last < 1.0 {
        u = prop.step((1.0 - last) * t) * u;
    }
    Ok(UnitaryResult {
        u,
        frame,
        total_duration: t,
        pulse_count: seq.pulse_count(),
        label: seq.label().to_string(),
    })
}

/// Entanglement fidelity of the qubit channel `ρ ↦ Tr_B[U (ρ ⊗ I/d) U†]`.
///
/// Kraus operators are `K_ij = ⟨i|U|j⟩/√d` over bath basis states, so
/// `F_e = Σ_ij |Tr K_ij / 2|²`.
pub fn entanglement_fidelity(u: &CMatrix) -> f64 {
    let d = u.nrows() / 2;
    let mut acc = 0.0;
    for i in 0..d {
        for j in 0..d {
            let tr = u[(i, j)] + u[(d + i, d + j)];
            acc += tr.norm_sqr() / 4.0;
        }
    }
    (acc / d as f64).clamp(0.0, 1.0)
}
