//! Effective Hamiltonians of composed propagators.
//!
//! A propagator `U = exp(-i t H_eff)` is inverted with the principal matrix
//! logarithm, and `H_eff` is split into `Σ_γ σ_γ ⊗ A_γ^eff`. Extraction
//! always works in the toggling frame, i.e. with the net pulse product
//! removed, so schedules with an odd number of pulses are handled too.

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::bath::{BathOperators, Channel};
use crate::evolution::{sequence_unitary, EvolutionError, UnitaryResult};
use crate::linalg::{self, CMatrix};
use crate::precise::{self, PreciseError};
use crate::sequence::PulseSequence;

/// Minimum distance of any eigenphase from ±π.
pub const BRANCH_MARGIN: f64 = 0.1;

/// Eigenvalues of `(U - U†)/2i` closer than this are diagonalized jointly
/// with `(U + U†)/2`.
const CLUSTER_TOL: f64 = 1e-9;

const UNITARITY_TOL: f64 = 1e-8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EffectiveError {
    #[error("eigenphase {phase:.4} lies within {BRANCH_MARGIN} rad of ±π; shrink αt")]
    BranchAmbiguity { phase: f64 },
    #[error("matrix is not unitary (defect {0:e})")]
    NotUnitary(f64),
    #[error("duration must be positive, got {0}")]
    BadDuration(f64),
    #[error("generator must be 2d×2d with d >= 1, got {0}×{0}")]
    BadDimension(usize),
    #[error(transparent)]
    Evolution(#[from] EvolutionError),
}

/// Principal logarithm: Hermitian `M` with `U = exp(-iM)` and every
/// eigenvalue of `M` in `(-π + margin, π - margin)`.
///
/// The unitary is diagonalized through the commuting Hermitian pair
/// `C = (U + U†)/2`, `S = (U − U†)/2i`: eigenvectors come from `S`, and
/// degenerate clusters of `S` are split by diagonalizing `C` inside them.
pub fn unitary_log(u: &CMatrix) -> Result<CMatrix, EffectiveError> {
    let defect = linalg::unitarity_defect(u);
    if defect > UNITARITY_TOL {
        return Err(EffectiveError::NotUnitary(defect));
    }
    let n = u.nrows();
    let ud = u.adjoint();
    let half = Complex64::new(0.5, 0.0);
    let cos_part = (u + &ud) * half;
    let sin_part = (u - &ud) * Complex64::new(0.0, -0.5);

    let (vals, vecs) = linalg::hermitian_eigen(&sin_part);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));

    let mut basis = CMatrix::zeros(n, n);
    let mut col = 0;
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && vals[order[end]] - vals[order[end - 1]] < CLUSTER_TOL {
            end += 1;
        }
        let k = end - start;
        let mut block = CMatrix::zeros(n, k);
        for (j, &idx) in order[start..end].iter().enumerate() {
            block.set_column(j, &vecs.column(idx));
        }
        if k > 1 {
            let projected = block.adjoint() * &cos_part * &block;
            let (_, rot) = linalg::hermitian_eigen(&projected);
            block *= rot;
        }
        for j in 0..k {
            basis.set_column(col + j, &block.column(j));
        }
        col += k;
        start = end;
    }

    let mut phases = Vec::with_capacity(n);
    for j in 0..n {
        let w = basis.column(j);
        let c = (w.adjoint() * &cos_part * w)[(0, 0)].re;
        let s = (w.adjoint() * &sin_part * w)[(0, 0)].re;
        // eigenvalue e^{-iθ} = cos θ - i sin θ
        let theta = (-s).atan2(c);
        if theta.abs() > std::f64::consts::PI - BRANCH_MARGIN {
            return Err(EffectiveError::BranchAmbiguity { phase: theta });
        }
        phases.push(theta);
    }
    let mut scaled = basis.clone();
    for (j, &theta) in phases.iter().enumerate() {
        for i in 0..n {
            scaled[(i, j)] *= theta;
        }
    }
    Ok(linalg::hermitize(&(scaled * basis.adjoint())))
}

/// Pauli components of a qubit⊗bath generator, normalized by `t`:
/// `A_γ^eff = Tr_q[(σ_γ ⊗ I) M] / (2t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct EffectiveHamiltonian {
    ops: [CMatrix; 4],
    pub t: f64,
}

impl EffectiveHamiltonian {
    pub fn get(&self, c: Channel) -> &CMatrix {
        &self.ops[c as usize]
    }

    pub fn a0(&self) -> &CMatrix {
        &self.ops[0]
    }

    pub fn ax(&self) -> &CMatrix {
        &self.ops[1]
    }

    pub fn ay(&self) -> &CMatrix {
        &self.ops[2]
    }

    pub fn az(&self) -> &CMatrix {
        &self.ops[3]
    }

    pub fn dim(&self) -> usize {
        self.ops[0].nrows()
    }

    /// `Σ_γ σ_γ ⊗ A_γ^eff`.
    pub fn hamiltonian(&self) -> CMatrix {
        let d = self.dim();
        let mut h = CMatrix::zeros(2 * d, 2 * d);
        for c in Channel::ALL {
            h += linalg::qubit_kron(&c.pauli().matrix(), self.get(c));
        }
        h
    }

    /// `t · H_eff`, the generator this was decomposed from.
    pub fn generator(&self) -> CMatrix {
        self.hamiltonian() * Complex64::new(self.t, 0.0)
    }

    pub fn error_functionals(&self) -> ErrorFunctionals {
        error_functionals(self)
    }
}

pub fn pauli_decompose(m: &CMatrix, t: f64) -> Result<EffectiveHamiltonian, EffectiveError> {
    if !(t.is_finite() && t > 0.0) {
        return Err(EffectiveError::BadDuration(t));
    }
    let n = m.nrows();
    if n < 2 || !n.is_multiple_of(2) || m.ncols() != n {
        return Err(EffectiveError::BadDimension(n));
    }
    let d = n / 2;
    let block = |r: usize, c: usize| m.view((r * d, c * d), (d, d)).into_owned();
    let scale = Complex64::new(0.5 / t, 0.0);
    let ops = Channel::ALL.map(|c| {
        let s = c.pauli().matrix();
        let mut acc = CMatrix::zeros(d, d);
        for a in 0..2 {
            for b in 0..2 {
                if s[(a, b)] != linalg::ZERO {
                    acc += block(b, a) * s[(a, b)];
                }
            }
        }
        acc * scale
    });
    Ok(EffectiveHamiltonian { ops, t })
}

/// Residual coupling amplitudes of an effective Hamiltonian.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ErrorFunctionals {
    /// `t · max(‖A_x^eff‖, ‖A_y^eff‖)`
    pub flip: f64,
    /// `t · ‖A_z^eff‖`
    pub dephase: f64,
    /// `max(flip, dephase)`
    pub total: f64,
}

pub fn error_functionals(eff: &EffectiveHamiltonian) -> ErrorFunctionals {
    let n = |m: &CMatrix| linalg::spectral_norm(m);
    let flip = eff.t * n(eff.ax()).max(n(eff.ay()));
    let dephase = eff.t * n(eff.az());
    ErrorFunctionals { flip, dephase, total: flip.max(dephase) }
}

/// f64 route: toggling-frame propagator → `unitary_log` → decomposition.
pub fn effective_from_unitary(result: &UnitaryResult) -> Result<EffectiveHamiltonian, EffectiveError> {
    let m = unitary_log(&result.toggling())?;
    pauli_decompose(&m, result.total_duration)
}

/// Effective Hamiltonian of `seq` under `ops`.
///
/// Uses the double-double toggling-frame route when the propagator is near
/// the identity and falls back to the f64 eigen route otherwise.
pub fn effective_hamiltonian(seq: &PulseSequence, ops: &BathOperators) -> Result<EffectiveHamiltonian, EffectiveError> {
    match precise::toggling_generator(seq, ops) {
        Ok(m) => pauli_decompose(&m, seq.total_duration()),
        Err(PreciseError::NotNearIdentity(_)) => effective_from_unitary(&sequence_unitary(seq, ops)?),
    }
}

/// Level-`n` output of the leading-order concatenation recursion
/// `A_z^{(k+1)} = i(τ_k/2)[A_0^{(k)}, A_z^{(k)}]`, `τ_{k+1} = 2τ_k`, with
/// `A_0` carried unchanged.
#[derive(Debug, Clone, PartialEq)]
pub struct MagnusPrediction {
    pub a0: CMatrix,
    pub az: CMatrix,
    pub tau: f64,
    pub level: u32,
}

pub fn magnus_cdd_predict(a0: &CMatrix, az: &CMatrix, tau0: f64, level: u32) -> MagnusPrediction {
    let mut az = az.clone();
    let mut tau = tau0;
    for _ in 0..level {
        az = linalg::commutator(a0, &az) * Complex64::new(0.0, tau / 2.0);
        tau *= 2.0;
    }
    MagnusPrediction { a0: a0.clone(), az, tau, level }
}

/// Ratios of the effective norms to the scales that bound them:
/// `‖A_0^eff‖ / max(‖A_0‖, t‖A_x‖², t‖A_y‖²)` and
/// `‖A_z^eff‖ / max(‖A_z‖, t‖A_x‖‖A_y‖)`. Diagnostic only.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormDiagnostics {
    pub c0: Option<f64>,
    pub cz: Option<f64>,
}

pub fn norm_diagnostics(eff: &EffectiveHamiltonian, ops: &BathOperators) -> NormDiagnostics {
    let [n0, nx, ny, nz] = ops.norms();
    let t = eff.t;
    let ratio = |num: f64, den: f64| (den > 0.0).then(|| num / den);
    NormDiagnostics {
        c0: ratio(linalg::spectral_norm(eff.a0()), n0.max(t * nx * nx).max(t * ny * ny)),
        cz: ratio(linalg::spectral_norm(eff.az()), nz.max(t * nx * ny)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bath::{build_model, total_hamiltonian, ModelSpec, Preset};
    use crate::evolution::expm_segment;
    use crate::linalg::{ONE, ZERO};
    use crate::pauli::PauliAxis;
    use crate::sequence::udd_sequence;

    fn random_hermitian(seed: u64, n: usize) -> CMatrix {
        let ops = build_model(&ModelSpec::new(n, seed, Preset::Generic)).unwrap();
        ops.a0().clone()
    }

    #[test]
    fn log_of_identity_is_zero() {
        let m = unitary_log(&linalg::identity(6)).unwrap();
        assert!(linalg::max_abs(&m) < 1e-15);
    }

    #[test]
    fn log_of_minus_identity_is_ambiguous() {
        let u = -linalg::identity(4);
        assert!(matches!(unitary_log(&u), Err(EffectiveError::BranchAmbiguity { .. })));
    }

    #[test]
    fn log_inverts_exp() {
        let ops = build_model(&ModelSpec::new(4, 17, Preset::Generic)).unwrap();
        let h = total_hamiltonian(&ops);
        let t = 0.4;
        let m = unitary_log(&expm_segment(&h, t).unwrap()).unwrap();
        assert!(linalg::max_abs(&(m - &h * Complex64::new(t, 0.0))) < 1e-10);
    }

    #[test]
    fn log_handles_degenerate_spectrum() {
        // eigenphases θ and π-θ share the same sine
        let theta: f64 = 0.6;
        let diag = nalgebra::DVector::from_vec(vec![
            Complex64::from_polar(1.0, -theta),
            Complex64::from_polar(1.0, -(std::f64::consts::PI - theta - 0.2)),
            Complex64::from_polar(1.0, -theta),
            ONE,
        ]);
        let q = expm_segment(&random_hermitian(3, 4), 1.0).unwrap();
        let u = &q * CMatrix::from_diagonal(&diag) * q.adjoint();
        let m = unitary_log(&u).unwrap();
        let back = expm_segment(&m, 1.0).unwrap();
        assert!(linalg::max_abs(&(back - u)) < 1e-12);
    }

    #[test]
    fn rejects_non_unitary() {
        let u = linalg::identity(4) * Complex64::new(1.1, 0.0);
        assert!(matches!(unitary_log(&u), Err(EffectiveError::NotUnitary(_))));
    }

    #[test]
    fn decompose_pure_terms() {
        let b = random_hermitian(9, 3);
        let m = linalg::qubit_kron(&PauliAxis::Z.matrix(), &b);
        let eff = pauli_decompose(&m, 1.0).unwrap();
        assert!(linalg::max_abs(&(eff.az() - &b)) < 1e-15);
        for o in [eff.a0(), eff.ax(), eff.ay()] {
            assert!(linalg::max_abs(o) < 1e-15);
        }
        let m = linalg::qubit_kron(&PauliAxis::I.matrix(), &b);
        let eff = pauli_decompose(&m, 2.0).unwrap();
        assert!(linalg::max_abs(&(eff.a0() * Complex64::new(2.0, 0.0) - &b)) < 1e-15);
    }

    #[test]
    fn decompose_reassembles() {
        let m = random_hermitian(10, 8);
        let eff = pauli_decompose(&m, 0.7).unwrap();
        assert!(linalg::max_abs(&(eff.generator() - &m)) < 1e-12);
        assert!(linalg::hermiticity_defect(&eff.hamiltonian()) < 1e-10);
        assert!(pauli_decompose(&m, 0.0).is_err());
        assert!(pauli_decompose(&CMatrix::zeros(3, 3), 1.0).is_err());
    }

    #[test]
    fn functionals_of_trivial_cases() {
        let zero = pauli_decompose(&CMatrix::zeros(8, 8), 1.0).unwrap();
        let e = zero.error_functionals();
        assert_eq!((e.flip, e.dephase, e.total), (0.0, 0.0, 0.0));

        let ops = build_model(&ModelSpec::new(4, 2, Preset::PureDephasing)).unwrap();
        let t = 0.01;
        let eff = effective_hamiltonian(&PulseSequence::free(t).unwrap(), &ops).unwrap();
        let e = eff.error_functionals();
        assert_eq!(e.flip, 0.0);
        assert!((e.dephase - t * linalg::spectral_norm(ops.az())).abs() < 1e-15);
    }

    #[test]
    fn precise_and_f64_routes_agree() {
        let ops = build_model(&ModelSpec::new(4, 3, Preset::Generic)).unwrap();
        let seq = udd_sequence(2, 0.05, PauliAxis::Z).unwrap();
        let a = effective_hamiltonian(&seq, &ops).unwrap();
        let b = effective_from_unitary(&sequence_unitary(&seq, &ops).unwrap()).unwrap();
        assert!(linalg::max_abs(&(a.generator() - b.generator())) < 1e-13);
    }

    #[test]
    fn odd_udd_uses_toggling_frame() {
        let ops = build_model(&ModelSpec::new(4, 3, Preset::Generic)).unwrap();
        let seq = udd_sequence(3, 0.05, PauliAxis::Z).unwrap();
        let r = sequence_unitary(&seq, &ops).unwrap();
        // the lab-frame propagator is σ_z-like and sits on the branch cut
        assert!(unitary_log(&r.u).is_err());
        assert!(effective_from_unitary(&r).is_ok());
    }

    #[test]
    fn magnus_commuting_bath_vanishes() {
        let a0 = CMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE]);
        let az = CMatrix::from_row_slice(2, 2, &[ONE * 3.0, ZERO, ZERO, ONE]);
        for level in 1..4 {
            let p = magnus_cdd_predict(&a0, &az, 0.1, level);
            assert_eq!(linalg::max_abs(&p.az), 0.0);
            assert_eq!(p.tau, 0.1 * 2f64.powi(level as i32));
        }
    }

    #[test]
    fn magnus_step_is_hermitian() {
        let a0 = random_hermitian(1, 4);
        let az = random_hermitian(2, 4);
        let p = magnus_cdd_predict(&a0, &az, 0.2, 1);
        let want = linalg::commutator(&a0, &az) * Complex64::new(0.0, 0.1);
        assert!(linalg::max_abs(&(p.az.clone() - want)) < 1e-15);
        assert!(linalg::hermiticity_defect(&p.az) < 1e-14);
        assert_eq!(magnus_cdd_predict(&a0, &az, 0.2, 0).az, az);
    }
}
