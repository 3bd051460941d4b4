//! Qubit–environment models `H = Σ_γ σ_γ ⊗ A_γ`, γ ∈ {0, x, y, z}.
//!
//! Random draws use `ChaCha8Rng::seed_from_u64(seed)` so that a model spec
//! reproduces the same matrices on every platform.

use std::fmt;
use std::str::FromStr;

use nalgebra::Matrix2;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{self, CMatrix};
use crate::pauli::PauliAxis;

/// Largest bath dimension `build_model` accepts.
pub const MAX_BATH_DIM: usize = 64;

/// Hermiticity tolerance for stored bath operators.
pub const HERMITIAN_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BathError {
    #[error("bath dimension {0} exceeds the limit of {MAX_BATH_DIM}")]
    TooLarge(usize),
    #[error("invalid model: {0}")]
    Invalid(String),
    #[error("A_{0} is not Hermitian (defect {1:e})")]
    NotHermitian(&'static str, f64),
    #[error("random draw for A_{0} vanished; cannot rescale to a nonzero norm")]
    Degenerate(&'static str),
    #[error("unknown preset `{0}`")]
    UnknownPreset(String),
}

/// Coupling channel index: identity, x, y or z on the qubit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Channel {
    Zero,
    X,
    Y,
    Z,
}

impl Channel {
    pub const ALL: [Channel; 4] = [Channel::Zero, Channel::X, Channel::Y, Channel::Z];

    pub fn pauli(self) -> PauliAxis {
        match self {
            Channel::Zero => PauliAxis::I,
            Channel::X => PauliAxis::X,
            Channel::Y => PauliAxis::Y,
            Channel::Z => PauliAxis::Z,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Channel::Zero => "0",
            Channel::X => "x",
            Channel::Y => "y",
            Channel::Z => "z",
        }
    }

    fn index(self) -> usize {
        self as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormTargets {
    #[serde(rename = "0")]
    pub a0: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl NormTargets {
    pub fn uniform(v: f64) -> Self {
        NormTargets { a0: v, x: v, y: v, z: v }
    }

    pub fn get(&self, c: Channel) -> f64 {
        match c {
            Channel::Zero => self.a0,
            Channel::X => self.x,
            Channel::Y => self.y,
            Channel::Z => self.z,
        }
    }
}

impl Default for NormTargets {
    fn default() -> Self {
        NormTargets::uniform(1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Preset {
    /// Independent random Hermitian operators.
    #[default]
    Generic,
    /// `A_x = A_y = 0`.
    PureDephasing,
    /// `‖A_z‖` clamped to at most `0.1·min(‖A_x‖, ‖A_y‖)`.
    Anisotropic,
    /// `k` bath spins, `d = 2^k`.
    SpinBath(u32),
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Preset::Generic => f.write_str("generic"),
            Preset::PureDephasing => f.write_str("pure_dephasing"),
            Preset::Anisotropic => f.write_str("anisotropic"),
            Preset::SpinBath(k) => write!(f, "spin_bath({k})"),
        }
    }
}

impl FromStr for Preset {
    type Err = BathError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        match s {
            "generic" => return Ok(Preset::Generic),
            "pure_dephasing" => return Ok(Preset::PureDephasing),
            "anisotropic" => return Ok(Preset::Anisotropic),
            _ => {}
        }
        let k = s
            .strip_prefix("spin_bath(")
            .and_then(|r| r.strip_suffix(')'))
            .or_else(|| s.strip_prefix("spin_bath:"))
            .and_then(|k| k.trim().parse::<u32>().ok());
        k.map(Preset::SpinBath).ok_or_else(|| BathError::UnknownPreset(s.to_string()))
    }
}

impl Serialize for Preset {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Preset {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Model specification; the JSON form is
/// `{"d": 4, "seed": 7, "preset": "generic", "norm_targets": {"0": 1, "x": 1, "y": 1, "z": 1}}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub d: usize,
    pub seed: u64,
    pub preset: Preset,
    pub norm_targets: NormTargets,
}

impl Default for ModelSpec {
    fn default() -> Self {
        ModelSpec { d: 4, seed: 0, preset: Preset::Generic, norm_targets: NormTargets::default() }
    }
}

impl ModelSpec {
    pub fn new(d: usize, seed: u64, preset: Preset) -> Self {
        ModelSpec { d, seed, preset, ..Default::default() }
    }

    pub fn with_targets(mut self, targets: NormTargets) -> Self {
        self.norm_targets = targets;
        self
    }

    /// Norm targets after the preset's constraints are applied.
    pub fn effective_targets(&self) -> NormTargets {
        let mut t = self.norm_targets;
        match self.preset {
            Preset::PureDephasing => {
                t.x = 0.0;
                t.y = 0.0;
            }
            Preset::Anisotropic => t.z = t.z.min(0.1 * t.x.min(t.y)),
            Preset::Generic | Preset::SpinBath(_) => {}
        }
        t
    }

    /// Bath dimension after the preset is applied.
    pub fn dimension(&self) -> Result<usize, BathError> {
        match self.preset {
            Preset::SpinBath(k) => {
                if k == 0 {
                    return Err(BathError::Invalid("spin_bath needs at least one spin".into()));
                }
                1usize
                    .checked_shl(k)
                    .filter(|&d| d <= MAX_BATH_DIM && k < 32)
                    .ok_or(BathError::TooLarge(1usize.checked_shl(k.min(63)).unwrap_or(usize::MAX)))
            }
            _ => Ok(self.d),
        }
    }
}

/// The four environment operators of the coupling Hamiltonian.
#[derive(Debug, Clone, PartialEq)]
pub struct BathOperators {
    ops: [CMatrix; 4],
}

impl BathOperators {
    pub fn new(a0: CMatrix, ax: CMatrix, ay: CMatrix, az: CMatrix) -> Result<Self, BathError> {
        let d = a0.nrows();
        if d == 0 {
            return Err(BathError::Invalid("bath dimension must be at least 1".into()));
        }
        let ops = [a0, ax, ay, az];
        for (c, m) in Channel::ALL.iter().zip(&ops) {
            if m.nrows() != d || m.ncols() != d {
                return Err(BathError::Invalid(format!("A_{} is not {d}x{d}", c.name())));
            }
            let defect = linalg::hermiticity_defect(m);
            if defect > HERMITIAN_TOL {
                return Err(BathError::NotHermitian(c.name(), defect));
            }
        }
        Ok(BathOperators { ops })
    }

    /// Pure-dephasing model with the given `A_0` and `A_z`.
    pub fn dephasing(a0: CMatrix, az: CMatrix) -> Result<Self, BathError> {
        let d = a0.nrows();
        BathOperators::new(a0, CMatrix::zeros(d, d), CMatrix::zeros(d, d), az)
    }

    pub fn dim(&self) -> usize {
        self.ops[0].nrows()
    }

    pub fn get(&self, c: Channel) -> &CMatrix {
        &self.ops[c.index()]
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

    pub fn norms(&self) -> [f64; 4] {
        [0, 1, 2, 3].map(|i| linalg::spectral_norm(&self.ops[i]))
    }

    /// `H → -H`.
    pub fn negated(&self) -> BathOperators {
        BathOperators { ops: self.ops.clone().map(|m| -m) }
    }

    /// All operators multiplied by `s`.
    pub fn scaled(&self, s: f64) -> BathOperators {
        BathOperators { ops: self.ops.clone().map(|m| m * Complex64::new(s, 0.0)) }
    }
}

/// `max_γ ‖A_γ‖`.
pub fn alpha(ops: &BathOperators) -> f64 {
    ops.norms().into_iter().fold(0.0, f64::max)
}

/// `Σ_γ σ_γ ⊗ A_γ`, qubit factor first.
pub fn total_hamiltonian(ops: &BathOperators) -> CMatrix {
    let d = ops.dim();
    let mut h = CMatrix::zeros(2 * d, 2 * d);
    for c in Channel::ALL {
        h += linalg::qubit_kron(&c.pauli().matrix(), ops.get(c));
    }
    h
}

fn random_hermitian(rng: &mut ChaCha8Rng, d: usize) -> CMatrix {
    let g = CMatrix::from_fn(d, d, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        Complex64::new(re, im)
    });
    linalg::hermitize(&g)
}

fn spin_operator(k: u32, site: u32, axis: PauliAxis) -> CMatrix {
    let mut out = CMatrix::identity(1, 1);
    for j in 0..k {
        let factor: Matrix2<Complex64> = if j == site { axis.matrix() } else { PauliAxis::I.matrix() };
        let f = CMatrix::from_fn(2, 2, |r, c| factor[(r, c)]);
        out = out.kronecker(&f);
    }
    out
}

fn random_spin_operator(rng: &mut ChaCha8Rng, k: u32, with_couplings: bool) -> CMatrix {
    let d = 1usize << k;
    let mut m = CMatrix::zeros(d, d);
    let axes = [PauliAxis::X, PauliAxis::Y, PauliAxis::Z];
    for site in 0..k {
        for axis in axes {
            let c: f64 = StandardNormal.sample(rng);
            m += spin_operator(k, site, axis) * Complex64::new(c, 0.0);
        }
    }
    if with_couplings {
        for a in 0..k {
            for b in a + 1..k {
                for axis in axes {
                    let c: f64 = StandardNormal.sample(rng);
                    m += spin_operator(k, a, axis) * spin_operator(k, b, axis) * Complex64::new(c, 0.0);
                }
            }
        }
    }
    m
}

fn rescale(m: CMatrix, target: f64, c: Channel) -> Result<CMatrix, BathError> {
    if target == 0.0 {
        return Ok(CMatrix::zeros(m.nrows(), m.ncols()));
    }
    let norm = linalg::spectral_norm(&m);
    if norm == 0.0 {
        return Err(BathError::Degenerate(c.name()));
    }
    Ok(linalg::hermitize(&(m * Complex64::new(target / norm, 0.0))))
}

/// Draws the model described by `spec`.
///
/// All four operators are always drawn, in the order 0, x, y, z, so that a
/// zero target never shifts the random stream of the others.
pub fn build_model(spec: &ModelSpec) -> Result<BathOperators, BathError> {
    let d = spec.dimension()?;
    if d == 0 {
        return Err(BathError::Invalid("bath dimension must be at least 1".into()));
    }
    if d > MAX_BATH_DIM {
        return Err(BathError::TooLarge(d));
    }
    let targets = spec.effective_targets();
    for c in Channel::ALL {
        let v = targets.get(c);
        if !(v.is_finite() && v >= 0.0) {
            return Err(BathError::Invalid(format!("norm target for A_{} must be >= 0", c.name())));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut ops = Vec::with_capacity(4);
    for c in Channel::ALL {
        let raw = match spec.preset {
            Preset::SpinBath(k) => random_spin_operator(&mut rng, k, c == Channel::Zero),
            _ => random_hermitian(&mut rng, d),
        };
        ops.push(rescale(raw, targets.get(c), c)?);
    }
    let [a0, ax, ay, az]: [CMatrix; 4] = ops.try_into().expect("four operators");
    BathOperators::new(a0, ax, ay, az)
}
