//! Single-qubit Pauli algebra for ideal π pulses.
//!
//! An instantaneous π rotation about axis `a` is, up to a global phase, the
//! Pauli matrix `σ_a`. Coincident pulses therefore compose in the Pauli group
//! modulo phase, which is all the schedule layer needs.

use std::fmt;
use std::str::FromStr;

use nalgebra::Matrix2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PauliAxis {
    I,
    X,
    Y,
    Z,
}

impl PauliAxis {
    pub const ALL: [PauliAxis; 4] = [PauliAxis::I, PauliAxis::X, PauliAxis::Y, PauliAxis::Z];

    /// Composes `self` (applied first) with `later`, discarding the phase.
    ///
    /// The Pauli group modulo phase is abelian, so the order only matters for
    /// the discarded phase; it is kept in the signature to make call sites
    /// read in time order.
    pub fn then(self, later: PauliAxis) -> PauliAxis {
        use PauliAxis::*;
        match (self, later) {
            (I, a) | (a, I) => a,
            (a, b) if a == b => I,
            (X, Y) | (Y, X) => Z,
            (Y, Z) | (Z, Y) => X,
            (X, Z) | (Z, X) => Y,
            _ => unreachable!(),
        }
    }

    pub fn is_identity(self) -> bool {
        self == PauliAxis::I
    }

    /// The bare Pauli matrix; entries are exactly representable.
    pub fn matrix(self) -> Matrix2<Complex64> {
        let o = Complex64::new(0.0, 0.0);
        let l = Complex64::new(1.0, 0.0);
        let i = Complex64::new(0.0, 1.0);
        match self {
            PauliAxis::I => Matrix2::new(l, o, o, l),
            PauliAxis::X => Matrix2::new(o, l, l, o),
            PauliAxis::Y => Matrix2::new(o, -i, i, o),
            PauliAxis::Z => Matrix2::new(l, o, o, -l),
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            PauliAxis::I => "I",
            PauliAxis::X => "X",
            PauliAxis::Y => "Y",
            PauliAxis::Z => "Z",
        }
    }
}

impl fmt::Display for PauliAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseAxisError(pub String);

impl fmt::Display for ParseAxisError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "unknown pulse axis `{}` (expected X, Y or Z)", self.0)
    }
}

impl std::error::Error for ParseAxisError {}

impl FromStr for PauliAxis {
    type Err = ParseAxisError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "I" | "i" => Ok(PauliAxis::I),
            "X" | "x" => Ok(PauliAxis::X),
            "Y" | "y" => Ok(PauliAxis::Y),
            "Z" | "z" => Ok(PauliAxis::Z),
            other => Err(ParseAxisError(other.to_string())),
        }
    }
}
