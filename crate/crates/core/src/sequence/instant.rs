use std::cmp::Ordering;
use std::fmt;

use num_rational::Ratio;
use num_traits::{CheckedAdd, CheckedMul, ToPrimitive};

use super::SequenceError;

/// Pulse instants closer than this (as fractions of the sequence) are
/// treated as coincident when at least one side is not exact.
pub const COINCIDENCE_EPS: f64 = 1e-12;

/// A pulse time `num/den` as a fraction of the total duration, kept in
/// lowest terms with `0 <= num <= den`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RationalInstant(Ratio<u64>);

impl RationalInstant {
    pub const ZERO: RationalInstant = RationalInstant(Ratio::new_raw(0, 1));
    pub const ONE: RationalInstant = RationalInstant(Ratio::new_raw(1, 1));

    pub fn new(num: u64, den: u64) -> Result<Self, SequenceError> {
        if den == 0 || num > den {
            return Err(SequenceError::InvalidInstant(format!("{num}/{den}")));
        }
        Ok(RationalInstant(Ratio::new(num, den)))
    }

    pub(crate) fn from_ratio(r: Ratio<u64>) -> Result<Self, SequenceError> {
        Self::new(*r.numer(), *r.denom())
    }

    pub fn num(&self) -> u64 {
        *self.0.numer()
    }

    pub fn den(&self) -> u64 {
        *self.0.denom()
    }

    pub fn ratio(&self) -> Ratio<u64> {
        self.0
    }

    pub fn to_f64(&self) -> f64 {
        self.num() as f64 / self.den() as f64
    }
}

impl fmt::Display for RationalInstant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num(), self.den())
    }
}

/// Where a pulse sits inside its sequence, as a fraction of the total
/// duration. Exact whenever the construction is rational.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Instant {
    Exact(RationalInstant),
    Approx(f64),
}

impl Instant {
    pub fn exact(num: u64, den: u64) -> Result<Self, SequenceError> {
        RationalInstant::new(num, den).map(Instant::Exact)
    }

    pub fn approx(frac: f64) -> Result<Self, SequenceError> {
        if !(0.0..=1.0).contains(&frac) {
            return Err(SequenceError::InvalidInstant(frac.to_string()));
        }
        Ok(Instant::Approx(frac))
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Instant::Exact(r) => r.to_f64(),
            Instant::Approx(x) => *x,
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Instant::Exact(_))
    }

    pub fn as_rational(&self) -> Option<RationalInstant> {
        match self {
            Instant::Exact(r) => Some(*r),
            Instant::Approx(_) => None,
        }
    }

    pub fn coincides_with(&self, other: &Instant) -> bool {
        match (self, other) {
            (Instant::Exact(a), Instant::Exact(b)) => a == b,
            _ => (self.to_f64() - other.to_f64()).abs() <= COINCIDENCE_EPS,
        }
    }

    /// Maps an instant of a sub-block into the enclosing sequence:
    /// `offset + scale * self`.
    pub(crate) fn affine(&self, offset: Ratio<u64>, scale: Ratio<u64>) -> Result<Instant, SequenceError> {
        match self {
            Instant::Exact(r) => {
                let mapped = scale
                    .checked_mul(&r.ratio())
                    .and_then(|v| v.checked_add(&offset))
                    .ok_or(SequenceError::Overflow)?;
                RationalInstant::from_ratio(mapped).map(Instant::Exact)
            }
            Instant::Approx(x) => {
                let o = offset.to_f64().unwrap_or(0.0);
                let s = scale.to_f64().unwrap_or(0.0);
                let v = (o + s * x).clamp(0.0, 1.0);
                Ok(Instant::Approx(v))
            }
        }
    }

    pub(crate) fn cmp_time(&self, other: &Instant) -> Ordering {
        match (self, other) {
            (Instant::Exact(a), Instant::Exact(b)) => a.cmp(b),
            _ => self.to_f64().total_cmp(&other.to_f64()),
        }
    }
}

impl From<RationalInstant> for Instant {
    fn from(r: RationalInstant) -> Self {
        Instant::Exact(r)
    }
}

impl fmt::Display for Instant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Instant::Exact(r) => write!(f, "{r}"),
            Instant::Approx(x) => write!(f, "{x:.12}"),
        }
    }
}

pub(crate) fn ratio(num: u64, den: u64) -> Ratio<u64> {
    debug_assert!(den != 0);
    Ratio::new(num, den)
}
