//! Cubic stand-in for the UDD instant function and the approximate
//! UDD-over-UDD construction it enables.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use super::instant::ratio;
use super::{check_duration, udd_sequence, Family, RationalInstant, ScheduleBuilder, SequenceError, PulseSequence};
use crate::pauli::PauliAxis;

/// `-2x³ + 3x²` on `[0, 1]`.
pub fn d_approx(x: f64) -> Result<f64, SequenceError> {
    if !(0.0..=1.0).contains(&x) {
        return Err(SequenceError::Domain(x.to_string()));
    }
    Ok(x * x * (3.0 - 2.0 * x))
}

/// Exact rational evaluation of `-2x³ + 3x²`.
pub fn d_approx_exact(x: &BigRational) -> Result<BigRational, SequenceError> {
    if *x < BigRational::zero() || *x > BigRational::one() {
        return Err(SequenceError::Domain(x.to_string()));
    }
    let three = BigRational::from_integer(BigInt::from(3));
    let two = BigRational::from_integer(BigInt::from(2));
    Ok(x * x * (three - two * x))
}

/// Outer X instant `d_approx(j/(n+1))`, exact and in lowest terms.
pub fn udd2_outer_instant(n: usize, j: usize) -> Result<RationalInstant, SequenceError> {
    if n == 0 || j == 0 || j > n {
        return Err(SequenceError::InvalidArgument(format!("need 1 <= j <= n, got j={j}, n={n}")));
    }
    let x = BigRational::new(BigInt::from(j), BigInt::from(n + 1));
    let v = d_approx_exact(&x)?;
    let num = v.numer().to_u64().ok_or(SequenceError::Overflow)?;
    let den = v.denom().to_u64().ok_or(SequenceError::Overflow)?;
    RationalInstant::new(num, den)
}

/// Smallest `D` such that every outer instant `d_approx(j/(n+1))` is a
/// multiple of `1/D`.
pub fn udd2_outer_grid(n: usize) -> Result<u64, SequenceError> {
    (1..=n).try_fold(1u64, |g, j| Ok(num_integer::lcm(g, udd2_outer_instant(n, j)?.den())))
}

/// Approximate UDD²: `(n+1)³` elementary intervals, each carrying a UDD-`n`
/// block of Z pulses, plus `n` outer X pulses at `d_approx(j/(n+1))`.
/// Total pulse count `n(n+1)³ + n`.
pub fn udd2_approx(n: usize, t: f64) -> Result<PulseSequence, SequenceError> {
    if n == 0 {
        return Err(SequenceError::InvalidArgument("n must be at least 1".into()));
    }
    check_duration(t)?;
    let cells = (n as u64 + 1).checked_pow(3).ok_or(SequenceError::Overflow)?;
    let inner = udd_sequence(n, t, PauliAxis::Z)?;
    let outer = (1..=n)
        .map(|j| udd2_outer_instant(n, j))
        .collect::<Result<Vec<_>, _>>()?;
    let mut next_outer = outer.iter().peekable();
    let width = ratio(1, cells);
    let mut b = ScheduleBuilder::new();
    for i in 0..cells {
        b.block(ratio(i, cells), width, inner.pulses())?;
        let boundary = ratio(i + 1, cells);
        while let Some(o) = next_outer.peek() {
            if o.ratio() == boundary {
                b.exact_pulse(boundary, PauliAxis::X)?;
                next_outer.next();
            } else {
                break;
            }
        }
    }
    debug_assert!(next_outer.next().is_none());
    let family = Family::Udd2Approx { n };
    b.finish(family.tag(), t, family)
}
