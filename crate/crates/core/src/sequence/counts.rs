//! Closed-form pulse counts.

use super::SequenceError;

/// Number of X pulses after `n` X-type concatenation levels:
/// `a_n = (2/3)(2^n - (-1)^n)`.
pub fn x_pulse_count(n: u32) -> Result<u128, SequenceError> {
    let pow = 1u128.checked_shl(n + 1).filter(|_| n < 126).ok_or(SequenceError::Overflow)?;
    // (2^{n+1} - 2(-1)^n) / 3
    let numerator = if n.is_multiple_of(2) { pow - 2 } else { pow + 2 };
    debug_assert_eq!(numerator % 3, 0);
    Ok(numerator / 3)
}

/// Same count from `a_{k+1} = 2a_k + 2(-1)^k`, `a_0 = 0`.
pub fn x_pulse_count_recursive(n: u32) -> Result<u128, SequenceError> {
    let mut a: i128 = 0;
    for k in 0..n {
        let sign = if k % 2 == 0 { 2 } else { -2 };
        a = a.checked_mul(2).and_then(|v| v.checked_add(sign)).ok_or(SequenceError::Overflow)?;
    }
    Ok(a as u128)
}

/// Concatenated UDD pulse count: `m·2^n` Z pulses plus `a_n` X pulses.
pub fn cudd_count(m: u64, n: u32) -> Result<u128, SequenceError> {
    if m == 0 {
        return Err(SequenceError::InvalidArgument("CUDD needs m >= 1".into()));
    }
    let z = (m as u128).checked_mul(1u128.checked_shl(n).filter(|_| n < 127).ok_or(SequenceError::Overflow)?);
    z.and_then(|z| z.checked_add(x_pulse_count(n).ok()?)).ok_or(SequenceError::Overflow)
}

/// Approximate UDD² count `n(n+1)³ + n`.
pub fn udd2_count(n: u64) -> Result<u128, SequenceError> {
    let n = n as u128;
    (n + 1)
        .checked_pow(3)
        .and_then(|c| c.checked_mul(n))
        .and_then(|c| c.checked_add(n))
        .ok_or(SequenceError::Overflow)
}

/// Nominal CDD cost `4^m`.
pub fn cdd_count_estimate(m: u32) -> Result<u128, SequenceError> {
    4u128.checked_pow(m).ok_or(SequenceError::Overflow)
}
