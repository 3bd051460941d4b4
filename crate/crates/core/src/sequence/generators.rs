use std::f64::consts::PI;

use num_rational::Ratio;

use super::instant::ratio;
use super::{check_duration, Family, Instant, Pulse, PulseSequence, ScheduleBuilder, SequenceError};
use crate::pauli::PauliAxis;

/// Optimal instants `sin²(πj / (2(n+1)))`, `j = 1..=n`, as fractions of the
/// total duration.
///
/// The upper half is mirrored from the lower half so that
/// `δ_j + δ_{n+1-j} == 1` holds exactly in floating point.
pub fn udd_instants(n: usize) -> Vec<f64> {
    let denom = 2.0 * (n as f64 + 1.0);
    let lower = |j: usize| (PI * j as f64 / denom).sin().powi(2);
    (1..=n)
        .map(|j| match (2 * j).cmp(&(n + 1)) {
            std::cmp::Ordering::Less => lower(j),
            std::cmp::Ordering::Equal => 0.5,
            std::cmp::Ordering::Greater => 1.0 - lower(n + 1 - j),
        })
        .collect()
}

fn check_axis(axis: PauliAxis) -> Result<(), SequenceError> {
    if axis.is_identity() {
        Err(SequenceError::InvalidArgument("pulse axis must be X, Y or Z".into()))
    } else {
        Ok(())
    }
}

fn check_positive(name: &str, v: usize) -> Result<(), SequenceError> {
    if v == 0 {
        Err(SequenceError::InvalidArgument(format!("{name} must be at least 1")))
    } else {
        Ok(())
    }
}

fn exact_schedule(
    fracs: impl IntoIterator<Item = (u64, u64)>,
    axis: PauliAxis,
) -> Result<Vec<Pulse>, SequenceError> {
    fracs
        .into_iter()
        .map(|(num, den)| Ok(Pulse::new(Instant::exact(num, den)?, axis)))
        .collect()
}

/// `n` pulses about `axis` at the optimized instants. Instants are exact for
/// `n <= 2` (spin echo and CPMG) and floating point otherwise.
pub fn udd_sequence(n: usize, t: f64, axis: PauliAxis) -> Result<PulseSequence, SequenceError> {
    check_positive("n", n)?;
    check_duration(t)?;
    check_axis(axis)?;
    let pulses = match n {
        1 => exact_schedule([(1, 2)], axis)?,
        2 => exact_schedule([(1, 4), (3, 4)], axis)?,
        _ => udd_instants(n)
            .into_iter()
            .map(|x| Ok(Pulse::new(Instant::approx(x)?, axis)))
            .collect::<Result<_, SequenceError>>()?,
    };
    let family = Family::Udd { n, axis };
    PulseSequence::new(family.tag(), t, family, pulses)
}

/// `f_τ π f_τ`.
pub fn spin_echo(t: f64, axis: PauliAxis) -> Result<PulseSequence, SequenceError> {
    check_duration(t)?;
    check_axis(axis)?;
    let family = Family::SpinEcho { axis };
    PulseSequence::new(family.tag(), t, family, exact_schedule([(1, 2)], axis)?)
}

/// `f_τ π f_2τ π f_τ` with `t = 4τ`.
pub fn cpmg(t: f64, axis: PauliAxis) -> Result<PulseSequence, SequenceError> {
    check_duration(t)?;
    check_axis(axis)?;
    let family = Family::Cpmg { axis };
    PulseSequence::new(family.tag(), t, family, exact_schedule([(1, 4), (3, 4)], axis)?)
}

/// `f_τ (π f_τ)^n` with `t = (n+1)τ`.
pub fn pdd(n: usize, t: f64, axis: PauliAxis) -> Result<PulseSequence, SequenceError> {
    check_positive("n", n)?;
    check_duration(t)?;
    check_axis(axis)?;
    let den = n as u64 + 1;
    let family = Family::Pdd { n, axis };
    let pulses = exact_schedule((1..den).map(|j| (j, den)), axis)?;
    PulseSequence::new(family.tag(), t, family, pulses)
}

/// `(f_τ π f_τ)^{2c}` with `t = 4cτ`.
pub fn icpmg(cycles: usize, t: f64, axis: PauliAxis) -> Result<PulseSequence, SequenceError> {
    check_positive("cycles", cycles)?;
    check_duration(t)?;
    check_axis(axis)?;
    let den = 4 * cycles as u64;
    let family = Family::Icpmg { cycles, axis };
    let pulses = exact_schedule((1..=2 * cycles as u64).map(|k| (2 * k - 1, den)), axis)?;
    PulseSequence::new(family.tag(), t, family, pulses)
}

/// One concatenation step `p_{k+1} = p_k X p_k Z p_k X p_k Z`, in time
/// order Z, p, X, p, Z, p, X, p over quarters.
fn cdd_full_step(prev: &[Pulse]) -> Result<Vec<Pulse>, SequenceError> {
    let quarter = ratio(1, 4);
    let mut b = ScheduleBuilder::new();
    for (k, axis) in [PauliAxis::Z, PauliAxis::X, PauliAxis::Z, PauliAxis::X].into_iter().enumerate() {
        let offset = ratio(k as u64, 4);
        b.exact_pulse(offset, axis)?;
        b.block(offset, quarter, prev)?;
    }
    Ok(b.into_pulses())
}

/// One step `p_{k+1} = p_k X p_k X`: X, p, X, p over halves.
fn cdd_xx_step(prev: &[Pulse]) -> Result<Vec<Pulse>, SequenceError> {
    let half = ratio(1, 2);
    let mut b = ScheduleBuilder::new();
    b.exact_pulse(Ratio::from_integer(0), PauliAxis::X)?;
    b.block(Ratio::from_integer(0), half, prev)?;
    b.exact_pulse(half, PauliAxis::X)?;
    b.block(half, half, prev)?;
    Ok(b.into_pulses())
}

fn concatenate(
    level: u32,
    base: &PulseSequence,
    step: fn(&[Pulse]) -> Result<Vec<Pulse>, SequenceError>,
) -> Result<Vec<Pulse>, SequenceError> {
    let mut pulses = base.pulses().to_vec();
    for _ in 0..level {
        pulses = step(&pulses)?;
    }
    Ok(pulses)
}

/// Full XZ concatenation of `base` to `level` with total duration `t`.
/// Coincident pulses at block joints are merged; the remaining count is
/// `pulse_count()` of the result.
pub fn cdd_full(level: u32, base: &PulseSequence, t: f64) -> Result<PulseSequence, SequenceError> {
    check_duration(t)?;
    let pulses = concatenate(level, base, cdd_full_step)?;
    let family = Family::CddFull { level, base: Box::new(base.family().clone()) };
    PulseSequence::new(family.tag(), t, family, pulses)
}

/// X-only concatenation of `base` to `level`. Over free evolution, level 2
/// reproduces CPMG with X pulses.
pub fn cdd_xx(level: u32, base: &PulseSequence, t: f64) -> Result<PulseSequence, SequenceError> {
    check_duration(t)?;
    let pulses = concatenate(level, base, cdd_xx_step)?;
    let family = Family::CddXx { level, base: Box::new(base.family().clone()) };
    PulseSequence::new(family.tag(), t, family, pulses)
}

/// Concatenated UDD: `n` X-type concatenation levels over UDD blocks of `m`
/// Z pulses, each block lasting `t / 2^n`.
pub fn cudd(m: usize, n: u32, t: f64) -> Result<PulseSequence, SequenceError> {
    check_positive("m", m)?;
    check_duration(t)?;
    let block = t / 2f64.powi(n as i32);
    let base = udd_sequence(m, block, PauliAxis::Z)?;
    let pulses = concatenate(n, &base, cdd_xx_step)?;
    let family = Family::Cudd { m, n };
    PulseSequence::new(family.tag(), t, family, pulses)
}

/// `(p_UDD X p_UDD)^{2c}`: `4c` UDD-`m` blocks of length `t/(4c)` with X
/// pulses between paired blocks. `c = 1` is the single CPMG-UDD cycle.
pub fn cpmg_udd(m: usize, cycles: usize, t: f64) -> Result<PulseSequence, SequenceError> {
    check_positive("m", m)?;
    check_positive("cycles", cycles)?;
    check_duration(t)?;
    let base = udd_sequence(m, t, PauliAxis::Z)?;
    let blocks = 4 * cycles as u64;
    let width = ratio(1, blocks);
    let mut b = ScheduleBuilder::new();
    for k in 0..2 * cycles as u64 {
        b.block(ratio(2 * k, blocks), width, base.pulses())?;
        b.exact_pulse(ratio(2 * k + 1, blocks), PauliAxis::X)?;
        b.block(ratio(2 * k + 1, blocks), width, base.pulses())?;
    }
    let family = Family::CpmgUdd { m, cycles };
    b.finish(family.tag(), t, family)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sequence::{commensurate_grid, Commensurability};

    fn fracs(seq: &PulseSequence) -> Vec<(u64, u64, PauliAxis)> {
        seq.pulses()
            .iter()
            .map(|p| {
                let r = p.instant.as_rational().expect("exact instant");
                (r.num(), r.den(), p.axis)
            })
            .collect()
    }

    #[test]
    fn udd_instants_small_n() {
        assert!(udd_instants(0).is_empty());
        assert_eq!(udd_instants(1), vec![0.5]);
        let two = udd_instants(2);
        assert!((two[0] - 0.25).abs() < 1e-15 && (two[1] - 0.75).abs() < 1e-15);
        let three = udd_instants(3);
        let expect = [0.146447, 0.5, 0.853553];
        for (a, b) in three.iter().zip(expect) {
            assert!((a - b).abs() < 1e-6);
        }
    }

    #[test]
    fn udd_four_matches_formula() {
        let got = udd_sequence(4, 2.0, PauliAxis::Z).unwrap();
        let want = [PI / 10.0, PI / 5.0, 3.0 * PI / 10.0, 2.0 * PI / 5.0].map(|a| a.sin().powi(2));
        for (p, w) in got.pulses().iter().zip(want) {
            assert!((p.t_frac() - w).abs() < 1e-15);
        }
        assert!((got.times()[0] - 2.0 * want[0]).abs() < 1e-15);
    }

    #[test]
    fn udd_low_orders_are_exact() {
        let cp = udd_sequence(2, 1.0, PauliAxis::Z).unwrap();
        assert_eq!(fracs(&cp), vec![(1, 4, PauliAxis::Z), (3, 4, PauliAxis::Z)]);
        let se = udd_sequence(1, 1.0, PauliAxis::Z).unwrap();
        assert_eq!(fracs(&se), vec![(1, 2, PauliAxis::Z)]);
        assert!(!udd_sequence(3, 1.0, PauliAxis::Z).unwrap().is_exact());
    }

    #[test]
    fn udd_argument_errors() {
        assert!(udd_sequence(0, 1.0, PauliAxis::Z).is_err());
        assert!(udd_sequence(2, -1.0, PauliAxis::Z).is_err());
        assert!(udd_sequence(2, 1.0, PauliAxis::I).is_err());
    }

    #[test]
    fn classic_instants() {
        let z = PauliAxis::Z;
        assert_eq!(fracs(&cpmg(1.0, z).unwrap()), vec![(1, 4, z), (3, 4, z)]);
        assert_eq!(fracs(&pdd(3, 1.0, z).unwrap()), vec![(1, 4, z), (1, 2, z), (3, 4, z)]);
        assert_eq!(
            fracs(&icpmg(2, 1.0, z).unwrap()),
            vec![(1, 8, z), (3, 8, z), (5, 8, z), (7, 8, z)]
        );
        assert_eq!(fracs(&spin_echo(1.0, z).unwrap()), vec![(1, 2, z)]);
    }

    #[test]
    fn cdd_levels_zero_and_one() {
        let free = PulseSequence::free(1.0).unwrap();
        assert_eq!(cdd_full(0, &free, 1.0).unwrap().pulse_count(), 0);
        let one = cdd_full(1, &free, 1.0).unwrap();
        use PauliAxis::{X, Z};
        assert_eq!(fracs(&one), vec![(0, 1, Z), (1, 4, X), (1, 2, Z), (3, 4, X)]);
    }

    #[test]
    fn cdd_level_two_merges_joints() {
        let free = PulseSequence::free(1.0).unwrap();
        let two = cdd_full(2, &free, 1.0).unwrap();
        assert_eq!(two.pulse_count(), 14);
        assert_eq!(two.count_axis(PauliAxis::Y), 2);
    }

    #[test]
    fn cdd_xx_low_levels() {
        let free = PulseSequence::free(1.0).unwrap();
        let x = PauliAxis::X;
        assert_eq!(fracs(&cdd_xx(1, &free, 1.0).unwrap()), vec![(0, 1, x), (1, 2, x)]);
        let two = cdd_xx(2, &free, 1.0).unwrap();
        assert!(two.same_schedule(&cpmg(1.0, x).unwrap()));
    }

    #[test]
    fn cudd_counts() {
        let s = cudd(2, 1, 1.0).unwrap();
        assert_eq!((s.count_axis(PauliAxis::Z), s.count_axis(PauliAxis::X)), (4, 2));
        let s = cudd(3, 3, 1.0).unwrap();
        assert_eq!((s.count_axis(PauliAxis::Z), s.count_axis(PauliAxis::X)), (24, 6));
    }

    #[test]
    fn cpmg_udd_single_cycle() {
        use PauliAxis::{X, Z};
        let s = cpmg_udd(1, 1, 1.0).unwrap();
        assert_eq!(
            fracs(&s),
            vec![(1, 8, Z), (1, 4, X), (3, 8, Z), (5, 8, Z), (3, 4, X), (7, 8, Z)]
        );
        let s = cpmg_udd(2, 1, 1.0).unwrap();
        assert_eq!((s.count_axis(Z), s.count_axis(X)), (8, 2));
        let xs: Vec<f64> = s.pulses().iter().filter(|p| p.axis == X).map(|p| p.t_frac()).collect();
        assert_eq!(xs, vec![0.25, 0.75]);
        assert_eq!(commensurate_grid(&s), Commensurability::Grid(16));
    }

    #[test]
    fn grids() {
        assert_eq!(commensurate_grid(&cpmg(1.0, PauliAxis::Z).unwrap()), Commensurability::Grid(4));
        assert_eq!(
            commensurate_grid(&udd_sequence(3, 1.0, PauliAxis::Z).unwrap()),
            Commensurability::NotCommensurate
        );
    }
}
