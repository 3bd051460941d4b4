//! Pulse schedules: ideal instantaneous π pulses placed at fractions of a
//! total duration, with exact rational instants wherever the construction
//! allows.
//!
//! Sequence expressions such as `p X p X` are operator products: the
//! rightmost factor acts first. The generators translate them into time
//! order, so `p_{k+1} = p_k X p_k X` starts with an X pulse at instant 0.

mod approx;
mod counts;
mod generators;
mod instant;
mod json;

use std::fmt;

use num_integer::Integer;
use num_rational::Ratio;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::pauli::PauliAxis;

pub use approx::{d_approx, d_approx_exact, udd2_approx, udd2_outer_grid, udd2_outer_instant};
pub use counts::{
    cdd_count_estimate, cudd_count, udd2_count, x_pulse_count, x_pulse_count_recursive,
};
pub use generators::{
    cdd_full, cdd_xx, cpmg, cpmg_udd, cudd, icpmg, pdd, spin_echo, udd_instants, udd_sequence,
};
pub use instant::{Instant, RationalInstant, COINCIDENCE_EPS};
pub use json::{PulseRecord, ScheduleFile};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SequenceError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("instant {0} outside [0, 1]")]
    InvalidInstant(String),
    #[error("d_approx is defined on [0, 1], got {0}")]
    Domain(String),
    #[error("exact instant arithmetic overflowed 64-bit denominators")]
    Overflow,
    #[error("pulses out of time order at {0}")]
    Unordered(String),
    #[error("identity pulse at {0} in an emitted schedule")]
    IdentityPulse(String),
    #[error("coincident pulses at {0} were not merged")]
    CoincidentPulses(String),
    #[error("family `{0}` cannot be rebuilt")]
    NotBuildable(String),
    #[error("schedule json: {0}")]
    Json(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pulse {
    pub instant: Instant,
    pub axis: PauliAxis,
}

impl Pulse {
    pub fn new(instant: Instant, axis: PauliAxis) -> Self {
        Pulse { instant, axis }
    }

    pub fn t_frac(&self) -> f64 {
        self.instant.to_f64()
    }
}

/// How a schedule was produced. Serialized as the `family` object of the
/// schedule file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Family {
    Free,
    SpinEcho { axis: PauliAxis },
    Cpmg { axis: PauliAxis },
    Pdd { n: usize, axis: PauliAxis },
    Icpmg { cycles: usize, axis: PauliAxis },
    Udd { n: usize, axis: PauliAxis },
    CddFull { level: u32, base: Box<Family> },
    CddXx { level: u32, base: Box<Family> },
    Cudd { m: usize, n: u32 },
    CpmgUdd { m: usize, cycles: usize },
    Udd2Approx { n: usize },
    Custom,
}

impl Family {
    /// Builds the schedule of this family with total duration `t`.
    pub fn build(&self, t: f64) -> Result<PulseSequence, SequenceError> {
        match self {
            Family::Free => PulseSequence::free(t),
            Family::SpinEcho { axis } => spin_echo(t, *axis),
            Family::Cpmg { axis } => cpmg(t, *axis),
            Family::Pdd { n, axis } => pdd(*n, t, *axis),
            Family::Icpmg { cycles, axis } => icpmg(*cycles, t, *axis),
            Family::Udd { n, axis } => udd_sequence(*n, t, *axis),
            Family::CddFull { level, base } => cdd_full(*level, &base.build(t)?, t),
            Family::CddXx { level, base } => cdd_xx(*level, &base.build(t)?, t),
            Family::Cudd { m, n } => cudd(*m, *n, t),
            Family::CpmgUdd { m, cycles } => cpmg_udd(*m, *cycles, t),
            Family::Udd2Approx { n } => udd2_approx(*n, t),
            Family::Custom => Err(SequenceError::NotBuildable("custom".into())),
        }
    }

    /// Family name as used in schedule files, e.g. `udd`.
    pub fn name(&self) -> &'static str {
        match self {
            Family::Free => "free",
            Family::SpinEcho { .. } => "spin_echo",
            Family::Cpmg { .. } => "cpmg",
            Family::Pdd { .. } => "pdd",
            Family::Icpmg { .. } => "icpmg",
            Family::Udd { .. } => "udd",
            Family::CddFull { .. } => "cdd_full",
            Family::CddXx { .. } => "cdd_xx",
            Family::Cudd { .. } => "cudd",
            Family::CpmgUdd { .. } => "cpmg_udd",
            Family::Udd2Approx { .. } => "udd2_approx",
            Family::Custom => "custom",
        }
    }

    /// Parameters as `key=value` pairs joined by `;`; never contains commas.
    pub fn params(&self) -> String {
        match self {
            Family::Free | Family::Custom => String::new(),
            Family::SpinEcho { axis } | Family::Cpmg { axis } => format!("axis={axis}"),
            Family::Pdd { n, axis } | Family::Udd { n, axis } => format!("n={n};axis={axis}"),
            Family::Icpmg { cycles, axis } => format!("c={cycles};axis={axis}"),
            Family::CddFull { level, base } | Family::CddXx { level, base } => {
                format!("level={level};base={}", base.tag())
            }
            Family::Cudd { m, n } => format!("m={m};n={n}"),
            Family::CpmgUdd { m, cycles } => format!("m={m};c={cycles}"),
            Family::Udd2Approx { n } => format!("n={n}"),
        }
    }

    /// Short tag, e.g. `udd(n=3;axis=Z)`.
    pub fn tag(&self) -> String {
        match self {
            Family::Free | Family::Custom => self.name().into(),
            _ => format!("{}({})", self.name(), self.params()),
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.tag())
    }
}

/// A merged, time-ordered pulse schedule.
#[derive(Debug, Clone, PartialEq)]
pub struct PulseSequence {
    label: String,
    total_duration: f64,
    family: Family,
    pulses: Vec<Pulse>,
}

impl PulseSequence {
    /// Validates and wraps an explicit pulse list.
    pub fn new(
        label: impl Into<String>,
        total_duration: f64,
        family: Family,
        pulses: Vec<Pulse>,
    ) -> Result<Self, SequenceError> {
        check_duration(total_duration)?;
        for p in &pulses {
            if !(0.0..=1.0).contains(&p.t_frac()) {
                return Err(SequenceError::InvalidInstant(p.instant.to_string()));
            }
            if p.axis.is_identity() {
                return Err(SequenceError::IdentityPulse(p.instant.to_string()));
            }
        }
        for w in pulses.windows(2) {
            if w[0].instant.coincides_with(&w[1].instant) {
                return Err(SequenceError::CoincidentPulses(w[1].instant.to_string()));
            }
            if w[0].instant.cmp_time(&w[1].instant).is_gt() {
                return Err(SequenceError::Unordered(w[1].instant.to_string()));
            }
        }
        Ok(PulseSequence { label: label.into(), total_duration, family, pulses })
    }

    /// Free evolution over `t`, no pulses.
    pub fn free(t: f64) -> Result<Self, SequenceError> {
        PulseSequence::new("free", t, Family::Free, Vec::new())
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn total_duration(&self) -> f64 {
        self.total_duration
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn pulses(&self) -> &[Pulse] {
        &self.pulses
    }

    pub fn pulse_count(&self) -> usize {
        self.pulses.len()
    }

    pub fn count_axis(&self, axis: PauliAxis) -> usize {
        self.pulses.iter().filter(|p| p.axis == axis).count()
    }

    /// Pulse times in units of the total duration.
    pub fn instants(&self) -> Vec<f64> {
        self.pulses.iter().map(Pulse::t_frac).collect()
    }

    /// Absolute pulse times.
    pub fn times(&self) -> Vec<f64> {
        self.pulses.iter().map(|p| p.t_frac() * self.total_duration).collect()
    }

    pub fn is_exact(&self) -> bool {
        self.pulses.iter().all(|p| p.instant.is_exact())
    }

    /// Same pattern with a different total duration.
    pub fn with_duration(&self, t: f64) -> Result<Self, SequenceError> {
        check_duration(t)?;
        Ok(PulseSequence { total_duration: t, ..self.clone() })
    }

    /// Same instants and axes, ignoring label, duration and family.
    pub fn same_schedule(&self, other: &PulseSequence) -> bool {
        self.pulses.len() == other.pulses.len()
            && self
                .pulses
                .iter()
                .zip(&other.pulses)
                .all(|(a, b)| a.axis == b.axis && a.instant.coincides_with(&b.instant))
    }
}

/// Outcome of the commensurability analysis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Commensurability {
    /// Every instant is an integer multiple of `1/D`, `D` minimal.
    Grid(u64),
    NotCommensurate,
}

impl fmt::Display for Commensurability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Commensurability::Grid(d) => write!(f, "D={d}"),
            Commensurability::NotCommensurate => f.write_str("not commensurate"),
        }
    }
}

/// Smallest `D` such that every pulse instant is `k/D`.
pub fn commensurate_grid(seq: &PulseSequence) -> Commensurability {
    let mut grid: u64 = 1;
    for p in seq.pulses() {
        match p.instant {
            Instant::Exact(r) => grid = grid.lcm(&r.den()),
            Instant::Approx(_) => return Commensurability::NotCommensurate,
        }
    }
    Commensurability::Grid(grid)
}

pub(crate) fn check_duration(t: f64) -> Result<(), SequenceError> {
    if t.is_finite() && t > 0.0 {
        Ok(())
    } else {
        Err(SequenceError::InvalidArgument(format!("total duration must be positive, got {t}")))
    }
}

/// Accumulates pulses in time order and merges coincident ones in the
/// Pauli group.
#[derive(Debug, Default)]
pub(crate) struct ScheduleBuilder {
    pulses: Vec<Pulse>,
}

impl ScheduleBuilder {
    pub(crate) fn new() -> Self {
        Self::default()
    }

    pub(crate) fn pulse(&mut self, at: Instant, axis: PauliAxis) -> Result<(), SequenceError> {
        if axis.is_identity() {
            return Ok(());
        }
        if let Some(last) = self.pulses.last_mut() {
            if last.instant.coincides_with(&at) {
                let merged = last.axis.then(axis);
                if merged.is_identity() {
                    self.pulses.pop();
                } else {
                    last.axis = merged;
                    if !last.instant.is_exact() && at.is_exact() {
                        last.instant = at;
                    }
                }
                return Ok(());
            }
            if last.instant.cmp_time(&at).is_gt() {
                return Err(SequenceError::Unordered(at.to_string()));
            }
        }
        self.pulses.push(Pulse::new(at, axis));
        Ok(())
    }

    pub(crate) fn exact_pulse(&mut self, at: Ratio<u64>, axis: PauliAxis) -> Result<(), SequenceError> {
        self.pulse(Instant::Exact(RationalInstant::from_ratio(at)?), axis)
    }

    /// Places a sub-schedule on `[offset, offset + scale]`.
    pub(crate) fn block(
        &mut self,
        offset: Ratio<u64>,
        scale: Ratio<u64>,
        pulses: &[Pulse],
    ) -> Result<(), SequenceError> {
        for p in pulses {
            self.pulse(p.instant.affine(offset, scale)?, p.axis)?;
        }
        Ok(())
    }

    pub(crate) fn into_pulses(self) -> Vec<Pulse> {
        self.pulses
    }

    pub(crate) fn finish(
        self,
        label: impl Into<String>,
        t: f64,
        family: Family,
    ) -> Result<PulseSequence, SequenceError> {
        PulseSequence::new(label, t, family, self.pulses)
    }
}
