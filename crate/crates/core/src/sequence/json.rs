//! Schedule file format.
//!
//! ```json
//! {"label": "cpmg(axis=X)", "total_duration": 1.0,
//!  "family": {"family": "cpmg", "axis": "X"},
//!  "pulses": [{"axis": "X", "num": 1, "den": 4, "t_frac": 0.25}, ...]}
//! ```
//!
//! `num`/`den` are present only for exact instants.

use serde::{Deserialize, Serialize};

use super::{Family, Instant, Pulse, PulseSequence, SequenceError};
use crate::pauli::PauliAxis;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PulseRecord {
    pub axis: PauliAxis,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub num: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub den: Option<u64>,
    pub t_frac: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScheduleFile {
    pub label: String,
    pub total_duration: f64,
    pub family: Family,
    pub pulses: Vec<PulseRecord>,
}

impl From<&PulseSequence> for ScheduleFile {
    fn from(seq: &PulseSequence) -> Self {
        let pulses = seq
            .pulses()
            .iter()
            .map(|p| {
                let exact = p.instant.as_rational();
                PulseRecord {
                    axis: p.axis,
                    num: exact.map(|r| r.num()),
                    den: exact.map(|r| r.den()),
                    t_frac: p.t_frac(),
                }
            })
            .collect();
        ScheduleFile {
            label: seq.label().to_string(),
            total_duration: seq.total_duration(),
            family: seq.family().clone(),
            pulses,
        }
    }
}

impl TryFrom<ScheduleFile> for PulseSequence {
    type Error = SequenceError;

    fn try_from(file: ScheduleFile) -> Result<Self, Self::Error> {
        let pulses = file
            .pulses
            .iter()
            .map(|r| {
                let instant = match (r.num, r.den) {
                    (Some(num), Some(den)) => {
                        let i = Instant::exact(num, den)?;
                        if (i.to_f64() - r.t_frac).abs() > 1e-12 {
                            return Err(SequenceError::Json(format!(
                                "t_frac {} disagrees with {num}/{den}",
                                r.t_frac
                            )));
                        }
                        i
                    }
                    (None, None) => Instant::approx(r.t_frac)?,
                    _ => return Err(SequenceError::Json("num and den must appear together".into())),
                };
                Ok(Pulse::new(instant, r.axis))
            })
            .collect::<Result<Vec<_>, _>>()?;
        PulseSequence::new(file.label, file.total_duration, file.family, pulses)
    }
}

impl PulseSequence {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&ScheduleFile::from(self)).expect("schedule serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, SequenceError> {
        let file: ScheduleFile =
            serde_json::from_str(text).map_err(|e| SequenceError::Json(e.to_string()))?;
        PulseSequence::try_from(file)
    }
}
