//! Family selection from a name plus parameters, either from flags or from a
//! compact spec string such as `cudd:m=2,n=2` or `cdd:level=2,base=udd:n=3`.

use ddforge::bath::Preset;
use ddforge::pauli::PauliAxis;
use ddforge::sequence::Family;

use crate::config::RunConfig;
use crate::error::CliError;

pub const NAMES: &str = "free|none, spin_echo, cpmg, pdd, icpmg, udd, cdd, cdd_xx, cudd, cpmg_udd, udd2";

#[derive(Debug, Clone, Default)]
pub struct FamilyParams {
    pub n: Option<usize>,
    pub m: Option<usize>,
    pub c: Option<usize>,
    pub level: Option<u32>,
    pub axis: Option<String>,
    pub base: Option<String>,
}

impl FamilyParams {
    pub fn from_config(cfg: &RunConfig) -> Self {
        FamilyParams {
            n: cfg.n,
            m: cfg.m,
            c: cfg.c,
            level: cfg.level,
            axis: cfg.axis.clone(),
            base: cfg.base.clone(),
        }
    }
}

fn need<T>(v: Option<T>, what: &str, family: &str) -> Result<T, CliError> {
    v.ok_or_else(|| CliError::Usage(format!("family {family} needs --{what}")))
}

/// Pulse axis: explicit value, or X under pure dephasing (Z pulses commute
/// with a σ_z coupling and do nothing there) and Z otherwise.
pub fn resolve_axis(axis: Option<&str>, preset: Option<Preset>) -> Result<PauliAxis, CliError> {
    match axis.map(str::trim) {
        None | Some("auto") => Ok(if preset == Some(Preset::PureDephasing) { PauliAxis::X } else { PauliAxis::Z }),
        Some(s) => match s.parse::<PauliAxis>() {
            Ok(PauliAxis::I) | Err(_) => Err(CliError::Usage(format!("axis must be X, Y, Z or auto, got {s:?}"))),
            Ok(a) => Ok(a),
        },
    }
}

pub fn build(name: &str, p: &FamilyParams, preset: Option<Preset>) -> Result<Family, CliError> {
    let axis = || resolve_axis(p.axis.as_deref(), preset);
    let base = || -> Result<Box<Family>, CliError> {
        Ok(Box::new(match p.base.as_deref() {
            None => Family::Free,
            Some(s) => parse_spec(s, preset)?,
        }))
    };
    let positive = |v: usize, what: &str| {
        if v == 0 {
            Err(CliError::Usage(format!("--{what} must be at least 1")))
        } else {
            Ok(v)
        }
    };
    Ok(match name.trim().to_ascii_lowercase().as_str() {
        "free" | "none" => Family::Free,
        "spin_echo" | "echo" => Family::SpinEcho { axis: axis()? },
        "cpmg" => Family::Cpmg { axis: axis()? },
        "pdd" => Family::Pdd { n: positive(need(p.n, "n", name)?, "n")?, axis: axis()? },
        "icpmg" => Family::Icpmg { cycles: positive(p.c.unwrap_or(1), "c")?, axis: axis()? },
        "udd" => Family::Udd { n: positive(need(p.n, "n", name)?, "n")?, axis: axis()? },
        "cdd" | "cdd_full" => Family::CddFull { level: need(p.level, "level", name)?, base: base()? },
        "cdd_xx" => Family::CddXx { level: need(p.level.or(p.n.map(|n| n as u32)), "level", name)?, base: base()? },
        "cudd" => Family::Cudd {
            m: positive(need(p.m, "m", name)?, "m")?,
            n: need(p.n, "n", name)? as u32,
        },
        "cpmg_udd" | "icpmg_udd" => Family::CpmgUdd {
            m: positive(need(p.m, "m", name)?, "m")?,
            cycles: positive(p.c.unwrap_or(1), "c")?,
        },
        "udd2" | "udd2_approx" => Family::Udd2Approx { n: positive(need(p.n, "n", name)?, "n")? },
        other => return Err(CliError::Usage(format!("unknown family {other:?}; expected one of {NAMES}"))),
    })
}

/// `name[:key=value,...]`. A `base=` value extends to the end of the string,
/// so it may itself carry parameters.
pub fn parse_spec(spec: &str, preset: Option<Preset>) -> Result<Family, CliError> {
    let (name, rest) = spec.split_once(':').unwrap_or((spec, ""));
    let mut p = FamilyParams::default();
    let mut rest = rest.trim();
    while !rest.is_empty() {
        if let Some(b) = rest.strip_prefix("base=") {
            p.base = Some(b.to_string());
            break;
        }
        let (kv, tail) = rest.split_once(',').unwrap_or((rest, ""));
        rest = tail.trim();
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("expected key=value in family spec, got {kv:?}")))?;
        let int = || v.trim().parse::<usize>().map_err(|_| CliError::Usage(format!("{k}={v:?} is not an integer")));
        match k.trim() {
            "n" => p.n = Some(int()?),
            "m" => p.m = Some(int()?),
            "c" | "cycles" => p.c = Some(int()?),
            "level" => p.level = Some(int()? as u32),
            "axis" => p.axis = Some(v.trim().to_string()),
            other => return Err(CliError::Usage(format!("unknown family parameter {other:?}"))),
        }
    }
    build(name, &p, preset)
}
