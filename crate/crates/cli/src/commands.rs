use std::fs;
use std::io::Write;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use ddforge::analysis::{
    classify_cudd_branch, compare_at, count_compare, crossover as find_crossover, fmt_float, order_scan,
    write_scan_csv, Functional, TimeGrid,
};
use ddforge::bath::{alpha, build_model, BathOperators, Preset};
use ddforge::effective::{effective_hamiltonian, magnus_cdd_predict, EffectiveError};
use ddforge::linalg;
use ddforge::pauli::PauliAxis;
use ddforge::sequence::{cdd_xx, commensurate_grid, Commensurability, Family, PulseSequence};

use crate::config::RunConfig;
use crate::error::CliError;
use crate::family::{self, FamilyParams};

/// Branch-classification tolerance on fitted slopes.
const SLOPE_TOL: f64 = 0.25;

fn meta_line(command: &str, cfg: &RunConfig) -> Option<String> {
    if cfg.no_meta() {
        return None;
    }
    let now = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    Some(format!("ddforge {} {command} config={} unix_time={now}", env!("CARGO_PKG_VERSION"), cfg.to_json()))
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    fs::write(path, bytes).map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))
}

/// Writes to `--out` if given, otherwise to stdout.
fn emit(cfg: &RunConfig, bytes: &[u8]) -> Result<(), CliError> {
    match &cfg.out {
        Some(p) => write_file(p, bytes),
        None => std::io::stdout().write_all(bytes).map_err(CliError::from),
    }
}

fn selected_family(cfg: &RunConfig) -> Result<Family, CliError> {
    let name = cfg
        .family
        .as_deref()
        .ok_or_else(|| CliError::Usage(format!("missing family; expected one of {}", family::NAMES)))?;
    family::build(name, &FamilyParams::from_config(cfg), cfg.preset)
}

fn model(cfg: &RunConfig, default_preset: Preset) -> Result<BathOperators, CliError> {
    Ok(build_model(&cfg.model_spec(default_preset))?)
}

pub fn gen(cfg: &RunConfig) -> Result<(), CliError> {
    let fam = selected_family(cfg)?;
    let seq = fam.build(cfg.t.unwrap_or(1.0))?;
    if let Some(p) = &cfg.out {
        write_file(p, seq.to_json().as_bytes())?;
    }
    println!("family: {}", fam.tag());
    println!(
        "pulses: {} (X {}, Y {}, Z {})",
        seq.pulse_count(),
        seq.count_axis(PauliAxis::X),
        seq.count_axis(PauliAxis::Y),
        seq.count_axis(PauliAxis::Z)
    );
    match commensurate_grid(&seq) {
        Commensurability::Grid(d) => println!("grid: D={d}"),
        Commensurability::NotCommensurate => println!("grid: not commensurate"),
    }
    Ok(())
}

pub fn order(cfg: &RunConfig) -> Result<(), CliError> {
    let fam = selected_family(cfg)?;
    let ops = model(cfg, Preset::Generic)?;
    let grid = TimeGrid::log_spaced(cfg.at_min.unwrap_or(1e-3), cfg.at_max.unwrap_or(1e-2), cfg.points.unwrap_or(8))?;
    let functional = cfg.functional.unwrap_or(Functional::Total);
    let scan = order_scan(&fam, &ops, &grid, functional, cfg.jobs.unwrap_or(0))?;
    if let Some(p) = &cfg.out {
        let mut buf = Vec::new();
        write_scan_csv(&mut buf, &scan, meta_line("order", cfg).as_deref())?;
        write_file(p, &buf)?;
    }
    let mut summary = scan.summary();
    if let (Family::Cudd { m, n }, Some(s)) = (&fam, scan.fit.slope) {
        summary.branch = Some(classify_cudd_branch(*m, *n, s, SLOPE_TOL));
    }
    let json = serde_json::to_string_pretty(&summary).expect("summary serializes");
    if let Some(p) = &cfg.summary {
        write_file(p, format!("{json}\n").as_bytes())?;
    }
    println!("{json}");
    Ok(())
}

pub fn counts(cfg: &RunConfig) -> Result<(), CliError> {
    let table = count_compare(cfg.m_max.unwrap_or(6))?;
    let mut buf = Vec::new();
    table.write_csv(&mut buf)?;
    emit(cfg, &buf)
}

pub fn crossover(cfg: &RunConfig) -> Result<(), CliError> {
    let n_max = cfg.n_max.unwrap_or(64);
    let n = find_crossover(n_max)?;
    println!("{n}");
    println!("(n+1)^3 = {} <= 2^n = {}", (n as u128 + 1).pow(3), 1u128 << n);
    Ok(())
}

pub fn predict_magnus(cfg: &RunConfig) -> Result<(), CliError> {
    let ops = model(cfg, Preset::PureDephasing)?;
    let a = alpha(&ops);
    if a == 0.0 {
        return Err(CliError::Numeric("all bath couplings vanish".into()));
    }
    let at0 = cfg.tau0.unwrap_or(0.05);
    if !(at0.is_finite() && at0 > 0.0) {
        return Err(CliError::Usage(format!("--tau0 must be positive, got {at0}")));
    }
    let levels = cfg.level.unwrap_or(3);
    let tau0 = at0 / a;
    let mut out = Vec::new();
    if let Some(m) = meta_line("predict-magnus", cfg) {
        writeln!(out, "# {m}")?;
    }
    writeln!(out, "level,tau,alpha_tau,predicted_az_norm,extracted_az_norm,relative_deviation")?;
    for level in 0..=levels {
        let pred = magnus_cdd_predict(ops.a0(), ops.az(), tau0, level);
        let p_norm = linalg::spectral_norm(&pred.az);
        let seq = cdd_xx(level, &PulseSequence::free(pred.tau)?, pred.tau)?;
        let (e_norm, dev) = match effective_hamiltonian(&seq, &ops) {
            Ok(eff) => {
                let e = linalg::spectral_norm(eff.az());
                let d = linalg::spectral_norm(&(eff.az() - &pred.az));
                (fmt_float(e), if e > 0.0 { fmt_float(d / e) } else { String::new() })
            }
            Err(EffectiveError::BranchAmbiguity { .. }) => (String::new(), String::new()),
            Err(e) => return Err(CliError::Numeric(e.to_string())),
        };
        writeln!(out, "{level},{},{},{},{e_norm},{dev}", fmt_float(pred.tau), fmt_float(a * pred.tau), fmt_float(p_norm))?;
    }
    emit(cfg, &out)
}

pub fn compare(cfg: &RunConfig) -> Result<(), CliError> {
    let ops = model(cfg, Preset::Generic)?;
    let a = alpha(&ops);
    if a == 0.0 {
        return Err(CliError::Numeric("all bath couplings vanish".into()));
    }
    let at = cfg.at.unwrap_or(1e-2);
    if !(at > 0.0 && at < 1.0) {
        return Err(CliError::Numeric(format!("α·t = {at} must lie in (0, 1)")));
    }
    let families = match &cfg.families {
        Some(specs) => specs.iter().map(|s| family::parse_spec(s, cfg.preset)).collect::<Result<Vec<_>, _>>()?,
        None => {
            let m = cfg.m.unwrap_or(2);
            if m == 0 {
                return Err(CliError::Usage("--m must be at least 1".into()));
            }
            vec![
                Family::CddFull { level: m as u32, base: Box::new(Family::Free) },
                Family::Cudd { m, n: m as u32 },
                Family::Udd2Approx { n: m },
            ]
        }
    };
    let functional = cfg.functional.unwrap_or(Functional::Total);
    let rows = compare_at(&families, &ops, at / a, functional)?;
    let mut out = Vec::new();
    if let Some(m) = meta_line("compare", cfg) {
        writeln!(out, "# {m}")?;
    }
    writeln!(out, "family,param,pulses,alpha_t,E_flip,E_dephase,E_total,{functional}")?;
    for (fam, (_, p, v)) in families.iter().zip(rows) {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            fam.name(),
            fam.params(),
            p.pulses,
            fmt_float(p.alpha_t),
            fmt_float(p.flip),
            fmt_float(p.dephase),
            fmt_float(p.total),
            fmt_float(v)
        )?;
    }
    emit(cfg, &out)
}
