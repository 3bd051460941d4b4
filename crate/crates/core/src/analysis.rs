//! Suppression-order fits, pulse-count economics and family comparisons.

use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;

use num_bigint::BigUint;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bath::{alpha, BathOperators};
use crate::effective::{effective_hamiltonian, EffectiveError, ErrorFunctionals};
use crate::sequence::{cdd_count_estimate, cudd_count, udd2_count, x_pulse_count, Family, SequenceError};

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("invalid time grid: {0}")]
    InvalidGrid(String),
    #[error("α·t_max = {0} must stay below 1")]
    OutOfRange(f64),
    #[error("all bath couplings vanish; αt is undefined")]
    ZeroCoupling,
    #[error("branch ambiguity at t = {t:e} (eigenphase {phase:.4}); shrink the grid")]
    BranchAmbiguity { t: f64, phase: f64 },
    #[error("at t = {t:e}: {source}")]
    Effective { t: f64, source: EffectiveError },
    #[error(transparent)]
    Sequence(#[from] SequenceError),
    #[error("no crossover for n <= {0}")]
    NotFound(u32),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("thread pool: {0}")]
    Pool(String),
}

/// Log-spaced durations in units of `1/α`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    alpha_t: Vec<f64>,
}

impl TimeGrid {
    pub const MIN_POINTS: usize = 4;

    pub fn new(alpha_t: Vec<f64>) -> Result<Self, AnalysisError> {
        if alpha_t.len() < Self::MIN_POINTS {
            return Err(AnalysisError::InvalidGrid(format!(
                "need at least {} points, got {}",
                Self::MIN_POINTS,
                alpha_t.len()
            )));
        }
        if alpha_t.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(AnalysisError::InvalidGrid("points must be positive and finite".into()));
        }
        if alpha_t.windows(2).any(|w| w[1] <= w[0]) {
            return Err(AnalysisError::InvalidGrid("points must be strictly increasing".into()));
        }
        Ok(TimeGrid { alpha_t })
    }

    /// `points` values from `lo` to `hi` inclusive, equally spaced in log.
    pub fn log_spaced(lo: f64, hi: f64, points: usize) -> Result<Self, AnalysisError> {
        if !(lo > 0.0 && hi > lo && hi.is_finite()) {
            return Err(AnalysisError::InvalidGrid(format!("bad range [{lo}, {hi}]")));
        }
        if points < 2 {
            return Err(AnalysisError::InvalidGrid("need at least two points".into()));
        }
        let (a, b) = (lo.ln(), hi.ln());
        let step = (b - a) / (points - 1) as f64;
        let mut v: Vec<f64> = (0..points).map(|k| (a + step * k as f64).exp()).collect();
        v[0] = lo;
        v[points - 1] = hi;
        Self::new(v)
    }

    pub fn alpha_t(&self) -> &[f64] {
        &self.alpha_t
    }

    pub fn len(&self) -> usize {
        self.alpha_t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alpha_t.is_empty()
    }

    pub fn max(&self) -> f64 {
        *self.alpha_t.last().expect("grid is never empty")
    }
}

impl Default for TimeGrid {
    /// Eight points over `αt ∈ [1e-3, 1e-2]`.
    fn default() -> Self {
        TimeGrid::log_spaced(1e-3, 1e-2, 8).expect("static grid")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Functional {
    Flip,
    Dephase,
    Total,
}

impl Functional {
    pub fn of(self, e: &ErrorFunctionals) -> f64 {
        match self {
            Functional::Flip => e.flip,
            Functional::Dephase => e.dephase,
            Functional::Total => e.total,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Functional::Flip => "flip",
            Functional::Dephase => "dephase",
            Functional::Total => "total",
        }
    }
}

impl fmt::Display for Functional {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Functional {
    type Err = AnalysisError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "flip" | "e_flip" => Ok(Functional::Flip),
            "dephase" | "e_dephase" => Ok(Functional::Dephase),
            "total" | "e_total" => Ok(Functional::Total),
            other => Err(AnalysisError::InvalidArgument(format!("unknown functional {other:?}"))),
        }
    }
}

/// Least-squares fit of `log E = slope·log t + intercept`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrderFit {
    /// `None` when some value of the functional is zero (or not finite).
    pub slope: Option<f64>,
    pub intercept: Option<f64>,
    #[serde(rename = "r2")]
    pub r_squared: Option<f64>,
    /// Local orders between consecutive grid points.
    #[serde(rename = "pairwise")]
    pub pairwise_orders: Vec<f64>,
    pub t_grid: Vec<f64>,
}

impl OrderFit {
    pub fn fit(t: &[f64], e: &[f64]) -> Result<Self, AnalysisError> {
        if t.len() != e.len() {
            return Err(AnalysisError::InvalidArgument("t and E lengths differ".into()));
        }
        if t.len() < 2 || t.windows(2).any(|w| w[0].partial_cmp(&w[1]) != Some(std::cmp::Ordering::Less)) || t.iter().any(|v| *v <= 0.0) {
            return Err(AnalysisError::InvalidGrid("t must be positive and strictly increasing".into()));
        }
        let t_grid = t.to_vec();
        if e.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Ok(OrderFit { slope: None, intercept: None, r_squared: None, pairwise_orders: vec![], t_grid });
        }
        let x: Vec<f64> = t.iter().map(|v| v.ln()).collect();
        let y: Vec<f64> = e.iter().map(|v| v.ln()).collect();
        let n = x.len() as f64;
        let mx = x.iter().sum::<f64>() / n;
        let my = y.iter().sum::<f64>() / n;
        let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
        let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
        let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
        let slope = sxy / sxx;
        let intercept = my - slope * mx;
        let r2 = if syy == 0.0 { 1.0 } else { (sxy * sxy / (sxx * syy)).clamp(0.0, 1.0) };
        let pairwise_orders = x.windows(2).zip(y.windows(2)).map(|(a, b)| (b[1] - b[0]) / (a[1] - a[0])).collect();
        Ok(OrderFit { slope: Some(slope), intercept: Some(intercept), r_squared: Some(r2), pairwise_orders, t_grid })
    }

    /// Whether the local orders, read from the smallest `t` upward, drift
    /// away from the fitted slope monotonically up to `tol`.
    pub fn pairwise_converges(&self, tol: f64) -> bool {
        let Some(s) = self.slope else { return false };
        let dev: Vec<f64> = self.pairwise_orders.iter().map(|p| (p - s).abs()).collect();
        dev.windows(2).all(|w| w[0] <= w[1] + tol)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanPoint {
    pub t: f64,
    pub alpha_t: f64,
    pub flip: f64,
    pub dephase: f64,
    pub total: f64,
    pub pulses: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrderScan {
    pub family: String,
    pub family_name: String,
    pub param: String,
    pub functional: Functional,
    pub alpha: f64,
    pub points: Vec<ScanPoint>,
    pub fit: OrderFit,
}

impl OrderScan {
    pub fn values(&self) -> Vec<f64> {
        self.points.iter().map(|p| self.functional.of(&p.functionals())).collect()
    }
}

impl ScanPoint {
    pub fn functionals(&self) -> ErrorFunctionals {
        ErrorFunctionals { flip: self.flip, dephase: self.dephase, total: self.total }
    }
}

/// Evaluates all three functionals of `family` under `ops` at `t` (absolute time).
pub fn evaluate(family: &Family, ops: &BathOperators, t: f64) -> Result<ScanPoint, AnalysisError> {
    let a = alpha(ops);
    let seq = family.build(t)?;
    let eff = effective_hamiltonian(&seq, ops).map_err(|e| match e {
        EffectiveError::BranchAmbiguity { phase } => AnalysisError::BranchAmbiguity { t, phase },
        source => AnalysisError::Effective { t, source },
    })?;
    let e = eff.error_functionals();
    Ok(ScanPoint { t, alpha_t: a * t, flip: e.flip, dephase: e.dephase, total: e.total, pulses: seq.pulse_count() })
}

/// Scans `family` over `grid` (in `αt` units) and fits the order of
/// `functional`. `jobs == 0` uses the global rayon pool. Output is always
/// ordered by `t`.
pub fn order_scan(
    family: &Family,
    ops: &BathOperators,
    grid: &TimeGrid,
    functional: Functional,
    jobs: usize,
) -> Result<OrderScan, AnalysisError> {
    let a = alpha(ops);
    if a == 0.0 {
        return Err(AnalysisError::ZeroCoupling);
    }
    if grid.max() >= 1.0 {
        return Err(AnalysisError::OutOfRange(grid.max()));
    }
    let run = || -> Vec<Result<ScanPoint, AnalysisError>> {
        grid.alpha_t().par_iter().map(|at| evaluate(family, ops, at / a)).collect()
    };
    let results = if jobs == 0 {
        run()
    } else {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| AnalysisError::Pool(e.to_string()))?
            .install(run)
    };
    let points = results.into_iter().collect::<Result<Vec<_>, _>>()?;
    let t: Vec<f64> = points.iter().map(|p| p.t).collect();
    let e: Vec<f64> = points.iter().map(|p| functional.of(&p.functionals())).collect();
    let fit = OrderFit::fit(&t, &e)?;
    Ok(OrderScan {
        family: family.tag(),
        family_name: family.name().into(),
        param: family.params(),
        functional, alpha: a, points, fit })
}

/// Which competing term of the concatenated-UDD error bound a fitted slope
/// tracks: the residual dephasing channel, of order `n+1`, or the flip
/// channel left by the `m`-pulse base, of order `m+1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CuddBranch {
    Concatenation,
    Base,
    /// Both branches predict the same order (`m == n`).
    Degenerate,
    Neither,
}

pub fn classify_cudd_branch(m: usize, n: u32, slope: f64, tol: f64) -> CuddBranch {
    let conc = (n + 1) as f64;
    let base = (m + 1) as f64;
    let near_conc = (slope - conc).abs() <= tol;
    let near_base = (slope - base).abs() <= tol;
    match (near_conc, near_base) {
        (true, true) => CuddBranch::Degenerate,
        (true, false) => CuddBranch::Concatenation,
        (false, true) => CuddBranch::Base,
        (false, false) => CuddBranch::Neither,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CountRow {
    pub family: &'static str,
    pub param: u32,
    pub pulse_count: u128,
    /// Exponent `p` of the leading surviving term `t^p`.
    pub claimed_order: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CountTable {
    pub rows: Vec<CountRow>,
}

impl CountTable {
    pub fn get(&self, family: &str, param: u32) -> Option<u128> {
        self.rows.iter().find(|r| r.family == family && r.param == param).map(|r| r.pulse_count)
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "family,param,pulse_count,claimed_order")?;
        for r in &self.rows {
            writeln!(w, "{},{},{},{}", r.family, r.param, r.pulse_count, r.claimed_order)?;
        }
        Ok(())
    }
}

/// Pulse counts at matched order: CDD level `m`, CUDD with `n = m`, and
/// approximate UDD² with `n = m`, each suppressing every `t^m` term.
pub fn count_compare(m_max: u32) -> Result<CountTable, AnalysisError> {
    if m_max == 0 {
        return Err(AnalysisError::InvalidArgument("m_max must be >= 1 (CUDD needs m >= 1)".into()));
    }
    let mut rows = Vec::new();
    for m in 1..=m_max {
        let order = m + 1;
        rows.push(CountRow { family: "cdd", param: m, pulse_count: cdd_count_estimate(m)?, claimed_order: order });
        rows.push(CountRow { family: "cudd", param: m, pulse_count: cudd_count(m as u64, m)?, claimed_order: order });
        rows.push(CountRow { family: "udd2", param: m, pulse_count: udd2_count(m as u64)?, claimed_order: order });
    }
    Ok(CountTable { rows })
}

/// CUDD count split into `(Z, X)` pulses.
pub fn cudd_split(m: u64, n: u32) -> Result<(u128, u128), AnalysisError> {
    let total = cudd_count(m, n)?;
    let x = x_pulse_count(n)?;
    Ok((total - x, x))
}

/// Smallest `n` with `(n+1)³ ≤ 2ⁿ`, scanning `1..=n_max` exactly.
pub fn crossover(n_max: u32) -> Result<u32, AnalysisError> {
    if n_max == 0 {
        return Err(AnalysisError::InvalidArgument("n_max must be >= 1".into()));
    }
    (1..=n_max)
        .find(|&n| BigUint::from(n + 1).pow(3) <= BigUint::from(1u8) << n)
        .ok_or(AnalysisError::NotFound(n_max))
}

/// Functional value of each family at the same absolute time `t`.
pub fn compare_at(
    families: &[Family],
    ops: &BathOperators,
    t: f64,
    functional: Functional,
) -> Result<Vec<(String, ScanPoint, f64)>, AnalysisError> {
    families
        .par_iter()
        .map(|f| {
            let p = evaluate(f, ops, t)?;
            let v = functional.of(&p.functionals());
            Ok((f.tag(), p, v))
        })
        .collect()
}

/// Seventeen significant digits, locale-free.
pub fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}

/// CSV columns `family,param,t,alpha_t,E_flip,E_dephase,E_total`; an optional
/// leading `# ...` line carries run metadata.
pub fn write_scan_csv<W: Write>(mut w: W, scan: &OrderScan, meta: Option<&str>) -> io::Result<()> {
    if let Some(m) = meta {
        writeln!(w, "# {m}")?;
    }
    writeln!(w, "family,param,t,alpha_t,E_flip,E_dephase,E_total")?;
    for p in &scan.points {
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            csv_field(&scan.family_name),
            csv_field(&scan.param),
            fmt_float(p.t),
            fmt_float(p.alpha_t),
            fmt_float(p.flip),
            fmt_float(p.dephase),
            fmt_float(p.total)
        )?;
    }
    Ok(())
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct FitSummary<'a> {
    pub family: &'a str,
    pub functional: Functional,
    pub slope: Option<f64>,
    pub intercept: Option<f64>,
    pub r2: Option<f64>,
    pub pairwise: &'a [f64],
    #[serde(skip_serializing_if = "Option::is_none")]
    pub branch: Option<CuddBranch>,
}

impl OrderScan {
    pub fn summary(&self) -> FitSummary<'_> {
        FitSummary {
            family: &self.family,
            functional: self.functional,
            slope: self.fit.slope,
            intercept: self.fit.intercept,
            r2: self.fit.r_squared,
            pairwise: &self.fit.pairwise_orders,
            branch: None,
        }
    }
}
