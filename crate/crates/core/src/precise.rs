//! Double-double evaluation of toggling-frame generators.
//!
//! High-order decoupling leaves residual couplings far below f64 resolution
//! (a UDD-4 flip term is ~1e-18 at αt = 1e-3), so order scans propagate the
//! toggling-frame evolution with ~32 significant digits and only round the
//! final generator to f64. Free segments use a scaled Taylor series; the
//! logarithm uses the `log(I + D)` series, which restricts this route to
//! propagators within `NEAR_IDENTITY_LIMIT` of the identity.

use std::ops::{Add, Mul, Sub};

use num_complex::Complex;
use num_traits::Zero;
use thiserror::Error;
use twofloat::TwoFloat;

use crate::bath::{total_hamiltonian, BathOperators};
use crate::linalg::{self, CMatrix};
use crate::pauli::PauliAxis;
use crate::sequence::{Instant, PulseSequence};

type Dd = TwoFloat;
type Cdd = Complex<TwoFloat>;

/// Largest Frobenius distance `‖V − I‖` for which the series logarithm is used.
pub const NEAR_IDENTITY_LIMIT: f64 = 0.5;

const SERIES_CUTOFF: f64 = 1e-34;
const MAX_TERMS: usize = 400;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PreciseError {
    #[error("toggling propagator is {0:.3} from the identity; series logarithm not applicable")]
    NotNearIdentity(f64),
}

fn dd(x: f64) -> Dd {
    TwoFloat::from(x)
}

fn cdd(z: num_complex::Complex64) -> Cdd {
    Complex::new(dd(z.re), dd(z.im))
}

#[derive(Clone, Debug)]
pub(crate) struct DdMatrix {
    n: usize,
    data: Vec<Cdd>,
}

impl DdMatrix {
    fn zeros(n: usize) -> Self {
        DdMatrix { n, data: vec![Cdd::zero(); n * n] }
    }

    fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = Complex::new(dd(1.0), dd(0.0));
        }
        m
    }

    fn from_f64(m: &CMatrix) -> Self {
        let n = m.nrows();
        let mut out = Self::zeros(n);
        for r in 0..n {
            for c in 0..n {
                out.data[r * n + c] = cdd(m[(r, c)]);
            }
        }
        out
    }

    fn to_f64(&self) -> CMatrix {
        CMatrix::from_fn(self.n, self.n, |r, c| {
            let z = self.data[r * self.n + c];
            num_complex::Complex64::new(f64::from(z.re), f64::from(z.im))
        })
    }

    fn scale(&self, s: Cdd) -> Self {
        DdMatrix { n: self.n, data: self.data.iter().map(|&z| z * s).collect() }
    }

    fn frobenius(&self) -> f64 {
        let sum = self.data.iter().fold(dd(0.0), |acc, z| acc + z.re * z.re + z.im * z.im);
        f64::from(sum).sqrt()
    }

    fn adjoint(&self) -> Self {
        let n = self.n;
        let mut out = Self::zeros(n);
        for r in 0..n {
            for c in 0..n {
                out.data[c * n + r] = self.data[r * n + c].conj();
            }
        }
        out
    }
}

impl Mul for &DdMatrix {
    type Output = DdMatrix;

    fn mul(self, rhs: &DdMatrix) -> DdMatrix {
        let n = self.n;
        let mut out = DdMatrix::zeros(n);
        for r in 0..n {
            for k in 0..n {
                let a = self.data[r * n + k];
                if a.re == 0.0 && a.im == 0.0 {
                    continue;
                }
                for c in 0..n {
                    out.data[r * n + c] += a * rhs.data[k * n + c];
                }
            }
        }
        out
    }
}

impl Add for &DdMatrix {
    type Output = DdMatrix;

    fn add(self, rhs: &DdMatrix) -> DdMatrix {
        DdMatrix { n: self.n, data: self.data.iter().zip(&rhs.data).map(|(&a, &b)| a + b).collect() }
    }
}

impl Sub for &DdMatrix {
    type Output = DdMatrix;

    fn sub(self, rhs: &DdMatrix) -> DdMatrix {
        DdMatrix { n: self.n, data: self.data.iter().zip(&rhs.data).map(|(&a, &b)| a - b).collect() }
    }
}

/// `exp(X)` by scaling, Taylor series and squaring.
fn expm(x: &DdMatrix) -> DdMatrix {
    let norm = x.frobenius();
    let squarings = if norm > 0.1 { (norm / 0.1).log2().ceil() as u32 } else { 0 };
    let y = x.scale(Complex::new(dd(0.5f64.powi(squarings as i32)), dd(0.0)));
    let mut sum = DdMatrix::identity(x.n);
    let mut term = DdMatrix::identity(x.n);
    for k in 1..MAX_TERMS {
        term = (&term * &y).scale(Complex::new(dd(1.0) / dd(k as f64), dd(0.0)));
        sum = &sum + &term;
        if term.frobenius() < SERIES_CUTOFF {
            break;
        }
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    sum
}

/// `log(V)` for `V` close to the identity.
fn logm_near_identity(v: &DdMatrix) -> Result<DdMatrix, PreciseError> {
    let d = v - &DdMatrix::identity(v.n);
    let dist = d.frobenius();
    if dist > NEAR_IDENTITY_LIMIT {
        return Err(PreciseError::NotNearIdentity(dist));
    }
    let mut sum = DdMatrix::zeros(v.n);
    let mut power = DdMatrix::identity(v.n);
    for k in 1..MAX_TERMS {
        power = &power * &d;
        let coeff = dd(if k % 2 == 1 { 1.0 } else { -1.0 }) / dd(k as f64);
        let term = power.scale(Complex::new(coeff, dd(0.0)));
        sum = &sum + &term;
        if term.frobenius() < SERIES_CUTOFF {
            break;
        }
    }
    Ok(sum)
}

fn instant_dd(i: &Instant) -> Dd {
    match i {
        Instant::Exact(r) => dd(r.num() as f64) / dd(r.den() as f64),
        Instant::Approx(x) => dd(*x),
    }
}

/// Toggling-frame propagator `Π_k exp(-i Q_k† H Q_k Δt_k)` in double-double,
/// where `Q_k` is the product of all pulses applied before segment `k`.
pub(crate) fn toggling_propagator(seq: &PulseSequence, ops: &BathOperators) -> DdMatrix {
    let d = ops.dim();
    let h = total_hamiltonian(ops);
    let total = dd(seq.total_duration());
    let minus_i = Complex::new(dd(0.0), dd(-1.0));
    let mut v = DdMatrix::identity(2 * d);
    let mut frame = PauliAxis::I.matrix();
    let mut last = dd(0.0);
    let segment = |frame: &nalgebra::Matrix2<num_complex::Complex64>, from: Dd, to: Dd, v: &mut DdMatrix| {
        let len = (to - from) * total;
        if len <= 0.0 {
            return;
        }
        let q = linalg::qubit_op(frame, d);
        // Pauli conjugation is exact in f64
        let toggled = q.adjoint() * &h * &q;
        let step = expm(&DdMatrix::from_f64(&toggled).scale(minus_i * len));
        *v = &step * v;
    };
    for p in seq.pulses() {
        let at = instant_dd(&p.instant);
        segment(&frame, last, at, &mut v);
        if at > last {
            last = at;
        }
        frame = p.axis.matrix() * frame;
    }
    segment(&frame, last, dd(1.0), &mut v);
    v
}

/// Generator `M` with `V = exp(-iM)` for the toggling-frame propagator,
/// rounded to f64 after the logarithm.
pub fn toggling_generator(seq: &PulseSequence, ops: &BathOperators) -> Result<CMatrix, PreciseError> {
    let v = toggling_propagator(seq, ops);
    let log = logm_near_identity(&v)?;
    let m = log.scale(Complex::new(dd(0.0), dd(1.0)));
    let herm = (&m + &m.adjoint()).scale(Complex::new(dd(0.5), dd(0.0)));
    Ok(herm.to_f64())
}

/// `exp(-i H dt)` evaluated in double-double and rounded; an independent
/// route to `evolution::expm_segment`.
pub fn expm_reference(h: &CMatrix, dt: f64) -> CMatrix {
    let x = DdMatrix::from_f64(h).scale(Complex::new(dd(0.0), -dd(dt)));
    expm(&x).to_f64()
}
