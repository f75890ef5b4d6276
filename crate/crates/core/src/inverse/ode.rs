//! Dormand–Prince 5(4) explicit Runge–Kutta pair with adaptive steps, for
//! autonomous systems `y' = f(y)` integrated from `x = 0`. Stage times are
//! not needed since the right-hand side never depends on `x`.

use alloc::vec;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeSolverConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_steps: usize,
    /// First trial step; chosen automatically when `None`.
    pub initial_step: Option<f64>,
}

impl Default for OdeSolverConfig {
    fn default() -> Self {
        Self {
            abs_tol: 1e-8,
            rel_tol: 1e-6,
            max_steps: 1_000_000,
            initial_step: None,
        }
    }
}

impl OdeSolverConfig {
    fn check(&self) -> Result<()> {
        if self.abs_tol > 0.0 && self.rel_tol > 0.0 && self.max_steps >= 1 {
            Ok(())
        } else {
            Err(Error::Domain("ODE tolerances must be positive and max_steps >= 1"))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OdeOutcome {
    Completed,
    /// The stop predicate fired after an accepted step.
    Stopped,
}

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

fn scaled_rms(v: &[f64], y0: &[f64], y1: &[f64], cfg: &OdeSolverConfig) -> f64 {
    let mut acc = 0.0;
    for ((&e, &a), &b) in v.iter().zip(y0).zip(y1) {
        let sc = cfg.abs_tol + cfg.rel_tol * libm::fmax(libm::fabs(a), libm::fabs(b));
        acc += (e / sc) * (e / sc);
    }
    libm::sqrt(acc / v.len() as f64)
}

/// Integrate `y' = f(y)` in place from `x = 0` to `x_end` (≥ 0).
///
/// `stop` is checked after every accepted step; returning `true` ends the
/// integration early with [`OdeOutcome::Stopped`] and `y` at that step.
pub fn integrate<F, P>(mut f: F, y: &mut [f64], x_end: f64, cfg: &OdeSolverConfig, mut stop: P) -> Result<OdeOutcome>
where
    F: FnMut(&[f64], &mut [f64]) -> Result<()>,
    P: FnMut(&[f64]) -> bool,
{
    cfg.check()?;
    if !(x_end >= 0.0 && x_end.is_finite()) {
        return Err(Error::Domain("integration end must be finite and non-negative"));
    }
    if x_end == 0.0 {
        return Ok(OdeOutcome::Completed);
    }
    let n = y.len();
    let mut k1 = vec![0.0; n];
    let mut k2 = vec![0.0; n];
    let mut k3 = vec![0.0; n];
    let mut k4 = vec![0.0; n];
    let mut k5 = vec![0.0; n];
    let mut k6 = vec![0.0; n];
    let mut k7 = vec![0.0; n];
    let mut tmp = vec![0.0; n];
    let mut ynew = vec![0.0; n];
    let mut err = vec![0.0; n];

    f(y, &mut k1)?;
    let mut h = match cfg.initial_step {
        Some(h) if h > 0.0 => h,
        Some(_) => return Err(Error::Domain("initial step must be positive")),
        None => initial_step(&mut f, y, &k1, cfg, &mut tmp, &mut k2)?,
    }
    .min(x_end);

    let mut x = 0.0;
    let mut steps = 0usize;
    let mut rejected_last = false;
    loop {
        if steps >= cfg.max_steps {
            return Err(Error::StepBudget(cfg.max_steps));
        }
        steps += 1;
        let last = x + h >= x_end || x + 1.0001 * h >= x_end;
        if last {
            h = x_end - x;
        }

        for i in 0..n {
            tmp[i] = y[i] + h * A21 * k1[i];
        }
        f(&tmp, &mut k2)?;
        for i in 0..n {
            tmp[i] = y[i] + h * (A31 * k1[i] + A32 * k2[i]);
        }
        f(&tmp, &mut k3)?;
        for i in 0..n {
            tmp[i] = y[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
        }
        f(&tmp, &mut k4)?;
        for i in 0..n {
            tmp[i] = y[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
        }
        f(&tmp, &mut k5)?;
        for i in 0..n {
            tmp[i] = y[i] + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
        }
        f(&tmp, &mut k6)?;
        for i in 0..n {
            ynew[i] = y[i] + h * (B1 * k1[i] + B3 * k3[i] + B4 * k4[i] + B5 * k5[i] + B6 * k6[i]);
        }
        f(&ynew, &mut k7)?;
        for i in 0..n {
            err[i] = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
        }
        let e = scaled_rms(&err, y, &ynew, cfg);
        if !e.is_finite() {
            h *= 0.2;
            rejected_last = true;
            continue;
        }

        if e <= 1.0 {
            x = if last { x_end } else { x + h };
            y.copy_from_slice(&ynew);
            core::mem::swap(&mut k1, &mut k7);
            if stop(y) {
                return Ok(OdeOutcome::Stopped);
            }
            if last {
                return Ok(OdeOutcome::Completed);
            }
            let mut fac = if e == 0.0 { 10.0 } else { 0.9 * libm::pow(e, -0.2) };
            fac = fac.clamp(0.2, 10.0);
            if rejected_last {
                fac = fac.min(1.0);
            }
            h *= fac;
            rejected_last = false;
        } else {
            h *= libm::fmax(0.2, 0.9 * libm::pow(e, -0.2));
            rejected_last = true;
        }
    }
}

fn initial_step<F>(f: &mut F, y: &[f64], f0: &[f64], cfg: &OdeSolverConfig, y1: &mut [f64], f1: &mut [f64]) -> Result<f64>
where
    F: FnMut(&[f64], &mut [f64]) -> Result<()>,
{
    let d0 = scaled_rms(y, y, y, cfg);
    let d1 = scaled_rms(f0, y, y, cfg);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    for i in 0..y.len() {
        y1[i] = y[i] + h0 * f0[i];
    }
    f(y1, f1)?;
    for i in 0..y.len() {
        y1[i] = f1[i] - f0[i];
    }
    let d2 = scaled_rms(y1, y, y, cfg) / h0;
    let dm = libm::fmax(d1, d2);
    let h1 = if dm <= 1e-15 {
        libm::fmax(1e-6, h0 * 1e-3)
    } else {
        libm::pow(0.01 / dm, 0.2)
    };
    Ok(libm::fmin(100.0 * h0, h1))
}
