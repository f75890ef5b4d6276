//! Homogeneous Poisson sampling by inter-arrival times and by the mixed
//! binomial construction.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::rng::RngStream;

/// Largest mean for which the Poisson count is drawn by sequential search.
pub const INVERSION_MAX_MEAN: f64 = 30.0;

/// `−ln(v)`: maps a uniform draw to a unit exponential.
#[inline]
pub fn unit_exponential_from(v: f64) -> f64 {
    -libm::log(v)
}

/// Unit exponential from a uniform on the open interval `(0, 1)`, so the result
/// is strictly positive and finite.
#[inline]
pub fn sample_unit_exponential(rng: &mut RngStream) -> f64 {
    unit_exponential_from(rng.uniform_open())
}

pub fn sample_interarrival(rng: &mut RngStream, lambda: f64) -> Result<f64> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::Domain("rate must be positive and finite"));
    }
    Ok(sample_unit_exponential(rng) / lambda)
}

/// Poisson(`mean`) count: sequential inversion up to [`INVERSION_MAX_MEAN`],
/// Hörmann's transformed rejection (PTRS) above it.
pub fn sample_poisson_count(rng: &mut RngStream, mean: f64) -> Result<u64> {
    if !(mean >= 0.0 && mean.is_finite()) {
        return Err(Error::Domain("Poisson mean must be finite and non-negative"));
    }
    if mean == 0.0 {
        return Ok(0);
    }
    if mean <= INVERSION_MAX_MEAN {
        Ok(poisson_inversion(rng, mean))
    } else {
        Ok(poisson_ptrs(rng, mean))
    }
}

fn poisson_inversion(rng: &mut RngStream, mean: f64) -> u64 {
    let u = rng.uniform();
    let mut k = 0u64;
    let mut p = libm::exp(-mean);
    let mut cdf = p;
    while u >= cdf {
        k += 1;
        p *= mean / k as f64;
        cdf += p;
        // Tail mass below double resolution.
        if p <= 0.0 || k > 10_000 {
            break;
        }
    }
    k
}

fn poisson_ptrs(rng: &mut RngStream, mean: f64) -> u64 {
    let slam = libm::sqrt(mean);
    let loglam = libm::log(mean);
    let b = 0.931 + 2.53 * slam;
    let a = -0.059 + 0.02483 * b;
    let inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    let vr = 0.9277 - 3.6224 / (b - 2.0);
    loop {
        let u = rng.uniform() - 0.5;
        let v = rng.uniform_open();
        let us = 0.5 - libm::fabs(u);
        let k = libm::floor((2.0 * a / us + b) * u + mean + 0.43);
        if us >= 0.07 && v <= vr {
            return k as u64;
        }
        if k < 0.0 || (us < 0.013 && v > us) {
            continue;
        }
        let lhs = libm::log(v) + libm::log(inv_alpha) - libm::log(a / (us * us) + b);
        let rhs = -mean + k * loglam - libm::lgamma(k + 1.0);
        if lhs <= rhs {
            return k as u64;
        }
    }
}

fn check_rate_horizon(lambda: f64, horizon: f64) -> Result<()> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::Domain("rate must be positive and finite"));
    }
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(Error::Domain("horizon must be positive and finite"));
    }
    Ok(())
}

/// Mixed binomial construction on `[0, horizon)`: `N ~ Poisson(λT)` then `N`
/// i.i.d. uniform locations, sorted.
pub fn sample_poisson_binomial(rng: &mut RngStream, lambda: f64, horizon: f64) -> Result<Vec<f64>> {
    check_rate_horizon(lambda, horizon)?;
    let n = sample_poisson_count(rng, lambda * horizon)? as usize;
    let mut times: Vec<f64> = (0..n)
        .map(|_| {
            let x = rng.uniform() * horizon;
            if x < horizon {
                x
            } else {
                horizon.next_down()
            }
        })
        .collect();
    times.sort_by(f64::total_cmp);
    Ok(times)
}

/// Inter-arrival construction on `[0, horizon)`.
pub fn sample_poisson_interarrival(rng: &mut RngStream, lambda: f64, horizon: f64) -> Result<Vec<f64>> {
    check_rate_horizon(lambda, horizon)?;
    let mut times = Vec::new();
    let mut t = 0.0;
    loop {
        t += sample_unit_exponential(rng) / lambda;
        if t >= horizon {
            return Ok(times);
        }
        times.push(t);
    }
}
