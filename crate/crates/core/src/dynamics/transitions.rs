//! Rates and frequencies extracted from exact propagation.

use num_complex::Complex64 as C64;
use serde::Serialize;

use super::{dot, evolve, evolve_states, krylov, Tracked};
use crate::error::{check_dim, domain, Error, Result};
use crate::fit;
use crate::hilbert::{OperatorMatrix, StateVector};

/// Fit window: only samples with target population below this are used.
pub const SHORT_TIME_WINDOW: f64 = 0.05;
/// Largest tolerated relative deviation from a pure `R t²` law.
pub const QUADRATIC_RESIDUAL_LIMIT: f64 = 0.01;
/// Largest tolerated population outside the two-state span.
pub const SPAN_LEAKAGE_LIMIT: f64 = 0.01;

const SHORT_TIME_SAMPLES: usize = 40;
const PROPAGATION_TOL: f64 = 1e-14;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ShortTimeRate {
    /// `R` in `|<target|ψ(t)>|² ≈ R t²`.
    pub rate: f64,
    /// Largest relative deviation of the samples from `R t²`.
    pub fit_residual: f64,
    pub points_used: usize,
    pub max_population: f64,
    pub norm_drift: f64,
    pub truncation_leak: f64,
}

/// Squared transition amplitude from the early-time growth of the target
/// population.
///
/// `P(t)/t²` is fitted linearly in `t²` over samples with `P < 0.05`; the
/// intercept is `R`. The run is rejected when any sample deviates from `R t²`
/// by more than 1%.
pub fn short_time_rate(
    h: &OperatorMatrix,
    psi0: &StateVector,
    target: &StateVector,
    t_max: f64,
) -> Result<ShortTimeRate> {
    check_dim(psi0.dim(), target.dim())?;
    if !(t_max > 0.0) || !t_max.is_finite() {
        return domain("t_max must be positive");
    }
    if psi0.inner(target)?.norm() > 1e-10 {
        return domain("target state must be orthogonal to the initial state");
    }
    let times: Vec<f64> =
        (1..=SHORT_TIME_SAMPLES).map(|k| t_max * k as f64 / SHORT_TIME_SAMPLES as f64).collect();
    let run = evolve(h, psi0, &times, PROPAGATION_TOL, &[Tracked::population("p", target)])?;
    run.ensure_valid()?;
    let pops = run.column("p").expect("tracked column");
    let max_population = pops.iter().copied().fold(0.0, f64::max);
    let base = ShortTimeRate {
        rate: 0.0,
        fit_residual: 0.0,
        points_used: 0,
        max_population,
        norm_drift: run.norm_drift,
        truncation_leak: run.truncation_leak,
    };
    if max_population < 1e-24 {
        return Ok(ShortTimeRate { points_used: times.len(), ..base });
    }
    if max_population >= SHORT_TIME_WINDOW {
        return Err(Error::Regime(format!(
            "target population reaches {max_population:.3e} before t_max; shorten t_max"
        )));
    }
    let (x, y): (Vec<f64>, Vec<f64>) = times.iter().zip(&pops).map(|(t, p)| (t * t, p / (t * t))).unzip();
    let line = fit::linear(&x, &y).ok_or_else(|| Error::Degenerate("short-time fit".into()))?;
    let rate = line.intercept;
    let fit_residual = times
        .iter()
        .zip(&pops)
        .map(|(t, p)| (p - rate * t * t).abs() / p.max(f64::MIN_POSITIVE))
        .fold(0.0, f64::max);
    if fit_residual > QUADRATIC_RESIDUAL_LIMIT {
        return Err(Error::Regime(format!(
            "quadratic fit residual {fit_residual:.3e} exceeds {QUADRATIC_RESIDUAL_LIMIT}"
        )));
    }
    Ok(ShortTimeRate { rate, fit_residual, points_used: times.len(), ..base })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RabiEstimate {
    /// Angular frequency `Ω` of `|<b|ψ(t)>|² ∝ sin²(Ω t / 2)`.
    pub frequency: f64,
    /// First population maximum, `π/Ω`.
    pub peak_time: f64,
    pub peak_population: f64,
    /// Largest population outside `span{a, b}` over the scanned half period.
    pub max_leakage: f64,
}

const RABI_SCAN_SAMPLES: usize = 400;

/// Oscillation frequency of the population transferred from `a` to `b`.
///
/// The first maximum of `|<b|ψ(t)>|²` is bracketed on a grid and refined by
/// bisection on its time derivative.
pub fn rabi_frequency(h: &OperatorMatrix, a: &StateVector, b: &StateVector) -> Result<RabiEstimate> {
    check_dim(a.dim(), b.dim())?;
    check_dim(h.dim(), a.dim())?;
    if (a.norm() - 1.0).abs() > 1e-10 || (b.norm() - 1.0).abs() > 1e-10 || a.inner(b)?.norm() > 1e-10 {
        return domain("states must be orthonormal");
    }
    let (va, vb) = (a.amplitudes(), b.amplitudes());
    let hb = h.apply(vb)?;
    let coupling = dot(&hb, va).norm();
    let detuning = h.sandwich(vb, vb)?.re - h.sandwich(va, va)?.re;
    let estimate = 2.0 * (coupling * coupling + detuning * detuning / 4.0).sqrt();
    if coupling == 0.0 {
        return Err(Error::Degenerate("states are not coupled".into()));
    }
    let t_scan = 1.6 * std::f64::consts::PI / estimate;
    let times: Vec<f64> =
        (1..=RABI_SCAN_SAMPLES).map(|k| t_scan * k as f64 / RABI_SCAN_SAMPLES as f64).collect();
    let states = evolve_states(h, va, &times, PROPAGATION_TOL)?;
    let mut pb = Vec::with_capacity(states.len());
    let mut max_leakage: f64 = 0.0;
    for psi in &states {
        let (p_a, p_b) = (dot(va, psi).norm_sqr(), dot(vb, psi).norm_sqr());
        max_leakage = max_leakage.max((1.0 - p_a - p_b).abs());
        pb.push(p_b);
    }
    if max_leakage > SPAN_LEAKAGE_LIMIT {
        return Err(Error::Regime(format!(
            "population leaves the two-state span ({max_leakage:.3e}); two-level reduction invalid"
        )));
    }
    let k = (1..pb.len() - 1)
        .find(|&k| pb[k] >= pb[k - 1] && pb[k] > pb[k + 1])
        .ok_or_else(|| Error::Degenerate("no population maximum within the scan".into()))?;
    let slope = |psi: &[C64]| 2.0 * (dot(vb, psi).conj() * dot(&hb, psi)).im;
    let (mut lo, mut hi) = (times[k - 1], times[k + 1]);
    let start = states[k - 1].clone();
    let mut hint = 0.0;
    let mut peak = start.clone();
    for _ in 0..200 {
        if hi - lo <= 4.0 * f64::EPSILON * hi {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let psi = krylov::propagate(h, &start, mid - times[k - 1], PROPAGATION_TOL, &mut hint)?;
        if slope(&psi) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        peak = psi;
    }
    let peak_time = 0.5 * (lo + hi);
    Ok(RabiEstimate {
        frequency: std::f64::consts::PI / peak_time,
        peak_time,
        peak_population: dot(vb, &peak).norm_sqr(),
        max_leakage,
    })
}
