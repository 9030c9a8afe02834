//! Closed- and open-system propagation.
//!
//! Unitary runs use a Lanczos propagator on the sparse Hamiltonian; pure
//! dephasing runs integrate the Lindblad equation on a dense density matrix.

mod krylov;
mod lindblad;
mod transitions;

use std::fmt::Write as _;

use num_complex::Complex64 as C64;
use serde::Serialize;

pub use krylov::MAX_KRYLOV_DIM;
pub use lindblad::{
    dephasing_evolve, jump_operators, measure_decoherence_scaling, measure_intra_sector_rate,
    measure_uncorrelated_scaling, CoherencePair, DecoherencePoint, DecoherenceScalingReport,
    DephasingKind, DephasingModel, DENSITY_DIM_BUDGET,
};
pub use transitions::{rabi_frequency, short_time_rate, RabiEstimate, ShortTimeRate};

use crate::error::{domain, Error, Result};
use crate::hilbert::{OperatorMatrix, StateVector};

pub const NORM_DRIFT_LIMIT: f64 = 1e-9;
pub const TRACE_DRIFT_LIMIT: f64 = 1e-7;
pub const POSITIVITY_LIMIT: f64 = -1e-9;
pub const TRUNCATION_LIMIT: f64 = 1e-6;

pub(crate) fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub(crate) fn norm(v: &[C64]) -> f64 {
    v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RunKind {
    Unitary,
    Dephasing,
}

/// Quantity recorded at every output time of a unitary run.
#[derive(Clone, Debug)]
pub enum Observable {
    /// `|<φ|ψ(t)>|²`.
    Population(Vec<C64>),
    /// `<ψ(t)|A|ψ(t)>` (real part).
    Expectation(OperatorMatrix),
}

#[derive(Clone, Debug)]
pub struct Tracked {
    pub name: String,
    pub observable: Observable,
}

impl Tracked {
    pub fn population(name: impl Into<String>, target: &StateVector) -> Self {
        Tracked { name: name.into(), observable: Observable::Population(target.amplitudes().to_vec()) }
    }

    pub fn expectation(name: impl Into<String>, op: OperatorMatrix) -> Self {
        Tracked { name: name.into(), observable: Observable::Expectation(op) }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PropagationResult {
    pub kind: RunKind,
    pub times: Vec<f64>,
    pub labels: Vec<String>,
    /// `values[i][k]` is observable `k` at `times[i]`.
    pub values: Vec<Vec<f64>>,
    /// Largest population of any top Fock level over the run.
    pub truncation_leak: f64,
    /// `max |‖ψ‖ - 1|` for unitary runs, `max |tr ρ - 1|` for dephasing runs.
    pub norm_drift: f64,
    /// Relative drift of `<H>` (unitary runs).
    pub energy_drift: Option<f64>,
    /// Smallest eigenvalue of ρ over the output times (dephasing runs).
    pub min_eigenvalue: Option<f64>,
    /// Largest change of any diagonal element of ρ (dephasing runs).
    pub population_drift: Option<f64>,
}

impl PropagationResult {
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.labels.iter().position(|l| l == name)?;
        Some(self.values.iter().map(|row| row[k]).collect())
    }

    /// Reasons the run fails the hygiene gates; empty when valid.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.truncation_leak >= TRUNCATION_LIMIT {
            out.push(format!("truncation leak {:.3e}", self.truncation_leak));
        }
        match self.kind {
            RunKind::Unitary if self.norm_drift >= NORM_DRIFT_LIMIT => {
                out.push(format!("norm drift {:.3e}", self.norm_drift))
            }
            RunKind::Dephasing if self.norm_drift >= TRACE_DRIFT_LIMIT => {
                out.push(format!("trace drift {:.3e}", self.norm_drift))
            }
            _ => {}
        }
        if let Some(m) = self.min_eigenvalue {
            if m <= POSITIVITY_LIMIT {
                out.push(format!("negative eigenvalue {m:.3e}"));
            }
        }
        out
    }

    pub fn is_valid(&self) -> bool {
        self.violations().is_empty()
    }

    pub fn ensure_valid(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidRun(v.join("; ")))
        }
    }

    /// Time column followed by one column per tracked observable.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t");
        for l in &self.labels {
            out.push(',');
            out.push_str(l);
        }
        out.push('\n');
        for (t, row) in self.times.iter().zip(&self.values) {
            let _ = write!(out, "{t}");
            for v in row {
                let _ = write!(out, ",{v}");
            }
            out.push('\n');
        }
        out
    }
}

pub(crate) fn check_times(times: &[f64]) -> Result<()> {
    if times.is_empty() {
        return domain("empty time grid");
    }
    if times[0] < 0.0 || !times.iter().all(|t| t.is_finite()) {
        return domain("time grid must be finite and start at t >= 0");
    }
    if times.windows(2).any(|w| w[1] <= w[0]) {
        return domain("time grid must be strictly increasing");
    }
    Ok(())
}

fn check_hamiltonian(h: &OperatorMatrix) -> Result<()> {
    if !h.is_hermitian() {
        return domain(format!("Hamiltonian is not Hermitian (defect {:.3e})", h.hermiticity_defect()));
    }
    Ok(())
}

/// `ψ(t)` at every time in `times`, starting from `ψ(0) = psi0`.
pub fn evolve_states(h: &OperatorMatrix, psi0: &[C64], times: &[f64], tol: f64) -> Result<Vec<Vec<C64>>> {
    check_hamiltonian(h)?;
    crate::error::check_dim(h.dim(), psi0.len())?;
    check_times(times)?;
    if !(tol > 0.0) {
        return domain("tolerance must be positive");
    }
    let mut hint = 0.0;
    let mut state = psi0.to_vec();
    let mut t = 0.0;
    let mut out = Vec::with_capacity(times.len());
    for &target in times {
        state = krylov::propagate(h, &state, target - t, tol, &mut hint)?;
        t = target;
        out.push(state.clone());
    }
    Ok(out)
}

/// Propagate `psi0` under `h` and record `tracked` at each time.
///
/// The Lanczos error estimate of every sub-step is kept below `tol`.
pub fn evolve(
    h: &OperatorMatrix,
    psi0: &StateVector,
    times: &[f64],
    tol: f64,
    tracked: &[Tracked],
) -> Result<PropagationResult> {
    if (psi0.norm() - 1.0).abs() > 1e-10 {
        return domain(format!("initial state has norm {}", psi0.norm()));
    }
    for t in tracked {
        if let Observable::Population(v) = &t.observable {
            crate::error::check_dim(psi0.dim(), v.len())?;
        } else if let Observable::Expectation(op) = &t.observable {
            crate::error::check_dim(psi0.dim(), op.dim())?;
        }
    }
    let states = evolve_states(h, psi0.amplitudes(), times, tol)?;
    let layout = psi0.layout();
    let mut top_levels = Vec::new();
    for (g, mg) in layout.mode_groups().iter().enumerate() {
        for q in 0..mg.count {
            top_levels.push(layout.top_level_indices(g, q).collect::<Vec<_>>());
        }
    }
    let energy = |v: &[C64]| h.sandwich(v, v).map(|e| e.re);
    let e0 = energy(psi0.amplitudes())?;
    let mut result = PropagationResult {
        kind: RunKind::Unitary,
        times: times.to_vec(),
        labels: tracked.iter().map(|t| t.name.clone()).collect(),
        values: Vec::with_capacity(times.len()),
        truncation_leak: 0.0,
        norm_drift: 0.0,
        energy_drift: Some(0.0),
        min_eigenvalue: None,
        population_drift: None,
    };
    let mut energy_drift: f64 = 0.0;
    for psi in &states {
        let mut row = Vec::with_capacity(tracked.len());
        for t in tracked {
            row.push(match &t.observable {
                Observable::Population(v) => dot(v, psi).norm_sqr(),
                Observable::Expectation(op) => op.sandwich(psi, psi)?.re,
            });
        }
        result.values.push(row);
        for idx in &top_levels {
            let p: f64 = idx.iter().map(|&i| psi[i].norm_sqr()).sum();
            result.truncation_leak = result.truncation_leak.max(p);
        }
        result.norm_drift = result.norm_drift.max((norm(psi) - 1.0).abs());
        let de = (energy(psi)? - e0).abs();
        energy_drift = energy_drift.max(if e0.abs() > 1e-12 { de / e0.abs() } else { de });
    }
    result.energy_drift = Some(energy_drift);
    Ok(result)
}
