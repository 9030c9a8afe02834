use std::fmt::Write as _;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::rates::{emission_amplitude, supertransfer_forward, supertransfer_rate};
use crate::error::{domain, Error, Result};
use crate::fit;
use crate::hamiltonians::{dicke_hamiltonian, hopping_hamiltonian, SystemSpec};
use crate::hilbert::ProductState;

/// Which collective rate law a grid is checked against.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScalingFormula {
    /// Dicke emission rate `n(N-n+1)(m+1)γ²` against exact matrix elements.
    Emission,
    /// Net A→B transfer rate against a golden-rule sum over final basis states.
    NetTransfer,
    /// Forward hopping rate `γ² n(N-n+1)(m+1)(M-m)` against the Dicke–Dicke element.
    HoppingElement,
}

/// One grid point. `m_sites`/`m` are the acceptor group for the transfer
/// formulas; `m_from` is the initial photon number for emission.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridPoint {
    pub n_sites: usize,
    pub n: usize,
    #[serde(default)]
    pub m_sites: usize,
    #[serde(default)]
    pub m: usize,
    #[serde(default)]
    pub m_from: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScalingSample {
    pub point: GridPoint,
    pub predicted: f64,
    pub measured: f64,
    pub abs_error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RateScalingReport {
    pub formula: ScalingFormula,
    pub gamma: f64,
    /// Abscissa of the log-log fit: `N` for emission, `N·M` otherwise.
    pub fit_variable: &'static str,
    pub samples: Vec<ScalingSample>,
    /// Present only with at least four usable samples.
    pub fitted_exponent: Option<f64>,
    pub fit_residual: Option<f64>,
}

impl RateScalingReport {
    pub fn max_abs_error(&self) -> f64 {
        self.samples.iter().map(|s| s.abs_error).fold(0.0, f64::max)
    }

    /// One row per grid point: parameters, predicted, measured, absolute error.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("N,n,M,m,m_from,predicted,measured,abs_error\n");
        for s in &self.samples {
            let p = s.point;
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                p.n_sites, p.n, p.m_sites, p.m, p.m_from, s.predicted, s.measured, s.abs_error
            );
        }
        out
    }
}

fn fit_abscissa(formula: ScalingFormula, p: &GridPoint) -> f64 {
    match formula {
        ScalingFormula::Emission => p.n_sites as f64,
        _ => (p.n_sites * p.m_sites) as f64,
    }
}

/// Evaluate a rate law against exact matrix elements over `grid`.
///
/// Points are evaluated in parallel; the sample order always follows `grid`.
pub fn verify_scaling(formula: ScalingFormula, grid: &[GridPoint], gamma: f64) -> Result<RateScalingReport> {
    if grid.is_empty() {
        return Err(Error::Degenerate("empty parameter grid".into()));
    }
    let first = fit_abscissa(formula, &grid[0]);
    if grid.len() > 1 && grid.iter().all(|p| fit_abscissa(formula, p) == first) {
        return Err(Error::Degenerate("every grid point has the same fit variable".into()));
    }
    let samples = grid
        .par_iter()
        .map(|p| evaluate(formula, p, gamma))
        .collect::<Result<Vec<_>>>()?;
    let xs: Vec<f64> = samples.iter().map(|s| fit_abscissa(formula, &s.point)).collect();
    let ys: Vec<f64> = samples.iter().map(|s| s.measured).collect();
    let usable = ys.iter().filter(|y| **y > 0.0).count();
    let line = if usable >= 4 { fit::power_law(&xs, &ys) } else { None };
    Ok(RateScalingReport {
        formula,
        gamma,
        fit_variable: match formula {
            ScalingFormula::Emission => "N",
            _ => "N*M",
        },
        samples,
        fitted_exponent: line.map(|l| l.slope),
        fit_residual: line.map(|l| l.rms_residual),
    })
}

fn evaluate(formula: ScalingFormula, p: &GridPoint, gamma: f64) -> Result<ScalingSample> {
    let (predicted, measured) = match formula {
        ScalingFormula::Emission => {
            let predicted = emission_amplitude(p.n_sites, p.n, gamma, p.m_from)?.powi(2);
            (predicted, emission_element(p, gamma)?.powi(2))
        }
        ScalingFormula::HoppingElement => {
            let predicted = supertransfer_forward(p.n, p.n_sites, p.m, p.m_sites, gamma)?;
            (predicted, hopping_element(p, gamma)?.powi(2))
        }
        ScalingFormula::NetTransfer => {
            let predicted = supertransfer_rate(p.n, p.n_sites, p.m, p.m_sites, gamma)?;
            let (fwd, bwd) = golden_rule_sums(p, gamma)?;
            (predicted, fwd - bwd)
        }
    };
    Ok(ScalingSample { point: *p, predicted, measured, abs_error: (predicted - measured).abs() })
}

/// `<n-1, m_from+1| H |n, m_from>` from the full (non-RWA) Dicke Hamiltonian.
fn emission_element(p: &GridPoint, gamma: f64) -> Result<f64> {
    if p.n == 0 || p.n > p.n_sites {
        return domain(format!("excitation number {} must lie in 1..={}", p.n, p.n_sites));
    }
    let spec = SystemSpec::dicke(p.n_sites, 1.0, gamma, p.m_from + 2);
    let layout = Arc::new(spec.layout()?);
    let h = dicke_hamiltonian(&spec)?;
    let ket = ProductState::new(&layout).dicke(0, p.n)?.fock(0, &[p.m_from])?.build()?;
    let bra = ProductState::new(&layout).dicke(0, p.n - 1)?.fock(0, &[p.m_from + 1])?.build()?;
    Ok(h.sandwich(bra.amplitudes(), ket.amplitudes())?.norm())
}

fn hopping_element(p: &GridPoint, gamma: f64) -> Result<f64> {
    if p.n == 0 || p.n > p.n_sites || p.m >= p.m_sites {
        return Ok(0.0);
    }
    let spec = SystemSpec::hopping(p.n_sites, 1.0, p.m_sites, 1.0, gamma);
    let layout = Arc::new(spec.layout()?);
    let h = hopping_hamiltonian(&spec)?;
    let ket = ProductState::new(&layout).dicke(0, p.n)?.dicke(1, p.m)?.build()?;
    let bra = ProductState::new(&layout).dicke(0, p.n - 1)?.dicke(1, p.m + 1)?.build()?;
    Ok(h.sandwich(bra.amplitudes(), ket.amplitudes())?.norm())
}

/// Squared transition amplitudes out of `|n>|m>` summed over every final basis
/// configuration with one excitation moved A→B (forward) or B→A (backward).
fn golden_rule_sums(p: &GridPoint, gamma: f64) -> Result<(f64, f64)> {
    if p.n > p.n_sites || p.m > p.m_sites {
        return domain("occupations exceed group sizes");
    }
    let spec = SystemSpec::hopping(p.n_sites, 1.0, p.m_sites, 1.0, gamma);
    let layout = Arc::new(spec.layout()?);
    let h = hopping_hamiltonian(&spec)?;
    let ket = ProductState::new(&layout).dicke(0, p.n)?.dicke(1, p.m)?.build()?;
    let out = h.apply(ket.amplitudes())?;
    let (mut fwd, mut bwd) = (0.0, 0.0);
    for (i, a) in out.iter().enumerate() {
        let (na, nb) = (layout.group_excitations(i, 0), layout.group_excitations(i, 1));
        if na + 1 == p.n && nb == p.m + 1 {
            fwd += a.norm_sqr();
        } else if na == p.n + 1 && nb + 1 == p.m {
            bwd += a.norm_sqr();
        }
    }
    Ok((fwd, bwd))
}
