use num_complex::Complex64 as C64;

use crate::error::{domain, Result};
use crate::hilbert::{OperatorMatrix, StateVector};

/// Dicke emission matrix element `sqrt(n(N-n+1)) · sqrt(m_from+1) · γ` for the
/// transition `|n, m_from> -> |n-1, m_from+1>`.
pub fn emission_amplitude(sites: usize, n: usize, gamma: f64, m_from: usize) -> Result<f64> {
    if n == 0 || n > sites {
        return domain(format!("excitation number {n} must lie in 1..={sites}"));
    }
    let spin = (n * (sites - n + 1)) as f64;
    Ok(spin.sqrt() * ((m_from + 1) as f64).sqrt() * gamma)
}

fn check_occupations(n: usize, sites_a: usize, m: usize, sites_b: usize) -> Result<()> {
    if n > sites_a || m > sites_b {
        return domain(format!("occupations ({n}, {m}) exceed group sizes ({sites_a}, {sites_b})"));
    }
    Ok(())
}

/// A→B hopping rate `γ² n(N-n+1)(m+1)(M-m)` from `|n>|m>` to `|n-1>|m+1>`.
pub fn supertransfer_forward(n: usize, sites_a: usize, m: usize, sites_b: usize, gamma: f64) -> Result<f64> {
    check_occupations(n, sites_a, m, sites_b)?;
    let f = n * (sites_a - n + 1) * (m + 1) * (sites_b - m);
    Ok(gamma * gamma * f as f64)
}

/// B→A hopping rate `γ² (n+1)(N-n) m(M-m+1)` from `|n>|m>` to `|n+1>|m-1>`.
pub fn supertransfer_backward(n: usize, sites_a: usize, m: usize, sites_b: usize, gamma: f64) -> Result<f64> {
    check_occupations(n, sites_a, m, sites_b)?;
    let b = (n + 1) * (sites_a - n) * m * (sites_b - m + 1);
    Ok(gamma * gamma * b as f64)
}

/// Net A→B transfer rate (forward minus backward); negative means net B→A flow.
pub fn supertransfer_rate(n: usize, sites_a: usize, m: usize, sites_b: usize, gamma: f64) -> Result<f64> {
    Ok(supertransfer_forward(n, sites_a, m, sites_b, gamma)?
        - supertransfer_backward(n, sites_a, m, sites_b, gamma)?)
}

/// `<bra| H |ket>`.
pub fn matrix_element(bra: &StateVector, h: &OperatorMatrix, ket: &StateVector) -> Result<C64> {
    h.sandwich(bra.amplitudes(), ket.amplitudes())
}
