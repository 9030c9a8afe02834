//! Cooperative/normal decomposition of a Hamiltonian and the closed-form
//! collective rate laws.
//!
//! The cooperative subspace is the product of the fully symmetric subspace of
//! every spin group with, for every bath, the states in which only the
//! symmetric collective mode is populated. `H_C = P H P`, `H_N = Q H Q` and
//! `H_CN = P H Q + Q H P` with `Q = 1 - P`; the norms of `H_CN` measure
//! leakage out of the cooperative sector.

mod rates;
mod scaling;

use serde::Serialize;

pub use rates::{
    emission_amplitude, matrix_element, supertransfer_backward, supertransfer_forward,
    supertransfer_rate,
};
pub use scaling::{verify_scaling, GridPoint, RateScalingReport, ScalingFormula, ScalingSample};

use crate::error::{check_dim, config, Result};
use crate::hamiltonians::{BathFrame, SystemSpec};
use crate::hilbert::{embed, symmetric_projector, Factor, OperatorMatrix, SpaceLayout};

/// Relative tolerance of the power iteration for the spectral leakage norm.
pub const SPECTRAL_TOL: f64 = 1e-8;
pub const SPECTRAL_MAX_ITER: usize = 10_000;

/// Projector onto the cooperative subspace of `layout` (built from `spec`).
///
/// Rank is `Π_g (N_g + 1) · Π_baths d` (the field mode, if any, is unrestricted
/// and contributes its full cutoff).
pub fn cooperative_projector(layout: &SpaceLayout, spec: &SystemSpec) -> Result<OperatorMatrix> {
    let roles = spec.mode_roles();
    let mut p = OperatorMatrix::identity(layout.total_dim());
    for g in 0..layout.spin_groups().len() {
        p = p.matmul(&symmetric_projector(layout, g)?)?;
    }
    for group in [roles.bath_a, roles.bath_b].into_iter().flatten() {
        let mg = layout.mode_group(group)?;
        if mg.count > 1 && spec.bath_frame != BathFrame::Collective {
            return config("the cooperative projector needs baths in the collective-mode frame");
        }
        // Collective modes 1.. must be in vacuum: local index < cutoff (mode 0 only).
        let local_dim = mg.cutoff.pow(mg.count as u32);
        let diag: Vec<_> = (0..local_dim)
            .map(|i| num_complex::Complex64::new(if i < mg.cutoff { 1.0 } else { 0.0 }, 0.0))
            .collect();
        let local = OperatorMatrix::diagonal(&diag).with_hermitian_flag();
        p = p.matmul(&embed(layout, Factor::Modes(group), &local)?)?;
    }
    Ok(p.with_hermitian_flag())
}

#[derive(Clone, Debug)]
pub struct SectorDecomposition {
    pub p_cooperative: OperatorMatrix,
    pub h_c: OperatorMatrix,
    pub h_n: OperatorMatrix,
    pub h_cn: OperatorMatrix,
    pub leakage_frobenius: f64,
    pub leakage_spectral: f64,
    pub spectral_converged: bool,
    /// `max |H - (H_C + H_N + H_CN)|`.
    pub reconstruction_error: f64,
}

/// Serializable digest of a [`SectorDecomposition`].
#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct SectorSummary {
    pub dim: usize,
    pub cooperative_rank: usize,
    pub h_c_frobenius: f64,
    pub h_n_frobenius: f64,
    pub leakage_frobenius: f64,
    pub leakage_spectral: f64,
    pub spectral_converged: bool,
    /// `‖H_CN‖_F / ‖H_C‖_F`.
    pub leakage_ratio: f64,
    pub reconstruction_error: f64,
}

pub fn decompose(h: &OperatorMatrix, p: &OperatorMatrix) -> Result<SectorDecomposition> {
    check_dim(h.dim(), p.dim())?;
    let q = OperatorMatrix::identity(h.dim()).sub(p)?;
    let hp = h.matmul(p)?;
    let hq = h.matmul(&q)?;
    let h_c = p.matmul(&hp)?;
    let h_n = q.matmul(&hq)?;
    let h_cn = p.matmul(&hq)?.add(&q.matmul(&hp)?)?;
    let reconstruction_error = h.max_abs_diff(&h_c.add(&h_n)?.add(&h_cn)?)?;
    let leakage_frobenius = h_cn.frobenius_norm();
    let (leakage_spectral, spectral_converged) =
        h_cn.spectral_norm_hermitian(SPECTRAL_TOL, SPECTRAL_MAX_ITER);
    Ok(SectorDecomposition {
        p_cooperative: p.clone(),
        h_c: h_c.with_hermitian_flag(),
        h_n: h_n.with_hermitian_flag(),
        h_cn: h_cn.with_hermitian_flag(),
        leakage_frobenius,
        leakage_spectral,
        spectral_converged,
        reconstruction_error,
    })
}

impl SectorDecomposition {
    pub fn rank(&self) -> usize {
        self.p_cooperative.trace().re.round() as usize
    }

    pub fn summary(&self) -> SectorSummary {
        let hc = self.h_c.frobenius_norm();
        SectorSummary {
            dim: self.h_c.dim(),
            cooperative_rank: self.rank(),
            h_c_frobenius: hc,
            h_n_frobenius: self.h_n.frobenius_norm(),
            leakage_frobenius: self.leakage_frobenius,
            leakage_spectral: self.leakage_spectral,
            spectral_converged: self.spectral_converged,
            leakage_ratio: if hc > 0.0 { self.leakage_frobenius / hc } else { 0.0 },
            reconstruction_error: self.reconstruction_error,
        }
    }
}
