//! Composite spin ⊗ boson spaces: basis codec, Dicke and singlet states,
//! symmetric-subspace projectors and the collective boson-mode transform.

mod layout;
mod operator;
mod state;

use std::sync::Arc;

use num_complex::Complex64 as C64;

pub use layout::{BasisConfig, Factor, ModeGroup, SpaceLayout, DEFAULT_DIM_BUDGET};
pub use operator::{OperatorMatrix, HERMITIAN_TOL, OPERATOR_SCHEMA};
pub use state::{
    binomial, dicke_amplitudes, dicke_state, singlet_state, ProductState, StateVector,
    STATE_SCHEMA,
};

use crate::error::{check_dim, Result};
use crate::hamiltonians::SystemSpec;

/// Layout implied by a model description: spin group A (and B), then the
/// field mode, bath A and bath B, whichever are present.
pub fn build_layout(spec: &SystemSpec) -> Result<Arc<SpaceLayout>> {
    spec.layout().map(Arc::new)
}

/// Lift an operator on one tensor factor to the full space.
pub fn embed(layout: &SpaceLayout, factor: Factor, local: &OperatorMatrix) -> Result<OperatorMatrix> {
    let (stride, local_dim) = layout.factor_shape(factor)?;
    check_dim(local_dim, local.dim())?;
    let mut trip = Vec::new();
    for r in 0..layout.total_dim() {
        let a = (r / stride) % local_dim;
        let base = r - a * stride;
        for (b, v) in local.row(a) {
            trip.push((r, base + b * stride, v));
        }
    }
    let op = OperatorMatrix::from_triplets(layout.total_dim(), trip)?;
    Ok(if local.is_hermitian() { op.with_hermitian_flag() } else { op })
}

/// Projector onto the span of the `n`-excitation Dicke states of `sites` spins (local space).
pub fn symmetric_projector_local(sites: usize) -> Result<OperatorMatrix> {
    let mut trip = Vec::new();
    for n in 0..=sites {
        let amp = dicke_amplitudes(sites, n)?;
        let support: Vec<usize> = (0..amp.len()).filter(|&i| amp[i].norm() > 0.0).collect();
        for &r in &support {
            for &c in &support {
                trip.push((r, c, amp[r] * amp[c].conj()));
            }
        }
    }
    Ok(OperatorMatrix::from_triplets(1 << sites, trip)?.with_hermitian_flag())
}

/// Projector onto the fully symmetric subspace of one spin group, identity elsewhere.
/// Its rank on the group is `N + 1`.
pub fn symmetric_projector(layout: &SpaceLayout, group: usize) -> Result<OperatorMatrix> {
    let n = layout.group_size(group)?;
    embed(layout, Factor::Spins(group), &symmetric_projector_local(n)?)
}

/// Rows of the real orthogonal collective-mode transform of `modes` modes.
///
/// Row 0 is the symmetric mode `(1, ..., 1)/sqrt(L)`. Rows `1..L` come from
/// Gram–Schmidt (applied twice) over the standard basis vectors `e_0 .. e_{L-2}`
/// in that order, so for `L = 2` the second row is `(1, -1)/sqrt(2)`.
pub fn collective_mode_rows(modes: usize) -> Vec<Vec<f64>> {
    if modes == 0 {
        return Vec::new();
    }
    let mut rows = vec![vec![1.0 / (modes as f64).sqrt(); modes]];
    for k in 0..modes - 1 {
        let mut v = vec![0.0; modes];
        v[k] = 1.0;
        for _ in 0..2 {
            for r in &rows {
                let dot: f64 = r.iter().zip(&v).map(|(a, b)| a * b).sum();
                v.iter_mut().zip(r).for_each(|(x, y)| *x -= dot * y);
            }
        }
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        v.iter_mut().for_each(|x| *x /= n);
        rows.push(v);
    }
    rows
}

/// The collective-mode transform as an `L x L` operator (row `q` expresses
/// collective mode `b_q = sum_l O[q][l] a_l`).
pub fn collective_mode_transform(modes: usize) -> OperatorMatrix {
    OperatorMatrix::from_dense_real(&collective_mode_rows(modes)).expect("square by construction")
}

/// Permutation operator exchanging sites `a` and `b` of `group`.
pub fn site_transposition(layout: &SpaceLayout, group: usize, a: usize, b: usize) -> Result<OperatorMatrix> {
    let n = layout.group_size(group)?;
    if a >= n || b >= n {
        return crate::error::domain("transposition site out of range");
    }
    let trip = (0..layout.total_dim()).map(|i| {
        let (x, y) = (layout.spin_bit(i, group, a), layout.spin_bit(i, group, b));
        let j = if x != y { layout.flip_spin(layout.flip_spin(i, group, a), group, b) } else { i };
        (j, i, C64::new(1.0, 0.0))
    });
    OperatorMatrix::from_triplets(layout.total_dim(), trip)
}

/// Diagonal operator counting spin excitations plus boson quanta.
pub fn total_excitation_operator(layout: &SpaceLayout) -> OperatorMatrix {
    let diag: Vec<C64> =
        (0..layout.total_dim()).map(|i| C64::new(layout.total_excitations(i) as f64, 0.0)).collect();
    OperatorMatrix::diagonal(&diag).with_hermitian_flag()
}
