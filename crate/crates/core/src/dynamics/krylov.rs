//! `exp(-iHt) ψ` by Lanczos projection with adaptive sub-stepping.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::hilbert::OperatorMatrix;

use super::{dot, norm};

/// Largest Krylov subspace per step.
pub const MAX_KRYLOV_DIM: usize = 30;

/// Relative sub-step below which the propagator gives up.
const MIN_STEP_FRACTION: f64 = 1e-9;

/// One Lanczos step: returns `exp(-i H dt) v` and the a-posteriori error estimate.
fn lanczos_step(h: &OperatorMatrix, v: &[C64], dt: f64, m_max: usize) -> (Vec<C64>, f64) {
    let n = v.len();
    let beta0 = norm(v);
    if beta0 == 0.0 {
        return (v.to_vec(), 0.0);
    }
    let m_max = m_max.min(n).max(1);
    let mut basis: Vec<Vec<C64>> = vec![v.iter().map(|x| x / beta0).collect()];
    let mut alpha = Vec::with_capacity(m_max);
    let mut beta: Vec<f64> = Vec::with_capacity(m_max);
    let mut w = vec![C64::new(0.0, 0.0); n];
    let mut breakdown = false;
    let mut residual_beta = 0.0;
    for j in 0..m_max {
        h.apply_into(&basis[j], &mut w);
        let a = dot(&basis[j], &w).re;
        alpha.push(a);
        for (x, q) in w.iter_mut().zip(&basis[j]) {
            *x -= q * a;
        }
        if j > 0 {
            let b = beta[j - 1];
            for (x, q) in w.iter_mut().zip(&basis[j - 1]) {
                *x -= q * b;
            }
        }
        // Full reorthogonalization; subspaces are small.
        for q in &basis {
            let c = dot(q, &w);
            for (x, y) in w.iter_mut().zip(q) {
                *x -= y * c;
            }
        }
        let b = norm(&w);
        let scale = a.abs() + beta.last().copied().unwrap_or(0.0) + 1.0;
        if b <= 1e-13 * scale {
            breakdown = true;
            break;
        }
        if j + 1 == m_max {
            residual_beta = b;
            break;
        }
        beta.push(b);
        basis.push(w.iter().map(|x| x / b).collect());
    }
    let m = alpha.len();
    let mut t = DMatrix::<f64>::zeros(m, m);
    for i in 0..m {
        t[(i, i)] = alpha[i];
        if i + 1 < m {
            t[(i, i + 1)] = beta[i];
            t[(i + 1, i)] = beta[i];
        }
    }
    let eig = SymmetricEigen::new(t);
    let coeffs: Vec<C64> = (0..m)
        .map(|k| {
            (0..m)
                .map(|l| {
                    let phase = C64::new(0.0, -eig.eigenvalues[l] * dt).exp();
                    phase * eig.eigenvectors[(k, l)] * eig.eigenvectors[(0, l)]
                })
                .sum()
        })
        .collect();
    let err = if breakdown { 0.0 } else { beta0 * residual_beta * coeffs[m - 1].norm() };
    let mut out = vec![C64::new(0.0, 0.0); n];
    for (c, q) in coeffs.iter().zip(&basis) {
        for (o, x) in out.iter_mut().zip(q) {
            *o += c * x * beta0;
        }
    }
    (out, err)
}

/// Propagate `psi` by `span` with sub-steps whose error estimate is at most `tol`.
///
/// `step_hint` carries the last accepted sub-step between calls.
pub(crate) fn propagate(
    h: &OperatorMatrix,
    psi: &[C64],
    span: f64,
    tol: f64,
    step_hint: &mut f64,
) -> Result<Vec<C64>> {
    let mut state = psi.to_vec();
    let mut done = 0.0;
    if span <= 0.0 {
        return Ok(state);
    }
    let mut dt = if *step_hint > 0.0 { step_hint.min(span) } else { span };
    let min_dt = span * MIN_STEP_FRACTION;
    while done < span {
        let step = dt.min(span - done);
        let (next, err) = lanczos_step(h, &state, step, MAX_KRYLOV_DIM);
        if err <= tol {
            state = next;
            done += step;
            *step_hint = dt;
            if err < 0.1 * tol {
                dt *= 1.5;
            }
        } else {
            dt *= 0.5;
            if dt < min_dt {
                return Err(Error::Convergence { achieved: err, tol });
            }
        }
    }
    Ok(state)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_phases_are_exact() {
        let e = [0.3, -1.2, 2.5];
        let h = OperatorMatrix::diagonal(&e.map(|x| C64::new(x, 0.0))).with_hermitian_flag();
        let s = 1.0 / 3f64.sqrt();
        let psi = vec![C64::new(s, 0.0); 3];
        let mut hint = 0.0;
        let out = propagate(&h, &psi, 7.0, 1e-13, &mut hint).unwrap();
        for (k, x) in out.iter().enumerate() {
            let want = C64::new(0.0, -e[k] * 7.0).exp() * s;
            assert!((x - want).norm() < 1e-12);
        }
    }

    #[test]
    fn matches_dense_exponential() {
        // Random-ish Hermitian 12x12 against an eigendecomposition.
        let n = 12;
        let mut trip = Vec::new();
        for i in 0..n {
            trip.push((i, i, C64::new((i as f64 * 0.37).sin(), 0.0)));
            for j in (i + 1)..n {
                let v = C64::new(((i * 7 + j * 3) as f64).cos() * 0.2, ((i + 2 * j) as f64).sin() * 0.1);
                trip.push((i, j, v));
                trip.push((j, i, v.conj()));
            }
        }
        let h = OperatorMatrix::from_triplets(n, trip).unwrap().with_hermitian_flag();
        let mut psi = vec![C64::new(0.0, 0.0); n];
        psi[0] = C64::new(1.0, 0.0);
        let t = 3.3;
        let mut hint = 0.0;
        let out = propagate(&h, &psi, t, 1e-13, &mut hint).unwrap();
        let eig = h.to_dense().symmetric_eigen();
        let mut want = vec![C64::new(0.0, 0.0); n];
        for l in 0..n {
            let phase = C64::new(0.0, -eig.eigenvalues[l] * t).exp();
            let c = eig.eigenvectors[(0, l)].conj();
            for k in 0..n {
                want[k] += eig.eigenvectors[(k, l)] * phase * c;
            }
        }
        for (a, b) in out.iter().zip(&want) {
            assert!((a - b).norm() < 1e-10);
        }
    }
}
