//! Pure-dephasing Lindblad evolution on dense density matrices.
//!
//! `dρ/dt = -i[H, ρ] + Σ_k γ (L_k ρ L_k† - ½{L_k† L_k, ρ})` with `L_k = σ_z^j`
//! for every site (independent) or `L_g = Σ_j σ_z^j` for every spin group
//! (collective). Integration is classical RK4 with a fixed step per output
//! interval; a run that breaks the trace or positivity gates is repeated with
//! half the step.

use std::fmt::Write as _;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{check_times, dot, PropagationResult, RunKind, POSITIVITY_LIMIT, TRACE_DRIFT_LIMIT};
use crate::error::{check_dim, domain, Error, Result};
use crate::fit;
use crate::hilbert::{dicke_state, OperatorMatrix, SpaceLayout, StateVector};

/// Largest Hilbert dimension propagated as a dense density matrix.
pub const DENSITY_DIM_BUDGET: usize = 1024;

/// `γ dt ‖generator‖` per RK4 step.
const STEP_SCALE: f64 = 0.05;
const MAX_REFINEMENTS: usize = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DephasingKind {
    Independent,
    Collective,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DephasingModel {
    pub kind: DephasingKind,
    /// `γ_φ`, applied to every jump operator.
    pub rate: f64,
}

impl DephasingModel {
    pub fn new(kind: DephasingKind, rate: f64) -> Result<Self> {
        if !(rate >= 0.0) || !rate.is_finite() {
            return domain(format!("dephasing rate must be non-negative, got {rate}"));
        }
        Ok(Self { kind, rate })
    }
}

fn sigma_z(layout: &SpaceLayout, idx: usize, group: usize, site: usize) -> f64 {
    1.0 - 2.0 * layout.spin_bit(idx, group, site) as f64
}

/// Jump operators of `model` on `layout` (each applied at rate `model.rate`).
pub fn jump_operators(layout: &SpaceLayout, model: &DephasingModel) -> Vec<OperatorMatrix> {
    let dim = layout.total_dim();
    let mut out = Vec::new();
    for (g, &sites) in layout.spin_groups().iter().enumerate() {
        match model.kind {
            DephasingKind::Independent => {
                for j in 0..sites {
                    let d: Vec<C64> = (0..dim).map(|i| C64::new(sigma_z(layout, i, g, j), 0.0)).collect();
                    out.push(OperatorMatrix::diagonal(&d).with_hermitian_flag());
                }
            }
            DephasingKind::Collective => {
                let d: Vec<C64> = (0..dim)
                    .map(|i| C64::new((0..sites).map(|j| sigma_z(layout, i, g, j)).sum(), 0.0))
                    .collect();
                out.push(OperatorMatrix::diagonal(&d).with_hermitian_flag());
            }
        }
    }
    out
}

/// Tracked coherence `|<a|ρ|b>|`.
#[derive(Clone, Debug)]
pub struct CoherencePair {
    pub name: String,
    pub a: Vec<C64>,
    pub b: Vec<C64>,
}

impl CoherencePair {
    pub fn new(name: impl Into<String>, a: &StateVector, b: &StateVector) -> Self {
        Self { name: name.into(), a: a.amplitudes().to_vec(), b: b.amplitudes().to_vec() }
    }
}

/// `|ψ><ψ|`.
pub fn pure_density(psi: &[C64]) -> DMatrix<C64> {
    let n = psi.len();
    DMatrix::from_fn(n, n, |r, c| psi[r] * psi[c].conj())
}

fn min_eigenvalue(rho: &DMatrix<C64>) -> f64 {
    let h = (rho + rho.adjoint()) * C64::new(0.5, 0.0);
    h.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min)
}

fn trace(rho: &DMatrix<C64>) -> C64 {
    rho.diagonal().iter().sum()
}

fn row_sum_bound(op: &OperatorMatrix) -> f64 {
    (0..op.dim()).map(|r| op.row(r).map(|(_, v)| v.norm()).sum::<f64>()).fold(0.0, f64::max)
}

struct Generator<'a> {
    h: &'a OperatorMatrix,
    rate: f64,
    jumps: Vec<OperatorMatrix>,
    jumps_dag: Vec<OperatorMatrix>,
    anti: Vec<OperatorMatrix>,
}

impl<'a> Generator<'a> {
    fn new(h: &'a OperatorMatrix, rate: f64, jumps: Vec<OperatorMatrix>) -> Result<Self> {
        let jumps_dag: Vec<_> = jumps.iter().map(|l| l.adjoint()).collect();
        let anti = jumps_dag.iter().zip(&jumps).map(|(d, l)| d.matmul(l)).collect::<Result<Vec<_>>>()?;
        Ok(Self { h, rate, jumps, jumps_dag, anti })
    }

    fn scale(&self) -> f64 {
        let dissipative: f64 = self.jumps.iter().map(|l| row_sum_bound(l).powi(2)).sum();
        2.0 * row_sum_bound(self.h) + 2.0 * self.rate * dissipative
    }

    fn apply(&self, rho: &DMatrix<C64>) -> DMatrix<C64> {
        let i = C64::new(0.0, 1.0);
        let mut out = (self.h.mul_dense(rho) - self.h.dense_mul(rho)) * (-i);
        if self.rate > 0.0 {
            let g = C64::new(self.rate, 0.0);
            let half = C64::new(0.5 * self.rate, 0.0);
            for ((l, ld), a) in self.jumps.iter().zip(&self.jumps_dag).zip(&self.anti) {
                out += l.mul_dense(&ld.dense_mul(rho)) * g;
                out -= (a.mul_dense(rho) + a.dense_mul(rho)) * half;
            }
        }
        out
    }

    fn rk4(&self, rho: &DMatrix<C64>, dt: f64) -> DMatrix<C64> {
        let h = C64::new(dt, 0.0);
        let half = C64::new(0.5 * dt, 0.0);
        let k1 = self.apply(rho);
        let k2 = self.apply(&(rho + &k1 * half));
        let k3 = self.apply(&(rho + &k2 * half));
        let k4 = self.apply(&(rho + &k3 * h));
        rho + (k1 + k2 * C64::new(2.0, 0.0) + k3 * C64::new(2.0, 0.0) + k4) * C64::new(dt / 6.0, 0.0)
    }
}

/// Integrate the dephasing master equation from `rho0` and record the
/// magnitudes of `pairs` at every time in `times`.
pub fn dephasing_evolve(
    h: &OperatorMatrix,
    model: &DephasingModel,
    layout: &SpaceLayout,
    rho0: &DMatrix<C64>,
    times: &[f64],
    pairs: &[CoherencePair],
) -> Result<PropagationResult> {
    let dim = layout.total_dim();
    if dim > DENSITY_DIM_BUDGET {
        return Err(Error::Capacity { dim: dim as u128, budget: DENSITY_DIM_BUDGET });
    }
    DephasingModel::new(model.kind, model.rate)?;
    check_dim(dim, h.dim())?;
    check_dim(dim, rho0.nrows())?;
    check_dim(dim, rho0.ncols())?;
    if !h.is_hermitian() {
        return domain("Hamiltonian is not Hermitian");
    }
    check_times(times)?;
    for p in pairs {
        check_dim(dim, p.a.len())?;
        check_dim(dim, p.b.len())?;
    }
    let herm_defect = (rho0 - rho0.adjoint()).iter().map(|v| v.norm()).fold(0.0, f64::max);
    let tr = trace(rho0);
    if herm_defect > 1e-12 || (tr - C64::new(1.0, 0.0)).norm() > 1e-10 || min_eigenvalue(rho0) < -1e-10 {
        return domain("initial density matrix is not Hermitian, unit-trace and positive semidefinite");
    }
    let generator = Generator::new(h, model.rate, jump_operators(layout, model))?;
    let scale = generator.scale();
    let mut top_levels = Vec::new();
    for (g, mg) in layout.mode_groups().iter().enumerate() {
        for q in 0..mg.count {
            top_levels.push(layout.top_level_indices(g, q).collect::<Vec<_>>());
        }
    }
    let mut step_scale = STEP_SCALE;
    let mut result = None;
    for _ in 0..=MAX_REFINEMENTS {
        let run = integrate(&generator, scale, step_scale, rho0, times, pairs, &top_levels);
        let ok = run.norm_drift < TRACE_DRIFT_LIMIT && run.min_eigenvalue.unwrap_or(0.0) > POSITIVITY_LIMIT;
        result = Some(run);
        if ok {
            break;
        }
        step_scale *= 0.5;
    }
    Ok(result.expect("at least one attempt"))
}

fn integrate(
    generator: &Generator<'_>,
    scale: f64,
    step_scale: f64,
    rho0: &DMatrix<C64>,
    times: &[f64],
    pairs: &[CoherencePair],
    top_levels: &[Vec<usize>],
) -> PropagationResult {
    let mut rho = rho0.clone();
    let mut t = 0.0;
    let mut result = PropagationResult {
        kind: RunKind::Dephasing,
        times: times.to_vec(),
        labels: pairs.iter().map(|p| p.name.clone()).collect(),
        values: Vec::with_capacity(times.len()),
        truncation_leak: 0.0,
        norm_drift: 0.0,
        energy_drift: None,
        min_eigenvalue: Some(f64::INFINITY),
        population_drift: Some(0.0),
    };
    let mut pop_drift: f64 = 0.0;
    let mut min_eig = f64::INFINITY;
    for &target in times {
        let span = target - t;
        if span > 0.0 {
            let steps = if scale > 0.0 { (span * scale / step_scale).ceil().max(1.0) as usize } else { 1 };
            let dt = span / steps as f64;
            for _ in 0..steps {
                rho = generator.rk4(&rho, dt);
            }
        }
        t = target;
        let row = pairs
            .iter()
            .map(|p| {
                let rb = &rho * DMatrix::from_column_slice(p.b.len(), 1, &p.b);
                dot(&p.a, rb.as_slice()).norm()
            })
            .collect();
        result.values.push(row);
        result.norm_drift = result.norm_drift.max((trace(&rho) - C64::new(1.0, 0.0)).norm());
        for i in 0..rho.nrows() {
            pop_drift = pop_drift.max((rho[(i, i)] - rho0[(i, i)]).norm());
        }
        for idx in top_levels {
            let p: f64 = idx.iter().map(|&i| rho[(i, i)].re).sum();
            result.truncation_leak = result.truncation_leak.max(p);
        }
        min_eig = min_eig.min(min_eigenvalue(&rho));
    }
    result.population_drift = Some(pop_drift);
    result.min_eigenvalue = Some(min_eig);
    result
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DecoherencePoint {
    pub n: usize,
    /// Measured decay rate of the chosen measure.
    pub rate: f64,
    /// `rate / baseline_rate`.
    pub ratio: f64,
    /// RMS residual of the log-linear fit (coherence measure only).
    pub fit_residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DecoherenceScalingReport {
    pub kind: DephasingKind,
    /// `coherence`: `|<0…0|ρ|D_n>|` of `(|0…0> + |D_n>)/√2`.
    /// `fidelity_half_loss`: inverse time for `<ψ|ρ|ψ>` of the product state
    /// with `n` sites in `(|0>+|1>)/√2` to lose half of its decay.
    pub measure: &'static str,
    pub sites: usize,
    pub dephasing_rate: f64,
    /// Rate of the same measure for one site and one excitation.
    pub baseline_rate: f64,
    pub points: Vec<DecoherencePoint>,
    /// Log-log slope of `ratio` against `n`.
    pub fitted_exponent: Option<f64>,
    pub fit_residual: Option<f64>,
    pub note: Option<String>,
    pub max_trace_drift: f64,
    pub min_eigenvalue: f64,
}

impl DecoherenceScalingReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,rate,ratio,fit_residual\n");
        for p in &self.points {
            let _ = writeln!(out, "{},{},{},{}", p.n, p.rate, p.ratio, p.fit_residual);
        }
        out
    }
}

/// Rates below this are reported as zero.
const ZERO_RATE: f64 = 1e-10;
const DECAY_SAMPLES: usize = 20;

struct Hygiene {
    trace: f64,
    min_eig: f64,
}

impl Hygiene {
    fn new() -> Self {
        Hygiene { trace: 0.0, min_eig: f64::INFINITY }
    }

    fn absorb(&mut self, run: &PropagationResult) {
        self.trace = self.trace.max(run.norm_drift);
        self.min_eig = self.min_eig.min(run.min_eigenvalue.unwrap_or(f64::INFINITY));
    }

    fn merge<T>(&mut self, parts: Vec<(T, Hygiene)>) -> Vec<T> {
        parts
            .into_iter()
            .map(|(x, h)| {
                self.trace = self.trace.max(h.trace);
                self.min_eig = self.min_eig.min(h.min_eig);
                x
            })
            .collect()
    }
}

/// Exponential decay rate of `|<a|ρ(t)|b>|` for `ρ(0) = |ψ><ψ|`, `ψ ∝ a + b`.
fn coherence_decay(
    layout: &SpaceLayout,
    model: &DephasingModel,
    a: &StateVector,
    b: &StateVector,
    hygiene: &mut Hygiene,
) -> Result<(f64, f64)> {
    let h = OperatorMatrix::zeros(layout.total_dim()).with_hermitian_flag();
    let s = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let psi = a.superpose(s, b, s)?;
    let rho0 = pure_density(psi.amplitudes());
    let pair = [CoherencePair::new("c", a, b)];
    let c0 = dot(a.amplitudes(), (&rho0 * DMatrix::from_column_slice(b.dim(), 1, b.amplitudes())).as_slice()).norm();
    // Pilot step sets the window to about two e-foldings.
    let pilot_t = if model.rate > 0.0 { 0.01 / model.rate } else { 1.0 };
    let pilot = dephasing_evolve(&h, model, layout, &rho0, &[pilot_t], &pair)?;
    hygiene.absorb(&pilot);
    let pilot_rate = -(pilot.values[0][0] / c0).ln() / pilot_t;
    if !(pilot_rate > ZERO_RATE) {
        return Ok((pilot_rate.max(0.0), 0.0));
    }
    let t_end = 2.0 / pilot_rate;
    let times: Vec<f64> = (1..=DECAY_SAMPLES).map(|k| t_end * k as f64 / DECAY_SAMPLES as f64).collect();
    let run = dephasing_evolve(&h, model, layout, &rho0, &times, &pair)?;
    hygiene.absorb(&run);
    let mut x = vec![0.0];
    let mut y = vec![c0.ln()];
    for (t, row) in times.iter().zip(&run.values) {
        x.push(*t);
        y.push(row[0].ln());
    }
    let line = fit::linear(&x, &y).ok_or_else(|| Error::Degenerate("coherence decay fit".into()))?;
    Ok((-line.slope, line.rms_residual))
}

fn spin_layout(sites: usize) -> Result<Arc<SpaceLayout>> {
    Ok(Arc::new(SpaceLayout::new(vec![sites], vec![])?))
}

fn check_range(sites: usize, n_range: &[usize]) -> Result<()> {
    if sites == 0 {
        return domain("at least one site is required");
    }
    if n_range.is_empty() {
        return Err(Error::Degenerate("empty excitation range".into()));
    }
    if let Some(n) = n_range.iter().find(|&&n| n == 0 || n > sites) {
        return domain(format!("excitation number {n} outside 1..={sites}"));
    }
    Ok(())
}

fn finish(
    kind: DephasingKind,
    measure: &'static str,
    sites: usize,
    rate: f64,
    baseline: f64,
    raw: Vec<(usize, f64, f64)>,
    hygiene: Hygiene,
) -> DecoherenceScalingReport {
    let degenerate = !(baseline > ZERO_RATE);
    let points: Vec<DecoherencePoint> = raw
        .into_iter()
        .map(|(n, r, res)| DecoherencePoint {
            n,
            rate: r,
            ratio: if degenerate { 0.0 } else { r / baseline },
            fit_residual: res,
        })
        .collect();
    let (line, note) = if degenerate {
        (None, Some("all decay rates vanish; exponent fit refused (degenerate)".to_string()))
    } else if points.len() < 3 {
        (None, Some("fewer than three excitation numbers; no exponent fitted".to_string()))
    } else {
        let xs: Vec<f64> = points.iter().map(|p| p.n as f64).collect();
        let ys: Vec<f64> = points.iter().map(|p| p.ratio).collect();
        (fit::power_law(&xs, &ys), None)
    };
    DecoherenceScalingReport {
        kind,
        measure,
        sites,
        dephasing_rate: rate,
        baseline_rate: baseline,
        points,
        fitted_exponent: line.map(|l| l.slope),
        fit_residual: line.map(|l| l.rms_residual),
        note,
        max_trace_drift: hygiene.trace,
        min_eigenvalue: hygiene.min_eig,
    }
}

/// Decay of `|<0…0|ρ|D_n>|` for each `n`, relative to one site with one excitation.
pub fn measure_decoherence_scaling(
    kind: DephasingKind,
    sites: usize,
    n_range: &[usize],
    rate: f64,
) -> Result<DecoherenceScalingReport> {
    check_range(sites, n_range)?;
    let model = DephasingModel::new(kind, rate)?;
    let mut hygiene = Hygiene::new();
    let one = spin_layout(1)?;
    let (baseline, _) =
        coherence_decay(&one, &model, &dicke_state(&one, 0, 0)?, &dicke_state(&one, 0, 1)?, &mut hygiene)?;
    let layout = spin_layout(sites)?;
    let ground = dicke_state(&layout, 0, 0)?;
    let per_n = n_range
        .par_iter()
        .map(|&n| {
            let mut hy = Hygiene::new();
            let (r, res) = coherence_decay(&layout, &model, &ground, &dicke_state(&layout, 0, n)?, &mut hy)?;
            Ok(((n, r, res), hy))
        })
        .collect::<Result<Vec<_>>>()?;
    let raw = hygiene.merge(per_n);
    Ok(finish(kind, "coherence", sites, rate, baseline, raw, hygiene))
}

/// Decay rate of the coherence between `|1 0 … 0>` and `|0 1 … 0>`.
pub fn measure_intra_sector_rate(kind: DephasingKind, sites: usize, rate: f64) -> Result<f64> {
    if sites < 2 {
        return domain("two sites are required");
    }
    let model = DephasingModel::new(kind, rate)?;
    let layout = spin_layout(sites)?;
    let a = StateVector::basis(layout.clone(), 1)?;
    let b = StateVector::basis(layout.clone(), 2)?;
    let (r, _) = coherence_decay(&layout, &model, &a, &b, &mut Hygiene::new())?;
    Ok(r)
}

fn product_plus(layout: &Arc<SpaceLayout>, n: usize) -> Result<StateVector> {
    let sites = layout.total_sites();
    let amp = C64::new(0.5f64.powf(n as f64 / 2.0), 0.0);
    let amps = (0..layout.total_dim())
        .map(|i| if i >> n == 0 && i < (1 << sites) { amp } else { C64::new(0.0, 0.0) })
        .collect();
    StateVector::from_amplitudes(layout.clone(), amps)
}

/// Inverse half-loss time of `<ψ|ρ|ψ>` between 1 and its dephased limit.
fn fidelity_half_loss_rate(
    layout: &Arc<SpaceLayout>,
    model: &DephasingModel,
    psi: &StateVector,
    hygiene: &mut Hygiene,
) -> Result<f64> {
    if !(model.rate > 0.0) {
        return Ok(0.0);
    }
    let h = OperatorMatrix::zeros(layout.total_dim()).with_hermitian_flag();
    let rho0 = pure_density(psi.amplitudes());
    let pair = [CoherencePair::new("f", psi, psi)];
    let f_inf: f64 = psi.amplitudes().iter().map(|a| a.norm_sqr().powi(2)).sum();
    let target = 0.5 * (1.0 + f_inf);
    let fidelity = |t: f64, hygiene: &mut Hygiene| -> Result<f64> {
        let run = dephasing_evolve(&h, model, layout, &rho0, &[t], &pair)?;
        hygiene.absorb(&run);
        Ok(run.values[0][0])
    };
    let (mut lo, mut f_lo) = (0.0, 1.0 - target);
    let mut hi = 1.0 / model.rate;
    let mut f_hi = fidelity(hi, hygiene)? - target;
    while f_hi > 0.0 {
        (lo, f_lo) = (hi, f_hi);
        hi *= 2.0;
        if hi > 1e6 / model.rate {
            return Err(Error::Degenerate("fidelity does not decay".into()));
        }
        f_hi = fidelity(hi, hygiene)? - target;
    }
    // Illinois regula falsi on F(t) - target.
    let mut side = 0;
    for _ in 0..100 {
        let t = (lo * f_hi - hi * f_lo) / (f_hi - f_lo);
        let f = fidelity(t, hygiene)? - target;
        if f == 0.0 || hi - lo <= 1e-13 * hi {
            return Ok(1.0 / t);
        }
        if f > 0.0 {
            lo = t;
            f_lo = f;
            if side == -1 {
                f_hi *= 0.5;
            }
            side = -1;
        } else {
            hi = t;
            f_hi = f;
            if side == 1 {
                f_lo *= 0.5;
            }
            side = 1;
        }
        if f.abs() < 1e-14 {
            return Ok(1.0 / t);
        }
    }
    Ok(2.0 / (lo + hi))
}

/// Fidelity half-loss rate of uncorrelated product states with `n` sites in
/// `(|0>+|1>)/√2` under independent dephasing.
pub fn measure_uncorrelated_scaling(sites: usize, n_range: &[usize], rate: f64) -> Result<DecoherenceScalingReport> {
    check_range(sites, n_range)?;
    let kind = DephasingKind::Independent;
    let model = DephasingModel::new(kind, rate)?;
    let mut hygiene = Hygiene::new();
    let one = spin_layout(1)?;
    let baseline = fidelity_half_loss_rate(&one, &model, &product_plus(&one, 1)?, &mut hygiene)?;
    let layout = spin_layout(sites)?;
    let per_n = n_range
        .par_iter()
        .map(|&n| {
            let mut hy = Hygiene::new();
            let r = fidelity_half_loss_rate(&layout, &model, &product_plus(&layout, n)?, &mut hy)?;
            Ok(((n, r, 0.0), hy))
        })
        .collect::<Result<Vec<_>>>()?;
    let raw = hygiene.merge(per_n);
    Ok(finish(kind, "fidelity_half_loss", sites, rate, baseline, raw, hygiene))
}
