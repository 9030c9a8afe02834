//! One function per subcommand. Each returns its artifacts and tolerance
//! checks; nothing touches the filesystem here.

use std::fmt::Write as _;
use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use super::config::{DephasingSection, DiffusionSection, SectorsSection, SuperradianceSection, SupertransferSection};
use crate::diffusion::{feasibility_boundary, headline_numbers, simulate_walk, sweep, sweep_csv};
use crate::dynamics::{
    measure_decoherence_scaling, measure_intra_sector_rate, measure_uncorrelated_scaling, rabi_frequency,
    short_time_rate, DecoherenceScalingReport, DephasingKind, POSITIVITY_LIMIT, TRACE_DRIFT_LIMIT,
};
use crate::error::Result;
use crate::fit;
use crate::hamiltonians::{apply_site_disorder, dicke_hamiltonian, full_hamiltonian, hopping_hamiltonian, Bath, SystemSpec};
use crate::hilbert::ProductState;
use crate::output::{line_plot, ArtifactSet, Axes, Series};
use crate::sectors::{
    cooperative_projector, decompose, supertransfer_forward, verify_scaling, GridPoint, ScalingFormula,
};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Check { name: name.into(), passed, detail: detail.into() }
    }

    fn at_most(name: &str, value: f64, limit: f64) -> Self {
        Check::new(name, value <= limit, format!("{value:.3e} <= {limit:.3e}"))
    }
}

#[derive(Debug, Default)]
pub struct Outcome {
    pub artifacts: ArtifactSet,
    pub checks: Vec<Check>,
    pub stages: Vec<(String, f64)>,
}

impl Outcome {
    fn stage<T>(&mut self, name: &str, f: impl FnOnce() -> Result<T>) -> Result<T> {
        let start = Instant::now();
        let out = f()?;
        self.stages.push((name.to_string(), start.elapsed().as_secs_f64()));
        Ok(out)
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn superradiance(cfg: &SuperradianceSection) -> Result<Outcome> {
    let mut out = Outcome::default();
    let grid: Vec<GridPoint> = (1..=cfg.n_max)
        .flat_map(|big| (1..=big).map(move |n| GridPoint { n_sites: big, n, ..Default::default() }))
        .collect();
    let report = out.stage("matrix_elements", || verify_scaling(ScalingFormula::Emission, &grid, cfg.gamma))?;
    let dynamic: Vec<Option<f64>> = if cfg.dynamic {
        out.stage("short_time_rates", || {
            grid.par_iter()
                .map(|p| {
                    let spec = SystemSpec::dicke(p.n_sites, cfg.omega, cfg.gamma, cfg.cutoff);
                    let layout = Arc::new(spec.layout()?);
                    let h = dicke_hamiltonian(&spec)?;
                    let i = ProductState::new(&layout).dicke(0, p.n)?.build()?;
                    let f = ProductState::new(&layout).dicke(0, p.n - 1)?.fock(0, &[1])?.build()?;
                    let amp = cfg.gamma * ((p.n * (p.n_sites - p.n + 1)) as f64).sqrt();
                    Ok(Some(short_time_rate(&h, &i, &f, 0.05 / amp)?.rate))
                })
                .collect::<Result<Vec<_>>>()
        })?
    } else {
        vec![None; grid.len()]
    };
    let mut csv = String::from("N,n,predicted,matrix_element,dynamic_rate,abs_err,dynamic_rel_err\n");
    let mut max_abs: f64 = 0.0;
    let mut max_dyn: f64 = 0.0;
    for (s, d) in report.samples.iter().zip(&dynamic) {
        let rel = d.map(|r| (r / s.predicted - 1.0).abs());
        max_abs = max_abs.max(s.abs_error);
        max_dyn = max_dyn.max(rel.unwrap_or(0.0));
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{},{}",
            s.point.n_sites,
            s.point.n,
            s.predicted,
            s.measured.sqrt(),
            opt(*d),
            s.abs_error,
            opt(rel)
        );
    }
    let slice = |pick: &dyn Fn(&GridPoint) -> bool| -> Vec<(f64, f64)> {
        report.samples.iter().filter(|s| pick(&s.point)).map(|s| (s.point.n_sites as f64, s.measured)).collect()
    };
    let single = slice(&|p| p.n == 1);
    let half = slice(&|p| p.n == p.n_sites.div_ceil(2));
    let exponent = |pts: &[(f64, f64)]| {
        let (x, y): (Vec<f64>, Vec<f64>) = pts.iter().copied().unzip();
        fit::power_law(&x, &y).map(|l| l.slope)
    };
    out.artifacts.data("superradiance.csv", csv);
    out.artifacts.json(
        "summary.json",
        &json!({
            "schema": "supertransfer.superradiance-summary/1",
            "gamma": cfg.gamma,
            "n_max": cfg.n_max,
            "rows": report.samples.len(),
            "max_abs_err": max_abs,
            "max_dynamic_rel_err": if cfg.dynamic { Some(max_dyn) } else { None },
            "single_excitation_exponent": exponent(&single),
            "half_filling_exponent": exponent(&half),
        }),
    )?;
    out.artifacts.plot(
        "emission_rate.svg",
        line_plot(
            &Axes { title: "Emission rate", x_label: "N", y_label: "rate / γ²", log_x: true, log_y: true },
            &[
                Series { name: "n = 1", points: single.iter().map(|&(x, y)| (x, y / cfg.gamma.powi(2))).collect() },
                Series { name: "n = ⌈N/2⌉", points: half.iter().map(|&(x, y)| (x, y / cfg.gamma.powi(2))).collect() },
            ],
        ),
    );
    out.checks.push(Check::at_most("emission matrix elements", max_abs, cfg.tolerance));
    if cfg.dynamic {
        out.checks.push(Check::at_most("short-time emission rates (relative)", max_dyn, cfg.dynamic_tolerance));
    }
    Ok(out)
}

pub fn supertransfer(cfg: &SupertransferSection) -> Result<Outcome> {
    let mut out = Outcome::default();
    let mut grid = Vec::new();
    for big_n in 1..=cfg.n_max {
        for big_m in 1..=cfg.m_max {
            for n in 0..=big_n {
                for m in 0..=big_m {
                    if (1..=cfg.max_excitations).contains(&(n + m)) {
                        grid.push(GridPoint { n_sites: big_n, n, m_sites: big_m, m, m_from: 0 });
                    }
                }
            }
        }
    }
    let net = out.stage("golden_rule", || verify_scaling(ScalingFormula::NetTransfer, &grid, cfg.gamma))?;
    let gamma2 = cfg.gamma * cfg.gamma;
    let dynamic = out.stage("short_time_rates", || {
        grid.par_iter()
            .map(|p| {
                if p.n == 0 || p.m == p.m_sites {
                    return Ok(None);
                }
                let spec = SystemSpec::hopping(p.n_sites, cfg.omega_a, p.m_sites, cfg.omega_b, cfg.gamma);
                let layout = Arc::new(spec.layout()?);
                let h = hopping_hamiltonian(&spec)?;
                let i = ProductState::new(&layout).dicke(0, p.n)?.dicke(1, p.m)?.build()?;
                let f = ProductState::new(&layout).dicke(0, p.n - 1)?.dicke(1, p.m + 1)?.build()?;
                let fwd = supertransfer_forward(p.n, p.n_sites, p.m, p.m_sites, cfg.gamma)?;
                Ok(Some((fwd, short_time_rate(&h, &i, &f, 0.05 / fwd.sqrt())?.rate)))
            })
            .collect::<Result<Vec<_>>>()
    })?;
    let mut csv =
        String::from("N,n,M,m,predicted_net,measured_net,ratio,forward_predicted,forward_dynamic,dynamic_rel_err\n");
    let (mut max_ratio, mut max_dyn): (f64, f64) = (0.0, 0.0);
    let mut single = Vec::new();
    for (s, d) in net.samples.iter().zip(&dynamic) {
        let p = s.point;
        let ratio = if s.predicted != 0.0 { Some(s.measured / s.predicted) } else { None };
        let dev = match ratio {
            Some(r) => (r - 1.0).abs(),
            None => s.measured.abs() / gamma2,
        };
        max_ratio = max_ratio.max(dev);
        let rel = d.map(|(f, r)| (r / f - 1.0).abs());
        max_dyn = max_dyn.max(rel.unwrap_or(0.0));
        if p.n == 1 && p.m == 0 {
            single.push(((p.n_sites * p.m_sites) as f64, s.measured));
        }
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{},{},{},{},{}",
            p.n_sites,
            p.n,
            p.m_sites,
            p.m,
            s.predicted,
            s.measured,
            opt(ratio),
            opt(d.map(|x| x.0)),
            opt(d.map(|x| x.1)),
            opt(rel)
        );
    }
    let detuning = cfg.omega_b - cfg.omega_a;
    let pairs: Vec<(usize, usize)> =
        (1..=cfg.n_max).flat_map(|a| (1..=cfg.m_max).map(move |b| (a, b))).collect();
    let rabi = out.stage("rabi", || {
        pairs
            .par_iter()
            .map(|&(a, b)| {
                let spec = SystemSpec::hopping(a, cfg.omega_a, b, cfg.omega_b, cfg.gamma);
                let layout = Arc::new(spec.layout()?);
                let h = hopping_hamiltonian(&spec)?;
                let sa = ProductState::new(&layout).dicke(0, 1)?.build()?;
                let sb = ProductState::new(&layout).dicke(1, 1)?.build()?;
                rabi_frequency(&h, &sa, &sb)
            })
            .collect::<Result<Vec<_>>>()
    })?;
    let mut rabi_csv =
        String::from("N,M,detuning,predicted_frequency,measured_frequency,rel_err,peak_population,max_leakage\n");
    let mut max_rabi: f64 = 0.0;
    for (&(a, b), r) in pairs.iter().zip(&rabi) {
        let c2 = (a * b) as f64 * gamma2;
        let want = 2.0 * (c2 + detuning * detuning / 4.0).sqrt();
        let rel = (r.frequency / want - 1.0).abs();
        max_rabi = max_rabi.max(rel);
        let _ = writeln!(
            rabi_csv,
            "{a},{b},{detuning},{want},{},{rel},{},{}",
            r.frequency, r.peak_population, r.max_leakage
        );
    }
    let (x, y): (Vec<f64>, Vec<f64>) = single.iter().copied().unzip();
    let exponent = fit::power_law(&x, &y).map(|l| l.slope);
    out.artifacts.data("supertransfer.csv", csv);
    out.artifacts.data("rabi.csv", rabi_csv);
    out.artifacts.json(
        "summary.json",
        &json!({
            "schema": "supertransfer.supertransfer-summary/1",
            "gamma": cfg.gamma,
            "detuning": detuning,
            "rows": net.samples.len(),
            "max_ratio_deviation": max_ratio,
            "max_dynamic_rel_err": max_dyn,
            "max_rabi_rel_err": max_rabi,
            "single_excitation_exponent_vs_NM": exponent,
            "min_peak_transfer": rabi.iter().map(|r| r.peak_population).fold(1.0, f64::min),
        }),
    )?;
    out.artifacts.plot(
        "nm_scaling.svg",
        line_plot(
            &Axes { title: "Single-excitation transfer rate", x_label: "N·M", y_label: "rate / γ²", log_x: true, log_y: true },
            &[Series { name: "golden rule", points: single.iter().map(|&(x, y)| (x, y / gamma2)).collect() }],
        ),
    );
    out.checks.push(Check::at_most("net transfer rate vs golden rule", max_ratio, cfg.tolerance));
    out.checks.push(Check::at_most("short-time forward rates (relative)", max_dyn, cfg.dynamic_tolerance));
    out.checks.push(Check::at_most("Rabi frequencies (relative)", max_rabi, cfg.rabi_tolerance));
    Ok(out)
}

pub fn sectors(cfg: &SectorsSection, seed: u64) -> Result<Outcome> {
    let mut out = Outcome::default();
    let mut spec = SystemSpec::hopping(cfg.sites_a, cfg.omega, cfg.sites_b, cfg.omega, cfg.gamma);
    spec.rng_seed = seed;
    let mut bath_dims = 1;
    if cfg.bath_modes > 0 {
        spec.bath_a = Some(Bath::homogeneous(cfg.sites_a, cfg.bath_modes, cfg.bath_frequency, cfg.bath_gamma, cfg.bath_cutoff));
        spec.bath_b = Some(Bath::homogeneous(cfg.sites_b, cfg.bath_modes, cfg.bath_frequency, cfg.bath_gamma, cfg.bath_cutoff));
        bath_dims = cfg.bath_cutoff * cfg.bath_cutoff;
    }
    let layout = spec.layout()?;
    let p = cooperative_projector(&layout, &spec)?;
    let clean = out.stage("decompose", || decompose(&full_hamiltonian(&spec)?, &p))?;
    let series = out.stage("disorder_series", || {
        cfg.disorder
            .par_iter()
            .map(|&ratio| {
                let d = apply_site_disorder(&spec, ratio * cfg.gamma)?;
                decompose(&full_hamiltonian(&d)?, &p)
            })
            .collect::<Result<Vec<_>>>()
    })?;
    let expected_rank = (cfg.sites_a + 1) * (cfg.sites_b + 1) * bath_dims;
    let deltas: Vec<f64> = cfg.disorder.iter().map(|r| r * cfg.gamma).collect();
    let leak: Vec<f64> = series.iter().map(|d| d.leakage_frobenius).collect();
    let line = fit::through_origin(&deltas, &leak);
    let mut csv = String::from("delta_over_gamma,delta,leakage_frobenius,leakage_spectral,spectral_converged,reconstruction_error\n");
    let mut recon = clean.reconstruction_error;
    for ((ratio, delta), d) in cfg.disorder.iter().zip(&deltas).zip(&series) {
        recon = recon.max(d.reconstruction_error);
        let _ = writeln!(
            csv,
            "{ratio},{delta},{},{},{},{}",
            d.leakage_frobenius, d.leakage_spectral, d.spectral_converged, d.reconstruction_error
        );
    }
    let summary = clean.summary();
    out.artifacts.data("leakage.csv", csv);
    out.artifacts.json(
        "summary.json",
        &json!({
            "schema": "supertransfer.sectors-summary/1",
            "seed": seed,
            "homogeneous": summary,
            "expected_rank": expected_rank,
            "leakage_slope": line.map(|l| l.slope),
            "leakage_r_squared": line.map(|l| l.r_squared),
        }),
    )?;
    out.artifacts.plot(
        "leakage.svg",
        line_plot(
            &Axes { title: "Sector leakage vs disorder", x_label: "δ / γ", y_label: "‖H_CN‖_F", ..Default::default() },
            &[Series { name: "leakage", points: cfg.disorder.iter().copied().zip(leak.iter().copied()).collect() }],
        ),
    );
    out.checks.push(Check::new(
        "cooperative rank",
        summary.cooperative_rank == expected_rank,
        format!("{} == {expected_rank}", summary.cooperative_rank),
    ));
    out.checks.push(Check::at_most("reconstruction error", recon, 1e-12));
    out.checks.push(Check::at_most("homogeneous leakage", clean.leakage_frobenius, cfg.leakage_tolerance));
    let r2 = line.map_or(0.0, |l| l.r_squared);
    out.checks.push(Check::new(
        "leakage linear in disorder",
        r2 > cfg.r_squared_min,
        format!("R² = {r2:.6} > {}", cfg.r_squared_min),
    ));
    Ok(out)
}

fn decoherence_rows(csv: &mut String, label: &str, r: &DecoherenceScalingReport) {
    for p in &r.points {
        let _ = writeln!(csv, "{label},{},{},{},{},{}", r.measure, p.n, p.rate, p.ratio, p.fit_residual);
    }
}

fn model_summary(r: &DecoherenceScalingReport, reference: f64) -> serde_json::Value {
    let note = match r.fitted_exponent {
        Some(e) => Some(format!(
            "measured exponent {e:.3} vs reference scaling exponent {reference} (difference {:+.3})",
            e - reference
        )),
        None => r.note.clone(),
    };
    json!({
        "measure": r.measure,
        "baseline_rate": r.baseline_rate,
        "fitted_exponent": r.fitted_exponent,
        "fit_residual": r.fit_residual,
        "reference_exponent": reference,
        "comparison": note,
    })
}

pub fn dephasing(cfg: &DephasingSection) -> Result<Outcome> {
    let mut out = Outcome::default();
    let ns: Vec<usize> = (1..=cfg.n_max).collect();
    let ind = out.stage("independent", || measure_decoherence_scaling(DephasingKind::Independent, cfg.sites, &ns, cfg.rate))?;
    let col = out.stage("collective", || measure_decoherence_scaling(DephasingKind::Collective, cfg.sites, &ns, cfg.rate))?;
    let unc = out.stage("uncorrelated", || measure_uncorrelated_scaling(cfg.sites, &ns, cfg.rate))?;
    let intra = if cfg.sites >= 2 {
        Some(out.stage("intra_sector", || measure_intra_sector_rate(DephasingKind::Collective, cfg.sites, cfg.rate))?)
    } else {
        None
    };
    let mut csv = String::from("model,measure,n,rate,ratio,fit_residual\n");
    decoherence_rows(&mut csv, "independent", &ind);
    decoherence_rows(&mut csv, "collective", &col);
    decoherence_rows(&mut csv, "uncorrelated", &unc);
    out.artifacts.data("decoherence.csv", csv);
    out.artifacts.json(
        "summary.json",
        &json!({
            "schema": "supertransfer.dephasing-summary/1",
            "sites": cfg.sites,
            "dephasing_rate": cfg.rate,
            "independent": model_summary(&ind, 1.0),
            "collective": model_summary(&col, 1.0),
            "uncorrelated": model_summary(&unc, 0.5),
            "intra_sector_collective_rate": intra,
        }),
    )?;
    let ratio_points = |r: &DecoherenceScalingReport| r.points.iter().map(|p| (p.n as f64, p.ratio)).collect();
    out.artifacts.plot(
        "decoherence.svg",
        line_plot(
            &Axes { title: "Coherence decay relative to one excitation", x_label: "n", y_label: "rate ratio", log_x: true, log_y: true },
            &[
                Series { name: "independent", points: ratio_points(&ind) },
                Series { name: "collective", points: ratio_points(&col) },
                Series { name: "uncorrelated (fidelity)", points: ratio_points(&unc) },
            ],
        ),
    );
    let reports = [&ind, &col, &unc];
    let trace = reports.iter().map(|r| r.max_trace_drift).fold(0.0, f64::max);
    let min_eig = reports.iter().map(|r| r.min_eigenvalue).fold(f64::INFINITY, f64::min);
    out.checks.push(Check::at_most("trace preservation", trace, TRACE_DRIFT_LIMIT));
    out.checks.push(Check::new("positivity", min_eig > POSITIVITY_LIMIT, format!("min eigenvalue {min_eig:.3e}")));
    if cfg.rate > 0.0 {
        let dev = ind.points.iter().map(|p| (p.ratio / p.n as f64 - 1.0).abs()).fold(0.0, f64::max);
        out.checks.push(Check::at_most("independent rate ratio equals n", dev, cfg.tolerance));
        let e = col.fitted_exponent.map_or(f64::INFINITY, |e| (e / 2.0 - 1.0).abs());
        out.checks.push(Check::at_most("collective exponent equals 2", e, cfg.tolerance));
    } else {
        let max_rate = reports.iter().flat_map(|r| r.points.iter().map(|p| p.rate)).fold(0.0, f64::max);
        out.checks.push(Check::at_most("rates vanish without dephasing", max_rate, 1e-10));
        out.checks.push(Check::new(
            "exponent fit refused",
            reports.iter().all(|r| r.fitted_exponent.is_none()),
            "degenerate rates",
        ));
    }
    if let Some(r) = intra {
        out.checks.push(Check::at_most("intra-sector collective rate", r.abs(), 1e-10));
    }
    Ok(out)
}

/// Literature values for the default target and hop times.
const REFERENCE_HOPS: f64 = 1e5;
const REFERENCE_HOP_TIME_FS: (f64, f64) = (10.0, 15.0);
const REFERENCE_ALPHA_TAU_PS: [(f64, f64, f64); 2] = [(5.0, 100.0, 1.1), (2.0, 20.0, 1.5)];

pub fn diffusion(cfg: &DiffusionSection) -> Result<Outcome> {
    let mut out = Outcome::default();
    let walk = &cfg.walk;
    let base = out.stage("walk", || simulate_walk(walk))?;
    let rows = out.stage("sweep", || sweep(walk, &cfg.sweep))?;
    let h = &cfg.headline;
    let headline = headline_numbers(walk.target_l, &h.lifetimes, &h.hop_times, h.threshold_lifetime)?;
    let mut alphas = cfg.sweep.alpha.clone();
    alphas.sort_by(f64::total_cmp);
    let mut gammas = cfg.sweep.gamma.clone();
    gammas.sort_by(f64::total_cmp);
    let mut boundary_csv = String::from("gamma_per_ps,alpha,tau_min_ps,alpha_tau_ps\n");
    let mut boundary_series = Vec::new();
    for &g in &gammas {
        let b = feasibility_boundary(&alphas, g, walk.lifetime, walk.target_l)?;
        for &(a, t) in &b {
            let _ = writeln!(boundary_csv, "{g},{a},{t},{}", a * t);
        }
        boundary_series.push((format!("γ = {g} /ps"), b));
    }
    out.artifacts.data("sweep.csv", sweep_csv(&rows));
    out.artifacts.data("boundary.csv", boundary_csv);
    out.artifacts.json("headline.json", &headline)?;

    let mut checks = Vec::new();
    let mut worst: f64 = 0.0;
    for r in rows.iter().map(|r| (r.gamma, &r.result)).chain([(walk.gamma, &base)]) {
        let (g, d) = r;
        let want = d.step_length_ell * (g * walk.lifetime).sqrt();
        if let Some(se) = d.rms_standard_error {
            if se > 0.0 {
                worst = worst.max((d.rms_displacement_units - want).abs() / se);
            }
        }
    }
    checks.push(Check::at_most("RMS displacement matches ℓ√(γT) (standard errors)", worst, 4.0));
    let conditions_consistent =
        rows.iter().all(|r| r.result.condition_met == (r.result.step_length_ell > r.result.required_step_length));
    checks.push(Check::new("condition_met consistent with step lengths", conditions_consistent, ""));

    let reference_inputs = walk.target_l == 300.0 && h.hop_times == [5.0, 2.0] && h.threshold_lifetime == 1000.0;
    let mut reference = serde_json::Map::new();
    if reference_inputs {
        let hops_ok = headline.naive_hops == 90_000.0 && (headline.naive_hops / REFERENCE_HOPS).log10().abs() < 0.5;
        checks.push(Check::new("naive hop count", hops_ok, format!("{} ~ 1e5", headline.naive_hops)));
        let (lo, hi) = headline
            .naive_hop_times_fs
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &(_, t)| (a.min(t), b.max(t)));
        let overlap = lo <= REFERENCE_HOP_TIME_FS.1 && hi >= REFERENCE_HOP_TIME_FS.0;
        checks.push(Check::new("naive hop time range", overlap, format!("[{lo:.2}, {hi:.2}] fs vs [10, 15] fs")));
        for (&(inv, _, at), &(ref_inv, ref_val, factor)) in
            headline.alpha_tau_thresholds_ps.iter().zip(&REFERENCE_ALPHA_TAU_PS)
        {
            let ok = inv == ref_inv && at / ref_val <= factor && ref_val / at <= factor;
            checks.push(Check::new(
                format!("ατ threshold for 1/γ = {inv} ps"),
                ok,
                format!("{at:.2} ps vs {ref_val} ps (factor {factor})"),
            ));
        }
        reference.insert("naive_hops".into(), json!(REFERENCE_HOPS));
        reference.insert("naive_hop_time_fs".into(), json!(REFERENCE_HOP_TIME_FS));
        reference.insert("alpha_tau_ps".into(), json!(REFERENCE_ALPHA_TAU_PS));
    }
    out.artifacts.json(
        "summary.json",
        &json!({
            "schema": "supertransfer.diffusion-summary/1",
            "config": walk,
            "sweep_axes": cfg.sweep,
            "result": base,
            "headline": headline,
            "reference": reference,
        }),
    )?;

    let mut taus = cfg.sweep.tau.clone();
    taus.sort_by(f64::total_cmp);
    let g0 = gammas[0];
    let rms_series: Vec<(String, Vec<(f64, f64)>)> = taus
        .iter()
        .map(|&t| {
            let pts = rows
                .iter()
                .filter(|r| r.tau == t && r.gamma == g0)
                .map(|r| (r.alpha, r.result.rms_displacement_units))
                .collect();
            (format!("τ = {t} ps"), pts)
        })
        .collect();
    out.artifacts.plot(
        "rms_vs_alpha.svg",
        line_plot(
            &Axes { title: "RMS displacement", x_label: "α", y_label: "lattice units", log_x: true, log_y: true },
            &rms_series.iter().map(|(n, p)| Series { name: n, points: p.clone() }).collect::<Vec<_>>(),
        ),
    );
    out.artifacts.plot(
        "boundary.svg",
        line_plot(
            &Axes { title: "Minimum τ for the step-length condition", x_label: "α", y_label: "τ (ps)", log_x: true, log_y: true },
            &boundary_series.iter().map(|(n, p)| Series { name: n, points: p.clone() }).collect::<Vec<_>>(),
        ),
    );
    out.checks.extend(checks);
    Ok(out)
}
