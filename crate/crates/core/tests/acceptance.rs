//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on failure.

use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use num_complex::Complex64 as C64;
use rayon::prelude::*;

use supertransfer::diffusion::{
    headline_numbers, required_step_length, simulate_walk, sweep, sweep_csv, DiffusionConfig, SweepAxes,
};
use supertransfer::dynamics::{
    evolve, measure_decoherence_scaling, measure_intra_sector_rate, rabi_frequency, short_time_rate,
    DephasingKind, Tracked,
};
use supertransfer::fit;
use supertransfer::hamiltonians::{
    apply_site_disorder, dicke_hamiltonian, full_hamiltonian, hopping_hamiltonian, Bath, BathFrame,
    SpinGroupSpec, SystemSpec,
};
use supertransfer::hilbert::ProductState;
use supertransfer::sectors::{cooperative_projector, decompose, verify_scaling, GridPoint, ScalingFormula};
use supertransfer::Result;

const GAMMA: f64 = 0.05;

/// Conservation diagnostics gathered from every run the suite performs.
#[derive(Default)]
struct Hygiene {
    unitary: Vec<(String, f64, f64)>,
    lindblad: Vec<(String, f64, f64)>,
}

type Verdict = (bool, String);
type Criterion = Box<dyn FnOnce(&mut Hygiene) -> Result<Verdict>>;

fn check(ok: bool, detail: String) -> Verdict {
    (ok, detail)
}

fn superradiant_amplitude(hy: &mut Hygiene) -> Result<Verdict> {
    let grid: Vec<GridPoint> = (1..=8)
        .flat_map(|big| (1..=big).map(move |n| GridPoint { n_sites: big, n, ..Default::default() }))
        .collect();
    let report = verify_scaling(ScalingFormula::Emission, &grid, GAMMA)?;
    let worst = report
        .samples
        .iter()
        .map(|s| {
            let (big, n) = (s.point.n_sites, s.point.n);
            (s.measured.sqrt() - ((n * (big - n + 1)) as f64).sqrt() * GAMMA).abs()
        })
        .fold(0.0, f64::max);

    let spec = SystemSpec::dicke(4, 1.0, GAMMA, 4);
    let layout = Arc::new(spec.layout()?);
    let h = dicke_hamiltonian(&spec)?;
    let i = ProductState::new(&layout).dicke(0, 1)?.build()?;
    let f = ProductState::new(&layout).dicke(0, 0)?.fock(0, &[1])?.build()?;
    let r = short_time_rate(&h, &i, &f, 0.05 / (2.0 * GAMMA))?;
    hy.unitary.push(("emission N=4".into(), r.norm_drift, r.truncation_leak));
    let rel = (r.rate / (4.0 * GAMMA * GAMMA) - 1.0).abs();
    Ok(check(
        worst < 1e-10 && rel < 5e-3,
        format!("{} elements, max |err| {worst:.1e}; short-time N=4 rate rel err {rel:.1e}", report.samples.len()),
    ))
}

fn supertransfer_law(hy: &mut Hygiene) -> Result<Verdict> {
    let pairs: Vec<(usize, usize)> = (1..=5).flat_map(|a| (1..=5).map(move |b| (a, b))).collect();
    let single: Vec<GridPoint> =
        pairs.iter().map(|&(a, b)| GridPoint { n_sites: a, n: 1, m_sites: b, m: 0, m_from: 0 }).collect();
    let elements = verify_scaling(ScalingFormula::HoppingElement, &single, GAMMA)?;
    let el_err = elements
        .samples
        .iter()
        .map(|s| (s.measured - (s.point.n_sites * s.point.m_sites) as f64 * GAMMA * GAMMA).abs())
        .fold(0.0, f64::max);

    let rabi = pairs
        .par_iter()
        .map(|&(a, b)| {
            let spec = SystemSpec::hopping(a, 1.0, b, 1.0, GAMMA);
            let layout = Arc::new(spec.layout()?);
            let h = hopping_hamiltonian(&spec)?;
            let sa = ProductState::new(&layout).dicke(0, 1)?.build()?;
            let sb = ProductState::new(&layout).dicke(1, 1)?.build()?;
            let r = rabi_frequency(&h, &sa, &sb)?;
            Ok((r.frequency / (2.0 * ((a * b) as f64).sqrt() * GAMMA) - 1.0).abs())
        })
        .collect::<Result<Vec<f64>>>()?;
    let rabi_err = rabi.iter().copied().fold(0.0, f64::max);

    let mut grid = Vec::new();
    for &(a, b) in &pairs {
        for n in 0..=a {
            for m in 0..=b {
                if (1..=2).contains(&(n + m)) {
                    grid.push(GridPoint { n_sites: a, n, m_sites: b, m, m_from: 0 });
                }
            }
        }
    }
    let net = verify_scaling(ScalingFormula::NetTransfer, &grid, GAMMA)?;
    let net_err = net.max_abs_error();

    let spec = SystemSpec::hopping(3, 1.0, 2, 1.0, GAMMA);
    let layout = Arc::new(spec.layout()?);
    let h = hopping_hamiltonian(&spec)?;
    let i = ProductState::new(&layout).dicke(0, 1)?.build()?;
    let run = evolve(&h, &i, &[10.0, 20.0, 40.0], 1e-10, &[])?;
    hy.unitary.push(("hopping 3x2".into(), run.norm_drift, run.truncation_leak));

    Ok(check(
        el_err < 1e-10 && rabi_err < 1e-6 && net_err < 1e-10,
        format!(
            "|elem² - NMγ²| {el_err:.1e}; Rabi rel err {rabi_err:.1e}; net rate vs enumeration {net_err:.1e} over {} states",
            grid.len()
        ),
    ))
}

fn dark_states() -> Result<Verdict> {
    let spec = SystemSpec::dicke(2, 1.0, GAMMA, 3);
    let layout = Arc::new(spec.layout()?);
    let h = dicke_hamiltonian(&spec)?;
    let singlet = ProductState::new(&layout).singlet(0, 0, 1)?.build()?;
    let out = h.apply(singlet.amplitudes())?;
    let singlet_amp = out
        .iter()
        .enumerate()
        .filter(|(i, _)| layout.mode_occupation(*i, 0, 0) == 1)
        .map(|(_, a)| a.norm_sqr())
        .sum::<f64>()
        .sqrt();

    // Every computational basis state of the sector, minus its symmetric part,
    // spans the complement of the Dicke state.
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for sites in 2..=4 {
        let spec = SystemSpec::dicke(sites, 1.0, GAMMA, 3);
        let layout = Arc::new(spec.layout()?);
        let h = dicke_hamiltonian(&spec)?;
        for n in 1..sites {
            let dicke = ProductState::new(&layout).dicke(0, n)?.build()?;
            let channel = ProductState::new(&layout).dicke(0, n - 1)?.fock(0, &[1])?.build()?;
            for mask in (0..1usize << sites).filter(|x| x.count_ones() as usize == n) {
                let mut amps = vec![C64::new(0.0, 0.0); 1 << sites];
                amps[mask] = C64::new(1.0, 0.0);
                let basis = ProductState::new(&layout).spin_amplitudes(0, amps)?.build()?;
                let overlap = dicke.inner(&basis)?;
                let dark = basis.superpose(C64::new(1.0, 0.0), &dicke, -overlap)?;
                if dark.norm() < 1e-8 {
                    continue;
                }
                let dark = dark.normalized()?;
                worst = worst.max(h.sandwich(channel.amplitudes(), dark.amplitudes())?.norm());
                count += 1;
            }
        }
    }
    Ok(check(
        singlet_amp < 1e-12 && worst < 1e-12,
        format!("singlet emission {singlet_amp:.1e}; symmetric-channel amplitude of {count} dark states ≤ {worst:.1e}"),
    ))
}

fn sector_decomposition() -> Result<Verdict> {
    let mut cases = Vec::new();
    for a in 1..=4 {
        for b in 1..=4 {
            cases.push((a, b, 2));
        }
    }
    cases.extend([(4, 4, 3), (4, 4, 4)]);
    let results = cases
        .par_iter()
        .map(|&(a, b, cutoff)| {
            let mut spec = SystemSpec::hopping(a, 1.0, b, 1.0, GAMMA);
            spec.bath_a = Some(Bath::homogeneous(a, 2, 1.0, 0.02, cutoff));
            spec.bath_b = Some(Bath::homogeneous(b, 2, 1.0, 0.02, cutoff));
            let layout = spec.layout()?;
            let p = cooperative_projector(&layout, &spec)?;
            let d = decompose(&full_hamiltonian(&spec)?, &p)?;
            Ok((d.reconstruction_error, d.leakage_frobenius))
        })
        .collect::<Result<Vec<_>>>()?;
    let recon = results.iter().map(|r| r.0).fold(0.0, f64::max);
    let leak = results.iter().map(|r| r.1).fold(0.0, f64::max);

    let mut spec = SystemSpec::hopping(2, 1.0, 2, 1.0, GAMMA);
    spec.bath_a = Some(Bath::homogeneous(2, 2, 1.0, 0.02, 3));
    spec.bath_b = Some(Bath::homogeneous(2, 2, 1.0, 0.02, 3));
    let p = cooperative_projector(&spec.layout()?, &spec)?;
    let ratios = [0.01, 0.02, 0.04, 0.08];
    let deltas: Vec<f64> = ratios.iter().map(|r| r * GAMMA).collect();
    let leakage = deltas
        .par_iter()
        .map(|&d| Ok(decompose(&full_hamiltonian(&apply_site_disorder(&spec, d)?)?, &p)?.leakage_frobenius))
        .collect::<Result<Vec<f64>>>()?;
    let r2 = fit::through_origin(&deltas, &leakage).map_or(0.0, |l| l.r_squared);
    Ok(check(
        recon < 1e-12 && leak < 1e-12 && r2 > 0.99,
        format!("{} homogeneous instances: reconstruction {recon:.1e}, leakage {leak:.1e}; disorder fit R² {r2:.6}", cases.len()),
    ))
}

fn collective_modes() -> Result<Verdict> {
    let cap_gamma = 0.02;
    let (mut sym_err, mut orth): (f64, f64) = (0.0, 0.0);
    for sites in 1..=5 {
        let mut spec = SystemSpec::new(SpinGroupSpec::new(sites, 1.0));
        spec.group_b = Some(SpinGroupSpec::new(1, 1.0));
        spec.bath_a = Some(Bath::homogeneous(sites, sites, 1.0, cap_gamma, 2));
        spec.bath_frame = BathFrame::Collective;
        let layout = Arc::new(spec.layout()?);
        let group = spec.mode_roles().bath_a.expect("bath present");
        let h = full_hamiltonian(&spec)?;
        let w = ProductState::new(&layout).dicke(0, 1)?.build()?;
        for q in 0..sites {
            let mut occ = vec![0; sites];
            occ[q] = 1;
            let photon = ProductState::new(&layout).fock(group, &occ)?.build()?;
            let el = h.sandwich(w.amplitudes(), photon.amplitudes())?.norm();
            if q == 0 {
                sym_err = sym_err.max((el - (sites as f64).sqrt() * cap_gamma).abs());
            } else {
                orth = orth.max(el);
            }
        }
    }
    Ok(check(
        sym_err < 1e-10 && orth < 1e-12,
        format!("|coupling - √N Γ| {sym_err:.1e}; orthogonal modes ≤ {orth:.1e}"),
    ))
}

fn dephasing_scaling(hy: &mut Hygiene) -> Result<Verdict> {
    let rate = 0.1;
    let ns: Vec<usize> = (1..=5).collect();
    let ind = measure_decoherence_scaling(DephasingKind::Independent, 6, &ns, rate)?;
    let col = measure_decoherence_scaling(DephasingKind::Collective, 6, &ns, rate)?;
    let intra = measure_intra_sector_rate(DephasingKind::Collective, 6, rate)?;
    for r in [&ind, &col] {
        hy.lindblad.push((format!("{:?} dephasing", r.kind), r.max_trace_drift, r.min_eigenvalue));
    }
    let ind_err = ind.points.iter().map(|p| (p.ratio / p.n as f64 - 1.0).abs()).fold(0.0, f64::max);
    let exponent = col.fitted_exponent.unwrap_or(f64::NAN);
    let col_err = (exponent / 2.0 - 1.0).abs();
    Ok(check(
        ind_err < 0.02 && col_err < 0.02 && intra < 1e-10,
        format!(
            "independent ratio/n max dev {ind_err:.1e}; collective exponent {exponent:.4} \
             (linear-in-n claim not reproduced); intra-sector rate {intra:.1e}"
        ),
    ))
}

fn arithmetic() -> Result<Verdict> {
    let h = headline_numbers(300.0, &[1000.0, 1500.0], &[5.0, 2.0], 1000.0)?;
    let hops_ok = h.naive_hops == 9.0e4;
    let times: Vec<f64> = h.naive_hop_times_fs.iter().map(|t| t.1).collect();
    let (lo, hi) = (times[0].min(times[1]), times[0].max(times[1]));
    let range_ok = lo >= 11.1 && hi <= 16.7 && lo <= 15.0 && hi >= 10.0;
    // ατ = L / (γ √(γ T)).
    let oracle = |inv: f64| 300.0 * inv / (1000.0 / inv).sqrt();
    let at5 = h.alpha_tau_thresholds_ps[0].2;
    let at2 = h.alpha_tau_thresholds_ps[1].2;
    let at_ok = (at5 - oracle(5.0)).abs() < 1e-9
        && (at2 - oracle(2.0)).abs() < 1e-9
        && (at5 / 100.0 - 1.0).abs() <= 0.1
        && at2 / 20.0 <= 1.5
        && at2 / 20.0 >= 1.0 / 1.5;
    Ok(check(
        hops_ok && range_ok && at_ok,
        format!("hops {}; hop time [{lo:.2}, {hi:.2}] fs; ατ {at5:.2} ps and {at2:.2} ps", h.naive_hops),
    ))
}

fn monte_carlo() -> Result<Verdict> {
    let base = DiffusionConfig { walkers: 100_000, rng_seed: 2024, ..DiffusionConfig::default() };
    let required = required_step_length(base.target_l, base.gamma, base.lifetime)?;
    let at_boundary = DiffusionConfig { alpha: required / (base.gamma * base.tau), ..base.clone() };
    let r = simulate_walk(&at_boundary)?;
    let rel = (r.rms_displacement_units / base.target_l - 1.0).abs();

    let scales = [1.0, 2.0, 3.0, 5.0, 7.0, 10.0];
    let (mut ells, mut rms) = (Vec::new(), Vec::new());
    for s in scales {
        let cfg = DiffusionConfig { alpha: s, walkers: 20_000, ..base.clone() };
        let w = simulate_walk(&cfg)?;
        ells.push(w.step_length_ell);
        rms.push(w.rms_displacement_units);
    }
    let slope = fit::power_law(&ells, &rms).map_or(f64::NAN, |l| l.slope);

    let axes = SweepAxes { alpha: vec![1.0, 5.0], tau: vec![10.0, 20.0], gamma: vec![0.2] };
    let small = DiffusionConfig { walkers: 5_000, ..base.clone() };
    let first = sweep_csv(&sweep(&small, &axes)?);
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().expect("pool");
    let second = pool.install(|| sweep(&small, &axes)).map(|rows| sweep_csv(&rows))?;
    let identical = first == second;

    Ok(check(
        rel < 0.1 && (slope - 1.0).abs() <= 0.02 && identical,
        format!(
            "boundary RMS {:.1} vs L = {} (rel {rel:.3}); RMS ∝ ℓ^{slope:.4}; rerun CSV identical: {identical}",
            r.rms_displacement_units, base.target_l
        ),
    ))
}

fn hygiene(hy: &mut Hygiene) -> Result<Verdict> {
    let spec = SystemSpec::dicke(3, 1.0, GAMMA, 10);
    let layout = Arc::new(spec.layout()?);
    let h = dicke_hamiltonian(&spec)?;
    let psi = ProductState::new(&layout).dicke(0, 3)?.build()?;
    let times: Vec<f64> = (1..=20).map(|k| k as f64 * 5.0).collect();
    let run = evolve(&h, &psi, &times, 1e-10, &[Tracked::population("initial", &psi)])?;
    hy.unitary.push(("dicke N=3 full".into(), run.norm_drift, run.truncation_leak));

    let norm = hy.unitary.iter().map(|u| u.1).fold(0.0, f64::max);
    let leak = hy.unitary.iter().map(|u| u.2).fold(0.0, f64::max);
    let trace = hy.lindblad.iter().map(|l| l.1).fold(0.0, f64::max);
    let min_eig = hy.lindblad.iter().map(|l| l.2).fold(0.0, f64::min);
    Ok(check(
        norm < 1e-9 && leak < 1e-6 && trace < 1e-7 && min_eig >= -1e-9,
        format!(
            "{} unitary runs: norm drift {norm:.1e}, truncation leak {leak:.1e}; {} Lindblad runs: trace drift {trace:.1e}, min eigenvalue {min_eig:.1e}",
            hy.unitary.len(),
            hy.lindblad.len()
        ),
    ))
}

fn main() -> ExitCode {
    let mut hy = Hygiene::default();
    let criteria: Vec<(&str, Criterion)> = vec![
        ("1 superradiant amplitude", Box::new(superradiant_amplitude)),
        ("2 supertransfer NM law", Box::new(supertransfer_law)),
        ("3 dark states", Box::new(|_| dark_states())),
        ("4 sector decomposition", Box::new(|_| sector_decomposition())),
        ("5 collective-mode enhancement", Box::new(|_| collective_modes())),
        ("6 dephasing scaling", Box::new(dephasing_scaling)),
        ("7 transport arithmetic", Box::new(|_| arithmetic())),
        ("8 Monte Carlo self-consistency", Box::new(|_| monte_carlo())),
        ("9 numerical hygiene", Box::new(hygiene)),
    ];
    let mut failures = 0;
    for (name, f) in criteria {
        let start = Instant::now();
        let (ok, detail) = match f(&mut hy) {
            Ok(v) => v,
            Err(e) => (false, format!("error: {e}")),
        };
        failures += usize::from(!ok);
        println!(
            "{} criterion {name}: {detail} [{:.1}s]",
            if ok { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64()
        );
    }
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failures} criteria failed");
        ExitCode::FAILURE
    }
}
