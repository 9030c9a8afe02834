//! Coherent-step random walk for exciton transport across arrays of
//! light-harvesting complexes.
//!
//! A walker hops incoherently at rate `γ` during its lifetime; every hop moves
//! it `ℓ = αγτ` lattice units in a random lattice direction. Times are in ps,
//! rates in 1/ps and lengths in lattice units (one complex diameter) unless a
//! field says otherwise.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution, Exp1, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LifetimeModel {
    /// Lifetime drawn from an exponential distribution with mean `T`.
    #[default]
    Exponential,
    /// Every walker lives exactly `T`.
    Fixed,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DiffusionConfig {
    /// Cooperative enhancement factor.
    pub alpha: f64,
    /// Incoherent hop rate (1/ps).
    pub gamma: f64,
    /// Hopping decoherence time (ps).
    pub tau: f64,
    /// Exciton lifetime (ps).
    pub lifetime: f64,
    pub lifetime_model: LifetimeModel,
    pub lattice_dim: u8,
    /// Size of one lattice unit (nm).
    pub complex_diameter: f64,
    /// Required displacement (lattice units).
    pub target_l: f64,
    pub walkers: usize,
    pub rng_seed: u64,
}

impl Default for DiffusionConfig {
    fn default() -> Self {
        Self {
            alpha: 5.0,
            gamma: 0.2,
            tau: 20.0,
            lifetime: 1000.0,
            lifetime_model: LifetimeModel::Exponential,
            lattice_dim: 1,
            complex_diameter: 7.0,
            target_l: 300.0,
            walkers: 100_000,
            rng_seed: 0,
        }
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        domain(format!("{name} must be positive and finite, got {v}"))
    }
}

impl DiffusionConfig {
    pub fn validate(&self) -> Result<()> {
        positive("alpha", self.alpha)?;
        positive("gamma", self.gamma)?;
        positive("tau", self.tau)?;
        positive("lifetime", self.lifetime)?;
        positive("complex_diameter", self.complex_diameter)?;
        positive("target_l", self.target_l)?;
        if !matches!(self.lattice_dim, 1 | 2) {
            return domain(format!("lattice_dim must be 1 or 2, got {}", self.lattice_dim));
        }
        if self.walkers == 0 {
            return domain("at least one walker is required");
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DiffusionResult {
    pub step_length_ell: f64,
    pub required_step_length: f64,
    pub rms_displacement_units: f64,
    /// Standard error of the RMS displacement; absent for a single walker.
    pub rms_standard_error: Option<f64>,
    pub rms_displacement_nm: f64,
    pub incoherent_hops_mean: f64,
    pub incoherent_hops_standard_error: Option<f64>,
    pub condition_met: bool,
    pub walkers_reaching_target: f64,
    pub walkers: usize,
}

/// `ℓ = α γ τ`.
pub fn effective_step_length(alpha: f64, gamma: f64, tau: f64) -> Result<f64> {
    positive("alpha", alpha)?;
    positive("gamma", gamma)?;
    positive("tau", tau)?;
    Ok(alpha * gamma * tau)
}

/// Smallest step length that carries a walker `l` units within its lifetime: `L / √(γT)`.
pub fn required_step_length(l: f64, gamma: f64, lifetime: f64) -> Result<f64> {
    positive("L", l)?;
    positive("gamma", gamma)?;
    positive("lifetime", lifetime)?;
    Ok(l / (gamma * lifetime).sqrt())
}

/// Unit-step diffusion over `l` units: `(L², T/L²)`.
pub fn naive_hop_count_and_time(l: f64, lifetime: f64) -> Result<(f64, f64)> {
    if !(l >= 1.0) || !l.is_finite() {
        return domain(format!("L must be at least 1, got {l}"));
    }
    positive("lifetime", lifetime)?;
    let hops = l * l;
    Ok((hops, lifetime / hops))
}

/// Smallest `τ` meeting the step-length condition for each `α`.
pub fn feasibility_boundary(alphas: &[f64], gamma: f64, lifetime: f64, l: f64) -> Result<Vec<(f64, f64)>> {
    let need = required_step_length(l, gamma, lifetime)?;
    alphas
        .iter()
        .map(|&a| {
            positive("alpha", a)?;
            Ok((a, need / (a * gamma)))
        })
        .collect()
}

/// `(hops, squared displacement)` of walker `index`.
fn walk(config: &DiffusionConfig, ell: f64, index: usize) -> (u64, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);
    rng.set_stream(index as u64);
    let u: f64 = match config.lifetime_model {
        LifetimeModel::Exponential => rng.sample(Exp1),
        LifetimeModel::Fixed => 1.0,
    };
    let lambda = config.gamma * config.lifetime * u;
    let k = if lambda > 0.0 {
        Poisson::new(lambda).expect("positive mean").sample(&mut rng) as u64
    } else {
        0
    };
    let signed = |rng: &mut ChaCha8Rng, steps: u64| -> f64 {
        if steps == 0 {
            return 0.0;
        }
        let up = Binomial::new(steps, 0.5).expect("valid binomial").sample(rng);
        (2.0 * up as f64 - steps as f64) * ell
    };
    let r2 = if config.lattice_dim == 1 {
        signed(&mut rng, k).powi(2)
    } else {
        let kx = if k > 0 { Binomial::new(k, 0.5).expect("valid binomial").sample(&mut rng) } else { 0 };
        signed(&mut rng, kx).powi(2) + signed(&mut rng, k - kx).powi(2)
    };
    (k, r2)
}

fn mean_and_se(values: impl Iterator<Item = f64> + Clone, n: usize) -> (f64, Option<f64>) {
    let mean = values.clone().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, None);
    }
    let var = values.map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, Some((var / n as f64).sqrt()))
}

/// Monte Carlo estimate of the transport statistics of `config`.
///
/// Walker `i` draws from the ChaCha8 stream `i` of `rng_seed`, so results do not
/// depend on scheduling or thread count.
pub fn simulate_walk(config: &DiffusionConfig) -> Result<DiffusionResult> {
    config.validate()?;
    let ell = effective_step_length(config.alpha, config.gamma, config.tau)?;
    let required = required_step_length(config.target_l, config.gamma, config.lifetime)?;
    let samples: Vec<(u64, f64)> = (0..config.walkers).into_par_iter().map(|i| walk(config, ell, i)).collect();
    let n = samples.len();
    let (hops_mean, hops_se) = mean_and_se(samples.iter().map(|s| s.0 as f64), n);
    let (msd, msd_se) = mean_and_se(samples.iter().map(|s| s.1), n);
    let rms = msd.sqrt();
    // Delta method: se(√m) = se(m) / (2√m).
    let rms_se = msd_se.map(|se| if rms > 0.0 { se / (2.0 * rms) } else { 0.0 });
    let target2 = config.target_l * config.target_l;
    let reached = samples.iter().filter(|s| s.1 >= target2).count();
    Ok(DiffusionResult {
        step_length_ell: ell,
        required_step_length: required,
        rms_displacement_units: rms,
        rms_standard_error: rms_se,
        rms_displacement_nm: rms * config.complex_diameter,
        incoherent_hops_mean: hops_mean,
        incoherent_hops_standard_error: hops_se,
        condition_met: ell > required,
        walkers_reaching_target: reached as f64 / n as f64,
        walkers: n,
    })
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepAxes {
    pub alpha: Vec<f64>,
    pub tau: Vec<f64>,
    pub gamma: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub alpha: f64,
    pub tau: f64,
    pub gamma: f64,
    pub result: DiffusionResult,
}

fn sorted_axis(name: &str, values: &[f64]) -> Result<Vec<f64>> {
    if values.is_empty() {
        return Err(Error::Degenerate(format!("sweep axis {name} is empty")));
    }
    let inc = values.windows(2).all(|w| w[1] > w[0]);
    let dec = values.windows(2).all(|w| w[1] < w[0]);
    if !(inc || dec) {
        return domain(format!("sweep axis {name} must be strictly monotone"));
    }
    let mut v = values.to_vec();
    if dec {
        v.reverse();
    }
    Ok(v)
}

/// Full-factorial sweep over `(alpha, tau, gamma)`, rows in ascending
/// lexicographic order of those values.
pub fn sweep(template: &DiffusionConfig, axes: &SweepAxes) -> Result<Vec<SweepRow>> {
    let alpha = sorted_axis("alpha", &axes.alpha)?;
    let tau = sorted_axis("tau", &axes.tau)?;
    let gamma = sorted_axis("gamma", &axes.gamma)?;
    let mut points = Vec::with_capacity(alpha.len() * tau.len() * gamma.len());
    for &a in &alpha {
        for &t in &tau {
            for &g in &gamma {
                points.push((a, t, g));
            }
        }
    }
    points
        .into_par_iter()
        .map(|(a, t, g)| {
            let cfg = DiffusionConfig { alpha: a, tau: t, gamma: g, ..template.clone() };
            Ok(SweepRow { alpha: a, tau: t, gamma: g, result: simulate_walk(&cfg)? })
        })
        .collect()
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// One CSV row per sweep point.
pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from(
        "alpha,tau_ps,gamma_per_ps,step_length,required_step_length,rms_units,rms_se_units,rms_nm,\
         hops_mean,hops_se,condition_met,reaching_target,walkers\n",
    );
    for r in rows {
        let d = &r.result;
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.alpha,
            r.tau,
            r.gamma,
            d.step_length_ell,
            d.required_step_length,
            d.rms_displacement_units,
            opt(d.rms_standard_error),
            d.rms_displacement_nm,
            d.incoherent_hops_mean,
            opt(d.incoherent_hops_standard_error),
            d.condition_met,
            d.walkers_reaching_target,
            d.walkers
        );
    }
    out
}

/// Back-of-envelope transport numbers for an array of complexes.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HeadlineNumbers {
    pub target_l: f64,
    pub naive_hops: f64,
    /// `(lifetime ps, naive hop time fs)`.
    pub naive_hop_times_fs: Vec<(f64, f64)>,
    /// `(1/γ ps, lifetime ps, minimum ατ ps)`.
    pub alpha_tau_thresholds_ps: Vec<(f64, f64, f64)>,
}

pub fn headline_numbers(
    target_l: f64,
    lifetimes_ps: &[f64],
    hop_times_ps: &[f64],
    threshold_lifetime_ps: f64,
) -> Result<HeadlineNumbers> {
    let (naive_hops, _) = naive_hop_count_and_time(target_l, 1.0)?;
    let naive_hop_times_fs = lifetimes_ps
        .iter()
        .map(|&t| Ok((t, naive_hop_count_and_time(target_l, t)?.1 * 1e3)))
        .collect::<Result<Vec<_>>>()?;
    let alpha_tau_thresholds_ps = hop_times_ps
        .iter()
        .map(|&inv| {
            positive("hop time", inv)?;
            let g = 1.0 / inv;
            Ok((inv, threshold_lifetime_ps, required_step_length(target_l, g, threshold_lifetime_ps)? / g))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(HeadlineNumbers { target_l, naive_hops, naive_hop_times_fs, alpha_tau_thresholds_ps })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_forms() {
        assert!((effective_step_length(5.0, 0.2, 20.0).unwrap() - 20.0).abs() < 1e-12);
        assert_eq!(effective_step_length(1.0, 1.0, 1.0).unwrap(), 1.0);
        assert!((effective_step_length(10.0, 0.5, 4.0).unwrap() - 20.0).abs() < 1e-12);
        assert!(effective_step_length(0.0, 1.0, 1.0).is_err());
        let need = required_step_length(300.0, 0.2, 1000.0).unwrap();
        assert!((need - 300.0 / 200f64.sqrt()).abs() < 1e-12);
        assert!((need / 0.2 - 106.066).abs() < 1e-3);
        assert!((required_step_length(300.0, 0.5, 1000.0).unwrap() / 0.5 - 26.833).abs() < 1e-3);
        assert_eq!(required_step_length(1.0, 1.0, 1.0).unwrap(), 1.0);
        assert!(required_step_length(-1.0, 1.0, 1.0).is_err());
        let (h, t) = naive_hop_count_and_time(300.0, 1500.0).unwrap();
        assert_eq!(h, 90_000.0);
        assert!((t * 1e3 - 16.667).abs() < 1e-3);
        assert_eq!(naive_hop_count_and_time(1.0, 7.0).unwrap(), (1.0, 7.0));
    }

    #[test]
    fn validation() {
        let mut c = DiffusionConfig { walkers: 0, ..Default::default() };
        assert!(simulate_walk(&c).is_err());
        c.walkers = 10;
        c.lattice_dim = 3;
        assert!(simulate_walk(&c).is_err());
        assert!(serde_json::from_str::<DiffusionConfig>(r#"{"alpha": 2, "bogus": 1}"#).is_err());
        let parsed: DiffusionConfig = serde_json::from_str(r#"{"alpha": 2}"#).unwrap();
        assert_eq!(parsed.alpha, 2.0);
        assert_eq!(parsed.target_l, 300.0);
    }

    #[test]
    fn unit_steps_diffuse() {
        let c = DiffusionConfig {
            alpha: 1.0,
            gamma: 1.0,
            tau: 1.0,
            lifetime: 100.0,
            lifetime_model: LifetimeModel::Fixed,
            walkers: 100_000,
            rng_seed: 7,
            ..Default::default()
        };
        let r = simulate_walk(&c).unwrap();
        let se = r.rms_standard_error.unwrap();
        assert!((r.rms_displacement_units - 10.0).abs() < 3.0 * se, "{r:?}");
        assert!((r.incoherent_hops_mean - 100.0).abs() < 3.0 * r.incoherent_hops_standard_error.unwrap());
    }

    #[test]
    fn deterministic_and_single_walker() {
        let c = DiffusionConfig { walkers: 2000, rng_seed: 11, lattice_dim: 2, ..Default::default() };
        assert_eq!(simulate_walk(&c).unwrap(), simulate_walk(&c).unwrap());
        let one = simulate_walk(&DiffusionConfig { walkers: 1, ..c }).unwrap();
        assert!(one.rms_standard_error.is_none());
    }

    #[test]
    fn sweep_ordering() {
        let t = DiffusionConfig { walkers: 500, ..Default::default() };
        let axes = SweepAxes { alpha: vec![3.0, 1.0], tau: vec![10.0, 20.0], gamma: vec![0.2] };
        let rows = sweep(&t, &axes).unwrap();
        let keys: Vec<(f64, f64)> = rows.iter().map(|r| (r.alpha, r.tau)).collect();
        assert_eq!(keys, vec![(1.0, 10.0), (1.0, 20.0), (3.0, 10.0), (3.0, 20.0)]);
        assert!(sweep(&t, &SweepAxes { alpha: vec![], ..axes.clone() }).is_err());
        assert!(sweep(&t, &SweepAxes { alpha: vec![1.0, 3.0, 2.0], ..axes }).is_err());
        let single = sweep(&t, &SweepAxes { alpha: vec![5.0], tau: vec![20.0], gamma: vec![0.2] }).unwrap();
        assert_eq!(single[0].result, simulate_walk(&t).unwrap());
        assert_eq!(sweep_csv(&rows).lines().count(), 5);
    }

    #[test]
    fn headline() {
        let h = headline_numbers(300.0, &[1000.0, 1500.0], &[5.0, 2.0], 1000.0).unwrap();
        assert_eq!(h.naive_hops, 90_000.0);
        assert!((h.naive_hop_times_fs[0].1 - 11.111).abs() < 1e-3);
        assert!((h.alpha_tau_thresholds_ps[0].2 - 106.066).abs() < 1e-3);
    }
}
