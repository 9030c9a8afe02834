//! Run configuration: built-in defaults, presets, JSON files and overrides.
//!
//! Layers are merged as JSON objects (defaults < preset < config file <
//! `--set` overrides < dedicated flags) and only then deserialized, so a typo
//! in any layer is reported as an unknown field.

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::diffusion::{DiffusionConfig, LifetimeModel, SweepAxes};
use crate::error::{config, Error, Result};

pub const RUN_SCHEMA: &str = "supertransfer.run/1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    PaperDefaults,
}

fn defaults() -> Value {
    json!({
        "schema": RUN_SCHEMA,
        "seed": 0,
        "superradiance": {
            "n_max": 6, "gamma": 0.05, "omega": 1.0, "cutoff": 4,
            "tolerance": 1e-6, "dynamic": true, "dynamic_tolerance": 0.005
        },
        "supertransfer": {
            "n_max": 4, "m_max": 4, "gamma": 0.05, "omega_a": 1.0, "omega_b": 1.0,
            "max_excitations": 2, "tolerance": 1e-6, "dynamic_tolerance": 0.005, "rabi_tolerance": 1e-6
        },
        "sectors": {
            "sites_a": 2, "sites_b": 2, "gamma": 0.05, "omega": 1.0,
            "bath_modes": 2, "bath_frequency": 1.0, "bath_gamma": 0.02, "bath_cutoff": 3,
            "disorder": [0.01, 0.02, 0.04, 0.08], "leakage_tolerance": 1e-12, "r_squared_min": 0.99
        },
        "dephasing": { "sites": 6, "n_max": 5, "rate": 0.1, "tolerance": 0.02 },
        "diffusion": {
            "alpha": 5.0, "gamma": "0.2 /ps", "tau": "20 ps", "lifetime": "1 ns",
            "lifetime_model": "exponential", "lattice_dim": 1, "complex_diameter": "7 nm",
            "target_l": 300.0, "walkers": 20000,
            "sweep": { "alpha": [1.0, 2.0, 5.0, 10.0], "tau": ["10 ps", "20 ps", "50 ps"], "gamma": ["0.2 /ps"] },
            "headline": {
                "lifetimes": ["1 ns", "1.5 ns"], "hop_times": ["5 ps", "2 ps"], "threshold_lifetime": "1 ns"
            }
        }
    })
}

fn preset(p: Preset) -> Value {
    match p {
        Preset::PaperDefaults => json!({
            "superradiance": { "n_max": 8 },
            "diffusion": {
                "walkers": 100000,
                "sweep": {
                    "alpha": [1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0, 10.0],
                    "tau": ["5 ps", "10 ps", "20 ps", "50 ps", "100 ps"],
                    "gamma": ["0.2 /ps", "0.5 /ps"]
                }
            }
        }),
    }
}

/// Recursive object merge; anything that is not an object on both sides is replaced.
pub fn merge(base: &mut Value, layer: Value) {
    match (base, layer) {
        (Value::Object(b), Value::Object(l)) => {
            for (k, v) in l {
                match b.get_mut(&k) {
                    Some(slot) => merge(slot, v),
                    None => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, v) => *slot = v,
    }
}

/// `a.b.c=value`; the value is parsed as JSON and otherwise taken as a string.
pub fn parse_override(text: &str) -> Result<Value> {
    let Some((path, raw)) = text.split_once('=') else {
        return config(format!("override `{text}` must look like key.path=value"));
    };
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let mut out = value;
    for key in path.split('.').rev() {
        if key.is_empty() {
            return config(format!("override `{text}` has an empty key"));
        }
        out = json!({ key: out });
    }
    Ok(out)
}

pub fn layered(preset_choice: Option<Preset>, file: Option<&str>, overrides: &[String]) -> Result<Value> {
    let mut v = defaults();
    if let Some(p) = preset_choice {
        merge(&mut v, preset(p));
    }
    if let Some(text) = file {
        let layer: Value =
            serde_json::from_str(text).map_err(|e| Error::Config(format!("config file is not valid JSON: {e}")))?;
        if !layer.is_object() {
            return config("config file must hold a JSON object");
        }
        merge(&mut v, layer);
    }
    for o in overrides {
        merge(&mut v, parse_override(o)?);
    }
    Ok(v)
}

/// A number in internal units or a string such as `"1.5 ns"` or `"0.2 /ps"`.
#[derive(Clone, Debug, PartialEq, Deserialize, Serialize)]
#[serde(untagged)]
pub enum Quantity {
    Number(f64),
    Text(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Dimension {
    /// ps
    Time,
    /// 1/ps
    Rate,
    /// nm
    Length,
}

impl Dimension {
    fn internal(self) -> &'static str {
        match self {
            Dimension::Time => "ps",
            Dimension::Rate => "1/ps",
            Dimension::Length => "nm",
        }
    }

    fn factor(self, unit: &str) -> Option<f64> {
        let u = unit.trim().replace(' ', "");
        match self {
            Dimension::Time => match u.as_str() {
                "fs" => Some(1e-3),
                "ps" => Some(1.0),
                "ns" => Some(1e3),
                "us" | "µs" => Some(1e6),
                _ => None,
            },
            Dimension::Rate => match u.as_str() {
                "/fs" | "1/fs" | "fs^-1" => Some(1e3),
                "/ps" | "1/ps" | "ps^-1" => Some(1.0),
                "/ns" | "1/ns" | "ns^-1" => Some(1e-3),
                _ => None,
            },
            Dimension::Length => match u.as_str() {
                "nm" => Some(1.0),
                "um" | "µm" => Some(1e3),
                "A" | "Å" => Some(0.1),
                _ => None,
            },
        }
    }
}

/// A unit conversion applied while resolving the configuration.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Conversion {
    pub field: String,
    pub input: String,
    pub value: f64,
    pub unit: &'static str,
}

pub struct Units {
    pub log: Vec<Conversion>,
}

impl Units {
    pub fn resolve(&mut self, field: &str, q: &Quantity, dim: Dimension) -> Result<f64> {
        match q {
            Quantity::Number(v) => Ok(*v),
            Quantity::Text(text) => {
                let t = text.trim();
                let split = t
                    .char_indices()
                    .find(|(_, c)| !(c.is_ascii_digit() || matches!(c, '.' | 'e' | 'E' | '+' | '-')))
                    .map_or(t.len(), |(i, _)| i);
                // `e` may start a unit only if no digit follows; none of ours do.
                let (num, unit) = t.split_at(split);
                let value: f64 = num
                    .trim()
                    .parse()
                    .map_err(|_| Error::Config(format!("{field}: cannot read a number from `{text}`")))?;
                let factor = dim.factor(unit).ok_or_else(|| {
                    Error::Config(format!("{field}: unknown unit `{}` (expected {})", unit.trim(), dim.internal()))
                })?;
                let value = value * factor;
                self.log.push(Conversion { field: field.to_string(), input: text.clone(), value, unit: dim.internal() });
                Ok(value)
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SuperradianceSection {
    pub n_max: usize,
    pub gamma: f64,
    pub omega: f64,
    pub cutoff: usize,
    pub tolerance: f64,
    pub dynamic: bool,
    pub dynamic_tolerance: f64,
}

#[derive(Clone, Debug, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SupertransferSection {
    pub n_max: usize,
    pub m_max: usize,
    pub gamma: f64,
    pub omega_a: f64,
    pub omega_b: f64,
    pub max_excitations: usize,
    pub tolerance: f64,
    pub dynamic_tolerance: f64,
    pub rabi_tolerance: f64,
}

#[derive(Clone, Debug, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SectorsSection {
    pub sites_a: usize,
    pub sites_b: usize,
    pub gamma: f64,
    pub omega: f64,
    pub bath_modes: usize,
    pub bath_frequency: f64,
    pub bath_gamma: f64,
    pub bath_cutoff: usize,
    /// Disorder widths in units of `gamma`.
    pub disorder: Vec<f64>,
    pub leakage_tolerance: f64,
    pub r_squared_min: f64,
}

#[derive(Clone, Debug, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct DephasingSection {
    pub sites: usize,
    pub n_max: usize,
    pub rate: f64,
    pub tolerance: f64,
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSweep {
    alpha: Vec<f64>,
    tau: Vec<Quantity>,
    gamma: Vec<Quantity>,
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawHeadline {
    lifetimes: Vec<Quantity>,
    hop_times: Vec<Quantity>,
    threshold_lifetime: Quantity,
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDiffusion {
    alpha: f64,
    gamma: Quantity,
    tau: Quantity,
    lifetime: Quantity,
    lifetime_model: LifetimeModel,
    lattice_dim: u8,
    complex_diameter: Quantity,
    target_l: f64,
    walkers: usize,
    sweep: RawSweep,
    headline: RawHeadline,
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRun {
    schema: String,
    seed: u64,
    superradiance: SuperradianceSection,
    supertransfer: SupertransferSection,
    sectors: SectorsSection,
    dephasing: DephasingSection,
    diffusion: RawDiffusion,
}

/// Headline inputs in ps.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HeadlineSection {
    pub lifetimes: Vec<f64>,
    pub hop_times: Vec<f64>,
    pub threshold_lifetime: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DiffusionSection {
    pub walk: DiffusionConfig,
    pub sweep: SweepAxes,
    pub headline: HeadlineSection,
}

/// Fully resolved configuration in internal units.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub schema: String,
    pub seed: u64,
    pub superradiance: SuperradianceSection,
    pub supertransfer: SupertransferSection,
    pub sectors: SectorsSection,
    pub dephasing: DephasingSection,
    pub diffusion: DiffusionSection,
}

fn check(cond: bool, msg: impl Into<String>) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::Config(msg.into()))
    }
}

fn pos(name: &str, v: f64) -> Result<()> {
    check(v > 0.0 && v.is_finite(), format!("{name} must be positive, got {v}"))
}

impl RunConfig {
    /// Deserialize a merged layer stack and convert units.
    pub fn resolve(value: Value) -> Result<(RunConfig, Vec<Conversion>)> {
        let raw: RawRun = serde_json::from_value(value).map_err(|e| Error::Config(e.to_string()))?;
        if raw.schema != RUN_SCHEMA {
            return config(format!("unsupported schema `{}` (expected {RUN_SCHEMA})", raw.schema));
        }
        let mut units = Units { log: Vec::new() };
        let d = &raw.diffusion;
        let walk = DiffusionConfig {
            alpha: d.alpha,
            gamma: units.resolve("diffusion.gamma", &d.gamma, Dimension::Rate)?,
            tau: units.resolve("diffusion.tau", &d.tau, Dimension::Time)?,
            lifetime: units.resolve("diffusion.lifetime", &d.lifetime, Dimension::Time)?,
            lifetime_model: d.lifetime_model,
            lattice_dim: d.lattice_dim,
            complex_diameter: units.resolve("diffusion.complex_diameter", &d.complex_diameter, Dimension::Length)?,
            target_l: d.target_l,
            walkers: d.walkers,
            rng_seed: raw.seed,
        };
        let list = |units: &mut Units, name: &str, qs: &[Quantity], dim| -> Result<Vec<f64>> {
            qs.iter().enumerate().map(|(i, q)| units.resolve(&format!("{name}[{i}]"), q, dim)).collect()
        };
        let sweep = SweepAxes {
            alpha: d.sweep.alpha.clone(),
            tau: list(&mut units, "diffusion.sweep.tau", &d.sweep.tau, Dimension::Time)?,
            gamma: list(&mut units, "diffusion.sweep.gamma", &d.sweep.gamma, Dimension::Rate)?,
        };
        let headline = HeadlineSection {
            lifetimes: list(&mut units, "diffusion.headline.lifetimes", &d.headline.lifetimes, Dimension::Time)?,
            hop_times: list(&mut units, "diffusion.headline.hop_times", &d.headline.hop_times, Dimension::Time)?,
            threshold_lifetime: units.resolve(
                "diffusion.headline.threshold_lifetime",
                &d.headline.threshold_lifetime,
                Dimension::Time,
            )?,
        };
        let cfg = RunConfig {
            schema: raw.schema,
            seed: raw.seed,
            superradiance: raw.superradiance,
            supertransfer: raw.supertransfer,
            sectors: raw.sectors,
            dephasing: raw.dephasing,
            diffusion: DiffusionSection { walk, sweep, headline },
        };
        cfg.validate()?;
        Ok((cfg, units.log))
    }

    pub fn validate(&self) -> Result<()> {
        let s = &self.superradiance;
        check((1..=10).contains(&s.n_max), "superradiance.n_max must lie in 1..=10")?;
        check(s.cutoff >= 3, "superradiance.cutoff must be at least 3")?;
        pos("superradiance.gamma", s.gamma)?;
        pos("superradiance.omega", s.omega)?;
        pos("superradiance.tolerance", s.tolerance)?;
        pos("superradiance.dynamic_tolerance", s.dynamic_tolerance)?;

        let t = &self.supertransfer;
        check((1..=6).contains(&t.n_max) && (1..=6).contains(&t.m_max), "supertransfer group sizes must lie in 1..=6")?;
        check(t.max_excitations >= 1, "supertransfer.max_excitations must be at least 1")?;
        pos("supertransfer.gamma", t.gamma)?;
        pos("supertransfer.omega_a", t.omega_a)?;
        pos("supertransfer.omega_b", t.omega_b)?;
        pos("supertransfer.tolerance", t.tolerance)?;
        pos("supertransfer.dynamic_tolerance", t.dynamic_tolerance)?;
        pos("supertransfer.rabi_tolerance", t.rabi_tolerance)?;

        let c = &self.sectors;
        check((1..=5).contains(&c.sites_a) && (1..=5).contains(&c.sites_b), "sectors group sizes must lie in 1..=5")?;
        check(c.bath_cutoff >= 2, "sectors.bath_cutoff must be at least 2")?;
        check(c.bath_modes <= 5, "sectors.bath_modes must be at most 5")?;
        pos("sectors.gamma", c.gamma)?;
        pos("sectors.omega", c.omega)?;
        pos("sectors.bath_frequency", c.bath_frequency)?;
        check(c.bath_gamma >= 0.0, "sectors.bath_gamma must be non-negative")?;
        check(c.disorder.len() >= 2, "sectors.disorder needs at least two widths")?;
        for &d in &c.disorder {
            pos("sectors.disorder", d)?;
        }
        pos("sectors.leakage_tolerance", c.leakage_tolerance)?;

        let p = &self.dephasing;
        check((1..=8).contains(&p.sites), "dephasing.sites must lie in 1..=8")?;
        check((1..=p.sites).contains(&p.n_max), "dephasing.n_max must lie in 1..=sites")?;
        check(p.rate >= 0.0 && p.rate.is_finite(), "dephasing.rate must be non-negative")?;
        pos("dephasing.tolerance", p.tolerance)?;

        let d = &self.diffusion;
        d.walk.validate().map_err(|e| Error::Config(format!("diffusion: {e}")))?;
        for (name, axis) in [("alpha", &d.sweep.alpha), ("tau", &d.sweep.tau), ("gamma", &d.sweep.gamma)] {
            check(!axis.is_empty(), format!("diffusion.sweep.{name} is empty"))?;
            for &v in axis {
                pos(&format!("diffusion.sweep.{name}"), v)?;
            }
            let inc = axis.windows(2).all(|w| w[1] > w[0]);
            let dec = axis.windows(2).all(|w| w[1] < w[0]);
            check(inc || dec, format!("diffusion.sweep.{name} must be strictly monotone"))?;
        }
        for &v in d.headline.lifetimes.iter().chain(&d.headline.hop_times) {
            pos("diffusion.headline", v)?;
        }
        pos("diffusion.headline.threshold_lifetime", d.headline.threshold_lifetime)?;
        Ok(())
    }
}
