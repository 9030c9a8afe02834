use std::sync::Arc;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::layout::{Factor, SpaceLayout};
use super::operator::{norm, normalize, OperatorMatrix};
use crate::error::{check_dim, domain, Error, Result};

pub const STATE_SCHEMA: &str = "supertransfer.state/1";

/// Amplitude vector over a [`SpaceLayout`].
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    amplitudes: Vec<C64>,
    layout: Arc<SpaceLayout>,
}

impl StateVector {
    pub fn from_amplitudes(layout: Arc<SpaceLayout>, amplitudes: Vec<C64>) -> Result<Self> {
        check_dim(layout.total_dim(), amplitudes.len())?;
        Ok(Self { amplitudes, layout })
    }

    pub fn basis(layout: Arc<SpaceLayout>, index: usize) -> Result<Self> {
        if index >= layout.total_dim() {
            return domain(format!("basis index {index} out of range"));
        }
        let mut amplitudes = vec![C64::new(0.0, 0.0); layout.total_dim()];
        amplitudes[index] = C64::new(1.0, 0.0);
        Ok(Self { amplitudes, layout })
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amplitudes
    }

    pub fn layout(&self) -> &Arc<SpaceLayout> {
        &self.layout
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn norm(&self) -> f64 {
        norm(&self.amplitudes)
    }

    pub fn normalized(mut self) -> Result<Self> {
        if self.norm() == 0.0 {
            return domain("cannot normalize the zero vector");
        }
        normalize(&mut self.amplitudes);
        Ok(self)
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &Self) -> Result<C64> {
        check_dim(self.dim(), other.dim())?;
        Ok(self.amplitudes.iter().zip(&other.amplitudes).map(|(a, b)| a.conj() * b).sum())
    }

    /// `a |self> + b |other>`, unnormalized.
    pub fn superpose(&self, a: C64, other: &Self, b: C64) -> Result<Self> {
        check_dim(self.dim(), other.dim())?;
        let amplitudes =
            self.amplitudes.iter().zip(&other.amplitudes).map(|(x, y)| a * x + b * y).collect();
        Ok(Self { amplitudes, layout: self.layout.clone() })
    }

    pub fn apply(&self, op: &OperatorMatrix) -> Result<Self> {
        Ok(Self { amplitudes: op.apply(&self.amplitudes)?, layout: self.layout.clone() })
    }

    /// Nonzero amplitudes as `(index, amplitude)`.
    pub fn support(&self) -> Vec<(usize, C64)> {
        self.amplitudes
            .iter()
            .enumerate()
            .filter(|(_, a)| a.norm() > 0.0)
            .map(|(i, &a)| (i, a))
            .collect()
    }
}

/// Amplitudes of the `n`-excitation Dicke state of `sites` spins, over the
/// `2^sites` local basis.
pub fn dicke_amplitudes(sites: usize, n: usize) -> Result<Vec<C64>> {
    if n > sites {
        return domain(format!("excitation number {n} exceeds group size {sites}"));
    }
    let count = binomial(sites, n);
    let amp = C64::new(1.0 / (count as f64).sqrt(), 0.0);
    Ok((0..1usize << sites)
        .map(|i| if i.count_ones() as usize == n { amp } else { C64::new(0.0, 0.0) })
        .collect())
}

pub fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u64, |acc, i| acc * (n - i) as u64 / (i as u64 + 1))
}

/// Tensor-product state builder. Every spin group starts in its ground
/// configuration and every mode group in the vacuum.
#[derive(Clone, Debug)]
pub struct ProductState {
    layout: Arc<SpaceLayout>,
    spins: Vec<Vec<C64>>,
    modes: Vec<Vec<C64>>,
}

impl ProductState {
    pub fn new(layout: &Arc<SpaceLayout>) -> Self {
        let unit = |d: usize| {
            let mut v = vec![C64::new(0.0, 0.0); d];
            v[0] = C64::new(1.0, 0.0);
            v
        };
        let spins = layout.spin_groups().iter().map(|&n| unit(1 << n)).collect();
        let modes =
            layout.mode_groups().iter().map(|g| unit(g.cutoff.pow(g.count as u32))).collect();
        Self { layout: layout.clone(), spins, modes }
    }

    pub fn dicke(mut self, group: usize, n: usize) -> Result<Self> {
        let sites = self.layout.group_size(group)?;
        self.spins[group] = dicke_amplitudes(sites, n)?;
        Ok(self)
    }

    pub fn singlet(mut self, group: usize, j: usize, k: usize) -> Result<Self> {
        let sites = self.layout.group_size(group)?;
        if j == k {
            return domain("singlet requires two distinct sites");
        }
        if j >= sites || k >= sites {
            return domain(format!("site index out of range for group of {sites}"));
        }
        let mut v = vec![C64::new(0.0, 0.0); 1 << sites];
        let s = std::f64::consts::FRAC_1_SQRT_2;
        v[1 << j] = C64::new(s, 0.0);
        v[1 << k] = C64::new(-s, 0.0);
        self.spins[group] = v;
        Ok(self)
    }

    /// Arbitrary local amplitudes for a spin group.
    pub fn spin_amplitudes(mut self, group: usize, amps: Vec<C64>) -> Result<Self> {
        let sites = self.layout.group_size(group)?;
        check_dim(1 << sites, amps.len())?;
        self.spins[group] = amps;
        Ok(self)
    }

    /// Definite Fock occupations for every mode of a mode group.
    pub fn fock(mut self, group: usize, occupations: &[usize]) -> Result<Self> {
        let mg = self.layout.mode_group(group)?;
        check_dim(mg.count, occupations.len())?;
        let mut local = 0;
        let mut place = 1;
        for &occ in occupations {
            if occ >= mg.cutoff {
                return domain(format!("occupation {occ} exceeds cutoff {}", mg.cutoff));
            }
            local += occ * place;
            place *= mg.cutoff;
        }
        let mut v = vec![C64::new(0.0, 0.0); place];
        v[local] = C64::new(1.0, 0.0);
        self.modes[group] = v;
        Ok(self)
    }

    /// Arbitrary local amplitudes for a mode group.
    pub fn mode_amplitudes(mut self, group: usize, amps: Vec<C64>) -> Result<Self> {
        let mg = self.layout.mode_group(group)?;
        check_dim(mg.cutoff.pow(mg.count as u32), amps.len())?;
        self.modes[group] = amps;
        Ok(self)
    }

    pub fn build(self) -> Result<StateVector> {
        let layout = self.layout;
        let factors: Vec<(Factor, &Vec<C64>)> = self
            .spins
            .iter()
            .enumerate()
            .map(|(g, v)| (Factor::Spins(g), v))
            .chain(self.modes.iter().enumerate().map(|(g, v)| (Factor::Modes(g), v)))
            .collect();
        let amplitudes = (0..layout.total_dim())
            .map(|i| {
                factors
                    .iter()
                    .map(|(f, v)| v[layout.local_index(i, *f)])
                    .fold(C64::new(1.0, 0.0), |a, b| a * b)
            })
            .collect();
        let psi = StateVector { amplitudes, layout };
        if psi.norm() == 0.0 {
            return Err(Error::Domain("product state has zero norm".into()));
        }
        Ok(psi)
    }
}

/// Normalized Dicke state of `group` with `n` excitations; everything else ground/vacuum.
pub fn dicke_state(layout: &Arc<SpaceLayout>, group: usize, n: usize) -> Result<StateVector> {
    ProductState::new(layout).dicke(group, n)?.build()
}

/// `(|..1_j..0_k..> - |..0_j..1_k..>)/sqrt(2)` in `group`; everything else ground/vacuum.
pub fn singlet_state(
    layout: &Arc<SpaceLayout>,
    group: usize,
    sites: (usize, usize),
) -> Result<StateVector> {
    ProductState::new(layout).singlet(group, sites.0, sites.1)?.build()
}

#[derive(Serialize, Deserialize)]
struct StateWire {
    schema: String,
    dim: usize,
    layout: SpaceLayout,
    amplitudes: Vec<(f64, f64)>,
}

impl Serialize for StateVector {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        StateWire {
            schema: STATE_SCHEMA.into(),
            dim: self.dim(),
            layout: (*self.layout).clone(),
            amplitudes: self.amplitudes.iter().map(|a| (a.re, a.im)).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for StateVector {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let wire = StateWire::deserialize(d)?;
        if wire.schema != STATE_SCHEMA {
            return Err(D::Error::custom(format!("unsupported state schema {:?}", wire.schema)));
        }
        let layout = SpaceLayout::with_budget(
            wire.layout.spin_groups().to_vec(),
            wire.layout.mode_groups().to_vec(),
            usize::MAX,
        )
        .map_err(D::Error::custom)?;
        if layout.total_dim() != wire.dim {
            return Err(D::Error::custom("state dimension disagrees with its layout"));
        }
        let amps = wire.amplitudes.into_iter().map(|(re, im)| C64::new(re, im)).collect();
        StateVector::from_amplitudes(Arc::new(layout), amps).map_err(D::Error::custom)
    }
}
