use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

/// Largest total dimension accepted unless a caller asks for more.
pub const DEFAULT_DIM_BUDGET: usize = 1 << 20;

/// A group of bosonic modes sharing one Fock cutoff.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModeGroup {
    pub count: usize,
    pub cutoff: usize,
}

/// One tensor factor of a [`SpaceLayout`]: a whole spin group or a whole mode group.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Factor {
    Spins(usize),
    Modes(usize),
}

/// Occupation digits of one basis state.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BasisConfig {
    /// One entry per spin site (0 = ground, 1 = excited), groups concatenated.
    pub spins: Vec<u8>,
    /// One Fock occupation per mode, groups concatenated.
    pub modes: Vec<usize>,
}

/// Composite spin ⊗ boson space with a fixed mixed-radix basis ordering.
///
/// The basis index is little-endian in the following digit order: the sites
/// of spin group 0 (site 0 is bit 0), then the sites of spin group 1, and so
/// on; then the modes of mode group 0 in declaration order (base `cutoff`),
/// then mode group 1, and so on. Serialized states rely on this ordering.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpaceLayout {
    spin_groups: Vec<usize>,
    mode_groups: Vec<ModeGroup>,
    total_dim: usize,
}

impl SpaceLayout {
    pub fn new(spin_groups: Vec<usize>, mode_groups: Vec<ModeGroup>) -> Result<Self> {
        Self::with_budget(spin_groups, mode_groups, DEFAULT_DIM_BUDGET)
    }

    pub fn with_budget(
        spin_groups: Vec<usize>,
        mode_groups: Vec<ModeGroup>,
        budget: usize,
    ) -> Result<Self> {
        let mut dim: u128 = 1;
        for &n in &spin_groups {
            dim = dim.saturating_mul(1u128.checked_shl(n as u32).unwrap_or(u128::MAX));
        }
        for g in &mode_groups {
            if g.count > 0 && g.cutoff < 2 {
                return domain(format!("mode cutoff must be at least 2, got {}", g.cutoff));
            }
            for _ in 0..g.count {
                dim = dim.saturating_mul(g.cutoff as u128);
            }
        }
        if dim > budget as u128 {
            return Err(Error::Capacity { dim, budget });
        }
        Ok(Self { spin_groups, mode_groups, total_dim: dim as usize })
    }

    pub fn total_dim(&self) -> usize {
        self.total_dim
    }

    pub fn spin_groups(&self) -> &[usize] {
        &self.spin_groups
    }

    pub fn mode_groups(&self) -> &[ModeGroup] {
        &self.mode_groups
    }

    pub fn total_sites(&self) -> usize {
        self.spin_groups.iter().sum()
    }

    pub fn total_modes(&self) -> usize {
        self.mode_groups.iter().map(|g| g.count).sum()
    }

    pub fn group_size(&self, group: usize) -> Result<usize> {
        self.spin_groups
            .get(group)
            .copied()
            .ok_or_else(|| Error::Domain(format!("no spin group {group}")))
    }

    pub fn mode_group(&self, group: usize) -> Result<ModeGroup> {
        self.mode_groups
            .get(group)
            .copied()
            .ok_or_else(|| Error::Domain(format!("no mode group {group}")))
    }

    /// Bit position of site 0 of `group`.
    pub fn spin_offset(&self, group: usize) -> usize {
        self.spin_groups[..group].iter().sum()
    }

    /// Place value of mode 0 of mode group `group`.
    pub fn mode_base_stride(&self, group: usize) -> usize {
        let mut stride = 1usize << self.total_sites();
        for g in &self.mode_groups[..group] {
            stride *= g.cutoff.pow(g.count as u32);
        }
        stride
    }

    pub fn mode_stride(&self, group: usize, mode: usize) -> usize {
        self.mode_base_stride(group) * self.mode_groups[group].cutoff.pow(mode as u32)
    }

    /// `(place value, local dimension)` of a tensor factor.
    pub fn factor_shape(&self, factor: Factor) -> Result<(usize, usize)> {
        match factor {
            Factor::Spins(g) => {
                let n = self.group_size(g)?;
                Ok((1 << self.spin_offset(g), 1 << n))
            }
            Factor::Modes(g) => {
                let mg = self.mode_group(g)?;
                Ok((self.mode_base_stride(g), mg.cutoff.pow(mg.count as u32)))
            }
        }
    }

    /// Local index of `factor` within global basis index `idx`.
    pub fn local_index(&self, idx: usize, factor: Factor) -> usize {
        let (stride, local) = self.factor_shape(factor).expect("factor exists");
        (idx / stride) % local
    }

    pub fn spin_bit(&self, idx: usize, group: usize, site: usize) -> u8 {
        ((idx >> (self.spin_offset(group) + site)) & 1) as u8
    }

    pub fn flip_spin(&self, idx: usize, group: usize, site: usize) -> usize {
        idx ^ (1 << (self.spin_offset(group) + site))
    }

    /// Number of excited sites in `group`.
    pub fn group_excitations(&self, idx: usize, group: usize) -> usize {
        let n = self.spin_groups[group];
        ((idx >> self.spin_offset(group)) & ((1 << n) - 1)).count_ones() as usize
    }

    pub fn mode_occupation(&self, idx: usize, group: usize, mode: usize) -> usize {
        (idx / self.mode_stride(group, mode)) % self.mode_groups[group].cutoff
    }

    /// Index with `mode` occupation changed by `delta`, if it stays inside the cutoff.
    pub fn shift_mode(&self, idx: usize, group: usize, mode: usize, delta: isize) -> Option<usize> {
        let occ = self.mode_occupation(idx, group, mode) as isize + delta;
        if occ < 0 || occ >= self.mode_groups[group].cutoff as isize {
            return None;
        }
        let stride = self.mode_stride(group, mode) as isize;
        Some((idx as isize + delta * stride) as usize)
    }

    /// Spin excitations plus boson quanta.
    pub fn total_excitations(&self, idx: usize) -> usize {
        let spins = (idx & ((1usize << self.total_sites()) - 1)).count_ones() as usize;
        let mut bosons = 0;
        for (g, mg) in self.mode_groups.iter().enumerate() {
            for q in 0..mg.count {
                bosons += self.mode_occupation(idx, g, q);
            }
        }
        spins + bosons
    }

    pub fn encode(&self, config: &BasisConfig) -> Result<usize> {
        if config.spins.len() != self.total_sites() || config.modes.len() != self.total_modes() {
            return domain("basis configuration has the wrong number of digits");
        }
        let mut idx = 0usize;
        for (bit, &s) in config.spins.iter().enumerate() {
            if s > 1 {
                return domain(format!("spin digit {s} is not 0 or 1"));
            }
            idx |= (s as usize) << bit;
        }
        let mut k = 0;
        for (g, mg) in self.mode_groups.iter().enumerate() {
            for q in 0..mg.count {
                let occ = config.modes[k];
                if occ >= mg.cutoff {
                    return domain(format!("occupation {occ} exceeds cutoff {}", mg.cutoff));
                }
                idx += occ * self.mode_stride(g, q);
                k += 1;
            }
        }
        Ok(idx)
    }

    pub fn decode(&self, idx: usize) -> Result<BasisConfig> {
        if idx >= self.total_dim {
            return domain(format!("basis index {idx} out of range {}", self.total_dim));
        }
        let spins = (0..self.total_sites()).map(|b| ((idx >> b) & 1) as u8).collect();
        let mut modes = Vec::with_capacity(self.total_modes());
        for (g, mg) in self.mode_groups.iter().enumerate() {
            for q in 0..mg.count {
                modes.push(self.mode_occupation(idx, g, q));
            }
        }
        Ok(BasisConfig { spins, modes })
    }

    /// Indices of basis states whose top Fock level is occupied in `(group, mode)`.
    pub fn top_level_indices(&self, group: usize, mode: usize) -> impl Iterator<Item = usize> + '_ {
        let top = self.mode_groups[group].cutoff - 1;
        (0..self.total_dim).filter(move |&i| self.mode_occupation(i, group, mode) == top)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dimensions() {
        assert_eq!(SpaceLayout::new(vec![2], vec![]).unwrap().total_dim(), 4);
        let l = SpaceLayout::new(
            vec![3, 2],
            vec![ModeGroup { count: 1, cutoff: 4 }, ModeGroup { count: 1, cutoff: 4 }],
        )
        .unwrap();
        assert_eq!(l.total_dim(), 512);
        let bosons = SpaceLayout::new(vec![], vec![ModeGroup { count: 1, cutoff: 8 }]).unwrap();
        assert_eq!(bosons.total_dim(), 8);
    }

    #[test]
    fn rejects_bad_cutoff_and_budget() {
        assert!(matches!(
            SpaceLayout::new(vec![1], vec![ModeGroup { count: 1, cutoff: 1 }]),
            Err(Error::Domain(_))
        ));
        match SpaceLayout::with_budget(vec![10], vec![], 512) {
            Err(Error::Capacity { dim, budget }) => assert_eq!((dim, budget), (1024, 512)),
            other => panic!("expected capacity error, got {other:?}"),
        }
    }

    #[test]
    fn codec_is_exhaustive_bijection() {
        let l = SpaceLayout::new(
            vec![3, 2],
            vec![ModeGroup { count: 2, cutoff: 3 }, ModeGroup { count: 1, cutoff: 4 }],
        )
        .unwrap();
        let mut seen = std::collections::HashSet::new();
        for i in 0..l.total_dim() {
            let c = l.decode(i).unwrap();
            assert_eq!(l.encode(&c).unwrap(), i);
            assert!(seen.insert(c));
        }
        assert!(l.decode(l.total_dim()).is_err());
    }

    #[test]
    fn ordering_is_little_endian_spins_then_modes() {
        let l = SpaceLayout::new(vec![2, 1], vec![ModeGroup { count: 1, cutoff: 3 }]).unwrap();
        let c = BasisConfig { spins: vec![0, 1, 1], modes: vec![2] };
        assert_eq!(l.encode(&c).unwrap(), 0b110 + 2 * 8);
        assert_eq!(l.spin_bit(0b110, 1, 0), 1);
        assert_eq!(l.group_excitations(0b110, 0), 1);
        assert_eq!(l.shift_mode(2 * 8, 0, 0, 1), None);
        assert_eq!(l.shift_mode(8, 0, 0, -1), Some(0));
    }
}
