//! Model descriptions and the three Hamiltonian builders: the resonant Dicke
//! model, the two-group symmetric hopping model, and the two-ring model with
//! intra-ring couplings and per-ring bosonic baths.
//!
//! Conventions: ħ = 1 and all frequencies are angular. Site state `0` is the
//! ground state with σ_z = +1; `σ_+` raises a site from 0 to 1. Spin energies
//! enter as `-(ω/2) σ_z`, so an excitation costs `ω`.

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{config, domain, Result};
use crate::hilbert::{collective_mode_rows, ModeGroup, OperatorMatrix, SpaceLayout, DEFAULT_DIM_BUDGET};

pub const SYSTEM_SCHEMA: &str = "supertransfer.system/1";

/// Default Fock cutoff per mode.
pub const DEFAULT_CUTOFF: usize = 6;

fn default_schema() -> String {
    SYSTEM_SCHEMA.to_string()
}
fn default_cutoff() -> usize {
    DEFAULT_CUTOFF
}
fn default_budget() -> usize {
    DEFAULT_DIM_BUDGET
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpinGroupSpec {
    pub sites: usize,
    /// Site transition frequency ω_A or ω_B.
    pub frequency: f64,
    /// Static per-site frequency offsets δ_j; empty means none.
    #[serde(default)]
    pub disorder: Vec<f64>,
}

impl SpinGroupSpec {
    pub fn new(sites: usize, frequency: f64) -> Self {
        Self { sites, frequency, disorder: Vec::new() }
    }

    fn site_frequency(&self, j: usize) -> f64 {
        self.frequency + self.disorder.get(j).copied().unwrap_or(0.0)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldMode {
    pub frequency: f64,
    #[serde(default = "default_cutoff")]
    pub cutoff: usize,
}

/// Bosonic environment of one ring: mode frequencies and site–mode couplings Γ_{jℓ}.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Bath {
    pub frequencies: Vec<f64>,
    #[serde(default = "default_cutoff")]
    pub cutoff: usize,
    /// `coupling[j][l]` couples site `j` to mode `l`.
    pub coupling: Vec<Vec<f64>>,
}

impl Bath {
    /// Every site couples with `Γ/sqrt(L)` to each of `modes` degenerate modes,
    /// i.e. with strength `Γ` to the symmetric collective mode.
    pub fn homogeneous(sites: usize, modes: usize, frequency: f64, gamma: f64, cutoff: usize) -> Self {
        let g = gamma / (modes as f64).sqrt();
        Self {
            frequencies: vec![frequency; modes],
            cutoff,
            coupling: vec![vec![g; modes]; sites],
        }
    }

    /// Each site couples with `Γ` to its own local mode.
    pub fn site_local(sites: usize, frequency: f64, gamma: f64, cutoff: usize) -> Self {
        let coupling =
            (0..sites).map(|j| (0..sites).map(|l| if j == l { gamma } else { 0.0 }).collect()).collect();
        Self { frequencies: vec![frequency; sites], cutoff, coupling }
    }

    pub fn modes(&self) -> usize {
        self.frequencies.len()
    }
}

/// Form of the site–mode interaction `H_{jℓ}`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BathForm {
    /// `a†_ℓ σ_-^j + a_ℓ σ_+^j`; conserves total excitation number.
    #[default]
    ExcitationConserving,
    /// `σ_x^j (a_ℓ + a†_ℓ)`.
    SigmaX,
}

/// Basis in which bath modes are represented.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BathFrame {
    /// Collective modes `b_q = Σ_ℓ O_{qℓ} a_ℓ`; mode 0 of each bath is the symmetric mode.
    #[default]
    Collective,
    /// The site-local modes `a_ℓ` as given.
    Local,
}

/// Declarative description of a model instance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSpec {
    #[serde(default = "default_schema")]
    pub schema: String,
    pub group_a: SpinGroupSpec,
    #[serde(default)]
    pub group_b: Option<SpinGroupSpec>,
    #[serde(default)]
    pub field_mode: Option<FieldMode>,
    /// Spin–field coupling of the Dicke model.
    #[serde(default)]
    pub field_coupling: f64,
    /// Symmetric inter-group hopping γ.
    #[serde(default)]
    pub inter_coupling: f64,
    /// Off-diagonal disorder: per-pair offsets added to γ, `[j][k]`.
    #[serde(default)]
    pub inter_offsets: Option<Vec<Vec<f64>>>,
    /// Intra-group couplings γ_{jj'}; symmetric, diagonal ignored.
    #[serde(default)]
    pub intra_a: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    pub intra_b: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    pub bath_a: Option<Bath>,
    #[serde(default)]
    pub bath_b: Option<Bath>,
    #[serde(default)]
    pub bath_form: BathForm,
    #[serde(default)]
    pub bath_frame: BathFrame,
    #[serde(default)]
    pub rwa: bool,
    #[serde(default)]
    pub rng_seed: u64,
    #[serde(default = "default_budget")]
    pub dim_budget: usize,
}

/// Mode-group indices of the optional mode families within a layout.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ModeRoles {
    pub field: Option<usize>,
    pub bath_a: Option<usize>,
    pub bath_b: Option<usize>,
}

impl SystemSpec {
    pub fn new(group_a: SpinGroupSpec) -> Self {
        Self {
            schema: default_schema(),
            group_a,
            group_b: None,
            field_mode: None,
            field_coupling: 0.0,
            inter_coupling: 0.0,
            inter_offsets: None,
            intra_a: None,
            intra_b: None,
            bath_a: None,
            bath_b: None,
            bath_form: BathForm::default(),
            bath_frame: BathFrame::default(),
            rwa: false,
            rng_seed: 0,
            dim_budget: DEFAULT_DIM_BUDGET,
        }
    }

    /// Resonant Dicke model: `N` spins at `omega`, one field mode at `omega`.
    pub fn dicke(sites: usize, omega: f64, gamma: f64, cutoff: usize) -> Self {
        let mut s = Self::new(SpinGroupSpec::new(sites, omega));
        s.field_mode = Some(FieldMode { frequency: omega, cutoff });
        s.field_coupling = gamma;
        s
    }

    /// Two groups with symmetric hopping γ and no modes.
    pub fn hopping(n: usize, omega_a: f64, m: usize, omega_b: f64, gamma: f64) -> Self {
        let mut s = Self::new(SpinGroupSpec::new(n, omega_a));
        s.group_b = Some(SpinGroupSpec::new(m, omega_b));
        s.inter_coupling = gamma;
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: Self = serde_json::from_str(text)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema != SYSTEM_SCHEMA {
            return config(format!("unsupported system schema {:?}", self.schema));
        }
        let finite = |x: f64, what: &str| -> Result<()> {
            if x.is_finite() {
                Ok(())
            } else {
                config(format!("{what} must be finite"))
            }
        };
        let check_group = |g: &SpinGroupSpec, name: &str| -> Result<()> {
            finite(g.frequency, name)?;
            if !g.disorder.is_empty() && g.disorder.len() != g.sites {
                return config(format!("{name}: disorder has {} entries for {} sites", g.disorder.len(), g.sites));
            }
            g.disorder.iter().try_for_each(|&d| finite(d, "site disorder"))
        };
        check_group(&self.group_a, "group_a")?;
        if let Some(b) = &self.group_b {
            check_group(b, "group_b")?;
        }
        finite(self.field_coupling, "field_coupling")?;
        finite(self.inter_coupling, "inter_coupling")?;
        if let Some(f) = &self.field_mode {
            finite(f.frequency, "field frequency")?;
            if f.cutoff < 2 {
                return domain("field cutoff must be at least 2");
            }
        }
        let m = self.group_b.as_ref().map_or(0, |g| g.sites);
        if let Some(off) = &self.inter_offsets {
            check_matrix(off, self.group_a.sites, m, false, "inter_offsets")?;
        }
        if let Some(c) = &self.intra_a {
            check_matrix(c, self.group_a.sites, self.group_a.sites, true, "intra_a")?;
        }
        if let Some(c) = &self.intra_b {
            if self.group_b.is_none() {
                return config("intra_b given without group_b");
            }
            check_matrix(c, m, m, true, "intra_b")?;
        }
        for (bath, sites, name) in
            [(&self.bath_a, self.group_a.sites, "bath_a"), (&self.bath_b, m, "bath_b")]
        {
            if let Some(b) = bath {
                if b.cutoff < 2 {
                    return domain(format!("{name}: cutoff must be at least 2"));
                }
                b.frequencies.iter().try_for_each(|&w| finite(w, "bath frequency"))?;
                check_matrix(&b.coupling, sites, b.modes(), false, name)?;
            }
        }
        if self.bath_b.is_some() && self.group_b.is_none() {
            return config("bath_b given without group_b");
        }
        Ok(())
    }

    pub fn mode_roles(&self) -> ModeRoles {
        let mut next = 0;
        let mut take = |present: bool| {
            present.then(|| {
                next += 1;
                next - 1
            })
        };
        ModeRoles {
            field: take(self.field_mode.is_some()),
            bath_a: take(self.bath_a.as_ref().is_some_and(|b| b.modes() > 0)),
            bath_b: take(self.bath_b.as_ref().is_some_and(|b| b.modes() > 0)),
        }
    }

    pub fn layout(&self) -> Result<SpaceLayout> {
        self.validate()?;
        let mut spins = vec![self.group_a.sites];
        if let Some(b) = &self.group_b {
            spins.push(b.sites);
        }
        let mut modes = Vec::new();
        if let Some(f) = &self.field_mode {
            modes.push(ModeGroup { count: 1, cutoff: f.cutoff });
        }
        for b in [&self.bath_a, &self.bath_b].into_iter().flatten() {
            if b.modes() > 0 {
                modes.push(ModeGroup { count: b.modes(), cutoff: b.cutoff });
            }
        }
        SpaceLayout::with_budget(spins, modes, self.dim_budget)
    }

    /// Frequency offsets of every site, group A then group B.
    pub fn site_offsets(&self) -> Vec<f64> {
        let groups = std::iter::once(&self.group_a).chain(self.group_b.as_ref());
        groups
            .flat_map(|g| (0..g.sites).map(|j| g.disorder.get(j).copied().unwrap_or(0.0)))
            .collect()
    }
}

fn check_matrix(m: &[Vec<f64>], rows: usize, cols: usize, symmetric: bool, name: &str) -> Result<()> {
    if m.len() != rows || m.iter().any(|r| r.len() != cols) {
        return config(format!("{name}: expected a {rows}x{cols} matrix"));
    }
    if m.iter().flatten().any(|x| !x.is_finite()) {
        return config(format!("{name}: entries must be finite"));
    }
    if symmetric {
        for j in 0..rows {
            for k in 0..j {
                if m[j][k] != m[k][j] {
                    return config(format!("{name}: coupling matrix is not symmetric at ({j}, {k})"));
                }
            }
        }
    }
    Ok(())
}

/// New spec with per-site frequency offsets drawn uniformly from `[-δ, δ]`.
///
/// Offsets are `δ · u_j` with `u_j` drawn from `rng_seed`, so equal seeds give
/// offsets proportional to `δ`.
pub fn apply_site_disorder(spec: &SystemSpec, width: f64) -> Result<SystemSpec> {
    if !(width >= 0.0) || !width.is_finite() {
        return domain(format!("disorder width must be non-negative, got {width}"));
    }
    if width == 0.0 {
        return Ok(spec.clone());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.rng_seed);
    let mut out = spec.clone();
    out.group_a.disorder = (0..spec.group_a.sites).map(|_| width * rng.random_range(-1.0..=1.0)).collect();
    if let Some(b) = out.group_b.as_mut() {
        b.disorder = (0..b.sites).map(|_| width * rng.random_range(-1.0..=1.0)).collect();
    }
    Ok(out)
}

/// New spec with inter-group coupling offsets drawn uniformly from `[-δ, δ]`.
pub fn apply_coupling_disorder(spec: &SystemSpec, width: f64) -> Result<SystemSpec> {
    if !(width >= 0.0) || !width.is_finite() {
        return domain(format!("disorder width must be non-negative, got {width}"));
    }
    let Some(b) = &spec.group_b else {
        return config("coupling disorder requires group_b");
    };
    if width == 0.0 {
        return Ok(spec.clone());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.rng_seed);
    rng.set_stream(1);
    let mut out = spec.clone();
    out.inter_offsets = Some(
        (0..spec.group_a.sites)
            .map(|_| (0..b.sites).map(|_| width * rng.random_range(-1.0..=1.0)).collect())
            .collect(),
    );
    Ok(out)
}

/// Couplings and free-mode matrix of one bath in the chosen frame.
struct BathTerms {
    group: usize,
    /// `coupling[j][q]` between site `j` and (frame) mode `q`.
    coupling: Vec<Vec<f64>>,
    /// Free Hamiltonian `Σ W_{qq'} b†_q b_q'`.
    free: Vec<Vec<f64>>,
}

fn bath_terms(bath: &Bath, group: usize, frame: BathFrame) -> BathTerms {
    let l = bath.modes();
    match frame {
        BathFrame::Local => BathTerms {
            group,
            coupling: bath.coupling.clone(),
            free: (0..l).map(|q| (0..l).map(|p| if p == q { bath.frequencies[q] } else { 0.0 }).collect()).collect(),
        },
        BathFrame::Collective => {
            let o = collective_mode_rows(l);
            // a_l = Σ_q O[q][l] b_q, so Σ_l Γ_{jl} a_l = Σ_q (Σ_l Γ_{jl} O[q][l]) b_q.
            let coupling = bath
                .coupling
                .iter()
                .map(|row| (0..l).map(|q| (0..l).map(|k| row[k] * o[q][k]).sum()).collect())
                .collect();
            let mut free = vec![vec![0.0; l]; l];
            for q in 0..l {
                for p in q..l {
                    let w: f64 = (0..l).map(|k| o[q][k] * bath.frequencies[k] * o[p][k]).sum();
                    free[q][p] = w;
                    free[p][q] = w;
                }
            }
            BathTerms { group, coupling, free }
        }
    }
}

/// Sparse assembly by acting on basis columns.
struct Assembler<'a> {
    layout: &'a SpaceLayout,
    trip: Vec<(usize, usize, C64)>,
}

impl<'a> Assembler<'a> {
    fn new(layout: &'a SpaceLayout) -> Self {
        Self { layout, trip: Vec::new() }
    }

    fn push(&mut self, row: usize, col: usize, v: f64) {
        if v != 0.0 {
            self.trip.push((row, col, C64::new(v, 0.0)));
        }
    }

    /// `-(ω_j/2) σ_z^j` for every site of `group`.
    fn spin_energies(&mut self, group: usize, spec: &SpinGroupSpec) {
        for i in 0..self.layout.total_dim() {
            let e: f64 = (0..spec.sites)
                .map(|j| {
                    let z = if self.layout.spin_bit(i, group, j) == 0 { 1.0 } else { -1.0 };
                    -0.5 * spec.site_frequency(j) * z
                })
                .sum();
            self.push(i, i, e);
        }
    }

    /// `c (σ_+^x σ_-^y + σ_-^x σ_+^y)` between two sites given as `(group, site)`.
    fn exchange(&mut self, x: (usize, usize), y: (usize, usize), c: f64) {
        if c == 0.0 {
            return;
        }
        for i in 0..self.layout.total_dim() {
            if self.layout.spin_bit(i, x.0, x.1) != self.layout.spin_bit(i, y.0, y.1) {
                let r = self.layout.flip_spin(self.layout.flip_spin(i, x.0, x.1), y.0, y.1);
                self.push(r, i, c);
            }
        }
    }

    /// `Σ W_{qp} b†_q b_p` on mode group `group`.
    fn mode_quadratic(&mut self, group: usize, w: &[Vec<f64>]) {
        let l = w.len();
        for i in 0..self.layout.total_dim() {
            for q in 0..l {
                for p in 0..l {
                    if w[q][p] == 0.0 {
                        continue;
                    }
                    let np = self.layout.mode_occupation(i, group, p) as f64;
                    if q == p {
                        self.push(i, i, w[q][q] * np);
                        continue;
                    }
                    let Some(mid) = self.layout.shift_mode(i, group, p, -1) else { continue };
                    let nq = self.layout.mode_occupation(mid, group, q) as f64;
                    if let Some(r) = self.layout.shift_mode(mid, group, q, 1) {
                        self.push(r, i, w[q][p] * np.sqrt() * (nq + 1.0).sqrt());
                    }
                }
            }
        }
    }

    /// Site–mode coupling `c` between spin `(group, site)` and mode `(mgroup, q)`.
    fn spin_mode(&mut self, spin: (usize, usize), mode: (usize, usize), c: f64, form: BathForm, rwa_like: bool) {
        if c == 0.0 {
            return;
        }
        let lay = self.layout;
        for i in 0..lay.total_dim() {
            let excited = lay.spin_bit(i, spin.0, spin.1) == 1;
            let flipped = lay.flip_spin(i, spin.0, spin.1);
            let n = lay.mode_occupation(i, mode.0, mode.1) as f64;
            let emit = lay.shift_mode(flipped, mode.0, mode.1, 1).map(|r| (r, (n + 1.0).sqrt()));
            let absorb = lay.shift_mode(flipped, mode.0, mode.1, -1).map(|r| (r, n.sqrt()));
            let conserving = if excited { emit } else { absorb };
            if let Some((r, a)) = conserving {
                self.push(r, i, c * a);
            }
            if form == BathForm::SigmaX && !rwa_like {
                let counter = if excited { absorb } else { emit };
                if let Some((r, a)) = counter {
                    self.push(r, i, c * a);
                }
            }
        }
    }

    fn finish(self) -> Result<OperatorMatrix> {
        Ok(OperatorMatrix::from_triplets(self.layout.total_dim(), self.trip)?.with_hermitian_flag())
    }
}

/// `H = ω a†a - (ω_A/2) Σ σ_z^j + γ Σ σ_x^j (a + a†)`, or with the
/// interaction `γ Σ (σ_+^j a + σ_-^j a†)` when `rwa` is set.
pub fn dicke_hamiltonian(spec: &SystemSpec) -> Result<OperatorMatrix> {
    let Some(field) = &spec.field_mode else {
        return config("Dicke Hamiltonian requires a field mode");
    };
    if spec.group_b.is_some() {
        return config("Dicke Hamiltonian takes a single spin group");
    }
    let layout = spec.layout()?;
    let fg = spec.mode_roles().field.expect("field mode present");
    let mut asm = Assembler::new(&layout);
    asm.spin_energies(0, &spec.group_a);
    asm.mode_quadratic(fg, &[vec![field.frequency]]);
    for j in 0..spec.group_a.sites {
        asm.spin_mode((0, j), (fg, 0), spec.field_coupling, BathForm::SigmaX, spec.rwa);
    }
    asm.finish()
}

/// `H = -(ω_A/2) Σ_j σ_z^j - (ω_B/2) Σ_k σ_z^k + γ Σ_{jk} (σ_+^j σ_-^k + σ_-^j σ_+^k)`.
///
/// Intra-group couplings and baths in the spec are ignored (identity on any modes).
pub fn hopping_hamiltonian(spec: &SystemSpec) -> Result<OperatorMatrix> {
    let Some(b) = &spec.group_b else {
        return config("hopping Hamiltonian requires group_b");
    };
    let layout = spec.layout()?;
    let mut asm = Assembler::new(&layout);
    asm.spin_energies(0, &spec.group_a);
    asm.spin_energies(1, b);
    add_inter(&mut asm, spec, b.sites);
    asm.finish()
}

fn add_inter(asm: &mut Assembler<'_>, spec: &SystemSpec, m: usize) {
    for j in 0..spec.group_a.sites {
        for k in 0..m {
            let off = spec.inter_offsets.as_ref().map_or(0.0, |o| o[j][k]);
            asm.exchange((0, j), (1, k), spec.inter_coupling + off);
        }
    }
}

fn add_intra(asm: &mut Assembler<'_>, group: usize, c: &[Vec<f64>]) {
    for j in 0..c.len() {
        for k in (j + 1)..c.len() {
            asm.exchange((group, j), (group, k), c[j][k]);
        }
    }
}

/// Two rings with baths: spin energies, bath free terms, site–mode couplings,
/// symmetric inter-ring hopping, and intra-ring couplings (each unordered
/// pair `j < j'` once).
pub fn full_hamiltonian(spec: &SystemSpec) -> Result<OperatorMatrix> {
    let Some(b) = &spec.group_b else {
        return config("full Hamiltonian requires group_b");
    };
    let layout = spec.layout()?;
    let roles = spec.mode_roles();
    let mut asm = Assembler::new(&layout);
    asm.spin_energies(0, &spec.group_a);
    asm.spin_energies(1, b);
    add_inter(&mut asm, spec, b.sites);
    if let Some(c) = &spec.intra_a {
        add_intra(&mut asm, 0, c);
    }
    if let Some(c) = &spec.intra_b {
        add_intra(&mut asm, 1, c);
    }
    for (bath, group, spin_group) in
        [(&spec.bath_a, roles.bath_a, 0usize), (&spec.bath_b, roles.bath_b, 1usize)]
    {
        let (Some(bath), Some(group)) = (bath, group) else { continue };
        let terms = bath_terms(bath, group, spec.bath_frame);
        asm.mode_quadratic(terms.group, &terms.free);
        for (j, row) in terms.coupling.iter().enumerate() {
            for (q, &c) in row.iter().enumerate() {
                asm.spin_mode((spin_group, j), (terms.group, q), c, spec.bath_form, false);
            }
        }
    }
    asm.finish()
}

/// Effective site–mode couplings in the configured frame (`[site][mode]`).
pub fn frame_couplings(bath: &Bath, frame: BathFrame) -> Vec<Vec<f64>> {
    bath_terms(bath, 0, frame).coupling
}
