use proptest::prelude::*;

use supertransfer::diffusion::{simulate_walk, DiffusionConfig, LifetimeModel};
use supertransfer::hamiltonians::{
    apply_coupling_disorder, apply_site_disorder, full_hamiltonian, Bath, SystemSpec,
};
use supertransfer::hilbert::{ModeGroup, SpaceLayout};
use supertransfer::sectors::{supertransfer_backward, supertransfer_forward, supertransfer_rate};

fn layouts() -> impl Strategy<Value = SpaceLayout> {
    (
        prop::collection::vec(1usize..=4, 1..=2),
        prop::collection::vec((1usize..=3, 2usize..=4), 0..=2),
    )
        .prop_map(|(spins, modes)| {
            let modes = modes.into_iter().map(|(count, cutoff)| ModeGroup { count, cutoff }).collect();
            SpaceLayout::new(spins, modes).unwrap()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn codec_is_a_bijection(layout in layouts(), seed in any::<u64>()) {
        let dim = layout.total_dim();
        let idx = (seed % dim as u64) as usize;
        let cfg = layout.decode(idx).unwrap();
        prop_assert_eq!(cfg.spins.len(), layout.total_sites());
        prop_assert_eq!(cfg.modes.len(), layout.total_modes());
        prop_assert_eq!(layout.encode(&cfg).unwrap(), idx);
        prop_assert!(layout.decode(dim).is_err());
    }

    #[test]
    fn excitation_count_matches_digits(layout in layouts(), seed in any::<u64>()) {
        let idx = (seed % layout.total_dim() as u64) as usize;
        let cfg = layout.decode(idx).unwrap();
        let digits = cfg.spins.iter().map(|&s| s as usize).sum::<usize>() + cfg.modes.iter().sum::<usize>();
        prop_assert_eq!(layout.total_excitations(idx), digits);
    }

    #[test]
    fn hamiltonians_are_hermitian(
        n in 1usize..=3,
        m in 1usize..=3,
        gamma in 0.01f64..0.5,
        bath_gamma in 0.0f64..0.2,
        delta in 0.0f64..0.1,
        seed in any::<u64>(),
        rwa in any::<bool>(),
    ) {
        let mut spec = SystemSpec::hopping(n, 1.0, m, 1.1, gamma);
        spec.rng_seed = seed;
        spec.rwa = rwa;
        spec.bath_a = Some(Bath::homogeneous(n, 2, 0.9, bath_gamma, 2));
        spec = apply_site_disorder(&spec, delta).unwrap();
        spec = apply_coupling_disorder(&spec, delta).unwrap();
        let h = full_hamiltonian(&spec).unwrap();
        prop_assert!(h.is_hermitian());
        prop_assert!(h.hermiticity_defect() < 1e-14);
    }

    #[test]
    fn net_rate_is_antisymmetric_under_group_swap(
        a in 1usize..=8,
        b in 1usize..=8,
        n_frac in 0.0f64..=1.0,
        m_frac in 0.0f64..=1.0,
        gamma in 0.0f64..2.0,
    ) {
        let n = (n_frac * a as f64).floor() as usize;
        let m = (m_frac * b as f64).floor() as usize;
        let ab = supertransfer_rate(n, a, m, b, gamma).unwrap();
        let ba = supertransfer_rate(m, b, n, a, gamma).unwrap();
        prop_assert!((ab + ba).abs() <= 1e-12 * (1.0 + ab.abs()));
        prop_assert_eq!(
            supertransfer_forward(n, a, m, b, gamma).unwrap(),
            supertransfer_backward(m, b, n, a, gamma).unwrap()
        );
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn walk_is_deterministic_and_linear_in_step(
        seed in any::<u64>(),
        alpha in 0.5f64..20.0,
        scale in 1.5f64..10.0,
        fixed in any::<bool>(),
        two_d in any::<bool>(),
    ) {
        let cfg = DiffusionConfig {
            alpha,
            walkers: 400,
            rng_seed: seed,
            lifetime: 200.0,
            lifetime_model: if fixed { LifetimeModel::Fixed } else { LifetimeModel::Exponential },
            lattice_dim: if two_d { 2 } else { 1 },
            ..DiffusionConfig::default()
        };
        let a = simulate_walk(&cfg).unwrap();
        prop_assert_eq!(&a, &simulate_walk(&cfg).unwrap());
        // The hop sequence does not depend on ℓ, so displacements scale exactly.
        let b = simulate_walk(&DiffusionConfig { alpha: alpha * scale, ..cfg.clone() }).unwrap();
        let ratio = b.rms_displacement_units / a.rms_displacement_units;
        prop_assert!((ratio - scale).abs() < 1e-9 * scale);
        prop_assert_eq!(a.incoherent_hops_mean, b.incoherent_hops_mean);
    }
}
