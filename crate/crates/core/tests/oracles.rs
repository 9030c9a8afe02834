//! Independent checks of the library against enumerations written from scratch.

use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use supertransfer::hamiltonians::{
    dicke_hamiltonian, frame_couplings, full_hamiltonian, hopping_hamiltonian, Bath, BathFrame, SpinGroupSpec,
    SystemSpec,
};
use supertransfer::hilbert::{ProductState, StateVector};
use supertransfer::sectors::{supertransfer_forward, supertransfer_rate};

fn popcount(x: usize) -> usize {
    x.count_ones() as usize
}

/// Uniform superposition over all `sites`-bit masks with `n` bits set.
fn dicke_masks(sites: usize, n: usize) -> (Vec<usize>, f64) {
    let masks: Vec<usize> = (0..1usize << sites).filter(|&x| popcount(x) == n).collect();
    let c = 1.0 / (masks.len() as f64).sqrt();
    (masks, c)
}

/// Golden-rule sums over final configurations for `γ Σ_jk (σ+_k σ-_j + h.c.)`
/// acting on `|n>_A |m>_B`, enumerated bit by bit.
fn brute_force_rates(big_n: usize, n: usize, big_m: usize, m: usize, gamma: f64) -> (f64, f64) {
    let (ma, ca) = dicke_masks(big_n, n);
    let (mb, cb) = dicke_masks(big_m, m);
    let mut fwd = std::collections::HashMap::<(usize, usize), f64>::new();
    let mut bwd = std::collections::HashMap::<(usize, usize), f64>::new();
    for &a in &ma {
        for &b in &mb {
            let amp = gamma * ca * cb;
            for j in 0..big_n {
                for k in 0..big_m {
                    let (aj, bk) = (a >> j & 1, b >> k & 1);
                    if aj == 1 && bk == 0 {
                        *fwd.entry((a ^ 1 << j, b | 1 << k)).or_default() += amp;
                    }
                    if aj == 0 && bk == 1 {
                        *bwd.entry((a | 1 << j, b ^ 1 << k)).or_default() += amp;
                    }
                }
            }
        }
    }
    let sq = |m: &std::collections::HashMap<(usize, usize), f64>| m.values().map(|v| v * v).sum::<f64>();
    (sq(&fwd), sq(&bwd))
}

#[test]
fn transfer_rates_match_bit_enumeration() {
    let gamma = 0.37;
    for big_n in 1..=5 {
        for big_m in 1..=5 {
            for n in 0..=big_n {
                for m in 0..=big_m {
                    if n + m > 2 {
                        continue;
                    }
                    let (f, b) = brute_force_rates(big_n, n, big_m, m, gamma);
                    let net = supertransfer_rate(n, big_n, m, big_m, gamma).unwrap();
                    assert!((net - (f - b)).abs() < 1e-10, "net N={big_n} n={n} M={big_m} m={m}");
                    let fw = supertransfer_forward(n, big_n, m, big_m, gamma).unwrap();
                    assert!((fw - f).abs() < 1e-10, "forward N={big_n} n={n} M={big_m} m={m}");
                }
            }
        }
    }
}

#[test]
fn hopping_element_matches_bit_enumeration() {
    let gamma = 0.21;
    for big_n in 1..=5 {
        for big_m in 1..=5 {
            let spec = SystemSpec::hopping(big_n, 1.0, big_m, 1.0, gamma);
            let layout = Arc::new(spec.layout().unwrap());
            let h = hopping_hamiltonian(&spec).unwrap();
            let i = ProductState::new(&layout).dicke(0, 1).unwrap().build().unwrap();
            let f = ProductState::new(&layout).dicke(1, 1).unwrap().build().unwrap();
            let el = h.sandwich(f.amplitudes(), i.amplitudes()).unwrap();
            let want = (big_n * big_m) as f64 * gamma * gamma;
            assert!((el.norm_sqr() - want).abs() < 1e-10);
            let (fw, _) = brute_force_rates(big_n, 1, big_m, 0, gamma);
            assert!((fw - want).abs() < 1e-12);
        }
    }
}

/// Orthonormal basis of the `n`-excitation sector orthogonal to the Dicke state.
fn dark_basis(sites: usize, n: usize) -> Vec<Vec<f64>> {
    let (masks, c) = dicke_masks(sites, n);
    let dim = 1usize << sites;
    let mut basis = vec![{
        let mut v = vec![0.0; dim];
        masks.iter().for_each(|&x| v[x] = c);
        v
    }];
    for &x in &masks {
        let mut v = vec![0.0; dim];
        v[x] = 1.0;
        for _ in 0..2 {
            for b in &basis {
                let d: f64 = b.iter().zip(&v).map(|(p, q)| p * q).sum();
                v.iter_mut().zip(b).for_each(|(p, q)| *p -= d * q);
            }
        }
        let norm = v.iter().map(|p| p * p).sum::<f64>().sqrt();
        if norm > 1e-8 {
            v.iter_mut().for_each(|p| *p /= norm);
            basis.push(v);
        }
    }
    assert_eq!(basis.len(), masks.len());
    basis.remove(0);
    basis
}

/// Norm of the part of `H|ψ, 0 photons>` with one photon and one fewer spin excitation.
fn emission_norm(spec: &SystemSpec, psi: &StateVector, n: usize) -> f64 {
    let h = dicke_hamiltonian(spec).unwrap();
    let out = h.apply(psi.amplitudes()).unwrap();
    let layout = psi.layout();
    out.iter()
        .enumerate()
        .filter(|(i, _)| layout.mode_occupation(*i, 0, 0) == 1 && layout.group_excitations(*i, 0) + 1 == n)
        .map(|(_, a)| a.norm_sqr())
        .sum::<f64>()
        .sqrt()
}

/// Amplitude into the symmetric channel `<D_{n-1}, 1 photon| H |ψ, 0>`.
fn symmetric_channel(spec: &SystemSpec, psi: &StateVector, n: usize) -> f64 {
    let h = dicke_hamiltonian(spec).unwrap();
    let layout = psi.layout();
    let f = ProductState::new(layout).dicke(0, n - 1).unwrap().fock(0, &[1]).unwrap().build().unwrap();
    h.sandwich(f.amplitudes(), psi.amplitudes()).unwrap().norm()
}

#[test]
fn singlet_is_dark() {
    let spec = SystemSpec::dicke(2, 1.0, 0.3, 3);
    let layout = Arc::new(spec.layout().unwrap());
    let s = ProductState::new(&layout).singlet(0, 0, 1).unwrap().build().unwrap();
    assert!(emission_norm(&spec, &s, 1) < 1e-12);
}

#[test]
fn dark_complement_has_no_symmetric_channel() {
    let gamma = 0.3;
    for sites in 2..=4 {
        let spec = SystemSpec::dicke(sites, 1.0, gamma, 3);
        let layout = Arc::new(spec.layout().unwrap());
        for n in 1..sites {
            for v in dark_basis(sites, n) {
                let amps = v.into_iter().map(|x| C64::new(x, 0.0)).collect();
                let psi = ProductState::new(&layout).spin_amplitudes(0, amps).unwrap().build().unwrap();
                let amp = symmetric_channel(&spec, &psi, n);
                assert!(amp < 1e-12, "N={sites} n={n}: {amp:e}");
                // Single excitations outside the symmetric state cannot emit at all.
                if n == 1 {
                    assert!(emission_norm(&spec, &psi, n) < 1e-12);
                }
            }
            let bright = ProductState::new(&layout).dicke(0, n).unwrap().build().unwrap();
            let want = ((n * (sites - n + 1)) as f64).sqrt() * gamma;
            assert!((emission_norm(&spec, &bright, n) - want).abs() < 1e-12);
            assert!((symmetric_channel(&spec, &bright, n) - want).abs() < 1e-12);
        }
    }
}

#[test]
fn doubly_excited_nonsymmetric_states_still_emit() {
    // j = 1/2, m = +1/2 states of three spins decay into the j = 1/2, m = -1/2 multiplet.
    let spec = SystemSpec::dicke(3, 1.0, 1.0, 3);
    let layout = Arc::new(spec.layout().unwrap());
    for v in dark_basis(3, 2) {
        let amps = v.into_iter().map(|x| C64::new(x, 0.0)).collect();
        let psi = ProductState::new(&layout).spin_amplitudes(0, amps).unwrap().build().unwrap();
        assert!((emission_norm(&spec, &psi, 2) - 1.0).abs() < 1e-12);
    }
}

#[test]
fn dark_basis_spans_the_complement() {
    for sites in 2..=4 {
        for n in 1..sites {
            let b = dark_basis(sites, n);
            let g = DMatrix::from_fn(b.len(), b.len(), |i, j| b[i].iter().zip(&b[j]).map(|(p, q)| p * q).sum::<f64>());
            assert!((g - DMatrix::identity(b.len(), b.len())).abs().max() < 1e-12);
        }
    }
}

#[test]
fn collective_mode_coupling_is_enhanced() {
    let cap_gamma = 0.13;
    for sites in 1..=5 {
        let mut spec = SystemSpec::new(SpinGroupSpec::new(sites, 1.0));
        spec.group_b = Some(SpinGroupSpec::new(1, 1.0));
        spec.bath_a = Some(Bath::homogeneous(sites, sites, 1.0, cap_gamma, 2));
        spec.bath_frame = BathFrame::Collective;
        let couplings = frame_couplings(spec.bath_a.as_ref().unwrap(), BathFrame::Collective);
        for row in &couplings {
            for (q, g) in row.iter().enumerate().skip(1) {
                assert!(g.abs() < 1e-12, "mode {q}: {g:e}");
            }
        }

        let layout = Arc::new(spec.layout().unwrap());
        let group = spec.mode_roles().bath_a.unwrap();
        let h = full_hamiltonian(&spec).unwrap();
        let w = ProductState::new(&layout).dicke(0, 1).unwrap().build().unwrap();
        for q in 0..sites {
            let mut occ = vec![0; sites];
            occ[q] = 1;
            let ground = ProductState::new(&layout).fock(group, &occ).unwrap().build().unwrap();
            let el = h.sandwich(w.amplitudes(), ground.amplitudes()).unwrap().norm();
            if q == 0 {
                let want = (sites as f64).sqrt() * cap_gamma;
                assert!((el - want).abs() < 1e-10, "N={sites}: {el} vs {want}");
            } else {
                assert!(el < 1e-12, "N={sites} q={q}: {el:e}");
            }
        }
    }
}
