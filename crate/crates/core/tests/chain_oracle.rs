//! Two-node heralding chains simulated photon-by-photon against the closed forms.

mod common;

use approx::assert_abs_diff_eq;
use cavsim::entangle::{atom_atom_new, atom_atom_old, TwoCavitySetup};
use cavsim::oracle::{atom_atom_new_network, atom_atom_old_network, ModeSplit};
use cavsim::CavityParams;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_matched<R: Rng>(rng: &mut R) -> CavityParams {
    common::random_params(rng).with_zeta(1.0)
}

#[test]
fn new_chain_matches_closed_form() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..500 {
        let (a, b) = (random_matched(&mut rng), random_matched(&mut rng));
        let (phi_1, phi_2) = (rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0));
        let setup = TwoCavitySetup::new(a, b, phi_1, phi_2).unwrap();
        let closed = match atom_atom_new(&setup) {
            Ok(f) => f,
            Err(e) => {
                assert!(e.is_no_herald());
                continue;
            }
        };
        let chain = atom_atom_new_network(&a, &b, phi_1, phi_2, ModeSplit::matched()).unwrap();
        assert!(chain.trace.max_deviation() < 1e-12);
        // both detectors herald their Bell state with the same fidelity
        for h in &chain.heralds {
            assert_abs_diff_eq!(h.fidelity, closed, epsilon = 1e-10);
        }
        assert_abs_diff_eq!(
            chain.heralds[0].probability,
            chain.heralds[1].probability,
            epsilon = 1e-12
        );
    }
}

#[test]
fn old_chain_matches_closed_form() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..500 {
        let (a, b) = (random_matched(&mut rng), random_matched(&mut rng));
        let Ok(closed) = atom_atom_old(&TwoCavitySetup::new(a, b, 0.0, 0.0).unwrap()) else {
            continue;
        };
        let chain = atom_atom_old_network(&a, &b, ModeSplit::matched()).unwrap();
        assert!(chain.trace.max_deviation() < 1e-12);
        let phi = chain.heralds.iter().find(|h| h.target == "phi+").unwrap();
        let psi = chain.heralds.iter().find(|h| h.target == "psi+").unwrap();
        assert_abs_diff_eq!(phi.fidelity, closed.phi_plus, epsilon = 1e-10);
        assert_abs_diff_eq!(psi.fidelity, closed.psi_plus, epsilon = 1e-10);
        assert_abs_diff_eq!(
            phi.probability / psi.probability,
            closed.weight_phi_plus / closed.weight_psi_plus,
            epsilon = 1e-9
        );
        assert_abs_diff_eq!(
            chain.mean_fidelity(),
            closed.heralded_mean(),
            epsilon = 1e-10
        );
    }
}

#[test]
fn identical_cavities_herald_perfect_bell_states() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..50 {
        let p = random_matched(&mut rng).with_cooperativity(rng.random_range(0.5..10.0));
        let phi = rng.random_range(-3.0..3.0);
        let chain = atom_atom_new_network(&p, &p, phi, phi, ModeSplit::matched()).unwrap();
        for h in &chain.heralds {
            assert_abs_diff_eq!(h.fidelity, 1.0, epsilon = 1e-10);
        }
    }
}

/// A mismatched photon never flips, so one of the two nodes always rejects
/// it: mismatch costs rate, not fidelity.
#[test]
fn mismatch_only_lowers_the_chain_rate() {
    let a = CavityParams::new(4.0, 0.0, 0.0, 0.916, 1.0).unwrap();
    let split = ModeSplit {
        zeta: 0.92,
        theta: 0.7,
    };
    let chain = atom_atom_new_network(&a, &a, 0.0, 0.0, split).unwrap();
    assert!(chain.trace.max_deviation() < 1e-12);
    assert_abs_diff_eq!(chain.mean_fidelity(), 1.0, epsilon = 1e-12);
    let matched = atom_atom_new_network(&a, &a, 0.0, 0.0, ModeSplit::matched()).unwrap();
    assert_abs_diff_eq!(
        chain.success_probability,
        0.92 * matched.success_probability,
        epsilon = 1e-12
    );
}
