//! Heralded remote atom–atom entanglement and the two-atoms-in-one-cavity gate.
//!
//! The chain closed forms assume perfect spatial-mode matching; mismatched
//! chains can be simulated with [`crate::oracle::atom_atom_new_network`].

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::analytic::NO_HERALD_THRESHOLD;
use crate::cavity::{reflection_lossy, CavityParams, ReflectionPair};
use crate::error::{Error, Result};

/// Two cavities linked by one photon. Both parameter sets are held at `ζ = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoCavitySetup {
    pub params_1: CavityParams,
    pub params_2: CavityParams,
    /// MZI phase at node 1 (new scheme only).
    pub phi_1: f64,
    /// MZI phase at node 2 (new scheme only).
    pub phi_2: f64,
}

impl TwoCavitySetup {
    pub fn new(
        params_1: CavityParams,
        params_2: CavityParams,
        phi_1: f64,
        phi_2: f64,
    ) -> Result<Self> {
        let setup = TwoCavitySetup {
            params_1: params_1.with_zeta(1.0),
            params_2: params_2.with_zeta(1.0),
            phi_1,
            phi_2,
        };
        setup.validate()?;
        Ok(setup)
    }

    /// Same cavity twice, equal phases.
    pub fn identical(params: CavityParams) -> Result<Self> {
        Self::new(params, params, 0.0, 0.0)
    }

    pub fn validate(&self) -> Result<()> {
        self.params_1.validate()?;
        self.params_2.validate()?;
        if self.params_1.zeta != 1.0 || self.params_2.zeta != 1.0 {
            return Err(Error::param(
                "zeta",
                self.params_1.zeta.min(self.params_2.zeta),
                "atom-atom closed forms require zeta = 1",
            ));
        }
        if !self.phi_1.is_finite() || !self.phi_2.is_finite() {
            return Err(Error::param("phi", f64::NAN, "must be finite"));
        }
        Ok(())
    }
}

fn no_herald(weight: f64) -> Error {
    Error::NoHerald {
        success_probability: weight,
        p_loss: f64::NAN,
        p_reject: f64::NAN,
    }
}

/// Bell-state fidelity heralded by the new-scheme chain.
pub fn atom_atom_new(setup: &TwoCavitySetup) -> Result<f64> {
    setup.validate()?;
    let first = reflection_lossy(&setup.params_1);
    let second = reflection_lossy(&setup.params_2);
    let a = second.r_c - second.r_nc;
    let b = (first.r_c - first.r_nc) * Complex64::from_polar(1.0, setup.phi_2 - setup.phi_1);
    let weight = a.norm_sqr() + b.norm_sqr();
    if weight < NO_HERALD_THRESHOLD {
        return Err(no_herald(weight));
    }
    Ok((0.5 * (a + b).norm_sqr() / weight).min(1.0))
}

/// Both heralds of the old-scheme chain: `|φ+⟩` and `|ψ+⟩` fidelities with
/// their relative click weights (unnormalized, common scale).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OldBellFidelities {
    pub phi_plus: f64,
    pub psi_plus: f64,
    pub weight_phi_plus: f64,
    pub weight_psi_plus: f64,
}

impl OldBellFidelities {
    /// Fidelity averaged over both heralds, weighted by click probability.
    pub fn heralded_mean(&self) -> f64 {
        let w = self.weight_phi_plus + self.weight_psi_plus;
        (self.weight_phi_plus * self.phi_plus + self.weight_psi_plus * self.psi_plus) / w
    }
}

/// Old-scheme chain. The `σ−` half of the photon picks up `r′_nc r_nc` on every
/// atomic state; the `σ+` half picks up `r(a) r′(b)`. The two detectors see the
/// sum and difference of these.
pub fn atom_atom_old(setup: &TwoCavitySetup) -> Result<OldBellFidelities> {
    setup.validate()?;
    let first = reflection_lossy(&setup.params_1);
    let second = reflection_lossy(&setup.params_2);
    let base = second.r_nc * first.r_nc;
    // register order |00⟩, |01⟩, |10⟩, |11⟩ with the first cavity's atom first
    let r1 = [first.r_nc, first.r_nc, first.r_c, first.r_c];
    let r2 = [second.r_nc, second.r_c, second.r_nc, second.r_c];
    let sum: Vec<Complex64> = (0..4).map(|k| base + r1[k] * r2[k]).collect();
    let diff: Vec<Complex64> = (0..4).map(|k| base - r1[k] * r2[k]).collect();
    let weight_phi_plus: f64 = sum.iter().map(|c| c.norm_sqr()).sum();
    let weight_psi_plus: f64 = diff.iter().map(|c| c.norm_sqr()).sum();
    if weight_phi_plus < NO_HERALD_THRESHOLD || weight_psi_plus < NO_HERALD_THRESHOLD {
        return Err(no_herald(weight_phi_plus.min(weight_psi_plus)));
    }
    Ok(OldBellFidelities {
        phi_plus: 0.5 * (sum[0] + sum[3]).norm_sqr() / weight_phi_plus,
        psi_plus: 0.5 * (diff[1] + diff[2]).norm_sqr() / weight_psi_plus,
        weight_phi_plus,
        weight_psi_plus,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TwoAtomResult {
    pub fidelity: f64,
    pub p_loss: f64,
}

/// Two atoms sharing one cavity with equal-superposition inputs: three of the
/// four atomic states couple.
pub fn two_atoms_one_cavity(p: &CavityParams) -> Result<TwoAtomResult> {
    p.validate()?;
    two_atoms_with_reflections(&reflection_lossy(p), p.zeta)
}

/// [`two_atoms_one_cavity`] for given reflection amplitudes.
pub fn two_atoms_with_reflections(r: &ReflectionPair, zeta: f64) -> Result<TwoAtomResult> {
    if !(0.0..=1.0).contains(&zeta) {
        return Err(Error::param("zeta", zeta, "must lie in [0, 1]"));
    }
    let p_loss = zeta / 4.0 * (3.0 * r.t_c_sq + r.t_nc_sq);
    let survive = 1.0 - p_loss;
    if survive < NO_HERALD_THRESHOLD {
        return Err(Error::NoHerald {
            success_probability: survive,
            p_loss,
            p_reject: 0.0,
        });
    }
    let overlap = ((3.0 * r.r_c - r.r_nc) / 4.0).norm_sqr();
    Ok(TwoAtomResult {
        fidelity: ((1.0 - zeta) / 4.0 + zeta * overlap) / survive,
        p_loss,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn sweep_point() -> CavityParams {
        CavityParams::new(4.0, 0.0, 0.0, 0.916, 1.0).unwrap()
    }

    #[test]
    fn zeta_is_forced_to_one() {
        let s = TwoCavitySetup::new(sweep_point().with_zeta(0.5), sweep_point(), 0.0, 0.0).unwrap();
        assert_eq!(s.params_1.zeta, 1.0);
        let mut bad = s;
        bad.params_2.zeta = 0.9;
        assert!(bad.validate().is_err());
    }

    #[test]
    fn identical_cavities_give_bell_states() {
        let s = TwoCavitySetup::identical(sweep_point()).unwrap();
        assert_abs_diff_eq!(atom_atom_new(&s).unwrap(), 1.0, epsilon = 1e-12);
        let s = TwoCavitySetup::new(sweep_point(), sweep_point(), 0.3, 0.3 + PI).unwrap();
        assert_abs_diff_eq!(atom_atom_new(&s).unwrap(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn new_scheme_depends_on_phase_difference_only() {
        let a = CavityParams::new(2.0, 0.1, -0.05, 0.85, 1.0).unwrap();
        let b = CavityParams::new(5.0, -0.02, 0.04, 0.93, 1.0).unwrap();
        let f = atom_atom_new(&TwoCavitySetup::new(a, b, 0.1, 0.4).unwrap()).unwrap();
        let g = atom_atom_new(&TwoCavitySetup::new(a, b, 1.1, 1.4).unwrap()).unwrap();
        assert_abs_diff_eq!(f, g, epsilon = 1e-12);
        assert!(f < 1.0);
    }

    #[test]
    fn empty_cavities_never_herald() {
        let empty = CavityParams::new(0.0, 0.0, 0.0, 0.9, 1.0).unwrap();
        let s = TwoCavitySetup::identical(empty).unwrap();
        assert!(atom_atom_new(&s).unwrap_err().is_no_herald());
    }

    #[test]
    fn old_scheme_ideal_and_non_ideal() {
        let s = TwoCavitySetup::identical(CavityParams::ideal()).unwrap();
        let f = atom_atom_old(&s).unwrap();
        assert_abs_diff_eq!(f.phi_plus, 1.0, epsilon = 1e-8);
        assert_abs_diff_eq!(f.psi_plus, 1.0, epsilon = 1e-8);

        let f = atom_atom_old(&TwoCavitySetup::identical(sweep_point()).unwrap()).unwrap();
        assert!(f.phi_plus < 1.0 - 1e-4 && f.psi_plus < 1.0 - 1e-4);
        assert!(f.heralded_mean() > f.phi_plus.min(f.psi_plus));
    }

    #[test]
    fn old_scheme_swap_symmetry() {
        let a = CavityParams::new(2.0, 0.1, -0.05, 0.85, 1.0).unwrap();
        let b = CavityParams::new(5.0, -0.02, 0.04, 0.93, 1.0).unwrap();
        let ab = atom_atom_old(&TwoCavitySetup::new(a, b, 0.0, 0.0).unwrap()).unwrap();
        let ba = atom_atom_old(&TwoCavitySetup::new(b, a, 0.0, 0.0).unwrap()).unwrap();
        assert_abs_diff_eq!(ab.phi_plus, ba.phi_plus, epsilon = 1e-12);
        assert_abs_diff_eq!(ab.psi_plus, ba.psi_plus, epsilon = 1e-12);
    }

    #[test]
    fn two_atoms_limits() {
        let r = two_atoms_one_cavity(&CavityParams::ideal()).unwrap();
        assert_abs_diff_eq!(r.fidelity, 1.0, epsilon = 1e-8);
        assert_abs_diff_eq!(r.p_loss, 0.0, epsilon = 1e-8);
        let r = two_atoms_one_cavity(&CavityParams::ideal().with_zeta(0.92)).unwrap();
        assert_abs_diff_eq!(r.fidelity, 0.94, epsilon = 1e-8);
    }
}
