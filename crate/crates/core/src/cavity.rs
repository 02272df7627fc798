//! Operating point of a single-sided atom–cavity system and the complex
//! reflection amplitudes a photon picks up when it scatters off it.
//!
//! Rates follow the half-width-at-half-maximum convention throughout: `kappa`
//! and `gamma` are HWHM linewidths, so the cooperativity is `g² / (2 γ κ)`.
//! Detunings are stored as dimensionless fractions of the respective linewidth.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Physical rates and frequencies, all in the same angular-frequency unit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RawCavityParams {
    /// Atom–cavity coupling.
    pub g: f64,
    /// Total cavity field decay rate (HWHM).
    pub kappa: f64,
    /// Decay rate through the coupling mirror (HWHM).
    pub kappa_r: f64,
    /// Atomic dipole decay rate (HWHM).
    pub gamma: f64,
    pub omega_p: f64,
    pub omega_c: f64,
    pub omega_a: f64,
}

impl RawCavityParams {
    pub fn validate(&self) -> Result<()> {
        let all = [
            ("g", self.g),
            ("kappa", self.kappa),
            ("kappa_r", self.kappa_r),
            ("gamma", self.gamma),
            ("omega_p", self.omega_p),
            ("omega_c", self.omega_c),
            ("omega_a", self.omega_a),
        ];
        for (name, value) in all {
            if !value.is_finite() {
                return Err(Error::param(name, value, "must be finite"));
            }
        }
        if self.kappa <= 0.0 {
            return Err(Error::param("kappa", self.kappa, "must be > 0"));
        }
        if self.gamma <= 0.0 {
            return Err(Error::param("gamma", self.gamma, "must be > 0"));
        }
        if self.g < 0.0 {
            return Err(Error::param("g", self.g, "must be >= 0"));
        }
        if self.kappa_r < 0.0 || self.kappa_r > self.kappa {
            return Err(Error::param(
                "kappa_r",
                self.kappa_r,
                "must lie in [0, kappa]",
            ));
        }
        Ok(())
    }
}

/// Dimensionless operating point consumed by every gate model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CavityParams {
    /// Cooperativity `C = g² / (2 γ κ)`.
    pub cooperativity: f64,
    /// Photon–cavity detuning in units of `κ`.
    pub delta_c: f64,
    /// Photon–atom detuning in units of `γ`.
    pub delta_a: f64,
    /// `κ_r / κ`: fraction of the cavity decay leaving through the coupling mirror.
    pub kappa_ratio: f64,
    /// Spatial mode-matching efficiency between photon and cavity mode.
    pub zeta: f64,
}

impl CavityParams {
    pub fn new(
        cooperativity: f64,
        delta_c: f64,
        delta_a: f64,
        kappa_ratio: f64,
        zeta: f64,
    ) -> Result<Self> {
        let p = CavityParams {
            cooperativity,
            delta_c,
            delta_a,
            kappa_ratio,
            zeta,
        };
        p.validate()?;
        Ok(p)
    }

    /// Resonant, lossless, perfectly mode-matched cavity with the given cooperativity.
    pub fn resonant(cooperativity: f64) -> Self {
        CavityParams {
            cooperativity,
            delta_c: 0.0,
            delta_a: 0.0,
            kappa_ratio: 1.0,
            zeta: 1.0,
        }
    }

    /// Large-cooperativity stand-in for the ideal gate (`r_c → 1`, `r_nc = −1`).
    pub fn ideal() -> Self {
        Self::resonant(1e9)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.cooperativity.is_finite() || self.cooperativity < 0.0 {
            return Err(Error::param(
                "cooperativity",
                self.cooperativity,
                "must be finite and >= 0",
            ));
        }
        if !self.delta_c.is_finite() {
            return Err(Error::param("delta_c", self.delta_c, "must be finite"));
        }
        if !self.delta_a.is_finite() {
            return Err(Error::param("delta_a", self.delta_a, "must be finite"));
        }
        if !(0.0..=1.0).contains(&self.kappa_ratio) {
            return Err(Error::param(
                "kappa_ratio",
                self.kappa_ratio,
                "must lie in [0, 1]",
            ));
        }
        if !(0.0..=1.0).contains(&self.zeta) {
            return Err(Error::param("zeta", self.zeta, "must lie in [0, 1]"));
        }
        Ok(())
    }

    pub fn with_zeta(mut self, zeta: f64) -> Self {
        self.zeta = zeta;
        self
    }

    pub fn with_kappa_ratio(mut self, kappa_ratio: f64) -> Self {
        self.kappa_ratio = kappa_ratio;
        self
    }

    pub fn with_cooperativity(mut self, cooperativity: f64) -> Self {
        self.cooperativity = cooperativity;
        self
    }

    pub fn with_detunings(mut self, delta_c: f64, delta_a: f64) -> Self {
        self.delta_c = delta_c;
        self.delta_a = delta_a;
        self
    }

    pub fn reflections(&self) -> ReflectionPair {
        reflection_lossy(self)
    }
}

/// Reduces physical rates to the dimensionless operating point.
pub fn reduce_params(raw: &RawCavityParams, zeta: f64) -> Result<CavityParams> {
    raw.validate()?;
    CavityParams::new(
        raw.g * raw.g / (2.0 * raw.gamma * raw.kappa),
        (raw.omega_p - raw.omega_c) / raw.kappa,
        (raw.omega_p - raw.omega_a) / raw.gamma,
        raw.kappa_r / raw.kappa,
        zeta,
    )
}

/// Reflection amplitudes for the coupled (`r_c`) and uncoupled (`r_nc`)
/// photon–atom configurations, with the matching loss probabilities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReflectionPair {
    pub r_c: Complex64,
    pub r_nc: Complex64,
    /// `1 − |r_c|²`
    pub t_c_sq: f64,
    /// `1 − |r_nc|²`
    pub t_nc_sq: f64,
}

impl ReflectionPair {
    pub fn from_amplitudes(r_c: Complex64, r_nc: Complex64) -> Self {
        ReflectionPair {
            r_c,
            r_nc,
            t_c_sq: 1.0 - r_c.norm_sqr(),
            t_nc_sq: 1.0 - r_nc.norm_sqr(),
        }
    }

    /// `r_c = 1`, `r_nc = −1`, no loss.
    pub fn ideal() -> Self {
        Self::from_amplitudes(Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0))
    }

    /// Loss amplitude for the coupled channel. Rounding can push `t_c_sq`
    /// a few ulps below zero for a lossless cavity; that is clipped here.
    pub fn t_c(&self) -> f64 {
        self.t_c_sq.max(0.0).sqrt()
    }

    pub fn t_nc(&self) -> f64 {
        self.t_nc_sq.max(0.0).sqrt()
    }

    /// Half the amplitude contrast, `(r_c − r_nc) / 2`: the weight of the
    /// polarization-flipped (successful Z) component after scattering `|H⟩`.
    pub fn flip_amplitude(&self) -> Complex64 {
        (self.r_c - self.r_nc) * 0.5
    }

    /// `(r_c + r_nc) / 2`: the component whose polarization fails to flip.
    pub fn no_flip_amplitude(&self) -> Complex64 {
        (self.r_c + self.r_nc) * 0.5
    }
}

/// Reflection amplitudes including leakage through the far mirror and scattering
/// (`kappa_ratio < 1`).
pub fn reflection_lossy(p: &CavityParams) -> ReflectionPair {
    let i = Complex64::i();
    let one = Complex64::new(1.0, 0.0);
    let cav = i * p.delta_c + one;
    let atom = i * p.delta_a + one;
    let denom = cav * atom + 2.0 * p.cooperativity;
    let r_c = one - 2.0 * p.kappa_ratio * atom / denom;
    let r_nc = one - 2.0 * p.kappa_ratio / cav;
    ReflectionPair::from_amplitudes(r_c, r_nc)
}

/// Reflection amplitudes of a cavity with no loss channel other than the
/// atom (`kappa_ratio = 1`), written in the ratio form.
pub fn reflection_lossless(delta_c: f64, delta_a: f64, cooperativity: f64) -> ReflectionPair {
    let i = Complex64::i();
    let one = Complex64::new(1.0, 0.0);
    let atom = i * delta_a + one;
    let coupling = Complex64::new(2.0 * cooperativity, 0.0);
    let r_c = ((i * delta_c - one) * atom + coupling) / ((i * delta_c + one) * atom + coupling);
    let r_nc = (i * delta_c - one) / (i * delta_c + one);
    ReflectionPair::from_amplitudes(r_c, r_nc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn zero_coupling_gives_zero_cooperativity() {
        let raw = RawCavityParams {
            g: 0.0,
            kappa: 3.1,
            kappa_r: 2.0,
            gamma: 0.7,
            omega_p: 1.0,
            omega_c: 1.0,
            omega_a: 1.0,
        };
        let p = reduce_params(&raw, 0.9).unwrap();
        assert_eq!(p.cooperativity, 0.0);
        assert_eq!(p.delta_c, 0.0);
        assert_eq!(p.delta_a, 0.0);
        assert_eq!(p.zeta, 0.9);
    }

    #[test]
    fn cavity_detuning_from_physical_rates() {
        let two_pi = 2.0 * PI;
        let raw = RawCavityParams {
            g: two_pi * 7.0e6,
            kappa: two_pi * 2.5e6,
            kappa_r: two_pi * 2.3e6,
            gamma: two_pi * 3.0e6,
            omega_p: two_pi * 0.3e6,
            omega_c: 0.0,
            omega_a: 0.0,
        };
        let p = reduce_params(&raw, 1.0).unwrap();
        assert_abs_diff_eq!(p.delta_c, 0.12, epsilon = 1e-12);
        assert_abs_diff_eq!(p.kappa_ratio, 0.92, epsilon = 1e-12);
        assert_abs_diff_eq!(p.cooperativity, 49.0 / (2.0 * 3.0 * 2.5), epsilon = 1e-12);
    }

    #[test]
    fn reduce_rejects_zero_linewidths() {
        let mut raw = RawCavityParams {
            g: 1.0,
            kappa: 0.0,
            kappa_r: 0.0,
            gamma: 1.0,
            omega_p: 0.0,
            omega_c: 0.0,
            omega_a: 0.0,
        };
        assert!(reduce_params(&raw, 1.0).is_err());
        raw.kappa = 1.0;
        raw.gamma = 0.0;
        assert!(reduce_params(&raw, 1.0).is_err());
        raw.gamma = 1.0;
        raw.kappa_r = 1.5;
        assert!(reduce_params(&raw, 1.0).is_err());
    }

    #[test]
    fn params_reject_out_of_range() {
        assert!(CavityParams::new(-1.0, 0.0, 0.0, 1.0, 1.0).is_err());
        assert!(CavityParams::new(1.0, f64::NAN, 0.0, 1.0, 1.0).is_err());
        assert!(CavityParams::new(1.0, 0.0, f64::INFINITY, 1.0, 1.0).is_err());
        assert!(CavityParams::new(1.0, 0.0, 0.0, 1.01, 1.0).is_err());
        assert!(CavityParams::new(1.0, 0.0, 0.0, 1.0, -0.1).is_err());
        assert!(CavityParams::new(0.0, 0.0, 0.0, 0.0, 0.0).is_ok());
    }

    #[test]
    fn strong_coupling_limit() {
        let r = reflection_lossy(&CavityParams::ideal());
        assert_abs_diff_eq!(r.r_c.re, 1.0, epsilon = 1e-8);
        assert_abs_diff_eq!(r.r_c.im, 0.0, epsilon = 1e-8);
        assert_eq!(r.r_nc, c(-1.0, 0.0));
    }

    #[test]
    fn empty_cavity_reflects_like_uncoupled() {
        let r = reflection_lossy(&CavityParams::resonant(0.0));
        assert_abs_diff_eq!(r.r_c.re, -1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(r.r_c.im, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn lossy_operating_point() {
        // 1 - 2*0.916/9 and 1 - 2*0.916
        let p = CavityParams::new(4.0, 0.0, 0.0, 0.916, 1.0).unwrap();
        let r = reflection_lossy(&p);
        assert_abs_diff_eq!(r.r_c.re, 1.0 - 1.832 / 9.0, epsilon = 1e-14);
        assert_abs_diff_eq!(r.r_c.re, 0.79644, epsilon = 1e-5);
        assert_abs_diff_eq!(r.r_nc.re, -0.832, epsilon = 1e-14);
        assert_abs_diff_eq!(r.t_c_sq, 1.0 - r.r_c.norm_sqr(), epsilon = 0.0);
    }

    #[test]
    fn lossless_examples() {
        let r = reflection_lossless(0.0, 0.0, 0.0);
        assert_eq!(r.r_c, c(-1.0, 0.0));
        assert_eq!(r.r_nc, c(-1.0, 0.0));

        let r = reflection_lossless(1e9, 0.0, 0.0);
        assert_abs_diff_eq!(r.r_nc.re, 1.0, epsilon = 1e-9);

        let r = reflection_lossless(0.0, 0.0, 1.0);
        assert_abs_diff_eq!(r.r_c.re, 1.0 / 3.0, epsilon = 1e-15);
        assert_eq!(r.r_nc, c(-1.0, 0.0));
    }

    #[test]
    fn resonant_uncoupled_value_is_exact() {
        for kr in [0.0, 0.25, 0.5, 0.916, 1.0] {
            let p = CavityParams::new(2.0, 0.0, 0.3, kr, 1.0).unwrap();
            assert_eq!(reflection_lossy(&p).r_nc, c(1.0 - 2.0 * kr, 0.0));
        }
    }

    fn operating_point() -> impl Strategy<Value = CavityParams> {
        (0.0..50.0f64, -5.0..5.0f64, -5.0..5.0f64, 0.0..=1.0f64).prop_map(|(c, dc, da, kr)| {
            CavityParams {
                cooperativity: c,
                delta_c: dc,
                delta_a: da,
                kappa_ratio: kr,
                zeta: 1.0,
            }
        })
    }

    proptest! {
        #[test]
        fn lossless_matches_lossy_at_unit_ratio(p in operating_point()) {
            let lossy = reflection_lossy(&p.with_kappa_ratio(1.0));
            let lossless = reflection_lossless(p.delta_c, p.delta_a, p.cooperativity);
            prop_assert!((lossy.r_c - lossless.r_c).norm() < 1e-12);
            prop_assert!((lossy.r_nc - lossless.r_nc).norm() < 1e-12);
        }

        #[test]
        fn reflections_are_passive(p in operating_point()) {
            let r = reflection_lossy(&p);
            prop_assert!(r.r_c.norm() <= 1.0 + 1e-12);
            prop_assert!(r.r_nc.norm() <= 1.0 + 1e-12);
            prop_assert!(r.t_c_sq >= -1e-12 && r.t_nc_sq >= -1e-12);
        }

        #[test]
        fn detuning_reversal_conjugates(p in operating_point()) {
            let fwd = reflection_lossy(&p);
            let rev = reflection_lossy(&p.with_detunings(-p.delta_c, -p.delta_a));
            prop_assert!((fwd.r_c - rev.r_c.conj()).norm() < 1e-14);
            prop_assert!((fwd.r_nc - rev.r_nc.conj()).norm() < 1e-14);
        }
    }
}
