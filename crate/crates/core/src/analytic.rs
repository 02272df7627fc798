//! Closed-form fidelity and success probability of the atom–photon CZ gate.
//!
//! Two gate layouts are modeled:
//!
//! * [`Scheme::New`]: the photon is split by polarization in a Mach–Zehnder
//!   interferometer. `|V⟩ = |0⟩ᵖ` bypasses the cavity, `|H⟩ = |1⟩ᵖ` scatters off
//!   a cavity holding an atom with degenerate, symmetric `σ±` transitions.
//!   Components whose polarization fails to flip leave through the input port
//!   and are never detected, so most errors become loss instead of infidelity.
//! * [`Scheme::Old`]: the whole photon (`|σ−⟩ = |0⟩ᵖ`, `|σ+⟩ = |1⟩ᵖ`) reflects
//!   off a cavity whose atom couples only `|1⟩ᵃ` to `σ+`.
//!
//! The mismatched spatial-mode fraction `1 − ζ` reflects unchanged. Fidelity
//! is the overlap with the ideal gate output traced over the matched and
//! mismatched spatial modes, conditioned on the photon being detected.

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::cavity::{reflection_lossy, CavityParams};
use crate::error::{Error, Result};
use crate::quadrature::{adaptive, bloch_rule};

/// Heralding probabilities below this are treated as "photon never detected".
pub const NO_HERALD_THRESHOLD: f64 = 1e-12;

const NORM_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    New,
    Old,
}

impl Scheme {
    pub const ALL: [Scheme; 2] = [Scheme::New, Scheme::Old];

    pub fn as_str(self) -> &'static str {
        match self {
            Scheme::New => "new",
            Scheme::Old => "old",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "new" => Ok(Scheme::New),
            "old" => Ok(Scheme::Old),
            other => Err(Error::Config(format!(
                "unknown scheme `{other}` (expected new|old)"
            ))),
        }
    }
}

/// Initial photon ⊗ atom product state.
///
/// `alpha_p` multiplies the photonic `|0⟩ᵖ` (`|V⟩` in the new scheme, `|σ−⟩` in
/// the old one) and `beta_p` the photonic `|1⟩ᵖ` (`|H⟩` / `|σ+⟩`). `alpha` and
/// `beta` are the atomic `|0⟩ᵃ` and `|1⟩ᵃ` amplitudes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JointState {
    pub alpha_p: Complex64,
    pub beta_p: Complex64,
    pub alpha: Complex64,
    pub beta: Complex64,
}

impl JointState {
    pub fn new(
        alpha_p: Complex64,
        beta_p: Complex64,
        alpha: Complex64,
        beta: Complex64,
    ) -> Result<Self> {
        let s = JointState {
            alpha_p,
            beta_p,
            alpha,
            beta,
        };
        s.validate()?;
        Ok(s)
    }

    /// Rescales each qubit to unit norm.
    pub fn normalized(
        alpha_p: Complex64,
        beta_p: Complex64,
        alpha: Complex64,
        beta: Complex64,
    ) -> Result<Self> {
        let np = (alpha_p.norm_sqr() + beta_p.norm_sqr()).sqrt();
        let na = (alpha.norm_sqr() + beta.norm_sqr()).sqrt();
        if !(np.is_finite() && na.is_finite()) || np == 0.0 || na == 0.0 {
            return Err(Error::InvalidState(
                "qubit amplitudes must not all vanish".into(),
            ));
        }
        Self::new(alpha_p / np, beta_p / np, alpha / na, beta / na)
    }

    /// Both qubits in `(|0⟩ + |1⟩)/√2`.
    pub fn equal_superposition() -> Self {
        let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
        JointState {
            alpha_p: h,
            beta_p: h,
            alpha: h,
            beta: h,
        }
    }

    /// `cos(θ/2) e^{iΦ}|0⟩ + sin(θ/2)|1⟩` for each qubit.
    pub fn from_bloch(photon_theta: f64, photon_phi: f64, atom_theta: f64, atom_phi: f64) -> Self {
        JointState {
            alpha_p: Complex64::from_polar((photon_theta / 2.0).cos(), photon_phi),
            beta_p: Complex64::new((photon_theta / 2.0).sin(), 0.0),
            alpha: Complex64::from_polar((atom_theta / 2.0).cos(), atom_phi),
            beta: Complex64::new((atom_theta / 2.0).sin(), 0.0),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let photon = self.alpha_p.norm_sqr() + self.beta_p.norm_sqr();
        let atom = self.alpha.norm_sqr() + self.beta.norm_sqr();
        if !photon.is_finite() || (photon - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::InvalidState(format!(
                "photon norm² = {photon}, expected 1"
            )));
        }
        if !atom.is_finite() || (atom - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::InvalidState(format!(
                "atom norm² = {atom}, expected 1"
            )));
        }
        Ok(())
    }

    /// Ideal CZ output as `[photon][atom]` amplitudes: only `|1⟩ᵖ|1⟩ᵃ` flips sign.
    pub fn ideal_cz(&self) -> [[Complex64; 2]; 2] {
        [
            [self.alpha_p * self.alpha, self.alpha_p * self.beta],
            [self.beta_p * self.alpha, -self.beta_p * self.beta],
        ]
    }
}

/// Figures of merit for one gate evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GateResult {
    pub fidelity: f64,
    pub success_probability: f64,
    /// Probability of losing the photon to cavity leakage, spontaneous
    /// emission, scattering or a deliberate attenuator.
    pub p_loss: f64,
    /// Probability, given the photon was not lost, that it left through the
    /// rejection port because its polarization did not flip. Always 0 in the
    /// old scheme.
    pub p_h_reject: f64,
}

/// Normalized heralded output, `[photon][atom]` amplitudes per spatial mode.
/// Photon index 0 is `|0⟩ᵖ` (`V` or `σ−`), index 1 is `|1⟩ᵖ` (`H` or `σ+`).
/// The mismatched component is reported with mismatch phase `θ = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OutputState {
    pub matched: [[Complex64; 2]; 2],
    pub mismatched: [[Complex64; 2]; 2],
}

impl OutputState {
    /// `Σ_mode |⟨target, mode|ψ⟩|²`.
    pub fn fidelity_with(&self, target: &[[Complex64; 2]; 2]) -> f64 {
        let overlap = |amps: &[[Complex64; 2]; 2]| -> Complex64 {
            let mut acc = Complex64::new(0.0, 0.0);
            for (t_row, a_row) in target.iter().zip(amps) {
                for (t, a) in t_row.iter().zip(a_row) {
                    acc += t.conj() * a;
                }
            }
            acc
        };
        overlap(&self.matched).norm_sqr() + overlap(&self.mismatched).norm_sqr()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.matched
            .iter()
            .chain(&self.mismatched)
            .flatten()
            .map(|a| a.norm_sqr())
            .sum()
    }
}

fn clamp_unit(x: f64) -> f64 {
    x.clamp(0.0, 1.0)
}

fn validate_inputs(p: &CavityParams, s: &JointState) -> Result<()> {
    p.validate()?;
    s.validate()
}

/// Intermediate quantities shared by [`cz_new`] and its output-state variant.
struct NewGate {
    p_loss: f64,
    p_h_reject: f64,
    success: f64,
    /// `(r_c − r_nc)/2`
    flip: Complex64,
}

fn new_gate(p: &CavityParams, s: &JointState, attenuation: f64) -> Result<NewGate> {
    validate_inputs(p, s)?;
    if !(0.0..=1.0).contains(&attenuation) {
        return Err(Error::param(
            "attenuation",
            attenuation,
            "must lie in [0, 1]",
        ));
    }
    let refl = reflection_lossy(p);
    let a2 = s.alpha_p.norm_sqr();
    let b2 = s.beta_p.norm_sqr();
    let z = p.zeta;

    let p_cavity = z * b2 / 2.0 * (refl.t_c_sq + refl.t_nc_sq);
    let p_attenuator = a2 * (1.0 - attenuation * attenuation);
    let p_loss = p_cavity + p_attenuator;
    let unflipped = (1.0 - z) * b2 + z * b2 / 4.0 * (refl.r_c + refl.r_nc).norm_sqr();
    let survive = 1.0 - p_loss;
    let p_h_reject = if survive > NO_HERALD_THRESHOLD {
        unflipped / survive
    } else {
        0.0
    };
    let success = survive * (1.0 - p_h_reject);
    if success < NO_HERALD_THRESHOLD {
        return Err(Error::NoHerald {
            success_probability: success.max(0.0),
            p_loss: clamp_unit(p_loss),
            p_reject: clamp_unit(p_h_reject),
        });
    }
    Ok(NewGate {
        p_loss: clamp_unit(p_loss),
        p_h_reject: clamp_unit(p_h_reject),
        success,
        flip: refl.flip_amplitude(),
    })
}

/// New-scheme CZ with MZI arm phase `phi` (applied to the bypass arm).
pub fn cz_new(p: &CavityParams, s: &JointState, phi: f64) -> Result<GateResult> {
    cz_new_attenuated(p, s, phi, 1.0)
}

/// New-scheme CZ with an amplitude attenuator `attenuation ∈ [0, 1]` in the
/// bypass (`|V⟩`) arm. Removed weight counts as loss.
pub fn cz_new_attenuated(
    p: &CavityParams,
    s: &JointState,
    phi: f64,
    attenuation: f64,
) -> Result<GateResult> {
    let g = new_gate(p, s, attenuation)?;
    let a2 = s.alpha_p.norm_sqr();
    let b2 = s.beta_p.norm_sqr();
    let z = p.zeta;
    let att2 = attenuation * attenuation;
    let matched = Complex64::from_polar(attenuation * a2, phi) + b2 * g.flip;
    let numerator = (1.0 - z) * att2 * a2 * a2 + z * matched.norm_sqr();
    Ok(GateResult {
        fidelity: clamp_unit(numerator / g.success),
        success_probability: clamp_unit(g.success),
        p_loss: g.p_loss,
        p_h_reject: g.p_h_reject,
    })
}

/// Normalized heralded output of the new scheme.
pub fn cz_new_output(
    p: &CavityParams,
    s: &JointState,
    phi: f64,
    attenuation: f64,
) -> Result<OutputState> {
    let g = new_gate(p, s, attenuation)?;
    let norm = g.success.sqrt();
    let z = p.zeta;
    let v_mat = Complex64::from_polar(attenuation * z.sqrt(), phi) * s.alpha_p / norm;
    let h_mat = z.sqrt() * g.flip * s.beta_p / norm;
    let v_mis = attenuation * (1.0 - z).sqrt() * s.alpha_p / norm;
    let zero = Complex64::new(0.0, 0.0);
    Ok(OutputState {
        matched: [
            [v_mat * s.alpha, v_mat * s.beta],
            [h_mat * s.alpha, -h_mat * s.beta],
        ],
        mismatched: [[v_mis * s.alpha, v_mis * s.beta], [zero, zero]],
    })
}

/// Old-scheme CZ (single reflection, `σ+ ↔ |1⟩ᵃ` coupling only).
pub fn cz_old(p: &CavityParams, s: &JointState) -> Result<GateResult> {
    validate_inputs(p, s)?;
    let refl = reflection_lossy(p);
    let a2p = s.alpha_p.norm_sqr();
    let b2p = s.beta_p.norm_sqr();
    let a2 = s.alpha.norm_sqr();
    let b2 = s.beta.norm_sqr();
    let z = p.zeta;

    let coupled = (s.beta_p * s.beta).norm_sqr();
    let p_loss = z * (refl.t_nc_sq + coupled * (refl.t_c_sq - refl.t_nc_sq));
    let success = 1.0 - p_loss;
    if success < NO_HERALD_THRESHOLD {
        return Err(Error::NoHerald {
            success_probability: success.max(0.0),
            p_loss: clamp_unit(p_loss),
            p_reject: 0.0,
        });
    }
    let mismatched = a2p + b2p * (a2 - b2);
    let matched = a2p * refl.r_nc + b2p * (refl.r_nc * a2 - refl.r_c * b2);
    let numerator = (1.0 - z) * mismatched * mismatched + z * matched.norm_sqr();
    Ok(GateResult {
        fidelity: clamp_unit(numerator / success),
        success_probability: clamp_unit(success),
        p_loss: clamp_unit(p_loss),
        p_h_reject: 0.0,
    })
}

/// Normalized heralded output of the old scheme in the `(σ−, σ+)` basis.
pub fn cz_old_output(p: &CavityParams, s: &JointState) -> Result<OutputState> {
    let g = cz_old(p, s)?;
    let refl = reflection_lossy(p);
    let norm = g.success_probability.sqrt();
    let m = p.zeta.sqrt() / norm;
    let u = (1.0 - p.zeta).sqrt() / norm;
    Ok(OutputState {
        matched: [
            [
                m * s.alpha_p * refl.r_nc * s.alpha,
                m * s.alpha_p * refl.r_nc * s.beta,
            ],
            [
                m * s.beta_p * refl.r_nc * s.alpha,
                m * s.beta_p * refl.r_c * s.beta,
            ],
        ],
        mismatched: [
            [u * s.alpha_p * s.alpha, u * s.alpha_p * s.beta],
            [u * s.beta_p * s.alpha, u * s.beta_p * s.beta],
        ],
    })
}

/// Dispatches on scheme; `phi` is ignored by the old scheme.
pub fn cz(scheme: Scheme, p: &CavityParams, s: &JointState, phi: f64) -> Result<GateResult> {
    match scheme {
        Scheme::New => cz_new(p, s, phi),
        Scheme::Old => cz_old(p, s),
    }
}

/// Bloch-sphere averages of fidelity and success probability.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlochAverage {
    pub fidelity: f64,
    pub success_probability: f64,
    /// Quadrature order (points per dimension) at convergence.
    pub order: usize,
    /// Quadrature nodes whose photon is never heralded. They are excluded
    /// from the fidelity average and contribute zero success probability.
    pub no_herald_nodes: usize,
}

const NEW_START_ORDER: usize = 8;
const NEW_MAX_ORDER: usize = 512;
const OLD_START_ORDER: usize = 4;
const OLD_MAX_ORDER: usize = 64;

/// Averages over initial product states with adaptive tensor-product
/// Gauss–Legendre quadrature.
///
/// The new-scheme figures of merit do not depend on the atomic state, so only
/// the photon sphere is integrated. The old scheme integrates both spheres.
pub fn bloch_average(p: &CavityParams, scheme: Scheme, phi: f64) -> Result<BlochAverage> {
    p.validate()?;
    let mut skipped = 0;
    let mut failure = None;
    let converged = match scheme {
        Scheme::New => adaptive(NEW_START_ORDER, NEW_MAX_ORDER, |n| {
            let mut f_sum = 0.0;
            let mut f_weight = 0.0;
            let mut p_sum = 0.0;
            skipped = 0;
            for node in bloch_rule(n, n) {
                let s = JointState {
                    alpha_p: node.first,
                    beta_p: node.second,
                    alpha: Complex64::new(1.0, 0.0),
                    beta: Complex64::new(0.0, 0.0),
                };
                accumulate(
                    cz_new(p, &s, phi),
                    node.weight,
                    &mut f_sum,
                    &mut f_weight,
                    &mut p_sum,
                    &mut skipped,
                    &mut failure,
                );
            }
            [ratio(f_sum, f_weight), p_sum]
        }),
        Scheme::Old => adaptive(OLD_START_ORDER, OLD_MAX_ORDER, |n| {
            let rule = bloch_rule(n, n);
            let mut f_sum = 0.0;
            let mut f_weight = 0.0;
            let mut p_sum = 0.0;
            skipped = 0;
            for photon in &rule {
                for atom in &rule {
                    let s = JointState {
                        alpha_p: photon.first,
                        beta_p: photon.second,
                        alpha: atom.first,
                        beta: atom.second,
                    };
                    let w = photon.weight * atom.weight;
                    accumulate(
                        cz_old(p, &s),
                        w,
                        &mut f_sum,
                        &mut f_weight,
                        &mut p_sum,
                        &mut skipped,
                        &mut failure,
                    );
                }
            }
            [ratio(f_sum, f_weight), p_sum]
        }),
    };
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(BlochAverage {
        fidelity: clamp_unit(converged.value[0]),
        success_probability: clamp_unit(converged.value[1]),
        order: converged.order,
        no_herald_nodes: skipped,
    })
}

fn ratio(num: f64, den: f64) -> f64 {
    if den > 0.0 {
        num / den
    } else {
        f64::NAN
    }
}

fn accumulate(
    r: Result<GateResult>,
    w: f64,
    f_sum: &mut f64,
    f_weight: &mut f64,
    p_sum: &mut f64,
    skipped: &mut usize,
    failure: &mut Option<Error>,
) {
    match r {
        Ok(g) => {
            *f_sum += w * g.fidelity;
            *f_weight += w;
            *p_sum += w * g.success_probability;
        }
        Err(Error::NoHerald { .. }) => *skipped += 1,
        Err(e) => {
            failure.get_or_insert(e);
        }
    }
}

/// Photon-Bloch-sphere average of the new-scheme fidelity.
pub fn avg_fidelity_new(p: &CavityParams, phi: f64) -> Result<f64> {
    Ok(bloch_average(p, Scheme::New, phi)?.fidelity)
}

/// Photon ⊗ atom Bloch-sphere average of the old-scheme fidelity.
pub fn avg_fidelity_old(p: &CavityParams) -> Result<f64> {
    Ok(bloch_average(p, Scheme::Old, 0.0)?.fidelity)
}

pub fn avg_success(p: &CavityParams, scheme: Scheme) -> Result<f64> {
    Ok(bloch_average(p, scheme, 0.0)?.success_probability)
}
