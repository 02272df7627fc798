//! Brute-force single-photon state-vector simulation of the optical networks.
//!
//! The state is a dense amplitude vector over
//! `(path, polarization ∈ {H, V}, spatial mode ∈ {matched, mismatched}, atomic register)`
//! plus a list of loss blocks. Every scattering event opens four loss channels
//! (one per atom-state/`σ±` combination) and every attenuator opens one; a
//! lost photon never re-enters the optical paths and distinct channels never
//! interfere. Fidelities are computed by projecting onto the detected paths
//! and tracing over path and spatial mode.
//!
//! Polarization conventions: `|σ±⟩ = (|H⟩ ± |V⟩)/√2`. The half-wave plate
//! swaps `H ↔ V`; the quarter-wave plate is the circular-to-linear converter
//! `(H, V) ↦ ((−H + V)/√2, (H + V)/√2)` used before the Bell-state heralds.
//! The PBS transmits/reflects without extra phase; only phase-invariant
//! quantities are compared with the closed forms.

use std::f64::consts::FRAC_1_SQRT_2;
use std::str::FromStr;

use num_complex::Complex64;
use serde::Serialize;

use crate::analytic::{GateResult, JointState, NO_HERALD_THRESHOLD};
use crate::cavity::{reflection_lossy, CavityParams, ReflectionPair};
use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

pub const MATCHED: usize = 0;
pub const MISMATCHED: usize = 1;

/// Linear polarization index: `H = 0`, `V = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pol {
    H = 0,
    V = 1,
}

/// Jones vector in the `(H, V)` basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jones(pub [Complex64; 2]);

impl Jones {
    pub const H: Jones = Jones([ONE, ZERO]);
    pub const V: Jones = Jones([ZERO, ONE]);
    pub const SIGMA_PLUS: Jones = Jones([
        Complex64::new(FRAC_1_SQRT_2, 0.0),
        Complex64::new(FRAC_1_SQRT_2, 0.0),
    ]);
    pub const SIGMA_MINUS: Jones = Jones([
        Complex64::new(FRAC_1_SQRT_2, 0.0),
        Complex64::new(-FRAC_1_SQRT_2, 0.0),
    ]);

    pub fn norm_sqr(&self) -> f64 {
        self.0[0].norm_sqr() + self.0[1].norm_sqr()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Waveplate {
    Half,
    Quarter,
}

impl Waveplate {
    /// Matrix acting on `(H, V)` amplitudes, row-major.
    pub fn matrix(self) -> [[Complex64; 2]; 2] {
        let s = Complex64::new(FRAC_1_SQRT_2, 0.0);
        match self {
            Waveplate::Half => [[ZERO, ONE], [ONE, ZERO]],
            Waveplate::Quarter => [[-s, s], [s, s]],
        }
    }
}

impl FromStr for Waveplate {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "hwp" | "half" => Ok(Waveplate::Half),
            "qwp" | "quarter" => Ok(Waveplate::Quarter),
            other => Err(Error::Config(format!("unknown waveplate kind `{other}`"))),
        }
    }
}

/// Which photon–atom configurations see the coupled reflection `r_c`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Coupling {
    /// Degenerate symmetric levels: `σ+ ↔ |0⟩ᵃ` and `σ− ↔ |1⟩ᵃ` are coupled.
    Symmetric,
    /// Three-level scheme: only `σ+ ↔ |1⟩ᵃ` is coupled.
    Lambda,
}

impl Coupling {
    fn is_coupled(self, sigma_plus: bool, atom_bit: usize) -> bool {
        match self {
            Coupling::Symmetric => (sigma_plus && atom_bit == 0) || (!sigma_plus && atom_bit == 1),
            Coupling::Lambda => sigma_plus && atom_bit == 1,
        }
    }
}

/// Split of the incoming photon into the cavity-matched and mismatched
/// spatial modes: `√ζ |mat⟩ + √(1−ζ) e^{iθ} |mis⟩`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeSplit {
    pub zeta: f64,
    pub theta: f64,
}

impl ModeSplit {
    pub fn matched() -> Self {
        ModeSplit {
            zeta: 1.0,
            theta: 0.0,
        }
    }

    fn amplitudes(&self) -> [Complex64; 2] {
        [
            Complex64::new(self.zeta.sqrt(), 0.0),
            Complex64::from_polar((1.0 - self.zeta).sqrt(), self.theta),
        ]
    }
}

#[derive(Debug, Clone)]
struct LossBlock {
    label: String,
    amps: Vec<Complex64>,
}

#[derive(Debug, Clone)]
pub struct NetworkState {
    paths: Vec<String>,
    n_atoms: usize,
    optical: Vec<Complex64>,
    losses: Vec<LossBlock>,
    discarded: f64,
    scatter_events: usize,
}

impl NetworkState {
    /// Places a single photon with polarization `photon` on `path`, in product
    /// with the given atomic qubits (atom 0 is the most significant register bit).
    pub fn prepare(
        paths: &[&str],
        path: &str,
        photon: Jones,
        atoms: &[[Complex64; 2]],
        split: ModeSplit,
    ) -> Result<Self> {
        if atoms.is_empty() || atoms.len() > 8 {
            return Err(Error::InvalidState(format!(
                "{} atoms; expected 1..=8",
                atoms.len()
            )));
        }
        for (i, name) in paths.iter().enumerate() {
            if paths[..i].contains(name) {
                return Err(Error::DuplicatePath((*name).to_string()));
            }
        }
        if (photon.norm_sqr() - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidState(format!(
                "photon norm² = {}",
                photon.norm_sqr()
            )));
        }
        for a in atoms {
            let n = a[0].norm_sqr() + a[1].norm_sqr();
            if (n - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidState(format!("atom norm² = {n}")));
            }
        }
        if !(0.0..=1.0).contains(&split.zeta) {
            return Err(Error::param("zeta", split.zeta, "must lie in [0, 1]"));
        }
        let mut state = NetworkState {
            paths: paths.iter().map(|s| s.to_string()).collect(),
            n_atoms: atoms.len(),
            optical: vec![ZERO; (paths.len() * 4) << atoms.len()],
            losses: Vec::new(),
            discarded: 0.0,
            scatter_events: 0,
        };
        let p = state.path(path)?;
        let modes = split.amplitudes();
        for reg in 0..state.reg_dim() {
            let mut atom_amp = ONE;
            for (k, a) in atoms.iter().enumerate() {
                atom_amp *= a[state.bit(reg, k)];
            }
            for pol in 0..2 {
                for (spatial, m) in modes.iter().enumerate() {
                    let i = state.idx(p, pol, spatial, reg);
                    state.optical[i] = photon.0[pol] * *m * atom_amp;
                }
            }
        }
        Ok(state)
    }

    fn reg_dim(&self) -> usize {
        1 << self.n_atoms
    }

    fn bit(&self, reg: usize, atom: usize) -> usize {
        (reg >> (self.n_atoms - 1 - atom)) & 1
    }

    fn idx(&self, path: usize, pol: usize, spatial: usize, reg: usize) -> usize {
        ((path * 2 + pol) * 2 + spatial) * self.reg_dim() + reg
    }

    fn path(&self, name: &str) -> Result<usize> {
        self.paths
            .iter()
            .position(|p| p == name)
            .ok_or_else(|| Error::UnknownPath(name.to_string()))
    }

    pub fn n_atoms(&self) -> usize {
        self.n_atoms
    }

    /// Polarizing beam splitter: the `H` amplitude on `in_path` moves to
    /// `h_path`, the `V` amplitude to `v_path`. Passing `in_path` as an output
    /// keeps that polarization in place. Output slots must be empty, so the
    /// element is a permutation of basis states.
    pub fn apply_pbs(mut self, in_path: &str, h_path: &str, v_path: &str) -> Result<Self> {
        let src = self.path(in_path)?;
        let dst = [self.path(h_path)?, self.path(v_path)?];
        let n = self.reg_dim();
        let mut moved = [vec![ZERO; 2 * n], vec![ZERO; 2 * n]];
        for (pol, buf) in moved.iter_mut().enumerate() {
            for spatial in 0..2 {
                for reg in 0..n {
                    let i = self.idx(src, pol, spatial, reg);
                    buf[spatial * n + reg] = std::mem::replace(&mut self.optical[i], ZERO);
                }
            }
        }
        for (pol, buf) in moved.iter().enumerate() {
            for spatial in 0..2 {
                for reg in 0..n {
                    let i = self.idx(dst[pol], pol, spatial, reg);
                    if self.optical[i] != ZERO {
                        return Err(Error::PortOccupied {
                            path: self.paths[dst[pol]].clone(),
                            polarization: if pol == 0 { "H" } else { "V" },
                        });
                    }
                    self.optical[i] = buf[spatial * n + reg];
                }
            }
        }
        Ok(self)
    }

    pub fn apply_waveplate(self, path: &str, kind: Waveplate) -> Result<Self> {
        self.apply_polarization_matrix(path, kind.matrix())
    }

    fn apply_polarization_matrix(mut self, path: &str, m: [[Complex64; 2]; 2]) -> Result<Self> {
        let p = self.path(path)?;
        for spatial in 0..2 {
            for reg in 0..self.reg_dim() {
                let ih = self.idx(p, 0, spatial, reg);
                let iv = self.idx(p, 1, spatial, reg);
                let (h, v) = (self.optical[ih], self.optical[iv]);
                self.optical[ih] = m[0][0] * h + m[0][1] * v;
                self.optical[iv] = m[1][0] * h + m[1][1] * v;
            }
        }
        Ok(self)
    }

    /// Common optical phase `e^{iφ}` on every amplitude in `path`.
    pub fn apply_phase(mut self, path: &str, phi: f64) -> Result<Self> {
        let p = self.path(path)?;
        let f = Complex64::from_polar(1.0, phi);
        for pol in 0..2 {
            for spatial in 0..2 {
                for reg in 0..self.reg_dim() {
                    let i = self.idx(p, pol, spatial, reg);
                    self.optical[i] *= f;
                }
            }
        }
        Ok(self)
    }

    /// Amplitude transmission `t` on `path`; the reflected `√(1 − t²)` part
    /// goes to a fresh loss channel.
    pub fn apply_attenuator(mut self, path: &str, t: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::param("attenuation", t, "must lie in [0, 1]"));
        }
        let p = self.path(path)?;
        let leak = (1.0 - t * t).sqrt();
        let n = self.reg_dim();
        let mut amps = vec![ZERO; 4 * n];
        for pol in 0..2 {
            for spatial in 0..2 {
                for reg in 0..n {
                    let i = self.idx(p, pol, spatial, reg);
                    amps[(pol * 2 + spatial) * n + reg] = leak * self.optical[i];
                    self.optical[i] *= t;
                }
            }
        }
        self.losses.push(LossBlock {
            label: format!("attenuator:{path}"),
            amps,
        });
        Ok(self)
    }

    /// Cavity reflection of the matched mode on `path` with atom `atom`.
    /// Each `(atom state, σ±)` pair reflects with `r_c` or `r_nc` and leaks
    /// `t = √(1 − |r|²)` into its own loss channel. The mismatched mode
    /// reflects unchanged.
    pub fn apply_scattering(
        mut self,
        path: &str,
        refl: &ReflectionPair,
        atom: usize,
        coupling: Coupling,
    ) -> Result<Self> {
        if atom >= self.n_atoms {
            return Err(Error::InvalidState(format!(
                "atom index {atom} out of range"
            )));
        }
        let p = self.path(path)?;
        let n = self.reg_dim();
        self.scatter_events += 1;
        // L: (0, σ+), L': (1, σ−), L'': (0, σ−), L''': (1, σ+)
        let channel = |bit: usize, plus: bool| match (bit, plus) {
            (0, true) => 0,
            (1, false) => 1,
            (0, false) => 2,
            _ => 3,
        };
        let mut lost = vec![ZERO; 4 * n];
        let s = FRAC_1_SQRT_2;
        for reg in 0..n {
            let bit = self.bit(reg, atom);
            let ih = self.idx(p, 0, MATCHED, reg);
            let iv = self.idx(p, 1, MATCHED, reg);
            let (h, v) = (self.optical[ih], self.optical[iv]);
            let plus = (h + v) * s;
            let minus = (h - v) * s;
            let (r_plus, t_plus) = if coupling.is_coupled(true, bit) {
                (refl.r_c, refl.t_c())
            } else {
                (refl.r_nc, refl.t_nc())
            };
            let (r_minus, t_minus) = if coupling.is_coupled(false, bit) {
                (refl.r_c, refl.t_c())
            } else {
                (refl.r_nc, refl.t_nc())
            };
            lost[channel(bit, true) * n + reg] = t_plus * plus;
            lost[channel(bit, false) * n + reg] = t_minus * minus;
            let plus = r_plus * plus;
            let minus = r_minus * minus;
            self.optical[ih] = (plus + minus) * s;
            self.optical[iv] = (plus - minus) * s;
        }
        let event = self.scatter_events;
        for (k, amps) in lost.chunks(n).enumerate() {
            self.losses.push(LossBlock {
                label: format!("scatter{event}:{path}:L{}", "'".repeat(k)),
                amps: amps.to_vec(),
            });
        }
        Ok(self)
    }

    /// Removes everything on `path` from the optical state, adding its
    /// probability to the discarded total.
    pub fn discard_path(mut self, path: &str) -> Result<Self> {
        let p = self.path(path)?;
        let n = self.reg_dim();
        for pol in 0..2 {
            for spatial in 0..2 {
                for reg in 0..n {
                    let i = self.idx(p, pol, spatial, reg);
                    self.discarded += self.optical[i].norm_sqr();
                    self.optical[i] = ZERO;
                }
            }
        }
        Ok(self)
    }

    pub fn optical_norm_sqr(&self) -> f64 {
        self.optical.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn loss_probability(&self) -> f64 {
        self.losses
            .iter()
            .flat_map(|b| b.amps.iter())
            .map(|a| a.norm_sqr())
            .sum()
    }

    /// Per-channel loss probabilities with their labels.
    pub fn loss_channels(&self) -> Vec<(String, f64)> {
        self.losses
            .iter()
            .map(|b| (b.label.clone(), b.amps.iter().map(|a| a.norm_sqr()).sum()))
            .collect()
    }

    pub fn discarded(&self) -> f64 {
        self.discarded
    }

    /// Optical norm² + loss + discarded; equals one for a valid network.
    pub fn total_probability(&self) -> f64 {
        self.optical_norm_sqr() + self.loss_probability() + self.discarded
    }

    pub fn path_probability(&self, path: &str) -> Result<f64> {
        let p = self.path(path)?;
        let mut acc = 0.0;
        for pol in 0..2 {
            for spatial in 0..2 {
                for reg in 0..self.reg_dim() {
                    acc += self.optical[self.idx(p, pol, spatial, reg)].norm_sqr();
                }
            }
        }
        Ok(acc)
    }

    /// Conditions on the photon arriving in any of `detected` paths, with
    /// polarization unresolved. Internal index of the result is
    /// `pol * 2^atoms + register`.
    pub fn herald(&self, detected: &[&str]) -> Result<HeraldedState> {
        if detected.is_empty() {
            return Err(Error::Config(
                "herald needs at least one detected path".into(),
            ));
        }
        let n = self.reg_dim();
        let mut amps = Vec::with_capacity(detected.len() * 2 * 2 * n);
        for name in detected {
            let p = self.path(name)?;
            for spatial in 0..2 {
                for pol in 0..2 {
                    for reg in 0..n {
                        amps.push(self.optical[self.idx(p, pol, spatial, reg)]);
                    }
                }
            }
        }
        self.finish_herald(amps, detected.len() * 2, 2 * n)
    }

    /// Conditions on a click behind a polarizer selecting `jones` on `path`.
    /// Internal index of the result is the atomic register.
    pub fn herald_polarization(&self, path: &str, jones: Jones) -> Result<HeraldedState> {
        let p = self.path(path)?;
        let n = self.reg_dim();
        let mut amps = Vec::with_capacity(2 * n);
        for spatial in 0..2 {
            for reg in 0..n {
                let h = self.optical[self.idx(p, 0, spatial, reg)];
                let v = self.optical[self.idx(p, 1, spatial, reg)];
                amps.push(jones.0[0].conj() * h + jones.0[1].conj() * v);
            }
        }
        self.finish_herald(amps, 2, n)
    }

    fn finish_herald(
        &self,
        mut amps: Vec<Complex64>,
        modes: usize,
        internal: usize,
    ) -> Result<HeraldedState> {
        let probability: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if probability < NO_HERALD_THRESHOLD {
            let p_loss = self.loss_probability();
            let survive = 1.0 - p_loss;
            return Err(Error::NoHerald {
                success_probability: probability,
                p_loss,
                p_reject: if survive > 0.0 {
                    ((survive - probability) / survive).clamp(0.0, 1.0)
                } else {
                    0.0
                },
            });
        }
        let norm = probability.sqrt();
        amps.iter_mut().for_each(|a| *a /= norm);
        Ok(HeraldedState {
            probability,
            modes,
            internal,
            amplitudes: amps,
        })
    }
}

/// Normalized conditional state after a detector click.
///
/// Amplitudes are grouped into traced-out modes (detected path × spatial
/// mode, spatial fastest) of `internal` entries each.
#[derive(Debug, Clone, PartialEq)]
pub struct HeraldedState {
    pub probability: f64,
    modes: usize,
    internal: usize,
    amplitudes: Vec<Complex64>,
}

impl HeraldedState {
    pub fn mode_count(&self) -> usize {
        self.modes
    }

    pub fn internal_dim(&self) -> usize {
        self.internal
    }

    /// Amplitudes of traced mode `mode` (e.g. `MATCHED` of the first detected path).
    pub fn mode(&self, mode: usize) -> &[Complex64] {
        &self.amplitudes[mode * self.internal..(mode + 1) * self.internal]
    }

    /// `Σ_mode |⟨target|ψ_mode⟩|²` for a normalized internal-space target.
    pub fn fidelity(&self, target: &[Complex64]) -> Result<f64> {
        if target.len() != self.internal {
            return Err(Error::InvalidState(format!(
                "target has {} amplitudes, heralded state has {}",
                target.len(),
                self.internal
            )));
        }
        Ok((0..self.modes)
            .map(|m| {
                self.mode(m)
                    .iter()
                    .zip(target)
                    .map(|(a, t)| t.conj() * a)
                    .sum::<Complex64>()
                    .norm_sqr()
            })
            .sum())
    }
}

/// Total probability after each network element.
#[derive(Debug, Clone, Default, Serialize)]
pub struct Trace {
    pub steps: Vec<(String, f64)>,
}

impl Trace {
    fn record(&mut self, label: &str, state: &NetworkState) {
        self.steps
            .push((label.to_string(), state.total_probability()));
    }

    /// Largest `|total probability − 1|` over all recorded steps.
    pub fn max_deviation(&self) -> f64 {
        self.steps
            .iter()
            .map(|(_, p)| (p - 1.0).abs())
            .fold(0.0, f64::max)
    }
}

/// Oracle evaluation of a single atom–photon gate.
#[derive(Debug, Clone)]
pub struct OracleGate {
    pub result: GateResult,
    pub output: HeraldedState,
    pub trace: Trace,
}

fn node_paths(prefix: &str) -> [String; 7] {
    ["r1", "p2", "d1", "out", "reject", "dump_d1", "dump_p2"].map(|s| format!("{prefix}{s}"))
}

/// One MZI gate: input PBS, cavity arm `r1`, bypass arm `p2` (phase and
/// attenuator), HWP in the flipped-return arm `d1`, recombining PBS into `out`.
struct MziNode<'a> {
    prefix: &'a str,
    refl: ReflectionPair,
    atom: usize,
    phi: f64,
    attenuation: f64,
}

fn mzi_node(
    state: NetworkState,
    trace: &mut Trace,
    input: &str,
    node: &MziNode,
) -> Result<NetworkState> {
    let MziNode {
        prefix,
        refl,
        atom,
        phi,
        attenuation,
    } = *node;
    let refl = &refl;
    let [r1, p2, d1, out, reject, dump_d1, dump_p2] = node_paths(prefix);
    let s = state.apply_pbs(input, &r1, &p2)?;
    trace.record("pbs_in", &s);
    let s = s.apply_scattering(&r1, refl, atom, Coupling::Symmetric)?;
    trace.record("scatter", &s);
    // Unflipped light transmits back through the input PBS and leaves.
    let s = s.apply_pbs(&r1, &reject, &d1)?;
    trace.record("pbs_return", &s);
    let s = s.apply_waveplate(&d1, Waveplate::Half)?;
    trace.record("hwp", &s);
    let s = s.apply_phase(&p2, phi)?;
    trace.record("phase", &s);
    let s = if attenuation < 1.0 {
        s.apply_attenuator(&p2, attenuation)?
    } else {
        s
    };
    trace.record("attenuator", &s);
    let s = s.apply_pbs(&d1, &out, &dump_d1)?;
    let s = s.apply_pbs(&p2, &dump_p2, &out)?;
    trace.record("pbs_out", &s);
    Ok(s)
}

fn atom_vector(a: Complex64, b: Complex64) -> [Complex64; 2] {
    [a, b]
}

/// New-scheme CZ gate through the full interferometer.
pub fn cz_new_network(
    p: &CavityParams,
    s: &JointState,
    phi: f64,
    attenuation: f64,
    theta: f64,
) -> Result<OracleGate> {
    p.validate()?;
    s.validate()?;
    let names = node_paths("");
    let mut paths: Vec<&str> = vec!["in"];
    paths.extend(names.iter().map(String::as_str));
    // |V> = |0>p is alpha_p, |H> = |1>p is beta_p
    let photon = Jones([s.beta_p, s.alpha_p]);
    let split = ModeSplit {
        zeta: p.zeta,
        theta,
    };
    let state =
        NetworkState::prepare(&paths, "in", photon, &[atom_vector(s.alpha, s.beta)], split)?;
    let mut trace = Trace::default();
    trace.record("prepare", &state);
    let state = mzi_node(
        state,
        &mut trace,
        "in",
        &MziNode {
            prefix: "",
            refl: reflection_lossy(p),
            atom: 0,
            phi,
            attenuation,
        },
    )?;
    let output = state.herald(&["out"])?;
    let p_loss = state.loss_probability();
    let rejected = state.path_probability("reject")?
        + state.path_probability("dump_d1")?
        + state.path_probability("dump_p2")?;
    let ideal = s.ideal_cz();
    // internal index: pol * 2 + atom, pol 0 = H (|1>p), 1 = V (|0>p)
    let target = [ideal[1][0], ideal[1][1], ideal[0][0], ideal[0][1]];
    let fidelity = output.fidelity(&target)?;
    let result = GateResult {
        fidelity,
        success_probability: output.probability,
        p_loss,
        p_h_reject: if p_loss < 1.0 {
            rejected / (1.0 - p_loss)
        } else {
            0.0
        },
    };
    Ok(OracleGate {
        result,
        output,
        trace,
    })
}

/// Old-scheme CZ gate: the full photon reflects off the cavity once.
pub fn cz_old_network(p: &CavityParams, s: &JointState, theta: f64) -> Result<OracleGate> {
    p.validate()?;
    s.validate()?;
    // alpha_p on σ−, beta_p on σ+
    let sm = Jones::SIGMA_MINUS.0;
    let sp = Jones::SIGMA_PLUS.0;
    let photon = Jones([
        s.alpha_p * sm[0] + s.beta_p * sp[0],
        s.alpha_p * sm[1] + s.beta_p * sp[1],
    ]);
    let split = ModeSplit {
        zeta: p.zeta,
        theta,
    };
    let state = NetworkState::prepare(
        &["cav"],
        "cav",
        photon,
        &[atom_vector(s.alpha, s.beta)],
        split,
    )?;
    let mut trace = Trace::default();
    trace.record("prepare", &state);
    let state = state.apply_scattering("cav", &reflection_lossy(p), 0, Coupling::Lambda)?;
    trace.record("scatter", &state);
    let output = state.herald(&["cav"])?;
    let ideal = s.ideal_cz();
    let mut target = [ZERO; 4];
    for pol in 0..2 {
        for atom in 0..2 {
            target[pol * 2 + atom] = sm[pol] * ideal[0][atom] + sp[pol] * ideal[1][atom];
        }
    }
    let fidelity = output.fidelity(&target)?;
    let p_loss = state.loss_probability();
    Ok(OracleGate {
        result: GateResult {
            fidelity,
            success_probability: output.probability,
            p_loss,
            p_h_reject: 0.0,
        },
        output,
        trace,
    })
}

/// One polarization outcome of an atom–atom heralding chain.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BellHerald {
    pub detector: &'static str,
    pub target: &'static str,
    /// Unconditional probability of this click.
    pub probability: f64,
    pub fidelity: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ChainOutcome {
    pub heralds: Vec<BellHerald>,
    /// Probability that either detector clicks.
    pub success_probability: f64,
    pub trace: Trace,
}

impl ChainOutcome {
    /// Click-probability weighted mean fidelity.
    pub fn mean_fidelity(&self) -> f64 {
        let total: f64 = self.heralds.iter().map(|h| h.probability).sum();
        self.heralds
            .iter()
            .map(|h| h.probability * h.fidelity)
            .sum::<f64>()
            / total
    }
}

const PHI_PLUS: [Complex64; 4] = [
    Complex64::new(FRAC_1_SQRT_2, 0.0),
    ZERO,
    ZERO,
    Complex64::new(FRAC_1_SQRT_2, 0.0),
];
const PSI_PLUS: [Complex64; 4] = [
    ZERO,
    Complex64::new(FRAC_1_SQRT_2, 0.0),
    Complex64::new(FRAC_1_SQRT_2, 0.0),
    ZERO,
];

fn collect_heralds(
    state: &NetworkState,
    path: &str,
    detectors: [(&'static str, Jones, &'static str, [Complex64; 4]); 2],
) -> Result<Vec<BellHerald>> {
    let mut out = Vec::new();
    for (detector, jones, target, vector) in detectors {
        match state.herald_polarization(path, jones) {
            Ok(h) => out.push(BellHerald {
                detector,
                target,
                probability: h.probability,
                fidelity: h.fidelity(&vector)?,
            }),
            Err(Error::NoHerald { .. }) => {}
            Err(e) => return Err(e),
        }
    }
    if out.is_empty() {
        return Err(Error::NoHerald {
            success_probability: 0.0,
            p_loss: state.loss_probability(),
            p_reject: 1.0,
        });
    }
    Ok(out)
}

/// Remote entanglement with two MZI gates in series: a `σ+` photon meets
/// node 1 (atom in `|0⟩ₓ`), an HWP, node 2 (atom in `|1⟩ₓ`) and a QWP before
/// polarization detection. `V` heralds `|φ+⟩`, `H` heralds `|ψ+⟩`.
///
/// `zeta < 1` applies one common mode split to both cavities; the closed forms
/// only cover `zeta = 1`.
pub fn atom_atom_new_network(
    first: &CavityParams,
    second: &CavityParams,
    phi_1: f64,
    phi_2: f64,
    split: ModeSplit,
) -> Result<ChainOutcome> {
    first.validate()?;
    second.validate()?;
    let n1 = node_paths("n1.");
    let n2 = node_paths("n2.");
    let mut paths: Vec<&str> = vec!["in"];
    paths.extend(n1.iter().map(String::as_str));
    paths.extend(n2.iter().map(String::as_str));
    let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
    let plus = [h, h];
    let minus = [h, -h];
    let state = NetworkState::prepare(&paths, "in", Jones::SIGMA_PLUS, &[plus, minus], split)?;
    let mut trace = Trace::default();
    trace.record("prepare", &state);
    let state = mzi_node(
        state,
        &mut trace,
        "in",
        &MziNode {
            prefix: "n1.",
            refl: reflection_lossy(first),
            atom: 0,
            phi: phi_1,
            attenuation: 1.0,
        },
    )?;
    let state = state.apply_waveplate("n1.out", Waveplate::Half)?;
    trace.record("hwp_link", &state);
    let state = mzi_node(
        state,
        &mut trace,
        "n1.out",
        &MziNode {
            prefix: "n2.",
            refl: reflection_lossy(second),
            atom: 1,
            phi: phi_2,
            attenuation: 1.0,
        },
    )?;
    let state = state.apply_waveplate("n2.out", Waveplate::Quarter)?;
    trace.record("qwp", &state);
    let heralds = collect_heralds(
        &state,
        "n2.out",
        [
            ("V", Jones::V, "phi+", PHI_PLUS),
            ("H", Jones::H, "psi+", PSI_PLUS),
        ],
    )?;
    Ok(ChainOutcome {
        success_probability: heralds.iter().map(|h| h.probability).sum(),
        heralds,
        trace,
    })
}

/// Old-scheme remote entanglement: an `H` photon reflects off both cavities
/// (atoms in `|0⟩ₓ|0⟩ₓ`), passes the QWP and is detected in the circular
/// basis. `σ−` heralds `|φ+⟩`, `σ+` heralds `|ψ+⟩`.
pub fn atom_atom_old_network(
    first: &CavityParams,
    second: &CavityParams,
    split: ModeSplit,
) -> Result<ChainOutcome> {
    first.validate()?;
    second.validate()?;
    let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
    let plus = [h, h];
    let state = NetworkState::prepare(&["line"], "line", Jones::H, &[plus, plus], split)?;
    let mut trace = Trace::default();
    trace.record("prepare", &state);
    let state = state.apply_scattering("line", &reflection_lossy(first), 0, Coupling::Lambda)?;
    trace.record("scatter_1", &state);
    let state = state.apply_scattering("line", &reflection_lossy(second), 1, Coupling::Lambda)?;
    trace.record("scatter_2", &state);
    let state = state.apply_waveplate("line", Waveplate::Quarter)?;
    trace.record("qwp", &state);
    let heralds = collect_heralds(
        &state,
        "line",
        [
            ("sigma-", Jones::SIGMA_MINUS, "phi+", PHI_PLUS),
            ("sigma+", Jones::SIGMA_PLUS, "psi+", PSI_PLUS),
        ],
    )?;
    Ok(ChainOutcome {
        success_probability: heralds.iter().map(|h| h.probability).sum(),
        heralds,
        trace,
    })
}
