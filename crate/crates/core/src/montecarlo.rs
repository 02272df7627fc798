//! Gaussian-fluctuation Monte Carlo over cavity parameters and MZI phases,
//! and deterministic one-parameter sweeps of the Bloch-averaged gate.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::{bloch_average, Scheme};
use crate::cavity::CavityParams;
use crate::entangle::{atom_atom_new, atom_atom_old, TwoCavitySetup};
use crate::error::{Error, Result};

/// Gaussian model of cavity and phase fluctuations. Both cavities draw from
/// the same distribution; `C` is centered on each grid value with a relative
/// spread `c_rel_sigma`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FluctuationSpec {
    pub kappa_ratio_mean: f64,
    pub kappa_ratio_sigma: f64,
    pub delta_c_mean: f64,
    pub delta_c_sigma: f64,
    pub delta_a_mean: f64,
    pub delta_a_sigma: f64,
    pub c_rel_sigma: f64,
    pub phi_1_mean: f64,
    pub phi_1_sigma: f64,
    pub phi_2_mean: f64,
    pub phi_2_sigma: f64,
    pub trials: usize,
    pub seed: u64,
    /// Moving-average window over neighboring grid points; 1 keeps raw points.
    pub window: usize,
    pub c_min: f64,
    pub c_max: f64,
    pub c_points: usize,
}

impl Default for FluctuationSpec {
    fn default() -> Self {
        FluctuationSpec {
            kappa_ratio_mean: 0.9,
            kappa_ratio_sigma: 0.05,
            delta_c_mean: 0.0,
            delta_c_sigma: 0.05,
            delta_a_mean: 0.0,
            delta_a_sigma: 0.05,
            c_rel_sigma: 0.1,
            phi_1_mean: 0.0,
            phi_1_sigma: 0.0,
            phi_2_mean: 0.0,
            phi_2_sigma: 0.0,
            trials: 10_000,
            seed: 0,
            window: 50,
            c_min: 1.0,
            c_max: 10.0,
            c_points: 500,
        }
    }
}

impl FluctuationSpec {
    /// Same spec with every fluctuation switched off.
    pub fn noiseless(self) -> Self {
        FluctuationSpec {
            kappa_ratio_sigma: 0.0,
            delta_c_sigma: 0.0,
            delta_a_sigma: 0.0,
            c_rel_sigma: 0.0,
            phi_1_sigma: 0.0,
            phi_2_sigma: 0.0,
            ..self
        }
    }

    /// Independent zero-mean phase noise of width `sigma` at both MZIs.
    pub fn with_phase_noise(self, sigma: f64) -> Self {
        FluctuationSpec {
            phi_1_mean: 0.0,
            phi_1_sigma: sigma,
            phi_2_mean: 0.0,
            phi_2_sigma: sigma,
            ..self
        }
    }

    pub fn validate(&self) -> Result<()> {
        let sigmas = [
            ("kappa_ratio_sigma", self.kappa_ratio_sigma),
            ("delta_c_sigma", self.delta_c_sigma),
            ("delta_a_sigma", self.delta_a_sigma),
            ("c_rel_sigma", self.c_rel_sigma),
            ("phi_1_sigma", self.phi_1_sigma),
            ("phi_2_sigma", self.phi_2_sigma),
        ];
        for (name, s) in sigmas {
            if !s.is_finite() || s < 0.0 {
                return Err(Error::param(name, s, "must be finite and >= 0"));
            }
        }
        let means = [
            ("kappa_ratio_mean", self.kappa_ratio_mean),
            ("delta_c_mean", self.delta_c_mean),
            ("delta_a_mean", self.delta_a_mean),
            ("phi_1_mean", self.phi_1_mean),
            ("phi_2_mean", self.phi_2_mean),
        ];
        for (name, m) in means {
            if !m.is_finite() {
                return Err(Error::param(name, m, "must be finite"));
            }
        }
        if self.trials == 0 {
            return Err(Error::param("trials", 0.0, "must be >= 1"));
        }
        if self.window == 0 {
            return Err(Error::param("window", 0.0, "must be >= 1"));
        }
        if self.c_points == 0 {
            return Err(Error::param("c_points", 0.0, "must be >= 1"));
        }
        if !self.c_min.is_finite() || self.c_min < 0.0 {
            return Err(Error::param("c_min", self.c_min, "must be finite and >= 0"));
        }
        if !self.c_max.is_finite()
            || self.c_max < self.c_min
            || (self.c_points > 1 && self.c_max == self.c_min)
        {
            return Err(Error::param("c_max", self.c_max, "must exceed c_min"));
        }
        Ok(())
    }

    /// Evenly spaced cooperativity grid `[c_min, c_max]`.
    pub fn c_grid(&self) -> Vec<f64> {
        if self.c_points == 1 {
            return vec![self.c_min];
        }
        let step = (self.c_max - self.c_min) / (self.c_points - 1) as f64;
        (0..self.c_points)
            .map(|i| self.c_min + step * i as f64)
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub x: f64,
    pub mean: f64,
    pub stderr: f64,
}

/// Sample bookkeeping of a Monte Carlo run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct SampleCounts {
    pub samples: u64,
    pub skipped_no_herald: u64,
    pub clamped_kappa_ratio: u64,
    pub clamped_cooperativity: u64,
}

impl SampleCounts {
    fn merge(self, other: SampleCounts) -> SampleCounts {
        SampleCounts {
            samples: self.samples + other.samples,
            skipped_no_herald: self.skipped_no_herald + other.skipped_no_herald,
            clamped_kappa_ratio: self.clamped_kappa_ratio + other.clamped_kappa_ratio,
            clamped_cooperativity: self.clamped_cooperativity + other.clamped_cooperativity,
        }
    }

    /// Fraction of cavity draws whose `κ_r/κ` was clamped (two cavities per sample).
    pub fn kappa_clamp_fraction(&self) -> f64 {
        if self.samples == 0 {
            0.0
        } else {
            self.clamped_kappa_ratio as f64 / (2 * self.samples) as f64
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepMetadata {
    pub scheme: Scheme,
    /// What the `x` column is.
    pub axis: String,
    /// What the `mean` column is.
    pub quantity: String,
    pub seed: Option<u64>,
    pub spec: Option<FluctuationSpec>,
    pub base: Option<CavityParams>,
    pub counts: SampleCounts,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub points: Vec<SweepPoint>,
    pub metadata: SweepMetadata,
}

impl SweepResult {
    pub fn means(&self) -> impl Iterator<Item = f64> + '_ {
        self.points.iter().map(|p| p.mean)
    }

    /// Points with `lo <= x <= hi`.
    pub fn in_range(&self, lo: f64, hi: f64) -> impl Iterator<Item = &SweepPoint> + '_ {
        self.points.iter().filter(move |p| p.x >= lo && p.x <= hi)
    }
}

/// Centered moving average over `window` neighbors, truncated at the edges.
/// Standard errors combine as independent: `sqrt(Σ se²) / k`.
pub fn moving_average(points: &[SweepPoint], window: usize) -> Vec<SweepPoint> {
    if window <= 1 {
        return points.to_vec();
    }
    let before = (window - 1) / 2;
    let after = window / 2;
    (0..points.len())
        .map(|i| {
            let lo = i.saturating_sub(before);
            let hi = (i + after).min(points.len() - 1);
            let slice = &points[lo..=hi];
            let k = slice.len() as f64;
            SweepPoint {
                x: points[i].x,
                mean: slice.iter().map(|p| p.mean).sum::<f64>() / k,
                stderr: slice
                    .iter()
                    .map(|p| p.stderr * p.stderr)
                    .sum::<f64>()
                    .sqrt()
                    / k,
            }
        })
        .collect()
}

struct Draw {
    params: CavityParams,
    clamped_kappa: bool,
    clamped_c: bool,
}

fn normal(rng: &mut ChaCha8Rng, mean: f64, sigma: f64) -> f64 {
    let z: f64 = rng.sample(StandardNormal);
    mean + sigma * z
}

fn draw_cavity(rng: &mut ChaCha8Rng, spec: &FluctuationSpec, c_bar: f64) -> Draw {
    let c = normal(rng, c_bar, spec.c_rel_sigma * c_bar);
    let kr = normal(rng, spec.kappa_ratio_mean, spec.kappa_ratio_sigma);
    let dc = normal(rng, spec.delta_c_mean, spec.delta_c_sigma);
    let da = normal(rng, spec.delta_a_mean, spec.delta_a_sigma);
    Draw {
        params: CavityParams {
            cooperativity: c.max(0.0),
            delta_c: dc,
            delta_a: da,
            kappa_ratio: kr.clamp(0.0, 1.0),
            zeta: 1.0,
        },
        clamped_kappa: !(0.0..=1.0).contains(&kr),
        clamped_c: c < 0.0,
    }
}

/// Bits of ChaCha word position reserved per trial; one trial consumes a
/// handful of words, so trials never overlap.
const TRIAL_STRIDE_BITS: u32 = 20;

fn trial_rng(seed: u64, grid_index: usize, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(grid_index as u64);
    rng.set_word_pos((trial as u128) << TRIAL_STRIDE_BITS);
    rng
}

/// Mean and standard error of the atom–atom infidelity at one grid point.
fn infidelity_at(
    spec: &FluctuationSpec,
    scheme: Scheme,
    grid_index: usize,
    c_bar: f64,
) -> Result<(SweepPoint, SampleCounts)> {
    let mut counts = SampleCounts::default();
    let (mut n, mut mean, mut m2) = (0u64, 0.0, 0.0);
    for trial in 0..spec.trials {
        let mut rng = trial_rng(spec.seed, grid_index, trial);
        let first = draw_cavity(&mut rng, spec, c_bar);
        let second = draw_cavity(&mut rng, spec, c_bar);
        let phi_1 = normal(&mut rng, spec.phi_1_mean, spec.phi_1_sigma);
        let phi_2 = normal(&mut rng, spec.phi_2_mean, spec.phi_2_sigma);
        counts.samples += 1;
        counts.clamped_kappa_ratio += first.clamped_kappa as u64 + second.clamped_kappa as u64;
        counts.clamped_cooperativity += first.clamped_c as u64 + second.clamped_c as u64;
        let setup = TwoCavitySetup::new(first.params, second.params, phi_1, phi_2)?;
        let fidelity = match scheme {
            Scheme::New => atom_atom_new(&setup),
            Scheme::Old => atom_atom_old(&setup).map(|f| f.heralded_mean()),
        };
        let fidelity = match fidelity {
            Ok(f) => f,
            Err(e) if e.is_no_herald() => {
                counts.skipped_no_herald += 1;
                continue;
            }
            Err(e) => return Err(e),
        };
        let x = 1.0 - fidelity;
        n += 1;
        let delta = x - mean;
        mean += delta / n as f64;
        m2 += delta * (x - mean);
    }
    let stderr = if n > 1 {
        (m2 / (n - 1) as f64 / n as f64).sqrt()
    } else {
        0.0
    };
    let mean = if n == 0 { f64::NAN } else { mean };
    Ok((
        SweepPoint {
            x: c_bar,
            mean,
            stderr,
        },
        counts,
    ))
}

/// Mean atom–atom infidelity versus mean cooperativity, smoothed with the
/// spec's moving-average window. Grid points are evaluated in parallel; each
/// trial draws from its own ChaCha stream keyed by `(seed, grid index, trial)`.
pub fn mc_infidelity_curve(spec: &FluctuationSpec, scheme: Scheme) -> Result<SweepResult> {
    spec.validate()?;
    let grid = spec.c_grid();
    let raw: Vec<(SweepPoint, SampleCounts)> = grid
        .par_iter()
        .enumerate()
        .map(|(i, &c)| infidelity_at(spec, scheme, i, c))
        .collect::<Result<_>>()?;
    let counts = raw
        .iter()
        .fold(SampleCounts::default(), |acc, (_, c)| acc.merge(*c));
    let points: Vec<SweepPoint> = raw.into_iter().map(|(p, _)| p).collect();
    Ok(SweepResult {
        points: moving_average(&points, spec.window),
        metadata: SweepMetadata {
            scheme,
            axis: "C".into(),
            quantity: "infidelity".into(),
            seed: Some(spec.seed),
            spec: Some(*spec),
            base: None,
            counts,
        },
    })
}

/// [`mc_infidelity_curve`] with zero-mean phase noise `sigma_phi` at both MZIs.
pub fn mc_phase_noise(
    spec: &FluctuationSpec,
    sigma_phi: f64,
    scheme: Scheme,
) -> Result<SweepResult> {
    mc_infidelity_curve(&spec.with_phase_noise(sigma_phi), scheme)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    Zeta,
    KappaRatio,
    DeltaC,
    #[serde(rename = "C")]
    Cooperativity,
}

impl SweepAxis {
    pub fn as_str(self) -> &'static str {
        match self {
            SweepAxis::Zeta => "zeta",
            SweepAxis::KappaRatio => "kappa_ratio",
            SweepAxis::DeltaC => "delta_c",
            SweepAxis::Cooperativity => "C",
        }
    }

    /// `base` with this axis set to `x`; `delta_a` stays at its base value.
    pub fn apply(self, base: CavityParams, x: f64) -> Result<CavityParams> {
        let p = match self {
            SweepAxis::Zeta => base.with_zeta(x),
            SweepAxis::KappaRatio => base.with_kappa_ratio(x),
            SweepAxis::DeltaC => base.with_detunings(x, base.delta_a),
            SweepAxis::Cooperativity => base.with_cooperativity(x),
        };
        p.validate()?;
        Ok(p)
    }
}

impl fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SweepAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "zeta" => Ok(SweepAxis::Zeta),
            "kappa_ratio" | "kr" => Ok(SweepAxis::KappaRatio),
            "delta_c" | "dc" => Ok(SweepAxis::DeltaC),
            "C" | "c" | "cooperativity" => Ok(SweepAxis::Cooperativity),
            other => Err(Error::Config(format!("unknown sweep axis `{other}`"))),
        }
    }
}

/// Bloch-averaged fidelity and success probability along one axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sweep1d {
    pub fidelity: SweepResult,
    pub success: SweepResult,
}

pub fn sweep_1d(
    base: &CavityParams,
    axis: SweepAxis,
    grid: &[f64],
    scheme: Scheme,
) -> Result<Sweep1d> {
    base.validate()?;
    if grid.is_empty() {
        return Err(Error::Config("sweep grid is empty".into()));
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Config(
            "sweep grid must be strictly increasing".into(),
        ));
    }
    let params: Vec<CavityParams> = grid
        .iter()
        .map(|&x| axis.apply(*base, x))
        .collect::<Result<_>>()?;
    let averages = params
        .par_iter()
        .map(|p| bloch_average(p, scheme, 0.0))
        .collect::<Result<Vec<_>>>()?;
    let result = |quantity: &str, pick: fn(&crate::analytic::BlochAverage) -> f64| SweepResult {
        points: grid
            .iter()
            .zip(&averages)
            .map(|(&x, a)| SweepPoint {
                x,
                mean: pick(a),
                stderr: 0.0,
            })
            .collect(),
        metadata: SweepMetadata {
            scheme,
            axis: axis.as_str().into(),
            quantity: quantity.into(),
            seed: None,
            spec: None,
            base: Some(*base),
            counts: SampleCounts::default(),
        },
    };
    Ok(Sweep1d {
        fidelity: result("avg_fidelity", |a| a.fidelity),
        success: result("avg_success", |a| a.success_probability),
    })
}

/// Evenly spaced grid of `n` points over `[lo, hi]`.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n)
            .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
            .collect(),
    }
}
