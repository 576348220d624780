//! Monte Carlo estimates of the ergodic rates, drawn from the element-level
//! signal model rather than the Gamma approximation.
//!
//! Each trial owns a ChaCha8 stream selected by its index, and per-trial
//! results are reduced in index order with compensated summation, so serial
//! and parallel runs give identical numbers for a fixed seed.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};
use rayon::prelude::*;
use std::f64::consts::PI;
use thiserror::Error;

use crate::closed_form::{snr_constants, AnalysisError, SnrConstants};
use crate::config::ScenarioConfig;
use crate::geometry::{link_distances, Position3D};
use crate::rf_stats::{eff_phase_variance, PhaseErrorModel};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum McError {
    #[error("trial count must be >= 1")]
    NoTrials,
    #[error("invalid sampler parameter: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
}

/// How the eavesdropper's composite phase `θ_g_e − θ_g + φ` is drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EvePhaseModel {
    /// Wrapped normal with the effective variance of the analytic model.
    WrappedNormalApprox,
    /// Uniform channel phases plus the von Mises error, drawn separately.
    #[default]
    ExactUniform,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Serial,
    #[default]
    Parallel,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McSettings {
    pub trials: usize,
    pub seed: u64,
    pub eve_phase_model: EvePhaseModel,
    pub execution: Execution,
}

impl Default for McSettings {
    fn default() -> Self {
        Self {
            trials: 100_000,
            seed: 1,
            eve_phase_model: EvePhaseModel::ExactUniform,
            execution: Execution::Parallel,
        }
    }
}

/// Sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Estimate {
    pub mean: f64,
    pub se: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateEstimates {
    pub c_user_r: Estimate,
    pub c_eve_r: Estimate,
    pub c_user_t: Estimate,
    pub c_eve_t: Estimate,
    /// `[E R_user − E R_eve]⁺`, SE from the paired differences.
    pub r_sec_r: Estimate,
    pub r_sec_t: Estimate,
    /// Diagnostic `E[(R_user − R_eve)⁺]`.
    pub clamped_sec_r: Estimate,
    pub clamped_sec_t: Estimate,
    pub trials: usize,
}

/// Nakagami-`m` envelope with `E[r²] = omega`.
pub fn sample_nakagami<R: Rng + ?Sized>(m: f64, omega: f64, rng: &mut R) -> f64 {
    Gamma::new(m, omega / m)
        .expect("shape and scale must be positive")
        .sample(rng)
        .sqrt()
}

/// Von Mises angle in `(−π, π]` (Best-Fisher rejection).
pub fn sample_vonmises<R: Rng + ?Sized>(kappa: f64, rng: &mut R) -> f64 {
    if kappa < 1e-8 {
        return wrap(PI * (2.0 * rng.random::<f64>() - 1.0));
    }
    if kappa > 1e6 {
        let z: f64 = rng.sample(StandardNormal);
        return wrap(z / kappa.sqrt());
    }
    let s = if kappa < 1e-5 {
        1.0 / kappa + kappa
    } else {
        let r = 1.0 + (1.0 + 4.0 * kappa * kappa).sqrt();
        let rho = (r - (2.0 * r).sqrt()) / (2.0 * kappa);
        (1.0 + rho * rho) / (2.0 * rho)
    };
    loop {
        let u: f64 = rng.random();
        let z = (PI * u).cos();
        let w = (1.0 + s * z) / (s + z);
        let y = kappa * (s - w);
        let v: f64 = rng.random();
        if y * (2.0 - y) - v >= 0.0 || (y / v).ln() + 1.0 - y >= 0.0 {
            let theta = w.clamp(-1.0, 1.0).acos();
            return wrap(if rng.random::<f64>() < 0.5 { -theta } else { theta });
        }
    }
}

/// Maps an angle into `(−π, π]`.
fn wrap(x: f64) -> f64 {
    let y = x.rem_euclid(2.0 * PI);
    if y > PI {
        y - 2.0 * PI
    } else {
        y
    }
}

/// Draws the per-element quantities of one link.
#[derive(Debug, Clone, Copy)]
struct LinkSampler {
    envelope: Gamma<f64>,
}

impl LinkSampler {
    fn new(m: f64) -> Result<Self, McError> {
        if !(m >= 0.5) {
            return Err(McError::InvalidParameter(format!("Nakagami shape {m}")));
        }
        Ok(Self {
            envelope: Gamma::new(m, 1.0 / m).map_err(|e| McError::InvalidParameter(e.to_string()))?,
        })
    }

    #[inline]
    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.envelope.sample(rng).sqrt()
    }
}

/// Real and imaginary parts `(U, V)` of `Σ a_i e^{−jθ_i}`.
#[inline]
fn phasor_sum(amps: &[f64], phases: &[f64]) -> (f64, f64) {
    amps.iter().zip(phases).fold((0.0, 0.0), |(u, v), (&a, &t)| {
        let (s, c) = t.sin_cos();
        (u + a * c, v - a * s)
    })
}

/// `(U, V)` samples of a legitimate user's cascaded channel.
pub fn sample_user_uv(
    elements: usize,
    m_bv: f64,
    m_vu: f64,
    kappa: f64,
    samples: usize,
    seed: u64,
) -> Result<Vec<(f64, f64)>, McError> {
    PhaseErrorModel::new(kappa).map_err(AnalysisError::from)?;
    let h = LinkSampler::new(m_bv)?;
    let g = LinkSampler::new(m_vu)?;
    Ok((0..samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = trial_rng(seed, i);
            let mut amps = vec![0.0; elements];
            let mut phases = vec![0.0; elements];
            for (a, p) in amps.iter_mut().zip(phases.iter_mut()) {
                *a = h.draw(&mut rng) * g.draw(&mut rng);
                *p = sample_vonmises(kappa, &mut rng);
            }
            phasor_sum(&amps, &phases)
        })
        .collect())
}

/// Samples of the user cascaded power `X = U² + V²`.
pub fn sample_user_power(
    elements: usize,
    m_bv: f64,
    m_vu: f64,
    kappa: f64,
    samples: usize,
    seed: u64,
) -> Result<Vec<f64>, McError> {
    Ok(sample_user_uv(elements, m_bv, m_vu, kappa, samples, seed)?
        .into_iter()
        .map(|(u, v)| u * u + v * v)
        .collect())
}

fn trial_rng(seed: u64, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64);
    rng
}

/// Neumaier compensated sum.
#[derive(Debug, Clone, Copy, Default)]
struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

fn estimate(values: impl Iterator<Item = f64> + Clone, n: usize) -> Estimate {
    let nf = n as f64;
    let mut s = CompensatedSum::default();
    values.clone().for_each(|x| s.add(x));
    let mean = s.value() / nf;
    if n < 2 {
        return Estimate { mean, se: 0.0 };
    }
    let mut ss = CompensatedSum::default();
    values.for_each(|x| ss.add((x - mean) * (x - mean)));
    Estimate {
        mean,
        se: (ss.value() / (nf - 1.0) / nf).sqrt(),
    }
}

/// Instantaneous rates of one trial: user/eve in each region.
#[derive(Debug, Clone, Copy)]
struct TrialRates {
    user_r: f64,
    eve_r: f64,
    user_t: f64,
    eve_t: f64,
}

struct TrialModel {
    elements: usize,
    kappa: f64,
    eve_sigma: f64,
    eve_model: EvePhaseModel,
    k: SnrConstants<f64>,
    bv: LinkSampler,
    vu_r: LinkSampler,
    vu_t: LinkSampler,
    ve_r: LinkSampler,
    ve_t: LinkSampler,
}

impl TrialModel {
    fn eve_phases<R: Rng + ?Sized>(&self, user_phases: &[f64], out: &mut [f64], rng: &mut R) {
        match self.eve_model {
            EvePhaseModel::ExactUniform => {
                for (o, &phi) in out.iter_mut().zip(user_phases) {
                    let theta_e = 2.0 * PI * rng.random::<f64>();
                    let theta_u = 2.0 * PI * rng.random::<f64>();
                    *o = theta_e - theta_u + phi;
                }
            }
            EvePhaseModel::WrappedNormalApprox => {
                for o in out.iter_mut() {
                    let z: f64 = rng.sample(StandardNormal);
                    *o = wrap(self.eve_sigma * z);
                }
            }
        }
    }

    fn run(&self, rng: &mut ChaCha8Rng) -> TrialRates {
        let n = self.elements;
        let mut h = vec![0.0; n];
        let mut amps = vec![0.0; n];
        let mut phi_r = vec![0.0; n];
        let mut phi_t = vec![0.0; n];
        let mut eve_phase = vec![0.0; n];
        for x in h.iter_mut() {
            *x = self.bv.draw(rng);
        }
        for (pr, pt) in phi_r.iter_mut().zip(phi_t.iter_mut()) {
            *pr = sample_vonmises(self.kappa, rng);
            *pt = sample_vonmises(self.kappa, rng);
        }
        let mut power = |link: &LinkSampler, phases: &[f64], rng: &mut ChaCha8Rng| {
            for (a, &hi) in amps.iter_mut().zip(&h) {
                *a = hi * link.draw(rng);
            }
            let (u, v) = phasor_sum(&amps, phases);
            u * u + v * v
        };
        let x_r = power(&self.vu_r, &phi_r, rng);
        let x_t = power(&self.vu_t, &phi_t, rng);
        self.eve_phases(&phi_r, &mut eve_phase, rng);
        let x_er = power(&self.ve_r, &eve_phase, rng);
        self.eve_phases(&phi_t, &mut eve_phase, rng);
        let x_et = power(&self.ve_t, &eve_phase, rng);

        let k = &self.k;
        let sinr = |sig: f64, int: f64, x: f64| sig * x / (int * x + 1.0);
        TrialRates {
            user_r: (k.k1 * x_r).ln_1p() / std::f64::consts::LN_2,
            eve_r: (k.k1p * x_er).ln_1p() / std::f64::consts::LN_2,
            user_t: sinr(k.k2, k.k1_t, x_t).ln_1p() / std::f64::consts::LN_2,
            eve_t: sinr(k.k2p, k.k1p_t, x_et).ln_1p() / std::f64::consts::LN_2,
        }
    }
}

/// Monte Carlo rate estimates for pair `pair` with the UAV at `uav`.
pub fn simulate_rates(
    cfg: &ScenarioConfig,
    uav: &Position3D<f64>,
    zeta: f64,
    pair: usize,
    mc: &McSettings,
) -> Result<RateEstimates, McError> {
    if mc.trials == 0 {
        return Err(McError::NoTrials);
    }
    let d = link_distances(&cfg.layout, uav, pair).map_err(AnalysisError::from)?;
    let power = cfg.power.with_zeta(zeta);
    power.validate()?;
    let f = &cfg.fading;
    let model = TrialModel {
        elements: cfg.elements,
        kappa: cfg.phase.kappa,
        eve_sigma: eff_phase_variance(&cfg.phase).sqrt(),
        eve_model: mc.eve_phase_model,
        k: snr_constants(&power, &d),
        bv: LinkSampler::new(f.m_bv)?,
        vu_r: LinkSampler::new(f.m_vu_r)?,
        vu_t: LinkSampler::new(f.m_vu_t)?,
        ve_r: LinkSampler::new(f.m_ve_r)?,
        ve_t: LinkSampler::new(f.m_ve_t)?,
    };
    let trial = |i: usize| model.run(&mut trial_rng(mc.seed, i));
    let rates: Vec<TrialRates> = match mc.execution {
        Execution::Serial => (0..mc.trials).map(trial).collect(),
        Execution::Parallel => (0..mc.trials).into_par_iter().map(trial).collect(),
    };
    let n = mc.trials;
    let col = |f: fn(&TrialRates) -> f64| estimate(rates.iter().map(f), n);
    let secrecy = |diff: Estimate| Estimate {
        mean: diff.mean.max(0.0),
        se: diff.se,
    };
    Ok(RateEstimates {
        c_user_r: col(|r| r.user_r),
        c_eve_r: col(|r| r.eve_r),
        c_user_t: col(|r| r.user_t),
        c_eve_t: col(|r| r.eve_t),
        r_sec_r: secrecy(col(|r| r.user_r - r.eve_r)),
        r_sec_t: secrecy(col(|r| r.user_t - r.eve_t)),
        clamped_sec_r: col(|r| (r.user_r - r.eve_r).max(0.0)),
        clamped_sec_t: col(|r| (r.user_t - r.eve_t).max(0.0)),
        trials: n,
    })
}

/// Seed used for pair `pair`, so per-pair estimates are independent.
pub fn pair_seed(seed: u64, pair: usize) -> u64 {
    seed.wrapping_add(pair as u64)
}

/// Pair-averaged WSSR from Monte Carlo secrecy estimates; `-inf` when the
/// point cannot be simulated. A fixed seed gives common random numbers
/// across evaluation points.
pub fn mc_wssr(cfg: &ScenarioConfig, uav: &Position3D<f64>, zeta: f64, mc: &McSettings) -> f64 {
    let pairs = cfg.layout.pair_count();
    let mut total = 0.0;
    for p in 0..pairs {
        let settings = McSettings {
            seed: pair_seed(mc.seed, p),
            ..*mc
        };
        match simulate_rates(cfg, uav, zeta, p, &settings) {
            Ok(r) => total += cfg.weights.w1 * r.r_sec_t.mean + cfg.weights.w2 * r.r_sec_r.mean,
            Err(_) => return f64::NEG_INFINITY,
        }
    }
    total / pairs as f64
}
