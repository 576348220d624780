//! Scenario files: TOML with one `[section]` per component, validated into a
//! [`ScenarioConfig`]. Validation errors name the offending `section.key`.

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::closed_form::PowerConfig;
use crate::geometry::{NodeLayout, Position3D};
use crate::monte_carlo::{EvePhaseModel, Execution, McSettings};
use crate::optimizer::{OptimizerSettings, SearchBox};
use crate::quadrature::{CapacityIntegrator, DEFAULT_LOG_STEP, DEFAULT_ORDER, MAX_ORDER};
use crate::rf_stats::{FadingParams, PhaseErrorModel};

/// Bundled scenario reproducing the reference deployment.
pub const REFERENCE_SCENARIO: &str = include_str!("../scenarios/paper_sec5.cfg");

pub const DEFAULT_N0_DBM: f64 = -100.0;
pub const DEFAULT_PATH_LOSS_EXPONENT: f64 = 2.0;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("{field}: {reason}")]
    Invalid { field: String, reason: String },
}

fn invalid(field: &str, reason: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        field: field.into(),
        reason: reason.into(),
    }
}

/// WSSR weights: `w1` on the transmit region, `w2` on the reflect region.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Weights {
    pub w1: f64,
    pub w2: f64,
}

impl Default for Weights {
    fn default() -> Self {
        Self { w1: 0.45, w2: 0.55 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IntegratorKind {
    LogTrapezoid,
    GaussLaguerre,
}

impl IntegratorKind {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::LogTrapezoid => "log-trapezoid",
            Self::GaussLaguerre => "gauss-laguerre",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSettings {
    pub method: IntegratorKind,
    /// Gauss-Laguerre order.
    pub order: usize,
    /// Log-trapezoid step.
    pub step: f64,
}

impl Default for QuadratureSettings {
    fn default() -> Self {
        Self {
            method: IntegratorKind::LogTrapezoid,
            order: DEFAULT_ORDER,
            step: DEFAULT_LOG_STEP,
        }
    }
}

/// Fully validated scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub layout: NodeLayout<f64>,
    /// UAV position used for sweeps and as the optimizer's starting point.
    pub uav: Position3D<f64>,
    pub fading: FadingParams<f64>,
    pub power: PowerConfig<f64>,
    pub phase: PhaseErrorModel<f64>,
    pub elements: usize,
    pub weights: Weights,
    pub quadrature: QuadratureSettings,
    pub mc: McSettings,
    pub search: SearchBox,
    pub optimizer: OptimizerSettings,
}

impl ScenarioConfig {
    pub fn reference() -> Self {
        Self::from_toml_str(REFERENCE_SCENARIO).expect("bundled scenario is valid")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ConfigError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_toml_str(&text)
    }

    pub fn from_toml_str(text: &str) -> Result<Self, ConfigError> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        raw.resolve()
    }

    /// Resolved configuration with every default written out.
    pub fn to_toml_string(&self) -> String {
        toml::to_string(&RawConfig::from(self)).expect("config serializes")
    }

    pub fn integrator(&self) -> CapacityIntegrator<f64> {
        match self.quadrature.method {
            IntegratorKind::LogTrapezoid => CapacityIntegrator::LogTrapezoid {
                step: self.quadrature.step,
            },
            IntegratorKind::GaussLaguerre => CapacityIntegrator::gauss_laguerre(self.quadrature.order)
                .expect("order validated at load time"),
        }
    }

    /// Re-runs every check; useful after programmatic edits.
    pub fn validate(&self) -> Result<(), ConfigError> {
        RawConfig::from(self).resolve().map(|_| ())
    }
}

pub fn load_config(path: impl AsRef<Path>) -> Result<ScenarioConfig, ConfigError> {
    ScenarioConfig::load(path)
}

type Triple = [f64; 3];

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    surface: RawSurface,
    layout: RawLayout,
    #[serde(default)]
    fading: RawFading,
    power: RawPower,
    phase: RawPhase,
    #[serde(default)]
    weights: Option<RawWeights>,
    #[serde(default)]
    quadrature: RawQuadrature,
    #[serde(default)]
    monte_carlo: RawMonteCarlo,
    #[serde(default)]
    search: Option<RawSearch>,
    #[serde(default)]
    optimizer: RawOptimizer,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSurface {
    elements: i64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLayout {
    bs: Triple,
    uav: Triple,
    reflect_users: Vec<Triple>,
    transmit_users: Vec<Triple>,
    reflect_eves: Vec<Triple>,
    transmit_eves: Vec<Triple>,
    #[serde(default)]
    reflect_pairs: Option<Vec<[i64; 2]>>,
    #[serde(default)]
    transmit_pairs: Option<Vec<[i64; 2]>>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFading {
    /// Shape applied to every link not set individually.
    m: Option<f64>,
    m_bv: Option<f64>,
    m_vu_r: Option<f64>,
    m_vu_t: Option<f64>,
    m_ve_r: Option<f64>,
    m_ve_t: Option<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPower {
    ps_dbm: f64,
    n0_dbm: Option<f64>,
    rho: f64,
    zeta: f64,
    path_loss_exponent: Option<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPhase {
    kappa: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawWeights {
    w1: f64,
    w2: f64,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawQuadrature {
    method: Option<String>,
    order: Option<i64>,
    step: Option<f64>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMonteCarlo {
    trials: Option<i64>,
    seed: Option<u64>,
    eve_model: Option<String>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSearch {
    x: [f64; 2],
    y: [f64; 2],
    z: [f64; 2],
    step: f64,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOptimizer {
    eps_position: Option<f64>,
    k_max: Option<i64>,
    eps_zeta: Option<f64>,
    n_max: Option<i64>,
}

pub fn parse_eve_model(s: &str) -> Option<EvePhaseModel> {
    match s {
        "approx" => Some(EvePhaseModel::WrappedNormalApprox),
        "exact" => Some(EvePhaseModel::ExactUniform),
        _ => None,
    }
}

pub fn eve_model_name(m: EvePhaseModel) -> &'static str {
    match m {
        EvePhaseModel::WrappedNormalApprox => "approx",
        EvePhaseModel::ExactUniform => "exact",
    }
}

fn finite(field: &str, v: f64) -> Result<f64, ConfigError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(invalid(field, "must be finite"))
    }
}

fn positive_count(field: &str, v: i64) -> Result<usize, ConfigError> {
    usize::try_from(v)
        .ok()
        .filter(|&n| n >= 1)
        .ok_or_else(|| invalid(field, format!("must be a positive integer, got {v}")))
}

fn pairs(field: &str, raw: Option<&Vec<[i64; 2]>>, users: usize, eves: usize) -> Result<Vec<(usize, usize)>, ConfigError> {
    match raw {
        None => Ok((0..users.min(eves)).map(|i| (i, i)).collect()),
        Some(list) => list
            .iter()
            .map(|&[u, e]| {
                let ok = |v: i64, n: usize| usize::try_from(v).ok().filter(|&i| i < n);
                match (ok(u, users), ok(e, eves)) {
                    (Some(u), Some(e)) => Ok((u, e)),
                    _ => Err(invalid(field, format!("pair [{u}, {e}] out of range"))),
                }
            })
            .collect(),
    }
}

impl RawConfig {
    fn resolve(&self) -> Result<ScenarioConfig, ConfigError> {
        let elements = positive_count("surface.elements", self.surface.elements)?;

        let l = &self.layout;
        let pos = |field: &str, t: &Triple| -> Result<Position3D<f64>, ConfigError> {
            for &c in t {
                finite(field, c)?;
            }
            Ok(Position3D::from(*t))
        };
        let list = |field: &str, ts: &[Triple]| -> Result<Vec<Position3D<f64>>, ConfigError> {
            if ts.is_empty() {
                return Err(invalid(field, "needs at least one node"));
            }
            ts.iter().map(|t| pos(field, t)).collect()
        };
        let reflect_users = list("layout.reflect_users", &l.reflect_users)?;
        let transmit_users = list("layout.transmit_users", &l.transmit_users)?;
        let reflect_eves = list("layout.reflect_eves", &l.reflect_eves)?;
        let transmit_eves = list("layout.transmit_eves", &l.transmit_eves)?;
        let reflect_pairs = pairs(
            "layout.reflect_pairs",
            l.reflect_pairs.as_ref(),
            reflect_users.len(),
            reflect_eves.len(),
        )?;
        let transmit_pairs = pairs(
            "layout.transmit_pairs",
            l.transmit_pairs.as_ref(),
            transmit_users.len(),
            transmit_eves.len(),
        )?;
        let layout = NodeLayout {
            bs: pos("layout.bs", &l.bs)?,
            reflect_users,
            transmit_users,
            reflect_eves,
            transmit_eves,
            reflect_pairs,
            transmit_pairs,
        };
        layout.validate().map_err(|e| invalid("layout", e.to_string()))?;
        let uav = pos("layout.uav", &l.uav)?;

        let f = &self.fading;
        let base = f.m.unwrap_or(1.0);
        let shape = |field: &str, v: Option<f64>| {
            let m = v.unwrap_or(base);
            if m >= 0.5 && m.is_finite() {
                Ok(m)
            } else {
                Err(invalid(field, format!("Nakagami shape must be >= 0.5, got {m}")))
            }
        };
        if let Some(m) = f.m {
            shape("fading.m", Some(m))?;
        }
        let fading = FadingParams {
            m_bv: shape("fading.m_bv", f.m_bv)?,
            m_vu_r: shape("fading.m_vu_r", f.m_vu_r)?,
            m_vu_t: shape("fading.m_vu_t", f.m_vu_t)?,
            m_ve_r: shape("fading.m_ve_r", f.m_ve_r)?,
            m_ve_t: shape("fading.m_ve_t", f.m_ve_t)?,
        };

        let p = &self.power;
        let unit = |field: &str, v: f64| {
            if (0.0..=1.0).contains(&v) {
                Ok(v)
            } else {
                Err(invalid(field, format!("must be in [0, 1], got {v}")))
            }
        };
        let alpha_pl = finite(
            "power.path_loss_exponent",
            p.path_loss_exponent.unwrap_or(DEFAULT_PATH_LOSS_EXPONENT),
        )?;
        if alpha_pl <= 0.0 {
            return Err(invalid("power.path_loss_exponent", "must be > 0"));
        }
        let power = PowerConfig {
            ps_dbm: finite("power.ps_dbm", p.ps_dbm)?,
            n0_dbm: finite("power.n0_dbm", p.n0_dbm.unwrap_or(DEFAULT_N0_DBM))?,
            rho: unit("power.rho", p.rho)?,
            zeta: unit("power.zeta", p.zeta)?,
            alpha_pl,
        };

        let phase = PhaseErrorModel::new(self.phase.kappa)
            .map_err(|e| invalid("phase.kappa", e.to_string()))?;

        let weights = match &self.weights {
            None => Weights::default(),
            Some(w) => {
                let w1 = unit("weights.w1", w.w1)?;
                let w2 = unit("weights.w2", w.w2)?;
                if (w1 + w2 - 1.0).abs() > 1e-9 {
                    return Err(invalid("weights", format!("w1 + w2 must equal 1, got {}", w1 + w2)));
                }
                Weights { w1, w2 }
            }
        };

        let q = &self.quadrature;
        let method = match q.method.as_deref() {
            None | Some("log-trapezoid") => IntegratorKind::LogTrapezoid,
            Some("gauss-laguerre") => IntegratorKind::GaussLaguerre,
            Some(other) => {
                return Err(invalid(
                    "quadrature.method",
                    format!("expected \"log-trapezoid\" or \"gauss-laguerre\", got {other:?}"),
                ))
            }
        };
        let order = match q.order {
            None => DEFAULT_ORDER,
            Some(n) => positive_count("quadrature.order", n)
                .ok()
                .filter(|&n| n <= MAX_ORDER)
                .ok_or_else(|| invalid("quadrature.order", format!("must be in 1..={MAX_ORDER}, got {n}")))?,
        };
        let step = q.step.unwrap_or(DEFAULT_LOG_STEP);
        if !(step > 0.0 && step <= 1.0) {
            return Err(invalid("quadrature.step", format!("must be in (0, 1], got {step}")));
        }

        let m = &self.monte_carlo;
        let defaults = McSettings::default();
        let mc = McSettings {
            trials: match m.trials {
                None => defaults.trials,
                Some(n) => positive_count("monte_carlo.trials", n)?,
            },
            seed: m.seed.unwrap_or(defaults.seed),
            eve_phase_model: match m.eve_model.as_deref() {
                None => defaults.eve_phase_model,
                Some(s) => parse_eve_model(s).ok_or_else(|| {
                    invalid("monte_carlo.eve_model", format!("expected \"approx\" or \"exact\", got {s:?}"))
                })?,
            },
            execution: Execution::Parallel,
        };

        let search = match &self.search {
            None => SearchBox {
                x_min: -2.0,
                x_max: 2.0,
                y_min: -2.0,
                y_max: 2.0,
                z_min: 1.0,
                z_max: 5.0,
                step: 1.0,
            },
            Some(s) => SearchBox {
                x_min: s.x[0],
                x_max: s.x[1],
                y_min: s.y[0],
                y_max: s.y[1],
                z_min: s.z[0],
                z_max: s.z[1],
                step: s.step,
            },
        };
        search.validate().map_err(|e| invalid("search", e.to_string()))?;

        let o = &self.optimizer;
        let od = OptimizerSettings::default();
        let optimizer = OptimizerSettings {
            eps_position: o.eps_position.unwrap_or(od.eps_position),
            k_max: match o.k_max {
                None => od.k_max,
                Some(n) => positive_count("optimizer.k_max", n)?,
            },
            eps_zeta: o.eps_zeta.unwrap_or(od.eps_zeta),
            n_max_gss: match o.n_max {
                None => od.n_max_gss,
                Some(n) => positive_count("optimizer.n_max", n)?,
            },
        };
        if !(optimizer.eps_position > 0.0) {
            return Err(invalid("optimizer.eps_position", "must be > 0"));
        }
        if !(optimizer.eps_zeta > 0.0) {
            return Err(invalid("optimizer.eps_zeta", "must be > 0"));
        }

        Ok(ScenarioConfig {
            layout,
            uav,
            fading,
            power,
            phase,
            elements,
            weights,
            quadrature: QuadratureSettings { method, order, step },
            mc,
            search,
            optimizer,
        })
    }
}

impl From<&ScenarioConfig> for RawConfig {
    fn from(c: &ScenarioConfig) -> Self {
        let t = |p: &Position3D<f64>| -> Triple { (*p).into() };
        let ts = |ps: &[Position3D<f64>]| ps.iter().map(t).collect::<Vec<_>>();
        let pr = |ps: &[(usize, usize)]| Some(ps.iter().map(|&(u, e)| [u as i64, e as i64]).collect());
        RawConfig {
            surface: RawSurface {
                elements: c.elements as i64,
            },
            layout: RawLayout {
                bs: t(&c.layout.bs),
                uav: t(&c.uav),
                reflect_users: ts(&c.layout.reflect_users),
                transmit_users: ts(&c.layout.transmit_users),
                reflect_eves: ts(&c.layout.reflect_eves),
                transmit_eves: ts(&c.layout.transmit_eves),
                reflect_pairs: pr(&c.layout.reflect_pairs),
                transmit_pairs: pr(&c.layout.transmit_pairs),
            },
            fading: RawFading {
                m: None,
                m_bv: Some(c.fading.m_bv),
                m_vu_r: Some(c.fading.m_vu_r),
                m_vu_t: Some(c.fading.m_vu_t),
                m_ve_r: Some(c.fading.m_ve_r),
                m_ve_t: Some(c.fading.m_ve_t),
            },
            power: RawPower {
                ps_dbm: c.power.ps_dbm,
                n0_dbm: Some(c.power.n0_dbm),
                rho: c.power.rho,
                zeta: c.power.zeta,
                path_loss_exponent: Some(c.power.alpha_pl),
            },
            phase: RawPhase {
                kappa: c.phase.kappa,
            },
            weights: Some(RawWeights {
                w1: c.weights.w1,
                w2: c.weights.w2,
            }),
            quadrature: RawQuadrature {
                method: Some(c.quadrature.method.as_str().into()),
                order: Some(c.quadrature.order as i64),
                step: Some(c.quadrature.step),
            },
            monte_carlo: RawMonteCarlo {
                trials: Some(c.mc.trials as i64),
                seed: Some(c.mc.seed),
                eve_model: Some(eve_model_name(c.mc.eve_phase_model).into()),
            },
            search: Some(RawSearch {
                x: [c.search.x_min, c.search.x_max],
                y: [c.search.y_min, c.search.y_max],
                z: [c.search.z_min, c.search.z_max],
                step: c.search.step,
            }),
            optimizer: RawOptimizer {
                eps_position: Some(c.optimizer.eps_position),
                k_max: Some(c.optimizer.k_max as i64),
                eps_zeta: Some(c.optimizer.eps_zeta),
                n_max: Some(c.optimizer.n_max_gss as i64),
            },
        }
    }
}
