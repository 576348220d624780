//! Parameter sweeps and optimizer runs, rendered as [`Table`]s.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::closed_form::{AnalysisError, Evaluator, SecrecyReport};
use crate::config::{ConfigError, ScenarioConfig};
use crate::monte_carlo::{mc_wssr, pair_seed, simulate_rates, Estimate, McError, RateEstimates};
use crate::optimizer::{alternating_optimize, alternating_optimize_by, axis_grid, OptResult, OptimizerError};
use crate::output::{format_value, Table};

#[derive(Debug, Error)]
pub enum SweepError {
    #[error("{0}")]
    Spec(String),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error(transparent)]
    MonteCarlo(#[from] McError),
    #[error(transparent)]
    Optimizer(#[from] OptimizerError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepVariable {
    PsDbm,
    Elements,
    Kappa,
    Zeta,
}

impl SweepVariable {
    pub fn name(self) -> &'static str {
        match self {
            Self::PsDbm => "ps_dbm",
            Self::Elements => "elements",
            Self::Kappa => "kappa",
            Self::Zeta => "zeta",
        }
    }

    /// Copy of `cfg` with this variable set to `value`.
    pub fn apply(self, cfg: &ScenarioConfig, value: f64) -> Result<ScenarioConfig, SweepError> {
        let mut c = cfg.clone();
        match self {
            Self::PsDbm => c.power.ps_dbm = value,
            Self::Elements => {
                if !(value >= 1.0 && value.fract() == 0.0) {
                    return Err(SweepError::Spec(format!("elements must be a positive integer, got {value}")));
                }
                c.elements = value as usize;
            }
            Self::Kappa => c.phase.kappa = value,
            Self::Zeta => c.power.zeta = value,
        }
        c.validate()?;
        Ok(c)
    }
}

impl FromStr for SweepVariable {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "ps_dbm" | "ps" => Ok(Self::PsDbm),
            "elements" | "m" => Ok(Self::Elements),
            "kappa" => Ok(Self::Kappa),
            "zeta" => Ok(Self::Zeta),
            _ => Err(format!("unknown sweep variable {s:?} (ps_dbm, elements, kappa, zeta)")),
        }
    }
}

impl fmt::Display for SweepVariable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    CUserR,
    CEveR,
    CUserT,
    CEveT,
    RSecR,
    RSecT,
    RSecSum,
    Wssr,
}

impl Metric {
    pub const ALL: [Metric; 8] = [
        Self::CUserR,
        Self::CEveR,
        Self::CUserT,
        Self::CEveT,
        Self::RSecR,
        Self::RSecT,
        Self::RSecSum,
        Self::Wssr,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::CUserR => "c_user_r",
            Self::CEveR => "c_eve_r",
            Self::CUserT => "c_user_t",
            Self::CEveT => "c_eve_t",
            Self::RSecR => "r_sec_r",
            Self::RSecT => "r_sec_t",
            Self::RSecSum => "r_sec_sum",
            Self::Wssr => "wssr",
        }
    }

    pub fn analytic(self, r: &SecrecyReport<f64>) -> f64 {
        match self {
            Self::CUserR => r.c_user_r,
            Self::CEveR => r.c_eve_r,
            Self::CUserT => r.c_user_t,
            Self::CEveT => r.c_eve_t,
            Self::RSecR => r.r_sec_r,
            Self::RSecT => r.r_sec_t,
            Self::RSecSum => r.r_sec_sum,
            Self::Wssr => r.wssr,
        }
    }

    /// Monte Carlo counterpart; the weighted and summed rates have none.
    pub fn monte_carlo(self, r: &RateEstimates) -> Option<Estimate> {
        match self {
            Self::CUserR => Some(r.c_user_r),
            Self::CEveR => Some(r.c_eve_r),
            Self::CUserT => Some(r.c_user_t),
            Self::CEveT => Some(r.c_eve_t),
            Self::RSecR => Some(r.r_sec_r),
            Self::RSecT => Some(r.r_sec_t),
            Self::RSecSum | Self::Wssr => None,
        }
    }

    fn monte_carlo_available(self) -> bool {
        !matches!(self, Self::RSecSum | Self::Wssr)
    }
}

impl FromStr for Metric {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Self::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| format!("unknown metric {s:?}"))
    }
}

/// Parses `a:step:b` (inclusive grid) or a comma-separated list.
pub fn parse_values(s: &str) -> Result<Vec<f64>, String> {
    let num = |t: &str| t.trim().parse::<f64>().map_err(|_| format!("bad number {t:?} in {s:?}"));
    let parts: Vec<&str> = s.split(':').collect();
    let values = match parts.as_slice() {
        [a, step, b] => {
            let (a, step, b) = (num(a)?, num(step)?, num(b)?);
            if !(step > 0.0) || b < a {
                return Err(format!("range {s:?} needs step > 0 and end >= start"));
            }
            axis_grid(a, b, step)
        }
        [_] => s.split(',').map(num).collect::<Result<_, _>>()?,
        _ => return Err(format!("expected a:step:b or a comma list, got {s:?}")),
    };
    if values.is_empty() {
        return Err("empty value list".into());
    }
    Ok(values)
}

/// One swept variable, optionally repeated for each value of a series
/// variable (one table per series value).
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub variable: SweepVariable,
    pub values: Vec<f64>,
    pub metrics: Vec<Metric>,
    pub series: Option<(SweepVariable, Vec<f64>)>,
    /// Single pair; `None` averages over all pairs.
    pub pair: Option<usize>,
}

impl SweepSpec {
    pub fn new(variable: SweepVariable, values: Vec<f64>) -> Self {
        Self {
            variable,
            values,
            metrics: Metric::ALL.to_vec(),
            series: None,
            pair: None,
        }
    }

    pub fn validate(&self, cfg: &ScenarioConfig) -> Result<(), SweepError> {
        if self.values.is_empty() {
            return Err(SweepError::Spec("sweep needs at least one value".into()));
        }
        if self.metrics.is_empty() {
            return Err(SweepError::Spec("sweep needs at least one metric".into()));
        }
        if let Some((var, values)) = &self.series {
            if *var == self.variable {
                return Err(SweepError::Spec("series variable must differ from the swept one".into()));
            }
            if values.is_empty() {
                return Err(SweepError::Spec("series needs at least one value".into()));
            }
        }
        if let Some(p) = self.pair {
            if p >= cfg.layout.pair_count() {
                return Err(SweepError::Spec(format!(
                    "pair {p} out of range ({} pairs)",
                    cfg.layout.pair_count()
                )));
            }
        }
        Ok(())
    }
}

/// A sweep result with its file name and the scenario it ran on.
#[derive(Debug, Clone)]
pub struct SweepTable {
    pub file_name: String,
    pub config: ScenarioConfig,
    pub table: Table,
}

impl SweepTable {
    pub fn to_csv(&self) -> String {
        self.table.to_csv(&self.config)
    }
}

fn pairs(cfg: &ScenarioConfig, pair: Option<usize>) -> Vec<usize> {
    match pair {
        Some(p) => vec![p],
        None => (0..cfg.layout.pair_count()).collect(),
    }
}

fn analytic_report(cfg: &ScenarioConfig, pair: Option<usize>) -> Result<SecrecyReport<f64>, SweepError> {
    let ev = Evaluator::new(cfg)?;
    let reports = pairs(cfg, pair)
        .into_iter()
        .map(|p| ev.report(&cfg.uav, cfg.power.zeta, p))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(SecrecyReport::mean(&reports).expect("at least one pair"))
}

/// Pair-averaged MC estimates. Pair `p` uses seed `seed + p`, so the per-pair
/// estimates are independent and their standard errors combine in quadrature.
fn mc_estimates(cfg: &ScenarioConfig, pair: Option<usize>, metrics: &[Metric]) -> Result<Vec<Estimate>, SweepError> {
    let ps = pairs(cfg, pair);
    let runs = ps
        .iter()
        .map(|&p| {
            let mut mc = cfg.mc;
            mc.seed = pair_seed(mc.seed, p);
            simulate_rates(cfg, &cfg.uav, cfg.power.zeta, p, &mc)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let n = runs.len() as f64;
    Ok(metrics
        .iter()
        .filter_map(|m| {
            let est: Option<Vec<Estimate>> = runs.iter().map(|r| m.monte_carlo(r)).collect();
            est.map(|es| Estimate {
                mean: es.iter().map(|e| e.mean).sum::<f64>() / n,
                se: es.iter().map(|e| e.se * e.se).sum::<f64>().sqrt() / n,
            })
        })
        .collect())
}

fn sweep_table(
    cfg: &ScenarioConfig,
    spec: &SweepSpec,
    with_mc: bool,
    series: Option<(SweepVariable, f64)>,
) -> Result<SweepTable, SweepError> {
    let base = match series {
        Some((var, v)) => var.apply(cfg, v)?,
        None => cfg.clone(),
    };
    let mut columns = vec![spec.variable.name().to_string()];
    columns.extend(spec.metrics.iter().map(|m| m.name().to_string()));
    if with_mc {
        for m in spec.metrics.iter().filter(|m| m.monte_carlo_available()) {
            columns.push(format!("mc_{}_mean", m.name()));
            columns.push(format!("mc_{}_se", m.name()));
        }
    }
    let mut table = Table::new(columns);
    table.notes.push(format!("sweep: {}", spec.variable));
    if let Some((var, v)) = series {
        table.notes.push(format!("series: {var} = {}", format_value(v)));
    }
    table.notes.push(match spec.pair {
        Some(p) => format!("pair: {p}"),
        None => "pair: mean over all pairs".into(),
    });
    if with_mc {
        table.notes.push(format!(
            "monte carlo: {} trials, seed {} (+ pair index)",
            base.mc.trials, base.mc.seed
        ));
    }
    for &value in &spec.values {
        let point = spec.variable.apply(&base, value)?;
        let report = analytic_report(&point, spec.pair)?;
        let mut row = vec![value];
        row.extend(spec.metrics.iter().map(|m| m.analytic(&report)));
        if with_mc {
            for e in mc_estimates(&point, spec.pair, &spec.metrics)? {
                row.push(e.mean);
                row.push(e.se);
            }
        }
        table.rows.push(row);
    }
    let mut file_name = format!("sweep_{}", spec.variable);
    if let Some((var, v)) = series {
        file_name.push_str(&format!("_{var}_{v}"));
    }
    file_name.push_str(".csv");
    Ok(SweepTable {
        file_name,
        config: base,
        table,
    })
}

/// Runs the sweep: one table, or one per series value.
pub fn run_sweep(cfg: &ScenarioConfig, spec: &SweepSpec, with_mc: bool) -> Result<Vec<SweepTable>, SweepError> {
    spec.validate(cfg)?;
    match &spec.series {
        None => Ok(vec![sweep_table(cfg, spec, with_mc, None)?]),
        Some((var, values)) => values
            .iter()
            .map(|&v| sweep_table(cfg, spec, with_mc, Some((*var, v))))
            .collect(),
    }
}

/// Optimizer run with its trace table and summary text.
#[derive(Debug, Clone)]
pub struct OptimizeArtifacts {
    pub result: OptResult,
    pub trace: Table,
    pub summary: String,
}

/// Runs the alternating optimizer on the closed-form WSSR, or on the Monte
/// Carlo WSSR when `mc_objective` is set (slow; for cross-checking only).
pub fn run_optimize(cfg: &ScenarioConfig, mc_objective: bool) -> Result<OptimizeArtifacts, SweepError> {
    let result = if mc_objective {
        let objective = |p: &crate::geometry::Position3D<f64>, z: f64| mc_wssr(cfg, p, z, &cfg.mc);
        alternating_optimize_by(objective, cfg.uav, cfg.power.zeta, &cfg.search, &cfg.optimizer)?
    } else {
        alternating_optimize(cfg, &cfg.search, &cfg.optimizer)?
    };
    let mut trace = Table::new(
        ["iteration", "x", "y", "z", "zeta", "wssr"]
            .iter()
            .map(|s| s.to_string())
            .collect(),
    );
    trace.notes.push(format!(
        "alternating optimization trace, {} objective",
        if mc_objective { "monte carlo" } else { "closed-form" }
    ));
    for e in &result.trace {
        trace
            .rows
            .push(vec![e.iteration as f64, e.uav.x, e.uav.y, e.uav.z, e.zeta, e.wssr]);
    }
    let u = result.uav_star;
    let summary = format!(
        "uav_star = [{}, {}, {}]\nzeta_star = {}\nwssr_star = {}\niterations = {}\nconverged = {}\n",
        format_value(u.x),
        format_value(u.y),
        format_value(u.z),
        format_value(result.zeta_star),
        format_value(result.wssr_star),
        result.iterations,
        result.converged
    );
    Ok(OptimizeArtifacts { result, trace, summary })
}
