//! WSSR maximization: grid coordinate ascent over the UAV position,
//! golden-section search over the reflect fraction, and the alternating loop
//! that combines them.

use rayon::prelude::*;
use thiserror::Error;

use crate::closed_form::{AnalysisError, Evaluator};
use crate::config::ScenarioConfig;
use crate::geometry::Position3D;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OptimizerError {
    #[error("invalid search box: {0}")]
    InvalidBox(String),
    #[error("invalid optimizer settings: {0}")]
    InvalidSettings(String),
    #[error("objective is not finite anywhere on the grid")]
    NoFinitePoint,
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
}

/// Axis-aligned UAV search region with a common grid step (meters).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchBox {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
    pub z_min: f64,
    pub z_max: f64,
    pub step: f64,
}

impl SearchBox {
    /// Degenerate axes (`min == max`) are allowed.
    pub fn validate(&self) -> Result<(), OptimizerError> {
        let bad = |m: String| Err(OptimizerError::InvalidBox(m));
        if !(self.step > 0.0) || !self.step.is_finite() {
            return bad(format!("step {} must be > 0", self.step));
        }
        for (name, lo, hi) in [
            ("x", self.x_min, self.x_max),
            ("y", self.y_min, self.y_max),
            ("z", self.z_min, self.z_max),
        ] {
            if !lo.is_finite() || !hi.is_finite() || lo > hi {
                return bad(format!("{name} range [{lo}, {hi}] is empty"));
            }
        }
        Ok(())
    }

    pub fn single_point(p: Position3D<f64>) -> Self {
        Self {
            x_min: p.x,
            x_max: p.x,
            y_min: p.y,
            y_max: p.y,
            z_min: p.z,
            z_max: p.z,
            step: 1.0,
        }
    }

    pub fn x_grid(&self) -> Vec<f64> {
        axis_grid(self.x_min, self.x_max, self.step)
    }

    pub fn y_grid(&self) -> Vec<f64> {
        axis_grid(self.y_min, self.y_max, self.step)
    }

    pub fn z_grid(&self) -> Vec<f64> {
        axis_grid(self.z_min, self.z_max, self.step)
    }

    /// Every grid point, x slowest and z fastest.
    pub fn points(&self) -> Vec<Position3D<f64>> {
        let (xs, ys, zs) = (self.x_grid(), self.y_grid(), self.z_grid());
        let mut out = Vec::with_capacity(xs.len() * ys.len() * zs.len());
        for &x in &xs {
            for &y in &ys {
                for &z in &zs {
                    out.push(Position3D::new(x, y, z));
                }
            }
        }
        out
    }
}

/// `min:step:max`, endpoint included when it lies on the lattice.
pub fn axis_grid(min: f64, max: f64, step: f64) -> Vec<f64> {
    let n = ((max - min) / step + 1e-9).floor() as usize + 1;
    (0..n).map(|i| min + i as f64 * step).collect()
}

fn snap(grid: &[f64], v: f64) -> usize {
    grid.iter()
        .enumerate()
        .min_by(|a, b| (a.1 - v).abs().total_cmp(&(b.1 - v).abs()))
        .map(|(i, _)| i)
        .unwrap_or(0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizerSettings {
    /// Position convergence threshold.
    pub eps_position: f64,
    /// Sweep / outer-round limit.
    pub k_max: usize,
    /// Golden-section interval tolerance.
    pub eps_zeta: f64,
    /// Golden-section iteration limit.
    pub n_max_gss: usize,
}

impl Default for OptimizerSettings {
    fn default() -> Self {
        Self {
            eps_position: 1e-3,
            k_max: 50,
            eps_zeta: 1e-4,
            n_max_gss: 100,
        }
    }
}

impl OptimizerSettings {
    pub fn validate(&self) -> Result<(), OptimizerError> {
        let bad = |m: &str| Err(OptimizerError::InvalidSettings(m.into()));
        if !(self.eps_position > 0.0) {
            return bad("eps_position must be > 0");
        }
        if !(self.eps_zeta > 0.0) {
            return bad("eps_zeta must be > 0");
        }
        if self.k_max == 0 || self.n_max_gss == 0 {
            return bad("iteration limits must be >= 1");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridResult {
    pub position: Position3D<f64>,
    pub value: f64,
    pub sweeps: usize,
    pub evaluations: usize,
    pub converged: bool,
}

#[derive(Clone, Copy)]
enum Axis {
    X,
    Y,
    Z,
}

/// Grid coordinate ascent: starting from the grid point nearest `start`,
/// each sweep maximizes along z, then x, then y, and stops once a sweep moves
/// the UAV by less than `eps_position` or after `k_max` sweeps.
///
/// Along an axis the incumbent is kept unless a point is strictly better;
/// among equally good challengers the smallest coordinate wins.
pub fn grid_search_uav<F>(
    search: &SearchBox,
    settings: &OptimizerSettings,
    start: &Position3D<f64>,
    objective: F,
) -> Result<GridResult, OptimizerError>
where
    F: Fn(&Position3D<f64>) -> f64 + Sync,
{
    search.validate()?;
    settings.validate()?;
    let grids = [search.x_grid(), search.y_grid(), search.z_grid()];
    let mut idx = [
        snap(&grids[0], start.x),
        snap(&grids[1], start.y),
        snap(&grids[2], start.z),
    ];
    let at = |idx: &[usize; 3]| Position3D::new(grids[0][idx[0]], grids[1][idx[1]], grids[2][idx[2]]);
    let eval = |p: &Position3D<f64>| {
        let v = objective(p);
        if v.is_nan() {
            f64::NEG_INFINITY
        } else {
            v
        }
    };

    let mut best = eval(&at(&idx));
    let mut evaluations = 1;
    let mut sweeps = 0;
    let mut converged = false;
    while sweeps < settings.k_max {
        sweeps += 1;
        let before = at(&idx);
        for axis in [Axis::Z, Axis::X, Axis::Y] {
            let a = match axis {
                Axis::X => 0,
                Axis::Y => 1,
                Axis::Z => 2,
            };
            let values: Vec<f64> = (0..grids[a].len())
                .into_par_iter()
                .map(|i| {
                    let mut probe = idx;
                    probe[a] = i;
                    eval(&at(&probe))
                })
                .collect();
            evaluations += values.len();
            let (arg, top) = values
                .iter()
                .enumerate()
                .fold((idx[a], best), |(bi, bv), (i, &v)| if v > bv { (i, v) } else { (bi, bv) });
            if top > best {
                idx[a] = arg;
                best = top;
            }
        }
        let after = at(&idx);
        let moved = crate::geometry::distance(&before, &after);
        if moved < settings.eps_position {
            converged = true;
            break;
        }
    }
    if best == f64::NEG_INFINITY {
        return Err(OptimizerError::NoFinitePoint);
    }
    Ok(GridResult {
        position: at(&idx),
        value: best,
        sweeps,
        evaluations,
        converged,
    })
}

/// Exhaustive maximization over every grid point (lexicographically
/// smallest maximizer on ties).
pub fn exhaustive_grid<F>(search: &SearchBox, objective: F) -> Result<(Position3D<f64>, f64), OptimizerError>
where
    F: Fn(&Position3D<f64>) -> f64 + Sync,
{
    search.validate()?;
    let points = search.points();
    let values: Vec<f64> = points.par_iter().map(&objective).collect();
    let (i, v) = values
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |(bi, bv), (i, &v)| if v > bv { (i, v) } else { (bi, bv) });
    if v == f64::NEG_INFINITY {
        return Err(OptimizerError::NoFinitePoint);
    }
    Ok((points[i], v))
}

/// `(√5 − 1) / 2`.
pub const GOLDEN: f64 = 0.618_033_988_749_894_9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GssResult {
    pub zeta: f64,
    pub iterations: usize,
    pub width: f64,
}

/// Golden-section maximization on `[0, 1]`; returns the final bracket
/// midpoint.
pub fn gss_zeta<F: Fn(f64) -> f64>(objective: F, settings: &OptimizerSettings) -> GssResult {
    let (mut a, mut b) = (0.0f64, 1.0f64);
    let mut c = b - GOLDEN * (b - a);
    let mut d = a + GOLDEN * (b - a);
    let mut fc = objective(c);
    let mut fd = objective(d);
    let mut iterations = 0;
    while b - a > settings.eps_zeta && iterations < settings.n_max_gss {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - GOLDEN * (b - a);
            fc = objective(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + GOLDEN * (b - a);
            fd = objective(d);
        }
        iterations += 1;
    }
    GssResult {
        zeta: 0.5 * (a + b),
        iterations,
        width: b - a,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceEntry {
    pub iteration: usize,
    pub uav: Position3D<f64>,
    pub zeta: f64,
    pub wssr: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptResult {
    pub uav_star: Position3D<f64>,
    pub zeta_star: f64,
    pub wssr_star: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Entry 0 is the starting point.
    pub trace: Vec<TraceEntry>,
}

/// Alternates the position grid search and the golden-section search from
/// the configured UAV position and `zeta`. A sub-step result is accepted
/// only if it does not lower the WSSR, so the trace never decreases.
pub fn alternating_optimize(
    cfg: &ScenarioConfig,
    search: &SearchBox,
    settings: &OptimizerSettings,
) -> Result<OptResult, OptimizerError> {
    let evaluator = Evaluator::new(cfg)?;
    alternating_optimize_with(&evaluator, cfg.uav, cfg.power.zeta, search, settings)
}

/// [`alternating_optimize`] with a prepared evaluator and starting point.
pub fn alternating_optimize_with(
    evaluator: &Evaluator,
    start: Position3D<f64>,
    zeta0: f64,
    search: &SearchBox,
    settings: &OptimizerSettings,
) -> Result<OptResult, OptimizerError> {
    alternating_optimize_by(|p, z| evaluator.wssr(p, z), start, zeta0, search, settings)
}

/// Alternating optimization of an arbitrary objective `(uav, zeta) -> WSSR`.
pub fn alternating_optimize_by<F>(
    objective: F,
    start: Position3D<f64>,
    zeta0: f64,
    search: &SearchBox,
    settings: &OptimizerSettings,
) -> Result<OptResult, OptimizerError>
where
    F: Fn(&Position3D<f64>, f64) -> f64 + Sync,
{
    search.validate()?;
    settings.validate()?;
    let mut uav = start;
    let mut zeta = zeta0;
    let mut wssr = objective(&uav, zeta);
    let mut trace = vec![TraceEntry {
        iteration: 0,
        uav,
        zeta,
        wssr,
    }];
    let mut converged = false;
    let mut iterations = 0;
    while iterations < settings.k_max {
        iterations += 1;
        let previous = wssr;

        let grid = grid_search_uav(search, settings, &uav, |p| objective(p, zeta))?;
        if grid.value >= wssr {
            uav = grid.position;
            wssr = grid.value;
        }

        let gss = gss_zeta(|z| objective(&uav, z), settings);
        let candidate = objective(&uav, gss.zeta);
        if candidate >= wssr {
            zeta = gss.zeta;
            wssr = candidate;
        }

        trace.push(TraceEntry {
            iteration: iterations,
            uav,
            zeta,
            wssr,
        });
        if (wssr - previous).abs() < settings.eps_position {
            converged = true;
            break;
        }
    }
    Ok(OptResult {
        uav_star: uav,
        zeta_star: zeta,
        wssr_star: wssr,
        iterations,
        converged,
        trace,
    })
}
