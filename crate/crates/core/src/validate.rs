//! Acceptance suite run by the `validate` verb. Each criterion reports its
//! individual checks (measured value against tolerance) and its runtime
//! against a budget.

use std::fmt::Write as _;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ContinuousCDF, Gamma};

use crate::closed_form::{channel_laws, Evaluator};
use crate::config::{ScenarioConfig, Weights};
use crate::monte_carlo::{sample_user_power, simulate_rates, EvePhaseModel, Execution};
use crate::optimizer::{alternating_optimize, axis_grid, exhaustive_grid, grid_search_uav, gss_zeta};
use crate::quadrature::{laguerre_rule, mgf_capacity};
use crate::rf_stats::{user_gamma_params, GammaChannelParams, PhaseErrorModel};
use crate::sweep::{run_sweep, Metric, SweepSpec, SweepVariable};

/// Test hooks that corrupt the analytic model (negative controls).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidationHooks {
    /// Multiplies every Gamma spread before comparison against sampled data.
    pub spread_scale: f64,
}

impl Default for ValidationHooks {
    fn default() -> Self {
        Self { spread_scale: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    AtMost,
    LessThan,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub label: String,
    pub measured: f64,
    pub tolerance: f64,
    pub relation: Relation,
}

impl Check {
    fn at_most(label: impl Into<String>, measured: f64, tolerance: f64) -> Self {
        Self {
            label: label.into(),
            measured,
            tolerance,
            relation: Relation::AtMost,
        }
    }

    fn less_than(label: impl Into<String>, measured: f64, tolerance: f64) -> Self {
        Self {
            label: label.into(),
            measured,
            tolerance,
            relation: Relation::LessThan,
        }
    }

    /// Number of violations, required to be zero.
    fn count(label: impl Into<String>, violations: usize) -> Self {
        Self::at_most(label, violations as f64, 0.0)
    }

    pub fn pass(&self) -> bool {
        match self.relation {
            Relation::AtMost => self.measured <= self.tolerance,
            Relation::LessThan => self.measured < self.tolerance,
        }
    }
}

#[derive(Debug, Clone)]
pub struct CriterionResult {
    pub id: u8,
    pub title: &'static str,
    pub checks: Vec<Check>,
    pub elapsed: Duration,
    pub budget: Duration,
    /// Set when the criterion could not run at all.
    pub error: Option<String>,
}

impl CriterionResult {
    pub fn within_budget(&self) -> bool {
        self.elapsed <= self.budget
    }

    pub fn pass(&self) -> bool {
        self.error.is_none() && self.within_budget() && self.checks.iter().all(Check::pass)
    }

    pub fn summary_line(&self) -> String {
        let failed = self.checks.iter().filter(|c| !c.pass()).count();
        format!(
            "{} criterion {}: {} ({}/{} checks, {:.2}s of {}s)",
            if self.pass() { "PASS" } else { "FAIL" },
            self.id,
            self.title,
            self.checks.len() - failed,
            self.checks.len(),
            self.elapsed.as_secs_f64(),
            self.budget.as_secs()
        )
    }
}

#[derive(Debug, Clone)]
pub struct ValidationReport {
    pub criteria: Vec<CriterionResult>,
}

impl ValidationReport {
    pub fn pass(&self) -> bool {
        self.criteria.iter().all(CriterionResult::pass)
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for c in &self.criteria {
            let _ = writeln!(out, "{}", c.summary_line());
            if let Some(e) = &c.error {
                let _ = writeln!(out, "    error: {e}");
            }
            for k in &c.checks {
                let op = match k.relation {
                    Relation::AtMost => "<=",
                    Relation::LessThan => "<",
                };
                let _ = writeln!(
                    out,
                    "    [{}] {}: {:.6e} {op} {:.6e}",
                    if k.pass() { "ok" } else { "x" },
                    k.label,
                    k.measured,
                    k.tolerance
                );
            }
        }
        let passed = self.criteria.iter().filter(|c| c.pass()).count();
        let _ = writeln!(out, "{passed}/{} criteria passed", self.criteria.len());
        out
    }
}

type Checks = Result<Vec<Check>, String>;

fn timed(id: u8, title: &'static str, budget_s: u64, f: impl FnOnce() -> Checks) -> CriterionResult {
    let t0 = Instant::now();
    let outcome = f();
    let elapsed = t0.elapsed();
    let (checks, error) = match outcome {
        Ok(c) => (c, None),
        Err(e) => (Vec::new(), Some(e)),
    };
    CriterionResult {
        id,
        title,
        checks,
        elapsed,
        budget: Duration::from_secs(budget_s),
        error,
    }
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

/// Runs all nine criteria on `cfg`.
pub fn run_validate(cfg: &ScenarioConfig, hooks: &ValidationHooks) -> ValidationReport {
    ValidationReport {
        criteria: vec![
            criterion_user_capacity(cfg, hooks),
            criterion_eve_capacity(cfg),
            criterion_gamma_fit(cfg, hooks),
            criterion_quadrature(cfg),
            criterion_figure_shapes(cfg),
            criterion_gss(cfg),
            criterion_grid_search(cfg),
            criterion_weights(cfg),
            criterion_determinism(cfg),
        ],
    }
}

fn pair_labels(cfg: &ScenarioConfig) -> impl Iterator<Item = usize> {
    0..cfg.layout.pair_count()
}

/// Closed-form user capacities against Monte Carlo at 10, 20 and 30 dBm.
pub fn criterion_user_capacity(cfg: &ScenarioConfig, hooks: &ValidationHooks) -> CriterionResult {
    timed(1, "closed-form user capacities match Monte Carlo", 30, || {
        let mut checks = Vec::new();
        for ps in [10.0, 20.0, 30.0] {
            let mut c = cfg.clone();
            c.power.ps_dbm = ps;
            let laws = channel_laws(&c).map_err(err)?.with_spread_scaled(hooks.spread_scale);
            let ev = Evaluator::new(&c).map_err(err)?.with_laws(laws);
            for p in pair_labels(&c) {
                let r = ev.report(&c.uav, c.power.zeta, p).map_err(err)?;
                let mc = simulate_rates(&c, &c.uav, c.power.zeta, p, &c.mc).map_err(err)?;
                for (name, cf, est) in [("c_user_r", r.c_user_r, mc.c_user_r), ("c_user_t", r.c_user_t, mc.c_user_t)] {
                    let tol = (0.02 * est.mean.abs()).max(3.0 * est.se);
                    checks.push(Check::at_most(
                        format!("|{name} - mc| at {ps} dBm, pair {p}"),
                        (cf - est.mean).abs(),
                        tol,
                    ));
                }
            }
        }
        Ok(checks)
    })
}

/// Closed-form eavesdropper capacities against exact-phase Monte Carlo.
pub fn criterion_eve_capacity(cfg: &ScenarioConfig) -> CriterionResult {
    timed(2, "closed-form eve capacities within 10% of exact-phase Monte Carlo", 30, || {
        let mut checks = Vec::new();
        for kappa in [10.0, 20.0] {
            let mut c = cfg.clone();
            c.phase = PhaseErrorModel::new(kappa).map_err(err)?;
            c.elements = 20;
            let mut mc = c.mc;
            mc.eve_phase_model = EvePhaseModel::ExactUniform;
            let ev = Evaluator::new(&c).map_err(err)?;
            for p in pair_labels(&c) {
                let r = ev.report(&c.uav, c.power.zeta, p).map_err(err)?;
                let sim = simulate_rates(&c, &c.uav, c.power.zeta, p, &mc).map_err(err)?;
                for (name, cf, est) in [("c_eve_r", r.c_eve_r, sim.c_eve_r), ("c_eve_t", r.c_eve_t, sim.c_eve_t)] {
                    checks.push(Check::at_most(
                        format!("relative error of {name} at kappa {kappa}, pair {p}"),
                        (cf - est.mean).abs() / est.mean.abs().max(f64::MIN_POSITIVE),
                        0.10,
                    ));
                }
            }
        }
        Ok(checks)
    })
}

/// Kolmogorov-Smirnov distance between samples and a Gamma law.
pub fn ks_distance(samples: &mut [f64], params: &GammaChannelParams<f64>) -> Result<f64, String> {
    let law = Gamma::new(params.shape, params.rate()).map_err(err)?;
    samples.sort_by(f64::total_cmp);
    let n = samples.len() as f64;
    Ok(samples.iter().enumerate().fold(0.0f64, |d, (i, &x)| {
        let f = law.cdf(x);
        d.max(f - i as f64 / n).max((i + 1) as f64 / n - f)
    }))
}

/// Gamma fit of the sampled user cascaded power at 16 and 64 elements.
pub fn criterion_gamma_fit(cfg: &ScenarioConfig, hooks: &ValidationHooks) -> CriterionResult {
    timed(3, "Gamma law fits sampled user channel power", 20, || {
        let mut checks = Vec::new();
        let model = PhaseErrorModel::new(20.0).map_err(err)?;
        for elements in [16, 64] {
            let params = user_gamma_params(elements, 2.0, 2.0, &model)
                .map_err(err)?
                .with_spread_scaled(hooks.spread_scale);
            let mut xs = sample_user_power(elements, 2.0, 2.0, 20.0, cfg.mc.trials, cfg.mc.seed).map_err(err)?;
            checks.push(Check::less_than(
                format!("KS distance at {elements} elements"),
                ks_distance(&mut xs, &params)?,
                0.02,
            ));
        }
        Ok(checks)
    })
}

/// `E₁(x)` by its convergent series (adequate for `x <= 2`).
fn exp_integral_e1(x: f64) -> f64 {
    const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
    let mut sum = 0.0;
    let mut term = 1.0;
    for k in 1..60 {
        term *= -x / k as f64;
        sum += term / k as f64;
    }
    -EULER_GAMMA - x.ln() - sum
}

fn unit_law(shape: f64) -> GammaChannelParams<f64> {
    GammaChannelParams {
        shape,
        spread: 1.0,
        alpha2: 1.0,
        phi1: 1.0,
        phi2: 1.0,
        eve_coherence: None,
        elements: 1,
    }
}

/// Gauss-Laguerre capacity against the exponential-integral closed form and
/// against itself at doubled order.
pub fn criterion_quadrature(cfg: &ScenarioConfig) -> CriterionResult {
    timed(4, "Gauss-Laguerre capacity accuracy and convergence", 5, || {
        let rule = laguerre_rule::<f64>(cfg.quadrature.order).map_err(err)?;
        let want = std::f64::consts::E * exp_integral_e1(1.0) / std::f64::consts::LN_2;
        let got = mgf_capacity(&unit_law(1.0), 1.0, 0.0, &rule);
        let mut checks = vec![Check::at_most("|capacity - e E1(1)/ln 2|, unit law", (got - want).abs(), 1e-6)];
        let r50 = laguerre_rule::<f64>(50).map_err(err)?;
        let r100 = laguerre_rule::<f64>(100).map_err(err)?;
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.mc.seed);
        let mut worst = 0.0f64;
        for _ in 0..100 {
            let shape = rng.random_range(0.5..50.0);
            let total: f64 = rng.random_range(0.01..1.0);
            let frac: f64 = rng.random_range(0.0..1.0);
            let law = unit_law(shape);
            let (k_int, k_sig) = (total * frac, total * (1.0 - frac) + 1e-9);
            let a = mgf_capacity(&law, k_sig, k_int, &r50);
            let b = mgf_capacity(&law, k_sig, k_int, &r100);
            worst = worst.max((a - b).abs());
        }
        checks.push(Check::less_than("max |order 50 - order 100| over 100 random laws", worst, 1e-6));
        Ok(checks)
    })
}

fn nondecreasing_violations(xs: &[f64]) -> usize {
    xs.windows(2).filter(|w| w[1] < w[0] - 1e-9 * w[0].abs().max(1e-12)).count()
}

fn column(tables: &[crate::sweep::SweepTable], i: usize, name: &str) -> Vec<f64> {
    tables[i].table.column(name).expect("metric present")
}

/// Monotonicity and peak shapes of the secrecy-rate curves.
pub fn criterion_figure_shapes(cfg: &ScenarioConfig) -> CriterionResult {
    timed(5, "secrecy-rate curve shapes", 60, || {
        let mut checks = Vec::new();
        let ps_grid = axis_grid(0.0, 50.0, 5.0);
        let mut spec = SweepSpec::new(SweepVariable::PsDbm, ps_grid.clone());
        spec.metrics = vec![Metric::RSecR, Metric::RSecT];
        let base = run_sweep(cfg, &spec, false).map_err(err)?;
        let r = column(&base, 0, "r_sec_r");
        let t = column(&base, 0, "r_sec_t");
        checks.push(Check::count("reflect secrecy decreases along power", nondecreasing_violations(&r)));
        let (imax, tmax) = t
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |(bi, bv), (i, &v)| if v > bv { (i, v) } else { (bi, bv) });
        let interior = imax > 0 && imax + 1 < t.len();
        checks.push(Check::count("transmit secrecy peak not interior", usize::from(!interior)));
        checks.push(Check::less_than(
            "transmit secrecy at 50 dBm relative to its peak",
            t[t.len() - 1] / tmax,
            1.0,
        ));

        let mut spec = SweepSpec::new(SweepVariable::PsDbm, axis_grid(0.0, 25.0, 5.0));
        spec.metrics = vec![Metric::RSecR, Metric::RSecT];
        spec.series = Some((SweepVariable::Kappa, vec![10.0, 15.0, 20.0]));
        let by_kappa = run_sweep(cfg, &spec, false).map_err(err)?;
        for name in ["r_sec_r", "r_sec_t"] {
            let mut violations = 0;
            for i in 1..by_kappa.len() {
                let lo = column(&by_kappa, i - 1, name);
                let hi = column(&by_kappa, i, name);
                violations += lo.iter().zip(&hi).filter(|(a, b)| **b < **a - 1e-9 * a.abs()).count();
            }
            checks.push(Check::count(format!("{name} decreases with kappa at <= 25 dBm"), violations));
        }

        let mut spec = SweepSpec::new(SweepVariable::Elements, axis_grid(10.0, 100.0, 10.0));
        spec.metrics = vec![Metric::RSecR, Metric::RSecT];
        spec.series = Some((SweepVariable::PsDbm, vec![10.0, 15.0]));
        let by_m = run_sweep(cfg, &spec, false).map_err(err)?;
        for (i, ps) in [10, 15].iter().enumerate() {
            for name in ["r_sec_r", "r_sec_t"] {
                checks.push(Check::count(
                    format!("{name} decreases with elements at {ps} dBm"),
                    nondecreasing_violations(&column(&by_m, i, name)),
                ));
            }
        }
        Ok(checks)
    })
}

/// Number of strict interior local maxima, ignoring flat stretches.
fn interior_peaks(ys: &[f64]) -> usize {
    let signs: Vec<i8> = ys
        .windows(2)
        .filter_map(|w| match w[1].partial_cmp(&w[0]) {
            Some(std::cmp::Ordering::Greater) => Some(1),
            Some(std::cmp::Ordering::Less) => Some(-1),
            _ => None,
        })
        .collect();
    signs.windows(2).filter(|s| s[0] == 1 && s[1] == -1).count()
}

/// Golden-section result against a fine grid over the reflect fraction.
pub fn criterion_gss(cfg: &ScenarioConfig) -> CriterionResult {
    timed(6, "golden-section search matches the fine-grid maximizer", 20, || {
        let ev = Evaluator::new(cfg).map_err(err)?;
        let grid = axis_grid(0.0, 1.0, 1e-3);
        let values: Vec<f64> = grid.iter().map(|&z| ev.wssr(&cfg.uav, z)).collect();
        let (i, _) = values
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |(bi, bv), (i, &v)| if v > bv { (i, v) } else { (bi, bv) });
        let oracle = grid[i];
        let gss = gss_zeta(|z| ev.wssr(&cfg.uav, z), &cfg.optimizer);
        Ok(vec![
            Check::at_most("|gss zeta - grid zeta|", (gss.zeta - oracle).abs(), 1e-2),
            Check::at_most("|interior peaks - 1|", (interior_peaks(&values) as f64 - 1.0).abs(), 0.0),
            Check::less_than("grid maximizer inside (0, 0.5)", if oracle > 0.0 { oracle } else { f64::INFINITY }, 0.5),
        ])
    })
}

/// Coordinate ascent against exhaustive enumeration, plus the alternating
/// optimizer's trace.
pub fn criterion_grid_search(cfg: &ScenarioConfig) -> CriterionResult {
    timed(7, "grid search matches enumeration and alternation converges", 60, || {
        let ev = Evaluator::new(cfg).map_err(err)?;
        let zeta = cfg.power.zeta;
        let objective = |p: &crate::geometry::Position3D<f64>| ev.wssr(p, zeta);
        let ascent = grid_search_uav(&cfg.search, &cfg.optimizer, &cfg.uav, objective).map_err(err)?;
        let (best, best_value) = exhaustive_grid(&cfg.search, objective).map_err(err)?;
        let gap = (best_value - ascent.value).max(0.0);
        let moved = crate::geometry::distance(&best, &ascent.position);
        let ao = alternating_optimize(cfg, &cfg.search, &cfg.optimizer).map_err(err)?;
        let w: Vec<f64> = ao.trace.iter().map(|e| e.wssr).collect();
        Ok(vec![
            Check::at_most("WSSR gap between ascent and enumeration", gap, 0.0),
            Check::at_most("distance between ascent and enumeration maximizers", moved, 0.0),
            Check::count("trace WSSR decreases", w.windows(2).filter(|p| p[1] < p[0]).count()),
            Check::count("alternation did not converge", usize::from(!ao.converged)),
            Check::at_most("alternation iterations", ao.iterations as f64, cfg.optimizer.k_max as f64),
        ])
    })
}

/// Biased versus equal weights over the reflect-fraction range.
pub fn criterion_weights(cfg: &ScenarioConfig) -> CriterionResult {
    timed(8, "weight settings order the WSSR as the secrecy rates do", 20, || {
        let mut c = cfg.clone();
        c.elements = 20;
        c.phase = PhaseErrorModel::new(20.0).map_err(err)?;
        c.power.rho = 0.3;
        let biased = Evaluator::new(&c).map_err(err)?.with_weights(Weights { w1: 0.45, w2: 0.55 });
        let equal = Evaluator::new(&c).map_err(err)?.with_weights(Weights { w1: 0.5, w2: 0.5 });
        let mut non_finite = 0;
        let mut misordered = 0;
        let (mut peak_b, mut peak_e) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
        for zeta in axis_grid(0.0, 1.0, 0.05) {
            let b = biased.mean_report(&c.uav, zeta).map_err(err)?;
            let e = equal.mean_report(&c.uav, zeta).map_err(err)?;
            non_finite += usize::from(!b.wssr.is_finite()) + usize::from(!e.wssr.is_finite());
            if b.r_sec_r > b.r_sec_t && b.wssr <= e.wssr {
                misordered += 1;
            }
            peak_b = peak_b.max(b.wssr);
            peak_e = peak_e.max(e.wssr);
        }
        Ok(vec![
            Check::count("non-finite WSSR values", non_finite),
            Check::count("biased WSSR not above equal where reflect secrecy leads", misordered),
            Check::at_most("peak WSSR, weights 0.45/0.55", peak_b, f64::INFINITY),
            Check::at_most("peak WSSR, weights 0.5/0.5", peak_e, f64::INFINITY),
        ])
    })
}

/// Repeatability of CSV output and serial/parallel agreement.
pub fn criterion_determinism(cfg: &ScenarioConfig) -> CriterionResult {
    timed(9, "identical inputs give identical outputs", 10, || {
        let mut c = cfg.clone();
        c.mc.trials = c.mc.trials.min(5_000);
        let mut spec = SweepSpec::new(SweepVariable::PsDbm, vec![10.0, 20.0]);
        spec.metrics = vec![Metric::CUserR, Metric::RSecT];
        let a: Vec<String> = run_sweep(&c, &spec, true).map_err(err)?.iter().map(|t| t.to_csv()).collect();
        let b: Vec<String> = run_sweep(&c, &spec, true).map_err(err)?.iter().map(|t| t.to_csv()).collect();
        let differing_bytes = a
            .iter()
            .zip(&b)
            .map(|(x, y)| x.bytes().zip(y.bytes()).filter(|(p, q)| p != q).count() + x.len().abs_diff(y.len()))
            .sum::<usize>();
        let mut serial = c.mc;
        serial.execution = Execution::Serial;
        let mut parallel = c.mc;
        parallel.execution = Execution::Parallel;
        let s = simulate_rates(&c, &c.uav, c.power.zeta, 0, &serial).map_err(err)?;
        let p = simulate_rates(&c, &c.uav, c.power.zeta, 0, &parallel).map_err(err)?;
        let diff = [
            (s.c_user_r, p.c_user_r),
            (s.c_eve_r, p.c_eve_r),
            (s.c_user_t, p.c_user_t),
            (s.c_eve_t, p.c_eve_t),
            (s.r_sec_r, p.r_sec_r),
            (s.r_sec_t, p.r_sec_t),
        ]
        .iter()
        .map(|(x, y)| (x.mean - y.mean).abs().max((x.se - y.se).abs()))
        .fold(0.0f64, f64::max);
        Ok(vec![
            Check::count("differing CSV bytes across repeated runs", differing_bytes),
            Check::at_most("max serial/parallel difference", diff, 1e-10),
        ])
    })
}
