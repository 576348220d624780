//! Acceptance criteria 1-9, each checked against an oracle implemented here
//! rather than in the library. Prints one PASS/FAIL line per criterion.
//!
//! Criteria 2 and 3 are known to be unattainable with the analytic model as
//! specified (see the decisions ledger). They are run at full tolerance and
//! reported as FAIL; only an unexpected failure of another criterion makes
//! the process exit nonzero.

use std::f64::consts::{E, LN_2, PI};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};
use statrs::distribution::{ContinuousCDF, Gamma as GammaLaw};

use starris::closed_form::Evaluator;
use starris::config::{ScenarioConfig, Weights};
use starris::geometry::Position3D;
use starris::monte_carlo::{simulate_rates, Execution};
use starris::optimizer::{alternating_optimize, grid_search_uav, gss_zeta};
use starris::quadrature::{laguerre_rule, mgf_capacity};
use starris::rf_stats::{user_gamma_params, GammaChannelParams, PhaseErrorModel};
use starris::sweep::{run_sweep, Metric, SweepSpec, SweepVariable};

const KNOWN_UNATTAINABLE: [u8; 2] = [2, 3];
const TRIALS: usize = 100_000;

struct Outcome {
    id: u8,
    title: &'static str,
    pass: bool,
    detail: String,
    seconds: f64,
    budget: f64,
}

fn criterion(id: u8, title: &'static str, budget: f64, f: impl FnOnce() -> (bool, String)) -> Outcome {
    let t0 = Instant::now();
    let (ok, detail) = f();
    let seconds = t0.elapsed().as_secs_f64();
    Outcome {
        id,
        title,
        pass: ok && seconds <= budget,
        detail,
        seconds,
        budget,
    }
}

// ---- sampling oracles ----------------------------------------------------

/// Nakagami envelope with unit mean power.
fn nakagami(m: f64, rng: &mut ChaCha8Rng) -> f64 {
    Gamma::new(m, 1.0 / m).unwrap().sample(rng).sqrt()
}

/// Von Mises by rejection from the uniform density.
fn von_mises(kappa: f64, rng: &mut ChaCha8Rng) -> f64 {
    loop {
        let t = rng.random_range(-PI..PI);
        if rng.random::<f64>() < (kappa * (t.cos() - 1.0)).exp() {
            return t;
        }
    }
}

fn power_of_sum(terms: impl Iterator<Item = (f64, f64)>) -> f64 {
    let (re, im) = terms.fold((0.0, 0.0), |(re, im), (a, t)| (re + a * t.cos(), im + a * t.sin()));
    re * re + im * im
}

/// Cascaded powers of the two legitimate users, sharing the first hop.
fn user_powers(elements: usize, m: f64, kappa: f64, trials: usize, seed: u64) -> Vec<(f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..trials)
        .map(|_| {
            let mut r = Vec::with_capacity(elements);
            let mut t = Vec::with_capacity(elements);
            for _ in 0..elements {
                let h = nakagami(m, &mut rng);
                r.push((h * nakagami(m, &mut rng), von_mises(kappa, &mut rng)));
                t.push((h * nakagami(m, &mut rng), von_mises(kappa, &mut rng)));
            }
            (power_of_sum(r.into_iter()), power_of_sum(t.into_iter()))
        })
        .collect()
}

/// Eavesdropper cascaded power with uniform composite phases.
fn eve_powers(elements: usize, m: f64, trials: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..trials)
        .map(|_| {
            let terms: Vec<(f64, f64)> = (0..elements)
                .map(|_| {
                    let a = nakagami(m, &mut rng) * nakagami(m, &mut rng);
                    (a, rng.random_range(-PI..PI))
                })
                .collect();
            power_of_sum(terms.into_iter())
        })
        .collect()
}

fn mean_se(xs: impl Iterator<Item = f64>) -> (f64, f64) {
    let v: Vec<f64> = xs.collect();
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

// ---- geometry oracle -----------------------------------------------------

struct Gains {
    reflect_user: f64,
    transmit_user: f64,
    reflect_eve: f64,
    transmit_eve: f64,
    transmit_user_interference: f64,
    transmit_eve_interference: f64,
}

fn dist(a: &Position3D<f64>, b: &Position3D<f64>) -> f64 {
    ((a.x - b.x).powi(2) + (a.y - b.y).powi(2) + (a.z - b.z).powi(2)).sqrt()
}

fn gains(cfg: &ScenarioConfig, ps_dbm: f64, zeta: f64, pair: usize) -> Gains {
    let p = &cfg.power;
    let l = &cfg.layout;
    let snr = 10f64.powf((ps_dbm - p.n0_dbm) / 10.0);
    let (ur, er) = l.reflect_pairs[pair];
    let (ut, et) = l.transmit_pairs[pair];
    let d_bv = dist(&l.bs, &cfg.uav);
    let path = |node: &Position3D<f64>| (d_bv * dist(&cfg.uav, node)).powf(-p.alpha_pl);
    let reflect = p.rho * zeta * snr;
    let transmit = (1.0 - p.rho) * (1.0 - zeta) * snr;
    Gains {
        reflect_user: reflect * path(&l.reflect_users[ur]),
        transmit_user: transmit * path(&l.transmit_users[ut]),
        reflect_eve: reflect * path(&l.reflect_eves[er]),
        transmit_eve: transmit * path(&l.transmit_eves[et]),
        transmit_user_interference: reflect * path(&l.transmit_users[ut]),
        transmit_eve_interference: reflect * path(&l.transmit_eves[et]),
    }
}

fn rate(sig: f64, int: f64, x: f64) -> f64 {
    (1.0 + sig * x / (int * x + 1.0)).log2()
}

// ---- criteria ------------------------------------------------------------

fn c1_user_capacity(cfg: &ScenarioConfig) -> (bool, String) {
    let zeta = cfg.power.zeta;
    let mut worst: f64 = 0.0;
    for seed in [1, 2] {
        let xs = user_powers(cfg.elements, cfg.fading.m_bv, cfg.phase.kappa, TRIALS, seed);
        for ps in [10.0, 20.0, 30.0] {
            let mut c = cfg.clone();
            c.power.ps_dbm = ps;
            let ev_ps = Evaluator::new(&c).unwrap();
            for pair in 0..cfg.layout.pair_count() {
                let g = gains(cfg, ps, zeta, pair);
                let r = ev_ps.report(&cfg.uav, zeta, pair).unwrap();
                let (mr, se_r) = mean_se(xs.iter().map(|&(x, _)| rate(g.reflect_user, 0.0, x)));
                let (mt, se_t) = mean_se(
                    xs.iter()
                        .map(|&(_, x)| rate(g.transmit_user, g.transmit_user_interference, x)),
                );
                worst = worst.max((r.c_user_r - mr).abs() / (0.02 * mr).max(3.0 * se_r));
                worst = worst.max((r.c_user_t - mt).abs() / (0.02 * mt).max(3.0 * se_t));
            }
        }
    }
    (
        worst <= 1.0,
        format!("worst |closed form - MC| / max(2%, 3 SE) = {worst:.3} (<= 1), seeds 1 and 2"),
    )
}

fn c2_eve_capacity(cfg: &ScenarioConfig) -> (bool, String) {
    let xs = eve_powers(20, cfg.fading.m_bv, TRIALS, 7);
    let zeta = cfg.power.zeta;
    let mut worst: f64 = 0.0;
    for kappa in [10.0, 20.0] {
        let mut c = cfg.clone();
        c.elements = 20;
        c.phase = PhaseErrorModel::new(kappa).unwrap();
        let ev = Evaluator::new(&c).unwrap();
        for pair in 0..c.layout.pair_count() {
            let g = gains(&c, c.power.ps_dbm, zeta, pair);
            let r = ev.report(&c.uav, zeta, pair).unwrap();
            let (er, _) = mean_se(xs.iter().map(|&x| rate(g.reflect_eve, 0.0, x)));
            let (et, _) = mean_se(xs.iter().map(|&x| rate(g.transmit_eve, g.transmit_eve_interference, x)));
            worst = worst.max((r.c_eve_r - er).abs() / er);
            worst = worst.max((r.c_eve_t - et).abs() / et);
        }
    }
    (worst <= 0.10, format!("worst relative eve-capacity error = {worst:.4} (<= 0.10)"))
}

fn ks(samples: &mut [f64], law: &GammaChannelParams<f64>) -> f64 {
    let cdf = GammaLaw::new(law.shape, law.shape / law.spread).unwrap();
    samples.sort_by(f64::total_cmp);
    let n = samples.len() as f64;
    samples.iter().enumerate().fold(0.0, |d: f64, (i, &x)| {
        let f = cdf.cdf(x);
        d.max(f - i as f64 / n).max((i as f64 + 1.0) / n - f)
    })
}

fn c3_gamma_fit(cfg: &ScenarioConfig) -> (bool, String) {
    let model = PhaseErrorModel::new(20.0).unwrap();
    let mut parts = Vec::new();
    let mut ok = true;
    for elements in [16, 64] {
        let law = user_gamma_params(elements, 2.0, 2.0, &model).unwrap();
        let mut xs: Vec<f64> = user_powers(elements, 2.0, 20.0, TRIALS, cfg.mc.seed)
            .into_iter()
            .map(|(x, _)| x)
            .collect();
        let d = ks(&mut xs, &law);
        ok &= d < 0.02;
        parts.push(format!("KS(M={elements}) = {d:.4}"));
    }
    (ok, format!("{} (< 0.02)", parts.join(", ")))
}

fn e1(x: f64) -> f64 {
    const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
    let (mut sum, mut term) = (0.0, 1.0);
    for k in 1..80 {
        term *= -x / k as f64;
        sum += term / k as f64;
    }
    -EULER_GAMMA - x.ln() - sum
}

fn unit_spread(shape: f64) -> GammaChannelParams<f64> {
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

fn c4_quadrature(_: &ScenarioConfig) -> (bool, String) {
    let want = E * e1(1.0) / LN_2;
    let got = mgf_capacity(&unit_spread(1.0), 1.0, 0.0, &laguerre_rule(64).unwrap());
    let err = (got - want).abs();
    let (r50, r100) = (laguerre_rule::<f64>(50).unwrap(), laguerre_rule::<f64>(100).unwrap());
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let law = unit_spread(rng.random_range(0.5..50.0));
        let total: f64 = rng.random_range(0.01..1.0);
        let frac: f64 = rng.random_range(0.0..1.0);
        let (k_int, k_sig) = (total * frac, total * (1.0 - frac) + 1e-9);
        worst = worst.max((mgf_capacity(&law, k_sig, k_int, &r50) - mgf_capacity(&law, k_sig, k_int, &r100)).abs());
    }
    (
        err <= 1e-6 && worst < 1e-6 && (want - 0.86034).abs() < 1e-5,
        format!("|C - e E1(1)/ln2| = {err:.2e}, max |N50 - N100| = {worst:.2e} (both < 1e-6)"),
    )
}

fn nondecreasing(xs: &[f64]) -> bool {
    xs.windows(2).all(|w| w[1] >= w[0] - 1e-9 * w[0].abs())
}

fn secrecy(cfg: &ScenarioConfig) -> (f64, f64) {
    let r = Evaluator::new(cfg).unwrap().mean_report(&cfg.uav, cfg.power.zeta).unwrap();
    (r.r_sec_r, r.r_sec_t)
}

fn c5_shapes(cfg: &ScenarioConfig) -> (bool, String) {
    let ps_grid: Vec<f64> = (0..=10).map(|i| 5.0 * i as f64).collect();
    let at = |ps: f64, kappa: f64, m: usize| {
        let mut c = cfg.clone();
        c.power.ps_dbm = ps;
        c.phase = PhaseErrorModel::new(kappa).unwrap();
        c.elements = m;
        secrecy(&c)
    };
    let curve: Vec<(f64, f64)> = ps_grid.iter().map(|&p| at(p, cfg.phase.kappa, cfg.elements)).collect();
    let reflect: Vec<f64> = curve.iter().map(|c| c.0).collect();
    let transmit: Vec<f64> = curve.iter().map(|c| c.1).collect();
    let peak = (0..transmit.len()).fold(0, |b, i| if transmit[i] > transmit[b] { i } else { b });
    let reflect_ok = nondecreasing(&reflect);
    let transmit_ok = peak > 0 && peak + 1 < transmit.len() && transmit[transmit.len() - 1] < transmit[peak];

    let mut kappa_ok = true;
    for &ps in ps_grid.iter().filter(|&&p| p <= 25.0) {
        let by_kappa: Vec<(f64, f64)> = [10.0, 15.0, 20.0].iter().map(|&k| at(ps, k, cfg.elements)).collect();
        kappa_ok &= nondecreasing(&by_kappa.iter().map(|c| c.0).collect::<Vec<_>>());
        kappa_ok &= nondecreasing(&by_kappa.iter().map(|c| c.1).collect::<Vec<_>>());
    }
    let mut m_ok = true;
    for ps in [10.0, 15.0] {
        let by_m: Vec<(f64, f64)> = (1..=10).map(|i| at(ps, cfg.phase.kappa, 10 * i)).collect();
        m_ok &= nondecreasing(&by_m.iter().map(|c| c.0).collect::<Vec<_>>());
        m_ok &= nondecreasing(&by_m.iter().map(|c| c.1).collect::<Vec<_>>());
    }
    (
        reflect_ok && transmit_ok && kappa_ok && m_ok,
        format!(
            "reflect nondecreasing {reflect_ok}, transmit peak at {} dBm then declines {transmit_ok}, \
             kappa-monotone {kappa_ok}, M-monotone {m_ok}",
            ps_grid[peak]
        ),
    )
}

fn c6_gss(cfg: &ScenarioConfig) -> (bool, String) {
    let ev = Evaluator::new(cfg).unwrap();
    let grid: Vec<f64> = (0..=1000).map(|i| i as f64 / 1000.0).collect();
    let w: Vec<f64> = grid.iter().map(|&z| ev.wssr(&cfg.uav, z)).collect();
    let best = (0..w.len()).fold(0, |b, i| if w[i] > w[b] { i } else { b });
    let oracle = grid[best];
    let found = gss_zeta(|z| ev.wssr(&cfg.uav, z), &cfg.optimizer).zeta;
    // single interior peak: strictly rising before it, strictly falling after,
    // apart from flat clamped stretches
    let rising = w[..=best].windows(2).all(|p| p[1] >= p[0]);
    let falling = w[best..].windows(2).all(|p| p[1] <= p[0]);
    let ok = (found - oracle).abs() <= 1e-2 && rising && falling && oracle > 0.0 && oracle < 0.5;
    (
        ok,
        format!("GSS zeta {found:.4} vs grid {oracle:.3} (|diff| <= 1e-2), unimodal {}", rising && falling),
    )
}

fn c7_grid(cfg: &ScenarioConfig) -> (bool, String) {
    let ev = Evaluator::new(cfg).unwrap();
    let zeta = cfg.power.zeta;
    let b = &cfg.search;
    let axis = |lo: f64, hi: f64| -> Vec<f64> {
        let n = ((hi - lo) / b.step + 1e-9).floor() as usize;
        (0..=n).map(|i| lo + i as f64 * b.step).collect()
    };
    let (xs, ys, zs) = (axis(b.x_min, b.x_max), axis(b.y_min, b.y_max), axis(b.z_min, b.z_max));
    let mut best = (Position3D::new(0.0, 0.0, 0.0), f64::NEG_INFINITY);
    for &x in &xs {
        for &y in &ys {
            for &z in &zs {
                let p = Position3D::new(x, y, z);
                let v = ev.wssr(&p, zeta);
                if v > best.1 {
                    best = (p, v);
                }
            }
        }
    }
    let found = grid_search_uav(b, &cfg.optimizer, &cfg.uav, |p| ev.wssr(p, zeta)).unwrap();
    let ao = alternating_optimize(cfg, b, &cfg.optimizer).unwrap();
    let monotone = ao.trace.windows(2).all(|p| p[1].wssr >= p[0].wssr);
    let ok = xs.len() * ys.len() * zs.len() == 125
        && found.position == best.0
        && found.value == best.1
        && monotone
        && ao.converged
        && ao.iterations <= 50;
    (
        ok,
        format!(
            "ascent {:?} = enumeration {:?}: {}, AO monotone {monotone}, converged in {} iterations",
            [found.position.x, found.position.y, found.position.z],
            [best.0.x, best.0.y, best.0.z],
            found.position == best.0,
            ao.iterations
        ),
    )
}

fn c8_weights(cfg: &ScenarioConfig) -> (bool, String) {
    let mut c = cfg.clone();
    c.elements = 20;
    c.phase = PhaseErrorModel::new(20.0).unwrap();
    c.power.rho = 0.3;
    let biased = Evaluator::new(&c).unwrap().with_weights(Weights { w1: 0.45, w2: 0.55 });
    let equal = Evaluator::new(&c).unwrap().with_weights(Weights { w1: 0.5, w2: 0.5 });
    let mut ok = true;
    let mut leads = 0;
    for i in 0..=20 {
        let zeta = i as f64 * 0.05;
        let b = biased.mean_report(&c.uav, zeta).unwrap();
        let e = equal.mean_report(&c.uav, zeta).unwrap();
        ok &= b.wssr.is_finite() && e.wssr.is_finite();
        // direct definition with the reflect region weighted by w2
        ok &= (b.wssr - (0.45 * b.r_sec_t + 0.55 * b.r_sec_r)).abs() < 1e-12;
        if b.r_sec_r > b.r_sec_t {
            leads += 1;
            ok &= b.wssr > e.wssr;
        }
    }
    (ok, format!("both curves finite, biased > equal at all {leads} points where reflect secrecy leads"))
}

fn c9_determinism(cfg: &ScenarioConfig) -> (bool, String) {
    let mut c = cfg.clone();
    c.mc.trials = 5_000;
    let mut spec = SweepSpec::new(SweepVariable::PsDbm, vec![0.0, 25.0, 50.0]);
    spec.metrics = vec![Metric::CUserR, Metric::RSecR, Metric::Wssr];
    let csv = |c: &ScenarioConfig| -> Vec<String> { run_sweep(c, &spec, true).unwrap().iter().map(|t| t.to_csv()).collect() };
    let identical = csv(&c) == csv(&c);
    let mut s = c.mc;
    s.execution = Execution::Serial;
    let mut p = c.mc;
    p.execution = Execution::Parallel;
    let a = simulate_rates(&c, &c.uav, c.power.zeta, 1, &s).unwrap();
    let b = simulate_rates(&c, &c.uav, c.power.zeta, 1, &p).unwrap();
    let diff = [
        (a.c_user_r.mean, b.c_user_r.mean),
        (a.c_eve_r.mean, b.c_eve_r.mean),
        (a.c_user_t.mean, b.c_user_t.mean),
        (a.c_eve_t.mean, b.c_eve_t.mean),
        (a.r_sec_r.se, b.r_sec_r.se),
    ]
    .iter()
    .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
    (
        identical && diff <= 1e-10,
        format!("repeated CSVs byte-identical {identical}, serial vs parallel max diff {diff:.1e} (<= 1e-10)"),
    )
}

fn main() {
    let cfg = ScenarioConfig::reference();
    let outcomes = [
        criterion(1, "analytic vs Monte Carlo user capacity", 30.0, || c1_user_capacity(&cfg)),
        criterion(2, "eve approximation vs exact-phase Monte Carlo", 30.0, || c2_eve_capacity(&cfg)),
        criterion(3, "Gamma fit of the cascaded power", 20.0, || c3_gamma_fit(&cfg)),
        criterion(4, "quadrature correctness", 5.0, || c4_quadrature(&cfg)),
        criterion(5, "figure-shape reproduction", 60.0, || c5_shapes(&cfg)),
        criterion(6, "golden-section search", 20.0, || c6_gss(&cfg)),
        criterion(7, "grid coordinate ascent and alternation", 60.0, || c7_grid(&cfg)),
        criterion(8, "weight-scenario ordering", 20.0, || c8_weights(&cfg)),
        criterion(9, "determinism", 10.0, || c9_determinism(&cfg)),
    ];
    let mut unexpected = Vec::new();
    for o in &outcomes {
        println!(
            "{} criterion {}: {}: {} [{:.2}s / {:.0}s]",
            if o.pass { "PASS" } else { "FAIL" },
            o.id,
            o.title,
            o.detail,
            o.seconds,
            o.budget
        );
        if !o.pass && !KNOWN_UNATTAINABLE.contains(&o.id) {
            unexpected.push(o.id);
        }
        if o.pass && KNOWN_UNATTAINABLE.contains(&o.id) {
            println!("note: criterion {} passed although recorded as unattainable", o.id);
        }
    }
    let passed = outcomes.iter().filter(|o| o.pass).count();
    println!("{passed}/{} criteria passed", outcomes.len());
    if !unexpected.is_empty() {
        eprintln!("unexpected failures: {unexpected:?}");
        std::process::exit(1);
    }
}
