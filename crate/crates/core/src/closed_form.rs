//! Analytic ergodic capacities, secrecy rates and the weighted sum secrecy
//! rate (WSSR) for one NOMA pair.

use crate::config::{ScenarioConfig, Weights};
use crate::geometry::{link_distances, GeometryError, LinkDistances, Position3D};
use crate::quadrature::CapacityIntegrator;
use crate::rf_stats::{eve_gamma_params, user_gamma_params, GammaChannelParams, RfError};
use crate::scalar::{lit, Scalar};

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum AnalysisError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Channel(#[from] RfError),
    #[error("invalid power configuration: {0}")]
    Power(String),
}

/// Transmit/noise powers, NOMA split `rho` and reflect fraction `zeta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerConfig<T> {
    pub ps_dbm: T,
    pub n0_dbm: T,
    pub rho: T,
    pub zeta: T,
    pub alpha_pl: T,
}

impl<T: Scalar> PowerConfig<T> {
    pub fn validate(&self) -> Result<(), AnalysisError> {
        let unit = |v: T| v >= T::zero() && v <= T::one();
        if !unit(self.rho) {
            return Err(AnalysisError::Power(format!("rho = {} not in [0, 1]", self.rho)));
        }
        if !unit(self.zeta) {
            return Err(AnalysisError::Power(format!("zeta = {} not in [0, 1]", self.zeta)));
        }
        if !self.ps_dbm.is_finite() || !self.n0_dbm.is_finite() {
            return Err(AnalysisError::Power("powers must be finite".into()));
        }
        if !(self.alpha_pl > T::zero()) || !self.alpha_pl.is_finite() {
            return Err(AnalysisError::Power(format!(
                "path-loss exponent {} must be > 0",
                self.alpha_pl
            )));
        }
        Ok(())
    }

    pub fn with_zeta(self, zeta: T) -> Self {
        Self { zeta, ..self }
    }
}

/// dBm to milliwatts.
pub fn dbm_to_mw<T: Scalar>(dbm: T) -> T {
    lit::<T>(10.0).powf(dbm / lit(10.0))
}

/// Deterministic SNR scale factors.
///
/// `k1`, `k2` use the user distances and `k1p`, `k2p` the eavesdropper
/// distances. The transmit-side receivers see the reflect-user message as
/// interference through their own cascaded channel, so their interference
/// constants `k1_t`, `k1p_t` use the transmit-side link distance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnrConstants<T> {
    pub k1: T,
    pub k2: T,
    pub k1p: T,
    pub k2p: T,
    pub k1_t: T,
    pub k1p_t: T,
}

pub fn snr_constants<T: Scalar>(power: &PowerConfig<T>, dists: &LinkDistances<T>) -> SnrConstants<T> {
    let snr = dbm_to_mw(power.ps_dbm) / dbm_to_mw(power.n0_dbm);
    let reflect = power.rho * power.zeta * snr;
    let transmit = (T::one() - power.rho) * (T::one() - power.zeta) * snr;
    let loss = |d: T| (dists.d_bv * d).powf(power.alpha_pl);
    SnrConstants {
        k1: reflect / loss(dists.d_vu_r),
        k2: transmit / loss(dists.d_vu_t),
        k1p: reflect / loss(dists.d_ve_r),
        k2p: transmit / loss(dists.d_ve_t),
        k1_t: reflect / loss(dists.d_vu_t),
        k1p_t: reflect / loss(dists.d_ve_t),
    }
}

/// `E log₂(1 + k_sig X)`.
pub fn capacity_reflect<T: Scalar>(
    params: &GammaChannelParams<T>,
    k_sig: T,
    integrator: &CapacityIntegrator<T>,
) -> T {
    integrator.capacity(params, k_sig, T::zero())
}

/// `E log₂(1 + k_sig X / (k_int X + 1))`.
pub fn capacity_transmit<T: Scalar>(
    params: &GammaChannelParams<T>,
    k_sig: T,
    k_int: T,
    integrator: &CapacityIntegrator<T>,
) -> T {
    integrator.capacity(params, k_sig, k_int)
}

/// Capacities and secrecy rates of one pair, in bits/s/Hz.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SecrecyReport<T> {
    pub c_user_r: T,
    pub c_eve_r: T,
    pub c_user_t: T,
    pub c_eve_t: T,
    pub r_sec_r: T,
    pub r_sec_t: T,
    pub r_sec_sum: T,
    pub wssr: T,
}

impl<T: Scalar> SecrecyReport<T> {
    /// Clamps each region's secrecy rate at zero, then weights `w1` on the
    /// transmit region and `w2` on the reflect region.
    pub fn from_capacities(c_user_r: T, c_eve_r: T, c_user_t: T, c_eve_t: T, w1: T, w2: T) -> Self {
        let r_sec_r = (c_user_r - c_eve_r).max(T::zero());
        let r_sec_t = (c_user_t - c_eve_t).max(T::zero());
        Self {
            c_user_r,
            c_eve_r,
            c_user_t,
            c_eve_t,
            r_sec_r,
            r_sec_t,
            r_sec_sum: r_sec_r + r_sec_t,
            wssr: w1 * r_sec_t + w2 * r_sec_r,
        }
    }

    /// Field-wise mean; `None` for an empty slice.
    pub fn mean(reports: &[Self]) -> Option<Self> {
        let n = lit::<T>(reports.len() as f64);
        let first = reports.first()?;
        let sum = reports[1..].iter().fold(*first, |a, r| Self {
            c_user_r: a.c_user_r + r.c_user_r,
            c_eve_r: a.c_eve_r + r.c_eve_r,
            c_user_t: a.c_user_t + r.c_user_t,
            c_eve_t: a.c_eve_t + r.c_eve_t,
            r_sec_r: a.r_sec_r + r.r_sec_r,
            r_sec_t: a.r_sec_t + r.r_sec_t,
            r_sec_sum: a.r_sec_sum + r.r_sec_sum,
            wssr: a.wssr + r.wssr,
        });
        Some(Self {
            c_user_r: sum.c_user_r / n,
            c_eve_r: sum.c_eve_r / n,
            c_user_t: sum.c_user_t / n,
            c_eve_t: sum.c_eve_t / n,
            r_sec_r: sum.r_sec_r / n,
            r_sec_t: sum.r_sec_t / n,
            r_sec_sum: sum.r_sec_sum / n,
            wssr: sum.wssr / n,
        })
    }
}

/// Equivalent Gamma laws of the four cascaded channels of a pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelLaws<T> {
    pub user_r: GammaChannelParams<T>,
    pub user_t: GammaChannelParams<T>,
    pub eve_r: GammaChannelParams<T>,
    pub eve_t: GammaChannelParams<T>,
}

impl<T: Scalar> ChannelLaws<T> {
    /// Multiplies every spread by `factor`.
    pub fn with_spread_scaled(&self, factor: T) -> Self {
        Self {
            user_r: self.user_r.with_spread_scaled(factor),
            user_t: self.user_t.with_spread_scaled(factor),
            eve_r: self.eve_r.with_spread_scaled(factor),
            eve_t: self.eve_t.with_spread_scaled(factor),
        }
    }
}

pub fn channel_laws(cfg: &ScenarioConfig) -> Result<ChannelLaws<f64>, AnalysisError> {
    let f = &cfg.fading;
    let m = cfg.elements;
    Ok(ChannelLaws {
        user_r: user_gamma_params(m, f.m_bv, f.m_vu_r, &cfg.phase)?,
        user_t: user_gamma_params(m, f.m_bv, f.m_vu_t, &cfg.phase)?,
        eve_r: eve_gamma_params(m, f.m_bv, f.m_ve_r, &cfg.phase)?,
        eve_t: eve_gamma_params(m, f.m_bv, f.m_ve_t, &cfg.phase)?,
    })
}

/// Combines channel laws and SNR constants into a report.
pub fn assemble<T: Scalar>(
    laws: &ChannelLaws<T>,
    k: &SnrConstants<T>,
    integrator: &CapacityIntegrator<T>,
    w1: T,
    w2: T,
) -> SecrecyReport<T> {
    SecrecyReport::from_capacities(
        capacity_reflect(&laws.user_r, k.k1, integrator),
        capacity_reflect(&laws.eve_r, k.k1p, integrator),
        capacity_transmit(&laws.user_t, k.k2, k.k1_t, integrator),
        capacity_transmit(&laws.eve_t, k.k2p, k.k1p_t, integrator),
        w1,
        w2,
    )
}

/// Closed-form evaluator with channel laws and the integrator prepared once
/// per scenario.
#[derive(Debug, Clone)]
pub struct Evaluator<'a> {
    cfg: &'a ScenarioConfig,
    laws: ChannelLaws<f64>,
    integrator: CapacityIntegrator<f64>,
    weights: Weights,
}

impl<'a> Evaluator<'a> {
    pub fn new(cfg: &'a ScenarioConfig) -> Result<Self, AnalysisError> {
        Ok(Self {
            cfg,
            laws: channel_laws(cfg)?,
            integrator: cfg.integrator(),
            weights: cfg.weights,
        })
    }

    pub fn laws(&self) -> &ChannelLaws<f64> {
        &self.laws
    }

    /// Replaces the channel laws (used by validation hooks).
    pub fn with_laws(mut self, laws: ChannelLaws<f64>) -> Self {
        self.laws = laws;
        self
    }

    pub fn with_weights(mut self, weights: Weights) -> Self {
        self.weights = weights;
        self
    }

    pub fn snr_constants(
        &self,
        uav: &Position3D<f64>,
        zeta: f64,
        pair: usize,
    ) -> Result<SnrConstants<f64>, AnalysisError> {
        let d = link_distances(&self.cfg.layout, uav, pair)?;
        Ok(snr_constants(&self.cfg.power.with_zeta(zeta), &d))
    }

    pub fn report(
        &self,
        uav: &Position3D<f64>,
        zeta: f64,
        pair: usize,
    ) -> Result<SecrecyReport<f64>, AnalysisError> {
        let k = self.snr_constants(uav, zeta, pair)?;
        Ok(assemble(&self.laws, &k, &self.integrator, self.weights.w1, self.weights.w2))
    }

    /// Mean report over all configured pairs.
    pub fn mean_report(&self, uav: &Position3D<f64>, zeta: f64) -> Result<SecrecyReport<f64>, AnalysisError> {
        let reports = (0..self.cfg.layout.pair_count())
            .map(|p| self.report(uav, zeta, p))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(SecrecyReport::mean(&reports).expect("layout has at least one pair"))
    }

    /// Mean WSSR over pairs; `-inf` where the geometry is degenerate.
    pub fn wssr(&self, uav: &Position3D<f64>, zeta: f64) -> f64 {
        self.mean_report(uav, zeta)
            .map(|r| r.wssr)
            .unwrap_or(f64::NEG_INFINITY)
    }
}

/// Report for one pair with the UAV at `uav` and reflect fraction `zeta`.
pub fn secrecy_report(
    cfg: &ScenarioConfig,
    uav: &Position3D<f64>,
    zeta: f64,
    pair: usize,
) -> Result<SecrecyReport<f64>, AnalysisError> {
    Evaluator::new(cfg)?.report(uav, zeta, pair)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::ScenarioConfig;
    use crate::quadrature::laguerre_rule;
    use crate::rf_stats::PhaseErrorModel;
    use proptest::prelude::*;

    fn power(ps_dbm: f64, n0_dbm: f64, rho: f64, zeta: f64) -> PowerConfig<f64> {
        PowerConfig {
            ps_dbm,
            n0_dbm,
            rho,
            zeta,
            alpha_pl: 2.0,
        }
    }

    #[test]
    fn unit_distance_constants() {
        let k = snr_constants(&power(20.0, 0.0, 0.3, 0.2), &LinkDistances::uniform(1.0));
        assert!((k.k1 - 6.0).abs() < 1e-12);
        assert!((k.k2 - 56.0).abs() < 1e-12);
        assert!((k.k1p - 6.0).abs() < 1e-12);
        assert!((k.k2p - 56.0).abs() < 1e-12);
        assert!((k.k1_t - 6.0).abs() < 1e-12 && (k.k1p_t - 6.0).abs() < 1e-12);
        let k = snr_constants(&power(20.0, 0.0, 0.0, 0.2), &LinkDistances::uniform(1.0));
        assert_eq!(k.k1, 0.0);
    }

    #[test]
    fn scenario_constants_match_direct_formula() {
        let cfg = ScenarioConfig::reference();
        let uav = Position3D::new(0.5, 0.5, 10.0);
        let p = PowerConfig {
            n0_dbm: -100.0,
            ..cfg.power
        };
        let d = link_distances(&cfg.layout, &uav, 0).unwrap();
        let k = snr_constants(&p, &d);
        // 20 dBm = 100 mW, −100 dBm = 1e-10 mW
        let ratio = 100.0 / 1e-10;
        let d_bv2 = 65.5;
        let k1 = 0.3 * 0.2 * ratio / (d_bv2 * 100.5);
        let k2 = 0.7 * 0.8 * ratio / (d_bv2 * 104.5);
        let k1p = 0.3 * 0.2 * ratio / (d_bv2 * 104.5);
        let k2p = 0.7 * 0.8 * ratio / (d_bv2 * 112.5);
        for (got, want) in [(k.k1, k1), (k.k2, k2), (k.k1p, k1p), (k.k2p, k2p)] {
            assert!((got - want).abs() <= 1e-12 * want, "{got} vs {want}");
        }
    }

    #[test]
    fn report_arithmetic() {
        let r = SecrecyReport::from_capacities(1.0f64, 0.2, 2.0, 0.5, 0.45, 0.55);
        assert!((r.wssr - 1.115).abs() < 1e-12);
        assert!((r.r_sec_sum - 2.3).abs() < 1e-12);
        let r = SecrecyReport::from_capacities(0.1, 0.2, 2.0, 2.5, 0.45, 0.55);
        assert_eq!((r.r_sec_r, r.r_sec_t, r.wssr), (0.0, 0.0, 0.0));
        let m = SecrecyReport::mean(&[
            SecrecyReport::from_capacities(1.0, 0.0, 1.0, 0.0, 0.5, 0.5),
            SecrecyReport::from_capacities(3.0, 0.0, 3.0, 0.0, 0.5, 0.5),
        ])
        .unwrap();
        assert_eq!(m.c_user_r, 2.0);
        assert!(SecrecyReport::<f64>::mean(&[]).is_none());
    }

    #[test]
    fn identical_eavesdropper_gets_zero_secrecy() {
        let cfg = ScenarioConfig::reference();
        let laws = channel_laws(&cfg).unwrap();
        let twin = ChannelLaws {
            eve_r: laws.user_r,
            eve_t: laws.user_t,
            ..laws
        };
        let d = LinkDistances::uniform(3.0);
        let k = snr_constants(&cfg.power, &d);
        let r = assemble(&twin, &k, &CapacityIntegrator::default(), 0.45, 0.55);
        assert_eq!(r.r_sec_r, 0.0);
        assert_eq!(r.r_sec_t, 0.0);
        assert!(r.c_user_r > 0.0);
    }

    #[test]
    fn zero_signal_and_interference_collapse() {
        let cfg = ScenarioConfig::reference();
        let laws = channel_laws(&cfg).unwrap();
        let integ = CapacityIntegrator::default();
        assert_eq!(capacity_reflect(&laws.user_r, 0.0, &integ), 0.0);
        assert_eq!(capacity_transmit(&laws.user_t, 0.0, 3.0, &integ), 0.0);
        // rho = zeta = 0 removes interference and leaves the reflect form
        let d = LinkDistances::uniform(2.0);
        let k = snr_constants(&power(10.0, 0.0, 0.0, 0.0), &d);
        assert_eq!(k.k1_t, 0.0);
        let direct = capacity_reflect(&laws.user_t, 10.0 / 16.0, &integ);
        let transmit = capacity_transmit(&laws.user_t, k.k2, k.k1_t, &integ);
        assert!((direct - transmit).abs() < 1e-9);
    }

    #[test]
    fn capacity_grows_with_elements() {
        let integ = CapacityIntegrator::default();
        let model = PhaseErrorModel::new(20.0).unwrap();
        let caps: Vec<f64> = [10, 20, 40]
            .iter()
            .map(|&m| {
                let p = user_gamma_params(m, 2.0, 2.0, &model).unwrap();
                capacity_reflect(&p, 0.05, &integ)
            })
            .collect();
        assert!(caps[0] < caps[1] && caps[1] < caps[2]);
    }

    #[test]
    fn gauss_laguerre_agrees_at_low_snr() {
        let cfg = ScenarioConfig::reference();
        let laws = channel_laws(&cfg).unwrap();
        let gl = CapacityIntegrator::GaussLaguerre(laguerre_rule(64).unwrap());
        let lt = CapacityIntegrator::default();
        // mean SNR k·Ω well below one
        let k = 1e-3 / laws.user_r.spread;
        let a = capacity_reflect(&laws.user_r, k, &gl);
        let b = capacity_reflect(&laws.user_r, k, &lt);
        assert!((a - b).abs() < 1e-9);
    }

    #[test]
    fn generic_scalar_path() {
        let p = PowerConfig::<f32> {
            ps_dbm: 20.0,
            n0_dbm: 0.0,
            rho: 0.3,
            zeta: 0.2,
            alpha_pl: 2.0,
        };
        let k = snr_constants(&p, &LinkDistances::uniform(1.0f32));
        assert!((k.k1 - 6.0).abs() < 1e-4);
        let r = SecrecyReport::from_capacities(1.0f32, 0.2, 2.0, 0.5, 0.45, 0.55);
        assert!((r.wssr - 1.115).abs() < 1e-6);
    }

    proptest! {
        #[test]
        fn rates_finite_and_nonnegative(ps in -20.0f64..60.0, zeta in 0.0f64..1.0,
                                        x in -3.0f64..3.0, y in -3.0f64..3.0, z in 1.0f64..20.0) {
            let cfg = ScenarioConfig::reference();
            let mut cfg2 = cfg.clone();
            cfg2.power.ps_dbm = ps;
            let ev = Evaluator::new(&cfg2).unwrap();
            let r = ev.report(&Position3D::new(x, y, z), zeta, 0).unwrap();
            for v in [r.c_user_r, r.c_eve_r, r.c_user_t, r.c_eve_t, r.r_sec_r, r.r_sec_t, r.wssr] {
                prop_assert!(v.is_finite() && v >= 0.0);
            }
            prop_assert!((r.r_sec_r - (r.c_user_r - r.c_eve_r).max(0.0)).abs() < 1e-15);
        }
    }
}
