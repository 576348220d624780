//! Channel statistics: von Mises trigonometric moments, Nakagami envelope
//! means and the equivalent Gamma law of the cascaded channel power
//! `X = |Σ |h_i| |g_i| e^{-jθ_i}|²`.
//!
//! Writing `X = U² + V²`, a central-limit argument gives
//! `E[U] = M α² c`, `Var U = M/2 (1 + φ₂ − 2 α⁴ c²)` and `Var V = M/2 (1 − φ₂)`
//! with `c` the coherence factor (`φ₁` for users, `Φ` for eavesdroppers).
//! Matching the first two cumulants of `U²` yields the Gamma shape
//! `E²[U] / (4 Var U)` and spread `E²[U]`.

use thiserror::Error;

use crate::scalar::{count, lit, Scalar};
use crate::special::{bessel_i_ratio, ln_gamma};

/// Lower bound on the coherence factor so the Gamma law stays proper.
pub const MIN_COHERENCE: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RfError {
    #[error("concentration must be finite and >= 0, got {0}")]
    InvalidKappa(f64),
    #[error("Nakagami shape must be >= 0.5, got {0}")]
    ShapeBelowHalf(f64),
    #[error("element count must be >= 1")]
    NoElements,
    #[error("non-positive variance term {0} in Gamma moment match")]
    DegenerateVariance(f64),
}

/// Von Mises phase-error model; `kappa = 0` is a uniform error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseErrorModel<T> {
    pub kappa: T,
}

impl<T: Scalar> PhaseErrorModel<T> {
    pub fn new(kappa: T) -> Result<Self, RfError> {
        if !kappa.is_finite() || kappa < T::zero() {
            return Err(RfError::InvalidKappa(kappa.to_f64().unwrap_or(f64::NAN)));
        }
        Ok(Self { kappa })
    }
}

/// Nakagami shape per link; every link has unit spread.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FadingParams<T> {
    pub m_bv: T,
    pub m_vu_r: T,
    pub m_vu_t: T,
    pub m_ve_r: T,
    pub m_ve_t: T,
}

impl<T: Scalar> FadingParams<T> {
    /// Same shape on every link.
    pub fn uniform(m: T) -> Self {
        Self {
            m_bv: m,
            m_vu_r: m,
            m_vu_t: m,
            m_ve_r: m,
            m_ve_t: m,
        }
    }

    pub fn validate(&self) -> Result<(), RfError> {
        for m in [self.m_bv, self.m_vu_r, self.m_vu_t, self.m_ve_r, self.m_ve_t] {
            check_shape(m)?;
        }
        Ok(())
    }
}

/// Equivalent Gamma law of a cascaded channel power, with the moments it was
/// built from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaChannelParams<T> {
    pub shape: T,
    pub spread: T,
    /// `E|h| · E|g|`.
    pub alpha2: T,
    pub phi1: T,
    pub phi2: T,
    /// Eavesdropper resultant length `Φ`; `None` for a legitimate user.
    pub eve_coherence: Option<T>,
    pub elements: usize,
}

impl<T: Scalar> GammaChannelParams<T> {
    /// Coherence factor entering the moments: `Φ` for eavesdroppers, else `φ₁`.
    pub fn coherence(&self) -> T {
        self.eve_coherence.unwrap_or(self.phi1)
    }

    /// `E[U]`.
    pub fn mean_u(&self) -> T {
        count::<T>(self.elements) * self.alpha2 * self.coherence()
    }

    /// `Var U`.
    pub fn var_u(&self) -> T {
        let c = self.coherence();
        let a4c2 = self.alpha2 * self.alpha2 * c * c;
        lit::<T>(0.5) * count::<T>(self.elements) * (T::one() + self.phi2 - a4c2 - a4c2)
    }

    /// `Var V`.
    pub fn var_v(&self) -> T {
        lit::<T>(0.5) * count::<T>(self.elements) * (T::one() - self.phi2)
    }

    /// Gamma rate parameter `shape / spread`.
    pub fn rate(&self) -> T {
        self.shape / self.spread
    }

    /// Copy with the spread multiplied by `factor`, shape untouched.
    pub fn with_spread_scaled(&self, factor: T) -> Self {
        Self {
            spread: self.spread * factor,
            ..*self
        }
    }
}

fn check_shape<T: Scalar>(m: T) -> Result<(), RfError> {
    if !(m >= lit(0.5)) || !m.is_finite() {
        return Err(RfError::ShapeBelowHalf(m.to_f64().unwrap_or(f64::NAN)));
    }
    Ok(())
}

/// `φ_p = I_p(κ) / I_0(κ)`.
pub fn vonmises_trig_moment<T: Scalar>(p: u32, kappa: T) -> Result<T, RfError> {
    PhaseErrorModel::new(kappa)?;
    Ok(bessel_i_ratio(p, kappa))
}

/// `E|h|` for a unit-spread Nakagami-`m` envelope.
pub fn nakagami_abs_mean<T: Scalar>(m: T) -> Result<T, RfError> {
    check_shape(m)?;
    Ok((ln_gamma(m + lit(0.5)) - ln_gamma(m)).exp() / m.sqrt())
}

/// Largest effective phase variance, reached when `Φ` hits [`MIN_COHERENCE`].
pub fn max_phase_variance<T: Scalar>() -> T {
    lit::<T>(-2.0 * MIN_COHERENCE.ln())
}

/// Variance of the eavesdropper's composite phase error: two independent
/// uniform channel phases plus the wrapped-normal equivalent `−2 ln φ₁` of
/// the von Mises error. Capped at [`max_phase_variance`].
pub fn eff_phase_variance<T: Scalar>(model: &PhaseErrorModel<T>) -> T {
    let uniform = T::PI() * T::PI() / lit(3.0);
    let phi1 = bessel_i_ratio(1, model.kappa);
    let var = uniform + uniform - lit::<T>(2.0) * phi1.ln();
    if var.is_finite() {
        var.min(max_phase_variance())
    } else {
        max_phase_variance()
    }
}

fn gamma_params<T: Scalar>(
    elements: usize,
    alpha2: T,
    coherence: T,
    phi1: T,
    phi2: T,
    eve: bool,
) -> Result<GammaChannelParams<T>, RfError> {
    if elements == 0 {
        return Err(RfError::NoElements);
    }
    let c = coherence.max(lit(MIN_COHERENCE));
    let m = count::<T>(elements);
    let a4c2 = alpha2 * alpha2 * c * c;
    let denom = lit::<T>(2.0) * (T::one() + phi2 - a4c2 - a4c2);
    if !(denom > T::zero()) {
        return Err(RfError::DegenerateVariance(
            denom.to_f64().unwrap_or(f64::NAN),
        ));
    }
    Ok(GammaChannelParams {
        shape: m * a4c2 / denom,
        spread: m * m * a4c2,
        alpha2,
        phi1,
        phi2,
        eve_coherence: eve.then_some(c),
        elements,
    })
}

/// Gamma law of a legitimate user's cascaded channel power.
pub fn user_gamma_params<T: Scalar>(
    elements: usize,
    m_bv: T,
    m_vu: T,
    model: &PhaseErrorModel<T>,
) -> Result<GammaChannelParams<T>, RfError> {
    let alpha2 = nakagami_abs_mean(m_bv)? * nakagami_abs_mean(m_vu)?;
    let phi1 = vonmises_trig_moment(1, model.kappa)?;
    let phi2 = vonmises_trig_moment(2, model.kappa)?;
    gamma_params(elements, alpha2, phi1, phi1, phi2, false)
}

/// Gamma law of an eavesdropper's cascaded channel power; `φ₁` is replaced
/// by `Φ = exp(−Var(θ_eff) / 2)` while the `φ₂` term is kept.
pub fn eve_gamma_params<T: Scalar>(
    elements: usize,
    m_bv: T,
    m_ve: T,
    model: &PhaseErrorModel<T>,
) -> Result<GammaChannelParams<T>, RfError> {
    let alpha2 = nakagami_abs_mean(m_bv)? * nakagami_abs_mean(m_ve)?;
    let phi1 = vonmises_trig_moment(1, model.kappa)?;
    let phi2 = vonmises_trig_moment(2, model.kappa)?;
    let coherence = (-eff_phase_variance(model) * lit(0.5)).exp();
    gamma_params(elements, alpha2, coherence, phi1, phi2, true)
}
