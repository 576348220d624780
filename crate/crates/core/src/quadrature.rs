//! Gauss-Laguerre rules and the MGF form of ergodic capacity,
//!
//! `C = (1/ln 2) ∫₀^∞ [M_X(k_int z) − M_X((k_int + k_sig) z)] e^{−z} / z dz`,
//!
//! where `M_X(s) = (1 + sΩ/m)^{−m}` is the Gamma moment generating function
//! at `−s`.
//!
//! The Gauss-Laguerre sum is exact only while the bracket is smooth on the
//! scale of the nodes. Its total weight on `1/z` is the harmonic number
//! `H_N`, so it can never report more than `H_N / ln 2` bits; once the mean
//! SNR is well above one the rule saturates. [`CapacityIntegrator::LogTrapezoid`]
//! substitutes `z = e^v` and applies the trapezoid rule, which converges
//! geometrically for every SNR.

use thiserror::Error;

use crate::rf_stats::GammaChannelParams;
use crate::scalar::{lit, Scalar};

pub const MAX_ORDER: usize = 200;
pub const DEFAULT_ORDER: usize = 64;
pub const DEFAULT_LOG_STEP: f64 = 0.25;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuadratureError {
    #[error("rule order must be in 1..={MAX_ORDER}, got {0}")]
    OrderOutOfRange(usize),
    #[error("eigenvalue iteration did not converge")]
    NoConvergence,
    #[error("trapezoid step must be in (0, 1], got {0}")]
    InvalidStep(f64),
}

/// Gauss-Laguerre nodes and weights for `∫₀^∞ f(z) e^{−z} dz`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadRule<T> {
    pub nodes: Vec<T>,
    pub weights: Vec<T>,
}

impl<T: Scalar> QuadRule<T> {
    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    /// `Σ w_i f(z_i)`.
    pub fn integrate(&self, f: impl Fn(T) -> T) -> T {
        self.nodes
            .iter()
            .zip(&self.weights)
            .fold(T::zero(), |acc, (&z, &w)| acc + w * f(z))
    }
}

/// Builds the `n`-point rule from the eigenvalues of the Jacobi matrix
/// (diagonal `2i + 1`, off-diagonal `i + 1`), refines each node with Newton
/// steps on `L_n`, and takes Christoffel weights `1 / Σ_{k<n} L_k(z)²`.
/// Computed in `f64` and converted.
pub fn laguerre_rule<T: Scalar>(n: usize) -> Result<QuadRule<T>, QuadratureError> {
    if n == 0 || n > MAX_ORDER {
        return Err(QuadratureError::OrderOutOfRange(n));
    }
    let mut diag: Vec<f64> = (0..n).map(|i| (2 * i + 1) as f64).collect();
    let mut off: Vec<f64> = (0..n).map(|i| (i + 1) as f64).collect();
    off[n - 1] = 0.0;
    symmetric_tridiagonal_eigenvalues(&mut diag, &mut off)?;
    diag.sort_by(f64::total_cmp);

    let mut nodes = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    for &guess in &diag {
        let z = newton_polish(n, guess);
        nodes.push(lit::<T>(z));
        weights.push(lit::<T>(christoffel_weight(n, z)));
    }
    Ok(QuadRule { nodes, weights })
}

/// Implicit QL with Wilkinson shifts; eigenvalues are left in `d`.
fn symmetric_tridiagonal_eigenvalues(d: &mut [f64], e: &mut [f64]) -> Result<(), QuadratureError> {
    let n = d.len();
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 60 {
                return Err(QuadratureError::NoConvergence);
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut i = m;
            let mut deflated = false;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

/// Rescaling bound for the three-term recurrence.
const RESCALE: f64 = 1e150;

/// `(L_n(x), L_{n−1}(x))` up to a common positive factor.
fn laguerre_pair(n: usize, x: f64) -> (f64, f64) {
    let (mut prev, mut cur) = (0.0, 1.0);
    for k in 0..n {
        let next = ((2 * k + 1) as f64 - x) * cur / (k + 1) as f64 - k as f64 * prev / (k + 1) as f64;
        prev = cur;
        cur = next;
        if cur.abs() > RESCALE {
            cur /= RESCALE;
            prev /= RESCALE;
        }
    }
    (cur, prev)
}

fn newton_polish(n: usize, mut x: f64) -> f64 {
    for _ in 0..8 {
        let (ln, lm1) = laguerre_pair(n, x);
        let deriv = n as f64 * (ln - lm1) / x;
        if deriv == 0.0 || !deriv.is_finite() {
            break;
        }
        let dx = ln / deriv;
        x -= dx;
        if dx.abs() <= 4.0 * f64::EPSILON * x {
            break;
        }
    }
    x
}

fn christoffel_weight(n: usize, x: f64) -> f64 {
    // Σ L_k² accumulated with a running log-scale to survive large nodes
    let (mut prev, mut cur) = (0.0, 1.0);
    let mut sum = 1.0;
    let mut log_scale = 0.0;
    for k in 0..n - 1 {
        let next = ((2 * k + 1) as f64 - x) * cur / (k + 1) as f64 - k as f64 * prev / (k + 1) as f64;
        prev = cur;
        cur = next;
        sum += cur * cur;
        if cur.abs() > RESCALE {
            cur /= RESCALE;
            prev /= RESCALE;
            sum /= RESCALE * RESCALE;
            log_scale += 2.0 * RESCALE.ln();
        }
    }
    (-(sum.ln() + log_scale)).exp()
}

/// `M_X(a z) − M_X(b z)` for `b ≥ a ≥ 0`, written to avoid cancellation.
#[inline]
fn mgf_gap<T: Scalar>(shape: T, scale: T, a: T, b: T, z: T) -> T {
    let xa = z * scale * a;
    let xb = z * scale * b;
    let ma = (-shape * xa.ln_1p()).exp();
    let rel = (xb - xa) / (T::one() + xa);
    ma * -(-shape * rel.ln_1p()).exp_m1()
}

/// Gauss-Laguerre evaluation of the MGF capacity in bits.
pub fn mgf_capacity<T: Scalar>(
    params: &GammaChannelParams<T>,
    k_sig: T,
    k_int: T,
    rule: &QuadRule<T>,
) -> T {
    if k_sig <= T::zero() {
        return T::zero();
    }
    let scale = params.spread / params.shape;
    let total = k_int + k_sig;
    let sum = rule.integrate(|z| mgf_gap(params.shape, scale, k_int, total, z) / z);
    (sum / T::LN_2()).max(T::zero())
}

/// Trapezoid evaluation of the same integral after `z = e^v`.
pub fn log_trapezoid_capacity<T: Scalar>(
    params: &GammaChannelParams<T>,
    k_sig: T,
    k_int: T,
    step: T,
) -> T {
    if k_sig <= T::zero() {
        return T::zero();
    }
    let scale = params.spread / params.shape;
    let total = k_int + k_sig;
    // below v_lo the bracket is O(θ e^v); above v_hi e^{−e^v} is negligible
    let theta = (total * params.spread).max(T::one());
    let v_lo = lit::<T>(-40.0) - theta.ln();
    let v_hi = lit::<T>(4.0);
    let n = ((v_hi - v_lo) / step).ceil().to_usize().unwrap_or(0);
    let mut sum = T::zero();
    for i in 0..=n {
        let v = v_lo + step * lit::<T>(i as f64);
        let z = v.exp();
        sum = sum + mgf_gap(params.shape, scale, k_int, total, z) * (-z).exp();
    }
    (sum * step / T::LN_2()).max(T::zero())
}

/// Numerical scheme used for every capacity integral.
#[derive(Debug, Clone, PartialEq)]
pub enum CapacityIntegrator<T> {
    GaussLaguerre(QuadRule<T>),
    LogTrapezoid { step: T },
}

impl<T: Scalar> CapacityIntegrator<T> {
    pub fn gauss_laguerre(order: usize) -> Result<Self, QuadratureError> {
        Ok(Self::GaussLaguerre(laguerre_rule(order)?))
    }

    pub fn log_trapezoid(step: T) -> Result<Self, QuadratureError> {
        if !(step > T::zero() && step <= T::one()) {
            return Err(QuadratureError::InvalidStep(step.to_f64().unwrap_or(f64::NAN)));
        }
        Ok(Self::LogTrapezoid { step })
    }

    pub fn capacity(&self, params: &GammaChannelParams<T>, k_sig: T, k_int: T) -> T {
        match self {
            Self::GaussLaguerre(rule) => mgf_capacity(params, k_sig, k_int, rule),
            Self::LogTrapezoid { step } => log_trapezoid_capacity(params, k_sig, k_int, *step),
        }
    }
}

impl<T: Scalar> Default for CapacityIntegrator<T> {
    fn default() -> Self {
        Self::LogTrapezoid {
            step: lit(DEFAULT_LOG_STEP),
        }
    }
}
