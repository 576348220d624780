//! Special functions needed by the channel statistics: log-gamma and
//! exponentially scaled modified Bessel functions of the first kind.

use crate::scalar::{count, lit, Scalar};

const LANCZOS_G: f64 = 7.0;
#[allow(clippy::excessive_precision)]
const LANCZOS_COEFFS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Natural log of the gamma function for `x > 0` (Lanczos, g = 7).
pub fn ln_gamma<T: Scalar>(x: T) -> T {
    let half = lit::<T>(0.5);
    if x < half {
        // reflection: Γ(x)Γ(1−x) = π / sin(πx)
        let pi = T::PI();
        return (pi / (pi * x).sin().abs()).ln() - ln_gamma(T::one() - x);
    }
    let x = x - T::one();
    let mut acc = lit::<T>(LANCZOS_COEFFS[0]);
    for (i, &c) in LANCZOS_COEFFS.iter().enumerate().skip(1) {
        acc = acc + lit::<T>(c) / (x + count::<T>(i));
    }
    let t = x + lit::<T>(LANCZOS_G) + half;
    half * (T::TAU()).ln() + (x + half) * t.ln() - t + acc.ln()
}

/// Argument above which the large-x asymptotic expansion replaces the power
/// series.
pub const BESSEL_SERIES_LIMIT: f64 = 30.0;

/// `e^{-x} I_order(x)` for `x >= 0`.
///
/// Power series up to [`BESSEL_SERIES_LIMIT`], Hankel asymptotic expansion
/// above it. When the asymptotic series cannot reach full precision (large
/// order relative to `x`) a peak-centred scaled power series is used instead.
pub fn bessel_i_scaled<T: Scalar>(order: u32, x: T) -> T {
    assert!(x >= T::zero(), "bessel_i_scaled needs x >= 0");
    if x == T::zero() {
        return if order == 0 { T::one() } else { T::zero() };
    }
    if x <= lit(BESSEL_SERIES_LIMIT) {
        return power_series(order, x) * (-x).exp();
    }
    asymptotic(order, x).unwrap_or_else(|| centred_series(order, x))
}

/// `I_order(x) / I_0(x)`.
pub fn bessel_i_ratio<T: Scalar>(order: u32, x: T) -> T {
    if order == 0 {
        return T::one();
    }
    if x == T::zero() {
        return T::zero();
    }
    bessel_i_scaled(order, x) / bessel_i_scaled(0, x)
}

fn power_series<T: Scalar>(order: u32, x: T) -> T {
    let half_x = x * lit(0.5);
    let q = half_x * half_x;
    let p = order as usize;
    let mut term = T::one();
    for j in 1..=p {
        term = term * half_x / count::<T>(j);
    }
    if term == T::zero() {
        return T::zero();
    }
    let mut sum = term;
    let eps = T::epsilon();
    let mut k = 0usize;
    loop {
        term = term * q / (count::<T>(k + 1) * count::<T>(k + p + 1));
        sum = sum + term;
        k += 1;
        if term <= eps * sum || k > 10_000 {
            break;
        }
    }
    sum
}

fn asymptotic<T: Scalar>(order: u32, x: T) -> Option<T> {
    let nu2x4 = lit::<T>(4.0) * count::<T>(order as usize) * count::<T>(order as usize);
    let eight_x = lit::<T>(8.0) * x;
    let eps = T::epsilon();
    let mut term = T::one();
    let mut sum = T::one();
    for k in 1..200usize {
        let odd = count::<T>(2 * k - 1);
        let next = -term * (nu2x4 - odd * odd) / (count::<T>(k) * eight_x);
        if next.abs() > term.abs() {
            return None;
        }
        term = next;
        sum = sum + term;
        if term.abs() <= eps * sum.abs() {
            return Some(sum / (T::TAU() * x).sqrt());
        }
    }
    None
}

fn centred_series<T: Scalar>(order: u32, x: T) -> T {
    let p = order as usize;
    let half_x = x * lit(0.5);
    let q = half_x * half_x;
    let pf = count::<T>(p);
    let peak = ((x * x + pf * pf).sqrt() - pf) * lit(0.5);
    let kstar = peak.floor().to_usize().unwrap_or(0);
    let ks = count::<T>(kstar);
    let ln_peak = (ks + ks + pf) * half_x.ln()
        - ln_gamma(ks + T::one())
        - ln_gamma(ks + pf + T::one());
    let eps = T::epsilon();

    let mut sum = T::one();
    let mut t = T::one();
    let mut k = kstar;
    loop {
        t = t * q / (count::<T>(k + 1) * count::<T>(k + p + 1));
        sum = sum + t;
        k += 1;
        if t <= eps * sum {
            break;
        }
    }
    let mut t = T::one();
    let mut k = kstar;
    while k > 0 {
        t = t * count::<T>(k) * count::<T>(k + p) / q;
        sum = sum + t;
        k -= 1;
        if t <= eps * sum {
            break;
        }
    }
    (ln_peak - x).exp() * sum
}

#[cfg(test)]
mod tests {
    use super::*;

    /// `e^{-x} I_p(x)` by the trapezoid rule on `(1/π)∫₀^π e^{x(cos t − 1)} cos(pt) dt`.
    /// The integrand is periodic and analytic, so the rule converges geometrically.
    fn bessel_quadrature(p: u32, x: f64) -> f64 {
        let n = 4000;
        let h = std::f64::consts::PI / n as f64;
        let mut s = 0.0;
        for i in 0..=n {
            let t = i as f64 * h;
            let w = if i == 0 || i == n { 0.5 } else { 1.0 };
            s += w * (x * (t.cos() - 1.0)).exp() * (p as f64 * t).cos();
        }
        s * h / std::f64::consts::PI
    }

    #[test]
    fn ln_gamma_matches_known_values() {
        assert!((ln_gamma(1.0f64)).abs() < 1e-14);
        assert!((ln_gamma(2.0f64)).abs() < 1e-14);
        assert!((ln_gamma(0.5f64) - std::f64::consts::PI.sqrt().ln()).abs() < 1e-14);
        assert!((ln_gamma(10.0f64) - 362_880f64.ln()).abs() < 1e-12);
        for &x in &[0.3, 1.7, 4.5, 33.3, 250.0, 1.0e5] {
            let reference = statrs::function::gamma::ln_gamma(x);
            assert!(
                (ln_gamma(x) - reference).abs() < 1e-12 * reference.abs().max(1.0),
                "x = {x}"
            );
        }
    }

    #[test]
    fn scaled_bessel_matches_quadrature_across_regimes() {
        for &x in &[0.01, 0.5, 1.0, 5.0, 10.0, 20.0, 29.9, 30.1, 45.0, 80.0, 300.0] {
            for p in [0u32, 1, 2, 3, 7] {
                let got = bessel_i_scaled(p, x);
                let want = bessel_quadrature(p, x);
                // the oracle carries ~1e-16 absolute cancellation error
                assert!(
                    (got - want).abs() <= 1e-12 * want.abs() + 1e-15,
                    "p={p} x={x}: {got} vs {want}"
                );
            }
        }
    }

    #[test]
    fn large_order_falls_back_to_centred_series() {
        // 4p² ≫ 8x defeats the asymptotic expansion here
        let got = bessel_i_scaled(40, 35.0f64);
        let want = bessel_quadrature(40, 35.0);
        assert!((got - want).abs() <= 1e-15, "{got} vs {want}");
        assert!(got > 0.0);
    }

    #[test]
    fn small_argument_matches_direct_series() {
        // unscaled series written independently, then scaled
        for &x in &[1e-3, 0.01, 0.5, 2.0] {
            for p in [1u32, 2, 5] {
                let mut term = 1.0;
                for j in 1..=p {
                    term *= 0.5 * x / j as f64;
                }
                let mut sum = term;
                for k in 0..60 {
                    term *= 0.25 * x * x / ((k + 1) as f64 * (k + 1 + p) as f64);
                    sum += term;
                }
                let want = sum * (-x).exp();
                let got = bessel_i_scaled(p, x);
                assert!((got - want).abs() <= 1e-14 * want, "p={p} x={x}");
            }
        }
    }

    #[test]
    fn ratio_limits() {
        assert_eq!(bessel_i_ratio(0, 3.0f64), 1.0);
        assert_eq!(bessel_i_ratio(1, 0.0f64), 0.0);
        let r = bessel_i_ratio(1, 1.0e8f64);
        assert!((r - (1.0 - 0.5e-8)).abs() < 1e-12);
    }

    #[test]
    fn single_precision_is_usable() {
        let r32 = bessel_i_ratio(1, 10.0f32);
        let r64 = bessel_i_ratio(1, 10.0f64);
        assert!((r32 as f64 - r64).abs() < 1e-5);
        assert!((ln_gamma(4.5f32) as f64 - ln_gamma(4.5f64)).abs() < 1e-5);
    }
}
