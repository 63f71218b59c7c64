//! Hermite polynomials, normalized Hermite functions and the standard normal
//! CDF.
//!
//! `h_n(s) = (n! 2^n sqrt(pi))^(-1/2) exp(-s^2/2) H_n(s)` is evaluated by its
//! own three-term recurrence, so neither `n!` nor `2^n` is ever formed. The
//! running value is rescaled whenever it grows past `1e150`, which keeps the
//! recurrence usable far into the Gaussian tail where `exp(-s^2/2)` alone
//! would underflow.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use crate::error::{Error, Result};

const RESCALE_THRESHOLD: f64 = 1e150;
const RESCALE_LOG: f64 = 150.0 * std::f64::consts::LN_10;

/// `pi^(-1/4)`
pub const PI_POW_NEG_QUARTER: f64 = 0.751_125_544_464_942_5;

fn check_finite(s: f64) -> Result<()> {
    if s.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("Hermite argument must be finite (got {s})")))
    }
}

/// Physicists' Hermite polynomial `H_n(s)`.
///
/// Uses `H_{n+1} = 2s H_n - 2n H_{n-1}`. The raw polynomial overflows for
/// large `n` (around `n = 150` at moderate `s`); use [`hermite_function`]
/// there.
pub fn hermite(n: usize, s: f64) -> Result<f64> {
    check_finite(s)?;
    let mut prev = 1.0;
    if n == 0 {
        return Ok(prev);
    }
    let mut cur = 2.0 * s;
    for k in 1..n {
        let next = 2.0 * s * cur - 2.0 * k as f64 * prev;
        prev = cur;
        cur = next;
    }
    Ok(cur)
}

/// Normalized Hermite function `h_n(s)`, orthonormal on the real line.
pub fn hermite_function(n: usize, s: f64) -> Result<f64> {
    check_finite(s)?;
    let table = HermiteTable::new(n);
    let mut out = vec![0.0; n + 1];
    table.functions(s, &mut out);
    Ok(out[n])
}

/// Precomputed recurrence coefficients for evaluating a whole run of
/// Hermite functions `h_0..h_N` at one point.
#[derive(Debug, Clone)]
pub struct HermiteTable {
    up: Vec<f64>,
    down: Vec<f64>,
}

impl HermiteTable {
    pub fn new(max_order: usize) -> Self {
        let up = (0..max_order).map(|n| (2.0 / (n + 1) as f64).sqrt()).collect();
        let down = (0..max_order)
            .map(|n| (n as f64 / (n + 1) as f64).sqrt())
            .collect();
        Self { up, down }
    }

    pub fn max_order(&self) -> usize {
        self.up.len()
    }

    /// Writes `h_0(s) .. h_{len-1}(s)` into `out`.
    ///
    /// Panics if `out` is longer than `max_order + 1`.
    pub fn functions(&self, s: f64, out: &mut [f64]) {
        self.run(s, -0.5 * s * s, out);
    }

    /// Writes `exp(s^2/2) h_n(s)`, the orthonormal Hermite polynomials
    /// `pi^(-1/4) H_n(s) / sqrt(2^n n!)`. These grow like `exp(s^2/2)` and
    /// overflow once that does.
    pub fn scaled_polynomials(&self, s: f64, out: &mut [f64]) {
        self.run(s, 0.0, out);
    }

    fn run(&self, s: f64, mut log_scale: f64, out: &mut [f64]) {
        let Some((first, rest)) = out.split_first_mut() else {
            return;
        };
        assert!(
            rest.len() <= self.max_order(),
            "requested {} orders from a table of {}",
            rest.len(),
            self.max_order()
        );
        let mut factor = log_scale.exp();
        let mut prev = 0.0;
        let mut cur = PI_POW_NEG_QUARTER;
        *first = cur * factor;
        for (n, slot) in rest.iter_mut().enumerate() {
            let next = s * self.up[n] * cur - self.down[n] * prev;
            prev = cur;
            cur = next;
            if cur.abs() > RESCALE_THRESHOLD {
                cur /= RESCALE_THRESHOLD;
                prev /= RESCALE_THRESHOLD;
                log_scale += RESCALE_LOG;
                factor = log_scale.exp();
            }
            *slot = cur * factor;
        }
    }
}

/// Standard normal CDF `Phi(z) = (1 + erf(z / sqrt 2)) / 2`, accurate to
/// about `1e-16` absolute on the whole real line.
pub fn norm_cdf(z: f64) -> f64 {
    // erfc keeps full relative accuracy in the lower tail.
    0.5 * libm::erfc(-z * FRAC_1_SQRT_2)
}

/// Standard normal density.
pub fn norm_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * PI).sqrt()
}

#[cfg(test)]
#[allow(clippy::excessive_precision)]
mod tests {
    use super::*;

    /// Explicit monomial coefficients of `H_n`, built from
    /// `H_{n+1}(s) = 2s H_n(s) - H_n'(s)` on coefficient vectors.
    fn monomial_coefficients(n: usize) -> Vec<f64> {
        let mut c = vec![1.0];
        for _ in 0..n {
            let mut next = vec![0.0; c.len() + 1];
            for (k, &ck) in c.iter().enumerate() {
                next[k + 1] += 2.0 * ck;
                if k > 0 {
                    next[k - 1] -= k as f64 * ck;
                }
            }
            c = next;
        }
        c
    }

    fn horner(c: &[f64], s: f64) -> f64 {
        c.iter().rev().fold(0.0, |acc, &ck| acc * s + ck)
    }

    #[test]
    fn low_orders() {
        assert_eq!(hermite(0, 0.7).unwrap(), 1.0);
        assert!((hermite(1, 0.7).unwrap() - 1.4).abs() < 1e-15);
        assert!((hermite(3, 1.0).unwrap() + 4.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_non_finite_arguments() {
        assert!(matches!(hermite(3, f64::NAN), Err(Error::Domain(_))));
        assert!(matches!(
            hermite_function(3, f64::INFINITY),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn recurrence_matches_monomial_expansion() {
        for n in 0..=30 {
            let c = monomial_coefficients(n);
            for i in 0..=100 {
                let s = -5.0 + 0.1 * i as f64;
                let direct = horner(&c, s);
                let rec = hermite(n, s).unwrap();
                // Relative to the coefficient-magnitude sum: the monomial
                // form cancels badly near the roots.
                let scale = horner(&c.iter().map(|x| x.abs()).collect::<Vec<_>>(), s.abs());
                assert!(
                    (direct - rec).abs() <= 1e-10 * scale.max(1.0),
                    "n={n} s={s}: {direct} vs {rec}"
                );
            }
        }
    }

    #[test]
    fn hermite_ode_residual() {
        let h = 1e-4;
        for n in 0..=10 {
            for i in 0..=40 {
                let s = -2.0 + 0.1 * i as f64;
                let f = |x: f64| hermite(n, x).unwrap();
                let d1 = (f(s + h) - f(s - h)) / (2.0 * h);
                let d2 = (f(s + h) - 2.0 * f(s) + f(s - h)) / (h * h);
                let res = d2 - 2.0 * s * d1 + 2.0 * n as f64 * f(s);
                assert!(res.abs() < 1e-4 * (1.0 + f(s).abs()), "n={n} s={s} res={res}");
            }
        }
    }

    #[test]
    fn hermite_function_special_values() {
        assert!((hermite_function(0, 0.0).unwrap() - 0.751_125_544_464_942_5).abs() < 1e-16);
        assert_eq!(hermite_function(1, 0.0).unwrap(), 0.0);
        // 50-digit evaluation of the unnormalized product.
        let expected = -0.300_031_694_506_254_87;
        let got = hermite_function(10, 3.2).unwrap();
        assert!((got - expected).abs() < 1e-14, "{got}");
    }

    #[test]
    fn hermite_function_matches_direct_product_for_small_orders() {
        let mut fact = 1.0;
        for n in 0..=20usize {
            if n > 0 {
                fact *= n as f64;
            }
            let norm = (fact * 2f64.powi(n as i32) * PI.sqrt()).sqrt();
            for i in 0..=24 {
                let s = -6.0 + 0.5 * i as f64;
                let direct = (-0.5 * s * s).exp() * hermite(n, s).unwrap() / norm;
                let stable = hermite_function(n, s).unwrap();
                assert!((direct - stable).abs() < 1e-12, "n={n} s={s}");
            }
        }
    }

    #[test]
    fn high_orders_stay_finite_and_bounded() {
        let table = HermiteTable::new(4096);
        let mut out = vec![0.0; 4097];
        for &s in &[-60.0, -30.0, -3.0, 0.0, 0.5, 17.0, 45.0] {
            table.functions(s, &mut out);
            for (n, v) in out.iter().enumerate() {
                assert!(v.is_finite(), "n={n} s={s}");
                // Cramer's inequality.
                assert!(v.abs() <= PI_POW_NEG_QUARTER * (1.0 + 1e-10), "n={n} s={s} v={v}");
            }
        }
    }

    #[test]
    fn deep_tail_of_high_orders_is_not_flushed_to_zero() {
        // exp(-40^2/2) underflows, but h_1000(40) does not.
        let table = HermiteTable::new(1000);
        let mut out = vec![0.0; 1001];
        table.functions(40.0, &mut out);
        assert_eq!(out[0], 0.0);
        assert!(out[1000].abs() > 1e-300);
    }

    #[test]
    fn scaled_polynomials_match_functions_times_gaussian() {
        let table = HermiteTable::new(64);
        let mut a = vec![0.0; 65];
        let mut b = vec![0.0; 65];
        for &s in &[-3.0, -0.4, 1.1, 2.5] {
            table.functions(s, &mut a);
            table.scaled_polynomials(s, &mut b);
            let g = (0.5 * s * s).exp();
            for n in 0..=64 {
                assert!((a[n] * g - b[n]).abs() <= 1e-12 * b[n].abs().max(1.0));
            }
        }
    }

    /// Maclaurin series of erf, summed in order of decreasing term size.
    fn erf_series(x: f64) -> f64 {
        let mut term = x;
        let mut sum = x;
        let mut n = 0usize;
        while term.abs() > 1e-30 {
            n += 1;
            term *= -x * x / n as f64;
            sum += term / (2 * n + 1) as f64;
        }
        sum * 2.0 / PI.sqrt()
    }

    #[test]
    fn norm_cdf_values() {
        assert_eq!(norm_cdf(0.0), 0.5);
        assert_eq!(norm_cdf(f64::INFINITY), 1.0);
        assert_eq!(norm_cdf(f64::NEG_INFINITY), 0.0);
        assert!((norm_cdf(1.0) - 0.841_344_746_068_542_9).abs() < 1e-15);
        let series = 0.5 * (1.0 + erf_series(FRAC_1_SQRT_2));
        assert!((norm_cdf(1.0) - series).abs() < 1e-15);
    }

    #[test]
    fn norm_cdf_against_series_on_a_grid() {
        for i in 0..=60 {
            let z = -3.0 + 0.1 * i as f64;
            let series = 0.5 * (1.0 + erf_series(z * FRAC_1_SQRT_2));
            assert!((norm_cdf(z) - series).abs() < 1e-12, "z={z}");
        }
    }

    #[test]
    fn norm_cdf_reflection_and_monotonicity() {
        let mut last = 0.0;
        for i in 0..=4000 {
            let z = -20.0 + 0.01 * i as f64;
            let p = norm_cdf(z);
            assert!((p + norm_cdf(-z) - 1.0).abs() <= 1e-15, "z={z}");
            assert!(p >= last);
            last = p;
        }
    }
}
