//! Independent reference prices shared by the integration tests.

#![allow(dead_code)]

use gbs::special::norm_cdf;
use gbs::{MarketParams, OptionKind, OptionSpec};

/// Exact price under `V(x) = a x + r`, `a < 0`, from the joint Gaussian law
/// of `X_tau` and `Y = int_0^tau X ds` for
/// `dX = (a X + r - sigma^2/2) ds + sigma dW`. The price is
/// `e^{-r tau} E[e^{-a Y} payoff(X_tau)]`.
pub fn affine_price(mkt: &MarketParams, spec: &OptionSpec, spot: f64, t: f64) -> f64 {
    let (a, r, s2) = (mkt.a, mkt.r, mkt.sigma * mkt.sigma);
    let tau = spec.maturity - t;
    let x = spot.ln();
    if tau == 0.0 {
        return match spec.kind {
            OptionKind::Call => (spot - spec.strike).max(0.0),
            OptionKind::Put => (spec.strike - spot).max(0.0),
        };
    }
    let drift = r - 0.5 * s2;
    let e1 = (a * tau).exp_m1() / a;
    let e2 = (2.0 * a * tau).exp_m1() / (2.0 * a);

    let mean_x = x * (a * tau).exp() + drift * e1;
    let mean_y = x * e1 + drift / a * (e1 - tau);
    let var_x = s2 * e2;
    let var_y = s2 / (a * a) * (e2 - 2.0 * e1 + tau);
    let cov = s2 / a * (e2 - e1);

    // Tilting by e^{-a Y} shifts the mean of X_tau by -a cov.
    let log_weight = -a * mean_y + 0.5 * a * a * var_y - r * tau;
    let m = mean_x - a * cov;
    let sd = var_x.sqrt();
    let k = spec.strike;
    let d2 = (m - k.ln()) / sd;
    let d1 = d2 + sd;
    let forward = (m + 0.5 * var_x).exp();
    let value = match spec.kind {
        OptionKind::Call => forward * norm_cdf(d1) - k * norm_cdf(d2),
        OptionKind::Put => k * norm_cdf(-d2) - forward * norm_cdf(-d1),
    };
    log_weight.exp() * value
}

/// `sigma = 0.25`, `r = 0.03` with tilt `a`.
pub fn market(a: f64) -> MarketParams {
    MarketParams::new(0.25, 0.03, a).unwrap()
}

/// `n` evenly spaced points over `[lo, hi]`.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect()
}
