//! Series solution of the generalized Black-Scholes equation
//! `dC/dt = H_V C` with `V(x) = a x + r`, `a < 0`, in log-price `x = ln S`.
//!
//! The similarity transform `u(x) = -(a/(2 sigma^2)) x^2 - (r/sigma^2 - 1/2) x`
//! maps `H_V` to `H_eff = (sigma^2/2) H`, a shifted oscillator with
//! `alpha = 2a/sigma^2`, `beta = 2r/sigma^2 + 1`. With `psi_n` its
//! eigenfunctions,
//!
//! ```text
//! C(x, t) = e^{u(x)} sum_n I_n e^{a n (T - t)} psi_n(x),
//! I_n     = integral of e^{-u(x)} payoff(x) psi_n(x) dx.
//! ```
//!
//! Everything is carried out in the Hermite variable `s`. There
//! `e^{-u(x)} e^x = e^{gamma} e^{-s^2/2}` with `gamma = -beta^2/(4 alpha)`, and
//! `e^{-u(x)} = e^{gamma} e^{-s^2/2} e^{-x}` is a Gaussian centered at
//! `s = -1/c`, `c = sqrt(-alpha/2)`. Dividing out `e^{gamma} c^{-1/2}` gives
//! the scaled coefficients
//!
//! ```text
//! J_n = integral over the exercise region of
//!       (e^{-s^2/2} - K e^{r/a} e^{-(s + 1/c)^2/2}) h_n(s) ds      (call)
//! C(S, t) = S sum_n J_n e^{a n (T - t)} e^{s^2/2} h_n(s).
//! ```
//!
//! Each Gaussian piece is integrated numerically only over the side of
//! `ln K` where it decays away from its center. The other side is the
//! closed-form full-line projection minus that tail. When `|a|` is small
//! the strike sits far out in the Gaussian tail, and a direct integral
//! over the bulk would bury the price under cancellation error.
//!
//! `c_n = I_n e^{a n T}` itself is never formed. Only `e^{a n (T - t)} <= 1`
//! appears, so nothing overflows at large `n`.

use std::f64::consts::PI;

use crate::black_scholes::{check_spot, MarketParams, OptionKind, OptionSpec};
use crate::error::{Error, Result};
use crate::grid::{interior_stencils, UniformGrid};
use crate::oscillator::OscillatorParams;
use crate::quadrature::{integrate_vector, GaussianDecay, QuadratureSpec};
use crate::special::HermiteTable;

/// `alpha = 2a/sigma^2`, `beta = 2r/sigma^2 + 1`.
pub fn oscillator_params_from_market(mkt: &MarketParams) -> Result<OscillatorParams> {
    mkt.validate()?;
    if !(mkt.a < 0.0) {
        return Err(Error::Domain(format!(
            "the oscillator basis needs a < 0 (got a = {}); use the closed form for a = 0",
            mkt.a
        )));
    }
    let s2 = mkt.sigma * mkt.sigma;
    OscillatorParams::new(2.0 * mkt.a / s2, 2.0 * mkt.r / s2 + 1.0)
}

/// `u(x) = -(a/(2 sigma^2)) x^2 - (r/sigma^2 - 1/2) x`, the exponent that
/// conjugates `H_V` into the Hermitian `H_eff = e^{-u} H_V e^{u}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimilarityTransform {
    quadratic: f64,
    linear: f64,
}

impl SimilarityTransform {
    pub fn new(mkt: &MarketParams) -> Result<Self> {
        oscillator_params_from_market(mkt)?;
        let s2 = mkt.sigma * mkt.sigma;
        Ok(Self {
            quadratic: -mkt.a / (2.0 * s2),
            linear: -(mkt.r / s2 - 0.5),
        })
    }

    pub fn u(&self, x: f64) -> f64 {
        (self.quadratic * x + self.linear) * x
    }

    pub fn exp_u(&self, x: f64) -> f64 {
        self.u(x).exp()
    }

    pub fn exp_neg_u(&self, x: f64) -> f64 {
        (-self.u(x)).exp()
    }
}

/// A priced point together with the size of the last retained series term.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesValue {
    pub price: f64,
    pub last_term: f64,
}

/// Raised when the last retained term exceeds the caller's bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncationWarning {
    pub last_term: f64,
    pub bound: f64,
}

/// Truncated eigenfunction expansion for one contract under one market.
/// Immutable once built; share freely across threads.
#[derive(Debug, Clone)]
pub struct SpectralSolution {
    mkt: MarketParams,
    spec: OptionSpec,
    osc: OscillatorParams,
    coeffs: Vec<f64>,
    errors: Vec<f64>,
    table: HermiteTable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Side {
    Above,
    Below,
}

impl SpectralSolution {
    /// Projects the transformed payoff onto `psi_0 .. psi_N`.
    pub fn compute(
        mkt: &MarketParams,
        spec: &OptionSpec,
        n_terms: usize,
        quad: &QuadratureSpec,
    ) -> Result<Self> {
        let osc = oscillator_params_from_market(mkt)?;
        spec.validate()?;
        quad.validate()?;
        let table = HermiteTable::new(n_terms);
        let c = osc.scale();
        let s_strike = osc.hermite_argument(spec.strike.ln());
        let strike_center = -1.0 / c;
        let strike_weight = (spec.strike.ln() + mkt.r / mkt.a).exp();
        if !strike_weight.is_finite() {
            return Err(Error::Numerical(format!(
                "strike term weight K e^(r/a) overflows for r = {}, a = {}",
                mkt.r, mkt.a
            )));
        }

        let (side, sign) = match spec.kind {
            OptionKind::Call => (Side::Above, 1.0),
            OptionKind::Put => (Side::Below, -1.0),
        };
        let ground = project_gaussian(&table, 0.0, s_strike, side, quad)?;
        let strike = project_gaussian(&table, strike_center, s_strike, side, quad)?;

        let coeffs = ground
            .0
            .iter()
            .zip(&strike.0)
            .map(|(g, k)| sign * (g - strike_weight * k))
            .collect();
        let errors = ground
            .1
            .iter()
            .zip(&strike.1)
            .map(|(g, k)| g + strike_weight * k)
            .collect();
        Ok(Self {
            mkt: *mkt,
            spec: *spec,
            osc,
            coeffs,
            errors,
            table,
        })
    }

    pub fn market(&self) -> &MarketParams {
        &self.mkt
    }

    pub fn option(&self) -> &OptionSpec {
        &self.spec
    }

    pub fn oscillator(&self) -> &OscillatorParams {
        &self.osc
    }

    /// Highest retained index `N`.
    pub fn truncation(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// `J_n = I_n e^{-gamma} sqrt(c)`.
    pub fn scaled_coefficients(&self) -> &[f64] {
        &self.coeffs
    }

    /// Largest quadrature error bound over the scaled coefficients.
    pub fn coeff_error(&self) -> f64 {
        self.errors.iter().copied().fold(0.0, f64::max)
    }

    /// `e^{gamma} / sqrt(c)`, the factor between `J_n` and `I_n`.
    fn raw_scale(&self) -> f64 {
        let (alpha, beta) = (self.osc.alpha(), self.osc.beta());
        (-beta * beta / (4.0 * alpha)).exp() / self.osc.scale().sqrt()
    }

    /// `I_n`, the projection of `e^{-u} payoff` on `psi_n` in the original
    /// variable. Overflows to infinity when `beta^2 / (4 |alpha|)` exceeds
    /// the `f64` exponent range, although the price itself stays finite.
    pub fn raw_coefficient(&self, n: usize) -> f64 {
        self.coeffs[n] * self.raw_scale()
    }

    pub fn raw_coefficients(&self) -> Vec<f64> {
        let k = self.raw_scale();
        self.coeffs.iter().map(|j| j * k).collect()
    }

    /// Price at `(S, t)`.
    pub fn price(&self, spot: f64, t: f64) -> Result<f64> {
        Ok(self.evaluate(spot, t)?.price)
    }

    /// Price plus the magnitude of the last retained term.
    pub fn evaluate(&self, spot: f64, t: f64) -> Result<SeriesValue> {
        check_spot(spot)?;
        self.spec.check_time(t)?;
        let x = spot.ln();
        let s = self.osc.hermite_argument(x);
        let mut h = vec![0.0; self.coeffs.len()];
        self.table.functions(s, &mut h);

        let damping = (self.mkt.a * (self.spec.maturity - t)).exp();
        let mut factor = 1.0;
        let mut sum = 0.0;
        let mut last = 0.0;
        for (j, hn) in self.coeffs.iter().zip(&h) {
            last = j * factor * hn;
            sum += last;
            factor *= damping;
        }
        let scale = (x + 0.5 * s * s).exp();
        let price = scale * sum;
        let last_term = (scale * last).abs();
        if !(price.is_finite() && last_term.is_finite()) {
            return Err(Error::Numerical(format!(
                "series evaluation left the f64 range at S = {spot} (Hermite argument {s})"
            )));
        }
        Ok(SeriesValue { price, last_term })
    }

    /// Like [`evaluate`](Self::evaluate) but flags a last term larger than
    /// `bound`. The price is returned either way.
    pub fn price_bounded(
        &self,
        spot: f64,
        t: f64,
        bound: f64,
    ) -> Result<(f64, Option<TruncationWarning>)> {
        let v = self.evaluate(spot, t)?;
        let warning = (v.last_term > bound).then_some(TruncationWarning {
            last_term: v.last_term,
            bound,
        });
        Ok((v.price, warning))
    }
}

/// Projections of `e^{-(s-m)^2/2}` restricted to one side of `s_strike` on
/// `h_0 .. h_N`, with error bounds.
fn project_gaussian(
    table: &HermiteTable,
    center: f64,
    s_strike: f64,
    side: Side,
    quad: &QuadratureSpec,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let decaying_side = if s_strike >= center {
        Side::Above
    } else {
        Side::Below
    };
    let (tail, errors) = gaussian_tail(table, center, s_strike, decaying_side, quad)?;
    if side == decaying_side {
        return Ok((tail, errors));
    }
    let full = full_line_projection(center, table.max_order());
    let values = full.iter().zip(&tail).map(|(f, t)| f - t).collect();
    Ok((values, errors))
}

/// Integral of `e^{-(s-m)^2/2} h_n(s)` over the side of `s_strike` facing
/// away from `m`.
fn gaussian_tail(
    table: &HermiteTable,
    center: f64,
    s_strike: f64,
    side: Side,
    quad: &QuadratureSpec,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let dim = table.max_order() + 1;
    let offset = s_strike - center;
    let decay = GaussianDecay::new(center, 0.5)?;
    let (lo, hi) = match side {
        Side::Above => (s_strike, decay.upper_cutoff(s_strike)),
        Side::Below => (decay.lower_cutoff(s_strike), s_strike),
    };

    // Start with about one oscillation of h_N per panel.
    let wavelength = 2.0 * PI / (2.0 * dim as f64 - 1.0).sqrt();
    let panels = (((hi - lo) / wavelength).ceil() as usize)
        .max(4)
        .min((quad.max_subdivisions / 4).max(1));
    let breakpoints: Vec<f64> = (0..=panels)
        .map(|i| lo + (hi - lo) * i as f64 / panels as f64)
        .collect();

    // Normalized so the envelope is 1 at the strike.
    let base = 0.5 * offset * offset;
    let mut h = vec![0.0; dim];
    let integrand = |s: f64, out: &mut [f64]| {
        let d = s - center;
        let w = (base - 0.5 * d * d).exp();
        table.functions(s, &mut h);
        for (o, hn) in out.iter_mut().zip(&h) {
            *o = w * hn;
        }
    };
    let est = integrate_vector(integrand, dim, &breakpoints, quad).map_err(|e| match e {
        Error::Convergence {
            component,
            value,
            error,
        } => Error::CoefficientConvergence {
            n: component.unwrap_or(0),
            value,
            error,
        },
        other => other,
    })?;
    let weight = (-base).exp();
    Ok((
        est.values.iter().map(|v| v * weight).collect(),
        est.errors.iter().map(|e| e * weight).collect(),
    ))
}

/// Integral of `e^{-(s-m)^2/2} h_n(s)` over the whole line:
/// `pi^(1/4) e^{-m^2/4} (m/sqrt 2)^n / sqrt(n!)`.
pub(crate) fn full_line_projection(center: f64, max_order: usize) -> Vec<f64> {
    let mut out = vec![0.0; max_order + 1];
    let quarter_log_pi = 0.25 * PI.ln();
    if center == 0.0 {
        out[0] = quarter_log_pi.exp();
        return out;
    }
    let log_step = (center.abs() / std::f64::consts::SQRT_2).ln();
    let mut log_mag = quarter_log_pi - 0.25 * center * center;
    for (n, slot) in out.iter_mut().enumerate() {
        if n > 0 {
            log_mag += log_step - 0.5 * (n as f64).ln();
        }
        let sign = if center < 0.0 && n % 2 == 1 { -1.0 } else { 1.0 };
        *slot = sign * log_mag.exp();
    }
    out
}

/// Max-abs residual of the pricing generator
/// `H_V f = -(sigma^2/2) f'' + (sigma^2/2 - V) f' + V f` applied to `f` on
/// the interior of `grid`, with central differences.
pub fn generator_residual<V, F>(sigma: f64, potential: V, grid: &UniformGrid, f: F) -> Result<f64>
where
    V: Fn(f64) -> f64,
    F: Fn(f64) -> f64,
{
    grid.require_stencil()?;
    let half_var = 0.5 * sigma * sigma;
    let values: Vec<f64> = grid.points().map(f).collect();
    Ok(interior_stencils(grid, &values)
        .map(|st| {
            let v = potential(st.x);
            (-half_var * st.d2 + (half_var - v) * st.d1 + v * st.value).abs()
        })
        .fold(0.0, f64::max))
}

/// Residual of `H_V e^x` for the linear potential. It vanishes identically
/// for every `V`, so what remains is discretization error of order `h^2`.
pub fn martingale_residual(mkt: &MarketParams, grid: &UniformGrid) -> Result<f64> {
    mkt.validate()?;
    generator_residual(mkt.sigma, |x| mkt.potential(x), grid, f64::exp)
}

/// Max-abs residual of `H_eff psi_n = -a n psi_n` with
/// `H_eff = -(sigma^2/2) d^2/dx^2 + V'/2 + V^2/(2 sigma^2) + V/2 + sigma^2/8`.
pub fn effective_hamiltonian_residual(
    mkt: &MarketParams,
    n: usize,
    grid: &UniformGrid,
) -> Result<f64> {
    let osc = oscillator_params_from_market(mkt)?;
    grid.require_stencil()?;
    let table = HermiteTable::new(n);
    let mut buf = vec![0.0; n + 1];
    let values: Vec<f64> = grid
        .points()
        .map(|x| {
            osc.psi_with(&table, x, &mut buf);
            buf[n]
        })
        .collect();
    let s2 = mkt.sigma * mkt.sigma;
    let eigenvalue = -mkt.a * n as f64;
    Ok(interior_stencils(grid, &values)
        .map(|st| {
            let v = mkt.potential(st.x);
            let w = 0.5 * mkt.a + v * v / (2.0 * s2) + 0.5 * v + s2 / 8.0;
            (-0.5 * s2 * st.d2 + w * st.value - eigenvalue * st.value).abs()
        })
        .fold(0.0, f64::max))
}
