//! Eigenbasis of the shifted harmonic oscillator
//! `H = -d^2/dx^2 + (alpha x + beta)^2 / 4 + alpha / 2`, `alpha < 0`.
//!
//! `psi_n(x) = (-alpha/2)^(1/4) h_n(s)` with `s = sqrt(-alpha/2) x - beta / sqrt(-2 alpha)`
//! and `h_n` the normalized Hermite function. This equals the Rodrigues-form
//! definition with the Gaussian factor `exp(alpha x^2/4 + beta x/2 + beta^2/(4 alpha))`,
//! but stays finite for large `n`.

use libm::lgamma as ln_gamma;

use crate::error::{Error, Result};
use crate::grid::{interior_stencils, UniformGrid};
use crate::quadrature::TAIL_CUTOFF;
use crate::special::{HermiteTable, PI_POW_NEG_QUARTER};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OscillatorParams {
    alpha: f64,
    beta: f64,
}

impl OscillatorParams {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha.is_finite() && beta.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "oscillator parameters must be finite (alpha = {alpha}, beta = {beta})"
            )));
        }
        if alpha >= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "alpha must be < 0 (got {alpha})"
            )));
        }
        Ok(Self { alpha, beta })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// `sqrt(-alpha/2)`, the slope of `s` in `x`.
    pub fn scale(&self) -> f64 {
        (-0.5 * self.alpha).sqrt()
    }

    /// `x* = -beta/alpha`, the center of the Gaussian envelope (`s = 0`).
    pub fn peak(&self) -> f64 {
        -self.beta / self.alpha
    }

    /// The Hermite argument `s(x)`.
    pub fn hermite_argument(&self, x: f64) -> f64 {
        self.scale() * x - self.beta / (-2.0 * self.alpha).sqrt()
    }

    /// Inverse of [`hermite_argument`](Self::hermite_argument).
    pub fn position(&self, s: f64) -> f64 {
        s / self.scale() + self.peak()
    }

    pub fn psi(&self, n: usize, x: f64) -> Result<f64> {
        let mut out = vec![0.0; n + 1];
        self.psi_all(x, &mut out)?;
        Ok(out[n])
    }

    /// `psi_0(x) .. psi_{len-1}(x)` in one recurrence pass.
    pub fn psi_all(&self, x: f64, out: &mut [f64]) -> Result<()> {
        if !x.is_finite() {
            return Err(Error::Domain(format!("x must be finite (got {x})")));
        }
        let table = HermiteTable::new(out.len().saturating_sub(1));
        self.psi_with(&table, x, out);
        Ok(())
    }

    pub(crate) fn psi_with(&self, table: &HermiteTable, x: f64, out: &mut [f64]) {
        table.functions(self.hermite_argument(x), out);
        let norm = self.scale().sqrt();
        out.iter_mut().for_each(|v| *v *= norm);
    }

    /// Eigenvalue `lambda_n = -alpha n`.
    pub fn eigenvalue(&self, n: usize) -> f64 {
        -self.alpha * n as f64
    }

    /// Peak value `psi_0(x*) = (-alpha / (2 pi))^(1/4)`.
    pub fn ground_peak(&self) -> f64 {
        self.scale().sqrt() * PI_POW_NEG_QUARTER
    }

    /// Interval outside which `|psi_k| < 1e-18 * max psi_0` for every
    /// `k <= n`. The Gaussian envelope alone is not enough for `n > 0`: the
    /// polynomial factor carries the function past the envelope cutoff.
    pub fn support(&self, n: usize) -> (f64, f64) {
        let s = support_halfwidth(n);
        let x0 = self.peak();
        let w = s / self.scale();
        (x0 - w, x0 + w)
    }

    /// Max over interior nodes of
    /// `|-psi_n'' + ((alpha x + beta)^2/4 + alpha/2) psi_n - lambda_n psi_n|`
    /// with `psi_n''` by central differences.
    pub fn hamiltonian_residual(&self, n: usize, grid: &UniformGrid) -> Result<f64> {
        grid.require_stencil()?;
        let table = HermiteTable::new(n);
        let mut buf = vec![0.0; n + 1];
        let values: Vec<f64> = grid
            .points()
            .map(|x| {
                self.psi_with(&table, x, &mut buf);
                buf[n]
            })
            .collect();
        let lambda = self.eigenvalue(n);
        Ok(interior_stencils(grid, &values)
            .map(|st| {
                let shift = self.alpha * st.x + self.beta;
                let potential = 0.25 * shift * shift + 0.5 * self.alpha;
                (-st.d2 + potential * st.value - lambda * st.value).abs()
            })
            .fold(0.0, f64::max))
    }
}

/// Half-width in `s` beyond which `|h_k(s)| < 1e-18 h_0(0)` for all `k <= n`.
pub(crate) fn support_halfwidth(n: usize) -> f64 {
    let target = TAIL_CUTOFF.ln() + PI_POW_NEG_QUARTER.ln();
    // |h_n(s)| <= 2 (2s)^n exp(-s^2/2) pi^(-1/4) / sqrt(2^n n!) past the turning point.
    let log_bound = |s: f64| {
        let nf = n as f64;
        std::f64::consts::LN_2 + nf * (2.0 * s).ln() - 0.5 * s * s - PI_POW_NEG_QUARTER.ln().abs()
            - 0.5 * (nf * std::f64::consts::LN_2 + ln_gamma(nf + 1.0))
    };
    let mut s = (2.0 * n as f64 + 1.0).sqrt().max(1.0);
    while log_bound(s) > target {
        s += 0.25;
    }
    s
}
