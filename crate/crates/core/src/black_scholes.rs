//! Market and contract parameters, European payoffs, and the closed-form
//! Black-Scholes price (the `a = 0` member of the model family).

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::special::norm_cdf;

/// Volatility `sigma`, risk-free rate `r` and potential tilt `a`.
///
/// `a = 0` is the standard Black-Scholes model; the generalized equation
/// uses the potential `V(x) = a x + r` with `a < 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarketParams {
    pub sigma: f64,
    pub r: f64,
    pub a: f64,
}

impl MarketParams {
    pub fn new(sigma: f64, r: f64, a: f64) -> Result<Self> {
        let mkt = Self { sigma, r, a };
        mkt.validate()?;
        Ok(mkt)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma.is_finite() && self.r.is_finite() && self.a.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "market parameters must be finite (sigma = {}, r = {}, a = {})",
                self.sigma, self.r, self.a
            )));
        }
        if self.sigma <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "sigma must be > 0 (got {})",
                self.sigma
            )));
        }
        if self.a > 0.0 {
            return Err(Error::InvalidParameter(format!("a must be <= 0 (got {})", self.a)));
        }
        Ok(())
    }

    /// The potential `V(x) = a x + r`.
    pub fn potential(&self, x: f64) -> f64 {
        self.a * x + self.r
    }

    /// Same market with a different tilt.
    pub fn with_tilt(&self, a: f64) -> Result<Self> {
        Self::new(self.sigma, self.r, a)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OptionKind {
    Call,
    Put,
}

impl fmt::Display for OptionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OptionKind::Call => "call",
            OptionKind::Put => "put",
        })
    }
}

impl FromStr for OptionKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "call" => Ok(OptionKind::Call),
            "put" => Ok(OptionKind::Put),
            other => Err(Error::Usage(format!(
                "option kind must be call or put (got {other:?})"
            ))),
        }
    }
}

/// European contract: strike `K`, maturity `T` in years, call or put.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptionSpec {
    pub strike: f64,
    pub maturity: f64,
    pub kind: OptionKind,
}

impl OptionSpec {
    pub fn new(strike: f64, maturity: f64, kind: OptionKind) -> Result<Self> {
        let spec = Self {
            strike,
            maturity,
            kind,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn call(strike: f64, maturity: f64) -> Result<Self> {
        Self::new(strike, maturity, OptionKind::Call)
    }

    pub fn put(strike: f64, maturity: f64) -> Result<Self> {
        Self::new(strike, maturity, OptionKind::Put)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.strike > 0.0 && self.strike.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "strike must be > 0 (got {})",
                self.strike
            )));
        }
        if !(self.maturity > 0.0 && self.maturity.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "maturity must be > 0 (got {})",
                self.maturity
            )));
        }
        Ok(())
    }

    pub fn with_kind(&self, kind: OptionKind) -> Self {
        Self { kind, ..*self }
    }

    /// Errors unless `0 <= t <= T`.
    pub fn check_time(&self, t: f64) -> Result<()> {
        if !(t >= 0.0 && t <= self.maturity) {
            return Err(Error::Domain(format!(
                "evaluation time must satisfy 0 <= t <= T (got t = {t}, T = {})",
                self.maturity
            )));
        }
        Ok(())
    }

    /// Payoff at maturity in log-price `x = ln S`.
    pub fn log_payoff(&self, x: f64) -> f64 {
        let s = x.exp();
        match self.kind {
            OptionKind::Call => (s - self.strike).max(0.0),
            OptionKind::Put => (self.strike - s).max(0.0),
        }
    }
}

pub(crate) fn check_spot(spot: f64) -> Result<()> {
    if !(spot > 0.0 && spot.is_finite()) {
        return Err(Error::Domain(format!("underlying price must be > 0 (got {spot})")));
    }
    Ok(())
}

/// Terminal payoff `max(S - K, 0)` or `max(K - S, 0)`.
pub fn payoff(spec: &OptionSpec, spot: f64) -> Result<f64> {
    check_spot(spot)?;
    Ok(match spec.kind {
        OptionKind::Call => (spot - spec.strike).max(0.0),
        OptionKind::Put => (spec.strike - spot).max(0.0),
    })
}

/// Closed-form Black-Scholes price at `(S, t)`. `mkt.a` is ignored.
///
/// The put uses `K e^{-r(T-t)} Phi(-d2) - S Phi(-d1)`, so put-call parity
/// holds exactly. At `t = T` the payoff is returned directly.
pub fn bs_price(mkt: &MarketParams, spec: &OptionSpec, spot: f64, t: f64) -> Result<f64> {
    check_spot(spot)?;
    spec.check_time(t)?;
    let tau = spec.maturity - t;
    if tau == 0.0 {
        return payoff(spec, spot);
    }
    let vol = mkt.sigma * tau.sqrt();
    let d1 = ((spot / spec.strike).ln() + (mkt.r + 0.5 * mkt.sigma * mkt.sigma) * tau) / vol;
    let d2 = d1 - vol;
    let discounted_strike = spec.strike * (-mkt.r * tau).exp();
    Ok(match spec.kind {
        OptionKind::Call => spot * norm_cdf(d1) - discounted_strike * norm_cdf(d2),
        OptionKind::Put => discounted_strike * norm_cdf(-d2) - spot * norm_cdf(-d1),
    })
}
