//! Crank-Nicolson solver for the generalized Black-Scholes equation in
//! log-price, `dC/dtau = (sigma^2/2) C'' + (V - sigma^2/2) C' - V C` with
//! `tau = T - t` and `V(x) = a x + r`.
//!
//! The first step is replaced by two implicit Euler half-steps to damp the
//! payoff kink. Edge values are Dirichlet data from the forward contract:
//! `e^x - K P(x, tau)` for the in-the-money side, 0 on the other, where
//! `P = exp(A(tau) + B(tau) x)` is the exact price of a unit claim under the
//! same linear potential. At `a = 0`, `P = e^{-r tau}`.

use crate::black_scholes::{check_spot, MarketParams, OptionKind, OptionSpec};
use crate::error::{Error, Result};
use crate::grid::UniformGrid;

/// Log-price domain and resolution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FdGrid {
    pub x_min: f64,
    pub x_max: f64,
    pub nx: usize,
    pub nt: usize,
}

impl FdGrid {
    pub fn new(x_min: f64, x_max: f64, nx: usize, nt: usize) -> Result<Self> {
        let g = Self {
            x_min,
            x_max,
            nx,
            nt,
        };
        g.check()?;
        Ok(g)
    }

    /// `[ln K - halfwidth, ln K + halfwidth]`.
    pub fn centered(strike: f64, halfwidth: f64, nx: usize, nt: usize) -> Result<Self> {
        if !(strike > 0.0 && strike.is_finite()) {
            return Err(Error::InvalidParameter(format!("strike must be > 0 (got {strike})")));
        }
        let k = strike.ln();
        Self::new(k - halfwidth, k + halfwidth, nx, nt)
    }

    /// Six log-units either side of the strike, 2001 nodes, 2000 steps.
    pub fn reference(strike: f64) -> Result<Self> {
        Self::centered(strike, 6.0, 2001, 2000)
    }

    fn check(&self) -> Result<()> {
        if !(self.x_min.is_finite() && self.x_max.is_finite() && self.x_min < self.x_max) {
            return Err(Error::InvalidParameter(format!(
                "FD domain must be finite with x_min < x_max (got [{}, {}])",
                self.x_min, self.x_max
            )));
        }
        if self.nx < 3 {
            return Err(Error::InvalidParameter(format!(
                "FD grid needs nx >= 3 (got {})",
                self.nx
            )));
        }
        if self.nt < 1 {
            return Err(Error::InvalidParameter("FD grid needs nt >= 1".into()));
        }
        Ok(())
    }

    /// Checks the grid against a contract: the strike must be inside.
    pub fn validate(&self, spec: &OptionSpec) -> Result<()> {
        self.check()?;
        let k = spec.strike.ln();
        if !(self.x_min < k && k < self.x_max) {
            return Err(Error::InvalidParameter(format!(
                "FD domain [{}, {}] must contain ln K = {k}",
                self.x_min, self.x_max
            )));
        }
        Ok(())
    }

    pub fn space(&self) -> UniformGrid {
        UniformGrid::new(self.x_min, self.x_max, self.nx).expect("checked grid")
    }
}

/// Prices on the log-price nodes at one evaluation time.
#[derive(Debug, Clone, PartialEq)]
pub struct FdCurve {
    grid: UniformGrid,
    values: Vec<f64>,
}

impl FdCurve {
    pub fn grid(&self) -> &UniformGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `(S, price)` at every node.
    pub fn nodes(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.grid.points().map(f64::exp).zip(self.values.iter().copied())
    }

    /// Price at `spot` by four-point Lagrange interpolation in `ln S`.
    pub fn interpolate(&self, spot: f64) -> Result<f64> {
        check_spot(spot)?;
        let x = spot.ln();
        let (lo, hi) = (self.grid.min(), self.grid.max());
        if x < lo || x > hi {
            return Err(Error::Domain(format!(
                "S = {spot} lies outside the FD domain [{}, {}]",
                lo.exp(),
                hi.exp()
            )));
        }
        let n = self.values.len();
        let h = self.grid.step();
        let cell = (((x - lo) / h).floor() as usize).min(n - 2);
        if n < 4 {
            let w = (x - self.grid.x(cell)) / h;
            return Ok((1.0 - w) * self.values[cell] + w * self.values[cell + 1]);
        }
        let first = cell.saturating_sub(1).min(n - 4);
        let mut sum = 0.0;
        for j in 0..4 {
            let xj = self.grid.x(first + j);
            let mut w = 1.0;
            for m in 0..4 {
                if m != j {
                    let xm = self.grid.x(first + m);
                    w *= (x - xm) / (xj - xm);
                }
            }
            sum += w * self.values[first + j];
        }
        Ok(sum)
    }
}

/// `ln P(x, tau) = A(tau) + B(tau) x` for the claim paying 1 at maturity.
fn log_unit_claim(mkt: &MarketParams, tau: f64, x: f64) -> f64 {
    let (a, r, s2) = (mkt.a, mkt.r, mkt.sigma * mkt.sigma);
    if a == 0.0 {
        return -r * tau;
    }
    // B = 1 - e^{a tau}; A = int_0^tau (s2/2) B^2 + (r - s2/2) B - r.
    let em1 = (a * tau).exp_m1();
    let b = -em1;
    let int_b = tau - em1 / a;
    let int_b2 = tau - 2.0 * em1 / a + (2.0 * a * tau).exp_m1() / (2.0 * a);
    let big_a = 0.5 * s2 * int_b2 + (r - 0.5 * s2) * int_b - r * tau;
    big_a + b * x
}

fn boundary(mkt: &MarketParams, spec: &OptionSpec, tau: f64, x: f64, upper: bool) -> f64 {
    let forward = x.exp() - spec.strike * log_unit_claim(mkt, tau, x).exp();
    match (spec.kind, upper) {
        (OptionKind::Call, true) => forward,
        (OptionKind::Put, false) => -forward,
        _ => 0.0,
    }
}

/// Marches the payoff from `T` back to `t`.
pub fn fd_solve(mkt: &MarketParams, spec: &OptionSpec, grid: &FdGrid, t: f64) -> Result<FdCurve> {
    mkt.validate()?;
    spec.validate()?;
    spec.check_time(t)?;
    grid.validate(spec)?;
    let space = grid.space();
    let mut u: Vec<f64> = space.points().map(|x| spec.log_payoff(x)).collect();
    let tau_end = spec.maturity - t;
    if tau_end == 0.0 {
        return Ok(FdCurve {
            grid: space,
            values: u,
        });
    }

    let op = Operator::new(mkt, &space);
    let mut solver = Stepper::new(space.len());
    let dt = tau_end / grid.nt as f64;
    let (x0, x1) = (space.min(), space.max());
    let edges = |tau: f64| {
        (
            boundary(mkt, spec, tau, x0, false),
            boundary(mkt, spec, tau, x1, true),
        )
    };

    let mut tau = 0.0;
    for half in 1..=2 {
        let next = 0.5 * dt * half as f64;
        solver.step(&op, &mut u, 0.5 * dt, 1.0, edges(next))?;
        tau = next;
    }
    for k in 2..=grid.nt {
        let next = if k == grid.nt { tau_end } else { dt * k as f64 };
        solver.step(&op, &mut u, next - tau, 0.5, edges(next))?;
        tau = next;
    }
    Ok(FdCurve {
        grid: space,
        values: u,
    })
}

/// Tridiagonal rows of the spatial operator at interior nodes.
struct Operator {
    lower: Vec<f64>,
    diag: Vec<f64>,
    upper: Vec<f64>,
}

impl Operator {
    fn new(mkt: &MarketParams, grid: &UniformGrid) -> Self {
        let h = grid.step();
        let diffusion = 0.5 * mkt.sigma * mkt.sigma / (h * h);
        let n = grid.len();
        let mut op = Self {
            lower: vec![0.0; n],
            diag: vec![0.0; n],
            upper: vec![0.0; n],
        };
        for i in 1..n - 1 {
            let v = mkt.potential(grid.x(i));
            let drift = (v - 0.5 * mkt.sigma * mkt.sigma) / (2.0 * h);
            op.lower[i] = diffusion - drift;
            op.diag[i] = -2.0 * diffusion - v;
            op.upper[i] = diffusion + drift;
        }
        op
    }

    fn apply(&self, u: &[f64], i: usize) -> f64 {
        self.lower[i] * u[i - 1] + self.diag[i] * u[i] + self.upper[i] * u[i + 1]
    }
}

struct Stepper {
    rhs: Vec<f64>,
    c_prime: Vec<f64>,
}

impl Stepper {
    fn new(n: usize) -> Self {
        Self {
            rhs: vec![0.0; n],
            c_prime: vec![0.0; n],
        }
    }

    /// `(I - theta dt L) u_new = (I + (1 - theta) dt L) u` with the new edge
    /// values imposed.
    fn step(
        &mut self,
        op: &Operator,
        u: &mut [f64],
        dt: f64,
        theta: f64,
        (left, right): (f64, f64),
    ) -> Result<()> {
        let n = u.len();
        let explicit = (1.0 - theta) * dt;
        for i in 1..n - 1 {
            self.rhs[i] = u[i] + explicit * op.apply(u, i);
        }
        u[0] = left;
        u[n - 1] = right;
        self.rhs[1] += theta * dt * op.lower[1] * left;
        self.rhs[n - 2] += theta * dt * op.upper[n - 2] * right;

        // Thomas sweep over the interior rows 1..n-1.
        let implicit = theta * dt;
        let mut prev_c = 0.0;
        let mut prev_d = 0.0;
        for i in 1..n - 1 {
            let a = if i > 1 { -implicit * op.lower[i] } else { 0.0 };
            let b = 1.0 - implicit * op.diag[i];
            let c = if i < n - 2 { -implicit * op.upper[i] } else { 0.0 };
            let pivot = b - a * prev_c;
            if !(pivot.abs() > 1e-12 * b.abs().max(1.0)) || !pivot.is_finite() {
                return Err(Error::Numerical(format!(
                    "tridiagonal pivot {pivot:e} at node {i} is too small"
                )));
            }
            prev_c = c / pivot;
            prev_d = (self.rhs[i] - a * prev_d) / pivot;
            self.c_prime[i] = prev_c;
            self.rhs[i] = prev_d;
        }
        u[n - 2] = self.rhs[n - 2];
        for i in (1..n - 2).rev() {
            u[i] = self.rhs[i] - self.c_prime[i] * u[i + 1];
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::black_scholes::bs_price;

    fn market(a: f64) -> MarketParams {
        MarketParams::new(0.25, 0.03, a).unwrap()
    }

    fn max_error_vs_closed_form(grid: &FdGrid, spec: &OptionSpec) -> f64 {
        let mkt = market(0.0);
        let curve = fd_solve(&mkt, spec, grid, 3.0).unwrap();
        (0..=100)
            .map(|i| {
                let s = 1.0 + 0.05 * i as f64;
                (curve.interpolate(s).unwrap() - bs_price(&mkt, spec, s, 3.0).unwrap()).abs()
            })
            .fold(0.0, f64::max)
    }

    #[test]
    fn unit_claim_solves_its_equation() {
        let mkt = market(-0.03);
        let (tau, x, e) = (1.7, 0.8, 1e-4);
        let p = |tau: f64, x: f64| log_unit_claim(&mkt, tau, x).exp();
        let dtau = (p(tau + e, x) - p(tau - e, x)) / (2.0 * e);
        let d1 = (p(tau, x + e) - p(tau, x - e)) / (2.0 * e);
        let d2 = (p(tau, x + e) - 2.0 * p(tau, x) + p(tau, x - e)) / (e * e);
        let v = mkt.potential(x);
        let rhs = 0.5 * 0.0625 * d2 + (v - 0.5 * 0.0625) * d1 - v * p(tau, x);
        assert!((dtau - rhs).abs() < 1e-7, "{dtau} vs {rhs}");
        assert_eq!(log_unit_claim(&market(0.0), 2.0, 5.0), -0.06);
    }

    #[test]
    fn matches_closed_form_at_zero_tilt() {
        for kind in [OptionKind::Call, OptionKind::Put] {
            let spec = OptionSpec::new(3.0, 5.0, kind).unwrap();
            let err = max_error_vs_closed_form(&FdGrid::reference(3.0).unwrap(), &spec);
            assert!(err < 2e-4 * 3.0, "{kind}: {err}");
        }
    }

    #[test]
    fn second_order_under_refinement() {
        let spec = OptionSpec::call(3.0, 5.0).unwrap();
        let coarse = FdGrid::centered(3.0, 6.0, 201, 100).unwrap();
        let fine = FdGrid::centered(3.0, 6.0, 401, 200).unwrap();
        let ratio = max_error_vs_closed_form(&coarse, &spec) / max_error_vs_closed_form(&fine, &spec);
        assert!((3.0..=5.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn expiry_returns_payoff() {
        let spec = OptionSpec::call(3.0, 5.0).unwrap();
        let grid = FdGrid::reference(3.0).unwrap();
        let curve = fd_solve(&market(-0.03), &spec, &grid, 5.0).unwrap();
        for (s, v) in curve.nodes() {
            assert_eq!(v, spec.log_payoff(s.ln()));
        }
    }

    #[test]
    fn stays_within_payoff_bounds() {
        let spec = OptionSpec::call(3.0, 5.0).unwrap();
        let grid = FdGrid::reference(3.0).unwrap();
        for a in [0.0, -0.03] {
            let mkt = market(a);
            let curve = fd_solve(&mkt, &spec, &grid, 3.0).unwrap();
            let cap = boundary(&mkt, &spec, 2.0, grid.x_max, true);
            for &v in curve.values() {
                assert!(v >= -1e-8 && v <= cap + 1e-8, "a={a}: {v}");
            }
        }
    }

    #[test]
    fn insensitive_to_doubling_the_domain() {
        let mkt = market(-0.03);
        for kind in [OptionKind::Call, OptionKind::Put] {
            let spec = OptionSpec::new(3.0, 5.0, kind).unwrap();
            let narrow = fd_solve(&mkt, &spec, &FdGrid::centered(3.0, 6.0, 2001, 400).unwrap(), 3.0)
                .unwrap();
            let wide = fd_solve(&mkt, &spec, &FdGrid::centered(3.0, 12.0, 4001, 400).unwrap(), 3.0)
                .unwrap();
            for i in 0..=65 {
                let s = 0.5 + 0.1 * i as f64;
                let d = (narrow.interpolate(s).unwrap() - wide.interpolate(s).unwrap()).abs();
                assert!(d < 1e-6 * 3.0, "{kind} S={s}: {d}");
            }
        }
    }

    #[test]
    fn rejects_bad_input() {
        let spec = OptionSpec::call(3.0, 5.0).unwrap();
        let grid = FdGrid::reference(3.0).unwrap();
        assert!(matches!(
            fd_solve(&market(0.0), &spec, &grid, 5.5),
            Err(Error::Domain(_))
        ));
        assert!(FdGrid::new(0.0, 1.0, 2, 10).is_err());
        assert!(FdGrid::new(0.0, 1.0, 3, 0).is_err());
        let off = FdGrid::new(2.0, 4.0, 11, 10).unwrap();
        assert!(fd_solve(&market(0.0), &spec, &off, 3.0).is_err());
        let curve = fd_solve(&market(0.0), &spec, &grid, 3.0).unwrap();
        assert!(matches!(curve.interpolate(1e-4), Err(Error::Domain(_))));
    }

    #[test]
    fn interpolation_is_exact_for_cubics() {
        let grid = UniformGrid::new(-1.0, 2.0, 13).unwrap();
        let values = grid.points().map(|x| x * x * x - 2.0 * x + 0.5).collect();
        let curve = FdCurve { grid, values };
        for s in [0.5f64, 1.0, 2.2, 7.0] {
            let x = s.ln();
            let want = x * x * x - 2.0 * x + 0.5;
            assert!((curve.interpolate(s).unwrap() - want).abs() < 1e-12);
        }
    }
}
