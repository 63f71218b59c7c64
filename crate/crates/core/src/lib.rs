//! Option pricing for the generalized Black-Scholes equation with a linear
//! potential `V(x) = a x + r`.
//!
//! The price is built from the eigenbasis of a shifted harmonic oscillator
//! (Hermite functions with an affine argument) after a similarity transform
//! of the pricing Hamiltonian. Two independent references sit next to it: the
//! closed-form Black-Scholes price (the `a = 0` model) and a Crank-Nicolson
//! finite-difference solver for the same equation in log-price coordinates.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod black_scholes;
pub mod cli;
pub mod curve;
pub mod error;
pub mod fd;
pub mod grid;
pub mod oscillator;
pub mod quadrature;
pub mod special;
pub mod spectral;

pub use black_scholes::{bs_price, payoff, MarketParams, OptionKind, OptionSpec};
pub use curve::PriceCurve;
pub use error::{Error, Result};
pub use fd::{fd_solve, FdCurve, FdGrid};
pub use grid::UniformGrid;
pub use oscillator::OscillatorParams;
pub use quadrature::{Estimate, GaussianDecay, QuadratureSpec};
pub use spectral::{oscillator_params_from_market, SimilarityTransform, SpectralSolution};
