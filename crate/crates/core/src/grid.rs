//! Uniform one-dimensional grids and the central-difference stencils used by
//! the operator residual checks.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniformGrid {
    start: f64,
    step: f64,
    len: usize,
}

impl UniformGrid {
    /// `points` equally spaced nodes from `min` to `max` inclusive.
    pub fn new(min: f64, max: f64, points: usize) -> Result<Self> {
        if !(min.is_finite() && max.is_finite()) || min >= max {
            return Err(Error::Usage(format!(
                "grid bounds must be finite with min < max (got [{min}, {max}])"
            )));
        }
        if points < 2 {
            return Err(Error::Usage(format!(
                "grid needs at least 2 points (got {points})"
            )));
        }
        Ok(Self {
            start: min,
            step: (max - min) / (points - 1) as f64,
            len: points,
        })
    }

    /// Grid over `[min, max]` with spacing as close to `step` as possible.
    pub fn with_step(min: f64, max: f64, step: f64) -> Result<Self> {
        if !(step > 0.0) {
            return Err(Error::Usage(format!("grid step must be positive (got {step})")));
        }
        let intervals = ((max - min) / step).round().max(1.0) as usize;
        Self::new(min, max, intervals + 1)
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn min(&self) -> f64 {
        self.start
    }

    pub fn max(&self) -> f64 {
        self.x(self.len - 1)
    }

    pub fn x(&self, i: usize) -> f64 {
        self.start + i as f64 * self.step
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len).map(move |i| self.x(i))
    }

    /// Errors unless the grid has an interior point for three-point stencils.
    pub fn require_stencil(&self) -> Result<()> {
        if self.len < 3 {
            return Err(Error::Usage(format!(
                "three-point stencil needs a grid of at least 3 points (got {})",
                self.len
            )));
        }
        Ok(())
    }
}

/// Samples of a function together with its first and second central
/// differences at one interior node.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Stencil {
    pub x: f64,
    pub value: f64,
    pub d1: f64,
    pub d2: f64,
}

/// Central-difference stencils at every interior node of `grid`.
pub(crate) fn interior_stencils<'a>(
    grid: &'a UniformGrid,
    values: &'a [f64],
) -> impl Iterator<Item = Stencil> + 'a {
    let h = grid.step();
    (1..grid.len() - 1).map(move |i| Stencil {
        x: grid.x(i),
        value: values[i],
        d1: (values[i + 1] - values[i - 1]) / (2.0 * h),
        d2: (values[i + 1] - 2.0 * values[i] + values[i - 1]) / (h * h),
    })
}
