//! Uniform time grids shared by drive, trajectory, and field traces.

use crate::{Error, Result};

/// Uniform time grid: `n` samples starting at `start` with step `dt`.
#[derive(Clone, Debug, PartialEq)]
pub struct TimeGrid {
    start: f64,
    dt: f64,
    n: usize,
}

impl TimeGrid {
    pub fn new(start: f64, dt: f64, n: usize) -> Result<Self> {
        if !(dt > 0.0) || n < 2 {
            return Err(Error::GridNonuniform);
        }
        Ok(Self { start, dt, n })
    }

    /// Grid covering `[start, end]` with step at most `dt` (endpoint included).
    pub fn spanning(start: f64, end: f64, dt: f64) -> Result<Self> {
        if !(dt > 0.0) || !(end > start) {
            return Err(Error::GridNonuniform);
        }
        let n = ((end - start) / dt).ceil() as usize + 1;
        Ok(Self { start, dt, n })
    }

    pub fn start(&self) -> f64 {
        self.start
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn end(&self) -> f64 {
        self.start + self.dt * (self.n - 1) as f64
    }

    pub fn at(&self, i: usize) -> f64 {
        self.start + self.dt * i as f64
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).map(move |i| self.at(i))
    }

    /// Index of the last grid point at or before `t`, clamped to the grid.
    pub fn index_at(&self, t: f64) -> usize {
        let i = ((t - self.start) / self.dt).floor();
        (i.max(0.0) as usize).min(self.n - 1)
    }

    /// Index of the grid point nearest to `t`, clamped to the grid.
    pub fn index_nearest(&self, t: f64) -> usize {
        let i = ((t - self.start) / self.dt).round();
        (i.max(0.0) as usize).min(self.n - 1)
    }

    pub fn covers(&self, t_lo: f64, t_hi: f64) -> bool {
        // Half-step slack so support boundaries landing between samples pass.
        self.start <= t_lo + 0.5 * self.dt && self.end() >= t_hi - 0.5 * self.dt
    }
}

/// Trapezoid integral of `y` over the sample range `[i_lo, i_hi]`.
pub fn trapezoid(grid: &TimeGrid, y: &[f64], i_lo: usize, i_hi: usize) -> f64 {
    assert!(i_hi < y.len() && i_lo <= i_hi);
    if i_lo == i_hi {
        return 0.0;
    }
    let mut acc = 0.5 * (y[i_lo] + y[i_hi]);
    for v in &y[i_lo + 1..i_hi] {
        acc += v;
    }
    acc * grid.dt()
}
