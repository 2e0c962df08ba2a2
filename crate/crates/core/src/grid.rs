use serde::{Deserialize, Serialize};

use crate::error::{ensure, Result};

/// Uniform sample grid on `[a, b]`; node `i` sits at `a + i*h` exactly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialGrid {
    pub a: f64,
    pub b: f64,
    pub points: usize,
}

impl RadialGrid {
    pub const MIN_POINTS: usize = 8;

    pub fn new(a: f64, b: f64, points: usize) -> Result<Self> {
        let g = RadialGrid { a, b, points };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        ensure!(
            self.a.is_finite() && self.b.is_finite(),
            "grid endpoints must be finite"
        );
        ensure!(self.a < self.b, "grid requires a < b (got a={}, b={})", self.a, self.b);
        ensure!(
            self.points >= Self::MIN_POINTS,
            "grid too coarse: {} points (minimum {})",
            self.points,
            Self::MIN_POINTS
        );
        Ok(())
    }

    #[inline]
    pub fn h(&self) -> f64 {
        (self.b - self.a) / (self.points - 1) as f64
    }

    #[inline]
    pub fn x(&self, i: usize) -> f64 {
        self.a + i as f64 * self.h()
    }

    pub fn xs(&self) -> Vec<f64> {
        (0..self.points).map(|i| self.x(i)).collect()
    }

    pub fn len(&self) -> usize {
        self.points
    }

    pub fn is_empty(&self) -> bool {
        self.points == 0
    }

    pub fn length(&self) -> f64 {
        self.b - self.a
    }

    pub fn sample(&self, f: impl Fn(f64) -> f64) -> Vec<f64> {
        (0..self.points).map(|i| f(self.x(i))).collect()
    }

    /// Grid with the same span and twice the resolution (`2N - 1` points, old nodes kept).
    pub fn refined(&self) -> Self {
        RadialGrid { a: self.a, b: self.b, points: 2 * self.points - 1 }
    }
}
