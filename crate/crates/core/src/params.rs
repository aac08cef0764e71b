//! Model constants and time grids.

use crate::error::{Error, Result};

/// Hurst index of the driving fractional Brownian motion.
///
/// The whole crate works under the standing assumption `1/2 < H < 1`: the
/// increment correlation kernel `phi(s,t) = H(2H-1)|s-t|^{2H-2}` is positive
/// and integrable only there.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HurstIndex(f64);

impl HurstIndex {
    pub fn new(value: f64) -> Result<Self> {
        if !(value > 0.5 && value < 1.0) {
            return Err(Error::domain(format!(
                "Hurst index must satisfy 1/2 < H < 1, got {value}"
            )));
        }
        Ok(HurstIndex(value))
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }

    /// `2H`, the self-similarity exponent of the variance.
    #[inline]
    pub fn two_h(self) -> f64 {
        2.0 * self.0
    }

    /// `H(2H-1)`, the constant in front of the singular kernel.
    #[inline]
    pub fn phi_const(self) -> f64 {
        self.0 * (2.0 * self.0 - 1.0)
    }
}

/// Strictly increasing time grid starting at 0.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeGrid {
    points: Vec<f64>,
}

impl TimeGrid {
    pub fn new(points: Vec<f64>) -> Result<Self> {
        if points.is_empty() || points[0] != 0.0 {
            return Err(Error::domain("time grid must start at 0"));
        }
        if points.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::domain("time grid must be strictly increasing"));
        }
        Ok(TimeGrid { points })
    }

    /// Uniform grid with `steps` intervals on `[0, t_end]`.
    pub fn uniform(t_end: f64, steps: usize) -> Result<Self> {
        if !(t_end > 0.0) || steps == 0 {
            return Err(Error::domain("uniform grid needs t_end > 0 and steps >= 1"));
        }
        let points = (0..=steps)
            .map(|i| t_end * i as f64 / steps as f64)
            .collect();
        TimeGrid::new(points)
    }

    #[inline]
    pub fn points(&self) -> &[f64] {
        &self.points
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.points.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn t_end(&self) -> f64 {
        *self.points.last().unwrap()
    }

    /// Step size if the grid is uniform (within floating-point slack).
    pub fn uniform_step(&self) -> Option<f64> {
        if self.points.len() < 2 {
            return None;
        }
        let dt = self.t_end() / (self.points.len() - 1) as f64;
        let ok = self
            .points
            .iter()
            .enumerate()
            .all(|(i, &p)| (p - dt * i as f64).abs() <= 1e-12 * self.t_end().max(1.0));
        ok.then_some(dt)
    }

    pub fn is_uniform(&self) -> bool {
        self.uniform_step().is_some()
    }
}

/// Constants of the linear self-attracting model
/// `X_t = B^H_t - a int_0^t int_0^s (X_s - X_u) du ds + nu t`, started at `z`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    /// Attraction strength `a`. The model itself requires `a > 0`; the
    /// degenerate value `a = 0` is accepted and reduces every formula to the
    /// plain fBm-with-drift case (`h == 1`).
    pub a: f64,
    /// Constant drift `nu`, applied to every spatial component.
    pub nu: f64,
    /// Initial value `z` (every component starts there).
    pub z: f64,
    pub hurst: HurstIndex,
    /// Time horizon `T`.
    pub t_max: f64,
    /// Spatial dimension, 1 or 2.
    pub dim: usize,
}

impl ModelParams {
    pub fn new(a: f64, nu: f64, z: f64, hurst: HurstIndex, t_max: f64, dim: usize) -> Result<Self> {
        if !(a >= 0.0) {
            return Err(Error::domain(format!("attraction strength must be >= 0, got {a}")));
        }
        if !(t_max > 0.0) {
            return Err(Error::domain(format!("horizon must be positive, got {t_max}")));
        }
        if dim != 1 && dim != 2 {
            return Err(Error::domain(format!("dimension must be 1 or 2, got {dim}")));
        }
        if !nu.is_finite() || !z.is_finite() {
            return Err(Error::domain("nu and z must be finite"));
        }
        Ok(ModelParams {
            a,
            nu,
            z,
            hurst,
            t_max,
            dim,
        })
    }

    /// Local-time and self-intersection operations assume the centered model.
    pub fn require_centered(&self) -> Result<()> {
        if self.nu != 0.0 {
            return Err(Error::domain(
                "this operation is defined for the centered model only (nu = 0)",
            ));
        }
        Ok(())
    }

    pub fn require_attracting(&self) -> Result<()> {
        if self.a <= 0.0 {
            return Err(Error::domain("this operation requires a > 0"));
        }
        Ok(())
    }

    pub fn require_planar(&self) -> Result<()> {
        if self.dim != 2 {
            return Err(Error::domain("this operation requires a 2-dimensional process"));
        }
        Ok(())
    }

    pub fn check_grid(&self, grid: &TimeGrid) -> Result<()> {
        if grid.t_end() > self.t_max * (1.0 + 1e-12) {
            return Err(Error::domain(format!(
                "grid extends to {} beyond the horizon T = {}",
                grid.t_end(),
                self.t_max
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hurst_bounds() {
        assert!(HurstIndex::new(0.5).is_err());
        assert!(HurstIndex::new(1.0).is_err());
        assert!(HurstIndex::new(0.75).is_ok());
    }

    #[test]
    fn grid_validation() {
        assert!(TimeGrid::new(vec![0.0, 0.5, 0.5]).is_err());
        assert!(TimeGrid::new(vec![0.1, 0.5]).is_err());
        let g = TimeGrid::uniform(2.0, 4).unwrap();
        assert_eq!(g.points(), &[0.0, 0.5, 1.0, 1.5, 2.0]);
        assert_eq!(g.uniform_step(), Some(0.5));
        let g = TimeGrid::new(vec![0.0, 0.1, 0.5]).unwrap();
        assert!(g.uniform_step().is_none());
    }

    #[test]
    fn params_validation() {
        let h = HurstIndex::new(0.6).unwrap();
        assert!(ModelParams::new(-1.0, 0.0, 0.0, h, 1.0, 1).is_err());
        assert!(ModelParams::new(1.0, 0.0, 0.0, h, 1.0, 3).is_err());
        let p = ModelParams::new(1.0, 0.5, 0.0, h, 1.0, 1).unwrap();
        assert!(p.require_centered().is_err());
    }
}
