//! Uniform spatial grids and complex wave fields sampled on them.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MIN_GRID_POINTS: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    pub x_min: f64,
    pub x_max: f64,
    pub n: usize,
}

impl Grid {
    pub fn new(x_min: f64, x_max: f64, n: usize) -> Result<Self> {
        let g = Self { x_min, x_max, n };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < MIN_GRID_POINTS {
            return Err(Error::InvalidGrid(format!(
                "need at least {MIN_GRID_POINTS} points, got {}",
                self.n
            )));
        }
        if !(self.x_max > self.x_min && self.x_min.is_finite() && self.x_max.is_finite()) {
            return Err(Error::InvalidGrid(format!(
                "x_max ({}) must exceed x_min ({})",
                self.x_max, self.x_min
            )));
        }
        Ok(())
    }

    pub fn spacing(&self) -> f64 {
        (self.x_max - self.x_min) / (self.n - 1) as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x_min + i as f64 * self.spacing()
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.x(i)).collect()
    }

    /// max(|x_min|, |x_max|).
    pub fn extent(&self) -> f64 {
        self.x_min.abs().max(self.x_max.abs())
    }

    /// Trapezoidal ∫ f dx of samples on this grid.
    pub fn integrate<T>(&self, samples: &[T]) -> T
    where
        T: Copy + std::iter::Sum<T> + std::ops::Mul<f64, Output = T> + std::ops::Sub<T, Output = T>,
    {
        let n = samples.len();
        let sum: T = samples.iter().copied().sum();
        (sum - samples[0] * 0.5 - samples[n - 1] * 0.5) * self.spacing()
    }
}

/// Complex amplitudes ψ(x, t) on a grid.
#[derive(Clone, Debug, PartialEq)]
pub struct WaveField {
    pub grid: Grid,
    pub amplitudes: Vec<Complex64>,
    pub t: f64,
}

impl WaveField {
    pub fn new(grid: Grid, amplitudes: Vec<Complex64>, t: f64) -> Result<Self> {
        grid.validate()?;
        if amplitudes.len() != grid.n {
            return Err(Error::InvalidGrid(format!(
                "{} amplitudes for a {}-point grid",
                amplitudes.len(),
                grid.n
            )));
        }
        if amplitudes
            .iter()
            .any(|z| !(z.re.is_finite() && z.im.is_finite()))
        {
            return Err(Error::InvalidParameter(
                "wave field has non-finite amplitudes".into(),
            ));
        }
        Ok(Self {
            grid,
            amplitudes,
            t,
        })
    }

    pub fn from_fn(grid: Grid, t: f64, f: impl Fn(f64) -> Complex64) -> Result<Self> {
        let amps = grid.points().into_iter().map(f).collect();
        Self::new(grid, amps, t)
    }

    /// Trapezoidal L² norm.
    pub fn norm(&self) -> f64 {
        let dens: Vec<f64> = self.amplitudes.iter().map(|z| z.norm_sqr()).collect();
        self.grid.integrate(&dens).sqrt()
    }

    /// Trapezoidal ⟨self, other⟩ = ∫ conj(self)·other dx.
    pub fn inner(&self, other: &WaveField) -> Result<Complex64> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        let prod: Vec<Complex64> = self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .collect();
        Ok(self.grid.integrate(&prod))
    }

    /// ‖self − other‖ / ‖other‖.
    pub fn relative_distance(&self, other: &WaveField) -> Result<f64> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        let diff: Vec<f64> = self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| (a - b).norm_sqr())
            .collect();
        Ok(self.grid.integrate(&diff).sqrt() / other.norm())
    }

    pub fn max_amplitude(&self) -> f64 {
        self.amplitudes.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest edge amplitude relative to the peak.
    pub fn edge_ratio(&self) -> f64 {
        let n = self.amplitudes.len();
        let edge = self.amplitudes[0].norm().max(self.amplitudes[n - 1].norm());
        let peak = self.max_amplitude();
        if peak == 0.0 {
            0.0
        } else {
            edge / peak
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_basics() {
        let g = Grid::new(-1.0, 1.0, 21).unwrap();
        assert!((g.spacing() - 0.1).abs() < 1e-15);
        assert_eq!(g.x(0), -1.0);
        assert!((g.x(20) - 1.0).abs() < 1e-15);
        assert!(Grid::new(0.0, 1.0, 8).is_err());
        assert!(Grid::new(1.0, 1.0, 32).is_err());
    }

    #[test]
    fn gaussian_norm() {
        let g = Grid::new(-10.0, 10.0, 2001).unwrap();
        let f = WaveField::from_fn(g, 0.0, |x| {
            Complex64::new((-x * x / 2.0).exp() / std::f64::consts::PI.powf(0.25), 0.0)
        })
        .unwrap();
        assert!((f.norm() - 1.0).abs() < 1e-14);
        assert!(f.edge_ratio() < 1e-20);
        assert!((f.inner(&f).unwrap().re - 1.0).abs() < 1e-14);
    }

    #[test]
    fn field_validation() {
        let g = Grid::new(0.0, 1.0, 16).unwrap();
        assert!(WaveField::new(g, vec![Complex64::new(0.0, 0.0); 15], 0.0).is_err());
        let mut amps = vec![Complex64::new(0.0, 0.0); 16];
        amps[3] = Complex64::new(f64::NAN, 0.0);
        assert!(WaveField::new(g, amps, 0.0).is_err());
    }
}
