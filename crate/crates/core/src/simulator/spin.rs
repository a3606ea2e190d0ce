//! Configurations on the sphere of radius `√N`.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{invalid, Result};

/// Relative tolerance on `‖σ‖² = N`.
pub const SPHERE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct SpinConfiguration {
    coords: Vec<f64>,
}

impl SpinConfiguration {
    /// Rescales `coords` onto the sphere of radius `√N`.
    pub fn normalized(mut coords: Vec<f64>) -> Result<Self> {
        let n = coords.len();
        if n == 0 {
            return Err(invalid("coords", "empty configuration"));
        }
        let norm = coords.iter().map(|x| x * x).sum::<f64>().sqrt();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(invalid("coords", "cannot normalise a zero or non-finite vector"));
        }
        let scale = (n as f64).sqrt() / norm;
        coords.iter_mut().for_each(|x| *x *= scale);
        Ok(Self { coords })
    }

    /// Accepts `coords` only if already on the sphere.
    pub fn on_sphere(coords: Vec<f64>) -> Result<Self> {
        let n = coords.len() as f64;
        let sq: f64 = coords.iter().map(|x| x * x).sum();
        if coords.is_empty() || ((sq - n) / n).abs() > SPHERE_TOL {
            return Err(invalid("coords", format!("‖σ‖² = {sq}, expected {n}")));
        }
        Ok(Self { coords })
    }

    /// Wraps coordinates already scaled onto the sphere.
    pub(crate) fn from_projected(coords: Vec<f64>) -> Self {
        debug_assert!({
            let n = coords.len() as f64;
            ((dot(&coords, &coords) - n) / n).abs() <= SPHERE_TOL
        });
        Self { coords }
    }

    /// Uniform sample on the sphere.
    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        loop {
            let g: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
            if let Ok(s) = Self::normalized(g) {
                return s;
            }
        }
    }

    pub fn n(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.coords
    }

    /// `R(σ, σ') = σ·σ'/N`.
    pub fn overlap(&self, other: &Self) -> f64 {
        dot(&self.coords, &other.coords) / self.n() as f64
    }

    /// `‖σ‖²/N`.
    pub fn radius_ratio(&self) -> f64 {
        dot(&self.coords, &self.coords) / self.n() as f64
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
