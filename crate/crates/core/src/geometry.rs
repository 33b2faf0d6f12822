use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Open cube `center + (-side/2, side/2)^d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cube {
    center: Vec<f64>,
    side: f64,
}

impl Cube {
    pub fn new(center: Vec<f64>, side: f64) -> Result<Self> {
        if center.is_empty() {
            return Err(Error::invalid("cube dimension must be at least 1"));
        }
        if !(side > 0.0) || !side.is_finite() {
            return Err(Error::invalid(format!("cube side must be positive, got {side}")));
        }
        if center.iter().any(|c| !c.is_finite()) {
            return Err(Error::invalid("cube center must be finite"));
        }
        Ok(Self { center, side })
    }

    /// Cube of side `side` centered at the origin of R^d.
    pub fn centered(dim: usize, side: f64) -> Result<Self> {
        Self::new(vec![0.0; dim], side)
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn center(&self) -> &[f64] {
        &self.center
    }

    pub fn side(&self) -> f64 {
        self.side
    }

    pub fn half(&self) -> f64 {
        0.5 * self.side
    }

    pub fn volume(&self) -> f64 {
        self.side.powi(self.dim() as i32)
    }

    pub fn contains(&self, p: &[f64]) -> bool {
        debug_assert_eq!(p.len(), self.dim());
        let h = self.half();
        p.iter().zip(&self.center).all(|(x, c)| (x - c).abs() < h)
    }

    /// Whether `other` (as an open set) is a subset of `self`.
    pub fn contains_cube(&self, other: &Cube) -> bool {
        let slack = 1e-12 * self.side.max(1.0);
        other
            .center
            .iter()
            .zip(&self.center)
            .all(|(o, c)| (o - c).abs() + other.half() <= self.half() + slack)
    }

    /// Same center, different side.
    pub fn with_side(&self, side: f64) -> Result<Self> {
        Self::new(self.center.clone(), side)
    }

    /// Lower corner coordinate along `axis`.
    pub fn lower(&self, axis: usize) -> f64 {
        self.center[axis] - self.half()
    }

    pub fn upper(&self, axis: usize) -> f64 {
        self.center[axis] + self.half()
    }

    /// Intersection of two open cubes, as per-axis open intervals.
    pub fn intersect_intervals(&self, other: &Cube) -> Option<Vec<(f64, f64)>> {
        let mut out = Vec::with_capacity(self.dim());
        for axis in 0..self.dim() {
            let lo = self.lower(axis).max(other.lower(axis));
            let hi = self.upper(axis).min(other.upper(axis));
            if hi <= lo {
                return None;
            }
            out.push((lo, hi));
        }
        Some(out)
    }
}

/// Euclidean distance.
pub fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Sup-norm distance.
pub fn sup_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Japanese bracket ⟨x⟩ = sqrt(1 + |x|²).
pub fn bracket(x: &[f64]) -> f64 {
    (1.0 + x.iter().map(|v| v * v).sum::<f64>()).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn open_box_membership() {
        let c = Cube::new(vec![1.0, -1.0], 2.0).unwrap();
        assert!(c.contains(&[1.0, -1.0]));
        assert!(c.contains(&[1.99, -0.01]));
        assert!(!c.contains(&[2.0, -1.0]));
        assert!(!c.contains(&[0.0, -1.0]));
        assert_eq!(c.volume(), 4.0);
    }

    #[test]
    fn rejects_degenerate_side() {
        assert!(Cube::centered(1, 0.0).is_err());
        assert!(Cube::centered(1, -1.0).is_err());
        assert!(Cube::centered(0, 1.0).is_err());
    }

    #[test]
    fn nested_cubes() {
        let big = Cube::centered(2, 4.0).unwrap();
        let small = Cube::new(vec![1.0, 1.0], 2.0).unwrap();
        let off = Cube::new(vec![1.5, 0.0], 2.0).unwrap();
        assert!(big.contains_cube(&small));
        assert!(!big.contains_cube(&off));
    }
}
