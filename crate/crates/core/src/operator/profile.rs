use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileShape {
    /// u₊ on Λ_{δ₊}(0), zero outside.
    Indicator,
    /// u₊ Π τ(x_i) with τ = 1 on |s| ≤ δ₋/2, falling linearly to 0 at δ₊/2.
    Trapezoid,
}

/// Single-site potential u with u₋χ_{Λ_{δ₋}} ≤ u ≤ u₊χ_{Λ_{δ₊}}.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SingleSiteProfile {
    pub u_plus: f64,
    pub u_minus: f64,
    pub delta_plus: f64,
    pub delta_minus: f64,
    pub shape: ProfileShape,
}

impl Default for SingleSiteProfile {
    fn default() -> Self {
        Self { u_plus: 1.0, u_minus: 1.0, delta_plus: 1.0, delta_minus: 1.0, shape: ProfileShape::Indicator }
    }
}

impl SingleSiteProfile {
    pub fn new(u_plus: f64, u_minus: f64, delta_plus: f64, delta_minus: f64, shape: ProfileShape) -> Result<Self> {
        let p = Self { u_plus, u_minus, delta_plus, delta_minus, shape };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.u_plus, self.u_minus, self.delta_plus, self.delta_minus];
        if all.iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
            return Err(Error::invalid("profile amplitudes and sides must be positive and finite"));
        }
        if self.delta_minus > self.delta_plus {
            return Err(Error::invalid("need δ₋ ≤ δ₊"));
        }
        if self.u_minus > self.u_plus {
            return Err(Error::invalid("need u₋ ≤ u₊"));
        }
        Ok(())
    }

    /// ‖u‖∞.
    pub fn sup(&self) -> f64 {
        self.u_plus
    }

    /// Half the side of the support box.
    pub fn reach(&self) -> f64 {
        0.5 * self.delta_plus
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        self.u_plus * x.iter().map(|s| self.tau(*s)).product::<f64>()
    }

    fn tau(&self, s: f64) -> f64 {
        let s = s.abs();
        let a = 0.5 * self.delta_minus;
        let b = 0.5 * self.delta_plus;
        match self.shape {
            ProfileShape::Indicator => (s < b) as u8 as f64,
            ProfileShape::Trapezoid => {
                if s <= a {
                    1.0
                } else if s < b {
                    (b - s) / (b - a)
                } else {
                    0.0
                }
            }
        }
    }

    /// ∫₀^s τ, extended oddly.
    fn tau_primitive(&self, s: f64) -> f64 {
        let sign = s.signum();
        let s = s.abs();
        let a = 0.5 * self.delta_minus;
        let b = 0.5 * self.delta_plus;
        let v = match self.shape {
            ProfileShape::Indicator => s.min(b),
            ProfileShape::Trapezoid => {
                if s <= a {
                    s
                } else if s < b {
                    let w = b - a;
                    a + (w * w - (b - s) * (b - s)) / (2.0 * w)
                } else {
                    a + 0.5 * (b - a)
                }
            }
        };
        sign * v
    }

    /// Average of τ over [o − h/2, o + h/2].
    pub fn axis_average(&self, offset: f64, h: f64) -> f64 {
        (self.tau_primitive(offset + 0.5 * h) - self.tau_primitive(offset - 0.5 * h)) / h
    }

    /// Average of u over the cell of side `h` whose center sits at `offset`
    /// from the impurity.
    pub fn cell_average(&self, offset: &[f64], h: f64) -> f64 {
        self.u_plus * offset.iter().map(|o| self.axis_average(*o, h)).product::<f64>()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trap() -> SingleSiteProfile {
        SingleSiteProfile::new(2.0, 1.0, 1.0, 0.5, ProfileShape::Trapezoid).unwrap()
    }

    #[test]
    fn bounds_pointwise() {
        for p in [SingleSiteProfile::default(), trap()] {
            for i in -60..=60 {
                let x = i as f64 * 0.0125;
                let v = p.value(&[x, 0.1]);
                let inner = (x.abs() < p.delta_minus / 2.0 && 0.1 < p.delta_minus / 2.0) as u8 as f64;
                let outer = (x.abs() < p.delta_plus / 2.0) as u8 as f64;
                assert!(p.u_minus * inner <= v + 1e-15);
                assert!(v <= p.u_plus * outer + 1e-15);
            }
        }
    }

    #[test]
    fn averages_match_quadrature() {
        let p = trap();
        for o in [-0.6, -0.3, -0.26, 0.0, 0.11, 0.24, 0.4, 0.49] {
            let h = 0.125;
            let n = 4000;
            let q: f64 = (0..n).map(|i| p.tau(o - h / 2.0 + (i as f64 + 0.5) * h / n as f64)).sum::<f64>() / n as f64;
            assert!((p.axis_average(o, h) - q).abs() < 1e-6, "{o}");
        }
    }

    #[test]
    fn rejects_inverted_bounds() {
        assert!(SingleSiteProfile::new(1.0, 2.0, 1.0, 1.0, ProfileShape::Indicator).is_err());
        assert!(SingleSiteProfile::new(1.0, 1.0, 1.0, 2.0, ProfileShape::Indicator).is_err());
        assert!(SingleSiteProfile::new(0.0, 1.0, 1.0, 1.0, ProfileShape::Indicator).is_err());
    }
}
