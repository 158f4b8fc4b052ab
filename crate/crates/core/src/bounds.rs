use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Closed interval `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite()) || lo > hi {
            return Err(Error::Config(format!("invalid interval [{lo}, {hi}]")));
        }
        Ok(Self { lo, hi })
    }

    pub fn point(v: f64) -> Self {
        Self { lo: v, hi: v }
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn contains(&self, v: f64) -> bool {
        v >= self.lo && v <= self.hi
    }

    pub fn clamp(&self, v: f64) -> f64 {
        v.max(self.lo).min(self.hi)
    }

    /// Affine map of `[lo, hi]` onto `[-1, 1]`. A degenerate interval maps
    /// everything to 0.
    pub fn normalize(&self, v: f64) -> f64 {
        let w = self.width();
        if w == 0.0 {
            0.0
        } else {
            2.0 * (v - self.lo) / w - 1.0
        }
    }

    /// Inverse of [`Interval::normalize`]; the input is clamped to `[-1, 1]`
    /// first so the result always lies inside the interval.
    pub fn denormalize(&self, a: f64) -> f64 {
        let a = a.clamp(-1.0, 1.0);
        self.clamp(self.lo + 0.5 * (a + 1.0) * self.width())
    }

    /// Unclamped inverse of [`Interval::normalize`].
    pub fn unnormalize(&self, a: f64) -> f64 {
        self.lo + 0.5 * (a + 1.0) * self.width()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn rejects_reversed() {
        assert!(Interval::new(2.0, 1.0).is_err());
        assert!(Interval::new(f64::NAN, 1.0).is_err());
        assert!(Interval::new(1.0, 1.0).is_ok());
    }

    #[test]
    fn endpoints_map_to_unit_box() {
        let iv = Interval::new(333.15, 373.15).unwrap();
        assert_eq!(iv.normalize(333.15), -1.0);
        assert_eq!(iv.normalize(373.15), 1.0);
        assert_eq!(iv.denormalize(-1.0), 333.15);
        assert_eq!(iv.denormalize(1.0), 373.15);
        assert_eq!(iv.denormalize(7.0), 373.15);
    }

    proptest! {
        #[test]
        fn normalize_round_trip(lo in -1e4f64..1e4, w in 1e-3f64..1e5, t in 0.0f64..=1.0) {
            let iv = Interval::new(lo, lo + w).unwrap();
            let v = lo + t * w;
            let back = iv.denormalize(iv.normalize(v));
            prop_assert!((back - v).abs() <= 1e-12 * v.abs().max(w).max(1.0));
        }
    }
}
