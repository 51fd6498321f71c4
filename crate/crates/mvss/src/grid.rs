//! Real scalars and the finite filtration grid.

use num_traits::{Float, NumCast};
use std::fmt::{Debug, Display};

use crate::error::{MvssError, Result};

/// Floating-point scalar used for filtration values, coordinates and distances.
pub trait Real: Float + Debug + Display + Default + Send + Sync + 'static {
    fn from_f64(v: f64) -> Self {
        <Self as NumCast>::from(v).expect("finite conversion")
    }

    fn to_f64(self) -> f64 {
        <f64 as NumCast>::from(self).unwrap_or(f64::NAN)
    }

    /// Slack used when comparing sums of grid values against grid values.
    fn snap_tolerance() -> Self;
}

impl Real for f64 {
    fn snap_tolerance() -> Self {
        1e-9
    }
}

impl Real for f32 {
    fn snap_tolerance() -> Self {
        1e-5
    }
}

/// Strictly increasing finite list of filtration values.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid<R = f64> {
    values: Vec<R>,
}

impl<R: Real> Grid<R> {
    pub fn new(values: Vec<R>) -> Result<Self> {
        if values.is_empty() {
            return Err(MvssError::input("filtration grid must have at least one value"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(MvssError::input("filtration grid values must be finite"));
        }
        if values.windows(2).any(|w| w[0] >= w[1]) {
            return Err(MvssError::input("filtration grid must be strictly increasing"));
        }
        Ok(Self { values })
    }

    /// Sorted, deduplicated grid from arbitrary values.
    pub fn from_unsorted(mut values: Vec<R>) -> Result<Self> {
        values.sort_by(|a, b| a.partial_cmp(b).expect("finite grid values"));
        values.dedup();
        Self::new(values)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[R] {
        &self.values
    }

    pub fn value(&self, t: usize) -> R {
        self.values[t]
    }

    pub fn last_index(&self) -> usize {
        self.values.len() - 1
    }

    /// Index of an exact grid value.
    pub fn index_of(&self, v: R) -> Option<usize> {
        let tol = R::snap_tolerance() * (R::one() + v.abs());
        self.values.iter().position(|&g| (g - v).abs() <= tol)
    }

    /// Smallest index whose value is at least `v`; values above the grid map
    /// to the last index, where a tame filtration is constant.
    pub fn snap_up(&self, v: R) -> usize {
        let tol = R::snap_tolerance() * (R::one() + v.abs());
        self.values
            .iter()
            .position(|&g| g >= v - tol)
            .unwrap_or(self.values.len() - 1)
    }

    /// Smallest index whose value is at least `value(t) + eps`.
    pub fn shift_index(&self, t: usize, eps: R) -> usize {
        if eps <= R::zero() {
            return t;
        }
        self.snap_up(self.values[t] + eps).max(t)
    }

    /// Largest index whose value is at most `v`, if any.
    pub fn floor_index(&self, v: R) -> Option<usize> {
        let tol = R::snap_tolerance() * (R::one() + v.abs());
        self.values.iter().rposition(|&g| g <= v + tol)
    }
}
