//! Dense real vectors.
//!
//! Primal points and dual vectors share one representation: the ambient
//! space is `R^d` with the Euclidean inner product, so the dual norm is the
//! Euclidean norm as well.

use alloc::vec::Vec;
use core::ops::Deref;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::Error;

/// A finite point in `R^d`, `d >= 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Point(Vec<f64>);

impl Point {
    pub fn new(coords: Vec<f64>) -> Result<Self, Error> {
        if coords.is_empty() {
            return Err(Error::InvalidInput("point must have dimension >= 1".into()));
        }
        if let Some(i) = coords.iter().position(|c| !c.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok(Point(coords))
    }

    pub fn from_slice(coords: &[f64]) -> Result<Self, Error> {
        Self::new(coords.to_vec())
    }

    pub fn zeros(dim: usize) -> Self {
        Point(alloc::vec![0.0; dim.max(1)])
    }

    /// Wraps a vector produced by internal arithmetic; finiteness is the
    /// caller's responsibility.
    pub(crate) fn from_vec_unchecked(coords: Vec<f64>) -> Self {
        Point(coords)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn norm(&self) -> f64 {
        norm(&self.0)
    }
}

impl Deref for Point {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl AsRef<[f64]> for Point {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

impl TryFrom<Vec<f64>> for Point {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self, Error> {
        Point::new(v)
    }
}

// Slice arithmetic used throughout the crate.

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[inline]
pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

#[inline]
pub fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

#[inline]
pub fn scale(a: &[f64], s: f64) -> Vec<f64> {
    a.iter().map(|x| s * x).collect()
}

/// `y += alpha * x`
#[inline]
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// `a * x + b * y`
#[inline]
pub fn lincomb(a: f64, x: &[f64], b: f64, y: &[f64]) -> Vec<f64> {
    x.iter().zip(y).map(|(xi, yi)| a * xi + b * yi).collect()
}

#[inline]
pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

#[inline]
pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

#[inline]
pub fn all_finite(a: &[f64]) -> bool {
    a.iter().all(|x| x.is_finite())
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn rejects_non_finite_and_empty() {
        assert_eq!(Point::new(vec![1.0, f64::NAN]), Err(Error::NonFinite(1)));
        assert!(Point::new(vec![f64::INFINITY]).is_err());
        assert!(Point::new(Vec::new()).is_err());
        assert_eq!(Point::new(vec![3.0, 4.0]).unwrap().norm(), 5.0);
    }

    #[test]
    fn slice_helpers() {
        let a = [1.0, 2.0];
        let b = [3.0, -1.0];
        assert_eq!(dot(&a, &b), 1.0);
        assert_eq!(lincomb(2.0, &a, 1.0, &b), vec![5.0, 3.0]);
        let mut y = vec![0.0, 0.0];
        axpy(2.0, &a, &mut y);
        assert_eq!(y, vec![2.0, 4.0]);
        assert_eq!(max_abs_diff(&a, &b), 3.0);
    }
}
