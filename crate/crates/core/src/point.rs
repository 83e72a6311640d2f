//! Dense points in `R^d` and deterministic linear combinations.

use std::fmt;
use std::ops::Index;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A finite point in `R^d` (an iterate `z` or an operator value `Fz`).
#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Point {
    coords: Vec<f64>,
}

impl Point {
    /// Builds a point, rejecting empty input and non-finite entries.
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::Empty("point must have at least one coordinate"));
        }
        check_finite(&coords, "point construction")?;
        Ok(Point { coords })
    }

    pub fn zeros(dim: usize) -> Self {
        assert!(dim > 0, "dimension must be positive");
        Point {
            coords: vec![0.0; dim],
        }
    }

    /// Wraps coordinates already known to be finite.
    pub(crate) fn from_vec_unchecked(coords: Vec<f64>) -> Self {
        debug_assert!(!coords.is_empty());
        Point { coords }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    #[inline]
    pub fn as_slice(&self) -> &[f64] {
        &self.coords
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.coords
    }

    pub fn dot(&self, other: &Point) -> f64 {
        debug_assert_eq!(self.dim(), other.dim());
        self.coords
            .iter()
            .zip(&other.coords)
            .fold(0.0, |acc, (a, b)| acc + a * b)
    }

    pub fn norm_sq(&self) -> f64 {
        self.dot(self)
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    /// `self - other`, coordinatewise.
    pub fn sub(&self, other: &Point) -> Point {
        debug_assert_eq!(self.dim(), other.dim());
        Point::from_vec_unchecked(
            self.coords
                .iter()
                .zip(&other.coords)
                .map(|(a, b)| a - b)
                .collect(),
        )
    }

    pub fn distance(&self, other: &Point) -> f64 {
        self.sub(other).norm()
    }

    pub fn is_finite(&self) -> bool {
        self.coords.iter().all(|c| c.is_finite())
    }

    pub(crate) fn ensure_dim(&self, expected: usize) -> Result<()> {
        if self.dim() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                found: self.dim(),
            });
        }
        Ok(())
    }
}

impl Index<usize> for Point {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.coords[i]
    }
}

impl fmt::Debug for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Point{:?}", self.coords)
    }
}

impl TryFrom<Vec<f64>> for Point {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        Point::new(v)
    }
}

impl From<Point> for Vec<f64> {
    fn from(p: Point) -> Vec<f64> {
        p.coords
    }
}

pub(crate) fn check_finite(values: &[f64], context: &str) -> Result<()> {
    match values.iter().position(|v| !v.is_finite()) {
        Some(coord) => Err(Error::NonFinite {
            coord,
            context: context.to_string(),
        }),
        None => Ok(()),
    }
}

/// Linear combination `sum_i c_i p_i`, accumulated in list order.
///
/// The accumulation order is fixed so repeated calls are bitwise identical.
pub fn vector_combine(terms: &[(f64, &Point)]) -> Result<Point> {
    let (first_coeff, first) = terms
        .first()
        .ok_or(Error::Empty("vector_combine needs at least one term"))?;
    let dim = first.dim();
    for (_, p) in &terms[1..] {
        p.ensure_dim(dim)?;
    }
    let mut out: Vec<f64> = first.coords.iter().map(|x| first_coeff * x).collect();
    for (c, p) in &terms[1..] {
        for (o, x) in out.iter_mut().zip(&p.coords) {
            *o += c * x;
        }
    }
    check_finite(&out, "vector_combine")?;
    Ok(Point::from_vec_unchecked(out))
}
