//! Saddle gradient operators and the problem container.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::point::{check_finite, Point};

/// Norm of `Fz` below which a point is treated as stationary.
pub const STATIONARY_TOL: f64 = 1e-14;

/// Tolerance on `||F z_*||` for a declared solution.
pub const SOLUTION_TOL: f64 = 1e-12;

/// A saddle gradient `F = (grad_x f, -grad_y f)` supplied in closed form.
///
/// Implementations must be deterministic and reentrant.
pub trait SaddleOperator: Send + Sync {
    fn dim(&self) -> usize;

    /// Writes `F z` into `out`; both slices have length `dim()`.
    fn apply(&self, z: &[f64], out: &mut [f64]);
}

struct FnOperator<F> {
    dim: usize,
    f: F,
}

impl<F> SaddleOperator for FnOperator<F>
where
    F: Fn(&[f64], &mut [f64]) + Send + Sync,
{
    fn dim(&self) -> usize {
        self.dim
    }
    fn apply(&self, z: &[f64], out: &mut [f64]) {
        (self.f)(z, out)
    }
}

/// Shared, immutable handle to a saddle operator.
#[derive(Clone)]
pub struct OperatorHandle {
    inner: Arc<dyn SaddleOperator>,
}

impl OperatorHandle {
    pub fn new<T: SaddleOperator + 'static>(op: T) -> Self {
        assert!(op.dim() > 0, "operator dimension must be positive");
        OperatorHandle {
            inner: Arc::new(op),
        }
    }

    /// Wraps a closure `(z, out)` as an operator of dimension `dim`.
    pub fn from_fn<F>(dim: usize, f: F) -> Self
    where
        F: Fn(&[f64], &mut [f64]) + Send + Sync + 'static,
    {
        Self::new(FnOperator { dim, f })
    }

    /// The identically zero operator.
    pub fn zero(dim: usize) -> Self {
        Self::from_fn(dim, |_, out| out.fill(0.0))
    }

    pub fn dim(&self) -> usize {
        self.inner.dim()
    }

    /// Evaluates `F z`, checking dimension and finiteness.
    pub fn eval(&self, z: &Point) -> Result<Point> {
        z.ensure_dim(self.dim())?;
        let mut out = vec![0.0; self.dim()];
        self.inner.apply(z.as_slice(), &mut out);
        check_finite(&out, "operator output")?;
        Ok(Point::from_vec_unchecked(out))
    }

    /// The same operator scaled by `c`.
    pub fn scaled(&self, c: f64) -> Self {
        let inner = self.inner.clone();
        Self::from_fn(self.dim(), move |z, out| {
            inner.apply(z, out);
            out.iter_mut().for_each(|v| *v *= c);
        })
    }
}

impl fmt::Debug for OperatorHandle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "OperatorHandle(dim={})", self.dim())
    }
}

/// A saddle operator with optional known constants and solution.
#[derive(Clone, Debug)]
pub struct ProblemSpec {
    pub operator: OperatorHandle,
    pub lipschitz: Option<f64>,
    pub comonotone: Option<f64>,
    pub solution: Option<Point>,
    pub label: String,
}

impl ProblemSpec {
    pub fn new(operator: OperatorHandle, label: impl Into<String>) -> Self {
        ProblemSpec {
            operator,
            lipschitz: None,
            comonotone: None,
            solution: None,
            label: label.into(),
        }
    }

    pub fn with_lipschitz(mut self, l: f64) -> Result<Self> {
        if !(l > 0.0 && l.is_finite()) {
            return Err(Error::param("lipschitz", format!("must be positive, got {l}")));
        }
        self.lipschitz = Some(l);
        Ok(self)
    }

    pub fn with_comonotone(mut self, rho: f64) -> Result<Self> {
        if !rho.is_finite() {
            return Err(Error::param("comonotone", "must be finite"));
        }
        self.comonotone = Some(rho);
        Ok(self)
    }

    /// Records a known stationary point; rejects it if `||F z_*|| > 1e-12`.
    pub fn with_solution(mut self, z: Point) -> Result<Self> {
        let fz = self.operator.eval(&z)?;
        if fz.norm() > SOLUTION_TOL {
            return Err(Error::param(
                "solution",
                format!("||F z*|| = {:e} exceeds {SOLUTION_TOL:e}", fz.norm()),
            ));
        }
        self.solution = Some(z);
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.operator.dim()
    }

    /// `L`, or an error naming the caller that needed it.
    pub fn require_lipschitz(&self, who: &str) -> Result<f64> {
        self.lipschitz.ok_or_else(|| {
            Error::ParameterRange(format!("{who} requires a declared Lipschitz constant"))
        })
    }

    pub fn require_comonotone(&self, who: &str) -> Result<f64> {
        self.comonotone.ok_or_else(|| {
            Error::ParameterRange(format!("{who} requires a declared comonotonicity constant"))
        })
    }

    /// `||z0 - z_*||` when a solution is known.
    pub fn distance_to_solution(&self, z0: &Point) -> Option<f64> {
        self.solution.as_ref().map(|s| z0.distance(s))
    }
}

/// Evaluates the problem's saddle operator at `z`.
pub fn evaluate_operator(problem: &ProblemSpec, z: &Point) -> Result<Point> {
    problem.operator.eval(z)
}
