use crate::error::{Error, Result};
use crate::operator::{OperatorHandle, ProblemSpec, SaddleOperator};
use crate::point::Point;

/// Saddle gradient of `f(x, y) = L x y`, i.e. `F(x, y) = (L y, -L x)`.
#[derive(Clone, Copy, Debug)]
pub struct Bilinear {
    pub lipschitz: f64,
}

impl SaddleOperator for Bilinear {
    fn dim(&self) -> usize {
        2
    }
    fn apply(&self, z: &[f64], out: &mut [f64]) {
        out[0] = self.lipschitz * z[1];
        out[1] = -(self.lipschitz * z[0]);
    }
}

/// Bilinear problem with `L`-Lipschitz, monotone (`rho = 0`) operator and solution at the origin.
pub fn make_bilinear(lipschitz: f64) -> Result<ProblemSpec> {
    if !(lipschitz > 0.0 && lipschitz.is_finite()) {
        return Err(Error::param("L", format!("must be positive, got {lipschitz}")));
    }
    ProblemSpec::new(
        OperatorHandle::new(Bilinear { lipschitz }),
        format!("bilinear(L={lipschitz})"),
    )
    .with_lipschitz(lipschitz)?
    .with_comonotone(0.0)?
    .with_solution(Point::zeros(2))
}

/// Saddle gradient of the piecewise smooth function of `s = x - y` that no
/// span-respecting method can leave when started on the diagonal.
///
/// Regions are half-open as `[-r, 0)`, `[0, r)`, with `r = sqrt(R/L)`;
/// the outer plateaus have zero gradient.
#[derive(Clone, Copy, Debug)]
pub struct WorstCaseSmooth {
    pub lipschitz: f64,
    pub radius: f64,
    width: f64,
    slope: f64,
}

impl WorstCaseSmooth {
    pub fn new(lipschitz: f64, radius: f64) -> Result<Self> {
        if !(lipschitz > 0.0 && lipschitz.is_finite()) {
            return Err(Error::param("L", format!("must be positive, got {lipschitz}")));
        }
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::param("R", format!("must be positive, got {radius}")));
        }
        Ok(WorstCaseSmooth {
            lipschitz,
            radius,
            width: (radius / lipschitz).sqrt(),
            slope: (lipschitz * radius).sqrt(),
        })
    }

    /// Function value, used by finite-difference checks.
    pub fn value(&self, x: f64, y: f64) -> f64 {
        let s = x - y;
        let (l, r) = (self.lipschitz, self.radius);
        if s < -self.width {
            r / 2.0
        } else if s < 0.0 {
            -l / 2.0 * s * s - self.slope * s
        } else if s < self.width {
            l / 2.0 * s * s - self.slope * s
        } else {
            -r / 2.0
        }
    }

    /// Common value of both components of `F` as a function of `s = x - y`.
    fn profile(&self, s: f64) -> f64 {
        if s < -self.width {
            0.0
        } else if s < 0.0 {
            -self.lipschitz * s - self.slope
        } else if s < self.width {
            self.lipschitz * s - self.slope
        } else {
            0.0
        }
    }
}

impl SaddleOperator for WorstCaseSmooth {
    fn dim(&self) -> usize {
        2
    }
    fn apply(&self, z: &[f64], out: &mut [f64]) {
        let g = self.profile(z[0] - z[1]);
        out[0] = g;
        out[1] = g;
    }
}

/// The worst-case smooth problem with parameters `L, R`.
///
/// Its operator is `2L`-Lipschitz (the Hessian of `f` is `h''(s)·[[1,-1],[-1,1]]`),
/// so `2L` is what gets declared. No comonotonicity constant and no solution.
pub fn make_worst_case_smooth(lipschitz: f64, radius: f64) -> Result<ProblemSpec> {
    let op = WorstCaseSmooth::new(lipschitz, radius)?;
    ProblemSpec::new(
        OperatorHandle::new(op),
        format!("worst-case(L={lipschitz},R={radius})"),
    )
    .with_lipschitz(2.0 * lipschitz)
}
