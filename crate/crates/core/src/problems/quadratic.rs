use std::path::Path;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{max_asymmetry, min_singular_value, min_sym_eigenvalue, spectral_norm};
use crate::operator::{OperatorHandle, ProblemSpec, SaddleOperator};
use crate::point::Point;

const SYMMETRY_TOL: f64 = 1e-12;
const PSD_TOL: f64 = 1e-10;
const MAX_RESAMPLES: usize = 100;

/// `f(x, y) = ½xᵀAx + xᵀBy − ½yᵀCy` with `A`, `C` symmetric.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawQuadratic", into = "RawQuadratic")]
pub struct QuadraticMinimax {
    a: DMatrix<f64>,
    b: DMatrix<f64>,
    c: DMatrix<f64>,
}

#[derive(Serialize, Deserialize)]
struct RawQuadratic {
    a: Vec<Vec<f64>>,
    b: Vec<Vec<f64>>,
    c: Vec<Vec<f64>>,
}

fn to_matrix(name: &'static str, rows: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != ncols) {
        return Err(Error::param(name, "rows have different lengths"));
    }
    Ok(DMatrix::from_fn(nrows, ncols, |i, j| rows[i][j]))
}

fn to_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| m.row(i).iter().cloned().collect())
        .collect()
}

impl TryFrom<RawQuadratic> for QuadraticMinimax {
    type Error = Error;
    fn try_from(raw: RawQuadratic) -> Result<Self> {
        QuadraticMinimax::new(
            to_matrix("a", &raw.a)?,
            to_matrix("b", &raw.b)?,
            to_matrix("c", &raw.c)?,
        )
    }
}

impl From<QuadraticMinimax> for RawQuadratic {
    fn from(q: QuadraticMinimax) -> Self {
        RawQuadratic {
            a: to_rows(&q.a),
            b: to_rows(&q.b),
            c: to_rows(&q.c),
        }
    }
}

impl QuadraticMinimax {
    pub fn new(a: DMatrix<f64>, b: DMatrix<f64>, c: DMatrix<f64>) -> Result<Self> {
        let (dx, dy) = (a.nrows(), c.nrows());
        if dx == 0 || dy == 0 {
            return Err(Error::Empty("quadratic blocks must be nonempty"));
        }
        if a.ncols() != dx {
            return Err(Error::DimensionMismatch { expected: dx, found: a.ncols() });
        }
        if c.ncols() != dy {
            return Err(Error::DimensionMismatch { expected: dy, found: c.ncols() });
        }
        if b.nrows() != dx {
            return Err(Error::DimensionMismatch { expected: dx, found: b.nrows() });
        }
        if b.ncols() != dy {
            return Err(Error::DimensionMismatch { expected: dy, found: b.ncols() });
        }
        for (name, m) in [("a", &a), ("b", &b), ("c", &c)] {
            if m.iter().any(|v| !v.is_finite()) {
                return Err(Error::param(name, "entries must be finite"));
            }
        }
        if max_asymmetry(&a) > SYMMETRY_TOL {
            return Err(Error::param("a", "matrix is not symmetric"));
        }
        if max_asymmetry(&c) > SYMMETRY_TOL {
            return Err(Error::param("c", "matrix is not symmetric"));
        }
        Ok(QuadraticMinimax { a, b, c })
    }

    /// Convenience constructor from row-major slices.
    pub fn from_rows(dx: usize, dy: usize, a: &[f64], b: &[f64], c: &[f64]) -> Result<Self> {
        if a.len() != dx * dx || b.len() != dx * dy || c.len() != dy * dy {
            return Err(Error::param("q", "slice lengths do not match dx, dy"));
        }
        Self::new(
            DMatrix::from_row_slice(dx, dx, a),
            DMatrix::from_row_slice(dx, dy, b),
            DMatrix::from_row_slice(dy, dy, c),
        )
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        serde_json::from_str(&text).map_err(|e| Error::config("quadratic", e.to_string()))
    }

    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }
    pub fn b(&self) -> &DMatrix<f64> {
        &self.b
    }
    pub fn c(&self) -> &DMatrix<f64> {
        &self.c
    }
    pub fn dx(&self) -> usize {
        self.a.nrows()
    }
    pub fn dy(&self) -> usize {
        self.c.nrows()
    }

    /// The block operator matrix `[[A, B], [-Bᵀ, C]]`.
    pub fn operator_matrix(&self) -> DMatrix<f64> {
        let (dx, dy) = (self.dx(), self.dy());
        let mut m = DMatrix::zeros(dx + dy, dx + dy);
        m.view_mut((0, 0), (dx, dx)).copy_from(&self.a);
        m.view_mut((0, dx), (dx, dy)).copy_from(&self.b);
        m.view_mut((dx, 0), (dy, dx)).copy_from(&(-self.b.transpose()));
        m.view_mut((dx, dx), (dy, dy)).copy_from(&self.c);
        m
    }

    /// Spectral norm of the operator matrix; equals the smoothness of `f`.
    pub fn smoothness(&self) -> f64 {
        spectral_norm(&self.operator_matrix())
    }
}

/// `z -> M z` with a fixed row-major accumulation order.
#[derive(Clone, Debug)]
pub struct LinearOperator {
    dim: usize,
    rows: Vec<f64>,
}

impl LinearOperator {
    pub fn new(m: &DMatrix<f64>) -> Self {
        assert_eq!(m.nrows(), m.ncols(), "linear operator must be square");
        let dim = m.nrows();
        let mut rows = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            rows.extend(m.row(i).iter());
        }
        LinearOperator { dim, rows }
    }
}

impl SaddleOperator for LinearOperator {
    fn dim(&self) -> usize {
        self.dim
    }
    fn apply(&self, z: &[f64], out: &mut [f64]) {
        for (o, row) in out.iter_mut().zip(self.rows.chunks_exact(self.dim)) {
            *o = row.iter().zip(z).fold(0.0, |acc, (m, x)| acc + m * x);
        }
    }
}

/// Problem with operator `F(x, y) = (Ax + By, −Bᵀx + Cy)`.
///
/// `lipschitz` is the spectral norm of the operator matrix; the solution is
/// recorded as the origin when that matrix is nonsingular. No comonotonicity
/// constant is attached.
pub fn make_quadratic(q: &QuadraticMinimax) -> Result<ProblemSpec> {
    let m = q.operator_matrix();
    let d = m.nrows();
    let mut p = ProblemSpec::new(
        OperatorHandle::new(LinearOperator::new(&m)),
        format!("quadratic(dx={},dy={})", q.dx(), q.dy()),
    );
    let l = spectral_norm(&m);
    if l > 0.0 {
        p = p.with_lipschitz(l)?;
        if min_singular_value(&m) > 1e-12 * l {
            p = p.with_solution(Point::zeros(d))?;
        }
    }
    Ok(p)
}

/// `F(z) = μz` in two dimensions: cocoercive with `ρ = 1/μ`.
pub fn make_scaled_identity(mu: f64) -> Result<ProblemSpec> {
    if !(mu > 0.0 && mu.is_finite()) {
        return Err(Error::param("mu", format!("must be positive, got {mu}")));
    }
    let q = QuadraticMinimax::from_rows(1, 1, &[mu], &[0.0], &[mu])?;
    let mut p = make_quadratic(&q)?.with_comonotone(1.0 / mu)?;
    p.label = format!("scaled-identity(mu={mu})");
    Ok(p)
}

/// Whether `A + B(ηI + C)⁻¹Bᵀ ⪰ αI` and `C + Bᵀ(ηI + A)⁻¹B ⪰ αI`.
///
/// A `true` result certifies `−1/η`-comonotonicity of the induced operator.
pub fn check_interaction_dominance(q: &QuadraticMinimax, alpha: f64, eta: f64) -> Result<bool> {
    if !(alpha >= 0.0 && alpha.is_finite()) {
        return Err(Error::param("alpha", format!("must be nonnegative, got {alpha}")));
    }
    let gamma = q.smoothness();
    if !(eta > gamma && eta.is_finite()) {
        return Err(Error::ParameterRange(format!(
            "eta = {eta} must exceed the smoothness constant {gamma}"
        )));
    }
    let shift = |m: &DMatrix<f64>, name: &str| -> Result<DMatrix<f64>> {
        let n = m.nrows();
        (DMatrix::identity(n, n) * eta + m)
            .try_inverse()
            .ok_or_else(|| Error::Singular(format!("eta*I + {name}")))
    };
    let bt = q.b.transpose();
    let first = &q.a + &q.b * shift(&q.c, "C")? * &bt;
    let second = &q.c + &bt * shift(&q.a, "A")? * &q.b;
    Ok(min_sym_eigenvalue(&first) >= alpha - PSD_TOL
        && min_sym_eigenvalue(&second) >= alpha - PSD_TOL)
}

/// Exact test of `ρ`-comonotonicity for `F(z) = Mz`: `sym(M) − ρMᵀM ⪰ 0`.
pub fn linear_comonotone_margin(m: &DMatrix<f64>, rho: f64) -> f64 {
    let sym = (m + m.transpose()) * 0.5 - m.transpose() * m * rho;
    min_sym_eigenvalue(&sym)
}

fn orthogonal(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<f64> {
    let g = DMatrix::from_fn(n, n, |_, _| rng.sample::<f64, _>(StandardNormal));
    g.qr().q()
}

fn conjugate_diag(q: &DMatrix<f64>, diag: &[f64]) -> DMatrix<f64> {
    let d = DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(diag));
    let m = q * d * q.transpose();
    (&m + m.transpose()) * 0.5
}

fn sample_candidate(rng: &mut ChaCha8Rng, half: usize, eta: f64) -> Result<QuadraticMinimax> {
    // A, C mildly indefinite; B dominant enough that the Schur complements stay PSD.
    let mut a_eig: Vec<f64> = (0..half)
        .map(|_| rng.random_range(-0.02 * eta..0.005 * eta))
        .collect();
    a_eig[0] = -0.02 * eta * rng.random_range(0.5..1.0);
    let c_eig: Vec<f64> = (0..half)
        .map(|_| rng.random_range(-0.02 * eta..0.005 * eta))
        .collect();
    let s: Vec<f64> = (0..half)
        .map(|_| rng.random_range(0.15 * eta..0.2 * eta))
        .collect();
    let a = conjugate_diag(&orthogonal(rng, half), &a_eig);
    let c = conjugate_diag(&orthogonal(rng, half), &c_eig);
    let u = orthogonal(rng, half);
    let v = orthogonal(rng, half);
    let b = &u * DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(&s)) * v.transpose();
    QuadraticMinimax::new(a, b, c)
}

/// Random quadratic with a nonconvex-nonconcave `f` whose operator is
/// `rho_target`-comonotone, certified by interaction dominance at `η = −1/ρ`.
///
/// Deterministic in `seed`. The Lipschitz constant lands near `0.2η`, so
/// `ρ > −1/(2L)` holds with margin.
pub fn random_negative_comonotone(seed: u64, d: usize, rho_target: f64) -> Result<ProblemSpec> {
    generate(seed, d, rho_target).map(|(_, p)| p)
}

/// The matrices behind [`random_negative_comonotone`].
pub fn random_negative_comonotone_matrices(
    seed: u64,
    d: usize,
    rho_target: f64,
) -> Result<QuadraticMinimax> {
    generate(seed, d, rho_target).map(|(q, _)| q)
}

fn generate(seed: u64, d: usize, rho_target: f64) -> Result<(QuadraticMinimax, ProblemSpec)> {
    if d < 2 || !d.is_multiple_of(2) {
        return Err(Error::param("d", format!("must be even and at least 2, got {d}")));
    }
    if !(rho_target < 0.0 && rho_target.is_finite()) {
        return Err(Error::param("rho_target", format!("must be negative, got {rho_target}")));
    }
    let eta = -1.0 / rho_target;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..MAX_RESAMPLES {
        let q = sample_candidate(&mut rng, d / 2, eta)?;
        if !check_interaction_dominance(&q, 0.0, eta)? {
            continue;
        }
        if linear_comonotone_margin(&q.operator_matrix(), rho_target) < -PSD_TOL {
            continue;
        }
        let mut p = make_quadratic(&q)?;
        let l = p.require_lipschitz("random_negative_comonotone")?;
        if p.solution.is_none() || rho_target <= -1.0 / (2.0 * l) {
            continue;
        }
        p = p.with_comonotone(rho_target)?;
        p.label = format!("random-nc(seed={seed},d={d},rho={rho_target})");
        return Ok((q, p));
    }
    Err(Error::CertificationFailed { attempts: MAX_RESAMPLES })
}
