use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::exec::{map_indexed, Execution};
use crate::operator::OperatorHandle;
use crate::point::Point;

const DEGENERATE: f64 = 1e-12;

/// Seeded generator of point pairs drawn uniformly from a box.
///
/// Pair `i` depends only on `(seed, i)`, so samples can be generated in parallel.
#[derive(Clone, Debug, PartialEq)]
pub struct PairSampler {
    pub seed: u64,
    pub dim: usize,
    pub lo: f64,
    pub hi: f64,
}

impl PairSampler {
    pub fn uniform_box(seed: u64, dim: usize, lo: f64, hi: f64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Empty("sampler dimension must be positive"));
        }
        if !(lo < hi && lo.is_finite() && hi.is_finite()) {
            return Err(Error::param("box", format!("need finite lo < hi, got [{lo}, {hi}]")));
        }
        Ok(PairSampler { seed, dim, lo, hi })
    }

    pub fn pair(&self, i: usize) -> (Point, Point) {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(i as u64);
        let mut draw = || {
            let v = (0..self.dim).map(|_| rng.random_range(self.lo..self.hi)).collect();
            Point::new(v).expect("box samples are finite")
        };
        let z = draw();
        let w = draw();
        (z, w)
    }
}

fn differences(op: &OperatorHandle, sampler: &PairSampler, i: usize) -> Result<(Point, Point)> {
    let (z, w) = sampler.pair(i);
    let dz = z.sub(&w);
    let df = op.eval(&z)?.sub(&op.eval(&w)?);
    Ok((dz, df))
}

fn reduce<F>(op: &OperatorHandle, sampler: &PairSampler, n: usize, exec: Execution, ratio: F, max: bool) -> Result<f64>
where
    F: Fn(&Point, &Point) -> Option<f64> + Sync + Send,
{
    if n == 0 {
        return Err(Error::param("n", "must be at least 1"));
    }
    if sampler.dim != op.dim() {
        return Err(Error::DimensionMismatch {
            expected: op.dim(),
            found: sampler.dim,
        });
    }
    let values = map_indexed(n, exec, |i| {
        differences(op, sampler, i).map(|(dz, df)| ratio(&dz, &df))
    });
    let mut best: Option<f64> = None;
    for v in values {
        if let Some(r) = v? {
            best = Some(match best {
                None => r,
                Some(b) if max => b.max(r),
                Some(b) => b.min(r),
            });
        }
    }
    best.ok_or(Error::DegenerateSample)
}

/// `max ||Fz − Fz'|| / ||z − z'||` over `n` sampled pairs (pairs closer than
/// `1e-12` are skipped). Never exceeds the true Lipschitz constant.
pub fn estimate_lipschitz(op: &OperatorHandle, sampler: &PairSampler, n: usize, exec: Execution) -> Result<f64> {
    reduce(
        op,
        sampler,
        n,
        exec,
        |dz, df| {
            let nz = dz.norm();
            (nz >= DEGENERATE).then(|| df.norm() / nz)
        },
        true,
    )
}

/// `min <Fz − Fz', z − z'> / ||Fz − Fz'||²` over `n` sampled pairs (pairs with
/// `||Fz − Fz'|| < 1e-12` are skipped). Never below the true comonotonicity constant.
pub fn estimate_comonotonicity(
    op: &OperatorHandle,
    sampler: &PairSampler,
    n: usize,
    exec: Execution,
) -> Result<f64> {
    reduce(
        op,
        sampler,
        n,
        exec,
        |dz, df| {
            let nf = df.norm();
            (nf >= DEGENERATE).then(|| df.dot(dz) / (nf * nf))
        },
        false,
    )
}
