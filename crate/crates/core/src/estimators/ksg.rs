//! Kraskov-Stögbauer-Grassberger mutual information, second algorithm.
//!
//! For every joint sample the k nearest neighbors (max norm, self excluded)
//! fix one radius per marginal: the largest marginal distance among them.
//! Points within or on those radii are counted in each marginal space (self
//! excluded), and
//!
//! ```text
//! I = psi(k) - 1/k - <psi(n_x) + psi(n_y)> + psi(N)
//! ```
//!
//! is returned in bits.

use crate::error::{Error, Result};
use crate::neighbors::{KdTree, Metric};
use crate::points::PointCloud;

pub const DEFAULT_K: usize = 4;

/// `psi(n)` for `n = 0..=max`, with `psi(0)` unused. Exact harmonic sums.
pub(crate) fn digamma_table(max: usize) -> Vec<f64> {
    const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
    let mut t = Vec::with_capacity(max + 1);
    t.push(f64::NEG_INFINITY);
    let mut acc = -EULER_GAMMA;
    for n in 1..=max {
        t.push(acc);
        acc += 1.0 / n as f64;
    }
    t
}

pub fn ksg_mutual_information(x: &PointCloud, y: &PointCloud, k: usize) -> Result<f64> {
    let n = x.len();
    if y.len() != n {
        return Err(Error::LengthMismatch { left: n, right: y.len() });
    }
    if k == 0 {
        return Err(Error::invalid("KSG neighbor count k must be at least 1"));
    }
    if n <= k {
        return Err(Error::SeriesTooShort {
            required: k + 1,
            actual: n,
        });
    }
    let joint = x.join(y)?;
    let tree_joint = KdTree::new(&joint);
    let tree_x = KdTree::new(x);
    let tree_y = KdTree::new(y);
    let psi = digamma_table(n);

    let mut acc = 0.0;
    for i in 0..n {
        let (xi, yi) = (x.point(i), y.point(i));
        let nbrs = tree_joint.k_nearest(joint.point(i), k, Metric::Chebyshev, |j| j != i);
        let (rx, ry) = nbrs.iter().fold((0.0f64, 0.0f64), |(rx, ry), nb| {
            (
                rx.max(Metric::Chebyshev.distance(xi, x.point(nb.index))),
                ry.max(Metric::Chebyshev.distance(yi, y.point(nb.index))),
            )
        });
        let nx = tree_x.count_within(xi, rx, Metric::Chebyshev) - 1;
        let ny = tree_y.count_within(yi, ry, Metric::Chebyshev) - 1;
        acc += psi[nx] + psi[ny];
    }
    let nats = psi[k] - 1.0 / k as f64 - acc / n as f64 + psi[n];
    Ok(nats / std::f64::consts::LN_2)
}
