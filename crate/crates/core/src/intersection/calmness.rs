//! Constructive metric calmness for systems of non-overlapping spheres.
//!
//! Given any configuration `x` of `n` spheres of radius `R`, these routines
//! build an explicit feasible configuration `y` whose distance to `x` is
//! controlled by the largest pairwise overlap. Two strategies are used:
//! sequential shifting when some overlap exceeds `R`, and cluster-wise
//! scaling otherwise.

use alloc::vec;
use alloc::vec::Vec;

use crate::geometry::StateVector;
use crate::linalg::{dist, norm};
use crate::{Error, Result};

/// Result of [`cluster_covers`].
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterCover {
    /// Cluster centers `Q_1 … Q_m`.
    pub centers: Vec<Vec<f64>>,
    /// Scale exponent: clusters are balls of radius `2^level · R`.
    pub level: u32,
    /// Cluster index of every input point.
    pub membership: Vec<usize>,
}

impl ClusterCover {
    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    /// Checks both covering conditions directly: every `B_R(X_i)` lies in
    /// `B_{2^L R}(Q_k)` of its cluster, and the balls `B_{2^{L+1} R}(Q_k)`
    /// are pairwise disjoint.
    pub fn satisfies_conditions(&self, positions: &[Vec<f64>], radius: f64) -> bool {
        let scale = libm::ldexp(radius, self.level as i32);
        let slack = 1e-12 * scale.max(1.0);
        let covered = positions
            .iter()
            .zip(&self.membership)
            .all(|(x, &k)| dist(x, &self.centers[k]) + radius <= scale + slack);
        let separated = (0..self.centers.len()).all(|a| {
            (a + 1..self.centers.len()).all(|b| dist(&self.centers[a], &self.centers[b]) > 4.0 * scale)
        });
        covered && separated
    }
}

/// Groups `positions` into well-separated clusters.
///
/// Starts from one cluster per point with `L = 0` and, while two doubled
/// balls `B_{2^{L+1}R}` intersect, merges the first such pair (in
/// lexicographic order) into a cluster centered at their midpoint and raises
/// `L` by two. The midpoint ball of radius `2^{L+2} R` contains both merged
/// balls, so every input ball stays covered. At most `n − 1` merges happen,
/// hence `L ≤ 2(n − 1)`.
pub fn cluster_covers(positions: &[Vec<f64>], radius: f64) -> Result<ClusterCover> {
    if positions.is_empty() {
        return Err(Error::invalid("need at least one position"));
    }
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::invalid("radius must be positive"));
    }
    let dim = positions[0].len();
    if positions.iter().any(|p| p.len() != dim) {
        return Err(Error::invalid("all positions must have the same dimension"));
    }
    let mut centers: Vec<Vec<f64>> = positions.to_vec();
    let mut membership: Vec<usize> = (0..positions.len()).collect();
    let mut level = 0u32;
    loop {
        let reach = 4.0 * libm::ldexp(radius, level as i32);
        let pair = (0..centers.len()).find_map(|a| {
            (a + 1..centers.len())
                .find(|&b| dist(&centers[a], &centers[b]) <= reach)
                .map(|b| (a, b))
        });
        let Some((a, b)) = pair else { break };
        let mid: Vec<f64> = centers[a].iter().zip(&centers[b]).map(|(p, q)| 0.5 * (p + q)).collect();
        centers[a] = mid;
        centers.remove(b);
        for k in membership.iter_mut() {
            if *k == b {
                *k = a;
            } else if *k > b {
                *k -= 1;
            }
        }
        level += 2;
    }
    Ok(ClusterCover {
        centers,
        level,
        membership,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RepairBranch {
    /// Input was already feasible.
    Identity,
    /// Largest overlap exceeds `R`: spheres are shifted one after another.
    Shift,
    /// Largest overlap at most `R`: every cluster is scaled about its center.
    Scale,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeasiblePoint {
    pub point: StateVector,
    pub branch: RepairBranch,
    /// Largest pairwise overlap `max(0, 2R − ‖X_i − X_j‖)` of the input.
    pub max_overlap: f64,
    /// Bound guaranteed by the branch: `Σ_i ‖X_i − Y_i‖ ≤ 2R·n(n−1)/2` for
    /// shifting, `‖x − y‖ ≤ n·2^{2(n−1)}·max_overlap` for scaling.
    pub bound: f64,
    /// Scale factor `2R / (2R − max_overlap)` of the scaling branch.
    pub scale: Option<f64>,
}

/// Builds a configuration of `n` spheres of radius `radius` with all
/// pairwise distances at least `2·radius`, close to `x`.
pub fn feasible_point_disks(x: &[f64], n: usize, dim: usize, radius: f64) -> Result<FeasiblePoint> {
    if n == 0 || dim == 0 || x.len() != n * dim {
        return Err(Error::DimensionMismatch {
            expected: n * dim,
            found: x.len(),
        });
    }
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::invalid("radius must be positive"));
    }
    let blocks: Vec<Vec<f64>> = x.chunks(dim).map(<[f64]>::to_vec).collect();
    let two_r = 2.0 * radius;
    let mut max_overlap: f64 = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            max_overlap = max_overlap.max(two_r - dist(&blocks[i], &blocks[j]));
        }
    }
    if max_overlap <= 0.0 {
        return Ok(FeasiblePoint {
            point: StateVector::from_vec(x.to_vec()),
            branch: RepairBranch::Identity,
            max_overlap: 0.0,
            bound: 0.0,
            scale: None,
        });
    }

    if max_overlap > radius {
        // Insert spheres one by one; each new sphere pushes all previously
        // placed ones radially away from itself by 2R.
        let mut placed: Vec<Vec<f64>> = Vec::with_capacity(n);
        for new in &blocks {
            for p in placed.iter_mut() {
                let mut dir: Vec<f64> = p.iter().zip(new).map(|(a, b)| a - b).collect();
                let len = norm(&dir);
                if len > 0.0 {
                    dir.iter_mut().for_each(|c| *c /= len);
                } else {
                    dir = vec![0.0; dim];
                    dir[0] = 1.0;
                }
                for (pc, dc) in p.iter_mut().zip(&dir) {
                    *pc += two_r * dc;
                }
            }
            placed.push(new.clone());
        }
        return Ok(FeasiblePoint {
            point: StateVector::from_vec(placed.concat()),
            branch: RepairBranch::Shift,
            max_overlap,
            bound: two_r * (n * (n - 1)) as f64 / 2.0,
            scale: None,
        });
    }

    let cover = cluster_covers(&blocks, radius)?;
    let c = two_r / (two_r - max_overlap);
    let mut y = Vec::with_capacity(n * dim);
    for (block, &k) in blocks.iter().zip(&cover.membership) {
        let q = &cover.centers[k];
        y.extend(block.iter().zip(q).map(|(xi, qi)| qi + c * (xi - qi)));
    }
    Ok(FeasiblePoint {
        point: StateVector::from_vec(y),
        branch: RepairBranch::Scale,
        max_overlap,
        bound: n as f64 * libm::ldexp(1.0, 2 * (n as i32 - 1)) * max_overlap,
        scale: Some(c),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn min_pair_distance(y: &[f64], dim: usize) -> f64 {
        let b: Vec<&[f64]> = y.chunks(dim).collect();
        let mut m = f64::INFINITY;
        for i in 0..b.len() {
            for j in i + 1..b.len() {
                m = m.min(dist(b[i], b[j]));
            }
        }
        m
    }

    #[test]
    fn single_point() {
        let c = cluster_covers(&[vec![1.0, 2.0]], 0.1).unwrap();
        assert_eq!(c.len(), 1);
        assert_eq!(c.level, 0);
        assert_eq!(c.centers, vec![vec![1.0, 2.0]]);
    }

    #[test]
    fn far_points_stay_separate() {
        let pts = [vec![0.0, 0.0], vec![10.0, 0.0]];
        let c = cluster_covers(&pts, 0.1).unwrap();
        assert_eq!((c.len(), c.level), (2, 0));
        assert!(c.satisfies_conditions(&pts, 0.1));
    }

    #[test]
    fn coincident_points_merge_once() {
        let pts = [vec![0.3, 0.3], vec![0.3, 0.3]];
        let c = cluster_covers(&pts, 0.1).unwrap();
        assert_eq!((c.len(), c.level), (1, 2));
        assert!(c.satisfies_conditions(&pts, 0.1));
    }

    #[test]
    fn merges_stay_within_level_bound() {
        // a chain of near-touching points forces repeated merges
        let pts: Vec<Vec<f64>> = (0..6).map(|i| vec![0.35 * i as f64, 0.0]).collect();
        let c = cluster_covers(&pts, 0.1).unwrap();
        assert!(c.level <= 2 * 5);
        assert!(c.satisfies_conditions(&pts, 0.1));
    }

    #[test]
    fn feasible_input_unchanged() {
        let x = [0.0, 0.0, 1.0, 0.0];
        let fp = feasible_point_disks(&x, 2, 2, 0.1).unwrap();
        assert_eq!(fp.branch, RepairBranch::Identity);
        assert_eq!(fp.point.as_slice(), &x);
    }

    #[test]
    fn small_overlap_scales_about_midpoint() {
        let x = [0.0, 0.0, 0.19, 0.0];
        let fp = feasible_point_disks(&x, 2, 2, 0.1).unwrap();
        assert_eq!(fp.branch, RepairBranch::Scale);
        assert_abs_diff_eq!(fp.scale.unwrap(), 0.2 / 0.19, epsilon = 1e-15);
        assert_abs_diff_eq!(fp.scale.unwrap(), 1.052_631_578_947_368_4, epsilon = 1e-12);
        let y = fp.point.as_slice();
        assert_abs_diff_eq!(dist(&y[..2], &y[2..]), 0.2, epsilon = 1e-15);
        // scaled about the midpoint (0.095, 0)
        assert_abs_diff_eq!(0.5 * (y[0] + y[2]), 0.095, epsilon = 1e-15);
        assert!(dist(&x, y) <= fp.bound);
    }

    #[test]
    fn coincident_centers_shift() {
        let x = [0.5, 0.5, 0.5, 0.5];
        let fp = feasible_point_disks(&x, 2, 2, 0.1).unwrap();
        assert_eq!(fp.branch, RepairBranch::Shift);
        let y = fp.point.as_slice();
        assert!(min_pair_distance(y, 2) >= 0.2 - 1e-15);
        let total: f64 = x.chunks(2).zip(y.chunks(2)).map(|(a, b)| dist(a, b)).sum();
        assert!(total <= 0.2 + 1e-15);
        assert_eq!(fp.bound, 0.2);
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(feasible_point_disks(&[0.0; 5], 2, 2, 0.1).is_err());
        assert!(cluster_covers(&[], 0.1).is_err());
        assert!(cluster_covers(&[vec![0.0]], -1.0).is_err());
    }
}
