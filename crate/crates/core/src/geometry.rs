//! Elementary constraint sets with closed-form distances and projections.
//!
//! Every set here is closed and uniformly prox-regular: convex sets (balls,
//! half-spaces) have an infinite prox radius, the exterior of a ball of
//! radius `r` is `r`-prox-regular, and the pairwise non-overlap set
//! `{‖X_i − X_j‖ ≥ 2R}` is treated as `R`-prox-regular.
//!
//! All operations act on the full state vector. For [`PairwiseDistance`]
//! the projection moves both particle blocks symmetrically, so the metric
//! distance in the joint space is the overlap divided by `√2`.

use alloc::vec::Vec;
use core::ops::Deref;

use crate::linalg::{dist, dot, norm, sqrt};
use crate::{Error, Result};

/// A point of the state space: all particle coordinates concatenated.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector(Vec<f64>);

impl StateVector {
    /// Wraps `coords`, rejecting empty vectors and non-finite entries.
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::invalid("state vector must have at least one coordinate"));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::invalid("state vector entries must be finite"));
        }
        Ok(StateVector(coords))
    }

    pub fn zeros(dim: usize) -> Self {
        StateVector(alloc::vec![0.0; dim.max(1)])
    }

    /// Internal constructor for values produced by the crate's own
    /// arithmetic; callers check finiteness where it matters.
    pub(crate) fn from_vec(coords: Vec<f64>) -> Self {
        StateVector(coords)
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

    pub fn distance_to(&self, other: &[f64]) -> f64 {
        dist(&self.0, other)
    }
}

impl Deref for StateVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl AsRef<[f64]> for StateVector {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

/// Closed ball; the state is constrained to stay inside.
#[derive(Debug, Clone, PartialEq)]
pub struct Ball {
    center: Vec<f64>,
    radius: f64,
}

impl Ball {
    pub fn new(center: Vec<f64>, radius: f64) -> Result<Self> {
        check_point(&center)?;
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::invalid("ball radius must be positive and finite"));
        }
        Ok(Ball { center, radius })
    }

    pub fn center(&self) -> &[f64] {
        &self.center
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }
}

/// Complement of an open ball: the state must keep at least `radius`
/// distance from `center`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExcludedBall {
    center: Vec<f64>,
    radius: f64,
}

impl ExcludedBall {
    pub fn new(center: Vec<f64>, radius: f64) -> Result<Self> {
        check_point(&center)?;
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::invalid("excluded ball radius must be positive and finite"));
        }
        Ok(ExcludedBall { center, radius })
    }

    pub fn center(&self) -> &[f64] {
        &self.center
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }
}

/// Minimum distance between two particles `i` and `j`, each occupying a
/// block of `dim` consecutive coordinates of the state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairwiseDistance {
    i: usize,
    j: usize,
    dim: usize,
    min_dist: f64,
}

impl PairwiseDistance {
    pub fn new(i: usize, j: usize, dim: usize, min_dist: f64) -> Result<Self> {
        if i == j {
            return Err(Error::invalid("pairwise constraint needs two distinct particles"));
        }
        if dim == 0 {
            return Err(Error::invalid("particle dimension must be positive"));
        }
        if !(min_dist > 0.0 && min_dist.is_finite()) {
            return Err(Error::invalid("minimum distance must be positive and finite"));
        }
        Ok(PairwiseDistance { i, j, dim, min_dist })
    }

    pub fn particles(&self) -> (usize, usize) {
        (self.i, self.j)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn min_dist(&self) -> f64 {
        self.min_dist
    }

    fn block(&self, k: usize) -> core::ops::Range<usize> {
        k * self.dim..(k + 1) * self.dim
    }

    /// Distance between the two particle centers.
    pub fn separation(&self, x: &[f64]) -> f64 {
        dist(&x[self.block(self.i)], &x[self.block(self.j)])
    }

    /// `max(0, min_dist − ‖X_i − X_j‖)`. This is `√2` times the joint-space
    /// distance returned by [`Constraint::distance`].
    pub fn overlap(&self, x: &[f64]) -> Result<f64> {
        Constraint::Pair(*self).check_dim(x.len())?;
        Ok(self.overlap_unchecked(x))
    }

    // Same feasibility test as the projection (squared distances), so that
    // zero overlap and "projection is a no-op" agree exactly.
    fn overlap_unchecked(&self, x: &[f64]) -> f64 {
        let r2 = self.separation_sq(x);
        if r2 >= self.min_dist * self.min_dist {
            0.0
        } else {
            self.min_dist - sqrt(r2)
        }
    }

    fn separation_sq(&self, x: &[f64]) -> f64 {
        let (bi, bj) = (self.i * self.dim, self.j * self.dim);
        (0..self.dim).map(|k| {
            let d = x[bj + k] - x[bi + k];
            d * d
        }).sum()
    }
}

/// Half-space `{x : ⟨normal, x⟩ ≥ offset}` with a unit normal.
#[derive(Debug, Clone, PartialEq)]
pub struct HalfSpace {
    normal: Vec<f64>,
    offset: f64,
}

impl HalfSpace {
    pub fn new(normal: Vec<f64>, offset: f64) -> Result<Self> {
        check_point(&normal)?;
        if !offset.is_finite() {
            return Err(Error::invalid("half-space offset must be finite"));
        }
        if (norm(&normal) - 1.0).abs() > 1e-12 {
            return Err(Error::invalid("half-space normal must have unit length"));
        }
        Ok(HalfSpace { normal, offset })
    }

    pub fn normal(&self) -> &[f64] {
        &self.normal
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }
}

fn check_point(p: &[f64]) -> Result<()> {
    if p.is_empty() || p.iter().any(|c| !c.is_finite()) {
        return Err(Error::invalid("points must be non-empty with finite coordinates"));
    }
    Ok(())
}

/// One prox-regular feasible set `S_j`.
#[derive(Debug, Clone, PartialEq)]
pub enum Constraint {
    Ball(Ball),
    ExcludedBall(ExcludedBall),
    Pair(PairwiseDistance),
    HalfSpace(HalfSpace),
}

impl From<Ball> for Constraint {
    fn from(b: Ball) -> Self {
        Constraint::Ball(b)
    }
}

impl From<ExcludedBall> for Constraint {
    fn from(b: ExcludedBall) -> Self {
        Constraint::ExcludedBall(b)
    }
}

impl From<PairwiseDistance> for Constraint {
    fn from(p: PairwiseDistance) -> Self {
        Constraint::Pair(p)
    }
}

impl From<HalfSpace> for Constraint {
    fn from(h: HalfSpace) -> Self {
        Constraint::HalfSpace(h)
    }
}

impl Constraint {
    /// Radius `η` of uniform prox-regularity; `+∞` for convex sets.
    pub fn prox_radius(&self) -> f64 {
        match self {
            Constraint::Ball(_) | Constraint::HalfSpace(_) => f64::INFINITY,
            Constraint::ExcludedBall(b) => b.radius,
            Constraint::Pair(p) => p.min_dist / 2.0,
        }
    }

    /// State dimension fixed by this constraint, if any. Pairwise
    /// constraints only impose a lower bound (see [`Constraint::check_dim`]).
    pub fn fixed_dim(&self) -> Option<usize> {
        match self {
            Constraint::Ball(b) => Some(b.center.len()),
            Constraint::ExcludedBall(b) => Some(b.center.len()),
            Constraint::HalfSpace(h) => Some(h.normal.len()),
            Constraint::Pair(_) => None,
        }
    }

    pub fn check_dim(&self, len: usize) -> Result<()> {
        match self.fixed_dim() {
            Some(d) if d != len => Err(Error::DimensionMismatch { expected: d, found: len }),
            Some(_) => Ok(()),
            None => {
                let Constraint::Pair(p) = self else { unreachable!() };
                let needed = (p.i.max(p.j) + 1) * p.dim;
                if len < needed || !len.is_multiple_of(p.dim) {
                    Err(Error::DimensionMismatch { expected: needed, found: len })
                } else {
                    Ok(())
                }
            }
        }
    }

    /// Euclidean distance `d_S(x)` from `x` to the set; zero iff feasible.
    pub fn distance(&self, x: &[f64]) -> Result<f64> {
        self.check_dim(x.len())?;
        Ok(self.distance_unchecked(x))
    }

    pub(crate) fn distance_unchecked(&self, x: &[f64]) -> f64 {
        match self {
            Constraint::Ball(b) => (dist(x, &b.center) - b.radius).max(0.0),
            Constraint::ExcludedBall(b) => (b.radius - dist(x, &b.center)).max(0.0),
            Constraint::Pair(p) => p.overlap_unchecked(x) / core::f64::consts::SQRT_2,
            Constraint::HalfSpace(h) => (h.offset - dot(&h.normal, x)).max(0.0),
        }
    }

    pub fn is_feasible(&self, x: &[f64]) -> Result<bool> {
        Ok(self.distance(x)? == 0.0)
    }

    /// Nearest feasible point.
    pub fn project(&self, x: &[f64]) -> Result<StateVector> {
        let mut y = x.to_vec();
        self.project_in_place(&mut y)?;
        Ok(StateVector::from_vec(y))
    }

    /// Projects `x` in place and returns the distance it moved.
    ///
    /// Feasible points are left bit-for-bit untouched.
    pub fn project_in_place(&self, x: &mut [f64]) -> Result<f64> {
        self.check_dim(x.len())?;
        self.project_unchecked(x)
    }

    pub(crate) fn project_unchecked(&self, x: &mut [f64]) -> Result<f64> {
        match self {
            Constraint::Ball(b) => {
                let r = dist(x, &b.center);
                if r <= b.radius {
                    return Ok(0.0);
                }
                let s = b.radius / r;
                for (xi, ci) in x.iter_mut().zip(&b.center) {
                    *xi = ci + s * (*xi - ci);
                }
                Ok(r - b.radius)
            }
            Constraint::ExcludedBall(b) => {
                let r = dist(x, &b.center);
                if r >= b.radius {
                    return Ok(0.0);
                }
                if r == 0.0 {
                    return Err(Error::AmbiguousProjection);
                }
                let s = b.radius / r;
                for (xi, ci) in x.iter_mut().zip(&b.center) {
                    *xi = ci + s * (*xi - ci);
                }
                Ok(b.radius - r)
            }
            Constraint::Pair(p) => project_pair(p, x),
            Constraint::HalfSpace(h) => {
                let gap = h.offset - dot(&h.normal, x);
                if gap <= 0.0 {
                    return Ok(0.0);
                }
                for (xi, ni) in x.iter_mut().zip(&h.normal) {
                    *xi += gap * ni;
                }
                Ok(gap)
            }
        }
    }

    /// `x − P(x)` for an infeasible `x`: a proximal normal to the set at the
    /// projection point, pointing away from the set.
    pub fn proximal_normal(&self, x: &[f64]) -> Result<StateVector> {
        let p = self.project(x)?;
        let v: Vec<f64> = x.iter().zip(p.iter()).map(|(a, b)| a - b).collect();
        if v.iter().all(|c| *c == 0.0) {
            return Err(Error::ZeroNormal);
        }
        Ok(StateVector::from_vec(v))
    }

    /// Deterministic tie-break for [`Error::AmbiguousProjection`]: shifts
    /// the offending coordinates by `shift` along the first axis.
    pub fn perturb_degenerate(&self, x: &mut [f64], shift: f64) {
        match self {
            Constraint::Pair(p) => x[p.j * p.dim] += shift,
            Constraint::ExcludedBall(_) => x[0] += shift,
            // convex sets never report ambiguity
            Constraint::Ball(_) | Constraint::HalfSpace(_) => {}
        }
    }
}

fn project_pair(p: &PairwiseDistance, x: &mut [f64]) -> Result<f64> {
    let (bi, bj) = (p.i * p.dim, p.j * p.dim);
    let r2 = p.separation_sq(x);
    let md2 = p.min_dist * p.min_dist;
    if r2 >= md2 {
        return Ok(0.0);
    }
    if r2 == 0.0 {
        return Err(Error::AmbiguousProjection);
    }
    let r = sqrt(r2);
    let half_gap = 0.5 * (p.min_dist - r);
    let s = half_gap / r;
    for k in 0..p.dim {
        let d = x[bj + k] - x[bi + k];
        x[bi + k] -= s * d;
        x[bj + k] += s * d;
    }
    Ok(half_gap * core::f64::consts::SQRT_2)
}
