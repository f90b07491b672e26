//! Intersections `S = S_1 ∩ … ∩ S_m` and Gauss-Seidel projection sweeps.
//!
//! A sweep is the iterated projection `P_{S_m} ∘ … ∘ P_{S_1}`, visiting the
//! constraints in exactly the stored order. Repeating sweeps until the
//! displacement drops below `abstol + ‖y‖·reltol` gives the projection
//! oracle used wherever `P_S` itself is needed.

mod calmness;

pub use calmness::{cluster_covers, feasible_point_disks, ClusterCover, FeasiblePoint, RepairBranch};

use alloc::vec::Vec;

use crate::geometry::{Constraint, StateVector};
use crate::linalg::{dist, norm};
use crate::{Error, Result};

/// Shift applied to break exact coincidences (see [`SweepWarning`]).
pub const DEGENERACY_SHIFT: f64 = 1e-9;

/// Default sweep cap for the repeated-sweep projection.
pub const DEFAULT_MAX_SWEEPS: usize = 100_000;

/// Ordered, non-empty collection of constraints on a common state space.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintSystem {
    constraints: Vec<Constraint>,
    dim: usize,
    prox_radius: f64,
}

impl ConstraintSystem {
    pub fn new(dim: usize, constraints: Vec<Constraint>) -> Result<Self> {
        if constraints.is_empty() {
            return Err(Error::invalid("constraint system needs at least one constraint"));
        }
        if dim == 0 {
            return Err(Error::invalid("state dimension must be positive"));
        }
        for c in &constraints {
            c.check_dim(dim)?;
        }
        let prox_radius = constraints
            .iter()
            .map(Constraint::prox_radius)
            .fold(f64::INFINITY, f64::min);
        Ok(ConstraintSystem {
            constraints,
            dim,
            prox_radius,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.constraints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.constraints.is_empty()
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    /// Smallest prox radius over the constraints.
    pub fn prox_radius_hint(&self) -> f64 {
        self.prox_radius
    }

    pub(crate) fn check_point(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: x.len(),
            });
        }
        Ok(())
    }

    /// `d_{S_j}(x)` for every constraint, in order.
    pub fn constraint_distances(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_point(x)?;
        Ok(self.constraints.iter().map(|c| c.distance_unchecked(x)).collect())
    }

    /// `max_j d_{S_j}(x)`.
    pub fn max_constraint_distance(&self, x: &[f64]) -> Result<f64> {
        self.check_point(x)?;
        Ok(self
            .constraints
            .iter()
            .map(|c| c.distance_unchecked(x))
            .fold(0.0, f64::max))
    }

    /// One Gauss-Seidel sweep with the full trace of intermediate points.
    pub fn sweep(&self, q0: &[f64]) -> Result<(StateVector, SweepTrace)> {
        self.check_point(q0)?;
        let m = self.constraints.len();
        let mut q = Vec::with_capacity(m + 1);
        let mut v = Vec::with_capacity(m);
        let mut distances = Vec::with_capacity(m);
        let mut warnings = Vec::new();
        let mut cur = q0.to_vec();
        q.push(StateVector::from_vec(cur.clone()));
        for (j, c) in self.constraints.iter().enumerate() {
            let prev = cur.clone();
            distances.push(c.distance_unchecked(&cur));
            if project_resolving(c, &mut cur)? {
                warnings.push(SweepWarning { constraint: j });
            }
            v.push(StateVector::from_vec(
                cur.iter().zip(&prev).map(|(a, b)| a - b).collect(),
            ));
            q.push(StateVector::from_vec(cur.clone()));
        }
        let out = StateVector::from_vec(cur);
        Ok((
            out,
            SweepTrace {
                q,
                v,
                distances,
                warnings,
            },
        ))
    }

    /// One sweep in place, without a trace. Returns the work spent (one
    /// unit per constraint evaluated) and the number of degenerate
    /// coincidences that had to be perturbed.
    pub fn sweep_in_place(&self, x: &mut [f64]) -> Result<SweepStats> {
        self.check_point(x)?;
        let mut perturbations = 0;
        for c in &self.constraints {
            if project_resolving(c, x)? {
                perturbations += 1;
            }
        }
        Ok(SweepStats {
            work: self.constraints.len(),
            perturbations,
        })
    }

    /// Repeated sweeps until `‖P^itr(y) − y‖ ≤ abstol + ‖y‖·reltol`;
    /// returns that `y`.
    pub fn project_exact(&self, q0: &[f64], abstol: f64, reltol: f64, max_sweeps: usize) -> Result<StateVector> {
        let mut y = q0.to_vec();
        self.repeat_sweeps(&mut y, abstol, reltol, max_sweeps)?;
        Ok(StateVector::from_vec(y))
    }

    /// Projection oracle with the tolerances bundled.
    pub fn project_with(&self, q0: &[f64], tol: &OracleTolerances) -> Result<StateVector> {
        self.project_exact(q0, tol.abstol, tol.reltol, tol.max_sweeps)
    }

    /// In-place form of [`ConstraintSystem::project_exact`]; returns the
    /// work spent including the final checking sweep.
    pub fn repeat_sweeps(&self, y: &mut Vec<f64>, abstol: f64, reltol: f64, max_sweeps: usize) -> Result<usize> {
        if !(abstol > 0.0 && reltol > 0.0) {
            return Err(Error::invalid("abstol and reltol must be positive"));
        }
        self.check_point(y)?;
        let mut z = y.clone();
        let mut work = 0;
        let mut residual = f64::INFINITY;
        for _ in 0..max_sweeps {
            z.copy_from_slice(y);
            work += self.sweep_in_place(&mut z)?.work;
            residual = dist(&z, y);
            if residual <= abstol + norm(y) * reltol {
                return Ok(work);
            }
            core::mem::swap(y, &mut z);
        }
        Err(Error::NoConvergence {
            sweeps: max_sweeps,
            residual,
            last: StateVector::from_vec(y.clone()),
        })
    }

    /// Oracle distance `d_S(x) ≈ ‖x − P_S(x)‖`.
    pub fn distance_to_intersection(&self, x: &[f64], tol: &OracleTolerances) -> Result<f64> {
        if self.max_constraint_distance(x)? == 0.0 {
            return Ok(0.0);
        }
        let p = self.project_with(x, tol)?;
        Ok(dist(x, &p))
    }

    /// Metric-calmness ratio `max_j d_{S_j}(x) / d_S(x)`.
    ///
    /// `d_S` comes from the oracle. Since `d_S ≥ max_j d_{S_j}` holds for
    /// the true distance, the oracle value is floored at `max_j d_{S_j}`
    /// and the ratio is capped at one.
    pub fn calmness_ratio(&self, x: &[f64], tol: &OracleTolerances) -> Result<f64> {
        let max_local = self.max_constraint_distance(x)?;
        if max_local == 0.0 {
            return Err(Error::FeasibleInput);
        }
        let p = self.project_with(x, tol)?;
        let d_s = dist(x, &p).max(max_local);
        Ok(max_local / d_s)
    }
}

/// Projects onto `c`, resolving an exact coincidence by the fixed
/// perturbation. Returns whether a perturbation happened.
fn project_resolving(c: &Constraint, x: &mut [f64]) -> Result<bool> {
    match c.project_unchecked(x) {
        Ok(_) => Ok(false),
        Err(Error::AmbiguousProjection) => {
            c.perturb_degenerate(x, DEGENERACY_SHIFT);
            c.project_unchecked(x)?;
            Ok(true)
        }
        Err(e) => Err(e),
    }
}

/// Tolerances of the repeated-sweep projection oracle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleTolerances {
    pub abstol: f64,
    pub reltol: f64,
    pub max_sweeps: usize,
}

impl OracleTolerances {
    pub const fn new(abstol: f64, reltol: f64) -> Self {
        OracleTolerances {
            abstol,
            reltol,
            max_sweeps: DEFAULT_MAX_SWEEPS,
        }
    }

    /// Tolerances of the reference solutions: `abstol = 1e−12`,
    /// `reltol = 1e−10`.
    pub const fn reference() -> Self {
        Self::new(1e-12, 1e-10)
    }

    /// Tight tolerances for verification checks.
    pub const fn tight() -> Self {
        Self::new(1e-12, 1e-12)
    }
}

impl Default for OracleTolerances {
    fn default() -> Self {
        Self::reference()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SweepStats {
    pub work: usize,
    pub perturbations: usize,
}

/// A degenerate coincidence met during a sweep and broken by shifting the
/// state by [`DEGENERACY_SHIFT`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SweepWarning {
    pub constraint: usize,
}

/// Intermediate points `q_0 … q_m`, increments `v_j = q_j − q_{j−1}` and
/// the distances `d_{S_j}(q_{j−1})` seen by each projection.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepTrace {
    pub q: Vec<StateVector>,
    pub v: Vec<StateVector>,
    pub distances: Vec<f64>,
    pub warnings: Vec<SweepWarning>,
}
