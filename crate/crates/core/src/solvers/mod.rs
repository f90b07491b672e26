//! Time-stepping schemes for `ẋ ∈ f(x) − N(S, x)` and fixed-step
//! integration.
//!
//! Every scheme starts with the explicit drift `y = x + h f(x)` and then
//! deals with the constraints:
//!
//! | scheme  | constraint handling                                         |
//! |---------|-------------------------------------------------------------|
//! | PBD     | exactly one Gauss-Seidel sweep                              |
//! | Moreau  | repeated sweeps (projection oracle)                         |
//! | PNGS    | repeated sweeps until `‖P^itr(y) − y‖ ≤ abstol + ‖y‖ reltol` |
//! | PGS     | repeated sweeps over half-space linearizations at `y`      |
//! | penalty | explicit Euler with the force `−γ Σ_j d_{S_j} ∇d_{S_j}`     |
//!
//! Work is counted in constraint evaluations: a sweep over `m`
//! constraints costs `m`, one linearization costs one per constraint, and a
//! penalty step costs `m`.

mod field;
mod scheme;
mod trajectory;

pub use field::{ConstantField, FnField, LinearAttraction, VectorField, ZeroField};
pub use scheme::SchemeSpec;
pub use trajectory::Trajectory;

use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;

use crate::geometry::StateVector;
use crate::intersection::{ConstraintSystem, DEFAULT_MAX_SWEEPS};
use crate::linalg::{axpy, dist, dot, norm};
use crate::{Error, Result};

/// States with a norm above this are reported as [`Error::Diverged`].
pub const DIVERGENCE_NORM: f64 = 1e6;

/// Feasibility tolerance for initial states of [`integrate`].
pub const INITIAL_FEASIBILITY_TOL: f64 = 1e-10;

/// Reusable buffers for stepping.
#[derive(Debug, Default, Clone)]
pub struct Workspace {
    fx: Vec<f64>,
    tmp: Vec<f64>,
    planes: Vec<(Vec<f64>, f64)>,
    max_sweeps: usize,
}

impl Workspace {
    pub fn new() -> Self {
        Workspace {
            max_sweeps: DEFAULT_MAX_SWEEPS,
            ..Default::default()
        }
    }

    pub fn with_max_sweeps(max_sweeps: usize) -> Self {
        Workspace {
            max_sweeps,
            ..Default::default()
        }
    }
}

fn check_step(sys: &ConstraintSystem, h: f64, x: &[f64]) -> Result<()> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::invalid("step size must be positive and finite"));
    }
    sys.check_point(x)
}

/// `out = x + h f(x)`
fn drift(f: &dyn VectorField, h: f64, x: &[f64], ws: &mut Workspace, out: &mut Vec<f64>) {
    ws.fx.resize(x.len(), 0.0);
    f.eval(x, &mut ws.fx);
    out.clear();
    out.extend_from_slice(x);
    axpy(h, &ws.fx, out);
}

/// Advances `x` by one step of `scheme`, writing the new state to `out`.
/// Returns the work spent.
pub fn step_into(
    scheme: &SchemeSpec,
    sys: &ConstraintSystem,
    f: &dyn VectorField,
    h: f64,
    x: &[f64],
    out: &mut Vec<f64>,
    ws: &mut Workspace,
) -> Result<usize> {
    check_step(sys, h, x)?;
    if ws.max_sweeps == 0 {
        ws.max_sweeps = DEFAULT_MAX_SWEEPS;
    }
    match *scheme {
        SchemeSpec::Pbd => {
            drift(f, h, x, ws, out);
            Ok(sys.sweep_in_place(out)?.work)
        }
        SchemeSpec::MoreauEuler { abstol, reltol } | SchemeSpec::Pngs { abstol, reltol } => {
            drift(f, h, x, ws, out);
            sys.repeat_sweeps(out, abstol, reltol, ws.max_sweeps)
        }
        SchemeSpec::Pgs { abstol, reltol } => {
            drift(f, h, x, ws, out);
            pgs_iterate(sys, out, abstol, reltol, ws)
        }
        SchemeSpec::Penalty { gamma } => {
            penalty_step(sys, f, h, gamma, x, out, ws);
            Ok(sys.len())
        }
    }
}

/// One step of `scheme`.
pub fn step(
    scheme: &SchemeSpec,
    sys: &ConstraintSystem,
    f: &dyn VectorField,
    h: f64,
    x: &[f64],
) -> Result<(StateVector, usize)> {
    scheme.validate()?;
    let mut out = Vec::with_capacity(x.len());
    let work = step_into(scheme, sys, f, h, x, &mut out, &mut Workspace::new())?;
    Ok((StateVector::from_vec(out), work))
}

/// `P_{S_m} ∘ … ∘ P_{S_1}(x + h f(x))`.
pub fn step_pbd(sys: &ConstraintSystem, f: &dyn VectorField, h: f64, x: &[f64]) -> Result<(StateVector, usize)> {
    step(&SchemeSpec::Pbd, sys, f, h, x)
}

/// `P_S(x + h f(x))` with `P_S` from the repeated-sweep oracle.
pub fn step_moreau(
    sys: &ConstraintSystem,
    f: &dyn VectorField,
    h: f64,
    x: &[f64],
    abstol: f64,
    reltol: f64,
) -> Result<(StateVector, usize)> {
    step(&SchemeSpec::MoreauEuler { abstol, reltol }, sys, f, h, x)
}

/// `(P^itr)^{k*}(x + h f(x))` with `k*` from the stopping criterion.
pub fn step_pngs(
    sys: &ConstraintSystem,
    f: &dyn VectorField,
    h: f64,
    x: &[f64],
    abstol: f64,
    reltol: f64,
) -> Result<(StateVector, usize)> {
    step(&SchemeSpec::Pngs { abstol, reltol }, sys, f, h, x)
}

/// Projected Gauss-Seidel on the linearized constraints.
pub fn step_pgs(
    sys: &ConstraintSystem,
    f: &dyn VectorField,
    h: f64,
    x: &[f64],
    abstol: f64,
    reltol: f64,
) -> Result<(StateVector, usize)> {
    step(&SchemeSpec::Pgs { abstol, reltol }, sys, f, h, x)
}

/// Explicit Euler step of the penalized ODE.
pub fn step_penalty(sys: &ConstraintSystem, f: &dyn VectorField, h: f64, x: &[f64], gamma: f64) -> Result<(StateVector, usize)> {
    step(&SchemeSpec::Penalty { gamma }, sys, f, h, x)
}

/// Projects a copy of `x` onto constraint `c`, breaking exact coincidences
/// the same way sweeps do. Returns `x' − P(x')` where `x'` is the
/// (possibly perturbed) copy.
fn proximal_offset(c: &crate::geometry::Constraint, x: &[f64], tmp: &mut Vec<f64>) -> Result<Vec<f64>> {
    tmp.clear();
    tmp.extend_from_slice(x);
    let mut shifted = None;
    if let Err(Error::AmbiguousProjection) = c.project_unchecked(tmp) {
        tmp.copy_from_slice(x);
        c.perturb_degenerate(tmp, crate::intersection::DEGENERACY_SHIFT);
        shifted = Some(tmp.clone());
        c.project_unchecked(tmp)?;
    }
    let base = shifted.as_deref().unwrap_or(x);
    Ok(base.iter().zip(tmp.iter()).map(|(a, b)| a - b).collect())
}

fn pgs_iterate(sys: &ConstraintSystem, y: &mut Vec<f64>, abstol: f64, reltol: f64, ws: &mut Workspace) -> Result<usize> {
    // Linearize every violated constraint at the drift point: the plane
    // through P_j(y) with normal (y − P_j(y))/d_j, feasible side away from y.
    ws.planes.clear();
    let mut work = sys.len();
    for c in sys.constraints() {
        if c.distance_unchecked(y) == 0.0 {
            continue;
        }
        let mut n = proximal_offset(c, y, &mut ws.tmp)?;
        let len = norm(&n);
        if len == 0.0 {
            continue;
        }
        n.iter_mut().for_each(|v| *v /= len);
        let bound = dot(&n, y) - len;
        ws.planes.push((n, bound));
    }
    if ws.planes.is_empty() {
        return Ok(work);
    }
    let mut z = y.clone();
    let mut residual = f64::INFINITY;
    for _ in 0..ws.max_sweeps {
        z.copy_from_slice(y);
        for (n, bound) in &ws.planes {
            let excess = dot(n, &z) - bound;
            if excess > 0.0 {
                axpy(-excess, n, &mut z);
            }
        }
        work += ws.planes.len();
        residual = dist(&z, y);
        if residual <= abstol + norm(y) * reltol {
            return Ok(work);
        }
        core::mem::swap(y, &mut z);
    }
    Err(Error::NoConvergence {
        sweeps: ws.max_sweeps,
        residual,
        last: StateVector::from_vec(y.clone()),
    })
}

fn penalty_step(
    sys: &ConstraintSystem,
    f: &dyn VectorField,
    h: f64,
    gamma: f64,
    x: &[f64],
    out: &mut Vec<f64>,
    ws: &mut Workspace,
) {
    drift(f, h, x, ws, out);
    for c in sys.constraints() {
        if c.distance_unchecked(x) == 0.0 {
            continue;
        }
        // d_j ∇d_j = x − P_j(x)
        if let Ok(offset) = proximal_offset(c, x, &mut ws.tmp) {
            axpy(-h * gamma, &offset, out);
        }
    }
}

/// Runs `n` steps of size `h = t_end / n` from the feasible state `x0`.
pub fn integrate(
    scheme: &SchemeSpec,
    sys: &ConstraintSystem,
    f: &dyn VectorField,
    x0: &[f64],
    t_end: f64,
    n: usize,
) -> Result<Trajectory> {
    integrate_with(scheme, sys, f, x0, t_end, n, &mut Workspace::new())
}

pub fn integrate_with(
    scheme: &SchemeSpec,
    sys: &ConstraintSystem,
    f: &dyn VectorField,
    x0: &[f64],
    t_end: f64,
    n: usize,
    ws: &mut Workspace,
) -> Result<Trajectory> {
    scheme.validate()?;
    if n == 0 {
        return Err(Error::invalid("number of steps must be positive"));
    }
    if !(t_end > 0.0 && t_end.is_finite()) {
        return Err(Error::invalid("final time must be positive and finite"));
    }
    let x0 = StateVector::new(x0.to_vec())?;
    if sys.max_constraint_distance(&x0)? > INITIAL_FEASIBILITY_TOL {
        return Err(Error::invalid("initial state is not feasible"));
    }
    let h = t_end / n as f64;
    let mut states = Vec::with_capacity(n + 1);
    let mut work = Vec::with_capacity(n);
    let mut cur = x0.clone().into_vec();
    let mut next = vec![0.0; cur.len()];
    states.push(x0);
    for k in 0..n {
        let w = step_into(scheme, sys, f, h, &cur, &mut next, ws).map_err(|e| Error::StepFailed {
            step: k + 1,
            source: Box::new(e),
        })?;
        let nrm = norm(&next);
        if !nrm.is_finite() || nrm > DIVERGENCE_NORM {
            return Err(Error::Diverged { step: k + 1, norm: nrm });
        }
        core::mem::swap(&mut cur, &mut next);
        states.push(StateVector::from_vec(cur.clone()));
        work.push(w);
    }
    let mut times: Vec<f64> = (0..=n).map(|k| k as f64 * t_end / n as f64).collect();
    times[n] = t_end;
    Ok(Trajectory::from_parts(*scheme, h, times, states, work))
}

#[cfg(test)]
mod tests;
