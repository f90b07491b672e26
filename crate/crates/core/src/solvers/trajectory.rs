use alloc::vec::Vec;

use super::SchemeSpec;
use crate::geometry::StateVector;
use crate::intersection::{ConstraintSystem, OracleTolerances};
use crate::linalg::dist;
use crate::{Error, Result};

/// Discrete solution on the uniform grid `t_k = k h`, read as the
/// piecewise-linear interpolant through its nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    scheme: SchemeSpec,
    h: f64,
    times: Vec<f64>,
    states: Vec<StateVector>,
    work: Vec<usize>,
}

impl Trajectory {
    pub(crate) fn from_parts(scheme: SchemeSpec, h: f64, times: Vec<f64>, states: Vec<StateVector>, work: Vec<usize>) -> Self {
        debug_assert_eq!(times.len(), states.len());
        debug_assert_eq!(work.len() + 1, states.len());
        Trajectory {
            scheme,
            h,
            times,
            states,
            work,
        }
    }

    pub fn scheme(&self) -> &SchemeSpec {
        &self.scheme
    }

    pub fn step_size(&self) -> f64 {
        self.h
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn states(&self) -> &[StateVector] {
        &self.states
    }

    /// Work per step (constraint evaluations).
    pub fn work(&self) -> &[usize] {
        &self.work
    }

    pub fn steps(&self) -> usize {
        self.work.len()
    }

    pub fn final_time(&self) -> f64 {
        *self.times.last().expect("trajectory has at least one node")
    }

    pub fn final_state(&self) -> &StateVector {
        self.states.last().expect("trajectory has at least one node")
    }

    pub fn avg_work(&self) -> f64 {
        if self.work.is_empty() {
            return 0.0;
        }
        self.work.iter().sum::<usize>() as f64 / self.work.len() as f64
    }

    /// Value of the piecewise-linear interpolant at `t ∈ [0, T]`; nodes are
    /// returned exactly.
    pub fn interpolate(&self, t: f64) -> Result<StateVector> {
        let t_end = self.final_time();
        if !(0.0..=t_end).contains(&t) {
            return Err(Error::OutOfRange { t, t_end });
        }
        let n = self.steps();
        let k = libm::floor(t / self.h) as usize;
        let k = k.min(n - 1);
        // the grid is t_k = k·T/n; step back if rounding put t before t_k
        let k = if t < self.times[k] {
            k.saturating_sub(1)
        } else if t > self.times[k + 1] {
            (k + 1).min(n - 1)
        } else {
            k
        };
        if t == self.times[k] {
            return Ok(self.states[k].clone());
        }
        if t == self.times[k + 1] {
            return Ok(self.states[k + 1].clone());
        }
        let theta = (t - self.times[k]) / self.h;
        let (a, b) = (&self.states[k], &self.states[k + 1]);
        Ok(StateVector::from_vec(
            a.iter().zip(b.iter()).map(|(x, y)| (1.0 - theta) * x + theta * y).collect(),
        ))
    }

    /// `max_k ‖x_{k+1} − x_k‖ / h`: the per-step displacement rate in the
    /// stability estimate `‖Φ_h(x_k) − x_k‖ ≤ h (A + B ‖x_k‖)`.
    pub fn max_step_rate(&self) -> f64 {
        self.states
            .windows(2)
            .map(|w| dist(&w[0], &w[1]) / self.h)
            .fold(0.0, f64::max)
    }

    /// `max_k d_S(x_k) / h` with `d_S` from the projection oracle: the
    /// constant of the bounded-constraint-violation estimate `d_S < K h`.
    pub fn violation_rate(&self, sys: &ConstraintSystem, tol: &OracleTolerances) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for x in &self.states {
            worst = worst.max(sys.distance_to_intersection(x, tol)?);
        }
        Ok(worst / self.h)
    }
}
