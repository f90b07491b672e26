//! Error measurement and convergence-order fitting.

use alloc::string::String;
use core::fmt;
use core::str::FromStr;

use crate::geometry::StateVector;
use crate::linalg::dist;
use crate::solvers::{SchemeSpec, Trajectory};
use crate::{Error, Result};

/// Uniform samples per trajectory segment used by the studies.
pub const DEFAULT_SAMPLES_PER_SEGMENT: usize = 10;

/// Outcome of one integration in a study.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RunStatus {
    Ok,
    /// State norm exceeded the divergence threshold.
    Diverged,
    /// Any other solver error.
    Failed,
}

impl RunStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            RunStatus::Ok => "ok",
            RunStatus::Diverged => "diverged",
            RunStatus::Failed => "failed",
        }
    }
}

impl fmt::Display for RunStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RunStatus {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ok" => Ok(RunStatus::Ok),
            "diverged" => Ok(RunStatus::Diverged),
            "failed" => Ok(RunStatus::Failed),
            _ => {
                let mut msg = String::from("unknown run status '");
                msg.push_str(s);
                msg.push('\'');
                Err(Error::InvalidParameter(msg))
            }
        }
    }
}

/// One `(scheme, h)` measurement.
///
/// Runs that did not finish carry `sup_error = +∞` and `avg_work = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorRecord {
    pub scheme: SchemeSpec,
    pub h: f64,
    pub sup_error: f64,
    pub avg_work: f64,
    pub wall_time_s: f64,
    pub status: RunStatus,
}

impl ErrorRecord {
    /// Whether the record can enter an order fit.
    pub fn is_valid(&self) -> bool {
        self.status == RunStatus::Ok && self.sup_error.is_finite() && self.sup_error > 0.0 && self.h > 0.0
    }
}

/// `sup_t ‖x_h(t) − x(t)‖` over the trajectory nodes and a uniform
/// subdivision of every segment into `per_segment` parts.
pub fn sup_error_per_segment<F>(traj: &Trajectory, mut truth: F, per_segment: usize) -> Result<f64>
where
    F: FnMut(f64) -> Result<StateVector>,
{
    let s = per_segment.max(1);
    let times = traj.times();
    let states = traj.states();
    let mut worst: f64 = 0.0;
    for k in 0..traj.steps() {
        let (t0, t1) = (times[k], times[k + 1]);
        for i in 0..s {
            let theta = i as f64 / s as f64;
            let t = t0 + theta * (t1 - t0);
            let x = if i == 0 {
                states[k].clone()
            } else {
                traj.interpolate(t)?
            };
            worst = worst.max(dist(&x, &truth(t)?));
        }
    }
    let last = traj.final_time();
    worst = worst.max(dist(traj.final_state(), &truth(last)?));
    Ok(worst)
}

/// Sup-norm error on a grid of at least `n_samples` points that contains
/// every node. Each segment is split into a power-of-two number of parts, so
/// doubling `n_samples` refines the grid and never lowers the result.
pub fn sup_error<F>(traj: &Trajectory, truth: F, n_samples: usize) -> Result<f64>
where
    F: FnMut(f64) -> Result<StateVector>,
{
    let segs = traj.steps();
    if n_samples < segs + 1 {
        return Err(Error::InsufficientData {
            needed: segs + 1,
            found: n_samples,
        });
    }
    let per = (n_samples - 1).div_ceil(segs).max(1);
    sup_error_per_segment(traj, truth, per.next_power_of_two())
}

/// Least-squares slope of `log(sup_error)` against `log(h)`.
///
/// Records that did not finish or have zero error are skipped; at least
/// three valid records with distinct `h` are required, all for one scheme.
pub fn fit_order(records: &[ErrorRecord]) -> Result<f64> {
    let mut scheme: Option<SchemeSpec> = None;
    for r in records {
        match scheme {
            None => scheme = Some(r.scheme),
            Some(s) if s != r.scheme => return Err(Error::invalid("fit_order needs records from a single scheme")),
            _ => {}
        }
    }
    let valid = || records.iter().filter(|r| r.is_valid());
    let n = valid().count();
    let mut distinct = 0;
    for (i, r) in valid().enumerate() {
        if valid().take(i).all(|q| q.h != r.h) {
            distinct += 1;
        }
    }
    if distinct < 3 {
        return Err(Error::InsufficientData { needed: 3, found: distinct });
    }
    let nf = n as f64;
    let mx = valid().map(|r| libm::log(r.h)).sum::<f64>() / nf;
    let my = valid().map(|r| libm::log(r.sup_error)).sum::<f64>() / nf;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for r in valid() {
        let dx = libm::log(r.h) - mx;
        sxy += dx * (libm::log(r.sup_error) - my);
        sxx += dx * dx;
    }
    Ok(sxy / sxx)
}
