use alloc::string::String;
use core::fmt;
use core::str::FromStr;

use crate::{Error, Result};

/// Time-stepping scheme and its numerical parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SchemeSpec {
    /// Position-based dynamics: drift step, then exactly one sweep.
    Pbd,
    /// Drift step, then the repeated-sweep projection onto `S`.
    MoreauEuler { abstol: f64, reltol: f64 },
    /// Projected nonlinear Gauss-Seidel: sweeps until the stopping
    /// criterion holds.
    Pngs { abstol: f64, reltol: f64 },
    /// Projected Gauss-Seidel on half-space linearizations taken at the
    /// drift point.
    Pgs { abstol: f64, reltol: f64 },
    /// Explicit Euler on the penalized ODE with stiffness `gamma`.
    Penalty { gamma: f64 },
}

impl SchemeSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            SchemeSpec::Pbd => Ok(()),
            SchemeSpec::MoreauEuler { abstol, reltol }
            | SchemeSpec::Pngs { abstol, reltol }
            | SchemeSpec::Pgs { abstol, reltol } => {
                if abstol > 0.0 && reltol > 0.0 && abstol.is_finite() && reltol.is_finite() {
                    Ok(())
                } else {
                    Err(Error::invalid("scheme tolerances must be positive and finite"))
                }
            }
            SchemeSpec::Penalty { gamma } => {
                if gamma > 0.0 && gamma.is_finite() {
                    Ok(())
                } else {
                    Err(Error::invalid("penalty parameter must be positive and finite"))
                }
            }
        }
    }

    /// Short name without parameters.
    pub fn name(&self) -> &'static str {
        match self {
            SchemeSpec::Pbd => "pbd",
            SchemeSpec::MoreauEuler { .. } => "moreau",
            SchemeSpec::Pngs { .. } => "pngs",
            SchemeSpec::Pgs { .. } => "pgs",
            SchemeSpec::Penalty { .. } => "penalty",
        }
    }

    /// Whether the scheme projects onto the constraint sets.
    pub fn is_projection(&self) -> bool {
        !matches!(self, SchemeSpec::Penalty { .. })
    }
}

/// Compact label such as `pbd`, `pngs:abstol=1e-8:reltol=1e-6` or
/// `penalty:gamma=10`. Floats use the shortest round-trip form, so the
/// label parses back to the same scheme.
impl fmt::Display for SchemeSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            SchemeSpec::Pbd => f.write_str("pbd"),
            SchemeSpec::MoreauEuler { abstol, reltol }
            | SchemeSpec::Pngs { abstol, reltol }
            | SchemeSpec::Pgs { abstol, reltol } => {
                write!(f, "{}:abstol={:?}:reltol={:?}", self.name(), abstol, reltol)
            }
            SchemeSpec::Penalty { gamma } => write!(f, "penalty:gamma={gamma:?}"),
        }
    }
}

impl FromStr for SchemeSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut parts = s.trim().split(':');
        let name = parts.next().unwrap_or_default();
        let mut abstol = None;
        let mut reltol = None;
        let mut gamma = None;
        for kv in parts {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| Error::InvalidParameter(alloc::format!("malformed scheme parameter '{kv}'")))?;
            let v: f64 = v
                .parse()
                .map_err(|_| Error::InvalidParameter(alloc::format!("bad number in scheme parameter '{kv}'")))?;
            match k {
                "abstol" => abstol = Some(v),
                "reltol" => reltol = Some(v),
                "gamma" => gamma = Some(v),
                _ => return Err(Error::InvalidParameter(alloc::format!("unknown scheme parameter '{k}'"))),
            }
        }
        let tol = |a: Option<f64>, r: Option<f64>| -> Result<(f64, f64)> {
            match (a, r) {
                (Some(a), Some(r)) => Ok((a, r)),
                _ => Err(Error::invalid("scheme needs abstol and reltol")),
            }
        };
        let scheme = match name {
            "pbd" => SchemeSpec::Pbd,
            "moreau" => {
                let (abstol, reltol) = tol(abstol, reltol)?;
                SchemeSpec::MoreauEuler { abstol, reltol }
            }
            "pngs" => {
                let (abstol, reltol) = tol(abstol, reltol)?;
                SchemeSpec::Pngs { abstol, reltol }
            }
            "pgs" => {
                let (abstol, reltol) = tol(abstol, reltol)?;
                SchemeSpec::Pgs { abstol, reltol }
            }
            "penalty" => SchemeSpec::Penalty {
                gamma: gamma.ok_or_else(|| Error::invalid("penalty scheme needs gamma"))?,
            },
            other => {
                let mut msg = String::from("unknown scheme '");
                msg.push_str(other);
                msg.push('\'');
                return Err(Error::InvalidParameter(msg));
            }
        };
        scheme.validate()?;
        Ok(scheme)
    }
}
