//! Convergence studies: one integration per `(scheme, n)` cell, measured
//! against the closed form or a fine PNGS reference.

use std::path::{Path, PathBuf};
use std::time::Instant;

use proxflow_core::bench::{fit_order, sup_error_per_segment, ErrorRecord, RunStatus, DEFAULT_SAMPLES_PER_SEGMENT};
use proxflow_core::intersection::OracleTolerances;
use proxflow_core::problems::Problem;
use proxflow_core::solvers::integrate;
use proxflow_core::{Error as CoreError, SchemeSpec, Trajectory};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{AppError, Result};
use crate::io::{self, ProblemDoc};

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "PROXFLOW_THREADS";

/// Default reference step count, `h_ref = T / 2^16`.
pub const DEFAULT_REFERENCE_STEPS: usize = 1 << 16;

/// Source of the "true" solution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReferenceKind {
    /// Closed form of the sliding problem.
    Analytic,
    /// Fine-step PNGS at `abstol = 1e−12`, `reltol = 1e−10`.
    PngsReference,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    pub abstol: f64,
    pub reltol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            abstol: 1e-8,
            reltol: 1e-6,
        }
    }
}

/// Problem given inline or as a path to a problem document (relative to
/// the study file).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ProblemRef {
    Inline(ProblemDoc),
    File(PathBuf),
}

/// Study document as read from JSON.
///
/// Scheme entries are full labels (`pngs:abstol=1e-8:reltol=1e-6`) or bare
/// names. Bare `moreau`, `pngs` and `pgs` take `tolerances`; bare `penalty`
/// expands to one scheme per entry of `gamma`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudyDoc {
    pub problem: ProblemRef,
    pub schemes: Vec<String>,
    pub step_counts: Vec<usize>,
    #[serde(rename = "T")]
    pub t_end: f64,
    pub reference: ReferenceKind,
    #[serde(default)]
    pub tolerances: Option<Tolerances>,
    #[serde(default)]
    pub gamma: Vec<f64>,
    #[serde(default)]
    pub reference_steps: Option<usize>,
}

impl StudyDoc {
    pub fn read(path: &Path) -> Result<StudyDoc> {
        io::read_json(path)
    }

    /// Resolves and validates the study; `base` anchors relative problem
    /// paths.
    pub fn into_spec(self, base: &Path) -> Result<StudySpec> {
        let problem = match &self.problem {
            ProblemRef::Inline(doc) => doc.to_problem()?,
            ProblemRef::File(p) => io::read_problem(&base.join(p))?,
        };
        let tol = self.tolerances.unwrap_or_default();
        let mut schemes = Vec::new();
        for entry in &self.schemes {
            match entry.as_str() {
                "moreau" => schemes.push(SchemeSpec::MoreauEuler {
                    abstol: tol.abstol,
                    reltol: tol.reltol,
                }),
                "pngs" => schemes.push(SchemeSpec::Pngs {
                    abstol: tol.abstol,
                    reltol: tol.reltol,
                }),
                "pgs" => schemes.push(SchemeSpec::Pgs {
                    abstol: tol.abstol,
                    reltol: tol.reltol,
                }),
                "penalty" => {
                    if self.gamma.is_empty() {
                        return Err(AppError::invalid("scheme 'penalty' needs a non-empty gamma list"));
                    }
                    schemes.extend(self.gamma.iter().map(|&gamma| SchemeSpec::Penalty { gamma }));
                }
                label => schemes.push(label.parse()?),
            }
        }
        let reference = match self.reference {
            ReferenceKind::Analytic => Reference::Analytic,
            ReferenceKind::PngsReference => Reference::Pngs {
                steps: self.reference_steps.unwrap_or(DEFAULT_REFERENCE_STEPS),
            },
        };
        StudySpec::new(problem, schemes, self.step_counts, self.t_end, reference)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Reference {
    Analytic,
    Pngs { steps: usize },
}

/// Validated study.
#[derive(Debug, Clone, PartialEq)]
pub struct StudySpec {
    problem: Problem,
    schemes: Vec<SchemeSpec>,
    step_counts: Vec<usize>,
    t_end: f64,
    reference: Reference,
}

impl StudySpec {
    pub fn new(
        problem: Problem,
        schemes: Vec<SchemeSpec>,
        step_counts: Vec<usize>,
        t_end: f64,
        reference: Reference,
    ) -> Result<Self> {
        if schemes.is_empty() {
            return Err(AppError::invalid("study needs at least one scheme"));
        }
        for (i, s) in schemes.iter().enumerate() {
            s.validate()?;
            if schemes[..i].contains(s) {
                return Err(AppError::invalid(format!("scheme {s} listed twice")));
            }
        }
        if step_counts.is_empty() {
            return Err(AppError::invalid("study needs at least one step count"));
        }
        if step_counts[0] == 0 || step_counts.windows(2).any(|w| w[0] >= w[1]) {
            return Err(AppError::invalid("step counts must be positive and strictly increasing"));
        }
        if !(t_end > 0.0 && t_end.is_finite()) {
            return Err(AppError::invalid("T must be positive and finite"));
        }
        match (reference, &problem) {
            (Reference::Analytic, Problem::Disks(_)) => {
                return Err(AppError::invalid("analytic reference is only available for the sliding problem"))
            }
            (Reference::Pngs { steps }, _) if (steps as f64) < 1e4 => {
                return Err(AppError::invalid("reference_steps must be at least 10^4"))
            }
            _ => {}
        }
        Ok(StudySpec {
            problem,
            schemes,
            step_counts,
            t_end,
            reference,
        })
    }

    pub fn problem(&self) -> &Problem {
        &self.problem
    }

    pub fn schemes(&self) -> &[SchemeSpec] {
        &self.schemes
    }

    pub fn step_counts(&self) -> &[usize] {
        &self.step_counts
    }

    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    pub fn reference(&self) -> Reference {
        self.reference
    }
}

/// Fitted order of one scheme; `None` when fewer than three runs finished.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FittedOrder {
    pub scheme: String,
    pub order: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyResult {
    /// One record per `(scheme, n)`, schemes in spec order, `n` ascending.
    pub records: Vec<ErrorRecord>,
    pub orders: Vec<FittedOrder>,
}

/// Thread cap from [`THREADS_ENV`], if set to a positive integer.
pub fn thread_cap() -> Option<usize> {
    std::env::var(THREADS_ENV).ok()?.trim().parse().ok().filter(|&n| n > 0)
}

/// Runs every cell of the study. Cells run in parallel; results do not
/// depend on scheduling.
pub fn run_study(spec: &StudySpec) -> Result<StudyResult> {
    match thread_cap() {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| AppError::invalid(format!("cannot start worker threads: {e}")))?;
            pool.install(|| run_cells(spec))
        }
        None => run_cells(spec),
    }
}

enum Truth {
    Analytic(proxflow_core::problems::SlidingProblem),
    Reference(Trajectory),
}

fn run_cells(spec: &StudySpec) -> Result<StudyResult> {
    let truth = match (spec.reference, &spec.problem) {
        (Reference::Analytic, Problem::Sliding(p)) => Truth::Analytic(*p),
        (Reference::Pngs { steps }, p) => {
            let tol = OracleTolerances::reference();
            let scheme = SchemeSpec::Pngs {
                abstol: tol.abstol,
                reltol: tol.reltol,
            };
            let field = p.field();
            Truth::Reference(integrate(&scheme, &p.system(), &field, &p.x0(), spec.t_end, steps)?)
        }
        (Reference::Analytic, Problem::Disks(_)) => unreachable!("rejected by StudySpec::new"),
    };
    let sys = spec.problem.system();
    let field = spec.problem.field();
    let x0 = spec.problem.x0();
    let cells: Vec<(SchemeSpec, usize)> = spec
        .schemes
        .iter()
        .flat_map(|s| spec.step_counts.iter().map(move |&n| (*s, n)))
        .collect();
    let records: Vec<ErrorRecord> = cells
        .par_iter()
        .map(|&(scheme, n)| {
            let h = spec.t_end / n as f64;
            let start = Instant::now();
            let run = integrate(&scheme, &sys, &field, &x0, spec.t_end, n).and_then(|tr| {
                let err = match &truth {
                    Truth::Analytic(p) => sup_error_per_segment(&tr, |t| p.exact(t), DEFAULT_SAMPLES_PER_SEGMENT),
                    Truth::Reference(r) => {
                        sup_error_per_segment(&tr, |t| r.interpolate(t.min(r.final_time())), DEFAULT_SAMPLES_PER_SEGMENT)
                    }
                }?;
                Ok((err, tr.avg_work()))
            });
            let wall_time_s = start.elapsed().as_secs_f64();
            let (sup_error, avg_work, status) = match run {
                Ok((e, w)) if e.is_finite() => (e, w, RunStatus::Ok),
                Ok((_, w)) => (f64::INFINITY, w, RunStatus::Diverged),
                Err(CoreError::Diverged { .. }) => (f64::INFINITY, 0.0, RunStatus::Diverged),
                Err(_) => (f64::INFINITY, 0.0, RunStatus::Failed),
            };
            ErrorRecord {
                scheme,
                h,
                sup_error,
                avg_work,
                wall_time_s,
                status,
            }
        })
        .collect();
    let orders = spec
        .schemes
        .iter()
        .map(|s| {
            let own: Vec<ErrorRecord> = records.iter().filter(|r| r.scheme == *s).cloned().collect();
            FittedOrder {
                scheme: s.to_string(),
                order: fit_order(&own).ok(),
            }
        })
        .collect();
    Ok(StudyResult { records, orders })
}

/// Writes `study_records.csv`, `study_orders.json` and `study_plot.gp`
/// into `out`.
pub fn write_outputs(out: &Path, spec: &StudySpec, result: &StudyResult) -> Result<()> {
    io::emit_csv(&result.records, &out.join("study_records.csv"))?;
    io::write_json(&out.join("study_orders.json"), &result.orders)?;
    io::write_plot_script(&out.join("study_plot.gp"), "study_records.csv", &spec.schemes)
}
