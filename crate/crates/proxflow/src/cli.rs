//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 when a run or a property check fails, 2 on
//! usage errors (bad flags, invalid parameters, malformed documents).

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use proxflow_core::bench::{sup_error_per_segment, DEFAULT_SAMPLES_PER_SEGMENT};
use proxflow_core::intersection::OracleTolerances;
use proxflow_core::problems::{DisksProblem, Problem, SlidingProblem};
use proxflow_core::solvers::integrate;
use proxflow_core::verify::{run_suite, PropertyReport, Suite, VerifyConfig};
use proxflow_core::{SchemeSpec, Trajectory};
use serde::Serialize;

use crate::error::{AppError, Result};
use crate::io;
use crate::study::{self, StudyDoc};

#[derive(Debug, Parser)]
#[command(name = "proxflow", version, about = "Time stepping for differential inclusions on prox-regular sets")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Particle sliding along the intersection of sphere boundaries.
    Sliding(SlidingArgs),
    /// Non-overlapping disks attracted to the origin.
    Disks(DisksArgs),
    /// Convergence study described by a JSON file.
    Study(StudyArgs),
    /// Randomized property suite.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
pub struct SchemeArgs {
    /// Scheme name (pbd, moreau, pngs, pgs, penalty) or full label such as
    /// `pngs:abstol=1e-8:reltol=1e-6`.
    #[arg(long, default_value = "pbd")]
    pub scheme: String,
    /// Absolute tolerance of the sweep stopping criterion.
    #[arg(long, default_value_t = 1e-8)]
    pub abstol: f64,
    /// Relative tolerance of the sweep stopping criterion.
    #[arg(long, default_value_t = 1e-6)]
    pub reltol: f64,
}

impl SchemeArgs {
    fn resolve(&self, penalty: f64) -> Result<SchemeSpec> {
        let (abstol, reltol) = (self.abstol, self.reltol);
        let s = match self.scheme.as_str() {
            "moreau" => SchemeSpec::MoreauEuler { abstol, reltol },
            "pngs" => SchemeSpec::Pngs { abstol, reltol },
            "pgs" => SchemeSpec::Pgs { abstol, reltol },
            "penalty" => SchemeSpec::Penalty { gamma: penalty },
            label => label.parse()?,
        };
        s.validate()?;
        Ok(s)
    }
}

#[derive(Debug, Args)]
pub struct SlidingArgs {
    /// Sphere-center offset.
    #[arg(long = "C", default_value_t = 10.0)]
    pub c: f64,
    /// Dimension of the state space (at least 3).
    #[arg(long, default_value_t = 3)]
    pub d: usize,
    /// Initial angle in (0, π).
    #[arg(long, default_value_t = std::f64::consts::PI / 16.0)]
    pub alpha: f64,
    /// Final time.
    #[arg(long = "T", default_value_t = 4.0)]
    pub t_end: f64,
    /// Number of steps.
    #[arg(long, default_value_t = 1024, value_parser = clap::value_parser!(u64).range(1..))]
    pub n: u64,
    #[command(flatten)]
    pub scheme: SchemeArgs,
    /// Penalty parameter γ of the penalty scheme.
    #[arg(long, default_value_t = 10.0)]
    pub gamma: f64,
    /// Output directory.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct DisksArgs {
    /// Number of disks.
    #[arg(long = "N", default_value_t = 40)]
    pub count: usize,
    /// Disk radius.
    #[arg(long = "R", default_value_t = 0.1)]
    pub radius: f64,
    /// Strength of the attraction to the origin.
    #[arg(long, default_value_t = 1.0)]
    pub gamma: f64,
    /// Final time.
    #[arg(long = "T", default_value_t = 4.0)]
    pub t_end: f64,
    /// Number of steps.
    #[arg(long, default_value_t = 1024, value_parser = clap::value_parser!(u64).range(1..))]
    pub n: u64,
    #[command(flatten)]
    pub scheme: SchemeArgs,
    /// Penalty parameter of the penalty scheme.
    #[arg(long, default_value_t = 10.0)]
    pub penalty: f64,
    /// Seed of the initial placement.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Problem document to load instead of generating one.
    #[arg(long, conflicts_with_all = ["count", "radius", "gamma", "seed"])]
    pub problem: Option<PathBuf>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct StudyArgs {
    /// Study description (JSON).
    pub study: PathBuf,
    /// Output directory.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// One of geometry, lemmas, calmness, stability.
    pub suite: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output directory.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// Debug hook: report a violation of the named property.
    #[arg(long, hide = true)]
    pub inject_violation: Option<String>,
}

/// Parses `args` (program name first), runs the command and maps the
/// outcome to an exit code.
pub fn run<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match execute(&cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_usage() { 2 } else { 1 })
        }
    }
}

/// Runs a parsed command; `Ok(false)` means a property check failed.
pub fn execute(cmd: &Command) -> Result<bool> {
    match cmd {
        Command::Sliding(a) => cmd_sliding(a).map(|_| true),
        Command::Disks(a) => cmd_disks(a).map(|_| true),
        Command::Study(a) => cmd_study(a).map(|_| true),
        Command::Verify(a) => cmd_verify(a),
    }
}

fn prepare_out(out: &Path) -> Result<()> {
    fs::create_dir_all(out).map_err(|e| AppError::io(out, e))
}

fn check_time(t_end: f64) -> Result<()> {
    if t_end > 0.0 && t_end.is_finite() {
        Ok(())
    } else {
        Err(AppError::invalid("T must be positive and finite"))
    }
}

#[derive(Serialize)]
struct SlidingSummary {
    scheme: String,
    d: usize,
    #[serde(rename = "C")]
    c: f64,
    alpha: f64,
    #[serde(rename = "T")]
    t_end: f64,
    n: usize,
    h: f64,
    sup_error: f64,
    final_error: f64,
    avg_work: f64,
    max_constraint_distance: f64,
}

fn max_violation(p: &Problem, tr: &Trajectory) -> Result<f64> {
    let sys = p.system();
    let mut worst: f64 = 0.0;
    for x in tr.states() {
        worst = worst.max(sys.max_constraint_distance(x)?);
    }
    Ok(worst)
}

pub fn cmd_sliding(a: &SlidingArgs) -> Result<()> {
    let p = SlidingProblem::new(a.d, a.c, a.alpha)?;
    let scheme = a.scheme.resolve(a.gamma)?;
    check_time(a.t_end)?;
    prepare_out(&a.out)?;
    let n = a.n as usize;
    let tr = integrate(&scheme, &p.system(), &p.field(), &p.x0(), a.t_end, n)?;
    let sup_error = sup_error_per_segment(&tr, |t| p.exact(t), DEFAULT_SAMPLES_PER_SEGMENT)?;
    let final_error = tr.final_state().distance_to(&p.exact(a.t_end)?);
    io::write_trajectory_csv(&a.out.join("sliding_trajectory.csv"), &tr)?;
    let summary = SlidingSummary {
        scheme: scheme.to_string(),
        d: a.d,
        c: a.c,
        alpha: a.alpha,
        t_end: a.t_end,
        n,
        h: tr.step_size(),
        sup_error,
        final_error,
        avg_work: tr.avg_work(),
        max_constraint_distance: max_violation(&Problem::Sliding(p), &tr)?,
    };
    io::write_json(&a.out.join("sliding_summary.json"), &summary)?;
    println!("{scheme}: n={n} sup_error={sup_error:e} avg_work={}", summary.avg_work);
    Ok(())
}

#[derive(Serialize)]
struct DisksSummary {
    scheme: String,
    #[serde(rename = "N")]
    n_disks: usize,
    #[serde(rename = "R")]
    r: f64,
    gamma: f64,
    seed: Option<u64>,
    #[serde(rename = "T")]
    t_end: f64,
    n: usize,
    h: f64,
    avg_work: f64,
    max_constraint_distance: f64,
    violation_rate: f64,
    final_state: Vec<f64>,
}

pub fn cmd_disks(a: &DisksArgs) -> Result<()> {
    let problem = match &a.problem {
        Some(path) => match io::read_problem(path)? {
            Problem::Disks(d) => d,
            Problem::Sliding(_) => return Err(AppError::invalid(format!("{}: not a disks problem", path.display()))),
        },
        None => DisksProblem::generate(a.count, a.radius, a.gamma, a.seed)?,
    };
    let scheme = a.scheme.resolve(a.penalty)?;
    check_time(a.t_end)?;
    prepare_out(&a.out)?;
    let n = a.n as usize;
    let sys = problem.system();
    let tr = integrate(&scheme, &sys, &problem.field(), problem.x0(), a.t_end, n)?;
    let wrapped = Problem::Disks(problem.clone());
    io::write_problem(&a.out.join("disks_problem.json"), &wrapped)?;
    io::write_trajectory_csv(&a.out.join("disks_trajectory.csv"), &tr)?;
    let summary = DisksSummary {
        scheme: scheme.to_string(),
        n_disks: problem.count(),
        r: problem.radius(),
        gamma: problem.gamma(),
        seed: problem.seed(),
        t_end: a.t_end,
        n,
        h: tr.step_size(),
        avg_work: tr.avg_work(),
        max_constraint_distance: max_violation(&wrapped, &tr)?,
        violation_rate: tr.violation_rate(&sys, &OracleTolerances::reference())?,
        final_state: tr.final_state().to_vec(),
    };
    io::write_json(&a.out.join("disks_summary.json"), &summary)?;
    println!(
        "{scheme}: N={} n={n} avg_work={} max_violation={:e}",
        summary.n_disks, summary.avg_work, summary.max_constraint_distance
    );
    Ok(())
}

pub fn cmd_study(a: &StudyArgs) -> Result<()> {
    let doc = StudyDoc::read(&a.study)?;
    let base = a.study.parent().unwrap_or(Path::new("."));
    let spec = doc.into_spec(base)?;
    prepare_out(&a.out)?;
    let result = study::run_study(&spec)?;
    study::write_outputs(&a.out, &spec, &result)?;
    for o in &result.orders {
        match o.order {
            Some(q) => println!("{}: order {q:.3}", o.scheme),
            None => println!("{}: order not fitted", o.scheme),
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct ReportDoc<'a> {
    name: &'a str,
    checked: usize,
    violations: usize,
    worst: f64,
    limit: f64,
    passed: bool,
}

pub fn cmd_verify(a: &VerifyArgs) -> Result<bool> {
    let suite: Suite = a.suite.parse()?;
    prepare_out(&a.out)?;
    let cfg = VerifyConfig {
        inject: a.inject_violation.clone(),
        ..VerifyConfig::new(a.seed)
    };
    let reports: Vec<PropertyReport> = run_suite(suite, &cfg)?;
    let docs: Vec<ReportDoc> = reports
        .iter()
        .map(|r| ReportDoc {
            name: &r.name,
            checked: r.checked,
            violations: r.violations,
            worst: r.worst,
            limit: r.limit,
            passed: r.passed(),
        })
        .collect();
    io::write_json(&a.out.join(format!("verify_{suite}.json")), &docs)?;
    for r in &reports {
        println!("{r}");
    }
    let failed: Vec<&str> = reports.iter().filter(|r| !r.passed()).map(|r| r.name.as_str()).collect();
    if !failed.is_empty() {
        eprintln!("violated: {}", failed.join(", "));
    }
    Ok(failed.is_empty())
}
