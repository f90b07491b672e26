//! JSON problem documents and CSV output.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use proxflow_core::bench::{ErrorRecord, RunStatus};
use proxflow_core::problems::{DisksProblem, Problem, SlidingProblem};
use proxflow_core::{SchemeSpec, StateVector, Trajectory};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{AppError, Result};

/// Header of the study records CSV.
pub const RECORDS_HEADER: [&str; 6] = ["scheme", "h", "sup_error", "avg_work", "wall_time_s", "status"];

/// Serialized benchmark problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum ProblemDoc {
    Sliding {
        d: usize,
        #[serde(rename = "C")]
        c: f64,
        alpha: f64,
        #[serde(default)]
        seed: Option<u64>,
        /// Derived initial state; checked against the parameters when read.
        #[serde(default)]
        x0: Option<Vec<f64>>,
    },
    Disks {
        #[serde(rename = "N")]
        n: usize,
        #[serde(rename = "R")]
        r: f64,
        gamma: f64,
        #[serde(default)]
        seed: Option<u64>,
        x0: Vec<f64>,
    },
}

impl ProblemDoc {
    pub fn from_problem(p: &Problem) -> Self {
        match p {
            Problem::Sliding(s) => ProblemDoc::Sliding {
                d: s.dim(),
                c: s.offset(),
                alpha: s.alpha(),
                seed: None,
                x0: Some(s.x0().into_vec()),
            },
            Problem::Disks(dp) => ProblemDoc::Disks {
                n: dp.count(),
                r: dp.radius(),
                gamma: dp.gamma(),
                seed: dp.seed(),
                x0: dp.x0().to_vec(),
            },
        }
    }

    pub fn to_problem(&self) -> Result<Problem> {
        match self {
            ProblemDoc::Sliding { d, c, alpha, x0, .. } => {
                let p = SlidingProblem::new(*d, *c, *alpha)?;
                if let Some(x0) = x0 {
                    let expected = p.x0();
                    let matches = x0.len() == expected.len()
                        && x0.iter().zip(expected.iter()).all(|(a, b)| (a - b).abs() <= 1e-12);
                    if !matches {
                        return Err(AppError::invalid(
                            "sliding x0 does not match sin(alpha) e1 + cos(alpha) e2",
                        ));
                    }
                }
                Ok(Problem::Sliding(p))
            }
            ProblemDoc::Disks { n, r, gamma, seed, x0 } => {
                let x0 = StateVector::new(x0.clone())?;
                Ok(Problem::Disks(DisksProblem::from_parts(*n, *r, *gamma, x0, *seed)?))
            }
        }
    }
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| AppError::io(path, e))?;
    serde_json::from_str(&text).map_err(|source| AppError::Json {
        path: path.to_path_buf(),
        source,
    })
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|source| AppError::Json {
        path: path.to_path_buf(),
        source,
    })?;
    text.push('\n');
    fs::write(path, text).map_err(|e| AppError::io(path, e))
}

pub fn read_problem(path: &Path) -> Result<Problem> {
    read_json::<ProblemDoc>(path)?.to_problem()
}

pub fn write_problem(path: &Path, p: &Problem) -> Result<()> {
    write_json(path, &ProblemDoc::from_problem(p))
}

fn csv_err(path: &Path) -> impl Fn(csv::Error) -> AppError + '_ {
    move |source| AppError::Csv {
        path: path.to_path_buf(),
        source,
    }
}

/// Writes `t,x1,…,xD,work` with one row per node; `work` is the cost of
/// the step that produced the node (0 for the initial state).
pub fn write_trajectory_csv(path: &Path, traj: &Trajectory) -> Result<()> {
    let file = File::create(path).map_err(|e| AppError::io(path, e))?;
    let mut w = csv::Writer::from_writer(BufWriter::new(file));
    let dim = traj.final_state().len();
    let mut header = vec![String::from("t")];
    header.extend((1..=dim).map(|i| format!("x{i}")));
    header.push(String::from("work"));
    w.write_record(&header).map_err(csv_err(path))?;
    for (k, (t, x)) in traj.times().iter().zip(traj.states()).enumerate() {
        let mut row = Vec::with_capacity(dim + 2);
        row.push(format!("{t:?}"));
        row.extend(x.iter().map(|v| format!("{v:?}")));
        let work = if k == 0 { 0 } else { traj.work()[k - 1] };
        row.push(work.to_string());
        w.write_record(&row).map_err(csv_err(path))?;
    }
    w.flush().map_err(|e| AppError::io(path, e))
}

/// Writes study records under [`RECORDS_HEADER`], floats in shortest
/// round-trip form.
pub fn emit_csv(records: &[ErrorRecord], path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| AppError::io(path, e))?;
    let mut w = csv::Writer::from_writer(BufWriter::new(file));
    w.write_record(RECORDS_HEADER).map_err(csv_err(path))?;
    for r in records {
        w.write_record([
            r.scheme.to_string(),
            format!("{:?}", r.h),
            format!("{:?}", r.sup_error),
            format!("{:?}", r.avg_work),
            format!("{:?}", r.wall_time_s),
            r.status.to_string(),
        ])
        .map_err(csv_err(path))?;
    }
    w.flush().map_err(|e| AppError::io(path, e))
}

/// Reads records written by [`emit_csv`].
pub fn read_csv(path: &Path) -> Result<Vec<ErrorRecord>> {
    let file = File::open(path).map_err(|e| AppError::io(path, e))?;
    let mut r = csv::Reader::from_reader(file);
    let header = r.headers().map_err(csv_err(path))?.clone();
    if header.iter().ne(RECORDS_HEADER) {
        return Err(AppError::invalid(format!("{}: unexpected header", path.display())));
    }
    let bad = |line: u64, what: &str| AppError::invalid(format!("{}:{line}: bad {what}", path.display()));
    let mut out = Vec::new();
    for row in r.records() {
        let row = row.map_err(csv_err(path))?;
        let line = row.position().map_or(0, |p| p.line());
        let num = |i: usize, what: &str| row[i].parse::<f64>().map_err(|_| bad(line, what));
        out.push(ErrorRecord {
            scheme: row[0].parse::<SchemeSpec>().map_err(|_| bad(line, "scheme"))?,
            h: num(1, "h")?,
            sup_error: num(2, "sup_error")?,
            avg_work: num(3, "avg_work")?,
            wall_time_s: num(4, "wall_time_s")?,
            status: row[5].parse::<RunStatus>().map_err(|_| bad(line, "status"))?,
        });
    }
    Ok(out)
}

/// Gnuplot script drawing error against work per step and against `h`,
/// one curve per scheme, from the records CSV next to it.
pub fn write_plot_script(path: &Path, csv_name: &str, schemes: &[SchemeSpec]) -> Result<()> {
    let names: Vec<String> = schemes.iter().map(ToString::to_string).collect();
    let mut s = String::new();
    s.push_str("set datafile separator ','\n");
    s.push_str("set logscale xy\n");
    s.push_str("set key outside\n");
    s.push_str(&format!("schemes = \"{}\"\n", names.join(" ")));
    s.push_str("set terminal pngcairo size 1200,500\n");
    s.push_str("set output 'study_plot.png'\n");
    s.push_str("set multiplot layout 1,2\n");
    s.push_str("set xlabel 'total constraint evaluations'\nset ylabel 'sup error'\n");
    s.push_str(&format!(
        "plot for [s in schemes] '{csv_name}' using (strcol(1) eq s && strcol(6) eq 'ok' ? $4 / $2 : 1/0):3 with linespoints title s\n"
    ));
    s.push_str("set xlabel 'h'\n");
    s.push_str(&format!(
        "plot for [s in schemes] '{csv_name}' using (strcol(1) eq s && strcol(6) eq 'ok' ? $2 : 1/0):3 with linespoints title s\n"
    ));
    s.push_str("unset multiplot\n");
    let mut f = File::create(path).map_err(|e| AppError::io(path, e))?;
    f.write_all(s.as_bytes()).map_err(|e| AppError::io(path, e))
}
