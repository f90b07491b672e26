//! Randomized property suites for the projection estimates, metric
//! calmness and the stability of PBD.
//!
//! Every suite is deterministic given its seed. A property is reported as
//! violated when any sample breaks it; `worst` records the largest observed
//! value of the property's statistic and `limit` the bound it is held to.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::geometry::{Ball, Constraint, ExcludedBall, HalfSpace, PairwiseDistance};
use crate::intersection::{cluster_covers, feasible_point_disks, ConstraintSystem, OracleTolerances, RepairBranch};
use crate::linalg::{dist, dot, norm};
use crate::problems::{disks_system, DisksProblem, SlidingProblem};
use crate::solvers::{integrate, SchemeSpec, Trajectory, VectorField};
use crate::{Error, Result};

/// Slack added to every checked inequality.
pub const SLACK: f64 = 1e-10;
/// Tolerance for closed-form identities.
pub const IDENTITY_TOL: f64 = 1e-12;
/// Largest accepted contraction factor of one sweep.
pub const MAX_CONTRACTION: f64 = 0.999;
/// Largest accepted spread of the stability constants across step sizes.
pub const MAX_SPREAD: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Suite {
    Geometry,
    Lemmas,
    Calmness,
    Stability,
}

impl Suite {
    pub const ALL: [Suite; 4] = [Suite::Geometry, Suite::Lemmas, Suite::Calmness, Suite::Stability];

    pub fn as_str(&self) -> &'static str {
        match self {
            Suite::Geometry => "geometry",
            Suite::Lemmas => "lemmas",
            Suite::Calmness => "calmness",
            Suite::Stability => "stability",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|suite| suite.as_str() == s)
            .ok_or_else(|| Error::InvalidParameter(alloc::format!("unknown suite '{s}'")))
    }
}

/// Outcome of one property check.
#[derive(Debug, Clone, PartialEq)]
pub struct PropertyReport {
    pub name: String,
    pub checked: usize,
    pub violations: usize,
    pub worst: f64,
    pub limit: f64,
}

impl PropertyReport {
    fn new(name: &str, limit: f64) -> Self {
        PropertyReport {
            name: String::from(name),
            checked: 0,
            violations: 0,
            worst: f64::NEG_INFINITY,
            limit,
        }
    }

    /// Records one sample whose statistic must not exceed `limit`.
    fn record(&mut self, value: f64) {
        self.checked += 1;
        if value > self.worst || value.is_nan() {
            self.worst = value;
        }
        if value.is_nan() || value > self.limit {
            self.violations += 1;
        }
    }

    pub fn passed(&self) -> bool {
        self.violations == 0 && self.checked > 0
    }
}

impl fmt::Display for PropertyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {}: checked={} violations={} worst={:e} limit={:e}",
            if self.passed() { "PASS" } else { "FAIL" },
            self.name,
            self.checked,
            self.violations,
            self.worst,
            self.limit
        )
    }
}

/// Sample counts and the debug hook of a suite run.
#[derive(Debug, Clone, PartialEq)]
pub struct VerifyConfig {
    pub seed: u64,
    /// Samples per geometry property.
    pub geometry_samples: usize,
    /// Sweep traces per lemma.
    pub lemma_traces: usize,
    /// Configurations for the contraction estimate.
    pub contraction_configs: usize,
    /// Configurations for the calmness checks.
    pub calmness_configs: usize,
    /// Step counts `2^k` of the stability runs.
    pub stability_exponents: (u32, u32),
    /// Debug hook: the named property reports one extra violation.
    pub inject: Option<String>,
}

impl VerifyConfig {
    pub fn new(seed: u64) -> Self {
        VerifyConfig {
            seed,
            geometry_samples: 10_000,
            lemma_traces: 10_000,
            contraction_configs: 1_000,
            calmness_configs: 1_000,
            stability_exponents: (6, 13),
            inject: None,
        }
    }
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig::new(0)
    }
}

/// Runs one suite.
pub fn run_suite(suite: Suite, cfg: &VerifyConfig) -> Result<Vec<PropertyReport>> {
    let mut reports = match suite {
        Suite::Geometry => geometry_suite(cfg),
        Suite::Lemmas => lemma_suite(cfg),
        Suite::Calmness => calmness_suite(cfg),
        Suite::Stability => stability_suite(cfg),
    }?;
    if let Some(target) = &cfg.inject {
        for r in reports.iter_mut().filter(|r| &r.name == target) {
            r.checked += 1;
            r.violations += 1;
        }
    }
    Ok(reports)
}

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn random_vec(rng: &mut ChaCha8Rng, len: usize, half_width: f64) -> Vec<f64> {
    (0..len).map(|_| rng.gen_range(-half_width..half_width)).collect()
}

fn random_unit(rng: &mut ChaCha8Rng, len: usize) -> Vec<f64> {
    loop {
        let v = random_vec(rng, len, 1.0);
        let n = norm(&v);
        if n > 1e-3 && n <= 1.0 {
            return v.into_iter().map(|c| c / n).collect();
        }
    }
}

fn random_constraint(rng: &mut ChaCha8Rng, dim: usize) -> Constraint {
    match rng.gen_range(0..4) {
        0 => Ball::new(random_vec(rng, dim, 1.0), rng.gen_range(0.1..2.0)).unwrap().into(),
        1 => ExcludedBall::new(random_vec(rng, dim, 1.0), rng.gen_range(0.1..2.0)).unwrap().into(),
        2 => {
            let n = random_unit(rng, dim);
            HalfSpace::new(n, rng.gen_range(-1.0..1.0)).unwrap().into()
        }
        _ => {
            let per = if dim >= 4 { 2 } else { 1 };
            let blocks = dim / per;
            let i = rng.gen_range(0..blocks);
            let j = (i + rng.gen_range(1..blocks)) % blocks;
            PairwiseDistance::new(i, j, per, rng.gen_range(0.1..1.0)).unwrap().into()
        }
    }
}

fn geometry_suite(cfg: &VerifyConfig) -> Result<Vec<PropertyReport>> {
    let mut rng = rng_for(cfg.seed, 1);
    let mut idem = PropertyReport::new("projection_idempotent", IDENTITY_TOL);
    let mut consistent = PropertyReport::new("distance_consistent", IDENTITY_TOL);
    let mut lipschitz = PropertyReport::new("distance_1_lipschitz", SLACK);
    for _ in 0..cfg.geometry_samples {
        let dim = 2 * rng.gen_range(1..=3);
        let c = random_constraint(&mut rng, dim);
        let x = random_vec(&mut rng, dim, 2.0);
        let y = random_vec(&mut rng, dim, 2.0);
        let p = c.project(&x)?;
        let pp = c.project(&p)?;
        idem.record(dist(&p, &pp));
        let d = c.distance(&x)?;
        consistent.record((dist(&x, &p) - d).abs().max(c.distance(&p)?));
        lipschitz.record((d - c.distance(&y)?).abs() - dist(&x, &y));
    }

    // Boundary pairs on pairwise constraints, normals v = q − P(q).
    let mut hypo = PropertyReport::new("hypomonotonicity", SLACK);
    let mut convex = PropertyReport::new("convex_normal_monotone", SLACK);
    for _ in 0..cfg.geometry_samples {
        let n = rng.gen_range(2..=4);
        let min_dist = rng.gen_range(0.05..1.0);
        let i = rng.gen_range(0..n);
        let j = (i + rng.gen_range(1..n)) % n;
        let c: Constraint = PairwiseDistance::new(i, j, 2, min_dist)?.into();
        let eta = c.prox_radius();
        let (x, v) = boundary_sample(&c, &mut rng, 2 * n, min_dist)?;
        let (y, w) = boundary_sample(&c, &mut rng, 2 * n, min_dist)?;
        hypo.record(hypo_excess(&x, &v, &y, &w, eta));

        let dim = rng.gen_range(1..=4);
        let c: Constraint = if rng.gen_bool(0.5) {
            Ball::new(random_vec(&mut rng, dim, 1.0), rng.gen_range(0.1..2.0))?.into()
        } else {
            HalfSpace::new(random_unit(&mut rng, dim), rng.gen_range(-1.0..1.0))?.into()
        };
        let (x, v) = boundary_sample(&c, &mut rng, dim, 2.0)?;
        let (y, w) = boundary_sample(&c, &mut rng, dim, 2.0)?;
        convex.record(-dot_diff(&v, &w, &x, &y));
    }
    Ok(vec![idem, consistent, lipschitz, hypo, convex])
}

/// A boundary point of `c` and a proximal normal there, obtained by
/// projecting a random infeasible point.
fn boundary_sample(c: &Constraint, rng: &mut ChaCha8Rng, dim: usize, scale: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    loop {
        let q = random_vec(rng, dim, 2.0 * scale);
        if c.distance(&q)? == 0.0 {
            continue;
        }
        let x = match c.project(&q) {
            Ok(x) => x.into_vec(),
            Err(Error::AmbiguousProjection) => continue,
            Err(e) => return Err(e),
        };
        let v = q.iter().zip(&x).map(|(a, b)| a - b).collect();
        return Ok((x, v));
    }
}

fn dot_diff(v: &[f64], w: &[f64], x: &[f64], y: &[f64]) -> f64 {
    let vw: Vec<f64> = v.iter().zip(w).map(|(a, b)| a - b).collect();
    let xy: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).collect();
    dot(&vw, &xy)
}

/// `−⟨v − w, x − y⟩ − (‖v‖ + ‖w‖)/(2η)·‖x − y‖²`
fn hypo_excess(x: &[f64], v: &[f64], y: &[f64], w: &[f64], eta: f64) -> f64 {
    let d = dist(x, y);
    -dot_diff(v, w, x, y) - (norm(v) + norm(w)) / (2.0 * eta) * d * d
}

/// A feasible configuration of `n` disks with contacts: random centers in a
/// tight box, projected by the oracle.
fn packed_disks(rng: &mut ChaCha8Rng, sys: &ConstraintSystem, n: usize, radius: f64, tol: &OracleTolerances) -> Result<Vec<f64>> {
    let half = radius * (1.0 + libm::sqrt(n as f64));
    let raw = random_vec(rng, 2 * n, half);
    Ok(sys.project_with(&raw, tol)?.into_vec())
}

/// `q0 = p + ε u` with `p` feasible, `u` a random unit vector and
/// `ε ∈ (0, eps_max)`; returns `q0` once it is infeasible.
fn perturbed(rng: &mut ChaCha8Rng, sys: &ConstraintSystem, p: &[f64], eps_max: f64) -> Result<Option<Vec<f64>>> {
    for _ in 0..100 {
        let u = random_unit(rng, p.len());
        let eps = rng.gen_range(0.0..eps_max);
        let q: Vec<f64> = p.iter().zip(&u).map(|(a, b)| a + eps * b).collect();
        if sys.max_constraint_distance(&q)? > 0.0 {
            return Ok(Some(q));
        }
    }
    Ok(None)
}

fn lemma_suite(cfg: &VerifyConfig) -> Result<Vec<PropertyReport>> {
    let tol = OracleTolerances::tight();
    let radius = 0.1;

    // Basic error bounds: ‖v_j‖ ≤ 2^{j−1} d_S(q0), d_S(q_j) ≤ 2^j d_S(q0)
    // for d_S(q0) < 2^{1−m} η.
    let mut rng = rng_for(cfg.seed, 2);
    let mut incr = PropertyReport::new("lemma_increment_bound", SLACK);
    let mut drift = PropertyReport::new("lemma_distance_bound", SLACK);
    let mut traces = 0;
    while traces < cfg.lemma_traces {
        let n = rng.gen_range(2..=5);
        let sys = disks_system(n, radius)?;
        let m = sys.len();
        let eta = sys.prox_radius_hint();
        let limit = libm::ldexp(eta, 1 - m as i32);
        let p = packed_disks(&mut rng, &sys, n, radius, &tol)?;
        let Some(q0) = perturbed(&mut rng, &sys, &p, limit)? else { continue };
        let ps = sys.project_with(&q0, &tol)?;
        let d0 = dist(&q0, &ps);
        if d0 >= limit {
            continue;
        }
        traces += 1;
        let (_, trace) = sys.sweep(&q0)?;
        for j in 1..=m {
            let bound_v = libm::ldexp(d0, j as i32 - 1);
            incr.record(norm(&trace.v[j - 1]) - bound_v);
            let qj = &trace.q[j];
            let d_oracle = sys.distance_to_intersection(qj, &tol)?;
            let dj = d_oracle.min(dist(qj, &ps));
            drift.record(dj - libm::ldexp(d0, j as i32));
        }
    }

    // Single projection error with e_j = q_j − P_S(q0):
    // ‖e_j‖² ≤ (‖e_{j−1}‖² − ‖v_j‖²)/(1 − ‖v_j‖/η) whenever ‖v_j‖ < η.
    let mut rng = rng_for(cfg.seed, 3);
    let mut single = PropertyReport::new("lemma_single_projection", SLACK);
    let mut traces = 0;
    while traces < cfg.lemma_traces {
        let n = rng.gen_range(2..=5);
        let sys = disks_system(n, radius)?;
        let eta = sys.prox_radius_hint();
        let p = packed_disks(&mut rng, &sys, n, radius, &tol)?;
        let Some(q0) = perturbed(&mut rng, &sys, &p, 0.5 * radius)? else { continue };
        let ps = sys.project_with(&q0, &tol)?;
        traces += 1;
        let (_, trace) = sys.sweep(&q0)?;
        for j in 1..trace.q.len() {
            let prev = dist(&trace.q[j - 1], &ps);
            let vj = norm(&trace.v[j - 1]);
            if vj >= eta || prev == 0.0 {
                continue;
            }
            let ej = dist(&trace.q[j], &ps);
            let rhs = ((prev * prev - vj * vj) / (1.0 - vj / eta)).max(0.0);
            single.record(ej - libm::sqrt(rhs));
        }
    }

    let contraction = contraction_report(cfg, &tol)?;
    Ok(vec![incr, drift, single, contraction])
}

/// `‖sweep(q0) − P_S(q0)‖ / d_S(q0)` on random 3 to 5 disk clusters with
/// `d_S(q0) < 0.1 R`; the worst ratio is the observed contraction factor.
fn contraction_report(cfg: &VerifyConfig, tol: &OracleTolerances) -> Result<PropertyReport> {
    let radius = 0.1;
    let mut rng = rng_for(cfg.seed, 4);
    let mut rep = PropertyReport::new("sweep_contraction", MAX_CONTRACTION);
    while rep.checked < cfg.contraction_configs {
        let n = rng.gen_range(3..=5);
        let sys = disks_system(n, radius)?;
        let p = packed_disks(&mut rng, &sys, n, radius, tol)?;
        let Some(q0) = perturbed(&mut rng, &sys, &p, 0.1 * radius)? else { continue };
        let ps = sys.project_with(&q0, tol)?;
        let d0 = dist(&q0, &ps);
        if d0 >= 0.1 * radius || d0 == 0.0 {
            continue;
        }
        let (q, _) = sys.sweep(&q0)?;
        rep.record(dist(&q, &ps) / d0);
    }
    Ok(rep)
}

fn calmness_suite(cfg: &VerifyConfig) -> Result<Vec<PropertyReport>> {
    let tol = OracleTolerances::tight();
    let radius = 0.1;
    let mut rng = rng_for(cfg.seed, 5);
    // statistic: α_test − ratio, must stay ≤ 0
    let mut calm = PropertyReport::new("metric_calmness", 0.0);
    let mut repair = PropertyReport::new("feasible_point_bound", SLACK);
    let mut repair_feasible = PropertyReport::new("feasible_point_feasible", SLACK);
    let mut clusters = PropertyReport::new("cluster_conditions", 0.0);
    while calm.checked < cfg.calmness_configs {
        let n = rng.gen_range(2..=4);
        let sys = disks_system(n, radius)?;
        // boxes from heavy overlap to barely touching
        let half = radius * rng.gen_range(0.5..2.0) * libm::sqrt(n as f64);
        let x = random_vec(&mut rng, 2 * n, half);
        if sys.max_constraint_distance(&x)? == 0.0 {
            continue;
        }
        let alpha_test = 1.0 / (n as f64 * libm::ldexp(1.0, 2 * n as i32 + 1));
        calm.record(alpha_test - sys.calmness_ratio(&x, &tol)?);

        let fp = feasible_point_disks(&x, n, 2, radius)?;
        repair_feasible.record(sys.max_constraint_distance(&fp.point)?);
        let moved = match fp.branch {
            RepairBranch::Shift => x.chunks(2).zip(fp.point.chunks(2)).map(|(a, b)| dist(a, b)).sum(),
            _ => dist(&x, &fp.point),
        };
        repair.record(moved - fp.bound);

        let blocks: Vec<Vec<f64>> = x.chunks(2).map(<[f64]>::to_vec).collect();
        let cover = cluster_covers(&blocks, radius)?;
        let ok = cover.satisfies_conditions(&blocks, radius) && cover.level as usize <= 2 * (n - 1);
        clusters.record(if ok { 0.0 } else { 1.0 });
    }
    Ok(vec![calm, repair, repair_feasible, clusters])
}

/// Spread `max/min` of the two stability constants of PBD over the step
/// counts `2^k`.
fn stability_pair(
    label: &str,
    sys: &ConstraintSystem,
    f: &dyn VectorField,
    x0: &[f64],
    t_end: f64,
    cfg: &VerifyConfig,
) -> Result<[PropertyReport; 2]> {
    let tol = OracleTolerances::new(1e-12, 1e-10);
    let mut viol = Vec::new();
    let mut rate = Vec::new();
    let (lo, hi) = cfg.stability_exponents;
    for k in lo..=hi {
        let tr: Trajectory = integrate(&SchemeSpec::Pbd, sys, f, x0, t_end, 1usize << k)?;
        viol.push(tr.violation_rate(sys, &tol)?);
        rate.push(tr.max_step_rate());
    }
    let spread = |v: &[f64]| {
        let max = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let min = v.iter().cloned().fold(f64::INFINITY, f64::min);
        if min > 0.0 {
            max / min
        } else if max == 0.0 {
            // no violation at any step size is trivially bounded
            1.0
        } else {
            f64::INFINITY
        }
    };
    let mut a = PropertyReport::new(&alloc::format!("bounded_violation_{label}"), MAX_SPREAD);
    let mut b = PropertyReport::new(&alloc::format!("step_rate_{label}"), MAX_SPREAD);
    a.record(spread(&viol));
    b.record(spread(&rate));
    a.checked = viol.len();
    b.checked = rate.len();
    Ok([a, b])
}

fn stability_suite(cfg: &VerifyConfig) -> Result<Vec<PropertyReport>> {
    let sliding = SlidingProblem::new(3, 10.0, core::f64::consts::PI / 16.0)?;
    let disks = DisksProblem::generate(40, 0.1, 1.0, cfg.seed)?;
    let [a, b] = stability_pair("sliding", &sliding.system(), &sliding.field(), &sliding.x0(), 4.0, cfg)?;
    let [c, d] = stability_pair("disks", &disks.system(), &disks.field(), disks.x0(), 4.0, cfg)?;
    Ok(vec![a, b, c, d])
}
