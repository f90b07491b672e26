//! Benchmark problems.
//!
//! **Sliding.** A particle in `ℝ^d` under the constant force `−e₂` is kept
//! outside `d − 1` balls of radius `R = √(1 + C²)` whose boundaries all pass
//! through the unit circle of the `(e₁, e₂)`-plane. Starting on that circle
//! at angle `α` it slides along the circle until it reaches `e₁` and then
//! falls freely. The closed form is
//!
//! ```text
//! x₁(t) = C₂ eᵗ / (1 + e^{2(C₁+t)}),  x₂(t) = (1 − e^{2(C₁+t)}) / (1 + e^{2(C₁+t)})
//! C₁ = ½ log((1 − cos α)/(1 + cos α)),  C₂ = sin α (e^{2C₁} + 1)
//! ```
//!
//! for `t ≤ t_exit = −C₁`, and `x₁ = 1, x₂ = −(t + C₁)` afterwards.
//!
//! **Disks.** `N` disks of radius `R` in the plane, attracted to the origin
//! by `ẋ = −γ x`, with all pairwise non-overlap constraints.

use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::geometry::{Constraint, ExcludedBall, PairwiseDistance, StateVector};
use crate::intersection::{ConstraintSystem, OracleTolerances};
use crate::linalg::dist;
use crate::solvers::{integrate, ConstantField, LinearAttraction, SchemeSpec, Trajectory, VectorField};
use crate::{Error, Result};

/// Integration constants of the sliding solution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlidingConstants {
    pub c1: f64,
    pub c2: f64,
    /// Time at which the particle leaves the circle (zero when it starts
    /// below the horizontal axis).
    pub t_exit: f64,
    alpha: f64,
}

impl SlidingConstants {
    pub fn new(alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        let cos = libm::cos(alpha);
        let c1 = 0.5 * libm::log((1.0 - cos) / (1.0 + cos));
        let c2 = libm::sin(alpha) * (libm::exp(2.0 * c1) + 1.0);
        Ok(SlidingConstants {
            c1,
            c2,
            t_exit: (-c1).max(0.0),
            alpha,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// `(x₁, x₂)` of the sliding-phase formula, evaluated at any `t`.
    pub fn sliding_branch(&self, t: f64) -> [f64; 2] {
        let e = libm::exp(2.0 * (self.c1 + t));
        [self.c2 * libm::exp(t) / (1.0 + e), (1.0 - e) / (1.0 + e)]
    }

    /// `(x₁, x₂)` of the free fall after leaving the circle at `e₁`.
    pub fn exit_branch(&self, t: f64) -> [f64; 2] {
        [1.0, -(t + self.c1)]
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < core::f64::consts::PI {
        Ok(())
    } else {
        Err(Error::invalid("alpha must lie in the open interval (0, π)"))
    }
}

/// Exact solution of the sliding problem at `t ≥ 0` in dimension `d`.
pub fn sliding_exact(consts: &SlidingConstants, d: usize, t: f64) -> Result<StateVector> {
    if d < 2 {
        return Err(Error::invalid("dimension must be at least 2"));
    }
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::invalid("time must be non-negative"));
    }
    let mut x = vec![0.0; d];
    if consts.c1 >= 0.0 {
        // starts at or below the horizontal axis: free fall from the start
        x[0] = libm::sin(consts.alpha);
        x[1] = libm::cos(consts.alpha) - t;
    } else if t <= consts.t_exit {
        x[..2].copy_from_slice(&consts.sliding_branch(t));
    } else {
        x[..2].copy_from_slice(&consts.exit_branch(t));
    }
    Ok(StateVector::from_vec(x))
}

/// Particle sliding along the intersection of `d − 1` sphere boundaries.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlidingProblem {
    d: usize,
    c: f64,
    alpha: f64,
}

impl SlidingProblem {
    pub fn new(d: usize, c: f64, alpha: f64) -> Result<Self> {
        if d < 3 {
            return Err(Error::invalid("sliding problem needs dimension d ≥ 3"));
        }
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::invalid("sphere offset C must be positive"));
        }
        check_alpha(alpha)?;
        Ok(SlidingProblem { d, c, alpha })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn offset(&self) -> f64 {
        self.c
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Sphere radius `√(1 + C²)`.
    pub fn radius(&self) -> f64 {
        libm::sqrt(1.0 + self.c * self.c)
    }

    /// Sphere centers: `C e_{j+2}` for `1 ≤ j ≤ d − 2`, then
    /// `−C (d−2)^{−1/2} Σ_{j≥3} e_j`. The last center balances the others so
    /// that the normal cone on the unit circle contains the in-plane radial
    /// direction.
    pub fn centers(&self) -> Vec<Vec<f64>> {
        let d = self.d;
        let mut centers = Vec::with_capacity(d - 1);
        for j in 2..d {
            let mut c = vec![0.0; d];
            c[j] = self.c;
            centers.push(c);
        }
        let w = -self.c / libm::sqrt((d - 2) as f64);
        let mut last = vec![0.0; d];
        last[2..].iter_mut().for_each(|v| *v = w);
        centers.push(last);
        centers
    }

    /// The `d − 1` sphere-exterior constraints.
    pub fn system(&self) -> ConstraintSystem {
        let r = self.radius();
        let cs: Vec<Constraint> = self
            .centers()
            .into_iter()
            .map(|c| ExcludedBall::new(c, r).expect("validated parameters").into())
            .collect();
        ConstraintSystem::new(self.d, cs).expect("validated parameters")
    }

    /// `x(0) = sin(α) e₁ + cos(α) e₂`.
    pub fn x0(&self) -> StateVector {
        let mut x = vec![0.0; self.d];
        x[0] = libm::sin(self.alpha);
        x[1] = libm::cos(self.alpha);
        StateVector::from_vec(x)
    }

    /// `f ≡ −e₂`.
    pub fn field(&self) -> ConstantField {
        let mut f = vec![0.0; self.d];
        f[1] = -1.0;
        ConstantField(f)
    }

    pub fn constants(&self) -> SlidingConstants {
        SlidingConstants::new(self.alpha).expect("validated alpha")
    }

    pub fn exact(&self, t: f64) -> Result<StateVector> {
        sliding_exact(&self.constants(), self.d, t)
    }
}

/// Largest box-sampling effort before [`DisksProblem::generate`] gives up.
pub const MAX_PLACEMENT_ATTEMPTS: usize = 1_000_000;

/// `N` non-overlapping disks of radius `R` attracted to the origin.
#[derive(Debug, Clone, PartialEq)]
pub struct DisksProblem {
    n: usize,
    radius: f64,
    gamma: f64,
    x0: StateVector,
    seed: Option<u64>,
}

impl DisksProblem {
    /// Places the disks by seeded random sequential insertion in a square
    /// of side `4R√N` centered at the origin.
    pub fn generate(n: usize, radius: f64, gamma: f64, seed: u64) -> Result<Self> {
        check_disk_params(n, radius, gamma)?;
        let side = 4.0 * radius * libm::sqrt(n as f64);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut placed: Vec<[f64; 2]> = Vec::with_capacity(n);
        let min_d2 = 4.0 * radius * radius;
        let mut attempts = 0;
        while placed.len() < n {
            if attempts >= MAX_PLACEMENT_ATTEMPTS {
                return Err(Error::SamplingFailed { attempts });
            }
            attempts += 1;
            let p = [
                side * (rng.gen::<f64>() - 0.5),
                side * (rng.gen::<f64>() - 0.5),
            ];
            let clear = placed.iter().all(|q| {
                let (dx, dy) = (p[0] - q[0], p[1] - q[1]);
                dx * dx + dy * dy >= min_d2
            });
            if clear {
                placed.push(p);
            }
        }
        let x0 = StateVector::from_vec(placed.concat());
        Self::from_parts(n, radius, gamma, x0, Some(seed))
    }

    /// Builds a problem from given initial centers, checking feasibility.
    pub fn from_parts(n: usize, radius: f64, gamma: f64, x0: StateVector, seed: Option<u64>) -> Result<Self> {
        check_disk_params(n, radius, gamma)?;
        if x0.len() != 2 * n {
            return Err(Error::DimensionMismatch {
                expected: 2 * n,
                found: x0.len(),
            });
        }
        let x0 = StateVector::new(x0.into_vec())?;
        for i in 0..n {
            for j in i + 1..n {
                if dist(&x0[2 * i..2 * i + 2], &x0[2 * j..2 * j + 2]) < 2.0 * radius - 1e-12 {
                    return Err(Error::invalid("initial disk positions overlap"));
                }
            }
        }
        Ok(DisksProblem {
            n,
            radius,
            gamma,
            x0,
            seed,
        })
    }

    pub fn count(&self) -> usize {
        self.n
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn x0(&self) -> &StateVector {
        &self.x0
    }

    /// `N(N−1)/2` pairwise constraints in lexicographic `(i, j)`, `i < j`.
    pub fn system(&self) -> ConstraintSystem {
        disks_system(self.n, self.radius).expect("validated parameters")
    }

    /// `f(x) = −γ x`.
    pub fn field(&self) -> LinearAttraction {
        LinearAttraction { gamma: self.gamma }
    }

    /// Fine-step PNGS solution with `abstol = 1e−12`, `reltol = 1e−10`.
    /// Requires `h_ref = T / n_ref ≤ 1e−4 T`.
    pub fn reference_trajectory(&self, t_end: f64, n_ref: usize) -> Result<Trajectory> {
        if n_ref < 10_000 {
            return Err(Error::invalid("reference step count must be at least 10^4"));
        }
        let tol = OracleTolerances::reference();
        let scheme = SchemeSpec::Pngs {
            abstol: tol.abstol,
            reltol: tol.reltol,
        };
        integrate(&scheme, &self.system(), &self.field(), &self.x0, t_end, n_ref)
    }
}

fn check_disk_params(n: usize, radius: f64, gamma: f64) -> Result<()> {
    if n < 2 {
        return Err(Error::invalid("need at least two disks"));
    }
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::invalid("disk radius must be positive"));
    }
    if !(gamma >= 0.0 && gamma.is_finite()) {
        return Err(Error::invalid("attraction strength must be non-negative"));
    }
    Ok(())
}

/// Non-overlap constraints for `n` planar disks of the given radius, in
/// lexicographic order.
pub fn disks_system(n: usize, radius: f64) -> Result<ConstraintSystem> {
    disks_system_in(n, 2, radius)
}

/// Like [`disks_system`] for spheres in `dim` dimensions.
pub fn disks_system_in(n: usize, dim: usize, radius: f64) -> Result<ConstraintSystem> {
    if n < 2 {
        return Err(Error::invalid("need at least two disks"));
    }
    let mut cs = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            cs.push(PairwiseDistance::new(i, j, dim, 2.0 * radius)?.into());
        }
    }
    ConstraintSystem::new(n * dim, cs)
}

/// Either benchmark problem.
#[derive(Debug, Clone, PartialEq)]
pub enum Problem {
    Sliding(SlidingProblem),
    Disks(DisksProblem),
}

impl Problem {
    pub fn system(&self) -> ConstraintSystem {
        match self {
            Problem::Sliding(p) => p.system(),
            Problem::Disks(p) => p.system(),
        }
    }

    pub fn x0(&self) -> StateVector {
        match self {
            Problem::Sliding(p) => p.x0(),
            Problem::Disks(p) => p.x0().clone(),
        }
    }

    pub fn field(&self) -> Box<dyn VectorField + Send> {
        match self {
            Problem::Sliding(p) => Box::new(p.field()),
            Problem::Disks(p) => Box::new(p.field()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use core::f64::consts::PI;

    #[test]
    fn sliding_constants_for_pi_over_16() {
        let k = SlidingConstants::new(PI / 16.0).unwrap();
        // e^{C1} = tan(α/2)
        let tan_half = libm::tan(PI / 32.0);
        assert_abs_diff_eq!(k.c1, libm::log(tan_half), epsilon = 1e-13);
        assert_abs_diff_eq!(k.c1, -2.3178, epsilon = 1e-4);
        assert_abs_diff_eq!(k.c2, 2.0 * tan_half, epsilon = 1e-13);
        assert_abs_diff_eq!(k.c2, 0.196_982_7, epsilon = 1e-6);
        assert_abs_diff_eq!(k.t_exit, -k.c1, epsilon = 0.0);
        assert_abs_diff_eq!(k.c2, 2.0 * libm::exp(k.c1), epsilon = 1e-10);
    }

    #[test]
    fn alpha_must_be_in_open_interval() {
        assert!(SlidingConstants::new(0.0).is_err());
        assert!(SlidingConstants::new(PI).is_err());
        assert!(SlidingProblem::new(3, 10.0, PI).is_err());
        assert!(SlidingProblem::new(2, 10.0, 0.5).is_err());
        assert!(SlidingProblem::new(3, 0.0, 0.5).is_err());
    }

    #[test]
    fn sliding_exact_at_zero_and_exit() {
        let p = SlidingProblem::new(3, 10.0, PI / 16.0).unwrap();
        let x = p.exact(0.0).unwrap();
        assert_abs_diff_eq!(x[0], libm::sin(PI / 16.0), epsilon = 1e-14);
        assert_abs_diff_eq!(x[1], libm::cos(PI / 16.0), epsilon = 1e-14);
        assert_eq!(x[2], 0.0);
        assert_abs_diff_eq!(x[0], 0.195_090, epsilon = 1e-6);
        assert_abs_diff_eq!(x[1], 0.980_785, epsilon = 1e-6);

        let k = p.constants();
        let at_exit = p.exact(k.t_exit).unwrap();
        let after = p.exact(k.t_exit + 1e-12).unwrap();
        for (a, b) in at_exit.iter().zip([1.0, 0.0, 0.0]) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-9);
        }
        for (a, b) in after.iter().zip([1.0, 0.0, 0.0]) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-9);
        }
    }

    #[test]
    fn sliding_system_d3() {
        let p = SlidingProblem::new(3, 10.0, PI / 16.0).unwrap();
        let sys = p.system();
        assert_eq!(sys.len(), 2);
        let r = libm::sqrt(101.0);
        let x0 = p.x0();
        for c in sys.constraints() {
            let Constraint::ExcludedBall(b) = c else { panic!("expected sphere exteriors") };
            assert_abs_diff_eq!(b.radius(), r, epsilon = 1e-15);
            assert_abs_diff_eq!(dist(&x0, b.center()), r, epsilon = 1e-12);
        }
        let centers = p.centers();
        assert_eq!(centers[0], vec![0.0, 0.0, 10.0]);
        assert_eq!(centers[1], vec![0.0, 0.0, -10.0]);
    }

    #[test]
    fn sliding_system_higher_dims() {
        for d in 3..8 {
            let p = SlidingProblem::new(d, 3.0, 1.0).unwrap();
            let sys = p.system();
            assert_eq!(sys.len(), d - 1);
            for c in p.centers() {
                assert_abs_diff_eq!(dist(&p.x0(), &c), p.radius(), epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn post_exit_free_fall() {
        let p = SlidingProblem::new(3, 10.0, PI / 16.0).unwrap();
        let t = p.constants().t_exit + 0.5;
        let h = 1e-6;
        let a = p.exact(t - h).unwrap();
        let b = p.exact(t + h).unwrap();
        let vel: Vec<f64> = a.iter().zip(b.iter()).map(|(x, y)| (y - x) / (2.0 * h)).collect();
        for (v, e) in vel.iter().zip([0.0, -1.0, 0.0]) {
            assert_abs_diff_eq!(*v, e, epsilon = 1e-6);
        }
    }

    #[test]
    fn obtuse_alpha_falls_freely() {
        let p = SlidingProblem::new(3, 10.0, 2.0).unwrap();
        let x = p.exact(0.7).unwrap();
        assert_abs_diff_eq!(x[0], libm::sin(2.0), epsilon = 1e-15);
        assert_abs_diff_eq!(x[1], libm::cos(2.0) - 0.7, epsilon = 1e-15);
    }

    #[test]
    fn disks_counts() {
        assert_eq!(disks_system(2, 0.1).unwrap().len(), 1);
        assert_eq!(disks_system(40, 0.1).unwrap().len(), 780);
        assert!(disks_system(1, 0.1).is_err());
    }

    #[test]
    fn generated_disks_are_feasible_and_seeded() {
        let a = DisksProblem::generate(40, 0.1, 1.0, 7).unwrap();
        let b = DisksProblem::generate(40, 0.1, 1.0, 7).unwrap();
        let c = DisksProblem::generate(40, 0.1, 1.0, 8).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.x0(), c.x0());
        assert_eq!(a.system().max_constraint_distance(a.x0()).unwrap(), 0.0);
        assert!(DisksProblem::generate(1, 0.1, 1.0, 0).is_err());
    }

    #[test]
    fn from_parts_rejects_overlap() {
        let x0 = StateVector::new(vec![0.0, 0.0, 0.1, 0.0]).unwrap();
        assert!(DisksProblem::from_parts(2, 0.1, 1.0, x0, None).is_err());
    }
}
