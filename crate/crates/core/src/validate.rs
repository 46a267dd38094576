//! Self-checks run by `dfrc validate-gradient` and `dfrc validate-solver`.
//!
//! The gradient suite compares the analytic gradient of `f1` with central
//! finite differences and checks the manifold primitives. The solver suite
//! compares the covariance solver with random feasible points, the
//! `P0·λ_max(C)` value it must reach when the beampattern ball is inactive,
//! and the projected-gradient solver.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::fmt;

use crate::channel::{rayleigh_channel_with, ChannelSet};
use crate::linalg::{frobenius, trace_product_re, HermitianEigen};
use crate::manifold::{euclidean_gradient, finite_difference_gradient, project_tangent, retract};
use crate::objective::{build_bundle, eval_f1, DesignWeights, ObjectiveBundle, PhaseVector};
use crate::precoder::{
    projected_gradient, solve_covariance, BeampatternSpec, Feasibility, SolverMethod, SolverOptions,
};
use crate::{CMatrix, CVector, Result};

/// Result of one check: `passed` iff `measured ≤ tolerance`.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub tolerance: f64,
    pub measured: f64,
    pub passed: bool,
}

impl Check {
    pub fn new(name: impl Into<String>, tolerance: f64, measured: f64) -> Self {
        Check {
            name: name.into(),
            tolerance,
            measured,
            passed: measured <= tolerance,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Suite {
    pub name: &'static str,
    pub checks: Vec<Check>,
}

impl Suite {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn first_failure(&self) -> Option<&Check> {
        self.checks.iter().find(|c| !c.passed)
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let width = self
            .checks
            .iter()
            .map(|c| c.name.len())
            .max()
            .unwrap_or(5)
            .max(5);
        writeln!(
            f,
            "{:<width$}  {:>10}  {:>12}  result",
            "check", "tolerance", "measured"
        )?;
        let first = self.first_failure().map(|c| c.name.as_str());
        for c in &self.checks {
            let verdict = match (c.passed, Some(c.name.as_str()) == first) {
                (true, _) => "pass",
                (false, true) => "FAIL  <-- first failure",
                (false, false) => "FAIL",
            };
            writeln!(
                f,
                "{:<width$}  {:>10.1e}  {:>12.3e}  {verdict}",
                c.name, c.tolerance, c.measured
            )?;
        }
        Ok(())
    }
}

/// Deliberate defects used to check that the suites catch mistakes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fault {
    /// Use `2v` instead of `2v*` as gradient of the linear term.
    FlippedConjugate,
}

/// A random instance of the `θ` sub-problem.
#[derive(Debug, Clone)]
pub struct RandomProblem {
    pub channels: ChannelSet,
    pub a_r: CVector,
    pub w: CMatrix,
    pub weights: DesignWeights,
    pub theta: PhaseVector,
}

impl RandomProblem {
    pub fn new<R: Rng + ?Sized>(m: usize, n: usize, users: usize, rng: &mut R) -> Self {
        let eta = Complex64::new(rng.random_range(-1.5..1.5), rng.random_range(-1.5..1.5));
        let channels = ChannelSet::new(
            rayleigh_channel_with(n, m, rng),
            rayleigh_channel_with(users, m, rng),
            rayleigh_channel_with(users, n, rng),
            eta,
        )
        .expect("shapes are consistent");
        let a_r = PhaseVector::random(n, rng).into_inner();
        let w = rayleigh_channel_with(m, m, rng);
        let weights = DesignWeights {
            alpha: rng.random_range(0.05..0.95),
            sigma_r_sq: rng.random_range(0.5..2.0),
            sigma_c_sq: rng.random_range(0.5..2.0),
        };
        let theta = PhaseVector::random(n, rng);
        RandomProblem {
            channels,
            a_r,
            w,
            weights,
            theta,
        }
    }

    pub fn bundle(&self) -> Result<ObjectiveBundle> {
        build_bundle(&self.channels, &self.a_r, &self.w, &self.weights)
    }
}

fn relative_error(a: &CVector, b: &CVector) -> f64 {
    (a - b).norm() / b.norm().max(f64::MIN_POSITIVE)
}

fn analytic_gradient(
    theta: &PhaseVector,
    bundle: &ObjectiveBundle,
    fault: Option<Fault>,
) -> Result<CVector> {
    let g = euclidean_gradient(theta, bundle)?;
    Ok(match fault {
        None => g,
        Some(Fault::FlippedConjugate) => {
            g - bundle.v.conjugate() * Complex64::from(2.0) + &bundle.v * Complex64::from(2.0)
        }
    })
}

/// Finite-difference and manifold checks on `instances` random problems
/// with `M ≤ 4`, `N ≤ 16`.
pub fn gradient_suite(instances: usize, seed: u64, fault: Option<Fault>) -> Result<Suite> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut fd_error = 0.0f64;
    let mut directional = 0.0f64;
    let mut idempotence = 0.0f64;
    let mut normal = 0.0f64;
    let mut modulus = 0.0f64;
    for _ in 0..instances.max(1) {
        let m = rng.random_range(1..=4);
        let n = rng.random_range(1..=16);
        let users = rng.random_range(1..=4);
        let problem = RandomProblem::new(m, n, users, &mut rng);
        let bundle = problem.bundle()?;
        let theta = &problem.theta;

        let g = analytic_gradient(theta, &bundle, fault)?;
        let fd = finite_difference_gradient(theta, &bundle, 1e-6)?;
        fd_error = fd_error.max(relative_error(&g, &fd));

        // first-order change along a unit tangent direction
        let raw = CVector::from_fn(n, |_, _| {
            Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
        });
        let mut u = project_tangent(&raw, theta)?;
        let norm = u.norm();
        if norm > 0.0 {
            u.value /= Complex64::from(norm);
            let f0 = eval_f1(theta, &bundle)?;
            let predicted = g.dotc(&u.value).re;
            let h = 1e-6;
            let moved = retract(theta, &u, h)?;
            let slope = (eval_f1(&moved, &bundle)? - f0) / h;
            let scale = predicted.abs().max(g.norm()).max(1.0);
            directional = directional.max((slope - predicted).abs() / scale);
        }

        let once = project_tangent(&g, theta)?;
        let twice = project_tangent(&once.value, theta)?;
        idempotence =
            idempotence.max((&twice.value - &once.value).norm() / once.value.norm().max(1.0));
        normal = normal.max(once.normal_residual() / g.norm().max(1.0));
        modulus = modulus.max(retract(theta, &once, 0.1)?.modulus_error());
    }
    Ok(Suite {
        name: "gradient",
        checks: vec![
            Check::new("gradient vs finite differences (relative)", 1e-5, fd_error),
            Check::new("directional derivative along retraction", 1e-4, directional),
            Check::new("tangent projection idempotent", 1e-12, idempotence),
            Check::new("projection orthogonal to θ", 1e-12, normal),
            Check::new("retraction stays unit-modulus", 1e-12, modulus),
        ],
    })
}

/// Random trace-zero Hermitian direction with unit Frobenius norm.
pub fn random_direction<R: Rng + ?Sized>(m: usize, rng: &mut R) -> CMatrix {
    let a = rayleigh_channel_with(m, m, rng);
    let mut d = (&a + a.adjoint()).scale(0.5);
    let shift = d.trace() / Complex64::from(m as f64);
    for i in 0..m {
        d[(i, i)] -= shift;
    }
    let norm = frobenius(&d);
    if norm > 0.0 {
        d.unscale_mut(norm);
    }
    d
}

/// Largest `t ≥ 0` with `R_d + t·D` feasible, for unit-norm trace-zero `D`.
fn boundary_step(spec: &BeampatternSpec, d: &CMatrix) -> f64 {
    let psd = |t: f64| HermitianEigen::new(&(&spec.desired + d.scale(t))).min() >= 0.0;
    let mut hi = spec.gamma;
    if psd(hi) {
        return hi;
    }
    let mut lo = 0.0;
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if psd(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Draws up to `count` feasible covariance matrices: points on the boundary
/// of the feasible set along random directions from `R_d`, points inside it,
/// and rank-one `P0·uu^H` points that fall inside the ball. Returns the best
/// `tr(R C)` found.
pub fn best_sampled_objective<R: Rng + ?Sized>(
    c: &CMatrix,
    p0: f64,
    spec: &BeampatternSpec,
    count: usize,
    rng: &mut R,
) -> f64 {
    let m = spec.dim();
    let mut best = trace_product_re(&spec.desired, c);
    let feasible = |r: &CMatrix| Feasibility::of(r, p0, spec).max_residual() <= 1e-9 * p0.max(1.0);
    for k in 0..count {
        let r = match k % 4 {
            0 => {
                let u = PhaseVector::random(m, rng).into_inner();
                let mags = CVector::from_fn(m, |_, _| Complex64::from(rng.random::<f64>()));
                let u = u.component_mul(&mags);
                let norm = u.norm();
                if norm == 0.0 {
                    continue;
                }
                let u = u.unscale(norm);
                (&u * u.adjoint()).scale(p0)
            }
            1 => {
                let d = random_direction(m, rng);
                let t = boundary_step(spec, &d) * rng.random::<f64>().powf(1.0 / 8.0);
                &spec.desired + d.scale(t)
            }
            _ => {
                let d = random_direction(m, rng);
                &spec.desired + d.scale(boundary_step(spec, &d))
            }
        };
        if feasible(&r) {
            best = best.max(trace_product_re(&r, c));
        }
    }
    best
}

fn random_psd<R: Rng + ?Sized>(m: usize, rank: usize, rng: &mut R) -> CMatrix {
    let b = rayleigh_channel_with(rank, m, rng);
    b.adjoint() * b
}

/// Random `R_d` with trace `p0`: a mix of the scaled identity and a random
/// PSD matrix.
fn random_desired<R: Rng + ?Sized>(m: usize, p0: f64, rng: &mut R) -> CMatrix {
    let x = random_psd(m, m, rng) + CMatrix::identity(m, m).scale(0.5);
    let t = x.trace().re;
    x.scale(p0 / t)
}

/// Solver checks. `samples` random feasible points are drawn per sampled
/// instance.
pub fn solver_suite(samples: usize, seed: u64) -> Result<Suite> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut checks = Vec::new();
    let p0 = 10.0;

    for m in [2usize, 3] {
        let c = random_psd(m, 2, &mut rng);
        let spec = BeampatternSpec {
            desired: random_desired(m, p0, &mut rng),
            gamma: 0.25 * p0,
        };
        let solved = solve_covariance(&c, p0, &spec)?;
        let value = solved.objective(&c);
        let best = best_sampled_objective(&c, p0, &spec, samples, &mut rng);
        let gap = (best - value) / value.abs().max(f64::MIN_POSITIVE);
        if m == 2 {
            checks.push(Check::new(
                "M=2 solver vs best sample (two-sided gap)",
                1e-4,
                gap.abs(),
            ));
        } else {
            checks.push(Check::new(
                "M=3 best sample above solver (relative)",
                1e-4,
                gap.max(0.0),
            ));
        }
        checks.push(Check::new(
            format!("M={m} solution feasible (relative residual)"),
            1e-8,
            Feasibility::of(&solved.r_w, p0, &spec).max_residual() / p0,
        ));

        let opts = SolverOptions {
            method: SolverMethod::ProjectedGradient,
            ..SolverOptions::default()
        };
        let pg = projected_gradient(&c, p0, &spec, &spec.desired, &opts)?;
        let pg_value = trace_product_re(&pg.r_w, &c);
        checks.push(Check::new(
            format!("M={m} projected gradient agrees (relative)"),
            1e-6,
            ((pg_value - value) / value).abs(),
        ));

        let wide = BeampatternSpec::omnidirectional(m, p0, 2.0 * p0);
        let bound = p0 * HermitianEigen::new(&c).max();
        let reached = solve_covariance(&c, p0, &wide)?.objective(&c);
        checks.push(Check::new(
            format!("M={m} inactive ball reaches P0·λmax(C)"),
            1e-6,
            ((reached - bound) / bound).abs(),
        ));

        let tight = BeampatternSpec {
            gamma: 0.0,
            ..spec.clone()
        };
        let pinned = solve_covariance(&c, p0, &tight)?;
        checks.push(Check::new(
            format!("M={m} zero radius returns R_d"),
            1e-10,
            frobenius(&(&pinned.r_w - &tight.desired)) / p0,
        ));
    }
    Ok(Suite {
        name: "solver",
        checks,
    })
}
