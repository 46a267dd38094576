//! Transmit covariance design for a fixed IRS configuration:
//!
//! ```text
//! maximize tr(R_w C)  s.t.  R_w ⪰ 0,  tr(R_w) = P0,  ‖R_w - R_d‖_F ≤ γ_bp
//! ```
//!
//! followed by `W = R_w^{1/2}`.
//!
//! Two solvers are provided. [`SolverMethod::ProximalBisection`] uses the
//! fact that for a multiplier `μ > 0` on the ball constraint the maximizer
//! over `{PSD, tr = P0}` of `tr(R C) - μ/2 ‖R - R_d‖²` is the projection
//! `P(R_d + C/μ)`, which costs one eigendecomposition; the distance
//! `‖P(R_d + sC) - R_d‖` is nondecreasing in `s = 1/μ`, so the active
//! multiplier is found by bisection. [`SolverMethod::ProjectedGradient`] is
//! plain projected gradient ascent with step `1/‖C‖_F` and Dykstra
//! projections onto the feasible set.

use crate::linalg::{
    frobenius, hermitian_defect, hermitian_part, max_abs, project_simplex, trace_product_re,
    HermitianEigen,
};
use crate::{CMatrix, Error, Result};

/// Desired covariance `R_d` and the admissible Frobenius deviation `γ_bp`.
#[derive(Debug, Clone, PartialEq)]
pub struct BeampatternSpec {
    pub desired: CMatrix,
    pub gamma: f64,
}

/// Relative tolerance on `tr(R_d) = P0`.
pub const TRACE_TOLERANCE: f64 = 1e-8;

impl BeampatternSpec {
    /// `R_d = (P0/M) I`.
    pub fn omnidirectional(m: usize, p0: f64, gamma: f64) -> Self {
        BeampatternSpec {
            desired: CMatrix::identity(m, m).scale(p0 / m as f64),
            gamma,
        }
    }

    pub fn dim(&self) -> usize {
        self.desired.nrows()
    }

    /// Checks that `R_d` is a feasible point for power budget `p0`.
    pub fn validate(&self, p0: f64) -> Result<()> {
        if !(p0 > 0.0 && p0.is_finite()) {
            return Err(Error::param("p0", "power budget must be finite and > 0"));
        }
        if !(self.gamma >= 0.0 && self.gamma.is_finite()) {
            return Err(Error::param("gamma_bp", "must be finite and >= 0"));
        }
        if !self.desired.is_square() || self.desired.nrows() == 0 {
            return Err(Error::InfeasibleSpec(
                "desired covariance must be square and non-empty".into(),
            ));
        }
        let scale = max_abs(&self.desired).max(f64::MIN_POSITIVE);
        if hermitian_defect(&self.desired) > 1e-10 * scale {
            return Err(Error::InfeasibleSpec(
                "desired covariance is not Hermitian".into(),
            ));
        }
        let trace = self.desired.trace().re;
        if (trace - p0).abs() > TRACE_TOLERANCE * p0 {
            return Err(Error::InfeasibleSpec(format!(
                "tr(R_d) = {trace} differs from P0 = {p0}"
            )));
        }
        let eig = HermitianEigen::new(&self.desired);
        if eig.min() < -1e-8 * eig.max().abs().max(f64::MIN_POSITIVE) {
            return Err(Error::InfeasibleSpec(format!(
                "desired covariance has negative eigenvalue {:e}",
                eig.min()
            )));
        }
        Ok(())
    }
}

/// A transmit covariance and its Hermitian square root.
#[derive(Debug, Clone, PartialEq)]
pub struct PrecoderCovariance {
    pub r_w: CMatrix,
    pub w: CMatrix,
}

impl PrecoderCovariance {
    pub fn from_covariance(r_w: CMatrix) -> Result<Self> {
        let w = matrix_sqrt(&r_w)?;
        Ok(PrecoderCovariance { r_w, w })
    }

    /// `tr(R_w C)`.
    pub fn objective(&self, c: &CMatrix) -> f64 {
        trace_product_re(&self.r_w, c)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverMethod {
    ProximalBisection,
    ProjectedGradient,
}

impl SolverMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            SolverMethod::ProximalBisection => "bisection",
            SolverMethod::ProjectedGradient => "projected_gradient",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub method: SolverMethod,
    /// Projected-gradient iteration cap.
    pub max_iterations: usize,
    /// Projected-gradient stop: `‖ΔR‖_F ≤ tolerance · max(1, ‖R‖_F)`.
    pub tolerance: f64,
    pub max_projection_cycles: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            method: SolverMethod::ProximalBisection,
            max_iterations: 5000,
            tolerance: 1e-10,
            max_projection_cycles: DEFAULT_PROJECTION_CYCLES,
        }
    }
}

pub const DEFAULT_PROJECTION_CYCLES: usize = 1000;

/// Constraint residuals of a candidate covariance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Feasibility {
    /// `|tr(R) - P0| / P0`.
    pub trace_residual: f64,
    /// `max(0, ‖R - R_d‖_F - γ_bp)`.
    pub ball_excess: f64,
    /// `max(0, -λ_min(R))`.
    pub psd_violation: f64,
    /// `max |R - R^H|`.
    pub hermitian_defect: f64,
}

impl Feasibility {
    pub fn of(r: &CMatrix, p0: f64, spec: &BeampatternSpec) -> Self {
        let eig = HermitianEigen::new(r);
        Feasibility {
            trace_residual: (r.trace().re - p0).abs() / p0,
            ball_excess: (frobenius(&(r - &spec.desired)) - spec.gamma).max(0.0),
            psd_violation: (-eig.min()).max(0.0),
            hermitian_defect: hermitian_defect(r),
        }
    }

    pub fn max_residual(&self) -> f64 {
        self.trace_residual
            .max(self.ball_excess)
            .max(self.psd_violation)
            .max(self.hermitian_defect)
    }
}

fn check_square(name: &'static str, a: &CMatrix, m: usize) -> Result<()> {
    if a.shape() != (m, m) {
        return Err(Error::dims(
            name,
            format!("{m}×{m}"),
            format!("{}×{}", a.nrows(), a.ncols()),
        ));
    }
    Ok(())
}

/// Projection onto `{R ⪰ 0, tr(R) = P0}`: eigenvalues projected onto the
/// scaled simplex.
pub fn project_psd_trace(x: &CMatrix, p0: f64) -> CMatrix {
    let eig = HermitianEigen::new(x);
    let values = project_simplex(&eig.values, p0);
    hermitian_part(&eig.reconstruct(&values))
}

/// Projection onto the Frobenius ball `‖R - center‖_F ≤ radius`.
pub fn project_ball(x: &CMatrix, center: &CMatrix, radius: f64) -> CMatrix {
    let offset = x - center;
    let dist = frobenius(&offset);
    if dist <= radius {
        x.clone()
    } else {
        center + offset.scale(radius / dist)
    }
}

/// Projection onto `{PSD} ∩ {tr = P0} ∩ {‖R - R_d‖_F ≤ γ_bp}` with default
/// cycle cap.
pub fn project_feasible(x: &CMatrix, p0: f64, spec: &BeampatternSpec) -> Result<CMatrix> {
    project_feasible_with(x, p0, spec, DEFAULT_PROJECTION_CYCLES)
}

/// Dykstra's alternating projection between `A = {PSD, tr = P0}` (exact,
/// spectral) and the beampattern ball `B`. Starting from a trace-`P0` point
/// the ball projection keeps the trace, so every `B` iterate lies on the
/// trace hyperplane and in the ball; iteration stops once it is also PSD
/// and stationary.
pub fn project_feasible_with(
    x: &CMatrix,
    p0: f64,
    spec: &BeampatternSpec,
    max_cycles: usize,
) -> Result<CMatrix> {
    spec.validate(p0)?;
    check_square("project_feasible", x, spec.dim())?;
    let scale = p0.max(frobenius(&spec.desired));
    let tol = 1e-13 * scale;

    let mut current = hermitian_part(x);
    let mut p = CMatrix::zeros(x.nrows(), x.ncols());
    let mut q = CMatrix::zeros(x.nrows(), x.ncols());
    let mut residual = f64::INFINITY;
    for _ in 0..max_cycles {
        let y = project_psd_trace(&(&current + &p), p0);
        p = &current + &p - &y;
        let next = project_ball(&(&y + &q), &spec.desired, spec.gamma);
        q = &y + &q - &next;
        let moved = frobenius(&(&next - &current));
        // distance between the two sets' iterates bounds the infeasibility
        residual = frobenius(&(&next - &y));
        current = next;
        if moved <= tol && residual <= 1e-10 * scale {
            let eig = HermitianEigen::new(&current);
            if eig.min() >= -1e-10 * scale {
                return Ok(current);
            }
        }
    }
    Err(Error::NoConvergence {
        what: "Dykstra projection",
        iterations: max_cycles,
        residual,
    })
}

/// Hermitian PSD square root `U diag(√λ) U^H`; eigenvalues down to
/// `-1e-6·λ_max` are clipped to zero.
pub fn matrix_sqrt(r: &CMatrix) -> Result<CMatrix> {
    if !r.is_square() {
        return Err(Error::dims(
            "matrix_sqrt",
            "square matrix",
            format!("{}×{}", r.nrows(), r.ncols()),
        ));
    }
    let eig = HermitianEigen::new(r);
    let (min, max) = (eig.min(), eig.max());
    if min < -1e-6 * max.abs() || (max <= 0.0 && min < 0.0) {
        return Err(Error::NotPsd {
            min_eigenvalue: min,
            max_eigenvalue: max,
        });
    }
    Ok(hermitian_part(&eig.reconstruct_with(|l| l.max(0.0).sqrt())))
}

fn validate_problem(c: &CMatrix, p0: f64, spec: &BeampatternSpec) -> Result<()> {
    spec.validate(p0)?;
    check_square("objective matrix C", c, spec.dim())?;
    if c.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
        return Err(Error::param("C", "entries must be finite"));
    }
    Ok(())
}

/// Solves the covariance problem with default options.
pub fn solve_covariance(
    c: &CMatrix,
    p0: f64,
    spec: &BeampatternSpec,
) -> Result<PrecoderCovariance> {
    solve_covariance_with(c, p0, spec, &SolverOptions::default(), None)
}

/// Solves the covariance problem. `warm_start` seeds the projected-gradient
/// method; the bisection method solves the convex problem globally and
/// ignores it.
pub fn solve_covariance_with(
    c: &CMatrix,
    p0: f64,
    spec: &BeampatternSpec,
    opts: &SolverOptions,
    warm_start: Option<&CMatrix>,
) -> Result<PrecoderCovariance> {
    let r_w = match opts.method {
        SolverMethod::ProximalBisection => solve_bisection(c, p0, spec)?,
        SolverMethod::ProjectedGradient => {
            let start = match warm_start {
                Some(r) => r.clone(),
                None => spec.desired.clone(),
            };
            projected_gradient(c, p0, spec, &start, opts)?.r_w
        }
    };
    PrecoderCovariance::from_covariance(r_w)
}

fn solve_bisection(c: &CMatrix, p0: f64, spec: &BeampatternSpec) -> Result<CMatrix> {
    validate_problem(c, p0, spec)?;
    let c = hermitian_part(c);
    let c_norm = frobenius(&c);
    if spec.gamma == 0.0 || c_norm == 0.0 {
        return Ok(spec.desired.clone());
    }
    let path = |s: f64| project_psd_trace(&(&spec.desired + c.scale(s)), p0);
    let distance = |r: &CMatrix| frobenius(&(r - &spec.desired));
    let scale = p0.max(frobenius(&spec.desired));

    // grow s until the ball binds or the path stops improving
    let mut lo = 0.0;
    let mut s = 1.0 / c_norm;
    let mut r_lo = spec.desired.clone();
    let mut obj_lo = trace_product_re(&r_lo, &c);
    let mut stalls = 0;
    let hi = loop {
        let r = path(s);
        if distance(&r) > spec.gamma {
            break s;
        }
        let obj = trace_product_re(&r, &c);
        if obj - obj_lo <= 1e-15 * obj.abs() {
            stalls += 1;
        } else {
            stalls = 0;
        }
        lo = s;
        r_lo = r;
        obj_lo = obj;
        if stalls >= 2 || s * c_norm > 1e15 * scale {
            return Ok(r_lo);
        }
        s *= 2.0;
    };

    let mut hi = hi;
    for _ in 0..200 {
        if hi - lo <= 1e-14 * hi {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let r = path(mid);
        if distance(&r) <= spec.gamma {
            lo = mid;
            r_lo = r;
        } else {
            hi = mid;
        }
    }
    Ok(r_lo)
}

/// Trajectory of a projected-gradient solve.
#[derive(Debug, Clone)]
pub struct GradientTrajectory {
    pub r_w: CMatrix,
    /// `tr(R_k C)` for every iterate, starting with the projected start point.
    pub objectives: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

/// Projected gradient ascent `R ← Proj(R + C/‖C‖_F)` from `start`.
pub fn projected_gradient(
    c: &CMatrix,
    p0: f64,
    spec: &BeampatternSpec,
    start: &CMatrix,
    opts: &SolverOptions,
) -> Result<GradientTrajectory> {
    validate_problem(c, p0, spec)?;
    check_square("start point", start, spec.dim())?;
    let c = hermitian_part(c);
    let c_norm = frobenius(&c);
    let mut r = project_feasible_with(start, p0, spec, opts.max_projection_cycles)?;
    let mut objectives = vec![trace_product_re(&r, &c)];
    if c_norm == 0.0 {
        return Ok(GradientTrajectory {
            r_w: r,
            objectives,
            iterations: 0,
            converged: true,
        });
    }
    let step = 1.0 / c_norm;
    let mut converged = false;
    let mut iterations = 0;
    while iterations < opts.max_iterations {
        iterations += 1;
        let next =
            project_feasible_with(&(&r + c.scale(step)), p0, spec, opts.max_projection_cycles)?;
        let moved = frobenius(&(&next - &r));
        r = next;
        objectives.push(trace_product_re(&r, &c));
        if moved <= opts.tolerance * frobenius(&r).max(1.0) {
            converged = true;
            break;
        }
    }
    Ok(GradientTrajectory {
        r_w: r,
        objectives,
        iterations,
        converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{rayleigh_channel, RngSeed};
    use num_complex::Complex64;

    fn diag(values: &[f64]) -> CMatrix {
        CMatrix::from_diagonal(&crate::CVector::from_iterator(
            values.len(),
            values.iter().map(|&v| Complex64::new(v, 0.0)),
        ))
    }

    fn random_psd(m: usize, seed: u64) -> CMatrix {
        let a = rayleigh_channel(m, m, RngSeed(seed));
        hermitian_part(&(&a * a.adjoint()))
    }

    #[test]
    fn sqrt_cases() {
        let eye = CMatrix::identity(3, 3);
        assert!(max_abs(&(matrix_sqrt(&eye).unwrap() - &eye)) < 1e-14);
        let w = matrix_sqrt(&diag(&[4.0, 9.0])).unwrap();
        assert!(max_abs(&(w - diag(&[2.0, 3.0]))) < 1e-14);
        let r = random_psd(5, 1);
        let w = matrix_sqrt(&r).unwrap();
        assert!(frobenius(&(&w * w.adjoint() - &r)) / frobenius(&r) < 1e-10);
        assert!(matches!(
            matrix_sqrt(&diag(&[1.0, -0.5])),
            Err(Error::NotPsd { .. })
        ));
        // tiny negative eigenvalues are clipped
        assert!(matrix_sqrt(&diag(&[1.0, -1e-9])).is_ok());
    }

    #[test]
    fn spec_validation() {
        let spec = BeampatternSpec::omnidirectional(2, 2.0, 1.0);
        assert!(spec.validate(2.0).is_ok());
        assert!(matches!(spec.validate(3.0), Err(Error::InfeasibleSpec(_))));
        let c = CMatrix::identity(2, 2);
        assert!(matches!(
            solve_covariance(&c, 3.0, &spec),
            Err(Error::InfeasibleSpec(_))
        ));
        let not_psd = BeampatternSpec {
            desired: diag(&[3.0, -1.0]),
            gamma: 1.0,
        };
        assert!(not_psd.validate(2.0).is_err());
    }

    #[test]
    fn isotropic_objective_is_constant() {
        let spec = BeampatternSpec::omnidirectional(3, 6.0, 2.0);
        let c = CMatrix::identity(3, 3).scale(1.7);
        for method in [
            SolverMethod::ProximalBisection,
            SolverMethod::ProjectedGradient,
        ] {
            let opts = SolverOptions {
                method,
                ..Default::default()
            };
            let sol = solve_covariance_with(&c, 6.0, &spec, &opts, None).unwrap();
            assert!((sol.objective(&c) - 1.7 * 6.0).abs() < 1e-10);
            assert!(Feasibility::of(&sol.r_w, 6.0, &spec).max_residual() < 1e-8);
        }
    }

    #[test]
    fn zero_radius_returns_desired() {
        let desired = diag(&[1.5, 0.5]);
        let spec = BeampatternSpec {
            desired: desired.clone(),
            gamma: 0.0,
        };
        let c = random_psd(2, 3);
        for method in [
            SolverMethod::ProximalBisection,
            SolverMethod::ProjectedGradient,
        ] {
            let opts = SolverOptions {
                method,
                ..Default::default()
            };
            let sol = solve_covariance_with(&c, 2.0, &spec, &opts, None).unwrap();
            assert!(max_abs(&(sol.r_w - &desired)) < 1e-12);
        }
    }

    #[test]
    fn rank_one_optimum_when_ball_inactive() {
        // C = diag(1, 0), R_d = I, P0 = 2, γ = 2 ⇒ R_w = diag(2, 0)
        let spec = BeampatternSpec::omnidirectional(2, 2.0, 2.0);
        let c = diag(&[1.0, 0.0]);
        for method in [
            SolverMethod::ProximalBisection,
            SolverMethod::ProjectedGradient,
        ] {
            let opts = SolverOptions {
                method,
                ..Default::default()
            };
            let sol = solve_covariance_with(&c, 2.0, &spec, &opts, None).unwrap();
            assert!(
                (sol.objective(&c) - 2.0).abs() < 1e-9,
                "{method:?}: {}",
                sol.objective(&c)
            );
            assert!(max_abs(&(&sol.r_w - diag(&[2.0, 0.0]))) < 1e-8);
        }
    }

    #[test]
    fn ball_active_closed_form() {
        // PSD inactive: R = R_d + γ·C̃/‖C̃‖ with C̃ the trace-free part of C
        let p0 = 30.0;
        let spec = BeampatternSpec::omnidirectional(3, p0, 1.5);
        let c = random_psd(3, 8);
        let shift = c.trace().re / 3.0;
        let traceless = &c - CMatrix::identity(3, 3).scale(shift);
        let expect = &spec.desired + traceless.scale(spec.gamma / frobenius(&traceless));
        for method in [
            SolverMethod::ProximalBisection,
            SolverMethod::ProjectedGradient,
        ] {
            let opts = SolverOptions {
                method,
                ..Default::default()
            };
            let sol = solve_covariance_with(&c, p0, &spec, &opts, None).unwrap();
            let gap = (sol.objective(&c) - trace_product_re(&expect, &c)).abs()
                / trace_product_re(&expect, &c);
            assert!(gap < 1e-9, "{method:?}: gap {gap}");
        }
    }

    #[test]
    fn feasible_projection_cases() {
        let p0 = 4.0;
        let spec = BeampatternSpec::omnidirectional(3, p0, 1.0);
        let back = project_feasible(&spec.desired, p0, &spec).unwrap();
        assert!(max_abs(&(&back - &spec.desired)) < 1e-10);

        let eps = 0.3;
        let x = (&spec.desired + CMatrix::identity(3, 3).scale(eps)).scale(p0 / (p0 + 3.0 * eps));
        let out = project_feasible(&x, p0, &spec).unwrap();
        assert!((out.trace().re - p0).abs() < 1e-10);

        for seed in 0..10 {
            let x = hermitian_part(&rayleigh_channel(3, 3, RngSeed(seed))).scale(3.0);
            let out = project_feasible(&x, p0, &spec).unwrap();
            assert!(Feasibility::of(&out, p0, &spec).max_residual() < 1e-8);
            let again = project_feasible(&out, p0, &spec).unwrap();
            assert!(max_abs(&(again - &out)) < 1e-10);
        }
    }

    #[test]
    fn projected_gradient_is_monotone() {
        let p0 = 3.0;
        let spec = BeampatternSpec::omnidirectional(3, p0, 1.2);
        let c = random_psd(3, 21);
        let traj =
            projected_gradient(&c, p0, &spec, &spec.desired, &SolverOptions::default()).unwrap();
        assert!(traj.converged);
        for pair in traj.objectives.windows(2) {
            assert!(pair[1] >= pair[0] - 1e-10 * pair[0].abs().max(1.0));
        }
        let exact = solve_covariance(&c, p0, &spec).unwrap();
        let best = exact.objective(&c);
        assert!((traj.objectives.last().unwrap() - best).abs() <= 1e-7 * best);
    }
}
