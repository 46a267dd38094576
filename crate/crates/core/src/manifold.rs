//! Riemannian gradient ascent on the complex circle manifold
//! `{θ ∈ C^N : |θ_n| = 1}`.
//!
//! Gradients follow the convention `∇f = 2 ∂f/∂θ*`, under which the
//! directional derivative of a real `f` along `u` is `Re{∇f^H u}` and the
//! tangent projection is `g - Re{g ∘ θ*} ∘ θ`.

use num_complex::Complex64;

use crate::objective::{ObjectiveBundle, PhaseVector};
use crate::{CVector, Error, Result};

/// Elements of `θ + δ·d` below this magnitude cannot be normalized.
pub const ZERO_ELEMENT_THRESHOLD: f64 = 1e-14;

/// A vector in the tangent space at `base`, i.e. `Re{x_n θ_n*} = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentVector {
    pub value: CVector,
    pub base: PhaseVector,
}

impl TangentVector {
    pub fn norm(&self) -> f64 {
        self.value.norm()
    }

    /// `max_n |Re{x_n θ_n*}|`.
    pub fn normal_residual(&self) -> f64 {
        self.value
            .iter()
            .zip(self.base.as_vector().iter())
            .fold(0.0_f64, |m, (x, t)| m.max((x * t.conj()).re.abs()))
    }
}

/// Step control for the manifold ascent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AscentConfig {
    /// Fixed step `δ`.
    pub step: f64,
    /// Ascent steps per call of [`ascent`].
    pub max_inner_steps: usize,
    /// Halve `δ` (at most [`MAX_HALVINGS`] times) until `f1` does not decrease.
    pub backtracking: bool,
}

pub const MAX_HALVINGS: usize = 20;

impl Default for AscentConfig {
    fn default() -> Self {
        AscentConfig {
            step: 0.1,
            max_inner_steps: 1,
            backtracking: false,
        }
    }
}

impl AscentConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.step > 0.0 && self.step.is_finite()) {
            return Err(Error::param("delta", "step size must be finite and > 0"));
        }
        if self.max_inner_steps == 0 {
            return Err(Error::param("inner_steps", "must be at least 1"));
        }
        Ok(())
    }
}

/// `f1(θ)` and `∇f1(θ)` sharing the `h_ij(θ)` evaluations.
pub fn value_and_gradient(theta: &PhaseVector, bundle: &ObjectiveBundle) -> Result<(f64, CVector)> {
    bundle.check_theta(theta)?;
    let t = theta.as_vector();
    let n = t.len();
    let mut grad = CVector::zeros(n);
    let mut quartic = 0.0;

    if bundle.radar_scale != 0.0 {
        // 2c · h · conj((Z + Z^T) θ) = 2c · h · (Z* + Z^H) θ*
        let mut acc = CVector::zeros(n);
        for z in bundle.z_all() {
            let zt = z * t;
            let ztt = z.tr_mul(t);
            let h = t.dot(&zt);
            quartic += h.norm_sqr();
            for k in 0..n {
                acc[k] += h * (zt[k] + ztt[k]).conj();
            }
        }
        quartic *= bundle.radar_scale;
        grad += acc * Complex64::new(2.0 * bundle.radar_scale, 0.0);
    }

    let d1t = &bundle.d1 * t;
    let quadratic = t.dotc(&d1t).re;
    let linear = bundle.linear_term(theta);
    for k in 0..n {
        grad[k] += 2.0 * d1t[k] + 2.0 * bundle.v[k].conj();
    }
    Ok((quartic + quadratic + linear, grad))
}

/// Euclidean gradient `∇f1 = 2 ∂f1/∂θ*`.
pub fn euclidean_gradient(theta: &PhaseVector, bundle: &ObjectiveBundle) -> Result<CVector> {
    value_and_gradient(theta, bundle).map(|(_, g)| g)
}

/// Central differences of `f1` over the `2N` real coordinates, assembled as
/// `∂f/∂Re θ_n + j ∂f/∂Im θ_n`. The perturbed points leave the manifold;
/// `f1` is evaluated as the polynomial it is.
pub fn finite_difference_gradient(
    theta: &PhaseVector,
    bundle: &ObjectiveBundle,
    h: f64,
) -> Result<CVector> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::param("h", "finite-difference step must be > 0"));
    }
    bundle.check_theta(theta)?;
    let base = theta.as_vector();
    let eval = |v: CVector| bundle.terms(&PhaseVector::from_raw(v)).total();
    let mut out = CVector::zeros(base.len());
    for k in 0..base.len() {
        let mut partial = [0.0; 2];
        for (slot, dir) in [Complex64::new(h, 0.0), Complex64::new(0.0, h)]
            .into_iter()
            .enumerate()
        {
            let mut plus = base.clone();
            plus[k] += dir;
            let mut minus = base.clone();
            minus[k] -= dir;
            partial[slot] = (eval(plus) - eval(minus)) / (2.0 * h);
        }
        out[k] = Complex64::new(partial[0], partial[1]);
    }
    Ok(out)
}

/// `g - Re{g ∘ θ*} ∘ θ`.
pub fn project_tangent(g: &CVector, theta: &PhaseVector) -> Result<TangentVector> {
    if g.len() != theta.len() {
        return Err(Error::dims("project_tangent", theta.len(), g.len()));
    }
    let value = CVector::from_fn(g.len(), |k, _| {
        let t = theta.as_vector()[k];
        g[k] - t * (g[k] * t.conj()).re
    });
    Ok(TangentVector {
        value,
        base: theta.clone(),
    })
}

/// Riemannian gradient of `f1` at `θ`.
pub fn riemannian_gradient(theta: &PhaseVector, bundle: &ObjectiveBundle) -> Result<TangentVector> {
    project_tangent(&euclidean_gradient(theta, bundle)?, theta)
}

/// Elementwise normalization of `θ + δ·d`.
pub fn retract(theta: &PhaseVector, dir: &TangentVector, step: f64) -> Result<PhaseVector> {
    if dir.value.len() != theta.len() {
        return Err(Error::dims("retract", theta.len(), dir.value.len()));
    }
    if !(step >= 0.0 && step.is_finite()) {
        return Err(Error::param("delta", "step must be finite and >= 0"));
    }
    let mut out = CVector::zeros(theta.len());
    for (k, (t, d)) in theta.as_vector().iter().zip(dir.value.iter()).enumerate() {
        let moved = t + d * step;
        let magnitude = moved.norm();
        if magnitude.is_nan() || magnitude < ZERO_ELEMENT_THRESHOLD {
            return Err(Error::ZeroElement {
                index: k,
                magnitude,
            });
        }
        out[k] = moved / magnitude;
    }
    Ok(PhaseVector::from_normalized(out))
}

/// One iteration: Euclidean gradient, tangent projection, retraction.
/// With backtracking enabled the step is halved until `f1` does not drop;
/// if no halving helps, `θ` is returned unchanged.
pub fn ascent_step(
    theta: &PhaseVector,
    bundle: &ObjectiveBundle,
    cfg: &AscentConfig,
) -> Result<PhaseVector> {
    cfg.validate()?;
    step_traced(theta, bundle, cfg).map(|(next, _)| next)
}

/// An ascent step that also reports the Riemannian gradient norm at `θ`.
fn step_traced(
    theta: &PhaseVector,
    bundle: &ObjectiveBundle,
    cfg: &AscentConfig,
) -> Result<(PhaseVector, f64)> {
    let (value, grad) = value_and_gradient(theta, bundle)?;
    let direction = project_tangent(&grad, theta)?;
    let norm = direction.norm();
    if !cfg.backtracking {
        return Ok((retract(theta, &direction, cfg.step)?, norm));
    }
    let mut step = cfg.step;
    for _ in 0..=MAX_HALVINGS {
        match retract(theta, &direction, step) {
            Ok(candidate) if bundle.terms(&candidate).total() >= value => {
                return Ok((candidate, norm))
            }
            Ok(_) | Err(Error::ZeroElement { .. }) => step *= 0.5,
            Err(e) => return Err(e),
        }
    }
    Ok((theta.clone(), norm))
}

/// Result of [`ascent`].
#[derive(Debug, Clone, PartialEq)]
pub struct AscentOutcome {
    pub theta: PhaseVector,
    /// Riemannian gradient norm at the starting point.
    pub initial_gradient_norm: f64,
}

/// `cfg.max_inner_steps` consecutive ascent steps.
pub fn ascent(
    theta: &PhaseVector,
    bundle: &ObjectiveBundle,
    cfg: &AscentConfig,
) -> Result<AscentOutcome> {
    cfg.validate()?;
    let (mut current, initial_gradient_norm) = step_traced(theta, bundle, cfg)?;
    for _ in 1..cfg.max_inner_steps {
        current = step_traced(&current, bundle, cfg)?.0;
    }
    Ok(AscentOutcome {
        theta: current,
        initial_gradient_norm,
    })
}
