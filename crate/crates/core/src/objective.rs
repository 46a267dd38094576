//! Receiver SNRs, the weighted design objective and its quartic-in-θ form.
//!
//! For a fixed precoder `W` the weighted objective splits into
//! `f(θ) = t4(θ) + t2(θ) + t1(θ) + t0` with
//!
//! ```text
//! t4 = (1-α)|η|²/σ_r² · Σ_ij |θ^T Z_ij θ|²,   Z_ij = R ∘ (G w_j g_i^T)^T,  R = a_R a_R^T
//! t2 = θ^H D1 θ,                             D1 = (α/σ_c²)(H^H H) ∘ (G W W^H G^H)^T
//! t1 = 2 Re{θ^T v},                           v  = diag((α/σ_c²) G W W^H F^H H)
//! t0 = (α/σ_c²) tr(W W^H F^H F)
//! ```
//!
//! `ObjectiveBundle` holds these coefficients so that `f1 = t4 + t2 + t1`
//! and its gradient can be evaluated without rebuilding the channels.

use num_complex::Complex64;
use rand::Rng;
use std::f64::consts::PI;

use crate::channel::{composite_comm_channel, composite_radar_channel, ChannelSet};
use crate::linalg::{hermitian_part, phasor, trace_product_re};
use crate::{CMatrix, CVector, Error, Result};

/// IRS weights `θ`, every entry of unit modulus.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseVector(CVector);

impl PhaseVector {
    /// Accepted deviation `||θ_n| - 1|` for user-supplied vectors.
    pub const MODULUS_TOLERANCE: f64 = 1e-10;

    pub fn new(values: CVector) -> Result<Self> {
        let err = modulus_error(&values);
        if err.is_nan() || err > Self::MODULUS_TOLERANCE {
            return Err(Error::param(
                "theta",
                format!("entries must have unit modulus (max deviation {err:e})"),
            ));
        }
        Ok(PhaseVector(values))
    }

    /// Wraps values already normalized by the caller.
    pub(crate) fn from_normalized(values: CVector) -> Self {
        debug_assert!(modulus_error(&values) < 1e-9);
        PhaseVector(values)
    }

    /// No modulus check; for probe points of the finite-difference oracle,
    /// which sit off the manifold.
    pub(crate) fn from_raw(values: CVector) -> Self {
        PhaseVector(values)
    }

    pub fn all_ones(n: usize) -> Self {
        PhaseVector(CVector::from_element(n, Complex64::new(1.0, 0.0)))
    }

    pub fn from_angles(angles: &[f64]) -> Self {
        PhaseVector(CVector::from_iterator(
            angles.len(),
            angles.iter().map(|&a| phasor(a)),
        ))
    }

    /// Phases drawn uniformly from `[0, 2π)`.
    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        PhaseVector(CVector::from_fn(n, |_, _| {
            phasor(rng.random::<f64>() * 2.0 * PI)
        }))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_vector(&self) -> &CVector {
        &self.0
    }

    pub fn into_inner(self) -> CVector {
        self.0
    }

    /// Phases `arg θ_n` in `(-π, π]`.
    pub fn angles(&self) -> Vec<f64> {
        self.0.iter().map(|z| z.arg()).collect()
    }

    /// `max_n ||θ_n| - 1|`.
    pub fn modulus_error(&self) -> f64 {
        modulus_error(&self.0)
    }
}

fn modulus_error(v: &CVector) -> f64 {
    v.iter().fold(0.0_f64, |m, z| m.max((z.norm() - 1.0).abs()))
}

/// Objective weight `α` and receiver noise powers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DesignWeights {
    pub alpha: f64,
    pub sigma_r_sq: f64,
    pub sigma_c_sq: f64,
}

impl DesignWeights {
    pub fn new(alpha: f64, sigma_r_sq: f64, sigma_c_sq: f64) -> Result<Self> {
        let w = DesignWeights {
            alpha,
            sigma_r_sq,
            sigma_c_sq,
        };
        w.validate()?;
        Ok(w)
    }

    pub fn validate(&self) -> Result<()> {
        check_alpha(self.alpha)?;
        if !(self.sigma_r_sq > 0.0 && self.sigma_r_sq.is_finite()) {
            return Err(Error::param("sigma_r_sq", "must be finite and > 0"));
        }
        if !(self.sigma_c_sq > 0.0 && self.sigma_c_sq.is_finite()) {
            return Err(Error::param("sigma_c_sq", "must be finite and > 0"));
        }
        Ok(())
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if (0.0..=1.0).contains(&alpha) {
        Ok(())
    } else {
        Err(Error::param(
            "alpha",
            format!("must lie in [0, 1], got {alpha}"),
        ))
    }
}

fn received_snr(channel: &CMatrix, w: &CMatrix, noise: f64, context: &'static str) -> Result<f64> {
    if channel.ncols() != w.nrows() {
        return Err(Error::dims(
            context,
            format!("W with {} rows", channel.ncols()),
            w.nrows(),
        ));
    }
    let cov = w * w.adjoint();
    let received = channel * cov * channel.adjoint();
    Ok(received.trace().re / noise)
}

/// `γ_r = tr(F_r W W^H F_r^H) / σ_r²`.
pub fn radar_snr(f_r: &CMatrix, w: &CMatrix, sigma_r_sq: f64) -> Result<f64> {
    received_snr(f_r, w, sigma_r_sq, "radar_snr")
}

/// `γ_c = tr(F_c W W^H F_c^H) / σ_c²`.
pub fn comm_snr(f_c: &CMatrix, w: &CMatrix, sigma_c_sq: f64) -> Result<f64> {
    received_snr(f_c, w, sigma_c_sq, "comm_snr")
}

/// `(1-α)γ_r + αγ_c`.
pub fn weighted_objective(gamma_r: f64, gamma_c: f64, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    Ok((1.0 - alpha) * gamma_r + alpha * gamma_c)
}

/// `C = (1-α) F_r^H F_r / σ_r² + α F_c^H F_c / σ_c²`, so that the weighted
/// objective equals `tr(W W^H C)`.
pub fn build_c(f_r: &CMatrix, f_c: &CMatrix, weights: &DesignWeights) -> Result<CMatrix> {
    weights.validate()?;
    if f_r.ncols() != f_c.ncols() {
        return Err(Error::dims("build_c", f_r.ncols(), f_c.ncols()));
    }
    let radar = f_r
        .ad_mul(f_r)
        .scale((1.0 - weights.alpha) / weights.sigma_r_sq);
    let comm = f_c.ad_mul(f_c).scale(weights.alpha / weights.sigma_c_sq);
    Ok(hermitian_part(&(radar + comm)))
}

/// SNRs of a complete design, composed directly from the channel model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DesignSnr {
    pub radar: f64,
    pub comm: f64,
    pub weighted: f64,
}

/// Builds `F_r`, `F_c` for `θ` and evaluates both SNRs and the weighted sum.
pub fn evaluate_design(
    channels: &ChannelSet,
    a_r: &CVector,
    theta: &PhaseVector,
    w: &CMatrix,
    weights: &DesignWeights,
) -> Result<DesignSnr> {
    let f_r = composite_radar_channel(channels, theta, a_r)?;
    let f_c = composite_comm_channel(channels, theta)?;
    let radar = radar_snr(&f_r, w, weights.sigma_r_sq)?;
    let comm = comm_snr(&f_c, w, weights.sigma_c_sq)?;
    Ok(DesignSnr {
        radar,
        comm,
        weighted: weighted_objective(radar, comm, weights.alpha)?,
    })
}

/// Precomputed coefficients of `f1(θ) = t4 + t2 + t1` for a fixed precoder.
#[derive(Debug, Clone, PartialEq)]
pub struct ObjectiveBundle {
    m: usize,
    /// `Z_ij` stored row-major in `(i, j)`.
    z: Vec<CMatrix>,
    pub d1: CMatrix,
    pub v: CVector,
    pub t0: f64,
    /// `(1-α)|η|²/σ_r²`.
    pub radar_scale: f64,
}

/// The three θ-dependent parts of `f1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct F1Terms {
    pub quartic: f64,
    pub quadratic: f64,
    pub linear: f64,
}

impl F1Terms {
    pub fn total(&self) -> f64 {
        self.quartic + self.quadratic + self.linear
    }
}

impl ObjectiveBundle {
    /// Assembles a bundle from explicit coefficients. `z` holds `M²` square
    /// matrices in row-major `(i, j)` order.
    pub fn from_parts(
        num_radar_antennas: usize,
        z: Vec<CMatrix>,
        d1: CMatrix,
        v: CVector,
        t0: f64,
        radar_scale: f64,
    ) -> Result<Self> {
        let n = v.len();
        if z.len() != num_radar_antennas * num_radar_antennas {
            return Err(Error::dims(
                "ObjectiveBundle Z count",
                num_radar_antennas * num_radar_antennas,
                z.len(),
            ));
        }
        if let Some(bad) = z.iter().find(|zij| zij.shape() != (n, n)) {
            return Err(Error::dims(
                "ObjectiveBundle Z_ij",
                format!("{n}×{n}"),
                format!("{:?}", bad.shape()),
            ));
        }
        if d1.shape() != (n, n) {
            return Err(Error::dims(
                "ObjectiveBundle D1",
                format!("{n}×{n}"),
                format!("{:?}", d1.shape()),
            ));
        }
        Ok(ObjectiveBundle {
            m: num_radar_antennas,
            z,
            d1,
            v,
            t0,
            radar_scale,
        })
    }

    /// A bundle with every coefficient zero.
    pub fn zeros(num_radar_antennas: usize, n: usize) -> Self {
        ObjectiveBundle {
            m: num_radar_antennas,
            z: vec![CMatrix::zeros(n, n); num_radar_antennas * num_radar_antennas],
            d1: CMatrix::zeros(n, n),
            v: CVector::zeros(n),
            t0: 0.0,
            radar_scale: 0.0,
        }
    }

    pub fn num_radar_antennas(&self) -> usize {
        self.m
    }

    pub fn num_irs_elements(&self) -> usize {
        self.v.len()
    }

    pub fn z(&self, i: usize, j: usize) -> &CMatrix {
        &self.z[i * self.m + j]
    }

    pub fn z_all(&self) -> &[CMatrix] {
        &self.z
    }

    pub(crate) fn check_theta(&self, theta: &PhaseVector) -> Result<()> {
        if theta.len() != self.num_irs_elements() {
            return Err(Error::dims(
                "phase vector",
                self.num_irs_elements(),
                theta.len(),
            ));
        }
        Ok(())
    }

    /// `h_ij(θ) = θ^T Z_ij θ` for all `(i, j)`, row-major.
    pub fn h_values(&self, theta: &PhaseVector) -> Vec<Complex64> {
        let t = theta.as_vector();
        self.z.iter().map(|zij| t.dot(&(zij * t))).collect()
    }

    pub fn terms(&self, theta: &PhaseVector) -> F1Terms {
        let quartic = if self.radar_scale == 0.0 {
            0.0
        } else {
            self.radar_scale
                * self
                    .h_values(theta)
                    .iter()
                    .map(|h| h.norm_sqr())
                    .sum::<f64>()
        };
        F1Terms {
            quartic,
            quadratic: self.quadratic_form(theta).re,
            linear: self.linear_term(theta),
        }
    }

    /// `θ^H D1 θ` with its (rounding-level) imaginary part kept.
    pub fn quadratic_form(&self, theta: &PhaseVector) -> Complex64 {
        let t = theta.as_vector();
        t.dotc(&(&self.d1 * t))
    }

    /// `2 Re{θ^T v}`.
    pub fn linear_term(&self, theta: &PhaseVector) -> f64 {
        2.0 * theta.as_vector().dot(&self.v).re
    }
}

/// Builds the coefficients of `f1` for precoder `W`.
pub fn build_bundle(
    channels: &ChannelSet,
    a_r: &CVector,
    w: &CMatrix,
    weights: &DesignWeights,
) -> Result<ObjectiveBundle> {
    weights.validate()?;
    let m = channels.num_radar_antennas();
    let n = channels.num_irs_elements();
    if a_r.len() != n {
        return Err(Error::dims("IRS steering vector", n, a_r.len()));
    }
    if w.shape() != (m, m) {
        return Err(Error::dims(
            "precoder W",
            format!("{m}×{m}"),
            format!("{}×{}", w.nrows(), w.ncols()),
        ));
    }
    let g = &channels.g;
    let gw = g * w;

    // Z_ij[n, l] = R[n, l] · g_i[n] · (G w_j)[l]
    let mut z = Vec::with_capacity(m * m);
    for i in 0..m {
        let left = a_r.component_mul(&g.column(i));
        for j in 0..m {
            let right = a_r.component_mul(&gw.column(j));
            z.push(&left * right.transpose());
        }
    }

    let comm_scale = weights.alpha / weights.sigma_c_sq;
    let r_w = hermitian_part(&(w * w.adjoint()));
    let hh = channels.h.ad_mul(&channels.h);
    let g_rw_gh = g * &r_w * g.adjoint();
    let d1 = hermitian_part(&hh.component_mul(&g_rw_gh.transpose()).scale(comm_scale));

    // v_n = (α/σ_c²) Σ_k (G R_w F^H)[n, k] H[k, n]
    let p = g * &r_w * channels.f.adjoint();
    let v = CVector::from_fn(n, |row, _| {
        let mut acc = Complex64::new(0.0, 0.0);
        for k in 0..channels.num_users() {
            acc += p[(row, k)] * channels.h[(k, row)];
        }
        acc * comm_scale
    });

    let t0 = comm_scale * trace_product_re(&r_w, &channels.f.ad_mul(&channels.f));
    let radar_scale = (1.0 - weights.alpha) * channels.eta.norm_sqr() / weights.sigma_r_sq;

    ObjectiveBundle::from_parts(m, z, d1, v, t0, radar_scale)
}

/// `f1(θ) = t4 + t2 + t1`.
pub fn eval_f1(theta: &PhaseVector, bundle: &ObjectiveBundle) -> Result<f64> {
    bundle.check_theta(theta)?;
    Ok(bundle.terms(theta).total())
}
