//! Array steering vectors, fading channel synthesis and the composite
//! radar/communication channel matrices.
//!
//! Conventions:
//!
//! * all spacings are in wavelengths, so phases read `2π·n·d·(...)`;
//! * the IRS is an `N_y × N_x` planar array and its steering vector is
//!   `a_y ⊗ a_x`, i.e. element `y·N_x + x`. The row factor uses the phase
//!   increment `2π d cos φ_h sin φ_v`, the column factor `2π d sin φ_h sin φ_v`;
//! * fading entries are circularly symmetric complex Gaussian with unit
//!   variance. Large-scale loss lives in `η` and the per-channel scales.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use std::f64::consts::{FRAC_1_SQRT_2, PI};

use crate::linalg::{outer_t, phasor};
use crate::objective::PhaseVector;
use crate::{CMatrix, CVector, Error, Result};

/// Radar and IRS array layout plus the target direction seen from the IRS.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemGeometry {
    /// `M`, antennas of both the transmit and the receive ULA.
    pub num_radar_antennas: usize,
    /// `N_y`, IRS elements per column.
    pub irs_rows: usize,
    /// `N_x`, IRS elements per row.
    pub irs_cols: usize,
    /// Radar element spacing in wavelengths.
    pub radar_spacing: f64,
    /// IRS element spacing in wavelengths.
    pub irs_spacing: f64,
    /// `φ_h` in radians.
    pub target_azimuth: f64,
    /// `φ_v` in radians.
    pub target_elevation: f64,
}

impl SystemGeometry {
    pub fn num_irs_elements(&self) -> usize {
        self.irs_rows.saturating_mul(self.irs_cols)
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_radar_antennas == 0 {
            return Err(Error::param("num_radar_antennas", "must be at least 1"));
        }
        if self.irs_rows == 0 || self.irs_cols == 0 {
            return Err(Error::param("irs_rows/irs_cols", "must be at least 1"));
        }
        if !(self.radar_spacing > 0.0 && self.radar_spacing.is_finite()) {
            return Err(Error::param("radar_spacing", "must be finite and > 0"));
        }
        if !(self.irs_spacing > 0.0 && self.irs_spacing.is_finite()) {
            return Err(Error::param("irs_spacing", "must be finite and > 0"));
        }
        if !self.target_azimuth.is_finite() || !self.target_elevation.is_finite() {
            return Err(Error::param("target angles", "must be finite"));
        }
        Ok(())
    }
}

/// Parameters of the random channel model beyond the array geometry.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelModel {
    /// `K`, single-antenna communication receivers.
    pub num_users: usize,
    /// Rician factor of the radar→IRS channel `G`, linear scale.
    pub rician_factor: f64,
    /// Round-trip radar-IRS-target-IRS-radar coefficient `η`.
    pub eta: Complex64,
    /// Departure angle of the radar→IRS line of sight at the radar ULA.
    pub los_departure: f64,
    /// Arrival azimuth of the radar→IRS line of sight at the IRS.
    pub los_arrival_azimuth: f64,
    /// Arrival elevation of the radar→IRS line of sight at the IRS.
    pub los_arrival_elevation: f64,
    /// Amplitude scale applied to `G`.
    pub scale_g: f64,
    /// Amplitude scale applied to `F`.
    pub scale_f: f64,
    /// Amplitude scale applied to `H`.
    pub scale_h: f64,
}

impl Default for ChannelModel {
    fn default() -> Self {
        ChannelModel {
            num_users: 5,
            rician_factor: 1.0,
            eta: Complex64::new(1.0, 0.0),
            los_departure: 0.0,
            los_arrival_azimuth: 0.0,
            los_arrival_elevation: 0.0,
            scale_g: 1.0,
            scale_f: 1.0,
            scale_h: 1.0,
        }
    }
}

impl ChannelModel {
    pub fn validate(&self) -> Result<()> {
        if self.num_users == 0 {
            return Err(Error::param("num_users", "must be at least 1"));
        }
        if self.rician_factor.is_nan() || self.rician_factor < 0.0 {
            return Err(Error::param("rician_factor", "must be >= 0"));
        }
        if !(self.eta.re.is_finite() && self.eta.im.is_finite()) {
            return Err(Error::param("eta", "must be finite"));
        }
        for (name, s) in [
            ("scale_g", self.scale_g),
            ("scale_f", self.scale_f),
            ("scale_h", self.scale_h),
        ] {
            if !(s.is_finite() && s >= 0.0) {
                return Err(Error::param(name, "must be finite and >= 0"));
            }
        }
        Ok(())
    }
}

/// Seed for all channel randomness. Each channel matrix draws from its own
/// ChaCha stream so that changing one dimension does not reshuffle the
/// others.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RngSeed(pub u64);

impl RngSeed {
    pub fn rng(self, stream: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.0);
        rng.set_stream(stream);
        rng
    }

    /// Seed of Monte-Carlo realization `index`.
    pub fn realization(self, index: u64) -> RngSeed {
        RngSeed(self.0.wrapping_add(index))
    }
}

const STREAM_G: u64 = 1;
const STREAM_F: u64 = 2;
const STREAM_H: u64 = 3;
pub(crate) const STREAM_THETA: u64 = 4;

/// The channel matrices of one realization.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSet {
    /// Radar → IRS, `N × M`.
    pub g: CMatrix,
    /// Radar → users, `K × M`.
    pub f: CMatrix,
    /// IRS → users, `K × N`.
    pub h: CMatrix,
    pub eta: Complex64,
}

impl ChannelSet {
    pub fn new(g: CMatrix, f: CMatrix, h: CMatrix, eta: Complex64) -> Result<Self> {
        let set = ChannelSet { g, f, h, eta };
        set.check()?;
        Ok(set)
    }

    fn check(&self) -> Result<()> {
        let (n, m) = self.g.shape();
        let k = self.f.nrows();
        if self.f.ncols() != m {
            return Err(Error::dims(
                "ChannelSet F",
                format!("K×{m}"),
                format!("{}×{}", k, self.f.ncols()),
            ));
        }
        if self.h.shape() != (k, n) {
            return Err(Error::dims(
                "ChannelSet H",
                format!("{k}×{n}"),
                format!("{}×{}", self.h.nrows(), self.h.ncols()),
            ));
        }
        if m == 0 || n == 0 || k == 0 {
            return Err(Error::param("ChannelSet", "all dimensions must be >= 1"));
        }
        Ok(())
    }

    pub fn num_radar_antennas(&self) -> usize {
        self.g.ncols()
    }

    pub fn num_irs_elements(&self) -> usize {
        self.g.nrows()
    }

    pub fn num_users(&self) -> usize {
        self.f.nrows()
    }

    /// Draws `G` (Rician), `F` and `H` (Rayleigh) for one realization.
    pub fn synthesize(
        geometry: &SystemGeometry,
        model: &ChannelModel,
        seed: RngSeed,
    ) -> Result<Self> {
        geometry.validate()?;
        model.validate()?;
        let m = geometry.num_radar_antennas;
        let n = geometry.num_irs_elements();
        let k = model.num_users;

        let los = radar_irs_los(geometry, model);
        let g = rician_channel_with(&los, model.rician_factor, &mut seed.rng(STREAM_G))?
            .scale(model.scale_g);
        let f = rayleigh_channel_with(k, m, &mut seed.rng(STREAM_F)).scale(model.scale_f);
        let h = rayleigh_channel_with(k, n, &mut seed.rng(STREAM_H)).scale(model.scale_h);
        ChannelSet::new(g, f, h, model.eta)
    }
}

/// ULA steering vector `[e^{j 2π m d sin ψ}]_{m=0}^{len-1}`.
pub fn ula_steering(len: usize, spacing: f64, angle: f64) -> CVector {
    let step = 2.0 * PI * spacing * angle.sin();
    CVector::from_fn(len, |m, _| phasor(step * m as f64))
}

/// UPA steering vector `a_y(φ_h, φ_v) ⊗ a_x(φ_h, φ_v)` for an array of
/// `rows × cols` elements.
pub fn upa_steering_at(
    rows: usize,
    cols: usize,
    spacing: f64,
    azimuth: f64,
    elevation: f64,
) -> CVector {
    let step_y = 2.0 * PI * spacing * azimuth.cos() * elevation.sin();
    let step_x = 2.0 * PI * spacing * azimuth.sin() * elevation.sin();
    let mut out = CVector::zeros(rows * cols);
    for y in 0..rows {
        for x in 0..cols {
            out[y * cols + x] = phasor(step_y * y as f64) * phasor(step_x * x as f64);
        }
    }
    out
}

/// IRS steering vector towards the target.
pub fn upa_steering(geometry: &SystemGeometry) -> CVector {
    upa_steering_at(
        geometry.irs_rows,
        geometry.irs_cols,
        geometry.irs_spacing,
        geometry.target_azimuth,
        geometry.target_elevation,
    )
}

/// Rank-one line-of-sight component of `G`: `a_irs(arrival) · a_radar(departure)^T`.
pub fn radar_irs_los(geometry: &SystemGeometry, model: &ChannelModel) -> CMatrix {
    let irs = upa_steering_at(
        geometry.irs_rows,
        geometry.irs_cols,
        geometry.irs_spacing,
        model.los_arrival_azimuth,
        model.los_arrival_elevation,
    );
    let radar = ula_steering(
        geometry.num_radar_antennas,
        geometry.radar_spacing,
        model.los_departure,
    );
    outer_t(&irs, &radar)
}

fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * FRAC_1_SQRT_2
}

/// i.i.d. `CN(0, 1)` matrix from an explicit generator, filled row by row.
pub fn rayleigh_channel_with<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    let mut out = CMatrix::zeros(rows, cols);
    for r in 0..rows {
        for c in 0..cols {
            out[(r, c)] = complex_gaussian(rng);
        }
    }
    out
}

/// i.i.d. `CN(0, 1)` matrix; a pure function of `(rows, cols, seed)`.
pub fn rayleigh_channel(rows: usize, cols: usize, seed: RngSeed) -> CMatrix {
    rayleigh_channel_with(rows, cols, &mut seed.rng(0))
}

/// `sqrt(K/(1+K))·los + sqrt(1/(1+K))·CN(0,1)`. An infinite factor returns
/// the line-of-sight matrix unchanged.
pub fn rician_channel_with<R: Rng + ?Sized>(
    los: &CMatrix,
    k_factor: f64,
    rng: &mut R,
) -> Result<CMatrix> {
    if k_factor.is_nan() || k_factor < 0.0 {
        return Err(Error::param(
            "rician_factor",
            format!("must be >= 0, got {k_factor}"),
        ));
    }
    if k_factor.is_infinite() {
        return Ok(los.clone());
    }
    let los_gain = (k_factor / (1.0 + k_factor)).sqrt();
    let nlos_gain = (1.0 / (1.0 + k_factor)).sqrt();
    let diffuse = rayleigh_channel_with(los.nrows(), los.ncols(), rng);
    Ok(los.scale(los_gain) + diffuse.scale(nlos_gain))
}

pub fn rician_channel(los: &CMatrix, k_factor: f64, seed: RngSeed) -> Result<CMatrix> {
    rician_channel_with(los, k_factor, &mut seed.rng(0))
}

/// `G^T Θ a_R` with `Θ = diag(θ)`; the radar channel is `η u u^T`.
pub fn radar_cascade(channels: &ChannelSet, theta: &PhaseVector, a_r: &CVector) -> Result<CVector> {
    let n = channels.num_irs_elements();
    if theta.len() != n {
        return Err(Error::dims("phase vector", n, theta.len()));
    }
    if a_r.len() != n {
        return Err(Error::dims("IRS steering vector", n, a_r.len()));
    }
    let weighted = theta.as_vector().component_mul(a_r);
    Ok(channels.g.transpose() * weighted)
}

/// `F_r = η G^T Θ a_R a_R^T Θ G`, an `M × M` matrix of rank at most one.
pub fn composite_radar_channel(
    channels: &ChannelSet,
    theta: &PhaseVector,
    a_r: &CVector,
) -> Result<CMatrix> {
    let u = radar_cascade(channels, theta, a_r)?;
    Ok(outer_t(&u, &u) * channels.eta)
}

/// `F_c = F + H Θ G`, a `K × M` matrix.
pub fn composite_comm_channel(channels: &ChannelSet, theta: &PhaseVector) -> Result<CMatrix> {
    let n = channels.num_irs_elements();
    if theta.len() != n {
        return Err(Error::dims("phase vector", n, theta.len()));
    }
    let mut h_theta = channels.h.clone();
    for (c, t) in theta.as_vector().iter().enumerate() {
        for r in 0..h_theta.nrows() {
            h_theta[(r, c)] *= t;
        }
    }
    Ok(&channels.f + h_theta * &channels.g)
}
