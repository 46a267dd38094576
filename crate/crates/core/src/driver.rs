//! Alternating optimization of the precoder and the IRS phases, and the
//! Monte-Carlo experiments built on it.
//!
//! Iteration `j` of [`alternate`]:
//!
//! 1. build `F_r`, `F_c` and `C` from the current `θ`;
//! 2. solve the covariance problem for `R_w` and take `W = R_w^{1/2}`;
//! 3. rebuild the quartic coefficients for the new `W`;
//! 4. take `inner_steps` Riemannian ascent steps on `θ`;
//! 5. stop once `|f_j - f_{j-1}| / |f_{j-1}| ≤ ε` or `j = j_max`.
//!
//! Record 0 of every trace is the starting design: `θ_0` with the desired
//! covariance `R_d` as precoder covariance.

use rayon::prelude::*;
use std::time::Instant;

use crate::channel::{
    composite_comm_channel, composite_radar_channel, upa_steering, ChannelModel, ChannelSet,
    RngSeed, SystemGeometry, STREAM_THETA,
};
use crate::linalg::trace_product_re;
use crate::manifold::{ascent, AscentConfig};
use crate::objective::{build_bundle, build_c, evaluate_design, DesignWeights, PhaseVector};
use crate::precoder::{
    solve_covariance_with, BeampatternSpec, PrecoderCovariance, SolverMethod, SolverOptions,
};
use crate::{CMatrix, Error, Result};

/// Largest radar array accepted by [`RunConfig::validate`].
pub const MAX_RADAR_ANTENNAS: usize = 16;
/// Largest IRS accepted by [`RunConfig::validate`].
pub const MAX_IRS_ELEMENTS: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThetaInit {
    AllOnes,
    RandomPhases,
}

impl ThetaInit {
    pub fn as_str(self) -> &'static str {
        match self {
            ThetaInit::AllOnes => "all_ones",
            ThetaInit::RandomPhases => "random_phases",
        }
    }
}

/// How `R_d` is chosen.
#[derive(Debug, Clone, PartialEq)]
pub enum DesiredCovariance {
    /// `(P0/M) I`.
    Omnidirectional,
    /// An explicit Hermitian matrix; its trace must equal `P0`.
    Explicit(CMatrix),
}

/// Sweep lists and realization counts for the experiments.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentPlan {
    pub num_realizations: usize,
    /// `α` values of the convergence experiment.
    pub alphas: Vec<f64>,
    /// Power budgets (linear) of the power sweep.
    pub sweep_p0: Vec<f64>,
    pub sweep_radar_antennas: Vec<usize>,
    /// IRS layouts `(rows, cols)` of the power sweep.
    pub sweep_irs: Vec<(usize, usize)>,
}

impl ExperimentPlan {
    pub fn validate(&self) -> Result<()> {
        if self.num_realizations == 0 {
            return Err(Error::param("realizations", "must be at least 1"));
        }
        if self.alphas.is_empty() || self.alphas.iter().any(|a| !(0.0..=1.0).contains(a)) {
            return Err(Error::param(
                "alphas",
                "need at least one value, each in [0, 1]",
            ));
        }
        if self.sweep_p0.is_empty() || self.sweep_p0.iter().any(|p| !(*p > 0.0 && p.is_finite())) {
            return Err(Error::param(
                "sweep_p0",
                "need at least one value, each finite and > 0",
            ));
        }
        if self.sweep_radar_antennas.is_empty()
            || self
                .sweep_radar_antennas
                .iter()
                .any(|&m| m == 0 || m > MAX_RADAR_ANTENNAS)
        {
            return Err(Error::param(
                "sweep_radar_antennas",
                format!("need at least one value, each in 1..={MAX_RADAR_ANTENNAS}"),
            ));
        }
        if self.sweep_irs.is_empty()
            || self
                .sweep_irs
                .iter()
                .any(|&(r, c)| r == 0 || c == 0 || r.saturating_mul(c) > MAX_IRS_ELEMENTS)
        {
            return Err(Error::param(
                "sweep_irs",
                format!("need at least one layout, each with 1..={MAX_IRS_ELEMENTS} elements"),
            ));
        }
        Ok(())
    }
}

/// Everything needed to run one alternation or an experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub geometry: SystemGeometry,
    pub channel: ChannelModel,
    pub weights: DesignWeights,
    /// Transmit power budget `P0` (linear).
    pub p0: f64,
    pub desired_covariance: DesiredCovariance,
    /// Beampattern deviation radius `γ_bp` (linear Frobenius norm).
    pub gamma_bp: f64,
    /// Relative-change tolerance `ε` (linear).
    pub epsilon: f64,
    pub j_max: usize,
    pub ascent: AscentConfig,
    pub seed: RngSeed,
    pub theta_init: ThetaInit,
    pub solver: SolverMethod,
    pub plan: ExperimentPlan,
}

impl RunConfig {
    /// The simulation parameters used for the reference experiments:
    /// `ε = 1e-3`, `j_max = 500`, `δ = 0.1`, `K = 5`, `K_G = 1`,
    /// half-wavelength spacings, unit noise powers, `γ_bp = 10`, and a
    /// transmit SNR of 30 dB on an 8-antenna radar with an 8×8 IRS.
    pub fn table1() -> Self {
        RunConfig {
            geometry: SystemGeometry {
                num_radar_antennas: 8,
                irs_rows: 8,
                irs_cols: 8,
                radar_spacing: 0.5,
                irs_spacing: 0.5,
                target_azimuth: 30f64.to_radians(),
                target_elevation: 45f64.to_radians(),
            },
            channel: ChannelModel::default(),
            weights: DesignWeights {
                alpha: 0.5,
                sigma_r_sq: 1.0,
                sigma_c_sq: 1.0,
            },
            p0: 1000.0,
            desired_covariance: DesiredCovariance::Omnidirectional,
            gamma_bp: 10.0,
            epsilon: 1e-3,
            j_max: 500,
            ascent: AscentConfig::default(),
            seed: RngSeed(1),
            theta_init: ThetaInit::AllOnes,
            solver: SolverMethod::ProximalBisection,
            plan: ExperimentPlan {
                num_realizations: 20,
                alphas: vec![0.1, 0.5, 0.9],
                sweep_p0: vec![1.0, 10.0, 100.0, 1000.0],
                sweep_radar_antennas: vec![4, 8],
                sweep_irs: vec![(4, 4), (6, 6), (8, 8)],
            },
        }
    }

    /// The resolved beampattern constraint.
    pub fn beampattern(&self) -> BeampatternSpec {
        match &self.desired_covariance {
            DesiredCovariance::Omnidirectional => BeampatternSpec::omnidirectional(
                self.geometry.num_radar_antennas,
                self.p0,
                self.gamma_bp,
            ),
            DesiredCovariance::Explicit(desired) => BeampatternSpec {
                desired: desired.clone(),
                gamma: self.gamma_bp,
            },
        }
    }

    pub fn solver_options(&self) -> SolverOptions {
        SolverOptions {
            method: self.solver,
            ..SolverOptions::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.geometry.validate()?;
        self.channel.validate()?;
        self.weights.validate()?;
        self.ascent.validate()?;
        if self.geometry.num_radar_antennas > MAX_RADAR_ANTENNAS {
            return Err(Error::param(
                "num_radar_antennas",
                format!("at most {MAX_RADAR_ANTENNAS} supported"),
            ));
        }
        if self.geometry.num_irs_elements() > MAX_IRS_ELEMENTS {
            return Err(Error::param(
                "irs_rows/irs_cols",
                format!("at most {MAX_IRS_ELEMENTS} IRS elements supported"),
            ));
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::param("epsilon", "must be finite and > 0"));
        }
        if self.j_max == 0 {
            return Err(Error::param("j_max", "must be at least 1"));
        }
        if self.weights.alpha < 1.0 && self.channel.eta.norm() == 0.0 {
            return Err(Error::param(
                "eta",
                "must be nonzero when the radar term has positive weight",
            ));
        }
        if let DesiredCovariance::Explicit(desired) = &self.desired_covariance {
            let m = self.geometry.num_radar_antennas;
            if desired.shape() != (m, m) {
                return Err(Error::dims(
                    "desired covariance",
                    format!("{m}×{m}"),
                    format!("{}×{}", desired.nrows(), desired.ncols()),
                ));
            }
        }
        self.beampattern().validate(self.p0)
    }

    fn initial_theta(&self, seed: RngSeed) -> PhaseVector {
        let n = self.geometry.num_irs_elements();
        match self.theta_init {
            ThetaInit::AllOnes => PhaseVector::all_ones(n),
            ThetaInit::RandomPhases => PhaseVector::random(n, &mut seed.rng(STREAM_THETA)),
        }
    }
}

/// One row of a convergence trace.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub iteration: usize,
    /// Weighted objective `f1 + t0 = (1-α)γ_r + αγ_c`.
    pub objective: f64,
    pub radar_snr: f64,
    pub comm_snr: f64,
    /// Riemannian gradient norm at the `θ` the ascent started from.
    pub gradient_norm: f64,
    /// `tr(R_new C) - tr(R_old C)` of the precoder update (0 for record 0).
    pub precoder_gain: f64,
    pub elapsed_secs: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    Converged,
    HitCap,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceTrace {
    pub records: Vec<IterationRecord>,
    pub termination: Termination,
}

impl ConvergenceTrace {
    pub fn objectives(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.objective).collect()
    }

    pub fn initial_objective(&self) -> f64 {
        self.records[0].objective
    }

    pub fn final_objective(&self) -> f64 {
        self.records.last().map(|r| r.objective).unwrap_or(f64::NAN)
    }

    /// Index of the last iteration performed.
    pub fn iterations(&self) -> usize {
        self.records.last().map(|r| r.iteration).unwrap_or(0)
    }

    /// Relative change between the last two records.
    pub fn final_relative_change(&self) -> f64 {
        match self.records.as_slice() {
            [.., a, b] => relative_change(a.objective, b.objective),
            _ => f64::INFINITY,
        }
    }
}

fn relative_change(previous: f64, current: f64) -> f64 {
    if previous == 0.0 {
        if current == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        ((current - previous) / previous).abs()
    }
}

/// The design reached by an alternation.
#[derive(Debug, Clone, PartialEq)]
pub struct Design {
    pub theta: PhaseVector,
    pub precoder: PrecoderCovariance,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Alternation {
    pub trace: ConvergenceTrace,
    pub design: Design,
}

/// Runs the alternation on channels synthesized from `cfg.seed`.
pub fn alternate(cfg: &RunConfig) -> Result<ConvergenceTrace> {
    cfg.validate()?;
    let channels = ChannelSet::synthesize(&cfg.geometry, &cfg.channel, cfg.seed)?;
    Ok(alternate_with(cfg, &channels)?.trace)
}

/// Runs the alternation on the given channels.
pub fn alternate_with(cfg: &RunConfig, channels: &ChannelSet) -> Result<Alternation> {
    alternate_observed(cfg, channels, |_, _, _| {})
}

/// [`alternate_with`], calling `observe(j, θ_j, R_w)` after every outer
/// iteration (and once for the starting point, `j = 0`).
pub fn alternate_observed(
    cfg: &RunConfig,
    channels: &ChannelSet,
    mut observe: impl FnMut(usize, &PhaseVector, &PrecoderCovariance),
) -> Result<Alternation> {
    cfg.validate()?;
    let m = cfg.geometry.num_radar_antennas;
    let n = cfg.geometry.num_irs_elements();
    if channels.num_radar_antennas() != m || channels.num_irs_elements() != n {
        return Err(Error::dims(
            "channels vs geometry",
            format!("M={m}, N={n}"),
            format!(
                "M={}, N={}",
                channels.num_radar_antennas(),
                channels.num_irs_elements()
            ),
        ));
    }
    let started = Instant::now();
    let a_r = upa_steering(&cfg.geometry);
    let spec = cfg.beampattern();
    let solver = cfg.solver_options();
    let weights = &cfg.weights;

    let mut theta = cfg.initial_theta(cfg.seed);
    let mut precoder = PrecoderCovariance::from_covariance(spec.desired.clone())?;
    let start = evaluate_design(channels, &a_r, &theta, &precoder.w, weights)?;
    let start_bundle = build_bundle(channels, &a_r, &precoder.w, weights)?;
    let mut records = vec![IterationRecord {
        iteration: 0,
        objective: start.weighted,
        radar_snr: start.radar,
        comm_snr: start.comm,
        gradient_norm: crate::manifold::riemannian_gradient(&theta, &start_bundle)?.norm(),
        precoder_gain: 0.0,
        elapsed_secs: started.elapsed().as_secs_f64(),
    }];
    observe(0, &theta, &precoder);

    let mut termination = Termination::HitCap;
    for j in 1..=cfg.j_max {
        let f_r = composite_radar_channel(channels, &theta, &a_r)?;
        let f_c = composite_comm_channel(channels, &theta)?;
        let c = build_c(&f_r, &f_c, weights)?;
        let before = trace_product_re(&precoder.r_w, &c);
        precoder = solve_covariance_with(&c, cfg.p0, &spec, &solver, Some(&precoder.r_w))?;
        let precoder_gain = trace_product_re(&precoder.r_w, &c) - before;

        let bundle = build_bundle(channels, &a_r, &precoder.w, weights)?;
        let step = ascent(&theta, &bundle, &cfg.ascent)?;
        theta = step.theta;
        observe(j, &theta, &precoder);

        let snr = evaluate_design(channels, &a_r, &theta, &precoder.w, weights)?;
        let previous = records[records.len() - 1].objective;
        records.push(IterationRecord {
            iteration: j,
            objective: snr.weighted,
            radar_snr: snr.radar,
            comm_snr: snr.comm,
            gradient_norm: step.initial_gradient_norm,
            precoder_gain,
            elapsed_secs: started.elapsed().as_secs_f64(),
        });
        if relative_change(previous, snr.weighted) <= cfg.epsilon {
            termination = Termination::Converged;
            break;
        }
    }

    Ok(Alternation {
        trace: ConvergenceTrace {
            records,
            termination,
        },
        design: Design { theta, precoder },
    })
}

/// One realization of an experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    /// Sweep parameter value the run belongs to.
    pub param: f64,
    pub realization: usize,
    pub trace: ConvergenceTrace,
}

/// One row of a curve: mean and (population) standard deviation of the
/// weighted objective across realizations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    pub param: f64,
    pub iteration: usize,
    pub mean: f64,
    pub std: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    /// File-name friendly identifier, e.g. `alpha_0.1` or `M8_N64`.
    pub name: String,
    pub points: Vec<CurvePoint>,
    pub runs: Vec<RunRecord>,
}

impl Curve {
    /// Runs grouped by parameter value, in sweep order.
    pub fn runs_for(&self, param: f64) -> impl Iterator<Item = &RunRecord> {
        self.runs.iter().filter(move |r| r.param == param)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentKind {
    Convergence,
    PowerSweep,
}

impl ExperimentKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ExperimentKind::Convergence => "converge",
            ExperimentKind::PowerSweep => "sweep",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    pub kind: ExperimentKind,
    pub num_realizations: usize,
    pub curves: Vec<Curve>,
}

/// Mean and population standard deviation.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, 0.0);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

fn run_realizations(cfg: &RunConfig, num_realizations: usize) -> Result<Vec<ConvergenceTrace>> {
    (0..num_realizations)
        .into_par_iter()
        .map(|r| {
            let seed = cfg.seed.realization(r as u64);
            let channels = ChannelSet::synthesize(&cfg.geometry, &cfg.channel, seed)?;
            let run_cfg = RunConfig {
                seed,
                ..cfg.clone()
            };
            alternate_with(&run_cfg, &channels).map(|a| a.trace)
        })
        .collect()
}

fn check_realizations(num_realizations: usize) -> Result<()> {
    if num_realizations == 0 {
        return Err(Error::param("num_realizations", "must be at least 1"));
    }
    Ok(())
}

/// Convergence traces for every `α` in `cfg.plan.alphas`. Realization `r`
/// uses seed `cfg.seed + r`, so all `α` values see the same channels.
/// Shorter traces are held at their final value when aligning iterations.
pub fn run_convergence_experiment(
    cfg: &RunConfig,
    num_realizations: usize,
) -> Result<ExperimentResult> {
    check_realizations(num_realizations)?;
    if cfg.plan.alphas.is_empty() {
        return Err(Error::param("alphas", "need at least one value"));
    }
    let mut curves = Vec::with_capacity(cfg.plan.alphas.len());
    for &alpha in &cfg.plan.alphas {
        let alpha_cfg = RunConfig {
            weights: DesignWeights {
                alpha,
                ..cfg.weights
            },
            ..cfg.clone()
        };
        alpha_cfg.validate()?;
        let traces = run_realizations(&alpha_cfg, num_realizations)?;
        let longest = traces.iter().map(|t| t.records.len()).max().unwrap_or(0);
        let points = (0..longest)
            .map(|j| {
                let values: Vec<f64> = traces
                    .iter()
                    .map(|t| t.records[j.min(t.records.len() - 1)].objective)
                    .collect();
                let (mean, std) = mean_std(&values);
                CurvePoint {
                    param: alpha,
                    iteration: j,
                    mean,
                    std,
                }
            })
            .collect();
        let runs = traces
            .into_iter()
            .enumerate()
            .map(|(realization, trace)| RunRecord {
                param: alpha,
                realization,
                trace,
            })
            .collect();
        curves.push(Curve {
            name: format!("alpha_{alpha}"),
            points,
            runs,
        });
    }
    Ok(ExperimentResult {
        kind: ExperimentKind::Convergence,
        num_realizations,
        curves,
    })
}

/// Converged weighted SNR versus power budget, one curve per
/// `(M, IRS layout)` pair. Rows report the largest iteration count among
/// the realizations in the `iteration` column. An explicit `R_d` is
/// rescaled to each power budget.
pub fn run_power_sweep(
    cfg: &RunConfig,
    p0_list: &[f64],
    radar_antennas: &[usize],
    irs_layouts: &[(usize, usize)],
    num_realizations: usize,
) -> Result<ExperimentResult> {
    check_realizations(num_realizations)?;
    if p0_list.is_empty() || radar_antennas.is_empty() || irs_layouts.is_empty() {
        return Err(Error::param("sweep lists", "must all be nonempty"));
    }
    let mut curves = Vec::new();
    for &m in radar_antennas {
        for &(rows, cols) in irs_layouts {
            let mut points = Vec::with_capacity(p0_list.len());
            let mut runs = Vec::new();
            for &p0 in p0_list {
                let desired_covariance = match &cfg.desired_covariance {
                    DesiredCovariance::Omnidirectional => DesiredCovariance::Omnidirectional,
                    DesiredCovariance::Explicit(d) => {
                        DesiredCovariance::Explicit(d.scale(p0 / cfg.p0))
                    }
                };
                let point_cfg = RunConfig {
                    geometry: SystemGeometry {
                        num_radar_antennas: m,
                        irs_rows: rows,
                        irs_cols: cols,
                        ..cfg.geometry.clone()
                    },
                    p0,
                    desired_covariance,
                    ..cfg.clone()
                };
                point_cfg.validate()?;
                let traces = run_realizations(&point_cfg, num_realizations)?;
                let finals: Vec<f64> = traces.iter().map(|t| t.final_objective()).collect();
                let (mean, std) = mean_std(&finals);
                points.push(CurvePoint {
                    param: p0,
                    iteration: traces.iter().map(|t| t.iterations()).max().unwrap_or(0),
                    mean,
                    std,
                });
                runs.extend(
                    traces
                        .into_iter()
                        .enumerate()
                        .map(|(realization, trace)| RunRecord {
                            param: p0,
                            realization,
                            trace,
                        }),
                );
            }
            curves.push(Curve {
                name: format!("M{m}_N{}", rows * cols),
                points,
                runs,
            });
        }
    }
    Ok(ExperimentResult {
        kind: ExperimentKind::PowerSweep,
        num_realizations,
        curves,
    })
}
