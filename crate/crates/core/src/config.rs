//! Flat `key = value` configuration files.
//!
//! ```text
//! # comments run to the end of the line
//! preset = table1        # optional; fills every key not given below
//! alpha = 0.9
//! p0_db = 20             # same as p0 = 100
//! target_azimuth_deg = 30
//! desired_covariance = 4, 1+1j; 1-1j, 6
//! ```
//!
//! Without a preset every key is required. Keys with a decibel (`_db`) or
//! degree (`_deg`) form may be given in either form; if both appear they must
//! agree and the `_db`/`_deg` value wins. `--set key=value` overrides replace
//! both forms of the key. Decibel values are power ratios (`10^(x/10)`), also
//! for `gamma_bp_db`.
//!
//! [`print_config`] writes the canonical linear/radian form, which parses
//! back to an identical [`RunConfig`].

use num_complex::Complex64;
use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use crate::channel::{ChannelModel, RngSeed, SystemGeometry};
use crate::driver::{DesiredCovariance, ExperimentPlan, RunConfig, ThetaInit};
use crate::manifold::AscentConfig;
use crate::objective::DesignWeights;
use crate::precoder::SolverMethod;
use crate::{CMatrix, Error};

/// Where a value came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Origin {
    /// 1-based line of the config text.
    Line(usize),
    /// 1-based position among the `--set` overrides.
    Override(usize),
    /// Filled in by the named preset.
    Preset,
}

impl fmt::Display for Origin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Origin::Line(n) => write!(f, "line {n}"),
            Origin::Override(n) => write!(f, "override #{n}"),
            Origin::Preset => write!(f, "preset"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConfigError {
    #[error("missing required key `{key}` (no preset given)")]
    MissingKey { key: &'static str },

    #[error("{origin}: unknown key `{key}`")]
    UnknownKey { key: String, origin: Origin },

    #[error("{origin}: bad value for `{key}`: {reason}")]
    BadValue {
        key: String,
        origin: Origin,
        reason: String,
    },

    #[error("{origin}: expected `key = value`, got `{text}`")]
    Syntax { origin: Origin, text: String },

    #[error("cannot read {}: {reason}", path.display())]
    Io { path: PathBuf, reason: String },
}

pub const PRESETS: &[&str] = &["table1"];

/// Looks up a named preset.
pub fn preset(name: &str) -> Option<RunConfig> {
    match name {
        "table1" => Some(RunConfig::table1()),
        _ => None,
    }
}

#[derive(Clone, Copy)]
enum Unit {
    Plain,
    /// Accepts `<key>_db`.
    Decibel,
    /// Accepts `<key>_deg`.
    Degree,
}

const KEYS: &[(&str, Unit)] = &[
    ("num_radar_antennas", Unit::Plain),
    ("irs_rows", Unit::Plain),
    ("irs_cols", Unit::Plain),
    ("radar_spacing", Unit::Plain),
    ("irs_spacing", Unit::Plain),
    ("target_azimuth", Unit::Degree),
    ("target_elevation", Unit::Degree),
    ("num_users", Unit::Plain),
    ("rician_factor", Unit::Decibel),
    ("eta", Unit::Plain),
    ("los_departure", Unit::Degree),
    ("los_arrival_azimuth", Unit::Degree),
    ("los_arrival_elevation", Unit::Degree),
    ("scale_g", Unit::Plain),
    ("scale_f", Unit::Plain),
    ("scale_h", Unit::Plain),
    ("alpha", Unit::Plain),
    ("sigma_r_sq", Unit::Decibel),
    ("sigma_c_sq", Unit::Decibel),
    ("p0", Unit::Decibel),
    ("desired_covariance", Unit::Plain),
    ("gamma_bp", Unit::Decibel),
    ("epsilon", Unit::Decibel),
    ("j_max", Unit::Plain),
    ("delta", Unit::Plain),
    ("inner_steps", Unit::Plain),
    ("backtracking", Unit::Plain),
    ("seed", Unit::Plain),
    ("theta_init", Unit::Plain),
    ("solver", Unit::Plain),
    ("realizations", Unit::Plain),
    ("alphas", Unit::Plain),
    ("sweep_p0", Unit::Decibel),
    ("sweep_radar_antennas", Unit::Plain),
    ("sweep_irs", Unit::Plain),
];

/// Maps any accepted spelling to its base key and unit.
fn resolve_key(key: &str) -> Option<(&'static str, Unit, bool)> {
    if key == "preset" {
        return Some(("preset", Unit::Plain, false));
    }
    for &(base, unit) in KEYS {
        if key == base {
            return Some((base, unit, false));
        }
        let suffix = match unit {
            Unit::Plain => continue,
            Unit::Decibel => "_db",
            Unit::Degree => "_deg",
        };
        if key.strip_suffix(suffix) == Some(base) {
            return Some((base, unit, true));
        }
    }
    None
}

#[derive(Debug, Clone)]
struct Entry {
    value: String,
    origin: Origin,
}

/// Values for one base key, in their linear and alternate spellings.
#[derive(Debug, Clone, Default)]
struct Slot {
    linear: Option<Entry>,
    alternate: Option<Entry>,
}

/// Splits one `--set` argument into key and value.
pub fn parse_override(text: &str) -> Result<(String, String), String> {
    let (key, value) = text
        .split_once('=')
        .ok_or_else(|| format!("expected key=value, got `{text}`"))?;
    let (key, value) = (key.trim(), value.trim());
    if key.is_empty() {
        return Err(format!("empty key in `{text}`"));
    }
    if value.is_empty() {
        return Err(format!("empty value for `{key}`"));
    }
    Ok((key.to_string(), value.to_string()))
}

/// Reads and parses a config file, then applies `overrides` (`key=value`).
pub fn parse_config<S: AsRef<str>>(path: &Path, overrides: &[S]) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io {
        path: path.to_path_buf(),
        reason: e.to_string(),
    })?;
    parse_config_str(&text, overrides)
}

/// Parses config text, then applies `overrides` (`key=value`).
pub fn parse_config_str<S: AsRef<str>>(
    text: &str,
    overrides: &[S],
) -> Result<RunConfig, ConfigError> {
    let mut slots: BTreeMap<&'static str, Slot> = BTreeMap::new();

    for (index, raw) in text.lines().enumerate() {
        let origin = Origin::Line(index + 1);
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = parse_override(line).map_err(|_| ConfigError::Syntax {
            origin,
            text: line.to_string(),
        })?;
        let (base, _, alternate) = resolve_key(&key).ok_or(ConfigError::UnknownKey {
            key: key.clone(),
            origin,
        })?;
        let slot = slots.entry(base).or_default();
        let target = if alternate {
            &mut slot.alternate
        } else {
            &mut slot.linear
        };
        if let Some(first) = target {
            return Err(ConfigError::BadValue {
                key,
                origin,
                reason: format!("duplicate key, first set on {}", first.origin),
            });
        }
        *target = Some(Entry { value, origin });
    }

    for (index, raw) in overrides.iter().enumerate() {
        let origin = Origin::Override(index + 1);
        let (key, value) = parse_override(raw.as_ref()).map_err(|_| ConfigError::Syntax {
            origin,
            text: raw.as_ref().to_string(),
        })?;
        let (base, _, alternate) = resolve_key(&key).ok_or(ConfigError::UnknownKey {
            key: key.clone(),
            origin,
        })?;
        let entry = Some(Entry { value, origin });
        let slot = slots.entry(base).or_default();
        *slot = if alternate {
            Slot {
                linear: None,
                alternate: entry,
            }
        } else {
            Slot {
                linear: entry,
                alternate: None,
            }
        };
    }

    let reader = Reader { slots };
    let base = match reader.slots.get("preset").and_then(|s| s.linear.as_ref()) {
        Some(entry) => Some(preset(&entry.value).ok_or_else(|| ConfigError::BadValue {
            key: "preset".into(),
            origin: entry.origin,
            reason: format!("unknown preset, expected one of {}", PRESETS.join(", ")),
        })?),
        None => None,
    };
    if let Some(entry) = reader
        .slots
        .get("preset")
        .and_then(|s| s.alternate.as_ref())
    {
        return Err(ConfigError::UnknownKey {
            key: "preset".into(),
            origin: entry.origin,
        });
    }
    let cfg = reader.build(base.as_ref())?;
    reader.check(&cfg)?;
    Ok(cfg)
}

struct Reader {
    slots: BTreeMap<&'static str, Slot>,
}

impl Reader {
    fn origin(&self, key: &str) -> Origin {
        key.split('/')
            .filter_map(|k| self.slots.get(k))
            .find_map(|s| s.alternate.as_ref().or(s.linear.as_ref()).map(|e| e.origin))
            .unwrap_or(Origin::Preset)
    }

    /// Reads `key` with `parse`, converting the alternate spelling with
    /// `convert`. Falls back to `fallback` (from the preset) when absent.
    fn read<T: Clone + PartialEq>(
        &self,
        key: &'static str,
        fallback: Option<T>,
        parse: impl Fn(&str) -> Result<T, String>,
        convert: impl Fn(T) -> Result<T, String>,
        agree: impl Fn(&T, &T) -> bool,
    ) -> Result<T, ConfigError> {
        let slot = self.slots.get(key).cloned().unwrap_or_default();
        let bad = |entry: &Entry, suffix: &str, reason: String| ConfigError::BadValue {
            key: format!("{key}{suffix}"),
            origin: entry.origin,
            reason,
        };
        let suffix = match resolve_unit(key) {
            Unit::Decibel => "_db",
            Unit::Degree => "_deg",
            Unit::Plain => "",
        };
        let linear = match &slot.linear {
            Some(e) => Some(parse(&e.value).map_err(|r| bad(e, "", r))?),
            None => None,
        };
        let alternate = match &slot.alternate {
            Some(e) => Some(
                parse(&e.value)
                    .and_then(&convert)
                    .map_err(|r| bad(e, suffix, r))?,
            ),
            None => None,
        };
        match (linear, alternate) {
            (Some(l), Some(a)) => {
                if agree(&l, &a) {
                    Ok(a)
                } else {
                    let e = slot.alternate.as_ref().unwrap();
                    Err(bad(
                        e,
                        suffix,
                        format!(
                            "inconsistent with `{key}` on {}",
                            slot.linear.as_ref().unwrap().origin
                        ),
                    ))
                }
            }
            (Some(v), None) | (None, Some(v)) => Ok(v),
            (None, None) => fallback.ok_or(ConfigError::MissingKey { key }),
        }
    }

    fn real(&self, key: &'static str, fallback: Option<f64>) -> Result<f64, ConfigError> {
        let convert = move |v: f64| -> Result<f64, String> {
            Ok(match resolve_unit(key) {
                Unit::Decibel => from_db(v),
                Unit::Degree => v.to_radians(),
                Unit::Plain => v,
            })
        };
        self.read(key, fallback, parse_real, convert, |a, b| close(*a, *b))
    }

    fn reals(
        &self,
        key: &'static str,
        fallback: Option<Vec<f64>>,
    ) -> Result<Vec<f64>, ConfigError> {
        let convert = move |v: Vec<f64>| -> Result<Vec<f64>, String> {
            Ok(match resolve_unit(key) {
                Unit::Decibel => v.into_iter().map(from_db).collect(),
                _ => v,
            })
        };
        let agree = |a: &Vec<f64>, b: &Vec<f64>| {
            a.len() == b.len() && a.iter().zip(b).all(|(x, y)| close(*x, *y))
        };
        self.read(key, fallback, |s| parse_list(s, parse_real), convert, agree)
    }

    fn plain<T: Clone + PartialEq>(
        &self,
        key: &'static str,
        fallback: Option<T>,
        parse: impl Fn(&str) -> Result<T, String>,
    ) -> Result<T, ConfigError> {
        self.read(key, fallback, parse, Ok, |a, b| a == b)
    }

    fn build(&self, base: Option<&RunConfig>) -> Result<RunConfig, ConfigError> {
        let b = base;
        let geometry = SystemGeometry {
            num_radar_antennas: self.plain(
                "num_radar_antennas",
                b.map(|c| c.geometry.num_radar_antennas),
                parse_count,
            )?,
            irs_rows: self.plain("irs_rows", b.map(|c| c.geometry.irs_rows), parse_count)?,
            irs_cols: self.plain("irs_cols", b.map(|c| c.geometry.irs_cols), parse_count)?,
            radar_spacing: self.real("radar_spacing", b.map(|c| c.geometry.radar_spacing))?,
            irs_spacing: self.real("irs_spacing", b.map(|c| c.geometry.irs_spacing))?,
            target_azimuth: self.real("target_azimuth", b.map(|c| c.geometry.target_azimuth))?,
            target_elevation: self
                .real("target_elevation", b.map(|c| c.geometry.target_elevation))?,
        };
        let channel = ChannelModel {
            num_users: self.plain("num_users", b.map(|c| c.channel.num_users), parse_count)?,
            rician_factor: self.real("rician_factor", b.map(|c| c.channel.rician_factor))?,
            eta: self.plain("eta", b.map(|c| c.channel.eta), parse_complex)?,
            los_departure: self.real("los_departure", b.map(|c| c.channel.los_departure))?,
            los_arrival_azimuth: self.real(
                "los_arrival_azimuth",
                b.map(|c| c.channel.los_arrival_azimuth),
            )?,
            los_arrival_elevation: self.real(
                "los_arrival_elevation",
                b.map(|c| c.channel.los_arrival_elevation),
            )?,
            scale_g: self.real("scale_g", b.map(|c| c.channel.scale_g))?,
            scale_f: self.real("scale_f", b.map(|c| c.channel.scale_f))?,
            scale_h: self.real("scale_h", b.map(|c| c.channel.scale_h))?,
        };
        let weights = DesignWeights {
            alpha: self.real("alpha", b.map(|c| c.weights.alpha))?,
            sigma_r_sq: self.real("sigma_r_sq", b.map(|c| c.weights.sigma_r_sq))?,
            sigma_c_sq: self.real("sigma_c_sq", b.map(|c| c.weights.sigma_c_sq))?,
        };
        let ascent = AscentConfig {
            step: self.real("delta", b.map(|c| c.ascent.step))?,
            max_inner_steps: self.plain(
                "inner_steps",
                b.map(|c| c.ascent.max_inner_steps),
                parse_count,
            )?,
            backtracking: self.plain(
                "backtracking",
                b.map(|c| c.ascent.backtracking),
                parse_bool,
            )?,
        };
        let plan = ExperimentPlan {
            num_realizations: self.plain(
                "realizations",
                b.map(|c| c.plan.num_realizations),
                parse_count,
            )?,
            alphas: self.reals("alphas", b.map(|c| c.plan.alphas.clone()))?,
            sweep_p0: self.reals("sweep_p0", b.map(|c| c.plan.sweep_p0.clone()))?,
            sweep_radar_antennas: self.plain(
                "sweep_radar_antennas",
                b.map(|c| c.plan.sweep_radar_antennas.clone()),
                |s| parse_list(s, parse_count),
            )?,
            sweep_irs: self.plain("sweep_irs", b.map(|c| c.plan.sweep_irs.clone()), |s| {
                parse_list(s, parse_layout)
            })?,
        };
        Ok(RunConfig {
            geometry,
            channel,
            weights,
            p0: self.real("p0", b.map(|c| c.p0))?,
            desired_covariance: self.plain(
                "desired_covariance",
                b.map(|c| c.desired_covariance.clone()),
                parse_desired,
            )?,
            gamma_bp: self.real("gamma_bp", b.map(|c| c.gamma_bp))?,
            epsilon: self.real("epsilon", b.map(|c| c.epsilon))?,
            j_max: self.plain("j_max", b.map(|c| c.j_max), parse_count)?,
            ascent,
            seed: RngSeed(self.plain("seed", b.map(|c| c.seed.0), |s| {
                s.parse::<u64>()
                    .map_err(|e| format!("expected an unsigned integer ({e})"))
            })?),
            theta_init: self.plain("theta_init", b.map(|c| c.theta_init), parse_theta_init)?,
            solver: self.plain("solver", b.map(|c| c.solver), parse_solver)?,
            plan,
        })
    }

    /// Semantic validation, reported against the key that caused it.
    fn check(&self, cfg: &RunConfig) -> Result<(), ConfigError> {
        let to_config = |e: Error| match e {
            Error::InvalidParameter { name, reason } => ConfigError::BadValue {
                key: name.to_string(),
                origin: self.origin(name),
                reason,
            },
            other => ConfigError::BadValue {
                key: "desired_covariance".into(),
                origin: self.origin("desired_covariance/p0"),
                reason: other.to_string(),
            },
        };
        cfg.validate().map_err(to_config)?;
        cfg.plan.validate().map_err(to_config)
    }
}

fn resolve_unit(key: &str) -> Unit {
    KEYS.iter()
        .find(|(k, _)| *k == key)
        .map(|(_, u)| *u)
        .unwrap_or(Unit::Plain)
}

fn from_db(v: f64) -> f64 {
    10f64.powf(v / 10.0)
}

fn close(a: f64, b: f64) -> bool {
    a == b || (a - b).abs() <= 1e-9 * a.abs().max(b.abs())
}

/// A real number; `inf` is accepted.
pub fn parse_real(text: &str) -> Result<f64, String> {
    let v: f64 = text
        .trim()
        .parse()
        .map_err(|_| format!("expected a number, got `{text}`"))?;
    if v.is_nan() {
        return Err("NaN is not allowed".into());
    }
    Ok(v)
}

fn parse_count(text: &str) -> Result<usize, String> {
    text.trim()
        .parse()
        .map_err(|_| format!("expected a non-negative integer, got `{text}`"))
}

fn parse_bool(text: &str) -> Result<bool, String> {
    match text.trim() {
        "true" | "on" | "yes" | "1" => Ok(true),
        "false" | "off" | "no" | "0" => Ok(false),
        other => Err(format!("expected true or false, got `{other}`")),
    }
}

fn parse_theta_init(text: &str) -> Result<ThetaInit, String> {
    match text.trim() {
        "all_ones" => Ok(ThetaInit::AllOnes),
        "random_phases" => Ok(ThetaInit::RandomPhases),
        other => Err(format!("expected all_ones or random_phases, got `{other}`")),
    }
}

fn parse_solver(text: &str) -> Result<SolverMethod, String> {
    match text.trim() {
        "bisection" => Ok(SolverMethod::ProximalBisection),
        "projected_gradient" => Ok(SolverMethod::ProjectedGradient),
        other => Err(format!(
            "expected bisection or projected_gradient, got `{other}`"
        )),
    }
}

/// `RxC`, e.g. `8x8`.
fn parse_layout(text: &str) -> Result<(usize, usize), String> {
    let (r, c) = text
        .trim()
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("expected ROWSxCOLS, got `{text}`"))?;
    Ok((parse_count(r)?, parse_count(c)?))
}

fn parse_list<T>(text: &str, item: impl Fn(&str) -> Result<T, String>) -> Result<Vec<T>, String> {
    text.split(',').map(|s| item(s.trim())).collect()
}

/// A finite complex number such as `1`, `-2.5j`, `j`, `1e-3-4j` or
/// `0.5+0.25j`.
pub fn parse_complex(text: &str) -> Result<Complex64, String> {
    let s = text.trim();
    let bad = || format!("expected a complex number like 1.5-2j, got `{text}`");
    if s.is_empty() {
        return Err(bad());
    }
    let Some(body) = s.strip_suffix(['j', 'i']) else {
        let re = parse_real(s).map_err(|_| bad())?;
        if !re.is_finite() {
            return Err(bad());
        }
        return Ok(Complex64::new(re, 0.0));
    };
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| matches!(bytes[k], b'+' | b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(k) => (parse_real(&body[..k]).map_err(|_| bad())?, &body[k..]),
        None => (0.0, body),
    };
    let im = match im {
        "" | "+" => 1.0,
        "-" => -1.0,
        other => parse_real(other).map_err(|_| bad())?,
    };
    if !(re.is_finite() && im.is_finite()) {
        return Err(bad());
    }
    Ok(Complex64::new(re, im))
}

/// A matrix literal: rows separated by `;`, entries by `,`.
pub fn parse_matrix(text: &str) -> Result<CMatrix, String> {
    let rows: Vec<Vec<Complex64>> = text
        .split(';')
        .map(|row| {
            row.split(',')
                .map(parse_complex)
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<_, _>>()?;
    let cols = rows[0].len();
    if let Some(r) = rows.iter().position(|r| r.len() != cols) {
        return Err(format!(
            "row {} has {} entries, row 1 has {cols}",
            r + 1,
            rows[r].len()
        ));
    }
    Ok(CMatrix::from_fn(rows.len(), cols, |i, j| rows[i][j]))
}

fn parse_desired(text: &str) -> Result<DesiredCovariance, String> {
    match text.trim() {
        "omni" | "omnidirectional" => Ok(DesiredCovariance::Omnidirectional),
        literal => parse_matrix(literal).map(DesiredCovariance::Explicit),
    }
}

fn format_complex(z: Complex64) -> String {
    let sign = if z.im.is_sign_negative() { '-' } else { '+' };
    format!("{}{}{}j", z.re, sign, z.im.abs())
}

fn format_list<T>(items: &[T], f: impl Fn(&T) -> String) -> String {
    items.iter().map(f).collect::<Vec<_>>().join(", ")
}

/// Canonical config text for `cfg`; every key appears in linear/radian form.
pub fn print_config(cfg: &RunConfig) -> String {
    config_pairs(cfg)
        .into_iter()
        .map(|(k, v)| format!("{k} = {v}\n"))
        .collect()
}

/// The resolved configuration as ordered `(key, value)` pairs.
pub fn config_pairs(cfg: &RunConfig) -> Vec<(&'static str, String)> {
    let g = &cfg.geometry;
    let ch = &cfg.channel;
    let desired = match &cfg.desired_covariance {
        DesiredCovariance::Omnidirectional => "omni".to_string(),
        DesiredCovariance::Explicit(m) => (0..m.nrows())
            .map(|i| {
                format_list(&m.row(i).iter().copied().collect::<Vec<_>>(), |z| {
                    format_complex(*z)
                })
            })
            .collect::<Vec<_>>()
            .join("; "),
    };
    vec![
        ("num_radar_antennas", g.num_radar_antennas.to_string()),
        ("irs_rows", g.irs_rows.to_string()),
        ("irs_cols", g.irs_cols.to_string()),
        ("radar_spacing", g.radar_spacing.to_string()),
        ("irs_spacing", g.irs_spacing.to_string()),
        ("target_azimuth", g.target_azimuth.to_string()),
        ("target_elevation", g.target_elevation.to_string()),
        ("num_users", ch.num_users.to_string()),
        ("rician_factor", ch.rician_factor.to_string()),
        ("eta", format_complex(ch.eta)),
        ("los_departure", ch.los_departure.to_string()),
        ("los_arrival_azimuth", ch.los_arrival_azimuth.to_string()),
        (
            "los_arrival_elevation",
            ch.los_arrival_elevation.to_string(),
        ),
        ("scale_g", ch.scale_g.to_string()),
        ("scale_f", ch.scale_f.to_string()),
        ("scale_h", ch.scale_h.to_string()),
        ("alpha", cfg.weights.alpha.to_string()),
        ("sigma_r_sq", cfg.weights.sigma_r_sq.to_string()),
        ("sigma_c_sq", cfg.weights.sigma_c_sq.to_string()),
        ("p0", cfg.p0.to_string()),
        ("desired_covariance", desired),
        ("gamma_bp", cfg.gamma_bp.to_string()),
        ("epsilon", cfg.epsilon.to_string()),
        ("j_max", cfg.j_max.to_string()),
        ("delta", cfg.ascent.step.to_string()),
        ("inner_steps", cfg.ascent.max_inner_steps.to_string()),
        ("backtracking", cfg.ascent.backtracking.to_string()),
        ("seed", cfg.seed.0.to_string()),
        ("theta_init", cfg.theta_init.as_str().to_string()),
        ("solver", cfg.solver.as_str().to_string()),
        ("realizations", cfg.plan.num_realizations.to_string()),
        ("alphas", format_list(&cfg.plan.alphas, f64::to_string)),
        ("sweep_p0", format_list(&cfg.plan.sweep_p0, f64::to_string)),
        (
            "sweep_radar_antennas",
            format_list(&cfg.plan.sweep_radar_antennas, usize::to_string),
        ),
        (
            "sweep_irs",
            format_list(&cfg.plan.sweep_irs, |(r, c)| format!("{r}x{c}")),
        ),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(pairs: &[&str]) -> Result<RunConfig, ConfigError> {
        parse_config_str("preset = table1\n", pairs)
    }

    #[test]
    fn preset_values() {
        let cfg = set(&[]).unwrap();
        assert_eq!(cfg, RunConfig::table1());
        assert_eq!(cfg.epsilon, 1e-3);
        assert_eq!(cfg.j_max, 500);
        assert_eq!(cfg.ascent.step, 0.1);
        assert_eq!(cfg.channel.num_users, 5);
        assert_eq!(cfg.channel.rician_factor, 1.0);
        assert_eq!(cfg.geometry.radar_spacing, 0.5);
        assert_eq!(cfg.geometry.irs_spacing, 0.5);
        assert_eq!(cfg.weights.sigma_r_sq, 1.0);
        assert_eq!(cfg.weights.sigma_c_sq, 1.0);
    }

    #[test]
    fn override_precedence() {
        let cfg = parse_config_str("preset = table1\nalpha = 0.2\n", &["alpha=0.5"]).unwrap();
        assert_eq!(cfg.weights.alpha, 0.5);
    }

    #[test]
    fn alpha_out_of_range_names_key_and_range() {
        let err = set(&["alpha=1.5"]).unwrap_err();
        match &err {
            ConfigError::BadValue {
                key,
                origin,
                reason,
            } => {
                assert_eq!(key, "alpha");
                assert_eq!(*origin, Origin::Override(1));
                assert!(reason.contains("[0, 1]"), "{reason}");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn decibel_forms() {
        let cfg = parse_config_str(
            "preset = table1\nepsilon_db = -30\np0_db = 20\nrician_factor_db = 0\n",
            &[] as &[&str],
        )
        .unwrap();
        assert!((cfg.epsilon - 1e-3).abs() < 1e-15);
        assert!((cfg.p0 - 100.0).abs() < 1e-10);
        assert_eq!(cfg.channel.rician_factor, 1.0);
        let cfg = set(&["sweep_p0_db=0, 10"]).unwrap();
        assert_eq!(cfg.plan.sweep_p0, vec![1.0, 10.0]);
    }

    #[test]
    fn both_forms_must_agree() {
        let ok =
            parse_config_str("preset = table1\np0 = 100\np0_db = 20\n", &[] as &[&str]).unwrap();
        assert!((ok.p0 - 100.0).abs() < 1e-10);
        let err =
            parse_config_str("preset = table1\np0 = 10\np0_db = 20\n", &[] as &[&str]).unwrap_err();
        assert!(
            matches!(err, ConfigError::BadValue { ref key, origin: Origin::Line(3), .. } if key == "p0_db"),
            "{err:?}"
        );
        // an override replaces both spellings
        let cfg = parse_config_str("preset = table1\np0 = 10\np0_db = 20\n", &["p0=50"]).unwrap();
        assert_eq!(cfg.p0, 50.0);
    }

    #[test]
    fn degree_forms() {
        let cfg = set(&["target_azimuth_deg=30"]).unwrap();
        assert!((cfg.geometry.target_azimuth - std::f64::consts::FRAC_PI_6).abs() < 1e-15);
    }

    #[test]
    fn unknown_and_missing_keys() {
        let err = parse_config_str("preset = table1\n\nalpah = 0.3\n", &[] as &[&str]).unwrap_err();
        assert_eq!(
            err,
            ConfigError::UnknownKey {
                key: "alpah".into(),
                origin: Origin::Line(3)
            }
        );
        let err = parse_config_str("alpha = 0.3\n", &[] as &[&str]).unwrap_err();
        assert!(matches!(err, ConfigError::MissingKey { .. }));
        let err = set(&["bogus=1"]).unwrap_err();
        assert!(matches!(
            err,
            ConfigError::UnknownKey {
                origin: Origin::Override(1),
                ..
            }
        ));
    }

    #[test]
    fn malformed_lines() {
        let err = parse_config_str("preset = table1\njust words\n", &[] as &[&str]).unwrap_err();
        assert!(matches!(
            err,
            ConfigError::Syntax {
                origin: Origin::Line(2),
                ..
            }
        ));
        let err = parse_config_str(
            "preset = table1\nalpha = 0.1\nalpha = 0.2\n",
            &[] as &[&str],
        )
        .unwrap_err();
        assert!(matches!(
            err,
            ConfigError::BadValue {
                origin: Origin::Line(3),
                ..
            }
        ));
        let err = set(&["j_max=ten"]).unwrap_err();
        assert!(matches!(err, ConfigError::BadValue { ref key, .. } if key == "j_max"));
        let err = parse_config_str("preset = table2\n", &[] as &[&str]).unwrap_err();
        assert!(matches!(err, ConfigError::BadValue { ref key, .. } if key == "preset"));
    }

    #[test]
    fn huge_values_are_rejected_not_overflowed() {
        let err = set(&[
            "irs_rows=4870020673419870209",
            "irs_cols=4870020673419870209",
        ])
        .unwrap_err();
        assert!(matches!(err, ConfigError::BadValue { .. }), "{err:?}");
        let err = set(&["sweep_irs=4870020673419870209x4870020673419870209"]).unwrap_err();
        assert!(
            matches!(err, ConfigError::BadValue { ref key, .. } if key == "sweep_irs"),
            "{err:?}"
        );
        assert!(parse_matrix("1e999, 0; 0, 1").is_err());
    }

    #[test]
    fn comments_and_whitespace() {
        let cfg = parse_config_str(
            "# header\n  preset=table1   # trailing\n\n\talpha =0.25\n",
            &[] as &[&str],
        )
        .unwrap();
        assert_eq!(cfg.weights.alpha, 0.25);
    }

    #[test]
    fn complex_literals() {
        let c = |s| parse_complex(s).unwrap();
        assert_eq!(c("1"), Complex64::new(1.0, 0.0));
        assert_eq!(c("-2.5j"), Complex64::new(0.0, -2.5));
        assert_eq!(c("j"), Complex64::new(0.0, 1.0));
        assert_eq!(c("-j"), Complex64::new(0.0, -1.0));
        assert_eq!(c("1e-3-4j"), Complex64::new(1e-3, -4.0));
        assert_eq!(c("0.5+0.25j"), Complex64::new(0.5, 0.25));
        assert_eq!(c("1e+2+1e-2j"), Complex64::new(100.0, 0.01));
        for bad in [
            "", "abc", "1+", "1+2", "++j", "1j2", "nanj", "inf", "1-infj",
        ] {
            assert!(parse_complex(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn matrix_literals() {
        let m = parse_matrix("4, 1+1j; 1-1j, 6").unwrap();
        assert_eq!(m.shape(), (2, 2));
        assert_eq!(m[(0, 1)], Complex64::new(1.0, 1.0));
        assert_eq!(m[(1, 0)], Complex64::new(1.0, -1.0));
        assert!(parse_matrix("1, 2; 3").is_err());
        assert!(parse_matrix("").is_err());
        assert!(parse_matrix("1,,2").is_err());
    }

    #[test]
    fn explicit_desired_covariance() {
        let cfg = set(&[
            "num_radar_antennas=2",
            "p0=10",
            "desired_covariance=4, 1+1j; 1-1j, 6",
        ])
        .unwrap();
        assert!(matches!(
            cfg.desired_covariance,
            DesiredCovariance::Explicit(_)
        ));
        let err = set(&[
            "num_radar_antennas=2",
            "p0=11",
            "desired_covariance=4, 0; 0, 6",
        ])
        .unwrap_err();
        assert!(
            matches!(err, ConfigError::BadValue { ref key, .. } if key == "desired_covariance"),
            "{err:?}"
        );
    }

    #[test]
    fn print_round_trips() {
        let mut cfg = set(&[
            "desired_covariance=4, 1+1j; 1-1j, 6",
            "num_radar_antennas=2",
            "p0=10",
        ])
        .unwrap();
        cfg.channel.eta = Complex64::new(-0.3, 1.0 / 3.0);
        cfg.channel.rician_factor = f64::INFINITY;
        cfg.geometry.target_azimuth = 0.1f64.to_radians();
        cfg.plan.alphas = vec![0.1, 1.0 / 7.0];
        cfg.theta_init = ThetaInit::RandomPhases;
        cfg.solver = SolverMethod::ProjectedGradient;
        let text = print_config(&cfg);
        assert_eq!(parse_config_str(&text, &[] as &[&str]).unwrap(), cfg);
        let table1 = RunConfig::table1();
        assert_eq!(
            parse_config_str(&print_config(&table1), &[] as &[&str]).unwrap(),
            table1
        );
    }

    #[test]
    fn override_syntax() {
        assert_eq!(
            parse_override(" a = b=c ").unwrap(),
            ("a".into(), "b=c".into())
        );
        assert!(parse_override("novalue").is_err());
        assert!(parse_override("=1").is_err());
        assert!(parse_override("a=").is_err());
    }
}
