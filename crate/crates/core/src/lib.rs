//! Joint design of a MIMO radar precoder and the phase shifts of an
//! intelligent reflecting surface (IRS) for a dual-function
//! radar-communication platform.
//!
//! The design maximizes a weighted sum of the radar receiver SNR and the
//! aggregate communication receiver SNR. It alternates between two blocks:
//!
//! * the transmit covariance `R_w = W W^H`, a linear objective over the PSD
//!   matrices with fixed trace and bounded distance to a desired covariance
//!   ([`precoder`]);
//! * the IRS phase vector `θ`, a quartic objective on the complex circle
//!   manifold `|θ_n| = 1`, improved by Riemannian gradient ascent
//!   ([`objective`], [`manifold`]).
//!
//! [`driver`] runs the alternation and the Monte-Carlo experiments,
//! [`config`] and [`report`] provide the flat config format and CSV/JSON
//! outputs used by the `dfrc` command-line tool.

pub mod channel;
pub mod config;
pub mod driver;
mod error;
pub mod linalg;
pub mod manifold;
pub mod objective;
pub mod precoder;
pub mod report;
pub mod validate;

pub use error::{Error, Result};

pub use channel::{ChannelModel, ChannelSet, RngSeed, SystemGeometry};
pub use config::{parse_config, parse_config_str, print_config, ConfigError};
pub use driver::{alternate, ConvergenceTrace, ExperimentResult, RunConfig, Termination};
pub use manifold::{AscentConfig, TangentVector};
pub use objective::{DesignWeights, ObjectiveBundle, PhaseVector};
pub use precoder::{BeampatternSpec, PrecoderCovariance};

/// Dense complex matrix used throughout the crate.
pub type CMatrix = nalgebra::DMatrix<num_complex::Complex64>;
/// Dense complex column vector.
pub type CVector = nalgebra::DVector<num_complex::Complex64>;
pub use num_complex::Complex64;
