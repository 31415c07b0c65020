//! Link-level simulation of a UAV millimeter-wave line-of-sight channel under
//! attitude jitter, with navigation-assisted compressed-sensing beam training.
//!
//! The crate is organized around the signal chain:
//!
//! * [`geometry`] — attitudes, rotations, direction vectors, cosine angle
//!   pairs, and array steering/response vectors for both uniform planar arrays.
//! * [`channel`] — the rank-1 LoS channel, beamformers, beamforming gain,
//!   path loss, and noisy pilot measurements.
//! * [`jitter`] — analytic propagation of attitude randomness to the UAV-side
//!   angle pair (Jacobian, Gaussian approximation, marginal intervals).
//! * [`sensing`] — fully and partially random (direction-constrained)
//!   sensing matrices built from sub-array ULA factors, plus beam-space
//!   diagnostics.
//! * [`estimator`] — maximum-likelihood two-dimensional AoA estimation:
//!   coarse grid search and wrapped-gradient ascent refinement.
//! * [`harness`] — scenario sampling, navigation error model, Monte-Carlo
//!   experiments, configuration, and CSV/codebook I/O.

pub mod channel;
pub mod estimator;
pub mod geometry;
pub mod harness;
pub mod jitter;
pub mod sensing;

/// Propagation speed used to convert carrier frequency to wavelength, in m/s.
pub const SPEED_OF_LIGHT_M_S: f64 = 3.0e8;

/// Hermitian inner product aᴴb.
pub(crate) fn cdot(
    a: &[num_complex::Complex64],
    b: &[num_complex::Complex64],
) -> num_complex::Complex64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("degenerate geometry: {0}")]
    Geometry(String),
    #[error("numerical guard tripped: {0}")]
    Numerical(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
