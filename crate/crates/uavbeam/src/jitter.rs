//! Attitude jitter: Gaussian perturbation of the desired attitude and the
//! analytic first-order propagation of that randomness to the UAV-side
//! cosine angle pair.
//!
//! The analytic path (Jacobian, Gaussian mean/covariance, marginal 3σ
//! intervals) is a linearization; sampling always goes through the exact
//! nonlinear attitude-to-angle map so Monte-Carlo results reflect the
//! physics, not the approximation under test.

use nalgebra::{Matrix2, Matrix2x3, Vector2, Vector3};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::geometry::{aoa_uav, AoaPair, Attitude, Direction};
use crate::{Error, Result};

/// Standard deviations (radians) of the independent zero-mean Gaussian
/// perturbations applied to yaw, pitch, and roll.
#[derive(Clone, Copy, Debug)]
pub struct JitterModel {
    pub sigma_yaw: f64,
    pub sigma_pitch: f64,
    pub sigma_roll: f64,
}

impl JitterModel {
    pub fn new(sigma_yaw: f64, sigma_pitch: f64, sigma_roll: f64) -> Result<Self> {
        if sigma_yaw < 0.0 || sigma_pitch < 0.0 || sigma_roll < 0.0 {
            return Err(Error::Config(
                "jitter standard deviations must be nonnegative".into(),
            ));
        }
        Ok(Self {
            sigma_yaw,
            sigma_pitch,
            sigma_roll,
        })
    }

    /// Same standard deviation on all three axes.
    pub fn isotropic(sigma: f64) -> Result<Self> {
        Self::new(sigma, sigma, sigma)
    }
}

/// Gaussian approximation of the UAV-side angle pair under jitter:
/// mean at the desired attitude, covariance from the linearization, and the
/// marginal 99.73% (3σ) intervals.
#[derive(Clone, Debug)]
pub struct AoaDistribution {
    pub mean: Vector2<f64>,
    pub cov: Matrix2<f64>,
    pub stds: Vector2<f64>,
    /// (lower, upper) of mean ± 3σ per component, Ψ then Ω.
    pub intervals: [(f64, f64); 2],
}

/// Closed-form Jacobian of the UAV-side pair (Ψ, Ω) with respect to
/// (yaw, pitch, roll), evaluated at the given attitude and direction.
/// The (Ψ, roll) entry is identically zero.
pub fn jacobian(att: &Attitude, dir: &Direction) -> Matrix2x3<f64> {
    let (sphi, cphi) = dir.elevation.sin_cos();
    let (sth, cth) = dir.azimuth.sin_cos();
    let (sa, ca) = att.yaw.sin_cos();
    let (sb, cb) = att.pitch.sin_cos();
    let (sg, cg) = att.roll.sin_cos();

    let dpsi_da = cb * cphi * (ca * sth - sa * cth);
    let dpsi_db = -sb * cphi * (ca * cth + sa * sth) - sphi * cb;

    let dom_da = cphi * cth * (-sa * sb * sg - ca * cg) + cphi * sth * (ca * sb * sg - sa * cg);
    let dom_db = cphi * cth * ca * cb * sg + cphi * sth * sa * cb * sg - sphi * sb * sg;
    let dom_dg = cphi * cth * (ca * sb * cg + sa * sg) + cphi * sth * (sa * sb * cg - ca * sg)
        + sphi * cb * cg;

    Matrix2x3::new(dpsi_da, dpsi_db, 0.0, dom_da, dom_db, dom_dg)
}

/// Mean, covariance, marginal standard deviations, and 3σ intervals of the
/// UAV-side angle pair when the attitude jitters around `desired`.
pub fn aoa_distribution(desired: &Attitude, dir: &Direction, jm: &JitterModel) -> AoaDistribution {
    let mu = aoa_uav(dir, desired);
    let mean = Vector2::new(mu.psi(), mu.omega());
    let j = jacobian(desired, dir);
    let d = Matrix2x3::from_columns(&[
        j.column(0) * jm.sigma_yaw * jm.sigma_yaw,
        j.column(1) * jm.sigma_pitch * jm.sigma_pitch,
        j.column(2) * jm.sigma_roll * jm.sigma_roll,
    ]);
    let cov = d * j.transpose();
    let stds = Vector2::new(cov[(0, 0)].max(0.0).sqrt(), cov[(1, 1)].max(0.0).sqrt());
    let intervals = [
        (mean.x - 3.0 * stds.x, mean.x + 3.0 * stds.x),
        (mean.y - 3.0 * stds.y, mean.y + 3.0 * stds.y),
    ];
    AoaDistribution {
        mean,
        cov,
        stds,
        intervals,
    }
}

/// Draws one jittered attitude: desired plus independent per-axis Gaussians.
pub fn sample_attitude(desired: &Attitude, jm: &JitterModel, rng: &mut impl Rng) -> Attitude {
    let da: f64 = rng.sample(StandardNormal);
    let db: f64 = rng.sample(StandardNormal);
    let dg: f64 = rng.sample(StandardNormal);
    Attitude::new(
        desired.yaw + jm.sigma_yaw * da,
        desired.pitch + jm.sigma_pitch * db,
        desired.roll + jm.sigma_roll * dg,
    )
}

/// First-order prediction of the jittered angle pair: μ + J·deltas.
/// Exists to validate the Gaussian approximation against the exact map.
pub fn linearized_aoa(desired: &Attitude, dir: &Direction, deltas: &Vector3<f64>) -> AoaPair {
    let mu = aoa_uav(dir, desired);
    let shift = jacobian(desired, dir) * deltas;
    AoaPair::new(mu.psi() + shift.x, mu.omega() + shift.y)
}
