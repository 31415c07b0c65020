//! Attitudes, rotations, directions, cosine angle pairs, and array response
//! vectors.
//!
//! Angle pairs live on the 2-periodic torus [−1, 1)²; `wrap_sub`/`wrap_add`
//! are the group operations. The BS array is an uncentered x/z-plane UPA at
//! the origin, the UAV array a centered x/y-plane UPA rotated by the
//! yaw-pitch-roll attitude.

use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64;
use std::f64::consts::PI;

use crate::{Error, Result};

/// Yaw/pitch/roll in radians, each normalized to (−π, π] on construction.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Attitude {
    pub yaw: f64,
    pub pitch: f64,
    pub roll: f64,
}

impl Attitude {
    pub fn new(yaw: f64, pitch: f64, roll: f64) -> Self {
        Self {
            yaw: norm_angle(yaw),
            pitch: norm_angle(pitch),
            roll: norm_angle(roll),
        }
    }

    pub fn zero() -> Self {
        Self::new(0.0, 0.0, 0.0)
    }
}

fn norm_angle(a: f64) -> f64 {
    let r = a.rem_euclid(2.0 * PI);
    if r > PI {
        r - 2.0 * PI
    } else {
        r
    }
}

/// Cartesian position in meters; the BS sits at the origin.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Position3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Position3 {
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn origin() -> Self {
        Self::new(0.0, 0.0, 0.0)
    }

    pub fn to_vector(self) -> Vector3<f64> {
        Vector3::new(self.x, self.y, self.z)
    }
}

/// Unit direction from the UAV toward the BS together with its spherical
/// decomposition and the separation distance.
///
/// Invariant: `e == [cos φ cos θ, cos φ sin θ, sin φ]` within 1e−12.
#[derive(Clone, Copy, Debug)]
pub struct Direction {
    pub e: Vector3<f64>,
    pub elevation: f64,
    pub azimuth: f64,
    pub distance: f64,
}

impl Direction {
    /// Builds a `Direction` from an already-normalized vector.
    pub fn from_unit_vector(e: Vector3<f64>, distance: f64) -> Result<Self> {
        if (e.norm() - 1.0).abs() > 1e-9 {
            return Err(Error::Geometry(format!(
                "direction vector norm {} is not 1",
                e.norm()
            )));
        }
        let elevation = e.z.clamp(-1.0, 1.0).asin();
        let azimuth = if e.x == 0.0 && e.y == 0.0 {
            0.0
        } else {
            e.y.atan2(e.x)
        };
        Ok(Self {
            e,
            elevation,
            azimuth,
            distance,
        })
    }
}

/// Direction from the UAV position toward the BS position.
///
/// Rejects separations of 1 m or less (far-field guard).
pub fn direction_between(p_bs: Position3, p_uav: Position3) -> Result<Direction> {
    let diff = p_bs.to_vector() - p_uav.to_vector();
    let d = diff.norm();
    if d <= 1.0 {
        return Err(Error::Geometry(format!(
            "BS-UAV separation {d} m is inside the 1 m far-field guard"
        )));
    }
    Direction::from_unit_vector(diff / d, d)
}

/// Two-dimensional cosine angle pair (Ψ, Ω), each kept in [−1, 1).
///
/// Values exactly equal to +1 wrap to −1 (the two are the same beam
/// direction under the 2-periodic convention).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AoaPair {
    psi: f64,
    omega: f64,
}

impl AoaPair {
    pub fn new(psi: f64, omega: f64) -> Self {
        Self {
            psi: wrap_into_range(psi),
            omega: wrap_into_range(omega),
        }
    }

    pub fn psi(&self) -> f64 {
        self.psi
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    /// Wrapped squared estimation error against a reference pair.
    pub fn wrapped_sq_error(&self, other: &AoaPair) -> f64 {
        let dp = wrap_sub(self.psi, other.psi);
        let dm = wrap_sub(self.omega, other.omega);
        dp * dp + dm * dm
    }
}

fn wrap_into_range(x: f64) -> f64 {
    (x + 1.0).rem_euclid(2.0) - 1.0
}

/// Wrapped difference on the 2-periodic cosine-angle circle; result in [−1, 1).
pub fn wrap_sub(a: f64, b: f64) -> f64 {
    (a - b + 1.0).rem_euclid(2.0) - 1.0
}

/// Wrapped sum on the 2-periodic cosine-angle circle; result in [−1, 1).
pub fn wrap_add(a: f64, b: f64) -> f64 {
    (a + b + 1.0).rem_euclid(2.0) - 1.0
}

/// Element counts and wavelength of a uniform planar array with
/// half-wavelength spacing.
///
/// The second axis is z for the BS (uncentered element indexing) and y for
/// the UAV (centered element indexing) — `centered` selects the convention.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UpaGeometry {
    pub n_x: usize,
    pub n_second: usize,
    pub wavelength: f64,
    pub centered: bool,
}

impl UpaGeometry {
    pub fn new(n_x: usize, n_second: usize, wavelength: f64, centered: bool) -> Result<Self> {
        if n_x == 0 || n_second == 0 {
            return Err(Error::Config("UPA axis counts must be at least 1".into()));
        }
        if !(wavelength > 0.0) {
            return Err(Error::Config(format!("wavelength {wavelength} must be positive")));
        }
        Ok(Self {
            n_x,
            n_second,
            wavelength,
            centered,
        })
    }

    pub fn n_total(&self) -> usize {
        self.n_x * self.n_second
    }
}

/// Closed-form yaw-pitch-roll rotation matrix R = R_yaw(α) R_pitch(β) R_roll(γ).
pub fn rotation_matrix(att: &Attitude) -> Matrix3<f64> {
    let (sa, ca) = att.yaw.sin_cos();
    let (sb, cb) = att.pitch.sin_cos();
    let (sg, cg) = att.roll.sin_cos();
    Matrix3::new(
        ca * cb,
        ca * sb * sg - sa * cg,
        ca * sb * cg + sa * sg,
        sa * cb,
        sa * sb * sg + ca * cg,
        sa * sb * cg - ca * sg,
        -sb,
        cb * sg,
        cb * cg,
    )
}

/// Element offsets of the BS UPA in the x/z plane, relative to the first
/// element. Linear ordering is row-major: index = x·n_z + z.
pub fn bs_antenna_offsets(geom: &UpaGeometry) -> Vec<Vector3<f64>> {
    debug_assert!(!geom.centered);
    let half = geom.wavelength / 2.0;
    let mut out = Vec::with_capacity(geom.n_total());
    for x in 0..geom.n_x {
        for z in 0..geom.n_second {
            out.push(Vector3::new(half * x as f64, 0.0, half * z as f64));
        }
    }
    out
}

/// Element offsets of the UAV UPA in its body x/y plane, centered so the
/// offsets sum to zero. Same row-major ordering as the BS array.
pub fn uav_antenna_offsets(geom: &UpaGeometry) -> Vec<Vector3<f64>> {
    debug_assert!(geom.centered);
    let half = geom.wavelength / 2.0;
    let cx = (geom.n_x as f64 - 1.0) / 2.0;
    let cy = (geom.n_second as f64 - 1.0) / 2.0;
    let mut out = Vec::with_capacity(geom.n_total());
    for x in 0..geom.n_x {
        for y in 0..geom.n_second {
            out.push(Vector3::new(
                half * (x as f64 - cx),
                half * (y as f64 - cy),
                0.0,
            ));
        }
    }
    out
}

/// BS-side cosine pair: the x and z components of the direction vector.
pub fn aoa_bs(dir: &Direction) -> AoaPair {
    AoaPair::new(dir.e.x, dir.e.z)
}

/// UAV-side cosine pair: the first two components of Rᵀe.
pub fn aoa_uav(dir: &Direction, att: &Attitude) -> AoaPair {
    let r = rotation_matrix(att);
    let body = r.transpose() * dir.e;
    AoaPair::new(body.x, body.y)
}

/// UAV-side cosine pair via the trigonometric closed form in the direction's
/// spherical coordinates. Independent of the matrix path in [`aoa_uav`];
/// the two agree within 1e−12.
pub fn aoa_uav_trig(dir: &Direction, att: &Attitude) -> AoaPair {
    let (sphi, cphi) = dir.elevation.sin_cos();
    let (sth, cth) = dir.azimuth.sin_cos();
    let (sa, ca) = att.yaw.sin_cos();
    let (sb, cb) = att.pitch.sin_cos();
    let (sg, cg) = att.roll.sin_cos();
    let psi = cphi * cth * ca * cb + cphi * sth * sa * cb - sphi * sb;
    let omega = cphi * cth * (ca * sb * sg - sa * cg)
        + cphi * sth * (sa * sb * sg + ca * cg)
        + sphi * cb * sg;
    AoaPair::new(psi, omega)
}

/// One-dimensional steering vector [e^{jπnΨ}]_{n=0..N−1}; the centered
/// variant multiplies the global phase e^{−jπΨ(N−1)/2}.
pub fn steering(psi: f64, n: usize, centered: bool) -> Vec<Complex64> {
    let prefactor = if centered {
        Complex64::from_polar(1.0, -PI * psi * (n as f64 - 1.0) / 2.0)
    } else {
        Complex64::new(1.0, 0.0)
    };
    (0..n)
        .map(|k| prefactor * Complex64::from_polar(1.0, PI * k as f64 * psi))
        .collect()
}

/// UPA response vector v(Ψ, n_x) ⊗ v(Ω, n_second), row-major over
/// (first-axis, second-axis) element indices.
pub fn array_response(aoa: &AoaPair, geom: &UpaGeometry) -> Vec<Complex64> {
    let vx = steering(aoa.psi(), geom.n_x, geom.centered);
    let vy = steering(aoa.omega(), geom.n_second, geom.centered);
    kron(&vx, &vy)
}

pub(crate) fn kron(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(a.len() * b.len());
    for &ai in a {
        for &bj in b {
            out.push(ai * bj);
        }
    }
    out
}

/// Element-wise array response e^{j2π(Ra_κ)ᵀe/λ} from explicit antenna
/// offsets; brute-force oracle for the Kronecker factorization.
pub fn exact_array_response(
    offsets: &[Vector3<f64>],
    rotation: &Matrix3<f64>,
    e: &Vector3<f64>,
    wavelength: f64,
) -> Vec<Complex64> {
    offsets
        .iter()
        .map(|a| {
            let phase = 2.0 * PI * (rotation * a).dot(e) / wavelength;
            Complex64::from_polar(1.0, phase)
        })
        .collect()
}
