//! Rank-1 LoS channel between the BS and UAV arrays, beamformers, gains,
//! path loss, and noisy pilot measurements.
//!
//! The channel is always carried around as the factorization
//! `H = τ · v_U · v_Bᴴ`; the dense per-antenna-pair matrix exists only as an
//! oracle in [`exact_channel_matrix`].

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use std::f64::consts::PI;

use crate::geometry::{
    aoa_bs, aoa_uav, array_response, direction_between, rotation_matrix, uav_antenna_offsets,
    AoaPair, Attitude, Position3, UpaGeometry,
};
use crate::{cdot, Error, Result};

/// LoS channel in factored form: `H = tau · v_uav · v_bsᴴ`.
#[derive(Clone, Debug)]
pub struct LosChannel {
    pub tau: Complex64,
    pub v_bs: Vec<Complex64>,
    pub v_uav: Vec<Complex64>,
    pub aoa_bs: AoaPair,
    pub aoa_uav: AoaPair,
    pub distance: f64,
    pub bs_geom: UpaGeometry,
    pub uav_geom: UpaGeometry,
}

/// Unit-norm analog beamforming vector.
#[derive(Clone, Debug)]
pub struct Beamformer {
    pub weights: Vec<Complex64>,
}

fn check_geoms(bs_geom: &UpaGeometry, uav_geom: &UpaGeometry) -> Result<()> {
    if bs_geom.centered || !uav_geom.centered {
        return Err(Error::Config(
            "BS array must use the uncentered convention and the UAV array the centered one"
                .into(),
        ));
    }
    if bs_geom.wavelength != uav_geom.wavelength {
        return Err(Error::Config(format!(
            "wavelength mismatch between arrays: {} vs {}",
            bs_geom.wavelength, uav_geom.wavelength
        )));
    }
    Ok(())
}

/// Builds the rank-1 LoS channel for a UAV at `p_uav` with attitude `att`.
/// The BS sits at the origin. Separations below 10 m are rejected.
pub fn los_channel(
    p_uav: Position3,
    att: &Attitude,
    bs_geom: &UpaGeometry,
    uav_geom: &UpaGeometry,
) -> Result<LosChannel> {
    check_geoms(bs_geom, uav_geom)?;
    let dir = direction_between(Position3::origin(), p_uav)?;
    if dir.distance < 10.0 {
        return Err(Error::Geometry(format!(
            "BS-UAV separation {} m is below the 10 m LoS model floor",
            dir.distance
        )));
    }
    let wavelength = bs_geom.wavelength;
    let d = dir.distance;
    let tau = Complex64::from_polar(wavelength / (4.0 * PI * d), -2.0 * PI * d / wavelength);
    let pair_bs = aoa_bs(&dir);
    let pair_uav = aoa_uav(&dir, att);
    Ok(LosChannel {
        tau,
        v_bs: array_response(&pair_bs, bs_geom),
        v_uav: array_response(&pair_uav, uav_geom),
        aoa_bs: pair_bs,
        aoa_uav: pair_uav,
        distance: d,
        bs_geom: *bs_geom,
        uav_geom: *uav_geom,
    })
}

/// Dense N_U × N_B channel matrix from exact per-antenna-pair distances,
/// with no far-field approximation. Oracle for the rank-1 factorization.
pub fn exact_channel_matrix(
    p_uav: Position3,
    att: &Attitude,
    bs_geom: &UpaGeometry,
    uav_geom: &UpaGeometry,
) -> Result<DMatrix<Complex64>> {
    check_geoms(bs_geom, uav_geom)?;
    let wavelength = bs_geom.wavelength;
    let rot = rotation_matrix(att);
    let bs_offsets = crate::geometry::bs_antenna_offsets(bs_geom);
    let uav_offsets = uav_antenna_offsets(uav_geom);
    let p = p_uav.to_vector();
    let n_u = uav_offsets.len();
    let n_b = bs_offsets.len();
    let mut h = DMatrix::zeros(n_u, n_b);
    for (k, a_u) in uav_offsets.iter().enumerate() {
        let uav_elem = p + rot * a_u;
        for (i, a_b) in bs_offsets.iter().enumerate() {
            let d = (a_b - uav_elem).norm();
            h[(k, i)] =
                Complex64::from_polar(wavelength / (4.0 * PI * d), -2.0 * PI * d / wavelength);
        }
    }
    Ok(h)
}

/// Unit-norm beamformer steered at `pointing`; the array's centering
/// convention rides along in `geom`.
pub fn beamformer(pointing: &AoaPair, geom: &UpaGeometry) -> Beamformer {
    let scale = 1.0 / (geom.n_total() as f64).sqrt();
    let weights = array_response(pointing, geom)
        .into_iter()
        .map(|w| w * scale)
        .collect();
    Beamformer { weights }
}

/// Combined transmit/receive array gain |m ᴴ v_U|²·|v_Bᴴ f|², computed from
/// the rank-1 factors (the path coefficient τ is excluded).
pub fn beamforming_gain(m: &Beamformer, ch: &LosChannel, f: &Beamformer) -> f64 {
    let rx = cdot(&m.weights, &ch.v_uav);
    let tx = cdot(&ch.v_bs, &f.weights);
    rx.norm_sqr() * tx.norm_sqr()
}

/// Free-space path loss with beamforming, −10·log₁₀(G·λ²/(4πd)²) in dB.
/// Lower is better; zero gain maps to +∞.
pub fn path_loss_db(gain: f64, wavelength: f64, distance: f64) -> f64 {
    if gain <= 0.0 {
        return f64::INFINITY;
    }
    let fs = wavelength / (4.0 * PI * distance);
    -10.0 * (gain * fs * fs).log10()
}

/// Effective scalar coefficient seen after the BS applies a beam at
/// `bs_pointing`: τ·(v_Bᴴ f_B). Inner-product form; canonical.
pub fn effective_coeff(ch: &LosChannel, bs_pointing: &AoaPair) -> Complex64 {
    let f = beamformer(bs_pointing, &ch.bs_geom);
    ch.tau * cdot(&ch.v_bs, &f.weights)
}

/// Dirichlet kernel Σ_{n<N} e^{jπnδ} = e^{jπ(N−1)δ/2}·sin(Nπδ/2)/sin(πδ/2).
fn dirichlet(delta: f64, n: usize) -> Complex64 {
    let den = (PI * delta / 2.0).sin();
    if den.abs() < 1e-12 {
        // delta at a multiple of 2: every summand is 1
        return Complex64::new(n as f64, 0.0);
    }
    let ratio = (n as f64 * PI * delta / 2.0).sin() / den;
    Complex64::from_polar(ratio, PI * (n as f64 - 1.0) * delta / 2.0)
}

/// Closed form of [`effective_coeff`] as a product of two Dirichlet-kernel
/// ratios; kept as an independent cross-check of the inner-product path.
pub fn effective_coeff_closed_form(ch: &LosChannel, bs_pointing: &AoaPair) -> Complex64 {
    let dx = dirichlet(
        bs_pointing.psi() - ch.aoa_bs.psi(),
        ch.bs_geom.n_x,
    );
    let dz = dirichlet(
        bs_pointing.omega() - ch.aoa_bs.omega(),
        ch.bs_geom.n_second,
    );
    ch.tau * dx * dz / (ch.bs_geom.n_total() as f64).sqrt()
}

/// One noisy pilot measurement y = √P_t·(m ᴴ v_U)·τ·(v_Bᴴ f) + η with η
/// circularly-symmetric complex Gaussian of variance `noise_power_w`.
/// Valid because `m` is unit-norm, so combining preserves noise statistics.
pub fn measure(
    ch: &LosChannel,
    f: &Beamformer,
    m: &Beamformer,
    tx_power_w: f64,
    noise_power_w: f64,
    rng: &mut impl Rng,
) -> Complex64 {
    let signal = tx_power_w.sqrt()
        * ch.tau
        * cdot(&m.weights, &ch.v_uav)
        * cdot(&ch.v_bs, &f.weights);
    let s = (noise_power_w / 2.0).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    signal + Complex64::new(s * re, s * im)
}

/// dBm to watts.
pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}
