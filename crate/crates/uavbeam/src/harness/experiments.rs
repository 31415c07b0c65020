//! Scenario sampling, navigation error model, and the Monte-Carlo
//! experiments behind the accuracy, misalignment, path-loss, and
//! spectral-efficiency studies.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use std::f64::consts::PI;

use super::config::ScenarioConfig;
use crate::channel::{
    beamformer, beamforming_gain, dbm_to_watts, los_channel, path_loss_db, Beamformer, LosChannel,
};
use crate::estimator::{estimate_aoa, EstimatorConfig};
use crate::geometry::{aoa_bs, aoa_uav, direction_between, AoaPair, Attitude, Position3};
use crate::jitter::sample_attitude;
use crate::sensing::{sensing_matrix, SensingSpec};
use crate::{cdot, Error, Result};

/// Signaling intervals per coherence block; training consumes `n_train` of
/// them and data transmission the rest.
pub const N_COHERENCE: usize = 100;

const PURPOSE_SCENARIO: u64 = 0;
const PURPOSE_JITTER: u64 = 1;
const PURPOSE_NAV: u64 = 2;
const PURPOSE_SENSING: u64 = 3;
const PURPOSE_NOISE: u64 = 4;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn stream_seed(seed: u64, trial: u64, purpose: u64, tag: u64) -> u64 {
    let mut h = splitmix64(seed);
    for p in [trial, purpose, tag] {
        h = splitmix64(h ^ splitmix64(p));
    }
    h
}

/// Independent RNG stream for one (trial, purpose, tag) slot. Streams are a
/// pure function of their key, so trials can run in any order, or in
/// parallel, without changing a single draw.
fn stream_rng(seed: u64, trial: u64, purpose: u64, tag: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(stream_seed(seed, trial, purpose, tag))
}

fn uniform(rng: &mut impl Rng, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * rng.gen::<f64>()
}

/// Pairwise summation; bounds rounding growth to O(log n) independent of how
/// the terms were produced.
fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 32 {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

fn mean(xs: &[f64]) -> f64 {
    pairwise_sum(xs) / xs.len() as f64
}

/// Standard error of the mean (sample variance, n−1 normalization).
fn sem(xs: &[f64]) -> f64 {
    let n = xs.len();
    if n < 2 {
        return 0.0;
    }
    let m = mean(xs);
    let sq: Vec<f64> = xs.iter().map(|x| (x - m).powi(2)).collect();
    (pairwise_sum(&sq) / (n as f64 - 1.0) / n as f64).sqrt()
}

pub fn watts_to_dbm(watts: f64) -> f64 {
    10.0 * watts.log10() + 30.0
}

/// Beam-training method under comparison. The partial presets fix the
/// sub-array count and half-width; their sensing range follows the
/// navigation estimate each trial.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Method {
    NavOnly,
    FullyRandom,
    PartialType1,
    PartialType2,
}

impl Method {
    pub const ALL: [Method; 4] = [
        Method::NavOnly,
        Method::FullyRandom,
        Method::PartialType1,
        Method::PartialType2,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::NavOnly => "nav-only",
            Method::FullyRandom => "fully-random",
            Method::PartialType1 => "partial-type1",
            Method::PartialType2 => "partial-type2",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| {
                Error::Config(format!(
                    "unknown method `{s}` (expected nav-only, fully-random, partial-type1, or partial-type2)"
                ))
            })
    }

    fn tag(self) -> u64 {
        match self {
            Method::NavOnly => 0,
            Method::FullyRandom => 1,
            Method::PartialType1 => 2,
            Method::PartialType2 => 3,
        }
    }

    /// Sensing spec for this method, centered at the navigation rough
    /// estimate. None for nav-only, which skips training entirely.
    pub fn sensing_spec(
        self,
        n_train: usize,
        center: AoaPair,
        geom: crate::geometry::UpaGeometry,
    ) -> Result<Option<SensingSpec>> {
        match self {
            Method::NavOnly => Ok(None),
            Method::FullyRandom => Ok(Some(SensingSpec::fully_random(n_train, geom)?)),
            Method::PartialType1 => Ok(Some(SensingSpec::new(n_train, 4, 0.15, center, geom)?)),
            Method::PartialType2 => Ok(Some(SensingSpec::new(n_train, 2, 0.10, center, geom)?)),
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Draws a UAV position uniformly in azimuth on the upper hemisphere shell
/// (|sin elevation| capped by the guard) and a desired attitude with uniform
/// yaw and configured pitch/roll.
pub fn sample_scenario(cfg: &ScenarioConfig, rng: &mut impl Rng) -> (Position3, Attitude) {
    let u = uniform(rng, 0.0, cfg.elevation_guard);
    let az = uniform(rng, -PI, PI);
    let yaw = uniform(rng, -PI, PI);
    let r = (1.0 - u * u).sqrt();
    let p = Position3::new(
        cfg.hemisphere_radius_m * r * az.cos(),
        cfg.hemisphere_radius_m * r * az.sin(),
        cfg.hemisphere_radius_m * u,
    );
    (p, Attitude::new(yaw, cfg.desired_pitch_rad, cfg.desired_roll_rad))
}

/// Direction knowledge available without beam training: satellite-grade
/// position (independent Gaussian error per axis) and the desired attitude
/// reported by the inertial unit. Both rough angle pairs are recomputed
/// from the perturbed position so they can never drift out of sync.
#[derive(Clone, Copy, Debug)]
pub struct NavEstimate {
    pub position_estimate: Position3,
    pub attitude_estimate: Attitude,
    pub bs_pair: AoaPair,
    pub uav_pair: AoaPair,
}

pub fn nav_estimate(
    p_uav: Position3,
    desired: &Attitude,
    cfg: &ScenarioConfig,
    rng: &mut impl Rng,
) -> Result<NavEstimate> {
    let nx: f64 = rng.sample(StandardNormal);
    let ny: f64 = rng.sample(StandardNormal);
    let nz: f64 = rng.sample(StandardNormal);
    let s = cfg.nav_position_std_m;
    let p_hat = Position3::new(p_uav.x + s * nx, p_uav.y + s * ny, p_uav.z + s * nz);
    let dir = direction_between(Position3::origin(), p_hat)?;
    Ok(NavEstimate {
        position_estimate: p_hat,
        attitude_estimate: *desired,
        bs_pair: aoa_bs(&dir),
        uav_pair: aoa_uav(&dir, desired),
    })
}

/// Free-space path loss (beamforming gains included) per jitter step for
/// the three alignment schemes: true angles both sides; navigation at the
/// BS side only; navigation at both sides.
#[derive(Clone, Copy, Debug)]
pub struct PathlossStep {
    pub step: usize,
    pub scheme1_db: f64,
    pub scheme2_db: f64,
    pub scheme3_db: f64,
}

pub fn pathloss_trace(
    cfg: &ScenarioConfig,
    p_uav: Position3,
    desired: &Attitude,
    n_steps: usize,
    seed: u64,
) -> Result<Vec<PathlossStep>> {
    cfg.validate()?;
    let bs_geom = cfg.bs_geom()?;
    let uav_geom = cfg.uav_geom()?;
    let jm = cfg.jitter_model()?;
    let lam = cfg.wavelength_m();
    let mut out = Vec::with_capacity(n_steps);
    for step in 0..n_steps {
        let t = step as u64;
        let att = sample_attitude(desired, &jm, &mut stream_rng(seed, t, PURPOSE_JITTER, 0));
        let nav = nav_estimate(p_uav, desired, cfg, &mut stream_rng(seed, t, PURPOSE_NAV, 0))?;
        let ch = los_channel(p_uav, &att, &bs_geom, &uav_geom)?;
        let f_true = beamformer(&ch.aoa_bs, &bs_geom);
        let f_nav = beamformer(&nav.bs_pair, &bs_geom);
        let m_true = beamformer(&ch.aoa_uav, &uav_geom);
        let m_nav = beamformer(&nav.uav_pair, &uav_geom);
        out.push(PathlossStep {
            step,
            scheme1_db: path_loss_db(beamforming_gain(&m_true, &ch, &f_true), lam, ch.distance),
            scheme2_db: path_loss_db(beamforming_gain(&m_true, &ch, &f_nav), lam, ch.distance),
            scheme3_db: path_loss_db(beamforming_gain(&m_nav, &ch, &f_nav), lam, ch.distance),
        });
    }
    Ok(out)
}

/// One method's outcome for one trial at one transmit power.
#[derive(Clone, Copy, Debug)]
pub struct TrialRecord {
    pub trial: usize,
    pub method: Method,
    pub tx_power_dbm: f64,
    pub n_train: usize,
    pub true_uav: AoaPair,
    pub true_bs: AoaPair,
    pub nav_uav: AoaPair,
    pub nav_bs: AoaPair,
    pub estimate: AoaPair,
    pub sq_error: f64,
    pub received_power_dbm: f64,
    pub misaligned: bool,
    pub data_rate_bps_hz: f64,
    pub trial_seed: u64,
}

struct TrialContext {
    ch: LosChannel,
    nav: NavEstimate,
    bs_beam: Beamformer,
    bs_factor: Complex64,
    trial_seed: u64,
}

fn trial_context(
    cfg: &ScenarioConfig,
    trial: usize,
    bs_geom: &crate::geometry::UpaGeometry,
    uav_geom: &crate::geometry::UpaGeometry,
    jm: &crate::jitter::JitterModel,
) -> Result<TrialContext> {
    let seed = cfg.seed;
    let t = trial as u64;
    let (p_uav, desired) = sample_scenario(cfg, &mut stream_rng(seed, t, PURPOSE_SCENARIO, 0));
    let att = sample_attitude(&desired, jm, &mut stream_rng(seed, t, PURPOSE_JITTER, 0));
    let nav = nav_estimate(p_uav, &desired, cfg, &mut stream_rng(seed, t, PURPOSE_NAV, 0))?;
    let ch = los_channel(p_uav, &att, bs_geom, uav_geom)?;
    let bs_beam = beamformer(&nav.bs_pair, bs_geom);
    let bs_factor = cdot(&ch.v_bs, &bs_beam.weights);
    Ok(TrialContext {
        ch,
        nav,
        bs_beam,
        bs_factor,
        trial_seed: stream_seed(seed, t, PURPOSE_SCENARIO, 0),
    })
}

fn make_record(
    cfg: &ScenarioConfig,
    ctx: &TrialContext,
    trial: usize,
    method: Method,
    n_train: usize,
    tx_power_dbm: f64,
    estimate: AoaPair,
) -> TrialRecord {
    let uav_beam = beamformer(&estimate, &ctx.ch.uav_geom);
    let gain = beamforming_gain(&uav_beam, &ctx.ch, &ctx.bs_beam);
    let full_gain = (ctx.ch.bs_geom.n_total() * ctx.ch.uav_geom.n_total()) as f64;
    let tx_w = dbm_to_watts(tx_power_dbm);
    let tau_sq = ctx.ch.tau.norm_sqr();
    let rx_w = tx_w * tau_sq * gain;
    let max_w = tx_w * tau_sq * full_gain;
    let rate = (1.0 + rx_w / cfg.noise_power_watts()).log2();
    TrialRecord {
        trial,
        method,
        tx_power_dbm,
        n_train,
        true_uav: ctx.ch.aoa_uav,
        true_bs: ctx.ch.aoa_bs,
        nav_uav: ctx.nav.uav_pair,
        nav_bs: ctx.nav.bs_pair,
        estimate,
        sq_error: estimate.wrapped_sq_error(&ctx.ch.aoa_uav),
        received_power_dbm: watts_to_dbm(rx_w),
        misaligned: watts_to_dbm(rx_w) < watts_to_dbm(max_w) - 10.0,
        data_rate_bps_hz: rate,
        trial_seed: ctx.trial_seed,
    }
}

fn sensing_stream_tag(method: Method, n_train: usize) -> u64 {
    ((n_train as u64) << 8) | method.tag()
}

/// Runs the per-trial training pipeline for every (method, power)
/// combination and returns one record per combination per trial. The noise
/// realization is shared across transmit powers (common random numbers), so
/// power sweeps differ only in signal amplitude.
pub fn run_link_trials(
    cfg: &ScenarioConfig,
    methods: &[Method],
    tx_powers_dbm: &[f64],
    n_train: usize,
) -> Result<Vec<TrialRecord>> {
    cfg.validate()?;
    if methods.is_empty() {
        return Err(Error::Config("at least one method is required".into()));
    }
    if tx_powers_dbm.is_empty() {
        return Err(Error::Config("at least one transmit power is required".into()));
    }
    let bs_geom = cfg.bs_geom()?;
    let uav_geom = cfg.uav_geom()?;
    let jm = cfg.jitter_model()?;
    // surface impossible sensing configurations before any trial runs
    for method in methods {
        method.sensing_spec(n_train, AoaPair::new(0.0, 0.0), uav_geom)?;
    }
    let noise_w = cfg.noise_power_watts();

    let mut records = Vec::with_capacity(cfg.trials * methods.len() * tx_powers_dbm.len());
    for trial in 0..cfg.trials {
        let ctx = trial_context(cfg, trial, &bs_geom, &uav_geom, &jm)?;
        for &method in methods {
            match method.sensing_spec(n_train, ctx.nav.uav_pair, uav_geom)? {
                None => {
                    for &p in tx_powers_dbm {
                        records.push(make_record(cfg, &ctx, trial, method, 0, p, ctx.nav.uav_pair));
                    }
                }
                Some(spec) => {
                    let tag = sensing_stream_tag(method, n_train);
                    let matrix = sensing_matrix(
                        &spec,
                        &mut stream_rng(cfg.seed, trial as u64, PURPOSE_SENSING, tag),
                    )?;
                    let est_cfg = EstimatorConfig::for_matrix(&matrix);
                    let signal: Vec<Complex64> = (0..n_train)
                        .map(|n| {
                            ctx.ch.tau * ctx.bs_factor * cdot(&matrix.column(n), &ctx.ch.v_uav)
                        })
                        .collect();
                    let mut nrng = stream_rng(cfg.seed, trial as u64, PURPOSE_NOISE, tag);
                    let noise: Vec<Complex64> = (0..n_train)
                        .map(|_| {
                            let re: f64 = nrng.sample(StandardNormal);
                            let im: f64 = nrng.sample(StandardNormal);
                            Complex64::new(re, im) * (noise_w / 2.0).sqrt()
                        })
                        .collect();
                    for &p in tx_powers_dbm {
                        let amp = dbm_to_watts(p).sqrt();
                        let y: Vec<Complex64> = signal
                            .iter()
                            .zip(&noise)
                            .map(|(s, e)| amp * s + e)
                            .collect();
                        let est = estimate_aoa(&matrix, &y, &est_cfg);
                        records.push(make_record(cfg, &ctx, trial, method, n_train, p, est.aoa));
                    }
                }
            }
        }
    }
    Ok(records)
}

#[derive(Clone, Debug)]
pub struct MseCurve {
    pub method: Method,
    pub tx_power_dbm: Vec<f64>,
    pub mse: Vec<f64>,
    pub sem: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct MseOutcome {
    pub curves: Vec<MseCurve>,
    pub records: Vec<TrialRecord>,
}

/// Per-(method, power) slice of one metric, in trial order regardless of
/// how the records were produced or stored.
fn metric_slice(
    records: &[TrialRecord],
    method: Method,
    power: f64,
    metric: impl Fn(&TrialRecord) -> f64,
) -> Vec<f64> {
    let mut keyed: Vec<(usize, f64)> = records
        .iter()
        .filter(|r| r.method == method && r.tx_power_dbm == power)
        .map(|r| (r.trial, metric(r)))
        .collect();
    keyed.sort_by_key(|(t, _)| *t);
    keyed.into_iter().map(|(_, v)| v).collect()
}

/// Wrapped-squared-error Monte-Carlo curves per method over a transmit
/// power sweep. The nav-only curve bypasses training and is flat in power.
pub fn run_mse_experiment(
    cfg: &ScenarioConfig,
    methods: &[Method],
    tx_powers_dbm: &[f64],
    n_train: usize,
) -> Result<MseOutcome> {
    let records = run_link_trials(cfg, methods, tx_powers_dbm, n_train)?;
    let curves = methods
        .iter()
        .map(|&method| {
            let mut mse = Vec::with_capacity(tx_powers_dbm.len());
            let mut sems = Vec::with_capacity(tx_powers_dbm.len());
            for &p in tx_powers_dbm {
                let errs = metric_slice(&records, method, p, |r| r.sq_error);
                mse.push(mean(&errs));
                sems.push(sem(&errs));
            }
            MseCurve {
                method,
                tx_power_dbm: tx_powers_dbm.to_vec(),
                mse,
                sem: sems,
            }
        })
        .collect();
    Ok(MseOutcome { curves, records })
}

#[derive(Clone, Debug)]
pub struct MisalignmentCurve {
    pub method: Method,
    pub tx_power_dbm: Vec<f64>,
    pub rate: Vec<f64>,
    pub sem: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct MisalignmentOutcome {
    pub curves: Vec<MisalignmentCurve>,
    pub records: Vec<TrialRecord>,
}

/// Fraction of trials whose post-beamforming received power falls more than
/// 10 dB below the perfectly aligned maximum at the trial's distance.
pub fn run_misalignment_experiment(
    cfg: &ScenarioConfig,
    methods: &[Method],
    tx_powers_dbm: &[f64],
    n_train: usize,
) -> Result<MisalignmentOutcome> {
    let records = run_link_trials(cfg, methods, tx_powers_dbm, n_train)?;
    let curves = methods
        .iter()
        .map(|&method| {
            let mut rate = Vec::with_capacity(tx_powers_dbm.len());
            let mut sems = Vec::with_capacity(tx_powers_dbm.len());
            for &p in tx_powers_dbm {
                let flags = metric_slice(&records, method, p, |r| f64::from(u8::from(r.misaligned)));
                let r = mean(&flags);
                rate.push(r);
                sems.push((r * (1.0 - r) / flags.len() as f64).sqrt());
            }
            MisalignmentCurve {
                method,
                tx_power_dbm: tx_powers_dbm.to_vec(),
                rate,
                sem: sems,
            }
        })
        .collect();
    Ok(MisalignmentOutcome { curves, records })
}

#[derive(Clone, Copy, Debug)]
pub struct SeCell {
    pub method: Method,
    pub tx_power_dbm: f64,
    pub n_train: usize,
    pub se: f64,
    pub sem: f64,
}

#[derive(Clone, Debug)]
pub struct SeOutcome {
    pub cells: Vec<SeCell>,
    pub records: Vec<TrialRecord>,
}

/// Spectral efficiency E[R·(N_coh − N)/N_coh] per method, transmit power,
/// and training length. Nav-only spends nothing on training (reported once
/// per power with n_train = 0). Training lengths above the coherence block
/// are rejected; N = N_coh yields exactly zero.
pub fn run_spectral_efficiency(
    cfg: &ScenarioConfig,
    methods: &[Method],
    tx_powers_dbm: &[f64],
    n_list: &[usize],
) -> Result<SeOutcome> {
    if n_list.is_empty() && methods.iter().any(|m| *m != Method::NavOnly) {
        return Err(Error::Config("at least one training length is required".into()));
    }
    for &n in n_list {
        if n > N_COHERENCE {
            return Err(Error::Config(format!(
                "training length {n} exceeds the coherence block of {N_COHERENCE} intervals"
            )));
        }
    }
    let mut cells = Vec::new();
    let mut records = Vec::new();
    let training: Vec<Method> = methods
        .iter()
        .copied()
        .filter(|m| *m != Method::NavOnly)
        .collect();
    if methods.contains(&Method::NavOnly) {
        let nav_records = run_link_trials(cfg, &[Method::NavOnly], tx_powers_dbm, 0)?;
        for &p in tx_powers_dbm {
            let rates = metric_slice(&nav_records, Method::NavOnly, p, |r| r.data_rate_bps_hz);
            cells.push(SeCell {
                method: Method::NavOnly,
                tx_power_dbm: p,
                n_train: 0,
                se: mean(&rates),
                sem: sem(&rates),
            });
        }
        records.extend(nav_records);
    }
    for &n in n_list {
        if training.is_empty() {
            break;
        }
        let n_records = run_link_trials(cfg, &training, tx_powers_dbm, n)?;
        let overhead = (N_COHERENCE - n) as f64 / N_COHERENCE as f64;
        for &method in &training {
            for &p in tx_powers_dbm {
                let ses: Vec<f64> = metric_slice(&n_records, method, p, |r| r.data_rate_bps_hz)
                    .into_iter()
                    .map(|r| r * overhead)
                    .collect();
                cells.push(SeCell {
                    method,
                    tx_power_dbm: p,
                    n_train: n,
                    se: mean(&ses),
                    sem: sem(&ses),
                });
            }
        }
        records.extend(n_records);
    }
    Ok(SeOutcome { cells, records })
}

/// Reference geometries shared by tests and the CLI: (1) UAV at
/// (−100, 100, 50) m with zero desired attitude, (2) the same position with
/// 1 rad yaw, (3) UAV at (0, 100, 50) m with zero desired attitude.
pub fn scenario_preset(index: u8) -> Result<(Position3, Attitude)> {
    match index {
        1 => Ok((Position3::new(-100.0, 100.0, 50.0), Attitude::zero())),
        2 => Ok((Position3::new(-100.0, 100.0, 50.0), Attitude::new(1.0, 0.0, 0.0))),
        3 => Ok((Position3::new(0.0, 100.0, 50.0), Attitude::zero())),
        other => Err(Error::Config(format!(
            "scenario preset must be 1, 2, or 3, got {other}"
        ))),
    }
}
