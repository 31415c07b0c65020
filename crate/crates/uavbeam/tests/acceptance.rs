//! End-to-end acceptance checks. Each test covers one numbered criterion,
//! pins its tolerances as constants, asserts its wall-clock budget, and
//! prints one `criterion N PASS` line with the measured values. Tests are
//! named `c1_` through `c7_` so the default alphabetical order runs them
//! in sequence.

use std::collections::HashMap;
use std::process::Command;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use uavbeam::estimator::{
    brute_force_oracle, estimate_aoa, objective, objective_gradient, EstimatorConfig,
};
use uavbeam::geometry::{
    aoa_uav, array_response, direction_between, wrap_sub, AoaPair, Position3, UpaGeometry,
};
use uavbeam::harness::{
    pathloss_trace, run_misalignment_experiment, run_mse_experiment, run_spectral_efficiency,
    scenario_preset, Method, ScenarioConfig, TrialRecord,
};
use uavbeam::jitter::{aoa_distribution, sample_attitude, JitterModel};
use uavbeam::sensing::{range_energy_fraction, sensing_matrix, SensingMatrix, SensingSpec};

const LAMBDA_M: f64 = 0.010714285714285714;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_uavbeam"))
}

/// Parse `key=value` stdout lines into a map.
fn kv_map(stdout: &[u8]) -> HashMap<String, f64> {
    String::from_utf8_lossy(stdout)
        .lines()
        .filter_map(|line| {
            let (k, v) = line.split_once('=')?;
            Some((k.trim().to_string(), v.trim().parse::<f64>().ok()?))
        })
        .collect()
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn sem(xs: &[f64]) -> f64 {
    let m = mean(xs);
    let var = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64;
    (var / xs.len() as f64).sqrt()
}

/// Per-trial metric slice for one (method, power), in trial order.
fn slice_by_trial(
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

fn paired_diff(a: &[f64], b: &[f64]) -> Vec<f64> {
    assert_eq!(a.len(), b.len(), "paired slices must align");
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

fn budget(name: &str, start: Instant, limit: Duration) {
    let took = start.elapsed();
    assert!(
        took <= limit,
        "{name} FAIL: took {:.1} s, budget {:.0} s",
        took.as_secs_f64(),
        limit.as_secs_f64()
    );
}

// --- criterion 1: closed-form angle statistics for the three reference
// scenarios, checked through the CLI against the published tables. ---

struct AngleAnchor {
    mu: [f64; 2],
    cov: [[f64; 2]; 2],
    stds: [f64; 2],
    interval_psi: (f64, f64),
    interval_omega: (f64, f64),
}

const ANGLE_ANCHORS: [AngleAnchor; 3] = [
    AngleAnchor {
        mu: [0.6667, -0.6667],
        cov: [[0.0014, 0.0011], [0.0011, 0.0014]],
        stds: [0.0374, 0.0374],
        interval_psi: (0.5545, 0.7789),
        interval_omega: (-0.7789, -0.5545),
    },
    AngleAnchor {
        mu: [-0.2008, -0.9212],
        cov: [[0.0024, -0.0005], [-0.0005, 0.0004]],
        stds: [0.0489, 0.02],
        interval_psi: (-0.3475, -0.0541),
        interval_omega: (-0.9812, -0.8612),
    },
    AngleAnchor {
        mu: [0.0, -0.8944],
        cov: [[0.0025, 0.0], [0.0, 0.0005]],
        stds: [0.05, 0.0224],
        interval_psi: (-0.15, 0.15),
        interval_omega: (-0.9616, -0.8272),
    },
];

const MU_TOL: f64 = 1e-3;
const COV_TOL: f64 = 1.5e-4;
const STD_TOL: f64 = 1e-3;
// Interval anchors are printed from values rounded to four decimals (the
// second scenario rounds a std of 0.019457 to 0.02 before scaling by 3).
const INTERVAL_TOL: f64 = 2e-3;
const C1_BUDGET: Duration = Duration::from_secs(1);

#[test]
fn c1_angle_statistics_match_reference_tables() {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for (idx, anchor) in ANGLE_ANCHORS.iter().enumerate() {
        let scenario = (idx + 1).to_string();
        let out = bin()
            .args(["scenario-stats", "--scenario", &scenario])
            .output()
            .expect("criterion 1 FAIL: could not run binary");
        assert!(
            out.status.success(),
            "criterion 1 FAIL: scenario {scenario} exited with {:?}",
            out.status.code()
        );
        let kv = kv_map(&out.stdout);
        let get = |key: &str| -> f64 {
            *kv.get(key)
                .unwrap_or_else(|| panic!("criterion 1 FAIL: missing key {key}"))
        };
        let mut check = |label: &str, got: f64, want: f64, tol: f64| {
            let err = (got - want).abs();
            worst = worst.max(err / tol);
            assert!(
                err <= tol,
                "criterion 1 FAIL: scenario {scenario} {label}: got {got}, want {want}, tol {tol}"
            );
        };
        check("mu_psi", get("mu_psi"), anchor.mu[0], MU_TOL);
        check("mu_omega", get("mu_omega"), anchor.mu[1], MU_TOL);
        check("cov_psi_psi", get("cov_psi_psi"), anchor.cov[0][0], COV_TOL);
        check("cov_psi_omega", get("cov_psi_omega"), anchor.cov[0][1], COV_TOL);
        check("cov_omega_omega", get("cov_omega_omega"), anchor.cov[1][1], COV_TOL);
        check("std_psi", get("std_psi"), anchor.stds[0], STD_TOL);
        check("std_omega", get("std_omega"), anchor.stds[1], STD_TOL);
        check("interval_psi_lo", get("interval_psi_lo"), anchor.interval_psi.0, INTERVAL_TOL);
        check("interval_psi_hi", get("interval_psi_hi"), anchor.interval_psi.1, INTERVAL_TOL);
        check(
            "interval_omega_lo",
            get("interval_omega_lo"),
            anchor.interval_omega.0,
            INTERVAL_TOL,
        );
        check(
            "interval_omega_hi",
            get("interval_omega_hi"),
            anchor.interval_omega.1,
            INTERVAL_TOL,
        );
    }
    budget("criterion 1", start, C1_BUDGET);
    println!(
        "criterion 1 PASS: 33 anchors over 3 scenarios, worst error {:.2}x tolerance, {:.2} s",
        worst,
        start.elapsed().as_secs_f64()
    );
}

// --- criterion 2: path-loss anchors for the three alignment schemes over a
// 1000-step jitter trace at the first reference scenario. ---

const C2_SEED: u64 = 1;
const C2_STEPS: usize = 1000;
const SCHEME1_CENTER_DB: f64 = 56.8;
const SCHEME1_TOL_DB: f64 = 0.1;
const GAP12_LIMIT_DB: f64 = 0.5;
const GAP12_MIN_FRACTION: f64 = 0.90;
const SCHEME3_MIN_EXCURSION_DB: f64 = 40.0;
const C2_BUDGET: Duration = Duration::from_secs(10);

#[test]
fn c2_pathloss_schemes_hold_reference_anchors() {
    let start = Instant::now();
    let cfg = ScenarioConfig::default();
    let (p_uav, desired) = scenario_preset(1).unwrap();
    let trace = pathloss_trace(&cfg, p_uav, &desired, C2_STEPS, C2_SEED).unwrap();
    assert_eq!(trace.len(), C2_STEPS);

    let s1_min = trace.iter().map(|s| s.scheme1_db).fold(f64::INFINITY, f64::min);
    let s1_max = trace.iter().map(|s| s.scheme1_db).fold(f64::NEG_INFINITY, f64::max);
    assert!(
        (s1_min - SCHEME1_CENTER_DB).abs() <= SCHEME1_TOL_DB
            && (s1_max - SCHEME1_CENTER_DB).abs() <= SCHEME1_TOL_DB,
        "criterion 2 FAIL: scheme 1 spans [{s1_min:.4}, {s1_max:.4}] dB, \
         want {SCHEME1_CENTER_DB} +/- {SCHEME1_TOL_DB} dB"
    );

    let close = trace
        .iter()
        .filter(|s| s.scheme2_db - s.scheme1_db < GAP12_LIMIT_DB)
        .count();
    let fraction = close as f64 / trace.len() as f64;
    assert!(
        fraction >= GAP12_MIN_FRACTION,
        "criterion 2 FAIL: scheme 2 within {GAP12_LIMIT_DB} dB of scheme 1 in only \
         {fraction:.3} of steps, want >= {GAP12_MIN_FRACTION}"
    );

    let s3_min = trace.iter().map(|s| s.scheme3_db).fold(f64::INFINITY, f64::min);
    let s3_max = trace.iter().map(|s| s.scheme3_db).fold(f64::NEG_INFINITY, f64::max);
    let excursion = s3_max - s3_min;
    assert!(
        excursion >= SCHEME3_MIN_EXCURSION_DB,
        "criterion 2 FAIL: scheme 3 excursion {excursion:.2} dB, \
         want >= {SCHEME3_MIN_EXCURSION_DB} dB"
    );

    budget("criterion 2", start, C2_BUDGET);
    println!(
        "criterion 2 PASS: scheme 1 in [{s1_min:.4}, {s1_max:.4}] dB, gap fraction {fraction:.3}, \
         scheme 3 excursion {excursion:.1} dB, {:.2} s",
        start.elapsed().as_secs_f64()
    );
}

// --- criterion 3: the three training codebooks declare the expected
// cosine-angle ranges exactly and concentrate their energy inside them. ---

const C3_SEEDS: u64 = 100;
const C3_N_TRAIN: usize = 6;
const MIN_MEAN_ENERGY_FRACTION: f64 = 0.85;
const C3_BUDGET: Duration = Duration::from_secs(30);

#[test]
fn c3_partial_codebooks_concentrate_energy_in_declared_ranges() {
    let start = Instant::now();
    let geom = UpaGeometry::new(16, 16, LAMBDA_M, true).unwrap();
    let center = AoaPair::new(0.0, 0.0);
    // (builder, expected lo, expected hi); expected bounds are exact because
    // the declared half-width is half_width + n_subarrays/n_axis capped at 1.
    let cases: [(&str, SensingSpec, f64, f64); 3] = [
        (
            "fully-random",
            SensingSpec::fully_random(C3_N_TRAIN, geom).unwrap(),
            -1.0,
            1.0,
        ),
        (
            "partial-type1",
            SensingSpec::new(C3_N_TRAIN, 4, 0.15, center, geom).unwrap(),
            -0.4,
            0.4,
        ),
        (
            "partial-type2",
            SensingSpec::new(C3_N_TRAIN, 2, 0.10, center, geom).unwrap(),
            -0.225,
            0.225,
        ),
    ];
    let mut report = Vec::new();
    for (name, spec, lo, hi) in &cases {
        let mut fractions = Vec::with_capacity(C3_SEEDS as usize);
        for seed in 0..C3_SEEDS {
            let matrix = sensing_matrix(spec, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
            assert!(
                matrix.range_x.lo() == *lo
                    && matrix.range_x.hi() == *hi
                    && matrix.range_y.lo() == *lo
                    && matrix.range_y.hi() == *hi,
                "criterion 3 FAIL: {name} declares x [{}, {}] y [{}, {}], want [{lo}, {hi}]",
                matrix.range_x.lo(),
                matrix.range_x.hi(),
                matrix.range_y.lo(),
                matrix.range_y.hi()
            );
            fractions.push(range_energy_fraction(
                &matrix,
                &matrix.range_x,
                &matrix.range_y,
            ));
        }
        let avg = mean(&fractions);
        assert!(
            avg >= MIN_MEAN_ENERGY_FRACTION,
            "criterion 3 FAIL: {name} mean in-range energy fraction {avg:.4} over \
             {C3_SEEDS} seeds, want >= {MIN_MEAN_ENERGY_FRACTION}"
        );
        report.push(format!("{name} {avg:.3}"));
    }
    budget("criterion 3", start, C3_BUDGET);
    println!(
        "criterion 3 PASS: declared ranges exact, mean energy fractions {} over {C3_SEEDS} seeds, {:.2} s",
        report.join(", "),
        start.elapsed().as_secs_f64()
    );
}

// --- criterion 4: estimator oracles. (a) analytic gradient vs central
// finite differences, (b) noiseless end-to-end recovery, (c) agreement with
// an exhaustive grid search on arrays small enough to enumerate. ---

const GRADIENT_INSTANCES: usize = 1000;
const GRADIENT_REL_TOL: f64 = 1e-4;
const FD_STEP: f64 = 1e-5;
const NOISELESS_INSTANCES: usize = 100;
const NOISELESS_N_TRAIN: usize = 36;
const NOISELESS_MAX_MSE: f64 = 1e-6;
const BRUTE_TRIALS: usize = 200;
// 8x beamwidth oversampling for a 4-element axis.
const BRUTE_GRID: usize = 32;
const C4_BUDGET: Duration = Duration::from_secs(120);

fn noiseless_y(matrix: &SensingMatrix, truth: &AoaPair, scale: Complex64) -> Vec<Complex64> {
    let b = array_response(truth, &matrix.spec.uav_geom);
    (0..matrix.n_measurements())
        .map(|n| {
            let col = matrix.column(n);
            scale * col.iter().zip(&b).map(|(m, bb)| m.conj() * bb).sum::<Complex64>()
        })
        .collect()
}

fn noisy_y(
    matrix: &SensingMatrix,
    truth: &AoaPair,
    noise_std: f64,
    rng: &mut impl Rng,
) -> Vec<Complex64> {
    noiseless_y(matrix, truth, Complex64::new(1.0, 0.0))
        .into_iter()
        .map(|c| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            c + Complex64::new(re, im) * noise_std / 2f64.sqrt()
        })
        .collect()
}

#[test]
fn c4_estimator_matches_independent_checks() {
    let start = Instant::now();
    let geom16 = UpaGeometry::new(16, 16, LAMBDA_M, true).unwrap();
    let geom4 = UpaGeometry::new(4, 4, LAMBDA_M, true).unwrap();

    // (a) gradient vs central finite differences, alternating fully-random
    // and windowed codebooks so both factor shapes are exercised.
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    let mut worst_grad = 0.0f64;
    for instance in 0..GRADIENT_INSTANCES {
        let matrix = if instance % 2 == 0 {
            let spec = SensingSpec::fully_random(10, geom16).unwrap();
            sensing_matrix(&spec, &mut ChaCha8Rng::seed_from_u64(4100 + instance as u64)).unwrap()
        } else {
            let center = AoaPair::new(rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5));
            let spec = SensingSpec::new(12, 4, 0.15, center, geom16).unwrap();
            sensing_matrix(&spec, &mut ChaCha8Rng::seed_from_u64(4100 + instance as u64)).unwrap()
        };
        let in_range = |rng: &mut ChaCha8Rng| {
            AoaPair::new(
                matrix.range_x.center + rng.gen_range(-0.8..0.8) * matrix.range_x.half_width,
                matrix.range_y.center + rng.gen_range(-0.8..0.8) * matrix.range_y.half_width,
            )
        };
        let truth = in_range(&mut rng);
        let y = noisy_y(&matrix, &truth, 0.05f64.sqrt(), &mut rng);
        let at = in_range(&mut rng);
        let (an_p, an_o) = objective_gradient(&at, &matrix, &y);
        let g = |psi: f64, om: f64| objective(&AoaPair::new(psi, om), &matrix, &y);
        let fd_p = (g(at.psi() + FD_STEP, at.omega()) - g(at.psi() - FD_STEP, at.omega()))
            / (2.0 * FD_STEP);
        let fd_o = (g(at.psi(), at.omega() + FD_STEP) - g(at.psi(), at.omega() - FD_STEP))
            / (2.0 * FD_STEP);
        let err = ((fd_p - an_p).powi(2) + (fd_o - an_o).powi(2)).sqrt();
        let norm = (an_p.powi(2) + an_o.powi(2)).sqrt().max(1e-12);
        worst_grad = worst_grad.max(err / norm);
    }
    assert!(
        worst_grad < GRADIENT_REL_TOL,
        "criterion 4 FAIL: worst relative gradient error {worst_grad:.2e} over \
         {GRADIENT_INSTANCES} instances, want < {GRADIENT_REL_TOL:.0e}"
    );

    // (b) noiseless recovery through the full coarse + fine pipeline.
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let mut sq_errors = Vec::with_capacity(NOISELESS_INSTANCES);
    for instance in 0..NOISELESS_INSTANCES {
        let spec = SensingSpec::fully_random(NOISELESS_N_TRAIN, geom16).unwrap();
        let matrix =
            sensing_matrix(&spec, &mut ChaCha8Rng::seed_from_u64(4200 + instance as u64)).unwrap();
        let truth = AoaPair::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let y = noiseless_y(&matrix, &truth, Complex64::new(0.8, 0.3));
        let est = estimate_aoa(&matrix, &y, &EstimatorConfig::for_matrix(&matrix));
        sq_errors.push(est.aoa.wrapped_sq_error(&truth));
    }
    let noiseless_mse = mean(&sq_errors);
    assert!(
        noiseless_mse < NOISELESS_MAX_MSE,
        "criterion 4 FAIL: noiseless MSE {noiseless_mse:.2e} with {NOISELESS_N_TRAIN} \
         measurements, want < {NOISELESS_MAX_MSE:.0e}"
    );

    // (c) agreement with exhaustive search on a 4x4 array.
    let mut rng = ChaCha8Rng::seed_from_u64(43);
    let cell = 2.0 / BRUTE_GRID as f64;
    let mut worst_gap = 0.0f64;
    for trial in 0..BRUTE_TRIALS {
        let spec = SensingSpec::fully_random(12, geom4).unwrap();
        let matrix =
            sensing_matrix(&spec, &mut ChaCha8Rng::seed_from_u64(4300 + trial as u64)).unwrap();
        let truth = AoaPair::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let y = noisy_y(&matrix, &truth, 0.05f64.sqrt(), &mut rng);
        let est = estimate_aoa(&matrix, &y, &EstimatorConfig::for_matrix(&matrix));
        let oracle = brute_force_oracle(&matrix, &y, BRUTE_GRID);
        let gap_psi = wrap_sub(est.aoa.psi(), oracle.psi()).abs();
        let gap_omega = wrap_sub(est.aoa.omega(), oracle.omega()).abs();
        worst_gap = worst_gap.max(gap_psi.max(gap_omega));
        assert!(
            gap_psi <= cell + 1e-12 && gap_omega <= cell + 1e-12,
            "criterion 4 FAIL: trial {trial} estimate ({}, {}) vs exhaustive ({}, {}), \
             want within one {cell:.4}-wide cell per axis",
            est.aoa.psi(),
            est.aoa.omega(),
            oracle.psi(),
            oracle.omega()
        );
    }

    budget("criterion 4", start, C4_BUDGET);
    println!(
        "criterion 4 PASS: gradient rel err {worst_grad:.1e}, noiseless MSE {noiseless_mse:.1e}, \
         exhaustive-search gap {worst_gap:.4} (cell {cell:.4}), {:.2} s",
        start.elapsed().as_secs_f64()
    );
}

// --- criterion 5: linearized angle statistics vs exact attitude sampling.
// Nonzero covariance entries are compared relatively; the third scenario's
// off-diagonal is exactly zero, so it is compared absolutely at the
// Monte-Carlo noise floor.
//
// KNOWN FAILURE, kept at the pinned tolerance rather than widened to fit:
// the exact mean of Omega carries a second-order shift of sigma^2 * |Omega|
// relative to the linearized mean (the yaw and roll curvatures each
// contribute -Omega, so E[exact] - linearized = sigma^2 * |Omega| + O(sigma^4)).
// At sigma = 0.05 that is 2.30e-3 for preset 2 (|Omega| = 0.9212) and
// 2.24e-3 for preset 3 (|Omega| = 0.8944), both above MEAN_TOL = 2e-3,
// while preset 1 (|Omega| = 0.6667) sits at 1.67e-3. Verified against
// central finite differences of the exact map and a 10^6-draw run; the
// violation is deterministic, not sampling noise (sem of the mean is 1.6e-4
// at 10^5 draws). The test reports every violation so the gap is measured,
// not hidden. ---

const C5_DRAWS: usize = 100_000;
const C5_SIGMA: f64 = 0.05;
const MEAN_TOL: f64 = 2e-3;
const COV_REL_TOL: f64 = 0.10;
const COV_ABS_FLOOR: f64 = 1e-6;
const COV_ABS_TOL: f64 = 2e-5;
const C5_BUDGET: Duration = Duration::from_secs(30);

#[test]
fn c5_linearized_statistics_match_exact_sampling() {
    let start = Instant::now();
    let jm = JitterModel::isotropic(C5_SIGMA).unwrap();
    let mut worst_mean = 0.0f64;
    let mut worst_cov_rel = 0.0f64;
    let mut violations: Vec<String> = Vec::new();
    for scenario in 1..=3u8 {
        let (p_uav, desired) = scenario_preset(scenario).unwrap();
        let dir = direction_between(Position3::origin(), p_uav).unwrap();
        let ana = aoa_distribution(&desired, &dir, &jm);

        let mut rng = ChaCha8Rng::seed_from_u64(50 + scenario as u64);
        let mut psis = Vec::with_capacity(C5_DRAWS);
        let mut omegas = Vec::with_capacity(C5_DRAWS);
        for _ in 0..C5_DRAWS {
            let att = sample_attitude(&desired, &jm, &mut rng);
            let pair = aoa_uav(&dir, &att);
            psis.push(pair.psi());
            omegas.push(pair.omega());
        }
        let emp_mean = [mean(&psis), mean(&omegas)];
        let centered: Vec<(f64, f64)> = psis
            .iter()
            .zip(&omegas)
            .map(|(p, o)| (p - emp_mean[0], o - emp_mean[1]))
            .collect();
        let denom = (C5_DRAWS - 1) as f64;
        let emp_cov = [
            [
                centered.iter().map(|(p, _)| p * p).sum::<f64>() / denom,
                centered.iter().map(|(p, o)| p * o).sum::<f64>() / denom,
            ],
            [
                0.0,
                centered.iter().map(|(_, o)| o * o).sum::<f64>() / denom,
            ],
        ];

        for (i, label) in [(0, "psi"), (1, "omega")] {
            let err = (emp_mean[i] - ana.mean[i]).abs();
            worst_mean = worst_mean.max(err);
            if err > MEAN_TOL {
                violations.push(format!(
                    "scenario {scenario} mean {label}: exact {:.6} vs linearized {:.6} \
                     (gap {err:.3e} > {MEAN_TOL:.0e})",
                    emp_mean[i], ana.mean[i]
                ));
            }
        }
        for (i, j) in [(0, 0), (0, 1), (1, 1)] {
            let a = ana.cov[(i, j)];
            let e = emp_cov[i][j];
            if a.abs() >= COV_ABS_FLOOR {
                let rel = (e - a).abs() / a.abs();
                worst_cov_rel = worst_cov_rel.max(rel);
                if rel > COV_REL_TOL {
                    violations.push(format!(
                        "scenario {scenario} cov[{i}][{j}]: exact {e:.3e} vs linearized \
                         {a:.3e} (rel err {rel:.3} > {COV_REL_TOL})"
                    ));
                }
            } else if (e - a).abs() > COV_ABS_TOL {
                violations.push(format!(
                    "scenario {scenario} cov[{i}][{j}]: exact {e:.3e} vs linearized {a:.3e} \
                     (abs tol {COV_ABS_TOL:.0e})"
                ));
            }
        }
    }
    assert!(
        violations.is_empty(),
        "criterion 5 FAIL: exact sampling deviates from the linearized statistics beyond \
         the pinned tolerances; the mean gaps equal the second-order shift \
         sigma^2 * |Omega| of the exact map (see the note above this test):\n  {}",
        violations.join("\n  ")
    );
    budget("criterion 5", start, C5_BUDGET);
    println!(
        "criterion 5 PASS: {C5_DRAWS} draws x 3 scenarios, worst mean gap {worst_mean:.1e}, \
         worst cov rel err {worst_cov_rel:.3}, {:.2} s",
        start.elapsed().as_secs_f64()
    );
}

// --- criterion 6: Monte-Carlo link trials reproduce the reference trends:
// (a) nav-only misalignment rate, (b) training-set ordering at 16 dBm,
// (c) the fully-random curve crossing the nav-only floor, (d) an interior
// optimum training length for the narrow codebook at -10 dBm. ---

const C6_TRIALS: usize = 5000;
const C6_SEED: u64 = 1;
const C6_N_TRAIN: usize = 6;
const MISALIGN_CENTER: f64 = 0.10;
const MISALIGN_TOL: f64 = 0.03;
const SE_POWER_DBM: f64 = -10.0;
const SE_N_LIST: [usize; 7] = [4, 6, 8, 10, 12, 14, 16];
const C6_BUDGET: Duration = Duration::from_secs(900);

#[test]
fn c6_link_trials_reproduce_reference_trends() {
    let start = Instant::now();
    let cfg = ScenarioConfig {
        trials: C6_TRIALS,
        seed: C6_SEED,
        ..ScenarioConfig::default()
    };

    // (a) nav-only misalignment rate at any power (flat in power).
    let mis = run_misalignment_experiment(&cfg, &[Method::NavOnly], &[16.0], C6_N_TRAIN).unwrap();
    let rate = mis.curves[0].rate[0];
    assert!(
        (rate - MISALIGN_CENTER).abs() <= MISALIGN_TOL,
        "criterion 6 FAIL: nav-only misalignment rate {rate:.4}, want \
         {MISALIGN_CENTER} +/- {MISALIGN_TOL}"
    );

    // (b) + (c) share one record set over three powers.
    let methods = [
        Method::NavOnly,
        Method::FullyRandom,
        Method::PartialType1,
        Method::PartialType2,
    ];
    let powers = [10.0, 16.0, 22.0];
    let mse = run_mse_experiment(&cfg, &methods, &powers, C6_N_TRAIN).unwrap();
    let errs = |m: Method, p: f64| slice_by_trial(&mse.records, m, p, |r| r.sq_error);

    // (b) ordering type2 <= type1 <= fully at 16 dBm must not be violated
    // with 2-sigma confidence on the paired per-trial differences.
    let type2 = errs(Method::PartialType2, 16.0);
    let type1 = errs(Method::PartialType1, 16.0);
    let fully = errs(Method::FullyRandom, 16.0);
    for (label, better, worse) in [
        ("type2 vs type1", &type2, &type1),
        ("type1 vs fully-random", &type1, &fully),
    ] {
        let d = paired_diff(better, worse);
        let (m, s) = (mean(&d), sem(&d));
        assert!(
            m <= 2.0 * s,
            "criterion 6 FAIL: ordering {label} violated at 16 dBm: paired mean diff \
             {m:.3e} > 2 x sem {s:.3e}"
        );
    }

    // (c) fully-random sits above the nav-only floor at 10 dBm and below it
    // at 22 dBm, each side with 2-sigma confidence.
    let nav10 = errs(Method::NavOnly, 10.0);
    let nav22 = errs(Method::NavOnly, 22.0);
    let fully10 = errs(Method::FullyRandom, 10.0);
    let fully22 = errs(Method::FullyRandom, 22.0);
    let d10 = paired_diff(&fully10, &nav10);
    let d22 = paired_diff(&fully22, &nav22);
    let (m10, s10) = (mean(&d10), sem(&d10));
    let (m22, s22) = (mean(&d22), sem(&d22));
    assert!(
        m10 > 2.0 * s10,
        "criterion 6 FAIL: fully-random MSE not above nav-only at 10 dBm: \
         paired mean diff {m10:.3e}, sem {s10:.3e}"
    );
    assert!(
        m22 < -2.0 * s22,
        "criterion 6 FAIL: fully-random MSE not below nav-only at 22 dBm: \
         paired mean diff {m22:.3e}, sem {s22:.3e}"
    );

    // (d) spectral efficiency of the narrow codebook peaks strictly inside
    // the swept training lengths.
    let se = run_spectral_efficiency(&cfg, &[Method::PartialType2], &[SE_POWER_DBM], &SE_N_LIST)
        .unwrap();
    let cells: Vec<_> = se
        .cells
        .iter()
        .filter(|c| c.method == Method::PartialType2)
        .collect();
    assert_eq!(cells.len(), SE_N_LIST.len());
    let best = cells
        .iter()
        .max_by(|a, b| a.se.total_cmp(&b.se))
        .unwrap();
    let first = cells.iter().find(|c| c.n_train == SE_N_LIST[0]).unwrap();
    let last = cells
        .iter()
        .find(|c| c.n_train == *SE_N_LIST.last().unwrap())
        .unwrap();
    assert!(
        best.n_train != first.n_train && best.n_train != last.n_train,
        "criterion 6 FAIL: spectral efficiency peaks at the sweep edge N = {}",
        best.n_train
    );
    for edge in [first, last] {
        let margin = 2.0 * (best.sem.powi(2) + edge.sem.powi(2)).sqrt();
        assert!(
            best.se - edge.se > margin,
            "criterion 6 FAIL: peak {:.3} at N = {} not separated from {:.3} at N = {} \
             (2-sigma margin {margin:.3})",
            best.se,
            best.n_train,
            edge.se,
            edge.n_train
        );
    }

    budget("criterion 6", start, C6_BUDGET);
    println!(
        "criterion 6 PASS: misalignment {rate:.4}, MSE at 16 dBm {:.2e} <= {:.2e} <= {:.2e}, \
         crossing diffs {m10:.2e} / {m22:.2e}, SE peak at N = {} ({:.3} b/s/Hz), {:.1} s",
        mean(&type2),
        mean(&type1),
        mean(&fully),
        best.n_train,
        best.se,
        start.elapsed().as_secs_f64()
    );
}

// --- criterion 7: rerunning an experiment command with the same seed must
// reproduce its CSV output byte for byte. ---

const C7_BUDGET: Duration = Duration::from_secs(60);

#[test]
fn c7_csv_outputs_are_bit_reproducible() {
    let start = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let path = |name: &str| dir.path().join(name).to_str().unwrap().to_string();

    let mut pairs = Vec::new();
    for run in ["a", "b"] {
        let out_mse = path(&format!("mse_{run}.csv"));
        let status = bin()
            .args([
                "mse",
                "--seed",
                "7",
                "--methods",
                "nav-only,partial-type2",
                "--powers-dbm",
                "10,16",
                "--n-train",
                "6",
                "--trials",
                "50",
                "--out",
                &out_mse,
            ])
            .status()
            .unwrap();
        assert!(status.success(), "criterion 7 FAIL: mse run exited {status:?}");
        let out_pl = path(&format!("pathloss_{run}.csv"));
        let status = bin()
            .args(["pathloss", "--seed", "3", "--steps", "200", "--out", &out_pl])
            .status()
            .unwrap();
        assert!(status.success(), "criterion 7 FAIL: pathloss run exited {status:?}");
        pairs.push((std::fs::read(out_mse).unwrap(), std::fs::read(out_pl).unwrap()));
    }

    let (mse_a, pl_a) = &pairs[0];
    let (mse_b, pl_b) = &pairs[1];
    assert!(!mse_a.is_empty() && !pl_a.is_empty(), "criterion 7 FAIL: empty CSV output");
    assert!(
        mse_a.windows(2).any(|w| w == b"\r\n"),
        "criterion 7 FAIL: CSV output is not CRLF-terminated"
    );
    assert!(
        mse_a == mse_b,
        "criterion 7 FAIL: trial CSV differs between identical runs"
    );
    assert!(
        pl_a == pl_b,
        "criterion 7 FAIL: path-loss CSV differs between identical runs"
    );

    budget("criterion 7", start, C7_BUDGET);
    println!(
        "criterion 7 PASS: {} + {} byte CSV outputs identical across reruns, {:.2} s",
        mse_a.len(),
        pl_a.len(),
        start.elapsed().as_secs_f64()
    );
}
