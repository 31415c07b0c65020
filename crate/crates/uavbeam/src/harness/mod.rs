//! Monte-Carlo experiment harness: scenario sampling, navigation-error
//! modeling, beamforming-scheme path-loss traces, link-level accuracy,
//! misalignment and spectral-efficiency experiments, plus CSV and codebook
//! persistence.
//!
//! Every experiment is a pure function of (config, seed): per-trial RNG
//! streams are derived from (seed, trial, purpose, tag), so execution order
//! never changes a result and re-runs are byte-identical.

mod config;
mod experiments;
mod io;

pub use config::ScenarioConfig;
pub use experiments::{
    nav_estimate, pathloss_trace, run_link_trials, run_misalignment_experiment,
    run_mse_experiment, run_spectral_efficiency, sample_scenario, scenario_preset,
    watts_to_dbm, Method, MisalignmentCurve, MisalignmentOutcome, MseCurve, MseOutcome,
    NavEstimate, PathlossStep, SeCell, SeOutcome, TrialRecord, N_COHERENCE,
};
pub use io::{
    beamspace_csv, pathloss_csv, read_codebook, trial_records_csv, write_codebook,
    write_text, CODEBOOK_VERSION,
};

pub use crate::channel::dbm_to_watts;
