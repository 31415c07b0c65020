//! Experiment configuration: physical constants, array sizes, jitter and
//! navigation noise levels, and sampling parameters. Loaded from TOML with
//! keys named exactly like the struct fields (units in the names).

use serde::Deserialize;
use std::path::Path;

use crate::geometry::UpaGeometry;
use crate::jitter::JitterModel;
use crate::{Error, Result, SPEED_OF_LIGHT_M_S};

#[derive(Clone, Copy, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioConfig {
    pub carrier_frequency_hz: f64,
    pub noise_power_dbm: f64,
    pub bs_n_x: usize,
    pub bs_n_z: usize,
    pub uav_n_x: usize,
    pub uav_n_y: usize,
    pub sigma_alpha_rad: f64,
    pub sigma_beta_rad: f64,
    pub sigma_gamma_rad: f64,
    pub nav_position_std_m: f64,
    pub hemisphere_radius_m: f64,
    /// Cap on |sin(elevation)| when sampling UAV positions, keeping the
    /// BS-UAV path away from the array poles.
    pub elevation_guard: f64,
    pub desired_pitch_rad: f64,
    pub desired_roll_rad: f64,
    pub trials: usize,
    pub seed: u64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            carrier_frequency_hz: 28.0e9,
            noise_power_dbm: -84.0,
            bs_n_x: 16,
            bs_n_z: 16,
            uav_n_x: 16,
            uav_n_y: 16,
            sigma_alpha_rad: 0.05,
            sigma_beta_rad: 0.05,
            sigma_gamma_rad: 0.05,
            nav_position_std_m: 1.0,
            hemisphere_radius_m: 200.0,
            elevation_guard: 0.95,
            desired_pitch_rad: 0.0,
            desired_roll_rad: 0.0,
            trials: 1000,
            seed: 0,
        }
    }
}

impl ScenarioConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            Error::Io(std::io::Error::new(
                e.kind(),
                format!("cannot read config {}: {e}", path.display()),
            ))
        })?;
        let cfg: ScenarioConfig = toml::from_str(&text)
            .map_err(|e| Error::Config(format!("config {}: {e}", path.display())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.carrier_frequency_hz > 0.0) {
            return Err(Error::Config(format!(
                "carrier_frequency_hz must be positive, got {}",
                self.carrier_frequency_hz
            )));
        }
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        if !(self.hemisphere_radius_m > 0.0) {
            return Err(Error::Config(format!(
                "hemisphere_radius_m must be positive, got {}",
                self.hemisphere_radius_m
            )));
        }
        if !(0.0..1.0).contains(&self.elevation_guard) {
            return Err(Error::Config(format!(
                "elevation_guard must lie in [0, 1), got {}",
                self.elevation_guard
            )));
        }
        if self.nav_position_std_m < 0.0 {
            return Err(Error::Config(format!(
                "nav_position_std_m must be non-negative, got {}",
                self.nav_position_std_m
            )));
        }
        self.jitter_model()?;
        self.bs_geom()?;
        self.uav_geom()?;
        Ok(())
    }

    pub fn wavelength_m(&self) -> f64 {
        SPEED_OF_LIGHT_M_S / self.carrier_frequency_hz
    }

    pub fn noise_power_watts(&self) -> f64 {
        crate::channel::dbm_to_watts(self.noise_power_dbm)
    }

    pub fn bs_geom(&self) -> Result<UpaGeometry> {
        UpaGeometry::new(self.bs_n_x, self.bs_n_z, self.wavelength_m(), false)
    }

    pub fn uav_geom(&self) -> Result<UpaGeometry> {
        UpaGeometry::new(self.uav_n_x, self.uav_n_y, self.wavelength_m(), true)
    }

    pub fn jitter_model(&self) -> Result<JitterModel> {
        JitterModel::new(self.sigma_alpha_rad, self.sigma_beta_rad, self.sigma_gamma_rad)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        let cfg = ScenarioConfig::default();
        cfg.validate().unwrap();
        assert!((cfg.wavelength_m() - 0.010714285714285714).abs() < 1e-18);
        assert!((cfg.noise_power_watts() - 3.9810717055349695e-12).abs() < 1e-24);
    }

    #[test]
    fn partial_toml_fills_defaults() {
        let cfg: ScenarioConfig = toml::from_str("trials = 50\nseed = 9\n").unwrap();
        assert_eq!(cfg.trials, 50);
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.bs_n_x, 16);
        assert_eq!(cfg.noise_power_dbm, -84.0);
    }

    #[test]
    fn unknown_key_is_named_in_error() {
        let err = toml::from_str::<ScenarioConfig>("tx_power = 1.0\n").unwrap_err();
        assert!(err.to_string().contains("tx_power"), "{err}");
    }

    #[test]
    fn bad_value_type_is_named_in_error() {
        let err = toml::from_str::<ScenarioConfig>("noise_power_dbm = \"loud\"\n").unwrap_err();
        assert!(err.to_string().contains("noise_power_dbm"), "{err}");
    }

    #[test]
    fn invalid_values_rejected() {
        let mut cfg = ScenarioConfig::default();
        cfg.trials = 0;
        assert!(cfg.validate().is_err());

        let mut cfg = ScenarioConfig::default();
        cfg.carrier_frequency_hz = 0.0;
        assert!(cfg.validate().is_err());

        let mut cfg = ScenarioConfig::default();
        cfg.hemisphere_radius_m = -5.0;
        assert!(cfg.validate().is_err());

        let mut cfg = ScenarioConfig::default();
        cfg.elevation_guard = 1.0;
        assert!(cfg.validate().is_err());

        let mut cfg = ScenarioConfig::default();
        cfg.sigma_beta_rad = -0.1;
        assert!(cfg.validate().is_err());

        let mut cfg = ScenarioConfig::default();
        cfg.uav_n_x = 0;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn load_reads_file_and_validates() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cfg.toml");
        std::fs::write(&path, "trials = 7\nnav_position_std_m = 0.5\n").unwrap();
        let cfg = ScenarioConfig::load(&path).unwrap();
        assert_eq!(cfg.trials, 7);
        assert_eq!(cfg.nav_position_std_m, 0.5);

        std::fs::write(&path, "trials = 0\n").unwrap();
        let err = ScenarioConfig::load(&path).unwrap_err();
        assert!(err.to_string().contains("trials"));

        let missing = dir.path().join("nope.toml");
        assert!(matches!(ScenarioConfig::load(&missing), Err(Error::Io(_))));
    }
}
