//! Sweep configuration: defaults, flat `key = value` config files, and CLI
//! flag merging with validation.

use std::f64::consts::{FRAC_PI_6, PI};
use std::fs;
use std::path::Path;

use crate::channel::AngleRange;
use crate::error::{Error, Result};
use crate::training::NormalizationMode;
use crate::transceiver::SignalMode;

/// Largest supported Monte Carlo iteration count; keeps the derived random
/// stream identifiers collision-free.
pub const MAX_ITERATIONS: usize = 1 << 40;

/// Full simulation configuration. The total transmit antenna count is derived
/// as N_t = N·M and never stored.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    /// Data streams / transmit subarrays (transmit RF chains).
    pub n: usize,
    /// Antennas per transmit subarray.
    pub m: usize,
    /// Receive antennas.
    pub n_r: usize,
    /// Receive RF chains.
    pub k: usize,
    /// Multipath count.
    pub l: usize,
    /// Antenna spacing over wavelength, shared by both arrays.
    pub d_over_lambda: f64,
    /// Departure azimuth range.
    pub aod_range: AngleRange,
    /// Arrival azimuth range.
    pub aoa_range: AngleRange,
    /// SNR grid in dB, ascending.
    pub snr_grid_db: Vec<f64>,
    /// Monte Carlo iterations per grid point.
    pub mc_iterations: usize,
    /// Master seed of the reproducible stream tree.
    pub master_seed: u64,
    /// Training signal law.
    pub signal_mode: SignalMode,
    /// AWV estimate post-processing.
    pub normalization: NormalizationMode,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            n: 8,
            m: 8,
            n_r: 16,
            k: 4,
            l: 3,
            d_over_lambda: 0.5,
            aod_range: AngleRange::new(-FRAC_PI_6, FRAC_PI_6).expect("static range"),
            aoa_range: AngleRange::new(-PI, PI).expect("static range"),
            snr_grid_db: vec![0.0, 5.0, 10.0, 15.0, 20.0],
            mc_iterations: 500,
            master_seed: 1,
            signal_mode: SignalMode::Gaussian,
            normalization: NormalizationMode::UnitNorm,
        }
    }
}

impl SimConfig {
    /// Total transmit antennas N_t = N·M.
    pub fn n_t(&self) -> usize {
        self.n * self.m
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.m == 0 || self.n_r == 0 || self.k == 0 || self.l == 0 {
            return Err(Error::Config(
                "n, m, n_r, k and l must all be at least 1".into(),
            ));
        }
        if !self.n_r.is_multiple_of(self.k) {
            return Err(Error::Config(format!(
                "k={} must divide n_r={}",
                self.k, self.n_r
            )));
        }
        if !self.d_over_lambda.is_finite() || self.d_over_lambda <= 0.0 {
            return Err(Error::Config(format!(
                "d_over_lambda must be positive and finite, got {}",
                self.d_over_lambda
            )));
        }
        if self.snr_grid_db.is_empty() {
            return Err(Error::Config("snr grid must not be empty".into()));
        }
        if self.snr_grid_db.iter().any(|s| !s.is_finite()) {
            return Err(Error::Config("snr grid entries must be finite".into()));
        }
        if self.snr_grid_db.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config(
                "snr grid must be strictly increasing".into(),
            ));
        }
        if self.mc_iterations == 0 {
            return Err(Error::Config("mc_iterations must be at least 1".into()));
        }
        if self.mc_iterations >= MAX_ITERATIONS {
            return Err(Error::Config(format!(
                "mc_iterations must stay below {MAX_ITERATIONS}"
            )));
        }
        Ok(())
    }

    /// Canonical one-line rendering of every field, for result provenance.
    pub fn fingerprint(&self) -> String {
        format!(
            "n={} m={} n_r={} k={} l={} d_over_lambda={} aod=[{},{}] aoa=[{},{}] snr_db={:?} mc={} seed={} mode={} norm={}",
            self.n,
            self.m,
            self.n_r,
            self.k,
            self.l,
            self.d_over_lambda,
            self.aod_range.min(),
            self.aod_range.max(),
            self.aoa_range.min(),
            self.aoa_range.max(),
            self.snr_grid_db,
            self.mc_iterations,
            self.master_seed,
            self.signal_mode,
            self.normalization,
        )
    }
}

/// CLI-level overrides; any set field wins over the config file.
#[derive(Debug, Clone, Default)]
pub struct ConfigOverrides {
    pub snr_min_db: Option<f64>,
    pub snr_max_db: Option<f64>,
    pub snr_step_db: Option<f64>,
    pub mc: Option<usize>,
    pub seed: Option<u64>,
    pub mode: Option<SignalMode>,
    pub norm: Option<NormalizationMode>,
}

/// Staged raw values before validation; the SNR grid is described by
/// min/max/step until `build`.
#[derive(Debug, Clone)]
struct RawConfig {
    n: usize,
    m: usize,
    n_r: usize,
    k: usize,
    l: usize,
    d_over_lambda: f64,
    aod_min_rad: f64,
    aod_max_rad: f64,
    aoa_min_rad: f64,
    aoa_max_rad: f64,
    snr_min_db: f64,
    snr_max_db: f64,
    snr_step_db: f64,
    mc: usize,
    seed: u64,
    mode: SignalMode,
    norm: NormalizationMode,
}

impl Default for RawConfig {
    fn default() -> Self {
        let base = SimConfig::default();
        Self {
            n: base.n,
            m: base.m,
            n_r: base.n_r,
            k: base.k,
            l: base.l,
            d_over_lambda: base.d_over_lambda,
            aod_min_rad: base.aod_range.min(),
            aod_max_rad: base.aod_range.max(),
            aoa_min_rad: base.aoa_range.min(),
            aoa_max_rad: base.aoa_range.max(),
            snr_min_db: 0.0,
            snr_max_db: 20.0,
            snr_step_db: 5.0,
            mc: base.mc_iterations,
            seed: base.master_seed,
            mode: base.signal_mode,
            norm: base.normalization,
        }
    }
}

impl RawConfig {
    fn apply_line(&mut self, key: &str, value: &str) -> Result<()> {
        fn num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
            value.parse().map_err(|_| {
                Error::Config(format!("invalid value '{value}' for key '{key}'"))
            })
        }
        match key {
            "n" => self.n = num(key, value)?,
            "m" => self.m = num(key, value)?,
            "n_r" => self.n_r = num(key, value)?,
            "k" => self.k = num(key, value)?,
            "l" => self.l = num(key, value)?,
            "d_over_lambda" => self.d_over_lambda = num(key, value)?,
            "aod_min_rad" => self.aod_min_rad = num(key, value)?,
            "aod_max_rad" => self.aod_max_rad = num(key, value)?,
            "aoa_min_rad" => self.aoa_min_rad = num(key, value)?,
            "aoa_max_rad" => self.aoa_max_rad = num(key, value)?,
            "snr_min_db" => self.snr_min_db = num(key, value)?,
            "snr_max_db" => self.snr_max_db = num(key, value)?,
            "snr_step_db" => self.snr_step_db = num(key, value)?,
            "mc" => self.mc = num(key, value)?,
            "seed" => self.seed = num(key, value)?,
            "mode" => self.mode = value.parse()?,
            "norm" => self.norm = value.parse()?,
            other => {
                return Err(Error::Config(format!(
                    "unknown config key '{other}'"
                )))
            }
        }
        Ok(())
    }

    fn apply_overrides(&mut self, overrides: &ConfigOverrides) {
        if let Some(v) = overrides.snr_min_db {
            self.snr_min_db = v;
        }
        if let Some(v) = overrides.snr_max_db {
            self.snr_max_db = v;
        }
        if let Some(v) = overrides.snr_step_db {
            self.snr_step_db = v;
        }
        if let Some(v) = overrides.mc {
            self.mc = v;
        }
        if let Some(v) = overrides.seed {
            self.seed = v;
        }
        if let Some(v) = overrides.mode {
            self.mode = v;
        }
        if let Some(v) = overrides.norm {
            self.norm = v;
        }
    }

    fn build(self) -> Result<SimConfig> {
        let config = SimConfig {
            n: self.n,
            m: self.m,
            n_r: self.n_r,
            k: self.k,
            l: self.l,
            d_over_lambda: self.d_over_lambda,
            aod_range: AngleRange::new(self.aod_min_rad, self.aod_max_rad).map_err(|_| {
                Error::Config(format!(
                    "aod range [{}, {}] needs finite bounds with min <= max",
                    self.aod_min_rad, self.aod_max_rad
                ))
            })?,
            aoa_range: AngleRange::new(self.aoa_min_rad, self.aoa_max_rad).map_err(|_| {
                Error::Config(format!(
                    "aoa range [{}, {}] needs finite bounds with min <= max",
                    self.aoa_min_rad, self.aoa_max_rad
                ))
            })?,
            snr_grid_db: snr_grid(self.snr_min_db, self.snr_max_db, self.snr_step_db)?,
            mc_iterations: self.mc,
            master_seed: self.seed,
            signal_mode: self.mode,
            normalization: self.norm,
        };
        config.validate()?;
        Ok(config)
    }
}

/// Inclusive dB grid from min to max in steps of `step`.
pub fn snr_grid(min_db: f64, max_db: f64, step_db: f64) -> Result<Vec<f64>> {
    if !min_db.is_finite() || !max_db.is_finite() || !step_db.is_finite() {
        return Err(Error::Config("snr bounds and step must be finite".into()));
    }
    if min_db > max_db {
        return Err(Error::Config(format!(
            "snr_min_db {min_db} exceeds snr_max_db {max_db}"
        )));
    }
    if min_db == max_db {
        return Ok(vec![min_db]);
    }
    if step_db <= 0.0 {
        return Err(Error::Config(format!(
            "snr_step_db must be positive, got {step_db}"
        )));
    }
    let count = ((max_db - min_db) / step_db + 1e-9).floor() as usize + 1;
    Ok((0..count).map(|i| min_db + step_db * i as f64).collect())
}

/// Parse the flat `key = value` config format. `#` starts a comment; blank
/// lines are skipped; unknown keys are errors.
pub fn parse_config_str(text: &str) -> Result<SimConfig> {
    let mut raw = RawConfig::default();
    apply_config_str(&mut raw, text)?;
    raw.build()
}

fn apply_config_str(raw: &mut RawConfig, text: &str) -> Result<()> {
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Error::Config(format!(
                "line {}: expected 'key = value', got '{line}'",
                lineno + 1
            ))
        })?;
        raw.apply_line(key.trim(), value.trim())?;
    }
    Ok(())
}

/// Load a configuration: file values (when a path is given) overlaid with CLI
/// overrides, then validated.
pub fn load_config(path: Option<&Path>, overrides: &ConfigOverrides) -> Result<SimConfig> {
    let mut raw = RawConfig::default();
    if let Some(path) = path {
        let text = fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        apply_config_str(&mut raw, &text)?;
    }
    raw.apply_overrides(overrides);
    raw.build()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_match_the_reference_setup() {
        let c = SimConfig::default();
        assert_eq!((c.n, c.m, c.n_r, c.k, c.l), (8, 8, 16, 4, 3));
        assert_eq!(c.n_t(), 64);
        assert_eq!(c.d_over_lambda, 0.5);
        assert_eq!(c.snr_grid_db, vec![0.0, 5.0, 10.0, 15.0, 20.0]);
        assert!(c.validate().is_ok());
    }

    #[test]
    fn no_file_no_flags_gives_defaults() {
        let c = load_config(None, &ConfigOverrides::default()).unwrap();
        assert_eq!(c, SimConfig::default());
    }

    #[test]
    fn file_values_are_applied() {
        let c = parse_config_str(
            "n = 4\nm = 8\nn_r = 8\nk = 2\nl = 2\nmc = 10\nseed = 99\nmode = pilot\nnorm = raw\n",
        )
        .unwrap();
        assert_eq!(c.n, 4);
        assert_eq!(c.n_t(), 32);
        assert_eq!(c.mc_iterations, 10);
        assert_eq!(c.master_seed, 99);
        assert_eq!(c.signal_mode, SignalMode::Pilot);
        assert_eq!(c.normalization, NormalizationMode::Raw);
    }

    #[test]
    fn comments_and_blank_lines_are_ignored() {
        let c = parse_config_str("# full comment\n\nn = 2 # trailing comment\nm = 4\n").unwrap();
        assert_eq!(c.n, 2);
        assert_eq!(c.m, 4);
    }

    #[test]
    fn unknown_keys_are_rejected_by_name() {
        let err = parse_config_str("n_tx = 64\n").unwrap_err();
        assert!(err.to_string().contains("n_tx"), "{err}");
    }

    #[test]
    fn derived_antenna_count_follows_m() {
        let c = parse_config_str("m = 4\n").unwrap();
        assert_eq!(c.n, 8);
        assert_eq!(c.n_t(), 32);
    }

    #[test]
    fn nondividing_chain_count_is_rejected() {
        let err = parse_config_str("k = 3\n").unwrap_err();
        assert!(err.to_string().contains("divide"), "{err}");
    }

    #[test]
    fn flags_win_over_file_values() {
        let overrides = ConfigOverrides {
            mc: Some(7),
            seed: Some(123),
            snr_min_db: Some(10.0),
            snr_max_db: Some(12.0),
            snr_step_db: Some(1.0),
            ..Default::default()
        };
        let mut raw = RawConfig::default();
        apply_config_str(&mut raw, "mc = 999\nseed = 1\n").unwrap();
        raw.apply_overrides(&overrides);
        let c = raw.build().unwrap();
        assert_eq!(c.mc_iterations, 7);
        assert_eq!(c.master_seed, 123);
        assert_eq!(c.snr_grid_db, vec![10.0, 11.0, 12.0]);
    }

    #[test]
    fn unsorted_grid_is_rejected() {
        let descending = SimConfig {
            snr_grid_db: vec![10.0, 0.0],
            ..SimConfig::default()
        };
        assert!(descending.validate().is_err());
        let duplicated = SimConfig {
            snr_grid_db: vec![5.0, 5.0],
            ..SimConfig::default()
        };
        assert!(duplicated.validate().is_err());
    }

    #[test]
    fn snr_grid_handles_point_and_step_cases() {
        assert_eq!(snr_grid(5.0, 5.0, 0.0).unwrap(), vec![5.0]);
        assert_eq!(snr_grid(0.0, 20.0, 5.0).unwrap().len(), 5);
        assert!(snr_grid(10.0, 0.0, 5.0).is_err());
        assert!(snr_grid(0.0, 10.0, 0.0).is_err());
        assert!(snr_grid(0.0, 10.0, -1.0).is_err());
    }

    #[test]
    fn missing_file_is_an_io_error() {
        let err = load_config(
            Some(Path::new("/nonexistent/config.txt")),
            &ConfigOverrides::default(),
        )
        .unwrap_err();
        assert_eq!(err.exit_code(), 3);
    }

    #[test]
    fn fingerprint_is_stable_and_complete() {
        let c = SimConfig::default();
        let fp = c.fingerprint();
        assert!(fp.contains("n=8"));
        assert!(fp.contains("seed=1"));
        assert_eq!(fp, c.clone().fingerprint());
    }
}
