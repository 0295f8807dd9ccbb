//! System configuration: physical setup, protocol sizes, link budget, ML
//! grid and experiment controls. Files are flat TOML whose keys are exactly
//! the field names below; missing keys take the default setup.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::channel::{ChannelModel, JakesGenerator, LinkGeometry, SPEED_OF_LIGHT};
use crate::error::{Error, Result};
use crate::estimation::GridSpec;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SystemConfig {
    pub carrier_frequency_hz: f64,
    pub bandwidth_hz: f64,
    pub speed_mps: f64,
    #[serde(rename = "blocks_N")]
    pub blocks_n: usize,
    #[serde(rename = "stage1_blocks_N1")]
    pub stage1_blocks_n1: usize,
    #[serde(rename = "symbols_per_block_Q")]
    pub symbols_per_block_q: usize,
    pub pilots_tau: usize,
    #[serde(rename = "irs_Mx")]
    pub irs_mx: usize,
    #[serde(rename = "irs_My")]
    pub irs_my: usize,
    pub element_spacing_over_lambda: f64,
    pub distance_bs_irs_m: f64,
    pub distance_bs_user_m: f64,
    pub distance_irs_user_m: f64,
    pub path_loss_exponent_bu: f64,
    pub path_loss_exponent_bi: f64,
    pub path_loss_exponent_iu: f64,
    pub xi0_linear: f64,
    pub elevation_bi_rad: f64,
    pub azimuth_bi_rad: f64,
    pub elevation_iu_rad: f64,
    pub azimuth_iu_rad: f64,
    pub transmit_power_dbm: f64,
    pub noise_power_dbm: f64,
    pub gamma_gap_db: f64,
    /// Lower end of the Doppler search range; defaults to `-f_max`.
    pub grid_fd_min_hz: Option<f64>,
    /// Upper end of the Doppler search range; defaults to `f_max`.
    pub grid_fd_max_hz: Option<f64>,
    /// Defaults to `1 / (10 N Tc)`.
    pub grid_fd_coarse_step_hz: Option<f64>,
    /// Defaults to `2 / (10 Mx)`.
    pub grid_psi_coarse_step: Option<f64>,
    pub grid_refinement_levels: usize,
    pub grid_refinement_shrink: f64,
    /// Monte Carlo frames; experiments fall back to their own defaults.
    pub trials: Option<usize>,
    pub master_seed: u64,
}

impl Default for SystemConfig {
    fn default() -> Self {
        SystemConfig {
            carrier_frequency_hz: 5.9e9,
            bandwidth_hz: 500e3,
            speed_mps: 50.0,
            blocks_n: 30,
            stage1_blocks_n1: 5,
            symbols_per_block_q: 100,
            pilots_tau: 2,
            irs_mx: 50,
            irs_my: 1,
            element_spacing_over_lambda: 0.5,
            distance_bs_irs_m: 500.0,
            distance_bs_user_m: 500.0,
            distance_irs_user_m: 1.5,
            path_loss_exponent_bu: 3.0,
            path_loss_exponent_bi: 2.3,
            path_loss_exponent_iu: 2.2,
            xi0_linear: 1e-3,
            elevation_bi_rad: 60f64.to_radians(),
            azimuth_bi_rad: 0.0,
            elevation_iu_rad: (-45f64).to_radians(),
            azimuth_iu_rad: 0.0,
            transmit_power_dbm: 41.0,
            noise_power_dbm: -110.0,
            gamma_gap_db: 9.0,
            grid_fd_min_hz: None,
            grid_fd_max_hz: None,
            grid_fd_coarse_step_hz: None,
            grid_psi_coarse_step: None,
            grid_refinement_levels: 3,
            grid_refinement_shrink: 0.1,
            trials: None,
            master_seed: 20_220_905,
        }
    }
}

impl SystemConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let config: SystemConfig = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn wavelength(&self) -> f64 {
        SPEED_OF_LIGHT / self.carrier_frequency_hz
    }

    /// Maximum Doppler `v f_c / c` in Hz.
    pub fn max_doppler_hz(&self) -> f64 {
        self.speed_mps * self.carrier_frequency_hz / SPEED_OF_LIGHT
    }

    /// Block duration `Tc = 1 / (5 f_max)`.
    pub fn block_duration_s(&self) -> f64 {
        1.0 / (5.0 * self.max_doppler_hz())
    }

    pub fn symbol_duration_s(&self) -> f64 {
        self.block_duration_s() / self.symbols_per_block_q as f64
    }

    /// Noise power normalized by the transmit power.
    pub fn noise_variance(&self) -> f64 {
        db_to_linear(self.noise_power_dbm - self.transmit_power_dbm)
    }

    pub fn gamma_gap_linear(&self) -> f64 {
        db_to_linear(self.gamma_gap_db)
    }

    /// Mean power of the Rayleigh BS-user channel.
    pub fn direct_mean_power(&self) -> f64 {
        self.xi0_linear * self.distance_bs_user_m.powf(-self.path_loss_exponent_bu)
    }

    pub fn bs_irs_link(&self) -> LinkGeometry {
        LinkGeometry {
            elevation: self.elevation_bi_rad,
            azimuth: self.azimuth_bi_rad,
            distance: self.distance_bs_irs_m,
            path_loss_exponent: self.path_loss_exponent_bi,
            reference_gain_xi0: self.xi0_linear,
        }
    }

    pub fn irs_user_link(&self) -> LinkGeometry {
        LinkGeometry {
            elevation: self.elevation_iu_rad,
            azimuth: self.azimuth_iu_rad,
            distance: self.distance_irs_user_m,
            path_loss_exponent: self.path_loss_exponent_iu,
            reference_gain_xi0: self.xi0_linear,
        }
    }

    pub fn grid(&self) -> GridSpec {
        let f_max = self.max_doppler_hz();
        let rec = GridSpec::recommended(f_max, self.blocks_n, self.block_duration_s(), self.irs_mx);
        GridSpec {
            fd_range: (
                self.grid_fd_min_hz.unwrap_or(rec.fd_range.0),
                self.grid_fd_max_hz.unwrap_or(rec.fd_range.1),
            ),
            fd_coarse_step: self.grid_fd_coarse_step_hz.unwrap_or(rec.fd_coarse_step),
            psi_coarse_step: self.grid_psi_coarse_step.unwrap_or(rec.psi_coarse_step),
            refinement_levels: self.grid_refinement_levels,
            refinement_shrink: self.grid_refinement_shrink,
        }
    }

    /// Copy with every derived default written out explicitly.
    pub fn resolved(&self) -> Self {
        let grid = self.grid();
        SystemConfig {
            grid_fd_min_hz: Some(grid.fd_range.0),
            grid_fd_max_hz: Some(grid.fd_range.1),
            grid_fd_coarse_step_hz: Some(grid.fd_coarse_step),
            grid_psi_coarse_step: Some(grid.psi_coarse_step),
            ..self.clone()
        }
    }

    pub fn channel_model(&self) -> Result<ChannelModel> {
        let tc = self.block_duration_s();
        Ok(ChannelModel {
            bs_irs: self.bs_irs_link(),
            irs_user: self.irs_user_link(),
            speed: self.speed_mps,
            wavelength: self.wavelength(),
            spacing_over_lambda: self.element_spacing_over_lambda,
            my: self.irs_my,
            block_duration_tc: tc,
            direct: JakesGenerator::new(
                self.blocks_n,
                tc,
                self.max_doppler_hz(),
                self.direct_mean_power(),
            )?,
        })
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("carrier_frequency_hz", self.carrier_frequency_hz),
            ("bandwidth_hz", self.bandwidth_hz),
            ("speed_mps", self.speed_mps),
            ("element_spacing_over_lambda", self.element_spacing_over_lambda),
            ("distance_bs_irs_m", self.distance_bs_irs_m),
            ("distance_bs_user_m", self.distance_bs_user_m),
            ("distance_irs_user_m", self.distance_irs_user_m),
            ("xi0_linear", self.xi0_linear),
        ];
        for (key, value) in positive {
            if !(value > 0.0 && value.is_finite()) {
                return Err(Error::config(&[key], format!("must be positive, got {value}")));
            }
        }
        let finite = [
            ("path_loss_exponent_bu", self.path_loss_exponent_bu),
            ("path_loss_exponent_bi", self.path_loss_exponent_bi),
            ("path_loss_exponent_iu", self.path_loss_exponent_iu),
            ("transmit_power_dbm", self.transmit_power_dbm),
            ("noise_power_dbm", self.noise_power_dbm),
            ("gamma_gap_db", self.gamma_gap_db),
        ];
        for (key, value) in finite {
            if !value.is_finite() {
                return Err(Error::config(&[key], "must be finite"));
            }
        }
        if self.gamma_gap_db < 0.0 {
            return Err(Error::config(&["gamma_gap_db"], "gap must be at least 0 dB"));
        }
        if self.blocks_n < 2 {
            return Err(Error::config(&["blocks_N"], "a frame needs at least 2 blocks"));
        }
        if self.stage1_blocks_n1 > self.blocks_n {
            return Err(Error::config(
                &["stage1_blocks_N1", "blocks_N"],
                format!(
                    "Stage I length {} exceeds the frame length {}",
                    self.stage1_blocks_n1, self.blocks_n
                ),
            ));
        }
        if self.stage1_blocks_n1 < 2 {
            return Err(Error::config(
                &["stage1_blocks_N1"],
                "the Doppler/phase search needs at least 2 Stage-I blocks",
            ));
        }
        if self.pilots_tau < 2 {
            return Err(Error::config(
                &["pilots_tau"],
                format!("need at least 2 pilots per block, got {}", self.pilots_tau),
            ));
        }
        if self.pilots_tau >= self.symbols_per_block_q {
            return Err(Error::config(
                &["pilots_tau", "symbols_per_block_Q"],
                "pilots leave no data symbols in a block",
            ));
        }
        if self.irs_mx == 0 {
            return Err(Error::config(&["irs_Mx"], "need at least one element"));
        }
        if self.irs_my != 1 {
            return Err(Error::config(&["irs_My"], "only single-row arrays (My = 1) are supported"));
        }
        for (keys, link) in [
            (["elevation_bi_rad", "azimuth_bi_rad"], self.bs_irs_link()),
            (["elevation_iu_rad", "azimuth_iu_rad"], self.irs_user_link()),
        ] {
            link.validate()
                .map_err(|e| Error::config(&keys, e.to_string()))?;
        }
        self.grid().validate().map_err(|e| {
            Error::config(
                &[
                    "grid_fd_min_hz",
                    "grid_fd_max_hz",
                    "grid_fd_coarse_step_hz",
                    "grid_psi_coarse_step",
                    "grid_refinement_shrink",
                ],
                e.to_string(),
            )
        })?;
        if self.trials == Some(0) {
            return Err(Error::config(&["trials"], "need at least one trial"));
        }
        Ok(())
    }
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// Reads and validates a configuration file.
pub fn load_config(path: impl AsRef<Path>) -> Result<SystemConfig> {
    let text = std::fs::read_to_string(path)?;
    SystemConfig::from_toml_str(&text)
}
