use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use super::utf8;
use crate::calibration::{BfgsOptions, Extrinsics};
use crate::completion::{AggregationMode, CompletionParams, RigConfig};
use crate::error::{Error, Result};
use crate::geometry::{
    DisparityClamp, EquirectGeometry, RigGeometry, Vec3, DISPARITY_REFERENCE_HEIGHT_PX,
};

/// Everything a pipeline run needs besides its input files. Every section
/// and key is optional in the TOML form; missing values take the defaults
/// of the reference rig.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub seed: u64,
    pub rig: RigGeometry,
    pub lidar: RigConfig,
    pub geometry: EquirectGeometry,
    pub completion: CompletionParams,
    pub aggregation: AggregationMode,
    pub calibration: BfgsOptions,
    pub disparity: DisparitySettings,
    pub paths: Paths,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DisparitySettings {
    pub clamp: DisparityClamp,
    /// Full-sphere image height used for degree-to-pixel conversion.
    pub reference_height_px: f64,
}

impl Default for DisparitySettings {
    fn default() -> Self {
        Self {
            clamp: DisparityClamp::default(),
            reference_height_px: DISPARITY_REFERENCE_HEIGHT_PX,
        }
    }
}

/// Optional default locations; command-line arguments take precedence.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Paths {
    pub input: Option<PathBuf>,
    pub output: Option<PathBuf>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            rig: RigGeometry::default(),
            lidar: RigConfig::default(),
            geometry: EquirectGeometry::cropped_dataset(),
            completion: CompletionParams::default(),
            aggregation: AggregationMode::default(),
            calibration: BfgsOptions::default(),
            disparity: DisparitySettings::default(),
            paths: Paths::default(),
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        self.rig.validate()?;
        self.lidar.validate()?;
        self.geometry.validate()?;
        self.completion.validate()?;
        let c = self.disparity.clamp;
        if !(c.min_deg > 0.0 && c.min_deg < c.max_deg && c.max_deg < 180.0) {
            return Err(Error::InvalidParameter(format!(
                "bad disparity clamp {c:?}"
            )));
        }
        let h = self.disparity.reference_height_px;
        if h.is_nan() || h <= 0.0 {
            return Err(Error::InvalidParameter(
                "disparity reference height must be positive".into(),
            ));
        }
        let b = self.calibration;
        let tolerances_ok = [b.gradient_tolerance, b.step_tolerance]
            .iter()
            .all(|t| t.is_finite() && *t >= 0.0);
        if b.max_iterations == 0 || !(b.fd_step.is_finite() && b.fd_step > 0.0) || !tolerances_ok {
            return Err(Error::InvalidParameter(format!(
                "bad optimizer options {b:?}"
            )));
        }
        Ok(())
    }

    /// Completion parameters with `t_ood` derived from the configured LiDAR
    /// when it is not set explicitly.
    pub fn completion_params(&self) -> CompletionParams {
        self.completion.with_rig(&self.lidar)
    }

    /// LiDAR mounted straight below the bottom camera.
    pub fn nominal_extrinsics(&self) -> Extrinsics {
        Extrinsics::from_translation(Vec3::new(0.0, 0.0, -self.rig.lidar_offset))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }
}

/// Parses and validates a TOML configuration.
pub fn parse_config(bytes: &[u8]) -> Result<PipelineConfig> {
    let cfg: PipelineConfig =
        toml::from_str(utf8(bytes)?).map_err(|e| Error::Format(format!("config: {e}")))?;
    cfg.validate()?;
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_is_default() {
        let c = parse_config(b"").unwrap();
        assert_eq!(c, PipelineConfig::default());
        assert_eq!(c.completion.k, 17);
        assert_eq!(c.geometry.width, 1920);
    }

    #[test]
    fn round_trip() {
        let mut c = PipelineConfig {
            seed: 9,
            ..Default::default()
        };
        c.completion.n_grid = 200_000;
        c.paths.output = Some("out".into());
        let back = parse_config(c.to_toml().as_bytes()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn partial_sections() {
        let c = parse_config(b"seed = 3\n[completion]\nrip = 0.5\nm = 1\n").unwrap();
        assert_eq!(
            (c.seed, c.completion.rip, c.completion.m, c.completion.k),
            (3, 0.5, 1, 17)
        );
    }

    #[test]
    fn invalid_values_rejected() {
        assert!(parse_config(b"[completion]\nrip = 2.0\n").is_err());
        assert!(parse_config(b"[completion]\nripp = 0.5\n").is_err());
        assert!(parse_config(
            b"[geometry]\nwidth = 0\nheight = 4\ntheta_min = 0\ntheta_max = 180\n"
        )
        .is_err());
        assert!(parse_config(b"seed = \"x\"").is_err());
        assert!(parse_config(b"[calibration]\ngradient_tolerance = nan\n").is_err());
    }

    #[test]
    fn nominal_mount() {
        let e = PipelineConfig::default().nominal_extrinsics();
        assert_eq!(e.translation, Vec3::new(0.0, 0.0, -0.45));
    }
}
