use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "omnidepth",
    version,
    about = "Ground-truth toolkit for top-bottom 360° stereo rigs"
)]
pub struct Cli {
    /// TOML configuration file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Seed for every random choice (overrides the config).
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Worker threads (default: all cores). Outputs do not depend on it.
    #[arg(long, global = true)]
    pub workers: Option<usize>,

    /// More log output; repeat for more.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit LiDAR-to-camera extrinsics to point/pixel correspondences.
    Calibrate(CalibrateArgs),
    /// Project a LiDAR cloud into a sparse bottom-camera depth map.
    Project(ProjectArgs),
    /// Densify sparse depth maps from a sequence of LiDAR clouds.
    Complete(CompleteArgs),
    /// Score predicted maps against ground truth.
    Evaluate(EvaluateArgs),
    /// Convert between depth and spherical disparity.
    Convert(ConvertArgs),
    /// Render a synthetic scene into clouds, maps and correspondences.
    Simulate(SimulateArgs),
    /// Render a map as an 8-bit color image.
    Colorize(ColorizeArgs),
}

#[derive(Debug, Args)]
pub struct CalibrateArgs {
    /// Correspondence file, one `lx ly lz px py` per line.
    #[arg(long)]
    pub correspondences: PathBuf,
    /// Initial extrinsics (JSON); default is the nominal mount.
    #[arg(long)]
    pub init: Option<PathBuf>,
    /// Calibration report (JSON).
    #[arg(long, short)]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct ProjectArgs {
    /// Point cloud, binary or `x y z` text, in the LiDAR frame.
    #[arg(long)]
    pub cloud: PathBuf,
    /// Extrinsics or calibration report (JSON); default is the nominal mount.
    #[arg(long)]
    pub extrinsics: Option<PathBuf>,
    /// Sparse depth raster.
    #[arg(long, short)]
    pub output: PathBuf,
    /// Also write a 16-bit PNG.
    #[arg(long)]
    pub png: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ThresholdScope {
    /// One uncertainty threshold per frame.
    Frame,
    /// Mean of the per-frame thresholds, applied to every frame.
    Sequence,
}

#[derive(Debug, Args)]
pub struct CompleteArgs {
    /// Directory of point clouds, one per frame, in file-name order.
    #[arg(long)]
    pub clouds: PathBuf,
    /// Directory of sparse depth rasters matching the clouds by order.
    #[arg(long)]
    pub sparse: PathBuf,
    /// Output directory for completed rasters and `stats.json`.
    #[arg(long, short)]
    pub output: PathBuf,
    /// Extrinsics or calibration report (JSON).
    #[arg(long)]
    pub extrinsics: Option<PathBuf>,
    /// Sensor poses, one `rx ry rz tx ty tz` line per frame; enables
    /// motion-compensated aggregation.
    #[arg(long)]
    pub poses: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = ThresholdScope::Sequence)]
    pub threshold: ThresholdScope,
    /// Clouds fused on each side of a frame.
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub rip: Option<f64>,
    #[arg(long)]
    pub n_grid: Option<usize>,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// Directory of predicted rasters.
    #[arg(long)]
    pub pred: PathBuf,
    /// Directory of ground-truth rasters, matched by file name. An optional
    /// `tags.txt` holds `<file stem> <scene tag>` lines.
    #[arg(long)]
    pub gt: PathBuf,
    /// Directory of completed ground truth, needed for the seam metric.
    #[arg(long)]
    pub gt_completed: Option<PathBuf>,
    /// Report the left-right consistency error.
    #[arg(long)]
    pub lrce: bool,
    /// Average over all pixels instead of per image.
    #[arg(long)]
    pub pooled: bool,
    /// Metrics report (JSON).
    #[arg(long, short)]
    pub output: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Target {
    Depth,
    Disparity,
}

#[derive(Debug, Args)]
pub struct ConvertArgs {
    #[arg(long, short)]
    pub input: PathBuf,
    #[arg(long, short)]
    pub output: PathBuf,
    /// Kind of the output map.
    #[arg(long, value_enum)]
    pub to: Target,
    /// Camera baseline in meters (overrides the config).
    #[arg(long)]
    pub baseline: Option<f64>,
    /// Raise disparities below the clamp floor before inverting.
    #[arg(long)]
    pub clamp: bool,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Scene description file.
    #[arg(long)]
    pub scene: PathBuf,
    /// Output directory.
    #[arg(long, short)]
    pub output: PathBuf,
    /// Number of LiDAR sweeps.
    #[arg(long, default_value_t = 1)]
    pub frames: usize,
    /// Camera displacement per frame, `x,y,z` meters.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub step: Option<Vec<f64>>,
    /// Number of calibration correspondences to emit.
    #[arg(long, default_value_t = 100)]
    pub correspondences: usize,
    /// RMS pixel noise added to the correspondences.
    #[arg(long, default_value_t = 0.0)]
    pub noise_px: f64,
    /// True extrinsics (JSON); default is the nominal mount.
    #[arg(long)]
    pub extrinsics: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Colormap {
    Gray,
    Jet,
}

#[derive(Debug, Args)]
pub struct ColorizeArgs {
    #[arg(long, short)]
    pub input: PathBuf,
    /// 8-bit RGB PNG.
    #[arg(long, short)]
    pub output: PathBuf,
    #[arg(long, value_enum, default_value_t = Colormap::Jet)]
    pub colormap: Colormap,
    /// Value mapped to the low end (default: map minimum).
    #[arg(long, allow_negative_numbers = true)]
    pub min: Option<f64>,
    /// Value mapped to the high end (default: map maximum).
    #[arg(long, allow_negative_numbers = true)]
    pub max: Option<f64>,
    /// Normalize 1/value instead of value.
    #[arg(long)]
    pub inverse: bool,
}
