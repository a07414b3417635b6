//! Ground-truth toolkit for top-bottom omnidirectional stereo rigs.
//!
//! * [`geometry`]: spherical coordinates, equirectangular projection and
//!   spherical disparity.
//! * [`calibration`]: LiDAR-to-camera extrinsics by reprojection-error
//!   minimization.
//! * [`completion`]: sparse-to-dense depth completion on the sphere.
//! * [`metrics`]: masked benchmark metrics.
//! * [`sim`]: analytic scene simulator used as a test oracle.
//! * [`io`]: file formats.

pub mod calibration;
pub mod completion;
pub mod error;
pub mod geometry;
pub mod io;
pub mod metrics;
pub mod raster;
pub mod sim;

pub use error::{Error, Result};
