use super::EquirectGeometry;
use crate::error::{Error, Result};
use crate::raster::Raster;

/// Per-pixel polar angle, sampled at row centers; every column is identical.
pub fn polar_angle_map(geom: &EquirectGeometry) -> Raster<f64> {
    let mut data = Vec::with_capacity(geom.width * geom.height);
    for row in 0..geom.height {
        let theta = geom.row_theta(row);
        data.extend(std::iter::repeat_n(theta, geom.width));
    }
    Raster::from_vec(geom.width, geom.height, data).expect("sized by construction")
}

/// Pads `pad` columns on each side with the columns wrapped from the opposite edge.
pub fn circular_pad<T: Clone>(raster: &Raster<T>, pad: usize) -> Result<Raster<T>> {
    let w = raster.width();
    if pad > w {
        return Err(Error::InvalidParameter(format!(
            "padding {pad} exceeds raster width {w}"
        )));
    }
    let out_w = w + 2 * pad;
    let mut data = Vec::with_capacity(out_w * raster.height());
    for row in raster.rows() {
        for j in 0..out_w {
            data.push(row[(j + w - pad) % w].clone());
        }
    }
    Raster::from_vec(out_w, raster.height(), data)
}

/// Drops `pad` columns from each side; the inverse of [`circular_pad`].
pub fn center_crop<T: Clone>(raster: &Raster<T>, pad: usize) -> Result<Raster<T>> {
    let w = raster.width();
    if 2 * pad > w {
        return Err(Error::InvalidParameter(format!(
            "cannot crop {pad} columns from each side of width {w}"
        )));
    }
    let out_w = w - 2 * pad;
    let mut data = Vec::with_capacity(out_w * raster.height());
    for row in raster.rows() {
        data.extend_from_slice(&row[pad..pad + out_w]);
    }
    Raster::from_vec(out_w, raster.height(), data)
}
