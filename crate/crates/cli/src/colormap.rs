use anyhow::{bail, Result};
use image::{Rgb, RgbImage};
use omnidepth_core::raster::LabelMap;

use crate::args::Colormap;

/// Normalized value in [0, 1] to RGB.
pub fn color(map: Colormap, t: f64) -> [u8; 3] {
    let t = t.clamp(0.0, 1.0);
    let to_u8 = |v: f64| (v.clamp(0.0, 1.0) * 255.0).round() as u8;
    match map {
        Colormap::Gray => [to_u8(t); 3],
        Colormap::Jet => {
            let ch = |c: f64| to_u8(1.5 - (4.0 * t - c).abs());
            [ch(3.0), ch(2.0), ch(1.0)]
        }
    }
}

/// Linear (or inverse-value) normalization between `lo` and `hi`; pixels
/// without a label are black.
pub fn colorize(
    map: &LabelMap,
    cmap: Colormap,
    lo: Option<f64>,
    hi: Option<f64>,
    inverse: bool,
) -> Result<RgbImage> {
    let key = |v: f64| if inverse { 1.0 / v } else { v };
    let vals = map
        .labels()
        .map(|(_, _, v)| key(v))
        .filter(|v| v.is_finite());
    let (dmin, dmax) = vals.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| {
        (a.min(v), b.max(v))
    });
    let lo = lo.map(key).unwrap_or(dmin);
    let hi = hi.map(key).unwrap_or(dmax);
    let (lo, hi) = if inverse && lo > hi {
        (hi, lo)
    } else {
        (lo, hi)
    };
    if !(lo.is_finite() && hi.is_finite()) {
        bail!("map has no finite labels to normalize");
    }
    if lo == hi {
        bail!("normalization range is empty (min = max = {lo})");
    }
    let mut img = RgbImage::new(map.width() as u32, map.height() as u32);
    for (col, row, v) in map.labels() {
        let t = (key(v) - lo) / (hi - lo);
        img.put_pixel(col as u32, row as u32, Rgb(color(cmap, t)));
    }
    Ok(img)
}

#[cfg(test)]
mod tests {
    use super::*;
    use omnidepth_core::raster::MapKind;

    #[test]
    fn jet_table() {
        assert_eq!(color(Colormap::Jet, 0.0), [0, 0, 128]);
        assert_eq!(color(Colormap::Jet, 0.5), [128, 255, 128]);
        assert_eq!(color(Colormap::Jet, 1.0), [128, 0, 0]);
        assert_eq!(color(Colormap::Jet, 0.25), [0, 128, 255]);
        assert_eq!(color(Colormap::Gray, 0.5), [128; 3]);
    }

    #[test]
    fn jet_anchor_colors() {
        let near = |c: [u8; 3], e: [u8; 3]| c.iter().zip(e).all(|(&x, y)| x.abs_diff(y) <= 1);
        let cases = [
            (0.0, [0, 0, 128]),
            (0.125, [0, 0, 255]),
            (0.375, [0, 255, 255]),
            (0.5, [128, 255, 128]),
            (0.625, [255, 255, 0]),
            (0.875, [255, 0, 0]),
            (1.0, [128, 0, 0]),
        ];
        for (t, e) in cases {
            let c = color(Colormap::Jet, t);
            assert!(near(c, e), "t = {t}: {c:?} vs {e:?}");
        }
    }

    #[test]
    fn constant_map_and_errors() {
        let mut m = LabelMap::empty(MapKind::Depth, 3, 1);
        m.set(0, 0, Some(2.0));
        m.set(1, 0, Some(2.0));
        let img = colorize(&m, Colormap::Gray, Some(1.0), Some(3.0), false).unwrap();
        assert_eq!(img.get_pixel(0, 0), img.get_pixel(1, 0));
        assert_eq!(img.get_pixel(2, 0).0, [0, 0, 0]);
        assert!(colorize(&m, Colormap::Gray, None, None, false).is_err());
        assert!(colorize(&m, Colormap::Jet, Some(5.0), Some(5.0), false).is_err());
    }

    #[test]
    fn inverse_puts_near_high() {
        let mut m = LabelMap::empty(MapKind::Depth, 2, 1);
        m.set(0, 0, Some(1.0));
        m.set(1, 0, Some(10.0));
        let img = colorize(&m, Colormap::Gray, None, None, true).unwrap();
        assert_eq!(img.get_pixel(0, 0).0, [255; 3]);
        assert_eq!(img.get_pixel(1, 0).0, [0; 3]);
    }
}
