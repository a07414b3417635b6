use std::io::Cursor;

use image::{ImageBuffer, ImageFormat, Luma};

use crate::error::{Error, Result};
use crate::raster::{LabelMap, MapKind};

/// First token of the raster header line.
pub const RASTER_MAGIC: &str = "OMDRASTER";

/// Largest header accepted by the decoder.
const MAX_HEADER: usize = 256;

/// PNG depth quantization: stored value = round(v · 256), 0 = no label.
pub const PNG_SCALE: f64 = 256.0;

/// Float raster: the ASCII line `OMDRASTER <w> <h> <channel> <unit>\n`
/// followed by `w · h` row-major f32 LE values, NaN for unlabeled pixels.
pub fn encode_raster(map: &LabelMap) -> Vec<u8> {
    let header = format!(
        "{RASTER_MAGIC} {} {} {} {}\n",
        map.width(),
        map.height(),
        map.kind.tag(),
        map.kind.unit()
    );
    let mut out = Vec::with_capacity(header.len() + 4 * map.raster.data().len());
    out.extend_from_slice(header.as_bytes());
    for v in map.raster.data() {
        let f = v.map_or(f32::NAN, |x| x as f32);
        out.extend_from_slice(&f.to_le_bytes());
    }
    out
}

pub fn decode_raster(bytes: &[u8]) -> Result<LabelMap> {
    let nl = bytes
        .iter()
        .take(MAX_HEADER)
        .position(|&b| b == b'\n')
        .ok_or_else(|| Error::Format("raster header line not found".into()))?;
    let header = std::str::from_utf8(&bytes[..nl])
        .map_err(|_| Error::Format("raster header is not UTF-8".into()))?;
    let fields: Vec<&str> = header.split_ascii_whitespace().collect();
    let [magic, w, h, channel, unit] = fields[..] else {
        return Err(Error::Format(format!(
            "raster header has {} fields, expected 5",
            fields.len()
        )));
    };
    if magic != RASTER_MAGIC {
        return Err(Error::Format(format!("bad raster magic {magic:?}")));
    }
    let dim = |s: &str| {
        s.parse::<usize>()
            .ok()
            .filter(|&v| v > 0)
            .ok_or_else(|| Error::Format(format!("bad raster dimension {s:?}")))
    };
    let (width, height) = (dim(w)?, dim(h)?);
    let kind = match channel {
        "depth" => MapKind::Depth,
        "disparity" => MapKind::Disparity,
        other => return Err(Error::Format(format!("unknown raster channel {other:?}"))),
    };
    if unit != kind.unit() {
        return Err(Error::Format(format!(
            "{channel} raster must be in {}, header says {unit:?}",
            kind.unit()
        )));
    }
    let body = &bytes[nl + 1..];
    let expected = width
        .checked_mul(height)
        .and_then(|n| n.checked_mul(4))
        .ok_or_else(|| Error::Format("raster dimensions overflow".into()))?;
    if body.len() != expected {
        return Err(Error::Format(format!(
            "{width}x{height} raster needs {expected} data bytes, found {}",
            body.len()
        )));
    }
    let mut map = LabelMap::empty(kind, width, height);
    for (slot, c) in map.raster.data_mut().iter_mut().zip(body.chunks_exact(4)) {
        let v = f32::from_le_bytes(c.try_into().expect("4-byte chunk")) as f64;
        *slot = if v.is_nan() {
            None
        } else if v.is_finite() {
            Some(v)
        } else {
            return Err(Error::Format("infinite raster value".into()));
        };
    }
    Ok(map)
}

/// 16-bit grayscale PNG. Values that do not fit are saturated; the count of
/// saturated pixels is returned alongside the encoded bytes.
pub fn encode_png16(map: &LabelMap) -> Result<(Vec<u8>, usize)> {
    let mut saturated = 0;
    let data: Vec<u16> = map
        .raster
        .data()
        .iter()
        .map(|v| match v {
            None => 0,
            Some(x) => {
                let q = (x * PNG_SCALE).round();
                if q < 1.0 || q > u16::MAX as f64 {
                    saturated += 1;
                }
                q.clamp(1.0, u16::MAX as f64) as u16
            }
        })
        .collect();
    let img: ImageBuffer<Luma<u16>, Vec<u16>> =
        ImageBuffer::from_raw(map.width() as u32, map.height() as u32, data)
            .ok_or_else(|| Error::Format("raster too large for PNG".into()))?;
    let mut out = Vec::new();
    img.write_to(&mut Cursor::new(&mut out), ImageFormat::Png)
        .map_err(|e| Error::Format(format!("PNG encoding failed: {e}")))?;
    Ok((out, saturated))
}

pub fn decode_png16(bytes: &[u8], kind: MapKind) -> Result<LabelMap> {
    let img = image::load_from_memory_with_format(bytes, ImageFormat::Png)
        .map_err(|e| Error::Format(format!("PNG decoding failed: {e}")))?
        .into_luma16();
    let (w, h) = (img.width() as usize, img.height() as usize);
    if w == 0 || h == 0 {
        return Err(Error::Format("empty PNG".into()));
    }
    let mut map = LabelMap::empty(kind, w, h);
    for (slot, &p) in map.raster.data_mut().iter_mut().zip(img.as_raw()) {
        *slot = (p != 0).then(|| p as f64 / PNG_SCALE);
    }
    Ok(map)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sample() -> LabelMap {
        let mut m = LabelMap::empty(MapKind::Depth, 3, 2);
        m.set(0, 0, Some(1.5));
        m.set(2, 1, Some(42.25));
        m
    }

    #[test]
    fn raster_round_trip() {
        let m = sample();
        assert_eq!(decode_raster(&encode_raster(&m)).unwrap(), m);
        let bytes = encode_raster(&m);
        assert!(bytes.starts_with(b"OMDRASTER 3 2 depth m\n"));
    }

    #[test]
    fn raster_header_errors() {
        assert!(decode_raster(b"OMDRASTER 1 1 depth deg\n\0\0\0\0").is_err());
        assert!(decode_raster(b"OMDRASTER 1 1 normal m\n\0\0\0\0").is_err());
        assert!(decode_raster(b"OMDRASTER 0 1 depth m\n").is_err());
        assert!(decode_raster(b"OMDRASTER 2 1 depth m\n\0\0\0\0").is_err());
        assert!(decode_raster(b"RASTER 1 1 depth m\n\0\0\0\0").is_err());
        assert!(decode_raster(b"OMDRASTER 99999999999 99999999999 depth m\n").is_err());
        assert!(decode_raster(&[b'A'; 1000]).is_err());
        let mut inf = b"OMDRASTER 1 1 disparity deg\n".to_vec();
        inf.extend_from_slice(&f32::INFINITY.to_le_bytes());
        assert!(decode_raster(&inf).is_err());
    }

    #[test]
    fn png_quantization() {
        let m = sample();
        let (bytes, sat) = encode_png16(&m).unwrap();
        assert_eq!(sat, 0);
        let back = decode_png16(&bytes, MapKind::Depth).unwrap();
        assert_eq!(back, m);

        let mut big = LabelMap::empty(MapKind::Depth, 2, 1);
        big.set(0, 0, Some(300.0));
        big.set(1, 0, Some(1e-4));
        let (bytes, sat) = encode_png16(&big).unwrap();
        assert_eq!(sat, 2);
        let back = decode_png16(&bytes, MapKind::Depth).unwrap();
        assert_eq!(back.get(0, 0), Some(65535.0 / 256.0));
        assert_eq!(back.get(1, 0), Some(1.0 / 256.0));
    }

    proptest! {
        #[test]
        fn png_error_is_half_step(v in prop::collection::vec(prop::option::of(0.01f64..250.0), 1..30)) {
            let mut m = LabelMap::empty(MapKind::Depth, v.len(), 1);
            for (c, x) in v.iter().enumerate() { m.set(c, 0, *x); }
            let back = decode_png16(&encode_png16(&m).unwrap().0, MapKind::Depth).unwrap();
            for (c, x) in v.iter().enumerate() {
                match (x, back.get(c, 0)) {
                    (None, None) => {}
                    (Some(a), Some(b)) => prop_assert!((a - b).abs() <= 0.5 / 256.0 + 1e-12 || *a < 0.5 / 256.0),
                    _ => prop_assert!(false),
                }
            }
        }

        #[test]
        fn raster_decoder_never_panics(tail in prop::collection::vec(any::<u8>(), 0..64), w in 0usize..5, h in 0usize..5) {
            let mut b = format!("OMDRASTER {w} {h} depth m\n").into_bytes();
            b.extend_from_slice(&tail);
            let _ = decode_raster(&b);
            let _ = decode_raster(&tail);
            let _ = decode_png16(&tail, MapKind::Depth);
        }
    }
}
