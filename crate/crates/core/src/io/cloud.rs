use super::parse_points_text;
use crate::error::{Error, Result};
use crate::geometry::Vec3;

/// Leading bytes of a binary point file.
pub const POINTS_MAGIC: &[u8; 8] = b"OMDPTS01";

const HEADER_LEN: usize = 16;

/// Binary layout: magic, point count as u64 LE, then `x y z` as f32 LE.
pub fn encode_points_binary(points: &[Vec3]) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + 12 * points.len());
    out.extend_from_slice(POINTS_MAGIC);
    out.extend_from_slice(&(points.len() as u64).to_le_bytes());
    for p in points {
        for v in [p.x, p.y, p.z] {
            out.extend_from_slice(&(v as f32).to_le_bytes());
        }
    }
    out
}

pub fn decode_points_binary(bytes: &[u8]) -> Result<Vec<Vec3>> {
    if bytes.len() < HEADER_LEN || &bytes[..8] != POINTS_MAGIC {
        return Err(Error::Format("missing binary point file header".into()));
    }
    let count = u64::from_le_bytes(bytes[8..16].try_into().expect("8-byte slice"));
    let body = &bytes[HEADER_LEN..];
    let expected = usize::try_from(count)
        .ok()
        .and_then(|c| c.checked_mul(12))
        .ok_or_else(|| Error::Format(format!("point count {count} too large")))?;
    if body.len() != expected {
        return Err(Error::Format(format!(
            "header declares {count} points ({expected} bytes) but body has {} bytes",
            body.len()
        )));
    }
    body.chunks_exact(12)
        .enumerate()
        .map(|(i, c)| {
            let f = |k: usize| f32::from_le_bytes(c[k..k + 4].try_into().expect("4-byte slice"));
            let p = Vec3::new(f(0) as f64, f(4) as f64, f(8) as f64);
            if p.iter().all(|v| v.is_finite()) {
                Ok(p)
            } else {
                Err(Error::Format(format!("point {i} is not finite")))
            }
        })
        .collect()
}

/// Binary when the magic is present, text otherwise.
pub fn decode_points(bytes: &[u8]) -> Result<Vec<Vec3>> {
    if bytes.starts_with(POINTS_MAGIC) {
        decode_points_binary(bytes)
    } else {
        parse_points_text(bytes)
    }
}
