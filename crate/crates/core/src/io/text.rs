use super::{numeric_fields, utf8};
use crate::calibration::{Correspondence, Extrinsics};
use crate::error::{Error, Result};
use crate::geometry::{PixelCoord, Vec3};

/// One correspondence per line: `lx ly lz px py` (LiDAR meters, image pixels).
pub fn parse_correspondences(bytes: &[u8]) -> Result<Vec<Correspondence>> {
    let mut out = Vec::new();
    for (i, line) in utf8(bytes)?.lines().enumerate() {
        let Some(v) = numeric_fields(line, i + 1)? else {
            continue;
        };
        if v.len() != 5 {
            return Err(Error::parse(
                i + 1,
                format!("expected 5 values (lx ly lz px py), found {}", v.len()),
            ));
        }
        out.push(Correspondence {
            lidar_point: Vec3::new(v[0], v[1], v[2]),
            image_point: PixelCoord::new(v[3], v[4]),
        });
    }
    Ok(out)
}

pub fn format_correspondences(corrs: &[Correspondence]) -> String {
    let mut s = String::from("# lx ly lz px py\n");
    for c in corrs {
        let (p, q) = (c.lidar_point, c.image_point);
        s.push_str(&format!("{} {} {} {} {}\n", p.x, p.y, p.z, q.x, q.y));
    }
    s
}

/// One point per line: `x y z`, optionally followed by extra columns
/// (intensity, ring) that are ignored.
pub fn parse_points_text(bytes: &[u8]) -> Result<Vec<Vec3>> {
    let mut out = Vec::new();
    for (i, line) in utf8(bytes)?.lines().enumerate() {
        let Some(v) = numeric_fields(line, i + 1)? else {
            continue;
        };
        if v.len() < 3 {
            return Err(Error::parse(
                i + 1,
                format!("expected at least 3 values (x y z), found {}", v.len()),
            ));
        }
        out.push(Vec3::new(v[0], v[1], v[2]));
    }
    Ok(out)
}

pub fn format_points_text(points: &[Vec3]) -> String {
    let mut s = String::new();
    for p in points {
        s.push_str(&format!("{} {} {}\n", p.x, p.y, p.z));
    }
    s
}

/// One pose per line: `rx ry rz tx ty tz`, an axis-angle rotation in
/// radians and a translation in meters.
pub fn parse_poses(bytes: &[u8]) -> Result<Vec<Extrinsics>> {
    let mut out = Vec::new();
    for (i, line) in utf8(bytes)?.lines().enumerate() {
        let Some(v) = numeric_fields(line, i + 1)? else {
            continue;
        };
        if v.len() != 6 {
            return Err(Error::parse(
                i + 1,
                format!("expected 6 values (rx ry rz tx ty tz), found {}", v.len()),
            ));
        }
        out.push(Extrinsics::new(
            Vec3::new(v[0], v[1], v[2]),
            Vec3::new(v[3], v[4], v[5]),
        ));
    }
    Ok(out)
}

pub fn format_poses(poses: &[Extrinsics]) -> String {
    let mut s = String::from("# rx ry rz tx ty tz\n");
    for p in poses {
        let (r, t) = (p.rotation, p.translation);
        s.push_str(&format!(
            "{} {} {} {} {} {}\n",
            r.x, r.y, r.z, t.x, t.y, t.z
        ));
    }
    s
}
