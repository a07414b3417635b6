use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Vec3;

/// Hits closer than this are treated as self-intersections.
const T_MIN: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Primitive {
    /// Infinite horizontal plane `z = height`.
    Plane {
        height: f64,
    },
    /// Axis-aligned box.
    Box {
        min: Vec3,
        max: Vec3,
    },
    /// Vertical cylinder with flat caps.
    Cylinder {
        cx: f64,
        cy: f64,
        radius: f64,
        z_min: f64,
        z_max: f64,
    },
    Sphere {
        center: Vec3,
        radius: f64,
    },
}

impl Primitive {
    pub fn validate(&self) -> Result<()> {
        let finite = |v: &[f64]| v.iter().all(|x| x.is_finite());
        let ok = match *self {
            Primitive::Plane { height } => height.is_finite(),
            Primitive::Box { min, max } => {
                finite(min.as_slice()) && finite(max.as_slice()) && (0..3).all(|i| min[i] < max[i])
            }
            Primitive::Cylinder {
                cx,
                cy,
                radius,
                z_min,
                z_max,
            } => finite(&[cx, cy, radius, z_min, z_max]) && radius > 0.0 && z_min < z_max,
            Primitive::Sphere { center, radius } => {
                finite(center.as_slice()) && radius.is_finite() && radius > 0.0
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!(
                "degenerate primitive {self:?}"
            )))
        }
    }

    /// Nearest intersection distance beyond `T_MIN` along a unit ray.
    pub fn intersect(&self, origin: &Vec3, dir: &Vec3) -> Option<f64> {
        match *self {
            Primitive::Plane { height } => {
                if dir.z == 0.0 {
                    return None;
                }
                let t = (height - origin.z) / dir.z;
                (t > T_MIN).then_some(t)
            }
            Primitive::Sphere { center, radius } => {
                let oc = origin - center;
                let b = oc.dot(dir);
                let c = oc.norm_squared() - radius * radius;
                nearest_root(b, c)
            }
            Primitive::Box { min, max } => {
                let (mut t0, mut t1) = (f64::NEG_INFINITY, f64::INFINITY);
                for i in 0..3 {
                    if dir[i] == 0.0 {
                        if origin[i] < min[i] || origin[i] > max[i] {
                            return None;
                        }
                        continue;
                    }
                    let a = (min[i] - origin[i]) / dir[i];
                    let b = (max[i] - origin[i]) / dir[i];
                    t0 = t0.max(a.min(b));
                    t1 = t1.min(a.max(b));
                }
                if t0 > t1 {
                    None
                } else if t0 > T_MIN {
                    Some(t0)
                } else if t1 > T_MIN {
                    Some(t1)
                } else {
                    None
                }
            }
            Primitive::Cylinder {
                cx,
                cy,
                radius,
                z_min,
                z_max,
            } => {
                let mut best: Option<f64> = None;
                let mut consider = |t: f64| {
                    if t > T_MIN && best.is_none_or(|b| t < b) {
                        best = Some(t);
                    }
                };
                let (ox, oy) = (origin.x - cx, origin.y - cy);
                let a = dir.x * dir.x + dir.y * dir.y;
                if a > 0.0 {
                    let b = (ox * dir.x + oy * dir.y) / a;
                    let c = (ox * ox + oy * oy - radius * radius) / a;
                    let disc = b * b - c;
                    if disc >= 0.0 {
                        let s = disc.sqrt();
                        for t in [-b - s, -b + s] {
                            let z = origin.z + t * dir.z;
                            if z >= z_min && z <= z_max {
                                consider(t);
                            }
                        }
                    }
                }
                if dir.z != 0.0 {
                    for zc in [z_min, z_max] {
                        let t = (zc - origin.z) / dir.z;
                        let (x, y) = (ox + t * dir.x, oy + t * dir.y);
                        if x * x + y * y <= radius * radius {
                            consider(t);
                        }
                    }
                }
                best
            }
        }
    }
}

/// Smallest root above `T_MIN` of `t² + 2bt + c = 0`.
fn nearest_root(b: f64, c: f64) -> Option<f64> {
    let disc = b * b - c;
    if disc < 0.0 {
        return None;
    }
    let s = disc.sqrt();
    // stable form: one root from the sum, the other from the product c
    let q = if b > 0.0 { -b - s } else { -b + s };
    let (mut t0, mut t1) = if q == 0.0 { (0.0, 0.0) } else { (q, c / q) };
    if t0 > t1 {
        std::mem::swap(&mut t0, &mut t1);
    }
    if t0 > T_MIN {
        Some(t0)
    } else if t1 > T_MIN {
        Some(t1)
    } else {
        None
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Scene {
    pub primitives: Vec<Primitive>,
}

impl Scene {
    pub fn new(primitives: Vec<Primitive>) -> Result<Self> {
        for p in &primitives {
            p.validate()?;
        }
        Ok(Self { primitives })
    }

    /// Sphere of radius `r` centered on `center`, seen from inside.
    pub fn enclosing_sphere(center: Vec3, r: f64) -> Result<Self> {
        Self::new(vec![Primitive::Sphere { center, radius: r }])
    }

    /// Nearest positive hit over all primitives.
    pub fn raycast(&self, origin: &Vec3, dir: &Vec3) -> Option<f64> {
        self.primitives
            .iter()
            .filter_map(|p| p.intersect(origin, dir))
            .min_by(f64::total_cmp)
    }

    /// Text form accepted by [`Scene::from_str`].
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for p in &self.primitives {
            let line = match *p {
                Primitive::Plane { height } => format!("plane {height}"),
                Primitive::Sphere { center: c, radius } => {
                    format!("sphere {} {} {} {radius}", c.x, c.y, c.z)
                }
                Primitive::Box { min, max } => format!(
                    "box {} {} {} {} {} {}",
                    min.x, min.y, min.z, max.x, max.y, max.z
                ),
                Primitive::Cylinder {
                    cx,
                    cy,
                    radius,
                    z_min,
                    z_max,
                } => format!("cylinder {cx} {cy} {radius} {z_min} {z_max}"),
            };
            out.push_str(&line);
            out.push('\n');
        }
        out
    }
}

impl FromStr for Scene {
    type Err = Error;

    /// One primitive per line; `#` starts a comment.
    ///
    /// ```text
    /// plane <z>
    /// sphere <cx> <cy> <cz> <radius>
    /// box <xmin> <ymin> <zmin> <xmax> <ymax> <zmax>
    /// cylinder <cx> <cy> <radius> <zmin> <zmax>
    /// ```
    fn from_str(text: &str) -> Result<Self> {
        let mut primitives = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mut fields = line.split_whitespace();
            let kind = fields.next().unwrap_or_default();
            let nums = fields
                .map(|f| {
                    f.parse::<f64>()
                        .map_err(|_| Error::parse(line_no, format!("not a number: {f:?}")))
                })
                .collect::<Result<Vec<_>>>()?;
            let expect = |n: usize| {
                if nums.len() == n {
                    Ok(())
                } else {
                    Err(Error::parse(
                        line_no,
                        format!("{kind} takes {n} values, found {}", nums.len()),
                    ))
                }
            };
            let prim = match kind {
                "plane" => {
                    expect(1)?;
                    Primitive::Plane { height: nums[0] }
                }
                "sphere" => {
                    expect(4)?;
                    Primitive::Sphere {
                        center: Vec3::new(nums[0], nums[1], nums[2]),
                        radius: nums[3],
                    }
                }
                "box" => {
                    expect(6)?;
                    Primitive::Box {
                        min: Vec3::new(nums[0], nums[1], nums[2]),
                        max: Vec3::new(nums[3], nums[4], nums[5]),
                    }
                }
                "cylinder" => {
                    expect(5)?;
                    Primitive::Cylinder {
                        cx: nums[0],
                        cy: nums[1],
                        radius: nums[2],
                        z_min: nums[3],
                        z_max: nums[4],
                    }
                }
                other => {
                    return Err(Error::parse(
                        line_no,
                        format!("unknown primitive {other:?}"),
                    ))
                }
            };
            prim.validate()
                .map_err(|e| Error::parse(line_no, e.to_string()))?;
            primitives.push(prim);
        }
        Ok(Scene { primitives })
    }
}
