use super::{wrap_azimuth, EquirectGeometry, PixelCoord, SphericalPoint, Vec3};
use crate::error::{Error, Result};

pub fn cart_to_spherical(p: &Vec3) -> Result<SphericalPoint> {
    let r = p.norm();
    if !(r.is_finite() && r > 0.0) {
        return Err(Error::Degenerate(format!(
            "cannot express ({}, {}, {}) in spherical coordinates",
            p.x, p.y, p.z
        )));
    }
    // atan2 keeps full precision near the poles where acos(z/r) does not
    let theta = p.x.hypot(p.y).atan2(p.z).to_degrees();
    let phi = wrap_azimuth(p.y.atan2(p.x).to_degrees());
    Ok(SphericalPoint { r, theta, phi })
}

pub fn spherical_to_cart(sp: &SphericalPoint) -> Vec3 {
    let (st, ct) = sp.theta.to_radians().sin_cos();
    let (sp_, cp) = sp.phi.to_radians().sin_cos();
    Vec3::new(sp.r * st * cp, sp.r * st * sp_, sp.r * ct)
}

/// Unit direction for `(theta, phi)` in degrees.
pub fn direction(theta: f64, phi: f64) -> Vec3 {
    spherical_to_cart(&SphericalPoint::new(1.0, theta, phi))
}

/// Linear equirectangular mapping without the band check; rows outside the
/// band extrapolate. Used where a smooth objective matters more than validity.
#[inline]
pub fn project_unchecked(theta: f64, phi: f64, geom: &EquirectGeometry) -> PixelCoord {
    PixelCoord {
        x: (phi + 180.0) / 360.0 * geom.width as f64,
        y: (theta - geom.theta_min) / (geom.theta_max - geom.theta_min) * geom.height as f64,
    }
}

pub fn spherical_to_pixel(sp: &SphericalPoint, geom: &EquirectGeometry) -> Result<PixelCoord> {
    if !geom.contains_theta(sp.theta) {
        return Err(Error::OutOfBand {
            theta: sp.theta,
            min: geom.theta_min,
            max: geom.theta_max,
        });
    }
    Ok(project_unchecked(sp.theta, sp.phi, geom))
}

pub fn pixel_to_spherical_direction(
    px: &PixelCoord,
    geom: &EquirectGeometry,
) -> Result<SphericalPoint> {
    let (w, h) = (geom.width as f64, geom.height as f64);
    let inside = px.x.is_finite()
        && px.y.is_finite()
        && (0.0..=w).contains(&px.x)
        && (0.0..=h).contains(&px.y);
    if !inside {
        return Err(Error::OutOfRaster {
            x: px.x,
            y: px.y,
            width: geom.width,
            height: geom.height,
        });
    }
    Ok(SphericalPoint {
        r: 1.0,
        theta: geom.theta_min + px.y / h * (geom.theta_max - geom.theta_min),
        phi: wrap_azimuth(px.x / w * 360.0 - 180.0),
    })
}
