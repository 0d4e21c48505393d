//! Exponential and logarithm maps between rotation vectors and rotation matrices.
//!
//! Rotation vectors are axis-angle encodings `theta * axis`. The logarithm always
//! returns the representative with magnitude in `[0, pi]`.

use std::f64::consts::PI;

use nalgebra::{Matrix3, Vector3};

use crate::error::{Error, Result};

/// Tolerance on `R^T R - I` accepted by [`log`].
pub const ROTATION_TOLERANCE: f64 = 1e-6;

pub fn hat(v: &Vector3<f64>) -> Matrix3<f64> {
    Matrix3::new(0.0, -v.z, v.y, v.z, 0.0, -v.x, -v.y, v.x, 0.0)
}

fn vee_antisymmetric(m: &Matrix3<f64>) -> Vector3<f64> {
    // vee(M - M^T) for any M
    Vector3::new(m[(2, 1)] - m[(1, 2)], m[(0, 2)] - m[(2, 0)], m[(1, 0)] - m[(0, 1)])
}

/// Rodrigues formula.
pub fn exp(v: &Vector3<f64>) -> Matrix3<f64> {
    let theta2 = v.norm_squared();
    let theta = theta2.sqrt();
    let k = hat(v);
    let (a, b) = if theta < 1e-4 {
        (
            1.0 - theta2 / 6.0 + theta2 * theta2 / 120.0,
            0.5 - theta2 / 24.0 + theta2 * theta2 / 720.0,
        )
    } else {
        (theta.sin() / theta, (1.0 - theta.cos()) / theta2)
    };
    Matrix3::identity() + k * a + k * k * b
}

/// Residual `max |R^T R - I|` plus a penalty when the determinant is not positive.
pub fn orthonormality_residual(r: &Matrix3<f64>) -> f64 {
    let res = (r.transpose() * r - Matrix3::identity()).abs().max();
    if r.determinant() <= 0.0 {
        res.max(1.0)
    } else {
        res
    }
}

/// Matrix logarithm of a proper rotation, returned as a rotation vector.
pub fn log(r: &Matrix3<f64>) -> Result<Vector3<f64>> {
    let residual = orthonormality_residual(r);
    if !(residual <= ROTATION_TOLERANCE) {
        return Err(Error::NotARotation(residual));
    }
    Ok(log_unchecked(r))
}

pub(crate) fn log_unchecked(r: &Matrix3<f64>) -> Vector3<f64> {
    let w = vee_antisymmetric(r);
    let sin_theta = 0.5 * w.norm();
    let cos_theta = 0.5 * (r.trace() - 1.0);
    let theta = sin_theta.atan2(cos_theta);

    if theta < 1e-4 {
        // theta / (2 sin theta) ~ 1/2 (1 + theta^2 / 6)
        return w * (0.5 * (1.0 + theta * theta / 6.0));
    }
    if theta < PI / 2.0 {
        return w * (theta / (2.0 * sin_theta));
    }

    // Near pi the antisymmetric part vanishes; recover the axis from the symmetric part.
    let sym = (r + r.transpose()) * 0.5 - Matrix3::identity() * cos_theta;
    let b = sym / (1.0 - cos_theta);
    let k = (0..3).max_by(|&i, &j| b[(i, i)].total_cmp(&b[(j, j)])).unwrap_or(0);
    let mut axis: Vector3<f64> = b.column(k).into_owned() / b[(k, k)].max(0.0).sqrt();
    axis.normalize_mut();
    if axis.dot(&w) < 0.0 {
        axis = -axis;
    }
    axis * theta
}

/// Maps a rotation vector onto the equivalent one with magnitude in `[0, pi]`.
pub fn canonicalize(v: &Vector3<f64>) -> Vector3<f64> {
    let theta = v.norm();
    if theta <= PI {
        return *v;
    }
    let axis = v / theta;
    let mut wrapped = theta.rem_euclid(2.0 * PI);
    let mut axis = axis;
    if wrapped > PI {
        wrapped = 2.0 * PI - wrapped;
        axis = -axis;
    }
    axis * wrapped
}

/// Wraps an angle into `(-pi, pi]`.
pub fn wrap_angle(a: f64) -> f64 {
    let w = (a + PI).rem_euclid(2.0 * PI) - PI;
    if w <= -PI {
        w + 2.0 * PI
    } else {
        w
    }
}
