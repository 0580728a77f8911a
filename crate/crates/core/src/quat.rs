//! Quaternion algebra.
//!
//! Conventions: Hamilton product, scalar-first `(w, x, y, z)`, right-handed
//! frames. A unit quaternion `q` rotates a vector `v` as `q ⊗ (0, v) ⊗ q⁻¹`.

use std::ops::{Mul, Neg};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Vec3 = [f64; 3];
pub type Mat3 = [[f64; 3]; 3];

/// Accepted deviation from unit norm for quaternions and axes coming from
/// outside the crate (files, user code).
pub const UNIT_TOLERANCE: f64 = 1e-6;

/// Below this angle an axis-angle decomposition reports the default axis.
pub const SMALL_ANGLE: f64 = 1e-8;

pub const DEFAULT_AXIS: Vec3 = [0.0, 0.0, 1.0];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 4]", into = "[f64; 4]")]
pub struct Quaternion {
    pub w: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl From<[f64; 4]> for Quaternion {
    fn from(a: [f64; 4]) -> Self {
        Quaternion::new(a[0], a[1], a[2], a[3])
    }
}

impl From<Quaternion> for [f64; 4] {
    fn from(q: Quaternion) -> Self {
        [q.w, q.x, q.y, q.z]
    }
}

impl Default for Quaternion {
    fn default() -> Self {
        Quaternion::IDENTITY
    }
}

impl Quaternion {
    pub const IDENTITY: Quaternion = Quaternion {
        w: 1.0,
        x: 0.0,
        y: 0.0,
        z: 0.0,
    };

    /// Raw constructor, no normalization.
    pub const fn new(w: f64, x: f64, y: f64, z: f64) -> Self {
        Quaternion { w, x, y, z }
    }

    /// Validates that `(w, x, y, z)` is close to unit norm and renormalizes it.
    pub fn unit(w: f64, x: f64, y: f64, z: f64) -> Result<Self> {
        Quaternion::new(w, x, y, z).checked_unit()
    }

    pub fn checked_unit(self) -> Result<Self> {
        let n = self.norm();
        if !n.is_finite() || (n - 1.0).abs() > UNIT_TOLERANCE {
            return Err(Error::InvalidQuaternion(format!(
                "({}, {}, {}, {}) has norm {n}",
                self.w, self.x, self.y, self.z
            )));
        }
        if (n - 1.0).abs() <= 1e-12 {
            // already unit to well within tolerance; keep the exact bits
            return Ok(self);
        }
        Ok(self.scale(1.0 / n))
    }

    pub fn vector(&self) -> Vec3 {
        [self.x, self.y, self.z]
    }

    pub fn from_scalar_vector(w: f64, v: Vec3) -> Self {
        Quaternion::new(w, v[0], v[1], v[2])
    }

    pub fn dot(&self, other: &Quaternion) -> f64 {
        self.w * other.w + self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn scale(&self, s: f64) -> Self {
        Quaternion::new(self.w * s, self.x * s, self.y * s, self.z * s)
    }

    pub fn sub(&self, other: &Quaternion) -> Self {
        Quaternion::new(
            self.w - other.w,
            self.x - other.x,
            self.y - other.y,
            self.z - other.z,
        )
    }

    pub fn normalized(&self) -> Self {
        self.scale(1.0 / self.norm())
    }

    pub fn conjugate(&self) -> Self {
        Quaternion::new(self.w, -self.x, -self.y, -self.z)
    }

    /// Inverse of a unit quaternion.
    pub fn inverse(&self) -> Self {
        self.conjugate()
    }

    /// Rotates `v` by this (unit) quaternion.
    pub fn rotate(&self, v: Vec3) -> Vec3 {
        // v + 2w(u × v) + 2u × (u × v), the expanded sandwich product
        let u = self.vector();
        let uv = cross(u, v);
        let uuv = cross(u, uv);
        [
            v[0] + 2.0 * (self.w * uv[0] + uuv[0]),
            v[1] + 2.0 * (self.w * uv[1] + uuv[1]),
            v[2] + 2.0 * (self.w * uv[2] + uuv[2]),
        ]
    }

    /// Rotates `v` by the inverse of this quaternion.
    pub fn rotate_inverse(&self, v: Vec3) -> Vec3 {
        self.conjugate().rotate(v)
    }

    /// Rotation matrix `R` with `R v = q ⊗ v ⊗ q⁻¹`.
    pub fn to_matrix(&self) -> Mat3 {
        let (w, x, y, z) = (self.w, self.x, self.y, self.z);
        [
            [
                1.0 - 2.0 * (y * y + z * z),
                2.0 * (x * y - w * z),
                2.0 * (x * z + w * y),
            ],
            [
                2.0 * (x * y + w * z),
                1.0 - 2.0 * (x * x + z * z),
                2.0 * (y * z - w * x),
            ],
            [
                2.0 * (x * z - w * y),
                2.0 * (y * z + w * x),
                1.0 - 2.0 * (x * x + y * y),
            ],
        ]
    }

    /// Intrinsic z-y-x Euler composition: `qz(yaw) ⊗ qy(pitch) ⊗ qx(roll)`.
    pub fn from_euler_zyx(roll: f64, pitch: f64, yaw: f64) -> Self {
        let qx = Quaternion::about_axis(Axis::X, roll);
        let qy = Quaternion::about_axis(Axis::Y, pitch);
        let qz = Quaternion::about_axis(Axis::Z, yaw);
        qz * qy * qx
    }

    /// Rotation by `angle` radians about a coordinate axis.
    pub fn about_axis(axis: Axis, angle: f64) -> Self {
        let (s, c) = (0.5 * angle).sin_cos();
        match axis {
            Axis::X => Quaternion::new(c, s, 0.0, 0.0),
            Axis::Y => Quaternion::new(c, 0.0, s, 0.0),
            Axis::Z => Quaternion::new(c, 0.0, 0.0, s),
        }
    }

    /// Exact half-turn about a coordinate axis.
    pub fn half_turn(axis: Axis) -> Self {
        match axis {
            Axis::X => Quaternion::new(0.0, 1.0, 0.0, 0.0),
            Axis::Y => Quaternion::new(0.0, 0.0, 1.0, 0.0),
            Axis::Z => Quaternion::new(0.0, 0.0, 0.0, 1.0),
        }
    }
}

impl Mul for Quaternion {
    type Output = Quaternion;

    fn mul(self, r: Quaternion) -> Quaternion {
        let l = self;
        Quaternion::new(
            l.w * r.w - l.x * r.x - l.y * r.y - l.z * r.z,
            l.w * r.x + l.x * r.w + l.y * r.z - l.z * r.y,
            l.w * r.y - l.x * r.z + l.y * r.w + l.z * r.x,
            l.w * r.z + l.x * r.y - l.y * r.x + l.z * r.w,
        )
    }
}

impl Neg for Quaternion {
    type Output = Quaternion;

    fn neg(self) -> Quaternion {
        Quaternion::new(-self.w, -self.x, -self.y, -self.z)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];
}

/// Splits a unit quaternion into a rotation angle in `[0, π]` and a unit axis.
///
/// The sign of the quaternion is canonicalized to `w ≥ 0` first, so the axis
/// carries the direction of rotation. Angles below [`SMALL_ANGLE`] report
/// [`DEFAULT_AXIS`].
pub fn axis_angle_decompose(q: &Quaternion) -> Result<(f64, Vec3)> {
    let q = q.checked_unit()?;
    let q = if q.w < 0.0 { -q } else { q };
    let v = q.vector();
    let s = norm3(v);
    let theta = 2.0 * s.atan2(q.w);
    if theta < SMALL_ANGLE {
        return Ok((theta, DEFAULT_AXIS));
    }
    Ok((theta, scale3(v, 1.0 / s)))
}

/// `cos(θ/2) + sin(θ/2)(uₓi + u_yj + u_zk)`.
pub fn axis_angle_compose(theta: f64, axis: Vec3) -> Result<Quaternion> {
    let n = norm3(axis);
    if !n.is_finite() || (n - 1.0).abs() > UNIT_TOLERANCE {
        return Err(Error::param("axis", format!("{axis:?} is not a unit vector")));
    }
    if !theta.is_finite() {
        return Err(Error::param("theta", "non-finite angle"));
    }
    let u = scale3(axis, 1.0 / n);
    let (s, c) = (0.5 * theta).sin_cos();
    Ok(Quaternion::new(c, s * u[0], s * u[1], s * u[2]).normalized())
}

/// Picks quaternion signs so consecutive samples have a nonnegative dot
/// product and the first sample has `w ≥ 0`. Rotations are unchanged.
pub fn hemisphere_align(seq: &[Quaternion]) -> Vec<Quaternion> {
    let mut out: Vec<Quaternion> = Vec::with_capacity(seq.len());
    for (i, q) in seq.iter().enumerate() {
        let flip = match i {
            0 => q.w < 0.0,
            _ => out[i - 1].dot(q) < 0.0,
        };
        out.push(if flip { -*q } else { *q });
    }
    out
}

pub fn hemisphere_align_in_place(seq: &mut [Quaternion]) {
    for i in 0..seq.len() {
        let flip = match i {
            0 => seq[0].w < 0.0,
            _ => seq[i - 1].dot(&seq[i]) < 0.0,
        };
        if flip {
            seq[i] = -seq[i];
        }
    }
}

/// Spherical linear interpolation along the shorter arc.
pub fn slerp(q0: &Quaternion, q1: &Quaternion, s: f64) -> Quaternion {
    let mut q1 = *q1;
    let mut cos = q0.dot(&q1);
    if cos < 0.0 {
        q1 = -q1;
        cos = -cos;
    }
    if s == 0.0 {
        return *q0;
    }
    if s == 1.0 {
        return q1;
    }
    if cos > 1.0 - 1e-12 {
        // nearly parallel, fall back to normalized lerp
        let q = Quaternion::new(
            q0.w + s * (q1.w - q0.w),
            q0.x + s * (q1.x - q0.x),
            q0.y + s * (q1.y - q0.y),
            q0.z + s * (q1.z - q0.z),
        );
        return q.normalized();
    }
    let omega = cos.min(1.0).acos();
    let sin = omega.sin();
    let a = ((1.0 - s) * omega).sin() / sin;
    let b = (s * omega).sin() / sin;
    Quaternion::new(
        a * q0.w + b * q1.w,
        a * q0.x + b * q1.x,
        a * q0.y + b * q1.y,
        a * q0.z + b * q1.z,
    )
    .normalized()
}

pub fn add3(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

pub fn sub3(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub fn scale3(a: Vec3, s: f64) -> Vec3 {
    [a[0] * s, a[1] * s, a[2] * s]
}

pub fn dot3(a: Vec3, b: Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn cross(a: Vec3, b: Vec3) -> Vec3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub fn norm3(a: Vec3) -> f64 {
    dot3(a, a).sqrt()
}

pub fn mat_vec(m: &Mat3, v: Vec3) -> Vec3 {
    [dot3(m[0], v), dot3(m[1], v), dot3(m[2], v)]
}

pub fn mat_mul(a: &Mat3, b: &Mat3) -> Mat3 {
    let mut out = [[0.0; 3]; 3];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            *cell = (0..3).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    out
}

pub fn transpose(m: &Mat3) -> Mat3 {
    let mut out = [[0.0; 3]; 3];
    for (i, row) in m.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            out[j][i] = v;
        }
    }
    out
}

pub fn determinant(m: &Mat3) -> f64 {
    dot3(m[0], cross(m[1], m[2]))
}
