//! Geometric primitives shared by every stage of the pipeline: unit normals,
//! symmetry planes, reflections, residual quaternions, rigid transforms and
//! deterministic hemisphere layouts.

use std::fmt;

use nalgebra::{Matrix3, Matrix4, Quaternion, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Vec3 = Vector3<f64>;

/// Components with magnitude at or below this are treated as zero when
/// choosing the canonical sign of a normal.
pub const SIGN_EPS: f64 = 1e-9;

/// A unit-length direction in R^3.
#[derive(Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 3]", into = "[f64; 3]")]
pub struct UnitVector3(Vec3);

impl UnitVector3 {
    pub const X: UnitVector3 = UnitVector3(Vector3::new(1.0, 0.0, 0.0));
    pub const Y: UnitVector3 = UnitVector3(Vector3::new(0.0, 1.0, 0.0));
    pub const Z: UnitVector3 = UnitVector3(Vector3::new(0.0, 0.0, 1.0));

    /// Normalizes `(x, y, z)`. Fails on zero-length or non-finite input.
    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        Self::from_vector(Vec3::new(x, y, z))
    }

    pub fn from_vector(v: Vec3) -> Result<Self> {
        let norm = v.norm();
        if !norm.is_finite() || norm < 1e-300 {
            return Err(Error::InvalidVector(format!(
                "cannot normalize ({}, {}, {})",
                v.x, v.y, v.z
            )));
        }
        Ok(UnitVector3(v / norm))
    }

    /// Wraps a vector the caller already knows to be unit length, renormalizing
    /// to absorb round-off.
    pub(crate) fn renormalized(v: Vec3) -> Self {
        UnitVector3(v / v.norm())
    }

    pub fn x(&self) -> f64 {
        self.0.x
    }
    pub fn y(&self) -> f64 {
        self.0.y
    }
    pub fn z(&self) -> f64 {
        self.0.z
    }

    pub fn as_vector(&self) -> &Vec3 {
        &self.0
    }

    pub fn to_array(&self) -> [f64; 3] {
        [self.0.x, self.0.y, self.0.z]
    }

    pub fn dot(&self, other: &UnitVector3) -> f64 {
        self.0.dot(&other.0)
    }

    pub fn flipped(&self) -> Self {
        UnitVector3(-self.0)
    }

    /// Plane-sign convention: the first component with magnitude above
    /// [`SIGN_EPS`] (scanning x, y, z) is made positive.
    pub fn canonical(&self) -> Self {
        if first_significant(&[self.0.x, self.0.y, self.0.z]) < 0.0 {
            self.flipped()
        } else {
            *self
        }
    }

    /// Hemisphere convention used by hypothesis banks: z >= 0, with normals on
    /// the equator resolved by the plane-sign convention.
    pub fn to_upper_hemisphere(&self) -> Self {
        if first_significant(&[self.0.z, self.0.x, self.0.y]) < 0.0 {
            self.flipped()
        } else {
            *self
        }
    }

    pub fn rotated(&self, rotation: &Matrix3<f64>) -> Self {
        Self::renormalized(rotation * self.0)
    }
}

fn first_significant(components: &[f64]) -> f64 {
    components
        .iter()
        .copied()
        .find(|c| c.abs() > SIGN_EPS)
        .unwrap_or(0.0)
}

impl fmt::Debug for UnitVector3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.0.x, self.0.y, self.0.z)
    }
}

impl TryFrom<[f64; 3]> for UnitVector3 {
    type Error = Error;
    fn try_from(v: [f64; 3]) -> Result<Self> {
        Self::new(v[0], v[1], v[2])
    }
}

impl From<UnitVector3> for [f64; 3] {
    fn from(v: UnitVector3) -> Self {
        v.to_array()
    }
}

/// Oriented plane `{x : n·x + d = 0}` with its normal in canonical sign.
///
/// `n` and `-n` (with `d` negated) describe the same plane, so construction
/// always flips to the canonical representative.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SymmetryPlane {
    normal: UnitVector3,
    offset: f64,
}

impl SymmetryPlane {
    pub fn new(normal: UnitVector3, offset: f64) -> Result<Self> {
        if !offset.is_finite() {
            return Err(Error::InvalidPlane(format!("non-finite offset {offset}")));
        }
        let canonical = normal.canonical();
        let offset = if canonical == normal { offset } else { -offset };
        Ok(SymmetryPlane {
            normal: canonical,
            // avoid -0.0 leaking into serialized output
            offset: offset + 0.0,
        })
    }

    pub fn through_origin(normal: UnitVector3) -> Self {
        SymmetryPlane {
            normal: normal.canonical(),
            offset: 0.0,
        }
    }

    /// The plane with the given normal passing through `point`.
    pub fn through_point(normal: UnitVector3, point: &Vec3) -> Self {
        let n = normal.canonical();
        SymmetryPlane {
            normal: n,
            offset: -n.as_vector().dot(point) + 0.0,
        }
    }

    pub fn normal(&self) -> UnitVector3 {
        self.normal
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn signed_distance(&self, p: &Vec3) -> f64 {
        self.normal.as_vector().dot(p) + self.offset
    }

    pub fn reflect_point(&self, p: &Vec3) -> Vec3 {
        p - self.normal.as_vector() * (2.0 * self.signed_distance(p))
    }

    pub fn reflection_matrix(&self) -> ReflectionMatrix {
        let n = self.normal.as_vector();
        let linear = Matrix3::identity() - 2.0 * n * n.transpose();
        let t = -2.0 * self.offset * n;
        let mut m = Matrix4::identity();
        m.fixed_view_mut::<3, 3>(0, 0).copy_from(&linear);
        m.fixed_view_mut::<3, 1>(0, 3).copy_from(&t);
        ReflectionMatrix(m)
    }

    /// Image of this plane under `x -> R x + t`.
    pub fn transformed(&self, transform: &RigidTransform) -> Self {
        let n = transform.rotation * self.normal.as_vector();
        let n = UnitVector3::renormalized(n);
        // a point on the plane maps to a point on the new plane
        let on_plane = -self.offset * self.normal.as_vector();
        SymmetryPlane::through_point(n, &transform.apply(&on_plane))
    }
}

/// Homogeneous 4x4 reflection `[[I - 2nnᵀ, -2dn], [0, 1]]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReflectionMatrix(pub Matrix4<f64>);

impl ReflectionMatrix {
    pub fn linear(&self) -> Matrix3<f64> {
        self.0.fixed_view::<3, 3>(0, 0).into_owned()
    }

    pub fn translation(&self) -> Vec3 {
        self.0.fixed_view::<3, 1>(0, 3).into_owned()
    }

    pub fn apply(&self, p: &Vec3) -> Vec3 {
        self.linear() * p + self.translation()
    }
}

/// Rotation quaternion kept on the `w >= 0` sheet of the double cover.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 4]", into = "[f64; 4]")]
pub struct UnitQuaternion {
    w: f64,
    x: f64,
    y: f64,
    z: f64,
}

impl UnitQuaternion {
    pub const IDENTITY: UnitQuaternion = UnitQuaternion {
        w: 1.0,
        x: 0.0,
        y: 0.0,
        z: 0.0,
    };

    /// Normalizes `(w, x, y, z)` and canonicalizes to `w >= 0`.
    pub fn new(w: f64, x: f64, y: f64, z: f64) -> Result<Self> {
        let norm = (w * w + x * x + y * y + z * z).sqrt();
        if !norm.is_finite() || norm < 1e-300 {
            return Err(Error::InvalidQuaternion(format!("({w}, {x}, {y}, {z})")));
        }
        let s = if w < 0.0 { -1.0 / norm } else { 1.0 / norm };
        Ok(UnitQuaternion {
            w: w * s,
            x: x * s,
            y: y * s,
            z: z * s,
        })
    }

    pub fn from_axis_angle(axis: &UnitVector3, angle_deg: f64) -> Self {
        let half = angle_deg.to_radians() / 2.0;
        let (s, c) = half.sin_cos();
        let a = axis.as_vector();
        Self::new(c, a.x * s, a.y * s, a.z * s).expect("axis-angle quaternion is unit")
    }

    /// Minimal rotation carrying `from` onto `to`. `None` when the two are
    /// antiparallel and the rotation axis is undefined.
    pub fn shortest_arc(from: &UnitVector3, to: &UnitVector3) -> Option<Self> {
        let a = from.as_vector();
        let b = to.as_vector();
        let w = 1.0 + a.dot(b);
        if w < 1e-12 {
            return None;
        }
        let c = a.cross(b);
        Self::new(w, c.x, c.y, c.z).ok()
    }

    pub fn w(&self) -> f64 {
        self.w
    }
    pub fn x(&self) -> f64 {
        self.x
    }
    pub fn y(&self) -> f64 {
        self.y
    }
    pub fn z(&self) -> f64 {
        self.z
    }

    pub fn to_array(&self) -> [f64; 4] {
        [self.w, self.x, self.y, self.z]
    }

    /// Rotation angle in degrees, in [0, 180].
    pub fn angle_deg(&self) -> f64 {
        let v = (self.x * self.x + self.y * self.y + self.z * self.z).sqrt();
        (2.0 * v.atan2(self.w)).to_degrees()
    }

    pub fn rotate(&self, v: &Vec3) -> Vec3 {
        let q = nalgebra::UnitQuaternion::new_unchecked(Quaternion::new(
            self.w, self.x, self.y, self.z,
        ));
        q * v
    }

    pub fn to_rotation_matrix(&self) -> Matrix3<f64> {
        let q = nalgebra::UnitQuaternion::new_unchecked(Quaternion::new(
            self.w, self.x, self.y, self.z,
        ));
        q.to_rotation_matrix().into_inner()
    }
}

impl TryFrom<[f64; 4]> for UnitQuaternion {
    type Error = Error;
    fn try_from(q: [f64; 4]) -> Result<Self> {
        Self::new(q[0], q[1], q[2], q[3])
    }
}

impl From<UnitQuaternion> for [f64; 4] {
    fn from(q: UnitQuaternion) -> Self {
        q.to_array()
    }
}

/// `x -> R x + t` with `R` a proper rotation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RigidTransform {
    pub rotation: Matrix3<f64>,
    pub translation: Vec3,
}

impl Default for RigidTransform {
    fn default() -> Self {
        Self::identity()
    }
}

impl RigidTransform {
    pub fn identity() -> Self {
        RigidTransform {
            rotation: Matrix3::identity(),
            translation: Vec3::zeros(),
        }
    }

    pub fn from_rotation(rotation: Matrix3<f64>) -> Self {
        RigidTransform {
            rotation,
            translation: Vec3::zeros(),
        }
    }

    pub fn apply(&self, p: &Vec3) -> Vec3 {
        self.rotation * p + self.translation
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &RigidTransform) -> RigidTransform {
        RigidTransform {
            rotation: self.rotation * other.rotation,
            translation: self.rotation * other.translation + self.translation,
        }
    }

    pub fn inverse(&self) -> RigidTransform {
        let rt = self.rotation.transpose();
        RigidTransform {
            rotation: rt,
            translation: -(rt * self.translation),
        }
    }

    /// Rotation angle of the linear part in degrees.
    pub fn rotation_angle_deg(&self) -> f64 {
        let c = ((self.rotation.trace() - 1.0) / 2.0).clamp(-1.0, 1.0);
        c.acos().to_degrees()
    }

    pub fn is_proper(&self, tol: f64) -> bool {
        let r = &self.rotation;
        (r.transpose() * r - Matrix3::identity()).amax() <= tol
            && (r.determinant() - 1.0).abs() <= tol
    }
}

/// Angle between two normals in degrees.
///
/// With `sign_invariant` the result is `min(θ, 180 - θ)`, since `n` and `-n`
/// name the same plane.
pub fn geodesic_deg(u: &UnitVector3, v: &UnitVector3, sign_invariant: bool) -> f64 {
    // atan2 stays accurate for nearly parallel and nearly opposite pairs
    let theta = u.as_vector().cross(v.as_vector()).norm().atan2(u.dot(v)).to_degrees();
    if sign_invariant {
        theta.min(180.0 - theta)
    } else {
        theta
    }
}

/// Deterministic near-uniform layout of `n` normals on the upper hemisphere.
///
/// Starts from a spherical Fibonacci spiral restricted to `z > 0` and relaxes
/// it with a short-range repulsion that treats `p` and `-p` as the same
/// point, which removes the clustering a raw spiral shows at the pole and
/// across the equator. Output is bitwise reproducible.
pub fn sample_hemisphere(n: usize) -> Vec<UnitVector3> {
    const RELAX_ITERS: usize = 200;
    const RELAX_STEP: f64 = 0.02;

    if n == 0 {
        return Vec::new();
    }
    if n == 1 {
        return vec![UnitVector3::Z];
    }
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    let mut pts: Vec<Vec3> = (0..n)
        .map(|i| {
            let z = 1.0 - (i as f64 + 0.5) / n as f64;
            let r = (1.0 - z * z).max(0.0).sqrt();
            let phi = golden * i as f64;
            Vec3::new(r * phi.cos(), r * phi.sin(), z)
        })
        .collect();

    let spacing = (2.0 * std::f64::consts::PI / n as f64).sqrt();
    let cutoff = 2.0 * spacing;
    let mut forces = vec![Vec3::zeros(); n];
    for it in 0..RELAX_ITERS {
        for (i, f) in forces.iter_mut().enumerate() {
            let p = pts[i];
            let mut acc = Vec3::zeros();
            for (j, q) in pts.iter().enumerate() {
                for (sign, skip) in [(1.0, i == j), (-1.0, false)] {
                    if skip {
                        continue;
                    }
                    let diff = p - sign * q;
                    let d = diff.norm();
                    if d < cutoff {
                        let w = (spacing / d.max(1e-12)).powi(3);
                        acc += diff * w;
                    }
                }
            }
            *f = acc - p * acc.dot(&p);
        }
        let step = RELAX_STEP * (1.0 - it as f64 / RELAX_ITERS as f64);
        for (p, f) in pts.iter_mut().zip(&forces) {
            let moved = (*p + f * step).normalize();
            *p = if moved.z < 0.0 { -moved } else { moved };
        }
    }
    pts.into_iter()
        .map(|p| UnitVector3::renormalized(p).to_upper_hemisphere())
        .collect()
}

/// Rotates a hypothesis normal by a residual quaternion and returns the
/// upper-hemisphere representative of the result.
pub fn apply_residual(hypothesis: &UnitVector3, q: &UnitQuaternion) -> UnitVector3 {
    UnitVector3::renormalized(q.rotate(hypothesis.as_vector())).to_upper_hemisphere()
}

/// Rotation matrix about a unit axis by `angle_deg`.
pub fn rotation_about(axis: &UnitVector3, angle_deg: f64) -> Matrix3<f64> {
    UnitQuaternion::from_axis_angle(axis, angle_deg).to_rotation_matrix()
}
