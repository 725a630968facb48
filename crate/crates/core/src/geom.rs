//! Rigid-body geometry primitives.
//!
//! Orientations are stored as unit quaternions; rotation matrices are
//! materialized on demand. Every quantity is expressed in the common base
//! frame unless a function says otherwise.

use nalgebra::{Matrix3, Matrix6, Quaternion, Rotation3, UnitQuaternion, Vector3, Vector6};

pub type Vec3 = Vector3<f64>;
pub type UnitQuat = UnitQuaternion<f64>;
pub type RotMat = Matrix3<f64>;

/// Rotation by `angle` radians about a unit `axis`.
///
/// `angle_axis_of` always returns `angle` in `[0, π]`; values built by hand
/// for fractional rotations may carry any real angle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AngleAxis {
    pub axis: Vec3,
    pub angle: f64,
}

impl AngleAxis {
    pub fn new(axis: Vec3, angle: f64) -> Self {
        AngleAxis {
            axis: axis.normalize(),
            angle,
        }
    }

    /// Same axis, angle multiplied by `s`.
    pub fn scaled(&self, s: f64) -> Self {
        AngleAxis {
            axis: self.axis,
            angle: self.angle * s,
        }
    }
}

/// Position plus orientation of a frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose {
    pub position: Vec3,
    pub orientation: UnitQuat,
}

impl Default for Pose {
    fn default() -> Self {
        Pose::identity()
    }
}

impl Pose {
    pub fn new(position: Vec3, orientation: UnitQuat) -> Self {
        Pose {
            position,
            orientation,
        }
    }

    pub fn identity() -> Self {
        Pose::new(Vec3::zeros(), UnitQuat::identity())
    }

    pub fn from_translation(position: Vec3) -> Self {
        Pose::new(position, UnitQuat::identity())
    }

    pub fn rotation(&self) -> RotMat {
        *self.orientation.to_rotation_matrix().matrix()
    }

    /// `self ∘ other`: `other` is expressed in the frame of `self`.
    pub fn compose(&self, other: &Pose) -> Pose {
        Pose {
            position: self.position + self.orientation * other.position,
            orientation: renormalize(self.orientation * other.orientation),
        }
    }

    pub fn inverse(&self) -> Pose {
        let inv = self.orientation.inverse();
        Pose {
            position: -(inv * self.position),
            orientation: inv,
        }
    }

    /// Quaternion as `[w, x, y, z]`.
    pub fn wxyz(&self) -> [f64; 4] {
        let q = self.orientation.quaternion();
        [q.w, q.i, q.j, q.k]
    }
}

/// Spatial velocity of a single frame: linear part first, then angular.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Twist6 {
    pub linear: Vec3,
    pub angular: Vec3,
}

impl Twist6 {
    pub fn new(linear: Vec3, angular: Vec3) -> Self {
        Twist6 { linear, angular }
    }

    pub fn zero() -> Self {
        Twist6::default()
    }

    pub fn from_vector(v: &Vector6<f64>) -> Self {
        Twist6 {
            linear: Vec3::new(v[0], v[1], v[2]),
            angular: Vec3::new(v[3], v[4], v[5]),
        }
    }

    pub fn from_slice(v: &[f64]) -> Self {
        assert_eq!(v.len(), 6, "twist needs 6 components");
        Twist6 {
            linear: Vec3::new(v[0], v[1], v[2]),
            angular: Vec3::new(v[3], v[4], v[5]),
        }
    }

    pub fn to_vector(&self) -> Vector6<f64> {
        Vector6::new(
            self.linear.x,
            self.linear.y,
            self.linear.z,
            self.angular.x,
            self.angular.y,
            self.angular.z,
        )
    }

    pub fn norm(&self) -> f64 {
        self.to_vector().norm()
    }
}

/// Cross-product matrix: `skew(a) * b == a × b`.
pub fn skew(a: &Vec3) -> Matrix3<f64> {
    Matrix3::new(0.0, -a.z, a.y, a.z, 0.0, -a.x, -a.y, a.x, 0.0)
}

/// Rodrigues' formula.
pub fn rot_of(aa: &AngleAxis) -> RotMat {
    let k = skew(&aa.axis);
    let (s, c) = aa.angle.sin_cos();
    Matrix3::identity() + k * s + k * k * (1.0 - c)
}

pub fn quat_of_rot(r: &RotMat) -> UnitQuat {
    UnitQuat::from_rotation_matrix(&Rotation3::from_matrix_unchecked(*r))
}

pub fn rot_of_quat(q: &UnitQuat) -> RotMat {
    *q.to_rotation_matrix().matrix()
}

/// Angle-axis decomposition with `angle ∈ [0, π]`.
///
/// Identity maps to axis `(1, 0, 0)`. At exactly π the axis is signed so
/// that its largest-magnitude component is positive.
pub fn angle_axis_of(r: &RotMat) -> AngleAxis {
    angle_axis_of_quat(&quat_of_rot(r))
}

pub fn angle_axis_of_quat(q: &UnitQuat) -> AngleAxis {
    let q = canonical(q);
    let v = q.imag();
    let s = v.norm();
    if s == 0.0 {
        return AngleAxis {
            axis: Vec3::x(),
            angle: 0.0,
        };
    }
    let angle = 2.0 * s.atan2(q.w);
    let mut axis = v / s;
    if q.w == 0.0 {
        axis = sign_largest_positive(axis);
    }
    AngleAxis { axis, angle }
}

fn sign_largest_positive(v: Vec3) -> Vec3 {
    let i = v.iamax();
    if v[i] < 0.0 {
        -v
    } else {
        v
    }
}

/// Representative with nonnegative scalar part. At `w == 0` the vector part
/// is signed so its largest-magnitude component is positive.
pub fn canonical(q: &UnitQuat) -> UnitQuat {
    let raw = q.quaternion();
    let flipped = if raw.w < 0.0 {
        -*raw
    } else if raw.w == 0.0 {
        let v = sign_largest_positive(raw.imag());
        Quaternion::from_imag(v)
    } else {
        *raw
    };
    UnitQuat::new_unchecked(flipped)
}

/// Twist transport along a virtual stick `r` from an end-effector to a
/// rigidly attached frame: `[I, -S(r); 0, I]`.
pub fn screw_transform(r: &Vec3) -> Matrix6<f64> {
    let mut w = Matrix6::identity();
    w.fixed_view_mut::<3, 3>(0, 3).copy_from(&(-skew(r)));
    w
}

/// Error quaternion of `R1ᵀ R2` with nonnegative scalar part.
///
/// The vector part is expressed in frame 1 and vanishes iff the frames are
/// aligned.
pub fn quat_error(q1: &UnitQuat, q2: &UnitQuat) -> UnitQuat {
    canonical(&renormalize(q1.inverse() * q2))
}

pub fn renormalize(q: UnitQuat) -> UnitQuat {
    UnitQuat::new_normalize(q.into_inner())
}

/// Rotation angle in `[0, π]` between two orientations.
pub fn angle_between(q1: &UnitQuat, q2: &UnitQuat) -> f64 {
    angle_axis_of_quat(&quat_error(q1, q2)).angle
}
