//! Cooperative task-space maps.
//!
//! Stacked end-effector twists `v = [v_1; v_2]` map to cooperative twists
//! through constant linking matrices built from 6×6 identity blocks. All
//! matrices are rebuilt from closed form on every call.

use nalgebra::{DMatrix, Matrix6};

use crate::error::{Error, Result};
use crate::geom::{angle_axis_of, quat_of_rot, renormalize, rot_of, Pose, Twist6};

/// Cooperation parameter `α ∈ [0, 1]`. `0.5` is the symmetric mode, `0`
/// and `1` are the two master-slave modes.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct CoopParam(f64);

impl CoopParam {
    pub const SYMMETRIC: CoopParam = CoopParam(0.5);

    pub fn new(alpha: f64) -> Result<Self> {
        if (0.0..=1.0).contains(&alpha) {
            Ok(CoopParam(alpha))
        } else {
            Err(Error::AlphaOutOfRange(alpha))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// `(1 − α)² + α²`.
    pub fn spread(self) -> f64 {
        let a = self.0;
        (1.0 - a).powi(2) + a * a
    }
}

impl Default for CoopParam {
    fn default() -> Self {
        CoopParam::SYMMETRIC
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LinkingKind {
    /// 12×12 `[L_a; L_r]`.
    Cts,
    /// 12×12 `[𝓛_a(α); L_r]`.
    Ects,
    /// 6×12 `[−I, I]`.
    Relative,
    /// 6×12 `[−(1−α)I, αI] / ((1−α)² + α²)`.
    AsymRelative,
    /// 6×12 `[½I, ½I]`.
    AbsSymmetric,
    /// 6×12 `[αI, (1−α)I]`.
    AbsAsymmetric,
}

impl LinkingKind {
    pub fn uses_alpha(self) -> bool {
        matches!(
            self,
            LinkingKind::Ects | LinkingKind::AsymRelative | LinkingKind::AbsAsymmetric
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinkingMap {
    pub kind: LinkingKind,
    pub alpha: CoopParam,
    pub matrix: DMatrix<f64>,
}

/// Matrix of `coeffs[r][c] · I₆` blocks.
pub fn identity_blocks<const C: usize>(coeffs: &[[f64; C]]) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(6 * coeffs.len(), 6 * C);
    for (r, row) in coeffs.iter().enumerate() {
        for (c, &k) in row.iter().enumerate() {
            if k != 0.0 {
                m.view_mut((6 * r, 6 * c), (6, 6))
                    .copy_from(&(Matrix6::identity() * k));
            }
        }
    }
    m
}

pub fn linking(kind: LinkingKind, alpha: CoopParam) -> LinkingMap {
    let a = alpha.value();
    let matrix = match kind {
        LinkingKind::Cts => identity_blocks(&[[0.5, 0.5], [-1.0, 1.0]]),
        LinkingKind::Ects => identity_blocks(&[[a, 1.0 - a], [-1.0, 1.0]]),
        LinkingKind::Relative => identity_blocks(&[[-1.0, 1.0]]),
        LinkingKind::AsymRelative => {
            let s = 1.0 / alpha.spread();
            identity_blocks(&[[-(1.0 - a) * s, a * s]])
        }
        LinkingKind::AbsSymmetric => identity_blocks(&[[0.5, 0.5]]),
        LinkingKind::AbsAsymmetric => identity_blocks(&[[a, 1.0 - a]]),
    };
    LinkingMap {
        kind,
        alpha,
        matrix,
    }
}

/// Inverse of the CTS linking matrix: `[[I, −½I], [I, ½I]]`.
pub fn invert_cts() -> DMatrix<f64> {
    identity_blocks(&[[1.0, -0.5], [1.0, 0.5]])
}

/// Inverse of the ECTS linking matrix: `[[I, −(1−α)I], [I, αI]]`.
pub fn invert_ects(alpha: CoopParam) -> DMatrix<f64> {
    let a = alpha.value();
    identity_blocks(&[[1.0, -(1.0 - a)], [1.0, a]])
}

/// Moore-Penrose inverse of the relative map: `½[−I; I]`.
pub fn pinv_relative() -> DMatrix<f64> {
    identity_blocks(&[[-0.5], [0.5]])
}

/// Moore-Penrose inverse of the asymmetric relative map: `[−(1−α)I; αI]`.
pub fn pinv_asym_relative(alpha: CoopParam) -> DMatrix<f64> {
    let a = alpha.value();
    identity_blocks(&[[-(1.0 - a)], [a]])
}

/// Moore-Penrose inverse of `[αI, (1−α)I]`: `[αI; (1−α)I] / ((1−α)² + α²)`.
pub fn pinv_abs_asymmetric(alpha: CoopParam) -> DMatrix<f64> {
    let a = alpha.value();
    let s = 1.0 / alpha.spread();
    identity_blocks(&[[a * s], [(1.0 - a) * s]])
}

/// Moore-Penrose inverse of `[½I, ½I]`: `[I; I]`.
pub fn pinv_abs_symmetric() -> DMatrix<f64> {
    identity_blocks(&[[1.0], [1.0]])
}

/// Relative twist produced per unit of asymmetric absolute twist when the
/// latter is resolved through its pseudo-inverse.
pub fn coupling_rel_from_abs(alpha: CoopParam) -> f64 {
    (1.0 - 2.0 * alpha.value()) / alpha.spread()
}

/// Symmetric absolute twist produced per unit of relative twist resolved
/// with the asymmetric split.
pub fn induced_abs_from_rel(alpha: CoopParam) -> f64 {
    (2.0 * alpha.value() - 1.0) / 2.0
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FrameConvention {
    Cts,
    Ects(CoopParam),
    AsymRelative(CoopParam),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoopFrames {
    pub absolute: Pose,
    pub relative: Pose,
    pub convention: FrameConvention,
}

/// Absolute frame `p = w·p_1 + (1−w)·p_2`, `R = R_1 · rot(k₁₂, s·ϑ₁₂)`.
fn blended_absolute(pose1: &Pose, pose2: &Pose, weight1: f64, angle_scale: f64) -> Pose {
    let r1 = pose1.rotation();
    let rel = angle_axis_of(&(r1.transpose() * pose2.rotation()));
    let rot = r1 * rot_of(&rel.scaled(angle_scale));
    Pose::new(
        pose1.position * weight1 + pose2.position * (1.0 - weight1),
        renormalize(quat_of_rot(&rot)),
    )
}

fn symmetric_relative(pose1: &Pose, pose2: &Pose) -> Pose {
    Pose::new(
        pose2.position - pose1.position,
        renormalize(pose1.orientation.inverse() * pose2.orientation),
    )
}

/// Absolute and relative frames of a pose pair.
///
/// The asymmetric relative orientation uses the angle-axis decompositions
/// of each orientation in the base frame, `rot(k₁, c₁ϑ₁)ᵀ · rot(k₂, c₂ϑ₂)`.
/// It is reported for inspection only; velocity-level resolution always
/// goes through the linking matrices.
pub fn cooperative_frames(pose1: &Pose, pose2: &Pose, convention: FrameConvention) -> CoopFrames {
    let (absolute, relative) = match convention {
        FrameConvention::Cts => (
            blended_absolute(pose1, pose2, 0.5, 0.5),
            symmetric_relative(pose1, pose2),
        ),
        FrameConvention::Ects(alpha) => {
            let a = alpha.value();
            (
                blended_absolute(pose1, pose2, a, 1.0 - a),
                symmetric_relative(pose1, pose2),
            )
        }
        FrameConvention::AsymRelative(alpha) => {
            let a = alpha.value();
            let s = alpha.spread();
            let aa1 = angle_axis_of(&pose1.rotation());
            let aa2 = angle_axis_of(&pose2.rotation());
            let rot = rot_of(&aa1.scaled((1.0 - a) / s)).transpose() * rot_of(&aa2.scaled(a / s));
            let relative = Pose::new(
                (pose2.position * a - pose1.position * (1.0 - a)) / s,
                renormalize(quat_of_rot(&rot)),
            );
            (blended_absolute(pose1, pose2, a, 1.0 - a), relative)
        }
    };
    CoopFrames {
        absolute,
        relative,
        convention,
    }
}

fn share(n1: f64, n2: f64) -> f64 {
    if n1 + n2 == 0.0 {
        0.5
    } else {
        n2 / (n1 + n2)
    }
}

/// Fraction of the motion carried by the second end-effector,
/// `‖v_2‖ / (‖v_1‖ + ‖v_2‖)`; `0.5` when both are at rest.
pub fn asymmetry_measure(v1: &Twist6, v2: &Twist6) -> f64 {
    share(v1.norm(), v2.norm())
}

/// Asymmetry of the linear parts only.
pub fn asymmetry_linear(v1: &Twist6, v2: &Twist6) -> f64 {
    share(v1.linear.norm(), v2.linear.norm())
}

/// Asymmetry of the angular parts only.
pub fn asymmetry_angular(v1: &Twist6, v2: &Twist6) -> f64 {
    share(v1.angular.norm(), v2.angular.norm())
}

/// Splits a stacked 12-vector into its two twists.
pub fn split_twists(v: &[f64]) -> [Twist6; 2] {
    [Twist6::from_slice(&v[..6]), Twist6::from_slice(&v[6..12])]
}
