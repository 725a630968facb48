//! Serial-manipulator kinematics and the two-arm stacked quantities.
//!
//! Chains use the classic (distal) Denavit-Hartenberg convention: the
//! transform across row `j` is `Rz(θ_j) · Tz(d_j) · Tx(a_j) · Rx(α_j)` and
//! joint `j` moves about the z-axis of the frame preceding it.

use nalgebra::{DMatrix, DVector, Matrix6, UnitQuaternion, Vector3, Vector6};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{renormalize, screw_transform, Pose, UnitQuat, Vec3};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum JointKind {
    Revolute,
    Prismatic,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DhRow {
    pub a: f64,
    pub alpha: f64,
    pub d: f64,
    pub theta_offset: f64,
    pub kind: JointKind,
}

impl DhRow {
    pub fn revolute(a: f64, alpha: f64, d: f64, theta_offset: f64) -> Self {
        DhRow {
            a,
            alpha,
            d,
            theta_offset,
            kind: JointKind::Revolute,
        }
    }

    pub fn prismatic(a: f64, alpha: f64, d: f64, theta_offset: f64) -> Self {
        DhRow {
            kind: JointKind::Prismatic,
            ..DhRow::revolute(a, alpha, d, theta_offset)
        }
    }

    /// Transform from the frame preceding this row to the one following it.
    pub fn transform(&self, q: f64) -> Pose {
        let (theta, d) = match self.kind {
            JointKind::Revolute => (self.theta_offset + q, self.d),
            JointKind::Prismatic => (self.theta_offset, self.d + q),
        };
        let rz = UnitQuaternion::from_axis_angle(&Vector3::z_axis(), theta);
        let rx = UnitQuaternion::from_axis_angle(&Vector3::x_axis(), self.alpha);
        // Tz(d) Tx(a): the x-offset is applied after the z-rotation.
        let position = Vec3::new(0.0, 0.0, d) + rz * Vec3::new(self.a, 0.0, 0.0);
        Pose::new(position, rz * rx)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SerialChain {
    pub name: String,
    pub base_pose: Pose,
    pub rows: Vec<DhRow>,
    /// Advisory `[lo, hi]` per joint; never enforced.
    pub limits: Vec<(f64, f64)>,
    /// End-effector frame relative to the last link frame.
    pub tool_offset: Pose,
}

impl SerialChain {
    pub fn dof(&self) -> usize {
        self.rows.len()
    }

    fn check_len(&self, q: &[f64]) -> Result<()> {
        if q.len() != self.dof() {
            return Err(Error::DimensionMismatch {
                context: "joint vector",
                expected: self.dof(),
                actual: q.len(),
            });
        }
        Ok(())
    }

    /// Frames preceding each joint (`n` of them) and the end-effector pose.
    fn joint_frames(&self, q: &[f64]) -> Result<(Vec<Pose>, Pose)> {
        self.check_len(q)?;
        let mut frames = Vec::with_capacity(self.dof());
        let mut current = self.base_pose;
        for (row, &qj) in self.rows.iter().zip(q) {
            frames.push(current);
            current = current.compose(&row.transform(qj));
        }
        Ok((frames, current.compose(&self.tool_offset)))
    }

    pub fn forward_kinematics(&self, q: &[f64]) -> Result<Pose> {
        self.joint_frames(q).map(|(_, ee)| ee)
    }

    /// 6×n geometric Jacobian of the end-effector frame, base coordinates,
    /// linear rows first.
    pub fn geometric_jacobian(&self, q: &[f64]) -> Result<DMatrix<f64>> {
        let (frames, ee) = self.joint_frames(q)?;
        let mut jac = DMatrix::zeros(6, self.dof());
        for (j, (frame, row)) in frames.iter().zip(&self.rows).enumerate() {
            let z = frame.orientation * Vec3::z();
            let col = match row.kind {
                JointKind::Revolute => {
                    let lin = z.cross(&(ee.position - frame.position));
                    Vector6::new(lin.x, lin.y, lin.z, z.x, z.y, z.z)
                }
                JointKind::Prismatic => Vector6::new(z.x, z.y, z.z, 0.0, 0.0, 0.0),
            };
            jac.set_column(j, &col);
        }
        Ok(jac)
    }

    /// Indices of joints outside their advisory limits.
    pub fn limit_violations(&self, q: &[f64]) -> Vec<usize> {
        q.iter()
            .zip(&self.limits)
            .enumerate()
            .filter(|(_, (v, (lo, hi)))| **v < *lo || **v > *hi)
            .map(|(i, _)| i)
            .collect()
    }

    /// Damped Newton iteration placing the end-effector at `target`.
    pub fn solve_pose(
        &self,
        target: &Pose,
        q0: &[f64],
        opts: &PoseIkOptions,
    ) -> Result<DVector<f64>> {
        self.check_len(q0)?;
        let mut q = DVector::from_column_slice(q0);
        let mut residual = f64::INFINITY;
        for _ in 0..opts.max_iterations {
            let ee = self.forward_kinematics(q.as_slice())?;
            let err = pose_error(target, &ee);
            residual = err.norm();
            if residual < opts.tolerance {
                return Ok(q);
            }
            let jac = self.geometric_jacobian(q.as_slice())?;
            let damped = &jac * jac.transpose() + DMatrix::identity(6, 6) * opts.damping.powi(2);
            let rhs = DVector::from_column_slice(err.as_slice());
            let Some(y) = damped.lu().solve(&rhs) else {
                break;
            };
            let mut step = jac.transpose() * y;
            let largest = step.amax();
            if largest > opts.max_step {
                step *= opts.max_step / largest;
            }
            q += step;
        }
        Err(Error::IkNotConverged {
            iterations: opts.max_iterations,
            residual,
        })
    }
}

/// `[p_target − p; log(R_target Rᵀ)]` in base coordinates.
fn pose_error(target: &Pose, current: &Pose) -> Vector6<f64> {
    let dp = target.position - current.position;
    let dr = renormalize(target.orientation * current.orientation.inverse()).scaled_axis();
    Vector6::new(dp.x, dp.y, dp.z, dr.x, dr.y, dr.z)
}

#[derive(Debug, Clone, Copy)]
pub struct PoseIkOptions {
    pub max_iterations: usize,
    pub tolerance: f64,
    pub damping: f64,
    /// Largest joint change per iteration.
    pub max_step: f64,
}

impl Default for PoseIkOptions {
    fn default() -> Self {
        PoseIkOptions {
            max_iterations: 1000,
            tolerance: 1e-13,
            damping: 1e-4,
            max_step: 0.1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Arm {
    Left,
    Right,
}

/// Two serial chains plus the object frames rigidly attached to each
/// end-effector. Index 1 (left) comes first in every stacked quantity.
#[derive(Debug, Clone, PartialEq)]
pub struct DualArmSystem {
    pub left: SerialChain,
    pub right: SerialChain,
    /// Pose of each object frame relative to its end-effector frame.
    pub object_offsets: [Pose; 2],
}

impl DualArmSystem {
    pub fn arm(&self, arm: Arm) -> &SerialChain {
        match arm {
            Arm::Left => &self.left,
            Arm::Right => &self.right,
        }
    }

    pub fn dof(&self) -> usize {
        self.left.dof() + self.right.dof()
    }

    pub fn split<'a>(&self, q: &'a [f64]) -> Result<(&'a [f64], &'a [f64])> {
        if q.len() != self.dof() {
            return Err(Error::DimensionMismatch {
                context: "dual-arm joint vector",
                expected: self.dof(),
                actual: q.len(),
            });
        }
        Ok(q.split_at(self.left.dof()))
    }

    pub fn join(&self, q1: &[f64], q2: &[f64]) -> DVector<f64> {
        DVector::from_iterator(q1.len() + q2.len(), q1.iter().chain(q2).copied())
    }

    pub fn end_effector_poses(&self, q: &[f64]) -> Result<[Pose; 2]> {
        let (q1, q2) = self.split(q)?;
        Ok([
            self.left.forward_kinematics(q1)?,
            self.right.forward_kinematics(q2)?,
        ])
    }

    pub fn object_poses(&self, q: &[f64]) -> Result<[Pose; 2]> {
        let ee = self.end_effector_poses(q)?;
        Ok([
            ee[0].compose(&self.object_offsets[0]),
            ee[1].compose(&self.object_offsets[1]),
        ])
    }

    /// Virtual sticks `r_i = p_{o_i} − p_i` in base coordinates.
    pub fn virtual_sticks(&self, q: &[f64]) -> Result<[Vec3; 2]> {
        let ee = self.end_effector_poses(q)?;
        Ok([
            ee[0].orientation * self.object_offsets[0].position,
            ee[1].orientation * self.object_offsets[1].position,
        ])
    }

    /// Block-diagonal `diag(J_1, J_2)`, 12 × (n_1 + n_2).
    pub fn block_jacobian(&self, q: &[f64]) -> Result<DMatrix<f64>> {
        let (q1, q2) = self.split(q)?;
        let (n1, n2) = (self.left.dof(), self.right.dof());
        let mut jac = DMatrix::zeros(12, n1 + n2);
        jac.view_mut((0, 0), (6, n1))
            .copy_from(&self.left.geometric_jacobian(q1)?);
        jac.view_mut((6, n1), (6, n2))
            .copy_from(&self.right.geometric_jacobian(q2)?);
        Ok(jac)
    }

    /// Block-diagonal `diag(W_1, W_2)` of the screw transforms along the
    /// current virtual sticks.
    pub fn stacked_screw(&self, q: &[f64]) -> Result<DMatrix<f64>> {
        let sticks = self.virtual_sticks(q)?;
        let mut w = DMatrix::zeros(12, 12);
        for (i, r) in sticks.iter().enumerate() {
            let block: Matrix6<f64> = screw_transform(r);
            w.view_mut((6 * i, 6 * i), (6, 6)).copy_from(&block);
        }
        Ok(w)
    }

    /// Joint configuration placing both object frames at `targets`,
    /// starting the search from `seed`.
    pub fn solve_object_poses(
        &self,
        targets: &[Pose; 2],
        seed: &[f64],
        opts: &PoseIkOptions,
    ) -> Result<DVector<f64>> {
        let (s1, s2) = self.split(seed)?;
        let ee1 = targets[0].compose(&self.object_offsets[0].inverse());
        let ee2 = targets[1].compose(&self.object_offsets[1].inverse());
        let q1 = self.left.solve_pose(&ee1, s1, opts)?;
        let q2 = self.right.solve_pose(&ee2, s2, opts)?;
        Ok(self.join(q1.as_slice(), q2.as_slice()))
    }
}

/// Unit quaternion from `[w, x, y, z]`, normalized.
pub fn quat_wxyz(wxyz: [f64; 4]) -> UnitQuat {
    UnitQuat::new_normalize(nalgebra::Quaternion::new(
        wxyz[0], wxyz[1], wxyz[2], wxyz[3],
    ))
}
