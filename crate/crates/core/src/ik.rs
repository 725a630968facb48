//! Differential inverse kinematics for the dual-arm chain.
//!
//! Joint-space cooperative Jacobians are `L · W · J`: a linking matrix, the
//! stacked screw transforms to the object frames, and the block-diagonal
//! arm Jacobian. Solvers use SVD pseudo-inverses with a single level of
//! nullspace priority.

use nalgebra::{DMatrix, DVector, Matrix6, Vector6};

use crate::chain::DualArmSystem;
use crate::coop::{linking, pinv_relative, CoopParam, LinkingKind};
use crate::error::{Error, Result};
use crate::geom::{quat_error, Pose, Twist6};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JacobianKind {
    /// 12×2n, `L_cts W J`.
    Cts,
    /// 12×2n, `L_E(α) W J`.
    Ects,
    /// 6×2n, `L_r W J`.
    Relative,
    /// 6×2n, `𝓛_r(α) W J`.
    AsymRelative,
    /// 12×2n, `W J`: stacked object-frame twists.
    PerArm,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoopJacobian {
    pub kind: JacobianKind,
    pub alpha: CoopParam,
    pub matrix: DMatrix<f64>,
}

pub fn coop_jacobian(
    sys: &DualArmSystem,
    q: &[f64],
    kind: JacobianKind,
    alpha: CoopParam,
) -> Result<CoopJacobian> {
    let wj = sys.stacked_screw(q)? * sys.block_jacobian(q)?;
    let link = |k| linking(k, alpha).matrix;
    let matrix = match kind {
        JacobianKind::Cts => link(LinkingKind::Cts) * wj,
        JacobianKind::Ects => link(LinkingKind::Ects) * wj,
        JacobianKind::Relative => link(LinkingKind::Relative) * wj,
        JacobianKind::AsymRelative => link(LinkingKind::AsymRelative) * wj,
        JacobianKind::PerArm => wj,
    };
    Ok(CoopJacobian {
        kind,
        alpha,
        matrix,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RankPolicy {
    #[default]
    ErrorOnDeficient,
    DampedContinue,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    /// Singular values below `svd_tolerance · σ_max` are treated as zero.
    pub svd_tolerance: f64,
    /// Damping λ; zero gives the exact pseudo-inverse.
    pub damping: f64,
    pub rank_policy: RankPolicy,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            svd_tolerance: 1e-10,
            damping: 0.0,
            rank_policy: RankPolicy::ErrorOnDeficient,
        }
    }
}

impl SolveOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.svd_tolerance > 0.0 && self.svd_tolerance < 1.0) {
            return Err(Error::InvalidOptions(format!(
                "svd_tolerance must lie in (0, 1), got {}",
                self.svd_tolerance
            )));
        }
        if !self.damping.is_finite() || self.damping < 0.0 {
            return Err(Error::InvalidOptions(format!(
                "damping must be finite and non-negative, got {}",
                self.damping
            )));
        }
        Ok(())
    }
}

/// SVD pseudo-inverse.
///
/// With `damping = λ > 0` the retained singular values are inverted as
/// `σ / (σ² + λ²)`, which equals `Mᵀ(MMᵀ + λ²I)⁻¹` when nothing is truncated.
pub fn pinv(m: &DMatrix<f64>, opts: &SolveOptions) -> Result<DMatrix<f64>> {
    opts.validate()?;
    let (rows, cols) = m.shape();
    if rows == 0 || cols == 0 {
        return Ok(DMatrix::zeros(cols, rows));
    }
    let svd = m.clone().svd(true, true);
    let u = svd.u.as_ref().expect("U requested");
    let v_t = svd.v_t.as_ref().expect("Vᵀ requested");
    let sigma = &svd.singular_values;
    let sigma_max = sigma.max();
    let cutoff = opts.svd_tolerance * sigma_max;
    let retained: Vec<usize> = (0..sigma.len()).filter(|&i| sigma[i] > cutoff).collect();
    let rank = retained.len();
    let full = rows.min(cols);
    if rank < full && opts.rank_policy == RankPolicy::ErrorOnDeficient {
        let smallest_retained = retained
            .iter()
            .map(|&i| sigma[i])
            .fold(f64::INFINITY, f64::min);
        return Err(Error::RankDeficient {
            rank,
            rows,
            smallest_retained: if rank == 0 { 0.0 } else { smallest_retained },
        });
    }
    let lambda2 = opts.damping * opts.damping;
    let mut out = DMatrix::zeros(cols, rows);
    for &i in &retained {
        let s = sigma[i];
        let inv = if lambda2 > 0.0 {
            s / (s * s + lambda2)
        } else {
            1.0 / s
        };
        out += v_t.row(i).transpose() * u.column(i).transpose() * inv;
    }
    Ok(out)
}

/// `q̇ = J⁺v + (I − J⁺J)ζ`.
pub fn solve_priority(
    jac: &DMatrix<f64>,
    v: &DVector<f64>,
    zeta: &DVector<f64>,
    opts: &SolveOptions,
) -> Result<DVector<f64>> {
    let (rows, cols) = jac.shape();
    if v.len() != rows {
        return Err(Error::DimensionMismatch {
            context: "primary task velocity",
            expected: rows,
            actual: v.len(),
        });
    }
    if zeta.len() != cols {
        return Err(Error::DimensionMismatch {
            context: "secondary joint velocity",
            expected: cols,
            actual: zeta.len(),
        });
    }
    let jp = pinv(jac, opts)?;
    let particular = &jp * v;
    let homogeneous = zeta - &jp * (jac * zeta);
    Ok(particular + homogeneous)
}

/// Nullspace projector `I − J⁺J`.
pub fn nullspace_projector(jac: &DMatrix<f64>, opts: &SolveOptions) -> Result<DMatrix<f64>> {
    let jp = pinv(jac, opts)?;
    Ok(DMatrix::identity(jac.ncols(), jac.ncols()) - jp * jac)
}

/// Secondary task for the joint-space nullspace term.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum SecondaryTask {
    #[default]
    None,
    /// Desired twist of end-effector 1, resolved through `[J_1 0]⁺`.
    EndEffector1(Twist6),
    /// Relative twist resolved through the asymmetric relative Jacobian.
    AsymRelative {
        v_r: Twist6,
        alpha: CoopParam,
    },
    RawJointVelocity(DVector<f64>),
}

impl SecondaryTask {
    pub fn zeta(
        &self,
        sys: &DualArmSystem,
        q: &[f64],
        opts: &SolveOptions,
    ) -> Result<DVector<f64>> {
        match self {
            SecondaryTask::None => Ok(DVector::zeros(sys.dof())),
            SecondaryTask::EndEffector1(v1) => secondary_end_effector_1(sys, q, v1, opts),
            SecondaryTask::AsymRelative { v_r, alpha } => {
                secondary_asym_relative(sys, q, v_r, *alpha, opts)
            }
            SecondaryTask::RawJointVelocity(z) => {
                if z.len() != sys.dof() {
                    return Err(Error::DimensionMismatch {
                        context: "raw secondary joint velocity",
                        expected: sys.dof(),
                        actual: z.len(),
                    });
                }
                Ok(z.clone())
            }
        }
    }
}

/// `ζ = [J_1 0]⁺ v_1`; right-arm entries are zero.
pub fn secondary_end_effector_1(
    sys: &DualArmSystem,
    q: &[f64],
    v1: &Twist6,
    opts: &SolveOptions,
) -> Result<DVector<f64>> {
    let (q1, _) = sys.split(q)?;
    let j1 = sys.left.geometric_jacobian(q1)?;
    let dq1 = pinv(&j1, opts)? * DVector::from_column_slice(v1.to_vector().as_slice());
    let mut zeta = DVector::zeros(sys.dof());
    zeta.rows_mut(0, sys.left.dof()).copy_from(&dq1);
    Ok(zeta)
}

/// `ζ = J_r(α)⁺ v_r`.
pub fn secondary_asym_relative(
    sys: &DualArmSystem,
    q: &[f64],
    v_r: &Twist6,
    alpha: CoopParam,
    opts: &SolveOptions,
) -> Result<DVector<f64>> {
    let jac = coop_jacobian(sys, q, JacobianKind::AsymRelative, alpha)?;
    Ok(pinv(&jac.matrix, opts)? * twist_dvec(v_r))
}

/// Symmetric positive-definite 6×6 gain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GainMatrix(Matrix6<f64>);

impl GainMatrix {
    pub fn new(m: Matrix6<f64>) -> Result<Self> {
        let asym = (m - m.transpose()).abs().max();
        if !m.iter().all(|v| v.is_finite()) || asym > 1e-12 * m.abs().max().max(1.0) {
            return Err(Error::GainNotPositiveDefinite);
        }
        if m.cholesky().is_none() {
            return Err(Error::GainNotPositiveDefinite);
        }
        Ok(GainMatrix(m))
    }

    pub fn identity() -> Self {
        GainMatrix(Matrix6::identity())
    }

    pub fn scalar(k: f64) -> Result<Self> {
        GainMatrix::new(Matrix6::identity() * k)
    }

    pub fn matrix(&self) -> &Matrix6<f64> {
        &self.0
    }
}

impl Default for GainMatrix {
    fn default() -> Self {
        GainMatrix::identity()
    }
}

/// Relative alignment error `[p̃; ξ̃]`: `p̃ = p_{o_2} − p_{o_1}` and `ξ̃` the
/// vector part of the shortest error quaternion, in frame `o_1`.
pub fn alignment_error(
    pose_o1: &Pose,
    pose_o2: &Pose,
) -> (nalgebra::Vector3<f64>, nalgebra::Vector3<f64>) {
    let p_err = pose_o2.position - pose_o1.position;
    let xi = quat_error(&pose_o1.orientation, &pose_o2.orientation).imag();
    (p_err, xi)
}

/// Alignment feedback `v_r = −K_p [p̃; R_{o_1} ξ̃]`, base coordinates.
pub fn relative_task_twist(pose_o1: &Pose, pose_o2: &Pose, kp: &GainMatrix) -> Twist6 {
    let (p_err, xi) = alignment_error(pose_o1, pose_o2);
    let xi_base = pose_o1.orientation * xi;
    let e = Vector6::new(p_err.x, p_err.y, p_err.z, xi_base.x, xi_base.y, xi_base.z);
    Twist6::from_vector(&(-(kp.matrix() * e)))
}

pub(crate) fn twist_dvec(v: &Twist6) -> DVector<f64> {
    DVector::from_column_slice(v.to_vector().as_slice())
}

/// Resolves a stacked object-frame twist `[v_{o_1}; v_{o_2}]` arm by arm:
/// `q̇_i = (W_i J_i)⁺ v_{o_i}`.
pub fn resolve_stacked(
    sys: &DualArmSystem,
    q: &[f64],
    v_stacked: &DVector<f64>,
    opts: &SolveOptions,
) -> Result<DVector<f64>> {
    if v_stacked.len() != 12 {
        return Err(Error::DimensionMismatch {
            context: "stacked twist",
            expected: 12,
            actual: v_stacked.len(),
        });
    }
    let wj = sys.stacked_screw(q)? * sys.block_jacobian(q)?;
    let (n1, n2) = (sys.left.dof(), sys.right.dof());
    let dq1 = pinv(&wj.view((0, 0), (6, n1)).clone_owned(), opts)? * v_stacked.rows(0, 6);
    let dq2 = pinv(&wj.view((6, n1), (6, n2)).clone_owned(), opts)? * v_stacked.rows(6, 6);
    Ok(sys.join(dq1.as_slice(), dq2.as_slice()))
}

/// Per-arm resolution of the symmetric relative split, in object frames:
/// `q̇ = (W J)⁺ L_r⁺ v_r`.
pub fn resolve_per_arm(
    sys: &DualArmSystem,
    q: &[f64],
    v_r: &Twist6,
    opts: &SolveOptions,
) -> Result<DVector<f64>> {
    resolve_stacked(sys, q, &(pinv_relative() * twist_dvec(v_r)), opts)
}

/// Per-arm resolution at the end-effector frames, without the screw
/// transforms: `q̇ = J⁺ L_r⁺ v_r`. Matches [`resolve_per_arm`] only when
/// the object frames coincide with the end-effectors.
pub fn resolve_per_arm_end_effector(
    sys: &DualArmSystem,
    q: &[f64],
    v_r: &Twist6,
    opts: &SolveOptions,
) -> Result<DVector<f64>> {
    let (q1, q2) = sys.split(q)?;
    let v = pinv_relative() * twist_dvec(v_r);
    let dq1 = pinv(&sys.left.geometric_jacobian(q1)?, opts)? * v.rows(0, 6);
    let dq2 = pinv(&sys.right.geometric_jacobian(q2)?, opts)? * v.rows(6, 6);
    Ok(sys.join(dq1.as_slice(), dq2.as_slice()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::twin_7dof;
    use crate::geom::{UnitQuat, Vec3};
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

    #[test]
    fn pinv_identity() {
        let id = DMatrix::<f64>::identity(6, 6);
        assert!(
            (pinv(&id, &SolveOptions::default()).unwrap() - &id)
                .abs()
                .max()
                < 1e-15
        );
    }

    #[test]
    fn pinv_of_relative_link() {
        let lr = linking(LinkingKind::Relative, CoopParam::SYMMETRIC).matrix;
        let p = pinv(&lr, &SolveOptions::default()).unwrap();
        assert!((p - pinv_relative()).abs().max() < 1e-15);
    }

    #[test]
    fn rank_deficiency_reported() {
        let mut m = DMatrix::from_fn(3, 5, |i, j| (i + 2 * j) as f64);
        let r0 = m.row(0).clone_owned();
        m.row_mut(2).copy_from(&(r0 * 2.0));
        match pinv(&m, &SolveOptions::default()) {
            Err(Error::RankDeficient {
                rank,
                rows,
                smallest_retained,
            }) => {
                assert_eq!((rank, rows), (2, 3));
                assert!(smallest_retained > 0.0);
            }
            other => panic!("expected rank deficiency, got {other:?}"),
        }
        let opts = SolveOptions {
            rank_policy: RankPolicy::DampedContinue,
            ..Default::default()
        };
        assert!(pinv(&m, &opts).is_ok());
    }

    #[test]
    fn bad_options_rejected() {
        let m = DMatrix::<f64>::identity(2, 2);
        let opts = SolveOptions {
            svd_tolerance: 0.0,
            ..Default::default()
        };
        assert!(matches!(pinv(&m, &opts), Err(Error::InvalidOptions(_))));
        let opts = SolveOptions {
            damping: -1.0,
            ..Default::default()
        };
        assert!(matches!(pinv(&m, &opts), Err(Error::InvalidOptions(_))));
    }

    #[test]
    fn gain_validation() {
        assert!(GainMatrix::new(Matrix6::identity()).is_ok());
        assert!(GainMatrix::new(-Matrix6::identity()).is_err());
        let mut m = Matrix6::identity();
        m[(0, 1)] = 0.5;
        assert!(GainMatrix::new(m).is_err());
    }

    #[test]
    fn alignment_twist_cases() {
        let kp = GainMatrix::identity();
        let p = Pose::new(Vec3::new(0.1, 0.2, 0.3), UnitQuat::identity());
        assert_eq!(relative_task_twist(&p, &p, &kp), Twist6::zero());

        let d = Vec3::new(0.05, -0.02, 0.1);
        let p2 = Pose::new(p.position + d, p.orientation);
        let v = relative_task_twist(&p, &p2, &kp);
        assert!((v.linear + d).norm() < 1e-15);
        assert_eq!(v.angular, Vec3::zeros());

        let p3 = Pose::new(
            p.position,
            UnitQuat::from_axis_angle(&Vec3::z_axis(), FRAC_PI_2),
        );
        let v = relative_task_twist(&p, &p3, &kp);
        assert!((v.angular - Vec3::new(0.0, 0.0, -FRAC_PI_4.sin())).norm() < 1e-15);
    }

    #[test]
    fn per_arm_zero_twist() {
        let cfg = twin_7dof();
        let q = cfg.seed.as_slice();
        let dq =
            resolve_per_arm(&cfg.system, q, &Twist6::zero(), &SolveOptions::default()).unwrap();
        assert_eq!(dq, DVector::zeros(14));
        let z = secondary_end_effector_1(&cfg.system, q, &Twist6::zero(), &SolveOptions::default())
            .unwrap();
        assert_eq!(z, DVector::zeros(14));
    }

    #[test]
    fn dimension_errors() {
        let j = DMatrix::<f64>::identity(6, 14);
        let opts = SolveOptions::default();
        assert!(solve_priority(&j, &DVector::zeros(5), &DVector::zeros(14), &opts).is_err());
        assert!(solve_priority(&j, &DVector::zeros(6), &DVector::zeros(13), &opts).is_err());
    }
}
