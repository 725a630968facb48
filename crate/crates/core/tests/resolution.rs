use dualcoop::config::twin_7dof;
use dualcoop::coop::{
    asymmetry_measure, cooperative_frames, induced_abs_from_rel, invert_ects, linking,
    pinv_asym_relative, pinv_relative, split_twists, CoopParam, FrameConvention, LinkingKind,
};
use dualcoop::geom::{angle_between, rot_of, AngleAxis, Pose, Twist6, Vec3};
use dualcoop::ik::{
    coop_jacobian, nullspace_projector, pinv, resolve_per_arm, resolve_stacked, solve_priority,
    JacobianKind, RankPolicy, SecondaryTask, SolveOptions,
};
use dualcoop::Error;
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

fn alpha() -> impl Strategy<Value = CoopParam> {
    (0.0..=1.0f64).prop_map(|a| CoopParam::new(a).unwrap())
}

fn dvec(n: usize) -> impl Strategy<Value = DVector<f64>> {
    prop::collection::vec(-1.0..1.0f64, n).prop_map(DVector::from_vec)
}

fn matrix(rows: usize, cols: usize) -> impl Strategy<Value = DMatrix<f64>> {
    prop::collection::vec(-1.0..1.0f64, rows * cols)
        .prop_map(move |v| DMatrix::from_vec(rows, cols, v))
}

/// Independent pseudo-inverse of a full-row-rank matrix: `Mᵀ(MMᵀ)⁻¹`.
fn right_inverse(m: &DMatrix<f64>) -> DMatrix<f64> {
    m.transpose() * (m * m.transpose()).try_inverse().unwrap()
}

proptest! {
    #[test]
    fn ects_round_trip(a in alpha(), v in dvec(12)) {
        let l = linking(LinkingKind::Ects, a).matrix;
        prop_assert!((invert_ects(a) * (&l * &v) - &v).amax() < 1e-13);
    }

    #[test]
    fn asymmetric_split_realizes_the_relative_twist(a in alpha(), v in dvec(6)) {
        let split = pinv_asym_relative(a) * &v;
        let l_r = linking(LinkingKind::Relative, a).matrix;
        prop_assert!((&l_r * &split - &v).amax() < 1e-14);
        let [v1, v2] = split_twists(split.as_slice());
        prop_assert!((asymmetry_measure(&v1, &v2) - a.value()).abs() < 1e-12);
    }

    #[test]
    fn asymmetric_split_induces_symmetric_absolute_motion(a in alpha(), v in dvec(6)) {
        let l_a = linking(LinkingKind::AbsSymmetric, a).matrix;
        let induced = &l_a * (pinv_asym_relative(a) * &v);
        prop_assert!((induced - &v * induced_abs_from_rel(a)).amax() < 1e-14);
    }

    #[test]
    fn asym_pinv_matches_closed_form_right_inverse(a in alpha()) {
        let l = linking(LinkingKind::AsymRelative, a).matrix;
        prop_assert!((pinv_asym_relative(a) - right_inverse(&l)).amax() < 1e-12);
        let l_r = linking(LinkingKind::Relative, a).matrix;
        prop_assert!((pinv_relative() - right_inverse(&l_r)).amax() < 1e-14);
    }

    #[test]
    fn svd_pinv_satisfies_penrose_conditions(m in matrix(6, 14)) {
        let p = pinv(&m, &SolveOptions::default()).unwrap();
        prop_assert!((&m * &p * &m - &m).amax() < 1e-10);
        prop_assert!((&p * &m * &p - &p).amax() < 1e-10);
        let mp = &m * &p;
        let pm = &p * &m;
        prop_assert!((&mp - mp.transpose()).amax() < 1e-10);
        prop_assert!((&pm - pm.transpose()).amax() < 1e-10);
    }

    #[test]
    fn projector_is_idempotent_symmetric_and_annihilated(m in matrix(6, 14)) {
        let n = nullspace_projector(&m, &SolveOptions::default()).unwrap();
        prop_assert!((&n * &n - &n).amax() < 1e-10);
        prop_assert!((&n - n.transpose()).amax() < 1e-10);
        prop_assert!((&m * &n).amax() < 1e-10);
        // Trace of an orthogonal projector is its rank: 14 − 6.
        prop_assert!((n.trace() - 8.0).abs() < 1e-9);
    }

    #[test]
    fn priority_solution_keeps_the_primary_task(m in matrix(6, 14), v in dvec(6), z in dvec(14)) {
        let q = solve_priority(&m, &v, &z, &SolveOptions::default()).unwrap();
        prop_assert!((&m * q - v).amax() < 1e-9);
    }

    #[test]
    fn cts_absolute_is_the_half_rotation(axis in prop::collection::vec(-1.0..1.0f64, 3), angle in 0.01..3.0f64, p1 in prop::collection::vec(-1.0..1.0f64, 3)) {
        let axis = Vec3::from_vec(axis);
        prop_assume!(axis.norm() > 1e-3);
        let k = axis.normalize();
        let base = nalgebra::UnitQuaternion::from_axis_angle(&nalgebra::Unit::new_normalize(Vec3::new(0.3, -0.2, 0.9)), 0.7);
        let pose1 = Pose::new(Vec3::from_vec(p1), base);
        let rel = dualcoop::geom::quat_of_rot(&rot_of(&AngleAxis::new(k, angle)));
        let pose2 = Pose::new(Vec3::new(0.1, 0.2, 0.3), base * rel);
        let frames = cooperative_frames(&pose1, &pose2, FrameConvention::Cts);
        let half = base * dualcoop::geom::quat_of_rot(&rot_of(&AngleAxis::new(k, angle / 2.0)));
        prop_assert!(angle_between(&frames.absolute.orientation, &half) < 1e-9);
        prop_assert!(((pose1.position + pose2.position) / 2.0 - frames.absolute.position).norm() < 1e-15);
    }
}

#[test]
fn damped_pinv_converges_quadratically() {
    let m = DMatrix::from_row_slice(2, 3, &[1.0, 0.5, -0.3, 0.2, -1.0, 0.7]);
    let exact = pinv(&m, &SolveOptions::default()).unwrap();
    let err = |lambda: f64| {
        let opts = SolveOptions {
            damping: lambda,
            ..Default::default()
        };
        (pinv(&m, &opts).unwrap() - &exact).amax()
    };
    let (e1, e2) = (err(1e-2), err(5e-3));
    assert!(e1 > 0.0 && e1 < 1e-3);
    // Halving λ quarters the error.
    assert!((e1 / e2 - 4.0).abs() < 0.05, "{e1} {e2}");
    // Damped form equals Mᵀ(MMᵀ + λ²I)⁻¹.
    let lambda = 0.1;
    let opts = SolveOptions {
        damping: lambda,
        ..Default::default()
    };
    let direct = m.transpose()
        * (&m * m.transpose() + DMatrix::identity(2, 2) * lambda * lambda)
            .try_inverse()
            .unwrap();
    assert!((pinv(&m, &opts).unwrap() - direct).amax() < 1e-14);
}

#[test]
fn rank_deficiency_is_reported_or_tolerated() {
    let m = DMatrix::from_row_slice(2, 3, &[1.0, 2.0, 3.0, 2.0, 4.0, 6.0]);
    match pinv(&m, &SolveOptions::default()) {
        Err(Error::RankDeficient {
            rank: 1, rows: 2, ..
        }) => {}
        other => panic!("unexpected {other:?}"),
    }
    let opts = SolveOptions {
        rank_policy: RankPolicy::DampedContinue,
        damping: 1e-3,
        ..Default::default()
    };
    let p = pinv(&m, &opts).unwrap();
    assert!(p.iter().all(|v| v.is_finite()));
}

#[test]
fn relative_jacobian_nullspace_dimension() {
    let cfg = twin_7dof();
    let q = cfg.seed.as_slice();
    let half = CoopParam::SYMMETRIC;
    let jr = coop_jacobian(&cfg.system, q, JacobianKind::Relative, half).unwrap();
    let n = nullspace_projector(&jr.matrix, &SolveOptions::default()).unwrap();
    assert!((n.trace() - (14.0 - 6.0)).abs() < 1e-9);
    // Each arm alone has a one-dimensional self-motion.
    let per_arm = coop_jacobian(&cfg.system, q, JacobianKind::PerArm, half).unwrap();
    let n = nullspace_projector(&per_arm.matrix, &SolveOptions::default()).unwrap();
    assert!((n.trace() - 2.0).abs() < 1e-9);
}

#[test]
fn cts_jacobian_pseudo_inverse_equals_per_arm_resolution() {
    // With a full-row-rank stacked Jacobian B and invertible L,
    // (LB)⁺ = B⁺L⁻¹.
    let cfg = twin_7dof();
    let q = cfg.seed.as_slice();
    let half = CoopParam::SYMMETRIC;
    let opts = SolveOptions::default();
    let v_r = Twist6::new(Vec3::new(0.05, -0.02, 0.01), Vec3::new(0.1, 0.0, -0.2));
    let jc = coop_jacobian(&cfg.system, q, JacobianKind::Cts, half).unwrap();
    let mut target = DVector::zeros(12);
    target
        .rows_mut(6, 6)
        .copy_from_slice(v_r.to_vector().as_slice());
    let direct = pinv(&jc.matrix, &opts).unwrap() * &target;
    let per_arm = resolve_per_arm(&cfg.system, q, &v_r, &opts).unwrap();
    assert!((direct - &per_arm).amax() < 1e-10);
    let stacked = resolve_stacked(
        &cfg.system,
        q,
        &(pinv_relative() * DVector::from_column_slice(v_r.to_vector().as_slice())),
        &opts,
    )
    .unwrap();
    assert_eq!(per_arm, stacked);
}

#[test]
fn asymmetric_secondary_keeps_relative_task_exact() {
    let cfg = twin_7dof();
    let q = cfg.seed.as_slice();
    let opts = SolveOptions::default();
    let v_r = Twist6::new(Vec3::new(0.05, -0.02, 0.01), Vec3::new(0.1, 0.0, -0.2));
    let v = DVector::from_column_slice(v_r.to_vector().as_slice());
    for a in [0.0, 0.3, 0.8, 1.0] {
        let alpha = CoopParam::new(a).unwrap();
        let zeta = SecondaryTask::AsymRelative { v_r, alpha }
            .zeta(&cfg.system, q, &opts)
            .unwrap();
        let jr = coop_jacobian(&cfg.system, q, JacobianKind::Relative, alpha).unwrap();
        let qd = solve_priority(&jr.matrix, &v, &zeta, &opts).unwrap();
        assert!((&jr.matrix * qd - &v).amax() < 1e-9);
    }
    // At α = ½ the secondary term is the minimum-norm solution itself.
    let half = CoopParam::SYMMETRIC;
    let zeta = SecondaryTask::AsymRelative { v_r, alpha: half }
        .zeta(&cfg.system, q, &opts)
        .unwrap();
    let jr = coop_jacobian(&cfg.system, q, JacobianKind::Relative, half).unwrap();
    assert!((zeta - pinv(&jr.matrix, &opts).unwrap() * v).amax() < 1e-12);
}

#[test]
fn end_effector_secondary_tracks_its_twist() {
    let cfg = twin_7dof();
    let q = cfg.seed.as_slice();
    let opts = SolveOptions::default();
    let v1 = Twist6::new(Vec3::new(0.01, 0.02, -0.01), Vec3::new(0.0, 0.05, 0.0));
    let zeta = SecondaryTask::EndEffector1(v1)
        .zeta(&cfg.system, q, &opts)
        .unwrap();
    let (q1, _) = cfg.system.split(q).unwrap();
    let j1 = cfg.system.left.geometric_jacobian(q1).unwrap();
    let realized = j1 * zeta.rows(0, 7);
    assert!((realized - DVector::from_column_slice(v1.to_vector().as_slice())).amax() < 1e-12);
    assert!(zeta.rows(7, 7).iter().all(|v| *v == 0.0));
    assert_eq!(
        SecondaryTask::EndEffector1(Twist6::zero())
            .zeta(&cfg.system, q, &opts)
            .unwrap(),
        DVector::zeros(14)
    );
}
