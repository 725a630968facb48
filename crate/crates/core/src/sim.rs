//! Fixed-step kinematic simulation of the alignment tasks and of the 1-D
//! two-point system, with metrics and CSV output.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use nalgebra::{DVector, Matrix2, Vector2};

use crate::chain::{DualArmSystem, PoseIkOptions};
use crate::coop::{
    asymmetry_angular, asymmetry_linear, asymmetry_measure, cooperative_frames, invert_cts,
    invert_ects, split_twists, CoopParam, FrameConvention,
};
use crate::error::{Error, Result};
use crate::geom::{angle_between, rot_of, AngleAxis, Pose, Twist6, UnitQuat, Vec3};
use crate::ik::{
    alignment_error, coop_jacobian, pinv, relative_task_twist, resolve_per_arm, resolve_stacked,
    solve_priority, twist_dvec, GainMatrix, JacobianKind, SecondaryTask, SolveOptions,
};

/// Initial object-frame positions of the alignment tasks.
pub const OBJECT_1_POSITION: [f64; 3] = [0.36, 0.15, 0.36];
pub const OBJECT_2_POSITION: [f64; 3] = [0.45, 0.0, 0.21];

/// Default relative rotation of the rotational task, radians.
pub const DEFAULT_ROTATION_ANGLE: f64 = std::f64::consts::PI / 12.0;

pub const DEFAULT_DT: f64 = 0.005;
pub const DEFAULT_DURATION: f64 = 10.0;
pub const DEFAULT_STOP_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    /// Symmetric CTS split with zero absolute motion, per-arm IK.
    Cts,
    /// ECTS split with zero absolute motion, per-arm IK.
    Ects,
    /// Relative Jacobian, minimum norm plus the configured secondary task.
    Relative,
    /// Relative Jacobian with the asymmetric relative solution projected
    /// into its nullspace.
    AsymRelative,
    /// Asymmetric relative Jacobian as the only task (no projection).
    AsymPrimaryOnly,
    /// Symmetric split of the relative twist, per-arm IK.
    PerArm,
}

impl Method {
    pub const ALL: [Method; 6] = [
        Method::Cts,
        Method::Ects,
        Method::Relative,
        Method::AsymRelative,
        Method::AsymPrimaryOnly,
        Method::PerArm,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Cts => "cts",
            Method::Ects => "ects",
            Method::Relative => "relative",
            Method::AsymRelative => "asym_relative",
            Method::AsymPrimaryOnly => "asym_primary",
            Method::PerArm => "per_arm",
        }
    }

    pub fn uses_alpha(self) -> bool {
        matches!(
            self,
            Method::Ects | Method::AsymRelative | Method::AsymPrimaryOnly
        )
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Method::ALL
            .iter()
            .copied()
            .find(|m| m.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = Method::ALL.iter().map(|m| m.name()).collect();
                format!(
                    "unknown method `{s}` (expected one of {})",
                    names.join(", ")
                )
            })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Task {
    /// Frames offset in position only, identical orientations.
    Translational,
    /// Coincident positions, relative rotation of `angle` about `axis`.
    Rotational { axis: Vec3, angle: f64 },
    /// Arbitrary initial object poses.
    Custom([Pose; 2]),
}

impl Task {
    pub fn rotational_default() -> Self {
        Task::Rotational {
            axis: Vec3::z(),
            angle: DEFAULT_ROTATION_ANGLE,
        }
    }

    /// Initial object-frame poses.
    pub fn targets(&self) -> [Pose; 2] {
        let p1 = Vec3::from(OBJECT_1_POSITION);
        let p2 = Vec3::from(OBJECT_2_POSITION);
        match self {
            Task::Translational => [Pose::from_translation(p1), Pose::from_translation(p2)],
            Task::Rotational { axis, angle } => {
                let mid = (p1 + p2) * 0.5;
                let r = rot_of(&AngleAxis::new(*axis, *angle));
                [
                    Pose::from_translation(mid),
                    Pose::new(mid, crate::geom::quat_of_rot(&r)),
                ]
            }
            Task::Custom(poses) => *poses,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Task::Translational => "trans",
            Task::Rotational { .. } => "rot",
            Task::Custom(_) => "custom",
        }
    }
}

#[derive(Debug, Clone)]
pub struct SimConfig {
    pub dt: f64,
    pub duration: f64,
    pub method: Method,
    pub alpha: CoopParam,
    pub kp: GainMatrix,
    pub task: Task,
    /// Nullspace task for [`Method::Relative`]; ignored by other methods.
    pub secondary: SecondaryTask,
    /// Start of the pose IK that realizes the task's initial object poses.
    pub seed_joints: DVector<f64>,
    pub solve: SolveOptions,
    pub stop_tolerance: f64,
}

impl SimConfig {
    pub fn new(method: Method, alpha: CoopParam, task: Task, seed_joints: DVector<f64>) -> Self {
        SimConfig {
            dt: DEFAULT_DT,
            duration: DEFAULT_DURATION,
            method,
            alpha,
            kp: GainMatrix::identity(),
            task,
            secondary: SecondaryTask::None,
            seed_joints,
            solve: SolveOptions::default(),
            stop_tolerance: DEFAULT_STOP_TOLERANCE,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidSimConfig(format!(
                "dt must be positive, got {}",
                self.dt
            )));
        }
        if !(self.duration >= 0.0 && self.duration.is_finite()) {
            return Err(Error::InvalidSimConfig(format!(
                "duration must be non-negative, got {}",
                self.duration
            )));
        }
        self.solve.validate()
    }

    pub fn step_count(&self) -> usize {
        step_count(self.duration, self.dt)
    }
}

/// `⌊duration / dt⌋`, tolerant to representation error in the quotient.
pub fn step_count(duration: f64, dt: f64) -> usize {
    (duration / dt + 1e-9).floor() as usize
}

/// Joint velocity for one step of the chosen method.
pub fn solve_step(
    sys: &DualArmSystem,
    q: &[f64],
    v_r: &Twist6,
    method: Method,
    alpha: CoopParam,
    secondary: &SecondaryTask,
    opts: &SolveOptions,
) -> Result<DVector<f64>> {
    let zero_abs_with = |inverse: nalgebra::DMatrix<f64>| {
        let mut cts = DVector::zeros(12);
        cts.rows_mut(6, 6).copy_from(&twist_dvec(v_r));
        inverse * cts
    };
    match method {
        Method::Cts => resolve_stacked(sys, q, &zero_abs_with(invert_cts()), opts),
        Method::Ects => resolve_stacked(sys, q, &zero_abs_with(invert_ects(alpha)), opts),
        Method::PerArm => resolve_per_arm(sys, q, v_r, opts),
        Method::Relative => {
            let jr = coop_jacobian(sys, q, JacobianKind::Relative, alpha)?;
            let zeta = secondary.zeta(sys, q, opts)?;
            solve_priority(&jr.matrix, &twist_dvec(v_r), &zeta, opts)
        }
        Method::AsymRelative => {
            let jr = coop_jacobian(sys, q, JacobianKind::Relative, alpha)?;
            let zeta = SecondaryTask::AsymRelative { v_r: *v_r, alpha }.zeta(sys, q, opts)?;
            solve_priority(&jr.matrix, &twist_dvec(v_r), &zeta, opts)
        }
        Method::AsymPrimaryOnly => {
            let ja = coop_jacobian(sys, q, JacobianKind::AsymRelative, alpha)?;
            Ok(pinv(&ja.matrix, opts)? * twist_dvec(v_r))
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub step: usize,
    pub time: f64,
    pub q: DVector<f64>,
    pub qdot: DVector<f64>,
    pub pose_o1: Pose,
    pub pose_o2: Pose,
    /// `p_{o_2} − p_{o_1}`.
    pub position_error: Vec3,
    /// Vector part of the error quaternion, frame `o_1`.
    pub rotation_error: Vec3,
    /// CTS absolute frame of the two object frames.
    pub absolute: Pose,
    /// Object-frame twists `W_i J_i q̇_i`.
    pub twists: [Twist6; 2],
    pub asymmetry: f64,
    pub asymmetry_linear: f64,
    pub asymmetry_angular: f64,
    /// `∫‖q̇‖dt` up to this record's time.
    pub joint_path: f64,
    /// Commanded relative twist.
    pub v_r: Twist6,
    /// `‖J_r q̇ − v_r‖∞`.
    pub relative_residual: f64,
}

impl StepRecord {
    pub fn error_norm(&self) -> f64 {
        (self.position_error.norm_squared() + self.rotation_error.norm_squared()).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    Converged { step: usize },
    Timeout,
}

#[derive(Debug, Clone)]
pub struct SimLog {
    pub method: Method,
    pub alpha: CoopParam,
    pub task: &'static str,
    pub dofs: (usize, usize),
    pub records: Vec<StepRecord>,
    pub termination: Termination,
}

/// Joint configuration realizing the task's initial object poses.
pub fn initial_joints(sys: &DualArmSystem, cfg: &SimConfig) -> Result<DVector<f64>> {
    sys.solve_object_poses(
        &cfg.task.targets(),
        cfg.seed_joints.as_slice(),
        &PoseIkOptions::default(),
    )
}

/// Runs the alignment task from [`initial_joints`].
pub fn run_alignment(sys: &DualArmSystem, cfg: &SimConfig) -> Result<SimLog> {
    cfg.validate()?;
    let q0 = initial_joints(sys, cfg)?;
    run_alignment_from(sys, cfg, q0)
}

/// Runs the alignment task from an explicit initial configuration.
pub fn run_alignment_from(
    sys: &DualArmSystem,
    cfg: &SimConfig,
    q0: DVector<f64>,
) -> Result<SimLog> {
    cfg.validate()?;
    sys.split(q0.as_slice())?;
    let n_steps = cfg.step_count();
    let mut q = q0;
    let mut joint_path = 0.0;
    let mut records = Vec::with_capacity(n_steps + 1);
    let mut termination = Termination::Timeout;
    let mut limit_warned = false;

    for step in 0..=n_steps {
        let time = step as f64 * cfg.dt;
        let [pose_o1, pose_o2] = sys.object_poses(q.as_slice())?;
        let (position_error, rotation_error) = alignment_error(&pose_o1, &pose_o2);
        let v_r = relative_task_twist(&pose_o1, &pose_o2, &cfg.kp);
        let qdot = solve_step(
            sys,
            q.as_slice(),
            &v_r,
            cfg.method,
            cfg.alpha,
            &cfg.secondary,
            &cfg.solve,
        )
        .map_err(|e| match e {
            Error::RankDeficient { .. } => {
                log::error!("rank deficiency at step {step}: {e}");
                Error::NumericalAbort {
                    step,
                    source: Box::new(e),
                }
            }
            other => other,
        })?;

        let wj = sys.stacked_screw(q.as_slice())? * sys.block_jacobian(q.as_slice())?;
        let v_obj = &wj * &qdot;
        let twists = split_twists(v_obj.as_slice());
        let realized_rel = v_obj.rows(6, 6) - v_obj.rows(0, 6);
        let relative_residual = (realized_rel - twist_dvec(&v_r)).amax();
        let absolute = cooperative_frames(&pose_o1, &pose_o2, FrameConvention::Cts).absolute;

        if !limit_warned {
            let (q1, q2) = sys.split(q.as_slice())?;
            if !sys.left.limit_violations(q1).is_empty()
                || !sys.right.limit_violations(q2).is_empty()
            {
                log::warn!("joint limits exceeded at step {step} (advisory)");
                limit_warned = true;
            }
        }

        let record = StepRecord {
            step,
            time,
            q: q.clone(),
            qdot: qdot.clone(),
            pose_o1,
            pose_o2,
            position_error,
            rotation_error,
            absolute,
            asymmetry: asymmetry_measure(&twists[0], &twists[1]),
            asymmetry_linear: asymmetry_linear(&twists[0], &twists[1]),
            asymmetry_angular: asymmetry_angular(&twists[0], &twists[1]),
            twists,
            joint_path,
            v_r,
            relative_residual,
        };
        let converged = record.error_norm() < cfg.stop_tolerance;
        records.push(record);
        if converged {
            termination = Termination::Converged { step };
            break;
        }
        joint_path += qdot.norm() * cfg.dt;
        q += qdot * cfg.dt;
    }
    match termination {
        Termination::Converged { step } => log::info!("converged at step {step}"),
        Termination::Timeout => log::info!("stopped at duration {}", cfg.duration),
    }

    Ok(SimLog {
        method: cfg.method,
        alpha: cfg.alpha,
        task: cfg.task.label(),
        dofs: (sys.left.dof(), sys.right.dof()),
        records,
        termination,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub label: String,
    pub method: Method,
    pub alpha: f64,
    pub steps: usize,
    pub converged: bool,
    pub final_position_error: f64,
    pub final_rotation_error: f64,
    pub joint_path: f64,
    pub mean_asymmetry: f64,
    pub mean_asymmetry_linear: f64,
    pub mean_asymmetry_angular: f64,
    /// Position change of the CTS absolute frame, first to last record.
    pub absolute_displacement: f64,
    /// Rotation angle of the CTS absolute frame, first to last record.
    pub absolute_rotation: f64,
}

impl SimLog {
    pub fn last(&self) -> &StepRecord {
        self.records
            .last()
            .expect("a log always holds the initial record")
    }

    pub fn label(&self) -> String {
        if self.method.uses_alpha() {
            format!("{}@{}", self.method, self.alpha.value())
        } else {
            self.method.to_string()
        }
    }

    pub fn summary(&self) -> RunSummary {
        let first = &self.records[0];
        let last = self.last();
        let n = self.records.len() as f64;
        let mean = |f: fn(&StepRecord) -> f64| self.records.iter().map(f).sum::<f64>() / n;
        RunSummary {
            label: self.label(),
            method: self.method,
            alpha: self.alpha.value(),
            steps: self.records.len(),
            converged: matches!(self.termination, Termination::Converged { .. }),
            final_position_error: last.position_error.norm(),
            final_rotation_error: last.rotation_error.norm(),
            joint_path: last.joint_path,
            mean_asymmetry: mean(|r| r.asymmetry),
            mean_asymmetry_linear: mean(|r| r.asymmetry_linear),
            mean_asymmetry_angular: mean(|r| r.asymmetry_angular),
            absolute_displacement: (last.absolute.position - first.absolute.position).norm(),
            absolute_rotation: angle_between(
                &first.absolute.orientation,
                &last.absolute.orientation,
            ),
        }
    }

    /// Largest rotation-error norm over the run.
    pub fn max_rotation_error(&self) -> f64 {
        self.records
            .iter()
            .map(|r| r.rotation_error.norm())
            .fold(0.0, f64::max)
    }

    /// Largest position-error norm over the run.
    pub fn max_position_error(&self) -> f64 {
        self.records
            .iter()
            .map(|r| r.position_error.norm())
            .fold(0.0, f64::max)
    }

    pub fn max_relative_residual(&self) -> f64 {
        self.records
            .iter()
            .map(|r| r.relative_residual)
            .fold(0.0, f64::max)
    }
}

/// Runs every `(method, α)` pair on the same task, one thread per run.
/// Results keep the order of `methods`.
pub fn compare_methods(
    sys: &DualArmSystem,
    cfg: &SimConfig,
    methods: &[(Method, CoopParam)],
) -> Result<Vec<SimLog>> {
    cfg.validate()?;
    let q0 = initial_joints(sys, cfg)?;
    std::thread::scope(|scope| {
        let handles: Vec<_> = methods
            .iter()
            .map(|&(method, alpha)| {
                let run_cfg = SimConfig {
                    method,
                    alpha,
                    ..cfg.clone()
                };
                let q0 = q0.clone();
                scope.spawn(move || run_alignment_from(sys, &run_cfg, q0))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("simulation thread panicked"))
            .collect()
    })
}

const SUMMARY_COLUMNS: [&str; 13] = [
    "label",
    "method",
    "alpha",
    "steps",
    "converged",
    "final_position_error",
    "final_rotation_error",
    "joint_path",
    "mean_asymmetry",
    "mean_asymmetry_linear",
    "mean_asymmetry_angular",
    "absolute_displacement",
    "absolute_rotation",
];

fn summary_fields(s: &RunSummary) -> [String; 13] {
    [
        s.label.clone(),
        s.method.to_string(),
        if s.method.uses_alpha() {
            fmt_float(s.alpha)
        } else {
            String::new()
        },
        s.steps.to_string(),
        s.converged.to_string(),
        fmt_float(s.final_position_error),
        fmt_float(s.final_rotation_error),
        fmt_float(s.joint_path),
        fmt_float(s.mean_asymmetry),
        fmt_float(s.mean_asymmetry_linear),
        fmt_float(s.mean_asymmetry_angular),
        fmt_float(s.absolute_displacement),
        fmt_float(s.absolute_rotation),
    ]
}

pub fn summary_csv(rows: &[RunSummary]) -> String {
    let mut out = SUMMARY_COLUMNS.join(",");
    out.push('\n');
    for r in rows {
        out.push_str(&summary_fields(r).join(","));
        out.push('\n');
    }
    out
}

/// Aligned plain-text table.
pub fn summary_table(rows: &[RunSummary]) -> String {
    let cells: Vec<Vec<String>> = std::iter::once(SUMMARY_COLUMNS.map(String::from).to_vec())
        .chain(rows.iter().map(|r| {
            let f = summary_fields(r);
            let mut v = f[..5].to_vec();
            v.extend(f[5..].iter().map(|s| match s.parse::<f64>() {
                Ok(x) => format!("{x:.6e}"),
                Err(_) => s.clone(),
            }));
            v
        }))
        .collect();
    let widths: Vec<usize> = (0..SUMMARY_COLUMNS.len())
        .map(|c| cells.iter().map(|r| r[c].len()).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    for row in &cells {
        let line: Vec<String> = row
            .iter()
            .zip(&widths)
            .map(|(s, w)| format!("{s:>w$}"))
            .collect();
        out.push_str(line.join("  ").trim_end());
        out.push('\n');
    }
    out
}

/// 17 significant digits, enough to round-trip any `f64`.
pub fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}

/// Column names of [`write_csv`]: `time`, `joint_path`, joint positions and
/// velocities (left arm first), then 26 metric columns.
pub fn csv_header(dofs: (usize, usize)) -> Vec<String> {
    let mut h = vec!["time".to_string(), "joint_path".to_string()];
    for prefix in ["q", "qd"] {
        for (arm, n) in [(1, dofs.0), (2, dofs.1)] {
            h.extend((0..n).map(|j| format!("{prefix}{arm}_{j}")));
        }
    }
    for name in [
        "p_err_x", "p_err_y", "p_err_z", "xi_err_x", "xi_err_y", "xi_err_z", "abs_px", "abs_py",
        "abs_pz", "abs_qw", "abs_qx", "abs_qy", "abs_qz",
    ] {
        h.push(name.to_string());
    }
    for arm in 1..=2 {
        for c in ["vx", "vy", "vz", "wx", "wy", "wz"] {
            h.push(format!("v{arm}_{c}"));
        }
    }
    h.push("asymmetry".to_string());
    h
}

fn csv_row(r: &StepRecord) -> Vec<f64> {
    let mut row = vec![r.time, r.joint_path];
    row.extend(r.q.iter());
    row.extend(r.qdot.iter());
    row.extend(r.position_error.iter());
    row.extend(r.rotation_error.iter());
    row.extend(r.absolute.position.iter());
    row.extend(r.absolute.wxyz());
    for t in &r.twists {
        row.extend(t.to_vector().iter());
    }
    row.push(r.asymmetry);
    row
}

fn csv_err(path: &Path) -> impl Fn(csv::Error) -> Error + '_ {
    move |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    }
}

pub fn write_csv(log: &SimLog, path: &Path) -> Result<()> {
    let rows = log.records.iter().map(csv_row);
    write_rows(path, &csv_header(log.dofs), rows)
}

pub(crate) fn write_rows(
    path: &Path,
    header: &[String],
    rows: impl Iterator<Item = Vec<f64>>,
) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err(path))?;
    w.write_record(header).map_err(csv_err(path))?;
    for row in rows {
        w.write_record(row.iter().map(|v| fmt_float(*v)))
            .map_err(csv_err(path))?;
    }
    w.flush().map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Reads a numeric CSV written by this module.
pub fn read_csv(path: &Path) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let mut r = csv::Reader::from_path(path).map_err(csv_err(path))?;
    let header = r
        .headers()
        .map_err(csv_err(path))?
        .iter()
        .map(String::from)
        .collect();
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(csv_err(path))?;
        rows.push(rec.iter().map(|s| s.parse().unwrap_or(f64::NAN)).collect());
    }
    Ok((header, rows))
}

// ---------------------------------------------------------------------------
// Two-point system

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PointIntegrator {
    /// `p ← p + dt·A p`.
    ExplicitEuler,
    /// `p ← exp(A dt) p`, exact at the grid points.
    #[default]
    Exact,
}

impl FromStr for PointIntegrator {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "euler" => Ok(PointIntegrator::ExplicitEuler),
            "exact" => Ok(PointIntegrator::Exact),
            _ => Err(format!(
                "unknown integrator `{s}` (expected euler or exact)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointSystemConfig {
    /// Gain of the secondary task `ṗ_{1d} = −K p_1`.
    pub k: f64,
    pub p1_0: f64,
    pub p2_0: f64,
    pub dt: f64,
    pub duration: f64,
    pub integrator: PointIntegrator,
}

impl PointSystemConfig {
    pub fn new(k: f64) -> Self {
        PointSystemConfig {
            k,
            p1_0: 0.0,
            p2_0: 1.0,
            dt: 1e-3,
            duration: 10.0,
            integrator: PointIntegrator::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointRecord {
    pub t: f64,
    pub p1: f64,
    pub p2: f64,
    pub pd1: f64,
    pub pd2: f64,
    /// `|ṗ_2| / (|ṗ_1| + |ṗ_2|)`.
    pub alpha: f64,
    /// Induced absolute velocity `½(ṗ_1 + ṗ_2)`.
    pub pa_dot: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointLog {
    pub k: f64,
    pub records: Vec<PointRecord>,
}

/// Velocities of the two points: the relative command `p_1 − p_2` split
/// symmetrically, plus the secondary command on point 1 mapped through the
/// relative nullspace.
pub fn point_velocity(k: f64, p1: f64, p2: f64) -> (f64, f64) {
    let v1_desired = -k * p1;
    let v_rel = p1 - p2;
    (0.5 * (v1_desired - v_rel), 0.5 * (v1_desired + v_rel))
}

/// State matrix of the closed loop: `½[[−(K+1), 1], [1−K, −1]]`.
pub fn point_system_matrix(k: f64) -> Matrix2<f64> {
    Matrix2::new(-(k + 1.0), 1.0, 1.0 - k, -1.0) * 0.5
}

/// Integrates the two-point system. A zero duration yields no records;
/// otherwise records sit at `t = i·dt` for `i = 0..=⌊duration/dt⌋`.
pub fn run_point_example(cfg: &PointSystemConfig) -> Result<PointLog> {
    if !(cfg.dt > 0.0 && cfg.dt.is_finite()) {
        return Err(Error::InvalidSimConfig(format!(
            "dt must be positive, got {}",
            cfg.dt
        )));
    }
    if !(cfg.duration >= 0.0 && cfg.duration.is_finite()) {
        return Err(Error::InvalidSimConfig(format!(
            "duration must be non-negative, got {}",
            cfg.duration
        )));
    }
    if !(cfg.k >= 0.0 && cfg.k.is_finite()) {
        return Err(Error::InvalidSimConfig(format!(
            "secondary gain K must be non-negative, got {}",
            cfg.k
        )));
    }
    if cfg.duration == 0.0 {
        return Ok(PointLog {
            k: cfg.k,
            records: Vec::new(),
        });
    }
    let n = step_count(cfg.duration, cfg.dt);
    let transition = match cfg.integrator {
        PointIntegrator::ExplicitEuler => Matrix2::identity() + point_system_matrix(cfg.k) * cfg.dt,
        PointIntegrator::Exact => (point_system_matrix(cfg.k) * cfg.dt).exp(),
    };
    let mut p = Vector2::new(cfg.p1_0, cfg.p2_0);
    let mut records = Vec::with_capacity(n + 1);
    for i in 0..=n {
        let (pd1, pd2) = point_velocity(cfg.k, p[0], p[1]);
        let denom = pd1.abs() + pd2.abs();
        records.push(PointRecord {
            t: i as f64 * cfg.dt,
            p1: p[0],
            p2: p[1],
            pd1,
            pd2,
            alpha: if denom == 0.0 { 0.5 } else { pd2.abs() / denom },
            pa_dot: 0.5 * (pd1 + pd2),
        });
        p = transition * p;
    }
    Ok(PointLog { k: cfg.k, records })
}

pub const POINT_HEADER: [&str; 7] = ["t", "p1", "p2", "pd1", "pd2", "alpha", "pa_dot"];

pub fn write_point_csv(log: &PointLog, path: &Path) -> Result<()> {
    let header: Vec<String> = POINT_HEADER.iter().map(|s| s.to_string()).collect();
    let rows = log
        .records
        .iter()
        .map(|r| vec![r.t, r.p1, r.p2, r.pd1, r.pd2, r.alpha, r.pa_dot]);
    write_rows(path, &header, rows)
}

/// One `t` column plus `alpha_K<k>` per log; all logs share the time grid.
pub fn write_point_alpha_csv(logs: &[PointLog], path: &Path) -> Result<()> {
    let mut header = vec!["t".to_string()];
    header.extend(logs.iter().map(|l| format!("alpha_K{}", l.k)));
    let len = logs.iter().map(|l| l.records.len()).min().unwrap_or(0);
    let rows = (0..len).map(|i| {
        let mut row = vec![logs[0].records[i].t];
        row.extend(logs.iter().map(|l| l.records[i].alpha));
        row
    });
    write_rows(path, &header, rows)
}

/// Identity orientation helper for custom tasks.
pub fn aligned_pair(position: Vec3, orientation: UnitQuat) -> [Pose; 2] {
    let p = Pose::new(position, orientation);
    [p, p]
}
