//! Command-line front end.
//!
//! Exit codes: 0 success, 1 selfcheck failure, 2 usage or invalid input,
//! 3 I/O, 4 numerical abort.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::config::{load_system_file, twin_7dof, RobotConfig};
use crate::coop::{cooperative_frames, CoopParam, FrameConvention};
use crate::error::Error;
use crate::geom::{angle_axis_of_quat, Pose, Vec3};
use crate::selfcheck::{run_selfcheck, Fault, SelfCheckOptions};
use crate::sim::{
    compare_methods, run_alignment, run_point_example, summary_csv, summary_table, write_csv,
    write_point_alpha_csv, write_point_csv, Method, PointIntegrator, PointSystemConfig, SimConfig,
    SimLog, Task, DEFAULT_DT, DEFAULT_DURATION, DEFAULT_ROTATION_ANGLE,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_SELFCHECK: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_IO: i32 = 3;
pub const EXIT_NUMERICAL: i32 = 4;

/// Environment variable naming the default output directory.
pub const OUT_ENV: &str = "DUALCOOP_OUT";

#[derive(Debug, Parser)]
#[command(
    name = "dualcoop",
    version,
    about = "Dual-arm cooperative kinematics experiments"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate the two-point system for one or more secondary gains.
    PointExample(PointArgs),
    /// Run one alignment task with one method.
    Align(AlignArgs),
    /// Run several methods on the same alignment task.
    Compare(CompareArgs),
    /// Print object and cooperative frames at the seed configuration.
    Frames(FramesArgs),
    /// Check the linking-matrix identities.
    Selfcheck(SelfcheckArgs),
}

#[derive(Debug, Args)]
pub struct OutArgs {
    /// Output directory (created if missing).
    #[arg(long, env = OUT_ENV, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct PointArgs {
    /// Secondary gains.
    #[arg(long = "K", num_args = 1.., required = true, allow_negative_numbers = true)]
    pub k: Vec<f64>,
    #[arg(long, default_value_t = 1e-3)]
    pub dt: f64,
    #[arg(long, default_value_t = 10.0)]
    pub duration: f64,
    #[arg(long, value_enum, default_value_t = IntegratorArg::Exact)]
    pub integrator: IntegratorArg,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum IntegratorArg {
    Exact,
    Euler,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TaskArg {
    Trans,
    Rot,
}

#[derive(Debug, Args)]
pub struct TaskArgs {
    /// Robot description; defaults to the bundled twin-7dof pair.
    #[arg(long)]
    pub robot: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = TaskArg::Trans)]
    pub task: TaskArg,
    /// Relative rotation of the rotational task, radians.
    #[arg(long, default_value_t = DEFAULT_ROTATION_ANGLE)]
    pub rot_angle: f64,
    /// Rotation axis of the rotational task.
    #[arg(long, num_args = 3, value_names = ["X", "Y", "Z"], allow_negative_numbers = true)]
    pub rot_axis: Option<Vec<f64>>,
    #[arg(long, default_value_t = DEFAULT_DT)]
    pub dt: f64,
    #[arg(long, default_value_t = DEFAULT_DURATION)]
    pub duration: f64,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args)]
pub struct AlignArgs {
    #[arg(long, value_parser = parse_method, default_value = "asym_relative")]
    pub method: Method,
    /// Cooperation parameter; 0.5 when omitted.
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: Option<f64>,
    #[command(flatten)]
    pub task: TaskArgs,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    /// Methods to run, each optionally suffixed `@α`; defaults to all
    /// methods at `--alpha`.
    #[arg(long, num_args = 1..)]
    pub methods: Vec<String>,
    #[arg(long, default_value_t = 0.8, allow_negative_numbers = true)]
    pub alpha: f64,
    #[command(flatten)]
    pub task: TaskArgs,
}

#[derive(Debug, Args)]
pub struct FramesArgs {
    #[arg(long)]
    pub robot: Option<PathBuf>,
    #[arg(long, default_value_t = 0.5, allow_negative_numbers = true)]
    pub alpha: f64,
}

#[derive(Debug, Args)]
pub struct SelfcheckArgs {
    #[arg(long, default_value_t = 1000)]
    pub samples: usize,
    #[arg(long, hide = true)]
    pub inject_fault: bool,
}

fn parse_method(s: &str) -> Result<Method, String> {
    s.parse()
}

/// Failure of a command, carrying its exit code.
#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure {
            code: exit_code_of(&e),
            message: e.to_string(),
        }
    }
}

pub fn exit_code_of(e: &Error) -> i32 {
    match e {
        Error::Io { .. } | Error::Csv { .. } => EXIT_IO,
        Error::NumericalAbort { .. }
        | Error::RankDeficient { .. }
        | Error::IkNotConverged { .. } => EXIT_NUMERICAL,
        Error::Config(_)
        | Error::AlphaOutOfRange(_)
        | Error::InvalidOptions(_)
        | Error::InvalidSimConfig(_)
        | Error::GainNotPositiveDefinite
        | Error::DimensionMismatch { .. } => EXIT_USAGE,
    }
}

type CmdResult = Result<i32, Failure>;

/// Parses `args` (including the program name) and runs the command.
/// Returns the process exit code; diagnostics go to stderr.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .format_timestamp(None)
        .try_init();
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let result = match cli.command {
        Command::PointExample(a) => cmd_point_example(&a),
        Command::Align(a) => cmd_align(&a),
        Command::Compare(a) => cmd_compare(&a),
        Command::Frames(a) => cmd_frames(&a),
        Command::Selfcheck(a) => cmd_selfcheck(&a),
    };
    match result {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}

fn ensure_dir(dir: &Path) -> Result<(), Failure> {
    std::fs::create_dir_all(dir).map_err(|source| {
        Failure::from(Error::Io {
            path: dir.to_path_buf(),
            source,
        })
    })
}

fn write_text(path: &Path, text: &str) -> Result<(), Failure> {
    std::fs::write(path, text).map_err(|source| {
        Failure::from(Error::Io {
            path: path.to_path_buf(),
            source,
        })
    })
}

fn alpha_arg(alpha: f64) -> Result<CoopParam, Failure> {
    CoopParam::new(alpha)
        .map_err(|_| Failure::usage(format!("--alpha {alpha} is outside α ∈ [0, 1]")))
}

/// `4` prints as `4`, `0.5` as `0.5`.
fn gain_label(k: f64) -> String {
    format!("{k}")
}

fn cmd_point_example(a: &PointArgs) -> CmdResult {
    if let Some(&k) = a.k.iter().find(|k| !(**k >= 0.0 && k.is_finite())) {
        return Err(Failure::usage(format!(
            "--K {k} is invalid: the secondary gain needs K > 0 (K = 0 is the symmetric baseline)"
        )));
    }
    let integrator = match a.integrator {
        IntegratorArg::Exact => PointIntegrator::Exact,
        IntegratorArg::Euler => PointIntegrator::ExplicitEuler,
    };
    let logs =
        a.k.iter()
            .map(|&k| {
                run_point_example(&PointSystemConfig {
                    dt: a.dt,
                    duration: a.duration,
                    integrator,
                    ..PointSystemConfig::new(k)
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
    ensure_dir(&a.out.out)?;
    for log in &logs {
        let path = a.out.out.join(format!("point_K{}.csv", gain_label(log.k)));
        write_point_csv(log, &path)?;
        println!("wrote {}", path.display());
    }
    let path = a.out.out.join("point_alpha.csv");
    write_point_alpha_csv(&logs, &path)?;
    println!("wrote {}", path.display());
    Ok(EXIT_OK)
}

fn load_robot(path: &Option<PathBuf>) -> Result<RobotConfig, Failure> {
    match path {
        None => Ok(twin_7dof()),
        Some(p) => match load_system_file(p) {
            Ok(cfg) => {
                for w in &cfg.warnings {
                    eprintln!("warning: {}: {w}", p.display());
                }
                Ok(cfg)
            }
            Err(Error::Config(e)) => Err(Failure::usage(format!("{}: {e}", p.display()))),
            Err(e) => Err(e.into()),
        },
    }
}

fn task_of(a: &TaskArgs) -> Result<Task, Failure> {
    Ok(match a.task {
        TaskArg::Trans => Task::Translational,
        TaskArg::Rot => {
            let axis = match &a.rot_axis {
                None => Vec3::z(),
                Some(v) => {
                    let axis = Vec3::new(v[0], v[1], v[2]);
                    if !axis.iter().all(|x| x.is_finite()) || axis.norm() <= 1e-12 {
                        return Err(Failure::usage("--rot-axis must be a finite nonzero vector"));
                    }
                    axis.normalize()
                }
            };
            if !a.rot_angle.is_finite() {
                return Err(Failure::usage("--rot-angle must be finite"));
            }
            Task::Rotational {
                axis,
                angle: a.rot_angle,
            }
        }
    })
}

fn sim_config(
    a: &TaskArgs,
    robot: &RobotConfig,
    method: Method,
    alpha: CoopParam,
) -> Result<SimConfig, Failure> {
    let cfg = SimConfig {
        dt: a.dt,
        duration: a.duration,
        ..SimConfig::new(method, alpha, task_of(a)?, robot.seed.clone())
    };
    cfg.validate()?;
    Ok(cfg)
}

fn summary_line(log: &SimLog) -> String {
    let s = log.summary();
    format!(
        "{} {}: steps {} converged {} |p_err| {:.3e} |xi_err| {:.3e} path {:.6} mean asymmetry {:.4} (linear {:.4}, angular {:.4}) absolute displacement {:.3e} m, {:.3e} rad",
        log.task,
        s.label,
        s.steps,
        s.converged,
        s.final_position_error,
        s.final_rotation_error,
        s.joint_path,
        s.mean_asymmetry,
        s.mean_asymmetry_linear,
        s.mean_asymmetry_angular,
        s.absolute_displacement,
        s.absolute_rotation,
    )
}

fn run_file_name(log: &SimLog) -> String {
    format!("align_{}_{}.csv", log.task, log.label().replace('@', "_a"))
}

fn cmd_align(a: &AlignArgs) -> CmdResult {
    let alpha = alpha_arg(a.alpha.unwrap_or(0.5))?;
    if !a.method.uses_alpha() && a.alpha.is_some() {
        eprintln!("warning: --alpha is ignored for method {}", a.method);
    }
    let robot = load_robot(&a.task.robot)?;
    let cfg = sim_config(&a.task, &robot, a.method, alpha)?;
    let log = run_alignment(&robot.system, &cfg)?;
    ensure_dir(&a.task.out.out)?;
    let path = a.task.out.out.join(run_file_name(&log));
    write_csv(&log, &path)?;
    println!("{}", summary_line(&log));
    println!("wrote {}", path.display());
    Ok(EXIT_OK)
}

fn parse_method_spec(spec: &str, default_alpha: CoopParam) -> Result<(Method, CoopParam), Failure> {
    let (name, alpha) = match spec.split_once('@') {
        Some((name, a)) => {
            let v: f64 = a
                .parse()
                .map_err(|_| Failure::usage(format!("bad α in `{spec}`")))?;
            (name, alpha_arg(v)?)
        }
        None => (spec, default_alpha),
    };
    let method: Method = name.parse().map_err(Failure::usage)?;
    Ok((method, alpha))
}

fn cmd_compare(a: &CompareArgs) -> CmdResult {
    let alpha = alpha_arg(a.alpha)?;
    let methods: Vec<(Method, CoopParam)> = if a.methods.is_empty() {
        Method::ALL.iter().map(|&m| (m, alpha)).collect()
    } else {
        a.methods
            .iter()
            .map(|s| parse_method_spec(s, alpha))
            .collect::<Result<_, _>>()?
    };
    let robot = load_robot(&a.task.robot)?;
    let cfg = sim_config(&a.task, &robot, Method::Cts, alpha)?;
    let logs = compare_methods(&robot.system, &cfg, &methods)?;
    ensure_dir(&a.task.out.out)?;
    for log in &logs {
        write_csv(log, &a.task.out.out.join(run_file_name(log)))?;
    }
    let summaries: Vec<_> = logs.iter().map(SimLog::summary).collect();
    let task = logs.first().map(|l| l.task).unwrap_or("none");
    write_text(
        &a.task.out.out.join(format!("summary_{task}.csv")),
        &summary_csv(&summaries),
    )?;
    let table = summary_table(&summaries);
    write_text(&a.task.out.out.join(format!("summary_{task}.txt")), &table)?;
    print!("{table}");
    Ok(EXIT_OK)
}

fn pose_line(name: &str, p: &Pose) -> String {
    let aa = angle_axis_of_quat(&p.orientation);
    let rot = if aa.angle < 1e-9 {
        "identity".to_string()
    } else {
        format!(
            "{:.6} rad about [{:+.4}, {:+.4}, {:+.4}]",
            aa.angle, aa.axis.x, aa.axis.y, aa.axis.z
        )
    };
    format!(
        "{name:<22} p = [{:+.6}, {:+.6}, {:+.6}]  rot = {rot}\n",
        p.position.x, p.position.y, p.position.z
    )
}

fn cmd_frames(a: &FramesArgs) -> CmdResult {
    let alpha = alpha_arg(a.alpha)?;
    let robot = load_robot(&a.robot)?;
    let q = robot.seed.as_slice();
    let [e1, e2] = robot.system.end_effector_poses(q)?;
    let [o1, o2] = robot.system.object_poses(q)?;
    let cts = cooperative_frames(&o1, &o2, FrameConvention::Cts);
    let ects = cooperative_frames(&o1, &o2, FrameConvention::Ects(alpha));
    let asym = cooperative_frames(&o1, &o2, FrameConvention::AsymRelative(alpha));
    let mut out = String::new();
    let _ = writeln!(
        out,
        "robot {} at its seed configuration, α = {}",
        robot.name,
        alpha.value()
    );
    out += &pose_line("end-effector 1", &e1);
    out += &pose_line("end-effector 2", &e2);
    out += &pose_line("object 1", &o1);
    out += &pose_line("object 2", &o2);
    out += &pose_line("cts absolute", &cts.absolute);
    out += &pose_line("cts relative", &cts.relative);
    out += &pose_line("ects absolute", &ects.absolute);
    out += &pose_line("asymmetric relative", &asym.relative);
    print!("{out}");
    Ok(EXIT_OK)
}

fn cmd_selfcheck(a: &SelfcheckArgs) -> CmdResult {
    let report = run_selfcheck(&SelfCheckOptions {
        samples: a.samples,
        fault: a.inject_fault.then_some(Fault::AsymAbsoluteSign),
        ..Default::default()
    });
    print!("{}", report.render());
    if report.all_passed() {
        Ok(EXIT_OK)
    } else {
        let names: Vec<_> = report.failures().map(|r| r.name).collect();
        eprintln!("selfcheck failed: {}", names.join(", "));
        Ok(EXIT_SELFCHECK)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_args(args: &[&str]) -> i32 {
        run(std::iter::once("dualcoop").chain(args.iter().copied()))
    }

    #[test]
    fn usage_errors_exit_2() {
        assert_eq!(run_args(&[]), EXIT_USAGE);
        assert_eq!(run_args(&["align", "--method", "bogus"]), EXIT_USAGE);
        assert_eq!(run_args(&["point-example"]), EXIT_USAGE);
    }

    #[test]
    fn help_exits_0() {
        assert_eq!(run_args(&["--help"]), EXIT_OK);
    }

    #[test]
    fn method_spec_parsing() {
        let d = CoopParam::SYMMETRIC;
        let (m, a) = parse_method_spec("ects@0.8", d).unwrap();
        assert_eq!((m, a.value()), (Method::Ects, 0.8));
        assert_eq!(parse_method_spec("cts", d).unwrap().1, d);
        assert!(parse_method_spec("ects@2", d).is_err());
        assert!(parse_method_spec("nope", d).is_err());
    }

    #[test]
    fn gain_labels_are_plain() {
        assert_eq!(gain_label(4.0), "4");
        assert_eq!(gain_label(0.5), "0.5");
    }
}
