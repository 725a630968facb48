//! Robot description files.
//!
//! ```toml
//! name = "twin-7dof"
//!
//! [arm.left]
//! base_pose = { xyz = [0.0, 0.25, 0.0], wxyz = [1.0, 0.0, 0.0, 0.0] }
//! dh = [[a, alpha, d, theta_offset, "revolute" | "prismatic"], ...]
//! tool_offset = { xyz = [...], wxyz = [...] }     # optional, identity
//! object_offset = { xyz = [...], wxyz = [...] }   # optional, identity + warning
//! limits = [[lo, hi], ...]                        # one pair per joint
//!
//! [arm.right]
//! ...
//!
//! [seed]
//! left = [...]
//! right = [...]
//! ```
//!
//! Quaternions are `[w, x, y, z]` and are normalized on load. Lengths in
//! meters, angles in radians.

use std::path::Path;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::chain::{quat_wxyz, DhRow, DualArmSystem, JointKind, SerialChain};
use crate::error::{ConfigError, Error, Result};
use crate::geom::{Pose, Vec3};

/// Minimum joints per arm.
pub const MIN_DOF: usize = 6;

/// The bundled reference pair of mirrored 7-R arms.
pub const TWIN_7DOF: &str = include_str!("../assets/twin-7dof.toml");

#[derive(Debug, Clone)]
pub struct RobotConfig {
    pub name: String,
    pub system: DualArmSystem,
    /// Initial joint vector, left arm first.
    pub seed: DVector<f64>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileDoc {
    #[serde(default)]
    name: Option<String>,
    arm: ArmsDoc,
    seed: SeedDoc,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ArmsDoc {
    left: ArmDoc,
    right: ArmDoc,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ArmDoc {
    base_pose: PoseDoc,
    dh: Vec<(f64, f64, f64, f64, JointKind)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    tool_offset: Option<PoseDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    object_offset: Option<PoseDoc>,
    limits: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PoseDoc {
    xyz: [f64; 3],
    wxyz: [f64; 4],
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SeedDoc {
    left: Vec<f64>,
    right: Vec<f64>,
}

impl PoseDoc {
    fn to_pose(self, field: &str) -> std::result::Result<Pose, ConfigError> {
        let all = self.xyz.iter().chain(self.wxyz.iter());
        if all.clone().any(|v| !v.is_finite()) {
            return Err(ConfigError::invalid(field, "pose values must be finite"));
        }
        let norm = self.wxyz.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm < 1e-9 {
            return Err(ConfigError::invalid(field, "quaternion has zero norm"));
        }
        Ok(Pose::new(
            Vec3::new(self.xyz[0], self.xyz[1], self.xyz[2]),
            quat_wxyz(self.wxyz),
        ))
    }

    fn from_pose(p: &Pose) -> Self {
        PoseDoc {
            xyz: [p.position.x, p.position.y, p.position.z],
            wxyz: p.wxyz(),
        }
    }
}

fn build_arm(
    side: &str,
    doc: &ArmDoc,
    warnings: &mut Vec<String>,
) -> std::result::Result<(SerialChain, Pose), ConfigError> {
    let prefix = format!("arm.{side}");
    let n = doc.dh.len();
    if n < MIN_DOF {
        return Err(ConfigError::invalid(
            format!("{prefix}.dh"),
            format!("arm has {n} joints; each arm needs n ≥ {MIN_DOF} joints"),
        ));
    }
    let rows = doc
        .dh
        .iter()
        .enumerate()
        .map(|(i, &(a, alpha, d, theta_offset, kind))| {
            if [a, alpha, d, theta_offset].iter().any(|v| !v.is_finite()) {
                return Err(ConfigError::invalid(
                    format!("{prefix}.dh[{i}]"),
                    "DH parameters must be finite",
                ));
            }
            Ok(DhRow {
                a,
                alpha,
                d,
                theta_offset,
                kind,
            })
        })
        .collect::<std::result::Result<Vec<_>, _>>()?;
    if doc.limits.len() != n {
        return Err(ConfigError::invalid(
            format!("{prefix}.limits"),
            format!("expected {n} [lo, hi] pairs, found {}", doc.limits.len()),
        ));
    }
    for (i, [lo, hi]) in doc.limits.iter().enumerate() {
        if lo.is_nan() || hi.is_nan() || lo >= hi {
            return Err(ConfigError::invalid(
                format!("{prefix}.limits[{i}]"),
                format!("requires lo < hi, got [{lo}, {hi}]"),
            ));
        }
    }
    let base_pose = doc.base_pose.to_pose(&format!("{prefix}.base_pose"))?;
    let tool_offset = match doc.tool_offset {
        Some(p) => p.to_pose(&format!("{prefix}.tool_offset"))?,
        None => Pose::identity(),
    };
    let object_offset = match doc.object_offset {
        Some(p) => p.to_pose(&format!("{prefix}.object_offset"))?,
        None => {
            warnings.push(format!(
                "{prefix}.object_offset missing; object frame defaults to the end-effector frame"
            ));
            Pose::identity()
        }
    };
    let chain = SerialChain {
        name: side.to_string(),
        base_pose,
        rows,
        limits: doc.limits.iter().map(|[lo, hi]| (*lo, *hi)).collect(),
        tool_offset,
    };
    Ok((chain, object_offset))
}

/// Parses and validates a robot description.
pub fn load_system(text: &str) -> std::result::Result<RobotConfig, ConfigError> {
    let doc: FileDoc = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
    let mut warnings = Vec::new();
    let (left, off1) = build_arm("left", &doc.arm.left, &mut warnings)?;
    let (right, off2) = build_arm("right", &doc.arm.right, &mut warnings)?;
    for (side, chain, seed) in [
        ("left", &left, &doc.seed.left),
        ("right", &right, &doc.seed.right),
    ] {
        if seed.len() != chain.dof() {
            return Err(ConfigError::invalid(
                format!("seed.{side}"),
                format!(
                    "expected {} joint values, found {}",
                    chain.dof(),
                    seed.len()
                ),
            ));
        }
        if seed.iter().any(|v| !v.is_finite()) {
            return Err(ConfigError::invalid(
                format!("seed.{side}"),
                "values must be finite",
            ));
        }
        let out = chain.limit_violations(seed);
        if !out.is_empty() {
            warnings.push(format!(
                "seed.{side}: joints {out:?} outside advisory limits"
            ));
        }
    }
    for w in &warnings {
        log::warn!("{w}");
    }
    let system = DualArmSystem {
        left,
        right,
        object_offsets: [off1, off2],
    };
    let seed = system.join(&doc.seed.left, &doc.seed.right);
    Ok(RobotConfig {
        name: doc.name.unwrap_or_else(|| "unnamed".to_string()),
        system,
        seed,
        warnings,
    })
}

pub fn load_system_file(path: &Path) -> Result<RobotConfig> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(load_system(&text)?)
}

/// The bundled twin-7dof description.
pub fn twin_7dof() -> RobotConfig {
    load_system(TWIN_7DOF).expect("bundled robot config is valid")
}

impl RobotConfig {
    /// Serializes back to the file format. Object offsets are always written.
    pub fn to_config_text(&self) -> String {
        let arm = |chain: &SerialChain, offset: &Pose| ArmDoc {
            base_pose: PoseDoc::from_pose(&chain.base_pose),
            dh: chain
                .rows
                .iter()
                .map(|r| (r.a, r.alpha, r.d, r.theta_offset, r.kind))
                .collect(),
            tool_offset: Some(PoseDoc::from_pose(&chain.tool_offset)),
            object_offset: Some(PoseDoc::from_pose(offset)),
            limits: chain.limits.iter().map(|&(lo, hi)| [lo, hi]).collect(),
        };
        let (s1, s2) = self
            .system
            .split(self.seed.as_slice())
            .expect("seed matches system");
        let doc = FileDoc {
            name: Some(self.name.clone()),
            arm: ArmsDoc {
                left: arm(&self.system.left, &self.system.object_offsets[0]),
                right: arm(&self.system.right, &self.system.object_offsets[1]),
            },
            seed: SeedDoc {
                left: s1.to_vec(),
                right: s2.to_vec(),
            },
        };
        toml::to_string(&doc).expect("config serializes")
    }
}
