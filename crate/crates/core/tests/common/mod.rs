//! Independent reference computations shared by the integration tests.
#![allow(dead_code)]

use dualcoop::chain::{JointKind, SerialChain};
use dualcoop::geom::Pose;

pub type Mat4 = [[f64; 4]; 4];

pub fn mat4_mul(a: &Mat4, b: &Mat4) -> Mat4 {
    let mut c = [[0.0; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            c[i][j] = (0..4).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    c
}

/// Homogeneous matrix of a pose, via the explicit quaternion formula.
pub fn mat4_of_pose(p: &Pose) -> Mat4 {
    let q = p.orientation.quaternion();
    let (w, x, y, z) = (q.w, q.i, q.j, q.k);
    [
        [
            1.0 - 2.0 * (y * y + z * z),
            2.0 * (x * y - w * z),
            2.0 * (x * z + w * y),
            p.position.x,
        ],
        [
            2.0 * (x * y + w * z),
            1.0 - 2.0 * (x * x + z * z),
            2.0 * (y * z - w * x),
            p.position.y,
        ],
        [
            2.0 * (x * z - w * y),
            2.0 * (y * z + w * x),
            1.0 - 2.0 * (x * x + y * y),
            p.position.z,
        ],
        [0.0, 0.0, 0.0, 1.0],
    ]
}

/// Textbook distal DH matrix `Rz(θ) Tz(d) Tx(a) Rx(α)`, written out.
pub fn dh_matrix(theta: f64, d: f64, a: f64, alpha: f64) -> Mat4 {
    let (st, ct) = theta.sin_cos();
    let (sa, ca) = alpha.sin_cos();
    [
        [ct, -st * ca, st * sa, a * ct],
        [st, ct * ca, -ct * sa, a * st],
        [0.0, sa, ca, d],
        [0.0, 0.0, 0.0, 1.0],
    ]
}

pub fn fk_oracle(chain: &SerialChain, q: &[f64]) -> Mat4 {
    let mut t = mat4_of_pose(&chain.base_pose);
    for (row, &qi) in chain.rows.iter().zip(q) {
        let (theta, d) = match row.kind {
            JointKind::Revolute => (row.theta_offset + qi, row.d),
            JointKind::Prismatic => (row.theta_offset, row.d + qi),
        };
        t = mat4_mul(&t, &dh_matrix(theta, d, row.a, row.alpha));
    }
    mat4_mul(&t, &mat4_of_pose(&chain.tool_offset))
}

pub fn max_mat4_diff(a: &Mat4, b: &Mat4) -> f64 {
    let mut m: f64 = 0.0;
    for i in 0..4 {
        for j in 0..4 {
            m = m.max((a[i][j] - b[i][j]).abs());
        }
    }
    m
}

/// Rotation vector of a 3×3 rotation in row-major form (small angles).
fn log_so3(r: &[[f64; 3]; 3]) -> [f64; 3] {
    let tr = r[0][0] + r[1][1] + r[2][2];
    let angle = ((tr - 1.0) / 2.0).clamp(-1.0, 1.0).acos();
    let v = [r[2][1] - r[1][2], r[0][2] - r[2][0], r[1][0] - r[0][1]];
    let k = if angle < 1e-12 {
        0.5
    } else {
        angle / (2.0 * angle.sin())
    };
    [v[0] * k, v[1] * k, v[2] * k]
}

/// Central finite-difference Jacobian from the homogeneous oracle.
pub fn jacobian_fd(chain: &SerialChain, q: &[f64], h: f64) -> Vec<[f64; 6]> {
    (0..q.len())
        .map(|j| {
            let mut qp = q.to_vec();
            let mut qm = q.to_vec();
            qp[j] += h;
            qm[j] -= h;
            let tp = fk_oracle(chain, &qp);
            let tm = fk_oracle(chain, &qm);
            // R+ R-ᵀ ≈ exp(2h S(ω)).
            let mut r = [[0.0; 3]; 3];
            for (a, row) in r.iter_mut().enumerate() {
                for (b, cell) in row.iter_mut().enumerate() {
                    *cell = (0..3).map(|k| tp[a][k] * tm[b][k]).sum();
                }
            }
            let w = log_so3(&r);
            [
                (tp[0][3] - tm[0][3]) / (2.0 * h),
                (tp[1][3] - tm[1][3]) / (2.0 * h),
                (tp[2][3] - tm[2][3]) / (2.0 * h),
                w[0] / (2.0 * h),
                w[1] / (2.0 * h),
                w[2] / (2.0 * h),
            ]
        })
        .collect()
}

/// `exp(A t) p0` for a 2×2 matrix with real eigenvalues, through
/// Cayley-Hamilton: `e^{mt}[cosh(δt) I + sinh(δt)/δ (A − mI)]`.
pub fn expm2_apply(a: [[f64; 2]; 2], t: f64, p0: [f64; 2]) -> [f64; 2] {
    let m = (a[0][0] + a[1][1]) / 2.0;
    let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    let disc = m * m - det;
    assert!(disc >= 0.0, "oracle covers real eigenvalues only");
    let delta = disc.sqrt();
    let c = (delta * t).cosh();
    let s = if delta == 0.0 {
        t
    } else {
        (delta * t).sinh() / delta
    };
    let e = (m * t).exp();
    let b = [[a[0][0] - m, a[0][1]], [a[1][0], a[1][1] - m]];
    [
        e * (c * p0[0] + s * (b[0][0] * p0[0] + b[0][1] * p0[1])),
        e * (c * p0[1] + s * (b[1][0] * p0[0] + b[1][1] * p0[1])),
    ]
}

/// Closed-loop matrix of the two-point system, derived by hand from
/// `ṗ_2 − ṗ_1 = p_1 − p_2` and `ṗ_1 + ṗ_2 = −K p_1`.
pub fn point_matrix(k: f64) -> [[f64; 2]; 2] {
    [[-(k + 1.0) / 2.0, 0.5], [(1.0 - k) / 2.0, -0.5]]
}

/// `α = |ṗ_2| / (|ṗ_1| + |ṗ_2|)` along the exact solution from `(0, 1)`.
pub fn point_alpha_exact(k: f64, t: f64) -> f64 {
    let a = point_matrix(k);
    let p = expm2_apply(a, t, [0.0, 1.0]);
    let v1 = a[0][0] * p[0] + a[0][1] * p[1];
    let v2 = a[1][0] * p[0] + a[1][1] * p[1];
    let den = v1.abs() + v2.abs();
    if den == 0.0 {
        0.5
    } else {
        v2.abs() / den
    }
}
