//! Numerical check of the linking-matrix identities over a grid of `α`.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::coop::{
    asymmetry_measure, coupling_rel_from_abs, induced_abs_from_rel, invert_cts, invert_ects,
    linking, pinv_abs_asymmetric, pinv_abs_symmetric, pinv_asym_relative, pinv_relative,
    split_twists, CoopParam, LinkingKind,
};

/// Deliberate corruption of one linking matrix, used to prove the check
/// can fail.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fault {
    /// Flips the sign of the second block of `[αI, (1−α)I]`.
    AsymAbsoluteSign,
}

#[derive(Debug, Clone)]
pub struct SelfCheckOptions {
    /// `α` values; the default grid is `0, 0.1, …, 1`.
    pub alphas: Vec<f64>,
    pub samples: usize,
    pub seed: u64,
    pub fault: Option<Fault>,
}

impl Default for SelfCheckOptions {
    fn default() -> Self {
        SelfCheckOptions {
            alphas: (0..=10).map(|i| i as f64 / 10.0).collect(),
            samples: 1000,
            seed: 0x5eed,
            fault: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IdentityResult {
    pub name: &'static str,
    pub max_error: f64,
    pub tolerance: f64,
}

impl IdentityResult {
    pub fn passed(&self) -> bool {
        self.max_error < self.tolerance
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelfCheckReport {
    pub results: Vec<IdentityResult>,
}

impl SelfCheckReport {
    pub fn all_passed(&self) -> bool {
        self.results.iter().all(IdentityResult::passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &IdentityResult> {
        self.results.iter().filter(|r| !r.passed())
    }

    /// One line per identity.
    pub fn render(&self) -> String {
        let width = self.results.iter().map(|r| r.name.len()).max().unwrap_or(0);
        self.results
            .iter()
            .map(|r| {
                format!(
                    "{} {:width$}  max error {:.3e} (tol {:.0e})\n",
                    if r.passed() { "PASS" } else { "FAIL" },
                    r.name,
                    r.max_error,
                    r.tolerance,
                )
            })
            .collect()
    }
}

fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.amax()
}

struct Tally {
    name: &'static str,
    tolerance: f64,
    max_error: f64,
}

impl Tally {
    fn new(name: &'static str, tolerance: f64) -> Self {
        Tally {
            name,
            tolerance,
            max_error: 0.0,
        }
    }

    fn record(&mut self, err: f64) {
        // NaN must count as a failure.
        if err.is_nan() || err > self.max_error {
            self.max_error = if err.is_nan() { f64::INFINITY } else { err };
        }
    }
}

pub fn run_selfcheck(opts: &SelfCheckOptions) -> SelfCheckReport {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let twists: Vec<DVector<f64>> = (0..opts.samples)
        .map(|_| DVector::from_fn(6, |_, _| rng.random_range(-1.0..1.0)))
        .collect();
    let stacked: Vec<DVector<f64>> = (0..opts.samples)
        .map(|_| DVector::from_fn(12, |_, _| rng.random_range(-1.0..1.0)))
        .collect();

    let i6 = DMatrix::<f64>::identity(6, 6);
    let i12 = DMatrix::<f64>::identity(12, 12);
    let sym = CoopParam::SYMMETRIC;
    let l_cts = linking(LinkingKind::Cts, sym).matrix;
    let l_r = linking(LinkingKind::Relative, sym).matrix;
    let l_a = linking(LinkingKind::AbsSymmetric, sym).matrix;
    let l_r_pinv = pinv_relative();

    let mut cts_inverse = Tally::new("cts linking inverse", 1e-13);
    cts_inverse.record(max_abs(&(&l_cts * invert_cts() - &i12)));
    cts_inverse.record(max_abs(&(invert_cts() * &l_cts - &i12)));

    let mut rel_pinv = Tally::new("relative pseudo-inverse", 1e-13);
    rel_pinv.record(max_abs(&(&l_r * &l_r_pinv - &i6)));
    rel_pinv.record(max_abs(&(&l_r * &l_r_pinv * &l_r - &l_r)));
    rel_pinv.record(max_abs(&(&l_r_pinv * &l_r * &l_r_pinv - &l_r_pinv)));
    let p = &l_r_pinv * &l_r;
    rel_pinv.record(max_abs(&(&p - p.transpose())));

    let mut sym_orth = Tally::new("symmetric orthogonality", 1e-14);
    sym_orth.record(max_abs(&(&l_r * pinv_abs_symmetric())));

    let mut ects_inverse = Tally::new("ects linking inverse", 1e-13);
    let mut asym_pinv = Tally::new("asymmetric relative pseudo-inverse", 1e-13);
    let mut rel_coupling = Tally::new("relative coupling of asymmetric absolute", 1e-13);
    let mut asym_orth = Tally::new("asymmetric orthogonality", 1e-13);
    let mut rel_recovery = Tally::new("relative recovery of asymmetric split", 1e-13);
    let mut homogeneous = Tally::new("homogeneous completion", 1e-12);
    let mut abs_coupling = Tally::new("induced symmetric absolute", 1e-13);
    let mut measure = Tally::new("asymmetry of asymmetric split", 1e-12);

    for &a in &opts.alphas {
        let alpha = match CoopParam::new(a) {
            Ok(alpha) => alpha,
            Err(_) => {
                log::error!("selfcheck skips α = {a} outside [0, 1]");
                continue;
            }
        };
        let l_e = linking(LinkingKind::Ects, alpha).matrix;
        ects_inverse.record(max_abs(&(&l_e * invert_ects(alpha) - &i12)));
        ects_inverse.record(max_abs(&(invert_ects(alpha) * &l_e - &i12)));

        let l_ra = linking(LinkingKind::AsymRelative, alpha).matrix;
        let l_ra_pinv = pinv_asym_relative(alpha);
        asym_pinv.record(max_abs(&(&l_ra * &l_ra_pinv - &i6)));
        asym_pinv.record(max_abs(&(&l_ra * &l_ra_pinv * &l_ra - &l_ra)));
        asym_pinv.record(max_abs(&(&l_ra_pinv * &l_ra * &l_ra_pinv - &l_ra_pinv)));
        let p = &l_ra_pinv * &l_ra;
        asym_pinv.record(max_abs(&(&p - p.transpose())));

        rel_coupling.record(max_abs(
            &(&l_r * pinv_abs_asymmetric(alpha) - &i6 * coupling_rel_from_abs(alpha)),
        ));

        let mut l_aa = linking(LinkingKind::AbsAsymmetric, alpha).matrix;
        if opts.fault == Some(Fault::AsymAbsoluteSign) {
            l_aa.columns_mut(6, 6).neg_mut();
        }
        asym_orth.record(max_abs(&(&l_aa * &l_ra_pinv)));

        rel_recovery.record(max_abs(&(&l_r * &l_ra_pinv - &i6)));

        abs_coupling.record(max_abs(
            &(&l_a * &l_ra_pinv - &i6 * induced_abs_from_rel(alpha)),
        ));

        let projector = &i12 - &l_r_pinv * &l_r;
        for v in &twists {
            let split = &l_ra_pinv * v;
            let completed = &l_r_pinv * v + &projector * &split;
            homogeneous.record((completed - &split).amax());
            let [v1, v2] = split_twists(split.as_slice());
            measure.record((asymmetry_measure(&v1, &v2) - a).abs());
        }
        for v in &stacked {
            let round = invert_ects(alpha) * (&l_e * v);
            ects_inverse.record((round - v).amax());
        }
    }

    let results = [
        cts_inverse,
        ects_inverse,
        rel_pinv,
        asym_pinv,
        rel_coupling,
        asym_orth,
        rel_recovery,
        homogeneous,
        abs_coupling,
        sym_orth,
        measure,
    ]
    .into_iter()
    .map(|t| IdentityResult {
        name: t.name,
        max_error: t.max_error,
        tolerance: t.tolerance,
    })
    .collect();
    SelfCheckReport { results }
}
