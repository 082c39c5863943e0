//! Convex-feasibility oracle for the marginal extension problem.
//!
//! Decides whether Hermitian, positive, unit-trace matrices with prescribed
//! marginals exist by running Dykstra's alternating projections between the
//! PSD cone and the affine marginal set. The search is first restricted to
//! the common support of the embedded marginal supports, since every
//! extension lives there.

mod face;
mod probe;

pub use probe::{uniqueness_probe, FreeDirection, ProbeParams, UniquenessReport};

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::car::Operator;
use crate::error::{Error, Result};
use crate::extend::product_functional_matrix;
use crate::states::{DensityState, Tolerances};
use crate::{linalg, C64};

use face::{local_constraints, overwrite_coefficients, Face};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum StartPoint {
    /// The product functional of the marginals, compressed to the face.
    Product,
    /// A random Hermitian matrix drawn from the seed.
    Seeded(u64),
}

#[derive(Clone, Debug, Serialize)]
pub struct OracleParams {
    pub max_iterations: usize,
    /// Gap and negativity allowed in a feasible verdict.
    pub tol_feas: f64,
    /// Stalled gaps at or above this are infeasible.
    pub gap_threshold: f64,
    pub start: StartPoint,
    /// Iterations between stall comparisons.
    pub stall_window: usize,
    /// Relative gap change below which the run counts as stalled.
    pub stall_rtol: f64,
    /// Record every this many gaps in the history.
    pub history_stride: usize,
    pub tolerances: Tolerances,
}

impl Default for OracleParams {
    fn default() -> Self {
        Self {
            max_iterations: 50_000,
            tol_feas: 1e-8,
            gap_threshold: 1e-4,
            start: StartPoint::Product,
            stall_window: 100,
            stall_rtol: 1e-6,
            history_stride: 50,
            tolerances: Tolerances::default(),
        }
    }
}

impl OracleParams {
    pub fn with_start(mut self, start: StartPoint) -> Self {
        self.start = start;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.tolerances.validate()?;
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if self.max_iterations == 0 || self.stall_window == 0 || self.history_stride == 0 {
            return Err(Error::InvalidParameter("iteration counts must be positive".into()));
        }
        if !positive(self.tol_feas) || !positive(self.gap_threshold) || !positive(self.stall_rtol) {
            return Err(Error::InvalidParameter("oracle tolerances must be positive".into()));
        }
        if self.gap_threshold <= self.tol_feas {
            return Err(Error::InvalidParameter(format!(
                "gap_threshold {} must exceed tol_feas {}",
                self.gap_threshold, self.tol_feas
            )));
        }
        Ok(())
    }

    /// Tolerances a witness is held to.
    pub fn witness_tolerances(&self) -> Tolerances {
        Tolerances {
            tol_psd: self.tolerances.tol_psd.max(self.tol_feas),
            ..self.tolerances
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum FeasibilityStatus {
    Feasible,
    Infeasible,
    Undecided,
}

#[derive(Clone, Debug, Serialize)]
pub struct FeasibilityReport {
    pub status: FeasibilityStatus,
    #[serde(skip)]
    pub witness: Option<DensityState>,
    /// Final distance between the affine and PSD iterates.
    pub gap: f64,
    pub iterations: usize,
    /// Sampled gaps, every `history_stride` iterations.
    pub residual_history: Vec<f64>,
    /// Rank of the common support the search ran in.
    pub face_dimension: usize,
    /// Smallest eigenvalue of the final affine iterate.
    pub min_eigenvalue: f64,
    /// What settled the verdict.
    pub note: String,
}

/// Frobenius projection onto the Hermitian matrices whose marginals are the
/// targets (and whose trace is one), by overwriting local monomial
/// coefficients.
pub fn project_marginal_affine(rho: &Operator, targets: &[DensityState]) -> Result<Operator> {
    let union = crate::modes::disjoint_union(targets.iter().map(|t| t.modes()))?;
    if rho.modes() != &union {
        return Err(Error::ModeMismatch(rho.modes().clone(), union));
    }
    let constraints = local_constraints(&union, targets)?;
    Ok(Operator::from_parts(union, overwrite_coefficients(rho.matrix(), &constraints)))
}

/// Frobenius projection onto the PSD cone (negative eigenvalues clipped).
pub fn project_psd(rho: &Operator) -> Operator {
    let h = linalg::hermitian_part(rho.matrix());
    Operator::from_parts(rho.modes().clone(), linalg::project_psd(&h))
}

/// Two-marginal form of [`feasible_extension_many`].
pub fn feasible_extension(phi1: &DensityState, phi2: &DensityState, params: &OracleParams) -> Result<FeasibilityReport> {
    feasible_extension_many(&[phi1.clone(), phi2.clone()], params)
}

fn start_matrix(face: &Face, targets: &[DensityState], start: StartPoint) -> Result<DMatrix<C64>> {
    let r = face.rank();
    let m = match start {
        StartPoint::Product => {
            let (_, prod) = product_functional_matrix(targets)?;
            let x = face.compress(&linalg::hermitian_part(&prod));
            let t = x.trace().re;
            if t.abs() > 1e-12 {
                x / C64::new(t, 0.0)
            } else {
                x
            }
        }
        StartPoint::Seeded(seed) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let g = DMatrix::from_fn(r, r, |_, _| {
                let re: f64 = StandardNormal.sample(&mut rng);
                let im: f64 = StandardNormal.sample(&mut rng);
                C64::new(re, im)
            });
            let h = linalg::hermitian_part(&g);
            let n = h.norm();
            h / C64::new(n, 0.0)
        }
    };
    Ok(m)
}

/// Searches for a joint state with the given marginals.
pub fn feasible_extension_many(targets: &[DensityState], params: &OracleParams) -> Result<FeasibilityReport> {
    params.validate()?;
    let face = Face::new(targets, &params.tolerances)?;
    let r = face.rank();
    let mut report = FeasibilityReport {
        status: FeasibilityStatus::Infeasible,
        witness: None,
        gap: 1.0,
        iterations: 0,
        residual_history: Vec::new(),
        face_dimension: r,
        min_eigenvalue: f64::NAN,
        note: String::new(),
    };
    if r == 0 {
        report.note = "marginal supports have trivial intersection".into();
        return Ok(report);
    }
    let affine = face.affine.as_ref().expect("nonempty face");
    if affine.inconsistency > params.tol_feas {
        report.gap = affine.inconsistency;
        report.note = "marginal constraints are inconsistent on the common support".into();
        return Ok(report);
    }

    let mut x = face.project_affine(&start_matrix(&face, targets, params.start)?);
    let mut p = DMatrix::<C64>::zeros(r, r);
    let mut q = DMatrix::<C64>::zeros(r, r);
    let mut window_gap = f64::INFINITY;
    let mut gap = f64::INFINITY;
    for k in 1..=params.max_iterations {
        let xp = &x + &p;
        let y = linalg::project_psd(&xp);
        p = xp - &y;
        let yq = &y + &q;
        let next = face.project_affine(&yq);
        q = yq - &next;
        x = next;
        gap = (&x - &y).norm();
        report.iterations = k;
        if k % params.history_stride == 0 {
            report.residual_history.push(gap);
        }
        if gap <= params.tol_feas {
            let min_eig = linalg::min_eigenvalue(&x);
            if min_eig >= -params.tol_feas {
                report.min_eigenvalue = min_eig;
                report.gap = gap;
                return finish_feasible(report, &face, &x, params);
            }
        }
        if k % params.stall_window == 0 {
            let stalled = window_gap.is_finite() && (window_gap - gap).abs() <= params.stall_rtol * window_gap;
            if stalled && gap > params.tol_feas {
                report.gap = gap;
                report.min_eigenvalue = linalg::min_eigenvalue(&x);
                if gap >= params.gap_threshold {
                    report.note = "gap stalled above the threshold".into();
                    report.status = FeasibilityStatus::Infeasible;
                } else {
                    report.note = "gap stalled between tolerance and threshold".into();
                    report.status = FeasibilityStatus::Undecided;
                }
                return Ok(report);
            }
            window_gap = gap;
        }
    }
    report.gap = gap;
    report.min_eigenvalue = linalg::min_eigenvalue(&x);
    if gap >= params.gap_threshold {
        report.note = "iteration budget exhausted above the threshold".into();
        report.status = FeasibilityStatus::Infeasible;
    } else {
        report.note = "iteration budget exhausted".into();
        report.status = FeasibilityStatus::Undecided;
    }
    Ok(report)
}

fn finish_feasible(mut report: FeasibilityReport, face: &Face, x: &DMatrix<C64>, params: &OracleParams) -> Result<FeasibilityReport> {
    let rho = linalg::hermitian_part(&face.expand(x));
    let witness = DensityState::new(face.union.clone(), rho, &params.witness_tolerances())
        .map_err(|e| Error::Numerical(format!("converged iterate is not a state: {e}")))?;
    report.status = FeasibilityStatus::Feasible;
    report.witness = Some(witness);
    report.note = "converged".into();
    Ok(report)
}
