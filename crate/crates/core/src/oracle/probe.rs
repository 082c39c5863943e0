use nalgebra::DMatrix;
use serde::Serialize;

use super::face::{is_local, Face};
use crate::car::{index_to_assignment, Monomial};
use crate::error::{Error, Result};
use crate::extend::verify_extension;
use crate::pauli::monomial_string;
use crate::states::{DensityState, Tolerances};
use crate::{linalg, C64};

const BISECTION_STEPS: usize = 40;
const MAX_STEP: f64 = 2.0;
/// Directions whose constraint-free part is shorter than this are dropped.
const NULL_CUTOFF: f64 = 1e-9;

#[derive(Clone, Debug, Serialize)]
pub struct ProbeParams {
    /// Steps at or below this count as zero.
    pub step_tol: f64,
    /// Marginal error tolerated in the witness.
    pub tol_marginal: f64,
    pub tolerances: Tolerances,
}

impl Default for ProbeParams {
    fn default() -> Self {
        Self {
            step_tol: 1e-3,
            tol_marginal: 1e-8,
            tolerances: Tolerances::default(),
        }
    }
}

/// A mixed-support direction along which the witness can move.
#[derive(Clone, Debug, Serialize)]
pub struct FreeDirection {
    /// The monomial the direction was derived from, e.g. `u1(1)u2(2)`.
    pub monomial: String,
    pub step_plus: f64,
    pub step_minus: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct UniquenessReport {
    pub unique: bool,
    pub free_directions: Vec<FreeDirection>,
    pub directions_tested: usize,
    pub face_dimension: usize,
}

/// Largest `eps` in `[0, MAX_STEP]` with `min eig(x + eps e) >= floor`.
fn max_step(x: &DMatrix<C64>, e: &DMatrix<C64>, floor: f64) -> f64 {
    let ok = |eps: f64| linalg::min_eigenvalue(&(x + e * C64::new(eps, 0.0))) >= floor;
    if ok(MAX_STEP) {
        return MAX_STEP;
    }
    let (mut lo, mut hi) = (0.0, MAX_STEP);
    for _ in 0..BISECTION_STEPS {
        let mid = 0.5 * (lo + hi);
        if ok(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Tests whether `witness` is the only extension of `targets`.
///
/// Each mixed-support monomial is Hermitianized, compressed to the common
/// support of the marginals and stripped of its component along the
/// marginal constraints; what remains moves the witness without changing
/// its marginals. The witness is unique when no such direction admits a
/// step above `step_tol` in either sign.
pub fn uniqueness_probe(witness: &DensityState, targets: &[DensityState], params: &ProbeParams) -> Result<UniquenessReport> {
    let tol = &params.tolerances;
    let check = verify_extension(&witness.to_operator(), targets, tol)?;
    if check.max_marginal_error > params.tol_marginal || check.min_eigenvalue < -params.tol_marginal.max(tol.tol_psd) {
        return Err(Error::Precondition(format!(
            "witness is not feasible: marginal error {:.3e}, min eigenvalue {:.3e}",
            check.max_marginal_error, check.min_eigenvalue
        )));
    }
    let face = Face::new(targets, tol)?;
    let r = face.rank();
    let x = face.compress(witness.matrix());
    let floor = linalg::min_eigenvalue(&x).min(0.0) - tol.tol_psd;
    let affine = face.affine.as_ref().expect("a feasible witness implies a nonempty face");
    let union = &face.union;
    let n = union.len();
    let d = union.dim();
    let mut free_directions = Vec::new();
    let mut tested = 0;
    for idx in 0..1usize << (2 * n) {
        let assignment = index_to_assignment(n, idx);
        if is_local(union, targets, &assignment) {
            continue;
        }
        let m = Monomial::from_index(union, idx);
        let factor = if m.adjoint_sign() > 0.0 { C64::new(1.0, 0.0) } else { C64::new(0.0, 1.0) };
        let h = monomial_string(&assignment).to_matrix(d) * factor;
        let coords = affine.null_component(&linalg::herm_to_coords(&face.compress(&h)));
        let norm = coords.norm();
        if norm <= NULL_CUTOFF {
            continue;
        }
        tested += 1;
        let e = linalg::coords_to_herm(&(coords / norm), r);
        let step_plus = max_step(&x, &e, floor);
        let step_minus = max_step(&x, &(-&e), floor);
        if step_plus > params.step_tol || step_minus > params.step_tol {
            free_directions.push(FreeDirection {
                monomial: m.to_string(),
                step_plus,
                step_minus,
            });
        }
    }
    Ok(UniquenessReport {
        unique: free_directions.is_empty(),
        free_directions,
        directions_tested: tested,
        face_dimension: r,
    })
}
