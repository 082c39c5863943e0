//! Density-matrix states on `A(I)` and the scalar quantities built on them.

mod random;

pub use random::{random_state, StateKind};

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::car::{self, Operator};
use crate::error::{Error, Result};
use crate::modes::ModeSet;
use crate::pauli::monomial_string;
use crate::{linalg, C64};

/// Numerical tolerances shared by every check in the crate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Tolerances {
    /// Smallest admissible eigenvalue is `-tol_psd`; also the support cutoff.
    pub tol_psd: f64,
    pub tol_trace: f64,
    pub tol_hermitian: f64,
    /// Equality of derived quantities (evenness, purity, criteria).
    pub tol_eq: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            tol_psd: 1e-9,
            tol_trace: 1e-10,
            tol_hermitian: 1e-10,
            tol_eq: 1e-8,
        }
    }
}

impl Tolerances {
    pub fn validate(&self) -> Result<()> {
        let all = [self.tol_psd, self.tol_trace, self.tol_hermitian, self.tol_eq];
        if all.iter().all(|t| t.is_finite() && *t >= 0.0) {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("tolerances must be non-negative: {self:?}")))
        }
    }
}

/// How far a matrix is from being a density matrix.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct StateCheck {
    pub hermiticity_error: f64,
    pub trace_error: f64,
    pub min_eigenvalue: f64,
}

impl StateCheck {
    pub fn of(matrix: &DMatrix<C64>) -> Self {
        let hermiticity_error = linalg::max_abs(&(matrix - matrix.adjoint()));
        let trace_error = (matrix.trace() - C64::new(1.0, 0.0)).norm();
        let min_eigenvalue = linalg::min_eigenvalue(matrix);
        Self {
            hermiticity_error,
            trace_error,
            min_eigenvalue,
        }
    }

    pub fn is_valid(&self, tol: &Tolerances) -> bool {
        self.hermiticity_error <= tol.tol_hermitian
            && self.trace_error <= tol.tol_trace
            && self.min_eigenvalue >= -tol.tol_psd
    }
}

/// A state `phi(A) = Tr(rho A)` on `A(I)`.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityState {
    modes: ModeSet,
    rho: DMatrix<C64>,
}

impl DensityState {
    /// Validates hermiticity, unit trace and positivity, then stores the
    /// Hermitian part.
    pub fn new(modes: ModeSet, rho: DMatrix<C64>, tol: &Tolerances) -> Result<Self> {
        let op = Operator::new(modes, rho)?;
        Self::from_operator(op, tol)
    }

    pub fn from_operator(op: Operator, tol: &Tolerances) -> Result<Self> {
        let check = StateCheck::of(op.matrix());
        if !check.is_valid(tol) {
            return Err(Error::InvalidState(format!(
                "hermiticity error {:.3e}, trace error {:.3e}, min eigenvalue {:.3e}",
                check.hermiticity_error, check.trace_error, check.min_eigenvalue
            )));
        }
        let modes = op.modes().clone();
        Ok(Self {
            modes,
            rho: linalg::hermitian_part(op.matrix()),
        })
    }

    /// Skips validation; for matrices that are states by construction.
    pub(crate) fn from_parts(modes: ModeSet, rho: DMatrix<C64>) -> Self {
        Self { modes, rho }
    }

    /// Projector onto `psi / |psi|`.
    pub fn pure(modes: ModeSet, psi: &DVector<C64>) -> Result<Self> {
        if psi.len() != modes.dim() {
            return Err(Error::Dimension {
                expected: modes.dim(),
                rows: psi.len(),
                cols: 1,
            });
        }
        let norm = psi.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::InvalidState("state vector has zero norm".into()));
        }
        let v = psi / C64::new(norm, 0.0);
        Ok(Self::from_parts(modes, &v * v.adjoint()))
    }

    /// All modes empty.
    pub fn vacuum(modes: &ModeSet) -> Self {
        let mut psi = DVector::zeros(modes.dim());
        psi[0] = C64::new(1.0, 0.0);
        Self::pure(modes.clone(), &psi).expect("unit vector")
    }

    pub fn maximally_mixed(modes: &ModeSet) -> Self {
        let d = modes.dim();
        Self::from_parts(modes.clone(), DMatrix::identity(d, d) / C64::new(d as f64, 0.0))
    }

    pub fn modes(&self) -> &ModeSet {
        &self.modes
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.rho
    }

    pub fn to_operator(&self) -> Operator {
        Operator::from_parts(self.modes.clone(), self.rho.clone())
    }

    /// The state `phi o Theta`, with density matrix `Gamma rho Gamma`.
    pub fn theta(&self) -> Self {
        let mut rho = self.rho.clone();
        car::theta_in_place(&mut rho);
        Self::from_parts(self.modes.clone(), rho)
    }

    /// Ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        linalg::eigvalsh(&self.rho)
    }

    /// `Tr(rho^2)`.
    pub fn purity(&self) -> f64 {
        self.rho.iter().map(|v| v.norm_sqr()).sum()
    }

    /// Unit eigenvector of the largest eigenvalue.
    pub fn dominant_vector(&self) -> DVector<C64> {
        let (_, vecs) = linalg::eigh(&self.rho);
        vecs.column(vecs.ncols() - 1).into_owned()
    }

    /// `phi(U_J)` for every monomial over the state's own modes, indexed by
    /// [`car::Monomial::index`].
    pub(crate) fn moments(&self) -> Vec<C64> {
        matrix_moments(&self.modes, &self.rho)
    }
}

/// `Tr(m U_J)` for every monomial over `modes`.
pub(crate) fn matrix_moments(modes: &ModeSet, m: &DMatrix<C64>) -> Vec<C64> {
    let n = modes.len();
    (0..1usize << (2 * n))
        .map(|i| monomial_string(&car::index_to_assignment(n, i)).expectation(m))
        .collect()
}

/// `rho = 2^{-n} sum_J phi(U_J) U_J^dagger`: the matrix with prescribed
/// values on every monomial.
pub(crate) fn matrix_from_moments(modes: &ModeSet, moments: &[C64]) -> DMatrix<C64> {
    let n = modes.len();
    let d = modes.dim();
    let mut m = DMatrix::zeros(d, d);
    let scale = 1.0 / d as f64;
    for (i, &v) in moments.iter().enumerate() {
        if v.norm_sqr() > 0.0 {
            let u = monomial_string(&car::index_to_assignment(n, i)).adjoint();
            u.add_scaled_to(v * scale, &mut m);
        }
    }
    m
}

/// `phi(A) = Tr(rho A)`, embedding `A` into the state's modes when needed.
pub fn evaluate(state: &DensityState, op: &Operator) -> Result<C64> {
    let a = car::embed(op, &state.modes)?;
    Ok((state.rho.clone() * a.matrix()).trace())
}

/// Marginal of an arbitrary matrix on `sub`, by monomial coefficients.
pub(crate) fn restrict_matrix(modes: &ModeSet, matrix: &DMatrix<C64>, sub: &ModeSet) -> Result<DMatrix<C64>> {
    let positions = sub.positions_in(modes)?;
    let n = modes.len();
    let m = sub.len();
    let moments: Vec<C64> = (0..1usize << (2 * m))
        .map(|i| {
            let local = car::index_to_assignment(m, i);
            monomial_string(&car::lift_assignment(&local, &positions, n)).expectation(matrix)
        })
        .collect();
    Ok(matrix_from_moments(sub, &moments))
}

/// The restriction of `state` to the subalgebra `A(sub)`.
pub fn restrict(state: &DensityState, sub: &ModeSet, tol: &Tolerances) -> Result<DensityState> {
    let sigma = restrict_matrix(&state.modes, &state.rho, sub)?;
    DensityState::new(sub.clone(), sigma, tol)
        .map_err(|e| Error::Numerical(format!("restriction is not a state: {e}")))
}

/// `|| rho - Gamma rho Gamma ||_F <= tol_eq`.
pub fn is_even(state: &DensityState, tol: &Tolerances) -> bool {
    odd_weight(state) <= tol.tol_eq
}

/// Frobenius norm of `rho - Gamma rho Gamma`.
pub fn odd_weight(state: &DensityState) -> f64 {
    (&state.rho - state.theta().rho).norm()
}

pub fn is_pure(state: &DensityState, tol: &Tolerances) -> bool {
    state.purity() >= 1.0 - tol.tol_eq
}

/// Eigenvalues below this fraction of the largest are treated as roundoff
/// inside fidelity square roots, where `sqrt` would amplify them.
const FIDELITY_CUTOFF: f64 = 1e-13;

fn cut_sqrt(values: &[f64]) -> Vec<f64> {
    let top = values.iter().fold(0.0f64, |a, &v| a.max(v));
    values
        .iter()
        .map(|&v| if v > FIDELITY_CUTOFF * top { v.sqrt() } else { 0.0 })
        .collect()
}

/// Uhlmann fidelity `(Tr |sqrt(rho) sqrt(sigma)|)^2`.
pub fn transition_probability(phi: &DensityState, psi: &DensityState) -> Result<f64> {
    if phi.modes != psi.modes {
        return Err(Error::ModeMismatch(phi.modes.clone(), psi.modes.clone()));
    }
    let (vals, vecs) = linalg::eigh(&phi.rho);
    let roots = cut_sqrt(&vals);
    let s = linalg::spectral_map(&roots, &vecs, |v| v);
    let inner = linalg::hermitian_part(&(&s * &psi.rho * &s));
    let root_trace: f64 = cut_sqrt(&linalg::eigvalsh(&inner)).iter().sum();
    Ok((root_trace * root_trace).clamp(0.0, 1.0))
}

/// `p(phi) = P(phi, phi Theta)^{1/2}`; the closed form `|<Omega, Gamma Omega>|`
/// is used for pure states.
pub fn p_value(state: &DensityState, tol: &Tolerances) -> f64 {
    if is_pure(state, tol) {
        p_value_pure(state)
    } else {
        p_value_fidelity(state)
    }
}

/// `|<Omega, Gamma Omega>|` for the dominant eigenvector `Omega`.
pub fn p_value_pure(state: &DensityState) -> f64 {
    let omega = state.dominant_vector();
    let g = car::parity_operator(&state.modes);
    (omega.adjoint() * g.matrix() * &omega)[(0, 0)].norm().min(1.0)
}

pub fn p_value_fidelity(state: &DensityState) -> f64 {
    transition_probability(state, &state.theta())
        .expect("same modes")
        .sqrt()
}

/// `sup { l : phi - l psi >= 0 }`.
///
/// Zero when `psi` has weight outside the numerical support of `phi`;
/// otherwise `1 / mu_max` for the top eigenvalue of
/// `phi^{-1/2} psi phi^{-1/2}` on that support.
pub fn lambda(phi: &DensityState, psi: &DensityState, tol: &Tolerances) -> Result<f64> {
    if phi.modes != psi.modes {
        return Err(Error::ModeMismatch(phi.modes.clone(), psi.modes.clone()));
    }
    let (vals, vecs) = linalg::eigh(&phi.rho);
    let support = linalg::columns_where(&vals, &vecs, |v| v > tol.tol_psd);
    let kernel = linalg::columns_where(&vals, &vecs, |v| v <= tol.tol_psd);
    if kernel.ncols() > 0 {
        let outside = (kernel.adjoint() * &psi.rho * &kernel).trace().re;
        if outside > tol.tol_psd {
            return Ok(0.0);
        }
    }
    let inv_sqrt: Vec<f64> = vals.iter().filter(|&&v| v > tol.tol_psd).map(|v| 1.0 / v.sqrt()).collect();
    let mut w = support.adjoint() * &psi.rho * &support;
    for r in 0..w.nrows() {
        for c in 0..w.ncols() {
            w[(r, c)] *= inv_sqrt[r] * inv_sqrt[c];
        }
    }
    let mu_max = linalg::eigvalsh(&w).last().copied().unwrap_or(0.0);
    if mu_max <= 0.0 {
        return Err(Error::Numerical("psi vanishes on the support of phi".into()));
    }
    Ok((1.0 / mu_max).clamp(0.0, 1.0))
}

/// `lambda(phi) = lambda(phi, phi Theta)`; equals 1 exactly for even states.
pub fn lambda_theta(phi: &DensityState, tol: &Tolerances) -> f64 {
    lambda(phi, &phi.theta(), tol).expect("same modes")
}
