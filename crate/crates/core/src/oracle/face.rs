//! The face of the PSD cone cut out by the marginal supports, and the
//! marginal constraints restricted to it.

use nalgebra::{DMatrix, DVector};

use crate::car::{self, lift_assignment, Monomial};
use crate::error::{Error, Result};
use crate::extend::Blocks;
use crate::modes::ModeSet;
use crate::pauli::{monomial_string, PauliString};
use crate::states::{DensityState, Tolerances};
use crate::{linalg, C64};

/// Eigenvalue slack when intersecting support projectors.
const SUPPORT_SLACK: f64 = 1e-8;
/// Relative singular-value cutoff for the constraint pseudo-inverse.
const PINV_RTOL: f64 = 1e-12;

/// A Hermitianized local monomial, embedded in the union, with its target
/// value.
#[derive(Clone, Copy, Debug)]
pub(crate) struct LocalConstraint {
    pub pauli: PauliString,
    /// `i` when the monomial is skew-adjoint, `1` otherwise.
    pub factor: C64,
    pub value: f64,
}

impl LocalConstraint {
    pub fn hermitian(&self, dim: usize) -> DMatrix<C64> {
        self.pauli.to_matrix(dim) * self.factor
    }
}

/// All marginal constraints: the identity first, then every non-identity
/// monomial of every target.
pub(crate) fn local_constraints(union: &ModeSet, targets: &[DensityState]) -> Result<Vec<LocalConstraint>> {
    let n = union.len();
    let mut out = vec![LocalConstraint {
        pauli: PauliString::IDENTITY,
        factor: C64::new(1.0, 0.0),
        value: 1.0,
    }];
    for t in targets {
        let positions = t.modes().positions_in(union)?;
        for idx in 1..1usize << (2 * t.modes().len()) {
            let m = Monomial::from_index(t.modes(), idx);
            let factor = if m.adjoint_sign() > 0.0 { C64::new(1.0, 0.0) } else { C64::new(0.0, 1.0) };
            let local = m.pauli();
            let value = (local.expectation(t.matrix()) * factor).re;
            let pauli = monomial_string(&lift_assignment(m.assignment(), &positions, n));
            out.push(LocalConstraint { pauli, factor, value });
        }
    }
    Ok(out)
}

/// Whether a global monomial lies inside a single target's algebra.
pub(crate) fn is_local(union: &ModeSet, targets: &[DensityState], assignment: &[u8]) -> bool {
    let support: Vec<u32> = union.iter().zip(assignment).filter(|(_, &j)| j != 0).map(|(m, _)| m).collect();
    support.is_empty() || targets.iter().any(|t| support.iter().all(|&m| t.modes().contains(m)))
}

/// Least-squares projection onto `{x : L x = b}` in real Hermitian
/// coordinates.
#[derive(Clone, Debug)]
pub(crate) struct AffineCoords {
    l: DMatrix<f64>,
    b: DVector<f64>,
    pinv: DMatrix<f64>,
    /// `|L L^+ b - b|`; positive when the constraints are inconsistent.
    pub inconsistency: f64,
}

impl AffineCoords {
    pub fn new(l: DMatrix<f64>, b: DVector<f64>) -> Result<Self> {
        let svd = l.clone().svd(true, true);
        let smax = svd.singular_values.iter().fold(0.0f64, |a, &s| a.max(s));
        let pinv = svd
            .pseudo_inverse(PINV_RTOL * smax.max(1.0))
            .map_err(|e| Error::Numerical(format!("pseudo-inverse failed: {e}")))?;
        let inconsistency = (&l * (&pinv * &b) - &b).norm();
        Ok(Self { l, b, pinv, inconsistency })
    }

    pub fn project(&self, x: &DVector<f64>) -> DVector<f64> {
        x - &self.pinv * (&self.l * x - &self.b)
    }

    /// Component of `c` in the null space of `L`.
    pub fn null_component(&self, c: &DVector<f64>) -> DVector<f64> {
        c - &self.pinv * (&self.l * c)
    }
}

/// Isometry `V` onto the common support of all embedded marginal supports,
/// together with the constraints expressed on `V^dagger X V`.
#[derive(Clone, Debug)]
pub(crate) struct Face {
    pub union: ModeSet,
    pub v: DMatrix<C64>,
    pub constraints: Vec<LocalConstraint>,
    pub affine: Option<AffineCoords>,
}

impl Face {
    pub fn new(targets: &[DensityState], tol: &Tolerances) -> Result<Self> {
        if targets.len() < 2 {
            return Err(Error::InvalidParameter("the oracle needs at least two marginals".into()));
        }
        let blocks = Blocks::new(targets.iter().map(|t| t.modes()))?;
        let union = blocks.union().clone();
        let d = union.dim();
        let mut sum = DMatrix::<C64>::zeros(d, d);
        for t in targets {
            let (vals, vecs) = linalg::eigh(t.matrix());
            let s = linalg::columns_where(&vals, &vecs, |x| x > tol.tol_psd);
            let p = car::Operator::new(t.modes().clone(), &s * s.adjoint())?;
            sum += car::embed(&p, &union)?.into_matrix();
        }
        let k = targets.len() as f64;
        let (vals, vecs) = linalg::eigh(&sum);
        let mut v = linalg::columns_where(&vals, &vecs, |x| x >= k - SUPPORT_SLACK);
        if v.ncols() == d {
            // Coefficient overwriting needs the standard basis.
            v = DMatrix::identity(d, d);
        }
        let constraints = local_constraints(&union, targets)?;
        let mut face = Self {
            union,
            v,
            constraints,
            affine: None,
        };
        if face.rank() > 0 {
            face.affine = Some(face.build_affine()?);
        }
        Ok(face)
    }

    pub fn rank(&self) -> usize {
        self.v.ncols()
    }

    pub fn is_full(&self) -> bool {
        self.rank() == self.union.dim()
    }

    fn build_affine(&self) -> Result<AffineCoords> {
        let r = self.rank();
        let d = self.union.dim();
        let mut l = DMatrix::<f64>::zeros(self.constraints.len(), r * r);
        let mut b = DVector::<f64>::zeros(self.constraints.len());
        for (row, c) in self.constraints.iter().enumerate() {
            let h = self.compress(&c.hermitian(d));
            l.set_row(row, &linalg::herm_to_coords(&h).transpose());
            b[row] = c.value;
        }
        AffineCoords::new(l, b)
    }

    pub fn compress(&self, m: &DMatrix<C64>) -> DMatrix<C64> {
        self.v.adjoint() * m * &self.v
    }

    pub fn expand(&self, x: &DMatrix<C64>) -> DMatrix<C64> {
        &self.v * x * self.v.adjoint()
    }

    /// Frobenius projection onto the affine set within the face.
    pub fn project_affine(&self, x: &DMatrix<C64>) -> DMatrix<C64> {
        if self.is_full() {
            overwrite_coefficients(x, &self.constraints)
        } else {
            let aff = self.affine.as_ref().expect("nonempty face");
            linalg::coords_to_herm(&aff.project(&linalg::herm_to_coords(x)), self.rank())
        }
    }
}

/// Sets every constrained monomial value to its target and leaves all other
/// monomial coefficients alone.
pub(crate) fn overwrite_coefficients(x: &DMatrix<C64>, constraints: &[LocalConstraint]) -> DMatrix<C64> {
    let d = x.nrows();
    let scale = 1.0 / d as f64;
    let mut out = linalg::hermitian_part(x);
    for c in constraints {
        // value of the Hermitian monomial H = factor * U is Tr(x H)
        let current = (c.pauli.expectation(x) * c.factor).re;
        let delta = (c.value - current) * scale;
        if delta != 0.0 {
            // H^dagger = H and Tr(H H) = d
            c.pauli.adjoint().add_scaled_to(c.factor.conj() * delta, &mut out);
        }
    }
    out
}
