//! Twisted tensor products of representations.
//!
//! Each factor carries a representation `pi_i` of its own mode algebra, a
//! self-adjoint unitary `u_i` implementing the grading, and a cyclic vector.
//! On the tensor product a generator of factor `i` acts as
//! `u_1 (x) ... (x) u_{i-1} (x) pi_i(a) (x) 1 (x) ...`, which restores the
//! anticommutation between different factors. Because every image is a
//! Kronecker product, a product of images is the Kronecker product of the
//! per-factor products, and the vector state factorizes into per-factor
//! inner products.

use nalgebra::{DMatrix, DVector};

use crate::car;
use crate::error::Result;
use crate::modes::ModeSet;
use crate::pauli::mode_factor;
use crate::states::matrix_from_moments;
use crate::{linalg, C64};

#[derive(Clone, Debug)]
pub(crate) struct RepFactor {
    modes: ModeSet,
    /// `images[k][j]` is `pi(u_j)` for the local mode at position `k`.
    images: Vec<[DMatrix<C64>; 4]>,
    grading: DMatrix<C64>,
    omega: DVector<C64>,
}

impl RepFactor {
    /// The defining representation on `C^{2^n}` with cyclic vector `omega`
    /// and grading unitary `grading`.
    pub fn defining(modes: &ModeSet, omega: DVector<C64>, grading: DMatrix<C64>) -> Self {
        let n = modes.len();
        let d = modes.dim();
        let images = (0..n)
            .map(|k| std::array::from_fn(|j| mode_factor(n, k, j as u8).to_matrix(d)))
            .collect();
        Self {
            modes: modes.clone(),
            images,
            grading,
            omega,
        }
    }

    /// GNS representation of `rho` realized by purification:
    /// `pi(A) = A (x) 1` on `C^d (x) C^d`, cyclic vector `vec(sqrt(rho))`,
    /// grading `Gamma (x) Gamma`.
    ///
    /// `rho` only needs to be Hermitian and positive; the vector is not
    /// normalized so positive functionals of any trace are allowed.
    pub fn purified(modes: &ModeSet, rho: &DMatrix<C64>) -> Self {
        let n = modes.len();
        let d = modes.dim();
        let id = DMatrix::<C64>::identity(d, d);
        let images = (0..n)
            .map(|k| std::array::from_fn(|j| mode_factor(n, k, j as u8).to_matrix(d).kronecker(&id)))
            .collect();
        let gamma = car::parity_operator(modes).into_matrix();
        Self {
            modes: modes.clone(),
            images,
            grading: gamma.kronecker(&gamma),
            omega: linalg::vec_row_major(&linalg::psd_sqrt(rho)),
        }
    }

    #[cfg(test)]
    pub fn dim(&self) -> usize {
        self.omega.len()
    }
}

/// The joint system of several factors with pairwise-disjoint modes.
#[derive(Clone, Debug)]
pub(crate) struct TwistedProduct {
    modes: ModeSet,
    factors: Vec<RepFactor>,
    /// For each global position: (factor index, local position).
    owner: Vec<(usize, usize)>,
}

impl TwistedProduct {
    pub fn new(factors: Vec<RepFactor>) -> Result<Self> {
        let modes = crate::modes::disjoint_union(factors.iter().map(|f| &f.modes))?;
        let owner = modes
            .iter()
            .map(|m| {
                factors
                    .iter()
                    .enumerate()
                    .find_map(|(i, f)| f.modes.position(m).map(|p| (i, p)))
                    .expect("mode comes from some factor")
            })
            .collect();
        Ok(Self { modes, factors, owner })
    }

    pub fn modes(&self) -> &ModeSet {
        &self.modes
    }

    /// Applies the factor-`i` component of `pi(U_J)` to `v`.
    fn apply_component(&self, i: usize, assignment: &[u8], v: &DVector<C64>) -> DVector<C64> {
        let factor = &self.factors[i];
        let mut out = v.clone();
        // Rightmost mode acts first.
        for (pos, &j) in assignment.iter().enumerate().rev() {
            let (owner, local) = self.owner[pos];
            if owner == i {
                out = &factor.images[local][j as usize] * out;
            } else if owner > i && (j == 1 || j == 2) {
                out = &factor.grading * out;
            }
        }
        out
    }

    /// `<Omega, pi(U_J) Omega>` for the product vector.
    pub fn moment(&self, assignment: &[u8]) -> C64 {
        (0..self.factors.len())
            .map(|i| {
                let f = &self.factors[i];
                f.omega.dotc(&self.apply_component(i, assignment, &f.omega))
            })
            .product()
    }

    /// The density matrix on the joint modes whose monomial values are the
    /// vector-state moments.
    pub fn state_matrix(&self) -> DMatrix<C64> {
        let n = self.modes.len();
        let moments: Vec<C64> = (0..1usize << (2 * n))
            .map(|idx| self.moment(&car::index_to_assignment(n, idx)))
            .collect();
        linalg::hermitian_part(&matrix_from_moments(&self.modes, &moments))
    }

    /// Dense image of `a_mode` (or its adjoint) on the full tensor space.
    #[cfg(test)]
    pub fn generator_image(&self, mode: u32, dagger: bool) -> DMatrix<C64> {
        let pos = self.modes.position(mode).expect("mode present");
        let (owner, local) = self.owner[pos];
        let half = C64::new(0.5, 0.0);
        let mut out = DMatrix::<C64>::identity(1, 1);
        for (i, f) in self.factors.iter().enumerate() {
            let piece = if i < owner {
                f.grading.clone()
            } else if i == owner {
                // a = (u1 + i u2) / 2 with u2 = i(a - a*)
                let [_, u1, u2, _] = &f.images[local];
                let s = if dagger { -1.0 } else { 1.0 };
                (u1 - u2 * C64::new(0.0, s)) * half
            } else {
                DMatrix::identity(f.dim(), f.dim())
            };
            out = out.kronecker(&piece);
        }
        out
    }
}
