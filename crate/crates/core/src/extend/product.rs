use nalgebra::DMatrix;

use super::{Blocks, ExtensionDecision, Reason};
use crate::car::{assignment_to_index, index_to_assignment};
use crate::error::{Error, Result};
use crate::rep::{RepFactor, TwistedProduct};
use crate::states::{is_even, matrix_from_moments, DensityState, Tolerances};
use crate::{linalg, C64};

fn check_inputs(states: &[DensityState]) -> Result<Blocks> {
    if states.len() < 2 {
        return Err(Error::Precondition(format!(
            "a product extension needs at least two states, got {}",
            states.len()
        )));
    }
    Blocks::new(states.iter().map(|s| s.modes()))
}

/// Exists iff at most one of the states is non-even.
pub fn decide_product_extension(states: &[DensityState], tol: &Tolerances) -> Result<ExtensionDecision> {
    check_inputs(states)?;
    let even_flags: Vec<bool> = states.iter().map(|s| is_even(s, tol)).collect();
    let odd_count = even_flags.iter().filter(|e| !**e).count();
    let exists = odd_count <= 1;
    let witness = if exists { Some(product_extension(states, tol)?) } else { None };
    Ok(ExtensionDecision {
        exists,
        reason: if exists { Reason::AllButOneEven } else { Reason::TooManyOddStates },
        p: None,
        lambda: None,
        threshold: None,
        even_flags,
        witness,
    })
}

/// The matrix with monomial values `sign(J) prod_i phi_i(M_i)`.
///
/// Defined for any inputs. It is Hermitian and positive only when at most one
/// factor is non-even; otherwise the products of odd moments make it fail
/// to be self-adjoint.
pub(crate) fn product_functional(states: &[DensityState]) -> Result<(crate::ModeSet, DMatrix<C64>)> {
    let blocks = Blocks::new(states.iter().map(|s| s.modes()))?;
    let local: Vec<Vec<C64>> = states.iter().map(DensityState::moments).collect();
    let n = blocks.union().len();
    let moments: Vec<C64> = (0..1usize << (2 * n))
        .map(|idx| {
            let (parts, sign) = blocks.split(&index_to_assignment(n, idx));
            parts
                .iter()
                .zip(&local)
                .map(|(a, m)| m[assignment_to_index(a)])
                .product::<C64>()
                * sign
        })
        .collect();
    let union = blocks.union().clone();
    let rho = matrix_from_moments(&union, &moments);
    Ok((union, rho))
}

/// `phi(U_J) = sign(J) prod_i phi_i(M_i)` on the union of the mode sets.
pub fn product_extension(states: &[DensityState], tol: &Tolerances) -> Result<DensityState> {
    check_inputs(states)?;
    let odd = states.iter().filter(|s| !is_even(s, tol)).count();
    if odd > 1 {
        return Err(Error::Precondition(format!(
            "{odd} states are not even; a product extension needs all but one even"
        )));
    }
    let (union, rho) = product_functional(states)?;
    DensityState::new(union, linalg::hermitian_part(&rho), tol)
}

/// The same state as a vector state of the twisted tensor product of GNS
/// representations, with the non-even factor (if any) placed last so that
/// its grading unitary is never used.
pub fn product_extension_via_representation(states: &[DensityState], tol: &Tolerances) -> Result<DensityState> {
    check_inputs(states)?;
    let mut order: Vec<&DensityState> = states.iter().filter(|s| is_even(s, tol)).collect();
    let odd: Vec<&DensityState> = states.iter().filter(|s| !is_even(s, tol)).collect();
    if odd.len() > 1 {
        return Err(Error::Precondition(format!("{} states are not even", odd.len())));
    }
    order.extend(odd);
    let factors = order.iter().map(|s| RepFactor::purified(s.modes(), s.matrix())).collect();
    let tp = TwistedProduct::new(factors)?;
    DensityState::new(tp.modes().clone(), tp.state_matrix(), tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modes::ModeSet;
    use crate::states::{random_state, restrict, StateKind};

    fn ms(v: &[u32]) -> ModeSet {
        ModeSet::new(v.to_vec()).unwrap()
    }

    #[test]
    fn vacuum_product_is_vacuum() {
        let tol = Tolerances::default();
        let s = product_extension(&[DensityState::vacuum(&ms(&[1])), DensityState::vacuum(&ms(&[2]))], &tol).unwrap();
        let mut expect = DMatrix::<C64>::zeros(4, 4);
        expect[(0, 0)] = C64::new(1.0, 0.0);
        assert!(linalg::max_abs(&(s.matrix() - expect)) < 1e-14);
    }

    #[test]
    fn decisions_follow_the_odd_count() {
        let tol = Tolerances::default();
        let even = |m: u32, seed| random_state(&ms(&[m]), StateKind::EvenMixed, seed).unwrap();
        let odd = |m: u32, seed| random_state(&ms(&[m]), StateKind::Mixed, seed).unwrap();
        assert!(decide_product_extension(&[even(1, 1), even(2, 2), even(3, 3)], &tol).unwrap().exists);
        let d = decide_product_extension(&[odd(1, 1), even(2, 2)], &tol).unwrap();
        assert!(d.exists && d.reason == Reason::AllButOneEven);
        let d = decide_product_extension(&[odd(1, 1), odd(2, 2)], &tol).unwrap();
        assert!(!d.exists && d.reason == Reason::TooManyOddStates && d.witness.is_none());
        assert!(product_extension(&[odd(1, 1), odd(2, 2)], &tol).is_err());
        assert!(decide_product_extension(&[odd(1, 1), odd(1, 2)], &tol).is_err());
        assert!(decide_product_extension(&[odd(1, 1)], &tol).is_err());
    }

    #[test]
    fn interleaved_marginals_and_routes_agree() {
        let tol = Tolerances::default();
        let a = random_state(&ms(&[1, 3]), StateKind::Mixed, 5).unwrap();
        let b = random_state(&ms(&[2, 4]), StateKind::EvenMixed, 6).unwrap();
        let states = [a.clone(), b.clone()];
        let s = product_extension(&states, &tol).unwrap();
        let r = product_extension_via_representation(&states, &tol).unwrap();
        assert!(linalg::max_abs(&(s.matrix() - r.matrix())) < 1e-12);
        for part in &states {
            let m = restrict(&s, part.modes(), &tol).unwrap();
            assert!(linalg::max_abs(&(m.matrix() - part.matrix())) < 1e-12);
        }
    }
}
