use nalgebra::DMatrix;

use super::product::product_extension;
use super::{Blocks, ExtensionDecision, Reason, U1Certificate};
use crate::car::{self, assignment_parity, assignment_to_index, index_to_assignment, Monomial, Parity};
use crate::error::{Error, Result};
use crate::modes::ModeSet;
use crate::rep::{RepFactor, TwistedProduct};
use crate::states::{
    is_even, is_pure, lambda_theta, matrix_from_moments, matrix_moments, DensityState, Tolerances,
};
use crate::{linalg, C64};

fn require_pure(phi1: &DensityState, tol: &Tolerances) -> Result<()> {
    if is_pure(phi1, tol) {
        Ok(())
    } else {
        Err(Error::Precondition(format!(
            "first state must be pure (purity {:.6})",
            phi1.purity()
        )))
    }
}

/// `u1 = s Gamma` with `s` making `<Omega, u1 Omega>` non-negative.
pub fn u1_operator(phi1: &DensityState, tol: &Tolerances) -> Result<U1Certificate> {
    require_pure(phi1, tol)?;
    let omega = phi1.dominant_vector();
    let gamma = car::parity_operator(phi1.modes());
    let raw = omega.dotc(&(gamma.matrix() * &omega)).re;
    let sign_ambiguous = raw.abs() <= tol.tol_eq;
    let s = if sign_ambiguous || raw > 0.0 { 1.0 } else { -1.0 };
    Ok(U1Certificate {
        u1: gamma.scale_real(s),
        overlap: (s * raw).max(0.0),
        sign_ambiguous,
    })
}

fn odd_part(rho: &DMatrix<C64>) -> (DMatrix<C64>, DMatrix<C64>) {
    let mut flipped = rho.clone();
    car::theta_in_place(&mut flipped);
    let half = C64::new(0.5, 0.0);
    ((rho + &flipped) * half, (rho - flipped) * half)
}

/// Monomial assembly of
/// `phi(M1 M2) = Tr(rho1 M1 u1^{|M2|}) psi(M2)`
/// where `|M2|` is the parity of `M2`.
fn assemble_joint(phi1: &DensityState, u1: &DMatrix<C64>, modes2: &ModeSet, second: &DMatrix<C64>) -> Result<(ModeSet, DMatrix<C64>)> {
    let blocks = Blocks::new([phi1.modes(), modes2])?;
    let plain = phi1.moments();
    let twisted = matrix_moments(phi1.modes(), &(u1 * phi1.matrix()));
    let psi = matrix_moments(modes2, second);
    let n = blocks.union().len();
    let moments: Vec<C64> = (0..1usize << (2 * n))
        .map(|idx| {
            let (parts, sign) = blocks.split(&index_to_assignment(n, idx));
            let i1 = assignment_to_index(&parts[0]);
            let first = match assignment_parity(&parts[1]) {
                Parity::Even => plain[i1],
                Parity::Odd => twisted[i1],
            };
            first * psi[assignment_to_index(&parts[1])] * sign
        })
        .collect();
    let union = blocks.union().clone();
    let rho = linalg::hermitian_part(&matrix_from_moments(&union, &moments));
    Ok((union, rho))
}

/// The vector state `Omega (x) Omega'` of the twisted product of the defining
/// representation of `phi1` (graded by `u1`) and the GNS representation of
/// the positive functional `second`.
fn represent_joint(phi1: &DensityState, u1: &DMatrix<C64>, modes2: &ModeSet, second: &DMatrix<C64>) -> Result<(ModeSet, DMatrix<C64>)> {
    let tp = TwistedProduct::new(vec![
        RepFactor::defining(phi1.modes(), phi1.dominant_vector(), u1.clone()),
        RepFactor::purified(modes2, second),
    ])?;
    Ok((tp.modes().clone(), tp.state_matrix()))
}

/// Criterion for a pure first marginal: an extension exists iff
/// `lambda(phi2) >= (1 - p) / (1 + p)`.
pub fn decide_joint_pure(phi1: &DensityState, phi2: &DensityState, tol: &Tolerances) -> Result<ExtensionDecision> {
    require_pure(phi1, tol)?;
    Blocks::new([phi1.modes(), phi2.modes()])?;
    let cert = u1_operator(phi1, tol)?;
    let p = cert.overlap;
    let lambda = lambda_theta(phi2, tol);
    let threshold = (1.0 - p) / (1.0 + p);
    let even_flags = vec![is_even(phi1, tol), is_even(phi2, tol)];
    let decision = |exists, reason, witness| ExtensionDecision {
        exists,
        reason,
        p: Some(p),
        lambda: Some(lambda),
        threshold: Some(threshold),
        even_flags: even_flags.clone(),
        witness,
    };
    if p <= tol.tol_eq {
        if !even_flags[1] {
            return Ok(decision(false, Reason::EvenRequired, None));
        }
        let witness = product_extension(&[phi1.clone(), phi2.clone()], tol)?;
        let reason = if decompose_even_state(phi2, tol)?.is_some() {
            Reason::P0Family
        } else {
            Reason::EvenRequired
        };
        return Ok(decision(true, reason, Some(witness)));
    }
    let exists = lambda >= threshold - tol.tol_eq;
    let witness = if exists { Some(joint_extension_pure(phi1, phi2, tol)?) } else { None };
    Ok(decision(exists, Reason::CriterionLambdaVsP, witness))
}

/// `phi2' = phi2_+ + phi2_- / p`, positive exactly when the criterion holds.
fn shifted_second(phi1: &DensityState, phi2: &DensityState, tol: &Tolerances) -> Result<(U1Certificate, DMatrix<C64>)> {
    require_pure(phi1, tol)?;
    let cert = u1_operator(phi1, tol)?;
    let p = cert.overlap;
    if p <= tol.tol_eq {
        return Err(Error::Precondition(
            "p vanishes; the extension is not unique, use the p = 0 family".into(),
        ));
    }
    let lambda = lambda_theta(phi2, tol);
    let threshold = (1.0 - p) / (1.0 + p);
    if lambda < threshold - tol.tol_eq {
        return Err(Error::Precondition(format!(
            "no joint extension: lambda {lambda:.12} < threshold {threshold:.12}"
        )));
    }
    let (even, odd) = odd_part(phi2.matrix());
    Ok((cert, even + odd / C64::new(p, 0.0)))
}

/// The unique joint extension for pure `phi1` with `p(phi1) > 0`:
/// `phi(A1 A2) = phi1(A1) phi2(A2_+) + (1/p) <Omega, A1 u1 Omega> phi2(A2_-)`.
pub fn joint_extension_pure(phi1: &DensityState, phi2: &DensityState, tol: &Tolerances) -> Result<DensityState> {
    let (cert, second) = shifted_second(phi1, phi2, tol)?;
    let (union, rho) = assemble_joint(phi1, cert.u1.matrix(), phi2.modes(), &second)?;
    DensityState::new(union, rho, tol)
}

/// Same state, built as a vector state of the twisted tensor product.
pub fn joint_extension_pure_via_representation(phi1: &DensityState, phi2: &DensityState, tol: &Tolerances) -> Result<DensityState> {
    let (cert, second) = shifted_second(phi1, phi2, tol)?;
    let (union, rho) = represent_joint(phi1, cert.u1.matrix(), phi2.modes(), &second)?;
    DensityState::new(union, rho, tol)
}

/// Odd Hermitian directions compressed to the support of `phi2`, with the
/// largest steps in each sign that keep `rho2 + eps D` positive.
struct OddDirection {
    direction: DMatrix<C64>,
    step_up: f64,
    step_down: f64,
}

fn odd_directions(phi2: &DensityState, tol: &Tolerances) -> Vec<OddDirection> {
    let modes = phi2.modes();
    let d = modes.dim();
    let (vals, vecs) = linalg::eigh(phi2.matrix());
    let support = linalg::columns_where(&vals, &vecs, |v| v > tol.tol_psd);
    let inv_sqrt: Vec<f64> = vals.iter().filter(|&&v| v > tol.tol_psd).map(|v| 1.0 / v.sqrt()).collect();
    let norm = C64::new(1.0 / (d as f64).sqrt(), 0.0);
    let mut out = Vec::new();
    for idx in 0..1usize << (2 * modes.len()) {
        let m = Monomial::from_index(modes, idx);
        if m.parity() != Parity::Odd {
            continue;
        }
        let u = m.operator().into_matrix();
        let herm = if m.adjoint_sign() > 0.0 { u } else { u * C64::new(0.0, 1.0) };
        let k = support.adjoint() * (herm * norm) * &support;
        if k.norm() <= tol.tol_eq {
            continue;
        }
        let mut w = k.clone();
        for r in 0..w.nrows() {
            for c in 0..w.ncols() {
                w[(r, c)] *= inv_sqrt[r] * inv_sqrt[c];
            }
        }
        let mu = linalg::eigvalsh(&w);
        let (lo, hi) = (mu[0], mu[mu.len() - 1]);
        if lo >= 0.0 || hi <= 0.0 {
            // A traceless compressed direction always has both signs.
            continue;
        }
        out.push(OddDirection {
            direction: &support * k * support.adjoint(),
            step_up: 1.0 / -lo,
            step_down: 1.0 / hi,
        });
    }
    out
}

fn require_even(phi2: &DensityState, tol: &Tolerances) -> Result<()> {
    if is_even(phi2, tol) {
        Ok(())
    } else {
        Err(Error::Precondition("state must be even".into()))
    }
}

/// A state `phi~` with `phi~ != phi~ Theta` and `phi2 = (phi~ + phi~ Theta) / 2`,
/// or `None` if `phi2` admits no odd perturbation.
///
/// Scans odd monomial directions in index order and returns the first one
/// that can be pushed to the boundary of the positive cone.
pub fn decompose_even_state(phi2: &DensityState, tol: &Tolerances) -> Result<Option<DensityState>> {
    require_even(phi2, tol)?;
    odd_directions(phi2, tol)
        .into_iter()
        .find(|d| d.step_up > tol.tol_eq)
        .map(|d| boundary_state(phi2, &d.direction, d.step_up, tol))
        .transpose()
}

/// Every boundary decomposition, two per admissible odd direction.
pub fn odd_decompositions(phi2: &DensityState, tol: &Tolerances) -> Result<Vec<DensityState>> {
    require_even(phi2, tol)?;
    let mut out = Vec::new();
    for d in odd_directions(phi2, tol) {
        if d.step_up > tol.tol_eq {
            out.push(boundary_state(phi2, &d.direction, d.step_up, tol)?);
        }
        if d.step_down > tol.tol_eq {
            out.push(boundary_state(phi2, &d.direction, -d.step_down, tol)?);
        }
    }
    Ok(out)
}

fn boundary_state(phi2: &DensityState, direction: &DMatrix<C64>, eps: f64, tol: &Tolerances) -> Result<DensityState> {
    let rho = phi2.matrix() + direction * C64::new(eps, 0.0);
    DensityState::new(phi2.modes().clone(), rho, tol)
}

fn require_p_zero(phi1: &DensityState, tol: &Tolerances) -> Result<U1Certificate> {
    let cert = u1_operator(phi1, tol)?;
    if cert.overlap > tol.tol_eq {
        return Err(Error::Precondition(format!(
            "p = {:.3e} is nonzero; the extension is unique",
            cert.overlap
        )));
    }
    Ok(cert)
}

/// The extension `phi(A1 A2) = phi1(A1) phi2(A2_+) + <Omega, A1 u1 Omega> phi~(A2_-)`
/// for pure `phi1` with `p = 0`, where `phi2 = (phi~ + phi~ Theta) / 2`.
pub fn joint_extension_family_p0(phi1: &DensityState, tilde: &DensityState, tol: &Tolerances) -> Result<DensityState> {
    let cert = require_p_zero(phi1, tol)?;
    let (union, rho) = represent_joint(phi1, cert.u1.matrix(), tilde.modes(), tilde.matrix())?;
    DensityState::new(union, rho, tol)
}

/// Monomial-assembly counterpart of [`joint_extension_family_p0`].
pub fn joint_extension_family_p0_assembled(phi1: &DensityState, tilde: &DensityState, tol: &Tolerances) -> Result<DensityState> {
    let cert = require_p_zero(phi1, tol)?;
    let (union, rho) = assemble_joint(phi1, cert.u1.matrix(), tilde.modes(), tilde.matrix())?;
    DensityState::new(union, rho, tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::extend::product_extension;
    use crate::states::{evaluate, p_value, random_state, restrict, StateKind};
    use nalgebra::DVector;

    fn ms(v: &[u32]) -> ModeSet {
        ModeSet::new(v.to_vec()).unwrap()
    }

    fn one_mode_pure(m: u32, amps: [f64; 2]) -> DensityState {
        let psi = DVector::from_vec(vec![C64::new(amps[0], 0.0), C64::new(amps[1], 0.0)]);
        DensityState::pure(ms(&[m]), &psi).unwrap()
    }

    fn coherence_state(m: u32) -> DensityState {
        let c = |v| C64::new(v, 0.0);
        let rho = DMatrix::from_row_slice(2, 2, &[c(0.5), c(0.25), c(0.25), c(0.5)]);
        DensityState::new(ms(&[m]), rho, &Tolerances::default()).unwrap()
    }

    #[test]
    fn u1_examples() {
        let tol = Tolerances::default();
        let vac = one_mode_pure(1, [1.0, 0.0]);
        let c = u1_operator(&vac, &tol).unwrap();
        assert!(c.overlap == 1.0 && !c.sign_ambiguous && c.sign() == 1.0);
        let filled = one_mode_pure(1, [0.0, 1.0]);
        let c = u1_operator(&filled, &tol).unwrap();
        assert!(c.overlap == 1.0 && c.sign() == -1.0);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let c = u1_operator(&one_mode_pure(1, [s, s]), &tol).unwrap();
        assert!(c.overlap.abs() < 1e-15 && c.sign_ambiguous);
        let u = c.u1.matrix();
        assert!(linalg::max_abs(&(u * u - DMatrix::identity(2, 2))) < 1e-15);
        assert!(u1_operator(&DensityState::maximally_mixed(&ms(&[1])), &tol).is_err());
    }

    #[test]
    fn u1_implements_the_grading() {
        let tol = Tolerances::default();
        let modes = ms(&[1, 2]);
        let phi = random_state(&modes, StateKind::Pure, 4).unwrap();
        let u = u1_operator(&phi, &tol).unwrap().u1;
        for m in [1, 2] {
            let a = car::generator(&modes, m, false).unwrap();
            assert!((&(&u * &a) * &u).approx_eq(&car::theta(&a), 1e-14));
        }
    }

    #[test]
    fn boundary_instance() {
        let tol = Tolerances::default();
        let phi1 = one_mode_pure(1, [3f64.sqrt() / 2.0, 0.5]);
        let phi2 = coherence_state(2);
        let d = decide_joint_pure(&phi1, &phi2, &tol).unwrap();
        assert!(d.exists && d.reason == Reason::CriterionLambdaVsP);
        assert!((d.threshold.unwrap() - 1.0 / 3.0).abs() < 1e-12);
        let w = d.witness.unwrap();
        assert!(linalg::min_eigenvalue(w.matrix()) >= -1e-9);
        for part in [&phi1, &phi2] {
            let m = restrict(&w, part.modes(), &tol).unwrap();
            assert!(linalg::max_abs(&(m.matrix() - part.matrix())) < 1e-12);
        }
        let r = joint_extension_pure_via_representation(&phi1, &phi2, &tol).unwrap();
        assert!(linalg::max_abs(&(r.matrix() - w.matrix())) < 1e-10);
    }

    #[test]
    fn even_second_gives_product() {
        let tol = Tolerances::default();
        let phi1 = random_state(&ms(&[2]), StateKind::Pure, 1).unwrap();
        let phi2 = random_state(&ms(&[1, 3]), StateKind::EvenMixed, 2).unwrap();
        let j = joint_extension_pure(&phi1, &phi2, &tol).unwrap();
        let p = product_extension(&[phi1, phi2], &tol).unwrap();
        assert!(linalg::max_abs(&(j.matrix() - p.matrix())) < 1e-12);
    }

    #[test]
    fn p_zero_requires_even() {
        let tol = Tolerances::default();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let phi1 = one_mode_pure(1, [s, s]);
        assert!(p_value(&phi1, &tol) < 1e-12);
        let d = decide_joint_pure(&phi1, &coherence_state(2), &tol).unwrap();
        assert!(!d.exists && d.reason == Reason::EvenRequired);
        let d = decide_joint_pure(&phi1, &DensityState::maximally_mixed(&ms(&[2])), &tol).unwrap();
        assert!(d.exists && d.reason == Reason::P0Family);
        let d = decide_joint_pure(&phi1, &DensityState::vacuum(&ms(&[2])), &tol).unwrap();
        assert!(d.exists && d.reason == Reason::EvenRequired);
        assert!(joint_extension_pure(&phi1, &DensityState::vacuum(&ms(&[2])), &tol).is_err());
    }

    #[test]
    fn decomposition_examples() {
        let tol = Tolerances::default();
        let mixed = DensityState::maximally_mixed(&ms(&[2]));
        let t = decompose_even_state(&mixed, &tol).unwrap().unwrap();
        assert!(!is_even(&t, &tol));
        let sym = (t.matrix() + t.theta().matrix()) * C64::new(0.5, 0.0);
        assert!(linalg::max_abs(&(sym - mixed.matrix())) < 1e-12);
        assert!(decompose_even_state(&DensityState::vacuum(&ms(&[2])), &tol).unwrap().is_none());
        assert!(odd_decompositions(&DensityState::vacuum(&ms(&[2])), &tol).unwrap().is_empty());
        assert_eq!(odd_decompositions(&mixed, &tol).unwrap().len(), 4);

        let psi = random_state(&ms(&[1, 2]), StateKind::Pure, 8).unwrap();
        let even = DensityState::new(psi.modes().clone(), (psi.matrix() + psi.theta().matrix()) * C64::new(0.5, 0.0), &tol).unwrap();
        let t = decompose_even_state(&even, &tol).unwrap().unwrap();
        let sym = (t.matrix() + t.theta().matrix()) * C64::new(0.5, 0.0);
        assert!(linalg::max_abs(&(sym - even.matrix())) < 1e-10);
        assert!(decompose_even_state(&psi, &tol).is_err());
    }

    #[test]
    fn family_members() {
        let tol = Tolerances::default();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let phi1 = one_mode_pure(1, [s, s]);
        let tilde = one_mode_pure(2, [0.6, 0.8]);
        let phi2 = DensityState::new(ms(&[2]), (tilde.matrix() + tilde.theta().matrix()) * C64::new(0.5, 0.0), &tol).unwrap();
        let f = joint_extension_family_p0(&phi1, &tilde, &tol).unwrap();
        let g = joint_extension_family_p0_assembled(&phi1, &tilde, &tol).unwrap();
        assert!(linalg::max_abs(&(f.matrix() - g.matrix())) < 1e-12);
        for part in [&phi1, &phi2] {
            let m = restrict(&f, part.modes(), &tol).unwrap();
            assert!(linalg::max_abs(&(m.matrix() - part.matrix())) < 1e-12);
        }
        let prod = product_extension(&[phi1.clone(), phi2.clone()], &tol).unwrap();
        assert!(linalg::max_abs(&(f.matrix() - prod.matrix())) > 1e-3);
        let same = joint_extension_family_p0(&phi1, &phi2, &tol).unwrap();
        assert!(linalg::max_abs(&(same.matrix() - prod.matrix())) < 1e-12);
        // Odd-odd monomial separates the family from the product.
        let union = ms(&[1, 2]);
        let x = car::embed(&Monomial::new(ms(&[1]), vec![2]).unwrap().operator(), &union).unwrap();
        let y = car::embed(&Monomial::new(ms(&[2]), vec![1]).unwrap().operator(), &union).unwrap();
        let xy = &x * &y;
        assert!((evaluate(&f, &xy).unwrap() - evaluate(&prod, &xy).unwrap()).norm() > 1e-3);
    }
}
