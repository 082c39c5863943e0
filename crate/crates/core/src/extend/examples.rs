use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::car::{embed, Monomial, Operator, Parity};
use crate::error::{Error, Result};
use crate::modes::ModeSet;
use crate::states::{restrict_matrix, DensityState, Tolerances};
use crate::{linalg, C64};

fn check_odd_selfadjoint(name: &str, op: &Operator, tol: &Tolerances) -> Result<()> {
    if !op.is_hermitian(tol.tol_hermitian) {
        return Err(Error::Precondition(format!("{name} is not self-adjoint")));
    }
    if !op.is_odd(tol.tol_hermitian) {
        return Err(Error::Precondition(format!("{name} is not odd")));
    }
    Ok(())
}

/// `rho' = rho + i x y` for odd self-adjoint `x` in `A(I1)` and `y` in
/// `A(I2)`, which leaves both marginals unchanged.
///
/// Requires `|x| |y| <= min eig(rho)`.
pub fn example1(rho: &DensityState, x: &Operator, y: &Operator, tol: &Tolerances) -> Result<DensityState> {
    let union = x.modes().union(y.modes())?;
    if &union != rho.modes() {
        return Err(Error::ModeMismatch(union, rho.modes().clone()));
    }
    check_odd_selfadjoint("x", x, tol)?;
    check_odd_selfadjoint("y", y, tol)?;
    let floor = linalg::min_eigenvalue(rho.matrix());
    if floor <= 0.0 {
        return Err(Error::Precondition("density matrix must be invertible".into()));
    }
    let bound = x.op_norm() * y.op_norm();
    if bound > floor * (1.0 + 1e-12) {
        return Err(Error::Precondition(format!(
            "|x| |y| = {bound:.6e} exceeds the smallest eigenvalue {floor:.6e}"
        )));
    }
    let xy = &embed(x, &union)? * &embed(y, &union)?;
    let shifted = rho.matrix() + xy.matrix() * C64::new(0.0, 1.0);
    DensityState::new(union, shifted, tol)
}

/// Random real combination of odd self-adjoint monomials, scaled to the
/// given operator norm.
pub fn random_odd_selfadjoint(modes: &ModeSet, norm: f64, seed: u64) -> Result<Operator> {
    if modes.is_empty() {
        return Err(Error::InvalidParameter("no odd elements over an empty mode set".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut acc = Operator::zeros(modes);
    for idx in 0..1usize << (2 * modes.len()) {
        let m = Monomial::from_index(modes, idx);
        if m.parity() != Parity::Odd {
            continue;
        }
        let w: f64 = StandardNormal.sample(&mut rng);
        let u = m.operator();
        let h = if m.adjoint_sign() > 0.0 { u } else { u.scale(C64::new(0.0, 1.0)) };
        acc = &acc + &h.scale_real(w);
    }
    let current = acc.op_norm();
    Ok(acc.scale_real(norm / current))
}

/// `chi = sum_{kl} (lambda_k mu_l + kappa_kl) chi_kl`.
///
/// `components[k][l]` must be a joint extension of `phi_k` and `psi_l`; this
/// is checked through the restrictions, which must agree along rows and
/// columns respectively.
pub fn example_mixture(
    components: &[Vec<DensityState>],
    lambdas: &[f64],
    mus: &[f64],
    kappa: &[Vec<f64>],
    modes1: &ModeSet,
    modes2: &ModeSet,
    tol: &Tolerances,
) -> Result<DensityState> {
    let (m, n) = (lambdas.len(), mus.len());
    let shape_ok = components.len() == m
        && kappa.len() == m
        && components.iter().all(|r| r.len() == n)
        && kappa.iter().all(|r| r.len() == n);
    if m == 0 || n == 0 || !shape_ok {
        return Err(Error::InvalidParameter("mixture shapes do not match".into()));
    }
    for w in [lambdas, mus] {
        if w.iter().any(|v| *v < 0.0) || (w.iter().sum::<f64>() - 1.0).abs() > tol.tol_eq {
            return Err(Error::InvalidParameter("weights must be a probability vector".into()));
        }
    }
    let coeff = kappa_coefficients(lambdas, mus, kappa);
    for k in 0..m {
        let row: f64 = kappa[k].iter().sum();
        if row.abs() > tol.tol_eq {
            return Err(Error::InvalidParameter(format!("kappa row {k} sums to {row}")));
        }
        for l in 0..n {
            if coeff[(k, l)] < -tol.tol_eq {
                return Err(Error::InvalidParameter(format!("coefficient ({k},{l}) is negative")));
            }
        }
    }
    for l in 0..n {
        let col: f64 = kappa.iter().map(|r| r[l]).sum();
        if col.abs() > tol.tol_eq {
            return Err(Error::InvalidParameter(format!("kappa column {l} sums to {col}")));
        }
    }
    let union = modes1.union(modes2)?;
    let mut acc = DMatrix::<C64>::zeros(union.dim(), union.dim());
    for k in 0..m {
        for l in 0..n {
            let chi = &components[k][l];
            if chi.modes() != &union {
                return Err(Error::ModeMismatch(chi.modes().clone(), union));
            }
            let first = restrict_matrix(&union, chi.matrix(), modes1)?;
            let second = restrict_matrix(&union, chi.matrix(), modes2)?;
            let row_ref = restrict_matrix(&union, components[k][0].matrix(), modes1)?;
            let col_ref = restrict_matrix(&union, components[0][l].matrix(), modes2)?;
            if linalg::max_abs(&(first - row_ref)) > tol.tol_eq || linalg::max_abs(&(second - col_ref)) > tol.tol_eq {
                return Err(Error::Precondition(format!(
                    "component ({k},{l}) does not share the marginals of its row and column"
                )));
            }
            acc += chi.matrix() * C64::new(coeff[(k, l)].max(0.0), 0.0);
        }
    }
    DensityState::new(union, acc, tol)
}

/// `lambda_k mu_l + kappa_kl` as a matrix.
fn kappa_coefficients(lambdas: &[f64], mus: &[f64], kappa: &[Vec<f64>]) -> DMatrix<f64> {
    DMatrix::from_fn(lambdas.len(), mus.len(), |k, l| lambdas[k] * mus[l] + kappa[k][l])
}

/// Admissible `kappa = kappa_11` for two two-component mixtures with weights
/// `(lambda, 1 - lambda)` and `(mu, 1 - mu)`.
pub fn example3_kappa_bounds(lambda: f64, mu: f64) -> (f64, f64) {
    let lo = -(lambda * mu).min((1.0 - lambda) * (1.0 - mu));
    let hi = (lambda * (1.0 - mu)).min((1.0 - lambda) * mu);
    (lo, hi)
}

/// Orthonormal basis (Frobenius) of the `m x n` matrices with vanishing row
/// and column sums, computed numerically.
pub fn kappa_null_space(m: usize, n: usize) -> Vec<DMatrix<f64>> {
    let mut constraints = DMatrix::<f64>::zeros(m + n, m * n);
    for k in 0..m {
        for l in 0..n {
            constraints[(k, k * n + l)] = 1.0;
            constraints[(m + l, k * n + l)] = 1.0;
        }
    }
    let gram = constraints.transpose() * &constraints;
    let eig = gram.symmetric_eigen();
    let scale = eig.eigenvalues.iter().fold(1.0f64, |a, v| a.max(v.abs()));
    (0..m * n)
        .filter(|&i| eig.eigenvalues[i].abs() <= 1e-10 * scale)
        .map(|i| DMatrix::from_fn(m, n, |k, l| eig.eigenvectors[(k * n + l, i)]))
        .collect()
}

/// Number of free parameters `kappa` of the joint extension family.
pub fn kappa_free_parameters(m: usize, n: usize) -> usize {
    kappa_null_space(m, n).len()
}

/// Range of `t` for which every `lambda_k mu_l + t D_kl` is non-negative.
pub fn kappa_parameter_interval(lambdas: &[f64], mus: &[f64], direction: &DMatrix<f64>) -> (f64, f64) {
    let mut lo = f64::NEG_INFINITY;
    let mut hi = f64::INFINITY;
    for (k, lk) in lambdas.iter().enumerate() {
        for (l, ml) in mus.iter().enumerate() {
            let d = direction[(k, l)];
            let base = lk * ml;
            if d > 0.0 {
                lo = lo.max(-base / d);
            } else if d < 0.0 {
                hi = hi.min(-base / d);
            }
        }
    }
    (lo, hi)
}
