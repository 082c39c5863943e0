use serde::Serialize;

use super::product::product_functional;
use crate::car::Operator;
use crate::error::{Error, Result};
use crate::linalg;
use crate::modes::disjoint_union;
use crate::states::{restrict_matrix, DensityState, StateCheck, Tolerances};

/// Outcome of checking a candidate joint state against its marginals.
#[derive(Clone, Debug, Serialize)]
pub struct ExtensionReport {
    pub is_state: bool,
    pub hermiticity_error: f64,
    pub trace_error: f64,
    pub min_eigenvalue: f64,
    pub marginals_ok: bool,
    /// Largest entrywise deviation over all marginals.
    pub max_marginal_error: f64,
    pub marginal_errors: Vec<f64>,
    pub is_product: bool,
    /// Largest entrywise deviation from the product functional.
    pub product_distance: f64,
}

impl ExtensionReport {
    pub fn passes(&self) -> bool {
        self.is_state && self.marginals_ok
    }
}

/// Checks state validity, marginals (within `tol_eq`) and whether the
/// candidate coincides with the product functional of the marginals.
pub fn verify_extension(candidate: &Operator, marginals: &[DensityState], tol: &Tolerances) -> Result<ExtensionReport> {
    let union = disjoint_union(marginals.iter().map(|m| m.modes()))?;
    if candidate.modes() != &union {
        return Err(Error::ModeMismatch(candidate.modes().clone(), union));
    }
    let check = StateCheck::of(candidate.matrix());
    let mut marginal_errors = Vec::with_capacity(marginals.len());
    for m in marginals {
        let r = restrict_matrix(candidate.modes(), candidate.matrix(), m.modes())?;
        marginal_errors.push(linalg::max_abs(&(r - m.matrix())));
    }
    let max_marginal_error = marginal_errors.iter().copied().fold(0.0, f64::max);
    let product_distance = if marginals.len() >= 2 {
        let (_, prod) = product_functional(marginals)?;
        linalg::max_abs(&(candidate.matrix() - prod))
    } else {
        linalg::max_abs(&(candidate.matrix() - marginals[0].matrix()))
    };
    Ok(ExtensionReport {
        is_state: check.is_valid(tol),
        hermiticity_error: check.hermiticity_error,
        trace_error: check.trace_error,
        min_eigenvalue: check.min_eigenvalue,
        marginals_ok: max_marginal_error <= tol.tol_eq,
        max_marginal_error,
        marginal_errors,
        is_product: product_distance <= tol.tol_eq,
        product_distance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::extend::product_extension;
    use crate::modes::ModeSet;
    use crate::states::{random_state, StateKind};
    use crate::C64;
    use nalgebra::DMatrix;

    #[test]
    fn product_passes_and_noise_fails() {
        let tol = Tolerances::default();
        let a = random_state(&ModeSet::new(vec![1]).unwrap(), StateKind::Mixed, 1).unwrap();
        let b = random_state(&ModeSet::new(vec![2]).unwrap(), StateKind::EvenMixed, 2).unwrap();
        let marg = [a, b];
        let p = product_extension(&marg, &tol).unwrap();
        let r = verify_extension(&p.to_operator(), &marg, &tol).unwrap();
        assert!(r.passes() && r.is_product);
        let noise = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(
            [1.0, -0.5, 0.3, -0.8].iter().map(|v| C64::new(1e-3 * v, 0.0)).collect(),
        ));
        let bad = Operator::new(p.modes().clone(), p.matrix() + noise).unwrap();
        let r = verify_extension(&bad, &marg, &tol).unwrap();
        assert!(!r.marginals_ok);
        let wrong = Operator::identity(&ModeSet::new(vec![1, 3]).unwrap());
        assert!(verify_extension(&wrong, &marg, &tol).is_err());
    }
}
