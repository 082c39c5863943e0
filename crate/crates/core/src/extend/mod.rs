//! Product and joint extensions of states on disjoint mode sets.
//!
//! A monomial over a union of disjoint mode sets factors, up to a sign, into
//! an ordered product of per-subsystem monomials. Every construction in this
//! module is expressed through that factorization.

mod examples;
mod joint;
mod product;
mod verify;

pub use examples::{
    example1, example3_kappa_bounds, example_mixture, kappa_free_parameters, kappa_null_space,
    kappa_parameter_interval, random_odd_selfadjoint,
};
pub use joint::{
    decide_joint_pure, decompose_even_state, joint_extension_family_p0, joint_extension_family_p0_assembled,
    joint_extension_pure, joint_extension_pure_via_representation, odd_decompositions, u1_operator,
};
pub use product::{decide_product_extension, product_extension, product_extension_via_representation};
pub use verify::{verify_extension, ExtensionReport};

pub(crate) use product::product_functional as product_functional_matrix;

use serde::Serialize;

use crate::car::Operator;
use crate::error::Result;
use crate::modes::{disjoint_union, ModeSet};
use crate::states::DensityState;

/// Which rule produced an [`ExtensionDecision`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Reason {
    /// At most one factor is non-even, so the product extension exists.
    AllButOneEven,
    /// Two or more factors are non-even; no product extension exists.
    TooManyOddStates,
    /// Pure first marginal with `p > 0`: compare `lambda` against the threshold.
    CriterionLambdaVsP,
    /// `p = 0` forces an even second marginal. Reported when the second
    /// marginal is not even, or when it is even but admits no odd
    /// decomposition (so the product extension is the only one).
    EvenRequired,
    /// `p = 0`, even second marginal with a family of extensions.
    P0Family,
}

#[derive(Clone, Debug, Serialize)]
pub struct ExtensionDecision {
    pub exists: bool,
    pub reason: Reason,
    /// `p` of the pure marginal; absent for product decisions.
    pub p: Option<f64>,
    /// `lambda(phi_2)`; absent for product decisions.
    pub lambda: Option<f64>,
    /// `(1 - p) / (1 + p)`.
    pub threshold: Option<f64>,
    /// Evenness of each input, in input order.
    pub even_flags: Vec<bool>,
    #[serde(skip)]
    pub witness: Option<DensityState>,
}

/// The grading unitary of a pure state's defining representation, signed so
/// that its expectation is non-negative.
#[derive(Clone, Debug)]
pub struct U1Certificate {
    pub u1: Operator,
    /// `<Omega, u1 Omega>`, always `>= 0`.
    pub overlap: f64,
    /// Both signs are admissible because the overlap vanishes.
    pub sign_ambiguous: bool,
}

impl U1Certificate {
    /// `+1` or `-1`, the factor relating `u1` to the parity operator.
    pub fn sign(&self) -> f64 {
        let first = self.u1.matrix()[(0, 0)].re;
        if first < 0.0 {
            -1.0
        } else {
            1.0
        }
    }
}

/// Routes every global position to its subsystem.
pub(crate) struct Blocks {
    union: ModeSet,
    owner: Vec<(usize, usize)>,
    sizes: Vec<usize>,
}

impl Blocks {
    pub fn new<'a>(parts: impl IntoIterator<Item = &'a ModeSet> + Clone) -> Result<Self> {
        let union = disjoint_union(parts.clone())?;
        let parts: Vec<&ModeSet> = parts.into_iter().collect();
        let owner = union
            .iter()
            .map(|m| {
                parts
                    .iter()
                    .enumerate()
                    .find_map(|(i, p)| p.position(m).map(|k| (i, k)))
                    .expect("mode of the union")
            })
            .collect();
        let sizes = parts.iter().map(|p| p.len()).collect();
        Ok(Self { union, owner, sizes })
    }

    pub fn union(&self) -> &ModeSet {
        &self.union
    }

    /// `U_J = sign * M_1 M_2 ... M_k`; returns the local assignments and the
    /// sign, which counts odd single-mode factors that must pass each other.
    pub fn split(&self, global: &[u8]) -> (Vec<Vec<u8>>, f64) {
        let mut locals: Vec<Vec<u8>> = self.sizes.iter().map(|&s| vec![0u8; s]).collect();
        let mut odd_seen = vec![0usize; self.sizes.len()];
        let mut swaps = 0usize;
        for (pos, &j) in global.iter().enumerate() {
            let (o, k) = self.owner[pos];
            locals[o][k] = j;
            if j == 1 || j == 2 {
                swaps += odd_seen[o + 1..].iter().sum::<usize>();
                odd_seen[o] += 1;
            }
        }
        let sign = if swaps.is_multiple_of(2) { 1.0 } else { -1.0 };
        (locals, sign)
    }
}
