use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use super::DensityState;
use crate::car::parity_of_index;
use crate::error::{Error, Result};
use crate::modes::ModeSet;
use crate::C64;

/// Families of random test states.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum StateKind {
    /// Projector onto a Gaussian random unit vector.
    Pure,
    /// `G G^dagger / Tr` for a square Gaussian `G`.
    Mixed,
    /// Random unit vector inside a random parity sector.
    EvenPure,
    /// Parity-symmetrized `Mixed`.
    EvenMixed,
    /// `Mixed` shrunk toward the identity so every eigenvalue is `>= floor`.
    FullRank { floor: f64 },
}

impl StateKind {
    pub fn name(&self) -> &'static str {
        match self {
            StateKind::Pure => "pure",
            StateKind::Mixed => "mixed",
            StateKind::EvenPure => "even-pure",
            StateKind::EvenMixed => "even-mixed",
            StateKind::FullRank { .. } => "full-rank",
        }
    }
}

fn gaussian(rng: &mut ChaCha8Rng) -> C64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

fn gaussian_matrix(d: usize, rng: &mut ChaCha8Rng) -> DMatrix<C64> {
    DMatrix::from_fn(d, d, |_, _| gaussian(rng))
}

fn normalized_gram(g: &DMatrix<C64>) -> DMatrix<C64> {
    let rho = g * g.adjoint();
    let t = rho.trace();
    rho / t
}

/// Deterministic random state for a given seed.
pub fn random_state(modes: &ModeSet, kind: StateKind, seed: u64) -> Result<DensityState> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = modes.dim();
    let rho = match kind {
        StateKind::Pure => {
            let psi = DVector::from_fn(d, |_, _| gaussian(&mut rng));
            return DensityState::pure(modes.clone(), &psi);
        }
        StateKind::EvenPure => {
            let sector = if rand::Rng::random::<bool>(&mut rng) { 1.0 } else { -1.0 };
            let psi = DVector::from_fn(d, |b, _| {
                let z = gaussian(&mut rng);
                if parity_of_index(b) == sector {
                    z
                } else {
                    C64::new(0.0, 0.0)
                }
            });
            return DensityState::pure(modes.clone(), &psi);
        }
        StateKind::Mixed => normalized_gram(&gaussian_matrix(d, &mut rng)),
        StateKind::EvenMixed => {
            let rho = normalized_gram(&gaussian_matrix(d, &mut rng));
            let mut flipped = rho.clone();
            crate::car::theta_in_place(&mut flipped);
            (rho + flipped) * C64::new(0.5, 0.0)
        }
        StateKind::FullRank { floor } => {
            if !(floor >= 0.0 && floor * d as f64 <= 1.0) {
                return Err(Error::InvalidParameter(format!(
                    "floor {floor} must lie in [0, 1/{d}]"
                )));
            }
            let rho = normalized_gram(&gaussian_matrix(d, &mut rng));
            let w = floor * d as f64;
            rho * C64::new(1.0 - w, 0.0) + DMatrix::identity(d, d) * C64::new(floor, 0.0)
        }
    };
    Ok(DensityState::from_parts(modes.clone(), crate::linalg::hermitian_part(&rho)))
}
