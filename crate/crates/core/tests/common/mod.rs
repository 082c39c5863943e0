#![allow(dead_code)]

use car_extend::states::{random_state, StateKind};
use car_extend::{DensityState, ModeSet};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn ms(v: &[u32]) -> ModeSet {
    ModeSet::new(v.to_vec()).unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Splits `1..=sizes.sum()` into disjoint, randomly interleaved mode sets.
pub fn random_partition(rng: &mut ChaCha8Rng, sizes: &[usize]) -> Vec<ModeSet> {
    let total: usize = sizes.iter().sum();
    let mut labels: Vec<u32> = (1..=total as u32).collect();
    labels.shuffle(rng);
    let mut out = Vec::new();
    let mut start = 0;
    for &s in sizes {
        out.push(ModeSet::from_unsorted(labels[start..start + s].to_vec()).unwrap());
        start += s;
    }
    out
}

pub fn any_kind(rng: &mut ChaCha8Rng) -> StateKind {
    match rng.random_range(0..6) {
        0 => StateKind::Pure,
        1 => StateKind::Mixed,
        2 => StateKind::EvenPure,
        3 => StateKind::EvenMixed,
        4 => StateKind::FullRank { floor: 0.05 },
        _ => StateKind::FullRank { floor: 0.2 },
    }
}

pub fn state(modes: &ModeSet, kind: StateKind, rng: &mut ChaCha8Rng) -> DensityState {
    random_state(modes, kind, rng.random()).unwrap()
}

/// A mode-set size of one or two.
pub fn small(rng: &mut ChaCha8Rng) -> usize {
    rng.random_range(1..=2)
}
