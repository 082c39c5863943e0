//! Signed Pauli strings `i^phase * X^x Z^z`, the internal form of CAR
//! monomials under the Jordan-Wigner map.
//!
//! Bit `n-1-k` of a basis index is the occupation of the mode at position
//! `k`, so the first mode is the most significant tensor factor.

use nalgebra::DMatrix;

use crate::C64;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) struct PauliString {
    pub x: u32,
    pub z: u32,
    /// Power of `i`, in `0..4`.
    pub phase: u8,
}

const PHASES: [C64; 4] = [
    C64::new(1.0, 0.0),
    C64::new(0.0, 1.0),
    C64::new(-1.0, 0.0),
    C64::new(0.0, -1.0),
];

#[inline]
fn parity_sign(bits: u32) -> f64 {
    if bits.count_ones() & 1 == 0 {
        1.0
    } else {
        -1.0
    }
}

#[inline]
pub(crate) fn position_bit(n: usize, pos: usize) -> u32 {
    1 << (n - 1 - pos)
}

impl PauliString {
    pub const IDENTITY: Self = Self {
        x: 0,
        z: 0,
        phase: 0,
    };

    pub fn phase(self) -> C64 {
        PHASES[self.phase as usize]
    }

    /// `self * other`, using `Z^z X^x' = (-1)^{|z & x'|} X^x' Z^z`.
    pub fn mul(self, other: Self) -> Self {
        let flip = ((self.z & other.x).count_ones() & 1) as u8 * 2;
        Self {
            x: self.x ^ other.x,
            z: self.z ^ other.z,
            phase: (self.phase + other.phase + flip) % 4,
        }
    }

    pub fn adjoint(self) -> Self {
        let flip = ((self.x & self.z).count_ones() & 1) as u8 * 2;
        Self {
            x: self.x,
            z: self.z,
            phase: ((4 - self.phase) % 4 + flip) % 4,
        }
    }

    pub fn is_hermitian(self) -> bool {
        self.adjoint() == self
    }

    /// Nonzero entry in column `col`: `(row, value)`.
    #[inline]
    pub fn column_entry(self, col: usize) -> (usize, C64) {
        let c = col as u32;
        ((c ^ self.x) as usize, self.phase() * parity_sign(self.z & c))
    }

    pub fn to_matrix(self, dim: usize) -> DMatrix<C64> {
        let mut m = DMatrix::zeros(dim, dim);
        self.add_scaled_to(C64::new(1.0, 0.0), &mut m);
        m
    }

    /// `target += coeff * self`.
    pub fn add_scaled_to(self, coeff: C64, target: &mut DMatrix<C64>) {
        for col in 0..target.ncols() {
            let (row, v) = self.column_entry(col);
            target[(row, col)] += coeff * v;
        }
    }

    /// `Tr(self^dagger * a)`.
    pub fn overlap(self, a: &DMatrix<C64>) -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        for col in 0..a.ncols() {
            let (row, v) = self.column_entry(col);
            acc += v.conj() * a[(row, col)];
        }
        acc
    }

    /// `Tr(a * self)`, the expectation value when `a` is a density matrix.
    pub fn expectation(self, a: &DMatrix<C64>) -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        for col in 0..a.ncols() {
            let (row, v) = self.column_entry(col);
            acc += a[(col, row)] * v;
        }
        acc
    }
}

/// Single-mode factor `u_j` at position `pos` of an `n`-mode Jordan-Wigner
/// chain: `u_1 = a + a*`, `u_2 = i(a - a*)`, `u_3 = a*a - aa*`.
pub(crate) fn mode_factor(n: usize, pos: usize, j: u8) -> PauliString {
    let bit = position_bit(n, pos);
    // Z string on every position before `pos`.
    let string = !((bit << 1).wrapping_sub(1)) & ((1u32 << n) - 1);
    match j {
        0 => PauliString::IDENTITY,
        1 => PauliString {
            x: bit,
            z: string,
            phase: 0,
        },
        // i(a - a*) = -sigma_y = -i X Z
        2 => PauliString {
            x: bit,
            z: string | bit,
            phase: 3,
        },
        // a*a - aa* = -Z
        3 => PauliString {
            x: 0,
            z: bit,
            phase: 2,
        },
        _ => unreachable!("monomial index out of range"),
    }
}

/// Ordered product of `u_{j_k}` over increasing positions.
pub(crate) fn monomial_string(assignment: &[u8]) -> PauliString {
    let n = assignment.len();
    assignment
        .iter()
        .enumerate()
        .fold(PauliString::IDENTITY, |acc, (pos, &j)| {
            acc.mul(mode_factor(n, pos, j))
        })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_matches_dense_multiplication() {
        let n = 3;
        let dim = 1 << n;
        for a in 0..(1u32 << (2 * n)) {
            for b in [0u32, 5, 17, 42, 63] {
                let pa = PauliString {
                    x: a & 7,
                    z: a >> 3,
                    phase: (a % 4) as u8,
                };
                let pb = PauliString {
                    x: b & 7,
                    z: b >> 3,
                    phase: 1,
                };
                let dense = pa.to_matrix(dim) * pb.to_matrix(dim);
                assert!((dense - pa.mul(pb).to_matrix(dim)).norm() < 1e-14);
                let adj = pa.to_matrix(dim).adjoint();
                assert!((adj - pa.adjoint().to_matrix(dim)).norm() < 1e-14);
            }
        }
    }
}
