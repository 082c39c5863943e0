//! Finite-dimensional CAR algebra in the Jordan-Wigner representation.
//!
//! Operators over a [`ModeSet`] are dense `2^n x 2^n` complex matrices. The
//! basis vector with index `b` has mode at position `k` occupied iff bit
//! `n-1-k` of `b` is set; the lowering operator annihilates the first basis
//! vector of each mode, so `a*a = diag(0, 1)`.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::modes::ModeSet;
use crate::pauli::{monomial_string, position_bit, PauliString};
use crate::{linalg, C64};

/// A complex matrix tagged with the mode set whose algebra it belongs to.
#[derive(Clone, Debug, PartialEq)]
pub struct Operator {
    modes: ModeSet,
    matrix: DMatrix<C64>,
}

impl Operator {
    pub fn new(modes: ModeSet, matrix: DMatrix<C64>) -> Result<Self> {
        let d = modes.dim();
        if matrix.nrows() != d || matrix.ncols() != d {
            return Err(Error::Dimension {
                expected: d,
                rows: matrix.nrows(),
                cols: matrix.ncols(),
            });
        }
        Ok(Self { modes, matrix })
    }

    pub(crate) fn from_parts(modes: ModeSet, matrix: DMatrix<C64>) -> Self {
        debug_assert_eq!(matrix.nrows(), modes.dim());
        Self { modes, matrix }
    }

    pub fn identity(modes: &ModeSet) -> Self {
        let d = modes.dim();
        Self::from_parts(modes.clone(), DMatrix::identity(d, d))
    }

    pub fn zeros(modes: &ModeSet) -> Self {
        let d = modes.dim();
        Self::from_parts(modes.clone(), DMatrix::zeros(d, d))
    }

    pub fn modes(&self) -> &ModeSet {
        &self.modes
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.matrix
    }

    pub fn adjoint(&self) -> Self {
        Self::from_parts(self.modes.clone(), self.matrix.adjoint())
    }

    pub fn scale(&self, c: C64) -> Self {
        Self::from_parts(self.modes.clone(), self.matrix.map(|v| v * c))
    }

    pub fn scale_real(&self, c: f64) -> Self {
        self.scale(C64::new(c, 0.0))
    }

    /// `{A, B} = AB + BA`.
    pub fn anticommutator(&self, other: &Self) -> Self {
        &(self * other) + &(other * self)
    }

    pub fn commutator(&self, other: &Self) -> Self {
        &(self * other) - &(other * self)
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.modes, other.modes, "operators over different modes");
        linalg::max_abs(&(&self.matrix - &other.matrix))
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.modes == other.modes && self.max_abs_diff(other) <= tol
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        linalg::max_abs(&(&self.matrix - self.matrix.adjoint())) <= tol
    }

    pub fn trace(&self) -> C64 {
        self.matrix.trace()
    }

    /// Operator norm (largest singular value).
    pub fn op_norm(&self) -> f64 {
        linalg::op_norm(&self.matrix)
    }

    pub fn is_odd(&self, tol: f64) -> bool {
        linalg::max_abs(&(theta(self).matrix + &self.matrix)) <= tol
    }

    pub fn is_even(&self, tol: f64) -> bool {
        linalg::max_abs(&(theta(self).matrix - &self.matrix)) <= tol
    }
}

impl<'a> Mul<&'a Operator> for &'a Operator {
    type Output = Operator;

    fn mul(self, rhs: &Operator) -> Operator {
        assert_eq!(self.modes, rhs.modes, "operators over different modes");
        Operator::from_parts(self.modes.clone(), &self.matrix * &rhs.matrix)
    }
}

impl<'a> Add<&'a Operator> for &'a Operator {
    type Output = Operator;

    fn add(self, rhs: &Operator) -> Operator {
        assert_eq!(self.modes, rhs.modes, "operators over different modes");
        Operator::from_parts(self.modes.clone(), &self.matrix + &rhs.matrix)
    }
}

impl<'a> Sub<&'a Operator> for &'a Operator {
    type Output = Operator;

    fn sub(self, rhs: &Operator) -> Operator {
        assert_eq!(self.modes, rhs.modes, "operators over different modes");
        Operator::from_parts(self.modes.clone(), &self.matrix - &rhs.matrix)
    }
}

impl Neg for &Operator {
    type Output = Operator;

    fn neg(self) -> Operator {
        self.scale_real(-1.0)
    }
}

/// Annihilation operator `a_i` (or `a_i*` with `dagger`) over `modes`:
/// `Z x ... x Z x a x 1 x ... x 1` with one `Z = diag(1,-1)` per earlier mode.
pub fn generator(modes: &ModeSet, mode: u32, dagger: bool) -> Result<Operator> {
    let pos = modes.position(mode).ok_or_else(|| Error::ModeNotFound {
        mode,
        modes: modes.clone(),
    })?;
    let n = modes.len();
    let d = modes.dim();
    let bit = position_bit(n, pos) as usize;
    let before = !((bit << 1) - 1) & (d - 1);
    let mut m = DMatrix::zeros(d, d);
    for col in 0..d {
        let occupied = col & bit != 0;
        if occupied != dagger {
            let sign = if (col & before).count_ones().is_multiple_of(2) { 1.0 } else { -1.0 };
            m[(col ^ bit, col)] = C64::new(sign, 0.0);
        }
    }
    Ok(Operator::from_parts(modes.clone(), m))
}

/// Fermion parity `Gamma = (-1)^N`, diagonal with `+1` on the vacuum.
pub fn parity_operator(modes: &ModeSet) -> Operator {
    let d = modes.dim();
    let diag = nalgebra::DVector::from_iterator(d, (0..d).map(|b| C64::new(parity_of_index(b), 0.0)));
    Operator::from_parts(modes.clone(), DMatrix::from_diagonal(&diag))
}

#[inline]
pub(crate) fn parity_of_index(b: usize) -> f64 {
    if b.count_ones().is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// Grading automorphism `Theta(A) = Gamma A Gamma`.
pub fn theta(op: &Operator) -> Operator {
    let mut m = op.matrix.clone();
    theta_in_place(&mut m);
    Operator::from_parts(op.modes.clone(), m)
}

pub(crate) fn theta_in_place(m: &mut DMatrix<C64>) {
    for c in 0..m.ncols() {
        for r in 0..m.nrows() {
            if (r ^ c).count_ones() % 2 == 1 {
                m[(r, c)] = -m[(r, c)];
            }
        }
    }
}

/// `(A_+, A_-)` with `A_pm = (A pm Theta(A)) / 2`.
pub fn even_odd_split(op: &Operator) -> (Operator, Operator) {
    let t = theta(op);
    ((op + &t).scale_real(0.5), (op - &t).scale_real(0.5))
}

/// Grading of a homogeneous element.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn sign(self) -> f64 {
        match self {
            Parity::Even => 1.0,
            Parity::Odd => -1.0,
        }
    }
}

/// Ordered product `u^{(i_1)}_{j_1} u^{(i_2)}_{j_2} ...` over increasing modes,
/// with `u_0 = 1`, `u_1 = a + a*`, `u_2 = i(a - a*)`, `u_3 = a*a - aa*`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Monomial {
    modes: ModeSet,
    assignment: Vec<u8>,
}

impl Monomial {
    /// `assignment[k]` is the `j` of the mode at position `k`.
    pub fn new(modes: ModeSet, assignment: Vec<u8>) -> Result<Self> {
        if assignment.len() != modes.len() {
            return Err(Error::InvalidAssignment(format!(
                "{} entries for {} modes",
                assignment.len(),
                modes.len()
            )));
        }
        if let Some(j) = assignment.iter().find(|&&j| j > 3) {
            return Err(Error::InvalidAssignment(format!("index {j} not in 0..=3")));
        }
        Ok(Self { modes, assignment })
    }

    /// Modes missing from `map` get `j = 0`.
    pub fn from_map(modes: &ModeSet, map: &BTreeMap<u32, u8>) -> Result<Self> {
        let mut assignment = vec![0; modes.len()];
        for (&mode, &j) in map {
            let pos = modes.position(mode).ok_or_else(|| Error::ModeNotFound {
                mode,
                modes: modes.clone(),
            })?;
            assignment[pos] = j;
        }
        Self::new(modes.clone(), assignment)
    }

    pub fn identity(modes: &ModeSet) -> Self {
        Self {
            modes: modes.clone(),
            assignment: vec![0; modes.len()],
        }
    }

    pub(crate) fn from_index(modes: &ModeSet, index: usize) -> Self {
        Self {
            modes: modes.clone(),
            assignment: index_to_assignment(modes.len(), index),
        }
    }

    pub fn modes(&self) -> &ModeSet {
        &self.modes
    }

    pub fn assignment(&self) -> &[u8] {
        &self.assignment
    }

    /// Position in [`Expansion`] coefficient order (base-4, first mode most
    /// significant).
    pub fn index(&self) -> usize {
        assignment_to_index(&self.assignment)
    }

    pub fn parity(&self) -> Parity {
        assignment_parity(&self.assignment)
    }

    /// `+1` if the monomial is self-adjoint, `-1` if skew-adjoint.
    pub fn adjoint_sign(&self) -> f64 {
        if self.pauli().is_hermitian() {
            1.0
        } else {
            -1.0
        }
    }

    /// Modes carrying a non-identity factor.
    pub fn support(&self) -> ModeSet {
        ModeSet::new(
            self.modes
                .iter()
                .zip(&self.assignment)
                .filter(|(_, &j)| j != 0)
                .map(|(m, _)| m)
                .collect(),
        )
        .expect("subset of a valid mode set")
    }

    pub fn operator(&self) -> Operator {
        Operator::from_parts(self.modes.clone(), self.pauli().to_matrix(self.modes.dim()))
    }

    pub(crate) fn pauli(&self) -> PauliString {
        monomial_string(&self.assignment)
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut any = false;
        for (m, &j) in self.modes.iter().zip(&self.assignment) {
            if j != 0 {
                write!(f, "u{j}({m})")?;
                any = true;
            }
        }
        if !any {
            write!(f, "1")?;
        }
        Ok(())
    }
}

pub(crate) fn assignment_parity(assignment: &[u8]) -> Parity {
    if assignment.iter().filter(|&&j| j == 1 || j == 2).count() % 2 == 0 {
        Parity::Even
    } else {
        Parity::Odd
    }
}

pub(crate) fn assignment_to_index(assignment: &[u8]) -> usize {
    assignment.iter().fold(0, |acc, &j| acc * 4 + j as usize)
}

pub(crate) fn index_to_assignment(n: usize, mut index: usize) -> Vec<u8> {
    let mut a = vec![0u8; n];
    for slot in a.iter_mut().rev() {
        *slot = (index % 4) as u8;
        index /= 4;
    }
    a
}

/// Builds the monomial `U_J` for an assignment over `modes`.
pub fn monomial(modes: &ModeSet, assignment: &BTreeMap<u32, u8>) -> Result<Monomial> {
    Monomial::from_map(modes, assignment)
}

/// Coefficients `c_J = 2^{-n} Tr(U_J^dagger A)` in the monomial basis.
#[derive(Clone, Debug, PartialEq)]
pub struct Expansion {
    modes: ModeSet,
    coefficients: Vec<C64>,
}

impl Expansion {
    pub fn modes(&self) -> &ModeSet {
        &self.modes
    }

    /// Indexed by [`Monomial::index`].
    pub fn coefficients(&self) -> &[C64] {
        &self.coefficients
    }

    pub fn coefficient(&self, m: &Monomial) -> C64 {
        assert_eq!(&self.modes, m.modes(), "monomial over different modes");
        self.coefficients[m.index()]
    }

    /// Nonzero terms in index order.
    pub fn terms(&self) -> impl Iterator<Item = (Monomial, C64)> + '_ {
        self.coefficients
            .iter()
            .enumerate()
            .filter(|(_, c)| c.norm_sqr() > 0.0)
            .map(|(i, &c)| (Monomial::from_index(&self.modes, i), c))
    }

    /// `sum_J c_J U_J`.
    pub fn assemble(&self) -> Operator {
        let n = self.modes.len();
        let d = self.modes.dim();
        let mut m = DMatrix::zeros(d, d);
        for (i, &c) in self.coefficients.iter().enumerate() {
            if c.norm_sqr() > 0.0 {
                monomial_string(&index_to_assignment(n, i)).add_scaled_to(c, &mut m);
            }
        }
        Operator::from_parts(self.modes.clone(), m)
    }
}

pub fn monomial_expand(op: &Operator) -> Expansion {
    let n = op.modes.len();
    let scale = 1.0 / op.modes.dim() as f64;
    let coefficients = (0..1usize << (2 * n))
        .map(|i| monomial_string(&index_to_assignment(n, i)).overlap(&op.matrix) * scale)
        .collect();
    Expansion {
        modes: op.modes.clone(),
        coefficients,
    }
}

/// The assignment over `into` that agrees with `assignment` on `positions`
/// and is 0 elsewhere.
pub(crate) fn lift_assignment(assignment: &[u8], positions: &[usize], n_into: usize) -> Vec<u8> {
    let mut lifted = vec![0u8; n_into];
    for (&j, &p) in assignment.iter().zip(positions) {
        lifted[p] = j;
    }
    lifted
}

/// Inclusion `A(I) -> A(K)` for `I` a subset of `K`, mapping each monomial to
/// the monomial over `K` with the same assignment.
pub fn embed(op: &Operator, into: &ModeSet) -> Result<Operator> {
    let positions = op.modes.positions_in(into)?;
    if &op.modes == into {
        return Ok(op.clone());
    }
    let n = into.len();
    let d = into.dim();
    let mut m = DMatrix::zeros(d, d);
    let exp = monomial_expand(op);
    for (i, &c) in exp.coefficients.iter().enumerate() {
        if c.norm_sqr() > 0.0 {
            let local = index_to_assignment(op.modes.len(), i);
            monomial_string(&lift_assignment(&local, &positions, n)).add_scaled_to(c, &mut m);
        }
    }
    Ok(Operator::from_parts(into.clone(), m))
}
