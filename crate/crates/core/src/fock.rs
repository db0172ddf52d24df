//! Truncated two-mode Fock space.
//!
//! The basis holds every `|n1 n2>` with `n1 + n2 <= max_total_photons`,
//! ordered lexicographically by `(n1 + n2, n1)`:
//!
//! ```text
//! |00>, |01>, |10>, |02>, |11>, |20>, |03>, ...
//! ```
//!
//! so index `(n1, n2) -> N(N+1)/2 + n1` with `N = n1 + n2`. Truncating on
//! the total photon number keeps every lowering operator exact: dynamics
//! generated by photon loss never leaves the space it started in.
//!
//! Raising operators are exact only on the interior (total photons below
//! the truncation); `[a_i, a_j^dagger] = delta_ij` holds there and fails on
//! the outermost shell.

use std::ops::{Add, Mul, Sub};

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);

/// Tolerances used to validate states.
pub const NORM_TOLERANCE: f64 = 1e-12;
pub const HERMITIAN_TOLERANCE: f64 = 1e-12;
pub const TRACE_TOLERANCE: f64 = 1e-10;
pub const POSITIVITY_TOLERANCE: f64 = 1e-9;

pub(crate) fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// Photon-number basis of two modes truncated by total photon number.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FockBasis {
    max_total_photons: usize,
}

impl FockBasis {
    pub fn new(max_total_photons: usize) -> Self {
        Self { max_total_photons }
    }

    pub fn max_total_photons(&self) -> usize {
        self.max_total_photons
    }

    /// `(N+1)(N+2)/2` kets.
    pub fn dim(&self) -> usize {
        (self.max_total_photons + 1) * (self.max_total_photons + 2) / 2
    }

    pub fn contains(&self, n1: usize, n2: usize) -> bool {
        n1 + n2 <= self.max_total_photons
    }

    /// Index of `|n1 n2>`, or `None` beyond the truncation.
    pub fn index(&self, n1: usize, n2: usize) -> Option<usize> {
        if !self.contains(n1, n2) {
            return None;
        }
        let total = n1 + n2;
        Some(total * (total + 1) / 2 + n1)
    }

    pub fn try_index(&self, n1: usize, n2: usize) -> Result<usize> {
        self.index(n1, n2).ok_or(Error::OutOfRange {
            n1,
            n2,
            max_total_photons: self.max_total_photons,
        })
    }

    /// Photon numbers `(n1, n2)` of basis index `idx`.
    pub fn labels(&self, idx: usize) -> (usize, usize) {
        assert!(idx < self.dim(), "basis index {idx} out of range");
        // largest N with N(N+1)/2 <= idx
        let mut total = 0;
        while (total + 1) * (total + 2) / 2 <= idx {
            total += 1;
        }
        let n1 = idx - total * (total + 1) / 2;
        (n1, total - n1)
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.dim()).map(move |i| self.labels(i))
    }

    /// Total photon number of basis index `idx`.
    pub fn total_photons(&self, idx: usize) -> usize {
        let (n1, n2) = self.labels(idx);
        n1 + n2
    }

    pub(crate) fn check_same(&self, other: &FockBasis) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::BasisMismatch {
                left: self.max_total_photons,
                right: other.max_total_photons,
            })
        }
    }
}

/// Builds the truncated basis for `max_total_photons`.
pub fn build_basis(max_total_photons: usize) -> FockBasis {
    FockBasis::new(max_total_photons)
}

/// A (not necessarily normalized) vector in the truncated space.
#[derive(Debug, Clone, PartialEq)]
pub struct Ket {
    basis: FockBasis,
    amplitudes: CVector,
}

impl Ket {
    pub fn new(basis: FockBasis, amplitudes: CVector) -> Result<Self> {
        if amplitudes.len() != basis.dim() {
            return Err(Error::DimensionMismatch {
                expected: basis.dim(),
                got: amplitudes.len(),
            });
        }
        Ok(Self { basis, amplitudes })
    }

    pub fn zero(basis: FockBasis) -> Self {
        Self {
            basis,
            amplitudes: CVector::zeros(basis.dim()),
        }
    }

    /// Builds a ket from `(n1, n2, amplitude)` triples; repeated labels add up.
    pub fn from_terms(basis: FockBasis, terms: &[(usize, usize, C64)]) -> Result<Self> {
        let mut ket = Self::zero(basis);
        for &(n1, n2, amp) in terms {
            let idx = basis.try_index(n1, n2)?;
            ket.amplitudes[idx] += amp;
        }
        Ok(ket)
    }

    pub fn basis(&self) -> FockBasis {
        self.basis
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    pub fn amplitude(&self, n1: usize, n2: usize) -> C64 {
        self.basis
            .index(n1, n2)
            .map_or(ZERO, |i| self.amplitudes[i])
    }

    pub fn norm_squared(&self) -> f64 {
        self.amplitudes.norm_squared()
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm_squared() - 1.0).abs() <= NORM_TOLERANCE
    }

    pub fn normalized(&self) -> Result<Self> {
        let norm = self.amplitudes.norm();
        if norm == 0.0 {
            return Err(Error::NotNormalized { norm_sq: 0.0 });
        }
        Ok(Self {
            basis: self.basis,
            amplitudes: self.amplitudes.unscale(norm),
        })
    }

    pub fn scaled(&self, factor: C64) -> Self {
        Self {
            basis: self.basis,
            amplitudes: &self.amplitudes * factor,
        }
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &Ket) -> C64 {
        self.amplitudes.dotc(&other.amplitudes)
    }

    /// `|self><other|`.
    pub fn outer(&self, other: &Ket) -> CMatrix {
        &self.amplitudes * other.amplitudes.adjoint()
    }
}

/// A linear operator on the truncated space.
#[derive(Debug, Clone, PartialEq)]
pub struct Operator {
    basis: FockBasis,
    matrix: CMatrix,
}

impl Operator {
    pub fn new(basis: FockBasis, matrix: CMatrix) -> Result<Self> {
        let d = basis.dim();
        if matrix.nrows() != d || matrix.ncols() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: matrix.nrows().max(matrix.ncols()),
            });
        }
        Ok(Self { basis, matrix })
    }

    pub fn identity(basis: FockBasis) -> Self {
        let d = basis.dim();
        Self {
            basis,
            matrix: CMatrix::identity(d, d),
        }
    }

    pub fn zero(basis: FockBasis) -> Self {
        let d = basis.dim();
        Self {
            basis,
            matrix: CMatrix::zeros(d, d),
        }
    }

    pub fn basis(&self) -> FockBasis {
        self.basis
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn dagger(&self) -> Self {
        Self {
            basis: self.basis,
            matrix: self.matrix.adjoint(),
        }
    }

    pub fn scaled(&self, factor: C64) -> Self {
        Self {
            basis: self.basis,
            matrix: &self.matrix * factor,
        }
    }

    pub fn apply(&self, ket: &Ket) -> Result<Ket> {
        self.basis.check_same(&ket.basis)?;
        Ok(Ket {
            basis: self.basis,
            amplitudes: &self.matrix * &ket.amplitudes,
        })
    }

    /// `[self, other]`.
    pub fn commutator(&self, other: &Operator) -> Operator {
        &(self * other) - &(other * self)
    }

    /// Terminating power series of `exp(coeff * self)` for a nilpotent
    /// operator. Fails if `self^max_terms` does not vanish.
    pub fn exp_nilpotent(&self, coeff: C64, max_terms: usize) -> Result<Operator> {
        let m = terminating_exp(&self.matrix, coeff, max_terms)?;
        Ok(Operator {
            basis: self.basis,
            matrix: m,
        })
    }
}

/// `exp(coeff * m)` for nilpotent `m`, summing until the power vanishes.
pub(crate) fn terminating_exp(m: &CMatrix, coeff: C64, max_terms: usize) -> Result<CMatrix> {
    let n = m.nrows();
    let mut sum = CMatrix::identity(n, n);
    let mut term = CMatrix::identity(n, n);
    for k in 1..=max_terms {
        term = (&term * m) * (coeff / k as f64);
        if term.iter().all(|z| *z == ZERO) {
            return Ok(sum);
        }
        sum += &term;
    }
    Err(Error::SeriesNotTerminated { max_terms })
}

macro_rules! operator_binop {
    ($trait:ident, $method:ident, $op:tt) => {
        impl $trait<&Operator> for &Operator {
            type Output = Operator;

            fn $method(self, rhs: &Operator) -> Operator {
                assert_eq!(self.basis, rhs.basis, "operators on different truncations");
                Operator {
                    basis: self.basis,
                    matrix: &self.matrix $op &rhs.matrix,
                }
            }
        }
    };
}

operator_binop!(Mul, mul, *);
operator_binop!(Add, add, +);
operator_binop!(Sub, sub, -);

/// Annihilation operator of cavity `mode` (1 or 2).
pub fn annihilation(mode: u8, basis: FockBasis) -> Result<Operator> {
    if mode != 1 && mode != 2 {
        return Err(Error::InvalidMode(mode));
    }
    let d = basis.dim();
    let mut m = CMatrix::zeros(d, d);
    for (col, (n1, n2)) in basis.iter().enumerate() {
        let (occupation, target) = if mode == 1 {
            (n1, (n1.wrapping_sub(1), n2))
        } else {
            (n2, (n1, n2.wrapping_sub(1)))
        };
        if occupation == 0 {
            continue;
        }
        let row = basis
            .index(target.0, target.1)
            .expect("lowering stays inside the truncation");
        m[(row, col)] = re((occupation as f64).sqrt());
    }
    Ok(Operator { basis, matrix: m })
}

fn mode_pair(basis: FockBasis) -> (Operator, Operator) {
    (
        annihilation(1, basis).expect("mode 1"),
        annihilation(2, basis).expect("mode 2"),
    )
}

/// Collective (bright) mode `A = (a1 + a2)/sqrt 2`, the only combination
/// coupled to the bath.
pub fn collective_mode(basis: FockBasis) -> Operator {
    let (a1, a2) = mode_pair(basis);
    (&a1 + &a2).scaled(re(std::f64::consts::FRAC_1_SQRT_2))
}

/// Dark mode `B = (a1 - a2)/sqrt 2`, decoupled from dissipation.
pub fn dark_mode(basis: FockBasis) -> Operator {
    let (a1, a2) = mode_pair(basis);
    (&a1 - &a2).scaled(re(std::f64::consts::FRAC_1_SQRT_2))
}

/// `a_i^dagger a_i`.
pub fn number_operator(mode: u8, basis: FockBasis) -> Result<Operator> {
    let a = annihilation(mode, basis)?;
    Ok(&a.dagger() * &a)
}

/// Diagonal total photon number `n1 + n2`.
pub fn total_number(basis: FockBasis) -> Operator {
    let d = basis.dim();
    let diag = CVector::from_iterator(d, (0..d).map(|i| re(basis.total_photons(i) as f64)));
    Operator {
        basis,
        matrix: CMatrix::from_diagonal(&diag),
    }
}

/// `|n1 n2>`.
pub fn number_state(n1: usize, n2: usize, basis: FockBasis) -> Result<Ket> {
    let idx = basis.try_index(n1, n2)?;
    let mut ket = Ket::zero(basis);
    ket.amplitudes[idx] = ONE;
    Ok(ket)
}

/// `|psi><psi|` for a normalized ket.
pub fn pure_density(ket: &Ket) -> Result<DensityMatrix> {
    if !ket.is_normalized() {
        return Err(Error::NotNormalized {
            norm_sq: ket.norm_squared(),
        });
    }
    DensityMatrix::new(ket.basis, ket.outer(ket))
}

/// A validated density matrix: Hermitian, unit trace and positive
/// semidefinite within the crate tolerances. Violations are reported, never
/// repaired.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    basis: FockBasis,
    matrix: CMatrix,
}

impl DensityMatrix {
    pub fn new(basis: FockBasis, matrix: CMatrix) -> Result<Self> {
        let d = basis.dim();
        if matrix.nrows() != d || matrix.ncols() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: matrix.nrows().max(matrix.ncols()),
            });
        }
        check_density(&matrix)?;
        Ok(Self { basis, matrix })
    }

    /// Convex combination of states on a common basis.
    pub fn mixture(parts: &[(f64, &DensityMatrix)]) -> Result<Self> {
        let first = parts
            .first()
            .ok_or_else(|| Error::InvalidParameter("empty mixture".into()))?;
        let basis = first.1.basis;
        let d = basis.dim();
        let mut m = CMatrix::zeros(d, d);
        for (w, rho) in parts {
            basis.check_same(&rho.basis)?;
            m += &rho.matrix * re(*w);
        }
        Self::new(basis, m)
    }

    pub fn basis(&self) -> FockBasis {
        self.basis
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    /// `<n1 n2|rho|m1 m2>`, zero for labels outside the truncation.
    pub fn element(&self, ket: (usize, usize), bra: (usize, usize)) -> C64 {
        match (
            self.basis.index(ket.0, ket.1),
            self.basis.index(bra.0, bra.1),
        ) {
            (Some(i), Some(j)) => self.matrix[(i, j)],
            _ => ZERO,
        }
    }

    pub fn trace(&self) -> C64 {
        self.matrix.trace()
    }

    /// `Tr(op rho)`.
    pub fn expectation(&self, op: &Operator) -> Result<C64> {
        self.basis.check_same(&op.basis())?;
        Ok((op.matrix() * &self.matrix).trace())
    }

    /// Largest element-wise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &DensityMatrix) -> f64 {
        max_abs_diff(&self.matrix, &other.matrix)
    }
}

pub(crate) fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Smallest eigenvalue of the Hermitian part of `m`.
pub fn min_eigenvalue(m: &CMatrix) -> f64 {
    let herm = (m + m.adjoint()) * re(0.5);
    SymmetricEigen::new(herm)
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

/// Checks the density-matrix invariants on a raw matrix.
pub fn check_density(m: &CMatrix) -> Result<()> {
    let deviation = max_abs_diff(m, &m.adjoint());
    if deviation > HERMITIAN_TOLERANCE {
        return Err(Error::NotHermitian { deviation });
    }
    let trace = m.trace();
    if (trace - ONE).norm() > TRACE_TOLERANCE {
        return Err(Error::TraceNotUnity { trace: trace.re });
    }
    let min_eigenvalue = min_eigenvalue(m);
    if min_eigenvalue < -POSITIVITY_TOLERANCE {
        return Err(Error::NotPositive { min_eigenvalue });
    }
    Ok(())
}
