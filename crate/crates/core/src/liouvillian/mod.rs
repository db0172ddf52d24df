//! Superoperators on column-stacked density matrices.
//!
//! A density matrix `rho` (D x D) is flattened column by column into a
//! vector of length D², `vec(rho)[i + j*D] = rho[(i, j)]`, which is also
//! nalgebra's storage order. With this convention
//!
//! ```text
//! vec(X rho)  = (I ⊗ X)   vec(rho)      lmul(X)
//! vec(rho X)  = (Xᵀ ⊗ I)  vec(rho)      rmul(X)
//! ```
//!
//! The dissipative generator of the two cavities can be assembled either
//! from the individual modes (all four `a_i rho a_j^dagger` sandwiches) or
//! from the collective mode alone; both must give the same matrix.

mod propagate;
mod spectral;

pub use propagate::{
    evolve_expm, evolve_numeric, evolve_rk4, expm_pade, Propagator, RK4_MAX_STEP, RK4_TOLERANCE,
};
pub(crate) use spectral::eigenvalues;
pub use spectral::{
    cluster_eigenvalues, null_space, spectrum, EigenCluster, CLUSTER_RADIUS,
    KERNEL_TOLERANCE,
};

use std::ops::{Add, Mul, Sub};

use crate::error::{Error, Result};
use crate::fock::{annihilation, collective_mode, re, CMatrix, CVector, FockBasis, Operator, C64};

/// Linear map on vectorized density matrices of one truncated basis.
#[derive(Debug, Clone, PartialEq)]
pub struct SuperOperator {
    basis: FockBasis,
    matrix: CMatrix,
}

/// A density matrix (or any operator) flattened by column stacking.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorizedState {
    basis: FockBasis,
    data: CVector,
}

impl VectorizedState {
    pub fn new(basis: FockBasis, data: CVector) -> Result<Self> {
        let expected = basis.dim() * basis.dim();
        if data.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                got: data.len(),
            });
        }
        Ok(Self { basis, data })
    }

    pub fn basis(&self) -> FockBasis {
        self.basis
    }

    pub fn data(&self) -> &CVector {
        &self.data
    }

    pub fn into_data(self) -> CVector {
        self.data
    }

    pub fn to_matrix(&self) -> CMatrix {
        devectorize(&self.data, self.basis.dim())
    }
}

pub fn vectorize(m: &CMatrix) -> CVector {
    CVector::from_column_slice(m.as_slice())
}

pub fn devectorize(v: &CVector, dim: usize) -> CMatrix {
    assert_eq!(v.len(), dim * dim, "vector length is not dim^2");
    CMatrix::from_column_slice(dim, dim, v.as_slice())
}

/// Vectorizes `m` on `basis`.
pub fn vectorize_on(basis: FockBasis, m: &CMatrix) -> Result<VectorizedState> {
    if m.nrows() != basis.dim() || m.ncols() != basis.dim() {
        return Err(Error::DimensionMismatch {
            expected: basis.dim(),
            got: m.nrows(),
        });
    }
    Ok(VectorizedState {
        basis,
        data: vectorize(m),
    })
}

/// Column index of the dyad `|ket><bra|` in the vectorized space.
pub fn dyad_index(basis: FockBasis, ket: usize, bra: usize) -> usize {
    ket + bra * basis.dim()
}

/// `|n1 n2><m1 m2|` as a raw matrix.
pub fn dyad(basis: FockBasis, ket: (usize, usize), bra: (usize, usize)) -> Result<CMatrix> {
    let i = basis.try_index(ket.0, ket.1)?;
    let j = basis.try_index(bra.0, bra.1)?;
    let d = basis.dim();
    let mut m = CMatrix::zeros(d, d);
    m[(i, j)] = re(1.0);
    Ok(m)
}

impl SuperOperator {
    pub fn new(basis: FockBasis, matrix: CMatrix) -> Result<Self> {
        let d2 = basis.dim() * basis.dim();
        if matrix.nrows() != d2 || matrix.ncols() != d2 {
            return Err(Error::DimensionMismatch {
                expected: d2,
                got: matrix.nrows().max(matrix.ncols()),
            });
        }
        Ok(Self { basis, matrix })
    }

    pub fn identity(basis: FockBasis) -> Self {
        let d2 = basis.dim() * basis.dim();
        Self {
            basis,
            matrix: CMatrix::identity(d2, d2),
        }
    }

    pub fn zero(basis: FockBasis) -> Self {
        let d2 = basis.dim() * basis.dim();
        Self {
            basis,
            matrix: CMatrix::zeros(d2, d2),
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

    pub fn scaled(&self, factor: C64) -> Self {
        Self {
            basis: self.basis,
            matrix: &self.matrix * factor,
        }
    }

    /// `self + c * identity`.
    pub fn shifted(&self, c: C64) -> Self {
        let mut matrix = self.matrix.clone();
        for i in 0..matrix.nrows() {
            matrix[(i, i)] += c;
        }
        Self {
            basis: self.basis,
            matrix,
        }
    }

    pub fn commutator(&self, other: &SuperOperator) -> SuperOperator {
        &(self * other) - &(other * self)
    }

    /// Applies the map to a raw D x D matrix.
    pub fn apply(&self, rho: &CMatrix) -> Result<CMatrix> {
        let d = self.basis.dim();
        if rho.nrows() != d || rho.ncols() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: rho.nrows(),
            });
        }
        Ok(devectorize(&(&self.matrix * vectorize(rho)), d))
    }

    pub fn apply_vectorized(&self, v: &VectorizedState) -> Result<VectorizedState> {
        self.basis.check_same(&v.basis)?;
        Ok(VectorizedState {
            basis: self.basis,
            data: &self.matrix * &v.data,
        })
    }

    /// Terminating exponential `exp(coeff * self)` of a nilpotent map.
    pub fn exp_nilpotent(&self, coeff: C64, max_terms: usize) -> Result<SuperOperator> {
        Ok(Self {
            basis: self.basis,
            matrix: crate::fock::terminating_exp(&self.matrix, coeff, max_terms)?,
        })
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.matrix.norm()
    }
}

macro_rules! superop_binop {
    ($trait:ident, $method:ident, $op:tt) => {
        impl $trait<&SuperOperator> for &SuperOperator {
            type Output = SuperOperator;

            fn $method(self, rhs: &SuperOperator) -> SuperOperator {
                assert_eq!(self.basis, rhs.basis, "superoperators on different truncations");
                SuperOperator {
                    basis: self.basis,
                    matrix: &self.matrix $op &rhs.matrix,
                }
            }
        }
    };
}

superop_binop!(Mul, mul, *);
superop_binop!(Add, add, +);
superop_binop!(Sub, sub, -);

/// Left multiplication `rho -> X rho`, i.e. `I ⊗ X`.
pub fn lmul(op: &Operator) -> SuperOperator {
    let d = op.basis().dim();
    SuperOperator {
        basis: op.basis(),
        matrix: CMatrix::identity(d, d).kronecker(op.matrix()),
    }
}

/// Right multiplication `rho -> rho X`, i.e. `Xᵀ ⊗ I`.
pub fn rmul(op: &Operator) -> SuperOperator {
    let d = op.basis().dim();
    SuperOperator {
        basis: op.basis(),
        matrix: op.matrix().transpose().kronecker(&CMatrix::identity(d, d)),
    }
}

/// Sandwich `rho -> X rho Y`.
pub fn sandwich(left: &Operator, right: &Operator) -> SuperOperator {
    assert_eq!(left.basis(), right.basis(), "operators on different truncations");
    SuperOperator {
        basis: left.basis(),
        matrix: right.matrix().transpose().kronecker(left.matrix()),
    }
}

fn check_rate(decay_rate: f64) -> Result<()> {
    if decay_rate > 0.0 && decay_rate.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "decay rate must be positive and finite, got {decay_rate}"
        )))
    }
}

/// Generator assembled from the individual cavity modes: the sum over
/// `i, j in {1, 2}` of `w [2 a_i rho a_j† - a_j† a_i rho - rho a_j† a_i]`.
///
/// Since `a1 + a2 = sqrt(2) A`, the double sum equals twice the collective
/// dissipator, so the weight is `w = rate/4`. With it both assemblies describe
/// a collective mode damped at `rate`.
pub fn build_gamma_two_mode(decay_rate: f64, basis: FockBasis) -> Result<SuperOperator> {
    check_rate(decay_rate)?;
    let modes = [annihilation(1, basis)?, annihilation(2, basis)?];
    let weight = re(decay_rate / 4.0);
    let mut gamma = SuperOperator::zero(basis);
    for ai in &modes {
        for aj in &modes {
            let aj_dag = aj.dagger();
            let hop = &aj_dag * ai;
            let term = &(&sandwich(ai, &aj_dag).scaled(re(2.0)) - &lmul(&hop)) - &rmul(&hop);
            gamma = &gamma + &term.scaled(weight);
        }
    }
    Ok(gamma)
}

/// Generator assembled from the collective mode:
/// `(rate/2)[2 A rho A† - A†A rho - rho A†A]`.
pub fn build_gamma_collective(decay_rate: f64, basis: FockBasis) -> Result<SuperOperator> {
    check_rate(decay_rate)?;
    let a = collective_mode(basis);
    let a_dag = a.dagger();
    let occ = &a_dag * &a;
    let term = &(&sandwich(&a, &a_dag).scaled(re(2.0)) - &lmul(&occ)) - &rmul(&occ);
    Ok(term.scaled(re(decay_rate / 2.0)))
}
